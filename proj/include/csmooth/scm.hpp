#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "csmooth/dataset.hpp"
#include "csmooth/linalg.hpp"

namespace csmooth::scm {

enum class VarKind { binary_threshold, continuous };

VarKind var_kind_from_string(const std::string& s);
std::string to_string(VarKind k);

// Linear structural causal model with a shared latent confounder U, one
// exogenous instrument dimension Z_j per treatment, and an optional
// threshold-at-zero step for treatments and outcome:
//
//   Z_j ~ Uniform[-1, 1]            (independent of U)
//   U   ~ N(0, 1)
//   T_j = instrument_strength * Z_j + confounder_strength_t * U + noise_t
//   Y   = sum_j effect_j * T_j + confounder_strength_y * U + noise_y
//
// Case features carry Z in their first m coordinates followed by independent
// N(0,1) filler, and the law-article labels are fixed thresholded linear
// functions of the features, so the encoder task has a known optimum.
struct ScmConfig {
    std::size_t n_features = 6;
    double instrument_strength = 1.0;
    double confounder_strength_t = 0.0;
    Vec treatment_effects = {1.0};
    double confounder_strength_y = 0.0;
    double noise_scale_t = 1.0;
    double noise_scale_y = 1.0;
    VarKind treatment_kind = VarKind::continuous;
    VarKind outcome_kind = VarKind::continuous;
    std::string seed_policy = kSeedPolicy;

    // Stream seeds are master_seed + these offsets, one independent engine
    // per stream so any stream can be re-derived in isolation.
    static constexpr std::uint64_t kInstrumentStream = 1;
    static constexpr std::uint64_t kConfounderStream = 2;
    static constexpr std::uint64_t kTreatmentNoiseStream = 3;
    static constexpr std::uint64_t kOutcomeNoiseStream = 4;
    static constexpr std::uint64_t kFeatureNoiseStream = 5;
    static constexpr const char* kSeedPolicy =
        "independent engines seeded master+1 (instrument), master+2 (confounder), "
        "master+3 (treatment noise), master+4 (outcome noise), master+5 (feature noise)";

    std::size_t n_treatments() const { return treatment_effects.size(); }
    std::size_t n_law_labels() const { return n_treatments() > 4 ? n_treatments() : 4; }

    void validate() const;  // throws ConfigError

    nlohmann::json to_json() const;
    static ScmConfig from_json(const nlohmann::json& j);
};

Dataset generate_dataset(const ScmConfig& config, std::size_t n, std::uint64_t seed);

// The confounder draws underlying generate_dataset(config, n, seed); exposed
// so exogeneity can be tested against the actual latent values.
Vec sample_confounder(std::size_t n, std::uint64_t seed);

// Fixed law-article labelling rule: label k fires when a published linear
// functional of the features is positive. Row k of the weight matrix loads
// 1.0 on instrument coordinate (k mod m) and 0.5 on a rotating filler
// coordinate.
Mat law_label_weights(const ScmConfig& config);
std::vector<int> law_labels_for(const ScmConfig& config, const Vec& features);

struct TrueAte {
    double value = 0.0;
    double std_error = 0.0;   // 0 for the closed form
    bool monte_carlo = false;
};

// Ground-truth ATE(a, b) for forcing treatment j. Closed form effect_j*(a-b)
// when the outcome is continuous; otherwise a Monte-Carlo do-intervention
// with common random numbers across the two arms.
TrueAte true_ate(const ScmConfig& config, std::size_t treatment_index, double a, double b,
                 std::size_t mc_samples = 1000000, std::uint64_t mc_seed = 97531);

}  // namespace csmooth::scm
