#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "csmooth/dataset.hpp"
#include "csmooth/estimators.hpp"

namespace csmooth::refute {

enum class Method { bootstrap, placebo, subset };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

// What the placebo replaces. joint_permutation reassigns each row's
// (treatment, instrument) pair by one shared permutation: the first stage
// keeps its strength while both variables lose their tie to the outcome, so
// an IV estimate of the placebo effect is well defined and should be near
// zero. treatment_only follows the literal reading (fresh Bernoulli draws
// for a two-valued treatment, a permutation otherwise) but collapses the
// first stage under IV estimators; it is kept for the naive baseline.
enum class PlaceboMode { joint_permutation, treatment_only, instrument_only };

PlaceboMode placebo_mode_from_string(const std::string& s);
std::string to_string(PlaceboMode m);

struct RefutationConfig {
    double band_multiplier = 2.0;       // pass band around the reference value
    double placebo_tol_scale = 0.05;    // |mean| <= scale * max(1, |original|)
    double max_failed_fraction = 0.10;  // more than this aborts the refutation
    PlaceboMode placebo_mode = PlaceboMode::joint_permutation;
};

struct RefutationReport {
    Method method = Method::bootstrap;
    double original_ate = 0.0;
    std::vector<double> replicate_ates;        // NaN marks a failed replicate
    std::vector<std::size_t> failed_replicates;
    std::vector<std::string> failure_messages;
    double replicate_mean = 0.0;
    double replicate_std = 0.0;
    std::size_t n_reps = 0;
    double subset_fraction = 1.0;
    bool pass = false;
    std::uint64_t seed = 0;
    PlaceboMode placebo_mode = PlaceboMode::joint_permutation;  // placebo only

    nlohmann::json to_json() const;
};

// Replicate r uses seed + r; replicates are independent of one another, so
// any parallel schedule that honors that derivation reproduces the
// sequential result.
RefutationReport bootstrap_refute(const Dataset& data, const causal::CausalQuery& query,
                                  causal::Estimator estimator, std::size_t n_reps, std::uint64_t seed,
                                  const RefutationConfig& config = {});

RefutationReport placebo_refute(const Dataset& data, const causal::CausalQuery& query,
                                causal::Estimator estimator, std::size_t n_reps, std::uint64_t seed,
                                const RefutationConfig& config = {});

RefutationReport subset_refute(const Dataset& data, const causal::CausalQuery& query,
                               causal::Estimator estimator, double fraction, std::size_t n_reps,
                               std::uint64_t seed, const RefutationConfig& config = {});

}  // namespace csmooth::refute
