#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csmooth/classifier.hpp"
#include "csmooth/dataset.hpp"
#include "csmooth/encoder.hpp"
#include "csmooth/estimators.hpp"
#include "csmooth/refutation.hpp"
#include "csmooth/scm.hpp"
#include "csmooth/smoothing.hpp"

namespace csmooth::pipeline {

struct SplitFractions {
    double train = 0.7;
    double validation = 0.15;
    double test = 0.15;

    void validate() const;  // positive, sum to 1 within 1e-9
};

struct DataSource {
    enum class Kind { synthetic, ingested };
    Kind kind = Kind::synthetic;
    scm::ScmConfig scm;
    std::size_t n = 10000;
    std::optional<std::uint64_t> seed;  // defaults to the master seed
    std::string path;                   // ingested only
};

struct CausalSection {
    std::vector<causal::CausalQuery> queries = {causal::CausalQuery{}};
    causal::Estimator estimator = causal::Estimator::two_stage_ls;
};

struct RefutationSection {
    std::size_t n_reps = 100;
    double fraction = 0.8;                 // subset refuter
    std::optional<std::uint64_t> seed;     // default: derived from master_seed
    refute::RefutationConfig tuning;
};

struct DebugSection {
    // Self-test hook: deliberately reads the outcome during instrument
    // construction so the leakage guard can be seen to trip.
    bool read_outcome_before_estimation = false;
};

// Seed streams hanging off master_seed.
inline constexpr std::uint64_t kSplitSeedOffset = 101;
inline constexpr std::uint64_t kEncoderSeedOffset = 202;
inline constexpr std::uint64_t kBootstrapSeedOffset = 303;
inline constexpr std::uint64_t kPlaceboSeedOffset = 304;
inline constexpr std::uint64_t kSubsetSeedOffset = 305;
inline constexpr std::uint64_t kClassifierSeedOffset = 404;

struct PipelineConfig {
    DataSource data;
    SplitFractions splits;
    encoder::TrainConfig encoder;
    CausalSection causal;
    RefutationSection refutation;
    losses::SmoothingConfig smoothing;
    classifier::TrainConfig classifier;
    DebugSection debug;
    std::uint64_t master_seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

// Records every outcome read made through it. The experiment runner routes
// all pre-estimation access through a guard and aborts if the count is
// nonzero by the time the estimators run.
class OutcomeGuard {
public:
    explicit OutcomeGuard(const Dataset& data) : data_(&data) {}

    std::size_t size() const { return data_->records.size(); }
    const Vec& features(std::size_t i) const { return data_->records[i].features; }
    const std::vector<int>& law_labels(std::size_t i) const { return data_->records[i].law_labels; }
    const Vec& treatments(std::size_t i) const { return data_->records[i].treatments; }
    double outcome(std::size_t i) const {
        ++outcome_reads_;
        return data_->records[i].outcome;
    }
    long outcome_reads() const { return outcome_reads_; }

private:
    const Dataset* data_;
    mutable long outcome_reads_ = 0;
};

using ExperimentReport = nlohmann::json;

// Runs the full experiment: data, seeded split, encoder fit on the training
// split, instruments written everywhere from that fit, ATE estimation and
// the three refuters on the training split, three classifier trainings
// (hard, label smoothed, causal smoothed) with one shared seed, and test
// evaluation. Deterministic for a fixed config apart from the timestamps.
// When artifacts_dir is non-empty, loss curves and test representations are
// exported there as CSV.
ExperimentReport run_experiment(const PipelineConfig& config, const std::string& artifacts_dir = "");

enum class ReportFormat { json, text_summary };

void emit_report(const ExperimentReport& report, const std::string& path, ReportFormat format);
std::string render_text_summary(const ExperimentReport& report);

}  // namespace csmooth::pipeline
