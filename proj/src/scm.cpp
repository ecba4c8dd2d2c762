#include "csmooth/scm.hpp"

#include <cmath>

#include "csmooth/errors.hpp"
#include "csmooth/rng.hpp"

namespace csmooth::scm {

using nlohmann::json;

VarKind var_kind_from_string(const std::string& s) {
    if (s == "binary_threshold") return VarKind::binary_threshold;
    if (s == "continuous") return VarKind::continuous;
    throw ConfigError("unknown variable kind '" + s + "' (use binary_threshold or continuous)");
}

std::string to_string(VarKind k) {
    return k == VarKind::binary_threshold ? "binary_threshold" : "continuous";
}

void ScmConfig::validate() const {
    if (treatment_effects.empty()) throw ConfigError("treatment_effects must have length >= 1");
    if (noise_scale_t < 0.0 || noise_scale_y < 0.0) throw ConfigError("noise scales must be >= 0");
    if (n_features < n_treatments()) {
        throw ConfigError("n_features must be >= number of treatments (features embed the instrument block)");
    }
    for (double d : treatment_effects) {
        if (!std::isfinite(d)) throw ConfigError("treatment_effects must be finite");
    }
    if (!std::isfinite(instrument_strength) || !std::isfinite(confounder_strength_t) ||
        !std::isfinite(confounder_strength_y)) {
        throw ConfigError("SCM coefficients must be finite");
    }
}

json ScmConfig::to_json() const {
    return json{{"n_features", n_features},
                {"instrument_strength", instrument_strength},
                {"confounder_strength_t", confounder_strength_t},
                {"treatment_effects", treatment_effects},
                {"confounder_strength_y", confounder_strength_y},
                {"noise_scale_t", noise_scale_t},
                {"noise_scale_y", noise_scale_y},
                {"treatment_kind", to_string(treatment_kind)},
                {"outcome_kind", to_string(outcome_kind)},
                {"seed_policy", seed_policy}};
}

ScmConfig ScmConfig::from_json(const json& j) {
    ScmConfig c;
    try {
        if (j.contains("n_features")) c.n_features = j.at("n_features").get<std::size_t>();
        if (j.contains("instrument_strength")) c.instrument_strength = j.at("instrument_strength").get<double>();
        if (j.contains("confounder_strength_t")) c.confounder_strength_t = j.at("confounder_strength_t").get<double>();
        if (j.contains("treatment_effects")) c.treatment_effects = j.at("treatment_effects").get<Vec>();
        if (j.contains("confounder_strength_y")) c.confounder_strength_y = j.at("confounder_strength_y").get<double>();
        if (j.contains("noise_scale_t")) c.noise_scale_t = j.at("noise_scale_t").get<double>();
        if (j.contains("noise_scale_y")) c.noise_scale_y = j.at("noise_scale_y").get<double>();
        if (j.contains("treatment_kind")) c.treatment_kind = var_kind_from_string(j.at("treatment_kind").get<std::string>());
        if (j.contains("outcome_kind")) c.outcome_kind = var_kind_from_string(j.at("outcome_kind").get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid SCM config: ") + e.what());
    }
    c.validate();
    return c;
}

Mat law_label_weights(const ScmConfig& config) {
    const std::size_t m = config.n_treatments();
    const std::size_t n_law = config.n_law_labels();
    const std::size_t d = config.n_features;
    Mat w(n_law, d);
    for (std::size_t k = 0; k < n_law; ++k) {
        w(k, k % m) = 1.0;
        if (d > m) w(k, m + (k % (d - m))) = 0.5;
    }
    return w;
}

std::vector<int> law_labels_for(const ScmConfig& config, const Vec& features) {
    if (features.size() != config.n_features) throw DataError("law labels: feature dimension mismatch");
    const Mat w = law_label_weights(config);
    std::vector<int> labels(w.rows);
    for (std::size_t k = 0; k < w.rows; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.cols; ++i) s += w(k, i) * features[i];
        labels[k] = s > 0.0 ? 1 : 0;
    }
    return labels;
}

Vec sample_confounder(std::size_t n, std::uint64_t seed) {
    Rng rng(derive_seed(seed, ScmConfig::kConfounderStream));
    Vec u(n);
    for (double& x : u) x = rng.normal();
    return u;
}

Dataset generate_dataset(const ScmConfig& config, std::size_t n, std::uint64_t seed) {
    config.validate();
    if (n < 1) throw ConfigError("generate_dataset: n must be >= 1");

    const std::size_t m = config.n_treatments();
    const std::size_t d = config.n_features;
    const std::size_t n_law = config.n_law_labels();

    Rng rng_z(derive_seed(seed, ScmConfig::kInstrumentStream));
    Rng rng_t(derive_seed(seed, ScmConfig::kTreatmentNoiseStream));
    Rng rng_y(derive_seed(seed, ScmConfig::kOutcomeNoiseStream));
    Rng rng_x(derive_seed(seed, ScmConfig::kFeatureNoiseStream));
    const Vec u = sample_confounder(n, seed);

    Dataset ds;
    ds.schema.n_features = d;
    ds.schema.n_instruments = m;
    ds.schema.n_treatments = m;
    ds.schema.n_law_labels = n_law;
    ds.schema.treatment_kind =
        config.treatment_kind == VarKind::binary_threshold ? ColumnKind::binary : ColumnKind::real;
    ds.schema.outcome_kind =
        config.outcome_kind == VarKind::binary_threshold ? ColumnKind::binary : ColumnKind::real;
    ds.provenance.kind = Provenance::Kind::synthetic;
    ds.provenance.detail = config.to_json().dump();
    ds.provenance.seed = seed;

    ds.records.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Record& r = ds.records[i];
        r.instrument.resize(m);
        for (double& z : r.instrument) z = rng_z.uniform(-1.0, 1.0);

        r.treatments.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double latent = config.instrument_strength * r.instrument[j] +
                                  config.confounder_strength_t * u[i] +
                                  config.noise_scale_t * rng_t.normal();
            r.treatments[j] =
                config.treatment_kind == VarKind::binary_threshold ? (latent > 0.0 ? 1.0 : 0.0) : latent;
        }

        double y = config.confounder_strength_y * u[i] + config.noise_scale_y * rng_y.normal();
        for (std::size_t j = 0; j < m; ++j) y += config.treatment_effects[j] * r.treatments[j];
        r.outcome = config.outcome_kind == VarKind::binary_threshold ? (y > 0.0 ? 1.0 : 0.0) : y;

        r.features.resize(d);
        for (std::size_t j = 0; j < m; ++j) r.features[j] = r.instrument[j];
        for (std::size_t j = m; j < d; ++j) r.features[j] = rng_x.normal();

        r.law_labels = law_labels_for(config, r.features);
    }
    return ds;
}

TrueAte true_ate(const ScmConfig& config, std::size_t treatment_index, double a, double b,
                 std::size_t mc_samples, std::uint64_t mc_seed) {
    config.validate();
    const std::size_t m = config.n_treatments();
    if (treatment_index >= m) throw ConfigError("true_ate: treatment_index out of range");

    if (config.outcome_kind == VarKind::continuous) {
        return TrueAte{config.treatment_effects[treatment_index] * (a - b), 0.0, false};
    }

    // Thresholded outcome: common-random-number Monte Carlo over the two arms.
    Rng rng(mc_seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    Vec t(m);
    for (std::size_t s = 0; s < mc_samples; ++s) {
        const double u = rng.normal();
        for (std::size_t j = 0; j < m; ++j) {
            if (j == treatment_index) continue;
            const double z = rng.uniform(-1.0, 1.0);
            const double latent = config.instrument_strength * z + config.confounder_strength_t * u +
                                  config.noise_scale_t * rng.normal();
            t[j] = config.treatment_kind == VarKind::binary_threshold ? (latent > 0.0 ? 1.0 : 0.0) : latent;
        }
        const double eps_y = config.noise_scale_y * rng.normal();
        double base = config.confounder_strength_y * u + eps_y;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != treatment_index) base += config.treatment_effects[j] * t[j];
        }
        const double delta_j = config.treatment_effects[treatment_index];
        const double ya = (base + delta_j * a) > 0.0 ? 1.0 : 0.0;
        const double yb = (base + delta_j * b) > 0.0 ? 1.0 : 0.0;
        const double diff = ya - yb;
        sum += diff;
        sum_sq += diff * diff;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return TrueAte{mean, std::sqrt(var / n), true};
}

}  // namespace csmooth::scm
