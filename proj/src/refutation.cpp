#include "csmooth/refutation.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "csmooth/errors.hpp"
#include "csmooth/rng.hpp"

namespace csmooth::refute {

using causal::CausalQuery;
using causal::Estimator;
using nlohmann::json;

Method method_from_string(const std::string& s) {
    if (s == "bootstrap") return Method::bootstrap;
    if (s == "placebo") return Method::placebo;
    if (s == "subset") return Method::subset;
    throw ConfigError("unknown refutation method '" + s + "'");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::bootstrap: return "bootstrap";
        case Method::placebo: return "placebo";
        case Method::subset: return "subset";
    }
    return "unknown";
}

PlaceboMode placebo_mode_from_string(const std::string& s) {
    if (s == "joint_permutation") return PlaceboMode::joint_permutation;
    if (s == "treatment_only") return PlaceboMode::treatment_only;
    if (s == "instrument_only") return PlaceboMode::instrument_only;
    throw ConfigError("unknown placebo mode '" + s + "'");
}

std::string to_string(PlaceboMode m) {
    switch (m) {
        case PlaceboMode::joint_permutation: return "joint_permutation";
        case PlaceboMode::treatment_only: return "treatment_only";
        case PlaceboMode::instrument_only: return "instrument_only";
    }
    return "unknown";
}

json RefutationReport::to_json() const {
    json reps = json::array();
    for (double v : replicate_ates) {
        if (std::isnan(v)) reps.push_back(nullptr);
        else reps.push_back(v);
    }
    json j{{"method", to_string(method)},
           {"original_ate", original_ate},
           {"replicate_ates", reps},
           {"failed_replicates", failed_replicates},
           {"replicate_mean", replicate_mean},
           {"replicate_std", replicate_std},
           {"n_reps", n_reps},
           {"verdict", pass ? "pass" : "fail"},
           {"seed", seed}};
    if (method == Method::subset) j["subset_fraction"] = subset_fraction;
    if (method == Method::placebo) j["placebo_mode"] = to_string(placebo_mode);
    return j;
}

namespace {

struct Columns {
    Vec y;
    Vec t;
    std::vector<Vec> z;
};

Columns extract(const Dataset& data, const CausalQuery& query, Estimator estimator) {
    Columns c;
    c.y = data.outcome_column();
    c.t = data.treatment_column(query.treatment_index);
    for (std::size_t col : causal::detail::resolve_instrument_columns(data, query, estimator)) {
        c.z.push_back(data.instrument_column(col));
    }
    return c;
}

Vec gather(const Vec& v, const std::vector<std::size_t>& idx) {
    Vec out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

Columns gather(const Columns& c, const std::vector<std::size_t>& idx) {
    Columns out;
    out.y = gather(c.y, idx);
    out.t = gather(c.t, idx);
    out.z.reserve(c.z.size());
    for (const Vec& z : c.z) out.z.push_back(gather(z, idx));
    return out;
}

struct ReplicateRun {
    std::vector<double> ates;
    std::vector<std::size_t> failed;
    std::vector<std::string> messages;
    double mean = 0.0;
    double stddev = 0.0;
};

template <class MakeColumns>
ReplicateRun run_replicates(std::size_t n_reps, const CausalQuery& query, Estimator estimator,
                            const RefutationConfig& config, MakeColumns&& make) {
    ReplicateRun run;
    run.ates.resize(n_reps, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 0; r < n_reps; ++r) {
        try {
            Columns cols = make(r);
            run.ates[r] = causal::detail::estimate_core(cols.y, cols.t, cols.z, query, estimator).ate;
        } catch (const NumericError& e) {
            run.failed.push_back(r);
            run.messages.emplace_back(e.what());
        }
    }
    if (static_cast<double>(run.failed.size()) > config.max_failed_fraction * static_cast<double>(n_reps)) {
        throw RefutationError("refutation aborted: " + std::to_string(run.failed.size()) + " of " +
                              std::to_string(n_reps) + " replicates failed (" + run.messages.front() + ")");
    }

    double sum = 0.0;
    std::size_t n_ok = 0;
    bool all_same = true;
    double first = 0.0;
    for (double v : run.ates) {
        if (std::isnan(v)) continue;
        if (n_ok == 0) first = v;
        all_same = all_same && v == first;
        sum += v;
        ++n_ok;
    }
    if (all_same && n_ok > 0) {
        // identical replicates must report exactly their common value
        run.mean = first;
        run.stddev = 0.0;
        return run;
    }
    run.mean = n_ok > 0 ? sum / static_cast<double>(n_ok) : 0.0;
    double ss = 0.0;
    for (double v : run.ates) {
        if (!std::isnan(v)) ss += (v - run.mean) * (v - run.mean);
    }
    run.stddev = n_ok > 1 ? std::sqrt(ss / static_cast<double>(n_ok - 1)) : 0.0;
    return run;
}

RefutationReport assemble(Method method, double original, ReplicateRun&& run, std::size_t n_reps,
                          std::uint64_t seed) {
    RefutationReport rep;
    rep.method = method;
    rep.original_ate = original;
    rep.replicate_ates = std::move(run.ates);
    rep.failed_replicates = std::move(run.failed);
    rep.failure_messages = std::move(run.messages);
    rep.replicate_mean = run.mean;
    rep.replicate_std = run.stddev;
    rep.n_reps = n_reps;
    rep.seed = seed;
    return rep;
}

}  // namespace

RefutationReport bootstrap_refute(const Dataset& data, const CausalQuery& query, Estimator estimator,
                                  std::size_t n_reps, std::uint64_t seed, const RefutationConfig& config) {
    if (n_reps < 2) throw ConfigError("bootstrap_refute: n_reps must be >= 2");
    const Columns cols = extract(data, query, estimator);
    const double original = causal::detail::estimate_core(cols.y, cols.t, cols.z, query, estimator).ate;
    const std::size_t n = cols.y.size();

    ReplicateRun run = run_replicates(n_reps, query, estimator, config, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        return gather(cols, rng.sample_with_replacement(n, n));
    });

    RefutationReport rep = assemble(Method::bootstrap, original, std::move(run), n_reps, seed);
    rep.pass = std::abs(rep.replicate_mean - original) <= config.band_multiplier * rep.replicate_std;
    return rep;
}

RefutationReport placebo_refute(const Dataset& data, const CausalQuery& query, Estimator estimator,
                                std::size_t n_reps, std::uint64_t seed, const RefutationConfig& config) {
    if (n_reps < 2) throw ConfigError("placebo_refute: n_reps must be >= 2");
    const Columns cols = extract(data, query, estimator);
    const double original = causal::detail::estimate_core(cols.y, cols.t, cols.z, query, estimator).ate;
    const std::size_t n = cols.y.size();

    const std::set<double> t_values(cols.t.begin(), cols.t.end());
    const bool two_valued = t_values.size() == 2;
    double t_lo = 0.0, t_hi = 1.0, rate = 0.5;
    if (two_valued) {
        t_lo = *t_values.begin();
        t_hi = *t_values.rbegin();
        std::size_t hi_count = 0;
        for (double v : cols.t) hi_count += v == t_hi ? 1 : 0;
        rate = static_cast<double>(hi_count) / static_cast<double>(n);
    }

    ReplicateRun run = run_replicates(n_reps, query, estimator, config, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        Columns c = cols;
        switch (config.placebo_mode) {
            case PlaceboMode::joint_permutation: {
                const auto perm = rng.permutation(n);
                c.t = gather(cols.t, perm);
                for (std::size_t k = 0; k < c.z.size(); ++k) c.z[k] = gather(cols.z[k], perm);
                break;
            }
            case PlaceboMode::treatment_only: {
                if (two_valued) {
                    for (double& v : c.t) v = rng.bernoulli(rate) ? t_hi : t_lo;
                } else {
                    c.t = gather(cols.t, rng.permutation(n));
                }
                break;
            }
            case PlaceboMode::instrument_only: {
                const auto perm = rng.permutation(n);
                for (std::size_t k = 0; k < c.z.size(); ++k) c.z[k] = gather(cols.z[k], perm);
                break;
            }
        }
        return c;
    });

    RefutationReport rep = assemble(Method::placebo, original, std::move(run), n_reps, seed);
    rep.placebo_mode = config.placebo_mode;
    const double tol = config.placebo_tol_scale * std::max(1.0, std::abs(original));
    rep.pass = std::abs(rep.replicate_mean) <= config.band_multiplier * rep.replicate_std &&
               std::abs(rep.replicate_mean) <= tol;
    return rep;
}

RefutationReport subset_refute(const Dataset& data, const CausalQuery& query, Estimator estimator,
                               double fraction, std::size_t n_reps, std::uint64_t seed,
                               const RefutationConfig& config) {
    if (n_reps < 2) throw ConfigError("subset_refute: n_reps must be >= 2");
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ConfigError("subset_refute: fraction must lie in (0, 1]");
    }
    const Columns cols = extract(data, query, estimator);
    const std::size_t n = cols.y.size();
    const std::size_t k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    if (k < 2) throw ConfigError("subset_refute: subset size " + std::to_string(k) + " is too small");
    const double original = causal::detail::estimate_core(cols.y, cols.t, cols.z, query, estimator).ate;

    ReplicateRun run = run_replicates(n_reps, query, estimator, config, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        return gather(cols, rng.sample_without_replacement(n, k));
    });

    RefutationReport rep = assemble(Method::subset, original, std::move(run), n_reps, seed);
    rep.subset_fraction = fraction;
    rep.pass = std::abs(rep.replicate_mean - original) <= config.band_multiplier * rep.replicate_std;
    return rep;
}

}  // namespace csmooth::refute
