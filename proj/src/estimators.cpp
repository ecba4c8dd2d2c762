#include "csmooth/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "csmooth/errors.hpp"

namespace csmooth::causal {

using nlohmann::json;

Estimator estimator_from_string(const std::string& s) {
    if (s == "wald") return Estimator::wald;
    if (s == "covariance_iv") return Estimator::covariance_iv;
    if (s == "two_stage_ls") return Estimator::two_stage_ls;
    if (s == "naive") return Estimator::naive;
    throw ConfigError("unknown estimator '" + s + "'");
}

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::wald: return "wald";
        case Estimator::covariance_iv: return "covariance_iv";
        case Estimator::two_stage_ls: return "two_stage_ls";
        case Estimator::naive: return "naive";
    }
    return "unknown";
}

json CausalEstimate::to_json() const {
    return json{{"ate", ate},
                {"std_error", std_error},
                {"estimator", to_string(estimator)},
                {"treatment_index", treatment_index},
                {"contrast", {{"a", contrast.a}, {"b", contrast.b}}},
                {"n_used", n_used},
                {"first_stage_strength", first_stage_strength}};
}

namespace detail {

namespace {

struct StratumStats {
    std::size_t n = 0;
    double mean_y = 0.0, mean_t = 0.0;
    double var_y = 0.0, var_t = 0.0, cov_yt = 0.0;
};

StratumStats stratum_stats(const Vec& y, const Vec& t, const Vec& z, double value) {
    StratumStats s;
    double sy = 0.0, st = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == value) {
            ++s.n;
            sy += y[i];
            st += t[i];
        }
    }
    if (s.n == 0) return s;
    s.mean_y = sy / static_cast<double>(s.n);
    s.mean_t = st / static_cast<double>(s.n);
    double vy = 0.0, vt = 0.0, c = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == value) {
            const double dy = y[i] - s.mean_y;
            const double dt = t[i] - s.mean_t;
            vy += dy * dy;
            vt += dt * dt;
            c += dy * dt;
        }
    }
    if (s.n > 1) {
        const double denom = static_cast<double>(s.n - 1);
        s.var_y = vy / denom;
        s.var_t = vt / denom;
        s.cov_yt = c / denom;
    }
    return s;
}

void require_finite(const Vec& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericError(std::string(what) + " contains a non-finite value");
    }
}

}  // namespace

CausalEstimate wald_core(const Vec& y, const Vec& t, const Vec& z, Contrast contrast,
                         std::optional<std::pair<double, double>> strata, std::size_t treatment_index,
                         double tol_weak) {
    require_finite(y, "outcome");
    require_finite(t, "treatment");
    require_finite(z, "instrument");

    double za, zb;
    if (strata) {
        za = strata->first;
        zb = strata->second;
        if (za == zb) throw ConfigError("wald: the two instrument strata values must differ");
    } else {
        std::set<double> values(z.begin(), z.end());
        if (values.size() < 2) {
            throw WeakInstrumentError("wald: instrument column is constant");
        }
        if (values.size() > 2) {
            throw StratumError("wald: instrument column has " + std::to_string(values.size()) +
                               " distinct values; supply the two stratum values explicitly");
        }
        zb = *values.begin();
        za = *values.rbegin();
    }

    const StratumStats sa = stratum_stats(y, t, z, za);
    const StratumStats sb = stratum_stats(y, t, z, zb);
    if (sa.n == 0 || sb.n == 0) {
        throw StratumError("wald: empty instrument stratum");
    }

    const double num = sa.mean_y - sb.mean_y;
    const double den = sa.mean_t - sb.mean_t;
    if (std::abs(den) < tol_weak) {
        throw WeakInstrumentError("wald: first-stage denominator " + std::to_string(den) +
                                  " is below the weak-instrument tolerance");
    }
    const double slope = num / den;

    // Delta method on the ratio of independent stratum means.
    const double na = static_cast<double>(sa.n);
    const double nb = static_cast<double>(sb.n);
    const double var_num = sa.var_y / na + sb.var_y / nb;
    const double var_den = sa.var_t / na + sb.var_t / nb;
    const double cov_nd = sa.cov_yt / na + sb.cov_yt / nb;
    const double var_slope =
        std::max(0.0, (var_num - 2.0 * slope * cov_nd + slope * slope * var_den) / (den * den));

    CausalEstimate est;
    est.estimator = Estimator::wald;
    est.treatment_index = treatment_index;
    est.contrast = contrast;
    const double span = contrast.a - contrast.b;
    est.ate = slope * span;
    est.std_error = std::sqrt(var_slope) * std::abs(span);
    est.n_used = sa.n + sb.n;
    est.first_stage_strength = std::abs(den);
    return est;
}

CausalEstimate cov_iv_core(const Vec& y, const Vec& t, const Vec& z, Contrast contrast,
                           std::size_t treatment_index, double tol_weak) {
    require_finite(y, "outcome");
    require_finite(t, "treatment");
    require_finite(z, "instrument");
    const std::size_t n = y.size();
    if (n < 2) throw DataError("covariance_iv: need at least 2 rows");

    const double cov_tz = sample_cov(t, z);
    if (std::abs(cov_tz) < tol_weak) {
        throw WeakInstrumentError("covariance_iv: |Cov(T,Z)| = " + std::to_string(std::abs(cov_tz)) +
                                  " is below the weak-instrument tolerance");
    }
    const double slope = sample_cov(y, z) / cov_tz;

    // Classical IV regression standard error for a scalar instrument.
    const double my = mean(y), mt = mean(t), mz = mean(z);
    double rss = 0.0, szz = 0.0, szt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = (y[i] - my) - slope * (t[i] - mt);
        rss += e * e;
        szz += (z[i] - mz) * (z[i] - mz);
        szt += (z[i] - mz) * (t[i] - mt);
    }
    const double dof = n > 2 ? static_cast<double>(n - 2) : 1.0;
    const double sigma2 = rss / dof;
    const double var_slope = szt != 0.0 ? sigma2 * szz / (szt * szt) : 0.0;

    CausalEstimate est;
    est.estimator = Estimator::covariance_iv;
    est.treatment_index = treatment_index;
    est.contrast = contrast;
    const double span = contrast.a - contrast.b;
    est.ate = slope * span;
    est.std_error = std::sqrt(std::max(0.0, var_slope)) * std::abs(span);
    est.n_used = n;
    est.first_stage_strength = std::abs(cov_tz);
    return est;
}

std::vector<CausalEstimate> tsls_core(const Vec& y, const std::vector<Vec>& treatments,
                                      const std::vector<Vec>& instruments, Contrast contrast,
                                      const std::vector<std::size_t>& treatment_indices,
                                      double tol_weak) {
    const std::size_t p = treatments.size();
    const std::size_t k = instruments.size();
    if (p == 0) throw ConfigError("two_stage_ls: no treatment columns");
    if (k < p) {
        throw IdentificationError("two_stage_ls: " + std::to_string(k) + " instrument column(s) cannot identify " +
                                  std::to_string(p) + " treatment(s)");
    }
    require_finite(y, "outcome");
    for (const auto& c : treatments) require_finite(c, "treatment");
    for (const auto& c : instruments) require_finite(c, "instrument");

    const std::size_t n = y.size();

    // Stage 1: project each treatment onto the instrument block.
    std::vector<Vec> fitted(p);
    Vec first_stage_norm(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        LeastSquaresFit f1 = least_squares(instruments, treatments[j]);
        double norm = 0.0;
        for (double c : f1.coef) norm += c * c;
        first_stage_norm[j] = std::sqrt(norm);
        if (std::sqrt(sample_var(f1.fitted)) < tol_weak) {
            throw WeakInstrumentError("two_stage_ls: fitted treatment " + std::to_string(treatment_indices[j]) +
                                      " has no instrument-driven variation");
        }
        fitted[j] = std::move(f1.fitted);
    }

    // Stage 2: outcome on the fitted treatments.
    LeastSquaresFit f2 = least_squares(fitted, y);

    // Residuals use the original treatments; stage-1 fits preserve column
    // means, so the stage-2 intercept carries over.
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - f2.intercept;
        for (std::size_t j = 0; j < p; ++j) e -= f2.coef[j] * treatments[j][i];
        rss += e * e;
    }
    const double dof = n > p + 1 ? static_cast<double>(n - p - 1) : 1.0;
    const double sigma2 = rss / dof;

    std::vector<CausalEstimate> out(p);
    const double span = contrast.a - contrast.b;
    for (std::size_t j = 0; j < p; ++j) {
        CausalEstimate& est = out[j];
        est.estimator = Estimator::two_stage_ls;
        est.treatment_index = treatment_indices[j];
        est.contrast = contrast;
        est.ate = f2.coef[j] * span;
        est.std_error = std::sqrt(std::max(0.0, sigma2 * f2.gram_inv(j, j))) * std::abs(span);
        est.n_used = n;
        est.first_stage_strength = first_stage_norm[j];
    }
    return out;
}

CausalEstimate naive_core(const Vec& y, const Vec& t, Contrast contrast, std::size_t treatment_index,
                          double tol_weak) {
    require_finite(y, "outcome");
    require_finite(t, "treatment");
    const std::size_t n = y.size();
    if (n < 2) throw DataError("naive_ate: need at least 2 rows");

    CausalEstimate est;
    est.estimator = Estimator::naive;
    est.treatment_index = treatment_index;
    est.contrast = contrast;
    est.n_used = n;
    est.first_stage_strength = 1.0;  // no first stage

    if (contrast.a == contrast.b) {
        est.ate = 0.0;
        est.std_error = 0.0;
        return est;
    }

    std::size_t na = 0, nb = 0;
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] == contrast.a) { ++na; sa += y[i]; }
        else if (t[i] == contrast.b) { ++nb; sb += y[i]; }
    }

    if (na > 0 && nb > 0) {
        const double ma = sa / static_cast<double>(na);
        const double mb = sb / static_cast<double>(nb);
        double ssa = 0.0, ssb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (t[i] == contrast.a) ssa += (y[i] - ma) * (y[i] - ma);
            else if (t[i] == contrast.b) ssb += (y[i] - mb) * (y[i] - mb);
        }
        const double dof = na + nb > 2 ? static_cast<double>(na + nb - 2) : 1.0;
        const double pooled = (ssa + ssb) / dof;
        est.ate = ma - mb;
        est.std_error = std::sqrt(std::max(0.0, pooled * (1.0 / na + 1.0 / nb)));
        est.n_used = na + nb;
        return est;
    }

    // Continuous treatment: conditional contrast through the OLS slope.
    if (sample_var(t) < tol_weak * tol_weak) {
        throw StratumError("naive_ate: treatment column is constant");
    }
    LeastSquaresFit fit = least_squares({t}, y);
    const double span = contrast.a - contrast.b;
    est.ate = fit.coef[0] * span;
    est.std_error = fit.std_errors[0] * std::abs(span);
    return est;
}

std::vector<std::size_t> resolve_instrument_columns(const Dataset& data, const CausalQuery& query,
                                                    Estimator estimator) {
    if (!query.instrument_columns.empty()) {
        for (std::size_t c : query.instrument_columns) {
            if (c >= data.schema.n_instruments) {
                throw ConfigError("instrument column " + std::to_string(c) + " not present in the schema");
            }
        }
        return query.instrument_columns;
    }
    if (data.schema.n_instruments == 0) throw ConfigError("dataset has no instrument columns");
    if (estimator == Estimator::two_stage_ls) {
        std::vector<std::size_t> all(data.schema.n_instruments);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    if (estimator == Estimator::naive) return {};
    // Scalar estimators default to the column aligned with the treatment.
    return {query.treatment_index < data.schema.n_instruments ? query.treatment_index : 0};
}

CausalEstimate estimate_core(const Vec& y, const Vec& t, const std::vector<Vec>& instruments,
                             const CausalQuery& query, Estimator estimator) {
    switch (estimator) {
        case Estimator::wald:
            if (instruments.size() != 1) throw ConfigError("wald: exactly one instrument column required");
            return wald_core(y, t, instruments[0], query.contrast, query.instrument_strata,
                             query.treatment_index, query.tol_weak);
        case Estimator::covariance_iv:
            if (instruments.size() != 1) throw ConfigError("covariance_iv: exactly one instrument column required");
            return cov_iv_core(y, t, instruments[0], query.contrast, query.treatment_index, query.tol_weak);
        case Estimator::two_stage_ls:
            return tsls_core(y, {t}, instruments, query.contrast, {query.treatment_index}, query.tol_weak)[0];
        case Estimator::naive:
            return naive_core(y, t, query.contrast, query.treatment_index, query.tol_weak);
    }
    throw ConfigError("unknown estimator");
}

}  // namespace detail

namespace {

void check_query(const Dataset& data, const CausalQuery& query) {
    if (data.records.empty()) throw DataError("dataset is empty");
    if (query.treatment_index >= data.schema.n_treatments) {
        throw ConfigError("treatment index " + std::to_string(query.treatment_index) +
                          " not present in the schema");
    }
}

std::vector<Vec> gather_instruments(const Dataset& data, const std::vector<std::size_t>& cols) {
    std::vector<Vec> out;
    out.reserve(cols.size());
    for (std::size_t c : cols) out.push_back(data.instrument_column(c));
    return out;
}

}  // namespace

CausalEstimate wald_ate(const Dataset& data, const CausalQuery& query) {
    check_query(data, query);
    const auto cols = detail::resolve_instrument_columns(data, query, Estimator::wald);
    if (cols.size() != 1) throw ConfigError("wald: exactly one instrument column required");
    return detail::wald_core(data.outcome_column(), data.treatment_column(query.treatment_index),
                             data.instrument_column(cols[0]), query.contrast, query.instrument_strata,
                             query.treatment_index, query.tol_weak);
}

CausalEstimate covariance_iv(const Dataset& data, const CausalQuery& query) {
    check_query(data, query);
    const auto cols = detail::resolve_instrument_columns(data, query, Estimator::covariance_iv);
    if (cols.size() != 1) throw ConfigError("covariance_iv: exactly one instrument column required");
    return detail::cov_iv_core(data.outcome_column(), data.treatment_column(query.treatment_index),
                               data.instrument_column(cols[0]), query.contrast, query.treatment_index,
                               query.tol_weak);
}

std::vector<CausalEstimate> two_stage_least_squares(const Dataset& data,
                                                    const std::vector<std::size_t>& instrument_columns,
                                                    const std::vector<std::size_t>& treatment_columns,
                                                    Contrast contrast, double tol_weak) {
    if (data.records.empty()) throw DataError("dataset is empty");
    if (treatment_columns.empty()) throw ConfigError("two_stage_ls: no treatment columns given");
    for (std::size_t c : treatment_columns) {
        if (c >= data.schema.n_treatments) {
            throw ConfigError("treatment column " + std::to_string(c) + " not present in the schema");
        }
    }
    for (std::size_t c : instrument_columns) {
        if (c >= data.schema.n_instruments) {
            throw ConfigError("instrument column " + std::to_string(c) + " not present in the schema");
        }
    }
    std::vector<Vec> treatments;
    treatments.reserve(treatment_columns.size());
    for (std::size_t c : treatment_columns) treatments.push_back(data.treatment_column(c));
    return detail::tsls_core(data.outcome_column(), treatments, gather_instruments(data, instrument_columns),
                             contrast, treatment_columns, tol_weak);
}

CausalEstimate naive_ate(const Dataset& data, const CausalQuery& query) {
    check_query(data, query);
    return detail::naive_core(data.outcome_column(), data.treatment_column(query.treatment_index),
                              query.contrast, query.treatment_index, query.tol_weak);
}

CausalEstimate estimate(const Dataset& data, const CausalQuery& query, Estimator estimator) {
    check_query(data, query);
    const auto cols = detail::resolve_instrument_columns(data, query, estimator);
    return detail::estimate_core(data.outcome_column(), data.treatment_column(query.treatment_index),
                                 gather_instruments(data, cols), query, estimator);
}

double AteTable::lookup(std::size_t treatment_index, double value) const {
    for (std::size_t pos = 0; pos < treatment_indices.size(); ++pos) {
        if (treatment_indices[pos] != treatment_index) continue;
        if (failed[pos]) {
            throw LookupError("ate_table: estimate for treatment " + std::to_string(treatment_index) +
                              " failed: " + errors[pos]);
        }
        const auto it = entries[pos].find(value);
        if (it != entries[pos].end()) return it->second;
        return slopes[pos] * value;
    }
    throw LookupError("ate_table: treatment " + std::to_string(treatment_index) + " not covered");
}

json AteTable::to_json() const {
    json out = json::array();
    for (std::size_t pos = 0; pos < treatment_indices.size(); ++pos) {
        json row{{"treatment_index", treatment_indices[pos]}, {"failed", static_cast<bool>(failed[pos])}};
        if (failed[pos]) {
            row["error"] = errors[pos];
        } else {
            row["slope"] = slopes[pos];
            row["estimate"] = estimates[pos].to_json();
            json ent = json::array();
            for (const auto& [value, ate] : entries[pos]) {
                ent.push_back({{"value", value}, {"ate", ate}});
            }
            row["entries"] = ent;
        }
        out.push_back(std::move(row));
    }
    return json{{"rows", out}};
}

AteTable ate_table(const Dataset& data, const std::vector<CausalQuery>& queries, Estimator estimator) {
    AteTable table;
    for (const CausalQuery& q : queries) {
        CausalQuery unit = q;
        unit.contrast = Contrast{1.0, 0.0};
        table.treatment_indices.push_back(q.treatment_index);
        try {
            CausalEstimate est = estimate(data, unit, estimator);
            table.slopes.push_back(est.ate);
            table.estimates.push_back(est);
            table.failed.push_back(false);
            table.errors.emplace_back();

            // Materialize low-cardinality treatments; always pin ATE(0,0)=0.
            std::map<double, double> ent;
            ent[0.0] = 0.0;
            const Vec col = data.treatment_column(q.treatment_index);
            std::set<double> distinct(col.begin(), col.end());
            if (distinct.size() <= 64) {
                for (double v : distinct) ent[v] = v == 0.0 ? 0.0 : est.ate * v;
            }
            table.entries.push_back(std::move(ent));
        } catch (const NumericError& e) {
            table.slopes.push_back(0.0);
            table.estimates.emplace_back();
            table.failed.push_back(true);
            table.errors.emplace_back(e.what());
            table.entries.emplace_back();
        }
    }
    return table;
}

}  // namespace csmooth::causal
