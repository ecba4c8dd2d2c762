#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csmooth/dataset.hpp"
#include "csmooth/linalg.hpp"

namespace csmooth::causal {

enum class Estimator { wald, covariance_iv, two_stage_ls, naive };

Estimator estimator_from_string(const std::string& s);
std::string to_string(Estimator e);

// First-stage denominators below this are an error, not a warning.
inline constexpr double kWeakInstrumentTol = 1e-6;

struct Contrast {
    double a = 1.0;
    double b = 0.0;
};

// Binds an estimand to concrete dataset columns. `instrument_columns` empty
// means "default": the column matching the treatment index for the scalar
// estimators, every instrument column for two-stage least squares.
struct CausalQuery {
    std::size_t treatment_index = 0;
    std::vector<std::size_t> instrument_columns;
    Contrast contrast;
    // Wald stratum values when the instrument column is not two-valued.
    std::optional<std::pair<double, double>> instrument_strata;
    double tol_weak = kWeakInstrumentTol;
};

struct CausalEstimate {
    double ate = 0.0;
    double std_error = 0.0;
    Estimator estimator = Estimator::naive;
    std::size_t treatment_index = 0;
    Contrast contrast;
    std::size_t n_used = 0;
    double first_stage_strength = 0.0;

    nlohmann::json to_json() const;
};

// Binary-instrument ratio estimator: the difference of outcome stratum means
// over the difference of treatment stratum means, standard error by the
// delta method.
CausalEstimate wald_ate(const Dataset& data, const CausalQuery& query);

// Cov(Y, Z) / Cov(T, Z) on a scalar instrument. Coincides with wald_ate when
// Z takes exactly the values {0, 1}.
CausalEstimate covariance_iv(const Dataset& data, const CausalQuery& query);

// Two-stage least squares with intercepts in both stages: each treatment is
// regressed on the instrument block, then the outcome on the fitted
// treatments. Classical standard errors with residuals from the original
// treatments.
std::vector<CausalEstimate> two_stage_least_squares(const Dataset& data,
                                                    const std::vector<std::size_t>& instrument_columns,
                                                    const std::vector<std::size_t>& treatment_columns,
                                                    Contrast contrast = {},
                                                    double tol_weak = kWeakInstrumentTol);

// Conditional contrast without any instrument: stratum mean difference for a
// two-valued treatment, otherwise the OLS slope of Y on T. Biased under
// confounding; kept as the comparison baseline.
CausalEstimate naive_ate(const Dataset& data, const CausalQuery& query);

// Dispatch by estimator kind (two_stage_ls runs a single-treatment query).
CausalEstimate estimate(const Dataset& data, const CausalQuery& query, Estimator estimator);

// Per-treatment lookup ATE(t, 0). Continuous treatments resolve through the
// linear slope; low-cardinality treatments additionally materialize an entry
// per observed value. Estimator failures are recorded per treatment and
// surface as LookupError on access.
struct AteTable {
    std::vector<std::size_t> treatment_indices;
    std::vector<double> slopes;
    std::vector<CausalEstimate> estimates;   // valid where !failed
    std::vector<bool> failed;
    std::vector<std::string> errors;
    std::vector<std::map<double, double>> entries;

    double lookup(std::size_t treatment_index, double value) const;
    nlohmann::json to_json() const;
};

AteTable ate_table(const Dataset& data, const std::vector<CausalQuery>& queries, Estimator estimator);

namespace detail {

// Column-space cores shared with the refuters, which re-estimate thousands of
// times and should not rebuild Dataset objects.
CausalEstimate wald_core(const Vec& y, const Vec& t, const Vec& z, Contrast contrast,
                         std::optional<std::pair<double, double>> strata, std::size_t treatment_index,
                         double tol_weak = kWeakInstrumentTol);
CausalEstimate cov_iv_core(const Vec& y, const Vec& t, const Vec& z, Contrast contrast,
                           std::size_t treatment_index, double tol_weak = kWeakInstrumentTol);
std::vector<CausalEstimate> tsls_core(const Vec& y, const std::vector<Vec>& treatments,
                                      const std::vector<Vec>& instruments, Contrast contrast,
                                      const std::vector<std::size_t>& treatment_indices,
                                      double tol_weak = kWeakInstrumentTol);
CausalEstimate naive_core(const Vec& y, const Vec& t, Contrast contrast, std::size_t treatment_index,
                          double tol_weak = kWeakInstrumentTol);
CausalEstimate estimate_core(const Vec& y, const Vec& t, const std::vector<Vec>& instruments,
                             const CausalQuery& query, Estimator estimator);

std::vector<std::size_t> resolve_instrument_columns(const Dataset& data, const CausalQuery& query,
                                                    Estimator estimator);

}  // namespace detail

}  // namespace csmooth::causal
