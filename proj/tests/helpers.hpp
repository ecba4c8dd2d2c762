#pragma once

#include <cmath>
#include <vector>

#include "csmooth/dataset.hpp"
#include "csmooth/rng.hpp"
#include "csmooth/scm.hpp"

namespace testutil {

using csmooth::Dataset;
using csmooth::Record;
using csmooth::Vec;

// The confounded linear fixture used across the estimator and refutation
// suites: one treatment with effect 2.0, confounding on both paths.
inline csmooth::scm::ScmConfig confounded_config() {
    csmooth::scm::ScmConfig c;
    c.n_features = 6;
    c.instrument_strength = 1.0;
    c.confounder_strength_t = 1.0;
    c.treatment_effects = {2.0};
    c.confounder_strength_y = 1.0;
    c.noise_scale_t = 0.5;
    c.noise_scale_y = 0.5;
    return c;
}

inline const Dataset& confounded_fixture() {
    static const Dataset data = csmooth::scm::generate_dataset(confounded_config(), 100000, 42);
    return data;
}

// Hand-built dataset from explicit columns; instruments and treatments are
// single columns, features mirror the instrument.
inline Dataset columns_dataset(const Vec& y, const Vec& t, const Vec& z) {
    Dataset d;
    d.schema.n_features = 1;
    d.schema.n_instruments = 1;
    d.schema.n_treatments = 1;
    d.schema.n_law_labels = 0;
    d.records.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        d.records[i].features = {z[i]};
        d.records[i].instrument = {z[i]};
        d.records[i].treatments = {t[i]};
        d.records[i].outcome = y[i];
    }
    return d;
}

// Random binary-instrument, single-treatment dataset with confounding; used
// for the Wald vs 2SLS equivalence sweeps.
inline Dataset random_binary_instrument_dataset(std::uint64_t seed, std::size_t n = 400) {
    csmooth::Rng rng(seed);
    const double p = 0.25 + 0.5 * rng.uniform01();
    const double compliance = 0.5 + 1.5 * rng.uniform01();
    const double effect = -2.0 + 4.0 * rng.uniform01();
    const double confounding = rng.uniform(-1.0, 1.0);
    Vec y(n), t(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = rng.bernoulli(p) ? 1.0 : 0.0;
        const double u = rng.normal();
        t[i] = compliance * z[i] + confounding * u + 0.5 * rng.normal();
        y[i] = effect * t[i] + u + 0.5 * rng.normal();
    }
    return columns_dataset(y, t, z);
}

inline double rel_diff(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / denom;
}

}  // namespace testutil
