#include <doctest.h>

#include <cmath>

#include "csmooth/errors.hpp"
#include "csmooth/estimators.hpp"
#include "csmooth/rng.hpp"
#include "csmooth/scm.hpp"
#include "helpers.hpp"

using namespace csmooth;
using namespace csmooth::causal;
using testutil::columns_dataset;
using testutil::confounded_fixture;
using testutil::rel_diff;

namespace {

// Instrument dichotomized at 0 keeps the ratio estimand intact (the
// confounder is independent of any function of Z).
Dataset binarized_instrument(const Dataset& d) {
    Dataset out = d;
    for (auto& r : out.records) r.instrument[0] = r.instrument[0] > 0.0 ? 1.0 : 0.0;
    return out;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("wald: perfect compliance gives exactly 1") {
    Vec z{0, 1, 0, 1, 0, 1, 0, 1};
    const Dataset d = columns_dataset(z, z, z);  // T = Z, Y = T
    const auto est = wald_ate(d, CausalQuery{});
    CHECK(est.ate == 1.0);
    CHECK(est.first_stage_strength == 1.0);
    CHECK(est.n_used == 8);
}

TEST_CASE("wald: constant instrument is a weak-instrument error") {
    Vec z(10, 1.0), t{0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, y(10, 0.5);
    CHECK_THROWS_AS(wald_ate(columns_dataset(y, t, z), CausalQuery{}), WeakInstrumentError);
}

TEST_CASE("wald: three-valued instrument needs explicit strata") {
    Vec z{0, 1, 2, 0, 1, 2}, t{0, 1, 2, 0, 1, 2}, y{0, 1, 2, 0, 1, 2};
    const Dataset d = columns_dataset(y, t, z);
    CHECK_THROWS_AS(wald_ate(d, CausalQuery{}), StratumError);
    CausalQuery q;
    q.instrument_strata = {{2.0, 0.0}};
    CHECK(wald_ate(d, q).ate == 1.0);
    q.instrument_strata = {{3.0, 0.0}};  // empty stratum
    CHECK_THROWS_AS(wald_ate(d, q), StratumError);
}

TEST_CASE("wald on the confounded fixture recovers the oracle effect") {
    const Dataset d = binarized_instrument(confounded_fixture());
    const auto est = wald_ate(d, CausalQuery{});
    const double truth = scm::true_ate(testutil::confounded_config(), 0, 1.0, 0.0).value;
    CHECK(std::abs(est.ate - truth) < 0.05);
    CHECK(est.std_error > 0.0);
}

TEST_CASE("wald: relabeling the binary instrument leaves the estimate unchanged") {
    const Dataset d = binarized_instrument(confounded_fixture());
    Dataset flipped = d;
    for (auto& r : flipped.records) r.instrument[0] = 1.0 - r.instrument[0];
    const auto a = wald_ate(d, CausalQuery{});
    const auto b = wald_ate(flipped, CausalQuery{});
    CHECK(a.ate == doctest::Approx(b.ate).epsilon(1e-12));
    CHECK(a.first_stage_strength == doctest::Approx(b.first_stage_strength).epsilon(1e-12));
}

TEST_CASE("covariance_iv: identical columns give exactly 1") {
    Vec v{0.5, 1.5, -2.0, 3.0, 0.25};
    const auto est = covariance_iv(columns_dataset(v, v, v), CausalQuery{});
    CHECK(est.ate == 1.0);
}

TEST_CASE("covariance_iv: outcome shift leaves the estimate unchanged") {
    const Dataset& d = confounded_fixture();
    Dataset shifted = d;
    for (auto& r : shifted.records) r.outcome += 10.0;
    const auto a = covariance_iv(d, CausalQuery{});
    const auto b = covariance_iv(shifted, CausalQuery{});
    CHECK(rel_diff(a.ate, b.ate) < 1e-12);
}

TEST_CASE("covariance_iv on the confounded fixture recovers the oracle; naive does not") {
    const Dataset& d = confounded_fixture();
    const double truth = scm::true_ate(testutil::confounded_config(), 0, 1.0, 0.0).value;

    const auto iv = covariance_iv(d, CausalQuery{});
    CHECK(std::abs(iv.ate - truth) < 0.05);

    const auto naive = naive_ate(d, CausalQuery{});
    CHECK(std::abs(naive.ate - truth) > 0.2);
}

TEST_CASE("covariance_iv equals wald for a {0,1} instrument") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Dataset d = testutil::random_binary_instrument_dataset(seed);
        const auto w = wald_ate(d, CausalQuery{});
        const auto c = covariance_iv(d, CausalQuery{});
        CHECK(rel_diff(w.ate, c.ate) < 1e-10);
    }
}

TEST_CASE("covariance_iv: uncorrelated instrument is a weak-instrument error") {
    Rng rng(5);
    const std::size_t n = 4000;
    Vec y(n), t(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = 0.0;  // constant: zero covariance
        t[i] = rng.normal();
        y[i] = t[i];
    }
    CHECK_THROWS_AS(covariance_iv(columns_dataset(y, t, z), CausalQuery{}), WeakInstrumentError);
}

TEST_CASE("2sls equals wald on binary single-instrument data") {
    for (std::uint64_t seed = 100; seed < 150; ++seed) {
        const Dataset d = testutil::random_binary_instrument_dataset(seed);
        const auto w = wald_ate(d, CausalQuery{});
        const auto t = two_stage_least_squares(d, {0}, {0});
        REQUIRE(t.size() == 1);
        CHECK(rel_diff(w.ate, t[0].ate) < 1e-9);
    }
}

TEST_CASE("2sls with two treatments recovers both effects") {
    scm::ScmConfig cfg;
    cfg.n_features = 6;
    cfg.instrument_strength = 1.0;
    cfg.confounder_strength_t = 1.0;
    cfg.treatment_effects = {1.5, -0.5};
    cfg.confounder_strength_y = 1.0;
    cfg.noise_scale_t = 0.5;
    cfg.noise_scale_y = 0.5;
    const Dataset d = scm::generate_dataset(cfg, 100000, 17);
    const auto ests = two_stage_least_squares(d, {0, 1}, {0, 1});
    REQUIRE(ests.size() == 2);
    CHECK(std::abs(ests[0].ate - 1.5) < 0.07);
    CHECK(std::abs(ests[1].ate - (-0.5)) < 0.07);
}

TEST_CASE("2sls: under-identification is an identification error") {
    const Dataset& d = confounded_fixture();
    CHECK_THROWS_AS(two_stage_least_squares(d, {}, {0}), IdentificationError);
}

TEST_CASE("2sls: duplicated instrument columns are a singular design") {
    const Dataset& d = confounded_fixture();
    CHECK_THROWS_AS(two_stage_least_squares(d, {0, 0}, {0, 0}), SingularDesignError);
}

TEST_CASE("naive_ate: stratum means for a binary treatment") {
    Vec t{1, 1, 0, 0}, y{3.0, 5.0, 1.0, 1.0}, z{0, 0, 0, 0};
    const auto est = naive_ate(columns_dataset(y, t, z), CausalQuery{});
    CHECK(est.ate == 3.0);  // mean 4 vs mean 1
    CHECK(est.n_used == 4);
}

TEST_CASE("naive_ate: constant treatment is a stratum error") {
    Vec t(10, 0.5), y(10, 1.0), z(10, 0.0);
    CHECK_THROWS_AS(naive_ate(columns_dataset(y, t, z), CausalQuery{}), StratumError);
}

TEST_CASE("properties: antisymmetry, null contrast, scale and shift equivariance") {
    Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const Dataset d = testutil::random_binary_instrument_dataset(1000 + rep, 300);
        CausalQuery q;
        q.contrast = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        CausalQuery swapped = q;
        std::swap(swapped.contrast.a, swapped.contrast.b);
        CausalQuery null_q = q;
        null_q.contrast = {q.contrast.a, q.contrast.a};

        const Estimator kind = rep % 2 == 0 ? Estimator::covariance_iv : Estimator::two_stage_ls;

        const auto base = estimate(d, q, kind);
        const auto neg = estimate(d, swapped, kind);
        CHECK(base.ate == doctest::Approx(-neg.ate).epsilon(1e-12));
        CHECK(estimate(d, null_q, kind).ate == 0.0);

        // Y -> cY scales the estimate by c; Y -> Y + c leaves it unchanged.
        const double c = rng.uniform(0.5, 3.0);
        Dataset scaled = d;
        Dataset shifted = d;
        for (std::size_t i = 0; i < d.size(); ++i) {
            scaled.records[i].outcome *= c;
            shifted.records[i].outcome += c;
        }
        CHECK(rel_diff(estimate(scaled, q, kind).ate, c * base.ate) < 1e-10);
        CHECK(rel_diff(estimate(shifted, q, kind).ate, base.ate) < 1e-10);
    }
}

TEST_CASE("unconfounded data: IV and naive agree within three combined standard errors") {
    scm::ScmConfig cfg = testutil::confounded_config();
    cfg.confounder_strength_t = 0.0;
    cfg.confounder_strength_y = 0.0;
    std::size_t agreements = 0;
    const int n_seeds = 100;
    for (int seed = 0; seed < n_seeds; ++seed) {
        const Dataset d = scm::generate_dataset(cfg, 4000, 5000 + seed);
        const auto iv = covariance_iv(d, CausalQuery{});
        const auto nv = naive_ate(d, CausalQuery{});
        const double combined = std::sqrt(iv.std_error * iv.std_error + nv.std_error * nv.std_error);
        if (std::abs(iv.ate - nv.ate) < 3.0 * combined) ++agreements;
    }
    CHECK(agreements >= 95);
}

TEST_CASE("ate_table: null value maps to zero, binary entry to the slope") {
    const Dataset& d = confounded_fixture();
    const auto table = ate_table(d, {CausalQuery{}}, Estimator::covariance_iv);
    CHECK(table.lookup(0, 0.0) == 0.0);
    const double slope = covariance_iv(d, CausalQuery{}).ate;
    CHECK(table.lookup(0, 1.0) == doctest::Approx(slope).epsilon(1e-12));
    CHECK(table.lookup(0, -2.0) == doctest::Approx(-2.0 * slope).epsilon(1e-12));
    CHECK_THROWS_AS(table.lookup(1, 0.0), LookupError);
}

TEST_CASE("ate_table on the two-treatment fixture tracks the oracle") {
    scm::ScmConfig cfg;
    cfg.n_features = 6;
    cfg.instrument_strength = 1.0;
    cfg.confounder_strength_t = 1.0;
    cfg.treatment_effects = {1.5, -0.5};
    cfg.confounder_strength_y = 1.0;
    cfg.noise_scale_t = 0.5;
    cfg.noise_scale_y = 0.5;
    const Dataset d = scm::generate_dataset(cfg, 100000, 17);
    CausalQuery q0, q1;
    q1.treatment_index = 1;
    const auto table = ate_table(d, {q0, q1}, Estimator::two_stage_ls);
    CHECK(std::abs(table.lookup(0, 1.0) - 1.5) < 0.07);
    CHECK(std::abs(table.lookup(1, 1.0) - (-0.5)) < 0.07);
    CHECK(std::abs(table.lookup(0, 2.0) - 3.0) < 0.14);
}

TEST_CASE("ate_table materializes entries for a binary treatment") {
    scm::ScmConfig cfg = testutil::confounded_config();
    cfg.treatment_kind = scm::VarKind::binary_threshold;
    const Dataset d = scm::generate_dataset(cfg, 50000, 27);
    const auto table = ate_table(d, {CausalQuery{}}, Estimator::covariance_iv);
    const double slope = covariance_iv(d, CausalQuery{}).ate;
    CHECK(table.entries[0].size() == 2);  // observed values 0 and 1
    CHECK(table.entries[0].at(0.0) == 0.0);
    CHECK(table.entries[0].at(1.0) == slope);
    CHECK(table.lookup(0, 1.0) == slope);
}

TEST_CASE("a looser weak-instrument tolerance turns borderline fits into errors") {
    Rng rng(71);
    const std::size_t n = 2000;
    Vec y(n), t(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = rng.uniform(-1.0, 1.0);
        t[i] = 0.01 * z[i] + rng.normal();  // deliberately feeble first stage
        y[i] = t[i] + rng.normal();
    }
    const Dataset d = testutil::columns_dataset(y, t, z);
    CausalQuery q;
    CHECK_NOTHROW(covariance_iv(d, q));  // above the 1e-6 default
    q.tol_weak = 0.1;
    CHECK_THROWS_AS(covariance_iv(d, q), WeakInstrumentError);
    CHECK_THROWS_AS(estimate(d, q, Estimator::two_stage_ls), WeakInstrumentError);
}

TEST_CASE("ate_table records estimator failures per treatment") {
    // Constant instrument: covariance_iv fails, and the lookup must say so.
    Vec z(50, 1.0), t(50), y(50);
    Rng rng(9);
    for (std::size_t i = 0; i < 50; ++i) {
        t[i] = rng.normal();
        y[i] = t[i];
    }
    const auto table = ate_table(columns_dataset(y, t, z), {CausalQuery{}}, Estimator::covariance_iv);
    REQUIRE(table.failed.size() == 1);
    CHECK(table.failed[0]);
    CHECK_THROWS_AS(table.lookup(0, 1.0), LookupError);
    CHECK(table.to_json().at("rows").at(0).at("failed").get<bool>());
}

TEST_CASE("estimate json carries the exact field names") {
    const auto j = covariance_iv(confounded_fixture(), CausalQuery{}).to_json();
    for (const char* key :
         {"ate", "std_error", "estimator", "treatment_index", "contrast", "n_used", "first_stage_strength"}) {
        CHECK(j.contains(key));
    }
    CHECK(j.at("contrast").contains("a"));
    CHECK(j.at("estimator") == "covariance_iv");
}

}  // TEST_SUITE
