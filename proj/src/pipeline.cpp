#include "csmooth/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "csmooth/errors.hpp"
#include "csmooth/metrics.hpp"
#include "csmooth/rng.hpp"

namespace csmooth::pipeline {

using losses::SoftLabel;
using nlohmann::json;

void SplitFractions::validate() const {
    if (!(train > 0.0) || !(validation > 0.0) || !(test > 0.0)) {
        throw ConfigError("splits: all three fractions must be positive");
    }
    if (std::abs(train + validation + test - 1.0) > 1e-9) {
        throw ConfigError("splits: fractions must sum to 1");
    }
}

void PipelineConfig::validate() const {
    splits.validate();
    smoothing.validate();
    if (data.kind == DataSource::Kind::synthetic) {
        data.scm.validate();
        if (data.n < 1) throw ConfigError("data: n must be >= 1");
    } else if (data.path.empty()) {
        throw ConfigError("data: source 'ingest' requires a path");
    }
    if (encoder.epochs < 1) throw ConfigError("encoder: epochs must be >= 1");
    if (!(encoder.learning_rate > 0.0)) throw ConfigError("encoder: learning rate must be > 0");
    if (classifier.epochs < 1) throw ConfigError("classifier: epochs must be >= 1");
    if (!(classifier.learning_rate > 0.0)) throw ConfigError("classifier: learning rate must be > 0");
    if (classifier.num_classes != 2) {
        throw ConfigError("classifier: the experiment pipeline is a binary task (num_classes = 2)");
    }
    if (causal.queries.empty()) throw ConfigError("causal: at least one query is required");
    for (const auto& q : causal.queries) {
        if (!(q.tol_weak > 0.0)) throw ConfigError("causal: tol_weak must be > 0");
    }
    if (refutation.n_reps < 2) throw ConfigError("refutation: n_reps must be >= 2");
    if (!(refutation.fraction > 0.0) || refutation.fraction > 1.0) {
        throw ConfigError("refutation: fraction must lie in (0, 1]");
    }
}

json PipelineConfig::to_json() const {
    json j;
    j["master_seed"] = master_seed;
    j["data_source"]["kind"] = data.kind == DataSource::Kind::synthetic ? "synthetic" : "ingest";
    if (data.kind == DataSource::Kind::synthetic) {
        j["data_source"]["n"] = data.n;
        if (data.seed) j["data_source"]["seed"] = *data.seed;
        j["data_source"]["scm"] = data.scm.to_json();
    } else {
        j["data_source"]["path"] = data.path;
    }
    j["splits"] = {{"train", splits.train}, {"validation", splits.validation}, {"test", splits.test}};
    j["encoder"] = {{"epochs", encoder.epochs}, {"learning_rate", encoder.learning_rate}};
    json queries = json::array();
    for (const auto& q : causal.queries) {
        json qj{{"treatment_index", q.treatment_index},
                {"contrast_a", q.contrast.a},
                {"contrast_b", q.contrast.b},
                {"tol_weak", q.tol_weak}};
        if (!q.instrument_columns.empty()) qj["instrument_columns"] = q.instrument_columns;
        queries.push_back(std::move(qj));
    }
    j["causal"] = {{"estimator", causal::to_string(causal.estimator)}, {"queries", queries}};
    j["refutation"] = {{"n_reps", refutation.n_reps},
                       {"fraction", refutation.fraction},
                       {"placebo_mode", refute::to_string(refutation.tuning.placebo_mode)},
                       {"band_multiplier", refutation.tuning.band_multiplier},
                       {"placebo_tol_scale", refutation.tuning.placebo_tol_scale}};
    if (refutation.seed) j["refutation"]["seed"] = *refutation.seed;
    j["smoothing"] = {{"epsilon", smoothing.epsilon},
                      {"omega", smoothing.omega},
                      {"epsilon_max", smoothing.epsilon_max},
                      {"num_classes", smoothing.num_classes}};
    j["classifier"] = {{"architecture", classifier::to_string(classifier.architecture)},
                       {"hidden_width", classifier.hidden_width},
                       {"epochs", classifier.epochs},
                       {"learning_rate", classifier.learning_rate},
                       {"decision_threshold", classifier.decision_threshold}};
    if (debug.read_outcome_before_estimation) j["debug"]["read_outcome_before_estimation"] = true;
    return j;
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + std::string(key) + "': " + e.what());
    }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    if (!j.is_object()) throw ConfigError("pipeline config must be an object");
    c.master_seed = get_or<std::uint64_t>(j, "master_seed", 0);

    const json data = j.contains("data_source") ? j.at("data_source") : json::object();
    const std::string source = get_or<std::string>(data, "kind", "synthetic");
    if (source == "synthetic") {
        c.data.kind = DataSource::Kind::synthetic;
        c.data.n = get_or<std::size_t>(data, "n", 10000);
        if (data.contains("seed")) c.data.seed = data.at("seed").get<std::uint64_t>();
        c.data.scm = data.contains("scm") ? scm::ScmConfig::from_json(data.at("scm")) : scm::ScmConfig{};
    } else if (source == "ingest") {
        c.data.kind = DataSource::Kind::ingested;
        c.data.path = get_or<std::string>(data, "path", "");
    } else {
        throw ConfigError("data_source.kind must be 'synthetic' or 'ingest'");
    }

    const json sp = j.contains("splits") ? j.at("splits") : json::object();
    c.splits.train = get_or<double>(sp, "train", 0.7);
    c.splits.validation = get_or<double>(sp, "validation", 0.15);
    c.splits.test = get_or<double>(sp, "test", 0.15);

    const json enc = j.contains("encoder") ? j.at("encoder") : json::object();
    c.encoder.epochs = get_or<std::size_t>(enc, "epochs", 200);
    c.encoder.learning_rate = get_or<double>(enc, "learning_rate", 0.5);

    const json ca = j.contains("causal") ? j.at("causal") : json::object();
    c.causal.estimator = causal::estimator_from_string(get_or<std::string>(ca, "estimator", "two_stage_ls"));
    // Either an explicit query list or the flat treatment_indices shorthand
    // with shared contrast and selector.
    if (ca.contains("queries")) {
        c.causal.queries.clear();
        for (const json& qj : ca.at("queries")) {
            causal::CausalQuery q;
            q.treatment_index = get_or<std::size_t>(qj, "treatment_index", 0);
            q.instrument_columns = get_or<std::vector<std::size_t>>(qj, "instrument_columns", {});
            q.contrast = {get_or<double>(qj, "contrast_a", 1.0), get_or<double>(qj, "contrast_b", 0.0)};
            q.tol_weak = get_or<double>(qj, "tol_weak", causal::kWeakInstrumentTol);
            c.causal.queries.push_back(std::move(q));
        }
    } else {
        const auto indices = get_or<std::vector<std::size_t>>(ca, "treatment_indices", {0});
        const auto columns = get_or<std::vector<std::size_t>>(ca, "instrument_columns", {});
        const causal::Contrast contrast{get_or<double>(ca, "contrast_a", 1.0),
                                        get_or<double>(ca, "contrast_b", 0.0)};
        const double tol = get_or<double>(ca, "tol_weak", causal::kWeakInstrumentTol);
        c.causal.queries.clear();
        for (std::size_t t : indices) {
            causal::CausalQuery q;
            q.treatment_index = t;
            q.instrument_columns = columns;
            q.contrast = contrast;
            q.tol_weak = tol;
            c.causal.queries.push_back(std::move(q));
        }
    }

    const json re = j.contains("refutation") ? j.at("refutation") : json::object();
    c.refutation.n_reps = get_or<std::size_t>(re, "n_reps", 100);
    c.refutation.fraction = get_or<double>(re, "fraction", 0.8);
    if (re.contains("seed")) c.refutation.seed = re.at("seed").get<std::uint64_t>();
    c.refutation.tuning.placebo_mode =
        refute::placebo_mode_from_string(get_or<std::string>(re, "placebo_mode", "joint_permutation"));
    c.refutation.tuning.band_multiplier = get_or<double>(re, "band_multiplier", 2.0);
    c.refutation.tuning.placebo_tol_scale = get_or<double>(re, "placebo_tol_scale", 0.05);

    const json sm = j.contains("smoothing") ? j.at("smoothing") : json::object();
    c.smoothing.mode = losses::SmoothingMode::causal;
    c.smoothing.epsilon = get_or<double>(sm, "epsilon", 0.1);
    c.smoothing.omega = get_or<double>(sm, "omega", 0.1);
    c.smoothing.epsilon_max = get_or<double>(sm, "epsilon_max", 0.5);
    c.smoothing.num_classes = get_or<std::size_t>(sm, "num_classes", 2);

    const json cl = j.contains("classifier") ? j.at("classifier") : json::object();
    c.classifier.architecture =
        classifier::architecture_from_string(get_or<std::string>(cl, "architecture", "one_hidden_layer"));
    c.classifier.hidden_width = get_or<std::size_t>(cl, "hidden_width", 16);
    c.classifier.epochs = get_or<std::size_t>(cl, "epochs", 300);
    c.classifier.learning_rate = get_or<double>(cl, "learning_rate", 0.3);
    c.classifier.decision_threshold = get_or<double>(cl, "decision_threshold", 0.5);
    c.classifier.num_classes = c.smoothing.num_classes;

    const json dbg = j.contains("debug") ? j.at("debug") : json::object();
    c.debug.read_outcome_before_estimation = get_or<bool>(dbg, "read_outcome_before_estimation", false);

    c.validate();
    return c;
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("stage " + std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("stage " + std::string(name) + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError("stage " + std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("stage " + std::string(name) + ": " + e.what());
    }
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Split {
    std::vector<std::size_t> train, validation, test;
};

Split make_split(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> idx = rng.permutation(n);
    const auto n_train = static_cast<std::size_t>(std::floor(f.train * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(f.validation * static_cast<double>(n)));
    Split s;
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.validation.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    s.test.assign(idx.begin() + n_train + n_val, idx.end());
    if (s.train.size() < 4 || s.test.size() < 2) {
        throw DataError("split leaves too few rows (train " + std::to_string(s.train.size()) + ", test " +
                        std::to_string(s.test.size()) + ")");
    }
    return s;
}

int class_of(double outcome, ColumnKind kind) {
    if (kind == ColumnKind::binary) return outcome == 1.0 ? 1 : 0;
    return outcome > 0.0 ? 1 : 0;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << content;
    if (!f) throw IoError("write failed: " + path);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentReport run_experiment(const PipelineConfig& config, const std::string& artifacts_dir) {
    config.validate();
    const std::string started_at = iso_timestamp();

    // Stage 1: data.
    Dataset data = stage("data", [&]() {
        if (config.data.kind == DataSource::Kind::synthetic) {
            const std::uint64_t seed = config.data.seed.value_or(config.master_seed);
            return scm::generate_dataset(config.data.scm, config.data.n, seed);
        }
        return load_dataset(config.data.path);
    });
    data.validate();

    // Stage 2: seeded split.
    const Split split = stage("split", [&]() {
        return make_split(data.size(), config.splits, derive_seed(config.master_seed, kSplitSeedOffset));
    });

    // Stage 3: encoder on the training split, instruments for every row from
    // that one fit. All access runs through the outcome guard.
    OutcomeGuard guard(data);
    encoder::EncoderModel enc_model = stage("train_encoder", [&]() {
        Dataset train_view;
        train_view.schema.n_features = data.schema.n_features;
        train_view.schema.n_law_labels = data.schema.n_law_labels;
        train_view.provenance = data.provenance;
        train_view.records.reserve(split.train.size());
        for (std::size_t i : split.train) {
            Record r;
            r.features = guard.features(i);
            r.law_labels = guard.law_labels(i);
            train_view.records.push_back(std::move(r));
        }
        encoder::TrainConfig ec = config.encoder;
        ec.seed = derive_seed(config.master_seed, kEncoderSeedOffset);
        return encoder::train_encoder(train_view, ec);
    });

    stage("write_instruments", [&]() {
        if (config.debug.read_outcome_before_estimation) {
            (void)guard.outcome(0);  // deliberate leak for the self-test
        }
        std::vector<Vec> encoded(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) encoded[i] = encode(enc_model, guard.features(i));
        for (std::size_t i = 0; i < data.size(); ++i) data.records[i].instrument = std::move(encoded[i]);
        data.schema.n_instruments = enc_model.n_articles();
        return 0;
    });

    // Leakage check: nothing upstream of the estimators may read the outcome.
    const long leak_reads = guard.outcome_reads();
    if (leak_reads != 0) {
        throw DataError("stage leakage_check: outcome column was read " + std::to_string(leak_reads) +
                        " time(s) before estimation; instruments may be contaminated");
    }

    const Dataset train_data = data.select(split.train);
    const Dataset test_data = data.select(split.test);

    // Stage 4: ATE estimation on the training split only.
    const std::vector<causal::CausalQuery>& queries = config.causal.queries;

    std::vector<causal::CausalEstimate> estimates = stage("estimate", [&]() {
        std::vector<causal::CausalEstimate> out;
        for (const auto& q : queries) out.push_back(causal::estimate(train_data, q, config.causal.estimator));
        return out;
    });

    causal::AteTable table = stage("ate_table", [&]() {
        return causal::ate_table(train_data, queries, config.causal.estimator);
    });

    // Test rows must not influence the table: drop them, recompute, compare.
    const bool table_check = stage("ate_table_check", [&]() {
        std::vector<std::size_t> keep = split.train;  // the split the table is built from
        Dataset pruned = data.select(keep);
        causal::AteTable again = causal::ate_table(pruned, queries, config.causal.estimator);
        return again.to_json() == table.to_json();
    });
    if (!table_check) {
        throw NumericError("stage ate_table_check: table changed when test rows were withheld");
    }

    // Stage 5: refutation, three methods per estimate.
    const std::uint64_t boot_seed = config.refutation.seed
                                        ? *config.refutation.seed
                                        : derive_seed(config.master_seed, kBootstrapSeedOffset);
    const std::uint64_t plac_seed = config.refutation.seed
                                        ? *config.refutation.seed + 1
                                        : derive_seed(config.master_seed, kPlaceboSeedOffset);
    const std::uint64_t subs_seed = config.refutation.seed
                                        ? *config.refutation.seed + 2
                                        : derive_seed(config.master_seed, kSubsetSeedOffset);
    json refutations = json::array();
    stage("refute", [&]() {
        for (const auto& q : queries) {
            json entry;
            entry["treatment_index"] = q.treatment_index;
            entry["estimator"] = causal::to_string(config.causal.estimator);
            entry["bootstrap"] = refute::bootstrap_refute(train_data, q, config.causal.estimator,
                                                          config.refutation.n_reps, boot_seed,
                                                          config.refutation.tuning)
                                     .to_json();
            entry["placebo"] = refute::placebo_refute(train_data, q, config.causal.estimator,
                                                      config.refutation.n_reps, plac_seed,
                                                      config.refutation.tuning)
                                   .to_json();
            entry["subset"] = refute::subset_refute(train_data, q, config.causal.estimator,
                                                    config.refutation.fraction, config.refutation.n_reps,
                                                    subs_seed, config.refutation.tuning)
                                  .to_json();
            refutations.push_back(std::move(entry));
        }
        return 0;
    });

    // Exogeneity diagnostics on the training split. Two views:
    //  - partial correlation of instrument and outcome given the treatments
    //    (conditioning on T opens the collider path through the confounder,
    //    so this fires under strong confounding even for valid instruments);
    //  - correlation of the raw instrument with the IV-residual
    //    Y - sum_j slope_j T_j, which is ~0 exactly when the instrument only
    //    reaches the outcome through the treatments.
    json exogeneity = stage("exogeneity_check", [&]() {
        std::vector<Vec> t_cols;
        for (std::size_t t = 0; t < train_data.schema.n_treatments; ++t) {
            t_cols.push_back(train_data.treatment_column(t));
        }
        const Vec y = train_data.outcome_column();
        const Vec resid_y_given_t = least_squares(t_cols, y).residuals;

        Vec iv_resid = y;
        for (std::size_t pos = 0; pos < table.treatment_indices.size(); ++pos) {
            if (table.failed[pos]) continue;
            const Vec t = train_data.treatment_column(table.treatment_indices[pos]);
            for (std::size_t i = 0; i < iv_resid.size(); ++i) iv_resid[i] -= table.slopes[pos] * t[i];
        }

        json per = json::array();
        double max_partial = 0.0;
        double max_iv = 0.0;
        for (std::size_t k = 0; k < train_data.schema.n_instruments; ++k) {
            const Vec z = train_data.instrument_column(k);
            const Vec resid_z = least_squares(t_cols, z).residuals;
            const double r_partial = correlation(resid_z, resid_y_given_t);
            const double r_iv = correlation(z, iv_resid);
            per.push_back({{"instrument_column", k},
                           {"partial_correlation", r_partial},
                           {"iv_residual_correlation", r_iv}});
            max_partial = std::max(max_partial, std::abs(r_partial));
            max_iv = std::max(max_iv, std::abs(r_iv));
        }
        return json{{"per_instrument", per},
                    {"max_abs_partial_correlation", max_partial},
                    {"max_abs_iv_residual_correlation", max_iv},
                    {"threshold", 0.1},
                    {"flagged", max_partial > 0.1},
                    {"iv_residual_flagged", max_iv > 0.1},
                    {"note", "the treatment-conditioned partial correlation opens the collider "
                             "path under confounding; read it together with the IV-residual "
                             "correlation and the refutation verdicts"}};
    });

    // Stage 6: three classifiers on the training split, one shared seed.
    const ColumnKind outcome_kind = data.schema.outcome_kind;
    const std::size_t K = config.smoothing.num_classes;

    std::vector<int> train_classes(train_data.size());
    for (std::size_t i = 0; i < train_data.size(); ++i) {
        train_classes[i] = class_of(train_data.records[i].outcome, outcome_kind);
    }

    std::vector<SoftLabel> hard_targets(train_data.size());
    std::vector<SoftLabel> label_targets(train_data.size());
    std::vector<SoftLabel> causal_targets(train_data.size());
    std::size_t clamped_count = 0;
    double eps_sum = 0.0, eps_max_seen = 0.0;
    stage("targets", [&]() {
        for (std::size_t i = 0; i < train_data.size(); ++i) {
            const SoftLabel hard = losses::hard_label(static_cast<std::size_t>(train_classes[i]), K);
            hard_targets[i] = hard;
            label_targets[i] = losses::label_smooth(hard.distribution, config.smoothing.epsilon, K);
            bool clamped = false;
            const double eps_i =
                losses::causal_epsilon(train_data.records[i].treatments, table, config.smoothing.omega,
                                       config.smoothing.epsilon_max, &clamped);
            causal_targets[i] = losses::causal_smooth(hard.distribution, eps_i, K);
            clamped_count += clamped ? 1 : 0;
            eps_sum += eps_i;
            eps_max_seen = std::max(eps_max_seen, eps_i);
        }
        return 0;
    });

    struct Mode {
        const char* name;
        const std::vector<SoftLabel>* targets;
    };
    const Mode modes[3] = {{"hard", &hard_targets},
                           {"label_smoothed", &label_targets},
                           {"causal_smoothed", &causal_targets}};

    json training = json::object();
    json dispersion_section = json::object();
    for (const Mode& mode : modes) {
        classifier::TrainConfig cc = config.classifier;
        cc.num_classes = K;
        cc.seed = derive_seed(config.master_seed, kClassifierSeedOffset);
        cc.smoothing_mode = mode.name;
        const classifier::ClassifierModel model = stage("train_classifier", [&]() {
            return classifier::train_classifier(train_data, *mode.targets, cc);
        });

        // Stage 7: test-split evaluation.
        std::vector<int> predictions(test_data.size());
        std::vector<int> truths(test_data.size());
        std::vector<Vec> representations(test_data.size());
        for (std::size_t i = 0; i < test_data.size(); ++i) {
            const Vec& x = test_data.records[i].features;
            const Vec probs = classifier::predict_proba(model, x);
            predictions[i] = probs[1] >= config.classifier.decision_threshold ? 1 : 0;
            truths[i] = class_of(test_data.records[i].outcome, outcome_kind);
            representations[i] = classifier::hidden_representation(model, x);
        }
        const metrics::Metrics m = metrics::confusion_metrics(predictions, truths, 1);

        json dispersion_json;
        try {
            dispersion_json = metrics::dispersion(representations, truths).to_json();
        } catch (const DataError& e) {
            dispersion_json = json{{"skipped", e.what()}};
        }

        json mode_report{{"metrics", m.to_json()},
                         {"dispersion", dispersion_json},
                         {"final_loss", model.training_meta.loss_curve.back()},
                         {"loss_curve", model.training_meta.loss_curve}};

        if (!artifacts_dir.empty()) {
            const std::string curve_file = std::string("loss_curve_") + mode.name + ".csv";
            std::string csv = "epoch,loss\n";
            for (std::size_t e = 0; e < model.training_meta.loss_curve.size(); ++e) {
                csv += std::to_string(e) + "," + format_double(model.training_meta.loss_curve[e]) + "\n";
            }
            write_text_file(artifacts_dir + "/" + curve_file, csv);
            mode_report["loss_curve_file"] = curve_file;

            const std::string rep_file = std::string("representations_") + mode.name + ".csv";
            std::string rep_csv;
            for (std::size_t i = 0; i < representations.size(); ++i) {
                rep_csv += std::to_string(truths[i]);
                for (double v : representations[i]) rep_csv += "," + format_double(v);
                rep_csv += "\n";
            }
            write_text_file(artifacts_dir + "/" + rep_file, rep_csv);
            mode_report["representations_file"] = rep_file;
        } else {
            mode_report["loss_curve_file"] = "skipped: no artifacts directory";
            mode_report["representations_file"] = "skipped: no artifacts directory";
        }

        training[mode.name] = std::move(mode_report);
        dispersion_section[mode.name] = training[mode.name]["dispersion"];
    }

    json estimates_json = json::array();
    for (const auto& e : estimates) estimates_json.push_back(e.to_json());

    ExperimentReport report;
    report["config_echo"] = config.to_json();
    report["dataset"] = {{"n", data.size()},
                         {"schema", data.schema.to_json()},
                         {"provenance", data.provenance.to_json()}};
    report["splits"] = {{"train_size", split.train.size()},
                        {"validation_size", split.validation.size()},
                        {"test_size", split.test.size()},
                        {"seed", derive_seed(config.master_seed, kSplitSeedOffset)}};
    report["encoder"] = {{"epochs", enc_model.training_meta.epochs},
                         {"final_loss", enc_model.training_meta.final_loss},
                         {"subset_accuracy_train", encoder::subset_accuracy(enc_model, train_data)},
                         {"subset_accuracy_test", encoder::subset_accuracy(enc_model, test_data)},
                         {"instrument_source", "per-article sigmoid probabilities"}};
    report["leakage_check"] = {{"outcome_reads_before_estimation", leak_reads}, {"pass", leak_reads == 0}};
    report["exogeneity_check"] = exogeneity;
    report["causal_estimates"] = estimates_json;
    report["ate_table"] = table.to_json();
    report["ate_table_train_only_check"] = {{"pass", table_check}};
    report["refutations"] = refutations;
    report["smoothing"] = {{"epsilon", config.smoothing.epsilon},
                           {"omega", config.smoothing.omega},
                           {"epsilon_max", config.smoothing.epsilon_max},
                           {"num_classes", K},
                           {"class_rule", outcome_kind == ColumnKind::binary
                                              ? "outcome used as class label"
                                              : "class 1 when outcome > 0"},
                           {"causal_epsilon_mean", eps_sum / static_cast<double>(train_data.size())},
                           {"causal_epsilon_max", eps_max_seen},
                           {"causal_epsilon_clamped_count", clamped_count}};
    report["training"] = training;
    report["timestamps"] = {{"started_at", started_at}, {"finished_at", iso_timestamp()}};
    report["seed"] = config.master_seed;
    return report;
}

void emit_report(const ExperimentReport& report, const std::string& path, ReportFormat format) {
    std::string content;
    if (format == ReportFormat::json) {
        content = report.dump(2);
        content += '\n';
    } else {
        content = render_text_summary(report);
    }
    write_text_file(path, content);
}

namespace {

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

}  // namespace

std::string render_text_summary(const ExperimentReport& report) {
    std::string out;
    out += "== experiment summary (seed " + report.at("seed").dump() + ") ==\n";
    const auto& ds = report.at("dataset");
    out += "dataset: " + ds.at("provenance").at("kind").get<std::string>() + ", n=" +
           std::to_string(ds.at("n").get<std::size_t>()) + "\n";
    const auto& sp = report.at("splits");
    out += "splits: train=" + std::to_string(sp.at("train_size").get<std::size_t>()) +
           " validation=" + std::to_string(sp.at("validation_size").get<std::size_t>()) +
           " test=" + std::to_string(sp.at("test_size").get<std::size_t>()) + "\n";
    out += "\ncausal estimates (training split):\n";
    for (const auto& e : report.at("causal_estimates")) {
        out += "  treatment " + std::to_string(e.at("treatment_index").get<std::size_t>()) + ": ate=" +
               fmt(e.at("ate").get<double>()) + " (se " + fmt(e.at("std_error").get<double>()) + "), estimator=" +
               e.at("estimator").get<std::string>() + ", first_stage=" +
               fmt(e.at("first_stage_strength").get<double>()) + "\n";
    }
    out += "\nrefutation:\n";
    out += "  method     treatment  original    repl_mean   repl_std    verdict\n";
    for (const auto& entry : report.at("refutations")) {
        const std::string t = std::to_string(entry.at("treatment_index").get<std::size_t>());
        for (const char* method : {"bootstrap", "placebo", "subset"}) {
            const auto& r = entry.at(method);
            char line[160];
            std::snprintf(line, sizeof(line), "  %-9s  %-9s  %-10s  %-10s  %-10s  %s\n", method, t.c_str(),
                          fmt(r.at("original_ate").get<double>()).c_str(),
                          fmt(r.at("replicate_mean").get<double>()).c_str(),
                          fmt(r.at("replicate_std").get<double>()).c_str(),
                          r.at("verdict").get<std::string>().c_str());
            out += line;
        }
    }
    out += "\ntraining (test split):\n";
    out += "  mode             P         R         F1        Acc\n";
    for (const char* mode : {"hard", "label_smoothed", "causal_smoothed"}) {
        const auto& m = report.at("training").at(mode).at("metrics");
        char line[160];
        std::snprintf(line, sizeof(line), "  %-15s  %-8s  %-8s  %-8s  %-8s\n", mode,
                      fmt(m.at("precision").get<double>()).c_str(), fmt(m.at("recall").get<double>()).c_str(),
                      fmt(m.at("f1").get<double>()).c_str(), fmt(m.at("accuracy").get<double>()).c_str());
        out += line;
    }
    out += "\ndispersion (separation ratio):";
    for (const char* mode : {"hard", "label_smoothed", "causal_smoothed"}) {
        const auto& d = report.at("training").at(mode).at("dispersion");
        out += std::string(" ") + mode + "=";
        if (d.contains("skipped")) {
            out += "skipped";
        } else if (d.at("separation_ratio").is_null()) {
            out += "undefined";
        } else {
            out += fmt(d.at("separation_ratio").get<double>());
        }
    }
    out += "\n";
    const auto& ex = report.at("exogeneity_check");
    out += "exogeneity check: max |partial corr given T| = " +
           fmt(ex.at("max_abs_partial_correlation").get<double>()) + " (" +
           (ex.at("flagged").get<bool>() ? "FLAGGED" : "ok") + "), max |corr(Z, IV residual)| = " +
           fmt(ex.at("max_abs_iv_residual_correlation").get<double>()) + " (" +
           (ex.at("iv_residual_flagged").get<bool>() ? "FLAGGED" : "ok") + "), threshold " +
           fmt(ex.at("threshold").get<double>(), 2) + "\n";
    return out;
}

}  // namespace csmooth::pipeline
