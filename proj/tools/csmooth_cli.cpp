#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csmooth/dataset.hpp"
#include "csmooth/encoder.hpp"
#include "csmooth/errors.hpp"
#include "csmooth/estimators.hpp"
#include "csmooth/pipeline.hpp"
#include "csmooth/refutation.hpp"
#include "csmooth/scm.hpp"
#include "csmooth/toml.hpp"

namespace {

using nlohmann::json;

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw csmooth::IoError("cannot open for writing: " + out_path);
    f << content;
    if (!f) throw csmooth::IoError("write failed: " + out_path);
}

json load_config_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
    json cfg = path.empty() ? json::object() : csmooth::load_config_file(path);
    for (const std::string& o : overrides) csmooth::apply_override(cfg, o);
    return cfg;
}

csmooth::causal::CausalQuery make_query(std::size_t treatment, const std::vector<std::size_t>& instruments,
                                        double a, double b) {
    csmooth::causal::CausalQuery q;
    q.treatment_index = treatment;
    q.instrument_columns = instruments;
    q.contrast = {a, b};
    return q;
}

int run_main(int argc, char** argv) {
    CLI::App app{"csmooth: instrumental-variable effect estimation, refutation tests, "
                 "and causal label smoothing for classifier training"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic observational dataset");
    std::string synth_config, synth_out = "-";
    std::size_t synth_n = 10000;
    std::uint64_t synth_seed = 0;
    std::vector<std::string> synth_sets;
    synth->add_option("--config", synth_config, "SCM config file (TOML or JSON)");
    synth->add_option("--n", synth_n, "Number of records")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Master seed")->capture_default_str();
    synth->add_option("--set", synth_sets, "Override config keys, e.g. --set treatment_effects=[2.0]");
    synth->add_option("--out", synth_out, "Output JSONL path (default stdout)");

    // ---- estimate ----
    auto* est = app.add_subcommand("estimate", "Estimate an average treatment effect");
    std::string est_data, est_estimator = "two_stage_ls", est_out = "-";
    std::size_t est_treatment = 0;
    std::vector<std::size_t> est_instruments;
    double est_a = 1.0, est_b = 0.0;
    bool est_with_naive = false;
    est->add_option("--data", est_data, "Dataset JSONL path")->required();
    est->add_option("--estimator", est_estimator, "wald | covariance_iv | two_stage_ls | naive")
        ->capture_default_str();
    est->add_option("--treatment", est_treatment, "Treatment column index")->capture_default_str();
    est->add_option("--instruments", est_instruments, "Instrument column indices (default: estimator rule)");
    est->add_option("--contrast-a", est_a, "Contrast value a")->capture_default_str();
    est->add_option("--contrast-b", est_b, "Contrast value b")->capture_default_str();
    std::vector<double> est_strata;
    est->add_option("--strata", est_strata, "Two instrument stratum values for wald on a non-binary column")
        ->expected(2);
    est->add_flag("--with-naive", est_with_naive, "Also report the naive baseline");
    est->add_option("--out", est_out, "Output JSON path (default stdout)");

    // ---- refute ----
    auto* ref = app.add_subcommand("refute", "Run a robustness refutation of an estimate");
    std::string ref_data, ref_method = "bootstrap", ref_estimator = "two_stage_ls", ref_out = "-";
    std::string ref_placebo_mode = "joint_permutation";
    std::size_t ref_treatment = 0, ref_reps = 100;
    std::vector<std::size_t> ref_instruments;
    double ref_fraction = 0.8;
    std::uint64_t ref_seed = 0;
    ref->add_option("--data", ref_data, "Dataset JSONL path")->required();
    ref->add_option("--method", ref_method, "bootstrap | placebo | subset")->capture_default_str();
    ref->add_option("--estimator", ref_estimator, "Estimator to refute")->capture_default_str();
    ref->add_option("--treatment", ref_treatment, "Treatment column index")->capture_default_str();
    ref->add_option("--instruments", ref_instruments, "Instrument column indices");
    ref->add_option("--reps", ref_reps, "Number of replicates")->capture_default_str();
    ref->add_option("--fraction", ref_fraction, "Subset fraction (subset method)")->capture_default_str();
    ref->add_option("--seed", ref_seed, "Refutation seed")->capture_default_str();
    ref->add_option("--placebo-mode", ref_placebo_mode,
                    "joint_permutation | treatment_only | instrument_only")
        ->capture_default_str();
    ref->add_option("--out", ref_out, "Output JSON path (default stdout)");

    // ---- train-encoder ----
    auto* enc = app.add_subcommand("train-encoder", "Fit the law-article encoder on a dataset");
    std::string enc_data, enc_out = "-";
    std::size_t enc_epochs = 200;
    double enc_lr = 0.5;
    std::uint64_t enc_seed = 0;
    enc->add_option("--data", enc_data, "Dataset JSONL path")->required();
    enc->add_option("--epochs", enc_epochs, "Training epochs")->capture_default_str();
    enc->add_option("--learning-rate", enc_lr, "Learning rate")->capture_default_str();
    enc->add_option("--seed", enc_seed, "Training seed")->capture_default_str();
    enc->add_option("--out", enc_out, "Model JSON path (default stdout)");

    // ---- run ----
    auto* run = app.add_subcommand("run", "Run the full experiment pipeline");
    std::string run_config, run_out_dir = "out";
    std::vector<std::string> run_sets;
    bool run_no_summary = false;
    std::int64_t run_seed = -1;
    run->add_option("--config", run_config, "Pipeline config file (TOML or JSON)")->required();
    run->add_option("--set", run_sets, "Override config keys, e.g. --set data.n=20000");
    run->add_option("--seed", run_seed, "Override master_seed");
    run->add_option("--out-dir", run_out_dir, "Directory for report.json, summary.txt and CSV exports")
        ->capture_default_str();
    run->add_flag("--no-summary", run_no_summary, "Do not print the text summary to stdout");

    // ---- report ----
    auto* rep = app.add_subcommand("report", "Re-render a stored experiment report");
    std::string rep_in, rep_format = "text", rep_out = "-";
    rep->add_option("--in", rep_in, "Report JSON path")->required();
    rep->add_option("--format", rep_format, "text | json")->capture_default_str();
    rep->add_option("--out", rep_out, "Output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    if (*synth) {
        json cfg_json = load_config_with_overrides(synth_config, synth_sets);
        // accept either a bare SCM config or a pipeline config carrying data_source.scm
        if (cfg_json.contains("data_source") && cfg_json.at("data_source").contains("scm")) {
            cfg_json = cfg_json.at("data_source").at("scm");
        }
        const auto cfg = csmooth::scm::ScmConfig::from_json(cfg_json);
        const auto data = csmooth::scm::generate_dataset(cfg, synth_n, synth_seed);
        write_or_print(synth_out, data.to_jsonl());
        std::cerr << "generated " << data.size() << " records\n";
        return 0;
    }

    if (*est) {
        const auto data = csmooth::load_dataset(est_data);
        const auto kind = csmooth::causal::estimator_from_string(est_estimator);
        auto query = make_query(est_treatment, est_instruments, est_a, est_b);
        if (!est_strata.empty()) query.instrument_strata = {{est_strata[0], est_strata[1]}};
        json out;
        if (kind == csmooth::causal::Estimator::two_stage_ls && est_instruments.empty()) {
            out = csmooth::causal::estimate(data, query, kind).to_json();
        } else if (kind == csmooth::causal::Estimator::two_stage_ls) {
            out = csmooth::causal::two_stage_least_squares(data, est_instruments, {est_treatment},
                                                           {est_a, est_b})[0]
                      .to_json();
        } else {
            out = csmooth::causal::estimate(data, query, kind).to_json();
        }
        if (est_with_naive) {
            out = json{{"estimate", out},
                       {"naive", csmooth::causal::naive_ate(data, query).to_json()}};
        }
        write_or_print(est_out, out.dump(2) + "\n");
        return 0;
    }

    if (*ref) {
        const auto data = csmooth::load_dataset(ref_data);
        const auto estimator = csmooth::causal::estimator_from_string(ref_estimator);
        const auto method = csmooth::refute::method_from_string(ref_method);
        const auto query = make_query(ref_treatment, ref_instruments, 1.0, 0.0);
        csmooth::refute::RefutationConfig tuning;
        tuning.placebo_mode = csmooth::refute::placebo_mode_from_string(ref_placebo_mode);
        csmooth::refute::RefutationReport report;
        switch (method) {
            case csmooth::refute::Method::bootstrap:
                report = csmooth::refute::bootstrap_refute(data, query, estimator, ref_reps, ref_seed, tuning);
                break;
            case csmooth::refute::Method::placebo:
                report = csmooth::refute::placebo_refute(data, query, estimator, ref_reps, ref_seed, tuning);
                break;
            case csmooth::refute::Method::subset:
                report = csmooth::refute::subset_refute(data, query, estimator, ref_fraction, ref_reps,
                                                        ref_seed, tuning);
                break;
        }
        write_or_print(ref_out, report.to_json().dump(2) + "\n");
        std::cerr << ref_method << " verdict: " << (report.pass ? "pass" : "fail") << "\n";
        return 0;
    }

    if (*enc) {
        const auto data = csmooth::load_dataset(enc_data);
        csmooth::encoder::TrainConfig cfg{enc_epochs, enc_lr, enc_seed};
        const auto model = csmooth::encoder::train_encoder(data, cfg);
        write_or_print(enc_out, model.to_json().dump(2) + "\n");
        std::cerr << "final loss " << model.training_meta.final_loss << ", subset accuracy "
                  << csmooth::encoder::subset_accuracy(model, data) << "\n";
        return 0;
    }

    if (*run) {
        json cfg_json = load_config_with_overrides(run_config, run_sets);
        if (run_seed >= 0) cfg_json["master_seed"] = static_cast<std::uint64_t>(run_seed);
        const auto config = csmooth::pipeline::PipelineConfig::from_json(cfg_json);
        std::error_code ec;
        std::filesystem::create_directories(run_out_dir, ec);
        if (ec) throw csmooth::IoError("cannot create output directory: " + run_out_dir);
        const auto report = csmooth::pipeline::run_experiment(config, run_out_dir);
        csmooth::pipeline::emit_report(report, run_out_dir + "/report.json",
                                       csmooth::pipeline::ReportFormat::json);
        csmooth::pipeline::emit_report(report, run_out_dir + "/summary.txt",
                                       csmooth::pipeline::ReportFormat::text_summary);
        if (!run_no_summary) std::cout << csmooth::pipeline::render_text_summary(report);
        std::cerr << "report written to " << run_out_dir << "/report.json\n";
        return 0;
    }

    if (*rep) {
        std::ifstream f(rep_in, std::ios::binary);
        if (!f) throw csmooth::IoError("cannot open report: " + rep_in);
        json report;
        try {
            report = json::parse(f);
        } catch (const json::parse_error& e) {
            throw csmooth::DataError("invalid report JSON: " + std::string(e.what()));
        }
        if (rep_format == "json") {
            write_or_print(rep_out, report.dump(2) + "\n");
        } else if (rep_format == "text") {
            try {
                write_or_print(rep_out, csmooth::pipeline::render_text_summary(report));
            } catch (const json::exception& e) {
                throw csmooth::DataError("report is missing expected fields: " + std::string(e.what()));
            }
        } else {
            throw csmooth::ConfigError("report format must be 'text' or 'json'");
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const csmooth::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const csmooth::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const csmooth::NumericError& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 4;
    } catch (const csmooth::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
