#include "csmooth/classifier.hpp"

#include <cmath>

#include "csmooth/descent.hpp"
#include "csmooth/errors.hpp"
#include "csmooth/rng.hpp"

namespace csmooth::classifier {

using losses::SoftLabel;
using nlohmann::json;

Architecture architecture_from_string(const std::string& s) {
    if (s == "logistic") return Architecture::logistic;
    if (s == "one_hidden_layer") return Architecture::one_hidden_layer;
    throw ConfigError("unknown architecture '" + s + "'");
}

std::string to_string(Architecture a) {
    return a == Architecture::logistic ? "logistic" : "one_hidden_layer";
}

namespace {

// Flat layouts.
// logistic:          W (K x d), b (K)
// one_hidden_layer:  W1 (h x d), b1 (h), W2 (K x h), b2 (K)
struct Layout {
    Architecture arch;
    std::size_t d, h, k;

    std::size_t size() const {
        if (arch == Architecture::logistic) return k * d + k;
        return h * d + h + k * h + k;
    }
    std::size_t w1(std::size_t i, std::size_t j) const { return i * d + j; }
    std::size_t b1(std::size_t i) const { return h * d + i; }
    std::size_t w2(std::size_t c, std::size_t i) const {
        if (arch == Architecture::logistic) return c * d + i;
        return h * d + h + c * h + i;
    }
    std::size_t b2(std::size_t c) const {
        if (arch == Architecture::logistic) return k * d + c;
        return h * d + h + k * h + c;
    }
};

Layout layout_of(const ClassifierModel& m) {
    return Layout{m.architecture, m.input_dim, m.hidden_width, m.num_classes};
}

Vec softmax(Vec logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
    return logits;
}

struct Forward {
    Vec hidden;  // tanh activations (empty for logistic)
    Vec probs;
};

Forward forward(const Layout& lay, const Vec& params, const Vec& x) {
    Forward f;
    Vec logits(lay.k, 0.0);
    if (lay.arch == Architecture::logistic) {
        for (std::size_t c = 0; c < lay.k; ++c) {
            double s = params[lay.b2(c)];
            for (std::size_t i = 0; i < lay.d; ++i) s += params[lay.w2(c, i)] * x[i];
            logits[c] = s;
        }
    } else {
        f.hidden.resize(lay.h);
        for (std::size_t i = 0; i < lay.h; ++i) {
            double s = params[lay.b1(i)];
            for (std::size_t j = 0; j < lay.d; ++j) s += params[lay.w1(i, j)] * x[j];
            f.hidden[i] = std::tanh(s);
        }
        for (std::size_t c = 0; c < lay.k; ++c) {
            double s = params[lay.b2(c)];
            for (std::size_t i = 0; i < lay.h; ++i) s += params[lay.w2(c, i)] * f.hidden[i];
            logits[c] = s;
        }
    }
    f.probs = softmax(std::move(logits));
    return f;
}

double batch_loss(const Layout& lay, const Vec& params, const Dataset& data,
                  const std::vector<SoftLabel>& targets) {
    double total = 0.0;
    for (std::size_t r = 0; r < data.records.size(); ++r) {
        const Forward f = forward(lay, params, data.records[r].features);
        total += losses::soft_cross_entropy(f.probs, targets[r]);
    }
    return total / static_cast<double>(data.records.size());
}

Vec batch_gradient(const Layout& lay, const Vec& params, const Dataset& data,
                   const std::vector<SoftLabel>& targets) {
    Vec grad(lay.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(data.records.size());
    Vec dlogit(lay.k);
    for (std::size_t r = 0; r < data.records.size(); ++r) {
        const Vec& x = data.records[r].features;
        const Forward f = forward(lay, params, x);
        // softmax + cross entropy: d loss / d logit = p - target
        for (std::size_t c = 0; c < lay.k; ++c) {
            dlogit[c] = (f.probs[c] - targets[r].distribution[c]) * inv_n;
        }
        if (lay.arch == Architecture::logistic) {
            for (std::size_t c = 0; c < lay.k; ++c) {
                for (std::size_t i = 0; i < lay.d; ++i) grad[lay.w2(c, i)] += dlogit[c] * x[i];
                grad[lay.b2(c)] += dlogit[c];
            }
        } else {
            for (std::size_t c = 0; c < lay.k; ++c) {
                for (std::size_t i = 0; i < lay.h; ++i) grad[lay.w2(c, i)] += dlogit[c] * f.hidden[i];
                grad[lay.b2(c)] += dlogit[c];
            }
            for (std::size_t i = 0; i < lay.h; ++i) {
                double dh = 0.0;
                for (std::size_t c = 0; c < lay.k; ++c) dh += params[lay.w2(c, i)] * dlogit[c];
                const double dpre = dh * (1.0 - f.hidden[i] * f.hidden[i]);
                for (std::size_t j = 0; j < lay.d; ++j) grad[lay.w1(i, j)] += dpre * x[j];
                grad[lay.b1(i)] += dpre;
            }
        }
    }
    return grad;
}

void check_targets(const Dataset& data, const std::vector<SoftLabel>& targets, std::size_t k) {
    if (targets.size() != data.records.size()) {
        throw DataError("train_classifier: one target per record required");
    }
    for (const SoftLabel& t : targets) {
        if (t.distribution.size() != k) throw DataError("train_classifier: target dimension mismatch");
        if (!t.is_valid()) throw DataError("train_classifier: target is not a distribution");
    }
}

}  // namespace

std::size_t ClassifierModel::param_count() const {
    return layout_of(*this).size();
}

ClassifierModel train_classifier(const Dataset& data, const std::vector<SoftLabel>& targets,
                                 const TrainConfig& config) {
    if (config.epochs < 1) throw ConfigError("train_classifier: epochs must be >= 1");
    if (!(config.learning_rate > 0.0)) throw ConfigError("train_classifier: learning rate must be > 0");
    if (config.num_classes < 2) throw ConfigError("train_classifier: num_classes must be >= 2");
    if (data.records.empty()) throw DataError("train_classifier: dataset is empty");
    check_targets(data, targets, config.num_classes);
    if (config.architecture == Architecture::one_hidden_layer && config.hidden_width < 1) {
        throw ConfigError("train_classifier: hidden_width must be >= 1");
    }

    ClassifierModel model;
    model.architecture = config.architecture;
    model.input_dim = data.schema.n_features;
    model.hidden_width = config.architecture == Architecture::one_hidden_layer ? config.hidden_width : 0;
    model.num_classes = config.num_classes;

    const Layout lay = layout_of(model);
    Rng rng(derive_seed(config.seed, 29));
    model.params.resize(lay.size());
    const double scale =
        1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, model.input_dim)));
    for (double& p : model.params) p = rng.normal(0.0, scale);

    DescentResult fit = gradient_descent(
        model.params, config.epochs, config.learning_rate,
        [&](const Vec& p) { return batch_loss(lay, p, data, targets); },
        [&](const Vec& p) { return batch_gradient(lay, p, data, targets); });

    model.training_meta = {config.epochs, config.learning_rate, config.smoothing_mode, config.seed,
                           std::move(fit.loss_curve)};
    return model;
}

Vec predict_proba(const ClassifierModel& model, const Vec& features) {
    if (features.size() != model.input_dim) throw DataError("predict_proba: feature dimension mismatch");
    return forward(layout_of(model), model.params, features).probs;
}

Vec hidden_representation(const ClassifierModel& model, const Vec& features) {
    if (features.size() != model.input_dim) {
        throw DataError("hidden_representation: feature dimension mismatch");
    }
    if (model.architecture == Architecture::logistic) return features;
    return forward(layout_of(model), model.params, features).hidden;
}

double gradient_check(const ClassifierModel& model, const Dataset& batch,
                      const std::vector<SoftLabel>& targets, double step) {
    if (!(step > 0.0)) throw ConfigError("gradient_check: step must be > 0");
    if (batch.records.empty()) throw DataError("gradient_check: batch is empty");
    check_targets(batch, targets, model.num_classes);

    const Layout lay = layout_of(model);
    const Vec analytic = batch_gradient(lay, model.params, batch, targets);

    Vec p = model.params;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + step;
        const double up = batch_loss(lay, p, batch, targets);
        p[i] = saved - step;
        const double dn = batch_loss(lay, p, batch, targets);
        p[i] = saved;
        const double numeric = (up - dn) / (2.0 * step);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
    }
    return max_rel;
}

json ClassifierModel::to_json() const {
    return json{{"architecture", to_string(architecture)},
                {"input_dim", input_dim},
                {"hidden_width", hidden_width},
                {"num_classes", num_classes},
                {"parameters", params},
                {"training_meta",
                 {{"epochs", training_meta.epochs},
                  {"learning_rate", training_meta.learning_rate},
                  {"smoothing_mode", training_meta.smoothing_mode},
                  {"seed", training_meta.seed},
                  {"loss_curve", training_meta.loss_curve}}}};
}

ClassifierModel ClassifierModel::from_json(const json& j) {
    ClassifierModel m;
    try {
        m.architecture = architecture_from_string(j.at("architecture").get<std::string>());
        m.input_dim = j.at("input_dim").get<std::size_t>();
        m.hidden_width = j.at("hidden_width").get<std::size_t>();
        m.num_classes = j.at("num_classes").get<std::size_t>();
        m.params = j.at("parameters").get<Vec>();
        const auto& meta = j.at("training_meta");
        m.training_meta.epochs = meta.at("epochs").get<std::size_t>();
        m.training_meta.learning_rate = meta.at("learning_rate").get<double>();
        m.training_meta.smoothing_mode = meta.at("smoothing_mode").get<std::string>();
        m.training_meta.seed = meta.at("seed").get<std::uint64_t>();
        m.training_meta.loss_curve = meta.at("loss_curve").get<Vec>();
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid classifier model JSON: ") + e.what());
    }
    if (m.params.size() != m.param_count()) {
        throw DataError("invalid classifier model JSON: parameter count mismatch");
    }
    return m;
}

}  // namespace csmooth::classifier
