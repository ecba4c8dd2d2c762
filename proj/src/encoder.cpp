#include "csmooth/encoder.hpp"

#include <cmath>

#include "csmooth/descent.hpp"
#include "csmooth/errors.hpp"
#include "csmooth/rng.hpp"
#include "csmooth/smoothing.hpp"

namespace csmooth::encoder {

using losses::MultiLabelTarget;
using nlohmann::json;

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Flat layout: weights row-major, then bias.
struct Layout {
    std::size_t articles;
    std::size_t features;
    std::size_t size() const { return articles * features + articles; }
    std::size_t w(std::size_t k, std::size_t i) const { return k * features + i; }
    std::size_t b(std::size_t k) const { return articles * features + k; }
};

Vec scores_for(const Layout& lay, const Vec& params, const Vec& features) {
    Vec s(lay.articles);
    for (std::size_t k = 0; k < lay.articles; ++k) {
        double acc = params[lay.b(k)];
        const double* w = &params[lay.w(k, 0)];
        for (std::size_t i = 0; i < lay.features; ++i) acc += w[i] * features[i];
        s[k] = acc;
    }
    return s;
}

double batch_loss(const Layout& lay, const Vec& params, const Dataset& data,
                  const std::vector<MultiLabelTarget>& targets) {
    double total = 0.0;
    for (std::size_t r = 0; r < data.records.size(); ++r) {
        total += losses::zlpr_loss(scores_for(lay, params, data.records[r].features), targets[r]);
    }
    return total / static_cast<double>(data.records.size());
}

Vec batch_gradient(const Layout& lay, const Vec& params, const Dataset& data,
                   const std::vector<MultiLabelTarget>& targets) {
    Vec grad(lay.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(data.records.size());
    for (std::size_t r = 0; r < data.records.size(); ++r) {
        const Vec& x = data.records[r].features;
        const Vec g = losses::zlpr_gradient(scores_for(lay, params, x), targets[r]);
        for (std::size_t k = 0; k < lay.articles; ++k) {
            if (g[k] == 0.0) continue;
            const double gk = g[k] * inv_n;
            double* w = &grad[lay.w(k, 0)];
            for (std::size_t i = 0; i < lay.features; ++i) w[i] += gk * x[i];
            grad[lay.b(k)] += gk;
        }
    }
    return grad;
}

}  // namespace

EncoderModel train_encoder(const Dataset& data, const TrainConfig& config) {
    if (config.epochs < 1) throw ConfigError("train_encoder: epochs must be >= 1");
    if (!(config.learning_rate > 0.0)) throw ConfigError("train_encoder: learning rate must be > 0");
    if (data.records.empty()) throw DataError("train_encoder: dataset is empty");
    if (data.schema.n_law_labels == 0) throw DataError("train_encoder: dataset has no law_labels");

    const Layout lay{data.schema.n_law_labels, data.schema.n_features};

    std::vector<MultiLabelTarget> targets;
    targets.reserve(data.records.size());
    for (const Record& r : data.records) targets.push_back(MultiLabelTarget::from_multi_hot(r.law_labels));

    // Small seeded init; zlpr has no symmetry to break but the seed should
    // be observable in the fitted parameters.
    Rng rng(derive_seed(config.seed, 11));
    Vec params(lay.size());
    for (double& p : params) p = rng.normal(0.0, 0.01);

    DescentResult fit = gradient_descent(
        params, config.epochs, config.learning_rate,
        [&](const Vec& p) { return batch_loss(lay, p, data, targets); },
        [&](const Vec& p) { return batch_gradient(lay, p, data, targets); });

    EncoderModel model;
    model.weights = Mat(lay.articles, lay.features);
    model.bias.resize(lay.articles);
    for (std::size_t k = 0; k < lay.articles; ++k) {
        for (std::size_t i = 0; i < lay.features; ++i) model.weights(k, i) = params[lay.w(k, i)];
        model.bias[k] = params[lay.b(k)];
    }
    model.training_meta = {config.epochs, config.learning_rate, fit.final_loss, config.seed,
                           std::move(fit.loss_curve)};
    return model;
}

Vec encode(const EncoderModel& model, const Vec& features) {
    if (features.size() != model.n_features()) throw DataError("encode: feature dimension mismatch");
    Vec out(model.n_articles());
    for (std::size_t k = 0; k < model.n_articles(); ++k) {
        double s = model.bias[k];
        for (std::size_t i = 0; i < features.size(); ++i) s += model.weights(k, i) * features[i];
        // keep strictly inside (0, 1) even when the sigmoid saturates
        out[k] = std::min(std::max(sigmoid(s), 1e-12), 1.0 - 1e-12);
    }
    return out;
}

double mean_rank_loss(const EncoderModel& model, const Dataset& data) {
    if (data.records.empty()) throw DataError("mean_rank_loss: dataset is empty");
    double total = 0.0;
    for (const Record& r : data.records) {
        Vec s(model.n_articles());
        for (std::size_t k = 0; k < model.n_articles(); ++k) {
            double acc = model.bias[k];
            for (std::size_t i = 0; i < r.features.size(); ++i) acc += model.weights(k, i) * r.features[i];
            s[k] = acc;
        }
        total += losses::zlpr_loss(s, MultiLabelTarget::from_multi_hot(r.law_labels));
    }
    return total / static_cast<double>(data.records.size());
}

double subset_accuracy(const EncoderModel& model, const Dataset& data) {
    if (data.records.empty()) throw DataError("subset_accuracy: dataset is empty");
    std::size_t hits = 0;
    for (const Record& r : data.records) {
        const Vec probs = encode(model, r.features);
        bool all = true;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            const int pred = probs[k] > 0.5 ? 1 : 0;
            if (pred != r.law_labels[k]) { all = false; break; }
        }
        hits += all ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.records.size());
}

json EncoderModel::to_json() const {
    json w = json::array();
    for (std::size_t k = 0; k < weights.rows; ++k) {
        json row = json::array();
        for (std::size_t i = 0; i < weights.cols; ++i) row.push_back(weights(k, i));
        w.push_back(std::move(row));
    }
    return json{{"weights", w},
                {"bias", bias},
                {"training_meta",
                 {{"epochs", training_meta.epochs},
                  {"learning_rate", training_meta.learning_rate},
                  {"final_loss", training_meta.final_loss},
                  {"seed", training_meta.seed},
                  {"loss_curve", training_meta.loss_curve}}}};
}

EncoderModel EncoderModel::from_json(const json& j) {
    EncoderModel m;
    try {
        const auto& w = j.at("weights");
        const std::size_t rows = w.size();
        const std::size_t cols = rows > 0 ? w.at(0).size() : 0;
        m.weights = Mat(rows, cols);
        for (std::size_t k = 0; k < rows; ++k) {
            for (std::size_t i = 0; i < cols; ++i) m.weights(k, i) = w.at(k).at(i).get<double>();
        }
        m.bias = j.at("bias").get<Vec>();
        const auto& meta = j.at("training_meta");
        m.training_meta.epochs = meta.at("epochs").get<std::size_t>();
        m.training_meta.learning_rate = meta.at("learning_rate").get<double>();
        m.training_meta.final_loss = meta.at("final_loss").get<double>();
        m.training_meta.seed = meta.at("seed").get<std::uint64_t>();
        m.training_meta.loss_curve = meta.at("loss_curve").get<Vec>();
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid encoder model JSON: ") + e.what());
    }
    if (m.bias.size() != m.weights.rows) throw DataError("invalid encoder model JSON: bias length mismatch");
    return m;
}

}  // namespace csmooth::encoder
