#pragma once

#include <cstdint>

#include <json.hpp>

#include "csmooth/dataset.hpp"
#include "csmooth/linalg.hpp"

namespace csmooth::encoder {

struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 0.5;
    std::uint64_t seed = 0;
};

// Linear multi-label law-article predictor. Its per-article sigmoid outputs
// double as the instrument vector for the causal stage: the article task
// depends on the case features alone, so the scores inherit their
// exogeneity.
struct EncoderModel {
    Mat weights;  // n_articles x n_features
    Vec bias;     // per article

    struct Meta {
        std::size_t epochs = 0;
        double learning_rate = 0.0;
        double final_loss = 0.0;
        std::uint64_t seed = 0;
        Vec loss_curve;
    } training_meta;

    std::size_t n_articles() const { return weights.rows; }
    std::size_t n_features() const { return weights.cols; }

    nlohmann::json to_json() const;
    static EncoderModel from_json(const nlohmann::json& j);
};

// Full-batch gradient descent on the mean multi-label rank loss over the
// dataset's law_labels. Deterministic for a fixed seed.
EncoderModel train_encoder(const Dataset& data, const TrainConfig& config);

// Sigmoid of the linear scores, clamped into the open interval (0, 1).
Vec encode(const EncoderModel& model, const Vec& features);

// Mean rank loss of the model on a dataset; exposed for evaluation.
double mean_rank_loss(const EncoderModel& model, const Dataset& data);

// Fraction of rows whose predicted article set (threshold 0.5) matches
// law_labels exactly.
double subset_accuracy(const EncoderModel& model, const Dataset& data);

}  // namespace csmooth::encoder
