#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "csmooth/dataset.hpp"
#include "csmooth/linalg.hpp"
#include "csmooth/smoothing.hpp"

namespace csmooth::classifier {

enum class Architecture { logistic, one_hidden_layer };

Architecture architecture_from_string(const std::string& s);
std::string to_string(Architecture a);

struct TrainConfig {
    Architecture architecture = Architecture::one_hidden_layer;
    std::size_t hidden_width = 16;
    std::size_t num_classes = 2;
    std::size_t epochs = 300;
    double learning_rate = 0.3;
    std::uint64_t seed = 0;
    double decision_threshold = 0.5;
    std::string smoothing_mode = "none";  // recorded in training_meta
};

// Softmax classifier over case features, either linear or with one tanh
// hidden layer. Parameters live in a single flat vector so the finite
// difference check can walk every coordinate.
struct ClassifierModel {
    Architecture architecture = Architecture::one_hidden_layer;
    std::size_t input_dim = 0;
    std::size_t hidden_width = 0;  // 0 for logistic
    std::size_t num_classes = 2;
    Vec params;

    struct Meta {
        std::size_t epochs = 0;
        double learning_rate = 0.0;
        std::string smoothing_mode;
        std::uint64_t seed = 0;
        Vec loss_curve;
    } training_meta;

    std::size_t param_count() const;

    nlohmann::json to_json() const;
    static ClassifierModel from_json(const nlohmann::json& j);
};

// Minimizes the mean soft-target cross entropy by full-batch gradient
// descent. Targets must be valid distributions over config.num_classes,
// one per record. Deterministic for a fixed seed.
ClassifierModel train_classifier(const Dataset& data, const std::vector<losses::SoftLabel>& targets,
                                 const TrainConfig& config);

Vec predict_proba(const ClassifierModel& model, const Vec& features);

// Activations of the last hidden layer; the logistic architecture has none
// and returns the input features unchanged.
Vec hidden_representation(const ClassifierModel& model, const Vec& features);

// Max relative error between the analytic parameter gradient of the training
// loss and central finite differences with the given step, over every
// parameter coordinate.
double gradient_check(const ClassifierModel& model, const Dataset& batch,
                      const std::vector<losses::SoftLabel>& targets, double step);

}  // namespace csmooth::classifier
