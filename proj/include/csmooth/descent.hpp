#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "csmooth/errors.hpp"
#include "csmooth/linalg.hpp"

namespace csmooth {

struct DescentResult {
    Vec loss_curve;        // one entry per epoch, loss after that epoch's update
    double final_loss = 0.0;
};

// Full-batch gradient descent over a flat parameter vector with
// halve-on-increase backoff: a step that raises the loss (beyond 1e-9) is
// retried at half the rate, so the recorded curve is non-increasing. The
// reduced rate persists across epochs. Loss or gradient turning non-finite
// is a training error.
inline DescentResult gradient_descent(Vec& params, std::size_t epochs, double learning_rate,
                                      const std::function<double(const Vec&)>& loss_fn,
                                      const std::function<Vec(const Vec&)>& grad_fn) {
    if (epochs < 1) throw ConfigError("training: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("training: learning rate must be > 0");

    DescentResult result;
    result.loss_curve.reserve(epochs);

    double loss = loss_fn(params);
    if (!std::isfinite(loss)) throw TrainingError("training diverged: initial loss is non-finite");

    double lr = learning_rate;
    Vec trial(params.size());
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const Vec grad = grad_fn(params);
        for (double g : grad) {
            if (!std::isfinite(g)) throw TrainingError("training diverged: non-finite gradient");
        }

        double trial_loss = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t i = 0; i < params.size(); ++i) trial[i] = params[i] - lr * grad[i];
            trial_loss = loss_fn(trial);
            if (std::isfinite(trial_loss) && trial_loss <= loss + 1e-9) {
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if (accepted) {
            params.swap(trial);
            loss = trial_loss;
        }
        // else: rate exhausted, keep the current point; the curve stays flat
        result.loss_curve.push_back(loss);
    }
    result.final_loss = loss;
    return result;
}

}  // namespace csmooth
