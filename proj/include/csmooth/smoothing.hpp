#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "csmooth/estimators.hpp"
#include "csmooth/linalg.hpp"

namespace csmooth::losses {

enum class SmoothingMode { none, label, causal };

SmoothingMode smoothing_mode_from_string(const std::string& s);
std::string to_string(SmoothingMode m);

// Per-sample target distribution over K classes. For a one-hot source with
// epsilon < (K-1)/K the true class keeps the single entry above 1/K.
struct SoftLabel {
    Vec distribution;
    SmoothingMode source = SmoothingMode::none;
    double epsilon = 0.0;   // the epsilon actually applied to this sample
    bool clamped = false;   // causal only: epsilon hit the [0, epsilon_max] clamp

    bool is_valid(double tol = 1e-9) const;
};

struct SmoothingConfig {
    SmoothingMode mode = SmoothingMode::none;
    double epsilon = 0.1;
    double omega = 0.1;
    double epsilon_max = 0.5;
    std::size_t num_classes = 2;

    void validate() const;
};

// Index partition for the multi-label rank loss.
struct MultiLabelTarget {
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;

    static MultiLabelTarget from_multi_hot(const std::vector<int>& labels);
};

SoftLabel hard_label(std::size_t true_class, std::size_t num_classes);

// p = (1 - eps) y + eps / K, arranged so the common decimal epsilons land
// exactly on their decimal targets.
SoftLabel label_smooth(const Vec& one_hot, double epsilon, std::size_t num_classes);

// Per-sample epsilon_i = clamp(omega * sum_j ATE(t_ij, 0), 0, epsilon_max).
double causal_epsilon(const Vec& treatments, const causal::AteTable& table, double omega,
                      double epsilon_max, bool* clamped = nullptr);

SoftLabel causal_smooth(const Vec& one_hot, double epsilon_i, std::size_t num_classes);

// Zero-bounded log-sum-exp pairwise rank loss:
//   L = log(1 + sum_{i in pos} e^{-x_i}) + log(1 + sum_{j in neg} e^{x_j}),
// computed with max-subtraction so large |logits| cannot overflow.
double zlpr_loss(const Vec& logits, const MultiLabelTarget& target);
Vec zlpr_gradient(const Vec& logits, const MultiLabelTarget& target);

// -sum_k soft_k log(pred_k) with predictions floored at 1e-12.
double soft_cross_entropy(const Vec& predicted_probs, const SoftLabel& soft);
Vec soft_cross_entropy_gradient(const Vec& predicted_probs, const SoftLabel& soft);

}  // namespace csmooth::losses
