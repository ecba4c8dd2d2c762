#include "csmooth/smoothing.hpp"

#include <algorithm>
#include <cmath>

#include "csmooth/errors.hpp"

namespace csmooth::losses {

SmoothingMode smoothing_mode_from_string(const std::string& s) {
    if (s == "none" || s == "hard") return SmoothingMode::none;
    if (s == "label") return SmoothingMode::label;
    if (s == "causal") return SmoothingMode::causal;
    throw ConfigError("unknown smoothing mode '" + s + "'");
}

std::string to_string(SmoothingMode m) {
    switch (m) {
        case SmoothingMode::none: return "none";
        case SmoothingMode::label: return "label";
        case SmoothingMode::causal: return "causal";
    }
    return "unknown";
}

bool SoftLabel::is_valid(double tol) const {
    double sum = 0.0;
    for (double p : distribution) {
        if (!(p >= 0.0) || p > 1.0) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

void SmoothingConfig::validate() const {
    if (!(epsilon >= 0.0) || epsilon >= 1.0) throw ConfigError("smoothing: epsilon must lie in [0, 1)");
    if (!(omega >= 0.0)) throw ConfigError("smoothing: omega must be >= 0");
    if (!(epsilon_max > 0.0) || epsilon_max > 0.5) throw ConfigError("smoothing: epsilon_max must lie in (0, 0.5]");
    if (num_classes < 2) throw ConfigError("smoothing: num_classes must be >= 2");
}

MultiLabelTarget MultiLabelTarget::from_multi_hot(const std::vector<int>& labels) {
    MultiLabelTarget t;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) t.positives.push_back(i);
        else if (labels[i] == 0) t.negatives.push_back(i);
        else throw DataError("multi-hot labels must contain only 0 or 1");
    }
    return t;
}

namespace {

std::size_t one_hot_index(const Vec& one_hot, std::size_t num_classes) {
    if (one_hot.size() != num_classes) throw DataError("label vector length does not match num_classes");
    std::size_t hits = 0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < one_hot.size(); ++k) {
        if (one_hot[k] == 1.0) { ++hits; idx = k; }
        else if (one_hot[k] != 0.0) throw DataError("label vector is not one-hot");
    }
    if (hits != 1) throw DataError("label vector is not one-hot");
    return idx;
}

SoftLabel smooth_one_hot(const Vec& one_hot, double eps, std::size_t num_classes, SmoothingMode source) {
    if (!(eps >= 0.0) || eps >= 1.0) throw DataError("smoothing epsilon must lie in [0, 1)");
    const std::size_t idx = one_hot_index(one_hot, num_classes);
    const double off = eps / static_cast<double>(num_classes);
    const double on = 1.0 - (eps - off);  // this ordering keeps decimal eps exact
    SoftLabel out;
    out.distribution.assign(num_classes, off);
    out.distribution[idx] = on;
    out.source = source;
    out.epsilon = eps;
    return out;
}

// log(1 + sum_k e^{a_k}) via log-sum-exp over {0} and the a_k.
double log1p_sum_exp(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, x);
    double s = std::exp(-m);
    for (double x : a) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

SoftLabel hard_label(std::size_t true_class, std::size_t num_classes) {
    if (true_class >= num_classes) throw DataError("class index out of range");
    SoftLabel out;
    out.distribution.assign(num_classes, 0.0);
    out.distribution[true_class] = 1.0;
    out.source = SmoothingMode::none;
    return out;
}

SoftLabel label_smooth(const Vec& one_hot, double epsilon, std::size_t num_classes) {
    return smooth_one_hot(one_hot, epsilon, num_classes, SmoothingMode::label);
}

double causal_epsilon(const Vec& treatments, const causal::AteTable& table, double omega,
                      double epsilon_max, bool* clamped) {
    if (!(omega >= 0.0)) throw ConfigError("causal_epsilon: omega must be >= 0");
    if (!(epsilon_max > 0.0)) throw ConfigError("causal_epsilon: epsilon_max must be > 0");
    double sum = 0.0;
    for (std::size_t j = 0; j < treatments.size(); ++j) {
        sum += table.lookup(j, treatments[j]);  // LookupError propagates
    }
    const double raw = omega * sum;
    const double eps = std::clamp(raw, 0.0, epsilon_max);
    if (clamped) *clamped = eps != raw;
    return eps;
}

SoftLabel causal_smooth(const Vec& one_hot, double epsilon_i, std::size_t num_classes) {
    SoftLabel out = smooth_one_hot(one_hot, epsilon_i, num_classes, SmoothingMode::causal);
    return out;
}

double zlpr_loss(const Vec& logits, const MultiLabelTarget& target) {
    for (double x : logits) {
        if (!std::isfinite(x)) throw NumericError("zlpr_loss: non-finite logit");
    }
    Vec pos_terms, neg_terms;
    pos_terms.reserve(target.positives.size());
    neg_terms.reserve(target.negatives.size());
    for (std::size_t i : target.positives) pos_terms.push_back(-logits.at(i));
    for (std::size_t j : target.negatives) neg_terms.push_back(logits.at(j));
    return log1p_sum_exp(pos_terms) + log1p_sum_exp(neg_terms);
}

Vec zlpr_gradient(const Vec& logits, const MultiLabelTarget& target) {
    for (double x : logits) {
        if (!std::isfinite(x)) throw NumericError("zlpr_gradient: non-finite logit");
    }
    Vec grad(logits.size(), 0.0);

    Vec pos_terms, neg_terms;
    for (std::size_t i : target.positives) pos_terms.push_back(-logits.at(i));
    for (std::size_t j : target.negatives) neg_terms.push_back(logits.at(j));
    const double lse_pos = log1p_sum_exp(pos_terms);
    const double lse_neg = log1p_sum_exp(neg_terms);

    // d/dx_i log(1 + sum e^{-x}) = -e^{-x_i} / (1 + sum e^{-x}) = -e^{-x_i - lse}
    for (std::size_t i : target.positives) grad[i] = -std::exp(-logits[i] - lse_pos);
    for (std::size_t j : target.negatives) grad[j] = std::exp(logits[j] - lse_neg);
    return grad;
}

double soft_cross_entropy(const Vec& predicted_probs, const SoftLabel& soft) {
    if (predicted_probs.size() != soft.distribution.size()) {
        throw DataError("soft_cross_entropy: dimension mismatch");
    }
    double loss = 0.0;
    for (std::size_t k = 0; k < predicted_probs.size(); ++k) {
        const double p = std::max(predicted_probs[k], 1e-12);
        loss -= soft.distribution[k] * std::log(p);
    }
    return loss;
}

Vec soft_cross_entropy_gradient(const Vec& predicted_probs, const SoftLabel& soft) {
    if (predicted_probs.size() != soft.distribution.size()) {
        throw DataError("soft_cross_entropy: dimension mismatch");
    }
    Vec grad(predicted_probs.size());
    for (std::size_t k = 0; k < predicted_probs.size(); ++k) {
        const double p = std::max(predicted_probs[k], 1e-12);
        grad[k] = -soft.distribution[k] / p;
    }
    return grad;
}

}  // namespace csmooth::losses
