#include "csmooth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "csmooth/errors.hpp"

namespace csmooth::metrics {

using nlohmann::json;

json Metrics::to_json() const {
    return json{{"precision", precision},
                {"recall", recall},
                {"f1", f1},
                {"accuracy", accuracy},
                {"counts", {{"tp", counts.tp}, {"fp", counts.fp}, {"tn", counts.tn}, {"fn", counts.fn}}}};
}

Metrics confusion_metrics(const std::vector<int>& predictions, const std::vector<int>& truths,
                          int positive_class) {
    if (predictions.size() != truths.size()) {
        throw DataError("confusion_metrics: predictions and truths differ in length");
    }
    if (predictions.empty()) throw DataError("confusion_metrics: empty input");

    Metrics m;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_pos = predictions[i] == positive_class;
        const bool true_pos = truths[i] == positive_class;
        if (pred_pos && true_pos) ++m.counts.tp;
        else if (pred_pos && !true_pos) ++m.counts.fp;
        else if (!pred_pos && true_pos) ++m.counts.fn;
        else ++m.counts.tn;
    }
    const double tp = static_cast<double>(m.counts.tp);
    const double fp = static_cast<double>(m.counts.fp);
    const double tn = static_cast<double>(m.counts.tn);
    const double fn = static_cast<double>(m.counts.fn);
    m.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.accuracy = (tp + tn) / (tp + fp + tn + fn);
    return m;
}

json DispersionReport::to_json() const {
    json intra = json::object();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        intra[std::to_string(classes[i])] = mean_intra_class_distance[i];
    }
    return json{{"mean_intra_class_distance", intra},
                {"inter_centroid_distance", inter_centroid_distance},
                {"separation_ratio",
                 std::isnan(separation_ratio) ? json(nullptr) : json(separation_ratio)}};
}

DispersionReport dispersion(const std::vector<Vec>& representations, const std::vector<int>& labels) {
    if (representations.size() != labels.size()) {
        throw DataError("dispersion: representations and labels differ in length");
    }
    if (representations.empty()) throw DataError("dispersion: empty input");
    const std::size_t dim = representations[0].size();
    for (const Vec& r : representations) {
        if (r.size() != dim) throw DataError("dispersion: inconsistent representation dimensions");
    }

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    if (by_class.size() < 2) throw DataError("dispersion: need at least two classes");
    for (const auto& [cls, idx] : by_class) {
        if (idx.size() < 2) {
            throw DataError("dispersion: class " + std::to_string(cls) + " has fewer than 2 points");
        }
    }

    DispersionReport rep;
    std::vector<Vec> centroids;
    for (const auto& [cls, idx] : by_class) {
        Vec c(dim, 0.0);
        for (std::size_t i : idx) {
            for (std::size_t d = 0; d < dim; ++d) c[d] += representations[i][d];
        }
        for (double& v : c) v /= static_cast<double>(idx.size());

        double mean_dist = 0.0;
        for (std::size_t i : idx) {
            double sq = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = representations[i][d] - c[d];
                sq += diff * diff;
            }
            mean_dist += std::sqrt(sq);
        }
        mean_dist /= static_cast<double>(idx.size());

        rep.classes.push_back(cls);
        rep.mean_intra_class_distance.push_back(mean_dist);
        centroids.push_back(std::move(c));
    }

    double inter = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        for (std::size_t j = i + 1; j < centroids.size(); ++j) {
            double sq = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = centroids[i][d] - centroids[j][d];
                sq += diff * diff;
            }
            inter += std::sqrt(sq);
            ++pairs;
        }
    }
    rep.inter_centroid_distance = inter / static_cast<double>(pairs);

    const double mean_intra =
        mean(rep.mean_intra_class_distance);
    rep.separation_ratio = mean_intra > 0.0 ? rep.inter_centroid_distance / mean_intra
                                            : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

}  // namespace csmooth::metrics
