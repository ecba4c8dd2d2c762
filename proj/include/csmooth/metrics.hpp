#pragma once

#include <vector>

#include <json.hpp>

#include "csmooth/linalg.hpp"

namespace csmooth::metrics {

struct Counts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Binary confusion metrics for a declared positive class. F1 is 0 when
// precision + recall is 0 (the fixtures hit that case).
struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    Counts counts;

    nlohmann::json to_json() const;
};

Metrics confusion_metrics(const std::vector<int>& predictions, const std::vector<int>& truths,
                          int positive_class);

// Centroid geometry of a labelled point cloud: per-class mean distance to the
// class centroid, distance between centroids (mean over pairs when more than
// two classes), and their ratio. The ratio is NaN when the mean intra-class
// distance is zero.
struct DispersionReport {
    std::vector<int> classes;
    Vec mean_intra_class_distance;  // parallel to classes
    double inter_centroid_distance = 0.0;
    double separation_ratio = 0.0;

    nlohmann::json to_json() const;
};

DispersionReport dispersion(const std::vector<Vec>& representations, const std::vector<int>& labels);

}  // namespace csmooth::metrics
