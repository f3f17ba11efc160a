#pragma once

#include <optional>
#include <vector>

#include "miptrace/projection.hpp"

namespace miptrace {

/// Overlap and boundary scores for one mask pair. Hausdorff is in pixel
/// units and undefined (nullopt) when exactly one mask is empty.
struct SegScores {
    double dice = 0.0;
    double iou = 0.0;
    std::optional<double> hausdorff;
};

struct ConfusionCounts {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Classification metrics; precision/recall/f1 are nullopt when their
/// denominators vanish.
struct ClassificationScores {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

/// Mean and population standard deviation (divisor n).
struct AggregateScore {
    double mean = 0.0;
    double std_dev = 0.0;
    size_t n = 0;
};

/// 2|A∩B| / (|A|+|B|); 1.0 when both masks are empty.
double dice(const MipImage& a, const MipImage& b);

/// |A∩B| / |A∪B|; 1.0 when both masks are empty.
double iou(const MipImage& a, const MipImage& b);

/// Classic symmetric Hausdorff distance over foreground pixel sets with
/// Euclidean distances in pixel units. Both empty -> 0; exactly one empty ->
/// undefined. Uses an exact integer distance transform for large masks and
/// a direct double loop for small ones; the two agree exactly.
std::optional<double> hausdorff(const MipImage& a, const MipImage& b);

SegScores segmentation_scores(const MipImage& a, const MipImage& b);

ClassificationScores classification_metrics(const ConfusionCounts& c);

AggregateScore aggregate(const std::vector<double>& values);

namespace detail {
// Both routes are exposed so tests can pin them against each other across
// the dispatch boundary. Preconditions as hausdorff(); both masks non-empty.
double hausdorff_brute(const MipImage& a, const MipImage& b);
double hausdorff_edt(const MipImage& a, const MipImage& b);
}  // namespace detail

}  // namespace miptrace
