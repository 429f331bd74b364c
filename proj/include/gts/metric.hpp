#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace gts {

using FrameIndex = std::int64_t;

/// Half-open frame range [start, end).
struct Interval {
    FrameIndex start = 0;
    FrameIndex end = 0;

    FrameIndex length() const noexcept { return end - start; }
    bool contains(FrameIndex f) const noexcept { return f >= start && f < end; }
    bool valid() const noexcept { return start >= 0 && start < end; }
    bool valid_within(FrameIndex duration) const noexcept { return valid() && end <= duration; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Judge scores for the four understanding aspects, each in [1, 10].
struct AspectScores {
    int subject = 1;
    int scene = 1;
    int course_of_events = 1;
    int impact = 1;

    bool valid() const noexcept;
    friend bool operator==(const AspectScores&, const AspectScores&) = default;
};

struct MetricScores {
    double au_score = 1.0;
    double iou = 0.0;
    double f_iou = 0.5;
    double gamma = 1.0;
    double grounding_factor = 0.5;
    double jeaug = 0.5;
    std::optional<double> qa_accuracy;

    friend bool operator==(const MetricScores&, const MetricScores&) = default;
};

namespace metric {

double interval_iou(const Interval& a, const Interval& b);

/// IoU of a prediction against the union of annotated intervals, counted as
/// frame sets. Overlapping annotations are merged first.
double iou_against_union(const Interval& predicted, std::span<const Interval> ground_truth);

/// Stepwise grounding score: (0.63/ln10) ln(0.7 min(floor(10 iou), 7) + 1) + 0.5.
/// Throws DomainError outside [0, 1].
double f_iou(double iou);

/// Plateau value reached at IoU >= 0.7.
double f_iou_max();

/// Video length factor 1 + 0.25 (1 - e^{-(T/100)^3}) sigmoid(0.03 (T - 100)).
/// Always in [1, 1.25).
double gamma(FrameIndex duration_frames);

/// Joint score min(gamma F(IoU), 1) * au. Throws DomainError for au outside
/// [1, 10] or iou outside [0, 1].
MetricScores jeaug(double au_score, double iou, FrameIndex duration_frames);

double aggregate_au(const AspectScores& aspects);

/// Fraction of (chosen, answer) pairs that match. Throws UndefinedMetricError
/// on an empty list.
double qa_accuracy(std::span<const std::pair<int, int>> answers);

/// Population standard deviation over mean, times 100.
double coefficient_of_variation(std::span<const double> per_subset_scores);

/// First standalone option letter A-E (case-insensitive) in a free-text
/// reply, as a zero-based index. Letters glued to other alphanumerics do not
/// count.
std::optional<int> extract_option_letter(std::string_view reply);

}  // namespace metric
}  // namespace gts
