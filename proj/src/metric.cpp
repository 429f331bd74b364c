#include "gts/metric.hpp"

#include "gts/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

namespace gts {

bool AspectScores::valid() const noexcept {
    auto ok = [](int s) { return s >= 1 && s <= 10; };
    return ok(subject) && ok(scene) && ok(course_of_events) && ok(impact);
}

namespace metric {

double interval_iou(const Interval& a, const Interval& b) {
    const FrameIndex inter = std::max<FrameIndex>(0, std::min(a.end, b.end) - std::max(a.start, b.start));
    const FrameIndex uni = a.length() + b.length() - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_against_union(const Interval& predicted, std::span<const Interval> ground_truth) {
    std::vector<Interval> merged(ground_truth.begin(), ground_truth.end());
    std::sort(merged.begin(), merged.end(),
              [](const Interval& x, const Interval& y) { return x.start < y.start; });
    std::vector<Interval> runs;
    for (const auto& iv : merged) {
        if (!runs.empty() && iv.start <= runs.back().end)
            runs.back().end = std::max(runs.back().end, iv.end);
        else
            runs.push_back(iv);
    }

    FrameIndex inter = 0;
    FrameIndex gt_total = 0;
    for (const auto& r : runs) {
        gt_total += r.length();
        inter += std::max<FrameIndex>(0, std::min(r.end, predicted.end) - std::max(r.start, predicted.start));
    }
    const FrameIndex uni = predicted.length() + gt_total - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double f_iou(double iou) {
    if (!(iou >= 0.0 && iou <= 1.0))
        throw DomainError("f_iou: IoU must lie in [0, 1], got " + std::to_string(iou));
    const double step = std::min(std::floor(10.0 * iou), 7.0);
    return 0.63 / std::numbers::ln10 * std::log(0.7 * step + 1.0) + 0.5;
}

double f_iou_max() { return f_iou(0.7); }

double gamma(FrameIndex duration_frames) {
    if (duration_frames < 0)
        throw DomainError("gamma: duration must be non-negative");
    const double t = static_cast<double>(duration_frames);
    const double ramp = -std::expm1(-std::pow(t / 100.0, 3.0));
    const double sigmoid = 1.0 / (1.0 + std::exp(-0.03 * (t - 100.0)));
    const double g = 1.0 + 0.25 * ramp * sigmoid;
    // The supremum 1.25 is never attained, but rounds to it for long videos.
    return std::min(g, std::nextafter(1.25, 0.0));
}

MetricScores jeaug(double au_score, double iou, FrameIndex duration_frames) {
    if (!(au_score >= 1.0 && au_score <= 10.0))
        throw DomainError("jeaug: A.U. score must lie in [1, 10], got " + std::to_string(au_score));
    MetricScores s;
    s.au_score = au_score;
    s.iou = iou;
    s.f_iou = f_iou(iou);
    s.gamma = gamma(duration_frames);
    s.grounding_factor = std::min(s.gamma * s.f_iou, 1.0);
    s.jeaug = s.grounding_factor * au_score;
    return s;
}

double aggregate_au(const AspectScores& aspects) {
    if (!aspects.valid())
        throw DomainError("aggregate_au: aspect scores must be integers in [1, 10]");
    return (aspects.subject + aspects.scene + aspects.course_of_events + aspects.impact) / 4.0;
}

double qa_accuracy(std::span<const std::pair<int, int>> answers) {
    if (answers.empty())
        throw UndefinedMetricError("qa_accuracy: no answered questions");
    const auto hits = std::count_if(answers.begin(), answers.end(),
                                    [](const auto& p) { return p.first == p.second; });
    return static_cast<double>(hits) / static_cast<double>(answers.size());
}

double coefficient_of_variation(std::span<const double> xs) {
    if (xs.size() < 2)
        throw DomainError("coefficient_of_variation: need at least two subsets");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (mean == 0.0)
        throw UndefinedMetricError("coefficient_of_variation: mean is zero");
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size()));
    return sd / mean * 100.0;
}

std::optional<int> extract_option_letter(std::string_view reply) {
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    for (std::size_t i = 0; i < reply.size(); ++i) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(reply[i])));
        if (c < 'A' || c > 'E') continue;
        const bool left_ok = i == 0 || !is_word(reply[i - 1]);
        const bool right_ok = i + 1 == reply.size() || !is_word(reply[i + 1]);
        if (left_ok && right_ok) return c - 'A';
    }
    return std::nullopt;
}

}  // namespace metric
}  // namespace gts
