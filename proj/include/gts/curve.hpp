#pragma once

#include "gts/embedding.hpp"
#include "gts/metric.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gts {

enum class CurveKind { static_branch, dynamic_branch, fused };

/// Per-frame (or per-clip, before resampling) anomaly relevance scores.
struct SimilarityCurve {
    std::vector<double> values;
    CurveKind kind = CurveKind::fused;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }

    friend bool operator==(const SimilarityCurve&, const SimilarityCurve&) = default;
};

struct FusionConfig {
    double alpha = 0.4;    // static-branch weight
    int half_window = 4;   // Savitzky-Golay window is 2h+1
    int poly_order = 2;

    void validate() const;
    /// Copy with the window shrunk to fit a curve of `length` samples.
    FusionConfig fitted_to(std::size_t length) const;
};

struct PeakConfig {
    double min_distance = 1.0;                     // theta, frames; kept peaks are > theta apart
    std::optional<double> magnitude_threshold;     // tau; empty = mean of detected peaks
    int top_k = 5;

    static constexpr int max_top_k = 7;
    static constexpr double default_distance_fraction = 1.0 / 12.0;

    void validate() const;
    /// Defaults with theta = T / 12.
    static PeakConfig for_duration(FrameIndex duration_frames);
};

struct WindowConfig {
    double beta = 1.0 / 20.0;  // half-window as a fraction of T

    void validate() const;
};

/// High/low anomaly-probability partition of [0, T).
struct SegmentSet {
    std::vector<Interval> high;
    std::vector<Interval> low;
    std::vector<FrameIndex> peaks;

    /// All segments in temporal order with their class (true = high).
    std::vector<std::pair<Interval, bool>> ordered() const;

    friend bool operator==(const SegmentSet&, const SegmentSet&) = default;
};

namespace curve {

/// softmax over time of the mean cosine similarity between each text row and
/// each time row. Throws DomainError on an empty text matrix and ShapeError
/// on mismatched dimensions.
SimilarityCurve branch_curve(const EmbeddingMatrix& text, const EmbeddingMatrix& time,
                             CurveKind kind);

/// Numerically shifted softmax; the shift cancels exactly whenever
/// `x - max(x)` is exact.
std::vector<double> softmax(std::span<const double> scores);

/// Centre-point least-squares smoothing weights for a window of 2h+1.
std::vector<double> savgol_coefficients(int half_window, int poly_order);

/// Savitzky-Golay smoothing with mirror padding (x[-k] = x[k]).
std::vector<double> savgol_filter(std::span<const double> x, int half_window, int poly_order);

/// alpha * static + (1 - alpha) * dynamic, then Savitzky-Golay.
SimilarityCurve fuse_and_smooth(const SimilarityCurve& s_static, const SimilarityCurve& s_dynamic,
                                const FusionConfig& cfg);

/// Step-interpolates a per-clip curve to frame resolution (frame t takes the
/// value of the last clip starting at or before t) and renormalizes to sum 1.
SimilarityCurve resample_clips_to_frames(const SimilarityCurve& clip_curve,
                                         std::span<const FrameIndex> clip_starts,
                                         FrameIndex duration_frames);

/// Indices with S(t-1) < S(t) >= S(t+1), out-of-range neighbours at -inf.
std::vector<FrameIndex> detect_peaks(const SimilarityCurve& curve);

/// Magnitude filter then the best-scoring subset of at most K peaks whose
/// pairwise distances all exceed theta. Sorted by frame index.
std::vector<FrameIndex> screen_peaks(std::span<const FrameIndex> peaks, const SimilarityCurve& curve,
                                     const PeakConfig& cfg);

/// Windows [p - beta T, p + beta T] (inclusive, clipped) merged into high
/// segments; low is the complement. No peaks -> the whole video is high.
SegmentSet partition_windows(std::span<const FrameIndex> selected, FrameIndex duration_frames,
                             const WindowConfig& cfg);

/// Frames where the normalized cumulative mass first reaches i/n,
/// i = 1..n. Nondecreasing, may repeat. Zero mass falls back to uniform.
std::vector<FrameIndex> integral_sample(const SimilarityCurve& curve, const Interval& segment, int n);

/// Bin midpoints of n equal bins over the segment.
std::vector<FrameIndex> uniform_sample(const Interval& segment, int n);

/// Deduplicates a sample and tops it up with uniform frames to
/// min(n, segment length) distinct sorted frames.
std::vector<FrameIndex> distinct_frames(std::vector<FrameIndex> sample, const Interval& segment, int n);

}  // namespace curve
}  // namespace gts
