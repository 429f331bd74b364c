#include "gts/curve.hpp"

#include "gts/curve_kernels.hpp"
#include "gts/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gts {

std::vector<std::pair<Interval, bool>> SegmentSet::ordered() const {
    std::vector<std::pair<Interval, bool>> out;
    out.reserve(high.size() + low.size());
    for (const auto& iv : high) out.emplace_back(iv, true);
    for (const auto& iv : low) out.emplace_back(iv, false);
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first.start < b.first.start; });
    return out;
}

void FusionConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError("fusion: alpha must lie in [0, 1]");
    if (half_window < 0)
        throw ConfigError("fusion: half window must be non-negative");
    if (poly_order < 0 || poly_order >= 2 * half_window + 1)
        throw ConfigError("fusion: polynomial order must be below the window length");
}

FusionConfig FusionConfig::fitted_to(std::size_t length) const {
    FusionConfig out = *this;
    const int max_h = length == 0 ? 0 : static_cast<int>((length - 1) / 2);
    out.half_window = std::min(half_window, max_h);
    out.poly_order = std::min(poly_order, 2 * out.half_window);
    return out;
}

void PeakConfig::validate() const {
    if (!(min_distance >= 0.0) || !std::isfinite(min_distance))
        throw ConfigError("peaks: min distance must be finite and non-negative");
    if (top_k < 1 || top_k > max_top_k)
        throw ConfigError("peaks: top_k must lie in [1, " + std::to_string(max_top_k) + "]");
    if (magnitude_threshold && !std::isfinite(*magnitude_threshold))
        throw ConfigError("peaks: magnitude threshold must be finite");
}

PeakConfig PeakConfig::for_duration(FrameIndex duration_frames) {
    PeakConfig cfg;
    cfg.min_distance = static_cast<double>(duration_frames) * default_distance_fraction;
    return cfg;
}

void WindowConfig::validate() const {
    if (!(beta > 0.0 && beta < 1.0))
        throw ConfigError("window: beta must lie in (0, 1)");
}

namespace curve {

std::vector<double> softmax(std::span<const double> scores) {
    if (scores.empty()) return {};
    const double shift = *std::max_element(scores.begin(), scores.end());
    std::vector<double> e = kernels::shifted_exp(scores, shift);
    double total = 0.0;
    for (double v : e) total += v;
    for (double& v : e) v /= total;
    return e;
}

SimilarityCurve branch_curve(const EmbeddingMatrix& text, const EmbeddingMatrix& time, CurveKind kind) {
    if (text.rows == 0)
        throw DomainError("branch_curve: no prompt embeddings");
    if (time.rows == 0)
        throw DomainError("branch_curve: no frame or clip embeddings");
    if (text.dim != time.dim)
        throw ShapeError("branch_curve: prompt dim " + std::to_string(text.dim) +
                         " != visual dim " + std::to_string(time.dim));
    text.check_shape();
    time.check_shape();
    const auto means = kernels::mean_similarity(text, time);
    return {softmax(means), kind};
}

namespace {

// Solves a small dense system with partial pivoting.
std::vector<long double> solve(std::vector<std::vector<long double>> a, std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (a[col][col] == 0.0L) throw ConfigError("savgol: singular normal equations");
        for (std::size_t r = col + 1; r < n; ++r) {
            const long double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = acc / a[i][i];
    }
    return x;
}

}  // namespace

std::vector<double> savgol_coefficients(int half_window, int poly_order) {
    if (half_window < 0 || poly_order < 0 || poly_order >= 2 * half_window + 1)
        throw ConfigError("savgol: need 0 <= order < 2h+1");
    const int terms = poly_order + 1;

    // Normal equations G y = e0 with G[j][k] = sum_i i^(j+k); the centre
    // weight for offset i is then sum_j i^j y_j.
    std::vector<long double> power_sums(2 * poly_order + 1, 0.0L);
    for (int i = -half_window; i <= half_window; ++i) {
        long double p = 1.0L;
        for (auto& s : power_sums) {
            s += p;
            p *= i;
        }
    }
    std::vector<std::vector<long double>> gram(terms, std::vector<long double>(terms));
    for (int j = 0; j < terms; ++j)
        for (int k = 0; k < terms; ++k) gram[j][k] = power_sums[j + k];
    std::vector<long double> rhs(terms, 0.0L);
    rhs[0] = 1.0L;
    const auto y = solve(std::move(gram), std::move(rhs));

    std::vector<double> weights;
    weights.reserve(2 * half_window + 1);
    for (int i = -half_window; i <= half_window; ++i) {
        long double w = 0.0L;
        long double p = 1.0L;
        for (int j = 0; j < terms; ++j) {
            w += p * y[j];
            p *= i;
        }
        weights.push_back(static_cast<double>(w));
    }
    return weights;
}

std::vector<double> savgol_filter(std::span<const double> x, int half_window, int poly_order) {
    if (x.empty()) return {};
    if (2 * static_cast<std::size_t>(half_window) + 1 > x.size())
        throw ConfigError("savgol: window of " + std::to_string(2 * half_window + 1) +
                          " exceeds curve length " + std::to_string(x.size()));
    const auto weights = savgol_coefficients(half_window, poly_order);
    return kernels::savgol_convolve(x, weights);
}

SimilarityCurve fuse_and_smooth(const SimilarityCurve& s_static, const SimilarityCurve& s_dynamic,
                                const FusionConfig& cfg) {
    cfg.validate();
    if (s_static.size() != s_dynamic.size())
        throw ShapeError("fuse_and_smooth: branch lengths differ (" + std::to_string(s_static.size()) +
                         " vs " + std::to_string(s_dynamic.size()) + ")");
    if (s_static.size() == 0)
        throw ShapeError("fuse_and_smooth: empty curves");
    std::vector<double> mixed(s_static.size());
    for (std::size_t t = 0; t < mixed.size(); ++t)
        mixed[t] = cfg.alpha * s_static[t] + (1.0 - cfg.alpha) * s_dynamic[t];
    return {savgol_filter(mixed, cfg.half_window, cfg.poly_order), CurveKind::fused};
}

SimilarityCurve resample_clips_to_frames(const SimilarityCurve& clip_curve,
                                         std::span<const FrameIndex> clip_starts,
                                         FrameIndex duration_frames) {
    if (clip_curve.size() == 0 || clip_curve.size() != clip_starts.size())
        throw ShapeError("resample: clip curve and clip starts disagree");
    if (duration_frames < 1)
        throw DomainError("resample: duration must be positive");
    if (!std::is_sorted(clip_starts.begin(), clip_starts.end()))
        throw ShapeError("resample: clip starts must be ascending");

    std::vector<double> out(static_cast<std::size_t>(duration_frames));
    std::size_t clip = 0;
    for (FrameIndex t = 0; t < duration_frames; ++t) {
        while (clip + 1 < clip_starts.size() && clip_starts[clip + 1] <= t) ++clip;
        out[static_cast<std::size_t>(t)] = clip_curve[clip];
    }
    double total = 0.0;
    for (double v : out) total += v;
    if (total > 0.0)
        for (double& v : out) v /= total;
    return {std::move(out), CurveKind::dynamic_branch};
}

std::vector<FrameIndex> detect_peaks(const SimilarityCurve& curve) {
    constexpr double lowest = -std::numeric_limits<double>::infinity();
    const std::size_t n = curve.size();
    std::vector<FrameIndex> peaks;
    for (std::size_t t = 0; t < n; ++t) {
        const double left = t == 0 ? lowest : curve[t - 1];
        const double right = t + 1 == n ? lowest : curve[t + 1];
        if (left < curve[t] && curve[t] >= right) peaks.push_back(static_cast<FrameIndex>(t));
    }
    return peaks;
}

namespace {

struct Choice {
    double total = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> members;  // ascending positions in the eligible list

    bool empty() const { return members.empty(); }
};

// Higher total wins; equal totals prefer the lexicographically earlier set.
bool better(const Choice& a, const Choice& b) {
    if (a.empty()) return false;
    if (b.empty()) return true;
    if (a.total != b.total) return a.total > b.total;
    return std::lexicographical_compare(a.members.begin(), a.members.end(),
                                        b.members.begin(), b.members.end());
}

}  // namespace

std::vector<FrameIndex> screen_peaks(std::span<const FrameIndex> peaks, const SimilarityCurve& curve,
                                     const PeakConfig& cfg) {
    cfg.validate();
    if (peaks.empty()) return {};
    for (FrameIndex p : peaks)
        if (p < 0 || static_cast<std::size_t>(p) >= curve.size())
            throw DomainError("screen_peaks: peak index outside the curve");
    if (!std::is_sorted(peaks.begin(), peaks.end()))
        throw DomainError("screen_peaks: peaks must be sorted");

    double tau = 0.0;
    if (cfg.magnitude_threshold) {
        tau = *cfg.magnitude_threshold;
    } else {
        for (FrameIndex p : peaks) tau += curve[static_cast<std::size_t>(p)];
        tau /= static_cast<double>(peaks.size());
    }

    std::vector<FrameIndex> eligible;
    std::vector<double> score;
    for (FrameIndex p : peaks) {
        const double s = curve[static_cast<std::size_t>(p)];
        if (s >= tau) {
            eligible.push_back(p);
            score.push_back(s);
        }
    }
    const std::size_t m = eligible.size();
    if (m == 0) return {};

    // Sorted positions make the pairwise distance rule a consecutive one, so
    // a set of size k ending at i extends the best size-(k-1) set among the
    // peaks lying more than theta before i.
    const auto k_max = static_cast<std::size_t>(cfg.top_k);
    // prefix[k][i]: best set of size k+1 using eligible[0..i]
    std::vector<std::vector<Choice>> prefix(k_max, std::vector<Choice>(m));
    Choice overall;
    for (std::size_t i = 0; i < m; ++i) {
        // last j with eligible[i] - eligible[j] > theta
        std::ptrdiff_t cutoff = -1;
        {
            std::size_t lo = 0, hi = i;
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (static_cast<double>(eligible[i] - eligible[mid]) > cfg.min_distance)
                    lo = mid + 1;
                else
                    hi = mid;
            }
            cutoff = static_cast<std::ptrdiff_t>(lo) - 1;
        }
        for (std::size_t k = 0; k < k_max; ++k) {
            Choice ending;
            if (k == 0) {
                ending.total = score[i];
                ending.members = {i};
            } else if (cutoff >= 0 && !prefix[k - 1][static_cast<std::size_t>(cutoff)].empty()) {
                const Choice& base = prefix[k - 1][static_cast<std::size_t>(cutoff)];
                ending.total = base.total + score[i];
                ending.members = base.members;
                ending.members.push_back(i);
            }
            Choice& slot = prefix[k][i];
            slot = (i > 0 && !better(ending, prefix[k][i - 1])) ? prefix[k][i - 1] : std::move(ending);
            if (better(slot, overall)) overall = slot;
        }
    }

    std::vector<FrameIndex> out;
    for (std::size_t pos : overall.members) out.push_back(eligible[pos]);
    return out;
}

SegmentSet partition_windows(std::span<const FrameIndex> selected, FrameIndex duration_frames,
                             const WindowConfig& cfg) {
    cfg.validate();
    if (duration_frames < 1)
        throw DomainError("partition_windows: duration must be positive");
    SegmentSet out;
    out.peaks.assign(selected.begin(), selected.end());
    std::sort(out.peaks.begin(), out.peaks.end());
    if (selected.empty()) {
        out.high.push_back({0, duration_frames});
        return out;
    }

    // Inclusive window bounds, with slack for beta*T landing a hair off an
    // integer.
    constexpr double slack = 1e-9;
    const double half = cfg.beta * static_cast<double>(duration_frames);
    std::vector<Interval> windows;
    for (FrameIndex p : out.peaks) {
        if (p < 0 || p >= duration_frames)
            throw DomainError("partition_windows: peak " + std::to_string(p) + " outside [0, T)");
        const auto lo = static_cast<FrameIndex>(std::ceil(static_cast<double>(p) - half - slack));
        const auto hi = static_cast<FrameIndex>(std::floor(static_cast<double>(p) + half + slack));
        windows.push_back({std::max<FrameIndex>(0, lo), std::min(duration_frames, hi + 1)});
    }
    for (const auto& w : windows) {
        if (!out.high.empty() && w.start <= out.high.back().end)
            out.high.back().end = std::max(out.high.back().end, w.end);
        else
            out.high.push_back(w);
    }

    FrameIndex cursor = 0;
    for (const auto& h : out.high) {
        if (h.start > cursor) out.low.push_back({cursor, h.start});
        cursor = h.end;
    }
    if (cursor < duration_frames) out.low.push_back({cursor, duration_frames});
    return out;
}

std::vector<FrameIndex> uniform_sample(const Interval& segment, int n) {
    if (n < 1) throw DomainError("uniform_sample: n must be positive");
    if (!segment.valid()) throw DomainError("uniform_sample: invalid segment");
    const FrameIndex len = segment.length();
    std::vector<FrameIndex> out;
    out.reserve(static_cast<std::size_t>(n));
    for (FrameIndex i = 0; i < n; ++i) out.push_back(segment.start + ((2 * i + 1) * len) / (2 * n));
    return out;
}

std::vector<FrameIndex> integral_sample(const SimilarityCurve& curve, const Interval& segment, int n) {
    if (n < 1) throw DomainError("integral_sample: n must be positive");
    if (!segment.valid() || static_cast<std::size_t>(segment.end) > curve.size())
        throw DomainError("integral_sample: segment outside the curve");

    const auto len = static_cast<std::size_t>(segment.length());
    std::vector<long double> cumulative(len);
    long double running = 0.0L;
    for (std::size_t i = 0; i < len; ++i) {
        const double v = curve[static_cast<std::size_t>(segment.start) + i];
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("integral_sample: curve mass must be finite and non-negative");
        running += v;
        cumulative[i] = running;
    }
    const long double total = running;
    if (total == 0.0L) return uniform_sample(segment, n);

    // Relative slack keeps exact quantile hits (uniform mass) on the
    // crossing frame despite summation rounding.
    const long double slack = 1e-12L * total;
    std::vector<FrameIndex> out;
    out.reserve(static_cast<std::size_t>(n));
    std::size_t t = 0;
    for (int i = 1; i <= n; ++i) {
        const long double target = total * i / n;
        while (t + 1 < len && cumulative[t] < target - slack) ++t;
        out.push_back(segment.start + static_cast<FrameIndex>(t));
    }
    return out;
}

std::vector<FrameIndex> distinct_frames(std::vector<FrameIndex> sample, const Interval& segment, int n) {
    if (n < 1) throw DomainError("distinct_frames: n must be positive");
    std::sort(sample.begin(), sample.end());
    sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
    const auto want = static_cast<std::size_t>(std::min<FrameIndex>(n, segment.length()));
    if (sample.size() >= want) return sample;

    auto add_missing = [&](FrameIndex f) {
        if (sample.size() >= want) return;
        if (!std::binary_search(sample.begin(), sample.end(), f)) {
            sample.insert(std::upper_bound(sample.begin(), sample.end(), f), f);
        }
    };
    for (FrameIndex f : uniform_sample(segment, static_cast<int>(want))) add_missing(f);
    for (FrameIndex f = segment.start; f < segment.end && sample.size() < want; ++f) add_missing(f);
    return sample;
}

}  // namespace curve
}  // namespace gts
