#pragma once

// Independent reference computations used by the unit and acceptance suites.
// Nothing here calls into the code paths it checks.

#include "gts/curve.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

namespace gts::oracle {

using HighPrecision = boost::multiprecision::cpp_dec_float_50;

/// F(IoU) for IoU = grid_index / 10000, with the step taken from exact
/// integer division.
inline double f_iou_exact(int grid_index) {
    // only eight distinct steps; the 50-digit logs are computed once each
    static const std::array<double, 8> by_step = [] {
        std::array<double, 8> out{};
        const HighPrecision scale = HighPrecision("0.63") / boost::multiprecision::log(HighPrecision(10));
        for (int step = 0; step < 8; ++step)
            out[step] = (scale * boost::multiprecision::log(HighPrecision("0.7") * step + 1) + HighPrecision("0.5"))
                            .convert_to<double>();
        return out;
    }();
    return by_step[std::min(grid_index / 1000, 7)];
}

inline double gamma_exact(std::int64_t frames) {
    const HighPrecision t(frames);
    const HighPrecision ramp = 1 - boost::multiprecision::exp(-boost::multiprecision::pow(t / 100, 3));
    const HighPrecision sig = 1 / (1 + boost::multiprecision::exp(HighPrecision("-0.03") * (t - 100)));
    return (1 + HighPrecision("0.25") * ramp * sig).convert_to<double>();
}

/// Least-squares polynomial fit over each mirrored window, evaluated at the
/// window centre (Householder QR per window).
inline std::vector<double> local_polyfit(const std::vector<double>& x, int half_window, int order) {
    const int n = static_cast<int>(x.size());
    auto mirror = [n](int i) {
        if (n == 1) return 0;
        while (i < 0 || i >= n) {
            if (i < 0) i = -i;
            if (i >= n) i = 2 * (n - 1) - i;
        }
        return i;
    };
    const int w = 2 * half_window + 1;
    Eigen::MatrixXd design(w, order + 1);
    for (int r = 0; r < w; ++r)
        for (int c = 0; c <= order; ++c) design(r, c) = std::pow(double(r - half_window), c);
    const auto qr = design.householderQr();
    std::vector<double> out(x.size());
    for (int t = 0; t < n; ++t) {
        Eigen::VectorXd y(w);
        for (int r = 0; r < w; ++r) y(r) = x[mirror(t + r - half_window)];
        const Eigen::VectorXd coef = qr.solve(y);
        out[t] = coef(0);  // polynomial value at offset 0
    }
    return out;
}

inline std::vector<FrameIndex> peaks_by_neighbours(const std::vector<double>& s) {
    std::vector<FrameIndex> out;
    const auto n = s.size();
    for (std::size_t t = 0; t < n; ++t) {
        const bool left = t == 0 || s[t - 1] < s[t];
        const bool right = t + 1 == n || s[t] >= s[t + 1];
        if (left && right) out.push_back(static_cast<FrameIndex>(t));
    }
    return out;
}

/// Exhaustive search: all subsets of the magnitude-eligible peaks with at most
/// K members and every pairwise distance > theta; maximize the total score
/// (summed in ascending frame order), ties to the lexicographically earliest
/// index set.
inline std::vector<FrameIndex> screen_exhaustive(const std::vector<FrameIndex>& peaks,
                                                 const std::vector<double>& s, double theta,
                                                 int top_k, std::optional<double> tau_fixed = {}) {
    if (peaks.empty()) return {};
    double tau = 0.0;
    if (tau_fixed) {
        tau = *tau_fixed;
    } else {
        for (auto p : peaks) tau += s[p];
        tau /= double(peaks.size());
    }
    std::vector<FrameIndex> eligible;
    for (auto p : peaks)
        if (s[p] >= tau) eligible.push_back(p);

    std::vector<FrameIndex> best;
    double best_total = -std::numeric_limits<double>::infinity();
    std::vector<FrameIndex> current;
    std::function<void(std::size_t)> visit = [&](std::size_t from) {
        if (!current.empty()) {
            // every pair, not just neighbours
            bool ok = true;
            for (std::size_t a = 0; a < current.size() && ok; ++a)
                for (std::size_t b = a + 1; b < current.size() && ok; ++b)
                    ok = std::abs(double(current[a] - current[b])) > theta;
            if (!ok) return;
            double total = 0.0;
            for (auto p : current) total += s[p];
            if (total > best_total || (total == best_total && current < best)) {
                best_total = total;
                best = current;
            }
        }
        if (current.size() == static_cast<std::size_t>(top_k)) return;
        for (std::size_t i = from; i < eligible.size(); ++i) {
            current.push_back(eligible[i]);
            visit(i + 1);
            current.pop_back();
        }
    };
    visit(0);
    return best;
}

/// Frame-level membership: frame f is high iff |f - p| <= beta*T for some
/// selected p (or no peak was selected).
inline std::vector<bool> high_frames(const std::vector<FrameIndex>& selected, FrameIndex T, double beta) {
    std::vector<bool> high(static_cast<std::size_t>(T), selected.empty());
    const double half = beta * double(T);
    for (auto p : selected)
        for (FrameIndex f = 0; f < T; ++f)
            if (std::abs(double(f - p)) <= half + 1e-9) high[f] = true;
    return high;
}

/// Smallest frame whose prefix mass reaches i/n of the segment mass.
inline std::vector<FrameIndex> quantile_frames(const std::vector<double>& s, Interval seg, int n) {
    long double total = 0;
    for (auto f = seg.start; f < seg.end; ++f) total += s[f];
    std::vector<FrameIndex> out;
    for (int i = 1; i <= n; ++i) {
        long double run = 0;
        const long double target = total * i / n;
        FrameIndex pick = seg.end - 1;
        for (auto f = seg.start; f < seg.end; ++f) {
            run += s[f];
            if (run >= target * (1 - 1e-12L)) {
                pick = f;
                break;
            }
        }
        out.push_back(pick);
    }
    return out;
}

/// Smooth random positive curve: a few Gaussian bumps over a floor plus noise.
inline std::vector<double> random_bumpy_curve(std::mt19937_64& rng, std::size_t length) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(length, 0.05);
    const int bumps = 1 + static_cast<int>(u(rng) * 8);
    for (int b = 0; b < bumps; ++b) {
        const double centre = u(rng) * double(length);
        const double width = 1.0 + u(rng) * double(length) / 10.0;
        const double height = 0.2 + u(rng);
        for (std::size_t t = 0; t < length; ++t)
            s[t] += height * std::exp(-0.5 * std::pow((double(t) - centre) / width, 2));
    }
    for (auto& v : s) v += 0.02 * u(rng);
    return s;
}

}  // namespace gts::oracle
