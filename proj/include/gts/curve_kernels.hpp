#pragma once

// Data-parallel inner loops of the curve engine. `kernels` is the OpenMP
// build used by the library; `serial` is the single-threaded reference kept
// for tests and the benchmark. Both evaluate every output element with the
// same operation order, so their results are bitwise identical.

#include "gts/embedding.hpp"

#include <span>
#include <vector>

namespace gts::curve {

namespace kernels {

/// out[t] = (1/N) sum_n <text_n, time_t>
std::vector<double> mean_similarity(const EmbeddingMatrix& text, const EmbeddingMatrix& time);

/// out[t] = exp(x[t] - shift)
std::vector<double> shifted_exp(std::span<const double> x, double shift);

/// out[t] = sum_k weights[k] * x[mirror(t + k - h)]
std::vector<double> savgol_convolve(std::span<const double> x, std::span<const double> weights);

int max_threads();

}  // namespace kernels

namespace serial {

std::vector<double> mean_similarity(const EmbeddingMatrix& text, const EmbeddingMatrix& time);
std::vector<double> shifted_exp(std::span<const double> x, double shift);
std::vector<double> savgol_convolve(std::span<const double> x, std::span<const double> weights);

}  // namespace serial

/// Index reflection about the ends without repeating the edge sample.
inline std::ptrdiff_t mirror_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

}  // namespace gts::curve
