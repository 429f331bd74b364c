#include "gts/curve_kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gts::curve::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<double> mean_similarity(const EmbeddingMatrix& text, const EmbeddingMatrix& time) {
    const auto n_time = static_cast<std::ptrdiff_t>(time.rows);
    const std::size_t n_text = text.rows;
    const std::size_t dim = text.dim;
    const float* text_data = text.data.data();
    const float* time_data = time.data.data();
    std::vector<double> out(time.rows);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < n_time; ++t) {
        const float* v = time_data + t * dim;
        double acc = 0.0;
        for (std::size_t n = 0; n < n_text; ++n) {
            const float* p = text_data + n * dim;
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += static_cast<double>(p[d]) * v[d];
            acc += dot;
        }
        out[t] = acc / static_cast<double>(n_text);
    }
    return out;
}

std::vector<double> shifted_exp(std::span<const double> x, double shift) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    std::vector<double> out(x.size());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::ptrdiff_t t = 0; t < n; ++t) out[t] = std::exp(x[t] - shift);
    return out;
}

std::vector<double> savgol_convolve(std::span<const double> x, std::span<const double> weights) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto h = static_cast<std::ptrdiff_t>(weights.size() / 2);
    std::vector<double> out(x.size());

#pragma omp parallel for schedule(static) if (n > 2048)
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -h; k <= h; ++k) acc += weights[k + h] * x[mirror_index(t + k, n)];
        out[t] = acc;
    }
    return out;
}

}  // namespace gts::curve::kernels
