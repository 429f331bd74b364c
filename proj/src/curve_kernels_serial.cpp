#include "gts/curve_kernels.hpp"

#include <cmath>

namespace gts::curve::serial {

std::vector<double> mean_similarity(const EmbeddingMatrix& text, const EmbeddingMatrix& time) {
    const std::size_t n_text = text.rows;
    const std::size_t dim = text.dim;
    std::vector<double> out(time.rows);
    for (std::size_t t = 0; t < time.rows; ++t) {
        const float* v = time.data.data() + t * dim;
        double acc = 0.0;
        for (std::size_t n = 0; n < n_text; ++n) {
            const float* p = text.data.data() + n * dim;
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += static_cast<double>(p[d]) * v[d];
            acc += dot;
        }
        out[t] = acc / static_cast<double>(n_text);
    }
    return out;
}

std::vector<double> shifted_exp(std::span<const double> x, double shift) {
    std::vector<double> out(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) out[t] = std::exp(x[t] - shift);
    return out;
}

std::vector<double> savgol_convolve(std::span<const double> x, std::span<const double> weights) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto h = static_cast<std::ptrdiff_t>(weights.size() / 2);
    std::vector<double> out(x.size());
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -h; k <= h; ++k) acc += weights[k + h] * x[mirror_index(t + k, n)];
        out[t] = acc;
    }
    return out;
}

}  // namespace gts::curve::serial
