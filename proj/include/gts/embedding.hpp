#pragma once

#include "gts/metric.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gts {

enum class EmbeddingKind { text, image, video_clip };

std::string to_string(EmbeddingKind kind);
EmbeddingKind embedding_kind_from_string(const std::string& name);

/// Row-major matrix of L2-normalized embeddings.
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    EmbeddingKind kind = EmbeddingKind::text;
    std::vector<float> data;

    // video_clip only
    int clip_window = 0;
    int clip_stride = 0;
    std::vector<FrameIndex> clip_starts;

    std::span<const float> row(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }

    /// Throws ShapeError when data size or clip metadata disagree with rows/dim.
    void check_shape() const;

    /// Largest |norm - 1| over rows.
    double max_norm_deviation() const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

}  // namespace gts
