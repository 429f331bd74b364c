#include "gts/embedding.hpp"

#include "gts/error.hpp"

#include <cmath>

namespace gts {

std::string to_string(EmbeddingKind kind) {
    switch (kind) {
        case EmbeddingKind::text: return "text";
        case EmbeddingKind::image: return "image";
        case EmbeddingKind::video_clip: return "video_clip";
    }
    return "unknown";
}

EmbeddingKind embedding_kind_from_string(const std::string& name) {
    if (name == "text") return EmbeddingKind::text;
    if (name == "image") return EmbeddingKind::image;
    if (name == "video_clip") return EmbeddingKind::video_clip;
    throw FormatError("unknown embedding kind '" + name + "'");
}

void EmbeddingMatrix::check_shape() const {
    if (data.size() != rows * dim)
        throw ShapeError("embedding matrix holds " + std::to_string(data.size()) + " values, expected " +
                         std::to_string(rows) + "x" + std::to_string(dim));
    if (kind == EmbeddingKind::video_clip && clip_starts.size() != rows)
        throw ShapeError("video clip embeddings need one clip start per row");
}

double EmbeddingMatrix::max_norm_deviation() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double sq = 0.0;
        for (float v : row(r)) sq += static_cast<double>(v) * v;
        worst = std::max(worst, std::fabs(std::sqrt(sq) - 1.0));
    }
    return worst;
}

}  // namespace gts
