#pragma once

#include "gts/curve.hpp"
#include "gts/gateway.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gts {

/// One video as seen by the pipeline: frame references plus optional
/// precomputed embeddings that replace the matching embed calls.
struct VideoInput {
    std::string video_id;
    FrameIndex duration_frames = 0;
    std::vector<std::string> frame_refs;
    std::optional<EmbeddingMatrix> frame_embeddings;  // image, one row per frame
    std::optional<EmbeddingMatrix> clip_embeddings;   // video_clip

    /// Throws ShapeError when references or embeddings disagree with T.
    void validate() const;
};

struct PromptLists {
    std::vector<std::string> static_phrases;   // subjects and scenes
    std::vector<std::string> dynamic_phrases;  // actions and events

    friend bool operator==(const PromptLists&, const PromptLists&) = default;
};

struct GlanceConfig {
    FusionConfig fusion;
    WindowConfig windows;
    double peak_distance_fraction = PeakConfig::default_distance_fraction;
    std::optional<double> magnitude_threshold;
    int top_k = 5;
    int clip_window = 16;
    int clip_stride = 8;
    int caption_frames = 16;
    bool static_guidance = true;
    bool dynamic_guidance = true;

    void validate() const;
    PeakConfig peaks_for(FrameIndex duration_frames) const;
    /// Fusion weights after the guidance switches: alpha is forced to 1 or 0
    /// when a branch is disabled.
    FusionConfig effective_fusion(FrameIndex duration_frames) const;
};

/// Everything Glance produced for one video; kept for sampling and diffing.
struct GlanceResult {
    std::string caption;
    PromptLists prompts;
    SimilarityCurve static_curve;   // frame resolution, empty when disabled
    SimilarityCurve dynamic_curve;  // frame resolution, empty when disabled
    SimilarityCurve fused;
    std::vector<FrameIndex> detected_peaks;
    SegmentSet segments;

    friend bool operator==(const GlanceResult&, const GlanceResult&) = default;
};

namespace glance {

/// Captions a uniform subsample of at most `caption_frames` frames.
std::string caption_video(const VideoInput& video, const Gateway& gateway, int caption_frames = 16);

/// Case-insensitive, order-preserving dedup of trimmed, nonempty phrases.
std::vector<std::string> dedup_phrases(const std::vector<std::string>& phrases);

/// Throws PromptGenerationError (carrying the caption) when either list is
/// empty after dedup.
PromptLists generate_prompt_lists(const std::string& caption, const PhraseBank& phrase_bank,
                                  const Gateway& gateway);

/// Similarity curves, fusion, peak screening and window partitioning.
GlanceResult build_segments(const VideoInput& video, const PromptLists& prompts, const Gateway& gateway,
                            const GlanceConfig& cfg);

/// Caption, prompts and segments in one go.
GlanceResult run(const VideoInput& video, const PhraseBank& phrase_bank, const Gateway& gateway,
                 const GlanceConfig& cfg);

}  // namespace glance
}  // namespace gts
