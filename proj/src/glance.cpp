#include "gts/glance.hpp"

#include "gts/error.hpp"
#include "gts/log.hpp"
#include "gts/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace gts {

void VideoInput::validate() const {
    if (duration_frames < 1) throw ShapeError(video_id + ": video has no frames");
    if (static_cast<FrameIndex>(frame_refs.size()) != duration_frames)
        throw ShapeError(video_id + ": " + std::to_string(frame_refs.size()) + " frame refs for T=" +
                         std::to_string(duration_frames));
    if (frame_embeddings) {
        frame_embeddings->check_shape();
        if (static_cast<FrameIndex>(frame_embeddings->rows) != duration_frames)
            throw ShapeError(video_id + ": frame embeddings have " + std::to_string(frame_embeddings->rows) +
                             " rows for T=" + std::to_string(duration_frames));
    }
    if (clip_embeddings) {
        clip_embeddings->check_shape();
        if (clip_embeddings->kind != EmbeddingKind::video_clip || clip_embeddings->rows == 0)
            throw ShapeError(video_id + ": clip embeddings must be nonempty video_clip rows");
        if (clip_embeddings->clip_starts.front() != 0 || clip_embeddings->clip_starts.back() >= duration_frames)
            throw ShapeError(video_id + ": clip starts must begin at 0 and stay inside the video");
    }
}

void GlanceConfig::validate() const {
    fusion.validate();
    windows.validate();
    if (!(peak_distance_fraction >= 0.0 && peak_distance_fraction < 1.0))
        throw ConfigError("glance: peak distance fraction must lie in [0, 1)");
    peaks_for(100).validate();
    if (clip_window < 1 || clip_stride < 1) throw ConfigError("glance: clip window and stride must be positive");
    if (caption_frames < 1) throw ConfigError("glance: caption_frames must be positive");
    if (!static_guidance && !dynamic_guidance) throw ConfigError("glance: both guidance branches disabled");
}

PeakConfig GlanceConfig::peaks_for(FrameIndex duration_frames) const {
    PeakConfig p;
    p.min_distance = static_cast<double>(duration_frames) * peak_distance_fraction;
    p.magnitude_threshold = magnitude_threshold;
    p.top_k = top_k;
    return p;
}

FusionConfig GlanceConfig::effective_fusion(FrameIndex duration_frames) const {
    FusionConfig f = fusion.fitted_to(static_cast<std::size_t>(duration_frames));
    if (!dynamic_guidance) f.alpha = 1.0;
    if (!static_guidance) f.alpha = 0.0;
    return f;
}

namespace glance {

namespace {

std::string lowered(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trimmed(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::vector<std::string> refs_at(const VideoInput& video, const std::vector<FrameIndex>& frames) {
    std::vector<std::string> refs;
    refs.reserve(frames.size());
    for (FrameIndex f : frames) refs.push_back(video.frame_refs[static_cast<std::size_t>(f)]);
    return refs;
}

}  // namespace

std::string caption_video(const VideoInput& video, const Gateway& gateway, int caption_frames) {
    if (video.duration_frames < 1) throw DomainError(video.video_id + ": cannot caption an empty video");
    const Interval whole{0, video.duration_frames};
    const auto frames = curve::distinct_frames(curve::uniform_sample(whole, caption_frames), whole, caption_frames);
    log::info(video.video_id + ": caption over " + std::to_string(frames.size()) + " frames");
    return gateway.caption(video.video_id, refs_at(video, frames));
}

std::vector<std::string> dedup_phrases(const std::vector<std::string>& phrases) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& p : phrases) {
        auto t = trimmed(p);
        if (t.empty()) continue;
        if (seen.insert(lowered(t)).second) out.push_back(std::move(t));
    }
    return out;
}

PromptLists generate_prompt_lists(const std::string& caption, const PhraseBank& phrase_bank,
                                  const Gateway& gateway) {
    if (caption.empty()) throw DomainError("prompt generation needs a nonempty caption");
    taxonomy::validate_phrase_bank(phrase_bank);
    const auto reply = gateway.prompts({caption, taxonomy::categories(), phrase_bank});
    PromptLists lists{dedup_phrases(reply.static_prompts), dedup_phrases(reply.dynamic_prompts)};
    if (lists.static_phrases.empty() || lists.dynamic_phrases.empty())
        throw PromptGenerationError("prompt generator returned an empty " +
                                        std::string(lists.static_phrases.empty() ? "static" : "dynamic") + " list",
                                    caption);
    return lists;
}

GlanceResult build_segments(const VideoInput& video, const PromptLists& prompts, const Gateway& gateway,
                            const GlanceConfig& cfg) {
    cfg.validate();
    video.validate();
    const FrameIndex T = video.duration_frames;
    GlanceResult out;
    out.prompts = prompts;

    if (cfg.static_guidance) {
        const auto text = gateway.embed_text(prompts.static_phrases, "static");
        const auto frames = video.frame_embeddings ? *video.frame_embeddings : gateway.embed_image(video.frame_refs);
        if (static_cast<FrameIndex>(frames.rows) != T)
            throw ShapeError(video.video_id + ": frame embedding rows differ from T");
        out.static_curve = curve::branch_curve(text, frames, CurveKind::static_branch);
    }
    if (cfg.dynamic_guidance) {
        const auto text = gateway.embed_text(prompts.dynamic_phrases, "dynamic");
        const auto clips = video.clip_embeddings ? *video.clip_embeddings
                                                 : gateway.embed_video(video.frame_refs, cfg.clip_window,
                                                                       cfg.clip_stride);
        const auto per_clip = curve::branch_curve(text, clips, CurveKind::dynamic_branch);
        out.dynamic_curve = curve::resample_clips_to_frames(per_clip, clips.clip_starts, T);
    }

    // A disabled branch carries zero weight; a zero curve keeps the fusion path identical.
    const SimilarityCurve zeros{std::vector<double>(static_cast<std::size_t>(T), 0.0), CurveKind::fused};
    out.fused = curve::fuse_and_smooth(cfg.static_guidance ? out.static_curve : zeros,
                                       cfg.dynamic_guidance ? out.dynamic_curve : zeros,
                                       cfg.effective_fusion(T));
    out.detected_peaks = curve::detect_peaks(out.fused);
    const auto selected = curve::screen_peaks(out.detected_peaks, out.fused, cfg.peaks_for(T));
    out.segments = curve::partition_windows(selected, T, cfg.windows);
    log::info(video.video_id + ": " + std::to_string(out.detected_peaks.size()) + " peaks, " +
              std::to_string(selected.size()) + " kept, " + std::to_string(out.segments.high.size()) +
              " high segments");
    return out;
}

GlanceResult run(const VideoInput& video, const PhraseBank& phrase_bank, const Gateway& gateway,
                 const GlanceConfig& cfg) {
    const auto caption = caption_video(video, gateway, cfg.caption_frames);
    auto result = build_segments(video, generate_prompt_lists(caption, phrase_bank, gateway), gateway, cfg);
    result.caption = caption;
    return result;
}

}  // namespace glance
}  // namespace gts
