#pragma once

#include "gts/annotation.hpp"
#include "gts/error.hpp"
#include "gts/glance.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gts {

enum class ProbabilityClass { high, low };
std::string to_string(ProbabilityClass c);
ProbabilityClass probability_class_from_string(const std::string& name);

enum class SamplingMode { integral, uniform };

struct SegmentReport {
    Interval segment;
    ProbabilityClass probability_class = ProbabilityClass::low;
    std::vector<FrameIndex> sampled_frames;
    std::string question;
    std::string text;
    std::string context_from_previous;  // empty when chaining is off or for the first segment

    friend bool operator==(const SegmentReport&, const SegmentReport&) = default;
};

/// Wall-clock seconds per stage.
struct StageTimings {
    double caption = 0;
    double prompts = 0;
    double segmentation = 0;
    double description = 0;
    double integration = 0;
    double grounding = 0;
    double qa = 0;

    double total() const noexcept {
        return caption + prompts + segmentation + description + integration + grounding + qa;
    }
    friend bool operator==(const StageTimings&, const StageTimings&) = default;
};

struct AnomalyReport {
    std::string video_id;
    FrameIndex duration_frames = 0;
    std::string description;
    std::string category;
    std::optional<Interval> grounded;  // absent for Normal
    std::vector<SegmentReport> per_segment;
    std::vector<int> qa_choices;  // -1 when no option letter was found
    GlanceResult glance;
    StageTimings timing;

    friend bool operator==(const AnomalyReport&, const AnomalyReport&) = default;
};

/// Editable question templates. "{anomaly_list}" expands to the
/// comma-separated taxonomy, "{question}" and "{options}" to a QA item.
struct PromptTemplates {
    std::string high_segment =
        "Detect and describe any anomalous event in these frames. Possible anomaly types: {anomaly_list}. "
        "Say who is involved, where it happens and how it unfolds.";
    std::string low_segment =
        "Describe these frames briefly and note any subtle clue that could relate to one of: {anomaly_list}.";
    std::string qa = "{question}\n{options}\nAnswer with the letter of the correct option.";

    static PromptTemplates from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    friend bool operator==(const PromptTemplates&, const PromptTemplates&) = default;
};

struct ScrutinizeConfig {
    int frames_per_segment = 8;
    SamplingMode sampling = SamplingMode::integral;
    bool contextual_understanding = true;
    PromptTemplates templates;

    void validate() const;
};

struct PipelineConfig {
    GlanceConfig glance;
    ScrutinizeConfig scrutinize;

    void validate() const;
};

/// A segment description failed part way; the reports finished so far are kept.
class PartialResultError : public Error {
public:
    PartialResultError(const std::string& what, std::vector<SegmentReport> completed)
        : Error(what), completed_(std::move(completed)) {}
    const std::vector<SegmentReport>& completed() const noexcept { return completed_; }

private:
    std::vector<SegmentReport> completed_;
};

namespace scrutinize {

std::string render(std::string text, const std::string& key, const std::string& value);

/// Integral mode clamps negative curve values to zero first. Uniform mode
/// returns bin midpoints. Both are deduplicated and topped up to
/// min(n, segment length) distinct frames.
std::vector<FrameIndex> sample_segment(const SimilarityCurve& curve, const Interval& segment, int n,
                                       SamplingMode mode);

/// One VQA call per segment, in temporal order. With chaining, each request
/// after the first carries the previous reply as context.
std::vector<SegmentReport> describe_segments(const SegmentSet& segments, const SimilarityCurve& curve,
                                             const std::vector<std::string>& frame_refs, const Gateway& gateway,
                                             const ScrutinizeConfig& cfg);

/// Throws CategoryError when the category is neither a taxonomy entry nor "Normal".
wire::IntegrateResponse integrate_reports(const std::vector<SegmentReport>& reports, const Gateway& gateway);

/// VTG reply normalized to [0, T): reversed bounds are swapped, bounds are
/// clipped and an empty result widens to one frame, each with a warning.
Interval ground_anomaly(const std::string& video_id, const std::vector<std::string>& frame_refs,
                        const std::string& description, const Gateway& gateway);
Interval normalize_grounding(FrameIndex start, FrameIndex end, FrameIndex duration_frames,
                             const std::string& video_id = {});

/// Chosen option per item; -1 when the reply names no valid option.
std::vector<int> answer_questions(const VideoInput& video, const std::vector<QAItem>& items,
                                  const std::string& description, const Gateway& gateway,
                                  const ScrutinizeConfig& cfg);

AnomalyReport run_pipeline(const VideoInput& video, const std::vector<QAItem>& qa, const PhraseBank& phrase_bank,
                           const Gateway& gateway, const PipelineConfig& cfg);

}  // namespace scrutinize
}  // namespace gts
