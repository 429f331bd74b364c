#include "gts/scrutinize.hpp"

#include "gts/error.hpp"
#include "gts/log.hpp"
#include "gts/taxonomy.hpp"

#include <algorithm>
#include <chrono>

namespace gts {

std::string to_string(ProbabilityClass c) { return c == ProbabilityClass::high ? "high" : "low"; }

ProbabilityClass probability_class_from_string(const std::string& name) {
    if (name == "high") return ProbabilityClass::high;
    if (name == "low") return ProbabilityClass::low;
    throw FormatError("unknown probability class '" + name + "'");
}

PromptTemplates PromptTemplates::from_json(const nlohmann::json& j) {
    PromptTemplates t;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw ConfigError("prompt template '" + key + "' must be a string");
        if (key == "high_segment") t.high_segment = value.get<std::string>();
        else if (key == "low_segment") t.low_segment = value.get<std::string>();
        else if (key == "qa") t.qa = value.get<std::string>();
        else throw ConfigError("unknown prompt template '" + key + "'");
    }
    return t;
}

nlohmann::json PromptTemplates::to_json() const {
    return {{"high_segment", high_segment}, {"low_segment", low_segment}, {"qa", qa}};
}

void ScrutinizeConfig::validate() const {
    if (frames_per_segment < 1) throw ConfigError("scrutinize: frames_per_segment must be positive");
}

void PipelineConfig::validate() const {
    glance.validate();
    scrutinize.validate();
}

namespace scrutinize {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string anomaly_list_text() {
    std::string out;
    for (const auto& c : taxonomy::categories()) out += (out.empty() ? "" : ", ") + c;
    return out;
}

std::vector<std::string> refs_at(const std::vector<std::string>& refs, const std::vector<FrameIndex>& frames) {
    std::vector<std::string> out;
    out.reserve(frames.size());
    for (FrameIndex f : frames) out.push_back(refs.at(static_cast<std::size_t>(f)));
    return out;
}

}  // namespace

std::string render(std::string text, const std::string& key, const std::string& value) {
    const std::string token = "{" + key + "}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size()))
        text.replace(pos, token.size(), value);
    return text;
}

std::vector<FrameIndex> sample_segment(const SimilarityCurve& curve, const Interval& segment, int n,
                                       SamplingMode mode) {
    if (mode == SamplingMode::uniform)
        return curve::distinct_frames(curve::uniform_sample(segment, n), segment, n);
    SimilarityCurve clamped = curve;
    for (auto& v : clamped.values) v = std::max(v, 0.0);
    return curve::distinct_frames(curve::integral_sample(clamped, segment, n), segment, n);
}

std::vector<SegmentReport> describe_segments(const SegmentSet& segments, const SimilarityCurve& curve,
                                             const std::vector<std::string>& frame_refs, const Gateway& gateway,
                                             const ScrutinizeConfig& cfg) {
    const auto ordered = segments.ordered();
    if (ordered.empty()) throw DomainError("describe_segments: no segments");
    const auto anomalies = anomaly_list_text();
    std::vector<SegmentReport> reports;
    reports.reserve(ordered.size());
    for (const auto& [segment, is_high] : ordered) {
        SegmentReport r;
        r.segment = segment;
        r.probability_class = is_high ? ProbabilityClass::high : ProbabilityClass::low;
        r.sampled_frames = sample_segment(curve, segment, cfg.frames_per_segment, cfg.sampling);
        r.question = render(is_high ? cfg.templates.high_segment : cfg.templates.low_segment, "anomaly_list",
                            anomalies);
        if (cfg.contextual_understanding && !reports.empty()) r.context_from_previous = reports.back().text;
        try {
            r.text = gateway.vqa(refs_at(frame_refs, r.sampled_frames), r.question, r.context_from_previous);
        } catch (const std::exception& e) {
            const auto what = "segment [" + std::to_string(segment.start) + ", " + std::to_string(segment.end) +
                              ") failed after " + std::to_string(reports.size()) + " of " +
                              std::to_string(ordered.size()) + " segments: " + e.what();
            throw PartialResultError(what, std::move(reports));
        }
        log::info("vqa " + to_string(r.probability_class) + " [" + std::to_string(segment.start) + ", " +
                  std::to_string(segment.end) + ")");
        reports.push_back(std::move(r));
    }
    return reports;
}

wire::IntegrateResponse integrate_reports(const std::vector<SegmentReport>& reports, const Gateway& gateway) {
    if (reports.empty()) throw DomainError("integrate_reports: no segment reports");
    wire::IntegrateRequest request;
    request.anomaly_list = taxonomy::categories();
    for (const auto& r : reports)
        request.segment_reports.push_back({r.segment.start, r.segment.end, to_string(r.probability_class), r.text});
    auto reply = gateway.integrate(request);
    if (!taxonomy::is_label(reply.category))
        throw CategoryError("integrator category '" + reply.category + "' is not in the taxonomy",
                            wire::serialize(reply));
    if (reply.report.empty()) throw ProtocolError("integrator returned an empty report", wire::serialize(reply));
    return reply;
}

Interval normalize_grounding(FrameIndex start, FrameIndex end, FrameIndex duration_frames,
                             const std::string& video_id) {
    if (duration_frames < 1) throw DomainError("grounding needs a nonempty video");
    const std::string who = video_id.empty() ? "vtg" : video_id;
    if (start > end) {
        log::warn(who + ": vtg bounds reversed (" + std::to_string(start) + " > " + std::to_string(end) + "), swapped");
        std::swap(start, end);
    }
    const FrameIndex s = std::clamp<FrameIndex>(start, 0, duration_frames - 1);
    FrameIndex e = std::clamp<FrameIndex>(end, 0, duration_frames);
    if (s != start || e != end) log::warn(who + ": vtg interval clipped to [0, " + std::to_string(duration_frames) + ")");
    if (e <= s) {
        log::warn(who + ": degenerate vtg interval widened to one frame");
        e = s + 1;
    }
    return {s, e};
}

Interval ground_anomaly(const std::string& video_id, const std::vector<std::string>& frame_refs,
                        const std::string& description, const Gateway& gateway) {
    if (description.empty()) throw DomainError(video_id + ": grounding needs a description");
    const auto reply = gateway.vtg(frame_refs, description);
    return normalize_grounding(reply.start_frame, reply.end_frame, static_cast<FrameIndex>(frame_refs.size()),
                               video_id);
}

std::vector<int> answer_questions(const VideoInput& video, const std::vector<QAItem>& items,
                                  const std::string& description, const Gateway& gateway,
                                  const ScrutinizeConfig& cfg) {
    const Interval whole{0, video.duration_frames};
    const auto frames = refs_at(video.frame_refs,
                                curve::distinct_frames(curve::uniform_sample(whole, cfg.frames_per_segment), whole,
                                                       cfg.frames_per_segment));
    std::vector<int> chosen;
    for (const auto& item : items) {
        std::string options;
        for (std::size_t i = 0; i < item.options.size(); ++i)
            options += std::string(1, static_cast<char>('A' + i)) + ". " + item.options[i] + "\n";
        const auto question = render(render(cfg.templates.qa, "question", item.question), "options", options);
        const auto reply = gateway.vqa(frames, question, description);
        const auto letter = metric::extract_option_letter(reply);
        if (!letter || *letter >= static_cast<int>(item.options.size())) {
            log::warn(video.video_id + ": no valid option in QA reply '" + reply + "'");
            chosen.push_back(-1);
        } else {
            chosen.push_back(*letter);
        }
    }
    return chosen;
}

AnomalyReport run_pipeline(const VideoInput& video, const std::vector<QAItem>& qa, const PhraseBank& phrase_bank,
                           const Gateway& gateway, const PipelineConfig& cfg) {
    cfg.validate();
    video.validate();
    AnomalyReport report;
    report.video_id = video.video_id;
    report.duration_frames = video.duration_frames;

    auto t = Clock::now();
    report.glance.caption = glance::caption_video(video, gateway, cfg.glance.caption_frames);
    report.timing.caption = seconds_since(t);

    t = Clock::now();
    const auto prompts = glance::generate_prompt_lists(report.glance.caption, phrase_bank, gateway);
    report.timing.prompts = seconds_since(t);

    t = Clock::now();
    auto caption = std::move(report.glance.caption);
    report.glance = glance::build_segments(video, prompts, gateway, cfg.glance);
    report.glance.caption = std::move(caption);
    report.timing.segmentation = seconds_since(t);

    t = Clock::now();
    report.per_segment =
        describe_segments(report.glance.segments, report.glance.fused, video.frame_refs, gateway, cfg.scrutinize);
    report.timing.description = seconds_since(t);

    t = Clock::now();
    const auto integrated = integrate_reports(report.per_segment, gateway);
    report.description = integrated.report;
    report.category = integrated.category;
    report.timing.integration = seconds_since(t);

    if (report.category != taxonomy::normal) {
        t = Clock::now();
        report.grounded = ground_anomaly(video.video_id, video.frame_refs, report.description, gateway);
        report.timing.grounding = seconds_since(t);
    }

    if (!qa.empty()) {
        t = Clock::now();
        report.qa_choices = answer_questions(video, qa, report.description, gateway, cfg.scrutinize);
        report.timing.qa = seconds_since(t);
    }
    return report;
}

}  // namespace scrutinize
}  // namespace gts
