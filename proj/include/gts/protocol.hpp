#pragma once

// JSON-over-HTTP wire messages for the nine backend roles. Every message has
// a canonical serialization (sorted keys, compact) and a strict parser that
// raises ProtocolError instead of coercing malformed fields.

#include "gts/embedding.hpp"
#include "gts/metric.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gts {

enum class Role { caption, prompts, embed_text, embed_image, embed_video, vqa, integrate, vtg, judge };

inline constexpr Role all_roles[] = {Role::caption,     Role::prompts, Role::embed_text,
                                     Role::embed_image, Role::embed_video, Role::vqa,
                                     Role::integrate,   Role::vtg,     Role::judge};

std::string to_string(Role role);
Role role_from_string(std::string_view name);
/// "/v1/<role>"
std::string endpoint_path(Role role);
Role role_from_path(std::string_view path);

using PhraseBank = std::map<std::string, std::vector<std::string>>;

struct JudgeVerdict {
    AspectScores aspects;
    std::string rationale;
};

namespace wire {

using json = nlohmann::json;

struct CaptionResponse {
    std::string caption;
    json to_json() const;
    static CaptionResponse from_json(const json& j);
};

struct CaptionRequest {
    static constexpr Role role = Role::caption;
    using Response = CaptionResponse;
    std::string video_id;
    std::vector<std::string> frame_refs;
    json to_json() const;
    static CaptionRequest from_json(const json& j);
};

struct PromptsResponse {
    std::vector<std::string> static_prompts;
    std::vector<std::string> dynamic_prompts;
    json to_json() const;
    static PromptsResponse from_json(const json& j);
};

struct PromptsRequest {
    static constexpr Role role = Role::prompts;
    using Response = PromptsResponse;
    std::string caption;
    std::vector<std::string> anomaly_list;
    PhraseBank phrase_bank;
    json to_json() const;
    static PromptsRequest from_json(const json& j);
};

struct EmbedResponse {
    std::size_t dim = 0;
    std::vector<std::vector<float>> vectors;
    json to_json() const;
    static EmbedResponse from_json(const json& j);
    EmbeddingMatrix to_matrix(EmbeddingKind kind) const;
};

struct EmbedTextRequest {
    static constexpr Role role = Role::embed_text;
    using Response = EmbedResponse;
    std::vector<std::string> texts;
    std::string kind;  // "static" | "dynamic"
    json to_json() const;
    static EmbedTextRequest from_json(const json& j);
};

struct EmbedImageRequest {
    static constexpr Role role = Role::embed_image;
    using Response = EmbedResponse;
    std::vector<std::string> frame_refs;
    json to_json() const;
    static EmbedImageRequest from_json(const json& j);
};

struct EmbedVideoResponse {
    std::size_t dim = 0;
    std::vector<FrameIndex> clip_starts;
    std::vector<std::vector<float>> vectors;
    json to_json() const;
    static EmbedVideoResponse from_json(const json& j);
    EmbeddingMatrix to_matrix(int window, int stride) const;
};

struct EmbedVideoRequest {
    static constexpr Role role = Role::embed_video;
    using Response = EmbedVideoResponse;
    std::vector<std::string> frame_refs;
    int window = 16;
    int stride = 8;
    json to_json() const;
    static EmbedVideoRequest from_json(const json& j);
};

struct VqaResponse {
    std::string answer;
    json to_json() const;
    static VqaResponse from_json(const json& j);
};

struct VqaRequest {
    static constexpr Role role = Role::vqa;
    using Response = VqaResponse;
    std::vector<std::string> frame_refs;
    std::string question;
    std::string context;
    json to_json() const;
    static VqaRequest from_json(const json& j);
};

/// One segment description handed to the integrator.
struct SegmentSummary {
    FrameIndex start = 0;
    FrameIndex end = 0;
    std::string probability_class;  // "high" | "low"
    std::string text;
    json to_json() const;
    static SegmentSummary from_json(const json& j);
};

struct IntegrateResponse {
    std::string report;
    std::string category;
    json to_json() const;
    static IntegrateResponse from_json(const json& j);
};

struct IntegrateRequest {
    static constexpr Role role = Role::integrate;
    using Response = IntegrateResponse;
    std::vector<SegmentSummary> segment_reports;
    std::vector<std::string> anomaly_list;
    json to_json() const;
    static IntegrateRequest from_json(const json& j);
};

struct VtgResponse {
    FrameIndex start_frame = 0;
    FrameIndex end_frame = 0;
    json to_json() const;
    static VtgResponse from_json(const json& j);
};

struct VtgRequest {
    static constexpr Role role = Role::vtg;
    using Response = VtgResponse;
    std::vector<std::string> frame_refs;
    std::string query;
    json to_json() const;
    static VtgRequest from_json(const json& j);
};

struct JudgeResponse {
    int subject = 1;
    int scene = 1;
    int course_of_events = 1;
    int impact = 1;
    std::string rationale;
    json to_json() const;
    static JudgeResponse from_json(const json& j);
    JudgeVerdict verdict() const;
};

struct JudgeRequest {
    static constexpr Role role = Role::judge;
    using Response = JudgeResponse;
    std::string prediction;
    std::string reference;
    json to_json() const;
    static JudgeRequest from_json(const json& j);
};

struct ErrorBody {
    std::string error;
    std::string detail;
    json to_json() const;
    static ErrorBody from_json(const json& j);
};

/// Compact dump with sorted keys.
std::string canonical(const json& j);

/// Parses a body, raising ProtocolError (with the raw body) on malformed JSON
/// or schema violations.
template <class Message>
Message parse(std::string_view body);

template <class Message>
std::string serialize(const Message& m) {
    return canonical(m.to_json());
}

}  // namespace wire
}  // namespace gts
