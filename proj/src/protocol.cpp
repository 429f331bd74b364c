#include "gts/protocol.hpp"

#include "gts/error.hpp"

#include <cmath>
#include <limits>

namespace gts {

namespace {

constexpr std::pair<Role, std::string_view> role_names[] = {
    {Role::caption, "caption"},         {Role::prompts, "prompts"},
    {Role::embed_text, "embed_text"},   {Role::embed_image, "embed_image"},
    {Role::embed_video, "embed_video"}, {Role::vqa, "vqa"},
    {Role::integrate, "integrate"},     {Role::vtg, "vtg"},
    {Role::judge, "judge"},
};

}  // namespace

std::string to_string(Role role) {
    for (auto [r, name] : role_names)
        if (r == role) return std::string(name);
    return "unknown";
}

Role role_from_string(std::string_view name) {
    for (auto [r, n] : role_names)
        if (n == name) return r;
    throw ConfigError("unknown backend role '" + std::string(name) + "'");
}

std::string endpoint_path(Role role) { return "/v1/" + to_string(role); }

Role role_from_path(std::string_view path) {
    constexpr std::string_view prefix = "/v1/";
    if (path.substr(0, prefix.size()) != prefix)
        throw ProtocolError("not a protocol path: " + std::string(path));
    return role_from_string(path.substr(prefix.size()));
}

namespace wire {

namespace {

[[noreturn]] void violation(const std::string& what, const json& j) {
    throw ProtocolError("schema violation: " + what, j.dump());
}

const json& field(const json& j, const char* key) {
    if (!j.is_object()) violation("expected an object", j);
    auto it = j.find(key);
    if (it == j.end()) violation(std::string("missing field '") + key + "'", j);
    return *it;
}

std::string get_string(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_string()) violation(std::string("field '") + key + "' must be a string", j);
    return v.get<std::string>();
}

std::int64_t get_int(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_number_integer()) violation(std::string("field '") + key + "' must be an integer", j);
    return v.get<std::int64_t>();
}

std::vector<std::string> get_strings(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_array()) violation(std::string("field '") + key + "' must be an array", j);
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) violation(std::string("field '") + key + "' must hold strings", j);
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::vector<std::vector<float>> get_vectors(const json& j, std::size_t dim) {
    const json& v = field(j, "vectors");
    if (!v.is_array()) violation("field 'vectors' must be an array", j);
    std::vector<std::vector<float>> out;
    for (const auto& row : v) {
        if (!row.is_array() || row.size() != dim) violation("every vector must have 'dim' numbers", j);
        std::vector<float> r;
        r.reserve(dim);
        for (const auto& x : row) {
            if (!x.is_number()) violation("vector entries must be numbers", j);
            const double d = x.get<double>();
            if (!std::isfinite(d)) violation("vector entries must be finite", j);
            r.push_back(static_cast<float>(d));
        }
        out.push_back(std::move(r));
    }
    return out;
}

int get_score(const json& j, const char* key) {
    const auto s = get_int(j, key);
    if (s < 1 || s > 10) violation(std::string("score '") + key + "' must lie in [1, 10]", j);
    return static_cast<int>(s);
}

json vectors_json(const std::vector<std::vector<float>>& vectors) {
    json rows = json::array();
    for (const auto& r : vectors) {
        json row = json::array();
        for (float x : r) row.push_back(static_cast<double>(x));
        rows.push_back(std::move(row));
    }
    return rows;
}

EmbeddingMatrix matrix_from(const std::vector<std::vector<float>>& vectors, std::size_t dim,
                            EmbeddingKind kind) {
    EmbeddingMatrix m;
    m.rows = vectors.size();
    m.dim = dim;
    m.kind = kind;
    m.data.reserve(m.rows * dim);
    for (const auto& r : vectors) m.data.insert(m.data.end(), r.begin(), r.end());
    return m;
}

}  // namespace

std::string canonical(const json& j) { return j.dump(); }

// -- caption ------------------------------------------------------------------

json CaptionRequest::to_json() const { return {{"video_id", video_id}, {"frame_refs", frame_refs}}; }
CaptionRequest CaptionRequest::from_json(const json& j) {
    return {get_string(j, "video_id"), get_strings(j, "frame_refs")};
}
json CaptionResponse::to_json() const { return {{"caption", caption}}; }
CaptionResponse CaptionResponse::from_json(const json& j) { return {get_string(j, "caption")}; }

// -- prompts ------------------------------------------------------------------

json PromptsRequest::to_json() const {
    json bank = json::object();
    for (const auto& [category, phrases] : phrase_bank) bank[category] = phrases;
    return {{"caption", caption}, {"anomaly_list", anomaly_list}, {"phrase_bank", bank}};
}
PromptsRequest PromptsRequest::from_json(const json& j) {
    PromptsRequest r;
    r.caption = get_string(j, "caption");
    r.anomaly_list = get_strings(j, "anomaly_list");
    const json& bank = field(j, "phrase_bank");
    if (!bank.is_object()) violation("field 'phrase_bank' must be an object", j);
    for (auto it = bank.begin(); it != bank.end(); ++it) r.phrase_bank[it.key()] = get_strings(bank, it.key().c_str());
    return r;
}
json PromptsResponse::to_json() const { return {{"static", static_prompts}, {"dynamic", dynamic_prompts}}; }
PromptsResponse PromptsResponse::from_json(const json& j) {
    return {get_strings(j, "static"), get_strings(j, "dynamic")};
}

// -- embeddings ---------------------------------------------------------------

json EmbedTextRequest::to_json() const { return {{"texts", texts}, {"kind", kind}}; }
EmbedTextRequest EmbedTextRequest::from_json(const json& j) {
    EmbedTextRequest r{get_strings(j, "texts"), get_string(j, "kind")};
    if (r.kind != "static" && r.kind != "dynamic") violation("kind must be 'static' or 'dynamic'", j);
    return r;
}
json EmbedImageRequest::to_json() const { return {{"frame_refs", frame_refs}}; }
EmbedImageRequest EmbedImageRequest::from_json(const json& j) { return {get_strings(j, "frame_refs")}; }

json EmbedResponse::to_json() const { return {{"dim", dim}, {"vectors", vectors_json(vectors)}}; }
EmbedResponse EmbedResponse::from_json(const json& j) {
    const auto dim = get_int(j, "dim");
    if (dim < 1) violation("dim must be positive", j);
    return {static_cast<std::size_t>(dim), get_vectors(j, static_cast<std::size_t>(dim))};
}
EmbeddingMatrix EmbedResponse::to_matrix(EmbeddingKind kind) const { return matrix_from(vectors, dim, kind); }

json EmbedVideoRequest::to_json() const {
    return {{"frame_refs", frame_refs}, {"window", window}, {"stride", stride}};
}
EmbedVideoRequest EmbedVideoRequest::from_json(const json& j) {
    EmbedVideoRequest r;
    r.frame_refs = get_strings(j, "frame_refs");
    r.window = static_cast<int>(get_int(j, "window"));
    r.stride = static_cast<int>(get_int(j, "stride"));
    if (r.window < 1 || r.stride < 1) violation("window and stride must be positive", j);
    return r;
}
json EmbedVideoResponse::to_json() const {
    return {{"dim", dim}, {"clip_starts", clip_starts}, {"vectors", vectors_json(vectors)}};
}
EmbedVideoResponse EmbedVideoResponse::from_json(const json& j) {
    EmbedVideoResponse r;
    const auto dim = get_int(j, "dim");
    if (dim < 1) violation("dim must be positive", j);
    r.dim = static_cast<std::size_t>(dim);
    const json& starts = field(j, "clip_starts");
    if (!starts.is_array()) violation("field 'clip_starts' must be an array", j);
    for (const auto& s : starts) {
        if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
            violation("clip starts must be non-negative integers", j);
        r.clip_starts.push_back(s.get<FrameIndex>());
    }
    r.vectors = get_vectors(j, r.dim);
    if (r.vectors.size() != r.clip_starts.size()) violation("one clip start per vector", j);
    return r;
}
EmbeddingMatrix EmbedVideoResponse::to_matrix(int window, int stride) const {
    EmbeddingMatrix m = matrix_from(vectors, dim, EmbeddingKind::video_clip);
    m.clip_window = window;
    m.clip_stride = stride;
    m.clip_starts = clip_starts;
    return m;
}

// -- vqa / integrate / vtg / judge --------------------------------------------

json VqaRequest::to_json() const {
    return {{"frame_refs", frame_refs}, {"question", question}, {"context", context}};
}
VqaRequest VqaRequest::from_json(const json& j) {
    return {get_strings(j, "frame_refs"), get_string(j, "question"), get_string(j, "context")};
}
json VqaResponse::to_json() const { return {{"answer", answer}}; }
VqaResponse VqaResponse::from_json(const json& j) { return {get_string(j, "answer")}; }

json SegmentSummary::to_json() const {
    return {{"start", start}, {"end", end}, {"probability_class", probability_class}, {"text", text}};
}
SegmentSummary SegmentSummary::from_json(const json& j) {
    SegmentSummary s{get_int(j, "start"), get_int(j, "end"), get_string(j, "probability_class"),
                     get_string(j, "text")};
    if (s.probability_class != "high" && s.probability_class != "low")
        violation("probability_class must be 'high' or 'low'", j);
    return s;
}

json IntegrateRequest::to_json() const {
    json reports = json::array();
    for (const auto& s : segment_reports) reports.push_back(s.to_json());
    return {{"segment_reports", reports}, {"anomaly_list", anomaly_list}};
}
IntegrateRequest IntegrateRequest::from_json(const json& j) {
    IntegrateRequest r;
    const json& reports = field(j, "segment_reports");
    if (!reports.is_array()) violation("field 'segment_reports' must be an array", j);
    for (const auto& s : reports) r.segment_reports.push_back(SegmentSummary::from_json(s));
    r.anomaly_list = get_strings(j, "anomaly_list");
    return r;
}
json IntegrateResponse::to_json() const { return {{"report", report}, {"category", category}}; }
IntegrateResponse IntegrateResponse::from_json(const json& j) {
    return {get_string(j, "report"), get_string(j, "category")};
}

json VtgRequest::to_json() const { return {{"frame_refs", frame_refs}, {"query", query}}; }
VtgRequest VtgRequest::from_json(const json& j) { return {get_strings(j, "frame_refs"), get_string(j, "query")}; }
json VtgResponse::to_json() const { return {{"start_frame", start_frame}, {"end_frame", end_frame}}; }
VtgResponse VtgResponse::from_json(const json& j) { return {get_int(j, "start_frame"), get_int(j, "end_frame")}; }

json JudgeRequest::to_json() const { return {{"prediction", prediction}, {"reference", reference}}; }
JudgeRequest JudgeRequest::from_json(const json& j) {
    return {get_string(j, "prediction"), get_string(j, "reference")};
}
json JudgeResponse::to_json() const {
    return {{"subject", subject},
            {"scene", scene},
            {"course_of_events", course_of_events},
            {"impact", impact},
            {"rationale", rationale}};
}
JudgeResponse JudgeResponse::from_json(const json& j) {
    return {get_score(j, "subject"), get_score(j, "scene"), get_score(j, "course_of_events"),
            get_score(j, "impact"), get_string(j, "rationale")};
}
JudgeVerdict JudgeResponse::verdict() const {
    return {{subject, scene, course_of_events, impact}, rationale};
}

json ErrorBody::to_json() const { return {{"error", error}, {"detail", detail}}; }
ErrorBody ErrorBody::from_json(const json& j) { return {get_string(j, "error"), get_string(j, "detail")}; }

// -- parsing entry point ------------------------------------------------------

template <class Message>
Message parse(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what(), std::string(body));
    }
    try {
        return Message::from_json(j);
    } catch (const ProtocolError& e) {
        throw ProtocolError(e.what(), std::string(body));
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("schema violation: ") + e.what(), std::string(body));
    }
}

template CaptionRequest parse<CaptionRequest>(std::string_view);
template CaptionResponse parse<CaptionResponse>(std::string_view);
template PromptsRequest parse<PromptsRequest>(std::string_view);
template PromptsResponse parse<PromptsResponse>(std::string_view);
template EmbedTextRequest parse<EmbedTextRequest>(std::string_view);
template EmbedImageRequest parse<EmbedImageRequest>(std::string_view);
template EmbedResponse parse<EmbedResponse>(std::string_view);
template EmbedVideoRequest parse<EmbedVideoRequest>(std::string_view);
template EmbedVideoResponse parse<EmbedVideoResponse>(std::string_view);
template VqaRequest parse<VqaRequest>(std::string_view);
template VqaResponse parse<VqaResponse>(std::string_view);
template IntegrateRequest parse<IntegrateRequest>(std::string_view);
template IntegrateResponse parse<IntegrateResponse>(std::string_view);
template VtgRequest parse<VtgRequest>(std::string_view);
template VtgResponse parse<VtgResponse>(std::string_view);
template JudgeRequest parse<JudgeRequest>(std::string_view);
template JudgeResponse parse<JudgeResponse>(std::string_view);
template ErrorBody parse<ErrorBody>(std::string_view);

}  // namespace wire
}  // namespace gts
