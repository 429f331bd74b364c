#include "gts/dataset.hpp"

#include "gts/error.hpp"
#include "gts/log.hpp"
#include "gts/taxonomy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace gts {

bool VideoAnnotation::is_normal() const { return category == taxonomy::normal; }

namespace dataset {

using json = nlohmann::json;

namespace {

constexpr std::string_view embedding_magic = "GTSEMB1\n";

[[noreturn]] void reject(const std::string& who, const std::string& field, const std::string& why) {
    throw LoadError(who + ": " + field + ": " + why);
}

const json& field(const json& j, const std::string& who, const std::string& path, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) reject(who, path + key, "missing");
    return *it;
}

std::string string_field(const json& j, const std::string& who, const std::string& path, const std::string& key) {
    const auto& v = field(j, who, path, key);
    if (!v.is_string()) reject(who, path + key, "expected a string");
    return v.get<std::string>();
}

std::int64_t int_field(const json& j, const std::string& who, const std::string& path, const std::string& key) {
    const auto& v = field(j, who, path, key);
    if (!v.is_number_integer()) reject(who, path + key, "expected an integer");
    return v.get<std::int64_t>();
}

bool safe_id(const std::string& id) {
    if (id.empty() || id.front() == '.') return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_' || c == '.';
    });
}

json interval_json(const Interval& i) { return json::array({i.start, i.end}); }

Interval interval_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw FormatError("interval must be [start, end]");
    return {j.at(0).get<FrameIndex>(), j.at(1).get<FrameIndex>()};
}

std::vector<Interval> intervals_from(const json& j) {
    std::vector<Interval> out;
    for (const auto& e : j) out.push_back(interval_from(e));
    return out;
}

json intervals_json(const std::vector<Interval>& v) {
    json out = json::array();
    for (const auto& i : v) out.push_back(interval_json(i));
    return out;
}

std::string kind_name(CurveKind k) {
    switch (k) {
        case CurveKind::static_branch: return "static";
        case CurveKind::dynamic_branch: return "dynamic";
        case CurveKind::fused: return "fused";
    }
    return "fused";
}

CurveKind curve_kind_from(const std::string& s) {
    if (s == "static") return CurveKind::static_branch;
    if (s == "dynamic") return CurveKind::dynamic_branch;
    if (s == "fused") return CurveKind::fused;
    throw FormatError("unknown curve kind '" + s + "'");
}

json curve_json(const SimilarityCurve& c) { return {{"kind", kind_name(c.kind)}, {"values", c.values}}; }

SimilarityCurve curve_from(const json& j) {
    return {j.at("values").get<std::vector<double>>(), curve_kind_from(j.at("kind").get<std::string>())};
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

std::string replace_all(std::string text, const std::string& token, const std::string& value) {
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size()))
        text.replace(pos, token.size(), value);
    return text;
}

}  // namespace

// ---------------------------------------------------------------------------
// Annotations

void validate(const VideoAnnotation& a) {
    const std::string who = a.video_id.empty() ? "<unnamed>" : a.video_id;
    if (!safe_id(a.video_id)) reject(who, "video_id", "must be nonempty [A-Za-z0-9._-] not starting with '.'");
    if (a.duration_frames < 1) reject(who, "duration_frames", "must be positive");
    if (!(a.fps > 0.0) || !std::isfinite(a.fps)) reject(who, "fps", "must be positive");
    if (!taxonomy::is_label(a.category)) reject(who, "category", "'" + a.category + "' is not in the taxonomy");
    if (a.is_normal() && !a.grounding.empty()) reject(who, "grounding", "must be empty for Normal videos");
    if (!a.is_normal() && a.grounding.empty()) reject(who, "grounding", "anomalous videos need at least one interval");
    for (std::size_t i = 0; i < a.grounding.size(); ++i)
        if (!a.grounding[i].valid_within(a.duration_frames))
            reject(who, "grounding[" + std::to_string(i) + "]",
                   "[" + std::to_string(a.grounding[i].start) + ", " + std::to_string(a.grounding[i].end) +
                       ") is not a nonempty interval within [0, " + std::to_string(a.duration_frames) + ")");
    if (a.description.empty()) reject(who, "description", "must be nonempty");
    if (a.qa.size() < 2 || a.qa.size() > 5) reject(who, "qa", "needs 2-5 items, got " + std::to_string(a.qa.size()));
    for (std::size_t i = 0; i < a.qa.size(); ++i) {
        const auto& q = a.qa[i];
        const std::string path = "qa[" + std::to_string(i) + "]";
        if (q.question.empty()) reject(who, path + ".question", "must be nonempty");
        if (q.options.size() < 2 || q.options.size() > 5)
            reject(who, path + ".options", "needs 2-5 options, got " + std::to_string(q.options.size()));
        if (q.answer_index < 0 || q.answer_index >= static_cast<int>(q.options.size()))
            reject(who, path + ".answer_index",
                   std::to_string(q.answer_index) + " out of range for " + std::to_string(q.options.size()) +
                       " options");
    }
}

std::vector<VideoAnnotation> parse_annotations(const json& doc) {
    if (!doc.is_array()) throw LoadError("annotations: top level must be an array of records");
    std::vector<VideoAnnotation> out;
    std::map<std::string, std::size_t> seen;
    for (std::size_t n = 0; n < doc.size(); ++n) {
        const auto& r = doc[n];
        std::string who = "record " + std::to_string(n);
        if (!r.is_object()) reject(who, "", "expected an object");
        if (auto id = r.find("video_id"); id != r.end() && id->is_string()) who = id->get<std::string>();

        VideoAnnotation a;
        a.video_id = string_field(r, who, "", "video_id");
        a.duration_frames = int_field(r, who, "", "duration_frames");
        const auto& fps = field(r, who, "", "fps");
        if (!fps.is_number()) reject(who, "fps", "expected a number");
        a.fps = fps.get<double>();
        a.category = string_field(r, who, "", "category");
        a.description = string_field(r, who, "", "description");
        if (auto g = r.find("grounding"); g != r.end() && !g->is_null()) {
            if (!g->is_array()) reject(who, "grounding", "expected an array");
            for (std::size_t i = 0; i < g->size(); ++i) {
                const auto& iv = (*g)[i];
                const std::string path = "grounding[" + std::to_string(i) + "]";
                if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number_integer() || !iv[1].is_number_integer())
                    reject(who, path, "expected [start, end] integers");
                a.grounding.push_back({iv[0].get<FrameIndex>(), iv[1].get<FrameIndex>()});
            }
        }
        const auto& qa = field(r, who, "", "qa");
        if (!qa.is_array()) reject(who, "qa", "expected an array");
        for (std::size_t i = 0; i < qa.size(); ++i) {
            const std::string path = "qa[" + std::to_string(i) + "].";
            if (!qa[i].is_object()) reject(who, "qa[" + std::to_string(i) + "]", "expected an object");
            QAItem item;
            item.question = string_field(qa[i], who, path, "question");
            const auto& opts = field(qa[i], who, path, "options");
            if (!opts.is_array()) reject(who, path + "options", "expected an array");
            for (std::size_t k = 0; k < opts.size(); ++k) {
                if (!opts[k].is_string()) reject(who, path + "options[" + std::to_string(k) + "]", "expected a string");
                item.options.push_back(opts[k].get<std::string>());
            }
            item.answer_index = static_cast<int>(int_field(qa[i], who, path, "answer_index"));
            a.qa.push_back(std::move(item));
        }
        validate(a);
        if (!seen.emplace(a.video_id, n).second) reject(who, "video_id", "duplicate id");
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<VideoAnnotation> load_annotations(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("annotations: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw LoadError("annotations: " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_annotations(doc);
}

json to_json(const VideoAnnotation& a) {
    json qa = json::array();
    for (const auto& q : a.qa) qa.push_back({{"question", q.question}, {"options", q.options}, {"answer_index", q.answer_index}});
    return {{"video_id", a.video_id},       {"duration_frames", a.duration_frames},
            {"fps", a.fps},                 {"category", a.category},
            {"grounding", intervals_json(a.grounding)},
            {"description", a.description}, {"qa", qa}};
}

void write_annotations(const fs::path& path, const std::vector<VideoAnnotation>& annotations) {
    json doc = json::array();
    for (const auto& a : annotations) doc.push_back(to_json(a));
    write_json_atomic(path, doc);
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingMatrix read_embeddings(std::istream& in, const std::string& source) {
    std::string magic(embedding_magic.size(), '\0');
    if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())) || magic != embedding_magic)
        throw FormatError(source + ": bad magic, expected GTSEMB1");
    std::string header_line;
    if (!std::getline(in, header_line)) throw FormatError(source + ": missing header line");
    json header;
    try {
        header = json::parse(header_line);
    } catch (const json::parse_error& e) {
        throw FormatError(source + ": header is not JSON: " + e.what());
    }
    EmbeddingMatrix m;
    try {
        if (header.at("dtype").get<std::string>() != "f32") throw FormatError(source + ": dtype must be f32");
        const auto rows = header.at("rows").get<std::int64_t>();
        const auto dim = header.at("dim").get<std::int64_t>();
        if (rows < 0 || dim < 1) throw FormatError(source + ": rows must be >= 0 and dim >= 1");
        m.rows = static_cast<std::size_t>(rows);
        m.dim = static_cast<std::size_t>(dim);
        m.kind = embedding_kind_from_string(header.at("kind").get<std::string>());
        if (m.kind == EmbeddingKind::video_clip) {
            m.clip_window = header.at("window").get<int>();
            m.clip_stride = header.at("stride").get<int>();
            if (m.clip_window < 1 || m.clip_stride < 1) throw FormatError(source + ": window and stride must be positive");
            for (std::size_t i = 0; i < m.rows; ++i) m.clip_starts.push_back(static_cast<FrameIndex>(i) * m.clip_stride);
        }
    } catch (const json::exception& e) {
        throw FormatError(source + ": bad header: " + e.what());
    }

    const std::size_t count = m.rows * m.dim;
    std::vector<std::uint32_t> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * sizeof(std::uint32_t)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(std::uint32_t))
        throw FormatError(source + ": payload truncated, expected " + std::to_string(count) + " floats");
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError(source + ": trailing bytes after payload");
    m.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = raw[i];
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        std::memcpy(&m.data[i], &bits, sizeof bits);
    }

    for (std::size_t r = 0; r < m.rows; ++r) {
        double norm = 0.0;
        for (float v : m.row(r)) norm += static_cast<double>(v) * v;
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm)) throw FormatError(source + ": row " + std::to_string(r) + " cannot be normalized");
        if (std::abs(norm - 1.0) > 1e-5) {
            log::warn(source + ": row " + std::to_string(r) + " has norm " + std::to_string(norm) + ", renormalized");
            for (std::size_t d = 0; d < m.dim; ++d)
                m.data[r * m.dim + d] = static_cast<float>(m.data[r * m.dim + d] / norm);
        }
    }
    return m;
}

EmbeddingMatrix load_embeddings(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("embeddings: cannot open " + path.string());
    return read_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& m) {
    m.check_shape();
    json header = {{"dtype", "f32"}, {"rows", m.rows}, {"dim", m.dim}, {"kind", to_string(m.kind)}};
    if (m.kind == EmbeddingKind::video_clip) {
        for (std::size_t i = 0; i < m.rows; ++i)
            if (m.clip_starts[i] != static_cast<FrameIndex>(i) * m.clip_stride)
                throw FormatError("embeddings: clip starts must be multiples of the stride to be stored");
        header["window"] = m.clip_window;
        header["stride"] = m.clip_stride;
    }
    out.write(embedding_magic.data(), static_cast<std::streamsize>(embedding_magic.size()));
    const auto line = header.dump() + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    for (float v : m.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out) throw FormatError("embeddings: write failed");
}

void write_embeddings(const fs::path& path, const EmbeddingMatrix& m) {
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("embeddings: cannot write " + tmp.string());
        write_embeddings(out, m);
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Frames and assets

std::string frame_file_name(FrameIndex i) {
    std::ostringstream os;
    os << std::setw(6) << std::setfill('0') << i << ".jpg";
    return os.str();
}

std::vector<std::string> resolve_frames(const std::string& video_id, FrameIndex duration_frames,
                                        const fs::path& frame_root, const std::optional<std::string>& extractor_cmd,
                                        const std::optional<fs::path>& video_input) {
    if (!safe_id(video_id)) throw IngestionError("'" + video_id + "' is not a safe video id");
    const fs::path dir = frame_root / video_id;
    if (!fs::is_directory(dir)) {
        if (!extractor_cmd) throw IngestionError(video_id + ": no frame directory " + dir.string() + " and no extractor");
        if (!video_input) throw IngestionError(video_id + ": extractor configured but no input video");
        fs::create_directories(dir);
        const auto cmd = replace_all(replace_all(*extractor_cmd, "{input}", shell_quote(video_input->string())),
                                     "{outdir}", shell_quote(dir.string()));
        log::info(video_id + ": extracting frames: " + cmd);
        const int status = std::system(cmd.c_str());
        if (status != 0) throw ExtractionError(video_id + ": extractor exited with status " + std::to_string(status));
    }

    std::map<FrameIndex, std::string> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto stem = entry.path().stem().string();
        if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); }))
            continue;
        frames[std::stoll(stem)] = entry.path().filename().string();
    }
    if (static_cast<FrameIndex>(frames.size()) != duration_frames)
        throw IngestionError(video_id + ": found " + std::to_string(frames.size()) + " frames, annotation says " +
                             std::to_string(duration_frames));
    std::vector<std::string> refs;
    refs.reserve(frames.size());
    FrameIndex expected = 0;
    for (const auto& [index, name] : frames) {
        if (index != expected) throw IngestionError(video_id + ": frame " + std::to_string(expected) + " missing");
        refs.push_back(video_id + "/" + name);
        ++expected;
    }
    return refs;
}

PhraseBank load_phrase_bank(const fs::path& path) {
    PhraseBank bank;
    try {
        bank = read_json(path).get<PhraseBank>();
    } catch (const json::exception& e) {
        throw LoadError("phrase bank " + path.string() + ": " + e.what());
    }
    try {
        taxonomy::validate_phrase_bank(bank);
    } catch (const ConfigError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    return bank;
}

// ---------------------------------------------------------------------------
// Run records

json to_json(const SegmentReport& r) {
    return {{"segment", interval_json(r.segment)},
            {"probability_class", to_string(r.probability_class)},
            {"sampled_frames", r.sampled_frames},
            {"question", r.question},
            {"text", r.text},
            {"context_from_previous", r.context_from_previous}};
}

SegmentReport segment_report_from_json(const json& j) {
    SegmentReport r;
    r.segment = interval_from(j.at("segment"));
    r.probability_class = probability_class_from_string(j.at("probability_class").get<std::string>());
    r.sampled_frames = j.at("sampled_frames").get<std::vector<FrameIndex>>();
    r.question = j.at("question").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.context_from_previous = j.at("context_from_previous").get<std::string>();
    return r;
}

json to_json(const AnomalyReport& r, bool with_timing) {
    json segments = json::array();
    for (const auto& s : r.per_segment) segments.push_back(to_json(s));
    const auto& g = r.glance;
    json out = {
        {"video_id", r.video_id},
        {"duration_frames", r.duration_frames},
        {"description", r.description},
        {"category", r.category},
        {"grounded", r.grounded ? interval_json(*r.grounded) : json(nullptr)},
        {"per_segment", segments},
        {"qa_choices", r.qa_choices},
        {"glance",
         {{"caption", g.caption},
          {"static_prompts", g.prompts.static_phrases},
          {"dynamic_prompts", g.prompts.dynamic_phrases},
          {"static_curve", curve_json(g.static_curve)},
          {"dynamic_curve", curve_json(g.dynamic_curve)},
          {"fused_curve", curve_json(g.fused)},
          {"detected_peaks", g.detected_peaks},
          {"selected_peaks", g.segments.peaks},
          {"high_segments", intervals_json(g.segments.high)},
          {"low_segments", intervals_json(g.segments.low)}}}};
    if (with_timing) {
        const auto& t = r.timing;
        out["timing"] = {{"caption", t.caption},         {"prompts", t.prompts}, {"segmentation", t.segmentation},
                         {"description", t.description}, {"integration", t.integration},
                         {"grounding", t.grounding},     {"qa", t.qa}};
    }
    return out;
}

AnomalyReport anomaly_report_from_json(const json& j) {
    AnomalyReport r;
    r.video_id = j.at("video_id").get<std::string>();
    r.duration_frames = j.at("duration_frames").get<FrameIndex>();
    r.description = j.at("description").get<std::string>();
    r.category = j.at("category").get<std::string>();
    if (!j.at("grounded").is_null()) r.grounded = interval_from(j.at("grounded"));
    for (const auto& s : j.at("per_segment")) r.per_segment.push_back(segment_report_from_json(s));
    r.qa_choices = j.at("qa_choices").get<std::vector<int>>();
    const auto& g = j.at("glance");
    r.glance.caption = g.at("caption").get<std::string>();
    r.glance.prompts.static_phrases = g.at("static_prompts").get<std::vector<std::string>>();
    r.glance.prompts.dynamic_phrases = g.at("dynamic_prompts").get<std::vector<std::string>>();
    r.glance.static_curve = curve_from(g.at("static_curve"));
    r.glance.dynamic_curve = curve_from(g.at("dynamic_curve"));
    r.glance.fused = curve_from(g.at("fused_curve"));
    r.glance.detected_peaks = g.at("detected_peaks").get<std::vector<FrameIndex>>();
    r.glance.segments.peaks = g.at("selected_peaks").get<std::vector<FrameIndex>>();
    r.glance.segments.high = intervals_from(g.at("high_segments"));
    r.glance.segments.low = intervals_from(g.at("low_segments"));
    if (auto t = j.find("timing"); t != j.end()) {
        r.timing.caption = t->at("caption").get<double>();
        r.timing.prompts = t->at("prompts").get<double>();
        r.timing.segmentation = t->at("segmentation").get<double>();
        r.timing.description = t->at("description").get<double>();
        r.timing.integration = t->at("integration").get<double>();
        r.timing.grounding = t->at("grounding").get<double>();
        r.timing.qa = t->at("qa").get<double>();
    }
    return r;
}

json to_json(const MetricScores& s) {
    return {{"au_score", s.au_score},
            {"iou", s.iou},
            {"f_iou", s.f_iou},
            {"gamma", s.gamma},
            {"grounding_factor", s.grounding_factor},
            {"jeaug", s.jeaug},
            {"qa_accuracy", s.qa_accuracy ? json(*s.qa_accuracy) : json(nullptr)}};
}

MetricScores metric_scores_from_json(const json& j) {
    MetricScores s;
    s.au_score = j.at("au_score").get<double>();
    s.iou = j.at("iou").get<double>();
    s.f_iou = j.at("f_iou").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.grounding_factor = j.at("grounding_factor").get<double>();
    s.jeaug = j.at("jeaug").get<double>();
    if (!j.at("qa_accuracy").is_null()) s.qa_accuracy = j.at("qa_accuracy").get<double>();
    return s;
}

json to_json(const RunRecord& r) {
    return {{"video_id", r.video_id},
            {"duration_frames", r.duration_frames},
            {"config_fingerprint", r.config_fingerprint},
            {"error", r.error ? json(*r.error) : json(nullptr)},
            {"report", r.report ? to_json(*r.report) : json(nullptr)},
            {"scores", r.scores ? to_json(*r.scores) : json(nullptr)}};
}

RunRecord run_record_from_json(const json& j) {
    try {
        RunRecord r;
        r.video_id = j.at("video_id").get<std::string>();
        r.duration_frames = j.at("duration_frames").get<FrameIndex>();
        r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
        if (!j.at("report").is_null()) r.report = anomaly_report_from_json(j.at("report"));
        if (!j.at("scores").is_null()) r.scores = metric_scores_from_json(j.at("scores"));
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("run record: ") + e.what());
    }
}

void write_json_atomic(const fs::path& path, const json& doc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw LoadError("cannot write " + tmp.string());
        out << doc.dump(2) << '\n';
        if (!out.flush()) throw LoadError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

void write_record(const fs::path& run_dir, const RunRecord& record) {
    if (!safe_id(record.video_id)) throw LoadError("'" + record.video_id + "' is not a safe video id");
    write_json_atomic(run_dir / (record.video_id + ".json"), to_json(record));
}

RunRecord load_record(const fs::path& run_dir, const std::string& video_id) {
    return run_record_from_json(read_json(run_dir / (video_id + ".json")));
}

std::vector<RunRecord> load_records(const fs::path& run_dir) {
    if (!fs::is_directory(run_dir)) throw LoadError("no run directory " + run_dir.string());
    std::vector<RunRecord> out;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        const auto doc = read_json(entry.path());
        if (!doc.is_object() || !doc.contains("report") || !doc.contains("error")) continue;
        out.push_back(run_record_from_json(doc));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
    return out;
}

}  // namespace dataset
}  // namespace gts
