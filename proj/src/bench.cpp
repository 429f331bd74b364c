#include "gts/bench.hpp"

#include "gts/error.hpp"
#include "gts/hash.hpp"
#include "gts/log.hpp"
#include "gts/mock_backend.hpp"
#include "gts/taxonomy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace gts {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> config_keys{
    "annotations", "frame_root",     "extractor",  "embedding_root", "phrase_bank",      "runs_root",
    "run_id",      "workers",        "backends",   "mock",           "fusion",           "peaks",
    "windows",     "clips",          "caption_frames", "frames_per_segment", "prompt_templates", "ablation"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw UsageError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) throw UsageError(where + ": unknown key '" + key + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <class T>
void read_opt(const json& j, const std::string& key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

json ablation_json(const AblationFlags& f) {
    return {{"static_guidance", f.static_guidance},
            {"dynamic_guidance", f.dynamic_guidance},
            {"integral_sampling", f.integral_sampling},
            {"contextual_understanding", f.contextual_understanding}};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::string fmt(const std::optional<double>& v, int precision = 3) {
    if (!v) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
    return buf;
}

std::optional<double> delta(const std::optional<double>& a, const std::optional<double>& base) {
    if (!a || !base) return std::nullopt;
    return *a - *base;
}

std::string file_digest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "missing";
    std::ostringstream os;
    os << in.rdbuf();
    return hex64(fnv1a64(os.str()));
}

}  // namespace

BenchConfig BenchConfig::from_json(const json& j, const fs::path& base_dir) {
    BenchConfig c;
    try {
        check_keys(j, config_keys, "config");
        if (!j.contains("annotations")) throw UsageError("config: 'annotations' is required");
        c.annotations = resolve(base_dir, j.at("annotations").get<std::string>());
        if (j.contains("frame_root")) c.frame_root = resolve(base_dir, j.at("frame_root").get<std::string>());
        if (j.contains("extractor")) {
            const auto& e = j.at("extractor");
            check_keys(e, {"command", "video_root", "video_ext"}, "extractor");
            c.extractor_cmd = e.at("command").get<std::string>();
            if (e.contains("video_root")) c.video_root = resolve(base_dir, e.at("video_root").get<std::string>());
            read_opt(e, "video_ext", c.video_ext);
        }
        if (j.contains("embedding_root")) c.embedding_root = resolve(base_dir, j.at("embedding_root").get<std::string>());
        if (j.contains("phrase_bank")) c.phrase_bank = resolve(base_dir, j.at("phrase_bank").get<std::string>());
        if (j.contains("runs_root")) c.runs_root = resolve(base_dir, j.at("runs_root").get<std::string>());
        else c.runs_root = base_dir / "runs";
        read_opt(j, "run_id", c.run_id);
        read_opt(j, "workers", c.workers);

        if (j.contains("backends")) {
            const auto& b = j.at("backends");
            if (!b.is_object()) throw UsageError("backends: expected an object");
            const json defaults = b.value("default", json::object());
            for (Role role : all_roles) {
                json e = defaults;
                if (b.contains(to_string(role))) e.update(b.at(to_string(role)));
                if (e.empty()) continue;
                check_keys(e, {"base_url", "timeout_ms", "max_retries", "auth_token", "max_in_flight"},
                           "backends." + to_string(role));
                BackendEndpoint ep;
                ep.role = role;
                ep.base_url = e.at("base_url").get<std::string>();
                read_opt(e, "timeout_ms", ep.timeout_ms);
                read_opt(e, "max_retries", ep.max_retries);
                read_opt(e, "max_in_flight", ep.max_in_flight);
                if (e.contains("auth_token") && !e.at("auth_token").is_null())
                    ep.auth_token = e.at("auth_token").get<std::string>();
                c.endpoints.push_back(std::move(ep));
            }
            for (const auto& [key, value] : b.items())
                if (key != "default") role_from_string(key);
        }
        if (j.contains("mock")) {
            const auto& m = j.at("mock");
            check_keys(m, {"rules", "seed", "enabled"}, "mock");
            if (m.contains("rules")) c.mock_rules = resolve(base_dir, m.at("rules").get<std::string>());
            read_opt(m, "seed", c.mock_seed);
            read_opt(m, "enabled", c.mock);
        }

        auto& g = c.pipeline.glance;
        if (j.contains("fusion")) {
            const auto& f = j.at("fusion");
            check_keys(f, {"alpha", "half_window", "poly_order"}, "fusion");
            read_opt(f, "alpha", g.fusion.alpha);
            read_opt(f, "half_window", g.fusion.half_window);
            read_opt(f, "poly_order", g.fusion.poly_order);
        }
        if (j.contains("peaks")) {
            const auto& p = j.at("peaks");
            check_keys(p, {"distance_fraction", "magnitude_threshold", "top_k"}, "peaks");
            read_opt(p, "distance_fraction", g.peak_distance_fraction);
            if (p.contains("magnitude_threshold") && !p.at("magnitude_threshold").is_null())
                g.magnitude_threshold = p.at("magnitude_threshold").get<double>();
            read_opt(p, "top_k", g.top_k);
        }
        if (j.contains("windows")) {
            check_keys(j.at("windows"), {"beta"}, "windows");
            read_opt(j.at("windows"), "beta", g.windows.beta);
        }
        if (j.contains("clips")) {
            check_keys(j.at("clips"), {"window", "stride"}, "clips");
            read_opt(j.at("clips"), "window", g.clip_window);
            read_opt(j.at("clips"), "stride", g.clip_stride);
        }
        read_opt(j, "caption_frames", g.caption_frames);
        read_opt(j, "frames_per_segment", c.pipeline.scrutinize.frames_per_segment);
        if (j.contains("prompt_templates"))
            c.pipeline.scrutinize.templates = PromptTemplates::from_json(j.at("prompt_templates"));
        if (j.contains("ablation")) {
            const auto& a = j.at("ablation");
            check_keys(a, {"static_guidance", "dynamic_guidance", "integral_sampling", "contextual_understanding"},
                       "ablation");
            read_opt(a, "static_guidance", c.ablation.static_guidance);
            read_opt(a, "dynamic_guidance", c.ablation.dynamic_guidance);
            read_opt(a, "integral_sampling", c.ablation.integral_sampling);
            read_opt(a, "contextual_understanding", c.ablation.contextual_understanding);
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    } catch (const FormatError& e) {
        throw UsageError(std::string("config: ") + e.what());
    } catch (const ConfigError& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    return c;
}

BenchConfig BenchConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json BenchConfig::to_json() const {
    const auto& g = pipeline.glance;
    json backends = json::object();
    for (const auto& ep : endpoints)
        backends[to_string(ep.role)] = {{"base_url", ep.base_url},
                                        {"timeout_ms", ep.timeout_ms},
                                        {"max_retries", ep.max_retries},
                                        {"max_in_flight", ep.max_in_flight},
                                        {"auth_token", ep.auth_token ? json("<set>") : json(nullptr)}};
    json j = {{"annotations", annotations.string()},
              {"runs_root", runs_root.string()},
              {"run_id", run_id},
              {"workers", workers},
              {"backends", backends},
              {"mock",
               {{"enabled", mock},
                {"seed", mock_seed},
                {"rules", mock_rules ? json(mock_rules->string()) : json(nullptr)}}},
              {"fusion", {{"alpha", g.fusion.alpha}, {"half_window", g.fusion.half_window}, {"poly_order", g.fusion.poly_order}}},
              {"peaks",
               {{"distance_fraction", g.peak_distance_fraction},
                {"magnitude_threshold", opt(g.magnitude_threshold)},
                {"top_k", g.top_k}}},
              {"windows", {{"beta", g.windows.beta}}},
              {"clips", {{"window", g.clip_window}, {"stride", g.clip_stride}}},
              {"caption_frames", g.caption_frames},
              {"frames_per_segment", pipeline.scrutinize.frames_per_segment},
              {"prompt_templates", pipeline.scrutinize.templates.to_json()},
              {"ablation", ablation_json(ablation)}};
    if (frame_root) j["frame_root"] = frame_root->string();
    if (embedding_root) j["embedding_root"] = embedding_root->string();
    if (phrase_bank) j["phrase_bank"] = phrase_bank->string();
    if (extractor_cmd) {
        j["extractor"] = {{"command", *extractor_cmd}, {"video_ext", video_ext}};
        if (video_root) j["extractor"]["video_root"] = video_root->string();
    }
    return j;
}

void BenchConfig::validate() const {
    if (!ablation.static_guidance && !ablation.dynamic_guidance)
        throw UsageError("at least one of static_guidance and dynamic_guidance must stay enabled");
    if (workers < 1) throw UsageError("workers must be at least 1");
    if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id.front() == '.')
        throw UsageError("run_id must be a plain directory name");
    if (mock) {
        if (!mock_rules) throw UsageError("mock mode needs mock.rules");
    } else {
        std::set<Role> bound;
        for (const auto& ep : endpoints) {
            if (!bound.insert(ep.role).second) throw UsageError("role " + to_string(ep.role) + " bound twice");
            try {
                ep.validate();
            } catch (const ConfigError& e) {
                throw UsageError(e.what());
            }
        }
        for (Role r : all_roles)
            if (!bound.contains(r)) throw UsageError("no backend bound for role " + to_string(r));
    }
    try {
        effective_pipeline().validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

PipelineConfig BenchConfig::effective_pipeline() const {
    PipelineConfig p = pipeline;
    p.glance.static_guidance = ablation.static_guidance;
    p.glance.dynamic_guidance = ablation.dynamic_guidance;
    p.scrutinize.sampling = ablation.integral_sampling ? SamplingMode::integral : SamplingMode::uniform;
    p.scrutinize.contextual_understanding = ablation.contextual_understanding;
    return p;
}

std::string BenchConfig::fingerprint() const {
    json j = to_json();
    for (const char* volatile_key : {"run_id", "workers", "runs_root"}) j.erase(volatile_key);
    if (mock_rules) j["mock"]["rules_digest"] = file_digest(*mock_rules);
    if (phrase_bank) j["phrase_bank_digest"] = file_digest(*phrase_bank);
    return hex64(fnv1a64(wire::canonical(j)));
}

// ---------------------------------------------------------------------------

nlohmann::json SummaryTable::to_json() const {
    json rows = json::array();
    for (const auto& r : per_category)
        rows.push_back({{"category", r.category},
                        {"videos", r.videos},
                        {"au_mean", opt(r.au_mean)},
                        {"jeaug_mean", opt(r.jeaug_mean)},
                        {"qa_accuracy", opt(r.qa_accuracy)}});
    return {{"overall",
             {{"videos", videos},
              {"failed", failed},
              {"au_mean", opt(au_mean)},
              {"jeaug_mean", opt(jeaug_mean)},
              {"iou_mean", opt(iou_mean)},
              {"qa_accuracy", opt(qa_accuracy)},
              {"fps", opt(fps)},
              {"total_frames", total_frames},
              {"wall_seconds", wall_seconds},
              {"acceptable_region", acceptable}}},
            {"per_category", rows}};
}

std::string SummaryTable::to_text() const {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %-10s %s\n", "A.U.", "JeAUG", "QA", "IoU", "FPS", "region");
    os << line;
    std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %-10s %s\n", fmt(au_mean).c_str(), fmt(jeaug_mean).c_str(),
                  fmt(qa_accuracy).c_str(), fmt(iou_mean).c_str(), fmt(fps, 1).c_str(),
                  acceptable ? "acceptable" : "outside");
    os << line;
    os << videos << " videos scored, " << failed << " failed\n\n";
    std::snprintf(line, sizeof line, "%-20s %6s %8s %8s %8s\n", "category", "videos", "A.U.", "JeAUG", "QA");
    os << line;
    for (const auto& r : per_category) {
        std::snprintf(line, sizeof line, "%-20s %6zu %8s %8s %8s\n", r.category.c_str(), r.videos,
                      fmt(r.au_mean).c_str(), fmt(r.jeaug_mean).c_str(), fmt(r.qa_accuracy).c_str());
        os << line;
    }
    return os.str();
}

nlohmann::json AblationReport::to_json() const {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"name", r.name},
                       {"flags", ablation_json(r.flags)},
                       {"summary", r.summary.to_json()},
                       {"deltas",
                        {{"au_mean", opt(r.au_delta)},
                         {"jeaug_mean", opt(r.jeaug_delta)},
                         {"iou_mean", opt(r.iou_delta)},
                         {"qa_accuracy", opt(r.qa_delta)}}},
                       {"changed_artifacts", r.changed_artifacts}});
    return out;
}

std::string AblationReport::to_text() const {
    std::ostringstream os;
    char line[512];
    std::snprintf(line, sizeof line, "%-18s %8s %8s %8s %8s %8s %8s %10s  %s\n", "variant", "A.U.", "dA.U.", "JeAUG",
                  "dJeAUG", "QA", "dQA", "FPS", "changed artifacts");
    os << line;
    for (const auto& r : rows) {
        std::string changed;
        for (const auto& c : r.changed_artifacts) changed += (changed.empty() ? "" : ",") + c;
        std::snprintf(line, sizeof line, "%-18s %8s %8s %8s %8s %8s %8s %10s  %s\n", r.name.c_str(),
                      fmt(r.summary.au_mean).c_str(), fmt(r.au_delta).c_str(), fmt(r.summary.jeaug_mean).c_str(),
                      fmt(r.jeaug_delta).c_str(), fmt(r.summary.qa_accuracy).c_str(), fmt(r.qa_delta).c_str(),
                      fmt(r.summary.fps, 1).c_str(), changed.empty() ? "-" : changed.c_str());
        os << line;
    }
    return os.str();
}

namespace bench {

Gateway make_gateway(const BenchConfig& cfg) {
    if (cfg.mock) {
        if (!cfg.mock_rules) throw UsageError("mock mode needs mock.rules");
        return Gateway::over(std::make_shared<MockBackend>(cfg.mock_seed, RuleTable::load(*cfg.mock_rules)));
    }
    return Gateway::from_endpoints(cfg.endpoints);
}

VideoInput prepare_video(const BenchConfig& cfg, const VideoAnnotation& a) {
    VideoInput v;
    v.video_id = a.video_id;
    v.duration_frames = a.duration_frames;
    if (cfg.frame_root) {
        std::optional<fs::path> input;
        if (cfg.video_root) input = *cfg.video_root / (a.video_id + cfg.video_ext);
        v.frame_refs = dataset::resolve_frames(a.video_id, a.duration_frames, *cfg.frame_root, cfg.extractor_cmd, input);
    } else {
        // No frame store: backends see dataset frame ids.
        for (FrameIndex i = 0; i < a.duration_frames; ++i)
            v.frame_refs.push_back(a.video_id + "/" + dataset::frame_file_name(i));
    }
    if (cfg.embedding_root) {
        const auto image = *cfg.embedding_root / (a.video_id + ".image.gtsemb");
        const auto clip = *cfg.embedding_root / (a.video_id + ".clip.gtsemb");
        if (fs::exists(image)) v.frame_embeddings = dataset::load_embeddings(image);
        if (fs::exists(clip)) v.clip_embeddings = dataset::load_embeddings(clip);
        if (v.frame_embeddings && v.frame_embeddings->kind != EmbeddingKind::image)
            throw FormatError(image.string() + ": expected image embeddings");
        if (v.clip_embeddings && v.clip_embeddings->kind != EmbeddingKind::video_clip)
            throw FormatError(clip.string() + ": expected video_clip embeddings");
    }
    v.validate();
    return v;
}

RunOutcome cmd_run(const BenchConfig& cfg, const Gateway& gateway, const std::atomic<bool>* stop) {
    cfg.validate();
    const auto annotations = dataset::load_annotations(cfg.annotations);
    const PhraseBank bank = cfg.phrase_bank ? dataset::load_phrase_bank(*cfg.phrase_bank) : PhraseBank{};
    const auto pipeline = cfg.effective_pipeline();
    const auto fingerprint = cfg.fingerprint();

    RunOutcome outcome;
    outcome.run_dir = cfg.run_dir();
    fs::create_directories(outcome.run_dir);

    std::vector<std::string> status(annotations.size(), "skipped");
    std::vector<std::string> errors(annotations.size());
    std::vector<std::string> categories(annotations.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            if (stop && stop->load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= annotations.size()) return;
            const auto& a = annotations[i];
            RunRecord rec;
            rec.video_id = a.video_id;
            rec.duration_frames = a.duration_frames;
            rec.config_fingerprint = fingerprint;
            try {
                const auto video = prepare_video(cfg, a);
                rec.report = scrutinize::run_pipeline(video, a.qa, bank, gateway, pipeline);
                categories[i] = rec.report->category;
                status[i] = "ok";
            } catch (const std::exception& e) {
                rec.error = e.what();
                errors[i] = e.what();
                status[i] = "failed";
                log::warn(a.video_id + ": " + e.what());
            }
            dataset::write_record(outcome.run_dir, rec);
        }
    };
    {
        std::vector<std::jthread> pool;
        const int n = std::min<int>(cfg.workers, std::max<int>(1, static_cast<int>(annotations.size())));
        for (int w = 0; w < n; ++w) pool.emplace_back(worker);
    }

    json videos = json::array();
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        json v = {{"video_id", annotations[i].video_id}, {"status", status[i]}};
        if (status[i] == "ok") v["category"] = categories[i];
        if (status[i] == "failed") v["error"] = errors[i];
        videos.push_back(v);
        if (status[i] == "ok") ++outcome.succeeded;
        else if (status[i] == "failed") ++outcome.failed;
        else ++outcome.skipped;
    }
    dataset::write_json_atomic(outcome.run_dir / "summary.json",
                               {{"run_id", cfg.run_id},
                                {"config_fingerprint", fingerprint},
                                {"succeeded", outcome.succeeded},
                                {"failed", outcome.failed},
                                {"skipped", outcome.skipped},
                                {"videos", videos}});
    return outcome;
}

SummaryTable summarize(const std::vector<RunRecord>& scored, const std::vector<VideoAnnotation>& annotations) {
    std::map<std::string, const VideoAnnotation*> by_id;
    for (const auto& a : annotations) by_id[a.video_id] = &a;

    struct Acc {
        std::size_t videos = 0;
        std::vector<double> au, jeaug, iou;
        std::size_t correct = 0, questions = 0;
    };
    Acc all;
    std::map<std::string, Acc> per;
    SummaryTable t;
    for (const auto& r : scored) {
        if (!r.ok() || !r.scores) {
            ++t.failed;
            continue;
        }
        const auto& a = *by_id.at(r.video_id);
        for (Acc* acc : {&all, &per[a.category]}) {
            ++acc->videos;
            acc->au.push_back(r.scores->au_score);
            if (!a.is_normal()) {
                acc->jeaug.push_back(r.scores->jeaug);
                acc->iou.push_back(r.scores->iou);
            }
            for (std::size_t q = 0; q < a.qa.size(); ++q) {
                ++acc->questions;
                acc->correct += r.report->qa_choices.at(q) == a.qa[q].answer_index;
            }
        }
        t.total_frames += r.duration_frames;
        t.wall_seconds += r.report->timing.total();
    }
    auto accuracy = [](const Acc& acc) -> std::optional<double> {
        if (acc.questions == 0) return std::nullopt;
        return static_cast<double>(acc.correct) / static_cast<double>(acc.questions);
    };
    t.videos = all.videos;
    t.au_mean = mean_of(all.au);
    t.jeaug_mean = mean_of(all.jeaug);
    t.iou_mean = mean_of(all.iou);
    t.qa_accuracy = accuracy(all);
    if (t.wall_seconds > 0.0) t.fps = static_cast<double>(t.total_frames) / t.wall_seconds;
    t.acceptable = t.jeaug_mean && t.fps && *t.jeaug_mean >= 3.0 && *t.fps >= 30.0;
    for (const auto& label : taxonomy::labels()) {
        const Acc& acc = per[label];
        t.per_category.push_back({label, acc.videos, mean_of(acc.au), mean_of(acc.jeaug), accuracy(acc)});
    }
    return t;
}

EvalResult cmd_eval(const fs::path& run_dir, const std::vector<VideoAnnotation>& annotations, const Gateway& judge) {
    auto records = dataset::load_records(run_dir);
    std::map<std::string, RunRecord*> by_id;
    for (auto& r : records) by_id[r.video_id] = &r;
    std::string missing;
    for (const auto& a : annotations)
        if (!by_id.contains(a.video_id)) missing += (missing.empty() ? "" : ", ") + a.video_id;
    if (!missing.empty()) throw EvalError("run " + run_dir.string() + " has no records for: " + missing);

    EvalResult out;
    for (const auto& a : annotations) {
        RunRecord rec = *by_id.at(a.video_id);
        if (rec.ok()) {
            const auto& report = *rec.report;
            if (report.qa_choices.size() != a.qa.size())
                throw EvalError(a.video_id + ": " + std::to_string(report.qa_choices.size()) + " QA answers for " +
                                std::to_string(a.qa.size()) + " questions");
            const auto verdict = judge.judge(report.description, a.description);
            const double au = metric::aggregate_au(verdict.aspects);
            MetricScores s;
            if (a.is_normal()) {
                s.au_score = au;
            } else {
                const double iou = report.grounded ? metric::iou_against_union(*report.grounded, a.grounding) : 0.0;
                s = metric::jeaug(au, iou, a.duration_frames);
            }
            if (!a.qa.empty()) {
                std::vector<std::pair<int, int>> pairs;
                for (std::size_t q = 0; q < a.qa.size(); ++q) pairs.emplace_back(report.qa_choices[q], a.qa[q].answer_index);
                s.qa_accuracy = metric::qa_accuracy(pairs);
            }
            rec.scores = s;
        }
        out.records.push_back(std::move(rec));
    }
    out.summary = summarize(out.records, annotations);
    return out;
}

std::vector<AblationVariant> standard_variants() {
    std::vector<AblationVariant> v{{"base", {}}};
    v.push_back({"no_dynamic_text", {true, false, true, true}});
    v.push_back({"no_static_text", {false, true, true, true}});
    v.push_back({"uniform_sampling", {true, true, false, true}});
    v.push_back({"no_context", {true, true, true, false}});
    return v;
}

std::vector<std::string> artifact_differences(const AnomalyReport& a, const AnomalyReport& b) {
    std::vector<std::string> out;
    auto note = [&](bool differs, const char* name) {
        if (differs) out.emplace_back(name);
    };
    const auto& ga = a.glance;
    const auto& gb = b.glance;
    note(ga.caption != gb.caption, "caption");
    note(!(ga.prompts == gb.prompts), "prompts");
    note(!(ga.static_curve == gb.static_curve), "static_curve");
    note(!(ga.dynamic_curve == gb.dynamic_curve), "dynamic_curve");
    note(!(ga.fused == gb.fused), "fused_curve");
    note(ga.detected_peaks != gb.detected_peaks || ga.segments.peaks != gb.segments.peaks, "peaks");
    note(ga.segments.high != gb.segments.high || ga.segments.low != gb.segments.low, "segments");

    auto per_segment = [](const AnomalyReport& r, auto field) {
        std::vector<decltype(field(r.per_segment.front()))> v;
        for (const auto& s : r.per_segment) v.push_back(field(s));
        return v;
    };
    if (!a.per_segment.empty() && !b.per_segment.empty()) {
        note(per_segment(a, [](const SegmentReport& s) { return s.sampled_frames; }) !=
                 per_segment(b, [](const SegmentReport& s) { return s.sampled_frames; }),
             "sampled_frames");
        note(per_segment(a, [](const SegmentReport& s) { return s.context_from_previous; }) !=
                 per_segment(b, [](const SegmentReport& s) { return s.context_from_previous; }),
             "context");
        note(per_segment(a, [](const SegmentReport& s) { return s.text; }) !=
                 per_segment(b, [](const SegmentReport& s) { return s.text; }),
             "segment_text");
    } else {
        note(a.per_segment.size() != b.per_segment.size(), "segment_text");
    }
    note(a.description != b.description, "description");
    note(a.category != b.category, "category");
    note(a.grounded != b.grounded, "grounded");
    note(a.qa_choices != b.qa_choices, "qa_choices");
    return out;
}

AblationReport cmd_ablate(const BenchConfig& base, const std::vector<AblationVariant>& variants,
                          const Gateway& gateway) {
    if (variants.size() < 2) throw UsageError("ablation needs at least two variants");
    const auto annotations = dataset::load_annotations(base.annotations);
    AblationReport report;
    std::vector<EvalResult> evals;
    for (const auto& v : variants) {
        BenchConfig cfg = base;
        cfg.ablation = v.flags;
        cfg.run_id = base.run_id + "-" + v.name;
        const auto outcome = cmd_run(cfg, gateway);
        evals.push_back(cmd_eval(outcome.run_dir, annotations, gateway));
        AblationRow row;
        row.name = v.name;
        row.flags = v.flags;
        row.summary = evals.back().summary;
        const auto& ref = evals.front();
        const auto& s0 = ref.summary;
        row.au_delta = delta(row.summary.au_mean, s0.au_mean);
        row.jeaug_delta = delta(row.summary.jeaug_mean, s0.jeaug_mean);
        row.iou_delta = delta(row.summary.iou_mean, s0.iou_mean);
        row.qa_delta = delta(row.summary.qa_accuracy, s0.qa_accuracy);
        std::set<std::string> changed;
        for (std::size_t i = 0; i < ref.records.size(); ++i) {
            const auto& a = ref.records[i];
            const auto& b = evals.back().records[i];
            if (a.ok() != b.ok()) changed.insert("status");
            if (a.ok() && b.ok())
                for (auto& name : artifact_differences(*a.report, *b.report)) changed.insert(name);
        }
        row.changed_artifacts.assign(changed.begin(), changed.end());
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<std::string> validate_dataset(const BenchConfig& cfg) {
    std::vector<std::string> problems;
    std::vector<VideoAnnotation> annotations;
    try {
        annotations = dataset::load_annotations(cfg.annotations);
    } catch (const Error& e) {
        problems.emplace_back(e.what());
        return problems;
    }
    if (cfg.phrase_bank) {
        try {
            dataset::load_phrase_bank(*cfg.phrase_bank);
        } catch (const Error& e) {
            problems.emplace_back(e.what());
        }
    }
    BenchConfig passive = cfg;
    passive.extractor_cmd.reset();  // report missing frames instead of extracting them
    for (const auto& a : annotations) {
        try {
            prepare_video(passive, a);
        } catch (const Error& e) {
            problems.emplace_back(a.video_id + ": " + e.what());
        }
    }
    return problems;
}

}  // namespace bench
}  // namespace gts
