#include "gts/bench.hpp"
#include "gts/error.hpp"
#include "gts/log.hpp"
#include "gts/mock_backend.hpp"

#include "support/fixture_suite.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

using namespace gts;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Quiet {
    Quiet() : previous(log::set_sink({})) {}
    ~Quiet() { log::set_sink(previous); }
    log::Sink previous;
};

fixture::Suite fresh_suite(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("gts_bench_" + name);
    fs::remove_all(dir);
    return fixture::write_suite(dir);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(GTS_BENCH_EXE) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesAndValidates) {
    const auto suite = fresh_suite("config");
    auto cfg = BenchConfig::load(suite.config);
    EXPECT_TRUE(cfg.mock);
    EXPECT_EQ(cfg.workers, 2);
    EXPECT_EQ(cfg.annotations, suite.root / "annotations.json");
    EXPECT_NO_THROW(cfg.validate());

    auto off = cfg;
    off.ablation.static_guidance = false;
    off.ablation.dynamic_guidance = false;
    EXPECT_THROW(off.validate(), UsageError);
    EXPECT_THROW(bench::cmd_run(off, bench::make_gateway(cfg)), UsageError);
    EXPECT_FALSE(fs::exists(off.run_dir()));

    EXPECT_THROW(BenchConfig::from_json(json::parse(R"({"annotations": "a", "colour": 1})")), UsageError);
    EXPECT_THROW(BenchConfig::from_json(json::parse(R"({"annotations": "a", "peaks": {"top_k": 9}})")).validate(),
                 UsageError);
    const auto remote = BenchConfig::from_json(json::parse(R"({"annotations": "a",
        "backends": {"default": {"base_url": "http://127.0.0.1:9"}, "judge": {"base_url": "http://127.0.0.1:10", "max_retries": 0}}})"));
    EXPECT_NO_THROW(remote.validate());
    EXPECT_EQ(remote.endpoints.size(), 9u);
    EXPECT_EQ(remote.endpoints.back().base_url, "http://127.0.0.1:10");
    EXPECT_THROW(BenchConfig::from_json(json::parse(R"({"annotations": "a",
        "backends": {"caption": {"base_url": "http://x"}}})")).validate(), UsageError);
}

TEST(Config, FingerprintCoversThresholdsNotRunIdentity) {
    const auto suite = fresh_suite("fingerprint");
    const auto cfg = BenchConfig::load(suite.config);
    auto renamed = cfg;
    renamed.run_id = "other";
    renamed.workers = 8;
    EXPECT_EQ(renamed.fingerprint(), cfg.fingerprint());
    auto tweaked = cfg;
    tweaked.pipeline.glance.windows.beta = 0.1;
    EXPECT_NE(tweaked.fingerprint(), cfg.fingerprint());
    auto ablated = cfg;
    ablated.ablation.contextual_understanding = false;
    EXPECT_NE(ablated.fingerprint(), cfg.fingerprint());
}

TEST(Run, FixtureSuiteProducesRecordsAndStableSummary) {
    Quiet quiet;
    const auto suite = fresh_suite("run");
    const auto cfg = BenchConfig::load(suite.config);
    const auto gw = bench::make_gateway(cfg);
    const auto outcome = bench::cmd_run(cfg, gw);
    EXPECT_EQ(outcome.succeeded, 3u);
    EXPECT_EQ(outcome.exit_code(), 0);
    for (const auto& v : suite.videos) EXPECT_TRUE(fs::exists(outcome.run_dir / (v.video_id + ".json")));
    const auto summary = slurp(outcome.run_dir / "summary.json");

    const auto records = dataset::load_records(outcome.run_dir);
    ASSERT_EQ(records.size(), 3u);
    for (const auto& r : records) EXPECT_EQ(r.config_fingerprint, cfg.fingerprint());

    auto single = cfg;
    single.workers = 1;
    bench::cmd_run(single, bench::make_gateway(cfg));
    EXPECT_EQ(slurp(outcome.run_dir / "summary.json"), summary);
    auto again = dataset::load_records(outcome.run_dir);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(dataset::to_json(*again[i].report, false), dataset::to_json(*records[i].report, false));
}

TEST(Run, FailuresAreRecordedAndBatchContinues) {
    Quiet quiet;
    const auto suite = fresh_suite("partial");
    fs::remove(suite.root / "frames" / "shop-theft" / "000007.jpg");
    const auto cfg = BenchConfig::load(suite.config);
    const auto outcome = bench::cmd_run(cfg, bench::make_gateway(cfg));
    EXPECT_EQ(outcome.succeeded, 2u);
    EXPECT_EQ(outcome.failed, 1u);
    EXPECT_EQ(outcome.exit_code(), bench::exit_partial);
    const auto rec = dataset::load_record(outcome.run_dir, "shop-theft");
    ASSERT_TRUE(rec.error);
    EXPECT_NE(rec.error->find("frame"), std::string::npos);

    const auto eval = bench::cmd_eval(outcome.run_dir, suite.videos, bench::make_gateway(cfg));
    EXPECT_EQ(eval.summary.videos, 2u);
    EXPECT_EQ(eval.summary.failed, 1u);
}

TEST(Run, StopRequestSkipsRemainingVideos) {
    Quiet quiet;
    const auto suite = fresh_suite("stop");
    const auto cfg = BenchConfig::load(suite.config);
    std::atomic<bool> stop{true};
    const auto outcome = bench::cmd_run(cfg, bench::make_gateway(cfg), &stop);
    EXPECT_EQ(outcome.skipped, 3u);
    EXPECT_EQ(outcome.exit_code(), bench::exit_partial);
    EXPECT_NE(slurp(outcome.run_dir / "summary.json").find("skipped"), std::string::npos);
}

TEST(Eval, ScoresTheFixtureRun) {
    Quiet quiet;
    const auto suite = fresh_suite("eval");
    const auto cfg = BenchConfig::load(suite.config);
    const auto gw = bench::make_gateway(cfg);
    const auto outcome = bench::cmd_run(cfg, gw);
    const auto eval = bench::cmd_eval(outcome.run_dir, suite.videos, gw);
    const auto& s = eval.summary;
    EXPECT_EQ(s.videos, 3u);
    ASSERT_EQ(s.per_category.size(), 22u);
    EXPECT_EQ(s.per_category.back().category, "Normal");
    EXPECT_EQ(s.per_category.back().videos, 1u);
    EXPECT_FALSE(s.per_category.back().jeaug_mean);
    EXPECT_EQ(s.total_frames, 380);

    // street-fire grounds exactly, so IoU = 1 and the factor saturates
    const auto& fire = eval.records[0];
    ASSERT_TRUE(fire.scores);
    EXPECT_EQ(fire.scores->iou, 1.0);
    EXPECT_EQ(fire.scores->jeaug, fire.scores->au_score);

    double frames = 0, seconds = 0;
    for (const auto& r : eval.records) {
        frames += static_cast<double>(r.duration_frames);
        seconds += r.report->timing.total();
    }
    EXPECT_DOUBLE_EQ(*s.fps, frames / seconds);
    EXPECT_EQ(s.acceptable, *s.jeaug_mean >= 3.0 && *s.fps >= 30.0);
    EXPECT_NEAR(*s.qa_accuracy, 5.0 / 7.0, 1e-12);

    const auto text = s.to_text();
    for (const char* col : {"A.U.", "JeAUG", "QA", "FPS", "Road Accident", "Normal"})
        EXPECT_NE(text.find(col), std::string::npos) << col;
    const auto j = s.to_json();
    EXPECT_EQ(j.at("per_category").size(), 22u);
    for (const char* key : {"au_mean", "jeaug_mean", "qa_accuracy", "fps", "acceptable_region"})
        EXPECT_TRUE(j.at("overall").contains(key)) << key;

    // judge-only re-evaluation is deterministic
    EXPECT_EQ(bench::cmd_eval(outcome.run_dir, suite.videos, gw).records, eval.records);
}

TEST(Eval, HandBuiltRecordMatchesMetricCore) {
    Quiet quiet;
    const auto dir = fs::temp_directory_path() / "gts_bench_hand";
    fs::remove_all(dir);
    VideoAnnotation a{"hand", 10, 25, "Fire", {{0, 5}}, "ref text here",
                      {{"q", {"x", "y"}, 0}, {"r", {"x", "y"}, 1}}};
    AnomalyReport rep;
    rep.video_id = "hand";
    rep.duration_frames = 10;
    rep.description = "unrelated words entirely";
    rep.category = "Fire";
    rep.grounded = Interval{5, 10};
    rep.qa_choices = {0, 1};
    rep.timing.caption = 0.5;
    dataset::write_record(dir, {"hand", 10, "fp", std::nullopt, rep, std::nullopt});

    // scripted judge scores 6 on every aspect
    RuleTable t;
    t.generated.clear();
    t.rules.push_back({Role::judge, std::nullopt, json::object(), {},
                       {{"subject", 6}, {"scene", 6}, {"course_of_events", 6}, {"impact", 6}, {"rationale", ""}}});
    const auto judge = Gateway::over(std::make_shared<MockBackend>(0, t));
    const auto eval = bench::cmd_eval(dir, {a}, judge);
    ASSERT_TRUE(eval.records[0].scores);
    EXPECT_EQ(eval.records[0].scores->jeaug, metric::jeaug(6, 0, 10).jeaug);
    EXPECT_EQ(eval.summary.jeaug_mean, metric::jeaug(6, 0, 10).jeaug);
    EXPECT_EQ(eval.summary.qa_accuracy, 1.0);
    EXPECT_EQ(eval.summary.fps, 20.0);
    EXPECT_FALSE(eval.summary.acceptable);

    VideoAnnotation other = a;
    other.video_id = "ghost";
    try {
        bench::cmd_eval(dir, {a, other}, judge);
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    }
}

TEST(Ablate, EachSwitchLeavesADocumentedTrace) {
    Quiet quiet;
    const auto suite = fresh_suite("ablate");
    const auto cfg = BenchConfig::load(suite.config);
    const auto gw = bench::make_gateway(cfg);
    auto variants = bench::standard_variants();
    variants.insert(variants.begin() + 1, {"base_again", {}});
    const auto report = bench::cmd_ablate(cfg, variants, gw);
    ASSERT_EQ(report.rows.size(), 6u);

    auto row = [&](const std::string& name) -> const AblationRow& {
        return *std::find_if(report.rows.begin(), report.rows.end(), [&](const auto& r) { return r.name == name; });
    };
    auto has = [](const AblationRow& r, const std::string& artifact) {
        return std::find(r.changed_artifacts.begin(), r.changed_artifacts.end(), artifact) != r.changed_artifacts.end();
    };
    const auto& again = row("base_again");
    EXPECT_TRUE(again.changed_artifacts.empty());
    EXPECT_EQ(*again.au_delta, 0.0);
    EXPECT_EQ(*again.jeaug_delta, 0.0);
    EXPECT_EQ(*again.qa_delta, 0.0);
    EXPECT_EQ(*again.iou_delta, 0.0);

    EXPECT_TRUE(has(row("no_dynamic_text"), "dynamic_curve"));
    EXPECT_TRUE(has(row("no_dynamic_text"), "fused_curve"));
    EXPECT_FALSE(has(row("no_dynamic_text"), "static_curve"));
    EXPECT_TRUE(has(row("no_static_text"), "static_curve"));
    EXPECT_FALSE(has(row("no_static_text"), "dynamic_curve"));
    EXPECT_EQ(row("uniform_sampling").changed_artifacts, (std::vector<std::string>{"sampled_frames"}));
    EXPECT_EQ(row("no_context").changed_artifacts, (std::vector<std::string>{"context"}));

    const auto ctx_dir = cfg.runs_root / (cfg.run_id + "-no_context");
    for (const auto& r : dataset::load_records(ctx_dir))
        for (const auto& s : r.report->per_segment) EXPECT_TRUE(s.context_from_previous.empty());
    EXPECT_THROW(bench::cmd_ablate(cfg, {variants[0]}, gw), UsageError);
}

TEST(Cli, ExitCodes) {
    const auto suite = fresh_suite("cli");
    const auto config = suite.config.string();
    EXPECT_EQ(run_cli("run --config " + config), 0);
    EXPECT_EQ(run_cli("eval --config " + config), 0);
    EXPECT_TRUE(fs::exists(suite.root / "runs" / "fixture" / "eval.json"));
    EXPECT_EQ(run_cli("validate-dataset --config " + config), 0);
    EXPECT_EQ(run_cli("conformance --config " + config), 2);  // fixture rules script only a few roles
    EXPECT_EQ(run_cli("run --config " + config + " --workers 0"), bench::exit_usage);
    EXPECT_EQ(run_cli("frobnicate"), bench::exit_usage);
    EXPECT_EQ(run_cli("run"), bench::exit_usage);

    auto doc = dataset::read_json(suite.config);
    doc["ablation"] = {{"static_guidance", false}, {"dynamic_guidance", false}};
    dataset::write_json_atomic(suite.root / "off.json", doc);
    EXPECT_EQ(run_cli("run --config " + (suite.root / "off.json").string() + " --run-id off"), bench::exit_usage);
    EXPECT_FALSE(fs::exists(suite.root / "runs" / "off"));

    fs::remove(suite.root / "frames" / "quiet-park" / "000003.jpg");
    EXPECT_EQ(run_cli("validate-dataset --config " + config), 2);
    EXPECT_EQ(run_cli("run --config " + config + " --run-id partial"), 2);
}
