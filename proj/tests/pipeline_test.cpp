#include "gts/dataset.hpp"
#include "gts/error.hpp"
#include "gts/log.hpp"
#include "gts/scrutinize.hpp"
#include "gts/taxonomy.hpp"

#include "support/embeddings.hpp"
#include "support/fixture_suite.hpp"
#include "support/recording.hpp"

#include <gtest/gtest.h>

using namespace gts;
using nlohmann::json;

namespace {

std::vector<std::string> refs(const std::string& id, FrameIndex T) {
    std::vector<std::string> out;
    for (FrameIndex i = 0; i < T; ++i) out.push_back(id + "/" + dataset::frame_file_name(i));
    return out;
}

json rows_json(const std::vector<std::vector<double>>& rows) {
    json out = json::array();
    for (const auto& r : rows) out.push_back(r);
    return out;
}

// Static and dynamic prompts all embed to e0.
RuleTable aligned_prompts_table() {
    RuleTable t;
    t.embedding_dim = 4;
    t.rules.push_back({Role::embed_text, std::nullopt, json::object(), {},
                       {{"dim", 4}, {"vectors", rows_json(fixture::aligned_text(1))}}});
    return t;
}

VideoInput spike_video(FrameIndex T, std::vector<FrameIndex> spikes) {
    VideoInput v{"spike", T, refs("spike", T), fixture::spike_frames(T, spikes), fixture::spike_clips(T, 16, 8, {})};
    return v;
}

const PromptLists one_each{{"flames"}, {"burning"}};

struct Scripted {
    std::shared_ptr<MockBackend> mock;
    std::shared_ptr<gts::testing::Recording> recording;
    Gateway gateway;

    explicit Scripted(RuleTable t, std::uint64_t seed = 0)
        : mock(std::make_shared<MockBackend>(seed, std::move(t))),
          recording(std::make_shared<gts::testing::Recording>(mock)),
          gateway(Gateway::over(recording)) {}
};

}  // namespace

TEST(Taxonomy, TwentyOneCategoriesPlusNormal) {
    const auto& c = taxonomy::categories();
    ASSERT_EQ(c.size(), 21u);
    EXPECT_EQ(c.front(), "Fire");
    EXPECT_EQ(c[12], "Road Accident");
    EXPECT_EQ(c.back(), "Arrest");
    EXPECT_EQ(taxonomy::labels().size(), 22u);
    EXPECT_EQ(taxonomy::labels().back(), "Normal");
    EXPECT_TRUE(taxonomy::is_label("Normal"));
    EXPECT_FALSE(taxonomy::is_category("Normal"));
    EXPECT_FALSE(taxonomy::is_label("fire"));
    EXPECT_THROW(taxonomy::validate_phrase_bank({{"Fire", {"flames"}}, {"Kitten", {"meow"}}}), ConfigError);
    EXPECT_NO_THROW(taxonomy::validate_phrase_bank({{"Fire", {"flames"}}}));
}

TEST(Glance, CaptionFromScriptAndEmptyCaptionRejected) {
    RuleTable t = RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "caption", "match": {"video_id": "street-fire"}, "response": {"caption": "a dark street with a car"}},
        {"role": "caption", "match": {"video_id": "blank"}, "response": {"caption": ""}}]})"));
    Scripted s(t);
    const VideoInput fire{"street-fire", 100, refs("street-fire", 100), {}, {}};
    EXPECT_NE(glance::caption_video(fire, s.gateway).find("street"), std::string::npos);
    EXPECT_EQ(s.recording->requests(Role::caption).at(0).at("frame_refs").size(), 16u);
    const VideoInput blank{"blank", 5, refs("blank", 5), {}, {}};
    EXPECT_THROW(glance::caption_video(blank, s.gateway), ProtocolError);
}

TEST(Glance, PromptListsFromScriptWithPhraseBankVerbatim) {
    RuleTable t = RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "prompts", "match": {"caption": "a man walks"},
         "response": {"static": ["a man", "a street"], "dynamic": ["walking"]}},
        {"role": "prompts", "match": {"caption": "dup"},
         "response": {"static": ["A Man", "a man ", " a MAN", "a dog"], "dynamic": ["Run", "run", ""]}},
        {"role": "prompts", "match": {"caption": "empty"}, "response": {"static": ["x"], "dynamic": ["  "]}}]})"));
    Scripted s(t);
    const PhraseBank bank{{"Fire", {"flames", "Smoke Plume"}}, {"Stealing", {"concealing goods"}}};
    const auto lists = glance::generate_prompt_lists("a man walks", bank, s.gateway);
    EXPECT_EQ(lists.static_phrases, (std::vector<std::string>{"a man", "a street"}));
    EXPECT_EQ(lists.dynamic_phrases, (std::vector<std::string>{"walking"}));
    const auto sent = s.recording->requests(Role::prompts).at(0);
    EXPECT_EQ(sent.at("phrase_bank"), json(bank));
    EXPECT_EQ(sent.at("anomaly_list").size(), 21u);

    const auto dedup = glance::generate_prompt_lists("dup", bank, s.gateway);
    EXPECT_EQ(dedup.static_phrases, (std::vector<std::string>{"A Man", "a dog"}));
    EXPECT_EQ(dedup.dynamic_phrases, (std::vector<std::string>{"Run"}));

    try {
        glance::generate_prompt_lists("empty", bank, s.gateway);
        FAIL();
    } catch (const PromptGenerationError& e) {
        EXPECT_EQ(e.caption(), "empty");
    }
    EXPECT_THROW(glance::generate_prompt_lists("a man walks", {{"Cats", {"x"}}}, s.gateway), ConfigError);
}

TEST(Glance, SpikeAtFiftyGivesOneHighSegment) {
    Scripted s(aligned_prompts_table());
    const auto r = glance::build_segments(spike_video(100, {50}), one_each, s.gateway, {});
    ASSERT_EQ(r.segments.high.size(), 1u);
    EXPECT_EQ(r.segments.high[0], (Interval{45, 56}));  // [45, 55] inclusive
    EXPECT_EQ(r.segments.low, (std::vector<Interval>{{0, 45}, {56, 100}}));
    EXPECT_EQ(r.segments.peaks, (std::vector<FrameIndex>{50}));
    // precomputed frames and clips: only text is embedded
    EXPECT_EQ(s.mock->calls(Role::embed_image), 0u);
    EXPECT_EQ(s.mock->calls(Role::embed_video), 0u);
    EXPECT_EQ(s.mock->calls(Role::embed_text), 2u);
}

TEST(Glance, UniformBranchesFallBackToLeadingWindow) {
    Scripted s(aligned_prompts_table());
    const auto r = glance::build_segments(spike_video(100, {}), one_each, s.gateway, {});
    EXPECT_EQ(r.detected_peaks, (std::vector<FrameIndex>{0}));
    EXPECT_EQ(r.segments.high, (std::vector<Interval>{{0, 6}}));
    EXPECT_EQ(r.segments.low, (std::vector<Interval>{{6, 100}}));
}

TEST(Glance, StaticOnlyMatchesComposedCurveEngine) {
    Scripted s(aligned_prompts_table());
    GlanceConfig cfg;
    cfg.dynamic_guidance = false;
    const auto video = spike_video(100, {30, 70});
    const auto r = glance::build_segments(video, one_each, s.gateway, cfg);
    EXPECT_TRUE(r.dynamic_curve.values.empty());
    EXPECT_EQ(s.mock->calls(Role::embed_text), 1u);

    const auto text = gts::testing::matrix_from_rows(fixture::aligned_text(1), EmbeddingKind::text);
    const auto st = curve::branch_curve(text, *video.frame_embeddings, CurveKind::static_branch);
    FusionConfig f;
    f.alpha = 1.0;
    const auto fused = curve::fuse_and_smooth(st, SimilarityCurve{std::vector<double>(100, 0.0)}, f);
    EXPECT_EQ(r.fused.values, fused.values);
    const auto peaks = curve::detect_peaks(fused);
    const auto kept = curve::screen_peaks(peaks, fused, PeakConfig::for_duration(100));
    EXPECT_EQ(r.segments, curve::partition_windows(kept, 100, {}));
}

TEST(Glance, DisablingDynamicBranchChangesOnlyCurveValues) {
    Scripted s(aligned_prompts_table());
    const auto video = spike_video(100, {50});
    const auto base = glance::build_segments(video, one_each, s.gateway, {});
    GlanceConfig cfg;
    cfg.dynamic_guidance = false;
    const auto ablated = glance::build_segments(video, one_each, s.gateway, cfg);
    EXPECT_NE(base.fused.values, ablated.fused.values);
    EXPECT_EQ(base.detected_peaks, ablated.detected_peaks);
    EXPECT_EQ(base.segments, ablated.segments);
}

TEST(Glance, DeterministicAcrossRepeats) {
    Scripted s(aligned_prompts_table());
    const auto video = spike_video(160, {45, 118});
    const auto first = glance::build_segments(video, one_each, s.gateway, {});
    for (int i = 0; i < 3; ++i) EXPECT_EQ(glance::build_segments(video, one_each, s.gateway, {}), first);
}

TEST(Glance, EmbedsEveryFrameExactlyOnce) {
    RuleTable t;  // generated embeddings only
    t.generated = {Role::embed_text, Role::embed_image, Role::embed_video};
    Scripted s(t, 3);
    const VideoInput video{"v", 90, refs("v", 90), {}, {}};
    const auto r = glance::build_segments(video, one_each, s.gateway, {});
    const auto images = s.recording->requests(Role::embed_image);
    ASSERT_EQ(images.size(), 1u);
    EXPECT_EQ(images[0].at("frame_refs").size(), 90u);
    const auto clips = s.recording->requests(Role::embed_video);
    ASSERT_EQ(clips.size(), 1u);
    EXPECT_EQ(clips[0].at("window"), 16);
    EXPECT_EQ(clips[0].at("stride"), 8);
    EXPECT_EQ(r.fused.size(), 90u);
    double sum = 0;
    for (double v : r.dynamic_curve.values) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Glance, BranchesMayUseDifferentDimensions) {
    RuleTable t = RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "embed_text", "match": {"kind": "static"}, "response": {"dim": 4, "vectors": [[1,0,0,0]]}},
        {"role": "embed_text", "match": {"kind": "dynamic"}, "response": {"dim": 2, "vectors": [[0,1]]}}]})"));
    Scripted s(t);
    auto video = spike_video(40, {20});
    EmbeddingMatrix clips;
    clips.kind = EmbeddingKind::video_clip;
    clips.dim = 2;
    clips.clip_window = 16;
    clips.clip_stride = 8;
    for (FrameIndex st = 0; st < 40; st += 8) {
        clips.data.insert(clips.data.end(), {st == 16 ? 0.0f : 1.0f, st == 16 ? 1.0f : 0.0f});
        clips.clip_starts.push_back(st);
        ++clips.rows;
    }
    video.clip_embeddings = clips;
    EXPECT_NO_THROW(glance::build_segments(video, one_each, s.gateway, {}));

    video.clip_embeddings->dim = 4;  // shape now inconsistent
    EXPECT_THROW(glance::build_segments(video, one_each, s.gateway, {}), ShapeError);
}

TEST(Scrutinize, SamplingModes) {
    const SimilarityCurve flat{std::vector<double>(100, 0.01)};
    EXPECT_EQ(scrutinize::sample_segment(flat, {0, 100}, 4, SamplingMode::uniform),
              (std::vector<FrameIndex>{12, 37, 62, 87}));
    EXPECT_EQ(scrutinize::sample_segment(flat, {0, 100}, 4, SamplingMode::integral),
              (std::vector<FrameIndex>{24, 49, 74, 99}));
    for (auto mode : {SamplingMode::uniform, SamplingMode::integral}) {
        const auto one = scrutinize::sample_segment(flat, {10, 20}, 1, mode);
        ASSERT_EQ(one.size(), 1u);
        EXPECT_TRUE((Interval{10, 20}).contains(one[0]));
    }
    // negative smoothing undershoot carries no mass
    SimilarityCurve dip{std::vector<double>(20, 0.0)};
    dip.values[3] = -1.0;
    dip.values[15] = 1.0;
    EXPECT_EQ(scrutinize::sample_segment(dip, {0, 20}, 1, SamplingMode::integral), (std::vector<FrameIndex>{15}));
}

namespace {

RuleTable segment_script() {
    return RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "vqa", "contains": {"question": "Detect and describe", "frame_refs": "v/00002"}, "response": {"answer": "first high"}},
        {"role": "vqa", "contains": {"question": "Detect and describe"}, "response": {"answer": "second high"}},
        {"role": "vqa", "contains": {"question": "Describe these frames"}, "response": {"answer": "calm"}}]})"));
}

SegmentSet two_high() {
    SegmentSet s;
    s.high = {{20, 30}, {60, 70}};
    s.low = {{0, 20}, {30, 60}, {70, 100}};
    return s;
}

}  // namespace

TEST(Scrutinize, ContextChainsExactlyOneStep) {
    Scripted s(segment_script());
    const SimilarityCurve flat{std::vector<double>(100, 0.01)};
    const auto reports = scrutinize::describe_segments(two_high(), flat, refs("v", 100), s.gateway, {});
    ASSERT_EQ(reports.size(), 5u);
    const std::vector<Interval> order{{0, 20}, {20, 30}, {30, 60}, {60, 70}, {70, 100}};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(reports[i].segment, order[i]);
    EXPECT_EQ(reports[1].text, "first high");
    EXPECT_EQ(reports[3].text, "second high");

    const auto sent = s.recording->requests(Role::vqa);
    ASSERT_EQ(sent.size(), 5u);
    EXPECT_EQ(sent[0].at("context"), "");
    for (std::size_t i = 1; i < 5; ++i) {
        EXPECT_EQ(sent[i].at("context"), reports[i - 1].text);
        EXPECT_EQ(reports[i].context_from_previous, reports[i - 1].text);
    }
    const std::string high_q = sent[1].at("question");
    for (const auto& c : taxonomy::categories()) EXPECT_NE(high_q.find(c), std::string::npos) << c;
    EXPECT_EQ(sent[0].at("question").get<std::string>().find("Detect"), std::string::npos);
    for (const auto& r : reports) {
        EXPECT_FALSE(r.sampled_frames.empty());
        for (FrameIndex f : r.sampled_frames) EXPECT_TRUE(r.segment.contains(f));
    }
}

TEST(Scrutinize, ContextOffLeavesEveryContextEmpty) {
    Scripted s(segment_script());
    ScrutinizeConfig cfg;
    cfg.contextual_understanding = false;
    const SimilarityCurve flat{std::vector<double>(100, 0.01)};
    const auto reports = scrutinize::describe_segments(two_high(), flat, refs("v", 100), s.gateway, cfg);
    for (const auto& r : reports) EXPECT_TRUE(r.context_from_previous.empty());
    for (const auto& req : s.recording->requests(Role::vqa)) EXPECT_EQ(req.at("context"), "");
}

TEST(Scrutinize, SegmentFailureKeepsCompletedReports) {
    RuleTable t = RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "vqa", "contains": {"question": "Describe these frames"}, "response": {"answer": "calm"}}]})"));
    Scripted s(t);
    const SimilarityCurve flat{std::vector<double>(100, 0.01)};
    try {
        scrutinize::describe_segments(two_high(), flat, refs("v", 100), s.gateway, {});
        FAIL();
    } catch (const PartialResultError& e) {
        ASSERT_EQ(e.completed().size(), 1u);
        EXPECT_EQ(e.completed()[0].segment, (Interval{0, 20}));
        EXPECT_NE(std::string(e.what()).find("1 of 5"), std::string::npos);
    }
}

TEST(Scrutinize, IntegrationCategoryContract) {
    RuleTable t = RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "integrate", "contains": {"segment_reports": "wallet"}, "response": {"report": "theft", "category": "Stealing"}},
        {"role": "integrate", "contains": {"segment_reports": "nothing"}, "response": {"report": "calm", "category": "Normal"}},
        {"role": "integrate", "response": {"report": "odd", "category": "Jaywalking"}}]})"));
    Scripted s(t);
    SegmentReport a{{0, 10}, ProbabilityClass::high, {5}, "q", "hides a wallet", ""};
    SegmentReport b{{10, 20}, ProbabilityClass::high, {15}, "q", "runs out of the door", "hides a wallet"};
    EXPECT_EQ(scrutinize::integrate_reports({a, b}, s.gateway).category, "Stealing");
    SegmentReport calm{{0, 10}, ProbabilityClass::low, {5}, "q", "nothing happens", ""};
    EXPECT_EQ(scrutinize::integrate_reports({calm}, s.gateway).category, "Normal");
    EXPECT_EQ(s.mock->calls(Role::integrate), 2u);
    SegmentReport other{{0, 10}, ProbabilityClass::low, {5}, "q", "a bird", ""};
    try {
        scrutinize::integrate_reports({other}, s.gateway);
        FAIL();
    } catch (const CategoryError& e) {
        EXPECT_NE(e.raw_body().find("Jaywalking"), std::string::npos);
    }
}

TEST(Scrutinize, GroundingNormalization) {
    log::Capture capture;
    EXPECT_EQ(scrutinize::normalize_grounding(30, 60, 100), (Interval{30, 60}));
    EXPECT_TRUE(capture.warnings().empty());
    EXPECT_EQ(scrutinize::normalize_grounding(60, 30, 100), (Interval{30, 60}));
    EXPECT_EQ(capture.warnings().size(), 1u);
    EXPECT_EQ(scrutinize::normalize_grounding(90, 150, 100), (Interval{90, 100}));
    EXPECT_EQ(scrutinize::normalize_grounding(40, 40, 100), (Interval{40, 41}));
    EXPECT_EQ(scrutinize::normalize_grounding(120, 130, 100), (Interval{99, 100}));
    EXPECT_EQ(scrutinize::normalize_grounding(-5, 0, 100), (Interval{0, 1}));

    RuleTable t = RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "vtg", "response": {"start_frame": 30, "end_frame": 60}}]})"));
    Scripted s(t);
    EXPECT_EQ(scrutinize::ground_anomaly("v", refs("v", 100), "a fire", s.gateway), (Interval{30, 60}));
    EXPECT_EQ(s.recording->requests(Role::vtg).at(0).at("query"), "a fire");
}

TEST(Scrutinize, QuestionsUseOptionLetters) {
    RuleTable t = RuleTable::from_json(json::parse(R"({"rules": [
        {"role": "vqa", "contains": {"question": "colour"}, "response": {"answer": "(c) red"}},
        {"role": "vqa", "contains": {"question": "count"}, "response": {"answer": "no idea"}},
        {"role": "vqa", "contains": {"question": "where"}, "response": {"answer": "E"}}]})"));
    Scripted s(t);
    const VideoInput v{"v", 50, refs("v", 50), {}, {}};
    const std::vector<QAItem> items{{"colour?", {"blue", "green", "red"}, 2},
                                    {"count?", {"1", "2"}, 0},
                                    {"where?", {"here", "there"}, 0}};
    log::Capture capture;
    EXPECT_EQ(scrutinize::answer_questions(v, items, "desc", s.gateway, {}), (std::vector<int>{2, -1, -1}));
    EXPECT_EQ(capture.warnings().size(), 2u);
    const auto sent = s.recording->requests(Role::vqa);
    EXPECT_NE(sent[0].at("question").get<std::string>().find("C. red"), std::string::npos);
    EXPECT_EQ(sent[0].at("context"), "desc");
}

TEST(Pipeline, FixtureSuiteEndToEnd) {
    const auto dir = std::filesystem::temp_directory_path() / "gts_pipeline_fixture";
    std::filesystem::remove_all(dir);
    const auto suite = fixture::write_suite(dir);
    auto mock = std::make_shared<MockBackend>(7, RuleTable::load(suite.rules));
    const auto gw = Gateway::over(mock);
    const auto bank = dataset::load_phrase_bank(dir / "phrase_bank.json");

    auto input = [&](const VideoAnnotation& a) {
        return VideoInput{a.video_id, a.duration_frames, dataset::resolve_frames(a.video_id, a.duration_frames, dir / "frames"),
                          dataset::load_embeddings(dir / "embeddings" / (a.video_id + ".image.gtsemb")),
                          dataset::load_embeddings(dir / "embeddings" / (a.video_id + ".clip.gtsemb"))};
    };
    const auto& fire = suite.videos[0];
    const auto report = scrutinize::run_pipeline(input(fire), fire.qa, bank, gw, {});
    EXPECT_EQ(report.category, "Fire");
    ASSERT_TRUE(report.grounded);
    EXPECT_EQ(*report.grounded, (Interval{45, 55}));
    EXPECT_EQ(report.glance.prompts.static_phrases.size(), 3u);
    EXPECT_EQ(report.glance.prompts.dynamic_phrases.size(), 3u);
    EXPECT_EQ(report.glance.segments.high, (std::vector<Interval>{{45, 56}}));
    EXPECT_EQ(report.qa_choices, (std::vector<int>{1, 1}));
    EXPECT_GT(report.timing.total(), 0.0);

    const auto& park = suite.videos[2];
    const auto normal = scrutinize::run_pipeline(input(park), park.qa, bank, gw, {});
    EXPECT_EQ(normal.category, "Normal");
    EXPECT_FALSE(normal.grounded);
    EXPECT_EQ(mock->calls(Role::vtg), 1u);

    // every segment is one VQA call, plus one per QA item
    const auto& theft = suite.videos[1];
    const auto before = mock->calls(Role::vqa);
    const auto stolen = scrutinize::run_pipeline(input(theft), theft.qa, bank, gw, {});
    EXPECT_EQ(stolen.category, "Stealing");
    EXPECT_EQ(mock->calls(Role::vqa) - before, stolen.per_segment.size() + theft.qa.size());
    EXPECT_EQ(stolen.glance.segments.high.size(), 2u);
}
