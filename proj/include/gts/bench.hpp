#pragma once

#include "gts/dataset.hpp"

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gts {

struct AblationFlags {
    bool static_guidance = true;
    bool dynamic_guidance = true;
    bool integral_sampling = true;
    bool contextual_understanding = true;

    friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

/// Batch configuration, read from a JSON file. Relative paths resolve against
/// the file's directory.
struct BenchConfig {
    std::filesystem::path annotations;
    std::optional<std::filesystem::path> frame_root;
    std::optional<std::string> extractor_cmd;           // {input} {outdir}
    std::optional<std::filesystem::path> video_root;    // extractor input: <video_root>/<id><video_ext>
    std::string video_ext = ".mp4";
    std::optional<std::filesystem::path> embedding_root;  // <id>.image.gtsemb, <id>.clip.gtsemb
    std::optional<std::filesystem::path> phrase_bank;
    std::filesystem::path runs_root = "runs";
    std::string run_id = "default";
    int workers = 1;

    std::vector<BackendEndpoint> endpoints;
    std::optional<std::filesystem::path> mock_rules;
    std::uint64_t mock_seed = 0;
    bool mock = false;

    PipelineConfig pipeline;
    AblationFlags ablation;

    static BenchConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
    static BenchConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// Throws UsageError on any invariant violation.
    void validate() const;
    /// Pipeline settings with the ablation switches applied.
    PipelineConfig effective_pipeline() const;
    /// Hash of every threshold, switch and backend binding.
    std::string fingerprint() const;
    std::filesystem::path run_dir() const { return runs_root / run_id; }
};

struct CategoryRow {
    std::string category;
    std::size_t videos = 0;
    std::optional<double> au_mean;
    std::optional<double> jeaug_mean;
    std::optional<double> qa_accuracy;
};

struct SummaryTable {
    std::size_t videos = 0;  // scored
    std::size_t failed = 0;
    std::optional<double> au_mean;
    std::optional<double> jeaug_mean;  // anomalous videos only
    std::optional<double> iou_mean;    // anomalous videos only
    std::optional<double> qa_accuracy;
    std::optional<double> fps;  // total frames / total pipeline seconds
    FrameIndex total_frames = 0;
    double wall_seconds = 0;
    bool acceptable = false;  // jeaug >= 3 and fps >= 30
    std::vector<CategoryRow> per_category;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

struct EvalResult {
    SummaryTable summary;
    std::vector<RunRecord> records;  // with scores filled in for successful videos
};

struct RunOutcome {
    std::filesystem::path run_dir;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;  // not started because of a stop request

    int exit_code() const noexcept { return failed == 0 && skipped == 0 ? 0 : 2; }
};

struct AblationVariant {
    std::string name;
    AblationFlags flags;
};

struct AblationRow {
    std::string name;
    AblationFlags flags;
    SummaryTable summary;
    std::optional<double> au_delta, jeaug_delta, iou_delta, qa_delta;
    std::vector<std::string> changed_artifacts;  // relative to the first variant
};

struct AblationReport {
    std::vector<AblationRow> rows;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

namespace bench {

inline constexpr int exit_ok = 0;
inline constexpr int exit_partial = 2;
inline constexpr int exit_usage = 64;

/// Mock backend from the rule table when cfg.mock, else one HTTP client per role.
Gateway make_gateway(const BenchConfig& cfg);

VideoInput prepare_video(const BenchConfig& cfg, const VideoAnnotation& annotation);

/// Runs every annotated video on a pool of cfg.workers threads and writes
/// one record per video plus summary.json. A set `stop` flag lets in-flight
/// videos finish and skips the rest.
RunOutcome cmd_run(const BenchConfig& cfg, const Gateway& gateway, const std::atomic<bool>* stop = nullptr);

/// Scores a finished run. Only the judge role is contacted.
EvalResult cmd_eval(const std::filesystem::path& run_dir, const std::vector<VideoAnnotation>& annotations,
                    const Gateway& judge);

SummaryTable summarize(const std::vector<RunRecord>& scored, const std::vector<VideoAnnotation>& annotations);

/// The base switches followed by one variant per disabled switch.
std::vector<AblationVariant> standard_variants();

/// Runs and scores each variant under run id "<run_id>-<name>"; deltas and
/// artifact differences are taken against the first variant.
AblationReport cmd_ablate(const BenchConfig& base, const std::vector<AblationVariant>& variants,
                          const Gateway& gateway);

/// Names of the stage artifacts that differ between two reports.
std::vector<std::string> artifact_differences(const AnomalyReport& a, const AnomalyReport& b);

/// Problems found in annotations, frames and embedding files; empty when clean.
std::vector<std::string> validate_dataset(const BenchConfig& cfg);

}  // namespace bench
}  // namespace gts
