#pragma once

#include "gts/annotation.hpp"
#include "gts/scrutinize.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gts {

/// Outcome of one video in a batch run, plus its scores once evaluated.
struct RunRecord {
    std::string video_id;
    FrameIndex duration_frames = 0;
    std::string config_fingerprint;
    std::optional<std::string> error;     // set when the pipeline failed
    std::optional<AnomalyReport> report;  // set on success
    std::optional<MetricScores> scores;

    bool ok() const noexcept { return !error.has_value() && report.has_value(); }
    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

namespace dataset {

namespace fs = std::filesystem;

// Annotations: a JSON array of records. Errors name the record and field.
std::vector<VideoAnnotation> parse_annotations(const nlohmann::json& doc);
std::vector<VideoAnnotation> load_annotations(const fs::path& path);
void validate(const VideoAnnotation& a);
nlohmann::json to_json(const VideoAnnotation& a);
void write_annotations(const fs::path& path, const std::vector<VideoAnnotation>& annotations);

// Embedding files: "GTSEMB1\n", one JSON header line, then little-endian f32 rows.
EmbeddingMatrix read_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingMatrix load_embeddings(const fs::path& path);
void write_embeddings(std::ostream& out, const EmbeddingMatrix& m);
void write_embeddings(const fs::path& path, const EmbeddingMatrix& m);

/// Name of the frame file for index i: six-digit zero-padded, ".jpg".
std::string frame_file_name(FrameIndex i);

/// Ordered references to <frame_root>/<video_id>/<NNNNNN>.<ext>. When the
/// directory is missing and an extractor template is given, it is run first
/// with {input} and {outdir} substituted.
std::vector<std::string> resolve_frames(const std::string& video_id, FrameIndex duration_frames,
                                        const fs::path& frame_root,
                                        const std::optional<std::string>& extractor_cmd = std::nullopt,
                                        const std::optional<fs::path>& video_input = std::nullopt);

/// JSON object of category -> phrases; keys must be taxonomy categories.
PhraseBank load_phrase_bank(const fs::path& path);

nlohmann::json to_json(const SegmentReport& r);
SegmentReport segment_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnomalyReport& r, bool with_timing = true);
AnomalyReport anomaly_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetricScores& s);
MetricScores metric_scores_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Atomic write: a temporary sibling is renamed over the target.
void write_json_atomic(const fs::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const fs::path& path);

void write_record(const fs::path& run_dir, const RunRecord& record);
RunRecord load_record(const fs::path& run_dir, const std::string& video_id);
/// Every <video_id>.json in the run directory, sorted by video id.
std::vector<RunRecord> load_records(const fs::path& run_dir);

}  // namespace dataset
}  // namespace gts
