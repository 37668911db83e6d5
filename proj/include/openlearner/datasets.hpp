#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "openlearner/models.hpp"

namespace openlearner::data {

/// One downloadable dataset file with its pinned digest.
struct ManifestFile {
    std::string name;
    std::string url;    // file://, http:// or https://
    std::string sha256; // lowercase hex
};

/// Where a dataset comes from and where it is cached. Files land under
/// <cache_dir>/<name>/<file name> and are verified against their digests.
struct DatasetManifest {
    std::string name; // e.g. "peek-v1"
    std::vector<ManifestFile> files;
    std::filesystem::path cache_dir;

    static DatasetManifest from_json(const nlohmann::json& doc);
    nlohmann::ordered_json to_json() const;
    static DatasetManifest load(const std::filesystem::path& manifest_path);
};

struct FetchOptions {
    int attempts = 3; // per file, for transient transport failures
    std::chrono::milliseconds initial_backoff{1000};
    bool verbose = false;
};

/// Ensure every manifest file is present in the cache with a matching
/// digest. A warm cache makes no network requests; a corrupted cache entry
/// is re-downloaded once. Digest mismatches after download raise DataError
/// naming the file and both digests. Returns the verified local paths in
/// manifest order.
std::vector<std::filesystem::path> fetch(const DatasetManifest& manifest,
                                         const FetchOptions& options = {});

/// SHA-256 as lowercase hex.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

/// Which CSV column holds which interaction field. Topic/coverage column
/// pairs list the up-to-five topic slots of a row.
struct ColumnMapping {
    std::string learner_id = "learner_id";
    std::string video_id = "video_id";
    std::string part = "part";
    std::string timestamp = "timestamp";
    std::string label = "label";
    std::vector<std::pair<std::string, std::string>> topic_columns = {
        {"topic_1", "cov_1"}, {"topic_2", "cov_2"}, {"topic_3", "cov_3"},
        {"topic_4", "cov_4"}, {"topic_5", "cov_5"},
    };

    static ColumnMapping from_json(const nlohmann::json& doc);
    nlohmann::ordered_json to_json() const;
};

/// Optional KC id -> title/description catalog; parsed events fall back to a
/// synthesized title when no catalog entry exists.
struct KcCatalog {
    std::map<std::int64_t, models::KnowledgeComponent> entries;

    /// CSV with header kc_id,title[,description].
    static KcCatalog load_csv(const std::filesystem::path& path);
    models::KnowledgeComponent resolve(std::int64_t kc_id) const;
};

struct RejectedRow {
    std::size_t line_no = 0; // 1-based physical line in the file
    std::string reason;
    std::string raw;
};

using LabelledEvent = std::pair<models::EventModel, models::EngagementLabel>;
using LearnerStreams = std::map<std::string, std::vector<LabelledEvent>>;

struct ParseResult {
    LearnerStreams streams;
    std::vector<RejectedRow> rejects;
    std::size_t total_rows = 0; // data rows seen (excluding the header)
};

/// Parse an interactions CSV into per-learner event streams ordered by
/// timestamp then (video_id, part). Unparseable rows are collected into the
/// rejects report; more than 1% rejects is a hard error. A missing mapped
/// column raises DataError listing the available headers.
ParseResult parse_csv(const std::filesystem::path& file,
                      const ColumnMapping& mapping = ColumnMapping{},
                      const KcCatalog* catalog = nullptr);

/// Rejects report as JSON lines {line_no, reason, raw}.
void write_rejects_report(const std::filesystem::path& path,
                          std::span<const RejectedRow> rejects);

/// Serialize streams back to the canonical CSV form; parsing the output
/// reproduces the streams exactly.
void write_csv(const LearnerStreams& streams, const std::filesystem::path& path,
               const ColumnMapping& mapping = ColumnMapping{});

enum class Fold { train, test };

/// 64-bit FNV-1a; the deterministic learner hash behind fallback splits.
std::uint64_t fnv1a64(std::string_view text);

/// Learner-level split. With an explicit assignment map (learner id ->
/// fold), follows it and raises DataError for unassigned learners; without
/// one, falls back to fnv1a64(learner_id) % 5 == 0 selecting the test fold.
LearnerStreams split(const LearnerStreams& streams, Fold fold,
                     const std::map<std::string, Fold>* assignment = nullptr);

} // namespace openlearner::data
