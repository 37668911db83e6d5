#include "openlearner/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace openlearner::data {

using models::EngagementLabel;
using models::EventModel;
using models::EventTopic;
using models::KnowledgeComponent;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

struct RowError {
    std::string reason;
};

double parse_double(const std::string& text, const char* what) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw RowError{std::string(what) + " is not a finite number: '" + text + "'"};
    }
    return value;
}

std::int64_t parse_int(const std::string& text, const char* what) {
    std::int64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw RowError{std::string(what) + " is not an integer: '" + text + "'"};
    }
    return value;
}

std::string format_double(double value) {
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

} // namespace

// --- manifest ----------------------------------------------------------------

DatasetManifest DatasetManifest::from_json(const nlohmann::json& doc) {
    DatasetManifest manifest;
    manifest.name = doc.at("name").get<std::string>();
    for (const auto& item : doc.at("files")) {
        manifest.files.push_back({item.at("name").get<std::string>(),
                                  item.at("url").get<std::string>(),
                                  item.at("sha256").get<std::string>()});
    }
    if (doc.contains("cache_dir")) {
        manifest.cache_dir = doc.at("cache_dir").get<std::string>();
    }
    return manifest;
}

nlohmann::ordered_json DatasetManifest::to_json() const {
    nlohmann::ordered_json doc;
    doc["name"] = name;
    nlohmann::ordered_json files_json = nlohmann::ordered_json::array();
    for (const auto& file : files) {
        files_json.push_back({{"name", file.name}, {"url", file.url}, {"sha256", file.sha256}});
    }
    doc["files"] = files_json;
    if (!cache_dir.empty()) {
        doc["cache_dir"] = cache_dir.string();
    }
    return doc;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw DataError("cannot open manifest " + manifest_path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    try {
        return from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest " + manifest_path.string() + " misses a field: " + e.what());
    }
}

// --- catalog -----------------------------------------------------------------

KcCatalog KcCatalog::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open topic catalog " + path.string());
    }
    KcCatalog catalog;
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("topic catalog " + path.string() + " is empty");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() < 2) {
            throw DataError("topic catalog " + path.string() + " line " +
                            std::to_string(line_no) + " needs kc_id,title");
        }
        KnowledgeComponent kc;
        try {
            kc.id = parse_int(trim(fields[0]), "kc_id");
        } catch (const RowError& e) {
            throw DataError("topic catalog " + path.string() + " line " +
                            std::to_string(line_no) + ": " + e.reason);
        }
        kc.title = trim(fields[1]);
        if (fields.size() > 2) {
            kc.description = trim(fields[2]);
        }
        if (kc.title.empty()) {
            throw DataError("topic catalog " + path.string() + " line " +
                            std::to_string(line_no) + " has an empty title");
        }
        catalog.entries[kc.id] = std::move(kc);
    }
    return catalog;
}

KnowledgeComponent KcCatalog::resolve(std::int64_t kc_id) const {
    const auto it = entries.find(kc_id);
    if (it != entries.end()) {
        return it->second;
    }
    return {kc_id, "kc-" + std::to_string(kc_id), ""};
}

// --- column mapping ----------------------------------------------------------

ColumnMapping ColumnMapping::from_json(const nlohmann::json& doc) {
    ColumnMapping mapping;
    if (doc.contains("learner_id")) mapping.learner_id = doc.at("learner_id").get<std::string>();
    if (doc.contains("video_id")) mapping.video_id = doc.at("video_id").get<std::string>();
    if (doc.contains("part")) mapping.part = doc.at("part").get<std::string>();
    if (doc.contains("timestamp")) mapping.timestamp = doc.at("timestamp").get<std::string>();
    if (doc.contains("label")) mapping.label = doc.at("label").get<std::string>();
    if (doc.contains("topics")) {
        mapping.topic_columns.clear();
        for (const auto& pair : doc.at("topics")) {
            mapping.topic_columns.emplace_back(pair.at(0).get<std::string>(),
                                               pair.at(1).get<std::string>());
        }
    }
    return mapping;
}

nlohmann::ordered_json ColumnMapping::to_json() const {
    nlohmann::ordered_json doc;
    doc["learner_id"] = learner_id;
    doc["video_id"] = video_id;
    doc["part"] = part;
    doc["timestamp"] = timestamp;
    doc["label"] = label;
    nlohmann::ordered_json topics = nlohmann::ordered_json::array();
    for (const auto& [topic_col, cov_col] : topic_columns) {
        topics.push_back({topic_col, cov_col});
    }
    doc["topics"] = topics;
    return doc;
}

// --- parse -------------------------------------------------------------------

namespace {

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::filesystem::path& file) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        std::string available;
        for (const auto& col : header) {
            if (!available.empty()) available += ", ";
            available += col;
        }
        throw DataError("column '" + name + "' not found in " + file.string() +
                        "; available headers: " + available);
    }
    return static_cast<std::size_t>(it - header.begin());
}

const std::string& field_at(const std::vector<std::string>& fields, std::size_t index) {
    if (index >= fields.size()) {
        throw RowError{"row has too few fields"};
    }
    return fields[index];
}

} // namespace

ParseResult parse_csv(const std::filesystem::path& file, const ColumnMapping& mapping,
                      const KcCatalog* catalog) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open interactions file " + file.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("interactions file " + file.string() + " is empty");
    }
    std::vector<std::string> header = split_fields(line);
    for (auto& col : header) {
        col = trim(col);
    }

    const std::size_t idx_learner = column_index(header, mapping.learner_id, file);
    const std::size_t idx_video = column_index(header, mapping.video_id, file);
    const std::size_t idx_part = column_index(header, mapping.part, file);
    const std::size_t idx_time = column_index(header, mapping.timestamp, file);
    const std::size_t idx_label = column_index(header, mapping.label, file);
    std::vector<std::pair<std::size_t, std::size_t>> topic_idx;
    topic_idx.reserve(mapping.topic_columns.size());
    for (const auto& [topic_col, cov_col] : mapping.topic_columns) {
        topic_idx.emplace_back(column_index(header, topic_col, file),
                               column_index(header, cov_col, file));
    }

    ParseResult result;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        result.total_rows += 1;
        const auto fields = split_fields(line);
        try {
            EventModel event;
            const std::string learner_id = trim(field_at(fields, idx_learner));
            if (learner_id.empty()) {
                throw RowError{"empty learner id"};
            }
            event.resource_id = trim(field_at(fields, idx_video));
            const auto part = parse_int(trim(field_at(fields, idx_part)), "part");
            if (part < 1) {
                throw RowError{"part must be >= 1"};
            }
            event.part = static_cast<int>(part);
            event.timestamp = parse_double(trim(field_at(fields, idx_time)), "timestamp");

            const std::string label_text = trim(field_at(fields, idx_label));
            EngagementLabel label;
            if (label_text == "1") {
                label = EngagementLabel::engaged;
            } else if (label_text == "0") {
                label = EngagementLabel::not_engaged;
            } else {
                throw RowError{"label must be 0 or 1, got '" + label_text + "'"};
            }

            std::set<std::int64_t> seen;
            for (const auto& [ti, ci] : topic_idx) {
                const std::string topic_text =
                    ti < fields.size() ? trim(fields[ti]) : std::string{};
                if (topic_text.empty()) {
                    continue; // unused topic slot
                }
                const auto kc_id = parse_int(topic_text, "topic id");
                const double coverage = parse_double(trim(field_at(fields, ci)), "coverage");
                if (coverage < 0.0) {
                    throw RowError{"coverage must be >= 0"};
                }
                if (coverage == 0.0) {
                    continue; // listed but not actually covered
                }
                if (!seen.insert(kc_id).second) {
                    throw RowError{"duplicate topic id " + std::to_string(kc_id)};
                }
                EventTopic topic;
                topic.kc = catalog ? catalog->resolve(kc_id)
                                   : KnowledgeComponent{kc_id, "kc-" + std::to_string(kc_id), ""};
                topic.presence = 1.0;
                topic.depth = coverage;
                event.topics.push_back(std::move(topic));
            }
            if (event.topics.empty()) {
                throw RowError{"no topics with positive coverage"};
            }
            event.validate(topic_idx.size());
            result.streams[learner_id].emplace_back(std::move(event), label);
        } catch (const RowError& e) {
            result.rejects.push_back({line_no, e.reason, line});
        }
    }

    if (result.total_rows > 0 &&
        static_cast<double>(result.rejects.size()) > 0.01 * static_cast<double>(result.total_rows)) {
        throw DataError("rejected " + std::to_string(result.rejects.size()) + " of " +
                        std::to_string(result.total_rows) + " rows in " + file.string() +
                        " (more than 1%)");
    }

    for (auto& [learner_id, stream] : result.streams) {
        std::stable_sort(stream.begin(), stream.end(), [](const auto& a, const auto& b) {
            if (a.first.timestamp != b.first.timestamp) {
                return a.first.timestamp < b.first.timestamp;
            }
            if (a.first.resource_id != b.first.resource_id) {
                return a.first.resource_id < b.first.resource_id;
            }
            return a.first.part < b.first.part;
        });
    }
    return result;
}

void write_rejects_report(const std::filesystem::path& path,
                          std::span<const RejectedRow> rejects) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write rejects report " + path.string());
    }
    for (const auto& reject : rejects) {
        nlohmann::ordered_json doc;
        doc["line_no"] = reject.line_no;
        doc["reason"] = reject.reason;
        doc["raw"] = reject.raw;
        out << doc.dump() << '\n';
    }
}

void write_csv(const LearnerStreams& streams, const std::filesystem::path& path,
               const ColumnMapping& mapping) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << mapping.learner_id << ',' << mapping.video_id << ',' << mapping.part << ','
        << mapping.timestamp << ',' << mapping.label;
    for (const auto& [topic_col, cov_col] : mapping.topic_columns) {
        out << ',' << topic_col << ',' << cov_col;
    }
    out << '\n';
    for (const auto& [learner_id, stream] : streams) {
        for (const auto& [event, label] : stream) {
            out << learner_id << ',' << event.resource_id << ',' << event.part << ','
                << format_double(event.timestamp) << ','
                << (models::is_engaged(label) ? '1' : '0');
            for (std::size_t slot = 0; slot < mapping.topic_columns.size(); ++slot) {
                if (slot < event.topics.size()) {
                    out << ',' << event.topics[slot].kc.id << ','
                        << format_double(event.topics[slot].depth);
                } else {
                    out << ",,";
                }
            }
            out << '\n';
        }
    }
}

// --- split -------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        hash ^= static_cast<std::uint8_t>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

LearnerStreams split(const LearnerStreams& streams, Fold fold,
                     const std::map<std::string, Fold>* assignment) {
    LearnerStreams out;
    for (const auto& [learner_id, stream] : streams) {
        Fold assigned;
        if (assignment != nullptr) {
            const auto it = assignment->find(learner_id);
            if (it == assignment->end()) {
                throw DataError("learner '" + learner_id + "' missing from the split assignment");
            }
            assigned = it->second;
        } else {
            assigned = fnv1a64(learner_id) % 5 == 0 ? Fold::test : Fold::train;
        }
        if (assigned == fold) {
            out.emplace(learner_id, stream);
        }
    }
    return out;
}

} // namespace openlearner::data
