#pragma once

#include <map>
#include <span>
#include <string>

#include "openlearner/models.hpp"

namespace openlearner::viz {

enum class Kind {
    bar,
    dot,
    line,
    pie,
    rose,
    bubble,
    treemap,
    radar,
    wordcloud,
};

Kind kind_from_string(std::string_view name);
std::string_view to_string(Kind kind);

struct VizSpec {
    Kind kind = Kind::bar;
    int top_k = 15;
    int width = 640;
    int height = 480;
    std::string title;

    void validate() const; // width/height >= 100, top_k >= 1
};

/// Render a state snapshot as a standalone SVG document. Every mark carries
/// data-kc / data-mean / data-variance attributes plus a hover title, so the
/// encodings can be parsed back out. Deterministic: identical inputs yield
/// byte-identical output. Throws ValueError on an empty snapshot and for
/// kind=line (which needs a history).
std::string render(std::span<const models::SnapshotEntry> snapshot, const VizSpec& spec);

/// Render a belief-evolution line chart from a history. Only valid for
/// kind=line; throws ValueError otherwise or when the history is empty.
std::string render(const models::LearnerHistory& history,
                   const std::map<std::int64_t, std::string>& titles, const VizSpec& spec);

/// Wrap an SVG document into a single self-contained HTML page (no external
/// references; tooltips are the SVG-native hover titles).
std::string export_html(const std::string& svg, const VizSpec& spec);

} // namespace openlearner::viz
