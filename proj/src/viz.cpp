#include "openlearner/viz.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace openlearner::viz {

using models::SnapshotEntry;

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kOpacityFloor = 0.15;

// margins around the plot area
constexpr double kTop = 42.0;
constexpr double kBottom = 34.0;
constexpr double kSide = 24.0;

const char* kPalette[] = {"#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b",
                          "#eeca3b", "#b279a2", "#ff9da6", "#9d755d", "#bab0ac"};
constexpr const char* kInk = "#1f477d";

std::string fmt(double value) {
    if (value == 0.0) {
        return "0"; // avoid "-0"
    }
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

double clip_nonneg(double mean) { return mean < 0.0 ? 0.0 : mean; }

struct Frame {
    double x0, y0, w, h; // plot area
};

class Svg {
public:
    Svg(const VizSpec& spec, std::string_view legend) : spec_(spec) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
             << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << " "
             << spec.height << "\">\n";
        out_ << "<metadata>{\"kind\":\"" << to_string(spec.kind)
             << "\",\"opacity_clamp\":[" << fmt(kOpacityFloor)
             << ",1],\"negative_means_clipped\":true}</metadata>\n";
        out_ << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
             << "\" fill=\"#ffffff\"/>\n";
        if (!spec.title.empty()) {
            out_ << "<text x=\"" << fmt(spec.width / 2.0)
                 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                    "font-size=\"16\" fill=\"#222222\">"
                 << xml_escape(spec.title) << "</text>\n";
        }
        if (!legend.empty()) {
            out_ << "<text x=\"" << fmt(kSide) << "\" y=\"" << fmt(spec.height - 10.0)
                 << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#666666\">"
                 << xml_escape(legend) << "</text>\n";
        }
    }

    Frame frame() const {
        return {kSide, kTop, spec_.width - 2.0 * kSide, spec_.height - kTop - kBottom};
    }

    // opening tag attributes for an annotated mark, shared by all kinds
    std::string annotation(const SnapshotEntry& e) const {
        return " data-kc=\"" + std::to_string(e.kc_id) + "\" data-mean=\"" + fmt(e.mean) +
               "\" data-variance=\"" + fmt(e.variance) + "\"";
    }

    std::string tooltip(const SnapshotEntry& e) const {
        return "<title>" + xml_escape(e.title) + " | mean " + fmt(e.mean) + " | variance " +
               fmt(e.variance) + "</title>";
    }

    Svg& raw(const std::string& s) {
        out_ << s;
        return *this;
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    const VizSpec& spec_;
    std::ostringstream out_;
};

double max_clipped_mean(std::span<const SnapshotEntry> entries) {
    double m = 0.0;
    for (const auto& e : entries) {
        m = std::max(m, clip_nonneg(e.mean));
    }
    return m > 0.0 ? m : 1.0;
}

double max_variance(std::span<const SnapshotEntry> entries) {
    double v = 0.0;
    for (const auto& e : entries) {
        v = std::max(v, e.variance);
    }
    return v > 0.0 ? v : 1.0;
}

// dark = low variance
double variance_opacity(double variance, double variance_max) {
    return std::clamp(1.0 - variance / variance_max, kOpacityFloor, 1.0);
}

std::string axis_label(const Svg&, const Frame& f, double cx, const std::string& text) {
    return "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(f.y0 + f.h + 14.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\" "
           "fill=\"#444444\">" +
           xml_escape(text) + "</text>\n";
}

std::string shorten(const std::string& title) {
    if (title.size() <= 14) {
        return title;
    }
    return title.substr(0, 12) + "..";
}

// --- individual renderers ---------------------------------------------------

std::string render_bar_or_dot(std::span<const SnapshotEntry> entries, const VizSpec& spec,
                              bool bars) {
    Svg svg(spec, "y = mean, whiskers = mean +/- 2*sqrt(variance); negative means clipped to 0");
    const Frame f = svg.frame();
    const double scale = max_clipped_mean(entries);
    const double n = static_cast<double>(entries.size());
    const double slot = f.w / n;

    auto y_of = [&](double value) {
        const double unit = std::clamp(value / scale, 0.0, 1.0);
        return f.y0 + f.h - unit * f.h;
    };

    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const double cx = f.x0 + (static_cast<double>(i) + 0.5) * slot;
        const double sd2 = 2.0 * std::sqrt(e.variance);
        const double y_top = y_of(e.mean + sd2);
        const double y_bottom = y_of(e.mean - sd2);
        if (bars) {
            const double height = clip_nonneg(e.mean) / scale * f.h;
            const double width = 0.7 * slot;
            std::string rect = "<rect x=\"" + fmt(cx - width / 2.0) + "\" y=\"" +
                               fmt(f.y0 + f.h - height) + "\" width=\"" + fmt(width) +
                               "\" height=\"" + fmt(height) + "\" fill=\"" + kInk + "\"" +
                               svg.annotation(e) + ">" + svg.tooltip(e) + "</rect>\n";
            svg.raw(rect);
        } else {
            std::string dot = "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(y_of(e.mean)) +
                              "\" r=\"5\" fill=\"" + kInk + "\"" + svg.annotation(e) + ">" +
                              svg.tooltip(e) + "</circle>\n";
            svg.raw(dot);
        }
        svg.raw("<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(y_top) + "\" x2=\"" + fmt(cx) +
                "\" y2=\"" + fmt(y_bottom) + "\" stroke=\"#555555\" stroke-width=\"1\"/>\n");
        svg.raw(axis_label(svg, f, cx, shorten(e.title)));
    }
    return svg.finish();
}

std::string render_bubble(std::span<const SnapshotEntry> entries, const VizSpec& spec) {
    Svg svg(spec, "radius ~ mean (negatives clipped); fill opacity = clamp(1 - variance/max, "
                  "0.15, 1), dark = low variance");
    const Frame f = svg.frame();
    const double scale = max_clipped_mean(entries);
    const double vmax = max_variance(entries);
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(entries.size()))));
    const auto rows = (entries.size() + cols - 1) / cols;
    const double cw = f.w / static_cast<double>(cols);
    const double ch = f.h / static_cast<double>(rows);
    const double rmax = 0.45 * std::min(cw, ch);

    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const double cx = f.x0 + (static_cast<double>(i % cols) + 0.5) * cw;
        const double cy = f.y0 + (static_cast<double>(i / cols) + 0.5) * ch;
        const double radius = clip_nonneg(e.mean) / scale * rmax;
        svg.raw("<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(radius) +
                "\" fill=\"" + kInk + "\" fill-opacity=\"" +
                fmt(variance_opacity(e.variance, vmax)) + "\"" + svg.annotation(e) + ">" +
                svg.tooltip(e) + "</circle>\n");
        svg.raw("<text x=\"" + fmt(cx) + "\" y=\"" + fmt(cy + rmax + 10.0) +
                "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\" "
                "fill=\"#444444\">" +
                xml_escape(shorten(e.title)) + "</text>\n");
    }
    return svg.finish();
}

std::string wedge_path(double cx, double cy, double r, double a0, double a1) {
    const double x0 = cx + r * std::cos(a0);
    const double y0 = cy + r * std::sin(a0);
    const double x1 = cx + r * std::cos(a1);
    const double y1 = cy + r * std::sin(a1);
    const int large = (a1 - a0) > kPi ? 1 : 0;
    return "M" + fmt(cx) + " " + fmt(cy) + " L" + fmt(x0) + " " + fmt(y0) + " A" + fmt(r) + " " +
           fmt(r) + " 0 " + std::to_string(large) + " 1 " + fmt(x1) + " " + fmt(y1) + " Z";
}

std::string render_rose(std::span<const SnapshotEntry> entries, const VizSpec& spec) {
    Svg svg(spec, "sector radius ~ mean (negatives clipped); fill opacity = clamp(1 - "
                  "variance/max, 0.15, 1), dark = low variance");
    const Frame f = svg.frame();
    const double scale = max_clipped_mean(entries);
    const double vmax = max_variance(entries);
    const double cx = f.x0 + f.w / 2.0;
    const double cy = f.y0 + f.h / 2.0;
    const double rmax = 0.45 * std::min(f.w, f.h);
    const double step = 2.0 * kPi / static_cast<double>(entries.size());

    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const double a0 = -kPi / 2.0 + step * static_cast<double>(i);
        const double radius = clip_nonneg(e.mean) / scale * rmax;
        svg.raw("<path d=\"" + wedge_path(cx, cy, radius, a0, a0 + step) + "\" fill=\"" + kInk +
                "\" fill-opacity=\"" + fmt(variance_opacity(e.variance, vmax)) +
                "\" stroke=\"#ffffff\" stroke-width=\"1\"" + svg.annotation(e) + ">" +
                svg.tooltip(e) + "</path>\n");
    }
    return svg.finish();
}

std::string render_pie(std::span<const SnapshotEntry> entries, const VizSpec& spec) {
    Svg svg(spec, "slice angle ~ mean share (negatives clipped to 0)");
    const Frame f = svg.frame();
    const double cx = f.x0 + f.w / 2.0;
    const double cy = f.y0 + f.h / 2.0;
    const double radius = 0.45 * std::min(f.w, f.h);

    double total = 0.0;
    for (const auto& e : entries) {
        total += clip_nonneg(e.mean);
    }
    const bool uniform = total <= 0.0; // all-zero snapshot degenerates to equal slices
    double angle = -kPi / 2.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const double share =
            uniform ? 1.0 / static_cast<double>(entries.size()) : clip_nonneg(e.mean) / total;
        // keep strictly below a full turn so the arc stays well-formed
        const double sweep = std::min(share * 2.0 * kPi, 2.0 * kPi - 1e-6);
        svg.raw("<path d=\"" + wedge_path(cx, cy, radius, angle, angle + sweep) + "\" fill=\"" +
                kPalette[i % 10] + "\" stroke=\"#ffffff\" stroke-width=\"1\"" + svg.annotation(e) +
                ">" + svg.tooltip(e) + "</path>\n");
        angle += sweep;
    }
    return svg.finish();
}

struct TreemapRect {
    double x, y, w, h;
};

void treemap_layout(std::span<const SnapshotEntry> entries, std::span<const double> masses,
                    std::size_t lo, std::size_t hi, TreemapRect rect,
                    std::vector<TreemapRect>& out) {
    if (hi - lo == 1) {
        out[lo] = rect;
        return;
    }
    double total = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        total += masses[i];
    }
    // split the run into two halves of closest-to-equal mass
    double acc = 0.0;
    std::size_t cut = lo + 1;
    double best_gap = std::numeric_limits<double>::infinity();
    double running = 0.0;
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        running += masses[i];
        const double gap = std::fabs(running - total / 2.0);
        if (gap < best_gap) {
            best_gap = gap;
            cut = i + 1;
            acc = running;
        }
    }
    const double fraction = total > 0.0 ? acc / total : 0.5;
    TreemapRect first = rect;
    TreemapRect second = rect;
    if (rect.w >= rect.h) {
        first.w = rect.w * fraction;
        second.x = rect.x + first.w;
        second.w = rect.w - first.w;
    } else {
        first.h = rect.h * fraction;
        second.y = rect.y + first.h;
        second.h = rect.h - first.h;
    }
    treemap_layout(entries, masses, lo, cut, first, out);
    treemap_layout(entries, masses, cut, hi, second, out);
}

std::string render_treemap(std::span<const SnapshotEntry> entries, const VizSpec& spec) {
    Svg svg(spec, "tile area ~ mean (negatives clipped to 0)");
    const Frame f = svg.frame();
    std::vector<double> masses(entries.size());
    double total = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        masses[i] = clip_nonneg(entries[i].mean);
        total += masses[i];
    }
    if (total <= 0.0) {
        std::fill(masses.begin(), masses.end(), 1.0);
    }
    std::vector<TreemapRect> rects(entries.size());
    treemap_layout(entries, masses, 0, entries.size(), {f.x0, f.y0, f.w, f.h}, rects);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const auto& r = rects[i];
        svg.raw("<rect x=\"" + fmt(r.x) + "\" y=\"" + fmt(r.y) + "\" width=\"" + fmt(r.w) +
                "\" height=\"" + fmt(r.h) + "\" fill=\"" + kPalette[i % 10] +
                "\" stroke=\"#ffffff\" stroke-width=\"1\"" + svg.annotation(e) + ">" +
                svg.tooltip(e) + "</rect>\n");
        if (r.w > 60.0 && r.h > 16.0) {
            svg.raw("<text x=\"" + fmt(r.x + 4.0) + "\" y=\"" + fmt(r.y + 13.0) +
                    "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#ffffff\">" +
                    xml_escape(shorten(e.title)) + "</text>\n");
        }
    }
    return svg.finish();
}

std::string render_radar(std::span<const SnapshotEntry> entries, const VizSpec& spec) {
    Svg svg(spec, "red polygon = mean per axis, blue polygon = variance per axis");
    const Frame f = svg.frame();
    const double cx = f.x0 + f.w / 2.0;
    const double cy = f.y0 + f.h / 2.0;
    const double rmax = 0.42 * std::min(f.w, f.h);
    const double scale = max_clipped_mean(entries);
    const double vmax = max_variance(entries);
    const double n = static_cast<double>(entries.size());

    auto point = [&](std::size_t i, double unit) {
        const double angle = -kPi / 2.0 + 2.0 * kPi * static_cast<double>(i) / n;
        return std::pair<double, double>{cx + unit * rmax * std::cos(angle),
                                         cy + unit * rmax * std::sin(angle)};
    };

    std::string mean_points;
    std::string var_points;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto [ax, ay] = point(i, 1.0);
        svg.raw("<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(cy) + "\" x2=\"" + fmt(ax) +
                "\" y2=\"" + fmt(ay) + "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n");
        svg.raw("<text x=\"" + fmt(ax) + "\" y=\"" + fmt(ay - 4.0) +
                "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\" "
                "fill=\"#444444\">" +
                xml_escape(shorten(entries[i].title)) + "</text>\n");
        const auto [mx, my] = point(i, clip_nonneg(entries[i].mean) / scale);
        const auto [vx, vy] = point(i, entries[i].variance / vmax);
        if (!mean_points.empty()) mean_points += " ";
        mean_points += fmt(mx) + "," + fmt(my);
        if (!var_points.empty()) var_points += " ";
        var_points += fmt(vx) + "," + fmt(vy);
    }
    svg.raw("<polygon points=\"" + var_points +
            "\" fill=\"#4c78a8\" fill-opacity=\"0.25\" stroke=\"#4c78a8\" stroke-width=\"1.5\"/>\n");
    svg.raw("<polygon points=\"" + mean_points +
            "\" fill=\"#e45756\" fill-opacity=\"0.25\" stroke=\"#e45756\" stroke-width=\"1.5\"/>\n");
    // annotated vertex marks on the mean polygon
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const auto [mx, my] = point(i, clip_nonneg(e.mean) / scale);
        svg.raw("<circle cx=\"" + fmt(mx) + "\" cy=\"" + fmt(my) + "\" r=\"3\" fill=\"#e45756\"" +
                svg.annotation(e) + ">" + svg.tooltip(e) + "</circle>\n");
    }
    return svg.finish();
}

std::string render_wordcloud(std::span<const SnapshotEntry> entries, const VizSpec& spec) {
    Svg svg(spec, "font size ~ mean (negatives clipped); fill opacity = clamp(1 - variance/max, "
                  "0.15, 1), dark = low variance");
    const Frame f = svg.frame();
    const double scale = max_clipped_mean(entries);
    const double vmax = max_variance(entries);
    const double cx = f.x0 + f.w / 2.0;
    const double cy = f.y0 + f.h / 2.0;

    struct Box {
        double x0, y0, x1, y1;
    };
    std::vector<Box> placed;
    auto collides = [&](const Box& b) {
        for (const auto& other : placed) {
            if (b.x0 < other.x1 && other.x0 < b.x1 && b.y0 < other.y1 && other.y0 < b.y1) {
                return true;
            }
        }
        return false;
    };

    for (const auto& e : entries) {
        const double font = 10.0 + 26.0 * clip_nonneg(e.mean) / scale;
        const double half_w = 0.31 * font * static_cast<double>(e.title.size());
        const double half_h = 0.55 * font;
        double px = cx;
        double py = cy;
        // deterministic Archimedean spiral, first position without overlap
        for (int step = 0; step < 4000; ++step) {
            const double angle = 0.35 * static_cast<double>(step);
            const double radius = 1.1 * static_cast<double>(step) * 0.35;
            px = cx + radius * std::cos(angle);
            py = cy + radius * std::sin(angle);
            Box b{px - half_w, py - half_h, px + half_w, py + half_h};
            const bool inside = b.x0 >= f.x0 && b.x1 <= f.x0 + f.w && b.y0 >= f.y0 &&
                                b.y1 <= f.y0 + f.h;
            if (inside && !collides(b)) {
                break;
            }
        }
        placed.push_back({px - half_w, py - half_h, px + half_w, py + half_h});
        svg.raw("<text x=\"" + fmt(px) + "\" y=\"" + fmt(py + 0.35 * font) +
                "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"" + fmt(font) +
                "\" fill=\"" + kInk + "\" fill-opacity=\"" +
                fmt(variance_opacity(e.variance, vmax)) + "\"" + svg.annotation(e) + ">" +
                svg.tooltip(e) + xml_escape(e.title) + "</text>\n");
    }
    return svg.finish();
}

} // namespace

Kind kind_from_string(std::string_view name) {
    if (name == "bar") return Kind::bar;
    if (name == "dot") return Kind::dot;
    if (name == "line") return Kind::line;
    if (name == "pie") return Kind::pie;
    if (name == "rose") return Kind::rose;
    if (name == "bubble") return Kind::bubble;
    if (name == "treemap") return Kind::treemap;
    if (name == "radar") return Kind::radar;
    if (name == "wordcloud") return Kind::wordcloud;
    throw ValueError("unknown visualisation kind '" + std::string(name) +
                     "'; expected one of bar, dot, line, pie, rose, bubble, treemap, radar, "
                     "wordcloud");
}

std::string_view to_string(Kind kind) {
    switch (kind) {
    case Kind::bar: return "bar";
    case Kind::dot: return "dot";
    case Kind::line: return "line";
    case Kind::pie: return "pie";
    case Kind::rose: return "rose";
    case Kind::bubble: return "bubble";
    case Kind::treemap: return "treemap";
    case Kind::radar: return "radar";
    case Kind::wordcloud: return "wordcloud";
    }
    return "bar";
}

void VizSpec::validate() const {
    if (width < 100 || height < 100) {
        throw ValueError("visualisation width and height must be >= 100 pixels");
    }
    if (top_k < 1) {
        throw ValueError("visualisation top_k must be >= 1");
    }
}

std::string render(std::span<const SnapshotEntry> snapshot, const VizSpec& spec) {
    spec.validate();
    if (spec.kind == Kind::line) {
        throw ValueError("line rendering needs a learner history, not a snapshot");
    }
    if (snapshot.empty()) {
        throw ValueError("nothing to visualise: the snapshot is empty");
    }
    auto entries = snapshot;
    if (entries.size() > static_cast<std::size_t>(spec.top_k)) {
        entries = entries.first(static_cast<std::size_t>(spec.top_k));
    }
    switch (spec.kind) {
    case Kind::bar: return render_bar_or_dot(entries, spec, true);
    case Kind::dot: return render_bar_or_dot(entries, spec, false);
    case Kind::bubble: return render_bubble(entries, spec);
    case Kind::rose: return render_rose(entries, spec);
    case Kind::pie: return render_pie(entries, spec);
    case Kind::treemap: return render_treemap(entries, spec);
    case Kind::radar: return render_radar(entries, spec);
    case Kind::wordcloud: return render_wordcloud(entries, spec);
    case Kind::line: break;
    }
    throw ValueError("unsupported visualisation kind");
}

std::string render(const models::LearnerHistory& history,
                   const std::map<std::int64_t, std::string>& titles, const VizSpec& spec) {
    spec.validate();
    if (spec.kind != Kind::line) {
        throw ValueError("history rendering is only available for kind=line");
    }
    if (history.rows.empty()) {
        throw ValueError("nothing to visualise: the history is empty");
    }

    // group rows per KC, keep stream order within each KC
    std::map<std::int64_t, std::vector<const models::LearnerHistory::Row*>> series;
    std::int64_t idx_min = history.rows.front().event_index;
    std::int64_t idx_max = idx_min;
    for (const auto& row : history.rows) {
        series[row.kc_id].push_back(&row);
        idx_min = std::min(idx_min, row.event_index);
        idx_max = std::max(idx_max, row.event_index);
    }

    // keep the top_k series by final mean, descending; ties by KC id
    std::vector<std::pair<std::int64_t, double>> ranked;
    ranked.reserve(series.size());
    for (const auto& [kc_id, rows] : series) {
        ranked.emplace_back(kc_id, rows.back()->mean);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<std::size_t>(spec.top_k)) {
        ranked.resize(static_cast<std::size_t>(spec.top_k));
    }

    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();
    for (const auto& [kc_id, last_mean] : ranked) {
        for (const auto* row : series[kc_id]) {
            const double sd2 = 2.0 * std::sqrt(row->variance);
            y_min = std::min(y_min, row->mean - sd2);
            y_max = std::max(y_max, row->mean + sd2);
        }
    }
    if (y_max <= y_min) {
        y_max = y_min + 1.0;
    }

    Svg svg(spec, "x = event index, line = mean, band = mean +/- 2*sqrt(variance)");
    const Frame f = svg.frame();
    const double span = std::max<double>(1.0, static_cast<double>(idx_max - idx_min));
    auto x_of = [&](std::int64_t index) {
        return f.x0 + (static_cast<double>(index - idx_min) / span) * f.w;
    };
    auto y_of = [&](double value) {
        return f.y0 + f.h - (value - y_min) / (y_max - y_min) * f.h;
    };

    for (std::size_t s = 0; s < ranked.size(); ++s) {
        const auto kc_id = ranked[s].first;
        const auto& rows = series[kc_id];
        const char* color = kPalette[s % 10];

        std::string band;
        for (const auto* row : rows) {
            if (!band.empty()) band += " ";
            band += fmt(x_of(row->event_index)) + "," +
                    fmt(y_of(row->mean + 2.0 * std::sqrt(row->variance)));
        }
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            band += " " + fmt(x_of((*it)->event_index)) + "," +
                    fmt(y_of((*it)->mean - 2.0 * std::sqrt((*it)->variance)));
        }
        svg.raw("<polygon points=\"" + band + "\" fill=\"" + color +
                "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n");

        std::string points;
        for (const auto* row : rows) {
            if (!points.empty()) points += " ";
            points += fmt(x_of(row->event_index)) + "," + fmt(y_of(row->mean));
        }
        const auto* last = rows.back();
        const auto title_it = titles.find(kc_id);
        SnapshotEntry note{kc_id,
                           title_it != titles.end() ? title_it->second
                                                    : "kc-" + std::to_string(kc_id),
                           last->mean, last->variance};
        svg.raw("<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
                "\" stroke-width=\"2\"" + svg.annotation(note) + ">" + svg.tooltip(note) +
                "</polyline>\n");
        svg.raw("<text x=\"" + fmt(x_of(last->event_index) + 4.0) + "\" y=\"" +
                fmt(y_of(last->mean)) + "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"" +
                color + "\">" + xml_escape(shorten(note.title)) + "</text>\n");
    }
    return svg.finish();
}

std::string export_html(const std::string& svg, const VizSpec& spec) {
    std::string title = spec.title.empty() ? std::string("learner state") : spec.title;
    std::string html;
    html += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>";
    html += xml_escape(title);
    html += "</title>\n<style>body{font-family:sans-serif;margin:2rem;background:#fafafa}"
            "main{background:#ffffff;display:inline-block;padding:1rem;border:1px solid #dddddd}"
            "</style>\n</head>\n<body>\n<main>\n";
    html += svg;
    html += "</main>\n</body>\n</html>\n";
    return html;
}

} // namespace openlearner::viz
