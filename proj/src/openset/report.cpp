#include "rfaug/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace rfaug::report {

namespace {

constexpr double width = 640, height = 420;
constexpr double left = 70, right = 160, top = 40, bottom = 60;
const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

bool supervised(const std::vector<sweep::Row>& rows)
{
    return std::any_of(rows.begin(), rows.end(), [](const sweep::Row& r) { return r.known > 0; });
}

} // namespace

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) {
        x0 = 0;
        x1 = 1;
        y0 = 0;
        y1 = 1;
    }
    if (x1 == x0)
        x1 = x0 + 1;
    if (y1 - y0 < 1e-9) {
        y0 -= 0.05;
        y1 += 0.05;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = width - left - right, ph = height - top - bottom;
    const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    const auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                      num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
           "</text>\n";
    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
        svg += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(px(xv)) + "\" y2=\"" +
               num(top + ph + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(top + ph + 18) + "\" text-anchor=\"middle\">" +
               num(xv) + "</text>\n";
        svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
               num(py(yv)) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
               "</text>\n";
    }
    svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 15) + "\" text-anchor=\"middle\">" +
           escape(x_label) + "</text>\n";
    svg += "<text transform=\"translate(18," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           escape(y_label) + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const std::string color = palette[si % std::size(palette)];
        std::string pts;
        for (auto [x, y] : s.points)
            pts += num(px(x)) + "," + num(py(y)) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        for (auto [x, y] : s.points)
            svg += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
        const double ly = top + 14 + 20.0 * static_cast<double>(si);
        svg += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 36) +
               "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(left + pw + 42) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<Figure> sweep_figures(const std::vector<sweep::Row>& rows, const std::vector<sweep::DeltaRow>& deltas)
{
    sweep::SweepResult r;
    r.rows = rows;
    const bool by_known = supervised(rows);
    std::map<std::string, std::vector<sweep::ExperimentResult>> per_method;
    for (auto& e : r.summarize(by_known))
        per_method[e.method].push_back(e);

    std::vector<Figure> out;
    const std::string axis = by_known ? "|K|" : "|A|";
    for (const auto& [method, results] : per_method) {
        Series aug{"augmented", {}}, nonaug{"non-augmented", {}};
        for (const auto& e : results) {
            const double x = static_cast<double>(e.size);
            if (!e.accuracy_aug_per_seed.empty())
                aug.points.push_back({x, e.accuracy_aug});
            if (!e.accuracy_nonaug_per_seed.empty())
                nonaug.points.push_back({x, e.accuracy_nonaug});
        }
        out.push_back({"accuracy_vs_" + std::string(by_known ? "K" : "A") + "_" + method + ".svg",
                       line_plot_svg("Test accuracy, " + method + " augmentation", "number of transmitters " + axis,
                                     "accuracy", {aug, nonaug})});
    }
    if (!deltas.empty()) {
        Series s{"validation accuracy", {}};
        for (const auto& d : deltas)
            if (d.val_accuracy)
                s.points.push_back({d.delta, *d.val_accuracy});
        std::sort(s.points.begin(), s.points.end());
        out.push_back({"delta_sweep.svg", line_plot_svg("Ellipsoidal shell thickness sweep", "delta",
                                                        "tuning-set accuracy", {s})});
    }
    return out;
}

std::string summary_table(const std::vector<sweep::Row>& rows)
{
    sweep::SweepResult r;
    r.rows = rows;
    const bool by_known = supervised(rows);
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %5s %6s %10s %10s %8s\n", "method", by_known ? "|K|" : "|A|", "seeds",
                  "nonaug", "aug", "gain");
    out += line;
    for (const auto& e : r.summarize(by_known)) {
        std::snprintf(line, sizeof line, "%-12s %5zu %6zu %10.4f %10.4f %+8.4f\n", e.method.c_str(), e.size,
                      e.seeds.size(), e.accuracy_nonaug, e.accuracy_aug, e.accuracy_aug - e.accuracy_nonaug);
        out += line;
    }
    return out;
}

} // namespace rfaug::report
