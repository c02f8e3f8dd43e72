#include "coinflip/plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace coinflip {

namespace {

constexpr const char* kTrialColour = "#7aa6d6";
constexpr const char* kMeanColour = "#1f4e8c";
constexpr const char* kTargetColour = "#c0392b";

std::string px(double x) {
    std::array<char, 32> buf{};
    if (std::abs(x) < 0.005) x = 0.0;  // avoid "-0.00"
    const auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::fixed, 2);
    return std::string(buf.data(), ptr);
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

bool has_column(const CsvTable& t, std::string_view name) {
    return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double frac(double v) const {
        if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
                const double t = std::pow(10.0, e);
                if (t >= lo * (1 - 1e-9) && t <= hi * (1 + 1e-9)) out.push_back(t);
            }
            return out;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            step = m * mag;
            if (step >= raw) break;
        }
        for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
            out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
        }
        return out;
    }
};

/// Range covering values with a little headroom; log when all positive and
/// spanning more than a decade.
Axis make_axis(const std::vector<double>& values, bool allow_log, bool from_zero) {
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    Axis a;
    if (allow_log && lo > 0.0 && hi / lo > 10.0) {
        a.log = true;
        a.lo = lo / 1.25;
        a.hi = hi * 1.25;
        return a;
    }
    if (from_zero && lo > 0.0) lo = 0.0;
    if (hi == lo) {
        const double pad = hi == 0.0 ? 1.0 : std::abs(hi) * 0.1;
        lo -= pad;
        hi += pad;
    } else {
        const double pad = (hi - lo) * 0.05;
        if (!(from_zero && lo == 0.0)) lo -= pad;
        hi += pad;
    }
    a.lo = lo;
    a.hi = hi;
    return a;
}

std::string tick_label(double v) { return format_sig6(v); }

class Svg {
public:
    Svg(int width, int height) : width_(width), height_(height) {}

    void raw(const std::string& s) { body_ += s; }

    void text(double x, double y, std::string_view s, const char* anchor = "middle",
              int size = 12, const char* extra = "") {
        body_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" +
                 std::to_string(size) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" +
                 escape(s) + "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1.0,
              const char* extra = "") {
        body_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" +
                 px(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + px(width) + "\"" +
                 extra + "/>\n";
    }

    void circle(double x, double y, double r, const char* fill) {
        body_ += "<circle cx=\"" + px(x) + "\" cy=\"" + px(y) + "\" r=\"" + px(r) + "\" fill=\"" +
                 fill + "\" fill-opacity=\"0.7\"/>\n";
    }

    void rect(double x, double y, double w, double h, const char* fill, const char* stroke = "none") {
        body_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) +
                 "\" height=\"" + px(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke,
                  double width = 2.0) {
        std::string p;
        for (const auto& [x, y] : pts) {
            if (!p.empty()) p += ' ';
            p += px(x) + "," + px(y);
        }
        body_ += "<polyline points=\"" + p + "\" fill=\"none\" stroke=\"" + stroke +
                 "\" stroke-width=\"" + px(width) + "\"/>\n";
    }

    std::string str() const {
        return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
               std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
               "\" viewBox=\"0 0 " + std::to_string(width_) + " " + std::to_string(height_) +
               "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
               body_ + "</svg>\n";
    }

private:
    int width_;
    int height_;
    std::string body_;
};

/// Plot rectangle with data axes.
struct Panel {
    double left, top, width, height;
    Axis x, y;

    double sx(double v) const { return left + x.frac(v) * width; }
    double sy(double v) const { return top + height - y.frac(v) * height; }

    void frame(Svg& svg, std::string_view title, std::string_view xlabel,
               std::string_view ylabel) const {
        svg.rect(left, top, width, height, "none", "#333333");
        for (double t : x.ticks()) {
            svg.line(sx(t), top + height, sx(t), top + height + 5, "#333333");
            svg.line(sx(t), top, sx(t), top + height, "#e5e5e5", 1.0);
            svg.text(sx(t), top + height + 18, tick_label(t), "middle", 10);
        }
        for (double t : y.ticks()) {
            svg.line(left - 5, sy(t), left, sy(t), "#333333");
            svg.line(left, sy(t), left + width, sy(t), "#e5e5e5", 1.0);
            svg.text(left - 8, sy(t) + 3, tick_label(t), "end", 10);
        }
        svg.text(left + width / 2, top - 10, title, "middle", 14);
        svg.text(left + width / 2, top + height + 38, xlabel, "middle", 12);
        const std::string rot = " transform=\"rotate(-90 " + px(left - 62) + " " +
                                px(top + height / 2) + ")\"";
        svg.text(left - 62, top + height / 2, ylabel, "middle", 12, rot.c_str());
    }
};

void legend(Svg& svg, double x, double y,
            const std::vector<std::pair<std::string, const char*>>& entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const double yy = y + static_cast<double>(i) * 16.0;
        svg.rect(x, yy - 9, 10, 10, entries[i].second);
        svg.text(x + 16, yy, entries[i].first, "start", 11);
    }
}

void require_rows(const CsvTable& t) {
    if (t.rows.empty()) throw DataError("CSV has a header but no data rows");
}

}  // namespace

PlotKind detect_plot_kind(const CsvTable& t) {
    if (has_column(t, "sample_size") && has_column(t, "kl_nats") && has_column(t, "total_energy_fj")) {
        return PlotKind::SampleSweep;
    }
    if (has_column(t, "outcome") && has_column(t, "frequency") && has_column(t, "target")) {
        return PlotKind::Histogram;
    }
    if (has_column(t, "varied_omega") && has_column(t, "best_kl_nats")) {
        return PlotKind::WeightSweep;
    }
    throw DataError("unrecognized CSV layout; expected a sweep, histogram or weight-sweep table");
}

std::string render_svg(const CsvTable& table, PlotKind kind) {
    switch (kind) {
        case PlotKind::SampleSweep: return render_sample_sweep_svg(table);
        case PlotKind::Histogram: return render_histogram_svg(table);
        case PlotKind::WeightSweep: return render_weight_sweep_svg(table);
    }
    throw DataError("unknown plot kind");
}

std::string render_sample_sweep_svg(const CsvTable& t) {
    require_rows(t);
    std::vector<double> sizes, kls, energies;
    std::map<double, std::pair<double, double>> sums;  // size -> (kl sum, energy sum)
    std::map<double, int> counts;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double n = t.number(r, "sample_size");
        const double kl = t.number(r, "kl_nats");
        const double e = t.number(r, "total_energy_fj");
        if (!(n > 0)) throw DataError("sample_size must be positive");
        sizes.push_back(n);
        kls.push_back(kl);
        energies.push_back(e);
        sums[n].first += kl;
        sums[n].second += e;
        ++counts[n];
    }
    const std::string device = has_column(t, "device") ? t.cell(0, "device") : "";

    Svg svg(1000, 420);
    const Axis x = make_axis(sizes, true, false);
    const Panel kl_panel{90, 50, 380, 300, x, make_axis(kls, false, true)};
    const Panel en_panel{590, 50, 380, 300, x, make_axis(energies, false, true)};
    kl_panel.frame(svg, "KL divergence vs samples" + (device.empty() ? "" : " (" + device + ")"),
                   "number of samples", "KL divergence (nats)");
    en_panel.frame(svg, "Energy vs samples" + (device.empty() ? "" : " (" + device + ")"),
                   "number of samples", "total energy (fJ)");

    for (std::size_t i = 0; i < sizes.size(); ++i) {
        svg.circle(kl_panel.sx(sizes[i]), kl_panel.sy(kls[i]), 3, kTrialColour);
        svg.circle(en_panel.sx(sizes[i]), en_panel.sy(energies[i]), 3, kTrialColour);
    }
    std::vector<std::pair<double, double>> kl_mean, en_mean;
    for (const auto& [n, s] : sums) {
        const double c = counts[n];
        kl_mean.emplace_back(kl_panel.sx(n), kl_panel.sy(s.first / c));
        en_mean.emplace_back(en_panel.sx(n), en_panel.sy(s.second / c));
    }
    svg.polyline(kl_mean, kMeanColour);
    svg.polyline(en_mean, kMeanColour);
    legend(svg, 380, 70, {{"trial", kTrialColour}, {"mean", kMeanColour}});
    return svg.str();
}

std::string render_histogram_svg(const CsvTable& t) {
    require_rows(t);
    std::vector<double> freq, target, all;
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        freq.push_back(t.number(r, "frequency"));
        target.push_back(t.number(r, "target"));
        labels.push_back(has_column(t, "label") ? t.cell(r, "label") : t.cell(r, "outcome"));
    }
    all = freq;
    all.insert(all.end(), target.begin(), target.end());

    Svg svg(560, 420);
    const double nb = static_cast<double>(freq.size());
    const Panel panel{80, 50, 440, 300, Axis{0.0, nb, false}, make_axis(all, false, true)};
    // Categorical x axis: draw the frame without numeric x ticks.
    svg.rect(panel.left, panel.top, panel.width, panel.height, "none", "#333333");
    for (double tk : panel.y.ticks()) {
        svg.line(panel.left - 5, panel.sy(tk), panel.left, panel.sy(tk), "#333333");
        svg.line(panel.left, panel.sy(tk), panel.left + panel.width, panel.sy(tk), "#e5e5e5");
        svg.text(panel.left - 8, panel.sy(tk) + 3, tick_label(tk), "end", 10);
    }
    svg.text(panel.left + panel.width / 2, 40, "Empirical distribution vs target", "middle", 14);
    svg.text(panel.left + panel.width / 2, panel.top + panel.height + 40, "outcome");
    const std::string rot = " transform=\"rotate(-90 22 " + px(panel.top + panel.height / 2) + ")\"";
    svg.text(22, panel.top + panel.height / 2, "probability", "middle", 12, rot.c_str());

    const double slot = panel.width / nb;
    for (std::size_t i = 0; i < freq.size(); ++i) {
        const double x0 = panel.left + slot * static_cast<double>(i);
        const double y = panel.sy(freq[i]);
        svg.rect(x0 + slot * 0.15, y, slot * 0.7, panel.sy(panel.y.lo) - y, kTrialColour);
        svg.line(x0 + slot * 0.1, panel.sy(target[i]), x0 + slot * 0.9, panel.sy(target[i]),
                 kTargetColour, 3.0);
        svg.text(x0 + slot / 2, panel.top + panel.height + 18, labels[i], "middle", 11);
    }
    legend(svg, panel.left + panel.width - 110, panel.top + 20,
           {{"empirical", kTrialColour}, {"target", kTargetColour}});
    return svg.str();
}

std::string render_weight_sweep_svg(const CsvTable& t) {
    require_rows(t);
    static const std::array<std::string, 3> names{"omega1", "omega2", "omega3"};
    Svg svg(1200, 720);
    for (std::size_t k = 0; k < names.size(); ++k) {
        std::vector<double> xs, kls, ens;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (t.cell(r, "varied_omega") != names[k]) continue;
            xs.push_back(t.number(r, names[k]));
            kls.push_back(t.number(r, "best_kl_nats"));
            ens.push_back(t.number(r, "best_energy_fj"));
        }
        if (xs.empty()) continue;
        const Axis x = make_axis(xs, true, false);
        const double left = 90 + 380.0 * static_cast<double>(k);
        const Panel kl_panel{left, 50, 280, 240, x, make_axis(kls, false, true)};
        const Panel en_panel{left, 400, 280, 240, x, make_axis(ens, false, true)};
        kl_panel.frame(svg, "best KL vs " + names[k], names[k], "KL divergence (nats)");
        en_panel.frame(svg, "energy vs " + names[k], names[k], "EN (fJ)");

        std::map<double, std::pair<double, double>> best;  // lowest-KL rep per value
        for (std::size_t i = 0; i < xs.size(); ++i) {
            svg.circle(kl_panel.sx(xs[i]), kl_panel.sy(kls[i]), 3, kTrialColour);
            svg.circle(en_panel.sx(xs[i]), en_panel.sy(ens[i]), 3, kTrialColour);
            auto it = best.find(xs[i]);
            if (it == best.end() || kls[i] < it->second.first) best[xs[i]] = {kls[i], ens[i]};
        }
        std::vector<std::pair<double, double>> kl_line, en_line;
        for (const auto& [xv, b] : best) {
            kl_line.emplace_back(kl_panel.sx(xv), kl_panel.sy(b.first));
            en_line.emplace_back(en_panel.sx(xv), en_panel.sy(b.second));
        }
        svg.polyline(kl_line, kMeanColour);
        svg.polyline(en_line, kMeanColour);
    }
    return svg.str();
}

}  // namespace coinflip
