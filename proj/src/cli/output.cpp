#include "cli/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace collapse_lab::cli {

namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json stats_column(const std::vector<engine::IterationStats>& stats, double engine::IterationStats::*field) {
    json arr = json::array();
    for (const auto& s : stats) arr.push_back(number_or_null(s.*field));
    return arr;
}

std::string escape_xml(const std::string& s) {
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

std::string fixed(double v, const char* fmt = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_number(double v) {
    if (!std::isfinite(v)) {
        return "";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const std::vector<Trajectory>& runs) {
    out << kTrajectoryHeader << '\n';
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const TrajectoryRecord& rec : runs[r].records) {
            const auto& c = rec.theta.coords;
            std::string t0, t1;
            if (rec.theta.family == FamilyId::tail_chain) {
                t0 = format_number(c[0]);
                if (c[0] == 1.0) t1 = format_number(c[2]);
            } else {
                t0 = format_number(c[0]);
                if (c.size() > 1) t1 = format_number(c[1]);
            }
            out << r << ',' << rec.t << ',' << t0 << ',' << t1 << ',' << format_number(rec.param_error) << ','
                << (rec.tv ? format_number(*rec.tv) : "") << ',' << (rec.kl ? format_number(*rec.kl) : "") << ','
                << rec.dataset_size << '\n';
        }
    }
}

std::map<std::size_t, double> mean_error_by_iteration(std::istream& csv) {
    std::string line;
    if (!std::getline(csv, line) || line != kTrajectoryHeader) {
        throw Error("not a trajectory CSV");
    }
    std::map<std::size_t, std::pair<double, std::size_t>> acc;
    while (std::getline(csv, line)) {
        const auto cells = split_csv(line);
        if (cells.size() != 8 || cells[4].empty()) continue;
        const auto t = static_cast<std::size_t>(std::stoull(cells[1]));
        auto& [sum, count] = acc[t];
        sum += std::stod(cells[4]);
        ++count;
    }
    std::map<std::size_t, double> out;
    for (const auto& [t, sc] : acc) out[t] = sc.first / static_cast<double>(sc.second);
    return out;
}

json summary_to_json(const json& config_echo, const engine::ReplicationSummary& s) {
    json per = json::object();
    json t = json::array();
    const std::size_t records = std::max({s.param_error.size(), s.tv.size(), s.kl.size()});
    for (std::size_t i = 0; i < records; ++i) t.push_back(i);
    per["t"] = t;
    auto add = [&](const std::string& name, const std::vector<engine::IterationStats>& stats) {
        if (stats.empty()) return;
        per[name + "_mean"] = stats_column(stats, &engine::IterationStats::mean);
        per[name + "_median"] = stats_column(stats, &engine::IterationStats::median);
        per[name + "_std"] = stats_column(stats, &engine::IterationStats::std);
    };
    add("param_error", s.param_error);
    add("tv", s.tv);
    add("kl", s.kl);

    json collapse = json::array();
    for (const auto& c : s.collapse_times) collapse.push_back(c ? json(*c) : json(nullptr));

    json out = json::object();
    out["config_echo"] = config_echo;
    out["replications"] = s.replications;
    out["ratio_T_over_1"] = s.ratio_T_over_1 ? number_or_null(*s.ratio_T_over_1) : json(nullptr);
    out["per_iteration"] = per;
    out["collapse_times"] = collapse;
    out["failures"] = s.failures;
    out["failure_messages"] = s.failure_messages;
    return out;
}

std::string render_svg(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
    constexpr double W = 720, H = 440, L = 80, R = 150, T = 40, B = 60;
    double x0 = INFINITY, x1 = -INFINITY, y0 = 0.0, y1 = -INFINITY;
    for (const Series& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!(x1 > x0)) {
        x0 = std::isfinite(x0) ? x0 - 1 : 0;
        x1 = x0 + 2;
    }
    if (!(y1 > y0)) y1 = y0 + 1;
    y1 += 0.05 * (y1 - y0);
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<g font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
        << "</text>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
        svg << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << H - B << "\" x2=\"" << fixed(px(xv)) << "\" y2=\""
            << H - B + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
            << fixed(xv, "%.3g") << "</text>\n"
            << "<line x1=\"" << L - 5 << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << L << "\" y2=\"" << fixed(py(yv))
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << L - 8 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
            << fixed(yv, "%.3g") << "</text>\n";
    }
    svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
        << escape_xml(x_label) << "</text>\n"
        << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << (T + H - B) / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Series& s = series[i];
        const char* colour = colours[i % (sizeof colours / sizeof *colours)];
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (std::isfinite(s.y[k])) svg << fixed(px(s.x[k])) << ',' << fixed(py(s.y[k])) << ' ';
        }
        svg << "\"/>\n";
        const double ly = T + 10 + 20.0 * static_cast<double>(i);
        svg << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 40 << "\" y2=\"" << ly
            << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << W - R + 45 << "\" y=\"" << ly + 4 << "\">" << escape_xml(s.label) << "</text>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
}

}  // namespace collapse_lab::cli
