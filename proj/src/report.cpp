#include "netscope/report.hpp"

#include "netscope/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace netscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::array<int, 3>, 9> kViridis{{
    {0x44, 0x01, 0x54},
    {0x47, 0x2d, 0x7b},
    {0x3b, 0x52, 0x8b},
    {0x2c, 0x72, 0x8e},
    {0x21, 0x91, 0x8c},
    {0x28, 0xae, 0x80},
    {0x5e, 0xc9, 0x62},
    {0xad, 0xdc, 0x30},
    {0xfd, 0xe7, 0x25},
}};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
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

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::string fmt_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("missing file '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
}

void write_matrix_csv(const fs::path& path, const DistanceMatrix& dm) {
    std::ostringstream os;
    for (std::size_t i = 0; i < dm.layer_names.size(); ++i)
        os << (i ? "," : "") << csv_escape(dm.layer_names[i]);
    os << '\n';
    for (Eigen::Index r = 0; r < dm.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < dm.values.cols(); ++c)
            os << (c ? "," : "") << format_double(dm.values(r, c));
        os << '\n';
    }
    write_text(path, os.str());
}

DistanceMatrix read_matrix_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("missing file '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty matrix file");

    DistanceMatrix dm;
    dm.layer_names = split_csv_line(line);
    const auto L = static_cast<Eigen::Index>(dm.layer_names.size());
    dm.values.resize(L, L);
    Eigen::Index r = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (r >= L) throw InputError(path.string() + ": more rows than layer names");
        const auto cells = split_csv_line(line);
        if (static_cast<Eigen::Index>(cells.size()) != L)
            throw InputError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                             std::to_string(cells.size()) + " values, expected " + std::to_string(L));
        for (Eigen::Index c = 0; c < L; ++c) {
            try {
                std::size_t pos = 0;
                dm.values(r, c) = std::stod(cells[static_cast<std::size_t>(c)], &pos);
            } catch (const std::exception&) {
                throw InputError(path.string() + ": bad number '" + cells[static_cast<std::size_t>(c)] + "'");
            }
        }
        ++r;
    }
    if (r != L) throw InputError(path.string() + ": expected " + std::to_string(L) + " rows, got " + std::to_string(r));
    if (!dm.values.allFinite()) throw InputError(path.string() + ": non-finite entries");

    std::string stem = path.stem().string();
    const std::string prefix = "distances_";
    dm.measure_tag = stem.rfind(prefix, 0) == 0 ? stem.substr(prefix.size()) : stem;
    return dm;
}

std::string ramp_color(double t) {
    if (!std::isfinite(t)) t = 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * (kViridis.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, kViridis.size() - 1);
    const double f = pos - static_cast<double>(lo);
    char buf[8];
    int rgb[3];
    for (int k = 0; k < 3; ++k)
        rgb[k] = static_cast<int>(std::lround(kViridis[lo][k] * (1.0 - f) + kViridis[hi][k] * f));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string render_heatmap_svg(const Matrix& values, const std::vector<std::string>& names,
                               const std::string& title) {
    const Eigen::Index L = values.rows();
    constexpr int cell = 24;
    std::size_t longest = 0;
    for (const auto& n : names) longest = std::max(longest, n.size());
    const int margin = 20 + static_cast<int>(longest) * 7;
    const int top = margin + 30;
    const int grid = static_cast<int>(L) * cell;
    const int bar_x = margin + grid + 20;
    const int width = bar_x + 90;
    const int height = top + grid + 20;

    const double vmin = L ? values.minCoeff() : 0.0;
    const double vmax = L ? values.maxCoeff() : 0.0;
    const double span = vmax > vmin ? vmax - vmin : 1.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"" << margin << "\" y=\"18\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
    for (Eigen::Index r = 0; r < L; ++r) {
        for (Eigen::Index c = 0; c < L; ++c) {
            os << "<rect x=\"" << margin + c * cell << "\" y=\"" << top + r * cell << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"" << ramp_color((values(r, c) - vmin) / span)
               << "\"><title>" << xml_escape(names[static_cast<std::size_t>(r)]) << " / "
               << xml_escape(names[static_cast<std::size_t>(c)]) << ": " << format_double(values(r, c))
               << "</title></rect>\n";
        }
    }
    for (Eigen::Index i = 0; i < L; ++i) {
        const auto& name = xml_escape(names[static_cast<std::size_t>(i)]);
        os << "<text x=\"" << margin - 4 << "\" y=\"" << top + i * cell + cell / 2 + 4
           << "\" text-anchor=\"end\">" << name << "</text>\n";
        const int x = margin + static_cast<int>(i) * cell + cell / 2 + 4;
        os << "<text x=\"" << x << "\" y=\"" << top - 4 << "\" transform=\"rotate(-90 " << x << ' ' << top - 4
           << ")\">" << name << "</text>\n";
    }
    constexpr int stops = 32;
    const int bar_h = std::max(grid, 64);
    for (int s = 0; s < stops; ++s) {
        const double t = 1.0 - static_cast<double>(s) / (stops - 1);
        os << "<rect x=\"" << bar_x << "\" y=\"" << top + s * bar_h / stops << "\" width=\"16\" height=\""
           << bar_h / stops + 1 << "\" fill=\"" << ramp_color(t) << "\"/>\n";
    }
    os << "<text x=\"" << bar_x + 20 << "\" y=\"" << top + 10 << "\">max " << fmt_short(vmax) << "</text>\n";
    os << "<text x=\"" << bar_x + 20 << "\" y=\"" << top + bar_h << "\">min " << fmt_short(vmin) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

void write_heatmap_svg(const fs::path& path, const Matrix& values, const std::vector<std::string>& names,
                       const std::string& title) {
    write_text(path, render_heatmap_svg(values, names, title));
}

json partition_json(const Partition& p) {
    return {{"measure", p.measure}, {"mode", mode_name(p.mode)}, {"k", p.k},
            {"labels", p.labels},   {"eigengaps", p.eigengaps}};
}

Partition partition_from_json(const json& j) {
    Partition p;
    try {
        p.measure = j.value("measure", std::string{});
        p.mode = parse_mode(j.value("mode", std::string{"reverse"}));
        p.k = j.at("k").get<int>();
        p.labels = j.at("labels").get<std::vector<int>>();
        if (j.contains("eigengaps")) p.eigengaps = j.at("eigengaps").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw InputError(std::string("partition JSON: ") + e.what());
    }
    return p;
}

void write_probe_csv(const fs::path& path, const ProbeReport& r) {
    std::ostringstream os;
    os << "layer,name,fit_error,accuracy\n";
    for (const auto& rec : r.records)
        os << rec.layer_id << ',' << csv_escape(rec.name) << ',' << format_double(rec.fit_error) << ','
           << (rec.accuracy ? format_double(*rec.accuracy) : std::string{}) << '\n';
    write_text(path, os.str());
}

json probe_json(const ProbeReport& r) {
    json layers = json::array();
    for (const auto& rec : r.records) {
        json e = {{"layer", rec.layer_id}, {"name", rec.name}, {"fit_error", rec.fit_error}};
        e["accuracy"] = rec.accuracy ? json(*rec.accuracy) : json(nullptr);
        layers.push_back(e);
    }
    std::vector<std::string> top_names;
    for (int id : r.top_similar) top_names.push_back(r.records[static_cast<std::size_t>(id)].name);
    return {{"probe_kind", probe_kind_name(r.kind)},
            {"target_kind", r.target_kind == TargetKind::Class ? "class" : "real"},
            {"ranking", r.ranking},
            {"top_similar", r.top_similar},
            {"top_similar_names", top_names},
            {"layers", layers}};
}

void write_profile_csv(const fs::path& path, const LayerProfile& p) {
    std::ostringstream os;
    os << "layer,name,previous,distance\n";
    for (Eigen::Index l = 1; l <= p.values.size(); ++l)
        os << l << ',' << csv_escape(p.layer_names[static_cast<std::size_t>(l)]) << ','
           << csv_escape(p.layer_names[static_cast<std::size_t>(l - 1)]) << ',' << format_double(p.values(l - 1))
           << '\n';
    write_text(path, os.str());
}

void write_histogram_csvs(const fs::path& dir, const HistogramSet& h) {
    std::ostringstream edges;
    edges << "edge\n";
    for (Eigen::Index i = 0; i < h.bin_edges.size(); ++i) edges << format_double(h.bin_edges(i)) << '\n';
    write_text(dir / "histogram_edges.csv", edges.str());

    std::ostringstream mass;
    mass << "layer,name";
    for (Eigen::Index b = 0; b + 1 < h.bin_edges.size(); ++b) mass << ",bin_" << b;
    mass << '\n';
    for (std::size_t l = 0; l < h.masses.size(); ++l) {
        mass << l << ',' << csv_escape(h.layer_names[l]);
        for (Eigen::Index b = 0; b < h.masses[l].size(); ++b) mass << ',' << format_double(h.masses[l](b));
        mass << '\n';
    }
    write_text(dir / "histograms.csv", mass.str());

    std::ostringstream kl;
    kl << "layer,name,kl_to_previous\n";
    for (Eigen::Index l = 1; l <= h.consecutive_kl.size(); ++l)
        kl << l << ',' << csv_escape(h.layer_names[static_cast<std::size_t>(l)]) << ','
           << format_double(h.consecutive_kl(l - 1)) << '\n';
    write_text(dir / "kl.csv", kl.str());
}

void write_jaccard_csv(const fs::path& path, const JaccardTable& t) {
    std::ostringstream os;
    os << "anchor";
    for (const auto& n : t.layer_names) os << ',' << csv_escape(n);
    os << ",mean\n";
    for (Eigen::Index a = 0; a < t.values.rows(); ++a) {
        os << t.anchors[static_cast<std::size_t>(a)];
        for (Eigen::Index c = 0; c < t.values.cols(); ++c) os << ',' << format_double(t.values(a, c));
        os << ',' << format_double(t.anchor_means(a)) << '\n';
    }
    write_text(path, os.str());
}

void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryPoint>& pts) {
    std::ostringstream os;
    os << "checkpoint,mean_offdiag_gw,metric\n";
    for (const auto& p : pts)
        os << csv_escape(p.checkpoint_tag) << ',' << format_double(p.mean_offdiag_gw) << ','
           << (p.metric ? format_double(*p.metric) : std::string{}) << '\n';
    write_text(path, os.str());
}

}  // namespace netscope
