#include "infiltra/serial.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "infiltra/error.hpp"

namespace infiltra {

using nlohmann::json;

namespace {

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("FileNotFound", "cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("ParseError", path.string() + ": " + e.what());
    }
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, const std::string& what) {
    throw Error("ParseError", path.string() + ": " + what);
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void atomic_write_with(const std::filesystem::path& path,
                       const std::function<void(const std::filesystem::path&)>& writer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    try {
        writer(tmp);
    } catch (...) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw Error("IoError", "cannot move temporary into '" + path.string() + "'");
    }
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    atomic_write_with(path, [&](const std::filesystem::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("IoError", "cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw Error("IoError", "failed writing '" + tmp.string() + "'");
    });
}

// --- SlideMeta -----------------------------------------------------------------

SlideMeta read_slide_meta(const std::filesystem::path& path) {
    const json j = load_json(path);
    SlideMeta meta;
    try {
        meta.microns_per_pixel = j.at("microns_per_pixel").get<double>();
        const auto width = j.at("width_px").get<std::int64_t>();
        const auto height = j.at("height_px").get<std::int64_t>();
        if (width < 1 || height < 1) parse_fail(path, "dimensions must be at least 1");
        meta.width_px = static_cast<std::size_t>(width);
        meta.height_px = static_cast<std::size_t>(height);
        const std::string stain = j.value("stain", "HE");
        if (stain == "HE")
            meta.stain = Stain::HE;
        else if (stain == "IHC_CD3")
            meta.stain = Stain::IhcCd3;
        else
            parse_fail(path, "unknown stain '" + stain + "'");
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
    meta.validate();
    return meta;
}

std::string slide_meta_json(const SlideMeta& meta) {
    json j;
    j["microns_per_pixel"] = meta.microns_per_pixel;
    j["width_px"] = meta.width_px;
    j["height_px"] = meta.height_px;
    j["stain"] = meta.stain == Stain::HE ? "HE" : "IHC_CD3";
    return j.dump(2) + "\n";
}

// --- annotations ---------------------------------------------------------------

AnnotationSet read_annotation_set(const std::filesystem::path& path) {
    const json j = load_json(path);
    AnnotationSet out;
    try {
        for (const json& jp : j.at("polygons")) {
            AnnotationPolygon poly;
            const std::string label = jp.at("label").get<std::string>();
            if (label == "normal")
                poly.label = RegionLabel::Normal;
            else if (label == "neoplastic")
                poly.label = RegionLabel::Neoplastic;
            else if (label == "irrelevant")
                poly.label = RegionLabel::Irrelevant;
            else
                throw Error("InvalidAnnotation", "unknown polygon label '" + label + "'");
            for (const json& jv : jp.at("vertices"))
                poly.vertices.push_back(Point{jv.at(0).get<double>(), jv.at(1).get<double>()});
            out.polygons.push_back(std::move(poly));
        }
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
    return out;
}

// --- stain matrix ----------------------------------------------------------------

StainMatrix read_stain_matrix(const std::filesystem::path& path) {
    const json j = load_json(path);
    try {
        auto vec = [&](const json& a) {
            return OdVector{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
        };
        std::optional<OdVector> residual;
        if (j.contains("residual") && !j.at("residual").is_null())
            residual = vec(j.at("residual"));
        return StainMatrix::from_rows(vec(j.at("hematoxylin")), vec(j.at("dab")), residual);
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
}

// --- curves --------------------------------------------------------------------

std::string curve_csv(const InfiltrationCurve& curve) {
    std::string out = "bin_start_um,bin_end_um,density,tissue_px,lymph_px\n";
    for (std::size_t i = 0; i < curve.bins(); ++i) {
        out += format_double(curve.edge(i));
        out += ',';
        out += format_double(curve.edge(i + 1));
        out += ',';
        out += format_double(curve.density[i]);
        out += ',';
        out += std::to_string(curve.tissue_px[i]);
        out += ',';
        out += std::to_string(curve.lymph_px[i]);
        out += '\n';
    }
    return out;
}

std::string curve_json(const InfiltrationCurve& curve) {
    json j;
    j["bin_width_um"] = curve.bin_width_um;
    j["bin_edges_um"] = curve.bin_edges_um();
    j["density"] = curve.density;
    j["tissue_px"] = curve.tissue_px;
    j["lymph_px"] = curve.lymph_px;
    return j.dump(2) + "\n";
}

namespace {

InfiltrationCurve finish_curve(const std::filesystem::path& path, std::vector<double> starts,
                               std::vector<double> ends, std::vector<double> density,
                               std::vector<std::int64_t> tissue,
                               std::vector<std::int64_t> lymph) {
    if (starts.empty()) parse_fail(path, "curve has no bins");
    InfiltrationCurve curve;
    curve.bin_width_um = ends[0] - starts[0];
    if (!(curve.bin_width_um > 0)) parse_fail(path, "non-positive bin width");
    curve.first_edge_um = starts[0];
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const double expect = curve.first_edge_um + static_cast<double>(i) * curve.bin_width_um;
        if (std::abs(starts[i] - expect) > 1e-6 ||
            std::abs(ends[i] - (expect + curve.bin_width_um)) > 1e-6)
            parse_fail(path, "bins are not contiguous with uniform width");
        if (tissue[i] < 0 || lymph[i] < 0 || lymph[i] > tissue[i])
            parse_fail(path, "pixel counts violate 0 <= lymph <= tissue");
    }
    curve.density = std::move(density);
    curve.tissue_px = std::move(tissue);
    curve.lymph_px = std::move(lymph);
    // densities follow from the counts wherever tissue exists
    for (std::size_t i = 0; i < curve.bins(); ++i) {
        curve.density[i] = curve.tissue_px[i] > 0
                               ? static_cast<double>(curve.lymph_px[i]) /
                                     static_cast<double>(curve.tissue_px[i])
                               : curve.density[i];
    }
    return curve;
}

}  // namespace

namespace {

void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

InfiltrationCurve read_curve_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotFound", "cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    chomp(line);
    if (line != "bin_start_um,bin_end_um,density,tissue_px,lymph_px")
        parse_fail(path, "unexpected CSV header");
    std::vector<double> starts, ends, density;
    std::vector<std::int64_t> tissue, lymph;
    while (std::getline(in, line)) {
        chomp(line);
        if (line.empty()) continue;
        double s = 0, e = 0, d = 0;
        long long t = 0, l = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lld,%lld", &s, &e, &d, &t, &l) != 5)
            parse_fail(path, "malformed CSV row '" + line + "'");
        starts.push_back(s);
        ends.push_back(e);
        density.push_back(d);
        tissue.push_back(t);
        lymph.push_back(l);
    }
    return finish_curve(path, std::move(starts), std::move(ends), std::move(density),
                        std::move(tissue), std::move(lymph));
}

InfiltrationCurve read_curve_json(const std::filesystem::path& path) {
    const json j = load_json(path);
    try {
        const auto edges = j.at("bin_edges_um").get<std::vector<double>>();
        if (edges.size() < 2) parse_fail(path, "curve has no bins");
        std::vector<double> starts(edges.begin(), edges.end() - 1);
        std::vector<double> ends(edges.begin() + 1, edges.end());
        return finish_curve(path, std::move(starts), std::move(ends),
                            j.at("density").get<std::vector<double>>(),
                            j.at("tissue_px").get<std::vector<std::int64_t>>(),
                            j.at("lymph_px").get<std::vector<std::int64_t>>());
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
}

InfiltrationCurve load_curve(const std::filesystem::path& path) {
    if (path.extension() == ".json") return read_curve_json(path);
    return read_curve_csv(path);
}

std::string window_csv(const FixedWindowSeries& window) {
    std::string out = "bin_start_um,bin_end_um,density\n";
    for (std::size_t i = 0; i < kWindowBins; ++i) {
        const double lo = kWindowMinUm + static_cast<double>(i) * kWindowBinUm;
        out += format_double(lo);
        out += ',';
        out += format_double(lo + kWindowBinUm);
        out += ',';
        out += format_double(window.values[i]);
        out += '\n';
    }
    return out;
}

// --- matching ---------------------------------------------------------------------

std::map<std::string, std::string> read_pair_map(const std::filesystem::path& path) {
    const json j = load_json(path);
    std::map<std::string, std::string> pairs;
    try {
        for (const json& jp : j.at("pairs")) {
            const auto query = jp.at("query").get<std::string>();
            const auto target = jp.at("target").get<std::string>();
            if (!pairs.emplace(query, target).second)
                throw Error("InvalidPairing", "duplicate pairing for query '" + query + "'");
        }
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
    return pairs;
}

std::string match_report_json(const MatchReport& report) {
    json ranking = json::object();
    for (const auto& [qid, ranked] : report.ranking) {
        json list = json::array();
        for (const RankedTarget& rt : ranked) list.push_back(json::array({rt.id, rt.distance}));
        ranking[qid] = std::move(list);
    }
    json j;
    j["ranking"] = std::move(ranking);
    j["topk"] = {{"1", report.topk_hits[0]}, {"2", report.topk_hits[1]},
                 {"3", report.topk_hits[2]}};
    j["n"] = report.query_ids.size();
    return j.dump(2) + "\n";
}

std::string match_report_table(const MatchReport& report) {
    std::ostringstream out;
    for (const std::string& qid : report.query_ids) {
        const auto& ranked = report.ranking.at(qid);
        const std::string& truth = report.pair_map.at(qid);
        std::size_t rank = 0;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            if (ranked[i].id == truth) {
                rank = i + 1;
                break;
            }
        }
        out << qid << "  true=" << truth << "  rank=" << rank << "  top:";
        for (std::size_t i = 0; i < ranked.size() && i < 3; ++i)
            out << ' ' << ranked[i].id << '=' << format_double(ranked[i].distance);
        out << '\n';
    }
    const auto n = report.query_ids.size();
    out << "top-1 " << report.topk_hits[0] << '/' << n << "  top-2 " << report.topk_hits[1]
        << '/' << n << "  top-3 " << report.topk_hits[2] << '/' << n << '\n';
    return out.str();
}

// --- evaluation -------------------------------------------------------------------

std::string dice_report_json(const ObjectDiceReport& report) {
    json per_patch = json::array();
    for (const PatchDice& p : report.per_patch)
        per_patch.push_back({{"id", p.id}, {"dice", p.dice}});
    json j;
    j["per_patch"] = std::move(per_patch);
    j["mean_dice"] = report.mean_dice;
    return j.dump(2) + "\n";
}

std::vector<Point> read_centers(const std::filesystem::path& path) {
    const json j = load_json(path);
    std::vector<Point> centers;
    try {
        for (const json& jc : j.at("centers"))
            centers.push_back(Point{jc.at(0).get<double>(), jc.at(1).get<double>()});
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
    return centers;
}

// --- synthetic profiles --------------------------------------------------------

ProfileSpec read_profile_spec(const std::filesystem::path& path) {
    const json j = load_json(path);
    ProfileSpec spec;
    try {
        for (const json& jp : j.at("pieces"))
            spec.pieces.push_back(ProfilePiece{jp.at(0).get<double>(), jp.at(1).get<double>(),
                                               jp.at(2).get<double>()});
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
    spec.validate();
    return spec;
}

// --- distance export -------------------------------------------------------------

void write_distance_raw(const std::filesystem::path& data_path,
                        const std::filesystem::path& header_path,
                        const SignedDistanceMap& dist) {
    static_assert(std::endian::native == std::endian::little,
                  "raw distance export assumes a little-endian host");
    atomic_write_with(data_path, [&](const std::filesystem::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("IoError", "cannot write '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(dist.dist_um.data()),
                  static_cast<std::streamsize>(dist.dist_um.size() * sizeof(double)));
        if (!out) throw Error("IoError", "failed writing '" + tmp.string() + "'");
    });
    json j;
    j["width"] = dist.dist_um.width();
    j["height"] = dist.dist_um.height();
    j["microns_per_pixel"] = dist.meta.microns_per_pixel;
    atomic_write_text(header_path, j.dump(2) + "\n");
}

// --- plotting ----------------------------------------------------------------------

namespace {

std::string svg_num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string curve_svg(const InfiltrationCurve& curve) {
    constexpr double kW = 800, kH = 420;
    constexpr double kLeft = 70, kRight = 24, kTop = 24, kBottom = 56;
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;

    const double x_min = curve.edge(0);
    const double x_max = curve.edge(curve.bins());
    double y_max = 0.0;
    for (double d : curve.density) y_max = std::max(y_max, d);
    y_max = y_max > 0.0 ? y_max * 1.05 : 1.0;

    auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) { return kTop + plot_h - y / y_max * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
    out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";

    // axes
    out << "<line x1=\"" << svg_num(kLeft) << "\" y1=\"" << svg_num(kTop + plot_h) << "\" x2=\""
        << svg_num(kLeft + plot_w) << "\" y2=\"" << svg_num(kTop + plot_h)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << svg_num(kLeft) << "\" y1=\"" << svg_num(kTop) << "\" x2=\""
        << svg_num(kLeft) << "\" y2=\"" << svg_num(kTop + plot_h) << "\" stroke=\"black\"/>\n";

    // x ticks: quarters of the range
    for (int t = 0; t <= 4; ++t) {
        const double x = x_min + (x_max - x_min) * t / 4.0;
        out << "<line x1=\"" << svg_num(sx(x)) << "\" y1=\"" << svg_num(kTop + plot_h)
            << "\" x2=\"" << svg_num(sx(x)) << "\" y2=\"" << svg_num(kTop + plot_h + 5)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << svg_num(sx(x)) << "\" y=\"" << svg_num(kTop + plot_h + 20)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << format_double(x) << "</text>\n";
    }
    // y ticks
    for (int t = 0; t <= 4; ++t) {
        const double y = y_max * t / 4.0;
        out << "<line x1=\"" << svg_num(kLeft - 5) << "\" y1=\"" << svg_num(sy(y)) << "\" x2=\""
            << svg_num(kLeft) << "\" y2=\"" << svg_num(sy(y)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << svg_num(kLeft - 8) << "\" y=\"" << svg_num(sy(y) + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << svg_num(y) << "</text>\n";
    }

    // tumor margin at distance 0
    if (x_min < 0.0 && x_max > 0.0) {
        out << "<line x1=\"" << svg_num(sx(0)) << "\" y1=\"" << svg_num(kTop) << "\" x2=\""
            << svg_num(sx(0)) << "\" y2=\"" << svg_num(kTop + plot_h)
            << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
        out << "<text x=\"" << svg_num(sx(0) + 4) << "\" y=\"" << svg_num(kTop + 12)
            << "\" font-size=\"12\" fill=\"gray\">tumor margin</text>\n";
    }

    // density polyline through bin centers
    out << "<polyline fill=\"none\" stroke=\"#1a6faf\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.bins(); ++i) {
        const double cx = curve.edge(i) + curve.bin_width_um / 2.0;
        if (i) out << ' ';
        out << svg_num(sx(cx)) << ',' << svg_num(sy(curve.density[i]));
    }
    out << "\"/>\n";

    out << "<text x=\"" << svg_num(kLeft + plot_w / 2) << "\" y=\"" << svg_num(kH - 12)
        << "\" font-size=\"14\" text-anchor=\"middle\">distance to tumor margin "
           "(\xC2\xB5m)</text>\n";
    out << "<text x=\"16\" y=\"" << svg_num(kTop + plot_h / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << svg_num(kTop + plot_h / 2) << ")\">lymphocyte pixel density</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace infiltra
