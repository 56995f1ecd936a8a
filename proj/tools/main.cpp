// infiltra: lymphoid infiltration profiling at tumor margins.
//
// Subcommands wire the library into the slide workflow: rasterized (or
// pre-rasterized) region labels plus a lymphocyte mask become a signed
// distance field and an infiltration curve; IHC images are deconvolved into
// DAB-positive masks; curve sets are matched by band-constrained DTW; mask
// pairs are scored with the object-level Dice coefficient; synthetic cases
// provide ground truth for end-to-end checks.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "infiltra/distance.hpp"
#include "infiltra/error.hpp"
#include "infiltra/eval.hpp"
#include "infiltra/image_io.hpp"
#include "infiltra/match.hpp"
#include "infiltra/profile.hpp"
#include "infiltra/serial.hpp"
#include "infiltra/slide.hpp"
#include "infiltra/stain.hpp"
#include "infiltra/synth.hpp"

namespace fs = std::filesystem;
using namespace infiltra;

namespace {

// Tunables shared across subcommands; flags override config-file values,
// config-file values override these defaults.
struct PipelineConfig {
    double bin_width_um = 10.0;
    double dab_threshold = 0.095;
    std::int64_t min_area_px = 12;
    int band_radius_bins = 1;
    std::string stain_matrix_path;
    std::string output_dir;
};

struct ConfigBinding {
    std::string path;
    CLI::Option* opt_config = nullptr;
    CLI::Option* opt_bin_width = nullptr;
    CLI::Option* opt_threshold = nullptr;
    CLI::Option* opt_min_area = nullptr;
    CLI::Option* opt_band = nullptr;
    CLI::Option* opt_stain = nullptr;
    CLI::Option* opt_outdir = nullptr;
};

void add_config_option(CLI::App* cmd, ConfigBinding& bind) {
    bind.opt_config =
        cmd->add_option("--config", bind.path, "JSON file with pipeline configuration");
}

// Applies config-file values to every field whose flag was not given.
void resolve_config(const ConfigBinding& bind, PipelineConfig& cfg) {
    if (!bind.opt_config || bind.opt_config->count() == 0) return;
    std::ifstream in(bind.path, std::ios::binary);
    if (!in) throw Error("FileNotFound", "cannot open '" + bind.path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("ParseError", bind.path + ": " + e.what());
    }
    auto apply = [&](CLI::Option* opt, const char* key, auto& field) {
        if (opt && opt->count() == 0 && j.contains(key))
            field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    apply(bind.opt_bin_width, "bin_width_um", cfg.bin_width_um);
    apply(bind.opt_threshold, "dab_threshold", cfg.dab_threshold);
    apply(bind.opt_min_area, "min_area_px", cfg.min_area_px);
    apply(bind.opt_band, "band_radius_bins", cfg.band_radius_bins);
    apply(bind.opt_stain, "stain_matrix_path", cfg.stain_matrix_path);
    apply(bind.opt_outdir, "output_dir", cfg.output_dir);
    if (!(cfg.bin_width_um > 0) || !(cfg.dab_threshold > 0) || cfg.min_area_px < 0 ||
        cfg.band_radius_bins < 0)
        throw Error("InvalidValue", "pipeline configuration values out of range");
}

fs::path ensure_outdir(const std::string& dir) {
    if (dir.empty()) throw Error("InvalidValue", "an output directory is required");
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error("IoError", "cannot create output directory '" + dir + "'");
    return p;
}

Grid<RegionLabel> to_labels(const MaskGrid& raw) {
    Grid<RegionLabel> labels(raw.width(), raw.height());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] > 3) throw Error("InvalidLabels", "label image contains values above 3");
        labels[i] = static_cast<RegionLabel>(raw[i]);
    }
    return labels;
}

MaskGrid to_255(const MaskGrid& mask) {
    MaskGrid out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 255 : 0;
    return out;
}

void write_png_atomic(const fs::path& path, const MaskGrid& image) {
    atomic_write_with(path, [&](const fs::path& tmp) { write_gray_png(tmp, image); });
}

void check_meta_shape(const SlideMeta& meta, std::size_t w, std::size_t h, const char* what) {
    if (w != meta.width_px || h != meta.height_px)
        throw Error("ShapeMismatch", std::string(what) + " does not match the slide meta "
                                                         "dimensions");
}

// --- profile -------------------------------------------------------------------

struct ProfileArgs {
    std::string labels_path, annotations_path, lymph_path, meta_path;
    bool export_distance = false;
    PipelineConfig cfg;
    ConfigBinding bind;
};

void run_profile(const ProfileArgs& a) {
    const fs::path outdir = ensure_outdir(a.cfg.output_dir);
    const SlideMeta meta = read_slide_meta(a.meta_path);

    TissueLabelMask labels;
    if (!a.annotations_path.empty()) {
        labels = rasterize_annotations(read_annotation_set(a.annotations_path), meta);
    } else {
        MaskGrid raw = read_gray_image(a.labels_path);
        check_meta_shape(meta, raw.width(), raw.height(), "label image");
        labels = TissueLabelMask{meta, to_labels(raw)};
    }

    const SignedDistanceMap dist = signed_edt(labels);
    if (a.export_distance)
        write_distance_raw(outdir / "distance.f64", outdir / "distance.json", dist);

    MaskGrid lymph_raw = read_gray_image(a.lymph_path);
    check_meta_shape(meta, lymph_raw.width(), lymph_raw.height(), "lymphocyte mask");
    const LymphocyteMask lymph{meta, std::move(lymph_raw)};

    const InfiltrationCurve curve = infiltration_curve(dist, lymph, a.cfg.bin_width_um);
    atomic_write_text(outdir / "curve.csv", curve_csv(curve));
    atomic_write_text(outdir / "curve.json", curve_json(curve));
    if (curve.bin_width_um == kWindowBinUm)
        atomic_write_text(outdir / "window.csv", window_csv(to_fixed_window(curve)));
}

// --- deconvolve -----------------------------------------------------------------

struct DeconvolveArgs {
    std::string input_path, meta_path;
    PipelineConfig cfg;
    ConfigBinding bind;
};

void run_deconvolve(const DeconvolveArgs& a) {
    const fs::path outdir = ensure_outdir(a.cfg.output_dir);
    const SlideMeta meta = read_slide_meta(a.meta_path);
    const RgbImage image = read_rgb_image(a.input_path);
    const StainMatrix m = a.cfg.stain_matrix_path.empty()
                              ? StainMatrix::h_dab()
                              : read_stain_matrix(a.cfg.stain_matrix_path);
    const LymphocyteMask mask =
        dab_lymphocyte_mask(image, meta, m, a.cfg.dab_threshold, a.cfg.min_area_px);
    write_png_atomic(outdir / "mask.png", to_255(mask.mask));
    atomic_write_text(outdir / "meta.json", slide_meta_json(mask.meta));
}

// --- match ---------------------------------------------------------------------

struct MatchArgs {
    std::string queries_dir, targets_dir, pairs_path;
    PipelineConfig cfg;
    ConfigBinding bind;
};

std::vector<SeriesEntry> load_series_dir(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw Error("FileNotFound", "curve directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".csv" || ext == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SeriesEntry> out;
    for (const fs::path& f : files)
        out.push_back(SeriesEntry{f.stem().string(), to_fixed_window(load_curve(f))});
    if (out.empty()) throw Error("EmptySeries", "no curve files in '" + dir + "'");
    return out;
}

void run_match(const MatchArgs& a) {
    const fs::path outdir = ensure_outdir(a.cfg.output_dir);
    const auto queries = load_series_dir(a.queries_dir);
    const auto targets = load_series_dir(a.targets_dir);
    const auto pairs = read_pair_map(a.pairs_path);
    const MatchReport report = rank_matches(queries, targets, pairs, a.cfg.band_radius_bins);
    atomic_write_text(outdir / "report.json", match_report_json(report));
    std::cout << match_report_table(report);
}

// --- eval-dice ------------------------------------------------------------------

struct EvalArgs {
    std::string pred_dir, gt_dir;
    double radius_um = 3.5;
    double mpp = 1.0;
    PipelineConfig cfg;
    ConfigBinding bind;
};

void run_eval_dice(const EvalArgs& a) {
    const fs::path outdir = ensure_outdir(a.cfg.output_dir);
    if (!fs::is_directory(a.pred_dir))
        throw Error("FileNotFound", "prediction directory '" + a.pred_dir + "' does not exist");
    std::vector<fs::path> preds;
    for (const auto& entry : fs::directory_iterator(a.pred_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".png" || ext == ".pgm") preds.push_back(entry.path());
    }
    std::sort(preds.begin(), preds.end());
    if (preds.empty())
        throw Error("FileNotFound", "no mask images in '" + a.pred_dir + "'");

    std::vector<PatchDice> patches;
    for (const fs::path& pred_path : preds) {
        const std::string stem = pred_path.stem().string();
        const MaskGrid pred = read_gray_image(pred_path);

        MaskGrid gt;
        bool found = false;
        for (const char* ext : {".png", ".pgm"}) {
            const fs::path cand = fs::path(a.gt_dir) / (stem + ext);
            if (fs::exists(cand)) {
                gt = read_gray_image(cand);
                found = true;
                break;
            }
        }
        if (!found) {
            const fs::path cand = fs::path(a.gt_dir) / (stem + ".json");
            if (!fs::exists(cand))
                throw Error("FileNotFound", "no ground truth for patch '" + stem + "'");
            const SlideMeta meta{a.mpp, pred.width(), pred.height(), Stain::HE};
            gt = points_to_disks(read_centers(cand), a.radius_um, meta);
        }
        patches.push_back(PatchDice{stem, object_level_dice(pred, gt)});
    }

    const ObjectDiceReport report = make_dice_report(std::move(patches));
    atomic_write_text(outdir / "report.json", dice_report_json(report));
    for (const PatchDice& p : report.per_patch)
        std::cout << p.id << "  dice=" << format_double(p.dice) << '\n';
    std::cout << "mean_dice " << format_double(report.mean_dice) << '\n';
}

// --- synth ---------------------------------------------------------------------

struct SynthArgs {
    std::string spec_path;
    std::string geometry = "straight";
    double amplitude_um = 200.0;
    double period_um = 1000.0;
    std::size_t width_px = 0, height_px = 0;
    double mpp = 0.0;
    std::uint64_t seed = 0;
    PipelineConfig cfg;
    ConfigBinding bind;
};

void run_synth(const SynthArgs& a) {
    const fs::path outdir = ensure_outdir(a.cfg.output_dir);
    const ProfileSpec spec = read_profile_spec(a.spec_path);
    MarginGeometry geometry;
    if (a.geometry == "straight")
        geometry = StraightMargin{};
    else if (a.geometry == "sine")
        geometry = SineMargin{a.amplitude_um, a.period_um};
    else
        throw Error("InvalidValue", "geometry must be 'straight' or 'sine'");

    const SyntheticCase synthetic =
        generate_case(spec, geometry, a.width_px, a.height_px, a.mpp, a.seed);

    MaskGrid labels(a.width_px, a.height_px);
    for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = static_cast<std::uint8_t>(synthetic.labels.labels[i]);
    write_png_atomic(outdir / "labels.png", labels);
    write_png_atomic(outdir / "lymph_a.png", to_255(synthetic.lymph_a.mask));
    write_png_atomic(outdir / "lymph_b.png", to_255(synthetic.lymph_b.mask));
    atomic_write_text(outdir / "meta.json", slide_meta_json(synthetic.labels.meta));
    atomic_write_text(outdir / "oracle_window.csv", window_csv(oracle_curve(spec)));
}

// --- plot ----------------------------------------------------------------------

struct PlotArgs {
    std::string curve_path;
    std::string name = "plot.svg";
    PipelineConfig cfg;
    ConfigBinding bind;
};

InfiltrationCurve load_curve_or_window(const fs::path& path) {
    if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw Error("FileNotFound", "cannot open '" + path.string() + "'");
        std::string header;
        std::getline(in, header);
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header == "bin_start_um,bin_end_um,density") {
            InfiltrationCurve curve;
            curve.bin_width_um = kWindowBinUm;
            curve.first_edge_um = kWindowMinUm;
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                double s = 0, e = 0, d = 0;
                if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &s, &e, &d) != 3)
                    throw Error("ParseError", path.string() + ": malformed row '" + line + "'");
                if (curve.density.empty()) curve.first_edge_um = s;
                curve.density.push_back(d);
                curve.tissue_px.push_back(0);
                curve.lymph_px.push_back(0);
            }
            if (curve.density.empty())
                throw Error("ParseError", path.string() + ": window has no bins");
            return curve;
        }
    }
    return load_curve(path);
}

void run_plot(const PlotArgs& a) {
    const fs::path outdir = ensure_outdir(a.cfg.output_dir);
    if (a.name.empty() || fs::path(a.name).filename() != fs::path(a.name))
        throw Error("InvalidValue", "plot name must be a bare file name");
    const InfiltrationCurve curve = load_curve_or_window(a.curve_path);
    atomic_write_text(outdir / a.name, curve_svg(curve));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lymphoid infiltration profiling at tumor margins"};
    app.require_subcommand(1);

    ProfileArgs profile_args;
    DeconvolveArgs deconvolve_args;
    MatchArgs match_args;
    EvalArgs eval_args;
    SynthArgs synth_args;
    PlotArgs plot_args;

    // profile
    CLI::App* profile = app.add_subcommand(
        "profile", "labels + lymphocyte mask -> infiltration curve CSV/JSON");
    CLI::Option* opt_labels =
        profile->add_option("--labels", profile_args.labels_path, "region label image (0..3)");
    profile->add_option("--annotations", profile_args.annotations_path,
                        "polygon annotation JSON (rasterized on the fly)")
        ->excludes(opt_labels);
    profile->add_option("--lymph", profile_args.lymph_path, "lymphocyte mask image")
        ->required();
    profile->add_option("--meta", profile_args.meta_path, "slide meta JSON")->required();
    profile_args.bind.opt_outdir =
        profile->add_option("-o,--output", profile_args.cfg.output_dir, "output directory");
    profile_args.bind.opt_bin_width = profile->add_option(
        "--bin-width-um", profile_args.cfg.bin_width_um, "distance bin width in microns");
    profile->add_flag("--export-distance", profile_args.export_distance,
                      "also export the signed distance field (raw doubles + JSON header)");
    add_config_option(profile, profile_args.bind);

    // deconvolve
    CLI::App* deconvolve =
        app.add_subcommand("deconvolve", "IHC RGB PNG -> DAB lymphocyte mask PNG");
    deconvolve->add_option("--input", deconvolve_args.input_path, "IHC RGB image")->required();
    deconvolve->add_option("--meta", deconvolve_args.meta_path, "slide meta JSON")->required();
    deconvolve_args.bind.opt_outdir =
        deconvolve->add_option("-o,--output", deconvolve_args.cfg.output_dir, "output directory");
    deconvolve_args.bind.opt_stain = deconvolve->add_option(
        "--stain", deconvolve_args.cfg.stain_matrix_path, "stain matrix JSON");
    deconvolve_args.bind.opt_threshold = deconvolve->add_option(
        "--threshold", deconvolve_args.cfg.dab_threshold, "DAB concentration threshold");
    deconvolve_args.bind.opt_min_area = deconvolve->add_option(
        "--min-area-px", deconvolve_args.cfg.min_area_px, "minimum component area in pixels");
    add_config_option(deconvolve, deconvolve_args.bind);

    // match
    CLI::App* match =
        app.add_subcommand("match", "rank target curves against query curves via cDTW");
    match->add_option("--queries", match_args.queries_dir, "directory of query curves")
        ->required();
    match->add_option("--targets", match_args.targets_dir, "directory of target curves")
        ->required();
    match->add_option("--pairs", match_args.pairs_path, "pairing JSON")->required();
    match_args.bind.opt_outdir =
        match->add_option("-o,--output", match_args.cfg.output_dir, "output directory");
    match_args.bind.opt_band = match->add_option(
        "--band-radius-bins", match_args.cfg.band_radius_bins, "Sakoe-Chiba band radius in bins");
    add_config_option(match, match_args.bind);

    // eval-dice
    CLI::App* eval = app.add_subcommand(
        "eval-dice", "object-level Dice over paired prediction/ground-truth masks");
    eval->add_option("--pred-dir", eval_args.pred_dir, "directory of predicted masks")
        ->required();
    eval->add_option("--gt-dir", eval_args.gt_dir,
                     "directory of ground-truth masks or centers JSON")
        ->required();
    eval_args.bind.opt_outdir =
        eval->add_option("-o,--output", eval_args.cfg.output_dir, "output directory");
    eval->add_option("--radius-um", eval_args.radius_um,
                     "disk radius for center-point ground truth");
    eval->add_option("--mpp", eval_args.mpp, "microns per pixel for center-point ground truth");
    add_config_option(eval, eval_args.bind);

    // synth
    CLI::App* synth = app.add_subcommand(
        "synth", "generate a synthetic case (labels + paired lymphocyte masks)");
    synth->add_option("--spec", synth_args.spec_path, "profile spec JSON")->required();
    synth->add_option("--geometry", synth_args.geometry, "margin geometry: straight | sine");
    synth->add_option("--amplitude-um", synth_args.amplitude_um, "sine margin amplitude");
    synth->add_option("--period-um", synth_args.period_um, "sine margin period");
    synth->add_option("--width-px", synth_args.width_px, "grid width in pixels")->required();
    synth->add_option("--height-px", synth_args.height_px, "grid height in pixels")->required();
    synth->add_option("--mpp", synth_args.mpp, "microns per pixel")->required();
    synth->add_option("--seed", synth_args.seed, "random stream seed");
    synth_args.bind.opt_outdir =
        synth->add_option("-o,--output", synth_args.cfg.output_dir, "output directory");
    add_config_option(synth, synth_args.bind);

    // plot
    CLI::App* plot = app.add_subcommand("plot", "curve CSV/JSON -> SVG line plot");
    plot->add_option("--curve", plot_args.curve_path, "curve or window file")->required();
    plot->add_option("--name", plot_args.name, "output file name");
    plot_args.bind.opt_outdir =
        plot->add_option("-o,--output", plot_args.cfg.output_dir, "output directory");
    add_config_option(plot, plot_args.bind);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }

    auto require_outdir = [](const PipelineConfig& cfg) {
        if (cfg.output_dir.empty()) throw CLI::RequiredError("-o,--output");
    };

    try {
        if (profile->parsed()) {
            if (profile_args.labels_path.empty() && profile_args.annotations_path.empty())
                throw CLI::RequiredError("--labels or --annotations");
            resolve_config(profile_args.bind, profile_args.cfg);
            require_outdir(profile_args.cfg);
            run_profile(profile_args);
        } else if (deconvolve->parsed()) {
            resolve_config(deconvolve_args.bind, deconvolve_args.cfg);
            require_outdir(deconvolve_args.cfg);
            run_deconvolve(deconvolve_args);
        } else if (match->parsed()) {
            resolve_config(match_args.bind, match_args.cfg);
            require_outdir(match_args.cfg);
            run_match(match_args);
        } else if (eval->parsed()) {
            resolve_config(eval_args.bind, eval_args.cfg);
            require_outdir(eval_args.cfg);
            run_eval_dice(eval_args);
        } else if (synth->parsed()) {
            resolve_config(synth_args.bind, synth_args.cfg);
            require_outdir(synth_args.cfg);
            run_synth(synth_args);
        } else if (plot->parsed()) {
            resolve_config(plot_args.bind, plot_args.cfg);
            require_outdir(plot_args.cfg);
            run_plot(plot_args);
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "IoError: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
