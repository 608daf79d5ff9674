#include "netscope/analysis.hpp"
#include "netscope/bundle.hpp"
#include "netscope/cluster.hpp"
#include "netscope/distmat.hpp"
#include "netscope/error.hpp"
#include "netscope/metric.hpp"
#include "netscope/npy.hpp"
#include "netscope/probes.hpp"
#include "netscope/report.hpp"
#include "netscope/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netscope;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = ".";
};

struct GwFlags {
    int subsample = 0;
    bool standardize = false;
    int restarts = 0;
    int max_iters = 1000;
    double rel_tol = 1e-9;
};

void add_gw_flags(CLI::App* cmd, GwFlags& f) {
    cmd->add_option("--subsample", f.subsample, "Random sample count shared by all layers (0 = all)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--standardize", f.standardize, "Z-score every feature before computing distances");
    cmd->add_option("--restarts", f.restarts, "Extra random-start GW solves")->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-iters", f.max_iters, "Frank-Wolfe iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--rel-tol", f.rel_tol, "Relative objective decrease stopping threshold");
}

RunOptions run_options(const GwFlags& f, const Globals& g) {
    RunOptions o;
    o.gw.max_iters = f.max_iters;
    o.gw.rel_tol = f.rel_tol;
    o.gw.restarts = f.restarts;
    o.gw.seed = g.seed;
    o.threads = g.threads;
    if (f.subsample > 0) o.subsample = SubsampleSpec{f.subsample, g.seed};
    return o;
}

json gw_flags_json(const GwFlags& f) {
    return {{"subsample", f.subsample},
            {"standardize", f.standardize},
            {"restarts", f.restarts},
            {"max_iters", f.max_iters},
            {"rel_tol", f.rel_tol}};
}

ActivationBundle load(const std::string& path, bool standardize_data) {
    spdlog::info("reading bundle {}", path);
    ActivationBundle b = read_bundle(path);
    spdlog::info("{} layers, {} samples", b.layer_count(), b.samples());
    return standardize_data ? standardize(b) : b;
}

void write_run(const fs::path& dir, const std::string& command, const Globals& g, json config,
               const std::vector<std::string>& argv) {
    json run = {{"command", command},
                {"argv", argv},
                {"seed", g.seed},
                {"threads", g.threads},
                {"out", g.out},
                {"config", std::move(config)}};
    write_json(dir / "run.json", run);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("bad integer list '" + s + "'");
        }
    }
    if (out.empty()) throw InputError("empty integer list");
    return out;
}

void set_log_level() {
    auto logger = spdlog::stderr_color_mt("netscope");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("NETSCOPE_LOG")) {
        const std::string v = env;
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "warn") spdlog::set_level(spdlog::level::warn);
        else if (v == "info") spdlog::set_level(spdlog::level::info);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("ignoring NETSCOPE_LOG='{}'", v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    set_log_level();
    const std::vector<std::string> args(argv, argv + argc);

    CLI::App app{"Layer-wise functional distances, subnetwork clustering and probe search"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Seed for subsampling, restarts, clustering and probes");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory (report: output SVG path)");

    // dist
    auto* dist = app.add_subcommand("dist", "Pairwise layer distance matrix and heatmap");
    std::string dist_bundle, dist_measure = "gw";
    GwFlags dist_flags;
    dist->add_option("--bundle", dist_bundle, "Activation bundle directory")->required();
    dist->add_option("--measure", dist_measure, "gw|euclidean|cosine|wasserstein|rsm|rsa|cka|cca");
    add_gw_flags(dist, dist_flags);

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Spectral clustering of a distance matrix");
    std::string cluster_matrix, cluster_mode = "reverse";
    int cluster_k = 0;
    cluster->add_option("--matrix", cluster_matrix, "Distance matrix CSV")->required();
    cluster->add_option("--k", cluster_k, "Cluster count (omit to use the eigengap suggestion)")
        ->check(CLI::PositiveNumber);
    cluster->add_option("--mode", cluster_mode, "reverse|gaussian");

    // probe
    auto* probe = app.add_subcommand("probe", "Known-target search over layers");
    std::string probe_bundle, probe_kind = "linear", probe_targets, probe_target_kind = "class";
    GwFlags probe_flags;
    probe->add_option("--bundle", probe_bundle, "Activation bundle directory")->required();
    probe->add_option("--kind", probe_kind, "linear|mlp|gw");
    probe->add_option("--targets", probe_targets, "Target .npy overriding the bundle's targets");
    probe->add_option("--target-kind", probe_target_kind, "class|real (with --targets)");
    add_gw_flags(probe, probe_flags);

    // profile
    auto* profile = app.add_subcommand("profile", "Consecutive-layer distances and distribution diagnostics");
    std::string profile_bundle, profile_measure = "gw";
    GwFlags profile_flags;
    bool profile_hist = false;
    int profile_bins = 50, profile_jaccard_k = 0, profile_anchors = 100, profile_reference = 0;
    profile->add_option("--bundle", profile_bundle, "Activation bundle directory")->required();
    profile->add_option("--measure", profile_measure, "Layer distance measure");
    profile->add_flag("--histograms", profile_hist, "Write pairwise-distance histograms and consecutive KL");
    profile->add_option("--bins", profile_bins, "Histogram bin count")->check(CLI::PositiveNumber);
    profile->add_option("--jaccard", profile_jaccard_k, "Top-k neighborhood Jaccard table (0 = off)")
        ->check(CLI::NonNegativeNumber);
    profile->add_option("--anchors", profile_anchors, "Anchor sample count for the Jaccard table")
        ->check(CLI::PositiveNumber);
    profile->add_option("--reference", profile_reference, "Reference layer index for the Jaccard table")
        ->check(CLI::NonNegativeNumber);
    add_gw_flags(profile, profile_flags);

    // track
    auto* track = app.add_subcommand("track", "Mean off-diagonal GW over training checkpoints");
    std::vector<std::string> track_bundles;
    GwFlags track_flags;
    track->add_option("--checkpoints", track_bundles, "Checkpoint bundle directories, in order")
        ->required();
    add_gw_flags(track, track_flags);

    // synth
    auto* synth = app.add_subcommand("synth", "Synthetic datasets and planted bundles");
    synth->require_subcommand(1);
    auto* modular = synth->add_subcommand("modular", "Modular-sum dataset with intermediates");
    std::string modular_p = "59";
    double modular_train = 0.8;
    modular->add_option("--p", modular_p, "Comma-separated moduli");
    modular->add_option("--train-fraction", modular_train, "Training split fraction")
        ->check(CLI::Range(0.0, 1.0));
    auto* planted = synth->add_subcommand("planted", "Bundle with planted layer blocks");
    int planted_blocks = 2, planted_per_block = 3, planted_n = 64, planted_dim = 8;
    std::string planted_within = "orthogonal", planted_nl = "square";
    planted->add_option("--blocks", planted_blocks, "Block count")->check(CLI::PositiveNumber);
    planted->add_option("--layers-per-block", planted_per_block, "Layers per block")
        ->check(CLI::PositiveNumber);
    planted->add_option("--n", planted_n, "Sample count")->check(CLI::PositiveNumber);
    planted->add_option("--dim", planted_dim, "Feature dimension")->check(CLI::PositiveNumber);
    planted->add_option("--within", planted_within, "orthogonal|permutation|translation");
    planted->add_option("--nonlinearity", planted_nl, "square|relu-mix|sine");

    // report
    auto* report = app.add_subcommand("report", "Render a distance matrix CSV as an SVG heatmap");
    std::string report_matrix, report_title;
    report->add_option("--matrix", report_matrix, "Distance matrix CSV")->required();
    report->add_option("--title", report_title, "Heatmap title (default: file name)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        const fs::path out = g.out;
        if (*dist) {
            const Measure m = parse_measure(dist_measure);
            const ActivationBundle b = load(dist_bundle, dist_flags.standardize);
            const RunOptions opts = run_options(dist_flags, g);
            const DistanceMatrix dm = distance_matrix(b, m, opts);
            for (int l : flagged_diagonal(dm))
                spdlog::warn("self-distance of layer '{}' is {:.3g}", dm.layer_names[l], dm.values(l, l));
            const std::string tag = measure_name(m);
            write_matrix_csv(out / ("distances_" + tag + ".csv"), dm);
            write_heatmap_svg(out / ("heatmap_" + tag + ".svg"), dm.values, dm.layer_names, b.model_name + " " + tag);
            json cfg = gw_flags_json(dist_flags);
            cfg["bundle"] = dist_bundle;
            cfg["measure"] = tag;
            write_run(out, "dist", g, cfg, args);
        } else if (*cluster) {
            const DistanceMatrix dm = read_matrix_csv(cluster_matrix);
            const SimilarityMode mode = parse_mode(cluster_mode);
            json cfg = {{"matrix", cluster_matrix}, {"mode", mode_name(mode)}};
            int k = cluster_k;
            json suggestion;
            if (k == 0) {
                const KSuggestion s = suggest_k(dm, mode);
                k = s.k;
                suggestion = {{"k", s.k}, {"confidence_ratio", s.confidence_ratio},
                              {"low_confidence", s.low_confidence}, {"eigengaps", s.eigengaps}};
                if (s.low_confidence)
                    spdlog::warn("suggested k={} has low confidence (ratio {:.3g})", s.k, s.confidence_ratio);
            }
            if (k > static_cast<int>(dm.size()))
                throw InputError("k=" + std::to_string(k) + " exceeds layer count " + std::to_string(dm.size()));
            const Partition p = cluster_layers(dm, k, mode, g.seed);
            json pj = partition_json(p);
            pj["layer_names"] = dm.layer_names;
            if (!suggestion.is_null()) pj["suggestion"] = suggestion;
            write_json(out / "partition.json", pj);
            cfg["k"] = cluster_k == 0 ? json(nullptr) : json(cluster_k);
            write_run(out, "cluster", g, cfg, args);
        } else if (*probe) {
            ActivationBundle b = load(probe_bundle, probe_flags.standardize);
            Targets t;
            if (!probe_targets.empty()) {
                const npy::Array arr = npy::read(probe_targets);
                if (probe_target_kind == "class") t.kind = TargetKind::Class;
                else if (probe_target_kind == "real") t.kind = TargetKind::Real;
                else throw InputError("unknown target kind '" + probe_target_kind + "'");
                const Eigen::Index rows = arr.shape.empty() ? 0 : static_cast<Eigen::Index>(arr.shape[0]);
                const Eigen::Index cols = arr.shape.size() > 1 ? static_cast<Eigen::Index>(arr.shape[1]) : 1;
                if (rows != b.samples())
                    throw InputError("targets have " + std::to_string(rows) + " rows, bundle has " +
                                     std::to_string(b.samples()) + " samples");
                t.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    arr.values.data(), rows, cols);
            } else if (b.targets) {
                t = *b.targets;
            } else {
                throw InputError("bundle '" + probe_bundle + "' has no targets; pass --targets");
            }
            if (probe_flags.subsample > 0) {
                b.targets = t;
                b = subsample(b, SubsampleSpec{probe_flags.subsample, g.seed});
                t = *b.targets;
            }
            ProbeReport r;
            if (probe_kind == "linear") {
                r = linear_probe(b, t, LinearProbeConfig{g.seed, g.threads});
            } else if (probe_kind == "mlp") {
                MlpProbeConfig c;
                c.seed = g.seed;
                c.threads = g.threads;
                r = mlp_probe(b, t, c);
            } else if (probe_kind == "gw") {
                r = gw_target_search(b, t, run_options(probe_flags, g).gw, g.threads);
            } else {
                throw InputError("unknown probe kind '" + probe_kind + "'");
            }
            write_probe_csv(out / ("probe_" + probe_kind + ".csv"), r);
            write_json(out / ("probe_" + probe_kind + ".json"), probe_json(r));
            json cfg = gw_flags_json(probe_flags);
            cfg["bundle"] = probe_bundle;
            cfg["kind"] = probe_kind;
            cfg["targets"] = probe_targets.empty() ? json(nullptr) : json(probe_targets);
            cfg["target_kind"] = t.kind == TargetKind::Class ? "class" : "real";
            write_run(out, "probe", g, cfg, args);
        } else if (*profile) {
            const Measure m = parse_measure(profile_measure);
            ActivationBundle b = load(profile_bundle, profile_flags.standardize);
            const RunOptions opts = run_options(profile_flags, g);
            const LayerProfile p = consecutive_profile(b, m, opts);
            write_profile_csv(out / ("profile_" + measure_name(m) + ".csv"), p);
            if (opts.subsample) b = subsample(b, *opts.subsample);
            if (profile_hist) write_histogram_csvs(out, distance_histograms(b, profile_bins));
            if (profile_jaccard_k > 0) {
                const Eigen::Index count = std::min<Eigen::Index>(profile_anchors, b.samples());
                const auto anchors = subsample_indices(b.samples(), SubsampleSpec{count, derive_seed(g.seed, 0x4a)});
                write_jaccard_csv(out / "jaccard.csv",
                                  neighborhood_jaccard(b, profile_jaccard_k, anchors, profile_reference));
            }
            json cfg = gw_flags_json(profile_flags);
            cfg["bundle"] = profile_bundle;
            cfg["measure"] = measure_name(m);
            cfg["histograms"] = profile_hist;
            cfg["bins"] = profile_bins;
            cfg["jaccard_k"] = profile_jaccard_k;
            cfg["anchors"] = profile_anchors;
            cfg["reference"] = profile_reference;
            write_run(out, "profile", g, cfg, args);
        } else if (*track) {
            std::vector<ActivationBundle> cps;
            for (const auto& path : track_bundles) cps.push_back(load(path, track_flags.standardize));
            write_trajectory_csv(out / "trajectory.csv", trajectory(cps, run_options(track_flags, g)));
            json cfg = gw_flags_json(track_flags);
            cfg["checkpoints"] = track_bundles;
            write_run(out, "track", g, cfg, args);
        } else if (*modular) {
            ModularSpec spec;
            spec.moduli = parse_int_list(modular_p);
            spec.split_seed = g.seed;
            spec.train_fraction = modular_train;
            const ModularDataset ds = gen_modular(spec);
            std::vector<bool> is_train(ds.size(), false);
            for (auto i : ds.train) is_train[i] = true;
            std::ostringstream csv;
            csv << "a,b";
            for (std::size_t k = 0; k < ds.intermediates.size(); ++k) csv << ",c" << k + 1;
            csv << ",split\n";
            for (std::size_t i = 0; i < ds.size(); ++i) {
                csv << ds.a[i] << ',' << ds.b[i];
                for (const auto& c : ds.intermediates) csv << ',' << c[i];
                csv << ',' << (is_train[i] ? "train" : "validation") << '\n';
            }
            write_text(out / "modular.csv", csv.str());
            write_bundle(modular_bundle(ds), out / "bundle");
            write_run(out, "synth modular", g,
                      {{"moduli", spec.moduli}, {"train_fraction", spec.train_fraction},
                       {"train", ds.train.size()}, {"validation", ds.validation.size()}},
                      args);
        } else if (*planted) {
            const PlantedSpec spec = planted_spec(planted_blocks, planted_per_block, planted_n, planted_dim,
                                                  parse_transform(planted_within), g.seed,
                                                  parse_nonlinearity(planted_nl));
            const PlantedBundle pb = gen_planted(spec);
            write_bundle(pb.bundle, out / "bundle");
            json gt = partition_json(pb.ground_truth);
            for (const auto& l : pb.bundle.layers) gt["layer_names"].push_back(l.name);
            write_json(out / "ground_truth.json", gt);
            write_run(out, "synth planted", g,
                      {{"blocks", planted_blocks}, {"layers_per_block", planted_per_block}, {"n", planted_n},
                       {"dim", planted_dim}, {"within", planted_within}, {"nonlinearity", planted_nl}},
                      args);
        } else if (*report) {
            const DistanceMatrix dm = read_matrix_csv(report_matrix);
            fs::path svg = out;
            if (svg.extension() != ".svg") svg /= "heatmap_" + dm.measure_tag + ".svg";
            const std::string title = report_title.empty() ? fs::path(report_matrix).filename().string() : report_title;
            write_heatmap_svg(svg, dm.values, dm.layer_names, title);
            write_run(svg.has_parent_path() ? svg.parent_path() : fs::path("."), "report", g,
                      {{"matrix", report_matrix}, {"svg", svg.string()}, {"title", title}}, args);
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
