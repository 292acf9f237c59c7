// mtswarm: staged command-line pipeline
//   simulate -> featurize -> learn-dict -> decompose -> analyze -> train-temp -> predict-temp

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "mtswarm/analysis.hpp"
#include "mtswarm/csv.hpp"
#include "mtswarm/errors.hpp"
#include "mtswarm/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mtswarm;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kConfig = 2, kNumeric = 3, kUsage = 4 };

constexpr const char* kExitHelp =
    "Exit codes: 0 success, 1 I/O or schema error, 2 configuration error, 3 numeric abort, 4 usage error.";

struct Globals {
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
};

// --key value overrides for every SimConfig key except seed (global flag).
struct Overrides {
    std::map<std::string, std::string> values;
    void attach(CLI::App* sub) {
        for (const auto& key : config_keys()) {
            if (key == "seed") continue;
            sub->add_option("--" + key, values[key], "override config key " + key);
        }
    }
    void apply(CLI::App* sub, SimConfig& cfg) const {
        for (const auto& [key, value] : values)
            if (sub->count("--" + key) > 0) cfg.set(key, value);
    }
};

SimConfig build_config(const std::string& path, const Overrides& ov, CLI::App* sub, const Globals& g) {
    SimConfig cfg = path.empty() ? SimConfig{} : load_config(path);
    ov.apply(sub, cfg);
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    return cfg;
}

std::string fmt_mu(double mu) {
    char buf[64];
    if (mu == static_cast<double>(static_cast<long long>(mu)))
        std::snprintf(buf, sizeof buf, "%.1f", mu);
    else
        std::snprintf(buf, sizeof buf, "%g", mu);
    return buf;
}

void require_files(const std::vector<std::string>& paths) {
    for (const auto& p : paths)
        if (!fs::is_regular_file(p)) throw FormatError("input not found: " + p);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw std::runtime_error("cannot create directory " + dir);
}

std::vector<fs::path> as_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

int simulate_to(const SimConfig& cfg, const fs::path& out) {
    TrajectoryWriter w(out, {cfg.hash(), cfg.n_filaments, cfg.sites_per_filament, cfg.n_frames, cfg.box_side});
    try {
        run(cfg, [&](std::uint32_t, double t, std::span<const Vec2> pos) { w.write_frame(t, pos); });
    } catch (const NumericError& e) {
        w.abort(e.step());
        throw;
    }
    w.close();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and analysis pipeline for DNA-functionalized microtubule swarms"};
    app.footer(kExitHelp);
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "base random seed (overrides the config seed)");
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one simulation and write a trajectory");
    std::string sim_config, sim_out;
    Overrides sim_ov;
    sim->add_option("-c,--config", sim_config, "config file (key = value)");
    sim->add_option("-o,--out", sim_out, "output trajectory (.mtsw)")->required();
    sim_ov.attach(sim);

    // sweep
    auto* sw = app.add_subcommand("sweep", "run fixed-temperature simulations over a temperature range");
    std::string sw_config, sw_dir;
    double t_min = 200, t_max = 400, t_step = 25;
    Overrides sw_ov;
    sw->add_option("-c,--config", sw_config, "config file (key = value)");
    sw->add_option("-o,--out-dir", sw_dir, "output directory")->required();
    sw->add_option("--t-min", t_min, "lowest temperature [K]");
    sw->add_option("--t-max", t_max, "highest temperature [K]");
    sw->add_option("--t-step", t_step, "temperature step [K]");
    sw_ov.attach(sw);

    // featurize
    auto* fz = app.add_subcommand("featurize", "rasterize trajectories and compute per-tile descriptors");
    std::vector<std::string> fz_in;
    std::string fz_out, fz_frames, fz_import, fz_hue = "nematic";
    std::size_t fz_size = kDefaultRasterSize;
    bool fz_dry = false;
    fz->add_option("trajectories", fz_in, "trajectory files")->required();
    fz->add_option("-o,--out", fz_out, "output features CSV");
    fz->add_option("--frames-png,--frames-dir", fz_frames, "also dump each rendered frame as PPM into this directory");
    fz->add_option("--import", fz_import, "use external embeddings (run,temperature,frame,tile,f0..) instead of built-in descriptors");
    fz->add_option("--raster-size", fz_size, "frame raster side in pixels (multiple of 3)");
    fz->add_option("--hue", fz_hue, "orientation hue: nematic or polar");
    fz->add_flag("--dry-run", fz_dry, "print the row count of the tile manifest and exit");

    // learn-dict
    auto* ld = app.add_subcommand("learn-dict", "learn a sparse dictionary over feature rows");
    std::string ld_in, ld_out, ld_acts;
    std::size_t ld_atoms = 12, ld_rounds = 50;
    double ld_mu = 1.0;
    bool ld_raw = false;
    ld->add_option("features", ld_in, "features CSV")->required();
    ld->add_option("-o,--out", ld_out, "output dictionary CSV")->required();
    ld->add_option("--activations", ld_acts, "also write training-set activations here");
    ld->add_option("--atoms", ld_atoms, "number of atoms")->check(CLI::PositiveNumber);
    ld->add_option("--mu", ld_mu, "sparsity weight")->check(CLI::NonNegativeNumber);
    ld->add_option("--rounds", ld_rounds, "alternation rounds")->check(CLI::PositiveNumber);
    ld->add_flag("--no-standardize", ld_raw, "learn on raw features instead of z-scored ones");

    // decompose
    auto* dc = app.add_subcommand("decompose", "sparse-code feature rows with a fixed dictionary");
    std::string dc_dict, dc_in, dc_out;
    std::optional<double> dc_mu;
    dc->add_option("dictionary", dc_dict, "dictionary CSV")->required();
    dc->add_option("features", dc_in, "features CSV")->required();
    dc->add_option("-o,--out", dc_out, "output activations CSV")->required();
    dc->add_option("--mu", dc_mu, "sparsity weight (default: the dictionary's)");

    // analyze
    auto* an = app.add_subcommand("analyze", "activation statistics and behavior labels");
    std::string an_acts, an_dir, an_run, an_dict, an_features;
    std::vector<std::string> an_trajs;
    std::uint32_t an_exclude = 50;
    std::size_t an_k = 5;
    ClusterParams an_cp;
    an->add_option("activations", an_acts, "activations CSV")->required();
    an->add_option("trajectories", an_trajs, "trajectories to label (behavior.csv)");
    an->add_option("-o,--out-dir", an_dir, "output directory")->required();
    an->add_option("--run", an_run, "run for temporal.csv (default: first run in the table)");
    an->add_option("--exclude-first", an_exclude, "frames dropped from the box statistics");
    an->add_option("--link-distance", an_cp.link_distance, "cluster link distance");
    an->add_option("--angle-tol", an_cp.angle_tol, "cluster alignment tolerance [rad]");
    an->add_option("--dictionary", an_dict, "dictionary CSV (with --features: write exemplars.csv)");
    an->add_option("--features", an_features, "features CSV for exemplars");
    an->add_option("--exemplars", an_k, "exemplars per atom");

    // train-temp
    auto* tt = app.add_subcommand("train-temp", "fit the temperature regressor on activations");
    std::string tt_in, tt_out;
    std::size_t tt_repeats = 10;
    bool tt_tiles = false;
    TrainConfig tcfg;
    tt->add_option("activations", tt_in, "activations CSV")->required();
    tt->add_option("-o,--out", tt_out, "output model CSV")->required();
    tt->add_option("--repeats", tt_repeats, "training repeats with consecutive seeds")->check(CLI::PositiveNumber);
    tt->add_option("--epochs", tcfg.epochs, "epochs");
    tt->add_option("--hidden", tcfg.hidden, "hidden units");
    tt->add_option("--lr", tcfg.learning_rate, "learning rate");
    tt->add_option("--batch", tcfg.batch_size, "mini-batch size");
    tt->add_option("--split-seed", tcfg.split_seed, "train/validation split seed");
    tt->add_flag("--per-tile", tt_tiles, "one sample per tile instead of per frame");

    // predict-temp
    auto* pt = app.add_subcommand("predict-temp", "track the temperature of one run");
    std::string pt_model, pt_in, pt_out, pt_run;
    pt->add_option("model", pt_model, "model CSV")->required();
    pt->add_option("activations", pt_in, "activations CSV")->required();
    pt->add_option("-o,--out", pt_out, "output tracking CSV")->required();
    pt->add_option("--run", pt_run, "run to track (default: first run in the table)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) {
            const SimConfig cfg = build_config(sim_config, sim_ov, sim, g);
            simulate_to(cfg, sim_out);
            std::cout << "wrote " << sim_out << " (" << cfg.n_frames << " frames, " << cfg.n_filaments
                      << " filaments)\n";
        } else if (*sw) {
            const SimConfig base = build_config(sw_config, sw_ov, sw, g);
            const auto plan = sweep_plan(base, t_min, t_max, t_step);
            ensure_dir(sw_dir);
            std::vector<int> status(plan.size(), kOk);
            std::vector<std::string> errors(plan.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (std::size_t i = next++; i < plan.size(); i = next++) {
                    const fs::path out = fs::path(sw_dir) / (run_name(plan[i].temperature) + ".mtsw");
                    try {
                        simulate_to(sweep_config(base, plan[i]), out);
                    } catch (const NumericError& e) {
                        status[i] = kNumeric;
                        errors[i] = e.what();
                    } catch (const std::exception& e) {
                        status[i] = kIo;
                        errors[i] = e.what();
                    }
                }
            };
            {
                std::vector<std::jthread> pool;
                for (unsigned j = 1; j < std::min<std::size_t>(g.jobs, plan.size()); ++j) pool.emplace_back(worker);
                worker();
            }
            std::ofstream man(fs::path(sw_dir) / "manifest.csv", std::ios::binary);
            man << "index,temperature,seed,file,status\n";
            int rc = kOk;
            for (std::size_t i = 0; i < plan.size(); ++i) {
                man << plan[i].index << ',' << fmt_g17(plan[i].temperature) << ',' << plan[i].seed << ','
                    << run_name(plan[i].temperature) << ".mtsw," << (status[i] == kOk ? "ok" : "failed") << '\n';
                if (status[i] != kOk) {
                    std::cerr << "run " << run_name(plan[i].temperature) << " failed: " << errors[i] << '\n';
                    if (rc == kOk) rc = status[i];
                }
            }
            std::cout << "sweep: " << plan.size() << " runs into " << sw_dir << '\n';
            return rc;
        } else if (*fz) {
            require_files(fz_in);
            const auto paths = as_paths(fz_in);
            if (fz_dry) {
                std::cout << manifest_of_files(paths).size() << " rows\n";
                return kOk;
            }
            if (fz_out.empty()) throw CLI::RequiredError("--out");
            FeatureMatrix m;
            if (!fz_import.empty()) {
                m = import_embeddings(fz_import, manifest_of_files(paths));
            } else {
                FeaturizeOptions opts;
                opts.raster_size = fz_size;
                opts.hue = parse_hue_mode(fz_hue);
                if (!fz_frames.empty()) {
                    ensure_dir(fz_frames);
                    opts.frames_dir = fz_frames;
                }
                m = featurize_files(paths, opts);
            }
            write_features(fz_out, m);
            std::cout << "wrote " << m.rows() << " rows x " << m.dim << " dims to " << fz_out << '\n';
        } else if (*ld) {
            require_files({ld_in});
            const FeatureMatrix f = read_features(ld_in);
            SparseCodingConfig cfg;
            cfg.mu = ld_mu;
            cfg.outer_rounds = ld_rounds;
            cfg.jobs = g.jobs;
            std::cout << "n_a=" << ld_atoms << " mu=" << fmt_mu(ld_mu) << '\n';
            const LearnStage st = learn_stage(f, ld_atoms, cfg, g.seed.value_or(1), !ld_raw);
            write_dictionary(ld_out, st.dictionary);
            if (!ld_acts.empty()) write_activations(ld_acts, st.activations);
            std::cout << "objective " << fmt_g9(st.history.front()) << " -> " << fmt_g9(st.history.back()) << " over "
                      << st.history.size() - 1 << " rounds\n";
        } else if (*dc) {
            require_files({dc_dict, dc_in});
            Dictionary d = read_dictionary(dc_dict);
            if (dc_mu) d.mu = *dc_mu;
            const ActivationTable t = decompose(d, read_features(dc_in), g.jobs);
            write_activations(dc_out, t);
            std::cout << "wrote " << t.meta.size() << " activation rows to " << dc_out << '\n';
        } else if (*an) {
            require_files({an_acts});
            require_files(an_trajs);
            ensure_dir(an_dir);
            const ActivationTable acts = read_activations(an_acts);
            if (acts.meta.empty()) throw FormatError(an_acts + ": no rows");
            const fs::path dir(an_dir);
            write_boxplot_csv(dir / "boxplot.csv", activation_boxplot_stats(acts, an_exclude));
            const std::string run = an_run.empty() ? acts.meta.front().run : an_run;
            write_temporal_csv(dir / "temporal.csv", temporal_activation_map(select_run(acts, run)));
            std::vector<BehaviorRow> rows;
            for (const auto& p : an_trajs) {
                auto r = behavior_series(read_trajectory(p), run_name_of(p), an_cp);
                rows.insert(rows.end(), r.begin(), r.end());
            }
            write_behavior_csv(dir / "behavior.csv", rows);
            if (!an_dict.empty() && !an_features.empty()) {
                require_files({an_dict, an_features});
                const FeatureMatrix f = read_features(an_features);
                write_exemplars_csv(dir / "exemplars.csv", atom_exemplars(read_dictionary(an_dict), f, an_k), f);
            }
            std::cout << "wrote boxplot.csv, temporal.csv (" << run << "), behavior.csv to " << an_dir << '\n';
        } else if (*tt) {
            require_files({tt_in});
            const TemperatureData d = temperature_data(read_activations(tt_in), tt_tiles);
            if (g.seed) tcfg.seed = *g.seed;
            MlpModel first;
            const RepeatSummary s = train_repeats(d.X, d.kelvin, tcfg, tt_repeats, &first);
            write_model(tt_out, first);
            std::printf("validation MSE %.4f +- %.4f over %zu repeats (constant-mean baseline %.4f)\n", s.mean,
                        s.stddev, tt_repeats, s.baseline_mean);
        } else if (*pt) {
            require_files({pt_model, pt_in});
            const MlpModel m = read_model(pt_model);
            const ActivationTable acts = read_activations(pt_in);
            if (acts.meta.empty()) throw FormatError(pt_in + ": no rows");
            const std::string run = pt_run.empty() ? acts.meta.front().run : pt_run;
            const TemperatureData d = temperature_data(select_run(acts, run));
            std::vector<std::uint32_t> frames;
            for (const auto& x : d.meta) frames.push_back(x.frame);
            const auto pts = track(m, d.X, frames, d.kelvin);
            write_tracking_csv(pt_out, pts);
            std::vector<double> truth, pred;
            for (const auto& p : pts) {
                truth.push_back(p.true_norm);
                pred.push_back(p.predicted);
            }
            std::cout << "tracked " << pts.size() << " frames of " << run;
            if (pts.size() > 1) std::cout << ", spearman " << fmt_g9(spearman(truth, pred));
            std::cout << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.key() << ": " << e.what() << '\n';
        return kConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric abort at step " << e.step() << ": " << e.what() << '\n';
        return kNumeric;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}
