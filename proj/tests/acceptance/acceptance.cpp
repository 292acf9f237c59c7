// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit if any fails.
//   acceptance [--only C5] [--cache DIR] [--prepare] [--jobs N]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mtswarm/analysis.hpp"
#include "mtswarm/behavior.hpp"
#include "mtswarm/csv.hpp"
#include "mtswarm/neighbor_grid.hpp"
#include "mtswarm/physics.hpp"
#include "mtswarm/pipeline.hpp"
#include "mtswarm/potentials.hpp"
#include "mtswarm/rng.hpp"

namespace fs = std::filesystem;
using namespace mtswarm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// ---- pinned tolerances --------------------------------------------------------
constexpr std::size_t kFullRows = 40500;
constexpr std::size_t kDeskRows = 2700;
constexpr double kC1Seconds = 300.0;
constexpr double kFdRelTol = 1e-6;
constexpr double kOrderSlope = 2.0, kOrderSlopeTol = 0.3;
constexpr double kC5Seconds = 900.0;
constexpr double kKktTol = 1e-6;
constexpr double kOracleTol = 1e-6;
constexpr double kMonotoneDrift = 1e-10;
constexpr double kPlantedCosine = 0.99;
constexpr double kDiscriminationSe = 3.0;
constexpr double kMseGain = 0.30;
constexpr double kStepSpearman = 0.8;
constexpr double kC9Seconds = 600.0;
constexpr double kGradRelTol = 1e-5;

// ---- desk protocol --------------------------------------------------------------
constexpr std::uint32_t kDeskFrames = 100;
constexpr std::uint32_t kDeskStepsPerFrame = 1000;
constexpr std::size_t kAtoms = 12;
constexpr double kMu = 1.0;
constexpr std::size_t kRounds = 50;
constexpr std::uint64_t kDictSeed = 1;
constexpr std::size_t kRepeats = 10;
constexpr std::uint32_t kStepFrame = kDeskFrames / 2;
constexpr std::uint64_t kStepSeed = 77;
constexpr std::uint32_t kExcludeFirst = 50;

unsigned g_jobs = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig desk_config() {
    SimConfig c;
    c.n_frames = kDeskFrames;
    c.steps_per_frame = kDeskStepsPerFrame;
    return c;
}

SparseCodingConfig desk_coding() {
    SparseCodingConfig c;
    c.mu = kMu;
    c.outer_rounds = kRounds;
    c.jobs = g_jobs;
    return c;
}

// ---- desk pipeline -----------------------------------------------------------------

struct Desk {
    fs::path dir;
    std::vector<fs::path> trajectories;
    fs::path features, dictionary, activations, model;
    std::vector<double> history;
    RepeatSummary repeats;
};

std::vector<fs::path> artifact_files(const Desk& d) {
    auto files = d.trajectories;
    files.insert(files.end(), {d.features, d.dictionary, d.activations, d.model});
    return files;
}

Desk desk_layout(const fs::path& dir) {
    Desk d;
    d.dir = dir;
    for (const char* t : {"T200", "T300", "T400"}) d.trajectories.push_back(dir / (std::string(t) + ".mtsw"));
    d.features = dir / "features.csv";
    d.dictionary = dir / "dictionary.csv";
    d.activations = dir / "activations.csv";
    d.model = dir / "model.csv";
    return d;
}

void write_lines(const fs::path& p, const std::vector<double>& v) {
    std::ofstream out(p);
    for (double x : v) out << fmt_g17(x) << '\n';
}

std::vector<double> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<double> v;
    for (std::string line; std::getline(in, line);) v.push_back(std::stod(line));
    return v;
}

Desk run_desk(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    Desk d = desk_layout(dir);
    const auto runs = sweep(desk_config(), 200.0, 400.0, 100.0, g_jobs);
    for (std::size_t i = 0; i < runs.size(); ++i) write_trajectory(d.trajectories[i], runs[i].trajectory);
    const FeatureMatrix fm = featurize_files(d.trajectories);
    write_features(d.features, fm);
    const LearnStage ls = learn_stage(fm, kAtoms, desk_coding(), kDictSeed);
    write_dictionary(d.dictionary, ls.dictionary);
    write_activations(d.activations, ls.activations);
    d.history = ls.history;
    const TemperatureData td = temperature_data(ls.activations);
    MlpModel first;
    d.repeats = train_repeats(td.X, td.kelvin, TrainConfig{}, kRepeats, &first);
    write_model(d.model, first);
    write_lines(dir / "history.txt", d.history);
    write_lines(dir / "repeats.txt", d.repeats.val_mse);
    write_lines(dir / "baseline.txt", d.repeats.baseline_mse);
    std::ofstream(dir / "config.txt") << desk_config().to_text();
    return d;
}

fs::path g_cache;

// Reuses the cached desk pipeline when it was produced by the current configuration.
const Desk& desk() {
    static std::optional<Desk> cached;
    if (cached) return *cached;
    Desk d = desk_layout(g_cache / "desk");
    std::ifstream cfg(d.dir / "config.txt");
    const std::string text{std::istreambuf_iterator<char>(cfg), std::istreambuf_iterator<char>()};
    bool ok = text == desk_config().to_text() && fs::exists(d.dir / "repeats.txt");
    for (const auto& f : artifact_files(d)) ok = ok && fs::exists(f);
    if (ok) {
        d.history = read_lines(d.dir / "history.txt");
        d.repeats.val_mse = read_lines(d.dir / "repeats.txt");
        d.repeats.baseline_mse = read_lines(d.dir / "baseline.txt");
        const auto n = static_cast<double>(d.repeats.val_mse.size());
        for (double v : d.repeats.val_mse) d.repeats.mean += v / n;
        for (double v : d.repeats.baseline_mse) d.repeats.baseline_mean += v / n;
        for (double v : d.repeats.val_mse) d.repeats.stddev += (v - d.repeats.mean) * (v - d.repeats.mean) / (n - 1);
        d.repeats.stddev = std::sqrt(d.repeats.stddev);
    } else {
        d = run_desk(d.dir);
    }
    cached = std::move(d);
    return *cached;
}

// ---- C1 ---------------------------------------------------------------------------------

Outcome c1() {
    std::vector<double> temps;
    for (double t = 200.0; t <= 400.0; t += 25.0) temps.push_back(t);
    const std::size_t full = protocol_manifest(temps, 500).size();

    const auto t0 = std::chrono::steady_clock::now();
    const auto runs = sweep(desk_config(), 200.0, 400.0, 100.0, g_jobs);
    FeatureMatrix fm;
    for (const auto& r : runs) fm.append(featurize(r.trajectory, run_name(r.entry.temperature)));
    const double secs = seconds_since(t0);
    const bool pass = full == kFullRows && fm.rows() == kDeskRows && secs < kC1Seconds;
    return {pass, "dry-run rows=" + std::to_string(full) + " desk rows=" + std::to_string(fm.rows()) +
                      " desk time=" + fmt("%.1fs", secs)};
}

// ---- C2 ---------------------------------------------------------------------------------

const SimBox kFdBox{40.0};

std::vector<SitePair> brute_pairs(const SwarmState& s, double cutoff) {
    std::vector<SitePair> out;
    for (std::uint32_t a = 0; a < s.n_sites(); ++a)
        for (std::uint32_t b = a + 1; b < s.n_sites(); ++b) {
            if (s.filament_of(a) == s.filament_of(b)) continue;
            const Vec2 d = minimum_image(s.positions[a], s.positions[b], kFdBox);
            if (norm(d) <= cutoff) out.push_back({a, b, norm(d), d});
        }
    return out;
}

SwarmState bent_pair(CounterRng& rng, double gap) {
    SwarmState s(2, 5);
    for (std::size_t f = 0; f < 2; ++f) {
        Vec2 p{15.0 + 0.2 * rng.normal(), 15.0 + gap * static_cast<double>(f)};
        double angle = 0.3 * (rng.uniform() - 0.5);
        for (std::size_t i = 0; i < 5; ++i) {
            s.positions[f * 5 + i] = p;
            angle += 0.4 * (rng.uniform() - 0.5);
            p += (0.9 + 0.2 * rng.uniform()) * Vec2{std::cos(angle), std::sin(angle)};
        }
    }
    return s;
}

// Largest |F - (-grad U)| relative to the largest force component.
double fd_relative_error(const SwarmState& s0, const PotentialParams& pp, const ForceTerms& terms) {
    const double h = 1e-6, temp = 250.0;
    std::vector<Vec2> f(s0.n_sites());
    total_forces(s0, pp, temp, brute_pairs(s0, pp.interaction_cutoff()), {}, kFdBox, f, terms);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < s0.n_sites(); ++i)
        for (int c = 0; c < 2; ++c) {
            SwarmState sp = s0, sm = s0;
            (c == 0 ? sp.positions[i].x : sp.positions[i].y) += h;
            (c == 0 ? sm.positions[i].x : sm.positions[i].y) -= h;
            const double up = total_energy(sp, pp, temp, brute_pairs(sp, pp.interaction_cutoff()), kFdBox, terms);
            const double um = total_energy(sm, pp, temp, brute_pairs(sm, pp.interaction_cutoff()), kFdBox, terms);
            const double an = c == 0 ? f[i].x : f[i].y;
            worst = std::max(worst, std::abs(an + (up - um) / (2 * h)));
            scale = std::max(scale, std::abs(an));
        }
    return scale > 0.0 ? worst / scale : worst;
}

Outcome c2() {
    PotentialParams pp;
    pp.mech.kappa_bend = 30.0;
    pp.mech.k_tension = 200.0;
    pp.mech.lj_epsilon = 2.0;
    CounterRng rng(2);
    struct Term {
        const char* name;
        bool ForceTerms::*member;
        double gap;
    };
    bool pass = true;
    std::string detail;
    for (const Term& t : {Term{"bend", &ForceTerms::bend, 3.0}, Term{"tension", &ForceTerms::tension, 3.0},
                          Term{"lj", &ForceTerms::lj, 1.0}, Term{"dna", &ForceTerms::dna, 1.5}}) {
        ForceTerms terms{false, false, false, false, false, false};
        terms.*t.member = true;
        double worst = 0.0;
        for (int done = 0; done < 20;) {
            const SwarmState s = bent_pair(rng, t.gap);
            const auto pairs = brute_pairs(s, pp.interaction_cutoff() + 0.1);
            // keep finite differences away from the cutoffs
            const bool clear = std::none_of(pairs.begin(), pairs.end(), [&](const SitePair& p) {
                return std::abs(p.distance - pp.mech.lj_cutoff) < 1e-4 || std::abs(p.distance - pp.dna.cutoff) < 1e-4;
            });
            const bool engaged =
                (t.member != &ForceTerms::lj || std::any_of(pairs.begin(), pairs.end(), [&](const SitePair& p) {
                     return p.distance < pp.mech.lj_cutoff;
                 })) &&
                (t.member != &ForceTerms::dna || !pairs.empty());
            if (!clear || !engaged) continue;
            worst = std::max(worst, fd_relative_error(s, pp, terms));
            ++done;
        }
        pass = pass && worst <= kFdRelTol;
        detail += std::string(t.name) + "=" + fmt("%.2e", worst) + " ";
    }
    return {pass, "max relative error " + detail};
}

// ---- C3 ---------------------------------------------------------------------------------

Outcome c3() {
    const SimBox box{50.0};
    const FrictionParams fr{1.0, 2.0};
    MechanicalParams mp;
    mp.k_tension = 4.0;
    const ForceEvaluator field = [mp, box](const SwarmState& s, std::span<Vec2> out) {
        for (auto& f : out) f = {};
        for (std::size_t f = 0; f < s.n_filaments; ++f) add_tension_forces(s.filament(f), mp, box, out.subspan(f * 2, 2));
        const Vec2 d = minimum_image(s.positions[1], s.positions[2], box);
        const double r = norm(d);
        const Vec2 pull = 3.0 * (r - 1.5) / r * d;
        out[1] += pull;
        out[2] -= pull;
    };
    auto integrate = [&](double dt) {
        SwarmState s(2, 2);
        s.positions = {{10.0, 10.0}, {9.0, 10.3}, {10.4, 11.2}, {9.6, 12.1}};
        const auto n = std::llround(0.4 / dt);
        for (long long i = 0; i < n; ++i) midstep_advance(s, field, dt, fr, box);
        return s;
    };
    const std::vector<double> dts{1e-2, 5e-3, 2.5e-3};
    const SwarmState ref = integrate(dts.back() / 100.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double dt : dts) {
        const SwarmState s = integrate(dt);
        double e = 0.0;
        for (std::size_t i = 0; i < s.positions.size(); ++i)
            e = std::max(e, norm(minimum_image(s.positions[i], ref.positions[i], box)));
        const double x = std::log(dt), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(dts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {std::abs(slope - kOrderSlope) <= kOrderSlopeTol, "log-log slope " + fmt("%.3f", slope)};
}

// ---- C4 ---------------------------------------------------------------------------------

Outcome c4() {
    CounterRng rng(4);
    const SimBox box{30.0};
    const double cutoff = 2.0;
    const std::size_t per = 5;
    std::size_t discrepancies = 0, total = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Vec2> sites(1000);
        for (auto& p : sites) p = {rng.uniform() * box.side, rng.uniform() * box.side};
        std::vector<std::pair<std::uint32_t, std::uint32_t>> want, got;
        for (std::uint32_t a = 0; a < sites.size(); ++a)
            for (std::uint32_t b = a + 1; b < sites.size(); ++b)
                if (a / per != b / per && norm2(minimum_image(sites[a], sites[b], box)) <= cutoff * cutoff)
                    want.emplace_back(a, b);
        for (const auto& p : CellGrid::build(sites, box, cutoff).inter_filament_pairs(cutoff, per)) got.emplace_back(p.a, p.b);
        std::sort(got.begin(), got.end());
        std::vector<std::pair<std::uint32_t, std::uint32_t>> diff;
        std::set_symmetric_difference(got.begin(), got.end(), want.begin(), want.end(), std::back_inserter(diff));
        discrepancies += diff.size();
        total += want.size();
    }
    return {discrepancies == 0, std::to_string(discrepancies) + " discrepancies over " + std::to_string(total) + " pairs"};
}

// ---- C5 ---------------------------------------------------------------------------------

Outcome c5() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> temps{200.0, 300.0, 400.0};
    struct Job {
        double temp;
        std::uint64_t seed;
        std::vector<BehaviorRow> rows;
    };
    std::vector<Job> jobs;
    for (double t : temps)
        for (std::uint64_t s = 1; s <= 3; ++s) jobs.push_back({t, s, {}});
    {
        std::vector<std::jthread> pool;
        const unsigned workers = std::max(1u, std::min<unsigned>(g_jobs, static_cast<unsigned>(jobs.size())));
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < jobs.size(); i += workers) {
                    SimConfig c;  // 100 filaments, 5 sites, 500 frames
                    c.seed = jobs[i].seed;
                    c.temperature = TemperatureSchedule::fixed(jobs[i].temp);
                    const auto traj = run(c);
                    auto rows = behavior_series(traj, run_name(jobs[i].temp));
                    jobs[i].rows.assign(rows.end() - 100, rows.end());
                }
            });
    }
    std::map<double, double> lf;
    std::map<double, std::array<int, 3>> votes;
    for (const auto& j : jobs)
        for (const auto& r : j.rows) {
            lf[j.temp] += r.largest_fraction / 300.0;
            ++votes[j.temp][static_cast<int>(r.label)];
        }
    auto majority = [&](double t) {
        const auto& v = votes[t];
        return static_cast<BehaviorLabel>(std::max_element(v.begin(), v.end()) - v.begin());
    };
    const double secs = seconds_since(t0);
    const bool ordered = lf[200] > lf[300] && lf[300] > lf[400];
    const bool labels = majority(200) == BehaviorLabel::strong_swarming &&
                        majority(300) != BehaviorLabel::strong_swarming && majority(400) == BehaviorLabel::disorder;
    std::string detail;
    for (double t : temps) {
        const auto& v = votes[t];
        detail += run_name(t) + " lf=" + fmt("%.3f", lf[t]) + " D/P/S=" + std::to_string(v[0]) + "/" +
                  std::to_string(v[1]) + "/" + std::to_string(v[2]) + "; ";
    }
    return {ordered && labels && secs < kC5Seconds, detail + "time=" + fmt("%.0fs", secs)};
}

// ---- C6 ---------------------------------------------------------------------------------

VectorXd lasso_coordinate_descent(const VectorXd& z, const MatrixXd& T, double mu) {
    VectorXd c = VectorXd::Zero(T.cols());
    VectorXd r = z;
    for (int sweep = 0; sweep < 200000; ++sweep) {
        double moved = 0.0;
        for (Eigen::Index j = 0; j < T.cols(); ++j) {
            const double a = T.col(j).squaredNorm();
            const double rho = T.col(j).dot(r) + a * c(j);
            const double next = std::copysign(std::max(std::abs(rho) - mu, 0.0), rho) / a;
            if (next != c(j)) {
                r -= (next - c(j)) * T.col(j);
                moved = std::max(moved, std::abs(next - c(j)));
                c(j) = next;
            }
        }
        if (moved < 1e-13) break;
    }
    return c;
}

Outcome c6() {
    // oracle comparison
    CounterRng rng(6);
    double worst_gap = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        MatrixXd T(8, 4);
        for (Eigen::Index i = 0; i < T.size(); ++i) T.data()[i] = rng.normal();
        T.colwise().normalize();
        VectorXd z(8);
        for (Eigen::Index i = 0; i < 8; ++i) z(i) = 2.0 * rng.normal();
        SparseCodingConfig cfg;
        cfg.mu = 0.1 + rng.uniform();
        const auto got = sparse_code(z, T, cfg);
        const VectorXd want = lasso_coordinate_descent(z, T, cfg.mu);
        worst_gap = std::max(worst_gap, std::abs(coding_objective(z, T, got.coefficients, cfg.mu) -
                                                 coding_objective(z, T, want, cfg.mu)));
    }
    // desk activations and alternation history
    const Desk& d = desk();
    const Dictionary dict = read_dictionary(d.dictionary);
    const ActivationTable acts = read_activations(d.activations);
    const MatrixXd Z = dict.transform.apply(to_matrix(read_features(d.features)));
    double worst_kkt = 0.0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        worst_kkt = std::max(worst_kkt, kkt_residual(Z.col(j), dict.atoms, acts.C.col(j), dict.mu));
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < d.history.size(); ++i) worst_rise = std::max(worst_rise, d.history[i] - d.history[i - 1]);
    const bool pass = worst_gap <= kOracleTol && worst_kkt <= kKktTol && worst_rise <= kMonotoneDrift &&
                      d.history.size() == kRounds + 1;
    return {pass, "oracle gap " + fmt("%.2e", worst_gap) + ", desk KKT " + fmt("%.2e", worst_kkt) + ", max rise " +
                      fmt("%.2e", worst_rise) + " over " + std::to_string(d.history.size() - 1) + " rounds"};
}

// ---- C7 ---------------------------------------------------------------------------------

Outcome c7() {
    CounterRng rng(7);
    const Eigen::Index d = 64, n_a = 4, n = 200;
    MatrixXd T0(d, n_a);
    for (Eigen::Index i = 0; i < T0.size(); ++i) T0.data()[i] = rng.normal();
    T0.colwise().normalize();
    MatrixXd C0 = MatrixXd::Zero(n_a, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto skip = static_cast<Eigen::Index>(rng.below(4));  // 3-sparse: one atom left out
        for (Eigen::Index a = 0; a < n_a; ++a)
            if (a != skip) C0(a, j) = 2.0 * rng.normal();
    }
    const MatrixXd Z = T0 * C0;
    // continuation on mu: a coarse fit, then a near-exact one from its atoms
    SparseCodingConfig cfg;
    cfg.mu = 1.0;
    cfg.outer_rounds = 50;
    const auto coarse = learn_dictionary(Z, n_a, cfg, 3);
    cfg.mu = 0.1;
    cfg.outer_rounds = 100;
    const auto fine = learn_dictionary(Z, n_a, cfg, 3, &coarse.dictionary.atoms);
    const MatrixXd cosines = (fine.dictionary.atoms.transpose() * T0).cwiseAbs();
    double worst = 1.0;
    for (Eigen::Index k = 0; k < n_a; ++k) worst = std::min(worst, cosines.col(k).maxCoeff());
    // the match must be a permutation
    bool permutation = true;
    for (Eigen::Index k = 0; k < n_a; ++k) {
        Eigen::Index best;
        cosines.col(k).maxCoeff(&best);
        for (Eigen::Index other = 0; other < k; ++other) {
            Eigen::Index b2;
            cosines.col(other).maxCoeff(&b2);
            permutation = permutation && b2 != best;
        }
    }
    return {permutation && worst >= kPlantedCosine, "min matched |cosine| " + fmt("%.5f", worst)};
}

// ---- C8 ---------------------------------------------------------------------------------

Outcome c8() {
    const ActivationTable acts = read_activations(desk().activations);
    double best = 0.0;
    std::size_t best_atom = 0;
    for (Eigen::Index a = 0; a < acts.C.rows(); ++a) {
        std::map<double, std::vector<double>> by_t;
        for (std::size_t j = 0; j < acts.meta.size(); ++j)
            if (acts.meta[j].frame >= kExcludeFirst)
                by_t[acts.meta[j].temperature].push_back(std::abs(acts.C(a, static_cast<Eigen::Index>(j))));
        auto moments = [](const std::vector<double>& v) {
            double m = 0.0, s = 0.0;
            for (double x : v) m += x / static_cast<double>(v.size());
            for (double x : v) s += (x - m) * (x - m) / static_cast<double>(v.size() - 1);
            return std::pair{m, s / static_cast<double>(v.size())};
        };
        const auto [m2, v2] = moments(by_t[200.0]);
        const auto [m4, v4] = moments(by_t[400.0]);
        const double se = std::sqrt(v2 + v4);
        const double ratio = se > 0.0 ? std::abs(m2 - m4) / se : (m2 != m4 ? INFINITY : 0.0);
        if (ratio > best) {
            best = ratio;
            best_atom = static_cast<std::size_t>(a);
        }
    }
    return {best >= kDiscriminationSe,
            "atom " + std::to_string(best_atom) + " separates 200K and 400K by " + fmt("%.1f", best) + " SE"};
}

// ---- C9 ---------------------------------------------------------------------------------

Outcome c9() {
    const auto t0 = std::chrono::steady_clock::now();
    const Desk& d = desk();
    const auto& r = d.repeats;
    const bool a_pass = r.mean <= (1.0 - kMseGain) * r.baseline_mean;

    SimConfig step = desk_config();
    step.seed = kStepSeed;
    step.temperature = TemperatureSchedule::parse("0:200," + std::to_string(kStepFrame) + ":400");
    FeatureMatrix fm = featurize(run(step), "step");
    const ActivationTable acts = decompose(read_dictionary(d.dictionary), fm, g_jobs);
    const TemperatureData td = temperature_data(acts);
    const MlpModel model = read_model(d.model);
    const VectorXd pred = predict_rows(model, td.X);
    std::vector<double> p(pred.data(), pred.data() + pred.size()), truth;
    for (double k : td.kelvin) truth.push_back(normalize_temperature(k));
    const double rho = spearman(p, truth);
    const auto cross = sustained_crossing(p, 0.5);
    const bool b_pass = rho >= kStepSpearman && cross && *cross > kStepFrame;
    const double secs = seconds_since(t0);
    return {a_pass && b_pass && secs < kC9Seconds,
            "(a) MSE " + fmt("%.4f", r.mean) + " +- " + fmt("%.4f", r.stddev) + " vs baseline " +
                fmt("%.4f", r.baseline_mean) + " over " + std::to_string(r.val_mse.size()) + " repeats; (b) Spearman " +
                fmt("%.3f", rho) + ", crossing frame " + (cross ? std::to_string(*cross) : std::string("none")) +
                " vs step " + std::to_string(kStepFrame)};
}

// ---- C10 --------------------------------------------------------------------------------

Outcome c10() {
    CounterRng rng(10);
    double worst = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
        MlpModel m = MlpModel::zeros(12, 32);
        VectorXd p(m.parameter_count());
        for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = 0.5 * rng.normal();
        m.set_parameters(p);
        MatrixXd X(20, 12);
        VectorXd y(20);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.uniform();
        VectorXd g;
        mse_and_gradient(m, X, y, &g);
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            MlpModel a = m, b = m;
            VectorXd pa = p, pb = p;
            pa(i) += h;
            pb(i) -= h;
            a.set_parameters(pa);
            b.set_parameters(pb);
            const double fd = (mse_and_gradient(a, X, y, nullptr) - mse_and_gradient(b, X, y, nullptr)) / (2 * h);
            worst = std::max(worst, std::abs(fd - g(i)) / std::max(1.0, std::abs(fd)));
        }
    }
    return {worst <= kGradRelTol, "max relative gradient error " + fmt("%.2e", worst)};
}

// ---- C11 --------------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome c11() {
    const Desk& a = desk();
    const Desk b = run_desk(g_cache / "desk_rerun");
    const auto fa = artifact_files(a), fb = artifact_files(b);
    std::vector<std::string> differ;
    for (std::size_t i = 0; i < fa.size(); ++i)
        if (slurp(fa[i]) != slurp(fb[i])) differ.push_back(fa[i].filename().string());
    std::string detail = std::to_string(fa.size() - differ.size()) + "/" + std::to_string(fa.size()) + " files identical";
    for (const auto& f : differ) detail += " " + f;
    return {differ.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<std::string> only;
    bool prepare = false;
    g_cache = fs::current_path() / "acceptance_cache";
    g_jobs = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--only", only, "criteria to run (C1..C11)");
    app.add_option("--cache", g_cache, "directory holding the desk pipeline outputs");
    app.add_option("--jobs", g_jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--prepare", prepare, "rebuild the desk pipeline cache and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare) {
            const auto t0 = std::chrono::steady_clock::now();
            run_desk(g_cache / "desk");
            std::cout << "desk pipeline prepared in " << fmt("%.0fs", seconds_since(t0)) << '\n';
            return 0;
        }
        const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
            {"C1", c1}, {"C2", c2}, {"C3", c3}, {"C4", c4},  {"C5", c5},  {"C6", c6},
            {"C7", c7}, {"C8", c8}, {"C9", c9}, {"C10", c10}, {"C11", c11}};
        bool all = true;
        for (const auto& [name, fn] : criteria) {
            if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
            const Outcome o = fn();
            std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail << std::endl;
            all = all && o.pass;
        }
        return all ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << '\n';
        return 2;
    }
}
