#include "mtswarm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "mtswarm/csv.hpp"
#include "mtswarm/simulation.hpp"

namespace mtswarm {

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
        i = j + 1;
    }
    return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("spearman: need at least two samples");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

std::vector<BoxStats> activation_boxplot_stats(const ActivationTable& acts, std::uint32_t exclude_first) {
    std::map<double, std::vector<std::size_t>> by_temp;
    for (std::size_t j = 0; j < acts.meta.size(); ++j) {
        if (acts.meta[j].frame >= exclude_first) by_temp[acts.meta[j].temperature].push_back(j);
    }
    if (by_temp.empty()) throw std::invalid_argument("activation_boxplot_stats: no samples left after exclusion");
    std::vector<BoxStats> out;
    std::vector<double> v;
    for (Eigen::Index a = 0; a < acts.C.rows(); ++a) {
        for (const auto& [temp, cols] : by_temp) {
            v.clear();
            for (std::size_t j : cols) v.push_back(acts.C(a, static_cast<Eigen::Index>(j)));
            std::sort(v.begin(), v.end());
            BoxStats s;
            s.atom = static_cast<std::size_t>(a);
            s.temperature = temp;
            s.n = v.size();
            s.q1 = quantile_sorted(v, 0.25);
            s.median = quantile_sorted(v, 0.5);
            s.q3 = quantile_sorted(v, 0.75);
            const double iqr = s.q3 - s.q1;
            const double lo_fence = s.q1 - 1.5 * iqr, hi_fence = s.q3 + 1.5 * iqr;
            s.lo = s.q1;
            s.hi = s.q3;
            for (double x : v) {
                if (x < lo_fence || x > hi_fence) {
                    s.outliers.push_back(x);
                } else {
                    s.lo = std::min(s.lo, x);
                    s.hi = std::max(s.hi, x);
                }
            }
            s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - s.mean) * (x - s.mean);
            s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
            out.push_back(std::move(s));
        }
    }
    return out;
}

FrameActivations frame_averages(const ActivationTable& acts) {
    std::map<std::pair<std::string, std::uint32_t>, std::size_t> index;
    FrameActivations out;
    std::vector<Eigen::VectorXd> sums;
    std::vector<double> counts;
    for (std::size_t j = 0; j < acts.meta.size(); ++j) {
        const auto& m = acts.meta[j];
        auto [it, fresh] = index.emplace(std::pair{m.run, m.frame}, out.frames.size());
        if (fresh) {
            out.frames.push_back({m.run, m.temperature, m.frame, 0});
            sums.push_back(Eigen::VectorXd::Zero(acts.C.rows()));
            counts.push_back(0.0);
        }
        sums[it->second] += acts.C.col(static_cast<Eigen::Index>(j));
        counts[it->second] += 1.0;
    }
    out.X.resize(static_cast<Eigen::Index>(sums.size()), acts.C.rows());
    for (std::size_t i = 0; i < sums.size(); ++i) out.X.row(static_cast<Eigen::Index>(i)) = sums[i] / counts[i];
    return out;
}

Eigen::MatrixXd temporal_activation_map(const ActivationTable& acts) {
    if (acts.meta.empty()) return Eigen::MatrixXd(0, acts.C.rows());
    std::uint32_t n_frames = 0;
    for (const auto& m : acts.meta) {
        if (m.run != acts.meta.front().run) {
            throw std::invalid_argument("temporal_activation_map: table mixes runs " + acts.meta.front().run + " and " +
                                        m.run);
        }
        n_frames = std::max(n_frames, m.frame + 1);
    }
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n_frames, acts.C.rows());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(n_frames);
    for (std::size_t j = 0; j < acts.meta.size(); ++j) {
        sum.row(acts.meta[j].frame) += acts.C.col(static_cast<Eigen::Index>(j)).transpose();
        count[acts.meta[j].frame] += 1.0;
    }
    for (Eigen::Index f = 0; f < sum.rows(); ++f) {
        if (count[f] > 0.0) sum.row(f) /= count[f];
    }
    return sum;
}

std::vector<std::vector<Exemplar>> atom_exemplars(const Dictionary& dict, const FeatureMatrix& features,
                                                  std::size_t k) {
    if (k == 0) throw std::invalid_argument("atom_exemplars: k must be >= 1");
    if (features.dim != dict.dim()) throw std::invalid_argument("atom_exemplars: feature dimension mismatch");
    const Eigen::MatrixXd Z = dict.transform.apply(to_matrix(features));
    const Eigen::RowVectorXd norms = Z.colwise().norm();
    std::vector<std::size_t> by_key(features.rows());
    std::iota(by_key.begin(), by_key.end(), 0);
    std::stable_sort(by_key.begin(), by_key.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = features.meta[a];
        const auto& y = features.meta[b];
        return std::tie(x.run, x.frame, x.tile) < std::tie(y.run, y.frame, y.tile);
    });
    std::vector<std::vector<Exemplar>> out(dict.n_atoms());
    for (std::size_t a = 0; a < dict.n_atoms(); ++a) {
        const Eigen::VectorXd atom = dict.atoms.col(static_cast<Eigen::Index>(a));
        const double an = atom.norm();
        std::vector<Exemplar> all;
        all.reserve(features.rows());
        for (std::size_t r : by_key) {
            const auto j = static_cast<Eigen::Index>(r);
            const double denom = an * norms[j];
            all.push_back({r, denom > 0.0 ? atom.dot(Z.col(j)) / denom : 0.0});
        }
        const std::size_t take = std::min(k, all.size());
        std::stable_sort(all.begin(), all.end(),
                         [](const Exemplar& x, const Exemplar& y) { return x.similarity > y.similarity; });
        out[a].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return out;
}

std::vector<BehaviorRow> behavior_series(const Trajectory& traj, const std::string& run, const ClusterParams& cp,
                                         const BehaviorThresholds& th) {
    std::vector<BehaviorRow> rows;
    rows.reserve(traj.n_frames());
    for (std::size_t f = 0; f < traj.n_frames(); ++f) {
        const FrameView view{traj.frames[f], traj.header.sites_per_filament, traj.box()};
        const auto cs = cluster_stats(view, cp);
        const double po = polar_order(view);
        rows.push_back({run, static_cast<std::uint32_t>(f), classify_behavior(cs.largest_fraction, po, th),
                        cs.largest_fraction, po});
    }
    return rows;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

void write_boxplot_csv(const std::filesystem::path& path, std::span<const BoxStats> stats) {
    auto out = open_out(path);
    out << "atom,temperature,q1,median,q3,lo,hi,n\n";
    for (const auto& s : stats) {
        out << s.atom << ',' << fmt_g17(s.temperature) << ',' << fmt_g17(s.q1) << ',' << fmt_g17(s.median) << ','
            << fmt_g17(s.q3) << ',' << fmt_g17(s.lo) << ',' << fmt_g17(s.hi) << ',' << s.n << '\n';
    }
}

void write_temporal_csv(const std::filesystem::path& path, const Eigen::MatrixXd& series) {
    auto out = open_out(path);
    out << "frame,atom,mean_activation\n";
    for (Eigen::Index f = 0; f < series.rows(); ++f) {
        for (Eigen::Index a = 0; a < series.cols(); ++a) out << f << ',' << a << ',' << fmt_g17(series(f, a)) << '\n';
    }
}

void write_behavior_csv(const std::filesystem::path& path, std::span<const BehaviorRow> rows) {
    auto out = open_out(path);
    out << "run,frame,label,largest_fraction,polar_order\n";
    for (const auto& r : rows) {
        out << r.run << ',' << r.frame << ',' << to_string(r.label) << ',' << fmt_g17(r.largest_fraction) << ','
            << fmt_g17(r.polar_order) << '\n';
    }
}

void write_exemplars_csv(const std::filesystem::path& path, const std::vector<std::vector<Exemplar>>& ex,
                         const FeatureMatrix& features) {
    auto out = open_out(path);
    out << "atom,rank,run,temperature,frame,tile,similarity\n";
    for (std::size_t a = 0; a < ex.size(); ++a) {
        for (std::size_t r = 0; r < ex[a].size(); ++r) {
            const auto& m = features.meta[ex[a][r].row];
            out << a << ',' << r << ',' << m.run << ',' << fmt_g17(m.temperature) << ',' << m.frame << ',' << m.tile
                << ',' << fmt_g17(ex[a][r].similarity) << '\n';
        }
    }
}

}  // namespace mtswarm
