#include "mtswarm/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mtswarm/csv.hpp"
#include "mtswarm/errors.hpp"
#include "mtswarm/rng.hpp"

namespace mtswarm {

namespace {

constexpr double kKktTarget = 1e-7;
constexpr double kDuplicateCosine = 0.999;
constexpr double kRidge = 1e-8;

double soft(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// Quantities shared by every column coded against the same dictionary.
struct Gram {
    Eigen::MatrixXd G;
    double L = 1.0;

    explicit Gram(const Eigen::MatrixXd& T) : G(T.transpose() * T) {
        if (G.size() == 0) return;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
        L = std::max(es.eigenvalues().maxCoeff(), 1e-300) * (1.0 + 1e-12);
    }
};

// Objective up to the constant 0.5 ||z||^2.
double smooth_plus_l1(const Gram& g, const Eigen::VectorXd& b, const Eigen::VectorXd& c, double mu) {
    return 0.5 * c.dot(g.G * c) - b.dot(c) + mu * c.lpNorm<1>();
}

double kkt_from_gradient(const Eigen::VectorXd& grad, const Eigen::VectorXd& c, double mu) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double v = c[i] == 0.0 ? std::max(0.0, std::abs(grad[i]) - mu)
                                     : std::abs(grad[i] + (c[i] > 0.0 ? mu : -mu));
        worst = std::max(worst, v);
    }
    return worst;
}

// Exact solve on the support of x assuming its signs; empty when the
// signs are inconsistent or the reduced system is singular.
bool polish(const Gram& g, const Eigen::VectorXd& b, const Eigen::VectorXd& x, double mu, Eigen::VectorXd& out) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) support.push_back(i);
    }
    out = Eigen::VectorXd::Zero(x.size());
    if (support.empty()) return true;
    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd Gs(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        rhs[r] = b[support[r]] - (x[support[r]] > 0.0 ? mu : -mu);
        for (Eigen::Index c = 0; c < k; ++c) Gs(r, c) = g.G(support[r], support[c]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Gs);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13) return false;
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    for (Eigen::Index r = 0; r < k; ++r) {
        const double v = sol[r];
        if (v == 0.0 || (v > 0.0) != (x[support[r]] > 0.0)) return false;
        out[support[r]] = v;
    }
    return true;
}

ActivationRecord solve_column(const Eigen::VectorXd& z, const Eigen::MatrixXd& T, const Gram& g,
                              const SparseCodingConfig& cfg, const Eigen::VectorXd* warm) {
    const Eigen::Index k = T.cols();
    const double mu = cfg.mu;
    const Eigen::VectorXd b = T.transpose() * z;
    Eigen::VectorXd x = warm ? *warm : Eigen::VectorXd::Zero(k);
    if (x.size() != k) throw std::invalid_argument("sparse_code: warm start has wrong length");

    double fx = smooth_plus_l1(g, b, x, mu);
    Eigen::VectorXd y = x, u(k), grad(k), cand(k);
    double t = 1.0;
    bool done = false;
    for (std::size_t it = 0; it < cfg.max_iter && !done; ++it) {
        if (it % 10 == 0) {
            grad = g.G * x - b;
            if (kkt_from_gradient(grad, x, mu) <= kKktTarget) break;
            if (polish(g, b, x, mu, cand)) {
                grad = g.G * cand - b;
                const double fc = smooth_plus_l1(g, b, cand, mu);
                if (kkt_from_gradient(grad, cand, mu) <= kKktTarget && fc <= fx) {
                    x = cand;
                    fx = fc;
                    break;
                }
            }
        }
        grad = g.G * y - b;
        for (Eigen::Index i = 0; i < k; ++i) u[i] = soft(y[i] - grad[i] / g.L, mu / g.L);
        const double fu = smooth_plus_l1(g, b, u, mu);
        const Eigen::VectorXd x_prev = x;
        if (fu <= fx) {
            x = u;
            fx = fu;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x + (t / t_next) * (u - x) + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
        if (x == x_prev && u == x) done = true;  // fixed point
    }

    ActivationRecord rec;
    rec.coefficients = x;
    rec.objective = coding_objective(z, T, x, mu);
    if (warm) {
        const double fw = coding_objective(z, T, *warm, mu);
        if (fw < rec.objective) {
            rec.coefficients = *warm;
            rec.objective = fw;
        }
    }
    rec.converged = kkt_residual(z, T, rec.coefficients, mu) <= 1e-6;
    return rec;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
}

double total_objective(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& T, const Eigen::MatrixXd& C, double mu,
                       Eigen::VectorXd* per_column = nullptr) {
    double sum = 0.0;
    if (per_column) per_column->resize(Z.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        const double f = coding_objective(Z.col(j), T, C.col(j), mu);
        if (per_column) (*per_column)[j] = f;
        sum += f;
    }
    return sum;
}

// Unit-normalise the columns of T, scaling the rows of C to keep T C.
void normalize_atoms(Eigen::MatrixXd& T, Eigen::MatrixXd& C) {
    for (Eigen::Index j = 0; j < T.cols(); ++j) {
        const double n = T.col(j).norm();
        if (n > 0.0) {
            T.col(j) /= n;
            C.row(j) *= n;
        }
    }
}

bool parallel_to_any(const Eigen::VectorXd& v, const Eigen::MatrixXd& T, Eigen::Index skip) {
    for (Eigen::Index i = 0; i < T.cols(); ++i) {
        if (i == skip) continue;
        const double n = T.col(i).norm();
        if (n == 0.0) continue;
        if (std::abs(T.col(i).dot(v)) / n >= kDuplicateCosine) return true;
    }
    return false;
}

}  // namespace

void SparseCodingConfig::validate() const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be >= 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be >= 0");
}

FeatureTransform FeatureTransform::standardize(const Eigen::MatrixXd& Z) {
    FeatureTransform t;
    const auto n = static_cast<double>(Z.cols());
    t.center = Z.rowwise().mean();
    t.scale.resize(Z.rows());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const double var = n > 0 ? (Z.row(i).array() - t.center[i]).square().sum() / n : 0.0;
        const double sd = std::sqrt(var);
        t.scale[i] = sd > 1e-12 ? sd : 1.0;
    }
    return t;
}

Eigen::MatrixXd FeatureTransform::apply(const Eigen::MatrixXd& Z) const {
    if (is_identity()) return Z;
    if (center.size() != Z.rows()) throw std::invalid_argument("FeatureTransform: dimension mismatch");
    Eigen::MatrixXd out = Z.colwise() - center;
    return scale.cwiseInverse().asDiagonal() * out;
}

double coding_objective(const Eigen::VectorXd& z, const Eigen::MatrixXd& T, const Eigen::VectorXd& c, double mu) {
    return 0.5 * (z - T * c).squaredNorm() + mu * c.lpNorm<1>();
}

double kkt_residual(const Eigen::VectorXd& z, const Eigen::MatrixXd& T, const Eigen::VectorXd& c, double mu) {
    const Eigen::VectorXd grad = T.transpose() * (T * c - z);
    return kkt_from_gradient(grad, c, mu);
}

ActivationRecord sparse_code(const Eigen::VectorXd& z, const Eigen::MatrixXd& T, const SparseCodingConfig& cfg,
                             const Eigen::VectorXd* warm) {
    cfg.validate();
    if (z.size() != T.rows()) throw std::invalid_argument("sparse_code: feature dimension does not match dictionary");
    return solve_column(z, T, Gram(T), cfg, warm);
}

CodingResult sparse_code_all(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& T, const SparseCodingConfig& cfg,
                             const Eigen::MatrixXd* warm) {
    cfg.validate();
    if (Z.rows() != T.rows()) throw std::invalid_argument("sparse_code: feature dimension does not match dictionary");
    if (warm && (warm->rows() != T.cols() || warm->cols() != Z.cols())) {
        throw std::invalid_argument("sparse_code: warm start has wrong shape");
    }
    const Gram g(T);
    CodingResult out;
    out.C.resize(T.cols(), Z.cols());
    out.objective.resize(Z.cols());
    std::vector<char> ok(static_cast<std::size_t>(Z.cols()), 1);
    parallel_for(static_cast<std::size_t>(Z.cols()), cfg.jobs, [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        Eigen::VectorXd w;
        if (warm) w = warm->col(jj);
        const auto rec = solve_column(Z.col(jj), T, g, cfg, warm ? &w : nullptr);
        out.C.col(jj) = rec.coefficients;
        out.objective[jj] = rec.objective;
        ok[j] = rec.converged;
    });
    out.unconverged = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 0));
    return out;
}

Eigen::MatrixXd dictionary_update(const Eigen::MatrixXd& Z, Eigen::MatrixXd& C, const Eigen::MatrixXd& T_prev) {
    const Eigen::Index d = Z.rows(), n_a = C.rows();
    if (C.cols() != Z.cols() || T_prev.rows() != d || T_prev.cols() != n_a) {
        throw std::invalid_argument("dictionary_update: inconsistent dimensions");
    }
    std::vector<Eigen::Index> used;
    for (Eigen::Index j = 0; j < n_a; ++j) {
        if (C.row(j).cwiseAbs().maxCoeff() > 0.0) used.push_back(j);
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d, n_a);
    if (!used.empty()) {
        const auto u = static_cast<Eigen::Index>(used.size());
        Eigen::MatrixXd Cu(u, C.cols());
        for (Eigen::Index r = 0; r < u; ++r) Cu.row(r) = C.row(used[r]);
        Eigen::MatrixXd A = Cu * Cu.transpose();
        const Eigen::MatrixXd B = Z * Cu.transpose();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-14) {
            A.diagonal().array() += kRidge;
            ldlt.compute(A);
        }
        const Eigen::MatrixXd Tu = ldlt.solve(B.transpose()).transpose();
        for (Eigen::Index r = 0; r < u; ++r) T.col(used[r]) = Tu.col(r);
    }
    normalize_atoms(T, C);

    // Collapse duplicates onto the earlier atom; the later one becomes free.
    std::vector<bool> dead(static_cast<std::size_t>(n_a), false);
    for (Eigen::Index j = 0; j < n_a; ++j) {
        if (T.col(j).norm() == 0.0) {
            dead[j] = true;
            continue;
        }
        for (Eigen::Index i = 0; i < j; ++i) {
            if (dead[i]) continue;
            const double cosine = T.col(i).dot(T.col(j));
            if (std::abs(cosine) >= kDuplicateCosine) {
                C.row(i) += (cosine > 0.0 ? 1.0 : -1.0) * C.row(j);
                C.row(j).setZero();
                T.col(j).setZero();
                dead[j] = true;
                break;
            }
        }
    }
    if (std::none_of(dead.begin(), dead.end(), [](bool b) { return b; })) return T;

    // Re-seed free atoms from the worst-reconstructed data columns.
    const Eigen::VectorXd err = (Z - T * C).colwise().squaredNorm().transpose();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(Z.cols()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return err[a] > err[b]; });
    std::size_t next = 0;
    for (Eigen::Index j = 0; j < n_a; ++j) {
        if (!dead[j]) continue;
        bool seeded = false;
        while (next < order.size() && !seeded) {
            const Eigen::VectorXd z = Z.col(order[next++]);
            const double n = z.norm();
            if (n == 0.0) continue;
            const Eigen::VectorXd v = z / n;
            if (parallel_to_any(v, T, j)) continue;
            T.col(j) = v;
            seeded = true;
        }
        if (!seeded) T.col(j) = T_prev.col(j);
    }
    return T;
}

LearnResult learn_dictionary(const Eigen::MatrixXd& Z, std::size_t n_atoms, const SparseCodingConfig& cfg,
                             std::uint64_t seed, const Eigen::MatrixXd* init) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(Z.cols());
    if (n_atoms == 0) throw std::invalid_argument("learn_dictionary: n_atoms must be positive");
    if (n_atoms > n) {
        throw std::invalid_argument("learn_dictionary: n_atoms (" + std::to_string(n_atoms) +
                                    ") exceeds the number of data columns (" + std::to_string(n) + ")");
    }
    const auto n_a = static_cast<Eigen::Index>(n_atoms);

    // Seeded partial Fisher-Yates over column indices.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    CounterRng rng = CounterRng(seed).substream(3);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(Z.rows(), n_a);
    Eigen::Index filled = 0;
    if (init) {
        if (init->rows() != Z.rows() || init->cols() != n_a) {
            throw std::invalid_argument("learn_dictionary: initial dictionary has wrong shape");
        }
        T = *init;
        for (Eigen::Index j = 0; j < n_a; ++j) {
            const double norm = T.col(j).norm();
            if (norm == 0.0) throw std::invalid_argument("learn_dictionary: initial dictionary has a zero atom");
            T.col(j) /= norm;
        }
        filled = n_a;
    }
    for (std::size_t i = 0; i < n && filled < n_a; ++i) {
        std::swap(idx[i], idx[i + rng.below(n - i)]);
        const Eigen::VectorXd z = Z.col(static_cast<Eigen::Index>(idx[i]));
        const double norm = z.norm();
        if (norm == 0.0) continue;
        const Eigen::VectorXd v = z / norm;
        if (parallel_to_any(v, T.leftCols(filled), -1)) continue;
        T.col(filled++) = v;
    }
    if (filled < n_a) throw std::invalid_argument("learn_dictionary: not enough distinct nonzero data columns");

    LearnResult res;
    CodingResult coded = sparse_code_all(Z, T, cfg);
    Eigen::MatrixXd C = coded.C;
    Eigen::VectorXd per_col;
    double f = total_objective(Z, T, C, cfg.mu, &per_col);
    res.history.push_back(f);

    for (std::size_t round = 0; round < cfg.outer_rounds; ++round) {
        Eigen::MatrixXd C_mod = C;
        const Eigen::MatrixXd T_mod = dictionary_update(Z, C_mod, T);
        bool accepted = false;
        for (int halvings = 0; halvings <= 8 && !accepted; ++halvings) {
            const double alpha = std::ldexp(1.0, -halvings);
            Eigen::MatrixXd T_try, C_try;
            if (halvings == 0) {
                T_try = T_mod;
                C_try = C_mod;
            } else {
                T_try = T + alpha * (T_mod - T);
                C_try = C;
                normalize_atoms(T_try, C_try);
                if (T_try.colwise().norm().minCoeff() == 0.0) continue;
            }
            const double f_try = total_objective(Z, T_try, C_try, cfg.mu);
            if (f_try <= f) {
                T = std::move(T_try);
                C = std::move(C_try);
                f = f_try;
                accepted = true;
            }
        }
        if (!accepted) {
            // Only swap out atoms nobody uses; T C is untouched.
            for (Eigen::Index j = 0; j < n_a; ++j) {
                if (C.row(j).cwiseAbs().maxCoeff() == 0.0) T.col(j) = T_mod.col(j);
            }
            f = total_objective(Z, T, C, cfg.mu);
        }
        coded = sparse_code_all(Z, T, cfg, &C);
        C = coded.C;
        const double f_new = total_objective(Z, T, C, cfg.mu, &per_col);
        const double prev = res.history.back();
        res.history.push_back(f_new);
        f = f_new;
        res.rounds = round + 1;
        if (cfg.tol > 0.0 && std::abs(prev - f_new) <= cfg.tol * std::max(std::abs(prev), 1e-300)) break;
    }

    res.dictionary.atoms = T;
    res.dictionary.mu = cfg.mu;
    res.dictionary.relevancy_order.resize(n_atoms);
    std::iota(res.dictionary.relevancy_order.begin(), res.dictionary.relevancy_order.end(), 0);
    res.activations = C;
    res.objective = per_col;
    return res;
}

std::vector<std::size_t> rank_atoms(const Eigen::MatrixXd& C, std::span<const double> temperatures) {
    if (static_cast<std::size_t>(C.cols()) != temperatures.size()) {
        throw std::invalid_argument("rank_atoms: one temperature per activation column required");
    }
    std::vector<double> temps(temperatures.begin(), temperatures.end());
    std::sort(temps.begin(), temps.end());
    temps.erase(std::unique(temps.begin(), temps.end()), temps.end());

    const auto n_a = static_cast<std::size_t>(C.rows());
    std::vector<std::size_t> order(n_a);
    std::iota(order.begin(), order.end(), 0);
    if (temps.empty()) return order;
    std::vector<double> variance(n_a, 0.0), mass(n_a, 0.0);
    for (std::size_t a = 0; a < n_a; ++a) {
        std::vector<double> sum(temps.size(), 0.0), count(temps.size(), 0.0);
        for (Eigen::Index j = 0; j < C.cols(); ++j) {
            const auto k = static_cast<std::size_t>(
                std::lower_bound(temps.begin(), temps.end(), temperatures[static_cast<std::size_t>(j)]) - temps.begin());
            const double v = std::abs(C(static_cast<Eigen::Index>(a), j));
            sum[k] += v;
            count[k] += 1.0;
            mass[a] += v;
        }
        double mean_of_means = 0.0;
        for (std::size_t k = 0; k < temps.size(); ++k) {
            sum[k] /= count[k];
            mean_of_means += sum[k];
        }
        mean_of_means /= static_cast<double>(temps.size());
        for (std::size_t k = 0; k < temps.size(); ++k) variance[a] += (sum[k] - mean_of_means) * (sum[k] - mean_of_means);
        variance[a] /= static_cast<double>(temps.size());
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (variance[x] != variance[y]) return variance[x] > variance[y];
        return mass[x] > mass[y];
    });
    return order;
}

Eigen::MatrixXd to_matrix(const FeatureMatrix& m) {
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(m.dim), static_cast<Eigen::Index>(m.rows()));
    for (std::size_t j = 0; j < m.rows(); ++j) {
        const auto r = m.row(j);
        for (std::size_t i = 0; i < m.dim; ++i) Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[i];
    }
    return Z;
}

namespace {

std::string join_vector(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_g17(v[i]);
    return s;
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& what) {
    const auto parts = split_csv_line(text);
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        try {
            std::size_t used = 0;
            v[static_cast<Eigen::Index>(i)] = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw FormatError("bad number in " + what + ": '" + parts[i] + "'");
        }
    }
    return v;
}

}  // namespace

void write_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "# relevancy_order=";
    for (std::size_t i = 0; i < dict.relevancy_order.size(); ++i) out << (i ? "," : "") << dict.relevancy_order[i];
    out << '\n';
    out << "# mu=" << fmt_g17(dict.mu) << '\n';
    if (!dict.transform.is_identity()) {
        out << "# center=" << join_vector(dict.transform.center) << '\n';
        out << "# scale=" << join_vector(dict.transform.scale) << '\n';
    }
    out << "atom";
    for (std::size_t i = 0; i < dict.dim(); ++i) out << ",f" << i;
    out << '\n';
    for (Eigen::Index a = 0; a < dict.atoms.cols(); ++a) {
        out << a;
        for (Eigen::Index i = 0; i < dict.atoms.rows(); ++i) out << ',' << fmt_g17(dict.atoms(i, a));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dictionary read_dictionary(const std::filesystem::path& path) {
    CsvReader csv(path);
    const auto& header = csv.header();
    if (header.empty() || header[0] != "atom") {
        throw FormatError(path.string() + ": expected header atom,f0..; found " + csv.header_line());
    }
    const auto d = static_cast<Eigen::Index>(header.size() - 1);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (header[static_cast<std::size_t>(i) + 1] != "f" + std::to_string(i)) {
            throw FormatError(path.string() + ": expected header atom,f0..; found " + csv.header_line());
        }
    }
    Dictionary dict;
    std::vector<Eigen::VectorXd> cols;
    while (auto row = csv.next()) {
        if (csv.to_uint((*row)[0], 0) != cols.size()) throw FormatError(path.string() + ": atoms out of order");
        Eigen::VectorXd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = csv.to_double((*row)[static_cast<std::size_t>(i) + 1], i + 1);
        cols.push_back(v);
    }
    dict.atoms.resize(d, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < cols.size(); ++a) dict.atoms.col(static_cast<Eigen::Index>(a)) = cols[a];
    for (const auto& c : csv.comments()) {
        const auto eq = c.find('=');
        if (eq == std::string::npos) continue;
        std::string key = c.substr(0, eq);
        key.erase(0, key.find_first_not_of(' '));
        const std::string value = c.substr(eq + 1);
        if (key == "relevancy_order") {
            for (const auto& p : split_csv_line(value)) {
                if (!p.empty()) dict.relevancy_order.push_back(std::stoul(p));
            }
        } else if (key == "mu") {
            dict.mu = csv.to_double(value, 0);
        } else if (key == "center") {
            dict.transform.center = parse_vector(value, "center");
        } else if (key == "scale") {
            dict.transform.scale = parse_vector(value, "scale");
        }
    }
    auto sorted = dict.relevancy_order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != i || sorted.size() != dict.n_atoms()) {
            throw FormatError(path.string() + ": relevancy_order is not a permutation of the atoms");
        }
    }
    if (dict.transform.center.size() != dict.transform.scale.size() ||
        (!dict.transform.is_identity() && dict.transform.center.size() != d)) {
        throw FormatError(path.string() + ": feature transform does not match the atom dimension");
    }
    return dict;
}

void write_activations(const std::filesystem::path& path, const ActivationTable& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "run,temperature,frame,tile";
    for (Eigen::Index a = 0; a < t.C.rows(); ++a) out << ",c" << a;
    out << ",objective\n";
    std::string line;
    for (std::size_t j = 0; j < t.meta.size(); ++j) {
        const auto& m = t.meta[j];
        const auto jj = static_cast<Eigen::Index>(j);
        line = m.run + ',' + fmt_g17(m.temperature) + ',' + std::to_string(m.frame) + ',' + std::to_string(m.tile);
        for (Eigen::Index a = 0; a < t.C.rows(); ++a) line += ',' + fmt_g17(t.C(a, jj));
        line += ',' + fmt_g17(t.objective[jj]) + '\n';
        out << line;
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

ActivationTable read_activations(const std::filesystem::path& path) {
    CsvReader csv(path);
    const auto& h = csv.header();
    const bool shape_ok = h.size() >= 6 && h[0] == "run" && h[1] == "temperature" && h[2] == "frame" &&
                          h[3] == "tile" && h.back() == "objective";
    if (!shape_ok) {
        throw FormatError(path.string() + ": expected header run,temperature,frame,tile,c0..,objective; found " +
                          csv.header_line());
    }
    const auto n_a = static_cast<Eigen::Index>(h.size() - 5);
    for (Eigen::Index a = 0; a < n_a; ++a) {
        if (h[static_cast<std::size_t>(a) + 4] != "c" + std::to_string(a)) {
            throw FormatError(path.string() + ": expected header run,temperature,frame,tile,c0..c" +
                              std::to_string(n_a - 1) + ",objective; found " + csv.header_line());
        }
    }
    ActivationTable t;
    std::vector<double> values, objective;
    while (auto row = csv.next()) {
        const auto& f = *row;
        t.meta.push_back({f[0], csv.to_double(f[1], 1), static_cast<std::uint32_t>(csv.to_uint(f[2], 2)),
                          static_cast<std::uint32_t>(csv.to_uint(f[3], 3))});
        for (Eigen::Index a = 0; a < n_a; ++a) {
            values.push_back(csv.to_double(f[static_cast<std::size_t>(a) + 4], static_cast<std::size_t>(a) + 4));
        }
        objective.push_back(csv.to_double(f.back(), f.size() - 1));
    }
    const auto n = static_cast<Eigen::Index>(t.meta.size());
    t.C = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>>(values.data(), n_a, n);
    t.objective = Eigen::Map<const Eigen::VectorXd>(objective.data(), n);
    return t;
}

}  // namespace mtswarm
