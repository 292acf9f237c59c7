#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtswarm/render.hpp"

namespace mtswarm {

/// Per-dimension affine map x -> (x - center) / scale applied to features
/// before coding. Empty vectors mean identity.
struct FeatureTransform {
    Eigen::VectorXd center;
    Eigen::VectorXd scale;

    bool is_identity() const { return center.size() == 0; }
    /// z-score statistics of the columns of Z; constant dimensions get scale 1.
    static FeatureTransform standardize(const Eigen::MatrixXd& Z);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& Z) const;
};

struct Dictionary {
    Eigen::MatrixXd atoms;  // d x n_a, unit columns
    std::vector<std::size_t> relevancy_order;
    FeatureTransform transform;
    double mu = 1.0;  // sparsity weight the atoms were learned with

    std::size_t dim() const { return static_cast<std::size_t>(atoms.rows()); }
    std::size_t n_atoms() const { return static_cast<std::size_t>(atoms.cols()); }
};

struct SparseCodingConfig {
    double mu = 1.0;
    std::size_t max_iter = 20000;
    double tol = 1e-7;
    std::size_t outer_rounds = 50;
    unsigned jobs = 1;

    void validate() const;
};

struct ActivationRecord {
    Eigen::VectorXd coefficients;
    double objective = 0.0;
    bool converged = true;
};

/// 0.5 ||z - T c||^2 + mu ||c||_1
double coding_objective(const Eigen::VectorXd& z, const Eigen::MatrixXd& T, const Eigen::VectorXd& c, double mu);

/// Largest violation of the L1 optimality conditions at c.
double kkt_residual(const Eigen::VectorXd& z, const Eigen::MatrixXd& T, const Eigen::VectorXd& c, double mu);

/// Lasso solve for one feature vector: monotone accelerated proximal gradient
/// followed by a support re-solve, stopping once the KKT residual is below
/// 1e-7. `warm` (optional) is the starting point; the result never has a
/// higher objective than it.
ActivationRecord sparse_code(const Eigen::VectorXd& z, const Eigen::MatrixXd& T, const SparseCodingConfig& cfg,
                             const Eigen::VectorXd* warm = nullptr);

/// Codes every column of Z (n_a x n result). Columns are independent and may run on cfg.jobs threads.
struct CodingResult {
    Eigen::MatrixXd C;
    Eigen::VectorXd objective;
    std::size_t unconverged = 0;
};
CodingResult sparse_code_all(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& T, const SparseCodingConfig& cfg,
                             const Eigen::MatrixXd* warm = nullptr);

/// Least-squares dictionary for fixed C, unit-normalised with C rescaled so
/// that T C is unchanged. Unused or duplicated atoms are re-seeded from the
/// worst-reconstructed columns of Z. `C` is updated in place.
Eigen::MatrixXd dictionary_update(const Eigen::MatrixXd& Z, Eigen::MatrixXd& C, const Eigen::MatrixXd& T_prev);

struct LearnResult {
    Dictionary dictionary;
    Eigen::MatrixXd activations;  // n_a x n
    Eigen::VectorXd objective;    // per column
    std::vector<double> history;  // total objective after each alternation, starting with the initial coding
    std::size_t rounds = 0;
};

/// Alternating minimisation of 0.5 ||Z - T C||^2 + mu ||C||_1 over unit-norm T.
/// Starts from n_a distinct data columns drawn with `seed`, or from `init`
/// (d x n_a, normalised on entry) when given. Each accepted dictionary step
/// is checked not to raise the objective.
LearnResult learn_dictionary(const Eigen::MatrixXd& Z, std::size_t n_atoms, const SparseCodingConfig& cfg,
                             std::uint64_t seed, const Eigen::MatrixXd* init = nullptr);

/// Atoms by decreasing between-temperature variance of mean |activation|;
/// ties by total |activation|, then index.
std::vector<std::size_t> rank_atoms(const Eigen::MatrixXd& C, std::span<const double> temperatures);

/// Columns of Z as an Eigen matrix (d x n).
Eigen::MatrixXd to_matrix(const FeatureMatrix& m);

void write_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary read_dictionary(const std::filesystem::path& path);

/// Activation table: the feature rows' metadata plus coefficients and objective.
struct ActivationTable {
    std::vector<TileMeta> meta;
    Eigen::MatrixXd C;  // n_a x n
    Eigen::VectorXd objective;
};

void write_activations(const std::filesystem::path& path, const ActivationTable& t);
ActivationTable read_activations(const std::filesystem::path& path);

}  // namespace mtswarm
