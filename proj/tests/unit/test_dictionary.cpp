#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "mtswarm/dictionary.hpp"
#include "mtswarm/errors.hpp"
#include "mtswarm/rng.hpp"

using namespace mtswarm;
namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Cyclic coordinate descent on 0.5||z - Tc||^2 + mu||c||_1, run to a fixed point.
VectorXd lasso_cd(const VectorXd& z, const MatrixXd& T, double mu) {
    VectorXd c = VectorXd::Zero(T.cols());
    VectorXd r = z;
    for (int sweep = 0; sweep < 200000; ++sweep) {
        double moved = 0.0;
        for (Eigen::Index j = 0; j < T.cols(); ++j) {
            const double a = T.col(j).squaredNorm();
            const double rho = T.col(j).dot(r) + a * c(j);
            const double next = std::copysign(std::max(std::abs(rho) - mu, 0.0), rho) / a;
            const double delta = next - c(j);
            if (delta != 0.0) {
                r -= delta * T.col(j);
                c(j) = next;
                moved = std::max(moved, std::abs(delta));
            }
        }
        if (moved < 1e-13) break;
    }
    return c;
}

MatrixXd gaussian(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("mtswarm_test_" + name); }

}  // namespace

TEST_CASE("coding objective and KKT residual") {
    const MatrixXd T = MatrixXd::Identity(2, 2);
    const VectorXd z = VectorXd{{3.0, 0.5}};
    const VectorXd c = VectorXd{{2.0, 0.0}};
    CHECK(coding_objective(z, T, c, 1.0) == doctest::Approx(0.5 * (1.0 + 0.25) + 2.0));
    CHECK(kkt_residual(z, T, c, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kkt_residual(z, T, VectorXd::Zero(2), 1.0) == doctest::Approx(2.0));
}

TEST_CASE("sparse_code closed forms") {
    SparseCodingConfig cfg;
    SUBCASE("zero input") {
        CounterRng rng(2);
        const auto r = sparse_code(VectorXd::Zero(5), gaussian(rng, 5, 3), cfg);
        CHECK(r.coefficients.isZero());
    }
    SUBCASE("orthonormal dictionary soft-thresholds") {
        const auto r = sparse_code(VectorXd{{3.0, 0.5}}, MatrixXd::Identity(2, 2), cfg);
        CHECK(r.coefficients(0) == doctest::Approx(2.0));
        CHECK(r.coefficients(1) == 0.0);
        CHECK(r.converged);
    }
    SUBCASE("bad config") {
        cfg.mu = -1.0;
        CHECK_THROWS(cfg.validate());
    }
}

TEST_CASE("sparse_code matches a coordinate-descent oracle on random 8x4 instances") {
    CounterRng rng(11);
    SparseCodingConfig cfg;
    double worst_obj = 0.0, worst_kkt = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        MatrixXd T = gaussian(rng, 8, 4);
        T.colwise().normalize();
        const VectorXd z = 2.0 * gaussian(rng, 8, 1).col(0);
        const double mu = 0.1 + rng.uniform();
        cfg.mu = mu;
        const auto got = sparse_code(z, T, cfg);
        const VectorXd want = lasso_cd(z, T, mu);
        worst_obj = std::max(worst_obj,
                             std::abs(coding_objective(z, T, got.coefficients, mu) - coding_objective(z, T, want, mu)));
        worst_kkt = std::max(worst_kkt, kkt_residual(z, T, got.coefficients, mu));
    }
    CHECK(worst_obj <= 1e-6);
    CHECK(worst_kkt <= 1e-6);
}

TEST_CASE("warm start never raises the objective") {
    CounterRng rng(5);
    MatrixXd T = gaussian(rng, 16, 6);
    T.colwise().normalize();
    const VectorXd z = gaussian(rng, 16, 1).col(0);
    SparseCodingConfig cfg;
    cfg.mu = 0.3;
    const VectorXd warm = lasso_cd(z, T, cfg.mu);
    const auto r = sparse_code(z, T, cfg, &warm);
    CHECK(r.objective <= coding_objective(z, T, warm, cfg.mu) + 1e-15);
}

TEST_CASE("dictionary_update") {
    SUBCASE("identity codes give the normalised data columns") {
        CounterRng rng(9);
        const MatrixXd Z = gaussian(rng, 6, 4);
        MatrixXd C = MatrixXd::Identity(4, 4);
        const MatrixXd T = dictionary_update(Z, C, MatrixXd::Identity(6, 4));
        for (Eigen::Index j = 0; j < 4; ++j) {
            CHECK(T.col(j).norm() == doctest::Approx(1.0));
            CHECK(std::abs(T.col(j).dot(Z.col(j).normalized())) == doctest::Approx(1.0));
        }
        CHECK((T * C - Z).norm() == doctest::Approx(0.0).scale(1.0));
    }
}

TEST_CASE("learn_dictionary") {
    CounterRng rng(3);
    SUBCASE("objective is monotone over the alternation") {
        const MatrixXd Z = gaussian(rng, 10, 120);
        SparseCodingConfig cfg;
        cfg.mu = 0.5;
        cfg.outer_rounds = 50;
        const auto res = learn_dictionary(Z, 5, cfg, 42);
        REQUIRE(res.history.size() >= 2);
        for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] <= res.history[i - 1] + 1e-9);
        CHECK(res.dictionary.atoms.rows() == 10);
        CHECK(res.dictionary.atoms.cols() == 5);
        CHECK(res.dictionary.mu == 0.5);
        for (Eigen::Index j = 0; j < 5; ++j) CHECK(res.dictionary.atoms.col(j).norm() == doctest::Approx(1.0));
        const auto again = learn_dictionary(Z, 5, cfg, 42);
        CHECK(again.dictionary.atoms == res.dictionary.atoms);
    }
    SUBCASE("complete basis with mu = 0 reconstructs exactly") {
        const MatrixXd Z = gaussian(rng, 4, 4);
        SparseCodingConfig cfg;
        cfg.mu = 0.0;
        cfg.outer_rounds = 5;
        const auto res = learn_dictionary(Z, 4, cfg, 1);
        CHECK(res.history.back() <= 1e-8);
    }
    SUBCASE("more atoms than columns") {
        SparseCodingConfig cfg;
        CHECK_THROWS(learn_dictionary(gaussian(rng, 4, 3), 5, cfg, 1));
    }
}

TEST_CASE("rank_atoms") {
    SUBCASE("hand-computed variances") {
        // atom 0 means |.| per T: 1, 3 -> variance 1; atom 1: 2, 2 -> 0; atom 2: 0, 4 -> 4
        MatrixXd C(3, 4);
        C << 1, -1, 3, 3,  //
            2, 2, -2, 2,   //
            0, 0, 4, -4;
        const std::vector<double> temps{200, 200, 400, 400};
        CHECK(rank_atoms(C, temps) == std::vector<std::size_t>{2, 0, 1});
    }
    SUBCASE("single temperature falls back to activation mass") {
        MatrixXd C(3, 2);
        C << 1, 1,  //
            5, 0,   //
            0, 3;
        const std::vector<double> temps{300, 300};
        CHECK(rank_atoms(C, temps) == std::vector<std::size_t>{1, 2, 0});
    }
}

TEST_CASE("dictionary and activation files") {
    CounterRng rng(8);
    Dictionary d;
    d.atoms = gaussian(rng, 6, 3);
    d.atoms.colwise().normalize();
    d.relevancy_order = {2, 0, 1};
    d.transform = FeatureTransform::standardize(gaussian(rng, 6, 20));
    d.mu = 0.25;
    const auto p = temp_path("dict.csv");
    write_dictionary(p, d);
    const auto back = read_dictionary(p);
    CHECK(back.atoms == d.atoms);
    CHECK(back.relevancy_order == d.relevancy_order);
    CHECK(back.transform.center == d.transform.center);
    CHECK(back.transform.scale == d.transform.scale);
    CHECK(back.mu == 0.25);

    ActivationTable t;
    t.meta = tile_manifest("T250", 250.0, 1);
    t.C = gaussian(rng, 3, 9);
    t.objective = gaussian(rng, 9, 1).col(0);
    const auto q = temp_path("acts.csv");
    write_activations(q, t);
    const auto tb = read_activations(q);
    CHECK(tb.meta == t.meta);
    CHECK(tb.C == t.C);
    CHECK(tb.objective == t.objective);
}

TEST_CASE("feature standardisation") {
    MatrixXd Z(2, 4);
    Z << 1, 2, 3, 4,  //
        5, 5, 5, 5;
    const auto tr = FeatureTransform::standardize(Z);
    const MatrixXd S = tr.apply(Z);
    CHECK(S.row(0).mean() == doctest::Approx(0.0).scale(1.0));
    CHECK(S.row(1).isZero());
    CHECK(tr.scale(1) == 1.0);
}
