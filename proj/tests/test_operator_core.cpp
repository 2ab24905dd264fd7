#include <doctest.h>

#include "fcov/reference.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace fcov;
using namespace fcov::testing;

TEST_SUITE_BEGIN("operator_core");

TEST_CASE("inner product of the unit constant is one")
{
    const Grid grid = Grid::uniform(100);
    const Curve one(grid, Eigen::VectorXd::Ones(100));
    CHECK(inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matched-period sine and cosine are orthogonal up to quadrature error")
{
    const int d = 2000;
    Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(d, 0.0, 1.0 - 1.0 / d);
    const Grid grid(pts, Eigen::VectorXd::Constant(d, 1.0 / d));
    Eigen::VectorXd s(d), c(d);
    for (int i = 0; i < d; ++i) {
        s[i] = std::sin(2.0 * M_PI * pts[i]);
        c[i] = std::cos(2.0 * M_PI * pts[i]);
    }
    CHECK(std::abs(inner_product(Curve(grid, s), Curve(grid, c))) <= 1e-6);
}

TEST_CASE("inner product equals the summation oracle exactly")
{
    const Grid grid = Grid::uniform(16);
    const Curve f = random_curve(grid, 11);
    const Curve g = random_curve(grid, 12);
    CHECK(inner_product(f, g) == reference::inner_product(f, g));
    CHECK(inner_product(f, g) == inner_product(g, f));
}

TEST_CASE("inner product rejects mismatched grids")
{
    const Curve f = random_curve(Grid::uniform(8), 1);
    const Curve g = random_curve(Grid::uniform(9), 2);
    CHECK_THROWS_AS(inner_product(f, g), std::invalid_argument);
}

TEST_CASE("tensor square of zero is the zero operator")
{
    const Grid grid = Grid::uniform(6);
    const CovOperator z = tensor_square(Curve(grid, Eigen::VectorXd::Zero(6)));
    CHECK(schatten_norm(z, 1.0) == 0.0);
}

TEST_CASE("tensor square is rank one with eigenvalue ||f||^2")
{
    const Grid grid = Grid::uniform(10);
    Curve f = random_curve(grid, 21);
    const double norm2 = inner_product(f, f);
    f = Curve(grid, f.values * std::sqrt(2.0 / norm2)); // now ||f||^2 = 2
    const CovOperator op = tensor_square(f);
    CHECK(schatten_norm(op, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    // every non-principal eigenvalue vanishes
    const Eigen::VectorXd& spec = op.spectrum();
    for (Eigen::Index i = 1; i < spec.size(); ++i)
        CHECK(std::abs(spec[i]) <= 1e-12);
}

TEST_CASE("tensor square spectrum matches a dense eigensolver oracle")
{
    const Grid grid = Grid::uniform(8);
    const Curve f = random_curve(grid, 31);
    const CovOperator op = tensor_square(f);

    const Eigen::VectorXd sw = grid.weights().array().sqrt();
    const Eigen::MatrixXd weighted = sw.asDiagonal() * (f.values * f.values.transpose()) * sw.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted, Eigen::EigenvaluesOnly);
    Eigen::VectorXd oracle = es.eigenvalues().reverse();

    for (int i = 0; i < 8; ++i)
        CHECK(op.spectrum()[i] == doctest::Approx(oracle[i]).epsilon(1e-10));
}

TEST_CASE("schatten norm on an explicit diagonal spectrum")
{
    const Grid grid = Grid::uniform(3);
    Eigen::VectorXd diag(3);
    diag << 3.0, 1.0, 0.0;
    const CovOperator s = CovOperator::from_weighted(grid, diag.asDiagonal());
    CHECK(schatten_norm(s, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(schatten_norm(s, 2.0) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
    CHECK(schatten_norm(s, kInfNorm) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("identity-spectrum operator has trace norm d")
{
    const Grid grid = Grid::uniform(4);
    const CovOperator s = CovOperator::from_weighted(grid, Eigen::MatrixXd::Identity(4, 4));
    CHECK(schatten_norm(s, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("schatten norm agrees with the singular value oracle")
{
    const Grid grid = Grid::uniform(8);
    auto eng = make_engine(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd m(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            m(i, j) = gauss(eng);
    const CovOperator s(grid, 0.5 * (m + m.transpose()));
    for (double p : {1.0, 2.0, 3.0, kInfNorm})
        CHECK(rel_err(schatten_norm(s, p), reference::schatten_norm_svd(s, p)) <= 1e-10);
}

TEST_CASE("schatten norm rejects p below one")
{
    const CovOperator s = random_psd(Grid::uniform(4), 5);
    CHECK_THROWS_AS(schatten_norm(s, 0.5), std::invalid_argument);
}

TEST_CASE("norm scaling, positivity and ordering")
{
    const Grid grid = Grid::uniform(9);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const CovOperator s = random_psd(grid, seed);
        double previous = -1.0;
        for (double p : {kInfNorm, 2.0, 1.0}) {
            const double norm = schatten_norm(s, p);
            CHECK(norm >= 0.0);
            CHECK(norm >= previous); // ||.||_inf <= ||.||_2 <= ||.||_1
            previous = norm;
            CHECK(rel_err(schatten_norm(operator_scale(s, -2.5), p), 2.5 * norm) <= 1e-12);
        }
    }
    const CovOperator z = CovOperator::zero(grid);
    for (double p : {1.0, 2.0, kInfNorm})
        CHECK(schatten_norm(z, p) == 0.0);
}

TEST_CASE("tensor power identity: ||S (x) S||_p = ||S||_p^2")
{
    const Grid grid = Grid::uniform(7);
    const CovOperator s = random_psd(grid, 41, 1.5);
    const Eigen::VectorXd& spec = s.spectrum();
    Eigen::VectorXd product(spec.size() * spec.size());
    for (Eigen::Index i = 0; i < spec.size(); ++i)
        for (Eigen::Index j = 0; j < spec.size(); ++j)
            product[i * spec.size() + j] = spec[i] * spec[j];
    for (double p : {1.0, 2.0, kInfNorm}) {
        const double norm = schatten_norm(s, p);
        CHECK(rel_err(schatten_norm_spectrum(product, p), norm * norm) <= 1e-10);
    }
}

TEST_CASE("operator square root of a known diagonal pair")
{
    const Grid grid = Grid::uniform(2);
    Eigen::VectorXd diag(2);
    diag << 4.0, 1.0;
    const CovOperator s = CovOperator::from_weighted(grid, diag.asDiagonal());
    const CovOperator r = operator_sqrt(s);
    CHECK(r.spectrum()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.spectrum()[1] == doctest::Approx(1.0).epsilon(1e-12));
    // same eigenbasis: weighted matrix stays diagonal
    CHECK(std::abs(r.weighted()(0, 1)) <= 1e-12);
}

TEST_CASE("square root of zero is zero")
{
    const CovOperator z = CovOperator::zero(Grid::uniform(5));
    CHECK(schatten_norm(operator_sqrt(z), 1.0) == 0.0);
}

TEST_CASE("square root reconstructs the operator")
{
    const Grid grid = Grid::uniform(10);
    const CovOperator s = random_psd(grid, 51);
    const CovOperator r = operator_sqrt(s);
    // composition in the weighted geometry
    const Eigen::MatrixXd rr = r.weighted() * r.weighted();
    const CovOperator recon = CovOperator::from_weighted(grid, rr);
    CHECK(rel_hs_error(recon, s) <= 1e-8);
}

TEST_CASE("square root rejects a materially negative spectrum")
{
    const Grid grid = Grid::uniform(3);
    Eigen::VectorXd diag(3);
    diag << 1.0, 0.5, -0.2;
    const CovOperator s = CovOperator::from_weighted(grid, diag.asDiagonal());
    CHECK_THROWS_AS(operator_sqrt(s), std::invalid_argument);
}

TEST_CASE("procrustes distance vanishes on the diagonal and is symmetric")
{
    const Grid grid = Grid::uniform(6);
    const CovOperator a = random_psd(grid, 61);
    const CovOperator b = random_psd(grid, 62);
    CHECK(procrustes_distance(a, a) <= 1e-8);
    CHECK(procrustes_distance(a, b) == doctest::Approx(procrustes_distance(b, a)).epsilon(1e-10));
}

TEST_CASE("disjoint-support diagonal pair has squared distance two")
{
    const Grid grid = Grid::uniform(2);
    Eigen::VectorXd d1(2), d2(2);
    d1 << 1.0, 0.0;
    d2 << 0.0, 1.0;
    const CovOperator s1 = CovOperator::from_weighted(grid, d1.asDiagonal());
    const CovOperator s2 = CovOperator::from_weighted(grid, d2.asDiagonal());
    const double d = procrustes_distance(s1, s2);
    CHECK(d * d == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(rel_err(d, reference::procrustes_bruteforce_2x2(s1, s2, 40000)) <= 1e-4);
}

TEST_CASE("closed form matches the angle-grid oracle on random 2x2 pairs")
{
    const Grid grid = Grid::uniform(2);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto eng = make_engine(split_seed(900, seed));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::Matrix2d g1, g2;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                g1(i, j) = gauss(eng);
                g2(i, j) = gauss(eng);
            }
        const CovOperator s1 = CovOperator::from_weighted(grid, g1 * g1.transpose());
        const CovOperator s2 = CovOperator::from_weighted(grid, g2 * g2.transpose());
        const double closed = procrustes_distance(s1, s2);
        const double brute = reference::procrustes_bruteforce_2x2(s1, s2, 60000);
        CHECK(std::abs(closed - brute) <= 1e-4);
    }
}

TEST_CASE("procrustes distance rejects non-PSD inputs and grid mismatches")
{
    const Grid grid = Grid::uniform(3);
    Eigen::VectorXd neg(3);
    neg << 1.0, 0.2, -0.5;
    const CovOperator bad = CovOperator::from_weighted(grid, neg.asDiagonal());
    const CovOperator ok = random_psd(grid, 7);
    CHECK_THROWS_AS(procrustes_distance(bad, ok), std::invalid_argument);
    CHECK_THROWS_AS(procrustes_distance(ok, random_psd(Grid::uniform(4), 8)), std::invalid_argument);
}

TEST_CASE("interpolation endpoints and the degenerate path")
{
    const Grid grid = Grid::uniform(8);
    const CovOperator s1 = random_psd(grid, 71);
    const CovOperator s2 = random_psd(grid, 72);

    const CovOperator at0 = interpolate(s1, s2, 0.0);
    CHECK((at0.kernel() - s1.kernel()).cwiseAbs().maxCoeff() == 0.0); // exact endpoint

    CHECK(rel_hs_error(interpolate(s1, s2, 1.0), s2) <= 1e-8);

    for (double gamma : {0.0, 0.3, 0.7, 1.0})
        CHECK(rel_hs_error(interpolate(s1, s1, gamma), s1) <= 1e-8);

    CHECK_THROWS_AS(interpolate(s1, s2, -0.1), std::invalid_argument);
}

TEST_CASE("kernel symmetrization and symmetry validation")
{
    const Grid grid = Grid::uniform(3);
    Eigen::MatrixXd skew(3, 3);
    skew << 1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(CovOperator(grid, skew), std::invalid_argument);

    Eigen::MatrixXd nearly = skew + skew.transpose(); // symmetric
    nearly(0, 1) += 1e-13;                            // roundoff-scale asymmetry
    const CovOperator s(grid, nearly);
    CHECK((s.kernel() - s.kernel().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
