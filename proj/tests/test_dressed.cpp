// test_dressed.cpp — Dressed levels, level tracking and parity

#include "fluor/dressed.hpp"
#include "fluor/hamiltonian.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fluor;

namespace {

ModelSpec two_level(double omega_a, double alpha, double ga) {
    ModelSpec m;
    m.omega_a = omega_a;
    m.alpha = alpha;
    m.g_a = ga;
    m.g_b = 0.01;
    m.gamma = 0.02;
    m.n_b_max = 1;
    return m;
}

} // namespace

TEST_CASE("dressed energies diagonalize the resonant RWA block exactly") {
    const double g = 0.07, w = 1.0;
    for (int n = 1; n < 8; ++n) {
        Eigen::Matrix2d b;
        b << 0.0 + n * w, g * std::sqrt(n), g * std::sqrt(n), 1.0 + (n - 1) * w;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(b);
        const auto d = dressed_energies(n, 0.0, 1.0, w, g);
        CHECK(d.minus == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-14));
        CHECK(d.plus == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-14));
    }
    const auto d0 = dressed_energies(0, 0.0, 1.0, w, g);
    CHECK(d0.uncoupled);
    CHECK(d0.plus == 0.0);
}

TEST_CASE("level tracking follows eigenvectors continuously") {
    const auto m = two_level(1.0, 1.0, 0.1);
    const auto lc = energy_levels_vs_coupling(m, {0.0, 0.01, 0.02, 0.03, 0.04, 0.05}, 6);
    CHECK(lc.energies.rows() == 6);
    CHECK(lc.energies.cols() == 6);
    CHECK_FALSE(lc.tracking_failure.has_value());
    CHECK(lc.min_overlap > 0.5);
    // At zero coupling the tracked levels are the bare ones in ascending order.
    CHECK(lc.energies(0, 0) == doctest::Approx(0.0));
    CHECK(lc.energies(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("second-harmonic level pairs split as g squared") {
    // |1, n> and |2, n-2> are degenerate at omega_a = 1/2 but carry opposite
    // parity, so they cross and only separate through unequal Stark shifts.
    const int n = 6;
    ModelSpec m = two_level(0.5, 1.0, 0.0);
    m.n_a_max = 20;
    auto gap = [&](double g) {
        Eigen::SelfAdjointEigenSolver<RMatrix> es(dressed_hamiltonian(m, g));
        std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
        std::sort(ev.begin(), ev.end(), [&](double a, double b) { return std::abs(a - 0.5 * n) < std::abs(b - 0.5 * n); });
        return std::abs(ev[0] - ev[1]);
    };
    const double g1 = 0.002, g2 = 0.004;
    const double slope = std::log(gap(g2) / gap(g1)) / std::log(g2 / g1);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("parity operator squares to one and commutes with the builders") {
    const auto m = two_level(0.5, 1.0, 0.1);
    const auto H = build_two_level(m);
    const auto pi = parity_operator(H.layout);
    CHECK((pi.signs.array() * pi.signs.array() - 1.0).abs().maxCoeff() == 0.0);
    const SparseC p2 = pi.matrix() * pi.matrix();
    CHECK((CMatrix(p2) - CMatrix::Identity(p2.rows(), p2.cols())).cwiseAbs().maxCoeff() == 0.0);
    for (double t : {0.0, 13.0}) CHECK(commutator_norm(H.evaluate(t), pi) < 1e-12);
    ModelSpec a = m;
    a.family = Family::Array;
    a.n_atoms = 4;
    const auto Ha = build_array(a);
    CHECK(commutator_norm(Ha.evaluate(2.0), parity_operator(Ha.layout)) < 1e-12);
}

TEST_CASE("parity conventions differ by a global sign") {
    BasisLayout L({{Factor::Electron, 2}, {Factor::Pump, 3}});
    const auto a = parity_operator(L, ParityConvention::GroundPositive);
    const auto b = parity_operator(L, ParityConvention::GroundNegative);
    CHECK((a.signs + b.signs).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.signs(0) == 1.0);
}

TEST_CASE("low-lying eigenstates carry definite parity") {
    const auto m = two_level(1.0, 1.0, 0.1);
    const auto rep = parity_classify(build_two_level(m), 0.0, 12);
    CHECK(rep.commutator_norm < 1e-12);
    for (double p : rep.parity_expectation) CHECK(std::abs(std::abs(p) - 1.0) < 1e-8);
}

TEST_CASE("coherent initial state has mixed parity e^{-2 alpha^2}") {
    const auto m = two_level(1.0, 1.0, 0.1);
    const auto psi = initial_state(m);
    const double p = parity_expectation(psi, parity_operator(psi.layout));
    CHECK(p == doctest::Approx(std::exp(-2.0)).epsilon(1e-5));
    CHECK(std::abs(p) > 0.0);
    CHECK(std::abs(p) < 1.0);
}
