// test_propagator.cpp — Lanczos stepper against dense references

#include "fluor/hamiltonian.hpp"
#include "fluor/propagator.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fluor;

namespace {

ModelSpec small_two_level() {
    ModelSpec m;
    m.omega_a = 1.0;
    m.omega_b = 1.1;
    m.alpha = 1.0;
    m.g_a = 0.1;
    m.g_b = 0.05;
    m.gamma = 0.02;
    m.n_b_max = 2;
    return m;
}

CMatrix random_hermitian(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> d;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(d(gen), d(gen));
    return 0.5 * (a + a.adjoint()) / std::sqrt(static_cast<double>(n));
}

} // namespace

TEST_CASE("diagonal generator gives pure phases") {
    const int n = 7;
    RVector d(n);
    for (int k = 0; k < n; ++k) d(k) = 0.3 * k - 1.0;
    const SparseC h = diagonal_operator(d);
    const TimedApply apply = [&](double, const CVector& x, CVector& y) { y = h * x; };
    KrylovConfig cfg;
    for (int k = 0; k < n; ++k) {
        CVector psi = CVector::Zero(n);
        psi(k) = 1.0;
        krylov_step(apply, psi, 0.0, 0.37, cfg);
        CHECK(std::abs(psi(k) - std::exp(-I * d(k) * 0.37)) < 1e-13);
    }
}

TEST_CASE("Krylov step matches the dense exponential on random Hermitian matrices") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const int n = 200;
        const CMatrix h = random_hermitian(n, seed);
        const SparseC hs = h.sparseView();
        const TimedApply apply = [&](double, const CVector& x, CVector& y) { y = hs * x; };
        CVector psi = CVector::Random(n).normalized();
        const double dt = 0.3;
        const CVector ref = oracle::expm(-I * dt * h) * psi;
        KrylovConfig cfg;
        StepReport rep;
        CVector out = psi;
        krylov_step(apply, out, 0.0, dt, cfg, &rep);
        CHECK(oracle::fidelity_defect(out, ref) < 1e-8);
        CHECK((out - ref).norm() < 1e-8);
        CHECK(std::abs(out.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("happy breakdown on an invariant subspace") {
    const int n = 50;
    CMatrix h = random_hermitian(n, 9);
    // psi lies in a 3-dimensional invariant subspace of a block-diagonal h.
    h.block(0, 3, 3, n - 3).setZero();
    h.block(3, 0, n - 3, 3).setZero();
    const SparseC hs = h.sparseView();
    CVector psi = CVector::Zero(n);
    psi.head(3) = CVector::Random(3).normalized();
    const CVector ref = oracle::expm(-I * 2.0 * h) * psi;
    const double res = lanczos_exp([&](const CVector& x, CVector& y) { y = hs * x; }, psi, 2.0, 12);
    CHECK(res == 0.0);
    CHECK((psi - ref).norm() < 1e-12);
}

TEST_CASE("large steps are split until the residual bound holds") {
    const int n = 120;
    const CMatrix h = 20.0 * random_hermitian(n, 4);
    const SparseC hs = h.sparseView();
    const TimedApply apply = [&](double, const CVector& x, CVector& y) { y = hs * x; };
    CVector psi = CVector::Random(n).normalized();
    const CVector ref = oracle::expm(-I * 1.0 * h) * psi;
    StepReport rep;
    KrylovConfig cfg;
    krylov_step(apply, psi, 0.0, 1.0, cfg, &rep);
    CHECK(rep.max_depth > 0);
    CHECK(rep.max_residual <= cfg.step_tolerance);
    CHECK((psi - ref).norm() < 1e-8);
}

TEST_CASE("midpoint step matches the dense exponential of H(t + dt/2)") {
    const auto m = small_two_level();
    const auto H = build_two_level(m);
    REQUIRE(H.dim() <= 200);
    CVector psi = initial_state(m).amplitudes;
    const double t = 3.0, dt = 0.05;
    const CVector ref = oracle::expm(-I * dt * CMatrix(H.evaluate(t + 0.5 * dt))) * psi;
    krylov_step(H, psi, t, dt, KrylovConfig{});
    CHECK(oracle::fidelity_defect(psi, ref) < 1e-8);
}

TEST_CASE("norm drift per step stays below 1e-10") {
    const auto m = small_two_level();
    const auto H = build_two_level(m);
    StateVector psi = initial_state(m);
    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k) grid.push_back(0.05 * k);
    const auto tr = propagate(H, psi, grid, {}, KrylovConfig{});
    for (std::size_t k = 1; k < tr.norms.size(); ++k) CHECK(std::abs(tr.norms[k] - tr.norms[k - 1]) < 1e-10);
    CHECK_NOTHROW(tr.check_invariants(1e-9));
}

TEST_CASE("propagation converges at second order under dt halving") {
    auto m = small_two_level();
    m.gamma = 0.5;  // fast envelope so the midpoint error dominates
    m.g_b = 0.3;
    const auto H = build_two_level(m);
    const StateVector psi0 = initial_state(m);
    const std::vector<double> grid{0.0, 4.0};
    auto run = [&](double dt) {
        KrylovConfig c;
        c.dt = dt;
        c.krylov_dim = 30;
        StateVector out;
        propagate(H, psi0, grid, {}, c, &out);
        return out.amplitudes;
    };
    const CVector ref = run(0.2 / 64);
    const double e1 = (run(0.2) - ref).norm(), e2 = (run(0.1) - ref).norm(), e3 = (run(0.05) - ref).norm();
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
    // Fidelity defects scale with the squared error.
    const double f1 = oracle::fidelity_defect(run(0.2), ref), f2 = oracle::fidelity_defect(run(0.1), ref);
    CHECK(f1 / f2 > 8.0);
}

TEST_CASE("time-dependent propagation agrees with a fine RK4 solution") {
    const auto m = small_two_level();
    const auto H = build_two_level(m);
    const StateVector psi0 = initial_state(m);
    StateVector out;
    KrylovConfig c;
    c.dt = 0.01;
    propagate(H, psi0, {0.0, 20.0}, {}, c, &out);
    const CVector ref = oracle::rk4([&](double t) { return CMatrix(H.evaluate(t)); }, psi0.amplitudes, 0.0, 20.0, 20000);
    CHECK((out.amplitudes - ref).norm() < 1e-6);
}

TEST_CASE("substep count and grid validation") {
    CHECK(substep_count(1.0, 0.05) == 20);
    CHECK(substep_count(1.0000000001, 0.05) == 20);
    CHECK(substep_count(0.01, 0.05) == 1);
    const auto m = small_two_level();
    const auto H = build_two_level(m);
    CHECK_THROWS(propagate(H, initial_state(m), {1.0, 2.0}, {}, KrylovConfig{}));
    CHECK_THROWS(propagate(H, initial_state(m), {0.0, 2.0, 1.0}, {}, KrylovConfig{}));
    KrylovConfig bad;
    bad.krylov_dim = 1;
    CHECK_THROWS_WITH(bad.validate(), doctest::Contains("numerics.krylov_dim"));
    CHECK_THROWS_WITH(krylov_from_json({{"dtt", 0.1}}), doctest::Contains("dtt"));
}
