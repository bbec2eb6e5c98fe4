// test_fock.cpp — Basis layout, coherent states and initial states

#include "fluor/fock.hpp"
#include "fluor/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace fluor;

TEST_CASE("layout strides put the last factor fastest") {
    BasisLayout L({{Factor::Electron, 2}, {Factor::Pump, 4}, {Factor::Fluorescence, 3}});
    CHECK(L.total_dim() == 24);
    CHECK(L.stride(Factor::Fluorescence) == 1);
    CHECK(L.stride(Factor::Pump) == 3);
    CHECK(L.stride(Factor::Electron) == 12);
    CHECK(L.stride(Factor::Position) == 0);
    CHECK(L.dim(Factor::Position) == 1);
    for (std::size_t i = 0; i < L.total_dim(); ++i) CHECK(L.flat(L.multi(i)) == i);
    CHECK(L.digit(L.flat({1, 2, 1}), Factor::Pump) == 2);
    CHECK_THROWS(BasisLayout({{Factor::Pump, 2}, {Factor::Pump, 3}}));
    CHECK_THROWS(BasisLayout({{Factor::Pump, 0}}));
}

TEST_CASE("minimal cutoff rule") {
    CHECK(minimal_cutoff(5.0) == 65);
    CHECK(minimal_cutoff(1.0) == 9);
    CHECK(minimal_cutoff(3.0) == 33);
    CHECK(minimal_cutoff(0.0) == 0);
}

TEST_CASE("coherent amplitudes have Poisson moments") {
    for (double a : {0.5, 1.0, 3.0, 5.0}) {
        const auto c = coherent_state({a, minimal_cutoff(a)});
        double m0 = 0, m1 = 0, m2 = 0;
        for (Eigen::Index n = 0; n < c.amplitudes.size(); ++n) {
            const double p = c.amplitudes(n) * c.amplitudes(n);
            m0 += p;
            m1 += n * p;
            m2 += static_cast<double>(n) * n * p;
        }
        // Untruncated Poisson weights for the same cutoff.
        double q0 = 0, q1 = 0, q2 = 0;
        for (int n = 0; n <= minimal_cutoff(a); ++n) {
            const double p = std::exp(n * std::log(a * a) - a * a - std::lgamma(n + 1.0));
            q0 += p;
            q1 += n * p;
            q2 += static_cast<double>(n) * n * p;
        }
        CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(m1 == doctest::Approx(q1 / q0).epsilon(1e-12));
        CHECK(m2 == doctest::Approx(q2 / q0).epsilon(1e-12));
        CHECK(c.captured_norm2 == doctest::Approx(q0).epsilon(1e-12));
        CHECK(m1 == doctest::Approx(a * a).epsilon(1e-5));
        CHECK(1.0 - c.captured_norm2 < 1e-6);
    }
}

TEST_CASE("coherent amplitudes are finite for large alpha") {
    const auto c = coherent_state({15.0, minimal_cutoff(15.0)});
    CHECK(c.amplitudes.allFinite());
    CHECK(c.amplitudes.maxCoeff() > 0.0);
}

TEST_CASE("initial state is the ground level, coherent pump and fluorescence vacuum") {
    ModelSpec m;
    m.g_a = 0.1;
    m.alpha = 1.0;
    m.n_b_max = 2;
    validate(m);
    const auto psi = initial_state(m);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const auto& L = psi.layout;
    for (std::size_t i = 0; i < L.total_dim(); ++i)
        if (L.digit(i, Factor::Electron) != 0 || L.digit(i, Factor::Fluorescence) != 0)
            CHECK(psi.amplitudes(static_cast<Eigen::Index>(i)) == cplx(0.0));
}

TEST_CASE("wavepacket outside mass agrees with direct quadrature") {
    ModelSpec m;
    m.family = Family::MovingAtom;
    m.units = Units::Atomic;
    m.levels = {0.0, 0.043};
    m.omega_a = 0.043;
    m.g_a = 0.0043;
    m.alpha = 1.0;
    m.n_b_max = 0;
    m.length = 1000;
    m.x1 = 400;
    m.x2 = 500;
    m.grid_points = 300;
    m.x0 = 350;
    m.sigma = 300;
    m.p0 = 0.5;
    const auto w = gaussian_wavepacket(m);
    // |phi|^2 ~ exp(-2 u^2/sigma^2): integrate the tails numerically.
    auto dens = [&](double x) { return std::exp(-2.0 * (x - m.x0) * (x - m.x0) / (m.sigma * m.sigma)); };
    double inside = 0, outside = 0;
    const double h = 0.05;
    for (int k = 0; k < 140000; ++k) {
        const double x = -3000.0 + (k + 0.5) * h;
        ((x >= 0 && x <= m.length) ? inside : outside) += dens(x) * h;
    }
    CHECK(w.outside_mass == doctest::Approx(outside / (inside + outside)).epsilon(1e-6));
    CHECK(w.values.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("initial state rejects a packet spilling past the walls") {
    ModelSpec m;
    m.family = Family::MovingAtom;
    m.units = Units::Atomic;
    m.levels = {0.0, 0.043};
    m.omega_a = 0.043;
    m.g_a = 0.0043;
    m.alpha = 1.0;
    m.n_b_max = 0;
    m.length = 1000;
    m.x1 = 400;
    m.x2 = 500;
    m.grid_points = 300;
    m.x0 = 100;
    m.sigma = 300;
    CHECK_THROWS_WITH(initial_state(m), doctest::Contains("model.sigma"));
}
