// test_hamiltonian.cpp — Builder matrix elements against hand-built operators

#include "fluor/hamiltonian.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fluor;

namespace {

ModelSpec two_level(double alpha, double ga) {
    ModelSpec m;
    m.omega_a = 1.0;
    m.omega_b = 0.9;
    m.alpha = alpha;
    m.g_a = ga;
    m.g_b = 0.01;
    m.gamma = 0.02;
    m.n_b_max = 2;
    return m;
}

CMatrix dense(const SparseC& s) { return CMatrix(s); }

} // namespace

TEST_CASE("ladder operators have sqrt(n) elements") {
    const CMatrix a = dense(annihilation_operator(6));
    for (int n = 1; n < 6; ++n) CHECK(a(n - 1, n).real() == doctest::Approx(std::sqrt(n)));
    const CMatrix q = dense(quadrature_operator(6));
    CHECK((q - a - a.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    const CMatrix n = dense(number_operator(6));
    CHECK((n - a.adjoint() * a).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("kron matches the dense Kronecker product") {
    const SparseC a = annihilation_operator(3), b = quadrature_operator(4);
    const CMatrix k = dense(kron(a, b));
    const CMatrix da = dense(a), db = dense(b);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK((k.block(4 * i, 4 * j, 4, 4) - da(i, j) * db).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("collective spin satisfies the angular momentum algebra") {
    for (int N : {1, 2, 5, 10}) {
        const CMatrix sz = dense(spin_z(N)), sx = dense(spin_x(N));
        // S_y from the raising part of S_x.
        CMatrix sp = CMatrix::Zero(N + 1, N + 1);
        for (int k = 0; k < N; ++k) sp(k + 1, k) = 2.0 * sx(k + 1, k);
        const CMatrix sy = (sp - sp.adjoint()) / cplx(0.0, 2.0);
        const CMatrix comm = sx * sy - sy * sx;
        CHECK((comm - I * sz).cwiseAbs().maxCoeff() < 1e-12);
        const CMatrix casimir = sx * sx + sy * sy + sz * sz;
        const double s = 0.5 * N;
        CHECK((casimir - s * (s + 1) * CMatrix::Identity(N + 1, N + 1)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("one-atom array reduces to the two-level builder") {
    ModelSpec m = two_level(1.0, 0.1);
    m.omega_a = 0.5;
    const auto H2 = build_two_level(m);
    ModelSpec a = m;
    a.family = Family::Array;
    a.n_atoms = 1;
    const auto Ha = build_array(a);
    // sigma_z/2 shifts the diagonal by a constant relative to (eps1, eps2).
    const CMatrix d = dense(Ha.static_part) - dense(H2.static_part);
    const cplx shift = d(0, 0);
    CHECK((d - shift * CMatrix::Identity(d.rows(), d.cols())).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((dense(Ha.terms[0].matrix) - dense(H2.terms[0].matrix)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two-level builder elements") {
    const auto m = two_level(1.0, 0.1);
    const auto H = build_two_level(m);
    const auto& L = H.layout;
    CHECK(H.hermiticity_defect() == 0.0);
    const CMatrix h = dense(H.static_part);
    // <2, n-1, 0| H |1, n, 0> = g_a sqrt(n)
    for (std::size_t n = 1; n < L.dim(Factor::Pump); ++n) {
        const auto r = L.flat({1, n - 1, 0}), c = L.flat({0, n, 0});
        CHECK(h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)).real() == doctest::Approx(0.1 * std::sqrt(n)));
    }
    const auto i = L.flat({1, 3, 2});
    CHECK(h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real() == doctest::Approx(1.0 + 3.0 + 2 * 0.9));
    const std::vector<double> c = H.coefficients(10.0);
    CHECK(c[0] == doctest::Approx(0.01 * std::exp(-0.2)));
}

TEST_CASE("three-level couplings") {
    ModelSpec m;
    m.family = Family::ThreeLevelV1;
    m.levels = {0.0, 0.5, 1.0};
    m.omega_a = 0.5;
    m.alpha = 1.0;
    m.f = 0.1;
    m.g_b = 0.01;
    m.n_b_max = 1;
    validate(m);
    const auto v1 = build_three_level(m);
    m.family = Family::ThreeLevelV2;
    m.g_a = 0.1;
    const auto v2 = build_three_level(m);
    const auto& L = v1.layout;
    const auto idx = [&](std::size_t e, std::size_t n) { return static_cast<Eigen::Index>(L.flat({e, n, 0})); };
    const CMatrix h1 = dense(v1.static_part), h2 = dense(v2.static_part);
    CHECK(std::abs(h1(idx(1, 0), idx(0, 1))) == doctest::Approx(0.1));
    CHECK(std::abs(h1(idx(2, 0), idx(1, 1))) == doctest::Approx(0.1));
    CHECK(std::abs(h1(idx(2, 0), idx(0, 1))) == 0.0);
    CHECK(std::abs(h2(idx(2, 0), idx(0, 1))) == doctest::Approx(0.1));
    // Fluorescence acts on 1 <-> 3 only.
    const CMatrix fl = dense(v1.terms[0].matrix);
    CHECK(std::abs(fl(static_cast<Eigen::Index>(L.flat({2, 0, 1})), static_cast<Eigen::Index>(L.flat({0, 0, 0})))) == 1.0);
    CHECK(std::abs(fl(static_cast<Eigen::Index>(L.flat({1, 0, 1})), static_cast<Eigen::Index>(L.flat({0, 0, 0})))) == 0.0);
}

TEST_CASE("finite-difference kinetic operator reproduces box levels") {
    const int P = 60;
    const double dx = 0.7, M = 3.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(dense(kinetic_operator(P, dx, M)));
    for (int k = 1; k <= P; ++k) {
        const double expect = (1.0 - std::cos(k * std::numbers::pi / (P + 1))) / (M * dx * dx);
        CHECK(es.eigenvalues()(k - 1) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("every builder is Hermitian") {
    ModelSpec m = two_level(1.0, 0.1);
    CHECK(build_two_level(m).hermiticity_defect() == 0.0);
    m.family = Family::Semiclassical;
    CHECK(build_semiclassical(m).hermiticity_defect() == 0.0);
    m.family = Family::Array;
    m.n_atoms = 4;
    CHECK(build_array(m).hermiticity_defect() < 1e-15);
    ModelSpec r = two_level(1.0, 0.1);
    r.family = Family::RwaAea;
    r.levels = {0.0, 5.0, 1.0};
    r.f = 0.01;
    r.omega_a = 0.5;
    CHECK(build_rwa_aea(r).hermiticity_defect() == 0.0);
}

TEST_CASE("moving-atom operator without fluorescence is real symmetric") {
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
    m.grid_points = 120;
    m.x0 = 450;
    m.sigma = 150;
    validate(m);
    const auto H = build_moving_atom(m, false);
    CHECK(H.terms.empty());
    CHECK(H.hermiticity_defect() == 0.0);
    const CMatrix h = dense(H.static_part);
    CHECK(h.imag().cwiseAbs().maxCoeff() == 0.0);
    m.g1 = 0.0043;
    m.g2 = 0.00043;
    m.n_b_max = 1;
    const auto Hf = build_moving_atom(m, true);
    REQUIRE(Hf.terms.size() == 2);
    // Inside and outside projections partition the position factor.
    const CMatrix sum = dense(Hf.terms[0].matrix) + dense(Hf.terms[1].matrix);
    const auto& L = Hf.layout;
    SparseC sx(2, 2);
    sx.insert(0, 1) = 1.0;
    sx.insert(1, 0) = 1.0;
    const CMatrix full = dense(embed(L, {{Factor::Electron, sx}, {Factor::Fluorescence, quadrature_operator(2)}}));
    CHECK((sum - full).cwiseAbs().maxCoeff() == 0.0);
}
