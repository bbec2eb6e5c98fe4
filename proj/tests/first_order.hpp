// first_order.hpp — Closed-form one-photon fluorescence for static-pump models

#pragma once

#include "fluor/fock.hpp"
#include "fluor/model.hpp"

#include <cmath>
#include <complex>

namespace first_order {

using namespace fluor;

// Largest relative gap between the propagated P and the one-photon result
// for g_b = 0.01, Gamma = 0.02 (alpha = 1, g_a = 0.1), frozen at 0.03986.
inline constexpr double kFrozenRelativeDeviation = 0.03986;
inline constexpr double kFrozenDeviationTolerance = 5e-4;

// Dense pump-dressed two-level Hamiltonian without the fluorescence mode.
inline Eigen::MatrixXd dressed_h0(const ModelSpec& m) {
    const int na = m.pump_cutoff() + 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * na, 2 * na);
    for (int e = 0; e < 2; ++e)
        for (int n = 0; n < na; ++n) h(e * na + n, e * na + n) = m.levels[static_cast<std::size_t>(e)] + n * m.omega_a;
    for (int n = 0; n + 1 < na; ++n) {
        const double v = *m.g_a * std::sqrt(n + 1.0);
        h(n, na + n + 1) = h(na + n + 1, n) = v;
        h(n + 1, na + n) = h(na + n, n + 1) = v;
    }
    return h;
}

// P1(t, omega) = sum_l |g_b sum_l' X_ll' c_l' (e^{i z t} - 1) / z|^2 with
// z = E_l + omega - E_l' + i Gamma, X = V^T sigma_x V and c = V^T psi0.
inline double probability(const ModelSpec& m, double omega, double t) {
    const Eigen::MatrixXd h = dressed_h0(m);
    const int na = m.pump_cutoff() + 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXd& V = es.eigenvectors();
    const Eigen::VectorXd& E = es.eigenvalues();
    Eigen::MatrixXd sx = Eigen::MatrixXd::Zero(2 * na, 2 * na);
    sx.topRightCorner(na, na).setIdentity();
    sx.bottomLeftCorner(na, na).setIdentity();
    const Eigen::MatrixXd X = V.transpose() * sx * V;
    const auto coh = coherent_state({m.alpha, m.pump_cutoff()}).amplitudes;
    Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(2 * na);
    psi0.head(na) = coh;
    const Eigen::VectorXd c = V.transpose() * psi0;
    double P = 0.0;
    for (int l = 0; l < 2 * na; ++l) {
        std::complex<double> amp = 0.0;
        for (int lp = 0; lp < 2 * na; ++lp) {
            const std::complex<double> z(E(l) + omega - E(lp), m.gamma);
            amp += X(l, lp) * c(lp) * (std::exp(std::complex<double>(0, 1) * z * t) - 1.0) / z;
        }
        P += std::norm(m.g_b * amp);
    }
    return P;
}

} // namespace first_order
