// dicke.cpp — Stiffness eigenproblem, critical curves, closed-form cross-check

#include "fluor/dicke.hpp"

#include <cmath>
#include <stdexcept>

namespace fluor {

StiffnessMatrix stiffness_matrix(const Frequencies& w, double la, double lb) {
    if (!(w.spin > 0 && w.pump > 0 && w.fluorescence > 0))
        throw std::invalid_argument("stiffness_matrix: frequencies must be positive");
    if (la < 0 || lb < 0) throw std::invalid_argument("stiffness_matrix: couplings must be nonnegative");
    StiffnessMatrix s;
    s.K << w.spin, 2 * la, 2 * lb,
           2 * la, w.pump, 0.0,
           2 * lb, 0.0, w.fluorescence;
    return s;
}

double stiffness_determinant(const Frequencies& w, double la, double lb) {
    return w.spin * w.pump * w.fluorescence - 4 * la * la * w.fluorescence - 4 * lb * lb * w.pump;
}

NormalModeResult lowest_mode(const StiffnessMatrix& K) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(K.K);
    NormalModeResult r;
    r.omega0 = es.eigenvalues()(0);
    r.coefficients = es.eigenvectors().col(0);
    const double scale = std::max(1.0, K.K.cwiseAbs().maxCoeff());
    r.degenerate = std::abs(es.eigenvalues()(1) - es.eigenvalues()(0)) < 1e-12 * scale;
    r.residual = (K.K * r.coefficients - r.omega0 * r.coefficients).norm();
    return r;
}

ModeWeights mode_coefficients(const StiffnessMatrix& K) {
    const auto r = lowest_mode(K);
    const Eigen::Vector3d& c = r.coefficients;
    return {c(0) * c(0), c(1) * c(1), c(2) * c(2), r.degenerate};
}

std::vector<CriticalPoint> critical_curve(const Frequencies& w, const std::vector<double>& grid) {
    std::vector<CriticalPoint> out;
    for (double lb : grid) {
        CriticalPoint p;
        p.lambda_b = lb;
        const double rhs = (w.spin * w.pump * w.fluorescence - 4 * lb * lb * w.pump) / (4 * w.fluorescence);
        if (rhs >= 0.0) {
            const double la = std::sqrt(rhs);
            p.lambda_a = la;
            p.determinant = stiffness_determinant(w, la, lb);
            p.lowest_eigenvalue = lowest_mode(stiffness_matrix(w, la, lb)).omega0;
            // Bracket the lowest-eigenvalue zero; it is positive at 0 and
            // decreasing in lambda_a.
            double lo = 0.0, hi = std::max(1.0, 2 * la + 1.0);
            if (lowest_mode(stiffness_matrix(w, lo, lb)).omega0 >= 0.0) {
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (lowest_mode(stiffness_matrix(w, mid, lb)).omega0 > 0.0) lo = mid;
                    else hi = mid;
                }
                p.bisection = 0.5 * (lo + hi);
            }
        }
        out.push_back(p);
    }
    return out;
}

ClosedFormOmega0 closed_form_omega0(double la, double lb) {
    using C = std::complex<double>;
    ClosedFormOmega0 r;
    r.alpha = 1.0 / 32 + 9 * la * la - 18 * lb * lb;
    r.beta = 1.0 / 16 + 12 * la * la + 12 * lb * lb;
    const C disc = std::sqrt(C(r.alpha * r.alpha - 4 * r.beta * r.beta * r.beta, 0.0));
    const C A = C(r.alpha, 0.0) - disc;
    // Principal cube root of a real negative number would be complex; at the
    // origin A is real and negative, so fall back to real roots there.
    auto cbrt = [](C z) {
        if (z.imag() == 0.0) return C(std::cbrt(z.real()), 0.0);
        return std::pow(z, 1.0 / 3.0);
    };
    const C val = (11.0 - 4.0 * r.beta * cbrt(2.0 / A) - 4.0 * cbrt(A / 2.0)) / 12.0;
    r.value = val.real();
    r.imaginary_residue = val.imag();
    return r;
}

int estimate_critical_N(double g_a, double g_b, const Frequencies& w, int n_limit) {
    if (g_a < 0 || g_b < 0 || (g_a == 0 && g_b == 0))
        throw std::invalid_argument("estimate_critical_N: couplings must be nonnegative and not both zero");
    for (int n = 1; n <= n_limit; ++n)
        if (stiffness_determinant(w, n * g_a, n * g_b) <= 0.0) return n;
    throw std::runtime_error("estimate_critical_N: no critical N below the limit");
}

} // namespace fluor
