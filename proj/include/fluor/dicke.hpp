// dicke.hpp — Three-oscillator stiffness model of the collective array

#pragma once

#include "fluor/types.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace fluor {

struct Frequencies {
    double spin{1.0};
    double pump{1.0};
    double fluorescence{1.0};
};

struct StiffnessMatrix {
    Eigen::Matrix3d K;
};

// Diagonal (w_s, w_a, w_b); s-a and s-b entries 2 lambda_a, 2 lambda_b.
StiffnessMatrix stiffness_matrix(const Frequencies& w, double lambda_a, double lambda_b);
double stiffness_determinant(const Frequencies& w, double lambda_a, double lambda_b);

struct NormalModeResult {
    double omega0{0.0};
    Eigen::Vector3d coefficients;  // unit eigenvector (c_s, c_a, c_b)
    bool degenerate{false};
    double residual{0.0};          // ||K v - omega0 v||
};

NormalModeResult lowest_mode(const StiffnessMatrix& K);

struct ModeWeights {
    double s{0.0}, a{0.0}, b{0.0};
    bool degenerate{false};
};
ModeWeights mode_coefficients(const StiffnessMatrix& K);

struct CriticalPoint {
    double lambda_b{0.0};
    std::optional<double> lambda_a;    // determinant root; absent when none is real
    std::optional<double> bisection;   // zero of lowest_mode along lambda_a
    double determinant{0.0};           // det K at the root
    double lowest_eigenvalue{0.0};     // lowest_mode at the root
};

std::vector<CriticalPoint> critical_curve(const Frequencies& w, const std::vector<double>& lambda_b_grid);

struct ClosedFormOmega0 {
    double value{0.0};          // real part
    double imaginary_residue{0.0};
    double alpha{0.0};
    double beta{0.0};
};

// Printed closed form for w_s = w_b = 1, w_a = 1/2, principal complex roots.
// Cross-check only; the eigensolver is authoritative.
ClosedFormOmega0 closed_form_omega0(double lambda_a, double lambda_b);

// Smallest N with (N g_a, N g_b) on or beyond the critical surface.
int estimate_critical_N(double g_a, double g_b, const Frequencies& w, int n_limit = 1000000);

} // namespace fluor
