// dressed.hpp — Dressed energies, level curves and the parity operator

#pragma once

#include "fluor/hamiltonian.hpp"
#include "fluor/model.hpp"
#include "fluor/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fluor {

struct DressedLevels {
    int n{0};
    double plus{0.0};
    double minus{0.0};
    bool uncoupled{false};  // n = 0: single level, plus == minus
};

DressedLevels dressed_energies(int n, double eps1, double eps2, double omega_a, double g_a);

// Dense electron x pump Hamiltonian (no fluorescence mode) at coupling g.
RMatrix dressed_hamiltonian(const ModelSpec& spec, double g);

struct LevelCurves {
    std::vector<double> couplings;
    RMatrix energies;  // rows: coupling, columns: tracked level
    std::optional<std::size_t> tracking_failure;  // first coupling index with overlap < 0.5
    double min_overlap{1.0};
};

// Levels followed across the grid by maximal eigenvector overlap with the
// previous point. Only the lowest `keep` levels are returned (0 keeps all).
LevelCurves energy_levels_vs_coupling(const ModelSpec& spec, const std::vector<double>& g_grid, std::size_t keep = 0);

enum class ParityConvention { GroundPositive, GroundNegative };

struct ParityOperator {
    RVector signs;  // diagonal of Pi over the layout
    SparseC matrix() const { return diagonal_operator(signs); }
};

// (n1 - n2)(-1)^{n_a}(-1)^{n_b}; for the collective-spin layout the electron
// factor is (-1)^k with k the excitation count.
ParityOperator parity_operator(const BasisLayout& layout, ParityConvention conv = ParityConvention::GroundPositive);

struct ParityReport {
    ParityOperator pi;
    double commutator_norm{0.0};           // max elementwise |[H(t), Pi]|
    std::vector<double> energies;          // lowest eigenvalues of H(t)
    std::vector<double> parity_expectation;
};

double commutator_norm(const SparseC& h, const ParityOperator& pi);

// Diagonalizes H(t) densely; eigenvectors inside each degenerate cluster are
// rotated to diagonalize Pi before expectations are taken.
ParityReport parity_classify(const OperatorMatrix& H, double t, std::size_t n_low,
                             ParityConvention conv = ParityConvention::GroundPositive);

double parity_expectation(const StateVector& psi, const ParityOperator& pi);

} // namespace fluor
