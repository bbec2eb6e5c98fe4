// hamiltonian.hpp — Sparse Hermitian generators for every model family

#pragma once

#include "fluor/fock.hpp"
#include "fluor/model.hpp"
#include "fluor/types.hpp"

#include <string>
#include <vector>

namespace fluor {

// amplitude * exp(-decay_rate t) * cos(frequency t); real for real t.
struct Envelope {
    double amplitude{1.0};
    double decay_rate{0.0};
    double frequency{0.0};

    double value(double t) const;
};

struct EnvelopeTerm {
    std::string label;
    SparseC matrix;
    Envelope envelope;
};

struct OperatorMatrix {
    BasisLayout layout;
    SparseC static_part;
    std::vector<EnvelopeTerm> terms;

    std::size_t dim() const { return layout.total_dim(); }
    std::vector<double> coefficients(double t) const;

    // Materialized H(t).
    SparseC evaluate(double t) const;
    // y <- H(t) x without forming the sum.
    void apply(double t, const CVector& x, CVector& y) const;
    // y <- (static + sum_k c_k M_k) x with caller-supplied coefficients.
    void apply_with(const std::vector<double>& coeffs, const CVector& x, CVector& y) const;

    // Largest elementwise |A - A^dagger| over the static part and every term.
    double hermiticity_defect() const;
    // Row-sum bound on ||H(t)||.
    double norm_bound(double t) const;
};

// Single-factor building blocks.
SparseC number_operator(std::size_t dim);
SparseC quadrature_operator(std::size_t dim);        // a + a^dagger
SparseC annihilation_operator(std::size_t dim);
SparseC identity_operator(std::size_t dim);
SparseC kron(const SparseC& a, const SparseC& b);
// Tensor product over the layout, identity on factors not listed.
SparseC embed(const BasisLayout& layout, const std::vector<std::pair<Factor, SparseC>>& parts);

// Collective spin S = N/2 in the excitation-count basis k = m + S.
SparseC spin_z(int n_atoms);
SparseC spin_x(int n_atoms);

// Hard-wall second-order finite-difference p^2/2M on the interior grid.
SparseC kinetic_operator(int grid_points, double dx, double mass);

SparseC diagonal_operator(const RVector& d);
double max_abs(const SparseC& a);

OperatorMatrix build_two_level(const ModelSpec& spec);
OperatorMatrix build_three_level(const ModelSpec& spec);
OperatorMatrix build_array(const ModelSpec& spec);
OperatorMatrix build_moving_atom(const ModelSpec& spec, bool include_fluorescence);
OperatorMatrix build_semiclassical(const ModelSpec& spec);
OperatorMatrix build_rwa_aea(const ModelSpec& spec);

// Dispatch on spec.family (moving atom includes fluorescence iff n_b_max > 0).
OperatorMatrix build_hamiltonian(const ModelSpec& spec);

} // namespace fluor
