// motion.hpp — Atom moving through a cavity: eigenbasis, first-order spectrum, Ehrenfest limit

#pragma once

#include "fluor/hamiltonian.hpp"
#include "fluor/model.hpp"
#include "fluor/propagator.hpp"
#include "fluor/spectra.hpp"
#include "fluor/types.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fluor {

// One parity block of H0: basis indices (into the fluorescence-free layout),
// eigenvalues ascending and eigenvectors as columns over those indices.
struct ParitySector {
    std::vector<Eigen::Index> basis;
    RVector values;
    RMatrix vectors;
};

struct EigenDecomposition {
    BasisLayout layout;
    std::array<ParitySector, 2> sectors;
    double h_norm{0.0};
    std::string key;

    std::size_t size() const { return sectors[0].values.size() + sectors[1].values.size(); }
};

struct DiagonalizeOptions {
    std::size_t max_dim{12000};
    std::optional<std::filesystem::path> cache_dir;
};

// H0: the moving-atom Hamiltonian without the fluorescence mode. It is real
// symmetric and commutes with (electron sign)(-1)^{n_a}, so each parity
// block is diagonalized separately.
EigenDecomposition diagonalize_h0(const ModelSpec& spec, const DiagonalizeOptions& opt = {});
// Hash over the sparse H0 entries and layout; keys the on-disk cache.
std::string h0_key(const ModelSpec& spec);

// Largest ||H0 v - e v|| over all eigenpairs and the orthonormality defect.
struct DecompositionCheck {
    double max_residual{0.0};
    double orthonormality{0.0};
    double completeness{0.0};  // max over basis states |sum_l |<b|l>|^2 - 1|
};
DecompositionCheck check_decomposition(const EigenDecomposition& d, const SparseC& h0);

// Coefficients <l|psi> per sector for a fluorescence-free state.
std::array<CVector, 2> expand_state(const EigenDecomposition& d, const CVector& psi);

// Columns (lambda') retained in column sector s; S^k restricted to them.
struct SBlock {
    int row_sector{0};
    int col_sector{1};
    std::vector<Eigen::Index> cols;  // eigen-indices within col_sector
    RMatrix S1;                      // rows: every eigenstate of row_sector
    RMatrix S2;
};

struct SCoefficients {
    std::array<SBlock, 2> blocks;  // blocks[s] has col_sector = s
};

// S^k_{ll'} = g_k <l| sigma_x chi_k(x) |l'>, region 1 inside [x1, x2].
// Columns are restricted to `support` (all eigenstates when empty).
SCoefficients s_coefficients(const EigenDecomposition& d, const ModelSpec& spec,
                             const std::array<std::vector<Eigen::Index>, 2>& support = {});

// Eigen-indices whose |c|^2 are kept until the discarded weight is at most
// `discard` (per sector, largest first).
std::array<std::vector<Eigen::Index>, 2> support_of(const std::array<CVector, 2>& coeffs, double discard);

struct PerturbativeInput {
    const EigenDecomposition* decomp{nullptr};
    const SCoefficients* S{nullptr};
    std::array<CVector, 2> coeffs;  // full coefficient vectors per sector
    double gamma1{0.0};
    double gamma2{0.0};
};

PerturbativeInput prepare_perturbative(const EigenDecomposition& d, const SCoefficients& S, const ModelSpec& spec,
                                       const CVector& psi0);

// P(t, omega) for every time in `times`; a negative time selects the
// asymptotic limit for that row.
SpectrumDataset perturbative_spectrum(const PerturbativeInput& in, const std::vector<double>& times,
                                      const std::vector<double>& omega_grid, int workers = 1);

// (e^w - 1)/w, accurate through w -> 0.
std::complex<double> phi1(std::complex<double> w);

// Marginal position density (per unit length) of a moving-atom state.
RVector nuclear_density(const StateVector& psi, const ModelSpec& spec);

struct DensityRun {
    std::vector<double> times;
    std::vector<RVector> density;   // per time, on the grid
    double reflected{0.0};          // mass at x < x1 at the final time
    double transmitted{0.0};        // mass at x > x2 at the final time
    double final_time{0.0};
};

// Fluorescence-free propagation with N(x,t) snapshots.
DensityRun nuclear_density_run(const ModelSpec& spec, const std::vector<double>& times, const KrylovConfig& cfg);

// Time before the leading edge (x0 + sigma) reaches the right wall moving at p0/M.
double wall_limited_time(const ModelSpec& spec, double requested);

struct EhrenfestOptions {
    KrylovConfig numerics;
    double omega_b{0.0};               // fluorescence mode frequency (used when n_b_max > 0)
    bool freeze_envelopes{false};      // drop all exp(-gamma t) factors
};

struct EhrenfestResult {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> p;
    std::vector<double> force;
    std::vector<double> P;             // fluorescence probability (0 without the mode)
    std::vector<double> energy;        // p^2/2M + <H_q(x)>
    std::optional<double> exit_cavity; // first time with x > x2
    std::optional<double> exit_box;    // atom left [0, L]; run stopped there
};

// Classical (x, p) with the quantum electron x pump (x fluorescence) subsystem.
// Outputs at every grid time until the atom leaves [0, L].
EhrenfestResult ehrenfest_evolve(const ModelSpec& spec, const std::vector<double>& t_grid, const EhrenfestOptions& opt);

// Asymptotic-row spectrum from independent Ehrenfest runs per omega_b.
SpectrumDataset ehrenfest_spectrum(const ModelSpec& spec, const std::vector<double>& omega_grid,
                                   const std::vector<double>& t_grid, const KrylovConfig& numerics, int workers);

// Energies and rates divided by Z, mass multiplied by Z.
ModelSpec rescale(const ModelSpec& spec, double Z);

} // namespace fluor
