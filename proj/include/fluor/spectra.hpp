// spectra.hpp — Fluorescence probability, spectral scans and peak metrics

#pragma once

#include "fluor/model.hpp"
#include "fluor/propagator.hpp"
#include "fluor/types.hpp"

#include <json.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace fluor {

struct FluorescenceProbability {
    double P{0.0};
    std::vector<double> Pm;
};

FluorescenceProbability fluorescence_probability(const StateVector& psi);

struct SpectrumDataset {
    std::vector<double> omega_grid;
    std::vector<double> time_grid;
    RMatrix P;                     // rows: time, columns: omega_b
    std::optional<RMatrix> Pm;     // final-time breakdown, rows: omega_b, columns: m
    nlohmann::json metadata = nlohmann::json::object();

    RVector final_row() const { return P.row(P.rows() - 1).transpose(); }
    // Probability bounds and completeness; throws std::logic_error.
    void check_invariants(double tol = 1e-9) const;
};

struct ScanOptions {
    KrylovConfig numerics;
    int workers{1};
};

// One propagation per omega_b; rows of P follow time_grid (which must start at 0).
SpectrumDataset time_resolved_map(const ModelSpec& model, const std::vector<double>& omega_grid,
                                  const std::vector<double>& time_grid, const ScanOptions& opt);

// Asymptotic spectrum P(t_final, omega_b); requires gamma * t_final >= 8.
// The time grid is {0, 0.9 t_final, t_final}; metadata carries the largest
// |P(t_final) - P(0.9 t_final)| as "convergence_delta".
SpectrumDataset scan_spectrum(const ModelSpec& model, const std::vector<double>& omega_grid, double t_final,
                              const ScanOptions& opt);

std::vector<double> linspace(double lo, double hi, std::size_t n);
// Grid with spacing dt from 0 to t_final inclusive.
std::vector<double> uniform_times(double t_final, double spacing);

// Interior local maxima (plateaus counted once) of y whose value is at least
// rel_floor times the largest y within [lo, hi].
std::vector<std::size_t> local_maxima(const std::vector<double>& x, const RVector& y, double lo, double hi,
                                      double rel_floor);

struct PeakMetrics {
    double peak_frequency{0.0};
    double height{0.0};
    double rise_time{0.0};
    bool flagged{false};
    std::string note;
};

PeakMetrics peak_metrics(const SpectrumDataset& data, std::pair<double, double> window);

// Full width at half maximum of the local maximum at index peak, by linear
// interpolation of the half-height crossings on each side.
double peak_fwhm(const std::vector<double>& x, const RVector& y, std::size_t peak);

} // namespace fluor
