// spectra.cpp — Fluorescence observables over omega_b grids

#include "fluor/spectra.hpp"
#include "fluor/hamiltonian.hpp"
#include "fluor/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fluor {

FluorescenceProbability fluorescence_probability(const StateVector& psi) {
    const auto& L = psi.layout;
    if (!L.has(Factor::Fluorescence)) throw std::invalid_argument("fluorescence_probability: no fluorescence factor");
    const std::size_t nb = L.dim(Factor::Fluorescence);
    const std::size_t sb = L.stride(Factor::Fluorescence);
    FluorescenceProbability out;
    out.Pm.assign(nb, 0.0);
    for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i)
        out.Pm[(static_cast<std::size_t>(i) / sb) % nb] += std::norm(psi.amplitudes(i));
    for (std::size_t m = 1; m < nb; ++m) out.P += out.Pm[m];
    return out;
}

void SpectrumDataset::check_invariants(double tol) const {
    if (P.rows() != static_cast<Eigen::Index>(time_grid.size()) || P.cols() != static_cast<Eigen::Index>(omega_grid.size()))
        throw std::logic_error("dataset: P shape does not match grids");
    for (Eigen::Index i = 0; i < P.size(); ++i)
        if (!(P(i) >= -tol && P(i) <= 1.0 + tol)) throw std::logic_error("dataset: P outside [0, 1]");
    if (Pm) {
        for (Eigen::Index w = 0; w < Pm->rows(); ++w) {
            const double total = Pm->row(w).sum();
            if (std::abs(total - 1.0) > tol) throw std::logic_error("dataset: sum_m Pm deviates from 1");
            const double emitted = total - (*Pm)(w, 0);
            if (std::abs(emitted - P(P.rows() - 1, w)) > tol) throw std::logic_error("dataset: P != sum_{m>0} Pm");
        }
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::vector<double> uniform_times(double t_final, double spacing) {
    const int n = substep_count(t_final, spacing);
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = t_final * i / n;
    return t;
}

SpectrumDataset time_resolved_map(const ModelSpec& model, const std::vector<double>& omega_grid,
                                  const std::vector<double>& time_grid, const ScanOptions& opt) {
    validate(model);
    opt.numerics.validate();
    if (omega_grid.empty()) throw std::invalid_argument("spectrum: empty omega_b grid");
    SpectrumDataset data;
    data.omega_grid = omega_grid;
    data.time_grid = time_grid;
    data.P = RMatrix::Zero(static_cast<Eigen::Index>(time_grid.size()), static_cast<Eigen::Index>(omega_grid.size()));
    RMatrix Pm = RMatrix::Zero(static_cast<Eigen::Index>(omega_grid.size()), model.n_b_max + 1);

    auto failures = parallel_for(omega_grid.size(), opt.workers, [&](std::size_t w) {
        ModelSpec m = model;
        m.omega_b = omega_grid[w];
        const OperatorMatrix H = build_hamiltonian(m);
        const StateVector psi0 = initial_state(m);
        std::vector<double> column;
        Observer obs = [&column](double, const StateVector& psi, Trajectory&) {
            column.push_back(fluorescence_probability(psi).P);
        };
        StateVector psi_final;
        propagate(H, psi0, time_grid, {obs}, opt.numerics, &psi_final);
        // Each worker writes only its own column.
        for (std::size_t k = 0; k < column.size(); ++k)
            data.P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) = column[k];
        const auto fp = fluorescence_probability(psi_final);
        for (std::size_t k = 0; k < fp.Pm.size(); ++k)
            Pm(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(k)) = fp.Pm[k];
    });
    if (!failures.empty()) {
        std::ostringstream msg;
        msg << "spectrum: " << failures.size() << " omega_b point(s) failed:";
        for (const auto& f : failures) msg << "\n  omega_b = " << omega_grid[f.index] << ": " << f.message;
        throw std::runtime_error(msg.str());
    }
    data.Pm = std::move(Pm);
    data.metadata["model"] = to_json(model);
    data.metadata["numerics"] = to_json(opt.numerics);
    data.check_invariants();
    return data;
}

SpectrumDataset scan_spectrum(const ModelSpec& model, const std::vector<double>& omega_grid, double t_final,
                              const ScanOptions& opt) {
    const double rate = model.family == Family::MovingAtom ? std::min(model.gamma1, model.gamma2) : model.gamma;
    if (rate * t_final < 8.0 - 1e-12)
        throw std::invalid_argument("spectrum: gamma * t_final must be at least 8 for an asymptotic scan");
    SpectrumDataset d = time_resolved_map(model, omega_grid, {0.0, 0.9 * t_final, t_final}, opt);
    double delta = 0.0;
    for (Eigen::Index w = 0; w < d.P.cols(); ++w) delta = std::max(delta, std::abs(d.P(2, w) - d.P(1, w)));
    d.metadata["convergence_delta"] = delta;
    return d;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& x, const RVector& y, double lo, double hi,
                                      double rel_floor) {
    std::vector<std::size_t> idx;
    double top = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] >= lo && x[i] <= hi) top = std::max(top, y(static_cast<Eigen::Index>(i)));
    const std::size_t n = x.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (x[i] < lo || x[i] > hi) continue;
        const double v = y(static_cast<Eigen::Index>(i));
        if (!(v > y(static_cast<Eigen::Index>(i - 1)))) continue;
        std::size_t j = i;
        while (j + 1 < n && y(static_cast<Eigen::Index>(j + 1)) == v) ++j;
        if (j + 1 < n && y(static_cast<Eigen::Index>(j + 1)) < v && v >= rel_floor * top) idx.push_back(i);
    }
    return idx;
}

PeakMetrics peak_metrics(const SpectrumDataset& data, std::pair<double, double> window) {
    std::vector<Eigen::Index> cols;
    for (std::size_t i = 0; i < data.omega_grid.size(); ++i)
        if (data.omega_grid[i] >= window.first && data.omega_grid[i] <= window.second)
            cols.push_back(static_cast<Eigen::Index>(i));
    if (cols.size() < 5) throw std::invalid_argument("peak_metrics: window covers fewer than 5 grid points");

    PeakMetrics pm;
    const Eigen::Index last = data.P.rows() - 1;
    Eigen::Index best = cols.front();
    for (auto c : cols)
        if (data.P(last, c) > data.P(last, best)) best = c;
    pm.peak_frequency = data.omega_grid[static_cast<std::size_t>(best)];
    pm.height = data.P(last, best);

    const RVector final_row = data.final_row();
    const auto maxima = local_maxima(data.omega_grid, final_row, window.first, window.second, 0.0);
    if (pm.height < 1e-8 || maxima.empty()) {
        pm.flagged = true;
        pm.note = "no local maximum above the 1e-8 noise floor in the window";
    }

    const double half = 0.5 * pm.height;
    auto window_max = [&](Eigen::Index r) {
        double v = 0.0;
        for (auto c : cols) v = std::max(v, data.P(r, c));
        return v;
    };
    pm.rise_time = data.time_grid.back();
    for (Eigen::Index r = 0; r <= last; ++r) {
        const double v = window_max(r);
        if (v >= half) {
            if (r == 0) {
                pm.rise_time = data.time_grid[0];
            } else {
                const double v0 = window_max(r - 1);
                const double t0 = data.time_grid[static_cast<std::size_t>(r - 1)];
                const double t1 = data.time_grid[static_cast<std::size_t>(r)];
                pm.rise_time = t0 + (half - v0) / (v - v0) * (t1 - t0);
            }
            break;
        }
    }
    return pm;
}

double peak_fwhm(const std::vector<double>& x, const RVector& y, std::size_t peak) {
    const double half = 0.5 * y(static_cast<Eigen::Index>(peak));
    auto cross = [&](std::size_t a, std::size_t b) {
        const double ya = y(static_cast<Eigen::Index>(a)), yb = y(static_cast<Eigen::Index>(b));
        return x[a] + (half - ya) / (yb - ya) * (x[b] - x[a]);
    };
    std::size_t i = peak;
    while (i > 0 && y(static_cast<Eigen::Index>(i - 1)) > half) --i;
    if (i == 0) throw std::runtime_error("peak_fwhm: left half-height crossing outside the grid");
    const double left = cross(i - 1, i);
    std::size_t j = peak;
    while (j + 1 < x.size() && y(static_cast<Eigen::Index>(j + 1)) > half) ++j;
    if (j + 1 >= x.size()) throw std::runtime_error("peak_fwhm: right half-height crossing outside the grid");
    const double right = cross(j, j + 1);
    return right - left;
}

} // namespace fluor
