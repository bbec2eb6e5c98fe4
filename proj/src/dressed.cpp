// dressed.cpp — Dressed-state diagnostics and parity classification

#include "fluor/dressed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <stdexcept>

namespace fluor {

DressedLevels dressed_energies(int n, double eps1, double eps2, double omega_a, double g_a) {
    if (n < 0) throw std::invalid_argument("dressed_energies: n must be nonnegative");
    DressedLevels d;
    d.n = n;
    if (n == 0) {
        d.plus = d.minus = eps1;
        d.uncoupled = true;
        return d;
    }
    const double centre = 0.5 * (eps1 + eps2) + (n - 0.5) * omega_a;
    const double split = g_a * std::sqrt(static_cast<double>(n));
    d.plus = centre + split;
    d.minus = centre - split;
    return d;
}

RMatrix dressed_hamiltonian(const ModelSpec& spec, double g) {
    if (spec.family != Family::TwoLevel) throw std::invalid_argument("dressed_hamiltonian: two-level models only");
    const int na = spec.pump_cutoff() + 1;
    if (na > 61) throw std::invalid_argument("dressed_hamiltonian: pump cutoff above 60");
    RMatrix h = RMatrix::Zero(2 * na, 2 * na);
    for (int i = 0; i < 2; ++i)
        for (int n = 0; n < na; ++n) h(i * na + n, i * na + n) = spec.levels[static_cast<std::size_t>(i)] + n * spec.omega_a;
    for (int n = 1; n < na; ++n) {
        const double v = g * std::sqrt(static_cast<double>(n));
        // sigma_x (a + a^dagger): |1,n><2,n-1| and |1,n-1><2,n|
        h(0 * na + n, 1 * na + n - 1) = h(1 * na + n - 1, 0 * na + n) = v;
        h(0 * na + n - 1, 1 * na + n) = h(1 * na + n, 0 * na + n - 1) = v;
    }
    return h;
}

LevelCurves energy_levels_vs_coupling(const ModelSpec& spec, const std::vector<double>& g_grid, std::size_t keep) {
    LevelCurves out;
    out.couplings = g_grid;
    if (g_grid.empty()) return out;
    const Eigen::Index dim = 2 * (spec.pump_cutoff() + 1);
    const Eigen::Index k = keep == 0 ? dim : std::min<Eigen::Index>(static_cast<Eigen::Index>(keep), dim);
    out.energies = RMatrix::Zero(static_cast<Eigen::Index>(g_grid.size()), k);

    RMatrix prev_vecs;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    for (std::size_t gi = 0; gi < g_grid.size(); ++gi) {
        Eigen::SelfAdjointEigenSolver<RMatrix> es(dressed_hamiltonian(spec, g_grid[gi]));
        const RMatrix& vecs = es.eigenvectors();
        std::vector<Eigen::Index> assign(static_cast<std::size_t>(dim));
        if (gi == 0) {
            std::iota(assign.begin(), assign.end(), 0);
        } else {
            // Greedy matching on |overlap|, largest first.
            RMatrix ov = (prev_vecs.transpose() * vecs).cwiseAbs();
            std::vector<bool> used_prev(static_cast<std::size_t>(dim), false), used_new(static_cast<std::size_t>(dim), false);
            std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> cand;
            for (Eigen::Index a = 0; a < dim; ++a)
                for (Eigen::Index b = 0; b < dim; ++b)
                    if (ov(a, b) > 1e-3) cand.emplace_back(ov(a, b), a, b);
            std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
            for (const auto& [v, a, b] : cand) {
                if (used_prev[static_cast<std::size_t>(a)] || used_new[static_cast<std::size_t>(b)]) continue;
                used_prev[static_cast<std::size_t>(a)] = used_new[static_cast<std::size_t>(b)] = true;
                assign[static_cast<std::size_t>(order[static_cast<std::size_t>(a)])] = b;
                out.min_overlap = std::min(out.min_overlap, v);
                if (v < 0.5 && !out.tracking_failure) out.tracking_failure = gi;
            }
            // Leftovers (negligible overlap everywhere) pair up in energy order.
            std::vector<Eigen::Index> free_new;
            for (Eigen::Index b = 0; b < dim; ++b)
                if (!used_new[static_cast<std::size_t>(b)]) free_new.push_back(b);
            std::size_t next = 0;
            for (Eigen::Index a = 0; a < dim; ++a)
                if (!used_prev[static_cast<std::size_t>(a)]) {
                    assign[static_cast<std::size_t>(order[static_cast<std::size_t>(a)])] = free_new[next++];
                    out.min_overlap = 0.0;
                    if (!out.tracking_failure) out.tracking_failure = gi;
                }
        }
        // order[column of vecs] = tracked level id
        for (Eigen::Index lvl = 0; lvl < dim; ++lvl) order[static_cast<std::size_t>(assign[static_cast<std::size_t>(lvl)])] = lvl;
        for (Eigen::Index lvl = 0; lvl < k; ++lvl)
            out.energies(static_cast<Eigen::Index>(gi), lvl) = es.eigenvalues()(assign[static_cast<std::size_t>(lvl)]);
        prev_vecs = vecs;
    }
    return out;
}

ParityOperator parity_operator(const BasisLayout& L, ParityConvention conv) {
    if (!L.has(Factor::Electron) || !L.has(Factor::Pump))
        throw std::invalid_argument("parity_operator: layout needs electron and pump factors");
    ParityOperator pi;
    pi.signs.resize(static_cast<Eigen::Index>(L.total_dim()));
    const double e0 = conv == ParityConvention::GroundPositive ? 1.0 : -1.0;
    for (std::size_t i = 0; i < L.total_dim(); ++i) {
        const std::size_t k = L.digit(i, Factor::Electron) + L.digit(i, Factor::Pump) + L.digit(i, Factor::Fluorescence);
        pi.signs(static_cast<Eigen::Index>(i)) = (k % 2 == 0) ? e0 : -e0;
    }
    return pi;
}

double commutator_norm(const SparseC& h, const ParityOperator& pi) {
    // [H, Pi]_{ij} = H_ij (s_j - s_i)
    double m = 0.0;
    for (int r = 0; r < h.outerSize(); ++r)
        for (SparseC::InnerIterator it(h, r); it; ++it)
            m = std::max(m, std::abs(it.value() * (pi.signs(it.col()) - pi.signs(it.row()))));
    return m;
}

ParityReport parity_classify(const OperatorMatrix& H, double t, std::size_t n_low, ParityConvention conv) {
    ParityReport rep;
    rep.pi = parity_operator(H.layout, conv);
    const SparseC h = H.evaluate(t);
    rep.commutator_norm = commutator_norm(h, rep.pi);
    if (H.dim() > 4000) throw std::invalid_argument("parity_classify: dimension too large for dense diagonalization");

    const CMatrix dense = CMatrix(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(dense);
    const RVector& ev = es.eigenvalues();
    CMatrix vecs = es.eigenvectors();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    const Eigen::Index n = ev.size();
    const Eigen::Index want = std::min<Eigen::Index>(static_cast<Eigen::Index>(n_low), n);

    Eigen::Index start = 0;
    while (start < want) {
        Eigen::Index end = start + 1;
        while (end < n && ev(end) - ev(end - 1) < 1e-9 * scale) ++end;
        if (end - start > 1) {
            CMatrix block = vecs.middleCols(start, end - start);
            CMatrix p = block.adjoint() * rep.pi.signs.cast<cplx>().asDiagonal() * block;
            Eigen::SelfAdjointEigenSolver<CMatrix> ps(p);
            vecs.middleCols(start, end - start) = block * ps.eigenvectors();
        }
        start = end;
    }
    for (Eigen::Index i = 0; i < want; ++i) {
        rep.energies.push_back(ev(i));
        double e = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) e += rep.pi.signs(r) * std::norm(vecs(r, i));
        rep.parity_expectation.push_back(e);
    }
    return rep;
}

double parity_expectation(const StateVector& psi, const ParityOperator& pi) {
    double e = 0.0;
    for (Eigen::Index r = 0; r < psi.amplitudes.size(); ++r) e += pi.signs(r) * std::norm(psi.amplitudes(r));
    return e;
}

} // namespace fluor
