// fock.cpp — Product bases, coherent amplitudes, initial states

#include "fluor/fock.hpp"
#include "fluor/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fluor {

std::string to_string(Factor f) {
    switch (f) {
    case Factor::Electron: return "electron";
    case Factor::Position: return "position";
    case Factor::Pump: return "pump-photon";
    case Factor::Fluorescence: return "fluorescence-photon";
    }
    return "unknown";
}

BasisLayout::BasisLayout(std::vector<Entry> factors) : factors_(std::move(factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (factors_[i].dim == 0)
            throw std::invalid_argument("basis: factor " + to_string(factors_[i].label) + " has zero dimension");
        for (std::size_t j = 0; j < i; ++j)
            if (factors_[j].label == factors_[i].label)
                throw std::invalid_argument("basis: duplicate factor " + to_string(factors_[i].label));
    }
    strides_.assign(factors_.size(), 1);
    total_ = 1;
    for (std::size_t i = factors_.size(); i-- > 0;) {
        strides_[i] = total_;
        total_ *= factors_[i].dim;
    }
}

bool BasisLayout::has(Factor f) const noexcept {
    for (const auto& e : factors_)
        if (e.label == f) return true;
    return false;
}

std::size_t BasisLayout::slot(Factor f) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
        if (factors_[i].label == f) return i;
    throw std::out_of_range("basis: no " + to_string(f) + " factor");
}

std::size_t BasisLayout::dim(Factor f) const {
    return has(f) ? factors_[slot(f)].dim : 1;
}

std::size_t BasisLayout::stride(Factor f) const {
    return has(f) ? strides_[slot(f)] : 0;
}

std::size_t BasisLayout::flat(const std::vector<std::size_t>& multi) const {
    if (multi.size() != factors_.size()) throw std::invalid_argument("basis: multi-index has wrong rank");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < multi.size(); ++i) {
        if (multi[i] >= factors_[i].dim) throw std::out_of_range("basis: digit out of range");
        idx += multi[i] * strides_[i];
    }
    return idx;
}

std::vector<std::size_t> BasisLayout::multi(std::size_t flat) const {
    if (flat >= total_) throw std::out_of_range("basis: flat index out of range");
    std::vector<std::size_t> out(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        out[i] = flat / strides_[i];
        flat %= strides_[i];
    }
    return out;
}

std::size_t BasisLayout::digit(std::size_t flat, Factor f) const {
    if (!has(f)) return 0;
    const std::size_t i = slot(f);
    return (flat / strides_[i]) % factors_[i].dim;
}

bool BasisLayout::operator==(const BasisLayout& other) const {
    if (factors_.size() != other.factors_.size()) return false;
    for (std::size_t i = 0; i < factors_.size(); ++i)
        if (factors_[i].label != other.factors_[i].label || factors_[i].dim != other.factors_[i].dim) return false;
    return true;
}

int minimal_cutoff(double alpha) {
    const double a = std::abs(alpha);
    return static_cast<int>(std::ceil(a * a + 8.0 * a));
}

CoherentAmplitudes coherent_state(const CoherentSpec& spec) {
    if (spec.n_max < 0) throw std::invalid_argument("coherent_state: negative n_max");
    const double a = std::abs(spec.alpha);
    RVector c = RVector::Zero(spec.n_max + 1);
    if (a == 0.0) {
        c(0) = 1.0;
        return {c, 1.0};
    }
    const double log_a = std::log(a);
    const double sign = spec.alpha < 0 ? -1.0 : 1.0;
    for (int n = 0; n <= spec.n_max; ++n) {
        const double lg = -0.5 * a * a + n * log_a - 0.5 * std::lgamma(n + 1.0);
        c(n) = std::exp(lg) * ((n % 2 == 1) ? sign : 1.0);
    }
    const double captured = c.squaredNorm();
    c /= std::sqrt(captured);
    return {c, captured};
}

BasisLayout build_basis(const ModelSpec& m) {
    validate(m);
    std::vector<BasisLayout::Entry> f;
    switch (m.family) {
    case Family::TwoLevel:
    case Family::RwaAea:
        f = {{Factor::Electron, 2},
             {Factor::Pump, static_cast<std::size_t>(m.pump_cutoff() + 1)},
             {Factor::Fluorescence, static_cast<std::size_t>(m.n_b_max + 1)}};
        break;
    case Family::ThreeLevelV1:
    case Family::ThreeLevelV2:
        f = {{Factor::Electron, 3},
             {Factor::Pump, static_cast<std::size_t>(m.pump_cutoff() + 1)},
             {Factor::Fluorescence, static_cast<std::size_t>(m.n_b_max + 1)}};
        break;
    case Family::Array:
        f = {{Factor::Electron, static_cast<std::size_t>(m.n_atoms + 1)},
             {Factor::Pump, static_cast<std::size_t>(m.pump_cutoff() + 1)},
             {Factor::Fluorescence, static_cast<std::size_t>(m.n_b_max + 1)}};
        break;
    case Family::Semiclassical:
        f = {{Factor::Electron, 2}, {Factor::Fluorescence, static_cast<std::size_t>(m.n_b_max + 1)}};
        break;
    case Family::MovingAtom:
        f = {{Factor::Electron, 2},
             {Factor::Position, static_cast<std::size_t>(m.grid_points)},
             {Factor::Pump, static_cast<std::size_t>(m.pump_cutoff() + 1)}};
        // n_b_max = 0 is the fluorescence-free H0 space.
        if (m.n_b_max > 0) f.push_back({Factor::Fluorescence, static_cast<std::size_t>(m.n_b_max + 1)});
        break;
    }
    return BasisLayout(std::move(f));
}

Wavepacket gaussian_wavepacket(const ModelSpec& m) {
    CVector phi(m.grid_points);
    for (int j = 0; j < m.grid_points; ++j) {
        const double x = m.grid_x(j);
        const double u = (x - m.x0) / m.sigma;
        phi(j) = std::exp(-u * u) * std::exp(I * (m.p0 * x));
    }
    phi /= phi.norm();
    // |phi|^2 is a normal density with standard deviation sigma/2.
    const double s = m.sigma / 2.0;
    const double left = 0.5 * std::erfc(m.x0 / (s * std::sqrt(2.0)));
    const double right = 0.5 * std::erfc((m.length - m.x0) / (s * std::sqrt(2.0)));
    return {phi, left + right};
}

StateVector initial_state(const ModelSpec& m) {
    StateVector psi{build_basis(m), {}};
    const auto& L = psi.layout;
    psi.amplitudes = CVector::Zero(static_cast<Eigen::Index>(L.total_dim()));

    // All-ground collective state for arrays is excitation count 0.
    const std::size_t e = static_cast<std::size_t>(m.family == Family::Array ? 0 : m.start_level);
    const std::size_t e_off = e * L.stride(Factor::Electron);

    RVector pump = RVector::Ones(1);
    if (L.has(Factor::Pump)) pump = coherent_state({m.alpha, m.pump_cutoff()}).amplitudes;

    CVector space = CVector::Ones(1);
    if (L.has(Factor::Position)) {
        auto wp = gaussian_wavepacket(m);
        if (wp.outside_mass > m.boundary_tolerance)
            throw std::invalid_argument("model.sigma: wavepacket mass outside [0, L] is " +
                                        std::to_string(wp.outside_mass) + ", above boundary_tolerance " +
                                        std::to_string(m.boundary_tolerance));
        space = wp.values;
    }

    const std::size_t sx = L.stride(Factor::Position);
    const std::size_t sa = L.stride(Factor::Pump);
    for (Eigen::Index j = 0; j < space.size(); ++j)
        for (Eigen::Index n = 0; n < pump.size(); ++n)
            psi.amplitudes(static_cast<Eigen::Index>(e_off + j * sx + n * sa)) = space(j) * pump(n);
    return psi;
}

} // namespace fluor
