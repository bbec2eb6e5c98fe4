// hamiltonian.cpp — Operator assembly and H(t) evaluation

#include "fluor/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

namespace fluor {

double Envelope::value(double t) const {
    double v = amplitude;
    if (decay_rate != 0.0) v *= std::exp(-decay_rate * t);
    if (frequency != 0.0) v *= std::cos(frequency * t);
    return v;
}

std::vector<double> OperatorMatrix::coefficients(double t) const {
    std::vector<double> c(terms.size());
    for (std::size_t k = 0; k < terms.size(); ++k) c[k] = terms[k].envelope.value(t);
    return c;
}

SparseC OperatorMatrix::evaluate(double t) const {
    SparseC h = static_part;
    for (const auto& term : terms) h += term.envelope.value(t) * term.matrix;
    h.makeCompressed();
    return h;
}

void OperatorMatrix::apply(double t, const CVector& x, CVector& y) const {
    apply_with(coefficients(t), x, y);
}

void OperatorMatrix::apply_with(const std::vector<double>& coeffs, const CVector& x, CVector& y) const {
    y.noalias() = static_part * x;
    for (std::size_t k = 0; k < terms.size(); ++k)
        if (coeffs[k] != 0.0) y.noalias() += coeffs[k] * (terms[k].matrix * x);
}

double max_abs(const SparseC& a) {
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseC::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

namespace {

double adjoint_defect(const SparseC& a) {
    SparseC d = a - SparseC(a.adjoint());
    return max_abs(d);
}

SparseC from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& t) {
    SparseC m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

SparseC transition(std::size_t dim, std::size_t i, std::size_t j) {
    // |i><j| + |j><i|
    return from_triplets(dim, dim, {{static_cast<int>(i), static_cast<int>(j), 1.0},
                                    {static_cast<int>(j), static_cast<int>(i), 1.0}});
}

RVector level_diagonal(const std::vector<double>& levels) {
    RVector d(static_cast<Eigen::Index>(levels.size()));
    for (std::size_t i = 0; i < levels.size(); ++i) d(static_cast<Eigen::Index>(i)) = levels[i];
    return d;
}

} // namespace

double OperatorMatrix::hermiticity_defect() const {
    double d = adjoint_defect(static_part);
    for (const auto& term : terms) d = std::max(d, adjoint_defect(term.matrix));
    return d;
}

double OperatorMatrix::norm_bound(double t) const {
    SparseC h = evaluate(t);
    double best = 0.0;
    for (int k = 0; k < h.outerSize(); ++k) {
        double row = 0.0;
        for (SparseC::InnerIterator it(h, k); it; ++it) row += std::abs(it.value());
        best = std::max(best, row);
    }
    return best;
}

SparseC identity_operator(std::size_t dim) {
    SparseC m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setIdentity();
    return m;
}

SparseC diagonal_operator(const RVector& d) {
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d(i) != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d(i));
    return from_triplets(static_cast<std::size_t>(d.size()), static_cast<std::size_t>(d.size()), t);
}

SparseC number_operator(std::size_t dim) {
    return diagonal_operator(RVector::LinSpaced(static_cast<Eigen::Index>(dim), 0.0, static_cast<double>(dim) - 1.0));
}

SparseC annihilation_operator(std::size_t dim) {
    std::vector<Triplet> t;
    for (std::size_t n = 1; n < dim; ++n)
        t.emplace_back(static_cast<int>(n - 1), static_cast<int>(n), std::sqrt(static_cast<double>(n)));
    return from_triplets(dim, dim, t);
}

SparseC quadrature_operator(std::size_t dim) {
    SparseC a = annihilation_operator(dim);
    SparseC q = a + SparseC(a.adjoint());
    q.makeCompressed();
    return q;
}

SparseC kron(const SparseC& a, const SparseC& b) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (int i = 0; i < a.outerSize(); ++i)
        for (SparseC::InnerIterator ia(a, i); ia; ++ia)
            for (int j = 0; j < b.outerSize(); ++j)
                for (SparseC::InnerIterator ib(b, j); ib; ++ib)
                    t.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                                   static_cast<int>(ia.col() * b.cols() + ib.col()), ia.value() * ib.value());
    return from_triplets(static_cast<std::size_t>(a.rows() * b.rows()), static_cast<std::size_t>(a.cols() * b.cols()), t);
}

SparseC embed(const BasisLayout& layout, const std::vector<std::pair<Factor, SparseC>>& parts) {
    for (const auto& [f, m] : parts)
        if (!layout.has(f)) throw std::invalid_argument("embed: layout has no " + to_string(f) + " factor");
    SparseC out = identity_operator(1);
    for (const auto& e : layout.factors()) {
        const SparseC* piece = nullptr;
        for (const auto& [f, m] : parts)
            if (f == e.label) piece = &m;
        if (piece && static_cast<std::size_t>(piece->rows()) != e.dim)
            throw std::invalid_argument("embed: operator size mismatch on " + to_string(e.label));
        out = kron(out, piece ? *piece : identity_operator(e.dim));
    }
    return out;
}

SparseC spin_z(int n_atoms) {
    RVector d(n_atoms + 1);
    for (int k = 0; k <= n_atoms; ++k) d(k) = k - 0.5 * n_atoms;
    return diagonal_operator(d);
}

SparseC spin_x(int n_atoms) {
    const double s = 0.5 * n_atoms;
    std::vector<Triplet> t;
    for (int k = 0; k < n_atoms; ++k) {
        const double m = k - s;
        const double v = 0.5 * std::sqrt(s * (s + 1.0) - m * (m + 1.0));
        t.emplace_back(k + 1, k, v);
        t.emplace_back(k, k + 1, v);
    }
    return from_triplets(static_cast<std::size_t>(n_atoms + 1), static_cast<std::size_t>(n_atoms + 1), t);
}

SparseC kinetic_operator(int grid_points, double dx, double mass) {
    const double c = 1.0 / (2.0 * mass * dx * dx);
    std::vector<Triplet> t;
    for (int j = 0; j < grid_points; ++j) {
        t.emplace_back(j, j, 2.0 * c);
        if (j + 1 < grid_points) {
            t.emplace_back(j, j + 1, -c);
            t.emplace_back(j + 1, j, -c);
        }
    }
    return from_triplets(static_cast<std::size_t>(grid_points), static_cast<std::size_t>(grid_points), t);
}

namespace {

void require_family(const ModelSpec& s, std::initializer_list<Family> ok, const char* who) {
    for (Family f : ok)
        if (s.family == f) return;
    throw std::invalid_argument(std::string(who) + ": unsupported family " + to_string(s.family));
}

SparseC fluorescence_number(const BasisLayout& L) {
    return embed(L, {{Factor::Fluorescence, number_operator(L.dim(Factor::Fluorescence))}});
}

SparseC pump_number(const BasisLayout& L) {
    return embed(L, {{Factor::Pump, number_operator(L.dim(Factor::Pump))}});
}

} // namespace

OperatorMatrix build_two_level(const ModelSpec& s) {
    require_family(s, {Family::TwoLevel}, "build_two_level");
    OperatorMatrix H;
    H.layout = build_basis(s);
    const auto& L = H.layout;
    const SparseC sx = transition(2, 0, 1);
    H.static_part = embed(L, {{Factor::Electron, diagonal_operator(level_diagonal(s.levels))}}) +
                    s.omega_a * pump_number(L) + s.omega_b * fluorescence_number(L) +
                    *s.g_a * embed(L, {{Factor::Electron, sx}, {Factor::Pump, quadrature_operator(L.dim(Factor::Pump))}});
    H.static_part.makeCompressed();
    H.terms.push_back({"fluorescence",
                       embed(L, {{Factor::Electron, sx}, {Factor::Fluorescence, quadrature_operator(L.dim(Factor::Fluorescence))}}),
                       {s.g_b, s.gamma, 0.0}});
    return H;
}

OperatorMatrix build_three_level(const ModelSpec& s) {
    require_family(s, {Family::ThreeLevelV1, Family::ThreeLevelV2}, "build_three_level");
    if (s.family == Family::ThreeLevelV2 && !s.g_a) throw std::invalid_argument("model.g_a: required for three-level-v2");
    OperatorMatrix H;
    H.layout = build_basis(s);
    const auto& L = H.layout;
    const SparseC qa = quadrature_operator(L.dim(Factor::Pump));
    const SparseC ladder = transition(3, 0, 1) + transition(3, 1, 2);
    H.static_part = embed(L, {{Factor::Electron, diagonal_operator(level_diagonal(s.levels))}}) +
                    s.omega_a * pump_number(L) + s.omega_b * fluorescence_number(L) +
                    *s.f * embed(L, {{Factor::Electron, ladder}, {Factor::Pump, qa}});
    if (s.family == Family::ThreeLevelV2)
        H.static_part += *s.g_a * embed(L, {{Factor::Electron, transition(3, 0, 2)}, {Factor::Pump, qa}});
    H.static_part.makeCompressed();
    H.terms.push_back({"fluorescence",
                       embed(L, {{Factor::Electron, transition(3, 0, 2)},
                                 {Factor::Fluorescence, quadrature_operator(L.dim(Factor::Fluorescence))}}),
                       {s.g_b, s.gamma, 0.0}});
    return H;
}

OperatorMatrix build_array(const ModelSpec& s) {
    require_family(s, {Family::Array}, "build_array");
    OperatorMatrix H;
    H.layout = build_basis(s);
    const auto& L = H.layout;
    const SparseC sx2 = 2.0 * spin_x(s.n_atoms);
    H.static_part = s.transition_energy() * embed(L, {{Factor::Electron, spin_z(s.n_atoms)}}) +
                    s.omega_a * pump_number(L) + s.omega_b * fluorescence_number(L) +
                    *s.g_a * embed(L, {{Factor::Electron, sx2}, {Factor::Pump, quadrature_operator(L.dim(Factor::Pump))}});
    H.static_part.makeCompressed();
    H.terms.push_back({"fluorescence",
                       embed(L, {{Factor::Electron, sx2},
                                 {Factor::Fluorescence, quadrature_operator(L.dim(Factor::Fluorescence))}}),
                       {s.g_b, s.gamma, 0.0}});
    return H;
}

OperatorMatrix build_moving_atom(const ModelSpec& spec, bool include_fluorescence) {
    require_family(spec, {Family::MovingAtom}, "build_moving_atom");
    ModelSpec s = spec;
    if (!include_fluorescence) s.n_b_max = 0;
    else if (s.n_b_max < 1) s.n_b_max = 1;
    OperatorMatrix H;
    H.layout = build_basis(s);
    const auto& L = H.layout;

    RVector profile(s.grid_points), inside(s.grid_points), outside(s.grid_points);
    for (int j = 0; j < s.grid_points; ++j) {
        const double x = s.grid_x(j);
        profile(j) = s.cavity_profile(x);
        inside(j) = s.inside_cavity(x) ? 1.0 : 0.0;
        outside(j) = 1.0 - inside(j);
    }
    const SparseC sx = transition(2, 0, 1);
    H.static_part = embed(L, {{Factor::Electron, diagonal_operator(level_diagonal(s.levels))}}) +
                    embed(L, {{Factor::Position, kinetic_operator(s.grid_points, s.grid_spacing(), s.mass)}}) +
                    s.omega_a * pump_number(L) +
                    *s.g_a * embed(L, {{Factor::Electron, sx},
                                       {Factor::Position, diagonal_operator(profile)},
                                       {Factor::Pump, quadrature_operator(L.dim(Factor::Pump))}});
    if (include_fluorescence) {
        H.static_part += s.omega_b * fluorescence_number(L);
        const SparseC qb = quadrature_operator(L.dim(Factor::Fluorescence));
        H.terms.push_back({"fluorescence-inside",
                           embed(L, {{Factor::Electron, sx}, {Factor::Position, diagonal_operator(inside)}, {Factor::Fluorescence, qb}}),
                           {s.g1, s.gamma1, 0.0}});
        H.terms.push_back({"fluorescence-outside",
                           embed(L, {{Factor::Electron, sx}, {Factor::Position, diagonal_operator(outside)}, {Factor::Fluorescence, qb}}),
                           {s.g2, s.gamma2, 0.0}});
    }
    H.static_part.makeCompressed();
    return H;
}

OperatorMatrix build_semiclassical(const ModelSpec& s) {
    require_family(s, {Family::Semiclassical}, "build_semiclassical");
    OperatorMatrix H;
    H.layout = build_basis(s);
    const auto& L = H.layout;
    const SparseC sx = transition(2, 0, 1);
    H.static_part = embed(L, {{Factor::Electron, diagonal_operator(level_diagonal(s.levels))}}) +
                    s.omega_b * fluorescence_number(L);
    H.static_part.makeCompressed();
    H.terms.push_back({"drive", embed(L, {{Factor::Electron, sx}}), {2.0 * *s.g_a * s.alpha, 0.0, s.omega_a}});
    H.terms.push_back({"fluorescence",
                       embed(L, {{Factor::Electron, sx}, {Factor::Fluorescence, quadrature_operator(L.dim(Factor::Fluorescence))}}),
                       {s.g_b, s.gamma, 0.0}});
    return H;
}

OperatorMatrix build_rwa_aea(const ModelSpec& s) {
    require_family(s, {Family::RwaAea}, "build_rwa_aea");
    OperatorMatrix H;
    H.layout = build_basis(s);
    const auto& L = H.layout;
    const double half_gap = 0.5 * (s.levels[2] - s.levels[0]);
    RVector e(2);
    e << -half_gap, half_gap;
    // Electron index 0 is level 1, index 1 is level 3.
    const SparseC raise = from_triplets(2, 2, {{1, 0, 1.0}});
    const SparseC a = annihilation_operator(L.dim(Factor::Pump));
    const SparseC b = annihilation_operator(L.dim(Factor::Fluorescence));
    SparseC pump = *s.f * embed(L, {{Factor::Electron, raise}, {Factor::Pump, SparseC(a * a)}});
    SparseC fl = embed(L, {{Factor::Electron, raise}, {Factor::Fluorescence, b}});
    H.static_part = embed(L, {{Factor::Electron, diagonal_operator(e)}}) + s.omega_a * pump_number(L) +
                    s.omega_b * fluorescence_number(L) + pump + SparseC(pump.adjoint());
    H.static_part.makeCompressed();
    SparseC flh = fl + SparseC(fl.adjoint());
    flh.makeCompressed();
    H.terms.push_back({"fluorescence", flh, {s.g_b, s.gamma, 0.0}});
    return H;
}

OperatorMatrix build_hamiltonian(const ModelSpec& s) {
    switch (s.family) {
    case Family::TwoLevel: return build_two_level(s);
    case Family::ThreeLevelV1:
    case Family::ThreeLevelV2: return build_three_level(s);
    case Family::Array: return build_array(s);
    case Family::MovingAtom: return build_moving_atom(s, s.n_b_max > 0);
    case Family::Semiclassical: return build_semiclassical(s);
    case Family::RwaAea: return build_rwa_aea(s);
    }
    throw std::invalid_argument("build_hamiltonian: unknown family");
}

} // namespace fluor
