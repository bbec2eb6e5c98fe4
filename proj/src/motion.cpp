// motion.cpp — Moving-atom eigenbasis, first-order spectrum, densities and Ehrenfest dynamics

#include "fluor/motion.hpp"
#include "fluor/dataset_io.hpp"
#include "fluor/parallel.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fluor {

namespace {

ModelSpec h0_spec(const ModelSpec& spec) {
    if (spec.family != Family::MovingAtom) throw std::invalid_argument("motion: moving-atom model required");
    ModelSpec s = spec;
    s.n_b_max = 0;
    return s;
}

int parity_sector(const BasisLayout& L, std::size_t i) {
    return static_cast<int>((L.digit(i, Factor::Electron) + L.digit(i, Factor::Pump)) % 2);
}

std::string sparse_bytes(const SparseC& h) {
    std::string bytes;
    auto put = [&bytes](const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); };
    const Eigen::Index rows = h.rows();
    put(&rows, sizeof rows);
    put(h.outerIndexPtr(), sizeof(int) * static_cast<std::size_t>(h.outerSize() + 1));
    put(h.innerIndexPtr(), sizeof(int) * static_cast<std::size_t>(h.nonZeros()));
    put(h.valuePtr(), sizeof(cplx) * static_cast<std::size_t>(h.nonZeros()));
    return bytes;
}

constexpr char kCacheMagic[8] = {'F', 'L', 'H', '0', 'D', 'E', 'C', '1'};

bool load_cache(const std::filesystem::path& p, const std::string& key, EigenDecomposition& d) {
    std::ifstream f(p, std::ios::binary);
    if (!f) return false;
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kCacheMagic, 8) != 0) return false;
    std::uint64_t klen = 0;
    f.read(reinterpret_cast<char*>(&klen), sizeof klen);
    std::string k(klen, '\0');
    f.read(k.data(), static_cast<std::streamsize>(klen));
    if (!f || k != key) return false;
    f.read(reinterpret_cast<char*>(&d.h_norm), sizeof d.h_norm);
    for (auto& s : d.sectors) {
        std::uint64_t n = 0;
        f.read(reinterpret_cast<char*>(&n), sizeof n);
        s.basis.resize(n);
        f.read(reinterpret_cast<char*>(s.basis.data()), static_cast<std::streamsize>(n * sizeof(Eigen::Index)));
        s.values.resize(static_cast<Eigen::Index>(n));
        f.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
        s.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        f.read(reinterpret_cast<char*>(s.vectors.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
    }
    return static_cast<bool>(f);
}

void store_cache(const std::filesystem::path& p, const std::string& key, const EigenDecomposition& d) {
    std::filesystem::create_directories(p.parent_path());
    const auto tmp = std::filesystem::path(p.string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f.write(kCacheMagic, 8);
        const std::uint64_t klen = key.size();
        f.write(reinterpret_cast<const char*>(&klen), sizeof klen);
        f.write(key.data(), static_cast<std::streamsize>(klen));
        f.write(reinterpret_cast<const char*>(&d.h_norm), sizeof d.h_norm);
        for (const auto& s : d.sectors) {
            const std::uint64_t n = s.basis.size();
            f.write(reinterpret_cast<const char*>(&n), sizeof n);
            f.write(reinterpret_cast<const char*>(s.basis.data()), static_cast<std::streamsize>(n * sizeof(Eigen::Index)));
            f.write(reinterpret_cast<const char*>(s.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
            f.write(reinterpret_cast<const char*>(s.vectors.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
        }
        if (!f) throw std::runtime_error("motion: failed to write cache " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

} // namespace

std::string h0_key(const ModelSpec& spec) {
    const OperatorMatrix H0 = build_moving_atom(h0_spec(spec), false);
    std::ostringstream lay;
    for (const auto& e : H0.layout.factors()) lay << to_string(e.label) << ':' << e.dim << ';';
    return sha256_hex(lay.str() + sparse_bytes(H0.static_part));
}

EigenDecomposition diagonalize_h0(const ModelSpec& spec, const DiagonalizeOptions& opt) {
    const ModelSpec s = h0_spec(spec);
    const OperatorMatrix H0 = build_moving_atom(s, false);
    const auto& L = H0.layout;
    if (L.total_dim() > opt.max_dim) {
        std::ostringstream msg;
        msg << "diagonalize_h0: dimension " << L.total_dim() << " exceeds the ceiling " << opt.max_dim
            << "; reduce grid_points or n_a_max (e.g. 250 points with n_a_max = 8)";
        throw std::invalid_argument(msg.str());
    }
    EigenDecomposition d;
    d.layout = L;
    d.key = h0_key(s);
    std::filesystem::path cache_file;
    if (opt.cache_dir) {
        cache_file = *opt.cache_dir / ("h0-" + d.key + ".bin");
        if (load_cache(cache_file, d.key, d)) {
            d.layout = L;
            return d;
        }
    }

    std::vector<Eigen::Index> local(L.total_dim());
    for (std::size_t i = 0; i < L.total_dim(); ++i) {
        auto& sec = d.sectors[static_cast<std::size_t>(parity_sector(L, i))];
        local[i] = static_cast<Eigen::Index>(sec.basis.size());
        sec.basis.push_back(static_cast<Eigen::Index>(i));
    }
    const SparseC& h = H0.static_part;
    double norm = 0.0;
    for (int r = 0; r < h.outerSize(); ++r) {
        double row = 0.0;
        for (SparseC::InnerIterator it(h, r); it; ++it) {
            if (it.value().imag() != 0.0) throw std::logic_error("diagonalize_h0: H0 is not real");
            if (parity_sector(L, static_cast<std::size_t>(it.row())) != parity_sector(L, static_cast<std::size_t>(it.col())))
                throw std::logic_error("diagonalize_h0: H0 couples parity sectors");
            row += std::abs(it.value());
        }
        norm = std::max(norm, row);
    }
    d.h_norm = norm;

    for (int sidx = 0; sidx < 2; ++sidx) {
        auto& sec = d.sectors[static_cast<std::size_t>(sidx)];
        const auto n = static_cast<lapack_int>(sec.basis.size());
        sec.vectors = RMatrix::Zero(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
            const Eigen::Index row = sec.basis[static_cast<std::size_t>(a)];
            for (SparseC::InnerIterator it(h, static_cast<int>(row)); it; ++it)
                sec.vectors(a, local[static_cast<std::size_t>(it.col())]) = it.value().real();
        }
        sec.values.resize(n);
        if (n > 0) {
            const lapack_int info =
                LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, sec.vectors.data(), n, sec.values.data());
            if (info != 0) throw std::runtime_error("diagonalize_h0: dsyevd failed with info " + std::to_string(info));
        }
    }
    if (opt.cache_dir) store_cache(cache_file, d.key, d);
    return d;
}

DecompositionCheck check_decomposition(const EigenDecomposition& d, const SparseC& h0) {
    DecompositionCheck c;
    const auto n = static_cast<Eigen::Index>(d.layout.total_dim());
    RVector weight = RVector::Zero(n);
    for (const auto& sec : d.sectors) {
        const auto m = static_cast<Eigen::Index>(sec.basis.size());
        for (Eigen::Index l = 0; l < m; ++l) {
            CVector v = CVector::Zero(n);
            for (Eigen::Index a = 0; a < m; ++a) v(sec.basis[static_cast<std::size_t>(a)]) = sec.vectors(a, l);
            CVector r = h0 * v - sec.values(l) * v;
            c.max_residual = std::max(c.max_residual, r.norm());
        }
        RMatrix g = sec.vectors.transpose() * sec.vectors - RMatrix::Identity(m, m);
        c.orthonormality = std::max(c.orthonormality, g.cwiseAbs().maxCoeff());
        for (Eigen::Index a = 0; a < m; ++a) weight(sec.basis[static_cast<std::size_t>(a)]) += sec.vectors.row(a).squaredNorm();
    }
    c.completeness = (weight.array() - 1.0).abs().maxCoeff();
    return c;
}

std::array<CVector, 2> expand_state(const EigenDecomposition& d, const CVector& psi) {
    if (psi.size() != static_cast<Eigen::Index>(d.layout.total_dim()))
        throw std::invalid_argument("expand_state: state does not live in the H0 space");
    std::array<CVector, 2> out;
    for (int s = 0; s < 2; ++s) {
        const auto& sec = d.sectors[static_cast<std::size_t>(s)];
        CVector local(static_cast<Eigen::Index>(sec.basis.size()));
        for (std::size_t a = 0; a < sec.basis.size(); ++a) local(static_cast<Eigen::Index>(a)) = psi(sec.basis[a]);
        out[static_cast<std::size_t>(s)] = sec.vectors.transpose().cast<cplx>() * local;
    }
    return out;
}

std::array<std::vector<Eigen::Index>, 2> support_of(const std::array<CVector, 2>& coeffs, double discard) {
    std::array<std::vector<Eigen::Index>, 2> out;
    for (int s = 0; s < 2; ++s) {
        const CVector& c = coeffs[static_cast<std::size_t>(s)];
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(c.size()));
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::norm(c(a)) > std::norm(c(b)); });
        double tail = c.squaredNorm();
        std::vector<Eigen::Index> keep;
        for (auto i : idx) {
            if (tail <= discard) break;
            keep.push_back(i);
            tail -= std::norm(c(i));
        }
        std::sort(keep.begin(), keep.end());
        out[static_cast<std::size_t>(s)] = std::move(keep);
    }
    return out;
}

SCoefficients s_coefficients(const EigenDecomposition& d, const ModelSpec& spec,
                             const std::array<std::vector<Eigen::Index>, 2>& support) {
    const auto& L = d.layout;
    const std::size_t se = L.stride(Factor::Electron);
    const std::size_t sx = L.stride(Factor::Position);
    SCoefficients out;
    for (int cs = 0; cs < 2; ++cs) {
        const int rs = 1 - cs;
        const auto& csec = d.sectors[static_cast<std::size_t>(cs)];
        const auto& rsec = d.sectors[static_cast<std::size_t>(rs)];
        SBlock& b = out.blocks[static_cast<std::size_t>(cs)];
        b.row_sector = rs;
        b.col_sector = cs;
        b.cols = support[static_cast<std::size_t>(cs)];
        if (b.cols.empty()) {
            b.cols.resize(static_cast<std::size_t>(csec.values.size()));
            std::iota(b.cols.begin(), b.cols.end(), 0);
        }
        const auto nr = static_cast<Eigen::Index>(rsec.basis.size());
        const auto nc = static_cast<Eigen::Index>(b.cols.size());

        std::vector<Eigen::Index> row_local(L.total_dim(), -1);
        for (std::size_t a = 0; a < rsec.basis.size(); ++a) row_local[static_cast<std::size_t>(rsec.basis[a])] = static_cast<Eigen::Index>(a);

        // W_k = sigma_x chi_k V restricted to the retained columns, in row-sector coordinates.
        RMatrix W1 = RMatrix::Zero(nr, nc), W2 = RMatrix::Zero(nr, nc);
        for (std::size_t a = 0; a < csec.basis.size(); ++a) {
            const auto i = static_cast<std::size_t>(csec.basis[a]);
            const std::size_t e = L.digit(i, Factor::Electron);
            const std::size_t flipped = i + (e == 0 ? se : 0) - (e == 1 ? se : 0);
            const Eigen::Index r = row_local[flipped];
            const double x = spec.grid_x(static_cast<int>((i / sx) % L.dim(Factor::Position)));
            RMatrix& W = spec.inside_cavity(x) ? W1 : W2;
            for (Eigen::Index c = 0; c < nc; ++c) W(r, c) = csec.vectors(static_cast<Eigen::Index>(a), b.cols[static_cast<std::size_t>(c)]);
        }
        b.S1 = spec.g1 * (rsec.vectors.transpose() * W1);
        b.S2 = spec.g2 * (rsec.vectors.transpose() * W2);
    }
    return out;
}

PerturbativeInput prepare_perturbative(const EigenDecomposition& d, const SCoefficients& S, const ModelSpec& spec,
                                       const CVector& psi0) {
    if (!(spec.gamma1 > 0.0 && spec.gamma2 > 0.0))
        throw std::invalid_argument("perturbative_spectrum: gamma1 and gamma2 must be positive");
    PerturbativeInput in;
    in.decomp = &d;
    in.S = &S;
    in.coeffs = expand_state(d, psi0);
    in.gamma1 = spec.gamma1;
    in.gamma2 = spec.gamma2;
    return in;
}

std::complex<double> phi1(std::complex<double> w) {
    if (std::abs(w) < 1e-4) return 1.0 + w * (0.5 + w * (1.0 / 6.0 + w * (1.0 / 24.0 + w / 120.0)));
    const double a = w.real(), b = w.imag(), s = std::sin(0.5 * b);
    const std::complex<double> em1(std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b));
    return em1 / w;
}

SpectrumDataset perturbative_spectrum(const PerturbativeInput& in, const std::vector<double>& times,
                                      const std::vector<double>& omega_grid, int workers) {
    const EigenDecomposition& d = *in.decomp;
    SpectrumDataset out;
    out.omega_grid = omega_grid;
    out.time_grid = times;
    out.P = RMatrix::Zero(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(omega_grid.size()));

    auto failures = parallel_for(omega_grid.size(), workers, [&](std::size_t w) {
        const double omega = omega_grid[w];
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double t = times[k];
            double total = 0.0;
            for (int cs = 0; cs < 2; ++cs) {
                const SBlock& b = in.S->blocks[static_cast<std::size_t>(cs)];
                const auto& rsec = d.sectors[static_cast<std::size_t>(b.row_sector)];
                const auto& csec = d.sectors[static_cast<std::size_t>(b.col_sector)];
                const CVector& c = in.coeffs[static_cast<std::size_t>(cs)];
                const auto nc = static_cast<Eigen::Index>(b.cols.size());
                for (Eigen::Index l = 0; l < rsec.values.size(); ++l) {
                    cplx amp = 0.0;
                    for (Eigen::Index j = 0; j < nc; ++j) {
                        const Eigen::Index lp = b.cols[static_cast<std::size_t>(j)];
                        const double delta = omega + rsec.values(l) - csec.values(lp);
                        const cplx z1(delta, in.gamma1), z2(delta, in.gamma2);
                        cplx d1, d2;
                        if (t < 0.0) {
                            d1 = -1.0 / z1;
                            d2 = -1.0 / z2;
                        } else {
                            // (e^{i z t} - 1)/z with the common phase of row l dropped.
                            d1 = I * t * phi1(I * z1 * t);
                            d2 = I * t * phi1(I * z2 * t);
                        }
                        amp += (d1 * b.S1(l, j) + d2 * b.S2(l, j)) * c(lp);
                    }
                    total += std::norm(amp);
                }
            }
            out.P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) = total;
        }
    });
    if (!failures.empty()) throw std::runtime_error("perturbative_spectrum: " + failures.front().message);
    out.metadata["method"] = "first-order eigenbasis";
    return out;
}

RVector nuclear_density(const StateVector& psi, const ModelSpec& spec) {
    const auto& L = psi.layout;
    if (!L.has(Factor::Position)) throw std::invalid_argument("nuclear_density: state has no position factor");
    const std::size_t np = L.dim(Factor::Position);
    const std::size_t sx = L.stride(Factor::Position);
    RVector n = RVector::Zero(static_cast<Eigen::Index>(np));
    for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i)
        n(static_cast<Eigen::Index>((static_cast<std::size_t>(i) / sx) % np)) += std::norm(psi.amplitudes(i));
    return n / spec.grid_spacing();
}

double wall_limited_time(const ModelSpec& s, double requested) {
    const double v = std::abs(s.p0) / s.mass;
    if (v == 0.0) return requested;
    const double room = s.p0 > 0 ? s.length - s.x0 - s.sigma : s.x0 - s.sigma;
    return std::min(requested, std::max(0.0, room / v));
}

DensityRun nuclear_density_run(const ModelSpec& spec, const std::vector<double>& times, const KrylovConfig& cfg) {
    ModelSpec s = spec;
    const OperatorMatrix H = build_moving_atom(s, s.n_b_max > 0);
    if (s.n_b_max < 1) s.n_b_max = 0;
    StateVector psi0 = initial_state(s);
    DensityRun run;
    Observer obs = [&](double, const StateVector& psi, Trajectory&) { run.density.push_back(nuclear_density(psi, spec)); };
    Trajectory tr = propagate(H, psi0, times, {obs}, cfg);
    tr.check_invariants(1e-9);
    run.times = tr.times;
    run.final_time = tr.times.back();
    const RVector& last = run.density.back();
    for (int j = 0; j < spec.grid_points; ++j) {
        const double x = spec.grid_x(j);
        if (x < spec.x1) run.reflected += last(j) * spec.grid_spacing();
        else if (x > spec.x2) run.transmitted += last(j) * spec.grid_spacing();
    }
    return run;
}

namespace {

struct QuantumPart {
    BasisLayout layout;
    SparseC static_part;
    SparseC qa;  // sigma_x (a + a^dagger)
    SparseC qb;  // sigma_x (b + b^dagger), empty without the mode
    bool has_b{false};
};

QuantumPart quantum_part(const ModelSpec& s, double omega_b) {
    QuantumPart q;
    std::vector<BasisLayout::Entry> f{{Factor::Electron, 2}, {Factor::Pump, static_cast<std::size_t>(s.pump_cutoff() + 1)}};
    q.has_b = s.n_b_max > 0;
    if (q.has_b) f.push_back({Factor::Fluorescence, static_cast<std::size_t>(s.n_b_max + 1)});
    q.layout = BasisLayout(f);
    const auto& L = q.layout;
    RVector lv(2);
    lv << s.levels[0], s.levels[1];
    SparseC sx(2, 2);
    sx.insert(0, 1) = 1.0;
    sx.insert(1, 0) = 1.0;
    q.static_part = embed(L, {{Factor::Electron, diagonal_operator(lv)}}) +
                    s.omega_a * embed(L, {{Factor::Pump, number_operator(L.dim(Factor::Pump))}});
    q.qa = embed(L, {{Factor::Electron, sx}, {Factor::Pump, quadrature_operator(L.dim(Factor::Pump))}});
    if (q.has_b) {
        q.static_part += omega_b * embed(L, {{Factor::Fluorescence, number_operator(L.dim(Factor::Fluorescence))}});
        q.qb = embed(L, {{Factor::Electron, sx}, {Factor::Fluorescence, quadrature_operator(L.dim(Factor::Fluorescence))}});
    }
    q.static_part.makeCompressed();
    return q;
}

double expect(const SparseC& op, const CVector& psi) {
    return psi.dot(op * psi).real();
}

} // namespace

constexpr int kEdgeRefinement = 256;

EhrenfestResult ehrenfest_evolve(const ModelSpec& spec, const std::vector<double>& t_grid, const EhrenfestOptions& opt) {
    validate(spec);
    opt.numerics.validate();
    if (spec.family != Family::MovingAtom) throw std::invalid_argument("ehrenfest: moving-atom model required");
    if (t_grid.empty() || t_grid.front() != 0.0) throw std::invalid_argument("ehrenfest: time grid must start at 0");

    const QuantumPart q = quantum_part(spec, opt.omega_b);
    CVector psi = CVector::Zero(static_cast<Eigen::Index>(q.layout.total_dim()));
    {
        const RVector c = coherent_state({spec.alpha, spec.pump_cutoff()}).amplitudes;
        const std::size_t sa = q.layout.stride(Factor::Pump);
        const std::size_t e0 = static_cast<std::size_t>(spec.start_level) * q.layout.stride(Factor::Electron);
        for (Eigen::Index n = 0; n < c.size(); ++n) psi(static_cast<Eigen::Index>(e0 + n * sa)) = c(n);
    }

    const double l = spec.x2 - spec.x1;
    const double gamma_out = opt.freeze_envelopes ? 0.0 : spec.gamma2;
    double x = spec.x0, p = spec.p0;
    std::optional<double> t0;

    auto pump_coupling = [&](double xx) { return *spec.g_a * spec.cavity_profile(xx); };
    auto pump_slope = [&](double xx) {
        if (!spec.inside_cavity(xx)) return 0.0;
        return *spec.g_a * std::numbers::pi / l * std::cos(std::numbers::pi * (xx - spec.x1) / l);
    };
    auto fluor_coupling = [&](double xx, double tt) {
        if (!q.has_b) return 0.0;
        if (spec.inside_cavity(xx)) return spec.g1;
        if (!t0) return spec.g2;
        return spec.g2 * std::exp(-gamma_out * std::max(0.0, tt - *t0));
    };
    auto force = [&](double xx) { return -pump_slope(xx) * expect(q.qa, psi); };
    auto quantum_energy = [&](double xx, double tt) {
        double e = expect(q.static_part, psi) + pump_coupling(xx) * expect(q.qa, psi);
        if (q.has_b) e += fluor_coupling(xx, tt) * expect(q.qb, psi);
        return e;
    };
    auto drift = [&](double h, double tt) {
        const double x_new = x + p / spec.mass * h;
        const bool was_in = spec.inside_cavity(x), now_in = spec.inside_cavity(x_new);
        if (q.has_b && was_in != now_in) {
            // Energy-conserving kick across the step in the fluorescence coupling.
            const double qb = expect(q.qb, psi);
            const double before = fluor_coupling(x, tt);
            const bool passes = !now_in && x_new > spec.x2;
            std::optional<double> t0_saved = t0;
            if (passes && !t0) t0 = tt;
            const double after = fluor_coupling(x_new, tt);
            const double ke = 0.5 * p * p / spec.mass - (after - before) * qb;
            if (ke < 0.0) {
                t0 = t0_saved;
                p = -p;
                return;
            }
            p = std::copysign(std::sqrt(2.0 * spec.mass * ke), p);
        }
        x = x_new;
        if (!t0 && x > spec.x2) t0 = tt;
    };

    EhrenfestResult r;
    auto record = [&](double t) {
        r.times.push_back(t);
        r.x.push_back(x);
        r.p.push_back(p);
        r.force.push_back(force(x));
        r.energy.push_back(0.5 * p * p / spec.mass + quantum_energy(x, t));
        double P = 0.0;
        if (q.has_b) {
            const std::size_t nb = q.layout.dim(Factor::Fluorescence);
            for (Eigen::Index i = 0; i < psi.size(); ++i)
                if (static_cast<std::size_t>(i) % nb != 0) P += std::norm(psi(i));
        }
        r.P.push_back(P);
    };
    record(0.0);

    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double ta = t_grid[k - 1];
        const int nsub = substep_count(t_grid[k] - ta, opt.numerics.dt);
        const double h = (t_grid[k] - ta) / nsub;
        auto step = [&](double t, double dt) {
            p += 0.5 * dt * force(x);
            drift(0.5 * dt, t + 0.5 * dt);
            const double ca = pump_coupling(x);
            const double cb = fluor_coupling(x, t + 0.5 * dt);
            TimedApply apply = [&](double, const CVector& in, CVector& out) {
                out.noalias() = q.static_part * in;
                if (ca != 0.0) out.noalias() += ca * (q.qa * in);
                if (cb != 0.0) out.noalias() += cb * (q.qb * in);
            };
            krylov_step(apply, psi, t, dt, opt.numerics);
            drift(0.5 * dt, t + dt);
            p += 0.5 * dt * force(x);
        };
        for (int i = 0; i < nsub; ++i) {
            const double t = ta + i * h;
            // The force has a kink at the cavity edges; steps across them are refined.
            const double reach = x + p / spec.mass * h;
            const bool crosses = (x - spec.x1) * (reach - spec.x1) <= 0.0 || (x - spec.x2) * (reach - spec.x2) <= 0.0;
            const int fine = crosses ? kEdgeRefinement : 1;
            for (int j = 0; j < fine; ++j) step(t + j * h / fine, h / fine);
            if (!r.exit_cavity && x > spec.x2) r.exit_cavity = t + h;
            if (x < 0.0 || x > spec.length) {
                r.exit_box = t + h;
                break;
            }
        }
        record(r.exit_box ? *r.exit_box : t_grid[k]);
        if (r.exit_box) break;
    }
    return r;
}

SpectrumDataset ehrenfest_spectrum(const ModelSpec& spec, const std::vector<double>& omega_grid,
                                   const std::vector<double>& t_grid, const KrylovConfig& numerics, int workers) {
    ModelSpec s = spec;
    if (s.n_b_max < 1) s.n_b_max = 1;
    SpectrumDataset d;
    d.omega_grid = omega_grid;
    d.time_grid = t_grid;
    d.P = RMatrix::Zero(static_cast<Eigen::Index>(t_grid.size()), static_cast<Eigen::Index>(omega_grid.size()));
    std::vector<double> exits(omega_grid.size(), t_grid.back());
    auto failures = parallel_for(omega_grid.size(), workers, [&](std::size_t w) {
        EhrenfestOptions o;
        o.numerics = numerics;
        o.omega_b = omega_grid[w];
        const auto r = ehrenfest_evolve(s, t_grid, o);
        // Rows after the atom leaves the box hold the value at the exit time.
        for (std::size_t k = 0; k < t_grid.size(); ++k)
            d.P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) = r.P[std::min(k, r.P.size() - 1)];
        if (r.exit_box) exits[w] = *r.exit_box;
    });
    if (!failures.empty()) throw std::runtime_error("ehrenfest_spectrum: " + failures.front().message);
    d.metadata["method"] = "ehrenfest";
    d.metadata["exit_time_min"] = *std::min_element(exits.begin(), exits.end());
    return d;
}

ModelSpec rescale(const ModelSpec& spec, double Z) {
    if (!(Z > 0.0)) throw std::invalid_argument("rescale: Z must be positive");
    ModelSpec s = spec;
    for (double& e : s.levels) e /= Z;
    for (double& e : s.atom_frequencies) e /= Z;
    s.omega_a /= Z;
    s.omega_b /= Z;
    if (s.g_a) *s.g_a /= Z;
    if (s.f) *s.f /= Z;
    s.g_b /= Z;
    s.gamma /= Z;
    s.g1 /= Z;
    s.g2 /= Z;
    s.gamma1 /= Z;
    s.gamma2 /= Z;
    s.mass *= Z;
    return s;
}

} // namespace fluor
