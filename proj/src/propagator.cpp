// propagator.cpp — Lanczos exponential stepper and trajectory driver

#include "fluor/propagator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fluor {

void KrylovConfig::validate() const {
    if (krylov_dim < 2 || krylov_dim > 64)
        throw std::invalid_argument("numerics.krylov_dim: must lie in [2, 64]");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("numerics.dt: must be positive");
    if (!(step_tolerance > 0.0)) throw std::invalid_argument("numerics.step_tolerance: must be positive");
    if (max_halvings < 0) throw std::invalid_argument("numerics.max_halvings: must be nonnegative");
}

nlohmann::json to_json(const KrylovConfig& c) {
    return {{"krylov_dim", c.krylov_dim},
            {"dt", c.dt},
            {"step_tolerance", c.step_tolerance},
            {"midpoint_rule", c.midpoint_rule},
            {"max_halvings", c.max_halvings}};
}

KrylovConfig krylov_from_json(const nlohmann::json& j, KrylovConfig c) {
    if (!j.is_object()) throw std::invalid_argument("numerics: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k == "krylov_dim") c.krylov_dim = it.value().get<int>();
        else if (k == "dt") c.dt = it.value().get<double>();
        else if (k == "step_tolerance") c.step_tolerance = it.value().get<double>();
        else if (k == "midpoint_rule") c.midpoint_rule = it.value().get<bool>();
        else if (k == "max_halvings") c.max_halvings = it.value().get<int>();
        else throw std::invalid_argument("numerics: unknown key '" + k + "'");
    }
    c.validate();
    return c;
}

double lanczos_exp(const std::function<void(const CVector&, CVector&)>& apply, CVector& psi, double dt,
                   int krylov_dim) {
    const Eigen::Index n = psi.size();
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return 0.0;
    const int m_max = static_cast<int>(std::min<Eigen::Index>(krylov_dim, n));

    CMatrix V(n, m_max);
    std::vector<double> alpha, beta;
    V.col(0) = psi / beta0;
    CVector w(n);
    double tail = 0.0;  // beta_m after the last vector
    int m = 0;
    for (int j = 0; j < m_max; ++j) {
        apply(V.col(j), w);
        const double a = V.col(j).dot(w).real();
        alpha.push_back(a);
        // Full reorthogonalization, two passes.
        for (int pass = 0; pass < 2; ++pass) {
            CVector h = V.leftCols(j + 1).adjoint() * w;
            w.noalias() -= V.leftCols(j + 1) * h;
        }
        const double b = w.norm();
        m = j + 1;
        const double scale = std::abs(a) + (j > 0 ? beta[j - 1] : 0.0) + 1.0;
        if (b <= 1e-14 * scale) {
            tail = 0.0;
            break;
        }
        if (j + 1 < m_max) {
            beta.push_back(b);
            V.col(j + 1) = w / b;
        } else {
            tail = b;
        }
    }

    RMatrix T = RMatrix::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(T);
    const RMatrix& Q = es.eigenvectors();
    CVector phase(m);
    for (int k = 0; k < m; ++k) phase(k) = std::exp(-I * (es.eigenvalues()(k) * dt)) * Q(0, k);
    CVector c = Q.cast<cplx>() * phase;

    psi.noalias() = beta0 * (V.leftCols(m) * c);
    return tail * std::abs(c(m - 1)) * beta0;
}

namespace {

void step_recursive(const TimedApply& H, CVector& psi, double t, double dt, const KrylovConfig& cfg, int depth,
                    StepReport& rep) {
    const double te = cfg.midpoint_rule ? t + 0.5 * dt : t;
    CVector trial = psi;
    const double res = lanczos_exp([&](const CVector& x, CVector& y) { H(te, x, y); }, trial, dt, cfg.krylov_dim);
    if (res <= cfg.step_tolerance) {
        psi.swap(trial);
        rep.substeps += 1;
        rep.max_depth = std::max(rep.max_depth, depth);
        rep.max_residual = std::max(rep.max_residual, res);
        return;
    }
    if (depth >= cfg.max_halvings) {
        std::ostringstream msg;
        msg << "krylov_step: residual " << res << " above tolerance " << cfg.step_tolerance << " after "
            << depth << " halvings at t = " << t;
        throw std::runtime_error(msg.str());
    }
    step_recursive(H, psi, t, 0.5 * dt, cfg, depth + 1, rep);
    step_recursive(H, psi, t + 0.5 * dt, 0.5 * dt, cfg, depth + 1, rep);
}

} // namespace

void krylov_step(const TimedApply& H, CVector& psi, double t, double dt, const KrylovConfig& cfg, StepReport* report) {
    StepReport local;
    step_recursive(H, psi, t, dt, cfg, 0, report ? *report : local);
}

void krylov_step(const OperatorMatrix& H, CVector& psi, double t, double dt, const KrylovConfig& cfg,
                 StepReport* report) {
    krylov_step([&H](double te, const CVector& x, CVector& y) { H.apply(te, x, y); }, psi, t, dt, cfg, report);
}

int substep_count(double span, double dt) {
    return std::max(1, static_cast<int>(std::ceil(span / dt * (1.0 - 1e-9))));
}

void Trajectory::check_invariants(double norm_tol) const {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::logic_error("trajectory: times not strictly increasing");
    for (std::size_t i = 0; i < norms.size(); ++i)
        if (std::abs(norms[i] - 1.0) > norm_tol) {
            std::ostringstream msg;
            msg << "trajectory: norm " << norms[i] << " at t = " << times[i] << " deviates from 1";
            throw std::logic_error(msg.str());
        }
}

Trajectory propagate(const OperatorMatrix& H, const StateVector& psi0, const std::vector<double>& t_grid,
                     const std::vector<Observer>& observers, const KrylovConfig& cfg, StateVector* psi_final) {
    cfg.validate();
    if (t_grid.empty() || t_grid.front() != 0.0) throw std::invalid_argument("propagate: time grid must start at 0");
    if (!(psi0.layout == H.layout)) throw std::invalid_argument("propagate: state and operator layouts differ");
    StateVector psi = psi0;
    Trajectory out;
    auto record = [&](double t) {
        out.times.push_back(t);
        out.norms.push_back(psi.norm());
        for (const auto& obs : observers) obs(t, psi, out);
    };
    record(0.0);
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double t0 = t_grid[k - 1];
        const double span = t_grid[k] - t0;
        if (!(span > 0.0)) throw std::invalid_argument("propagate: time grid must be strictly increasing");
        const int nsub = substep_count(span, cfg.dt);
        const double h = span / nsub;
        for (int i = 0; i < nsub; ++i) {
            try {
                krylov_step(H, psi.amplitudes, t0 + i * h, h, cfg);
            } catch (const std::runtime_error& e) {
                std::ostringstream msg;
                msg << e.what() << " (propagating towards t = " << t_grid[k] << ")";
                throw std::runtime_error(msg.str());
            }
        }
        record(t_grid[k]);
    }
    if (psi_final) *psi_final = std::move(psi);
    return out;
}

} // namespace fluor
