// propagator.hpp — Short iterated Lanczos propagation

#pragma once

#include "fluor/fock.hpp"
#include "fluor/hamiltonian.hpp"
#include "fluor/types.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fluor {

struct KrylovConfig {
    int krylov_dim{12};
    double dt{0.05};
    double step_tolerance{1e-10};
    bool midpoint_rule{true};
    int max_halvings{20};

    void validate() const;
};

nlohmann::json to_json(const KrylovConfig& cfg);
KrylovConfig krylov_from_json(const nlohmann::json& j, KrylovConfig base = {});

// y <- H(t) x
using TimedApply = std::function<void(double t, const CVector& x, CVector& y)>;

struct StepReport {
    int substeps{0};
    int max_depth{0};
    double max_residual{0.0};
};

// psi <- exp(-i H dt) psi for a fixed generator, one Lanczos pass.
// Returns the a-posteriori residual estimate.
double lanczos_exp(const std::function<void(const CVector&, CVector&)>& apply, CVector& psi, double dt, int krylov_dim);

// One step of length dt starting at t, envelopes taken at t + dt/2 under the
// midpoint rule. Halves the step while the residual exceeds the tolerance.
void krylov_step(const TimedApply& H, CVector& psi, double t, double dt, const KrylovConfig& cfg,
                 StepReport* report = nullptr);
void krylov_step(const OperatorMatrix& H, CVector& psi, double t, double dt, const KrylovConfig& cfg,
                 StepReport* report = nullptr);

struct Trajectory {
    std::vector<double> times;
    std::vector<double> norms;
    std::map<std::string, std::vector<double>> series;
    std::map<std::string, std::vector<RVector>> snapshots;

    void check_invariants(double norm_tol = 1e-10) const;
};

using Observer = std::function<void(double t, const StateVector& psi, Trajectory& out)>;

// Evolves psi0 through every time in t_grid (t_grid[0] must be 0), calling
// each observer at each grid time. Sub-steps between grid times are equal and
// no longer than cfg.dt. The final state is left in psi_final when given.
Trajectory propagate(const OperatorMatrix& H, const StateVector& psi0, const std::vector<double>& t_grid,
                     const std::vector<Observer>& observers, const KrylovConfig& cfg,
                     StateVector* psi_final = nullptr);

// Number of equal sub-steps used to cover an interval of length span.
int substep_count(double span, double dt);

} // namespace fluor
