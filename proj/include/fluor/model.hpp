// model.hpp — Declarative description of one model family plus its parameters

#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fluor {

enum class Family { TwoLevel, ThreeLevelV1, ThreeLevelV2, Array, MovingAtom, Semiclassical, RwaAea };
enum class Units { Epsilon, Atomic };

std::string to_string(Family f);
Family family_from_string(const std::string& s);
std::string to_string(Units u);
Units units_from_string(const std::string& s);

struct ModelSpec {
    Family family{Family::TwoLevel};
    Units units{Units::Epsilon};

    // epsilon_1, epsilon_2 (and epsilon_3 for three-level families)
    std::vector<double> levels{0.0, 1.0};
    // Array members' transition energies; empty means all equal to levels[1]-levels[0].
    std::vector<double> atom_frequencies;

    double omega_a{1.0};
    double omega_b{1.0};
    std::optional<double> g_a;
    double g_b{0.0};
    std::optional<double> f;
    double gamma{0.02};

    double alpha{0.0};
    int n_a_max{-1};   // -1: choose the minimal cutoff for alpha
    int n_b_max{10};
    bool allow_truncation_override{false};

    int n_atoms{1};

    // Moving atom, atomic units.
    double mass{10.0};
    double length{0.0};
    double x1{0.0};
    double x2{0.0};
    int grid_points{0};
    double x0{0.0};
    double sigma{0.0};
    double p0{0.0};
    double g1{0.0};
    double g2{0.0};
    double gamma1{0.0};
    double gamma2{0.0};
    double boundary_tolerance{0.02};

    int start_level{0};

    // Resolved pump cutoff (applies the automatic rule when n_a_max < 0).
    int pump_cutoff() const;
    double transition_energy() const { return levels.at(1) - levels.at(0); }
    double grid_spacing() const { return length / static_cast<double>(grid_points + 1); }
    double grid_x(int j) const { return (j + 1) * grid_spacing(); }
    bool inside_cavity(double x) const { return x >= x1 && x <= x2; }
    double cavity_profile(double x) const;  // sin(pi (x - x1)/l) inside, 0 outside

    bool operator==(const ModelSpec&) const = default;
};

// Throws std::invalid_argument naming the offending field and constraint.
void validate(const ModelSpec& spec);

nlohmann::json to_json(const ModelSpec& spec);
// Strict: unknown keys are rejected; missing keys keep defaults.
ModelSpec model_from_json(const nlohmann::json& j);
// Applies a partial override object onto an existing spec (strict keys).
ModelSpec apply_overrides(ModelSpec spec, const nlohmann::json& overrides);

} // namespace fluor
