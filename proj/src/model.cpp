// model.cpp — ModelSpec validation and JSON mapping

#include "fluor/model.hpp"
#include "fluor/fock.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace fluor {

namespace {

struct FamilyName {
    Family family;
    const char* name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::TwoLevel, "two-level"},
    {Family::ThreeLevelV1, "three-level-v1"},
    {Family::ThreeLevelV2, "three-level-v2"},
    {Family::Array, "array"},
    {Family::MovingAtom, "moving-atom"},
    {Family::Semiclassical, "semiclassical"},
    {Family::RwaAea, "rwa-aea"},
};

[[noreturn]] void reject(const std::string& key, const std::string& rule) {
    throw std::invalid_argument("model." + key + ": " + rule);
}

void require_nonnegative(const std::string& key, double v) {
    if (!std::isfinite(v) || v < 0.0) reject(key, "must be finite and nonnegative (got " + std::to_string(v) + ")");
}

void require_positive(const std::string& key, double v) {
    if (!std::isfinite(v) || v <= 0.0) reject(key, "must be finite and positive (got " + std::to_string(v) + ")");
}

bool uses_pump_field(Family f) {
    return f != Family::Semiclassical;
}

std::size_t expected_levels(Family f) {
    switch (f) {
    case Family::ThreeLevelV1:
    case Family::ThreeLevelV2:
    case Family::RwaAea:
        return 3;
    default:
        return 2;
    }
}

} // namespace

std::string to_string(Family f) {
    for (const auto& e : kFamilyNames)
        if (e.family == f) return e.name;
    return "unknown";
}

Family family_from_string(const std::string& s) {
    for (const auto& e : kFamilyNames)
        if (s == e.name) return e.family;
    reject("family", "unknown model family '" + s + "'");
}

std::string to_string(Units u) {
    return u == Units::Epsilon ? "epsilon" : "atomic";
}

Units units_from_string(const std::string& s) {
    if (s == "epsilon") return Units::Epsilon;
    if (s == "atomic") return Units::Atomic;
    reject("units", "must be 'epsilon' or 'atomic' (got '" + s + "')");
}

int ModelSpec::pump_cutoff() const {
    return n_a_max >= 0 ? n_a_max : minimal_cutoff(alpha);
}

double ModelSpec::cavity_profile(double x) const {
    if (!inside_cavity(x)) return 0.0;
    return std::sin(std::numbers::pi * (x - x1) / (x2 - x1));
}

void validate(const ModelSpec& s) {
    if (s.levels.size() != expected_levels(s.family))
        reject("levels", "family " + to_string(s.family) + " needs " +
                             std::to_string(expected_levels(s.family)) + " level energies");
    for (double e : s.levels)
        if (!std::isfinite(e)) reject("levels", "energies must be finite");
    if (s.levels[1] <= s.levels[0]) reject("levels", "epsilon_2 must exceed epsilon_1");
    if (s.levels.size() == 3 && s.levels[2] <= s.levels[0]) reject("levels", "epsilon_3 must exceed epsilon_1");

    require_positive("omega_b", s.omega_b);
    if (uses_pump_field(s.family) || s.family == Family::Semiclassical) require_positive("omega_a", s.omega_a);
    require_nonnegative("g_b", s.g_b);
    require_nonnegative("gamma", s.gamma);
    if (!std::isfinite(s.alpha)) reject("alpha", "must be finite");

    const bool needs_ga = s.family == Family::TwoLevel || s.family == Family::Array ||
                          s.family == Family::MovingAtom || s.family == Family::Semiclassical ||
                          s.family == Family::ThreeLevelV2;
    if (needs_ga && !s.g_a) reject("g_a", "required for family " + to_string(s.family));
    if (s.g_a) require_nonnegative("g_a", *s.g_a);
    const bool needs_f = s.family == Family::ThreeLevelV1 || s.family == Family::ThreeLevelV2 ||
                         s.family == Family::RwaAea;
    if (needs_f && !s.f) reject("f", "required for family " + to_string(s.family));
    if (s.f) require_nonnegative("f", *s.f);

    if (uses_pump_field(s.family)) {
        if (s.n_a_max >= 0 && s.n_a_max < minimal_cutoff(s.alpha) && !s.allow_truncation_override)
            reject("n_a_max", "cutoff " + std::to_string(s.n_a_max) + " is below ceil(|alpha|^2 + 8|alpha|) = " +
                                  std::to_string(minimal_cutoff(s.alpha)) +
                                  "; set allow_truncation_override to accept it");
        if (s.pump_cutoff() > 400) reject("n_a_max", "cutoff above 400 is not supported");
    }
    if (s.family != Family::MovingAtom && s.n_b_max < 1)
        reject("n_b_max", "must be at least 1");
    if (s.n_b_max < 0) reject("n_b_max", "must be nonnegative");

    if (s.start_level < 0 || static_cast<std::size_t>(s.start_level) >= s.levels.size())
        reject("start_level", "must index one of the electron levels");

    if (s.family == Family::Array) {
        if (s.n_atoms < 1) reject("n_atoms", "must be at least 1");
        if (!s.atom_frequencies.empty()) {
            if (s.atom_frequencies.size() != static_cast<std::size_t>(s.n_atoms))
                reject("atom_frequencies", "must list one frequency per atom");
            for (double w : s.atom_frequencies)
                if (std::abs(w - s.atom_frequencies.front()) > 0.0)
                    reject("atom_frequencies", "unequal transition energies are not supported (collective-spin basis)");
            if (std::abs(s.atom_frequencies.front() - s.transition_energy()) > 1e-15)
                reject("atom_frequencies", "must equal levels[1] - levels[0]");
        }
    }

    if (s.family == Family::MovingAtom) {
        if (s.units != Units::Atomic) reject("units", "moving-atom models run in atomic units");
        require_positive("mass", s.mass);
        require_positive("length", s.length);
        if (!(0.0 < s.x1 && s.x1 < s.x2 && s.x2 < s.length))
            reject("x1", "cavity must satisfy 0 < x1 < x2 < length");
        if (s.grid_points < 3) reject("grid_points", "need at least 3 grid points");
        require_positive("sigma", s.sigma);
        for (auto [key, v] : {std::pair{"g1", s.g1}, {"g2", s.g2}, {"gamma1", s.gamma1}, {"gamma2", s.gamma2}})
            require_nonnegative(key, v);
        require_nonnegative("boundary_tolerance", s.boundary_tolerance);
        int inside = 0;
        for (int j = 0; j < s.grid_points; ++j)
            if (s.inside_cavity(s.grid_x(j))) ++inside;
        if (inside < 10)
            reject("grid_points", "cavity [x1, x2] spans " + std::to_string(inside) + " grid points; need at least 10");
        if (std::abs(s.p0) * s.grid_spacing() > std::numbers::pi / 2)
            reject("grid_points", "grid too coarse for p0: |p0| dx = " +
                                      std::to_string(std::abs(s.p0) * s.grid_spacing()) + " exceeds pi/2");
    }
}

nlohmann::json to_json(const ModelSpec& s) {
    nlohmann::json j;
    j["family"] = to_string(s.family);
    j["units"] = to_string(s.units);
    j["levels"] = s.levels;
    j["atom_frequencies"] = s.atom_frequencies;
    j["omega_a"] = s.omega_a;
    j["omega_b"] = s.omega_b;
    j["g_a"] = s.g_a ? nlohmann::json(*s.g_a) : nlohmann::json(nullptr);
    j["g_b"] = s.g_b;
    j["f"] = s.f ? nlohmann::json(*s.f) : nlohmann::json(nullptr);
    j["gamma"] = s.gamma;
    j["alpha"] = s.alpha;
    j["n_a_max"] = s.n_a_max;
    j["n_b_max"] = s.n_b_max;
    j["allow_truncation_override"] = s.allow_truncation_override;
    j["n_atoms"] = s.n_atoms;
    j["mass"] = s.mass;
    j["length"] = s.length;
    j["x1"] = s.x1;
    j["x2"] = s.x2;
    j["grid_points"] = s.grid_points;
    j["x0"] = s.x0;
    j["sigma"] = s.sigma;
    j["p0"] = s.p0;
    j["g1"] = s.g1;
    j["g2"] = s.g2;
    j["gamma1"] = s.gamma1;
    j["gamma2"] = s.gamma2;
    j["boundary_tolerance"] = s.boundary_tolerance;
    j["start_level"] = s.start_level;
    return j;
}

ModelSpec apply_overrides(ModelSpec s, const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("model: expected a JSON object");
    auto num = [&](const std::string& key, const nlohmann::json& v) {
        if (!v.is_number()) reject(key, "must be a number");
        return v.get<double>();
    };
    auto integer = [&](const std::string& key, const nlohmann::json& v) {
        if (!v.is_number_integer()) reject(key, "must be an integer");
        return v.get<int>();
    };
    auto opt = [&](const std::string& key, const nlohmann::json& v) -> std::optional<double> {
        if (v.is_null()) return std::nullopt;
        return num(key, v);
    };
    auto list = [&](const std::string& key, const nlohmann::json& v) {
        if (!v.is_array()) reject(key, "must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(num(key, e));
        return out;
    };

    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const auto& v = it.value();
        if (k == "family") s.family = family_from_string(v.get<std::string>());
        else if (k == "units") s.units = units_from_string(v.get<std::string>());
        else if (k == "levels") s.levels = list(k, v);
        else if (k == "atom_frequencies") s.atom_frequencies = list(k, v);
        else if (k == "omega_a") s.omega_a = num(k, v);
        else if (k == "omega_b") s.omega_b = num(k, v);
        else if (k == "g_a") s.g_a = opt(k, v);
        else if (k == "g_b") s.g_b = num(k, v);
        else if (k == "f") s.f = opt(k, v);
        else if (k == "gamma") s.gamma = num(k, v);
        else if (k == "alpha") s.alpha = num(k, v);
        else if (k == "n_a_max") s.n_a_max = integer(k, v);
        else if (k == "n_b_max") s.n_b_max = integer(k, v);
        else if (k == "allow_truncation_override") s.allow_truncation_override = v.get<bool>();
        else if (k == "n_atoms") s.n_atoms = integer(k, v);
        else if (k == "mass") s.mass = num(k, v);
        else if (k == "length") s.length = num(k, v);
        else if (k == "x1") s.x1 = num(k, v);
        else if (k == "x2") s.x2 = num(k, v);
        else if (k == "grid_points") s.grid_points = integer(k, v);
        else if (k == "x0") s.x0 = num(k, v);
        else if (k == "sigma") s.sigma = num(k, v);
        else if (k == "p0") s.p0 = num(k, v);
        else if (k == "g1") s.g1 = num(k, v);
        else if (k == "g2") s.g2 = num(k, v);
        else if (k == "gamma1") s.gamma1 = num(k, v);
        else if (k == "gamma2") s.gamma2 = num(k, v);
        else if (k == "boundary_tolerance") s.boundary_tolerance = num(k, v);
        else if (k == "start_level") s.start_level = integer(k, v);
        else throw std::invalid_argument("model: unknown key '" + k + "'");
    }
    return s;
}

ModelSpec model_from_json(const nlohmann::json& j) {
    ModelSpec s;
    if (j.contains("family")) {
        // Three-level families default to three levels; set before other overrides.
        s.family = family_from_string(j.at("family").get<std::string>());
        if (s.levels.size() != expected_levels(s.family)) s.levels = {0.0, 0.5, 1.0};
        if (s.family == Family::MovingAtom) s.units = Units::Atomic;
    }
    return apply_overrides(std::move(s), j);
}

} // namespace fluor
