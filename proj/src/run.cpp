// run.cpp — Experiment dispatch for the command-line driver

#include "fluor/run.hpp"
#include "fluor/dataset_io.hpp"
#include "fluor/dicke.hpp"
#include "fluor/dressed.hpp"
#include "fluor/motion.hpp"
#include "fluor/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#ifndef FLUOR_PRESET_DIR
#define FLUOR_PRESET_DIR "presets"
#endif

namespace fluor {

using nlohmann::json;

const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> e{"spectrum", "timemap", "levels", "dicke-critical",
                                            "array-scaling", "motion", "ehrenfest", "aea-compare"};
    return e;
}

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
}

std::string prefixed(const std::string& where, const std::exception& e) {
    return where + ": " + e.what();
}

const std::map<std::string, std::set<std::string>>& option_keys() {
    static const std::map<std::string, std::set<std::string>> k{
        {"spectrum", {"count_window", "count_floor"}},
        {"timemap", {"rayleigh_window", "shg_window"}},
        {"levels", {"keep"}},
        {"dicke-critical", {"frequency_sets", "critical_n"}},
        {"array-scaling", {"rayleigh_window", "shg_window", "fit_range"}},
        {"motion", {"spectrum", "density", "spectrum_times", "density_spacing", "max_dim", "cache_dir",
                    "support_discard", "density_numerics"}},
        {"ehrenfest", {"spectrum", "spectrum_numerics"}},
        {"aea-compare", {"count_window", "count_floor"}},
    };
    return k;
}

double opt_number(const json& o, const std::string& key, double fallback) {
    return o.contains(key) ? o.at(key).get<double>() : fallback;
}

std::pair<double, double> opt_window(const json& o, const std::string& key, std::pair<double, double> fallback) {
    if (!o.contains(key)) return fallback;
    const auto v = o.at(key).get<std::vector<double>>();
    if (v.size() != 2 || !(v[0] < v[1])) throw std::invalid_argument("options." + key + ": expected [lo, hi]");
    return {v[0], v[1]};
}

json merged(json base, const json& over) {
    for (auto it = over.begin(); it != over.end(); ++it) base[it.key()] = it.value();
    return base;
}

} // namespace

std::vector<double> parse_grid(const json& j, const std::string& key) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& e : j) {
            if (!e.is_number()) throw std::invalid_argument("grids." + key + ": entries must be numbers");
            v.push_back(e.get<double>());
        }
        return v;
    }
    check_keys(j, "grids." + key, {"min", "max", "points"});
    const double lo = j.at("min").get<double>(), hi = j.at("max").get<double>();
    const int n = j.at("points").get<int>();
    if (n < 1 || (n > 1 && !(hi > lo))) throw std::invalid_argument("grids." + key + ": need points >= 1 and max > min");
    return linspace(lo, hi, static_cast<std::size_t>(n));
}

namespace {

RunConfig parse_run_config_checked(const json& j) {
    check_keys(j, "config", {"name", "experiment", "model", "numerics", "variants", "grids", "options", "description"});
    RunConfig c;
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    if (!j.contains("experiment")) throw std::invalid_argument("config.experiment: required");
    c.experiment = j.at("experiment").get<std::string>();
    if (std::find(known_experiments().begin(), known_experiments().end(), c.experiment) == known_experiments().end())
        throw std::invalid_argument("config.experiment: unknown experiment '" + c.experiment + "'");
    const json base_model = j.value("model", json::object());
    try {
        c.model = model_from_json(base_model);
        validate(c.model);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(prefixed("config", e));
    }
    if (j.contains("numerics")) c.numerics = krylov_from_json(j.at("numerics"));
    c.options = j.value("options", json::object());
    check_keys(c.options, "options", option_keys().at(c.experiment));

    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        check_keys(g, "grids", {"omega_b", "time", "n_list", "p0_list", "coupling", "t_final"});
        if (g.contains("omega_b")) c.omega_b = parse_grid(g.at("omega_b"), "omega_b");
        if (g.contains("time")) c.time = parse_grid(g.at("time"), "time");
        if (g.contains("n_list")) c.n_list = parse_grid(g.at("n_list"), "n_list");
        if (g.contains("p0_list")) c.p0_list = parse_grid(g.at("p0_list"), "p0_list");
        if (g.contains("coupling")) c.coupling = parse_grid(g.at("coupling"), "coupling");
        if (g.contains("t_final")) c.t_final = g.at("t_final").get<double>();
    }

    if (j.contains("variants")) {
        for (const auto& v : j.at("variants")) {
            check_keys(v, "variants[]", {"name", "model", "options"});
            Variant var;
            if (!v.contains("name") || !v.at("name").is_string())
                throw std::invalid_argument("variants[]: every variant needs a string 'name'");
            var.name = v.at("name").get<std::string>();
            const json vm = merged(base_model, v.value("model", json::object()));
            try {
                var.model = model_from_json(vm);
                validate(var.model);
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(prefixed("variants." + var.name, e));
            }
            var.options = merged(c.options, v.value("options", json::object()));
            check_keys(var.options, "variants." + var.name + ".options", option_keys().at(c.experiment));
            c.variants.push_back(std::move(var));
        }
    }
    if (c.variants.empty()) c.variants.push_back({"main", c.model, c.options});

    if (!c.p0_list.empty()) {
        std::vector<Variant> expanded;
        for (const auto& v : c.variants)
            for (double p0 : c.p0_list) {
                Variant e = v;
                e.model.p0 = p0;
                std::ostringstream name;
                name << v.name << "-p0=" << p0;
                e.name = name.str();
                validate(e.model);
                expanded.push_back(std::move(e));
            }
        c.variants = std::move(expanded);
    }

    const auto needs = [&](bool cond, const std::string& what) {
        if (!cond) throw std::invalid_argument("config: experiment " + c.experiment + " requires " + what);
    };
    const std::string& ex = c.experiment;
    if (ex == "spectrum" || ex == "aea-compare" || ex == "timemap" || ex == "array-scaling")
        needs(!c.omega_b.empty(), "grids.omega_b");
    if (ex == "timemap" || ex == "array-scaling" || ex == "ehrenfest") needs(!c.time.empty(), "grids.time");
    if (ex == "array-scaling") needs(!c.n_list.empty(), "grids.n_list");
    if (ex == "levels" || ex == "dicke-critical") needs(!c.coupling.empty(), "grids.coupling");
    return c;
}

} // namespace

RunConfig parse_run_config(const json& j) {
    try {
        return parse_run_config_checked(j);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: malformed value: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(j);
}

std::filesystem::path preset_path(const std::string& name) {
    return std::filesystem::path(FLUOR_PRESET_DIR) / (name + ".json");
}

RunConfig load_preset(const std::string& name) {
    const auto p = preset_path(name);
    if (!std::filesystem::exists(p)) throw std::invalid_argument("preset: unknown preset '" + name + "'");
    return load_run_config(p);
}

json RunConfig::resolved() const {
    json j;
    j["name"] = name;
    j["experiment"] = experiment;
    j["model"] = to_json(model);
    j["numerics"] = to_json(numerics);
    j["options"] = options;
    json vars = json::array();
    for (const auto& v : variants) vars.push_back({{"name", v.name}, {"model", to_json(v.model)}, {"options", v.options}});
    j["variants"] = vars;
    j["grids"] = {{"omega_b", omega_b}, {"time", time}, {"n_list", n_list}, {"p0_list", p0_list}, {"coupling", coupling}};
    j["grids"]["t_final"] = t_final ? json(*t_final) : json(nullptr);
    return j;
}

namespace {

struct Emitter {
    const RunConfig& cfg;
    RunResult& result;

    json meta(const json& extra) const {
        json m = extra;
        m["config"] = cfg.resolved();
        return m;
    }
    void table(const Table& t, const std::string& stem, const json& extra = json::object()) {
        const auto path = cfg.output_dir / cfg.name / stem;
        emit_table(t, meta(extra), path, {cfg.force_overwrite});
        result.files.push_back(path.string() + ".csv");
    }
    void dataset(const SpectrumDataset& d, const std::string& stem) {
        d.check_invariants();
        table(spectrum_table(d), stem, d.metadata);
    }
};

std::vector<double> maxima_positions(const SpectrumDataset& d, std::pair<double, double> window, double floor) {
    std::vector<double> out;
    for (auto i : local_maxima(d.omega_grid, d.final_row(), window.first, window.second, floor))
        out.push_back(d.omega_grid[i]);
    return out;
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void run_spectrum(const RunConfig& cfg, Emitter& out, RunResult& res) {
    for (const auto& v : cfg.variants) {
        const double tf = cfg.t_final ? *cfg.t_final : 8.0 / v.model.gamma;
        const auto d = scan_spectrum(v.model, cfg.omega_b, tf, {cfg.numerics, cfg.workers});
        out.dataset(d, v.name + "-spectrum");
        const auto window = opt_window(v.options, "count_window", {cfg.omega_b.front(), cfg.omega_b.back()});
        res.summary[v.name] = {{"maxima", maxima_positions(d, window, opt_number(v.options, "count_floor", 0.01))},
                               {"convergence_delta", d.metadata["convergence_delta"]}};
    }
}

void run_timemap(const RunConfig& cfg, Emitter& out, RunResult& res) {
    for (const auto& v : cfg.variants) {
        const auto d = time_resolved_map(v.model, cfg.omega_b, cfg.time, {cfg.numerics, cfg.workers});
        out.dataset(d, v.name + "-timemap");
        json s;
        for (const char* key : {"rayleigh_window", "shg_window"})
            if (v.options.contains(key)) {
                const auto pm = peak_metrics(d, opt_window(v.options, key, {0, 0}));
                s[key] = {{"peak_frequency", pm.peak_frequency}, {"height", pm.height}, {"rise_time", pm.rise_time},
                          {"flagged", pm.flagged}};
            }
        res.summary[v.name] = s;
    }
}

void run_levels(const RunConfig& cfg, Emitter& out, RunResult& res) {
    for (const auto& v : cfg.variants) {
        const auto keep = static_cast<std::size_t>(opt_number(v.options, "keep", 0));
        const auto lc = energy_levels_vs_coupling(v.model, cfg.coupling, keep);
        Table t{{"g_a", "level", "energy"}, {}};
        for (Eigen::Index gi = 0; gi < lc.energies.rows(); ++gi)
            for (Eigen::Index l = 0; l < lc.energies.cols(); ++l)
                t.rows.push_back({lc.couplings[static_cast<std::size_t>(gi)], static_cast<double>(l), lc.energies(gi, l)});
        out.table(t, v.name + "-levels");
        res.summary[v.name] = {{"min_overlap", lc.min_overlap},
                               {"tracking_failure_at",
                                lc.tracking_failure ? json(cfg.coupling[*lc.tracking_failure]) : json(nullptr)}};
    }
}

void run_dicke(const RunConfig& cfg, Emitter& out, RunResult& res) {
    json sets = cfg.options.value("frequency_sets", json{{"resonant", {1.0, 1.0, 1.0}}, {"nonresonant", {1.0, 0.5, 1.0}}});
    for (auto it = sets.begin(); it != sets.end(); ++it) {
        const auto w3 = it.value().get<std::vector<double>>();
        if (w3.size() != 3) throw std::invalid_argument("options.frequency_sets: expected [w_s, w_a, w_b]");
        const Frequencies w{w3[0], w3[1], w3[2]};
        Table t{{"lambda_b", "lambda_a_c", "lambda_a_bisection", "det_K", "omega0", "c_s2", "c_a2", "c_b2"}, {}};
        json absent = json::array();
        for (const auto& p : critical_curve(w, cfg.coupling)) {
            if (!p.lambda_a) {
                absent.push_back(p.lambda_b);
                continue;
            }
            const auto mc = mode_coefficients(stiffness_matrix(w, *p.lambda_a, p.lambda_b));
            t.rows.push_back({p.lambda_b, *p.lambda_a, p.bisection.value_or(NAN), p.determinant, p.lowest_eigenvalue,
                              mc.s, mc.a, mc.b});
        }
        out.table(t, it.key() + "-critical");
        res.summary[it.key()] = {{"absent_lambda_b", absent}};
    }
    // Closed-form cross-check against the nonresonant determinant root.
    const Frequencies nr{1.0, 0.5, 1.0};
    Table dev{{"lambda_b", "lambda_a_det", "closed_form_at_det_root", "imag_residue", "lambda_a_closed_form_zero",
               "deviation"},
              {}};
    for (const auto& p : critical_curve(nr, cfg.coupling)) {
        if (!p.lambda_a) continue;
        const auto cf = closed_form_omega0(*p.lambda_a, p.lambda_b);
        // Zero of the closed form along lambda_a by bisection when bracketed.
        double lo = 0.0, hi = 1.0, zero = NAN;
        const double flo = closed_form_omega0(lo, p.lambda_b).value, fhi = closed_form_omega0(hi, p.lambda_b).value;
        if (flo * fhi < 0) {
            for (int k = 0; k < 200; ++k) {
                const double mid = 0.5 * (lo + hi);
                if ((closed_form_omega0(mid, p.lambda_b).value > 0) == (flo > 0)) lo = mid;
                else hi = mid;
            }
            zero = 0.5 * (lo + hi);
        }
        dev.rows.push_back({p.lambda_b, *p.lambda_a, cf.value, cf.imaginary_residue, zero, zero - *p.lambda_a});
    }
    out.table(dev, "closed-form-crosscheck", {{"status", "cross-check only; no pass/fail"}});
    if (cfg.options.contains("critical_n")) {
        const auto g = cfg.options.at("critical_n").get<std::vector<double>>();
        if (g.size() != 2) throw std::invalid_argument("options.critical_n: expected [g_a, g_b]");
        res.summary["critical_N_nonresonant"] = estimate_critical_N(g[0], g[1], nr);
        res.summary["critical_N_resonant"] = estimate_critical_N(g[0], g[1], {1.0, 1.0, 1.0});
    }
}

void run_array_scaling(const RunConfig& cfg, Emitter& out, RunResult& res) {
    for (const auto& v : cfg.variants) {
        Table t{{"N", "T_rayleigh", "T_shg", "P_rayleigh", "P_shg"}, {}};
        const double wa = v.model.omega_a;
        const auto rw = opt_window(v.options, "rayleigh_window", {wa - 0.05, wa + 0.05});
        const auto sw = opt_window(v.options, "shg_window", {2 * wa - 0.05, 2 * wa + 0.05});
        std::vector<double> ns, ts, pr, ps;
        for (double nd : cfg.n_list) {
            ModelSpec m = v.model;
            m.n_atoms = static_cast<int>(std::lround(nd));
            const auto d = time_resolved_map(m, cfg.omega_b, cfg.time, {cfg.numerics, cfg.workers});
            out.dataset(d, v.name + "-N" + std::to_string(m.n_atoms) + "-timemap");
            const auto r = peak_metrics(d, rw), s = peak_metrics(d, sw);
            t.rows.push_back({nd, r.rise_time, s.rise_time, r.height, s.height});
            ns.push_back(nd);
            ts.push_back(s.rise_time);
            pr.push_back(r.height);
            ps.push_back(s.height);
        }
        out.table(t, v.name + "-scaling");
        const auto fr = opt_window(v.options, "fit_range", {3, 10});
        std::vector<double> fx, ft, fpr, fps;
        for (std::size_t i = 0; i < ns.size(); ++i)
            if (ns[i] >= fr.first && ns[i] <= fr.second) {
                fx.push_back(ns[i]);
                ft.push_back(ts[i]);
                fpr.push_back(pr[i]);
                fps.push_back(ps[i]);
            }
        if (fx.size() >= 2)
            res.summary[v.name] = {{"T_shg_exponent", fit_exponent(fx, ft)},
                                   {"P_rayleigh_exponent", fit_exponent(fx, fpr)},
                                   {"P_shg_exponent", fit_exponent(fx, fps)}};
    }
}

void run_motion(const RunConfig& cfg, Emitter& out, RunResult& res) {
    for (const auto& v : cfg.variants) {
        const json& o = v.options;
        json s;
        if (o.value("spectrum", true)) {
            if (cfg.omega_b.empty()) throw std::invalid_argument("config: motion spectrum requires grids.omega_b");
            DiagonalizeOptions dopt;
            dopt.max_dim = static_cast<std::size_t>(opt_number(o, "max_dim", 12000));
            if (o.contains("cache_dir")) dopt.cache_dir = std::filesystem::path(o.at("cache_dir").get<std::string>());
            const auto dec = diagonalize_h0(v.model, dopt);
            ModelSpec h0 = v.model;
            h0.n_b_max = 0;
            const StateVector psi0 = initial_state(h0);
            const auto coeffs = expand_state(dec, psi0.amplitudes);
            const auto S = s_coefficients(dec, v.model, support_of(coeffs, opt_number(o, "support_discard", 1e-12)));
            const auto in = prepare_perturbative(dec, S, v.model, psi0.amplitudes);
            const auto times = o.contains("spectrum_times") ? o.at("spectrum_times").get<std::vector<double>>()
                                                            : std::vector<double>{-1.0};
            auto d = perturbative_spectrum(in, times, cfg.omega_b, cfg.workers);
            d.metadata["note"] = "negative t rows are the asymptotic limit";
            out.table(spectrum_table(d), v.name + "-spectrum", d.metadata);
            s["spectrum_maxima"] = maxima_positions(d, {cfg.omega_b.front(), cfg.omega_b.back()}, 0.1);
        }
        if (o.value("density", true)) {
            if (cfg.time.empty()) throw std::invalid_argument("config: motion density requires grids.time");
            const double tf = wall_limited_time(v.model, cfg.time.back());
            std::vector<double> times;
            for (double t : cfg.time)
                if (t < tf) times.push_back(t);
            if (times.back() < tf) times.push_back(tf);
            KrylovConfig kc = cfg.numerics;
            if (o.contains("density_numerics")) kc = krylov_from_json(o.at("density_numerics"), kc);
            const auto run = nuclear_density_run(v.model, times, kc);
            Table t{{"t", "x", "N"}, {}};
            const int stride = static_cast<int>(opt_number(o, "density_spacing", 1));
            for (std::size_t k = 0; k < run.times.size(); ++k)
                for (int j = 0; j < v.model.grid_points; j += stride)
                    t.rows.push_back({run.times[k], v.model.grid_x(j), run.density[k](j)});
            out.table(t, v.name + "-density");
            s["reflected"] = run.reflected;
            s["transmitted"] = run.transmitted;
            s["final_time"] = run.final_time;
        }
        res.summary[v.name] = s;
    }
}

void run_ehrenfest(const RunConfig& cfg, Emitter& out, RunResult& res) {
    for (const auto& v : cfg.variants) {
        ModelSpec m = v.model;
        const int nb = m.n_b_max;
        m.n_b_max = 0;
        EhrenfestOptions eo;
        eo.numerics = cfg.numerics;
        const auto r = ehrenfest_evolve(m, cfg.time, eo);
        Table t{{"t", "x", "p", "force", "energy"}, {}};
        for (std::size_t k = 0; k < r.times.size(); ++k) t.rows.push_back({r.times[k], r.x[k], r.p[k], r.force[k], r.energy[k]});
        out.table(t, v.name + "-trajectory");
        json s{{"exit_cavity", r.exit_cavity ? json(*r.exit_cavity) : json(nullptr)},
               {"exit_box", r.exit_box ? json(*r.exit_box) : json(nullptr)}};
        if (v.options.value("spectrum", false)) {
            if (cfg.omega_b.empty()) throw std::invalid_argument("config: ehrenfest spectrum requires grids.omega_b");
            m.n_b_max = std::max(1, nb);
            KrylovConfig kc = cfg.numerics;
            if (v.options.contains("spectrum_numerics")) kc = krylov_from_json(v.options.at("spectrum_numerics"), kc);
            const auto d = ehrenfest_spectrum(m, cfg.omega_b, cfg.time, kc, cfg.workers);
            out.dataset(d, v.name + "-spectrum");
            s["spectrum_maxima"] = maxima_positions(d, {cfg.omega_b.front(), cfg.omega_b.back()}, 0.1);
        }
        res.summary[v.name] = s;
    }
}

} // namespace

RunResult run(const RunConfig& cfg) {
    RunResult res;
    Emitter out{cfg, res};
    const std::string& ex = cfg.experiment;
    if (ex == "spectrum" || ex == "aea-compare") run_spectrum(cfg, out, res);
    else if (ex == "timemap") run_timemap(cfg, out, res);
    else if (ex == "levels") run_levels(cfg, out, res);
    else if (ex == "dicke-critical") run_dicke(cfg, out, res);
    else if (ex == "array-scaling") run_array_scaling(cfg, out, res);
    else if (ex == "motion") run_motion(cfg, out, res);
    else if (ex == "ehrenfest") run_ehrenfest(cfg, out, res);
    else throw std::invalid_argument("config.experiment: unknown experiment '" + ex + "'");
    std::filesystem::create_directories(cfg.output_dir / cfg.name);
    const auto summary_file = (cfg.output_dir / cfg.name / "summary.json").string();
    if (std::filesystem::exists(summary_file) && !cfg.force_overwrite)
        throw std::runtime_error("refusing to overwrite " + summary_file + " (use --force-overwrite)");
    std::ofstream f(summary_file, std::ios::binary | std::ios::trunc);
    json sj = res.summary;
    sj["config_hash"] = config_hash(cfg.resolved());
    f << sj.dump(2) << "\n";
    res.files.push_back(summary_file);
    return res;
}

} // namespace fluor
