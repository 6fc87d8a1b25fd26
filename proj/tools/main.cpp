// Command-line interface: verification, classification search, integration
// and report emission for cohomogeneity-one soliton superpotential systems.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "cohomflow/exp_poly.hpp"
#include "cohomflow/first_integrals.hpp"
#include "cohomflow/ode_flow.hpp"
#include "cohomflow/solutions.hpp"
#include "cohomflow/superpotential.hpp"
#include "cohomflow/weight_config.hpp"

namespace {

using namespace cohomflow;

constexpr int kExitOk = 0;
constexpr int kExitConditionFailed = 1;
constexpr int kExitSchema = 2;
constexpr int kExitBudget = 3;
constexpr int kExitIntegrator = 4;

std::chrono::steady_clock::time_point g_start;

double elapsed_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_start).count();
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

Configuration load_config(const std::string& config_path, const std::string& entry) {
    if (!entry.empty()) {
        auto cfg = find_catalog_entry(entry);
        if (!cfg) throw std::invalid_argument("unknown catalog entry '" + entry + "'");
        return *cfg;
    }
    if (config_path.empty()) throw std::invalid_argument("need --config or --entry");
    return config_from_json(load_json_file(config_path));
}

void emit(const nlohmann::json& payload, nlohmann::json manifest, const std::string& out_path) {
    manifest["wall_time_s"] = elapsed_seconds();
    nlohmann::json full = payload;
    if (out_path.empty()) {
        full["manifest"] = manifest;
        std::cout << full.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        out << full.dump(2) << "\n";
        std::ofstream mout(out_path + ".manifest.json");
        mout << manifest.dump(2) << "\n";
    }
}

void emit_text(const std::string& text, nlohmann::json manifest, const std::string& out_path) {
    manifest["wall_time_s"] = elapsed_seconds();
    if (out_path.empty()) {
        std::cout << text;
        std::cerr << manifest.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        out << text;
        std::ofstream mout(out_path + ".manifest.json");
        mout << manifest.dump(2) << "\n";
    }
}

// ExpPoly input for check-gfi: {"terms": [{"exponent": ["p/q"...],
// "coeff": [{"monomial": [ints len 2(r+1)], "value": "p/q"}]}]}
ExpPoly exp_poly_from_json(const nlohmann::json& j, int r) {
    ExpPoly f(r);
    for (const auto& term : j.at("terms")) {
        QVec b;
        for (const auto& x : term.at("exponent")) b.push_back(Rat::parse(x.get<std::string>()));
        PolyCoeff p(2 * (r + 1));
        for (const auto& mono : term.at("coeff")) {
            auto exps = mono.at("monomial").get<std::vector<int>>();
            p.add_term(exps, Rat::parse(mono.at("value").get<std::string>()));
        }
        f.add_term(b, p);
    }
    return f;
}

int cmd_verify(const std::string& config_path, const std::string& entry,
               const std::string& ansatz_path, const std::string& out_path) {
    Configuration cfg = load_config(config_path, entry);
    SuperpotentialAnsatz f = ansatz_from_json(load_json_file(ansatz_path), cfg.r);
    auto rep = check(cfg, f);
    nlohmann::json manifest = run_manifest("verify", cfg, {{"ansatz", ansatz_path}});
    emit(condition_report_to_json(rep), manifest, out_path);
    return rep.satisfied ? kExitOk : kExitConditionFailed;
}

int cmd_classify(const std::string& config_path, const std::string& entry, int lattice_bound,
                 int max_extra, int threads, const std::string& mode, bool off_p,
                 std::size_t budget, const std::string& out_path) {
    Configuration cfg = load_config(config_path, entry);
    SearchOptions opts;
    opts.lattice_bound = lattice_bound;
    opts.max_extra = max_extra;
    opts.threads = threads;
    if (budget > 0) opts.budget = budget;
    if (const char* env = std::getenv("COHOMFLOW_THREADS")) opts.threads = std::atoi(env);
    opts.restrict_to_p = !off_p;
    if (mode == "poly") opts.mode = CoeffMode::PolyU;
    else if (mode != "constant") throw std::invalid_argument("mode must be constant or poly");
    auto res = search(cfg, opts);
    nlohmann::json manifest = run_manifest(
        "classify", cfg,
        {{"lattice_bound", lattice_bound}, {"max_extra", max_extra}, {"mode", mode}});
    emit(search_result_to_json(res), manifest, out_path);
    return res.partial ? kExitBudget : kExitOk;
}

int integrate_case5(const Configuration& cfg, double s0, double s_max, double tol,
                    bool check_closed_form, const std::string& coordinate,
                    const std::string& out_path) {
    IntegratorOptions opts;
    opts.tol = tol;
    const Case5Parameters par = case5_parameters(cfg);
    std::ostringstream os;
    os.precision(15);
    os << "t,q1,q2,q3,u";
    if (check_closed_form) os << ",dev_beta1,dev_beta2,dev_u";
    os << "\n";
    double max_dev = 0;
    auto deviations = [&](double s, double b1, double b2, double u) {
        const double e1 = b1 - s;
        const double e2 = b2 - (s + 2 * par.lam / par.energy);
        const double e3 = u - (-par.energy * s / par.lam);
        max_dev = std::max({max_dev, std::abs(e1) / std::max(1.0, std::abs(b1)),
                            std::abs(e2) / std::max(1.0, std::abs(b2)),
                            std::abs(e3) / std::max(1.0, std::abs(u))});
        os << "," << e1 << "," << e2 << "," << e3;
    };

    if (coordinate == "s") {
        Trajectory traj = integrate_case5_s(cfg, s0, s_max, opts);
        if (traj.truncated) return kExitIntegrator;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double s = traj.t[k];
            const double b1 = traj.y[k][0], b2 = traj.y[k][1], u = traj.y[k][2];
            const double alpha = par.lam * par.lam * s * s / (par.energy * b1 * b2);
            os << t_of_s_closed(par.energy, par.lam, s) << ","
               << std::log(alpha / (-2 * par.a_coeff)) << "," << std::log(b1) << ","
               << std::log(b2) << "," << u;
            if (check_closed_form) deviations(s, b1, b2, u);
            os << "\n";
        }
    } else if (coordinate == "t") {
        // Integrate the induced subsystem in the radial coordinate, starting
        // from the singular data mapped through the reparametrisation.
        SuperpotentialAnsatz f = case5_reference_ansatz(cfg);
        SubsystemRHS rhs = build_rhs(cfg, f);
        auto st = singular_start_case5(cfg, s0);
        const double t0 = t_of_s_closed(par.energy, par.lam, s0);
        const double t1 = t_of_s_closed(par.energy, par.lam, s_max);
        Trajectory traj = integrate(rhs, st.q, t0, t1, opts);
        if (traj.truncated) return kExitIntegrator;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.t[k];
            os << t << "," << traj.y[k][0] << "," << traj.y[k][1] << "," << traj.y[k][2] << ","
               << traj.y[k][3];
            if (check_closed_form) {
                const double s = s_of_t_closed(par.energy, par.lam, t);
                deviations(s, std::exp(traj.y[k][1]), std::exp(traj.y[k][2]), traj.y[k][3]);
            }
            os << "\n";
        }
    } else {
        throw std::invalid_argument("coordinate must be s or t");
    }
    nlohmann::json params = {{"solution", "case5"}, {"s0", s0},          {"s_max", s_max},
                             {"tol", tol},          {"coordinate", coordinate}};
    if (check_closed_form) params["max_closed_form_deviation"] = max_dev;
    emit_text(os.str(), run_manifest("integrate", cfg, params), out_path);
    return kExitOk;
}

int cmd_integrate(const std::string& config_path, const std::string& entry,
                  const std::string& solution, const std::string& ansatz_path, double s0,
                  double s_max, double tol, bool check_closed_form, double a_param,
                  double t_max, const std::string& energy_override,
                  const std::string& lambda_override, const std::string& coordinate,
                  const std::string& out_path) {
    if (solution == "case5") {
        Configuration cfg = load_config(config_path, entry.empty() ? "bbc-case5" : entry);
        if (!energy_override.empty()) cfg.energy = Rat::parse(energy_override);
        return integrate_case5(cfg, s0, s_max, tol, check_closed_form, coordinate, out_path);
    }
    if (solution == "bryant-n1") {
        const double E = energy_override.empty() ? 4.0 : Rat::parse(energy_override).to_double();
        const double lam = lambda_override.empty() ? 1.0 : Rat::parse(lambda_override).to_double();
        auto sol = bryant_n1(a_param, E, lam, t_max, 1e-2, tol);
        if (sol.traj.truncated) return kExitIntegrator;
        std::ostringstream os;
        os.precision(15);
        os << "t,h,u\n";
        for (std::size_t k = 0; k < sol.traj.size(); ++k)
            os << sol.traj.t[k] << "," << sol.traj.y[k][0] << "," << sol.traj.y[k][1] << "\n";
        Configuration cfg = *find_catalog_entry("bryant-n1");
        nlohmann::json params = {{"solution", "bryant-n1"}, {"a", a_param}, {"E", E},
                                 {"lambda", lam},           {"t_max", t_max}, {"tol", tol}};
        emit_text(os.str(), run_manifest("integrate", cfg, params), out_path);
        return kExitOk;
    }
    if (!ansatz_path.empty()) {
        Configuration cfg = load_config(config_path, entry);
        SuperpotentialAnsatz f = ansatz_from_json(load_json_file(ansatz_path), cfg.r);
        SubsystemRHS rhs = build_rhs(cfg, f);
        std::vector<double> q0(cfg.r + 1, 0.0);
        IntegratorOptions opts;
        opts.tol = tol;
        Trajectory traj = integrate(rhs, q0, 0.0, t_max, opts);
        nlohmann::json params = {{"ansatz", ansatz_path}, {"t_max", t_max}, {"tol", tol}};
        emit_text(traj.to_csv(cfg.r), run_manifest("integrate", cfg, params), out_path);
        return traj.truncated ? kExitIntegrator : kExitOk;
    }
    throw std::invalid_argument("need --solution case5|bryant-n1 or --ansatz");
}

int cmd_check_gfi(const std::string& config_path, const std::string& entry,
                  const std::string& f_path, const std::string& out_path) {
    Configuration cfg = load_config(config_path, entry);
    ExpPoly F = exp_poly_from_json(load_json_file(f_path), cfg.r);
    auto rep = verify_gfi(cfg, F);
    emit(gfi_report_to_json(rep), run_manifest("check-gfi", cfg, {{"F", f_path}}), out_path);
    return rep.is_gfi ? kExitOk : kExitConditionFailed;
}

int cmd_smoothness(const std::string& solution, double energy, double a_coeff,
                   const std::string& out_path) {
    if (solution != "explicit-case5")
        throw std::invalid_argument("unknown solution '" + solution + "'");
    auto sol = explicit_case5(energy, a_coeff);
    auto rep = smoothness_check(sol);
    Configuration cfg = *find_catalog_entry("bbc-case5");
    nlohmann::json manifest =
        run_manifest("smoothness", cfg, {{"E", energy}, {"A", a_coeff}});
    emit(smoothness_report_to_json(rep), manifest, out_path);
    return rep.all_pass ? kExitOk : kExitConditionFailed;
}

int cmd_catalog(const std::string& out_path) {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const auto& cfg : builtin_catalog()) j["entries"].push_back(config_to_json(cfg));
    emit(j, run_manifest("catalog", nlohmann::json::object()), out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    g_start = std::chrono::steady_clock::now();
    CLI::App app{"superpotential verification and exploration for cohomogeneity-one "
                 "gradient Ricci soliton Hamiltonian systems"};
    app.require_subcommand(1);

    std::string config_path, entry, out_path;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration JSON file");
        cmd->add_option("--entry", entry, "builtin catalog entry name");
        cmd->add_option("--out", out_path, "output file (manifest written alongside)");
    };

    // verify
    std::string ansatz_path;
    auto* verify = app.add_subcommand("verify", "check a superpotential ansatz exactly");
    add_common(verify);
    verify->add_option("--ansatz", ansatz_path, "ansatz JSON file")->required();

    // classify
    int lattice_bound = 3, max_extra = 2, threads = 0;
    std::string mode = "constant";
    bool off_p = false;
    auto* classify = app.add_subcommand("classify", "bounded lattice search for superpotentials");
    add_common(classify);
    std::size_t budget = 0;
    classify->add_option("--lattice-bound", lattice_bound, "lattice bound (<= 4)");
    classify->add_option("--max-extra", max_extra, "non-vertex points added (<= 4)");
    classify->add_option("--threads", threads, "worker threads (0 = auto)");
    classify->add_option("--mode", mode, "coefficient mode: constant | poly");
    classify->add_option("--budget", budget, "candidate evaluation budget (0 = default)");
    classify->add_flag("--off-p", off_p, "search off the hyperplane P (negative testing)");

    // integrate
    std::string solution;
    double s0 = 1e-6, s_max = 10, tol = 1e-10, a_param = 1.0, t_max = 10;
    bool check_closed_form = false;
    std::string energy_opt, lambda_opt;
    auto* integrate_cmd = app.add_subcommand("integrate", "integrate a first-order subsystem");
    add_common(integrate_cmd);
    integrate_cmd->add_option("--solution", solution, "case5 | bryant-n1");
    integrate_cmd->add_option("--ansatz", ansatz_path, "ansatz JSON file");
    integrate_cmd->add_option("--s0", s0, "singular-orbit offset");
    integrate_cmd->add_option("--s-max", s_max, "final s");
    integrate_cmd->add_option("--tol", tol, "integrator tolerance");
    integrate_cmd->add_option("--a", a_param, "bryant-n1 gauge parameter");
    integrate_cmd->add_option("--t-max", t_max, "final t");
    integrate_cmd->add_option("--E", energy_opt, "energy override as exact p/q");
    integrate_cmd->add_option("--lambda", lambda_opt, "soliton constant override as exact p/q");
    std::string coordinate = "s";
    integrate_cmd->add_option("--coordinate", coordinate,
                              "integration variable for the singular problem: s | t");
    integrate_cmd->add_flag("--check-closed-form", check_closed_form,
                            "emit per-row deviations against the closed form");

    // check-gfi
    std::string f_path;
    auto* gfi = app.add_subcommand("check-gfi", "verify a generalised first integral");
    add_common(gfi);
    gfi->add_option("--f", f_path, "candidate F as ExpPoly JSON")->required();

    // smoothness
    double sm_energy = 8, sm_a = -0.5;
    std::string sm_solution = "explicit-case5";
    auto* smooth = app.add_subcommand("smoothness", "singular-orbit boundary conditions");
    smooth->add_option("--solution", sm_solution, "closed-form solution name");
    smooth->add_option("--E", sm_energy, "energy");
    smooth->add_option("--A", sm_a, "type III coefficient");
    smooth->add_option("--out", out_path, "output file");

    // catalog
    auto* catalog = app.add_subcommand("catalog", "list builtin configurations");
    catalog->add_option("--out", out_path, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify(config_path, entry, ansatz_path, out_path);
        if (classify->parsed())
            return cmd_classify(config_path, entry, lattice_bound, max_extra, threads, mode,
                                off_p, budget, out_path);
        if (integrate_cmd->parsed())
            return cmd_integrate(config_path, entry, solution, ansatz_path, s0, s_max, tol,
                                 check_closed_form, a_param, t_max, energy_opt, lambda_opt,
                                 coordinate, out_path);
        if (gfi->parsed()) return cmd_check_gfi(config_path, entry, f_path, out_path);
        if (smooth->parsed()) return cmd_smoothness(sm_solution, sm_energy, sm_a, out_path);
        if (catalog->parsed()) return cmd_catalog(out_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIntegrator;
    }
    return kExitOk;
}
