#include "cohomflow/ode_flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cohomflow/exp_poly.hpp"

namespace cohomflow {

std::string Trajectory::to_csv(int r) const {
    std::ostringstream os;
    os.precision(15);
    os << "t";
    for (int i = 1; i <= r; ++i) os << ",q" << i;
    os << ",u";
    const bool with_h = hamiltonian.size() == t.size();
    const bool with_defect = graph_defect.size() == t.size();
    if (with_h) os << ",H";
    if (with_defect) os << ",graph_defect";
    os << "\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        os << t[k];
        for (int i = 0; i <= r; ++i) os << "," << y[k][i];
        if (with_h) os << "," << hamiltonian[k];
        if (with_defect) os << "," << graph_defect[k];
        os << "\n";
    }
    return os.str();
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kB5[7] = {35.0 / 384,     0.0,  500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

Trajectory integrate_ode(const RhsFn& rhs, std::vector<double> y0, double t0, double t1,
                         const IntegratorOptions& opts, const std::vector<double>* sample_times) {
    const int n = static_cast<int>(y0.size());
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    Trajectory out;

    std::vector<double> y = std::move(y0);
    double t = t0;
    std::size_t next_sample = 0;
    auto record = [&](double tt, const std::vector<double>& yy) {
        out.t.push_back(tt);
        out.y.push_back(yy);
    };
    if (sample_times == nullptr) {
        record(t, y);
    } else {
        while (next_sample < sample_times->size() &&
               std::abs((*sample_times)[next_sample] - t) < 1e-14 * std::max(1.0, std::abs(t))) {
            record(t, y);
            ++next_sample;
        }
    }

    std::vector<std::vector<double>> k(7, std::vector<double>(n));
    std::vector<double> ytmp(n), y5(n), y4(n);

    double h = opts.initial_step > 0 ? opts.initial_step : std::min(opts.max_step, span / 100.0);
    if (h <= 0) h = 1e-6;
    double err_prev = 1.0;
    const double safety = 0.9;
    // PI controller exponents for a 5th-order error estimate.
    const double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;

    bool have_k1 = false;
    std::size_t steps = 0;
    while (dir * (t1 - t) > 1e-14 * std::max(1.0, std::abs(t1))) {
        if (++steps > opts.max_steps) {
            out.truncated = true;
            out.truncation_reason = "step budget exhausted";
            break;
        }
        double h_here = std::min(h, opts.max_step);
        double t_target = t + dir * h_here;
        if (dir * (t_target - t1) > 0) {
            t_target = t1;
        }
        if (sample_times && next_sample < sample_times->size()) {
            const double ts = (*sample_times)[next_sample];
            if (dir * (t_target - ts) > 0) t_target = ts;
        }
        h_here = std::abs(t_target - t);
        if (h_here < 1e-15 * std::max(1.0, std::abs(t))) {
            out.truncated = true;
            out.truncation_reason = "step underflow";
            break;
        }
        const double hs = dir * h_here;

        if (!have_k1) rhs(t, y, k[0]);
        for (int stage = 1; stage < 7; ++stage) {
            for (int i = 0; i < n; ++i) {
                double acc = 0;
                for (int s2 = 0; s2 < stage; ++s2) acc += kA[stage][s2] * k[s2][i];
                ytmp[i] = y[i] + hs * acc;
            }
            rhs(t + kC[stage] * hs, ytmp, k[stage]);
        }
        double err = 0;
        for (int i = 0; i < n; ++i) {
            double a5 = 0, a4 = 0;
            for (int s2 = 0; s2 < 7; ++s2) {
                a5 += kB5[s2] * k[s2][i];
                a4 += kB4[s2] * k[s2][i];
            }
            y5[i] = y[i] + hs * a5;
            y4[i] = y[i] + hs * a4;
            const double scale = opts.tol + opts.tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double e = (y5[i] - y4[i]) / scale;
            err += e * e;
        }
        err = std::sqrt(err / n);
        if (!std::isfinite(err)) {
            // Overshooting trial step; reject hard and retry.
            h = h_here * 0.1;
            have_k1 = false;
            if (h < 1e-15 * std::max(1.0, std::abs(t))) {
                out.truncated = true;
                out.truncation_reason = "non-finite state";
                break;
            }
            continue;
        }

        if (err <= 1.0) {
            t = t + hs;
            y = y5;
            // FSAL property of Dormand-Prince.
            k[0] = k[6];
            have_k1 = true;
            if (sample_times == nullptr) {
                record(t, y);
            } else {
                while (next_sample < sample_times->size() &&
                       std::abs((*sample_times)[next_sample] - t) <
                           1e-12 * std::max(1.0, std::abs(t))) {
                    record(t, y);
                    ++next_sample;
                }
            }
            double fac = safety * std::pow(std::max(err, 1e-10), -alpha) *
                         std::pow(std::max(err_prev, 1e-10), beta);
            fac = std::clamp(fac, 0.2, 5.0);
            h = h_here * fac;
            err_prev = std::max(err, 1e-10);
        } else {
            double fac = std::clamp(safety * std::pow(err, -alpha), 0.1, 1.0);
            h = h_here * fac;
            have_k1 = false;
            if (h < 1e-15 * std::max(1.0, std::abs(t))) {
                out.truncated = true;
                out.truncation_reason = "step underflow";
                break;
            }
        }
    }
    if (sample_times == nullptr && (out.t.empty() || out.t.back() != t)) record(t, y);
    return out;
}

SubsystemRHS::SubsystemRHS(Configuration cfg, SuperpotentialAnsatz ansatz)
    : cfg_(std::move(cfg)), ansatz_(std::move(ansatz)) {
    ansatz_.normalize(cfg_.r);
    auto rep = check(cfg_, ansatz_);
    if (!rep.satisfied)
        throw std::invalid_argument("build_rhs: superpotential condition not satisfied");
    const JForm form = cfg_.jform();
    const int m = form.size();
    const QVec half_d = qvec_scale(Rat(1, 2), form.d_ext());
    for (const auto& [c, coeff] : ansatz_.entries) {
        RhsTerm term;
        term.exponent = qvec_sub(c, half_d);
        term.coeff_const.assign(m, RadicalSum{});
        term.coeff_u.assign(m, Rat(0));
        // Split the coefficient into f_c = B + A u.
        RadicalSum B, A;
        if (const auto* rs = std::get_if<RadicalScalar>(&coeff)) {
            B.add(*rs);
        } else {
            const auto& p = std::get<UPoly>(coeff);
            B.add_rational(p.c0);
            A.add_rational(p.c1);
        }
        // dq_j/dt = 2 e^{-d.q/2} sum_c [ (M c)_j f_c + (M e_u)_j df_c/du ] e^{c.q}
        for (int j = 0; j < m; ++j) {
            Rat mc_j;
            for (int i = 0; i < m; ++i) mc_j += form.matrix[j][i] * c[i];
            const Rat mu_j = form.matrix[j][m - 1];  // (M e_u)_j
            term.coeff_const[j].add(B.scaled(mc_j * Rat(2)));
            term.coeff_const[j].add(A.scaled(mu_j * Rat(2)));
            if (auto au = A.as_rational(); au && !au->is_zero())
                term.coeff_u[j] = mc_j * Rat(2) * (*au);
        }
        terms_.push_back(std::move(term));
    }
}

SubsystemRHS build_rhs(const Configuration& cfg, const SuperpotentialAnsatz& f) {
    return SubsystemRHS(cfg, f);
}

void SubsystemRHS::operator()(double, std::span<const double> q, std::span<double> dq) const {
    const int m = dim();
    const double u = q[m - 1];
    for (int j = 0; j < m; ++j) dq[j] = 0;
    for (const auto& term : terms_) {
        double dot = 0;
        for (int i = 0; i < m; ++i) dot += term.exponent[i].to_double() * q[i];
        const double e = std::exp(std::clamp(dot, -700.0, 700.0));
        for (int j = 0; j < m; ++j)
            dq[j] += (term.coeff_const[j].value() + term.coeff_u[j].to_double() * u) * e;
    }
}

Trajectory integrate(const SubsystemRHS& rhs, std::span<const double> q0, double t0, double t1,
                     const IntegratorOptions& opts) {
    std::vector<double> y(q0.begin(), q0.end());
    RhsFn fn = [&rhs](double t, std::span<const double> q, std::span<double> dq) { rhs(t, q, dq); };
    Trajectory traj = integrate_ode(fn, std::move(y), t0, t1, opts);
    // Conservation monitor through the graph relation p = grad f.
    const ExpPoly h = hamiltonian(rhs.config());
    traj.hamiltonian.reserve(traj.size());
    for (const auto& q : traj.y) {
        std::vector<double> p = rhs.ansatz().gradient_at(q);
        traj.hamiltonian.push_back(h.eval(p, q));
    }
    return traj;
}

Case5Parameters case5_parameters(const Configuration& cfg) {
    cfg.validate_wellformed();
    if (cfg.r != 3 || cfg.dims != std::vector<long>{1, 2, 2})
        throw std::invalid_argument("case5: configuration must have d=(1,2,2)");
    if (!cfg.steady()) throw std::invalid_argument("case5: soliton constant must be zero");
    auto a1 = cfg.coefficient_of({0, -1, 0});
    auto a2 = cfg.coefficient_of({0, 0, -1});
    auto a3 = cfg.coefficient_of({1, -2, 0});
    auto a4 = cfg.coefficient_of({1, 0, -2});
    if (!a1 || !a2 || !a3 || !a4)
        throw std::invalid_argument("case5: weight set mismatch");
    if (*a1 != *a2 || *a3 != *a4)
        throw std::invalid_argument("case5: coordinates not normalised (unequal coefficients)");
    if (a1->sign() <= 0) throw std::invalid_argument("case5: lam must be positive");
    if (a3->sign() >= 0) throw std::invalid_argument("case5: type III coefficients must be negative");
    if (cfg.energy.sign() <= 0) throw std::invalid_argument("case5: E must be positive");
    return {cfg.energy.to_double(), a1->to_double(), a3->to_double()};
}

bool case5_admissible_initial_pair(double energy, double lam, double b1, double b2) {
    if (energy <= 0 || lam <= 0) throw std::invalid_argument("case5: need E > 0 and lam > 0");
    const double target = 2 * lam / energy;
    auto near = [](double x, double y) { return std::abs(x - y) < 1e-12 * std::max(1.0, std::abs(y)); };
    if (near(b1, 0) && near(b2, 0)) return false;  // fails the nondegeneracy condition
    return (near(b1, target) && near(b2, 0)) || (near(b1, 0) && near(b2, target));
}

SingularStart singular_start_case5(const Configuration& cfg, double s0) {
    const Case5Parameters par = case5_parameters(cfg);
    if (s0 <= 0) throw std::invalid_argument("singular_start_case5: s0 must be positive");
    SingularStart st;
    st.s0 = s0;
    st.beta1 = s0;
    st.beta2 = s0 + 2 * par.lam / par.energy;
    // sqrt(alpha) = (lam/sqrt(E)) s / sqrt(beta1 beta2)
    st.alpha = par.lam * par.lam * s0 * s0 / (par.energy * st.beta1 * st.beta2);
    st.u0 = -par.energy * s0 / par.lam;
    st.q = {std::log(st.alpha / (-2 * par.a_coeff)), std::log(st.beta1), std::log(st.beta2), st.u0};
    return st;
}

RhsFn case5_s_system(const Configuration& cfg) {
    const Case5Parameters par = case5_parameters(cfg);
    const double k = par.energy / (2 * par.lam);
    return [k](double s, std::span<const double> y, std::span<double> dy) {
        const double b1 = y[0], b2 = y[1];
        dy[0] = (k * b1 * (b2 - b1) + b1) / s - 1.0;
        dy[1] = (-k * b2 * (b2 - b1) + b2) / s + 1.0;
        dy[2] = (-k * (b1 + b2) + 1.0) / s;
    };
}

Trajectory integrate_case5_s(const Configuration& cfg, double s0, double s_max,
                             const IntegratorOptions& opts, const std::vector<double>* sample_s) {
    const SingularStart st = singular_start_case5(cfg, s0);
    RhsFn rhs = case5_s_system(cfg);
    std::vector<double> y = {st.beta1, st.beta2, st.u0};
    return integrate_ode(rhs, std::move(y), s0, s_max, opts, sample_s);
}

namespace {

double arccoth(double x) {
    if (!(x > 1.0)) throw std::domain_error("arccoth: argument must exceed 1");
    return 0.5 * std::log((x + 1.0) / (x - 1.0));
}

}  // namespace

double t_of_s_closed(double energy, double lam, double s) {
    if (s == 0) return 0;
    if (s < 0 || energy <= 0 || lam <= 0) throw std::invalid_argument("t_of_s: bad arguments");
    const double first = std::sqrt(2 * s / lam) * std::sqrt(1 + energy * s / (2 * lam));
    const double second = (2 / std::sqrt(energy)) * arccoth(std::sqrt(1 + 2 * lam / (energy * s)));
    return first + second;
}

double t_of_s_quadrature(double energy, double lam, double s, double tol) {
    // t = (sqrt(E)/lam) * Int_0^s sqrt(1 + 2 lam/(E sigma)) dsigma; the
    // substitution sigma = tau^2 removes the inverse-square-root singularity:
    // integrand becomes 2 sqrt(tau^2 + 2 lam/E).
    if (s == 0) return 0;
    const double c = 2 * lam / energy;
    auto g = [c](double tau) { return 2 * std::sqrt(tau * tau + c); };
    std::function<double(double, double, double, double, double, int)> simpson =
        [&](double a, double b, double fa, double fb, double fm, int depth) -> double {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = g(lm), frm = g(rm);
        const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
        const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
        if (depth > 48 || std::abs(left + right - whole) < 15 * tol * (b - a))
            return left + right + (left + right - whole) / 15.0;
        return simpson(a, m, fa, fm, flm, depth + 1) + simpson(m, b, fm, fb, frm, depth + 1);
    };
    const double b = std::sqrt(s);
    const double integral = simpson(0, b, g(0), g(b), g(0.5 * b), 0);
    return (std::sqrt(energy) / lam) * integral;
}

double s_of_t_closed(double energy, double lam, double t) {
    if (t <= 0) return 0;
    double lo = 0, hi = 1;
    while (t_of_s_closed(energy, lam, hi) < t) {
        hi *= 2;
        if (hi > 1e18) throw std::domain_error("s_of_t_closed: target out of range");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (t_of_s_closed(energy, lam, mid) < t) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    double s = 0.5 * (lo + hi);
    // Newton polish with t'(s) = (sqrt(E)/lam) sqrt(1 + 2 lam/(E s)).
    for (int it = 0; it < 8 && s > 0; ++it) {
        const double ft = t_of_s_closed(energy, lam, s) - t;
        const double dt = (std::sqrt(energy) / lam) * std::sqrt(1 + 2 * lam / (energy * s));
        const double step = ft / dt;
        if (!std::isfinite(step)) break;
        double s_new = s - step;
        if (s_new <= lo || s_new >= hi) break;
        s = s_new;
        if (std::abs(ft) < 1e-12 * std::max(1.0, t)) break;
    }
    return s;
}

Trajectory reparametrize_t(const Trajectory& s_traj, const Configuration& cfg) {
    const Case5Parameters par = case5_parameters(cfg);
    Trajectory out = s_traj;
    for (std::size_t k = 0; k < out.t.size(); ++k) {
        if (out.t[k] <= 0) throw std::invalid_argument("reparametrize_t: s-samples must be positive");
        out.t[k] = t_of_s_closed(par.energy, par.lam, s_traj.t[k]);
    }
    return out;
}

Trajectory full_flow_check(const Configuration& cfg, const SuperpotentialAnsatz& f,
                           std::span<const double> q0, double t0, double t1,
                           const IntegratorOptions& opts, const std::vector<double>* p0_override) {
    SuperpotentialAnsatz fa = f;
    fa.normalize(cfg.r);
    const int m = cfg.r + 1;
    const ExpPoly h = hamiltonian(cfg);
    const auto dq = gradient_q(h);
    const auto dp = gradient_p(h);

    std::vector<double> y0(2 * m);
    for (int i = 0; i < m; ++i) y0[i] = q0[i];
    {
        std::vector<double> p0 = p0_override ? *p0_override : fa.gradient_at(q0);
        for (int i = 0; i < m; ++i) y0[m + i] = p0[i];
    }

    RhsFn rhs = [&, m](double, std::span<const double> y, std::span<double> dy) {
        std::span<const double> q = y.subspan(0, m);
        std::span<const double> p = y.subspan(m, m);
        for (int i = 0; i < m; ++i) {
            dy[i] = dp[i].eval(p, q);        // dq/dt =  dH/dp
            dy[m + i] = -dq[i].eval(p, q);   // dp/dt = -dH/dq
        }
    };
    Trajectory traj = integrate_ode(rhs, std::move(y0), t0, t1, opts);
    traj.hamiltonian.reserve(traj.size());
    traj.graph_defect.reserve(traj.size());
    for (const auto& y : traj.y) {
        std::span<const double> q(y.data(), m);
        std::span<const double> p(y.data() + m, m);
        traj.hamiltonian.push_back(h.eval(p, q));
        auto grad = fa.gradient_at(q);
        double defect = 0;
        for (int i = 0; i < m; ++i) defect += (p[i] - grad[i]) * (p[i] - grad[i]);
        traj.graph_defect.push_back(std::sqrt(defect));
    }
    return traj;
}

nlohmann::json run_manifest(const std::string& command, const Configuration& cfg,
                            const nlohmann::json& parameters) {
    nlohmann::json j = run_manifest(command, parameters);
    j["configuration_hash"] = config_hash(cfg);
    return j;
}

nlohmann::json run_manifest(const std::string& command, const nlohmann::json& parameters) {
    nlohmann::json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["tool_version"] = "0.1.0";
    j["wall_time_s"] = 0.0;  // filled in at emission
    return j;
}

}  // namespace cohomflow
