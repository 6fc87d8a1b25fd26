#include "cohomflow/solutions.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cohomflow {

ClosedFormSolution explicit_case5(double energy, double a_coeff) {
    if (energy <= 0) throw std::invalid_argument("explicit_case5: E must be positive");
    if (a_coeff >= 0) throw std::invalid_argument("explicit_case5: A must be negative");
    ClosedFormSolution sol;
    sol.name = "explicit-case5";
    sol.energy = energy;
    sol.a_coeff = a_coeff;
    sol.lam = 4;
    const double E = energy, A = a_coeff;
    auto s_of_t = [E](double t) { return s_of_t_closed(E, 4.0, t); };
    sol.s_of_t = s_of_t;
    sol.t_of_s = [E](double s) { return t_of_s_closed(E, 4.0, s); };
    sol.g1 = [s_of_t](double t) { return std::sqrt(s_of_t(t)); };
    sol.g2 = [s_of_t, E](double t) { return std::sqrt(s_of_t(t) + 8.0 / E); };
    sol.u = [s_of_t, E](double t) { return -E * s_of_t(t) / 4.0; };
    sol.f = [s_of_t, E, A](double t) {
        const double s = s_of_t(t);
        if (s == 0) return 0.0;
        return 4.0 / std::sqrt(-2.0 * A * E) * std::pow(1.0 + 8.0 / (E * s), -0.5);
    };
    return sol;
}

std::string solution_csv(const ClosedFormSolution& sol, const std::vector<double>& ts) {
    std::ostringstream os;
    os.precision(15);
    os << "t,f,g1,g2,u\n";
    for (double t : ts)
        os << t << "," << sol.f(t) << "," << sol.g1(t) << "," << sol.g2(t) << "," << sol.u(t)
           << "\n";
    return os.str();
}

BryantN1Solution bryant_n1(double a, double energy, double lam, double t_max, double step,
                           double tol, double u0) {
    if (a == 0) throw std::invalid_argument("bryant_n1: a must be nonzero");
    BryantN1Solution sol;
    sol.a = a;
    sol.energy = energy;
    sol.lam = lam;
    sol.u0 = u0;
    RhsFn rhs = [a, energy, lam](double, std::span<const double> y, std::span<double> dy) {
        const double h = y[0], u = y[1];
        dy[0] = -0.5 * a * h * h + (lam * u + energy - 2 * lam) / (2 * a);
        dy[1] = -a * h;
    };
    std::vector<double> samples;
    const long nsteps = std::lround(t_max / step);
    for (long k = 0; k <= nsteps; ++k) samples.push_back(k * step);
    IntegratorOptions opts;
    opts.tol = tol;
    sol.traj = integrate_ode(rhs, {0.0, u0}, 0.0, t_max, opts, &samples);
    return sol;
}

nlohmann::json smoothness_report_to_json(const SmoothnessReport& rep) {
    nlohmann::json j;
    j["all_pass"] = rep.all_pass;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : rep.checks)
        j["checks"].push_back({{"quantity", c.quantity},
                               {"fitted", c.fitted},
                               {"required", c.required},
                               {"tolerance", c.tolerance},
                               {"pass", c.pass}});
    return j;
}

namespace {

// One-sided cubic fit through samples at h, 2h, 3h, 4h; returns the four
// Taylor coefficient estimates.
std::array<double, 4> cubic_fit(const std::function<double(double)>& fn, double h) {
    double m[4][5];
    for (int row = 0; row < 4; ++row) {
        const double t = (row + 1) * h;
        double pw = 1;
        for (int col = 0; col < 4; ++col) {
            m[row][col] = pw;
            pw *= t;
        }
        const double v = fn(t);
        if (!std::isfinite(v)) throw std::domain_error("smoothness_check: evaluator blowup near 0");
        m[row][4] = v;
    }
    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r2 = col + 1; r2 < 4; ++r2)
            if (std::abs(m[r2][col]) > std::abs(m[piv][col])) piv = r2;
        std::swap(m[col], m[piv]);
        for (int r2 = col + 1; r2 < 4; ++r2) {
            const double f = m[r2][col] / m[col][col];
            for (int cc = col; cc < 5; ++cc) m[r2][cc] -= f * m[col][cc];
        }
    }
    std::array<double, 4> x{};
    for (int col = 3; col >= 0; --col) {
        double sum = m[col][4];
        for (int cc = col + 1; cc < 4; ++cc) sum -= m[col][cc] * x[cc];
        x[col] = sum / m[col][col];
    }
    return x;
}

// Richardson extrapolation of three estimates at h, h/2, h/4 (Aitken form,
// robust to the unknown leading error order).
double extrapolate(double e1, double e2, double e3) {
    const double d1 = e2 - e1, d2 = e3 - e2;
    const double den = d2 - d1;
    if (std::abs(den) < 1e-14 * (std::abs(d1) + std::abs(d2) + 1e-300)) return e3;
    const double r = e3 + d2 * d2 / (-den);
    return std::isfinite(r) ? r : e3;
}

}  // namespace

SmoothnessReport smoothness_check(const ClosedFormSolution& sol) {
    const double steps[3] = {1e-2, 5e-3, 2.5e-3};
    auto fit = [&](const std::function<double(double)>& fn) {
        std::array<std::array<double, 4>, 3> est;
        for (int k = 0; k < 3; ++k) est[k] = cubic_fit(fn, steps[k]);
        std::array<double, 4> out{};
        for (int c = 0; c < 4; ++c) out[c] = extrapolate(est[0][c], est[1][c], est[2][c]);
        return out;
    };

    const auto cf = fit(sol.f);
    const auto cg1 = fit(sol.g1);
    const auto cg2 = fit(sol.g2);
    const auto cu = fit(sol.u);

    SmoothnessReport rep;
    auto push = [&rep](const std::string& name, double fitted, double required) {
        SmoothnessCheck c;
        c.quantity = name;
        c.fitted = fitted;
        c.required = required;
        c.pass = std::abs(fitted - required) <= c.tolerance;
        rep.checks.push_back(c);
    };
    // f odd through order 2 with unit slope.
    push("f(0)", cf[0], 0.0);
    push("f'(0)", cf[1], 1.0);
    push("f''(0)", cf[2], 0.0);
    // g1 odd with g1'(0)^2 = 1/2.
    push("g1(0)", cg1[0], 0.0);
    push("g1'(0)^2", cg1[1] * cg1[1], 0.5);
    push("g1''(0)", cg1[2], 0.0);
    // g2 even.
    push("g2'(0)", cg2[1], 0.0);
    // u even with u(0) = 0.
    push("u(0)", cu[0], 0.0);
    push("u'(0)", cu[1], 0.0);
    rep.all_pass = true;
    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

}  // namespace cohomflow
