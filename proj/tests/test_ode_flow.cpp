#include <doctest.h>

#include <cmath>
#include <random>

#include "cohomflow/ode_flow.hpp"

using namespace cohomflow;

namespace {

Configuration case5_cfg() { return *find_catalog_entry("bbc-case5"); }  // E=8, lam=4, A=-1/2

SuperpotentialAnsatz case5_solved(const Configuration& cfg) {
    auto out = solve_coefficients(cfg, case5_exponent_set(cfg));
    REQUIRE(out.ansatz);
    return *out.ansatz;
}

// The first-order system of the d=(1,2,2) soliton written out literally,
// for E=8, lam=4, A=-1/2.
void newode_reference(std::span<const double> q, std::span<double> dq) {
    const double E = 8, lam = 4, A = -0.5;
    const double rt2A = std::sqrt(-2 * A), rtE = std::sqrt(E);
    const double q1 = q[0], q2 = q[1], q3 = q[2];
    dq[0] = rt2A * std::exp(q1 / 2 - q2) - rt2A * std::exp(q1 / 2 - q3);
    dq[1] = -rtE / 2 * std::exp((q2 - q3) / 2) + rtE / 2 * std::exp((q3 - q2) / 2) +
            lam / rtE * std::exp(-(q2 + q3) / 2) - rt2A * std::exp(q1 / 2 - q2);
    dq[2] = rtE / 2 * std::exp((q2 - q3) / 2) - rtE / 2 * std::exp((q3 - q2) / 2) +
            lam / rtE * std::exp(-(q2 + q3) / 2) + rt2A * std::exp(q1 / 2 - q3);
    dq[3] = -rtE / 2 * std::exp((q2 - q3) / 2) - rtE / 2 * std::exp((q3 - q2) / 2) +
            lam / rtE * std::exp(-(q2 + q3) / 2);
}

}  // namespace

TEST_SUITE("ode_flow") {

TEST_CASE("subsystem reproduces the written-out first-order system") {
    Configuration cfg = case5_cfg();
    SubsystemRHS rhs = build_rhs(cfg, case5_solved(cfg));

    // Symbolic spot checks: the dq1 terms carrying exp(q1/2 - q2) and
    // exp(q1/2 - q3) have coefficients +-sqrt(-2A) = +-1, up to the branch.
    QVec e_y = {Rat(1, 2), Rat(-1), Rat(0), Rat(0)};  // c_y - d/2
    QVec e_x = {Rat(1, 2), Rat(0), Rat(-1), Rat(0)};  // c_x - d/2
    double coeff_y = 0, coeff_x = 0;
    for (const auto& term : rhs.terms()) {
        if (term.exponent == e_y) coeff_y = term.coeff_const[0].value();
        if (term.exponent == e_x) coeff_x = term.coeff_const[0].value();
    }
    CHECK(std::abs(std::abs(coeff_y) - 1.0) < 1e-14);
    CHECK(coeff_x == doctest::Approx(-coeff_y));

    // Numeric agreement on random points (up to the square-root branch of
    // the solver, which flips dq via q2 <-> q3 symmetry; fix by sign).
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    const double flip = coeff_y > 0 ? 1.0 : -1.0;
    for (int it = 0; it < 20; ++it) {
        std::vector<double> q = {U(rng), U(rng), U(rng), U(rng)};
        std::vector<double> qs = q;
        if (flip < 0) std::swap(qs[1], qs[2]);  // branch symmetry swaps the surfaces
        std::vector<double> dq(4), ref(4);
        rhs(0.0, qs, dq);
        newode_reference(q, ref);
        if (flip < 0) std::swap(dq[1], dq[2]);
        for (int j = 0; j < 4; ++j) CHECK(dq[j] == doctest::Approx(ref[j]).epsilon(1e-12));
    }
}

TEST_CASE("polynomial-coefficient subsystem matches the substituted form") {
    // For the one-dimensional family, dq1/dt = -a e^{q1/2}
    // + (lam u + E - 2 lam)/(a e^{q1/2}) and du/dt = -a e^{q1/2}.
    Configuration cfg = *find_catalog_entry("bryant-n1");  // lam=1, E=4
    auto out = solve_coefficients(cfg, {{Rat(1), Rat(-1)}, {Rat(0), Rat(-1)}},
                                  CoeffMode::PolyU);
    REQUIRE(out.ansatz);
    SubsystemRHS rhs = build_rhs(cfg, *out.ansatz);  // gauge a = 1
    const double a = 1, E = 4, lam = 1;
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int it = 0; it < 20; ++it) {
        std::vector<double> q = {U(rng), U(rng)};
        const double h = std::exp(q[0] / 2);
        std::vector<double> dq(2);
        rhs(0.0, q, dq);
        CHECK(dq[0] == doctest::Approx(-a * h + (lam * q[1] + E - 2 * lam) / (a * h))
                           .epsilon(1e-12));
        CHECK(dq[1] == doctest::Approx(-a * h).epsilon(1e-12));
    }
}

TEST_CASE("build_rhs rejects a non-superpotential") {
    Configuration cfg = case5_cfg();
    SuperpotentialAnsatz f = case5_solved(cfg);
    std::get<RadicalScalar>(f.entries[0].second).radicand += Rat(1);
    CHECK_THROWS_AS(build_rhs(cfg, f), std::invalid_argument);
}

TEST_CASE("empty potential gives the constant trajectory") {
    Configuration cfg;
    cfg.r = 1;
    cfg.dims = {2};
    cfg.energy = Rat(0);
    cfg.lambda = Rat(0);
    SuperpotentialAnsatz zero;  // empty exponent set
    SubsystemRHS rhs = build_rhs(cfg, zero);
    std::vector<double> q0 = {0.3, -0.7};
    auto traj = integrate(rhs, q0, 0.0, 5.0);
    for (const auto& y : traj.y) {
        CHECK(y[0] == doctest::Approx(0.3));
        CHECK(y[1] == doctest::Approx(-0.7));
    }
}

TEST_CASE("singular start from the linear solution branch") {
    Configuration cfg = case5_cfg();  // lam = 4, E = 8
    auto st = singular_start_case5(cfg, 1.0);
    CHECK(st.alpha == doctest::Approx(1.0));
    CHECK(st.beta1 == doctest::Approx(1.0));
    CHECK(st.beta2 == doctest::Approx(2.0));
    // beta2 - beta1 = 2 lam / E at every s.
    auto st2 = singular_start_case5(cfg, 1e-6);
    CHECK(st2.beta2 - st2.beta1 == doctest::Approx(1.0));
    CHECK_THROWS_AS(singular_start_case5(cfg, 0.0), std::invalid_argument);
    // Initial pairs: the double root is inadmissible.
    CHECK_FALSE(case5_admissible_initial_pair(8, 4, 0, 0));
    CHECK(case5_admissible_initial_pair(8, 4, 0, 1));
    CHECK(case5_admissible_initial_pair(8, 4, 1, 0));
    CHECK_FALSE(case5_admissible_initial_pair(8, 4, 0.5, 0.1));
    // A steady d=(1,2,2) configuration with a negative surface coefficient
    // has no admissible start.
    Configuration bad = cfg;
    for (auto& w : bad.weights) w.coefficient = -w.coefficient;
    CHECK_THROWS_AS(singular_start_case5(bad, 1e-6), std::invalid_argument);
}

TEST_CASE("s-integration tracks the explicit linear solution") {
    Configuration cfg = case5_cfg();
    IntegratorOptions opts;
    opts.tol = 1e-11;
    auto traj = integrate_case5_s(cfg, 1e-6, 10.0, opts);
    REQUIRE_FALSE(traj.truncated);
    for (std::size_t k = 0; k < traj.size(); k += traj.size() / 7 + 1) {
        const double s = traj.t[k];
        CHECK(std::abs(traj.y[k][0] - s) / std::max(1.0, s) < 1e-8);
        CHECK(std::abs(traj.y[k][1] - (s + 1.0)) / (s + 1.0) < 1e-8);
        CHECK(std::abs(traj.y[k][2] - (-2 * s)) / std::max(1.0, 2 * s) < 1e-8);
    }
}

TEST_CASE("u decreases monotonically along the flow") {
    Configuration cfg = case5_cfg();
    auto traj = integrate_case5_s(cfg, 1e-4, 5.0);
    for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj.y[k][2] < traj.y[k - 1][2]);
}

TEST_CASE("time-translation invariance of the integrated flow") {
    Configuration cfg = case5_cfg();
    IntegratorOptions opts;
    opts.tol = 1e-12;
    std::vector<double> stops = {5.0, 10.0};
    auto full = integrate_case5_s(cfg, 1.0, 10.0, opts, &stops);
    REQUIRE(full.size() == 2);
    // Restart from the recorded midpoint state.
    RhsFn rhs = case5_s_system(cfg);
    auto tail = integrate_ode(rhs, full.y[0], 5.0, 10.0, opts);
    for (int j = 0; j < 3; ++j)
        CHECK(tail.y.back()[j] == doctest::Approx(full.y[1][j]).epsilon(1e-8));
}

TEST_CASE("radial reparametrisation matches the closed form") {
    CHECK(t_of_s_closed(8, 4, 1.0) ==
          doctest::Approx(1.0 + std::log(1.0 + std::sqrt(2.0)) / std::sqrt(2.0))
              .epsilon(1e-12));
    CHECK(t_of_s_closed(8, 4, 1e-20) < 1e-9);
    CHECK(t_of_s_closed(8, 4, 0.0) == 0.0);
    for (double s : {0.1, 1.0, 10.0})
        for (double E : {1.0, 8.0, 32.0})
            CHECK(std::abs(t_of_s_closed(E, 4, s) - t_of_s_quadrature(E, 4, s)) < 1e-10);
}

TEST_CASE("reparametrized trajectory carries strictly increasing t") {
    Configuration cfg = case5_cfg();
    auto traj = integrate_case5_s(cfg, 1e-3, 5.0);
    auto tt = reparametrize_t(traj, cfg);
    REQUIRE(tt.size() == traj.size());
    for (std::size_t k = 1; k < tt.size(); ++k) CHECK(tt.t[k] > tt.t[k - 1]);
    CHECK(tt.t[0] == doctest::Approx(t_of_s_closed(8, 4, 1e-3)));
}

TEST_CASE("radial-coordinate flow from the singular start matches the closed form") {
    Configuration cfg = case5_cfg();
    SuperpotentialAnsatz f = case5_reference_ansatz(cfg);
    SubsystemRHS rhs = build_rhs(cfg, f);
    auto st = singular_start_case5(cfg, 1e-6);
    const double t0 = t_of_s_closed(8, 4, 1e-6);
    const double t1 = t_of_s_closed(8, 4, 10.0);
    IntegratorOptions opts;
    opts.tol = 1e-12;
    auto traj = integrate(rhs, st.q, t0, t1, opts);
    REQUIRE_FALSE(traj.truncated);
    // Endpoint in the original variables: beta1 = e^{q2} = 10, beta2 = 11.
    CHECK(std::abs(std::exp(traj.y.back()[1]) - 10.0) / 10.0 < 1e-8);
    CHECK(std::abs(std::exp(traj.y.back()[2]) - 11.0) / 11.0 < 1e-8);
    CHECK(std::abs(traj.y.back()[3] + 20.0) / 20.0 < 1e-8);
}

TEST_CASE("halving the tolerance at least halves the endpoint error") {
    Configuration cfg = case5_cfg();
    SubsystemRHS rhs = build_rhs(cfg, case5_reference_ansatz(cfg));
    auto st = singular_start_case5(cfg, 1e-3);
    const double t0 = t_of_s_closed(8, 4, 1e-3), t1 = t_of_s_closed(8, 4, 5.0);
    auto endpoint_err = [&](double tol) {
        IntegratorOptions opts;
        opts.tol = tol;
        auto tr = integrate(rhs, st.q, t0, t1, opts);
        return std::max(std::abs(std::exp(tr.y.back()[1]) - 5.0) / 5.0,
                        std::abs(std::exp(tr.y.back()[2]) - 6.0) / 6.0);
    };
    const double coarse = endpoint_err(1e-5);
    const double halved = endpoint_err(5e-6);
    CHECK(halved * 2.0 <= coarse);
    // And over three decades the error drops by far more.
    CHECK(endpoint_err(1e-8) * 100.0 < coarse);
}

TEST_CASE("subsystem conservation: H stays within 10x tolerance") {
    Configuration cfg = case5_cfg();
    SubsystemRHS rhs = build_rhs(cfg, case5_solved(cfg));
    auto st = singular_start_case5(cfg, 1e-3);
    IntegratorOptions opts;
    opts.tol = 1e-10;
    auto traj = integrate(rhs, st.q, 0.0, 3.0, opts);
    REQUIRE_FALSE(traj.truncated);
    REQUIRE(traj.hamiltonian.size() == traj.size());
    for (double h : traj.hamiltonian) CHECK(std::abs(h) < 10 * opts.tol);
}

TEST_CASE("full canonical flow conserves H and the gradient graph") {
    Configuration cfg = case5_cfg();
    SuperpotentialAnsatz f = case5_solved(cfg);
    auto st = singular_start_case5(cfg, 1e-3);
    const double t0 = t_of_s_closed(8, 4, 1e-3);
    const double t1 = t_of_s_closed(8, 4, 5.0);
    IntegratorOptions opts;
    opts.tol = 1e-13;
    auto traj = full_flow_check(cfg, f, st.q, t0, t1, opts);
    REQUIRE_FALSE(traj.truncated);
    double max_h = 0, max_defect = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        max_h = std::max(max_h, std::abs(traj.hamiltonian[k]));
        max_defect = std::max(max_defect, traj.graph_defect[k]);
    }
    CHECK(max_h < 1e-8);
    CHECK(max_defect < 1e-7);

    // Negative control: a perturbed momentum start violates both bounds.
    std::vector<double> p0 = f.gradient_at(st.q);
    p0[0] += 1e-3;
    auto bad = full_flow_check(cfg, f, st.q, t0, t1, opts, &p0);
    double bad_h = 0, bad_defect = 0;
    for (std::size_t k = 0; k < bad.size(); ++k) {
        bad_h = std::max(bad_h, std::abs(bad.hamiltonian[k]));
        bad_defect = std::max(bad_defect, bad.graph_defect[k]);
    }
    CHECK(bad_h > 1e-8);
    CHECK(bad_defect > 1e-7);
}

TEST_CASE("finite-time blowup truncates the trajectory with a reason") {
    // y' = y^2 from y(0) = 1 escapes at t = 1.
    RhsFn rhs = [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[0] * y[0];
    };
    auto traj = integrate_ode(rhs, {1.0}, 0.0, 2.0);
    CHECK(traj.truncated);
    CHECK_FALSE(traj.truncation_reason.empty());
    CHECK(traj.t.back() <= 1.0 + 1e-6);
}

TEST_CASE("evaluation clamps extreme exponents instead of overflowing") {
    Configuration cfg = *find_catalog_entry("bryant5");
    ExpPoly h = hamiltonian(cfg);
    std::vector<double> p = {1.0, 1.0};
    std::vector<double> q = {2000.0, -2000.0};
    CHECK(std::isfinite(h.eval(p, q)));
}

TEST_CASE("csv export carries the documented header") {
    Configuration cfg = case5_cfg();
    SubsystemRHS rhs = build_rhs(cfg, case5_solved(cfg));
    auto st = singular_start_case5(cfg, 0.5);
    auto traj = integrate(rhs, st.q, 0.0, 0.1);
    auto csv = traj.to_csv(cfg.r);
    CHECK(csv.substr(0, csv.find('\n')) == "t,q1,q2,q3,u,H");
}

}  // TEST_SUITE
