#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohomflow/superpotential.hpp"
#include "cohomflow/weight_config.hpp"

namespace cohomflow {

struct IntegratorOptions {
    double tol = 1e-10;        // local error tolerance (absolute and relative)
    double max_step = 0.1;
    double initial_step = 0;   // 0 = automatic
    std::size_t max_steps = 4000000;
};

/// Discretely sampled integral curve with optional conservation diagnostics.
struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<double>> y;
    std::vector<double> hamiltonian;   // per sample, when monitored
    std::vector<double> graph_defect;  // per sample, full-flow mode only
    bool truncated = false;
    std::string truncation_reason;

    std::size_t size() const { return t.size(); }
    /// CSV with header "t,q1..qr,u,H,graph_defect" (diagnostic columns when
    /// present).
    std::string to_csv(int r) const;
};

using RhsFn = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with PI step
/// control, safety factor 0.9.  When sample_times is given, steps land on
/// those times exactly and only they are recorded.
Trajectory integrate_ode(const RhsFn& rhs, std::vector<double> y0, double t0, double t1,
                         const IntegratorOptions& opts = {},
                         const std::vector<double>* sample_times = nullptr);

/// One exponential term of the first-order subsystem dq/dt = 2 v^{-1} J grad f.
struct RhsTerm {
    QVec exponent;                          // c - d/2
    std::vector<RadicalSum> coeff_const;    // per component
    std::vector<Rat> coeff_u;               // per component, u-linear part
};

/// The first-order subsystem induced by a verified superpotential; momentum
/// is eliminated through p = grad f, so the right side depends on q alone.
class SubsystemRHS {
public:
    SubsystemRHS(Configuration cfg, SuperpotentialAnsatz ansatz);

    int dim() const { return cfg_.r + 1; }
    const Configuration& config() const { return cfg_; }
    const SuperpotentialAnsatz& ansatz() const { return ansatz_; }
    const std::vector<RhsTerm>& terms() const { return terms_; }

    void operator()(double t, std::span<const double> q, std::span<double> dq) const;

private:
    Configuration cfg_;
    SuperpotentialAnsatz ansatz_;
    std::vector<RhsTerm> terms_;
};

SubsystemRHS build_rhs(const Configuration& cfg, const SuperpotentialAnsatz& f);

/// Integrates the subsystem and records H(q, grad f(q)) per sample.
Trajectory integrate(const SubsystemRHS& rhs, std::span<const double> q0, double t0, double t1,
                     const IntegratorOptions& opts = {});

/// Scalar data of the d=(1,2,2) configuration in the normalised coordinates:
/// lam = A_{(0,-1,0)} = A_{(0,0,-1)} > 0 and A = A_{(1,-2,0)} = A_{(1,0,-2)} < 0.
struct Case5Parameters {
    double energy;
    double lam;
    double a_coeff;
};

/// Validates the case-5 shape (r=3, d=(1,2,2), the four weights, equal
/// normalised coefficients, steady, E>0) and extracts its parameters.
Case5Parameters case5_parameters(const Configuration& cfg);

/// Initial data for the singular initial value problem at the collapsed
/// orbit, taken from the linear solution branch beta1 = s,
/// beta2 = s + 2*lam/E.
struct SingularStart {
    double s0;
    double beta1, beta2;
    double alpha;
    double u0;
    std::vector<double> q;  // (q1,q2,q3,u) at s0
};

SingularStart singular_start_case5(const Configuration& cfg, double s0 = 1e-6);

/// True for the admissible initial pairs of the singular problem; the
/// double root beta1 = beta2 = 0 is rejected.
bool case5_admissible_initial_pair(double energy, double lam, double b1, double b2);

/// Right side of the s-coordinate system for state (beta1, beta2, u).
RhsFn case5_s_system(const Configuration& cfg);

/// Integrates the s-coordinate system from the singular start.
Trajectory integrate_case5_s(const Configuration& cfg, double s0, double s_max,
                             const IntegratorOptions& opts = {},
                             const std::vector<double>* sample_s = nullptr);

/// Closed-form radial reparametrisation
/// t(s) = sqrt(2s/lam) sqrt(1+Es/(2 lam)) + (2/sqrt(E)) arccoth sqrt(1+2 lam/(Es)).
double t_of_s_closed(double energy, double lam, double s);
/// The same time by adaptive quadrature of ds = sqrt(alpha) dt.
double t_of_s_quadrature(double energy, double lam, double s, double tol = 1e-12);
/// Monotone inversion of t(s), bisection polished with Newton steps.
double s_of_t_closed(double energy, double lam, double t);

/// Maps an s-coordinate trajectory to the t coordinate via the closed form.
Trajectory reparametrize_t(const Trajectory& s_traj, const Configuration& cfg);

/// Integrates the full canonical equations from p(0) = grad f(q0) (or the
/// supplied override) and records |H| and the graph defect per sample.
Trajectory full_flow_check(const Configuration& cfg, const SuperpotentialAnsatz& f,
                           std::span<const double> q0, double t0, double t1,
                           const IntegratorOptions& opts = {},
                           const std::vector<double>* p0_override = nullptr);

nlohmann::json run_manifest(const std::string& command, const Configuration& cfg,
                            const nlohmann::json& parameters);
nlohmann::json run_manifest(const std::string& command, const nlohmann::json& parameters);

}  // namespace cohomflow
