#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohomflow/ode_flow.hpp"

namespace cohomflow {

/// Explicit solution data with evaluators in the radial coordinate t; s(t)
/// is obtained by monotone inversion of the closed-form t(s).
struct ClosedFormSolution {
    std::string name;
    double energy = 0;
    double a_coeff = -0.5;  // the type III coefficient A
    double lam = 4;         // normalisation of the surface factors

    std::function<double(double)> f;       // fibre radius f(t)
    std::function<double(double)> g1;      // collapsing sphere radius
    std::function<double(double)> g2;      // surviving sphere radius
    std::function<double(double)> u;       // soliton potential
    std::function<double(double)> s_of_t;  // inverse radial coordinate
    std::function<double(double)> t_of_s;
};

/// The explicit steady soliton over the d=(1,2,2) configuration with lam=4:
/// g1 = sqrt(s), g2 = sqrt(s+8/E), u = -Es/4 and
/// f = (4/sqrt(-2AE)) (1+8/(Es))^{-1/2}.  E must be positive; A defaults to
/// the smooth value -1/2 and may be varied for boundary-condition tests.
ClosedFormSolution explicit_case5(double energy, double a_coeff = -0.5);

/// Sampled export "t,f,g1,g2,u".
std::string solution_csv(const ClosedFormSolution& sol, const std::vector<double>& ts);

/// The two-dimensional soliton family: dh/dt = -(a/2)h^2 + (lam u + E
/// - 2 lam)/(2a), du/dt = -a h from h(0)=0.  The potential is only defined
/// up to an additive gauge; u0 shifts u(0) away from the usual zero choice.
struct BryantN1Solution {
    double a = 1, energy = 0, lam = 0, u0 = 0;
    Trajectory traj;  // state (h, u) on a uniform grid
};

BryantN1Solution bryant_n1(double a, double energy, double lam, double t_max = 10,
                           double step = 1e-3, double tol = 1e-10, double u0 = 0.0);

struct SmoothnessCheck {
    std::string quantity;
    double fitted = 0;
    double required = 0;
    double tolerance = 1e-4;
    bool pass = false;
};

struct SmoothnessReport {
    std::vector<SmoothnessCheck> checks;
    bool all_pass = false;
};

nlohmann::json smoothness_report_to_json(const SmoothnessReport& rep);

/// Boundary-condition verification at the singular orbit: one-sided Taylor
/// coefficients through order 3 by Richardson-extrapolated fits at steps
/// {1e-2, 5e-3, 2.5e-3}; parity operationalised as vanishing of the
/// appropriate coefficients.  Checks f(0)=0, f'(0)=1, f''(0)=0, g1(0)=0,
/// g1'(0)^2=1/2, g1''(0)=0, g2'(0)=0, u(0)=0, u'(0)=0 at tolerance 1e-4.
SmoothnessReport smoothness_check(const ClosedFormSolution& sol);

}  // namespace cohomflow
