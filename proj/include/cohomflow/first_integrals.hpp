#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohomflow/exp_poly.hpp"
#include "cohomflow/radical.hpp"
#include "cohomflow/weight_config.hpp"

namespace cohomflow {

/// Outcome of factoring the kinetic form as J = (c . grad J) theta with a
/// constant vector c and a linear form theta.  Feasible exactly when r = 1,
/// where c = (-(n+sqrt n)/2, 1) and theta = -(p/sqrt n + (sqrt n - 1)/2 phi).
struct FactorizationResult {
    bool feasible = false;
    std::vector<RadicalSum> c;  // length r+1 when feasible
    RadicalSum theta_p;         // theta = theta_p * p + theta_phi * phi
    RadicalSum theta_phi;
    bool identity_verified = false;       // J - (c.grad J) theta == 0, exact
    std::vector<std::string> certificate;  // contradicted equations for r >= 2
};

FactorizationResult factor_J(const Configuration& cfg);

nlohmann::json factorization_to_json(const FactorizationResult& res);

/// Generalised-first-integral verdict: bracket = {F, H}, and phi with
/// bracket = phi * H when the exact division succeeds.
struct GFIReport {
    ExpPoly bracket;
    std::optional<ExpPoly> phi;
    bool is_gfi = false;

    GFIReport() : bracket(1) {}
};

GFIReport verify_gfi(const Configuration& cfg, const ExpPoly& F);

nlohmann::json gfi_report_to_json(const GFIReport& rep);

/// Exponents of the two-vector first-integral construction on the round
/// single-summand orbit (W~ = {0, (-1,0)}): d.grad theta = -1 and
/// (d+w).grad theta = -(sqrt n - 1)/sqrt n give s' = 1 and
/// s = sqrt(n)/(sqrt(n)-1); theta^s stays polynomial only when s is a
/// positive integer, and the functional-equation analysis admits the
/// construction only at n = 4.
struct TwoVectorExponents {
    Rat s_prime;
    RadicalSum s;
    std::optional<Rat> s_rational;  // present when n is a perfect square
    bool integral_s = false;
    RadicalSum d_grad_theta;
    RadicalSum dw_grad_theta;
    bool construction_known_feasible = false;  // true only at n = 4
};

TwoVectorExponents two_vector_exponents(long n);

}  // namespace cohomflow
