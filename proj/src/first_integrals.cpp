#include "cohomflow/first_integrals.hpp"

#include <sstream>
#include <stdexcept>

namespace cohomflow {

FactorizationResult factor_J(const Configuration& cfg) {
    cfg.validate_wellformed();
    FactorizationResult res;
    const long n = cfg.n();
    if (cfg.r >= 2) {
        // Matching coefficients of p1^2, p1 p2, p2^2 in
        // J = (c.grad J) theta forces 0 = t2^2/d1 + t1^2/d2.
        std::ostringstream e1, e2, e3, e4;
        e1 << "1/d1 = (2 c1/d1 + c_{r+1}) t1";
        e2 << "0 = (2 c1/d1 + c_{r+1}) t2 + (2 c2/d2 + c_{r+1}) t1";
        e3 << "1/d2 = (2 c2/d2 + c_{r+1}) t2";
        e4 << "combined: 0 = t2^2/d1 + t1^2/d2 with t1, t2 != 0";
        res.certificate = {e1.str(), e2.str(), e3.str(), e4.str()};
        return res;
    }

    res.feasible = true;
    // c = (-(n + sqrt n)/2, 1), theta = -(p/sqrt n + (sqrt n - 1)/2 phi).
    RadicalSum c1;
    c1.add_rational(Rat(-n, 2));
    c1.add_term(Rat(-1, 2), Rat(n));
    RadicalSum c2;
    c2.add_rational(Rat(1));
    res.c = {c1, c2};
    // 1/sqrt(n) = sqrt(n)/n.
    res.theta_p.add_term(Rat(-1, n), Rat(n));
    res.theta_phi.add_term(Rat(-1, 2), Rat(n));
    res.theta_phi.add_rational(Rat(1, 2));

    // Verify J - (c.grad J) theta == 0 by expanding the three monomial
    // coefficients exactly.  grad J = -(2p/n + phi, p + (n-1)/2 phi).
    // c.grad J = a_p p + a_phi phi with:
    RadicalSum a_p = (c1.scaled(Rat(-2, n)) - c2);
    RadicalSum a_phi = (-c1) - c2.scaled(Rat(n - 1, 2));
    // Product coefficients of (a_p p + a_phi phi)(theta_p p + theta_phi phi):
    RadicalSum cpp = a_p * res.theta_p;
    RadicalSum cpphi = a_p * res.theta_phi + a_phi * res.theta_p;
    RadicalSum cphiphi = a_phi * res.theta_phi;
    // J itself: -(p^2/n + p phi + (n-1)/4 phi^2).
    RadicalSum jpp(Rat(-1, n)), jpphi(Rat(-1)), jphiphi(Rat(-(n - 1), 4));
    res.identity_verified =
        (cpp - jpp).is_zero() && (cpphi - jpphi).is_zero() && (cphiphi - jphiphi).is_zero();
    return res;
}

nlohmann::json factorization_to_json(const FactorizationResult& res) {
    nlohmann::json j;
    j["feasible"] = res.feasible;
    if (res.feasible) {
        j["c"] = nlohmann::json::array();
        for (const auto& x : res.c) j["c"].push_back(x.str());
        j["theta"] = {{"p", res.theta_p.str()}, {"phi", res.theta_phi.str()}};
        j["identity_verified"] = res.identity_verified;
    } else {
        j["certificate"] = res.certificate;
    }
    return j;
}

GFIReport verify_gfi(const Configuration& cfg, const ExpPoly& F) {
    GFIReport rep;
    const ExpPoly h = hamiltonian(cfg);
    rep.bracket = poisson(F, h);
    rep.phi = divides(h, rep.bracket);
    rep.is_gfi = rep.phi.has_value();
    return rep;
}

nlohmann::json gfi_report_to_json(const GFIReport& rep) {
    nlohmann::json j;
    j["is_gfi"] = rep.is_gfi;
    j["bracket"] = rep.bracket.str();
    if (rep.phi) j["phi"] = rep.phi->str();
    return j;
}

TwoVectorExponents two_vector_exponents(long n) {
    if (n < 2) throw std::invalid_argument("two_vector_exponents: n >= 2 required");
    TwoVectorExponents out;
    out.s_prime = Rat(1);
    // theta gradients from the r=1 factorisation:
    // d.grad theta = n*theta_p - 2*theta_phi, (d+w).grad theta adds -theta_p.
    Configuration cfg;
    cfg.name = "two-vector";
    cfg.r = 1;
    cfg.dims = {n};
    cfg.weights = {{{-1}, Rat(n * (n - 1))}};
    cfg.energy = Rat(1);
    cfg.lambda = Rat(0);
    auto fac = factor_J(cfg);
    out.d_grad_theta = fac.theta_p.scaled(Rat(n)) + fac.theta_phi.scaled(Rat(-2));
    out.dw_grad_theta = fac.theta_p.scaled(Rat(n - 1)) + fac.theta_phi.scaled(Rat(-2));
    // s = -1/((d+w).grad theta) = sqrt(n)/(sqrt(n)-1) = (n + sqrt n)/(n-1).
    out.s = (-out.dw_grad_theta).inverse();
    out.s_rational = out.s.as_rational();
    out.integral_s = false;
    if (out.s_rational) {
        const Rat& s = *out.s_rational;
        out.integral_s = (s.den() == 1 && s.sign() > 0);
    }
    out.construction_known_feasible = (n == 4);
    return out;
}

}  // namespace cohomflow
