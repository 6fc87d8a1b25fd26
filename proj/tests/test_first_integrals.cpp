#include <doctest.h>

#include "cohomflow/first_integrals.hpp"

using namespace cohomflow;

namespace {

Configuration round_orbit(long n) {
    Configuration cfg;
    cfg.name = "round";
    cfg.r = 1;
    cfg.dims = {n};
    if (n > 1) cfg.weights = {{{-1}, Rat(n * (n - 1))}};
    cfg.energy = Rat(1);
    cfg.lambda = Rat(0);
    return cfg;
}

bool sum_equals(const RadicalSum& s, const Rat& r) { return (s - RadicalSum(r)).is_zero(); }

ExpPoly bryant_difference(const Configuration& cfg) {
    ExpPoly f(1);
    PolyCoeff jp(4);
    jp.add_term({2, 0, 0, 0}, Rat(-1, 4));
    jp.add_term({1, 1, 0, 0}, Rat(-1));
    jp.add_term({0, 2, 0, 0}, Rat(-3, 4));
    f.add_term({Rat(-3), Rat(1)}, jp);
    f.add_term({Rat(1), Rat(-1)}, PolyCoeff::constant(4, -cfg.energy));
    f.add_term({Rat(0), Rat(-1)}, PolyCoeff::constant(4, Rat(-12)));
    return f;
}

}  // namespace

TEST_SUITE("first_integrals") {

TEST_CASE("kinetic form factorisation at n=4") {
    auto res = factor_J(round_orbit(4));
    REQUIRE(res.feasible);
    CHECK(res.identity_verified);
    CHECK(sum_equals(res.c[0], Rat(-3)));
    CHECK(sum_equals(res.c[1], Rat(1)));
    CHECK(sum_equals(res.theta_p, Rat(-1, 2)));
    CHECK(sum_equals(res.theta_phi, Rat(-1, 2)));
}

TEST_CASE("kinetic form factorisation at n=1") {
    auto res = factor_J(round_orbit(1));
    REQUIRE(res.feasible);
    CHECK(res.identity_verified);
    CHECK(sum_equals(res.c[0], Rat(-1)));
    CHECK(sum_equals(res.theta_p, Rat(-1)));
    CHECK(sum_equals(res.theta_phi, Rat(0)));
}

TEST_CASE("factorisation identity holds exactly for n=1..12") {
    for (long n = 1; n <= 12; ++n) {
        CAPTURE(n);
        auto res = factor_J(round_orbit(n));
        REQUIRE(res.feasible);
        CHECK(res.identity_verified);
    }
}

TEST_CASE("no factorisation with two or more summands") {
    Configuration cfg = *find_catalog_entry("warped-2x2");
    auto res = factor_J(cfg);
    CHECK_FALSE(res.feasible);
    REQUIRE_FALSE(res.certificate.empty());
    bool names_contradiction = false;
    for (const auto& line : res.certificate)
        if (line.find("t2^2/d1 + t1^2/d2") != std::string::npos) names_contradiction = true;
    CHECK(names_contradiction);
}

TEST_CASE("the Hamiltonian is its own generalised first integral with phi = 0") {
    Configuration cfg = *find_catalog_entry("bryant5");
    auto rep = verify_gfi(cfg, hamiltonian(cfg));
    CHECK(rep.is_gfi);
    REQUIRE(rep.phi);
    CHECK(rep.phi->is_zero());
    CHECK(rep.bracket.is_zero());
}

TEST_CASE("the difference object is a generalised first integral") {
    Configuration cfg = *find_catalog_entry("bryant5");
    auto rep = verify_gfi(cfg, bryant_difference(cfg));
    CHECK(rep.is_gfi);
    REQUIRE(rep.phi);
    REQUIRE(rep.phi->terms().size() == 1);  // single exponential term
    const auto& [b, poly] = *rep.phi->terms().begin();
    CHECK(b == QVec{Rat(-3), Rat(1)});
    CHECK(poly.total_degree() == 1);
}

TEST_CASE("a bare momentum is not a generalised first integral") {
    Configuration cfg = *find_catalog_entry("bryant5");
    ExpPoly f = ExpPoly::exponential(1, {Rat(0), Rat(0)}, PolyCoeff::variable(4, 0));
    auto rep = verify_gfi(cfg, f);
    CHECK_FALSE(rep.is_gfi);
}

TEST_CASE("adding a multiple of H preserves the verdict") {
    Configuration cfg = *find_catalog_entry("bryant5");
    ExpPoly h = hamiltonian(cfg);
    for (const Rat& alpha : {Rat(2, 3), Rat(-5)}) {
        ExpPoly good = bryant_difference(cfg);
        CHECK(verify_gfi(cfg, good).is_gfi ==
              verify_gfi(cfg, good + h.scaled(alpha)).is_gfi);
        ExpPoly badf = ExpPoly::exponential(1, {Rat(0), Rat(0)}, PolyCoeff::variable(4, 0));
        CHECK(verify_gfi(cfg, badf).is_gfi ==
              verify_gfi(cfg, badf + h.scaled(alpha)).is_gfi);
    }
}

TEST_CASE("two-vector exponents") {
    auto e4 = two_vector_exponents(4);
    CHECK(e4.s_prime == Rat(1));
    REQUIRE(e4.s_rational);
    CHECK(*e4.s_rational == Rat(2));
    CHECK(e4.integral_s);
    CHECK(e4.construction_known_feasible);
    CHECK(sum_equals(e4.d_grad_theta, Rat(-1)));

    auto e9 = two_vector_exponents(9);
    REQUIRE(e9.s_rational);
    CHECK(*e9.s_rational == Rat(3, 2));
    CHECK_FALSE(e9.integral_s);

    auto e2 = two_vector_exponents(2);
    CHECK_FALSE(e2.s_rational);
    CHECK_FALSE(e2.integral_s);
    CHECK(sum_equals(e2.d_grad_theta, Rat(-1)));

    CHECK_THROWS_AS(two_vector_exponents(1), std::invalid_argument);
}

TEST_CASE("reports serialise") {
    Configuration cfg = *find_catalog_entry("bryant5");
    auto j = gfi_report_to_json(verify_gfi(cfg, bryant_difference(cfg)));
    CHECK(j.at("is_gfi").get<bool>());
    auto fj = factorization_to_json(factor_J(round_orbit(4)));
    CHECK(fj.at("feasible").get<bool>());
    auto fj2 = factorization_to_json(factor_J(*find_catalog_entry("warped-2x2")));
    CHECK_FALSE(fj2.at("feasible").get<bool>());
}

}  // TEST_SUITE
