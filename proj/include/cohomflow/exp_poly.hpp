#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cohomflow/rational.hpp"
#include "cohomflow/weight_config.hpp"

namespace cohomflow {

/// Multivariate polynomial with rational coefficients over the phase-space
/// variables, in canonical (sorted, zero-free) form.  For fixed r the
/// variable layout is
///   index 0..r-1 : p_1..p_r,   index r      : phi,
///   index r+1..2r: q_1..q_r,   index 2r+1   : u.
class PolyCoeff {
public:
    using Monomial = std::vector<int>;

    explicit PolyCoeff(int nvars = 0) : nvars_(nvars) {}
    static PolyCoeff constant(int nvars, const Rat& c);
    static PolyCoeff variable(int nvars, int index);

    int nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rat constant_value() const;  // constant term (zero if absent)
    int total_degree() const;
    int degree_in(int var) const;
    bool uses_var(int var) const { return degree_in(var) > 0; }
    const std::map<Monomial, Rat>& terms() const { return terms_; }

    void add_term(const Monomial& m, const Rat& c);

    PolyCoeff operator+(const PolyCoeff& o) const;
    PolyCoeff operator-(const PolyCoeff& o) const;
    PolyCoeff operator*(const PolyCoeff& o) const;
    PolyCoeff operator-() const;
    PolyCoeff scaled(const Rat& s) const;

    PolyCoeff derivative(int var) const;
    double eval(std::span<const double> vars) const;

    /// Exact quotient if divisor divides *this in the polynomial ring
    /// (single-divisor reduction; complete for principal ideals).
    std::optional<PolyCoeff> divide_exact(const PolyCoeff& divisor) const;

    std::string str(int r) const;  // names variables via the layout above

    friend bool operator==(const PolyCoeff&, const PolyCoeff&) = default;

private:
    int nvars_;
    std::map<Monomial, Rat> terms_;
};

/// Exponential polynomial sum_b P_b(p,phi,q,u) e^{b.q} with rational exponent
/// vectors b of length r+1.  Closed under sums, products, gradients and
/// Poisson brackets.
class ExpPoly {
public:
    explicit ExpPoly(int r = 1) : r_(r) {}

    int r() const { return r_; }
    int nvars() const { return 2 * (r_ + 1); }
    bool is_zero() const { return terms_.empty(); }
    const std::map<QVec, PolyCoeff>& terms() const { return terms_; }

    void add_term(const QVec& exponent, const PolyCoeff& coeff);
    static ExpPoly exponential(int r, const QVec& exponent, const PolyCoeff& coeff);

    ExpPoly operator+(const ExpPoly& o) const;
    ExpPoly operator-(const ExpPoly& o) const;
    ExpPoly operator*(const ExpPoly& o) const;
    ExpPoly operator-() const;
    ExpPoly scaled(const Rat& s) const;

    friend bool operator==(const ExpPoly&, const ExpPoly&) = default;

    /// Evaluation at a numeric phase point (p of length r+1 including phi,
    /// q of length r+1 including u), with exponent clamping at +-700.
    double eval(std::span<const double> p, std::span<const double> q) const;

    /// Plain-text rendering, term := coeff-poly "*exp(" dot-product ")".
    std::string str() const;

private:
    int r_;
    std::map<QVec, PolyCoeff> terms_;
};

/// The Hamiltonian e^{-d.q/2} J(p) - e^{d.q/2}(E - lambda(n+1-u)
/// + sum A_w e^{w.q}) as an ExpPoly.
ExpPoly hamiltonian(const Configuration& cfg);

/// Partial derivatives with respect to the position block (q_1..q_r, u);
/// r+1 entries.
std::vector<ExpPoly> gradient_q(const ExpPoly& f);
/// Partial derivatives with respect to the momentum block (p_1..p_r, phi).
std::vector<ExpPoly> gradient_p(const ExpPoly& f);

/// Poisson bracket over all r+1 conjugate pairs (q_i,p_i) and (u,phi).
ExpPoly poisson(const ExpPoly& f, const ExpPoly& g);

/// Quotient phi with product = phi * candidate, when one exists with
/// polynomial entries; found by lexicographically lowest-exponent
/// elimination and verified exactly before returning.
std::optional<ExpPoly> divides(const ExpPoly& candidate, const ExpPoly& product);

}  // namespace cohomflow
