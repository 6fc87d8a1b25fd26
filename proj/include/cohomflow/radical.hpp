#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cohomflow/rational.hpp"

namespace cohomflow {

/// A single-layer radical value sign * sqrt(radicand) with rational radicand.
/// Closed under products and under division by nonzero radicals; equals a
/// rational exactly when the radicand is a perfect square.
struct RadicalScalar {
    int sign = 0;   // -1, 0, +1
    Rat radicand;   // >= 0; zero iff sign == 0

    RadicalScalar() = default;
    RadicalScalar(int s, Rat rad);

    static RadicalScalar from_rational(const Rat& r);
    /// Positive square root of a nonnegative rational.
    static RadicalScalar sqrt_of(const Rat& nonneg);

    bool is_zero() const { return sign == 0; }
    double value() const;
    std::optional<Rat> as_rational() const;
    std::string str() const;

    RadicalScalar operator-() const;
    RadicalScalar operator*(const RadicalScalar& o) const;
    RadicalScalar operator/(const RadicalScalar& o) const;
    /// Multiplication by a rational scalar.
    RadicalScalar scaled(const Rat& r) const;

    friend bool operator==(const RadicalScalar&, const RadicalScalar&) = default;
};

/// A finite sum of rational multiples of square roots, kept with pairwise
/// radicand ratios that are not rational squares so the representation is
/// canonical and the sum is zero exactly when the term list is empty.
class RadicalSum {
public:
    RadicalSum() = default;
    explicit RadicalSum(const Rat& r) { add_rational(r); }
    explicit RadicalSum(const RadicalScalar& s) { add(s); }

    void add_rational(const Rat& r) { add_term(r, Rat(1)); }
    void add(const RadicalScalar& s);
    /// Adds coeff * sqrt(radicand).
    void add_term(const Rat& coeff, const Rat& radicand);
    void add(const RadicalSum& o);
    void sub(const RadicalSum& o);

    RadicalSum operator+(const RadicalSum& o) const;
    RadicalSum operator-(const RadicalSum& o) const;
    RadicalSum operator*(const RadicalSum& o) const;
    RadicalSum operator-() const;
    RadicalSum scaled(const Rat& r) const;

    /// Exact reciprocal for sums of the form a + b*sqrt(n).  Throws on sums
    /// with three or more independent radicands (never produced here).
    RadicalSum inverse() const;

    bool is_zero() const { return terms_.empty(); }
    double value() const;
    std::optional<Rat> as_rational() const;
    /// Collapses to a single radical term when possible.
    std::optional<RadicalScalar> as_radical_scalar() const;
    std::string str() const;

    const std::vector<std::pair<Rat, Rat>>& terms() const { return terms_; }
    friend bool operator==(const RadicalSum&, const RadicalSum&) = default;

private:
    // (coeff, radicand) with coeff != 0, radicand > 0.
    std::vector<std::pair<Rat, Rat>> terms_;
};

}  // namespace cohomflow
