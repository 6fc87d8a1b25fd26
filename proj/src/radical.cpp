#include "cohomflow/radical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cohomflow {

RadicalScalar::RadicalScalar(int s, Rat rad) : sign(s), radicand(std::move(rad)) {
    if (radicand.sign() < 0) throw std::invalid_argument("RadicalScalar: negative radicand");
    if (radicand.is_zero()) sign = 0;
    if (sign == 0) radicand = Rat(0);
    if (sign < -1 || sign > 1) throw std::invalid_argument("RadicalScalar: bad sign");
}

RadicalScalar RadicalScalar::from_rational(const Rat& r) {
    return RadicalScalar(r.sign(), r * r);
}

RadicalScalar RadicalScalar::sqrt_of(const Rat& nonneg) {
    if (nonneg.sign() < 0) throw std::invalid_argument("RadicalScalar: sqrt of negative");
    return RadicalScalar(nonneg.is_zero() ? 0 : 1, nonneg);
}

double RadicalScalar::value() const {
    return sign * std::sqrt(radicand.to_double());
}

std::optional<Rat> RadicalScalar::as_rational() const {
    auto root = radicand.sqrt_if_square();
    if (!root) return std::nullopt;
    return sign < 0 ? -(*root) : *root;
}

std::string RadicalScalar::str() const {
    if (sign == 0) return "0";
    if (auto r = as_rational()) return r->str();
    return std::string(sign < 0 ? "-" : "") + "sqrt(" + radicand.str() + ")";
}

RadicalScalar RadicalScalar::operator-() const { return RadicalScalar(-sign, radicand); }

RadicalScalar RadicalScalar::operator*(const RadicalScalar& o) const {
    return RadicalScalar(sign * o.sign, radicand * o.radicand);
}

RadicalScalar RadicalScalar::operator/(const RadicalScalar& o) const {
    if (o.is_zero()) throw std::invalid_argument("RadicalScalar: division by zero");
    return RadicalScalar(sign * o.sign, radicand / o.radicand);
}

RadicalScalar RadicalScalar::scaled(const Rat& r) const {
    return RadicalScalar(sign * r.sign(), radicand * r * r);
}

void RadicalSum::add(const RadicalScalar& s) {
    if (s.is_zero()) return;
    add_term(Rat(s.sign), s.radicand);
}

void RadicalSum::add_term(const Rat& coeff, const Rat& radicand) {
    if (coeff.is_zero() || radicand.is_zero()) return;
    if (radicand.sign() < 0) throw std::invalid_argument("RadicalSum: negative radicand");
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
        auto ratio_root = (radicand / it->second).sqrt_if_square();
        if (ratio_root) {
            // coeff*sqrt(rad) == (coeff*root)*sqrt(rep)
            it->first += coeff * (*ratio_root);
            if (it->first.is_zero()) terms_.erase(it);
            return;
        }
    }
    terms_.emplace_back(coeff, radicand);
    std::sort(terms_.begin(), terms_.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
}

void RadicalSum::add(const RadicalSum& o) {
    for (const auto& [c, r] : o.terms_) add_term(c, r);
}

void RadicalSum::sub(const RadicalSum& o) {
    for (const auto& [c, r] : o.terms_) add_term(-c, r);
}

RadicalSum RadicalSum::operator+(const RadicalSum& o) const {
    RadicalSum r = *this;
    r.add(o);
    return r;
}

RadicalSum RadicalSum::operator-(const RadicalSum& o) const {
    RadicalSum r = *this;
    r.sub(o);
    return r;
}

RadicalSum RadicalSum::operator*(const RadicalSum& o) const {
    RadicalSum r;
    for (const auto& [c1, r1] : terms_)
        for (const auto& [c2, r2] : o.terms_) r.add_term(c1 * c2, r1 * r2);
    return r;
}

RadicalSum RadicalSum::operator-() const {
    RadicalSum r;
    for (const auto& [c, rad] : terms_) r.add_term(-c, rad);
    return r;
}

RadicalSum RadicalSum::scaled(const Rat& s) const {
    RadicalSum r;
    for (const auto& [c, rad] : terms_) r.add_term(c * s, rad);
    return r;
}

RadicalSum RadicalSum::inverse() const {
    if (terms_.empty()) throw std::invalid_argument("RadicalSum: inverse of zero");
    if (terms_.size() == 1) {
        // 1/(c*sqrt(r)) = (1/(c*r)) * sqrt(r)
        RadicalSum out;
        out.add_term(Rat(1) / (terms_[0].first * terms_[0].second), terms_[0].second);
        return out;
    }
    if (terms_.size() == 2) {
        // 1/(x + y) = (x - y)/(x^2 - y^2) with x^2, y^2 rational.
        const Rat x2 = terms_[0].first * terms_[0].first * terms_[0].second;
        const Rat y2 = terms_[1].first * terms_[1].first * terms_[1].second;
        if (x2 == y2) throw std::invalid_argument("RadicalSum: inverse hit zero norm");
        RadicalSum num;
        num.add_term(terms_[0].first, terms_[0].second);
        num.add_term(-terms_[1].first, terms_[1].second);
        return num.scaled(Rat(1) / (x2 - y2));
    }
    throw std::invalid_argument("RadicalSum: inverse beyond two radicands unsupported");
}

double RadicalSum::value() const {
    double v = 0;
    for (const auto& [c, r] : terms_) v += c.to_double() * std::sqrt(r.to_double());
    return v;
}

std::optional<Rat> RadicalSum::as_rational() const {
    if (terms_.empty()) return Rat(0);
    auto rs = as_radical_scalar();
    if (!rs) return std::nullopt;
    return rs->as_rational();
}

std::optional<RadicalScalar> RadicalSum::as_radical_scalar() const {
    if (terms_.empty()) return RadicalScalar();
    if (terms_.size() != 1) return std::nullopt;
    const auto& [c, r] = terms_[0];
    return RadicalScalar(c.sign(), c * c * r);
}

std::string RadicalSum::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (size_t i = 0; i < terms_.size(); ++i) {
        const auto& [c, r] = terms_[i];
        if (i && c.sign() > 0) s += "+";
        if (r == Rat(1)) {
            s += c.str();
        } else if (c == Rat(1)) {
            s += "sqrt(" + r.str() + ")";
        } else if (c == Rat(-1)) {
            s += "-sqrt(" + r.str() + ")";
        } else {
            s += c.str() + "*sqrt(" + r.str() + ")";
        }
    }
    return s;
}

}  // namespace cohomflow
