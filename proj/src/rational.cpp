#include "cohomflow/rational.hpp"

#include <sstream>

namespace cohomflow {

Rat Rat::parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("Rat: empty string");
    std::string t = s;
    for (char c : t) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '/'))
            throw std::invalid_argument("Rat: bad character in '" + s + "'");
    }
    mpq_class v;
    if (v.set_str(t, 10) != 0)
        throw std::invalid_argument("Rat: cannot parse '" + s + "'");
    if (v.get_den() == 0)
        throw std::invalid_argument("Rat: zero denominator in '" + s + "'");
    v.canonicalize();
    return Rat(std::move(v));
}

std::string Rat::str() const {
    std::ostringstream os;
    os << v_;
    return os.str();
}

std::optional<Rat> Rat::sqrt_if_square() const {
    if (sign() < 0) return std::nullopt;
    mpz_class n = num(), d = den();
    if (mpz_perfect_square_p(n.get_mpz_t()) == 0) return std::nullopt;
    if (mpz_perfect_square_p(d.get_mpz_t()) == 0) return std::nullopt;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    return Rat(mpq_class(rn, rd));
}

QVec qvec_add(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("qvec_add: length mismatch");
    QVec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

QVec qvec_sub(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("qvec_sub: length mismatch");
    QVec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

QVec qvec_scale(const Rat& s, const QVec& a) {
    QVec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

Rat qvec_dot(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("qvec_dot: length mismatch");
    Rat r;
    for (size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}

QVec qvec_from_ints(const std::vector<long>& v) {
    QVec r(v.size());
    for (size_t i = 0; i < v.size(); ++i) r[i] = Rat(v[i]);
    return r;
}

std::string qvec_str(const QVec& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += v[i].str();
    }
    return s + ")";
}

}  // namespace cohomflow
