#include "cohomflow/exp_poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cohomflow {

PolyCoeff PolyCoeff::constant(int nvars, const Rat& c) {
    PolyCoeff p(nvars);
    p.add_term(Monomial(nvars, 0), c);
    return p;
}

PolyCoeff PolyCoeff::variable(int nvars, int index) {
    if (index < 0 || index >= nvars) throw std::invalid_argument("PolyCoeff: bad variable index");
    Monomial m(nvars, 0);
    m[index] = 1;
    PolyCoeff p(nvars);
    p.add_term(m, Rat(1));
    return p;
}

bool PolyCoeff::is_constant() const {
    if (terms_.empty()) return true;
    if (terms_.size() != 1) return false;
    const auto& m = terms_.begin()->first;
    return std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
}

Rat PolyCoeff::constant_value() const {
    Monomial zero(nvars_, 0);
    auto it = terms_.find(zero);
    return it == terms_.end() ? Rat(0) : it->second;
}

int PolyCoeff::total_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (int e : m) s += e;
        d = std::max(d, s);
    }
    return d;
}

int PolyCoeff::degree_in(int var) const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m[var]);
    return d;
}

void PolyCoeff::add_term(const Monomial& m, const Rat& c) {
    if (static_cast<int>(m.size()) != nvars_)
        throw std::invalid_argument("PolyCoeff: monomial arity mismatch");
    if (c.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

PolyCoeff PolyCoeff::operator+(const PolyCoeff& o) const {
    PolyCoeff out = *this;
    for (const auto& [m, c] : o.terms_) out.add_term(m, c);
    return out;
}

PolyCoeff PolyCoeff::operator-(const PolyCoeff& o) const {
    PolyCoeff out = *this;
    for (const auto& [m, c] : o.terms_) out.add_term(m, -c);
    return out;
}

PolyCoeff PolyCoeff::operator*(const PolyCoeff& o) const {
    PolyCoeff out(nvars_);
    for (const auto& [m1, c1] : terms_) {
        for (const auto& [m2, c2] : o.terms_) {
            Monomial m(nvars_);
            for (int i = 0; i < nvars_; ++i) m[i] = m1[i] + m2[i];
            out.add_term(m, c1 * c2);
        }
    }
    return out;
}

PolyCoeff PolyCoeff::operator-() const {
    PolyCoeff out(nvars_);
    for (const auto& [m, c] : terms_) out.add_term(m, -c);
    return out;
}

PolyCoeff PolyCoeff::scaled(const Rat& s) const {
    PolyCoeff out(nvars_);
    if (s.is_zero()) return out;
    for (const auto& [m, c] : terms_) out.add_term(m, c * s);
    return out;
}

PolyCoeff PolyCoeff::derivative(int var) const {
    PolyCoeff out(nvars_);
    for (const auto& [m, c] : terms_) {
        if (m[var] == 0) continue;
        Monomial d = m;
        d[var] -= 1;
        out.add_term(d, c * Rat(m[var]));
    }
    return out;
}

double PolyCoeff::eval(std::span<const double> vars) const {
    if (static_cast<int>(vars.size()) != nvars_)
        throw std::invalid_argument("PolyCoeff: eval arity mismatch");
    double out = 0;
    for (const auto& [m, c] : terms_) {
        double t = c.to_double();
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < m[i]; ++k) t *= vars[i];
        out += t;
    }
    return out;
}

std::optional<PolyCoeff> PolyCoeff::divide_exact(const PolyCoeff& divisor) const {
    if (divisor.is_zero()) return std::nullopt;
    if (is_zero()) return PolyCoeff(nvars_);
    // Leading-term reduction with respect to the map ordering.  A single
    // divisor is a Groebner basis of the ideal it generates, so reduction
    // reaches zero exactly when the division is possible.
    const auto& lead = *divisor.terms_.rbegin();
    PolyCoeff rem = *this;
    PolyCoeff quot(nvars_);
    int guard = 0;
    while (!rem.is_zero()) {
        if (++guard > 100000) return std::nullopt;
        const auto& rl = *rem.terms_.rbegin();
        Monomial q(nvars_);
        for (int i = 0; i < nvars_; ++i) {
            q[i] = rl.first[i] - lead.first[i];
            if (q[i] < 0) return std::nullopt;
        }
        Rat qc = rl.second / lead.second;
        PolyCoeff qt(nvars_);
        qt.add_term(q, qc);
        quot = quot + qt;
        rem = rem - qt * divisor;
    }
    return quot;
}

std::string PolyCoeff::str(int r) const {
    if (terms_.empty()) return "0";
    auto var_name = [&](int i) -> std::string {
        if (i < r) return "p" + std::to_string(i + 1);
        if (i == r) return "phi";
        if (i < 2 * r + 1) return "q" + std::to_string(i - r);
        return "u";
    };
    std::string s;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        std::string t;
        bool all_zero = std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
        if (all_zero) {
            t = c.str();
        } else {
            if (c == Rat(-1)) t = "-";
            else if (c != Rat(1)) t = c.str() + "*";
            bool firstv = true;
            for (int i = 0; i < nvars_; ++i) {
                for (int k = 0; k < m[i]; ++k) {
                    if (!firstv) t += "*";
                    t += var_name(i);
                    firstv = false;
                }
            }
        }
        if (!first && !t.empty() && t[0] != '-') s += "+";
        s += t;
        first = false;
    }
    return s;
}

void ExpPoly::add_term(const QVec& exponent, const PolyCoeff& coeff) {
    if (static_cast<int>(exponent.size()) != r_ + 1)
        throw std::invalid_argument("ExpPoly: exponent length mismatch");
    if (coeff.nvars() != nvars())
        throw std::invalid_argument("ExpPoly: coefficient arity mismatch");
    if (coeff.is_zero()) return;
    auto it = terms_.find(exponent);
    if (it == terms_.end()) {
        terms_.emplace(exponent, coeff);
    } else {
        PolyCoeff s = it->second + coeff;
        if (s.is_zero()) terms_.erase(it);
        else it->second = std::move(s);
    }
}

ExpPoly ExpPoly::exponential(int r, const QVec& exponent, const PolyCoeff& coeff) {
    ExpPoly f(r);
    f.add_term(exponent, coeff);
    return f;
}

ExpPoly ExpPoly::operator+(const ExpPoly& o) const {
    ExpPoly out = *this;
    for (const auto& [b, p] : o.terms_) out.add_term(b, p);
    return out;
}

ExpPoly ExpPoly::operator-(const ExpPoly& o) const {
    ExpPoly out = *this;
    for (const auto& [b, p] : o.terms_) out.add_term(b, -p);
    return out;
}

ExpPoly ExpPoly::operator*(const ExpPoly& o) const {
    ExpPoly out(r_);
    for (const auto& [b1, p1] : terms_)
        for (const auto& [b2, p2] : o.terms_) out.add_term(qvec_add(b1, b2), p1 * p2);
    return out;
}

ExpPoly ExpPoly::operator-() const {
    ExpPoly out(r_);
    for (const auto& [b, p] : terms_) out.add_term(b, -p);
    return out;
}

ExpPoly ExpPoly::scaled(const Rat& s) const {
    ExpPoly out(r_);
    if (s.is_zero()) return out;
    for (const auto& [b, p] : terms_) out.add_term(b, p.scaled(s));
    return out;
}

double ExpPoly::eval(std::span<const double> p, std::span<const double> q) const {
    if (static_cast<int>(p.size()) != r_ + 1 || static_cast<int>(q.size()) != r_ + 1)
        throw std::invalid_argument("ExpPoly: eval arity mismatch");
    std::vector<double> vars(nvars());
    for (int i = 0; i <= r_; ++i) vars[i] = p[i];
    for (int i = 0; i <= r_; ++i) vars[r_ + 1 + i] = q[i];
    double out = 0;
    for (const auto& [b, poly] : terms_) {
        double dot = 0;
        for (int i = 0; i <= r_; ++i) dot += b[i].to_double() * q[i];
        dot = std::clamp(dot, -700.0, 700.0);
        out += poly.eval(vars) * std::exp(dot);
    }
    return out;
}

std::string ExpPoly::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [b, p] : terms_) {
        if (!first) s += " + ";
        first = false;
        std::string dot;
        for (int i = 0; i <= r_; ++i) {
            if (b[i].is_zero()) continue;
            std::string var = (i == r_) ? "u" : "q" + std::to_string(i + 1);
            std::string coeff = b[i].str();
            if (!dot.empty() && coeff[0] != '-') dot += "+";
            if (coeff == "1") dot += var;
            else if (coeff == "-1") dot += "-" + var;
            else dot += coeff + "*" + var;
        }
        if (dot.empty()) dot = "0";
        s += "(" + p.str(r_) + ")*exp(" + dot + ")";
    }
    return s;
}

ExpPoly hamiltonian(const Configuration& cfg) {
    cfg.validate_wellformed();
    const int r = cfg.r;
    const int nv = 2 * (r + 1);
    const JForm form(cfg.dims);
    const QVec d = form.d_ext();
    const QVec half_d = qvec_scale(Rat(1, 2), d);
    const QVec minus_half_d = qvec_scale(Rat(-1, 2), d);

    ExpPoly h(r);

    // Kinetic term: e^{-d.q/2} J(p,p).
    PolyCoeff jp(nv);
    for (int i = 0; i <= r; ++i) {
        for (int j = 0; j <= r; ++j) {
            if (form.matrix[i][j].is_zero()) continue;
            PolyCoeff::Monomial m(nv, 0);
            m[i] += 1;
            m[j] += 1;
            jp.add_term(m, form.matrix[i][j]);
        }
    }
    h.add_term(minus_half_d, jp);

    // Potential at d/2: -(E - lambda(n+1)) - lambda*u.
    PolyCoeff pot(nv);
    pot.add_term(PolyCoeff::Monomial(nv, 0),
                 -(cfg.energy - cfg.lambda * Rat(cfg.n() + 1)));
    {
        PolyCoeff::Monomial mu(nv, 0);
        mu[nv - 1] = 1;  // u
        pot.add_term(mu, -cfg.lambda);
    }
    h.add_term(half_d, pot);

    // Weight terms at d/2 + w: -A_w.
    for (const auto& w : cfg.weights) {
        QVec b = half_d;
        for (int i = 0; i < r; ++i) b[i] += Rat(w.vec[i]);
        h.add_term(b, PolyCoeff::constant(nv, -w.coefficient));
    }
    return h;
}

std::vector<ExpPoly> gradient_q(const ExpPoly& f) {
    const int r = f.r();
    std::vector<ExpPoly> out(r + 1, ExpPoly(r));
    for (const auto& [b, p] : f.terms()) {
        for (int j = 0; j <= r; ++j) {
            // d/dq_j (P e^{b.q}) = (dP/dq_j + b_j P) e^{b.q}
            PolyCoeff g = p.derivative(r + 1 + j) + p.scaled(b[j]);
            if (!g.is_zero()) out[j].add_term(b, g);
        }
    }
    return out;
}

std::vector<ExpPoly> gradient_p(const ExpPoly& f) {
    const int r = f.r();
    std::vector<ExpPoly> out(r + 1, ExpPoly(r));
    for (const auto& [b, p] : f.terms()) {
        for (int j = 0; j <= r; ++j) {
            PolyCoeff g = p.derivative(j);
            if (!g.is_zero()) out[j].add_term(b, g);
        }
    }
    return out;
}

ExpPoly poisson(const ExpPoly& f, const ExpPoly& g) {
    if (f.r() != g.r()) throw std::invalid_argument("poisson: rank mismatch");
    const int r = f.r();
    auto fq = gradient_q(f), fp = gradient_p(f);
    auto gq = gradient_q(g), gp = gradient_p(g);
    ExpPoly out(r);
    for (int j = 0; j <= r; ++j) out = out + fq[j] * gp[j] - fp[j] * gq[j];
    return out;
}

std::optional<ExpPoly> divides(const ExpPoly& candidate, const ExpPoly& product) {
    if (candidate.is_zero()) return std::nullopt;
    const int r = candidate.r();
    ExpPoly quot(r);
    if (product.is_zero()) return quot;
    if (product.r() != r) return std::nullopt;

    // Lowest exponent of the divisor in lexicographic order; the lowest
    // exponent of any product comes from pairing lowest exponents, so each
    // round determines one quotient term.
    const auto& pivot = *candidate.terms().begin();
    ExpPoly work = product;
    const size_t guard =
        64 * (product.terms().size() + 1) * (candidate.terms().size() + 1);
    for (size_t round = 0; !work.is_zero(); ++round) {
        if (round > guard) return std::nullopt;
        const auto& low = *work.terms().begin();
        QVec z = qvec_sub(low.first, pivot.first);
        auto qc = low.second.divide_exact(pivot.second);
        if (!qc) return std::nullopt;
        ExpPoly term = ExpPoly::exponential(r, z, *qc);
        quot = quot + term;
        work = work - term * candidate;
    }
    if (!(quot * candidate == product)) return std::nullopt;
    return quot;
}

}  // namespace cohomflow
