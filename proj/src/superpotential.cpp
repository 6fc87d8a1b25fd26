#include "cohomflow/superpotential.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cohomflow {

std::string UPoly::str() const {
    if (is_zero()) return "0";
    std::string s;
    if (!c0.is_zero()) s = c0.str();
    if (!c1.is_zero()) {
        if (!s.empty() && c1.sign() > 0) s += "+";
        if (c1 == Rat(1)) s += "u";
        else if (c1 == Rat(-1)) s += "-u";
        else s += c1.str() + "*u";
    }
    return s;
}

bool coeff_is_zero(const AnsatzCoeff& c) {
    if (const auto* r = std::get_if<RadicalScalar>(&c)) return r->is_zero();
    return std::get<UPoly>(c).is_zero();
}

std::string coeff_str(const AnsatzCoeff& c) {
    if (const auto* r = std::get_if<RadicalScalar>(&c)) return r->str();
    return std::get<UPoly>(c).str();
}

void SuperpotentialAnsatz::normalize(int r) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const QVec zero(static_cast<size_t>(r + 1), Rat(0));
    std::set<QVec> seen;
    steady = true;
    for (const auto& [c, coeff] : entries) {
        if (static_cast<int>(c.size()) != r + 1)
            throw std::invalid_argument("SuperpotentialAnsatz: exponent length mismatch");
        if (c == zero)
            throw std::invalid_argument("SuperpotentialAnsatz: zero vector in C");
        if (coeff_is_zero(coeff))
            throw std::invalid_argument("SuperpotentialAnsatz: zero coefficient");
        if (!seen.insert(c).second)
            throw std::invalid_argument("SuperpotentialAnsatz: duplicate exponent");
        if (const auto* p = std::get_if<UPoly>(&coeff); p && !p->is_constant()) steady = false;
    }
}

std::vector<QVec> SuperpotentialAnsatz::exponents() const {
    std::vector<QVec> out;
    out.reserve(entries.size());
    for (const auto& [c, coeff] : entries) out.push_back(c);
    return out;
}

const AnsatzCoeff* SuperpotentialAnsatz::coefficient_of(const QVec& c) const {
    for (const auto& [e, coeff] : entries)
        if (e == c) return &coeff;
    return nullptr;
}

bool SuperpotentialAnsatz::all_rational() const {
    for (const auto& [c, coeff] : entries) {
        if (const auto* r = std::get_if<RadicalScalar>(&coeff)) {
            if (!r->as_rational()) return false;
        }
    }
    return true;
}

namespace {

// Coefficient as f = B + A*u with numeric parts.
struct NumCoeff {
    double b = 0, a = 0;
};

NumCoeff numeric_view(const AnsatzCoeff& c) {
    if (const auto* r = std::get_if<RadicalScalar>(&c)) return {r->value(), 0.0};
    const auto& p = std::get<UPoly>(c);
    return {p.c0.to_double(), p.c1.to_double()};
}

}  // namespace

std::vector<double> SuperpotentialAnsatz::gradient_at(std::span<const double> q) const {
    const int m = static_cast<int>(q.size());
    const double u = q[m - 1];
    std::vector<double> g(m, 0.0);
    for (const auto& [c, coeff] : entries) {
        double dot = 0;
        for (int i = 0; i < m; ++i) dot += c[i].to_double() * q[i];
        const double e = std::exp(std::clamp(dot, -700.0, 700.0));
        const NumCoeff v = numeric_view(coeff);
        const double fc = v.b + v.a * u;
        for (int i = 0; i < m; ++i) g[i] += c[i].to_double() * fc * e;
        g[m - 1] += v.a * e;  // product rule for the u-dependence of f_c
    }
    return g;
}

double SuperpotentialAnsatz::value_at(std::span<const double> q) const {
    const int m = static_cast<int>(q.size());
    const double u = q[m - 1];
    double f = 0;
    for (const auto& [c, coeff] : entries) {
        double dot = 0;
        for (int i = 0; i < m; ++i) dot += c[i].to_double() * q[i];
        const NumCoeff v = numeric_view(coeff);
        f += (v.b + v.a * u) * std::exp(std::clamp(dot, -700.0, 700.0));
    }
    return f;
}

nlohmann::json ansatz_to_json(const SuperpotentialAnsatz& f) {
    nlohmann::json j;
    j["steady"] = f.steady;
    j["entries"] = nlohmann::json::array();
    for (const auto& [c, coeff] : f.entries) {
        nlohmann::json e;
        e["c"] = nlohmann::json::array();
        for (const auto& x : c) e["c"].push_back(x.str());
        if (const auto* r = std::get_if<RadicalScalar>(&coeff)) {
            e["coeff"] = {{"sign", r->sign}, {"radicand", r->radicand.str()}};
        } else {
            const auto& p = std::get<UPoly>(coeff);
            e["coeff"] = {{"u_poly", {{"const", p.c0.str()}, {"u", p.c1.str()}}}};
        }
        j["entries"].push_back(std::move(e));
    }
    return j;
}

SuperpotentialAnsatz ansatz_from_json(const nlohmann::json& j, int r) {
    SuperpotentialAnsatz f;
    try {
        for (const auto& e : j.at("entries")) {
            QVec c;
            for (const auto& x : e.at("c")) c.push_back(Rat::parse(x.get<std::string>()));
            const auto& cj = e.at("coeff");
            if (cj.contains("u_poly")) {
                UPoly p{Rat::parse(cj.at("u_poly").at("const").get<std::string>()),
                        Rat::parse(cj.at("u_poly").at("u").get<std::string>())};
                f.entries.emplace_back(std::move(c), p);
            } else {
                RadicalScalar s(cj.at("sign").get<int>(),
                                Rat::parse(cj.at("radicand").get<std::string>()));
                f.entries.emplace_back(std::move(c), s);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("ansatz schema: ") + e.what());
    }
    f.normalize(r);
    return f;
}

double ResidualPoly::value_at(double u) const {
    double v = 0;
    for (const auto& [deg, sum] : coeff) v += sum.value() * std::pow(u, deg);
    return v;
}

std::string ResidualPoly::str() const {
    if (coeff.empty()) return "0";
    std::string s;
    for (const auto& [deg, sum] : coeff) {
        if (!s.empty()) s += " + ";
        s += "(" + sum.str() + ")";
        if (deg == 1) s += "*u";
        else if (deg > 1) s += "*u^" + std::to_string(deg);
    }
    return s;
}

nlohmann::json condition_report_to_json(const ConditionReport& rep) {
    nlohmann::json j;
    j["satisfied"] = rep.satisfied;
    j["residuals"] = nlohmann::json::object();
    for (const auto& [b, res] : rep.residuals)
        j["residuals"][qvec_str(b)] = {{"residual", res.str()}, {"value", res.value_at(0.0)}};
    j["violated_b"] = nlohmann::json::array();
    for (const auto& b : rep.violated_b) j["violated_b"].push_back(qvec_str(b));
    return j;
}

namespace {

// u-polynomial with exact radical-sum coefficients.
struct URPoly {
    std::map<int, RadicalSum> c;
    void add(int deg, const RadicalSum& v) {
        if (v.is_zero()) return;
        auto [it, fresh] = c.try_emplace(deg, v);
        if (!fresh) {
            it->second.add(v);
            if (it->second.is_zero()) c.erase(it);
        }
    }
    bool is_zero() const { return c.empty(); }
};

// Exact coefficient view f = B + A*u.
struct CoeffView {
    RadicalSum B, A;
};

CoeffView exact_view(const AnsatzCoeff& c) {
    CoeffView v;
    if (const auto* r = std::get_if<RadicalScalar>(&c)) {
        v.B.add(*r);
    } else {
        const auto& p = std::get<UPoly>(c);
        v.B.add_rational(p.c0);
        v.A.add_rational(p.c1);
    }
    return v;
}

QVec unit_u_vector(int r) {
    QVec e(static_cast<size_t>(r + 1), Rat(0));
    e[r] = Rat(1);
    return e;
}

}  // namespace

ConditionReport check(const Configuration& cfg, const SuperpotentialAnsatz& f_in) {
    cfg.validate_wellformed();
    SuperpotentialAnsatz f = f_in;
    f.normalize(cfg.r);

    const JForm form = cfg.jform();
    const QVec d = form.d_ext();
    const QVec eu = unit_u_vector(cfg.r);
    const int m = static_cast<int>(f.entries.size());

    std::vector<QVec> c(m);
    std::vector<CoeffView> v(m);
    for (int i = 0; i < m; ++i) {
        c[i] = f.entries[i].first;
        v[i] = exact_view(f.entries[i].second);
    }
    const Rat juu = j_eval(form, eu, eu);
    std::vector<Rat> ju(m);
    for (int i = 0; i < m; ++i) ju[i] = j_eval(form, eu, c[i]);

    std::map<QVec, URPoly> lhs;
    auto add_product = [](URPoly& acc, const Rat& k, const RadicalSum& x, const RadicalSum& y,
                          int shift) {
        if (k.is_zero()) return;
        RadicalSum p = (x * y).scaled(k);
        acc.add(shift, p);
    };
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            const Rat jcc = j_eval(form, c[i], c[j]);
            URPoly& acc = lhs[qvec_add(c[i], c[j])];
            const Rat two(2);
            if (i == j) {
                // J(c,c) f^2 + 2 J(e_u,c) A f + J(e_u,e_u) A^2
                add_product(acc, jcc, v[i].B, v[i].B, 0);
                add_product(acc, jcc * two, v[i].A, v[i].B, 1);
                add_product(acc, jcc, v[i].A, v[i].A, 2);
                add_product(acc, ju[i] * two, v[i].A, v[i].B, 0);
                add_product(acc, ju[i] * two, v[i].A, v[i].A, 1);
                add_product(acc, juu, v[i].A, v[i].A, 0);
            } else {
                // Ordered pairs (i,j) and (j,i) combined.
                add_product(acc, jcc * two, v[i].B, v[j].B, 0);
                add_product(acc, jcc * two, v[i].A, v[j].B, 1);
                add_product(acc, jcc * two, v[i].B, v[j].A, 1);
                add_product(acc, jcc * two, v[i].A, v[j].A, 2);
                add_product(acc, ju[j] * two, v[i].A, v[j].B, 0);
                add_product(acc, ju[j] * two, v[i].A, v[j].A, 1);
                add_product(acc, ju[i] * two, v[j].A, v[i].B, 0);
                add_product(acc, ju[i] * two, v[j].A, v[i].A, 1);
                add_product(acc, juu * two, v[i].A, v[j].A, 0);
            }
        }
    }

    // Right-hand sides: A_w at d+w, E - lambda(n+1) + lambda u at d, 0 else.
    std::map<QVec, URPoly> rhs;
    {
        URPoly& at_d = rhs[d];
        at_d.add(0, RadicalSum(cfg.energy - cfg.lambda * Rat(cfg.n() + 1)));
        at_d.add(1, RadicalSum(cfg.lambda));
        for (const auto& w : cfg.weights) {
            QVec b = d;
            for (int i = 0; i < cfg.r; ++i) b[i] += Rat(w.vec[i]);
            rhs[b].add(0, RadicalSum(w.coefficient));
        }
    }

    ConditionReport rep;
    std::set<QVec> bs;
    for (const auto& [b, p] : lhs) bs.insert(b);
    for (const auto& [b, p] : rhs) bs.insert(b);
    for (const auto& b : bs) {
        URPoly res;
        if (auto it = lhs.find(b); it != lhs.end()) res = it->second;
        if (auto it = rhs.find(b); it != rhs.end())
            for (const auto& [deg, val] : it->second.c) res.add(deg, -val);
        ResidualPoly rp;
        rp.coeff = res.c;
        if (!rp.is_zero()) rep.violated_b.push_back(b);
        rep.residuals.emplace(b, std::move(rp));
    }
    rep.satisfied = rep.violated_b.empty();
    return rep;
}

ExpPoly hamiltonian_on_gradient_graph(const Configuration& cfg, const SuperpotentialAnsatz& f_in) {
    SuperpotentialAnsatz f = f_in;
    f.normalize(cfg.r);
    if (!f.all_rational())
        throw std::invalid_argument("hamiltonian_on_gradient_graph: rational coefficients required");
    const int r = cfg.r;
    const int nv = 2 * (r + 1);
    const int u_var = nv - 1;

    // grad f as exponential polynomials (rational coefficients).
    std::vector<ExpPoly> grad(r + 1, ExpPoly(r));
    for (const auto& [c, coeff] : f.entries) {
        UPoly p;
        if (const auto* rs = std::get_if<RadicalScalar>(&coeff)) p = UPoly{*rs->as_rational(), Rat(0)};
        else p = std::get<UPoly>(coeff);
        PolyCoeff fc(nv);
        fc.add_term(PolyCoeff::Monomial(nv, 0), p.c0);
        PolyCoeff::Monomial mu(nv, 0);
        mu[u_var] = 1;
        fc.add_term(mu, p.c1);
        for (int j = 0; j <= r; ++j) {
            PolyCoeff g = fc.scaled(c[j]);
            if (j == r) g = g + PolyCoeff::constant(nv, p.c1);
            if (!g.is_zero()) grad[j].add_term(c, g);
        }
    }

    const ExpPoly h = hamiltonian(cfg);
    ExpPoly out(r);
    for (const auto& [b, poly] : h.terms()) {
        for (const auto& [mono, coef] : poly.terms()) {
            PolyCoeff::Monomial rest = mono;
            for (int j = 0; j <= r; ++j) rest[j] = 0;  // strip momentum variables
            PolyCoeff base(nv);
            base.add_term(rest, coef);
            ExpPoly acc = ExpPoly::exponential(r, b, base);
            for (int j = 0; j <= r; ++j)
                for (int k = 0; k < mono[j]; ++k) acc = acc * grad[j];
            out = out + acc;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coefficient solver
// ---------------------------------------------------------------------------

namespace {

std::optional<Rat> reconstruct_rational(double x, long max_den = 1000000,
                                        double tol = 1e-8) {
    if (!std::isfinite(x)) return std::nullopt;
    if (std::abs(x) < 1e-12) return Rat(0);
    // Continued fraction expansion.
    double v = x;
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(v);
        if (fl > 1e17 || fl < -1e17) return std::nullopt;
        long a = static_cast<long>(fl);
        long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den || q2 < 0) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double rem = v - fl;
        if (rem < 1e-15) break;
        v = 1.0 / rem;
    }
    if (q1 == 0) return std::nullopt;
    Rat cand(p1, q1);
    if (std::abs(cand.to_double() - x) <= tol * std::max(1.0, std::abs(x))) return cand;
    return std::nullopt;
}

struct PairDatum {
    int i, j;        // i <= j
    Rat jcc;         // J(c_i, c_j)
};

struct EquationData {
    QVec b;
    std::vector<PairDatum> pairs;
    Rat rhs0, rhs1;  // rhs0 + rhs1 * u
};

// Shared exact data for one candidate exponent set.
struct System {
    const Configuration* cfg = nullptr;
    std::vector<QVec> c;       // sorted exponents
    std::vector<Rat> ju;       // J(e_u, c_i)
    Rat juu;
    std::vector<EquationData> eqs;  // sorted by b
    int m() const { return static_cast<int>(c.size()); }
};

System build_system(const Configuration& cfg, std::vector<QVec> C) {
    System s;
    s.cfg = &cfg;
    std::sort(C.begin(), C.end());
    s.c = std::move(C);
    const JForm form = cfg.jform();
    const QVec d = form.d_ext();
    const QVec eu = unit_u_vector(cfg.r);
    s.juu = j_eval(form, eu, eu);
    const int m = s.m();
    s.ju.resize(m);
    for (int i = 0; i < m; ++i) s.ju[i] = j_eval(form, eu, s.c[i]);

    std::map<QVec, EquationData> eqs;
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            QVec b = qvec_add(s.c[i], s.c[j]);
            auto& eq = eqs[b];
            eq.b = b;
            eq.pairs.push_back({i, j, j_eval(form, s.c[i], s.c[j])});
        }
    }
    // Pin the right-hand sides, creating equations for uncovered b's too.
    {
        auto& eq = eqs[d];
        eq.b = d;
        eq.rhs0 = cfg.energy - cfg.lambda * Rat(cfg.n() + 1);
        eq.rhs1 = cfg.lambda;
    }
    for (const auto& w : cfg.weights) {
        QVec b = d;
        for (int i = 0; i < cfg.r; ++i) b[i] += Rat(w.vec[i]);
        auto& eq = eqs[b];
        eq.b = b;
        eq.rhs0 = w.coefficient;
    }
    for (auto& [b, eq] : eqs) s.eqs.push_back(std::move(eq));
    return s;
}

// Gauge directions: linear functionals ell with ell.b = 0 for every pinned b.
// Scaling f_c by t^{ell.c} preserves the system, so |f| at charge-independent
// anchors can be normalised to 1.
std::vector<QVec> gauge_basis(const System& s) {
    std::vector<QVec> rows;
    for (const auto& eq : s.eqs)
        if (!eq.rhs0.is_zero() || !eq.rhs1.is_zero()) rows.push_back(eq.b);
    const int dim = s.cfg->r + 1;
    // Nullspace of the row matrix by Gaussian elimination.
    const int nr = static_cast<int>(rows.size());
    std::vector<std::vector<Rat>> a(nr, std::vector<Rat>(dim));
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < dim; ++j) a[i][j] = rows[i][j];
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < dim && rank < nr; ++col) {
        int piv = -1;
        for (int i = rank; i < nr; ++i)
            if (!a[i][col].is_zero()) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(a[rank], a[piv]);
        Rat inv = Rat(1) / a[rank][col];
        for (int j = 0; j < dim; ++j) a[rank][j] *= inv;
        for (int i = 0; i < nr; ++i) {
            if (i == rank || a[i][col].is_zero()) continue;
            Rat f = a[i][col];
            for (int j = 0; j < dim; ++j) a[i][j] -= f * a[rank][j];
        }
        pivot_col.push_back(col);
        ++rank;
    }
    std::vector<QVec> basis;
    for (int col = 0; col < dim; ++col) {
        if (std::find(pivot_col.begin(), pivot_col.end(), col) != pivot_col.end()) continue;
        QVec v(dim, Rat(0));
        v[col] = Rat(1);
        for (int i = 0; i < rank; ++i) v[pivot_col[i]] = -a[i][col];
        basis.push_back(std::move(v));
    }
    return basis;
}

// Anchor indices: exponents in lexicographically descending order whose
// gauge charges extend the rank.
std::vector<int> gauge_anchors(const System& s, const std::vector<QVec>& basis) {
    if (basis.empty()) return {};
    const int g = static_cast<int>(basis.size());
    std::vector<std::vector<Rat>> charges;  // accepted charge rows
    std::vector<int> anchors;
    for (int i = s.m() - 1; i >= 0; --i) {
        std::vector<Rat> q(g);
        for (int k = 0; k < g; ++k) q[k] = qvec_dot(basis[k], s.c[i]);
        // Does q extend the span of `charges`?
        std::vector<std::vector<Rat>> trial = charges;
        trial.push_back(q);
        // Rank via elimination.
        int rank = 0;
        for (int col = 0; col < g && rank < static_cast<int>(trial.size()); ++col) {
            int piv = -1;
            for (int r2 = rank; r2 < static_cast<int>(trial.size()); ++r2)
                if (!trial[r2][col].is_zero()) { piv = r2; break; }
            if (piv < 0) continue;
            std::swap(trial[rank], trial[piv]);
            for (int r2 = rank + 1; r2 < static_cast<int>(trial.size()); ++r2) {
                if (trial[r2][col].is_zero()) continue;
                Rat f = trial[r2][col] / trial[rank][col];
                for (int cc = col; cc < g; ++cc) trial[r2][cc] -= f * trial[rank][cc];
            }
            ++rank;
        }
        if (rank > static_cast<int>(charges.size())) {
            charges.push_back(q);
            anchors.push_back(i);
        }
        if (static_cast<int>(anchors.size()) == g) break;
    }
    return anchors;
}

// ---- exact peel over radical scalars (constant coefficients) --------------

struct VarState {
    // Exactly one of: free, linked (f_i = factor * f_link), valued.
    std::optional<RadicalScalar> value;
    int link = -1;
    RadicalScalar factor;
};

struct PeelState {
    std::vector<VarState> vars;
    std::optional<QVec> contradiction;
    bool stuck = false;
};

// Resolve variable i to (root, factor) with f_i = factor * f_root, or a value.
std::pair<int, RadicalScalar> resolve(const PeelState& st, int i) {
    RadicalScalar f = RadicalScalar::from_rational(Rat(1));
    while (st.vars[i].link >= 0) {
        f = f * st.vars[i].factor;
        i = st.vars[i].link;
    }
    return {i, f};
}

// a/b collapsed to a single radical, if representable.
std::optional<RadicalScalar> collapse_ratio(const RadicalSum& a, const RadicalSum& b) {
    try {
        return (a * b.inverse()).as_radical_scalar();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

class ConstantPeel {
public:
    ConstantPeel(const System& sys) : sys_(sys) {}

    // DFS over sign branches; returns the first complete assignment that the
    // exact verifier accepts.  Records the first exact contradiction.
    std::optional<std::vector<RadicalScalar>> run(const std::vector<int>& anchors,
                                                  std::optional<QVec>& first_contradiction,
                                                  bool& any_stuck) {
        PeelState st;
        st.vars.assign(sys_.m(), {});
        std::optional<std::vector<RadicalScalar>> found;
        dfs_anchor(st, anchors, 0, found);
        first_contradiction = first_contradiction_;
        any_stuck = any_stuck_;
        return found;
    }

private:
    const System& sys_;
    std::optional<QVec> first_contradiction_;
    bool any_stuck_ = false;

    void note_contradiction(const PeelState& st) {
        if (!first_contradiction_ && st.contradiction) first_contradiction_ = st.contradiction;
    }

    void dfs_anchor(PeelState st, const std::vector<int>& anchors, size_t k,
                    std::optional<std::vector<RadicalScalar>>& found) {
        if (found) return;
        if (k == anchors.size()) {
            dfs_peel(std::move(st), found);
            return;
        }
        // A global sign flip is always a symmetry, so the first anchor can be
        // fixed positive.
        for (int sgn : (k == 0 ? std::vector<int>{1} : std::vector<int>{1, -1})) {
            PeelState st2 = st;
            st2.vars[anchors[k]].value = RadicalScalar::from_rational(Rat(sgn));
            dfs_anchor(std::move(st2), anchors, k + 1, found);
            if (found) return;
        }
    }

    // One pass of the rewriting rules; returns true on progress.  Branch
    // requests are emitted through `branch_var`/`branch_sq`.
    bool pass(PeelState& st, int& branch_var, Rat& branch_sq) {
        branch_var = -1;
        for (const auto& eq : sys_.eqs) {
            if (!eq.rhs1.is_zero()) {  // constant coefficients cannot make u
                st.contradiction = eq.b;
                return false;
            }
            // Rewrite terms through links and values.
            RadicalSum known;
            std::map<int, RadicalSum> linear;                 // root -> coeff
            std::map<std::pair<int, int>, RadicalSum> quad;   // root pair -> coeff
            for (const auto& pd : eq.pairs) {
                if (pd.jcc.is_zero()) continue;
                const Rat k = (pd.i == pd.j) ? pd.jcc : pd.jcc * Rat(2);
                auto [ri, fi] = resolve(st, pd.i);
                auto [rj, fj] = resolve(st, pd.j);
                const auto& vi = st.vars[ri].value;
                const auto& vj = st.vars[rj].value;
                if (vi && vj) {
                    known.add(((*vi * fi) * (*vj * fj)).scaled(k));
                } else if (vi) {
                    linear[rj].add((fj * (*vi * fi)).scaled(k));
                } else if (vj) {
                    linear[ri].add((fi * (*vj * fj)).scaled(k));
                } else {
                    auto key = std::minmax(ri, rj);
                    quad[{key.first, key.second}].add((fi * fj).scaled(k));
                }
            }
            for (auto it = linear.begin(); it != linear.end();)
                it = it->second.is_zero() ? linear.erase(it) : std::next(it);
            for (auto it = quad.begin(); it != quad.end();)
                it = it->second.is_zero() ? quad.erase(it) : std::next(it);

            RadicalSum rhs;
            rhs.add_rational(eq.rhs0);
            rhs.sub(known);

            if (linear.empty() && quad.empty()) {
                if (!rhs.is_zero()) {
                    st.contradiction = eq.b;
                    return false;
                }
                continue;
            }
            if (quad.empty() && linear.size() == 1) {
                // L * f = rhs
                const auto& [root, L] = *linear.begin();
                auto rs = collapse_ratio(rhs, L);
                if (!rs) { st.stuck = true; continue; }
                if (rs->is_zero()) { st.contradiction = eq.b; return false; }
                st.vars[root].value = *rs;
                return true;
            }
            if (linear.empty() && quad.size() == 1) {
                const auto& [key, Q] = *quad.begin();
                if (key.first == key.second) {
                    // Q * f^2 = rhs
                    auto rq = collapse_ratio(rhs, Q);
                    if (!rq) { st.stuck = true; continue; }
                    auto vr = rq->as_rational();
                    if (!vr) { st.stuck = true; continue; }
                    if (vr->sign() < 0 || vr->is_zero()) {
                        st.contradiction = eq.b;
                        return false;
                    }
                    branch_var = key.first;
                    branch_sq = *vr;
                    return true;
                }
                // Q * f_a f_b = rhs
                if (rhs.is_zero()) { st.contradiction = eq.b; return false; }
                continue;  // pure product relation; handled multiplicatively
            }
            if (quad.empty() && linear.size() == 2 && rhs.is_zero()) {
                // L1 f_a + L2 f_b = 0  ->  f_a = -(L2/L1) f_b
                auto it = linear.begin();
                const auto& [ra, La] = *it;
                const auto& [rb, Lb] = *std::next(it);
                auto ratio = collapse_ratio(-Lb, La);
                if (!ratio) { st.stuck = true; continue; }
                if (ratio->is_zero()) { st.contradiction = eq.b; return false; }
                st.vars[ra].link = rb;
                st.vars[ra].factor = *ratio;
                st.vars[ra].value.reset();
                return true;
            }
            if (linear.empty() && quad.size() == 2 && rhs.is_zero()) {
                // Q1 f_a f_x + Q2 f_a f_y = 0 with a shared factor gives a
                // link between the cofactors.
                auto it = quad.begin();
                auto [k1, Q1] = *it;
                auto [k2, Q2] = *std::next(it);
                int shared = -1, x = -1, y = -1;
                for (int s1 : {k1.first, k1.second}) {
                    for (int s2 : {k2.first, k2.second}) {
                        if (s1 == s2) shared = s1;
                    }
                }
                if (shared >= 0) {
                    x = (k1.first == shared) ? k1.second : k1.first;
                    y = (k2.first == shared) ? k2.second : k2.first;
                    if (x == y) {
                        // (Q1+Q2) f_shared f_x = 0 was already merged; skip.
                        continue;
                    }
                    // f_x = -(Q2/Q1) f_y  (dividing out f_shared != 0); when
                    // x == shared the equation is f_a(Q1 f_a + Q2 f_y)=0.
                    auto ratio = collapse_ratio(-Q2, Q1);
                    if (!ratio) { st.stuck = true; continue; }
                    if (ratio->is_zero()) { st.contradiction = eq.b; return false; }
                    if (x != y) {
                        st.vars[x].link = y;
                        st.vars[x].factor = *ratio;
                        st.vars[x].value.reset();
                        return true;
                    }
                }
                st.stuck = true;
                continue;
            }
            // Shared factor between a quadratic and a linear term:
            // f_a (Q f_b + L) = 0 forces f_b = -L/Q.
            if (quad.size() == 1 && linear.size() == 1 && rhs.is_zero()) {
                auto [key, Q] = *quad.begin();
                const auto& [root, L] = *linear.begin();
                int other = -1;
                if (key.first == root) other = key.second;
                else if (key.second == root) other = key.first;
                if (other >= 0) {
                    auto val = collapse_ratio(-L, Q);
                    if (!val) { st.stuck = true; continue; }
                    if (val->is_zero()) { st.contradiction = eq.b; return false; }
                    st.vars[other].value = *val;
                    return true;
                }
            }
            st.stuck = true;
        }
        return false;
    }

    // Multiplicative elimination of the pure product relations
    // f_a f_b = V: integer Gaussian elimination over the exponent lattice
    // with exact value tracking.
    bool multiplicative_pass(PeelState& st, int& branch_var, Rat& branch_sq) {
        branch_var = -1;
        struct Row {
            std::vector<long> e;
            RadicalScalar v;  // product value, nonzero
        };
        std::vector<Row> rows;
        for (const auto& eq : sys_.eqs) {
            if (!eq.rhs1.is_zero()) continue;
            RadicalSum known;
            std::map<std::pair<int, int>, RadicalSum> quad;
            bool other = false;
            for (const auto& pd : eq.pairs) {
                if (pd.jcc.is_zero()) continue;
                const Rat k = (pd.i == pd.j) ? pd.jcc : pd.jcc * Rat(2);
                auto [ri, fi] = resolve(st, pd.i);
                auto [rj, fj] = resolve(st, pd.j);
                const auto& vi = st.vars[ri].value;
                const auto& vj = st.vars[rj].value;
                if (vi && vj) known.add(((*vi * fi) * (*vj * fj)).scaled(k));
                else if (vi || vj) other = true;
                else {
                    auto key = std::minmax(ri, rj);
                    quad[{key.first, key.second}].add((fi * fj).scaled(k));
                }
            }
            if (other || quad.size() != 1) continue;
            RadicalSum rhs;
            rhs.add_rational(eq.rhs0);
            rhs.sub(known);
            auto V = collapse_ratio(rhs, quad.begin()->second);
            if (!V) continue;
            if (V->is_zero()) { st.contradiction = eq.b; return false; }
            Row row;
            row.e.assign(sys_.m(), 0);
            row.e[quad.begin()->first.first] += 1;
            row.e[quad.begin()->first.second] += 1;
            row.v = *V;
            rows.push_back(std::move(row));
        }
        if (rows.empty()) return false;

        auto pow_val = [](const RadicalScalar& v, long k) {
            RadicalScalar out = RadicalScalar::from_rational(Rat(1));
            RadicalScalar base = v;
            long kk = k;
            if (kk < 0) {
                base = RadicalScalar::from_rational(Rat(1)) / base;
                kk = -kk;
            }
            for (long t = 0; t < kk; ++t) out = out * base;
            return out;
        };

        // Eliminate column by column with integer row operations.
        const int m = sys_.m();
        size_t rank_row = 0;
        for (int col = 0; col < m && rank_row < rows.size(); ++col) {
            size_t piv = rank_row;
            while (piv < rows.size() && rows[piv].e[col] == 0) ++piv;
            if (piv == rows.size()) continue;
            std::swap(rows[rank_row], rows[piv]);
            for (size_t i = 0; i < rows.size(); ++i) {
                if (i == rank_row || rows[i].e[col] == 0) continue;
                const long a = rows[rank_row].e[col];
                const long b = rows[i].e[col];
                const long g = std::gcd(std::abs(a), std::abs(b));
                const long fa = b / g, fb = a / g;
                // row_i := fb*row_i - fa*row_rank  (kills column col)
                for (int j = 0; j < m; ++j)
                    rows[i].e[j] = fb * rows[i].e[j] - fa * rows[rank_row].e[j];
                rows[i].v = pow_val(rows[i].v, fb) / pow_val(rows[rank_row].v, fa);
            }
            ++rank_row;
        }
        for (const auto& row : rows) {
            int nz = -1, count = 0;
            for (int j = 0; j < m; ++j)
                if (row.e[j] != 0) { nz = j; ++count; }
            if (count == 0) {
                if (!(row.v == RadicalScalar::from_rational(Rat(1)))) {
                    st.contradiction = sys_.eqs.front().b;
                    // Prefer a pinned b for the certificate if available.
                    for (const auto& eq : sys_.eqs)
                        if (!eq.rhs0.is_zero()) { st.contradiction = eq.b; break; }
                    return false;
                }
                continue;
            }
            if (count > 1) continue;
            const long a = row.e[nz];
            if (a == 1 || a == -1) {
                RadicalScalar val = (a == 1) ? row.v : RadicalScalar::from_rational(Rat(1)) / row.v;
                st.vars[nz].value = val;
                return true;
            }
            if (a == 2 || a == -2) {
                RadicalScalar v2 = (a == 2) ? row.v : RadicalScalar::from_rational(Rat(1)) / row.v;
                auto vr = v2.as_rational();
                if (!vr) { st.stuck = true; continue; }
                if (vr->sign() <= 0) { st.contradiction = sys_.eqs.front().b; return false; }
                branch_var = nz;
                branch_sq = *vr;
                return true;
            }
            st.stuck = true;
        }
        return false;
    }

    void dfs_peel(PeelState st, std::optional<std::vector<RadicalScalar>>& found) {
        if (found) return;
        while (true) {
            st.stuck = false;
            int bv = -1;
            Rat bs;
            bool progress = pass(st, bv, bs);
            if (st.contradiction) { note_contradiction(st); return; }
            if (bv >= 0) {
                branch_square(std::move(st), bv, bs, found);
                return;
            }
            if (progress) continue;
            progress = multiplicative_pass(st, bv, bs);
            if (st.contradiction) { note_contradiction(st); return; }
            if (bv >= 0) {
                branch_square(std::move(st), bv, bs, found);
                return;
            }
            if (!progress) break;
        }
        // No more progress: either complete or stuck.
        std::vector<RadicalScalar> vals(sys_.m());
        for (int i = 0; i < sys_.m(); ++i) {
            auto [root, f] = resolve(st, i);
            if (!st.vars[root].value) {
                any_stuck_ = true;
                return;
            }
            vals[i] = *st.vars[root].value * f;
            if (vals[i].is_zero()) return;  // support must be all-nonzero
        }
        if (verify(vals)) found = vals;
    }

    void branch_square(PeelState st, int var, const Rat& sq,
                       std::optional<std::vector<RadicalScalar>>& found) {
        for (int sgn : {1, -1}) {
            PeelState st2 = st;
            st2.vars[var].value = RadicalScalar(sgn, sq);
            dfs_peel(std::move(st2), found);
            if (found) return;
        }
    }

    bool verify(const std::vector<RadicalScalar>& vals) const {
        SuperpotentialAnsatz f;
        for (int i = 0; i < sys_.m(); ++i) f.entries.emplace_back(sys_.c[i], vals[i]);
        f.normalize(sys_.cfg->r);
        return check(*sys_.cfg, f).satisfied;
    }
};

// ---- numeric fallback ------------------------------------------------------

// Residuals of the full polynomial-coefficient system at (B, A), split by
// u-degree, plus anchor normalisations.
template <typename Real>
void eval_residuals(const System& s, const std::vector<Real>& B, const std::vector<Real>& A,
                    const std::vector<int>& anchors, bool fix_anchor_a,
                    std::vector<Real>& out) {
    out.clear();
    std::vector<Real> ju(s.m());
    for (int i = 0; i < s.m(); ++i) ju[i] = static_cast<Real>(s.ju[i].to_double());
    const Real juu = static_cast<Real>(s.juu.to_double());
    for (const auto& eq : s.eqs) {
        Real d0 = -static_cast<Real>(eq.rhs0.to_double());
        Real d1 = -static_cast<Real>(eq.rhs1.to_double());
        Real d2 = 0;
        for (const auto& pd : eq.pairs) {
            const Real jcc = static_cast<Real>(pd.jcc.to_double());
            const int i = pd.i, j = pd.j;
            if (i == j) {
                d0 += jcc * B[i] * B[i] + 2 * ju[i] * A[i] * B[i] + juu * A[i] * A[i];
                d1 += 2 * jcc * A[i] * B[i] + 2 * ju[i] * A[i] * A[i];
                d2 += jcc * A[i] * A[i];
            } else {
                d0 += 2 * (jcc * B[i] * B[j] + ju[j] * A[i] * B[j] + ju[i] * A[j] * B[i] +
                           juu * A[i] * A[j]);
                d1 += 2 * (jcc * (A[i] * B[j] + A[j] * B[i]) + A[i] * A[j] * (ju[i] + ju[j]));
                d2 += 2 * jcc * A[i] * A[j];
            }
        }
        out.push_back(d0);
        out.push_back(d1);
        out.push_back(d2);
    }
    for (int a : anchors) {
        out.push_back(B[a] - Real(1));
        if (fix_anchor_a) out.push_back(A[a]);
    }
}

template <typename Real>
Real inf_norm(const std::vector<Real>& v) {
    Real m = 0;
    for (Real x : v) m = std::max(m, std::abs(x));
    return m;
}

// Damped Gauss-Newton with numeric Jacobian.  Returns final residual norm.
template <typename Real>
Real gauss_newton(const System& s, std::vector<Real>& B, std::vector<Real>& A,
                  const std::vector<int>& anchors, bool fix_anchor_a, bool constant_mode,
                  int iters) {
    const int m = s.m();
    const int nvar = constant_mode ? m : 2 * m;
    std::vector<Real> F, Fp, Fm;
    eval_residuals(s, B, A, anchors, fix_anchor_a, F);
    auto get = [&](int k) -> Real& { return (k < m) ? B[k] : A[k - m]; };
    for (int it = 0; it < iters; ++it) {
        const int neq = static_cast<int>(F.size());
        // Numeric Jacobian by central differences.
        std::vector<std::vector<Real>> J(neq, std::vector<Real>(nvar));
        for (int k = 0; k < nvar; ++k) {
            Real save = get(k);
            Real h = std::max(Real(1e-7), std::abs(save) * Real(1e-7));
            get(k) = save + h;
            eval_residuals(s, B, A, anchors, fix_anchor_a, Fp);
            get(k) = save - h;
            eval_residuals(s, B, A, anchors, fix_anchor_a, Fm);
            get(k) = save;
            for (int e = 0; e < neq; ++e) J[e][k] = (Fp[e] - Fm[e]) / (2 * h);
        }
        // Normal equations with Levenberg damping.
        std::vector<std::vector<Real>> JtJ(nvar, std::vector<Real>(nvar, Real(0)));
        std::vector<Real> JtF(nvar, Real(0));
        for (int a = 0; a < nvar; ++a) {
            for (int b = a; b < nvar; ++b) {
                Real sum = 0;
                for (int e = 0; e < neq; ++e) sum += J[e][a] * J[e][b];
                JtJ[a][b] = JtJ[b][a] = sum;
            }
            for (int e = 0; e < neq; ++e) JtF[a] += J[e][a] * F[e];
        }
        Real mu = Real(1e-12);
        for (int a = 0; a < nvar; ++a) JtJ[a][a] += mu;
        // Solve JtJ dx = -JtF by Gaussian elimination with partial pivoting.
        std::vector<Real> dx(nvar, Real(0));
        {
            auto M = JtJ;
            auto rhs = JtF;
            for (auto& x : rhs) x = -x;
            bool singular = false;
            for (int col = 0; col < nvar; ++col) {
                int piv = col;
                for (int r2 = col + 1; r2 < nvar; ++r2)
                    if (std::abs(M[r2][col]) > std::abs(M[piv][col])) piv = r2;
                if (std::abs(M[piv][col]) < Real(1e-300)) { singular = true; break; }
                std::swap(M[col], M[piv]);
                std::swap(rhs[col], rhs[piv]);
                for (int r2 = col + 1; r2 < nvar; ++r2) {
                    Real f = M[r2][col] / M[col][col];
                    for (int cc = col; cc < nvar; ++cc) M[r2][cc] -= f * M[col][cc];
                    rhs[r2] -= f * rhs[col];
                }
            }
            if (singular) return inf_norm(F);
            for (int col = nvar - 1; col >= 0; --col) {
                Real sum = rhs[col];
                for (int cc = col + 1; cc < nvar; ++cc) sum -= M[col][cc] * dx[cc];
                dx[col] = sum / M[col][col];
            }
        }
        // Backtracking line search.
        Real base = inf_norm(F);
        Real gamma = 1;
        bool moved = false;
        for (int ls = 0; ls < 24; ++ls, gamma /= 2) {
            std::vector<Real> Bt = B, At = A;
            for (int k = 0; k < nvar; ++k) {
                Real& ref = (k < m) ? Bt[k] : At[k - m];
                ref += gamma * dx[k];
            }
            std::vector<Real> Ft;
            eval_residuals(s, Bt, At, anchors, fix_anchor_a, Ft);
            if (inf_norm(Ft) < base) {
                B = std::move(Bt);
                A = std::move(At);
                F = std::move(Ft);
                moved = true;
                break;
            }
        }
        if (!moved) break;
        if (inf_norm(F) < Real(1e-14)) break;
    }
    return inf_norm(F);
}

std::uint64_t c_set_hash(const std::vector<QVec>& C) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& c : C)
        for (unsigned char ch : qvec_str(c)) {
            h ^= ch;
            h *= 1099511628211ull;
        }
    return h;
}

std::optional<SuperpotentialAnsatz> newton_solve(const System& s, CoeffMode mode,
                                                 const std::vector<int>& anchors) {
    const int m = s.m();
    const bool constant_mode = (mode == CoeffMode::Constant);
    std::mt19937_64 rng(c_set_hash(s.c) ^ config_hash(*s.cfg));
    std::uniform_real_distribution<double> mag(-1.2, 1.4);
    std::uniform_int_distribution<int> coin(0, 1);

    for (bool fix_anchor_a : {true, false}) {
        if (constant_mode && !fix_anchor_a) break;  // no A variables anyway
        for (int seed = 0; seed < 32; ++seed) {
            std::vector<double> B(m), A(m, 0.0);
            for (int i = 0; i < m; ++i) {
                B[i] = (seed == 0 ? 1.0 : (coin(rng) ? 1 : -1) * std::exp(mag(rng)));
                if (!constant_mode && seed % 2 == 1) A[i] = (coin(rng) ? 1 : -1) * std::exp(mag(rng));
            }
            for (int a : anchors) {
                B[a] = 1.0;
                if (fix_anchor_a) A[a] = 0.0;
            }
            double res = gauss_newton<double>(s, B, A, anchors, fix_anchor_a, constant_mode, 120);
            if (res > 1e-10) continue;
            // Confirmation in extended precision.
            std::vector<long double> Bl(B.begin(), B.end()), Al(A.begin(), A.end());
            long double resl = gauss_newton<long double>(s, Bl, Al, anchors, fix_anchor_a,
                                                         constant_mode, 8);
            if (resl > 1e-12L) continue;
            for (int i = 0; i < m; ++i) {
                B[i] = static_cast<double>(Bl[i]);
                A[i] = static_cast<double>(Al[i]);
            }
            // Zero coefficients mean the support C was wrong; reject.
            bool zero = false;
            for (int i = 0; i < m; ++i)
                if (std::abs(B[i]) < 1e-8 && std::abs(A[i]) < 1e-8) zero = true;
            if (zero) continue;
            // Exact reconstruction, then the exact verifier has the last word.
            SuperpotentialAnsatz f;
            bool ok = true;
            const bool all_a_zero =
                std::all_of(A.begin(), A.end(), [](double a) { return std::abs(a) < 1e-9; });
            for (int i = 0; i < m && ok; ++i) {
                if (all_a_zero) {
                    auto sq = reconstruct_rational(B[i] * B[i]);
                    if (!sq) { ok = false; break; }
                    f.entries.emplace_back(s.c[i], RadicalScalar(B[i] > 0 ? 1 : -1, *sq));
                } else {
                    auto b0 = reconstruct_rational(B[i]);
                    auto a0 = reconstruct_rational(A[i]);
                    if (!b0 || !a0) { ok = false; break; }
                    f.entries.emplace_back(s.c[i], UPoly{*b0, *a0});
                }
            }
            if (!ok) continue;
            f.normalize(s.cfg->r);
            if (check(*s.cfg, f).satisfied) return f;
        }
    }
    return std::nullopt;
}

}  // namespace

SolveOutcome solve_coefficients(const Configuration& cfg, const std::vector<QVec>& C,
                                CoeffMode mode) {
    cfg.validate_wellformed();
    if (C.size() > 12) throw std::invalid_argument("solve_coefficients: |C| > 12");
    if (C.empty()) throw std::invalid_argument("solve_coefficients: empty C");
    SolveOutcome out;

    System sys = build_system(cfg, C);

    if (mode == CoeffMode::Constant && !cfg.lambda.is_zero()) {
        // The u-term on the right-hand side at b=d cannot be produced by
        // constant coefficients.
        out.note = "nonsteady-constant";
        out.contradiction_b = cfg.jform().d_ext();
        return out;
    }

    const auto basis = gauge_basis(sys);
    const auto anchors = gauge_anchors(sys, basis);

    if (mode == CoeffMode::Constant) {
        ConstantPeel peel(sys);
        std::optional<QVec> contradiction;
        bool stuck = false;
        auto vals = peel.run(anchors, contradiction, stuck);
        if (vals) {
            SuperpotentialAnsatz f;
            for (int i = 0; i < sys.m(); ++i) f.entries.emplace_back(sys.c[i], (*vals)[i]);
            f.normalize(cfg.r);
            out.ansatz = std::move(f);
            out.note = "exact";
            return out;
        }
        if (!stuck) {
            out.contradiction_b = contradiction;
            out.note = "exact-infeasible";
            return out;
        }
        out.note = "newton";
    } else {
        out.note = "newton";
    }

    auto f = newton_solve(sys, mode, anchors);
    if (f) {
        out.ansatz = std::move(f);
    } else {
        out.note += "-none";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bounded classification search
// ---------------------------------------------------------------------------

namespace {

struct CandidatePoint {
    QVec c;                 // (d+x)/2
    std::vector<long> x;    // lattice coordinates (extended slot included off P)
    bool null = false;
};

void enumerate_lattice(int dim, int bound, const std::function<void(const std::vector<long>&)>& fn) {
    std::vector<long> x(dim, -bound);
    while (true) {
        fn(x);
        int k = 0;
        while (k < dim && x[k] == bound) x[k++] = -bound;
        if (k == dim) break;
        ++x[k];
    }
}

}  // namespace

SearchResult search(const Configuration& cfg, const SearchOptions& opts) {
    cfg.validate_wellformed();
    if (cfg.r > 4) throw std::invalid_argument("search: r > 4 unsupported");
    if (opts.lattice_bound < 1 || opts.lattice_bound > 4)
        throw std::invalid_argument("search: lattice_bound out of range");
    if (opts.max_extra < 0 || opts.max_extra > 4)
        throw std::invalid_argument("search: max_extra out of range");

    SearchResult res;
    res.lattice_bound = opts.lattice_bound;
    res.max_extra = opts.max_extra;

    const JForm form = cfg.jform();
    const QVec d = form.d_ext();
    const int r = cfg.r;
    const int B = opts.lattice_bound;

    if (opts.mode == CoeffMode::Constant && !cfg.lambda.is_zero()) {
        res.pruned_counts["nonsteady-constant"] = 1;
        return res;
    }

    auto c_of = [&](const std::vector<long>& x) {
        QVec c(r + 1);
        for (int i = 0; i < r; ++i) c[i] = (Rat(cfg.dims[i]) + Rat(x[i])) / Rat(2);
        c[r] = static_cast<int>(x.size()) > r ? (Rat(-2) + Rat(x[r])) / Rat(2) : Rat(-1);
        return c;
    };

    // W~ images (d + w)/2 that the hull must contain.
    std::vector<QVec> wtilde_pts;
    std::vector<std::vector<long>> wtilde_x;
    {
        std::vector<long> zero(r, 0);
        wtilde_x.push_back(zero);
        for (const auto& w : cfg.weights) wtilde_x.push_back(w.vec);
        for (const auto& x : wtilde_x) wtilde_pts.push_back(c_of(x));
    }

    // Candidate vertex pool: lattice points whose image is null, plus the
    // weight-hull points themselves (within the bound).
    std::vector<CandidatePoint> pool;
    const int lat_dim = opts.restrict_to_p ? r : r + 1;
    enumerate_lattice(lat_dim, B, [&](const std::vector<long>& x) {
        CandidatePoint pt;
        pt.x = x;
        pt.c = c_of(x);
        pt.null = is_null(form, pt.c);
        bool in_wtilde = false;
        if (static_cast<int>(x.size()) == r || x[r] == 0) {
            std::vector<long> xr(x.begin(), x.begin() + r);
            in_wtilde = std::find(wtilde_x.begin(), wtilde_x.end(), xr) != wtilde_x.end();
        }
        QVec zero(static_cast<size_t>(r + 1), Rat(0));
        if ((pt.null || in_wtilde) && pt.c != zero) pool.push_back(std::move(pt));
    });
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.c < b.c; });

    const size_t np = pool.size();
    if (np > 22) {
        res.partial = true;
        res.pruned_counts["pool-too-large"] = np;
        return res;
    }

    // Interior lattice candidates are computed lazily per accepted hull.
    std::vector<std::vector<long>> all_lattice;
    enumerate_lattice(lat_dim, B, [&](const std::vector<long>& x) { all_lattice.push_back(x); });

    std::atomic<std::size_t> next_mask{1};
    const std::size_t mask_end = (np == 0) ? 1 : (std::size_t{1} << np);
    std::atomic<std::size_t> budget_used{0};
    std::atomic<bool> exhausted{false};

    struct Hit {
        std::size_t order;
        SuperpotentialAnsatz ansatz;
    };
    struct Stats {
        std::map<std::string, std::size_t> counts;
        std::vector<Hit> hits;
    };

    int nthreads = opts.threads;
    if (nthreads <= 0) nthreads = static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads <= 0) nthreads = 1;
    nthreads = std::min<int>(nthreads, 32);

    std::vector<Stats> per_thread(nthreads);

    auto worker = [&](int tid) {
        Stats& st = per_thread[tid];
        while (true) {
            std::size_t mask = next_mask.fetch_add(1);
            if (mask >= mask_end) break;
            if (budget_used.fetch_add(1) > opts.budget) {
                exhausted = true;
                break;
            }
            std::vector<const CandidatePoint*> v;
            for (size_t i = 0; i < np; ++i)
                if (mask & (std::size_t{1} << i)) v.push_back(&pool[i]);

            std::vector<QVec> vpts;
            for (const auto* p : v) vpts.push_back(p->c);

            // Every chosen point must be a vertex of the hull.
            bool all_vertices = true;
            for (size_t i = 0; i < vpts.size() && all_vertices; ++i) {
                std::vector<QVec> others;
                for (size_t j = 0; j < vpts.size(); ++j)
                    if (j != i) others.push_back(vpts[j]);
                if (!others.empty() && point_in_hull(vpts[i], others)) all_vertices = false;
            }
            if (!all_vertices) {
                ++st.counts["not-all-vertices"];
                continue;
            }
            // conv(C) must contain conv((d+W~)/2).
            bool covers = true;
            for (const auto& h : wtilde_pts)
                if (!point_in_hull(h, vpts)) { covers = false; break; }
            if (!covers) {
                ++st.counts["weight-hull-not-covered"];
                continue;
            }
            // With E != 0 a null vertex is mandatory.
            if (!cfg.energy.is_zero()) {
                bool has_null = std::any_of(v.begin(), v.end(), [](const auto* p) { return p->null; });
                if (!has_null) {
                    ++st.counts["no-null-vertex"];
                    continue;
                }
            }
            // Non-vertex lattice points inside the hull, addable up to
            // max_extra at a time.
            std::vector<QVec> interior;
            for (const auto& x : all_lattice) {
                QVec c = c_of(x);
                if (std::find(vpts.begin(), vpts.end(), c) != vpts.end()) continue;
                QVec zero(static_cast<size_t>(r + 1), Rat(0));
                if (c == zero) continue;
                if (point_in_hull(c, vpts)) interior.push_back(std::move(c));
            }
            std::sort(interior.begin(), interior.end());

            std::vector<std::vector<QVec>> extras{{}};
            const int ni = static_cast<int>(interior.size());
            std::function<void(int, std::vector<QVec>&)> pick = [&](int start, std::vector<QVec>& cur) {
                if (!cur.empty()) extras.push_back(cur);
                if (static_cast<int>(cur.size()) >= opts.max_extra) return;
                for (int i = start; i < ni; ++i) {
                    cur.push_back(interior[i]);
                    pick(i + 1, cur);
                    cur.pop_back();
                }
            };
            std::vector<QVec> cur;
            pick(0, cur);

            for (const auto& extra : extras) {
                if (budget_used.fetch_add(1) > opts.budget) {
                    exhausted = true;
                    return;
                }
                std::vector<QVec> C = vpts;
                C.insert(C.end(), extra.begin(), extra.end());
                if (C.size() > 12) {
                    ++st.counts["candidate-too-large"];
                    continue;
                }
                auto outcome = solve_coefficients(cfg, C, opts.mode);
                if (outcome.ansatz) {
                    st.hits.push_back({mask, std::move(*outcome.ansatz)});
                    ++st.counts[outcome.note == "exact" ? "solved-exact" : "solved-newton"];
                } else {
                    ++st.counts["solver-none"];
                }
            }
        }
    };

    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> ts;
        for (int t = 0; t < nthreads; ++t) ts.emplace_back(worker, t);
        for (auto& t : ts) t.join();
    }

    for (auto& st : per_thread) {
        for (auto& [k, n] : st.counts) res.pruned_counts[k] += n;
        for (auto& hit : st.hits) res.found.push_back(std::move(hit.ansatz));
    }
    std::sort(res.found.begin(), res.found.end(), [](const auto& a, const auto& b) {
        return a.exponents() < b.exponents();
    });
    res.partial = exhausted.load();
    res.candidates = budget_used.load();
    return res;
}

nlohmann::json search_result_to_json(const SearchResult& res) {
    nlohmann::json j;
    j["lattice_bound"] = res.lattice_bound;
    j["max_extra"] = res.max_extra;
    j["partial"] = res.partial;
    j["candidates"] = res.candidates;
    j["found"] = nlohmann::json::array();
    for (const auto& f : res.found) j["found"].push_back(ansatz_to_json(f));
    j["pruned_counts"] = nlohmann::json::object();
    for (const auto& [k, n] : res.pruned_counts) j["pruned_counts"][k] = n;
    return j;
}

std::pair<int, int> ab_signature(const Configuration& cfg, const std::vector<QVec>& C) {
    cfg.validate_wellformed();
    for (const auto& c : C) {
        if (static_cast<int>(c.size()) != cfg.r + 1 || c[cfg.r] != Rat(-1))
            throw std::invalid_argument("ab_signature: C not contained in P");
    }
    HullQuery q(C);
    auto verts = hull_vertices(q);
    int a = 0, b = 0;
    for (const auto& v : verts) {
        // s((d+x)/2) = sum x_i with x = 2c - d.
        Rat s;
        for (int i = 0; i < cfg.r; ++i) s += Rat(2) * v[i] - Rat(cfg.dims[i]);
        if (s > Rat(-1)) ++a;
        if (s < Rat(-1)) ++b;
    }
    return {a, b};
}

std::vector<QVec> bbc_exponent_set(const Configuration& cfg) {
    if (cfg.r < 2) throw std::invalid_argument("bbc_exponent_set: needs r >= 2");
    const QVec d = cfg.jform().d_ext();
    auto half = [&](const std::vector<long>& x) {
        QVec c(cfg.r + 1);
        for (int i = 0; i < cfg.r; ++i) c[i] = (Rat(cfg.dims[i]) + Rat(x[i])) / Rat(2);
        c[cfg.r] = Rat(-1);
        return c;
    };
    std::vector<QVec> C;
    std::vector<long> x(cfg.r, 0);
    x[0] = -1;
    C.push_back(half(x));
    for (int i = 1; i < cfg.r; ++i) {
        std::vector<long> y(cfg.r, 0);
        y[0] = 1;
        y[i] = -2;
        C.push_back(half(y));
    }
    std::vector<long> z(cfg.r, 0);
    z[0] = 1;
    C.push_back(half(z));
    std::sort(C.begin(), C.end());
    return C;
}

std::vector<QVec> case5_exponent_set(const Configuration& cfg) {
    if (cfg.r != 3) throw std::invalid_argument("case5_exponent_set: needs r = 3");
    auto half = [&](std::initializer_list<long> xs) {
        std::vector<long> x(xs);
        QVec c(4);
        for (int i = 0; i < 3; ++i) c[i] = (Rat(cfg.dims[i]) + Rat(x[i])) / Rat(2);
        c[3] = Rat(-1);
        return c;
    };
    std::vector<QVec> C = {half({0, -1, -1}), half({0, 1, -1}), half({0, -1, 1}),
                           half({1, 0, -2}), half({1, -2, 0})};
    std::sort(C.begin(), C.end());
    return C;
}

SuperpotentialAnsatz case5_reference_ansatz(const Configuration& cfg) {
    cfg.validate_wellformed();
    if (cfg.r != 3 || cfg.dims != std::vector<long>{1, 2, 2})
        throw std::invalid_argument("case5_reference_ansatz: needs d=(1,2,2)");
    auto a = [&](std::initializer_list<long> w) {
        auto v = cfg.coefficient_of(std::vector<long>(w));
        if (!v) throw std::invalid_argument("case5_reference_ansatz: weight set mismatch");
        return *v;
    };
    const Rat a_v = a({0, 0, -1});   // = f_u f_v / 2
    const Rat a_mv = a({0, -1, 0});  // = f_u f_-v / 2
    const Rat a_x = a({1, 0, -2});
    const Rat a_y = a({1, -2, 0});
    const Rat energy = cfg.energy;
    if (energy.sign() <= 0 || a_v.sign() <= 0 || a_mv.sign() <= 0 || a_x.sign() >= 0 ||
        a_y.sign() >= 0)
        throw std::invalid_argument("case5_reference_ansatz: coefficient signs unsupported");
    auto half = [&](std::initializer_list<long> xs) {
        std::vector<long> x(xs);
        QVec c(4);
        for (int i = 0; i < 3; ++i) c[i] = (Rat(cfg.dims[i]) + Rat(x[i])) / Rat(2);
        c[3] = Rat(-1);
        return c;
    };
    SuperpotentialAnsatz f;
    f.entries.emplace_back(half({0, 1, -1}), RadicalScalar::sqrt_of(energy * a_v / a_mv));
    f.entries.emplace_back(half({0, -1, 1}), RadicalScalar::sqrt_of(energy * a_mv / a_v));
    f.entries.emplace_back(half({0, -1, -1}),
                           RadicalScalar::sqrt_of(Rat(4) * a_v * a_mv / energy));
    f.entries.emplace_back(half({1, 0, -2}), RadicalScalar::sqrt_of(Rat(-2) * a_x));
    f.entries.emplace_back(half({1, -2, 0}), -RadicalScalar::sqrt_of(Rat(-2) * a_y));
    f.normalize(cfg.r);
    if (!check(cfg, f).satisfied)
        throw std::invalid_argument(
            "case5_reference_ansatz: coefficient ratios violate the compatibility requirement");
    return f;
}

}  // namespace cohomflow
