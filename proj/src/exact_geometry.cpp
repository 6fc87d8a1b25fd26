#include "cohomflow/exact_geometry.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cohomflow {

JForm::JForm(std::vector<long> dims_in) : dims(std::move(dims_in)) {
    if (dims.empty()) throw std::invalid_argument("JForm: empty dimension list");
    for (long d : dims) {
        if (d <= 0) throw std::invalid_argument("JForm: dimensions must be positive");
        n += d;
    }
    const int m = size();
    matrix.assign(m, std::vector<Rat>(m));
    for (int i = 0; i < m - 1; ++i) {
        matrix[i][i] = Rat(-1, dims[i]);
        matrix[i][m - 1] = Rat(-1, 2);
        matrix[m - 1][i] = Rat(-1, 2);
    }
    matrix[m - 1][m - 1] = Rat(-(n - 1), 4);
}

QVec JForm::d_ext() const {
    QVec d(size());
    for (int i = 0; i < r(); ++i) d[i] = Rat(dims[i]);
    d[r()] = Rat(-2);
    return d;
}

Rat j_eval(const JForm& form, const QVec& a, const QVec& b) {
    const int m = form.size();
    if (static_cast<int>(a.size()) != m || static_cast<int>(b.size()) != m)
        throw std::invalid_argument("j_eval: dimension mismatch");
    Rat out;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out += a[i] * form.matrix[i][j] * b[j];
    return out;
}

Rat j_shifted(const JForm& form, const QVec& v, const QVec& w) {
    const int m = form.size();
    if (static_cast<int>(v.size()) != m || static_cast<int>(w.size()) != m)
        throw std::invalid_argument("j_shifted: dimension mismatch");
    if (!v[m - 1].is_zero() || !w[m - 1].is_zero())
        throw std::invalid_argument("j_shifted: nonzero extended slot");
    Rat out(1);
    for (int i = 0; i < m - 1; ++i) out -= v[i] * w[i] / Rat(form.dims[i]);
    return out;
}

bool is_null(const JForm& form, const QVec& c) {
    const int m = form.size();
    if (static_cast<int>(c.size()) != m) throw std::invalid_argument("is_null: dimension mismatch");
    const Rat& tail = c[m - 1];
    if (tail.is_zero()) {
        return std::all_of(c.begin(), c.end(), [](const Rat& x) { return x.is_zero(); });
    }
    Rat lhs;
    for (int i = 0; i < m - 1; ++i) {
        Rat t = Rat(2) * c[i] + Rat(form.dims[i]) * tail;
        lhs += t * t / Rat(form.dims[i]);
    }
    return lhs == tail * tail;
}

HullQuery::HullQuery(std::vector<QVec> pts) : points(std::move(pts)) {
    if (points.empty()) throw std::invalid_argument("HullQuery: empty point set");
    const size_t d = points[0].size();
    std::set<QVec> seen;
    for (const auto& p : points) {
        if (p.size() != d) throw std::invalid_argument("HullQuery: mixed dimensions");
        if (!seen.insert(p).second) throw std::invalid_argument("HullQuery: duplicate point");
    }
}

namespace {

// Phase-one simplex on the tableau for min 1'z s.t. Ax + z = b, x,z >= 0,
// with b >= 0 after row sign flips.  Bland's rule guarantees termination.
// Returns true iff the optimum is zero, i.e. {x >= 0 : Ax = b} is feasible.
bool phase_one(std::vector<std::vector<Rat>> a, std::vector<Rat> b) {
    const int m = static_cast<int>(a.size());
    const int n = m == 0 ? 0 : static_cast<int>(a[0].size());
    if (m == 0) return true;
    for (int i = 0; i < m; ++i) {
        if (b[i].sign() < 0) {
            b[i] = -b[i];
            for (auto& x : a[i]) x = -x;
        }
    }
    // Tableau rows: m constraint rows with columns [x | z | rhs]; basis = z.
    const int cols = n + m + 1;
    std::vector<std::vector<Rat>> t(m, std::vector<Rat>(cols));
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) t[i][j] = a[i][j];
        t[i][n + i] = Rat(1);
        t[i][cols - 1] = b[i];
        basis[i] = n + i;
    }
    // Objective row for min sum z: reduced cost c_j - sum over rows of
    // t[i][j], with c = 1 on the artificial block; value slot -sum b_i.
    std::vector<Rat> obj(cols);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < cols; ++j) obj[j] -= t[i][j];
    for (int i = 0; i < m; ++i) obj[n + i] += Rat(1);

    while (true) {
        // Bland: entering = lowest-index column with negative reduced cost.
        int enter = -1;
        for (int j = 0; j < cols - 1; ++j) {
            if (obj[j].sign() < 0) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;
        // Ratio test, ties broken by lowest basis index (Bland).
        int leave = -1;
        Rat best;
        for (int i = 0; i < m; ++i) {
            if (t[i][enter].sign() <= 0) continue;
            Rat ratio = t[i][cols - 1] / t[i][enter];
            if (leave < 0 || ratio < best ||
                (ratio == best && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break;  // unbounded cannot happen in phase one
        // Pivot.
        Rat piv = t[leave][enter];
        for (auto& x : t[leave]) x /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave || t[i][enter].is_zero()) continue;
            Rat f = t[i][enter];
            for (int j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
        }
        if (!obj[enter].is_zero()) {
            Rat f = obj[enter];
            for (int j = 0; j < cols; ++j) obj[j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }
    // Optimal objective value is -obj[rhs]; feasible iff it is zero.
    return obj[cols - 1].is_zero();
}

}  // namespace

bool lp_equality_feasible(const std::vector<std::vector<Rat>>& a, const std::vector<Rat>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("lp_equality_feasible: size mismatch");
    return phase_one(a, b);
}

bool point_in_hull(const QVec& p, const std::vector<QVec>& pts) {
    if (pts.empty()) return false;
    const int dim = static_cast<int>(p.size());
    const int n = static_cast<int>(pts.size());
    // Feasibility of lambda >= 0, sum lambda = 1, sum lambda_i pts_i = p.
    std::vector<std::vector<Rat>> a(dim + 1, std::vector<Rat>(n));
    std::vector<Rat> b(dim + 1);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = pts[j][i];
        b[i] = p[i];
    }
    for (int j = 0; j < n; ++j) a[dim][j] = Rat(1);
    b[dim] = Rat(1);
    return phase_one(std::move(a), std::move(b));
}

std::vector<QVec> hull_vertices(const HullQuery& q) {
    if (q.points.size() > 64) throw std::invalid_argument("hull_vertices: too many points");
    if (q.dim() > 6) throw std::invalid_argument("hull_vertices: dimension above 6");
    std::vector<QVec> out;
    for (size_t i = 0; i < q.points.size(); ++i) {
        std::vector<QVec> others;
        for (size_t j = 0; j < q.points.size(); ++j)
            if (j != i) others.push_back(q.points[j]);
        if (others.empty() || !point_in_hull(q.points[i], others)) out.push_back(q.points[i]);
    }
    return out;
}

bool is_edge(const HullQuery& q, const QVec& a, const QVec& b) {
    if (a == b) throw std::invalid_argument("is_edge: identical endpoints");
    auto verts = hull_vertices(q);
    auto is_vertex = [&](const QVec& v) {
        return std::find(verts.begin(), verts.end(), v) != verts.end();
    };
    if (!is_vertex(a) || !is_vertex(b)) throw std::invalid_argument("is_edge: endpoint not a vertex");

    // Find g, h with g.a = h, g.b = h and g.x <= h - 1 for the other points.
    // Free variables split into positive parts; slack per inequality.
    const int dim = q.dim();
    std::vector<QVec> others;
    for (const auto& p : q.points)
        if (p != a && p != b) others.push_back(p);
    const int n_ineq = static_cast<int>(others.size());
    const int nvar = 2 * (dim + 1) + n_ineq;  // g+, g-, h+, h-, slacks
    auto coef = [&](std::vector<Rat>& row, const QVec& x, const Rat& sign_h) {
        for (int i = 0; i < dim; ++i) {
            row[2 * i] = x[i];
            row[2 * i + 1] = -x[i];
        }
        row[2 * dim] = sign_h;
        row[2 * dim + 1] = -sign_h;
    };
    std::vector<std::vector<Rat>> A;
    std::vector<Rat> rhs;
    {
        std::vector<Rat> row(nvar);
        coef(row, a, Rat(-1));
        A.push_back(row);
        rhs.push_back(Rat(0));  // g.a - h = 0
    }
    {
        std::vector<Rat> row(nvar);
        coef(row, b, Rat(-1));
        A.push_back(row);
        rhs.push_back(Rat(0));
    }
    for (int k = 0; k < n_ineq; ++k) {
        std::vector<Rat> row(nvar);
        coef(row, others[k], Rat(-1));
        row[2 * (dim + 1) + k] = Rat(1);  // g.x - h + s = -1
        A.push_back(row);
        rhs.push_back(Rat(-1));
    }
    return phase_one(std::move(A), std::move(rhs));
}

bool unique_sum(const std::vector<QVec>& points, const QVec& a, const QVec& c) {
    auto find = [&](const QVec& v) {
        return std::find(points.begin(), points.end(), v) != points.end();
    };
    if (!find(a) || !find(c)) throw std::invalid_argument("unique_sum: membership violation");
    const QVec target = qvec_add(a, c);
    for (size_t i = 0; i < points.size(); ++i) {
        for (size_t j = i; j < points.size(); ++j) {
            const QVec& x = points[i];
            const QVec& y = points[j];
            bool same_pair = (x == a && y == c) || (x == c && y == a);
            if (same_pair) continue;
            if (qvec_add(x, y) == target) return false;
        }
    }
    return true;
}

}  // namespace cohomflow
