#pragma once

#include <vector>

#include "cohomflow/rational.hpp"

namespace cohomflow {

/// The bilinear form J of the extended Hamiltonian phase space.  Entries are
/// -delta_ij/d_i on the momentum block, -1/2 on the mixed p_i/phi slots and
/// -(n-1)/4 in the corner, so that J(p,p) = -(sum p_i^2/d_i + phi sum p_i
/// + (n-1)/4 phi^2).
struct JForm {
    std::vector<long> dims;                 // d_1..d_r, all positive
    long n = 0;                             // sum of dims
    std::vector<std::vector<Rat>> matrix;   // (r+1) x (r+1), symmetric

    explicit JForm(std::vector<long> dims_in);

    int r() const { return static_cast<int>(dims.size()); }
    int size() const { return r() + 1; }
    /// Extended dimension vector (d_1,...,d_r,-2).
    QVec d_ext() const;
};

/// Exact polarised value J(a,b).  Throws std::invalid_argument on dimension
/// mismatch.
Rat j_eval(const JForm& form, const QVec& a, const QVec& b);

/// J(v+d, w+d) = 1 - sum v_i w_i / d_i for vectors with zero extended slot.
/// Throws if either extended slot is nonzero.
Rat j_shifted(const JForm& form, const QVec& v, const QVec& w);

/// Membership in the J-null cone: for c_{r+1} != 0 this is the slanted cone
/// sum (2c_i + d_i c_{r+1})^2 / d_i = c_{r+1}^2; on the hyperplane
/// {c_{r+1}=0} the form is negative definite, so only c=0 is null.
bool is_null(const JForm& form, const QVec& c);

/// A finite point set queried for convex-position structure.  All points
/// must have equal dimension, be pairwise distinct and nonempty.
struct HullQuery {
    std::vector<QVec> points;

    explicit HullQuery(std::vector<QVec> pts);
    int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
};

/// Feasibility of {x >= 0 : A x = b}, decided by phase-one simplex over the
/// rationals with Bland's rule.
bool lp_equality_feasible(const std::vector<std::vector<Rat>>& a, const std::vector<Rat>& b);

/// Is p a convex combination of pts?
bool point_in_hull(const QVec& p, const std::vector<QVec>& pts);

/// Exactly the points not expressible as convex combinations of the others.
/// Preconditions: at most 64 points, dimension at most 6.
std::vector<QVec> hull_vertices(const HullQuery& q);

/// True iff some rational linear functional attains its maximum over the
/// point set exactly on {a,b}.  Both a and b must be hull vertices.
bool is_edge(const HullQuery& q, const QVec& a, const QVec& b);

/// True iff no pair {x,y} within points, other than {a,c} itself, satisfies
/// x + y = a + c (repeated elements allowed as a pair).
bool unique_sum(const std::vector<QVec>& points, const QVec& a, const QVec& c);

}  // namespace cohomflow
