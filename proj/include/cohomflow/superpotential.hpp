#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cohomflow/exp_poly.hpp"
#include "cohomflow/radical.hpp"
#include "cohomflow/rational.hpp"
#include "cohomflow/weight_config.hpp"

namespace cohomflow {

/// Degree-one polynomial c0 + c1*u with rational coefficients, the
/// coefficient shape needed for non-steady superpotentials.
struct UPoly {
    Rat c0;
    Rat c1;
    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool is_constant() const { return c1.is_zero(); }
    std::string str() const;
    friend bool operator==(const UPoly&, const UPoly&) = default;
};

using AnsatzCoeff = std::variant<RadicalScalar, UPoly>;

bool coeff_is_zero(const AnsatzCoeff& c);
std::string coeff_str(const AnsatzCoeff& c);

/// Finite exponent set C with nonzero coefficients f_c; `steady` records
/// that every coefficient is constant.
struct SuperpotentialAnsatz {
    std::vector<std::pair<QVec, AnsatzCoeff>> entries;  // sorted by exponent
    bool steady = true;

    /// Sorts entries, recomputes `steady`, and enforces the invariants:
    /// exponents of length r+1, pairwise distinct, nonzero, no zero vector.
    void normalize(int r);
    std::vector<QVec> exponents() const;
    const AnsatzCoeff* coefficient_of(const QVec& c) const;
    bool all_rational() const;

    /// Numeric gradient of f at a phase point q (length r+1 including u).
    std::vector<double> gradient_at(std::span<const double> q) const;
    /// Numeric value of f at q.
    double value_at(std::span<const double> q) const;
};

nlohmann::json ansatz_to_json(const SuperpotentialAnsatz& f);
SuperpotentialAnsatz ansatz_from_json(const nlohmann::json& j, int r);

/// Residual of one coefficient equation: a polynomial in u whose
/// coefficients are exact radical sums; zero iff the map is empty.
struct ResidualPoly {
    std::map<int, RadicalSum> coeff;  // u-degree -> value, zero entries dropped
    bool is_zero() const { return coeff.empty(); }
    double value_at(double u) const;
    std::string str() const;
};

struct ConditionReport {
    bool satisfied = false;
    std::map<QVec, ResidualPoly> residuals;  // every checked sum vector b
    std::vector<QVec> violated_b;
};

nlohmann::json condition_report_to_json(const ConditionReport& rep);

/// Exact verification of the superpotential coefficient equations: for every
/// b in the sumset, the quadratic form sum over a+c=b (with gradient terms
/// for polynomial coefficients) must equal A_w at b=d+w, E-lambda(n+1)
/// +lambda*u at b=d, and vanish elsewhere.
ConditionReport check(const Configuration& cfg, const SuperpotentialAnsatz& f);

/// H(q, grad f(q)) expanded symbolically through the exp_poly algebra.
/// Requires an ansatz with rational coefficients; zero iff f is a
/// superpotential.
ExpPoly hamiltonian_on_gradient_graph(const Configuration& cfg, const SuperpotentialAnsatz& f);

enum class CoeffMode { Constant, PolyU };

struct SolveOutcome {
    std::optional<SuperpotentialAnsatz> ansatz;
    std::optional<QVec> contradiction_b;  // certificate for exact infeasibility
    std::string note;                     // "exact", "newton", "nonsteady-constant", ...
};

/// Attempts an exact solution of the coefficient system on the exponent set
/// C: unique-sum peeling with radical arithmetic first, then damped Newton
/// from 32 deterministic seeds with exact reconstruction and re-verification.
/// |C| <= 12.
SolveOutcome solve_coefficients(const Configuration& cfg, const std::vector<QVec>& C,
                                CoeffMode mode = CoeffMode::Constant);

struct SearchOptions {
    int lattice_bound = 3;   // <= 4
    int max_extra = 2;       // <= 4 non-vertex lattice points added to a hull
    CoeffMode mode = CoeffMode::Constant;
    bool restrict_to_p = true;  // Lemma-backed default; off-P only for negative testing
    int threads = 0;            // 0: COHOMFLOW_THREADS or hardware
    std::size_t budget = 2000000;
};

struct SearchResult {
    std::vector<SuperpotentialAnsatz> found;  // sorted by exponent set
    std::map<std::string, std::size_t> pruned_counts;
    int lattice_bound = 0;
    int max_extra = 0;
    bool partial = false;
    std::size_t candidates = 0;
};

nlohmann::json search_result_to_json(const SearchResult& res);

/// Enumerates candidate sets C = (d+X)/2 over the bounded integer lattice,
/// pruned by the convex-position constraints (hull containment of
/// (d+W~)/2, null-or-weight vertices, and a null vertex when E != 0), and
/// solves the survivors.  Preconditions: r <= 4, lattice_bound <= 4,
/// max_extra <= 4.
SearchResult search(const Configuration& cfg, const SearchOptions& opts = {});

/// Vertex counts (a, b) of conv(C) in {s > -1} and {s < -1}, where
/// s((d+x)/2) is the component sum of x.  C must lie in the hyperplane P.
std::pair<int, int> ab_signature(const Configuration& cfg, const std::vector<QVec>& C);

/// Exponent sets of the two classified families on a d=(1,...) configuration:
/// the general one-dimensional-fibre set (d+{(-1),(1,-2^i)...,(1)})/2 and,
/// for r=3, the five-element set of the additional superpotential.
std::vector<QVec> bbc_exponent_set(const Configuration& cfg);
std::vector<QVec> case5_exponent_set(const Configuration& cfg);

/// The five-point ansatz built directly from the coefficient formulas
/// f_v = sqrt(E A_{(0,0,-1)}/A_{(0,-1,0)}), f_-v its mirror,
/// f_u = (2/sqrt E) sqrt(A_{(0,0,-1)} A_{(0,-1,0)}),
/// f_x = +sqrt(-2 A_{(1,0,-2)}), f_y = -sqrt(-2 A_{(1,-2,0)}), with the
/// square-root branch fixed so that the induced flow collapses the first
/// surface factor at the singular orbit.  Verified exactly before returning.
SuperpotentialAnsatz case5_reference_ansatz(const Configuration& cfg);

}  // namespace cohomflow
