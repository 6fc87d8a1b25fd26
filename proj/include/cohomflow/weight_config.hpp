#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohomflow/exact_geometry.hpp"
#include "cohomflow/rational.hpp"

namespace cohomflow {

/// Weight-vector shapes appearing in the scalar curvature expansion.
/// Type I has a single -1 entry, type II one +1 and two -1, type III one +1
/// and one -2; anything else is Other.
enum class WeightKind { TypeI, TypeII, TypeIII, Other };

WeightKind classify_weight(const std::vector<long>& w);
std::string weight_kind_name(WeightKind k);

struct Weight {
    std::vector<long> vec;
    Rat coefficient;  // A_w, nonzero
};

/// A full problem instance: irreducible summand dimensions d, weight set W
/// with coefficients A_w, energy parameter E and soliton constant lambda.
struct Configuration {
    std::string name;  // catalog id, or empty for ad-hoc instances
    int r = 0;
    std::vector<long> dims;
    std::vector<Weight> weights;
    Rat energy;
    Rat lambda;

    long n() const;
    JForm jform() const { return JForm(dims); }
    bool steady() const { return lambda.is_zero(); }
    /// Throws std::invalid_argument on malformed data (duplicate weights,
    /// zero coefficients, bad lengths).
    void validate_wellformed() const;
    std::optional<Rat> coefficient_of(const std::vector<long>& w) const;
};

struct MeasureReport {
    int hull_dim = -1;       // affine dimension of conv(W)
    bool full_measure = false;
    std::vector<int> uncovered_coordinates;  // 1-based positions all weights miss
    // Weights outside the three standard shapes; accepted (search inputs may
    // be synthetic) but flagged.
    std::vector<std::vector<long>> nonstandard_weights;
};

/// Affine dimension of conv(W) by exact rank computation and the coordinate
/// coverage diagnostic of the full-measure criterion.  An empty weight set
/// with r=1 (the two-dimensional soliton) counts as full measure since the
/// scalar curvature vanishes identically there.
MeasureReport validate(const Configuration& cfg);

/// S(q) = sum A_w exp(w.q); overflow propagates as infinity.
double scalar_curvature(const Configuration& cfg, std::span<const double> q);

/// The classified configurations with documented test defaults.
std::vector<Configuration> builtin_catalog();
std::optional<Configuration> find_catalog_entry(const std::string& name);

// JSON schema: { "r": int, "dims": [int], "weights": [{"vec": [int],
// "A": "p/q"}], "E": "p/q", "lambda": "p/q" }.
Configuration config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Configuration& cfg);
std::uint64_t config_hash(const Configuration& cfg);

}  // namespace cohomflow
