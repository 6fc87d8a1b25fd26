#include "cohomflow/weight_config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cohomflow {

WeightKind classify_weight(const std::vector<long>& w) {
    int minus1 = 0, plus1 = 0, minus2 = 0, other = 0;
    for (long x : w) {
        if (x == 0) continue;
        if (x == -1) ++minus1;
        else if (x == 1) ++plus1;
        else if (x == -2) ++minus2;
        else ++other;
    }
    if (other == 0) {
        if (minus1 == 1 && plus1 == 0 && minus2 == 0) return WeightKind::TypeI;
        if (minus1 == 2 && plus1 == 1 && minus2 == 0) return WeightKind::TypeII;
        if (minus1 == 0 && plus1 == 1 && minus2 == 1) return WeightKind::TypeIII;
    }
    return WeightKind::Other;
}

std::string weight_kind_name(WeightKind k) {
    switch (k) {
        case WeightKind::TypeI: return "I";
        case WeightKind::TypeII: return "II";
        case WeightKind::TypeIII: return "III";
        default: return "other";
    }
}

long Configuration::n() const {
    long s = 0;
    for (long d : dims) s += d;
    return s;
}

void Configuration::validate_wellformed() const {
    if (r <= 0 || static_cast<int>(dims.size()) != r)
        throw std::invalid_argument("Configuration: r must match dims length");
    for (long d : dims)
        if (d <= 0) throw std::invalid_argument("Configuration: dims must be positive");
    std::set<std::vector<long>> seen;
    for (const auto& w : weights) {
        if (static_cast<int>(w.vec.size()) != r)
            throw std::invalid_argument("Configuration: weight length mismatch");
        if (w.coefficient.is_zero())
            throw std::invalid_argument("Configuration: zero weight coefficient");
        if (!seen.insert(w.vec).second)
            throw std::invalid_argument("Configuration: duplicate weight vector");
    }
}

std::optional<Rat> Configuration::coefficient_of(const std::vector<long>& w) const {
    for (const auto& wt : weights)
        if (wt.vec == w) return wt.coefficient;
    return std::nullopt;
}

namespace {

// Rank of a rational matrix by Gaussian elimination.
int exact_rank(std::vector<std::vector<Rat>> m) {
    int rank = 0;
    const int rows = static_cast<int>(m.size());
    if (rows == 0) return 0;
    const int cols = static_cast<int>(m[0].size());
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int i = rank; i < rows; ++i) {
            if (!m[i][c].is_zero()) {
                pivot = i;
                break;
            }
        }
        if (pivot < 0) continue;
        std::swap(m[rank], m[pivot]);
        for (int i = rank + 1; i < rows; ++i) {
            if (m[i][c].is_zero()) continue;
            Rat f = m[i][c] / m[rank][c];
            for (int j = c; j < cols; ++j) m[i][j] -= f * m[rank][j];
        }
        ++rank;
    }
    return rank;
}

}  // namespace

MeasureReport validate(const Configuration& cfg) {
    cfg.validate_wellformed();
    MeasureReport rep;
    for (int j = 0; j < cfg.r; ++j) {
        bool covered = false;
        for (const auto& w : cfg.weights)
            if (w.vec[j] != 0) covered = true;
        if (!covered) rep.uncovered_coordinates.push_back(j + 1);
    }
    for (const auto& w : cfg.weights)
        if (classify_weight(w.vec) == WeightKind::Other) rep.nonstandard_weights.push_back(w.vec);
    if (cfg.weights.empty()) {
        rep.hull_dim = -1;
        // The n=1 system has no scalar curvature terms; the measure
        // hypothesis is vacuous there.
        rep.full_measure = (cfg.r == 1);
        return rep;
    }
    std::vector<std::vector<Rat>> diffs;
    for (size_t i = 1; i < cfg.weights.size(); ++i) {
        std::vector<Rat> row(cfg.r);
        for (int j = 0; j < cfg.r; ++j)
            row[j] = Rat(cfg.weights[i].vec[j] - cfg.weights[0].vec[j]);
        diffs.push_back(std::move(row));
    }
    rep.hull_dim = exact_rank(std::move(diffs));
    rep.full_measure = (rep.hull_dim == cfg.r - 1);
    return rep;
}

double scalar_curvature(const Configuration& cfg, std::span<const double> q) {
    if (static_cast<int>(q.size()) != cfg.r)
        throw std::invalid_argument("scalar_curvature: q length mismatch");
    double s = 0;
    for (const auto& w : cfg.weights) {
        double dot = 0;
        for (int j = 0; j < cfg.r; ++j) dot += static_cast<double>(w.vec[j]) * q[j];
        s += w.coefficient.to_double() * std::exp(dot);
    }
    return s;
}

std::vector<Configuration> builtin_catalog() {
    std::vector<Configuration> cat;

    // n=1 two-dimensional soliton: no scalar curvature terms.  Defaults pick
    // a non-steady instance (lambda=1), which admits the one-parameter
    // polynomial-coefficient superpotential family; lambda=0 recovers the
    // steady two-dimensional case.
    {
        Configuration c;
        c.name = "bryant-n1";
        c.r = 1;
        c.dims = {1};
        c.energy = Rat(4);
        c.lambda = Rat(1);
        cat.push_back(std::move(c));
    }
    // Five-dimensional Bryant soliton: principal orbits S^4, A = n(n-1) = 12.
    {
        Configuration c;
        c.name = "bryant5";
        c.r = 1;
        c.dims = {4};
        c.weights = {{{-1}, Rat(12)}};
        c.energy = Rat(1);
        c.lambda = Rat(0);
        cat.push_back(std::move(c));
    }
    // Warped product over two Einstein surfaces, unit 2-spheres (scal = 2).
    {
        Configuration c;
        c.name = "warped-2x2";
        c.r = 2;
        c.dims = {2, 2};
        c.weights = {{{-1, 0}, Rat(2)}, {{0, -1}, Rat(2)}};
        c.energy = Rat(1);
        c.lambda = Rat(0);
        cat.push_back(std::move(c));
    }
    // Berard Bergery-Calabi ansatz at r=2 with d=(1,2).
    {
        Configuration c;
        c.name = "bbc-r2";
        c.r = 2;
        c.dims = {1, 2};
        c.weights = {{{0, -1}, Rat(4)}, {{1, -2}, Rat(-1, 2)}};
        c.energy = Rat(1);
        c.lambda = Rat(0);
        cat.push_back(std::move(c));
    }
    // Berard Bergery-Calabi ansatz at r=3 with d=(1,4,4); the coefficient
    // ratios A^2_{(0,-1,0)}/(d_2 A_{(1,-2,0)}) and A^2_{(0,0,-1)}/(d_3
    // A_{(1,0,-2)}) agree, which the coefficient system requires.
    {
        Configuration c;
        c.name = "bbc-r3";
        c.r = 3;
        c.dims = {1, 4, 4};
        c.weights = {{{0, -1, 0}, Rat(4)},
                     {{0, 0, -1}, Rat(4)},
                     {{1, -2, 0}, Rat(-1, 2)},
                     {{1, 0, -2}, Rat(-1, 2)}};
        c.energy = Rat(1);
        c.lambda = Rat(0);
        cat.push_back(std::move(c));
    }
    // The d=(1,2,2) case carrying the additional superpotential.  Weights are
    // normalised so A_{(0,-1,0)} = A_{(0,0,-1)} = 4 and the type III
    // coefficients equal -1/2, the value the smoothness analysis demands.
    {
        Configuration c;
        c.name = "bbc-case5";
        c.r = 3;
        c.dims = {1, 2, 2};
        c.weights = {{{0, -1, 0}, Rat(4)},
                     {{0, 0, -1}, Rat(4)},
                     {{1, -2, 0}, Rat(-1, 2)},
                     {{1, 0, -2}, Rat(-1, 2)}};
        c.energy = Rat(8);
        c.lambda = Rat(0);
        cat.push_back(std::move(c));
    }
    return cat;
}

std::optional<Configuration> find_catalog_entry(const std::string& name) {
    for (auto& c : builtin_catalog())
        if (c.name == name) return c;
    return std::nullopt;
}

Configuration config_from_json(const nlohmann::json& j) {
    Configuration cfg;
    try {
        cfg.r = j.at("r").get<int>();
        cfg.dims = j.at("dims").get<std::vector<long>>();
        for (const auto& w : j.at("weights")) {
            Weight wt;
            wt.vec = w.at("vec").get<std::vector<long>>();
            wt.coefficient = Rat::parse(w.at("A").get<std::string>());
            cfg.weights.push_back(std::move(wt));
        }
        cfg.energy = Rat::parse(j.at("E").get<std::string>());
        cfg.lambda = Rat::parse(j.at("lambda").get<std::string>());
        if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("configuration schema: ") + e.what());
    }
    cfg.validate_wellformed();
    return cfg;
}

nlohmann::json config_to_json(const Configuration& cfg) {
    nlohmann::json j;
    if (!cfg.name.empty()) j["name"] = cfg.name;
    j["r"] = cfg.r;
    j["dims"] = cfg.dims;
    j["weights"] = nlohmann::json::array();
    for (const auto& w : cfg.weights)
        j["weights"].push_back({{"vec", w.vec}, {"A", w.coefficient.str()}});
    j["E"] = cfg.energy.str();
    j["lambda"] = cfg.lambda.str();
    return j;
}

std::uint64_t config_hash(const Configuration& cfg) {
    // FNV-1a over the canonical JSON rendering.
    const std::string s = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace cohomflow
