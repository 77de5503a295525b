#pragma once

#include "rcdyn/point_index.hpp"
#include "rcdyn/rng.hpp"
#include "rcdyn/sphere.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rcdyn {

// The whole random system: generators f_1..f_{s+1} with selection weights p_i.
struct GeneratorSystem {
    std::vector<RationalMap> maps;
    std::vector<double> probs;
    Metric metric = Metric::Chordal;
    bool line_system = false;  // one-dimensional interval system (oracle use)
    std::optional<int> attracting_target;  // index into detected minimal sets

    GeneratorSystem(std::vector<RationalMap> maps_, std::vector<double> probs_,
                    bool allow_line_system = false);

    int symbol_count() const { return int(maps.size()); }  // s+1
    int s() const { return int(maps.size()) - 1; }
    bool all_polynomial() const;
    const RationalMap& map(int symbol) const { return maps[symbol - 1]; }  // 1-based
    double prob(int symbol) const { return probs[symbol - 1]; }

    // beyond this radius every generator strictly increases |z| (polynomial systems)
    double escape_radius() const;
};

// Weighted point-cloud picture of J(G). code stores, most recent branch first, the
// symbols of the inverse maps that produced each sample; following the code forward
// keeps the orbit inside J(G).
struct JuliaAtlas {
    std::vector<SpherePoint> samples;
    int code_len = 0;
    std::vector<std::uint8_t> codes;  // flattened, samples.size() * code_len, symbols 1..s+1
    double epsilon0 = 0.0;
    double hausdorff_resolution = 0.0;  // max nearest-neighbor gap
    double typical_gap = 0.0;           // 90th-percentile nearest-neighbor gap
    double box_lo_re = 0.0, box_hi_re = 0.0, box_lo_im = 0.0, box_hi_im = 0.0;
    std::uint64_t seed = 0;
    bool weighted_by_probs = false;  // symbols drawn with probability p_i instead of uniformly
    // log ||f'_{code[c]}(z_c)|| along the coded forward orbit of each sample, taken at the
    // backward-chain points themselves (each polished to root tolerance, so deep Birkhoff
    // sums carry no forward error amplification)
    std::vector<float> deriv_terms;
    PointIndex index;

    int code_at(std::size_t sample, int depth) const {
        return int(codes[sample * std::size_t(code_len) + std::size_t(depth)]);
    }
    double deriv_term_at(std::size_t sample, int depth) const {
        return double(deriv_terms[sample * std::size_t(code_len) + std::size_t(depth)]);
    }
    // S_k of -log||f'|| along the coded orbit (negative once expansion kicks in)
    double phi_sum(std::size_t sample, int k) const {
        double s = 0.0;
        for (int c = 0; c < k; ++c) s -= deriv_term_at(sample, c);
        return s;
    }
    bool in_box(const SpherePoint& p, double margin = 0.0) const {
        if (p.infinite) return false;
        const double x = p.value.real(), y = p.value.imag();
        return x >= box_lo_re - margin && x <= box_hi_re + margin && y >= box_lo_im - margin &&
               y <= box_hi_im + margin;
    }
};

struct MinimalSetEstimate {
    std::vector<SpherePoint> representative_points;
    double diameter = 0.0;
    int basin_hits = 0;
    bool is_point_at_infinity = false;
    int line_sign = 0;  // +1 / -1 for the two ends of a line system, else 0

    SpherePoint representative() const {
        return is_point_at_infinity ? SpherePoint::infinity() : representative_points.front();
    }
};

struct AssumptionCheck {
    bool pass = false;
    double margin = 0.0;
};

struct AssumptionReport {
    AssumptionCheck hyperbolic;       // margin: min distance from sampled P(G) to the atlas
    AssumptionCheck separating;       // margin: epsilon0
    std::vector<MinimalSetEstimate> minimal_sets;
    std::vector<bool> expansion_condition;  // p_i min ||f_i'|| > 1 per symbol
    bool postcritically_bounded = false;
    std::string failure_reason;

    bool minimal_sets_pass() const { return minimal_sets.size() >= 2; }
    bool all_pass() const { return hyperbolic.pass && separating.pass && minimal_sets_pass(); }
    bool expansion_all() const {
        for (bool b : expansion_condition)
            if (!b) return false;
        return !expansion_condition.empty();
    }
};

struct SampleParams {
    int n_samples = 20000;
    int burn_in = 64;
    int code_len = 24;
    std::uint64_t seed = 1;
    bool weight_by_probs = false;  // maximal-entropy-measure mode
};

// Backward random-orbit sampler (chaos game on inverse branches).
JuliaAtlas sample_julia(const GeneratorSystem& system, const SampleParams& params);

struct MinimalSetParams {
    int n_seeds = 200;
    int n_steps = 400;
    int tail_len = 128;
    double merge_radius = 1e-3;
    std::uint64_t seed = 2;
};

// Clusters omega-limit sets of long random orbits started on a seed grid.
// The returned count is a lower bound; tiny-basin minimal sets can be missed.
std::vector<MinimalSetEstimate> find_minimal_sets(const GeneratorSystem& system,
                                                  const MinimalSetParams& params);

struct VerifyParams {
    int postcritical_rounds = 40;
    int postcritical_cap = 4096;
    double hyperbolic_margin_factor = 5.0;
    double separating_margin_factor = 3.0;
    MinimalSetParams minimal_params;
};

// Numerical (non-rigorous) checks of the standing assumptions.
AssumptionReport verify_assumptions(const GeneratorSystem& system, const JuliaAtlas& atlas,
                                    const VerifyParams& params = {});

// f_i = g_i composed with itself n times. Refuses degree growth beyond 4096.
GeneratorSystem power_system(const std::vector<RationalMap>& base_maps,
                             const std::vector<double>& probs, int n);

// least n <= n_max whose power system passes the checks (and, optionally, the
// per-symbol expansion condition); returns the system alongside
std::pair<int, GeneratorSystem> find_power(const std::vector<RationalMap>& base_maps,
                                           const std::vector<double>& probs, int n_max,
                                           bool require_expansion = false,
                                           const SampleParams& sample_params = {});

// named example systems used across tests and the command line
GeneratorSystem make_preset(const std::string& name);

}  // namespace rcdyn
