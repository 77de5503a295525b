#include "rcdyn/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace rcdyn {

namespace {
constexpr double kProbSumTol = 1e-12;
}

GeneratorSystem::GeneratorSystem(std::vector<RationalMap> maps_, std::vector<double> probs_,
                                 bool allow_line_system)
    : maps(std::move(maps_)), probs(std::move(probs_)) {
    if (maps.size() < 2) throw std::invalid_argument("a system needs s >= 1, i.e. at least two maps");
    if (probs.size() != maps.size())
        throw std::invalid_argument("probability vector length must match the number of maps");
    double sum = 0.0;
    for (double p : probs) {
        if (p <= 0.0) throw std::invalid_argument("probabilities must be positive");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTol)
        throw std::invalid_argument("probabilities must sum to 1");
    for (const auto& m : maps)
        if (m.degree() < 2 && !allow_line_system)
            throw std::invalid_argument("all generators must have degree >= 2");
    line_system = allow_line_system;
    if (line_system) metric = Metric::Euclidean;
}

bool GeneratorSystem::all_polynomial() const {
    for (const auto& m : maps)
        if (!m.is_polynomial()) return false;
    return true;
}

double GeneratorSystem::escape_radius() const {
    // beyond max(1, 2 sum|a_k|/|a_d|, (4/|a_d|)^(1/(d-1))) every polynomial generator
    // satisfies |f(z)| >= 2|z|
    double r = 1.0;
    for (const auto& m : maps) {
        if (!m.is_polynomial()) continue;
        const auto& c = m.numerator();
        const Eigen::Index d = c.size() - 1;
        double s = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) s += std::abs(c[i]);
        const double lead = std::abs(c[d]);
        r = std::max({r, 2.0 * s / lead, std::pow(4.0 / lead, 1.0 / double(d - 1))});
    }
    return 1.0 + r;
}

// ---------------------------------------------------------------------------
// Julia sampling

JuliaAtlas sample_julia(const GeneratorSystem& system, const SampleParams& params) {
    if (params.n_samples <= 0) throw std::invalid_argument("n_samples must be positive");
    const int m = system.symbol_count();
    const auto cum = cumulative_weights(system.probs);

    JuliaAtlas atlas;
    atlas.code_len = params.code_len;
    atlas.seed = params.seed;
    atlas.weighted_by_probs = params.weight_by_probs;
    atlas.samples.reserve(params.n_samples);
    atlas.codes.assign(std::size_t(params.n_samples) * params.code_len, 0);
    atlas.deriv_terms.assign(std::size_t(params.n_samples) * params.code_len, 0.0f);

    const int n_streams = 16;
    const int per_stream = (params.n_samples + n_streams - 1) / n_streams;
    int produced = 0;
    for (int stream = 0; stream < n_streams && produced < params.n_samples; ++stream) {
        Rng rng(params.seed, std::uint64_t(stream));
        SpherePoint z(0.37, 0.21);  // any non-exceptional start; burn-in pulls it into J(G)
        std::vector<std::uint8_t> applied;   // inverse branches, oldest first
        std::vector<float> log_deriv;        // log||f'_sigma(w)|| at each chain point
        applied.reserve(params.burn_in + params.code_len + per_stream);
        log_deriv.reserve(applied.capacity());
        int fails = 0;

        auto backward_step = [&]() -> bool {
            const int symbol = params.weight_by_probs ? int(rng.categorical(cum)) + 1
                                                      : int(rng.index(m)) + 1;
            std::vector<SpherePoint> pre;
            try {
                pre = system.map(symbol).preimages(z);
            } catch (const std::exception&) {
                return false;
            }
            std::vector<int> usable;
            for (int i = 0; i < int(pre.size()); ++i)
                if (pre[i].is_finite() || !system.map(symbol).is_polynomial()) usable.push_back(i);
            if (usable.empty()) return false;
            z = pre[usable[rng.index(usable.size())]];
            applied.push_back(std::uint8_t(symbol));
            log_deriv.push_back(float(std::log(system.map(symbol).derivative_norm(z, system.metric))));
            return true;
        };

        for (int i = 0; i < params.burn_in + per_stream && produced < params.n_samples; ++i) {
            if (!backward_step()) {
                if (++fails > 64)
                    throw std::runtime_error(
                        "backward orbit diverged repeatedly; the system may violate the standing "
                        "assumptions");
                continue;
            }
            if (i < params.burn_in || int(applied.size()) < params.code_len) continue;
            atlas.samples.push_back(z);
            // code and derivative terms: most recent inverse branch first
            for (int c = 0; c < params.code_len; ++c) {
                const std::size_t at = applied.size() - 1 - std::size_t(c);
                atlas.codes[std::size_t(produced) * params.code_len + c] = applied[at];
                atlas.deriv_terms[std::size_t(produced) * params.code_len + c] = log_deriv[at];
            }
            ++produced;
        }
    }
    atlas.samples.resize(produced);
    atlas.codes.resize(std::size_t(produced) * params.code_len);
    atlas.deriv_terms.resize(std::size_t(produced) * params.code_len);
    if (produced == 0) throw std::runtime_error("sampler produced no points");

    double lo_re = 1e300, hi_re = -1e300, lo_im = 1e300, hi_im = -1e300;
    for (const auto& p : atlas.samples) {
        lo_re = std::min(lo_re, p.value.real());
        hi_re = std::max(hi_re, p.value.real());
        lo_im = std::min(lo_im, p.value.imag());
        hi_im = std::max(hi_im, p.value.imag());
    }
    const double margin_re = 0.25 * (hi_re - lo_re) + 0.05;
    const double margin_im = 0.25 * (hi_im - lo_im) + 0.05;
    atlas.box_lo_re = lo_re - margin_re;
    atlas.box_hi_re = hi_re + margin_re;
    atlas.box_lo_im = lo_im - margin_im;
    atlas.box_hi_im = hi_im + margin_im;

    atlas.index = PointIndex(atlas.samples);
    const auto gaps = atlas.index.nearest_neighbor_gaps();
    atlas.hausdorff_resolution = gaps.back();
    // the max gap sits in exponentially thin tails of the sampling measure;
    // a high quantile is the meaningful local scale for the numeric margins
    atlas.typical_gap = gaps[std::size_t(0.9 * double(gaps.size() - 1))];

    // epsilon0: half the minimum distance between samples of distinct leading symbols,
    // computed exactly through per-symbol sub-indexes
    std::vector<std::vector<SpherePoint>> by_symbol(m);
    for (std::size_t i = 0; i < atlas.samples.size(); ++i)
        by_symbol[atlas.code_at(i, 0) - 1].push_back(atlas.samples[i]);
    std::vector<PointIndex> sub;
    sub.reserve(m);
    for (int sym = 0; sym < m; ++sym) sub.emplace_back(by_symbol[sym]);
    double min_gap = 4.0;
    for (std::size_t i = 0; i < atlas.samples.size(); ++i) {
        const int own = atlas.code_at(i, 0) - 1;
        for (int sym = 0; sym < m; ++sym) {
            if (sym == own || by_symbol[sym].empty()) continue;
            const int j = sub[sym].nearest(atlas.samples[i]);
            if (j >= 0) min_gap = std::min(min_gap, sub[sym].distance_to(atlas.samples[i], j));
        }
    }
    atlas.epsilon0 = 0.5 * min_gap;
    return atlas;
}

// ---------------------------------------------------------------------------
// Minimal sets

namespace {

struct OrbitTail {
    bool escaped_plus = false;   // |z| -> infinity (x -> +infinity on the line)
    bool escaped_minus = false;  // x -> -infinity on the line
    std::vector<SpherePoint> cloud;
};

OrbitTail run_orbit(const GeneratorSystem& system, SpherePoint z, int n_steps, int tail_len,
                    Rng& rng) {
    OrbitTail tail;
    const auto cum = cumulative_weights(system.probs);
    const double resc = system.escape_radius();
    int beyond = 0;
    for (int step = 0; step < n_steps; ++step) {
        const int symbol = int(rng.categorical(cum)) + 1;
        z = system.map(symbol)(z);
        if (system.line_system && z.is_finite()) {
            if (z.value.real() > resc) {
                tail.escaped_plus = true;
                return tail;
            }
            if (z.value.real() < -resc) {
                tail.escaped_minus = true;
                return tail;
            }
        }
        if (system.all_polynomial() && (z.infinite || std::abs(z.value) > resc)) {
            if (++beyond >= 3) {
                tail.escaped_plus = true;
                return tail;
            }
        } else {
            beyond = 0;
        }
        if (step >= n_steps - tail_len) tail.cloud.push_back(z);
    }
    return tail;
}

double cloud_min_distance(const std::vector<SpherePoint>& a, const std::vector<SpherePoint>& b,
                          std::size_t cap = 48) {
    double best = 4.0;
    const std::size_t stride_a = std::max<std::size_t>(1, a.size() / cap);
    const std::size_t stride_b = std::max<std::size_t>(1, b.size() / cap);
    for (std::size_t i = 0; i < a.size(); i += stride_a)
        for (std::size_t j = 0; j < b.size(); j += stride_b)
            best = std::min(best, chordal_distance(a[i], b[j]));
    return best;
}

}  // namespace

std::vector<MinimalSetEstimate> find_minimal_sets(const GeneratorSystem& system,
                                                  const MinimalSetParams& params) {
    std::vector<SpherePoint> seeds;
    if (system.line_system) {
        for (int i = 0; i < params.n_seeds; ++i)
            seeds.emplace_back(double(i) / std::max(1, params.n_seeds - 1), 0.0);
    } else {
        const int side = std::max(2, int(std::sqrt(double(params.n_seeds))));
        const double r = system.escape_radius();
        for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j)
                seeds.emplace_back(-r + 2.0 * r * (i + 0.5) / side, -r + 2.0 * r * (j + 0.5) / side);
        seeds.push_back(SpherePoint::infinity());
    }

    std::vector<OrbitTail> tails;
    tails.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        Rng rng(params.seed, i);
        tails.push_back(run_orbit(system, seeds[i], params.n_steps, params.tail_len, rng));
    }

    std::vector<MinimalSetEstimate> out;
    int plus_hits = 0, minus_hits = 0;
    std::vector<int> bounded;
    for (std::size_t i = 0; i < tails.size(); ++i) {
        if (tails[i].escaped_plus) ++plus_hits;
        else if (tails[i].escaped_minus) ++minus_hits;
        else if (!tails[i].cloud.empty()) bounded.push_back(int(i));
    }
    if (plus_hits > 0) {
        MinimalSetEstimate inf_set;
        inf_set.is_point_at_infinity = true;
        inf_set.line_sign = system.line_system ? +1 : 0;
        inf_set.basin_hits = plus_hits;
        inf_set.representative_points = {SpherePoint::infinity()};
        out.push_back(inf_set);
    }
    if (minus_hits > 0) {
        MinimalSetEstimate minf;
        minf.is_point_at_infinity = true;
        minf.line_sign = -1;
        minf.basin_hits = minus_hits;
        minf.representative_points = {SpherePoint::infinity()};
        out.push_back(minf);
    }

    // single-linkage over tail clouds: independent samples of the same minimal set
    // interleave, so their minimum pairwise distance is far below the merge radius
    std::vector<int> parent(bounded.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (std::size_t a = 0; a < bounded.size(); ++a)
        for (std::size_t b = a + 1; b < bounded.size(); ++b) {
            if (find(int(a)) == find(int(b))) continue;
            if (cloud_min_distance(tails[bounded[a]].cloud, tails[bounded[b]].cloud) <=
                params.merge_radius)
                parent[find(int(b))] = find(int(a));
        }

    std::map<int, std::vector<int>> groups;
    for (std::size_t a = 0; a < bounded.size(); ++a) groups[find(int(a))].push_back(bounded[a]);

    for (const auto& [root, members] : groups) {
        MinimalSetEstimate est;
        est.basin_hits = int(members.size());
        for (int idx : members)
            for (const auto& p : tails[idx].cloud)
                if (est.representative_points.size() < 256) est.representative_points.push_back(p);
        double diam = 0.0;
        for (std::size_t i = 0; i < est.representative_points.size(); ++i)
            for (std::size_t j = i + 1; j < est.representative_points.size(); ++j)
                diam = std::max(diam, chordal_distance(est.representative_points[i],
                                                       est.representative_points[j]));
        est.diameter = diam;
        out.push_back(std::move(est));
    }

    if (out.empty())
        throw std::runtime_error("no orbit cluster stabilized; minimal-set detection inconclusive");
    return out;
}

// ---------------------------------------------------------------------------
// Assumption verification

namespace {

// deduplication on a quantized lattice; cheap and deterministic
struct QuantizedSet {
    double q;
    std::set<std::tuple<long long, long long, int>> seen;
    explicit QuantizedSet(double quantum) : q(std::max(quantum, 1e-9)) {}
    bool insert(const SpherePoint& p) {
        if (p.infinite) return seen.insert({0, 0, 1}).second;
        return seen
            .insert({(long long)std::llround(p.value.real() / q),
                     (long long)std::llround(p.value.imag() / q), 0})
            .second;
    }
};

}  // namespace

AssumptionReport verify_assumptions(const GeneratorSystem& system, const JuliaAtlas& atlas,
                                    const VerifyParams& params) {
    AssumptionReport report;
    const double res = atlas.typical_gap;

    report.separating.margin = atlas.epsilon0;
    report.separating.pass = 2.0 * atlas.epsilon0 > params.separating_margin_factor * res;

    // hyperbolicity: iterate the critical values forward under every generator and
    // require a uniform gap between the sampled postcritical set and the atlas
    {
        std::vector<SpherePoint> frontier;
        bool unbounded_critical_orbit = false;
        const double resc = system.escape_radius();
        for (const auto& m : system.maps)
            for (const auto& v : m.critical_values()) frontier.push_back(v);
        std::vector<SpherePoint> postcritical = frontier;

        QuantizedSet recorded(0.25 * std::max(res, 1e-7));
        for (const auto& p : frontier) recorded.insert(p);

        for (int round = 0; round < params.postcritical_rounds; ++round) {
            std::vector<SpherePoint> next;
            for (const auto& p : frontier)
                for (int sym = 1; sym <= system.symbol_count(); ++sym) {
                    SpherePoint q = system.map(sym)(p);
                    if (system.all_polynomial() && q.is_finite() && std::abs(q.value) > resc) {
                        if (p.is_finite() && std::abs(p.value) <= resc)
                            unbounded_critical_orbit = true;  // finite orbit crossing outward
                        q = SpherePoint::infinity();
                    }
                    if (recorded.insert(q)) next.push_back(q);
                }
            if (int(next.size()) > params.postcritical_cap) next.resize(params.postcritical_cap);
            frontier = std::move(next);
            for (const auto& q : frontier) postcritical.push_back(q);
            if (frontier.empty()) break;
        }
        double min_dist = 4.0;
        for (const auto& q : postcritical) {
            const int j = atlas.index.nearest(q);
            if (j >= 0) min_dist = std::min(min_dist, atlas.index.distance_to(q, j));
        }
        report.hyperbolic.margin = min_dist;
        report.hyperbolic.pass = min_dist > params.hyperbolic_margin_factor * res;
        report.postcritically_bounded = system.all_polynomial() && !unbounded_critical_orbit;
    }

    report.minimal_sets = find_minimal_sets(system, params.minimal_params);

    report.expansion_condition.assign(system.symbol_count(), false);
    for (int sym = 1; sym <= system.symbol_count(); ++sym) {
        double min_norm = 1e300;
        bool seen = false;
        for (std::size_t i = 0; i < atlas.samples.size(); ++i) {
            if (atlas.code_at(i, 0) != sym) continue;
            seen = true;
            min_norm = std::min(min_norm,
                                system.map(sym).derivative_norm(atlas.samples[i], system.metric));
        }
        report.expansion_condition[sym - 1] = seen && system.prob(sym) * min_norm > 1.0;
    }

    if (!report.separating.pass) report.failure_reason = "separating condition";
    else if (!report.hyperbolic.pass) report.failure_reason = "hyperbolicity";
    else if (!report.minimal_sets_pass()) report.failure_reason = "fewer than two minimal sets";
    return report;
}

// ---------------------------------------------------------------------------
// Power systems

GeneratorSystem power_system(const std::vector<RationalMap>& base_maps,
                             const std::vector<double>& probs, int n) {
    if (n < 1) throw std::invalid_argument("power must be >= 1");
    std::vector<RationalMap> out;
    out.reserve(base_maps.size());
    for (const auto& g : base_maps) {
        double deg = 1.0;
        for (int k = 0; k < n; ++k) deg *= g.degree();
        if (deg > 4096.0)
            throw std::invalid_argument("power system degree " + std::to_string(deg) +
                                        " exceeds the supported bound 4096");
        RationalMap f = g;
        for (int k = 1; k < n; ++k) f = f.compose(g);
        out.push_back(std::move(f));
    }
    return GeneratorSystem(std::move(out), probs);
}

std::pair<int, GeneratorSystem> find_power(const std::vector<RationalMap>& base_maps,
                                           const std::vector<double>& probs, int n_max,
                                           bool require_expansion,
                                           const SampleParams& sample_params) {
    std::string last_reason = "no power attempted";
    for (int n = 1; n <= n_max; ++n) {
        GeneratorSystem sys = power_system(base_maps, probs, n);
        try {
            const JuliaAtlas atlas = sample_julia(sys, sample_params);
            const AssumptionReport rep = verify_assumptions(sys, atlas);
            if (rep.all_pass() && (!require_expansion || rep.expansion_all()))
                return {n, std::move(sys)};
            last_reason = rep.failure_reason.empty() ? "expansion condition" : rep.failure_reason;
        } catch (const std::exception& e) {
            last_reason = e.what();
        }
    }
    throw std::runtime_error("no power up to " + std::to_string(n_max) +
                             " passes the checks; last failure: " + last_reason);
}

// ---------------------------------------------------------------------------
// Presets

namespace {
CoeffVector poly_coeffs(std::initializer_list<Complex> list) {
    CoeffVector c(Eigen::Index(list.size()));
    Eigen::Index i = 0;
    for (const auto& v : list) c[i++] = v;
    return c;
}
}  // namespace

GeneratorSystem make_preset(const std::string& name) {
    if (name == "ex-6.2") {
        // f_i = g_i o g_i with g_1 = z^2 - 1, g_2 = z^2 / 4
        const RationalMap g1 = RationalMap::from_polynomial(poly_coeffs({-1.0, 0.0, 1.0}));
        const RationalMap g2 = RationalMap::from_polynomial(poly_coeffs({0.0, 0.0, 0.25}));
        return power_system({g1, g2}, {0.5, 0.5}, 2);
    }
    if (name == "ex-lambda-z3") {
        const RationalMap f1 = RationalMap::from_polynomial(poly_coeffs({-1.0, 0.0, 1.0}));
        const RationalMap f2 = RationalMap::from_polynomial(poly_coeffs({0.0, 0.0, 0.0, 0.01}));
        return GeneratorSystem({f1, f2}, {0.5, 0.5});
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace rcdyn
