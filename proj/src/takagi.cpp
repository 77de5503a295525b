#include "rcdyn/takagi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rcdyn {

namespace {

constexpr double kInterpRadiusFactor = 10.0;  // queries beyond this many resolutions are unresolved

struct Classifier {
    const FieldSpace& space;
    double escape;
    std::vector<double> radius;            // capture radius per minimal set
    std::vector<const MinimalSetEstimate*> sets;
    std::vector<double> cum;

    explicit Classifier(const FieldSpace& s)
        : space(s), escape(s.system.escape_radius()), cum(cumulative_weights(s.system.probs)) {
        for (std::size_t m = 0; m < s.minimal_sets.size(); ++m) {
            sets.push_back(&s.minimal_sets[m]);
            radius.push_back(s.capture_radius(int(m)));
        }
    }

    // returns minimal-set index or -1 (undecided)
    int run(SpherePoint z, Rng& rng, int max_steps) const {
        int candidate = -1, confirm = 0, beyond_plus = 0, beyond_minus = 0;
        for (int step = 0; step < max_steps; ++step) {
            const int symbol = int(rng.categorical(cum)) + 1;
            z = space.system.map(symbol)(z);

            int hit = -1;
            if (space.system.line_system && z.is_finite()) {
                if (z.value.real() > escape) ++beyond_plus;
                else beyond_plus = 0;
                if (z.value.real() < -escape) ++beyond_minus;
                else beyond_minus = 0;
                if (beyond_plus >= 2) hit = find_infinite(+1);
                if (beyond_minus >= 2) hit = find_infinite(-1);
            } else if (z.infinite || (space.system.all_polynomial() && std::abs(z.value) > escape)) {
                if (++beyond_plus >= 3 || z.infinite) hit = find_infinite(0);
            } else {
                beyond_plus = 0;
                for (std::size_t m = 0; m < sets.size(); ++m) {
                    if (sets[m]->is_point_at_infinity) continue;
                    if (distance_to_set(*sets[m], z) <= radius[m]) {
                        hit = int(m);
                        break;
                    }
                }
            }
            if (hit >= 0 && hit == candidate) {
                if (++confirm >= 5 || sets[hit]->is_point_at_infinity) return hit;
            } else if (hit >= 0) {
                candidate = hit;
                confirm = 1;
            } else {
                candidate = -1;
                confirm = 0;
            }
        }
        return -1;
    }

    int find_infinite(int sign) const {
        for (std::size_t m = 0; m < sets.size(); ++m)
            if (sets[m]->is_point_at_infinity && (sign == 0 || sets[m]->line_sign == sign))
                return int(m);
        return -1;
    }

    static double distance_to_set(const MinimalSetEstimate& set, const SpherePoint& z) {
        double best = 4.0;
        for (const auto& p : set.representative_points)
            best = std::min(best, chordal_distance(p, z));
        return best;
    }
};

}  // namespace

double FieldSpace::capture_radius(int m) const {
    const auto& set = minimal_sets[std::size_t(m)];
    // keep the neighborhood well inside this set's basin: below half the distance
    // to every other minimal set
    double cap = 4.0;
    for (std::size_t o = 0; o < minimal_sets.size(); ++o) {
        if (int(o) == m) continue;
        double d = 4.0;
        for (const auto& p : set.representative_points)
            for (const auto& q : minimal_sets[o].representative_points)
                d = std::min(d, chordal_distance(p, q));
        cap = std::min(cap, 0.45 * d);
    }
    return std::clamp(3.0 * set.diameter, 1e-3, std::max(1e-3, cap));
}

int FieldSpace::component_at(const SpherePoint& z) const {
    if (system.line_system) {
        if (z.infinite) return fatou.outside_plus;
        const double x = z.value.real();
        if (x > fatou.x0 + fatou.dx * fatou.nx) return fatou.outside_plus;
        if (x < fatou.x0) return fatou.outside_minus;
        const int ix = std::clamp(int((x - fatou.x0) / fatou.dx), 0, fatou.nx - 1);
        return fatou.label_of_cell(ix, 0);
    }
    if (z.infinite || !atlas.in_box(z)) return fatou.outside_plus;
    const int ix = std::clamp(int((z.value.real() - fatou.x0) / fatou.dx), 0, fatou.nx - 1);
    const int iy = std::clamp(int((z.value.imag() - fatou.y0) / fatou.dy), 0, fatou.ny - 1);
    return fatou.label_of_cell(ix, iy);
}

EvalPlan FieldSpace::plan_at(const SpherePoint& z) const {
    EvalPlan plan;
    const int comp = component_at(z);
    if (comp >= 0) {
        plan.kind = EvalPlan::Component;
        plan.comp = comp;
        return plan;
    }
    const auto nn = atlas.index.k_nearest(z, 8);
    if (!nn.empty()) {
        const double nearest = atlas.index.distance_to(z, nn.front());
        if (nearest <= kInterpRadiusFactor * atlas.hausdorff_resolution) {
            plan.kind = EvalPlan::Interpolate;
            plan.n = std::uint8_t(nn.size());
            double wsum = 0.0;
            for (std::size_t i = 0; i < nn.size(); ++i) {
                plan.idx[i] = nn[i];
                const double d = std::max(atlas.index.distance_to(z, nn[i]), 1e-14);
                plan.w[i] = float(1.0 / d);
                wsum += 1.0 / d;
            }
            for (std::size_t i = 0; i < nn.size(); ++i) plan.w[i] = float(plan.w[i] / wsum);
            return plan;
        }
        plan.kind = EvalPlan::Fallback;
        plan.idx[0] = nn.front();
        plan.n = 1;
        return plan;
    }
    plan.kind = EvalPlan::Fallback;
    plan.n = 0;
    return plan;
}

Complex FieldSpace::evaluate(const GridField& field, const EvalPlan& plan) const {
    switch (plan.kind) {
        case EvalPlan::Component:
            return field.fatou_values[plan.comp];
        case EvalPlan::Interpolate: {
            Complex acc(0.0, 0.0);
            for (int i = 0; i < plan.n; ++i) acc += double(plan.w[i]) * field.atlas_values[plan.idx[i]];
            return acc;
        }
        case EvalPlan::Fallback:
            return plan.n > 0 ? field.atlas_values[plan.idx[0]] : Complex(0.0, 0.0);
    }
    return {0.0, 0.0};
}

Complex FieldSpace::evaluate_strict(const GridField& field, const SpherePoint& z) const {
    const EvalPlan plan = plan_at(z);
    if (plan.kind == EvalPlan::Fallback)
        throw std::runtime_error(
            "query in unresolved region: farther than 10 resolutions from the atlas and not in a "
            "labeled component");
    return evaluate(field, plan);
}

const std::vector<EvalPlan>& FieldSpace::image_plans(int symbol) const {
    if (image_plans_.empty()) image_plans_.resize(system.symbol_count());
    auto& plans = image_plans_[symbol - 1];
    if (!plans.empty()) return plans;
    plans.reserve(n_sites());
    for (const auto& z : atlas.samples) plans.push_back(plan_at(system.map(symbol)(z)));
    for (const auto& r : fatou.representatives) plans.push_back(plan_at(system.map(symbol)(r)));
    return plans;
}

// ---------------------------------------------------------------------------
// Fatou labeling

namespace {

struct Signature {
    // orbit checkpoints under each probe word; empty value = escaped
    std::vector<SpherePoint> checkpoints;
    bool valid = false;
};

Signature probe_signature(const GeneratorSystem& system,
                          const std::vector<std::vector<int>>& words,
                          const std::vector<int>& checkpoint_steps, SpherePoint z0) {
    Signature sig;
    const double esc = 4.0 * system.escape_radius();
    for (const auto& word : words) {
        SpherePoint z = z0;
        std::size_t next_cp = 0;
        for (std::size_t k = 0; k < word.size(); ++k) {
            z = system.map(word[k])(z);
            if (z.is_finite() && std::abs(z.value) > esc) z = SpherePoint::infinity();
            if (z.infinite) {
                // polynomial case: absorbed; emit the remaining checkpoints at infinity
                while (next_cp < checkpoint_steps.size() && system.all_polynomial()) {
                    sig.checkpoints.push_back(SpherePoint::infinity());
                    ++next_cp;
                }
                if (system.all_polynomial()) break;
            }
            if (next_cp < checkpoint_steps.size() && int(k) + 1 == checkpoint_steps[next_cp]) {
                sig.checkpoints.push_back(z);
                ++next_cp;
            }
        }
        while (next_cp < checkpoint_steps.size()) {
            sig.checkpoints.push_back(z);
            ++next_cp;
        }
    }
    sig.valid = true;
    return sig;
}

bool signatures_linked(const Signature& a, const Signature& b, double tol) {
    if (a.checkpoints.size() != b.checkpoints.size()) return false;
    for (std::size_t i = 0; i < a.checkpoints.size(); ++i)
        if (chordal_distance(a.checkpoints[i], b.checkpoints[i]) > tol) return false;
    return true;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

FatouLabels label_components(const GeneratorSystem& system, const JuliaAtlas& atlas,
                             const std::vector<MinimalSetEstimate>& minimal_sets,
                             const FieldSpaceParams& params) {
    FatouLabels fl;
    const bool line = system.line_system;
    fl.nx = line ? std::max(params.grid_cells * 8, 512) : params.grid_cells;
    fl.ny = line ? 1 : params.grid_cells;
    fl.x0 = atlas.box_lo_re;
    fl.y0 = line ? 0.0 : atlas.box_lo_im;
    fl.dx = (atlas.box_hi_re - atlas.box_lo_re) / fl.nx;
    fl.dy = line ? 1.0 : (atlas.box_hi_im - atlas.box_lo_im) / fl.ny;
    fl.cell_label.assign(std::size_t(fl.nx) * fl.ny, -1);

    // candidate cells must clear the Julia samples by a safe multiple of both the
    // cell size and the sampling scale
    const double cell_diag = line ? fl.dx : std::hypot(fl.dx, fl.dy);
    const double clearance = std::max(1.5 * cell_diag, 4.0 * atlas.typical_gap);

    // fixed random words shared by all probes
    Rng wrng(params.label_seed, 0);
    std::vector<std::vector<int>> words(params.signature_words);
    const auto cum = cumulative_weights(system.probs);
    for (auto& w : words) {
        w.resize(params.signature_len);
        for (auto& s : w) s = int(wrng.categorical(cum)) + 1;
    }
    std::vector<int> checkpoints;
    for (int c = 6; c <= params.signature_len; c *= 2) checkpoints.push_back(c);

    auto center = [&](int ix, int iy) {
        return SpherePoint(fl.x0 + (ix + 0.5) * fl.dx, line ? 0.0 : fl.y0 + (iy + 0.5) * fl.dy);
    };

    std::vector<Signature> sigs(fl.cell_label.size());
    std::vector<char> candidate(fl.cell_label.size(), 0);
    for (int iy = 0; iy < fl.ny; ++iy)
        for (int ix = 0; ix < fl.nx; ++ix) {
            const std::size_t at = std::size_t(iy) * fl.nx + ix;
            const SpherePoint c = center(ix, iy);
            const int nn = atlas.index.nearest(c);
            if (nn >= 0 && atlas.index.distance_to(c, nn) < clearance) continue;
            candidate[at] = 1;
            sigs[at] = probe_signature(system, words, checkpoints, c);
        }

    // flood fill: adjacent candidates with uniformly close orbits share a component
    const double link_tol = std::max(0.5 * atlas.epsilon0, 0.02);
    UnionFind uf(int(fl.cell_label.size()));
    for (int iy = 0; iy < fl.ny; ++iy)
        for (int ix = 0; ix < fl.nx; ++ix) {
            const int at = iy * fl.nx + ix;
            if (!candidate[at]) continue;
            if (ix + 1 < fl.nx && candidate[at + 1] &&
                signatures_linked(sigs[at], sigs[at + 1], link_tol))
                uf.unite(at, at + 1);
            if (iy + 1 < fl.ny && candidate[at + fl.nx] &&
                signatures_linked(sigs[at], sigs[at + fl.nx], link_tol))
                uf.unite(at, at + fl.nx);
        }

    // assign dense component ids; pick per component the cell farthest from the atlas
    std::map<int, int> root_to_id;
    std::vector<double> best_clearance;
    for (int iy = 0; iy < fl.ny; ++iy)
        for (int ix = 0; ix < fl.nx; ++ix) {
            const int at = iy * fl.nx + ix;
            if (!candidate[at]) continue;
            const int root = uf.find(at);
            auto [it, fresh] = root_to_id.try_emplace(root, int(root_to_id.size()));
            const int id = it->second;
            fl.cell_label[at] = id;
            const SpherePoint c = center(ix, iy);
            const int nn = atlas.index.nearest(c);
            const double clear = nn >= 0 ? atlas.index.distance_to(c, nn) : 1.0;
            if (fresh) {
                fl.representatives.push_back(c);
                best_clearance.push_back(clear);
            } else if (clear > best_clearance[std::size_t(id)]) {
                fl.representatives[std::size_t(id)] = c;
                best_clearance[std::size_t(id)] = clear;
            }
        }
    fl.n_components = int(root_to_id.size());

    // pseudo-components for the unbounded region
    fl.outside_plus = fl.n_components;
    fl.representatives.push_back(line ? SpherePoint(fl.x0 + fl.dx * fl.nx + 1.0, 0.0)
                                      : SpherePoint::infinity());
    if (line) {
        fl.outside_minus = fl.n_components + 1;
        fl.representatives.push_back(SpherePoint(fl.x0 - 1.0, 0.0));
    } else {
        fl.outside_minus = fl.outside_plus;
    }

    // locate the component of each minimal set
    fl.minimal_set_component.assign(minimal_sets.size(), -1);
    for (std::size_t m = 0; m < minimal_sets.size(); ++m) {
        const auto& set = minimal_sets[m];
        if (set.is_point_at_infinity) {
            fl.minimal_set_component[m] = set.line_sign < 0 ? fl.outside_minus : fl.outside_plus;
            continue;
        }
        // majority vote over representative points that land in labeled cells
        std::map<int, int> votes;
        for (const auto& p : set.representative_points) {
            if (p.infinite || !atlas.in_box(p)) continue;
            const int ix = std::clamp(int((p.value.real() - fl.x0) / fl.dx), 0, fl.nx - 1);
            const int iy = line ? 0 : std::clamp(int((p.value.imag() - fl.y0) / fl.dy), 0, fl.ny - 1);
            const int lab = fl.label_of_cell(ix, iy);
            if (lab >= 0) votes[lab] += 1;
        }
        int best = -1, count = 0;
        for (const auto& [lab, c] : votes)
            if (c > count) {
                best = lab;
                count = c;
            }
        fl.minimal_set_component[m] = best;
    }
    return fl;
}

}  // namespace

FieldSpace assemble_field_space(GeneratorSystem system, JuliaAtlas atlas,
                                std::vector<MinimalSetEstimate> minimal_sets, int attracting_index,
                                const FieldSpaceParams& params) {
    FieldSpace space(std::move(system), std::move(atlas), std::move(minimal_sets), attracting_index);
    space.fatou = label_components(space.system, space.atlas, space.minimal_sets, params);
    return space;
}

FieldSpace build_field_space(const GeneratorSystem& system, const FieldSpaceParams& params) {
    JuliaAtlas atlas = sample_julia(system, params.sample);
    auto minimal = find_minimal_sets(system, params.minimal);
    // default attracting target: the point at infinity where present (line: +infinity)
    int L = 0;
    for (std::size_t m = 0; m < minimal.size(); ++m)
        if (minimal[m].is_point_at_infinity && minimal[m].line_sign >= 0) L = int(m);
    return assemble_field_space(system, std::move(atlas), std::move(minimal), L, params);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimation of T

TPointEstimate estimate_T_at(const FieldSpace& space, const std::vector<SpherePoint>& points,
                             const EstimateTParams& params) {
    const Classifier classifier(space);
    TPointEstimate out;
    out.values.resize(Eigen::Index(points.size()));
    out.ci_halfwidth.resize(Eigen::Index(points.size()));
    out.undecided.resize(Eigen::Index(points.size()));

    const double zq = 1.959963984540054;  // 95% normal quantile
    for (std::size_t i = 0; i < points.size(); ++i) {
        int hits = 0, undecided = 0;
        for (int t = 0; t < params.trials; ++t) {
            Rng rng(params.seed, mix64(i * 1000003ULL + std::uint64_t(t)));
            const int cls = classifier.run(points[i], rng, params.max_steps);
            if (cls < 0) ++undecided;
            else if (cls == space.attracting_index) ++hits;
        }
        const double n = double(params.trials);
        const double phat = double(hits) / n;
        const double denom = 1.0 + zq * zq / n;
        const double half =
            zq * std::sqrt(phat * (1.0 - phat) / n + zq * zq / (4.0 * n * n)) / denom;
        out.values[Eigen::Index(i)] = phat;
        out.ci_halfwidth[Eigen::Index(i)] = half;
        out.undecided[Eigen::Index(i)] = double(undecided) / n;
    }
    return out;
}

GridField estimate_T(const FieldSpace& space, const EstimateTParams& params,
                     MonteCarloStats* stats) {
    std::vector<SpherePoint> sites;
    sites.reserve(space.n_sites());
    for (const auto& z : space.atlas.samples) sites.push_back(z);
    for (const auto& r : space.fatou.representatives) sites.push_back(r);

    const TPointEstimate est = estimate_T_at(space, sites, params);

    GridField field;
    field.index = MultiIndex::zero(space.system.s());
    const Eigen::Index n = Eigen::Index(space.atlas.samples.size());
    field.atlas_values.resize(n);
    field.fatou_values.resize(Eigen::Index(space.fatou.representatives.size()));
    for (Eigen::Index i = 0; i < n; ++i) field.atlas_values[i] = est.values[i];
    for (Eigen::Index c = 0; c < field.fatou_values.size(); ++c)
        field.fatou_values[c] = est.values[n + c];

    // exact values on the minimal-set components (infinity sets map to the pseudo-components)
    const auto& fl = space.fatou;
    for (std::size_t m = 0; m < space.minimal_sets.size(); ++m) {
        const int comp = fl.minimal_set_component[m];
        if (comp >= 0) field.fatou_values[comp] = (int(m) == space.attracting_index) ? 1.0 : 0.0;
    }

    double max_ci = 0.0, max_und = 0.0;
    for (Eigen::Index i = 0; i < est.ci_halfwidth.size(); ++i) {
        max_ci = std::max(max_ci, est.ci_halfwidth[i]);
        max_und = std::max(max_und, est.undecided[i]);
    }
    field.error_bound = max_ci + max_und;
    if (stats) {
        stats->ci_halfwidth = est.ci_halfwidth;
        stats->undecided_fraction = max_und;
        stats->low_confidence = max_und > 0.01;
    }
    return field;
}

// ---------------------------------------------------------------------------
// Transition operator and the functional-equation series

GridField apply_M(const FieldSpace& space, const GridField& field) {
    GridField out;
    out.index = field.index;
    out.is_combo = field.is_combo;
    const Eigen::Index n = Eigen::Index(space.atlas.samples.size());
    const Eigen::Index nc = Eigen::Index(space.fatou.representatives.size());
    out.atlas_values = Eigen::VectorXcd::Zero(n);
    out.fatou_values = Eigen::VectorXcd::Zero(nc);

    double worst_interp = 0.0;
    bool fallback_used = false;
    for (int sym = 1; sym <= space.system.symbol_count(); ++sym) {
        const double p = space.system.prob(sym);
        const auto& plans = space.image_plans(sym);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& plan = plans[std::size_t(i)];
            out.atlas_values[i] += p * space.evaluate(field, plan);
            if (plan.kind == EvalPlan::Interpolate) {
                // local spread among the neighbors bounds the interpolation error
                double lo = 1e300, hi = -1e300;
                for (int k = 0; k < plan.n; ++k) {
                    const double v = std::abs(field.atlas_values[plan.idx[k]]);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                worst_interp = std::max(worst_interp, 0.5 * (hi - lo));
            } else if (plan.kind == EvalPlan::Fallback) {
                fallback_used = true;
            }
        }
        for (Eigen::Index c = 0; c < nc; ++c) {
            const auto& plan = plans[std::size_t(n + c)];
            out.fatou_values[c] += p * space.evaluate(field, plan);
            if (plan.kind == EvalPlan::Fallback) fallback_used = true;
        }
    }
    out.error_bound = field.error_bound + worst_interp;
    if (fallback_used) out.error_bound += 0.5 * sup_norm(field);
    return out;
}

double sup_norm(const GridField& field) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < field.atlas_values.size(); ++i)
        m = std::max(m, std::abs(field.atlas_values[i]));
    for (Eigen::Index c = 0; c < field.fatou_values.size(); ++c)
        m = std::max(m, std::abs(field.fatou_values[c]));
    return m;
}

GridField build_forcing(const FieldSpace& space, FieldCache& cache, const MultiIndex& n,
                        const SolveParams& params) {
    const int s = space.system.s();
    const int last = s + 1;
    GridField F;
    F.index = n;
    const Eigen::Index na = Eigen::Index(space.atlas.samples.size());
    const Eigen::Index nc = Eigen::Index(space.fatou.representatives.size());
    F.atlas_values = Eigen::VectorXcd::Zero(na);
    F.fatou_values = Eigen::VectorXcd::Zero(nc);

    double inherited = 0.0;
    for (int i = 0; i < s; ++i) {
        if (n[i] == 0) continue;
        const GridField& lower = cache.solve(n.minus_unit(i), params);
        const auto& plans_i = space.image_plans(i + 1);
        const auto& plans_last = space.image_plans(last);
        const double w = double(n[i]);
        for (Eigen::Index a = 0; a < na; ++a)
            F.atlas_values[a] += w * (space.evaluate(lower, plans_i[std::size_t(a)]) -
                                      space.evaluate(lower, plans_last[std::size_t(a)]));
        for (Eigen::Index c = 0; c < nc; ++c)
            F.fatou_values[c] += w * (space.evaluate(lower, plans_i[std::size_t(na + c)]) -
                                      space.evaluate(lower, plans_last[std::size_t(na + c)]));
        inherited += 2.0 * w * lower.error_bound;
    }
    F.error_bound = inherited;
    return F;
}

namespace {

void enforce_boundary(const FieldSpace& space, GridField& field, bool zero_order) {
    const auto& fl = space.fatou;
    for (std::size_t m = 0; m < space.minimal_sets.size(); ++m) {
        const int comp = fl.minimal_set_component[m];
        if (comp < 0) continue;
        field.fatou_values[comp] =
            (zero_order && int(m) == space.attracting_index) ? 1.0 : 0.0;
    }
}

}  // namespace

const GridField& FieldCache::solve(const MultiIndex& n, const SolveParams& params) {
    if (auto it = fields_.find(n.entries); it != fields_.end()) return it->second;
    const FieldSpace& space = *space_;

    if (n.order() == 0) {
        GridField T = estimate_T(space, params.t_params);
        fields_[n.entries] = std::move(T);
        return fields_.at(n.entries);
    }

    const GridField F = build_forcing(space, *this, n, params);
    GridField sum = F;
    GridField inc = F;
    double prev_norm = sup_norm(inc);
    double ratio = 0.5;
    int not_contracting = 0;
    for (int j = 1; j <= params.j_max; ++j) {
        inc = apply_M(space, inc);
        enforce_boundary(space, inc, /*zero_order=*/false);
        sum.atlas_values += inc.atlas_values;
        sum.fatou_values += inc.fatou_values;
        const double norm = sup_norm(inc);
        if (prev_norm > 1e-300) {
            const double r = norm / prev_norm;
            ratio = 0.5 * ratio + 0.5 * std::min(r, 2.0);
            if (r >= 1.0) {
                if (++not_contracting >= 6)
                    throw std::runtime_error(
                        "functional-equation series is not contracting; check the hyperbolicity "
                        "and separating margins");
            } else {
                not_contracting = 0;
            }
        }
        prev_norm = norm;
        if (ratio < 1.0 && norm < params.tol * (1.0 - ratio) / std::max(ratio, 1e-3)) {
            sum.error_bound = F.error_bound / std::max(1e-3, 1.0 - ratio) +
                              norm * ratio / (1.0 - ratio) + params.tol;
            break;
        }
        if (j == params.j_max)
            sum.error_bound = F.error_bound / std::max(1e-3, 1.0 - ratio) + norm + params.tol;
    }
    enforce_boundary(space, sum, /*zero_order=*/false);
    sum.index = n;
    fields_[n.entries] = std::move(sum);
    return fields_.at(n.entries);
}

GridField combine_fields(FieldCache& cache, const std::vector<std::pair<MultiIndex, Complex>>& combo,
                         const SolveParams& params) {
    if (combo.empty()) throw std::invalid_argument("empty combination");
    GridField out;
    bool first = true;
    for (const auto& [n, beta] : combo) {
        const GridField& f = cache.solve(n, params);
        if (first) {
            out = f.scaled(beta);
            first = false;
        } else {
            out.atlas_values += beta * f.atlas_values;
            out.fatou_values += beta * f.fatou_values;
            out.error_bound += std::abs(beta) * f.error_bound;
        }
    }
    out.is_combo = true;
    return out;
}

}  // namespace rcdyn
