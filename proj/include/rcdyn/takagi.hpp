#pragma once

#include "rcdyn/multi_index.hpp"
#include "rcdyn/semigroup.hpp"

#include <array>
#include <map>
#include <optional>

namespace rcdyn {

// Fatou-component labels over a probe grid spanning the atlas bounding box.
// Cells too close to the Julia samples stay unlabeled (-1). One pseudo-component
// represents the unbounded region outside the box (two for line systems).
struct FatouLabels {
    double x0 = 0, y0 = 0, dx = 1, dy = 1;
    int nx = 0, ny = 0;
    std::vector<std::int32_t> cell_label;
    int n_components = 0;  // grid components; pseudo-components follow
    std::vector<SpherePoint> representatives;
    int outside_plus = -1;   // component id of the unbounded region (x -> +inf for lines)
    int outside_minus = -1;  // line systems only
    std::vector<int> minimal_set_component;  // minimal-set idx -> component id (or -1)

    int total_components() const { return int(representatives.size()); }
    int label_of_cell(int ix, int iy) const { return cell_label[std::size_t(iy) * nx + ix]; }
};

// Sampled scalar field: one value per atlas sample plus one per Fatou component.
struct GridField {
    Eigen::VectorXcd atlas_values;
    Eigen::VectorXcd fatou_values;
    MultiIndex index;    // differentiation order; ignored when is_combo
    bool is_combo = false;
    double error_bound = 0.0;

    GridField scaled(Complex factor) const {
        GridField g = *this;
        g.atlas_values *= factor;
        g.fatou_values *= factor;
        g.error_bound *= std::abs(factor);
        g.is_combo = true;
        return g;
    }
};

// How a field is read at one fixed query point.
struct EvalPlan {
    enum Kind : std::uint8_t { Component, Interpolate, Fallback } kind = Fallback;
    std::int32_t comp = -1;
    std::array<std::int32_t, 8> idx{};
    std::array<float, 8> w{};
    std::uint8_t n = 0;
};

struct MonteCarloStats {
    Eigen::VectorXd ci_halfwidth;  // per evaluation site, Wilson 95%
    double undecided_fraction = 0.0;
    bool low_confidence = false;
};

// Everything field evaluation needs: system, atlas, minimal sets, component labels,
// and precomputed evaluation plans for the transition operator.
class FieldSpace {
public:
    GeneratorSystem system;
    JuliaAtlas atlas;
    std::vector<MinimalSetEstimate> minimal_sets;
    int attracting_index = 0;  // L
    FatouLabels fatou;

    FieldSpace(GeneratorSystem sys, JuliaAtlas atl, std::vector<MinimalSetEstimate> sets, int L)
        : system(std::move(sys)), atlas(std::move(atl)), minimal_sets(std::move(sets)),
          attracting_index(L) {}

    std::size_t n_sites() const { return atlas.samples.size() + fatou.representatives.size(); }

    // component id at z, or -1 when z falls in an unlabeled cell near J(G)
    int component_at(const SpherePoint& z) const;

    // plan for evaluating fields at an arbitrary fixed point
    EvalPlan plan_at(const SpherePoint& z) const;

    Complex evaluate(const GridField& field, const EvalPlan& plan) const;

    // spec surface: locally-constant value on labeled components, inverse-distance
    // interpolation near J(G), error otherwise
    Complex evaluate_strict(const GridField& field, const SpherePoint& z) const;

    // attraction-neighborhood radius used by the Monte Carlo classifier
    double capture_radius(int minimal_set_idx) const;

    // plans for z -> f_j(z) at every evaluation site, built lazily once
    const std::vector<EvalPlan>& image_plans(int symbol) const;

private:
    mutable std::vector<std::vector<EvalPlan>> image_plans_;  // per symbol
};

struct FieldSpaceParams {
    SampleParams sample;
    MinimalSetParams minimal;
    int grid_cells = 192;        // probe grid resolution per axis
    int signature_words = 8;     // random words per flood-fill signature
    int signature_len = 48;
    std::uint64_t label_seed = 11;
};

// sample + detect minimal sets + label components; L defaults to {infinity} for
// polynomial systems (line systems: the +infinity end)
FieldSpace build_field_space(const GeneratorSystem& system, const FieldSpaceParams& params);

// assemble a FieldSpace around an existing atlas / minimal sets (oracle pipelines)
FieldSpace assemble_field_space(GeneratorSystem system, JuliaAtlas atlas,
                                std::vector<MinimalSetEstimate> minimal_sets, int attracting_index,
                                const FieldSpaceParams& params);

struct EstimateTParams {
    int trials = 200;
    int max_steps = 400;
    std::uint64_t seed = 5;
};

// Monte Carlo probability of tending to L at the given points (Wilson 95% CI).
struct TPointEstimate {
    Eigen::VectorXd values;
    Eigen::VectorXd ci_halfwidth;
    Eigen::VectorXd undecided;
};
TPointEstimate estimate_T_at(const FieldSpace& space, const std::vector<SpherePoint>& points,
                             const EstimateTParams& params);

// same estimator over all evaluation sites, packaged as the order-0 field
GridField estimate_T(const FieldSpace& space, const EstimateTParams& params,
                     MonteCarloStats* stats = nullptr);

// transition operator: (M phi)(z) = sum_j p_j phi(f_j(z)) over all evaluation sites
GridField apply_M(const FieldSpace& space, const GridField& field);

struct SolveParams {
    double tol = 1e-3;
    int j_max = 400;
    EstimateTParams t_params;
};

class FieldCache {
public:
    explicit FieldCache(const FieldSpace& space) : space_(&space) {}

    const FieldSpace& space() const { return *space_; }

    // C_n by the functional-equation series, recursing on |n|
    const GridField& solve(const MultiIndex& n, const SolveParams& params);

    bool contains(const MultiIndex& n) const { return fields_.count(n.entries) > 0; }
    void put(const MultiIndex& n, GridField f) { fields_[n.entries] = std::move(f); }

private:
    const FieldSpace* space_;
    std::map<std::vector<int>, GridField> fields_;
};

// right-hand side F of the functional equation at order n
GridField build_forcing(const FieldSpace& space, FieldCache& cache, const MultiIndex& n,
                        const SolveParams& params);

// finite complex linear combination of solved derivative fields
GridField combine_fields(FieldCache& cache, const std::vector<std::pair<MultiIndex, Complex>>& combo,
                         const SolveParams& params);

double sup_norm(const GridField& field);

}  // namespace rcdyn
