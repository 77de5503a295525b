#include "doctest.h"

#include "rcdyn/takagi.hpp"

#include <cmath>

using namespace rcdyn;

namespace {

// one shared space per preset keeps the suite fast
FieldSpace& space62() {
    static FieldSpace space = [] {
        FieldSpaceParams params;
        params.sample.n_samples = 15000;
        params.sample.seed = 42;
        params.grid_cells = 128;
        return build_field_space(make_preset("ex-6.2"), params);
    }();
    return space;
}

FieldCache& cache62() {
    static FieldCache cache(space62());
    return cache;
}

SolveParams solve_params() {
    SolveParams p;
    p.tol = 1e-3;
    p.t_params.trials = 300;
    p.t_params.seed = 9;
    return p;
}

}  // namespace

TEST_CASE("field space basics") {
    const FieldSpace& space = space62();
    CHECK(space.minimal_sets.size() >= 2);
    CHECK(space.minimal_sets[std::size_t(space.attracting_index)].is_point_at_infinity);
    CHECK(space.fatou.n_components >= 1);

    // the bounded minimal set (the fixed point 0) sits in a labeled component
    int bounded = -1;
    for (std::size_t m = 0; m < space.minimal_sets.size(); ++m)
        if (!space.minimal_sets[m].is_point_at_infinity) bounded = int(m);
    REQUIRE(bounded >= 0);
    CHECK(space.fatou.minimal_set_component[std::size_t(bounded)] >= 0);
}

TEST_CASE("estimate_T endpoint values and range") {
    const FieldSpace& space = space62();
    const GridField& T = cache62().solve(MultiIndex::zero(1), solve_params());

    // probabilities everywhere
    for (Eigen::Index i = 0; i < T.atlas_values.size(); ++i) {
        CHECK(T.atlas_values[i].real() >= -1e-12);
        CHECK(T.atlas_values[i].real() <= 1.0 + 1e-12);
        CHECK(T.atlas_values[i].imag() == 0.0);
    }

    // representative of L (infinity) has value 1; the bounded minimal set has 0
    const EstimateTParams tp{60, 300, 123};
    const auto at = estimate_T_at(space, {SpherePoint::infinity(), SpherePoint(0.0, 0.0)}, tp);
    CHECK(at.values[0] == doctest::Approx(1.0));
    CHECK(at.values[1] == doctest::Approx(0.0));
}

TEST_CASE("T is a fixed point of the transition operator") {
    const FieldSpace& space = space62();
    const SolveParams sp = solve_params();
    MonteCarloStats stats;
    const GridField T = estimate_T(space, sp.t_params, &stats);
    const GridField MT = apply_M(space, T);
    double resid = 0.0;
    for (Eigen::Index i = 0; i < T.atlas_values.size(); ++i)
        resid = std::max(resid, std::abs(MT.atlas_values[i] - T.atlas_values[i]));
    double max_ci = stats.ci_halfwidth.maxCoeff();
    CHECK(resid <= 3.0 * std::max(max_ci, 1e-3));
    CHECK_FALSE(stats.low_confidence);
}

TEST_CASE("apply_M preserves constants and convexity") {
    const FieldSpace& space = space62();
    GridField c;
    c.index = MultiIndex::zero(1);
    c.atlas_values = Eigen::VectorXcd::Constant(Eigen::Index(space.atlas.samples.size()), 0.7);
    c.fatou_values =
        Eigen::VectorXcd::Constant(Eigen::Index(space.fatou.representatives.size()), 0.7);
    const GridField Mc = apply_M(space, c);
    for (Eigen::Index i = 0; i < Mc.atlas_values.size(); ++i)
        CHECK(Mc.atlas_values[i].real() == doctest::Approx(0.7));

    // indicator-like bump stays within [0,1]
    GridField phi = c;
    for (Eigen::Index i = 0; i < phi.atlas_values.size(); ++i) phi.atlas_values[i] = 0.0;
    for (Eigen::Index i = 0; i < phi.fatou_values.size(); ++i) phi.fatou_values[i] = 0.0;
    phi.fatou_values[space.fatou.outside_plus] = 1.0;
    const GridField Mphi = apply_M(space, phi);
    for (Eigen::Index i = 0; i < Mphi.atlas_values.size(); ++i) {
        CHECK(Mphi.atlas_values[i].real() >= -1e-12);
        CHECK(Mphi.atlas_values[i].real() <= 1.0 + 1e-12);
    }
}

TEST_CASE("solve_C order zero returns the T field") {
    FieldCache& cache = cache62();
    const GridField& c0 = cache.solve(MultiIndex::zero(1), solve_params());
    const GridField& again = cache.solve(MultiIndex::zero(1), solve_params());
    CHECK(&c0 == &again);  // cached
    CHECK(c0.index.order() == 0);
}

TEST_CASE("first derivative field: boundary zeros and functional residual") {
    const FieldSpace& space = space62();
    FieldCache& cache = cache62();
    const SolveParams sp = solve_params();
    const GridField& c1 = cache.solve(MultiIndex({1}), sp);

    // boundary condition on every minimal-set component
    for (std::size_t m = 0; m < space.minimal_sets.size(); ++m) {
        const int comp = space.fatou.minimal_set_component[m];
        if (comp >= 0) CHECK(std::abs(c1.fatou_values[comp]) == 0.0);
    }

    // residual || C - M C - F ||_inf over the atlas
    const GridField F = build_forcing(space, cache, MultiIndex({1}), sp);
    const GridField Mc = apply_M(space, c1);
    double resid = 0.0;
    for (Eigen::Index i = 0; i < c1.atlas_values.size(); ++i)
        resid = std::max(resid,
                         std::abs(c1.atlas_values[i] - Mc.atlas_values[i] - F.atlas_values[i]));
    CHECK(resid <= 2.0 * sp.tol + F.error_bound);
}

TEST_CASE("evaluate_C: locally constant on components, interpolating near J") {
    const FieldSpace& space = space62();
    FieldCache& cache = cache62();
    const GridField& T = cache.solve(MultiIndex::zero(1), solve_params());

    // value 1 on the component of L (query far outside the box)
    CHECK(space.evaluate_strict(T, SpherePoint(50.0, 50.0)).real() == doctest::Approx(1.0));
    // near an atlas sample the interpolation reproduces the stored value
    const SpherePoint z = space.atlas.samples[17];
    CHECK(std::abs(space.evaluate_strict(T, z) - T.atlas_values[17]) < 1e-9);

    // local constancy: two probes in the same labeled component agree within error
    const auto& fl = space.fatou;
    int comp = -1;
    SpherePoint a, b;
    for (int iy = 0; iy + 1 < fl.ny && comp < 0; ++iy)
        for (int ix = 0; ix + 1 < fl.nx && comp < 0; ++ix) {
            const int l0 = fl.label_of_cell(ix, iy);
            if (l0 >= 0 && fl.label_of_cell(ix + 1, iy) == l0) {
                comp = l0;
                a = SpherePoint(fl.x0 + (ix + 0.5) * fl.dx, fl.y0 + (iy + 0.5) * fl.dy);
                b = SpherePoint(fl.x0 + (ix + 1.5) * fl.dx, fl.y0 + (iy + 0.5) * fl.dy);
            }
        }
    REQUIRE(comp >= 0);
    CHECK(std::abs(space.evaluate_strict(T, a) - space.evaluate_strict(T, b)) <=
          T.error_bound + 1e-12);
}

TEST_CASE("combination evaluation is linear") {
    FieldCache& cache = cache62();
    const SolveParams sp = solve_params();
    const Complex alpha(0.7, -0.3);
    const GridField combo =
        combine_fields(cache, {{MultiIndex::zero(1), alpha}, {MultiIndex({1}), Complex(1.0, 0.0)}}, sp);
    const GridField& c0 = cache.solve(MultiIndex::zero(1), sp);
    const GridField& c1 = cache.solve(MultiIndex({1}), sp);
    const FieldSpace& space = space62();
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t i = std::size_t(trial) * 37 % space.atlas.samples.size();
        const Complex lhs = combo.atlas_values[Eigen::Index(i)];
        const Complex rhs = alpha * c0.atlas_values[Eigen::Index(i)] + c1.atlas_values[Eigen::Index(i)];
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("monte carlo error follows the 1/sqrt(N) law") {
    const FieldSpace& space = space62();
    // quadrupling the trials halves the CI width (within 20%)
    std::vector<SpherePoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(space.atlas.samples[std::size_t(i) * 101]);
    EstimateTParams a{120, 300, 7}, b{480, 300, 7};
    const auto ea = estimate_T_at(space, pts, a);
    const auto eb = estimate_T_at(space, pts, b);
    // compare averaged widths (single points can sit at 0 or 1 where the width collapses)
    double wa = 0.0, wb = 0.0;
    int used = 0;
    for (Eigen::Index i = 0; i < ea.ci_halfwidth.size(); ++i) {
        if (ea.values[i] < 0.05 || ea.values[i] > 0.95) continue;
        wa += ea.ci_halfwidth[i];
        wb += eb.ci_halfwidth[i];
        ++used;
    }
    if (used >= 3) {
        const double ratio = wb / wa;
        CHECK(ratio > 0.4);
        CHECK(ratio < 0.6);
    }
}

TEST_CASE("unresolved region raises") {
    const FieldSpace& space = space62();
    FieldCache& cache = cache62();
    const GridField& T = cache.solve(MultiIndex::zero(1), solve_params());
    // hunt for an unlabeled cell far from the atlas: may not exist on a dense grid,
    // so only assert when found
    const auto& fl = space.fatou;
    for (int iy = 0; iy < fl.ny; ++iy)
        for (int ix = 0; ix < fl.nx; ++ix) {
            if (fl.label_of_cell(ix, iy) >= 0) continue;
            const SpherePoint c(fl.x0 + (ix + 0.5) * fl.dx, fl.y0 + (iy + 0.5) * fl.dy);
            const int nn = space.atlas.index.nearest(c);
            if (nn >= 0 &&
                space.atlas.index.distance_to(c, nn) > 10.0 * space.atlas.hausdorff_resolution) {
                CHECK_THROWS(space.evaluate_strict(T, c));
                return;
            }
        }
}
