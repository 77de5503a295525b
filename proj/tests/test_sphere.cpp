#include "doctest.h"

#include "rcdyn/rng.hpp"
#include "rcdyn/sphere.hpp"

#include <cmath>

using namespace rcdyn;

namespace {

CoeffVector coeffs(std::initializer_list<Complex> list) {
    CoeffVector c(Eigen::Index(list.size()));
    Eigen::Index i = 0;
    for (const auto& v : list) c[i++] = v;
    return c;
}

RationalMap square() { return RationalMap::from_polynomial(coeffs({0.0, 0.0, 1.0})); }
RationalMap square_minus_one() { return RationalMap::from_polynomial(coeffs({-1.0, 0.0, 1.0})); }
RationalMap cubic_lambda(double lambda) {
    return RationalMap::from_polynomial(coeffs({0.0, 0.0, 0.0, lambda}));
}

RationalMap random_map(Rng& rng, int max_deg = 4) {
    for (;;) {
        const int dn = 2 + int(rng.index(std::size_t(max_deg - 1)));
        const int dd = int(rng.index(std::size_t(dn)));  // keep degree = dn
        CoeffVector num(dn + 1), den(dd + 1);
        for (int i = 0; i <= dn; ++i) num[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
        for (int i = 0; i <= dd; ++i) den[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
        num[dn] += Complex(1.5, 0.0);
        den[dd] += Complex(1.5, 0.0);
        try {
            return RationalMap(num, den);
        } catch (const std::exception&) {
            continue;  // rare degenerate draw
        }
    }
}

}  // namespace

TEST_CASE("chordal distance basics") {
    CHECK(chordal_distance(SpherePoint(0.0, 0.0), SpherePoint::infinity()) == doctest::Approx(2.0));
    CHECK(chordal_distance(SpherePoint(0.0, 0.0), SpherePoint(0.0, 0.0)) == 0.0);
    CHECK(chordal_distance(SpherePoint(1.0, 0.0), SpherePoint(-1.0, 0.0)) == doctest::Approx(2.0));
    CHECK(chordal_distance(SpherePoint::infinity(), SpherePoint::infinity()) == 0.0);

    // d(z, inf) = 2/sqrt(1+|z|^2)
    const SpherePoint z(3.0, 4.0);
    CHECK(chordal_distance(z, SpherePoint::infinity()) ==
          doctest::Approx(2.0 / std::sqrt(26.0)));

    // symmetry, bound, triangle inequality on random triples
    Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        const SpherePoint a(rng.uniform(-5, 5), rng.uniform(-5, 5));
        const SpherePoint b(rng.uniform(-5, 5), rng.uniform(-5, 5));
        const SpherePoint c(rng.uniform(-5, 5), rng.uniform(-5, 5));
        const double ab = chordal_distance(a, b);
        CHECK(ab == chordal_distance(b, a));
        CHECK(ab <= 2.0 + 1e-15);
        CHECK(ab <= chordal_distance(a, c) + chordal_distance(c, b) + 1e-12);
    }
}

TEST_CASE("embedding realizes the chordal metric") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const SpherePoint a(rng.uniform(-20, 20), rng.uniform(-20, 20));
        const SpherePoint b = (i % 5 == 0) ? SpherePoint::infinity()
                                           : SpherePoint(rng.uniform(-20, 20), rng.uniform(-20, 20));
        CHECK((sphere_embed(a) - sphere_embed(b)).norm() ==
              doctest::Approx(chordal_distance(a, b)).epsilon(1e-12));
        CHECK(sphere_embed(a).norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("map evaluation") {
    CHECK(square()(SpherePoint::infinity()).infinite);

    const SpherePoint v = square_minus_one()(SpherePoint(0.0, 0.0));
    CHECK(v.is_finite());
    CHECK(v.value.real() == doctest::Approx(-1.0));

    // lambda z^3 with lambda = 0.01 fixes z = 10
    const SpherePoint w = cubic_lambda(0.01)(SpherePoint(10.0, 0.0));
    CHECK(w.value.real() == doctest::Approx(10.0));
    CHECK(std::abs(w.value.imag()) < 1e-12);

    // pole goes to infinity, not NaN: f(z) = 1/z^2 at 0
    RationalMap inv_sq(coeffs({1.0}), coeffs({0.0, 0.0, 1.0}));
    CHECK(inv_sq(SpherePoint(0.0, 0.0)).infinite);
    CHECK(inv_sq(SpherePoint::infinity()).is_finite());
}

TEST_CASE("spherical derivative norm") {
    CHECK(square().derivative_norm(SpherePoint(0.0, 0.0)) == doctest::Approx(0.0));
    CHECK(square().derivative_norm(SpherePoint(1.0, 0.0)) == doctest::Approx(2.0));
    // superattracting fixed point at infinity
    CHECK(square().derivative_norm(SpherePoint::infinity()) == doctest::Approx(0.0));

    // euclidean norm of an affine map is |a| everywhere
    const RationalMap aff = RationalMap::affine(Complex(3.0, 0.0), Complex(-2.0, 0.0));
    CHECK(aff.derivative_norm(SpherePoint(0.3, 0.0), Metric::Euclidean) == doctest::Approx(3.0));
    CHECK(aff.derivative_norm(SpherePoint(0.9, 0.0), Metric::Euclidean) == doctest::Approx(3.0));
}

TEST_CASE("chart consistency over random maps and points") {
    Rng rng(23);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const RationalMap f = random_map(rng);
        const RationalMap g = f.conjugate_by_inversion();
        SpherePoint z(rng.uniform(-3, 3), rng.uniform(-3, 3));
        if (std::abs(z.value) < 1e-3) continue;
        const SpherePoint zi(1.0 / z.value);

        const SpherePoint fz = f(z);
        const SpherePoint gz = g(zi);
        // g = i o f o i, so f(z) = i(g(1/z))
        if (fz.is_finite() && gz.is_finite() && std::abs(gz.value) > 1e-12) {
            const Complex back = 1.0 / gz.value;
            CHECK(std::abs(back - fz.value) <= 1e-9 * (1.0 + std::abs(fz.value)));
        }
        // spherical derivative norm is invariant under the isometry i(z) = 1/z
        const double n1 = f.derivative_norm(z);
        const double n2 = g.derivative_norm(zi);
        CHECK(n1 == doctest::Approx(n2).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked > 900);
}

TEST_CASE("chain rule for the derivative norm") {
    Rng rng(31);
    for (int i = 0; i < 300; ++i) {
        const RationalMap f = random_map(rng, 3);
        const RationalMap g = random_map(rng, 3);
        const SpherePoint z(rng.uniform(-2, 2), rng.uniform(-2, 2));
        const SpherePoint fz = f(z);
        if (!fz.is_finite()) continue;
        const RationalMap gf = g.compose(f);
        const double lhs = gf.derivative_norm(z);
        const double rhs = g.derivative_norm(fz) * f.derivative_norm(z);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("preimages") {
    auto pre = square().preimages(SpherePoint(1.0, 0.0));
    REQUIRE(pre.size() == 2);
    std::sort(pre.begin(), pre.end(),
              [](const SpherePoint& a, const SpherePoint& b) { return a.value.real() < b.value.real(); });
    CHECK(pre[0].value.real() == doctest::Approx(-1.0));
    CHECK(pre[1].value.real() == doctest::Approx(1.0));

    auto dz = square().preimages(SpherePoint(0.0, 0.0));
    REQUIRE(dz.size() == 2);
    CHECK(std::abs(dz[0].value) < 1e-6);
    CHECK(std::abs(dz[1].value) < 1e-6);

    auto dm = square_minus_one().preimages(SpherePoint(-1.0, 0.0));
    REQUIRE(dm.size() == 2);
    CHECK(std::abs(dm[0].value) < 1e-6);
    CHECK(std::abs(dm[1].value) < 1e-6);

    // infinity has full preimage multiplicity for a polynomial
    auto pinf = square().preimages(SpherePoint::infinity());
    REQUIRE(pinf.size() == 2);
    CHECK(pinf[0].infinite);
    CHECK(pinf[1].infinite);
}

TEST_CASE("preimages then eval round trips") {
    Rng rng(47);
    for (int i = 0; i < 120; ++i) {
        const RationalMap f = random_map(rng);
        const SpherePoint w(rng.uniform(-2, 2), rng.uniform(-2, 2));
        const auto pre = f.preimages(w);
        CHECK(int(pre.size()) == f.degree());
        for (const auto& y : pre) CHECK(chordal_distance(f(y), w) < 1e-6);
    }
}

TEST_CASE("critical values") {
    auto cv = square().critical_values();
    REQUIRE(cv.size() == 2);
    bool has_zero = false, has_inf = false;
    for (const auto& v : cv) {
        if (v.infinite) has_inf = true;
        else if (std::abs(v.value) < 1e-9) has_zero = true;
    }
    CHECK(has_zero);
    CHECK(has_inf);

    auto cv2 = square_minus_one().critical_values();
    REQUIRE(cv2.size() == 2);
    bool has_minus_one = false;
    has_inf = false;
    for (const auto& v : cv2) {
        if (v.infinite) has_inf = true;
        else if (std::abs(v.value - Complex(-1.0, 0.0)) < 1e-9) has_minus_one = true;
    }
    CHECK(has_minus_one);
    CHECK(has_inf);

    auto cv3 = cubic_lambda(0.01).critical_values();
    REQUIRE(cv3.size() == 2);
    bool z = false;
    has_inf = false;
    for (const auto& v : cv3) {
        if (v.infinite) has_inf = true;
        else if (std::abs(v.value) < 1e-9) z = true;
    }
    CHECK(z);
    CHECK(has_inf);
}

TEST_CASE("construction guards") {
    CHECK_THROWS(RationalMap::from_polynomial(coeffs({1.0, 2.0})));  // degree 1
    CHECK_THROWS(RationalMap(coeffs({1.0}), coeffs({0.0})));         // zero denominator

    // common factor (z - 3) is removed: (z^2-9)(z^2) / (z-3) has degree 3
    const CoeffVector num = polynomial_multiply(coeffs({-9.0, 0.0, 1.0}), coeffs({0.0, 0.0, 1.0}));
    const RationalMap f(num, coeffs({-3.0, 1.0}));
    CHECK(f.degree() == 3);
    CHECK(f.is_polynomial());
}

TEST_CASE("polynomial solver handles moderate degrees") {
    Rng rng(61);
    for (int deg : {5, 9, 16, 24}) {
        // build from known roots, then recover
        std::vector<Complex> roots(deg);
        CoeffVector poly = coeffs({1.0});
        for (int i = 0; i < deg; ++i) {
            roots[i] = Complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));
            poly = polynomial_multiply(poly, coeffs({-roots[i], 1.0}));
        }
        auto found = solve_polynomial(poly);
        REQUIRE(int(found.size()) == deg);
        for (const auto& r : roots) {
            double best = 1e9;
            for (const auto& f : found) best = std::min(best, std::abs(f - r));
            CHECK(best < 1e-7);
        }
    }
}
