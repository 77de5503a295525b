#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace rcdyn {

using Complex = std::complex<double>;
using CoeffVector = Eigen::VectorXcd;

// Point on the Riemann sphere: a finite complex value or the point at infinity.
struct SpherePoint {
    Complex value{0.0, 0.0};
    bool infinite = false;

    SpherePoint() = default;
    SpherePoint(Complex v) : value(v) {}  // NOLINT: implicit by design
    SpherePoint(double re, double im) : value(re, im) {}

    static SpherePoint infinity() {
        SpherePoint p;
        p.infinite = true;
        p.value = Complex(0.0, 0.0);
        return p;
    }

    bool is_finite() const { return !infinite; }
    double abs() const { return infinite ? std::numeric_limits<double>::infinity() : std::abs(value); }
};

// Chordal metric on the sphere, diameter 2: d(z,w) = 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)).
double chordal_distance(const SpherePoint& a, const SpherePoint& b);

// Embedding into the unit sphere in R^3 under which the chordal metric is the
// Euclidean distance of the images. Used by nearest-neighbor indexes.
Eigen::Vector3d sphere_embed(const SpherePoint& p);

// Which norm ||f'|| to use. The chordal norm is the default; the Euclidean norm
// is valid for systems whose Julia set stays in a bounded part of the plane
// (all-polynomial systems, interval systems).
enum class Metric { Chordal, Euclidean };

// Roots of a polynomial given by ascending coefficients, via Durand-Kerner
// simultaneous iteration followed by Newton polishing. tol 1e-12, <=200 sweeps.
// Throws on non-convergence (message carries the coefficients).
std::vector<Complex> solve_polynomial(const CoeffVector& coeffs);

Complex polynomial_eval(const CoeffVector& coeffs, Complex z);
CoeffVector polynomial_derivative(const CoeffVector& coeffs);
CoeffVector polynomial_multiply(const CoeffVector& a, const CoeffVector& b);

// Rational map on the Riemann sphere, stored as numerator/denominator coefficient
// lists (ascending degree) with the common-factor part removed. Maps of degree < 2
// are rejected unless low-degree use is requested explicitly (interval systems).
class RationalMap {
public:
    RationalMap(CoeffVector numerator, CoeffVector denominator, bool allow_low_degree = false);

    static RationalMap from_polynomial(CoeffVector coeffs, bool allow_low_degree = false) {
        CoeffVector den(1);
        den[0] = Complex(1.0, 0.0);
        return RationalMap(std::move(coeffs), std::move(den), allow_low_degree);
    }

    // affine map a*z + b, accepted only through the explicit low-degree gate
    static RationalMap affine(Complex a, Complex b) {
        CoeffVector num(2);
        num[0] = b;
        num[1] = a;
        return from_polynomial(num, /*allow_low_degree=*/true);
    }

    int degree() const { return degree_; }
    bool is_polynomial() const { return polynomial_; }
    const CoeffVector& numerator() const { return num_; }
    const CoeffVector& denominator() const { return den_; }

    SpherePoint operator()(const SpherePoint& z) const;

    // Norm of the derivative with respect to the chosen metric on the sphere.
    // Chart-independent: internally evaluated in homogeneous coordinates.
    double derivative_norm(const SpherePoint& z, Metric metric = Metric::Chordal) const;

    // All deg(f) solutions of f(y) = w, with multiplicity.
    std::vector<SpherePoint> preimages(const SpherePoint& w) const;

    // All 2 deg(f) - 2 critical points, with multiplicity (infinity included).
    std::vector<SpherePoint> critical_points() const;

    // Images of the critical points, deduplicated within chordal tolerance.
    std::vector<SpherePoint> critical_values() const;

    // (this o inner)(z) = this(inner(z))
    RationalMap compose(const RationalMap& inner) const;

    // Conjugation by z -> 1/z; used by the chart-consistency checks.
    RationalMap conjugate_by_inversion() const;

private:
    CoeffVector num_, den_;
    int degree_ = 0;
    bool polynomial_ = false;

    // homogeneous lifts P(X,Y), Q(X,Y) of degree degree_ (coefficients of X^k Y^(d-k))
    CoeffVector hom_num_, hom_den_;
    void build_homogeneous();
};

}  // namespace rcdyn
