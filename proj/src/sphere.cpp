#include "rcdyn/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rcdyn {

namespace {

constexpr double kRootTol = 1e-12;
constexpr int kRootMaxSweeps = 200;
constexpr double kGcdResultantTol = 1e-10;
constexpr double kDedupChordalTol = 1e-8;

double coeff_scale(const CoeffVector& c) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c[i]));
    return m;
}

CoeffVector trim(const CoeffVector& c, double rel_tol = 1e-14) {
    const double scale = coeff_scale(c);
    Eigen::Index deg = -1;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c[i]) > rel_tol * scale) deg = i;
    if (deg < 0) return CoeffVector::Zero(1);
    return c.head(deg + 1).eval();
}

std::string coeffs_to_string(const CoeffVector& c) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (i) os << ", ";
        os << c[i].real() << (c[i].imag() < 0 ? "-" : "+") << std::abs(c[i].imag()) << "i";
    }
    os << "]";
    return os.str();
}

// monic remainder sequence step, scaled for stability
CoeffVector poly_mod(CoeffVector a, const CoeffVector& b) {
    const Eigen::Index db = b.size() - 1;
    while (a.size() > db && a.size() >= 1) {
        const Eigen::Index da = a.size() - 1;
        const Complex q = a[da] / b[db];
        for (Eigen::Index i = 0; i <= db; ++i) a[da - db + i] -= q * b[i];
        a = trim(a.head(da).eval());
        if (a.size() == 1 && a[0] == Complex(0.0, 0.0)) break;
    }
    return a;
}

}  // namespace

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
    if (a.infinite && b.infinite) return 0.0;
    if (a.infinite) return 2.0 / std::hypot(1.0, std::abs(b.value));
    if (b.infinite) return 2.0 / std::hypot(1.0, std::abs(a.value));
    const double num = 2.0 * std::abs(a.value - b.value);
    return num / (std::hypot(1.0, std::abs(a.value)) * std::hypot(1.0, std::abs(b.value)));
}

Eigen::Vector3d sphere_embed(const SpherePoint& p) {
    if (p.infinite) return {0.0, 0.0, 1.0};
    const double x = p.value.real(), y = p.value.imag();
    const double n = 1.0 + x * x + y * y;
    // chordal distance between two points equals the Euclidean distance of the embeddings
    return {2.0 * x / n, 2.0 * y / n, (n - 2.0) / n};
}

Complex polynomial_eval(const CoeffVector& coeffs, Complex z) {
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = coeffs.size() - 1; i >= 0; --i) acc = acc * z + coeffs[i];
    return acc;
}

CoeffVector polynomial_derivative(const CoeffVector& coeffs) {
    if (coeffs.size() <= 1) return CoeffVector::Zero(1);
    CoeffVector d(coeffs.size() - 1);
    for (Eigen::Index i = 1; i < coeffs.size(); ++i) d[i - 1] = double(i) * coeffs[i];
    return d;
}

CoeffVector polynomial_multiply(const CoeffVector& a, const CoeffVector& b) {
    CoeffVector c = CoeffVector::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

std::vector<Complex> solve_polynomial(const CoeffVector& coeffs_in) {
    const CoeffVector coeffs = trim(coeffs_in);
    const Eigen::Index deg = coeffs.size() - 1;
    if (deg <= 0) return {};
    if (deg == 1) return {-coeffs[0] / coeffs[1]};

    // Cauchy bound for the root radius
    double radius = 0.0;
    for (Eigen::Index i = 0; i < deg; ++i) radius = std::max(radius, std::abs(coeffs[i] / coeffs[deg]));
    radius = 1.0 + radius;

    std::vector<Complex> roots(deg);
    const Complex seed(0.4, 0.9);  // irrational angle, avoids symmetric stalls
    Complex w = std::min(radius, 4.0) * Complex(0.6, 0.2);
    for (Eigen::Index i = 0; i < deg; ++i) {
        roots[i] = w;
        w *= seed;
        if (std::abs(w) < 1e-3) w *= 8.0 / std::abs(w);
        if (std::abs(w) > radius) w *= 0.5 * radius / std::abs(w);
    }

    const double scale = coeff_scale(coeffs);
    bool converged = false;
    for (int sweep = 0; sweep < kRootMaxSweeps; ++sweep) {
        double delta = 0.0;
        for (Eigen::Index i = 0; i < deg; ++i) {
            Complex denom = coeffs[deg];
            for (Eigen::Index j = 0; j < deg; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            if (denom == Complex(0.0, 0.0)) {
                roots[i] += Complex(1e-6, 2e-6);
                continue;
            }
            const Complex step = polynomial_eval(coeffs, roots[i]) / denom;
            roots[i] -= step;
            delta = std::max(delta, std::abs(step));
        }
        if (delta < kRootTol * std::max(1.0, radius)) {
            converged = true;
            break;
        }
    }

    // Newton polishing (simple roots polish to full precision; clusters keep DK accuracy)
    const CoeffVector deriv = polynomial_derivative(coeffs);
    for (auto& r : roots) {
        for (int it = 0; it < 8; ++it) {
            const Complex f = polynomial_eval(coeffs, r);
            const Complex df = polynomial_eval(deriv, r);
            if (std::abs(df) < 1e-30) break;
            const Complex step = f / df;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            if (std::abs(step) > 0.5 * (1.0 + std::abs(r))) break;
            r -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(r))) break;
        }
    }

    if (!converged) {
        // accept if residuals are small anyway (clustered roots often stall the sweep metric)
        double worst = 0.0;
        for (const auto& r : roots)
            worst = std::max(worst, std::abs(polynomial_eval(coeffs, r)));
        const double pow_r = std::pow(std::max(1.0, radius), double(deg));
        if (worst > 1e-6 * scale * pow_r)
            throw std::runtime_error("polynomial root finding did not converge for coefficients " +
                                     coeffs_to_string(coeffs));
    }
    return roots;
}

RationalMap::RationalMap(CoeffVector numerator, CoeffVector denominator, bool allow_low_degree)
    : num_(trim(numerator)), den_(trim(denominator)) {
    if (coeff_scale(den_) == 0.0) throw std::invalid_argument("rational map: zero denominator");
    if (coeff_scale(num_) == 0.0) throw std::invalid_argument("rational map: zero numerator");

    // approximate gcd reduction: remove common roots detected through the Euclidean
    // remainder sequence with a resultant-style threshold
    if (num_.size() > 1 && den_.size() > 1) {
        CoeffVector a = num_.size() >= den_.size() ? num_ : den_;
        CoeffVector b = num_.size() >= den_.size() ? den_ : num_;
        const double sa = coeff_scale(a), sb = coeff_scale(b);
        while (b.size() > 1) {
            CoeffVector r = poly_mod(a, b);
            if (coeff_scale(r) < kGcdResultantTol * std::max(sa, sb)) {
                // b (made monic) is a common factor: deflate both
                CoeffVector g = b / b[b.size() - 1];
                const auto roots = solve_polynomial(g);
                for (const auto& root : roots) {
                    // synthetic division of num_ and den_ by (z - root)
                    auto deflate = [&root](const CoeffVector& p) {
                        CoeffVector q(p.size() - 1);
                        Complex carry = p[p.size() - 1];
                        for (Eigen::Index i = p.size() - 2; i >= 0; --i) {
                            q[i] = carry;
                            carry = p[i] + carry * root;
                        }
                        return q;
                    };
                    if (num_.size() > 1 && den_.size() > 1 &&
                        std::abs(polynomial_eval(num_, root)) <
                            kGcdResultantTol * std::max(1.0, coeff_scale(num_)) &&
                        std::abs(polynomial_eval(den_, root)) <
                            kGcdResultantTol * std::max(1.0, coeff_scale(den_))) {
                        num_ = trim(deflate(num_));
                        den_ = trim(deflate(den_));
                    }
                }
                break;
            }
            a = b;
            b = r;
        }
    }

    degree_ = int(std::max(num_.size(), den_.size())) - 1;
    polynomial_ = (den_.size() == 1);
    if (degree_ < 2 && !allow_low_degree)
        throw std::invalid_argument("rational map: degree " + std::to_string(degree_) +
                                    " < 2 is not accepted");
    build_homogeneous();
}

void RationalMap::build_homogeneous() {
    const int d = degree_;
    hom_num_ = CoeffVector::Zero(d + 1);
    hom_den_ = CoeffVector::Zero(d + 1);
    for (Eigen::Index k = 0; k < num_.size(); ++k) hom_num_[k] = num_[k];
    for (Eigen::Index k = 0; k < den_.size(); ++k) hom_den_[k] = den_[k];
}

namespace {

// evaluate sum_k c_k X^k Y^(d-k) at a normalized representative of [X:Y]
Complex homogeneous_eval(const CoeffVector& c, Complex X, Complex Y) {
    const Eigen::Index d = c.size() - 1;
    // Horner in X/Y or Y/X, whichever is contracting
    if (std::abs(X) <= std::abs(Y)) {
        const Complex t = X / Y;
        Complex acc(0.0, 0.0);
        for (Eigen::Index k = d; k >= 0; --k) acc = acc * t + c[k];
        return acc;  // times Y^d, dropped by the caller's normalization
    }
    const Complex t = Y / X;
    Complex acc(0.0, 0.0);
    for (Eigen::Index k = 0; k <= d; ++k) acc = acc * t + c[k];
    return acc;  // times X^d
}

struct HomogeneousPair {
    Complex P, Q;  // values scaled by a common factor
};

HomogeneousPair eval_pair(const CoeffVector& num, const CoeffVector& den, const SpherePoint& z) {
    Complex X, Y;
    if (z.infinite) {
        X = Complex(1.0, 0.0);
        Y = Complex(0.0, 0.0);
    } else if (std::abs(z.value) <= 1.0) {
        X = z.value;
        Y = Complex(1.0, 0.0);
    } else {
        X = Complex(1.0, 0.0);
        Y = 1.0 / z.value;
    }
    return {homogeneous_eval(num, X, Y), homogeneous_eval(den, X, Y)};
}

}  // namespace

SpherePoint RationalMap::operator()(const SpherePoint& z) const {
    const auto [P, Q] = eval_pair(hom_num_, hom_den_, z);
    const double ap = std::abs(P), aq = std::abs(Q);
    if (aq == 0.0 || ap > 1e300 * aq) return SpherePoint::infinity();
    return SpherePoint(P / Q);
}

double RationalMap::derivative_norm(const SpherePoint& z, Metric metric) const {
    const int d = degree_;
    Complex X, Y;
    if (z.infinite) {
        X = Complex(1.0, 0.0);
        Y = Complex(0.0, 0.0);
    } else {
        // normalized homogeneous representative, |X|^2 + |Y|^2 = 1
        const double s = std::hypot(1.0, std::abs(z.value));
        if (std::abs(z.value) <= 1.0) {
            X = z.value / s;
            Y = Complex(1.0, 0.0) / s;
        } else {
            const double t = std::abs(z.value);
            X = (z.value / t) * (t / s);
            Y = Complex(1.0, 0.0) / s;
        }
    }

    // |X|,|Y| <= 1, so plain power sums are safe
    std::vector<Complex> xpow(d + 1), ypow(d + 1);
    xpow[0] = ypow[0] = Complex(1.0, 0.0);
    for (int k = 1; k <= d; ++k) {
        xpow[k] = xpow[k - 1] * X;
        ypow[k] = ypow[k - 1] * Y;
    }
    auto hom_value = [&](const CoeffVector& c) {
        Complex acc(0.0, 0.0);
        for (int k = 0; k <= d; ++k) acc += c[k] * xpow[k] * ypow[d - k];
        return acc;
    };
    auto hom_partial_x = [&](const CoeffVector& c) {
        Complex acc(0.0, 0.0);
        for (int k = 1; k <= d; ++k) acc += double(k) * c[k] * xpow[k - 1] * ypow[d - k];
        return acc;
    };
    auto hom_partial_y = [&](const CoeffVector& c) {
        Complex acc(0.0, 0.0);
        for (int k = 0; k < d; ++k) acc += double(d - k) * c[k] * xpow[k] * ypow[d - k - 1];
        return acc;
    };

    const Complex Px = hom_partial_x(hom_num_), Py = hom_partial_y(hom_num_);
    const Complex Qx = hom_partial_x(hom_den_), Qy = hom_partial_y(hom_den_);
    const Complex P = hom_value(hom_num_), Q = hom_value(hom_den_);
    const double denom = std::norm(P) + std::norm(Q);
    if (denom == 0.0) return 0.0;
    const double wr = std::abs(Px * Qy - Py * Qx);
    // ||f'|| with respect to the chordal metric, scale-invariant in [X:Y]
    const double chordal = wr * (std::norm(X) + std::norm(Y)) / (double(d) * denom);
    if (metric == Metric::Chordal) return chordal;

    // Euclidean norm |f'(z)| = chordal norm * (1+|f|^2)/(1+|z|^2); finite charts only
    if (z.infinite) throw std::domain_error("euclidean derivative norm at infinity");
    const SpherePoint image = (*this)(z);
    if (image.infinite) throw std::domain_error("euclidean derivative norm at a pole");
    const double zz = 1.0 + std::norm(z.value);
    const double ww = 1.0 + std::norm(image.value);
    return chordal * ww / zz;
}

std::vector<SpherePoint> RationalMap::preimages(const SpherePoint& w) const {
    const int d = degree_;
    std::vector<SpherePoint> out;
    out.reserve(d);

    CoeffVector poly;
    if (w.infinite) {
        poly = den_;  // f(y) = inf <=> D(y) = 0, plus infinity itself if deg num > deg den
    } else {
        // N(y) - w D(y), padded to common length
        const Eigen::Index n = std::max(num_.size(), den_.size());
        poly = CoeffVector::Zero(n);
        for (Eigen::Index i = 0; i < num_.size(); ++i) poly[i] += num_[i];
        for (Eigen::Index i = 0; i < den_.size(); ++i) poly[i] -= w.value * den_[i];
    }
    poly = trim(poly, 1e-12);
    const Eigen::Index finite_count = poly.size() - 1;
    if (finite_count > 0) {
        for (const auto& r : solve_polynomial(poly)) out.emplace_back(r);
    }
    for (Eigen::Index k = finite_count; k < d; ++k) out.push_back(SpherePoint::infinity());

    // residual check after polishing
    for (const auto& y : out) {
        const SpherePoint img = (*this)(y);
        const double resid = chordal_distance(img, w);
        if (resid > 1e-5)
            throw std::runtime_error("preimage residual " + std::to_string(resid) +
                                     " too large; numerator " + coeffs_to_string(num_) +
                                     " denominator " + coeffs_to_string(den_));
    }
    return out;
}

std::vector<SpherePoint> RationalMap::critical_points() const {
    const int d = degree_;
    // Wronskian of the homogeneous lift: W = Px Qy - Py Qx, homogeneous of degree 2d-2.
    // Its projective roots are exactly the critical points with multiplicity.
    CoeffVector w = CoeffVector::Zero(2 * d - 1);
    // Px: coeffs k c_k at X^(k-1) Y^(d-k)   -> array px[j] multiplies X^j Y^(d-1-j)
    CoeffVector px = CoeffVector::Zero(d), py = CoeffVector::Zero(d);
    CoeffVector qx = CoeffVector::Zero(d), qy = CoeffVector::Zero(d);
    for (int k = 1; k <= d; ++k) {
        px[k - 1] = double(k) * hom_num_[k];
        qx[k - 1] = double(k) * hom_den_[k];
    }
    for (int k = 0; k < d; ++k) {
        py[k] = double(d - k) * hom_num_[k];
        qy[k] = double(d - k) * hom_den_[k];
    }
    const CoeffVector a = polynomial_multiply(px, qy), b = polynomial_multiply(py, qx);
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = a[i] - b[i];

    const CoeffVector wt = trim(w, 1e-13);
    std::vector<SpherePoint> out;
    if (wt.size() > 1)
        for (const auto& r : solve_polynomial(wt)) out.emplace_back(r);
    for (Eigen::Index k = wt.size() - 1; k < 2 * d - 2; ++k) out.push_back(SpherePoint::infinity());
    return out;
}

std::vector<SpherePoint> RationalMap::critical_values() const {
    std::vector<SpherePoint> vals;
    for (const auto& c : critical_points()) {
        const SpherePoint v = (*this)(c);
        bool dup = false;
        for (const auto& u : vals)
            if (chordal_distance(u, v) < kDedupChordalTol) {
                dup = true;
                break;
            }
        if (!dup) vals.push_back(v);
    }
    return vals;
}

RationalMap RationalMap::compose(const RationalMap& inner) const {
    // (this o inner) = sum a_k Ng^k Dg^(m-k) / sum b_k Ng^k Dg^(m-k), m = degree of this
    const int m = degree_;
    const CoeffVector& ng = inner.num_;
    const CoeffVector& dg = inner.den_;

    std::vector<CoeffVector> npow(m + 1), dpow(m + 1);
    npow[0] = CoeffVector::Ones(1);
    dpow[0] = CoeffVector::Ones(1);
    for (int k = 1; k <= m; ++k) {
        npow[k] = polynomial_multiply(npow[k - 1], ng);
        dpow[k] = polynomial_multiply(dpow[k - 1], dg);
    }

    const Eigen::Index out_len = Eigen::Index(m) * (inner.degree_) + 1;
    CoeffVector num = CoeffVector::Zero(out_len), den = CoeffVector::Zero(out_len);
    for (int k = 0; k <= m; ++k) {
        const CoeffVector term = polynomial_multiply(npow[k], dpow[m - k]);
        if (k < hom_num_.size() && hom_num_[k] != Complex(0.0, 0.0))
            for (Eigen::Index i = 0; i < term.size(); ++i) num[i] += hom_num_[k] * term[i];
        if (k < hom_den_.size() && hom_den_[k] != Complex(0.0, 0.0))
            for (Eigen::Index i = 0; i < term.size(); ++i) den[i] += hom_den_[k] * term[i];
    }
    return RationalMap(num, den);
}

RationalMap RationalMap::conjugate_by_inversion() const {
    // g = i o f o i with i(z) = 1/z:  g(w) = w^(dn-dd) * rev(D)(w) / rev(N)(w)
    const Eigen::Index dn = num_.size() - 1, dd = den_.size() - 1;
    CoeffVector nrev = num_.reverse().eval(), drev = den_.reverse().eval();
    const Eigen::Index shift_num = std::max<Eigen::Index>(0, dn - dd);
    const Eigen::Index shift_den = std::max<Eigen::Index>(0, dd - dn);
    CoeffVector gnum = CoeffVector::Zero(drev.size() + shift_num);
    CoeffVector gden = CoeffVector::Zero(nrev.size() + shift_den);
    gnum.tail(drev.size()) = drev;
    gden.tail(nrev.size()) = nrev;
    return RationalMap(gnum, gden);
}

}  // namespace rcdyn
