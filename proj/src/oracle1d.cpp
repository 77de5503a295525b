#include "rcdyn/oracle1d.hpp"

#include <cmath>
#include <stdexcept>

namespace rcdyn::oracle1d {

double devils_staircase(double x, int depth) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double v = 0.0, w = 1.0;
    for (int i = 0; i < depth; ++i) {
        x *= 3.0;
        const int digit = int(x);
        x -= digit;
        if (digit == 1) return v + 0.5 * w;  // middle third: constant, exact
        if (digit >= 2) v += 0.5 * w;
        w *= 0.5;
        if (x == 0.0) return v;  // remaining digits all zero
    }
    return v + 0.5 * w;  // error <= w/2
}

double lebesgue_L(double p, double x, int depth) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("parameter p must lie in (0,1)");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double v = 0.0, scale = 1.0;
    for (int i = 0; i < depth; ++i) {
        if (x < 0.5) {
            x *= 2.0;
            scale *= p;
        } else {
            v += scale * p;
            scale *= (1.0 - p);
            x = 2.0 * x - 1.0;
        }
        if (x == 0.0) return v;
        if (x == 1.0) return v + scale;
    }
    return v + 0.5 * scale;  // error <= scale/2
}

double takagi_phi(double x, int n_terms) {
    double acc = 0.0, pow2 = 1.0;
    for (int n = 0; n < n_terms; ++n) {
        const double y = x * pow2;
        const double frac = y - std::floor(y);
        acc += std::min(frac, 1.0 - frac) / pow2;
        pow2 *= 2.0;
    }
    return acc;
}

double ifs_free_energy(const AffineIFS& ifs, double beta) {
    for (int i = 0; i < ifs.branches(); ++i)
        if (ifs.ratio(i) <= 0.0 || ifs.ratio(i) >= 1.0)
            throw std::invalid_argument("contraction ratios must lie in (0,1)");

    auto value = [&](double t) {
        double s = 0.0;
        for (int i = 0; i < ifs.branches(); ++i)
            s += std::pow(ifs.probs[i], beta) * std::pow(ifs.ratio(i), t);
        return s - 1.0;
    };
    // value is strictly decreasing in t; expand a bracket, then bisect
    double lo = -1.0, hi = 1.0;
    while (value(lo) < 0.0) lo *= 2.0;
    while (value(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (value(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace rcdyn::oracle1d
