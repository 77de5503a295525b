#pragma once

#include <string>
#include <vector>

namespace rcdyn::oracle1d {

// Expanding affine system x -> a_i x + b_i on the line, with inverse branches
// mapping [0,1] into disjoint subintervals. probs are the selection weights.
struct AffineIFS {
    std::vector<double> slopes;   // |a_i| > 1
    std::vector<double> offsets;  // b_i
    std::vector<double> probs;

    int branches() const { return int(slopes.size()); }
    // contraction ratio of the inverse branch
    double ratio(int i) const { return 1.0 / std::abs(slopes[i]); }
};

inline AffineIFS doubling_ifs(double p) { return {{2.0, 2.0}, {0.0, -1.0}, {p, 1.0 - p}}; }
inline AffineIFS tripling_gap_ifs(double p) { return {{3.0, 3.0}, {0.0, -2.0}, {p, 1.0 - p}}; }

// Cantor function by exact ternary-digit recursion; a middle-third digit resolves
// the value exactly, otherwise the error is <= 2^-(digits consumed + 1).
double devils_staircase(double x, int depth = 64);

// Lebesgue singular function L_p by binary-digit recursion,
// truncation error <= max(p, 1-p)^depth.
double lebesgue_L(double p, double x, int depth = 64);

// Takagi (blancmange) function, truncated series, tail <= 2^-n_terms.
double takagi_phi(double x, int n_terms = 56);

// Unique t with sum_i p_i^beta r_i^t = 1, r_i the contraction ratios; bisection to 1e-12.
double ifs_free_energy(const AffineIFS& ifs, double beta);

struct CrosscheckItem {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CrosscheckReport {
    std::vector<CrosscheckItem> items;
    bool all_pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return !items.empty();
    }
};

// Runs the full machinery (operator iteration on a line atlas, pressure, spectrum)
// against the exact one-dimensional formulas above.
CrosscheckReport oracle_crosscheck(unsigned long long seed = 1);

}  // namespace rcdyn::oracle1d
