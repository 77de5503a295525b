#pragma once

#include <Eigen/Dense>

#include "rcdyn/multi_index.hpp"

#include <vector>

namespace rcdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Finite truncation of the transport matrices indexed by {r : r <= n_max} in graded
// lexicographic order. Lower triangular with respect to the componentwise partial
// order; the truncated product equals the truncation of the full product.
struct CocycleMatrix {
    MultiIndex n_max;
    std::vector<MultiIndex> index_set;  // graded lex enumeration of the box
    Matrix entries;                     // actual value = entries * exp(log_scale)
    double log_scale = 0.0;             // 0 for normalized matrices
    bool normalized = false;

    int dim() const { return int(index_set.size()); }
    int position(const MultiIndex& m) const;

    // entry including the scale factor; may overflow to +-inf for extreme words
    double value(const MultiIndex& q, const MultiIndex& r) const;
};

// One-step transport matrix of the functional-equation system for generator `symbol`
// (1-based, in {1,...,s+1}) and probability vector probs (length s+1).
CocycleMatrix step_matrix(const std::vector<double>& probs, int symbol, const MultiIndex& n_max,
                          bool normalized);

// Ordered product of step matrices along the word (left factor = first symbol).
// Computed in normalized form with the probability product carried in log_scale,
// so long words neither overflow nor underflow.
CocycleMatrix cocycle_product(const std::vector<double>& probs, const std::vector<int>& word,
                              const MultiIndex& n_max, bool normalized);

// Closed-form entry of the normalized cocycle from the symbol counts alone:
// counts[i] = number of occurrences of symbol i+1 in the word (length s+1).
// Returns exactly 0 when r is not componentwise <= q.
double cocycle_closed_form(const std::vector<double>& probs, const std::vector<int>& counts,
                           const MultiIndex& q, const MultiIndex& r);

std::vector<int> word_symbol_counts(const std::vector<int>& word, int num_symbols);

}  // namespace rcdyn
