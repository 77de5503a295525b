#include "rcdyn/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace rcdyn {

std::vector<MultiIndex> multi_index_box(const MultiIndex& n_max) {
    std::vector<MultiIndex> out;
    const int s = n_max.size();
    std::vector<int> cur(s, 0);
    while (true) {
        out.emplace_back(cur);
        int i = s - 1;
        while (i >= 0) {
            if (cur[i] < n_max[i]) {
                ++cur[i];
                std::fill(cur.begin() + i + 1, cur.end(), 0);
                break;
            }
            --i;
        }
        if (i < 0) break;
    }
    std::sort(out.begin(), out.end(), graded_lex_less);
    return out;
}

int CocycleMatrix::position(const MultiIndex& m) const {
    for (std::size_t i = 0; i < index_set.size(); ++i)
        if (index_set[i] == m) return int(i);
    return -1;
}

double CocycleMatrix::value(const MultiIndex& q, const MultiIndex& r) const {
    const int iq = position(q), ir = position(r);
    if (iq < 0 || ir < 0) throw std::out_of_range("multi-index outside the truncation box");
    return entries(iq, ir) * std::exp(log_scale);
}

CocycleMatrix step_matrix(const std::vector<double>& probs, int symbol, const MultiIndex& n_max,
                          bool normalized) {
    const int s = n_max.size();
    const int m = int(probs.size());
    if (m != s + 1) throw std::invalid_argument("probability vector length must be s+1");
    if (symbol < 1 || symbol > s + 1) throw std::invalid_argument("symbol out of range");

    CocycleMatrix A;
    A.n_max = n_max;
    A.index_set = multi_index_box(n_max);
    const int n = A.dim();
    A.entries = Matrix::Zero(n, n);
    A.normalized = normalized;

    std::unordered_map<MultiIndex, int, MultiIndexHash> pos;
    for (int i = 0; i < n; ++i) pos[A.index_set[i]] = i;

    const double p = probs[symbol - 1];
    for (int i = 0; i < n; ++i) {
        const MultiIndex& idx = A.index_set[i];
        A.entries(i, i) = p;
        if (symbol <= s) {
            if (idx[symbol - 1] > 0)
                A.entries(i, pos.at(idx.minus_unit(symbol - 1))) = double(idx[symbol - 1]);
        } else {
            for (int j = 0; j < s; ++j)
                if (idx[j] > 0) A.entries(i, pos.at(idx.minus_unit(j))) = -double(idx[j]);
        }
    }
    if (normalized) A.entries /= p;
    return A;
}

CocycleMatrix cocycle_product(const std::vector<double>& probs, const std::vector<int>& word,
                              const MultiIndex& n_max, bool normalized) {
    if (word.empty()) throw std::invalid_argument("cocycle product of an empty word");
    CocycleMatrix acc = step_matrix(probs, word[0], n_max, /*normalized=*/true);
    double log_p = std::log(probs[word[0] - 1]);
    for (std::size_t j = 1; j < word.size(); ++j) {
        const CocycleMatrix step = step_matrix(probs, word[j], n_max, /*normalized=*/true);
        acc.entries = (acc.entries * step.entries).eval();
        log_p += std::log(probs[word[j] - 1]);
    }
    acc.normalized = normalized;
    acc.log_scale = normalized ? 0.0 : log_p;
    if (!normalized && word.size() <= 64) {
        // short words re-exponentiate exactly; long ones keep the scale split
        acc.entries *= std::exp(log_p);
        acc.log_scale = 0.0;
    }
    return acc;
}

std::vector<int> word_symbol_counts(const std::vector<int>& word, int num_symbols) {
    std::vector<int> counts(num_symbols, 0);
    for (int sym : word) {
        if (sym < 1 || sym > num_symbols) throw std::invalid_argument("symbol out of range");
        counts[sym - 1] += 1;
    }
    return counts;
}

namespace {

// log of n! via lgamma, exact small-integer path where it matters is handled
// by the caller through products of long doubles
long double log_factorial(int n) { return std::lgammal((long double)(n) + 1.0L); }

long double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -std::numeric_limits<long double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace

double cocycle_closed_form(const std::vector<double>& probs, const std::vector<int>& counts,
                           const MultiIndex& q, const MultiIndex& r) {
    const int s = q.size();
    if (int(counts.size()) != s + 1 || int(probs.size()) != s + 1)
        throw std::invalid_argument("counts/probs must have length s+1");
    if (!r.leq(q)) return 0.0;

    const int m_last = counts[s];
    // t ranges over the box prod [max(0, q_i - r_i - m_i), q_i - r_i], |t| <= m_last
    std::vector<int> lo(s), hi(s), t(s);
    for (int i = 0; i < s; ++i) {
        hi[i] = q[i] - r[i];
        lo[i] = std::max(0, q[i] - r[i] - counts[i]);
        t[i] = lo[i];
    }

    long double acc = 0.0L;
    while (true) {
        int abs_t = 0;
        for (int i = 0; i < s; ++i) abs_t += t[i];
        if (abs_t <= m_last) {
            // (-1)^|t| p_{s+1}^{-|t|} C(m_{s+1},|t|) |t|! prod_i C(m_i, q_i-r_i-t_i) q_i! / (t_i! r_i! p_i^{q_i-r_i-t_i})
            long double log_mag = -abs_t * std::log((long double)probs[s]);
            log_mag += log_binomial(m_last, abs_t) + log_factorial(abs_t);
            bool feasible = true;
            for (int i = 0; i < s; ++i) {
                const int d = q[i] - r[i] - t[i];
                if (d < 0 || d > counts[i]) {
                    feasible = false;
                    break;
                }
                log_mag += log_binomial(counts[i], d) + log_factorial(q[i]);
                log_mag -= log_factorial(t[i]) + log_factorial(r[i]);
                log_mag -= d * std::log((long double)probs[i]);
            }
            if (feasible) {
                const long double term = expl(log_mag);
                acc += (abs_t % 2 == 0) ? term : -term;
            }
        }
        int i = s - 1;
        while (i >= 0) {
            if (t[i] < hi[i]) {
                ++t[i];
                std::fill(t.begin() + i + 1, t.end(), 0);
                for (int j = i + 1; j < s; ++j) t[j] = lo[j];
                break;
            }
            --i;
        }
        if (i < 0) break;
    }
    return double(acc);
}

}  // namespace rcdyn
