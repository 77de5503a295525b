#include "doctest.h"

#include "rcdyn/cocycle.hpp"
#include "rcdyn/rng.hpp"

#include <cmath>

using namespace rcdyn;

namespace {

std::vector<int> random_word(Rng& rng, int num_symbols, int len) {
    std::vector<int> w(len);
    for (int i = 0; i < len; ++i) w[i] = 1 + int(rng.index(num_symbols));
    return w;
}

std::vector<double> random_probs(Rng& rng, int n) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        p[i] = rng.uniform(0.15, 1.0);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

}  // namespace

TEST_CASE("multi-index box in graded lex order") {
    const auto box = multi_index_box(MultiIndex({2, 1}));
    REQUIRE(box.size() == 6);
    CHECK(box[0].entries == std::vector<int>({0, 0}));
    CHECK(box[1].entries == std::vector<int>({0, 1}));
    CHECK(box[2].entries == std::vector<int>({1, 0}));
    CHECK(box[3].entries == std::vector<int>({1, 1}));
    CHECK(box[4].entries == std::vector<int>({2, 0}));
    CHECK(box[5].entries == std::vector<int>({2, 1}));
}

TEST_CASE("step matrices for s=1") {
    const std::vector<double> p{0.3, 0.7};
    const MultiIndex nmax({1});

    const auto A1 = step_matrix(p, 1, nmax, false);
    REQUIRE(A1.dim() == 2);
    CHECK(A1.entries(0, 0) == doctest::Approx(0.3));
    CHECK(A1.entries(0, 1) == 0.0);
    CHECK(A1.entries(1, 0) == doctest::Approx(1.0));
    CHECK(A1.entries(1, 1) == doctest::Approx(0.3));

    const auto A2 = step_matrix(p, 2, nmax, false);
    CHECK(A2.entries(0, 0) == doctest::Approx(0.7));
    CHECK(A2.entries(1, 0) == doctest::Approx(-1.0));
    CHECK(A2.entries(1, 1) == doctest::Approx(0.7));

    for (int sym : {1, 2}) {
        const auto N = step_matrix(p, sym, nmax, true);
        CHECK(N.entries(0, 0) == doctest::Approx(1.0));
        CHECK(N.entries(1, 1) == doctest::Approx(1.0));
    }
}

TEST_CASE("product of a single-symbol word equals the step matrix") {
    const std::vector<double> p{0.4, 0.6};
    const MultiIndex nmax({2});
    const auto step = step_matrix(p, 1, nmax, false);
    const auto prod = cocycle_product(p, {1}, nmax, false);
    CHECK((step.entries - prod.entries).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("normalized product for word (1,1,2) at p=(1/2,1/2)") {
    const std::vector<double> p{0.5, 0.5};
    const auto A = cocycle_product(p, {1, 1, 2}, MultiIndex({1}), true);
    CHECK(A.entries(0, 0) == doctest::Approx(1.0));
    CHECK(A.entries(0, 1) == 0.0);
    CHECK(A.entries(1, 0) == doctest::Approx(2.0));
    CHECK(A.entries(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("permuted words with equal counts give identical matrices") {
    // dyadic probabilities keep every intermediate value exactly representable,
    // so the commutation identity holds bit for bit
    const std::vector<double> p{0.5, 0.25, 0.25};
    const MultiIndex nmax({2, 2});
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        auto w1 = random_word(rng, 3, 8);
        auto w2 = w1;
        std::shuffle(w2.begin(), w2.end(), rng.engine());
        const auto A = cocycle_product(p, w1, nmax, true);
        const auto B = cocycle_product(p, w2, nmax, true);
        CHECK((A.entries - B.entries).cwiseAbs().maxCoeff() == 0.0);
    }

    // generic probabilities agree to rounding
    Rng rng2(5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto p2 = random_probs(rng2, 3);
        auto w1 = random_word(rng2, 3, 10);
        auto w2 = w1;
        std::shuffle(w2.begin(), w2.end(), rng2.engine());
        const auto A = cocycle_product(p2, w1, nmax, true);
        const auto B = cocycle_product(p2, w2, nmax, true);
        const double scale = A.entries.cwiseAbs().maxCoeff();
        CHECK((A.entries - B.entries).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
}

TEST_CASE("closed form: diagonal, triangular zero, worked example") {
    const std::vector<double> p{0.5, 0.5};
    // q = r gives 1
    CHECK(cocycle_closed_form(p, {3, 2}, MultiIndex({2}), MultiIndex({2})) == doctest::Approx(1.0));
    // r not <= q gives exactly 0
    CHECK(cocycle_closed_form(p, {3, 2}, MultiIndex({1}), MultiIndex({2})) == 0.0);
    // two-term example: m=(2,1), q=1, r=0 -> 2/p1 - 1/p2 = 2
    CHECK(cocycle_closed_form(p, {2, 1}, MultiIndex({1}), MultiIndex({0})) == doctest::Approx(2.0));
}

TEST_CASE("closed form equals iterated product on random words") {
    Rng rng(17);
    int done = 0;
    while (done < 120) {
        const int s = 1 + int(rng.index(3));
        const auto p = random_probs(rng, s + 1);
        const int len = 1 + int(rng.index(20));
        const auto word = random_word(rng, s + 1, len);
        std::vector<int> nm(s);
        for (int i = 0; i < s; ++i) nm[i] = int(rng.index(4));
        const MultiIndex nmax(nm);
        const auto A = cocycle_product(p, word, nmax, true);
        const auto counts = word_symbol_counts(word, s + 1);
        for (int iq = 0; iq < A.dim(); ++iq)
            for (int ir = 0; ir < A.dim(); ++ir) {
                const double direct = cocycle_closed_form(p, counts, A.index_set[iq], A.index_set[ir]);
                const double prod = A.entries(iq, ir);
                const double scale = std::max({1.0, std::abs(direct), std::abs(prod)});
                CHECK(std::abs(direct - prod) <= 1e-9 * scale);
            }
        ++done;
    }
}

TEST_CASE("triangularity and unit diagonal are exact") {
    Rng rng(29);
    const auto p = random_probs(rng, 3);
    const MultiIndex nmax({2, 2});
    const auto word = random_word(rng, 3, 15);
    const auto A = cocycle_product(p, word, nmax, true);
    for (int iq = 0; iq < A.dim(); ++iq) {
        CHECK(A.entries(iq, iq) == 1.0);
        for (int ir = 0; ir < A.dim(); ++ir)
            if (!A.index_set[ir].leq(A.index_set[iq])) CHECK(A.entries(iq, ir) == 0.0);
    }
}

TEST_CASE("growth bound: |A(w,k)_{q,r}| <= K k^{|q|}") {
    const std::vector<double> p{0.4, 0.35, 0.25};
    const MultiIndex q({2, 1}), r({0, 0});
    Rng rng(41);
    // fit K on short words, then assert the polynomial order out to k = 10^4
    double K = 1.0;
    for (int k : {5, 10, 20}) {
        const auto w = random_word(rng, 3, k);
        const auto c = word_symbol_counts(w, 3);
        K = std::max(K, std::abs(cocycle_closed_form(p, c, q, r)) / std::pow(double(k), q.order()));
    }
    K *= 2.0;
    for (int k : {100, 1000, 10000}) {
        const auto w = random_word(rng, 3, k);
        const auto c = word_symbol_counts(w, 3);
        const double v = std::abs(cocycle_closed_form(p, c, q, r));
        CHECK(v <= K * std::pow(double(k), q.order()));
    }
}

TEST_CASE("lower bound regime for words avoiding the last symbol") {
    const std::vector<double> p{0.4, 0.35, 0.25};
    const MultiIndex q({2, 1}), r({0, 0});
    Rng rng(43);
    // fitted K' from a short word, asserted on longer ones
    auto entry = [&](int k) {
        const auto w = random_word(rng, 2, k);  // symbols 1..2 only
        const auto c = word_symbol_counts(w, 3);
        double prod = 1.0;
        for (int i = 0; i < 2; ++i) prod *= std::pow(double(std::max(1, c[i])), q[i] - r[i]);
        return std::pair<double, double>(cocycle_closed_form(p, c, q, r), prod);
    };
    const auto [v0, m0] = entry(12);
    const double Kp = 0.5 * v0 / m0;
    CHECK(Kp > 0.0);
    for (int k : {50, 200, 1000}) {
        const auto [v, m] = entry(k);
        CHECK(v >= Kp * m);
    }
}
