#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rpg/metrics.hpp"

using namespace rpg;

namespace {

GenerationResult result_with(bool eos, bool accepted, size_t tokens, double seconds) {
    GenerationResult r;
    r.tokens.assign(tokens, 1);
    r.ended_with_eos = eos;
    r.accepted = accepted;
    r.seconds = seconds;
    return r;
}

ReducedSequence labels(const std::vector<int>& states) {
    ReducedSequence seq;
    for (size_t i = 0; i < states.size(); ++i) {
        seq.labels.push_back({0, states[i], 0});
        seq.origins.push_back({i, i});
    }
    return seq;
}

StatementInstance stmt(int rule, std::vector<int> sig_states) {
    StatementInstance s;
    s.rule = rule;
    for (int st : sig_states) s.signature.push_back({rule, st, 0});
    s.complete = true;
    return s;
}

// Direct binomial-coefficient evaluation used as an oracle for the stable
// product form.
double pass_at_k_direct(size_t n, size_t c, size_t k) {
    if (n - c < k) return 1.0;
    double log_ratio = std::lgamma(static_cast<double>(n - c + 1)) -
                       std::lgamma(static_cast<double>(n - c - k + 1)) -
                       std::lgamma(static_cast<double>(n + 1)) +
                       std::lgamma(static_cast<double>(n - k + 1));
    return 1.0 - std::exp(log_ratio);
}

} // namespace

TEST_CASE("egp is the eos-termination fraction") {
    std::vector<GenerationResult> rs = {result_with(true, true, 3, 0.1),
                                        result_with(false, false, 5, 0.1),
                                        result_with(true, false, 2, 0.1),
                                        result_with(true, true, 1, 0.1)};
    CHECK(egp(rs) == doctest::Approx(0.75));
    CHECK_THROWS_AS(egp({}), std::invalid_argument);
}

TEST_CASE("ccp is the grammatical-acceptance fraction") {
    std::vector<GenerationResult> rs = {result_with(true, true, 3, 0.1),
                                        result_with(false, false, 5, 0.1)};
    CHECK(ccp(rs) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ccp({}), std::invalid_argument);
}

TEST_CASE("gen_len and wall_time are means") {
    std::vector<GenerationResult> rs = {result_with(true, true, 10, 0.2),
                                        result_with(true, true, 20, 0.4)};
    CHECK(gen_len(rs) == doctest::Approx(15.0));
    CHECK(wall_time(rs) == doctest::Approx(0.3));
}

TEST_CASE("token-level repetition: ten identical labels at n=4") {
    // all 4-grams equal -> unique = 1 of 7 windows -> 1 - 1/7 = 6/7
    bool short_flag = true;
    CHECK(tr_n(labels(std::vector<int>(10, 5)), 4, &short_flag) ==
          doctest::Approx(6.0 / 7.0).epsilon(1e-12));
    CHECK_FALSE(short_flag);
}

TEST_CASE("token-level repetition: all-distinct sequence scores zero") {
    CHECK(tr_n(labels({1, 2, 3, 4, 5, 6}), 4) == doctest::Approx(0.0));
}

TEST_CASE("token-level repetition: short sequences report zero with a flag") {
    bool short_flag = false;
    CHECK(tr_n(labels({1, 2, 3}), 4, &short_flag) == doctest::Approx(0.0));
    CHECK(short_flag);
    CHECK(tr_n(labels({}), 4, &short_flag) == doctest::Approx(0.0));
    CHECK(short_flag);
    // exactly n labels: one window, necessarily unique -> 0, not short
    CHECK(tr_n(labels({1, 2, 3, 4}), 4, &short_flag) == doctest::Approx(0.0));
    CHECK_FALSE(short_flag);
}

TEST_CASE("structure-level repetition counts duplicate statement shapes") {
    // A A A B -> unique {A, B} of 4 -> 1 - 2/4 = 0.5
    std::vector<StatementInstance> sts = {stmt(1, {0, 1}), stmt(1, {0, 1}), stmt(1, {0, 1}),
                                          stmt(2, {0})};
    CHECK(tr_s(sts) == doctest::Approx(0.5));
    // same rule, different signature counts as distinct
    std::vector<StatementInstance> mixed = {stmt(1, {0, 1}), stmt(1, {0, 2})};
    CHECK(tr_s(mixed) == doctest::Approx(0.0));
    CHECK(tr_s({}) == doctest::Approx(0.0));
}

TEST_CASE("pass_at_k hand values") {
    CHECK(pass_at_k(5, 2, 1) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pass_at_k(10, 0, 5) == doctest::Approx(0.0));
    CHECK(pass_at_k(10, 10, 1) == doctest::Approx(1.0));
    CHECK(pass_at_k(4, 2, 3) == doctest::Approx(1.0)); // n - c < k
    CHECK(pass_at_k(5, 5, 5) == doctest::Approx(1.0));
    // C(8,3)/C(10,3) = 56/120
    CHECK(pass_at_k(10, 2, 3) == doctest::Approx(1.0 - 56.0 / 120.0).epsilon(1e-12));
}

TEST_CASE("pass_at_k rejects invalid arguments") {
    CHECK_THROWS_AS(pass_at_k(0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(pass_at_k(5, 6, 1), std::invalid_argument);
    CHECK_THROWS_AS(pass_at_k(5, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(pass_at_k(5, 2, 6), std::invalid_argument);
}

TEST_CASE("pass_at_k matches log-gamma oracle and is monotone in c and k") {
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<size_t> n_d(1, 200);
    for (int trial = 0; trial < 300; ++trial) {
        size_t n = n_d(rng);
        size_t c = std::uniform_int_distribution<size_t>(0, n)(rng);
        size_t k = std::uniform_int_distribution<size_t>(1, n)(rng);
        double v = pass_at_k(n, c, k);
        CHECK(v == doctest::Approx(pass_at_k_direct(n, c, k)).epsilon(1e-9));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (c < n) CHECK(pass_at_k(n, c + 1, k) >= v - 1e-12);
        if (k < n) CHECK(pass_at_k(n, c, k + 1) >= v - 1e-12);
    }
}

TEST_CASE("metric_report aggregates per-result values") {
    GenerationResult a = result_with(true, true, 10, 0.2);
    a.merged = labels(std::vector<int>(10, 5)); // tr_n = 6/7
    a.statements = {stmt(1, {0}), stmt(1, {0})}; // tr_s = 0.5
    GenerationResult b = result_with(false, false, 20, 0.4);
    b.merged = labels({1, 2, 3, 4, 5, 6}); // tr_n = 0
    b.statements = {stmt(1, {0}), stmt(2, {0})}; // tr_s = 0

    MetricReport r = metric_report({a, b}, 4);
    CHECK(r.sample_count == 2);
    CHECK(r.n == 4);
    CHECK(r.egp == doctest::Approx(0.5));
    CHECK(r.ccp == doctest::Approx(0.5));
    CHECK(r.gen_len_mean == doctest::Approx(15.0));
    CHECK(r.wall_time_mean_seconds == doctest::Approx(0.3));
    CHECK(r.tr_n == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
    CHECK(r.tr_s == doctest::Approx(0.25));
}
