#pragma once

#include <cstddef>
#include <vector>

#include "rpg/pda.hpp"
#include "rpg/penalizer.hpp"

namespace rpg {

struct MetricReport {
    double egp = 0;
    double tr_n = 0;
    size_t n = 4; // gram size used for tr_n
    double tr_s = 0;
    double ccp = 0;
    double gen_len_mean = 0;
    double wall_time_mean_seconds = 0;
    size_t sample_count = 0;
};

// Fraction of results that terminated with the EOS token.
double egp(const std::vector<GenerationResult>& results);

// 1 - unique n-grams / (len - n + 1) over the merged label sequence;
// 0 when the sequence is shorter than n (short_flag reports that case).
double tr_n(const ReducedSequence& merged, size_t n, bool* short_flag = nullptr);

// 1 - unique statement structures / total statement instances; instances
// compare equal when class and signature match.  0 when empty.
double tr_s(const std::vector<StatementInstance>& statements);

// Fraction of results whose full stream was grammatically accepted.
double ccp(const std::vector<GenerationResult>& results);

double gen_len(const std::vector<GenerationResult>& results);
double wall_time(const std::vector<GenerationResult>& results);

// Unbiased estimator 1 - C(n-c,k)/C(n,k), evaluated as a stable product.
double pass_at_k(size_t n, size_t c, size_t k);

// Aggregate over a batch: tr_n / tr_s are means of the per-result values.
MetricReport metric_report(const std::vector<GenerationResult>& results, size_t n = 4);

} // namespace rpg
