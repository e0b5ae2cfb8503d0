#include "rpg/metrics.hpp"

#include <set>
#include <stdexcept>
#include <utility>

namespace rpg {

namespace {

void require_nonempty(const std::vector<GenerationResult>& results) {
    if (results.empty()) throw std::invalid_argument("no results");
}

} // namespace

double egp(const std::vector<GenerationResult>& results) {
    require_nonempty(results);
    size_t hits = 0;
    for (const auto& r : results) hits += r.ended_with_eos ? 1 : 0;
    return static_cast<double>(hits) / results.size();
}

double tr_n(const ReducedSequence& merged, size_t n, bool* short_flag) {
    const auto& labels = merged.labels;
    if (short_flag) *short_flag = labels.size() < n;
    if (labels.size() < n || n == 0) return 0.0;
    std::set<std::vector<ReductionLabel>> unique;
    size_t total = labels.size() - n + 1;
    for (size_t i = 0; i < total; ++i)
        unique.insert(std::vector<ReductionLabel>(labels.begin() + i, labels.begin() + i + n));
    return 1.0 - static_cast<double>(unique.size()) / total;
}

double tr_s(const std::vector<StatementInstance>& statements) {
    if (statements.empty()) return 0.0;
    std::set<std::pair<int, std::vector<ReductionLabel>>> unique;
    for (const auto& s : statements) unique.emplace(s.rule, s.signature);
    return 1.0 - static_cast<double>(unique.size()) / statements.size();
}

double ccp(const std::vector<GenerationResult>& results) {
    require_nonempty(results);
    size_t hits = 0;
    for (const auto& r : results) hits += r.accepted ? 1 : 0;
    return static_cast<double>(hits) / results.size();
}

double gen_len(const std::vector<GenerationResult>& results) {
    require_nonempty(results);
    double sum = 0;
    for (const auto& r : results) sum += static_cast<double>(r.tokens.size());
    return sum / results.size();
}

double wall_time(const std::vector<GenerationResult>& results) {
    require_nonempty(results);
    double sum = 0;
    for (const auto& r : results) sum += r.seconds;
    return sum / results.size();
}

double pass_at_k(size_t n, size_t c, size_t k) {
    if (c > n || k < 1 || k > n) throw std::invalid_argument("need 0 <= c <= n and 1 <= k <= n");
    if (n - c < k) return 1.0;
    double miss = 1.0;
    for (size_t i = 0; i < k; ++i)
        miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    return 1.0 - miss;
}

MetricReport metric_report(const std::vector<GenerationResult>& results, size_t n) {
    require_nonempty(results);
    MetricReport rep;
    rep.n = n;
    rep.sample_count = results.size();
    rep.egp = egp(results);
    rep.ccp = ccp(results);
    rep.gen_len_mean = gen_len(results);
    rep.wall_time_mean_seconds = wall_time(results);
    double tn = 0, ts = 0;
    for (const auto& r : results) {
        tn += tr_n(r.merged, n);
        ts += tr_s(r.statements);
    }
    rep.tr_n = tn / results.size();
    rep.tr_s = ts / results.size();
    return rep;
}

} // namespace rpg
