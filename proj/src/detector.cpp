#include "rpg/detector.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace rpg {

std::vector<int> suffix_array(const std::vector<int>& seq) {
    const int n = static_cast<int>(seq.size());
    if (n == 0) return {};
    std::vector<int> sa(n), rank(n), tmp(n);
    std::iota(sa.begin(), sa.end(), 0);
    for (int i = 0; i < n; ++i) rank[i] = seq[i];
    for (int k = 1;; k <<= 1) {
        auto key = [&](int i) {
            return std::pair<int, int>{rank[i], i + k < n ? rank[i + k] : -1};
        };
        std::sort(sa.begin(), sa.end(), [&](int a, int b) { return key(a) < key(b); });
        tmp[sa[0]] = 0;
        for (int i = 1; i < n; ++i)
            tmp[sa[i]] = tmp[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
        rank = tmp;
        if (rank[sa[n - 1]] == n - 1) break;
    }
    return sa;
}

std::vector<int> lcp_array(const std::vector<int>& seq, const std::vector<int>& sa) {
    const int n = static_cast<int>(seq.size());
    std::vector<int> rank(n), lcp(n, 0);
    for (int i = 0; i < n; ++i) rank[sa[i]] = i;
    int h = 0;
    for (int i = 0; i < n; ++i) {
        if (rank[i] == 0) {
            h = 0;
            continue;
        }
        int j = sa[rank[i] - 1];
        if (h > 0) --h;
        while (i + h < n && j + h < n && seq[i + h] == seq[j + h]) ++h;
        lcp[rank[i]] = h;
    }
    return lcp;
}

SparseTableMin::SparseTableMin(const std::vector<int>& values) {
    size_t n = values.size();
    log2_.assign(n + 1, 0);
    for (size_t i = 2; i <= n; ++i) log2_[i] = log2_[i / 2] + 1;
    table_.push_back(values);
    for (int k = 1; (size_t(1) << k) <= n; ++k) {
        const auto& prev = table_.back();
        std::vector<int> row(n - (size_t(1) << k) + 1);
        for (size_t i = 0; i < row.size(); ++i)
            row[i] = std::min(prev[i], prev[i + (size_t(1) << (k - 1))]);
        table_.push_back(std::move(row));
    }
}

int SparseTableMin::min_in(size_t lo, size_t hi) const {
    int k = log2_[hi - lo];
    return std::min(table_[k][lo], table_[k][hi - (size_t(1) << k)]);
}

LceIndex::LceIndex(const std::vector<int>& seq) : n_(seq.size()) {
    auto build = [](const std::vector<int>& s, Dir& d) {
        d.sa = suffix_array(s);
        d.lcp = lcp_array(s, d.sa);
        d.rank.resize(s.size());
        for (size_t i = 0; i < s.size(); ++i) d.rank[d.sa[i]] = static_cast<int>(i);
        if (!s.empty()) d.rmq.emplace(d.lcp);
    };
    build(seq, fwd_);
    std::vector<int> rev(seq.rbegin(), seq.rend());
    build(rev, bwd_);
}

size_t LceIndex::lce(const Dir& d, size_t a, size_t b) const {
    if (a >= n_ || b >= n_) return 0;
    if (a == b) return n_ - a;
    int ra = d.rank[a], rb = d.rank[b];
    if (ra > rb) std::swap(ra, rb);
    return static_cast<size_t>(d.rmq->min_in(ra + 1, rb + 1));
}

size_t LceIndex::forward(size_t i, size_t j) const { return lce(fwd_, i, j); }

size_t LceIndex::backward(size_t i, size_t j) const {
    if (i >= n_ || j >= n_) return 0;
    return lce(bwd_, n_ - 1 - i, n_ - 1 - j);
}

namespace {

bool primitive_block(const std::vector<int>& seq, size_t s, size_t d) {
    for (size_t dd = 1; dd < d; ++dd) {
        if (d % dd != 0) continue;
        bool periodic = true;
        for (size_t i = s + dd; i < s + d && periodic; ++i)
            if (seq[i] != seq[i - dd]) periodic = false;
        if (periodic) return false;
    }
    return true;
}

} // namespace

std::vector<RepetitionPattern> find_consecutive_repetitions(const std::vector<int>& seq, size_t min_count) {
    const size_t n = seq.size();
    std::vector<RepetitionPattern> out;
    if (n < 2) return out;
    LceIndex lce(seq);
    std::set<std::tuple<size_t, size_t, size_t>> seen; // (start, end, period)
    for (size_t d = 1; d * 2 <= n; ++d) {
        for (size_t a = 0; a + d <= n; a += d) {
            size_t f = a + d < n ? lce.forward(a, a + d) : 0;
            size_t b = a > 0 ? lce.backward(a - 1, a + d - 1) : 0;
            if (f + b < d) continue;
            size_t s = a - b;
            size_t e = a + d + f;
            if (e - s < 2 * d) continue;
            if (!seen.emplace(s, e, d).second) continue;
            if (!primitive_block(seq, s, d)) continue;
            size_t count = (e - s) / d;
            if (count < min_count) continue;
            RepetitionPattern p;
            p.start = s;
            p.period = d;
            p.count = count;
            p.block.assign(seq.begin() + s, seq.begin() + s + d);
            p.trailing = e == n;
            out.push_back(std::move(p));
        }
    }
    std::sort(out.begin(), out.end(), [](const RepetitionPattern& a, const RepetitionPattern& b) {
        return std::tie(a.start, a.period) < std::tie(b.start, b.period);
    });
    return out;
}

std::optional<TrailingRepetition> trailing_repetition(const std::vector<int>& seq,
                                                      size_t min_count) {
    std::optional<TrailingRepetition> best;
    for (const RepetitionPattern& p : find_consecutive_repetitions(seq, min_count)) {
        if (!p.trailing) continue;
        size_t covered = p.period * p.count;
        if (best) {
            size_t bc = best->period * best->count;
            if (covered < bc || (covered == bc && p.period <= best->period)) continue;
        }
        best = TrailingRepetition{p.start, p.period, p.count, seq[seq.size() - p.period]};
    }
    return best;
}

} // namespace rpg
