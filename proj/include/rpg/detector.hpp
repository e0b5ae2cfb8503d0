#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace rpg {

// Suffix array over an integer sequence (lexicographic order of suffixes).
std::vector<int> suffix_array(const std::vector<int>& seq);

// lcp[i] = longest common prefix of suffixes sa[i-1] and sa[i]; lcp[0] = 0.
std::vector<int> lcp_array(const std::vector<int>& seq, const std::vector<int>& sa);

// A maximal periodic run with a primitive repeating block: seq[start ..) is
// d-periodic over exactly count whole blocks (plus a partial tail inside the
// run), cannot be extended in either direction, and the block itself is not
// a repetition of a shorter block.
struct RepetitionPattern {
    size_t start = 0;
    size_t period = 0;
    size_t count = 0;          // whole blocks inside the run
    std::vector<int> block;    // seq[start .. start+period)
    bool trailing = false;     // the run reaches the end of the sequence

    bool operator==(const RepetitionPattern&) const = default;
};

// All patterns with count >= min_count, sorted by (start, period).
std::vector<RepetitionPattern> find_consecutive_repetitions(const std::vector<int>& seq,
                                                size_t min_count = 2);

struct TrailingRepetition {
    size_t start = 0;
    size_t period = 0;
    size_t count = 0;
    int expected_next = 0; // the value that would extend the run by one element
};

// The dominant trailing run: largest covered length period*count, ties broken
// toward the longer period.
std::optional<TrailingRepetition> trailing_repetition(const std::vector<int>& seq,
                                                      size_t min_count = 2);

// Range-minimum structure used for longest-common-extension queries.
class SparseTableMin {
public:
    explicit SparseTableMin(const std::vector<int>& values);
    int min_in(size_t lo, size_t hi) const; // [lo, hi), requires lo < hi

private:
    std::vector<std::vector<int>> table_;
    std::vector<int> log2_;
};

// Longest common extension queries over a fixed sequence, in both directions.
class LceIndex {
public:
    explicit LceIndex(const std::vector<int>& seq);
    size_t forward(size_t i, size_t j) const;  // match length of seq[i..], seq[j..]
    size_t backward(size_t i, size_t j) const; // match length of seq[..i], seq[..j]
    size_t size() const { return n_; }

private:
    struct Dir {
        std::vector<int> sa, rank, lcp;
        std::optional<SparseTableMin> rmq;
    };
    size_t lce(const Dir& d, size_t a, size_t b) const;

    size_t n_;
    Dir fwd_, bwd_;
};

} // namespace rpg
