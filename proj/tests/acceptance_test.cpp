// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line.  Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "rpg/baselines.hpp"
#include "rpg/harness.hpp"
#include "rpg/metrics.hpp"
#include "rpg/penalizer.hpp"

using namespace rpg;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!ok && !detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- criterion 1: repetition detector vs independent brute-force oracle ----
void check_detector_oracle() {
    std::mt19937_64 rng(8801);
    auto t0 = Clock::now();
    size_t checked = 0;
    std::string detail;
    for (int trial = 0; trial < 1000; ++trial) {
        int alphabet = 2 + trial % 7;
        auto seq = rpgtest::random_sequence(rng, 200, alphabet);
        auto fast = find_consecutive_repetitions(seq);
        auto slow = rpgtest::brute_force_repetitions(seq);
        std::sort(slow.begin(), slow.end(), [](const auto& a, const auto& b) {
            return std::tie(a.start, a.period) < std::tie(b.start, b.period);
        });
        if (fast != slow) {
            detail = "mismatch at trial " + std::to_string(trial);
            break;
        }
        ++checked;
    }
    double dt = seconds_since(t0);
    if (detail.empty() && dt >= 10.0) detail = "took " + std::to_string(dt) + "s";
    report("detector matches brute-force oracle on 1000 random sequences in <10s",
           checked == 1000 && dt < 10.0, detail);
}

// ---- criterion 2: suffix/lcp arrays vs naive construction ----
void check_suffix_structures() {
    std::mt19937_64 rng(8802);
    bool ok = true;
    for (int trial = 0; trial < 300 && ok; ++trial) {
        auto seq = rpgtest::random_sequence(rng, 150, 2 + trial % 6);
        auto sa = suffix_array(seq);
        std::vector<int> naive(seq.size());
        for (size_t i = 0; i < seq.size(); ++i) naive[i] = static_cast<int>(i);
        std::sort(naive.begin(), naive.end(), [&](int a, int b) {
            return std::lexicographical_compare(seq.begin() + a, seq.end(), seq.begin() + b,
                                                seq.end());
        });
        if (sa != naive) ok = false;
        auto lcp = lcp_array(seq, sa);
        for (size_t i = 1; i < sa.size() && ok; ++i) {
            size_t a = sa[i - 1], b = sa[i], m = 0;
            while (a + m < seq.size() && b + m < seq.size() && seq[a + m] == seq[b + m]) ++m;
            if (lcp[i] != static_cast<int>(m)) ok = false;
        }
    }
    report("suffix and lcp arrays match naive constructions on 300 random sequences", ok);
}

// ---- criterion 3: frozen corpus classification ----
bool stream_accepted(const PdaConfig& cfg, const std::string& source) {
    try {
        PdaSession s = PdaSession::start(cfg);
        size_t i = 0;
        for (const Terminal& t : lex(source, cfg.lex_vocab))
            if (!step(cfg, s, t, i++).ok) return false;
        return is_accepting(cfg, s);
    } catch (const LexError&) {
        return false;
    }
}

void check_corpus() {
    const PdaConfig& cfg = rpgtest::python_pda();
    auto valid = load_corpus(std::string(RPG_TEST_DATA_DIR) + "/valid.jsonl");
    auto invalid = load_corpus(std::string(RPG_TEST_DATA_DIR) + "/invalid.jsonl");
    size_t ok_valid = 0, ok_invalid = 0;
    std::string detail;
    for (const auto& r : valid) {
        if (stream_accepted(cfg, r.prompt_text)) ++ok_valid;
        else if (detail.empty()) detail = "rejected valid " + r.id;
    }
    for (const auto& r : invalid) {
        if (!stream_accepted(cfg, r.prompt_text)) ++ok_invalid;
        else if (detail.empty()) detail = "accepted invalid " + r.id;
    }
    report("grammar check accepts all 50 valid and rejects all 50 invalid programs",
           valid.size() == 50 && invalid.size() == 50 && ok_valid == 50 && ok_invalid == 50,
           detail);
}

// ---- criterion 4: segmentation invariance of the incremental lexer ----
void check_segmentation_invariance() {
    const PdaConfig& cfg = rpgtest::python_pda();
    auto corpus = load_corpus(std::string(RPG_TEST_DATA_DIR) + "/valid.jsonl");
    std::mt19937_64 rng(8804);
    std::uniform_int_distribution<size_t> pick(0, corpus.size() - 1);
    std::uniform_int_distribution<int> parts_d(1, 3);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        std::string src;
        int parts = parts_d(rng);
        for (int i = 0; i < parts; ++i) src += corpus[pick(rng)].prompt_text;
        std::vector<Terminal> whole;
        try {
            whole = lex(src, cfg.lex_vocab);
        } catch (const LexError&) {
            ok = false;
            detail = "concatenation failed to lex at trial " + std::to_string(trial);
            break;
        }
        for (int seg = 0; seg < 5 && ok; ++seg) {
            TokenAdapter adapter(cfg.lex_vocab);
            std::vector<Terminal> got;
            size_t pos = 0;
            std::uniform_int_distribution<size_t> len_d(1, 7);
            while (pos < src.size()) {
                size_t len = std::min(len_d(rng), src.size() - pos);
                auto part = adapter.feed_token(std::string_view(src).substr(pos, len));
                got.insert(got.end(), part.begin(), part.end());
                pos += len;
            }
            auto tail = adapter.flush();
            got.insert(got.end(), tail.begin(), tail.end());
            if (got != whole) {
                ok = false;
                detail = "segmentation diverged at trial " + std::to_string(trial);
            }
        }
    }
    report("token stream is invariant under 200x5 random text segmentations", ok, detail);
}

GenerationResult greedy_run(Model& m, const PdaConfig& cfg, const Scenario& sc, size_t budget) {
    return decode_with(m, cfg, sc.vocab, sc.prompt, budget,
                       [](const DecodeSession&, const ScoredVocab& scores) {
                           return greedy_select(scores);
                       });
}

// ---- criterion 5: no-repetition equivalence ----
void check_repetition_free_equivalence() {
    const PdaConfig& cfg = rpgtest::python_pda();
    bool ok = true;
    for (uint64_t seed = 0; seed < 20 && ok; ++seed) {
        Scenario sc = make_repetition_free_scenario();
        PenaltyConfig pc;
        pc.seed = seed;
        auto penalized = decode(*sc.model, cfg, sc.vocab, sc.prompt, pc, sc.budget);
        auto plain = greedy_run(*sc.model, cfg, sc, sc.budget);
        if (penalized.tokens != plain.tokens || !penalized.ended_with_eos) ok = false;
        for (const auto& t : penalized.trace)
            if (t.pn != 1.0 || t.flipped) ok = false;
    }
    report("on repetition-free generations the penalized decoder equals greedy (20 seeds)", ok);
}

// ---- criterion 6: the trap scenario separates the decoders ----
void check_trap_separation() {
    const PdaConfig& cfg = rpgtest::python_pda();
    Scenario sc = make_elif_trap_scenario();
    sc.samplers = {SamplerConfig::parse("greedy"), SamplerConfig::parse("rpg:0.9")};
    auto outcomes = run_scenario(sc, cfg);
    bool ok = outcomes.size() == 2;
    std::string detail;
    if (ok) {
        const auto& greedy = outcomes[0];
        const auto& rpg = outcomes[1];
        ok = greedy.report.egp == 0.0 && greedy.report.gen_len_mean == 1024.0 &&
             rpg.report.egp == 1.0 && rpg.report.ccp == 1.0 && rpg.report.gen_len_mean < 1024.0;
        if (!ok) detail = "aggregate metrics out of range";
        for (size_t i = 0; ok && i < greedy.runs.size(); ++i) {
            if (!(tr_s(rpg.runs[i].statements) < tr_s(greedy.runs[i].statements))) {
                ok = false;
                detail = "structure repetition not reduced for seed index " + std::to_string(i);
            }
        }
    }
    report("trap scenario: greedy loops to budget, penalized decoder escapes with lower "
           "structure repetition",
           ok, detail);
}

// ---- criterion 7: stronger decay shortens the escape ----
void check_lambda_monotonicity() {
    const PdaConfig& cfg = rpgtest::python_pda();
    Scenario sc = make_elif_trap_scenario();
    auto rows = lambda_sweep(sc, cfg, {0.95, 0.9, 0.7, 0.5});
    bool ok = rows.size() == 4;
    std::string detail;
    for (size_t i = 1; ok && i < rows.size(); ++i)
        if (rows[i].report.gen_len_mean > rows[i - 1].report.gen_len_mean + 1e-9) {
            ok = false;
            detail = "mean length grew from lambda " + std::to_string(rows[i - 1].lambda) +
                     " to " + std::to_string(rows[i].lambda);
        }
    for (const auto& row : rows)
        if (row.report.egp != 1.0) ok = false;
    report("mean generation length is non-increasing as the decay strengthens "
           "(0.95, 0.9, 0.7, 0.5)",
           ok, detail);
}

// ---- criterion 8: metric formulas ----
void check_metric_formulas() {
    bool ok = true;
    // ten identical labels, 4-grams: 1 - 1/7
    // alternating two labels: every 4-gram is ABAB or BABA -> 1 - 2/7
    ReducedSequence rep;
    for (int i = 0; i < 10; ++i) {
        rep.labels.push_back({0, i % 2, 0});
        rep.origins.push_back({size_t(i), size_t(i)});
    }
    ok = ok && std::abs(tr_n(rep, 4) - (1.0 - 2.0 / 7.0)) < 1e-12;
    ReducedSequence uniform;
    for (int i = 0; i < 10; ++i) uniform.labels.push_back({0, 7, 0});
    ok = ok && std::abs(tr_n(uniform, 4) - 6.0 / 7.0) < 1e-12;

    std::vector<StatementInstance> sts(4);
    sts[0].rule = sts[1].rule = sts[2].rule = 1;
    sts[3].rule = 2;
    ok = ok && std::abs(tr_s(sts) - 0.5) < 1e-12;

    ok = ok && std::abs(pass_at_k(5, 2, 1) - 0.4) < 1e-12;
    ok = ok && std::abs(pass_at_k(10, 2, 3) - (1.0 - 56.0 / 120.0)) < 1e-12;
    ok = ok && pass_at_k(4, 2, 3) == 1.0;

    GenerationResult a, b;
    a.ended_with_eos = true;
    a.accepted = true;
    a.tokens = {1, 2};
    a.seconds = 0.2;
    b.ended_with_eos = false;
    b.accepted = false;
    b.tokens = {1, 2, 3, 4};
    b.seconds = 0.4;
    MetricReport r = metric_report({a, b});
    ok = ok && r.egp == 0.5 && r.ccp == 0.5 && r.gen_len_mean == 3.0 &&
         std::abs(r.wall_time_mean_seconds - 0.3) < 1e-12;
    report("metric formulas reproduce hand-computed values", ok);
}

// ---- criterion 9: penalty arithmetic ----
void check_penalty_arithmetic() {
    bool ok = std::abs(penalty_factor(3, 0.9) - 0.729) < 1e-12;
    PenaltyConfig pc;
    ScoredVocab in{{{0, 0.0}, {1, 0.6}, {2, 0.4}}, 0};
    std::mt19937_64 rng(0);
    // 0.6*0.9^3 > 0.4 keeps the extender on top; 0.6*0.9^4 < 0.4 flips it
    for (size_t c : {size_t{2}, size_t{3}})
        ok = ok && select_token(apply_penalty(in, {1}, c, pc), SelectMode::Argmax, rng) == 1;
    ok = ok && select_token(apply_penalty(in, {1}, 4, pc), SelectMode::Argmax, rng) == 2;
    // below min_count nothing changes
    ok = ok && apply_penalty(in, {1}, 1, pc).entries.at(1) == 0.6;
    report("penalty factor and argmax flip threshold match hand computation", ok);
}

// ---- criterion 10: performance envelope ----
void check_performance() {
    const PdaConfig& cfg = rpgtest::python_pda();
    Scenario sc = make_elif_trap_scenario();
    auto t0 = Clock::now();
    auto run = greedy_run(*sc.model, cfg, sc, 1024);
    double decode_s = seconds_since(t0);
    bool ok = run.tokens.size() == 1024 && decode_s < 5.0;
    std::string detail = ok ? "" : "1024-token decode took " + std::to_string(decode_s) + "s";

    // detector scaling: quadruple the input twice, expect near-linearithmic
    // growth (generous factor to stay robust on shared machines)
    std::mt19937_64 rng(8810);
    auto time_detector = [&](size_t n) {
        std::uniform_int_distribution<int> sym(0, 3);
        std::vector<int> seq(n);
        for (int& x : seq) x = sym(rng);
        auto s0 = Clock::now();
        for (int rep = 0; rep < 5; ++rep) find_consecutive_repetitions(seq);
        return seconds_since(s0);
    };
    time_detector(1024); // warm-up
    double t1 = time_detector(1024);
    double t8 = time_detector(8192);
    if (t8 > 0.000001 && t1 > 0.000001 && t8 / t1 > 64.0) {
        ok = false;
        detail = "detector grew " + std::to_string(t8 / t1) + "x from n=1024 to n=8192";
    }
    if (t8 > 2.0) {
        ok = false;
        detail = "detector took " + std::to_string(t8) + "s at n=8192";
    }
    report("full-budget decode stays under 5s and the detector scales near-linearithmically",
           ok, detail);
}

// ---- criterion 11: reference sampler identities ----
void check_sampler_identities() {
    std::mt19937_64 rng(8811);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::map<int, double> m;
        double z = 0;
        int size = 2 + trial % 9;
        for (int id = 0; id < size; ++id) z += (m[id] = u(rng));
        for (auto& [id, p] : m) p /= z;
        ScoredVocab in{m, 0};
        for (const ScoredVocab& out :
             {temperature_transform(in, 1.0), topk_filter(in, size), topp_filter(in, 1.0),
              ctrl_penalty_transform(in, {}, 2.0, 1.0)}) {
            for (const auto& [id, p] : in.entries)
                worst = std::max(worst, std::abs(out.entries.at(id) - p));
        }
    }
    report("identity parameterizations leave 100 random distributions unchanged (<1e-9)",
           worst < 1e-9, "worst deviation " + std::to_string(worst));
}

} // namespace

int main() {
    check_detector_oracle();
    check_suffix_structures();
    check_corpus();
    check_segmentation_invariance();
    check_repetition_free_equivalence();
    check_trap_separation();
    check_lambda_monotonicity();
    check_metric_formulas();
    check_penalty_arithmetic();
    check_performance();
    check_sampler_identities();
    if (failures) std::cout << failures << " criteria failed\n";
    else std::cout << "all criteria passed\n";
    return failures ? 1 : 0;
}
