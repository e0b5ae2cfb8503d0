#include "rpg/penalizer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rpg {

bool valid_distribution(const ScoredVocab& scores, double tolerance) {
    double sum = 0;
    for (const auto& [id, p] : scores.entries) {
        if (p < 0) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

namespace {

constexpr ReductionLabel kRawLabel{};

int argmax_token(const ScoredVocab& scores) {
    if (scores.entries.empty()) throw std::invalid_argument("empty vocabulary");
    int best = scores.entries.begin()->first;
    double best_p = scores.entries.begin()->second;
    for (const auto& [id, p] : scores.entries)
        if (p > best_p) {
            best = id;
            best_p = p;
        }
    return best;
}

} // namespace

void DecodeSession::consume(int token_id) {
    history.push_back(token_id);
    consume_text(vocab->texts[token_id]);
}

void DecodeSession::consume_text(std::string_view text) {
    std::vector<Terminal> terms;
    try {
        terms = adapter.feed_token(text);
    } catch (const LexError&) {
        pda.frozen = true;
        reducer.push(kRawLabel, terminals_seen++);
        return;
    }
    for (const Terminal& t : terms) {
        size_t idx = terminals_seen++;
        if (!pda.frozen) {
            StepOutcome out = step(*config, pda, t, idx);
            if (out.ok) {
                reducer.push(out.label, idx);
                continue;
            }
            pda.frozen = true;
        }
        reducer.push(kRawLabel, idx);
    }
}

void DecodeSession::finalize() {
    if (adapter.finished()) return;
    std::vector<Terminal> terms;
    try {
        terms = adapter.flush();
    } catch (const LexError&) {
        pda.frozen = true;
        return;
    }
    for (const Terminal& t : terms) {
        size_t idx = terminals_seen++;
        if (!pda.frozen) {
            StepOutcome out = step(*config, pda, t, idx);
            if (out.ok) {
                reducer.push(out.label, idx);
                continue;
            }
            pda.frozen = true;
        }
        reducer.push(kRawLabel, idx);
    }
}

double penalty_factor(size_t count, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in (0,1)");
    return std::pow(lambda, static_cast<double>(count));
}

std::set<int> repetition_extending_tokens(const DecodeSession& session, size_t min_count) {
    std::set<int> out;
    if (session.pda.frozen) return out;
    const std::vector<int>& ids = session.reducer.ids();
    auto tr = trailing_repetition(ids, min_count);
    if (!tr) return out;
    const auto& labels = session.reducer.sequence().labels;
    ReductionLabel expected = labels[labels.size() - tr->period];
    ReductionLabel last = labels.back();

    for (int id = 0; id < session.vocab->size(); ++id) {
        if (id == session.vocab->eos_id) continue;
        const std::string& text = session.vocab->texts[id];
        TokenAdapter adapter = session.adapter;
        std::vector<Terminal> terms;
        try {
            terms = adapter.feed_token(text);
        } catch (const LexError&) {
            continue;
        }
        auto tail = adapter.pending_preview();
        terms.insert(terms.end(), tail.begin(), tail.end());
        PdaSession probe = session.pda;
        for (const Terminal& t : terms) {
            StepOutcome o = step(*session.config, probe, t, probe.steps);
            if (!o.ok) break;
            if (o.label == last) continue;
            if (o.label == expected) out.insert(id);
            break; // first fresh label decides
        }
    }
    return out;
}

ScoredVocab apply_penalty(const ScoredVocab& scores, const std::set<int>& extending, size_t count,
                          const PenaltyConfig& config) {
    ScoredVocab out = scores;
    if (count >= config.min_count) {
        double factor = penalty_factor(count, config.lambda);
        for (int id : extending) {
            if (config.eos_exempt && id == out.eos_id) continue;
            auto it = out.entries.find(id);
            if (it != out.entries.end()) it->second *= factor;
        }
    }
    if (config.mode == SelectMode::Sample) {
        double sum = 0;
        for (const auto& [id, p] : out.entries) sum += p;
        if (sum > 0)
            for (auto& [id, p] : out.entries) p /= sum;
    }
    return out;
}

Adjustment adjust_scores(const DecodeSession& session, const ScoredVocab& scores,
                         const PenaltyConfig& config) {
    std::set<int> extending = repetition_extending_tokens(session, config.min_count);
    size_t count = 0;
    if (auto tr = trailing_repetition(session.reducer.ids(), config.min_count)) count = tr->count;
    Adjustment adj;
    adj.scores = apply_penalty(scores, extending, count, config);
    adj.trace.count = count;
    adj.trace.pn = count >= config.min_count ? penalty_factor(count, config.lambda) : 1.0;
    adj.trace.flipped = argmax_token(adj.scores) != argmax_token(scores);
    return adj;
}

int select_token(const ScoredVocab& scores, SelectMode mode, std::mt19937_64& rng) {
    if (scores.entries.empty()) throw std::invalid_argument("empty vocabulary");
    if (mode == SelectMode::Argmax) return argmax_token(scores);
    double sum = 0;
    for (const auto& [id, p] : scores.entries) sum += p;
    std::uniform_real_distribution<double> u(0.0, sum);
    double x = u(rng);
    int last = scores.entries.rbegin()->first;
    for (const auto& [id, p] : scores.entries) {
        if (x < p) return id;
        x -= p;
    }
    return last;
}

namespace {

GenerationResult run_loop(Model& model, const PdaConfig& config, const TokenVocab& vocab,
                          const std::vector<int>& prompt, size_t budget,
                          const std::function<int(const DecodeSession&, const ScoredVocab&,
                                                  PenaltyTrace&)>& choose) {
    DecodeSession ds(config, vocab, budget);
    for (int id : prompt) ds.consume(id);

    GenerationResult res;
    auto t0 = std::chrono::steady_clock::now();
    while (res.tokens.size() < budget) {
        ScoredVocab scores = model.score(ds.history);
        PenaltyTrace trace;
        int tok = choose(ds, scores, trace);
        res.trace.push_back(trace);
        res.tokens.push_back(tok);
        if (tok == vocab.eos_id) {
            ds.history.push_back(tok);
            res.ended_with_eos = true;
            break;
        }
        ds.consume(tok);
        res.text += vocab.texts[tok];
    }
    ds.finalize();
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.accepted = is_accepting(config, ds.pda);
    res.merged = ds.reducer.sequence();
    res.statements = all_statements(config, ds.pda);
    return res;
}

} // namespace

GenerationResult decode(Model& model, const PdaConfig& config, const TokenVocab& vocab,
                        const std::vector<int>& prompt, const PenaltyConfig& penalty,
                        size_t budget) {
    std::mt19937_64 rng(penalty.seed);
    return run_loop(model, config, vocab, prompt, budget,
                    [&](const DecodeSession& ds, const ScoredVocab& scores, PenaltyTrace& trace) {
                        Adjustment adj = adjust_scores(ds, scores, penalty);
                        trace = adj.trace;
                        return select_token(adj.scores, penalty.mode, rng);
                    });
}

GenerationResult decode_with(Model& model, const PdaConfig& config, const TokenVocab& vocab,
                             const std::vector<int>& prompt, size_t budget,
                             const ChooseFn& choose) {
    return run_loop(model, config, vocab, prompt, budget,
                    [&](const DecodeSession& ds, const ScoredVocab& scores, PenaltyTrace&) {
                        return choose(ds, scores);
                    });
}

} // namespace rpg
