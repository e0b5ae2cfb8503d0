#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rpg/detector.hpp"
#include "rpg/lexer.hpp"
#include "rpg/pda.hpp"

namespace rpg {

// Model-token table shared by the engine and the mock models.
struct TokenVocab {
    std::vector<std::string> texts; // token-id -> text
    int eos_id = 0;

    int size() const { return static_cast<int>(texts.size()); }
};

// Sparse next-token distribution.
struct ScoredVocab {
    std::map<int, double> entries; // token-id -> probability
    int eos_id = 0;
};

bool valid_distribution(const ScoredVocab& scores, double tolerance = 1e-6);

// Stateless-per-call model: full history in, distribution out.
class Model {
public:
    virtual ~Model() = default;
    virtual ScoredVocab score(const std::vector<int>& history) = 0;
};

enum class SelectMode { Argmax, Sample };

struct PenaltyConfig {
    double lambda = 0.9;    // decay factor, in (0,1)
    size_t min_count = 2;   // repetitions needed before any penalty applies
    SelectMode mode = SelectMode::Argmax;
    bool eos_exempt = true;
    uint64_t seed = 0;      // sample mode only
};

struct PenaltyTrace {
    size_t count = 0;    // trailing-repetition count at this step
    double pn = 1.0;     // applied factor
    bool flipped = false; // penalty changed the argmax
};

struct GenerationResult {
    std::vector<int> tokens; // generated ids (prompt excluded), eos included
    std::string text;        // concatenation of generated token texts
    bool ended_with_eos = false;
    bool accepted = false;   // grammar acceptance of prompt + generation
    ReducedSequence merged;  // merged label sequence over the full stream
    std::vector<StatementInstance> statements;
    std::vector<PenaltyTrace> trace; // one entry per generated token
    double seconds = 0.0;            // wall time of the decode loop
};

// Live decoding state: lexer adapter + parser session + merged labels.
struct DecodeSession {
    const PdaConfig* config = nullptr;
    const TokenVocab* vocab = nullptr;
    TokenAdapter adapter;
    PdaSession pda;
    Reducer reducer;
    std::vector<int> history; // prompt + generated token ids
    size_t budget = 1024;     // max generated tokens
    size_t terminals_seen = 0;

    DecodeSession(const PdaConfig& cfg, const TokenVocab& v, size_t budget_)
        : config(&cfg), vocab(&v), adapter(cfg.lex_vocab), pda(PdaSession::start(cfg)),
          budget(budget_) {}

    // Feeds one token's text through the adapter and parser, recording labels;
    // a grammatically impossible terminal freezes the parser and the token
    // (and everything after it) reduces to the raw label.
    void consume(int token_id);
    void consume_text(std::string_view text);
    // End of stream: flush the adapter and consume the synthesized tail.
    void finalize();
};

double penalty_factor(size_t count, double lambda);

// Token ids whose next merged label would continue the trailing repetition's
// periodic extension.  Empty when there is no trailing repetition of at least
// min_count occurrences.
std::set<int> repetition_extending_tokens(const DecodeSession& session, size_t min_count);

struct Adjustment {
    ScoredVocab scores;
    PenaltyTrace trace;
};

Adjustment adjust_scores(const DecodeSession& session, const ScoredVocab& scores,
                         const PenaltyConfig& config);

// Core of adjust_scores, unit-testable without a live session: multiplies the
// given entries by lambda^count when count >= min_count.
ScoredVocab apply_penalty(const ScoredVocab& scores, const std::set<int>& extending, size_t count,
                          const PenaltyConfig& config);

int select_token(const ScoredVocab& scores, SelectMode mode, std::mt19937_64& rng);

GenerationResult decode(Model& model, const PdaConfig& config, const TokenVocab& vocab,
                        const std::vector<int>& prompt, const PenaltyConfig& penalty,
                        size_t budget);

// Shared loop for the reference samplers: `choose` maps the raw distribution
// to the emitted token.
using ChooseFn = std::function<int(const DecodeSession&, const ScoredVocab&)>;
GenerationResult decode_with(Model& model, const PdaConfig& config, const TokenVocab& vocab,
                             const std::vector<int>& prompt, size_t budget, const ChooseFn& choose);

} // namespace rpg
