#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rpg/grammar.hpp"
#include "rpg/lexer.hpp"

namespace rpg {

using SymId = int;

// Reduction label of a consumed terminal: the grammar-rule context
// [state, stack symbol] clipped at the statement level.  `rule` is the
// production providing the context, `state` the automaton state of that
// production when the element began, `sym` the right-hand-side element
// (terminal or nonterminal) the token instantiates.  Raw labels (rule -1)
// mark tokens consumed in pass-through after a parse failure.
struct ReductionLabel {
    int rule = -1;
    int state = -1;
    SymId sym = -1;

    auto operator<=>(const ReductionLabel&) const = default;
    bool is_raw() const { return rule < 0; }
};

struct ReducedSequence {
    std::vector<ReductionLabel> labels;                 // adjacent-distinct
    std::vector<std::pair<size_t, size_t>> origins;     // covered token range per label
};

// Per-production automaton over grammar symbols; nonterminal edges push.
struct RuleAutomaton {
    struct Edge {
        SymId sym;
        int target;
    };
    std::vector<std::vector<Edge>> edges; // per state, sorted by sym
    std::vector<bool> accepting;
};

struct PdaConfig {
    GrammarSpec spec;
    LexVocabulary lex_vocab;
    StatementClasses classes;

    std::vector<Symbol> symbols;      // SymId -> Symbol
    std::map<Symbol, SymId> symbol_ids;
    std::vector<int> rule_of_sym;     // SymId -> production index, -1 for terminals

    std::vector<RuleAutomaton> automata; // per production
    std::vector<std::set<SymId>> first;  // per production, terminal SymIds
    std::vector<bool> nullable;
    std::vector<bool> statement_rule;
    int start_rule = 0;
    SymId endmarker = -1;

    std::vector<std::string> diagnostics; // construction conflicts

    SymId sym_id(const Symbol& s) const {
        auto it = symbol_ids.find(s);
        return it == symbol_ids.end() ? -1 : it->second;
    }
    std::string label_display(const ReductionLabel& label) const;
};

struct PdaBuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PdaConfig build_pda(const GrammarSpec& spec);

// A statement-rule activation observed during a parse: its class, the merged
// element labels relative to that rule, and the covered token range.
struct StatementInstance {
    int rule;
    std::vector<ReductionLabel> signature;
    size_t first_token = 0;
    size_t last_token = 0;
    bool complete = false;
};

struct PdaSession {
    struct Frame {
        int rule;
        int state;
        int ret_state;        // parent state once this frame pops
        ReductionLabel entry; // edge of the parent that opened this frame
        std::vector<ReductionLabel> sig; // statement rules only
        size_t first_token = 0;
        size_t last_token = 0;
        bool touched = false;
    };

    std::vector<Frame> frames;
    std::vector<StatementInstance> statements; // completed activations
    bool frozen = false;        // pass-through after a failed transition
    bool end_consumed = false;
    size_t steps = 0;

    static PdaSession start(const PdaConfig& config);
};

struct StepOutcome {
    bool ok = false;
    ReductionLabel label; // valid when ok
};

// Applies pending pops/pushes then the unique consuming move for `terminal`.
// Returns ok=false when the terminal is grammatically impossible here (the
// session is left untouched in that case).
StepOutcome step(const PdaConfig& config, PdaSession& session, const Terminal& terminal,
                 size_t token_index);

// Exactly the terminals for which step would succeed.
std::set<SymId> candidate_terminals(const PdaConfig& config, const PdaSession& session);

bool is_accepting(const PdaConfig& config, const PdaSession& session);

// Flushes open statement frames as incomplete instances (budget exhaustion).
std::vector<StatementInstance> all_statements(const PdaConfig& config, const PdaSession& session);

// Merges runs of equal adjacent labels; idempotent.
ReducedSequence reduce_stream(const std::vector<ReductionLabel>& labels);

// Statement-class names per merged label, adjacent duplicates merged,
// module-level labels dropped.
std::vector<std::string> statement_projection(const ReducedSequence& seq, const PdaConfig& config);

// Greedy maximal-munch decomposition of a model token into terminals, each
// checked in sequence against the PDA candidate set, with backoff to shorter
// operators.  Returns nullopt when no full decomposition is acceptable.
std::optional<std::vector<Terminal>> split_token(const std::string& token_text,
                                                 const PdaConfig& config, PdaSession probe);

// Incremental builder for the merged label sequence plus an integer
// interning used by the detector.
class Reducer {
public:
    void push(const ReductionLabel& label, size_t token_index);
    const ReducedSequence& sequence() const { return seq_; }
    const std::vector<int>& ids() const { return ids_; }
    size_t size() const { return seq_.labels.size(); }

private:
    ReducedSequence seq_;
    std::vector<int> ids_;
    std::map<ReductionLabel, int> intern_;
};

} // namespace rpg
