#include "rpg/pda.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace rpg {

namespace {

// Epsilon NFA built structurally from a rule expression.
struct Nfa {
    struct Edge {
        int from;
        SymId sym;
        int to;
    };
    std::vector<Edge> edges;
    std::vector<std::vector<int>> eps;
    int n = 0;

    int state() {
        eps.emplace_back();
        return n++;
    }
    void add_eps(int a, int b) { eps[a].push_back(b); }
    void add_edge(int a, SymId s, int b) { edges.push_back({a, s, b}); }
};

struct Builder {
    const GrammarSpec& spec;
    PdaConfig& cfg;

    SymId intern(const Symbol& s) {
        auto it = cfg.symbol_ids.find(s);
        if (it != cfg.symbol_ids.end()) return it->second;
        SymId id = static_cast<SymId>(cfg.symbols.size());
        cfg.symbols.push_back(s);
        cfg.symbol_ids.emplace(s, id);
        cfg.rule_of_sym.push_back(-1);
        return id;
    }

    bool expr_nullable(const Expr& e, const std::set<std::string>& nullable_rules) const {
        switch (e.kind) {
            case Expr::Kind::Sym:
                return e.sym.kind == SymbolKind::Nonterminal && nullable_rules.count(e.sym.text);
            case Expr::Kind::Seq:
                return std::all_of(e.children.begin(), e.children.end(), [&](const Expr& c) {
                    return expr_nullable(c, nullable_rules);
                });
            case Expr::Kind::Alt:
                return std::any_of(e.children.begin(), e.children.end(), [&](const Expr& c) {
                    return expr_nullable(c, nullable_rules);
                });
            case Expr::Kind::Opt:
            case Expr::Kind::Star:
                return true;
            case Expr::Kind::Plus:
                return expr_nullable(e.children.front(), nullable_rules);
        }
        return false;
    }

    // start/end pair of the fragment recognizing `e`.
    std::pair<int, int> build_fragment(Nfa& nfa, const Expr& e,
                                       const std::set<std::string>& nullable_rules) {
        switch (e.kind) {
            case Expr::Kind::Sym: {
                int s = nfa.state();
                int t = nfa.state();
                nfa.add_edge(s, intern(e.sym), t);
                if (e.sym.kind == SymbolKind::Nonterminal && nullable_rules.count(e.sym.text))
                    nfa.add_eps(s, t);
                return {s, t};
            }
            case Expr::Kind::Seq: {
                auto [s, t] = build_fragment(nfa, e.children.front(), nullable_rules);
                for (size_t i = 1; i < e.children.size(); ++i) {
                    auto [cs, ct] = build_fragment(nfa, e.children[i], nullable_rules);
                    nfa.add_eps(t, cs);
                    t = ct;
                }
                return {s, t};
            }
            case Expr::Kind::Alt: {
                int s = nfa.state();
                int t = nfa.state();
                for (const Expr& c : e.children) {
                    auto [cs, ct] = build_fragment(nfa, c, nullable_rules);
                    nfa.add_eps(s, cs);
                    nfa.add_eps(ct, t);
                }
                return {s, t};
            }
            case Expr::Kind::Opt:
            case Expr::Kind::Star:
            case Expr::Kind::Plus: {
                int s = nfa.state();
                int t = nfa.state();
                auto [cs, ct] = build_fragment(nfa, e.children.front(), nullable_rules);
                nfa.add_eps(s, cs);
                nfa.add_eps(ct, t);
                if (e.kind != Expr::Kind::Plus) nfa.add_eps(s, t);
                if (e.kind != Expr::Kind::Opt) nfa.add_eps(ct, cs);
                return {s, t};
            }
        }
        throw PdaBuildError("unhandled expression kind");
    }

    RuleAutomaton determinize(const Nfa& nfa, int start, int accept) {
        auto closure = [&](std::set<int> states) {
            std::vector<int> work(states.begin(), states.end());
            while (!work.empty()) {
                int s = work.back();
                work.pop_back();
                for (int t : nfa.eps[s])
                    if (states.insert(t).second) work.push_back(t);
            }
            return states;
        };

        RuleAutomaton dfa;
        std::map<std::set<int>, int> index;
        std::vector<std::set<int>> subsets;
        auto id_of = [&](std::set<int> subset) {
            auto [it, fresh] = index.emplace(std::move(subset), static_cast<int>(subsets.size()));
            if (fresh) {
                subsets.push_back(it->first);
                dfa.edges.emplace_back();
                dfa.accepting.push_back(it->first.count(accept) != 0);
            }
            return it->second;
        };

        id_of(closure({start}));
        for (size_t i = 0; i < subsets.size(); ++i) {
            std::map<SymId, std::set<int>> moves;
            for (const Nfa::Edge& e : nfa.edges)
                if (subsets[i].count(e.from)) moves[e.sym].insert(e.to);
            for (auto& [sym, targets] : moves) {
                int t = id_of(closure(std::move(targets)));
                dfa.edges[i].push_back({sym, t});
            }
        }
        return minimize(dfa);
    }

    // Moore partition refinement.  Equivalent states must coincide so that
    // the context label of a repeated element is identical on every pass
    // through a loop.
    static RuleAutomaton minimize(const RuleAutomaton& dfa) {
        size_t n = dfa.edges.size();
        std::vector<int> cls(n);
        for (size_t i = 0; i < n; ++i) cls[i] = dfa.accepting[i] ? 1 : 0;
        for (bool changed = true; changed;) {
            changed = false;
            std::map<std::pair<int, std::vector<std::pair<SymId, int>>>, int> sig_ids;
            std::vector<int> next(n);
            for (size_t i = 0; i < n; ++i) {
                std::vector<std::pair<SymId, int>> sig;
                for (const auto& e : dfa.edges[i]) sig.emplace_back(e.sym, cls[e.target]);
                auto [it, fresh] =
                    sig_ids.emplace(std::make_pair(cls[i], std::move(sig)),
                                    static_cast<int>(sig_ids.size()));
                next[i] = it->second;
            }
            if (next != cls) {
                cls = std::move(next);
                changed = true;
            }
        }
        // Renumber classes so the start state is 0, then by first appearance.
        std::map<int, int> renum;
        auto id = [&](int c) {
            auto [it, fresh] = renum.emplace(c, static_cast<int>(renum.size()));
            return it->second;
        };
        id(cls[0]);
        RuleAutomaton out;
        out.edges.resize(0);
        std::vector<int> rep; // representative original state per class, in order
        for (size_t i = 0; i < n; ++i) {
            int c = id(cls[i]);
            if (c == static_cast<int>(rep.size())) rep.push_back(static_cast<int>(i));
        }
        out.edges.resize(rep.size());
        out.accepting.resize(rep.size());
        for (size_t c = 0; c < rep.size(); ++c) {
            int i = rep[c];
            out.accepting[c] = dfa.accepting[i];
            for (const auto& e : dfa.edges[i]) out.edges[c].push_back({e.sym, id(cls[e.target])});
        }
        return out;
    }
};

const RuleAutomaton::Edge* terminal_edge(const PdaConfig& cfg, int rule, int state, SymId t) {
    for (const auto& e : cfg.automata[rule].edges[state])
        if (e.sym == t) return cfg.rule_of_sym[e.sym] < 0 ? &e : nullptr;
    return nullptr;
}

const RuleAutomaton::Edge* descend_edge(const PdaConfig& cfg, int rule, int state, SymId t) {
    for (const auto& e : cfg.automata[rule].edges[state]) {
        int sub = cfg.rule_of_sym[e.sym];
        if (sub >= 0 && cfg.first[sub].count(t)) return &e;
    }
    return nullptr;
}

// Index of the frame (after virtual pops) able to act on `t`, or -1.
int resolve_frame(const PdaConfig& cfg, const PdaSession& s, SymId t) {
    int fi = static_cast<int>(s.frames.size()) - 1;
    int state = s.frames[fi].state;
    while (fi >= 0) {
        int rule = s.frames[fi].rule;
        if (terminal_edge(cfg, rule, state, t) || descend_edge(cfg, rule, state, t)) return fi;
        if (fi > 0 && cfg.automata[rule].accepting[state]) {
            state = s.frames[fi].ret_state;
            --fi;
            continue;
        }
        return -1;
    }
    return -1;
}

void finalize_top(const PdaConfig& cfg, PdaSession& s, bool complete) {
    PdaSession::Frame& f = s.frames.back();
    if (cfg.statement_rule[f.rule] && f.touched)
        s.statements.push_back({f.rule, f.sig, f.first_token, f.last_token, complete});
}

} // namespace

PdaConfig build_pda(const GrammarSpec& spec) {
    PdaConfig cfg;
    cfg.spec = spec;
    cfg.lex_vocab = LexVocabulary::from_grammar(spec);
    try {
        cfg.classes = statement_classes(spec);
    } catch (const GrammarError&) {
        // Grammars without the statement hub rules still parse and reduce;
        // labels then clip at the start rule and no statement instances are
        // recorded.
        cfg.classes = {};
    }

    Builder b{spec, cfg};

    for (const Production& p : spec.productions) {
        SymId id = b.intern({SymbolKind::Nonterminal, p.lhs});
        cfg.rule_of_sym[id] = static_cast<int>(&p - spec.productions.data());
    }
    auto start_it = spec.rule_index.find(spec.start);
    if (start_it == spec.rule_index.end())
        throw PdaBuildError("start rule not defined: " + spec.start);
    cfg.start_rule = start_it->second;

    // Rule nullability, to fixpoint.
    std::set<std::string> nullable_rules;
    for (bool changed = true; changed;) {
        changed = false;
        for (const Production& p : spec.productions)
            if (!nullable_rules.count(p.lhs) && b.expr_nullable(p.rhs, nullable_rules)) {
                nullable_rules.insert(p.lhs);
                changed = true;
            }
    }
    cfg.nullable.resize(spec.productions.size());
    for (size_t i = 0; i < spec.productions.size(); ++i)
        cfg.nullable[i] = nullable_rules.count(spec.productions[i].lhs) != 0;

    for (const Production& p : spec.productions) {
        Nfa nfa;
        auto [s, t] = b.build_fragment(nfa, p.rhs, nullable_rules);
        cfg.automata.push_back(b.determinize(nfa, s, t));
    }
    cfg.endmarker = cfg.sym_id({SymbolKind::TerminalClass, "ENDMARKER"});

    // FIRST sets from start-state edges, to fixpoint.
    cfg.first.assign(spec.productions.size(), {});
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t r = 0; r < spec.productions.size(); ++r) {
            size_t before = cfg.first[r].size();
            for (const auto& e : cfg.automata[r].edges[0]) {
                int sub = cfg.rule_of_sym[e.sym];
                if (sub < 0) cfg.first[r].insert(e.sym);
                else cfg.first[r].insert(cfg.first[sub].begin(), cfg.first[sub].end());
            }
            if (cfg.first[r].size() != before) changed = true;
        }
    }

    cfg.statement_rule.resize(spec.productions.size());
    for (size_t r = 0; r < spec.productions.size(); ++r)
        cfg.statement_rule[r] = cfg.classes.contains(spec.productions[r].lhs);

    // Flag states where one lookahead terminal fits several moves; the runtime
    // then prefers direct consumption, else the lowest-numbered sub-rule edge.
    for (size_t r = 0; r < spec.productions.size(); ++r) {
        const RuleAutomaton& a = cfg.automata[r];
        for (size_t st = 0; st < a.edges.size(); ++st) {
            std::map<SymId, int> hits;
            for (const auto& e : a.edges[st]) {
                int sub = cfg.rule_of_sym[e.sym];
                if (sub < 0) ++hits[e.sym];
                else
                    for (SymId t : cfg.first[sub]) ++hits[t];
            }
            for (auto& [t, n] : hits)
                if (n > 1)
                    cfg.diagnostics.push_back("rule " + spec.productions[r].lhs + " state " +
                                              std::to_string(st) + ": lookahead " +
                                              symbol_display(cfg.symbols[t]) +
                                              " matches multiple alternatives");
        }
    }
    return cfg;
}

std::string PdaConfig::label_display(const ReductionLabel& label) const {
    if (label.is_raw()) return "<raw>";
    return symbol_display(symbols[label.sym]);
}

PdaSession PdaSession::start(const PdaConfig& config) {
    PdaSession s;
    s.frames.push_back({config.start_rule, 0, 0, {}, {}, 0, 0, false});
    return s;
}

StepOutcome step(const PdaConfig& cfg, PdaSession& s, const Terminal& terminal,
                 size_t token_index) {
    if (s.frozen || s.frames.empty()) return {};
    SymId t = cfg.sym_id(terminal.symbol);
    if (t < 0) return {};
    int fi = resolve_frame(cfg, s, t);
    if (fi < 0) return {};

    while (static_cast<int>(s.frames.size()) - 1 > fi) {
        finalize_top(cfg, s, true);
        int ret = s.frames.back().ret_state;
        s.frames.pop_back();
        s.frames.back().state = ret;
    }

    int guard = 0;
    while (true) {
        PdaSession::Frame& f = s.frames.back();
        if (const auto* e = terminal_edge(cfg, f.rule, f.state, t)) {
            // Label clipped at the outermost statement-rule frame.
            size_t clip = 0;
            for (size_t i = 0; i < s.frames.size(); ++i)
                if (cfg.statement_rule[s.frames[i].rule]) {
                    clip = i;
                    break;
                }
            ReductionLabel label = clip + 1 < s.frames.size()
                                       ? s.frames[clip + 1].entry
                                       : ReductionLabel{s.frames[clip].rule, s.frames[clip].state, t};
            for (size_t i = 0; i < s.frames.size(); ++i) {
                PdaSession::Frame& g = s.frames[i];
                if (!cfg.statement_rule[g.rule]) continue;
                ReductionLabel elem = i + 1 < s.frames.size()
                                          ? s.frames[i + 1].entry
                                          : ReductionLabel{g.rule, g.state, t};
                if (g.sig.empty() || !(g.sig.back() == elem)) g.sig.push_back(elem);
                if (!g.touched) {
                    g.first_token = token_index;
                    g.touched = true;
                }
                g.last_token = token_index;
            }
            f.state = e->target;
            ++s.steps;
            if (t == cfg.endmarker) s.end_consumed = true;
            return {true, label};
        }
        const auto* d = descend_edge(cfg, f.rule, f.state, t);
        if (!d || ++guard > 512) {
            s.frozen = true; // resolve_frame promised a move; should not happen
            return {};
        }
        int sub = cfg.rule_of_sym[d->sym];
        ReductionLabel entry{f.rule, f.state, d->sym};
        int ret = d->target;
        s.frames.push_back({sub, 0, ret, entry, {}, 0, 0, false});
    }
}

std::set<SymId> candidate_terminals(const PdaConfig& cfg, const PdaSession& s) {
    std::set<SymId> out;
    if (s.frozen || s.frames.empty()) return out;
    int fi = static_cast<int>(s.frames.size()) - 1;
    int state = s.frames[fi].state;
    while (fi >= 0) {
        int rule = s.frames[fi].rule;
        for (const auto& e : cfg.automata[rule].edges[state]) {
            int sub = cfg.rule_of_sym[e.sym];
            if (sub < 0) out.insert(e.sym);
            else out.insert(cfg.first[sub].begin(), cfg.first[sub].end());
        }
        if (fi > 0 && cfg.automata[rule].accepting[state]) {
            state = s.frames[fi].ret_state;
            --fi;
        } else {
            break;
        }
    }
    return out;
}

bool is_accepting(const PdaConfig& cfg, const PdaSession& s) {
    if (s.frozen || s.frames.empty()) return false;
    PdaSession probe = s;
    if (!probe.end_consumed && cfg.endmarker >= 0) {
        Terminal end{{SymbolKind::TerminalClass, "ENDMARKER"}, "", 0, 0};
        if (!step(cfg, probe, end, probe.steps).ok) return false;
    }
    int state = probe.frames.back().state;
    for (int i = static_cast<int>(probe.frames.size()) - 1; i >= 0; --i) {
        if (!cfg.automata[probe.frames[i].rule].accepting[state]) return false;
        state = probe.frames[i].ret_state;
    }
    return true;
}

std::vector<StatementInstance> all_statements(const PdaConfig& cfg, const PdaSession& s) {
    std::vector<StatementInstance> out = s.statements;
    for (const auto& f : s.frames)
        if (cfg.statement_rule[f.rule] && f.touched)
            out.push_back({f.rule, f.sig, f.first_token, f.last_token, false});
    return out;
}

void Reducer::push(const ReductionLabel& label, size_t token_index) {
    if (!seq_.labels.empty() && seq_.labels.back() == label) {
        seq_.origins.back().second = token_index;
        return;
    }
    seq_.labels.push_back(label);
    seq_.origins.emplace_back(token_index, token_index);
    auto [it, fresh] = intern_.emplace(label, static_cast<int>(intern_.size()));
    ids_.push_back(it->second);
}

ReducedSequence reduce_stream(const std::vector<ReductionLabel>& labels) {
    Reducer r;
    for (size_t i = 0; i < labels.size(); ++i) r.push(labels[i], i);
    return r.sequence();
}

std::vector<std::string> statement_projection(const ReducedSequence& seq, const PdaConfig& cfg) {
    std::vector<std::string> mapped;
    for (const ReductionLabel& l : seq.labels) {
        std::string name;
        if (!l.is_raw() && cfg.statement_rule[l.rule]) name = cfg.spec.productions[l.rule].lhs;
        if (mapped.empty() || mapped.back() != name) mapped.push_back(name);
    }
    std::vector<std::string> out;
    for (std::string& m : mapped)
        if (!m.empty()) out.push_back(std::move(m));
    return out;
}

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::optional<std::vector<Terminal>> split_rec(const std::string& text, size_t p,
                                               const PdaConfig& cfg, const PdaSession& s) {
    while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
    if (p >= text.size()) return std::vector<Terminal>{};

    auto attempt = [&](Terminal term, size_t next) -> std::optional<std::vector<Terminal>> {
        PdaSession trial = s;
        if (!step(cfg, trial, term, trial.steps).ok) return std::nullopt;
        auto rest = split_rec(text, next, cfg, trial);
        if (!rest) return std::nullopt;
        rest->insert(rest->begin(), std::move(term));
        return rest;
    };

    char c = text[p];
    if (c == '\n') return attempt({{SymbolKind::TerminalClass, "NEWLINE"}, "\n", p, p + 1}, p + 1);
    if (ident_start(c)) {
        size_t j = p;
        while (j < text.size() && ident_char(text[j])) ++j;
        std::string word = text.substr(p, j - p);
        Symbol sym;
        if (cfg.lex_vocab.keywords.count(word)) sym = {SymbolKind::Keyword, word};
        else if (word == "async") sym = {SymbolKind::TerminalClass, "ASYNC"};
        else if (word == "await") sym = {SymbolKind::TerminalClass, "AWAIT"};
        else sym = {SymbolKind::TerminalClass, "NAME"};
        return attempt({std::move(sym), word, p, j}, j);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && p + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[p + 1])))) {
        size_t j = p + 1;
        while (j < text.size() && (ident_char(text[j]) || text[j] == '.')) ++j;
        return attempt({{SymbolKind::TerminalClass, "NUMBER"}, text.substr(p, j - p), p, j}, j);
    }
    if (c == '\'' || c == '"') {
        char q = c;
        size_t j = p + 1;
        while (j < text.size() && text[j] != q) {
            if (text[j] == '\\') ++j;
            ++j;
        }
        if (j >= text.size()) return std::nullopt;
        ++j;
        return attempt({{SymbolKind::TerminalClass, "STRING"}, text.substr(p, j - p), p, j}, j);
    }
    // Operators: longest match first, backing off to shorter ones.
    size_t avail = text.size() - p;
    for (size_t len = std::min(avail, cfg.lex_vocab.max_operator_len); len > 0; --len) {
        std::string op = text.substr(p, len);
        if (!cfg.lex_vocab.operators.count(op)) continue;
        if (auto r = attempt({{SymbolKind::Operator, op}, op, p, p + len}, p + len)) return r;
    }
    return std::nullopt;
}

} // namespace

std::optional<std::vector<Terminal>> split_token(const std::string& token_text,
                                                 const PdaConfig& cfg, PdaSession probe) {
    return split_rec(token_text, 0, cfg, probe);
}

} // namespace rpg
