#include "rpg/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace rpg {

namespace {

const std::set<std::string>& terminal_class_names() {
    static const std::set<std::string> names = {
        "NAME",   "NUMBER", "STRING",    "NEWLINE",      "INDENT",
        "DEDENT", "ENDMARKER", "TYPE_COMMENT", "ASYNC", "AWAIT",
    };
    return names;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct RuleToken {
    enum class Kind { Name, Literal, Colon, Pipe, LBracket, RBracket, LParen, RParen, Star, Plus };
    Kind kind;
    std::string text;
    int line;
    int column;
};

// One logical rule: header line plus continuations, with comments stripped.
struct RawRule {
    std::vector<RuleToken> tokens;
    int line = 0;
};

std::vector<RawRule> split_rules(const std::string& source) {
    std::vector<RawRule> rules;
    int depth = 0;
    int line_no = 0;
    std::istringstream in(source);
    std::string line;
    auto tokenize_line = [&](const std::string& text, RawRule& rule) {
        size_t i = 0;
        while (i < text.size()) {
            char c = text[i];
            int col = static_cast<int>(i) + 1;
            if (c == '#') break;
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (is_ident_start(c)) {
                size_t j = i;
                while (j < text.size() && is_ident_char(text[j])) ++j;
                rule.tokens.push_back({RuleToken::Kind::Name, text.substr(i, j - i), line_no, col});
                i = j;
                continue;
            }
            if (c == '\'' || c == '"') {
                size_t j = i + 1;
                while (j < text.size() && text[j] != c) ++j;
                if (j >= text.size())
                    throw GrammarError("unterminated literal", line_no, col);
                rule.tokens.push_back(
                    {RuleToken::Kind::Literal, text.substr(i + 1, j - i - 1), line_no, col});
                i = j + 1;
                continue;
            }
            RuleToken::Kind kind;
            switch (c) {
                case ':': kind = RuleToken::Kind::Colon; break;
                case '|': kind = RuleToken::Kind::Pipe; break;
                case '[': kind = RuleToken::Kind::LBracket; ++depth; break;
                case ']': kind = RuleToken::Kind::RBracket; --depth; break;
                case '(': kind = RuleToken::Kind::LParen; ++depth; break;
                case ')': kind = RuleToken::Kind::RParen; --depth; break;
                case '*': kind = RuleToken::Kind::Star; break;
                case '+': kind = RuleToken::Kind::Plus; break;
                default:
                    throw GrammarError(std::string("unexpected character '") + c + "'", line_no,
                                       col);
            }
            if (depth < 0) throw GrammarError("unbalanced brackets", line_no, col);
            rule.tokens.push_back({kind, std::string(1, c), line_no, col});
            ++i;
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // A fresh rule starts at depth 0 on an unindented `name:` line.
        bool starts_rule = false;
        if (depth == 0 && !line.empty() && is_ident_start(line[0])) {
            size_t j = 0;
            while (j < line.size() && is_ident_char(line[j])) ++j;
            while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
            starts_rule = j < line.size() && line[j] == ':';
        }
        if (starts_rule) {
            rules.emplace_back();
            rules.back().line = line_no;
        } else {
            // Skip blank and comment-only text outside any rule.
            std::string stripped = line.substr(0, line.find('#'));
            bool blank = stripped.find_first_not_of(" \t") == std::string::npos;
            if (rules.empty() || (depth == 0 && blank)) {
                if (!blank && rules.empty())
                    throw GrammarError("expected `name:` rule header", line_no, 1);
                continue;
            }
            if (depth == 0 && line[0] != ' ' && line[0] != '\t' && line[0] != '|')
                throw GrammarError("expected `name:` rule header or continuation", line_no, 1);
        }
        tokenize_line(line, rules.back());
    }
    if (depth != 0 && !rules.empty())
        throw GrammarError("unbalanced brackets", rules.back().line, 1);
    return rules;
}

class RuleParser {
public:
    explicit RuleParser(const std::vector<RuleToken>& tokens) : tokens_(tokens) {}

    // expression after the `name:` header
    Expr parse_rhs() {
        Expr e = parse_alt();
        if (pos_ != tokens_.size()) fail("trailing tokens in rule");
        return e;
    }

    std::string parse_header() {
        if (!check(RuleToken::Kind::Name)) fail("expected rule name");
        std::string name = tokens_[pos_++].text;
        if (!check(RuleToken::Kind::Colon)) fail("expected ':' after rule name");
        ++pos_;
        return name;
    }

private:
    Expr parse_alt() {
        std::vector<Expr> branches;
        branches.push_back(parse_seq());
        while (check(RuleToken::Kind::Pipe)) {
            ++pos_;
            branches.push_back(parse_seq());
        }
        if (branches.size() == 1) return std::move(branches.front());
        // normalize `a | (b | c)` to `a | b | c`: serialization prints
        // alternation flat, so nested groups must not survive parsing
        std::vector<Expr> flat;
        for (Expr& b : branches) {
            if (b.kind == Expr::Kind::Alt)
                for (Expr& c : b.children) flat.push_back(std::move(c));
            else
                flat.push_back(std::move(b));
        }
        return Expr::node(Expr::Kind::Alt, std::move(flat));
    }

    Expr parse_seq() {
        std::vector<Expr> items;
        while (pos_ < tokens_.size()) {
            auto k = tokens_[pos_].kind;
            if (k == RuleToken::Kind::Pipe || k == RuleToken::Kind::RBracket ||
                k == RuleToken::Kind::RParen)
                break;
            items.push_back(parse_item());
        }
        if (items.empty()) fail("empty alternative");
        if (items.size() == 1) return std::move(items.front());
        return Expr::node(Expr::Kind::Seq, std::move(items));
    }

    Expr parse_item() {
        Expr e = parse_atom();
        while (check(RuleToken::Kind::Star) || check(RuleToken::Kind::Plus)) {
            auto k = tokens_[pos_].kind == RuleToken::Kind::Star ? Expr::Kind::Star
                                                                 : Expr::Kind::Plus;
            ++pos_;
            e = Expr::node(k, {std::move(e)});
        }
        return e;
    }

    Expr parse_atom() {
        if (pos_ >= tokens_.size()) fail("unexpected end of rule");
        const RuleToken& t = tokens_[pos_];
        switch (t.kind) {
            case RuleToken::Kind::Name: {
                ++pos_;
                Symbol s;
                if (is_terminal_class_name(t.text)) {
                    s.kind = SymbolKind::TerminalClass;
                } else {
                    s.kind = SymbolKind::Nonterminal;
                }
                s.text = t.text;
                return Expr::symbol(std::move(s));
            }
            case RuleToken::Kind::Literal: {
                ++pos_;
                if (t.text.empty()) throw GrammarError("empty literal", t.line, t.column);
                Symbol s;
                s.kind = is_ident_start(t.text[0]) ? SymbolKind::Keyword : SymbolKind::Operator;
                s.text = t.text;
                return Expr::symbol(std::move(s));
            }
            case RuleToken::Kind::LBracket: {
                ++pos_;
                Expr inner = parse_alt();
                expect(RuleToken::Kind::RBracket, "']'");
                return Expr::node(Expr::Kind::Opt, {std::move(inner)});
            }
            case RuleToken::Kind::LParen: {
                ++pos_;
                Expr inner = parse_alt();
                expect(RuleToken::Kind::RParen, "')'");
                return inner;
            }
            default:
                fail("unexpected token '" + t.text + "'");
        }
        return {}; // unreachable
    }

    bool check(RuleToken::Kind k) const { return pos_ < tokens_.size() && tokens_[pos_].kind == k; }

    void expect(RuleToken::Kind k, const char* what) {
        if (!check(k)) fail(std::string("expected ") + what);
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        if (pos_ < tokens_.size())
            throw GrammarError(msg, tokens_[pos_].line, tokens_[pos_].column);
        const RuleToken& last = tokens_.back();
        throw GrammarError(msg, last.line, last.column + static_cast<int>(last.text.size()));
    }

    const std::vector<RuleToken>& tokens_;
    size_t pos_ = 0;
};

void collect_symbols(const Expr& e, std::set<Symbol>& terminals, std::set<std::string>& refs) {
    if (e.kind == Expr::Kind::Sym) {
        if (e.sym.kind == SymbolKind::Nonterminal)
            refs.insert(e.sym.text);
        else
            terminals.insert(e.sym);
        return;
    }
    for (const Expr& c : e.children) collect_symbols(c, terminals, refs);
}

void serialize_expr(const Expr& e, std::ostream& out, bool top) {
    switch (e.kind) {
        case Expr::Kind::Sym:
            if (e.sym.kind == SymbolKind::Keyword || e.sym.kind == SymbolKind::Operator)
                out << '\'' << e.sym.text << '\'';
            else
                out << e.sym.text;
            break;
        case Expr::Kind::Seq:
            for (size_t i = 0; i < e.children.size(); ++i) {
                if (i) out << ' ';
                const Expr& c = e.children[i];
                bool paren = c.kind == Expr::Kind::Alt;
                if (paren) out << '(';
                serialize_expr(c, out, false);
                if (paren) out << ')';
            }
            break;
        case Expr::Kind::Alt:
            for (size_t i = 0; i < e.children.size(); ++i) {
                if (i) out << " | ";
                serialize_expr(e.children[i], out, false);
            }
            break;
        case Expr::Kind::Opt:
            out << '[';
            serialize_expr(e.children[0], out, false);
            out << ']';
            break;
        case Expr::Kind::Star:
        case Expr::Kind::Plus: {
            const Expr& c = e.children[0];
            bool paren = c.kind != Expr::Kind::Sym;
            if (paren) out << '(';
            serialize_expr(c, out, false);
            if (paren) out << ')';
            out << (e.kind == Expr::Kind::Star ? '*' : '+');
            break;
        }
    }
    (void)top;
}

// Flattens an alternation of plain nonterminal references.
std::vector<std::string> alternative_names(const GrammarSpec& spec, const std::string& rule) {
    const Production* p = spec.find(rule);
    if (!p) throw GrammarError("missing rule `" + rule + "`", 0, 0);
    std::vector<std::string> names;
    std::function<void(const Expr&)> walk = [&](const Expr& e) {
        if (e.kind == Expr::Kind::Sym) {
            if (e.sym.kind != SymbolKind::Nonterminal)
                throw GrammarError("rule `" + rule + "` has a non-nonterminal alternative", 0, 0);
            names.push_back(e.sym.text);
            return;
        }
        if (e.kind != Expr::Kind::Alt)
            throw GrammarError("rule `" + rule + "` is not a flat alternation", 0, 0);
        for (const Expr& c : e.children) walk(c);
    };
    walk(p->rhs);
    return names;
}

} // namespace

bool is_terminal_class_name(const std::string& name) {
    return terminal_class_names().count(name) != 0;
}

std::string symbol_display(const Symbol& sym) {
    if (sym.kind == SymbolKind::Keyword || sym.kind == SymbolKind::Operator)
        return "'" + sym.text + "'";
    return sym.text;
}

GrammarSpec parse_grammar(const std::string& source_text, const std::string& start) {
    GrammarSpec spec;
    spec.start = start;
    for (const RawRule& raw : split_rules(source_text)) {
        RuleParser parser(raw.tokens);
        Production prod;
        prod.lhs = parser.parse_header();
        prod.rhs = parser.parse_rhs();
        prod.line = raw.line;
        if (spec.rule_index.count(prod.lhs))
            throw GrammarError("duplicate definition of `" + prod.lhs + "`", raw.line, 1);
        spec.rule_index[prod.lhs] = static_cast<int>(spec.productions.size());
        spec.nonterminals.insert(prod.lhs);
        spec.productions.push_back(std::move(prod));
    }
    if (spec.productions.empty()) throw GrammarError("no rules in grammar", 1, 1);
    std::set<std::string> refs;
    for (const Production& p : spec.productions) collect_symbols(p.rhs, spec.terminals, refs);
    if (!spec.rule_index.count(spec.start))
        throw GrammarError("start symbol `" + spec.start + "` is not defined", 1, 1);
    return spec;
}

std::string serialize_grammar(const GrammarSpec& spec) {
    std::ostringstream out;
    for (const Production& p : spec.productions) {
        out << p.lhs << ": ";
        serialize_expr(p.rhs, out, true);
        out << '\n';
    }
    return out.str();
}

std::vector<Diagnostic> validate_grammar(const GrammarSpec& spec) {
    std::vector<Diagnostic> diags;

    // Undefined nonterminal references.
    std::map<std::string, std::set<std::string>> refs_by_rule;
    std::set<std::string> referenced;
    for (const Production& p : spec.productions) {
        std::set<Symbol> terms;
        std::set<std::string> refs;
        collect_symbols(p.rhs, terms, refs);
        for (const std::string& r : refs) {
            referenced.insert(r);
            if (!spec.rule_index.count(r))
                diags.push_back({Diagnostic::Kind::UndefinedSymbol, p.lhs,
                                 "undefined symbol `" + r + "` referenced from `" + p.lhs + "`"});
        }
        refs_by_rule[p.lhs] = std::move(refs);
    }

    // Reachability.  The dialect allows several entry points (rules nobody
    // references), so roots are the configured start plus all unreferenced
    // rules.
    std::set<std::string> reachable;
    std::vector<std::string> work;
    auto add_root = [&](const std::string& r) {
        if (spec.rule_index.count(r) && reachable.insert(r).second) work.push_back(r);
    };
    add_root(spec.start);
    for (const Production& p : spec.productions)
        if (!referenced.count(p.lhs)) add_root(p.lhs);
    while (!work.empty()) {
        std::string r = work.back();
        work.pop_back();
        for (const std::string& next : refs_by_rule[r])
            if (spec.rule_index.count(next) && reachable.insert(next).second) work.push_back(next);
    }
    for (const Production& p : spec.productions)
        if (!reachable.count(p.lhs))
            diags.push_back({Diagnostic::Kind::Unreachable, p.lhs,
                             "rule `" + p.lhs + "` is unreachable from any entry point"});

    // Productivity: a rule must derive some terminal string.
    std::set<std::string> productive;
    bool changed = true;
    std::function<bool(const Expr&)> derives = [&](const Expr& e) -> bool {
        switch (e.kind) {
            case Expr::Kind::Sym:
                return e.sym.kind != SymbolKind::Nonterminal || productive.count(e.sym.text) != 0;
            case Expr::Kind::Seq: {
                for (const Expr& c : e.children)
                    if (!derives(c)) return false;
                return true;
            }
            case Expr::Kind::Alt: {
                for (const Expr& c : e.children)
                    if (derives(c)) return true;
                return false;
            }
            case Expr::Kind::Opt:
                return true;
            case Expr::Kind::Star:
                return true;
            case Expr::Kind::Plus:
                return derives(e.children[0]);
        }
        return false;
    };
    while (changed) {
        changed = false;
        for (const Production& p : spec.productions) {
            if (productive.count(p.lhs)) continue;
            if (derives(p.rhs)) {
                productive.insert(p.lhs);
                changed = true;
            }
        }
    }
    for (const Production& p : spec.productions)
        if (!productive.count(p.lhs))
            diags.push_back({Diagnostic::Kind::Unproductive, p.lhs,
                             "rule `" + p.lhs + "` derives no terminal string"});
    return diags;
}

StatementClasses statement_classes(const GrammarSpec& spec) {
    StatementClasses classes;
    for (const std::string& name : alternative_names(spec, "small_stmt")) {
        if (name == "flow_stmt") {
            for (const std::string& flow : alternative_names(spec, "flow_stmt"))
                classes.simple.insert(flow);
        } else {
            classes.simple.insert(name);
        }
    }
    for (const std::string& name : alternative_names(spec, "compound_stmt"))
        classes.compound.insert(name);
    return classes;
}

} // namespace rpg
