#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpg {

enum class SymbolKind {
    Nonterminal,
    Keyword,       // quoted alphabetic literal, e.g. 'elif'
    Operator,      // quoted punctuation literal, e.g. '->'
    TerminalClass, // NAME, NUMBER, STRING, NEWLINE, INDENT, DEDENT, ...
};

struct Symbol {
    SymbolKind kind = SymbolKind::Nonterminal;
    std::string text;

    bool is_terminal() const { return kind != SymbolKind::Nonterminal; }
    auto operator<=>(const Symbol&) const = default;
};

// Display form used in label traces and reports: quoted for literals,
// bare for classes and nonterminals.
std::string symbol_display(const Symbol& sym);

bool is_terminal_class_name(const std::string& name);

// Right-hand-side expression tree.  Opt/Star/Plus have exactly one child,
// Seq/Alt have two or more, Sym is a leaf.
struct Expr {
    enum class Kind { Sym, Seq, Alt, Opt, Star, Plus };
    Kind kind = Kind::Sym;
    Symbol sym;
    std::vector<Expr> children;

    bool operator==(const Expr&) const = default;

    static Expr symbol(Symbol s) {
        Expr e;
        e.kind = Kind::Sym;
        e.sym = std::move(s);
        return e;
    }
    static Expr node(Kind k, std::vector<Expr> kids) {
        Expr e;
        e.kind = k;
        e.children = std::move(kids);
        return e;
    }
};

struct Production {
    std::string lhs;
    Expr rhs;
    int line = 0; // 1-based line of the rule header in the source text

    bool operator==(const Production& o) const { return lhs == o.lhs && rhs == o.rhs; }
};

struct StatementClasses {
    std::set<std::string> simple;
    std::set<std::string> compound;

    bool contains(const std::string& rule) const {
        return simple.count(rule) != 0 || compound.count(rule) != 0;
    }
};

struct GrammarSpec {
    std::vector<Production> productions; // declaration order
    std::map<std::string, int> rule_index;
    std::set<std::string> nonterminals;
    std::set<Symbol> terminals;
    std::string start = "file_input";

    const Production* find(const std::string& name) const {
        auto it = rule_index.find(name);
        return it == rule_index.end() ? nullptr : &productions[it->second];
    }
};

struct GrammarError : std::runtime_error {
    int line;
    int column;
    GrammarError(std::string msg, int line_, int column_)
        : std::runtime_error(msg + " at line " + std::to_string(line_) + ", column " +
                             std::to_string(column_)),
          line(line_),
          column(column_) {}
};

struct Diagnostic {
    enum class Kind { UndefinedSymbol, Unreachable, Unproductive };
    Kind kind;
    std::string rule;
    std::string message;
};

// Parses the colon-separated EBNF dialect: `name: expression`, `#` comments,
// quoted literals, `|  [...]  (...)  *  +`, continuation lines either indented
// or inside unbalanced brackets.
GrammarSpec parse_grammar(const std::string& source_text, const std::string& start = "file_input");

std::string serialize_grammar(const GrammarSpec& spec);

std::vector<Diagnostic> validate_grammar(const GrammarSpec& spec);

// Alternatives of `small_stmt` (with `flow_stmt` expanded one level) and of
// `compound_stmt`.  Throws GrammarError when those rules are missing.
StatementClasses statement_classes(const GrammarSpec& spec);

} // namespace rpg
