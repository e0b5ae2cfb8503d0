#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpg/grammar.hpp"

namespace rpg {

struct Terminal {
    Symbol symbol;
    std::string lexeme;
    size_t begin = 0; // byte offsets into the source consumed so far
    size_t end = 0;

    bool operator==(const Terminal& o) const {
        return symbol == o.symbol && lexeme == o.lexeme;
    }
};

struct LexError : std::runtime_error {
    size_t offset;
    LexError(std::string msg, size_t offset_)
        : std::runtime_error(msg + " at offset " + std::to_string(offset_)), offset(offset_) {}
};

// Keyword and operator tables derived from a grammar's terminal set.
struct LexVocabulary {
    std::set<std::string> keywords;
    std::set<std::string> operators;
    size_t max_operator_len = 0;

    static LexVocabulary from_grammar(const GrammarSpec& spec);
    bool is_operator_prefix(const std::string& text) const;
};

// Streaming tokenizer.  Text arrives in arbitrary fragments; complete
// terminals are emitted as soon as they can no longer be extended by
// further input.  `finish` resolves everything, synthesizes the trailing
// NEWLINE when the last line lacks one, pops open indents as DEDENTs and
// appends ENDMARKER.
class IncrementalLexer {
public:
    explicit IncrementalLexer(const LexVocabulary& vocab) : vocab_(&vocab) { indents_.push_back(0); }

    std::vector<Terminal> feed(std::string_view fragment);
    std::vector<Terminal> finish();

    // Forces the pending lexeme out as if a token boundary followed, without
    // the end-of-file synthesis of `finish`.  Used for candidate probing.
    std::vector<Terminal> peek_boundary() const;

    bool finished() const { return finished_; }

private:
    std::vector<Terminal> drain(bool at_eof);

    const LexVocabulary* vocab_;
    std::string buffer_;
    size_t pos_ = 0; // scan position within buffer_
    size_t consumed_ = 0; // bytes already dropped from the front of buffer_
    std::vector<int> indents_;
    int paren_depth_ = 0;
    bool at_line_start_ = true;
    bool line_has_content_ = false;
    bool finished_ = false;

    friend class Scanner;
};

// Whole-text tokenization; the stream always ends NEWLINE? DEDENT* ENDMARKER.
std::vector<Terminal> lex(const std::string& source, const LexVocabulary& vocab);

// Accumulates model-token text fragments into complete terminals: a NAME,
// NUMBER or STRING split across several model tokens is held until a
// boundary arrives, and one model token may release several terminals.
class TokenAdapter {
public:
    explicit TokenAdapter(const LexVocabulary& vocab) : lexer_(vocab) {}

    std::vector<Terminal> feed_token(std::string_view token_text) { return lexer_.feed(token_text); }
    // End of stream: pending fragment, trailing NEWLINE, DEDENTs, ENDMARKER.
    std::vector<Terminal> flush() { return lexer_.finish(); }
    // Terminals the pending fragment would yield if the stream ended here.
    std::vector<Terminal> pending_preview() const { return lexer_.peek_boundary(); }
    bool finished() const { return lexer_.finished(); }

private:
    IncrementalLexer lexer_;
};

} // namespace rpg
