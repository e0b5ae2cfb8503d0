#include "rpg/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

namespace rpg {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
           static_cast<unsigned char>(c) >= 0x80;
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           static_cast<unsigned char>(c) >= 0x80;
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_string_prefix(std::string_view s) {
    if (s.empty() || s.size() > 2) return false;
    int r = 0, bfu = 0;
    for (char c : s) {
        switch (std::tolower(static_cast<unsigned char>(c))) {
            case 'r': ++r; break;
            case 'b':
            case 'u':
            case 'f': ++bfu; break;
            default: return false;
        }
    }
    return r <= 1 && bfu <= 1;
}

constexpr int kTabStop = 8;

} // namespace

LexVocabulary LexVocabulary::from_grammar(const GrammarSpec& spec) {
    LexVocabulary v;
    for (const Symbol& s : spec.terminals) {
        if (s.kind == SymbolKind::Keyword) v.keywords.insert(s.text);
        if (s.kind == SymbolKind::Operator) {
            v.operators.insert(s.text);
            v.max_operator_len = std::max(v.max_operator_len, s.text.size());
        }
    }
    return v;
}

bool LexVocabulary::is_operator_prefix(const std::string& text) const {
    for (auto it = operators.upper_bound(text); it != operators.end(); ++it) {
        if (it->compare(0, text.size(), text) != 0) break;
        if (it->size() > text.size()) return true;
    }
    return false;
}

std::vector<Terminal> IncrementalLexer::feed(std::string_view fragment) {
    buffer_.append(fragment);
    return drain(false);
}

std::vector<Terminal> IncrementalLexer::finish() {
    std::vector<Terminal> out = drain(true);
    if (finished_) return out;
    size_t off = consumed_ + pos_;
    if (line_has_content_) {
        out.push_back({{SymbolKind::TerminalClass, "NEWLINE"}, "", off, off});
    }
    while (indents_.size() > 1) {
        indents_.pop_back();
        out.push_back({{SymbolKind::TerminalClass, "DEDENT"}, "", off, off});
    }
    out.push_back({{SymbolKind::TerminalClass, "ENDMARKER"}, "", off, off});
    finished_ = true;
    return out;
}

std::vector<Terminal> IncrementalLexer::peek_boundary() const {
    IncrementalLexer probe = *this;
    try {
        return probe.drain(true);
    } catch (const LexError&) {
        return {};
    }
}

std::vector<Terminal> IncrementalLexer::drain(bool at_eof) {
    std::vector<Terminal> out;
    if (finished_) return out;
    auto emit = [&](Symbol sym, size_t begin, size_t end) {
        out.push_back({std::move(sym), buffer_.substr(begin, end - begin), consumed_ + begin,
                       consumed_ + end});
    };

    // Scans a string whose first quote sits at `q`.  Returns the index past
    // the closing quote, or npos when more input is needed.
    auto scan_string = [&](size_t q) -> size_t {
        const std::string& buf = buffer_;
        const size_t npos = std::string::npos;
        char qc = buf[q];
        bool triple = false;
        size_t body;
        if (q + 1 < buf.size() && buf[q + 1] == qc) {
            if (q + 2 < buf.size() && buf[q + 2] == qc) {
                triple = true;
                body = q + 3;
            } else if (q + 2 >= buf.size() && !at_eof) {
                return npos; // "" may yet become a triple-quote opener
            } else {
                return q + 2; // empty string
            }
        } else if (q + 1 >= buf.size() && !at_eof) {
            return npos;
        } else {
            body = q + 1;
        }
        size_t i = body;
        while (i < buf.size()) {
            char c = buf[i];
            if (c == '\\') {
                if (i + 1 >= buf.size()) {
                    if (!at_eof) return npos;
                    throw LexError("unterminated string", consumed_ + q);
                }
                i += 2;
                continue;
            }
            if (c == qc) {
                if (!triple) return i + 1;
                size_t run = 1;
                while (i + run < buf.size() && run < 3 && buf[i + run] == qc) ++run;
                if (run == 3) return i + 3;
                if (i + run >= buf.size() && !at_eof) return npos;
                i += run;
                continue;
            }
            if (!triple && (c == '\n' || c == '\r'))
                throw LexError("unterminated string", consumed_ + q);
            ++i;
        }
        if (!at_eof) return npos;
        throw LexError("unterminated string", consumed_ + q);
    };

    auto scan_number = [&](size_t start) -> size_t {
        const std::string& buf = buffer_;
        bool radix_prefix = start + 1 < buf.size() && buf[start] == '0' &&
                            std::strchr("xXoObB", buf[start + 1]) != nullptr &&
                            buf[start + 1] != '\0';
        size_t j = start;
        while (j < buf.size()) {
            char d = buf[j];
            if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
                ++j;
                continue;
            }
            if ((d == '+' || d == '-') && !radix_prefix && j > start &&
                (buf[j - 1] == 'e' || buf[j - 1] == 'E')) {
                ++j;
                continue;
            }
            break;
        }
        if (j >= buf.size() && !at_eof) return std::string::npos;
        return j;
    };

    while (pos_ < buffer_.size()) {
        const std::string& buf = buffer_;
        // Indentation of a fresh logical line.
        if (at_line_start_ && paren_depth_ == 0) {
            size_t i = pos_;
            int col = 0;
            while (i < buf.size()) {
                char c = buf[i];
                if (c == ' ') ++col;
                else if (c == '\t') col = (col / kTabStop + 1) * kTabStop;
                else if (c == '\f') col = 0;
                else break;
                ++i;
            }
            if (i >= buf.size()) {
                if (at_eof) pos_ = i; // trailing whitespace, nothing to emit
                break;
            }
            char c = buf[i];
            if (c == '\r' && i + 1 >= buf.size() && !at_eof) break;
            if (c == '\n' || c == '\r') { // blank line
                pos_ = i + ((c == '\r' && i + 1 < buf.size() && buf[i + 1] == '\n') ? 2 : 1);
                continue;
            }
            if (c == '#') { // comment-only line
                size_t nl = buf.find('\n', i);
                if (nl == std::string::npos) {
                    if (!at_eof) break;
                    pos_ = buf.size();
                    continue;
                }
                pos_ = nl + 1;
                continue;
            }
            if (c == '\\' && i + 1 >= buf.size() && !at_eof) break;
            if (c != '\\') { // a backslash join keeps the line "blank" so far
                if (col > indents_.back()) {
                    indents_.push_back(col);
                    emit({SymbolKind::TerminalClass, "INDENT"}, pos_, i);
                } else {
                    while (col < indents_.back()) {
                        indents_.pop_back();
                        emit({SymbolKind::TerminalClass, "DEDENT"}, pos_, i);
                    }
                    if (col != indents_.back())
                        throw LexError("inconsistent dedent", consumed_ + i);
                }
                at_line_start_ = false;
                line_has_content_ = true;
            }
            pos_ = i;
            if (c == '\\') {
                // fall through to the join handling below
            } else {
                continue;
            }
        }

        char c = buf[pos_];
        if (c == ' ' || c == '\t' || c == '\f') {
            ++pos_;
            continue;
        }
        if (c == '\\') {
            if (pos_ + 1 >= buf.size()) {
                if (!at_eof) break;
                throw LexError("stray backslash", consumed_ + pos_);
            }
            char n = buf[pos_ + 1];
            if (n == '\n') {
                pos_ += 2;
                continue;
            }
            if (n == '\r') {
                if (pos_ + 2 >= buf.size() && !at_eof) break;
                pos_ += 2 + (pos_ + 2 < buf.size() && buf[pos_ + 2] == '\n' ? 1 : 0);
                continue;
            }
            throw LexError("unexpected character after backslash", consumed_ + pos_);
        }
        if (c == '\r' && pos_ + 1 >= buf.size() && !at_eof) break;
        if (c == '\n' || c == '\r') {
            size_t len = (c == '\r' && pos_ + 1 < buf.size() && buf[pos_ + 1] == '\n') ? 2 : 1;
            if (paren_depth_ > 0) {
                pos_ += len;
                continue;
            }
            emit({SymbolKind::TerminalClass, "NEWLINE"}, pos_, pos_ + len);
            pos_ += len;
            at_line_start_ = true;
            line_has_content_ = false;
            continue;
        }
        if (c == '#') {
            size_t nl = buf.find('\n', pos_);
            if (nl == std::string::npos) {
                if (!at_eof) break;
                pos_ = buf.size();
                continue;
            }
            pos_ = nl; // the newline itself is handled above
            continue;
        }
        if (is_ident_start(c)) {
            size_t j = pos_;
            while (j < buf.size() && is_ident_char(buf[j])) ++j;
            if (j >= buf.size() && !at_eof) break; // name may extend
            std::string word = buf.substr(pos_, j - pos_);
            if (j < buf.size() && (buf[j] == '\'' || buf[j] == '"') && is_string_prefix(word)) {
                size_t end = scan_string(j);
                if (end == std::string::npos) break;
                emit({SymbolKind::TerminalClass, "STRING"}, pos_, end);
                pos_ = end;
                continue;
            }
            Symbol sym;
            if (vocab_->keywords.count(word)) sym = {SymbolKind::Keyword, word};
            else if (word == "async") sym = {SymbolKind::TerminalClass, "ASYNC"};
            else if (word == "await") sym = {SymbolKind::TerminalClass, "AWAIT"};
            else sym = {SymbolKind::TerminalClass, "NAME"};
            emit(std::move(sym), pos_, j);
            pos_ = j;
            continue;
        }
        if (is_digit(c) || (c == '.' && pos_ + 1 < buf.size() && is_digit(buf[pos_ + 1]))) {
            size_t end = scan_number(pos_);
            if (end == std::string::npos) break;
            emit({SymbolKind::TerminalClass, "NUMBER"}, pos_, end);
            pos_ = end;
            continue;
        }
        if (c == '.' && pos_ + 1 >= buf.size() && !at_eof) break; // may begin a float
        if (c == '\'' || c == '"') {
            size_t end = scan_string(pos_);
            if (end == std::string::npos) break;
            emit({SymbolKind::TerminalClass, "STRING"}, pos_, end);
            pos_ = end;
            continue;
        }
        // operator, maximal munch; hold back while a longer operator is possible
        {
            size_t avail = buf.size() - pos_;
            size_t best = 0;
            bool longer_possible = false;
            for (const std::string& op : vocab_->operators) {
                if (op[0] != c) continue;
                if (op.size() <= avail) {
                    if (buf.compare(pos_, op.size(), op) == 0) best = std::max(best, op.size());
                } else if (!at_eof && buf.compare(pos_, avail, op, 0, avail) == 0) {
                    longer_possible = true;
                }
            }
            if (longer_possible) break;
            if (best == 0) throw LexError("illegal character", consumed_ + pos_);
            std::string op = buf.substr(pos_, best);
            if (op == "(" || op == "[" || op == "{") ++paren_depth_;
            if (op == ")" || op == "]" || op == "}") paren_depth_ = std::max(0, paren_depth_ - 1);
            emit({SymbolKind::Operator, op}, pos_, pos_ + best);
            pos_ += best;
            continue;
        }
    }

    if (pos_ > 4096) {
        buffer_.erase(0, pos_);
        consumed_ += pos_;
        pos_ = 0;
    }
    return out;
}

std::vector<Terminal> lex(const std::string& source, const LexVocabulary& vocab) {
    IncrementalLexer lexer(vocab);
    std::vector<Terminal> out = lexer.feed(source);
    std::vector<Terminal> tail = lexer.finish();
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

} // namespace rpg
