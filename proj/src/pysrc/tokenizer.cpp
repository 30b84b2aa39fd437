#include "layerfix/pysrc/tokenizer.hpp"

#include <algorithm>
#include <array>

#include "layerfix/core/error.hpp"

namespace layerfix::pysrc {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",  "await", "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",   "yield",
};

constexpr std::array<std::string_view, 4> kThreeCharOps = {"**=", "//=", ">>=", "<<="};
constexpr std::array<std::string_view, 20> kTwoCharOps = {
    "...", "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "->",
    "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", ":=",
};
constexpr std::string_view kOneCharOps = "+-*/%@&|^~<>()[]{},:;.=";

bool is_ident_start(char ch) noexcept {
    const auto u = static_cast<unsigned char>(ch);
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_' || u >= 0x80;
}

bool is_ident_char(char ch) noexcept {
    return is_ident_start(ch) || (ch >= '0' && ch <= '9');
}

bool is_digit(char ch) noexcept { return ch >= '0' && ch <= '9'; }

bool is_string_prefix(std::string_view word) noexcept {
    if (word.empty() || word.size() > 2) return false;
    return std::all_of(word.begin(), word.end(), [](char ch) {
        switch (ch) {
            case 'r': case 'R': case 'u': case 'U': case 'b': case 'B': case 'f': case 'F': return true;
            default: return false;
        }
    });
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        while (pos_ < src_.size()) {
            if (at_line_start_ && brackets_.empty()) {
                if (!start_line()) continue;
            }
            const char ch = src_[pos_];
            if (ch == ' ' || ch == '\t' || ch == '\f') {
                ++pos_;
            } else if (ch == '\n' || ch == '\r') {
                const int line = line_;
                const int col = column();
                consume_newline();
                if (brackets_.empty() && line_has_tokens_) {
                    emit(TokenKind::newline, "\n", line, col, line);
                    line_has_tokens_ = false;
                } else {
                    emit(TokenKind::nl, "\n", line, col, line);
                }
                at_line_start_ = brackets_.empty();
            } else if (ch == '#') {
                lex_comment();
            } else if (ch == '\\') {
                const std::size_t next = pos_ + 1;
                if (next < src_.size() && (src_[next] == '\n' || src_[next] == '\r')) {
                    ++pos_;
                    consume_newline();
                } else {
                    fail("unexpected character after line continuation");
                }
            } else if (ch == '"' || ch == '\'') {
                lex_string(pos_);
            } else if (is_digit(ch) || (ch == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
                lex_number();
            } else if (is_ident_start(ch)) {
                lex_name();
            } else {
                lex_op();
            }
        }
        finish();
        return std::move(tokens_);
    }

private:
    [[noreturn]] void fail(const std::string& reason) const { fail_at(line_, column(), reason); }

    [[noreturn]] static void fail_at(int line, int col, const std::string& reason) {
        throw Error(ErrorKind::parse,
                    "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + reason);
    }

    [[nodiscard]] int column() const noexcept { return static_cast<int>(pos_ - line_begin_); }

    void emit(TokenKind kind, std::string text, int line, int col, int end_line) {
        tokens_.push_back(Token{kind, std::move(text), line, col, end_line});
    }

    void consume_newline() {
        if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
        ++line_;
        line_begin_ = pos_;
    }

    // Handles indentation at the start of a physical line. Returns false when
    // the line was consumed entirely (blank or comment-only).
    bool start_line() {
        int width = 0;
        std::size_t p = pos_;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
            if (src_[p] == '\t') {
                width = (width / 8 + 1) * 8;
            } else if (src_[p] == '\f') {
                width = 0;
            } else {
                ++width;
            }
            ++p;
        }
        if (p >= src_.size()) {
            pos_ = p;
            return false;
        }
        const char ch = src_[p];
        if (ch == '#' || ch == '\n' || ch == '\r') {
            pos_ = p;
            if (ch == '#') lex_comment();
            if (pos_ < src_.size()) {
                const int line = line_;
                const int col = column();
                consume_newline();
                emit(TokenKind::nl, "\n", line, col, line);
            }
            return false;
        }
        pos_ = p;
        at_line_start_ = false;
        if (indents_.empty()) {
            indents_.push_back(width);
        } else if (width > indents_.back()) {
            indents_.push_back(width);
            emit(TokenKind::indent, std::string(src_.substr(line_begin_, p - line_begin_)), line_, 0, line_);
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                if (indents_.empty() || width > indents_.back()) {
                    fail("unindent does not match any outer indentation level");
                }
                emit(TokenKind::dedent, "", line_, column(), line_);
            }
        }
        return true;
    }

    void lex_comment() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
        emit(TokenKind::comment, std::string(src_.substr(start, pos_ - start)), line_,
             static_cast<int>(start - line_begin_), line_);
    }

    void lex_string(std::size_t start) {
        const int line = line_;
        const int col = static_cast<int>(start - line_begin_);
        const char quote = src_[pos_];
        const bool triple = src_.substr(pos_, 3) == std::string_view(std::string(3, quote));
        pos_ += triple ? 3 : 1;
        for (;;) {
            if (pos_ >= src_.size()) fail_at(line, col, "unterminated string literal");
            const char ch = src_[pos_];
            if (ch == '\\') {
                ++pos_;
                if (pos_ < src_.size()) {
                    if (src_[pos_] == '\n' || src_[pos_] == '\r') {
                        consume_newline();
                    } else {
                        ++pos_;
                    }
                }
                continue;
            }
            if (ch == '\n' || ch == '\r') {
                if (!triple) fail_at(line, col, "unterminated string literal");
                consume_newline();
                continue;
            }
            if (ch == quote) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (src_.substr(pos_, 3) == std::string_view(std::string(3, quote))) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        emit(TokenKind::string, std::string(src_.substr(start, pos_ - start)), line, col, line_);
        line_has_tokens_ = true;
    }

    void lex_number() {
        const std::size_t start = pos_;
        const auto peek = [&](std::size_t off) { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; };
        if (peek(0) == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' || peek(1) == 'O' ||
                               peek(1) == 'b' || peek(1) == 'B')) {
            pos_ += 2;
            while (pos_ < src_.size() && (is_ident_char(src_[pos_]))) ++pos_;
        } else {
            while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '_' || src_[pos_] == '.')) ++pos_;
            if ((peek(0) == 'e' || peek(0) == 'E') &&
                (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
                pos_ += 2;
                while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '_')) ++pos_;
            }
            if (peek(0) == 'j' || peek(0) == 'J') ++pos_;
        }
        emit(TokenKind::number, std::string(src_.substr(start, pos_ - start)), line_,
             static_cast<int>(start - line_begin_), line_);
        line_has_tokens_ = true;
    }

    void lex_name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        const auto word = src_.substr(start, pos_ - start);
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && is_string_prefix(word)) {
            lex_string(start);
            return;
        }
        emit(TokenKind::name, std::string(word), line_, static_cast<int>(start - line_begin_), line_);
        line_has_tokens_ = true;
    }

    void lex_op() {
        const auto rest = src_.substr(pos_);
        std::string_view op;
        for (const auto candidate : kThreeCharOps) {
            if (rest.starts_with(candidate)) op = candidate;
        }
        if (op.empty()) {
            for (const auto candidate : kTwoCharOps) {
                if (rest.starts_with(candidate)) {
                    op = candidate;
                    break;
                }
            }
        }
        if (op.empty() && kOneCharOps.find(rest.front()) != std::string_view::npos) op = rest.substr(0, 1);
        if (op.empty()) fail(std::string("unexpected character '") + rest.front() + "'");

        if (op == "(" || op == "[" || op == "{") {
            brackets_.push_back(Open{op.front(), line_, column()});
        } else if (op == ")" || op == "]" || op == "}") {
            const char expected = op == ")" ? '(' : op == "]" ? '[' : '{';
            if (brackets_.empty()) fail("unmatched '" + std::string(op) + "'");
            if (brackets_.back().ch != expected) fail("closing '" + std::string(op) + "' does not match");
            brackets_.pop_back();
        }
        emit(TokenKind::op, std::string(op), line_, column(), line_);
        pos_ += op.size();
        line_has_tokens_ = true;
    }

    void finish() {
        if (!brackets_.empty()) {
            fail_at(brackets_.back().line, brackets_.back().col,
                    std::string("'") + brackets_.back().ch + "' was never closed");
        }
        if (line_has_tokens_) emit(TokenKind::newline, "", line_, column(), line_);
        for (std::size_t i = 1; i < indents_.size(); ++i) emit(TokenKind::dedent, "", line_, 0, line_);
        emit(TokenKind::endmarker, "", line_, 0, line_);
    }

    struct Open {
        char ch;
        int line;
        int col;
    };

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_begin_ = 0;
    int line_ = 1;
    bool at_line_start_ = true;
    bool line_has_tokens_ = false;
    std::vector<int> indents_;
    std::vector<Open> brackets_;
    std::vector<Token> tokens_;
};

}  // namespace

bool is_keyword(std::string_view word) noexcept {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            lines.push_back(text.substr(start, i + 1 - start));
            start = i + 1;
        } else if (text[i] == '\r' && (i + 1 >= text.size() || text[i + 1] != '\n')) {
            lines.push_back(text.substr(start, i + 1 - start));
            start = i + 1;
        }
    }
    if (start < text.size()) lines.push_back(text.substr(start));
    return lines;
}

}  // namespace layerfix::pysrc
