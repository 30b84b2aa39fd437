#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace layerfix::pysrc {

enum class TokenKind {
    name,
    number,
    string,
    op,
    comment,
    newline,  // end of a logical line
    nl,       // non-logical line break (blank line, inside brackets)
    indent,
    dedent,
    endmarker,
};

struct Token {
    TokenKind kind = TokenKind::endmarker;
    std::string text;
    int line = 0;      // 1-based
    int col = 0;       // 0-based byte column
    int end_line = 0;  // differs from line for multi-line strings

    [[nodiscard]] bool is_op(std::string_view op) const noexcept {
        return kind == TokenKind::op && text == op;
    }
    [[nodiscard]] bool is_name(std::string_view name) const noexcept {
        return kind == TokenKind::name && text == name;
    }
};

/// Reserved words of Python 3. Soft keywords (match, case, type) are names.
bool is_keyword(std::string_view word) noexcept;

/// Tokenizes Python source. Indentation of the first logical line is taken
/// as the base level, so indented snippets (methods cut out of a class)
/// tokenize without dedenting first.
///
/// Throws Error{parse} "line L, col C: <reason>" on unterminated strings,
/// unbalanced brackets, stray characters and inconsistent dedents.
std::vector<Token> tokenize(std::string_view source);

/// Splits into lines, each keeping its original terminator.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace layerfix::pysrc
