#include "layerfix/complexity/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "layerfix/core/error.hpp"
#include "layerfix/eval/stats.hpp"

namespace layerfix::complexity {

using pysrc::Token;
using pysrc::TokenKind;

namespace {

constexpr std::string_view kDelimiters[] = {"(", ")", "[", "]", "{", "}", ",", ":", ";", "->"};

bool starts_statement(const Token& tok) noexcept {
    return tok.kind == TokenKind::newline || tok.kind == TokenKind::indent || tok.kind == TokenKind::dedent ||
           tok.is_op(";");
}

// Expressions of the replacement fields of an f-string literal, or none for
// other strings. Format specs are skipped; `{{` and `}}` are literal braces.
std::vector<std::string> fstring_expressions(std::string_view literal) {
    std::size_t q = 0;
    bool formatted = false;
    while (q < literal.size() && literal[q] != '"' && literal[q] != '\'') {
        formatted |= literal[q] == 'f' || literal[q] == 'F';
        ++q;
    }
    if (!formatted || q >= literal.size()) return {};
    const char quote = literal[q];
    const std::size_t fence = literal.substr(q, 3) == std::string(3, quote) ? 3 : 1;
    const std::string_view body = literal.substr(q + fence, literal.size() - q - 2 * fence);

    std::vector<std::string> out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '{') continue;
        if (i + 1 < body.size() && body[i + 1] == '{') {
            ++i;
            continue;
        }
        int depth = 0;
        char in_string = 0;
        std::size_t j = i + 1;
        for (; j < body.size(); ++j) {
            const char c = body[j];
            if (in_string) {
                if (c == in_string) in_string = 0;
                continue;
            }
            if (c == '"' || c == '\'') {
                in_string = c;
            } else if (c == '(' || c == '[' || c == '{') {
                ++depth;
            } else if ((c == ')' || c == ']' || c == '}') && depth > 0) {
                --depth;
            } else if (depth == 0 && (c == '}' || c == ':' || (c == '!' && j + 1 < body.size() && body[j + 1] != '='))) {
                break;
            }
        }
        out.emplace_back(body.substr(i + 1, j - i - 1));
        // Skip the rest of the field, including a format spec with nested fields.
        int braces = 1;
        for (; j < body.size() && braces > 0; ++j) {
            if (body[j] == '{') ++braces;
            if (body[j] == '}') --braces;
        }
        i = j == 0 ? 0 : j - 1;
    }
    return out;
}

}  // namespace

HalsteadClass classify(const Token& token) noexcept {
    switch (token.kind) {
        case TokenKind::number:
        case TokenKind::string:
            return HalsteadClass::operand;
        case TokenKind::name:
            if (token.text == "True" || token.text == "False" || token.text == "None") return HalsteadClass::operand;
            return pysrc::is_keyword(token.text) ? HalsteadClass::operator_token : HalsteadClass::operand;
        case TokenKind::op:
            if (token.text == "...") return HalsteadClass::operand;
            for (const auto delim : kDelimiters) {
                if (token.text == delim) return HalsteadClass::neither;
            }
            return HalsteadClass::operator_token;
        default:
            return HalsteadClass::neither;
    }
}

int cyclomatic_complexity(std::string_view function_source) {
    const auto tokens = pysrc::tokenize(function_source);
    int complexity = 1;
    // One flag per open bracket: true once a comprehension `for` was seen.
    std::vector<bool> comprehension;
    bool at_start = true;
    std::string statement_head;
    bool head_is_match_case = false;

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& tok = tokens[i];
        if (tok.kind == TokenKind::comment || tok.kind == TokenKind::nl) continue;
        if (starts_statement(tok)) {
            at_start = true;
            continue;
        }
        const bool stmt_start = at_start;
        at_start = false;
        if (stmt_start) {
            statement_head = tok.text;
            // `case <pattern> if <guard>:` guards are not decision points here.
            head_is_match_case = tok.is_name("case") && i + 1 < tokens.size() && !tokens[i + 1].is_op("=") &&
                                 !tokens[i + 1].is_op(".") && tokens[i + 1].kind != TokenKind::newline;
        }

        if (tok.kind == TokenKind::op) {
            if (tok.is_op("(") || tok.is_op("[") || tok.is_op("{")) {
                comprehension.push_back(false);
            } else if ((tok.is_op(")") || tok.is_op("]") || tok.is_op("}")) && !comprehension.empty()) {
                comprehension.pop_back();
            }
            continue;
        }
        if (tok.kind == TokenKind::string) {
            for (const auto& expr : fstring_expressions(tok.text)) {
                complexity += cyclomatic_complexity("(" + expr + ")\n") - 1;
            }
            continue;
        }
        if (tok.kind != TokenKind::name) continue;

        const auto& word = tok.text;
        if (word == "elif" || word == "except" || word == "and" || word == "or") {
            ++complexity;
        } else if (word == "while") {
            ++complexity;
        } else if (word == "for") {
            if (comprehension.empty()) {
                ++complexity;  // statement loop header, possibly after `async`
            } else {
                comprehension.back() = true;
            }
        } else if (word == "if") {
            if (stmt_start) {
                ++complexity;
            } else if (!comprehension.empty() && comprehension.back()) {
                ++complexity;  // comprehension filter
            } else if (head_is_match_case && comprehension.empty()) {
                // match guard
            } else {
                ++complexity;  // conditional expression
            }
        }
    }
    return complexity;
}

HalsteadCounts halstead_counts(std::string_view function_source) {
    const auto tokens = pysrc::tokenize(function_source);
    std::set<std::string> operators;
    std::set<std::string> operands;
    HalsteadCounts counts;
    for (const auto& tok : tokens) {
        switch (classify(tok)) {
            case HalsteadClass::operator_token:
                operators.insert(tok.text);
                ++counts.total_operators;
                break;
            case HalsteadClass::operand:
                operands.insert(tok.text);
                ++counts.total_operands;
                break;
            case HalsteadClass::neither:
                break;
        }
    }
    counts.distinct_operators = static_cast<int>(operators.size());
    counts.distinct_operands = static_cast<int>(operands.size());
    return counts;
}

HalsteadMetrics halstead_from_counts(const HalsteadCounts& counts) noexcept {
    if (counts.distinct_operators == 0 || counts.distinct_operands == 0) return {};
    HalsteadMetrics metrics;
    const double length = counts.total_operators + counts.total_operands;
    const double vocabulary = counts.distinct_operators + counts.distinct_operands;
    metrics.volume = length * std::log2(vocabulary);
    metrics.difficulty = (counts.distinct_operators / 2.0) *
                         (static_cast<double>(counts.total_operands) / counts.distinct_operands);
    metrics.effort = metrics.difficulty * metrics.volume;
    return metrics;
}

HalsteadMetrics halstead(std::string_view function_source) {
    return halstead_from_counts(halstead_counts(function_source));
}

int source_lines(std::string_view function_source) {
    const auto tokens = pysrc::tokenize(function_source);
    const auto lines = pysrc::split_lines(function_source);
    std::set<int> covered;
    for (const auto& tok : tokens) {
        if (tok.kind == TokenKind::name || tok.kind == TokenKind::number || tok.kind == TokenKind::string ||
            tok.kind == TokenKind::op) {
            for (int line = tok.line; line <= tok.end_line; ++line) covered.insert(line);
        }
    }
    int count = 0;
    for (const int line : covered) {
        if (line < 1 || line > static_cast<int>(lines.size())) continue;
        const auto text = lines[static_cast<std::size_t>(line - 1)];
        if (text.find_first_not_of(" \t\r\n\f") != std::string_view::npos) ++count;
    }
    return count;
}

double maintainability_index(double volume, int cyclomatic, int sloc) {
    if (volume < 0.0 || cyclomatic < 1 || sloc < 1) {
        throw Error(ErrorKind::domain, "maintainability index requires volume >= 0, cyclomatic >= 1, sloc >= 1");
    }
    const double raw =
        171.0 - 5.2 * std::log(std::max(volume, 1.0)) - 0.23 * cyclomatic - 16.2 * std::log(static_cast<double>(sloc));
    return std::clamp(100.0 * raw / 171.0, 0.0, 100.0);
}

ComplexityProfile profile(std::string_view function_source) {
    ComplexityProfile p;
    p.cyclomatic = cyclomatic_complexity(function_source);
    p.sloc = std::max(1, source_lines(function_source));
    const auto h = halstead(function_source);
    p.halstead_volume = h.volume;
    p.halstead_difficulty = h.difficulty;
    p.halstead_effort = h.effort;
    p.maintainability_index = maintainability_index(h.volume, p.cyclomatic, p.sloc);
    return p;
}

std::string_view to_string(Metric metric) noexcept {
    switch (metric) {
        case Metric::cyclomatic: return "Cyclomatic Complexity";
        case Metric::sloc: return "Lines of Code";
        case Metric::halstead_volume: return "Halstead Volume";
        case Metric::halstead_difficulty: return "Halstead Difficulty";
        case Metric::halstead_effort: return "Halstead Effort";
        case Metric::maintainability: return "Maintainability Index";
    }
    return "?";
}

double metric_value(const ComplexityProfile& p, Metric metric) noexcept {
    switch (metric) {
        case Metric::cyclomatic: return p.cyclomatic;
        case Metric::sloc: return p.sloc;
        case Metric::halstead_volume: return p.halstead_volume;
        case Metric::halstead_difficulty: return p.halstead_difficulty;
        case Metric::halstead_effort: return p.halstead_effort;
        case Metric::maintainability: return p.maintainability_index;
    }
    return 0.0;
}

std::vector<ComparisonRow> compare_groups(std::span<const ComplexityProfile> fixed,
                                          std::span<const ComplexityProfile> unresolved) {
    if (fixed.size() < 2 || unresolved.size() < 2) {
        throw Error(ErrorKind::domain, "group comparison needs at least two profiles per group");
    }
    std::vector<ComparisonRow> rows;
    for (const auto metric : kAllMetrics) {
        std::vector<double> a;
        std::vector<double> b;
        for (const auto& p : fixed) a.push_back(metric_value(p, metric));
        for (const auto& p : unresolved) b.push_back(metric_value(p, metric));
        ComparisonRow row;
        row.metric = metric;
        row.fixed_mean = eval::mean(a);
        row.unresolved_mean = eval::mean(b);
        const auto effect = eval::cohens_d(a, b);
        row.cohens_d = effect.d;
        row.zero_variance = effect.zero_variance;
        row.u_test_p = eval::mann_whitney_u(a, b).p_two_tailed;
        rows.push_back(row);
    }
    return rows;
}

std::string render_comparison(std::span<const ComparisonRow> rows) {
    std::string out = fmt::format("{:<24}{:>14}{:>18}{:>28}{:>12}\n", "Metric", "Fixed Mean", "Unresolved Mean",
                                  "Cohen's d", "u-test p");
    for (const auto& row : rows) {
        std::string d = fmt::format("{:.2f}", row.cohens_d);
        if (row.cohens_d < 0) {
            d += " (Unresolved>Fixed)";
        } else if (row.cohens_d > 0) {
            d += " (Fixed>Unresolved)";
        }
        out += fmt::format("{:<24}{:>14.2f}{:>18.2f}{:>28}{:>12.3f}\n", to_string(row.metric), row.fixed_mean,
                           row.unresolved_mean, d, row.u_test_p);
    }
    return out;
}

}  // namespace layerfix::complexity
