#include "layerfix/pysrc/module_scan.hpp"

#include <algorithm>

#include "layerfix/core/error.hpp"

namespace layerfix::pysrc {

namespace {

bool is_layout(const Token& tok) noexcept {
    switch (tok.kind) {
        case TokenKind::comment:
        case TokenKind::nl:
        case TokenKind::newline:
        case TokenKind::indent:
        case TokenKind::dedent:
        case TokenKind::endmarker:
            return true;
        default:
            return false;
    }
}

std::string trim_right(std::string_view text) {
    const auto end = text.find_last_not_of(" \t\r\n");
    return end == std::string_view::npos ? std::string{} : std::string(text.substr(0, end + 1));
}

// Parses a dotted name starting at tokens[i]; advances i past it.
std::string dotted_name(std::span<const Token> tokens, std::size_t& i) {
    std::string name;
    while (i < tokens.size() && tokens[i].kind == TokenKind::name) {
        name += tokens[i].text;
        ++i;
        if (i < tokens.size() && tokens[i].is_op(".") && i + 1 < tokens.size() &&
            tokens[i + 1].kind == TokenKind::name) {
            name += '.';
            ++i;
        } else {
            break;
        }
    }
    return name;
}

// `import a.b as c, d` starting after the `import` keyword.
std::vector<ImportBinding> parse_plain_import(std::span<const Token> tokens, std::size_t i) {
    std::vector<ImportBinding> bindings;
    while (i < tokens.size() && tokens[i].kind == TokenKind::name) {
        ImportBinding binding;
        binding.module = dotted_name(tokens, i);
        if (i < tokens.size() && tokens[i].is_name("as") && i + 1 < tokens.size()) {
            binding.local_name = tokens[i + 1].text;
            i += 2;
        } else {
            binding.local_name = binding.module.substr(0, binding.module.find('.'));
            binding.binds_root = true;
        }
        bindings.push_back(std::move(binding));
        if (i < tokens.size() && tokens[i].is_op(",")) {
            ++i;
        } else {
            break;
        }
    }
    return bindings;
}

// `from ..a.b import (c as d, e)` starting after the `from` keyword.
std::vector<ImportBinding> parse_from_import(std::span<const Token> tokens, std::size_t i) {
    int level = 0;
    while (i < tokens.size() && (tokens[i].is_op(".") || tokens[i].is_op("..."))) {
        level += static_cast<int>(tokens[i].text.size());
        ++i;
    }
    std::string module;
    if (i < tokens.size() && tokens[i].kind == TokenKind::name && !tokens[i].is_name("import")) {
        module = dotted_name(tokens, i);
    }
    if (i >= tokens.size() || !tokens[i].is_name("import")) return {};
    ++i;
    std::vector<ImportBinding> bindings;
    while (i < tokens.size()) {
        const Token& tok = tokens[i];
        if (tok.is_op("(") || tok.is_op(",") || tok.kind == TokenKind::nl || tok.kind == TokenKind::comment) {
            ++i;
            continue;
        }
        if (tok.is_op(")") || tok.kind == TokenKind::newline || tok.is_op(";")) break;
        if (tok.is_op("*")) {
            bindings.push_back(ImportBinding{"*", module, std::string("*"), level, false});
            ++i;
            continue;
        }
        if (tok.kind != TokenKind::name) break;
        ImportBinding binding{tok.text, module, tok.text, level, false};
        ++i;
        if (i + 1 < tokens.size() && tokens[i].is_name("as")) {
            binding.local_name = tokens[i + 1].text;
            i += 2;
        }
        bindings.push_back(std::move(binding));
    }
    return bindings;
}

struct OpenDefinition {
    std::size_t index;
    int body_level;  // -1 for a one-line body
    bool awaiting_body;
};

}  // namespace

std::string Reference::dotted() const {
    std::string out;
    for (const auto& part : chain) {
        if (!out.empty()) out += '.';
        out += part;
    }
    return out;
}

std::string slice_lines(std::string_view source, int first, int last) {
    const auto lines = split_lines(source);
    std::string out;
    for (int line = std::max(first, 1); line <= last && line <= static_cast<int>(lines.size()); ++line) {
        out += lines[static_cast<std::size_t>(line - 1)];
    }
    return out;
}

ModuleScan scan_module(std::string_view source) {
    const auto tokens = tokenize(source);
    return scan_tokens(tokens, source);
}

ModuleScan scan_tokens(std::span<const Token> tokens, std::string_view source) {
    ModuleScan scan;
    std::vector<OpenDefinition> open;
    int level = 0;
    bool stmt_start = true;
    int pending_decorator = 0;

    const auto close_finished = [&] {
        while (!open.empty() && !open.back().awaiting_body && open.back().body_level > level) {
            open.pop_back();
        }
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& tok = tokens[i];
        switch (tok.kind) {
            case TokenKind::indent:
                ++level;
                for (auto& def : open) {
                    if (def.awaiting_body) def.awaiting_body = false;
                }
                stmt_start = true;
                continue;
            case TokenKind::dedent:
                --level;
                close_finished();
                stmt_start = true;
                continue;
            case TokenKind::newline:
                while (!open.empty() && open.back().body_level == -1) open.pop_back();
                stmt_start = true;
                continue;
            case TokenKind::nl:
            case TokenKind::comment:
            case TokenKind::endmarker:
                continue;
            default:
                break;
        }

        for (const auto& def : open) {
            auto& end = scan.definitions[def.index].end_line;
            end = std::max(end, tok.end_line);
        }

        const bool at_start = stmt_start;
        stmt_start = tok.is_op(";");
        if (!at_start) continue;

        if (tok.is_op("@")) {
            if (pending_decorator == 0) pending_decorator = tok.line;
            continue;
        }

        std::size_t k = i;
        if (tok.is_name("async") && k + 1 < tokens.size()) ++k;
        const Token& head = tokens[k];
        if ((head.is_name("def") || head.is_name("class")) && k + 1 < tokens.size() &&
            tokens[k + 1].kind == TokenKind::name) {
            Definition def;
            def.kind = head.is_name("def") ? DefinitionKind::function : DefinitionKind::class_type;
            def.name = tokens[k + 1].text;
            def.def_line = tok.line;
            def.start_line = pending_decorator != 0 ? pending_decorator : tok.line;
            def.end_line = tok.end_line;
            def.depth = static_cast<int>(open.size());
            def.qualified_name = def.name;
            if (!open.empty()) {
                def.qualified_name = scan.definitions[open.back().index].qualified_name + "." + def.name;
            }

            // Header runs to the ':' at bracket depth zero.
            std::size_t j = k + 2;
            int depth = 0;
            bool in_params = false;
            bool expect_param = false;
            for (; j < tokens.size(); ++j) {
                const Token& t = tokens[j];
                if (t.is_op("(") || t.is_op("[") || t.is_op("{")) {
                    ++depth;
                    if (depth == 1 && def.kind == DefinitionKind::function && t.is_op("(")) {
                        in_params = true;
                        expect_param = true;
                    }
                    continue;
                }
                if (t.is_op(")") || t.is_op("]") || t.is_op("}")) {
                    --depth;
                    if (depth == 0) in_params = false;
                    continue;
                }
                if (depth == 0 && t.is_op(":")) break;
                if (t.kind == TokenKind::newline) break;
                if (in_params && depth == 1) {
                    if (expect_param && t.kind == TokenKind::name) {
                        def.parameters.push_back(t.text);
                        expect_param = false;
                    } else if (t.is_op(",")) {
                        expect_param = true;
                    } else if (!t.is_op("*") && !t.is_op("**") && !t.is_op("/") && t.kind != TokenKind::nl &&
                               t.kind != TokenKind::comment) {
                        expect_param = false;
                    }
                }
            }
            for (std::size_t m = k; m <= j && m < tokens.size(); ++m) {
                def.end_line = std::max(def.end_line, tokens[m].end_line);
            }
            // One-line body when something other than a line break follows ':'.
            std::size_t after = j + 1;
            while (after < tokens.size() && tokens[after].kind == TokenKind::comment) ++after;
            const bool one_line = after < tokens.size() && tokens[after].kind != TokenKind::newline;

            scan.definitions.push_back(std::move(def));
            open.push_back(OpenDefinition{scan.definitions.size() - 1, one_line ? -1 : level + 1, !one_line});
            pending_decorator = 0;
            i = j;  // the ':' is consumed; body tokens update end lines
            continue;
        }
        pending_decorator = 0;

        if (level == 0 && (tok.is_name("import") || tok.is_name("from"))) {
            ImportStatement stmt;
            stmt.line = tok.line;
            std::size_t j = i;
            while (j < tokens.size() && tokens[j].kind != TokenKind::newline && !tokens[j].is_op(";")) {
                stmt.end_line = std::max(stmt.end_line, tokens[j].end_line);
                ++j;
            }
            stmt.bindings = tok.is_name("import") ? parse_plain_import(tokens, i + 1)
                                                  : parse_from_import(tokens, i + 1);
            const auto lines = split_lines(source);
            std::string text;
            for (int line = stmt.line; line <= stmt.end_line && line <= static_cast<int>(lines.size()); ++line) {
                if (!text.empty()) text += '\n';
                text += trim_right(lines[static_cast<std::size_t>(line - 1)]);
            }
            const auto first = text.find_first_not_of(" \t");
            stmt.text = first == std::string::npos ? text : text.substr(first);
            scan.imports.push_back(std::move(stmt));
        }
    }
    return scan;
}

std::vector<Reference> collect_references(std::span<const Token> tokens) {
    std::vector<Reference> refs;
    // Bracket stack entries record the opener and whether it is a def
    // parameter list.
    struct Frame {
        char open;
        bool params;
    };
    std::vector<Frame> frames;
    bool in_import = false;
    bool expect_param = false;
    int lambda_depth = -1;  // bracket depth at which a lambda parameter list is open
    bool after_def_keyword = false;
    bool def_has_params = false;
    bool pending_param_list = false;
    // Lambda parameter names with the bracket depth of their lambda.
    std::vector<std::pair<std::string, std::size_t>> lambda_names;
    auto end_lambdas_above = [&](std::size_t depth) {
        while (!lambda_names.empty() && lambda_names.back().second > depth) lambda_names.pop_back();
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& tok = tokens[i];
        if (tok.kind == TokenKind::newline) {
            in_import = false;
            lambda_depth = -1;
            lambda_names.clear();
            continue;
        }
        if (is_layout(tok) || tok.kind == TokenKind::string || tok.kind == TokenKind::number) {
            if (!is_layout(tok)) expect_param = false;
            continue;
        }
        const bool in_param_list = !frames.empty() && frames.back().params;
        if (tok.kind == TokenKind::op) {
            if (tok.is_op("(") || tok.is_op("[") || tok.is_op("{")) {
                frames.push_back(Frame{tok.text[0], pending_param_list && tok.is_op("(")});
                expect_param = frames.back().params;
                pending_param_list = false;
            } else if (tok.is_op(")") || tok.is_op("]") || tok.is_op("}")) {
                if (!frames.empty()) frames.pop_back();
                end_lambdas_above(frames.size());
                expect_param = false;
            } else if (tok.is_op(",")) {
                if (lambda_depth != static_cast<int>(frames.size())) {
                    // a comma at the lambda's own depth ends its body
                    while (!lambda_names.empty() && lambda_names.back().second == frames.size()) lambda_names.pop_back();
                }
                expect_param = in_param_list ||
                               (lambda_depth == static_cast<int>(frames.size()));
            } else if (tok.is_op(":") && lambda_depth == static_cast<int>(frames.size())) {
                lambda_depth = -1;
                expect_param = false;
            } else if (tok.is_op("*") || tok.is_op("**") || tok.is_op("/")) {
                // keeps expect_param
            } else {
                expect_param = false;
            }
            pending_param_list = false;
            continue;
        }
        // name token
        if (tok.is_name("import") || tok.is_name("from")) {
            const bool statement_head = i == 0 || tokens[i - 1].is_op(";") ||
                                        (is_layout(tokens[i - 1]) && tokens[i - 1].kind != TokenKind::endmarker);
            if (statement_head) {
                in_import = true;
                continue;
            }
        }
        if (tok.is_name("def") || tok.is_name("class")) {
            after_def_keyword = true;
            def_has_params = tok.is_name("def");
            continue;
        }
        if (tok.is_name("lambda")) {
            lambda_depth = static_cast<int>(frames.size());
            expect_param = true;
            continue;
        }
        if (after_def_keyword) {
            after_def_keyword = false;
            pending_param_list = def_has_params;
            continue;
        }
        if (in_import) continue;
        if (expect_param) {
            if (lambda_depth == static_cast<int>(frames.size())) lambda_names.emplace_back(tok.text, frames.size());
            expect_param = false;
            continue;
        }
        if (is_keyword(tok.text)) continue;
        if (i > 0 && tokens[i - 1].is_op(".")) continue;
        if (std::any_of(lambda_names.begin(), lambda_names.end(), [&](const auto& n) { return n.first == tok.text; })) {
            continue;
        }
        // keyword argument inside a call
        if (!frames.empty() && frames.back().open == '(' && i + 1 < tokens.size() && tokens[i + 1].is_op("=") &&
            i > 0 && (tokens[i - 1].is_op("(") || tokens[i - 1].is_op(","))) {
            continue;
        }

        Reference ref;
        ref.line = tok.line;
        ref.chain.push_back(tok.text);
        std::size_t j = i + 1;
        while (j + 1 < tokens.size() && tokens[j].is_op(".") && tokens[j + 1].kind == TokenKind::name) {
            ref.chain.push_back(tokens[j + 1].text);
            j += 2;
        }
        ref.is_call = j < tokens.size() && tokens[j].is_op("(");
        refs.push_back(std::move(ref));
        i = j - 1;
    }
    return refs;
}

std::vector<Reference> collect_references(std::string_view source) {
    const auto tokens = tokenize(source);
    return collect_references(tokens);
}

}  // namespace layerfix::pysrc
