#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/pysrc/tokenizer.hpp"

namespace layerfix::pysrc {

/// One name bound by an import statement.
///
///   import a.b.c          -> local "a",  module "a.b.c", binds_root
///   import a.b.c as x     -> local "x",  module "a.b.c"
///   from ..a import f as g -> local "g", module "a", member "f", level 2
struct ImportBinding {
    std::string local_name;
    std::string module;
    std::optional<std::string> member;
    int level = 0;
    bool binds_root = false;

    bool operator==(const ImportBinding&) const = default;
};

struct ImportStatement {
    std::string text;  // source lines of the statement, trailing whitespace trimmed
    int line = 0;
    int end_line = 0;
    std::vector<ImportBinding> bindings;
};

enum class DefinitionKind { function, class_type };

struct Definition {
    DefinitionKind kind = DefinitionKind::function;
    std::string name;
    std::string qualified_name;  // enclosing definitions joined by '.'
    int start_line = 0;          // first decorator line, or the def/class line
    int def_line = 0;
    int end_line = 0;
    int depth = 0;  // nesting depth among definitions, 0 = module level
    std::vector<std::string> parameters;
};

struct ModuleScan {
    std::vector<ImportStatement> imports;  // module-level only
    std::vector<Definition> definitions;   // source order, nested included
};

/// Module structure from tokens. Throws Error{parse} on lexical errors.
ModuleScan scan_module(std::string_view source);
ModuleScan scan_tokens(std::span<const Token> tokens, std::string_view source);

/// A dotted name chain used in code, e.g. {"os", "path", "join"}.
struct Reference {
    std::vector<std::string> chain;
    int line = 0;
    bool is_call = false;

    [[nodiscard]] std::string dotted() const;
};

/// Name chains read inside `source`, in order of appearance. Defined names,
/// parameters, lambda parameters and their uses in the lambda body,
/// keyword-argument names and names inside import statements are not
/// references. Attribute segments never start a
/// chain.
std::vector<Reference> collect_references(std::span<const Token> tokens);
std::vector<Reference> collect_references(std::string_view source);

/// Lines [first, last] (1-based inclusive) of `source`, original endings kept.
std::string slice_lines(std::string_view source, int first, int last);

}  // namespace layerfix::pysrc
