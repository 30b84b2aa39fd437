#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"
#include "layerfix/pysrc/module_scan.hpp"
#include "layerfix/repo/cooccurrence.hpp"

namespace layerfix::repo {

struct DefinitionSource {
    std::string qualified_name;  // "<module>.<definition path>", e.g. "pkg.util.Helper.run"
    std::string source;
    std::string file_path;  // repo-relative

    bool operator==(const DefinitionSource&) const = default;
};

struct DependencySet {
    std::vector<DefinitionSource> called_definitions;
    std::vector<DefinitionSource> caller_definitions;

    bool operator==(const DependencySet&) const = default;
};

/// Python sources of one checkout, read and scanned on demand. Module names
/// are computed relative to the first matching source root ("" is the
/// checkout itself). Not thread-safe; use one instance per bug.
class SourceTree {
public:
    explicit SourceTree(std::filesystem::path root, std::vector<std::string> source_roots = {"src", "lib", ""});

    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
    [[nodiscard]] bool exists(std::string_view rel_path) const;

    /// Error{not_found} for missing files.
    const std::string& source(const std::string& rel_path);
    /// Error{parse} naming the file on lexical errors.
    const pysrc::ModuleScan& scan(const std::string& rel_path);

    /// "src/pkg/mod.py" -> "pkg.mod"; "pkg/__init__.py" -> "pkg".
    [[nodiscard]] std::string module_name(std::string_view rel_path) const;
    /// The file defining `module` ("a/b.py" or "a/b/__init__.py"), if any.
    [[nodiscard]] std::optional<std::string> module_file(std::string_view module) const;
    /// True for packages without __init__.py too.
    [[nodiscard]] bool module_exists(std::string_view module) const;

private:
    std::filesystem::path root_;
    std::vector<std::string> source_roots_;
    std::map<std::string, std::string, std::less<>> sources_;
    std::map<std::string, pysrc::ModuleScan, std::less<>> scans_;
};

struct ResolvedName {
    std::string file_path;
    const pysrc::Definition* definition = nullptr;
    std::string qualified_name;
};

/// Resolves name chains through import bindings (plain, from, aliased,
/// relative, star, re-exports) and module-level definitions. A chain
/// resolves to its leftmost segment naming a definition, so `Cls.method`
/// yields `Cls` and `pkg.mod.func` yields `func`. Inside a method,
/// `self.x` / `cls.x` resolve to sibling methods of the enclosing class.
class NameResolver {
public:
    explicit NameResolver(SourceTree& tree) : tree_(tree) {}

    std::optional<ResolvedName> resolve(const std::string& file, std::span<const std::string> chain,
                                        std::string_view enclosing_class = {});

    /// Absolute module a binding imports from, after resolving relative levels.
    std::string absolute_module(const std::string& file, const pysrc::ImportBinding& binding) const;

private:
    std::optional<ResolvedName> resolve_binding(const std::string& file, const pysrc::ImportBinding& binding,
                                                std::span<const std::string> rest, int depth);
    std::optional<ResolvedName> resolve_in_module(const std::string& module, std::span<const std::string> rest,
                                                  int depth);
    std::optional<ResolvedName> top_level(const std::string& file, std::string_view name);

    SourceTree& tree_;
};

inline constexpr int kMaxReexportDepth = 5;

struct CalledDefinitions {
    std::vector<DefinitionSource> definitions;  // first-use order, unique qualified names
    std::vector<std::string> unresolved;        // dotted call targets outside the checkout, unique; builtins left out
};

/// Functions and classes referenced by the function at `span`, with their
/// full source. Recursion onto the function itself is excluded.
CalledDefinitions extract_called_definitions(SourceTree& tree, const FunctionSpan& span);

/// Definitions in the co-occurring files that call the function at `span`.
/// A call matches when it resolves to the function through imports, or,
/// for a method, when it is an attribute call on the method name in a file
/// that imports the method's class or module. Module-level calls have no
/// enclosing definition and are not reported.
std::vector<DefinitionSource> find_callers(SourceTree& tree, const FunctionSpan& span,
                                           std::span<const CoOccurrence> co_occurring);

void to_json(Json& j, const DefinitionSource& def);
void from_json(const Json& j, DefinitionSource& def);
void to_json(Json& j, const DependencySet& deps);
void from_json(const Json& j, DependencySet& deps);

}  // namespace layerfix::repo
