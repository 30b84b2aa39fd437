#include "layerfix/repo/dependencies.hpp"

#include <algorithm>
#include <set>

#include "layerfix/core/error.hpp"

namespace layerfix::repo {
namespace {

namespace fs = std::filesystem;

bool is_builtin_function(std::string_view name) {
    static const std::set<std::string_view> names{
        "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray", "bytes", "callable",
        "chr", "classmethod", "compile", "complex", "delattr", "dict", "dir", "divmod", "enumerate", "eval", "exec",
        "filter", "float", "format", "frozenset", "getattr", "globals", "hasattr", "hash", "hex", "id", "input",
        "int", "isinstance", "issubclass", "iter", "len", "list", "locals", "map", "max", "memoryview", "min", "next",
        "object", "oct", "open", "ord", "pow", "print", "property", "range", "repr", "reversed", "round", "set",
        "setattr", "slice", "sorted", "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip"};
    return names.contains(name);
}

std::vector<std::string> split_dots(std::string_view dotted) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const auto dot = dotted.find('.', start);
        const auto end = dot == std::string_view::npos ? dotted.size() : dot;
        if (end > start) parts.emplace_back(dotted.substr(start, end - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

std::string join_dots(std::span<const std::string> parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += '.';
        out += p;
    }
    return out;
}

std::string parent_name(std::string_view qualified) {
    const auto dot = qualified.rfind('.');
    return dot == std::string_view::npos ? std::string{} : std::string(qualified.substr(0, dot));
}

std::string last_segment(std::string_view qualified) {
    const auto dot = qualified.rfind('.');
    return std::string(dot == std::string_view::npos ? qualified : qualified.substr(dot + 1));
}

const pysrc::Definition* find_definition(const pysrc::ModuleScan& scan, std::string_view qualified) {
    for (const auto& d : scan.definitions) {
        if (d.qualified_name == qualified) return &d;
    }
    return nullptr;
}

// Innermost definition whose lines contain `line`.
const pysrc::Definition* enclosing_definition(const pysrc::ModuleScan& scan, int line) {
    const pysrc::Definition* best = nullptr;
    for (const auto& d : scan.definitions) {
        if (d.start_line <= line && line <= d.end_line && (best == nullptr || d.depth > best->depth)) best = &d;
    }
    return best;
}

// Class owning `def`, when `def` is a method.
std::string owning_class(const pysrc::ModuleScan& scan, const pysrc::Definition* def) {
    if (def == nullptr) return {};
    const std::string parent = parent_name(def->qualified_name);
    const auto* owner = parent.empty() ? nullptr : find_definition(scan, parent);
    return owner != nullptr && owner->kind == pysrc::DefinitionKind::class_type ? parent : std::string{};
}

std::string definition_source(SourceTree& tree, const std::string& file, const pysrc::Definition& def) {
    return pysrc::slice_lines(tree.source(file), def.start_line, def.end_line);
}

}  // namespace

SourceTree::SourceTree(fs::path root, std::vector<std::string> source_roots)
    : root_(std::move(root)), source_roots_(std::move(source_roots)) {
    if (std::find(source_roots_.begin(), source_roots_.end(), "") == source_roots_.end()) source_roots_.emplace_back();
}

bool SourceTree::exists(std::string_view rel_path) const {
    std::error_code ec;
    return fs::is_regular_file(root_ / fs::path(rel_path), ec);
}

const std::string& SourceTree::source(const std::string& rel_path) {
    if (const auto it = sources_.find(rel_path); it != sources_.end()) return it->second;
    if (!exists(rel_path)) throw Error(ErrorKind::not_found, "source file not found: " + rel_path);
    return sources_.emplace(rel_path, read_file(root_ / rel_path)).first->second;
}

const pysrc::ModuleScan& SourceTree::scan(const std::string& rel_path) {
    if (const auto it = scans_.find(rel_path); it != scans_.end()) return it->second;
    try {
        return scans_.emplace(rel_path, pysrc::scan_module(source(rel_path))).first->second;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::parse) throw;
        throw Error(ErrorKind::parse, rel_path + ": " + e.what());
    }
}

std::string SourceTree::module_name(std::string_view rel_path) const {
    std::string path(rel_path);
    for (const auto& root : source_roots_) {
        if (root.empty()) continue;
        const std::string prefix = root + "/";
        std::error_code ec;
        if (path.rfind(prefix, 0) == 0 && !fs::exists(root_ / root / "__init__.py", ec)) {
            path = path.substr(prefix.size());
            break;
        }
    }
    if (path.size() > 3 && path.ends_with(".py")) path.resize(path.size() - 3);
    if (path == "__init__") return {};
    if (path.ends_with("/__init__")) path.resize(path.size() - 9);
    std::replace(path.begin(), path.end(), '/', '.');
    return path;
}

std::optional<std::string> SourceTree::module_file(std::string_view module) const {
    if (module.empty()) return std::nullopt;
    std::string rel(module);
    std::replace(rel.begin(), rel.end(), '.', '/');
    for (const auto& root : source_roots_) {
        const std::string base = root.empty() ? rel : root + "/" + rel;
        if (exists(base + ".py")) return base + ".py";
        if (exists(base + "/__init__.py")) return base + "/__init__.py";
    }
    return std::nullopt;
}

bool SourceTree::module_exists(std::string_view module) const {
    if (module.empty()) return false;
    if (module_file(module)) return true;
    std::string rel(module);
    std::replace(rel.begin(), rel.end(), '.', '/');
    for (const auto& root : source_roots_) {
        std::error_code ec;
        if (fs::is_directory(root_ / (root.empty() ? rel : root + "/" + rel), ec)) return true;
    }
    return false;
}

std::string NameResolver::absolute_module(const std::string& file, const pysrc::ImportBinding& binding) const {
    if (binding.level == 0) return binding.module;
    auto package = split_dots(tree_.module_name(file));
    if (!file.ends_with("__init__.py") && !package.empty()) package.pop_back();
    for (int i = 1; i < binding.level && !package.empty(); ++i) package.pop_back();
    if (!binding.module.empty()) {
        for (auto& part : split_dots(binding.module)) package.push_back(std::move(part));
    }
    return join_dots(package);
}

std::optional<ResolvedName> NameResolver::top_level(const std::string& file, std::string_view name) {
    const auto& scan = tree_.scan(file);
    const pysrc::Definition* found = nullptr;
    for (const auto& d : scan.definitions) {
        if (d.depth == 0 && d.name == name) found = &d;  // later definitions shadow earlier ones
    }
    if (found == nullptr) return std::nullopt;
    const std::string module = tree_.module_name(file);
    return ResolvedName{file, found, module.empty() ? found->qualified_name : module + "." + found->qualified_name};
}

std::optional<ResolvedName> NameResolver::resolve_in_module(const std::string& module,
                                                            std::span<const std::string> rest, int depth) {
    if (rest.empty() || depth > kMaxReexportDepth) return std::nullopt;
    const auto file = tree_.module_file(module);
    if (file) {
        if (auto def = top_level(*file, rest.front())) return def;
    }
    const std::string sub = module + "." + rest.front();
    if (tree_.module_exists(sub)) return resolve_in_module(sub, rest.subspan(1), depth);
    if (!file) return std::nullopt;

    const auto& scan = tree_.scan(*file);
    for (auto stmt = scan.imports.rbegin(); stmt != scan.imports.rend(); ++stmt) {
        for (const auto& binding : stmt->bindings) {
            if (binding.local_name == rest.front()) return resolve_binding(*file, binding, rest.subspan(1), depth + 1);
        }
    }
    for (const auto& stmt : scan.imports) {
        for (const auto& binding : stmt.bindings) {
            if (binding.local_name != "*") continue;
            if (auto hit = resolve_in_module(absolute_module(*file, binding), rest, depth + 1)) return hit;
        }
    }
    return std::nullopt;
}

std::optional<ResolvedName> NameResolver::resolve_binding(const std::string& file, const pysrc::ImportBinding& binding,
                                                          std::span<const std::string> rest, int depth) {
    if (depth > kMaxReexportDepth) return std::nullopt;
    const std::string base = absolute_module(file, binding);
    if (binding.member) {
        std::vector<std::string> chain{*binding.member};
        chain.insert(chain.end(), rest.begin(), rest.end());
        return resolve_in_module(base, chain, depth);
    }
    // `import a.b.c` binds `a`; `import a.b.c as x` binds the whole module.
    const std::string module = binding.binds_root ? base.substr(0, base.find('.')) : base;
    return resolve_in_module(module, rest, depth);
}

std::optional<ResolvedName> NameResolver::resolve(const std::string& file, std::span<const std::string> chain,
                                                  std::string_view enclosing_class) {
    if (chain.empty()) return std::nullopt;
    const auto& scan = tree_.scan(file);
    const std::string& head = chain.front();

    if ((head == "self" || head == "cls") && !enclosing_class.empty()) {
        if (chain.size() < 2) return std::nullopt;
        const std::string qualified = std::string(enclosing_class) + "." + chain[1];
        const auto* def = find_definition(scan, qualified);
        if (def == nullptr) return std::nullopt;
        const std::string module = tree_.module_name(file);
        return ResolvedName{file, def, module.empty() ? qualified : module + "." + qualified};
    }
    for (auto stmt = scan.imports.rbegin(); stmt != scan.imports.rend(); ++stmt) {
        for (const auto& binding : stmt->bindings) {
            if (binding.local_name == head) return resolve_binding(file, binding, chain.subspan(1), 0);
        }
    }
    if (auto def = top_level(file, head)) return def;
    for (const auto& stmt : scan.imports) {
        for (const auto& binding : stmt.bindings) {
            if (binding.local_name != "*") continue;
            if (auto hit = resolve_in_module(absolute_module(file, binding), chain, 1)) return hit;
        }
    }
    return std::nullopt;
}

CalledDefinitions extract_called_definitions(SourceTree& tree, const FunctionSpan& span) {
    const auto& scan = tree.scan(span.file_path);
    const auto* self = find_definition(scan, span.qualified_name);
    const std::string enclosing_class = owning_class(scan, self);
    const std::string body = pysrc::slice_lines(tree.source(span.file_path), span.start_line, span.end_line);

    NameResolver resolver(tree);
    CalledDefinitions result;
    std::set<std::string> seen_defs;
    std::set<std::string> seen_unresolved;
    for (const auto& ref : pysrc::collect_references(body)) {
        // Parameters shadow module-level names; self/cls chains resolve through the class.
        if (self != nullptr && ref.chain.front() != "self" && ref.chain.front() != "cls" &&
            std::find(self->parameters.begin(), self->parameters.end(), ref.chain.front()) != self->parameters.end()) {
            continue;
        }
        const auto hit = resolver.resolve(span.file_path, ref.chain, enclosing_class);
        if (!hit) {
            if (ref.chain.size() == 1 && is_builtin_function(ref.chain.front())) continue;
            if (ref.is_call && seen_unresolved.insert(ref.dotted()).second) result.unresolved.push_back(ref.dotted());
            continue;
        }
        if (hit->file_path == span.file_path && hit->definition->qualified_name == span.qualified_name) continue;
        if (!seen_defs.insert(hit->qualified_name).second) continue;
        result.definitions.push_back(
            DefinitionSource{hit->qualified_name, definition_source(tree, hit->file_path, *hit->definition), hit->file_path});
    }
    return result;
}

std::vector<DefinitionSource> find_callers(SourceTree& tree, const FunctionSpan& span,
                                           std::span<const CoOccurrence> co_occurring) {
    const auto& target_scan = tree.scan(span.file_path);
    const std::string target_module = tree.module_name(span.file_path);
    const std::string terminal = last_segment(span.qualified_name);
    const std::string target_class = owning_class(target_scan, find_definition(target_scan, span.qualified_name));

    NameResolver resolver(tree);
    auto is_target = [&](const std::optional<ResolvedName>& hit, const std::string& qualified) {
        return hit && hit->file_path == span.file_path && hit->definition->qualified_name == qualified;
    };
    // Whether `file` imports the target module, or the class owning the target method.
    auto imports_target = [&](const std::string& file) {
        for (const auto& stmt : tree.scan(file).imports) {
            for (const auto& binding : stmt.bindings) {
                const std::string base = resolver.absolute_module(file, binding);
                if (!binding.member && base == target_module) return true;
                if (binding.member && base + "." + *binding.member == target_module) return true;
                if (binding.member && binding.local_name != "*" &&
                    is_target(resolver.resolve(file, std::vector<std::string>{binding.local_name}), target_class)) {
                    return true;
                }
            }
        }
        return false;
    };

    std::vector<DefinitionSource> callers;
    std::set<std::string> seen;
    for (const auto& entry : co_occurring) {
        const std::string& file = entry.file_path;
        if (file == span.file_path || !file.ends_with(".py") || !tree.exists(file)) continue;
        const auto& scan = tree.scan(file);
        std::optional<bool> file_imports_target;
        for (const auto& ref : pysrc::collect_references(tree.source(file))) {
            if (!ref.is_call || ref.chain.back() != terminal) continue;
            const auto* enclosing = enclosing_definition(scan, ref.line);
            if (enclosing == nullptr) continue;
            const auto hit = resolver.resolve(file, ref.chain, owning_class(scan, enclosing));
            bool matched = is_target(hit, span.qualified_name);
            if (!matched && !target_class.empty() && ref.chain.size() >= 2) {
                if (!hit || is_target(hit, target_class)) {
                    if (!file_imports_target) file_imports_target = imports_target(file);
                    matched = *file_imports_target;
                }
            }
            if (!matched) continue;
            const std::string module = tree.module_name(file);
            std::string qualified = module.empty() ? enclosing->qualified_name : module + "." + enclosing->qualified_name;
            if (!seen.insert(qualified).second) continue;
            callers.push_back(DefinitionSource{std::move(qualified), definition_source(tree, file, *enclosing), file});
        }
    }
    return callers;
}

void to_json(Json& j, const DefinitionSource& def) {
    j = Json{{"qualified_name", def.qualified_name}, {"source", def.source}, {"file_path", def.file_path}};
}

void from_json(const Json& j, DefinitionSource& def) {
    j.at("qualified_name").get_to(def.qualified_name);
    j.at("source").get_to(def.source);
    j.at("file_path").get_to(def.file_path);
}

void to_json(Json& j, const DependencySet& deps) {
    j = Json{{"called_definitions", deps.called_definitions}, {"caller_definitions", deps.caller_definitions}};
}

void from_json(const Json& j, DependencySet& deps) {
    j.at("called_definitions").get_to(deps.called_definitions);
    j.at("caller_definitions").get_to(deps.caller_definitions);
}

}  // namespace layerfix::repo
