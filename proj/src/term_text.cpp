#include "fog/term_text.hpp"

#include "fog/errors.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fog {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

// x followed by digits only.
std::optional<VarIndex> as_variable(std::string_view s) {
    if (s.size() < 2 || s[0] != 'x') return std::nullopt;
    VarIndex v = 0;
    for (char c : s.substr(1)) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        if (v > 100000000U) throw ParseError("variable index too large: " + std::string(s));
        v = v * 10 + static_cast<VarIndex>(c - '0');
    }
    if (v == 0) throw ParseError("variable indices start at 1: " + std::string(s));
    return v;
}

class InlineParser {
public:
    InlineParser(const Signature& sig, std::string_view text) : sig_(sig), text_(text) {}

    TermGraph run() {
        const std::uint32_t root = term();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        graph_.roots.push_back(root);
        return std::move(graph_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " at column " + std::to_string(pos_ + 1) + " in '" +
                         std::string(text_) + "'");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::uint32_t number() {
        skip_ws();
        const std::size_t start = pos_;
        std::uint32_t v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + static_cast<std::uint32_t>(text_[pos_++] - '0');
            if (v > 100000000U) fail("number too large");
        }
        if (pos_ == start) fail("expected a number");
        return v;
    }

    std::uint32_t term() {
        skip_ws();
        if (eat('#')) {
            const std::uint32_t label = number();
            if (eat('=')) {
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == '#') fail("label must name a term");
                if (labels_.count(label) != 0) fail("label #" + std::to_string(label) + " defined twice");
                labels_.emplace(label, static_cast<std::uint32_t>(graph_.nodes.size()));
                return term();
            }
            auto it = labels_.find(label);
            if (it == labels_.end()) fail("undefined label #" + std::to_string(label));
            return it->second;
        }
        if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail("expected a term");
        const std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);

        const auto id = static_cast<std::uint32_t>(graph_.nodes.size());
        graph_.nodes.emplace_back();
        if (auto v = as_variable(name)) {
            graph_.nodes[id].is_var = true;
            graph_.nodes[id].label = *v;
            return id;
        }
        auto a = sig_.find(name);
        if (!a) fail("unknown nonterminal '" + std::string(name) + "'");
        graph_.nodes[id].label = *a;
        std::vector<GraphRef> args;
        if (eat('(')) {
            if (!eat(')')) {
                do {
                    args.push_back(GraphRef::local(term()));
                } while (eat(','));
                if (!eat(')')) fail("expected ',' or ')'");
            }
        }
        if (args.size() != sig_.arity(*a)) {
            fail("nonterminal " + std::string(name) + " expects " + std::to_string(sig_.arity(*a)) +
                 " arguments, got " + std::to_string(args.size()));
        }
        graph_.nodes[id].args = std::move(args);
        return id;
    }

    const Signature& sig_;
    std::string_view text_;
    std::size_t pos_ = 0;
    TermGraph graph_;
    std::map<std::uint32_t, std::uint32_t> labels_;
};

// Nodes that are the target of a back edge in a DFS from t; they get `#k=` labels.
std::unordered_set<TermId> back_edge_targets(const TermStore& ts, TermId t) {
    std::unordered_set<TermId> out;
    if (ts.is_finite(t)) return out;
    std::unordered_map<TermId, int> state;  // 1 = on stack, 2 = done
    struct Frame {
        TermId t;
        std::size_t next;
    };
    std::vector<Frame> stack{{t, 0}};
    state[t] = 1;
    while (!stack.empty()) {
        Frame& f = stack.back();
        auto kids = ts.children(f.t);
        if (f.next == kids.size()) {
            state[f.t] = 2;
            stack.pop_back();
            continue;
        }
        const TermId c = kids[f.next++];
        auto it = state.find(c);
        if (it == state.end()) {
            state[c] = 1;
            stack.push_back({c, 0});
        } else if (it->second == 1) {
            out.insert(c);
        }
    }
    return out;
}

}  // namespace

TermId parse_term(TermStore& ts, std::string_view text) {
    return ts.intern_graph(InlineParser(ts.signature(), text).run()).front();
}

std::string format_term(const TermStore& ts, TermId t) {
    const auto targets = back_edge_targets(ts, t);
    std::unordered_map<TermId, unsigned> label;
    std::string out;
    auto emit = [&](auto&& self, TermId u) -> void {
        if (ts.is_var(u)) {
            out += 'x' + std::to_string(ts.var_index(u));
            return;
        }
        if (auto it = label.find(u); it != label.end()) {
            out += '#' + std::to_string(it->second);
            return;
        }
        if (targets.count(u) != 0) {
            const auto k = static_cast<unsigned>(label.size() + 1);
            label.emplace(u, k);
            out += '#' + std::to_string(k) + '=';
        }
        out += ts.signature().name(ts.head(u));
        if (ts.arity(u) == 0) return;
        out += '(';
        bool first = true;
        for (TermId c : ts.children(u)) {
            if (!first) out += ',';
            first = false;
            self(self, c);
        }
        out += ')';
    };
    emit(emit, t);
    return out;
}

NamedTerms parse_term_graph(TermStore& ts, std::string_view text) {
    const Signature& sig = ts.signature();
    struct PendingNode {
        bool is_var = false;
        std::uint32_t label = 0;
        std::vector<std::string> args;
        int line = 0;
    };
    std::map<std::string, std::uint32_t> index;
    std::vector<PendingNode> pending;
    std::vector<std::pair<std::string, std::pair<std::string, int>>> roots;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected '='", line_no);
        const std::string lhs = trim(line.substr(0, eq));
        const std::string rhs = trim(line.substr(eq + 1));
        std::istringstream lhs_in(lhs);
        std::string keyword, name, extra;
        lhs_in >> keyword >> name >> extra;
        if (name.empty() || !extra.empty()) throw ParseError("expected 'node <ident>' or 'root <name>'", line_no);
        if (keyword == "root") {
            roots.push_back({name, {rhs, line_no}});
            continue;
        }
        if (keyword != "node") throw ParseError("unknown keyword '" + keyword + "'", line_no);
        if (as_variable(name)) throw ParseError("node ident '" + name + "' looks like a variable", line_no);
        if (index.count(name) != 0) throw ParseError("node '" + name + "' defined twice", line_no);
        PendingNode node;
        node.line = line_no;
        if (auto v = as_variable(rhs)) {
            node.is_var = true;
            node.label = *v;
        } else {
            const auto open = rhs.find('(');
            const std::string head = trim(rhs.substr(0, open));
            auto a = sig.find(head);
            if (!a) throw ParseError("unknown nonterminal '" + head + "'", line_no);
            node.label = *a;
            if (open != std::string::npos) {
                if (rhs.back() != ')') throw ParseError("expected ')'", line_no);
                const std::string inner = trim(rhs.substr(open + 1, rhs.size() - open - 2));
                if (!inner.empty()) {
                    std::istringstream args_in(inner);
                    std::string arg;
                    while (std::getline(args_in, arg, ',')) {
                        arg = trim(arg);
                        if (arg.empty()) throw ParseError("empty argument", line_no);
                        node.args.push_back(arg);
                    }
                }
            }
            if (node.args.size() != sig.arity(*a)) {
                throw ParseError("arity mismatch for " + head + " (expected " +
                                     std::to_string(sig.arity(*a)) + ", got " +
                                     std::to_string(node.args.size()) + ")",
                                 line_no);
            }
        }
        index.emplace(name, static_cast<std::uint32_t>(pending.size()));
        pending.push_back(std::move(node));
    }

    TermGraph g;
    std::map<VarIndex, std::uint32_t> var_nodes;
    g.nodes.resize(pending.size());
    auto var_node = [&](VarIndex v) {
        auto [it, fresh] = var_nodes.emplace(v, static_cast<std::uint32_t>(g.nodes.size()));
        if (fresh) {
            GraphNode n;
            n.is_var = true;
            n.label = v;
            g.nodes.push_back(n);
        }
        return it->second;
    };
    for (std::size_t i = 0; i < pending.size(); ++i) {
        g.nodes[i].is_var = pending[i].is_var;
        g.nodes[i].label = pending[i].label;
        for (const std::string& arg : pending[i].args) {
            if (auto v = as_variable(arg)) {
                const std::uint32_t target = var_node(*v);  // may grow g.nodes
                g.nodes[i].args.push_back(GraphRef::local(target));
                continue;
            }
            auto it = index.find(arg);
            if (it == index.end()) throw ParseError("dangling reference '" + arg + "'", pending[i].line);
            g.nodes[i].args.push_back(GraphRef::local(it->second));
        }
    }
    if (roots.empty()) throw ParseError("no root designated");
    for (const auto& [name, target] : roots) {
        auto it = index.find(target.first);
        if (it == index.end()) throw ParseError("root refers to unknown node '" + target.first + "'", target.second);
        g.roots.push_back(it->second);
    }
    const std::vector<TermId> ids = ts.intern_graph(g);
    NamedTerms out;
    for (std::size_t i = 0; i < roots.size(); ++i) out.emplace_back(roots[i].first, ids[i]);
    return out;
}

std::string format_term_graph(const TermStore& ts, const NamedTerms& roots) {
    std::vector<TermId> ids;
    for (const auto& r : roots) ids.push_back(r.second);
    const std::vector<TermId> nodes = subterms(ts, ids);
    std::unordered_map<TermId, std::string> name;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!ts.is_var(nodes[i])) name.emplace(nodes[i], "n" + std::to_string(name.size() + 1));
    }
    std::string out;
    for (TermId u : nodes) {
        if (ts.is_var(u)) continue;
        out += "node " + name.at(u) + " = " + ts.signature().name(ts.head(u));
        if (ts.arity(u) > 0) {
            out += '(';
            bool first = true;
            for (TermId c : ts.children(u)) {
                if (!first) out += ", ";
                first = false;
                out += ts.is_var(c) ? "x" + std::to_string(ts.var_index(c)) : name.at(c);
            }
            out += ')';
        }
        out += '\n';
    }
    std::unordered_set<TermId> var_roots;
    for (const auto& [root_name, id] : roots) {
        if (ts.is_var(id)) {
            const std::string v = "v" + std::to_string(ts.var_index(id));
            if (var_roots.insert(id).second) {
                out += "node " + v + " = x" + std::to_string(ts.var_index(id)) + '\n';
            }
            out += "root " + root_name + " = " + v + '\n';
        } else {
            out += "root " + root_name + " = " + name.at(id) + '\n';
        }
    }
    return out;
}

}  // namespace fog
