#include "fog/terms.hpp"

#include "fog/errors.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

namespace fog {

namespace {

constexpr TermId kEmpty = std::numeric_limits<TermId>::max();
constexpr std::uint32_t kNoHeight = std::numeric_limits<std::uint32_t>::max();

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
    return h ^ (h >> 31);
}

// Iterative Tarjan; components come out sinks first.
std::vector<std::vector<std::uint32_t>> tarjan_sccs(const TermGraph& g) {
    const auto n = static_cast<std::uint32_t>(g.nodes.size());
    constexpr std::uint32_t unvisited = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    std::vector<std::vector<std::uint32_t>> out;
    std::uint32_t counter = 0;

    struct Frame {
        std::uint32_t v;
        std::size_t next;
    };
    std::vector<Frame> calls;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        calls.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!calls.empty()) {
            Frame& f = calls.back();
            const auto& args = g.nodes[f.v].args;
            if (f.next < args.size()) {
                const GraphRef ref = args[f.next++];
                if (ref.kind != GraphRef::Kind::local) continue;
                const std::uint32_t w = ref.value;
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    calls.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            const std::uint32_t v = f.v;
            calls.pop_back();
            if (!calls.empty()) {
                low[calls.back().v] = std::min(low[calls.back().v], low[v]);
            }
            if (low[v] == index[v]) {
                std::vector<std::uint32_t> comp;
                std::uint32_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
        }
    }
    return out;
}

}  // namespace

// ── Signature ──

NontermId Signature::add(std::string name, unsigned arity) {
    if (index_.count(name) != 0) throw ValidationError("duplicate nonterminal '" + name + "'");
    const auto id = static_cast<NontermId>(names_.size());
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    arities_.push_back(arity);
    return id;
}

std::optional<NontermId> Signature::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

unsigned Signature::max_arity() const {
    unsigned m = 0;
    for (unsigned a : arities_) m = std::max(m, a);
    return m;
}

// ── TermStore ──

TermStore::TermStore(Signature sig) : sig_(std::move(sig)), slots_(1024, kEmpty) {}

std::uint64_t TermStore::hash_node(bool is_var, std::uint32_t label,
                                   std::span<const TermId> kids) const {
    std::uint64_t h = mix(is_var ? 0x51ULL : 0xa7ULL, label);
    for (TermId k : kids) h = mix(h, k);
    return h;
}

bool TermStore::same_node(TermId t, bool is_var, std::uint32_t label,
                          std::span<const TermId> kids) const {
    const Node& n = nodes_[t];
    if (n.is_var != is_var || n.label != label || n.arity != kids.size()) return false;
    return std::equal(kids.begin(), kids.end(), kids_.begin() + n.first);
}

void TermStore::table_insert(TermId t, std::uint64_t h) {
    const std::size_t mask = slots_.size() - 1;
    std::size_t i = h & mask;
    while (slots_[i] != kEmpty) i = (i + 1) & mask;
    slots_[i] = t;
    ++used_slots_;
}

void TermStore::grow_table() {
    slots_.assign(slots_.size() * 2, kEmpty);
    used_slots_ = 0;
    for (TermId t = 0; t < nodes_.size(); ++t) {
        const Node& n = nodes_[t];
        table_insert(t, hash_node(n.is_var, n.label, children(t)));
    }
}

TermId TermStore::lookup_or_add(bool is_var, std::uint32_t label, std::span<const TermId> kids) {
    const std::uint64_t h = hash_node(is_var, label, kids);
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = h & mask; slots_[i] != kEmpty; i = (i + 1) & mask) {
        if (same_node(slots_[i], is_var, label, kids)) return slots_[i];
    }
    // kids may alias kids_, so copy before growing it.
    std::vector<TermId> copy(kids.begin(), kids.end());
    Node n;
    n.is_var = is_var;
    n.label = label;
    n.first = static_cast<std::uint32_t>(kids_.size());
    n.arity = static_cast<std::uint32_t>(copy.size());
    std::uint32_t h_max = 0;
    for (TermId k : copy) {
        if (nodes_[k].infinite) n.infinite = true;
        else h_max = std::max(h_max, nodes_[k].height);
    }
    n.height = n.infinite ? kNoHeight : (copy.empty() ? 0 : h_max + 1);
    kids_.insert(kids_.end(), copy.begin(), copy.end());
    const auto id = static_cast<TermId>(nodes_.size());
    nodes_.push_back(n);
    if (2 * (used_slots_ + 1) > slots_.size()) grow_table();
    table_insert(id, h);
    return id;
}

TermId TermStore::var(VarIndex i) {
    if (i == 0) throw ValidationError("variable indices start at 1");
    return lookup_or_add(true, i, {});
}

TermId TermStore::app(NontermId a, std::span<const TermId> children) {
    if (a >= sig_.size()) throw ValidationError("unknown nonterminal id " + std::to_string(a));
    if (children.size() != sig_.arity(a)) {
        throw ValidationError("nonterminal " + sig_.name(a) + " expects " +
                              std::to_string(sig_.arity(a)) + " arguments, got " +
                              std::to_string(children.size()));
    }
    for (TermId c : children) {
        if (c >= nodes_.size()) throw ValidationError("dangling term id " + std::to_string(c));
    }
    return lookup_or_add(false, a, children);
}

std::size_t TermStore::height(TermId t) const {
    if (nodes_[t].infinite) throw PreconditionError("height is undefined for an infinite term");
    return nodes_[t].height;
}

void TermStore::validate(const TermGraph& g) const {
    const std::size_t n = g.nodes.size();
    for (std::size_t v = 0; v < n; ++v) {
        const GraphNode& node = g.nodes[v];
        const std::string where = "graph node " + std::to_string(v);
        if (node.is_var) {
            if (node.label == 0) throw ValidationError(where + ": variable index must be positive");
            if (!node.args.empty()) throw ValidationError(where + ": variable with successors");
        } else {
            if (node.label >= sig_.size()) throw ValidationError(where + ": unknown nonterminal");
            if (node.args.size() != sig_.arity(node.label)) {
                throw ValidationError(where + ": arity mismatch for " + sig_.name(node.label) +
                                      " (expected " + std::to_string(sig_.arity(node.label)) +
                                      ", got " + std::to_string(node.args.size()) + ")");
            }
        }
        for (const GraphRef& r : node.args) {
            if (r.kind == GraphRef::Kind::local ? r.value >= n : r.value >= nodes_.size()) {
                throw ValidationError(where + ": dangling reference");
            }
        }
    }
    for (std::uint32_t r : g.roots) {
        if (r >= n) throw ValidationError("root refers to a missing node");
    }
}

std::vector<TermId> TermStore::intern_graph(const TermGraph& g) {
    std::vector<TermId> all = intern_graph_nodes(g);
    std::vector<TermId> out;
    out.reserve(g.roots.size());
    for (std::uint32_t r : g.roots) out.push_back(all[r]);
    return out;
}

std::vector<TermId> TermStore::intern_graph_nodes(const TermGraph& g) {
    validate(g);
    std::vector<TermId> resolved(g.nodes.size(), kEmpty);
    std::vector<TermId> kids;
    for (const auto& comp : tarjan_sccs(g)) {
        const std::uint32_t v = comp.front();
        bool self_loop = false;
        for (const GraphRef& r : g.nodes[v].args) {
            if (r.kind == GraphRef::Kind::local && r.value == v) self_loop = true;
        }
        if (comp.size() > 1 || self_loop) {
            intern_cycle(g, comp, resolved);
            continue;
        }
        const GraphNode& node = g.nodes[v];
        if (node.is_var) {
            resolved[v] = var(node.label);
            continue;
        }
        kids.clear();
        for (const GraphRef& r : node.args) {
            kids.push_back(r.kind == GraphRef::Kind::local ? resolved[r.value] : r.value);
        }
        resolved[v] = lookup_or_add(false, node.label, kids);
    }
    return resolved;
}

// Interns one strongly connected component whose successors outside the component
// are already resolved. The component is minimized together with every stored node
// it can reach, so members equal to existing terms collapse onto them; otherwise the
// minimized component is matched against previously stored cycles by a canonical
// breadth-first encoding.
void TermStore::intern_cycle(const TermGraph& g, const std::vector<std::uint32_t>& members,
                             std::vector<TermId>& resolved) {
    const auto nm = static_cast<std::uint32_t>(members.size());
    std::unordered_map<std::uint32_t, std::uint32_t> local_pos;
    for (std::uint32_t i = 0; i < nm; ++i) local_pos.emplace(members[i], i);

    // Universe: members first, then reachable stored nodes.
    std::vector<TermId> stored;
    std::unordered_map<TermId, std::uint32_t> stored_pos;
    auto add_stored = [&](TermId t) {
        if (stored_pos.count(t) != 0) return;
        std::vector<TermId> todo{t};
        while (!todo.empty()) {
            TermId u = todo.back();
            todo.pop_back();
            if (!stored_pos.emplace(u, nm + static_cast<std::uint32_t>(stored.size())).second) continue;
            stored.push_back(u);
            for (TermId c : children(u)) {
                if (stored_pos.count(c) == 0) todo.push_back(c);
            }
        }
    };
    auto ref_target = [&](const GraphRef& r) -> std::pair<bool, std::uint32_t> {
        if (r.kind == GraphRef::Kind::local) {
            auto it = local_pos.find(r.value);
            if (it != local_pos.end()) return {true, it->second};
            return {false, resolved[r.value]};
        }
        return {false, r.value};
    };
    for (std::uint32_t m : members) {
        for (const GraphRef& r : g.nodes[m].args) {
            auto [is_local, val] = ref_target(r);
            if (!is_local) add_stored(val);
        }
    }

    const std::size_t nu = nm + stored.size();
    std::vector<std::uint64_t> key(nu);
    std::vector<std::vector<std::uint32_t>> succ(nu);
    for (std::uint32_t i = 0; i < nm; ++i) {
        const GraphNode& node = g.nodes[members[i]];
        key[i] = (static_cast<std::uint64_t>(node.label) << 1U) | (node.is_var ? 1U : 0U);
        for (const GraphRef& r : node.args) {
            auto [is_local, val] = ref_target(r);
            succ[i].push_back(is_local ? val : stored_pos.at(val));
        }
    }
    for (std::size_t j = 0; j < stored.size(); ++j) {
        const Node& n = nodes_[stored[j]];
        key[nm + j] = (static_cast<std::uint64_t>(n.label) << 1U) | (n.is_var ? 1U : 0U);
        for (TermId c : children(stored[j])) succ[nm + j].push_back(stored_pos.at(c));
    }

    // Moore-style refinement to the coarsest stable partition.
    std::vector<std::uint32_t> cls(nu);
    std::size_t num_classes = 0;
    {
        std::map<std::uint64_t, std::uint32_t> ids;
        for (std::size_t u = 0; u < nu; ++u) {
            auto [it, fresh] = ids.emplace(key[u], static_cast<std::uint32_t>(ids.size()));
            cls[u] = it->second;
        }
        num_classes = ids.size();
    }
    for (;;) {
        std::map<std::vector<std::uint32_t>, std::uint32_t> ids;
        std::vector<std::uint32_t> next(nu);
        std::vector<std::uint32_t> sig;
        for (std::size_t u = 0; u < nu; ++u) {
            sig.assign(1, cls[u]);
            for (std::uint32_t s : succ[u]) sig.push_back(cls[s]);
            auto [it, fresh] = ids.emplace(sig, static_cast<std::uint32_t>(ids.size()));
            next[u] = it->second;
        }
        cls.swap(next);
        if (ids.size() == num_classes) break;
        num_classes = ids.size();
    }

    std::vector<TermId> rep(num_classes, kEmpty);
    for (std::size_t j = 0; j < stored.size(); ++j) {
        TermId& r = rep[cls[nm + j]];
        if (r != kEmpty) throw InvariantError("term store lost minimality");
        r = stored[j];
    }

    // Quotient of the members that did not collapse onto stored nodes.
    std::vector<std::uint32_t> qclasses;
    std::unordered_map<std::uint32_t, std::uint32_t> qindex;
    std::vector<std::uint32_t> qwitness;  // a universe node per quotient class
    for (std::uint32_t i = 0; i < nm; ++i) {
        if (rep[cls[i]] != kEmpty) continue;
        if (qindex.emplace(cls[i], static_cast<std::uint32_t>(qclasses.size())).second) {
            qclasses.push_back(cls[i]);
            qwitness.push_back(i);
        }
    }
    if (!qclasses.empty()) {
        const auto nq = static_cast<std::uint32_t>(qclasses.size());
        auto encode_from = [&](std::uint32_t start) {
            std::string out;
            std::vector<std::uint32_t> order{start};
            std::unordered_map<std::uint32_t, std::uint32_t> num{{start, 0}};
            for (std::size_t k = 0; k < order.size(); ++k) {
                const std::uint32_t u = qwitness[order[k]];
                out += std::to_string(key[u]);
                out += '(';
                for (std::uint32_t s : succ[u]) {
                    const TermId r = rep[cls[s]];
                    if (r != kEmpty) {
                        out += 'S' + std::to_string(r);
                    } else {
                        const std::uint32_t q = qindex.at(cls[s]);
                        auto [it, fresh] = num.emplace(q, static_cast<std::uint32_t>(order.size()));
                        if (fresh) order.push_back(q);
                        out += 'L' + std::to_string(it->second);
                    }
                    out += ',';
                }
                out += ')';
            }
            return std::make_pair(out, order.size());
        };

        std::vector<TermId> qid(nq, kEmpty);
        auto [enc0, reach0] = encode_from(0);
        if (reach0 != nq) throw InvariantError("cyclic component does not stay strongly connected");
        auto found = cyclic_index_.find(enc0);
        if (found != cyclic_index_.end()) {
            qid[0] = found->second;
            std::vector<std::uint32_t> todo{0};
            while (!todo.empty()) {
                const std::uint32_t q = todo.back();
                todo.pop_back();
                const std::uint32_t u = qwitness[q];
                auto kids_of = children(qid[q]);
                for (std::size_t c = 0; c < succ[u].size(); ++c) {
                    if (rep[cls[succ[u][c]]] != kEmpty) continue;
                    const std::uint32_t q2 = qindex.at(cls[succ[u][c]]);
                    if (qid[q2] == kEmpty) {
                        qid[q2] = kids_of[c];
                        todo.push_back(q2);
                    } else if (qid[q2] != kids_of[c]) {
                        throw InvariantError("cycle encoding matched an inconsistent component");
                    }
                }
            }
        } else {
            for (std::uint32_t q = 0; q < nq; ++q) {
                qid[q] = static_cast<TermId>(nodes_.size() + q);
            }
            for (std::uint32_t q = 0; q < nq; ++q) {
                const std::uint32_t u = qwitness[q];
                Node n;
                n.is_var = false;
                n.label = static_cast<std::uint32_t>(key[u] >> 1U);
                n.first = static_cast<std::uint32_t>(kids_.size());
                n.arity = static_cast<std::uint32_t>(succ[u].size());
                n.infinite = true;
                n.height = kNoHeight;
                for (std::uint32_t s : succ[u]) {
                    const TermId r = rep[cls[s]];
                    kids_.push_back(r != kEmpty ? r : qid[qindex.at(cls[s])]);
                }
                nodes_.push_back(n);
            }
            for (std::uint32_t q = 0; q < nq; ++q) {
                const TermId t = qid[q];
                if (2 * (used_slots_ + 1) > slots_.size()) grow_table();
                table_insert(t, hash_node(false, nodes_[t].label, children(t)));
                cyclic_index_.emplace(q == 0 ? enc0 : encode_from(q).first, t);
            }
        }
        for (std::uint32_t q = 0; q < nq; ++q) rep[qclasses[q]] = qid[q];
    }
    for (std::uint32_t i = 0; i < nm; ++i) resolved[members[i]] = rep[cls[i]];
}

// ── Substitution ──

void Substitution::bind(const TermStore& ts, VarIndex x, TermId t) {
    if (x == 0) throw ValidationError("variable indices start at 1");
    if (ts.is_var(t) && ts.var_index(t) == x) {
        map_.erase(x);
    } else {
        map_[x] = t;
    }
}

std::optional<TermId> Substitution::lookup(VarIndex x) const {
    auto it = map_.find(x);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

TermId Substitution::image(TermStore& ts, VarIndex x) const {
    auto it = map_.find(x);
    return it == map_.end() ? ts.var(x) : it->second;
}

std::vector<VarIndex> Substitution::support() const {
    std::vector<VarIndex> out;
    out.reserve(map_.size());
    for (const auto& [x, t] : map_) out.push_back(x);
    return out;
}

// ── measures ──

std::vector<TermId> subterms(const TermStore& ts, std::span<const TermId> roots) {
    std::vector<TermId> out;
    std::unordered_set<TermId> seen;
    std::vector<TermId> todo;
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) todo.push_back(*it);
    while (!todo.empty()) {
        const TermId t = todo.back();
        todo.pop_back();
        if (!seen.insert(t).second) continue;
        out.push_back(t);
        auto kids = ts.children(t);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
            if (seen.count(*it) == 0) todo.push_back(*it);
        }
    }
    return out;
}

std::size_t pressize(const TermStore& ts, std::span<const TermId> roots) {
    return subterms(ts, roots).size();
}

std::size_t pressize(const TermStore& ts, std::initializer_list<TermId> roots) {
    return pressize(ts, std::span<const TermId>(roots.begin(), roots.size()));
}

std::size_t propsize(const TermStore& ts, TermId t) {
    std::size_t n = 0;
    for (TermId u : subterms(ts, std::span<const TermId>(&t, 1))) {
        if (!ts.is_var(u)) ++n;
    }
    return n;
}

std::size_t height(const TermStore& ts, TermId t) { return ts.height(t); }

std::set<VarIndex> varin(const TermStore& ts, std::span<const TermId> roots) {
    std::set<VarIndex> out;
    for (TermId u : subterms(ts, roots)) {
        if (ts.is_var(u)) out.insert(ts.var_index(u));
    }
    return out;
}

std::set<VarIndex> varin(const TermStore& ts, std::initializer_list<TermId> roots) {
    return varin(ts, std::span<const TermId>(roots.begin(), roots.size()));
}

// ── substitution algebra ──

namespace {

// Rebuilds the nodes of t from which some "hit" variable is reachable, using
// `redirect` for the arcs into those variables.
template <typename Hit, typename Redirect>
TermId rebuild(TermStore& ts, TermId t, Hit hit, Redirect redirect) {
    const std::vector<TermId> reach = subterms(ts, std::span<const TermId>(&t, 1));
    std::unordered_map<TermId, std::uint32_t> pos;
    pos.reserve(reach.size() * 2);
    for (std::uint32_t i = 0; i < reach.size(); ++i) pos.emplace(reach[i], i);

    std::vector<std::vector<std::uint32_t>> parents(reach.size());
    std::vector<std::uint32_t> todo;
    std::vector<bool> affected(reach.size(), false);
    for (std::uint32_t i = 0; i < reach.size(); ++i) {
        const TermId u = reach[i];
        if (ts.is_var(u)) {
            if (hit(ts.var_index(u))) {
                affected[i] = true;
                todo.push_back(i);
            }
            continue;
        }
        for (TermId c : ts.children(u)) parents[pos.at(c)].push_back(i);
    }
    while (!todo.empty()) {
        const std::uint32_t i = todo.back();
        todo.pop_back();
        for (std::uint32_t p : parents[i]) {
            if (!affected[p]) {
                affected[p] = true;
                todo.push_back(p);
            }
        }
    }
    if (!affected[0]) return t;

    TermGraph g;
    std::unordered_map<std::uint32_t, std::uint32_t> local;
    for (std::uint32_t i = 0; i < reach.size(); ++i) {
        if (affected[i] && !ts.is_var(reach[i])) {
            local.emplace(i, static_cast<std::uint32_t>(local.size()));
        }
    }
    g.nodes.resize(local.size());
    for (const auto& [i, li] : local) {
        const TermId u = reach[i];
        GraphNode& node = g.nodes[li];
        node.label = ts.head(u);
        for (TermId c : ts.children(u)) {
            const std::uint32_t ci = pos.at(c);
            if (ts.is_var(c) && affected[ci]) {
                node.args.push_back(redirect(ts.var_index(c)));
            } else if (affected[ci]) {
                node.args.push_back(GraphRef::local(local.at(ci)));
            } else {
                node.args.push_back(GraphRef::stored(c));
            }
        }
    }
    g.roots.push_back(local.at(0));
    return ts.intern_graph(g).front();
}

}  // namespace

TermId apply_subst(TermStore& ts, TermId t, const Substitution& sigma) {
    if (sigma.empty()) return t;
    if (ts.is_var(t)) return sigma.lookup(ts.var_index(t)).value_or(t);
    return rebuild(
        ts, t, [&](VarIndex x) { return sigma.lookup(x).has_value(); },
        [&](VarIndex x) { return GraphRef::stored(*sigma.lookup(x)); });
}

Substitution compose(TermStore& ts, const Substitution& s1, const Substitution& s2) {
    Substitution out;
    for (const auto& [x, t] : s1.bindings()) out.bind(ts, x, apply_subst(ts, t, s2));
    for (const auto& [x, t] : s2.bindings()) {
        if (!s1.lookup(x)) out.bind(ts, x, t);
    }
    return out;
}

TermId omega_iterate(TermStore& ts, TermId h, VarIndex i) {
    if (ts.is_var(h)) return h;  // H = x_i stays x_i; another variable has no x_i
    return rebuild(
        ts, h, [&](VarIndex x) { return x == i; },
        [&](VarIndex) { return GraphRef::local(0); });
}

TopForm top_form(TermStore& ts, TermId w, unsigned depth) {
    TopForm tf;
    auto build = [&](auto&& self, TermId u, unsigned d) -> TermId {
        if (d == depth || ts.is_var(u)) {
            const VarIndex x = ++tf.fresh;
            tf.tail.bind(ts, x, u);
            return ts.var(x);
        }
        std::vector<TermId> kids;
        kids.reserve(ts.arity(u));
        for (TermId c : ts.children(u)) kids.push_back(self(self, c, d + 1));
        return ts.app(ts.head(u), kids);
    };
    tf.top = build(build, w, 0);
    return tf;
}

}  // namespace fog
