#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fog {

using TermId = std::uint32_t;
using VarIndex = std::uint32_t;  // variables are x1, x2, ...; index 0 is never used
using NontermId = std::uint32_t;

class Signature {
public:
    NontermId add(std::string name, unsigned arity);
    std::optional<NontermId> find(std::string_view name) const;
    const std::string& name(NontermId a) const { return names_.at(a); }
    unsigned arity(NontermId a) const { return arities_.at(a); }
    std::size_t size() const { return names_.size(); }
    unsigned max_arity() const;

private:
    std::vector<std::string> names_;
    std::vector<unsigned> arities_;
    std::unordered_map<std::string, NontermId> index_;
};

// Raw graph presentation handed to TermStore::intern_graph. Arguments point either
// at another node of the same graph or at a term already in the store.
struct GraphRef {
    enum class Kind : std::uint8_t { local, stored };
    Kind kind = Kind::local;
    std::uint32_t value = 0;

    static GraphRef local(std::uint32_t node) { return {Kind::local, node}; }
    static GraphRef stored(TermId t) { return {Kind::stored, t}; }
};

struct GraphNode {
    bool is_var = false;
    std::uint32_t label = 0;  // variable index or nonterminal id
    std::vector<GraphRef> args;
};

struct TermGraph {
    std::vector<GraphNode> nodes;
    std::vector<std::uint32_t> roots;
};

// Append-only hash-consed store of regular terms. Every stored node is the root of
// a minimal presentation, so two ids are equal iff their unfoldings are equal.
// Not synchronized: callers serialize mutation.
class TermStore {
public:
    explicit TermStore(Signature sig);

    const Signature& signature() const { return sig_; }

    TermId var(VarIndex i);
    TermId app(NontermId a, std::span<const TermId> children);
    TermId app(NontermId a, std::initializer_list<TermId> children) {
        return app(a, std::span<const TermId>(children.begin(), children.size()));
    }

    // Canonical ids of g.roots; cycles allowed.
    std::vector<TermId> intern_graph(const TermGraph& g);
    // Canonical id of every node of g.
    std::vector<TermId> intern_graph_nodes(const TermGraph& g);

    bool is_var(TermId t) const { return nodes_[t].is_var; }
    VarIndex var_index(TermId t) const { return nodes_[t].label; }
    NontermId head(TermId t) const { return nodes_[t].label; }
    unsigned arity(TermId t) const { return nodes_[t].arity; }
    std::span<const TermId> children(TermId t) const {
        return {kids_.data() + nodes_[t].first, nodes_[t].arity};
    }
    // 1-based, matching x1..xm positions.
    TermId child(TermId t, unsigned i) const { return kids_[nodes_[t].first + i - 1]; }
    bool is_finite(TermId t) const { return !nodes_[t].infinite; }
    // Height of a finite term; throws PreconditionError for infinite ones.
    std::size_t height(TermId t) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        std::uint32_t label = 0;
        std::uint32_t first = 0;
        std::uint32_t arity = 0;
        std::uint32_t height = 0;
        bool is_var = false;
        bool infinite = false;
    };

    std::uint64_t hash_node(bool is_var, std::uint32_t label, std::span<const TermId> kids) const;
    bool same_node(TermId t, bool is_var, std::uint32_t label, std::span<const TermId> kids) const;
    TermId lookup_or_add(bool is_var, std::uint32_t label, std::span<const TermId> kids);
    void table_insert(TermId t, std::uint64_t h);
    void grow_table();
    void validate(const TermGraph& g) const;
    void intern_cycle(const TermGraph& g, const std::vector<std::uint32_t>& members,
                      std::vector<TermId>& resolved);

    Signature sig_;
    std::vector<Node> nodes_;
    std::vector<TermId> kids_;
    std::vector<TermId> slots_;  // open addressing, kEmpty marks free
    std::size_t used_slots_ = 0;
    std::unordered_map<std::string, TermId> cyclic_index_;
};

// Finite map x -> term; identity bindings are never stored.
class Substitution {
public:
    void bind(const TermStore& ts, VarIndex x, TermId t);
    void erase(VarIndex x) { map_.erase(x); }
    std::optional<TermId> lookup(VarIndex x) const;
    TermId image(TermStore& ts, VarIndex x) const;

    bool empty() const { return map_.empty(); }
    std::size_t size() const { return map_.size(); }
    const std::map<VarIndex, TermId>& bindings() const { return map_; }
    std::vector<VarIndex> support() const;

    friend bool operator==(const Substitution&, const Substitution&) = default;

private:
    std::map<VarIndex, TermId> map_;
};

// Distinct terms reachable from the roots (roots included), in DFS preorder.
std::vector<TermId> subterms(const TermStore& ts, std::span<const TermId> roots);
std::size_t pressize(const TermStore& ts, std::span<const TermId> roots);
std::size_t pressize(const TermStore& ts, std::initializer_list<TermId> roots);
// Number of nonterminal nodes in the least presentation.
std::size_t propsize(const TermStore& ts, TermId t);
std::size_t height(const TermStore& ts, TermId t);
std::set<VarIndex> varin(const TermStore& ts, std::span<const TermId> roots);
std::set<VarIndex> varin(const TermStore& ts, std::initializer_list<TermId> roots);

TermId apply_subst(TermStore& ts, TermId t, const Substitution& sigma);
// x(σ1σ2) = (xσ1)σ2
Substitution compose(TermStore& ts, const Substitution& s1, const Substitution& s2);
// H[x_i/H][x_i/H]...; arcs into x_i are redirected to the root.
TermId omega_iterate(TermStore& ts, TermId h, VarIndex i);

// Depth-p top of W: branches cut at depth p and variables above depth p are replaced
// by fresh variables x1, x2, ... numbered left to right, depth first; W = top·tail.
struct TopForm {
    TermId top = 0;
    Substitution tail;
    unsigned fresh = 0;  // number of fresh variables used
};
TopForm top_form(TermStore& ts, TermId w, unsigned depth);

}  // namespace fog
