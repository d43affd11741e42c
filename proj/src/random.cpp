#include "fog/random.hpp"

#include "fog/errors.hpp"

#include <string>
#include <tuple>
#include <vector>

namespace fog {

namespace {

TermId random_leaf(TermStore& ts, Rng& rng, unsigned num_vars) {
    const Signature& sig = ts.signature();
    std::vector<NontermId> nullary;
    for (NontermId a = 0; a < sig.size(); ++a) {
        if (sig.arity(a) == 0) nullary.push_back(a);
    }
    const std::uint64_t choices = nullary.size() + num_vars;
    if (choices == 0) throw PreconditionError("no nullary nonterminal and no variables to end a term");
    const std::uint64_t k = rng.below(choices);
    if (k < nullary.size()) return ts.app(nullary[k], {});
    return ts.var(static_cast<VarIndex>(k - nullary.size() + 1));
}

TermId random_term_at(TermStore& ts, Rng& rng, const TermShape& shape, unsigned depth) {
    const Signature& sig = ts.signature();
    if (depth >= shape.max_depth) return random_leaf(ts, rng, shape.num_vars);
    if (shape.num_vars > 0 && rng.chance(shape.var_percent)) {
        return ts.var(static_cast<VarIndex>(1 + rng.below(shape.num_vars)));
    }
    const auto a = static_cast<NontermId>(rng.below(sig.size()));
    std::vector<TermId> kids;
    for (unsigned i = 0; i < sig.arity(a); ++i) kids.push_back(random_term_at(ts, rng, shape, depth + 1));
    return ts.app(a, kids);
}

}  // namespace

TermId random_term(TermStore& ts, Rng& rng, const TermShape& shape) {
    return random_term_at(ts, rng, shape, 0);
}

TermId random_regular_term(TermStore& ts, Rng& rng, unsigned max_nodes, unsigned num_vars) {
    const Signature& sig = ts.signature();
    const auto n = static_cast<std::uint32_t>(1 + rng.below(max_nodes));
    TermGraph g;
    g.nodes.resize(n);
    std::vector<std::uint32_t> var_nodes;
    for (VarIndex x = 1; x <= num_vars; ++x) {
        GraphNode v;
        v.is_var = true;
        v.label = x;
        var_nodes.push_back(static_cast<std::uint32_t>(g.nodes.size()));
        g.nodes.push_back(v);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto a = static_cast<NontermId>(rng.below(sig.size()));
        g.nodes[i].label = a;
        for (unsigned j = 0; j < sig.arity(a); ++j) {
            if (!var_nodes.empty() && rng.chance(30)) {
                g.nodes[i].args.push_back(GraphRef::local(var_nodes[rng.below(var_nodes.size())]));
            } else {
                g.nodes[i].args.push_back(GraphRef::local(static_cast<std::uint32_t>(rng.below(n))));
            }
        }
    }
    g.roots.push_back(0);
    return ts.intern_graph(g).front();
}

Substitution random_substitution(TermStore& ts, Rng& rng, const TermShape& shape,
                                 unsigned max_bindings) {
    Substitution s;
    const auto k = rng.below(max_bindings + 1ULL);
    for (std::uint64_t i = 0; i < k; ++i) {
        const auto x = static_cast<VarIndex>(1 + rng.below(shape.num_vars == 0 ? 1 : shape.num_vars));
        s.bind(ts, x, random_term(ts, rng, shape));
    }
    return s;
}

Grammar random_grammar(Rng& rng, const GrammarShape& shape) {
    Signature sig;
    const auto num_nt = static_cast<unsigned>(1 + rng.below(shape.max_nonterminals));
    const auto nullary = static_cast<unsigned>(rng.below(num_nt));
    for (unsigned i = 0; i < num_nt; ++i) {
        const auto arity = i == nullary ? 0U : static_cast<unsigned>(rng.below(shape.max_arity + 1ULL));
        sig.add(std::string(1, static_cast<char>('A' + i)), arity);
    }
    std::vector<std::string> actions;
    for (unsigned i = 0; i < shape.num_actions; ++i) actions.emplace_back(1, static_cast<char>('a' + i));
    Grammar g(sig, actions);
    TermStore& ts = g.store();
    std::vector<std::pair<NontermId, ActionId>> free_slots;
    for (NontermId a = 0; a < num_nt; ++a) {
        for (ActionId act = 0; act < shape.num_actions; ++act) free_slots.emplace_back(a, act);
    }
    const auto num_rules = 1 + rng.below(shape.max_rules);
    for (std::uint64_t k = 0; k < num_rules; ++k) {
        NontermId lhs = 0;
        ActionId act = 0;
        if (shape.deterministic) {
            if (free_slots.empty()) break;
            const auto pick = rng.below(free_slots.size());
            std::tie(lhs, act) = free_slots[pick];
            free_slots.erase(free_slots.begin() + static_cast<std::ptrdiff_t>(pick));
        } else {
            lhs = static_cast<NontermId>(rng.below(num_nt));
            act = static_cast<ActionId>(rng.below(shape.num_actions));
        }
        const TermShape rhs_shape{static_cast<unsigned>(rng.below(shape.rhs_depth + 1ULL)), sig.arity(lhs), 35};
        const TermId rhs = random_term(ts, rng, rhs_shape);
        g.add_rule("r" + std::to_string(g.num_rules() + 1), lhs, act, rhs);
    }
    return g;
}

}  // namespace fog
