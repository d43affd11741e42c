#pragma once

#include "fog/grammar.hpp"
#include "fog/terms.hpp"

#include <cstdint>
#include <random>

namespace fog {

// Seeded generator with a portable `below`, so a fixed seed yields the same
// sequence on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : eng_() % n; }
    bool chance(unsigned percent) { return below(100) < percent; }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

struct TermShape {
    unsigned max_depth = 3;
    unsigned num_vars = 2;      // variables drawn from x1..x_num_vars
    unsigned var_percent = 25;  // chance of a variable leaf above max depth
};

// Random finite term; nullary nonterminals or variables at the depth limit.
TermId random_term(TermStore& ts, Rng& rng, const TermShape& shape);

// Random regular term from a graph of up to `max_nodes` nodes with back edges.
TermId random_regular_term(TermStore& ts, Rng& rng, unsigned max_nodes, unsigned num_vars);

Substitution random_substitution(TermStore& ts, Rng& rng, const TermShape& shape,
                                 unsigned max_bindings);

struct GrammarShape {
    unsigned max_nonterminals = 4;  // at least one of them is nullary
    unsigned max_arity = 3;
    unsigned max_rules = 8;
    unsigned num_actions = 2;
    unsigned rhs_depth = 2;
    bool deterministic = false;  // at most one rule per (lhs, action)
};

// Nonterminals A, B, ...; actions a, b, ...; rules r1, r2, ...
Grammar random_grammar(Rng& rng, const GrammarShape& shape);

}  // namespace fog
