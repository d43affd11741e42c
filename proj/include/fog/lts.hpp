#pragma once

#include "fog/grammar.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace fog {

// A(x1..xm)σ -r-> Eσ for r = A(x1..xm) -a-> E; variables are dead.
// Throws ValidationError for an unknown rule id.
std::optional<TermId> step_rule(const Grammar& g, TermId t, RuleId r);

// All (rule, successor) pairs for rules labelled `a`, in rule-id order.
std::vector<std::pair<RuleId, TermId>> step_action(const Grammar& g, TermId t, ActionId a);

// Actions enabled in t, in declaration order. Depends only on the root of t.
std::vector<ActionId> enabled_actions(const Grammar& g, TermId t);

struct PathRecord {
    TermId start = 0;
    RuleWord word;
    std::vector<TermId> terms;  // |word| + 1 terms, terms.front() == start

    TermId end() const { return terms.back(); }
    std::size_t length() const { return word.size(); }
};

std::optional<PathRecord> run_word(const Grammar& g, TermId t, const RuleWord& w);

// Replays w from A(x1..xm). Stops early (returns the shorter path) when a variable is
// reached before w is used up, so callers compare lengths.
PathRecord replay_from_lhs(const Grammar& g, NontermId a, const RuleWord& w);

// Length of the sink-segment prefix of w from a term rooted by a, if one exists: the
// first point where replaying from A(x1..xm) reaches a variable.
std::optional<std::size_t> sink_prefix_length(const Grammar& g, NontermId a, const RuleWord& w);

bool is_sink_segment(const Grammar& g, const PathRecord& p);
bool is_d0_sinking(const Grammar& g, const PathRecord& p, std::size_t d0);

// Word-level stair test: ε, or replaying from the lhs of the first rule succeeds and
// ends in a nonterminal-rooted term.
bool is_stair(const Grammar& g, const RuleWord& w);
bool is_simple_stair(const Grammar& g, const RuleWord& w);
// Throws PreconditionError if p.word is not a stair.
std::vector<RuleWord> simple_stair_decompose(const Grammar& g, const PathRecord& p);

std::vector<ActionId> labels(const Grammar& g, const RuleWord& w);

}  // namespace fog
