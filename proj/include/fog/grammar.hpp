#pragma once

#include "fog/bigint.hpp"
#include "fog/terms.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fog {

using RuleId = std::uint32_t;
using ActionId = std::uint32_t;
using RuleWord = std::vector<RuleId>;

struct Rule {
    std::string name;
    NontermId lhs = 0;
    ActionId action = 0;
    TermId rhs = 0;  // finite, variables within x1..x_arity(lhs)
};

// Ranked nonterminals, actions and root-rewriting rules A(x1..xm) -a-> E. Rules are
// numbered in declaration order. The grammar owns the store its terms live in; the
// store grows as terms are built, everything else is fixed after construction.
class Grammar {
public:
    Grammar(Signature sig, std::vector<std::string> actions);

    RuleId add_rule(std::string name, NontermId lhs, ActionId action, TermId rhs);
    // Throws ValidationError if a nonterminal, action or rule set is empty.
    void check_nonempty() const;

    const Signature& signature() const { return store_->signature(); }
    TermStore& store() const { return *store_; }

    std::size_t num_actions() const { return actions_.size(); }
    const std::string& action_name(ActionId a) const { return actions_.at(a); }
    std::optional<ActionId> find_action(std::string_view name) const;

    std::size_t num_rules() const { return rules_.size(); }
    const Rule& rule(RuleId r) const { return rules_.at(r); }
    const std::vector<Rule>& rules() const { return rules_; }
    std::optional<RuleId> find_rule(std::string_view name) const;

    // Rules with the given lhs, in id order.
    const std::vector<RuleId>& rules_of(NontermId a) const { return by_lhs_.at(a); }
    const std::vector<RuleId>& rules_of(NontermId a, ActionId act) const;

    // A(x1, ..., x_arity(A)).
    TermId lhs_term(NontermId a) const;

private:
    std::shared_ptr<TermStore> store_;
    std::vector<std::string> actions_;
    std::vector<Rule> rules_;
    std::vector<std::vector<RuleId>> by_lhs_;
    std::vector<std::vector<std::vector<RuleId>>> by_lhs_action_;
};

// Line-oriented text format, `#` starts a comment:
//   nonterminals: A/3, B/0
//   actions: a, b
//   rule r1: A(x1,x2,x3) -b-> x2
Grammar parse_grammar(std::string_view text);
Grammar load_grammar(const std::string& path);
std::string format_grammar(const Grammar& g);

// Fixed shortest (A,i)-sink words: among the shortest, the lexicographically least
// in rule-id order.
class SinkTable {
public:
    const RuleWord* find(NontermId a, unsigned i) const;
    const std::map<std::pair<NontermId, unsigned>, RuleWord>& entries() const { return words_; }
    std::size_t max_length() const;

private:
    friend SinkTable compute_sink_table(const Grammar& g);
    std::map<std::pair<NontermId, unsigned>, RuleWord> words_;
};

SinkTable compute_sink_table(const Grammar& g);

struct GrammarConstants {
    BigInt m, hinc, stepinc, d0, d1, d2, d3, d4, d5, n, s, g, c;
};

GrammarConstants compute_constants(const Grammar& g, const SinkTable& sinks);
// (name, value) pairs in the printing order m, hinc, stepinc, d0, d1, d2, d3, n, s, g,
// d4, d5, c.
std::vector<std::pair<std::string, BigInt>> constants_table(const GrammarConstants& c);

// Non-variable subterms of all right-hand sides.
std::vector<TermId> nonvar_rhs_subterms(const Grammar& g);

}  // namespace fog
