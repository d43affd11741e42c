#pragma once

#include "fog/grammar.hpp"
#include "fog/level.hpp"
#include "fog/terms.hpp"

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace fog {

enum class Side : std::uint8_t { left, right };

inline Side other(Side s) { return s == Side::left ? Side::right : Side::left; }
inline const char* side_name(Side s) { return s == Side::left ? "L" : "R"; }

struct Move {
    ActionId action = 0;
    RuleId rule = 0;
    TermId target = 0;
};

struct AttackerMove {
    Side side = Side::left;
    RuleId rule = 0;
    TermId target = 0;
};

// Answers eq-level queries up to a mandatory cutoff K. Levels below K are exact;
// everything else is reported as AtLeast(K). Variables follow the stipulation
// eqlevel(x_i, x_i) = ω and eqlevel(x_i, H) = 0 for H != x_i.
//
// Not thread-safe: game search interns successor terms in the grammar's store.
// Parallel callers give each thread its own grammar copy and oracle.
class EqOracle {
public:
    EqOracle(const Grammar& g, unsigned cutoff, bool memoize = true);

    const Grammar& grammar() const { return *g_; }
    TermStore& store() const { return g_->store(); }
    unsigned cutoff() const { return cutoff_; }

    // min(eqlevel(t, u), bound) for bound <= cutoff.
    unsigned level_capped(TermId t, TermId u, unsigned bound);

    bool check(TermId t, TermId u, unsigned k);
    EqLevel eq_level(TermId t, TermId u);
    EqLevel eq_level_subst(const Substitution& s1, const Substitution& s2);

    // Outgoing moves ordered by action, then rule id.
    const std::vector<Move>& moves(TermId t);

    // Precondition: 0 < eqlevel(t, u) < cutoff.
    AttackerMove attacker_optimal(TermId t, TermId u);
    // Response on the other side maximizing the successor level, least rule id on ties.
    // Precondition: eqlevel(t, u) >= 1.
    Move defender_optimal(TermId t, TermId u, const AttackerMove& m);

    std::size_t memo_size() const { return memo_.size(); }
    std::uint64_t queries() const { return queries_; }

private:
    struct Bounds {
        unsigned lo = 0;                 // t ~_lo u is known
        unsigned hi = UINT32_MAX;        // eqlevel < hi is known
    };
    unsigned solve(TermId t, TermId u, unsigned bound);
    unsigned solve_side(const std::vector<Move>& att, const std::vector<Move>& def, unsigned bound);

    const Grammar* g_;
    unsigned cutoff_;
    bool memoize_;
    std::unordered_map<std::uint64_t, Bounds> memo_;
    std::unordered_map<TermId, std::vector<Move>> succ_;
    std::uint64_t queries_ = 0;
};

// Exact bisimilarity when the pairs reachable from (t, u) by same-action moves form a
// finite set of at most max_pairs elements; nullopt when the closure is larger.
std::optional<bool> bisimilar_by_closure(const Grammar& g, TermId t, TermId u, std::size_t max_pairs);

struct SinkWitness {
    VarIndex var = 0;        // x_i
    TermId other = 0;        // H
    Side var_side = Side::left;  // side of (E, F) that reaches x_i
    RuleWord var_word;       // E -var_word-> x_i (or F when var_side is right)
    RuleWord other_word;     // the other term -other_word-> H
    std::vector<ActionId> actions;  // common label image of both words
};

// Given eqlevel(E,F) = k < l = eqlevel(Eσ,Fσ), both below the cutoff, finds x_i in
// the support of σ, H != x_i and a word of length <= k with E -w-> x_i and F -w-> H
// (or the mirror case) such that x_iσ ~_{l-k} Hσ. Follows optimal attacker moves on
// (E,F) and optimal defender answers on (Eσ,Fσ); at k = 0 the left variable wins.
SinkWitness find_sink_witness(EqOracle& o, TermId e, TermId f, const Substitution& sigma, unsigned k,
                              unsigned l);

}  // namespace fog
