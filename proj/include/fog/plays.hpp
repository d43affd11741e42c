#pragma once

#include "fog/equiv.hpp"
#include "fog/grammar.hpp"
#include "fog/lts.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fog {

using TermPair = std::pair<TermId, TermId>;

// (T_0,U_0) -(r_1,r'_1)-> ... -(r_k,r'_k)-> (T_k,U_k). Optimal plays drop the eq-level
// by one per step; slices of plays are plays.
struct Play {
    std::vector<TermPair> pairs;  // k + 1 pairs
    RuleWord left;
    RuleWord right;

    static Play at(TermId t, TermId u) { return Play{{{t, u}}, {}, {}}; }
    std::size_t length() const { return left.size(); }
    TermPair start() const { return pairs.front(); }
    TermPair finish() const { return pairs.back(); }
    TermId term(Side s, std::size_t i) const { return s == Side::left ? pairs[i].first : pairs[i].second; }
    const RuleWord& word(Side s) const { return s == Side::left ? left : right; }
    Play slice(std::size_t from, std::size_t to) const;
    PathRecord path(Side s) const;
};

// A modified play: plays joined by eqlevel-concatenation.
using ModifiedPlay = std::vector<Play>;

// Defined iff the finish of `a` and the start of `b` have the same eq-level.
bool eqlevel_concatenable(EqOracle& o, const Play& a, const Play& b);
std::size_t total_length(const ModifiedPlay& mp);

// Shared per-grammar data for play construction.
struct PlayContext {
    explicit PlayContext(EqOracle& o);
    EqOracle& oracle;
    SinkTable sinks;
    GrammarConstants constants;
    std::size_t d0;
    std::size_t m;
};

// Completed optimal play: attacker-optimal moves answered by defender-optimal ones.
// Throws CutoffError when eqlevel(t, u) is not below the cutoff.
Play build_optimal_play(EqOracle& o, TermId t, TermId u);

// Side s of a length-d0 play is root-performable: the term is A(x_1..x_m)σ' and the
// side's word takes A(x_1..x_m) to E'.
struct BalanceSetup {
    NontermId head = 0;
    std::vector<TermId> args;  // x_iσ'
    TermId eprime = 0;
};
std::optional<BalanceSetup> enables_balancing(const Grammar& g, const Play& rho, std::size_t d0, Side side);

struct BalanceStep {
    Side side = Side::left;  // side whose end term is replaced; the pivot is on the other side
    TermId pivot = 0;
    RuleWord pivot_word;     // the pivot side's word in ρ
    BalanceSetup setup;
    std::vector<RuleWord> vbar;     // pivot -vbar[i-1]-> targets[i-1]
    std::vector<TermId> targets;    // V_i
    TermPair before;                // finish of ρ
    TermPair result;                // the bal-result
    unsigned level = 0;             // eq-level of both `before` and `result`
};

// Precondition: ρ enables balancing on `side` and eqlevel(start of ρ) < cutoff.
// Each V_i maximizes eqlevel(x_iσ', V_i); ties go to the lexicographically least word.
BalanceStep balance_step(PlayContext& ctx, const Play& rho, Side side);

// Tops of a bal-result over a d0-safe form Gσ of the pivot: bal-result = (Eσ, Fσ)
// with G -u'-> F and E = E'[x_i/F_i], G -vbar_i-> F_i. Returned as (left, right).
std::optional<TermPair> balance_tops(const Grammar& g, const BalanceStep& step, TermId top);

struct Phase {
    Play rho;           // length d0, from (T_j,U_j)
    BalanceStep bal;
    Play mu;            // from the bal-result to (T_{j+1},U_{j+1})
    std::size_t unclear = 0;  // mu's first `unclear` steps are the unclear part
    bool has_sink = false;    // the rest is the sinking part (possibly zero-length)
    bool switched = false;    // the next balancing is on the other side

    Play unclear_part() const { return mu.slice(0, unclear); }
    std::optional<Play> sink_part() const;
};

struct BalancedPlay {
    TermPair start;
    unsigned level = 0;
    Play mu0;
    std::vector<Phase> phases;

    std::size_t length() const;
    ModifiedPlay segments() const;  // μ0 ρ1 μ1 ... as plays joined at bal-results
};

// W_0 -w_0-> W_1 -w_1-> ... -w_ℓ-> W_{ℓ+1}; empty when no balancing happened.
struct PivotPath {
    std::vector<TermId> terms;    // W_0 .. W_{ℓ+1}
    std::vector<Side> sides;      // side of each W_j in its pair
    std::vector<RuleWord> words;  // w_0 .. w_ℓ
    std::vector<std::size_t> unclear;  // |w^unc_j|, 0 for j = 0
    bool empty() const { return terms.empty(); }
};

struct Balanced {
    BalancedPlay play;
    PivotPath pivots;
};

// Throws CutoffError when the oracle cannot resolve a level on the way.
Balanced transform_to_balanced(PlayContext& ctx, TermId t, TermId u);

struct CrucialSegment {
    std::size_t first = 0;  // phases first..last (1-based phase indices)
    std::size_t last = 0;
    std::size_t length = 0;
    std::size_t index_length() const { return last - first + 1; }
    std::size_t entry_pos = 0;  // position in w_{first-1} of the last visited subterm V
};

struct Refinement {
    std::vector<std::size_t> usink;  // per j in 0..ℓ
    std::vector<std::size_t> csink;  // per j in 0..ℓ; csink[0] = |μ0|
    std::vector<bool> close;         // per j in 0..ℓ; close[0] unused
    std::vector<std::size_t> last_visit;  // per close j: position in w_{j-1}
    std::vector<CrucialSegment> crucial;
};

std::set<TermId> subterm_set(const TermStore& ts, TermPair start);
Refinement refine_segments(const Grammar& g, const Balanced& b, const std::set<TermId>& subterms);

struct Check {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct VerifyReport {
    std::vector<Check> checks;
    bool ok() const;
    const Check* find(const std::string& name) const;
};

VerifyReport verify_balanced(PlayContext& ctx, const Balanced& b, const Refinement& r);

}  // namespace fog
