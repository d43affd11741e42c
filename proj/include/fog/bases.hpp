#pragma once

#include "fog/bigint.hpp"
#include "fog/equiv.hpp"
#include "fog/plays.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fog {

struct NsgParams {
    BigInt n = 0;
    BigInt s = 0;
    BigInt g = 0;
};

// (E_1σ,F_1σ), ..., (E_zσ,F_zσ): tops over x_1..x_n and one shared tail.
struct NsgSequence {
    std::vector<TermPair> tops;
    Substitution tail;
    std::size_t length() const { return tops.size(); }
};

// First violated condition, or nullopt for a valid (n,s,g)-sequence. Throws
// CutoffError when an element's eq-level is not below the cutoff.
std::optional<std::string> nsg_violation(EqOracle& o, const NsgSequence& seq, const NsgParams& p);
bool check_nsg_sequence(EqOracle& o, const NsgSequence& seq, const NsgParams& p);

// Smallest parameters the sequence satisfies: the largest variable index, the size of
// the first top, and the least growth rate covering the remaining tops.
NsgParams tightest_params(const TermStore& ts, const NsgSequence& seq);

struct Reduction {
    NsgSequence seq;      // the retained elements, over x_1..x_{n-1}
    NsgParams params;     // (n-1, s', g)
    unsigned k = 0;       // eqlevel(E_1, F_1)
    unsigned l = 0;       // eqlevel(E_1σ, F_1σ)
    VarIndex var = 0;     // x_i from the sink witness
    TermId h = 0;         // H
    TermId h_omega = 0;   // H[x_i/H][x_i/H]...
};

// One inductive step on an (n,s,g)-sequence with k < l. `e` defaults to k and enters
// s' = 2s + g(1+e) + e*stepinc. Retained elements keep their eq-levels; this is
// revalidated and an InvariantError is thrown otherwise.
Reduction reduce_nsg_step(EqOracle& o, const NsgSequence& seq, const NsgParams& p, const BigInt& stepinc,
                          std::optional<unsigned> e = std::nullopt);

struct CandidateLayer {
    unsigned vars = 0;      // j: this layer is a (j, threshold, g)-candidate
    BigInt threshold = 0;   // s_j
    unsigned e = 0;         // max eq-level over the candidate's pairs within s_j
    std::size_t size = 0;   // those pairs, counted once per unordered pair
};

// Pairs are unordered: (E,F) stands for both orientations, E < F by id.
struct Candidate {
    NsgParams params;
    std::set<TermPair> pairs;
    std::vector<CandidateLayer> layers;  // vars = n, n-1, ..., 0
};

std::uint64_t bound_of_candidate(const Candidate& c);

// One enumerated pair: variables exactly x_1..x_vars, pressize of both terms together.
struct UniversePair {
    TermPair pair;
    unsigned vars = 0;
    std::size_t size = 0;
    EqLevel level;
    bool proved_equivalent = false;  // AtLeast(cutoff) and a finite bisimulation closes
};

struct Caps {
    std::size_t max_size = 4;      // pressize cap for pairs
    std::size_t max_pairs = 20000; // closure limit for equivalence proofs
};

// Regular terms over the grammar's nonterminals and x_1..x_vars with pressize <= max_size,
// one canonical id each, enumerated from rooted term graphs.
std::vector<TermId> enumerate_terms(TermStore& ts, unsigned vars, std::size_t max_size);

struct PairUniverse {
    std::vector<UniversePair> pairs;
    unsigned vars = 0;
    std::size_t max_size = 0;
    std::size_t ambiguous = 0;  // AtLeast(cutoff) without an equivalence proof
};

PairUniverse enumerate_pairs(EqOracle& o, unsigned vars, const Caps& caps);

// Recomputes the layers of c from its pairs: s_n = s, s_{j-1} = 2s_j + g(1+e_j) + e_j*stepinc.
void compute_layers(Candidate& c, const PairUniverse& u, const BigInt& stepinc);

struct BaseResult {
    Candidate candidate;
    std::uint64_t bound = 0;
    bool complete = false;  // no threshold above the cap and no unproved AtLeast pair
    bool capped = false;
};

BaseResult build_full_base_capped(EqOracle& o, const NsgParams& p, const Caps& caps, const BigInt& stepinc);
BaseResult build_full_base(const PairUniverse& u, const NsgParams& p, const BigInt& stepinc);

// eqlevel(T,U) > c(k*pressize(T,U) + pressize(T,U)^2). nullopt when the oracle only
// reports AtLeast(cutoff), the cutoff does not exceed the threshold, and no proof of
// equivalence is supplied.
std::optional<bool> speceq_check(EqOracle& o, TermId t, TermId u, const BigInt& k, const BigInt& c,
                                 bool proved_equivalent = false);

enum class SearchStatus { sound, indeterminate, capped };
const char* status_name(SearchStatus s);

struct SearchResult {
    Candidate candidate;
    std::uint64_t bound = 0;
    SearchStatus status = SearchStatus::sound;
    std::size_t iterations = 0;
};

// Grows a candidate from the empty set by adding every pair that violates the
// speceq test at the current bound, until none is left.
SearchResult sound_candidate_search(EqOracle& o, const PairUniverse& u, const NsgParams& p, const BigInt& c,
                                    const BigInt& stepinc);

// Table parameters n = m^d0, s, g of the grammar.
NsgParams stair_params(const GrammarConstants& c);

// The bal-results of a crucial segment as an (n,s,g)-sequence with the tail of the
// d0-top form of the stair's base. Throws PreconditionError if the pivot-path segment
// is not a stair.
NsgSequence present_stair_as_nsg(PlayContext& ctx, const Balanced& b, const Refinement& r, std::size_t crucial);

}  // namespace fog
