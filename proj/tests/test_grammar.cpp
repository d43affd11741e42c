#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fog/errors.hpp"
#include "fog/grammar.hpp"
#include "fog/lts.hpp"
#include "fog/random.hpp"
#include "fog/term_text.hpp"
#include "support/gmp_constants.hpp"
#include "support/oracles.hpp"

#include <gmpxx.h>

using namespace fog;

namespace {

const std::string kDir = FOG_GRAMMAR_DIR;

std::string error_of(const std::string& text) {
    try {
        parse_grammar(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

BigInt as_big(const mpz_class& v) { return BigInt(v.get_str()); }

}  // namespace

TEST_CASE("parse the sharing grammar") {
    const Grammar g = load_grammar(kDir + "/sharing.fog");
    CHECK(g.signature().size() == 4);
    CHECK(g.signature().max_arity() == 3);
    CHECK(g.num_actions() == 2);
    const RuleId r2 = *g.find_rule("r2");
    CHECK(r2 == 1);
    CHECK(g.signature().name(g.rule(r2).lhs) == "A");
    CHECK(g.action_name(g.rule(r2).action) == "a");
    CHECK(format_term(g.store(), g.rule(r2).rhs) == "C(x2,D(x2,x1))");
    CHECK(g.rules_of(*g.signature().find("A")).size() == 2);
}

TEST_CASE("grammar text round-trips") {
    Rng rng(3);
    for (int iter = 0; iter < 50; ++iter) {
        const Grammar g = random_grammar(rng, GrammarShape{});
        const std::string text = format_grammar(g);
        CHECK(format_grammar(parse_grammar(text)) == text);
    }
}

TEST_CASE("grammar parse errors carry line numbers") {
    const std::string head = "nonterminals: A/3, B/0\nactions: a\n";
    CHECK(error_of(head + "rule r1: A(x1,x2,x3) -a-> x4\n").find("line 3") != std::string::npos);
    CHECK(error_of(head).find("no rules") != std::string::npos);
    CHECK(error_of(head + "rule r1: A(x1,x2,x3) -a-> B(x1)\n").find("line 3") != std::string::npos);
    CHECK(error_of(head + "rule r1: A(x1,x2,x3) -a-> B\nrule r1: B -a-> B\n").find("line 4") !=
          std::string::npos);
    CHECK(error_of(head + "rule r1: A(x1,x2,x3) -q-> B\n").find("undeclared action") != std::string::npos);
    CHECK(error_of(head + "rule r1: A(x2,x1,x3) -a-> B\n").find("line 3") != std::string::npos);
    CHECK(error_of("nonterminals:\nactions: a\n").find("line 1") != std::string::npos);
    CHECK(error_of("nonterminals: A/1\nactions: a\nrule r1 A(x1) a x1\n").find("line 3") != std::string::npos);
    CHECK(error_of("nonterminals: x1/0\nactions: a\n").find("line 1") != std::string::npos);
    CHECK(error_of(head + "frobnicate\n").find("line 3") != std::string::npos);
    CHECK(error_of(head + "rule r1: B() -a-> B\n").empty());
}

TEST_CASE("sink table on small grammars") {
    const Grammar g1 = load_grammar(kDir + "/g1.fog");
    const SinkTable t1 = compute_sink_table(g1);
    const NontermId a = *g1.signature().find("A");
    REQUIRE(t1.find(a, 1) != nullptr);
    CHECK(*t1.find(a, 1) == RuleWord{*g1.find_rule("r1")});
    CHECK(t1.entries().size() == 1);

    const Grammar loop = parse_grammar("nonterminals: A/1, Z/0\nactions: a\nrule r1: A(x1) -a-> A(x1)\n");
    CHECK(compute_sink_table(loop).find(0, 1) == nullptr);

    // ties are broken towards the least rule id
    const Grammar tie = parse_grammar(
        "nonterminals: A/1, B/1\nactions: a, b\n"
        "rule r1: A(x1) -b-> B(x1)\nrule r2: A(x1) -a-> B(x1)\nrule r3: B(x1) -a-> x1\n");
    CHECK(*compute_sink_table(tie).find(0, 1) == RuleWord{0, 2});
}

TEST_CASE("sink table agrees with breadth-first search") {
    Rng rng(17);
    int conclusive = 0;
    for (int iter = 0; iter < 60; ++iter) {
        const Grammar g = random_grammar(rng, GrammarShape{});
        const SinkTable table = compute_sink_table(g);
        const GrammarConstants c = compute_constants(g, table);
        std::size_t pairs = 0;
        for (NontermId a = 0; a < g.signature().size(); ++a) pairs += g.signature().arity(a);
        const BigInt h = 2 + c.hinc;
        const BigInt bound = big_pow(h, pairs);
        const std::size_t budget = bound > 64 ? 64 : bound.convert_to<std::size_t>();
        bool all = true;
        for (NontermId a = 0; a < g.signature().size(); ++a) {
            for (unsigned i = 1; i <= g.signature().arity(a); ++i) {
                const RuleWord* w = table.find(a, i);
                if (w != nullptr) {
                    CHECK(BigInt(w->size()) <= bound);
                    auto path = run_word(g, g.lhs_term(a), *w);
                    REQUIRE(path);
                    CHECK(path->end() == g.store().var(i));
                }
                const auto search = oracle::bfs_sink_word(g, a, i, budget, 20000);
                if (search.status == oracle::SinkSearch::Status::inconclusive ||
                    (search.status == oracle::SinkSearch::Status::absent && !search.exhausted &&
                     BigInt(budget) < bound)) {
                    all = false;
                    continue;
                }
                if (search.status == oracle::SinkSearch::Status::found) {
                    REQUIRE(w != nullptr);
                    CHECK(search.word == *w);
                } else {
                    CHECK(w == nullptr);
                }
            }
        }
        if (all) ++conclusive;
    }
    CHECK(conclusive >= 20);
}

TEST_CASE("constants of G1") {
    const Grammar g = load_grammar(kDir + "/g1.fog");
    const GrammarConstants c = compute_constants(g, compute_sink_table(g));
    CHECK(c.m == 1);
    CHECK(c.hinc == 1);
    CHECK(c.stepinc == 2);
    CHECK(c.d0 == 2);
    CHECK(c.d1 == 2916);
    CHECK(c.d2 == 5);
    CHECK(c.d3 == 81);
    CHECK(c.n == 1);
    CHECK(c.s == 25);
    CHECK(c.g == 12);
    CHECK(c.d4 == 11943936);
    CHECK(c.d5 == 12);
    CHECK(c.c == 286654464);
    const auto table = constants_table(c);
    REQUIRE(table.size() == 13);
    CHECK(table.front().first == "m");
    CHECK(table[7].first == "n");
    CHECK(table.back().first == "c");
}

TEST_CASE("constants: clamping, arities and a GMP recomputation") {
    const Grammar flat = parse_grammar("nonterminals: A/0, B/0\nactions: a\nrule r1: A -a-> B\n");
    const GrammarConstants cf = compute_constants(flat, compute_sink_table(flat));
    CHECK(cf.m == 0);
    CHECK(cf.hinc == 0);
    CHECK(cf.d0 == 1);
    CHECK(cf.d3 == 1);  // |R| = 1: max{d0, 1}^2

    Rng rng(99);
    for (int iter = 0; iter < 40; ++iter) {
        const Grammar g = random_grammar(rng, GrammarShape{});
        const SinkTable table = compute_sink_table(g);
        const GrammarConstants c = compute_constants(g, table);
        const auto d0 = c.d0.convert_to<unsigned>();
        const auto hinc = c.hinc.convert_to<unsigned>();
        const oracle::GmpConstants ref = oracle::gmp_constants(static_cast<unsigned>(g.signature().size()),
                                               static_cast<unsigned>(g.num_rules()), g.signature().max_arity(),
                                               d0, hinc, static_cast<unsigned>(nonvar_rhs_subterms(g).size()));
        CHECK(c.d1 == as_big(ref.d1));
        CHECK(c.d4 == as_big(ref.d4));
        CHECK(c.c == as_big(ref.c));
    }
}

// Adding a rule can make a new (A,i) pair sinkable, with a longer word than any
// before, so d0 itself is not monotone. Stored words never get longer, and d0 does
// not grow while the set of sinkable pairs stays the same.
TEST_CASE("constants are monotone under adding rules") {
    Rng rng(41);
    for (int iter = 0; iter < 60; ++iter) {
        const Grammar g = random_grammar(rng, GrammarShape{});
        const GrammarConstants c = compute_constants(g, compute_sink_table(g));
        Grammar bigger = parse_grammar(format_grammar(g));
        const auto lhs = static_cast<NontermId>(rng.below(bigger.signature().size()));
        const TermShape shape{static_cast<unsigned>(rng.below(3)), bigger.signature().arity(lhs), 30};
        const TermId rhs = random_term(bigger.store(), rng, shape);
        bigger.add_rule("extra", lhs, static_cast<ActionId>(rng.below(bigger.num_actions())), rhs);
        const SinkTable before = compute_sink_table(g);
        const SinkTable after = compute_sink_table(bigger);
        const GrammarConstants c2 = compute_constants(bigger, after);
        for (const auto& [key, w] : before.entries()) {
            REQUIRE(after.find(key.first, key.second) != nullptr);
            CHECK(after.find(key.first, key.second)->size() <= w.size());
        }
        if (after.entries().size() == before.entries().size()) CHECK(c2.d0 <= c.d0);
        CHECK(c2.stepinc >= c.stepinc);
        CHECK(c2.hinc >= c.hinc);
    }
}
