#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fog/errors.hpp"
#include "fog/lts.hpp"
#include "fog/random.hpp"
#include "fog/term_text.hpp"

#include <algorithm>
#include <functional>

using namespace fog;

namespace {

const std::string kDir = FOG_GRAMMAR_DIR;

RuleId rule(const Grammar& g, const char* name) { return *g.find_rule(name); }

// Random walk of up to `len` steps; stops early at dead terms.
PathRecord random_path(const Grammar& g, Rng& rng, TermId start, std::size_t len) {
    RuleWord w;
    TermId here = start;
    for (std::size_t k = 0; k < len; ++k) {
        if (g.store().is_var(here)) break;
        const auto& rs = g.rules_of(g.store().head(here));
        if (rs.empty()) break;
        const RuleId r = rs[rng.below(rs.size())];
        w.push_back(r);
        here = *step_rule(g, here, r);
    }
    return *run_word(g, start, w);
}

// Exhaustive search for a factorization into sink segments shorter than d0 followed
// by a residue shorter than d0.
bool d0_sinking_bruteforce(const Grammar& g, const PathRecord& p, std::size_t d0) {
    std::function<bool(std::size_t)> from = [&](std::size_t pos) {
        if (p.length() - pos < d0) return true;
        for (std::size_t len = 1; len < d0 && pos + len <= p.length(); ++len) {
            PathRecord seg;
            seg.start = p.terms[pos];
            seg.word.assign(p.word.begin() + static_cast<std::ptrdiff_t>(pos),
                            p.word.begin() + static_cast<std::ptrdiff_t>(pos + len));
            seg.terms.assign(p.terms.begin() + static_cast<std::ptrdiff_t>(pos),
                             p.terms.begin() + static_cast<std::ptrdiff_t>(pos + len + 1));
            if (is_sink_segment(g, seg) && from(pos + len)) return true;
        }
        return false;
    };
    return from(0);
}

}  // namespace

TEST_CASE("sharing grammar transitions") {
    const Grammar g = load_grammar(kDir + "/sharing.fog");
    TermStore& ts = g.store();
    const TermId e1 = parse_term(ts, "A(D(x5,C(x2,B)),x5,B)");
    const TermId e3 = parse_term(ts, "#1=A(D(x5,C(#1,B)),x5,B)");
    CHECK(step_rule(g, e3, rule(g, "r1")) == ts.var(5));
    CHECK(step_rule(g, e1, rule(g, "r2")) == parse_term(ts, "C(x5,D(x5,D(x5,C(x2,B))))"));
    CHECK_FALSE(step_rule(g, ts.var(3), rule(g, "r1")).has_value());
    CHECK_FALSE(step_rule(g, parse_term(ts, "B"), rule(g, "r1")).has_value());
    CHECK_THROWS_AS(step_rule(g, e1, 99), ValidationError);

    const auto succ = step_action(g, e1, *g.find_action("a"));
    REQUIRE(succ.size() == 1);
    CHECK(succ[0].first == rule(g, "r2"));
    CHECK(succ[0].second == parse_term(ts, "C(x5,D(x5,D(x5,C(x2,B))))"));
    CHECK(step_action(g, ts.var(3), 0).empty());
    CHECK(step_action(g, e3, *g.find_action("b")).front().second == ts.var(5));
}

TEST_CASE("G1 action successors") {
    const Grammar g = load_grammar(kDir + "/g1.fog");
    TermStore& ts = g.store();
    const auto succ = step_action(g, parse_term(ts, "A(Z)"), *g.find_action("a"));
    REQUIRE(succ.size() == 1);
    CHECK(succ[0].first == rule(g, "r1"));
    CHECK(succ[0].second == parse_term(ts, "Z"));
}

TEST_CASE("running words") {
    const Grammar g = load_grammar(kDir + "/popping.fog");
    TermStore& ts = g.store();
    const TermId start = parse_term(ts, "A(T1,T2,B(T3,T4))");
    auto p = run_word(g, start, {rule(g, "r1"), rule(g, "r2")});
    REQUIRE(p);
    CHECK(p->terms[1] == parse_term(ts, "C(D(T2,B(T3,T4)),B(T3,T4))"));
    CHECK(p->end() == parse_term(ts, "B(T3,T4)"));
    auto longer = run_word(g, start, {rule(g, "r1"), rule(g, "r2"), rule(g, "r3"), rule(g, "r4")});
    REQUIRE(longer);
    CHECK(longer->end() == parse_term(ts, "T4"));
    CHECK_FALSE(run_word(g, start, {rule(g, "r2")}).has_value());

    auto empty = run_word(g, start, {});
    REQUIRE(empty);
    CHECK(empty->end() == start);
    CHECK(empty->terms.size() == 1);

    const SinkTable table = compute_sink_table(g);
    for (const auto& [key, w] : table.entries()) {
        auto sink = run_word(g, g.lhs_term(key.first), w);
        REQUIRE(sink);
        CHECK(sink->end() == ts.var(key.second));
    }
}

TEST_CASE("sink segments and d0-sinking paths") {
    const Grammar g = load_grammar(kDir + "/g1.fog");
    TermStore& ts = g.store();
    const RuleId r1 = rule(g, "r1");
    const RuleId r2 = rule(g, "r2");
    CHECK(is_sink_segment(g, *run_word(g, parse_term(ts, "A(Z)"), {r1})));
    CHECK_FALSE(is_sink_segment(g, *run_word(g, parse_term(ts, "A(Z)"), {})));
    CHECK_FALSE(is_sink_segment(g, *run_word(g, parse_term(ts, "A(Z)"), {r2})));
    // A(x1) -r2 r1 r1-> x1 sinks to the root successor in three steps
    CHECK(is_sink_segment(g, *run_word(g, parse_term(ts, "A(Z)"), {r2, r1, r1})));

    CHECK(is_d0_sinking(g, *run_word(g, parse_term(ts, "A(A(Z))"), {}), 2));
    CHECK(is_d0_sinking(g, *run_word(g, parse_term(ts, "A(A(Z))"), {r1, r1}), 2));
    CHECK(is_d0_sinking(g, *run_word(g, parse_term(ts, "A(Z)"), {r1}), 2));
    CHECK_FALSE(is_d0_sinking(g, *run_word(g, parse_term(ts, "A(Z)"), {r2, r2}), 2));
    CHECK(is_d0_sinking(g, *run_word(g, parse_term(ts, "A(Z)"), {r2, r2}), 3));
}

TEST_CASE("stairs and their decomposition") {
    const Grammar g = load_grammar(kDir + "/g1.fog");
    TermStore& ts = g.store();
    const RuleId r1 = rule(g, "r1");
    const RuleId r2 = rule(g, "r2");
    CHECK(simple_stair_decompose(g, *run_word(g, parse_term(ts, "A(Z)"), {})).empty());
    const auto one = simple_stair_decompose(g, *run_word(g, parse_term(ts, "A(Z)"), {r2}));
    REQUIRE(one.size() == 1);
    CHECK(one[0] == RuleWord{r2});
    const auto up_down = simple_stair_decompose(g, *run_word(g, parse_term(ts, "A(Z)"), {r2, r1}));
    REQUIRE(up_down.size() == 1);
    CHECK(up_down[0] == (RuleWord{r2, r1}));
    CHECK(is_simple_stair(g, {r2, r1}));
    CHECK_FALSE(is_stair(g, {r1}));
    CHECK_THROWS_AS(simple_stair_decompose(g, *run_word(g, parse_term(ts, "A(Z)"), {r1})), PreconditionError);
    const auto two = simple_stair_decompose(g, *run_word(g, parse_term(ts, "A(Z)"), {r2, r2, r1}));
    CHECK(two.size() == 2);
}

// A nullary term has height 0 while a rule rhs of height hinc+1 can replace it, so
// the height bound needs max(height, 1) as its base for nullary starts.
TEST_CASE("path size and height growth on random grammars") {
    Rng rng(2024);
    for (int gi = 0; gi < 30; ++gi) {
        const Grammar g = random_grammar(rng, GrammarShape{});
        TermStore& ts = g.store();
        const GrammarConstants c = compute_constants(g, compute_sink_table(g));
        const auto stepinc = c.stepinc.convert_to<std::size_t>();
        const auto hinc = c.hinc.convert_to<std::size_t>();
        const auto d0 = c.d0.convert_to<std::size_t>();
        for (int iter = 0; iter < 40; ++iter) {
            const TermId start = iter % 5 == 0 ? random_regular_term(ts, rng, 4, 3)
                                               : random_term(ts, rng, TermShape{3, 3, 20});
            const PathRecord p = random_path(g, rng, start, 1 + rng.below(8));
            CHECK(pressize(ts, {p.end()}) <= pressize(ts, {start}) + p.length() * stepinc);
            if (ts.is_finite(start)) {
                const std::size_t h0 = height(ts, start);
                if (h0 > 0) CHECK(height(ts, p.end()) <= h0 + p.length() * hinc);
                CHECK(height(ts, p.end()) <= std::max<std::size_t>(h0, 1) + p.length() * hinc);
            }
            const auto vin = varin(ts, {start});
            for (VarIndex x : varin(ts, {p.end()})) CHECK(vin.count(x) == 1);
            if (p.length() > 0) CHECK(step_rule(g, start, p.word[0]) == p.terms[1]);
            CHECK(is_d0_sinking(g, p, d0) == d0_sinking_bruteforce(g, p, d0));

            // several paths of bounded length share the start's subterms
            std::vector<TermId> ends;
            const std::size_t bound = 4;
            const std::size_t count = 1 + rng.below(4);
            for (std::size_t k = 0; k < count; ++k) ends.push_back(random_path(g, rng, start, bound).end());
            CHECK(pressize(ts, ends) <= pressize(ts, {start}) + count * bound * stepinc);

            // every stair splits into simple stairs that each grow the term by at most stepinc
            if (p.length() > 0 && is_stair(g, p.word)) {
                const auto parts = simple_stair_decompose(g, p);
                RuleWord joined;
                for (const RuleWord& part : parts) {
                    CHECK(is_simple_stair(g, part));
                    joined.insert(joined.end(), part.begin(), part.end());
                }
                CHECK(joined == p.word);
                CHECK(pressize(ts, {p.end()}) <= pressize(ts, {start}) + parts.size() * stepinc);
                if (ts.is_finite(start)) {
                    const std::size_t h0 = height(ts, start);
                    if (h0 > 0) CHECK(height(ts, p.end()) <= h0 + parts.size() * hinc);
                    CHECK(height(ts, p.end()) <= std::max<std::size_t>(h0, 1) + parts.size() * hinc);
                }
            }
        }
    }
}
