#pragma once

// Reference implementations used to check the library. They deliberately avoid the
// library's canonical ids and caches: everything here works on explicit trees.

#include "fog/grammar.hpp"
#include "fog/lts.hpp"
#include "fog/terms.hpp"

#include <set>
#include <unordered_set>
#include <vector>

#include <string>

namespace oracle {

// Compares the unfoldings of a and b down to `depth` levels by walking labels only.
inline bool unfold_equal(const fog::TermStore& ts, fog::TermId a, fog::TermId b, unsigned depth) {
    if (ts.is_var(a) != ts.is_var(b)) return false;
    if (ts.is_var(a)) return ts.var_index(a) == ts.var_index(b);
    if (ts.head(a) != ts.head(b)) return false;
    if (depth == 0) return true;
    for (unsigned i = 1; i <= ts.arity(a); ++i) {
        if (!unfold_equal(ts, ts.child(a, i), ts.child(b, i), depth - 1)) return false;
    }
    return true;
}

// Tree text of the unfolding cut at `depth` (cut points print as `...`).
inline std::string unfold_text(const fog::TermStore& ts, fog::TermId t, unsigned depth) {
    if (ts.is_var(t)) return "x" + std::to_string(ts.var_index(t));
    std::string out = ts.signature().name(ts.head(t));
    if (ts.arity(t) == 0) return out;
    if (depth == 0) return out + "(...)";
    out += '(';
    for (unsigned i = 1; i <= ts.arity(t); ++i) {
        if (i > 1) out += ',';
        out += unfold_text(ts, ts.child(t, i), depth - 1);
    }
    return out + ')';
}

// Compares node v of a raw graph (stored refs allowed) with a stored term, unfolding
// both down to `depth` levels.
inline bool graph_unfold_equal(const fog::TermStore& ts, const fog::TermGraph& g, std::uint32_t v,
                               fog::TermId t, unsigned depth) {
    const fog::GraphNode& n = g.nodes[v];
    if (n.is_var != ts.is_var(t)) return false;
    if (n.is_var) return n.label == ts.var_index(t);
    if (n.label != ts.head(t)) return false;
    if (depth == 0) return true;
    for (std::size_t i = 0; i < n.args.size(); ++i) {
        const fog::TermId c = ts.child(t, static_cast<unsigned>(i + 1));
        const fog::GraphRef r = n.args[i];
        const bool ok = r.kind == fog::GraphRef::Kind::local
                            ? graph_unfold_equal(ts, g, r.value, c, depth - 1)
                            : unfold_equal(ts, r.value, c, depth - 1);
        if (!ok) return false;
    }
    return true;
}

struct SinkSearch {
    enum class Status { found, absent, inconclusive };
    Status status = Status::absent;
    fog::RuleWord word;
    bool exhausted = false;  // absent because no state was left to explore
};

// Breadth-first search over rule words from A(x1..xm) for the first word, in
// length-then-lexicographic order, that reaches x_i. Terms without x_i are pruned,
// since variables never reappear once lost.
inline SinkSearch bfs_sink_word(const fog::Grammar& g, fog::NontermId a, unsigned i, std::size_t max_len,
                                std::size_t state_cap) {
    fog::TermStore& ts = g.store();
    const fog::TermId target = ts.var(i);
    std::vector<std::pair<fog::TermId, fog::RuleWord>> frontier{{g.lhs_term(a), {}}};
    std::unordered_set<fog::TermId> seen{frontier.front().first};
    for (std::size_t len = 1; len <= max_len && !frontier.empty(); ++len) {
        std::vector<std::pair<fog::TermId, fog::RuleWord>> next;
        for (const auto& [t, w] : frontier) {
            for (fog::RuleId r = 0; r < g.num_rules(); ++r) {
                auto succ = fog::step_rule(g, t, r);
                if (!succ) continue;
                fog::RuleWord w2 = w;
                w2.push_back(r);
                if (*succ == target) return {SinkSearch::Status::found, w2};
                if (ts.is_var(*succ) || fog::varin(ts, {*succ}).count(i) == 0) continue;
                if (!seen.insert(*succ).second) continue;
                if (seen.size() > state_cap) return {SinkSearch::Status::inconclusive, {}};
                next.emplace_back(*succ, std::move(w2));
            }
        }
        frontier = std::move(next);
    }
    return {SinkSearch::Status::absent, {}, frontier.empty()};
}

// k-round bisimulation by the textbook induction with no memo and no level bookkeeping.
inline bool naive_bisim(const fog::Grammar& g, fog::TermId t, fog::TermId u, unsigned k) {
    if (k == 0 || t == u) return true;
    const fog::TermStore& ts = g.store();
    if (ts.is_var(t) || ts.is_var(u)) return false;
    for (fog::ActionId a = 0; a < g.num_actions(); ++a) {
        const auto st = fog::step_action(g, t, a);
        const auto su = fog::step_action(g, u, a);
        for (int dir = 0; dir < 2; ++dir) {
            const auto& att = dir == 0 ? st : su;
            const auto& def = dir == 0 ? su : st;
            for (const auto& m : att) {
                bool matched = false;
                for (const auto& d : def) {
                    if (naive_bisim(g, m.second, d.second, k - 1)) {
                        matched = true;
                        break;
                    }
                }
                if (!matched) return false;
            }
        }
    }
    return true;
}

inline unsigned naive_level(const fog::Grammar& g, fog::TermId t, fog::TermId u, unsigned cap) {
    unsigned k = 0;
    while (k < cap && naive_bisim(g, t, u, k + 1)) ++k;
    return k;
}

// Action words of length <= k enabled in t. A variable x_i gets a private self-loop
// action (numbered num_actions + i), which is what the variable stipulation amounts to.
inline std::set<std::vector<unsigned>> trace_words(const fog::Grammar& g, fog::TermId t, unsigned k) {
    const fog::TermStore& ts = g.store();
    std::set<std::vector<unsigned>> out;
    std::vector<std::pair<fog::TermId, std::vector<unsigned>>> layer{{t, {}}};
    out.insert({});
    for (unsigned len = 0; len < k; ++len) {
        std::vector<std::pair<fog::TermId, std::vector<unsigned>>> next;
        for (const auto& [term, word] : layer) {
            if (ts.is_var(term)) {
                auto w = word;
                w.push_back(static_cast<unsigned>(g.num_actions() + ts.var_index(term)));
                next.emplace_back(term, w);
                continue;
            }
            for (fog::ActionId a = 0; a < g.num_actions(); ++a) {
                for (const auto& [r, target] : fog::step_action(g, term, a)) {
                    auto w = word;
                    w.push_back(a);
                    next.emplace_back(target, w);
                }
            }
        }
        for (const auto& [term, word] : next) out.insert(word);
        layer = std::move(next);
    }
    return out;
}

}  // namespace oracle
