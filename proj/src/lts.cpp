#include "fog/lts.hpp"

#include "fog/errors.hpp"

namespace fog {

namespace {

TermId instantiate(TermStore& ts, TermId rhs, TermId t) {
    if (ts.is_var(rhs)) return ts.child(t, ts.var_index(rhs));
    const unsigned n = ts.arity(rhs);
    std::vector<TermId> kids(n);
    for (unsigned i = 0; i < n; ++i) kids[i] = instantiate(ts, ts.child(rhs, i + 1), t);
    return ts.app(ts.head(rhs), kids);
}

}  // namespace

std::optional<TermId> step_rule(const Grammar& g, TermId t, RuleId r) {
    if (r >= g.num_rules()) throw ValidationError("unknown rule id " + std::to_string(r));
    TermStore& ts = g.store();
    const Rule& rule = g.rule(r);
    if (ts.is_var(t) || ts.head(t) != rule.lhs) return std::nullopt;
    return instantiate(ts, rule.rhs, t);
}

std::vector<std::pair<RuleId, TermId>> step_action(const Grammar& g, TermId t, ActionId a) {
    if (a >= g.num_actions()) throw ValidationError("unknown action id " + std::to_string(a));
    std::vector<std::pair<RuleId, TermId>> out;
    TermStore& ts = g.store();
    if (ts.is_var(t)) return out;
    for (RuleId r : g.rules_of(ts.head(t), a)) out.emplace_back(r, instantiate(ts, g.rule(r).rhs, t));
    return out;
}

std::vector<ActionId> enabled_actions(const Grammar& g, TermId t) {
    std::vector<ActionId> out;
    const TermStore& ts = g.store();
    if (ts.is_var(t)) return out;
    for (ActionId a = 0; a < g.num_actions(); ++a) {
        if (!g.rules_of(ts.head(t), a).empty()) out.push_back(a);
    }
    return out;
}

std::optional<PathRecord> run_word(const Grammar& g, TermId t, const RuleWord& w) {
    PathRecord p;
    p.start = t;
    p.word = w;
    p.terms.reserve(w.size() + 1);
    p.terms.push_back(t);
    for (RuleId r : w) {
        auto next = step_rule(g, p.terms.back(), r);
        if (!next) return std::nullopt;
        p.terms.push_back(*next);
    }
    return p;
}

PathRecord replay_from_lhs(const Grammar& g, NontermId a, const RuleWord& w) {
    PathRecord p;
    p.start = g.lhs_term(a);
    p.terms.push_back(p.start);
    for (RuleId r : w) {
        auto next = step_rule(g, p.terms.back(), r);
        if (!next) break;
        p.word.push_back(r);
        p.terms.push_back(*next);
        if (g.store().is_var(*next)) break;
    }
    return p;
}

std::optional<std::size_t> sink_prefix_length(const Grammar& g, NontermId a, const RuleWord& w) {
    const PathRecord p = replay_from_lhs(g, a, w);
    if (p.length() > 0 && g.store().is_var(p.end())) return p.length();
    return std::nullopt;
}

bool is_sink_segment(const Grammar& g, const PathRecord& p) {
    const TermStore& ts = g.store();
    if (p.word.empty() || ts.is_var(p.start)) return false;
    const PathRecord abs = replay_from_lhs(g, ts.head(p.start), p.word);
    if (abs.length() != p.length() || !ts.is_var(abs.end())) return false;
    return ts.child(p.start, ts.var_index(abs.end())) == p.end();
}

bool is_d0_sinking(const Grammar& g, const PathRecord& p, std::size_t d0) {
    const TermStore& ts = g.store();
    std::size_t pos = 0;
    while (pos < p.length()) {
        const TermId here = p.terms[pos];
        if (ts.is_var(here)) break;
        const RuleWord rest(p.word.begin() + static_cast<std::ptrdiff_t>(pos), p.word.end());
        auto len = sink_prefix_length(g, ts.head(here), rest);
        if (!len || *len >= d0) break;
        pos += *len;
    }
    return p.length() - pos < d0;
}

bool is_stair(const Grammar& g, const RuleWord& w) {
    if (w.empty()) return true;
    const NontermId a = g.rule(w.front()).lhs;
    const PathRecord abs = replay_from_lhs(g, a, w);
    return abs.length() == w.size() && !g.store().is_var(abs.end());
}

bool is_simple_stair(const Grammar& g, const RuleWord& w) {
    if (w.empty()) return false;
    const TermStore& ts = g.store();
    const Rule& r = g.rule(w.front());
    TermId here = r.rhs;
    std::size_t pos = 1;
    while (pos < w.size()) {
        if (ts.is_var(here)) return false;
        const RuleWord rest(w.begin() + static_cast<std::ptrdiff_t>(pos), w.end());
        auto len = sink_prefix_length(g, ts.head(here), rest);
        if (!len) return false;
        const PathRecord seg = replay_from_lhs(g, ts.head(here), rest);
        here = ts.child(here, ts.var_index(seg.end()));
        pos += *len;
    }
    return !ts.is_var(here);
}

std::vector<RuleWord> simple_stair_decompose(const Grammar& g, const PathRecord& p) {
    if (!is_stair(g, p.word)) throw PreconditionError("word is not a stair");
    std::vector<RuleWord> out;
    std::size_t pos = 0;
    while (pos < p.length()) {
        std::size_t cut = pos + 1;
        for (; cut < p.length(); ++cut) {
            const RuleWord rest(p.word.begin() + static_cast<std::ptrdiff_t>(cut), p.word.end());
            if (is_stair(g, rest)) break;
        }
        out.emplace_back(p.word.begin() + static_cast<std::ptrdiff_t>(pos),
                         p.word.begin() + static_cast<std::ptrdiff_t>(cut));
        pos = cut;
    }
    return out;
}

std::vector<ActionId> labels(const Grammar& g, const RuleWord& w) {
    std::vector<ActionId> out;
    out.reserve(w.size());
    for (RuleId r : w) out.push_back(g.rule(r).action);
    return out;
}

}  // namespace fog
