#include "fog/equiv.hpp"

#include "fog/errors.hpp"
#include "fog/lts.hpp"

#include <algorithm>
#include <set>

namespace fog {

namespace {

std::uint64_t pair_key(TermId t, TermId u) {
    if (t > u) std::swap(t, u);
    return (static_cast<std::uint64_t>(t) << 32) | u;
}

}  // namespace

EqOracle::EqOracle(const Grammar& g, unsigned cutoff, bool memoize) : g_(&g), cutoff_(cutoff), memoize_(memoize) {
    if (cutoff == 0) throw PreconditionError("cutoff must be at least 1");
}

const std::vector<Move>& EqOracle::moves(TermId t) {
    auto it = succ_.find(t);
    if (it != succ_.end()) return it->second;
    std::vector<Move> out;
    for (ActionId a = 0; a < g_->num_actions(); ++a) {
        for (const auto& [r, target] : step_action(*g_, t, a)) out.push_back({a, r, target});
    }
    return succ_.emplace(t, std::move(out)).first->second;
}

// Lowest value the attacker reaches by moving from `att` and letting the defender
// answer from `def`, capped at `bound`.
unsigned EqOracle::solve_side(const std::vector<Move>& att, const std::vector<Move>& def, unsigned bound) {
    unsigned result = bound;
    for (const Move& m : att) {
        if (result == 0) break;
        unsigned best = 0;
        bool answered = false;
        for (const Move& d : def) {
            if (d.action != m.action) continue;
            answered = true;
            best = std::max(best, solve(m.target, d.target, result - 1));
            if (best == result - 1) break;
        }
        result = answered ? std::min(result, best + 1) : 0;
    }
    return result;
}

unsigned EqOracle::solve(TermId t, TermId u, unsigned bound) {
    ++queries_;
    if (bound == 0 || t == u) return bound;
    TermStore& ts = store();
    if (ts.is_var(t) || ts.is_var(u)) return 0;
    const std::uint64_t key = pair_key(t, u);
    if (memoize_) {
        auto it = memo_.find(key);
        if (it != memo_.end()) {
            if (it->second.lo >= bound) return bound;
            if (it->second.hi == it->second.lo + 1) return it->second.lo;
        }
    }
    // Copies: recursion may grow the successor cache.
    const std::vector<Move> mt = moves(t);
    const std::vector<Move> mu = moves(u);
    unsigned result = solve_side(mt, mu, bound);
    result = solve_side(mu, mt, result);
    if (memoize_) {
        Bounds& b = memo_[key];
        if (result < bound) {
            b.lo = result;
            b.hi = result + 1;
        } else {
            b.lo = std::max(b.lo, bound);
        }
    }
    return result;
}

unsigned EqOracle::level_capped(TermId t, TermId u, unsigned bound) {
    if (bound > cutoff_) throw PreconditionError("bound exceeds the cutoff");
    return solve(t, u, bound);
}

bool EqOracle::check(TermId t, TermId u, unsigned k) {
    if (k > cutoff_) throw PreconditionError("k = " + std::to_string(k) + " exceeds the cutoff");
    return solve(t, u, k) >= k;
}

EqLevel EqOracle::eq_level(TermId t, TermId u) {
    const unsigned e = solve(t, u, cutoff_);
    return e < cutoff_ ? EqLevel::finite(e) : EqLevel::at_least(cutoff_);
}

EqLevel EqOracle::eq_level_subst(const Substitution& s1, const Substitution& s2) {
    std::set<VarIndex> dom;
    for (VarIndex x : s1.support()) dom.insert(x);
    for (VarIndex x : s2.support()) dom.insert(x);
    TermStore& ts = store();
    unsigned e = cutoff_;
    for (VarIndex x : dom) {
        const TermId a = s1.image(ts, x);
        const TermId b = s2.image(ts, x);
        e = std::min(e, solve(a, b, e));
        if (e == 0) break;
    }
    return e < cutoff_ ? EqLevel::finite(e) : EqLevel::at_least(cutoff_);
}

AttackerMove EqOracle::attacker_optimal(TermId t, TermId u) {
    const unsigned e = solve(t, u, cutoff_);
    if (e == 0 || e >= cutoff_) {
        throw PreconditionError("attacker move needs 0 < eqlevel < cutoff, got " +
                                (e >= cutoff_ ? "at-least " : std::string()) + std::to_string(e));
    }
    const std::vector<Move> mt = moves(t);
    const std::vector<Move> mu = moves(u);
    for (ActionId a = 0; a < g_->num_actions(); ++a) {
        for (Side side : {Side::left, Side::right}) {
            const auto& att = side == Side::left ? mt : mu;
            const auto& def = side == Side::left ? mu : mt;
            for (const Move& m : att) {
                if (m.action != a) continue;
                unsigned best = 0;
                for (const Move& d : def) {
                    if (d.action == a) best = std::max(best, solve(m.target, d.target, e));
                }
                if (best + 1 == e) return {side, m.rule, m.target};
            }
        }
    }
    throw InvariantError("no attacker move realizes the eq-level");
}

Move EqOracle::defender_optimal(TermId t, TermId u, const AttackerMove& m) {
    const TermId from = m.side == Side::left ? t : u;
    const TermId against = m.side == Side::left ? u : t;
    const auto fired = step_rule(*g_, from, m.rule);
    if (!fired || *fired != m.target) throw PreconditionError("attacker move does not fire");
    if (solve(t, u, 1) < 1) throw PreconditionError("defender move needs eqlevel >= 1");
    const ActionId a = g_->rule(m.rule).action;
    const std::vector<Move> def = moves(against);
    const Move* best = nullptr;
    unsigned best_level = 0;
    for (const Move& d : def) {
        if (d.action != a) continue;
        const unsigned lv = solve(m.target, d.target, cutoff_);
        if (best == nullptr || lv > best_level) {
            best = &d;
            best_level = lv;
        }
    }
    if (best == nullptr) throw InvariantError("no response although eqlevel >= 1");
    return *best;
}

std::optional<bool> bisimilar_by_closure(const Grammar& g, TermId t, TermId u, std::size_t max_pairs) {
    const TermStore& ts = g.store();
    struct Node {
        TermId t, u;
        bool bad = false;
        // Per move on either side: indices of the pairs answering it.
        std::vector<std::vector<std::size_t>> answers;
    };
    std::vector<Node> nodes;
    std::unordered_map<std::uint64_t, std::size_t> index;
    auto intern = [&](TermId a, TermId b) -> std::optional<std::size_t> {
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        if (nodes.size() >= max_pairs) return std::nullopt;
        index.emplace(key, nodes.size());
        nodes.push_back({a, b, false, {}});
        return nodes.size() - 1;
    };
    intern(t, u);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const TermId a = nodes[i].t;
        const TermId b = nodes[i].u;
        if (a == b) continue;
        if (ts.is_var(a) || ts.is_var(b)) {
            nodes[i].bad = true;
            continue;
        }
        std::vector<std::vector<std::size_t>> answers;
        for (ActionId act = 0; act < g.num_actions(); ++act) {
            const auto ma = step_action(g, a, act);
            const auto mb = step_action(g, b, act);
            for (int side = 0; side < 2; ++side) {
                const auto& att = side == 0 ? ma : mb;
                const auto& def = side == 0 ? mb : ma;
                for (const auto& m : att) {
                    std::vector<std::size_t> resp;
                    for (const auto& d : def) {
                        const auto j = side == 0 ? intern(m.second, d.second) : intern(d.second, m.second);
                        if (!j) return std::nullopt;
                        resp.push_back(*j);
                    }
                    answers.push_back(std::move(resp));
                }
            }
        }
        nodes[i].answers = std::move(answers);
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (Node& nd : nodes) {
            if (nd.bad) continue;
            for (const auto& resp : nd.answers) {
                if (std::none_of(resp.begin(), resp.end(), [&](std::size_t j) { return !nodes[j].bad; })) {
                    nd.bad = true;
                    changed = true;
                    break;
                }
            }
        }
    }
    return !nodes.front().bad;
}

namespace {

struct WitnessSearch {
    EqOracle& o;
    const Substitution& sigma;
    RuleWord left_word;
    RuleWord right_word;

    // k = eqlevel(e, f) exactly; eqlevel(eσ, fσ) > k.
    SinkWitness run(TermId e, TermId f, unsigned k) {
        TermStore& ts = o.store();
        if (k == 0) {
            for (Side s : {Side::left, Side::right}) {
                const TermId v = s == Side::left ? e : f;
                const TermId h = s == Side::left ? f : e;
                if (!ts.is_var(v) || v == h) continue;
                const VarIndex x = ts.var_index(v);
                if (!sigma.lookup(x)) throw InvariantError("witness variable outside the support");
                SinkWitness w;
                w.var = x;
                w.other = h;
                w.var_side = s;
                w.var_word = s == Side::left ? left_word : right_word;
                w.other_word = s == Side::left ? right_word : left_word;
                w.actions = labels(o.grammar(), w.var_word);
                return w;
            }
            throw InvariantError("level-0 pair without a variable");
        }
        const AttackerMove am = o.attacker_optimal(e, f);
        const TermId es = apply_subst(ts, e, sigma);
        const TermId fs = apply_subst(ts, f, sigma);
        const AttackerMove lifted{am.side, am.rule, apply_subst(ts, am.target, sigma)};
        const Move resp = o.defender_optimal(es, fs, lifted);
        const TermId answered_from = am.side == Side::left ? f : e;
        const auto answered = step_rule(o.grammar(), answered_from, resp.rule);
        if (!answered) throw InvariantError("defender answer does not fire before substitution");
        const TermId e2 = am.side == Side::left ? am.target : *answered;
        const TermId f2 = am.side == Side::left ? *answered : am.target;
        left_word.push_back(am.side == Side::left ? am.rule : resp.rule);
        right_word.push_back(am.side == Side::left ? resp.rule : am.rule);
        return run(e2, f2, o.level_capped(e2, f2, o.cutoff()));
    }
};

}  // namespace

SinkWitness find_sink_witness(EqOracle& o, TermId e, TermId f, const Substitution& sigma, unsigned k,
                              unsigned l) {
    TermStore& ts = o.store();
    if (k >= l || l >= o.cutoff()) throw PreconditionError("witness needs k < l < cutoff");
    if (o.eq_level(e, f) != EqLevel::finite(k)) throw PreconditionError("eqlevel(E,F) differs from k");
    if (o.eq_level(apply_subst(ts, e, sigma), apply_subst(ts, f, sigma)) != EqLevel::finite(l)) {
        throw PreconditionError("eqlevel(E sigma, F sigma) differs from l");
    }
    WitnessSearch search{o, sigma, {}, {}};
    return search.run(e, f, k);
}

}  // namespace fog
