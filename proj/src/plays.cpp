#include "fog/plays.hpp"

#include "fog/errors.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace fog {

Play Play::slice(std::size_t from, std::size_t to) const {
    if (from > to || to > length()) throw PreconditionError("play slice out of range");
    Play p;
    p.pairs.assign(pairs.begin() + from, pairs.begin() + to + 1);
    p.left.assign(left.begin() + from, left.begin() + to);
    p.right.assign(right.begin() + from, right.begin() + to);
    return p;
}

PathRecord Play::path(Side s) const {
    PathRecord p;
    p.start = term(s, 0);
    p.word = word(s);
    for (std::size_t i = 0; i < pairs.size(); ++i) p.terms.push_back(term(s, i));
    return p;
}

bool eqlevel_concatenable(EqOracle& o, const Play& a, const Play& b) {
    const auto [t1, u1] = a.finish();
    const auto [t2, u2] = b.start();
    return o.eq_level(t1, u1) == o.eq_level(t2, u2);
}

std::size_t total_length(const ModifiedPlay& mp) {
    std::size_t n = 0;
    for (const Play& p : mp) n += p.length();
    return n;
}

PlayContext::PlayContext(EqOracle& o)
    : oracle(o),
      sinks(compute_sink_table(o.grammar())),
      constants(compute_constants(o.grammar(), sinks)),
      d0(constants.d0.convert_to<std::size_t>()),
      m(constants.m.convert_to<std::size_t>()) {}

Play build_optimal_play(EqOracle& o, TermId t, TermId u) {
    const EqLevel lv = o.eq_level(t, u);
    if (!lv.is_finite()) throw CutoffError("eqlevel reaches the cutoff " + std::to_string(o.cutoff()));
    Play p = Play::at(t, u);
    for (unsigned e = lv.value(); e > 0; --e) {
        const auto [tc, uc] = p.finish();
        const AttackerMove am = o.attacker_optimal(tc, uc);
        const Move resp = o.defender_optimal(tc, uc, am);
        if (am.side == Side::left) {
            p.left.push_back(am.rule);
            p.right.push_back(resp.rule);
            p.pairs.emplace_back(am.target, resp.target);
        } else {
            p.left.push_back(resp.rule);
            p.right.push_back(am.rule);
            p.pairs.emplace_back(resp.target, am.target);
        }
    }
    return p;
}

std::optional<BalanceSetup> enables_balancing(const Grammar& g, const Play& rho, std::size_t d0, Side side) {
    if (rho.length() != d0) return std::nullopt;
    const TermStore& ts = g.store();
    const TermId t = rho.term(side, 0);
    if (ts.is_var(t)) return std::nullopt;
    const PathRecord replay = replay_from_lhs(g, ts.head(t), rho.word(side));
    if (replay.length() != d0) return std::nullopt;
    BalanceSetup s;
    s.head = ts.head(t);
    s.args.assign(ts.children(t).begin(), ts.children(t).end());
    s.eprime = replay.end();
    return s;
}

namespace {

// Words from `from` whose label image is `acts`, in lexicographic rule order.
void for_each_labelled_path(const Grammar& g, TermId from, const std::vector<ActionId>& acts, RuleWord& prefix,
                            const auto& visit) {
    if (prefix.size() == acts.size()) {
        visit(prefix, from);
        return;
    }
    for (const auto& [r, next] : step_action(g, from, acts[prefix.size()])) {
        prefix.push_back(r);
        for_each_labelled_path(g, next, acts, prefix, visit);
        prefix.pop_back();
    }
}

TermPair oriented(Side balanced, TermId balanced_term, TermId pivot_term) {
    return balanced == Side::left ? TermPair{balanced_term, pivot_term} : TermPair{pivot_term, balanced_term};
}

}  // namespace

BalanceStep balance_step(PlayContext& ctx, const Play& rho, Side side) {
    const Grammar& g = ctx.oracle.grammar();
    TermStore& ts = g.store();
    const auto setup = enables_balancing(g, rho, ctx.d0, side);
    if (!setup) throw PreconditionError("segment does not enable balancing on side " + std::string(side_name(side)));
    const Side ps = other(side);
    BalanceStep st;
    st.side = side;
    st.setup = *setup;
    st.pivot = rho.term(ps, 0);
    st.pivot_word = rho.word(ps);
    st.before = rho.finish();
    const EqLevel before = ctx.oracle.eq_level(st.before.first, st.before.second);
    if (!before.is_finite()) throw CutoffError("segment end is not below the cutoff");
    st.level = before.value();

    Substitution bal;
    for (unsigned i = 1; i <= setup->args.size(); ++i) {
        const RuleWord* sink = ctx.sinks.find(setup->head, i);
        RuleWord best_word;
        TermId best = st.pivot;
        if (sink != nullptr) {
            const std::vector<ActionId> acts = labels(g, *sink);
            const TermId xi = setup->args[i - 1];
            bool found = false;
            unsigned best_level = 0;
            RuleWord prefix;
            for_each_labelled_path(g, st.pivot, acts, prefix, [&](const RuleWord& w, TermId v) {
                const unsigned lv = ctx.oracle.level_capped(xi, v, ctx.oracle.cutoff());
                if (!found || lv > best_level) {
                    found = true;
                    best_level = lv;
                    best_word = w;
                    best = v;
                }
            });
            if (!found || best_level <= st.level) {
                throw InvariantError("no balancing target for x" + std::to_string(i) + " above level " +
                                     std::to_string(st.level));
            }
        }
        st.vbar.push_back(best_word);
        st.targets.push_back(best);
        bal.bind(ts, i, best);
    }
    st.result = oriented(side, apply_subst(ts, setup->eprime, bal), rho.term(ps, rho.length()));
    const EqLevel after = ctx.oracle.eq_level(st.result.first, st.result.second);
    if (after != before) {
        throw InvariantError("bal-result level " + after.str() + " differs from " + before.str());
    }
    return st;
}

std::optional<TermPair> balance_tops(const Grammar& g, const BalanceStep& step, TermId top) {
    TermStore& ts = g.store();
    const auto f = run_word(g, top, step.pivot_word);
    if (!f) return std::nullopt;
    Substitution bar;
    for (unsigned i = 1; i <= step.vbar.size(); ++i) {
        const auto fi = run_word(g, top, step.vbar[i - 1]);
        if (!fi) return std::nullopt;
        bar.bind(ts, i, fi->end());
    }
    return oriented(step.side, apply_subst(ts, step.setup.eprime, bar), f->end());
}

std::optional<Play> Phase::sink_part() const {
    if (!has_sink) return std::nullopt;
    return mu.slice(unclear, mu.length());
}

std::size_t BalancedPlay::length() const {
    std::size_t n = mu0.length();
    for (const Phase& ph : phases) n += ph.rho.length() + ph.mu.length();
    return n;
}

ModifiedPlay BalancedPlay::segments() const {
    ModifiedPlay mp;
    Play first = mu0;
    if (!phases.empty()) {
        const Play& r = phases.front().rho;
        first.pairs.insert(first.pairs.end(), r.pairs.begin() + 1, r.pairs.end());
        first.left.insert(first.left.end(), r.left.begin(), r.left.end());
        first.right.insert(first.right.end(), r.right.begin(), r.right.end());
    }
    mp.push_back(first);
    for (std::size_t j = 0; j < phases.size(); ++j) {
        Play p = phases[j].mu;
        if (j + 1 < phases.size()) {
            const Play& r = phases[j + 1].rho;
            p.pairs.insert(p.pairs.end(), r.pairs.begin() + 1, r.pairs.end());
            p.left.insert(p.left.end(), r.left.begin(), r.left.end());
            p.right.insert(p.right.end(), r.right.begin(), r.right.end());
        }
        mp.push_back(p);
    }
    return mp;
}

namespace {

// Steps after which running w from e (over x_1..x_m) first reaches a variable.
std::optional<std::pair<std::size_t, VarIndex>> exposure(const Grammar& g, TermId e, const RuleWord& w) {
    const TermStore& ts = g.store();
    TermId cur = e;
    for (std::size_t q = 0;; ++q) {
        if (ts.is_var(cur)) return std::pair{q, ts.var_index(cur)};
        if (q == w.size()) return std::nullopt;
        const auto next = step_rule(g, cur, w[q]);
        if (!next) throw InvariantError("balanced side diverges from its top");
        cur = *next;
    }
}

RuleWord concat(RuleWord a, const RuleWord& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

Balanced transform_to_balanced(PlayContext& ctx, TermId t, TermId u) {
    const Grammar& g = ctx.oracle.grammar();
    const std::size_t d0 = ctx.d0;
    Balanced out;
    BalancedPlay& bp = out.play;
    bp.start = {t, u};
    Play pi = build_optimal_play(ctx.oracle, t, u);
    bp.level = static_cast<unsigned>(pi.length());

    // Phase 1: the first window that enables balancing, L preferred.
    std::optional<std::pair<std::size_t, Side>> first;
    for (std::size_t p = 0; p + d0 <= pi.length() && !first; ++p) {
        const Play w = pi.slice(p, p + d0);
        if (enables_balancing(g, w, d0, Side::left)) {
            first = {p, Side::left};
        } else if (enables_balancing(g, w, d0, Side::right)) {
            first = {p, Side::right};
        }
    }
    if (!first) {
        bp.mu0 = pi;
        return out;
    }
    bp.mu0 = pi.slice(0, first->first);
    PivotPath& pp = out.pivots;
    {
        const Side ps = other(first->second);
        pp.terms.push_back(pi.term(ps, 0));
        pp.sides.push_back(ps);
        pp.words.push_back(bp.mu0.word(ps));
        pp.unclear.push_back(0);
    }
    Play rho = pi.slice(first->first, first->first + d0);
    Side side = first->second;

    while (true) {
        Phase ph;
        ph.rho = rho;
        ph.bal = balance_step(ctx, rho, side);
        const Side ps = other(side);
        pp.terms.push_back(rho.term(ps, 0));
        pp.sides.push_back(ps);

        const Play rest = build_optimal_play(ctx.oracle, ph.bal.result.first, ph.bal.result.second);
        const auto exp = exposure(g, ph.bal.setup.eprime, rest.word(side));

        std::optional<std::pair<std::size_t, bool>> next;  // (position, switched)
        for (std::size_t p = 0; p + d0 <= rest.length() && !next; ++p) {
            const Play w = rest.slice(p, p + d0);
            if (enables_balancing(g, w, d0, side)) {
                next = {p, false};
            } else if (enables_balancing(g, w, d0, ps) && exp && exp->first <= p) {
                next = {p, true};
            }
        }
        ph.mu = next ? rest.slice(0, next->first) : rest;
        if (exp && exp->first <= ph.mu.length()) {
            ph.unclear = exp->first;
            ph.has_sink = true;
        } else {
            ph.unclear = ph.mu.length();
        }
        ph.switched = next && next->second;
        if (ph.switched) {
            const RuleWord& vbar = ph.bal.vbar.at(exp->second - 1);
            if (ph.bal.targets.at(exp->second - 1) != ph.mu.term(side, exp->first)) {
                throw InvariantError("exposed variable does not lead to its balancing target");
            }
            const RuleWord tail(ph.mu.word(side).begin() + static_cast<std::ptrdiff_t>(exp->first),
                                ph.mu.word(side).end());
            pp.words.push_back(concat(vbar, tail));
            pp.unclear.push_back(vbar.size());
        } else {
            pp.words.push_back(concat(rho.word(ps), ph.mu.word(ps)));
            pp.unclear.push_back(d0 + ph.unclear);
        }
        bp.phases.push_back(ph);
        if (!next) {
            pp.terms.push_back(ph.mu.term(ps, ph.mu.length()));
            pp.sides.push_back(ps);
            break;
        }
        rho = rest.slice(next->first, next->first + d0);
        if (ph.switched) side = ps;
    }
    return out;
}

std::set<TermId> subterm_set(const TermStore& ts, TermPair start) {
    const TermId roots[] = {start.first, start.second};
    const std::vector<TermId> all = subterms(ts, roots);
    return {all.begin(), all.end()};
}

Refinement refine_segments(const Grammar& g, const Balanced& b, const std::set<TermId>& subterms) {
    (void)g;
    const BalancedPlay& bp = b.play;
    const std::size_t ell = bp.phases.size();
    Refinement r;
    r.usink.assign(ell + 1, 0);
    r.csink.assign(ell + 1, 0);
    r.close.assign(ell + 1, false);
    r.last_visit.assign(ell + 1, 0);
    r.csink[0] = bp.mu0.length();

    auto visits = [&](const PathRecord& p, std::size_t upto) {
        for (std::size_t i = 0; i <= upto; ++i) {
            if (subterms.count(p.terms[i])) return true;
        }
        return false;
    };
    for (std::size_t j = 1; j <= ell; ++j) {
        const auto sink = bp.phases[j - 1].sink_part();
        if (!sink) continue;
        const PathRecord lp = sink->path(Side::left);
        const PathRecord rp = sink->path(Side::right);
        std::optional<std::size_t> cut;
        for (std::size_t i = 0; i <= sink->length() && !cut; ++i) {
            if (visits(lp, i) && visits(rp, i)) cut = i;
        }
        r.usink[j] = cut ? *cut : sink->length();
        r.csink[j] = sink->length() - r.usink[j];
    }
    if (ell == 0) return r;

    // W_j is close when the segment into it visits a subterm of the start pair.
    for (std::size_t j = 1; j <= ell; ++j) {
        const PivotPath& pp = b.pivots;
        const auto seg = run_word(g, pp.terms[j - 1], pp.words[j - 1]);
        if (!seg) throw InvariantError("pivot path does not replay");
        for (std::size_t i = seg->terms.size(); i-- > 0;) {
            if (subterms.count(seg->terms[i])) {
                r.close[j] = true;
                r.last_visit[j] = i;
                break;
            }
        }
    }
    if (!r.close[1]) throw InvariantError("first pivot is not close");
    std::vector<std::size_t> ks;
    for (std::size_t j = 1; j <= ell; ++j) {
        if (r.close[j]) ks.push_back(j);
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
        CrucialSegment c;
        c.first = ks[i];
        c.last = (i + 1 < ks.size() ? ks[i + 1] : ell + 1) - 1;
        c.entry_pos = r.last_visit[c.first];
        for (std::size_t j = c.first; j <= c.last; ++j) {
            const Phase& ph = bp.phases[j - 1];
            c.length += ph.rho.length() + ph.unclear + r.usink[j];
        }
        r.crucial.push_back(c);
    }
    return r;
}

bool VerifyReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* VerifyReport::find(const std::string& name) const {
    for (const Check& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

struct Reporter {
    VerifyReport report;

    void add(const std::string& name, bool ok, const std::string& detail = {}) {
        for (Check& c : report.checks) {
            if (c.name == name) {
                if (!ok && c.passed) {
                    c.passed = false;
                    c.detail = detail;
                }
                return;
            }
        }
        report.checks.push_back({name, ok, ok ? std::string() : detail});
    }
};

template <class... Parts>
std::string cat(const Parts&... parts) {
    std::ostringstream s;
    (s << ... << parts);
    return s.str();
}

}  // namespace

VerifyReport verify_balanced(PlayContext& ctx, const Balanced& b, const Refinement& r) {
    const Grammar& g = ctx.oracle.grammar();
    TermStore& ts = g.store();
    const BalancedPlay& bp = b.play;
    const GrammarConstants& c = ctx.constants;
    const std::size_t ell = bp.phases.size();
    Reporter rep;

    // Structure: consecutive pieces meet, every piece is a play of the grammar.
    bool linked = bp.mu0.start() == bp.start;
    for (std::size_t j = 0; j < ell; ++j) {
        const Phase& ph = bp.phases[j];
        const TermPair prev = j == 0 ? bp.mu0.finish() : bp.phases[j - 1].mu.finish();
        linked = linked && ph.rho.start() == prev && ph.rho.finish() == ph.bal.before &&
                 ph.mu.start() == ph.bal.result && ph.rho.length() == ctx.d0;
    }
    rep.add("pieces-linked", linked, "a piece does not start where the previous one ends");

    // Every piece drops the level by one per step; bal-results keep the level.
    const EqLevel top = ctx.oracle.eq_level(bp.start.first, bp.start.second);
    rep.add("total-length", top == EqLevel::finite(static_cast<unsigned>(bp.length())),
            cat("length ", bp.length(), " vs eqlevel ", top.str()));
    std::set<TermPair> seen;
    bool distinct = true;
    bool drops = true;
    unsigned expect = top.value();
    auto walk = [&](const Play& p, bool skip_first) {
        for (std::size_t i = 0; i < p.pairs.size(); ++i) {
            if (i > 0) --expect;
            if (i == 0 && skip_first) continue;
            const auto [x, y] = p.pairs[i];
            if (ctx.oracle.eq_level(x, y) != EqLevel::finite(expect)) drops = false;
            if (!seen.insert(p.pairs[i]).second) distinct = false;
        }
    };
    walk(bp.mu0, false);
    for (const Phase& ph : bp.phases) {
        walk(ph.rho, true);
        walk(ph.mu, ph.mu.start() == ph.rho.finish());
    }
    rep.add("distinct-pairs", distinct, "a pair repeats in the balanced play");
    rep.add("level-drops", drops, "a step does not drop the eq-level by one");
    std::vector<const Play*> pieces{&bp.mu0};
    for (const Phase& ph : bp.phases) {
        pieces.push_back(&ph.rho);
        pieces.push_back(&ph.mu);
    }
    for (const Play* p : pieces) {
        for (std::size_t i = 0; i < p->length(); ++i) {
            const bool fires = step_rule(g, p->pairs[i].first, p->left[i]) == p->pairs[i + 1].first &&
                               step_rule(g, p->pairs[i].second, p->right[i]) == p->pairs[i + 1].second &&
                               g.rule(p->left[i]).action == g.rule(p->right[i]).action;
            rep.add("steps-fire", fires, "a recorded step does not fire");
        }
    }
    rep.add("steps-fire", true);

    // Sinking parts.
    for (Side s : {Side::left, Side::right}) {
        rep.add("d0-sinking", is_d0_sinking(g, bp.mu0.path(s), ctx.d0),
                cat("initial part, side ", side_name(s)));
        for (std::size_t j = 0; j < ell; ++j) {
            const auto sink = bp.phases[j].sink_part();
            if (!sink) continue;
            rep.add("d0-sinking", is_d0_sinking(g, sink->path(s), ctx.d0),
                    cat("sinking part of phase ", j + 1, ", side ", side_name(s)));
        }
    }

    // Balancing steps.
    std::map<TermId, std::size_t> pivot_uses;
    for (std::size_t j = 0; j < ell; ++j) {
        const Phase& ph = bp.phases[j];
        const BalanceStep& st = ph.bal;
        ++pivot_uses[st.pivot];
        const auto lb = ctx.oracle.eq_level(st.before.first, st.before.second);
        const auto la = ctx.oracle.eq_level(st.result.first, st.result.second);
        rep.add("balancing-keeps-level", lb == la, cat("phase ", j + 1, ": ", lb.str(), " vs ", la.str()));
        bool targets_ok = st.targets.size() == st.setup.args.size();
        for (std::size_t i = 0; targets_ok && i < st.targets.size(); ++i) {
            const auto run = run_word(g, st.pivot, st.vbar[i]);
            targets_ok = run && run->end() == st.targets[i];
            const RuleWord* sink = ctx.sinks.find(st.setup.head, static_cast<unsigned>(i + 1));
            if (sink != nullptr) {
                targets_ok = targets_ok && labels(g, *sink) == labels(g, st.vbar[i]) &&
                             ctx.oracle.eq_level(st.setup.args[i], st.targets[i]) > lb;
            } else {
                targets_ok = targets_ok && st.vbar[i].empty();
            }
        }
        rep.add("balancing-targets", targets_ok, cat("phase ", j + 1));

        // Tops over the d0-top form of the pivot.
        const TopForm tf = top_form(ts, st.pivot, static_cast<unsigned>(ctx.d0));
        const auto tops = balance_tops(g, st, tf.top);
        bool shape = tops.has_value();
        if (shape) {
            shape = apply_subst(ts, tops->first, tf.tail) == st.result.first &&
                    apply_subst(ts, tops->second, tf.tail) == st.result.second;
            const auto vin = varin(ts, {tops->first, tops->second});
            const auto vtop = varin(ts, {tf.top});
            shape = shape && std::includes(vtop.begin(), vtop.end(), vin.begin(), vin.end());
            const BigInt lhs = pressize(ts, {tops->first, tops->second});
            const BigInt rhs = BigInt(pressize(ts, {tf.top})) + (c.m + 2) * c.d0 * c.stepinc;
            rep.add("top-size", lhs <= rhs, cat("phase ", j + 1, ": ", lhs, " > ", rhs));
        }
        rep.add("top-shape", shape, cat("phase ", j + 1, ": bal-result is not the tops under the tail"));
    }
    rep.add("top-size", true);
    std::size_t max_uses = 0;
    for (const auto& [t, n] : pivot_uses) max_uses = std::max(max_uses, n);
    rep.add("bal-results-per-pivot", BigInt(max_uses) <= c.d1, cat(max_uses, " > d1 = ", c.d1));

    // Pivot path.
    const PivotPath& pp = b.pivots;
    bool stitched = true;
    if (ell > 0) {
        stitched = pp.terms.size() == ell + 2 && pp.words.size() == ell + 1;
        for (std::size_t j = 0; stitched && j <= ell; ++j) {
            const auto run = run_word(g, pp.terms[j], pp.words[j]);
            stitched = run && run->end() == pp.terms[j + 1];
            if (j >= 1) {
                const Phase& ph = bp.phases[j - 1];
                stitched = stitched && pp.terms[j] == ph.bal.pivot;
            }
        }
    } else {
        stitched = pp.empty();
    }
    rep.add("pivot-path-stitched", stitched, "pivot path does not replay through the pivots");

    // Length bounds.
    const std::size_t pres = pressize(ts, {bp.start.first, bp.start.second});
    for (std::size_t j = 1; j <= ell; ++j) {
        const Phase& ph = bp.phases[j - 1];
        const std::size_t seg = ph.rho.length() + ph.unclear;
        rep.add("unclear-length", pp.unclear[j] <= seg && BigInt(seg) <= c.d2,
                cat("phase ", j, ": |w_unc| = ", pp.unclear[j], ", segment ", seg, ", d2 = ", c.d2));
    }
    rep.add("unclear-length", true);
    std::size_t close_sink = 0;
    for (std::size_t x : r.csink) close_sink += x;
    const BigInt sink_bound = c.d3 * BigInt(pres) * BigInt(pres);
    rep.add("close-sink-total", BigInt(close_sink) <= sink_bound, cat(close_sink, " > ", sink_bound));
    const BigInt count_bound = c.d4 * BigInt(pres);
    rep.add("crucial-count", BigInt(r.crucial.size()) <= count_bound, cat(r.crucial.size(), " > ", count_bound));
    std::size_t covered = close_sink;
    for (const CrucialSegment& cs : r.crucial) {
        covered += cs.length;
        const BigInt bound = c.d5 * BigInt(1 + cs.index_length());
        rep.add("crucial-length", BigInt(cs.length) <= bound,
                cat("phases ", cs.first, "..", cs.last, ": ", cs.length, " > ", bound));
        for (std::size_t j = cs.first; j < cs.last; ++j) {
            rep.add("crucial-inner-sinks", r.csink[j] == 0, cat("phase ", j, " inside a crucial segment"));
        }
    }
    rep.add("crucial-length", true);
    rep.add("crucial-inner-sinks", true);
    rep.add("segmentation-covers", covered == bp.length(), cat(covered, " of ", bp.length()));
    return rep.report;
}

}  // namespace fog
