#include "fog/bases.hpp"

#include "fog/errors.hpp"
#include "fog/lts.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <tuple>

namespace fog {

namespace {

template <class... Ts>
std::string cat(const Ts&... xs) {
    std::ostringstream os;
    (os << ... << xs);
    return os.str();
}

TermPair unordered(TermId a, TermId b) { return a < b ? TermPair{a, b} : TermPair{b, a}; }

unsigned to_unsigned(const BigInt& v, const char* what) {
    if (v < 0 || v > 4096) throw PreconditionError(cat(what, " out of range: ", v));
    return v.convert_to<unsigned>();
}

BigInt next_threshold(const BigInt& s, const BigInt& g, unsigned e, const BigInt& stepinc) {
    return 2 * s + g * (1 + e) + e * stepinc;
}

unsigned finite_level(EqOracle& o, TermId t, TermId u, const char* what) {
    const EqLevel lv = o.eq_level(t, u);
    if (!lv.is_finite()) throw CutoffError(cat(what, ": eq-level ", lv.str(), " is not below the cutoff"));
    return lv.value();
}

}  // namespace

std::optional<std::string> nsg_violation(EqOracle& o, const NsgSequence& seq, const NsgParams& p) {
    TermStore& ts = o.store();
    if (seq.tops.empty()) return "empty sequence";
    std::optional<unsigned> prev;
    for (std::size_t j = 0; j < seq.tops.size(); ++j) {
        const auto [e, f] = seq.tops[j];
        const auto vars = varin(ts, {e, f});
        if (!vars.empty() && BigInt(*vars.rbegin()) > p.n) {
            return cat("element ", j + 1, ": variable x", *vars.rbegin(), " above x", p.n);
        }
        const BigInt size = pressize(ts, {e, f});
        const BigInt cap = p.s + p.g * j;
        if (size > cap) return cat("element ", j + 1, ": pressize ", size, " > ", cap);
        const unsigned lv = finite_level(o, apply_subst(ts, e, seq.tail), apply_subst(ts, f, seq.tail), "sequence");
        if (prev && lv >= *prev) {
            return cat("element ", j + 1, ": eq-level ", lv, " does not drop below ", *prev);
        }
        prev = lv;
    }
    return std::nullopt;
}

bool check_nsg_sequence(EqOracle& o, const NsgSequence& seq, const NsgParams& p) {
    return !nsg_violation(o, seq, p).has_value();
}

NsgParams tightest_params(const TermStore& ts, const NsgSequence& seq) {
    NsgParams p;
    if (seq.tops.empty()) return p;
    for (const auto& [e, f] : seq.tops) {
        const auto vars = varin(ts, {e, f});
        if (!vars.empty()) p.n = std::max<BigInt>(p.n, *vars.rbegin());
    }
    p.s = pressize(ts, {seq.tops[0].first, seq.tops[0].second});
    for (std::size_t j = 1; j < seq.tops.size(); ++j) {
        const BigInt size = pressize(ts, {seq.tops[j].first, seq.tops[j].second});
        if (size > p.s) {
            const BigInt need = (size - p.s + j - 1) / j;
            p.g = std::max(p.g, need);
        }
    }
    return p;
}

Reduction reduce_nsg_step(EqOracle& o, const NsgSequence& seq, const NsgParams& p, const BigInt& stepinc,
                          std::optional<unsigned> e) {
    TermStore& ts = o.store();
    const unsigned n = to_unsigned(p.n, "n");
    if (n == 0) throw PreconditionError("reduction needs n > 0");
    if (seq.tops.empty()) throw PreconditionError("reduction of an empty sequence");
    const auto [e1, f1] = seq.tops[0];
    Reduction red;
    red.k = finite_level(o, e1, f1, "first top");
    red.l = finite_level(o, apply_subst(ts, e1, seq.tail), apply_subst(ts, f1, seq.tail), "first element");
    if (red.k >= red.l) {
        throw PreconditionError(cat("nothing to reduce: eqlevel of the first top is ", red.k,
                                    ", of the first element ", red.l));
    }
    const unsigned ebound = e.value_or(red.k);
    if (ebound < red.k) throw PreconditionError(cat("e = ", ebound, " is below k = ", red.k));

    const SinkWitness w = find_sink_witness(o, e1, f1, seq.tail, red.k, red.l);
    const VarIndex i = w.var;
    if (i == 0 || i > n) throw InvariantError(cat("witness variable x", i, " outside x1..x", n));
    red.var = i;
    red.h = w.other;
    red.h_omega = omega_iterate(ts, w.other, i);

    Substitution plug;
    plug.bind(ts, i, red.h_omega);
    Substitution rename;
    if (i != n) rename.bind(ts, n, ts.var(i));

    Substitution tail;
    for (const auto& [x, t] : seq.tail.bindings()) {
        if (x != i && x != n) tail.bind(ts, x, t);
    }
    if (i != n) tail.bind(ts, i, seq.tail.image(ts, n));
    red.seq.tail = tail;

    for (std::size_t j = red.k + 1; j < seq.tops.size(); ++j) {
        const auto [e, f] = seq.tops[j];
        const TermId e2 = apply_subst(ts, apply_subst(ts, e, plug), rename);
        const TermId f2 = apply_subst(ts, apply_subst(ts, f, plug), rename);
        const EqLevel before = o.eq_level(apply_subst(ts, e, seq.tail), apply_subst(ts, f, seq.tail));
        const EqLevel after = o.eq_level(apply_subst(ts, e2, tail), apply_subst(ts, f2, tail));
        if (!(before == after)) {
            throw InvariantError(cat("element ", j + 1, ": eq-level ", before.str(), " became ", after.str()));
        }
        red.seq.tops.emplace_back(e2, f2);
    }
    red.params = {p.n - 1, next_threshold(p.s, p.g, ebound, stepinc), p.g};
    return red;
}

std::uint64_t bound_of_candidate(const Candidate& c) {
    std::uint64_t total = 0;
    for (const CandidateLayer& l : c.layers) total += 1 + l.e;
    return total == 0 ? 1 : total;
}

std::vector<TermId> enumerate_terms(TermStore& ts, unsigned vars, std::size_t max_size) {
    struct Label {
        bool is_var;
        std::uint32_t label;
        unsigned arity;
    };
    std::vector<Label> labels;
    for (VarIndex x = 1; x <= vars; ++x) labels.push_back({true, x, 0});
    for (NontermId a = 0; a < ts.signature().size(); ++a) labels.push_back({false, a, ts.signature().arity(a)});

    // Nodes are numbered in order of first reference, so each labelled rooted graph
    // is produced once; intern_graph then collapses bisimilar presentations.
    std::set<TermId> out;
    TermGraph graph;
    graph.roots = {0};
    graph.nodes.emplace_back();

    std::function<void(std::size_t)> label_node;
    std::function<void(std::size_t, std::size_t)> fill;
    label_node = [&](std::size_t i) {
        if (i == graph.nodes.size()) {
            out.insert(ts.intern_graph(graph).front());
            return;
        }
        for (const Label& l : labels) {
            graph.nodes[i].is_var = l.is_var;
            graph.nodes[i].label = l.label;
            graph.nodes[i].args.assign(l.arity, GraphRef::local(0));
            fill(i, 0);
        }
        graph.nodes[i] = GraphNode{};
    };
    fill = [&](std::size_t i, std::size_t k) {
        if (k == graph.nodes[i].args.size()) {
            label_node(i + 1);
            return;
        }
        const std::size_t count = graph.nodes.size();
        for (std::size_t t = 0; t < count; ++t) {
            graph.nodes[i].args[k] = GraphRef::local(static_cast<std::uint32_t>(t));
            fill(i, k + 1);
        }
        if (count < max_size) {
            graph.nodes.emplace_back();
            graph.nodes[i].args[k] = GraphRef::local(static_cast<std::uint32_t>(count));
            fill(i, k + 1);
            graph.nodes.pop_back();
        }
    };
    if (max_size > 0) label_node(0);
    std::vector<TermId> terms(out.begin(), out.end());
    std::erase_if(terms, [&](TermId t) { return pressize(ts, {t}) > max_size; });
    return terms;
}

PairUniverse enumerate_pairs(EqOracle& o, unsigned vars, const Caps& caps) {
    TermStore& ts = o.store();
    if (vars > 31) throw PreconditionError("too many variables for enumeration");
    PairUniverse u;
    u.vars = vars;
    u.max_size = caps.max_size;
    const auto terms = enumerate_terms(ts, vars, caps.max_size);
    std::vector<std::vector<TermId>> subs(terms.size());
    std::vector<std::uint32_t> masks(terms.size(), 0);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const TermId root[] = {terms[i]};
        subs[i] = subterms(ts, root);
        std::sort(subs[i].begin(), subs[i].end());
        for (VarIndex x : varin(ts, root)) masks[i] |= 1u << (x - 1);
    }
    std::vector<TermId> merged;
    for (std::size_t a = 0; a < terms.size(); ++a) {
        for (std::size_t b = a + 1; b < terms.size(); ++b) {
            const std::uint32_t mask = masks[a] | masks[b];
            if ((mask & (mask + 1)) != 0) continue;  // not x1..xj
            merged.clear();
            std::set_union(subs[a].begin(), subs[a].end(), subs[b].begin(), subs[b].end(),
                           std::back_inserter(merged));
            if (merged.size() > caps.max_size) continue;
            UniversePair up;
            up.pair = unordered(terms[a], terms[b]);
            up.vars = static_cast<unsigned>(std::popcount(mask));
            up.size = merged.size();
            up.level = o.eq_level(up.pair.first, up.pair.second);
            if (!up.level.is_finite()) {
                const auto proof = bisimilar_by_closure(o.grammar(), up.pair.first, up.pair.second, caps.max_pairs);
                if (proof && !*proof) {
                    throw InvariantError("closure refutes a pair the oracle found at the cutoff");
                }
                up.proved_equivalent = proof.value_or(false);
                if (!up.proved_equivalent) ++u.ambiguous;
            }
            u.pairs.push_back(up);
        }
    }
    std::sort(u.pairs.begin(), u.pairs.end(), [](const UniversePair& x, const UniversePair& y) {
        return std::tie(x.size, x.pair) < std::tie(y.size, y.pair);
    });
    return u;
}

void compute_layers(Candidate& c, const PairUniverse& u, const BigInt& stepinc) {
    std::map<TermPair, const UniversePair*> info;
    for (const UniversePair& up : u.pairs) info.emplace(up.pair, &up);
    const unsigned n = to_unsigned(c.params.n, "n");
    c.layers.clear();
    BigInt threshold = c.params.s;
    for (unsigned j = n + 1; j-- > 0;) {
        CandidateLayer layer;
        layer.vars = j;
        layer.threshold = threshold;
        for (const TermPair& p : c.pairs) {
            const auto it = info.find(p);
            if (it == info.end()) throw PreconditionError("candidate pair outside the enumerated universe");
            const UniversePair& up = *it->second;
            if (up.vars > j || BigInt(up.size) > threshold) continue;
            if (!up.level.is_finite()) throw PreconditionError("candidate pair with unresolved eq-level");
            layer.e = std::max(layer.e, up.level.value());
            ++layer.size;
        }
        threshold = next_threshold(threshold, c.params.g, layer.e, stepinc);
        c.layers.push_back(layer);
    }
}

BaseResult build_full_base(const PairUniverse& u, const NsgParams& p, const BigInt& stepinc) {
    const unsigned n = to_unsigned(p.n, "n");
    if (n > u.vars) throw PreconditionError(cat("universe has ", u.vars, " variables, base needs ", n));
    BaseResult r;
    r.candidate.params = p;
    BigInt threshold = p.s;
    bool ambiguous = false;
    for (unsigned j = n + 1; j-- > 0;) {
        CandidateLayer layer;
        layer.vars = j;
        layer.threshold = threshold;
        if (threshold > BigInt(u.max_size)) r.capped = true;
        for (const UniversePair& up : u.pairs) {
            if (up.vars > j || BigInt(up.size) > threshold) continue;
            if (!up.level.is_finite()) {
                ambiguous = ambiguous || !up.proved_equivalent;
                continue;
            }
            r.candidate.pairs.insert(up.pair);
            layer.e = std::max(layer.e, up.level.value());
            ++layer.size;
        }
        threshold = next_threshold(threshold, p.g, layer.e, stepinc);
        r.candidate.layers.push_back(layer);
    }
    r.bound = bound_of_candidate(r.candidate);
    r.complete = !r.capped && !ambiguous;
    return r;
}

BaseResult build_full_base_capped(EqOracle& o, const NsgParams& p, const Caps& caps, const BigInt& stepinc) {
    // Enumerate only as far as the layer thresholds reach, growing towards the cap.
    const unsigned n = to_unsigned(p.n, "n");
    std::size_t size = p.s < BigInt(caps.max_size) ? p.s.convert_to<std::size_t>() : caps.max_size;
    for (;;) {
        const PairUniverse u = enumerate_pairs(o, n, Caps{size, caps.max_pairs});
        BaseResult r = build_full_base(u, p, stepinc);
        if (!r.capped || size == caps.max_size) return r;
        BigInt need = 0;
        for (const CandidateLayer& l : r.candidate.layers) need = std::max(need, l.threshold);
        size = need < BigInt(caps.max_size) ? need.convert_to<std::size_t>() : caps.max_size;
    }
}

std::optional<bool> speceq_check(EqOracle& o, TermId t, TermId u, const BigInt& k, const BigInt& c,
                                 bool proved_equivalent) {
    if (t == u) return true;
    const BigInt size = pressize(o.store(), {t, u});
    const BigInt threshold = c * (k * size + size * size);
    const EqLevel lv = o.eq_level(t, u);
    if (lv.is_finite()) return BigInt(lv.value()) > threshold;
    if (proved_equivalent) return true;
    if (BigInt(lv.value()) > threshold) return true;
    return std::nullopt;
}

const char* status_name(SearchStatus s) {
    switch (s) {
    case SearchStatus::sound: return "sound";
    case SearchStatus::indeterminate: return "indeterminate";
    case SearchStatus::capped: return "capped";
    }
    return "?";
}

SearchResult sound_candidate_search(EqOracle& o, const PairUniverse& u, const NsgParams& p, const BigInt& c,
                                    const BigInt& stepinc) {
    const unsigned n = to_unsigned(p.n, "n");
    if (n > u.vars) throw PreconditionError(cat("universe has ", u.vars, " variables, search needs ", n));
    SearchResult r;
    r.candidate.params = p;
    for (;;) {
        ++r.iterations;
        if (r.iterations > u.pairs.size() + 1) throw InvariantError("sound-candidate search does not converge");
        compute_layers(r.candidate, u, stepinc);
        r.bound = bound_of_candidate(r.candidate);
        std::vector<TermPair> violators;
        for (const CandidateLayer& layer : r.candidate.layers) {
            if (layer.threshold > BigInt(u.max_size)) {
                r.status = SearchStatus::capped;
                return r;
            }
            for (const UniversePair& up : u.pairs) {
                if (up.vars != layer.vars || BigInt(up.size) > layer.threshold) continue;
                if (r.candidate.pairs.count(up.pair)) continue;
                const auto ok = speceq_check(o, up.pair.first, up.pair.second, r.bound, c, up.proved_equivalent);
                if (!ok) {
                    r.status = SearchStatus::indeterminate;
                    return r;
                }
                if (!*ok) violators.push_back(up.pair);
            }
        }
        if (violators.empty()) {
            r.status = SearchStatus::sound;
            return r;
        }
        r.candidate.pairs.insert(violators.begin(), violators.end());
    }
}

NsgParams stair_params(const GrammarConstants& c) { return {c.n, c.s, c.g}; }

NsgSequence present_stair_as_nsg(PlayContext& ctx, const Balanced& b, const Refinement& r, std::size_t crucial) {
    const Grammar& g = ctx.oracle.grammar();
    TermStore& ts = g.store();
    if (crucial >= r.crucial.size()) throw PreconditionError("no such crucial segment");
    const CrucialSegment& cs = r.crucial[crucial];
    const PivotPath& pp = b.pivots;
    const auto& phases = b.play.phases;
    if (cs.first == 0 || cs.last > phases.size() || cs.first > cs.last) {
        throw PreconditionError("crucial segment outside the balanced play");
    }

    const auto entry = run_word(g, pp.terms[cs.first - 1], pp.words[cs.first - 1]);
    if (!entry || cs.entry_pos >= entry->terms.size()) throw PreconditionError("pivot path does not replay");
    const TermId base = entry->terms[cs.entry_pos];
    if (ts.is_var(base)) throw PreconditionError("stair base is a variable");
    const RuleWord first_word(pp.words[cs.first - 1].begin() + static_cast<std::ptrdiff_t>(cs.entry_pos),
                              pp.words[cs.first - 1].end());

    const NontermId head = ts.head(base);
    const TopForm tf = top_form(ts, base, static_cast<unsigned>(ctx.d0));
    Substitution bar;
    for (unsigned i = 1; i <= ts.arity(base); ++i) bar.bind(ts, i, ts.child(tf.top, i));

    NsgSequence seq;
    seq.tail = tf.tail;
    TermId cur = g.lhs_term(head);
    for (std::size_t i = 1; i <= cs.index_length(); ++i) {
        const RuleWord& w = i == 1 ? first_word : pp.words[cs.first + i - 2];
        const auto run = run_word(g, cur, w);
        if (!run) throw PreconditionError(cat("stair step ", i, " does not replay from the base's left-hand side"));
        for (TermId t : run->terms) {
            if (ts.is_var(t)) throw PreconditionError(cat("stair step ", i, " exposes a variable of the base"));
        }
        cur = run->end();
        const TermId gi = apply_subst(ts, cur, bar);
        const std::size_t j = cs.first + i - 1;
        if (apply_subst(ts, gi, seq.tail) != pp.terms[j]) {
            throw InvariantError(cat("stair step ", i, " does not reach pivot W_", j));
        }
        const BalanceStep& st = phases[j - 1].bal;
        const auto tops = balance_tops(g, st, gi);
        if (!tops) throw InvariantError(cat("phase ", j, ": bal-result tops do not replay"));
        if (apply_subst(ts, tops->first, seq.tail) != st.result.first ||
            apply_subst(ts, tops->second, seq.tail) != st.result.second) {
            throw InvariantError(cat("phase ", j, ": tops do not reproduce the bal-result"));
        }
        seq.tops.push_back(*tops);
    }
    return seq;
}

}  // namespace fog
