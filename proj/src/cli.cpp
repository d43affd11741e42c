#include "fog/cli.hpp"

#include "fog/bases.hpp"
#include "fog/errors.hpp"
#include "fog/lts.hpp"
#include "fog/plays.hpp"
#include "fog/random.hpp"
#include "fog/term_text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace fog {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
    std::string grammar;
    unsigned cutoff = 16;
    bool json = false;
    std::uint64_t seed = 1;
    unsigned jobs = 1;

    std::vector<std::string> terms;  // positional T U
    std::string term;
    std::string word;
    std::string pairs_file;
    unsigned random = 0;

    unsigned n = 0, s = 0, g = 0;
    std::size_t max_size = 4;
    std::size_t max_pairs = 20000;
    bool search = false;
    std::string c;
};

std::string str(const BigInt& v) { return v.str(); }

std::string word_text(const Grammar& g, const RuleWord& w) {
    std::string s;
    for (RuleId r : w) {
        if (!s.empty()) s += ' ';
        s += g.rule(r).name;
    }
    return s;
}

RuleWord parse_word(const Grammar& g, const std::string& text) {
    RuleWord w;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ' ')) {
        std::string name;
        std::istringstream parts(item);
        while (std::getline(parts, name, ',')) {
            if (name.empty()) continue;
            const auto r = g.find_rule(name);
            if (!r) throw ParseError("unknown rule '" + name + "'");
            w.push_back(*r);
        }
    }
    return w;
}

Json pair_json(const TermStore& ts, TermPair p) {
    return Json::array({format_term(ts, p.first), format_term(ts, p.second)});
}

std::string pair_text(const TermStore& ts, TermPair p) {
    return "(" + format_term(ts, p.first) + ", " + format_term(ts, p.second) + ")";
}

Json level_json(const EqLevel& lv) {
    Json j;
    j["finite"] = lv.is_finite();
    j["value"] = lv.value();
    return j;
}

struct Session {
    Options opt;
    std::ostream& out;
    std::ostream& err;
    std::unique_ptr<Grammar> grammar;
    std::unique_ptr<EqOracle> oracle;

    void load() {
        grammar = std::make_unique<Grammar>(load_grammar(opt.grammar));
        oracle = std::make_unique<EqOracle>(*grammar, opt.cutoff);
    }
    TermStore& ts() { return grammar->store(); }
    TermPair two_terms() {
        if (opt.terms.size() != 2) throw PreconditionError("expected two terms T U");
        return {parse_term(ts(), opt.terms[0]), parse_term(ts(), opt.terms[1])};
    }
    Json head(const char* command) const {
        Json j;
        j["schema"] = 1;
        j["command"] = command;
        j["grammar"] = opt.grammar;
        j["cutoff"] = opt.cutoff;
        return j;
    }
    void emit(const Json& j) { out << j.dump(2) << '\n'; }
};

Json constants_json(const GrammarConstants& c) {
    Json j = Json::object();
    for (const auto& [name, v] : constants_table(c)) j[name] = str(v);
    return j;
}

int cmd_validate(Session& s) {
    s.load();
    const Grammar& g = *s.grammar;
    const auto c = compute_constants(g, compute_sink_table(g));
    if (s.opt.json) {
        Json j = s.head("validate");
        j["nonterminals"] = Json::array();
        for (NontermId a = 0; a < g.signature().size(); ++a) {
            j["nonterminals"].push_back({{"name", g.signature().name(a)}, {"arity", g.signature().arity(a)}});
        }
        j["actions"] = Json::array();
        for (ActionId a = 0; a < g.num_actions(); ++a) j["actions"].push_back(g.action_name(a));
        j["rules"] = Json::array();
        for (const Rule& r : g.rules()) {
            j["rules"].push_back({{"name", r.name},
                                  {"lhs", g.signature().name(r.lhs)},
                                  {"action", g.action_name(r.action)},
                                  {"rhs", format_term(g.store(), r.rhs)}});
        }
        j["constants"] = constants_json(c);
        j["ok"] = true;
        s.emit(j);
        return exit_ok;
    }
    s.out << "grammar " << s.opt.grammar << ": " << g.signature().size() << " nonterminals (max arity "
          << g.signature().max_arity() << "), " << g.num_actions() << " actions, " << g.num_rules() << " rules\n";
    for (const auto& [name, v] : constants_table(c)) {
        if (name.size() == 2 && name[0] == 'd') s.out << name << " = " << v << '\n';
    }
    s.out << "ok\n";
    return exit_ok;
}

int cmd_constants(Session& s) {
    s.load();
    const auto c = compute_constants(*s.grammar, compute_sink_table(*s.grammar));
    if (s.opt.json) {
        Json j = s.head("constants");
        j["constants"] = constants_json(c);
        s.emit(j);
        return exit_ok;
    }
    for (const auto& [name, v] : constants_table(c)) s.out << name << " = " << v << '\n';
    return exit_ok;
}

int cmd_step(Session& s) {
    s.load();
    const Grammar& g = *s.grammar;
    const TermId t = parse_term(s.ts(), s.opt.term);
    Json moves = Json::array();
    for (const Move& m : s.oracle->moves(t)) {
        const Rule& r = g.rule(m.rule);
        if (s.opt.json) {
            moves.push_back({{"rule", r.name}, {"action", g.action_name(r.action)}, {"term", format_term(s.ts(), m.target)}});
        } else {
            s.out << r.name << " -" << g.action_name(r.action) << "-> " << format_term(s.ts(), m.target) << '\n';
        }
    }
    if (s.opt.json) {
        Json j = s.head("step");
        j["term"] = format_term(s.ts(), t);
        j["moves"] = moves;
        s.emit(j);
    }
    return exit_ok;
}

int cmd_run(Session& s) {
    s.load();
    const Grammar& g = *s.grammar;
    const TermId t = parse_term(s.ts(), s.opt.term);
    const RuleWord w = parse_word(g, s.opt.word);
    std::vector<TermId> terms{t};
    for (RuleId r : w) {
        const auto next = step_rule(g, terms.back(), r);
        if (!next) break;
        terms.push_back(*next);
    }
    const bool done = terms.size() == w.size() + 1;
    if (s.opt.json) {
        Json j = s.head("run");
        j["word"] = word_text(g, w);
        j["terms"] = Json::array();
        for (TermId x : terms) j["terms"].push_back(format_term(s.ts(), x));
        j["complete"] = done;
        s.emit(j);
    } else {
        s.out << format_term(s.ts(), terms[0]) << '\n';
        for (std::size_t i = 1; i < terms.size(); ++i) {
            s.out << " -" << g.rule(w[i - 1]).name << "-> " << format_term(s.ts(), terms[i]) << '\n';
        }
        if (!done) s.out << "blocked at rule " << terms.size() << " (" << g.rule(w[terms.size() - 1]).name << ")\n";
    }
    return done ? exit_ok : exit_negative;
}

// Pairs as text, so that worker threads can parse them into their own stores.
std::vector<std::pair<std::string, std::string>> pair_texts(Session& s) {
    std::vector<std::pair<std::string, std::string>> out;
    if (!s.opt.pairs_file.empty()) {
        std::ifstream in(s.opt.pairs_file);
        if (!in) throw ParseError("cannot open pairs file '" + s.opt.pairs_file + "'");
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') {
                continue;
            }
            const auto bar = line.find('|');
            if (bar == std::string::npos) throw ParseError("expected 'T | U'", no);
            out.emplace_back(line.substr(0, bar), line.substr(bar + 1));
        }
        return out;
    }
    if (s.opt.random > 0) {
        Rng rng(s.opt.seed);
        for (unsigned i = 0; i < s.opt.random; ++i) {
            const TermId t = random_term(s.ts(), rng, TermShape{3, 0, 0});
            const TermId u = random_term(s.ts(), rng, TermShape{3, 0, 0});
            out.emplace_back(format_term(s.ts(), t), format_term(s.ts(), u));
        }
        return out;
    }
    const TermPair p = s.two_terms();
    out.emplace_back(format_term(s.ts(), p.first), format_term(s.ts(), p.second));
    return out;
}

int cmd_eqlevel(Session& s) {
    s.load();
    const auto texts = pair_texts(s);
    std::vector<EqLevel> levels(texts.size());
    const unsigned jobs = std::max(1u, std::min<unsigned>(s.opt.jobs, static_cast<unsigned>(texts.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < texts.size(); ++i) {
            levels[i] = s.oracle->eq_level(parse_term(s.ts(), texts[i].first), parse_term(s.ts(), texts[i].second));
        }
    } else {
        // The oracle interns into its grammar's store, so each worker loads its own copy.
        std::vector<std::string> errors(jobs);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    const Grammar g = load_grammar(s.opt.grammar);
                    EqOracle o(g, s.opt.cutoff);
                    for (std::size_t i = w; i < texts.size(); i += jobs) {
                        levels[i] = o.eq_level(parse_term(g.store(), texts[i].first),
                                               parse_term(g.store(), texts[i].second));
                    }
                } catch (const std::exception& e) {
                    errors[w] = e.what();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors) {
            if (!e.empty()) throw ParseError(e);
        }
    }
    if (s.opt.json) {
        Json j = s.head("eqlevel");
        j["pairs"] = Json::array();
        for (std::size_t i = 0; i < texts.size(); ++i) {
            Json p = level_json(levels[i]);
            p["left"] = format_term(s.ts(), parse_term(s.ts(), texts[i].first));
            p["right"] = format_term(s.ts(), parse_term(s.ts(), texts[i].second));
            j["pairs"].push_back(p);
        }
        s.emit(j);
    } else {
        for (std::size_t i = 0; i < texts.size(); ++i) {
            s.out << format_term(s.ts(), parse_term(s.ts(), texts[i].first)) << " | "
                  << format_term(s.ts(), parse_term(s.ts(), texts[i].second)) << " : " << levels[i].str() << '\n';
        }
    }
    return exit_ok;
}

int cmd_decide(Session& s) {
    s.load();
    const TermPair p = s.two_terms();
    const EqLevel lv = s.oracle->eq_level(p.first, p.second);
    if (s.opt.json) {
        Json j = s.head("decide");
        j["left"] = format_term(s.ts(), p.first);
        j["right"] = format_term(s.ts(), p.second);
        j["verdict"] = lv.is_finite() ? "distinguished" : "equivalent-up-to";
        j["level"] = lv.value();
        s.emit(j);
    } else if (lv.is_finite()) {
        s.out << "distinguished level=" << lv.value() << '\n';
    } else {
        s.out << "equivalent-up-to " << lv.value() << '\n';
    }
    return lv.is_finite() ? exit_negative : exit_ok;
}

Json play_json(const Grammar& g, const Play& p) {
    Json j;
    j["pairs"] = Json::array();
    for (const TermPair& q : p.pairs) j["pairs"].push_back(pair_json(g.store(), q));
    j["left"] = word_text(g, p.left);
    j["right"] = word_text(g, p.right);
    return j;
}

void print_play(std::ostream& os, const Grammar& g, const Play& p, const std::string& indent) {
    for (std::size_t i = 0; i <= p.length(); ++i) {
        if (i > 0) os << indent << " -" << g.rule(p.left[i - 1]).name << "/" << g.rule(p.right[i - 1]).name << "->\n";
        os << indent << pair_text(g.store(), p.pairs[i]) << '\n';
    }
}

int cmd_play(Session& s) {
    s.load();
    const TermPair p = s.two_terms();
    const Play play = build_optimal_play(*s.oracle, p.first, p.second);
    if (s.opt.json) {
        Json j = s.head("play");
        j["level"] = play.length();
        j["play"] = play_json(*s.grammar, play);
        s.emit(j);
    } else {
        s.out << "level " << play.length() << '\n';
        print_play(s.out, *s.grammar, play, "");
    }
    return exit_ok;
}

Json balanced_json(const Grammar& g, const Balanced& b, const Refinement& r) {
    const TermStore& ts = g.store();
    Json j;
    j["level"] = b.play.level;
    j["mu0"] = play_json(g, b.play.mu0);
    j["phases"] = Json::array();
    for (const Phase& ph : b.play.phases) {
        j["phases"].push_back({{"side", side_name(ph.bal.side)},
                               {"pivot", format_term(ts, ph.bal.pivot)},
                               {"bal_result", pair_json(ts, ph.bal.result)},
                               {"level", ph.bal.level},
                               {"unclear", ph.unclear},
                               {"sink", ph.has_sink},
                               {"switched", ph.switched},
                               {"rho", play_json(g, ph.rho)},
                               {"mu", play_json(g, ph.mu)}});
    }
    Json path = Json::array();
    for (std::size_t i = 0; i < b.pivots.terms.size(); ++i) {
        Json step{{"term", format_term(ts, b.pivots.terms[i])}, {"side", side_name(b.pivots.sides[i])}};
        if (i < b.pivots.words.size()) {
            step["word"] = word_text(g, b.pivots.words[i]);
            step["unclear"] = b.pivots.unclear[i];
        }
        path.push_back(step);
    }
    j["pivot_path"] = path;
    j["crucial"] = Json::array();
    for (const CrucialSegment& c : r.crucial) {
        j["crucial"].push_back({{"first", c.first}, {"last", c.last}, {"length", c.length}});
    }
    return j;
}

void print_balanced(std::ostream& os, const Grammar& g, const Balanced& b, const Refinement& r) {
    const TermStore& ts = g.store();
    os << "level " << b.play.level << ", " << b.play.phases.size() << " phases, mu0 length " << b.play.mu0.length()
       << '\n';
    for (std::size_t j = 0; j < b.play.phases.size(); ++j) {
        const Phase& ph = b.play.phases[j];
        os << "phase " << j + 1 << ": balance " << side_name(ph.bal.side) << " against pivot "
           << format_term(ts, ph.bal.pivot) << ", bal-result " << pair_text(ts, ph.bal.result) << " at level "
           << ph.bal.level << "; mu length " << ph.mu.length() << ", unclear " << ph.unclear
           << (ph.has_sink ? ", sinking" : "") << (ph.switched ? ", switches side" : "") << '\n';
    }
    if (!b.pivots.empty()) {
        os << "pivot path: " << format_term(ts, b.pivots.terms[0]);
        for (std::size_t i = 0; i < b.pivots.words.size(); ++i) {
            os << " -[" << word_text(g, b.pivots.words[i]) << "]-> " << format_term(ts, b.pivots.terms[i + 1]);
        }
        os << '\n';
    }
    for (const CrucialSegment& c : r.crucial) {
        os << "crucial segment phases " << c.first << ".." << c.last << ", length " << c.length << '\n';
    }
}

int cmd_balance(Session& s) {
    s.load();
    const TermPair p = s.two_terms();
    PlayContext ctx(*s.oracle);
    const Balanced b = transform_to_balanced(ctx, p.first, p.second);
    const Refinement r = refine_segments(*s.grammar, b, subterm_set(s.ts(), p));
    if (s.opt.json) {
        Json j = s.head("balance");
        j["balanced"] = balanced_json(*s.grammar, b, r);
        s.emit(j);
    } else {
        print_balanced(s.out, *s.grammar, b, r);
    }
    return exit_ok;
}

Json checks_json(const std::vector<Check>& checks) {
    Json a = Json::array();
    for (const Check& c : checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return a;
}

void print_checks(std::ostream& os, const std::vector<Check>& checks) {
    for (const Check& c : checks) {
        os << (c.passed ? "pass " : "FAIL ") << c.name;
        if (!c.passed && !c.detail.empty()) os << ": " << c.detail;
        os << '\n';
    }
}

int cmd_verify(Session& s) {
    s.load();
    const TermPair p = s.two_terms();
    PlayContext ctx(*s.oracle);
    const Balanced b = transform_to_balanced(ctx, p.first, p.second);
    const Refinement r = refine_segments(*s.grammar, b, subterm_set(s.ts(), p));
    const VerifyReport rep = verify_balanced(ctx, b, r);
    if (s.opt.json) {
        Json j = s.head("verify");
        j["level"] = b.play.level;
        j["checks"] = checks_json(rep.checks);
        j["ok"] = rep.ok();
        s.emit(j);
    } else {
        print_checks(s.out, rep.checks);
        s.out << (rep.ok() ? "ok" : "violations found") << '\n';
    }
    return rep.ok() ? exit_ok : exit_negative;
}

Json layers_json(const Candidate& c) {
    Json a = Json::array();
    for (const CandidateLayer& l : c.layers) {
        a.push_back({{"vars", l.vars}, {"threshold", str(l.threshold)}, {"e", l.e}, {"size", l.size}});
    }
    return a;
}

int cmd_base(Session& s) {
    s.load();
    const GrammarConstants k = compute_constants(*s.grammar, compute_sink_table(*s.grammar));
    const NsgParams p{s.opt.n, s.opt.s, s.opt.g};
    const PairUniverse u = enumerate_pairs(*s.oracle, s.opt.n, Caps{s.opt.max_size, s.opt.max_pairs});
    const BaseResult full = build_full_base(u, p, k.stepinc);
    std::optional<SearchResult> search;
    if (s.opt.search) {
        const BigInt c = s.opt.c.empty() ? k.c : BigInt(s.opt.c);
        search = sound_candidate_search(*s.oracle, u, p, c, k.stepinc);
    }
    if (s.opt.json) {
        Json j = s.head("base");
        j["params"] = {{"n", s.opt.n}, {"s", s.opt.s}, {"g", s.opt.g}};
        j["max_size"] = s.opt.max_size;
        j["universe"] = {{"pairs", u.pairs.size()}, {"ambiguous", u.ambiguous}};
        j["layers"] = layers_json(full.candidate);
        j["pairs"] = full.candidate.pairs.size();
        j["bound"] = full.bound;
        j["status"] = full.complete ? "complete" : "incomplete";
        if (search) {
            j["search"] = {{"status", status_name(search->status)},
                           {"iterations", search->iterations},
                           {"bound", search->bound},
                           {"pairs", search->candidate.pairs.size()},
                           {"equals_full_base", search->candidate.pairs == full.candidate.pairs}};
        }
        s.emit(j);
    } else {
        s.out << "universe: " << u.pairs.size() << " pairs up to pressize " << s.opt.max_size << ", " << u.ambiguous
              << " unresolved\n";
        for (const CandidateLayer& l : full.candidate.layers) {
            s.out << "layer " << l.vars << ": threshold " << l.threshold << ", " << l.size << " pairs, e = " << l.e
                  << '\n';
        }
        s.out << "E_B = " << full.bound << '\n';
        s.out << "status " << (full.complete ? "complete" : "incomplete") << '\n';
        if (search) {
            s.out << "search " << status_name(search->status) << " after " << search->iterations
                  << " iterations, E_B = " << search->bound << ", "
                  << (search->candidate.pairs == full.candidate.pairs ? "equals" : "differs from") << " the full base\n";
        }
    }
    if (search && search->status != SearchStatus::sound) return exit_cutoff;
    return full.complete ? exit_ok : exit_cutoff;
}

struct PipelineResult {
    TermPair pair;
    unsigned level = 0;
    std::vector<Check> checks;
    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
};

PipelineResult pipeline_pair(Session& s, PlayContext& ctx, TermPair p) {
    PipelineResult res;
    res.pair = p;
    const Balanced b = transform_to_balanced(ctx, p.first, p.second);
    res.level = b.play.level;
    const Refinement r = refine_segments(*s.grammar, b, subterm_set(s.ts(), p));
    res.checks = verify_balanced(ctx, b, r).checks;
    const NsgParams table = stair_params(ctx.constants);
    const BigInt stepinc = ctx.constants.stepinc;
    for (std::size_t c = 0; c < r.crucial.size(); ++c) {
        const std::string tag = "[" + std::to_string(c + 1) + "]";
        NsgSequence seq;
        try {
            seq = present_stair_as_nsg(ctx, b, r, c);
        } catch (const PreconditionError& e) {
            res.checks.push_back({"stair-sequence" + tag, false, e.what()});
            continue;
        } catch (const InvariantError& e) {
            res.checks.push_back({"stair-sequence" + tag, false, e.what()});
            continue;
        }
        const auto v = nsg_violation(*s.oracle, seq, table);
        res.checks.push_back({"stair-sequence" + tag, !v, v.value_or("")});
        // Length bound against the full base for the sequence's own tightest parameters,
        // when that base fits the enumeration cap.
        const NsgParams tight = tightest_params(s.ts(), seq);
        Check bound{"sequence-bound" + tag, true, ""};
        if (seq.length() == 1) {
            bound.detail = "z = 1";
        } else if (tight.s > BigInt(s.opt.max_size) || tight.n > 2) {
            bound.detail = "skipped: base beyond the enumeration cap";
        } else {
            const BaseResult base = build_full_base_capped(*s.oracle, tight, Caps{s.opt.max_size, s.opt.max_pairs}, stepinc);
            if (!base.complete) {
                bound.detail = "skipped: base incomplete at this cap";
            } else {
                bound.passed = seq.length() <= base.bound;
                bound.detail = "z = " + std::to_string(seq.length()) + ", E_B = " + std::to_string(base.bound);
            }
        }
        res.checks.push_back(bound);
    }
    return res;
}

Json pipeline_json(const TermStore& ts, const PipelineResult& r) {
    return {{"pair", pair_json(ts, r.pair)}, {"level", r.level}, {"checks", checks_json(r.checks)}, {"ok", r.ok()}};
}

int cmd_pipeline(Session& s) {
    s.load();
    PlayContext ctx(*s.oracle);
    std::vector<PipelineResult> results;
    std::size_t skipped = 0;
    if (s.opt.random > 0) {
        Rng rng(s.opt.seed);
        for (unsigned attempts = 0; results.size() < s.opt.random && attempts < 50 * s.opt.random; ++attempts) {
            const TermId t = random_term(s.ts(), rng, TermShape{3, 0, 0});
            const TermId u = rng.chance(50) ? random_term(s.ts(), rng, TermShape{3, 0, 0})
                                            : random_term(s.ts(), rng, TermShape{2, 0, 0});
            if (!s.oracle->eq_level(t, u).is_finite()) {
                ++skipped;
                continue;
            }
            results.push_back(pipeline_pair(s, ctx, {t, u}));
        }
    } else {
        const TermPair p = s.two_terms();
        const EqLevel lv = s.oracle->eq_level(p.first, p.second);
        if (!lv.is_finite()) {
            if (s.opt.json) {
                Json j = s.head("pipeline");
                j["pairs"] = Json::array();
                j["indeterminate"] = {{"pair", pair_json(s.ts(), p)}, {"level", level_json(lv)}};
                j["ok"] = false;
                s.emit(j);
            } else {
                s.out << "eq-level " << lv.str() << ": nothing to check below the cutoff\n";
            }
            return exit_cutoff;
        }
        results.push_back(pipeline_pair(s, ctx, p));
    }
    const bool ok = std::all_of(results.begin(), results.end(), [](const PipelineResult& r) { return r.ok(); });
    if (s.opt.json) {
        Json j = s.head("pipeline");
        j["seed"] = s.opt.seed;
        j["pairs"] = Json::array();
        for (const PipelineResult& r : results) j["pairs"].push_back(pipeline_json(s.ts(), r));
        j["skipped"] = skipped;
        j["ok"] = ok;
        s.emit(j);
    } else {
        for (const PipelineResult& r : results) {
            s.out << "pair " << pair_text(s.ts(), r.pair) << " level " << r.level << '\n';
            if (s.opt.random == 0) {
                print_checks(s.out, r.checks);
            } else {
                std::vector<Check> failed;
                std::copy_if(r.checks.begin(), r.checks.end(), std::back_inserter(failed),
                             [](const Check& c) { return !c.passed; });
                print_checks(s.out, failed);
            }
        }
        if (skipped > 0) s.out << skipped << " random pairs skipped at the cutoff\n";
        s.out << (ok ? "ok" : "violations found") << '\n';
    }
    return ok ? exit_ok : exit_negative;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equivalence levels, balanced plays and bases for first-order grammars", "fogeq"};
    app.require_subcommand(1);
    Session session{Options{}, out, err, nullptr, nullptr};
    Options& o = session.opt;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--grammar", o.grammar, "grammar file")->required();
        sub->add_option("--cutoff", o.cutoff, "eq-level cutoff K")->check(CLI::PositiveNumber);
        sub->add_flag("--json", o.json, "JSON output");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--jobs", o.jobs, "worker threads for independent pair queries")->check(CLI::PositiveNumber);
    };
    auto with_pair = [&](CLI::App* sub) { sub->add_option("terms", o.terms, "the terms T U")->expected(2); };

    std::vector<std::pair<CLI::App*, std::function<int(Session&)>>> commands;
    auto add = [&](const char* name, const char* help, std::function<int(Session&)> fn) {
        CLI::App* sub = app.add_subcommand(name, help);
        common(sub);
        commands.emplace_back(sub, std::move(fn));
        return sub;
    };
    add("validate", "parse and validate a grammar, print its constants", cmd_validate);
    add("constants", "print all grammar constants", cmd_constants);
    add("step", "list the moves of a term", cmd_step)->add_option("--term", o.term, "term")->required();
    CLI::App* run = add("run", "run a rule word from a term", cmd_run);
    run->add_option("--term", o.term, "start term")->required();
    run->add_option("--word", o.word, "rule ids separated by spaces or commas")->required();
    CLI::App* eq = add("eqlevel", "eq-levels of term pairs", cmd_eqlevel);
    eq->add_option("terms", o.terms, "the terms T U")->expected(0, 2);
    eq->add_option("--pairs", o.pairs_file, "file with one 'T | U' pair per line");
    eq->add_option("--random", o.random, "number of random closed pairs");
    with_pair(add("decide", "distinguished below the cutoff or equivalent up to it", cmd_decide));
    with_pair(add("play", "an optimal play", cmd_play));
    with_pair(add("balance", "the balanced play and its pivot path", cmd_balance));
    with_pair(add("verify", "check the balanced play", cmd_verify));
    CLI::App* base = add("base", "full base and sound-candidate search on enumerated pairs", cmd_base);
    base->add_option("--n", o.n, "variables")->required();
    base->add_option("--s", o.s, "size of the first layer")->required();
    base->add_option("--g", o.g, "size growth")->required();
    base->add_option("--max-size", o.max_size, "pressize cap of enumerated pairs");
    base->add_option("--max-pairs", o.max_pairs, "closure limit for equivalence proofs");
    base->add_flag("--search", o.search, "also run the sound-candidate search");
    base->add_option("--c", o.c, "speceq factor (default: the grammar constant c)");
    CLI::App* pipe = add("pipeline", "balance, verify, present stairs as sequences and bound them", cmd_pipeline);
    pipe->add_option("terms", o.terms, "the terms T U")->expected(0, 2);
    pipe->add_option("--random", o.random, "number of random closed pairs with a finite eq-level");
    pipe->add_option("--max-size", o.max_size, "pressize cap for the sequence-bound check");
    pipe->add_option("--max-pairs", o.max_pairs, "closure limit for equivalence proofs");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }
    try {
        for (auto& [sub, fn] : commands) {
            if (sub->parsed()) return fn(session);
        }
        return exit_usage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const CutoffError& e) {
        err << "cutoff: " << e.what() << '\n';
        return exit_cutoff;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_negative;
    }
}

}  // namespace fog
