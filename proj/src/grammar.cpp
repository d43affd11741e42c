#include "fog/grammar.hpp"

#include "fog/errors.hpp"
#include "fog/term_text.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <regex>
#include <set>
#include <sstream>

namespace fog {

namespace {

const std::vector<RuleId> kNoRules;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

bool is_identifier(const std::string& s) {
    static const std::regex re(R"([A-Za-z_][A-Za-z0-9_']*)");
    return std::regex_match(s, re);
}

bool looks_like_variable(const std::string& s) {
    static const std::regex re(R"(x[0-9]+)");
    return std::regex_match(s, re);
}

}  // namespace

// ── Grammar ──

Grammar::Grammar(Signature sig, std::vector<std::string> actions)
    : store_(std::make_shared<TermStore>(std::move(sig))), actions_(std::move(actions)) {
    by_lhs_.resize(signature().size());
    by_lhs_action_.assign(signature().size(), std::vector<std::vector<RuleId>>(actions_.size()));
    std::set<std::string> seen;
    for (const auto& a : actions_) {
        if (!seen.insert(a).second) throw ValidationError("duplicate action '" + a + "'");
    }
}

RuleId Grammar::add_rule(std::string name, NontermId lhs, ActionId action, TermId rhs) {
    if (find_rule(name)) throw ValidationError("duplicate rule id '" + name + "'");
    if (lhs >= signature().size()) throw ValidationError("unknown lhs nonterminal");
    if (action >= actions_.size()) throw ValidationError("unknown action");
    if (!store_->is_finite(rhs)) throw ValidationError("rule " + name + ": rhs must be a finite term");
    const unsigned arity = signature().arity(lhs);
    for (VarIndex x : varin(*store_, {rhs})) {
        if (x > arity) {
            throw ValidationError("rule " + name + ": rhs uses x" + std::to_string(x) + " but " +
                                  signature().name(lhs) + " has arity " + std::to_string(arity));
        }
    }
    const auto id = static_cast<RuleId>(rules_.size());
    rules_.push_back(Rule{std::move(name), lhs, action, rhs});
    by_lhs_[lhs].push_back(id);
    by_lhs_action_[lhs][action].push_back(id);
    return id;
}

void Grammar::check_nonempty() const {
    if (signature().size() == 0) throw ValidationError("no nonterminals declared");
    if (actions_.empty()) throw ValidationError("no actions declared");
    if (rules_.empty()) throw ValidationError("no rules declared");
}

std::optional<ActionId> Grammar::find_action(std::string_view name) const {
    for (ActionId a = 0; a < actions_.size(); ++a) {
        if (actions_[a] == name) return a;
    }
    return std::nullopt;
}

std::optional<RuleId> Grammar::find_rule(std::string_view name) const {
    for (RuleId r = 0; r < rules_.size(); ++r) {
        if (rules_[r].name == name) return r;
    }
    return std::nullopt;
}

const std::vector<RuleId>& Grammar::rules_of(NontermId a, ActionId act) const {
    if (a >= by_lhs_action_.size() || act >= actions_.size()) return kNoRules;
    return by_lhs_action_[a][act];
}

TermId Grammar::lhs_term(NontermId a) const {
    std::vector<TermId> xs;
    for (unsigned i = 1; i <= signature().arity(a); ++i) xs.push_back(store_->var(i));
    return store_->app(a, xs);
}

// ── text format ──

Grammar parse_grammar(std::string_view text) {
    static const std::regex rule_re(
        R"(^rule\s+([^\s:]+)\s*:\s*(.*?)\s*-\s*([A-Za-z_][A-Za-z0-9_']*)\s*->\s*(.*)$)");
    static const std::regex arity_re(R"(^([A-Za-z_][A-Za-z0-9_']*)\s*/\s*([0-9]+)$)");

    std::optional<Signature> sig;
    std::optional<std::vector<std::string>> actions;
    std::optional<Grammar> g;
    int sig_line = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        try {
            if (line.rfind("nonterminals:", 0) == 0) {
                if (sig) throw ParseError("nonterminals declared twice", line_no);
                const std::string body = trim(line.substr(13));
                if (body.empty()) throw ParseError("empty nonterminal list", line_no);
                Signature s;
                for (const std::string& item : split_list(body)) {
                    std::smatch m;
                    if (!std::regex_match(item, m, arity_re)) {
                        throw ParseError("expected Name/arity, got '" + item + "'", line_no);
                    }
                    if (looks_like_variable(m[1])) {
                        throw ParseError("nonterminal name '" + m[1].str() + "' clashes with variable syntax", line_no);
                    }
                    s.add(m[1], static_cast<unsigned>(std::stoul(m[2])));
                }
                sig = std::move(s);
                sig_line = line_no;
            } else if (line.rfind("actions:", 0) == 0) {
                if (actions) throw ParseError("actions declared twice", line_no);
                const std::string body = trim(line.substr(8));
                if (body.empty()) throw ParseError("empty action list", line_no);
                std::vector<std::string> acts = split_list(body);
                for (const auto& a : acts) {
                    if (!is_identifier(a)) throw ParseError("bad action name '" + a + "'", line_no);
                }
                actions = std::move(acts);
            } else if (line.rfind("rule", 0) == 0) {
                if (!sig || !actions) throw ParseError("rules must follow the nonterminal and action lists", line_no);
                if (!g) g.emplace(*sig, *actions);
                std::smatch m;
                if (!std::regex_match(line, m, rule_re)) {
                    throw ParseError("expected 'rule <id>: A(x1,...,xm) -<action>-> <term>'", line_no);
                }
                const std::string name = m[1];
                const std::string lhs_text = m[2];
                const std::string act = m[3];
                const std::string rhs_text = trim(m[4]);
                if (rhs_text.empty()) throw ParseError("missing rule rhs", line_no);
                TermStore& ts = g->store();
                const TermId lhs = parse_term(ts, lhs_text);
                if (ts.is_var(lhs) || lhs != g->lhs_term(ts.head(lhs))) {
                    throw ParseError("rule lhs must be A(x1,...,xm) with the variables in order, got '" +
                                         lhs_text + "'",
                                     line_no);
                }
                auto action = g->find_action(act);
                if (!action) throw ParseError("undeclared action '" + act + "'", line_no);
                const TermId rhs = parse_term(ts, rhs_text);
                g->add_rule(name, ts.head(lhs), *action, rhs);
            } else {
                throw ParseError("unrecognized line '" + line + "'", line_no);
            }
        } catch (const ParseError& e) {
            if (e.line > 0) throw;
            throw ParseError(e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!sig) throw ParseError("no nonterminals declared");
    if (!actions) throw ParseError("no actions declared");
    if (!g) throw ParseError("no rules declared");
    (void)sig_line;
    return std::move(*g);
}

Grammar load_grammar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grammar file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_grammar(buf.str());
}

std::string format_grammar(const Grammar& g) {
    const Signature& sig = g.signature();
    std::string out = "nonterminals: ";
    for (NontermId a = 0; a < sig.size(); ++a) {
        if (a > 0) out += ", ";
        out += sig.name(a) + "/" + std::to_string(sig.arity(a));
    }
    out += "\nactions: ";
    for (ActionId a = 0; a < g.num_actions(); ++a) {
        if (a > 0) out += ", ";
        out += g.action_name(a);
    }
    out += '\n';
    for (const Rule& r : g.rules()) {
        out += "rule " + r.name + ": " + format_term(g.store(), g.lhs_term(r.lhs)) + " -" +
               g.action_name(r.action) + "-> " + format_term(g.store(), r.rhs) + '\n';
    }
    return out;
}

// ── sink words ──

const RuleWord* SinkTable::find(NontermId a, unsigned i) const {
    auto it = words_.find({a, i});
    return it == words_.end() ? nullptr : &it->second;
}

std::size_t SinkTable::max_length() const {
    std::size_t m = 0;
    for (const auto& [key, w] : words_) m = std::max(m, w.size());
    return m;
}

SinkTable compute_sink_table(const Grammar& g) {
    constexpr std::uint64_t inf = std::numeric_limits<std::uint64_t>::max();
    const Signature& sig = g.signature();
    const TermStore& ts = g.store();
    std::vector<std::vector<std::uint64_t>> best(sig.size());
    for (NontermId a = 0; a < sig.size(); ++a) best[a].assign(sig.arity(a) + 1, inf);

    // Shortest length from E to x_i given the current table.
    auto through = [&](auto&& self, TermId e, unsigned i) -> std::uint64_t {
        if (ts.is_var(e)) return ts.var_index(e) == i ? 0 : inf;
        std::uint64_t out = inf;
        for (unsigned j = 1; j <= ts.arity(e); ++j) {
            const std::uint64_t head = best[ts.head(e)][j];
            if (head == inf) continue;
            const std::uint64_t rest = self(self, ts.child(e, j), i);
            if (rest != inf) out = std::min(out, head + rest);
        }
        return out;
    };

    for (bool changed = true; changed;) {
        changed = false;
        for (NontermId a = 0; a < sig.size(); ++a) {
            for (unsigned i = 1; i <= sig.arity(a); ++i) {
                for (RuleId r : g.rules_of(a)) {
                    const std::uint64_t len = through(through, g.rule(r).rhs, i);
                    if (len != inf && len + 1 < best[a][i]) {
                        best[a][i] = len + 1;
                        changed = true;
                    }
                }
            }
        }
    }

    // Lexicographically least optimal words, by increasing length.
    std::vector<std::pair<std::uint64_t, std::pair<NontermId, unsigned>>> order;
    for (NontermId a = 0; a < sig.size(); ++a) {
        for (unsigned i = 1; i <= sig.arity(a); ++i) {
            if (best[a][i] != inf) order.push_back({best[a][i], {a, i}});
        }
    }
    std::sort(order.begin(), order.end());
    SinkTable table;
    auto word_from = [&](auto&& self, TermId e, unsigned i) -> RuleWord {
        if (ts.is_var(e)) return {};
        const std::uint64_t target = through(through, e, i);
        std::optional<RuleWord> winner;
        for (unsigned j = 1; j <= ts.arity(e); ++j) {
            const std::uint64_t head = best[ts.head(e)][j];
            if (head == inf) continue;
            const std::uint64_t rest = through(through, ts.child(e, j), i);
            if (rest == inf || head + rest != target) continue;
            RuleWord w = table.words_.at({ts.head(e), j});
            RuleWord tail = self(self, ts.child(e, j), i);
            w.insert(w.end(), tail.begin(), tail.end());
            if (!winner || w < *winner) winner = std::move(w);
        }
        return *winner;
    };
    for (const auto& [len, key] : order) {
        const auto [a, i] = key;
        std::optional<RuleWord> winner;
        for (RuleId r : g.rules_of(a)) {
            const std::uint64_t rest = through(through, g.rule(r).rhs, i);
            if (rest == inf || rest + 1 != len) continue;
            RuleWord w{r};
            RuleWord tail = word_from(word_from, g.rule(r).rhs, i);
            w.insert(w.end(), tail.begin(), tail.end());
            if (!winner || w < *winner) winner = std::move(w);
        }
        table.words_.emplace(key, std::move(*winner));
    }
    return table;
}

// ── constants ──

std::vector<TermId> nonvar_rhs_subterms(const Grammar& g) {
    std::vector<TermId> rhs;
    for (const Rule& r : g.rules()) rhs.push_back(r.rhs);
    std::vector<TermId> out;
    for (TermId t : subterms(g.store(), rhs)) {
        if (!g.store().is_var(t)) out.push_back(t);
    }
    return out;
}

GrammarConstants compute_constants(const Grammar& g, const SinkTable& sinks) {
    const TermStore& ts = g.store();
    GrammarConstants c;
    c.m = g.signature().max_arity();
    std::size_t hinc = 0;
    std::size_t stepinc = 0;
    for (const Rule& r : g.rules()) {
        const std::size_t h = ts.height(r.rhs);
        if (h > 0) hinc = std::max(hinc, h - 1);
        stepinc = std::max(stepinc, propsize(ts, r.rhs));
    }
    c.hinc = hinc;
    c.stepinc = stepinc;
    const std::size_t d0 = 1 + sinks.max_length();
    c.d0 = d0;
    const BigInt rules = g.num_rules();
    const BigInt branch = std::max(c.d0, big_pow(rules, d0));
    const auto m = static_cast<std::uint64_t>(g.signature().max_arity());
    c.d1 = 2 * BigInt(g.signature().size()) * big_pow(branch, m + 2);
    c.d2 = c.d0 + (1 + c.d0 * c.hinc) * (c.d0 - 1);
    c.d3 = branch * branch;
    const BigInt window = c.d2 + c.d0 - 1;
    const auto window_u = window.convert_to<std::uint64_t>();
    c.d4 = c.d1 * big_pow(1 + BigInt(nonvar_rhs_subterms(g).size()), window_u);
    c.d5 = window * (1 + (c.d0 - 1) * c.hinc);
    c.n = big_pow(c.m, d0);
    c.s = big_pow(c.m, d0 + 1) + (c.m + 2) * c.d0 * c.stepinc + window * c.stepinc;
    c.g = window * c.stepinc;
    c.c = std::max(c.d3, BigInt(2 * c.d4 * c.d5));
    return c;
}

std::vector<std::pair<std::string, BigInt>> constants_table(const GrammarConstants& c) {
    return {{"m", c.m},   {"hinc", c.hinc}, {"stepinc", c.stepinc}, {"d0", c.d0}, {"d1", c.d1},
            {"d2", c.d2}, {"d3", c.d3},     {"n", c.n},             {"s", c.s},   {"g", c.g},
            {"d4", c.d4}, {"d5", c.d5},     {"c", c.c}};
}

}  // namespace fog
