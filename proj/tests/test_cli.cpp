#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fog/cli.hpp"
#include "fog/grammar.hpp"
#include "fog/term_text.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace fog;
using Json = nlohmann::json;

namespace {

const std::string kDir = FOG_GRAMMAR_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string grammar(const char* name) { return kDir + "/" + name; }

}  // namespace

TEST_CASE("validate") {
    const Result ok = cli({"validate", "--grammar", grammar("g1.fog")});
    CHECK(ok.code == exit_ok);
    for (const char* d : {"d0 = 2", "d1 = ", "d2 = 5", "d3 = ", "d4 = ", "d5 = "}) CHECK(ok.out.find(d) != std::string::npos);

    const std::string bad = "/tmp/fogeq_cli_bad.fog";
    std::ofstream(bad) << "nonterminals: A/1, B/0\nactions: a\nrule r1: A(x1) -a-> x1\nrule r2: B -a-> A(B,B)\n";
    const Result arity = cli({"validate", "--grammar", bad});
    CHECK(arity.code == exit_usage);
    CHECK(arity.err.find("line 4") != std::string::npos);
    CHECK(cli({"validate", "--grammar", "/nonexistent.fog"}).code == exit_usage);
}

TEST_CASE("validate report round-trips") {
    for (const char* name : {"g1.fog", "sharing.fog", "balance.fog", "switch.fog", "tiny_pair.fog"}) {
        const Result r = cli({"validate", "--grammar", grammar(name), "--json"});
        REQUIRE(r.code == exit_ok);
        const Json j = Json::parse(r.out);
        CHECK(j["schema"] == 1);
        CHECK(j["ok"] == true);
        // Rebuild the grammar file from the report alone.
        std::string text = "nonterminals: ";
        for (std::size_t i = 0; i < j["nonterminals"].size(); ++i) {
            if (i) text += ", ";
            text += j["nonterminals"][i]["name"].get<std::string>() + "/" +
                    std::to_string(j["nonterminals"][i]["arity"].get<unsigned>());
        }
        text += "\nactions: ";
        for (std::size_t i = 0; i < j["actions"].size(); ++i) {
            if (i) text += ", ";
            text += j["actions"][i].get<std::string>();
        }
        text += "\n";
        for (const Json& rule : j["rules"]) {
            const std::string lhs = rule["lhs"];
            unsigned arity = 0;
            for (const Json& nt : j["nonterminals"]) {
                if (nt["name"] == lhs) arity = nt["arity"];
            }
            std::string head = lhs;
            if (arity > 0) {
                head += "(";
                for (unsigned x = 1; x <= arity; ++x) head += (x > 1 ? ",x" : "x") + std::to_string(x);
                head += ")";
            }
            text += "rule " + rule["name"].get<std::string>() + ": " + head + " -" + rule["action"].get<std::string>() +
                    "-> " + rule["rhs"].get<std::string>() + "\n";
        }
        const Grammar a = load_grammar(grammar(name));
        const Grammar b = parse_grammar(text);
        CHECK(format_grammar(a) == format_grammar(b));
        const Result c = cli({"constants", "--grammar", grammar(name), "--json"});
        CHECK(Json::parse(c.out)["constants"] == j["constants"]);
    }
}

TEST_CASE("decide") {
    CHECK(cli({"decide", "--grammar", grammar("sharing.fog"), "A(x1,B,x2)", "A(x1,B,x2)"}).out == "equivalent-up-to 16\n");
    const Result v = cli({"decide", "--grammar", grammar("sharing.fog"), "x2", "B"});
    CHECK(v.out == "distinguished level=0\n");
    CHECK(v.code == exit_negative);
    for (unsigned n = 0; n < 8; ++n) {
        std::string a = "B", c = "C";
        for (unsigned i = 0; i < n; ++i) {
            a = "A(" + a + ")";
            c = "A(" + c + ")";
        }
        const Result r = cli({"decide", "--grammar", grammar("counter.fog"), "--cutoff", "10", a, c});
        CHECK(r.out == "distinguished level=" + std::to_string(n) + "\n");
    }
    const Result j = cli({"decide", "--grammar", grammar("counter.fog"), "--json", "A(B)", "A(C)"});
    CHECK(Json::parse(j.out)["verdict"] == "distinguished");
    CHECK(Json::parse(j.out)["level"] == 1);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == exit_usage);
    CHECK(cli({"frobnicate"}).code == exit_usage);
    CHECK(cli({"decide", "A", "B"}).code == exit_usage);
    CHECK(cli({"decide", "--grammar", grammar("counter.fog"), "A(B"}).code == exit_usage);
    CHECK(cli({"decide", "--grammar", grammar("counter.fog"), "A(B,B)", "B"}).code == exit_usage);
    CHECK(cli({"decide", "--grammar", grammar("counter.fog"), "--cutoff", "0", "B", "C"}).code == exit_usage);
    CHECK(cli({"run", "--grammar", grammar("counter.fog"), "--term", "B", "--word", "r9"}).code == exit_usage);
    CHECK(cli({"--help"}).code == exit_ok);
}

TEST_CASE("step and run") {
    const Result s = cli({"step", "--grammar", grammar("balance.fog"), "--term", "A(g1,g2)"});
    CHECK(s.out == "r1 -a1-> B(C(g2,g1),g1)\nr3 -a3-> g1\nr4 -a4-> g2\n");
    const Result r = cli({"run", "--grammar", grammar("balance.fog"), "--term", "A(g1,g2)", "--word", "r1,r2 q2"});
    CHECK(r.code == exit_ok);
    CHECK(r.out == "A(g1,g2)\n -r1-> B(C(g2,g1),g1)\n -r2-> B'(g1,C(g2,g1))\n -q2-> C(g2,g1)\n");
    const Result blocked = cli({"run", "--grammar", grammar("balance.fog"), "--term", "A(g1,g2)", "--word", "r1 q1"});
    CHECK(blocked.code == exit_negative);
    const Json j = Json::parse(
        cli({"run", "--grammar", grammar("balance.fog"), "--term", "A(g1,g2)", "--word", "r3", "--json"}).out);
    CHECK(j["terms"] == Json::array({"A(g1,g2)", "g1"}));
    CHECK(j["complete"] == true);
}

TEST_CASE("eqlevel output is deterministic") {
    const std::vector<std::string> base = {"eqlevel", "--grammar", grammar("popping.fog"), "--random", "40", "--seed", "9"};
    auto with = [&](std::vector<std::string> extra) {
        std::vector<std::string> a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return cli(a);
    };
    const Result one = with({});
    CHECK(one.code == exit_ok);
    CHECK(one.out == with({}).out);
    CHECK(one.out == with({"--jobs", "3"}).out);
    CHECK(one.out != with({"--seed", "10"}).out);

    const std::string file = "/tmp/fogeq_cli_pairs.txt";
    std::ofstream(file) << "# pairs\nA(B) | A(C)\n\nB | B\n";
    const Result f = cli({"eqlevel", "--grammar", grammar("counter.fog"), "--pairs", file, "--jobs", "2"});
    CHECK(f.out == "A(B) | A(C) : finite 1\nB | B : at-least 16\n");
}

TEST_CASE("play, balance and verify") {
    const Result p = cli({"play", "--grammar", grammar("balance.fog"), "A(g1,g2)", "P"});
    CHECK(p.code == exit_ok);
    CHECK(p.out.rfind("level 3\n", 0) == 0);
    CHECK(cli({"play", "--grammar", grammar("counter.fog"), "B", "B"}).code == exit_cutoff);

    const Result b = cli({"balance", "--grammar", grammar("switch.fog"), "--cutoff", "31", "--json", "A(C(V))", "Q"});
    const Json j = Json::parse(b.out);
    REQUIRE(j["balanced"]["phases"].size() == 2);
    CHECK(j["balanced"]["phases"][0]["switched"] == true);
    CHECK(j["balanced"]["crucial"].size() == 2);

    const Result v = cli({"verify", "--grammar", grammar("balance.fog"), "--json", "A(g1,g2)", "P"});
    CHECK(v.code == exit_ok);
    const Json vj = Json::parse(v.out);
    CHECK(vj["ok"] == true);
    bool total = false;
    for (const Json& c : vj["checks"]) total = total || (c["name"] == "total-length" && c["passed"] == true);
    CHECK(total);
}

TEST_CASE("base") {
    const Result r = cli({"base", "--grammar", grammar("tiny_unary.fog"), "--cutoff", "10", "--n", "1", "--s", "2",
                          "--g", "0", "--search", "--json"});
    CHECK(r.code == exit_ok);
    const Json j = Json::parse(r.out);
    CHECK(j["status"] == "complete");
    CHECK(j["search"]["status"] == "sound");
    CHECK(j["search"]["equals_full_base"] == true);
    CHECK(j["layers"].size() == 2);
    CHECK(j["bound"] == 4);
    const Result capped = cli({"base", "--grammar", grammar("tiny_unary.fog"), "--cutoff", "10", "--n", "1", "--s",
                               "4", "--g", "2"});
    CHECK(capped.code == exit_cutoff);
    CHECK(capped.out.find("status incomplete") != std::string::npos);
}

TEST_CASE("pipeline") {
    const Result trivial = cli({"pipeline", "--grammar", grammar("counter.fog"), "A(B)", "A(C)"});
    CHECK(trivial.code == exit_ok);
    CHECK(trivial.out.find("pass total-length") != std::string::npos);
    CHECK(cli({"pipeline", "--grammar", grammar("counter.fog"), "A(B)", "A(B)"}).code == exit_cutoff);

    const Result chain = cli({"pipeline", "--grammar", grammar("chain.fog"), "--cutoff", "31", "--json", "A(G,H)", "P0"});
    CHECK(chain.code == exit_ok);
    const Json j = Json::parse(chain.out);
    std::size_t stairs = 0;
    for (const Json& c : j["pairs"][0]["checks"]) {
        if (c["name"].get<std::string>().rfind("stair-sequence", 0) == 0) ++stairs;
        CHECK(c["passed"] == true);
    }
    CHECK(stairs == 2);

    // Randomized battery: seeds 1..100 over the tiny grammars.
    std::size_t pairs = 0;
    for (int seed = 1; seed <= 100; ++seed) {
        for (const char* name : {"tiny_unary.fog", "tiny_pair.fog", "tiny_branch.fog", "counter.fog", "switch.fog"}) {
            const Result r = cli({"pipeline", "--grammar", grammar(name), "--cutoff", "10", "--random", "2", "--seed",
                                  std::to_string(seed), "--json"});
            CHECK_MESSAGE(r.code == exit_ok, name, " seed ", seed, "\n", r.out);
            pairs += Json::parse(r.out)["pairs"].size();
        }
    }
    CHECK(pairs >= 500);
}
