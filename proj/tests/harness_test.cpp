#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"
#include "rpg/harness.hpp"

using namespace rpg;
using rpgtest::python_pda;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = std::string(RPG_TEST_DATA_DIR) + "/.tmp_corpus_" + std::to_string(counter++) +
               ".jsonl";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("scripted model dispatches on the first matching suffix rule") {
    ScriptedModel m({{{1, 2}, {{3, 1.0}}}, {{2}, {{4, 1.0}}}}, {{0, 1.0}}, 0);
    CHECK(m.score({9, 1, 2}).entries.at(3) == doctest::Approx(1.0));
    CHECK(m.score({9, 2}).entries.at(4) == doctest::Approx(1.0));
    CHECK(m.score({2, 9}).entries.at(0) == doctest::Approx(1.0)); // fallback
    CHECK(m.score({}).entries.at(0) == doctest::Approx(1.0));
    // first matching rule wins when several could apply
    ScriptedModel first({{{2}, {{7, 1.0}}}, {{1, 2}, {{8, 1.0}}}}, {{0, 1.0}}, 0);
    CHECK(first.score({1, 2}).entries.at(7) == doctest::Approx(1.0));
}

TEST_CASE("scripted model emits valid distributions") {
    ScriptedModel m({{{1}, {{2, 0.6}, {3, 0.4}}}}, {{0, 0.5}, {1, 0.5}}, 0);
    CHECK(valid_distribution(m.score({1})));
    CHECK(valid_distribution(m.score({5})));
    CHECK(m.score({1}).eos_id == 0);
}

TEST_CASE("self-reinforcing wrapper boosts the anchor with each occurrence") {
    auto base = std::make_shared<ScriptedModel>(std::vector<ScriptRule>{},
                                                std::map<int, double>{{0, 0.4}, {1, 0.6}}, 0);
    SelfReinforcingModel m(base, 1, 1.5, 0.95);
    double prev = 0.0;
    std::vector<int> history;
    for (int r = 0; r < 12; ++r) {
        ScoredVocab s = m.score(history);
        CHECK(valid_distribution(s));
        double p = s.entries.at(1);
        CHECK(p >= prev - 1e-12); // non-decreasing in anchor count
        CHECK(p <= 0.95 + 1e-12); // capped
        // non-anchor mass shrinks proportionally
        CHECK(s.entries.at(0) == doctest::Approx(1.0 - p).epsilon(1e-9));
        prev = p;
        history.push_back(1);
    }
    CHECK(prev == doctest::Approx(0.95)); // cap reached well before 12 occurrences
}

TEST_CASE("self-reinforcing wrapper counts only anchor occurrences") {
    auto base = std::make_shared<ScriptedModel>(std::vector<ScriptRule>{},
                                                std::map<int, double>{{0, 0.4}, {1, 0.6}}, 0);
    SelfReinforcingModel m(base, 1, 1.5, 0.95);
    double with_noise = m.score({2, 3, 4, 5}).entries.at(1);
    double fresh = m.score({}).entries.at(1);
    CHECK(with_noise == doctest::Approx(fresh));
}

TEST_CASE("built-in scenarios construct and resolve by name") {
    for (const char* name : {"elif_trap", "repetition_free", "synthetic_prompt"}) {
        Scenario sc = make_scenario_by_name(name);
        CHECK(sc.name == name);
        REQUIRE(sc.model != nullptr);
        CHECK(!sc.vocab.texts.empty());
        CHECK(!sc.prompt.empty());
        CHECK(!sc.samplers.empty());
        CHECK(!sc.seeds.empty());
    }
    CHECK_THROWS_AS(make_scenario_by_name("unknown"), std::invalid_argument);
}

TEST_CASE("trap scenario separates greedy from the penalized decoder") {
    const PdaConfig& cfg = python_pda();
    Scenario sc = make_elif_trap_scenario();
    sc.samplers = {SamplerConfig::parse("greedy"), SamplerConfig::parse("rpg:0.9")};
    sc.seeds = {1000, 1001, 1002};
    auto outcomes = run_scenario(sc, cfg);
    REQUIRE(outcomes.size() == 2);
    const MetricReport& greedy = outcomes[0].report;
    const MetricReport& rpg = outcomes[1].report;
    CHECK(greedy.egp == doctest::Approx(0.0));
    CHECK(greedy.gen_len_mean == doctest::Approx(1024.0));
    CHECK(rpg.egp == doctest::Approx(1.0));
    CHECK(rpg.ccp == doctest::Approx(1.0));
    CHECK(rpg.gen_len_mean < 1024.0);
    CHECK(rpg.tr_s < greedy.tr_s);
    for (const auto& o : outcomes) {
        CHECK(o.runs.size() == 3);
        CHECK(o.report.sample_count == 3);
    }
}

TEST_CASE("decay sweep produces one row per factor with deterministic results") {
    const PdaConfig& cfg = python_pda();
    Scenario sc = make_elif_trap_scenario();
    sc.seeds = {1000};
    auto rows = lambda_sweep(sc, cfg, {0.9, 0.5});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].lambda == doctest::Approx(0.9));
    CHECK(rows[1].lambda == doctest::Approx(0.5));
    CHECK(rows[0].report.gen_len_mean > rows[1].report.gen_len_mean);
    auto again = lambda_sweep(sc, cfg, {0.9, 0.5});
    CHECK(again[0].report.gen_len_mean == doctest::Approx(rows[0].report.gen_len_mean));
}

TEST_CASE("scenario runs are byte-identical across invocations") {
    const PdaConfig& cfg = python_pda();
    Scenario sc = make_elif_trap_scenario();
    sc.samplers = {SamplerConfig::parse("temp:0.8")};
    sc.seeds = {1000, 1001};
    auto a = run_scenario(sc, cfg);
    auto b = run_scenario(sc, cfg);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].runs.size() == b[i].runs.size());
        for (size_t j = 0; j < a[i].runs.size(); ++j) {
            CHECK(a[i].runs[j].tokens == b[i].runs[j].tokens);
            CHECK(a[i].runs[j].text == b[i].runs[j].text);
        }
    }
}

TEST_CASE("corpus loader reads records and optional references") {
    TempFile f("{\"id\": \"a\", \"prompt_text\": \"x = 1\\n\"}\n"
               "{\"id\": \"b\", \"prompt_text\": \"pass\\n\", \"reference_text\": \"pass\\n\"}\n"
               "\n");
    auto records = load_corpus(f.path);
    REQUIRE(records.size() == 2);
    CHECK(records[0].id == "a");
    CHECK(records[0].prompt_text == "x = 1\n");
    CHECK_FALSE(records[0].reference_text.has_value());
    CHECK(records[1].reference_text.value() == "pass\n");
}

TEST_CASE("corpus loader reports malformed lines by number") {
    TempFile f("{\"id\": \"a\", \"prompt_text\": \"x\"}\nnot json\n");
    try {
        load_corpus(f.path);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("corpus loader requires id and prompt_text") {
    TempFile f("{\"prompt_text\": \"x\"}\n");
    CHECK_THROWS_AS(load_corpus(f.path), std::runtime_error);
    TempFile g("{\"id\": \"a\"}\n");
    CHECK_THROWS_AS(load_corpus(g.path), std::runtime_error);
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), std::runtime_error);
}

TEST_CASE("frozen corpus files load and classify cleanly") {
    auto valid = load_corpus(std::string(RPG_TEST_DATA_DIR) + "/valid.jsonl");
    auto invalid = load_corpus(std::string(RPG_TEST_DATA_DIR) + "/invalid.jsonl");
    CHECK(valid.size() == 50);
    CHECK(invalid.size() == 50);
}
