#include "rpg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rpg {

ScoredVocab ScriptedModel::score(const std::vector<int>& history) {
    for (const ScriptRule& r : rules_) {
        if (r.suffix.size() > history.size()) continue;
        if (std::equal(r.suffix.rbegin(), r.suffix.rend(), history.rbegin()))
            return {r.dist, eos_id_};
    }
    return {fallback_, eos_id_};
}

ScoredVocab SelfReinforcingModel::score(const std::vector<int>& history) {
    ScoredVocab d = base_->score(history);
    auto it = d.entries.find(anchor_);
    if (it == d.entries.end() || it->second <= 0 || it->second >= 1) return d;
    size_t r = static_cast<size_t>(std::count(history.begin(), history.end(), anchor_));
    double p0 = it->second;
    double boosted = std::min(cap_, p0 * std::pow(boost_, static_cast<double>(r)));
    double scale = (1.0 - boosted) / (1.0 - p0);
    for (auto& [id, p] : d.entries) p *= scale;
    d.entries[anchor_] = boosted;
    return d;
}

std::vector<SamplerOutcome> run_scenario(const Scenario& scenario, const PdaConfig& config) {
    std::vector<SamplerOutcome> out;
    for (const SamplerConfig& sampler : scenario.samplers) {
        SamplerOutcome so;
        so.sampler = sampler;
        for (uint64_t seed : scenario.seeds) {
            SamplerConfig seeded = sampler;
            seeded.seed = seed;
            so.runs.push_back(run_sampler(*scenario.model, config, scenario.vocab,
                                          scenario.prompt, scenario.budget, seeded));
        }
        so.report = metric_report(so.runs);
        out.push_back(std::move(so));
    }
    return out;
}

std::vector<LambdaRow> lambda_sweep(const Scenario& scenario, const PdaConfig& config,
                                    const std::vector<double>& lambdas) {
    std::vector<LambdaRow> rows;
    for (double lambda : lambdas) {
        if (!(lambda > 0 && lambda < 1)) throw std::invalid_argument("lambda must be in (0,1)");
        SamplerConfig rpg;
        rpg.kind = SamplerConfig::Kind::Rpg;
        rpg.lambda = lambda;
        std::vector<GenerationResult> runs;
        for (uint64_t seed : scenario.seeds) {
            rpg.seed = seed;
            runs.push_back(run_sampler(*scenario.model, config, scenario.vocab, scenario.prompt,
                                       scenario.budget, rpg));
        }
        rows.push_back({lambda, metric_report(runs)});
    }
    return rows;
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path);
    std::vector<CorpusRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed record: " + e.what());
        }
        if (!j.contains("id") || !j.contains("prompt_text"))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": record needs id and prompt_text");
        CorpusRecord rec;
        rec.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        rec.prompt_text = j["prompt_text"].get<std::string>();
        if (j.contains("reference_text")) rec.reference_text = j["reference_text"].get<std::string>();
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

std::vector<SamplerConfig> default_samplers() {
    return {SamplerConfig::parse("greedy"),    SamplerConfig::parse("temp:0.8"),
            SamplerConfig::parse("topk:5"),    SamplerConfig::parse("topp:0.95"),
            SamplerConfig::parse("ctrl:1.2:1.0"), SamplerConfig::parse("rpg:0.9")};
}

std::vector<uint64_t> default_seeds(size_t n) {
    std::vector<uint64_t> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = 1000 + i;
    return s;
}

} // namespace

Scenario make_elif_trap_scenario() {
    // 0 <eos>  1 if    2 " x"  3 " >"   4 " 0"   5 ":"     6 "\n"  7 "    y"
    // 8 " ="   9 " 1"  10 elif 11 " 2"  12 else  13 " []"  14 "():"
    Scenario sc;
    sc.name = "elif_trap";
    sc.vocab.texts = {"<eos>", "if",   " x",   " >", " 0", ":",    "\n",  "    y",
                      " =",    " 1",   "elif", " 2", "else", " []", "():"};
    sc.vocab.eos_id = 0;
    std::vector<ScriptRule> rules = {
        {{12, 5, 6, 7, 8}, {{4, 0.99}, {0, 0.01}}},          // else-branch value
        {{9, 6}, {{10, 0.6}, {12, 0.3}, {0, 0.05}, {1, 0.05}}}, // arm boundary
        {{4, 6}, {{0, 0.95}, {10, 0.03}, {12, 0.02}}},        // after escape line
        {{5, 6}, {{7, 0.98}, {14, 0.01}, {0, 0.01}}},         // body line start
        {{3, 4}, {{5, 0.99}, {0, 0.01}}},
        {{3, 9}, {{5, 0.99}, {0, 0.01}}},
        {{10}, {{2, 0.98}, {13, 0.01}, {14, 0.01}}},
        {{1}, {{2, 0.98}, {13, 0.01}, {14, 0.01}}},
        {{12}, {{5, 0.98}, {13, 0.01}, {14, 0.01}}},
        {{2}, {{3, 0.98}, {13, 0.01}, {0, 0.01}}},
        {{3}, {{11, 0.98}, {4, 0.01}, {9, 0.01}}},
        {{11}, {{5, 0.99}, {14, 0.01}}},
        {{5}, {{6, 0.98}, {7, 0.01}, {0, 0.01}}},
        {{7}, {{8, 0.99}, {5, 0.01}}},
        {{8}, {{9, 0.98}, {4, 0.01}, {13, 0.01}}},
        {{9}, {{6, 0.99}, {0, 0.01}}},
        {{4}, {{6, 0.99}, {0, 0.01}}},
        {{13}, {{5, 0.99}, {0, 0.01}}},
        {{14}, {{6, 0.99}, {0, 0.01}}},
    };
    auto base = std::make_shared<ScriptedModel>(std::move(rules),
                                                std::map<int, double>{{0, 0.5}, {6, 0.5}}, 0);
    sc.model = std::make_shared<SelfReinforcingModel>(base, /*anchor=*/10, /*boost=*/1.05,
                                                      /*cap=*/0.9);
    sc.prompt = {1, 2, 3, 4, 5, 6, 7, 8, 9, 6}; // if x > 0:\n    y = 1\n
    sc.budget = 1024;
    sc.samplers = default_samplers();
    sc.seeds = default_seeds(20);
    return sc;
}

Scenario make_repetition_free_scenario() {
    // 0 <eos> 1 def 2 " f" 3 "():" 4 "\n" 5 "    return" 6 " x" 7 " +" 8 " 1"
    Scenario sc;
    sc.name = "repetition_free";
    sc.vocab.texts = {"<eos>", "def", " f", "():", "\n", "    return", " x", " +", " 1"};
    sc.vocab.eos_id = 0;
    std::vector<ScriptRule> rules = {
        {{8, 4}, {{0, 0.9}, {1, 0.1}}}, // statement done: stop
        {{1}, {{2, 0.9}, {0, 0.1}}},
        {{2}, {{3, 0.9}, {0, 0.1}}},
        {{3}, {{4, 0.9}, {0, 0.1}}},
        {{4}, {{5, 0.95}, {0, 0.05}}},
        {{5}, {{6, 0.9}, {0, 0.1}}},
        {{6}, {{7, 0.9}, {0, 0.1}}},
        {{7}, {{8, 0.9}, {0, 0.1}}},
        {{8}, {{4, 0.9}, {0, 0.1}}},
    };
    sc.model = std::make_shared<ScriptedModel>(std::move(rules),
                                               std::map<int, double>{{0, 1.0}}, 0);
    sc.prompt = {1, 2, 3, 4}; // def f():\n
    sc.budget = 1024;
    sc.samplers = {SamplerConfig::parse("greedy"), SamplerConfig::parse("rpg:0.9")};
    sc.seeds = default_seeds(20);
    return sc;
}

Scenario make_synthetic_prompt_scenario(size_t copies) {
    // 0 <eos> 1 "x" 2 " =" 3 " 1" 4 "\n"
    Scenario sc;
    sc.name = "synthetic_prompt";
    sc.vocab.texts = {"<eos>", "x", " =", " 1", "\n"};
    sc.vocab.eos_id = 0;
    std::vector<ScriptRule> rules = {
        {{1}, {{2, 0.99}, {0, 0.01}}},
        {{2}, {{3, 0.99}, {0, 0.01}}},
        {{3}, {{4, 0.99}, {0, 0.01}}},
        {{4}, {{1, 0.6}, {0, 0.4}}},
    };
    sc.model = std::make_shared<ScriptedModel>(std::move(rules),
                                               std::map<int, double>{{0, 1.0}}, 0);
    for (size_t i = 0; i < copies; ++i) sc.prompt.insert(sc.prompt.end(), {1, 2, 3, 4});
    sc.budget = 1024;
    sc.samplers = {SamplerConfig::parse("greedy"), SamplerConfig::parse("rpg:0.9")};
    sc.seeds = default_seeds(20);
    return sc;
}

Scenario make_scenario_by_name(const std::string& name) {
    if (name == "elif_trap") return make_elif_trap_scenario();
    if (name == "repetition_free") return make_repetition_free_scenario();
    if (name == "synthetic_prompt") return make_synthetic_prompt_scenario();
    throw std::invalid_argument("unknown scenario: " + name);
}

} // namespace rpg
