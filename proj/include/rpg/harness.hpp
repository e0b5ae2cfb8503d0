#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rpg/baselines.hpp"
#include "rpg/metrics.hpp"
#include "rpg/penalizer.hpp"

namespace rpg {

// Suffix-dispatch mock model: the first rule whose token-id suffix matches
// the end of the history supplies the distribution; otherwise the fallback.
struct ScriptRule {
    std::vector<int> suffix;
    std::map<int, double> dist;
};

class ScriptedModel : public Model {
public:
    ScriptedModel(std::vector<ScriptRule> rules, std::map<int, double> fallback, int eos_id)
        : rules_(std::move(rules)), fallback_(std::move(fallback)), eos_id_(eos_id) {}

    ScoredVocab score(const std::vector<int>& history) override;

private:
    std::vector<ScriptRule> rules_;
    std::map<int, double> fallback_;
    int eos_id_;
};

// Wraps a base model and boosts the anchor token's probability by boost^r,
// capped, where r is the number of anchor occurrences in the history; the
// remaining mass is scaled down proportionally.
class SelfReinforcingModel : public Model {
public:
    SelfReinforcingModel(std::shared_ptr<Model> base, int anchor, double boost, double cap)
        : base_(std::move(base)), anchor_(anchor), boost_(boost), cap_(cap) {}

    ScoredVocab score(const std::vector<int>& history) override;

private:
    std::shared_ptr<Model> base_;
    int anchor_;
    double boost_;
    double cap_;
};

struct Scenario {
    std::string name;
    std::shared_ptr<Model> model;
    TokenVocab vocab;
    std::vector<int> prompt;
    size_t budget = 1024;
    std::vector<SamplerConfig> samplers;
    std::vector<uint64_t> seeds = {0};
};

struct SamplerOutcome {
    SamplerConfig sampler;
    std::vector<GenerationResult> runs; // one per seed
    MetricReport report;
};

std::vector<SamplerOutcome> run_scenario(const Scenario& scenario, const PdaConfig& config);

struct LambdaRow {
    double lambda;
    MetricReport report;
};

std::vector<LambdaRow> lambda_sweep(const Scenario& scenario, const PdaConfig& config,
                                    const std::vector<double>& lambdas);

struct CorpusRecord {
    std::string id;
    std::string prompt_text;
    std::optional<std::string> reference_text;
};

// Line-delimited JSON records {id, prompt_text, reference_text?}; malformed
// lines raise std::runtime_error naming the line number.
std::vector<CorpusRecord> load_corpus(const std::string& path);

// Built-in scenarios.  The elif trap reproduces the self-reinforcing
// repetition pathology; the repetition-free chain never triggers a penalty;
// the synthetic prompt starts with `copies` duplicated statements already in
// the prompt.
Scenario make_elif_trap_scenario();
Scenario make_repetition_free_scenario();
Scenario make_synthetic_prompt_scenario(size_t copies = 5);
Scenario make_scenario_by_name(const std::string& name);

} // namespace rpg
