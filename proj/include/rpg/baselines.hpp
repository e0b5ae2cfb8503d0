#pragma once

#include <set>
#include <string>

#include "rpg/penalizer.hpp"

namespace rpg {

struct SamplerConfig {
    enum class Kind { Greedy, Temperature, TopK, TopP, CtrlPenalty, Rpg };
    Kind kind = Kind::Greedy;
    double temperature = 1.0; // Temperature, CtrlPenalty
    int k = 1;                // TopK
    double p = 1.0;           // TopP
    double theta = 1.0;       // CtrlPenalty discount for seen tokens
    double lambda = 0.9;      // Rpg
    uint64_t seed = 0;

    // Parses "greedy", "temp:0.8", "topk:30", "topp:0.95", "ctrl:1.2:1.0",
    // "rpg" or "rpg:0.9".  Throws std::invalid_argument on anything else.
    static SamplerConfig parse(const std::string& spec);
    std::string display() const;
};

int greedy_select(const ScoredVocab& scores);

ScoredVocab temperature_transform(const ScoredVocab& scores, double t);

ScoredVocab topk_filter(const ScoredVocab& scores, int k);

ScoredVocab topp_filter(const ScoredVocab& scores, double p);

ScoredVocab ctrl_penalty_transform(const ScoredVocab& scores, const std::set<int>& generated,
                                   double theta, double t);

// Runs one generation with the given sampler (Rpg included) over the shared
// decode loop.
GenerationResult run_sampler(Model& model, const PdaConfig& config, const TokenVocab& vocab,
                             const std::vector<int>& prompt, size_t budget,
                             const SamplerConfig& sampler);

} // namespace rpg
