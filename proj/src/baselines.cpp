#include "rpg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rpg {

namespace {

ScoredVocab renormalized(ScoredVocab s) {
    double sum = 0;
    for (const auto& [id, p] : s.entries) sum += p;
    if (sum <= 0) throw std::invalid_argument("distribution has no probability mass");
    for (auto& [id, p] : s.entries) p /= sum;
    return s;
}

std::vector<std::pair<int, double>> by_descending_prob(const ScoredVocab& s) {
    std::vector<std::pair<int, double>> v(s.entries.begin(), s.entries.end());
    std::stable_sort(v.begin(), v.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return v;
}

} // namespace

SamplerConfig SamplerConfig::parse(const std::string& spec) {
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        size_t pos = 0;
        while (true) {
            size_t c = s.find(':', pos);
            parts.push_back(s.substr(pos, c - pos));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        return parts;
    };
    std::vector<std::string> parts = split(spec);
    SamplerConfig out;
    try {
        const std::string& name = parts[0];
        if (name == "greedy" && parts.size() == 1) {
            out.kind = Kind::Greedy;
        } else if (name == "temp" && parts.size() == 2) {
            out.kind = Kind::Temperature;
            out.temperature = std::stod(parts[1]);
            if (!(out.temperature > 0)) throw std::invalid_argument(spec);
        } else if (name == "topk" && parts.size() == 2) {
            out.kind = Kind::TopK;
            out.k = std::stoi(parts[1]);
            if (out.k < 1) throw std::invalid_argument(spec);
        } else if (name == "topp" && parts.size() == 2) {
            out.kind = Kind::TopP;
            out.p = std::stod(parts[1]);
            if (!(out.p > 0 && out.p <= 1)) throw std::invalid_argument(spec);
        } else if (name == "ctrl" && (parts.size() == 2 || parts.size() == 3)) {
            out.kind = Kind::CtrlPenalty;
            out.theta = std::stod(parts[1]);
            if (parts.size() == 3) out.temperature = std::stod(parts[2]);
            if (out.theta < 1 || !(out.temperature > 0)) throw std::invalid_argument(spec);
        } else if (name == "rpg" && (parts.size() == 1 || parts.size() == 2)) {
            out.kind = Kind::Rpg;
            if (parts.size() == 2) out.lambda = std::stod(parts[1]);
            if (!(out.lambda > 0 && out.lambda < 1)) throw std::invalid_argument(spec);
        } else {
            throw std::invalid_argument(spec);
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("unknown sampler spec: " + spec);
    }
    return out;
}

std::string SamplerConfig::display() const {
    switch (kind) {
        case Kind::Greedy: return "greedy";
        case Kind::Temperature: return "temp:" + std::to_string(temperature);
        case Kind::TopK: return "topk:" + std::to_string(k);
        case Kind::TopP: return "topp:" + std::to_string(p);
        case Kind::CtrlPenalty:
            return "ctrl:" + std::to_string(theta) + ":" + std::to_string(temperature);
        case Kind::Rpg: return "rpg:" + std::to_string(lambda);
    }
    return "?";
}

int greedy_select(const ScoredVocab& scores) {
    if (scores.entries.empty()) throw std::invalid_argument("empty vocabulary");
    int best = scores.entries.begin()->first;
    double best_p = scores.entries.begin()->second;
    for (const auto& [id, p] : scores.entries)
        if (p > best_p) {
            best = id;
            best_p = p;
        }
    return best;
}

ScoredVocab temperature_transform(const ScoredVocab& scores, double t) {
    if (!(t > 0)) throw std::invalid_argument("temperature must be positive");
    ScoredVocab out = scores;
    for (auto& [id, p] : out.entries) p = p > 0 ? std::exp(std::log(p) / t) : 0.0;
    return renormalized(std::move(out));
}

ScoredVocab topk_filter(const ScoredVocab& scores, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    auto sorted = by_descending_prob(scores);
    ScoredVocab out;
    out.eos_id = scores.eos_id;
    for (size_t i = 0; i < sorted.size() && i < static_cast<size_t>(k); ++i)
        out.entries[sorted[i].first] = sorted[i].second;
    return renormalized(std::move(out));
}

ScoredVocab topp_filter(const ScoredVocab& scores, double p) {
    if (!(p > 0 && p <= 1)) throw std::invalid_argument("p must be in (0,1]");
    auto sorted = by_descending_prob(scores);
    ScoredVocab out;
    out.eos_id = scores.eos_id;
    double mass = 0;
    for (const auto& [id, prob] : sorted) {
        out.entries[id] = prob;
        mass += prob;
        if (mass >= p - 1e-12) break; // boundary token completing the mass is kept
    }
    return renormalized(std::move(out));
}

ScoredVocab ctrl_penalty_transform(const ScoredVocab& scores, const std::set<int>& generated,
                                   double theta, double t) {
    if (theta < 1 || !(t > 0)) throw std::invalid_argument("need theta >= 1 and t > 0");
    ScoredVocab out = scores;
    for (auto& [id, p] : out.entries) {
        double i = generated.count(id) ? theta : 1.0;
        p = p > 0 ? std::exp(std::log(p) / (t * i)) : 0.0;
    }
    return renormalized(std::move(out));
}

GenerationResult run_sampler(Model& model, const PdaConfig& config, const TokenVocab& vocab,
                             const std::vector<int>& prompt, size_t budget,
                             const SamplerConfig& sampler) {
    if (sampler.kind == SamplerConfig::Kind::Rpg) {
        PenaltyConfig pc;
        pc.lambda = sampler.lambda;
        pc.seed = sampler.seed;
        return decode(model, config, vocab, prompt, pc, budget);
    }
    std::mt19937_64 rng(sampler.seed);
    ChooseFn choose = [&](const DecodeSession& ds, const ScoredVocab& scores) -> int {
        switch (sampler.kind) {
            case SamplerConfig::Kind::Greedy:
                return greedy_select(scores);
            case SamplerConfig::Kind::Temperature:
                return select_token(temperature_transform(scores, sampler.temperature),
                                    SelectMode::Sample, rng);
            case SamplerConfig::Kind::TopK:
                return select_token(topk_filter(scores, sampler.k), SelectMode::Sample, rng);
            case SamplerConfig::Kind::TopP:
                return select_token(topp_filter(scores, sampler.p), SelectMode::Sample, rng);
            case SamplerConfig::Kind::CtrlPenalty: {
                std::set<int> seen(ds.history.begin(), ds.history.end());
                return select_token(
                    ctrl_penalty_transform(scores, seen, sampler.theta, sampler.temperature),
                    SelectMode::Sample, rng);
            }
            case SamplerConfig::Kind::Rpg: break;
        }
        throw std::logic_error("unreachable sampler kind");
    };
    return decode_with(model, config, vocab, prompt, budget, choose);
}

} // namespace rpg
