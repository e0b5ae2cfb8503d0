#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rpg/detector.hpp"
#include "rpg/grammar.hpp"
#include "rpg/lexer.hpp"
#include "rpg/pda.hpp"

namespace rpgtest {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const rpg::GrammarSpec& python_grammar() {
    static rpg::GrammarSpec spec = rpg::parse_grammar(read_file(RPG_ASSET_DIR "/python.gram"));
    return spec;
}

inline const rpg::PdaConfig& python_pda() {
    static rpg::PdaConfig cfg = rpg::build_pda(python_grammar());
    return cfg;
}

struct ReduceOutcome {
    std::vector<rpg::ReductionLabel> merged;
    std::vector<int> ids;
    std::vector<rpg::StatementInstance> statements;
    rpg::PdaSession session;
    bool stepped_all = true;
    bool accepted = false;
};

inline ReduceOutcome reduce_source(const rpg::PdaConfig& cfg, const std::string& source) {
    ReduceOutcome out{{}, {}, {}, rpg::PdaSession::start(cfg), true, false};
    rpg::Reducer red;
    size_t i = 0;
    for (const rpg::Terminal& t : rpg::lex(source, cfg.lex_vocab)) {
        rpg::StepOutcome o = rpg::step(cfg, out.session, t, i++);
        if (!o.ok) {
            out.stepped_all = false;
            break;
        }
        red.push(o.label, i - 1);
    }
    out.merged = red.sequence().labels;
    out.ids = red.ids();
    out.statements = rpg::all_statements(cfg, out.session);
    out.accepted = out.stepped_all && rpg::is_accepting(cfg, out.session);
    return out;
}

inline std::vector<std::string> label_displays(const rpg::PdaConfig& cfg,
                                               const std::vector<rpg::ReductionLabel>& labels) {
    std::vector<std::string> out;
    for (const auto& l : labels) out.push_back(cfg.label_display(l));
    return out;
}

// Independent repetition finder: direct triple scan over (start, period),
// extending each candidate run element by element.  Used as the oracle for
// the suffix-array implementation; shares only the output type with it.
inline std::vector<rpg::RepetitionPattern> brute_force_repetitions(const std::vector<int>& seq,
                                                                   size_t min_count = 2) {
    const size_t n = seq.size();
    std::vector<rpg::RepetitionPattern> out;
    for (size_t d = 1; d * 2 <= n; ++d) {
        for (size_t s = 0; s + 2 * d <= n; ++s) {
            if (s > 0 && s + d - 1 < n && seq[s - 1] == seq[s - 1 + d]) continue; // not left-maximal
            size_t e = s + d;
            while (e < n && seq[e] == seq[e - d]) ++e;
            if (e - s < 2 * d) continue;
            // primitive block check
            bool primitive = true;
            for (size_t dd = 1; dd < d && primitive; ++dd) {
                if (d % dd != 0) continue;
                bool periodic = true;
                for (size_t i = s + dd; i < s + d && periodic; ++i)
                    if (seq[i] != seq[i - dd]) periodic = false;
                if (periodic) primitive = false;
            }
            if (!primitive) continue;
            size_t count = (e - s) / d;
            if (count < min_count) continue;
            rpg::RepetitionPattern p;
            p.start = s;
            p.period = d;
            p.count = count;
            p.block.assign(seq.begin() + s, seq.begin() + s + d);
            p.trailing = e == n;
            out.push_back(std::move(p));
        }
    }
    return out;
}

inline std::vector<int> random_sequence(std::mt19937_64& rng, size_t max_len, int alphabet) {
    std::uniform_int_distribution<size_t> len_d(0, max_len);
    std::uniform_int_distribution<int> sym_d(0, alphabet - 1);
    std::vector<int> seq(len_d(rng));
    for (int& x : seq) x = sym_d(rng);
    return seq;
}

} // namespace rpgtest
