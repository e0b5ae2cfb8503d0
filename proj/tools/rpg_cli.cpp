// Command-line front end: reduce, detect, metrics, simulate.
//
// Exit codes: 0 success / nothing found, 1 repetitions found (detect),
// 2 parse failure, 64 usage error.

#include <cstdio>
#include <cstdlib>
#include <fcntl.h>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpg/baselines.hpp"
#include "rpg/harness.hpp"
#include "rpg/metrics.hpp"

using nlohmann::json;

namespace {

constexpr int kExitFound = 1;
constexpr int kExitParse = 2;
constexpr int kExitUsage = 64;

struct GlobalOpts {
    std::string grammar;
    std::string start = "file_input";
    double lambda = 0.9;
    size_t min_count = 2;
    size_t n = 4;
    std::string sampler;
    size_t budget = 1024;
    uint64_t seed = 0;
    std::string out;
    std::string format = "table";
    std::string model_cmd;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

rpg::PdaConfig load_config(const GlobalOpts& g) {
    std::string path = g.grammar;
    if (path.empty())
        if (const char* env = std::getenv("RPG_GRAMMAR")) path = env;
    if (path.empty()) throw std::invalid_argument("no grammar: use --grammar or RPG_GRAMMAR");
    return rpg::build_pda(rpg::parse_grammar(read_file(path), g.start));
}

// Reduces a whole source text; returns nullopt plus an error position when a
// terminal is grammatically impossible.
struct Reduction {
    rpg::ReducedSequence merged;
    std::vector<int> ids;
    std::vector<rpg::StatementInstance> statements;
    bool accepted = false;
    std::optional<size_t> reject_offset; // byte offset of the offending terminal
};

Reduction reduce_text(const rpg::PdaConfig& cfg, const std::string& text) {
    Reduction out;
    std::vector<rpg::Terminal> terms = rpg::lex(text, cfg.lex_vocab);
    rpg::PdaSession session = rpg::PdaSession::start(cfg);
    rpg::Reducer reducer;
    size_t idx = 0;
    for (const rpg::Terminal& t : terms) {
        rpg::StepOutcome o = rpg::step(cfg, session, t, idx);
        if (!o.ok) {
            out.reject_offset = t.begin;
            break;
        }
        reducer.push(o.label, idx);
        ++idx;
    }
    out.merged = reducer.sequence();
    out.ids = reducer.ids();
    out.statements = rpg::all_statements(cfg, session);
    out.accepted = !out.reject_offset && rpg::is_accepting(cfg, session);
    return out;
}

void print_reduction(const rpg::PdaConfig& cfg, const Reduction& r, const std::string& format,
                     std::ostream& os) {
    if (format == "structured") {
        json j;
        j["accepted"] = r.accepted;
        if (r.reject_offset) j["reject_offset"] = *r.reject_offset;
        json labels = json::array();
        for (size_t i = 0; i < r.merged.labels.size(); ++i)
            labels.push_back({{"display", cfg.label_display(r.merged.labels[i])},
                              {"first", r.merged.origins[i].first},
                              {"last", r.merged.origins[i].second}});
        j["labels"] = labels;
        os << j.dump(2) << "\n";
        return;
    }
    for (size_t i = 0; i < r.merged.labels.size(); ++i)
        os << cfg.label_display(r.merged.labels[i]) << "\t" << r.merged.origins[i].first << ".."
           << r.merged.origins[i].second << "\n";
}

int cmd_reduce(const GlobalOpts& g, const std::string& file) {
    rpg::PdaConfig cfg = load_config(g);
    Reduction r = reduce_text(cfg, read_file(file));
    print_reduction(cfg, r, g.format, std::cout);
    if (r.reject_offset) {
        std::cerr << "rejected at byte offset " << *r.reject_offset << "\n";
        return kExitParse;
    }
    return r.accepted ? 0 : kExitParse;
}

int cmd_detect(const GlobalOpts& g, const std::string& file) {
    rpg::PdaConfig cfg = load_config(g);
    Reduction r = reduce_text(cfg, read_file(file));
    if (r.reject_offset) {
        std::cerr << "rejected at byte offset " << *r.reject_offset << "\n";
        return kExitParse;
    }
    auto patterns = rpg::find_consecutive_repetitions(r.ids, g.min_count);
    if (g.format == "structured") {
        json arr = json::array();
        for (const auto& p : patterns) {
            json jp = {{"start", p.start}, {"period", p.period}, {"count", p.count},
                       {"trailing", p.trailing}};
            json disp = json::array();
            for (size_t i = p.start; i < p.start + p.period; ++i)
                disp.push_back(cfg.label_display(r.merged.labels[i]));
            jp["labels"] = disp;
            arr.push_back(jp);
        }
        std::cout << arr.dump(2) << "\n";
    } else {
        for (const auto& p : patterns) {
            std::cout << "start=" << p.start << " period=" << p.period << " count=" << p.count
                      << " trailing=" << (p.trailing ? "yes" : "no") << " labels=[";
            for (size_t i = p.start; i < p.start + p.period; ++i)
                std::cout << (i > p.start ? " " : "") << cfg.label_display(r.merged.labels[i]);
            std::cout << "]\n";
        }
    }
    return patterns.empty() ? 0 : kExitFound;
}

int cmd_metrics(const GlobalOpts& g, const std::string& corpus_path) {
    rpg::PdaConfig cfg = load_config(g);
    auto corpus = rpg::load_corpus(corpus_path);
    if (corpus.empty()) {
        std::cerr << "empty corpus\n";
        return kExitUsage;
    }
    std::vector<rpg::GenerationResult> results;
    json per_sample = json::array();
    for (const auto& rec : corpus) {
        auto t0 = std::chrono::steady_clock::now();
        Reduction r = reduce_text(cfg, rec.prompt_text);
        rpg::GenerationResult gr;
        gr.accepted = r.accepted;
        gr.ended_with_eos = true; // corpus texts are complete by construction
        gr.merged = r.merged;
        gr.statements = r.statements;
        gr.tokens.resize(r.merged.origins.empty() ? 0 : r.merged.origins.back().second + 1);
        gr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        per_sample.push_back({{"id", rec.id},
                              {"accepted", gr.accepted},
                              {"tr_n", rpg::tr_n(gr.merged, g.n)},
                              {"tr_s", rpg::tr_s(gr.statements)}});
        results.push_back(std::move(gr));
    }
    rpg::MetricReport rep = rpg::metric_report(results, g.n);
    if (g.format == "structured") {
        json j = {{"samples", per_sample},
                  {"aggregate",
                   {{"egp", rep.egp}, {"tr_n", rep.tr_n}, {"n", rep.n}, {"tr_s", rep.tr_s},
                    {"ccp", rep.ccp}, {"gen_len_mean", rep.gen_len_mean},
                    {"wall_time_mean_seconds", rep.wall_time_mean_seconds},
                    {"sample_count", rep.sample_count}}}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << std::left << std::setw(10) << "samples" << std::setw(10) << "CCP"
                  << std::setw(10) << "TR-N" << std::setw(10) << "TR-S" << "\n";
        std::cout << std::left << std::setw(10) << rep.sample_count << std::setw(10) << rep.ccp
                  << std::setw(10) << rep.tr_n << std::setw(10) << rep.tr_s << "\n";
    }
    return 0;
}

// Out-of-process model speaking line-delimited JSON over stdin/stdout:
// request {"history": [...]}, response {"probabilities": {"id": p, ...},
// "eos_id": k}.
class PipeModel : public rpg::Model {
public:
    explicit PipeModel(const std::string& command) {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw std::runtime_error("pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw std::runtime_error("fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        out_ = fdopen(to_child[1], "w");
        in_ = fdopen(from_child[0], "r");
        if (!out_ || !in_) throw std::runtime_error("fdopen failed");
    }

    ~PipeModel() override {
        if (out_) fclose(out_);
        if (in_) fclose(in_);
        if (pid_ > 0) waitpid(pid_, nullptr, 0);
    }

    rpg::ScoredVocab score(const std::vector<int>& history) override {
        json req = {{"history", history}};
        std::string line = req.dump();
        fputs(line.c_str(), out_);
        fputc('\n', out_);
        fflush(out_);
        char buf[1 << 16];
        if (!fgets(buf, sizeof buf, in_)) throw std::runtime_error("model pipe closed");
        json resp = json::parse(buf);
        rpg::ScoredVocab sv;
        sv.eos_id = resp.value("eos_id", 0);
        for (auto& [key, value] : resp.at("probabilities").items())
            sv.entries[std::stoi(key)] = value.get<double>();
        return sv;
    }

private:
    pid_t pid_ = -1;
    FILE* out_ = nullptr;
    FILE* in_ = nullptr;
};

json report_json(const rpg::MetricReport& rep) {
    return {{"egp", rep.egp},       {"tr_n", rep.tr_n},
            {"n", rep.n},           {"tr_s", rep.tr_s},
            {"ccp", rep.ccp},       {"gen_len_mean", rep.gen_len_mean},
            {"wall_time_mean_seconds", rep.wall_time_mean_seconds},
            {"sample_count", rep.sample_count}};
}

void print_report_table(const std::vector<std::pair<std::string, rpg::MetricReport>>& rows,
                        std::ostream& os) {
    os << std::left << std::setw(18) << "sampler" << std::right << std::setw(8) << "EGP"
       << std::setw(8) << "TR-N" << std::setw(8) << "TR-S" << std::setw(8) << "CCP"
       << std::setw(12) << "Time(s)" << std::setw(10) << "GenLen" << "\n";
    for (const auto& [name, r] : rows) {
        os << std::left << std::setw(18) << name << std::right << std::fixed
           << std::setprecision(3) << std::setw(8) << r.egp << std::setw(8) << r.tr_n
           << std::setw(8) << r.tr_s << std::setw(8) << r.ccp << std::setw(12) << std::setprecision(5)
           << r.wall_time_mean_seconds << std::setprecision(1) << std::setw(10) << r.gen_len_mean
           << "\n";
        os.unsetf(std::ios::fixed);
    }
}

int cmd_simulate(const GlobalOpts& g, const std::string& scenario_path) {
    rpg::PdaConfig cfg = load_config(g);
    json sj;
    try {
        // bare built-in scenario names work without a JSON file
        rpg::make_scenario_by_name(scenario_path);
        sj = json{{"base", scenario_path}};
    } catch (const std::invalid_argument&) {
        sj = json::parse(read_file(scenario_path));
    }

    rpg::Scenario sc;
    if (sj.contains("base")) sc = rpg::make_scenario_by_name(sj["base"].get<std::string>());
    sc.name = sj.value("name", sc.name);
    if (sj.contains("vocab")) {
        sc.vocab.texts = sj["vocab"].get<std::vector<std::string>>();
        sc.vocab.eos_id = sj.value("eos_id", 0);
    }
    if (sj.contains("prompt")) sc.prompt = sj["prompt"].get<std::vector<int>>();
    if (sj.contains("budget")) sc.budget = sj["budget"].get<size_t>();
    else sc.budget = g.budget;
    if (sj.contains("seeds")) sc.seeds = sj["seeds"].get<std::vector<uint64_t>>();
    if (sj.contains("samplers")) {
        sc.samplers.clear();
        for (const auto& s : sj["samplers"])
            sc.samplers.push_back(rpg::SamplerConfig::parse(s.get<std::string>()));
    }
    if (!g.sampler.empty()) sc.samplers = {rpg::SamplerConfig::parse(g.sampler)};
    std::string model_cmd = g.model_cmd.empty() ? sj.value("model_cmd", "") : g.model_cmd;
    if (!model_cmd.empty()) sc.model = std::make_shared<PipeModel>(model_cmd);
    if (!sc.model) throw std::runtime_error("scenario needs a base model or model_cmd");

    std::string out_dir = g.out;
    if (out_dir.empty())
        if (const char* env = std::getenv("RPG_OUT")) out_dir = env;

    std::vector<std::pair<std::string, rpg::MetricReport>> rows;
    json traces = json::array();
    if (sj.contains("lambdas")) {
        auto sweep = rpg::lambda_sweep(sc, cfg, sj["lambdas"].get<std::vector<double>>());
        for (const auto& row : sweep)
            rows.emplace_back("rpg:" + std::to_string(row.lambda), row.report);
    } else {
        for (const auto& outcome : rpg::run_scenario(sc, cfg)) {
            rows.emplace_back(outcome.sampler.display(), outcome.report);
            for (size_t i = 0; i < outcome.runs.size(); ++i) {
                const auto& run = outcome.runs[i];
                json tr = json::array();
                for (const auto& t : run.trace)
                    tr.push_back({{"count", t.count}, {"pn", t.pn}, {"flipped", t.flipped}});
                traces.push_back({{"sampler", outcome.sampler.display()},
                                  {"seed", sc.seeds[i]},
                                  {"ended_with_eos", run.ended_with_eos},
                                  {"accepted", run.accepted},
                                  {"gen_len", run.tokens.size()},
                                  {"trace", tr}});
            }
        }
    }

    if (g.format == "structured") {
        json j = json::array();
        for (const auto& [name, r] : rows) j.push_back({{"sampler", name}, {"report", report_json(r)}});
        std::cout << j.dump(2) << "\n";
    } else {
        print_report_table(rows, std::cout);
    }
    if (!out_dir.empty()) {
        std::ofstream tf(out_dir + "/traces.json");
        tf << traces.dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grammar-based structural repetition detection and penalized decoding"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--grammar", g.grammar, "Grammar file (or RPG_GRAMMAR)");
    app.add_option("--start", g.start, "Start nonterminal");
    app.add_option("--lambda", g.lambda, "Penalty decay factor");
    app.add_option("--min-count", g.min_count, "Repetitions before penalizing");
    app.add_option("--n", g.n, "Gram size for TR-N");
    app.add_option("--sampler", g.sampler, "Sampler spec, e.g. greedy, temp:0.8, rpg:0.9");
    app.add_option("--budget", g.budget, "Max generated tokens");
    app.add_option("--seed", g.seed, "Base RNG seed");
    app.add_option("--out", g.out, "Output directory for traces (or RPG_OUT)");
    app.add_option("--format", g.format, "table | structured")
        ->check(CLI::IsMember({"table", "structured"}));
    app.add_option("--model-cmd", g.model_cmd, "External model command (JSONL pipe)");

    std::string file;
    auto* reduce = app.add_subcommand("reduce", "Print the merged grammar-label trace of a file");
    reduce->add_option("file", file)->required();
    auto* detect = app.add_subcommand("detect", "Report consecutive structural repetitions");
    detect->add_option("file", file)->required();
    auto* metrics = app.add_subcommand("metrics", "Metric report over a JSONL corpus");
    metrics->add_option("corpus", file)->required();
    auto* simulate = app.add_subcommand("simulate", "Run a mock-model scenario comparison");
    simulate->add_option("scenario", file)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (reduce->parsed()) return cmd_reduce(g, file);
        if (detect->parsed()) return cmd_detect(g, file);
        if (metrics->parsed()) return cmd_metrics(g, file);
        if (simulate->parsed()) return cmd_simulate(g, file);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitUsage;
}
