// greennas command-line driver. Exit codes: 0 ok, 1 usage, 2 resource gate,
// 3 I/O, 4 data, 5 search, 6 analysis.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "greennas/benchstore.hpp"
#include "greennas/cellspace.hpp"
#include "greennas/error.hpp"
#include "greennas/mocore.hpp"
#include "greennas/search.hpp"
#include "greennas/surrogate.hpp"

namespace fs = std::filesystem;
using greennas::Errc;
using greennas::Error;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kResource = 2, kIo = 3, kData = 4, kSearch = 5, kAnalysis = 6 };

// Failure while running a command; `code` is the process exit status.
struct CommandFailure {
    int code;
    std::string message;
};

int exit_code_for(Errc code, int stage_default)
{
    switch (code) {
    case Errc::ResourceLimit: return kResource;
    case Errc::Io: return kIo;
    case Errc::InvalidArgument: return kUsage;
    default: return stage_default;
    }
}

// Runs `fn`, translating library errors into a CommandFailure whose exit
// code is `stage_default` unless the error class has a fixed code.
template <class Fn>
auto stage(int stage_default, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const Error& e) {
        throw CommandFailure{exit_code_for(e.code(), stage_default), e.what()};
    } catch (const nlohmann::json::exception& e) {
        throw CommandFailure{kData, e.what()};
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CommandFailure{kIo, "cannot write " + path.string()};
    }
    out << text;
    if (!out.flush()) {
        throw CommandFailure{kIo, "write failed for " + path.string()};
    }
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

fs::path meta_path(const fs::path& file) { return fs::path(file.string() + ".meta.json"); }

// Tool version, the full flag set (given or defaulted) and the seed.
ojson make_meta(const CLI::App& sub, std::optional<std::uint64_t> seed)
{
    ojson flags = ojson::object();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_name();
        if (name == "--help" || name.empty()) {
            continue;
        }
        const std::string key = opt->get_single_name();
        if (opt->get_expected_min() == 0) {
            flags[key] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto& results = opt->results();
            std::string joined;
            for (std::size_t i = 0; i < results.size(); ++i) {
                joined += (i ? "," : "") + results[i];
            }
            flags[key] = joined;
        } else {
            flags[key] = opt->get_default_str();
        }
    }
    ojson meta;
    meta["tool"] = "greennas";
    meta["version"] = GREENNAS_VERSION;
    meta["command"] = sub.get_name();
    meta["flags"] = std::move(flags);
    meta["seed"] = seed ? ojson(*seed) : ojson(nullptr);
    return meta;
}

std::string num(double v) { return greennas::format_number(v); }

greennas::BenchmarkTable load(const std::string& path)
{
    return stage(kData, [&] { return greennas::load_table(path); });
}

// ---------------------------------------------------------------- enumerate

struct EnumerateArgs {
    int vertices = 0;
    int max_edges = greennas::kDefaultMaxEdges;
    std::string out;
    bool allow_long_run = false;
};

int run_enumerate(const CLI::App& sub, const EnumerateArgs& a)
{
    const auto specs = stage(kResource, [&] {
        greennas::SpaceConstraints space{a.vertices, a.max_edges};
        greennas::EnumerateOptions opts;
        opts.allow_long_run = a.allow_long_run;
        return greennas::enumerate_space(space, opts);
    });
    if (!a.out.empty()) {
        std::string text;
        for (const auto& s : specs) {
            text += greennas::to_json(s).dump() + "\n";
        }
        write_text(a.out, text);
        write_json(meta_path(a.out), make_meta(sub, std::nullopt));
    }
    std::cout << specs.size() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    int vertices = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int run_synth(const CLI::App& sub, const SynthArgs& a)
{
    const auto table = stage(kData, [&] {
        return greennas::synth_generate({a.vertices, greennas::kDefaultMaxEdges}, a.seed);
    });
    stage(kIo, [&] { greennas::save_table(table, a.out); });
    write_json(meta_path(a.out), make_meta(sub, a.seed));
    std::cout << table.size() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- train-surrogate

struct TrainArgs {
    std::string table;
    int budget = 4;
    std::uint64_t seed = 0;
    std::string out;
    std::string report;
    int epochs = 200;
    int batch_size = 64;
    double learning_rate = 5e-3;
};

int run_train(const CLI::App& sub, const TrainArgs& a)
{
    const auto table = load(a.table);
    greennas::TrainConfig config;
    config.seed = a.seed;
    config.epochs = a.epochs;
    config.batch_size = a.batch_size;
    config.learning_rate = a.learning_rate;
    const auto result = stage(kData, [&] { return greennas::train(table, a.budget, config); });
    stage(kIo, [&] { greennas::save_model(result.model, a.out); });
    write_json(meta_path(a.out), make_meta(sub, a.seed));

    const auto& r = result.report;
    ojson report;
    report["meta"] = make_meta(sub, a.seed);
    report["target_budget"] = r.target_budget;
    report["split"] = {{"train", r.split.train}, {"validation", r.split.validation}, {"test", r.split.test}};
    report["pearson_r"] = r.test_pearson_r;
    report["mae_kwh"] = r.test_mae_kwh;
    report["baseline_mae_kwh"] = r.baseline_test_mae_kwh;
    report["best_epoch"] = r.best_epoch;
    report["best_validation_loss"] = r.best_validation_loss;
    report["final_train_loss"] = r.final_train_loss;
    report["baseline_train_loss"] = r.baseline_train_loss;
    if (!a.report.empty()) {
        write_json(a.report, report);
    }
    std::cout << "pearson_r=" << num(r.test_pearson_r) << " mae_kwh=" << num(r.test_mae_kwh)
              << " baseline_mae_kwh=" << num(r.baseline_test_mae_kwh) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- search

struct SearchArgs {
    std::string algo = "semoa";
    std::string table;
    std::string surrogate;
    int iterations = 100;
    int population = 10;
    std::vector<int> budgets = {4, 12, 36, 108};
    int trials = 10;
    std::uint64_t seed = 0;
    std::string out_dir;
    int queries = 1000;
    double eta_plus = 2.0;
    std::optional<double> p_edge;
    std::optional<double> p_node;
};

std::string trial_dir_name(std::size_t i, std::size_t total)
{
    std::ostringstream os;
    const int width = static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size());
    os << "trial_" << std::setw(std::max(width, 2)) << std::setfill('0') << i;
    return os.str();
}

std::string table1_line(const char* label, const greennas::SummaryStats& s)
{
    auto ms = [](const greennas::MeanStd& m) { return num(m.mean) + " +- " + num(m.std); };
    return std::string(label) + ": T=" + ms(s.training_time_s) + " s, P_v=" + ms(s.validation_accuracy) +
           ", E=" + ms(s.energy_kwh) + " kWh, params=" + ms(s.trainable_parameters);
}

int run_search(const CLI::App& sub, const SearchArgs& a)
{
    const auto algorithm = stage(kUsage, [&] { return greennas::algorithm_from_string(a.algo); });
    const auto table = load(a.table);
    std::optional<greennas::MLPModel> model;
    if (!a.surrogate.empty()) {
        model = stage(kData, [&] { return greennas::load_model(a.surrogate); });
    }

    greennas::SearchConfig config;
    config.iterations = a.iterations;
    config.lambda = a.population;
    config.budgets = a.budgets;
    config.seed = a.seed;
    config.num_queries = a.queries;
    config.eta_plus = a.eta_plus;
    config.p_edge = a.p_edge;
    config.p_node = a.p_node;
    stage(kUsage, [&] { greennas::check_config(config); });

    std::unique_ptr<greennas::EvalOracle> oracle;
    if (model) {
        oracle = stage(kData, [&] { return std::make_unique<greennas::SurrogateOracle>(table, *model); });
    } else {
        oracle = std::make_unique<greennas::TableOracle>(table);
    }
    const auto report = stage(kSearch, [&] { return greennas::run_trials(config, *oracle, a.trials, algorithm); });

    const ojson meta = make_meta(sub, a.seed);
    const ojson config_echo = greennas::config_json(config, oracle->constraints());
    const fs::path root(a.out_dir);
    std::vector<greennas::ObjectivePoint> pooled;
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        if (!report.runs[i]) {
            continue;
        }
        const auto& run = *report.runs[i];
        const fs::path dir = root / trial_dir_name(i, report.runs.size());
        ojson j;
        j["meta"] = meta;
        j["trial"] = i;
        const ojson body = greennas::run_result_json(run, config_echo);
        for (const auto& [k, v] : body.items()) {
            j[k] = v;
        }
        write_json(dir / "run_result.json", j);
        write_text(dir / "front.csv", greennas::front_csv(run.archive));
        write_json(meta_path(dir / "front.csv"), meta);

        std::vector<double> grid;
        for (const auto& p : run.archive) {
            grid.push_back(p.values[0]);
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        if (!grid.empty()) {
            const std::vector<greennas::ParetoArchive> one{run.archive};
            write_text(dir / "attainment.csv", greennas::attainment_csv(greennas::attainment(one, grid)));
            write_json(meta_path(dir / "attainment.csv"), meta);
        }
        pooled.insert(pooled.end(), run.archive.begin(), run.archive.end());
    }

    ojson summary;
    summary["meta"] = meta;
    const ojson body = greennas::trials_report_json(report, config_echo);
    for (const auto& [k, v] : body.items()) {
        summary[k] = v;
    }
    write_json(root / "run_result.json", summary);

    auto front = greennas::ndom(pooled);
    std::sort(front.begin(), front.end(), [](const auto& x, const auto& y) {
        return x.values != y.values ? x.values < y.values : x.payload < y.payload;
    });
    front.erase(std::unique(front.begin(), front.end()), front.end());
    write_text(root / "front.csv", greennas::front_csv(front));
    write_json(meta_path(root / "front.csv"), meta);
    write_text(root / "attainment.csv", greennas::attainment_csv(report.attainment));
    write_json(meta_path(root / "attainment.csv"), meta);

    std::cout << "algorithm=" << greennas::to_string(algorithm) << " trials=" << report.runs.size()
              << " failed=" << report.failed_trials.size() << "\n"
              << "final_hypervolume=" << num(report.final_hypervolume.mean) << " +- "
              << num(report.final_hypervolume.std) << "\n"
              << table1_line("r0", report.energy_extreme) << "\n"
              << table1_line("r1", report.accuracy_extreme) << "\n"
              << table1_line("rk", report.knee) << "\n";
    if (report.failed_trials.size() == report.runs.size()) {
        throw CommandFailure{kSearch, "all trials failed: " + report.failure_messages.front()};
    }
    return kOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string table;
    std::string mode;
    std::string other;
    int budget = 108;
    std::string out;
};

int run_analyze(const CLI::App& sub, const AnalyzeArgs& a)
{
    const auto table = load(a.table);
    std::string csv;
    if (a.mode == "opswap") {
        const auto rows = stage(kAnalysis, [&] { return greennas::opswap_analysis(table, a.budget); });
        csv = "from,to,pairs,delta_validation_accuracy,pct_energy,pct_time,pct_parameters\n";
        for (const auto& r : rows) {
            csv += std::string(greennas::to_string(r.from)) + "," + std::string(greennas::to_string(r.to)) + "," +
                   std::to_string(r.pairs) + "," + num(r.delta_validation_accuracy) + "," + num(r.pct_energy) + "," +
                   num(r.pct_time) + "," + num(r.pct_parameters) + "\n";
        }
    } else if (a.mode == "size-stats") {
        const auto rows = stage(kAnalysis, [&] { return greennas::size_stats(table, a.budget); });
        csv = "vertices,count,with_budget,energy_kwh_mean,energy_kwh_std,training_time_s_mean,training_time_s_std,"
              "validation_accuracy_mean,validation_accuracy_std,trainable_parameters_mean,"
              "trainable_parameters_std\n";
        for (const auto& g : rows) {
            csv += std::to_string(g.vertices) + "," + std::to_string(g.count) + "," + std::to_string(g.with_budget) +
                   "," + num(g.energy_kwh.mean) + "," + num(g.energy_kwh.std) + "," + num(g.training_time_s.mean) +
                   "," + num(g.training_time_s.std) + "," + num(g.validation_accuracy.mean) + "," +
                   num(g.validation_accuracy.std) + "," + num(g.trainable_parameters.mean) + "," +
                   num(g.trainable_parameters.std) + "\n";
        }
    } else if (a.mode == "rank-corr") {
        if (a.other.empty()) {
            throw CommandFailure{kUsage, "--mode rank-corr requires --other"};
        }
        const auto other = load(a.other);
        const auto rows = stage(kAnalysis, [&] { return greennas::compare_tables(table, other, a.budget); });
        csv = "metric,matched,rho\n";
        for (const auto& r : rows) {
            csv += r.metric + "," + std::to_string(r.matched) + "," + num(r.rho) + "\n";
        }
    } else {
        throw CommandFailure{kUsage, "unknown mode '" + a.mode + "'"};
    }
    write_text(a.out, csv);
    write_json(meta_path(a.out), make_meta(sub, std::nullopt));
    std::cout << csv;
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy-aware neural architecture search toolkit"};
    app.set_version_flag("--version", std::string(GREENNAS_VERSION));
    app.require_subcommand(1);

    EnumerateArgs ea;
    auto* en = app.add_subcommand("enumerate", "Enumerate unique cells of a bounded space");
    en->add_option("--vertices", ea.vertices, "Maximum vertex count")->required()->check(CLI::Range(2, 7));
    en->add_option("--max-edges", ea.max_edges, "Maximum edge count")->capture_default_str()->check(CLI::Range(0, 21));
    en->add_option("--out", ea.out, "Output JSONL of specs");
    en->add_flag("--allow-long-run", ea.allow_long_run, "Permit 7-vertex enumeration");

    SynthArgs sa;
    auto* sy = app.add_subcommand("synth", "Generate a deterministic synthetic benchmark table");
    sy->add_option("--vertices", sa.vertices, "Maximum vertex count")->required()->check(CLI::Range(2, 7));
    sy->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
    sy->add_option("--out", sa.out, "Output JSONL table")->required();

    TrainArgs ta;
    auto* tr = app.add_subcommand("train-surrogate", "Train the energy surrogate");
    tr->add_option("--table", ta.table, "Input JSONL table")->required();
    tr->add_option("--budget", ta.budget, "Epoch budget of the targets")->capture_default_str();
    tr->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
    tr->add_option("--out", ta.out, "Checkpoint path")->required();
    tr->add_option("--report", ta.report, "Report JSON path");
    tr->add_option("--epochs", ta.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
    tr->add_option("--batch-size", ta.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    tr->add_option("--learning-rate", ta.learning_rate, "Adam step size")->capture_default_str();

    SearchArgs sr;
    auto* se = app.add_subcommand("search", "Run architecture search trials");
    se->add_option("--algo", sr.algo, "semoa | random | soo")
        ->capture_default_str()
        ->check(CLI::IsMember({"semoa", "random", "soo"}));
    se->add_option("--table", sr.table, "Input JSONL table")->required();
    se->add_option("--surrogate", sr.surrogate, "Surrogate checkpoint for energy");
    se->add_option("--iterations", sr.iterations, "SEMOA iterations")->capture_default_str();
    se->add_option("--population", sr.population, "Offspring per iteration (lambda)")->capture_default_str();
    se->add_option("--budgets", sr.budgets, "Epoch budgets")->delimiter(',')->capture_default_str();
    se->add_option("--trials", sr.trials, "Independent trials")->capture_default_str()->check(CLI::PositiveNumber);
    se->add_option("--seed", sr.seed, "Master seed")->capture_default_str();
    se->add_option("--out-dir", sr.out_dir, "Output directory")->required();
    se->add_option("--queries", sr.queries, "Random/SOO query budget")->capture_default_str();
    se->add_option("--eta-plus", sr.eta_plus, "Linear ranking slope")->capture_default_str();
    se->add_option("--p-edge", sr.p_edge, "Edge flip probability");
    se->add_option("--p-node", sr.p_node, "Label change probability");

    AnalyzeArgs aa;
    auto* an = app.add_subcommand("analyze", "Table analyses as CSV");
    an->add_option("--table", aa.table, "Input JSONL table")->required();
    an->add_option("--mode", aa.mode, "opswap | size-stats | rank-corr")
        ->required()
        ->check(CLI::IsMember({"opswap", "size-stats", "rank-corr"}));
    an->add_option("--other", aa.other, "Second table for rank-corr");
    an->add_option("--budget", aa.budget, "Epoch budget")->capture_default_str();
    an->add_option("--out", aa.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (en->parsed()) {
            return run_enumerate(*en, ea);
        }
        if (sy->parsed()) {
            return run_synth(*sy, sa);
        }
        if (tr->parsed()) {
            return run_train(*tr, ta);
        }
        if (se->parsed()) {
            return run_search(*se, sr);
        }
        if (an->parsed()) {
            return run_analyze(*an, aa);
        }
    } catch (const CommandFailure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code(), kData);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
