#include "greennas/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <thread>

#include "greennas/error.hpp"
#include "greennas/hashing.hpp"

namespace greennas {

namespace {

using ojson = nlohmann::ordered_json;

int slot_count(int n) { return n * (n - 1) / 2; }

MeanStd mean_std(const std::vector<double>& xs)
{
    MeanStd out;
    if (xs.empty()) {
        out.mean = std::numeric_limits<double>::quiet_NaN();
        out.std = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - out.mean) * (x - out.mean);
        }
        out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

bool point_less(const ObjectivePoint& a, const ObjectivePoint& b)
{
    if (a.values != b.values) {
        return a.values < b.values;
    }
    return a.payload < b.payload;
}

// Bookkeeping shared by the search loops.
class RunState {
public:
    RunState(const SearchConfig& config, const EvalOracle& oracle)
        : config_(config), oracle_(oracle)
    {
    }

    std::vector<ObjectivePoint> evaluate_all(const CellSpec& spec)
    {
        const CanonicalKey key = canonical_key(spec);
        result.specs.try_emplace(key, spec);
        std::vector<ObjectivePoint> out;
        out.reserve(config_.budgets.size());
        for (int b : config_.budgets) {
            Evaluation e = oracle_.evaluate(spec, b);
            ++result.query_count;
            out.push_back(e.point);
            evals_.try_emplace(e.point.payload, std::move(e));
        }
        return out;
    }

    // P <- ndom(P u O); payloads already present are not added twice.
    void merge(std::span<const ObjectivePoint> offspring)
    {
        std::set<Payload> seen;
        for (const auto& p : archive) {
            seen.insert(p.payload);
        }
        std::vector<ObjectivePoint> combined = archive;
        for (const auto& o : offspring) {
            if (seen.insert(o.payload).second) {
                combined.push_back(o);
            }
        }
        archive = ndom(combined);
        std::sort(archive.begin(), archive.end(), point_less);
    }

    const CellSpec& genotype(const CanonicalKey& key) const { return result.specs.at(key); }

    ArchSummary summary(const ObjectivePoint& p) const
    {
        const Evaluation& e = evals_.at(p.payload);
        ArchSummary s;
        s.payload = p.payload;
        s.spec = result.specs.at(p.payload.key);
        s.training_time_s = e.metrics.training_time_s;
        s.validation_accuracy = e.metrics.validation_accuracy;
        s.energy_kwh = e.metrics.energy_kwh;
        s.trainable_parameters = e.trainable_parameters;
        return s;
    }

    RunResult finish()
    {
        result.archive = archive;
        if (!archive.empty()) {
            result.energy_extreme = summary(archive[extreme_index(archive, 1)]);
            result.accuracy_extreme = summary(archive[extreme_index(archive, 0)]);
            result.knee = summary(archive[knee_point(archive)]);
        }
        std::set<CanonicalKey> keep;
        for (const auto& p : archive) {
            keep.insert(p.payload.key);
        }
        std::erase_if(result.specs, [&](const auto& kv) { return !keep.contains(kv.first); });
        return std::move(result);
    }

    ParetoArchive archive;
    RunResult result;

private:
    const SearchConfig& config_;
    const EvalOracle& oracle_;
    std::map<Payload, Evaluation> evals_;
};

// Parent keys: both extremes, then lambda - 2 rank-proportional draws over
// unique architectures scored by their best contribution.
std::vector<CanonicalKey> select_parents(const ParetoArchive& archive, int lambda, const ReferencePoint& ref,
                                         double eta_plus, std::mt19937_64& rng)
{
    const std::vector<double> contrib = contributions(archive, ref);
    std::map<CanonicalKey, double> best;
    for (std::size_t i = 0; i < archive.size(); ++i) {
        auto [it, inserted] = best.try_emplace(archive[i].payload.key, contrib[i]);
        if (!inserted) {
            it->second = std::max(it->second, contrib[i]);
        }
    }
    std::vector<std::pair<CanonicalKey, double>> ranked(best.begin(), best.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::vector<double> probs = linear_rank_probs(ranked.size(), eta_plus);

    std::vector<CanonicalKey> out;
    out.reserve(static_cast<std::size_t>(lambda));
    out.push_back(archive[extreme_index(archive, 0)].payload.key);
    out.push_back(archive[extreme_index(archive, 1)].payload.key);
    while (out.size() < static_cast<std::size_t>(lambda)) {
        out.push_back(ranked[sample_index(probs, rng)].first);
    }
    return out;
}

}  // namespace

double default_p_edge(int num_vertices)
{
    const int c = slot_count(num_vertices);
    return c > 0 ? std::min(1.0, 2.0 / c) : 0.0;
}

double default_p_node(int num_vertices)
{
    return num_vertices > 2 ? 1.0 / (2.0 * (num_vertices - 2)) : 0.0;
}

double resolved_p_edge(const SearchConfig& config, const SpaceConstraints& space)
{
    return config.p_edge.value_or(default_p_edge(space.max_vertices));
}

double resolved_p_node(const SearchConfig& config, const SpaceConstraints& space)
{
    return config.p_node.value_or(default_p_node(space.max_vertices));
}

void check_config(const SearchConfig& config)
{
    auto bad = [](const std::string& what) { throw Error(Errc::InvalidArgument, what); };
    if (config.iterations < 0) {
        bad("iterations must be >= 0");
    }
    if (config.lambda < 3) {
        bad("lambda must be >= 3 (both extremes plus at least one ranked draw)");
    }
    if (!(config.eta_plus >= 1.0 && config.eta_plus <= 2.0)) {
        bad("eta_plus must lie in [1, 2]");
    }
    if (config.budgets.empty()) {
        bad("at least one budget is required");
    }
    std::set<int> distinct;
    for (int b : config.budgets) {
        if (!is_budget(b)) {
            bad("unsupported budget " + std::to_string(b));
        }
        if (!distinct.insert(b).second) {
            bad("duplicate budget " + std::to_string(b));
        }
    }
    for (const auto& p : {config.p_edge, config.p_node}) {
        if (p && !(*p >= 0.0 && *p <= 1.0)) {
            bad("perturbation probabilities must lie in [0, 1]");
        }
    }
    if (config.reference && config.reference->r.size() != 2) {
        bad("reference point must be 2-D");
    }
    if (config.max_repair_attempts < 1) {
        bad("max_repair_attempts must be >= 1");
    }
    if (config.num_queries < 1) {
        bad("num_queries must be >= 1");
    }
}

ReferencePoint resolved_reference(const SearchConfig& config, const EvalOracle& oracle)
{
    if (config.reference) {
        return *config.reference;
    }
    const int top = *std::max_element(config.budgets.begin(), config.budgets.end());
    const double e = oracle.max_energy(top);
    return ReferencePoint{{1.0, e > 0.0 ? 1.1 * e : 1.0}};
}

Evaluation TableOracle::evaluate(const CellSpec& spec, int budget) const
{
    const CanonicalKey key = canonical_key(spec);
    const BudgetMetrics& m = query(table_, key, budget);
    Evaluation e;
    e.point = ObjectivePoint{{1.0 - m.validation_accuracy, m.energy_kwh}, Payload{key, budget}};
    e.metrics = m;
    e.trainable_parameters = table_.find(key)->trainable_parameters;
    return e;
}

SurrogateOracle::SurrogateOracle(const BenchmarkTable& table, MLPModel model)
    : table_(table), model_(std::move(model))
{
    for (const auto& [key, rec] : table_.records()) {
        const double e = std::max(0.0, forward(model_, featurize(canonical_form(rec.spec), rec.trainable_parameters)));
        base_energy_.emplace(key, e);
        max_base_energy_ = std::max(max_base_energy_, e);
    }
}

Evaluation SurrogateOracle::evaluate(const CellSpec& spec, int budget) const
{
    const CanonicalKey key = canonical_key(spec);
    const BudgetMetrics& m = query(table_, key, budget);
    Evaluation e;
    e.metrics = m;
    const double energy = scale_energy(base_energy_.at(key), model_.base_budget, budget);
    if (m.energy_kwh > 0.0) {
        e.metrics.co2eq_kg = m.co2eq_kg * energy / m.energy_kwh;
    }
    e.metrics.energy_kwh = energy;
    e.point = ObjectivePoint{{1.0 - m.validation_accuracy, energy}, Payload{key, budget}};
    e.trainable_parameters = table_.find(key)->trainable_parameters;
    return e;
}

double SurrogateOracle::max_energy(int budget) const
{
    return scale_energy(max_base_energy_, model_.base_budget, budget);
}

CellSpec random_valid_spec(const SpaceConstraints& space, std::mt19937_64& rng)
{
    const int n = space.max_vertices;
    if (n < 2 || n > kMaxVertices) {
        throw Error(Errc::InvalidArgument, "max_vertices must lie in [2, 7]");
    }
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<std::size_t> pick(0, kInteriorOps.size() - 1);
    for (;;) {
        CellSpec spec = make_chain(std::vector<Operation>(static_cast<std::size_t>(n - 2), Operation::Conv3x3));
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                spec.set_edge(i, j, coin(rng));
            }
        }
        for (int v = 1; v + 1 < n; ++v) {
            spec.set_op(v, kInteriorOps[pick(rng)]);
        }
        if (validate(spec, space) == ValidationResult::Ok) {
            return spec;
        }
    }
}

PassOutcome perturb_pass(const CellSpec& spec, double p_edge, double p_node, std::mt19937_64& rng)
{
    PassOutcome out{spec, 0, 0};
    const int n = spec.num_vertices();
    std::bernoulli_distribution flip(p_edge);
    std::bernoulli_distribution relabel(p_node);
    std::uniform_int_distribution<int> other(0, static_cast<int>(kInteriorOps.size()) - 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (flip(rng)) {
                out.spec.set_edge(i, j, !out.spec.has_edge(i, j));
                ++out.edge_flips;
            }
        }
    }
    for (int v = 1; v + 1 < n; ++v) {
        if (relabel(rng)) {
            std::vector<Operation> choices;
            for (Operation op : kInteriorOps) {
                if (op != spec.op(v)) {
                    choices.push_back(op);
                }
            }
            out.spec.set_op(v, choices[static_cast<std::size_t>(other(rng)) % choices.size()]);
            ++out.label_changes;
        }
    }
    return out;
}

CellSpec perturb(const CellSpec& spec, const SearchConfig& config, const SpaceConstraints& space,
                 std::mt19937_64& rng)
{
    const double pe = resolved_p_edge(config, space);
    const double pn = resolved_p_node(config, space);
    const int n = spec.num_vertices();
    if (!(pe > 0.0 && n >= 2) && !(pn > 0.0 && n > 2)) {
        throw Error(Errc::InvalidArgument, "perturbation probabilities admit no change");
    }
    CellSpec last = spec;
    for (int attempt = 0; attempt < config.max_repair_attempts; ++attempt) {
        PassOutcome pass;
        do {
            pass = perturb_pass(spec, pe, pn, rng);
        } while (pass.spec == spec);
        if (validate(pass.spec, space) == ValidationResult::Ok) {
            return pass.spec;
        }
        last = pass.spec;
    }
    // Redraws exhausted: restore the direct INPUT -> OUTPUT path on the last
    // draw. In a 2-vertex space this yields the only valid cell.
    last.set_edge(0, n - 1, true);
    if (validate(last, space) == ValidationResult::Ok) {
        return last;
    }
    throw Error(Errc::RepairExhausted,
                "no valid perturbation after " + std::to_string(config.max_repair_attempts) + " attempts");
}

std::vector<std::size_t> linear_rank_sample(std::span<const ObjectivePoint> archive, int lambda,
                                            const ReferencePoint& ref, double eta_plus, std::mt19937_64& rng)
{
    if (archive.empty()) {
        throw Error(Errc::EmptyArchive, "cannot select from an empty archive");
    }
    if (lambda < 2) {
        throw Error(Errc::InvalidArgument, "lambda must be >= 2");
    }
    const std::vector<double> contrib = contributions(archive, ref);
    std::vector<std::size_t> ranked(archive.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        ranked[i] = i;
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return contrib[a] > contrib[b]; });
    const std::vector<double> probs = linear_rank_probs(ranked.size(), eta_plus);
    std::vector<std::size_t> out{extreme_index(archive, 0), extreme_index(archive, 1)};
    while (out.size() < static_cast<std::size_t>(lambda)) {
        out.push_back(ranked[sample_index(probs, rng)]);
    }
    return out;
}

RunResult semoa_run(const SearchConfig& config, const EvalOracle& oracle)
{
    check_config(config);
    const SpaceConstraints space = oracle.constraints();
    std::mt19937_64 rng(config.seed);
    RunState state(config, oracle);
    state.result.seed = config.seed;
    state.result.reference = resolved_reference(config, oracle);
    const ReferencePoint& ref = state.result.reference;

    std::vector<ObjectivePoint> initial;
    for (int i = 0; i < config.lambda; ++i) {
        auto pts = state.evaluate_all(random_valid_spec(space, rng));
        initial.insert(initial.end(), pts.begin(), pts.end());
    }
    state.merge(initial);
    state.result.hv_history.push_back(hypervolume_2d(state.archive, ref));

    for (int it = 0; it < config.iterations; ++it) {
        const auto parents = select_parents(state.archive, config.lambda, ref, config.eta_plus, rng);
        std::vector<CellSpec> children;
        children.reserve(parents.size());
        for (const auto& key : parents) {
            children.push_back(perturb(state.genotype(key), config, space, rng));
        }
        std::vector<ObjectivePoint> offspring;
        for (const auto& child : children) {
            auto pts = state.evaluate_all(child);
            offspring.insert(offspring.end(), pts.begin(), pts.end());
        }
        state.merge(offspring);
        state.result.hv_history.push_back(hypervolume_2d(state.archive, ref));
    }
    return state.finish();
}

RunResult random_search(const SearchConfig& config, const EvalOracle& oracle, int num_queries, ObjectiveMode mode)
{
    check_config(config);
    if (num_queries < 1) {
        throw Error(Errc::InvalidArgument, "num_queries must be >= 1");
    }
    const SpaceConstraints space = oracle.constraints();
    std::mt19937_64 rng(config.seed);
    RunState state(config, oracle);
    state.result.seed = config.seed;
    state.result.reference = resolved_reference(config, oracle);

    for (int q = 0; q < num_queries; ++q) {
        const auto pts = state.evaluate_all(random_valid_spec(space, rng));
        if (mode == ObjectiveMode::Multi) {
            state.merge(pts);
        } else {
            // Incumbent: lowest 1 - P_v, then lower energy, then payload.
            for (const auto& p : pts) {
                if (state.archive.empty() || point_less(p, state.archive.front())) {
                    state.archive = {p};
                }
            }
        }
        state.result.hv_history.push_back(hypervolume_2d(state.archive, state.result.reference));
    }
    return state.finish();
}

std::string_view to_string(Algorithm algo) noexcept
{
    switch (algo) {
    case Algorithm::Semoa: return "semoa";
    case Algorithm::Random: return "random";
    case Algorithm::Soo: return "soo";
    }
    return "unknown";
}

Algorithm algorithm_from_string(std::string_view name)
{
    if (name == "semoa") {
        return Algorithm::Semoa;
    }
    if (name == "random") {
        return Algorithm::Random;
    }
    if (name == "soo") {
        return Algorithm::Soo;
    }
    throw Error(Errc::InvalidArgument, "unknown algorithm '" + std::string(name) + "'");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index)
{
    return hash_combine(master_seed, static_cast<std::uint64_t>(trial_index));
}

TrialsReport run_trials(const SearchConfig& config, const EvalOracle& oracle, int num_trials, Algorithm algorithm,
                        unsigned threads)
{
    check_config(config);
    if (num_trials < 1) {
        throw Error(Errc::InvalidArgument, "num_trials must be >= 1");
    }
    const auto n = static_cast<std::size_t>(num_trials);
    TrialsReport report;
    report.algorithm = algorithm;
    report.master_seed = config.seed;
    report.runs.resize(n);
    std::vector<std::string> errors(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.trial_seeds.push_back(trial_seed(config.seed, i));
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            SearchConfig c = config;
            c.seed = report.trial_seeds[i];
            try {
                switch (algorithm) {
                case Algorithm::Semoa: report.runs[i] = semoa_run(c, oracle); break;
                case Algorithm::Random:
                    report.runs[i] = random_search(c, oracle, c.num_queries, ObjectiveMode::Multi);
                    break;
                case Algorithm::Soo:
                    report.runs[i] = random_search(c, oracle, c.num_queries, ObjectiveMode::Single);
                    break;
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned workers =
        std::max(1U, std::min(threads == 0 ? default_thread_count() : threads, static_cast<unsigned>(n)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }

    std::vector<ParetoArchive> fronts;
    std::vector<double> grid;
    struct Columns {
        std::vector<double> t, pv, e, params;
        void add(const ArchSummary& s)
        {
            t.push_back(s.training_time_s);
            pv.push_back(s.validation_accuracy);
            e.push_back(s.energy_kwh);
            params.push_back(static_cast<double>(s.trainable_parameters));
        }
        SummaryStats stats() const { return {mean_std(t), mean_std(pv), mean_std(e), mean_std(params)}; }
    } r0, r1, rk;
    std::vector<double> hv;
    for (std::size_t i = 0; i < n; ++i) {
        if (!report.runs[i]) {
            report.failed_trials.push_back(i);
            report.failure_messages.push_back(errors[i]);
            continue;
        }
        const RunResult& run = *report.runs[i];
        fronts.push_back(run.archive);
        for (const auto& p : run.archive) {
            grid.push_back(p.values[0]);
        }
        r0.add(run.energy_extreme);
        r1.add(run.accuracy_extreme);
        rk.add(run.knee);
        hv.push_back(run.hv_history.empty() ? 0.0 : run.hv_history.back());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (!fronts.empty() && !grid.empty()) {
        report.attainment = attainment(fronts, grid);
    }
    report.energy_extreme = r0.stats();
    report.accuracy_extreme = r1.stats();
    report.knee = rk.stats();
    report.final_hypervolume = mean_std(hv);
    return report;
}

ojson summary_json(const ArchSummary& s)
{
    ojson j;
    j["key"] = s.payload.key.hex();
    j["budget"] = s.payload.budget;
    const nlohmann::json spec = to_json(s.spec);
    j["module_adjacency"] = spec.at("module_adjacency");
    j["module_operations"] = spec.at("module_operations");
    j["training_time_s"] = s.training_time_s;
    j["validation_accuracy"] = s.validation_accuracy;
    j["energy_kwh"] = s.energy_kwh;
    j["trainable_parameters"] = s.trainable_parameters;
    return j;
}

ojson config_json(const SearchConfig& config, const SpaceConstraints& space)
{
    ojson j;
    j["iterations"] = config.iterations;
    j["lambda"] = config.lambda;
    j["eta_plus"] = config.eta_plus;
    j["budgets"] = config.budgets;
    j["p_edge"] = resolved_p_edge(config, space);
    j["p_node"] = resolved_p_node(config, space);
    j["max_repair_attempts"] = config.max_repair_attempts;
    j["num_queries"] = config.num_queries;
    j["seed"] = config.seed;
    j["max_vertices"] = space.max_vertices;
    j["max_edges"] = space.max_edges;
    return j;
}

ojson run_result_json(const RunResult& result, const ojson& config)
{
    ojson j;
    j["config"] = config;
    j["seed"] = result.seed;
    j["reference"] = result.reference.r;
    j["query_count"] = result.query_count;
    j["hv_history"] = result.hv_history;
    ojson archive = ojson::array();
    for (const auto& p : result.archive) {
        archive.push_back({{"f1", p.values[0]}, {"f2", p.values[1]}, {"key", p.payload.key.hex()},
                           {"budget", p.payload.budget}});
    }
    j["archive"] = std::move(archive);
    if (!result.archive.empty()) {
        j["energy_extreme"] = summary_json(result.energy_extreme);
        j["accuracy_extreme"] = summary_json(result.accuracy_extreme);
        j["knee"] = summary_json(result.knee);
    }
    return j;
}

ojson trials_report_json(const TrialsReport& report, const ojson& config)
{
    auto ms = [](const MeanStd& m) { return ojson{{"mean", m.mean}, {"std", m.std}}; };
    auto stats = [&](const SummaryStats& s) {
        return ojson{{"training_time_s", ms(s.training_time_s)},
                     {"validation_accuracy", ms(s.validation_accuracy)},
                     {"energy_kwh", ms(s.energy_kwh)},
                     {"trainable_parameters", ms(s.trainable_parameters)}};
    };
    ojson j;
    j["config"] = config;
    j["algorithm"] = std::string(to_string(report.algorithm));
    j["master_seed"] = report.master_seed;
    j["trial_seeds"] = report.trial_seeds;
    j["trials"] = report.runs.size();
    j["failed_trials"] = report.failed_trials;
    j["failure_messages"] = report.failure_messages;
    j["final_hypervolume"] = ms(report.final_hypervolume);
    j["energy_extreme"] = stats(report.energy_extreme);
    j["accuracy_extreme"] = stats(report.accuracy_extreme);
    j["knee"] = stats(report.knee);
    return j;
}

}  // namespace greennas
