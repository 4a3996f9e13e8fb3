#pragma once

// SEMOA: hypervolume-guided evolutionary search over cells, plus the
// random-search and single-objective baselines and a multi-trial runner.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "greennas/benchstore.hpp"
#include "greennas/cellspace.hpp"
#include "greennas/mocore.hpp"
#include "greennas/surrogate.hpp"

namespace greennas {

struct SearchConfig {
    int iterations = 100;
    int lambda = 10;
    double eta_plus = 2.0;
    std::vector<int> budgets = {4, 12, 36, 108};
    // Unset: 2 / C(N, 2) edges and 1 / (2 (N - 2)) labels, N the space width.
    std::optional<double> p_edge;
    std::optional<double> p_node;
    // Unset: (1.0, 1.1 * max table energy at the largest configured budget).
    std::optional<ReferencePoint> reference;
    std::uint64_t seed = 0;
    int max_repair_attempts = 100;
    int num_queries = 1000;  // random search and SOO
};

[[nodiscard]] double default_p_edge(int num_vertices);
[[nodiscard]] double default_p_node(int num_vertices);

// Throws InvalidArgument on out-of-range settings.
void check_config(const SearchConfig& config);

struct Evaluation {
    ObjectivePoint point;  // (1 - validation accuracy, energy kWh)
    BudgetMetrics metrics;
    std::int64_t trainable_parameters = 0;
};

class EvalOracle {
public:
    virtual ~EvalOracle() = default;
    [[nodiscard]] virtual Evaluation evaluate(const CellSpec& spec, int budget) const = 0;
    [[nodiscard]] virtual SpaceConstraints constraints() const = 0;
    [[nodiscard]] virtual double max_energy(int budget) const = 0;
};

// Plain tabular lookup by canonical key.
class TableOracle final : public EvalOracle {
public:
    explicit TableOracle(const BenchmarkTable& table) : table_(table) {}

    [[nodiscard]] Evaluation evaluate(const CellSpec& spec, int budget) const override;
    [[nodiscard]] SpaceConstraints constraints() const override { return table_.constraints(); }
    [[nodiscard]] double max_energy(int budget) const override { return table_.max_energy(budget); }

private:
    const BenchmarkTable& table_;
};

// Energy from the surrogate (scaled from its base budget); accuracies,
// time and carbon fields from the table.
class SurrogateOracle final : public EvalOracle {
public:
    SurrogateOracle(const BenchmarkTable& table, MLPModel model);

    [[nodiscard]] Evaluation evaluate(const CellSpec& spec, int budget) const override;
    [[nodiscard]] SpaceConstraints constraints() const override { return table_.constraints(); }
    [[nodiscard]] double max_energy(int budget) const override;

private:
    const BenchmarkTable& table_;
    MLPModel model_;
    std::unordered_map<CanonicalKey, double> base_energy_;
    double max_base_energy_ = 0.0;
};

// Uniform over valid raw encodings with exactly max_vertices vertices.
[[nodiscard]] CellSpec random_valid_spec(const SpaceConstraints& space, std::mt19937_64& rng);

struct PassOutcome {
    CellSpec spec;
    int edge_flips = 0;
    int label_changes = 0;
};

// One flip/relabel pass: every upper-triangular slot flips with p_edge, every
// interior label moves to a uniformly chosen different label with p_node.
[[nodiscard]] PassOutcome perturb_pass(const CellSpec& spec, double p_edge, double p_node, std::mt19937_64& rng);

// Passes repeat until the encoding changes; an invalid result is discarded
// and the whole perturbation redrawn from `spec`, at most
// max_repair_attempts times (then RepairExhausted).
[[nodiscard]] CellSpec perturb(const CellSpec& spec, const SearchConfig& config, const SpaceConstraints& space,
                               std::mt19937_64& rng);

// Archive indices: the per-objective minimizers first, then lambda - 2
// draws by contributing-hypervolume rank.
[[nodiscard]] std::vector<std::size_t> linear_rank_sample(std::span<const ObjectivePoint> archive, int lambda,
                                                          const ReferencePoint& ref, double eta_plus,
                                                          std::mt19937_64& rng);

struct ArchSummary {
    Payload payload;
    CellSpec spec;
    double training_time_s = 0.0;
    double validation_accuracy = 0.0;
    double energy_kwh = 0.0;
    std::int64_t trainable_parameters = 0;
};

struct RunResult {
    ParetoArchive archive;
    std::vector<double> hv_history;  // entry 0 is the initial population
    std::size_t query_count = 0;     // oracle evaluations
    ArchSummary energy_extreme;      // r0: lowest energy
    ArchSummary accuracy_extreme;    // r1: highest validation accuracy
    ArchSummary knee;                // rk
    ReferencePoint reference;
    std::uint64_t seed = 0;
    // Cell behind each archived key (the first raw encoding evaluated).
    std::map<CanonicalKey, CellSpec> specs;
};

[[nodiscard]] RunResult semoa_run(const SearchConfig& config, const EvalOracle& oracle);

enum class ObjectiveMode { Multi, Single };

// Multi: every queried cell at every budget feeds a non-dominated archive.
// Single: only the highest-validation-accuracy point is kept.
[[nodiscard]] RunResult random_search(const SearchConfig& config, const EvalOracle& oracle, int num_queries,
                                      ObjectiveMode mode);

enum class Algorithm { Semoa, Random, Soo };

[[nodiscard]] std::string_view to_string(Algorithm algo) noexcept;
[[nodiscard]] Algorithm algorithm_from_string(std::string_view name);

struct SummaryStats {
    MeanStd training_time_s;
    MeanStd validation_accuracy;
    MeanStd energy_kwh;
    MeanStd trainable_parameters;
};

struct TrialsReport {
    Algorithm algorithm = Algorithm::Semoa;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> trial_seeds;
    std::vector<std::optional<RunResult>> runs;  // by trial index
    std::vector<std::size_t> failed_trials;
    std::vector<std::string> failure_messages;
    AttainmentCurves attainment;
    SummaryStats energy_extreme;
    SummaryStats accuracy_extreme;
    SummaryStats knee;
    MeanStd final_hypervolume;
};

[[nodiscard]] std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index);

// Trials may run concurrently (ECNAS_THREADS caps the workers); results are
// keyed by trial index so the report does not depend on scheduling.
[[nodiscard]] TrialsReport run_trials(const SearchConfig& config, const EvalOracle& oracle, int num_trials,
                                      Algorithm algorithm, unsigned threads = 0);

// Probabilities with defaults resolved for the given space.
[[nodiscard]] double resolved_p_edge(const SearchConfig& config, const SpaceConstraints& space);
[[nodiscard]] double resolved_p_node(const SearchConfig& config, const SpaceConstraints& space);
[[nodiscard]] ReferencePoint resolved_reference(const SearchConfig& config, const EvalOracle& oracle);

[[nodiscard]] nlohmann::ordered_json summary_json(const ArchSummary& s);
[[nodiscard]] nlohmann::ordered_json config_json(const SearchConfig& config, const SpaceConstraints& space);
[[nodiscard]] nlohmann::ordered_json run_result_json(const RunResult& result, const nlohmann::ordered_json& config);
[[nodiscard]] nlohmann::ordered_json trials_report_json(const TrialsReport& report,
                                                        const nlohmann::ordered_json& config);

}  // namespace greennas
