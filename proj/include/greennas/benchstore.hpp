#pragma once

// Tabular per-architecture records: persistence, lookup, a deterministic
// synthetic generator, and dataset statistics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greennas/cellspace.hpp"

namespace greennas {

inline constexpr std::array<int, 4> kBudgets = {4, 12, 36, 108};

[[nodiscard]] constexpr bool is_budget(int epochs) noexcept
{
    return epochs == 4 || epochs == 12 || epochs == 36 || epochs == 108;
}

struct BudgetMetrics {
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    double training_time_s = 0.0;
    double energy_kwh = 0.0;
    double avg_power_w = 0.0;
    double co2eq_kg = 0.0;
    std::optional<double> carbon_intensity_g_per_kwh;

    friend bool operator==(const BudgetMetrics&, const BudgetMetrics&) = default;
};

struct ArchRecord {
    CanonicalKey key;
    CellSpec spec;
    std::int64_t trainable_parameters = 0;
    std::map<int, BudgetMetrics> metrics;

    friend bool operator==(const ArchRecord&, const ArchRecord&) = default;
};

class BenchmarkTable {
public:
    BenchmarkTable() = default;
    explicit BenchmarkTable(SpaceConstraints constraints, std::string provenance = {})
        : constraints_(constraints), provenance_(std::move(provenance))
    {
    }

    // Throws DuplicateKey, or InvalidSpec when the spec does not validate or
    // the stored key disagrees with canonical_key(spec).
    void insert(ArchRecord record);

    [[nodiscard]] const ArchRecord* find(const CanonicalKey& key) const;
    [[nodiscard]] const std::map<CanonicalKey, ArchRecord>& records() const noexcept { return records_; }
    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }

    [[nodiscard]] const SpaceConstraints& constraints() const noexcept { return constraints_; }
    [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }

    // Largest stored energy at `budget`; 0 when no record carries it.
    [[nodiscard]] double max_energy(int budget) const;

    // Record equality only; provenance and constraints are metadata.
    friend bool operator==(const BenchmarkTable& a, const BenchmarkTable& b) { return a.records_ == b.records_; }

private:
    std::map<CanonicalKey, ArchRecord> records_;
    SpaceConstraints constraints_{};
    std::string provenance_;
};

// One JSON object per line, field names as documented in the README.
[[nodiscard]] std::string serialize_record(const ArchRecord& record);
[[nodiscard]] ArchRecord parse_record(const std::string& line);

// Constraints are inferred from the widest stored cell (max edges 9).
[[nodiscard]] BenchmarkTable load_table(const std::filesystem::path& path);
void save_table(const BenchmarkTable& table, const std::filesystem::path& path);

[[nodiscard]] const BudgetMetrics& query(const BenchmarkTable& table, const CanonicalKey& key, int budget);

// Linear extrapolation in epochs.
[[nodiscard]] double scale_energy(const BudgetMetrics& metrics, int from_budget, int to_budget);
[[nodiscard]] double scale_energy(double energy_kwh, int from_budget, int to_budget);

// Constants of the synthetic generator. Energies are kWh per epoch.
struct SynthConstants {
    double base_kwh_per_epoch = 0.002;
    double kwh_per_parameter_epoch = 1e-9;
    double conv3x3_kwh_per_epoch = 8e-4;
    double conv1x1_kwh_per_epoch = 3e-4;
    double maxpool3x3_kwh_per_epoch = 2e-4;
    double accuracy_ceiling = 0.95;
    double accuracy_time_constant = 20.0;
    double nominal_power_w = 230.0;
    double carbon_intensity_g_per_kwh = 250.0;
    double energy_noise = 0.05;
};

[[nodiscard]] double synth_op_energy(Operation op, const SynthConstants& c = {}) noexcept;

// Deterministic stand-in table: one record per enumerated spec, every
// budget present. Only 2..6 vertices are supported (ResourceLimit for 7).
[[nodiscard]] BenchmarkTable synth_generate(const SpaceConstraints& constraints, std::uint64_t seed,
                                            const SynthConstants& constants = {});

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

struct SizeGroup {
    int vertices = 0;
    std::size_t count = 0;        // records in the group
    std::size_t with_budget = 0;  // records contributing to the statistics
    MeanStd energy_kwh;
    MeanStd training_time_s;
    MeanStd validation_accuracy;
    MeanStd trainable_parameters;
};

// Grouped by pruned vertex count, ascending; unbiased sample std.
[[nodiscard]] std::vector<SizeGroup> size_stats(const BenchmarkTable& table, int budget = 108);

struct SwapDelta {
    Operation from{};
    Operation to{};
    std::size_t pairs = 0;
    double delta_validation_accuracy = 0.0;  // absolute
    double pct_energy = 0.0;
    double pct_time = 0.0;
    double pct_parameters = 0.0;
};

// All 9 ordered pairs over {conv3x3, conv1x1, maxpool3x3}, row-major in that
// order. A pair (r_a, r_b) is counted once when r_b is r_a with a single
// interior label a replaced by b (up to isomorphism).
[[nodiscard]] std::vector<SwapDelta> opswap_analysis(const BenchmarkTable& table, int budget = 108);

// Spearman rho with average ranks for ties. NaN when either side is constant.
[[nodiscard]] double rank_correlation(std::span<const double> a, std::span<const double> b);

struct RankCorrelationRow {
    std::string metric;
    std::size_t matched = 0;
    double rho = 0.0;
};

// Rank agreement of energy, time and validation accuracy between two tables
// over the architectures (and budget) they share.
[[nodiscard]] std::vector<RankCorrelationRow> compare_tables(const BenchmarkTable& a, const BenchmarkTable& b,
                                                             int budget = 108);

}  // namespace greennas
