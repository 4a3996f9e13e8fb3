#pragma once

// MLP surrogate that maps a 36-value architecture encoding to training
// energy at a single base budget; other budgets are scaled linearly.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "greennas/benchstore.hpp"
#include "greennas/cellspace.hpp"

namespace greennas {

inline constexpr std::size_t kFeatureCount = 36;
using FeatureVector = std::array<double, kFeatureCount>;

// Layout: [0, 28) upper triangle (diagonal included) of the zero-padded 7x7
// adjacency, row-major; [28, 35) op codes of the padded vertices (0 = pad);
// [35] trainable parameter count. Representation-sensitive: isomorphic
// encodings generally differ, so callers wanting one vector per architecture
// pass canonical_form(spec).
[[nodiscard]] FeatureVector featurize(const CellSpec& spec, std::int64_t trainable_parameters);

struct DenseLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
};

struct Normalization {
    std::vector<double> feature_mean = std::vector<double>(kFeatureCount, 0.0);
    std::vector<double> feature_std = std::vector<double>(kFeatureCount, 1.0);
    double target_mean = 0.0;
    double target_std = 1.0;
};

struct AdamState {
    std::vector<DenseLayer> first_moment;
    std::vector<DenseLayer> second_moment;
};

inline const std::vector<int> kSurrogateLayerDims = {36, 128, 64, 32, 1};

// GELU on hidden layers, identity on the output.
struct MLPModel {
    std::vector<int> layer_dims;
    std::vector<DenseLayer> layers;
    Normalization normalization;
    int base_budget = 4;
    AdamState adam;
};

// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
[[nodiscard]] MLPModel make_model(const std::vector<int>& layer_dims, std::uint64_t seed);

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 64;
    bool full_batch = false;
    std::array<double, 3> split_ratios = {0.7, 0.1, 0.2};
    std::uint64_t seed = 0;
};

// Prediction in kWh (denormalized).
[[nodiscard]] double forward(const MLPModel& model, const FeatureVector& x);

struct Gradients {
    double loss = 0.0;  // mean |y - t| on normalized targets
    std::vector<DenseLayer> layers;
};

// Targets are in kWh; normalization uses the model's stored statistics.
[[nodiscard]] Gradients loss_and_grad(const MLPModel& model, std::span<const FeatureVector> inputs,
                                      std::span<const double> targets_kwh);

[[nodiscard]] MLPModel adam_step(MLPModel model, const Gradients& grads, int step_index, const TrainConfig& config);
void adam_step_inplace(MLPModel& model, const Gradients& grads, int step_index, const TrainConfig& config);

struct SplitSizes {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

// train = ceil(r0 * n), validation = floor(r1 * n), test = the rest.
[[nodiscard]] SplitSizes split_sizes(std::size_t n, const std::array<double, 3>& ratios);

struct TrainReport {
    SplitSizes split;
    int target_budget = 4;
    double test_pearson_r = 0.0;
    double test_mae_kwh = 0.0;
    double baseline_test_mae_kwh = 0.0;  // predicting the train-split mean
    int best_epoch = 0;
    double best_validation_loss = 0.0;
    double final_train_loss = 0.0;     // normalized L1 of the selected checkpoint
    double baseline_train_loss = 0.0;  // normalized L1 of predicting the mean
};

struct TrainResult {
    MLPModel model;
    TrainReport report;
};

[[nodiscard]] TrainResult train(const BenchmarkTable& table, int target_budget, const TrainConfig& config);

[[nodiscard]] double predict_energy(const MLPModel& model, const CellSpec& spec, std::int64_t trainable_parameters,
                                    int budget);

struct LearningCurvePoint {
    std::size_t train_size = 0;
    std::vector<double> test_mae_kwh;  // one per repeat
    double mean = 0.0;
    double std = 0.0;
};

// For each size and repeat: a seeded split whose test part follows
// split_sizes(); training examples are drawn from the remaining records and
// the leftovers (capped at the validation share) select the checkpoint.
[[nodiscard]] std::vector<LearningCurvePoint> learning_curve(const BenchmarkTable& table, const TrainConfig& config,
                                                             std::span<const std::size_t> train_sizes,
                                                             int target_budget = 4, int repeats = 10);

[[nodiscard]] double pearson(std::span<const double> a, std::span<const double> b);

[[nodiscard]] nlohmann::ordered_json checkpoint_json(const MLPModel& model);
[[nodiscard]] MLPModel model_from_json(const nlohmann::json& j);
void save_model(const MLPModel& model, const std::filesystem::path& path);
[[nodiscard]] MLPModel load_model(const std::filesystem::path& path);

}  // namespace greennas
