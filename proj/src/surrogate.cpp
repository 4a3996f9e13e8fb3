#include "greennas/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "greennas/hashing.hpp"

namespace greennas {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }
double gelu_grad(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x); }

struct ForwardCache {
    std::vector<Eigen::MatrixXd> pre;         // pre-activations per layer
    std::vector<Eigen::MatrixXd> activation;  // activation[0] is the input
};

void check_model(const MLPModel& model)
{
    if (model.layers.empty()) {
        throw Error(Errc::DimensionMismatch, "model has no layers");
    }
    if (model.layers.front().weight.cols() != static_cast<Eigen::Index>(kFeatureCount)) {
        throw Error(Errc::DimensionMismatch, "first layer must take 36 inputs");
    }
    if (model.layers.back().weight.rows() != 1) {
        throw Error(Errc::DimensionMismatch, "last layer must have one output");
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        if (layer.bias.size() != layer.weight.rows() ||
            (l > 0 && layer.weight.cols() != model.layers[l - 1].weight.rows())) {
            throw Error(Errc::DimensionMismatch, "layer " + std::to_string(l) + " is incompatible");
        }
    }
    if (model.normalization.feature_mean.size() != kFeatureCount ||
        model.normalization.feature_std.size() != kFeatureCount) {
        throw Error(Errc::DimensionMismatch, "normalization must cover 36 features");
    }
}

// Columns are samples.
Eigen::RowVectorXd run_forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x, ForwardCache* cache)
{
    Eigen::MatrixXd a = x;
    if (cache != nullptr) {
        cache->pre.clear();
        cache->activation.clear();
        cache->activation.push_back(x);
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z = layers[l].weight * a;
        z.colwise() += layers[l].bias;
        const bool hidden = l + 1 < layers.size();
        a = hidden ? Eigen::MatrixXd(z.unaryExpr([](double v) { return gelu(v); })) : z;
        if (cache != nullptr) {
            cache->pre.push_back(std::move(z));
            if (hidden) {
                cache->activation.push_back(a);
            }
        }
    }
    return a.row(0);
}

// L1 loss on normalized data plus reverse-mode gradients.
Gradients batch_gradients(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& t)
{
    ForwardCache cache;
    const Eigen::RowVectorXd y = run_forward(layers, x, &cache);
    const double batch = static_cast<double>(x.cols());

    Gradients g;
    g.loss = (y - t).cwiseAbs().sum() / batch;
    g.layers.resize(layers.size());

    Eigen::MatrixXd delta = (y - t).unaryExpr([batch](double r) {
        return r > 0.0 ? 1.0 / batch : (r < 0.0 ? -1.0 / batch : 0.0);
    });
    for (std::size_t l = layers.size(); l-- > 0;) {
        g.layers[l].weight = delta * cache.activation[l].transpose();
        g.layers[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd upstream = layers[l].weight.transpose() * delta;
            delta = upstream.cwiseProduct(cache.pre[l - 1].unaryExpr([](double v) { return gelu_grad(v); }));
        }
    }
    return g;
}

Eigen::MatrixXd normalized_inputs(const Normalization& norm, std::span<const FeatureVector> xs)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(kFeatureCount), static_cast<Eigen::Index>(xs.size()));
    for (std::size_t c = 0; c < xs.size(); ++c) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            m(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c)) =
                (xs[c][f] - norm.feature_mean[f]) / norm.feature_std[f];
        }
    }
    return m;
}

Normalization fit_normalization(std::span<const FeatureVector> xs, std::span<const double> ts)
{
    Normalization norm;
    const double n = static_cast<double>(xs.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double mean = 0.0;
        for (const auto& x : xs) {
            mean += x[f];
        }
        mean /= n;
        double var = 0.0;
        for (const auto& x : xs) {
            var += (x[f] - mean) * (x[f] - mean);
        }
        const double sd = std::sqrt(var / n);
        norm.feature_mean[f] = mean;
        norm.feature_std[f] = sd > 1e-12 ? sd : 1.0;
    }
    const double tmean = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
    double tvar = 0.0;
    for (double t : ts) {
        tvar += (t - tmean) * (t - tmean);
    }
    const double tsd = std::sqrt(tvar / n);
    norm.target_mean = tmean;
    norm.target_std = tsd > 1e-12 ? tsd : 1.0;
    return norm;
}

struct Dataset {
    std::vector<FeatureVector> features;
    std::vector<double> targets;
};

Dataset collect(const BenchmarkTable& table, int budget)
{
    Dataset d;
    for (const auto& [key, rec] : table.records()) {
        auto it = rec.metrics.find(budget);
        if (it == rec.metrics.end()) {
            continue;
        }
        d.features.push_back(featurize(canonical_form(rec.spec), rec.trainable_parameters));
        d.targets.push_back(it->second.energy_kwh);
    }
    return d;
}

struct Subset {
    std::vector<FeatureVector> features;
    std::vector<double> targets;
};

Subset gather(const Dataset& d, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end)
{
    Subset s;
    for (std::size_t i = begin; i < end; ++i) {
        s.features.push_back(d.features[order[i]]);
        s.targets.push_back(d.targets[order[i]]);
    }
    return s;
}

struct FitOutcome {
    MLPModel model;
    int best_epoch = 0;
    double best_validation_loss = 0.0;
};

// Mini-batch Adam on standardized data; keeps the best-validation weights.
FitOutcome fit(const Subset& train_set, const Subset& validation_set, int base_budget, const TrainConfig& config)
{
    MLPModel model = make_model(kSurrogateLayerDims, hash_combine(config.seed, 0x696e6974ULL));
    model.base_budget = base_budget;
    model.normalization = fit_normalization(train_set.features, train_set.targets);
    const Normalization& norm = model.normalization;

    const Eigen::MatrixXd x_train = normalized_inputs(norm, train_set.features);
    Eigen::RowVectorXd t_train(static_cast<Eigen::Index>(train_set.targets.size()));
    for (std::size_t i = 0; i < train_set.targets.size(); ++i) {
        t_train(static_cast<Eigen::Index>(i)) = (train_set.targets[i] - norm.target_mean) / norm.target_std;
    }
    const Subset& val = validation_set.features.empty() ? train_set : validation_set;
    const Eigen::MatrixXd x_val = normalized_inputs(norm, val.features);
    Eigen::RowVectorXd t_val(static_cast<Eigen::Index>(val.targets.size()));
    for (std::size_t i = 0; i < val.targets.size(); ++i) {
        t_val(static_cast<Eigen::Index>(i)) = (val.targets[i] - norm.target_mean) / norm.target_std;
    }

    const std::size_t n = train_set.features.size();
    const std::size_t batch = config.full_batch ? n : std::min<std::size_t>(n, static_cast<std::size_t>(config.batch_size));
    std::mt19937_64 rng(hash_combine(config.seed, 0x62617463ULL));
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);

    FitOutcome best;
    best.model = model;
    best.best_validation_loss = std::numeric_limits<double>::infinity();
    int step = 0;
    Eigen::MatrixXd xb;
    Eigen::RowVectorXd tb;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            const auto cols = static_cast<Eigen::Index>(end - start);
            xb.resize(x_train.rows(), cols);
            tb.resize(cols);
            for (Eigen::Index c = 0; c < cols; ++c) {
                xb.col(c) = x_train.col(order[start + static_cast<std::size_t>(c)]);
                tb(c) = t_train(order[start + static_cast<std::size_t>(c)]);
            }
            const Gradients g = batch_gradients(model.layers, xb, tb);
            adam_step_inplace(model, g, ++step, config);
        }
        const double val_loss = (run_forward(model.layers, x_val, nullptr) - t_val).cwiseAbs().mean();
        if (val_loss < best.best_validation_loss) {
            best.best_validation_loss = val_loss;
            best.best_epoch = epoch;
            best.model = model;
        }
    }
    best.model.adam = AdamState{};
    return best;
}

double mae(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a[i] - b[i]);
    }
    return s / static_cast<double>(a.size());
}

std::vector<double> predict_all(const MLPModel& model, std::span<const FeatureVector> xs)
{
    const Eigen::RowVectorXd y = run_forward(model.layers, normalized_inputs(model.normalization, xs), nullptr);
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i] = y(static_cast<Eigen::Index>(i)) * model.normalization.target_std + model.normalization.target_mean;
    }
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(hash_combine(seed, 0x73706c74ULL));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

void check_config(const TrainConfig& config)
{
    const double sum = config.split_ratios[0] + config.split_ratios[1] + config.split_ratios[2];
    if (std::abs(sum - 1.0) > 1e-9 || config.epochs < 1 || config.batch_size < 1) {
        throw Error(Errc::InvalidArgument, "split ratios must sum to 1; epochs and batch size must be >= 1");
    }
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

FeatureVector featurize(const CellSpec& spec, std::int64_t trainable_parameters)
{
    if (auto r = check_structure(spec); r != ValidationResult::Ok) {
        throw Error(Errc::InvalidSpec, "cannot featurize: " + std::string(to_string(r)));
    }
    FeatureVector x{};
    std::size_t pos = 0;
    for (int i = 0; i < kMaxVertices; ++i) {
        for (int j = i; j < kMaxVertices; ++j) {
            const bool inside = i < spec.num_vertices() && j < spec.num_vertices();
            x[pos++] = inside && spec.has_edge(i, j) ? 1.0 : 0.0;
        }
    }
    for (int v = 0; v < kMaxVertices; ++v) {
        x[pos++] = v < spec.num_vertices() ? static_cast<double>(code(spec.op(v))) : 0.0;
    }
    x[pos] = static_cast<double>(trainable_parameters);
    return x;
}

MLPModel make_model(const std::vector<int>& layer_dims, std::uint64_t seed)
{
    if (layer_dims.size() < 2) {
        throw Error(Errc::DimensionMismatch, "need at least input and output dimensions");
    }
    MLPModel model;
    model.layer_dims = layer_dims;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        DenseLayer layer;
        layer.weight.resize(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) {
                layer.weight(r, c) = dist(rng);
            }
        }
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

double forward(const MLPModel& model, const FeatureVector& x)
{
    check_model(model);
    return predict_all(model, std::span<const FeatureVector>(&x, 1)).front();
}

Gradients loss_and_grad(const MLPModel& model, std::span<const FeatureVector> inputs, std::span<const double> targets_kwh)
{
    check_model(model);
    if (inputs.empty()) {
        throw Error(Errc::EmptyBatch, "loss_and_grad needs at least one sample");
    }
    if (inputs.size() != targets_kwh.size()) {
        throw Error(Errc::DimensionMismatch, "inputs and targets differ in length");
    }
    const Normalization& norm = model.normalization;
    Eigen::RowVectorXd t(static_cast<Eigen::Index>(targets_kwh.size()));
    for (std::size_t i = 0; i < targets_kwh.size(); ++i) {
        t(static_cast<Eigen::Index>(i)) = (targets_kwh[i] - norm.target_mean) / norm.target_std;
    }
    return batch_gradients(model.layers, normalized_inputs(norm, inputs), t);
}

void adam_step_inplace(MLPModel& model, const Gradients& grads, int step_index, const TrainConfig& config)
{
    if (step_index < 1) {
        throw Error(Errc::InvalidArgument, "Adam step index starts at 1");
    }
    if (grads.layers.size() != model.layers.size()) {
        throw Error(Errc::DimensionMismatch, "gradient layer count differs from model");
    }
    AdamState& s = model.adam;
    if (s.first_moment.size() != model.layers.size()) {
        s.first_moment.clear();
        s.second_moment.clear();
        for (const auto& layer : model.layers) {
            DenseLayer zero{Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                            Eigen::VectorXd::Zero(layer.bias.size())};
            s.first_moment.push_back(zero);
            s.second_moment.push_back(zero);
        }
    }
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    const double c1 = 1.0 - std::pow(b1, step_index);
    const double c2 = 1.0 - std::pow(b2, step_index);
    const double lr = config.learning_rate;
    const double eps = config.epsilon;
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        update(model.layers[l].weight, grads.layers[l].weight, s.first_moment[l].weight, s.second_moment[l].weight);
        update(model.layers[l].bias, grads.layers[l].bias, s.first_moment[l].bias, s.second_moment[l].bias);
    }
}

MLPModel adam_step(MLPModel model, const Gradients& grads, int step_index, const TrainConfig& config)
{
    adam_step_inplace(model, grads, step_index, config);
    return model;
}

SplitSizes split_sizes(std::size_t n, const std::array<double, 3>& ratios)
{
    // The small slack keeps 0.7 * 10 from rounding up to 8.
    const double nd = static_cast<double>(n);
    SplitSizes s;
    s.train = std::min(n, static_cast<std::size_t>(std::ceil(ratios[0] * nd - 1e-9)));
    s.validation = std::min(n - s.train, static_cast<std::size_t>(std::floor(ratios[1] * nd + 1e-9)));
    s.test = n - s.train - s.validation;
    return s;
}

double pearson(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw Error(Errc::LengthMismatch, "pearson inputs differ in length");
    }
    if (a.size() < 2) {
        throw Error(Errc::TooShort, "pearson needs at least two items");
    }
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sab / std::sqrt(saa * sbb);
}

TrainResult train(const BenchmarkTable& table, int target_budget, const TrainConfig& config)
{
    check_config(config);
    const Dataset data = collect(table, target_budget);
    if (data.features.size() < 10) {
        throw Error(Errc::InsufficientData, "need at least 10 records with energy at budget " +
                                                std::to_string(target_budget));
    }
    const SplitSizes split = split_sizes(data.features.size(), config.split_ratios);
    if (split.test < 2) {
        throw Error(Errc::InsufficientData, "test split too small");
    }
    const std::vector<std::size_t> order = shuffled_indices(data.features.size(), config.seed);
    const Subset train_set = gather(data, order, 0, split.train);
    const Subset val_set = gather(data, order, split.train, split.train + split.validation);
    const Subset test_set = gather(data, order, split.train + split.validation, order.size());

    FitOutcome fitted = fit(train_set, val_set, target_budget, config);

    TrainResult result;
    TrainReport& r = result.report;
    r.split = split;
    r.target_budget = target_budget;
    r.best_epoch = fitted.best_epoch;
    r.best_validation_loss = fitted.best_validation_loss;

    const std::vector<double> pred = predict_all(fitted.model, test_set.features);
    r.test_pearson_r = pearson(pred, test_set.targets);
    r.test_mae_kwh = mae(pred, test_set.targets);
    const double train_mean = fitted.model.normalization.target_mean;
    double base = 0.0;
    for (double t : test_set.targets) {
        base += std::abs(t - train_mean);
    }
    r.baseline_test_mae_kwh = base / static_cast<double>(test_set.targets.size());

    const Normalization& norm = fitted.model.normalization;
    const std::vector<double> train_pred = predict_all(fitted.model, train_set.features);
    double fit_loss = 0.0;
    double mean_loss = 0.0;
    for (std::size_t i = 0; i < train_pred.size(); ++i) {
        fit_loss += std::abs(train_pred[i] - train_set.targets[i]) / norm.target_std;
        mean_loss += std::abs(train_set.targets[i] - norm.target_mean) / norm.target_std;
    }
    r.final_train_loss = fit_loss / static_cast<double>(train_pred.size());
    r.baseline_train_loss = mean_loss / static_cast<double>(train_pred.size());

    result.model = std::move(fitted.model);
    return result;
}

double predict_energy(const MLPModel& model, const CellSpec& spec, std::int64_t trainable_parameters, int budget)
{
    const double base = forward(model, featurize(canonical_form(spec), trainable_parameters));
    return scale_energy(base, model.base_budget, budget);
}

std::vector<LearningCurvePoint> learning_curve(const BenchmarkTable& table, const TrainConfig& config,
                                               std::span<const std::size_t> train_sizes, int target_budget, int repeats)
{
    check_config(config);
    if (repeats < 1) {
        throw Error(Errc::InvalidArgument, "repeats must be >= 1");
    }
    const Dataset data = collect(table, target_budget);
    const SplitSizes split = split_sizes(data.features.size(), config.split_ratios);
    const std::size_t pool = split.train + split.validation;
    for (std::size_t size : train_sizes) {
        if (size == 0 || size >= pool || split.test < 2) {
            throw Error(Errc::InsufficientData, "train size " + std::to_string(size) + " not in [1, " +
                                                    std::to_string(pool) + ")");
        }
    }

    std::vector<LearningCurvePoint> out;
    for (std::size_t size : train_sizes) {
        LearningCurvePoint point;
        point.train_size = size;
        for (int rep = 0; rep < repeats; ++rep) {
            TrainConfig cfg = config;
            cfg.seed = hash_combine(config.seed, static_cast<std::uint64_t>(rep));
            const std::vector<std::size_t> order = shuffled_indices(data.features.size(), cfg.seed);
            const std::size_t val_end = std::min(pool, size + std::max<std::size_t>(1, split.validation));
            const Subset train_set = gather(data, order, 0, size);
            const Subset val_set = gather(data, order, size, val_end);
            const Subset test_set = gather(data, order, pool, order.size());
            const FitOutcome fitted = fit(train_set, val_set, target_budget, cfg);
            point.test_mae_kwh.push_back(mae(predict_all(fitted.model, test_set.features), test_set.targets));
        }
        const double n = static_cast<double>(point.test_mae_kwh.size());
        point.mean = std::accumulate(point.test_mae_kwh.begin(), point.test_mae_kwh.end(), 0.0) / n;
        if (point.test_mae_kwh.size() > 1) {
            double ss = 0.0;
            for (double v : point.test_mae_kwh) {
                ss += (v - point.mean) * (v - point.mean);
            }
            point.std = std::sqrt(ss / (n - 1.0));
        }
        out.push_back(std::move(point));
    }
    return out;
}

nlohmann::ordered_json checkpoint_json(const MLPModel& model)
{
    nlohmann::ordered_json j;
    j["layer_dims"] = model.layer_dims;
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (const auto& layer : model.layers) {
        weights.push_back(matrix_json(layer.weight));
        biases.push_back(std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["normalization"] = {{"feature_mean", model.normalization.feature_mean},
                          {"feature_std", model.normalization.feature_std},
                          {"target_mean", model.normalization.target_mean},
                          {"target_std", model.normalization.target_std}};
    j["base_budget"] = model.base_budget;
    return j;
}

MLPModel model_from_json(const nlohmann::json& j)
{
    try {
        MLPModel model;
        model.layer_dims = j.at("layer_dims").get<std::vector<int>>();
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (weights.size() + 1 != model.layer_dims.size() || biases.size() != weights.size()) {
            throw Error(Errc::DimensionMismatch, "layer_dims disagree with weights/biases");
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            const int rows = model.layer_dims[l + 1];
            const int cols = model.layer_dims[l];
            DenseLayer layer;
            layer.weight.resize(rows, cols);
            if (weights[l].size() != static_cast<std::size_t>(rows)) {
                throw Error(Errc::DimensionMismatch, "weight rows mismatch in layer " + std::to_string(l));
            }
            for (int r = 0; r < rows; ++r) {
                const auto row = weights[l][r].get<std::vector<double>>();
                if (row.size() != static_cast<std::size_t>(cols)) {
                    throw Error(Errc::DimensionMismatch, "weight cols mismatch in layer " + std::to_string(l));
                }
                for (int c = 0; c < cols; ++c) {
                    layer.weight(r, c) = row[c];
                }
            }
            const auto b = biases[l].get<std::vector<double>>();
            if (b.size() != static_cast<std::size_t>(rows)) {
                throw Error(Errc::DimensionMismatch, "bias size mismatch in layer " + std::to_string(l));
            }
            layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
            model.layers.push_back(std::move(layer));
        }
        const auto& norm = j.at("normalization");
        model.normalization.feature_mean = norm.at("feature_mean").get<std::vector<double>>();
        model.normalization.feature_std = norm.at("feature_std").get<std::vector<double>>();
        model.normalization.target_mean = norm.at("target_mean").get<double>();
        model.normalization.target_std = norm.at("target_std").get<double>();
        model.base_budget = j.at("base_budget").get<int>();
        check_model(model);
        for (double sd : model.normalization.feature_std) {
            if (!(sd > 0.0) || !std::isfinite(sd)) {
                throw Error(Errc::ParseError, "feature std must be finite and positive");
            }
        }
        if (!(model.normalization.target_std > 0.0) || model.base_budget <= 0) {
            throw Error(Errc::ParseError, "target std and base budget must be positive");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("malformed checkpoint: ") + e.what());
    }
}

void save_model(const MLPModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::Io, "cannot write " + path.string());
    }
    out << checkpoint_json(model).dump() << '\n';
}

MLPModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
    return model_from_json(j);
}

}  // namespace greennas
