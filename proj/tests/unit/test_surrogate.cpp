#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "gradcheck.hpp"
#include "greennas/benchstore.hpp"
#include "greennas/error.hpp"
#include "greennas/surrogate.hpp"

using namespace greennas;
namespace fs = std::filesystem;

namespace {

const BenchmarkTable& table4()
{
    static const BenchmarkTable t = synth_generate({4, 9}, 3);
    return t;
}

TrainConfig quick_config(std::uint64_t seed)
{
    TrainConfig c;
    c.epochs = 60;
    c.batch_size = 16;
    c.seed = seed;
    return c;
}

Errc code_of(const auto& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::Io;
}

}  // namespace

TEST_CASE("featurize layout")
{
    const CellSpec skip = CellSpec::from_matrix({{0, 1}, {0, 0}}, {Operation::Input, Operation::Output});
    const FeatureVector x = featurize(skip, 42);
    CHECK(x.size() == 36);
    const std::array<double, 7> ops = {1, 5, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(x[28 + i] == ops[i]);
    }
    CHECK(x[35] == 42.0);
    // (0,1) is the second slot of row 0 (diagonal first).
    for (std::size_t i = 0; i < 28; ++i) {
        CHECK(x[i] == (i == 1 ? 1.0 : 0.0));
    }

    // A full 7V spec: diagonal slots are zero and the upper triangle is copied.
    const CellSpec s7 = CellSpec::from_matrix(
        {{0, 1, 1, 0, 0, 0, 1},
         {0, 0, 0, 1, 0, 0, 0},
         {0, 0, 0, 0, 1, 0, 0},
         {0, 0, 0, 0, 0, 1, 0},
         {0, 0, 0, 0, 0, 1, 0},
         {0, 0, 0, 0, 0, 0, 1},
         {0, 0, 0, 0, 0, 0, 0}},
        {Operation::Input, Operation::Conv3x3, Operation::Conv1x1, Operation::MaxPool3x3, Operation::Conv3x3,
         Operation::Conv1x1, Operation::Output});
    const FeatureVector y = featurize(s7, 1);
    std::size_t pos = 0;
    for (int i = 0; i < 7; ++i) {
        for (int j = i; j < 7; ++j, ++pos) {
            CHECK(y[pos] == (s7.has_edge(i, j) ? 1.0 : 0.0));
            if (i == j) {
                CHECK(y[pos] == 0.0);
            }
        }
    }
    for (int v = 0; v < 7; ++v) {
        CHECK(y[28 + static_cast<std::size_t>(v)] == code(s7.op(v)));
    }
}

TEST_CASE("featurize is always 36 long and zero padded")
{
    for (const CellSpec& s : enumerate_space({5, 9})) {
        const FeatureVector x = featurize(s, 7);
        for (int v = s.num_vertices(); v < 7; ++v) {
            CHECK(x[28 + static_cast<std::size_t>(v)] == 0.0);
        }
    }
}

TEST_CASE("forward basics")
{
    MLPModel m = make_model(kSurrogateLayerDims, 1);
    for (auto& layer : m.layers) {
        layer.weight.setZero();
        layer.bias.setZero();
    }
    m.normalization.target_mean = 1.25;
    m.normalization.target_std = 3.0;
    const FeatureVector x = featurize(make_chain({Operation::Conv3x3}), 1000);
    CHECK(forward(m, x) == 1.25);

    const MLPModel r = make_model(kSurrogateLayerDims, 2);
    CHECK(forward(r, x) == forward(r, x));

    MLPModel bad = r;
    bad.layers[1].weight.resize(3, 3);
    CHECK(code_of([&] { (void)forward(bad, x); }) == Errc::DimensionMismatch);
}

TEST_CASE("make_model initialization bounds")
{
    const MLPModel m = make_model(kSurrogateLayerDims, 9);
    REQUIRE(m.layers.size() == 4);
    for (std::size_t l = 0; l < 4; ++l) {
        const double bound = std::sqrt(6.0 / (kSurrogateLayerDims[l] + kSurrogateLayerDims[l + 1]));
        CHECK(m.layers[l].weight.rows() == kSurrogateLayerDims[l + 1]);
        CHECK(m.layers[l].weight.cols() == kSurrogateLayerDims[l]);
        CHECK(m.layers[l].weight.cwiseAbs().maxCoeff() <= bound);
        CHECK(m.layers[l].bias.isZero());
    }
    const MLPModel same = make_model(kSurrogateLayerDims, 9);
    CHECK(same.layers[2].weight == m.layers[2].weight);
}

TEST_CASE("loss_and_grad at exact fit is zero")
{
    // Identity target normalization keeps the denormalize/normalize round trip exact.
    MLPModel m = oracle::random_model(kSurrogateLayerDims, 5);
    m.normalization.target_mean = 0.0;
    m.normalization.target_std = 1.0;
    // Single-sample batches take the same product kernel as forward().
    const oracle::GradBatch b = oracle::random_batch(6, 5);
    for (std::size_t i = 0; i < b.x.size(); ++i) {
        const std::vector<FeatureVector> x = {b.x[i]};
        const std::vector<double> t = {forward(m, b.x[i])};
        const Gradients g = loss_and_grad(m, x, t);
        CHECK(g.loss == 0.0);
        for (const auto& layer : g.layers) {
            CHECK(layer.weight.isZero(0.0));
            CHECK(layer.bias.isZero(0.0));
        }
    }
}

TEST_CASE("loss_and_grad errors")
{
    const MLPModel m = make_model(kSurrogateLayerDims, 1);
    const std::vector<FeatureVector> none;
    const std::vector<double> no_t;
    CHECK(code_of([&] { (void)loss_and_grad(m, none, no_t); }) == Errc::EmptyBatch);
    const std::vector<FeatureVector> one(1);
    const std::vector<double> two(2, 0.0);
    CHECK(code_of([&] { (void)loss_and_grad(m, one, two); }) == Errc::DimensionMismatch);
}

TEST_CASE("gradient check against central finite differences")
{
    const std::vector<std::vector<int>> shapes = {{36, 8, 1}, {36, 5, 4, 1}, {36, 16, 8, 4, 1}};
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto& dims = shapes[seed % shapes.size()];
        const oracle::GradCheckResult r =
            oracle::gradient_check(oracle::random_model(dims, seed), oracle::random_batch(5, seed + 100));
        CAPTURE(seed);
        CHECK(r.checked > 0);
        CHECK(r.max_rel_error < 1e-4);
    }
    const oracle::GradCheckResult full =
        oracle::gradient_check(oracle::random_model(kSurrogateLayerDims, 77), oracle::random_batch(4, 77));
    CHECK(full.checked > 10000);
    CHECK(full.max_rel_error < 1e-4);
}

TEST_CASE("negated targets flip the output bias gradient")
{
    MLPModel m = oracle::random_model({36, 6, 1}, 3);
    m.normalization.target_mean = 0.0;
    const oracle::GradBatch b = oracle::random_batch(7, 3);
    // Zero the output layer so predictions are exactly 0 and residuals are -t.
    m.layers.back().weight.setZero();
    m.layers.back().bias.setZero();
    std::vector<double> neg = b.t;
    for (double& t : neg) {
        t = -t;
    }
    const double g1 = loss_and_grad(m, b.x, b.t).layers.back().bias[0];
    const double g2 = loss_and_grad(m, b.x, neg).layers.back().bias[0];
    CHECK(g1 != 0.0);
    CHECK(g2 == -g1);
}

TEST_CASE("adam step")
{
    const MLPModel m = oracle::random_model({36, 4, 1}, 11);
    TrainConfig cfg;
    Gradients zero;
    for (const auto& layer : m.layers) {
        zero.layers.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                               Eigen::VectorXd::Zero(layer.bias.size())});
    }
    const MLPModel same = adam_step(m, zero, 1, cfg);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        CHECK(same.layers[l].weight == m.layers[l].weight);
        CHECK(same.layers[l].bias == m.layers[l].bias);
    }

    // Step 1 closed form: delta = -lr * g / (|g| + eps).
    Gradients g = zero;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(0.0, 0.01);
    for (auto& layer : g.layers) {
        layer.weight = layer.weight.unaryExpr([&](double) { return nd(rng); });
        layer.bias = layer.bias.unaryExpr([&](double) { return nd(rng); });
    }
    const MLPModel stepped = adam_step(m, g, 1, cfg);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        for (Eigen::Index i = 0; i < g.layers[l].weight.size(); ++i) {
            const double gi = g.layers[l].weight.data()[i];
            const double expected = -cfg.learning_rate * gi / (std::abs(gi) + cfg.epsilon);
            CHECK(stepped.layers[l].weight.data()[i] - m.layers[l].weight.data()[i] ==
                  doctest::Approx(expected).epsilon(1e-9));
        }
    }
    const MLPModel again = adam_step(m, g, 1, cfg);
    CHECK(again.layers[0].weight == stepped.layers[0].weight);
    CHECK(code_of([&] { (void)adam_step(m, g, 0, cfg); }) == Errc::InvalidArgument);
}

TEST_CASE("split sizes")
{
    const std::array<double, 3> r = {0.7, 0.1, 0.2};
    const SplitSizes a = split_sizes(10, r);
    CHECK(a.train == 7);
    CHECK(a.validation == 1);
    CHECK(a.test == 2);
    const SplitSizes b = split_sizes(4310, r);
    CHECK(b.train == 3017);
    CHECK(b.validation == 431);
    CHECK(b.test == 862);
    for (std::size_t n = 0; n < 500; ++n) {
        const SplitSizes s = split_sizes(n, r);
        CHECK(s.train + s.validation + s.test == n);
        CHECK(static_cast<double>(s.train) >= 0.7 * static_cast<double>(n) - 1e-9);
    }
}

TEST_CASE("pearson")
{
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> b = {2, 4, 6, 8};
    const std::vector<double> c = {4, 3, 2, 1};
    CHECK(pearson(a, b) == doctest::Approx(1.0));
    CHECK(pearson(a, c) == doctest::Approx(-1.0));
    const std::vector<double> d = {1, 3, 2, 4};
    // Hand computed: cov 1.0, var 1.25 each.
    CHECK(pearson(a, d) == doctest::Approx(0.8));
    const std::vector<double> flat = {1, 1, 1, 1};
    CHECK(std::isnan(pearson(a, flat)));
    CHECK(code_of([&] { (void)pearson(std::vector<double>{1}, std::vector<double>{1}); }) == Errc::TooShort);
    CHECK(code_of([&] { (void)pearson(a, std::vector<double>{1, 2}); }) == Errc::LengthMismatch);
}

TEST_CASE("checkpoint JSON layout and round trip")
{
    MLPModel m = oracle::random_model(kSurrogateLayerDims, 21);
    m.base_budget = 12;
    const nlohmann::ordered_json j = checkpoint_json(m);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        keys.push_back(k);
    }
    CHECK(keys == std::vector<std::string>{"layer_dims", "weights", "biases", "normalization", "base_budget"});
    CHECK(j["weights"][0].size() == 128);
    CHECK(j["weights"][0][0].size() == 36);

    const fs::path dir = fs::temp_directory_path() / "greennas_unit";
    fs::create_directories(dir);
    const fs::path p = dir / "model.json";
    save_model(m, p);
    const MLPModel back = load_model(p);
    CHECK(back.layer_dims == m.layer_dims);
    CHECK(back.base_budget == 12);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        CHECK(back.layers[l].weight == m.layers[l].weight);
        CHECK(back.layers[l].bias == m.layers[l].bias);
    }
    CHECK(back.normalization.feature_std == m.normalization.feature_std);
    const FeatureVector x = featurize(make_chain({Operation::Conv1x1}), 5000);
    CHECK(forward(back, x) == forward(m, x));

    nlohmann::json broken = nlohmann::json::parse(j.dump());
    broken["normalization"]["feature_std"][3] = 0.0;
    CHECK(code_of([&] { (void)model_from_json(broken); }) == Errc::ParseError);
    broken = nlohmann::json::parse(j.dump());
    broken["biases"][1].erase(0);
    CHECK(code_of([&] { (void)model_from_json(broken); }) == Errc::DimensionMismatch);
    CHECK(code_of([&] { (void)model_from_json(nlohmann::json::object()); }) == Errc::ParseError);
    CHECK(code_of([&] { (void)load_model(dir / "missing.json"); }) == Errc::Io);
}

TEST_CASE("train is deterministic and beats the mean")
{
    const TrainResult a = train(table4(), 4, quick_config(5));
    const TrainResult b = train(table4(), 4, quick_config(5));
    CHECK(a.report.test_mae_kwh == b.report.test_mae_kwh);
    CHECK(a.report.split.train == 64);
    CHECK(a.report.split.validation == 9);
    CHECK(a.report.split.test == 18);
    CHECK(a.report.final_train_loss < a.report.baseline_train_loss);
    CHECK(a.report.test_mae_kwh < a.report.baseline_test_mae_kwh);
    CHECK(a.model.base_budget == 4);

    const TrainResult c = train(table4(), 4, quick_config(6));
    CHECK(c.report.test_mae_kwh != a.report.test_mae_kwh);
}

TEST_CASE("train errors")
{
    BenchmarkTable small({4, 9});
    std::size_t i = 0;
    for (const auto& [key, rec] : table4().records()) {
        if (i++ == 9) {
            break;
        }
        small.insert(rec);
    }
    CHECK(code_of([&] { (void)train(small, 4, quick_config(1)); }) == Errc::InsufficientData);
    TrainConfig bad = quick_config(1);
    bad.split_ratios = {0.5, 0.1, 0.1};
    CHECK(code_of([&] { (void)train(table4(), 4, bad); }) == Errc::InvalidArgument);
}

TEST_CASE("predict_energy scales linearly and ignores representation")
{
    const MLPModel m = train(table4(), 4, quick_config(2)).model;
    const CellSpec a = CellSpec::from_matrix({{0, 1, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 0}},
                                             {Operation::Input, Operation::Conv3x3, Operation::MaxPool3x3,
                                              Operation::Output});
    const CellSpec b = CellSpec::from_matrix({{0, 1, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 0}},
                                             {Operation::Input, Operation::MaxPool3x3, Operation::Conv3x3,
                                              Operation::Output});
    const std::int64_t p = count_parameters(a);
    const double e4 = predict_energy(m, a, p, 4);
    CHECK(e4 == forward(m, featurize(canonical_form(a), p)));
    CHECK(predict_energy(m, a, p, 8) == doctest::Approx(2.0 * e4).epsilon(1e-15));
    CHECK(predict_energy(m, a, p, 108) == doctest::Approx(27.0 * e4).epsilon(1e-15));
    CHECK(predict_energy(m, b, p, 36) == predict_energy(m, a, p, 36));
}

TEST_CASE("learning curve")
{
    TrainConfig cfg = quick_config(3);
    cfg.epochs = 20;
    const std::vector<std::size_t> sizes = {10, 60};
    const auto curve = learning_curve(table4(), cfg, sizes, 4, 3);
    REQUIRE(curve.size() == 2);
    for (const auto& pt : curve) {
        CHECK(pt.test_mae_kwh.size() == 3);
        CHECK(pt.std >= 0.0);
        CHECK(pt.test_mae_kwh[0] != pt.test_mae_kwh[1]);
    }
    const std::vector<std::size_t> zero = {0};
    CHECK(code_of([&] { (void)learning_curve(table4(), cfg, zero, 4, 3); }) == Errc::InsufficientData);
}
