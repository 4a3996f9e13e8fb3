#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "greennas/benchstore.hpp"
#include "greennas/error.hpp"
#include "greennas/mocore.hpp"
#include "greennas/search.hpp"
#include "oracles.hpp"

using namespace greennas;

namespace {

const BenchmarkTable& table4()
{
    static const BenchmarkTable t = synth_generate({4, 9}, 11);
    return t;
}

const BenchmarkTable& table5()
{
    static const BenchmarkTable t = synth_generate({5, 9}, 11);
    return t;
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

SearchConfig small_config(std::uint64_t seed)
{
    SearchConfig c;
    c.iterations = 20;
    c.seed = seed;
    return c;
}

bool mutually_nondominated(const ParetoArchive& a)
{
    for (const auto& p : a) {
        for (const auto& q : a) {
            if (dominates(p, q)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("default perturbation probabilities")
{
    CHECK(default_p_edge(7) == doctest::Approx(2.0 / 21.0));
    CHECK(default_p_node(7) == doctest::Approx(0.1));
    CHECK(default_p_edge(4) == doctest::Approx(2.0 / 6.0));
    CHECK(default_p_node(4) == doctest::Approx(0.25));
}

TEST_CASE("check_config rejects bad settings")
{
    auto rejects = [](auto edit) {
        SearchConfig c;
        edit(c);
        return code_of([&] { check_config(c); }) == Errc::InvalidArgument;
    };
    CHECK_NOTHROW(check_config(SearchConfig{}));
    CHECK(rejects([](SearchConfig& c) { c.lambda = 2; }));
    CHECK(rejects([](SearchConfig& c) { c.eta_plus = 2.5; }));
    CHECK(rejects([](SearchConfig& c) { c.eta_plus = 0.5; }));
    CHECK(rejects([](SearchConfig& c) { c.budgets = {}; }));
    CHECK(rejects([](SearchConfig& c) { c.budgets = {4, 5}; }));
    CHECK(rejects([](SearchConfig& c) { c.budgets = {4, 4}; }));
    CHECK(rejects([](SearchConfig& c) { c.p_edge = 1.5; }));
    CHECK(rejects([](SearchConfig& c) { c.p_node = -0.1; }));
    CHECK(rejects([](SearchConfig& c) { c.reference = ReferencePoint{{1.0}}; }));
    CHECK(rejects([](SearchConfig& c) { c.iterations = -1; }));
    CHECK(rejects([](SearchConfig& c) { c.max_repair_attempts = 0; }));
}

TEST_CASE("random_valid_spec yields valid full-width cells")
{
    std::mt19937_64 rng(1);
    const SpaceConstraints space{7, 9};
    for (int i = 0; i < 500; ++i) {
        const CellSpec s = random_valid_spec(space, rng);
        CHECK(s.num_vertices() == 7);
        CHECK(validate(s, space) == ValidationResult::Ok);
    }
}

TEST_CASE("perturb_pass flip and relabel rates")
{
    std::mt19937_64 rng(2);
    std::mt19937_64 gen(3);
    const SpaceConstraints space{7, 9};
    const CellSpec base = random_valid_spec(space, gen);
    const int draws = 20000;
    double flips = 0.0;
    double labels = 0.0;
    for (int i = 0; i < draws; ++i) {
        const PassOutcome out = perturb_pass(base, 2.0 / 21.0, 0.1, rng);
        flips += out.edge_flips;
        labels += out.label_changes;
        for (int v = 1; v < 6; ++v) {
            if (out.spec.op(v) != base.op(v)) {
                CHECK(is_interior(out.spec.op(v)));
            }
        }
        CHECK(out.spec.op(0) == Operation::Input);
        CHECK(out.spec.op(6) == Operation::Output);
    }
    CHECK(flips / draws == doctest::Approx(2.0).epsilon(0.05));
    CHECK(labels / draws == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("perturb always changes the encoding and stays valid")
{
    std::mt19937_64 rng(4);
    const SpaceConstraints space{7, 9};
    SearchConfig cfg;
    for (int i = 0; i < 2000; ++i) {
        const CellSpec s = random_valid_spec(space, rng);
        const CellSpec t = perturb(s, cfg, space, rng);
        CHECK(!(t == s));
        CHECK(validate(t, space) == ValidationResult::Ok);
    }
}

TEST_CASE("perturb on a 2-vertex space restores the input-output edge")
{
    const SpaceConstraints space{2, 9};
    SearchConfig cfg;
    cfg.p_edge = 1.0;
    cfg.p_node = 0.0;
    std::mt19937_64 rng(5);
    const CellSpec s = random_valid_spec(space, rng);
    const CellSpec t = perturb(s, cfg, space, rng);
    CHECK(validate(t, space) == ValidationResult::Ok);

    const BenchmarkTable tiny = synth_generate(space, 1);
    const TableOracle oracle(tiny);
    cfg.iterations = 5;
    cfg.lambda = 3;
    const RunResult r = semoa_run(cfg, oracle);
    CHECK(r.hv_history.size() == 6);
    CHECK(r.archive.size() >= 1);

    cfg.p_edge = 0.0;
    CHECK(code_of([&] { (void)perturb(s, cfg, space, rng); }) == Errc::InvalidArgument);
}

TEST_CASE("linear_rank_sample")
{
    const ReferencePoint ref{{1.0, 1.0}};
    std::mt19937_64 rng(6);
    const ParetoArchive one = {{{0.5, 0.5}, {}}};
    const auto idx = linear_rank_sample(one, 10, ref, 2.0, rng);
    CHECK(idx == std::vector<std::size_t>(10, 0));

    // Ten points on a convex front with distinct contributions.
    ParetoArchive front;
    for (int i = 0; i < 10; ++i) {
        const double x = 0.05 + 0.09 * i + (i == 4 ? 0.02 : 0.0);
        front.push_back({{x, (1.0 - x) * (1.0 - x)}, Payload{{}, i}});
    }
    const std::vector<double> contrib = contributions(front, ref);
    std::size_t worst = 0;
    for (std::size_t i = 1; i < contrib.size(); ++i) {
        if (contrib[i] < contrib[worst]) {
            worst = i;
        }
    }
    const std::size_t e0 = extreme_index(front, 0);
    const std::size_t e1 = extreme_index(front, 1);
    REQUIRE(worst != e0);
    REQUIRE(worst != e1);
    for (int rep = 0; rep < 2000; ++rep) {
        const auto sel = linear_rank_sample(front, 10, ref, 2.0, rng);
        REQUIRE(sel.size() == 10);
        CHECK(sel[0] == e0);
        CHECK(sel[1] == e1);
        CHECK(std::find(sel.begin() + 2, sel.end(), worst) == sel.end());
    }
    CHECK(code_of([&] { (void)linear_rank_sample(ParetoArchive{}, 10, ref, 2.0, rng); }) == Errc::EmptyArchive);
}

TEST_CASE("semoa run invariants")
{
    const TableOracle oracle(table4());
    const SearchConfig cfg = small_config(7);
    const RunResult r = semoa_run(cfg, oracle);
    CHECK(r.hv_history.size() == static_cast<std::size_t>(cfg.iterations + 1));
    CHECK(std::is_sorted(r.hv_history.begin(), r.hv_history.end()));
    CHECK(r.query_count == static_cast<std::size_t>((cfg.lambda + cfg.iterations * cfg.lambda) * 4));
    CHECK(mutually_nondominated(r.archive));
    CHECK(r.hv_history.back() == hypervolume_2d(r.archive, r.reference));
    CHECK(r.reference.r[0] == 1.0);
    CHECK(r.reference.r[1] == doctest::Approx(1.1 * table4().max_energy(108)));
    for (const auto& p : r.archive) {
        REQUIRE(r.specs.count(p.payload.key) == 1);
        CHECK(validate(r.specs.at(p.payload.key), table4().constraints()) == ValidationResult::Ok);
        CHECK(canonical_key(r.specs.at(p.payload.key)) == p.payload.key);
    }
    CHECK(r.energy_extreme.energy_kwh <= r.knee.energy_kwh);
    CHECK(r.accuracy_extreme.validation_accuracy >= r.knee.validation_accuracy);

    const RunResult again = semoa_run(cfg, oracle);
    CHECK(again.archive == r.archive);
    CHECK(again.hv_history == r.hv_history);
}

TEST_CASE("semoa with fewer budgets")
{
    const TableOracle oracle(table4());
    SearchConfig cfg = small_config(8);
    cfg.budgets = {4, 108};
    cfg.iterations = 7;
    const RunResult r = semoa_run(cfg, oracle);
    CHECK(r.query_count == static_cast<std::size_t>((cfg.lambda + 7 * cfg.lambda) * 2));
    for (const auto& p : r.archive) {
        CHECK((p.payload.budget == 4 || p.payload.budget == 108));
    }
}

TEST_CASE("hv_history is monotone across seeds on 5V")
{
    const TableOracle oracle(table5());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const RunResult r = semoa_run(small_config(seed), oracle);
        CHECK(std::is_sorted(r.hv_history.begin(), r.hv_history.end()));
        CHECK(mutually_nondominated(r.archive));
    }
}

TEST_CASE("random search")
{
    const TableOracle oracle(table4());
    SearchConfig cfg;
    cfg.seed = 9;
    const RunResult one = random_search(cfg, oracle, 1, ObjectiveMode::Multi);
    CHECK(one.archive.size() <= 4);
    CHECK(one.query_count == 4);
    std::set<CanonicalKey> keys;
    for (const auto& p : one.archive) {
        keys.insert(p.payload.key);
    }
    CHECK(keys.size() == 1);

    const RunResult multi = random_search(cfg, oracle, 300, ObjectiveMode::Multi);
    CHECK(mutually_nondominated(multi.archive));
    CHECK(multi.hv_history.size() == 300);
    CHECK(std::is_sorted(multi.hv_history.begin(), multi.hv_history.end()));

    // With many draws the single-objective incumbent is the table's best.
    double best = -1.0;
    for (const auto& [key, rec] : table4().records()) {
        for (const auto& [b, m] : rec.metrics) {
            best = std::max(best, m.validation_accuracy);
        }
    }
    const RunResult single = random_search(cfg, oracle, 2000, ObjectiveMode::Single);
    REQUIRE(single.archive.size() == 1);
    CHECK(1.0 - single.archive[0].values[0] == doctest::Approx(best).epsilon(1e-15));
    CHECK(code_of([&] { (void)random_search(cfg, oracle, 0, ObjectiveMode::Multi); }) == Errc::InvalidArgument);
}

TEST_CASE("run_trials is independent of scheduling")
{
    const TableOracle oracle(table4());
    SearchConfig cfg = small_config(10);
    cfg.iterations = 10;
    const TrialsReport a = run_trials(cfg, oracle, 4, Algorithm::Semoa, 1);
    const TrialsReport b = run_trials(cfg, oracle, 4, Algorithm::Semoa, 4);
    REQUIRE(a.runs.size() == 4);
    CHECK(a.failed_trials.empty());
    for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(a.runs[i].has_value());
        CHECK(a.trial_seeds[i] == trial_seed(10, i));
        CHECK(a.runs[i]->archive == b.runs[i]->archive);
        CHECK(a.runs[i]->hv_history == b.runs[i]->hv_history);
    }
    CHECK(a.final_hypervolume.mean == b.final_hypervolume.mean);
    CHECK(a.attainment.grid == b.attainment.grid);
    const nlohmann::ordered_json cj = config_json(cfg, oracle.constraints());
    CHECK(trials_report_json(a, cj).dump() == trials_report_json(b, cj).dump());

    const TrialsReport single = run_trials(cfg, oracle, 1, Algorithm::Semoa, 1);
    CHECK(single.final_hypervolume.std == 0.0);
    CHECK(single.knee.energy_kwh.std == 0.0);
    CHECK(single.runs[0]->archive == a.runs[0]->archive);
}

TEST_CASE("run_trials reports failed trials")
{
    // An oracle that refuses one budget makes every trial fail.
    struct Broken final : EvalOracle {
        const BenchmarkTable& t;
        explicit Broken(const BenchmarkTable& table) : t(table) {}
        Evaluation evaluate(const CellSpec&, int) const override
        {
            throw Error(Errc::MissingBudget, "nope");
        }
        SpaceConstraints constraints() const override { return t.constraints(); }
        double max_energy(int b) const override { return t.max_energy(b); }
    };
    const Broken oracle(table4());
    const TrialsReport r = run_trials(small_config(1), oracle, 3, Algorithm::Random, 2);
    CHECK(r.failed_trials == std::vector<std::size_t>{0, 1, 2});
    CHECK(r.failure_messages.size() == 3);
    CHECK(std::none_of(r.runs.begin(), r.runs.end(), [](const auto& x) { return x.has_value(); }));
}

TEST_CASE("algorithm names")
{
    for (Algorithm a : {Algorithm::Semoa, Algorithm::Random, Algorithm::Soo}) {
        CHECK(algorithm_from_string(to_string(a)) == a);
    }
    CHECK(code_of([] { (void)algorithm_from_string("grid"); }) == Errc::InvalidArgument);
}

TEST_CASE("surrogate oracle")
{
    MLPModel m = make_model(kSurrogateLayerDims, 3);
    m.normalization.target_mean = 0.05;
    m.normalization.target_std = 0.01;
    const SurrogateOracle oracle(table4(), m);
    double max_base = 0.0;
    for (const auto& [key, rec] : table4().records()) {
        const double base = std::max(0.0, predict_energy(m, rec.spec, rec.trainable_parameters, 4));
        max_base = std::max(max_base, base);
        const Evaluation e = oracle.evaluate(rec.spec, 36);
        CHECK(e.point.values[1] == doctest::Approx(9.0 * base).epsilon(1e-14));
        CHECK(e.metrics.energy_kwh == e.point.values[1]);
        CHECK(e.point.values[0] == 1.0 - rec.metrics.at(36).validation_accuracy);
        CHECK(e.trainable_parameters == rec.trainable_parameters);
    }
    CHECK(oracle.max_energy(108) == doctest::Approx(27.0 * max_base));
    SearchConfig cfg = small_config(4);
    cfg.iterations = 5;
    const RunResult r = semoa_run(cfg, oracle);
    CHECK(std::is_sorted(r.hv_history.begin(), r.hv_history.end()));
}

TEST_CASE("run result JSON layout")
{
    const TableOracle oracle(table4());
    SearchConfig cfg = small_config(12);
    cfg.iterations = 3;
    const RunResult r = semoa_run(cfg, oracle);
    const nlohmann::ordered_json j = run_result_json(r, config_json(cfg, oracle.constraints()));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        keys.push_back(k);
    }
    CHECK(keys == std::vector<std::string>{"config", "seed", "reference", "query_count", "hv_history", "archive",
                                           "energy_extreme", "accuracy_extreme", "knee"});
    CHECK(j["archive"].size() == r.archive.size());
    CHECK(j["hv_history"].size() == 4);
}
