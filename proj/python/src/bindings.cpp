// Python bindings. Cells cross the boundary as (adjacency, operation names);
// structured results cross as JSON text and are decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "greennas/benchstore.hpp"
#include "greennas/cellspace.hpp"
#include "greennas/error.hpp"
#include "greennas/mocore.hpp"
#include "greennas/search.hpp"
#include "greennas/surrogate.hpp"

namespace py = pybind11;
using namespace greennas;

namespace {

using Matrix = std::vector<std::vector<int>>;

CellSpec make_spec(const Matrix& adjacency, const std::vector<std::string>& ops)
{
    std::vector<Operation> labels;
    labels.reserve(ops.size());
    for (const auto& name : ops) {
        labels.push_back(operation_from_string(name));
    }
    return CellSpec::from_matrix(adjacency, labels);
}

ParetoArchive to_points(const std::vector<std::vector<double>>& values)
{
    ParetoArchive out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.push_back({values[i], Payload{{}, static_cast<int>(i)}});
    }
    return out;
}

SpaceConstraints space_of(int max_vertices, int max_edges) { return {max_vertices, max_edges}; }

}  // namespace

PYBIND11_MODULE(_greennas, m)
{
    m.doc() = "Energy-aware cell-based architecture search core";
    m.attr("__version__") = GREENNAS_VERSION;

    static py::exception<Error> error_type(m, "GreennasError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object err = py::handle(error_type.ptr())(e.what());
            err.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    // ---- cells
    m.def(
        "validate",
        [](const Matrix& adj, const std::vector<std::string>& ops, int max_vertices, int max_edges) {
            return std::string(to_string(validate(make_spec(adj, ops), space_of(max_vertices, max_edges))));
        },
        py::arg("adjacency"), py::arg("ops"), py::arg("max_vertices") = kMaxVertices,
        py::arg("max_edges") = kDefaultMaxEdges);
    m.def(
        "canonical_key", [](const Matrix& adj, const std::vector<std::string>& ops) {
            return canonical_key(make_spec(adj, ops)).hex();
        },
        py::arg("adjacency"), py::arg("ops"));
    m.def(
        "canonical_form", [](const Matrix& adj, const std::vector<std::string>& ops) {
            return to_json(canonical_form(make_spec(adj, ops))).dump();
        },
        py::arg("adjacency"), py::arg("ops"));
    m.def(
        "count_parameters", [](const Matrix& adj, const std::vector<std::string>& ops) {
            return count_parameters(make_spec(adj, ops));
        },
        py::arg("adjacency"), py::arg("ops"));
    m.def(
        "featurize",
        [](const Matrix& adj, const std::vector<std::string>& ops, std::int64_t params) {
            const FeatureVector x = featurize(make_spec(adj, ops), params);
            return std::vector<double>(x.begin(), x.end());
        },
        py::arg("adjacency"), py::arg("ops"), py::arg("trainable_parameters"));
    m.def(
        "enumerate_space",
        [](int max_vertices, int max_edges, bool allow_long_run) {
            EnumerateOptions opts;
            opts.allow_long_run = allow_long_run;
            std::vector<CellSpec> specs;
            {
                py::gil_scoped_release release;
                specs = enumerate_space(space_of(max_vertices, max_edges), opts);
            }
            std::vector<std::string> out;
            out.reserve(specs.size());
            for (const auto& s : specs) {
                out.push_back(to_json(s).dump());
            }
            return out;
        },
        py::arg("max_vertices"), py::arg("max_edges") = kDefaultMaxEdges, py::arg("allow_long_run") = false);

    // ---- tables
    m.def(
        "synth_table",
        [](int max_vertices, std::uint64_t seed, const std::string& path) {
            const BenchmarkTable t = synth_generate(space_of(max_vertices, kDefaultMaxEdges), seed);
            save_table(t, path);
            return t.size();
        },
        py::arg("max_vertices"), py::arg("seed"), py::arg("path"));
    m.def(
        "table_size", [](const std::string& path) { return load_table(path).size(); }, py::arg("path"));
    m.def(
        "rank_correlation",
        [](const std::vector<double>& a, const std::vector<double>& b) { return rank_correlation(a, b); },
        py::arg("a"), py::arg("b"));
    m.def(
        "opswap_analysis",
        [](const std::string& path, int budget) {
            std::vector<py::dict> rows;
            for (const auto& r : opswap_analysis(load_table(path), budget)) {
                py::dict d;
                d["from"] = std::string(to_string(r.from));
                d["to"] = std::string(to_string(r.to));
                d["pairs"] = r.pairs;
                d["delta_validation_accuracy"] = r.delta_validation_accuracy;
                d["pct_energy"] = r.pct_energy;
                d["pct_time"] = r.pct_time;
                d["pct_parameters"] = r.pct_parameters;
                rows.push_back(std::move(d));
            }
            return rows;
        },
        py::arg("path"), py::arg("budget") = 108);

    // ---- surrogate
    m.def(
        "train_surrogate",
        [](const std::string& table_path, int budget, std::uint64_t seed, int epochs, int batch_size,
           const std::string& out_path) {
            const BenchmarkTable t = load_table(table_path);
            TrainConfig cfg;
            cfg.seed = seed;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(t, budget, cfg);
            }
            if (!out_path.empty()) {
                save_model(r.model, out_path);
            }
            py::dict d;
            d["train"] = r.report.split.train;
            d["validation"] = r.report.split.validation;
            d["test"] = r.report.split.test;
            d["pearson_r"] = r.report.test_pearson_r;
            d["mae_kwh"] = r.report.test_mae_kwh;
            d["baseline_mae_kwh"] = r.report.baseline_test_mae_kwh;
            d["best_epoch"] = r.report.best_epoch;
            return d;
        },
        py::arg("table_path"), py::arg("budget") = 4, py::arg("seed") = 0, py::arg("epochs") = 200,
        py::arg("batch_size") = 64, py::arg("out_path") = "");
    m.def(
        "predict_energy",
        [](const std::string& model_path, const Matrix& adj, const std::vector<std::string>& ops, int budget) {
            const CellSpec s = make_spec(adj, ops);
            return predict_energy(load_model(model_path), s, count_parameters(s), budget);
        },
        py::arg("model_path"), py::arg("adjacency"), py::arg("ops"), py::arg("budget"));

    // ---- multi-objective helpers (minimization, one row per point)
    m.def(
        "ndom",
        [](const std::vector<std::vector<double>>& values) {
            std::vector<int> idx;
            for (const auto& p : ndom(to_points(values))) {
                idx.push_back(p.payload.budget);
            }
            return idx;
        },
        py::arg("points"), "Indices of the non-dominated points, in input order.");
    m.def(
        "hypervolume_2d",
        [](const std::vector<std::vector<double>>& values, const std::vector<double>& ref) {
            return hypervolume_2d(to_points(values), ReferencePoint{ref});
        },
        py::arg("points"), py::arg("reference"));
    m.def(
        "contributions",
        [](const std::vector<std::vector<double>>& values, const std::vector<double>& ref) {
            return contributions(to_points(values), ReferencePoint{ref});
        },
        py::arg("points"), py::arg("reference"));
    m.def("linear_rank_probs", &linear_rank_probs, py::arg("n"), py::arg("eta_plus") = 2.0);
    m.def(
        "knee_point", [](const std::vector<std::vector<double>>& values) { return knee_point(to_points(values)); },
        py::arg("points"));

    // ---- search
    m.def(
        "search",
        [](const std::string& table_path, const std::string& algo, std::uint64_t seed, int iterations, int lambda,
           int trials, const std::vector<int>& budgets, int queries, const std::string& surrogate_path) {
            const BenchmarkTable t = load_table(table_path);
            SearchConfig cfg;
            cfg.seed = seed;
            cfg.iterations = iterations;
            cfg.lambda = lambda;
            cfg.budgets = budgets;
            cfg.num_queries = queries;
            const Algorithm a = algorithm_from_string(algo);
            TrialsReport report;
            {
                py::gil_scoped_release release;
                if (surrogate_path.empty()) {
                    const TableOracle oracle(t);
                    report = run_trials(cfg, oracle, trials, a);
                } else {
                    const SurrogateOracle oracle(t, load_model(surrogate_path));
                    report = run_trials(cfg, oracle, trials, a);
                }
            }
            const nlohmann::ordered_json cj = config_json(cfg, t.constraints());
            nlohmann::ordered_json j = trials_report_json(report, cj);
            nlohmann::ordered_json runs = nlohmann::ordered_json::array();
            for (const auto& run : report.runs) {
                runs.push_back(run ? run_result_json(*run, cj) : nlohmann::ordered_json());
            }
            j["runs"] = std::move(runs);
            return j.dump();
        },
        py::arg("table_path"), py::arg("algo") = "semoa", py::arg("seed") = 0, py::arg("iterations") = 100,
        py::arg("population") = 10, py::arg("trials") = 10, py::arg("budgets") = std::vector<int>{4, 12, 36, 108},
        py::arg("queries") = 1000, py::arg("surrogate_path") = "");
}
