// Drives the built command-line tool and checks exit codes, outputs and
// rerun determinism.

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome run(const std::string& args)
{
    const std::string cmd = std::string(GREENNAS_CLI) + " " + args + " 2>/dev/null";
    Outcome o;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) {
        o.out += buf.data();
    }
    const int status = pclose(pipe);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        n += line.empty() ? 0 : 1;
    }
    return n;
}

fs::path workdir()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "greennas_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

const std::string& table4()
{
    static const std::string path = [] {
        const std::string p = at("t4.jsonl");
        REQUIRE(run("synth --vertices 4 --seed 3 --out " + p).code == 0);
        return p;
    }();
    return path;
}

}  // namespace

TEST_CASE("enumerate")
{
    const Outcome four = run("enumerate --vertices 4 --out " + at("e4.jsonl"));
    CHECK(four.code == 0);
    CHECK(four.out == "91\n");
    CHECK(line_count(at("e4.jsonl")) == 91);
    CHECK(fs::exists(at("e4.jsonl.meta.json")));
    CHECK(run("enumerate --vertices 5").out == "2532\n");
    CHECK(run("enumerate --vertices 7").code == 2);
    CHECK(run("enumerate").code == 1);
    CHECK(run("enumerate --vertices 9").code == 1);
}

TEST_CASE("synth")
{
    const std::string a = at("s_a.jsonl");
    const std::string b = at("s_b.jsonl");
    CHECK(run("synth --vertices 4 --seed 5 --out " + a).out == "91\n");
    CHECK(run("synth --vertices 4 --seed 5 --out " + b).code == 0);
    CHECK(slurp(a) == slurp(b));
    const std::string meta_before = slurp(a + ".meta.json");
    CHECK(run("synth --vertices 4 --seed 5 --out " + a).code == 0);
    CHECK(slurp(a + ".meta.json") == meta_before);
    CHECK(line_count(a) == 91);
    const auto meta = nlohmann::json::parse(slurp(a + ".meta.json"));
    CHECK(meta["seed"] == 5);
    CHECK(meta["command"] == "synth");
    CHECK(meta["flags"]["vertices"] == "4");
    CHECK(run("synth --vertices 7 --seed 1 --out " + at("s7.jsonl")).code == 2);
    CHECK(run("synth --vertices 4 --seed 1 --out /nonexistent_dir/x.jsonl").code == 3);
}

TEST_CASE("train-surrogate")
{
    const std::string r1 = at("rep1.json");
    const std::string cmd = "train-surrogate --table " + table4() + " --seed 2 --epochs 30 --batch-size 16 --out " +
                            at("m1.json") + " --report " + r1;
    CHECK(run(cmd).code == 0);
    const std::string report_before = slurp(r1);
    const std::string model_before = slurp(at("m1.json"));
    CHECK(run(cmd).code == 0);
    CHECK(slurp(r1) == report_before);
    CHECK(slurp(at("m1.json")) == model_before);
    const auto rep = nlohmann::json::parse(slurp(r1));
    CHECK(rep["split"]["train"] == 64);
    CHECK(rep["split"]["validation"] == 9);
    CHECK(rep["split"]["test"] == 18);
    CHECK(rep["target_budget"] == 4);
    const auto model = nlohmann::json::parse(slurp(at("m1.json")));
    CHECK(model["layer_dims"] == nlohmann::json::array({36, 128, 64, 32, 1}));

    // Nine records cannot be split.
    std::ifstream in(table4());
    std::ofstream small(at("t_small.jsonl"));
    std::string line;
    for (int i = 0; i < 9 && std::getline(in, line); ++i) {
        small << line << "\n";
    }
    small.close();
    CHECK(run("train-surrogate --table " + at("t_small.jsonl") + " --out " + at("m_small.json")).code == 4);
    CHECK(run("train-surrogate --table " + at("missing.jsonl") + " --out " + at("m_x.json")).code == 3);
}

TEST_CASE("search")
{
    const std::string cmd = "search --algo semoa --table " + table4() +
                            " --iterations 15 --trials 3 --seed 4 --out-dir " + at("run_a");
    const std::vector<std::string> files = {"run_result.json",          "front.csv",          "attainment.csv",
                                            "trial_00/run_result.json", "trial_02/front.csv", "trial_01/attainment.csv",
                                            "front.csv.meta.json"};
    const Outcome a = run(cmd);
    CHECK(a.code == 0);
    CHECK(a.out.find("rk: ") != std::string::npos);
    std::vector<std::string> before;
    for (const auto& f : files) {
        CAPTURE(f);
        REQUIRE(fs::exists(workdir() / "run_a" / f));
        before.push_back(slurp(workdir() / "run_a" / f));
    }
    const Outcome b = run(cmd);
    CHECK(a.out == b.out);
    for (std::size_t i = 0; i < files.size(); ++i) {
        CAPTURE(files[i]);
        CHECK(slurp(workdir() / "run_a" / files[i]) == before[i]);
    }
    const auto trial = nlohmann::json::parse(slurp(workdir() / "run_a" / "trial_00" / "run_result.json"));
    CHECK(trial["query_count"] == (10 + 15 * 10) * 4);
    CHECK(trial["hv_history"].size() == 16);
    CHECK(slurp(workdir() / "run_a" / "front.csv").rfind("f1,f2,key,budget\n", 0) == 0);

    const Outcome rnd = run("search --algo random --table " + table4() + " --trials 1 --budgets 4,108 --out-dir " +
                            at("run_rnd"));
    CHECK(rnd.code == 0);
    const auto rj = nlohmann::json::parse(slurp(workdir() / "run_rnd" / "trial_00" / "run_result.json"));
    CHECK(rj["query_count"] == 1000 * 2);

    CHECK(run("search --algo semoa --out-dir " + at("run_x")).code == 1);
    CHECK(run("search --algo bogus --table " + table4() + " --out-dir " + at("run_x")).code == 1);
    CHECK(run("search --algo semoa --table " + table4() + " --budgets 5 --out-dir " + at("run_x")).code == 1);
}

TEST_CASE("search with a surrogate checkpoint")
{
    REQUIRE(run("train-surrogate --table " + table4() + " --epochs 20 --out " + at("m_s.json")).code == 0);
    const Outcome o = run("search --algo semoa --table " + table4() + " --surrogate " + at("m_s.json") +
                          " --iterations 5 --trials 2 --out-dir " + at("run_s"));
    CHECK(o.code == 0);
    CHECK(fs::exists(workdir() / "run_s" / "run_result.json"));
}

TEST_CASE("analyze")
{
    const Outcome rc = run("analyze --table " + table4() + " --mode rank-corr --other " + table4() + " --out " +
                           at("rc.csv"));
    CHECK(rc.code == 0);
    std::istringstream lines(rc.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "metric,matched,rho");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.substr(line.rfind(',') + 1) == "1");
    }
    CHECK(rows > 0);
    CHECK(slurp(at("rc.csv")) == rc.out);

    const Outcome op = run("analyze --table " + table4() + " --mode opswap --out " + at("op.csv"));
    CHECK(op.code == 0);
    std::istringstream ol(op.out);
    std::getline(ol, line);
    while (std::getline(ol, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) {
            cells.push_back(c);
        }
        REQUIRE(cells.size() == 7);
        if (cells[0] == cells[1]) {
            CHECK(cells[3] == "0");
            CHECK(cells[4] == "0");
        }
    }

    CHECK(run("analyze --table " + table4() + " --mode size-stats --out " + at("ss.csv")).code == 0);
    CHECK(run("analyze --table " + table4() + " --mode rank-corr --out " + at("rc2.csv")).code == 1);

    REQUIRE(run("synth --vertices 2 --seed 1 --out " + at("t2.jsonl")).code == 0);
    CHECK(run("analyze --table " + at("t2.jsonl") + " --mode opswap --out " + at("op2.csv")).code == 6);
}
