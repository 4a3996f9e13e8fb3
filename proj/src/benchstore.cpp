#include "greennas/benchstore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "greennas/hashing.hpp"

namespace greennas {

namespace {

using ojson = nlohmann::ordered_json;

double required_number(const nlohmann::json& obj, const char* field)
{
    if (!obj.contains(field) || !obj.at(field).is_number()) {
        throw Error(Errc::ParseError, std::string("missing or non-numeric field '") + field + "'");
    }
    return obj.at(field).get<double>();
}

BudgetMetrics parse_metrics(const nlohmann::json& obj)
{
    if (!obj.is_object()) {
        throw Error(Errc::ParseError, "budget metrics must be an object");
    }
    BudgetMetrics m;
    m.train_accuracy = required_number(obj, "train_accuracy");
    m.validation_accuracy = required_number(obj, "validation_accuracy");
    m.test_accuracy = required_number(obj, "test_accuracy");
    m.training_time_s = required_number(obj, "training_time_s");
    m.energy_kwh = required_number(obj, "energy_kwh");
    m.avg_power_w = required_number(obj, "avg_power_w");
    m.co2eq_kg = required_number(obj, "co2eq_kg");
    if (obj.contains("carbon_intensity_g_per_kwh") && !obj.at("carbon_intensity_g_per_kwh").is_null()) {
        m.carbon_intensity_g_per_kwh = required_number(obj, "carbon_intensity_g_per_kwh");
    }
    for (double acc : {m.train_accuracy, m.validation_accuracy, m.test_accuracy}) {
        if (!(acc >= 0.0 && acc <= 1.0)) {
            throw Error(Errc::ParseError, "accuracy outside [0, 1]");
        }
    }
    for (double v : {m.training_time_s, m.energy_kwh, m.avg_power_w, m.co2eq_kg}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(Errc::ParseError, "time, energy, power and co2 must be finite and non-negative");
        }
    }
    if (m.carbon_intensity_g_per_kwh && !(*m.carbon_intensity_g_per_kwh >= 0.0)) {
        throw Error(Errc::ParseError, "carbon intensity must be non-negative");
    }
    return m;
}

ojson metrics_json(const BudgetMetrics& m)
{
    ojson j;
    j["train_accuracy"] = m.train_accuracy;
    j["validation_accuracy"] = m.validation_accuracy;
    j["test_accuracy"] = m.test_accuracy;
    j["training_time_s"] = m.training_time_s;
    j["energy_kwh"] = m.energy_kwh;
    j["avg_power_w"] = m.avg_power_w;
    j["co2eq_kg"] = m.co2eq_kg;
    if (m.carbon_intensity_g_per_kwh) {
        j["carbon_intensity_g_per_kwh"] = *m.carbon_intensity_g_per_kwh;
    } else {
        j["carbon_intensity_g_per_kwh"] = nullptr;
    }
    return j;
}

MeanStd mean_std(const std::vector<double>& xs)
{
    MeanStd out;
    if (xs.empty()) {
        return out;
    }
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - out.mean) * (x - out.mean);
        }
        out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> xs)
{
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

void BenchmarkTable::insert(ArchRecord record)
{
    if (auto r = validate(record.spec, constraints_); r != ValidationResult::Ok) {
        throw Error(Errc::InvalidSpec, "record spec fails validation: " + std::string(to_string(r)));
    }
    if (canonical_key(record.spec) != record.key) {
        throw Error(Errc::InvalidSpec, "stored key does not match the spec's canonical key");
    }
    for (const auto& [budget, m] : record.metrics) {
        if (!is_budget(budget)) {
            throw Error(Errc::InvalidSpec, "unsupported budget " + std::to_string(budget));
        }
    }
    const CanonicalKey key = record.key;
    if (!records_.emplace(key, std::move(record)).second) {
        throw Error(Errc::DuplicateKey, key.hex());
    }
}

const ArchRecord* BenchmarkTable::find(const CanonicalKey& key) const
{
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
}

double BenchmarkTable::max_energy(int budget) const
{
    double best = 0.0;
    for (const auto& [key, rec] : records_) {
        if (auto it = rec.metrics.find(budget); it != rec.metrics.end()) {
            best = std::max(best, it->second.energy_kwh);
        }
    }
    return best;
}

std::string serialize_record(const ArchRecord& record)
{
    ojson j;
    j["key"] = record.key.hex();
    const nlohmann::json spec = to_json(record.spec);
    j["module_adjacency"] = spec.at("module_adjacency");
    j["module_operations"] = spec.at("module_operations");
    j["trainable_parameters"] = record.trainable_parameters;
    ojson metrics = ojson::object();
    for (const auto& [budget, m] : record.metrics) {
        metrics[std::to_string(budget)] = metrics_json(m);
    }
    j["metrics"] = std::move(metrics);
    return j.dump();
}

ArchRecord parse_record(const std::string& line)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    if (!j.is_object()) {
        throw Error(Errc::ParseError, "record must be a JSON object");
    }
    ArchRecord rec;
    if (!j.contains("key") || !j.at("key").is_string()) {
        throw Error(Errc::ParseError, "missing key");
    }
    rec.key = CanonicalKey::from_hex(j.at("key").get<std::string>());
    try {
        rec.spec = spec_from_json(j);
    } catch (const Error& e) {
        throw Error(Errc::InvalidSpec, e.what());
    }
    if (!j.contains("trainable_parameters") || !j.at("trainable_parameters").is_number_integer() ||
        j.at("trainable_parameters").get<std::int64_t>() < 0) {
        throw Error(Errc::ParseError, "trainable_parameters must be a non-negative integer");
    }
    rec.trainable_parameters = j.at("trainable_parameters").get<std::int64_t>();
    if (!j.contains("metrics") || !j.at("metrics").is_object()) {
        throw Error(Errc::ParseError, "missing metrics object");
    }
    for (const auto& [name, value] : j.at("metrics").items()) {
        int budget = 0;
        try {
            std::size_t used = 0;
            budget = std::stoi(name, &used);
            if (used != name.size()) {
                budget = 0;
            }
        } catch (const std::exception&) {
            budget = 0;
        }
        if (!is_budget(budget)) {
            throw Error(Errc::ParseError, "unsupported budget '" + name + "'");
        }
        rec.metrics.emplace(budget, parse_metrics(value));
    }
    return rec;
}

BenchmarkTable load_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open " + path.string());
    }
    std::vector<ArchRecord> parsed;
    std::string line;
    std::size_t line_no = 0;
    int widest = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            parsed.push_back(parse_record(line));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.detail());
        }
        widest = std::max(widest, parsed.back().spec.num_vertices());
    }
    BenchmarkTable table(SpaceConstraints{widest, kDefaultMaxEdges}, path.string());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        try {
            table.insert(std::move(parsed[i]));
        } catch (const Error& e) {
            throw Error(e.code(), e.detail() + " (record " + std::to_string(i + 1) + ")");
        }
    }
    return table;
}

void save_table(const BenchmarkTable& table, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::Io, "cannot write " + path.string());
    }
    for (const auto& [key, rec] : table.records()) {
        out << serialize_record(rec) << '\n';
    }
    if (!out) {
        throw Error(Errc::Io, "write failed for " + path.string());
    }
}

const BudgetMetrics& query(const BenchmarkTable& table, const CanonicalKey& key, int budget)
{
    const ArchRecord* rec = table.find(key);
    if (rec == nullptr) {
        throw Error(Errc::MissingKey, key.hex());
    }
    auto it = rec->metrics.find(budget);
    if (it == rec->metrics.end()) {
        throw Error(Errc::MissingBudget, key.hex() + " @ " + std::to_string(budget));
    }
    return it->second;
}

double scale_energy(double energy_kwh, int from_budget, int to_budget)
{
    if (from_budget <= 0 || to_budget < 0) {
        throw Error(Errc::NonpositiveBudget, "budgets must be positive");
    }
    if (from_budget == to_budget) {
        return energy_kwh;
    }
    return energy_kwh * (static_cast<double>(to_budget) / static_cast<double>(from_budget));
}

double scale_energy(const BudgetMetrics& metrics, int from_budget, int to_budget)
{
    return scale_energy(metrics.energy_kwh, from_budget, to_budget);
}

double synth_op_energy(Operation op, const SynthConstants& c) noexcept
{
    switch (op) {
    case Operation::Conv3x3: return c.conv3x3_kwh_per_epoch;
    case Operation::Conv1x1: return c.conv1x1_kwh_per_epoch;
    case Operation::MaxPool3x3: return c.maxpool3x3_kwh_per_epoch;
    default: return 0.0;
    }
}

BenchmarkTable synth_generate(const SpaceConstraints& constraints, std::uint64_t seed, const SynthConstants& c)
{
    if (constraints.max_vertices >= kMaxVertices) {
        throw Error(Errc::ResourceLimit, "synthetic tables are limited to at most 6 vertices");
    }
    const std::vector<CellSpec> specs = enumerate_space(constraints);
    BenchmarkTable table(constraints, "synthetic seed=" + std::to_string(seed));

    for (const CellSpec& spec : specs) {
        ArchRecord rec;
        rec.key = canonical_key(spec);
        rec.spec = spec;
        rec.trainable_parameters = count_parameters(spec);

        // Per-record stream keyed by the canonical key, so values do not
        // depend on enumeration order.
        const std::uint64_t stream = hash_combine(hash_combine(seed, rec.key.hi), rec.key.lo);
        auto draw = [stream](std::uint64_t slot) { return unit_interval(mix64(stream + slot)); };

        double per_epoch = c.base_kwh_per_epoch + c.kwh_per_parameter_epoch * static_cast<double>(rec.trainable_parameters);
        double structural = 0.0;
        const int interior = spec.num_vertices() - 2;
        for (int v = 1; v <= interior; ++v) {
            per_epoch += synth_op_energy(spec.op(v), c);
            switch (spec.op(v)) {
            case Operation::Conv3x3: structural += 1.0; break;
            case Operation::Conv1x1: structural += 0.6; break;
            default: structural += 0.3; break;
            }
        }
        if (interior > 0) {
            structural /= interior;
        }
        const double quality = 0.55 + 0.45 * (0.6 * structural + 0.4 * draw(0));
        const double power = c.nominal_power_w * (0.9 + 0.2 * draw(1));

        for (std::size_t bi = 0; bi < kBudgets.size(); ++bi) {
            const int budget = kBudgets[bi];
            const double noise = 1.0 - c.energy_noise + 2.0 * c.energy_noise * draw(2 + bi);
            BudgetMetrics m;
            m.energy_kwh = budget * per_epoch * noise;
            m.avg_power_w = power;
            m.training_time_s = m.energy_kwh * 3.6e6 / power;
            m.validation_accuracy =
                c.accuracy_ceiling * (1.0 - std::exp(-budget / c.accuracy_time_constant)) * quality;
            m.train_accuracy = std::min(1.0, m.validation_accuracy * 1.04);
            m.test_accuracy = m.validation_accuracy * (0.99 + 0.01 * draw(6 + bi));
            m.carbon_intensity_g_per_kwh = c.carbon_intensity_g_per_kwh;
            m.co2eq_kg = m.energy_kwh * c.carbon_intensity_g_per_kwh / 1000.0;
            rec.metrics.emplace(budget, m);
        }
        table.insert(std::move(rec));
    }
    return table;
}

std::vector<SizeGroup> size_stats(const BenchmarkTable& table, int budget)
{
    if (table.empty()) {
        throw Error(Errc::EmptyTable, "size_stats needs at least one record");
    }
    struct Acc {
        std::size_t count = 0;
        std::vector<double> e, t, acc, params;
    };
    std::map<int, Acc> groups;
    for (const auto& [key, rec] : table.records()) {
        Acc& g = groups[prune(rec.spec).num_vertices()];
        ++g.count;
        auto it = rec.metrics.find(budget);
        if (it == rec.metrics.end()) {
            continue;
        }
        g.e.push_back(it->second.energy_kwh);
        g.t.push_back(it->second.training_time_s);
        g.acc.push_back(it->second.validation_accuracy);
        g.params.push_back(static_cast<double>(rec.trainable_parameters));
    }
    std::vector<SizeGroup> out;
    for (const auto& [vertices, g] : groups) {
        SizeGroup s;
        s.vertices = vertices;
        s.count = g.count;
        s.with_budget = g.e.size();
        s.energy_kwh = mean_std(g.e);
        s.training_time_s = mean_std(g.t);
        s.validation_accuracy = mean_std(g.acc);
        s.trainable_parameters = mean_std(g.params);
        out.push_back(s);
    }
    return out;
}

std::vector<SwapDelta> opswap_analysis(const BenchmarkTable& table, int budget)
{
    constexpr std::array<Operation, 3> ops = kInteriorOps;
    auto op_index = [](Operation op) {
        return static_cast<std::size_t>(std::find(kInteriorOps.begin(), kInteriorOps.end(), op) - kInteriorOps.begin());
    };

    std::array<std::set<std::pair<CanonicalKey, CanonicalKey>>, 9> pair_sets;
    std::array<std::set<CanonicalKey>, 3> holders;

    for (const auto& [key, rec] : table.records()) {
        if (!rec.metrics.contains(budget)) {
            continue;
        }
        for (int v = 1; v < rec.spec.num_vertices() - 1; ++v) {
            const Operation from = rec.spec.op(v);
            holders[op_index(from)].insert(key);
            for (Operation to : ops) {
                if (to == from) {
                    continue;
                }
                const CanonicalKey other = canonical_key(set_label(rec.spec, v, to));
                const ArchRecord* partner = table.find(other);
                if (partner == nullptr || !partner->metrics.contains(budget)) {
                    continue;
                }
                pair_sets[op_index(from) * 3 + op_index(to)].emplace(key, other);
            }
        }
    }

    std::vector<SwapDelta> out;
    bool any = false;
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            SwapDelta d;
            d.from = ops[a];
            d.to = ops[b];
            if (a == b) {
                d.pairs = holders[a].size();
                out.push_back(d);
                continue;
            }
            const auto& pairs = pair_sets[a * 3 + b];
            d.pairs = pairs.size();
            std::size_t pct_n = 0;
            for (const auto& [ka, kb] : pairs) {
                const ArchRecord& ra = *table.find(ka);
                const ArchRecord& rb = *table.find(kb);
                const BudgetMetrics& ma = ra.metrics.at(budget);
                const BudgetMetrics& mb = rb.metrics.at(budget);
                d.delta_validation_accuracy += mb.validation_accuracy - ma.validation_accuracy;
                if (ma.energy_kwh > 0.0 && ma.training_time_s > 0.0 && ra.trainable_parameters > 0) {
                    d.pct_energy += 100.0 * (mb.energy_kwh - ma.energy_kwh) / ma.energy_kwh;
                    d.pct_time += 100.0 * (mb.training_time_s - ma.training_time_s) / ma.training_time_s;
                    d.pct_parameters += 100.0 *
                                        static_cast<double>(rb.trainable_parameters - ra.trainable_parameters) /
                                        static_cast<double>(ra.trainable_parameters);
                    ++pct_n;
                }
            }
            if (!pairs.empty()) {
                any = true;
                d.delta_validation_accuracy /= static_cast<double>(pairs.size());
            }
            if (pct_n > 0) {
                d.pct_energy /= static_cast<double>(pct_n);
                d.pct_time /= static_cast<double>(pct_n);
                d.pct_parameters /= static_cast<double>(pct_n);
            }
            out.push_back(d);
        }
    }
    if (!any) {
        throw Error(Errc::NoSwapPairs, "no pair of records differs by a single interior label");
    }
    return out;
}

double rank_correlation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw Error(Errc::LengthMismatch, "rank_correlation inputs differ in length");
    }
    if (a.size() < 2) {
        throw Error(Errc::TooShort, "rank_correlation needs at least two items");
    }
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<RankCorrelationRow> compare_tables(const BenchmarkTable& a, const BenchmarkTable& b, int budget)
{
    std::vector<double> ea, eb, ta, tb, pa, pb;
    for (const auto& [key, rec] : a.records()) {
        const ArchRecord* other = b.find(key);
        if (other == nullptr) {
            continue;
        }
        auto ia = rec.metrics.find(budget);
        auto ib = other->metrics.find(budget);
        if (ia == rec.metrics.end() || ib == other->metrics.end()) {
            continue;
        }
        ea.push_back(ia->second.energy_kwh);
        eb.push_back(ib->second.energy_kwh);
        ta.push_back(ia->second.training_time_s);
        tb.push_back(ib->second.training_time_s);
        pa.push_back(ia->second.validation_accuracy);
        pb.push_back(ib->second.validation_accuracy);
    }
    return {
        {"energy_kwh", ea.size(), rank_correlation(ea, eb)},
        {"training_time_s", ta.size(), rank_correlation(ta, tb)},
        {"validation_accuracy", pa.size(), rank_correlation(pa, pb)},
    };
}

}  // namespace greennas
