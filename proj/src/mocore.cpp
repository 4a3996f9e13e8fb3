#include "greennas/mocore.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace greennas {

namespace {

void require_2d(std::span<const ObjectivePoint> archive, const ReferencePoint& ref)
{
    if (ref.r.size() != 2) {
        throw Error(Errc::DimensionMismatch, "hypervolume_2d needs a 2-D reference point");
    }
    for (const auto& p : archive) {
        if (p.values.size() != 2) {
            throw Error(Errc::DimensionMismatch, "hypervolume_2d needs 2-D points");
        }
    }
}

double sweep(std::vector<std::pair<double, double>>& pts, double r1, double r2)
{
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double level = r2;
    for (const auto& [f1, f2] : pts) {
        if (f2 < level) {
            area += (r1 - f1) * (level - f2);
            level = f2;
        }
    }
    return area;
}

std::vector<std::pair<double, double>> clipped(std::span<const ObjectivePoint> archive, const ReferencePoint& ref,
                                               std::size_t skip = static_cast<std::size_t>(-1))
{
    std::vector<std::pair<double, double>> pts;
    pts.reserve(archive.size());
    for (std::size_t i = 0; i < archive.size(); ++i) {
        if (i == skip) {
            continue;
        }
        pts.emplace_back(std::min(archive[i].values[0], ref.r[0]), std::min(archive[i].values[1], ref.r[1]));
    }
    return pts;
}

}  // namespace

bool dominates(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw Error(Errc::DimensionMismatch, "objective vectors differ in length");
    }
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        if (a[i] < b[i]) {
            strict = true;
        }
    }
    return strict;
}

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b)
{
    return dominates(std::span<const double>(a.values), std::span<const double>(b.values));
}

ParetoArchive ndom(std::span<const ObjectivePoint> points)
{
    if (points.empty()) {
        return {};
    }
    const std::size_t m = points.front().values.size();
    for (const auto& p : points) {
        if (p.values.size() != m) {
            throw Error(Errc::DimensionMismatch, "mixed objective dimensionality");
        }
    }
    ParetoArchive out;
    if (m == 2) {
        // Lexicographic sweep: a point survives iff no earlier point with a
        // different value vector has f2 <= its f2.
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return points[a].values < points[b].values;
        });
        std::vector<bool> keep(points.size(), false);
        double best_f2 = std::numeric_limits<double>::infinity();
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && points[order[j + 1]].values == points[order[i]].values) {
                ++j;
            }
            const double f2 = points[order[i]].values[1];
            if (f2 < best_f2) {
                for (std::size_t k = i; k <= j; ++k) {
                    keep[order[k]] = true;
                }
                best_f2 = f2;
            }
            i = j + 1;
        }
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (keep[k]) {
                out.push_back(points[k]);
            }
        }
        return out;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
            dominated = j != i && dominates(points[j], points[i]);
        }
        if (!dominated) {
            out.push_back(points[i]);
        }
    }
    return out;
}

double hypervolume_2d(std::span<const ObjectivePoint> archive, const ReferencePoint& ref)
{
    require_2d(archive, ref);
    auto pts = clipped(archive, ref);
    return sweep(pts, ref.r[0], ref.r[1]);
}

std::vector<double> contributions(std::span<const ObjectivePoint> archive, const ReferencePoint& ref)
{
    require_2d(archive, ref);
    auto all = clipped(archive, ref);
    const double total = sweep(all, ref.r[0], ref.r[1]);
    std::vector<double> out(archive.size());
    for (std::size_t i = 0; i < archive.size(); ++i) {
        auto rest = clipped(archive, ref, i);
        out[i] = std::max(0.0, total - sweep(rest, ref.r[0], ref.r[1]));
    }
    return out;
}

double contributing_hv(const ObjectivePoint& x, std::span<const ObjectivePoint> archive, const ReferencePoint& ref)
{
    require_2d(archive, ref);
    auto it = std::find(archive.begin(), archive.end(), x);
    if (it == archive.end()) {
        throw Error(Errc::NotAMember, "point is not in the archive");
    }
    auto all = clipped(archive, ref);
    auto rest = clipped(archive, ref, static_cast<std::size_t>(it - archive.begin()));
    return std::max(0.0, sweep(all, ref.r[0], ref.r[1]) - sweep(rest, ref.r[0], ref.r[1]));
}

MonteCarloEstimate hv_monte_carlo(std::span<const ObjectivePoint> archive, const ReferencePoint& ref,
                                  std::span<const double> lower_bound, std::size_t samples, std::uint64_t seed)
{
    const std::size_t m = ref.r.size();
    if (lower_bound.size() != m) {
        throw Error(Errc::DimensionMismatch, "lower bound and reference differ in length");
    }
    double volume = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(ref.r[i] > lower_bound[i])) {
            throw Error(Errc::DegenerateBox, "reference must exceed the lower bound in every coordinate");
        }
        volume *= ref.r[i] - lower_bound[i];
    }
    for (const auto& p : archive) {
        if (p.values.size() != m) {
            throw Error(Errc::DimensionMismatch, "point dimensionality differs from reference");
        }
    }
    if (samples == 0 || archive.empty()) {
        return {};
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> s(m);
    std::size_t hits = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            s[i] = lower_bound[i] + unit(rng) * (ref.r[i] - lower_bound[i]);
        }
        for (const auto& p : archive) {
            bool covers = true;
            for (std::size_t i = 0; i < m && covers; ++i) {
                covers = p.values[i] <= s[i];
            }
            if (covers) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {frac * volume, volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

std::vector<double> linear_rank_probs(std::size_t n, double eta_plus)
{
    if (n < 1) {
        throw Error(Errc::TooFew, "linear ranking needs at least one element");
    }
    if (!(eta_plus >= 1.0 && eta_plus <= 2.0)) {
        throw Error(Errc::InvalidArgument, "eta_plus must lie in [1, 2]");
    }
    if (n == 1) {
        return {1.0};
    }
    const double nd = static_cast<double>(n);
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / (nd - 1.0);
        probs[i] = (eta_plus - 2.0 * (eta_plus - 1.0) * frac) / nd;
    }
    return probs;
}

std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) {
            last_positive = i;
        }
        acc += probs[i];
        if (u < acc && probs[i] > 0.0) {
            return i;
        }
    }
    // Rounding left u above the cumulative sum.
    return last_positive;
}

std::size_t extreme_index(std::span<const ObjectivePoint> archive, std::size_t objective)
{
    if (archive.empty()) {
        throw Error(Errc::EmptyArchive, "no extreme point in an empty archive");
    }
    const std::size_t other = objective == 0 ? 1 : 0;
    std::size_t best = 0;
    for (std::size_t i = 1; i < archive.size(); ++i) {
        const auto& a = archive[i].values;
        const auto& b = archive[best].values;
        if (a[objective] < b[objective] || (a[objective] == b[objective] && a[other] < b[other])) {
            best = i;
        }
    }
    return best;
}

std::size_t knee_point(std::span<const ObjectivePoint> archive)
{
    if (archive.empty()) {
        throw Error(Errc::EmptyArchive, "knee point of an empty archive");
    }
    for (const auto& p : archive) {
        if (p.values.size() != 2) {
            throw Error(Errc::DimensionMismatch, "knee point needs 2-D points");
        }
    }
    double lo[2] = {archive[0].values[0], archive[0].values[1]};
    double hi[2] = {lo[0], lo[1]};
    for (const auto& p : archive) {
        for (int k = 0; k < 2; ++k) {
            lo[k] = std::min(lo[k], p.values[k]);
            hi[k] = std::max(hi[k], p.values[k]);
        }
    }
    auto norm = [&](std::size_t i, int k) {
        const double span = hi[k] - lo[k];
        return span > 0.0 ? (archive[i].values[k] - lo[k]) / span : 0.0;
    };

    // One representative (first occurrence) per distinct value vector, sorted by f1.
    std::vector<std::size_t> order(archive.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return archive[a].values < archive[b].values;
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::size_t a, std::size_t b) { return archive[a].values == archive[b].values; }),
                order.end());

    auto lower_energy = [&](std::size_t a, std::size_t b) { return archive[a].values[1] < archive[b].values[1]; };
    constexpr double kTie = 1e-9;

    if (order.size() < 3) {
        std::size_t best = order.front();
        double best_d = std::hypot(norm(best, 0), norm(best, 1));
        for (std::size_t idx : order) {
            const double d = std::hypot(norm(idx, 0), norm(idx, 1));
            if (d < best_d - kTie || (std::abs(d - best_d) <= kTie && lower_energy(idx, best))) {
                best = idx;
                best_d = d;
            }
        }
        return best;
    }

    std::size_t best = order[1];
    double best_bend = -1.0;
    for (std::size_t k = 1; k + 1 < order.size(); ++k) {
        const std::size_t p = order[k - 1];
        const std::size_t c = order[k];
        const std::size_t q = order[k + 1];
        const double ax = norm(p, 0) - norm(c, 0);
        const double ay = norm(p, 1) - norm(c, 1);
        const double bx = norm(q, 0) - norm(c, 0);
        const double by = norm(q, 1) - norm(c, 1);
        const double la = std::hypot(ax, ay);
        const double lb = std::hypot(bx, by);
        double bend = 0.0;
        if (la > 0.0 && lb > 0.0) {
            const double cosine = std::clamp((ax * bx + ay * by) / (la * lb), -1.0, 1.0);
            bend = std::numbers::pi - std::acos(cosine);
        }
        if (bend > best_bend + kTie || (std::abs(bend - best_bend) <= kTie && lower_energy(c, best))) {
            best = c;
            best_bend = std::max(best_bend, bend);
        }
    }
    return best;
}

double quantile_sorted(std::span<const double> sorted, double q)
{
    if (sorted.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(sorted.size() - 1, lo + 1);
    const double t = pos - static_cast<double>(lo);
    if (t == 0.0 || sorted[lo] == sorted[hi]) {
        return sorted[lo];
    }
    if (std::isinf(sorted[hi])) {
        return sorted[hi];
    }
    return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

AttainmentCurves attainment(std::span<const ParetoArchive> fronts, std::span<const double> grid)
{
    if (grid.empty()) {
        throw Error(Errc::EmptyGrid, "attainment needs at least one grid value");
    }
    if (fronts.empty()) {
        throw Error(Errc::InvalidArgument, "attainment needs at least one front");
    }
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw Error(Errc::InvalidArgument, "grid must be sorted ascending");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    AttainmentCurves out;
    out.grid.assign(grid.begin(), grid.end());

    // Staircase per run, evaluated by a merge over f1-sorted points.
    std::vector<std::vector<double>> per_run(fronts.size(), std::vector<double>(grid.size(), inf));
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : fronts[r]) {
            pts.emplace_back(p.values.at(0), p.values.at(1));
        }
        std::sort(pts.begin(), pts.end());
        double best = inf;
        std::size_t k = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            while (k < pts.size() && pts[k].first <= grid[g]) {
                best = std::min(best, pts[k].second);
                ++k;
            }
            per_run[r][g] = best;
        }
    }
    std::vector<double> column(fronts.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            column[r] = per_run[r][g];
        }
        std::sort(column.begin(), column.end());
        out.q25.push_back(quantile_sorted(column, 0.25));
        out.median.push_back(quantile_sorted(column, 0.5));
        out.q75.push_back(quantile_sorted(column, 0.75));
    }
    return out;
}

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string front_csv(std::span<const ObjectivePoint> archive)
{
    std::string out = "f1,f2,key,budget\n";
    for (const auto& p : archive) {
        out += format_number(p.values.at(0));
        out += ',';
        out += format_number(p.values.at(1));
        out += ',';
        out += p.payload.key.hex();
        out += ',';
        out += std::to_string(p.payload.budget);
        out += '\n';
    }
    return out;
}

std::string attainment_csv(const AttainmentCurves& curves)
{
    std::string out = "f1,f2_q25,f2_median,f2_q75\n";
    for (std::size_t g = 0; g < curves.grid.size(); ++g) {
        out += format_number(curves.grid[g]) + ',' + format_number(curves.q25[g]) + ',' +
               format_number(curves.median[g]) + ',' + format_number(curves.q75[g]) + '\n';
    }
    return out;
}

}  // namespace greennas
