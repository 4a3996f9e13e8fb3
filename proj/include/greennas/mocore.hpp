#pragma once

// Bi-objective (minimization) machinery: dominance, non-dominated filtering,
// hypervolume and its contributions, linear ranking, knee points, and
// attainment summaries.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "greennas/cellspace.hpp"

namespace greennas {

// What an objective vector refers to: an architecture at an epoch budget.
struct Payload {
    CanonicalKey key;
    int budget = 0;

    friend auto operator<=>(const Payload&, const Payload&) = default;
};

struct ObjectivePoint {
    std::vector<double> values;
    Payload payload;

    friend bool operator==(const ObjectivePoint&, const ObjectivePoint&) = default;
};

using ParetoArchive = std::vector<ObjectivePoint>;

struct ReferencePoint {
    std::vector<double> r;
};

[[nodiscard]] bool dominates(std::span<const double> a, std::span<const double> b);
[[nodiscard]] bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

// Points not dominated by any other, in input order. Equal value vectors do
// not dominate each other, so duplicates survive together.
[[nodiscard]] ParetoArchive ndom(std::span<const ObjectivePoint> points);

// Sweep over the first objective. Coordinates beyond the reference are
// clipped to it, so such points contribute nothing past the reference.
[[nodiscard]] double hypervolume_2d(std::span<const ObjectivePoint> archive, const ReferencePoint& ref);

// S(P) - S(P \ {x}) with one copy of x removed. Throws NotAMember.
[[nodiscard]] double contributing_hv(const ObjectivePoint& x, std::span<const ObjectivePoint> archive,
                                     const ReferencePoint& ref);

// Contribution of every archive member, by index.
[[nodiscard]] std::vector<double> contributions(std::span<const ObjectivePoint> archive, const ReferencePoint& ref);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Uniform sampling of the box [lower_bound, ref]; m-generic.
[[nodiscard]] MonteCarloEstimate hv_monte_carlo(std::span<const ObjectivePoint> archive, const ReferencePoint& ref,
                                                std::span<const double> lower_bound, std::size_t samples,
                                                std::uint64_t seed);

// pi_i = (eta - 2 (eta - 1) (i - 1) / (n - 1)) / n for rank i = 1..n.
// n == 1 yields {1.0}.
[[nodiscard]] std::vector<double> linear_rank_probs(std::size_t n, double eta_plus);

// Index into `probs` drawn by inverse CDF.
[[nodiscard]] std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng);

// Index (into archive) of the maximum bend-angle point after min-max
// normalization; ties go to lower second objective. Fewer than three
// distinct points fall back to the one nearest the normalized ideal.
[[nodiscard]] std::size_t knee_point(std::span<const ObjectivePoint> archive);

// Index of the minimizer of objective `i`; ties go to the smaller other objective.
[[nodiscard]] std::size_t extreme_index(std::span<const ObjectivePoint> archive, std::size_t objective);

struct AttainmentCurves {
    std::vector<double> grid;
    std::vector<double> q25;
    std::vector<double> median;
    std::vector<double> q75;
};

// Per run and grid value g: min f2 over points with f1 <= g (+inf if none);
// then quartiles across runs with linear interpolation.
[[nodiscard]] AttainmentCurves attainment(std::span<const ParetoArchive> fronts, std::span<const double> grid);

// Linear-interpolated quantile of a sorted sample; handles +inf entries.
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double q);

// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
[[nodiscard]] std::string format_number(double v);

// Header f1,f2,key,budget; rows in archive order.
[[nodiscard]] std::string front_csv(std::span<const ObjectivePoint> archive);

// Header f1,f2_q25,f2_median,f2_q75; one row per grid value.
[[nodiscard]] std::string attainment_csv(const AttainmentCurves& curves);

}  // namespace greennas
