#pragma once

// Labeled-DAG cell search space: encoding, validation, pruning,
// canonicalization, single-step edits, and exhaustive enumeration.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "greennas/error.hpp"

namespace greennas {

inline constexpr int kMaxVertices = 7;
inline constexpr int kDefaultMaxEdges = 9;

// Integer codes are part of the feature encoding and must not be reordered.
enum class Operation : std::uint8_t {
    Input = 1,
    Conv1x1 = 2,
    Conv3x3 = 3,
    MaxPool3x3 = 4,
    Output = 5,
};

inline constexpr std::array<Operation, 3> kInteriorOps = {
    Operation::Conv3x3, Operation::Conv1x1, Operation::MaxPool3x3};

[[nodiscard]] constexpr int code(Operation op) noexcept { return static_cast<int>(op); }
[[nodiscard]] constexpr bool is_interior(Operation op) noexcept
{
    return op == Operation::Conv1x1 || op == Operation::Conv3x3 || op == Operation::MaxPool3x3;
}
[[nodiscard]] std::string_view to_string(Operation op) noexcept;
[[nodiscard]] Operation operation_from_string(std::string_view name);

struct SpaceConstraints {
    int max_vertices = kMaxVertices;
    int max_edges = kDefaultMaxEdges;
};

// A cell with at most kMaxVertices vertices. Row i of the adjacency is a
// bitmask of successors of vertex i (bit j set means edge i -> j). The type
// can hold malformed encodings (lower-triangular bits, bad labels) so that
// validate() can report them; the editing operations preserve whatever
// validity the input had.
class CellSpec {
public:
    CellSpec() = default;
    CellSpec(int num_vertices, std::array<std::uint8_t, kMaxVertices> rows,
             std::array<Operation, kMaxVertices> ops);

    // Throws Error(InvalidSpec) for ragged/non-binary matrices, label count
    // mismatch, or more than kMaxVertices vertices.
    static CellSpec from_matrix(const std::vector<std::vector<int>>& adjacency,
                                const std::vector<Operation>& ops);

    [[nodiscard]] int num_vertices() const noexcept { return n_; }
    [[nodiscard]] bool has_edge(int from, int to) const noexcept { return (rows_[from] >> to) & 1U; }
    [[nodiscard]] std::uint8_t row(int i) const noexcept { return rows_[i]; }
    [[nodiscard]] Operation op(int v) const noexcept { return ops_[v]; }
    [[nodiscard]] int edge_count() const noexcept;

    [[nodiscard]] std::vector<std::vector<int>> matrix() const;
    [[nodiscard]] std::vector<Operation> operations() const;

    void set_edge(int from, int to, bool present) noexcept;
    void set_op(int v, Operation op) noexcept { ops_[v] = op; }

    // Lexicographic on (num_vertices, adjacency rows, op codes); this is the
    // order used to choose canonical representatives.
    friend std::strong_ordering operator<=>(const CellSpec& a, const CellSpec& b) noexcept;
    friend bool operator==(const CellSpec& a, const CellSpec& b) noexcept;

private:
    int n_ = 0;
    std::array<std::uint8_t, kMaxVertices> rows_{};
    std::array<Operation, kMaxVertices> ops_{};
};

enum class ValidationResult {
    Ok,
    NotUpperTriangular,
    BadLabels,
    TooManyEdges,
    TooManyVertices,
    NoIoPath,
};

[[nodiscard]] std::string_view to_string(ValidationResult r) noexcept;

// 128-bit isomorphism-invariant digest of a pruned labeled DAG.
struct CanonicalKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    [[nodiscard]] std::string hex() const;
    static CanonicalKey from_hex(std::string_view text);

    friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

// Structural checks only (upper-triangularity and labels); no path check.
[[nodiscard]] ValidationResult check_structure(const CellSpec& spec) noexcept;

[[nodiscard]] ValidationResult validate(const CellSpec& spec, const SpaceConstraints& constraints) noexcept;

// Keeps exactly the vertices on some INPUT -> OUTPUT path, in their original
// order. Throws Error(NoIoPath) when no such path exists and
// Error(InvalidSpec) when the structure is malformed.
[[nodiscard]] CellSpec prune(const CellSpec& spec);

[[nodiscard]] CanonicalKey canonical_key(const CellSpec& spec);

// Pruned spec relabeled (over all topological orderings of the interior) to
// the lexicographically minimal encoding. Isomorphic specs map to the same
// value, which also equals the representative enumerate_space() returns.
[[nodiscard]] CellSpec canonical_form(const CellSpec& spec);

struct EnumerateOptions {
    bool allow_long_run = false;
    // 0 picks ECNAS_THREADS or the hardware concurrency.
    unsigned threads = 0;
};

// One representative per canonical key, sorted by encoding. Throws
// Error(ResourceLimit) for max_vertices == 7 without allow_long_run.
[[nodiscard]] std::vector<CellSpec> enumerate_space(const SpaceConstraints& constraints,
                                                    const EnumerateOptions& options = {});

// Macro skeleton: 3x3 conv stem, `stacks` stacks of `cells_per_stack`
// cells, channels doubled at each downsampling, dense classifier head.
// Counted on canonical_form(spec), so isomorphic cells give equal counts.
struct MacroConfig {
    int stem_channels = 128;
    int stacks = 3;
    int cells_per_stack = 3;
    int num_classes = 10;
    int image_channels = 3;
};

[[nodiscard]] std::int64_t count_parameters(const CellSpec& spec, const MacroConfig& macro = {});

// Channel width of every vertex for a cell mapping in_channels to
// out_channels; exposed for inspection and tests.
[[nodiscard]] std::vector<int> vertex_channels(const CellSpec& spec, int in_channels, int out_channels);

[[nodiscard]] CellSpec flip_edge(const CellSpec& spec, int from, int to);
[[nodiscard]] CellSpec set_label(const CellSpec& spec, int vertex, Operation op);

// {"module_adjacency": [[...]], "module_operations": ["input", ...]}
[[nodiscard]] nlohmann::json to_json(const CellSpec& spec);
[[nodiscard]] CellSpec spec_from_json(const nlohmann::json& j);

// Handy constructor for tests and examples: a chain INPUT -> ops... -> OUTPUT.
[[nodiscard]] CellSpec make_chain(const std::vector<Operation>& interior);

// Number of worker threads to use for internally parallel routines.
[[nodiscard]] unsigned default_thread_count();

}  // namespace greennas

template <>
struct std::hash<greennas::CanonicalKey> {
    std::size_t operator()(const greennas::CanonicalKey& k) const noexcept
    {
        return static_cast<std::size_t>(k.lo ^ (k.hi * 0x9e3779b97f4a7c15ULL));
    }
};
