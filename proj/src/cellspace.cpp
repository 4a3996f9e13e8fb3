#include "greennas/cellspace.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "greennas/hashing.hpp"

namespace greennas {

namespace {

constexpr std::uint64_t kKeySeedLo = 0x243f6a8885a308d3ULL;
constexpr std::uint64_t kKeySeedHi = 0x13198a2e03707344ULL;

// Bitmask of vertices on an INPUT -> OUTPUT path. Assumes upper-triangular rows.
std::uint8_t on_path_mask(int n, const std::array<std::uint8_t, kMaxVertices>& rows) noexcept
{
    std::uint8_t forward = 1;
    for (int i = 0; i < n; ++i) {
        if ((forward >> i) & 1U) {
            forward |= rows[i];
        }
    }
    std::uint8_t backward = static_cast<std::uint8_t>(1U << (n - 1));
    for (int i = n - 2; i >= 0; --i) {
        if (rows[i] & backward) {
            backward |= static_cast<std::uint8_t>(1U << i);
        }
    }
    const std::uint8_t keep = forward & backward;
    // Both ends must survive for a path to exist.
    if (!(keep & 1U) || !((keep >> (n - 1)) & 1U)) {
        return 0;
    }
    return keep;
}

// Induced subgraph on the vertices in `keep`, order preserved.
CellSpec induced(const CellSpec& spec, std::uint8_t keep)
{
    std::array<int, kMaxVertices> index{};
    int k = 0;
    for (int v = 0; v < spec.num_vertices(); ++v) {
        index[v] = ((keep >> v) & 1U) ? k++ : -1;
    }
    std::array<std::uint8_t, kMaxVertices> rows{};
    std::array<Operation, kMaxVertices> ops{};
    for (int v = 0; v < spec.num_vertices(); ++v) {
        if (index[v] < 0) {
            continue;
        }
        ops[index[v]] = spec.op(v);
        for (int w = 0; w < spec.num_vertices(); ++w) {
            if (index[w] >= 0 && spec.has_edge(v, w)) {
                rows[index[v]] |= static_cast<std::uint8_t>(1U << index[w]);
            }
        }
    }
    return CellSpec(k, rows, ops);
}

// Iterative neighborhood hashing with predecessor and successor multisets
// kept separate. Expects an already pruned spec.
CanonicalKey hash_pruned(const CellSpec& spec)
{
    const int n = spec.num_vertices();
    std::array<int, kMaxVertices> in_deg{};
    std::array<int, kMaxVertices> out_deg{};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (spec.has_edge(i, j)) {
                ++out_deg[i];
                ++in_deg[j];
            }
        }
    }

    std::array<std::uint64_t, kMaxVertices> digest{};
    for (int v = 0; v < n; ++v) {
        std::uint64_t h = hash_combine(kKeySeedLo, static_cast<std::uint64_t>(in_deg[v]));
        h = hash_combine(h, static_cast<std::uint64_t>(out_deg[v]));
        digest[v] = hash_combine(h, static_cast<std::uint64_t>(code(spec.op(v))));
    }

    std::array<std::uint64_t, kMaxVertices> next{};
    std::array<std::uint64_t, kMaxVertices> buf{};
    for (int round = 0; round < n; ++round) {
        for (int v = 0; v < n; ++v) {
            std::uint64_t h = hash_combine(digest[v], 0x70726564ULL);
            int count = 0;
            for (int u = 0; u < n; ++u) {
                if (spec.has_edge(u, v)) {
                    buf[count++] = digest[u];
                }
            }
            std::sort(buf.begin(), buf.begin() + count);
            for (int i = 0; i < count; ++i) {
                h = hash_combine(h, buf[i]);
            }
            h = hash_combine(h, 0x73756363ULL);
            count = 0;
            for (int w = 0; w < n; ++w) {
                if (spec.has_edge(v, w)) {
                    buf[count++] = digest[w];
                }
            }
            std::sort(buf.begin(), buf.begin() + count);
            for (int i = 0; i < count; ++i) {
                h = hash_combine(h, buf[i]);
            }
            next[v] = h;
        }
        digest = next;
    }

    std::sort(digest.begin(), digest.begin() + n);
    CanonicalKey key;
    std::uint64_t lo = hash_combine(kKeySeedLo, static_cast<std::uint64_t>(n));
    std::uint64_t hi = hash_combine(kKeySeedHi, static_cast<std::uint64_t>(n));
    lo = hash_combine(lo, static_cast<std::uint64_t>(spec.edge_count()));
    hi = hash_combine(hi, static_cast<std::uint64_t>(spec.edge_count()));
    for (int v = 0; v < n; ++v) {
        lo = hash_combine(lo, digest[v]);
        hi = hash_combine(hi, ~digest[v]);
    }
    key.lo = lo;
    key.hi = hi;
    return key;
}

CellSpec canonical_form_pruned(const CellSpec& pruned)
{
    const int n = pruned.num_vertices();
    if (n <= 3) {
        return pruned;
    }
    std::vector<int> order(static_cast<std::size_t>(n - 2));
    std::iota(order.begin(), order.end(), 1);
    CellSpec best = pruned;
    // position[old vertex] = new index
    std::array<int, kMaxVertices> position{};
    do {
        position[0] = 0;
        position[n - 1] = n - 1;
        for (int i = 0; i < n - 2; ++i) {
            position[order[i]] = i + 1;
        }
        bool topological = true;
        std::array<std::uint8_t, kMaxVertices> rows{};
        std::array<Operation, kMaxVertices> ops{};
        for (int u = 0; u < n && topological; ++u) {
            ops[position[u]] = pruned.op(u);
            for (int w = u + 1; w < n; ++w) {
                if (pruned.has_edge(u, w)) {
                    if (position[u] >= position[w]) {
                        topological = false;
                        break;
                    }
                    rows[position[u]] |= static_cast<std::uint8_t>(1U << position[w]);
                }
            }
        }
        if (topological) {
            CellSpec candidate(n, rows, ops);
            if (candidate < best) {
                best = candidate;
            }
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

std::int64_t conv_bn(std::int64_t kernel, std::int64_t in_c, std::int64_t out_c)
{
    return kernel * kernel * in_c * out_c + 2 * out_c;
}

std::int64_t cell_parameters(const CellSpec& spec, int in_c, int out_c)
{
    const int n = spec.num_vertices();
    const std::vector<int> ch = vertex_channels(spec, in_c, out_c);
    std::int64_t total = 0;
    for (int v = 1; v < n - 1; ++v) {
        if (spec.has_edge(0, v)) {
            total += conv_bn(1, in_c, ch[v]);
        }
        switch (spec.op(v)) {
        case Operation::Conv3x3: total += conv_bn(3, ch[v], ch[v]); break;
        case Operation::Conv1x1: total += conv_bn(1, ch[v], ch[v]); break;
        default: break;
        }
    }
    // INPUT -> OUTPUT is a parameter-free residual (zero-padded when widening).
    return total;
}

}  // namespace

std::string_view to_string(Operation op) noexcept
{
    switch (op) {
    case Operation::Input: return "input";
    case Operation::Conv1x1: return "conv1x1";
    case Operation::Conv3x3: return "conv3x3";
    case Operation::MaxPool3x3: return "maxpool3x3";
    case Operation::Output: return "output";
    }
    return "invalid";
}

Operation operation_from_string(std::string_view name)
{
    for (Operation op : {Operation::Input, Operation::Conv1x1, Operation::Conv3x3, Operation::MaxPool3x3,
                         Operation::Output}) {
        if (to_string(op) == name) {
            return op;
        }
    }
    throw Error(Errc::InvalidSpec, "unknown operation '" + std::string(name) + "'");
}

std::string_view to_string(ValidationResult r) noexcept
{
    switch (r) {
    case ValidationResult::Ok: return "OK";
    case ValidationResult::NotUpperTriangular: return "NOT_UPPER_TRIANGULAR";
    case ValidationResult::BadLabels: return "BAD_LABELS";
    case ValidationResult::TooManyEdges: return "TOO_MANY_EDGES";
    case ValidationResult::TooManyVertices: return "TOO_MANY_VERTICES";
    case ValidationResult::NoIoPath: return "NO_IO_PATH";
    }
    return "UNKNOWN";
}

CellSpec::CellSpec(int num_vertices, std::array<std::uint8_t, kMaxVertices> rows,
                   std::array<Operation, kMaxVertices> ops)
    : n_(num_vertices), rows_(rows), ops_(ops)
{
    if (n_ < 0 || n_ > kMaxVertices) {
        throw Error(Errc::InvalidSpec, "vertex count out of range: " + std::to_string(n_));
    }
    // Bits and labels beyond n_ are zeroed so equality is well defined.
    const auto live = static_cast<std::uint8_t>((1U << n_) - 1U);
    for (int i = 0; i < kMaxVertices; ++i) {
        if (i < n_) {
            rows_[i] &= live;
        } else {
            rows_[i] = 0;
            ops_[i] = Operation{};
        }
    }
}

CellSpec CellSpec::from_matrix(const std::vector<std::vector<int>>& adjacency, const std::vector<Operation>& ops)
{
    const auto n = adjacency.size();
    if (n > static_cast<std::size_t>(kMaxVertices)) {
        throw Error(Errc::InvalidSpec, "at most 7 vertices are representable");
    }
    if (ops.size() != n) {
        throw Error(Errc::InvalidSpec, "operation count does not match adjacency size");
    }
    std::array<std::uint8_t, kMaxVertices> rows{};
    std::array<Operation, kMaxVertices> labels{};
    for (std::size_t i = 0; i < n; ++i) {
        if (adjacency[i].size() != n) {
            throw Error(Errc::InvalidSpec, "adjacency matrix is not square");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const int bit = adjacency[i][j];
            if (bit != 0 && bit != 1) {
                throw Error(Errc::InvalidSpec, "adjacency entries must be 0 or 1");
            }
            if (bit) {
                rows[i] |= static_cast<std::uint8_t>(1U << j);
            }
        }
        labels[i] = ops[i];
    }
    return CellSpec(static_cast<int>(n), rows, labels);
}

int CellSpec::edge_count() const noexcept
{
    int total = 0;
    for (int i = 0; i < n_; ++i) {
        total += std::popcount(static_cast<unsigned>(rows_[i]));
    }
    return total;
}

std::vector<std::vector<int>> CellSpec::matrix() const
{
    std::vector<std::vector<int>> m(static_cast<std::size_t>(n_), std::vector<int>(static_cast<std::size_t>(n_), 0));
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            m[i][j] = has_edge(i, j) ? 1 : 0;
        }
    }
    return m;
}

std::vector<Operation> CellSpec::operations() const
{
    return {ops_.begin(), ops_.begin() + n_};
}

void CellSpec::set_edge(int from, int to, bool present) noexcept
{
    const auto bit = static_cast<std::uint8_t>(1U << to);
    if (present) {
        rows_[from] |= bit;
    } else {
        rows_[from] &= static_cast<std::uint8_t>(~bit);
    }
}

std::strong_ordering operator<=>(const CellSpec& a, const CellSpec& b) noexcept
{
    if (auto c = a.n_ <=> b.n_; c != 0) {
        return c;
    }
    for (int i = 0; i < a.n_; ++i) {
        // Row-major bit order: column 0 is the most significant position.
        for (int j = 0; j < a.n_; ++j) {
            if (auto c = a.has_edge(i, j) <=> b.has_edge(i, j); c != 0) {
                return c;
            }
        }
    }
    for (int i = 0; i < a.n_; ++i) {
        if (auto c = code(a.ops_[i]) <=> code(b.ops_[i]); c != 0) {
            return c;
        }
    }
    return std::strong_ordering::equal;
}

bool operator==(const CellSpec& a, const CellSpec& b) noexcept
{
    return (a <=> b) == std::strong_ordering::equal;
}

std::string CanonicalKey::hex() const
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(32, '0');
    for (int i = 0; i < 16; ++i) {
        out[15 - i] = digits[(hi >> (4 * i)) & 0xF];
        out[31 - i] = digits[(lo >> (4 * i)) & 0xF];
    }
    return out;
}

CanonicalKey CanonicalKey::from_hex(std::string_view text)
{
    if (text.size() != 32) {
        throw Error(Errc::ParseError, "canonical key must be 32 hex digits");
    }
    auto nibble = [](char c) -> std::uint64_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint64_t>(c - 'A' + 10);
        throw Error(Errc::ParseError, "invalid hex digit in canonical key");
    };
    CanonicalKey key;
    for (int i = 0; i < 16; ++i) {
        key.hi = (key.hi << 4) | nibble(text[i]);
        key.lo = (key.lo << 4) | nibble(text[16 + i]);
    }
    return key;
}

ValidationResult check_structure(const CellSpec& spec) noexcept
{
    const int n = spec.num_vertices();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            if (spec.has_edge(i, j)) {
                return ValidationResult::NotUpperTriangular;
            }
        }
    }
    if (n < 2 || spec.op(0) != Operation::Input || spec.op(n - 1) != Operation::Output) {
        return ValidationResult::BadLabels;
    }
    for (int v = 1; v < n - 1; ++v) {
        if (!is_interior(spec.op(v))) {
            return ValidationResult::BadLabels;
        }
    }
    return ValidationResult::Ok;
}

ValidationResult validate(const CellSpec& spec, const SpaceConstraints& constraints) noexcept
{
    if (auto r = check_structure(spec); r != ValidationResult::Ok) {
        return r;
    }
    if (spec.num_vertices() > constraints.max_vertices) {
        return ValidationResult::TooManyVertices;
    }
    if (spec.edge_count() > constraints.max_edges) {
        return ValidationResult::TooManyEdges;
    }
    std::array<std::uint8_t, kMaxVertices> rows{};
    for (int i = 0; i < spec.num_vertices(); ++i) {
        rows[i] = spec.row(i);
    }
    if (on_path_mask(spec.num_vertices(), rows) == 0) {
        return ValidationResult::NoIoPath;
    }
    return ValidationResult::Ok;
}

CellSpec prune(const CellSpec& spec)
{
    if (auto r = check_structure(spec); r != ValidationResult::Ok) {
        throw Error(Errc::InvalidSpec, std::string(to_string(r)));
    }
    std::array<std::uint8_t, kMaxVertices> rows{};
    for (int i = 0; i < spec.num_vertices(); ++i) {
        rows[i] = spec.row(i);
    }
    const std::uint8_t keep = on_path_mask(spec.num_vertices(), rows);
    if (keep == 0) {
        throw Error(Errc::NoIoPath, "no INPUT -> OUTPUT path");
    }
    return induced(spec, keep);
}

CanonicalKey canonical_key(const CellSpec& spec)
{
    return hash_pruned(prune(spec));
}

CellSpec canonical_form(const CellSpec& spec)
{
    return canonical_form_pruned(prune(spec));
}

unsigned default_thread_count()
{
    if (const char* env = std::getenv("ECNAS_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value > 0) {
            return static_cast<unsigned>(value);
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<CellSpec> enumerate_space(const SpaceConstraints& constraints, const EnumerateOptions& options)
{
    const int n = constraints.max_vertices;
    if (n < 2 || n > kMaxVertices) {
        throw Error(Errc::InvalidArgument, "max_vertices must lie in [2, 7]");
    }
    if (n == kMaxVertices && !options.allow_long_run) {
        throw Error(Errc::ResourceLimit, "7-vertex enumeration requires the long-run flag");
    }
    if (constraints.max_edges < 0) {
        throw Error(Errc::InvalidArgument, "max_edges must be non-negative");
    }

    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            slots.emplace_back(i, j);
        }
    }

    // Pass 1: distinct pruned adjacency structures. Labels are irrelevant to
    // pruning, so every raw labeling of a structure prunes identically.
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::uint64_t> structures;
    const std::uint32_t mask_end = 1U << slots.size();
    for (std::uint32_t mask = 0; mask < mask_end; ++mask) {
        if (std::popcount(mask) > constraints.max_edges) {
            continue;
        }
        std::array<std::uint8_t, kMaxVertices> rows{};
        for (std::size_t s = 0; s < slots.size(); ++s) {
            if ((mask >> s) & 1U) {
                rows[slots[s].first] |= static_cast<std::uint8_t>(1U << slots[s].second);
            }
        }
        const std::uint8_t keep = on_path_mask(n, rows);
        if (keep == 0) {
            continue;
        }
        std::array<Operation, kMaxVertices> ops{};
        const CellSpec pruned = induced(CellSpec(n, rows, ops), keep);
        std::uint64_t code_word = static_cast<std::uint64_t>(pruned.num_vertices());
        for (int i = 0; i < pruned.num_vertices(); ++i) {
            code_word |= static_cast<std::uint64_t>(pruned.row(i)) << (3 + 7 * i);
        }
        if (seen.insert(code_word).second) {
            structures.push_back(code_word);
        }
    }
    std::sort(structures.begin(), structures.end());

    // Pass 2: every interior labeling of every structure, dedup by key while
    // keeping the minimal encoding. min() makes the merge order-independent.
    using Bucket = std::unordered_map<CanonicalKey, CellSpec>;
    auto absorb = [](Bucket& bucket, const CanonicalKey& key, const CellSpec& spec) {
        auto [it, inserted] = bucket.try_emplace(key, spec);
        if (!inserted && spec < it->second) {
            it->second = spec;
        }
    };

    auto work = [&](std::size_t begin, std::size_t end, Bucket& bucket) {
        for (std::size_t s = begin; s < end; ++s) {
            const std::uint64_t word = structures[s];
            const int k = static_cast<int>(word & 0x7U);
            std::array<std::uint8_t, kMaxVertices> rows{};
            for (int i = 0; i < k; ++i) {
                rows[i] = static_cast<std::uint8_t>((word >> (3 + 7 * i)) & 0x7FU);
            }
            int combos = 1;
            for (int i = 0; i < k - 2; ++i) {
                combos *= 3;
            }
            for (int c = 0; c < combos; ++c) {
                std::array<Operation, kMaxVertices> ops{};
                ops[0] = Operation::Input;
                ops[k - 1] = Operation::Output;
                int rest = c;
                for (int v = 1; v < k - 1; ++v) {
                    ops[v] = kInteriorOps[rest % 3];
                    rest /= 3;
                }
                const CellSpec spec(k, rows, ops);
                absorb(bucket, hash_pruned(spec), spec);
            }
        }
    };

    const unsigned threads = std::max(1U, std::min<unsigned>(options.threads ? options.threads : default_thread_count(),
                                                           static_cast<unsigned>(structures.size() / 64 + 1)));
    std::vector<Bucket> buckets(threads);
    if (threads == 1) {
        work(0, structures.size(), buckets[0]);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (structures.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(structures.size(), t * chunk);
            const std::size_t end = std::min(structures.size(), begin + chunk);
            pool.emplace_back(work, begin, end, std::ref(buckets[t]));
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (unsigned t = 1; t < threads; ++t) {
        for (const auto& [key, spec] : buckets[t]) {
            absorb(buckets[0], key, spec);
        }
    }

    std::vector<CellSpec> out;
    out.reserve(buckets[0].size());
    for (const auto& [key, spec] : buckets[0]) {
        out.push_back(spec);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> vertex_channels(const CellSpec& spec, int in_channels, int out_channels)
{
    const int n = spec.num_vertices();
    std::vector<int> ch(static_cast<std::size_t>(n), 0);
    ch[0] = in_channels;
    ch[n - 1] = out_channels;
    if (n <= 2) {
        return ch;
    }
    std::vector<int> feeding;
    for (int v = 1; v < n - 1; ++v) {
        if (spec.has_edge(v, n - 1)) {
            feeding.push_back(v);
        }
    }
    if (feeding.empty()) {
        throw Error(Errc::InvalidSpec, "interior vertices present but none feeds OUTPUT");
    }
    const int share = out_channels / static_cast<int>(feeding.size());
    const int remainder = out_channels % static_cast<int>(feeding.size());
    for (std::size_t i = 0; i < feeding.size(); ++i) {
        ch[feeding[i]] = share + (static_cast<int>(i) < remainder ? 1 : 0);
    }
    // Remaining interior vertices take the widest of their successors.
    for (int v = n - 3; v >= 1; --v) {
        if (spec.has_edge(v, n - 1)) {
            continue;
        }
        for (int w = v + 1; w < n - 1; ++w) {
            if (spec.has_edge(v, w)) {
                ch[v] = std::max(ch[v], ch[w]);
            }
        }
    }
    return ch;
}

std::int64_t count_parameters(const CellSpec& spec, const MacroConfig& macro)
{
    if (macro.stem_channels < 1 || macro.stacks < 1 || macro.cells_per_stack < 1 || macro.num_classes < 1) {
        throw Error(Errc::InvalidArgument, "macro configuration values must be positive");
    }
    const CellSpec cell = canonical_form(spec);
    std::int64_t total = conv_bn(3, macro.image_channels, macro.stem_channels);
    int channels = macro.stem_channels;
    for (int s = 0; s < macro.stacks; ++s) {
        const int out_c = macro.stem_channels << s;
        for (int c = 0; c < macro.cells_per_stack; ++c) {
            total += cell_parameters(cell, channels, out_c);
            channels = out_c;
        }
    }
    total += static_cast<std::int64_t>(channels) * macro.num_classes + macro.num_classes;
    return total;
}

CellSpec flip_edge(const CellSpec& spec, int from, int to)
{
    if (from < 0 || to >= spec.num_vertices() || from >= to) {
        throw Error(Errc::IndexOutOfRange, "edge (" + std::to_string(from) + ", " + std::to_string(to) + ")");
    }
    CellSpec out = spec;
    out.set_edge(from, to, !spec.has_edge(from, to));
    return out;
}

CellSpec set_label(const CellSpec& spec, int vertex, Operation op)
{
    if (vertex < 0 || vertex >= spec.num_vertices()) {
        throw Error(Errc::IndexOutOfRange, "vertex " + std::to_string(vertex));
    }
    if (vertex == 0 || vertex == spec.num_vertices() - 1 || !is_interior(op)) {
        throw Error(Errc::IllegalLabel, "only interior vertices take interior operations");
    }
    CellSpec out = spec;
    out.set_op(vertex, op);
    return out;
}

nlohmann::json to_json(const CellSpec& spec)
{
    nlohmann::json ops = nlohmann::json::array();
    for (Operation op : spec.operations()) {
        ops.push_back(std::string(to_string(op)));
    }
    return nlohmann::json{{"module_adjacency", spec.matrix()}, {"module_operations", ops}};
}

CellSpec spec_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("module_adjacency") || !j.contains("module_operations")) {
        throw Error(Errc::InvalidSpec, "spec needs module_adjacency and module_operations");
    }
    const auto& adj = j.at("module_adjacency");
    const auto& ops_json = j.at("module_operations");
    if (!adj.is_array() || !ops_json.is_array()) {
        throw Error(Errc::InvalidSpec, "spec fields must be arrays");
    }
    std::vector<std::vector<int>> matrix;
    for (const auto& row : adj) {
        if (!row.is_array()) {
            throw Error(Errc::InvalidSpec, "adjacency rows must be arrays");
        }
        std::vector<int> r;
        for (const auto& cell : row) {
            if (!cell.is_number_integer()) {
                throw Error(Errc::InvalidSpec, "adjacency entries must be integers");
            }
            r.push_back(cell.get<int>());
        }
        matrix.push_back(std::move(r));
    }
    std::vector<Operation> ops;
    for (const auto& name : ops_json) {
        if (!name.is_string()) {
            throw Error(Errc::InvalidSpec, "operations must be strings");
        }
        ops.push_back(operation_from_string(name.get<std::string>()));
    }
    return CellSpec::from_matrix(matrix, ops);
}

CellSpec make_chain(const std::vector<Operation>& interior)
{
    const int n = static_cast<int>(interior.size()) + 2;
    if (n > kMaxVertices) {
        throw Error(Errc::InvalidSpec, "chain too long");
    }
    std::array<std::uint8_t, kMaxVertices> rows{};
    std::array<Operation, kMaxVertices> ops{};
    ops[0] = Operation::Input;
    ops[n - 1] = Operation::Output;
    for (int v = 0; v + 1 < n; ++v) {
        rows[v] = static_cast<std::uint8_t>(1U << (v + 1));
    }
    for (std::size_t i = 0; i < interior.size(); ++i) {
        ops[i + 1] = interior[i];
    }
    return CellSpec(n, rows, ops);
}

}  // namespace greennas
