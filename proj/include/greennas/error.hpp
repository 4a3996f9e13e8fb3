#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace greennas {

enum class Errc {
    InvalidSpec,
    InvalidArgument,
    NoIoPath,
    IndexOutOfRange,
    IllegalLabel,
    ResourceLimit,
    ParseError,
    DuplicateKey,
    MissingKey,
    MissingBudget,
    NonpositiveBudget,
    EmptyTable,
    NoSwapPairs,
    LengthMismatch,
    TooShort,
    DimensionMismatch,
    EmptyBatch,
    InsufficientData,
    NotAMember,
    DegenerateBox,
    TooFew,
    EmptyArchive,
    EmptyGrid,
    RepairExhausted,
    Io,
};

std::string_view to_string(Errc code) noexcept;

// All library failures are reported through this type; code() carries the
// machine-readable reason, what() a human-readable one.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    [[nodiscard]] Errc code() const noexcept { return code_; }
    // what() without the code prefix.
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

}  // namespace greennas
