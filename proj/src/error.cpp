#include "greennas/error.hpp"

namespace greennas {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::InvalidSpec: return "INVALID_SPEC";
    case Errc::InvalidArgument: return "INVALID_ARGUMENT";
    case Errc::NoIoPath: return "NO_IO_PATH";
    case Errc::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case Errc::IllegalLabel: return "ILLEGAL_LABEL";
    case Errc::ResourceLimit: return "RESOURCE_LIMIT";
    case Errc::ParseError: return "PARSE_ERROR";
    case Errc::DuplicateKey: return "DUPLICATE_KEY";
    case Errc::MissingKey: return "MISSING_KEY";
    case Errc::MissingBudget: return "MISSING_BUDGET";
    case Errc::NonpositiveBudget: return "NONPOSITIVE_BUDGET";
    case Errc::EmptyTable: return "EMPTY_TABLE";
    case Errc::NoSwapPairs: return "NO_SWAP_PAIRS";
    case Errc::LengthMismatch: return "LENGTH_MISMATCH";
    case Errc::TooShort: return "TOO_SHORT";
    case Errc::DimensionMismatch: return "DIMENSION_MISMATCH";
    case Errc::EmptyBatch: return "EMPTY_BATCH";
    case Errc::InsufficientData: return "INSUFFICIENT_DATA";
    case Errc::NotAMember: return "NOT_A_MEMBER";
    case Errc::DegenerateBox: return "DEGENERATE_BOX";
    case Errc::TooFew: return "TOO_FEW";
    case Errc::EmptyArchive: return "EMPTY_ARCHIVE";
    case Errc::EmptyGrid: return "EMPTY_GRID";
    case Errc::RepairExhausted: return "REPAIR_EXHAUSTED";
    case Errc::Io: return "IO_ERROR";
    }
    return "UNKNOWN";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message)
{
}

}  // namespace greennas
