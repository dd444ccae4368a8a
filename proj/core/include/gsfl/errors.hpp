#pragma once

#include <stdexcept>

namespace gsfl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// User-fixable problems: bad config values, unreadable files, bad input data.
// The CLI maps these to exit code 1.
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };

// Violated internal contracts. The CLI maps these to exit code 2.
struct ShapeError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct ProtocolError : Error { using Error::Error; };
struct AggregationError : Error { using Error::Error; };

// IDX parsing failures, one type per malformed-file class.
struct IdxError : DataError { using DataError::DataError; };
struct IdxBadMagic : IdxError { using IdxError::IdxError; };
struct IdxTruncated : IdxError { using IdxError::IdxError; };
struct IdxCountMismatch : IdxError { using IdxError::IdxError; };

}  // namespace gsfl
