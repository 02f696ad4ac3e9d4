#pragma once

#include <stdexcept>
#include <string>

namespace blindsynth {

struct SizeMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingFileError : IoError {
    using IoError::IoError;
};

/// Readable PNG whose bit depth or channel layout we do not accept.
struct UnsupportedFormatError : IoError {
    using IoError::IoError;
};

struct CorruptStreamError : IoError {
    using IoError::IoError;
};

struct UnwritablePathError : IoError {
    using IoError::IoError;
};

}  // namespace blindsynth
