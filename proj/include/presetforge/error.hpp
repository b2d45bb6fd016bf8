#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace presetforge {

enum class Errc {
    // preset documents
    UnknownSetting,
    OutOfRange,
    MalformedDocument,
    InvalidParameter,
    // images, LUTs
    InvalidImage,
    IndexOutOfRange,
    InvalidLut,
    MalformedCube,
    SizeMismatch,
    DecodeError,
    UnsupportedFormat,
    IoError,
    // dataset
    InsufficientSources,
    PatchTooLarge,
    // metrics, tensors
    DimensionMismatch,
    ShapeMismatch,
    // checkpoints
    BadMagic,
    CorruptHeader,
    TruncatedData,
    CheckpointMismatch,
    // inference
    EmptyCandidateSet,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library; the code carries the failure kind.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace presetforge
