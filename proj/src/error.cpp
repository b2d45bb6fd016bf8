#include "presetforge/error.hpp"

namespace presetforge {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::UnknownSetting: return "UnknownSetting";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::MalformedDocument: return "MalformedDocument";
        case Errc::InvalidParameter: return "InvalidParameter";
        case Errc::InvalidImage: return "InvalidImage";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::InvalidLut: return "InvalidLut";
        case Errc::MalformedCube: return "MalformedCube";
        case Errc::SizeMismatch: return "SizeMismatch";
        case Errc::DecodeError: return "DecodeError";
        case Errc::UnsupportedFormat: return "UnsupportedFormat";
        case Errc::IoError: return "IoError";
        case Errc::InsufficientSources: return "InsufficientSources";
        case Errc::PatchTooLarge: return "PatchTooLarge";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::BadMagic: return "BadMagic";
        case Errc::CorruptHeader: return "CorruptHeader";
        case Errc::TruncatedData: return "TruncatedData";
        case Errc::CheckpointMismatch: return "CheckpointMismatch";
        case Errc::EmptyCandidateSet: return "EmptyCandidateSet";
    }
    return "Unknown";
}

}  // namespace presetforge
