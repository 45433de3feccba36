#include "quadlearn/error.hpp"

namespace quadlearn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::GimbalLock: return "GimbalLock";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace quadlearn
