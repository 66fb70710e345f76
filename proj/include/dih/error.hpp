#pragma once

#include <stdexcept>
#include <string>

namespace dih {

// Mirrors the dih_status codes of the C API (include/dih.h); keep the
// numbering in sync.
enum class Status : int {
    Ok = 0,
    InvalidArgument = 1,
    NotFound = 2,
    UnsupportedFormat = 3,
    CorruptData = 4,
    Io = 5,
    DimensionMismatch = 6,
    EmptyRegion = 7,
    VersionMismatch = 8,
    ChecksumMismatch = 9,
    BadManifest = 10,
    DisconnectedGraph = 11,
    Runtime = 12,
};

inline const char* status_name(Status s) {
    switch (s) {
        case Status::Ok: return "ok";
        case Status::InvalidArgument: return "invalid argument";
        case Status::NotFound: return "not found";
        case Status::UnsupportedFormat: return "unsupported format";
        case Status::CorruptData: return "corrupt data";
        case Status::Io: return "i/o error";
        case Status::DimensionMismatch: return "dimension mismatch";
        case Status::EmptyRegion: return "empty region";
        case Status::VersionMismatch: return "version mismatch";
        case Status::ChecksumMismatch: return "checksum mismatch";
        case Status::BadManifest: return "bad manifest";
        case Status::DisconnectedGraph: return "disconnected comparison graph";
        case Status::Runtime: return "runtime error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Status status, const std::string& message)
        : std::runtime_error(message), status_(status) {}
    Status status() const noexcept { return status_; }

private:
    Status status_;
};

[[noreturn]] inline void fail(Status status, const std::string& message) {
    throw Error(status, message);
}

} // namespace dih
