#pragma once

#include <stdexcept>
#include <string>

namespace derivdepth {

/// Base class for malformed or unreadable on-disk artifacts (PFM, GMM1, OWM1).
class FileFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BadMagicError : public FileFormatError {
public:
    BadMagicError() : FileFormatError("bad magic") {}
};

class TruncatedPayloadError : public FileFormatError {
public:
    TruncatedPayloadError() : FileFormatError("truncated payload") {}
};

class SimplexViolationError : public FileFormatError {
public:
    explicit SimplexViolationError(const std::string& detail)
        : FileFormatError("simplex violation: " + detail) {}
};

}  // namespace derivdepth
