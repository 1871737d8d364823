#pragma once

#include <stdexcept>
#include <string>

namespace lscd {

// Raised when input data violates a documented invariant (bad file, degenerate
// vector, too-small overlap, ...). The CLI maps it to exit status 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DumpErrorKind {
  io,
  bad_magic,
  unsupported_version,
  truncated,
  checksum_mismatch,
  trailing_bytes,
  invalid_content,
  inconsistent_dimension,
};

inline const char *to_string(DumpErrorKind kind) {
  switch (kind) {
    case DumpErrorKind::io: return "I/O failure";
    case DumpErrorKind::bad_magic: return "bad magic";
    case DumpErrorKind::unsupported_version: return "unsupported version";
    case DumpErrorKind::truncated: return "truncated payload";
    case DumpErrorKind::checksum_mismatch: return "checksum mismatch";
    case DumpErrorKind::trailing_bytes: return "trailing bytes after checksum";
    case DumpErrorKind::invalid_content: return "invalid content";
    case DumpErrorKind::inconsistent_dimension: return "inconsistent dimensionality";
  }
  return "unknown";
}

class DumpError : public DataError {
 public:
  DumpError(DumpErrorKind kind, const std::string &detail)
      : DataError(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)), kind_(kind) {}

  DumpErrorKind kind() const noexcept { return kind_; }

 private:
  DumpErrorKind kind_;
};

}  // namespace lscd
