#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fgbench {

enum class ErrorCode {
  kIo,
  kParse,
  kFormat,
  kDuplicateId,
  kDanglingReference,
  kExclusionOverlap,
  kCountMismatch,
  kNonFinite,
  kZeroRow,
  kDimensionMismatch,
  kUnknownId,
  kInvalidArgument,
  kInsufficientCandidates,
  kMissingScore,
  kPendingItems,
  kSizeMismatch,
};

// Every failure raised by the library. `ids` names the offending
// identifiers (or "row,col" coordinates) so callers can report them.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::vector<std::string> ids = {})
      : std::runtime_error(what), code_(code), ids_(std::move(ids)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  ErrorCode code_;
  std::vector<std::string> ids_;
};

inline std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 10) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += '"' + ids[i] + '"';
  }
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

}  // namespace fgbench
