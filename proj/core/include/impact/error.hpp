#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace impact {

/// Failure raised by every impact operation. `code` is a stable
/// machine-readable identifier; `detail` carries optional structured context
/// (for example the quality report that caused an anecdote to be refused).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, nlohmann::json detail = nullptr)
      : std::runtime_error(message), code_(std::move(code)), detail_(std::move(detail)) {}

  const std::string& code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  nlohmann::json detail_;
};

namespace errc {
inline constexpr const char* kInvalidArgument = "invalid_argument";
inline constexpr const char* kInvalidRankVector = "invalid_rank_vector";
inline constexpr const char* kTiesPresent = "ties_present";
inline constexpr const char* kSizeAboveCap = "size_above_cap";
inline constexpr const char* kDegenerateDistribution = "degenerate_distribution";
inline constexpr const char* kEmptyText = "empty_text";
inline constexpr const char* kMalformedRow = "malformed_row";
inline constexpr const char* kDuplicateId = "duplicate_id";
inline constexpr const char* kInvariantViolation = "invariant_violation";
inline constexpr const char* kQualityRejected = "quality_rejected";
inline constexpr const char* kInvalidOrdering = "invalid_ordering";
inline constexpr const char* kTiesNotAllowed = "ties_not_allowed";
inline constexpr const char* kSessionState = "session_state";
inline constexpr const char* kMissingArmAssignment = "missing_arm_assignment";
inline constexpr const char* kVersionConflict = "version_conflict";
inline constexpr const char* kCardMismatch = "card_mismatch";
inline constexpr const char* kMalformedDocument = "malformed_document";
inline constexpr const char* kIo = "io_error";
}  // namespace errc

}  // namespace impact
