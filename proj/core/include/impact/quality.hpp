#pragma once

// Administrator quality checklist for a selected anecdote: it must describe a
// single specific event, carry an internal point of comparison, and contain no
// personally identifiable information. Detection is lexicon driven; PII is
// flagged for the administrator and the text is never rewritten.

#include "impact/anecdote.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace impact::quality {

struct Span {
  std::size_t begin = 0;  // byte offsets into the original text
  std::size_t end = 0;
  std::string text;

  bool operator==(const Span&) const = default;
};

struct Finding {
  bool passed = false;
  std::vector<Span> evidence;

  bool operator==(const Finding&) const = default;
};

enum class PiiCategory : std::uint8_t { ProperName, Honorific, Other };
std::string_view to_string(PiiCategory c);

struct PiiFinding {
  Span span;
  PiiCategory category = PiiCategory::ProperName;

  bool operator==(const PiiFinding&) const = default;
};

/// Phrase lists driving the checks. Phrases are stored lower case. `version`
/// is a content hash over all lists so every report names the exact lexicon
/// that produced it.
class Lexicons {
 public:
  /// The lexicon files shipped in core/data/lexicons, compiled in.
  static const Lexicons& builtin();
  /// Loads <dir>/<name>.txt for every lexicon name. Throws io_error.
  static Lexicons load(const std::filesystem::path& dir);
  /// Builds from raw file contents keyed by lexicon name.
  static Lexicons from_files(const std::vector<std::pair<std::string, std::string>>& files);

  static const std::vector<std::string_view>& names();

  const std::vector<std::string>& specific_event() const { return specific_event_; }
  const std::vector<std::string>& generality() const { return generality_; }
  const std::vector<std::string>& comparison() const { return comparison_; }
  const std::vector<std::string>& honorifics() const { return honorifics_; }
  const std::vector<std::string>& common_capitalized() const { return common_capitalized_; }
  const std::vector<std::string>& given_names() const { return given_names_; }
  const std::string& version() const { return version_; }

 private:
  std::vector<std::string> specific_event_;
  std::vector<std::string> generality_;
  std::vector<std::string> comparison_;
  std::vector<std::string> honorifics_;
  std::vector<std::string> common_capitalized_;
  std::vector<std::string> given_names_;
  std::string version_;
};

/// Passes when at least one specific-event phrase matches and generality
/// phrases do not outnumber the specific-event matches. Evidence lists the
/// specific-event matches. Throws empty_text on blank input.
Finding check_anecdotal(std::string_view text, const Lexicons& lex = Lexicons::builtin());

/// Passes when any baseline-comparison phrase matches. Throws empty_text.
Finding check_comparison(std::string_view text, const Lexicons& lex = Lexicons::builtin());

/// Flags, in text order:
///  - honorific followed by a capitalized word ("Dr. Lopez"), any position;
///  - given-name dictionary hits, any position;
///  - capitalized words that are not sentence-initial and not allowlisted;
///  - e-mail addresses and digit runs of 7+ digits (category Other).
std::vector<PiiFinding> scan_pii(std::string_view text, const Lexicons& lex = Lexicons::builtin());

struct QualityReport {
  std::string anecdote_id;
  Finding anecdotal;
  Finding comparison;
  std::vector<PiiFinding> pii_findings;
  bool overall_pass = false;
  std::string lexicon_version;

  bool operator==(const QualityReport&) const = default;
};

QualityReport quality_report(const records::Anecdote& anecdote, const Lexicons& lex = Lexicons::builtin());
QualityReport quality_report(std::string_view text, const Lexicons& lex = Lexicons::builtin());

nlohmann::json to_json(const QualityReport& report);

}  // namespace impact::quality
