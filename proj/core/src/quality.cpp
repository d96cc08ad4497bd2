#include "impact/quality.hpp"

#include "builtin_lexicons.hpp"
#include "impact/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <tuple>
#include <unordered_set>

namespace impact::quality {
namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

std::vector<std::string> parse_lexicon(std::string_view content) {
  std::vector<std::string> out;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    out.push_back(lower(std::string_view(line).substr(first, last - first + 1)));
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

// Lower-cased copy of the text with typographic apostrophes folded to '\'',
// plus a map from each normalized byte back to its original offset.
struct Normalized {
  std::string text;
  std::vector<std::size_t> origin;  // size text.size() + 1
};

Normalized normalize(std::string_view text) {
  Normalized n;
  n.text.reserve(text.size());
  n.origin.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size();) {
    // U+2019 RIGHT SINGLE QUOTATION MARK
    if (text.compare(i, 3, "\xE2\x80\x99") == 0) {
      n.text.push_back('\'');
      n.origin.push_back(i);
      i += 3;
      continue;
    }
    n.text.push_back(ascii_lower(text[i]));
    n.origin.push_back(i);
    ++i;
  }
  n.origin.push_back(text.size());
  return n;
}

std::vector<Span> match_phrases(std::string_view original, const Normalized& norm,
                                const std::vector<std::string>& phrases) {
  std::vector<Span> spans;
  for (const auto& phrase : phrases) {
    if (phrase.empty()) continue;
    for (std::size_t pos = norm.text.find(phrase); pos != std::string::npos;
         pos = norm.text.find(phrase, pos + 1)) {
      const std::size_t end = pos + phrase.size();
      if (pos > 0 && is_ascii_alnum(norm.text[pos - 1])) continue;
      if (end < norm.text.size() && is_ascii_alnum(norm.text[end])) continue;
      const std::size_t b = norm.origin[pos];
      const std::size_t e = norm.origin[end];
      spans.push_back({b, e, std::string(original.substr(b, e - b))});
    }
  }
  std::sort(spans.begin(), spans.end(),
            [](const Span& x, const Span& y) { return std::tie(x.begin, x.end) < std::tie(y.begin, y.end); });
  // A shorter phrase nested inside a longer match ("than" in "than usual")
  // is the same evidence; keep the outermost.
  std::vector<Span> kept;
  for (auto& s : spans) {
    if (!kept.empty() && s.begin >= kept.back().begin && s.end <= kept.back().end) continue;
    while (!kept.empty() && kept.back().begin >= s.begin && kept.back().end <= s.end) kept.pop_back();
    kept.push_back(std::move(s));
  }
  return kept;
}

void require_text(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw Error(errc::kEmptyText, "anecdote text is empty");
}

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80;
}

bool is_upper_initial(std::string_view token) { return !token.empty() && token[0] >= 'A' && token[0] <= 'Z'; }

struct Token {
  std::size_t begin;
  std::size_t end;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(static_cast<unsigned char>(text[i])) || text[i] == '\'' || text[i] == '-') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t end = j;
    while (end > i && (text[end - 1] == '\'' || text[end - 1] == '-')) --end;
    // Trailing typographic apostrophe bytes.
    while (end >= i + 3 && text.compare(end - 3, 3, "\xE2\x80\x99") == 0) end -= 3;
    tokens.push_back({i, end});
    i = j;
  }
  return tokens;
}

bool sentence_initial(std::string_view text, std::size_t begin) {
  std::size_t k = begin;
  while (k > 0) {
    const char c = text[k - 1];
    if (c == ' ' || c == '\t' || c == '"' || c == '(' || c == '[' || c == '\'') {
      --k;
      continue;
    }
    // Opening curly quote U+201C.
    if (k >= 3 && text.compare(k - 3, 3, "\xE2\x80\x9C") == 0) {
      k -= 3;
      continue;
    }
    return c == '.' || c == '!' || c == '?' || c == '\n' || c == '\r';
  }
  return true;
}

// Lower-cased token without a possessive suffix, for dictionary lookups.
std::string lookup_key(std::string_view token) {
  std::string key = lower(token);
  for (std::string_view suffix : {"'s", "\xE2\x80\x99s"}) {
    if (key.size() > suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
      key.resize(key.size() - suffix.size());
      break;
    }
  }
  return key;
}

}  // namespace

std::string_view to_string(PiiCategory c) {
  switch (c) {
    case PiiCategory::ProperName: return "proper_name";
    case PiiCategory::Honorific: return "honorific";
    case PiiCategory::Other: return "other";
  }
  return "other";
}

const std::vector<std::string_view>& Lexicons::names() {
  static const std::vector<std::string_view> n = {"specific_event",     "generality",  "comparison", "honorifics",
                                                  "common_capitalized", "given_names"};
  return n;
}

Lexicons Lexicons::from_files(const std::vector<std::pair<std::string, std::string>>& files) {
  Lexicons lex;
  std::string canonical;
  for (auto name : names()) {
    auto it = std::find_if(files.begin(), files.end(), [&](const auto& f) { return f.first == name; });
    if (it == files.end()) throw Error(errc::kIo, "lexicon '" + std::string(name) + "' is missing");
    auto phrases = parse_lexicon(it->second);
    canonical.append(name).push_back('\n');
    for (const auto& p : phrases) canonical.append(p).push_back('\n');
    canonical.push_back('\0');
    if (name == "specific_event") lex.specific_event_ = std::move(phrases);
    else if (name == "generality") lex.generality_ = std::move(phrases);
    else if (name == "comparison") lex.comparison_ = std::move(phrases);
    else if (name == "honorifics") lex.honorifics_ = std::move(phrases);
    else if (name == "common_capitalized") lex.common_capitalized_ = std::move(phrases);
    else if (name == "given_names") lex.given_names_ = std::move(phrases);
  }
  lex.version_ = "lex-" + sha256_hex(canonical).substr(0, 16);
  return lex;
}

const Lexicons& Lexicons::builtin() {
  static const Lexicons lex = [] {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& [name, content] : detail::builtin_lexicon_files())
      files.emplace_back(std::string(name), std::string(content));
    return from_files(files);
  }();
  return lex;
}

Lexicons Lexicons::load(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (auto name : names()) {
    const auto path = dir / (std::string(name) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::kIo, "cannot read lexicon file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    files.emplace_back(std::string(name), buf.str());
  }
  return from_files(files);
}

Finding check_anecdotal(std::string_view text, const Lexicons& lex) {
  require_text(text);
  const auto norm = normalize(text);
  Finding f;
  f.evidence = match_phrases(text, norm, lex.specific_event());
  const auto general = match_phrases(text, norm, lex.generality());
  f.passed = !f.evidence.empty() && general.size() <= f.evidence.size();
  return f;
}

Finding check_comparison(std::string_view text, const Lexicons& lex) {
  require_text(text);
  Finding f;
  f.evidence = match_phrases(text, normalize(text), lex.comparison());
  f.passed = !f.evidence.empty();
  return f;
}

std::vector<PiiFinding> scan_pii(std::string_view text, const Lexicons& lex) {
  std::vector<PiiFinding> out;
  if (text.empty()) return out;

  const std::unordered_set<std::string> honorifics(lex.honorifics().begin(), lex.honorifics().end());
  const std::unordered_set<std::string> allow(lex.common_capitalized().begin(), lex.common_capitalized().end());
  const std::unordered_set<std::string> names(lex.given_names().begin(), lex.given_names().end());

  const auto tokens = tokenize(text);
  std::vector<bool> consumed(tokens.size(), false);
  auto span_of = [&](std::size_t b, std::size_t e) { return Span{b, e, std::string(text.substr(b, e - b))}; };

  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    auto tok = text.substr(tokens[i].begin, tokens[i].end - tokens[i].begin);
    if (!honorifics.count(lower(tok))) continue;  // "mrs. Garcia" counts too
    std::size_t k = tokens[i].end;
    if (k < text.size() && text[k] == '.') ++k;
    const std::size_t gap_begin = k;
    while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
    if (k == gap_begin || k != tokens[i + 1].begin) continue;
    auto next = text.substr(tokens[i + 1].begin, tokens[i + 1].end - tokens[i + 1].begin);
    if (!is_upper_initial(next)) continue;
    out.push_back({span_of(tokens[i].begin, tokens[i + 1].end), PiiCategory::Honorific});
    consumed[i] = consumed[i + 1] = true;
  }

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (consumed[i]) continue;
    auto tok = text.substr(tokens[i].begin, tokens[i].end - tokens[i].begin);
    if (!is_upper_initial(tok)) continue;
    const auto key = lookup_key(tok);
    const bool dictionary_hit = names.count(key) > 0;
    const bool mid_sentence = !sentence_initial(text, tokens[i].begin) && !allow.count(key);
    if (dictionary_hit || mid_sentence)
      out.push_back({span_of(tokens[i].begin, tokens[i].end), PiiCategory::ProperName});
  }

  static const std::regex email(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
  static const std::regex digits(R"(\+?\(?\d[\d\s().-]{5,}\d)");
  const std::string owned(text);
  for (const auto* re : {&email, &digits}) {
    for (auto it = std::sregex_iterator(owned.begin(), owned.end(), *re); it != std::sregex_iterator(); ++it) {
      const auto b = static_cast<std::size_t>(it->position());
      const auto e = b + static_cast<std::size_t>(it->length());
      if (re == &digits) {
        auto count = std::count_if(owned.begin() + b, owned.begin() + e, [](char c) { return c >= '0' && c <= '9'; });
        if (count < 7) continue;
      }
      // Drop word findings that fall inside this span (the local part of an address).
      std::erase_if(out, [&](const PiiFinding& f) { return f.span.begin >= b && f.span.end <= e; });
      out.push_back({span_of(b, e), PiiCategory::Other});
    }
  }

  std::sort(out.begin(), out.end(),
            [](const PiiFinding& x, const PiiFinding& y) { return x.span.begin < y.span.begin; });
  return out;
}

QualityReport quality_report(std::string_view text, const Lexicons& lex) {
  QualityReport r;
  r.anecdotal = check_anecdotal(text, lex);
  r.comparison = check_comparison(text, lex);
  r.pii_findings = scan_pii(text, lex);
  r.overall_pass = r.anecdotal.passed && r.comparison.passed && r.pii_findings.empty();
  r.lexicon_version = lex.version();
  return r;
}

QualityReport quality_report(const records::Anecdote& anecdote, const Lexicons& lex) {
  auto r = quality_report(anecdote.text, lex);
  r.anecdote_id = anecdote.anecdote_id;
  return r;
}

nlohmann::json to_json(const QualityReport& report) {
  auto spans = [](const std::vector<Span>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : v) arr.push_back({{"begin", s.begin}, {"end", s.end}, {"text", s.text}});
    return arr;
  };
  nlohmann::json pii = nlohmann::json::array();
  for (const auto& f : report.pii_findings)
    pii.push_back({{"begin", f.span.begin},
                   {"end", f.span.end},
                   {"text", f.span.text},
                   {"category", std::string(to_string(f.category))}});
  return {{"anecdote_id", report.anecdote_id},
          {"anecdotal", {{"passed", report.anecdotal.passed}, {"evidence", spans(report.anecdotal.evidence)}}},
          {"comparison", {{"passed", report.comparison.passed}, {"evidence", spans(report.comparison.evidence)}}},
          {"pii_findings", pii},
          {"overall_pass", report.overall_pass},
          {"lexicon_version", report.lexicon_version}};
}

}  // namespace impact::quality
