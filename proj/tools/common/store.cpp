#include "store.hpp"

#include "impact/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace impact::app {

namespace fs = std::filesystem;

namespace {

fs::path doc_path(const fs::path& root, const char* dir, const std::string& id) {
  if (!safe_id(id)) throw Error("not_found", "no such document: invalid id");
  return root / dir / (id + ".json");
}

[[noreturn]] void not_found(const char* what, const std::string& id) {
  throw Error("not_found", std::string("no such ") + what + ": " + id);
}

}  // namespace

bool safe_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  return true;
}

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const char* dir : {"sessions", "sealed", "analyses"}) {
    fs::create_directories(root_ / dir, ec);
    if (ec) throw Error(errc::kIo, "cannot create store directory " + (root_ / dir).string() + ": " + ec.message());
  }
}

bool FileStore::has_session(const std::string& id) const {
  return safe_id(id) && fs::exists(root_ / "sessions" / (id + ".json"));
}

panel::RankingSession FileStore::load_session(const std::string& id) const {
  if (!has_session(id)) not_found("session", id);
  return panel::RankingSession::from_json(read_json_file(doc_path(root_, "sessions", id)));
}

void FileStore::save_session(const panel::RankingSession& session) const {
  write_json_file(doc_path(root_, "sessions", session.session_id()), session.to_json());
}

std::vector<std::string> FileStore::session_ids() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_ / "sessions"))
    if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

panel::SealedMap FileStore::load_sealed(const std::string& session_id) const {
  const auto path = doc_path(root_, "sealed", session_id);
  if (!fs::exists(path)) not_found("sealed map for session", session_id);
  return panel::SealedMap::from_json(read_json_file(path));
}

void FileStore::save_sealed(const panel::SealedMap& sealed) const {
  write_json_file(doc_path(root_, "sealed", sealed.session_id()), sealed.to_json());
}

bool FileStore::has_analysis(const std::string& id) const {
  return safe_id(id) && fs::exists(root_ / "analyses" / (id + ".json"));
}

analysis::AnalysisReport FileStore::load_analysis(const std::string& id) const {
  if (!has_analysis(id)) not_found("analysis", id);
  return analysis::analysis_report_from_json(read_json_file(doc_path(root_, "analyses", id)));
}

void FileStore::save_analysis(const analysis::AnalysisReport& report) const {
  write_json_file(doc_path(root_, "analyses", report.analysis_id), analysis::to_json(report));
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kMalformedDocument, path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::kIo, "cannot write " + tmp.string());
    out << j.dump(2) << "\n";
    if (!out.flush()) throw Error(errc::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(errc::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

panel::ArmMap arm_map_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(errc::kMalformedDocument, "arm map must be an object of participant -> group");
  panel::ArmMap arms;
  for (const auto& [participant, group] : j.items()) {
    auto g = group.is_string() ? stats::parse_group(group.get<std::string>()) : std::nullopt;
    // The participant id is deliberately left out of the message.
    if (!g) throw Error(errc::kMalformedDocument, "arm map groups must be \"A\" or \"B\"");
    arms.emplace(participant, *g);
  }
  return arms;
}

panel::ArmMap load_arm_map(const fs::path& path) { return arm_map_from_json(read_json_file(path)); }

panel::CardGroups card_groups_from_report(const analysis::AnalysisReport& report) {
  panel::CardGroups groups;
  for (const auto& item : report.ranked_list) {
    if (!item.group) throw Error(errc::kMalformedDocument, "analysis report has no group assignments");
    groups.emplace(item.card_id, *item.group);
  }
  return groups;
}

analysis::AnalysisOptions options_from_json(const nlohmann::json& j, analysis::AnalysisOptions base) {
  if (j.is_null()) return base;
  if (!j.is_object()) throw Error(errc::kInvalidArgument, "options must be an object");
  try {
    if (j.contains("alternative")) {
      auto a = stats::parse_alternative(j.at("alternative").get<std::string>());
      if (!a) throw Error(errc::kInvalidArgument, "alternative must be two-sided, a-greater or b-greater");
      base.stats.alternative = *a;
    }
    if (j.contains("method")) {
      auto m = stats::parse_method_choice(j.at("method").get<std::string>());
      if (!m) throw Error(errc::kInvalidArgument, "method must be auto, exact or normal");
      base.stats.method = *m;
    }
    if (j.contains("continuity")) base.stats.continuity = j.at("continuity").get<bool>();
    if (j.contains("exact_cap")) base.stats.exact_cap = j.at("exact_cap").get<std::size_t>();
    if (j.contains("alpha")) base.alpha = j.at("alpha").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kInvalidArgument, std::string("options: ") + e.what());
  }
  return base;
}

nlohmann::json error_json(const std::string& code, const std::string& message, const nlohmann::json& detail) {
  nlohmann::json j = {{"code", code}, {"message", message}};
  j["detail"] = detail;
  return j;
}

}  // namespace impact::app
