#include "impact/records_io.hpp"

#include "impact/csv.hpp"
#include "impact/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

namespace impact::records {
namespace {

struct Row {
  std::size_t line = 0;
  Anecdote anecdote;
  std::string site_id;
  std::string arm_code;
  VisitMeta visit;
};

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(errc::kMalformedRow, "line " + std::to_string(line) + ": " + what, {{"line", line}});
}

FunctionalDomain domain_or_throw(std::size_t line, std::string_view text) {
  auto d = parse_domain(text);
  if (!d) malformed(line, "unknown domain '" + std::string(text) + "'");
  return *d;
}

Row row_from_json(std::size_t line, const nlohmann::json& j) {
  if (!j.is_object()) malformed(line, "expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    const auto& cols = record_columns();
    if (std::find(cols.begin(), cols.end(), key) == cols.end()) malformed(line, "unknown field '" + key + "'");
  }
  auto str = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) malformed(line, std::string("field '") + key + "' must be a string");
    return j[key].get<std::string>();
  };
  auto boolean = [&](const char* key) -> bool {
    if (!j.contains(key) || !j[key].is_boolean())
      malformed(line, std::string("field '") + key + "' must be true or false");
    return j[key].get<bool>();
  };
  Row r;
  r.line = line;
  r.anecdote.anecdote_id = str("anecdote_id");
  r.anecdote.participant_id = str("participant_id");
  r.site_id = str("site_id");
  r.arm_code = str("arm_code");
  r.anecdote.domain = domain_or_throw(line, str("domain"));
  r.anecdote.text = str("text");
  if (!j.contains("collected_on") || !j["collected_on"].is_number_integer())
    malformed(line, "field 'collected_on' must be an integer study day");
  r.anecdote.collected_on = j["collected_on"].get<std::int64_t>();
  r.anecdote.is_selected_biggest = boolean("is_selected_biggest");
  r.visit.visit_day = r.anecdote.collected_on;
  r.visit.is_last_blinded_day = boolean("is_last_blinded_day");
  r.visit.cgi_done_first = boolean("cgi_done_first");
  r.visit.other_instruments_done_first = boolean("other_instruments_done_first");
  return r;
}

bool parse_bool(std::size_t line, const std::string& column, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  malformed(line, "column '" + column + "' must be true or false, got '" + v + "'");
}

std::int64_t parse_day(std::size_t line, const std::string& v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    malformed(line, "column 'collected_on' must be an integer, got '" + v + "'");
  return out;
}

Dataset build(std::vector<Row> rows) {
  auto violation = [](const std::string& participant, const std::string& what, std::size_t line) {
    throw Error(errc::kInvariantViolation, "participant " + participant + ": " + what + " (line " +
                                               std::to_string(line) + ")",
                {{"participant_id", participant}, {"line", line}});
  };

  std::set<std::string> anecdote_ids;
  std::map<std::string, ParticipantRecord> participants;
  std::map<std::pair<std::string, std::int64_t>, int> selected_per_visit;
  std::map<std::pair<std::string, std::int64_t>, std::size_t> first_line_of_visit;

  Dataset data;
  for (auto& row : rows) {
    const auto& a = row.anecdote;
    if (a.anecdote_id.empty()) malformed(row.line, "anecdote_id is empty");
    if (a.participant_id.empty()) malformed(row.line, "participant_id is empty");
    if (!anecdote_ids.insert(a.anecdote_id).second)
      throw Error(errc::kDuplicateId, "line " + std::to_string(row.line) + ": duplicate anecdote_id '" +
                                          a.anecdote_id + "'");
    if (a.text.find_first_not_of(" \t\r\n") == std::string::npos)
      violation(a.participant_id, "anecdote " + a.anecdote_id + " has empty text", row.line);

    auto [it, inserted] = participants.try_emplace(a.participant_id);
    auto& p = it->second;
    if (inserted) {
      p.participant_id = a.participant_id;
      p.site_id = row.site_id;
      p.arm_code = row.arm_code;
    } else if (p.site_id != row.site_id || p.arm_code != row.arm_code) {
      violation(a.participant_id, "site_id/arm_code differ between rows", row.line);
    }
    if (const auto* existing = p.visit(row.visit.visit_day)) {
      if (!(*existing == row.visit)) violation(a.participant_id, "visit metadata differ between rows", row.line);
    } else {
      p.visits.push_back(row.visit);
      first_line_of_visit[{a.participant_id, row.visit.visit_day}] = row.line;
    }
    if (a.is_selected_biggest) {
      if (++selected_per_visit[{a.participant_id, a.collected_on}] > 1)
        violation(a.participant_id,
                  "more than one anecdote marked as the single biggest improvement on day " +
                      std::to_string(a.collected_on),
                  row.line);
    }
    data.anecdotes.push_back(std::move(row.anecdote));
  }

  for (auto& [id, p] : participants) {
    std::sort(p.visits.begin(), p.visits.end(),
              [](const VisitMeta& x, const VisitMeta& y) { return x.visit_day < y.visit_day; });
    auto last_blinded = std::count_if(p.visits.begin(), p.visits.end(),
                                      [](const VisitMeta& v) { return v.is_last_blinded_day; });
    if (last_blinded > 1)
      violation(id, "more than one visit flagged as the last blinded day",
                first_line_of_visit[{id, p.visits.back().visit_day}]);
    for (const auto& v : p.visits) {
      if (!selected_per_visit.count({id, v.visit_day}))
        violation(id, "no anecdote marked as the single biggest improvement on day " + std::to_string(v.visit_day),
                  first_line_of_visit[{id, v.visit_day}]);
    }
    data.participants.push_back(std::move(p));
  }

  std::sort(data.anecdotes.begin(), data.anecdotes.end(), [](const Anecdote& x, const Anecdote& y) {
    return std::tie(x.participant_id, x.collected_on, x.anecdote_id) <
           std::tie(y.participant_id, y.collected_on, y.anecdote_id);
  });
  return data;
}

nlohmann::ordered_json row_to_json(const ParticipantRecord& p, const Anecdote& a) {
  const VisitMeta* v = p.visit(a.collected_on);
  nlohmann::ordered_json j;
  j["anecdote_id"] = a.anecdote_id;
  j["participant_id"] = a.participant_id;
  j["site_id"] = p.site_id;
  j["arm_code"] = p.arm_code;
  j["domain"] = std::string(to_string(a.domain));
  j["text"] = a.text;
  j["collected_on"] = a.collected_on;
  j["is_selected_biggest"] = a.is_selected_biggest;
  j["is_last_blinded_day"] = v && v->is_last_blinded_day;
  j["cgi_done_first"] = v && v->cgi_done_first;
  j["other_instruments_done_first"] = v && v->other_instruments_done_first;
  return j;
}

}  // namespace

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "anecdote_id", "participant_id",      "site_id",         "arm_code",       "domain",
      "text",        "collected_on",        "is_selected_biggest", "is_last_blinded_day",
      "cgi_done_first", "other_instruments_done_first"};
  return cols;
}

Dataset ingest_jsonl(std::istream& in) {
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      malformed(line_no, std::string("invalid JSON: ") + e.what());
    }
    rows.push_back(row_from_json(line_no, j));
  }
  return build(std::move(rows));
}

Dataset ingest_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return {};
  if (!header->fields.empty() && header->fields[0].rfind("\xEF\xBB\xBF", 0) == 0)
    header->fields[0].erase(0, 3);  // UTF-8 BOM
  const auto& cols = record_columns();
  if (header->fields != cols) malformed(header->line, "CSV header does not match the record columns");

  std::vector<Row> rows;
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;
    if (rec->fields.size() != cols.size())
      malformed(rec->line, "expected " + std::to_string(cols.size()) + " fields, got " +
                               std::to_string(rec->fields.size()));
    const auto& f = rec->fields;
    Row r;
    r.line = rec->line;
    r.anecdote.anecdote_id = f[0];
    r.anecdote.participant_id = f[1];
    r.site_id = f[2];
    r.arm_code = f[3];
    r.anecdote.domain = domain_or_throw(rec->line, f[4]);
    r.anecdote.text = f[5];
    r.anecdote.collected_on = parse_day(rec->line, f[6]);
    r.anecdote.is_selected_biggest = parse_bool(rec->line, cols[7], f[7]);
    r.visit.visit_day = r.anecdote.collected_on;
    r.visit.is_last_blinded_day = parse_bool(rec->line, cols[8], f[8]);
    r.visit.cgi_done_first = parse_bool(rec->line, cols[9], f[9]);
    r.visit.other_instruments_done_first = parse_bool(rec->line, cols[10], f[10]);
    rows.push_back(std::move(r));
  }
  return build(std::move(rows));
}

Dataset ingest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot open " + path.string());
  if (path.extension() == ".csv") return ingest_csv(in);
  return ingest_jsonl(in);
}

void export_jsonl(const Dataset& data, std::ostream& out) {
  for (const auto& a : data.anecdotes) {
    const auto* p = data.participant(a.participant_id);
    if (!p) throw Error(errc::kInvariantViolation, "anecdote " + a.anecdote_id + " has no participant record");
    out << row_to_json(*p, a).dump() << '\n';
  }
}

void export_csv(const Dataset& data, std::ostream& out) {
  csv::write_row(out, record_columns());
  for (const auto& a : data.anecdotes) {
    const auto* p = data.participant(a.participant_id);
    if (!p) throw Error(errc::kInvariantViolation, "anecdote " + a.anecdote_id + " has no participant record");
    const auto j = row_to_json(*p, a);
    std::vector<std::string> fields;
    for (const auto& col : record_columns()) {
      const auto& v = j[col];
      if (v.is_string()) fields.push_back(v.get<std::string>());
      else fields.push_back(v.dump());
    }
    csv::write_row(out, fields);
  }
}

}  // namespace impact::records
