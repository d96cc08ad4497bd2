#pragma once

// Schema-level blinding assertion: walks a JSON document and reports any
// identity-bearing key, or any string equal to a known participant id, arm
// code or site id.

#include "impact/anecdote.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <vector>

namespace blinding {

inline const std::set<std::string>& forbidden_keys() {
  static const std::set<std::string> keys = {
      "participant_id", "participant", "participants", "arm",        "arm_code",          "arms",
      "group",          "groups",      "site_id",      "site",       "visit_day",         "collected_on",
      "entries",        "is_last_blinded_day",         "cgi_done_first", "other_instruments_done_first"};
  return keys;
}

inline std::set<std::string> identity_values(const impact::records::Dataset& data) {
  std::set<std::string> v;
  for (const auto& p : data.participants) {
    v.insert(p.participant_id);
    v.insert(p.arm_code);
    v.insert(p.site_id);
  }
  for (const auto& a : data.anecdotes) v.insert(a.anecdote_id);
  return v;
}

/// Empty when the document is clean; otherwise one line per leak.
inline std::vector<std::string> leaks(const nlohmann::json& doc, const std::set<std::string>& identities,
                                      const std::string& path = "$") {
  std::vector<std::string> out;
  if (doc.is_object()) {
    for (const auto& [key, value] : doc.items()) {
      if (forbidden_keys().count(key)) out.push_back(path + "." + key + " is an identity field");
      for (auto& l : leaks(value, identities, path + "." + key)) out.push_back(std::move(l));
    }
  } else if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i)
      for (auto& l : leaks(doc[i], identities, path + "[" + std::to_string(i) + "]")) out.push_back(std::move(l));
  } else if (doc.is_string()) {
    const auto s = doc.get<std::string>();
    for (const auto& id : identities)
      if (s == id || (id.size() >= 3 && s.find(id) != std::string::npos))
        out.push_back(path + " contains identity value '" + id + "'");
  }
  return out;
}

}  // namespace blinding
