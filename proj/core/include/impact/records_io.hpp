#pragma once

// Anecdote record exchange.
//
// JSONL (canonical): one object per anecdote, UTF-8, with exactly these keys:
//   anecdote_id, participant_id, site_id, arm_code, domain, text,
//   collected_on, is_selected_biggest, is_last_blinded_day, cgi_done_first,
//   other_instruments_done_first
// The last three describe the visit on day `collected_on`. Blank lines are
// ignored. CSV uses the same columns, in the same order, as a header row.

#include "impact/anecdote.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace impact::records {

/// Column order shared by the JSONL writer and the CSV header.
const std::vector<std::string>& record_columns();

/// Validates rows and builds a canonical Dataset. Throws duplicate_id for a
/// repeated anecdote_id and invariant_violation (naming the participant) for
/// inconsistent participant/visit data, empty text, more than one last
/// blinded visit, or a visit without exactly one selected anecdote.
Dataset ingest_jsonl(std::istream& in);
Dataset ingest_csv(std::istream& in);
/// Chooses CSV for a ".csv" extension, JSONL otherwise. Throws io_error.
Dataset ingest_file(const std::filesystem::path& path);

void export_jsonl(const Dataset& data, std::ostream& out);
void export_csv(const Dataset& data, std::ostream& out);

}  // namespace impact::records
