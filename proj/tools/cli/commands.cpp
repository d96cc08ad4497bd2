#include "commands.hpp"

#include "../common/workflow.hpp"
#include "../service/service.hpp"

#include "impact/error.hpp"
#include "impact/power_sim.hpp"
#include "impact/quality.hpp"
#include "impact/random.hpp"
#include "impact/records_io.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace impact::cli {

namespace fs = std::filesystem;

namespace {

records::VisitPolicy parse_policy(const std::string& s) {
  if (s == "last-blinded-day") return records::VisitPolicy::LastBlindedDay;
  if (s == "latest") return records::VisitPolicy::Latest;
  throw Error(errc::kInvalidArgument, "visit policy must be last-blinded-day or latest");
}

quality::Lexicons lexicons_from(const fs::path& dir) {
  return dir.empty() ? quality::Lexicons::builtin() : quality::Lexicons::load(dir);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(errc::kIo, "cannot write " + path.string());
  return out;
}

panel::Tiers read_ordering(const fs::path& path) {
  auto in = open_input(path);
  if (path.extension() == ".json") {
    try {
      return panel::tiers_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(errc::kMalformedDocument, path.string() + ": " + e.what());
    }
  }
  return panel::tiers_from_csv(in);
}

}  // namespace

analysis::AnalysisOptions StatsArgs::options() const {
  return app::options_from_json(
      {{"alternative", alternative}, {"method", method}, {"continuity", continuity}, {"exact_cap", exact_cap},
       {"alpha", alpha}});
}

int ingest(const IngestArgs& args, std::ostream& out) {
  const auto data = records::ingest_file(args.input);
  const auto selection = records::select_for_analysis(data, parse_policy(args.visit_policy), !args.no_cgi);
  if (!args.export_path.empty()) {
    auto file = open_output(args.export_path);
    if (args.export_path.extension() == ".csv") records::export_csv(data, file);
    else records::export_jsonl(data, file);
  }
  out << nlohmann::json{{"participants", data.participants.size()},
                        {"anecdotes", data.anecdotes.size()},
                        {"selected_for_analysis", selection.anecdotes.size()},
                        {"visit_findings", app::findings_json(selection.findings)}}
             .dump(2)
      << "\n";
  return 0;
}

int quality(const QualityArgs& args, std::ostream& out) {
  const auto lex = lexicons_from(args.lexicon_dir);
  std::vector<quality::QualityReport> reports;
  if (args.input.extension() == ".txt") {
    // One anecdote per non-blank line.
    auto in = open_input(args.input);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      auto report = quality::quality_report(line, lex);
      report.anecdote_id = "line-" + std::to_string(line_no);
      reports.push_back(std::move(report));
    }
  } else {
    for (const auto& a : records::ingest_file(args.input).anecdotes) reports.push_back(quality::quality_report(a, lex));
  }
  std::size_t failed = 0;
  for (const auto& r : reports) {
    if (!r.overall_pass) ++failed;
    out << quality::to_json(r).dump() << "\n";
  }
  std::cerr << reports.size() - failed << " of " << reports.size() << " anecdote(s) passed (lexicon "
            << lex.version() << ")\n";
  return failed == 0 ? 0 : 1;
}

int session_new(const SessionNewArgs& args, std::ostream& out) {
  const app::FileStore store(args.store);
  const auto lex = lexicons_from(args.lexicon_dir);
  app::NewSessionRequest req;
  req.session.allow_ties = args.allow_ties;
  req.session.seed = args.seed;
  req.session.label = args.label;
  req.policy = parse_policy(args.visit_policy);
  req.cgi_declared = !args.no_cgi;
  req.participants = args.participants;
  const auto result = app::new_session(records::ingest_file(args.records), req, lex);
  store.save_sealed(result.opened.sealed);
  store.save_session(result.opened.session);
  const auto& s = result.opened.session;
  out << nlohmann::json{{"session_id", s.session_id()},
                        {"version", s.version()},
                        {"card_count", s.cards().size()},
                        {"warnings", app::findings_json(result.warnings)}}
             .dump(2)
      << "\n";
  return 0;
}

int session_export(const SessionExportArgs& args, std::ostream& out) {
  const app::FileStore store(args.store);
  const auto session = store.load_session(args.session_id);
  if (args.part == "session") {
    out << session.to_json().dump(2) << "\n";
  } else if (args.part == "cards") {
    out << session.cards_json().dump(2) << "\n";
  } else if (args.part == "sealed") {
    out << store.load_sealed(args.session_id).to_json().dump(2) << "\n";
  } else if (args.part == "ranks-csv") {
    // Template for an air-gapped panel: the current draft or, failing that,
    // one tier per card in presentation order.
    panel::Tiers tiers;
    if (session.ordering()) tiers = *session.ordering();
    else if (session.draft()) tiers = *session.draft();
    else
      for (const auto& c : session.cards()) tiers.push_back({c.card_id});
    panel::tiers_to_csv(tiers, out);
  } else {
    throw Error(errc::kInvalidArgument, "export part must be session, cards, sealed or ranks-csv");
  }
  return 0;
}

int session_import_ranks(const ImportRanksArgs& args, std::ostream& out) {
  const app::FileStore store(args.store);
  auto session = store.load_session(args.session_id);
  auto in = open_input(args.csv);
  const auto ranks = session.submit_ordering(panel::tiers_from_csv(in), args.actor, args.expected_version);
  store.save_session(session);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : ranks) arr.push_back({{"card_id", r.card_id}, {"rank", r.rank.to_double()}});
  out << nlohmann::json{{"session_id", session.session_id()}, {"version", session.version()}, {"ranks", arr}}.dump(2)
      << "\n";
  return 0;
}

int session_finalize(const FinalizeArgs& args, std::ostream& out) {
  const app::FileStore store(args.store);
  auto session = store.load_session(args.session_id);
  session.finalize(args.chair);
  store.save_session(session);
  out << nlohmann::json{{"session_id", session.session_id()},
                        {"status", std::string(panel::to_string(session.status()))},
                        {"version", session.version()}}
             .dump(2)
      << "\n";
  return 0;
}

int analyze(const AnalyzeArgs& args, std::ostream& out) {
  const app::FileStore store(args.store);
  const auto id = args.analysis_id.empty() ? panel::random_ids("a-")() : args.analysis_id;
  const auto report = app::run_analysis(store, args.session_id, app::load_arm_map(args.arms), args.stats.options(), id);
  if (args.format == "json") out << analysis::to_json(report).dump(2) << "\n";
  else out << analysis::render_text(report);
  return 0;
}

int what_if(const WhatIfArgs& args, std::ostream& out) {
  const app::FileStore store(args.store);
  out << analysis::to_json(app::run_what_if(store, args.analysis_id, read_ordering(args.ordering))).dump(2) << "\n";
  return 0;
}

int sensitivity(const SensitivityArgs& args, std::ostream& out) {
  const app::FileStore store(args.store);
  const auto strategy = analysis::parse_strategy(args.strategy);
  if (!strategy)
    throw Error(errc::kInvalidArgument, "strategy must be adjacent-swaps, intra-group-exchange or full-reshuffle");
  analysis::SensitivityOptions opts{*strategy, args.n_perturbations, args.seed, args.adjacent_swaps};
  auto j = analysis::to_json(app::run_sensitivity(store, args.analysis_id, opts));
  if (!args.include_values) j.erase("perturbed_p");
  out << j.dump(2) << "\n";
  return 0;
}

int simulate(const SimulateArgs& args, std::ostream& out) {
  auto in = open_input(args.grid);
  auto grid = sim::parse_grid(in);
  if (args.seed)
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i].seed = derive_seed(*args.seed, i);
  const auto results = sim::operating_characteristics(grid, args.threads);
  if (args.out_csv.empty()) {
    sim::write_results_csv(results, out);
  } else {
    auto file = open_output(args.out_csv);
    sim::write_results_csv(results, file);
  }
  return 0;
}

int serve(const ServeArgs& args, std::ostream& out) {
  service::ServiceConfig config;
  config.store_dir = args.store;
  config.arm_store_dir = args.arm_store;
  config.default_seed = args.seed;
  if (const char* cred = std::getenv(args.credential_env.c_str())) config.arm_credential = cred;
  service::Service svc(config);
  httplib::Server server;
  svc.install(server);
  if (!server.bind_to_port(args.host, args.port))
    throw Error(errc::kIo, "cannot bind " + args.host + ":" + std::to_string(args.port));
  out << "listening on http://" << args.host << ":" << args.port << " (store " << args.store.string() << ")"
      << (config.arm_credential.empty() ? ", analyses disabled: $" + args.credential_env + " is unset" : "")
      << std::endl;
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace impact::cli
