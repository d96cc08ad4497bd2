#include "commands.hpp"

#include "../common/store.hpp"

#include "impact/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_stats_flags(CLI::App* cmd, impact::cli::StatsArgs& s) {
  cmd->add_option("--alternative", s.alternative, "two-sided | a-greater | b-greater")->capture_default_str();
  cmd->add_option("--method", s.method, "auto | exact | normal")->capture_default_str();
  cmd->add_flag("--continuity", s.continuity, "Apply the continuity correction to the normal approximation");
  cmd->add_option("--exact-cap", s.exact_cap, "Largest group size for the exact method")->capture_default_str();
  cmd->add_option("--alpha", s.alpha, "Level used in the significance statement")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = impact::cli;
  CLI::App app{"impact: anecdote intake, blinded panel ranking and rank-sum analysis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");

  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Seed for every random choice (shuffles, perturbations, simulation)");
  std::string store = "impact-store";
  app.add_option("--store", store, "Document store directory")->capture_default_str();

  std::function<int()> run;

  cli::IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate an anecdote file (JSONL or CSV)");
  c_ingest->add_option("input", ingest.input, "Records file")->required();
  c_ingest->add_option("--export", ingest.export_path, "Write the canonical dataset (.jsonl or .csv)");
  c_ingest->add_option("--visit-policy", ingest.visit_policy, "last-blinded-day | latest")->capture_default_str();
  c_ingest->add_flag("--no-cgi", ingest.no_cgi, "The study does not administer the CGI");
  c_ingest->callback([&] { run = [&] { return cli::ingest(ingest, std::cout); }; });

  cli::QualityArgs quality;
  auto* c_quality = app.add_subcommand("quality", "Run the administrator quality checklist");
  c_quality->add_option("input", quality.input, "Records file, or .txt with one anecdote per line")->required();
  c_quality->add_option("--lexicons", quality.lexicon_dir, "Directory of lexicon files (default: built in)");
  c_quality->callback([&] { run = [&] { return cli::quality(quality, std::cout); }; });

  auto* c_session = app.add_subcommand("session", "Blinded ranking sessions");
  c_session->require_subcommand(1);

  cli::SessionNewArgs snew;
  auto* c_new = c_session->add_subcommand("new", "Open a session from anecdote records");
  c_new->add_option("records", snew.records, "Records file")->required();
  c_new->add_flag("--allow-ties", snew.allow_ties, "Allow the panel to tie cards");
  c_new->add_option("--label", snew.label, "Free-form label, e.g. interim-1");
  c_new->add_option("--visit-policy", snew.visit_policy, "last-blinded-day | latest")->capture_default_str();
  c_new->add_flag("--no-cgi", snew.no_cgi, "The study does not administer the CGI");
  c_new->add_option("--participants", snew.participants, "Interim session over these participants only");
  c_new->add_option("--lexicons", snew.lexicon_dir, "Directory of lexicon files (default: built in)");
  c_new->callback([&] {
    run = [&] {
      snew.store = store;
      snew.seed = seed.value_or(0);
      return cli::session_new(snew, std::cout);
    };
  });

  cli::SessionExportArgs sexport;
  auto* c_export = c_session->add_subcommand("export", "Print a session document");
  c_export->add_option("session_id", sexport.session_id)->required();
  c_export->add_option("--part", sexport.part, "session | cards | sealed | ranks-csv")->capture_default_str();
  c_export->callback([&] {
    run = [&] {
      sexport.store = store;
      return cli::session_export(sexport, std::cout);
    };
  });

  cli::ImportRanksArgs simport;
  std::optional<std::uint64_t> expected_version;
  auto* c_import = c_session->add_subcommand("import-ranks", "Submit a card_id,tier_index CSV as the draft ordering");
  c_import->add_option("session_id", simport.session_id)->required();
  c_import->add_option("csv", simport.csv, "Ordering CSV")->required();
  c_import->add_option("--actor", simport.actor)->capture_default_str();
  c_import->add_option("--expected-version", expected_version, "Fail if the session changed since this version");
  c_import->callback([&] {
    run = [&] {
      simport.store = store;
      simport.expected_version = expected_version;
      return cli::session_import_ranks(simport, std::cout);
    };
  });

  cli::FinalizeArgs sfinal;
  auto* c_final = c_session->add_subcommand("finalize", "Finalize the draft ordering under chair authority");
  c_final->add_option("session_id", sfinal.session_id)->required();
  c_final->add_option("--chair", sfinal.chair, "Chair id")->required();
  c_final->callback([&] {
    run = [&] {
      sfinal.store = store;
      return cli::session_finalize(sfinal, std::cout);
    };
  });

  cli::AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Unblind a finalized session and run the rank-sum test");
  c_analyze->add_option("session_id", analyze.session_id)->required();
  c_analyze->add_option("--arms", analyze.arms, "Arm map JSON: {participant_id: A|B}")->required();
  c_analyze->add_option("--analysis-id", analyze.analysis_id, "Id for the stored report (default: random)");
  c_analyze->add_option("--format", analyze.format, "text | json")->capture_default_str();
  add_stats_flags(c_analyze, analyze.stats);
  c_analyze->callback([&] {
    run = [&] {
      analyze.store = store;
      return cli::analyze(analyze, std::cout);
    };
  });

  cli::WhatIfArgs whatif;
  auto* c_whatif = app.add_subcommand("whatif", "Exploratory re-analysis of a hypothetical ordering");
  c_whatif->add_option("analysis_id", whatif.analysis_id)->required();
  c_whatif->add_option("ordering", whatif.ordering, "card_id,tier_index CSV or tiers JSON")->required();
  c_whatif->callback([&] {
    run = [&] {
      whatif.store = store;
      return cli::what_if(whatif, std::cout);
    };
  });

  cli::SensitivityArgs sens;
  auto* c_sens = app.add_subcommand("sensitivity", "Re-analyze perturbed orderings of a stored analysis");
  c_sens->add_option("analysis_id", sens.analysis_id)->required();
  c_sens->add_option("--strategy", sens.strategy, "adjacent-swaps | intra-group-exchange | full-reshuffle")
      ->capture_default_str();
  c_sens->add_option("-n,--perturbations", sens.n_perturbations)->capture_default_str();
  c_sens->add_option("--swaps", sens.adjacent_swaps, "Adjacent transpositions per perturbation")
      ->capture_default_str();
  c_sens->add_flag("--values", sens.include_values, "Include every perturbed p-value");
  c_sens->callback([&] {
    run = [&] {
      sens.store = store;
      sens.seed = seed.value_or(0);
      return cli::sensitivity(sens, std::cout);
    };
  });

  cli::SimulateArgs simulate;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo operating characteristics over a grid file");
  c_sim->add_option("grid", simulate.grid, "Grid file")->required();
  c_sim->add_option("-o,--out", simulate.out_csv, "Results CSV (default: stdout)");
  c_sim->add_option("--threads", simulate.threads)->capture_default_str();
  c_sim->callback([&] {
    run = [&] {
      simulate.seed = seed;
      return cli::simulate(simulate, std::cout);
    };
  });

  cli::ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
  c_serve->add_option("--host", serve.host)->capture_default_str();
  c_serve->add_option("--port", serve.port)->capture_default_str();
  c_serve->add_option("--arm-store", serve.arm_store, "Directory of arm maps, read only for analyses")->required();
  c_serve->add_option("--credential-env", serve.credential_env, "Environment variable holding the arm credential")
      ->capture_default_str();
  c_serve->callback([&] {
    run = [&] {
      serve.store = store;
      serve.seed = seed.value_or(0);
      return cli::serve(serve, std::cout);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    return run();
  } catch (const impact::Error& e) {
    std::cerr << impact::app::error_json(e.code(), e.what(), e.detail()).dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << impact::app::error_json("internal", e.what()).dump(2) << "\n";
    return 1;
  }
}
