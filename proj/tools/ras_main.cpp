// ras: abstention-aware ASR evaluation toolkit.
//
// Subcommands: score, calibrate, make-ph, replace-logit, sweep-bar, serve,
// gen-synth-prefs. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 internal error.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ras/calibration.hpp"
#include "ras/corpus_io.hpp"
#include "ras/jsonw.hpp"
#include "ras/metric.hpp"
#include "ras/ph_tools.hpp"
#include "ras/reward_service.hpp"
#include "ras/synth.hpp"
#include "ras/tokenize.hpp"
#include "ras/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Writes via a temp file in the target directory plus rename, so readers
// never observe a half-written file. An empty path means stdout.
void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) ras::fail(ras::Errc::io_error, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) ras::fail(ras::Errc::io_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    ras::fail(ras::Errc::io_error, "cannot move output into place: " + ec.message());
  }
}

std::string alpha_check(const std::string& s) {
  try {
    const double v = std::stod(s);
    if (v > 0.0 && v < 1.0) return {};
  } catch (...) {
  }
  return "must lie strictly between 0 and 1";
}

struct CommonFlags {
  double alpha = ras::kDefaultAlpha;
  std::string tokenize_mode = "whitespace";
  bool lowercase = false;
  bool strip_punct = false;
  bool strict = false;
  std::string in_path;
  std::string out_path;

  ras::TokenizeOptions tokenize_options() const {
    ras::TokenizeOptions opts;
    opts.mode = tokenize_mode == "mixed-cjk" ? ras::TokenizeMode::mixed_cjk
                                             : ras::TokenizeMode::whitespace;
    opts.lowercase = lowercase;
    opts.strip_punct = strip_punct;
    return opts;
  }
};

void add_tokenize_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--tokenize", f.tokenize_mode, "Tokenization mode")
      ->check(CLI::IsMember({"whitespace", "mixed-cjk"}))
      ->capture_default_str();
  cmd->add_flag("--lowercase", f.lowercase, "ASCII-lowercase lexical words");
  cmd->add_flag("--strip-punct", f.strip_punct, "Strip leading/trailing ASCII punctuation");
}

void report_row_errors(const std::vector<ras::RowFailure>& errors, const char* stage) {
  for (const auto& e : errors)
    std::fprintf(stderr, "ras: %s line %lld%s%s: %s: %s\n", stage,
                 static_cast<long long>(e.row), e.id.empty() ? "" : " id ", e.id.c_str(),
                 ras::errc_name(e.code), e.message.c_str());
}

int cmd_score(const CommonFlags& f, const std::string& format) {
  const ras::TokenizeOptions opts = f.tokenize_options();
  ras::LoadResult loaded = ras::load_corpus_file(f.in_path, opts);
  report_row_errors(loaded.errors, "load");
  if (loaded.records.empty())
    ras::fail(ras::Errc::empty_corpus, "no valid rows in " + f.in_path);

  const ras::EvalReport report =
      ras::build_report(loaded.records, ras::AlphaParam(f.alpha), opts);
  for (const auto& e : report.failures)
    std::fprintf(stderr, "ras: score id %s: %s: %s\n", e.id.c_str(), ras::errc_name(e.code),
                 e.message.c_str());

  std::ostringstream body;
  if (format == "tsv")
    ras::write_report_tsv(report, body);
  else
    ras::write_report_json(report, body);
  write_output(f.out_path, body.str());

  if (f.strict && (!loaded.errors.empty() || !report.failures.empty())) return kExitData;
  return kExitOk;
}

int cmd_calibrate(const CommonFlags& f, double lambda) {
  ras::PreferenceLoadResult loaded = ras::load_preference_records_file(f.in_path);
  for (const auto& e : loaded.errors)
    std::fprintf(stderr, "ras: prefs line %lld id %s: %s\n", static_cast<long long>(e.line),
                 e.id.c_str(), e.message.c_str());
  if (loaded.records.empty())
    ras::fail(ras::Errc::empty_records, "no valid preference records in " + f.in_path);

  const ras::CalibrationResult result =
      ras::fit_alpha(loaded.records, lambda, f.tokenize_options());
  if (result.flat)
    std::fprintf(stderr, "ras: calibrate: loss is flat in alpha (degenerate data)\n");
  if (result.at_boundary)
    std::fprintf(stderr, "ras: calibrate: minimum sits on the search boundary\n");

  std::ostringstream body;
  ras::write_calibration_json(result, lambda, static_cast<int64_t>(loaded.records.size()),
                              body);
  write_output(f.out_path, body.str());
  if (f.strict && !loaded.errors.empty()) return kExitData;
  return kExitOk;
}

int cmd_make_ph(const CommonFlags& f, const std::string& counts_path) {
  const ras::TokenizeOptions opts = f.tokenize_options();
  ras::LoadResult loaded = ras::load_corpus_file(f.in_path, opts);
  report_row_errors(loaded.errors, "load");

  ras::TokenCountFn counts = ras::whitespace_token_count;
  if (!counts_path.empty()) counts = ras::TokenCountTable::load_json_file(counts_path).fn();

  std::vector<ras::UtteranceRecord> out_rows;
  int64_t failures = 0;
  for (const auto& rec : loaded.records) {
    try {
      const ras::WordSeq replaced =
          ras::gt_guided_replace(ras::tokenize(rec.ref, opts), ras::tokenize(rec.hyp, opts),
                                 counts);
      out_rows.push_back({rec.id, rec.ref, replaced.to_string(), std::nullopt});
    } catch (const ras::Error& e) {
      ++failures;
      std::fprintf(stderr, "ras: make-ph id %s: %s: %s\n", rec.id.c_str(),
                   ras::errc_name(e.code()), e.what());
    }
  }
  std::ostringstream body;
  ras::write_corpus(out_rows, body);
  write_output(f.out_path, body.str());
  if (f.strict && (failures > 0 || !loaded.errors.empty())) return kExitData;
  return kExitOk;
}

int cmd_replace_logit(const CommonFlags& f, double bar) {
  const ras::TokenizeOptions opts = f.tokenize_options();
  ras::LoadResult loaded = ras::load_corpus_file(f.in_path, opts);
  report_row_errors(loaded.errors, "load");

  std::vector<ras::UtteranceRecord> out_rows;
  int64_t failures = 0;
  for (const auto& rec : loaded.records) {
    if (!rec.confidences.has_value()) {
      ++failures;
      std::fprintf(stderr, "ras: replace-logit id %s: row has no confidences\n",
                   rec.id.c_str());
      continue;
    }
    const ras::WordSeq replaced = ras::logit_replace(rec.confident_hyp(opts), bar);
    out_rows.push_back({rec.id, rec.ref, replaced.to_string(), std::nullopt});
  }
  std::ostringstream body;
  ras::write_corpus(out_rows, body);
  write_output(f.out_path, body.str());
  if (f.strict && (failures > 0 || !loaded.errors.empty())) return kExitData;
  return kExitOk;
}

int cmd_sweep_bar(const CommonFlags& f, const std::vector<double>& grid) {
  const ras::TokenizeOptions opts = f.tokenize_options();
  ras::LoadResult loaded = ras::load_corpus_file(f.in_path, opts);
  report_row_errors(loaded.errors, "load");

  std::vector<std::pair<ras::WordSeq, ras::ConfidentHyp>> corpus;
  int64_t failures = 0;
  for (const auto& rec : loaded.records) {
    if (!rec.confidences.has_value()) {
      ++failures;
      std::fprintf(stderr, "ras: sweep-bar id %s: row has no confidences\n", rec.id.c_str());
      continue;
    }
    corpus.emplace_back(ras::tokenize(rec.ref, opts), rec.confident_hyp(opts));
  }
  if (corpus.empty()) ras::fail(ras::Errc::empty_corpus, "no usable rows in " + f.in_path);

  const ras::BarSweepResult result =
      ras::sweep_bar(corpus, ras::AlphaParam(f.alpha), grid);
  std::string body = "{\"alpha\":" + ras::fixed6(f.alpha) +
                     ",\"best_bar\":" + ras::fixed6(result.best_bar) + ",\"curve\":[";
  for (size_t i = 0; i < result.curve.size(); ++i) {
    if (i) body += ',';
    body += "{\"bar\":" + ras::fixed6(result.curve[i].first) +
            ",\"micro_ras\":" + ras::fixed6(result.curve[i].second) + "}";
  }
  body += "]}\n";
  write_output(f.out_path, body);
  if (f.strict && (failures > 0 || !loaded.errors.empty())) return kExitData;
  return kExitOk;
}

int cmd_gen_synth_prefs(const ras::SynthPrefOptions& opts, const std::string& out_path) {
  const std::vector<ras::PreferenceRecord> records = ras::gen_synth_prefs(opts);
  std::ostringstream body;
  ras::write_preference_records(records, body);
  write_output(out_path, body.str());
  return kExitOk;
}

void handle_stop_signal(int) { ras::stop_server(); }

int cmd_serve(const ras::ServiceConfig& cfg) {
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  return ras::run_server(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abstention-aware ASR evaluation toolkit"};
  app.set_version_flag("--version", std::string(ras::kVersion));
  app.require_subcommand(1);
  app.allow_extras(false);

  CommonFlags flags;
  std::string format = "doc";
  double lambda = 0.1;
  std::string counts_path;
  double bar = 0.2;
  std::vector<double> bar_grid;
  ras::ServiceConfig service;
  ras::SynthPrefOptions synth;
  std::string noise = "stratified";

  CLI::App* score = app.add_subcommand("score", "Score a corpus and emit an evaluation report");
  score->add_option("--in", flags.in_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  score->add_option("--out", flags.out_path, "Output path (default stdout)");
  score->add_option("--alpha", flags.alpha, "Abstention cost factor")
      ->check(alpha_check, "ALPHA_IN_(0,1)")
      ->capture_default_str();
  score->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"doc", "tsv"}))
      ->capture_default_str();
  score->add_flag("--strict", flags.strict, "Exit 2 when any row fails");
  add_tokenize_flags(score, flags);

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Fit alpha to preference records");
  calibrate->add_option("--in", flags.in_path, "Preference JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--out", flags.out_path, "Output path (default stdout)");
  calibrate->add_option("--lambda", lambda, "Tie regularization weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  calibrate->add_flag("--strict", flags.strict, "Exit 2 when any record fails to load");
  add_tokenize_flags(calibrate, flags);

  CLI::App* make_ph = app.add_subcommand(
      "make-ph", "Replace hypothesis errors with placeholders, guided by the reference");
  make_ph->add_option("--in", flags.in_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  make_ph->add_option("--out", flags.out_path, "Output path (default stdout)");
  make_ph->add_option("--counts", counts_path, "Token count table JSON (segment -> count)")
      ->check(CLI::ExistingFile);
  make_ph->add_flag("--strict", flags.strict, "Exit 2 when any row fails");
  add_tokenize_flags(make_ph, flags);

  CLI::App* replace_logit = app.add_subcommand(
      "replace-logit", "Replace words below a confidence bar with placeholders");
  replace_logit->add_option("--in", flags.in_path, "Confidence corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  replace_logit->add_option("--out", flags.out_path, "Output path (default stdout)");
  replace_logit->add_option("--bar", bar, "Confidence bar in [0,1]")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  replace_logit->add_flag("--strict", flags.strict, "Exit 2 when any row fails");
  add_tokenize_flags(replace_logit, flags);

  CLI::App* sweep =
      app.add_subcommand("sweep-bar", "Sweep the confidence bar to maximize micro RAS");
  sweep->add_option("--in", flags.in_path, "Confidence corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", flags.out_path, "Output path (default stdout)");
  sweep->add_option("--alpha", flags.alpha, "Abstention cost factor")
      ->check(alpha_check, "ALPHA_IN_(0,1)")
      ->capture_default_str();
  sweep->add_option("--bar-grid", bar_grid, "Bars to evaluate (comma separated)")
      ->delimiter(',');
  sweep->add_flag("--strict", flags.strict, "Exit 2 when any row fails");
  add_tokenize_flags(sweep, flags);

  CLI::App* serve = app.add_subcommand("serve", "Run the batch reward service");
  serve->add_option("--bind", service.host, "Bind address")->capture_default_str();
  serve->add_option("--port", service.port, "Port")->capture_default_str();
  serve->add_option("--alpha", service.default_alpha, "Default abstention cost factor")
      ->check(alpha_check, "ALPHA_IN_(0,1)")
      ->capture_default_str();
  serve->add_option("--max-batch", service.max_batch, "Maximum items per score request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* gen = app.add_subcommand("gen-synth-prefs",
                                     "Generate synthetic preference records for testing");
  gen->add_option("--out", flags.out_path, "Output path (default stdout)");
  gen->add_option("--k", synth.k, "Number of records")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--votes", synth.votes, "Votes per record")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--alpha-true", synth.alpha_true, "Alpha the simulated annotators embody")
      ->check(alpha_check, "ALPHA_IN_(0,1)")
      ->capture_default_str();
  gen->add_option("--tie-rate", synth.tie_rate, "Expected fraction of tie votes")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  gen->add_option("--noise", noise, "Vote sampling noise model")
      ->check(CLI::IsMember({"stratified", "binomial"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score->parsed()) return cmd_score(flags, format);
    if (calibrate->parsed()) return cmd_calibrate(flags, lambda);
    if (make_ph->parsed()) return cmd_make_ph(flags, counts_path);
    if (replace_logit->parsed()) return cmd_replace_logit(flags, bar);
    if (sweep->parsed()) {
      if (bar_grid.empty())
        for (int i = 0; i <= 50; ++i) bar_grid.push_back(i / 100.0);
      return cmd_sweep_bar(flags, bar_grid);
    }
    if (serve->parsed()) return cmd_serve(service);
    if (gen->parsed()) {
      synth.noise = noise == "binomial" ? ras::VoteNoise::binomial : ras::VoteNoise::stratified;
      return cmd_gen_synth_prefs(synth, flags.out_path);
    }
  } catch (const ras::Error& e) {
    std::fprintf(stderr, "ras: %s: %s\n", ras::errc_name(e.code()), e.what());
    return e.code() == ras::Errc::internal ? kExitInternal : kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ras: unexpected error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
