// streamhar: streaming activity recognition over smart-home sensor logs.
//
// Subcommands: synth, train, run, correct, evaluate, tune. A key/value
// config file (INI sections named after subcommands) can hold any option;
// command-line flags win over file values. Exit codes: 0 success, 1 domain
// error, 2 invalid configuration, 3 I/O failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "streamhar/baselines.hpp"
#include "streamhar/correction.hpp"
#include "streamhar/errors.hpp"
#include "streamhar/eval.hpp"
#include "streamhar/events.hpp"
#include "streamhar/hhmm.hpp"
#include "streamhar/model_io.hpp"
#include "streamhar/synth.hpp"

using namespace streamhar;

namespace {

struct Options {
  std::string train_path;
  std::string test_path;
  std::string model_path;
  std::string out_path;
  std::string dataset;
  std::string home = "default";
  std::string baseline;
  std::vector<double> candidates;
  int episodes = 200;
  std::uint64_t seed = 1;
  int beta = 3;
  double kappa = 1.0;
  double alpha = 0.08;
  bool alpha_set = false;
  double tau_begin = 0.0;
  bool tau_begin_set = false;
  double tau_end = 0.0;
  bool tau_end_set = false;
  int tod_bins = 24;
  int duration_bins = 16;
  double smoothing = 0.01;
  double rho = 0.5;
  int window_n = 20;
  double tw_span = 60.0;
  int folds = 0;
  bool live = false;
  bool strict = false;
};

Strictness strictness(const Options& o) {
  return o.strict ? Strictness::strict : Strictness::lenient;
}

LabeledStream read_stream(const std::string& path, Strictness s) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_failure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), s);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot open " + path + " for writing");
  out << text;
  if (!out) raise(Errc::io_failure, "failed writing " + path);
}

FitConfig fit_config(const Options& o) {
  FitConfig fc;
  fc.beta = o.beta;
  fc.kappa = o.kappa;
  if (o.tau_begin_set) fc.tau_begin = o.tau_begin;
  if (o.tau_end_set) fc.tau_end = o.tau_end;
  return fc;
}

CorrectionConfig correction_config(const Options& o) {
  CorrectionConfig cc;
  cc.alpha = o.alpha;
  cc.tod_bins = o.tod_bins;
  cc.duration_bins = o.duration_bins;
  cc.smoothing = o.smoothing;
  return cc;
}

int cmd_synth(const Options& o) {
  std::optional<HomeSpec> home = home_by_name(o.home);
  if (!home)
    raise(Errc::config_invalid,
          "unknown home '" + o.home + "' (default, confusable-pair, shared-zone)");
  LabeledStream stream = generate_stream(*home, o.episodes, o.seed);
  write_text(o.out_path, serialize_stream(stream));
  return 0;
}

int cmd_train(const Options& o) {
  LabeledStream train = read_stream(o.train_path, strictness(o));
  std::vector<LabeledStream> streams{train};
  ObservationAlphabet alphabet = build_alphabet(streams);
  ClassRegistry classes = ClassRegistry::from_streams(streams);

  ModelDocument doc;
  doc.model = fit_model(train, alphabet, classes, fit_config(o));
  doc.correction = correction_config(o);
  std::vector<CorrectionSample> samples = training_samples(train, classes);
  doc.pdfs = fit_all_pdfs(samples, classes, doc.correction);
  save_model(doc, o.model_path);
  return 0;
}

void correct_output(EngineOutput& out, const ModelDocument& doc, const CorrectionConfig& cc) {
  if (out.kind == OutputKind::segment && out.segment)
    out.segment->corrected_label = correct_label(*out.segment, doc.pdfs, doc.model.classes, cc);
}

int cmd_run_live(const ModelDocument& doc, const CorrectionConfig& cc, const Options& o) {
  EngineState state;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    LabeledStream one = parse_text(line, strictness(o));
    for (const SensorEvent& ev : one.events) {
      for (EngineOutput& out : step(doc.model, state, ev)) {
        correct_output(out, doc, cc);
        std::cout << output_to_jsonl(out, doc.model.classes) << '\n' << std::flush;
      }
    }
  }
  for (EngineOutput& out : finish(doc.model, state)) {
    correct_output(out, doc, cc);
    std::cout << output_to_jsonl(out, doc.model.classes) << '\n' << std::flush;
  }
  return 0;
}

int cmd_run(const Options& o) {
  ModelDocument doc = load_model(o.model_path);
  CorrectionConfig cc = doc.correction;
  if (o.alpha_set) cc.alpha = o.alpha;
  if (o.live) return cmd_run_live(doc, cc, o);
  if (o.test_path.empty()) raise(Errc::config_invalid, "run needs --test or --live");

  LabeledStream test = read_stream(o.test_path, strictness(o));
  RunResult rr = run_stream(doc.model, test.events);
  std::vector<Segment> corrected = rr.segments;
  correct_segments(corrected, doc.pdfs, doc.model.classes, cc);

  std::ostringstream out;
  std::size_t seg = 0;
  for (EngineOutput eo : rr.outputs) {
    if (eo.kind == OutputKind::segment && eo.segment)
      eo.segment->corrected_label = corrected[seg++].corrected_label;
    out << output_to_jsonl(eo, doc.model.classes) << '\n';
  }
  for (const Segment& s : corrected)
    out << "{\"type\":\"corrected_segment\",\"segment\":" << segment_to_json(s, doc.model.classes)
        << "}\n";
  write_text(o.out_path, out.str());
  return 0;
}

int cmd_correct(const Options& o) {
  ModelDocument doc = load_model(o.model_path);
  CorrectionConfig cc = doc.correction;
  if (o.alpha_set) cc.alpha = o.alpha;
  LabeledStream test = read_stream(o.test_path, strictness(o));
  RunResult rr = run_stream(doc.model, test.events);
  correct_segments(rr.segments, doc.pdfs, doc.model.classes, cc);
  std::ostringstream out;
  for (const Segment& s : rr.segments)
    out << segment_to_json(s, doc.model.classes) << '\n';
  write_text(o.out_path, out.str());
  return 0;
}

std::vector<BaselineKind> baseline_kinds(const std::string& selection) {
  if (selection == "all")
    return {BaselineKind::sw,   BaselineKind::tw, BaselineKind::swmi,
            BaselineKind::swtw, BaselineKind::dw, BaselineKind::pwpa};
  for (BaselineKind k : {BaselineKind::sw, BaselineKind::tw, BaselineKind::swmi,
                         BaselineKind::swtw, BaselineKind::dw, BaselineKind::pwpa})
    if (baseline_name(k) == selection) return {k};
  raise(Errc::config_invalid, "unknown baseline '" + selection + "'");
}

double episode_macro_f1(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
  std::vector<double> tp(k, 0), fp(k, 0), fn(k, 0);
  std::vector<int> support(k, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++support[truth[i]];
    if (truth[i] == pred[i])
      ++tp[truth[i]];
    else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  double sum = 0.0;
  int n = 0;
  for (int c = 0; c < k; ++c) {
    if (support[c] == 0) continue;
    double denom = 2 * tp[c] + fp[c] + fn[c];
    sum += denom > 0 ? 2 * tp[c] / denom : 0.0;
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

std::string baseline_jsonl(const LabeledStream& test, const ClassRegistry& classes,
                           const BaselineResult& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.predictions.size(); ++i) {
    nlohmann::ordered_json j{
        {"type", "ongoing"},
        {"event_index", r.triggers[i]},
        {"timestamp", format_timestamp(test.events[r.triggers[i]].timestamp)},
        {"argmax", r.predictions[i]},
        {"class", classes.at(r.predictions[i]).name},
    };
    out << j.dump() << '\n';
  }
  return out.str();
}

int cmd_evaluate(const Options& o) {
  LabeledStream train = read_stream(o.train_path, strictness(o));
  std::vector<LabeledStream> streams{train};
  ObservationAlphabet alphabet = build_alphabet(streams);
  ClassRegistry classes = ClassRegistry::from_streams(streams);

  const bool to_dir = !o.out_path.empty();
  std::filesystem::path dir(o.out_path);
  if (to_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(Errc::io_failure, "cannot create " + o.out_path);
  }

  if (o.folds >= 2) {
    CvConfig cfg;
    cfg.fit = fit_config(o);
    cfg.correction = correction_config(o);
    cfg.match.overlap = o.rho;
    CvResult cv = cross_validate(train, alphabet, classes, cfg, o.folds);
    std::ostringstream csv;
    csv << "fold,accuracy,macro_f1,weighted_f1\n";
    char buf[128];
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
      std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g\n", f, cv.folds[f].accuracy,
                    cv.folds[f].macro_f1, cv.folds[f].weighted_f1);
      csv << buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.6g,%.6g,\nstd,%.6g,%.6g,\n", cv.mean_accuracy,
                  cv.mean_macro_f1, cv.std_accuracy, cv.std_macro_f1);
    csv << buf;
    write_text(to_dir ? (dir / "cv.csv").string() : "", csv.str());
    return 0;
  }

  if (o.test_path.empty()) raise(Errc::config_invalid, "evaluate needs --test or --folds");
  LabeledStream test = read_stream(o.test_path, strictness(o));

  HhmmModel model = fit_model(train, alphabet, classes, fit_config(o));
  RunResult rr = run_stream(model, test.events);
  CorrectionConfig cc = correction_config(o);
  std::vector<CorrectionSample> samples = training_samples(train, classes);
  std::vector<JointPdf> pdfs = fit_all_pdfs(samples, classes, cc);
  correct_segments(rr.segments, pdfs, classes, cc);

  std::vector<TruthEpisode> truth = truth_episodes(test, classes);
  MatchPolicy policy{o.rho};
  Scores scores = score(match_segments(rr.segments, truth, policy), rr.segments, truth, classes);

  std::vector<SummaryRow> rows;
  rows.push_back({"hhmm", o.dataset, scores.accuracy, scores.macro_f1});

  if (!o.baseline.empty()) {
    BaselineParams params;
    params.n = o.window_n;
    params.tw_span_s = o.tw_span;
    params.kappa = o.kappa;
    std::vector<int> ep_truth;
    for (const Episode& ep : test.episodes) ep_truth.push_back(classes.id_or_other(ep.activity));
    for (BaselineKind kind : baseline_kinds(o.baseline)) {
      BaselineResult r = evaluate_baseline(train, test, alphabet, classes, kind, params);
      rows.push_back({baseline_name(kind), o.dataset, r.episode_accuracy,
                      episode_macro_f1(ep_truth, r.episode_labels,
                                       static_cast<int>(classes.size()))});
      if (to_dir)
        write_text((dir / ("baseline_" + baseline_name(kind) + ".jsonl")).string(),
                   baseline_jsonl(test, classes, r));
    }
  }

  if (to_dir) {
    write_text((dir / "summary.csv").string(), summary_csv(rows));
    write_text((dir / "confusion.csv").string(), confusion_csv(scores, classes));
  } else {
    std::cout << summary_csv(rows) << '\n' << confusion_csv(scores, classes);
  }
  return 0;
}

int cmd_tune(const Options& o, const std::string& target) {
  LabeledStream train = read_stream(o.train_path, strictness(o));
  LabeledStream test = read_stream(o.test_path, strictness(o));
  std::vector<LabeledStream> streams{train};
  ObservationAlphabet alphabet = build_alphabet(streams);
  ClassRegistry classes = ClassRegistry::from_streams(streams);

  if (target == "beta") {
    std::vector<int> candidates;
    for (double c : o.candidates) {
      if (c < 2 || c != static_cast<int>(c))
        raise(Errc::config_invalid, "beta candidates must be integers >= 2");
      candidates.push_back(static_cast<int>(c));
    }
    if (candidates.empty()) candidates = {2, 3, 4, 5};
    std::vector<BetaSweepRow> rows =
        sweep_beta(train, test, alphabet, classes, candidates, fit_config(o));
    write_text(o.out_path, beta_sweep_csv(o.dataset, rows));
    return 0;
  }

  std::vector<double> candidates = o.candidates;
  if (candidates.empty()) candidates = {0.02, 0.04, 0.06, 0.08, 0.10};
  HhmmModel model = fit_model(train, alphabet, classes, fit_config(o));
  RunResult rr = run_stream(model, test.events);
  std::vector<CorrectionSample> samples = training_samples(train, classes);
  std::vector<AlphaSweepRow> rows = sweep_alpha(samples, rr.segments, test, classes,
                                                correction_config(o), candidates);
  write_text(o.out_path, alpha_sweep_csv(o.dataset, rows));
  return 0;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--beta", o.beta, "Begin/end detector window length")->check(CLI::Range(2, 64));
  cmd->add_option("--kappa", o.kappa, "Add-kappa smoothing")->check(CLI::PositiveNumber);
  cmd->add_option("--tod-bins", o.tod_bins, "Time-of-day histogram bins")
      ->check(CLI::Range(2, 1440));
  cmd->add_option("--duration-bins", o.duration_bins, "Log-duration histogram bins")
      ->check(CLI::Range(2, 1024));
  cmd->add_option("--smoothing", o.smoothing, "Histogram smoothing")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--strict", o.strict, "Fail on malformed input lines");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming activity recognition over smart-home sensor event logs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key/value config file; sections name subcommands; flags win");

  Options o;
  std::string tune_target;

  CLI::App* synth = app.add_subcommand("synth", "Generate an annotated synthetic sensor log");
  synth->add_option("--home", o.home, "Home layout: default, confusable-pair, shared-zone");
  synth->add_option("--episodes", o.episodes, "Number of top-level episodes")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--out", o.out_path, "Output stream file (stdout if omitted)");

  CLI::App* train = app.add_subcommand("train", "Fit a model document from an annotated log");
  train->add_option("--train", o.train_path, "Training stream")->required();
  train->add_option("--model", o.model_path, "Model file to write")->required();
  train->add_option("--alpha", o.alpha, "Correction density threshold")
      ->check(CLI::NonNegativeNumber);
  auto* tb = train->add_option("--tau-begin", o.tau_begin, "Fixed begin margin (else tuned)");
  auto* te = train->add_option("--tau-end", o.tau_end, "Fixed end margin (else tuned)");
  add_common(train, o);

  CLI::App* run = app.add_subcommand("run", "Run the engine; JSON-lines out");
  run->add_option("--model", o.model_path, "Model file")->required();
  run->add_option("--test", o.test_path, "Input stream file");
  run->add_option("--out", o.out_path, "Output path (stdout if omitted)");
  auto* ra = run->add_option("--alpha", o.alpha, "Override the stored correction threshold")
                 ->check(CLI::NonNegativeNumber);
  run->add_flag("--live", o.live, "Read events from stdin, flush one estimate per event");
  run->add_flag("--strict", o.strict, "Fail on malformed input lines");

  CLI::App* correct = app.add_subcommand("correct", "Run and emit corrected segments only");
  correct->add_option("--model", o.model_path, "Model file")->required();
  correct->add_option("--test", o.test_path, "Input stream file")->required();
  correct->add_option("--out", o.out_path, "Output path (stdout if omitted)");
  auto* ca = correct->add_option("--alpha", o.alpha, "Override the stored correction threshold")
                 ->check(CLI::NonNegativeNumber);
  correct->add_flag("--strict", o.strict, "Fail on malformed input lines");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score on a split or by cross-validation");
  evaluate->add_option("--train", o.train_path, "Training stream")->required();
  evaluate->add_option("--test", o.test_path, "Held-out stream (omit with --folds)");
  evaluate->add_option("--out", o.out_path, "Report directory (stdout if omitted)");
  evaluate->add_option("--folds", o.folds, "Cross-validation fold count")->check(CLI::Range(2, 64));
  evaluate->add_option("--alpha", o.alpha, "Correction density threshold")
      ->check(CLI::NonNegativeNumber);
  evaluate->add_option("--baseline", o.baseline,
                       "Also score baselines: sw, tw, swmi, swtw, dw, pwpa, all");
  evaluate->add_option("--rho", o.rho, "Segment match overlap fraction")
      ->check(CLI::Range(1e-9, 1.0));
  evaluate->add_option("--window", o.window_n, "Baseline window length")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--tw-span", o.tw_span, "Time-window span, seconds")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--dataset", o.dataset, "Dataset label for report rows");
  add_common(evaluate, o);

  CLI::App* tune = app.add_subcommand("tune", "Sweep beta or alpha; CSV out");
  tune->add_option("target", tune_target, "beta or alpha")
      ->required()
      ->check(CLI::IsMember({"beta", "alpha"}));
  tune->add_option("--train", o.train_path, "Training stream")->required();
  tune->add_option("--test", o.test_path, "Held-out stream")->required();
  tune->add_option("--out", o.out_path, "Output CSV (stdout if omitted)");
  tune->add_option("--candidates", o.candidates, "Comma-separated candidate values")
      ->delimiter(',');
  tune->add_option("--dataset", o.dataset, "Dataset label for the row");
  tune->add_option("--alpha", o.alpha, "Correction threshold used during the beta sweep")
      ->check(CLI::NonNegativeNumber);
  add_common(tune, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  o.alpha_set = ra->count() > 0 || ca->count() > 0;
  o.tau_begin_set = tb->count() > 0;
  o.tau_end_set = te->count() > 0;

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (train->parsed()) return cmd_train(o);
    if (run->parsed()) return cmd_run(o);
    if (correct->parsed()) return cmd_correct(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (tune->parsed()) return cmd_tune(o, tune_target);
  } catch (const Error& e) {
    std::cerr << "streamhar: " << e.what() << '\n';
    switch (e.code()) {
      case Errc::config_invalid: return 2;
      case Errc::io_failure: return 3;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "streamhar: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
