#ifndef STREAMHAR_HHMM_HPP
#define STREAMHAR_HHMM_HPP

#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamhar/events.hpp"
#include "streamhar/hmm.hpp"

namespace streamhar {

// First-order chain over observation symbols: log initial distribution plus
// symbol-to-symbol log transitions. Scores a fixed-length window.
struct SymbolChain {
  int n_symbols = 0;
  std::vector<double> log_init;
  std::vector<double> log_trans;

  double log_tr(int from, int to) const { return log_trans[from * n_symbols + to]; }
  double score(std::span<const int> window) const;
};

SymbolChain fit_symbol_chain(const std::vector<std::vector<int>>& windows, int n_symbols,
                             double kappa);

// Begin detection: per-class chains over episode-prefix windows against a
// background chain over out-of-episode windows. Fires when the best class's
// log-likelihood ratio exceeds tau.
struct BeginDetector {
  int beta = 3;
  double tau = 0.0;
  std::vector<SymbolChain> class_chains;  // indexed by class id
  SymbolChain background;
  std::vector<char> has_model;

  // (best class id, ratio vs background); (-1, -inf) when nothing is modeled.
  std::pair<int, double> best_ratio(std::span<const int> window) const;
};

// End detection: per-class chains over episode-suffix windows against
// per-class continuation chains over interior windows.
struct EndDetector {
  int beta = 3;
  double tau = 0.0;
  std::vector<SymbolChain> end_chains;
  std::vector<SymbolChain> continuation_chains;
  std::vector<char> has_model;

  double end_ratio(int class_id, std::span<const int> window) const;
  double continuation_score(int class_id, std::span<const int> window) const;
};

// One level of the hierarchical parameter set: vertical entry distribution
// pi over n children and an n x (n+1) horizontal matrix whose last column
// is the termination probability of each child.
struct ThetaBlock {
  int n = 0;
  std::vector<double> pi;
  std::vector<double> trans;

  double at(int i, int j) const { return trans[i * (n + 1) + j]; }
  double end_prob(int i) const { return at(i, n); }
};

struct HhmmTheta {
  ThetaBlock root;  // children: begin detector, ongoing classifier, end detector
  ThetaBlock x1;    // children: one production state per observation symbol
  ThetaBlock x2;    // children: one production model per activity class
  ThetaBlock x3;    // children: one production state per observation symbol
};

void validate_theta(const HhmmTheta& theta, double tol = 1e-9);

struct FitConfig {
  int beta = 3;
  double kappa = 1.0;
  std::optional<double> tau_begin;  // empty = tuned on a held-out slice
  std::optional<double> tau_end;
  double holdout_fraction = 0.2;
};

struct HhmmModel {
  ObservationAlphabet alphabet;
  ClassRegistry classes;
  int beta = 3;
  double kappa = 1.0;
  std::vector<HmmParams> bodies;  // per class; single-state body models
  BeginDetector begin;
  EndDetector end;
  HhmmTheta theta;
  std::vector<char> has_model;
  std::vector<std::string> dropped_classes;

  int n_classes() const { return static_cast<int>(classes.size()); }
};

// Supervised fit: begin/body/end/continuation models from annotated
// episodes, background from out-of-episode windows, margins tuned to
// maximize boundary F1 on the trailing holdout slice unless given.
HhmmModel fit_model(const LabeledStream& train, const ObservationAlphabet& alphabet,
                    const ClassRegistry& classes, const FitConfig& config);

struct TraceRow {
  std::size_t event_index = 0;
  std::vector<double> log_likelihoods;
  int argmax = -1;
};

struct Segment {
  std::size_t begin_index = 0;
  std::size_t end_index = 0;
  TimeMicros begin_ts = 0;
  TimeMicros end_ts = 0;
  int raw_label = -1;
  std::optional<int> corrected_label;
  std::vector<TraceRow> trace;  // one row per actively tracked event; the
                                // first beta buffered events have no rows
  bool truncated = false;
  std::optional<std::size_t> parent_begin;  // set when this segment interrupted another

  int label() const { return corrected_label ? *corrected_label : raw_label; }
  double duration_s() const;
  double time_of_day_s() const;
};

struct OngoingEstimate {
  std::size_t event_index = 0;
  TimeMicros timestamp = 0;
  int argmax = -1;
  std::vector<double> log_likelihoods;
};

enum class OutputKind { begin, ongoing, interrupt_begin, resume, segment };

struct EngineOutput {
  OutputKind kind;
  std::size_t event_index = 0;
  TimeMicros timestamp = 0;
  std::optional<OngoingEstimate> estimate;
  std::optional<Segment> segment;
  std::optional<std::size_t> resumed_begin;
};

struct BufferedEvent {
  std::size_t index = 0;
  TimeMicros ts = 0;
  int symbol = 0;
};

struct TrackContext {
  std::size_t begin_index = 0;
  TimeMicros begin_ts = 0;
  std::vector<FilterState> filters;  // one per class; dead entries never read
  std::vector<TraceRow> trace;
  std::optional<std::size_t> parent_begin;
  // Pre-update filter states of the last beta steps; on suspension the host
  // rolls back to before the interrupter's begin window was absorbed.
  std::deque<std::vector<FilterState>> snapshots;
  // After a resume, end and interrupt checks wait until the rolling window
  // no longer straddles the nested segment.
  std::size_t guard_index = 0;
};

struct EngineState {
  enum class Mode { idle, tracking };
  Mode mode = Mode::idle;
  std::deque<BufferedEvent> buffer;
  std::optional<TrackContext> active;
  std::optional<TrackContext> suspended;  // at most one interruption level
  std::size_t next_index = 0;
  TimeMicros last_ts = std::numeric_limits<TimeMicros>::min();
};

// Feeds one event; may emit a begin, an ongoing estimate, an interruption,
// a resume, or a completed segment. State advances in place.
std::vector<EngineOutput> step(const HhmmModel& model, EngineState& state,
                               const SensorEvent& event);

// Flushes an unterminated segment (and any suspended host) as truncated.
std::vector<EngineOutput> finish(const HhmmModel& model, EngineState& state);

struct RunResult {
  std::vector<Segment> segments;
  std::vector<OngoingEstimate> estimates;
  std::vector<EngineOutput> outputs;
};

RunResult run_stream(const HhmmModel& model, std::span<const SensorEvent> events);

// Per-event per-class log-likelihood table of one segment, CSV.
std::string likelihood_trace(const HhmmModel& model, const Segment& segment);

struct BetaSweepRow {
  int beta = 0;
  double begin_accuracy = 0.0;
};

// Full fit+run per candidate; begin-detection accuracy counts a detected
// begin within beta events of an unmatched true begin as correct.
std::vector<BetaSweepRow> sweep_beta(const LabeledStream& train, const LabeledStream& test,
                                     const ObservationAlphabet& alphabet,
                                     const ClassRegistry& classes,
                                     std::span<const int> candidates, const FitConfig& base);

// One labeled row per dataset, one column per candidate.
std::string beta_sweep_csv(const std::string& dataset, std::span<const BetaSweepRow> rows);

double begin_detection_accuracy(std::span<const Segment> segments,
                                const std::vector<Episode>& truth, int beta);

}  // namespace streamhar

#endif  // STREAMHAR_HHMM_HPP
