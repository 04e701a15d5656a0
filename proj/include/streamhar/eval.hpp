#ifndef STREAMHAR_EVAL_HPP
#define STREAMHAR_EVAL_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "streamhar/correction.hpp"
#include "streamhar/events.hpp"
#include "streamhar/hhmm.hpp"

namespace streamhar {

struct MatchPolicy {
  double overlap = 0.5;  // required fraction of the truth episode's duration
};

struct TruthEpisode {
  int class_id = -1;
  std::size_t begin_index = 0;
  std::size_t end_index = 0;
  TimeMicros begin_ts = 0;
  TimeMicros end_ts = 0;
};

std::vector<TruthEpisode> truth_episodes(const LabeledStream& stream,
                                         const ClassRegistry& classes);

struct MatchPair {
  std::size_t truth = 0;
  std::size_t pred = 0;
  double overlap = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> missed;        // truth indices with no match
  std::vector<std::size_t> false_alarms;  // segment indices with no match
};

// Greedy best-overlap matching; every truth episode and every prediction is
// used at most once.
MatchResult match_segments(std::span<const Segment> predicted,
                           std::span<const TruthEpisode> truth, MatchPolicy policy);

struct ConfusionMatrix {
  int n = 0;
  std::vector<std::size_t> counts;  // truth row, predicted column

  std::size_t at(int truth, int pred) const { return counts[truth * n + pred]; }
  std::size_t& at(int truth, int pred) { return counts[truth * n + pred]; }
  // Each row scaled to sum 1; all-zero rows stay zero.
  std::vector<double> row_normalized() const;
};

struct Scores {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<double> f1;  // per class id
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

// Accuracy = correctly labeled truth episodes / truth count. Misses land in
// the Other column; unmatched predictions land in the Other row unless their
// final label is already Other (a correct rejection, kept out of the grid).
Scores score(const MatchResult& matches, std::span<const Segment> predicted,
             std::span<const TruthEpisode> truth, const ClassRegistry& classes);

std::vector<Segment> drop_truncated(std::span<const Segment> segments);

// Fraction of truth episodes whose matched segment has both boundaries
// within beta events.
double boundary_recall(std::span<const Segment> predicted,
                       std::span<const TruthEpisode> truth, MatchPolicy policy, int beta);

struct CvConfig {
  FitConfig fit;
  CorrectionConfig correction;
  MatchPolicy match;
};

struct CvResult {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;
  std::vector<Scores> folds;
};

// Contiguous-in-time folds split at top-level episode boundaries; per fold
// trains on the remainder (fit + densities) and scores corrected segments.
CvResult cross_validate(const LabeledStream& stream, const ObservationAlphabet& alphabet,
                        const ClassRegistry& classes, const CvConfig& config, int folds);

// Row-normalized confusion grid with class-name headers.
std::string confusion_csv(const Scores& scores, const ClassRegistry& classes);

struct SummaryRow {
  std::string model;
  std::string dataset;
  double accuracy = 0.0;
  double f1 = 0.0;
};

std::string summary_csv(std::span<const SummaryRow> rows);

}  // namespace streamhar

#endif  // STREAMHAR_EVAL_HPP
