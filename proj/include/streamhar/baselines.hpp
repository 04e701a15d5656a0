#ifndef STREAMHAR_BASELINES_HPP
#define STREAMHAR_BASELINES_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "streamhar/events.hpp"

namespace streamhar {

// A trailing slice of the stream ending at its trigger event, with one
// contribution weight per event. The label is the class of the trigger
// event's innermost enclosing episode (Other outside episodes).
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;  // trigger event, inclusive
  std::vector<double> weights;
  int label = -1;
};

struct WindowFeatures {
  std::vector<double> counts;  // weighted symbol counts over the alphabet
  double time_of_day_s = 0.0;  // of the trigger event
  double span_s = 0.0;
};

// Class of each event's innermost enclosing episode; Other elsewhere.
std::vector<int> event_labels(const LabeledStream& stream, const ClassRegistry& classes);

std::vector<Window> windows_sw(const LabeledStream& stream, const ClassRegistry& classes, int n);
std::vector<Window> windows_tw(const LabeledStream& stream, const ClassRegistry& classes,
                               double span_s);

// Indicator mutual information between one sensor firing at t and another at
// t+1, estimated from consecutive pairs of the training stream.
class MutualInfoTable {
 public:
  static MutualInfoTable fit(const LabeledStream& train);
  double weight(const std::string& earlier, const std::string& trigger) const;

 private:
  std::map<std::string, int> sensor_index_;
  std::vector<double> mi_;  // earlier x trigger
  int n_ = 0;
};

std::vector<Window> windows_swmi(const LabeledStream& stream, const ClassRegistry& classes, int n,
                                 const MutualInfoTable& mi);
std::vector<Window> windows_swtw(const LabeledStream& stream, const ClassRegistry& classes, int n,
                                 double lambda_per_s);
// Decay making the oldest event of a typical n-event window weigh 0.1.
double swtw_default_lambda(const LabeledStream& train, int n);

// Per-class window sizes: median episode event count on training data.
std::vector<int> dw_sizes(const LabeledStream& train, const ClassRegistry& classes,
                          int fallback_n);
// Window length chosen by each event's preview class (from a plain SW pass).
std::vector<Window> windows_dw(const LabeledStream& stream, const ClassRegistry& classes,
                               std::span<const int> sizes, std::span<const int> preview);

// Same slicing as SW; the two-level feature augmentation happens at
// classification time.
std::vector<Window> windows_pwpa(const LabeledStream& stream, const ClassRegistry& classes,
                                 int n);

WindowFeatures window_features(const LabeledStream& stream, const ObservationAlphabet& alphabet,
                               const Window& window);

// Weighted-count multinomial model with a class prior; shared by all six
// baselines so only the windowing differs.
class WindowClassifier {
 public:
  static WindowClassifier fit(std::span<const WindowFeatures> features,
                              std::span<const int> labels, int n_classes, int n_features,
                              double kappa);

  bool fitted() const { return n_classes_ > 0; }
  int n_features() const { return n_features_; }
  std::vector<double> log_scores(const WindowFeatures& f) const;
  int predict(const WindowFeatures& f) const;  // ties to the lowest id

 private:
  int n_classes_ = 0;
  int n_features_ = 0;
  std::vector<double> log_prior_;
  std::vector<double> log_feat_;
};

std::vector<int> classify_windows(std::span<const WindowFeatures> features,
                                  const WindowClassifier& classifier);

enum class BaselineKind { sw, tw, swmi, swtw, dw, pwpa };

struct BaselineParams {
  int n = 20;
  double tw_span_s = 60.0;
  double kappa = 1.0;
  // Scale of the previous-prediction slot relative to raw counts.
  double pwpa_scale = 1.0;
};

struct BaselineResult {
  BaselineKind kind;
  std::vector<int> predictions;        // one per test window
  std::vector<std::size_t> triggers;   // trigger event index per window
  std::vector<int> episode_labels;     // majority-vote label per test episode
  double window_accuracy = 0.0;
  double episode_accuracy = 0.0;       // majority vote over each truth episode
};

BaselineResult evaluate_baseline(const LabeledStream& train, const LabeledStream& test,
                                 const ObservationAlphabet& alphabet,
                                 const ClassRegistry& classes, BaselineKind kind,
                                 const BaselineParams& params);

std::string baseline_name(BaselineKind kind);

}  // namespace streamhar

#endif  // STREAMHAR_BASELINES_HPP
