#include "streamhar/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "streamhar/errors.hpp"
#include "streamhar/logspace.hpp"

namespace streamhar {

namespace {

constexpr double kWeightFloor = 1e-6;

void check_stream(const LabeledStream& stream) {
  if (stream.events.empty()) raise(Errc::empty_stream, "no events to window");
}

// Innermost enclosing episode per event, -1 outside episodes.
std::vector<int> innermost_episode(const LabeledStream& stream) {
  std::vector<int> inner(stream.events.size(), -1);
  std::vector<std::size_t> order(stream.episodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Episode &ea = stream.episodes[a], &eb = stream.episodes[b];
    return ea.end_index - ea.begin_index > eb.end_index - eb.begin_index;
  });
  for (std::size_t idx : order) {
    const Episode& ep = stream.episodes[idx];
    for (std::size_t p = ep.begin_index; p <= ep.end_index; ++p) inner[p] = static_cast<int>(idx);
  }
  return inner;
}

}  // namespace

std::vector<int> event_labels(const LabeledStream& stream, const ClassRegistry& classes) {
  std::vector<int> inner = innermost_episode(stream);
  std::vector<int> labels(stream.events.size(), classes.other_id());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (inner[i] >= 0) labels[i] = classes.id_or_other(stream.episodes[inner[i]].activity);
  return labels;
}

std::vector<Window> windows_sw(const LabeledStream& stream, const ClassRegistry& classes, int n) {
  check_stream(stream);
  if (n < 1) raise(Errc::bad_parameter, "window size must be at least 1");
  std::vector<int> labels = event_labels(stream, classes);
  std::vector<Window> out;
  for (std::size_t i = static_cast<std::size_t>(n) - 1; i < stream.events.size(); ++i) {
    Window w;
    w.first = i - n + 1;
    w.last = i;
    w.weights.assign(static_cast<std::size_t>(n), 1.0);
    w.label = labels[i];
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Window> windows_tw(const LabeledStream& stream, const ClassRegistry& classes,
                               double span_s) {
  check_stream(stream);
  if (span_s <= 0.0) raise(Errc::bad_parameter, "time window span must be positive");
  std::vector<int> labels = event_labels(stream, classes);
  const auto span_us = static_cast<TimeMicros>(span_s * kMicrosPerSecond);
  std::vector<Window> out;
  std::size_t first = 0;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    while (stream.events[i].timestamp - stream.events[first].timestamp > span_us) ++first;
    Window w;
    w.first = first;
    w.last = i;
    w.weights.assign(i - first + 1, 1.0);
    w.label = labels[i];
    out.push_back(std::move(w));
  }
  return out;
}

MutualInfoTable MutualInfoTable::fit(const LabeledStream& train) {
  check_stream(train);
  MutualInfoTable table;
  std::set<std::string> sensors;
  for (const SensorEvent& ev : train.events) sensors.insert(ev.sensor_id);
  int idx = 0;
  for (const std::string& s : sensors) table.sensor_index_[s] = idx++;
  table.n_ = idx;
  table.mi_.assign(static_cast<std::size_t>(idx) * idx, 0.0);
  if (train.events.size() < 2) return table;

  const std::size_t pairs = train.events.size() - 1;
  std::vector<double> joint(static_cast<std::size_t>(idx) * idx, 0.0);
  std::vector<double> first(idx, 0.0), second(idx, 0.0);
  for (std::size_t t = 0; t + 1 < train.events.size(); ++t) {
    int a = table.sensor_index_[train.events[t].sensor_id];
    int b = table.sensor_index_[train.events[t + 1].sensor_id];
    joint[a * idx + b] += 1.0;
    first[a] += 1.0;
    second[b] += 1.0;
  }
  auto term = [](double p, double pu, double pv) {
    return p > 0.0 ? p * std::log(p / (pu * pv)) : 0.0;
  };
  for (int a = 0; a < idx; ++a) {
    for (int b = 0; b < idx; ++b) {
      double p11 = joint[a * idx + b] / pairs;
      double pa = first[a] / pairs, pb = second[b] / pairs;
      double p10 = pa - p11, p01 = pb - p11, p00 = 1.0 - pa - pb + p11;
      double mi = term(p11, pa, pb) + term(p10, pa, 1.0 - pb) + term(p01, 1.0 - pa, pb) +
                  term(p00, 1.0 - pa, 1.0 - pb);
      table.mi_[a * idx + b] = std::max(mi, 0.0);
    }
  }
  return table;
}

double MutualInfoTable::weight(const std::string& earlier, const std::string& trigger) const {
  auto a = sensor_index_.find(earlier);
  auto b = sensor_index_.find(trigger);
  if (a == sensor_index_.end() || b == sensor_index_.end()) return 0.0;
  return mi_[a->second * n_ + b->second];
}

std::vector<Window> windows_swmi(const LabeledStream& stream, const ClassRegistry& classes, int n,
                                 const MutualInfoTable& mi) {
  std::vector<Window> out = windows_sw(stream, classes, n);
  for (Window& w : out) {
    const std::string& trigger = stream.events[w.last].sensor_id;
    double total = 0.0;
    for (std::size_t j = w.first; j <= w.last; ++j) {
      double wt = std::max(mi.weight(stream.events[j].sensor_id, trigger), kWeightFloor);
      w.weights[j - w.first] = wt;
      total += wt;
    }
    // Same total mass as SW so only the relative emphasis changes.
    double norm = static_cast<double>(w.weights.size()) / total;
    for (double& wt : w.weights) wt *= norm;
  }
  return out;
}

std::vector<Window> windows_swtw(const LabeledStream& stream, const ClassRegistry& classes, int n,
                                 double lambda_per_s) {
  if (lambda_per_s < 0.0) raise(Errc::bad_parameter, "decay rate must be non-negative");
  std::vector<Window> out = windows_sw(stream, classes, n);
  for (Window& w : out) {
    TimeMicros t_last = stream.events[w.last].timestamp;
    for (std::size_t j = w.first; j <= w.last; ++j) {
      double age_s =
          static_cast<double>(t_last - stream.events[j].timestamp) / kMicrosPerSecond;
      w.weights[j - w.first] = std::exp(-lambda_per_s * age_s);
    }
  }
  return out;
}

double swtw_default_lambda(const LabeledStream& train, int n) {
  check_stream(train);
  if (n < 1) raise(Errc::bad_parameter, "window size must be at least 1");
  std::vector<double> spans;
  for (std::size_t i = static_cast<std::size_t>(n) - 1; i < train.events.size(); ++i) {
    double s = static_cast<double>(train.events[i].timestamp -
                                   train.events[i - n + 1].timestamp) /
               kMicrosPerSecond;
    spans.push_back(s);
  }
  if (spans.empty()) return 0.0;
  std::nth_element(spans.begin(), spans.begin() + spans.size() / 2, spans.end());
  double median = spans[spans.size() / 2];
  return median > 0.0 ? std::log(10.0) / median : 0.0;
}

std::vector<int> dw_sizes(const LabeledStream& train, const ClassRegistry& classes,
                          int fallback_n) {
  if (fallback_n < 1) raise(Errc::bad_parameter, "window size must be at least 1");
  std::vector<std::vector<int>> lengths(classes.size());
  for (const Episode& ep : train.episodes)
    lengths[classes.id_or_other(ep.activity)].push_back(
        static_cast<int>(ep.end_index - ep.begin_index + 1));
  std::vector<int> sizes(classes.size(), fallback_n);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (lengths[c].empty()) continue;
    auto mid = lengths[c].begin() + lengths[c].size() / 2;
    std::nth_element(lengths[c].begin(), mid, lengths[c].end());
    sizes[c] = std::max(1, *mid);
  }
  return sizes;
}

std::vector<Window> windows_dw(const LabeledStream& stream, const ClassRegistry& classes,
                               std::span<const int> sizes, std::span<const int> preview) {
  check_stream(stream);
  if (sizes.size() != classes.size())
    raise(Errc::bad_parameter, "need one window size per class");
  if (preview.size() != stream.events.size())
    raise(Errc::bad_parameter, "need one preview class per event");
  std::vector<int> labels = event_labels(stream, classes);
  std::vector<Window> out;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    int n = sizes[preview[i]];
    if (n < 1) raise(Errc::bad_parameter, "window size must be at least 1");
    Window w;
    w.first = i + 1 >= static_cast<std::size_t>(n) ? i + 1 - n : 0;
    w.last = i;
    w.weights.assign(i - w.first + 1, 1.0);
    w.label = labels[i];
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Window> windows_pwpa(const LabeledStream& stream, const ClassRegistry& classes,
                                 int n) {
  return windows_sw(stream, classes, n);
}

WindowFeatures window_features(const LabeledStream& stream, const ObservationAlphabet& alphabet,
                               const Window& window) {
  WindowFeatures f;
  f.counts.assign(static_cast<std::size_t>(alphabet.symbol_count()), 0.0);
  for (std::size_t j = window.first; j <= window.last; ++j) {
    int sym = alphabet.index_or_unknown(stream.events[j].sensor_id, stream.events[j].value);
    f.counts[sym] += window.weights[j - window.first];
  }
  f.time_of_day_s = seconds_since_midnight(stream.events[window.last].timestamp);
  f.span_s = static_cast<double>(stream.events[window.last].timestamp -
                                 stream.events[window.first].timestamp) /
             kMicrosPerSecond;
  return f;
}

WindowClassifier WindowClassifier::fit(std::span<const WindowFeatures> features,
                                       std::span<const int> labels, int n_classes,
                                       int n_features, double kappa) {
  if (features.empty() || features.size() != labels.size())
    raise(Errc::empty_training_set, "no labeled windows to fit on");
  if (n_classes < 1 || n_features < 1 || kappa <= 0.0)
    raise(Errc::bad_parameter, "classifier shape or smoothing is invalid");
  WindowClassifier cls;
  cls.n_classes_ = n_classes;
  cls.n_features_ = n_features;
  std::vector<double> prior(n_classes, 0.0);
  std::vector<double> feat(static_cast<std::size_t>(n_classes) * n_features, 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    int c = labels[i];
    if (c < 0 || c >= n_classes) raise(Errc::bad_parameter, "window label out of range");
    if (static_cast<int>(features[i].counts.size()) != n_features)
      raise(Errc::bad_parameter, "feature vector width mismatch");
    prior[c] += 1.0;
    for (int f = 0; f < n_features; ++f) feat[c * n_features + f] += features[i].counts[f];
  }
  cls.log_prior_.resize(n_classes);
  cls.log_feat_.resize(feat.size());
  for (int c = 0; c < n_classes; ++c) {
    cls.log_prior_[c] =
        std::log((prior[c] + kappa) / (static_cast<double>(features.size()) + kappa * n_classes));
    double row = 0.0;
    for (int f = 0; f < n_features; ++f) row += feat[c * n_features + f];
    for (int f = 0; f < n_features; ++f)
      cls.log_feat_[c * n_features + f] =
          std::log((feat[c * n_features + f] + kappa) / (row + kappa * n_features));
  }
  return cls;
}

std::vector<double> WindowClassifier::log_scores(const WindowFeatures& f) const {
  if (!fitted()) raise(Errc::not_fitted, "classifier has not been fitted");
  if (static_cast<int>(f.counts.size()) != n_features_)
    raise(Errc::bad_parameter, "feature vector width mismatch");
  std::vector<double> scores(n_classes_);
  for (int c = 0; c < n_classes_; ++c) {
    double s = log_prior_[c];
    for (int j = 0; j < n_features_; ++j)
      if (f.counts[j] != 0.0) s += f.counts[j] * log_feat_[c * n_features_ + j];
    scores[c] = s;
  }
  return scores;
}

int WindowClassifier::predict(const WindowFeatures& f) const {
  std::vector<double> scores = log_scores(f);
  int best = 0;
  for (int c = 1; c < n_classes_; ++c)
    if (scores[c] > scores[best]) best = c;
  return best;
}

std::vector<int> classify_windows(std::span<const WindowFeatures> features,
                                  const WindowClassifier& classifier) {
  if (!classifier.fitted()) raise(Errc::not_fitted, "classifier has not been fitted");
  std::vector<int> out;
  out.reserve(features.size());
  for (const WindowFeatures& f : features) out.push_back(classifier.predict(f));
  return out;
}

namespace {

std::vector<WindowFeatures> all_features(const LabeledStream& stream,
                                         const ObservationAlphabet& alphabet,
                                         std::span<const Window> windows) {
  std::vector<WindowFeatures> out;
  out.reserve(windows.size());
  for (const Window& w : windows) out.push_back(window_features(stream, alphabet, w));
  return out;
}

std::vector<int> window_labels(std::span<const Window> windows) {
  std::vector<int> out;
  out.reserve(windows.size());
  for (const Window& w : windows) out.push_back(w.label);
  return out;
}

std::vector<double> softmax(std::span<const double> log_scores) {
  std::vector<double> v(log_scores.begin(), log_scores.end());
  double z = log_sum_exp(v);
  for (double& x : v) x = std::exp(x - z);
  return v;
}

}  // namespace

std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::sw: return "sw";
    case BaselineKind::tw: return "tw";
    case BaselineKind::swmi: return "swmi";
    case BaselineKind::swtw: return "swtw";
    case BaselineKind::dw: return "dw";
    case BaselineKind::pwpa: return "pwpa";
  }
  return "?";
}

BaselineResult evaluate_baseline(const LabeledStream& train, const LabeledStream& test,
                                 const ObservationAlphabet& alphabet,
                                 const ClassRegistry& classes, BaselineKind kind,
                                 const BaselineParams& params) {
  check_stream(train);
  check_stream(test);
  const int k = static_cast<int>(classes.size());
  const int n_base = alphabet.symbol_count();

  std::vector<Window> train_w, test_w;
  std::vector<int> predictions;

  auto fit_and_predict = [&](int n_features) {
    std::vector<WindowFeatures> ftr = all_features(train, alphabet, train_w);
    std::vector<int> ltr = window_labels(train_w);
    WindowClassifier cls = WindowClassifier::fit(ftr, ltr, k, n_features, params.kappa);
    std::vector<WindowFeatures> fte = all_features(test, alphabet, test_w);
    predictions = classify_windows(fte, cls);
  };

  switch (kind) {
    case BaselineKind::sw:
      train_w = windows_sw(train, classes, params.n);
      test_w = windows_sw(test, classes, params.n);
      fit_and_predict(n_base);
      break;
    case BaselineKind::tw:
      train_w = windows_tw(train, classes, params.tw_span_s);
      test_w = windows_tw(test, classes, params.tw_span_s);
      fit_and_predict(n_base);
      break;
    case BaselineKind::swmi: {
      MutualInfoTable mi = MutualInfoTable::fit(train);
      train_w = windows_swmi(train, classes, params.n, mi);
      test_w = windows_swmi(test, classes, params.n, mi);
      fit_and_predict(n_base);
      break;
    }
    case BaselineKind::swtw: {
      double lambda = swtw_default_lambda(train, params.n);
      train_w = windows_swtw(train, classes, params.n, lambda);
      test_w = windows_swtw(test, classes, params.n, lambda);
      fit_and_predict(n_base);
      break;
    }
    case BaselineKind::dw: {
      std::vector<int> sizes = dw_sizes(train, classes, params.n);
      std::vector<Window> sw_train = windows_sw(train, classes, params.n);
      std::vector<WindowFeatures> sw_ftr = all_features(train, alphabet, sw_train);
      WindowClassifier sw_cls = WindowClassifier::fit(sw_ftr, window_labels(sw_train), k,
                                                      n_base, params.kappa);
      // Preview pass: plain SW predictions give the size-selecting class.
      auto preview_of = [&](const LabeledStream& s) {
        std::vector<Window> w = windows_sw(s, classes, std::min<int>(params.n,
                                           static_cast<int>(s.events.size())));
        std::vector<int> preview(s.events.size(), classes.other_id());
        std::vector<WindowFeatures> f = all_features(s, alphabet, w);
        for (std::size_t i = 0; i < w.size(); ++i) preview[w[i].last] = sw_cls.predict(f[i]);
        return preview;
      };
      std::vector<int> train_preview = event_labels(train, classes);  // truth at train time
      std::vector<int> test_preview = preview_of(test);
      train_w = windows_dw(train, classes, sizes, train_preview);
      test_w = windows_dw(test, classes, sizes, test_preview);
      fit_and_predict(n_base);
      break;
    }
    case BaselineKind::pwpa: {
      train_w = windows_pwpa(train, classes, params.n);
      test_w = windows_pwpa(test, classes, params.n);
      std::vector<WindowFeatures> ftr = all_features(train, alphabet, train_w);
      std::vector<int> ltr = window_labels(train_w);
      // A plain classifier supplies the previous window's predicted
      // distribution, so train and test see the same kind of augment.
      WindowClassifier base = WindowClassifier::fit(ftr, ltr, k, n_base, params.kappa);
      auto augment = [&](std::vector<WindowFeatures> f) {
        std::vector<double> prev(static_cast<std::size_t>(k), 1.0 / k);
        for (std::size_t i = 0; i < f.size(); ++i) {
          std::vector<double> next;
          if (i + 1 < f.size()) next = softmax(base.log_scores(f[i]));
          for (int c = 0; c < k; ++c) f[i].counts.push_back(prev[c] * params.pwpa_scale);
          prev = std::move(next);
        }
        return f;
      };
      std::vector<WindowFeatures> ftr_aug = augment(std::move(ftr));
      WindowClassifier cls = WindowClassifier::fit(ftr_aug, ltr, k, n_base + k, params.kappa);
      std::vector<WindowFeatures> fte_aug = augment(all_features(test, alphabet, test_w));
      predictions = classify_windows(fte_aug, cls);
      break;
    }
  }

  BaselineResult result;
  result.kind = kind;
  result.predictions = predictions;
  result.triggers.reserve(test_w.size());
  for (const Window& w : test_w) result.triggers.push_back(w.last);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_w.size(); ++i)
    if (predictions[i] == test_w[i].label) ++correct;
  result.window_accuracy =
      test_w.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_w.size());

  // Episode accuracy: majority vote over the windows triggered inside each
  // episode (innermost wins for nested spans).
  std::vector<int> inner = innermost_episode(test);
  std::vector<std::vector<int>> votes(test.episodes.size(), std::vector<int>(k, 0));
  for (std::size_t i = 0; i < test_w.size(); ++i) {
    int ep = inner[test_w[i].last];
    if (ep >= 0) votes[ep][predictions[i]] += 1;
  }
  std::size_t ep_correct = 0;
  result.episode_labels.resize(test.episodes.size(), classes.other_id());
  for (std::size_t e = 0; e < test.episodes.size(); ++e) {
    int best = classes.other_id();
    int best_votes = 0;
    for (int c = 0; c < k; ++c)
      if (votes[e][c] > best_votes) {
        best_votes = votes[e][c];
        best = c;
      }
    result.episode_labels[e] = best;
    if (best == classes.id_or_other(test.episodes[e].activity)) ++ep_correct;
  }
  result.episode_accuracy =
      test.episodes.empty()
          ? 0.0
          : static_cast<double>(ep_correct) / static_cast<double>(test.episodes.size());
  return result;
}

}  // namespace streamhar
