#include "streamhar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "streamhar/errors.hpp"

namespace streamhar {

std::vector<TruthEpisode> truth_episodes(const LabeledStream& stream,
                                         const ClassRegistry& classes) {
  std::vector<TruthEpisode> out;
  out.reserve(stream.episodes.size());
  for (const Episode& ep : stream.episodes) {
    TruthEpisode t;
    t.class_id = classes.id_or_other(ep.activity);
    t.begin_index = ep.begin_index;
    t.end_index = ep.end_index;
    t.begin_ts = stream.events[ep.begin_index].timestamp;
    t.end_ts = stream.events[ep.end_index].timestamp;
    out.push_back(t);
  }
  return out;
}

MatchResult match_segments(std::span<const Segment> predicted,
                           std::span<const TruthEpisode> truth, MatchPolicy policy) {
  if (policy.overlap <= 0.0 || policy.overlap > 1.0)
    raise(Errc::bad_parameter, "overlap threshold must be in (0, 1]");
  struct Cand {
    double ratio;
    std::size_t t, p;
  };
  std::vector<Cand> cands;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    double t_dur = std::max(static_cast<double>(truth[t].end_ts - truth[t].begin_ts), 1.0);
    for (std::size_t p = 0; p < predicted.size(); ++p) {
      TimeMicros lo = std::max(truth[t].begin_ts, predicted[p].begin_ts);
      TimeMicros hi = std::min(truth[t].end_ts, predicted[p].end_ts);
      if (hi <= lo) continue;
      double ratio = static_cast<double>(hi - lo) / t_dur;
      if (ratio >= policy.overlap) cands.push_back({ratio, t, p});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return std::tie(a.t, a.p) < std::tie(b.t, b.p);
  });
  MatchResult result;
  std::vector<char> t_used(truth.size(), 0), p_used(predicted.size(), 0);
  for (const Cand& c : cands) {
    if (t_used[c.t] || p_used[c.p]) continue;
    t_used[c.t] = 1;
    p_used[c.p] = 1;
    result.pairs.push_back({c.t, c.p, c.ratio});
  }
  for (std::size_t t = 0; t < truth.size(); ++t)
    if (!t_used[t]) result.missed.push_back(t);
  for (std::size_t p = 0; p < predicted.size(); ++p)
    if (!p_used[p]) result.false_alarms.push_back(p);
  return result;
}

std::vector<double> ConfusionMatrix::row_normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += static_cast<double>(at(i, j));
    if (row == 0.0) continue;
    for (int j = 0; j < n; ++j) out[i * n + j] = static_cast<double>(at(i, j)) / row;
  }
  return out;
}

Scores score(const MatchResult& matches, std::span<const Segment> predicted,
             std::span<const TruthEpisode> truth, const ClassRegistry& classes) {
  if (truth.empty()) raise(Errc::empty_truth, "no ground-truth episodes to score against");
  const int k = static_cast<int>(classes.size());
  const int other = classes.other_id();

  Scores s;
  s.confusion.n = k;
  s.confusion.counts.assign(static_cast<std::size_t>(k) * k, 0);

  auto label_of = [&](const Segment& seg) {
    int l = seg.label();
    return l < 0 || l >= k ? other : l;
  };

  for (const MatchPair& pair : matches.pairs)
    s.confusion.at(truth[pair.truth].class_id, label_of(predicted[pair.pred])) += 1;
  for (std::size_t t : matches.missed) s.confusion.at(truth[t].class_id, other) += 1;
  for (std::size_t p : matches.false_alarms) {
    int l = label_of(predicted[p]);
    if (l != other) s.confusion.at(other, l) += 1;
  }

  std::size_t diag = 0;
  for (int c = 0; c < k; ++c) diag += s.confusion.at(c, c);
  s.accuracy = static_cast<double>(diag) / static_cast<double>(truth.size());

  std::vector<std::size_t> truth_count(k, 0);
  for (const TruthEpisode& t : truth) truth_count[t.class_id] += 1;

  s.f1.assign(k, 0.0);
  double macro_sum = 0.0, weighted_sum = 0.0;
  int macro_n = 0;
  std::size_t weight_total = 0;
  for (int c = 0; c < k; ++c) {
    std::size_t tp = s.confusion.at(c, c), row = 0, col = 0;
    for (int j = 0; j < k; ++j) {
      row += s.confusion.at(c, j);
      col += s.confusion.at(j, c);
    }
    double precision = col > 0 ? static_cast<double>(tp) / col : 0.0;
    double recall = row > 0 ? static_cast<double>(tp) / row : 0.0;
    s.f1[c] = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    if (truth_count[c] > 0) {
      macro_sum += s.f1[c];
      macro_n += 1;
      weighted_sum += s.f1[c] * static_cast<double>(truth_count[c]);
      weight_total += truth_count[c];
    }
  }
  s.macro_f1 = macro_n > 0 ? macro_sum / macro_n : 0.0;
  s.weighted_f1 = weight_total > 0 ? weighted_sum / static_cast<double>(weight_total) : 0.0;
  return s;
}

std::vector<Segment> drop_truncated(std::span<const Segment> segments) {
  std::vector<Segment> out;
  for (const Segment& s : segments)
    if (!s.truncated) out.push_back(s);
  return out;
}

double boundary_recall(std::span<const Segment> predicted,
                       std::span<const TruthEpisode> truth, MatchPolicy policy, int beta) {
  if (truth.empty()) raise(Errc::empty_truth, "no ground-truth episodes to score against");
  MatchResult matches = match_segments(predicted, truth, policy);
  std::size_t hit = 0;
  for (const MatchPair& pair : matches.pairs) {
    const TruthEpisode& t = truth[pair.truth];
    const Segment& p = predicted[pair.pred];
    auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    if (dist(t.begin_index, p.begin_index) <= static_cast<std::size_t>(beta) &&
        dist(t.end_index, p.end_index) <= static_cast<std::size_t>(beta))
      ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

CvResult cross_validate(const LabeledStream& stream, const ObservationAlphabet& alphabet,
                        const ClassRegistry& classes, const CvConfig& config, int folds) {
  if (folds < 2) raise(Errc::bad_parameter, "cross-validation needs at least 2 folds");
  std::vector<const Episode*> top;
  for (const Episode& ep : stream.episodes)
    if (!ep.parent) top.push_back(&ep);
  std::sort(top.begin(), top.end(),
            [](const Episode* a, const Episode* b) { return a->begin_index < b->begin_index; });
  if (top.size() < static_cast<std::size_t>(folds))
    raise(Errc::too_few_episodes, "need at least one episode per fold");

  // Fold boundaries in event space, cut at top-level episode starts.
  std::vector<std::size_t> bounds{0};
  std::size_t assigned = 0;
  for (int f = 0; f < folds - 1; ++f) {
    std::size_t take = top.size() / folds + (static_cast<std::size_t>(f) < top.size() % folds);
    assigned += take;
    bounds.push_back(top[assigned]->begin_index);
  }
  bounds.push_back(stream.events.size());

  CvResult result;
  std::vector<double> accs, f1s;
  for (int f = 0; f < folds; ++f) {
    LabeledStream train, test;
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
      if (i >= bounds[f] && i < bounds[f + 1])
        test.events.push_back(stream.events[i]);
      else
        train.events.push_back(stream.events[i]);
    }
    derive_episodes(train, Strictness::strict);
    derive_episodes(test, Strictness::strict);

    HhmmModel model = fit_model(train, alphabet, classes, config.fit);
    RunResult run = run_stream(model, test.events);
    std::vector<CorrectionSample> samples = training_samples(train, classes);
    std::vector<JointPdf> pdfs = fit_all_pdfs(samples, classes, config.correction);
    correct_segments(run.segments, pdfs, classes, config.correction);

    std::vector<TruthEpisode> truth = truth_episodes(test, classes);
    MatchResult matches = match_segments(run.segments, truth, config.match);
    Scores s = score(matches, run.segments, truth, classes);
    accs.push_back(s.accuracy);
    f1s.push_back(s.macro_f1);
    result.folds.push_back(std::move(s));
  }

  auto mean_std = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(v.size())));
  };
  std::tie(result.mean_accuracy, result.std_accuracy) = mean_std(accs);
  std::tie(result.mean_macro_f1, result.std_macro_f1) = mean_std(f1s);
  return result;
}

std::string confusion_csv(const Scores& scores, const ClassRegistry& classes) {
  std::ostringstream os;
  os << "class";
  for (std::size_t c = 0; c < classes.size(); ++c) os << ',' << classes.at(c).name;
  os << '\n';
  std::vector<double> norm = scores.confusion.row_normalized();
  char buf[64];
  const int n = scores.confusion.n;
  for (int i = 0; i < n; ++i) {
    os << classes.at(i).name;
    for (int j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof buf, "%.6g", norm[i * n + j]);
      os << ',' << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::ostringstream os;
  os << "model,dataset,accuracy,f1\n";
  char buf[64];
  for (const SummaryRow& r : rows) {
    os << r.model << ',' << r.dataset;
    std::snprintf(buf, sizeof buf, "%.6g", r.accuracy);
    os << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.6g", r.f1);
    os << ',' << buf << '\n';
  }
  return os.str();
}

}  // namespace streamhar
