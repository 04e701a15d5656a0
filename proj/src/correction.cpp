#include "streamhar/correction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "streamhar/errors.hpp"
#include "streamhar/eval.hpp"

namespace streamhar {

namespace {

constexpr double kMaxDuration = 86400.0;

std::vector<double> log_spaced_edges(int bins) {
  std::vector<double> edges(bins + 1);
  for (int i = 0; i <= bins; ++i)
    edges[i] = std::exp(std::log(kMaxDuration) * i / bins);
  edges.front() = 1.0;
  edges.back() = kMaxDuration;
  return edges;
}

void check_config(const CorrectionConfig& c) {
  if (c.alpha < 0.0) raise(Errc::bad_parameter, "density threshold must be non-negative");
  if (c.tod_bins < 2 || c.duration_bins < 2)
    raise(Errc::bad_parameter, "histogram needs at least 2 bins per axis");
  if (c.smoothing < 0.0) raise(Errc::bad_parameter, "histogram smoothing must be non-negative");
}

}  // namespace

int JointPdf::tod_bin(double time_of_day_s) const {
  double t = std::fmod(time_of_day_s, kSecondsPerDay);
  if (t < 0.0) t += kSecondsPerDay;
  int bin = static_cast<int>(t / (kSecondsPerDay / tod_bins));
  return std::clamp(bin, 0, tod_bins - 1);
}

int JointPdf::duration_bin(double duration_s) const {
  double d = std::clamp(duration_s, 1.0, kMaxDuration);
  int bin = static_cast<int>(std::log(d) / std::log(kMaxDuration) * duration_bins);
  return std::clamp(bin, 0, duration_bins - 1);
}

double JointPdf::mass_at(double time_of_day_s, double duration_s) const {
  return mass[tod_bin(time_of_day_s) * duration_bins + duration_bin(duration_s)];
}

double JointPdf::bin_area(int dur_bin) const {
  double tod_width = kSecondsPerDay / static_cast<double>(tod_bins);
  double log_width = std::log(dur_edges[dur_bin + 1]) - std::log(dur_edges[dur_bin]);
  return tod_width * log_width;
}

double JointPdf::density_at(double time_of_day_s, double duration_s) const {
  int db = duration_bin(duration_s);
  return mass[tod_bin(time_of_day_s) * duration_bins + db] / bin_area(db);
}

JointPdf fit_joint_pdf(std::span<const CorrectionSample> samples, int class_id,
                       const CorrectionConfig& config) {
  check_config(config);
  JointPdf pdf;
  pdf.class_id = class_id;
  pdf.tod_bins = config.tod_bins;
  pdf.duration_bins = config.duration_bins;
  pdf.dur_edges = log_spaced_edges(config.duration_bins);
  const std::size_t n_bins = static_cast<std::size_t>(config.tod_bins) * config.duration_bins;
  std::vector<double> counts(n_bins, 0.0);
  for (const CorrectionSample& s : samples) {
    if (s.class_id != class_id) continue;
    counts[pdf.tod_bin(s.time_of_day_s) * pdf.duration_bins + pdf.duration_bin(s.duration_s)] +=
        1.0;
    pdf.sample_count += 1;
  }
  if (pdf.sample_count == 0)
    raise(Errc::no_samples, "no training segments for class id " + std::to_string(class_id));
  pdf.mass.resize(n_bins);
  const double total = static_cast<double>(pdf.sample_count) + config.smoothing * n_bins;
  for (std::size_t i = 0; i < n_bins; ++i)
    pdf.mass[i] = (counts[i] + config.smoothing) / total;
  return pdf;
}

std::vector<CorrectionSample> training_samples(const LabeledStream& stream,
                                               const ClassRegistry& classes) {
  std::vector<CorrectionSample> out;
  out.reserve(stream.episodes.size());
  for (const Episode& ep : stream.episodes) {
    CorrectionSample s;
    s.class_id = classes.id_or_other(ep.activity);
    TimeMicros b = stream.events[ep.begin_index].timestamp;
    TimeMicros e = stream.events[ep.end_index].timestamp;
    s.duration_s = std::max(static_cast<double>(e - b) / kMicrosPerSecond, 1e-6);
    s.time_of_day_s = seconds_since_midnight(b);
    out.push_back(s);
  }
  return out;
}

std::vector<JointPdf> fit_all_pdfs(std::span<const CorrectionSample> samples,
                                   const ClassRegistry& classes,
                                   const CorrectionConfig& config) {
  std::vector<JointPdf> pdfs;
  for (int c = 0; c < static_cast<int>(classes.size()); ++c) {
    if (classes.at(c).is_other) continue;
    bool present = false;
    for (const CorrectionSample& s : samples)
      if (s.class_id == c) {
        present = true;
        break;
      }
    if (present) pdfs.push_back(fit_joint_pdf(samples, c, config));
  }
  return pdfs;
}

int correct_label(const Segment& segment, std::span<const JointPdf> pdfs,
                  const ClassRegistry& classes, const CorrectionConfig& config) {
  check_config(config);
  const int other = classes.other_id();
  const int raw = segment.raw_label < 0 ? other : segment.raw_label;
  const double tod = segment.time_of_day_s();
  const double dur = segment.duration_s();

  const JointPdf* raw_pdf = nullptr;
  for (const JointPdf& p : pdfs)
    if (p.class_id == raw) raw_pdf = &p;
  if (raw != other) {
    if (!raw_pdf)
      raise(Errc::missing_pdf,
            "no fitted density for class " + classes.at(raw).name);
    if (raw_pdf->mass_at(tod, dur) >= config.alpha) return raw;
  }
  int best = other;
  double best_mass = -1.0;
  for (const JointPdf& p : pdfs) {
    if (p.class_id == raw) continue;
    double m = p.mass_at(tod, dur);
    if (m >= config.alpha && (m > best_mass || (m == best_mass && p.class_id < best))) {
      best = p.class_id;
      best_mass = m;
    }
  }
  return best;
}

void correct_segments(std::vector<Segment>& segments, std::span<const JointPdf> pdfs,
                      const ClassRegistry& classes, const CorrectionConfig& config) {
  for (Segment& s : segments) s.corrected_label = correct_label(s, pdfs, classes, config);
}

std::vector<AlphaSweepRow> sweep_alpha(std::span<const CorrectionSample> train_samples,
                                       std::span<const Segment> raw_segments,
                                       const LabeledStream& test,
                                       const ClassRegistry& classes,
                                       const CorrectionConfig& base,
                                       std::span<const double> candidates) {
  if (candidates.empty()) raise(Errc::bad_parameter, "sweep needs at least one candidate");
  std::vector<JointPdf> pdfs = fit_all_pdfs(train_samples, classes, base);
  std::vector<TruthEpisode> truth = truth_episodes(test, classes);
  std::vector<AlphaSweepRow> rows;
  for (double alpha : candidates) {
    CorrectionConfig cfg = base;
    cfg.alpha = alpha;
    std::vector<Segment> segs(raw_segments.begin(), raw_segments.end());
    correct_segments(segs, pdfs, classes, cfg);
    AlphaSweepRow row;
    row.alpha = alpha;
    for (const Segment& s : segs)
      if (s.label() == classes.other_id()) row.other_count += 1;
    MatchResult matches = match_segments(segs, truth, MatchPolicy{});
    row.accuracy = score(matches, segs, truth, classes).accuracy;
    rows.push_back(row);
  }
  return rows;
}

std::string alpha_sweep_csv(const std::string& dataset, std::span<const AlphaSweepRow> rows) {
  std::ostringstream os;
  char buf[64];
  if (!dataset.empty()) os << "dataset";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 || !dataset.empty()) os << ',';
    std::snprintf(buf, sizeof buf, "alpha_%g", rows[i].alpha);
    os << buf;
  }
  os << '\n';
  if (!dataset.empty()) os << dataset;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 || !dataset.empty()) os << ',';
    std::snprintf(buf, sizeof buf, "%.6g", rows[i].accuracy);
    os << buf;
  }
  os << '\n';
  return os.str();
}

}  // namespace streamhar
