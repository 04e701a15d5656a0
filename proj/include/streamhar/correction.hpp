#ifndef STREAMHAR_CORRECTION_HPP
#define STREAMHAR_CORRECTION_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "streamhar/events.hpp"
#include "streamhar/hhmm.hpp"

namespace streamhar {

struct CorrectionConfig {
  double alpha = 0.08;
  int tod_bins = 24;
  int duration_bins = 16;  // log-spaced over [1s, 24h]
  double smoothing = 0.01;  // add-kappa on histogram counts
};

struct CorrectionSample {
  int class_id = -1;
  double duration_s = 0.0;
  double time_of_day_s = 0.0;
};

// Smoothed 2-D histogram over (circular time-of-day bin, log-duration bin).
// mass_at returns normalized bin mass (sums to 1 over the grid); density_at
// divides by bin area so the density integrates to 1.
struct JointPdf {
  int class_id = -1;
  int tod_bins = 0;
  int duration_bins = 0;
  std::size_t sample_count = 0;
  std::vector<double> mass;        // tod_bins x duration_bins
  std::vector<double> dur_edges;   // duration_bins + 1, seconds

  int tod_bin(double time_of_day_s) const;
  int duration_bin(double duration_s) const;
  double mass_at(double time_of_day_s, double duration_s) const;
  double density_at(double time_of_day_s, double duration_s) const;
  double bin_area(int dur_bin) const;  // tod seconds x log-duration width
};

JointPdf fit_joint_pdf(std::span<const CorrectionSample> samples, int class_id,
                       const CorrectionConfig& config);

// Duration and start time of day of every annotated episode.
std::vector<CorrectionSample> training_samples(const LabeledStream& stream,
                                               const ClassRegistry& classes);

// Threshold rule on the fitted densities: keep the raw label if its bin mass
// passes alpha; otherwise the passing class with the highest mass; otherwise
// Other. Ties go to the lowest class id.
int correct_label(const Segment& segment, std::span<const JointPdf> pdfs,
                  const ClassRegistry& classes, const CorrectionConfig& config);

// Fits one pdf per non-Other class present in the samples.
std::vector<JointPdf> fit_all_pdfs(std::span<const CorrectionSample> samples,
                                   const ClassRegistry& classes, const CorrectionConfig& config);

void correct_segments(std::vector<Segment>& segments, std::span<const JointPdf> pdfs,
                      const ClassRegistry& classes, const CorrectionConfig& config);

struct AlphaSweepRow {
  double alpha = 0.0;
  double accuracy = 0.0;
  std::size_t other_count = 0;
};

// Reuses fixed pdfs and raw segments; per candidate alpha reports end-to-end
// accuracy against the truth episodes and the count of Other relabels.
std::vector<AlphaSweepRow> sweep_alpha(std::span<const CorrectionSample> train_samples,
                                       std::span<const Segment> raw_segments,
                                       const LabeledStream& test,
                                       const ClassRegistry& classes,
                                       const CorrectionConfig& base,
                                       std::span<const double> candidates);

std::string alpha_sweep_csv(const std::string& dataset, std::span<const AlphaSweepRow> rows);

}  // namespace streamhar

#endif  // STREAMHAR_CORRECTION_HPP
