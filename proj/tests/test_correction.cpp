#include "streamhar/correction.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "streamhar/synth.hpp"

using namespace streamhar;

namespace {

CorrectionSample sample(int cls, double tod_s, double dur_s) {
  return CorrectionSample{cls, dur_s, tod_s};
}

Segment at(int raw, double tod_s, double dur_s) {
  Segment seg;
  seg.raw_label = raw;
  seg.begin_ts = 1000 * kMicrosPerDay + static_cast<TimeMicros>(tod_s * kMicrosPerSecond);
  seg.end_ts = seg.begin_ts + static_cast<TimeMicros>(dur_s * kMicrosPerSecond);
  return seg;
}

double normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

}  // namespace

TEST_CASE("single unsmoothed sample concentrates all mass in one bin") {
  CorrectionConfig config;
  config.smoothing = 0.0;
  std::vector<CorrectionSample> samples = {sample(0, 10.5 * 3600.0, 200.0)};
  JointPdf pdf = fit_joint_pdf(samples, 0, config);
  CHECK(pdf.sample_count == 1);
  CHECK(pdf.mass_at(10.5 * 3600.0, 200.0) == doctest::Approx(1.0));
  int db = pdf.duration_bin(200.0);
  CHECK(pdf.density_at(10.5 * 3600.0, 200.0) == doctest::Approx(1.0 / pdf.bin_area(db)));
  // Everywhere else is empty.
  CHECK(pdf.mass_at(22.0 * 3600.0, 200.0) == 0.0);
  CHECK(pdf.mass_at(10.5 * 3600.0, 20000.0) == 0.0);
}

TEST_CASE("mass sums to one and density integrates to one") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> tod(13.0 * 3600.0, 2.0 * 3600.0);
  std::lognormal_distribution<double> dur(std::log(600.0), 0.8);
  std::vector<CorrectionSample> samples;
  for (int i = 0; i < 500; ++i) samples.push_back(sample(0, tod(rng), dur(rng)));
  JointPdf pdf = fit_joint_pdf(samples, 0, CorrectionConfig{});
  double mass_total = 0.0, integral = 0.0;
  for (int tb = 0; tb < pdf.tod_bins; ++tb) {
    for (int db = 0; db < pdf.duration_bins; ++db) {
      double m = pdf.mass[static_cast<std::size_t>(tb) * pdf.duration_bins + db];
      mass_total += m;
      integral += (m / pdf.bin_area(db)) * pdf.bin_area(db);
    }
  }
  CHECK(std::abs(mass_total - 1.0) <= 1e-6);
  CHECK(std::abs(integral - 1.0) <= 1e-6);
}

TEST_CASE("bimodal time of day is recovered bin by bin") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> morning(8.5 * 3600.0, 0.4 * 3600.0);
  std::normal_distribution<double> evening(20.5 * 3600.0, 0.4 * 3600.0);
  std::vector<CorrectionSample> samples;
  for (int i = 0; i < 10000; ++i) {
    double tod = (i % 2 == 0) ? morning(rng) : evening(rng);
    samples.push_back(sample(0, tod, 200.0));
  }
  JointPdf pdf = fit_joint_pdf(samples, 0, CorrectionConfig{});
  double dur = 200.0;
  // Hour-bin probabilities of a normal centered mid-bin with sd 0.4 h.
  auto band = [&](double k) {
    return normal_cdf((k + 1.0 - 8.5) / 0.4) - normal_cdf((k - 8.5) / 0.4);
  };
  for (int k : {7, 8, 9}) {
    double expected = 0.5 * band(k);
    CHECK(std::abs(pdf.mass_at((k + 0.5) * 3600.0, dur) - expected) < 0.03);
    CHECK(std::abs(pdf.mass_at((k + 12.5) * 3600.0, dur) - expected) < 0.03);
  }
}

TEST_CASE("fit_joint_pdf validates input") {
  std::vector<CorrectionSample> samples = {sample(1, 3600.0, 100.0)};
  CHECK_THROWS_WITH_AS(fit_joint_pdf(samples, 0, CorrectionConfig{}),
                       doctest::Contains("NoSamples"), Error);
  CorrectionConfig bad;
  bad.tod_bins = 1;
  CHECK_THROWS_WITH_AS(fit_joint_pdf(samples, 1, bad), doctest::Contains("BadParameter"),
                       Error);
  bad = CorrectionConfig{};
  bad.alpha = -0.1;
  CHECK_THROWS_WITH_AS(fit_joint_pdf(samples, 1, bad), doctest::Contains("BadParameter"),
                       Error);
}

TEST_CASE("time of day wraps circularly") {
  std::vector<CorrectionSample> samples = {sample(0, 600.0, 100.0)};
  JointPdf pdf = fit_joint_pdf(samples, 0, CorrectionConfig{});
  int before_midnight = pdf.tod_bin(23.0 * 3600.0 + 59.0 * 60.0);
  int after_midnight = pdf.tod_bin(60.0);
  CHECK(before_midnight == pdf.tod_bins - 1);
  CHECK(after_midnight == 0);
  int gap = std::abs(before_midnight - after_midnight);
  CHECK(std::min(gap, pdf.tod_bins - gap) == 1);
  // Out-of-range queries fold back onto the day.
  CHECK(pdf.tod_bin(25.0 * 3600.0) == pdf.tod_bin(3600.0));
  CHECK(pdf.tod_bin(-3600.0) == pdf.tod_bin(23.0 * 3600.0));
}

TEST_CASE("correct_label threshold rule") {
  auto classes = ClassRegistry::from_names({"Morning", "Evening"});
  std::vector<CorrectionSample> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(sample(0, 10.5 * 3600.0, 200.0));
  for (int i = 0; i < 100; ++i) samples.push_back(sample(1, 22.5 * 3600.0, 3000.0));
  auto pdfs = fit_all_pdfs(samples, classes, CorrectionConfig{});
  REQUIRE(pdfs.size() == 2);

  CorrectionConfig config;
  SUBCASE("empty region sinks to the catch-all class") {
    config.alpha = 0.02;
    CHECK(correct_label(at(0, 4.0 * 3600.0, 50000.0), pdfs, classes, config) ==
          classes.other_id());
  }
  SUBCASE("label at its own mode is retained") {
    config.alpha = 0.5;
    CHECK(correct_label(at(0, 10.5 * 3600.0, 200.0), pdfs, classes, config) == 0);
  }
  SUBCASE("alpha zero always retains a named label") {
    config.alpha = 0.0;
    CHECK(correct_label(at(0, 4.0 * 3600.0, 50000.0), pdfs, classes, config) == 0);
    CHECK(correct_label(at(1, 10.5 * 3600.0, 200.0), pdfs, classes, config) == 1);
  }
  SUBCASE("failing raw label moves to the best passing class") {
    config.alpha = 0.05;
    CHECK(correct_label(at(0, 22.5 * 3600.0, 3000.0), pdfs, classes, config) == 1);
  }
  SUBCASE("correction is idempotent") {
    config.alpha = 0.05;
    for (Segment seg : {at(0, 10.5 * 3600.0, 200.0), at(0, 22.5 * 3600.0, 3000.0),
                        at(0, 4.0 * 3600.0, 50000.0)}) {
      int once = correct_label(seg, pdfs, classes, config);
      Segment again = seg;
      again.raw_label = once;
      CHECK(correct_label(again, pdfs, classes, config) == once);
    }
  }
  SUBCASE("missing density for the raw class") {
    std::vector<JointPdf> only_evening = {pdfs[1]};
    CHECK_THROWS_WITH_AS(correct_label(at(0, 10.5 * 3600.0, 200.0), only_evening, classes,
                                       CorrectionConfig{}),
                         doctest::Contains("MissingPdf"), Error);
  }
}

TEST_CASE("training_samples extracts duration and start time per episode") {
  auto stream = parse_text(
      "2011-06-15 08:30:00 M1 ON Bathing begin\n"
      "2011-06-15 08:31:00 M1 OFF\n"
      "2011-06-15 08:35:00 M2 OFF Bathing end\n",
      Strictness::strict);
  auto classes = ClassRegistry::from_streams({&stream, 1});
  auto samples = training_samples(stream, classes);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].class_id == *classes.id_of("Bathing"));
  CHECK(samples[0].duration_s == doctest::Approx(300.0));
  CHECK(samples[0].time_of_day_s == doctest::Approx(8.5 * 3600.0));
}

TEST_CASE("alpha sweep over a timing-confusable pair") {
  auto home = confusable_pair_home();
  auto train = generate_stream(home, 200, 7);
  auto test = generate_stream(home, 120, 8);
  auto alphabet = build_alphabet({&train, 1});
  auto classes = ClassRegistry::from_streams({&train, 1});
  auto model = fit_model(train, alphabet, classes, FitConfig{});
  auto run = run_stream(model, test.events);
  auto samples = training_samples(train, classes);

  SUBCASE("single candidate gives one row") {
    std::vector<double> cands = {0.05};
    auto rows = sweep_alpha(samples, run.segments, test, classes, CorrectionConfig{}, cands);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].alpha == 0.05);
  }
  SUBCASE("other count never decreases and some alpha beats zero") {
    std::vector<double> cands = {0.0, 0.02, 0.04, 0.06, 0.08, 0.1};
    auto rows = sweep_alpha(samples, run.segments, test, classes, CorrectionConfig{}, cands);
    REQUIRE(rows.size() == cands.size());
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK(rows[i].other_count >= rows[i - 1].other_count);
    double best = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) best = std::max(best, rows[i].accuracy);
    CHECK(best > rows[0].accuracy);

    auto csv = alpha_sweep_csv("pair", rows);
    CHECK(csv.rfind("dataset,alpha_0,alpha_0.02,", 0) == 0);
    CHECK(csv.find("\npair,") != std::string::npos);
    auto bare = alpha_sweep_csv("", rows);
    CHECK(bare.rfind("alpha_0,alpha_0.02,", 0) == 0);
  }
  SUBCASE("empty candidate list is rejected") {
    CHECK_THROWS_WITH_AS(
        sweep_alpha(samples, run.segments, test, classes, CorrectionConfig{}, {}),
        doctest::Contains("BadParameter"), Error);
  }
}
