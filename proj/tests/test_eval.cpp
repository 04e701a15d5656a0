#include "streamhar/eval.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "streamhar/synth.hpp"

using namespace streamhar;

namespace {

TimeMicros sec(double s) { return static_cast<TimeMicros>(s * kMicrosPerSecond); }

TruthEpisode truth_at(int cls, double b, double e) {
  TruthEpisode t;
  t.class_id = cls;
  t.begin_ts = sec(b);
  t.end_ts = sec(e);
  t.begin_index = static_cast<std::size_t>(b);
  t.end_index = static_cast<std::size_t>(e);
  return t;
}

Segment seg_at(int label, double b, double e) {
  Segment s;
  s.raw_label = label;
  s.begin_ts = sec(b);
  s.end_ts = sec(e);
  s.begin_index = static_cast<std::size_t>(b);
  s.end_index = static_cast<std::size_t>(e);
  return s;
}

}  // namespace

TEST_CASE("match_segments") {
  SUBCASE("identical lists all match") {
    std::vector<TruthEpisode> truth = {truth_at(0, 0, 100), truth_at(1, 200, 300)};
    std::vector<Segment> pred = {seg_at(0, 0, 100), seg_at(1, 200, 300)};
    auto m = match_segments(pred, truth, MatchPolicy{});
    CHECK(m.pairs.size() == 2);
    CHECK(m.missed.empty());
    CHECK(m.false_alarms.empty());
  }
  SUBCASE("disjoint ranges never match") {
    std::vector<TruthEpisode> truth = {truth_at(0, 0, 100), truth_at(0, 200, 300)};
    std::vector<Segment> pred = {seg_at(0, 400, 500), seg_at(0, 600, 700)};
    auto m = match_segments(pred, truth, MatchPolicy{});
    CHECK(m.pairs.empty());
    CHECK(m.missed.size() == 2);
    CHECK(m.false_alarms.size() == 2);
  }
  SUBCASE("a 60 percent overlap sits between the two thresholds") {
    std::vector<TruthEpisode> truth = {truth_at(0, 0, 100)};
    std::vector<Segment> pred = {seg_at(0, 40, 110)};
    auto loose = match_segments(pred, truth, MatchPolicy{0.5});
    CHECK(loose.pairs.size() == 1);
    CHECK(loose.pairs[0].overlap == doctest::Approx(0.6));
    auto strict = match_segments(pred, truth, MatchPolicy{0.7});
    CHECK(strict.pairs.empty());
    CHECK(strict.missed.size() == 1);
    CHECK(strict.false_alarms.size() == 1);
  }
  SUBCASE("raising the threshold never adds matches") {
    std::vector<TruthEpisode> truth = {truth_at(0, 0, 100), truth_at(1, 150, 250),
                                       truth_at(0, 300, 400)};
    std::vector<Segment> pred = {seg_at(0, 20, 100), seg_at(1, 150, 210),
                                 seg_at(0, 390, 480)};
    std::size_t last = pred.size() + 1;
    for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      auto m = match_segments(pred, truth, MatchPolicy{rho});
      CHECK(m.pairs.size() <= last);
      last = m.pairs.size();
    }
  }
  SUBCASE("each truth episode is used at most once") {
    std::vector<TruthEpisode> truth = {truth_at(0, 0, 100)};
    std::vector<Segment> pred = {seg_at(0, 0, 90), seg_at(0, 10, 100)};
    auto m = match_segments(pred, truth, MatchPolicy{0.5});
    CHECK(m.pairs.size() == 1);
    CHECK(m.false_alarms.size() == 1);
  }
  SUBCASE("threshold outside (0,1] is rejected") {
    std::vector<TruthEpisode> truth = {truth_at(0, 0, 100)};
    std::vector<Segment> pred;
    CHECK_THROWS_WITH_AS(match_segments(pred, truth, MatchPolicy{0.0}),
                         doctest::Contains("BadParameter"), Error);
  }
}

TEST_CASE("score") {
  auto classes = ClassRegistry::from_names({"A", "B"});
  int a = *classes.id_of("A"), b = *classes.id_of("B");
  SUBCASE("all correct is perfect") {
    std::vector<TruthEpisode> truth = {truth_at(a, 0, 100), truth_at(b, 200, 300)};
    std::vector<Segment> pred = {seg_at(a, 0, 100), seg_at(b, 200, 300)};
    auto s = score(match_segments(pred, truth, MatchPolicy{}), pred, truth, classes);
    CHECK(s.accuracy == doctest::Approx(1.0));
    CHECK(s.macro_f1 == doctest::Approx(1.0));
  }
  SUBCASE("hand-worked two-class example") {
    // Truth A,A,B against predictions A,B,B on perfectly aligned spans.
    std::vector<TruthEpisode> truth = {truth_at(a, 0, 100), truth_at(a, 200, 300),
                                       truth_at(b, 400, 500)};
    std::vector<Segment> pred = {seg_at(a, 0, 100), seg_at(b, 200, 300),
                                 seg_at(b, 400, 500)};
    auto matches = match_segments(pred, truth, MatchPolicy{});
    auto s = score(matches, pred, truth, classes);
    CHECK(s.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(s.f1[static_cast<std::size_t>(a)] == doctest::Approx(2.0 / 3.0));
    CHECK(s.f1[static_cast<std::size_t>(b)] == doctest::Approx(2.0 / 3.0));
    CHECK(s.macro_f1 == doctest::Approx(2.0 / 3.0));

    // The diagonal recomputes the same accuracy.
    std::size_t diag = 0;
    for (int c = 0; c < s.confusion.n; ++c) diag += s.confusion.at(c, c);
    CHECK(static_cast<double>(diag) / static_cast<double>(truth.size()) ==
          doctest::Approx(s.accuracy));

    // Scoring is invariant to the order of the match list.
    MatchResult shuffled = matches;
    std::reverse(shuffled.pairs.begin(), shuffled.pairs.end());
    auto s2 = score(shuffled, pred, truth, classes);
    CHECK(s2.accuracy == doctest::Approx(s.accuracy));
    CHECK(s2.confusion.counts == s.confusion.counts);
  }
  SUBCASE("misses land in the catch-all column, false alarms in its row") {
    std::vector<TruthEpisode> truth = {truth_at(a, 0, 100)};
    std::vector<Segment> pred = {seg_at(b, 500, 600)};
    auto s = score(match_segments(pred, truth, MatchPolicy{}), pred, truth, classes);
    CHECK(s.confusion.at(a, classes.other_id()) == 1);
    CHECK(s.confusion.at(classes.other_id(), b) == 1);
    CHECK(s.accuracy == 0.0);
  }
  SUBCASE("a false alarm already labeled catch-all is a correct rejection") {
    std::vector<TruthEpisode> truth = {truth_at(a, 0, 100)};
    std::vector<Segment> pred = {seg_at(a, 0, 100), seg_at(classes.other_id(), 500, 600)};
    auto s = score(match_segments(pred, truth, MatchPolicy{}), pred, truth, classes);
    CHECK(s.accuracy == doctest::Approx(1.0));
    for (int j = 0; j < s.confusion.n; ++j) CHECK(s.confusion.at(classes.other_id(), j) == 0);
  }
  SUBCASE("normalized rows sum to one or stay zero") {
    std::vector<TruthEpisode> truth = {truth_at(a, 0, 100), truth_at(a, 200, 300),
                                       truth_at(b, 400, 500)};
    std::vector<Segment> pred = {seg_at(a, 0, 100), seg_at(b, 200, 300),
                                 seg_at(b, 400, 500)};
    auto s = score(match_segments(pred, truth, MatchPolicy{}), pred, truth, classes);
    auto norm = s.confusion.row_normalized();
    for (int i = 0; i < s.confusion.n; ++i) {
      double row = 0.0;
      for (int j = 0; j < s.confusion.n; ++j) row += norm[i * s.confusion.n + j];
      if (row != 0.0) CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("empty truth throws") {
    std::vector<TruthEpisode> truth;
    std::vector<Segment> pred = {seg_at(a, 0, 100)};
    CHECK_THROWS_WITH_AS(score(MatchResult{}, pred, truth, classes),
                         doctest::Contains("EmptyTruth"), Error);
  }
}

TEST_CASE("boundary recall counts only tight matches") {
  std::vector<TruthEpisode> truth = {truth_at(0, 100, 200), truth_at(0, 300, 400)};
  std::vector<Segment> pred = {seg_at(0, 101, 199), seg_at(0, 320, 400)};
  // First prediction is within 3 events of both boundaries; the second
  // misses the begin by 20 indices.
  CHECK(boundary_recall(pred, truth, MatchPolicy{}, 3) == doctest::Approx(0.5));
  CHECK(boundary_recall(pred, truth, MatchPolicy{}, 25) == doctest::Approx(1.0));
}

TEST_CASE("drop_truncated filters flagged segments") {
  std::vector<Segment> segs = {seg_at(0, 0, 10), seg_at(1, 20, 30)};
  segs[1].truncated = true;
  auto kept = drop_truncated(segs);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].raw_label == 0);
}

TEST_CASE("truth_episodes maps annotations to ids and timestamps") {
  auto stream = parse_text(
      "2011-06-15 08:00:00 M1 ON Bathing begin\n"
      "2011-06-15 08:05:00 M1 OFF Bathing end\n",
      Strictness::strict);
  auto classes = ClassRegistry::from_streams({&stream, 1});
  auto truth = truth_episodes(stream, classes);
  REQUIRE(truth.size() == 1);
  CHECK(truth[0].class_id == *classes.id_of("Bathing"));
  CHECK(truth[0].end_ts - truth[0].begin_ts == sec(300));
}

namespace {

HomeSpec two_class_home() {
  HomeSpec home;
  home.idle_noise = {{{"H01", "ON"}, 1.0}, {{"H01", "OFF"}, 1.0}};
  for (int k = 0; k < 2; ++k) {
    std::string a = "A" + std::to_string(k), b = "B" + std::to_string(k);
    ClassProfile p;
    p.name = "Act" + std::to_string(k);
    p.begin_signature = {{a, "ON"}, {b, "ON"}, {a, "OFF"}};
    p.body = {{{b, "ON"}, 0.5}, {{b, "OFF"}, 0.5}};
    p.end_signature = {{a, "ON"}, {a, "OFF"}, {b, "OFF"}};
    p.duration_median_s = 420.0 * (k + 1);
    p.duration_log_sd = 0.05;
    p.time_of_day = {{(8.5 + 8.0 * k) * 3600.0, 600.0, 1.0}};
    p.body_events_min = 8;
    p.body_events_max = 14;
    home.classes.push_back(std::move(p));
  }
  return home;
}

}  // namespace

TEST_CASE("cross_validate") {
  auto home = two_class_home();
  SUBCASE("two folds split a ten-episode stream roughly in half") {
    auto stream = generate_stream(home, 10, 61);
    auto alphabet = build_alphabet({&stream, 1});
    auto classes = ClassRegistry::from_streams({&stream, 1});
    auto cv = cross_validate(stream, alphabet, classes, CvConfig{}, 2);
    REQUIRE(cv.folds.size() == 2);
    for (const Scores& s : cv.folds) {
      std::size_t truth_total = 0;
      for (int i = 0; i < s.confusion.n; ++i)
        for (int j = 0; j < s.confusion.n; ++j)
          if (i != s.confusion.n - 1) truth_total += s.confusion.at(i, j);
      CHECK(truth_total == 5);
    }
  }
  SUBCASE("near-separable home scores at least 0.9") {
    auto stream = generate_stream(home, 30, 62);
    auto alphabet = build_alphabet({&stream, 1});
    auto classes = ClassRegistry::from_streams({&stream, 1});
    auto cv = cross_validate(stream, alphabet, classes, CvConfig{}, 2);
    CHECK(cv.mean_accuracy >= 0.9);
    CHECK(cv.mean_macro_f1 >= 0.9);
    CHECK(cv.std_accuracy >= 0.0);
  }
  SUBCASE("too few episodes or folds") {
    auto stream = generate_stream(home, 2, 63);
    auto alphabet = build_alphabet({&stream, 1});
    auto classes = ClassRegistry::from_streams({&stream, 1});
    CHECK_THROWS_WITH_AS(cross_validate(stream, alphabet, classes, CvConfig{}, 3),
                         doctest::Contains("TooFewEpisodes"), Error);
    CHECK_THROWS_WITH_AS(cross_validate(stream, alphabet, classes, CvConfig{}, 1),
                         doctest::Contains("BadParameter"), Error);
  }
}

TEST_CASE("report formats") {
  auto classes = ClassRegistry::from_names({"A", "B"});
  int a = *classes.id_of("A"), b = *classes.id_of("B");
  std::vector<TruthEpisode> truth = {truth_at(a, 0, 100), truth_at(b, 200, 300)};
  std::vector<Segment> pred = {seg_at(a, 0, 100), seg_at(b, 200, 300)};
  auto s = score(match_segments(pred, truth, MatchPolicy{}), pred, truth, classes);

  auto grid = confusion_csv(s, classes);
  CHECK(grid.rfind("class,A,B,Other\n", 0) == 0);
  CHECK(grid.find("\nA,1,0,0\n") != std::string::npos);
  std::size_t newlines = 0;
  for (char c : grid)
    if (c == '\n') ++newlines;
  CHECK(newlines == classes.size() + 1);

  std::vector<SummaryRow> rows = {{"hhmm", "homeX", 0.652, 0.51},
                                  {"sw", "homeX", 0.41, 0.3}};
  CHECK(summary_csv(rows) ==
        "model,dataset,accuracy,f1\nhhmm,homeX,0.652,0.51\nsw,homeX,0.41,0.3\n");
}
