#include "streamhar/hhmm.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "streamhar/synth.hpp"

using namespace streamhar;

namespace {

// Each class gets three private sensors: Ak frames the boundaries, Bk and Ck
// carry the body. End windows reuse Ak, which never appears mid-body, so
// continuation and end scores separate cleanly.
HomeSpec signature_home(int n_classes) {
  HomeSpec home;
  home.idle_noise = {{{"H01", "ON"}, 1.0}, {{"H01", "OFF"}, 1.0}, {{"H02", "ON"}, 0.5}};
  for (int k = 0; k < n_classes; ++k) {
    std::string a = "A" + std::to_string(k), b = "B" + std::to_string(k),
                c = "C" + std::to_string(k);
    ClassProfile p;
    p.name = "Act" + std::to_string(k);
    p.begin_signature = {{a, "ON"}, {b, "ON"}, {a, "OFF"}};
    p.body = {{{b, "ON"}, 0.4}, {{b, "OFF"}, 0.3}, {{c, "ON"}, 0.2}, {{c, "OFF"}, 0.1}};
    p.end_signature = {{a, "ON"}, {a, "OFF"}, {b, "OFF"}};
    p.duration_median_s = 300.0 * (k + 1);
    p.duration_log_sd = 0.2;
    p.time_of_day = {{(6.0 + 4.0 * k) * 3600.0, 1800.0, 1.0}};
    p.body_events_min = 8;
    p.body_events_max = 16;
    home.classes.push_back(std::move(p));
  }
  return home;
}

struct Fitted {
  LabeledStream train;
  ObservationAlphabet alphabet;
  ClassRegistry classes;
  HhmmModel model;
};

Fitted fit_home(const HomeSpec& home, int episodes, std::uint64_t seed, FitConfig config = {}) {
  Fitted f;
  f.train = generate_stream(home, episodes, seed);
  f.alphabet = build_alphabet({&f.train, 1});
  f.classes = ClassRegistry::from_streams({&f.train, 1});
  f.model = fit_model(f.train, f.alphabet, f.classes, config);
  return f;
}

SymbolChain uniform_chain(int n_symbols) {
  SymbolChain ch;
  ch.n_symbols = n_symbols;
  ch.log_init.assign(n_symbols, std::log(1.0 / n_symbols));
  ch.log_trans.assign(static_cast<std::size_t>(n_symbols) * n_symbols,
                      std::log(1.0 / n_symbols));
  return ch;
}

HmmParams one_state_body(std::vector<double> emission) {
  HmmParams p;
  p.n_states = 1;
  p.n_symbols = static_cast<int>(emission.size());
  p.log_prior = {0.0};
  p.log_transition = {0.0};
  for (double& e : emission) e = std::log(e);
  p.log_emission = std::move(emission);
  return p;
}

// Two-class model whose detectors never end a segment and never interrupt,
// so the trace of the truncated segment exposes the likelihood crossover.
HhmmModel crossover_model() {
  HhmmModel m;
  m.alphabet = ObservationAlphabet({{"SA", "ON"}, {"SB", "ON"}, {"SC", "ON"}});
  m.classes = ClassRegistry::from_names({"Alpha", "Beta"});
  m.beta = 3;
  const int w = m.alphabet.symbol_count();
  m.bodies.resize(3);
  m.bodies[0] = one_state_body({0.599, 0.35, 0.05, 0.001});
  m.bodies[1] = one_state_body({0.35, 0.599, 0.05, 0.001});
  m.has_model = {1, 1, 0};
  m.begin.beta = 3;
  m.begin.tau = -1e9;
  m.begin.class_chains.assign(3, uniform_chain(w));
  m.begin.background = uniform_chain(w);
  m.begin.has_model = m.has_model;
  m.end.beta = 3;
  m.end.tau = 1e9;
  m.end.end_chains.assign(3, uniform_chain(w));
  m.end.continuation_chains.assign(3, uniform_chain(w));
  m.end.has_model = m.has_model;
  return m;
}

SensorEvent ev(TimeMicros t, const char* sensor) {
  return SensorEvent{t, sensor, "ON", std::nullopt};
}

std::size_t count_kind(const std::vector<EngineOutput>& outs, OutputKind kind) {
  std::size_t n = 0;
  for (const auto& o : outs)
    if (o.kind == kind) ++n;
  return n;
}

}  // namespace

TEST_CASE("deterministic prefix dominates every other trigram") {
  auto f = fit_home(signature_home(1), 30, 11);
  int cls = *f.classes.id_of("Act0");
  const SymbolChain& chain = f.model.begin.class_chains[static_cast<std::size_t>(cls)];
  std::vector<int> sig = {*f.alphabet.index_of("A0", "ON"), *f.alphabet.index_of("B0", "ON"),
                          *f.alphabet.index_of("A0", "OFF")};
  double sig_score = chain.score(sig);
  int n = static_cast<int>(f.alphabet.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        std::vector<int> tri = {i, j, k};
        if (tri == sig) continue;
        CHECK(chain.score(tri) < sig_score);
      }
}

TEST_CASE("fitted body emissions recover the generator distribution") {
  auto f = fit_home(signature_home(3), 240, 13);
  const double expected[] = {0.4, 0.3, 0.2, 0.1};
  for (int k = 0; k < 3; ++k) {
    int cls = *f.classes.id_of("Act" + std::to_string(k));
    REQUIRE(f.model.has_model[static_cast<std::size_t>(cls)]);
    const HmmParams& body = f.model.bodies[static_cast<std::size_t>(cls)];
    std::string b = "B" + std::to_string(k), c = "C" + std::to_string(k);
    int syms[] = {*f.alphabet.index_of(b, "ON"), *f.alphabet.index_of(b, "OFF"),
                  *f.alphabet.index_of(c, "ON"), *f.alphabet.index_of(c, "OFF")};
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(std::exp(body.emit(0, syms[i])) - expected[i]) < 0.05);
    }
  }
}

TEST_CASE("fitted theta blocks are stochastic including termination mass") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    auto f = fit_home(signature_home(3), 40, seed);
    validate_theta(f.model.theta);
    for (const ThetaBlock* block :
         {&f.model.theta.root, &f.model.theta.x1, &f.model.theta.x2, &f.model.theta.x3}) {
      double pi_sum = 0.0;
      for (double v : block->pi) pi_sum += v;
      CHECK(std::abs(pi_sum - 1.0) <= 1e-9);
      for (int i = 0; i < block->n; ++i) {
        double row = 0.0;
        for (int j = 0; j <= block->n; ++j) row += block->at(i, j);
        CHECK(std::abs(row - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("fit_model rejects bad configs and foreign symbols") {
  auto home = signature_home(1);
  auto train = generate_stream(home, 10, 3);
  auto alphabet = build_alphabet({&train, 1});
  auto classes = ClassRegistry::from_streams({&train, 1});
  FitConfig bad;
  bad.beta = 1;
  CHECK_THROWS_WITH_AS(fit_model(train, alphabet, classes, bad),
                       doctest::Contains("BadParameter"), Error);
  // Alphabet built elsewhere misses this stream's sensors.
  auto other = generate_stream(confusable_pair_home(), 10, 4);
  auto foreign = build_alphabet({&other, 1});
  CHECK_THROWS_WITH_AS(fit_model(train, foreign, classes, FitConfig{}),
                       doctest::Contains("AlphabetMismatch"), Error);
  LabeledStream empty;
  CHECK_THROWS_WITH_AS(fit_model(empty, alphabet, classes, FitConfig{}),
                       doctest::Contains("InsufficientTraining"), Error);
}

TEST_CASE("step stays idle until the buffer fills") {
  auto f = fit_home(signature_home(1), 20, 5);
  EngineState state;
  auto o1 = step(f.model, state, f.train.events[0]);
  auto o2 = step(f.model, state, f.train.events[1]);
  CHECK(o1.empty());
  CHECK(o2.empty());
  CHECK(state.mode == EngineState::Mode::idle);
}

TEST_CASE("step rejects a timestamp that moves backwards") {
  auto f = fit_home(signature_home(1), 20, 5);
  EngineState state;
  step(f.model, state, ev(1000 * kMicrosPerSecond, "H01"));
  CHECK_THROWS_WITH_AS(step(f.model, state, ev(999 * kMicrosPerSecond, "H01")),
                       doctest::Contains("NonMonotonicTimestamp"), Error);
}

TEST_CASE("single episode yields one begin and one segment near the truth") {
  auto f = fit_home(signature_home(1), 40, 7);
  auto test = generate_stream(signature_home(1), 1, 99);
  REQUIRE(test.episodes.size() == 1);
  RunResult run = run_stream(f.model, test.events);
  CHECK(count_kind(run.outputs, OutputKind::begin) == 1);
  REQUIRE(run.segments.size() == 1);
  const Segment& seg = run.segments[0];
  const Episode& truth = test.episodes[0];
  auto within = [&](std::size_t a, std::size_t b) {
    return (a > b ? a - b : b - a) <= static_cast<std::size_t>(f.model.beta);
  };
  CHECK(within(seg.begin_index, truth.begin_index));
  CHECK(within(seg.end_index, truth.end_index));
  CHECK_FALSE(seg.truncated);
  CHECK(f.classes.at(seg.raw_label).name == "Act0");
}

TEST_CASE("run_stream on an empty stream returns nothing") {
  auto f = fit_home(signature_home(1), 20, 5);
  RunResult run = run_stream(f.model, {});
  CHECK(run.segments.empty());
  CHECK(run.estimates.empty());
  CHECK(run.outputs.empty());
}

TEST_CASE("run_stream bookkeeping on a long stream") {
  auto f = fit_home(signature_home(3), 150, 17);
  auto test = generate_stream(signature_home(3), 200, 18);
  RunResult run = run_stream(f.model, test.events);

  // One ongoing estimate per event consumed in tracking mode.
  CHECK(run.estimates.size() == count_kind(run.outputs, OutputKind::ongoing));
  std::size_t trace_rows = 0;
  for (const Segment& s : run.segments) trace_rows += s.trace.size();
  CHECK(trace_rows == run.estimates.size());

  double n = static_cast<double>(run.segments.size());
  CHECK(n >= 0.9 * 200);
  CHECK(n <= 1.1 * 200);

  // Begins and segments alternate: the engine never stacks two begins
  // without an intervening completion on an interruption-free model.
  int depth = 0;
  for (const auto& o : run.outputs) {
    if (o.kind == OutputKind::begin || o.kind == OutputKind::interrupt_begin) {
      ++depth;
      CHECK(depth <= 2);
    }
    if (o.kind == OutputKind::segment) --depth;
  }
  CHECK(depth == 0);
}

TEST_CASE("interrupted episode produces the nested output shape") {
  auto home = shared_zone_home();
  auto f = fit_home(home, 160, 5);
  auto test = generate_stream(home, 40, 6);
  std::size_t nested_truth = 0;
  for (const auto& epi : test.episodes)
    if (epi.parent) ++nested_truth;
  REQUIRE(nested_truth >= 1);

  RunResult run = run_stream(f.model, test.events);
  std::size_t interrupts = count_kind(run.outputs, OutputKind::interrupt_begin);
  std::size_t resumes = count_kind(run.outputs, OutputKind::resume);
  CHECK(interrupts == nested_truth);
  CHECK(resumes == interrupts);

  // Each nested truth episode maps to a segment that interrupted a host of
  // the other class, with both labels right.
  int host_id = *f.classes.id_of("Meal_Preparation");
  int med_id = *f.classes.id_of("Take_Medicine");
  std::size_t matched = 0;
  for (const auto& epi : test.episodes) {
    if (!epi.parent) continue;
    for (const Segment& seg : run.segments) {
      if (!seg.parent_begin) continue;
      std::size_t dist = seg.begin_index > epi.begin_index ? seg.begin_index - epi.begin_index
                                                           : epi.begin_index - seg.begin_index;
      if (dist > static_cast<std::size_t>(f.model.beta)) continue;
      if (seg.raw_label != med_id) continue;
      // The host segment owning this parent pointer must classify as host.
      for (const Segment& host : run.segments) {
        if (host.begin_index == *seg.parent_begin && host.raw_label == host_id) {
          ++matched;
          break;
        }
      }
      break;
    }
  }
  CHECK(matched == nested_truth);
}

TEST_CASE("chunked feeding equals one pass") {
  auto f = fit_home(signature_home(2), 60, 31);
  auto test = generate_stream(signature_home(2), 25, 32);
  RunResult single = run_stream(f.model, test.events);

  EngineState state;
  std::vector<EngineOutput> chunked;
  std::size_t half = test.events.size() / 2;
  for (std::size_t i = 0; i < test.events.size(); ++i) {
    auto outs = step(f.model, state, test.events[i]);
    for (auto& o : outs) chunked.push_back(std::move(o));
    if (i + 1 == half) {
      // Nothing resets between chunks; the state simply persists.
      CHECK(state.next_index == half);
    }
  }
  for (auto& o : finish(f.model, state)) chunked.push_back(std::move(o));

  REQUIRE(chunked.size() == single.outputs.size());
  for (std::size_t i = 0; i < chunked.size(); ++i) {
    CHECK(chunked[i].kind == single.outputs[i].kind);
    CHECK(chunked[i].event_index == single.outputs[i].event_index);
    CHECK(chunked[i].timestamp == single.outputs[i].timestamp);
    if (chunked[i].estimate) {
      CHECK(chunked[i].estimate->argmax == single.outputs[i].estimate->argmax);
      CHECK(chunked[i].estimate->log_likelihoods ==
            single.outputs[i].estimate->log_likelihoods);
    }
    if (chunked[i].segment) {
      CHECK(chunked[i].segment->begin_index == single.outputs[i].segment->begin_index);
      CHECK(chunked[i].segment->end_index == single.outputs[i].segment->end_index);
      CHECK(chunked[i].segment->raw_label == single.outputs[i].segment->raw_label);
    }
  }
}

TEST_CASE("likelihood trace formatting") {
  auto model = crossover_model();
  SUBCASE("single tracked event gives one data row") {
    Segment seg;
    seg.trace = {TraceRow{5, {-1.0, -2.0, kNegInf}, 0}};
    auto csv = likelihood_trace(model, seg);
    CHECK(csv == "event_index,Alpha,Beta,Other,argmax\n5,-1,-2,-inf,Alpha\n");
  }
  SUBCASE("row and column counts match the trace shape") {
    Segment seg;
    for (std::size_t i = 0; i < 4; ++i) {
      seg.trace.push_back(TraceRow{10 + i, {-1.0 * (i + 1), -2.0, -3.0}, 0});
    }
    auto csv = likelihood_trace(model, seg);
    std::size_t rows = 0, commas_first = 0;
    for (char ch : csv)
      if (ch == '\n') ++rows;
    for (char ch : csv.substr(0, csv.find('\n')))
      if (ch == ',') ++commas_first;
    CHECK(rows == 5);  // header + one per tracked event
    // event index, one column per class including the catch-all, argmax.
    CHECK(commas_first + 1 == static_cast<std::size_t>(model.n_classes()) + 2);
  }
  SUBCASE("empty trace throws") {
    Segment seg;
    CHECK_THROWS_WITH_AS(likelihood_trace(model, seg), doctest::Contains("EmptyTrace"), Error);
  }
}

TEST_CASE("argmax switches exactly once when evidence crosses over") {
  auto model = crossover_model();
  EngineState state;
  std::vector<EngineOutput> outs;
  TimeMicros t = 1000 * kMicrosPerSecond;
  auto feed = [&](const char* sensor) {
    t += kMicrosPerSecond;
    for (auto& o : step(model, state, ev(t, sensor))) outs.push_back(std::move(o));
  };
  // Shared opening favors Alpha, then the evidence turns toward Beta.
  for (int i = 0; i < 3; ++i) feed("SA");
  for (int i = 0; i < 2; ++i) feed("SA");
  for (int i = 0; i < 10; ++i) feed("SB");
  for (auto& o : finish(model, state)) outs.push_back(std::move(o));

  REQUIRE(count_kind(outs, OutputKind::segment) == 1);
  const Segment* seg = nullptr;
  for (const auto& o : outs)
    if (o.kind == OutputKind::segment) seg = &*o.segment;
  REQUIRE(seg->trace.size() == 12);
  CHECK(seg->truncated);
  int alpha = *model.classes.id_of("Alpha");
  int beta_id = *model.classes.id_of("Beta");
  CHECK(seg->trace.front().argmax == alpha);
  CHECK(seg->trace.back().argmax == beta_id);
  int switches = 0;
  for (std::size_t i = 1; i < seg->trace.size(); ++i)
    if (seg->trace[i].argmax != seg->trace[i - 1].argmax) ++switches;
  CHECK(switches == 1);
  CHECK(seg->raw_label == beta_id);

  auto csv = likelihood_trace(model, *seg);
  CHECK(csv.find(",Alpha\n") != std::string::npos);
  CHECK(csv.find(",Beta\n") != std::string::npos);
}

TEST_CASE("beta sweep") {
  auto home = signature_home(2);
  auto train = generate_stream(home, 60, 41);
  auto test = generate_stream(home, 30, 42);
  auto alphabet = build_alphabet({&train, 1});
  auto classes = ClassRegistry::from_streams({&train, 1});
  SUBCASE("single candidate gives a single row") {
    std::vector<int> cands = {3};
    auto rows = sweep_beta(train, test, alphabet, classes, cands, FitConfig{});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].beta == 3);
    CHECK(rows[0].begin_accuracy >= 0.0);
    CHECK(rows[0].begin_accuracy <= 1.0);
  }
  SUBCASE("three-symbol signatures make beta=3 at least as good as beta=2") {
    std::vector<int> cands = {2, 3};
    auto rows = sweep_beta(train, test, alphabet, classes, cands, FitConfig{});
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].begin_accuracy >= rows[0].begin_accuracy);
  }
  SUBCASE("csv schema with and without a dataset column") {
    std::vector<BetaSweepRow> rows = {{2, 0.5}, {3, 0.75}};
    CHECK(beta_sweep_csv("homeX", rows) == "dataset,beta_2,beta_3\nhomeX,0.5,0.75\n");
    CHECK(beta_sweep_csv("", rows) == "beta_2,beta_3\n0.5,0.75\n");
  }
  SUBCASE("no candidates is an error") {
    CHECK_THROWS_WITH_AS(sweep_beta(train, test, alphabet, classes, {}, FitConfig{}),
                         doctest::Contains("BadParameter"), Error);
  }
}
