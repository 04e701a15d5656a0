#include "streamhar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "streamhar/errors.hpp"

namespace streamhar {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) raise(Errc::invalid_profile, what);
}

void check_symbols(const std::vector<SymbolSpec>& v, const std::string& where) {
  require(!v.empty(), where + " is empty");
  for (const auto& s : v)
    require(!s.sensor_id.empty() && !s.value.empty(), where + " has a blank symbol");
}

void check_weighted(const std::vector<WeightedSymbol>& v, const std::string& where) {
  require(!v.empty(), where + " is empty");
  double total = 0.0;
  for (const auto& w : v) {
    require(!w.symbol.sensor_id.empty() && !w.symbol.value.empty(), where + " has a blank symbol");
    require(w.weight > 0.0 && std::isfinite(w.weight), where + " has a non-positive weight");
    total += w.weight;
  }
  require(total > 0.0, where + " has zero total weight");
}

const SymbolSpec& draw_weighted(const std::vector<WeightedSymbol>& dist, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& w : dist) total += w.weight;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (const auto& w : dist) {
    u -= w.weight;
    if (u <= 0.0) return w.symbol;
  }
  return dist.back().symbol;
}

double draw_time_of_day(const ClassProfile& p, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& m : p.time_of_day) total += m.weight;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  const TimeOfDayMode* pick = &p.time_of_day.back();
  for (const auto& m : p.time_of_day) {
    u -= m.weight;
    if (u <= 0.0) {
      pick = &m;
      break;
    }
  }
  double v = pick->mean_s + pick->sd_s * std::normal_distribution<double>(0.0, 1.0)(rng);
  v = std::fmod(v, static_cast<double>(kSecondsPerDay));
  if (v < 0.0) v += kSecondsPerDay;
  return v;
}

double draw_duration(const ClassProfile& p, std::mt19937_64& rng) {
  double d = p.duration_median_s *
             std::exp(p.duration_log_sd * std::normal_distribution<double>(0.0, 1.0)(rng));
  return std::clamp(d, 5.0, 85000.0);
}

// Symbols of one episode plus cumulative offsets (seconds from its begin).
struct EpisodePlan {
  const ClassProfile* profile;
  std::vector<SymbolSpec> symbols;
  std::vector<double> offsets;
  double duration;
};

EpisodePlan plan_episode(const ClassProfile& p, std::mt19937_64& rng) {
  EpisodePlan plan;
  plan.profile = &p;
  int n_body = std::uniform_int_distribution<int>(p.body_events_min, p.body_events_max)(rng);
  plan.symbols = p.begin_signature;
  for (int i = 0; i < n_body; ++i) plan.symbols.push_back(draw_weighted(p.body, rng));
  plan.symbols.insert(plan.symbols.end(), p.end_signature.begin(), p.end_signature.end());

  plan.duration = draw_duration(p, rng);
  const std::size_t n = plan.symbols.size();
  std::vector<double> gaps(n - 1);
  double total = 0.0;
  for (auto& g : gaps) {
    g = std::uniform_real_distribution<double>(0.6, 1.4)(rng);
    total += g;
  }
  plan.offsets.resize(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    acc += gaps[i - 1] / total * plan.duration;
    plan.offsets[i] = acc;
  }
  return plan;
}

TimeMicros micros_of(double seconds) {
  return static_cast<TimeMicros>(std::llround(seconds * kMicrosPerSecond));
}

}  // namespace

void validate_home(const HomeSpec& spec) {
  require(!spec.classes.empty(), "home has no classes");
  for (const auto& p : spec.classes) {
    require(!p.name.empty(), "class with empty name");
    check_symbols(p.begin_signature, p.name + " begin signature");
    check_weighted(p.body, p.name + " body");
    check_symbols(p.end_signature, p.name + " end signature");
    require(p.duration_median_s > 0.0, p.name + " duration must be positive");
    require(p.duration_log_sd >= 0.0, p.name + " duration spread must be non-negative");
    require(!p.time_of_day.empty(), p.name + " has no time-of-day modes");
    for (const auto& m : p.time_of_day) {
      require(m.sd_s >= 0.0, p.name + " time-of-day spread must be non-negative");
      require(m.weight > 0.0, p.name + " time-of-day mode weight must be positive");
    }
    require(p.body_events_min >= 1 && p.body_events_max >= p.body_events_min,
            p.name + " body event range is invalid");
  }
  check_weighted(spec.idle_noise, "idle noise");
  require(spec.idle_noise_events_mean >= 0.0, "idle noise mean must be non-negative");
  require(spec.min_gap_s > 0.0 && spec.mean_extra_gap_s >= 0.0, "gap parameters are invalid");
  require(spec.interruption_rate >= 0.0 && spec.interruption_rate <= 1.0,
          "interruption rate must be in [0, 1]");
  if (spec.interruption_rate > 0.0)
    require(spec.interrupting_class >= 0 &&
                spec.interrupting_class < static_cast<int>(spec.classes.size()),
            "interrupting class index is out of range");
}

LabeledStream generate_stream(const HomeSpec& spec, int n_episodes, std::uint64_t seed) {
  validate_home(spec);
  if (n_episodes < 1) raise(Errc::bad_parameter, "episode count must be at least 1");

  std::mt19937_64 rng(seed);
  const int n_classes = static_cast<int>(spec.classes.size());

  std::vector<int> deck;
  deck.reserve(static_cast<std::size_t>(n_episodes) + n_classes);
  while (static_cast<int>(deck.size()) < n_episodes) {
    std::vector<int> block(n_classes);
    std::iota(block.begin(), block.end(), 0);
    std::shuffle(block.begin(), block.end(), rng);
    deck.insert(deck.end(), block.begin(), block.end());
  }
  deck.resize(n_episodes);

  LabeledStream out;
  TimeMicros t = spec.start_time;

  auto push_event = [&out](TimeMicros ts, const SymbolSpec& sym, std::optional<Annotation> ann) {
    out.events.push_back(SensorEvent{ts, sym.sensor_id, sym.value, std::move(ann)});
  };

  for (int e = 0; e < n_episodes; ++e) {
    const ClassProfile& prof = spec.classes[deck[e]];
    double extra = spec.mean_extra_gap_s > 0.0
                       ? std::exponential_distribution<double>(1.0 / spec.mean_extra_gap_s)(rng)
                       : 0.0;
    TimeMicros earliest = t + micros_of(spec.min_gap_s + extra);

    double tod = draw_time_of_day(prof, rng);
    TimeMicros day = earliest / kMicrosPerDay;
    TimeMicros begin_ts = day * kMicrosPerDay + micros_of(tod);
    while (begin_ts < earliest) begin_ts += kMicrosPerDay;

    if (spec.idle_noise_events_mean > 0.0) {
      int n_noise = std::poisson_distribution<int>(spec.idle_noise_events_mean)(rng);
      TimeMicros lo = t + kMicrosPerSecond;
      TimeMicros hi = begin_ts - kMicrosPerSecond;
      if (hi > lo && n_noise > 0) {
        std::vector<TimeMicros> when(n_noise);
        std::uniform_int_distribution<TimeMicros> dist(lo, hi);
        for (auto& w : when) w = dist(rng);
        std::sort(when.begin(), when.end());
        for (TimeMicros w : when) push_event(w, draw_weighted(spec.idle_noise, rng), std::nullopt);
      }
    }

    EpisodePlan host = plan_episode(prof, rng);
    int n_body = static_cast<int>(host.symbols.size() - prof.begin_signature.size() -
                                  prof.end_signature.size());

    bool interrupt = false;
    if (spec.interrupting_class >= 0 && deck[e] != spec.interrupting_class && n_body >= 6 &&
        spec.interruption_rate > 0.0)
      interrupt = std::bernoulli_distribution(spec.interruption_rate)(rng);

    if (!interrupt) {
      for (std::size_t i = 0; i < host.symbols.size(); ++i) {
        std::optional<Annotation> ann;
        if (i == 0) ann = Annotation{prof.name, Marker::begin};
        if (i + 1 == host.symbols.size()) ann = Annotation{prof.name, Marker::end};
        push_event(begin_ts + micros_of(host.offsets[i]), host.symbols[i], std::move(ann));
      }
      t = begin_ts + micros_of(host.offsets.back());
    } else {
      const ClassProfile& nprof = spec.classes[spec.interrupting_class];
      EpisodePlan nested = plan_episode(nprof, rng);
      // Insert after a mid-body host event, leaving at least two body
      // events on each side so both boundaries stay clean.
      int lo = static_cast<int>(prof.begin_signature.size()) + 2;
      int hi = lo + n_body - 4;
      int after = std::uniform_int_distribution<int>(lo, std::max(lo, hi))(rng);
      double eps1 = std::uniform_real_distribution<double>(2.0, 8.0)(rng);
      double eps2 = std::uniform_real_distribution<double>(2.0, 8.0)(rng);

      for (int i = 0; i < after; ++i) {
        std::optional<Annotation> ann;
        if (i == 0) ann = Annotation{prof.name, Marker::begin};
        push_event(begin_ts + micros_of(host.offsets[i]), host.symbols[i], std::move(ann));
      }
      TimeMicros nested_begin = begin_ts + micros_of(host.offsets[after - 1] + eps1);
      for (std::size_t i = 0; i < nested.symbols.size(); ++i) {
        std::optional<Annotation> ann;
        if (i == 0) ann = Annotation{nprof.name, Marker::begin};
        if (i + 1 == nested.symbols.size()) ann = Annotation{nprof.name, Marker::end};
        push_event(nested_begin + micros_of(nested.offsets[i]), nested.symbols[i], std::move(ann));
      }
      TimeMicros shift = micros_of(nested.duration + eps1 + eps2);
      for (std::size_t i = after; i < host.symbols.size(); ++i) {
        std::optional<Annotation> ann;
        if (i + 1 == host.symbols.size()) ann = Annotation{prof.name, Marker::end};
        push_event(begin_ts + shift + micros_of(host.offsets[i]), host.symbols[i], std::move(ann));
      }
      t = begin_ts + shift + micros_of(host.offsets.back());
    }
  }

  derive_episodes(out, Strictness::strict);
  return out;
}

namespace {

SymbolSpec sym(const char* id, const char* value) { return SymbolSpec{id, value}; }

WeightedSymbol ws(const char* id, const char* value, double w) {
  return WeightedSymbol{SymbolSpec{id, value}, w};
}

}  // namespace

HomeSpec default_home() {
  HomeSpec home;
  home.idle_noise_events_mean = 6.0;
  home.min_gap_s = 90.0;
  home.mean_extra_gap_s = 400.0;

  // Hallway traffic dominates idle noise; occasional glances into zones
  // produce plausible two-event false starts, and rarely used doors
  // (D007..D012) only ever appear here.
  home.idle_noise = {
      ws("M001", "ON", 0.110), ws("M001", "OFF", 0.110), ws("M002", "ON", 0.110),
      ws("M002", "OFF", 0.110), ws("M003", "ON", 0.090), ws("M003", "OFF", 0.090),
      ws("M004", "ON", 0.090), ws("M004", "OFF", 0.090),
      ws("M005", "ON", 0.013), ws("M010", "ON", 0.013), ws("M012", "ON", 0.013),
      ws("M014", "ON", 0.013), ws("M017", "ON", 0.013), ws("M009", "ON", 0.013),
      ws("M019", "ON", 0.013), ws("M016", "ON", 0.013),
      ws("D007", "OPEN", 0.008), ws("D007", "CLOSE", 0.008),
      ws("D008", "OPEN", 0.008), ws("D008", "CLOSE", 0.008),
      ws("D009", "OPEN", 0.008), ws("D009", "CLOSE", 0.008),
      ws("D010", "OPEN", 0.008), ws("D010", "CLOSE", 0.008),
      ws("D011", "OPEN", 0.008), ws("D011", "CLOSE", 0.008),
      ws("D012", "OPEN", 0.008), ws("D012", "CLOSE", 0.008),
  };

  auto add = [&home](ClassProfile p) { home.classes.push_back(std::move(p)); };

  {
    ClassProfile p;
    p.name = "Bathing";
    p.begin_signature = {sym("M002", "ON"), sym("D002", "OPEN"), sym("M016", "ON")};
    p.body = {ws("M016", "ON", 0.40), ws("M016", "OFF", 0.30), ws("M015", "ON", 0.15),
              ws("M015", "OFF", 0.10), ws("M014", "ON", 0.05)};
    p.end_signature = {sym("M016", "OFF"), sym("D002", "CLOSE"), sym("M002", "OFF")};
    p.duration_median_s = 840.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{20.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 8;
    p.body_events_max = 20;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Bed_To_Toilet";
    p.begin_signature = {sym("M020", "ON"), sym("M004", "ON"), sym("M014", "ON")};
    p.body = {ws("M020", "ON", 0.30), ws("M020", "OFF", 0.25), ws("M014", "ON", 0.25),
              ws("M014", "OFF", 0.20)};
    p.end_signature = {sym("M014", "OFF"), sym("M004", "OFF"), sym("M020", "OFF")};
    p.duration_median_s = 205.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{3.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 3;
    p.body_events_max = 7;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Eating_Food";
    p.begin_signature = {sym("M003", "ON"), sym("M010", "ON"), sym("M011", "ON")};
    p.body = {ws("M010", "ON", 0.30), ws("M010", "OFF", 0.20), ws("M011", "ON", 0.30),
              ws("M011", "OFF", 0.20)};
    p.end_signature = {sym("M011", "OFF"), sym("M010", "OFF"), sym("M003", "OFF")};
    p.duration_median_s = 840.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{8.5 * 3600.0, 0.2 * 3600.0, 0.8}, {18.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 6;
    p.body_events_max = 16;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Enter_Home";
    p.begin_signature = {sym("D001", "OPEN"), sym("M001", "ON"), sym("M002", "ON")};
    p.body = {ws("M003", "ON", 0.35), ws("M003", "OFF", 0.25), ws("D001", "CLOSE", 0.25),
              ws("M001", "OFF", 0.15)};
    p.end_signature = {sym("M003", "ON"), sym("M003", "OFF"), sym("M002", "OFF")};
    p.duration_median_s = 50.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{13.5 * 3600.0, 0.2 * 3600.0, 1.0}, {17.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 2;
    p.body_events_max = 5;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Housekeeping";
    p.begin_signature = {sym("M004", "ON"), sym("M019", "ON"), sym("D006", "OPEN")};
    p.body = {ws("M019", "ON", 0.25), ws("M019", "OFF", 0.20), ws("M013", "ON", 0.15),
              ws("M013", "OFF", 0.10), ws("M005", "ON", 0.10), ws("M005", "OFF", 0.10),
              ws("D006", "CLOSE", 0.10)};
    p.end_signature = {sym("D006", "CLOSE"), sym("M019", "OFF"), sym("M004", "OFF")};
    p.duration_median_s = 1700.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{10.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 12;
    p.body_events_max = 28;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Leave_Home";
    p.begin_signature = {sym("M002", "ON"), sym("M001", "ON"), sym("D001", "OPEN")};
    p.body = {ws("M002", "OFF", 0.40), ws("M001", "OFF", 0.40), ws("M002", "ON", 0.20)};
    p.end_signature = {sym("D001", "CLOSE"), sym("M001", "OFF"), sym("M002", "OFF")};
    p.duration_median_s = 50.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{9.5 * 3600.0, 0.2 * 3600.0, 1.0}, {15.5 * 3600.0, 0.2 * 3600.0, 0.8}};
    p.body_events_min = 2;
    p.body_events_max = 4;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Meal_Preparation";
    p.begin_signature = {sym("M003", "ON"), sym("M005", "ON"), sym("M006", "ON")};
    p.body = {ws("M006", "ON", 0.22), ws("M006", "OFF", 0.14), ws("M007", "ON", 0.22),
              ws("M007", "OFF", 0.14), ws("D004", "OPEN", 0.09), ws("D004", "CLOSE", 0.09),
              ws("M008", "ON", 0.05), ws("M008", "OFF", 0.05)};
    p.end_signature = {sym("M007", "OFF"), sym("M005", "OFF"), sym("M003", "OFF")};
    p.duration_median_s = 840.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{7.5 * 3600.0, 0.2 * 3600.0, 1.0}, {18.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 10;
    p.body_events_max = 26;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Napping";
    p.begin_signature = {sym("M004", "ON"), sym("M012", "ON"), sym("M013", "ON")};
    p.body = {ws("M012", "ON", 0.30), ws("M012", "OFF", 0.25), ws("M013", "ON", 0.25),
              ws("M013", "OFF", 0.20)};
    p.end_signature = {sym("M013", "OFF"), sym("M012", "OFF"), sym("M004", "OFF")};
    p.duration_median_s = 3500.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{14.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 4;
    p.body_events_max = 10;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Personal_Hygiene";
    p.begin_signature = {sym("M002", "ON"), sym("M014", "ON"), sym("M015", "ON")};
    p.body = {ws("M015", "ON", 0.40), ws("M015", "OFF", 0.30), ws("M014", "ON", 0.15),
              ws("M014", "OFF", 0.10), ws("M016", "ON", 0.05)};
    p.end_signature = {sym("M015", "OFF"), sym("M014", "OFF"), sym("M002", "OFF")};
    p.duration_median_s = 415.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{7.5 * 3600.0, 0.2 * 3600.0, 1.0}, {21.5 * 3600.0, 0.2 * 3600.0, 0.8}};
    p.body_events_min = 5;
    p.body_events_max = 14;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Sleeping_In_Bed";
    p.begin_signature = {sym("M004", "ON"), sym("M017", "ON"), sym("M018", "ON")};
    p.body = {ws("M018", "ON", 0.30), ws("M018", "OFF", 0.25), ws("M017", "ON", 0.20),
              ws("M017", "OFF", 0.15), ws("D005", "OPEN", 0.05), ws("D005", "CLOSE", 0.05)};
    p.end_signature = {sym("M020", "ON"), sym("M020", "OFF"), sym("M004", "ON")};
    p.duration_median_s = 29000.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{23.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 6;
    p.body_events_max = 14;
    add(p);
  }
  {
    ClassProfile p;
    p.name = "Take_Medicine";
    p.begin_signature = {sym("M003", "ON"), sym("M009", "ON"), sym("D003", "OPEN")};
    p.body = {ws("M009", "ON", 0.35), ws("M009", "OFF", 0.25), ws("D003", "CLOSE", 0.40)};
    p.end_signature = {sym("D003", "CLOSE"), sym("M009", "OFF"), sym("M003", "OFF")};
    p.duration_median_s = 100.0;
    p.duration_log_sd = 0.12;
    p.time_of_day = {{8.5 * 3600.0, 0.2 * 3600.0, 1.0}, {20.5 * 3600.0, 0.2 * 3600.0, 1.0}};
    p.body_events_min = 3;
    p.body_events_max = 7;
    add(p);
  }

  return home;
}

HomeSpec confusable_pair_home() {
  HomeSpec home;
  home.idle_noise_events_mean = 4.0;
  home.min_gap_s = 90.0;
  home.mean_extra_gap_s = 500.0;
  home.idle_noise = {ws("M001", "ON", 0.25), ws("M001", "OFF", 0.25), ws("M002", "ON", 0.25),
                     ws("M002", "OFF", 0.25)};

  // Identical signatures and bodies; only duration and time of day differ.
  auto twin = [](const char* name, double dur_median, double tod_mean_h) {
    ClassProfile p;
    p.name = name;
    p.begin_signature = {sym("M002", "ON"), sym("M005", "ON"), sym("M006", "ON")};
    p.body = {ws("M005", "ON", 0.30), ws("M005", "OFF", 0.20), ws("M006", "ON", 0.30),
              ws("M006", "OFF", 0.20)};
    p.end_signature = {sym("M006", "OFF"), sym("M005", "OFF"), sym("M002", "OFF")};
    p.duration_median_s = dur_median;
    p.duration_log_sd = 0.20;
    p.time_of_day = {{tod_mean_h * 3600.0, 0.35 * 3600.0, 1.0}};
    p.body_events_min = 5;
    p.body_events_max = 12;
    return p;
  };
  home.classes.push_back(twin("Bed_To_Toilet", 205.0, 3.5));
  home.classes.push_back(twin("Personal_Hygiene", 415.0, 7.5));
  return home;
}

HomeSpec shared_zone_home() {
  HomeSpec home;
  home.idle_noise_events_mean = 4.0;
  home.min_gap_s = 90.0;
  home.mean_extra_gap_s = 400.0;
  home.idle_noise = {ws("M001", "ON", 0.25), ws("M001", "OFF", 0.25), ws("M002", "ON", 0.25),
                     ws("M002", "OFF", 0.25)};

  // Both classes live on kitchen sensors M005..M008; only the order and
  // mix of triggers separates them.
  ClassProfile host;
  host.name = "Meal_Preparation";
  host.begin_signature = {sym("M007", "ON"), sym("M005", "ON"), sym("M006", "ON")};
  host.body = {ws("M005", "ON", 0.35), ws("M005", "OFF", 0.35), ws("M006", "ON", 0.10),
               ws("M006", "OFF", 0.10), ws("M007", "ON", 0.05), ws("M008", "ON", 0.05)};
  host.end_signature = {sym("M008", "OFF"), sym("M007", "OFF"), sym("M008", "OFF")};
  host.duration_median_s = 840.0;
  host.duration_log_sd = 0.12;
  host.time_of_day = {{7.5 * 3600.0, 0.2 * 3600.0, 1.0}, {18.5 * 3600.0, 0.2 * 3600.0, 1.0}};
  host.body_events_min = 10;
  host.body_events_max = 18;

  ClassProfile med;
  med.name = "Take_Medicine";
  med.begin_signature = {sym("M008", "ON"), sym("M006", "ON"), sym("M008", "ON")};
  med.body = {ws("M008", "ON", 0.35), ws("M008", "OFF", 0.35), ws("M006", "ON", 0.10),
              ws("M006", "OFF", 0.10), ws("M005", "ON", 0.05), ws("M007", "ON", 0.05)};
  med.end_signature = {sym("M006", "OFF"), sym("M008", "OFF"), sym("M006", "OFF")};
  med.duration_median_s = 100.0;
  med.duration_log_sd = 0.12;
  med.time_of_day = {{8.5 * 3600.0, 0.2 * 3600.0, 1.0}, {18.5 * 3600.0, 0.2 * 3600.0, 1.0}};
  med.body_events_min = 3;
  med.body_events_max = 6;

  home.classes.push_back(std::move(host));
  home.classes.push_back(std::move(med));
  home.interrupting_class = 1;
  home.interruption_rate = 0.35;
  return home;
}

std::optional<HomeSpec> home_by_name(const std::string& name) {
  if (name == "default") return default_home();
  if (name == "confusable-pair") return confusable_pair_home();
  if (name == "shared-zone") return shared_zone_home();
  return std::nullopt;
}

}  // namespace streamhar
