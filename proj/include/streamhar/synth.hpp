#ifndef STREAMHAR_SYNTH_HPP
#define STREAMHAR_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "streamhar/events.hpp"

namespace streamhar {

struct SymbolSpec {
  std::string sensor_id;
  std::string value;
};

struct WeightedSymbol {
  SymbolSpec symbol;
  double weight = 1.0;
};

// Wrapped-normal mode over seconds since midnight.
struct TimeOfDayMode {
  double mean_s = 43200.0;
  double sd_s = 3600.0;
  double weight = 1.0;
};

// How one activity class emits events: a fixed ordered begin signature, a
// weighted body symbol distribution, a fixed end signature, and duration /
// time-of-day laws.
struct ClassProfile {
  std::string name;
  std::vector<SymbolSpec> begin_signature;
  std::vector<WeightedSymbol> body;
  std::vector<SymbolSpec> end_signature;
  double duration_median_s = 600.0;
  double duration_log_sd = 0.3;
  std::vector<TimeOfDayMode> time_of_day;
  int body_events_min = 4;
  int body_events_max = 16;
};

struct HomeSpec {
  std::vector<ClassProfile> classes;
  std::vector<WeightedSymbol> idle_noise;
  double idle_noise_events_mean = 5.0;
  double min_gap_s = 60.0;
  double mean_extra_gap_s = 600.0;
  // Probability that an eligible episode (different class, >= 6 body
  // events) gets a nested episode of `interrupting_class` injected.
  double interruption_rate = 0.0;
  int interrupting_class = -1;
  TimeMicros start_time = 1306886400LL * kMicrosPerSecond;  // 2011-06-01 00:00:00
};

void validate_home(const HomeSpec& spec);  // throws InvalidProfile

// Deterministic labeled stream: n_episodes top-level episodes (classes
// cycled in shuffled blocks) plus idle noise and optional nested episodes.
LabeledStream generate_stream(const HomeSpec& spec, int n_episodes, std::uint64_t seed);

// Built-in homes. `default_home` is an 11-class layout with 20 motion and
// 12 door sensors; `confusable_pair_home` has two classes identical except
// for time of day and duration; `shared_zone_home` hosts interruptions on a
// common sensor set.
HomeSpec default_home();
HomeSpec confusable_pair_home();
HomeSpec shared_zone_home();
std::optional<HomeSpec> home_by_name(const std::string& name);

}  // namespace streamhar

#endif  // STREAMHAR_SYNTH_HPP
