#ifndef STREAMHAR_EVENTS_HPP
#define STREAMHAR_EVENTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "streamhar/errors.hpp"

namespace streamhar {

// Timestamps are microseconds since 1970-01-01 00:00:00, naive local time.
using TimeMicros = std::int64_t;

inline constexpr std::int64_t kMicrosPerSecond = 1'000'000;
inline constexpr std::int64_t kSecondsPerDay = 86'400;
inline constexpr std::int64_t kMicrosPerDay = kSecondsPerDay * kMicrosPerSecond;

// Parses "YYYY-MM-DD" + "HH:MM:SS[.ffffff]". Throws Errc::malformed_line.
TimeMicros parse_timestamp(std::string_view date, std::string_view time);

// Canonical form: fractional part emitted only when non-zero, padded to 6 digits.
std::string format_timestamp(TimeMicros t);

inline double seconds_since_midnight(TimeMicros t) {
  std::int64_t m = t % kMicrosPerDay;
  if (m < 0) m += kMicrosPerDay;
  return static_cast<double>(m) / kMicrosPerSecond;
}

enum class Marker { begin, end };

struct Annotation {
  std::string activity;
  Marker marker = Marker::begin;
};

struct SensorEvent {
  TimeMicros timestamp = 0;
  std::string sensor_id;
  std::string value;
  std::optional<Annotation> annotation;
};

// One annotated activity span. Indices address the owning stream's event
// vector; [begin_index, end_index] is inclusive. A nested episode (one
// interruption level) carries the index of its enclosing episode.
struct Episode {
  std::string activity;
  std::size_t begin_index = 0;
  std::size_t end_index = 0;
  std::optional<std::size_t> parent;
};

struct ParseStats {
  std::size_t malformed_lines = 0;
  std::size_t dropped_annotations = 0;
  std::size_t non_monotonic_lines = 0;
};

struct LabeledStream {
  std::vector<SensorEvent> events;
  std::vector<Episode> episodes;
  ParseStats stats;
};

enum class Strictness { strict, lenient };

// One event per non-empty line: date time sensor value [activity marker].
// Lenient mode counts and skips bad lines; strict mode throws.
LabeledStream parse_stream(std::span<const std::string> lines, Strictness strictness);
LabeledStream parse_text(std::string_view text, Strictness strictness);
std::string serialize_stream(const LabeledStream& stream);

// Rebuilds the episode list from per-event annotations (used by the parser
// and by the synthetic generator). Throws on unmatched or over-nested
// annotations in strict mode; repairs and counts in lenient mode.
void derive_episodes(LabeledStream& stream, Strictness strictness);

// The finite observation set: (sensor_id, value) pairs in lexicographic
// order. Symbols unseen at build time map to a reserved trailing index so
// inference never fails on a new sensor.
class ObservationAlphabet {
 public:
  ObservationAlphabet() = default;
  explicit ObservationAlphabet(std::vector<std::pair<std::string, std::string>> symbols);

  std::size_t size() const { return symbols_.size(); }
  int unknown_index() const { return static_cast<int>(symbols_.size()); }
  // Width of emission tables: known symbols plus the unknown slot.
  int symbol_count() const { return static_cast<int>(symbols_.size()) + 1; }

  std::optional<int> index_of(const std::string& sensor_id, const std::string& value) const;
  int index_or_unknown(const std::string& sensor_id, const std::string& value) const;
  const std::pair<std::string, std::string>& symbol_at(int index) const;
  std::string symbol_name(int index) const;  // "M001=ON", unknown slot -> "?"

  // Dense symbol indices for a whole stream.
  std::vector<int> encode(const LabeledStream& stream) const;

  bool operator==(const ObservationAlphabet& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<std::pair<std::string, std::string>> symbols_;
  std::map<std::pair<std::string, std::string>, int> index_;
};

ObservationAlphabet build_alphabet(std::span<const LabeledStream> streams);

struct ActivityClass {
  std::string name;
  int id = 0;
  bool is_other = false;
};

// Dense activity-class ids, catch-all class always present and last.
class ClassRegistry {
 public:
  static constexpr const char* kOtherName = "Other";

  static ClassRegistry from_streams(std::span<const LabeledStream> streams);
  static ClassRegistry from_names(std::vector<std::string> names);  // "Other" appended if absent

  std::size_t size() const { return classes_.size(); }
  int other_id() const { return static_cast<int>(classes_.size()) - 1; }
  const ActivityClass& at(int id) const { return classes_.at(static_cast<std::size_t>(id)); }
  std::optional<int> id_of(const std::string& name) const;
  int id_or_other(const std::string& name) const;
  const std::vector<ActivityClass>& classes() const { return classes_; }

 private:
  std::vector<ActivityClass> classes_;
  std::map<std::string, int> by_name_;
};

// Per-class symbol frequencies over the first beta events, the middle, and
// the last beta events of each episode. Each non-empty vector sums to 1.
struct ActivationRow {
  int class_id = 0;
  std::string class_name;
  std::vector<double> begin_freq;
  std::vector<double> body_freq;
  std::vector<double> end_freq;
  std::size_t episode_count = 0;
};

struct ActivationReport {
  std::vector<ActivationRow> rows;  // classes with at least one episode, id order
};

ActivationReport activation_report(const LabeledStream& stream,
                                   const ObservationAlphabet& alphabet,
                                   const ClassRegistry& registry, int beta);

std::string activation_report_csv(const ActivationReport& report,
                                  const ObservationAlphabet& alphabet);

}  // namespace streamhar

#endif  // STREAMHAR_EVENTS_HPP
