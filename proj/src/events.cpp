#include "streamhar/events.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace streamhar {

namespace {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

bool parse_int(std::string_view s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

TimeMicros parse_timestamp(std::string_view date, std::string_view time) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (date.size() != 10 || date[4] != '-' || date[7] != '-' ||
      !parse_int(date.substr(0, 4), y) || !parse_int(date.substr(5, 2), mo) ||
      !parse_int(date.substr(8, 2), d)) {
    raise(Errc::malformed_line, "bad date '" + std::string(date) + "'");
  }
  if (time.size() < 8 || time[2] != ':' || time[5] != ':' ||
      !parse_int(time.substr(0, 2), h) || !parse_int(time.substr(3, 2), mi) ||
      !parse_int(time.substr(6, 2), s)) {
    raise(Errc::malformed_line, "bad time '" + std::string(time) + "'");
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
    raise(Errc::malformed_line, "out-of-range date/time '" + std::string(date) + " " +
                                    std::string(time) + "'");
  }
  std::int64_t micros = 0;
  if (time.size() > 8) {
    if (time[8] != '.' || time.size() > 15) {
      raise(Errc::malformed_line, "bad fractional seconds '" + std::string(time) + "'");
    }
    std::string_view frac = time.substr(9);
    if (frac.empty()) raise(Errc::malformed_line, "bad fractional seconds");
    int value = 0;
    if (!parse_int(frac, value)) raise(Errc::malformed_line, "bad fractional seconds");
    for (std::size_t k = frac.size(); k < 6; ++k) value *= 10;
    micros = value;
  }
  std::int64_t days = days_from_civil(y, mo, d);
  std::int64_t seconds = days * kSecondsPerDay + h * 3600 + mi * 60 + s;
  return seconds * kMicrosPerSecond + micros;
}

std::string format_timestamp(TimeMicros t) {
  std::int64_t micros = t % kMicrosPerSecond;
  std::int64_t seconds = t / kMicrosPerSecond;
  if (micros < 0) {
    micros += kMicrosPerSecond;
    seconds -= 1;
  }
  std::int64_t days = seconds / kSecondsPerDay;
  std::int64_t sod = seconds % kSecondsPerDay;
  if (sod < 0) {
    sod += kSecondsPerDay;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[40];
  int n = std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", y, m, d,
                        static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                        static_cast<int>(sod % 60));
  std::string out(buf, static_cast<std::size_t>(n));
  if (micros != 0) {
    std::snprintf(buf, sizeof(buf), ".%06d", static_cast<int>(micros));
    out += buf;
  }
  return out;
}

LabeledStream parse_stream(std::span<const std::string> lines, Strictness strictness) {
  LabeledStream stream;
  TimeMicros last = std::numeric_limits<TimeMicros>::min();
  for (std::size_t lineno = 0; lineno < lines.size(); ++lineno) {
    const std::string& line = lines[lineno];
    std::vector<std::string_view> tok = split_ws(line);
    if (tok.empty()) continue;
    try {
      if (tok.size() != 4 && tok.size() != 6) {
        raise(Errc::malformed_line, "expected 4 or 6 fields, got " + std::to_string(tok.size()) +
                                        " (line " + std::to_string(lineno + 1) + ")");
      }
      SensorEvent event;
      event.timestamp = parse_timestamp(tok[0], tok[1]);
      event.sensor_id = std::string(tok[2]);
      event.value = std::string(tok[3]);
      if (event.sensor_id.empty() || event.value.empty()) {
        raise(Errc::malformed_line, "empty sensor or value token");
      }
      if (tok.size() == 6) {
        Annotation ann;
        ann.activity = std::string(tok[4]);
        if (tok[5] == "begin") {
          ann.marker = Marker::begin;
        } else if (tok[5] == "end") {
          ann.marker = Marker::end;
        } else {
          raise(Errc::malformed_line, "marker must be 'begin' or 'end', got '" +
                                          std::string(tok[5]) + "'");
        }
        event.annotation = std::move(ann);
      }
      if (event.timestamp < last) {
        if (strictness == Strictness::strict) {
          raise(Errc::non_monotonic_timestamp,
                "timestamp decreases at line " + std::to_string(lineno + 1));
        }
        ++stream.stats.non_monotonic_lines;
        continue;
      }
      last = event.timestamp;
      stream.events.push_back(std::move(event));
    } catch (const Error& e) {
      if (e.code() != Errc::malformed_line || strictness == Strictness::strict) throw;
      ++stream.stats.malformed_lines;
    }
  }
  derive_episodes(stream, strictness);
  return stream;
}

LabeledStream parse_text(std::string_view text, Strictness strictness) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return parse_stream(lines, strictness);
}

void derive_episodes(LabeledStream& stream, Strictness strictness) {
  stream.episodes.clear();
  struct Open {
    std::string activity;
    std::size_t begin_index;
  };
  std::vector<Open> open;  // nesting stack
  std::vector<std::optional<std::size_t>> parent_of_open;
  std::vector<Episode> episodes;
  std::vector<std::optional<std::size_t>> open_episode_slot;

  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const auto& ann = stream.events[i].annotation;
    if (!ann) continue;
    if (ann->marker == Marker::begin) {
      if (open.size() >= 2) {
        if (strictness == Strictness::strict) {
          raise(Errc::nesting_too_deep, "annotation nesting exceeds depth 2 at event " +
                                            std::to_string(i));
        }
        ++stream.stats.dropped_annotations;
        continue;
      }
      open.push_back({ann->activity, i});
    } else {
      // Close the innermost matching open episode; lenient mode drops
      // anything opened above it.
      int match = -1;
      for (int k = static_cast<int>(open.size()) - 1; k >= 0; --k) {
        if (open[static_cast<std::size_t>(k)].activity == ann->activity) {
          match = k;
          break;
        }
      }
      if (match < 0) {
        if (strictness == Strictness::strict) {
          raise(Errc::unmatched_annotation,
                "'end' without matching 'begin' for '" + ann->activity + "' at event " +
                    std::to_string(i));
        }
        ++stream.stats.dropped_annotations;
        continue;
      }
      if (match != static_cast<int>(open.size()) - 1) {
        if (strictness == Strictness::strict) {
          raise(Errc::unmatched_annotation,
                "improperly nested 'end' for '" + ann->activity + "' at event " +
                    std::to_string(i));
        }
        stream.stats.dropped_annotations += open.size() - static_cast<std::size_t>(match) - 1;
        open.resize(static_cast<std::size_t>(match) + 1);
      }
      Episode ep;
      ep.activity = open.back().activity;
      ep.begin_index = open.back().begin_index;
      ep.end_index = i;
      open.pop_back();
      episodes.push_back(std::move(ep));
    }
  }
  if (!open.empty()) {
    if (strictness == Strictness::strict) {
      raise(Errc::unmatched_annotation,
            "'begin' without matching 'end' for '" + open.back().activity + "'");
    }
    stream.stats.dropped_annotations += open.size();
  }

  std::sort(episodes.begin(), episodes.end(), [](const Episode& a, const Episode& b) {
    if (a.begin_index != b.begin_index) return a.begin_index < b.begin_index;
    return a.end_index > b.end_index;
  });
  // Nested episodes point at their host.
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    for (std::size_t j = i; j-- > 0;) {
      if (episodes[j].begin_index <= episodes[i].begin_index &&
          episodes[j].end_index >= episodes[i].end_index &&
          !(episodes[j].begin_index == episodes[i].begin_index &&
            episodes[j].end_index == episodes[i].end_index)) {
        episodes[i].parent = j;
        break;
      }
    }
  }
  stream.episodes = std::move(episodes);
}

std::string serialize_stream(const LabeledStream& stream) {
  std::string out;
  for (const SensorEvent& e : stream.events) {
    out += format_timestamp(e.timestamp);
    out += ' ';
    out += e.sensor_id;
    out += ' ';
    out += e.value;
    if (e.annotation) {
      out += ' ';
      out += e.annotation->activity;
      out += e.annotation->marker == Marker::begin ? " begin" : " end";
    }
    out += '\n';
  }
  return out;
}

ObservationAlphabet::ObservationAlphabet(
    std::vector<std::pair<std::string, std::string>> symbols)
    : symbols_(std::move(symbols)) {
  std::sort(symbols_.begin(), symbols_.end());
  symbols_.erase(std::unique(symbols_.begin(), symbols_.end()), symbols_.end());
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    index_[symbols_[i]] = static_cast<int>(i);
  }
}

std::optional<int> ObservationAlphabet::index_of(const std::string& sensor_id,
                                                 const std::string& value) const {
  auto it = index_.find({sensor_id, value});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int ObservationAlphabet::index_or_unknown(const std::string& sensor_id,
                                          const std::string& value) const {
  auto it = index_.find({sensor_id, value});
  return it == index_.end() ? unknown_index() : it->second;
}

const std::pair<std::string, std::string>& ObservationAlphabet::symbol_at(int index) const {
  return symbols_.at(static_cast<std::size_t>(index));
}

std::string ObservationAlphabet::symbol_name(int index) const {
  if (index == unknown_index()) return "?";
  const auto& s = symbol_at(index);
  return s.first + "=" + s.second;
}

std::vector<int> ObservationAlphabet::encode(const LabeledStream& stream) const {
  std::vector<int> out;
  out.reserve(stream.events.size());
  for (const SensorEvent& e : stream.events) out.push_back(index_or_unknown(e.sensor_id, e.value));
  return out;
}

ObservationAlphabet build_alphabet(std::span<const LabeledStream> streams) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const LabeledStream& s : streams) {
    for (const SensorEvent& e : s.events) seen.insert({e.sensor_id, e.value});
  }
  if (seen.empty()) raise(Errc::empty_input, "no events to build an alphabet from");
  return ObservationAlphabet(
      std::vector<std::pair<std::string, std::string>>(seen.begin(), seen.end()));
}

ClassRegistry ClassRegistry::from_streams(std::span<const LabeledStream> streams) {
  std::set<std::string> names;
  for (const LabeledStream& s : streams) {
    for (const Episode& ep : s.episodes) names.insert(ep.activity);
  }
  return from_names(std::vector<std::string>(names.begin(), names.end()));
}

ClassRegistry ClassRegistry::from_names(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  names.erase(std::remove(names.begin(), names.end(), std::string(kOtherName)), names.end());
  ClassRegistry reg;
  for (const std::string& n : names) {
    ActivityClass c;
    c.name = n;
    c.id = static_cast<int>(reg.classes_.size());
    reg.by_name_[n] = c.id;
    reg.classes_.push_back(std::move(c));
  }
  ActivityClass other;
  other.name = kOtherName;
  other.id = static_cast<int>(reg.classes_.size());
  other.is_other = true;
  reg.by_name_[other.name] = other.id;
  reg.classes_.push_back(std::move(other));
  return reg;
}

std::optional<int> ClassRegistry::id_of(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int ClassRegistry::id_or_other(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? other_id() : it->second;
}

namespace {

void normalize_or_clear(std::vector<double>& v) {
  double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total <= 0.0) {
    v.clear();
    return;
  }
  for (double& x : v) x /= total;
}

}  // namespace

ActivationReport activation_report(const LabeledStream& stream,
                                   const ObservationAlphabet& alphabet,
                                   const ClassRegistry& registry, int beta) {
  if (beta < 1) raise(Errc::bad_parameter, "beta must be >= 1");
  if (stream.episodes.empty()) raise(Errc::no_episodes, "stream has no annotated episodes");

  std::vector<int> symbols = alphabet.encode(stream);
  std::size_t width = static_cast<std::size_t>(alphabet.symbol_count());
  std::vector<ActivationRow> rows(registry.size());
  for (std::size_t c = 0; c < registry.size(); ++c) {
    rows[c].class_id = static_cast<int>(c);
    rows[c].class_name = registry.at(static_cast<int>(c)).name;
    rows[c].begin_freq.assign(width, 0.0);
    rows[c].body_freq.assign(width, 0.0);
    rows[c].end_freq.assign(width, 0.0);
  }

  for (const Episode& ep : stream.episodes) {
    int cls = registry.id_or_other(ep.activity);
    ActivationRow& row = rows[static_cast<std::size_t>(cls)];
    ++row.episode_count;
    std::size_t len = ep.end_index - ep.begin_index + 1;
    std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(beta), len);
    std::size_t e = std::min<std::size_t>(static_cast<std::size_t>(beta), len - b);
    for (std::size_t k = 0; k < len; ++k) {
      std::size_t idx = ep.begin_index + k;
      auto sym = static_cast<std::size_t>(symbols[idx]);
      if (k < b) {
        row.begin_freq[sym] += 1.0;
      } else if (k >= len - e) {
        row.end_freq[sym] += 1.0;
      } else {
        row.body_freq[sym] += 1.0;
      }
    }
  }

  ActivationReport report;
  for (ActivationRow& row : rows) {
    if (row.episode_count == 0) continue;
    normalize_or_clear(row.begin_freq);
    normalize_or_clear(row.body_freq);
    normalize_or_clear(row.end_freq);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string activation_report_csv(const ActivationReport& report,
                                  const ObservationAlphabet& alphabet) {
  std::ostringstream out;
  out << "class,region,symbol,frequency\n";
  out.precision(17);
  auto emit = [&](const ActivationRow& row, const char* region, const std::vector<double>& freq) {
    for (std::size_t s = 0; s < freq.size(); ++s) {
      if (freq[s] == 0.0) continue;
      out << row.class_name << ',' << region << ',' << alphabet.symbol_name(static_cast<int>(s))
          << ',' << freq[s] << '\n';
    }
  };
  for (const ActivationRow& row : report.rows) {
    emit(row, "begin", row.begin_freq);
    emit(row, "body", row.body_freq);
    emit(row, "end", row.end_freq);
  }
  return out.str();
}

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_line: return "MalformedLine";
    case Errc::unmatched_annotation: return "UnmatchedAnnotation";
    case Errc::nesting_too_deep: return "NestingTooDeep";
    case Errc::non_monotonic_timestamp: return "NonMonotonicTimestamp";
    case Errc::empty_input: return "EmptyInput";
    case Errc::invalid_profile: return "InvalidProfile";
    case Errc::no_episodes: return "NoEpisodes";
    case Errc::symbol_out_of_range: return "SymbolOutOfRange";
    case Errc::degenerate_evidence: return "DegenerateEvidence";
    case Errc::empty_sequence: return "EmptySequence";
    case Errc::empty_training_set: return "EmptyTrainingSet";
    case Errc::insufficient_training: return "InsufficientTraining";
    case Errc::alphabet_mismatch: return "AlphabetMismatch";
    case Errc::empty_trace: return "EmptyTrace";
    case Errc::no_samples: return "NoSamples";
    case Errc::missing_pdf: return "MissingPdf";
    case Errc::empty_stream: return "EmptyStream";
    case Errc::bad_parameter: return "BadParameter";
    case Errc::not_fitted: return "NotFitted";
    case Errc::empty_truth: return "EmptyTruth";
    case Errc::too_few_episodes: return "TooFewEpisodes";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::io_failure: return "IoFailure";
  }
  return "UnknownError";
}

}  // namespace streamhar
