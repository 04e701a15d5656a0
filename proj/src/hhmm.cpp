#include "streamhar/hhmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "streamhar/errors.hpp"
#include "streamhar/logspace.hpp"

namespace streamhar {

double SymbolChain::score(std::span<const int> window) const {
  double s = log_init[window[0]];
  for (std::size_t t = 1; t < window.size(); ++t) s += log_tr(window[t - 1], window[t]);
  return s;
}

SymbolChain fit_symbol_chain(const std::vector<std::vector<int>>& windows, int n_symbols,
                             double kappa) {
  if (n_symbols < 1) raise(Errc::bad_parameter, "symbol chain needs a non-empty alphabet");
  if (kappa <= 0.0) raise(Errc::bad_parameter, "smoothing must be positive");
  std::vector<double> init(n_symbols, 0.0);
  std::vector<double> trans(static_cast<std::size_t>(n_symbols) * n_symbols, 0.0);
  for (const auto& w : windows) {
    if (w.empty()) continue;
    init[w[0]] += 1.0;
    for (std::size_t t = 1; t < w.size(); ++t) trans[w[t - 1] * n_symbols + w[t]] += 1.0;
  }
  SymbolChain chain;
  chain.n_symbols = n_symbols;
  chain.log_init.resize(n_symbols);
  chain.log_trans.resize(trans.size());
  double init_total = 0.0;
  for (double v : init) init_total += v;
  for (int i = 0; i < n_symbols; ++i)
    chain.log_init[i] = std::log((init[i] + kappa) / (init_total + kappa * n_symbols));
  for (int i = 0; i < n_symbols; ++i) {
    double row_total = 0.0;
    for (int j = 0; j < n_symbols; ++j) row_total += trans[i * n_symbols + j];
    for (int j = 0; j < n_symbols; ++j)
      chain.log_trans[i * n_symbols + j] =
          std::log((trans[i * n_symbols + j] + kappa) / (row_total + kappa * n_symbols));
  }
  return chain;
}

std::pair<int, double> BeginDetector::best_ratio(std::span<const int> window) const {
  int best = -1;
  double best_score = kNegInf;
  for (std::size_t c = 0; c < class_chains.size(); ++c) {
    if (!has_model[c]) continue;
    double s = class_chains[c].score(window);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(c);
    }
  }
  if (best < 0) return {-1, kNegInf};
  return {best, best_score - background.score(window)};
}

double EndDetector::end_ratio(int class_id, std::span<const int> window) const {
  return end_chains[class_id].score(window) - continuation_chains[class_id].score(window);
}

double EndDetector::continuation_score(int class_id, std::span<const int> window) const {
  return continuation_chains[class_id].score(window);
}

namespace {

void check_block(const ThetaBlock& b, const char* name, double tol) {
  if (b.n < 1 || static_cast<int>(b.pi.size()) != b.n ||
      b.trans.size() != static_cast<std::size_t>(b.n) * (b.n + 1))
    raise(Errc::bad_parameter, std::string(name) + " block has inconsistent shape");
  double pi_sum = 0.0;
  for (double v : b.pi) {
    if (!(v >= 0.0) || !std::isfinite(v))
      raise(Errc::bad_parameter, std::string(name) + " entry distribution has a bad entry");
    pi_sum += v;
  }
  if (std::abs(pi_sum - 1.0) > tol)
    raise(Errc::bad_parameter, std::string(name) + " entry distribution does not sum to 1");
  for (int i = 0; i < b.n; ++i) {
    double row = 0.0;
    for (int j = 0; j <= b.n; ++j) {
      double v = b.at(i, j);
      if (!(v >= 0.0) || !std::isfinite(v))
        raise(Errc::bad_parameter, std::string(name) + " transition row has a bad entry");
      row += v;
    }
    if (std::abs(row - 1.0) > tol)
      raise(Errc::bad_parameter,
            std::string(name) + " transition row (with termination) does not sum to 1");
  }
}

}  // namespace

void validate_theta(const HhmmTheta& theta, double tol) {
  check_block(theta.root, "root", tol);
  check_block(theta.x1, "begin-detector", tol);
  check_block(theta.x2, "ongoing-classifier", tol);
  check_block(theta.x3, "end-detector", tol);
}

namespace {

using Range = std::pair<std::size_t, std::size_t>;  // inclusive

// Event ranges covered by the episode itself, skipping nested children.
std::vector<Range> own_ranges(const Episode& ep, const std::vector<Range>& children) {
  std::vector<Range> runs;
  std::size_t cur = ep.begin_index;
  for (const auto& [cb, ce] : children) {
    if (cb > cur) runs.emplace_back(cur, cb - 1);
    cur = ce + 1;
  }
  if (cur <= ep.end_index) runs.emplace_back(cur, ep.end_index);
  return runs;
}

struct ClassWindows {
  std::vector<std::vector<int>> begin, end, cont;
  std::vector<StateSequence> body;
  int episode_count = 0;
  std::size_t event_count = 0;
};

struct Collected {
  std::vector<ClassWindows> per_class;
  std::vector<std::vector<int>> background;
};

Collected collect_windows(const std::vector<int>& symbols, const std::vector<Episode>& episodes,
                          std::size_t lo, std::size_t hi, const ClassRegistry& classes, int beta) {
  Collected out;
  out.per_class.resize(classes.size());
  const std::size_t b = static_cast<std::size_t>(beta);

  std::vector<std::vector<Range>> children(episodes.size());
  for (std::size_t i = 0; i < episodes.size(); ++i)
    if (episodes[i].parent)
      children[*episodes[i].parent].emplace_back(episodes[i].begin_index, episodes[i].end_index);
  for (auto& c : children) std::sort(c.begin(), c.end());

  std::vector<int> depth(symbols.size(), 0);
  auto window_at = [&symbols](std::size_t s, std::size_t len) {
    return std::vector<int>(symbols.begin() + s, symbols.begin() + s + len);
  };

  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    for (std::size_t p = ep.begin_index; p <= ep.end_index; ++p) depth[p] += 1;
    if (ep.begin_index < lo || ep.end_index >= hi) continue;
    std::size_t span = ep.end_index - ep.begin_index + 1;
    if (span < b + 1) continue;
    auto cid_opt = classes.id_of(ep.activity);
    if (!cid_opt) continue;
    ClassWindows& cw = out.per_class[*cid_opt];
    cw.episode_count += 1;

    const std::size_t suffix_start = ep.end_index - b + 1;
    auto runs = own_ranges(ep, children[i]);
    for (const auto& [a, z] : runs) {
      cw.event_count += z - a + 1;
      if (z + 1 - a >= b) {
        for (std::size_t s = a; s + b - 1 <= z; ++s) {
          if (s == ep.begin_index) continue;
          if (s == suffix_start) continue;
          cw.cont.push_back(window_at(s, b));
        }
      }
      StateSequence body;
      for (std::size_t p = std::max(a, ep.begin_index + b);
           p <= std::min(z, ep.end_index - b); ++p) {
        body.symbols.push_back(symbols[p]);
        body.states.push_back(0);
      }
      if (!body.symbols.empty()) cw.body.push_back(std::move(body));
    }
    if (!runs.empty()) {
      const auto& first = runs.front();
      if (first.first == ep.begin_index && first.second + 1 - first.first >= b)
        cw.begin.push_back(window_at(ep.begin_index, b));
      const auto& last = runs.back();
      if (last.second == ep.end_index && last.second + 1 - std::max(last.first, suffix_start) >= b)
        cw.end.push_back(window_at(suffix_start, b));
    }
  }

  std::size_t s = lo;
  while (s + b <= hi) {
    bool clear = true;
    for (std::size_t p = s; p < s + b; ++p)
      if (depth[p] != 0) {
        clear = false;
        break;
      }
    if (clear) out.background.push_back(window_at(s, b));
    ++s;
  }
  return out;
}

HmmParams uniform_body(int n_symbols) {
  HmmParams p;
  p.n_states = 1;
  p.n_symbols = n_symbols;
  p.log_prior = {0.0};
  p.log_transition = {0.0};
  p.log_emission.assign(n_symbols, -std::log(static_cast<double>(n_symbols)));
  return p;
}

struct CoreFit {
  std::vector<HmmParams> bodies;
  BeginDetector begin;
  EndDetector end;
  std::vector<char> has_model;
};

CoreFit fit_core(const Collected& col, const ClassRegistry& classes, int n_symbols, int beta,
                 double kappa) {
  CoreFit fit;
  const int k = static_cast<int>(classes.size());
  fit.has_model.assign(k, 0);
  fit.begin.beta = beta;
  fit.end.beta = beta;
  fit.begin.class_chains.resize(k);
  fit.end.end_chains.resize(k);
  fit.end.continuation_chains.resize(k);
  fit.bodies.reserve(k);
  for (int c = 0; c < k; ++c) {
    const ClassWindows& cw = col.per_class[c];
    if (classes.at(c).is_other || cw.episode_count == 0) {
      fit.bodies.push_back(uniform_body(n_symbols));
      continue;
    }
    fit.has_model[c] = 1;
    fit.begin.class_chains[c] = fit_symbol_chain(cw.begin, n_symbols, kappa);
    fit.end.end_chains[c] = fit_symbol_chain(cw.end, n_symbols, kappa);
    fit.end.continuation_chains[c] = fit_symbol_chain(cw.cont, n_symbols, kappa);
    std::vector<StateSequence> body = cw.body;
    if (body.empty()) {
      // Episodes too short to leave events between the two detection
      // windows; the windows themselves are the only emission evidence.
      for (const auto* windows : {&cw.begin, &cw.end})
        for (const auto& w : *windows) {
          StateSequence seq;
          seq.symbols = w;
          seq.states.assign(w.size(), 0);
          body.push_back(std::move(seq));
        }
    }
    fit.bodies.push_back(fit_supervised(body, 1, n_symbols, kappa));
  }
  fit.begin.background = fit_symbol_chain(col.background, n_symbols, kappa);
  fit.begin.has_model = fit.has_model;
  fit.end.has_model = fit.has_model;
  return fit;
}

ThetaBlock pooled_symbol_block(const std::vector<std::vector<int>>& windows, int n_symbols,
                               double kappa) {
  std::vector<double> init(n_symbols, 0.0), occupancy(n_symbols, 0.0), terminal(n_symbols, 0.0);
  std::vector<double> trans(static_cast<std::size_t>(n_symbols) * n_symbols, 0.0);
  for (const auto& w : windows) {
    if (w.empty()) continue;
    init[w[0]] += 1.0;
    for (std::size_t t = 0; t < w.size(); ++t) occupancy[w[t]] += 1.0;
    terminal[w.back()] += 1.0;
    for (std::size_t t = 1; t < w.size(); ++t) trans[w[t - 1] * n_symbols + w[t]] += 1.0;
  }
  ThetaBlock block;
  block.n = n_symbols;
  block.pi.resize(n_symbols);
  block.trans.assign(static_cast<std::size_t>(n_symbols) * (n_symbols + 1), 0.0);
  double init_total = 0.0;
  for (double v : init) init_total += v;
  for (int i = 0; i < n_symbols; ++i)
    block.pi[i] = (init[i] + kappa) / (init_total + kappa * n_symbols);
  for (int i = 0; i < n_symbols; ++i) {
    double p_end = (terminal[i] + kappa) / (occupancy[i] + 2.0 * kappa);
    double row_total = 0.0;
    for (int j = 0; j < n_symbols; ++j) row_total += trans[i * n_symbols + j];
    for (int j = 0; j < n_symbols; ++j) {
      double t = (trans[i * n_symbols + j] + kappa) / (row_total + kappa * n_symbols);
      block.trans[i * (n_symbols + 1) + j] = (1.0 - p_end) * t;
    }
    block.trans[i * (n_symbols + 1) + n_symbols] = p_end;
  }
  return block;
}

HhmmTheta assemble_theta(const Collected& col, const ClassRegistry& classes, int n_symbols,
                         double kappa) {
  HhmmTheta theta;
  theta.root.n = 3;
  theta.root.pi = {1.0, 0.0, 0.0};
  theta.root.trans = {0.0, 1.0, 0.0, 0.0,   // begin detection hands off to classification
                      0.0, 0.0, 1.0, 0.0,   // classification hands off to end detection
                      1.0, 0.0, 0.0, 0.0};  // end detection loops back

  std::vector<std::vector<int>> all_begin, all_end;
  for (const auto& cw : col.per_class) {
    all_begin.insert(all_begin.end(), cw.begin.begin(), cw.begin.end());
    all_end.insert(all_end.end(), cw.end.begin(), cw.end.end());
  }
  theta.x1 = pooled_symbol_block(all_begin, n_symbols, kappa);
  theta.x3 = pooled_symbol_block(all_end, n_symbols, kappa);

  const int k = static_cast<int>(classes.size());
  theta.x2.n = k;
  theta.x2.pi.assign(k, 0.0);
  theta.x2.trans.assign(static_cast<std::size_t>(k) * (k + 1), 0.0);
  double total_eps = 0.0;
  for (const auto& cw : col.per_class) total_eps += cw.episode_count;
  for (int c = 0; c < k; ++c) {
    const ClassWindows& cw = col.per_class[c];
    if (total_eps > 0.0) theta.x2.pi[c] = cw.episode_count / total_eps;
    double p_end = cw.event_count > 0
                       ? static_cast<double>(cw.episode_count) / static_cast<double>(cw.event_count)
                       : 0.0;
    theta.x2.trans[c * (k + 1) + c] = 1.0 - p_end;
    theta.x2.trans[c * (k + 1) + k] = p_end;
  }
  if (total_eps == 0.0) theta.x2.pi[0] = 1.0;
  return theta;
}

// Best achievable F1 threshold over pooled candidate cuts; ties prefer the
// larger (more conservative) threshold.
double pick_threshold(std::vector<double> pos, std::vector<double> neg, double fallback) {
  if (pos.empty()) return fallback;
  std::vector<double> all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> cuts;
  cuts.push_back(all.front() - 1.0);
  for (std::size_t i = 1; i < all.size(); ++i) cuts.push_back(0.5 * (all[i - 1] + all[i]));
  cuts.push_back(all.back() + 1.0);
  if (cuts.size() > 2048) {
    std::vector<double> sub;
    double stride = static_cast<double>(cuts.size() - 1) / 2047.0;
    for (int i = 0; i < 2048; ++i) sub.push_back(cuts[static_cast<std::size_t>(i * stride)]);
    cuts = std::move(sub);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  double best_f1 = -1.0, best_tau = fallback;
  for (double tau : cuts) {
    auto tp = pos.end() - std::upper_bound(pos.begin(), pos.end(), tau);
    auto fp = neg.end() - std::upper_bound(neg.begin(), neg.end(), tau);
    auto fn = static_cast<long>(pos.size()) - tp;
    double f1 = (2.0 * tp) / static_cast<double>(2 * tp + fp + fn);
    if (f1 > best_f1 || (f1 == best_f1 && tau > best_tau)) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  return best_tau;
}

struct MarginScores {
  std::vector<double> begin_pos, begin_neg, end_pos, end_neg;
};

MarginScores margin_scores(const CoreFit& fit, const std::vector<int>& symbols,
                           const std::vector<Episode>& episodes, std::size_t lo, std::size_t hi,
                           const ClassRegistry& classes, int beta) {
  MarginScores ms;
  const std::size_t b = static_cast<std::size_t>(beta);
  std::set<std::size_t> positive_starts;
  for (const Episode& ep : episodes) {
    if (ep.begin_index < lo || ep.end_index >= hi) continue;
    if (ep.end_index - ep.begin_index + 1 < b + 1) continue;
    auto cid_opt = classes.id_of(ep.activity);
    if (!cid_opt || !fit.has_model[*cid_opt]) continue;
    int cid = *cid_opt;
    std::span<const int> prefix(symbols.data() + ep.begin_index, b);
    ms.begin_pos.push_back(fit.begin.best_ratio(prefix).second);
    positive_starts.insert(ep.begin_index);
    std::size_t suffix_start = ep.end_index - b + 1;
    std::span<const int> suffix(symbols.data() + suffix_start, b);
    ms.end_pos.push_back(fit.end.end_ratio(cid, suffix));
    for (std::size_t s = ep.begin_index + 1; s < suffix_start; ++s) {
      std::span<const int> w(symbols.data() + s, b);
      ms.end_neg.push_back(fit.end.end_ratio(cid, w));
    }
  }
  for (std::size_t s = lo; s + b <= hi; ++s) {
    if (positive_starts.count(s)) continue;
    std::span<const int> w(symbols.data() + s, b);
    ms.begin_neg.push_back(fit.begin.best_ratio(w).second);
  }
  return ms;
}

constexpr double kFallbackTauBegin = 5.0;
constexpr double kFallbackTauEnd = 1.0;

}  // namespace

HhmmModel fit_model(const LabeledStream& train, const ObservationAlphabet& alphabet,
                    const ClassRegistry& classes, const FitConfig& config) {
  if (config.beta < 2) raise(Errc::bad_parameter, "begin/end window needs at least 2 events");
  if (config.kappa <= 0.0) raise(Errc::bad_parameter, "smoothing must be positive");
  if (config.holdout_fraction <= 0.0 || config.holdout_fraction >= 1.0)
    raise(Errc::bad_parameter, "holdout fraction must be in (0, 1)");
  if (train.episodes.empty())
    raise(Errc::insufficient_training, "training stream has no annotated episodes");

  std::vector<int> symbols;
  symbols.reserve(train.events.size());
  for (const auto& ev : train.events) {
    auto idx = alphabet.index_of(ev.sensor_id, ev.value);
    if (!idx)
      raise(Errc::alphabet_mismatch,
            "training symbol " + ev.sensor_id + "=" + ev.value + " is not in the alphabet");
    symbols.push_back(*idx);
  }
  for (const Episode& ep : train.episodes)
    if (!classes.id_of(ep.activity))
      raise(Errc::alphabet_mismatch, "activity " + ep.activity + " is not in the class registry");

  const int n_symbols = static_cast<int>(alphabet.symbol_count());
  const std::size_t n = symbols.size();

  Collected full = collect_windows(symbols, train.episodes, 0, n, classes, config.beta);
  bool any = false;
  for (std::size_t c = 0; c < full.per_class.size(); ++c)
    if (!classes.at(static_cast<int>(c)).is_other && full.per_class[c].episode_count > 0)
      any = true;
  if (!any)
    raise(Errc::insufficient_training, "no class has a usable training episode");

  CoreFit fit = fit_core(full, classes, n_symbols, config.beta, config.kappa);

  double tau_begin = config.tau_begin.value_or(0.0);
  double tau_end = config.tau_end.value_or(0.0);
  if (!config.tau_begin || !config.tau_end) {
    std::vector<const Episode*> top;
    for (const Episode& ep : train.episodes)
      if (!ep.parent) top.push_back(&ep);
    std::sort(top.begin(), top.end(),
              [](const Episode* a, const Episode* b) { return a->begin_index < b->begin_index; });

    MarginScores ms;
    bool tuned = false;
    if (top.size() >= 5) {
      std::size_t hold = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(config.holdout_fraction * top.size())));
      std::size_t split = top[top.size() - hold]->begin_index;
      Collected head = collect_windows(symbols, train.episodes, 0, split, classes, config.beta);
      bool head_any = false;
      for (std::size_t c = 0; c < head.per_class.size(); ++c)
        if (!classes.at(static_cast<int>(c)).is_other && head.per_class[c].episode_count > 0)
          head_any = true;
      if (head_any) {
        CoreFit head_fit = fit_core(head, classes, n_symbols, config.beta, config.kappa);
        ms = margin_scores(head_fit, symbols, train.episodes, split, n, classes, config.beta);
        tuned = true;
      }
    }
    if (!tuned) ms = margin_scores(fit, symbols, train.episodes, 0, n, classes, config.beta);
    if (!config.tau_begin)
      tau_begin = pick_threshold(ms.begin_pos, ms.begin_neg, kFallbackTauBegin);
    if (!config.tau_end) tau_end = pick_threshold(ms.end_pos, ms.end_neg, kFallbackTauEnd);
  }

  HhmmModel model;
  model.alphabet = alphabet;
  model.classes = classes;
  model.beta = config.beta;
  model.kappa = config.kappa;
  model.bodies = std::move(fit.bodies);
  model.begin = std::move(fit.begin);
  model.end = std::move(fit.end);
  model.begin.tau = tau_begin;
  model.end.tau = tau_end;
  model.has_model = model.begin.has_model;
  model.theta = assemble_theta(full, classes, n_symbols, config.kappa);
  for (int c = 0; c < model.n_classes(); ++c)
    if (!classes.at(c).is_other && !model.has_model[c])
      model.dropped_classes.push_back(classes.at(c).name);
  validate_theta(model.theta);
  return model;
}

double Segment::duration_s() const {
  double d = static_cast<double>(end_ts - begin_ts) / kMicrosPerSecond;
  return d > 0.0 ? d : 1e-6;
}

double Segment::time_of_day_s() const { return seconds_since_midnight(begin_ts); }

namespace {

std::vector<int> buffer_symbols(const std::deque<BufferedEvent>& buf) {
  std::vector<int> w;
  w.reserve(buf.size());
  for (const auto& e : buf) w.push_back(e.symbol);
  return w;
}

std::vector<FilterState> init_filters(const HhmmModel& model, const std::vector<int>& window) {
  std::vector<FilterState> filters(model.n_classes());
  for (int c = 0; c < model.n_classes(); ++c) {
    if (!model.has_model[c]) continue;
    filters[c] = filter_init(model.bodies[c], window[0]);
    for (std::size_t t = 1; t < window.size(); ++t)
      filters[c] = filter_step(model.bodies[c], filters[c], window[t]);
  }
  return filters;
}

int fill_lls(const HhmmModel& model, const std::vector<FilterState>& filters,
             std::vector<double>& lls) {
  lls.assign(model.n_classes(), kNegInf);
  int best = -1;
  for (int c = 0; c < model.n_classes(); ++c) {
    if (!model.has_model[c]) continue;
    lls[c] = filters[c].log_evidence;
    if (best < 0 || lls[c] > lls[best]) best = c;
  }
  return best;
}

Segment finalize_segment(const HhmmModel& model, TrackContext&& ctx, std::size_t end_index,
                         TimeMicros end_ts, bool truncated) {
  Segment seg;
  seg.begin_index = ctx.begin_index;
  seg.begin_ts = ctx.begin_ts;
  seg.end_index = end_index;
  seg.end_ts = end_ts;
  seg.truncated = truncated;
  seg.parent_begin = ctx.parent_begin;
  if (!ctx.trace.empty()) {
    // A detected end means the last beta events are the end signature, which
    // is not body evidence; the label comes from the row just before it.
    std::size_t lookback = truncated ? 0 : static_cast<std::size_t>(model.beta);
    std::size_t pos = ctx.trace.size() > lookback ? ctx.trace.size() - 1 - lookback : 0;
    seg.raw_label = ctx.trace[pos].argmax;
  } else {
    std::vector<double> lls;
    seg.raw_label = fill_lls(model, ctx.filters, lls);
  }
  seg.trace = std::move(ctx.trace);
  return seg;
}

EngineOutput make_output(OutputKind kind, std::size_t index, TimeMicros ts) {
  EngineOutput o;
  o.kind = kind;
  o.event_index = index;
  o.timestamp = ts;
  return o;
}

}  // namespace

std::vector<EngineOutput> step(const HhmmModel& model, EngineState& state,
                               const SensorEvent& event) {
  if (event.timestamp < state.last_ts)
    raise(Errc::non_monotonic_timestamp,
          "event at " + format_timestamp(event.timestamp) + " precedes " +
              format_timestamp(state.last_ts));
  state.last_ts = event.timestamp;
  const std::size_t idx = state.next_index++;
  const int sym = model.alphabet.index_or_unknown(event.sensor_id, event.value);
  state.buffer.push_back(BufferedEvent{idx, event.timestamp, sym});
  if (state.buffer.size() > static_cast<std::size_t>(model.beta)) state.buffer.pop_front();

  std::vector<EngineOutput> out;
  const std::vector<int> window = buffer_symbols(state.buffer);

  if (state.mode == EngineState::Mode::idle) {
    if (static_cast<int>(window.size()) < model.beta) return out;
    auto [c, ratio] = model.begin.best_ratio(window);
    if (c >= 0 && ratio > model.begin.tau) {
      out.push_back(make_output(OutputKind::begin, idx, event.timestamp));
      TrackContext ctx;
      ctx.begin_index = state.buffer.front().index;
      ctx.begin_ts = state.buffer.front().ts;
      ctx.filters = init_filters(model, window);
      state.active = std::move(ctx);
      state.mode = EngineState::Mode::tracking;
    }
    return out;
  }

  TrackContext& ctx = *state.active;
  ctx.snapshots.push_back(ctx.filters);
  if (ctx.snapshots.size() > static_cast<std::size_t>(model.beta)) ctx.snapshots.pop_front();
  for (int c = 0; c < model.n_classes(); ++c)
    if (model.has_model[c]) ctx.filters[c] = filter_step(model.bodies[c], ctx.filters[c], sym);

  std::vector<double> lls;
  const int argmax = fill_lls(model, ctx.filters, lls);
  ctx.trace.push_back(TraceRow{idx, lls, argmax});
  EngineOutput est = make_output(OutputKind::ongoing, idx, event.timestamp);
  est.estimate = OngoingEstimate{idx, event.timestamp, argmax, std::move(lls)};
  out.push_back(std::move(est));

  const bool window_clear = state.buffer.front().index >= ctx.guard_index;
  if (window_clear && model.end.end_ratio(argmax, window) > model.end.tau) {
    Segment seg =
        finalize_segment(model, std::move(*state.active), idx, event.timestamp, false);
    state.active.reset();
    EngineOutput done = make_output(OutputKind::segment, idx, event.timestamp);
    done.segment = std::move(seg);
    out.push_back(std::move(done));
    if (state.suspended) {
      state.active = std::move(state.suspended);
      state.suspended.reset();
      state.active->guard_index = idx + 1;
      EngineOutput res = make_output(OutputKind::resume, idx, event.timestamp);
      res.resumed_begin = state.active->begin_index;
      out.push_back(std::move(res));
    } else {
      state.mode = EngineState::Mode::idle;
    }
    return out;
  }

  if (window_clear && !state.suspended) {
    // The tracked class is the argmax from before the candidate window
    // entered the filters; the instantaneous argmax may already belong to
    // the interrupter.
    int tracked = argmax;
    if (ctx.trace.size() > static_cast<std::size_t>(model.beta))
      tracked = ctx.trace[ctx.trace.size() - 1 - static_cast<std::size_t>(model.beta)].argmax;
    int best = -1;
    double best_score = kNegInf;
    for (int c = 0; c < model.n_classes(); ++c) {
      if (!model.has_model[c] || c == tracked) continue;
      double s = model.begin.class_chains[c].score(window);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    if (best >= 0 && best_score - model.begin.background.score(window) > model.begin.tau &&
        best_score > model.end.continuation_score(tracked, window)) {
      out.push_back(make_output(OutputKind::interrupt_begin, idx, event.timestamp));
      TrackContext nested;
      nested.begin_index = state.buffer.front().index;
      nested.begin_ts = state.buffer.front().ts;
      nested.filters = init_filters(model, window);
      nested.parent_begin = ctx.begin_index;
      // The window's events belong to the interrupter: the host keeps
      // neither their filter evidence nor their trace rows.
      ctx.filters = ctx.snapshots.front();
      ctx.trace.resize(ctx.trace.size() -
                       std::min(ctx.trace.size(), static_cast<std::size_t>(model.beta)));
      ctx.snapshots.clear();
      state.suspended = std::move(state.active);
      state.active = std::move(nested);
    }
  }
  return out;
}

std::vector<EngineOutput> finish(const HhmmModel& model, EngineState& state) {
  std::vector<EngineOutput> out;
  if (state.mode != EngineState::Mode::tracking) return out;
  const std::size_t idx = state.next_index - 1;
  const TimeMicros ts = state.last_ts;

  Segment seg = finalize_segment(model, std::move(*state.active), idx, ts, true);
  state.active.reset();
  EngineOutput done = make_output(OutputKind::segment, idx, ts);
  done.segment = std::move(seg);
  out.push_back(std::move(done));

  if (state.suspended) {
    EngineOutput res = make_output(OutputKind::resume, idx, ts);
    res.resumed_begin = state.suspended->begin_index;
    out.push_back(std::move(res));
    Segment host = finalize_segment(model, std::move(*state.suspended), idx, ts, true);
    state.suspended.reset();
    EngineOutput hdone = make_output(OutputKind::segment, idx, ts);
    hdone.segment = std::move(host);
    out.push_back(std::move(hdone));
  }
  state.mode = EngineState::Mode::idle;
  return out;
}

RunResult run_stream(const HhmmModel& model, std::span<const SensorEvent> events) {
  RunResult result;
  EngineState state;
  for (const SensorEvent& ev : events) {
    auto outs = step(model, state, ev);
    for (auto& o : outs) result.outputs.push_back(std::move(o));
  }
  auto tail = finish(model, state);
  for (auto& o : tail) result.outputs.push_back(std::move(o));
  for (const auto& o : result.outputs) {
    if (o.kind == OutputKind::ongoing) result.estimates.push_back(*o.estimate);
    if (o.kind == OutputKind::segment) result.segments.push_back(*o.segment);
  }
  return result;
}

std::string likelihood_trace(const HhmmModel& model, const Segment& segment) {
  if (segment.trace.empty())
    raise(Errc::empty_trace, "segment has no tracked events to tabulate");
  std::ostringstream os;
  os << "event_index";
  for (int c = 0; c < model.n_classes(); ++c) os << ',' << model.classes.at(c).name;
  os << ",argmax\n";
  char buf[64];
  for (const TraceRow& row : segment.trace) {
    os << row.event_index;
    for (double v : row.log_likelihoods) {
      if (v == kNegInf) {
        os << ",-inf";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
      }
    }
    os << ',' << model.classes.at(row.argmax).name << '\n';
  }
  return os.str();
}

double begin_detection_accuracy(std::span<const Segment> segments,
                                const std::vector<Episode>& truth, int beta) {
  struct Cand {
    std::size_t dist, t, s;
  };
  std::vector<Cand> cands;
  for (std::size_t t = 0; t < truth.size(); ++t)
    for (std::size_t s = 0; s < segments.size(); ++s) {
      std::size_t a = truth[t].begin_index, b = segments[s].begin_index;
      std::size_t dist = a > b ? a - b : b - a;
      if (dist <= static_cast<std::size_t>(beta)) cands.push_back({dist, t, s});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return std::tie(x.dist, x.t, x.s) < std::tie(y.dist, y.t, y.s);
  });
  std::vector<char> t_used(truth.size(), 0), s_used(segments.size(), 0);
  std::size_t tp = 0;
  for (const Cand& c : cands) {
    if (t_used[c.t] || s_used[c.s]) continue;
    t_used[c.t] = 1;
    s_used[c.s] = 1;
    ++tp;
  }
  std::size_t denom = truth.size() + segments.size() - tp;
  if (denom == 0) return 1.0;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

std::vector<BetaSweepRow> sweep_beta(const LabeledStream& train, const LabeledStream& test,
                                     const ObservationAlphabet& alphabet,
                                     const ClassRegistry& classes,
                                     std::span<const int> candidates, const FitConfig& base) {
  if (candidates.empty()) raise(Errc::bad_parameter, "sweep needs at least one candidate");
  std::vector<BetaSweepRow> rows;
  for (int beta : candidates) {
    FitConfig cfg = base;
    cfg.beta = beta;
    HhmmModel model = fit_model(train, alphabet, classes, cfg);
    RunResult run = run_stream(model, test.events);
    rows.push_back({beta, begin_detection_accuracy(run.segments, test.episodes, beta)});
  }
  return rows;
}

std::string beta_sweep_csv(const std::string& dataset, std::span<const BetaSweepRow> rows) {
  std::ostringstream os;
  if (!dataset.empty()) os << "dataset";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 || !dataset.empty()) os << ',';
    os << "beta_" << rows[i].beta;
  }
  os << '\n';
  if (!dataset.empty()) os << dataset;
  char buf[64];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 || !dataset.empty()) os << ',';
    std::snprintf(buf, sizeof buf, "%.6g", rows[i].begin_accuracy);
    os << buf;
  }
  os << '\n';
  return os.str();
}

}  // namespace streamhar
