#include "streamhar/hmm.hpp"

#include <algorithm>
#include <cmath>

namespace streamhar {

namespace {

void check_symbol(const HmmParams& params, int y) {
  if (y < 0 || y >= params.n_symbols) {
    raise(Errc::symbol_out_of_range,
          "symbol " + std::to_string(y) + " outside alphabet of size " +
              std::to_string(params.n_symbols));
  }
}

void check_row(std::span<const double> row, double tol, const char* what) {
  double total = 0.0;
  for (double lp : row) {
    if (std::isnan(lp)) raise(Errc::bad_parameter, std::string(what) + " contains NaN");
    if (lp > 1e-12) raise(Errc::bad_parameter, std::string(what) + " has log-prob > 0");
    total += std::exp(lp);
  }
  if (std::abs(total - 1.0) > tol) {
    raise(Errc::bad_parameter,
          std::string(what) + " sums to " + std::to_string(total) + ", expected 1");
  }
}

}  // namespace

void HmmParams::validate(double tol) const {
  if (n_states < 1 || n_symbols < 1) raise(Errc::bad_parameter, "empty model");
  if (log_prior.size() != static_cast<std::size_t>(n_states) ||
      log_transition.size() != static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_states) ||
      log_emission.size() != static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_symbols)) {
    raise(Errc::bad_parameter, "parameter table shape mismatch");
  }
  check_row(log_prior, tol, "prior");
  for (int i = 0; i < n_states; ++i) {
    check_row(std::span<const double>(log_transition)
                  .subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(n_states),
                           static_cast<std::size_t>(n_states)),
              tol, "transition row");
    check_row(std::span<const double>(log_emission)
                  .subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(n_symbols),
                           static_cast<std::size_t>(n_symbols)),
              tol, "emission row");
  }
}

FilterState filter_init(const HmmParams& params, int y1) {
  check_symbol(params, y1);
  FilterState state;
  state.log_posterior.resize(static_cast<std::size_t>(params.n_states));
  for (int k = 0; k < params.n_states; ++k) {
    state.log_posterior[static_cast<std::size_t>(k)] =
        params.log_prior[static_cast<std::size_t>(k)] + params.emit(k, y1);
  }
  double z = log_normalize(state.log_posterior);
  if (z == kNegInf) {
    raise(Errc::degenerate_evidence, "first observation has zero mass in every state");
  }
  state.log_evidence = z;
  state.t = 1;
  return state;
}

FilterState filter_step(const HmmParams& params, const FilterState& state, int y) {
  check_symbol(params, y);
  if (state.t < 1 || state.log_posterior.size() != static_cast<std::size_t>(params.n_states)) {
    raise(Errc::bad_parameter, "filter state not initialized for this model");
  }
  FilterState next;
  next.log_posterior.resize(static_cast<std::size_t>(params.n_states));
  std::vector<double> acc(static_cast<std::size_t>(params.n_states));
  for (int j = 0; j < params.n_states; ++j) {
    for (int i = 0; i < params.n_states; ++i) {
      acc[static_cast<std::size_t>(i)] =
          state.log_posterior[static_cast<std::size_t>(i)] + params.trans(i, j);
    }
    next.log_posterior[static_cast<std::size_t>(j)] = params.emit(j, y) + log_sum_exp(acc);
  }
  double z = log_normalize(next.log_posterior);
  if (z == kNegInf) {
    raise(Errc::degenerate_evidence,
          "observation " + std::to_string(y) + " has zero predictive mass at t=" +
              std::to_string(state.t + 1));
  }
  next.log_evidence = state.log_evidence + z;
  next.t = state.t + 1;
  return next;
}

double sequence_log_likelihood(const HmmParams& params, std::span<const int> ys) {
  if (ys.empty()) raise(Errc::empty_sequence, "cannot score an empty sequence");
  for (int y : ys) check_symbol(params, y);
  // Same recursion as the filter, but a zero-mass step yields -inf instead
  // of throwing.
  std::vector<double> post(static_cast<std::size_t>(params.n_states));
  for (int k = 0; k < params.n_states; ++k) {
    post[static_cast<std::size_t>(k)] =
        params.log_prior[static_cast<std::size_t>(k)] + params.emit(k, ys[0]);
  }
  double evidence = log_normalize(post);
  if (evidence == kNegInf) return kNegInf;
  std::vector<double> acc(static_cast<std::size_t>(params.n_states));
  std::vector<double> next(static_cast<std::size_t>(params.n_states));
  for (std::size_t t = 1; t < ys.size(); ++t) {
    for (int j = 0; j < params.n_states; ++j) {
      for (int i = 0; i < params.n_states; ++i) {
        acc[static_cast<std::size_t>(i)] = post[static_cast<std::size_t>(i)] + params.trans(i, j);
      }
      next[static_cast<std::size_t>(j)] = params.emit(j, ys[t]) + log_sum_exp(acc);
    }
    post = next;
    double z = log_normalize(post);
    if (z == kNegInf) return kNegInf;
    evidence += z;
  }
  return evidence;
}

std::vector<int> viterbi(const HmmParams& params, std::span<const int> ys) {
  if (ys.empty()) raise(Errc::empty_sequence, "cannot decode an empty sequence");
  for (int y : ys) check_symbol(params, y);
  const std::size_t T = ys.size();
  const int K = params.n_states;
  std::vector<double> delta(static_cast<std::size_t>(K));
  std::vector<int> backptr(T * static_cast<std::size_t>(K), 0);
  for (int k = 0; k < K; ++k) {
    delta[static_cast<std::size_t>(k)] =
        params.log_prior[static_cast<std::size_t>(k)] + params.emit(k, ys[0]);
  }
  std::vector<double> next(static_cast<std::size_t>(K));
  for (std::size_t t = 1; t < T; ++t) {
    for (int j = 0; j < K; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < K; ++i) {
        double cand = delta[static_cast<std::size_t>(i)] + params.trans(i, j);
        if (cand > best) {  // strict: ties keep the lower index
          best = cand;
          arg = i;
        }
      }
      next[static_cast<std::size_t>(j)] = best + params.emit(j, ys[t]);
      backptr[t * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)] = arg;
    }
    delta = next;
  }
  int last = 0;
  double best = delta[0];
  for (int k = 1; k < K; ++k) {
    if (delta[static_cast<std::size_t>(k)] > best) {
      best = delta[static_cast<std::size_t>(k)];
      last = k;
    }
  }
  std::vector<int> path(T);
  path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) {
    path[t - 1] = backptr[t * static_cast<std::size_t>(K) + static_cast<std::size_t>(path[t])];
  }
  return path;
}

HmmParams fit_supervised(std::span<const StateSequence> sequences, int n_states,
                         int n_symbols, double smoothing) {
  if (sequences.empty()) raise(Errc::empty_training_set, "no training sequences");
  if (smoothing <= 0.0) raise(Errc::bad_parameter, "smoothing must be > 0");
  if (n_states < 1 || n_symbols < 1) raise(Errc::bad_parameter, "empty state or symbol space");

  std::vector<double> init(static_cast<std::size_t>(n_states), smoothing);
  std::vector<double> trans(static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_states),
                            smoothing);
  std::vector<double> emit(static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_symbols),
                           smoothing);
  for (const StateSequence& seq : sequences) {
    if (seq.states.empty()) raise(Errc::empty_training_set, "empty labeled sequence");
    if (seq.states.size() != seq.symbols.size()) {
      raise(Errc::bad_parameter, "state/symbol length mismatch");
    }
    for (std::size_t t = 0; t < seq.states.size(); ++t) {
      int s = seq.states[t];
      int y = seq.symbols[t];
      if (s < 0 || s >= n_states) raise(Errc::bad_parameter, "state label out of range");
      if (y < 0 || y >= n_symbols) raise(Errc::symbol_out_of_range, "training symbol out of range");
      emit[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_symbols) +
           static_cast<std::size_t>(y)] += 1.0;
      if (t == 0) {
        init[static_cast<std::size_t>(s)] += 1.0;
      } else {
        trans[static_cast<std::size_t>(seq.states[t - 1]) * static_cast<std::size_t>(n_states) +
              static_cast<std::size_t>(s)] += 1.0;
      }
    }
  }

  auto to_log_rows = [](std::vector<double>& table, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < cols; ++c) total += table[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        table[r * cols + c] = std::log(table[r * cols + c] / total);
      }
    }
  };
  HmmParams p;
  p.n_states = n_states;
  p.n_symbols = n_symbols;
  to_log_rows(init, 1, static_cast<std::size_t>(n_states));
  to_log_rows(trans, static_cast<std::size_t>(n_states), static_cast<std::size_t>(n_states));
  to_log_rows(emit, static_cast<std::size_t>(n_states), static_cast<std::size_t>(n_symbols));
  p.log_prior = std::move(init);
  p.log_transition = std::move(trans);
  p.log_emission = std::move(emit);
  return p;
}

StateSequence sample_sequence(const HmmParams& params, std::size_t length,
                              std::mt19937_64& rng) {
  if (length == 0) raise(Errc::empty_sequence, "cannot sample zero events");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](std::span<const double> log_row) {
    double r = u(rng);
    double acc = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < log_row.size(); ++i) {
      double p = std::exp(log_row[i]);
      if (p > 0.0) last = static_cast<int>(i);
      acc += p;
      if (r < acc) return static_cast<int>(i);
    }
    return last;
  };
  StateSequence out;
  out.states.resize(length);
  out.symbols.resize(length);
  int state = draw(params.log_prior);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) {
      state = draw(std::span<const double>(params.log_transition)
                       .subspan(static_cast<std::size_t>(state) *
                                    static_cast<std::size_t>(params.n_states),
                                static_cast<std::size_t>(params.n_states)));
    }
    out.states[t] = state;
    out.symbols[t] = draw(std::span<const double>(params.log_emission)
                              .subspan(static_cast<std::size_t>(state) *
                                           static_cast<std::size_t>(params.n_symbols),
                                       static_cast<std::size_t>(params.n_symbols)));
  }
  return out;
}

}  // namespace streamhar
