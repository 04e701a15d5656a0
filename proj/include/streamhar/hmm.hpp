#ifndef STREAMHAR_HMM_HPP
#define STREAMHAR_HMM_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "streamhar/errors.hpp"
#include "streamhar/logspace.hpp"

namespace streamhar {

// Discrete-observation HMM, all tables stored as log-probabilities.
// Rows exponentiate and sum to 1; entries are finite or -inf, never NaN.
struct HmmParams {
  int n_states = 0;
  int n_symbols = 0;
  std::vector<double> log_prior;       // n_states
  std::vector<double> log_transition;  // n_states x n_states, row = from-state
  std::vector<double> log_emission;    // n_states x n_symbols

  double trans(int i, int j) const {
    return log_transition[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_states) +
                          static_cast<std::size_t>(j)];
  }
  double emit(int i, int y) const {
    return log_emission[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_symbols) +
                        static_cast<std::size_t>(y)];
  }

  // Checks shape and row normalization (tolerance in linear space).
  void validate(double tol = 1e-9) const;
};

// Filtered posterior after t observations plus the running log evidence
// log P(y_1..y_t).
struct FilterState {
  std::vector<double> log_posterior;
  double log_evidence = 0.0;
  std::size_t t = 0;
};

FilterState filter_init(const HmmParams& params, int y1);
FilterState filter_step(const HmmParams& params, const FilterState& state, int y);

// Final log evidence of filtering the whole sequence; -inf when some
// observation has zero mass under the predictive distribution.
double sequence_log_likelihood(const HmmParams& params, std::span<const int> ys);

// Max-product decode, ties broken toward the lower state index.
std::vector<int> viterbi(const HmmParams& params, std::span<const int> ys);

struct StateSequence {
  std::vector<int> states;
  std::vector<int> symbols;
};

// Add-kappa smoothed relative frequencies of initial states, transitions
// and emissions over fully labeled sequences.
HmmParams fit_supervised(std::span<const StateSequence> sequences, int n_states,
                         int n_symbols, double smoothing);

// Draws a state/symbol pair sequence from the model.
StateSequence sample_sequence(const HmmParams& params, std::size_t length,
                              std::mt19937_64& rng);

}  // namespace streamhar

#endif  // STREAMHAR_HMM_HPP
