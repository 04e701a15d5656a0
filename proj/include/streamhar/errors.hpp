#ifndef STREAMHAR_ERRORS_HPP
#define STREAMHAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace streamhar {

// Every throwing operation in the library raises Error with one of these
// codes. The CLI maps categories to exit codes (config=2, io=3, domain=1).
enum class Errc {
  malformed_line,
  unmatched_annotation,
  nesting_too_deep,
  non_monotonic_timestamp,
  empty_input,
  invalid_profile,
  no_episodes,
  symbol_out_of_range,
  degenerate_evidence,
  empty_sequence,
  empty_training_set,
  insufficient_training,
  alphabet_mismatch,
  empty_trace,
  no_samples,
  missing_pdf,
  empty_stream,
  bad_parameter,
  not_fitted,
  empty_truth,
  too_few_episodes,
  config_invalid,
  io_failure,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace streamhar

#endif  // STREAMHAR_ERRORS_HPP
