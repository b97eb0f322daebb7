#pragma once

#include <stdexcept>
#include <string>

namespace coopvar {

enum class errc {
  shift_not_admissible,
  region_too_large,
  iteration_stalled,
  not_positive,
  bracket_failed,
  jacobian_singular,
  max_iters,
  empty_region,
  bad_argument,
  config_invalid,
  schema_mismatch,
  io_error,
};

const char* errc_name(errc c);

/// Runtime failure carrying a machine-checkable code next to the message.
class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace coopvar
