#include "coopvar/errors.hpp"

namespace coopvar {

const char* errc_name(errc c) {
  switch (c) {
    case errc::shift_not_admissible: return "SHIFT_NOT_ADMISSIBLE";
    case errc::region_too_large: return "REGION_TOO_LARGE";
    case errc::iteration_stalled: return "ITERATION_STALLED";
    case errc::not_positive: return "NOT_POSITIVE";
    case errc::bracket_failed: return "BRACKET_FAILED";
    case errc::jacobian_singular: return "JACOBIAN_SINGULAR";
    case errc::max_iters: return "MAX_ITERS";
    case errc::empty_region: return "EMPTY_REGION";
    case errc::bad_argument: return "BAD_ARGUMENT";
    case errc::config_invalid: return "CONFIG_INVALID";
    case errc::schema_mismatch: return "SCHEMA_MISMATCH";
    case errc::io_error: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace coopvar
