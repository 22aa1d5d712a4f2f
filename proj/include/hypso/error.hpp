#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace hypso {

enum class Errc {
  invalid_argument,
  empty_input,
  file_not_found,
  unsupported_format,
  decode_error,
  malformed_header,
  dimension_mismatch,
  all_nodata,
  insufficient_palette,
  no_global_move,
  instance_too_large,
  io_error,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::empty_input: return "empty_input";
    case Errc::file_not_found: return "file_not_found";
    case Errc::unsupported_format: return "unsupported_format";
    case Errc::decode_error: return "decode_error";
    case Errc::malformed_header: return "malformed_header";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::all_nodata: return "all_nodata";
    case Errc::insufficient_palette: return "insufficient_palette";
    case Errc::no_global_move: return "no_global_move";
    case Errc::instance_too_large: return "instance_too_large";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (CLI, HTTP service) can map them without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by the pipeline when one of its stages fails; `stage()` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool bad_input)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), bad_input_(bad_input) {}

  const std::string& stage() const noexcept { return stage_; }
  // True when the wrapped failure was caused by the caller's inputs.
  bool bad_input() const noexcept { return bad_input_; }

 private:
  std::string stage_;
  bool bad_input_;
};

namespace detail {

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace detail
}  // namespace hypso
