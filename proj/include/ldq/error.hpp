#pragma once

#include <stdexcept>
#include <string>

namespace ldq {

enum class Errc {
  invalid_argument,
  out_of_domain,      // MGF evaluated at or beyond its abscissa
  out_of_range,       // inverse MGF target outside the attainable range
  unstable,           // rho >= 1
  no_delays,          // P(B > A) = 0
  numerical_failure,  // bracket or iteration budget exhausted
  degenerate_tail,
  tilt_unavailable,
  overflow,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::unstable: return "Unstable";
    case Errc::no_delays: return "NoDelays";
    case Errc::numerical_failure: return "NumericalFailure";
    case Errc::degenerate_tail: return "DegenerateTail";
    case Errc::tilt_unavailable: return "TiltUnavailable";
    case Errc::overflow: return "Overflow";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ldq
