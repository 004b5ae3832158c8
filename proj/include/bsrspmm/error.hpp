#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsrspmm {

enum class Errc {
  bad_pointer,
  bad_index,
  bad_shape,
  shape_mismatch,
  kind_mismatch,
  bad_lane_count,
  format,
  io,
  no_valid_candidate,
  invalid_argument,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::bad_pointer: return "BadPointer";
    case Errc::bad_index: return "BadIndex";
    case Errc::bad_shape: return "BadShape";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::kind_mismatch: return "KindMismatch";
    case Errc::bad_lane_count: return "BadLaneCount";
    case Errc::format: return "FormatError";
    case Errc::io: return "IoError";
    case Errc::no_valid_candidate: return "NoValidCandidate";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception; code() tells the
// caller which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bsrspmm
