#include "galaxy/error.hpp"
#include "galaxy/types.hpp"

namespace galaxy {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io error";
    case ErrorKind::format: return "format error";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::training_failure: return "training failure";
  }
  return "error";
}

std::string_view to_string(GalaxyClass c) {
  switch (c) {
    case GalaxyClass::elliptical: return "elliptical";
    case GalaxyClass::spiral: return "spiral";
    case GalaxyClass::irregular: return "irregular";
  }
  return "unknown";
}

std::optional<GalaxyClass> parse_class(std::string_view name) {
  for (GalaxyClass c : kAllClasses) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

}  // namespace galaxy
