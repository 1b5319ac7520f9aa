#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace galaxy {

/// The three Hubble types. The enumerator order is the tie-breaking order
/// used by every classifier and report.
enum class GalaxyClass : std::uint8_t { elliptical = 0, spiral = 1, irregular = 2 };

inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<GalaxyClass, kClassCount> kAllClasses = {
    GalaxyClass::elliptical, GalaxyClass::spiral, GalaxyClass::irregular};

constexpr std::size_t index_of(GalaxyClass c) { return static_cast<std::size_t>(c); }

std::string_view to_string(GalaxyClass c);
std::optional<GalaxyClass> parse_class(std::string_view name);

}  // namespace galaxy
