#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "galaxy/types.hpp"

namespace galaxy {

struct ManifestRow {
  std::filesystem::path path;  // resolved against the manifest's directory when relative
  GalaxyClass label = GalaxyClass::elliptical;
};

/// Parses a `path,label` CSV. Errors carry the manifest path and line number.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest);

/// Writes `path,label` rows; paths are written as given.
void write_manifest(const std::filesystem::path& manifest, const std::vector<std::string>& paths,
                    const std::vector<GalaxyClass>& labels);

}  // namespace galaxy
