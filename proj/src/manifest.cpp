#include "galaxy/manifest.hpp"

#include <fstream>

#include "galaxy/error.hpp"

namespace galaxy {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorKind::io, manifest.string() + ": cannot open manifest");
  const std::filesystem::path base = manifest.parent_path();
  std::vector<ManifestRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return manifest.string() + ":" + std::to_string(line_no) + ": "; };
    if (!header_seen) {
      if (line != "path,label") throw Error(ErrorKind::format, where() + "expected header 'path,label'");
      header_seen = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw Error(ErrorKind::format, where() + "expected 'path,label'");
    const std::string path = trim(line.substr(0, comma));
    const std::string label = trim(line.substr(comma + 1));
    if (path.empty()) throw Error(ErrorKind::format, where() + "empty path");
    const auto cls = parse_class(label);
    if (!cls) throw Error(ErrorKind::format, where() + "unknown label '" + label + "'");
    std::filesystem::path p(path);
    if (p.is_relative()) p = base / p;
    rows.push_back({p, *cls});
  }
  if (!header_seen) throw Error(ErrorKind::format, manifest.string() + ": empty manifest");
  return rows;
}

void write_manifest(const std::filesystem::path& manifest, const std::vector<std::string>& paths,
                    const std::vector<GalaxyClass>& labels) {
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, manifest.string() + ": cannot open for writing");
  out << "path,label\n";
  for (std::size_t i = 0; i < paths.size(); ++i) out << paths[i] << ',' << to_string(labels[i]) << '\n';
  if (!out) throw Error(ErrorKind::io, manifest.string() + ": write failed");
}

}  // namespace galaxy
