#include "galaxy/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "galaxy/error.hpp"
#include "galaxy/eval.hpp"
#include "galaxy/experiment.hpp"
#include "galaxy/fractal.hpp"
#include "galaxy/manifest.hpp"
#include "galaxy/pca.hpp"
#include "galaxy/raster.hpp"
#include "galaxy/standardize.hpp"
#include "galaxy/synth.hpp"

namespace fs = std::filesystem;

namespace galaxy {

namespace {

// Bad flag values found after CLI11 parsing; reported with the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& s, const char* flag, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    try {
      out.push_back(parse(item));
    } catch (const std::exception& e) {
      throw UsageError(std::string(flag) + ": " + e.what());
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size() || v < 0) throw std::invalid_argument("bad count '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, path.string() + ": cannot open for writing");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw Error(ErrorKind::io, path.string() + ": write failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, dir.string() + ": output directory does not exist");
}

GrayImage load_named(const fs::path& path) { return load_image(path); }

std::vector<GrayImage> load_all(const std::vector<ManifestRow>& rows) {
  std::vector<GrayImage> images;
  images.reserve(rows.size());
  for (const auto& row : rows) images.push_back(load_named(row.path));
  return images;
}

std::vector<GalaxyClass> labels_of(const std::vector<ManifestRow>& rows) {
  std::vector<GalaxyClass> labels;
  for (const auto& row : rows) labels.push_back(row.label);
  return labels;
}

std::vector<std::string> names_of(const std::vector<ManifestRow>& rows) {
  std::vector<std::string> names;
  for (const auto& row : rows) names.push_back(row.path.string());
  return names;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string counts = "17,104,10";
  std::uint64_t seed = 42;
  std::size_t size = 256;
  std::string out;
};

void run_synth(const SynthArgs& a, std::ostream& log) {
  const auto counts = parse_list<std::size_t>(a.counts, "--counts", parse_count);
  if (counts.size() != kClassCount) throw UsageError("--counts: expected elliptical,spiral,irregular");
  const fs::path dir(a.out);
  require_directory(dir);
  const SynthDataset set = generate_dataset({counts[0], counts[1], counts[2]}, a.seed, a.size);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    std::ostringstream name;
    name << "galaxy_" << std::setw(3) << std::setfill('0') << i << ".pgm";
    save_image(set.images[i], dir / name.str());
    names.push_back(name.str());
  }
  write_manifest(dir / "manifest.csv", names, set.labels);
  log << "wrote " << set.images.size() << " images and " << (dir / "manifest.csv").string() << '\n';
}

// --- standardize -----------------------------------------------------------

struct StandardizeArgs {
  std::string in;
  std::string out;
};

void run_standardize(const StandardizeArgs& a, std::ostream& log) {
  const fs::path in(a.in);
  const fs::path dir(a.out);
  require_directory(dir);
  if (fs::is_directory(in)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in)) {
      const auto ext = entry.path().extension().string();
      if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        save_image(standardize(load_named(f)), dir / f.filename().replace_extension(".pgm"));
      } catch (const Error& e) {
        throw Error(e.kind(), f.string() + ": " + e.what());
      }
    }
    log << "standardized " << files.size() << " images\n";
    return;
  }
  const auto rows = read_manifest(in);
  std::vector<std::string> names;
  for (const auto& row : rows) {
    const std::string name = row.path.filename().replace_extension(".pgm").string();
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw Error(ErrorKind::invalid_argument, row.path.string() + ": output name collides with an earlier row");
    }
    try {
      save_image(standardize(load_named(row.path)), dir / name);
    } catch (const Error& e) {
      throw Error(e.kind(), row.path.string() + ": " + e.what());
    }
    names.push_back(name);
  }
  write_manifest(dir / "manifest.csv", names, labels_of(rows));
  log << "standardized " << rows.size() << " images\n";
}

// --- fd --------------------------------------------------------------------

struct FdArgs {
  std::string in;
  std::string mode = "gray";
  std::string q_grid = "-2,-1,0,1,2";
  std::string out;
  bool plus_one = false;
  bool corner_average = false;
};

void run_fd(const FdArgs& a, std::ostream& log) {
  BoxMode mode;
  if (a.mode == "gray") mode = BoxMode::gray_differential;
  else if (a.mode == "binary") mode = BoxMode::binary_occupancy;
  else throw UsageError("--mode: expected gray or binary");
  auto q = parse_list<double>(a.q_grid, "--q-grid", parse_double);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  BoxOptions options;
  options.gray_plus_one = a.plus_one;
  options.corner_average = a.corner_average;

  const auto rows = read_manifest(a.in);
  std::ostringstream csv;
  csv << std::setprecision(10) << "path,label,q,dq,r2\n";
  for (const auto& row : rows) {
    try {
      const FractalSpectrum s = spectrum(load_named(row.path), q, mode, nullptr, options);
      for (std::size_t i = 0; i < s.q_values.size(); ++i) {
        csv << row.path.string() << ',' << to_string(row.label) << ',' << s.q_values[i] << ','
            << s.dimensions[i] << ',' << s.fit_r2[i] << '\n';
      }
    } catch (const Error& e) {
      throw Error(e.kind(), row.path.string() + ": " + e.what());
    }
  }
  write_text(a.out, csv.str());
  log << "wrote spectra for " << rows.size() << " images to " << a.out << '\n';
}

// --- pca -------------------------------------------------------------------

struct PcaArgs {
  std::string manifest;
  std::string model;
  std::string cumvar;
  std::string out;
  double variance = 0.0;
  std::size_t components = 0;
};

std::vector<std::vector<double>> pixel_vectors(const std::vector<ManifestRow>& rows) {
  std::vector<std::vector<double>> vectors;
  std::size_t width = 0, height = 0;
  for (const auto& row : rows) {
    const GrayImage img = load_named(row.path);
    if (vectors.empty()) {
      width = img.width();
      height = img.height();
    } else if (img.width() != width || img.height() != height) {
      throw Error(ErrorKind::invalid_argument, row.path.string() + ": size differs from the first image (" +
                                                   std::to_string(width) + "x" + std::to_string(height) + ")");
    }
    vectors.push_back(pixel_vector(img));
  }
  return vectors;
}

void run_pca_fit(const PcaArgs& a, std::ostream& log) {
  const auto rows = read_manifest(a.manifest);
  const PcaModel model = fit_pca(pixel_vectors(rows));
  write_text(a.model, pca_to_json(model));
  if (!a.cumvar.empty()) {
    auto out = open_output(a.cumvar);
    write_cumvar_csv(out, model);
  }
  log << "fitted " << model.component_count() << " components";
  if (a.variance > 0.0) log << "; " << select_components(model, a.variance) << " reach variance " << a.variance;
  log << '\n';
}

void run_pca_project(const PcaArgs& a, std::ostream& log) {
  if ((a.variance > 0.0) == (a.components > 0)) throw UsageError("pca project: give exactly one of --variance or --components");
  const PcaModel model = pca_from_json(read_text(a.model));
  const std::size_t n = a.components > 0 ? a.components : select_components(model, a.variance);
  const auto rows = read_manifest(a.manifest);
  const auto vectors = pixel_vectors(rows);
  std::ostringstream csv;
  csv << std::setprecision(17) << "path,label";
  for (std::size_t i = 0; i < n; ++i) csv << ",pc" << (i + 1);
  csv << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    csv << rows[r].path.string() << ',' << to_string(rows[r].label);
    for (double v : project(model, vectors[r], n)) csv << ',' << v;
    csv << '\n';
  }
  write_text(a.out, csv.str());
  log << "projected " << rows.size() << " images onto " << n << " components\n";
}

// --- experiment ------------------------------------------------------------

struct ExperimentArgs {
  std::string manifest;
  std::string features = "pcs,pcs+fdv";
  std::string algos = "c45,knn,rf,svm";
  std::string images = "standardized";
  std::size_t folds = 10;
  std::size_t runs = 5;
  std::uint64_t seed = 42;
  double variance = 0.8;
  std::size_t components = 0;
  bool unstratified = false;
  std::string out;
};

std::string file_tag(const std::string& label) {
  std::string tag;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c))) tag += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (!tag.empty() && tag.back() != '_') tag += '_';
  }
  while (!tag.empty() && tag.back() == '_') tag.pop_back();
  return tag;
}

void run_experiment_cmd(const ExperimentArgs& a, std::ostream& log) {
  ExperimentConfig config;
  config.features = parse_list<FeatureKind>(a.features, "--features", parse_feature_kind);
  config.algorithms = parse_list<Algorithm>(a.algos, "--algos", [](const std::string& s) { return parse_algorithm(s); });
  ImageRegime regime;
  if (a.images == "standardized") regime = ImageRegime::standardized;
  else if (a.images == "original") regime = ImageRegime::original;
  else throw UsageError("--images: expected standardized or original");
  if (a.components > 0) config.components = a.components;
  if (!(a.variance > 0.0 && a.variance <= 1.0)) throw UsageError("--variance: expected a fraction in (0, 1]");
  config.variance_target = a.variance;
  config.cv.folds = a.folds;
  config.cv.runs = a.runs;
  config.cv.base_seed = a.seed;
  config.cv.stratified = !a.unstratified;

  const fs::path dir(a.out);
  require_directory(dir);
  const auto rows = read_manifest(a.manifest);
  const PreparedImages prepared = prepare_images(load_all(rows), regime, names_of(rows));
  const auto labels = labels_of(rows);
  const ExperimentResult result = run_experiment(prepared, labels, config);

  write_text(dir / "accuracy.txt", format_table_text(result.table));
  write_text(dir / "accuracy.csv", format_table_csv(result.table));

  std::ostringstream runs_csv;
  runs_csv << std::setprecision(17) << "algorithm,features,run,accuracy\n";
  std::ostringstream confusion_txt;
  for (const auto& r : result.reports) {
    for (std::size_t i = 0; i < r.run_accuracies.size(); ++i) {
      runs_csv << r.algorithm << ',' << r.features << ',' << i << ',' << r.run_accuracies[i] << '\n';
    }
    write_text(dir / ("confusion_" + r.algorithm + "_" + file_tag(r.features) + ".csv"), format_confusion_csv(r.pooled));
    confusion_txt << format_confusion_text(r.pooled, r.algorithm + ", " + r.features) << '\n';
  }
  write_text(dir / "runs.csv", runs_csv.str());
  write_text(dir / "confusion.txt", confusion_txt.str());

  std::ostringstream fdv_csv;
  fdv_csv << std::setprecision(10) << "path,label,fdv\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    fdv_csv << rows[i].path.string() << ',' << to_string(rows[i].label) << ',' << prepared.fdv[i] << '\n';
  }
  write_text(dir / "fdv.csv", fdv_csv.str());
  auto cumvar = open_output(dir / "cumvar.csv");
  write_cumvar_csv(cumvar, prepared.pca);

  log << format_table_text(result.table);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Galaxy morphology pipeline: standardization, fractal features, PCA and cross-validated classifiers",
               "galaxy"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a deterministic synthetic galaxy set");
  synth_cmd->add_option("--counts", synth_args.counts, "elliptical,spiral,irregular counts")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "base seed")->capture_default_str();
  synth_cmd->add_option("--size", synth_args.size, "image side length")->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "output directory")->required();

  StandardizeArgs std_args;
  auto* std_cmd = app.add_subcommand("standardize", "Rotate, crop and stretch images to 128x128");
  std_cmd->add_option("--in", std_args.in, "input directory or manifest")->required();
  std_cmd->add_option("--out", std_args.out, "output directory")->required();

  FdArgs fd_args;
  auto* fd_cmd = app.add_subcommand("fd", "Generalized box-counting dimensions per image");
  fd_cmd->add_option("--in", fd_args.in, "manifest")->required();
  fd_cmd->add_option("--mode", fd_args.mode, "gray or binary")->capture_default_str();
  fd_cmd->add_option("--q-grid", fd_args.q_grid, "comma-separated Q values")->capture_default_str();
  fd_cmd->add_option("--out", fd_args.out, "output CSV")->required();
  fd_cmd->add_flag("--plus-one", fd_args.plus_one, "gray mass = max - min + 1");
  fd_cmd->add_flag("--corner-average", fd_args.corner_average, "average over four grid anchors");

  PcaArgs pca_args;
  auto* pca_cmd = app.add_subcommand("pca", "Fit or apply a PCA model");
  pca_cmd->require_subcommand(1);
  auto* pca_fit = pca_cmd->add_subcommand("fit", "Fit PCA to manifest images");
  pca_fit->add_option("--manifest", pca_args.manifest, "manifest")->required();
  pca_fit->add_option("--model", pca_args.model, "output model JSON")->required();
  pca_fit->add_option("--cumvar", pca_args.cumvar, "optional cumulative variance CSV");
  pca_fit->add_option("--variance", pca_args.variance, "report the PC count reaching this fraction");
  auto* pca_project = pca_cmd->add_subcommand("project", "Project manifest images onto a fitted model");
  pca_project->add_option("--manifest", pca_args.manifest, "manifest")->required();
  pca_project->add_option("--model", pca_args.model, "model JSON")->required();
  pca_project->add_option("--variance", pca_args.variance, "variance fraction selecting the PC count");
  pca_project->add_option("--components", pca_args.components, "explicit PC count");
  pca_project->add_option("--out", pca_args.out, "output CSV")->required();

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "Cross-validated classification experiment");
  exp_cmd->add_option("--manifest", exp_args.manifest, "manifest")->required();
  exp_cmd->add_option("--features", exp_args.features, "pcs,pcs+fdv,fdv,1pc,1pc+fdv")->capture_default_str();
  exp_cmd->add_option("--algos", exp_args.algos, "c45,knn,rf,svm,majority")->capture_default_str();
  exp_cmd->add_option("--images", exp_args.images, "standardized or original")->capture_default_str();
  exp_cmd->add_option("--folds", exp_args.folds, "folds per run")->capture_default_str();
  exp_cmd->add_option("--runs", exp_args.runs, "cross-validation runs")->capture_default_str();
  exp_cmd->add_option("--seed", exp_args.seed, "base seed (run r uses seed + r)")->capture_default_str();
  exp_cmd->add_option("--variance", exp_args.variance, "variance fraction selecting the PC count")->capture_default_str();
  exp_cmd->add_option("--components", exp_args.components, "explicit PC count (overrides --variance)");
  exp_cmd->add_flag("--unstratified", exp_args.unstratified, "plain random folds");
  exp_cmd->add_option("--out", exp_args.out, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "galaxy: " << e.what() << '\n';
    return kExitUsage;
  }

  std::string stage = "galaxy";
  try {
    if (*synth_cmd) { stage = "synth"; run_synth(synth_args, out); }
    else if (*std_cmd) { stage = "standardize"; run_standardize(std_args, out); }
    else if (*fd_cmd) { stage = "fd"; run_fd(fd_args, out); }
    else if (*pca_fit) { stage = "pca fit"; run_pca_fit(pca_args, out); }
    else if (*pca_project) { stage = "pca project"; run_pca_project(pca_args, out); }
    else if (*exp_cmd) { stage = "experiment"; run_experiment_cmd(exp_args, out); }
  } catch (const UsageError& e) {
    err << "galaxy " << stage << ": usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "galaxy " << stage << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "galaxy " << stage << ": " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace galaxy
