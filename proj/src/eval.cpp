#include "galaxy/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "galaxy/error.hpp"
#include "galaxy/random.hpp"

namespace galaxy {

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(std::span<const GalaxyClass> labels, std::size_t k, std::uint64_t seed, bool stratified) {
  if (k < 2) throw Error(ErrorKind::invalid_argument, "cross-validation needs at least 2 folds");
  if (k > labels.size()) {
    throw Error(ErrorKind::invalid_argument, "cannot split " + std::to_string(labels.size()) + " items into " +
                                                 std::to_string(k) + " folds");
  }
  FoldPlan plan;
  plan.seed = seed;
  plan.folds = k;
  plan.stratified = stratified;
  plan.fold_of.assign(labels.size(), 0);

  Rng rng(seed);
  std::size_t next_fold = 0;
  auto deal = [&](std::vector<std::size_t>& items) {
    rng.shuffle(items);
    for (std::size_t i : items) {
      plan.fold_of[i] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  };
  if (stratified) {
    for (GalaxyClass c : kAllClasses) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) members.push_back(i);
      }
      deal(members);
    }
  } else {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    deal(all);
  }
  return plan;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return t;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t t = 0;
  for (std::size_t c = 0; c < kClassCount; ++c) t += counts[c][c];
  return t;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t t = total();
  return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

std::size_t ConfusionMatrix::row_sum(GalaxyClass c) const {
  const auto& row = counts[index_of(c)];
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

double ConfusionMatrix::class_accuracy(GalaxyClass c) const {
  const std::size_t n = row_sum(c);
  return n == 0 ? 0.0 : static_cast<double>(counts[index_of(c)][index_of(c)]) / static_cast<double>(n);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t r = 0; r < kClassCount; ++r) {
    for (std::size_t c = 0; c < kClassCount; ++c) counts[r][c] += other.counts[r][c];
  }
  return *this;
}

ConfusionMatrix confusion(std::span<const GalaxyClass> predicted, std::span<const GalaxyClass> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::invalid_argument, "confusion: " + std::to_string(predicted.size()) +
                                                 " predictions for " + std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.counts[index_of(truth[i])][index_of(predicted[i])];
  return m;
}

namespace {

std::uint64_t fold_seed(std::uint64_t run_seed, std::size_t fold) {
  // splitmix64 finalizer keeps per-fold seeds well apart.
  std::uint64_t z = run_seed * 0x9E3779B97F4A7C15ull + fold + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

EvalReport cross_validate(const LabeledDataset& data, const Learner& learner, const CvOptions& options,
                          std::string algorithm_name) {
  data.validate();
  if (options.runs == 0) throw Error(ErrorKind::invalid_argument, "cross-validation needs at least one run");
  EvalReport report;
  report.algorithm = std::move(algorithm_name);
  report.feature_count = data.arity();
  report.with_fdv = std::find(data.feature_names.begin(), data.feature_names.end(), "fdv") != data.feature_names.end();

  for (std::size_t run = 0; run < options.runs; ++run) {
    const std::uint64_t run_seed = options.base_seed + run;
    const FoldPlan plan = make_folds(data.labels, options.folds, run_seed, options.stratified);
    std::vector<GalaxyClass> predicted(data.rows());
    for (std::size_t fold = 0; fold < options.folds; ++fold) {
      const auto test = plan.test_indices(fold);
      if (test.empty()) continue;
      const auto train_rows = plan.train_indices(fold);
      try {
        const TrainedModel model = learner(data.subset(train_rows), fold_seed(run_seed, fold));
        for (std::size_t i : test) predicted[i] = model.predict(data.features[i]);
      } catch (const Error& e) {
        throw Error(e.kind(), report.algorithm + " failed in run " + std::to_string(run) + ", fold " +
                                  std::to_string(fold) + ": " + e.what());
      }
    }
    const ConfusionMatrix m = confusion(predicted, data.labels);
    report.pooled += m;
    report.run_accuracies.push_back(100.0 * m.accuracy());
  }
  report.mean_accuracy = std::accumulate(report.run_accuracies.begin(), report.run_accuracies.end(), 0.0) /
                         static_cast<double>(report.run_accuracies.size());
  for (GalaxyClass c : kAllClasses) report.class_accuracies[index_of(c)] = 100.0 * report.pooled.class_accuracy(c);
  return report;
}

EvalReport cross_validate(const LabeledDataset& data, const AlgorithmConfig& config, const CvOptions& options) {
  const Learner learner = [&config](const LabeledDataset& train_set, std::uint64_t seed) {
    return train(train_set, config, seed);
  };
  return cross_validate(data, learner, options, std::string(to_string(config.algorithm)));
}

std::vector<double> column_means(const std::vector<std::vector<double>>& cells, std::size_t columns) {
  std::vector<double> means(columns, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t c = 0; c < columns; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : cells) {
      if (c < row.size() && !std::isnan(row[c])) {
        sum += row[c];
        ++n;
      }
    }
    if (n > 0) means[c] = sum / static_cast<double>(n);
  }
  return means;
}

AccuracyTable report_tables(std::span<const EvalReport> reports) {
  AccuracyTable table;
  for (const auto& r : reports) {
    if (std::find(table.algorithms.begin(), table.algorithms.end(), r.algorithm) == table.algorithms.end()) {
      table.algorithms.push_back(r.algorithm);
    }
    if (std::find(table.columns.begin(), table.columns.end(), r.features) == table.columns.end()) {
      table.columns.push_back(r.features);
    }
  }
  table.cells.assign(table.algorithms.size(),
                     std::vector<double>(table.columns.size(), std::numeric_limits<double>::quiet_NaN()));
  for (const auto& r : reports) {
    const auto a = std::find(table.algorithms.begin(), table.algorithms.end(), r.algorithm) - table.algorithms.begin();
    const auto c = std::find(table.columns.begin(), table.columns.end(), r.features) - table.columns.begin();
    table.cells[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] = r.mean_accuracy;
  }
  table.column_means = column_means(table.cells, table.columns.size());
  return table;
}

namespace {

std::string shortest(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed2(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(field);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  return '"' + s + '"';
}

}  // namespace

std::string format_table_text(const AccuracyTable& table) {
  std::size_t first = std::string("Algorithm").size();
  for (const auto& a : table.algorithms) first = std::max(first, a.size());
  std::vector<std::size_t> widths;
  for (const auto& c : table.columns) widths.push_back(std::max<std::size_t>(c.size(), 6));

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(first)) << "Algorithm";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    os << "  " << std::right << std::setw(static_cast<int>(widths[c])) << table.columns[c];
  }
  os << '\n';
  auto row = [&](const std::string& name, const std::vector<double>& values) {
    os << std::left << std::setw(static_cast<int>(first)) << name;
    for (std::size_t c = 0; c < values.size(); ++c) {
      os << "  " << std::right << std::setw(static_cast<int>(widths[c])) << fixed2(values[c]);
    }
    os << '\n';
  };
  for (std::size_t a = 0; a < table.algorithms.size(); ++a) row(table.algorithms[a], table.cells[a]);
  row("mean", table.column_means);
  return os.str();
}

std::string format_table_csv(const AccuracyTable& table) {
  std::ostringstream os;
  os << "algorithm";
  for (const auto& c : table.columns) os << ',' << csv_field(c);
  os << '\n';
  for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
    os << csv_field(table.algorithms[a]);
    for (double v : table.cells[a]) os << ',' << shortest(v);
    os << '\n';
  }
  os << "mean";
  for (double v : table.column_means) os << ',' << shortest(v);
  os << '\n';
  return os.str();
}

AccuracyTable parse_table_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  AccuracyTable table;
  if (!std::getline(in, line)) throw Error(ErrorKind::format, "empty accuracy CSV");
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != "algorithm") throw Error(ErrorKind::format, "accuracy CSV header must start with 'algorithm'");
  table.columns.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  bool saw_mean = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::format, "accuracy CSV line " + std::to_string(line_no) + ": wrong field count");
    }
    std::vector<double> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty()) {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (res.ec != std::errc{} || res.ptr != fields[i].data() + fields[i].size()) {
        throw Error(ErrorKind::format, "accuracy CSV line " + std::to_string(line_no) + ": bad number '" + fields[i] + "'");
      }
      values.push_back(v);
    }
    if (fields.front() == "mean") {
      table.column_means = std::move(values);
      saw_mean = true;
    } else {
      table.algorithms.push_back(fields.front());
      table.cells.push_back(std::move(values));
    }
  }
  if (!saw_mean) throw Error(ErrorKind::format, "accuracy CSV has no mean row");
  return table;
}

std::string format_confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream os;
  os << "true\\predicted";
  for (GalaxyClass c : kAllClasses) os << ',' << to_string(c);
  os << ",accuracy\n";
  for (GalaxyClass r : kAllClasses) {
    os << to_string(r);
    for (GalaxyClass c : kAllClasses) os << ',' << m.counts[index_of(r)][index_of(c)];
    os << ',' << std::fixed << std::setprecision(1) << 100.0 * m.class_accuracy(r) << '\n';
    os.unsetf(std::ios::floatfield);
  }
  return os.str();
}

std::string format_confusion_text(const ConfusionMatrix& m, const std::string& title) {
  std::ostringstream os;
  os << title << '\n';
  os << std::left << std::setw(12) << "Galaxy type";
  for (GalaxyClass c : kAllClasses) os << std::right << std::setw(12) << to_string(c);
  os << std::right << std::setw(12) << "Accuracy" << '\n';
  for (GalaxyClass r : kAllClasses) {
    os << std::left << std::setw(12) << to_string(r);
    for (GalaxyClass c : kAllClasses) os << std::right << std::setw(12) << m.counts[index_of(r)][index_of(c)];
    std::ostringstream pct;
    pct << std::fixed << std::setprecision(1) << 100.0 * m.class_accuracy(r) << " %";
    os << std::right << std::setw(12) << pct.str() << '\n';
  }
  return os.str();
}

}  // namespace galaxy
