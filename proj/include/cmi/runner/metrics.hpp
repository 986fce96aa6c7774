#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmi/runner/config.hpp"

namespace cmi::runner {

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double mi_estimate = 0.0;
  double anneal_percent = 100.0;
};

struct ProbeRecord {
  std::size_t epoch = 0;
  double knn_acc = 0.0;
  double logistic_acc = 0.0;
};

/// One (config, seed) run. Probe accuracies are NaN when the experiment
/// has no labels (paired Gaussian runs).
struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string sweep_key;
  std::string sweep_value;
  std::vector<StepRecord> steps;
  std::vector<ProbeRecord> probes;
  double final_mi = 0.0;
  double knn_acc = std::nan("");
  double logistic_acc = std::nan("");
  double wall_seconds = 0.0;
};

inline constexpr const char* kStepsHeader = "config_hash,seed,step,loss,mi_estimate,anneal_percent";
inline constexpr const char* kSummaryHeader = "config_hash,seed,final_mi,knn_acc,logistic_acc,wall_seconds";
inline constexpr const char* kSweepHeader = "config_hash,seed,sweep_key,sweep_value";
inline constexpr const char* kProbesHeader = "config_hash,seed,epoch,knn_acc,logistic_acc";

/// Shortest round-trip decimal; "nan" / "inf" / "-inf" for non-finite values.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

inline std::string step_row(const std::string& hash, std::uint64_t seed, const StepRecord& s) {
  return hash + "," + std::to_string(seed) + "," + std::to_string(s.step) + "," + csv_number(s.loss) + "," +
         csv_number(s.mi_estimate) + "," + csv_number(s.anneal_percent);
}

inline std::string summary_row(const RunRecord& r) {
  return r.config_hash + "," + std::to_string(r.seed) + "," + csv_number(r.final_mi) + "," + csv_number(r.knn_acc) +
         "," + csv_number(r.logistic_acc) + "," + csv_number(r.wall_seconds);
}

inline std::string probe_row(const std::string& hash, std::uint64_t seed, const ProbeRecord& p) {
  return hash + "," + std::to_string(seed) + "," + std::to_string(p.epoch) + "," + csv_number(p.knn_acc) + "," +
         csv_number(p.logistic_acc);
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path, bool append = false) {
  std::ofstream out(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir.string() + "': " + ec.message());
}

inline void check_stream(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Writes steps.csv and summary.csv for finished records (header rows
/// always present, LF line endings).
inline void emit_metrics(const std::vector<RunRecord>& records, const std::filesystem::path& dir) {
  detail::ensure_dir(dir);
  const auto steps_path = dir / "steps.csv";
  const auto summary_path = dir / "summary.csv";
  {
    auto out = detail::open_for_write(steps_path);
    out << kStepsHeader << '\n';
    for (const RunRecord& r : records)
      for (const StepRecord& s : r.steps) out << step_row(r.config_hash, r.seed, s) << '\n';
    detail::check_stream(out, steps_path);
  }
  {
    auto out = detail::open_for_write(summary_path);
    out << kSummaryHeader << '\n';
    for (const RunRecord& r : records) out << summary_row(r) << '\n';
    detail::check_stream(out, summary_path);
  }
}

/// Incremental writer used while runs execute: step and probe rows are
/// appended and flushed as they arrive, so an interrupted run leaves
/// parseable files. Thread-safe.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    detail::ensure_dir(dir_);
    steps_ = detail::open_for_write(dir_ / "steps.csv");
    steps_ << kStepsHeader << '\n' << std::flush;
    probes_ = detail::open_for_write(dir_ / "probes.csv");
    probes_ << kProbesHeader << '\n' << std::flush;
    write_summary({});
    auto sweep = detail::open_for_write(dir_ / "sweep.csv");
    sweep << kSweepHeader << '\n';
  }

  const std::filesystem::path& dir() const { return dir_; }

  void write_config(const ExperimentConfig& c) {
    std::lock_guard lock(mu_);
    auto out = detail::open_for_write(dir_ / "config.txt");
    out << serialize(c);
    detail::check_stream(out, dir_ / "config.txt");
  }

  void step(const std::string& hash, std::uint64_t seed, const StepRecord& s) {
    std::lock_guard lock(mu_);
    steps_ << step_row(hash, seed, s) << '\n' << std::flush;
    detail::check_stream(steps_, dir_ / "steps.csv");
  }

  void probe(const std::string& hash, std::uint64_t seed, const ProbeRecord& p) {
    std::lock_guard lock(mu_);
    probes_ << probe_row(hash, seed, p) << '\n' << std::flush;
    detail::check_stream(probes_, dir_ / "probes.csv");
  }

  void sweep_arm(const std::string& hash, std::uint64_t seed, const std::string& key, const std::string& value) {
    std::lock_guard lock(mu_);
    auto out = detail::open_for_write(dir_ / "sweep.csv", true);
    out << hash << ',' << seed << ',' << key << ',' << value << '\n';
    detail::check_stream(out, dir_ / "sweep.csv");
  }

  void error(const std::string& hash, std::uint64_t seed, std::size_t step, const std::string& message) {
    std::lock_guard lock(mu_);
    const auto path = dir_ / "errors.csv";
    const bool fresh = !std::filesystem::exists(path);
    auto out = detail::open_for_write(path, true);
    if (fresh) out << "config_hash,seed,step,message\n";
    std::string clean = message;
    for (char& ch : clean)
      if (ch == ',' || ch == '\n' || ch == '\r') ch = ' ';
    out << hash << ',' << seed << ',' << step << ',' << clean << '\n';
  }

  /// Rewrites summary.csv with the given rows (callers pass completed runs
  /// in run order, so the final file does not depend on scheduling).
  void write_summary(const std::vector<const RunRecord*>& rows) {
    std::lock_guard lock(mu_);
    const auto path = dir_ / "summary.csv";
    const auto tmp = dir_ / "summary.csv.tmp";
    {
      auto out = detail::open_for_write(tmp);
      out << kSummaryHeader << '\n';
      for (const RunRecord* r : rows) out << summary_row(*r) << '\n';
      detail::check_stream(out, tmp);
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::filesystem::path dir_;
  std::ofstream steps_;
  std::ofstream probes_;
  std::mutex mu_;
};

/// Minimal CSV reader for the files above (no quoting is ever emitted).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::out_of_range("CSV has no column '" + name + "'");
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline double parse_csv_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return parse_double("csv", s);
}

}  // namespace cmi::runner
