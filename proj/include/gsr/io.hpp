#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gsr/prior.hpp"
#include "gsr/signal_gen.hpp"

namespace gsr {

// Doubles are printed with 17 significant digits so every serialization below
// round-trips bit-faithfully.
std::string format_double(double v);

// RFC-4180 CSV writer: header row, comma separators, quoting only when a
// field needs it, newline-terminated records.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void write_row(const std::vector<std::string>& fields);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Graph persistence: whitespace edge list "i j w" plus a coordinate file
// "i x y".  Construction parameters (trace normalization) ride along in a
// comment header of the edge file.
void save_graph(const Graph& g, const std::filesystem::path& edges_path,
                const std::filesystem::path& coords_path);
Graph load_graph(const std::filesystem::path& edges_path,
                 const std::filesystem::path& coords_path);

// Signal sets: one CSV row per signal, columns node_0..node_{N-1}.
void save_signals(const std::vector<Vec>& signals, const std::filesystem::path& path);
std::vector<Vec> load_signals(const std::filesystem::path& path);

// Prior parameters as JSON with full-precision numbers.
void save_prior(const PriorParams& theta, const std::filesystem::path& path);
PriorParams load_prior(const std::filesystem::path& path);

// Sampling masks: one index per line after a "total N" header.
void save_mask(const SamplingMask& mask, const std::filesystem::path& path);
SamplingMask load_mask(const std::filesystem::path& path);

}  // namespace gsr
