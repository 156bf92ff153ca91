#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wasn/netsim.hpp"

namespace wasn {

// Shortest-exact decimal form (%.17g); the same double always yields the
// same bytes, which is what the determinism contract rides on.
std::string format_real(double v);

std::string sha1_hex(const std::string& bytes);

// Hash of a file's content the way git stores blobs:
// sha1("blob <size>\0" + content).
std::string git_blob_sha1(const std::string& content);

// Trial-averaged traces (trial == -1): per (algo, metric, node, index) the
// mean over the trials that produced the point. Failed (trial, algo) pairs
// contribute nothing.
std::vector<MetricTrace> average_over_trials(
    const std::vector<MetricTrace>& traces);

// gnuplot-compatible whitespace tables built from averaged traces: first a
// `#` header naming the columns, then one row per index. Values are printed
// with format_real, so they match the CSV bytes exactly. Throws EmptyTrace
// when no matching series exists.
void emit_plot_mse(std::ostream& out, const std::vector<MetricTrace>& averaged);
void emit_plot_ser(std::ostream& out, const std::vector<MetricTrace>& averaged);

struct OutputFiles {
  std::string manifest;
  std::vector<std::string> files;
};

// Writes the run manifest (before any result row), the per-metric CSVs, the
// failure log, bandwidth/compression/complexity tables and the plot data
// under `dir`, creating it if needed. Returns the written paths.
OutputFiles write_experiment_outputs(const std::string& dir,
                                     const std::string& config_path,
                                     const std::string& config_content,
                                     const ExperimentConfig& cfg,
                                     const ExperimentResult& result);

}  // namespace wasn
