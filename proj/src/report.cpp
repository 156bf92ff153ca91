#include "wasn/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include <openssl/evp.h>

#include "wasn/errors.hpp"

namespace wasn {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha1_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha1(), nullptr) !=
      1)
    throw std::runtime_error("sha1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string git_blob_sha1(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob += '\0';
  blob += content;
  return sha1_hex(blob);
}

std::vector<MetricTrace> average_over_trials(
    const std::vector<MetricTrace>& traces) {
  std::vector<std::pair<Algo, std::string>> order;
  std::map<std::pair<int, std::string>,
           std::map<std::pair<double, int>, std::pair<double, long>>>
      acc;
  for (const MetricTrace& tr : traces) {
    const std::pair<int, std::string> key{static_cast<int>(tr.algo),
                                          tr.metric};
    if (!acc.count(key)) order.push_back({tr.algo, tr.metric});
    auto& series = acc[key];
    for (const TracePoint& p : tr.points) {
      auto& [sum, count] = series[{p.index, p.node}];
      sum += p.value;
      ++count;
    }
  }
  std::vector<MetricTrace> out;
  for (const auto& [algo, metric] : order) {
    MetricTrace tr{algo, -1, metric, {}};
    for (const auto& [key, sc] :
         acc[{static_cast<int>(algo), metric}])
      tr.points.push_back(
          {key.first, key.second, sc.first / static_cast<double>(sc.second)});
    out.push_back(std::move(tr));
  }
  return out;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += "\"";
  return out;
}

// Column table keyed by index: one series per (algo, node) pair.
struct PlotTable {
  std::vector<std::string> labels;
  std::map<double, std::vector<double>> rows;
};

PlotTable plot_table(const std::vector<MetricTrace>& averaged,
                     const std::string& metric, bool with_node) {
  PlotTable tab;
  std::vector<std::pair<int, int>> cols;  // (algo, node)
  for (const MetricTrace& tr : averaged) {
    if (tr.metric != metric) continue;
    for (const TracePoint& p : tr.points) {
      const std::pair<int, int> id{static_cast<int>(tr.algo), p.node};
      if (std::find(cols.begin(), cols.end(), id) == cols.end()) {
        cols.push_back(id);
        std::string label = algo_name(tr.algo);
        if (with_node && p.node >= 0) label += ":" + std::to_string(p.node);
        tab.labels.push_back(label);
      }
    }
  }
  if (cols.empty()) throw EmptyTrace("no series for metric '" + metric + "'");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const MetricTrace& tr : averaged) {
    if (tr.metric != metric) continue;
    for (const TracePoint& p : tr.points) {
      const std::pair<int, int> id{static_cast<int>(tr.algo), p.node};
      const size_t col = static_cast<size_t>(
          std::find(cols.begin(), cols.end(), id) - cols.begin());
      auto& row = tab.rows[p.index];
      if (row.empty()) row.assign(cols.size(), nan);
      row[col] = p.value;
    }
  }
  return tab;
}

void emit_plot(std::ostream& out, const PlotTable& tab,
               const std::string& index_name) {
  out << "# " << index_name;
  for (const std::string& label : tab.labels) out << " " << label;
  out << "\n";
  for (const auto& [index, row] : tab.rows) {
    out << format_real(index);
    for (double v : row) out << " " << format_real(v);
    out << "\n";
  }
}

}  // namespace

void emit_plot_mse(std::ostream& out,
                   const std::vector<MetricTrace>& averaged) {
  emit_plot(out, plot_table(averaged, "mse_w", false), "iteration");
}

void emit_plot_ser(std::ostream& out,
                   const std::vector<MetricTrace>& averaged) {
  emit_plot(out, plot_table(averaged, "ser_db", true), "time_s");
}

OutputFiles write_experiment_outputs(const std::string& dir,
                                     const std::string& config_path,
                                     const std::string& config_content,
                                     const ExperimentConfig& cfg,
                                     const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const bool batch = cfg.mode == ExperimentMode::batch_oracle;
  const std::string metric_file = batch ? "mse_w.csv" : "ser.csv";
  const std::string plot_file = batch ? "plot_mse.dat" : "plot_ser.dat";
  std::vector<std::string> names = {metric_file, "failures.csv",
                                    "compression.csv", "complexity.csv"};
  if (!batch) names.push_back("bandwidth.csv");
  names.push_back(plot_file);

  OutputFiles out;
  out.manifest = (fs::path(dir) / "manifest.txt").string();

  // Manifest first, before any result row exists on disk.
  {
    std::ofstream mf(out.manifest, std::ios::trunc);
    if (!mf) throw std::runtime_error("cannot write " + out.manifest);
    mf << "config_path = " << config_path << "\n";
    mf << "config_sha1 = " << git_blob_sha1(config_content) << "\n";
    mf << "seed = " << cfg.seed << "\n";
    mf << "mode = " << (batch ? "batch_oracle" : "online") << "\n";
    mf << "trials = " << cfg.trials << "\n";
    std::string algos;
    for (size_t i = 0; i < cfg.algos.size(); ++i) {
      if (i) algos += " ";
      algos += algo_name(cfg.algos[i]);
    }
    mf << "algos = " << algos << "\n";
    mf << "out_dir = " << dir << "\n";
    for (const std::string& n : names) mf << "file = " << n << "\n";
  }

  const auto open = [&](const std::string& name) {
    std::ofstream f((fs::path(dir) / name).string(), std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + name + " in " + dir);
    out.files.push_back((fs::path(dir) / name).string());
    return f;
  };

  const std::vector<MetricTrace> averaged = average_over_trials(result.traces);

  {
    std::ofstream f = open(metric_file);
    if (batch) {
      f << "trial,algo,iteration,mse_w\n";
      const auto row = [&](const MetricTrace& tr) {
        for (const TracePoint& p : tr.points)
          f << tr.trial << "," << algo_name(tr.algo) << ","
            << static_cast<long>(p.index) << "," << format_real(p.value)
            << "\n";
      };
      for (const MetricTrace& tr : result.traces) row(tr);
      for (const MetricTrace& tr : averaged) row(tr);
    } else {
      f << "trial,algo,time_s,node,ser_db\n";
      const auto row = [&](const MetricTrace& tr) {
        for (const TracePoint& p : tr.points)
          f << tr.trial << "," << algo_name(tr.algo) << ","
            << format_real(p.index) << "," << p.node << ","
            << format_real(p.value) << "\n";
      };
      for (const MetricTrace& tr : result.traces) row(tr);
      for (const MetricTrace& tr : averaged) row(tr);
    }
  }
  {
    std::ofstream f = open("failures.csv");
    f << "trial,algo,reason\n";
    for (const Failure& fl : result.failures)
      f << fl.trial << "," << algo_name(fl.algo) << ","
        << csv_quote(fl.reason) << "\n";
  }
  {
    std::ofstream f = open("compression.csv");
    f << "trial,m_bar,n_est,n_dis,cf_dmwf_formula,cf_dmwf_measured,cf_danse\n";
    for (size_t i = 0; i < result.compression.size(); ++i) {
      const CompressionReport& c = result.compression[i];
      f << i << "," << format_real(c.m_bar) << "," << format_real(c.n_est)
        << "," << format_real(c.n_dis) << ","
        << format_real(c.cf_dmwf_formula) << ","
        << format_real(c.cf_dmwf_measured) << "," << format_real(c.cf_danse)
        << "\n";
    }
  }
  {
    std::ofstream f = open("complexity.csv");
    f << "trial,node,dmwf_cost,danse_cost\n";
    for (size_t i = 0; i < result.complexity.size(); ++i) {
      const ComplexityReport& c = result.complexity[i];
      for (size_t k = 0; k < c.dmwf_cost.size(); ++k)
        f << i << "," << k << "," << format_real(c.dmwf_cost[k]) << ","
          << format_real(c.danse_cost[k]) << "\n";
    }
  }
  if (!batch) {
    std::ofstream f = open("bandwidth.csv");
    f << "trial,frame,est_channels,dis_channels\n";
    for (size_t i = 0; i < result.bandwidth.size(); ++i) {
      const BandwidthLedger& led = result.bandwidth[i];
      for (long t = 0; t < led.frames(); ++t)
        f << i << "," << t << ","
          << led.est_per_frame[static_cast<size_t>(t)] << ","
          << led.dis_per_frame[static_cast<size_t>(t)] << "\n";
    }
  }
  if (!averaged.empty()) {
    std::ofstream f = open(plot_file);
    if (batch) {
      emit_plot_mse(f, averaged);
    } else {
      emit_plot_ser(f, averaged);
    }
  }
  return out;
}

}  // namespace wasn
