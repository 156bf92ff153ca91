#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wasn/config.hpp"
#include "wasn/danse.hpp"
#include "wasn/dmwf.hpp"
#include "wasn/scenario.hpp"

namespace wasn {

enum class Algo {
  input,        // unprocessed reference channels (control)
  centralized,  // network-wide MWF / GEVD-MWF
  local,        // each node filters its own sensors only
  dmwf,
  danse_qd,
  danse_qdk,
  rsdanse_qd,
  rsdanse_qdk,
};

const char* algo_name(Algo a);
std::optional<Algo> algo_from_name(const std::string& name);
bool algo_is_danse(Algo a);

enum class ExperimentMode { batch_oracle, online };

struct OnlineParams {
  double sample_rate = 16000.0;
  int dft_size = 256;
  double duration_s = 12.0;
  double segment_s = 6.0;   // steering redrawn every segment boundary
  double duty_on_s = 0.5;   // speech ON-OFF duty cycle
  double duty_off_s = 0.5;
  bool warm_start = true;
  long ser_window = 48000;     // trailing samples per SER value
  double ser_stride_s = 0.25;  // SER checkpoint spacing
  double steering_blend = 0.2;  // weight of the fresh draw at a boundary
  int danse_fusion_period = 20;  // frames between DANSE fusion updates
  // Forgetting factor for the discovery-step SCM trackers, applied once per
  // discovery event. 0 selects beta^n_ds, which keeps the same memory span
  // in time as the estimation trackers; an explicit value trades adaptation
  // speed against fusion-matrix jitter independently of n_ds.
  double discovery_beta = 0.0;
};

struct ExperimentConfig {
  ScenarioParams scenario;  // per-trial seeds are derived from `seed` below
  ExperimentMode mode = ExperimentMode::batch_oracle;
  std::vector<Algo> algos;
  int trials = 10;
  int iterations = 30;  // batch DANSE iterations
  int n_ds = 8;         // discovery period in frames
  double beta = 0.967;  // SCM forgetting factor
  bool use_gevd = false;
  int gevd_rank = 0;  // 0 means Qd
  bool reduced_probes = false;
  ProbePadding padding = ProbePadding::ones;
  std::uint64_t seed = 1;
  OnlineParams online;

  int resolved_gevd_rank() const {
    return gevd_rank > 0 ? gevd_rank : scenario.num_speech;
  }
  void validate() const;  // throws ConfigError
};

ExperimentConfig experiment_from_config(const ConfigFile& file);
ConfigFile config_from_experiment(const ExperimentConfig& cfg);

// One metric series: batch traces index by iteration, online ones by time in
// seconds. node is -1 for network-level metrics.
struct TracePoint {
  double index = 0;
  int node = -1;
  double value = 0;
};

struct MetricTrace {
  Algo algo = Algo::dmwf;
  int trial = 0;
  std::string metric;
  std::vector<TracePoint> points;
};

// A (trial, algo) pair that hit a numerical failure; such pairs produce no
// trace rows.
struct Failure {
  int trial = 0;
  Algo algo = Algo::dmwf;
  std::string reason;
};

// Per-frame transmitted-channel counts for the dMWF exchange. est counts the
// fused signals every node sends to every other node; dis counts probe
// channels and is nonzero only on discovery frames.
struct BandwidthLedger {
  std::vector<long> est_per_frame;
  std::vector<long> dis_per_frame;
  long discovery_events = 0;

  long frames() const { return static_cast<long>(est_per_frame.size()); }
  long total_est() const;
  long total_dis() const;
};

// Closed-form exchange counts and compression factors, plus the measured
// ledger values when a ledger is supplied (NaN otherwise).
struct CompressionReport {
  double m_bar = 0;  // M (K-1): every node broadcasting raw sensors
  double n_est = 0;  // sum_k sum_{q != k} Qbar_q, per frame
  double n_dis = 0;  // probe channels per discovery event
  double cf_dmwf_formula = 0;   // m_bar / (n_est + n_dis / n_ds)
  double cf_dmwf_measured = 0;
  double cf_danse = 0;  // M / (K Qd)
};

CompressionReport compression_factors(const ScenarioParams& p,
                                      const ObservabilityPattern& obs,
                                      int n_ds, bool reduced_probes,
                                      const BandwidthLedger* ledger = nullptr);

// Per-node quadratic cost terms: dMWF (M_k + sum_{q != k} Qbar_q)^2 against
// DANSE (M_k + (K-1) Qd)^2.
struct ComplexityReport {
  std::vector<double> dmwf_cost;
  std::vector<double> danse_cost;
};

ComplexityReport complexity_report(const ScenarioParams& p,
                                   const ObservabilityPattern& obs);

struct ExperimentResult {
  ExperimentMode mode = ExperimentMode::batch_oracle;
  std::vector<MetricTrace> traces;
  std::vector<Failure> failures;
  // One entry per trial; bandwidth ledgers are filled by online dMWF runs.
  std::vector<BandwidthLedger> bandwidth;
  std::vector<CompressionReport> compression;
  std::vector<ComplexityReport> complexity;
};

// Oracle-SCM batch experiment: per trial, a fresh scenario; dMWF solved once,
// DANSE variants iterated; MSE_W against the centralized reference recorded
// per iteration.
ExperimentResult run_batch_oracle(const ExperimentConfig& cfg);

// Frame-synchronous online experiment in the WOLA domain: VAD-gated SCM
// tracking, periodic discovery, per-frame filter refresh, SER checkpoints.
ExperimentResult run_online(const ExperimentConfig& cfg);

// Dispatch on cfg.mode. Honors the WASN_DMWF_THREADS cap for trial-level
// parallelism; results are merged in trial order regardless.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace wasn
