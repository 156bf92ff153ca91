#include "wasn/netsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

#include "wasn/filters.hpp"
#include "wasn/metrics.hpp"
#include "wasn/scm.hpp"
#include "wasn/wola.hpp"

namespace wasn {

namespace {

constexpr std::pair<Algo, const char*> kAlgoNames[] = {
    {Algo::input, "input"},
    {Algo::centralized, "centralized"},
    {Algo::local, "local"},
    {Algo::dmwf, "dmwf"},
    {Algo::danse_qd, "danse_qd"},
    {Algo::danse_qdk, "danse_qdk"},
    {Algo::rsdanse_qd, "rsdanse_qd"},
    {Algo::rsdanse_qdk, "rsdanse_qdk"},
};

std::string real_str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += " ";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

const char* algo_name(Algo a) {
  for (const auto& [algo, name] : kAlgoNames)
    if (algo == a) return name;
  return "unknown";
}

std::optional<Algo> algo_from_name(const std::string& name) {
  for (const auto& [algo, n] : kAlgoNames)
    if (name == n) return algo;
  return std::nullopt;
}

bool algo_is_danse(Algo a) {
  return a == Algo::danse_qd || a == Algo::danse_qdk ||
         a == Algo::rsdanse_qd || a == Algo::rsdanse_qdk;
}

void ExperimentConfig::validate() const {
  try {
    scenario.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (algos.empty()) throw ConfigError("no algorithms requested");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (n_ds < 1) throw ConfigError("n_ds must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must be in (0,1)");
  if (gevd_rank < 0) throw ConfigError("gevd_rank must be >= 0");
  if (mode == ExperimentMode::online) {
    const OnlineParams& o = online;
    if (o.sample_rate <= 0) throw ConfigError("sample_rate must be positive");
    if (o.dft_size < 4 || (o.dft_size & (o.dft_size - 1)) != 0)
      throw ConfigError("dft_size must be a power of two >= 4");
    if (o.duration_s <= 0) throw ConfigError("duration_s must be positive");
    if (o.segment_s <= 0) throw ConfigError("segment_s must be positive");
    if (o.duty_on_s <= 0) throw ConfigError("duty_on_s must be positive");
    if (o.duty_off_s < 0) throw ConfigError("duty_off_s must be >= 0");
    if (o.ser_window < 1) throw ConfigError("ser_window must be >= 1");
    if (o.ser_stride_s <= 0) throw ConfigError("ser_stride_s must be positive");
    if (!(o.steering_blend > 0.0 && o.steering_blend <= 1.0))
      throw ConfigError("steering_blend must be in (0,1]");
    if (o.danse_fusion_period < 1)
      throw ConfigError("danse_fusion_period must be >= 1");
    if (o.discovery_beta < 0.0 || o.discovery_beta >= 1.0)
      throw ConfigError("discovery_beta must be 0 (auto) or in (0,1)");
    const long samples = std::lround(o.duration_s * o.sample_rate);
    if (samples < o.ser_window + o.dft_size)
      throw ConfigError("duration too short for one SER window");
  }
}

ExperimentConfig experiment_from_config(const ConfigFile& f) {
  ExperimentConfig cfg;
  ScenarioParams& sp = cfg.scenario;

  sp.num_nodes = static_cast<int>(f.get_int("scenario.nodes", sp.num_nodes));
  if (f.has("scenario.sensors")) {
    const auto list = f.get_int_list("scenario.sensors");
    sp.sensors_per_node.clear();
    if (list.size() == 1) {
      sp.sensors_per_node.assign(static_cast<size_t>(sp.num_nodes),
                                 static_cast<int>(list[0]));
    } else {
      for (long long v : list)
        sp.sensors_per_node.push_back(static_cast<int>(v));
    }
  } else if (sp.sensors_per_node.empty()) {
    sp.sensors_per_node.assign(static_cast<size_t>(sp.num_nodes), 5);
  }
  sp.num_speech =
      static_cast<int>(f.get_int("scenario.speech_sources", sp.num_speech));
  sp.num_noise =
      static_cast<int>(f.get_int("scenario.noise_sources", sp.num_noise));
  sp.desired_channels = static_cast<int>(
      f.get_int("scenario.desired_channels", sp.desired_channels));
  sp.speech_power = f.get_real("scenario.speech_power", sp.speech_power);
  sp.noise_power = f.get_real("scenario.noise_power", sp.noise_power);
  sp.selfnoise_power =
      f.get_real("scenario.selfnoise_power", sp.selfnoise_power);
  const std::string om = f.get_string("scenario.observability", "fods");
  if (om == "fods") {
    sp.mode = ObservabilityMode::fods;
  } else if (om == "pos") {
    sp.mode = ObservabilityMode::pos;
  } else {
    throw ConfigError("scenario.observability: unknown mode '" + om + "'");
  }

  const std::string mode = f.get_string("experiment.mode", "batch_oracle");
  if (mode == "batch_oracle") {
    cfg.mode = ExperimentMode::batch_oracle;
  } else if (mode == "online") {
    cfg.mode = ExperimentMode::online;
  } else {
    throw ConfigError("experiment.mode: unknown mode '" + mode + "'");
  }
  for (const std::string& name : f.get_name_list("experiment.algos")) {
    const auto a = algo_from_name(name);
    if (!a) throw ConfigError("experiment.algos: unknown algorithm '" + name + "'");
    cfg.algos.push_back(*a);
  }
  cfg.trials = static_cast<int>(f.get_int("experiment.trials", cfg.trials));
  cfg.iterations =
      static_cast<int>(f.get_int("experiment.iterations", cfg.iterations));
  cfg.n_ds = static_cast<int>(f.get_int("experiment.n_ds", cfg.n_ds));
  cfg.beta = f.get_real("experiment.beta", cfg.beta);
  cfg.use_gevd = f.get_bool("experiment.use_gevd", cfg.use_gevd);
  cfg.gevd_rank =
      static_cast<int>(f.get_int("experiment.gevd_rank", cfg.gevd_rank));
  cfg.reduced_probes =
      f.get_bool("experiment.reduced_probes", cfg.reduced_probes);
  const std::string pad = f.get_string("experiment.padding", "ones");
  if (pad == "zeros") {
    cfg.padding = ProbePadding::zeros;
  } else if (pad == "ones") {
    cfg.padding = ProbePadding::ones;
  } else if (pad == "random") {
    cfg.padding = ProbePadding::random;
  } else {
    throw ConfigError("experiment.padding: unknown padding '" + pad + "'");
  }
  cfg.seed = static_cast<std::uint64_t>(
      f.get_int("experiment.seed", static_cast<long long>(cfg.seed)));

  OnlineParams& o = cfg.online;
  o.sample_rate = f.get_real("online.sample_rate", o.sample_rate);
  o.dft_size = static_cast<int>(f.get_int("online.dft_size", o.dft_size));
  o.duration_s = f.get_real("online.duration_s", o.duration_s);
  o.segment_s = f.get_real("online.segment_s", o.segment_s);
  o.duty_on_s = f.get_real("online.duty_on_s", o.duty_on_s);
  o.duty_off_s = f.get_real("online.duty_off_s", o.duty_off_s);
  o.warm_start = f.get_bool("online.warm_start", o.warm_start);
  o.ser_window = f.get_int("online.ser_window", o.ser_window);
  o.ser_stride_s = f.get_real("online.ser_stride_s", o.ser_stride_s);
  o.steering_blend = f.get_real("online.steering_blend", o.steering_blend);
  o.danse_fusion_period = static_cast<int>(
      f.get_int("online.danse_fusion_period", o.danse_fusion_period));
  o.discovery_beta = f.get_real("online.discovery_beta", o.discovery_beta);

  cfg.validate();
  return cfg;
}

ConfigFile config_from_experiment(const ExperimentConfig& cfg) {
  ConfigFile f;
  const ScenarioParams& sp = cfg.scenario;
  f.set("scenario.nodes", std::to_string(sp.num_nodes));
  f.set("scenario.sensors", join_ints(sp.sensors_per_node));
  f.set("scenario.speech_sources", std::to_string(sp.num_speech));
  f.set("scenario.noise_sources", std::to_string(sp.num_noise));
  f.set("scenario.desired_channels", std::to_string(sp.desired_channels));
  f.set("scenario.speech_power", real_str(sp.speech_power));
  f.set("scenario.noise_power", real_str(sp.noise_power));
  f.set("scenario.selfnoise_power", real_str(sp.selfnoise_power));
  f.set("scenario.observability",
        sp.mode == ObservabilityMode::fods ? "fods" : "pos");

  f.set("experiment.mode", cfg.mode == ExperimentMode::batch_oracle
                               ? "batch_oracle"
                               : "online");
  std::string algos;
  for (size_t i = 0; i < cfg.algos.size(); ++i) {
    if (i) algos += " ";
    algos += algo_name(cfg.algos[i]);
  }
  f.set("experiment.algos", algos);
  f.set("experiment.trials", std::to_string(cfg.trials));
  f.set("experiment.iterations", std::to_string(cfg.iterations));
  f.set("experiment.n_ds", std::to_string(cfg.n_ds));
  f.set("experiment.beta", real_str(cfg.beta));
  f.set("experiment.use_gevd", cfg.use_gevd ? "true" : "false");
  f.set("experiment.gevd_rank", std::to_string(cfg.gevd_rank));
  f.set("experiment.reduced_probes", cfg.reduced_probes ? "true" : "false");
  f.set("experiment.padding", cfg.padding == ProbePadding::zeros  ? "zeros"
                              : cfg.padding == ProbePadding::ones ? "ones"
                                                                  : "random");
  f.set("experiment.seed", std::to_string(cfg.seed));

  const OnlineParams& o = cfg.online;
  f.set("online.sample_rate", real_str(o.sample_rate));
  f.set("online.dft_size", std::to_string(o.dft_size));
  f.set("online.duration_s", real_str(o.duration_s));
  f.set("online.segment_s", real_str(o.segment_s));
  f.set("online.duty_on_s", real_str(o.duty_on_s));
  f.set("online.duty_off_s", real_str(o.duty_off_s));
  f.set("online.warm_start", o.warm_start ? "true" : "false");
  f.set("online.ser_window", std::to_string(o.ser_window));
  f.set("online.ser_stride_s", real_str(o.ser_stride_s));
  f.set("online.steering_blend", real_str(o.steering_blend));
  f.set("online.danse_fusion_period", std::to_string(o.danse_fusion_period));
  f.set("online.discovery_beta", real_str(o.discovery_beta));
  return f;
}

long BandwidthLedger::total_est() const {
  long t = 0;
  for (long v : est_per_frame) t += v;
  return t;
}

long BandwidthLedger::total_dis() const {
  long t = 0;
  for (long v : dis_per_frame) t += v;
  return t;
}

CompressionReport compression_factors(const ScenarioParams& p,
                                      const ObservabilityPattern& obs,
                                      int n_ds, bool reduced_probes,
                                      const BandwidthLedger* ledger) {
  const FusedDimensions dims = fused_dimensions(obs);
  const int K = p.num_nodes;
  const int m = p.total_sensors();
  CompressionReport rep;
  rep.m_bar = static_cast<double>(m) * (K - 1);
  double n_est = 0, n_dis = 0;
  for (int k = 0; k < K; ++k) {
    for (int q = 0; q < K; ++q) {
      if (q == k) continue;
      n_est += dims.qbar[q];
      n_dis += reduced_probes
                   ? dims.q_pair(k, q)
                   : std::min(dims.qbar[q], p.sensors_per_node[k]);
    }
  }
  rep.n_est = n_est;
  rep.n_dis = n_dis;
  const double denom = n_est + n_dis / n_ds;
  rep.cf_dmwf_formula =
      denom > 0 ? rep.m_bar / denom : std::numeric_limits<double>::quiet_NaN();
  rep.cf_danse = K * p.num_speech > 0
                     ? static_cast<double>(m) / (K * p.num_speech)
                     : std::numeric_limits<double>::quiet_NaN();
  rep.cf_dmwf_measured = std::numeric_limits<double>::quiet_NaN();
  if (ledger != nullptr && ledger->frames() > 0) {
    const double per_frame =
        static_cast<double>(ledger->total_est() + ledger->total_dis()) /
        static_cast<double>(ledger->frames());
    if (per_frame > 0) rep.cf_dmwf_measured = rep.m_bar / per_frame;
  }
  return rep;
}

ComplexityReport complexity_report(const ScenarioParams& p,
                                   const ObservabilityPattern& obs) {
  const FusedDimensions dims = fused_dimensions(obs);
  const int K = p.num_nodes;
  ComplexityReport rep;
  for (int k = 0; k < K; ++k) {
    double fused = 0;
    for (int q = 0; q < K; ++q)
      if (q != k) fused += dims.qbar[q];
    const double dm = p.sensors_per_node[k] + fused;
    const double da = p.sensors_per_node[k] +
                      static_cast<double>(K - 1) * p.num_speech;
    rep.dmwf_cost.push_back(dm * dm);
    rep.danse_cost.push_back(da * da);
  }
  return rep;
}

namespace {

struct TrialOutput {
  std::vector<MetricTrace> traces;
  std::vector<Failure> failures;
  BandwidthLedger ledger;
  CompressionReport compression;
  ComplexityReport complexity;
};

bool is_numerical_failure(const std::exception& e) {
  return dynamic_cast<const SingularMatrix*>(&e) != nullptr ||
         dynamic_cast<const RankDeficient*>(&e) != nullptr ||
         dynamic_cast<const InsufficientData*>(&e) != nullptr ||
         dynamic_cast<const InfeasiblePattern*>(&e) != nullptr;
}

// Plain tracked MWF W = Ryy^-1 Rss E or its rank-constrained GEVD variant.
CMatrix tracked_filter(const CMatrix& ryy, const CMatrix& rnnv,
                       const CMatrix& rss, const SelectionMatrix& e,
                       bool use_gevd, int rank,
                       const numerics::SolveOptions& opts) {
  if (use_gevd) {
    const Eigen::Index r =
        std::min<Eigen::Index>(rank, static_cast<Eigen::Index>(ryy.rows()));
    return gevd_mwf(ryy, rnnv, r, e, opts);
  }
  return centralized_mwf(ryy, rss, e, opts);
}

// Oracle SCMs are exact HPD matrices, so closed-form solves skip the
// diagonal loading that the online trackers need.
numerics::SolveOptions exact_solve() {
  numerics::SolveOptions so;
  so.diagonal_loading = false;
  return so;
}

std::vector<CMatrix> reference_filters(const Scenario& s, const ScmSet& scms,
                                       const ExperimentConfig& cfg) {
  const int m = s.total_sensors();
  const int D = s.params.desired_channels;
  std::vector<CMatrix> w;
  for (int k = 0; k < s.params.num_nodes; ++k) {
    const auto ek = SelectionMatrix::contiguous(m, D, s.node_offset(k));
    w.push_back(tracked_filter(scms.ryy, scms.rnnv, scms.rss, ek, cfg.use_gevd,
                               cfg.resolved_gevd_rank(), exact_solve()));
  }
  return w;
}

MetricTrace constant_trace(Algo a, int trial, int iterations, double value) {
  MetricTrace tr{a, trial, "mse_w", {}};
  for (int i = 0; i <= iterations; ++i)
    tr.points.push_back({static_cast<double>(i), -1, value});
  return tr;
}

DanseOptions danse_options(Algo a) {
  DanseOptions o;
  o.variant = (a == Algo::rsdanse_qd || a == Algo::rsdanse_qdk)
                  ? DanseVariant::simultaneous
                  : DanseVariant::sequential;
  o.fused_dim = (a == Algo::danse_qdk || a == Algo::rsdanse_qdk)
                    ? DanseFusedDim::observed
                    : DanseFusedDim::full;
  return o;
}

TrialOutput batch_trial(const ExperimentConfig& cfg, int trial) {
  TrialOutput out;
  ScenarioParams params = cfg.scenario;
  params.seed = Rng::derive(cfg.seed, 0xb000 + static_cast<std::uint64_t>(trial));

  const Scenario s = generate_scenario(params);
  const ScmSet scms = oracle_scms(s);
  out.compression =
      compression_factors(params, s.obs, cfg.n_ds, cfg.reduced_probes);
  out.complexity = complexity_report(params, s.obs);

  std::vector<CMatrix> refs;
  try {
    refs = reference_filters(s, scms, cfg);
  } catch (const std::exception& e) {
    for (Algo a : cfg.algos)
      out.failures.push_back(
          {trial, a, std::string("centralized reference: ") + e.what()});
    return out;
  }

  const int m = s.total_sensors();
  const int D = s.params.desired_channels;
  for (Algo a : cfg.algos) {
    try {
      switch (a) {
        case Algo::centralized:
          out.traces.push_back(constant_trace(a, trial, cfg.iterations, 0.0));
          break;
        case Algo::input: {
          std::vector<CMatrix> w;
          for (int k = 0; k < s.params.num_nodes; ++k)
            w.push_back(
                SelectionMatrix::contiguous(m, D, s.node_offset(k)).dense());
          out.traces.push_back(
              constant_trace(a, trial, cfg.iterations, mse_w(w, refs)));
          break;
        }
        case Algo::local: {
          std::vector<CMatrix> w;
          for (int k = 0; k < s.params.num_nodes; ++k) {
            const int mk = s.params.sensors_per_node[k];
            const int off = s.node_offset(k);
            const auto el = SelectionMatrix::contiguous(mk, D, 0);
            CMatrix wk = CMatrix::Zero(m, D);
            wk.middleRows(off, mk) = tracked_filter(
                scms.ryy.block(off, off, mk, mk),
                scms.rnnv.block(off, off, mk, mk),
                scms.rss.block(off, off, mk, mk), el, cfg.use_gevd,
                cfg.resolved_gevd_rank(), exact_solve());
            w.push_back(std::move(wk));
          }
          out.traces.push_back(
              constant_trace(a, trial, cfg.iterations, mse_w(w, refs)));
          break;
        }
        case Algo::dmwf: {
          DmwfOptions opts;
          opts.reduced = cfg.reduced_probes;
          opts.padding = cfg.padding;
          opts.padding_seed = Rng::derive(params.seed, 0xfade);
          opts.solve = exact_solve();
          const DmwfSolution sol = solve_dmwf_oracle(s, scms, opts);
          out.traces.push_back(constant_trace(a, trial, cfg.iterations,
                                              mse_w(sol.network, refs)));
          break;
        }
        default: {
          DanseBatch danse(s, scms, danse_options(a));
          MetricTrace tr{a, trial, "mse_w", {}};
          tr.points.push_back({0.0, -1, mse_w(danse.network_filters(), refs)});
          for (int i = 1; i <= cfg.iterations; ++i) {
            danse.iterate();
            tr.points.push_back(
                {static_cast<double>(i), -1, mse_w(danse.network_filters(), refs)});
          }
          out.traces.push_back(std::move(tr));
          break;
        }
      }
    } catch (const std::exception& e) {
      if (!is_numerical_failure(e)) throw;
      out.failures.push_back({trial, a, e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Online mode
// ---------------------------------------------------------------------------

struct OnlineTrial {
  const ExperimentConfig& cfg;
  int trial;
  std::uint64_t seed;

  WolaConfig wcfg;
  int nbins = 0, hop = 0, nwin = 0, tframes = 0;
  long tsamples = 0;
  double win_energy = 0;

  ScenarioParams params;
  ObservabilityPattern obs;
  FusedDimensions dims;
  int K = 0, M = 0, D = 0, Qd = 0, Qn = 0;
  std::vector<int> moff;

  std::vector<Spectrogram> s_stft, n_stft, v_stft;
  std::vector<bool> vad;

  // Current per-node, per-bin steering (updated at segment boundaries).
  std::vector<std::vector<CMatrix>> a_kb, b_kb;
  Rng rng_steer{0};
  long seg_samples = 0;
  int current_segment = 0;

  OnlineTrial(const ExperimentConfig& c, int t)
      : cfg(c),
        trial(t),
        seed(Rng::derive(c.seed, 0xa000 + static_cast<std::uint64_t>(t))),
        rng_steer(Rng::derive(Rng::derive(c.seed, 0xa000 + static_cast<std::uint64_t>(t)),
                              0x57ee)) {}

  void setup_model();
  void update_steering(bool first);
  Scenario bin_scenario(int f) const;
  TrialOutput run();
};

void OnlineTrial::setup_model() {
  params = cfg.scenario;
  params.seed = seed;
  obs = generate_observability(params);
  dims = fused_dimensions(obs);
  K = params.num_nodes;
  M = params.total_sensors();
  D = params.desired_channels;
  Qd = params.num_speech;
  Qn = params.num_noise;
  moff.resize(static_cast<size_t>(K));
  for (int k = 0, off = 0; k < K; ++k) {
    moff[static_cast<size_t>(k)] = off;
    off += params.sensors_per_node[static_cast<size_t>(k)];
  }

  wcfg.dft_size = cfg.online.dft_size;
  wcfg.sample_rate = cfg.online.sample_rate;
  wcfg.validate();
  nbins = wcfg.num_bins();
  hop = wcfg.hop();
  nwin = wcfg.dft_size;
  tsamples = std::lround(cfg.online.duration_s * cfg.online.sample_rate);
  const std::vector<double> win = sqrt_hann_window(nwin);
  win_energy = 0;
  for (double w : win) win_energy += w * w;
  seg_samples = std::lround(cfg.online.segment_s * cfg.online.sample_rate);

  // Time-domain latents: duty-cycled speech, stationary noise, self-noise.
  Rng rng_sig(Rng::derive(seed, 0x516));
  const long on = std::lround(cfg.online.duty_on_s * cfg.online.sample_rate);
  const long off_len =
      std::lround(cfg.online.duty_off_s * cfg.online.sample_rate);
  const long period = on + off_len;
  const double ss = std::sqrt(params.speech_power);
  const double sn = std::sqrt(params.noise_power);
  const double sv = std::sqrt(params.selfnoise_power);

  std::vector<std::vector<double>> speech(
      static_cast<size_t>(Qd), std::vector<double>(static_cast<size_t>(tsamples)));
  std::vector<double> clean_sum(static_cast<size_t>(tsamples), 0.0);
  for (int i = 0; i < Qd; ++i) {
    for (long t = 0; t < tsamples; ++t) {
      const bool active = off_len == 0 || (t % period) < on;
      const double v = active ? rng_sig.normal() * ss : 0.0;
      speech[static_cast<size_t>(i)][static_cast<size_t>(t)] = v;
      clean_sum[static_cast<size_t>(t)] += v;
    }
  }
  std::vector<std::vector<double>> noise(
      static_cast<size_t>(Qn), std::vector<double>(static_cast<size_t>(tsamples)));
  for (int j = 0; j < Qn; ++j)
    for (long t = 0; t < tsamples; ++t)
      noise[static_cast<size_t>(j)][static_cast<size_t>(t)] =
          rng_sig.normal() * sn;
  std::vector<std::vector<double>> self(
      static_cast<size_t>(M), std::vector<double>(static_cast<size_t>(tsamples)));
  for (int m = 0; m < M; ++m)
    for (long t = 0; t < tsamples; ++t)
      self[static_cast<size_t>(m)][static_cast<size_t>(t)] =
          rng_sig.normal() * sv;

  for (int i = 0; i < Qd; ++i)
    s_stft.push_back(wola_analyze(speech[static_cast<size_t>(i)], wcfg));
  for (int j = 0; j < Qn; ++j)
    n_stft.push_back(wola_analyze(noise[static_cast<size_t>(j)], wcfg));
  for (int m = 0; m < M; ++m)
    v_stft.push_back(wola_analyze(self[static_cast<size_t>(m)], wcfg));
  tframes = s_stft.empty() ? v_stft[0].num_frames() : s_stft[0].num_frames();
  vad = oracle_vad(clean_sum, wcfg);

  a_kb.assign(static_cast<size_t>(K),
              std::vector<CMatrix>(static_cast<size_t>(nbins)));
  b_kb.assign(static_cast<size_t>(K),
              std::vector<CMatrix>(static_cast<size_t>(nbins)));
  for (int k = 0; k < K; ++k) {
    const int mk = params.sensors_per_node[static_cast<size_t>(k)];
    for (int f = 0; f < nbins; ++f) {
      a_kb[static_cast<size_t>(k)][static_cast<size_t>(f)] =
          CMatrix::Zero(mk, Qd);
      b_kb[static_cast<size_t>(k)][static_cast<size_t>(f)] =
          CMatrix::Zero(mk, Qn);
    }
  }
  update_steering(true);
  current_segment = 0;
}

void OnlineTrial::update_steering(bool first) {
  const double wn = cfg.online.steering_blend;
  const double wo = 1.0 - wn;
  const double norm = std::sqrt(wo * wo + wn * wn);
  for (int f = 0; f < nbins; ++f) {
    const bool real_bin = f == 0 || f == nbins - 1;
    for (int k = 0; k < K; ++k) {
      const int mk = params.sensors_per_node[static_cast<size_t>(k)];
      CMatrix& a = a_kb[static_cast<size_t>(k)][static_cast<size_t>(f)];
      CMatrix& b = b_kb[static_cast<size_t>(k)][static_cast<size_t>(f)];
      for (int j = 0; j < Qd; ++j) {
        if (!obs.speech(k, j)) continue;
        for (int r = 0; r < mk; ++r) {
          const cplx g = real_bin ? cplx(rng_steer.normal(), 0.0)
                                  : rng_steer.cnormal();
          a(r, j) = first ? g : (wo * a(r, j) + wn * g) / norm;
        }
      }
      for (int j = 0; j < Qn; ++j) {
        if (!obs.noise(k, j)) continue;
        for (int r = 0; r < mk; ++r) {
          const cplx g = real_bin ? cplx(rng_steer.normal(), 0.0)
                                  : rng_steer.cnormal();
          b(r, j) = first ? g : (wo * b(r, j) + wn * g) / norm;
        }
      }
    }
  }
}

Scenario OnlineTrial::bin_scenario(int f) const {
  Scenario s;
  s.params = params;
  // STFT bins of unit-variance white latents carry the window energy.
  s.params.speech_power *= win_energy;
  s.params.noise_power *= win_energy;
  s.params.selfnoise_power *= win_energy;
  s.obs = obs;
  s.a = CMatrix::Zero(M, Qd);
  s.b = CMatrix::Zero(M, Qn);
  for (int k = 0; k < K; ++k) {
    s.a_node.push_back(a_kb[static_cast<size_t>(k)][static_cast<size_t>(f)]);
    s.b_node.push_back(b_kb[static_cast<size_t>(k)][static_cast<size_t>(f)]);
    const int mk = params.sensors_per_node[static_cast<size_t>(k)];
    s.a.middleRows(moff[static_cast<size_t>(k)], mk) = s.a_node.back();
    s.b.middleRows(moff[static_cast<size_t>(k)], mk) = s.b_node.back();
  }
  return s;
}

TrialOutput OnlineTrial::run() {
  TrialOutput out;
  setup_model();
  out.compression = compression_factors(params, obs, cfg.n_ds,
                                        cfg.reduced_probes, nullptr);
  out.complexity = complexity_report(params, obs);

  const numerics::SolveOptions solve;
  const int rank = cfg.resolved_gevd_rank();
  const bool wants_centr =
      std::count(cfg.algos.begin(), cfg.algos.end(), Algo::centralized) > 0;
  const bool wants_local =
      std::count(cfg.algos.begin(), cfg.algos.end(), Algo::local) > 0;
  const bool wants_dmwf =
      std::count(cfg.algos.begin(), cfg.algos.end(), Algo::dmwf) > 0;

  // ---- per-algorithm state (indexed per bin) ----
  std::vector<VadGatedScm> central;
  if (wants_centr || wants_local)
    central.assign(static_cast<size_t>(nbins), VadGatedScm(M, cfg.beta));

  // dMWF
  DmwfOptions dopts;
  dopts.reduced = cfg.reduced_probes;
  dopts.padding = cfg.padding;
  dopts.padding_seed = Rng::derive(seed, 0xfade);
  dopts.solve = solve;
  std::vector<std::vector<ProbeSpec>> plan;       // [q]
  std::vector<bool> passth;                       // [q]
  std::vector<long> min_events;                   // [q]
  std::vector<ObservationLayout> layout;          // [k]
  std::vector<std::vector<FusionState>> fusion;   // [bin][q]
  std::vector<std::vector<ScmTracker>> dis_yy;    // [bin][q]
  std::vector<std::vector<CrossScmTracker>> dis_yr;
  std::vector<std::vector<VadGatedScm>> dest;     // [bin][k]
  long dis_events = 0;
  bool dmwf_active = wants_dmwf;
  // Discovery statistics only see one frame in n_ds, so by default their
  // per-event forgetting factor is compounded to keep the same memory span
  // in time as the estimation trackers.
  const double beta_dis = cfg.online.discovery_beta > 0.0
                              ? cfg.online.discovery_beta
                              : std::pow(cfg.beta, cfg.n_ds);

  if (wants_dmwf) {
    try {
      const Scenario s0 = bin_scenario(0);
      plan.resize(static_cast<size_t>(K));
      passth.resize(static_cast<size_t>(K));
      min_events.resize(static_cast<size_t>(K));
      for (int q = 0; q < K; ++q) {
        plan[static_cast<size_t>(q)] = probe_plan(s0, dims, q, dopts);
        passth[static_cast<size_t>(q)] =
            params.sensors_per_node[static_cast<size_t>(q)] <=
            dims.qbar[static_cast<size_t>(q)];
        min_events[static_cast<size_t>(q)] =
            cfg.online.warm_start
                ? 1
                : params.sensors_per_node[static_cast<size_t>(q)] +
                      dims.qbar[static_cast<size_t>(q)];
      }
      fusion.resize(static_cast<size_t>(nbins));
      dis_yy.resize(static_cast<size_t>(nbins));
      dis_yr.resize(static_cast<size_t>(nbins));
      dest.resize(static_cast<size_t>(nbins));
      for (int f = 0; f < nbins; ++f) {
        const Scenario sbin = bin_scenario(f);
        const ScmSet scms = oracle_scms(sbin);
        auto& fus = fusion[static_cast<size_t>(f)];
        if (cfg.online.warm_start) {
          for (int q = 0; q < K; ++q)
            fus.push_back(discovery_oracle(
                sbin, scms, q, plan[static_cast<size_t>(q)], solve));
        } else {
          for (int q = 0; q < K; ++q) {
            FusionState st;
            st.node = q;
            const int mq = params.sensors_per_node[static_cast<size_t>(q)];
            if (passth[static_cast<size_t>(q)]) {
              st.p = CMatrix::Identity(mq, mq);
              st.passthrough = true;
            } else {
              st.p = CMatrix::Identity(mq, dims.qbar[static_cast<size_t>(q)]);
            }
            fus.push_back(std::move(st));
          }
        }
        if (f == 0) {
          for (int k = 0; k < K; ++k)
            layout.push_back(observation_layout(
                k, params.sensors_per_node[static_cast<size_t>(k)], fus));
        }
        for (int q = 0; q < K; ++q) {
          const int mq = params.sensors_per_node[static_cast<size_t>(q)];
          dis_yy[static_cast<size_t>(f)].emplace_back(mq, beta_dis);
          dis_yr[static_cast<size_t>(f)].emplace_back(
              mq, dims.qbar[static_cast<size_t>(q)], beta_dis);
          if (cfg.online.warm_start && !passth[static_cast<size_t>(q)] &&
              dims.qbar[static_cast<size_t>(q)] > 0) {
            const int offq = moff[static_cast<size_t>(q)];
            dis_yy[static_cast<size_t>(f)].back().warm_start(
                scms.ryy.block(offq, offq, mq, mq), 1);
            CMatrix ryr =
                CMatrix::Zero(mq, dims.qbar[static_cast<size_t>(q)]);
            for (const ProbeSpec& spec : plan[static_cast<size_t>(q)]) {
              const int mk =
                  params.sensors_per_node[static_cast<size_t>(spec.sender)];
              ryr += scms.ryy.block(offq, moff[static_cast<size_t>(spec.sender)],
                                    mq, mk) *
                     spec.selector(mk).adjoint();
            }
            dis_yr[static_cast<size_t>(f)].back().warm_start(ryr, 1);
          }
        }
        for (int k = 0; k < K; ++k) {
          const Eigen::Index mt = layout[static_cast<size_t>(k)].total();
          dest[static_cast<size_t>(f)].emplace_back(mt, cfg.beta);
          if (cfg.online.warm_start) {
            const CMatrix dk = fusion_arrangement(sbin, k, fus);
            dest[static_cast<size_t>(f)].back().warm_start(
                numerics::symmetrize(dk.adjoint() * scms.ryy * dk),
                numerics::symmetrize(dk.adjoint() * scms.rnnv * dk), 1);
          }
        }
      }
      if (cfg.online.warm_start) dis_events = 1;
    } catch (const std::exception& e) {
      if (!is_numerical_failure(e)) throw;
      out.failures.push_back({trial, Algo::dmwf, e.what()});
      dmwf_active = false;
    }
  }

  // DANSE variants
  struct DanseOnline {
    Algo algo = Algo::danse_qd;
    bool active = true;
    bool simultaneous = false;
    std::vector<int> qf;                       // [k]
    std::vector<Eigen::Index> mt;              // [k]
    std::vector<std::vector<CMatrix>> f;       // [bin][k]
    std::vector<std::vector<VadGatedScm>> est; // [bin][k]
  };
  std::vector<DanseOnline> danse;
  for (Algo a : cfg.algos) {
    if (!algo_is_danse(a)) continue;
    DanseOnline st;
    st.algo = a;
    const DanseOptions o = danse_options(a);
    st.simultaneous = o.variant == DanseVariant::simultaneous;
    try {
      for (int k = 0; k < K; ++k) {
        const int mk = params.sensors_per_node[static_cast<size_t>(k)];
        const int qf = o.fused_dim == DanseFusedDim::full
                           ? Qd
                           : obs.speech.row(k).sum();
        if (qf > mk)
          throw InfeasiblePattern(
              "danse: fused width exceeds sensor count at node " +
              std::to_string(k));
        if (D > qf)
          throw InfeasiblePattern(
              "danse: desired channels exceed fused width at node " +
              std::to_string(k));
        st.qf.push_back(qf);
      }
      for (int k = 0; k < K; ++k) {
        Eigen::Index mt = params.sensors_per_node[static_cast<size_t>(k)];
        for (int q = 0; q < K; ++q)
          if (q != k) mt += st.qf[static_cast<size_t>(q)];
        st.mt.push_back(mt);
      }
      st.f.resize(static_cast<size_t>(nbins));
      st.est.resize(static_cast<size_t>(nbins));
      for (int f = 0; f < nbins; ++f) {
        const Scenario sbin = cfg.online.warm_start ? bin_scenario(f) : Scenario{};
        const ScmSet scms =
            cfg.online.warm_start ? oracle_scms(sbin) : ScmSet{};
        for (int k = 0; k < K; ++k) {
          const int mk = params.sensors_per_node[static_cast<size_t>(k)];
          CMatrix fk = CMatrix::Zero(mk, st.qf[static_cast<size_t>(k)]);
          fk.topRows(st.qf[static_cast<size_t>(k)]).setIdentity();
          st.f[static_cast<size_t>(f)].push_back(std::move(fk));
          st.est[static_cast<size_t>(f)].emplace_back(
              st.mt[static_cast<size_t>(k)], cfg.beta);
        }
        if (cfg.online.warm_start) {
          for (int k = 0; k < K; ++k) {
            CMatrix dk = CMatrix::Zero(M, st.mt[static_cast<size_t>(k)]);
            const int mk = params.sensors_per_node[static_cast<size_t>(k)];
            dk.block(moff[static_cast<size_t>(k)], 0, mk, mk).setIdentity();
            Eigen::Index col = mk;
            for (int q = 0; q < K; ++q) {
              if (q == k) continue;
              const int mq = params.sensors_per_node[static_cast<size_t>(q)];
              dk.block(moff[static_cast<size_t>(q)], col, mq,
                       st.qf[static_cast<size_t>(q)]) =
                  st.f[static_cast<size_t>(f)][static_cast<size_t>(q)];
              col += st.qf[static_cast<size_t>(q)];
            }
            st.est[static_cast<size_t>(f)][static_cast<size_t>(k)].warm_start(
                numerics::symmetrize(dk.adjoint() * scms.ryy * dk),
                numerics::symmetrize(dk.adjoint() * scms.rnnv * dk), 1);
          }
        }
      }
    } catch (const std::exception& e) {
      if (!is_numerical_failure(e)) throw;
      out.failures.push_back({trial, a, e.what()});
      st.active = false;
    }
    danse.push_back(std::move(st));
  }

  // ---- estimate storage: one reference channel per node per algorithm ----
  auto make_bins = [&] {
    Spectrogram sp;
    sp.dft_size = wcfg.dft_size;
    sp.frames.assign(static_cast<size_t>(tframes), CVector::Zero(nbins));
    return sp;
  };
  std::vector<Spectrogram> desired_bins, input_bins, centr_bins, local_bins,
      dmwf_bins;
  std::vector<std::vector<Spectrogram>> danse_bins(danse.size());
  for (int k = 0; k < K; ++k) {
    desired_bins.push_back(make_bins());
    input_bins.push_back(make_bins());
    if (wants_centr) centr_bins.push_back(make_bins());
    if (wants_local) local_bins.push_back(make_bins());
    if (wants_dmwf) dmwf_bins.push_back(make_bins());
    for (auto& db : danse_bins) db.push_back(make_bins());
  }

  bool centr_active = wants_centr;
  bool local_active = wants_local;

  const auto e_central = [&] {
    SelectionMatrix e;
    e.total = M;
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d)
        e.idx.push_back(moff[static_cast<size_t>(k)] + d);
    return e;
  }();

  if (wants_dmwf) {
    out.ledger.est_per_frame.reserve(static_cast<size_t>(tframes));
    out.ledger.dis_per_frame.reserve(static_cast<size_t>(tframes));
  }

  std::vector<CVector> ybins(static_cast<size_t>(nbins));
  std::vector<CVector> sbins(static_cast<size_t>(nbins));

  for (int t = 0; t < tframes; ++t) {
    if (seg_samples > 0) {
      const int seg = static_cast<int>(
          (static_cast<long>(t) * hop) / seg_samples);
      if (seg != current_segment) {
        update_steering(false);
        current_segment = seg;
      }
    }
    const bool voice = vad[static_cast<size_t>(t)];

    for (int f = 0; f < nbins; ++f) {
      CVector s_tf(Qd), n_tf(Qn);
      for (int i = 0; i < Qd; ++i)
        s_tf(i) = s_stft[static_cast<size_t>(i)]
                      .frames[static_cast<size_t>(t)](f);
      for (int j = 0; j < Qn; ++j)
        n_tf(j) = n_stft[static_cast<size_t>(j)]
                      .frames[static_cast<size_t>(t)](f);
      CVector y(M);
      for (int k = 0; k < K; ++k) {
        const int mk = params.sensors_per_node[static_cast<size_t>(k)];
        const int off = moff[static_cast<size_t>(k)];
        CVector v(mk);
        for (int r = 0; r < mk; ++r)
          v(r) = v_stft[static_cast<size_t>(off + r)]
                     .frames[static_cast<size_t>(t)](f);
        y.segment(off, mk) =
            a_kb[static_cast<size_t>(k)][static_cast<size_t>(f)] * s_tf +
            b_kb[static_cast<size_t>(k)][static_cast<size_t>(f)] * n_tf + v;
        desired_bins[static_cast<size_t>(k)].frames[static_cast<size_t>(t)](f) =
            (a_kb[static_cast<size_t>(k)][static_cast<size_t>(f)].topRows(D) *
             s_tf)(0);
        input_bins[static_cast<size_t>(k)].frames[static_cast<size_t>(t)](f) =
            y(off);
      }
      ybins[static_cast<size_t>(f)] = std::move(y);
      sbins[static_cast<size_t>(f)] = std::move(s_tf);
    }

    // centralized / local share the network-wide tracker
    if (centr_active || local_active) {
      try {
        for (int f = 0; f < nbins; ++f) {
          auto& scm = central[static_cast<size_t>(f)];
          scm.update(ybins[static_cast<size_t>(f)], voice);
          const bool ready = scm.speech_frames() > 0 && scm.noise_frames() > 0;
          if (centr_active) {
            if (ready) {
              const CMatrix w =
                  tracked_filter(scm.speech_plus_noise(), scm.noise_only(),
                                 scm.speech(), e_central, cfg.use_gevd, rank,
                                 solve);
              for (int k = 0; k < K; ++k)
                centr_bins[static_cast<size_t>(k)]
                    .frames[static_cast<size_t>(t)](f) =
                    w.col(k * D).dot(ybins[static_cast<size_t>(f)]);
            } else {
              for (int k = 0; k < K; ++k)
                centr_bins[static_cast<size_t>(k)]
                    .frames[static_cast<size_t>(t)](f) =
                    ybins[static_cast<size_t>(f)](moff[static_cast<size_t>(k)]);
            }
          }
          if (local_active) {
            for (int k = 0; k < K; ++k) {
              const int mk = params.sensors_per_node[static_cast<size_t>(k)];
              const int off = moff[static_cast<size_t>(k)];
              const CVector yk =
                  ybins[static_cast<size_t>(f)].segment(off, mk);
              cplx val;
              if (ready) {
                const CMatrix wk = tracked_filter(
                    scm.speech_plus_noise().block(off, off, mk, mk),
                    scm.noise_only().block(off, off, mk, mk),
                    scm.speech().block(off, off, mk, mk),
                    SelectionMatrix::contiguous(mk, D, 0), cfg.use_gevd, rank,
                    solve);
                val = wk.col(0).dot(yk);
              } else {
                val = yk(0);
              }
              local_bins[static_cast<size_t>(k)]
                  .frames[static_cast<size_t>(t)](f) = val;
            }
          }
        }
      } catch (const std::exception& e) {
        if (!is_numerical_failure(e)) throw;
        if (centr_active)
          out.failures.push_back({trial, Algo::centralized, e.what()});
        if (local_active)
          out.failures.push_back({trial, Algo::local, e.what()});
        centr_active = local_active = false;
      }
    }

    // dMWF: periodic discovery, per-frame estimation
    if (dmwf_active) {
      const bool discovery = t % cfg.n_ds == 0;
      try {
        if (discovery) ++dis_events;
        for (int f = 0; f < nbins; ++f) {
          const CVector& y = ybins[static_cast<size_t>(f)];
          auto& fus = fusion[static_cast<size_t>(f)];
          if (discovery) {
            for (int q = 0; q < K; ++q) {
              if (passth[static_cast<size_t>(q)] ||
                  dims.qbar[static_cast<size_t>(q)] == 0)
                continue;
              const int mq = params.sensors_per_node[static_cast<size_t>(q)];
              const int offq = moff[static_cast<size_t>(q)];
              CVector r = CVector::Zero(dims.qbar[static_cast<size_t>(q)]);
              for (const ProbeSpec& spec : plan[static_cast<size_t>(q)]) {
                const int mk =
                    params.sensors_per_node[static_cast<size_t>(spec.sender)];
                r += build_probe(
                    y.segment(moff[static_cast<size_t>(spec.sender)], mk),
                    spec);
              }
              dis_yy[static_cast<size_t>(f)][static_cast<size_t>(q)].update(
                  y.segment(offq, mq));
              dis_yr[static_cast<size_t>(f)][static_cast<size_t>(q)].update(
                  y.segment(offq, mq), r);
              if (dis_events >= min_events[static_cast<size_t>(q)]) {
                fus[static_cast<size_t>(q)] = discovery_from_stats(
                    q,
                    dis_yy[static_cast<size_t>(f)][static_cast<size_t>(q)]
                        .value(),
                    dis_yr[static_cast<size_t>(f)][static_cast<size_t>(q)]
                        .value(),
                    dis_events, min_events[static_cast<size_t>(q)],
                    false, solve);
              }
            }
          }
          std::vector<CVector> z(static_cast<size_t>(K));
          for (int q = 0; q < K; ++q)
            z[static_cast<size_t>(q)] =
                fuse(fus[static_cast<size_t>(q)],
                     y.segment(moff[static_cast<size_t>(q)],
                               params.sensors_per_node[static_cast<size_t>(q)]));
          for (int k = 0; k < K; ++k) {
            const ObservationLayout& lay = layout[static_cast<size_t>(k)];
            const int mk = params.sensors_per_node[static_cast<size_t>(k)];
            CVector yt(lay.total());
            yt.head(mk) = y.segment(moff[static_cast<size_t>(k)], mk);
            Eigen::Index pos = mk;
            for (const auto& [q, width] : lay.fused) {
              yt.segment(pos, width) = z[static_cast<size_t>(q)];
              pos += width;
            }
            auto& scm = dest[static_cast<size_t>(f)][static_cast<size_t>(k)];
            scm.update(yt, voice);
            cplx val;
            if (scm.speech_frames() > 0 && scm.noise_frames() > 0) {
              const CMatrix w = tracked_filter(
                  scm.speech_plus_noise(), scm.noise_only(), scm.speech(),
                  SelectionMatrix::contiguous(lay.total(), D, 0), cfg.use_gevd,
                  rank, solve);
              val = w.col(0).dot(yt);
            } else {
              val = yt(0);
            }
            dmwf_bins[static_cast<size_t>(k)]
                .frames[static_cast<size_t>(t)](f) = val;
          }
        }
        long est_count = 0, dis_count = 0;
        for (int k = 0; k < K; ++k)
          for (int q = 0; q < K; ++q)
            if (q != k)
              est_count +=
                  fusion[0][static_cast<size_t>(q)].fused_channels();
        if (discovery) {
          for (int q = 0; q < K; ++q) {
            if (passth[static_cast<size_t>(q)] ||
                dims.qbar[static_cast<size_t>(q)] == 0)
              continue;
            for (const ProbeSpec& spec : plan[static_cast<size_t>(q)])
              dis_count += std::min(
                  spec.channels,
                  params.sensors_per_node[static_cast<size_t>(spec.sender)]);
          }
        }
        out.ledger.est_per_frame.push_back(est_count);
        out.ledger.dis_per_frame.push_back(dis_count);
        if (discovery) ++out.ledger.discovery_events;
      } catch (const std::exception& e) {
        if (!is_numerical_failure(e)) throw;
        out.failures.push_back({trial, Algo::dmwf, e.what()});
        dmwf_active = false;
      }
    }

    // DANSE variants: per-frame estimation, periodic fusion update
    for (size_t di = 0; di < danse.size(); ++di) {
      DanseOnline& st = danse[di];
      if (!st.active) continue;
      const bool update_frame =
          t > 0 && t % cfg.online.danse_fusion_period == 0;
      const int update_node =
          st.simultaneous
              ? -1
              : static_cast<int>((t / cfg.online.danse_fusion_period - 1) %
                                 K);
      try {
        for (int f = 0; f < nbins; ++f) {
          const CVector& y = ybins[static_cast<size_t>(f)];
          std::vector<CVector> z(static_cast<size_t>(K));
          for (int q = 0; q < K; ++q)
            z[static_cast<size_t>(q)] =
                st.f[static_cast<size_t>(f)][static_cast<size_t>(q)].adjoint() *
                y.segment(moff[static_cast<size_t>(q)],
                          params.sensors_per_node[static_cast<size_t>(q)]);
          for (int k = 0; k < K; ++k) {
            const int mk = params.sensors_per_node[static_cast<size_t>(k)];
            CVector yt(st.mt[static_cast<size_t>(k)]);
            yt.head(mk) = y.segment(moff[static_cast<size_t>(k)], mk);
            Eigen::Index pos = mk;
            for (int q = 0; q < K; ++q) {
              if (q == k) continue;
              yt.segment(pos, st.qf[static_cast<size_t>(q)]) =
                  z[static_cast<size_t>(q)];
              pos += st.qf[static_cast<size_t>(q)];
            }
            auto& scm = st.est[static_cast<size_t>(f)][static_cast<size_t>(k)];
            scm.update(yt, voice);
            cplx val;
            const bool ready =
                scm.speech_frames() > 0 && scm.noise_frames() > 0;
            if (ready) {
              const CMatrix w = tracked_filter(
                  scm.speech_plus_noise(), scm.noise_only(), scm.speech(),
                  SelectionMatrix::contiguous(st.mt[static_cast<size_t>(k)],
                                              st.qf[static_cast<size_t>(k)],
                                              0),
                  cfg.use_gevd, rank, solve);
              val = w.col(0).dot(yt);
              if (update_frame && (st.simultaneous || k == update_node)) {
                const CMatrix fnew = w.topRows(mk);
                CMatrix& fk =
                    st.f[static_cast<size_t>(f)][static_cast<size_t>(k)];
                fk = st.simultaneous ? CMatrix(0.5 * fk + 0.5 * fnew) : fnew;
              }
            } else {
              val = yt(0);
            }
            danse_bins[di][static_cast<size_t>(k)]
                .frames[static_cast<size_t>(t)](f) = val;
          }
        }
      } catch (const std::exception& e) {
        if (!is_numerical_failure(e)) throw;
        out.failures.push_back({trial, st.algo, e.what()});
        st.active = false;
      }
    }
  }

  // ---- synthesis + SER checkpoints ----
  std::vector<std::vector<double>> ref;
  for (int k = 0; k < K; ++k)
    ref.push_back(wola_synthesize(desired_bins[static_cast<size_t>(k)], wcfg));
  const auto ser_trace = [&](Algo a, const std::vector<Spectrogram>& bins) {
    MetricTrace tr{a, trial, "ser_db", {}};
    std::vector<std::vector<double>> est;
    for (int k = 0; k < K; ++k)
      est.push_back(wola_synthesize(bins[static_cast<size_t>(k)], wcfg));
    const long len = static_cast<long>(ref[0].size());
    const long window = cfg.online.ser_window;
    for (long c = 1;; ++c) {
      const long t_end =
          std::lround(static_cast<double>(c) * cfg.online.ser_stride_s *
                      cfg.online.sample_rate);
      if (t_end > len) break;
      if (t_end < window) continue;
      for (int k = 0; k < K; ++k) {
        tr.points.push_back(
            {static_cast<double>(t_end) / cfg.online.sample_rate, k,
             ser_db(ref[static_cast<size_t>(k)], est[static_cast<size_t>(k)],
                    static_cast<size_t>(t_end), static_cast<size_t>(window))});
      }
    }
    return tr;
  };

  out.traces.push_back(ser_trace(Algo::input, input_bins));
  if (centr_active)
    out.traces.push_back(ser_trace(Algo::centralized, centr_bins));
  if (local_active) out.traces.push_back(ser_trace(Algo::local, local_bins));
  if (dmwf_active) out.traces.push_back(ser_trace(Algo::dmwf, dmwf_bins));
  for (size_t di = 0; di < danse.size(); ++di)
    if (danse[di].active)
      out.traces.push_back(ser_trace(danse[di].algo, danse_bins[di]));

  if (wants_dmwf && dmwf_active) {
    out.compression = compression_factors(params, obs, cfg.n_ds,
                                          cfg.reduced_probes, &out.ledger);
  }
  return out;
}

TrialOutput online_trial(const ExperimentConfig& cfg, int trial) {
  OnlineTrial run(cfg, trial);
  return run.run();
}

int thread_cap() {
  const char* env = std::getenv("WASN_DMWF_THREADS");
  if (env == nullptr) return 1;
  const int v = std::atoi(env);
  return v < 1 ? 1 : v;
}

template <typename Fn>
ExperimentResult run_all_trials(const ExperimentConfig& cfg, Fn&& trial_fn) {
  cfg.validate();
  std::vector<TrialOutput> outs(static_cast<size_t>(cfg.trials));
  const auto guarded = [&](int i) {
    try {
      outs[static_cast<size_t>(i)] = trial_fn(i);
    } catch (const std::exception& e) {
      TrialOutput bad;
      for (Algo a : cfg.algos) bad.failures.push_back({i, a, e.what()});
      outs[static_cast<size_t>(i)] = std::move(bad);
    }
  };
  const int threads = std::min(thread_cap(), cfg.trials);
  if (threads <= 1) {
    for (int i = 0; i < cfg.trials; ++i) guarded(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < cfg.trials; i = next.fetch_add(1))
          guarded(i);
      });
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  res.mode = cfg.mode;
  for (auto& o : outs) {
    for (auto& tr : o.traces) res.traces.push_back(std::move(tr));
    for (auto& fl : o.failures) res.failures.push_back(std::move(fl));
    res.bandwidth.push_back(std::move(o.ledger));
    res.compression.push_back(o.compression);
    res.complexity.push_back(std::move(o.complexity));
  }
  return res;
}

}  // namespace

ExperimentResult run_batch_oracle(const ExperimentConfig& cfg) {
  if (cfg.mode != ExperimentMode::batch_oracle)
    throw ConfigError("run_batch_oracle: config mode is not batch_oracle");
  return run_all_trials(cfg,
                        [&](int i) { return batch_trial(cfg, i); });
}

ExperimentResult run_online(const ExperimentConfig& cfg) {
  if (cfg.mode != ExperimentMode::online)
    throw ConfigError("run_online: config mode is not online");
  return run_all_trials(cfg,
                        [&](int i) { return online_trial(cfg, i); });
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return cfg.mode == ExperimentMode::batch_oracle ? run_batch_oracle(cfg)
                                                  : run_online(cfg);
}

}  // namespace wasn
