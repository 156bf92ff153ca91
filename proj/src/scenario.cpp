#include "wasn/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace wasn {

namespace {

constexpr int kMaxPatternDraws = 100000;

void write_floats(std::ostream& out, const char* key, const double* v,
                  size_t n) {
  out << key << " =";
  char buf[32];
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, " %.17g", v[i]);
    out << buf;
  }
  out << "\n";
}

void write_cmatrix(std::ostream& out, const std::string& key,
                   const CMatrix& m) {
  std::vector<double> flat;
  flat.reserve(2 * m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      flat.push_back(m(i, j).real());
      flat.push_back(m(i, j).imag());
    }
  }
  write_floats(out, key.c_str(), flat.data(), flat.size());
}

}  // namespace

int ScenarioParams::total_sensors() const {
  int m = 0;
  for (int mk : sensors_per_node) m += mk;
  return m;
}

void ScenarioParams::validate() const {
  if (num_nodes < 2) throw InfeasiblePattern("scenario: need >= 2 nodes");
  if (static_cast<int>(sensors_per_node.size()) != num_nodes)
    throw DimensionMismatch("scenario: sensors_per_node size != K");
  if (num_speech < 1) throw InfeasiblePattern("scenario: need >= 1 speech source");
  if (num_noise < 0) throw InfeasiblePattern("scenario: negative noise count");
  if (desired_channels < 1)
    throw InfeasiblePattern("scenario: need >= 1 desired channel");
  for (int mk : sensors_per_node) {
    if (mk < 1) throw InfeasiblePattern("scenario: node without sensors");
    if (desired_channels > mk)
      throw InfeasiblePattern("scenario: D exceeds a node's sensor count");
  }
  if (speech_power <= 0 || noise_power < 0 || selfnoise_power <= 0)
    throw InfeasiblePattern("scenario: powers must be positive");
}

bool ObservabilityPattern::observes(int node, int source) const {
  const int qd = static_cast<int>(speech.cols());
  if (source < qd) return speech(node, source) != 0;
  return noise(node, source - qd) != 0;
}

std::vector<int> ObservabilityPattern::observed(int node) const {
  std::vector<int> out;
  for (int j = 0; j < num_sources(); ++j)
    if (observes(node, j)) out.push_back(j);
  return out;
}

std::vector<int> ObservabilityPattern::shared(int k, int q) const {
  std::vector<int> out;
  for (int j = 0; j < num_sources(); ++j)
    if (observes(k, j) && observes(q, j)) out.push_back(j);
  return out;
}

int Scenario::node_offset(int k) const {
  int off = 0;
  for (int i = 0; i < k; ++i) off += params.sensors_per_node[i];
  return off;
}

ObservabilityPattern generate_observability(const ScenarioParams& p) {
  p.validate();
  Rng rng(Rng::derive(p.seed, 0x0b5));
  const int K = p.num_nodes;
  ObservabilityPattern obs;
  for (int attempt = 0; attempt < kMaxPatternDraws; ++attempt) {
    obs.speech = Eigen::MatrixXi(K, p.num_speech);
    obs.noise = Eigen::MatrixXi(K, p.num_noise);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < p.num_speech; ++j)
        obs.speech(k, j) = p.mode == ObservabilityMode::fods
                               ? 1
                               : (rng.uniform() < 0.5 ? 1 : 0);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < p.num_noise; ++j)
        obs.noise(k, j) = rng.uniform() < 0.5 ? 1 : 0;

    bool ok = true;
    // Every source observed somewhere.
    for (int j = 0; j < p.num_speech && ok; ++j)
      ok = obs.speech.col(j).sum() > 0;
    for (int j = 0; j < p.num_noise && ok; ++j)
      ok = obs.noise.col(j).sum() > 0;
    // Every node observes at least one speech source, and no node observes
    // more sources than it has sensors (steering must keep full column rank).
    for (int k = 0; k < K && ok; ++k) {
      const int ns = obs.speech.row(k).sum();
      ok = ns >= 1 &&
           ns + obs.noise.row(k).sum() <= p.sensors_per_node[k];
    }
    // POS requires at least one unobserved speech entry.
    if (ok && p.mode == ObservabilityMode::pos)
      ok = obs.speech.sum() < K * p.num_speech;
    if (ok) return obs;
  }
  throw InfeasiblePattern("generate_observability: no feasible pattern found");
}

Scenario scenario_from_pattern(const ScenarioParams& p,
                               const ObservabilityPattern& obs) {
  p.validate();
  if (obs.speech.rows() != p.num_nodes || obs.speech.cols() != p.num_speech ||
      obs.noise.rows() != p.num_nodes || obs.noise.cols() != p.num_noise)
    throw DimensionMismatch("scenario_from_pattern: pattern shape mismatch");

  Scenario s;
  s.params = p;
  s.obs = obs;
  Rng rng(Rng::derive(p.seed, 0x57e));
  const int K = p.num_nodes;
  s.a_node.resize(K);
  s.b_node.resize(K);
  for (int k = 0; k < K; ++k) {
    const int mk = p.sensors_per_node[k];
    s.a_node[k] = CMatrix::Zero(mk, p.num_speech);
    s.b_node[k] = CMatrix::Zero(mk, p.num_noise);
    for (int j = 0; j < p.num_speech; ++j)
      if (obs.speech(k, j))
        for (int i = 0; i < mk; ++i) s.a_node[k](i, j) = rng.cnormal();
    for (int j = 0; j < p.num_noise; ++j)
      if (obs.noise(k, j))
        for (int i = 0; i < mk; ++i) s.b_node[k](i, j) = rng.cnormal();
  }
  const int m = p.total_sensors();
  s.a = CMatrix::Zero(m, p.num_speech);
  s.b = CMatrix::Zero(m, p.num_noise);
  int off = 0;
  for (int k = 0; k < K; ++k) {
    s.a.middleRows(off, p.sensors_per_node[k]) = s.a_node[k];
    s.b.middleRows(off, p.sensors_per_node[k]) = s.b_node[k];
    off += p.sensors_per_node[k];
  }
  return s;
}

Scenario generate_scenario(const ScenarioParams& p) {
  return scenario_from_pattern(p, generate_observability(p));
}

ScmSet oracle_scms(const Scenario& s) {
  const int m = s.total_sensors();
  ScmSet set;
  set.rss = s.params.speech_power * (s.a * s.a.adjoint());
  set.rnnv = s.params.noise_power * (s.b * s.b.adjoint()) +
             s.params.selfnoise_power * CMatrix::Identity(m, m);
  set.ryy = set.rss + set.rnnv;
  return set;
}

bool DutyPattern::active(long frame) const {
  if (always_on) return true;
  const long period = frames_on + frames_off;
  if (period <= 0) throw InfeasiblePattern("duty pattern: empty period");
  return frame % period < frames_on;
}

Frame synthesize_frame(const Scenario& s, Rng& rng, bool speech_active) {
  const auto& p = s.params;
  CVector sp = CVector::Zero(p.num_speech);
  if (speech_active) {
    const double g = std::sqrt(p.speech_power);
    for (int j = 0; j < p.num_speech; ++j) sp(j) = g * rng.cnormal();
  }
  CVector nz(p.num_noise);
  const double gn = std::sqrt(p.noise_power);
  for (int j = 0; j < p.num_noise; ++j) nz(j) = gn * rng.cnormal();

  Frame f;
  f.vad = speech_active;
  f.y.resize(p.num_nodes);
  const double gv = std::sqrt(p.selfnoise_power);
  for (int k = 0; k < p.num_nodes; ++k) {
    CVector v(p.sensors_per_node[k]);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gv * rng.cnormal();
    f.y[k] = s.a_node[k] * sp + s.b_node[k] * nz + v;
  }
  return f;
}

void save_scenario(const Scenario& s, std::ostream& out) {
  const auto& p = s.params;
  out << "wasn_scenario 1\n";
  out << "num_nodes = " << p.num_nodes << "\n";
  out << "sensors_per_node =";
  for (int mk : p.sensors_per_node) out << " " << mk;
  out << "\n";
  out << "num_speech = " << p.num_speech << "\n";
  out << "num_noise = " << p.num_noise << "\n";
  out << "desired_channels = " << p.desired_channels << "\n";
  const double powers[3] = {p.speech_power, p.noise_power, p.selfnoise_power};
  write_floats(out, "speech_power", powers, 1);
  write_floats(out, "noise_power", powers + 1, 1);
  write_floats(out, "selfnoise_power", powers + 2, 1);
  out << "mode = " << (p.mode == ObservabilityMode::fods ? "fods" : "pos")
      << "\n";
  out << "seed = " << p.seed << "\n";
  out << "obs_speech =";
  for (int k = 0; k < p.num_nodes; ++k)
    for (int j = 0; j < p.num_speech; ++j) out << " " << s.obs.speech(k, j);
  out << "\n";
  out << "obs_noise =";
  for (int k = 0; k < p.num_nodes; ++k)
    for (int j = 0; j < p.num_noise; ++j) out << " " << s.obs.noise(k, j);
  out << "\n";
  for (int k = 0; k < p.num_nodes; ++k) {
    write_cmatrix(out, "a_node_" + std::to_string(k), s.a_node[k]);
    write_cmatrix(out, "b_node_" + std::to_string(k), s.b_node[k]);
  }
}

namespace {

struct KvFile {
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string& get(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    throw ConfigError("scenario load: missing key '" + key + "'");
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::istringstream in(get(key));
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
  }
};

KvFile parse_kv(std::istream& in, const char* magic) {
  std::string line;
  if (!std::getline(in, line) || line != magic)
    throw ConfigError("scenario load: bad header");
  KvFile kv;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("scenario load: malformed line '" + line + "'");
    auto trim = [](std::string t) {
      const auto a = t.find_first_not_of(" \t");
      const auto b = t.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
    };
    kv.entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

CMatrix read_cmatrix(const KvFile& kv, const std::string& key, int rows,
                     int cols) {
  const auto flat = kv.get_doubles(key);
  if (static_cast<int>(flat.size()) != 2 * rows * cols)
    throw ConfigError("scenario load: wrong element count for " + key);
  CMatrix m(rows, cols);
  size_t p = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j, p += 2) m(i, j) = {flat[p], flat[p + 1]};
  return m;
}

}  // namespace

Scenario load_scenario(std::istream& in) {
  KvFile kv = parse_kv(in, "wasn_scenario 1");
  ScenarioParams p;
  p.num_nodes = static_cast<int>(kv.get_doubles("num_nodes").at(0));
  for (double v : kv.get_doubles("sensors_per_node"))
    p.sensors_per_node.push_back(static_cast<int>(v));
  p.num_speech = static_cast<int>(kv.get_doubles("num_speech").at(0));
  p.num_noise = static_cast<int>(kv.get_doubles("num_noise").at(0));
  p.desired_channels =
      static_cast<int>(kv.get_doubles("desired_channels").at(0));
  p.speech_power = kv.get_doubles("speech_power").at(0);
  p.noise_power = kv.get_doubles("noise_power").at(0);
  p.selfnoise_power = kv.get_doubles("selfnoise_power").at(0);
  const std::string mode = kv.get("mode");
  if (mode == "fods")
    p.mode = ObservabilityMode::fods;
  else if (mode == "pos")
    p.mode = ObservabilityMode::pos;
  else
    throw ConfigError("scenario load: unknown mode '" + mode + "'");
  p.seed = static_cast<std::uint64_t>(kv.get_doubles("seed").at(0));
  p.validate();

  ObservabilityPattern obs;
  const auto os = kv.get_doubles("obs_speech");
  const auto on = kv.get_doubles("obs_noise");
  if (static_cast<int>(os.size()) != p.num_nodes * p.num_speech ||
      static_cast<int>(on.size()) != p.num_nodes * p.num_noise)
    throw ConfigError("scenario load: observability size mismatch");
  obs.speech = Eigen::MatrixXi(p.num_nodes, p.num_speech);
  obs.noise = Eigen::MatrixXi(p.num_nodes, p.num_noise);
  for (int k = 0, i = 0; k < p.num_nodes; ++k)
    for (int j = 0; j < p.num_speech; ++j, ++i)
      obs.speech(k, j) = static_cast<int>(os[i]);
  for (int k = 0, i = 0; k < p.num_nodes; ++k)
    for (int j = 0; j < p.num_noise; ++j, ++i)
      obs.noise(k, j) = static_cast<int>(on[i]);

  Scenario s;
  s.params = p;
  s.obs = obs;
  s.a_node.resize(p.num_nodes);
  s.b_node.resize(p.num_nodes);
  for (int k = 0; k < p.num_nodes; ++k) {
    s.a_node[k] = read_cmatrix(kv, "a_node_" + std::to_string(k),
                               p.sensors_per_node[k], p.num_speech);
    s.b_node[k] = read_cmatrix(kv, "b_node_" + std::to_string(k),
                               p.sensors_per_node[k], p.num_noise);
  }
  const int m = p.total_sensors();
  s.a = CMatrix::Zero(m, p.num_speech);
  s.b = CMatrix::Zero(m, p.num_noise);
  int off = 0;
  for (int k = 0; k < p.num_nodes; ++k) {
    s.a.middleRows(off, p.sensors_per_node[k]) = s.a_node[k];
    s.b.middleRows(off, p.sensors_per_node[k]) = s.b_node[k];
    off += p.sensors_per_node[k];
  }
  return s;
}

}  // namespace wasn
