#include <doctest.h>

#include "wasn/netsim.hpp"

using namespace wasn;

namespace {

const char* kSample = R"(# run setup
[scenario]
nodes = 4
sensors = 5 4 3 2   # trailing comment
speech_power = 1.5

[experiment]
algos = centralized dmwf
trials = 3
use_gevd = true
)";

}  // namespace

TEST_CASE("config parsing handles sections, comments, and whitespace") {
  const ConfigFile f = ConfigFile::parse_string(kSample);
  CHECK(f.get_int("scenario.nodes") == 4);
  CHECK(f.get_int_list("scenario.sensors") ==
        std::vector<long long>{5, 4, 3, 2});
  CHECK(f.get_real("scenario.speech_power") == 1.5);
  CHECK(f.get_bool("experiment.use_gevd"));
  CHECK(f.get_name_list("experiment.algos") ==
        std::vector<std::string>{"centralized", "dmwf"});
  CHECK(f.has("experiment.trials"));
  CHECK(!f.has("experiment.seed"));
  // Defaulted getters fall back, required ones throw with the key name.
  CHECK(f.get_int("experiment.seed", 42) == 42);
  CHECK_THROWS_WITH_AS(f.get_int("experiment.seed"),
                       "missing required key 'experiment.seed'", ConfigError);
}

TEST_CASE("config parse errors carry file and line context") {
  try {
    ConfigFile::parse_string("a = 1\nbroken line\n", "test.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(ConfigFile::parse_string("[oops\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("bad key! = 1\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::load("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("typed getters reject malformed values") {
  const ConfigFile f = ConfigFile::parse_string("a = zzz\nb = 1.5x\nc =\n");
  CHECK_THROWS_AS(f.get_int("a"), ConfigError);
  CHECK_THROWS_AS(f.get_real("b"), ConfigError);
  CHECK_THROWS_AS(f.get_bool("a"), ConfigError);
  CHECK_THROWS_AS(f.get_int_list("c"), ConfigError);
  CHECK_THROWS_AS(f.get_name_list("c"), ConfigError);
}

TEST_CASE("parse of serialize is a fixed point") {
  const ConfigFile f = ConfigFile::parse_string(kSample);
  const ConfigFile g = ConfigFile::parse_string(f.serialize());
  CHECK(f == g);
  CHECK(g.serialize() == f.serialize());
}

TEST_CASE("experiment config survives the config-file round trip") {
  ExperimentConfig cfg;
  cfg.scenario.num_nodes = 3;
  cfg.scenario.sensors_per_node = {4, 5, 6};
  cfg.scenario.num_speech = 2;
  cfg.scenario.num_noise = 1;
  cfg.scenario.mode = ObservabilityMode::pos;
  cfg.scenario.selfnoise_power = 0.02;
  cfg.mode = ExperimentMode::online;
  cfg.algos = {Algo::centralized, Algo::dmwf, Algo::rsdanse_qdk};
  cfg.trials = 2;
  cfg.iterations = 17;
  cfg.n_ds = 4;
  cfg.beta = 0.95;
  cfg.use_gevd = true;
  cfg.gevd_rank = 1;
  cfg.reduced_probes = true;
  cfg.padding = ProbePadding::random;
  cfg.seed = 77;
  cfg.online.dft_size = 512;
  cfg.online.duration_s = 4.0;
  cfg.online.ser_window = 8000;
  cfg.online.discovery_beta = 0.9;
  cfg.online.warm_start = false;

  const ExperimentConfig back =
      experiment_from_config(config_from_experiment(cfg));
  CHECK(back.scenario.num_nodes == cfg.scenario.num_nodes);
  CHECK(back.scenario.sensors_per_node == cfg.scenario.sensors_per_node);
  CHECK(back.scenario.mode == cfg.scenario.mode);
  CHECK(back.scenario.selfnoise_power == cfg.scenario.selfnoise_power);
  CHECK(back.mode == cfg.mode);
  CHECK(back.algos == cfg.algos);
  CHECK(back.trials == cfg.trials);
  CHECK(back.iterations == cfg.iterations);
  CHECK(back.n_ds == cfg.n_ds);
  CHECK(back.beta == cfg.beta);
  CHECK(back.use_gevd == cfg.use_gevd);
  CHECK(back.gevd_rank == cfg.gevd_rank);
  CHECK(back.reduced_probes == cfg.reduced_probes);
  CHECK(back.padding == cfg.padding);
  CHECK(back.seed == cfg.seed);
  CHECK(back.online.dft_size == cfg.online.dft_size);
  CHECK(back.online.duration_s == cfg.online.duration_s);
  CHECK(back.online.ser_window == cfg.online.ser_window);
  CHECK(back.online.discovery_beta == cfg.online.discovery_beta);
  CHECK(back.online.warm_start == cfg.online.warm_start);
}

TEST_CASE("a single sensors entry is broadcast to every node") {
  const ConfigFile f = ConfigFile::parse_string(
      "[scenario]\nnodes = 4\nsensors = 5\n[experiment]\nalgos = dmwf\n");
  const ExperimentConfig cfg = experiment_from_config(f);
  CHECK(cfg.scenario.sensors_per_node == std::vector<int>{5, 5, 5, 5});
}

TEST_CASE("experiment validation rejects out-of-range settings") {
  ExperimentConfig base;
  base.scenario.sensors_per_node = {5, 5, 5, 5, 5, 5};
  base.algos = {Algo::dmwf};
  CHECK_NOTHROW(base.validate());

  ExperimentConfig bad = base;
  bad.algos.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.beta = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.n_ds = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.mode = ExperimentMode::online;
  bad.online.discovery_beta = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.mode = ExperimentMode::online;
  bad.online.duration_s = 0.1;  // shorter than one SER window
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // Unknown names in the file layer.
  CHECK_THROWS_AS(
      experiment_from_config(ConfigFile::parse_string(
          "[experiment]\nalgos = warp_drive\n")),
      ConfigError);
  CHECK_THROWS_AS(
      experiment_from_config(ConfigFile::parse_string(
          "[scenario]\nobservability = sideways\n[experiment]\nalgos = dmwf\n")),
      ConfigError);
  CHECK_THROWS_AS(
      experiment_from_config(ConfigFile::parse_string(
          "[experiment]\nalgos = dmwf\npadding = bubblewrap\n")),
      ConfigError);
}

TEST_CASE("algorithm names round trip") {
  for (Algo a : {Algo::input, Algo::centralized, Algo::local, Algo::dmwf,
                 Algo::danse_qd, Algo::danse_qdk, Algo::rsdanse_qd,
                 Algo::rsdanse_qdk}) {
    const auto back = algo_from_name(algo_name(a));
    REQUIRE(back.has_value());
    CHECK(*back == a);
  }
  CHECK(!algo_from_name("nope").has_value());
  CHECK(algo_is_danse(Algo::danse_qd));
  CHECK(algo_is_danse(Algo::rsdanse_qdk));
  CHECK(!algo_is_danse(Algo::dmwf));
  CHECK(!algo_is_danse(Algo::centralized));
}
