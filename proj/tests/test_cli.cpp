#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mtorl/cli/commands.hpp"
#include "mtorl/cli/config.hpp"
#include "mtorl/common/errors.hpp"
#include "mtorl/data/journey.hpp"
#include "mtorl/io/checkpoint.hpp"
#include "mtorl/model/network.hpp"

using namespace mtorl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Fresh directory per test, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mtorl_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  REQUIRE(out.good());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool same_bytes(const std::string& a, const std::string& b) {
  return read_file(a) == read_file(b);
}

// Ten observations per channel on two users; channel 0 converts twice,
// channel 1 three times.
std::string hand_log() {
  std::ostringstream out;
  for (int t = 1; t <= 10; ++t) {
    out << R"({"user_id": "a", "ts": )" << t << R"(, "channel": 0, "q": [], "gain": )"
        << (t <= 2 ? 1 : 0) << R"(, "cost": 1.0})" << "\n";
  }
  for (int t = 1; t <= 10; ++t) {
    out << R"({"user_id": "b", "ts": )" << t << R"(, "channel": 1, "q": [], "gain": )"
        << (t <= 3 ? 1 : 0) << R"(, "cost": 1.0})" << "\n";
  }
  return out.str();
}

int run_argv(std::vector<std::string> args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config loading and overrides") {
  SUBCASE("empty path yields an empty object") {
    const json config = cli::load_config("");
    CHECK(config.is_object());
    CHECK(config.empty());
  }

  SUBCASE("missing and malformed files are data errors") {
    TempDir dir("cfg");
    CHECK_THROWS_AS(cli::load_config(dir.str("nope.json")), DataError);
    write_file(dir.str("bad.json"), "{not json");
    CHECK_THROWS_AS(cli::load_config(dir.str("bad.json")), DataError);
  }

  SUBCASE("file content loads") {
    TempDir dir("cfg");
    write_file(dir.str("c.json"), R"({"seed": 4, "training": {"lr": 0.5}})");
    const json config = cli::load_config(dir.str("c.json"));
    CHECK(config.at("seed") == 4);
    CHECK(config.at("training").at("lr") == 0.5);
  }

  SUBCASE("overrides parse values as JSON with a string fallback") {
    json config = json::object();
    cli::apply_override(config, "training.lr=0.25");
    cli::apply_override(config, "training.micro_metrics=true");
    cli::apply_override(config, "model.dilations=[1,2,4]");
    cli::apply_override(config, "data.journeys=logs/run.jsonl");
    cli::apply_override(config, "out=some=dir");
    CHECK(config.at("training").at("lr") == 0.25);
    CHECK(config.at("training").at("micro_metrics") == true);
    CHECK(config.at("model").at("dilations") == json::array({1, 2, 4}));
    CHECK(config.at("data").at("journeys") == "logs/run.jsonl");
    CHECK(config.at("out") == "some=dir");  // only the first '=' splits
  }

  SUBCASE("later overrides win and deep paths build intermediates") {
    json config = json::object();
    cli::apply_override(config, "a.b.c=1");
    cli::apply_override(config, "a.b.c=2");
    CHECK(config.at("a").at("b").at("c") == 2);
  }

  SUBCASE("override rejects bad shapes") {
    json config = json::object();
    CHECK_THROWS_AS(cli::apply_override(config, "no_equals"), ConfigError);
    CHECK_THROWS_AS(cli::apply_override(config, "=5"), ConfigError);
    CHECK_THROWS_AS(cli::apply_override(config, "a..b=1"), ConfigError);
    cli::apply_override(config, "a=3");
    CHECK_THROWS_AS(cli::apply_override(config, "a.b=1"), ConfigError);
  }

  SUBCASE("top level sections are a closed set") {
    json config = json::object();
    for (const char* name : {"seed", "out", "data", "pipeline", "model", "training",
                             "environment", "generate", "procedure", "allocate", "evaluate"}) {
      config[name] = json::object();
    }
    config["seed"] = 1;
    config["out"] = "x";
    CHECK_NOTHROW(cli::check_top_level(config));
    config["trainign"] = json::object();
    CHECK_THROWS_AS(cli::check_top_level(config), ConfigError);
    CHECK_THROWS_AS(cli::check_top_level(json(3)), ConfigError);
  }
}

TEST_CASE("section converters") {
  SUBCASE("training section covers optimizer and loss weights") {
    const json j = json::parse(R"({"lr": 0.01, "batch_size": 16, "max_epochs": 5,
      "patience": 2, "mu": 0.5, "lambda": 0.25, "beta": 0.3, "adam_beta1": 0.8,
      "adam_beta2": 0.9, "adam_eps": 1e-6, "micro_metrics": true})");
    const auto tc = cli::train_config_from_json(j);
    CHECK(tc.lr == 0.01);
    CHECK(tc.batch_size == 16);
    CHECK(tc.max_epochs == 5);
    CHECK(tc.patience == 2);
    CHECK(tc.weights.mu == 0.5);
    CHECK(tc.weights.lambda == 0.25);
    CHECK(tc.weights.beta == 0.3);
    CHECK(tc.adam_beta1 == 0.8);
    CHECK(tc.adam_beta2 == 0.9);
    CHECK(tc.adam_eps == 1e-6);
    CHECK(tc.micro_metrics);
    CHECK_THROWS_AS(cli::train_config_from_json(json{{"lrr", 1}}), ConfigError);
    CHECK_THROWS_AS(cli::train_config_from_json(json{{"lr", "fast"}}), ConfigError);

    const auto defaults = cli::train_config_from_json(json::object());
    CHECK(defaults.lr == 0.001);
    CHECK(defaults.batch_size == 512);
    CHECK(defaults.weights.mu == 0.08);
  }

  SUBCASE("environment defaults give a small separable world") {
    const auto config = cli::environment_config_from_json(json::object(), 9);
    CHECK(config.users == 20);
    CHECK(config.m == 3);
    CHECK(config.seed == 9);
    REQUIRE(config.base_probs.size() == 60);
    CHECK(config.base_probs[0] == 0.8);  // user 0 dominates channel 0
    CHECK(config.base_probs[1] == 0.1);
    CHECK(config.base_probs[4] == 0.8);  // user 1 dominates channel 1
    CHECK(config.costs == std::vector<double>{1.0, 1.0, 1.0});
  }

  SUBCASE("environment shorthand and explicit forms conflict") {
    json j{{"users", 2}, {"m", 2}, {"base_probs", {0.5, 0.5, 0.5, 0.5}},
           {"dominant_prob", 0.9}};
    CHECK_THROWS_AS(cli::environment_config_from_json(j, 0), ConfigError);
    json k{{"m", 2}, {"cost", 2.0}, {"costs", {1.0, 1.0}}};
    CHECK_THROWS_AS(cli::environment_config_from_json(k, 0), ConfigError);
  }

  SUBCASE("environment scalar cost broadcasts") {
    const auto config =
        cli::environment_config_from_json(json{{"users", 4}, {"m", 2}, {"cost", 2.5}}, 1);
    CHECK(config.costs == std::vector<double>{2.5, 2.5});
  }

  SUBCASE("procedure section separates command switches from loop settings") {
    const auto defaults = cli::simulate_settings_from_json(json::object(), 4);
    CHECK(defaults.policy == "model");
    CHECK(defaults.memory_window == 20);
    CHECK_FALSE(defaults.mean_score);
    CHECK_FALSE(defaults.penalty_set);
    CHECK(defaults.procedure.initial_policy.probs == std::vector<double>(4, 0.25));

    const json j = json::parse(R"({"budget": 12.5, "max_exposures": 9, "top_n": 3,
      "eta": 0.25, "exploration_rounds": 2, "stochastic": true,
      "penalty_strength": 0.1, "initial_policy": [0.5, 0.5], "policy": "random",
      "memory_window": 6, "mean_score": true})");
    const auto settings = cli::simulate_settings_from_json(j, 2);
    CHECK(settings.procedure.budget == 12.5);
    CHECK(settings.procedure.max_exposures == 9);
    CHECK(settings.procedure.top_n == 3);
    CHECK(settings.procedure.eta == 0.25);
    CHECK(settings.procedure.exploration_rounds == 2);
    CHECK(settings.procedure.stochastic);
    CHECK(settings.procedure.penalty_strength == 0.1);
    CHECK(settings.penalty_set);
    CHECK(settings.policy == "random");
    CHECK(settings.memory_window == 6);
    CHECK(settings.mean_score);

    CHECK_THROWS_AS(cli::simulate_settings_from_json(json{{"policy", "oracle"}}, 2), ConfigError);
    CHECK_THROWS_AS(cli::simulate_settings_from_json(json{{"memory_window", 0}}, 2), ConfigError);
    CHECK_THROWS_AS(cli::simulate_settings_from_json(json{{"initial_policy", {1.0}}}, 2),
                    ShapeError);
  }

  SUBCASE("allocate and evaluate sections") {
    const auto a = cli::allocate_settings_from_json(
        json{{"tau", 0.7}, {"alpha", 0.4}, {"top_n", 3}, {"m", 5}});
    CHECK(a.tau == 0.7);
    CHECK(a.alpha == 0.4);
    CHECK(a.top_n == 3);
    CHECK(a.m == 5);

    const auto e = cli::evaluate_settings_from_json(json{{"split", "test"}, {"micro", true}});
    CHECK(e.split == "test");
    CHECK(e.micro);
    CHECK_THROWS_AS(cli::evaluate_settings_from_json(json{{"split", "holdout"}}), ConfigError);
  }

  SUBCASE("report emitters") {
    train::EvalReport report;
    report.f1 = 0.5;
    report.precision = 0.25;
    report.recall = 0.75;
    report.reward_metric = 0.125;
    report.valid_steps = 7;
    report.channels_missing = 1;
    const json ej = cli::to_json(report);
    CHECK(ej.at("f1") == 0.5);
    CHECK(ej.at("precision") == 0.25);
    CHECK(ej.at("recall") == 0.75);
    CHECK(ej.at("reward_metric") == 0.125);
    CHECK(ej.at("valid_steps") == 7);
    CHECK(ej.at("channels_missing") == 1);

    alloc::ChannelPolicy policy;
    policy.probs = {0.25, 0.75};
    CHECK(cli::to_json(policy) == json::array({0.25, 0.75}));

    alloc::UserRanking ranking{{"u1", 0.5}, {"u0", 0.25}};
    const json rj = cli::to_json(ranking);
    CHECK(rj[0].at("user") == "u1");
    CHECK(rj[1].at("score") == 0.25);

    sim::RunReport run;
    run.cum_penalized = -1.5;
    run.exposures = 4;
    run.trace.resize(6);
    const json sj = cli::to_json(run);
    CHECK(sj.at("cum_penalized") == -1.5);
    CHECK(sj.at("exposures") == 4);
    CHECK(sj.at("trace_events") == 6);
    CHECK_FALSE(sj.contains("trace"));
  }
}

TEST_CASE("gen-data writes a reloadable deterministic corpus") {
  TempDir dir("gen");
  json config{{"seed", 5},
              {"out", dir.str("one")},
              {"environment", {{"users", 6}, {"m", 2}}},
              {"generate", {{"observations_per_user", 8}}}};
  REQUIRE(cli::cmd_gen_data(config) == 0);

  data::ParseStats stats;
  auto journeys = data::load_journeys(dir.str("one") + "/journeys.jsonl", &stats);
  CHECK(stats.lines_bad == 0);
  REQUIRE(journeys.size() == 6);
  for (const auto& j : journeys) CHECK(j.observations.size() == 8);
  data::load_profiles(dir.str("one") + "/profiles.jsonl", journeys, &stats);
  for (const auto& j : journeys) CHECK(j.f.size() == 2);

  CHECK(fs::exists(dir.str("one") + "/config.json"));
  CHECK(fs::exists(dir.str("one") + "/run_meta.json"));

  config["out"] = dir.str("two");
  REQUIRE(cli::cmd_gen_data(config) == 0);
  CHECK(same_bytes(dir.str("one") + "/journeys.jsonl", dir.str("two") + "/journeys.jsonl"));
  CHECK(same_bytes(dir.str("one") + "/profiles.jsonl", dir.str("two") + "/profiles.jsonl"));

  config["seed"] = 6;
  config["out"] = dir.str("three");
  REQUIRE(cli::cmd_gen_data(config) == 0);
  CHECK_FALSE(same_bytes(dir.str("one") + "/journeys.jsonl", dir.str("three") + "/journeys.jsonl"));
}

TEST_CASE("train, evaluate, and simulate round trip through files") {
  TempDir dir("e2e");
  json gen{{"seed", 11},
           {"out", dir.str("corpus")},
           {"environment", {{"users", 12}, {"m", 2}, {"q_dim", 1}}},
           {"generate", {{"observations_per_user", 40}}}};
  REQUIRE(cli::cmd_gen_data(gen) == 0);

  json train_config{
      {"seed", 11},
      {"out", dir.str("trained")},
      {"data",
       {{"journeys", dir.str("corpus") + "/journeys.jsonl"},
        {"profiles", dir.str("corpus") + "/profiles.jsonl"}}},
      {"pipeline", {{"m", 2}, {"n", 10}, {"min_journey_len", 5}}},
      {"model", {{"d", 8}, {"L1", 1}, {"L2", 1}, {"heads", 1}, {"dilations", {1}}}},
      {"training", {{"max_epochs", 2}, {"batch_size", 32}, {"lambda", 0.0}}}};
  REQUIRE(cli::cmd_train(train_config) == 0);

  SUBCASE("outputs exist and the checkpoint reloads with derived geometry") {
    const auto checkpoint = io::load_checkpoint(dir.str("trained") + "/checkpoint.bin");
    CHECK(checkpoint.config.m == 2);
    CHECK(checkpoint.config.n == 10);
    // one-hot action (2) + reward (1) + q (1) + profile (2)
    CHECK(checkpoint.config.F == 6);
    CHECK(checkpoint.reward.fitted);

    const std::string history = read_file(dir.str("trained") + "/history.csv");
    CHECK(history.rfind("epoch,policy_loss,reward_loss,dpo_loss,total,val_f1,"
                        "val_precision,val_recall\n", 0) == 0);
    CHECK(std::count(history.begin(), history.end(), '\n') == 3);  // header plus two epochs

    // Twelve equal users leave the 0.8/0.1/0.1 user split without a test
    // bucket; the command falls back to the validation split and says so.
    const json eval = json::parse(read_file(dir.str("trained") + "/eval.json"));
    CHECK(eval.at("split") == "validation");
    CHECK(eval.at("valid_steps").get<int>() > 0);
  }

  SUBCASE("the echoed config reproduces the checkpoint byte for byte") {
    json echoed = json::parse(read_file(dir.str("trained") + "/config.json"));
    echoed["out"] = dir.str("retrained");
    REQUIRE(cli::cmd_train(echoed) == 0);
    CHECK(same_bytes(dir.str("trained") + "/checkpoint.bin",
                     dir.str("retrained") + "/checkpoint.bin"));
    CHECK(same_bytes(dir.str("trained") + "/history.csv", dir.str("retrained") + "/history.csv"));
  }

  SUBCASE("a frozen optimizer leaves the initial parameters untouched") {
    json frozen = train_config;
    frozen["out"] = dir.str("frozen");
    frozen["training"]["lr"] = 0.0;
    frozen["training"]["max_epochs"] = 1;
    REQUIRE(cli::cmd_train(frozen) == 0);
    const auto checkpoint = io::load_checkpoint(dir.str("frozen") + "/checkpoint.bin");
    const auto init = model::init_params(checkpoint.config, 11);
    for (const auto& [name, tensor] : init.tensors) {
      const num::Tensor& got = checkpoint.params.tensors.at(name);
      REQUIRE(tensor.size() == got.size());
      for (int i = 0; i < tensor.size(); ++i) REQUIRE(tensor[i] == got[i]);
    }
  }

  SUBCASE("evaluate reuses the checkpoint geometry") {
    json eval_config{{"seed", 11},
                     {"out", dir.str("evaled")},
                     {"data",
                      {{"journeys", dir.str("corpus") + "/journeys.jsonl"},
                       {"profiles", dir.str("corpus") + "/profiles.jsonl"},
                       {"checkpoint", dir.str("trained") + "/checkpoint.bin"}}},
                     {"pipeline", {{"min_journey_len", 5}}}};
    REQUIRE(cli::cmd_evaluate(eval_config) == 0);
    const json eval = json::parse(read_file(dir.str("evaled") + "/eval.json"));
    CHECK(eval.at("split") == "all");
    CHECK(eval.at("samples").get<int>() == 48);  // 12 users x 4 windows

    json bad = eval_config;
    bad["evaluate"] = json{{"split", "sideways"}};
    CHECK(cli::cmd_evaluate(bad) == 1);
  }

  SUBCASE("simulate obeys the budget and repeats bit for bit") {
    json sim_config{{"seed", 21},
                    {"out", dir.str("sim")},
                    {"data", {{"checkpoint", dir.str("trained") + "/checkpoint.bin"}}},
                    {"environment", {{"users", 12}, {"m", 2}, {"q_dim", 1}}},
                    {"procedure",
                     {{"budget", 20.0}, {"max_exposures", 6}, {"top_n", 3},
                      {"exploration_rounds", 1}}}};
    REQUIRE(cli::cmd_simulate(sim_config) == 0);
    const json report = json::parse(read_file(dir.str("sim") + "/report.json"));
    CHECK(report.at("policy") == "model");
    CHECK(report.at("cum_cost").get<double>() <= 20.0 + 1e-12);
    CHECK(report.at("exposures").get<int>() <= 6);

    sim_config["out"] = dir.str("sim2");
    REQUIRE(cli::cmd_simulate(sim_config) == 0);
    CHECK(same_bytes(dir.str("sim") + "/report.json", dir.str("sim2") + "/report.json"));
    CHECK(same_bytes(dir.str("sim") + "/trace.csv", dir.str("sim2") + "/trace.csv"));

    json zero = sim_config;
    zero["out"] = dir.str("sim0");
    zero["procedure"]["budget"] = 0.0;
    REQUIRE(cli::cmd_simulate(zero) == 0);
    const json empty = json::parse(read_file(dir.str("sim0") + "/report.json"));
    CHECK(empty.at("exploration_truncated") == true);
    CHECK(empty.at("trace_events") == 0);

    json random = sim_config;
    random["out"] = dir.str("simr");
    random["procedure"]["policy"] = "random";
    random["data"] = json::object();  // baselines need no checkpoint
    REQUIRE(cli::cmd_simulate(random) == 0);
    const json rreport = json::parse(read_file(dir.str("simr") + "/report.json"));
    CHECK(rreport.at("policy") == "random");

    json greedy = sim_config;
    greedy["out"] = dir.str("simg");
    greedy["procedure"]["policy"] = "greedy";
    greedy["data"] = json{{"journeys", dir.str("corpus") + "/journeys.jsonl"}};
    REQUIRE(cli::cmd_simulate(greedy) == 0);
  }
}

TEST_CASE("allocate reproduces the hand-computed policies") {
  TempDir dir("alloc");
  write_file(dir.str("log.jsonl"), hand_log());

  json config{{"out", dir.str("a0")},
              {"data", {{"journeys", dir.str("log.jsonl")}}},
              {"allocate", {{"alpha", 0.0}, {"top_n", 2}}}};
  REQUIRE(cli::cmd_allocate(config) == 0);
  json policy = json::parse(read_file(dir.str("a0") + "/policy.json"));
  REQUIRE(policy.at("explicit").size() == 2);
  CHECK(policy.at("explicit")[0].get<double>() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(policy.at("explicit")[1].get<double>() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(policy.at("implicit").is_null());
  CHECK(policy.at("merged") == policy.at("explicit"));
  // No predictions: ranking falls back to mean gain, 0.3 beats 0.2.
  CHECK(policy.at("ranking")[0].at("user") == "b");
  CHECK(policy.at("ranking")[1].at("user") == "a");

  SUBCASE("predictions unlock the implicit policy and the merge") {
    std::ostringstream preds;
    for (int i = 0; i < 10; ++i) preds << (i < 2 ? 0.9 : 0.1) << "\n";  // channel 0: 2 above tau
    for (int i = 0; i < 10; ++i) preds << (i < 4 ? 0.9 : 0.1) << "\n";  // channel 1: 4 above tau
    write_file(dir.str("preds.txt"), preds.str());

    json merged_config = config;
    merged_config["out"] = dir.str("a1");
    merged_config["data"]["predictions"] = dir.str("preds.txt");
    merged_config["allocate"] = json{{"alpha", 0.5}, {"tau", 0.5}, {"top_n", 2}};
    REQUIRE(cli::cmd_allocate(merged_config) == 0);
    policy = json::parse(read_file(dir.str("a1") + "/policy.json"));
    CHECK(policy.at("implicit")[0].get<double>() == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(policy.at("implicit")[1].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(policy.at("merged")[0].get<double>() ==
          doctest::Approx(0.5 * 0.4 + 0.5 / 3).epsilon(1e-12));
    CHECK(policy.at("merged")[1].get<double>() ==
          doctest::Approx(0.5 * 0.6 + 1.0 / 3).epsilon(1e-12));
    // With predictions the ranking keys on each user's latest prediction;
    // both end at 0.1 so the tie resolves lexicographically.
    CHECK(policy.at("ranking")[0].at("user") == "a");
  }

  SUBCASE("alpha without predictions is refused") {
    json bad = config;
    bad["out"] = dir.str("a2");
    bad["allocate"]["alpha"] = 0.5;
    CHECK(cli::cmd_allocate(bad) == 1);
  }

  SUBCASE("misaligned or garbled prediction files are refused") {
    write_file(dir.str("short.txt"), "0.5\n0.5\n");
    json bad = config;
    bad["out"] = dir.str("a3");
    bad["data"]["predictions"] = dir.str("short.txt");
    CHECK(cli::cmd_allocate(bad) == 1);

    std::ostringstream garbled;
    for (int i = 0; i < 19; ++i) garbled << "0.5\n";
    garbled << "zero point five\n";
    write_file(dir.str("garbled.txt"), garbled.str());
    bad["data"]["predictions"] = dir.str("garbled.txt");
    CHECK(cli::cmd_allocate(bad) == 1);
  }
}

TEST_CASE("malformed inputs and bad sections exit nonzero") {
  TempDir dir("err");

  SUBCASE("more than one percent bad lines is refused") {
    std::ostringstream out;
    out << hand_log();
    out << "not json at all\n";  // 1 bad of 21 lines
    write_file(dir.str("dirty.jsonl"), out.str());
    json config{{"out", dir.str("o")}, {"data", {{"journeys", dir.str("dirty.jsonl")}}}};
    CHECK(cli::cmd_allocate(config) == 1);
  }

  SUBCASE("unknown sections and missing paths fail fast") {
    json config{{"out", dir.str("o")}, {"bogus", 1}};
    CHECK(cli::cmd_train(config) == 1);
    CHECK(cli::cmd_train(json{{"out", dir.str("o")}}) == 1);  // no data.journeys
    CHECK(cli::cmd_simulate(json{{"out", dir.str("o")}}) == 1);  // model policy, no checkpoint
  }
}

TEST_CASE("the argv front end drives the commands") {
  TempDir dir("argv");

  SUBCASE("gen-data via argv honors flags and overrides") {
    REQUIRE(run_argv({"mtorl", "gen-data", "--seed", "3", "--out", dir.str("g"), "--set",
                      "environment.users=4", "--set", "generate.observations_per_user=6"}) == 0);
    data::ParseStats stats;
    const auto journeys = data::load_journeys(dir.str("g") + "/journeys.jsonl", &stats);
    REQUIRE(journeys.size() == 4);
    CHECK(journeys[0].observations.size() == 6);
    const json echoed = json::parse(read_file(dir.str("g") + "/config.json"));
    CHECK(echoed.at("seed") == 3);
    CHECK(echoed.at("environment").at("users") == 4);
  }

  SUBCASE("help succeeds, nonsense does not") {
    CHECK(run_argv({"mtorl", "--help"}) == 0);
    CHECK(run_argv({"mtorl", "gen-data", "--help"}) == 0);
    CHECK(run_argv({"mtorl"}) != 0);
    CHECK(run_argv({"mtorl", "transmogrify"}) != 0);
    CHECK(run_argv({"mtorl", "gen-data", "--seed", "-4"}) != 0);
  }

  SUBCASE("allocate flags map into the config") {
    write_file(dir.str("log.jsonl"), hand_log());
    REQUIRE(run_argv({"mtorl", "allocate", "--journeys", dir.str("log.jsonl"), "--out",
                      dir.str("a"), "--tau", "0.5", "--alpha", "0", "--top-n", "1"}) == 0);
    const json policy = json::parse(read_file(dir.str("a") + "/policy.json"));
    CHECK(policy.at("ranking").size() == 1);
    CHECK(policy.at("tau") == 0.5);
  }

  SUBCASE("a bad override surfaces as a structured failure") {
    CHECK(run_argv({"mtorl", "gen-data", "--set", "nonsense"}) == 1);
  }
}
