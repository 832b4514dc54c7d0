#include "mtorl/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mtorl/alloc/allocation.hpp"
#include "mtorl/cli/config.hpp"
#include "mtorl/common/errors.hpp"
#include "mtorl/common/log.hpp"
#include "mtorl/data/dataset.hpp"
#include "mtorl/data/journey.hpp"
#include "mtorl/io/checkpoint.hpp"
#include "mtorl/io/config_json.hpp"
#include "mtorl/model/config.hpp"
#include "mtorl/sim/environment.hpp"
#include "mtorl/sim/procedure.hpp"
#include "mtorl/train/metrics.hpp"
#include "mtorl/train/trainer.hpp"

namespace mtorl::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int fail(const char* type, const std::string& message) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << "\n";
  return 1;
}

// One structured error line per failure so scripted callers can parse it.
int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    return fail("ConfigError", e.what());
  } catch (const DataError& e) {
    return fail("DataError", e.what());
  } catch (const ShapeError& e) {
    return fail("ShapeError", e.what());
  } catch (const TrainError& e) {
    return fail("TrainError", e.what());
  } catch (const std::exception& e) {
    return fail("InternalError", e.what());
  }
}

json section(const json& config, const char* name) {
  if (!config.contains(name)) return json::object();
  const json& s = config.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be a JSON object");
  return s;
}

std::uint64_t seed_of(const json& config) {
  if (!config.contains("seed")) return 0;
  const json& s = config.at("seed");
  if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
    throw ConfigError("'seed' must be a nonnegative integer");
  }
  return s.get<std::uint64_t>();
}

fs::path out_dir_of(const json& config) {
  std::string out = "out";
  if (config.contains("out")) {
    const json& o = config.at("out");
    if (!o.is_string()) throw ConfigError("'out' must be a string");
    out = o.get<std::string>();
    if (out.empty()) throw ConfigError("'out' must not be empty");
  }
  fs::create_directories(out);
  return fs::path(out);
}

void ensure_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw ConfigError(std::string(what) + " path does not exist: '" + path + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw DataError("failed to write '" + path.string() + "'");
}

std::string now_stamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The echoed configuration reproduces the run when passed back through
// --config; timestamps stay out of it and live in run_meta.json only.
void echo_config(const json& config, std::uint64_t seed, const fs::path& out) {
  json effective = config;
  effective["seed"] = seed;
  effective["out"] = out.string();
  write_text(out / "config.json", effective.dump(2) + "\n");
}

void write_meta(const fs::path& out, const char* command, const std::string& started) {
  const json meta{{"command", command}, {"started_at", started}, {"finished_at", now_stamp()}};
  write_text(out / "run_meta.json", meta.dump(2) + "\n");
}

void emit(json summary) {
  std::cout << summary.dump() << "\n";
}

void check_parse(const data::ParseStats& stats, const std::string& path) {
  if (stats.bad_fraction() > 0.01) {
    throw DataError("'" + path + "' has " + std::to_string(stats.lines_bad) +
                    " malformed lines out of " + std::to_string(stats.lines_total) +
                    "; more than 1% is refused");
  }
  if (stats.lines_bad > 0) {
    logging::warn("'" + path + "' skipped " + std::to_string(stats.lines_bad) +
                  " malformed lines");
  }
}

std::vector<data::Journey> load_log(const DataPaths& paths) {
  if (paths.journeys.empty()) throw ConfigError("data.journeys is required for this command");
  ensure_exists(paths.journeys, "journey log");
  data::ParseStats stats;
  auto journeys = data::load_journeys(paths.journeys, &stats);
  check_parse(stats, paths.journeys);
  if (!paths.profiles.empty()) {
    ensure_exists(paths.profiles, "profile file");
    data::ParseStats pstats;
    data::load_profiles(paths.profiles, journeys, &pstats);
    check_parse(pstats, paths.profiles);
  }
  logging::info("loaded " + std::to_string(journeys.size()) + " journeys from '" +
                paths.journeys + "'");
  return journeys;
}

// Plain text, one predicted reward per non-empty line, aligned with the
// user-sorted, time-sorted observation order of the journey log.
std::vector<double> load_predictions(const std::string& path, std::size_t expected) {
  ensure_exists(path, "predictions");
  std::ifstream in(path);
  if (!in) throw DataError("cannot read predictions file '" + path + "'");
  std::vector<double> preds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t pos = 0;
    double value = 0.0;
    try {
      value = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw DataError("predictions file '" + path + "' line " + std::to_string(lineno) +
                      " is not a number");
    }
    if (line.find_first_not_of(" \t\r", pos) != std::string::npos) {
      throw DataError("predictions file '" + path + "' line " + std::to_string(lineno) +
                      " is not a number");
    }
    preds.push_back(value);
  }
  if (preds.size() != expected) {
    throw DataError("predictions file '" + path + "' holds " + std::to_string(preds.size()) +
                    " values but the journey log has " + std::to_string(expected) +
                    " observations");
  }
  return preds;
}

int argmax_prob(const std::vector<double>& probs) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(probs.size()); ++j) {
    if (probs[static_cast<std::size_t>(j)] > probs[static_cast<std::size_t>(best)]) best = j;
  }
  return best;
}

}  // namespace

int cmd_gen_data(const json& config) {
  return guarded([&] {
    check_top_level(config);
    const std::uint64_t seed = seed_of(config);
    const fs::path out = out_dir_of(config);
    const std::string started = now_stamp();

    const auto env_config = environment_config_from_json(section(config, "environment"), seed);
    const auto gen_config = log_gen_config_from_json(section(config, "generate"));
    sim::Environment env(env_config);
    const auto journeys = sim::generate_log(env, gen_config);

    const fs::path journeys_path = out / "journeys.jsonl";
    const fs::path profiles_path = out / "profiles.jsonl";
    data::save_journeys(journeys_path.string(), journeys);
    data::save_profiles(profiles_path.string(), journeys);
    echo_config(config, seed, out);

    std::size_t observations = 0;
    for (const auto& j : journeys) observations += j.observations.size();
    emit(json{{"command", "gen-data"},
              {"journeys", journeys.size()},
              {"observations", observations},
              {"channels", env_config.m},
              {"journeys_path", journeys_path.string()},
              {"profiles_path", profiles_path.string()}});
    write_meta(out, "gen-data", started);
  });
}

int cmd_train(const json& config) {
  return guarded([&] {
    check_top_level(config);
    const std::uint64_t seed = seed_of(config);
    const fs::path out = out_dir_of(config);
    const std::string started = now_stamp();

    const auto journeys = load_log(data_paths_from_json(section(config, "data")));

    const json pipeline_section = section(config, "pipeline");
    data::PipelineConfig pipeline = io::pipeline_config_from_json(pipeline_section);
    if (!pipeline_section.contains("split_seed")) pipeline.split_seed = seed;
    data::PipelineReport report;
    const auto split = data::build_dataset(journeys, pipeline, &report);
    logging::info("dataset: " + std::to_string(split.train.size()) + " train / " +
                  std::to_string(split.validation.size()) + " validation / " +
                  std::to_string(split.test.size()) + " test samples");

    // The data pipeline owns the input geometry; the model section cannot
    // contradict it.
    const json model_section = section(config, "model");
    model::ModelConfig model_config = io::model_config_from_json(model_section);
    model_config.m = pipeline.m;
    model_config.n = pipeline.n;
    model_config.F =
        pipeline.m + report.fitted_reward.reward_width() + report.q_dim + report.f_dim;
    if (!model_section.contains("reward_head")) {
      model_config.reward_head = model::reward_head_for(report.fitted_reward.mode);
    }
    if (!model_section.contains("reward_dim")) {
      model_config.reward_dim = model::reward_dim_for(report.fitted_reward);
    }

    train::TrainConfig train_config = train_config_from_json(section(config, "training"));
    train_config.seed = seed;
    train_config.history_path = (out / "history.csv").string();

    const auto result = train::fit(split.train, split.validation, model_config, train_config);

    const fs::path checkpoint_path = out / "checkpoint.bin";
    io::save_checkpoint(checkpoint_path.string(),
                        io::Checkpoint{model_config, report.fitted_reward, result.params});

    const std::vector<data::SequenceSample>* eval_samples = &split.test;
    const char* eval_split = "test";
    if (eval_samples->empty()) {
      logging::warn("test split is empty; evaluating on the validation split");
      eval_samples = &split.validation;
      eval_split = "validation";
    }
    if (eval_samples->empty()) {
      logging::warn("validation split is empty too; evaluating on the training split");
      eval_samples = &split.train;
      eval_split = "train";
    }
    const auto eval = train::evaluate(result.params, model_config, *eval_samples,
                                      train_config.micro_metrics);
    json eval_json = to_json(eval);
    eval_json["split"] = eval_split;
    write_text(out / "eval.json", eval_json.dump(2) + "\n");
    echo_config(config, seed, out);

    emit(json{{"command", "train"},
              {"checkpoint", checkpoint_path.string()},
              {"epochs", result.history.size()},
              {"best_epoch", result.best_epoch},
              {"best_val_f1", result.best_val_f1},
              {"early_stopped", result.early_stopped},
              {"final_policy_loss", result.history.empty() ? 0.0 : result.history.back().policy_loss},
              {"eval", eval_json},
              {"samples",
               json{{"train", split.train.size()},
                    {"validation", split.validation.size()},
                    {"test", split.test.size()}}}});
    write_meta(out, "train", started);
  });
}

int cmd_evaluate(const json& config) {
  return guarded([&] {
    check_top_level(config);
    const std::uint64_t seed = seed_of(config);
    const fs::path out = out_dir_of(config);
    const std::string started = now_stamp();

    const DataPaths paths = data_paths_from_json(section(config, "data"));
    if (paths.checkpoint.empty()) throw ConfigError("data.checkpoint is required for evaluate");
    ensure_exists(paths.checkpoint, "checkpoint");
    const io::Checkpoint checkpoint = io::load_checkpoint(paths.checkpoint);

    const auto journeys = load_log(paths);

    // Window geometry and the reward spec come from the checkpoint so the
    // metrics match what the model was trained to see; no refitting.
    const json pipeline_section = section(config, "pipeline");
    data::PipelineConfig pipeline = io::pipeline_config_from_json(pipeline_section);
    pipeline.m = checkpoint.config.m;
    pipeline.n = checkpoint.config.n;
    pipeline.reward = checkpoint.reward;
    if (!pipeline_section.contains("split_seed")) pipeline.split_seed = seed;
    data::PipelineReport report;
    const auto split = data::build_dataset(journeys, pipeline, &report);

    const int fused =
        pipeline.m + checkpoint.reward.reward_width() + report.q_dim + report.f_dim;
    if (fused != checkpoint.config.F) {
      throw ShapeError("feature widths fuse to " + std::to_string(fused) +
                       " but the checkpoint's embed.weight expects F=" +
                       std::to_string(checkpoint.config.F));
    }

    const EvaluateSettings settings = evaluate_settings_from_json(section(config, "evaluate"));
    std::vector<data::SequenceSample> samples;
    if (settings.split == "all") {
      samples.reserve(split.train.size() + split.validation.size() + split.test.size());
      for (const auto* part : {&split.train, &split.validation, &split.test}) {
        samples.insert(samples.end(), part->begin(), part->end());
      }
    } else if (settings.split == "train") {
      samples = split.train;
    } else if (settings.split == "validation") {
      samples = split.validation;
    } else {
      samples = split.test;
    }
    if (samples.empty()) {
      throw DataError("split '" + settings.split + "' contains no samples");
    }

    const auto eval = train::evaluate(checkpoint.params, checkpoint.config, samples,
                                      settings.micro);
    json eval_json = to_json(eval);
    eval_json["split"] = settings.split;
    eval_json["samples"] = samples.size();
    write_text(out / "eval.json", eval_json.dump(2) + "\n");
    echo_config(config, seed, out);

    json summary = eval_json;
    summary["command"] = "evaluate";
    emit(summary);
    write_meta(out, "evaluate", started);
  });
}

int cmd_simulate(const json& config) {
  return guarded([&] {
    check_top_level(config);
    const std::uint64_t seed = seed_of(config);
    const fs::path out = out_dir_of(config);
    const std::string started = now_stamp();

    const auto env_config = environment_config_from_json(section(config, "environment"), seed);
    SimulateSettings settings = simulate_settings_from_json(section(config, "procedure"),
                                                            env_config.m);
    const DataPaths paths = data_paths_from_json(section(config, "data"));

    std::unique_ptr<sim::PolicyProvider> provider;
    if (settings.policy == "model") {
      if (paths.checkpoint.empty()) {
        throw ConfigError("data.checkpoint is required for the model policy");
      }
      ensure_exists(paths.checkpoint, "checkpoint");
      io::Checkpoint checkpoint = io::load_checkpoint(paths.checkpoint);
      // The trained penalty strength travels with the checkpoint unless the
      // config overrides it.
      if (!settings.penalty_set) {
        settings.procedure.penalty_strength = checkpoint.reward.penalty_strength;
      }
      provider = std::make_unique<sim::ModelPolicy>(std::move(checkpoint), env_config.q_dim,
                                                    env_config.m, settings.mean_score);
    } else if (settings.policy == "random") {
      provider = std::make_unique<sim::UniformPolicy>(env_config.m, settings.memory_window);
    } else {
      if (paths.journeys.empty()) {
        throw ConfigError(
            "data.journeys is required for the greedy policy; global conversion rates come "
            "from the log");
      }
      const auto journeys = load_log(paths);
      std::vector<int> channels;
      std::vector<double> gains;
      for (const auto& j : journeys) {
        for (const auto& obs : j.observations) {
          channels.push_back(obs.channel);
          gains.push_back(obs.gain);
        }
      }
      const auto stats = alloc::accumulate_stats(env_config.m, channels, gains, nullptr, 0.5);
      const int best = argmax_prob(alloc::explicit_policy(stats).probs);
      logging::info("greedy policy locks onto channel " + std::to_string(best));
      provider = std::make_unique<sim::FixedChannelPolicy>(best, env_config.m,
                                                           settings.memory_window);
    }

    sim::Environment env(env_config);
    const sim::RunReport report = sim::run_procedure(*provider, env, settings.procedure);

    const fs::path trace_path = out / "trace.csv";
    sim::write_trace_csv(trace_path.string(), report.trace);
    json report_json = to_json(report);
    report_json["policy"] = settings.policy;
    write_text(out / "report.json", report_json.dump(2) + "\n");
    echo_config(config, seed, out);

    json summary = report_json;
    summary["command"] = "simulate";
    summary["trace_path"] = trace_path.string();
    emit(summary);
    write_meta(out, "simulate", started);
  });
}

int cmd_allocate(const json& config) {
  return guarded([&] {
    check_top_level(config);
    const std::uint64_t seed = seed_of(config);
    const fs::path out = out_dir_of(config);
    const std::string started = now_stamp();

    const DataPaths paths = data_paths_from_json(section(config, "data"));
    const auto journeys = load_log(paths);
    const AllocateSettings settings = allocate_settings_from_json(section(config, "allocate"));

    std::vector<int> channels;
    std::vector<double> gains;
    for (const auto& j : journeys) {
      for (const auto& obs : j.observations) {
        channels.push_back(obs.channel);
        gains.push_back(obs.gain);
      }
    }
    if (channels.empty()) throw DataError("journey log holds no observations");
    int m = settings.m;
    if (m <= 0) {
      m = 1 + *std::max_element(channels.begin(), channels.end());
    }

    std::vector<double> preds;
    bool have_preds = false;
    if (!paths.predictions.empty()) {
      preds = load_predictions(paths.predictions, channels.size());
      have_preds = true;
    }
    if (settings.alpha > 0.0 && !have_preds) {
      throw DataError("alpha > 0 weighs the implicit policy, which needs a predictions file");
    }

    const auto stats = alloc::accumulate_stats(m, channels, gains,
                                               have_preds ? &preds : nullptr, settings.tau);
    const auto explicit_p = alloc::explicit_policy(stats);
    alloc::ChannelPolicy merged = explicit_p;
    json implicit_json = nullptr;
    if (have_preds) {
      const auto implicit_p = alloc::implicit_policy(stats);
      implicit_json = to_json(implicit_p);
      merged = alloc::merge_policies(explicit_p, implicit_p, settings.alpha);
    }

    // Ranking score: the user's most recent predicted reward, or the mean
    // observed gain when no predictions are available.
    std::map<std::string, double> scores;
    std::size_t index = 0;
    for (const auto& j : journeys) {
      if (j.observations.empty()) continue;
      if (have_preds) {
        scores[j.user_id] = preds[index + j.observations.size() - 1];
      } else {
        double sum = 0.0;
        for (const auto& obs : j.observations) sum += obs.gain;
        scores[j.user_id] = sum / static_cast<double>(j.observations.size());
      }
      index += j.observations.size();
    }
    const auto ranking = alloc::rank_users(scores, settings.top_n);

    json policy_json{{"tau", settings.tau},
                     {"alpha", settings.alpha},
                     {"channels", m},
                     {"explicit", to_json(explicit_p)},
                     {"implicit", implicit_json},
                     {"merged", to_json(merged)},
                     {"ranking", to_json(ranking)}};
    write_text(out / "policy.json", policy_json.dump(2) + "\n");
    echo_config(config, seed, out);

    json summary = policy_json;
    summary["command"] = "allocate";
    emit(summary);
    write_meta(out, "allocate", started);
  });
}

namespace {

struct SubArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::int64_t seed = 0;
  std::string out;
  std::string journeys;
  std::string profiles;
  std::string predictions;
  std::string checkpoint;
  std::string policy;
  std::string split;
  double budget = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  std::int64_t top_n = 0;
};

void add_common(CLI::App* sub, SubArgs& args) {
  sub->add_option("--config", args.config_path, "JSON configuration file");
  sub->add_option("--set", args.sets, "Override, repeatable: section.key=value");
  sub->add_option("--seed", args.seed, "Global seed")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", args.out, "Output directory");
}

void set_in_section(json& config, const char* name, const char* key, json value) {
  json& sec = config[name];
  if (sec.is_null()) sec = json::object();
  if (!sec.is_object()) {
    throw ConfigError(std::string("section '") + name + "' must be a JSON object");
  }
  sec[key] = std::move(value);
}

// File < --set < dedicated flags; later wins.
json base_config(const CLI::App* sub, const SubArgs& args) {
  json config = load_config(args.config_path);
  if (!config.is_object()) throw ConfigError("config root must be a JSON object");
  for (const auto& assignment : args.sets) apply_override(config, assignment);
  if (sub->count("--seed") > 0) config["seed"] = args.seed;
  if (sub->count("--out") > 0) config["out"] = args.out;
  return config;
}

int dispatch(const CLI::App* sub, const SubArgs& args, int (*cmd)(const json&),
             const std::function<void(json&)>& extras = {}) {
  json config;
  const int rc = guarded([&] {
    config = base_config(sub, args);
    if (extras) extras(config);
  });
  if (rc != 0) return rc;
  return cmd(config);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Offline multi-task policy engine for multi-channel ad delivery"};
  app.require_subcommand(1);

  SubArgs gen_args, train_args, eval_args, sim_args, alloc_args;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic journey log");
  add_common(gen, gen_args);

  auto* train = app.add_subcommand("train", "Train a policy checkpoint from a journey log");
  add_common(train, train_args);
  train->add_option("--journeys", train_args.journeys, "Journey log path");
  train->add_option("--profiles", train_args.profiles, "Profile file path");

  auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint against a journey log");
  add_common(eval, eval_args);
  eval->add_option("--journeys", eval_args.journeys, "Journey log path");
  eval->add_option("--profiles", eval_args.profiles, "Profile file path");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint path");
  eval->add_option("--split", eval_args.split, "Samples to score: all, train, validation, test");

  auto* sim = app.add_subcommand("simulate",
                                 "Run the budgeted exposure loop in a synthetic environment");
  add_common(sim, sim_args);
  sim->add_option("--policy", sim_args.policy, "Policy provider: model, random, greedy");
  sim->add_option("--budget", sim_args.budget, "Total exposure budget");
  sim->add_option("--checkpoint", sim_args.checkpoint, "Checkpoint path");
  sim->add_option("--journeys", sim_args.journeys, "Journey log path (greedy policy)");

  auto* alloc_cmd =
      app.add_subcommand("allocate", "Derive channel budget policies from a journey log");
  add_common(alloc_cmd, alloc_args);
  alloc_cmd->add_option("--journeys", alloc_args.journeys, "Journey log path");
  alloc_cmd->add_option("--predictions", alloc_args.predictions,
                        "Predicted rewards, one per observation");
  alloc_cmd->add_option("--tau", alloc_args.tau, "Prediction threshold for the implicit policy");
  alloc_cmd->add_option("--alpha", alloc_args.alpha, "Implicit share of the merged policy");
  alloc_cmd->add_option("--top-n", alloc_args.top_n, "Ranking size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (gen->parsed()) return dispatch(gen, gen_args, cmd_gen_data);
  if (train->parsed()) {
    return dispatch(train, train_args, cmd_train, [&](json& config) {
      if (train->count("--journeys")) set_in_section(config, "data", "journeys", train_args.journeys);
      if (train->count("--profiles")) set_in_section(config, "data", "profiles", train_args.profiles);
    });
  }
  if (eval->parsed()) {
    return dispatch(eval, eval_args, cmd_evaluate, [&](json& config) {
      if (eval->count("--journeys")) set_in_section(config, "data", "journeys", eval_args.journeys);
      if (eval->count("--profiles")) set_in_section(config, "data", "profiles", eval_args.profiles);
      if (eval->count("--checkpoint")) {
        set_in_section(config, "data", "checkpoint", eval_args.checkpoint);
      }
      if (eval->count("--split")) set_in_section(config, "evaluate", "split", eval_args.split);
    });
  }
  if (sim->parsed()) {
    return dispatch(sim, sim_args, cmd_simulate, [&](json& config) {
      if (sim->count("--policy")) set_in_section(config, "procedure", "policy", sim_args.policy);
      if (sim->count("--budget")) set_in_section(config, "procedure", "budget", sim_args.budget);
      if (sim->count("--checkpoint")) {
        set_in_section(config, "data", "checkpoint", sim_args.checkpoint);
      }
      if (sim->count("--journeys")) set_in_section(config, "data", "journeys", sim_args.journeys);
    });
  }
  return dispatch(alloc_cmd, alloc_args, cmd_allocate, [&](json& config) {
    if (alloc_cmd->count("--journeys")) {
      set_in_section(config, "data", "journeys", alloc_args.journeys);
    }
    if (alloc_cmd->count("--predictions")) {
      set_in_section(config, "data", "predictions", alloc_args.predictions);
    }
    if (alloc_cmd->count("--tau")) set_in_section(config, "allocate", "tau", alloc_args.tau);
    if (alloc_cmd->count("--alpha")) set_in_section(config, "allocate", "alpha", alloc_args.alpha);
    if (alloc_cmd->count("--top-n")) {
      set_in_section(config, "allocate", "top_n", static_cast<int>(alloc_args.top_n));
    }
  });
}

}  // namespace mtorl::cli
