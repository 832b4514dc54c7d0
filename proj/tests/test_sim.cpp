#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mtorl/common/errors.hpp"
#include "mtorl/model/network.hpp"
#include "mtorl/sim/environment.hpp"
#include "mtorl/sim/procedure.hpp"

using namespace mtorl;
using namespace mtorl::sim;

namespace {

EnvironmentConfig tiny_env(int users, int m, std::uint64_t seed) {
  EnvironmentConfig ec;
  ec.users = users;
  ec.m = m;
  ec.base_probs = separable_probs(users, m, 0.8, 0.1);
  ec.costs.assign(static_cast<size_t>(m), 1.0);
  ec.seed = seed;
  return ec;
}

struct StubProvider : PolicyProvider {
  std::function<std::pair<alloc::ChannelPolicy, double>(const data::Journey&)> fn;
  int window = 8;

  std::pair<alloc::ChannelPolicy, double> infer(const data::Journey& memory) override {
    return fn(memory);
  }
  int memory_window() const override { return window; }
};

StubProvider uniform_stub(int m, double score = 0.5, int window = 8) {
  StubProvider stub;
  stub.window = window;
  stub.fn = [m, score](const data::Journey&) {
    alloc::ChannelPolicy p;
    p.probs.assign(static_cast<size_t>(m), 1.0 / static_cast<double>(m));
    return std::make_pair(p, score);
  };
  return stub;
}

alloc::ChannelPolicy uniform_policy(int m) {
  alloc::ChannelPolicy p;
  p.probs.assign(static_cast<size_t>(m), 1.0 / static_cast<double>(m));
  return p;
}

int user_index_of(const std::string& user_id) { return std::stoi(user_id.substr(1)); }

}  // namespace

TEST_CASE("environment stepping") {
  SUBCASE("certain conversion always pays, impossible never does") {
    EnvironmentConfig ec = tiny_env(2, 2, 7);
    ec.base_probs = {1.0, 0.0, 1.0, 0.0};
    ec.gain_value = 2.5;
    ec.costs = {0.5, 0.25};
    Environment env(ec);
    for (int i = 0; i < 50; ++i) {
      data::Observation hit = env.step(0, 0);
      CHECK(hit.gain == 2.5);
      CHECK(hit.cost == 0.5);
      data::Observation miss = env.step(1, 1);
      CHECK(miss.gain == 0.0);
      CHECK(miss.cost == 0.25);
    }
  }

  SUBCASE("empirical conversion rate tracks the configured probability") {
    EnvironmentConfig ec = tiny_env(1, 1, 11);
    ec.base_probs = {0.3};
    ec.costs = {1.0};
    Environment env(ec);
    int hits = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      if (env.step(0, 0).gain > 0.0) ++hits;
    }
    const double rate = static_cast<double>(hits) / draws;
    CHECK(rate == doctest::Approx(0.3).epsilon(0.034));  // +-0.01 absolute
  }

  SUBCASE("timestamps increase and context noise has the configured width") {
    EnvironmentConfig ec = tiny_env(2, 2, 3);
    ec.q_dim = 3;
    Environment env(ec);
    data::Observation a = env.step(0, 0);
    data::Observation b = env.step(1, 1);
    CHECK(a.ts < b.ts);
    CHECK(a.q.size() == 3);
  }

  SUBCASE("identical seeds replay identical observations") {
    Environment e1(tiny_env(3, 2, 99));
    Environment e2(tiny_env(3, 2, 99));
    for (int i = 0; i < 20; ++i) {
      const int u = i % 3;
      const int c = i % 2;
      CHECK(e1.step(u, c) == e2.step(u, c));
    }
  }

  SUBCASE("zero drift leaves probabilities and the rng stream untouched") {
    Environment e1(tiny_env(2, 2, 5));
    Environment e2(tiny_env(2, 2, 5));
    e1.step(0, 0);
    e2.step(0, 0);
    e1.advance_round();
    CHECK(e1.prob(0, 0) == e2.prob(0, 0));
    CHECK(e1.step(1, 1) == e2.step(1, 1));
  }

  SUBCASE("drift keeps probabilities inside the unit interval") {
    EnvironmentConfig ec = tiny_env(4, 3, 13);
    ec.drift = 0.5;
    Environment env(ec);
    for (int round = 0; round < 40; ++round) {
      env.advance_round();
      for (int u = 0; u < 4; ++u) {
        for (int c = 0; c < 3; ++c) {
          CHECK(env.prob(u, c) >= 0.0);
          CHECK(env.prob(u, c) <= 1.0);
        }
      }
    }
  }

  SUBCASE("config guards") {
    EnvironmentConfig ec = tiny_env(2, 2, 0);
    ec.base_probs[0] = 1.5;
    CHECK_THROWS_AS(Environment{ec}, ConfigError);
    ec = tiny_env(2, 2, 0);
    ec.costs[1] = 0.0;
    CHECK_THROWS_AS(Environment{ec}, ConfigError);
    ec = tiny_env(2, 2, 0);
    ec.base_probs.pop_back();
    CHECK_THROWS_AS(Environment{ec}, ShapeError);
    Environment env(tiny_env(2, 2, 0));
    CHECK_THROWS_AS(env.step(2, 0), DataError);
    CHECK_THROWS_AS(env.step(0, 2), DataError);
  }
}

TEST_CASE("separable layout and user names") {
  std::vector<double> probs = separable_probs(4, 3, 0.8, 0.1);
  REQUIRE(probs.size() == 12);
  CHECK(probs[0] == 0.8);   // user 0, channel 0
  CHECK(probs[1] == 0.1);
  CHECK(probs[4] == 0.8);   // user 1, channel 1
  CHECK(probs[9] == 0.8);   // user 3, channel 0
  CHECK(user_name(7) == "u00007");
  CHECK(user_name(0) == "u00000");
}

TEST_CASE("synthetic log generation") {
  EnvironmentConfig ec = tiny_env(40, 3, 21);
  Environment env(ec);
  LogGenConfig gen;
  gen.observations_per_user = 50;
  gen.greedy = 0.6;
  std::vector<data::Journey> log = generate_log(env, gen);

  SUBCASE("shape and ordering") {
    REQUIRE(log.size() == 40);
    for (const data::Journey& j : log) {
      CHECK(j.observations.size() == 50);
      CHECK(j.f.size() == 3);
      for (size_t i = 1; i < j.observations.size(); ++i) {
        CHECK(j.observations[i - 1].ts < j.observations[i].ts);
      }
    }
    CHECK(log[0].user_id == "u00000");
    CHECK(log[39].user_id == "u00039");
  }

  SUBCASE("behavior policy prefers each user's dominant channel") {
    int dominant_picks = 0, total = 0;
    for (size_t u = 0; u < log.size(); ++u) {
      const int dominant = static_cast<int>(u) % 3;
      for (const data::Observation& obs : log[u].observations) {
        dominant_picks += obs.channel == dominant ? 1 : 0;
        ++total;
      }
    }
    // greedy + uniform leakage: 0.6 + 0.4 / 3
    const double share = static_cast<double>(dominant_picks) / total;
    CHECK(share == doctest::Approx(0.7333).epsilon(0.03));
  }

  SUBCASE("profiles echo the conversion signal") {
    for (size_t u = 0; u < log.size(); ++u) {
      const int dominant = static_cast<int>(u) % 3;
      for (int c = 0; c < 3; ++c) {
        if (c != dominant) CHECK(log[u].f[static_cast<size_t>(c)] < log[u].f[static_cast<size_t>(dominant)]);
      }
    }
  }

  SUBCASE("deterministic under the environment seed") {
    Environment replay(tiny_env(40, 3, 21));
    std::vector<data::Journey> again = generate_log(replay, gen);
    REQUIRE(again.size() == log.size());
    CHECK(again[7] == log[7]);
    CHECK(again[39] == log[39]);
  }
}

TEST_CASE("tail window inference sample") {
  data::PipelineConfig pc;
  pc.m = 2;
  pc.n = 4;
  pc.q_dim = 1;
  pc.f_dim = 2;
  pc.min_journey_len = 2;
  pc.reward.fitted = true;  // binary mode needs no fitting parameters

  data::Journey j;
  j.user_id = "u";
  j.f = {0.5, 0.25};
  for (int i = 0; i < 3; ++i) {
    data::Observation obs;
    obs.ts = i;
    obs.channel = i % 2;
    obs.q = {static_cast<double>(i)};
    obs.gain = i == 2 ? 1.0 : 0.0;
    obs.cost = 1.0;
    j.observations.push_back(obs);
  }

  SUBCASE("short memories pad on the left") {
    data::SequenceSample s = data::tail_sample(j, pc);
    CHECK(s.valid_mask == std::vector<std::uint8_t>{0, 1, 1, 1});
    CHECK(s.action_labels == std::vector<int>{-1, 0, 1, 0});
    CHECK(s.reward_labels[3] == 1.0);
    // column 2 fuses the previous action one-hot and previous reward
    CHECK(s.fused.at(0, 2) == 1.0);
    CHECK(s.fused.at(1, 2) == 0.0);
    CHECK(s.fused.at(2, 2) == 0.0);
    // q and f slots
    CHECK(s.fused.at(3, 2) == 1.0);
    CHECK(s.fused.at(4, 2) == 0.5);
    CHECK(s.fused.at(5, 2) == 0.25);
    // padded column stays empty
    for (int r = 0; r < 6; ++r) CHECK(s.fused.at(r, 0) == 0.0);
  }

  SUBCASE("an exactly full memory matches the training window") {
    data::Journey full = j;
    data::Observation extra;
    extra.ts = 3;
    extra.channel = 1;
    extra.q = {9.0};
    extra.gain = 1.0;
    extra.cost = 1.0;
    full.observations.push_back(extra);
    data::SequenceSample tail = data::tail_sample(full, pc);
    std::vector<data::SequenceSample> windows = data::build_sequences(full, pc);
    REQUIRE(windows.size() == 1);
    CHECK(tail.valid_mask == windows[0].valid_mask);
    CHECK(tail.action_labels == windows[0].action_labels);
    CHECK(tail.reward_labels == windows[0].reward_labels);
    REQUIRE(tail.fused.size() == windows[0].fused.size());
    for (int i = 0; i < tail.fused.size(); ++i) CHECK(tail.fused[i] == windows[0].fused[i]);
  }

  SUBCASE("long memories keep the most recent steps and their true predecessor") {
    data::Journey longer = j;
    for (int i = 3; i < 7; ++i) {
      data::Observation obs;
      obs.ts = i;
      obs.channel = 1;
      obs.q = {static_cast<double>(10 * i)};
      obs.gain = 0.0;
      obs.cost = 1.0;
      longer.observations.push_back(obs);
    }
    data::SequenceSample s = data::tail_sample(longer, pc);  // covers obs 3..6
    CHECK(s.valid_mask == std::vector<std::uint8_t>{1, 1, 1, 1});
    CHECK(s.fused.at(3, 0) == 30.0);
    // observation 2 precedes the window: channel 0, gain 1
    CHECK(s.fused.at(0, 0) == 1.0);
    CHECK(s.fused.at(2, 0) == 1.0);
  }

  SUBCASE("guards") {
    data::Journey empty;
    empty.f = {0.0, 0.0};
    CHECK_THROWS_AS(data::tail_sample(empty, pc), DataError);
    data::Journey bad_f = j;
    bad_f.f = {0.5};
    CHECK_THROWS_AS(data::tail_sample(bad_f, pc), ShapeError);
    data::Journey bad_q = j;
    bad_q.observations[1].q = {1.0, 2.0};
    CHECK_THROWS_AS(data::tail_sample(bad_q, pc), ShapeError);
    data::Journey bad_c = j;
    bad_c.observations[0].channel = 5;
    CHECK_THROWS_AS(data::tail_sample(bad_c, pc), DataError);
    data::PipelineConfig unfitted = pc;
    unfitted.reward.fitted = false;
    CHECK_THROWS_AS(data::tail_sample(j, unfitted), ConfigError);
  }
}

TEST_CASE("exploration phase") {
  SUBCASE("uniform initial policy spreads exposures evenly") {
    EnvironmentConfig ec = tiny_env(300, 3, 17);
    Environment env(ec);
    StubProvider stub = uniform_stub(3);
    ProcedureConfig pc;
    pc.budget = 1e9;
    pc.exploration_rounds = 10;
    pc.initial_policy = uniform_policy(3);
    RunState state = explore(env, stub, pc);
    std::vector<int> counts(3, 0);
    for (const TraceEvent& e : state.trace) {
      CHECK(e.round == 0);
      ++counts[static_cast<size_t>(e.channel)];
    }
    REQUIRE(state.trace.size() == 3000);
    for (int c = 0; c < 3; ++c) {
      const double share = counts[static_cast<size_t>(c)] / 3000.0;
      CHECK(std::abs(share - 1.0 / 3.0) < 0.02);
    }
  }

  SUBCASE("one round reaches every user and fills both memories") {
    Environment env(tiny_env(5, 2, 1));
    StubProvider stub = uniform_stub(2, 0.5);
    ProcedureConfig pc;
    pc.budget = 100;
    pc.initial_policy = uniform_policy(2);
    RunState state = explore(env, stub, pc);
    CHECK(state.rewards.size() == 5);
    for (const data::Journey& m : state.memories) CHECK(m.observations.size() == 1);
    for (const alloc::ChannelPolicy& p : state.policies) p.validate();
    CHECK_FALSE(state.exploration_truncated);
    CHECK(state.remaining == doctest::Approx(95.0));
  }

  SUBCASE("a tight budget truncates exploration and flags it") {
    Environment env(tiny_env(10, 2, 2));
    StubProvider stub = uniform_stub(2);
    ProcedureConfig pc;
    pc.budget = 4.0;  // unit costs, ten users
    pc.initial_policy = uniform_policy(2);
    RunState state = explore(env, stub, pc);
    CHECK(state.exploration_truncated);
    CHECK(state.trace.size() == 4);
    CHECK(state.remaining == doctest::Approx(0.0));
    CHECK(state.rewards.size() == 4);  // only reached users are scored
  }

  SUBCASE("deterministic under the environment seed") {
    ProcedureConfig pc;
    pc.budget = 50;
    pc.exploration_rounds = 3;
    pc.initial_policy = uniform_policy(2);
    Environment e1(tiny_env(6, 2, 42));
    Environment e2(tiny_env(6, 2, 42));
    StubProvider s1 = uniform_stub(2);
    StubProvider s2 = uniform_stub(2);
    RunState a = explore(e1, s1, pc);
    RunState b = explore(e2, s2, pc);
    CHECK(a.trace == b.trace);
  }
}

TEST_CASE("exploitation rounds") {
  SUBCASE("weight averaging endpoints") {
    for (double eta : {0.0, 1.0}) {
      Environment env(tiny_env(3, 2, 8));
      StubProvider stub;
      stub.fn = [](const data::Journey&) {
        alloc::ChannelPolicy p;
        p.probs = {0.5, 0.5};
        return std::make_pair(p, 0.9);
      };
      ProcedureConfig pc;
      pc.budget = 100;
      pc.max_exposures = 4;
      pc.top_n = 3;
      pc.eta = eta;
      pc.initial_policy.probs = {0.25, 0.75};
      RunState state = explore(env, stub, pc);
      exploit_round(state, stub, env, pc);
      bool touched = false;
      for (const TraceEvent& e : state.trace) {
        if (e.round == 0) continue;
        const alloc::ChannelPolicy& p =
            state.policies[static_cast<size_t>(state.user_index.at(e.user_id))];
        if (eta == 0.0) {
          CHECK(p.probs[0] == 0.25);
          CHECK(p.probs[1] == 0.75);
        } else {
          CHECK(p.probs[0] == 0.5);
          CHECK(p.probs[1] == 0.5);
        }
        touched = true;
      }
      CHECK(touched);
    }
  }

  SUBCASE("a budget of three unit exposures stops after exactly three") {
    Environment env(tiny_env(2, 2, 9));
    StubProvider stub = uniform_stub(2);
    ProcedureConfig pc;
    pc.budget = 5.0;  // exploration spends 2, exploitation has 3
    pc.max_exposures = 50;
    pc.top_n = 2;
    pc.initial_policy = uniform_policy(2);
    RunReport report = run_procedure(stub, env, pc);
    CHECK(report.exploration_exposures == 2);
    CHECK(report.exposures == 3);
    CHECK(report.cum_cost == doctest::Approx(5.0));
  }

  SUBCASE("the exposure cap stops the loop mid-round") {
    Environment env(tiny_env(4, 2, 10));
    StubProvider stub = uniform_stub(2);
    ProcedureConfig pc;
    pc.budget = 1e6;
    pc.max_exposures = 5;
    pc.top_n = 3;
    pc.initial_policy = uniform_policy(2);
    RunReport report = run_procedure(stub, env, pc);
    CHECK(report.exposures == 5);
    CHECK_FALSE(report.budget_exhausted);
    int max_round = 0;
    for (const TraceEvent& e : report.trace) max_round = std::max(max_round, e.round);
    CHECK(max_round == 5);
  }

  SUBCASE("an unaffordable chosen channel halts the run") {
    EnvironmentConfig ec = tiny_env(2, 2, 11);
    ec.costs = {1.0, 10.0};
    Environment env(ec);
    StubProvider stub;
    stub.fn = [](const data::Journey&) {
      alloc::ChannelPolicy p;
      p.probs = {0.0, 1.0};  // always the expensive channel
      return std::make_pair(p, 0.5);
    };
    ProcedureConfig pc;
    pc.budget = 4.0;  // exploration affords the cheap draws, channel 1 never fits
    pc.max_exposures = 50;
    pc.eta = 1.0;
    pc.initial_policy.probs = {1.0, 0.0};
    RunReport report = run_procedure(stub, env, pc);
    CHECK(report.budget_exhausted);
    CHECK(report.exposures == 0);
    CHECK(report.cum_cost <= 4.0);
  }

  SUBCASE("stochastic selection actually mixes channels") {
    Environment env(tiny_env(2, 3, 12));
    StubProvider stub = uniform_stub(3);
    ProcedureConfig pc;
    pc.budget = 200;
    pc.max_exposures = 60;
    pc.top_n = 2;
    pc.stochastic = true;
    pc.initial_policy = uniform_policy(3);
    RunReport report = run_procedure(stub, env, pc);
    std::vector<int> seen(3, 0);
    for (const TraceEvent& e : report.trace) {
      if (e.round > 0) ++seen[static_cast<size_t>(e.channel)];
    }
    CHECK(seen[0] > 0);
    CHECK(seen[1] > 0);
    CHECK(seen[2] > 0);
  }

  SUBCASE("deterministic selection on a uniform policy sticks to the first channel") {
    Environment env(tiny_env(2, 3, 12));
    StubProvider stub = uniform_stub(3);
    ProcedureConfig pc;
    pc.budget = 40;
    pc.max_exposures = 10;
    pc.initial_policy = uniform_policy(3);
    RunReport report = run_procedure(stub, env, pc);
    for (const TraceEvent& e : report.trace) {
      if (e.round > 0) CHECK(e.channel == 0);
    }
  }
}

TEST_CASE("full procedure invariants") {
  SUBCASE("zero budget reports an empty exploration-only run") {
    Environment env(tiny_env(3, 2, 14));
    StubProvider stub = uniform_stub(2);
    ProcedureConfig pc;
    pc.budget = 0.0;
    pc.max_exposures = 10;
    pc.initial_policy = uniform_policy(2);
    RunReport report = run_procedure(stub, env, pc);
    CHECK(report.exposures == 0);
    CHECK(report.exploration_exposures == 0);
    CHECK(report.exploration_truncated);
    CHECK(report.cum_cost == 0.0);
  }

  SUBCASE("randomized runs never overdraw and keep the accounting identity") {
    Rng meta(77);
    for (int trial = 0; trial < 50; ++trial) {
      const int users = 2 + meta.uniform_int(5);
      const int m = 2 + meta.uniform_int(3);
      EnvironmentConfig ec;
      ec.users = users;
      ec.m = m;
      ec.base_probs.resize(static_cast<size_t>(users * m));
      for (double& p : ec.base_probs) p = meta.uniform();
      ec.costs.resize(static_cast<size_t>(m));
      for (double& w : ec.costs) w = 0.5 + 1.5 * meta.uniform();
      ec.drift = meta.bernoulli(0.5) ? 0.1 : 0.0;
      ec.seed = meta.uniform_int(100000) + 1;
      Environment env(ec);

      StubProvider stub = uniform_stub(m, 0.5, 1 + meta.uniform_int(6));
      ProcedureConfig pc;
      pc.budget = 30.0 * meta.uniform();
      pc.max_exposures = 1 + meta.uniform_int(40);
      pc.top_n = 1 + meta.uniform_int(3);
      pc.eta = meta.uniform();
      pc.exploration_rounds = 1 + meta.uniform_int(2);
      pc.stochastic = meta.bernoulli(0.5);
      pc.penalty_strength = meta.uniform();
      pc.initial_policy = uniform_policy(m);

      RunReport report = run_procedure(stub, env, pc);
      double spent = 0.0, gain = 0.0, penalized = 0.0;
      for (const TraceEvent& e : report.trace) {
        spent += e.cost;
        gain += e.gain;
        penalized += e.penalized;
        CHECK(spent <= pc.budget + 1e-12);
        CHECK(e.remaining_budget == doctest::Approx(pc.budget - spent).epsilon(1e-12));
      }
      CHECK(report.cum_cost == doctest::Approx(spent));
      CHECK(report.cum_gain == doctest::Approx(gain));
      CHECK(std::abs(report.cum_penalized -
                     (report.cum_gain - pc.penalty_strength * report.cum_cost)) < 1e-9);
      CHECK(report.exposures <= pc.max_exposures);
    }
  }

  SUBCASE("journey memories respect the provider window") {
    Environment env(tiny_env(2, 2, 31));
    StubProvider stub = uniform_stub(2, 0.5, 3);
    ProcedureConfig pc;
    pc.budget = 100;
    pc.max_exposures = 30;
    pc.top_n = 2;
    pc.exploration_rounds = 2;
    pc.initial_policy = uniform_policy(2);
    RunState state = explore(env, stub, pc);
    for (int round = 0; round < 20; ++round) {
      if (state.budget_exhausted || state.exposures >= pc.max_exposures) break;
      exploit_round(state, stub, env, pc);
      for (const data::Journey& memory : state.memories) {
        CHECK(memory.observations.size() <= 3);
      }
      for (size_t u = 0; u < state.policies.size(); ++u) {
        if (!state.policies[u].probs.empty()) state.policies[u].validate();
      }
    }
    CHECK(state.exposures == 30);
  }

  SUBCASE("identical seeds give identical reports") {
    ProcedureConfig pc;
    pc.budget = 25;
    pc.max_exposures = 15;
    pc.top_n = 2;
    pc.stochastic = true;
    pc.initial_policy = uniform_policy(2);
    auto run_once = [&pc](std::uint64_t seed) {
      Environment env(tiny_env(4, 2, seed));
      StubProvider stub = uniform_stub(2);
      return run_procedure(stub, env, pc);
    };
    RunReport a = run_once(5);
    RunReport b = run_once(5);
    CHECK(a.trace == b.trace);
    CHECK(a.cum_penalized == b.cum_penalized);
    RunReport c = run_once(6);
    CHECK(a.trace != c.trace);
  }

  SUBCASE("knowing each user's dominant channel beats uniform play") {
    auto run_with = [](PolicyProvider& provider, std::uint64_t seed, bool stochastic) {
      EnvironmentConfig ec = tiny_env(30, 3, seed);
      Environment env(ec);
      ProcedureConfig pc;
      pc.budget = 90;
      pc.max_exposures = 60;
      pc.top_n = 5;
      pc.eta = 1.0;
      pc.stochastic = stochastic;
      pc.initial_policy = uniform_policy(3);
      return run_procedure(provider, env, pc);
    };
    double oracle_total = 0.0, uniform_total = 0.0;
    for (std::uint64_t seed : {101, 102, 103}) {
      StubProvider oracle;
      oracle.fn = [](const data::Journey& memory) {
        alloc::ChannelPolicy p;
        p.probs.assign(3, 0.0);
        p.probs[static_cast<size_t>(user_index_of(memory.user_id) % 3)] = 1.0;
        return std::make_pair(p, 0.5);
      };
      StubProvider uniform = uniform_stub(3);
      oracle_total += run_with(oracle, seed, false).cum_penalized;
      uniform_total += run_with(uniform, seed, true).cum_penalized;
    }
    CHECK(oracle_total > uniform_total);
  }
}

TEST_CASE("model-backed policy provider") {
  model::ModelConfig mc;
  mc.d = 6;
  mc.F = 6;  // 2 channels + reward + q 1 + f 2
  mc.n = 4;
  mc.m = 2;
  mc.L1 = 1;
  mc.L2 = 1;
  mc.L3 = 1;
  mc.dilations = {1};
  mc.heads = 1;
  mc.dropout = 0.0;

  io::Checkpoint ckpt;
  ckpt.config = mc;
  ckpt.reward.fitted = true;
  ckpt.params = model::init_params(mc, 3);

  data::Journey memory;
  memory.user_id = "u00000";
  memory.f = {0.5, 0.5};
  for (int i = 0; i < 2; ++i) {
    data::Observation obs;
    obs.ts = i;
    obs.channel = i;
    obs.q = {0.1 * i};
    obs.gain = static_cast<double>(i);
    obs.cost = 1.0;
    memory.observations.push_back(obs);
  }

  SUBCASE("inference yields a simplex policy and a unit-interval score") {
    ModelPolicy policy(ckpt, 1, 2);
    auto [p, score] = policy.infer(memory);
    REQUIRE(p.probs.size() == 2);
    p.validate();
    CHECK(score > 0.0);
    CHECK(score < 1.0);
    CHECK(policy.memory_window() == 4);
  }

  SUBCASE("score aggregation modes disagree on an uneven memory") {
    ModelPolicy last(ckpt, 1, 2, false);
    ModelPolicy mean(ckpt, 1, 2, true);
    const double a = last.infer(memory).second;
    const double b = mean.infer(memory).second;
    CHECK(a != b);
  }

  SUBCASE("incompatible feature widths are rejected by name") {
    CHECK_THROWS_AS(ModelPolicy(ckpt, 3, 2), ShapeError);
    io::Checkpoint unfitted = ckpt;
    unfitted.reward.fitted = false;
    CHECK_THROWS_AS(ModelPolicy(unfitted, 1, 2), ConfigError);
  }

  SUBCASE("the provider drives a full procedure run") {
    EnvironmentConfig ec = tiny_env(4, 2, 55);
    ec.q_dim = 1;  // match the checkpoint's fused width
    Environment env(ec);
    ModelPolicy policy(ckpt, ec.q_dim, 2, false);
    ProcedureConfig pc;
    pc.budget = 20;
    pc.max_exposures = 10;
    pc.top_n = 2;
    pc.initial_policy = uniform_policy(2);
    RunReport report = run_procedure(policy, env, pc);
    CHECK(report.exposures == 10);
    CHECK(report.cum_cost <= 20.0);
  }
}

TEST_CASE("trace csv output") {
  std::vector<TraceEvent> trace;
  trace.push_back(TraceEvent{0, "u00000", 1, 1.0, 0.5, 9.5, 0.75});
  trace.push_back(TraceEvent{1, "u00001", 0, 0.0, 1.0, 8.5, -0.5});
  const char* path = "trace_test.csv";
  write_trace_csv(path, trace);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream content;
  content << in.rdbuf();
  in.close();
  std::remove(path);
  CHECK(content.str() ==
        "round,user,channel,gain,cost,remaining_budget,penalized_reward\n"
        "0,u00000,1,1,0.5,9.5,0.75\n"
        "1,u00001,0,0,1,8.5,-0.5\n");
}
