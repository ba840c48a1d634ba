// Copyright 2026 The IntentScale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// intentscale: serve | simulate | replay | train
//
// Exit codes: 0 ok, 1 usage, 2 I/O or bad input file, 3 session timed out
// before completion, 4 replay diverged from the log.

#include "intentscale/server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

namespace {

using namespace intentscale;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitIncomplete = 3;
constexpr int kExitReplayMismatch = 4;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::usage:
      return kExitUsage;
    default:
      return kExitIo;
  }
}

struct SimulateArgs {
  std::string scenario;
  std::string mode = "adaptive";
  std::optional<std::uint64_t> seed;
  std::string out = "metrics.json";
  std::string log;
};

int run_simulate(const SimulateArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  const ModeSpec mode = ModeSpec::parse(a.mode);
  const std::uint64_t seed = a.seed.value_or(sc.seed);
  const auto res = run_headless(sc, mode, seed);
  detail::write_file(a.out, metrics_to_string(res.metrics));
  if (!a.log.empty()) write_log(a.log, res.log);
  std::cerr << "simulate: " << sc.name << " mode=" << res.metrics.mode << " seed=" << seed
            << " n_clutch=" << res.metrics.n_clutch << " tct_s=" << res.metrics.tct_s
            << " accuracy=" << res.metrics.label_accuracy << (res.metrics.complete ? "" : " INCOMPLETE") << "\n";
  return res.metrics.complete ? kExitOk : kExitIncomplete;
}

struct ReplayArgs {
  std::string log;
  std::string snapshot;
};

int run_replay(const ReplayArgs& a) {
  const SessionLog log = load_log(a.log);
  IntentModels models;
  if (!a.snapshot.empty()) models = load_snapshot(a.snapshot).models;
  const auto rr = replay_log(log, models);
  std::cout << "replay: " << log.records.size() << " ticks, " << rr.mismatches << " mismatches";
  if (rr.first_mismatch) std::cout << " (first at record " << *rr.first_mismatch << ")";
  std::cout << "\n";
  return rr.mismatches == 0 ? kExitOk : kExitReplayMismatch;
}

struct TrainArgs {
  std::string log;
  std::string out = "snapshot.json";
  std::optional<std::size_t> n;
};

int run_train(const TrainArgs& a) {
  const SessionLog log = load_log(a.log);
  const auto snap = train_from_log(log, a.n.value_or(log.header.controller.n_retrain));
  save_snapshot(a.out, snap);
  std::size_t trained = 0;
  for (const auto& m : snap.models) trained += m.has_value();
  std::cerr << "train: " << trained << "/3 models written to " << a.out << "\n";
  return trained == 3 ? kExitOk : kExitIo;
}

struct ServeArgs {
  std::string scenario;
  std::string snapshot;
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  std::string static_dir;
  std::string log;
  double duration = 0.0;
  std::size_t state_every = 3;
};

int run_serve(const ServeArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  IntentModels models;
  if (!a.snapshot.empty()) {
    auto snap = load_snapshot(a.snapshot);
    models = snap.models;
    sc.controller.params = snap.params;
  }
  ServerConfig cfg;
  cfg.address = a.address;
  cfg.port = a.port;
  cfg.tick_hz = sc.tick_hz;
  cfg.static_dir = a.static_dir;
  cfg.log_path = a.log;
  cfg.state_every = a.state_every;
  EngineServer server(cfg, sc, models);
  const auto port = server.start();
  std::cout << "serving on http://" << a.address << ":" << port << " (websocket /ws)" << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (a.duration > 0.0 && std::chrono::steady_clock::now() - t0 >= std::chrono::duration<double>(a.duration)) break;
  }
  server.stop();
  const auto st = server.stats();
  std::cerr << "serve: " << st.ticks << " ticks, " << st.frames_sent << " frames sent, " << st.frames_dropped
            << " dropped, " << st.poses_dropped << " poses dropped\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intent-driven motion scaling engine"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a headless session and write metrics.json");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON")->required()->envname("INTENTSCALE_SCENARIO");
  simulate->add_option("--mode", sim.mode, "fixed:<s> | adaptive | adaptive-ma")->envname("INTENTSCALE_MODE");
  simulate->add_option("--seed", sim.seed, "RNG seed (defaults to the scenario seed)")->envname("INTENTSCALE_SEED");
  simulate->add_option("--out", sim.out, "Metrics output path")->envname("INTENTSCALE_OUT");
  simulate->add_option("--log", sim.log, "Optional JSONL session log")->envname("INTENTSCALE_LOG");

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "Re-run a logged session and compare the scale sequence");
  replay->add_option("--log", rep.log, "JSONL session log")->required()->envname("INTENTSCALE_LOG");
  replay->add_option("--snapshot", rep.snapshot, "Initial model snapshot")->envname("INTENTSCALE_SNAPSHOT");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Fit the three intent models from a session log");
  train->add_option("--log", tr.log, "JSONL session log")->required()->envname("INTENTSCALE_LOG");
  train->add_option("--out", tr.out, "Snapshot output path")->envname("INTENTSCALE_OUT");
  train->add_option("--n", tr.n, "Most recent feature samples to use");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run the live engine with the WebSocket interface");
  serve->add_option("--scenario", srv.scenario, "Scenario JSON")->required()->envname("INTENTSCALE_SCENARIO");
  serve->add_option("--snapshot", srv.snapshot, "Model snapshot to start from")->envname("INTENTSCALE_SNAPSHOT");
  serve->add_option("--address", srv.address, "Listen address")->envname("INTENTSCALE_ADDRESS");
  serve->add_option("--port", srv.port, "Listen port (0 = ephemeral)")->envname("INTENTSCALE_PORT");
  serve->add_option("--static", srv.static_dir, "Directory served over HTTP")->envname("INTENTSCALE_STATIC");
  serve->add_option("--log", srv.log, "JSONL session log")->envname("INTENTSCALE_LOG");
  serve->add_option("--duration", srv.duration, "Stop after this many seconds (0 = until signalled)");
  serve->add_option("--state-every", srv.state_every, "Send a state frame every N ticks")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*replay) return run_replay(rep);
    if (*train) return run_train(tr);
    if (*serve) return run_serve(srv);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}
