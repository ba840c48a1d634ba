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

#pragma once

// JSON surfaces: wire messages (one object per WebSocket text frame),
// JSONL session logs, model snapshots, scenario files and metrics output.

#include "intentscale/controller.hpp"
#include "intentscale/sim.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

namespace intentscale {

using ojson = nlohmann::ordered_json;

namespace detail {

inline ojson vec_json(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }

template <std::size_t N>
ojson array_json(const std::array<double, N>& a) {
  ojson out = ojson::array();
  for (double x : a) out.push_back(x);
  return out;
}

inline void require_finite(double x, const char* field) {
  if (!std::isfinite(x)) throw Error(Errc::non_finite, std::string("non-finite value in field '") + field + "'");
}

inline const ojson& field(const ojson& j, const char* name) {
  if (!j.is_object()) throw Error(Errc::schema, "expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw Error(Errc::schema, std::string("missing field '") + name + "'");
  return *it;
}

inline double number(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_number()) throw Error(Errc::schema, std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

inline bool boolean(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_boolean()) throw Error(Errc::schema, std::string("field '") + name + "' must be a boolean");
  return v.get<bool>();
}

inline std::string string(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) throw Error(Errc::schema, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

inline std::uint64_t unsigned_int(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw Error(Errc::schema, std::string("field '") + name + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

template <std::size_t N>
std::array<double, N> numbers(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_array() || v.size() != N) {
    throw Error(Errc::schema, std::string("field '") + name + "' must be an array of " + std::to_string(N));
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) throw Error(Errc::schema, std::string("field '") + name + "' must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

inline Vec3 vec3(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (v.is_array() && v.size() == 2) {
    const auto a = numbers<2>(j, name);
    return {a[0], a[1], 0.0};
  }
  const auto a = numbers<3>(j, name);
  return {a[0], a[1], a[2]};
}

template <class T>
T value_or(const ojson& j, const char* name, T fallback) {
  auto it = j.find(name);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::schema, std::string("field '") + name + "' has the wrong type");
  }
}

inline ojson parse(const std::string& text) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::malformed, std::string("malformed JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(Errc::io, "write to '" + path + "' failed");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Wire protocol

inline constexpr int kProtocolVersion = 1;

using Array3 = std::array<double, 3>;

inline Array3 to_array(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

struct PosePayload {
  Array3 p{};
  bool operator==(const PosePayload&) const = default;
};

struct ClutchPayload {
  bool pressed = false;
  bool operator==(const ClutchPayload&) const = default;
};

// Normalized slider positions [reactivity, scale fine, scale coarse].
struct ParamsPayload {
  ParamVector v{};
  bool operator==(const ParamsPayload&) const = default;
};

struct StatePayload {
  double t = 0.0;
  double s_intent = 1.0;
  MotionLabel label = MotionLabel::fine;
  MembershipPair fused{0.0, 1.0};
  Array3 follower{};
  bool clutched = false;
  std::uint64_t n_clutch = 0;
  bool degraded = true;
  ParamVector v{};       // acknowledged normalized parameters
  ParamVector theta{};   // the same parameters denormalized [rho, s_fine, s_coarse]
  bool operator==(const StatePayload&) const = default;
};

struct HelloPayload {
  int protocol = kProtocolVersion;
  std::string role = "engine";
  double tick_hz = 100.0;
  bool operator==(const HelloPayload&) const = default;
};

struct ErrorPayload {
  std::string code;
  std::string message;
  bool operator==(const ErrorPayload&) const = default;
};

enum class MessageType { pose, clutch, params, state, hello, error };

constexpr std::string_view to_string(MessageType t) noexcept {
  switch (t) {
    case MessageType::pose: return "pose";
    case MessageType::clutch: return "clutch";
    case MessageType::params: return "params";
    case MessageType::state: return "state";
    case MessageType::hello: return "hello";
    case MessageType::error: return "error";
  }
  return "unknown";
}

using Payload = std::variant<PosePayload, ClutchPayload, ParamsPayload, StatePayload, HelloPayload, ErrorPayload>;

struct WireMessage {
  std::uint64_t seq = 0;
  Payload payload;

  MessageType type() const noexcept { return static_cast<MessageType>(payload.index()); }
  bool operator==(const WireMessage&) const = default;
};

namespace detail {

inline void check_unit_interval(const ParamVector& v) {
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw Error(Errc::range, "normalized parameter outside [0,1]");
  }
}

struct PayloadEncoder {
  ojson& j;
  void operator()(const PosePayload& p) const {
    for (double x : p.p) require_finite(x, "p");
    j["p"] = array_json(p.p);
  }
  void operator()(const ClutchPayload& p) const { j["pressed"] = p.pressed; }
  void operator()(const ParamsPayload& p) const {
    for (double x : p.v) require_finite(x, "v");
    check_unit_interval(p.v);
    j["v"] = array_json(p.v);
  }
  void operator()(const StatePayload& p) const {
    require_finite(p.t, "t");
    require_finite(p.s_intent, "s_intent");
    require_finite(p.fused.coarse, "fused");
    require_finite(p.fused.fine, "fused");
    for (double x : p.follower) require_finite(x, "follower");
    for (double x : p.v) require_finite(x, "v");
    for (double x : p.theta) require_finite(x, "theta");
    j["t"] = p.t;
    j["s_intent"] = p.s_intent;
    j["label"] = to_string(p.label);
    j["fused"] = ojson::array({p.fused.coarse, p.fused.fine});
    j["follower"] = array_json(p.follower);
    j["clutched"] = p.clutched;
    j["n_clutch"] = p.n_clutch;
    j["degraded"] = p.degraded;
    j["v"] = array_json(p.v);
    j["theta"] = array_json(p.theta);
  }
  void operator()(const HelloPayload& p) const {
    require_finite(p.tick_hz, "tick_hz");
    j["protocol"] = p.protocol;
    j["role"] = p.role;
    j["tick_hz"] = p.tick_hz;
  }
  void operator()(const ErrorPayload& p) const {
    j["code"] = p.code;
    j["message"] = p.message;
  }
};

}  // namespace detail

// Canonical form: {"type":..., "seq":..., payload fields in fixed order}.
inline std::string encode_message(const WireMessage& msg) {
  ojson j;
  j["type"] = to_string(msg.type());
  j["seq"] = msg.seq;
  std::visit(detail::PayloadEncoder{j}, msg.payload);
  return j.dump();
}

inline WireMessage decode_message(std::string_view bytes) {
  using namespace detail;
  const ojson j = parse(std::string(bytes));
  if (!j.is_object()) throw Error(Errc::malformed, "frame is not a JSON object");
  const std::string type = string(j, "type");
  WireMessage msg;
  msg.seq = value_or<std::uint64_t>(j, "seq", 0);
  if (type == "pose") {
    PosePayload p{numbers<3>(j, "p")};
    for (double x : p.p) require_finite(x, "p");
    msg.payload = p;
  } else if (type == "clutch") {
    msg.payload = ClutchPayload{boolean(j, "pressed")};
  } else if (type == "params") {
    ParamsPayload p{numbers<3>(j, "v")};
    check_unit_interval(p.v);
    msg.payload = p;
  } else if (type == "state") {
    StatePayload p;
    p.t = number(j, "t");
    p.s_intent = number(j, "s_intent");
    p.label = label_from_string(string(j, "label"));
    const auto fused = numbers<2>(j, "fused");
    p.fused = {fused[0], fused[1]};
    p.follower = numbers<3>(j, "follower");
    p.clutched = boolean(j, "clutched");
    p.n_clutch = unsigned_int(j, "n_clutch");
    p.degraded = boolean(j, "degraded");
    p.v = numbers<3>(j, "v");
    p.theta = numbers<3>(j, "theta");
    msg.payload = p;
  } else if (type == "hello") {
    HelloPayload p;
    p.protocol = static_cast<int>(unsigned_int(j, "protocol"));
    p.role = string(j, "role");
    p.tick_hz = value_or<double>(j, "tick_hz", 100.0);
    msg.payload = p;
  } else if (type == "error") {
    msg.payload = ErrorPayload{string(j, "code"), value_or<std::string>(j, "message", "")};
  } else {
    throw Error(Errc::unknown_type, "unknown message type '" + type + "'");
  }
  return msg;
}

// ---------------------------------------------------------------------------
// Controller configuration

inline ojson params_json(const ControllerParams& p) {
  ojson j;
  j["rho"] = p.rho;
  j["s_fine"] = p.s_fine;
  j["s_coarse"] = p.s_coarse;
  j["theta_min"] = detail::array_json(p.bounds.min);
  j["theta_max"] = detail::array_json(p.bounds.max);
  return j;
}

inline ControllerParams params_from_json(const ojson& j, ControllerParams p = {}) {
  if (j.contains("theta_min")) p.bounds.min = detail::numbers<3>(j, "theta_min");
  if (j.contains("theta_max")) p.bounds.max = detail::numbers<3>(j, "theta_max");
  p.rho = detail::value_or<double>(j, "rho", p.rho);
  p.s_fine = detail::value_or<double>(j, "s_fine", p.s_fine);
  p.s_coarse = detail::value_or<double>(j, "s_coarse", p.s_coarse);
  p.validate();
  return p;
}

inline ojson fcm_config_json(const FcmConfig& c) {
  ojson j;
  j["m"] = c.m;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["seed"] = c.seed;
  return j;
}

inline FcmConfig fcm_config_from_json(const ojson& j, FcmConfig c = {}) {
  c.m = detail::value_or<double>(j, "m", c.m);
  c.tol = detail::value_or<double>(j, "tol", c.tol);
  c.max_iter = detail::value_or<std::size_t>(j, "max_iter", c.max_iter);
  c.seed = detail::value_or<std::uint64_t>(j, "seed", c.seed);
  c.validate();
  return c;
}

inline ojson controller_json(const ControllerConfig& c) {
  ojson j;
  j["n_window"] = c.n_window;
  j["n_retrain"] = c.n_retrain;
  j["velocity_steps"] = c.features.velocity_steps;
  j["hold_speed"] = c.features.hold_speed;
  j["initial_alignness"] = c.features.initial_alignness;
  j["fcm"] = fcm_config_json(c.fcm);
  j["params"] = params_json(c.params);
  j["fixed_scale"] = c.fixed_scale ? ojson(*c.fixed_scale) : ojson(nullptr);
  j["retrain"] = c.retrain;
  return j;
}

inline ControllerConfig controller_from_json(const ojson& j, ControllerConfig c = {}) {
  c.n_window = detail::value_or<std::size_t>(j, "n_window", c.n_window);
  c.n_retrain = detail::value_or<std::size_t>(j, "n_retrain", c.n_retrain);
  c.features.velocity_steps = detail::value_or<std::size_t>(j, "velocity_steps", c.features.velocity_steps);
  c.features.hold_speed = detail::value_or<double>(j, "hold_speed", c.features.hold_speed);
  c.features.initial_alignness = detail::value_or<double>(j, "initial_alignness", c.features.initial_alignness);
  if (j.contains("fcm")) c.fcm = fcm_config_from_json(j["fcm"], c.fcm);
  // Flat parameter keys are accepted alongside a nested "params" object.
  c.params = params_from_json(j.contains("params") ? j["params"] : j, c.params);
  if (j.contains("fixed_scale") && !j["fixed_scale"].is_null()) c.fixed_scale = detail::number(j, "fixed_scale");
  c.retrain = detail::value_or<bool>(j, "retrain", c.retrain);
  return c;
}

// ---------------------------------------------------------------------------
// Model snapshots

inline constexpr int kSnapshotVersion = 1;

struct ModelSnapshot {
  IntentModels models;
  ControllerParams params;
};

inline ojson model_json(FeatureKind kind, const std::optional<FcmModel>& model) {
  ojson j;
  j["feature"] = to_string(kind);
  j["trained"] = model.has_value() && model->labeled();
  if (!model || !model->labeled()) return j;
  j["centroids"] = ojson::array({model->centroids[0], model->centroids[1]});
  j["labels"] = ojson::array({to_string((*model->label_of_cluster)[0]), to_string((*model->label_of_cluster)[1])});
  j["config"] = fcm_config_json(model->config);
  j["trained_on"] = model->trained_on;
  j["iterations"] = model->iterations;
  j["converged"] = model->converged;
  return j;
}

inline std::string snapshot_to_string(const ModelSnapshot& snap) {
  ojson j;
  j["format_version"] = kSnapshotVersion;
  j["models"] = ojson::array();
  for (auto kind : kFeatureKinds) j["models"].push_back(model_json(kind, snap.models[index_of(kind)]));
  j["params"] = params_json(snap.params);
  return j.dump(2) + "\n";
}

inline ModelSnapshot snapshot_from_string(const std::string& text) {
  using namespace detail;
  const ojson j = parse(text);
  if (!j.is_object()) throw Error(Errc::malformed, "snapshot is not a JSON object");
  const auto version = unsigned_int(j, "format_version");
  if (version != kSnapshotVersion) {
    throw Error(Errc::version_mismatch, "snapshot format_version " + std::to_string(version) + " (expected " +
                                            std::to_string(kSnapshotVersion) + ")");
  }
  ModelSnapshot snap;
  const auto& models = field(j, "models");
  if (!models.is_array()) throw Error(Errc::schema, "'models' must be an array");
  for (const auto& mj : models) {
    const auto kind = feature_kind_from_string(string(mj, "feature"));
    if (!boolean(mj, "trained")) {
      snap.models[index_of(kind)].reset();
      continue;
    }
    FcmModel m;
    m.feature_kind = kind;
    const auto c = numbers<2>(mj, "centroids");
    m.centroids = {c[0], c[1]};
    const auto& labels = field(mj, "labels");
    if (!labels.is_array() || labels.size() != 2 || !labels[0].is_string() || !labels[1].is_string()) {
      throw Error(Errc::schema, "'labels' must be two strings");
    }
    m.label_of_cluster = std::array<MotionLabel, 2>{label_from_string(labels[0].get<std::string>()),
                                                    label_from_string(labels[1].get<std::string>())};
    if ((*m.label_of_cluster)[0] == (*m.label_of_cluster)[1]) throw Error(Errc::schema, "labels must differ");
    m.config = fcm_config_from_json(field(mj, "config"));
    m.trained_on = unsigned_int(mj, "trained_on");
    m.iterations = value_or<std::size_t>(mj, "iterations", 0);
    m.converged = value_or<bool>(mj, "converged", false);
    snap.models[index_of(kind)] = m;
  }
  snap.params = params_from_json(field(j, "params"));
  return snap;
}

inline void save_snapshot(const std::string& path, const ModelSnapshot& snap) {
  detail::write_file(path, snapshot_to_string(snap));
}

inline ModelSnapshot load_snapshot(const std::string& path) { return snapshot_from_string(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// JSONL session logs
//
// Line 1 is a session header ({"event":"session",...}); parameter updates are
// {"event":"params","t":...,"v":[...]}; every other line is one tick:
// {"t","leader","clutch","follower","s","label_pred"?,"label_true"?,
//  "phase"?,"leg"?,"retrained"?}

inline std::string header_line(const SessionHeader& h) {
  ojson j;
  j["event"] = "session";
  j["scenario"] = h.scenario;
  j["mode"] = h.mode;
  j["seed"] = h.seed;
  j["follower_start"] = detail::vec_json(h.follower_start);
  j["tool_tip"] = detail::vec_json(h.tool_tip);
  j["controller"] = controller_json(h.controller);
  return j.dump();
}

inline std::string param_event_line(const ParamEvent& e) {
  ojson j;
  j["event"] = "params";
  j["t"] = e.t;
  j["v"] = detail::array_json(e.theta_norm);
  return j.dump();
}

inline std::string record_line(const LogRecord& r) {
  detail::require_finite(r.t, "t");
  detail::require_finite(r.s, "s");
  ojson j;
  j["t"] = r.t;
  j["leader"] = detail::vec_json(r.leader);
  j["clutch"] = r.clutch;
  j["follower"] = detail::vec_json(r.follower);
  j["s"] = r.s;
  if (r.label_pred) j["label_pred"] = to_string(*r.label_pred);
  if (r.label_true) j["label_true"] = to_string(*r.label_true);
  if (r.phase) j["phase"] = to_string(*r.phase);
  if (r.leg) j["leg"] = *r.leg;
  if (r.retrained) j["retrained"] = true;
  return j.dump();
}

// Appends one record to a JSONL file.
inline void append_log(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::io, "cannot open '" + path + "' for appending");
  out << line << '\n';
  if (!out) throw Error(Errc::io, "append to '" + path + "' failed");
}

inline std::string log_to_string(const SessionLog& log) {
  std::string out = header_line(log.header) + "\n";
  std::size_t next_event = 0;
  for (const auto& r : log.records) {
    while (next_event < log.param_events.size() && log.param_events[next_event].t <= r.t) {
      out += param_event_line(log.param_events[next_event++]) + "\n";
    }
    out += record_line(r) + "\n";
  }
  for (; next_event < log.param_events.size(); ++next_event) out += param_event_line(log.param_events[next_event]) + "\n";
  return out;
}

inline void write_log(const std::string& path, const SessionLog& log) { detail::write_file(path, log_to_string(log)); }

inline LogRecord record_from_json(const ojson& j) {
  using namespace detail;
  LogRecord r;
  r.t = number(j, "t");
  r.leader = vec3(j, "leader");
  r.clutch = boolean(j, "clutch");
  r.follower = vec3(j, "follower");
  r.s = number(j, "s");
  if (j.contains("label_pred")) r.label_pred = label_from_string(string(j, "label_pred"));
  if (j.contains("label_true")) r.label_true = label_from_string(string(j, "label_true"));
  if (j.contains("phase")) {
    const auto p = string(j, "phase");
    if (p == "transport") r.phase = OperatorPhase::transport;
    else if (p == "align") r.phase = OperatorPhase::align;
    else throw Error(Errc::schema, "unknown phase '" + p + "'");
  }
  if (j.contains("leg")) r.leg = unsigned_int(j, "leg");
  r.retrained = value_or<bool>(j, "retrained", false);
  return r;
}

inline SessionLog log_from_string(const std::string& text) {
  SessionLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool has_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const ojson j = detail::parse(line);
      if (!j.is_object()) throw Error(Errc::schema, "record is not a JSON object");
      if (j.contains("event")) {
        const auto ev = detail::string(j, "event");
        if (ev == "session") {
          log.header.scenario = detail::value_or<std::string>(j, "scenario", "");
          log.header.mode = detail::string(j, "mode");
          log.header.seed = detail::unsigned_int(j, "seed");
          log.header.follower_start = detail::vec3(j, "follower_start");
          log.header.tool_tip = detail::vec3(j, "tool_tip");
          log.header.controller = controller_from_json(detail::field(j, "controller"));
          has_header = true;
        } else if (ev == "params") {
          log.param_events.push_back({detail::number(j, "t"), detail::numbers<3>(j, "v")});
        } else {
          throw Error(Errc::schema, "unknown event '" + ev + "'");
        }
        continue;
      }
      log.records.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), "log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!has_header) {
    // Logs recorded elsewhere may omit the header; replay then uses defaults.
    log.header.mode = "adaptive";
  }
  return log;
}

inline SessionLog load_log(const std::string& path) { return log_from_string(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Replay

struct ReplayResult {
  std::vector<double> s;
  std::vector<std::optional<MotionLabel>> label_pred;
  std::size_t mismatches = 0;
  std::optional<std::size_t> first_mismatch;
};

inline std::vector<std::optional<MotionLabel>> logged_labels(const SessionLog& log) {
  std::vector<std::optional<MotionLabel>> out;
  out.reserve(log.records.size());
  for (const auto& r : log.records) out.push_back(r.label_pred);
  return out;
}

// Feeds the logged leader samples through a fresh controller built from the
// header and compares the applied scale and predicted label tick by tick.
inline ReplayResult replay_log(const SessionLog& log, IntentModels initial_models = {}) {
  FollowerState fs{log.header.follower_start, log.header.tool_tip};
  SharedController ctl(log.header.controller, fs, std::move(initial_models));
  ReplayResult out;
  std::size_t next_event = 0;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    while (next_event < log.param_events.size() && log.param_events[next_event].t <= r.t) {
      ctl.request_params(log.param_events[next_event++].theta_norm);
    }
    const auto rec = ctl.step({r.t, r.leader, r.clutch});
    out.s.push_back(rec.applied_scale);
    out.label_pred.push_back(rec.intent ? std::optional(rec.intent->label) : std::nullopt);
    const bool same = rec.applied_scale == r.s && out.label_pred.back() == r.label_pred;
    if (!same) {
      ++out.mismatches;
      if (!out.first_mismatch) out.first_mismatch = i;
    }
  }
  return out;
}

// Offline training: re-extract features from the clutched segments of a log
// and fit each model on the most recent n samples.
inline ModelSnapshot train_from_log(const SessionLog& log, std::size_t n) {
  auto cfg = log.header.controller;
  cfg.fixed_scale = 1.0;
  cfg.retrain = false;
  cfg.n_retrain = std::max<std::size_t>(n, 1);
  FollowerState fs{log.header.follower_start, log.header.tool_tip};
  SharedController ctl(cfg, fs);
  for (const auto& r : log.records) ctl.step({r.t, r.leader, r.clutch});
  const auto rr = retrain_on_unclutch(ctl.buffer(), {}, n, cfg.fcm);
  return {rr.models, log.header.controller.params};
}

// ---------------------------------------------------------------------------
// Scenarios

inline Scenario scenario_from_json(const ojson& j) {
  using namespace detail;
  Scenario sc;
  sc.name = value_or<std::string>(j, "name", sc.name);
  sc.seed = value_or<std::uint64_t>(j, "seed", sc.seed);
  sc.tick_hz = value_or<double>(j, "tick_hz", sc.tick_hz);
  sc.leader_workspace_radius = value_or<double>(j, "leader_workspace_radius", sc.leader_workspace_radius);
  if (j.contains("tool_direction")) sc.tool_direction = vec3(j, "tool_direction");
  sc.tool_length = value_or<double>(j, "tool_length", sc.tool_length);
  if (j.contains("follower_start")) sc.follower_start = vec3(j, "follower_start");
  for (const auto& pj : field(j, "pegs")) sc.pegs.push_back({string(pj, "color"), vec3(pj, "position")});
  for (const auto& rj : field(j, "rings")) {
    Ring r;
    r.color = string(rj, "color");
    r.position = vec3(rj, "position");
    const auto size = value_or<std::string>(rj, "size", "large");
    if (size == "small") r.size = RingSize::small;
    else if (size == "large") r.size = RingSize::large;
    else throw Error(Errc::schema, "ring size must be 'small' or 'large'");
    const auto state = value_or<std::string>(rj, "state", "free");
    if (state == "free") r.state = RingState::free;
    else if (state == "grasped") r.state = RingState::grasped;
    else if (state == "placed") r.state = RingState::placed;
    else throw Error(Errc::schema, "ring state must be free, grasped or placed");
    sc.rings.push_back(r);
  }
  if (j.contains("ring_radius")) {
    const auto& rr = j["ring_radius"];
    sc.small_ring_radius = value_or<double>(rr, "small", sc.small_ring_radius);
    sc.large_ring_radius = value_or<double>(rr, "large", sc.large_ring_radius);
  }
  sc.capture_factor_small = value_or<double>(j, "capture_factor_small", sc.capture_factor_small);
  sc.capture_factor_large = value_or<double>(j, "capture_factor_large", sc.capture_factor_large);
  sc.approach_factor = value_or<double>(j, "approach_factor", sc.approach_factor);
  sc.world_margin = value_or<double>(j, "world_margin", sc.world_margin);
  if (j.contains("operator")) {
    const auto& o = j["operator"];
    auto& op = sc.op;
    op.coarse_speed = value_or<double>(o, "coarse_speed", op.coarse_speed);
    op.fine_speed = value_or<double>(o, "fine_speed", op.fine_speed);
    op.jitter_amplitude = value_or<double>(o, "jitter_amplitude", op.jitter_amplitude);
    op.jitter_frequency = value_or<double>(o, "jitter_frequency", op.jitter_frequency);
    op.wander_amplitude = value_or<double>(o, "wander_amplitude", op.wander_amplitude);
    op.tremor = value_or<double>(o, "tremor", op.tremor);
    op.stroke_reach = value_or<double>(o, "stroke_reach", sc.leader_workspace_radius);
    op.recenter_ticks = value_or<std::size_t>(o, "recenter_ticks", op.recenter_ticks);
    op.speed_variation = value_or<double>(o, "speed_variation", op.speed_variation);
  } else {
    sc.op.stroke_reach = sc.leader_workspace_radius;
  }
  if (j.contains("controller")) sc.controller = controller_from_json(j["controller"]);
  if (j.contains("param_schedule")) {
    for (const auto& uj : j["param_schedule"]) {
      ParamUpdate u{number(uj, "t"), numbers<3>(uj, "theta_norm")};
      check_unit_interval(u.theta_norm);
      sc.param_schedule.push_back(u);
    }
  }
  sc.timeout_s = value_or<double>(j, "timeout_s", sc.timeout_s);
  sc.validate();
  return sc;
}

inline Scenario scenario_from_string(const std::string& text) { return scenario_from_json(detail::parse(text)); }

inline Scenario load_scenario(const std::string& path) { return scenario_from_string(detail::read_file(path)); }

// World geometry for clients that draw the workspace.
inline ojson world_json(const Scenario& sc) {
  ojson j;
  j["name"] = sc.name;
  j["leader_workspace_radius"] = sc.leader_workspace_radius;
  j["follower_start"] = detail::vec_json(sc.follower_start);
  const auto& b = sc.controller.params.bounds;
  j["param_bounds"] = {{"min", detail::array_json(b.min)}, {"max", detail::array_json(b.max)}};
  j["pegs"] = ojson::array();
  for (const auto& p : sc.pegs) j["pegs"].push_back({{"color", p.color}, {"position", detail::vec_json(p.position)}});
  j["rings"] = ojson::array();
  for (const auto& r : sc.rings) {
    j["rings"].push_back({{"color", r.color},
                          {"position", detail::vec_json(r.position)},
                          {"size", r.size == RingSize::small ? "small" : "large"}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Metrics output

inline std::string metrics_to_string(const SessionMetrics& m) {
  ojson j;
  j["n_clutch"] = m.n_clutch;
  j["tct_s"] = m.tct_s;
  j["path_length_m"] = m.follower_path_length;
  j["label_accuracy"] = m.label_accuracy;
  j["mode"] = m.mode;
  j["seed"] = m.seed;
  j["complete"] = m.complete;
  j["reclutches_per_leg"] = m.reclutches_per_leg;
  j["jitter_ratio_align"] = m.jitter_ratio_align;
  return j.dump(2) + "\n";
}

}  // namespace intentscale
