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

// Live session server. One HTTP listener serves static files, GET /scenario
// and WebSocket upgrades on /ws. Two threads:
//
//   io thread    all sockets; decodes inbound frames into InputQueue and
//                drains per-client outbound queues
//   tick thread  fixed-rate loop; the only writer of the SharedController
//
// The tick thread never waits on a socket. It hands state frames to the io
// thread with post(); each client queue is bounded and drops its oldest
// frame when full.

#include "intentscale/io.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

namespace intentscale {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks an ephemeral port
  double tick_hz = 100.0;
  std::size_t state_every = 3;            // state frame decimation
  std::size_t pose_queue_capacity = 64;
  std::size_t client_queue_capacity = 16;
  std::string static_dir;                 // empty disables static files
  std::string log_path;                   // empty disables JSONL logging
};

struct ServerStats {
  std::uint64_t ticks = 0;
  std::uint64_t poses_dropped = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t decode_errors = 0;
  std::size_t clients = 0;
};

// Inbound hand-off between the io thread and the tick thread. Poses are
// bounded (oldest dropped, counted); clutch and params messages are kept.
class InputQueue {
 public:
  explicit InputQueue(std::size_t pose_capacity) : pose_capacity_(std::max<std::size_t>(pose_capacity, 1)) {}

  void push_pose(const Array3& p) {
    std::lock_guard lock(mu_);
    if (poses_.size() == pose_capacity_) {
      poses_.pop_front();
      ++poses_dropped_;
    }
    poses_.push_back(p);
  }

  void push_clutch(bool pressed) {
    std::lock_guard lock(mu_);
    clutch_.push_back(pressed);
  }

  void push_params(std::uint64_t client, const ParamVector& v) {
    std::lock_guard lock(mu_);
    params_.push_back({client, v});
  }

  struct Drained {
    std::optional<Array3> latest_pose;
    std::optional<bool> clutch;  // at most one clutch edge per tick
    std::vector<std::pair<std::uint64_t, ParamVector>> params;
  };

  Drained drain() {
    std::lock_guard lock(mu_);
    Drained d;
    if (!poses_.empty()) d.latest_pose = poses_.back();
    poses_.clear();
    if (!clutch_.empty()) {
      d.clutch = clutch_.front();
      clutch_.pop_front();
    }
    d.params.assign(params_.begin(), params_.end());
    params_.clear();
    return d;
  }

  std::uint64_t poses_dropped() const {
    std::lock_guard lock(mu_);
    return poses_dropped_;
  }

 private:
  mutable std::mutex mu_;
  std::size_t pose_capacity_;
  std::deque<Array3> poses_;
  std::deque<bool> clutch_;
  std::deque<std::pair<std::uint64_t, ParamVector>> params_;
  std::uint64_t poses_dropped_ = 0;
};

inline StatePayload make_state(const TickRecord& rec, const SharedController& ctl) {
  StatePayload st;
  st.t = rec.sample.t;
  st.s_intent = rec.applied_scale;
  st.clutched = rec.clutched;
  st.follower = to_array(rec.follower);
  st.n_clutch = rec.n_clutch;
  st.degraded = ctl.degraded();
  if (rec.intent) {
    st.label = rec.intent->label;
    st.fused = rec.intent->fused;
  } else {
    st.label = ctl.scaling().last_label;
    st.fused = one_hot(st.label);
  }
  st.v = ctl.params().normalized();
  st.theta = ctl.params().theta();
  return st;
}

inline std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

class EngineServer {
 public:
  EngineServer(ServerConfig cfg, Scenario scenario, IntentModels models = {})
      : cfg_(std::move(cfg)),
        scenario_(std::move(scenario)),
        controller_(scenario_.controller,
                    FollowerState::with_tool(scenario_.follower_start, scenario_.tool_direction,
                                             scenario_.tool_length),
                    std::move(models)),
        input_(cfg_.pose_queue_capacity),
        acceptor_(ioc_) {
    if (!(cfg_.tick_hz > 0.0)) throw Error(Errc::range, "tick_hz must be positive");
    if (cfg_.state_every == 0) throw Error(Errc::range, "state_every must be positive");
    world_json_ = world_json(scenario_).dump();
  }

  EngineServer(const EngineServer&) = delete;
  EngineServer& operator=(const EngineServer&) = delete;
  ~EngineServer() { stop(); }

  // Binds and starts both threads. Returns the bound port.
  unsigned short start() {
    beast::error_code ec;
    const tcp::endpoint ep(net::ip::make_address(cfg_.address, ec), cfg_.port);
    if (ec) throw Error(Errc::usage, "bad listen address '" + cfg_.address + "'");
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error(Errc::io, "cannot listen on " + cfg_.address + ":" + std::to_string(cfg_.port) + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();

    if (!cfg_.log_path.empty()) {
      log_.open(cfg_.log_path, std::ios::binary | std::ios::trunc);
      if (!log_) throw Error(Errc::io, "cannot open log '" + cfg_.log_path + "'");
      const auto& fs = controller_.follower();
      log_ << header_line({scenario_.name, "adaptive", controller_.config().fcm.seed, controller_.config(),
                           fs.position, fs.tool_tip})
           << '\n';
    }

    running_ = true;
    do_accept();
    io_thread_ = std::thread([this] { ioc_.run(); });
    tick_thread_ = std::thread([this] { tick_loop(); });
    return port_;
  }

  void stop() {
    if (!running_.exchange(false)) return;
    if (tick_thread_.joinable()) tick_thread_.join();
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      for (auto& w : clients_) {
        if (auto s = w.lock()) s->close();
      }
    });
    // Give sessions a moment to send their close frames.
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    ioc_.stop();
    if (io_thread_.joinable()) io_thread_.join();
    if (log_.is_open()) log_.flush();
  }

  unsigned short port() const noexcept { return port_; }

  ServerStats stats() const {
    ServerStats s;
    s.ticks = ticks_.load();
    s.poses_dropped = input_.poses_dropped();
    s.frames_dropped = frames_dropped_.load();
    s.frames_sent = frames_sent_.load();
    s.decode_errors = decode_errors_.load();
    s.clients = client_count_.load();
    return s;
  }

 private:
  class WsSession;

  class HttpSession : public std::enable_shared_from_this<HttpSession> {
   public:
    HttpSession(EngineServer& srv, tcp::socket socket) : srv_(srv), stream_(std::move(socket)) {}

    void run() {
      stream_.expires_after(std::chrono::seconds(30));
      http::async_read(stream_, buffer_, req_,
                       beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

   private:
    void on_read(beast::error_code ec, std::size_t) {
      if (ec) return;
      if (websocket::is_upgrade(req_)) {
        if (req_.target() != "/ws") {
          respond(http::status::not_found, "text/plain", "websocket endpoint is /ws\n");
          return;
        }
        stream_.expires_never();
        std::make_shared<WsSession>(srv_, stream_.release_socket())->accept(std::move(req_));
        return;
      }
      if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
        respond(http::status::method_not_allowed, "text/plain", "method not allowed\n");
        return;
      }
      const std::string target(req_.target());
      const std::string path = target.substr(0, target.find('?'));
      if (path == "/scenario") {
        respond(http::status::ok, "application/json", srv_.world_json_);
        return;
      }
      if (path == "/health") {
        respond(http::status::ok, "application/json", "{\"status\":\"ok\"}");
        return;
      }
      serve_static(path);
    }

    void serve_static(const std::string& path) {
      if (srv_.cfg_.static_dir.empty()) {
        respond(http::status::not_found, "text/plain", "not found\n");
        return;
      }
      if (path.empty() || path[0] != '/' || path.find("..") != std::string::npos) {
        respond(http::status::bad_request, "text/plain", "bad path\n");
        return;
      }
      std::filesystem::path file = std::filesystem::path(srv_.cfg_.static_dir) / path.substr(1);
      std::error_code fec;
      if (std::filesystem::is_directory(file, fec)) file /= "index.html";
      if (!std::filesystem::is_regular_file(file, fec)) {
        respond(http::status::not_found, "text/plain", "not found\n");
        return;
      }
      std::string body;
      try {
        body = detail::read_file(file.string());
      } catch (const Error&) {
        respond(http::status::internal_server_error, "text/plain", "read failed\n");
        return;
      }
      respond(http::status::ok, mime_type(file), std::move(body));
    }

    void respond(http::status status, std::string_view type, std::string body) {
      auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
      res->set(http::field::server, "intentscale");
      res->set(http::field::content_type, beast::string_view(type.data(), type.size()));
      res->keep_alive(false);
      if (req_.method() != http::verb::head) res->body() = std::move(body);
      res->prepare_payload();
      http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ec;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      });
    }

    EngineServer& srv_;
    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
  };

  class WsSession : public std::enable_shared_from_this<WsSession> {
   public:
    WsSession(EngineServer& srv, tcp::socket socket) : srv_(srv), ws_(std::move(socket)), id_(++srv.next_client_) {}

    void accept(http::request<http::string_body> req) {
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.text(true);
      ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

    // io thread only from here on.
    void send(Payload payload, bool droppable) {
      if (closed_) return;
      WireMessage msg{++seq_, std::move(payload)};
      std::string frame;
      try {
        frame = encode_message(msg);
      } catch (const Error&) {
        return;
      }
      if (droppable && queue_.size() >= srv_.cfg_.client_queue_capacity) {
        // Drop the oldest frame that is not already being written.
        auto victim = writing_ ? std::next(queue_.begin()) : queue_.begin();
        if (victim != queue_.end()) {
          queue_.erase(victim);
          ++srv_.frames_dropped_;
        }
      }
      queue_.push_back(std::move(frame));
      if (!writing_) write_next();
    }

    void close() {
      if (closed_) return;
      closed_ = true;
      ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
    }

    std::uint64_t id() const noexcept { return id_; }

   private:
    void on_accept(beast::error_code ec) {
      if (ec) return;
      srv_.clients_.insert(weak_from_this());
      ++srv_.client_count_;
      registered_ = true;
      send(HelloPayload{kProtocolVersion, "engine", srv_.cfg_.tick_hz}, false);
      read_next();
    }

    void read_next() {
      ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
      if (ec) {
        unregister();
        return;
      }
      const std::string text = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      handle(text);
      read_next();
    }

    void handle(const std::string& text) {
      WireMessage msg;
      try {
        msg = decode_message(text);
      } catch (const Error& e) {
        ++srv_.decode_errors_;
        send(ErrorPayload{std::string(to_string(e.code())), e.what()}, false);
        return;
      }
      if (const auto* p = std::get_if<PosePayload>(&msg.payload)) {
        srv_.input_.push_pose(p->p);
      } else if (const auto* c = std::get_if<ClutchPayload>(&msg.payload)) {
        srv_.input_.push_clutch(c->pressed);
      } else if (const auto* v = std::get_if<ParamsPayload>(&msg.payload)) {
        srv_.input_.push_params(id_, v->v);
      } else if (std::holds_alternative<HelloPayload>(msg.payload)) {
        // Client greeting; nothing to do.
      } else {
        send(ErrorPayload{"unknown_type", "clients may send pose, clutch, params or hello"}, false);
      }
    }

    void write_next() {
      if (queue_.empty() || closed_) {
        writing_ = false;
        return;
      }
      writing_ = true;
      ws_.async_write(net::buffer(queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
      if (ec) {
        writing_ = false;
        unregister();
        return;
      }
      ++srv_.frames_sent_;
      queue_.pop_front();
      write_next();
    }

    void unregister() {
      closed_ = true;
      if (!registered_) return;
      registered_ = false;
      srv_.clients_.erase(weak_from_this());
      --srv_.client_count_;
    }

    EngineServer& srv_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    bool writing_ = false;
    bool closed_ = false;
    bool registered_ = false;
    std::uint64_t seq_ = 0;
    std::uint64_t id_;
  };

  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(*this, std::move(socket))->run();
      do_accept();
    });
  }

  void broadcast(Payload payload) {
    net::post(ioc_, [this, payload = std::move(payload)] {
      for (auto& w : clients_) {
        if (auto s = w.lock()) s->send(payload, true);
      }
    });
  }

  void send_to(std::uint64_t client, Payload payload) {
    net::post(ioc_, [this, client, payload = std::move(payload)] {
      for (auto& w : clients_) {
        auto s = w.lock();
        if (s && s->id() == client) s->send(payload, false);
      }
    });
  }

  void tick_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / cfg_.tick_hz));
    auto next = clock::now();
    Vec3 pose = Vec3::Zero();
    bool clutch = false;
    std::uint64_t k = 0;
    while (running_) {
      auto in = input_.drain();
      if (in.latest_pose) pose = Vec3((*in.latest_pose)[0], (*in.latest_pose)[1], (*in.latest_pose)[2]);
      if (in.clutch) clutch = *in.clutch;
      for (const auto& [client, v] : in.params) {
        try {
          controller_.request_params(v);
          if (log_.is_open()) log_ << param_event_line({static_cast<double>(k) / cfg_.tick_hz, v}) << '\n';
        } catch (const Error& e) {
          send_to(client, ErrorPayload{std::string(to_string(e.code())), e.what()});
        }
      }

      const double t = static_cast<double>(k) / cfg_.tick_hz;
      try {
        const auto rec = controller_.step({t, pose, clutch});
        if (log_.is_open()) {
          LogRecord lr;
          lr.t = t;
          lr.leader = pose;
          lr.clutch = clutch;
          lr.follower = rec.follower;
          lr.s = rec.applied_scale;
          if (rec.intent) lr.label_pred = rec.intent->label;
          lr.retrained = rec.retrain && rec.retrain->any_updated();
          log_ << record_line(lr) << '\n';
        }
        if (k % cfg_.state_every == 0) broadcast(make_state(rec, controller_));
      } catch (const Error& e) {
        broadcast(ErrorPayload{std::string(to_string(e.code())), e.what()});
      }
      ++k;
      ticks_ = k;

      next += period;
      const auto now = clock::now();
      if (now > next + period) {
        next = now;  // fell behind; do not burst to catch up
      } else {
        std::this_thread::sleep_until(next);
      }
    }
  }

  ServerConfig cfg_;
  Scenario scenario_;
  SharedController controller_;
  InputQueue input_;
  std::string world_json_;

  net::io_context ioc_;
  tcp::acceptor acceptor_;
  std::set<std::weak_ptr<WsSession>, std::owner_less<std::weak_ptr<WsSession>>> clients_;
  std::uint64_t next_client_ = 0;

  std::thread io_thread_;
  std::thread tick_thread_;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> ticks_{0};
  std::atomic<std::uint64_t> frames_dropped_{0};
  std::atomic<std::uint64_t> frames_sent_{0};
  std::atomic<std::uint64_t> decode_errors_{0};
  std::atomic<std::size_t> client_count_{0};
  std::ofstream log_;
  unsigned short port_ = 0;
};

}  // namespace intentscale
