#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "holoview/session/server.hpp"
#include "holoview/volume/phantom.hpp"

using namespace holoview;
using namespace holoview::session;
using namespace std::chrono_literals;
using volume::Dims;

namespace {

constexpr OrganId kLiver{3, 5};

std::shared_ptr<const RenderAssets> assets32() {
  static const auto assets = [] {
    const auto spec = volume::phantom_preset("three-organs", Dims{32, 32, 32});
    return RenderAssets::build(volume::generate_phantom(spec), spec.hierarchy);
  }();
  return assets;
}

ServerConfig small_config() {
  ServerConfig c;
  c.width = 64;
  c.height = 48;
  c.fps = 60;
  return c;
}

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.binary(true);
    ws_.handshake("127.0.0.1", "/ws");
    ws_.next_layer().set_option(tcp::no_delay(true));
  }

  void send(const ControlMessage& m) { send_raw(serialize(m)); }
  void send_raw(const std::string& bytes) { ws_.write(net::buffer(bytes)); }

  /// Next message, or nullopt once `deadline` passes.
  std::optional<DataMessage> next(std::chrono::steady_clock::time_point deadline) {
    if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    beast::flat_buffer buf;
    auto& sock = ws_.next_layer();
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    const int ms = int(std::max<std::int64_t>(left.count(), 1));
    ::setsockopt(sock.native_handle(), SOL_SOCKET, SO_RCVTIMEO,
                 std::array<long, 2>{ms / 1000, (ms % 1000) * 1000}.data(), sizeof(timeval));
    beast::error_code ec;
    ws_.read(buf, ec);
    if (ec) return std::nullopt;
    const auto d = buf.cdata();
    const auto m = deserialize(std::string_view(static_cast<const char*>(d.data()), d.size()));
    auto data = as_stream<DataMessage>(m);
    EXPECT_TRUE(data);
    return data;
  }

  /// First message satisfying `pred` within `timeout`.
  template <class Pred>
  std::optional<DataMessage> wait_for(Pred pred, std::chrono::milliseconds timeout = 10s) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (auto m = next(deadline))
      if (pred(*m)) return m;
    return std::nullopt;
  }

  void close() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

const FrameMessage* frame_of(const DataMessage& m) { return std::get_if<FrameMessage>(&m); }

bool is_blank(const FrameMessage& f) {
  for (std::size_t i = 0; i < f.frame.pixels.size(); i += 4)
    if (f.frame.pixels[i] || f.frame.pixels[i + 1] || f.frame.pixels[i + 2]) return false;
  return true;
}

struct HttpReply {
  unsigned status = 0;
  std::string type, body;
};

HttpReply http_get(unsigned short port, const std::string& target) {
  net::io_context ioc;
  tcp::socket sock(ioc);
  tcp::resolver resolver(ioc);
  net::connect(sock, resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  return {res.result_int(), std::string(res[http::field::content_type]), res.body()};
}

}  // namespace

TEST(StaticPath, RejectsEscapes) {
  const std::filesystem::path root = "/srv/app";
  EXPECT_EQ(*static_path(root, "/"), root / "index.html");
  EXPECT_EQ(*static_path(root, "/js/main.js?v=3"), root / "js" / "main.js");
  EXPECT_EQ(*static_path(root, "/sub/"), root / "sub" / "index.html");
  EXPECT_FALSE(static_path(root, "/../etc/passwd"));
  EXPECT_FALSE(static_path(root, "/a/../../b"));
  EXPECT_FALSE(static_path(root, "/%2e%2e/x"));
  EXPECT_FALSE(static_path(root, "relative"));
  EXPECT_FALSE(static_path({}, "/index.html"));
}

TEST(Server, StartsOnEphemeralPortAndStops) {
  Server s(assets32(), small_config());
  s.start();
  EXPECT_GT(s.port(), 0);
  s.stop();
  s.stop();
}

TEST(Server, BusyPortIsAnIoError) {
  Server a(assets32(), small_config());
  a.start();
  auto cfg = small_config();
  cfg.port = a.port();
  Server b(assets32(), cfg);
  try {
    b.start();
    FAIL() << "second bind succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(Server, RejectsBadConfig) {
  auto cfg = small_config();
  cfg.fps = 0;
  EXPECT_THROW(Server(assets32(), cfg), Error);
  cfg = small_config();
  cfg.reduction = 40;
  EXPECT_THROW(Server(assets32(), cfg), Error);
}

TEST(Server, FramesFollowCameraAndGaze) {
  Server s(assets32(), small_config());
  s.start();
  Client c(s.port());
  SetCamera cam;
  const auto scene = render::default_scene(*assets32(), 80, 60);
  cam.position = to_array(scene.camera.position);
  cam.forward = to_array(scene.camera.forward);
  cam.up = to_array(scene.camera.up);
  cam.width = 80;
  cam.height = 60;
  cam.ipd = scene.camera.ipd;
  c.send(cam);
  c.send(SetGaze{10, 20});
  const auto m = c.wait_for([](const DataMessage& d) {
    const auto* f = frame_of(d);
    return f && f->frame.mapping.gaze_x == 10.0f && f->frame.mapping.gaze_y == 20.0f;
  });
  ASSERT_TRUE(m);
  const auto& f = frame_of(*m)->frame;
  EXPECT_EQ(f.mapping.width, 80);
  EXPECT_EQ(f.mapping.height, 60);
  EXPECT_EQ(f.mapping.reduced_width, 27);
  EXPECT_NE(f.eye, render::Eye::kMono);
  EXPECT_FALSE(is_blank(*frame_of(*m)));
}

TEST(Server, FrameIdsIncrease) {
  Server s(assets32(), small_config());
  s.start();
  Client c(s.port());
  c.send(Navigate{NavDirection::kForward, true});
  std::uint64_t prev = 0;
  int frames = 0;
  const auto deadline = std::chrono::steady_clock::now() + 10s;
  while (frames < 10) {
    auto m = c.next(deadline);
    ASSERT_TRUE(m);
    if (const auto* f = frame_of(*m)) {
      EXPECT_GT(f->frame.frame_id, prev);
      prev = f->frame.frame_id;
      ++frames;
    }
  }
}

TEST(Server, DeselectionShowsInLaterFrames) {
  Server s(assets32(), small_config());
  s.start();
  Client c(s.port());
  ASSERT_TRUE(c.wait_for([](const DataMessage& d) { return frame_of(d) && !is_blank(*frame_of(d)); }));
  c.send(DeselectAllInSystem{3});
  c.send(DeselectAllInSystem{5});
  ASSERT_TRUE(c.wait_for([](const DataMessage& d) { return frame_of(d) && is_blank(*frame_of(d)); }));
  c.send(SetGaze{5, 5});
  const auto later = c.wait_for([](const DataMessage& d) { return frame_of(d) != nullptr; });
  ASSERT_TRUE(later);
  EXPECT_TRUE(is_blank(*frame_of(*later)));
}

TEST(Server, SelectionMessagesAreNeverDropped) {
  Server s(assets32(), small_config());
  s.start();
  Client c(s.port());
  // 101 toggles per organ leave it deselected; any lost toggle would leave one visible.
  for (int i = 0; i < 101; ++i)
    for (const auto& e : assets32()->hierarchy().entries()) {
      c.send(ToggleOrgan{e.organ});
      c.send(SetGaze{double(i % 60), 7.0});
    }
  c.send(SetGaze{33, 25});
  const auto last = c.wait_for([](const DataMessage& d) {
    const auto* f = frame_of(d);
    return f && f->frame.mapping.gaze_x == 33.0f && f->frame.mapping.gaze_y == 25.0f;
  });
  ASSERT_TRUE(last);
  EXPECT_TRUE(is_blank(*frame_of(*last)));
}

TEST(Server, PickRepliesWithOrgan) {
  Server s(assets32(), small_config());
  s.start();
  Client c(s.port());
  c.send(PickOrgan{0.5, 0.5});
  const auto miss = c.wait_for([](const DataMessage& d) { return std::holds_alternative<PickResultMessage>(d); });
  ASSERT_TRUE(miss);
  EXPECT_FALSE(std::get<PickResultMessage>(*miss).organ);
  // The liver is the large organ left of center in the default view.
  bool hit = false;
  for (int x = 8; x < 32 && !hit; x += 2) {
    c.send(PickOrgan{double(x), 24.0});
    const auto r = c.wait_for([](const DataMessage& d) { return std::holds_alternative<PickResultMessage>(d); });
    ASSERT_TRUE(r);
    const auto& p = std::get<PickResultMessage>(*r);
    hit = p.organ && *p.organ == kLiver && p.name == "liver";
  }
  EXPECT_TRUE(hit);
}

TEST(Server, ErrorsAreReportedNotFatal) {
  Server s(assets32(), small_config());
  s.start();
  Client c(s.port());
  c.send_raw("junk");
  const auto e = c.wait_for([](const DataMessage& d) { return std::holds_alternative<ErrorMessage>(d); });
  ASSERT_TRUE(e);
  EXPECT_EQ(std::get<ErrorMessage>(*e).code, "bad-message");
  c.send(ToggleOrgan{kLiver});
  c.send(EnterBioscope{kLiver});
  const auto e2 = c.wait_for([](const DataMessage& d) { return std::holds_alternative<ErrorMessage>(d); });
  ASSERT_TRUE(e2);
  EXPECT_EQ(std::get<ErrorMessage>(*e2).code, "target-not-selected");
  c.send(SetGaze{1, 2});
  EXPECT_TRUE(c.wait_for([](const DataMessage& d) { return frame_of(d) && frame_of(d)->frame.mapping.gaze_x == 1.0f; }));
}

TEST(Server, HeartbeatWhenIdle) {
  auto cfg = small_config();
  cfg.heartbeat = 300ms;
  Server s(assets32(), cfg);
  s.start();
  Client c(s.port());
  std::uint64_t last_frame = 0;
  const auto ack = c.wait_for([&](const DataMessage& d) {
    if (const auto* f = frame_of(d)) last_frame = f->frame.frame_id;
    return std::holds_alternative<Ack>(d);
  });
  ASSERT_TRUE(ack);
  EXPECT_EQ(std::get<Ack>(*ack).frame_id, last_frame);
  EXPECT_GT(last_frame, 0u);
}

TEST(Server, SessionsAreIsolated) {
  Server s(assets32(), small_config());
  s.start();
  Client a(s.port()), b(s.port());
  a.send(DeselectAllInSystem{3});
  a.send(DeselectAllInSystem{5});
  ASSERT_TRUE(a.wait_for([](const DataMessage& d) { return frame_of(d) && is_blank(*frame_of(d)); }));
  b.send(SetGaze{40, 30});
  const auto fb = b.wait_for([](const DataMessage& d) { return frame_of(d) && frame_of(d)->frame.mapping.gaze_x == 40.0f; });
  ASSERT_TRUE(fb);
  EXPECT_FALSE(is_blank(*frame_of(*fb)));
  a.close();
  b.send(SetGaze{41, 30});
  EXPECT_TRUE(b.wait_for([](const DataMessage& d) { return frame_of(d) && frame_of(d)->frame.mapping.gaze_x == 41.0f; }));
}

TEST(Server, SessionCap) {
  auto cfg = small_config();
  cfg.max_sessions = 1;
  Server s(assets32(), cfg);
  s.start();
  {
    Client a(s.port());
    EXPECT_THROW(Client b(s.port()), boost::system::system_error);
    a.close();
  }
  const auto deadline = std::chrono::steady_clock::now() + 5s;
  while (s.active_sessions() > 0 && std::chrono::steady_clock::now() < deadline) std::this_thread::sleep_for(10ms);
  EXPECT_EQ(s.active_sessions(), 0);
  Client again(s.port());
  EXPECT_TRUE(again.wait_for([](const DataMessage& d) { return frame_of(d) != nullptr; }));
}

TEST(Server, StopWithConnectedClients) {
  auto s = std::make_unique<Server>(assets32(), small_config());
  s->start();
  Client a(s->port());
  a.send(Navigate{NavDirection::kLeft, true});
  ASSERT_TRUE(a.wait_for([](const DataMessage& d) { return frame_of(d) != nullptr; }));
  s->stop();
  s.reset();
  a.close();
}

TEST(Server, HttpEndpoints) {
  const auto dir = std::filesystem::temp_directory_path() / "holoview_static_test";
  std::filesystem::create_directories(dir / "js");
  std::ofstream(dir / "index.html") << "<!doctype html><title>viewer</title>";
  std::ofstream(dir / "js" / "main.js") << "export const x = 1;";
  std::ofstream(dir.parent_path() / "holoview_secret.txt") << "secret";
  auto cfg = small_config();
  cfg.static_dir = dir;
  Server s(assets32(), cfg);
  s.start();

  const auto index = http_get(s.port(), "/");
  EXPECT_EQ(index.status, 200u);
  EXPECT_EQ(index.body, "<!doctype html><title>viewer</title>");
  EXPECT_EQ(index.type, "text/html; charset=utf-8");
  const auto js = http_get(s.port(), "/js/main.js");
  EXPECT_EQ(js.status, 200u);
  EXPECT_EQ(js.type, "text/javascript; charset=utf-8");
  EXPECT_EQ(http_get(s.port(), "/../holoview_secret.txt").status, 404u);
  EXPECT_EQ(http_get(s.port(), "/missing.css").status, 404u);

  const auto h = http_get(s.port(), "/api/hierarchy");
  EXPECT_EQ(h.status, 200u);
  const auto j = nlohmann::json::parse(h.body);
  ASSERT_EQ(j["organs"].size(), 3u);
  std::set<std::string> names;
  for (const auto& o : j["organs"]) names.insert(o["name"].get<std::string>());
  EXPECT_EQ(names, (std::set<std::string>{"liver", "stomach", "heart"}));
  EXPECT_EQ(j["dims"], nlohmann::json::array({32, 32, 32}));
  std::filesystem::remove_all(dir);
  std::filesystem::remove(dir.parent_path() / "holoview_secret.txt");
}

TEST(Server, TeardownUnderLoad) {
  for (int round = 0; round < 6; ++round) {
    Server s(assets32(), small_config());
    s.start();
    Client c(s.port());
    for (int i = 0; i < 150; ++i) {
      c.send(ToggleOrgan{kLiver});
      c.send(SetGaze{double(i % 60), 7.0});
    }
    if (round % 2) c.close();
  }
}
