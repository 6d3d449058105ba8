#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "holoview/session/session_core.hpp"
#include "holoview/volume/phantom.hpp"
#include "json.hpp"
#include "message_gen.hpp"

using namespace holoview;
using namespace holoview::session;
using render::Mode;
using volume::Dims;

namespace {

constexpr OrganId kLiver{3, 5};
constexpr OrganId kStomach{3, 2};
constexpr OrganId kHeart{5, 1};

std::shared_ptr<const RenderAssets> assets32() {
  static const auto assets = [] {
    const auto spec = volume::phantom_preset("three-organs", Dims{32, 32, 32});
    return RenderAssets::build(volume::generate_phantom(spec), spec.hierarchy);
  }();
  return assets;
}

SceneState start_state() { return render::default_scene(*assets32(), 48, 40); }

WireErrorCode wire_code(std::string_view bytes) {
  try {
    deserialize(bytes);
  } catch (const WireError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a wire error";
  return WireErrorCode::kBadPayload;
}

std::string frame_bytes(std::uint8_t type, std::string_view payload) {
  std::string out("HVW1");
  out.push_back(char(type));
  const auto n = std::uint32_t(payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(char((n >> (8 * i)) & 0xff));
  return out + std::string(payload);
}

const ErrorMessage* error_of(const std::vector<DataMessage>& replies) {
  return replies.size() == 1 ? std::get_if<ErrorMessage>(&replies[0]) : nullptr;
}

}  // namespace

// ---- wire format

TEST(Wire, HeaderLayout) {
  const std::string b = serialize(ControlMessage{SetGaze{1.5, 2.0}});
  ASSERT_GE(b.size(), kWireHeaderSize);
  EXPECT_EQ(b.substr(0, 4), "HVW1");
  EXPECT_EQ(std::uint8_t(b[4]), 0x02);
  const std::uint32_t len = std::uint8_t(b[5]) | std::uint8_t(b[6]) << 8 | std::uint8_t(b[7]) << 16 |
                            std::uint32_t(std::uint8_t(b[8])) << 24;
  EXPECT_EQ(len, b.size() - kWireHeaderSize);
  EXPECT_EQ(b.substr(kWireHeaderSize), R"({"x":1.5,"y":2.0})");
}

TEST(Wire, TypeBytesFollowVariantOrder) {
  testgen::MessageGen gen(3);
  for (int k = 0; k < 11; ++k) EXPECT_EQ(std::uint8_t(serialize(gen.control(k))[4]), k + 1);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(std::uint8_t(serialize(gen.data(k))[4]), 0x80 + k);
}

TEST(Wire, EveryVariantRoundTrips) {
  testgen::MessageGen gen(11);
  for (int k = 0; k < 11; ++k) {
    const Message m = to_message(gen.control(k));
    EXPECT_EQ(deserialize(serialize(m)), m) << "control kind " << k;
  }
  for (int k = 0; k < 4; ++k) {
    const Message m = to_message(gen.data(k));
    EXPECT_EQ(deserialize(serialize(m)), m) << "data kind " << k;
  }
}

TEST(Wire, RandomMessagesRoundTrip) {
  testgen::MessageGen gen(2024);
  for (int i = 0; i < 10000; ++i) {
    const Message m = gen.any();
    const std::string bytes = serialize(m);
    const Message back = deserialize(bytes);
    ASSERT_EQ(back, m) << "iteration " << i;
    ASSERT_EQ(serialize(back), bytes) << "iteration " << i;
  }
}

TEST(Wire, PayloadKeysAreSorted) {
  const std::string b = serialize(ControlMessage{SetCamera{}});
  const auto j = nlohmann::json::parse(b.substr(kWireHeaderSize));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(keys.size(), 7u);
}

TEST(Wire, NavigateUsesDirectionNames) {
  const std::string b = serialize(ControlMessage{Navigate{NavDirection::kBackward, false}});
  EXPECT_EQ(b.substr(kWireHeaderSize), R"({"active":false,"direction":"backward"})");
}

TEST(Wire, EmptyInputIsTruncated) { EXPECT_EQ(wire_code(""), WireErrorCode::kTruncated); }

TEST(Wire, PartialHeaderIsTruncated) {
  EXPECT_EQ(wire_code("HV"), WireErrorCode::kTruncated);
  EXPECT_EQ(wire_code("HVW1\x02\x00"), WireErrorCode::kTruncated);
}

TEST(Wire, CorruptMagic) {
  std::string b = serialize(ControlMessage{ExitBioscope{}});
  b[0] = 'X';
  EXPECT_EQ(wire_code(b), WireErrorCode::kBadMagic);
  EXPECT_EQ(wire_code("Q"), WireErrorCode::kBadMagic);
}

TEST(Wire, UnknownType) {
  EXPECT_EQ(wire_code(frame_bytes(0x00, "{}")), WireErrorCode::kUnknownType);
  EXPECT_EQ(wire_code(frame_bytes(0x0C, "{}")), WireErrorCode::kUnknownType);
  EXPECT_EQ(wire_code(frame_bytes(0x84, "{}")), WireErrorCode::kUnknownType);
}

TEST(Wire, LengthOverflow) {
  std::string b("HVW1\x09", 5);
  b += std::string("\xff\xff\xff\xff", 4);
  EXPECT_EQ(wire_code(b), WireErrorCode::kLengthOverflow);
}

TEST(Wire, ShortPayloadIsTruncated) {
  std::string b = serialize(ControlMessage{SetGaze{3, 4}});
  b.pop_back();
  EXPECT_EQ(wire_code(b), WireErrorCode::kTruncated);
}

TEST(Wire, TrailingBytes) {
  EXPECT_EQ(wire_code(serialize(ControlMessage{ExitBioscope{}}) + "x"), WireErrorCode::kTrailingBytes);
}

TEST(Wire, MalformedPayloads) {
  const std::pair<std::uint8_t, const char*> cases[] = {
      {0x02, "{"},
      {0x02, "[]"},
      {0x02, R"({"x":1})"},
      {0x02, R"({"x":"1","y":2})"},
      {0x03, R"({"l1":16,"l2":0})"},
      {0x03, R"({"l1":1.5,"l2":0})"},
      {0x04, R"({"l1":-1})"},
      {0x06, R"({"point":[0,0],"normal":[0,0,1],"enabled":true})"},
      {0x06, R"({"point":[0,0,0],"normal":[0,0,0],"enabled":true})"},
      {0x07, R"({"direction":"sideways","active":true})"},
      {0x07, R"({"direction":"left","active":1})"},
      {0x01, R"({"position":[0,0,0],"forward":[0,0,1],"up":[0,0,2],"vertical_fov":1,"width":8,"height":8,"ipd":1})"},
      {0x01, R"({"position":[0,0,0],"forward":[0,0,1],"up":[0,1,0],"vertical_fov":1,"width":0,"height":8,"ipd":1})"},
      {0x0B, R"({"k":0.5})"},
      {0x82, R"({"frame_id":-4})"},
      {0x80, "short"},
      {0x02, "\xff\xfe"},
  };
  for (const auto& [type, payload] : cases)
    EXPECT_EQ(wire_code(frame_bytes(type, payload)), WireErrorCode::kBadPayload) << payload;
}

TEST(Wire, MutationFuzzThrowsOnlyWireErrors) {
  testgen::MessageGen gen(99);
  int decoded = 0, rejected = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string b = serialize(gen.any());
    const int edits = gen.integer(1, 4);
    for (int e = 0; e < edits; ++e) {
      const std::size_t at = std::size_t(gen.integer(0, int(b.size()) - 1));
      switch (gen.integer(0, 3)) {
        case 0: b[at] = char(gen.integer(0, 255)); break;
        case 1: b.erase(at, std::size_t(gen.integer(1, 8))); break;
        case 2: b.insert(at, 1, char(gen.integer(0, 255))); break;
        default: b.resize(at); break;
      }
      if (b.empty()) break;
    }
    try {
      const Message m = deserialize(b);
      EXPECT_EQ(deserialize(serialize(m)), m);
      ++decoded;
    } catch (const WireError&) {
      ++rejected;
    } catch (const std::exception& e) {
      FAIL() << "non-wire exception: " << e.what();
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(Wire, RandomBytesThrowOnlyWireErrors) {
  testgen::MessageGen gen(5);
  for (int i = 0; i < 20000; ++i) {
    std::string b = gen.coin() ? std::string("HVW1") : std::string();
    const int n = gen.integer(0, 64);
    for (int k = 0; k < n; ++k) b.push_back(char(gen.integer(0, 255)));
    try {
      deserialize(b);
    } catch (const WireError&) {
    } catch (const std::exception& e) {
      FAIL() << "non-wire exception: " << e.what();
    }
  }
}

// ---- control

TEST(Control, ToggleTwiceIsIdentity) {
  const auto& a = *assets32();
  const SceneState s0 = start_state();
  const auto r1 = apply_control(a, s0, ToggleOrgan{kStomach});
  EXPECT_FALSE(r1.state.selection.contains(kStomach));
  const auto r2 = apply_control(a, r1.state, ToggleOrgan{kStomach});
  EXPECT_EQ(r2.state, s0);
  EXPECT_FALSE(r1.reply);
}

TEST(Control, ToggleUnknownOrganRejected) {
  const SceneState s0 = start_state();
  const auto r = apply_control(*assets32(), s0, ToggleOrgan{OrganId{9, 9}});
  ASSERT_TRUE(r.reply);
  EXPECT_EQ(std::get<ErrorMessage>(*r.reply).code, "unknown-organ");
  EXPECT_EQ(r.state, s0);
}

TEST(Control, SelectAndDeselectSystem) {
  const auto& a = *assets32();
  SceneState s = start_state();
  s.selection.clear();
  const auto sel = apply_control(a, s, SelectAllInSystem{3}).state;
  for (const auto& e : a.hierarchy().entries())
    EXPECT_EQ(sel.selection.contains(e.organ), e.organ.l1 == 3) << e.organ.str();
  EXPECT_EQ(apply_control(a, sel, SelectAllInSystem{3}).state, sel);
  const auto both = apply_control(a, sel, SelectAllInSystem{5}).state;
  const auto des = apply_control(a, both, DeselectAllInSystem{3}).state;
  EXPECT_EQ(des.selection, (render::SelectionSet{kHeart}));
  EXPECT_EQ(apply_control(a, des, DeselectAllInSystem{3}).state, des);
  EXPECT_EQ(apply_control(a, des, SelectAllInSystem{12}).state, des);
}

TEST(Control, BioscopeRoundTripRestoresState) {
  const auto& a = *assets32();
  const SceneState s0 = start_state();
  const auto in = apply_control(a, s0, EnterBioscope{kLiver});
  EXPECT_FALSE(in.reply);
  EXPECT_EQ(in.state.mode, Mode::kBioscope);
  EXPECT_EQ(in.state.selection, (render::SelectionSet{kLiver}));
  EXPECT_DOUBLE_EQ(in.state.model.scale, 2.0 * s0.model.scale);
  const auto again = apply_control(a, in.state, EnterBioscope{kLiver});
  EXPECT_EQ(apply_control(a, again.state, ExitBioscope{}).state, s0);
  EXPECT_EQ(apply_control(a, in.state, ExitBioscope{}).state, s0);
}

TEST(Control, BioscopeNeedsSelectedTarget) {
  const auto& a = *assets32();
  const SceneState s = apply_control(a, start_state(), ToggleOrgan{kHeart}).state;
  const auto r = apply_control(a, s, EnterBioscope{kHeart});
  ASSERT_TRUE(r.reply);
  EXPECT_EQ(std::get<ErrorMessage>(*r.reply).code, "target-not-selected");
  EXPECT_EQ(r.state, s);
}

TEST(Control, ExitOutsideBioscopeIsNoop) {
  const SceneState s0 = start_state();
  EXPECT_EQ(apply_control(*assets32(), s0, ExitBioscope{}).state, s0);
}

TEST(Control, ClipPlaneNormalized) {
  const auto r = apply_control(*assets32(), start_state(), SetClipPlane{{1, 2, 3}, {0, 3, 4}, true});
  EXPECT_FALSE(r.reply);
  EXPECT_NEAR(r.state.clip.normal.y, 0.6, 1e-15);
  EXPECT_NEAR(r.state.clip.normal.z, 0.8, 1e-15);
  EXPECT_TRUE(r.state.clip.enabled);
  const auto bad = apply_control(*assets32(), start_state(), SetClipPlane{{0, 0, 0}, {0, 0, 0}, true});
  ASSERT_TRUE(bad.reply);
  EXPECT_EQ(std::get<ErrorMessage>(*bad.reply).code, "bad-message");
}

TEST(Control, GazeIsClampedToFrame) {
  const auto r = apply_control(*assets32(), start_state(), SetGaze{-5, 1000});
  EXPECT_EQ(r.state.gaze_x, 0.0);
  EXPECT_EQ(r.state.gaze_y, 40.0);
  EXPECT_NO_THROW(foveation::scene_mapping(r.state));
}

TEST(Control, CameraAndReductionValidated) {
  const auto& a = *assets32();
  const SceneState s0 = start_state();
  SetCamera parallel;
  parallel.up = parallel.forward;
  EXPECT_EQ(std::get<ErrorMessage>(*apply_control(a, s0, parallel).reply).code, "bad-message");
  EXPECT_EQ(std::get<ErrorMessage>(*apply_control(a, s0, SetReduction{20.0}).reply).code, "bad-message");
  const auto ok = apply_control(a, s0, SetReduction{2.0});
  EXPECT_FALSE(ok.reply);
  EXPECT_EQ(ok.state.reduction, 2.0);
  SetCamera small;
  small.width = 40;
  small.height = 20;
  const auto cam = apply_control(a, s0, small);
  EXPECT_FALSE(cam.reply);
  EXPECT_EQ(cam.state.gaze_x, 24.0);
  EXPECT_EQ(cam.state.gaze_y, 20.0);
  small.height = 10;
  EXPECT_EQ(std::get<ErrorMessage>(*apply_control(a, s0, small).reply).code, "bad-message");
}

TEST(Control, PickReturnsOrganUnderPixel) {
  const auto& a = *assets32();
  SceneState s = start_state();
  s.selection = {kHeart};
  const Vec3 c = a.surface(kHeart)->mesh.empty() ? Vec3{} : mesh::mesh_bounds(a.surface(kHeart)->mesh).center();
  // Project the heart center into the mono image.
  const Vec3 d = s.model.to_world(c) - s.camera.position;
  const double z = dot(d, s.camera.f());
  const double px = s.camera.width / 2.0 + s.camera.focal_px() * dot(d, s.camera.right()) / z;
  const double py = s.camera.height / 2.0 - s.camera.focal_px() * dot(d, s.camera.true_up()) / z;
  const auto r = apply_control(a, s, PickOrgan{px, py});
  ASSERT_TRUE(r.reply);
  const auto& pick = std::get<PickResultMessage>(*r.reply);
  ASSERT_TRUE(pick.organ);
  EXPECT_EQ(*pick.organ, kHeart);
  EXPECT_EQ(pick.name, "heart");
  const auto miss = apply_control(a, s, PickOrgan{0.5, 0.5});
  EXPECT_FALSE(std::get<PickResultMessage>(*miss.reply).organ);
  EXPECT_EQ(r.state, s);
}

TEST(Control, NavigateTracksActiveDirections) {
  const auto& a = *assets32();
  SceneState s = apply_control(a, start_state(), Navigate{NavDirection::kLeft, true}).state;
  s = apply_control(a, s, Navigate{NavDirection::kUp, true}).state;
  EXPECT_EQ(s.navigating.size(), 2u);
  s = apply_control(a, s, Navigate{NavDirection::kLeft, false}).state;
  EXPECT_EQ(s.navigating, (std::set<NavDirection>{NavDirection::kUp}));
}

TEST(Control, RandomMessagesKeepStateValid) {
  const auto& a = *assets32();
  testgen::MessageGen gen(77);
  SceneState s = start_state();
  for (int i = 0; i < 300; ++i) {
    auto m = gen.control();
    if (auto* c = std::get_if<SetCamera>(&m)) {
      c->width = gen.integer(16, 64);
      c->height = gen.integer(16, 64);
    }
    s = apply_control(a, s, m).state;
    ASSERT_NO_THROW(s.validate());
    ASSERT_NO_THROW(foveation::scene_mapping(s));
  }
}

// ---- navigation

TEST(Navigation, SpeedLaw) {
  const double vmax = 7.0, d0 = 30.0, tau = 10.0;
  EXPECT_EQ(navigation_speed(d0, vmax, d0, tau), vmax);
  EXPECT_EQ(navigation_speed(1e9, vmax, d0, tau), vmax);
  EXPECT_EQ(navigation_speed(d0 + 1e-9, vmax, d0, tau), vmax);
  EXPECT_NEAR(navigation_speed(d0 - tau, vmax, d0, tau), vmax / std::numbers::e, 1e-9);
  EXPECT_NEAR(navigation_speed(std::nextafter(d0, 0.0), vmax, d0, tau), vmax, 1e-12);
  EXPECT_EQ(navigation_speed(-5.0, vmax, d0, tau), navigation_speed(0.0, vmax, d0, tau));
  double prev = 0.0;
  for (double d = 0.0; d < d0; d += 0.5) {
    const double v = navigation_speed(d, vmax, d0, tau);
    EXPECT_GT(v, prev);
    prev = v;
  }
  // Halving per tau*ln2.
  EXPECT_NEAR(navigation_speed(d0 - tau * std::numbers::ln2, vmax, d0, tau), vmax / 2.0, 1e-12);
}

TEST(Navigation, RejectsNonPositiveParameters) {
  EXPECT_THROW(navigation_speed(1.0, 0.0, 1.0, 1.0), Error);
  EXPECT_THROW(navigation_speed(1.0, 1.0, -1.0, 1.0), Error);
  EXPECT_THROW(navigation_speed(1.0, 1.0, 1.0, 0.0), Error);
}

TEST(Navigation, ParametersScaleWithModel) {
  const Aabb box{{0, 0, 0}, {3, 4, 0}};
  const auto p = navigation_params(box, {});
  EXPECT_DOUBLE_EQ(p.d0, 5.0);
  EXPECT_DOUBLE_EQ(p.tau, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(p.v_max, 2.5);
  render::ModelTransform twice;
  twice.scale = 2.0;
  EXPECT_DOUBLE_EQ(navigation_params(box, twice).d0, 10.0);
}

TEST(Navigation, LeftMovesModelRight) {
  const SceneState s0 = start_state();
  const auto params = navigation_params(assets32()->volume().bounds(), s0.model);
  const SceneState s1 = step_navigation(s0, NavDirection::kLeft, 0.1, params);
  const Vec3 delta = s1.model.translation - s0.model.translation;
  EXPECT_GT(dot(delta, s0.camera.right()), 0.0);
  EXPECT_NEAR(dot(delta, s0.camera.f()), 0.0, 1e-12);
  EXPECT_EQ(s1.camera, s0.camera);
}

TEST(Navigation, EachDirectionOpposesCommand) {
  const SceneState s0 = start_state();
  const auto params = navigation_params(assets32()->volume().bounds(), s0.model);
  const render::Camera& c = s0.camera;
  const std::pair<NavDirection, Vec3> cases[] = {
      {NavDirection::kLeft, c.right()},     {NavDirection::kRight, -c.right()}, {NavDirection::kUp, -c.true_up()},
      {NavDirection::kDown, c.true_up()},   {NavDirection::kForward, -c.f()},   {NavDirection::kBackward, c.f()}};
  for (const auto& [dir, expected] : cases) {
    const Vec3 delta = step_navigation(s0, dir, 0.2, params).model.translation - s0.model.translation;
    EXPECT_NEAR(dot(normalized(delta), expected), 1.0, 1e-12) << direction_name(dir);
  }
}

TEST(Navigation, StepVanishesWithDt) {
  const SceneState s0 = start_state();
  const auto params = navigation_params(assets32()->volume().bounds(), s0.model);
  double prev = INFINITY;
  for (double dt : {1e-1, 1e-3, 1e-6, 1e-9}) {
    const double m = norm(step_navigation(s0, NavDirection::kForward, dt, params).model.translation - s0.model.translation);
    EXPECT_LT(m, prev);
    EXPECT_LE(m, params.v_max * dt * (1 + 1e-12));
    prev = m;
  }
  EXPECT_EQ(step_navigation(s0, NavDirection::kForward, 0.0, params), s0);
}

TEST(Navigation, SubstepsMatchSingleStepWithinBound) {
  SceneState s0 = start_state();
  const auto box = assets32()->volume().bounds();
  const auto params = navigation_params(box, s0.model);
  // Start inside the slow zone so v varies along the path.
  s0.camera.position = s0.model.box_to_world(box).center() - s0.camera.f() * (0.6 * params.d0);
  ASSERT_LT(distance_to_box(s0.camera.position, s0.model.box_to_world(box)), params.d0);
  for (double dt : {0.2, 0.05, 0.01}) {
    const SceneState one = step_navigation(s0, NavDirection::kForward, 2 * dt, params);
    const SceneState two =
        step_navigation(step_navigation(s0, NavDirection::kForward, dt, params), NavDirection::kForward, dt, params);
    const double diff = norm(one.model.translation - two.model.translation);
    const double vprime = params.v_max / params.tau;  // max |dv/dd|
    EXPECT_LE(diff, vprime * params.v_max * dt * dt * (1 + 1e-9)) << dt;
  }
}

TEST(Navigation, ConstantSpeedFarAway) {
  SceneState s0 = start_state();
  const auto box = assets32()->volume().bounds();
  const auto params = navigation_params(box, s0.model);
  s0.camera.position = s0.model.box_to_world(box).center() - s0.camera.f() * (10 * params.d0);
  const SceneState one = step_navigation(s0, NavDirection::kRight, 0.5, params);
  const SceneState two =
      step_navigation(step_navigation(s0, NavDirection::kRight, 0.25, params), NavDirection::kRight, 0.25, params);
  EXPECT_NEAR(norm(one.model.translation - s0.model.translation), params.v_max * 0.5, 1e-9);
  EXPECT_NEAR(norm(one.model.translation - two.model.translation), 0.0, 1e-9);
}

TEST(Navigation, HeldInBioscope) {
  const auto& a = *assets32();
  const SceneState in = apply_control(a, start_state(), EnterBioscope{kLiver}).state;
  const auto params = navigation_params(a.volume().bounds(), in.model);
  EXPECT_EQ(step_navigation(in, NavDirection::kLeft, 1.0, params), in);
}

// ---- session core

namespace {

std::vector<std::string> scripted_log() {
  SetCamera cam;
  const SceneState s = start_state();
  cam.position = to_array(s.camera.position);
  cam.forward = to_array(s.camera.forward);
  cam.up = to_array(s.camera.up);
  cam.width = 48;
  cam.height = 40;
  cam.ipd = s.camera.ipd;
  const Vec3 c = assets32()->volume().bounds().center();
  const std::vector<ControlMessage> script = {
      cam,
      SetGaze{30, 12},
      ToggleOrgan{kStomach},
      SetClipPlane{to_array(c), {1, 0, 0}, true},
      Navigate{NavDirection::kForward, true},
      Navigate{NavDirection::kLeft, true},
      Navigate{NavDirection::kForward, false},
      Navigate{NavDirection::kLeft, false},
      ToggleOrgan{kStomach},
      EnterBioscope{kLiver},
      SetReduction{2.0},
      ExitBioscope{},
  };
  std::vector<std::string> log;
  for (const auto& m : script) log.push_back(serialize(m));
  return log;
}

std::vector<std::uint64_t> replay(const std::vector<std::string>& log) {
  SessionCore core(assets32(), start_state());
  std::vector<std::uint64_t> hashes;
  for (const auto& bytes : log) {
    EXPECT_TRUE(core.handle_bytes(bytes).empty());
    core.advance(0.25);
    if (core.needs_render())
      for (const auto& f : core.render()) hashes.push_back(fnv1a64(f.frame.pixels) ^ (f.frame.frame_id << 1));
  }
  return hashes;
}

}  // namespace

TEST(Session, ScriptedReplayIsDeterministic) {
  const auto log = scripted_log();
  const auto a = replay(log), b = replay(log);
  EXPECT_GE(a.size(), 2 * log.size() - 2);
  EXPECT_EQ(a, b);
  // Distinct scene states produce distinct pictures somewhere along the script.
  std::set<std::uint64_t> pictures(a.begin(), a.end());
  EXPECT_GT(pictures.size(), 4u);
}

TEST(Session, FramesCarryStateAndIncreasingIds) {
  SessionCore core(assets32(), start_state());
  core.handle(SetGaze{10, 30});
  auto frames = core.render();
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].frame.eye, render::Eye::kLeft);
  EXPECT_EQ(frames[1].frame.eye, render::Eye::kRight);
  EXPECT_EQ(frames[0].frame.frame_id + 1, frames[1].frame.frame_id);
  EXPECT_EQ(frames[0].frame.mapping.gaze_x, 10.0f);
  EXPECT_EQ(frames[0].frame.mapping.gaze_y, 30.0f);
  EXPECT_EQ(frames[0].frame.mapping.width, 48);
  EXPECT_EQ(core.last_frame_id(), frames[1].frame.frame_id);
  const auto more = core.render();
  EXPECT_GT(more[0].frame.frame_id, frames[1].frame.frame_id);
}

TEST(Session, RendersOnlyWhenSomethingChanged) {
  SessionCore core(assets32(), start_state());
  EXPECT_TRUE(core.needs_render());
  core.render();
  EXPECT_FALSE(core.needs_render());
  core.handle(ExitBioscope{});
  EXPECT_FALSE(core.needs_render());
  core.handle(ToggleOrgan{OrganId{9, 9}});
  EXPECT_FALSE(core.needs_render());
  core.handle(Navigate{NavDirection::kUp, true});
  EXPECT_TRUE(core.needs_render());
  core.render();
  EXPECT_TRUE(core.needs_render());
  core.handle(Navigate{NavDirection::kUp, false});
  core.render();
  EXPECT_FALSE(core.needs_render());
}

TEST(Session, CorruptBytesLeaveStateAlone) {
  SessionCore core(assets32(), start_state());
  const SceneState before = core.state();
  std::string b = serialize(ControlMessage{ToggleOrgan{kLiver}});
  b[1] = '?';
  const auto replies = core.handle_bytes(b);
  const auto* e = error_of(replies);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->code, "bad-message");
  EXPECT_EQ(core.state(), before);
  const auto replies2 = core.handle_bytes(serialize(DataMessage{Ack{3}}));
  const auto* e2 = error_of(replies2);
  ASSERT_TRUE(e2);
  EXPECT_EQ(e2->code, "bad-message");
}

TEST(Session, ToggleChangesNextFrame) {
  SessionCore core(assets32(), start_state());
  const auto before = core.render();
  core.handle(DeselectAllInSystem{3});
  core.handle(DeselectAllInSystem{5});
  const auto after = core.render();
  EXPECT_NE(before[0].frame.pixels, after[0].frame.pixels);
  for (std::size_t i = 0; i < after[0].frame.pixels.size(); i += 4) {
    ASSERT_EQ(after[0].frame.pixels[i], 0);
    ASSERT_EQ(after[0].frame.pixels[i + 3], 255);
  }
}
