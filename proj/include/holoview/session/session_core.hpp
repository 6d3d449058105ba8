#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "holoview/foveation/frame.hpp"
#include "holoview/session/control.hpp"
#include "holoview/session/navigation.hpp"
#include "holoview/session/wire.hpp"

namespace holoview::session {

/// A scene snapshot plus the frame ids reserved for it.
struct RenderJob {
  SceneState state;
  std::uint64_t first_frame_id = 0;
};

/// Renders the left then the right eye of a snapshot.
inline std::vector<FrameMessage> render_job(const RenderAssets& assets, const RenderJob& job,
                                            render::SampleStats* stats = nullptr) {
  const auto mapping = foveation::scene_mapping(job.state);
  std::vector<FrameMessage> out;
  out.reserve(2);
  std::uint64_t id = job.first_frame_id;
  for (const auto eye : {render::Eye::kLeft, render::Eye::kRight})
    out.push_back({foveation::encode_frame(assets, job.state, eye, mapping, id++, stats)});
  return out;
}

/// Single-connection state machine. Not synchronized; callers serialize access.
class SessionCore {
 public:
  SessionCore(std::shared_ptr<const RenderAssets> assets, SceneState initial)
      : assets_(std::move(assets)), state_(std::move(initial)) {
    if (!assets_) throw Error(ErrorKind::kPrecondition, "session needs assets");
    state_.validate();
    model_box_ = assets_->volume().bounds();
  }

  const SceneState& state() const { return state_; }
  const RenderAssets& assets() const { return *assets_; }
  std::shared_ptr<const RenderAssets> shared_assets() const { return assets_; }

  std::vector<DataMessage> handle(const ControlMessage& msg) {
    auto r = apply_control(*assets_, state_, msg);
    if (!(r.state == state_)) dirty_ = true;
    state_ = std::move(r.state);
    std::vector<DataMessage> out;
    if (r.reply) out.push_back(std::move(*r.reply));
    return out;
  }

  /// Decodes one wire message; undecodable or non-control input yields an Error reply.
  std::vector<DataMessage> handle_bytes(std::string_view bytes) {
    Message m;
    try {
      m = deserialize(bytes);
    } catch (const WireError& e) {
      return {ErrorMessage{"bad-message", e.what()}};
    }
    auto control = as_stream<ControlMessage>(m);
    if (!control) return {ErrorMessage{"bad-message", "not a control message"}};
    return handle(*control);
  }

  /// Integrates every active navigation direction over dt seconds.
  void advance(double dt) {
    if (state_.navigating.empty() || state_.mode == render::Mode::kBioscope || !(dt > 0.0)) return;
    const auto params = navigation_params(model_box_, state_.model);
    const auto active = state_.navigating;
    for (const auto d : active) state_ = step_navigation(state_, d, dt, params);
    dirty_ = true;
  }

  bool needs_render() const { return dirty_ || !state_.navigating.empty(); }
  void mark_dirty() { dirty_ = true; }

  /// Snapshot for rendering; reserves one frame id per eye.
  RenderJob take_job() {
    RenderJob job{state_, next_frame_id_};
    next_frame_id_ += 2;
    dirty_ = false;
    return job;
  }

  std::vector<FrameMessage> render(render::SampleStats* stats = nullptr) { return render_job(*assets_, take_job(), stats); }

  /// Id of the most recent frame handed out, or 0 before any.
  std::uint64_t last_frame_id() const { return next_frame_id_ - 1; }

 private:
  std::shared_ptr<const RenderAssets> assets_;
  SceneState state_;
  Aabb model_box_;
  bool dirty_ = true;
  std::uint64_t next_frame_id_ = 1;
};

}  // namespace holoview::session
