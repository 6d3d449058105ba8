#include <boost/asio/signal_set.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "holoview/foveation/frame.hpp"
#include "holoview/pipeline/preprocess.hpp"
#include "holoview/render/png.hpp"
#include "holoview/session/server.hpp"
#include "holoview/volume/phantom.hpp"

namespace fs = std::filesystem;
using namespace holoview;
using volume::OrganId;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitPipeline = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> numbers(const std::string& flag, const std::string& text, std::size_t min_count,
                            std::size_t max_count) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !std::isfinite(v))
      throw UsageError(flag + ": '" + part + "' is not a number");
    out.push_back(v);
  }
  if (out.size() < min_count || out.size() > max_count)
    throw UsageError(flag + " expects " +
                     (min_count == max_count ? std::to_string(min_count)
                                             : std::to_string(min_count) + " to " + std::to_string(max_count)) +
                     " comma-separated numbers");
  return out;
}

Vec3 vec_at(const std::vector<double>& v, std::size_t i) { return {v[i], v[i + 1], v[i + 2]}; }

std::string valid_organs(const volume::SegmentationHierarchy& h) {
  std::string s;
  for (const auto& e : h.entries()) s += "\n  " + e.organ.str() + "  " + e.name;
  return s;
}

/// Comma-separated organs as `l1:l2` or hierarchy names.
std::set<OrganId> parse_organs(const std::string& flag, const std::string& text,
                               const volume::SegmentationHierarchy& h) {
  std::set<OrganId> out;
  if (text == "none" || text.empty()) return out;
  if (text == "all") return h.all_organs();
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon != std::string::npos) {
      try {
        std::size_t u1 = 0, u2 = 0;
        const int l1 = std::stoi(item.substr(0, colon), &u1), l2 = std::stoi(item.substr(colon + 1), &u2);
        const OrganId o{std::uint8_t(l1), std::uint8_t(l2)};
        if (u1 == colon && u2 == item.size() - colon - 1 && l1 >= 0 && l1 < 16 && l2 >= 0 && l2 < 16 && h.find(o)) {
          out.insert(o);
          continue;
        }
      } catch (const std::exception&) {
      }
    } else if (const auto* e = h.find_by_name(item)) {
      out.insert(e->organ);
      continue;
    }
    throw UsageError(flag + ": unknown organ '" + item + "'; valid organs:" + valid_organs(h));
  }
  return out;
}

void require_input(const std::string& flag, const std::string& path) {
  if (fs::is_directory(path) || fs::exists(volume::container_paths(path).manifest)) return;
  throw UsageError(flag + ": no volume container or asset directory at '" + path + "'");
}

void require_writable_parent(const std::string& flag, const fs::path& out) {
  const fs::path parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
  const fs::path probe = parent / (".holoview_probe_" + std::to_string(::getpid()));
  std::ofstream f(probe);
  if (!f) throw UsageError(flag + ": cannot write to '" + parent.string() + "'");
  f.close();
  fs::remove(probe);
}

// ---- phantom

struct PhantomArgs {
  std::string preset, spec, out, dims = "64,64,64";
  std::uint64_t seed = 1;
};

int run_phantom(const PhantomArgs& a) {
  volume::PhantomSpec spec;
  if (a.preset.empty() == a.spec.empty()) throw UsageError("give exactly one of --preset or --spec");
  if (!a.spec.empty()) {
    std::ifstream in(a.spec);
    if (!in) throw UsageError("--spec: cannot read '" + a.spec + "'");
    std::stringstream text;
    text << in.rdbuf();
    try {
      spec = volume::parse_phantom_spec(text.str());
    } catch (const Error& e) {
      throw UsageError(std::string("--spec: ") + e.what());
    }
  } else {
    const auto d = numbers("--dims", a.dims, 3, 3);
    for (double v : d)
      if (v < 1 || v > 2048 || v != std::floor(v)) throw UsageError("--dims: each extent must be an integer in [1, 2048]");
    try {
      spec = volume::phantom_preset(a.preset, volume::Dims{int(d[0]), int(d[1]), int(d[2])}, a.seed);
    } catch (const Error& e) {
      throw UsageError(std::string("--preset: ") + e.what());
    }
  }
  spec.seed = a.seed;
  require_writable_parent("--out", volume::container_paths(a.out).manifest);
  const auto vol = volume::generate_phantom(spec);
  volume::save_volume(vol, a.out);
  spec.hierarchy.save(volume::container_paths(a.out).hierarchy);
  const auto& d = vol.dims();
  std::cout << "wrote " << volume::container_paths(a.out).manifest << " (" << d.nx << "x" << d.ny << "x" << d.nz << ")\n";
  std::cout << "label histogram:\n";
  for (const auto& [raw, count] : vol.histogram()) {
    const OrganId o = volume::organ_of(raw);
    const auto* e = raw ? spec.hierarchy.find(o) : nullptr;
    std::cout << "  " << std::setw(5) << raw << "  " << std::setw(6) << (raw ? o.str() : "bg") << "  " << std::setw(9)
              << count << "  " << (raw ? (e ? e->name : "?") : "background") << '\n';
  }
  return 0;
}

// ---- preprocess

struct PreprocessArgs {
  std::string in, out, gaps, targets;
  int stride = 1, downsample = 1, taubin_iterations = 20;
  std::size_t max_triangles = 20000;
};

int run_preprocess(const PreprocessArgs& a) {
  require_input("--in", a.in);
  if (fs::is_directory(a.in)) throw UsageError("--in: expected a volume container, not a directory");
  pipeline::PreprocessOptions opt;
  opt.stride = a.stride;
  opt.downsample = a.downsample;
  opt.max_triangles = a.max_triangles;
  opt.taubin.iterations = a.taubin_iterations;
  if (!a.gaps.empty())
    for (double z : numbers("--gaps", a.gaps, 1, 1u << 20)) {
      if (z < 0 || z != std::floor(z)) throw UsageError("--gaps: slice indices must be non-negative integers");
      opt.gaps.insert(int(z));
    }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw UsageError("--out: cannot create '" + a.out + "': " + ec.message());
  require_writable_parent("--out", fs::path(a.out) / "x");

  volume::LabeledVolume vol;
  try {
    vol = volume::load_volume(a.in);
  } catch (const Error& e) {
    throw pipeline::StageError("load", e);
  }
  const auto hierarchy = pipeline::load_hierarchy_for(a.in, vol);
  if (!a.targets.empty()) opt.targets = parse_organs("--targets", a.targets, hierarchy);
  for (int z : opt.gaps)
    if (z >= vol.dims().nz) throw UsageError("--gaps: slice " + std::to_string(z) + " is outside the volume");

  const auto result = pipeline::preprocess(vol, opt);
  try {
    pipeline::write_assets(a.out, result, hierarchy);
  } catch (const Error& e) {
    throw pipeline::StageError("write", e);
  }
  std::cout << "wrote " << a.out << '\n';
  for (const auto& [o, dsc] : result.report.dice_known_slices)
    std::cout << "  dice@known-slices " << o.str() << " = " << dsc << '\n';
  for (const auto& m : result.report.meshes)
    std::cout << "  mesh " << m.organ.str() << ": " << m.triangles << " triangles (" << m.extracted_triangles
              << " extracted), chi=" << m.euler_characteristic << ", components=" << m.components
              << (m.closed_manifold ? ", closed manifold" : ", NOT closed manifold") << '\n';
  return 0;
}

// ---- render

struct RenderArgs {
  std::string in, out, select = "all", clip, camera, gaze, eye = "mono";
  int width = 256, height = 256;
  double fov_deg = 60.0, reduction = 1.0;
};

render::SceneState scene_from(const render::RenderAssets& assets, const RenderArgs& a) {
  auto s = render::default_scene(assets, a.width, a.height);
  s.selection = parse_organs("--select", a.select, assets.hierarchy());
  if (!(a.fov_deg > 0 && a.fov_deg < 180)) throw UsageError("--fov must be in (0, 180) degrees");
  s.camera.vertical_fov = a.fov_deg * std::numbers::pi / 180.0;
  if (!a.camera.empty()) {
    const auto c = numbers("--camera", a.camera, 6, 9);
    if (c.size() != 6 && c.size() != 9) throw UsageError("--camera expects px,py,pz,fx,fy,fz[,ux,uy,uz]");
    s.camera.position = vec_at(c, 0);
    s.camera.forward = vec_at(c, 3);
    if (c.size() == 9) s.camera.up = vec_at(c, 6);
  }
  if (!a.clip.empty()) {
    const auto c = numbers("--clip", a.clip, 6, 6);
    try {
      s.clip = render::make_clip_plane(vec_at(c, 0), vec_at(c, 3));
    } catch (const Error& e) {
      throw UsageError(std::string("--clip: ") + e.what());
    }
  }
  if (!a.gaze.empty()) {
    const auto g = numbers("--gaze", a.gaze, 2, 2);
    s.gaze_x = g[0];
    s.gaze_y = g[1];
  }
  s.reduction = a.reduction;
  try {
    s.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return s;
}

int run_render(const RenderArgs& a) {
  require_input("--in", a.in);
  if (a.width < 1 || a.height < 1 || a.width > 16384 || a.height > 16384)
    throw UsageError("--width/--height must be in [1, 16384]");
  if (!(a.reduction >= 1.0)) throw UsageError("--reduction must be >= 1");
  const std::map<std::string, render::Eye> eyes{
      {"mono", render::Eye::kMono}, {"left", render::Eye::kLeft}, {"right", render::Eye::kRight}};
  if (!eyes.contains(a.eye)) throw UsageError("--eye must be mono, left or right");
  require_writable_parent("--out", a.out);
  std::shared_ptr<const render::RenderAssets> assets;
  try {
    assets = pipeline::load_assets(a.in);
  } catch (const Error& e) {
    throw pipeline::StageError("load", e);
  }
  const auto scene = scene_from(*assets, a);
  render::Image8 img;
  if (a.reduction == 1.0) {
    img = render::to_rgba8(render::render_frame(*assets, scene, eyes.at(a.eye)));
  } else {
    foveation::FoveaMapping mapping;
    try {
      mapping = foveation::scene_mapping(scene);
    } catch (const Error& e) {
      throw UsageError(std::string("--reduction: ") + e.what());
    }
    img = foveation::decode_frame(foveation::encode_frame(*assets, scene, eyes.at(a.eye), mapping, 0));
  }
  if (fs::path(a.out).extension() == ".png")
    render::write_png(img, a.out);
  else
    render::write_raw(img, a.out);
  std::size_t lit = 0;
  for (std::size_t i = 0; i < img.data.size(); i += 4) lit += img.data[i] || img.data[i + 1] || img.data[i + 2];
  std::printf("wrote %s (%dx%d, %zu non-background pixels, hash %016llx)\n", a.out.c_str(), img.width, img.height, lit,
              static_cast<unsigned long long>(img.hash()));
  return 0;
}

// ---- serve

struct ServeArgs {
  std::string in, bind = "127.0.0.1:8080", static_dir;
  double fps = 30.0, reduction = 3.0;
  int width = 320, height = 240, max_sessions = 8;
};

int run_serve(const ServeArgs& a) {
  require_input("--in", a.in);
  if (!(a.reduction >= 1.0)) throw UsageError("--reduction must be >= 1");
  if (!(a.fps > 0.0 && a.fps <= 240.0)) throw UsageError("--fps must be in (0, 240]");
  if (a.max_sessions < 1) throw UsageError("--max-sessions must be >= 1");
  if (!a.static_dir.empty() && !fs::is_directory(a.static_dir))
    throw UsageError("--static: '" + a.static_dir + "' is not a directory");
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("--bind expects host:port");
  session::ServerConfig cfg;
  cfg.host = a.bind.substr(0, colon);
  try {
    std::size_t used = 0;
    const int port = std::stoi(a.bind.substr(colon + 1), &used);
    if (used != a.bind.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("port");
    cfg.port = static_cast<unsigned short>(port);
  } catch (const std::exception&) {
    throw UsageError("--bind: bad port in '" + a.bind + "'");
  }
  cfg.fps = a.fps;
  cfg.reduction = a.reduction;
  cfg.width = a.width;
  cfg.height = a.height;
  cfg.max_sessions = a.max_sessions;
  cfg.static_dir = a.static_dir;
  cfg.log = [](const std::string& line) { std::cerr << "[serve] " << line << std::endl; };

  std::shared_ptr<const render::RenderAssets> assets;
  try {
    assets = pipeline::load_assets(a.in);
  } catch (const Error& e) {
    throw pipeline::StageError("load", e);
  }
  std::unique_ptr<session::Server> server;
  try {
    server = std::make_unique<session::Server>(assets, cfg);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  try {
    server->start();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::cout << "listening on " << cfg.host << ":" << server->port() << std::endl;

  boost::asio::io_context signals_ctx;
  boost::asio::signal_set signals(signals_ctx, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int sig) {
    std::cerr << "[serve] signal " << sig << ", shutting down" << std::endl;
  });
  signals_ctx.run();
  server->stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holoview: labeled-volume preprocessing, rendering and streaming"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "holoview 0.1.0");

  PhantomArgs ph;
  auto* phantom = app.add_subcommand("phantom", "generate a synthetic labeled volume");
  phantom->add_option("--preset", ph.preset, "three-organs | sphere | growing-disk");
  phantom->add_option("--spec", ph.spec, "JSON phantom description");
  phantom->add_option("--dims", ph.dims, "nx,ny,nz for presets")->capture_default_str();
  phantom->add_option("--seed", ph.seed, "intensity texture seed")->capture_default_str();
  phantom->add_option("--out", ph.out, "output container base path")->required();

  PreprocessArgs pp;
  auto* preprocess = app.add_subcommand("preprocess", "repair, resample and mesh a labeled volume");
  preprocess->add_option("--in", pp.in, "input container base path")->required();
  preprocess->add_option("--out", pp.out, "output asset directory")->required();
  preprocess->add_option("--stride", pp.stride, "labeled slice spacing")->capture_default_str()->check(CLI::Range(1, 1000));
  preprocess->add_option("--downsample", pp.downsample, "keep every n-th voxel per axis")
      ->capture_default_str()
      ->check(CLI::Range(1, 64));
  preprocess->add_option("--gaps", pp.gaps, "unlabeled slice indices z1,z2,...");
  preprocess->add_option("--targets", pp.targets, "organs to mesh, l1:l2 or names (default: all present)");
  preprocess->add_option("--max-triangles", pp.max_triangles, "per-organ decimation target")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t(4), std::size_t(100000000)));
  preprocess->add_option("--taubin-iterations", pp.taubin_iterations, "smoothing passes")
      ->capture_default_str()
      ->check(CLI::Range(0, 10000));

  RenderArgs rd;
  auto* render = app.add_subcommand("render", "render one still image");
  render->add_option("--in", rd.in, "asset directory or container base path")->required();
  render->add_option("--out", rd.out, "output image (.png, otherwise raw RGBA8)")->required();
  render->add_option("--width", rd.width)->capture_default_str();
  render->add_option("--height", rd.height)->capture_default_str();
  render->add_option("--select", rd.select, "all | none | l1:l2 or names, comma-separated")->capture_default_str();
  render->add_option("--clip", rd.clip, "px,py,pz,nx,ny,nz");
  render->add_option("--camera", rd.camera, "px,py,pz,fx,fy,fz[,ux,uy,uz]");
  render->add_option("--fov", rd.fov_deg, "vertical field of view, degrees")->capture_default_str();
  render->add_option("--eye", rd.eye, "mono | left | right")->capture_default_str();
  render->add_option("--reduction", rd.reduction, "foveated reduction factor; 1 renders every pixel")
      ->capture_default_str();
  render->add_option("--gaze", rd.gaze, "gx,gy in pixels (default: image center)");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "stream foveated stereo frames over websocket");
  serve->add_option("--in", sv.in, "asset directory or container base path")->required();
  serve->add_option("--bind", sv.bind, "host:port, port 0 picks a free one")->capture_default_str();
  serve->add_option("--fps", sv.fps)->capture_default_str();
  serve->add_option("--reduction", sv.reduction)->capture_default_str();
  serve->add_option("--width", sv.width, "initial frame width")->capture_default_str();
  serve->add_option("--height", sv.height, "initial frame height")->capture_default_str();
  serve->add_option("--max-sessions", sv.max_sessions)->capture_default_str();
  serve->add_option("--static", sv.static_dir, "directory served over HTTP");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*phantom) return run_phantom(ph);
    if (*preprocess) return run_preprocess(pp);
    if (*render) return run_render(rd);
    if (*serve) return run_serve(sv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pipeline::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitUsage;
}
