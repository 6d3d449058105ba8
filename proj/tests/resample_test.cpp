#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "holoview/resample/distance_transform.hpp"
#include "holoview/resample/homotopy.hpp"
#include "holoview/resample/resample.hpp"
#include "holoview/volume/phantom.hpp"

using namespace holoview;
using namespace holoview::resample;

namespace {

// All-pairs oracle for the signed distance definition: half a pixel short of
// the nearest pixel center on the other side of the mask.
std::vector<double> brute_force_sdf(const std::vector<std::uint8_t>& mask, int nx, int ny) {
  std::vector<double> out(mask.size());
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const bool in = mask[std::size_t(y * nx + x)];
      double best = INFINITY;
      for (int v = 0; v < ny; ++v)
        for (int u = 0; u < nx; ++u)
          if (bool(mask[std::size_t(v * nx + u)]) != in) best = std::min(best, std::hypot(double(u - x), double(v - y)));
      out[std::size_t(y * nx + x)] = in ? -(best - 0.5) : best - 0.5;
    }
  return out;
}

std::vector<std::uint8_t> disk_mask(int n, double cx, double cy, double r) {
  std::vector<std::uint8_t> m(std::size_t(n * n));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) m[std::size_t(y * n + x)] = std::hypot(x - cx, y - cy) <= r ? 1 : 0;
  return m;
}

SignedDistanceSlice constant_slice(double value, int n = 4) {
  return SignedDistanceSlice{{3, 5}, n, n, 0, 1.0, std::vector<double>(std::size_t(n * n), value)};
}

SignedDistanceSlice random_slice(std::mt19937& rng, int n = 6) {
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  SignedDistanceSlice s{{3, 5}, n, n, 0, 1.0, std::vector<double>(std::size_t(n * n))};
  for (auto& v : s.grid) v = dist(rng);
  return s;
}

}  // namespace

TEST(DistanceTransform, DiskCenterAndOutsidePoint) {
  const int n = 48;
  const auto mask = disk_mask(n, 24, 24, 10);
  const auto sdf = signed_distance_2d(mask, n, n, 1.0);
  const auto oracle = brute_force_sdf(mask, n, n);
  EXPECT_NEAR(oracle[std::size_t(24 * n + 24)], -10.0, 0.5);
  EXPECT_NEAR(sdf.at(24, 24), -10.0, 0.5);
  EXPECT_NEAR(oracle[std::size_t(24 * n + 39)], 5.0, 0.5);
  EXPECT_NEAR(sdf.at(39, 24), 5.0, 0.5);
  // Boundary pixel.
  EXPECT_LE(std::abs(sdf.at(34, 24)), 0.5 * std::sqrt(2.0));
}

TEST(DistanceTransform, MatchesBruteForceOnRandomMasks) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int nx = 3 + int(rng() % 20), ny = 3 + int(rng() % 20);
    std::vector<std::uint8_t> mask(std::size_t(nx * ny));
    const unsigned density = 1 + rng() % 9;
    for (auto& m : mask) m = (rng() % 10) < density ? 1 : 0;
    const auto oracle = brute_force_sdf(mask, nx, ny);
    const auto sdf = signed_distance_2d(mask, nx, ny, 1.0);
    bool uniform = std::all_of(mask.begin(), mask.end(), [&](auto v) { return v == mask[0]; });
    if (uniform) continue;
    for (std::size_t i = 0; i < mask.size(); ++i) ASSERT_NEAR(sdf.grid[i], oracle[i], 1e-9) << trial << " " << i;
  }
}

TEST(DistanceTransform, ZeroCrossingAndLipschitz) {
  std::mt19937 rng(5);
  const int n = 40;
  std::vector<std::uint8_t> mask(std::size_t(n * n), 0);
  for (int blob = 0; blob < 4; ++blob) {
    const auto d = disk_mask(n, rng() % n, rng() % n, 3 + rng() % 8);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] |= d[i];
  }
  const double pixel = 0.8;
  const auto sdf = signed_distance_2d(mask, n, n, pixel);
  const double eps = 0.5 * std::sqrt(2.0) * pixel;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      ASSERT_EQ(sdf.at(x, y) < 0.0, bool(mask[std::size_t(y * n + x)]));
      if (x + 1 < n) {
        ASSERT_LE(std::abs(sdf.at(x, y) - sdf.at(x + 1, y)), pixel + eps);
      }
      if (y + 1 < n) {
        ASSERT_LE(std::abs(sdf.at(x, y) - sdf.at(x, y + 1)), pixel + eps);
      }
      if (x + 1 < n && y + 1 < n) {
        ASSERT_LE(std::abs(sdf.at(x, y) - sdf.at(x + 1, y + 1)), std::sqrt(2.0) * pixel + eps);
      }
    }
}

TEST(DistanceTransform, DegenerateMasks) {
  const std::vector<std::uint8_t> empty(100, 0), full(100, 1);
  const auto e = signed_distance_2d(empty, 10, 10, 1.0);
  const auto f = signed_distance_2d(full, 10, 10, 1.0);
  for (double v : e.grid) EXPECT_GE(v, std::hypot(10.0, 10.0));
  for (double v : f.grid) EXPECT_LE(v, -std::hypot(10.0, 10.0));
  EXPECT_THROW(signed_distance_2d({}, 0, 0, 1.0), Error);
}

TEST(Homotopy, EndpointsAndMidpointExample) {
  const auto a = constant_slice(1), b = constant_slice(2), c = constant_slice(3);
  const HomotopySlab slab(a, b, c);
  EXPECT_EQ(homotopy_eval(slab, 1, 1, 0.0), 1.0);
  EXPECT_EQ(homotopy_eval(slab, 1, 1, 1.0), 2.0);
  // Direct polynomial: (0.875*1 + 1.25*2 - 0.125*3) / 2.
  EXPECT_DOUBLE_EQ(homotopy_eval(slab, 1.5, 2.25, 0.5), 1.5);
  EXPECT_THROW(homotopy_eval(slab, 1, 1, 1.01), Error);
  EXPECT_THROW(homotopy_eval(slab, 1, 1, -0.01), Error);
  EXPECT_THROW(homotopy_eval(slab, 9, 1, 0.5), Error);
}

TEST(Homotopy, DerivativeBoundaryConditions) {
  const auto a = constant_slice(1), b = constant_slice(2), c = constant_slice(3);
  const HomotopySlab slab(a, b, c);
  EXPECT_DOUBLE_EQ(homotopy_derivative(slab, 0, 0, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(homotopy_derivative(slab, 0, 0, 1.0), 0.5);
}

TEST(Homotopy, DerivativeMatchesFiniteDifference) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_slice(rng), b = random_slice(rng), c = random_slice(rng);
    const HomotopySlab slab(a, b, c);
    const double x = 2.3, y = 4.1, h = 1e-5;
    for (double l : {0.3, 0.5, 0.9}) {
      const double fd = (slab.eval(x, y, l + h) - slab.eval(x, y, l - h)) / (2 * h);
      ASSERT_NEAR(slab.derivative(x, y, l), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
    // One-sided at the ends.
    const double fd0 = (-3 * slab.eval(x, y, 0) + 4 * slab.eval(x, y, h) - slab.eval(x, y, 2 * h)) / (2 * h);
    const double phi0 = a.sample(x, y), phi1 = b.sample(x, y), phi2 = c.sample(x, y);
    ASSERT_NEAR(fd0, 0.5 * (phi1 - phi0), 1e-6 * std::max(1.0, std::abs(fd0)));
    const double fd1 = (3 * slab.eval(x, y, 1) - 4 * slab.eval(x, y, 1 - h) + slab.eval(x, y, 1 - 2 * h)) / (2 * h);
    ASSERT_NEAR(fd1, 0.5 * (phi2 - phi1), 1e-6 * std::max(1.0, std::abs(fd1)));
  }
}

TEST(Homotopy, EndpointInterpolationOverRandomTriples) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1e3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const double p0 = dist(rng), p1 = dist(rng), p2 = dist(rng);
    ASSERT_EQ(hermite_homotopy(p0, p1, p2, 0.0), p0);
    ASSERT_EQ(hermite_homotopy(p0, p1, p2, 1.0), p1);
  }
}

TEST(Homotopy, EquallySpacedDataFollowsTheHermiteCubic) {
  // With phi_{i+1} - phi_i = phi_{i+2} - phi_{i+1} = c the blend reduces to
  // phi_i + c (l + 3l^2 - 2l^3) / 2: the boundary slopes are c/2, so it meets
  // phi_i + c*l only at l in {0, 1/2, 1}.
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> dist(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double a = dist(rng), c = dist(rng), l = (rng() % 1001) / 1000.0;
    const double expected = a + c * (l + 3 * l * l - 2 * l * l * l) / 2;
    ASSERT_NEAR(hermite_homotopy(a, a + c, a + 2 * c, l), expected, 1e-9);
    ASSERT_NEAR(hermite_homotopy(a, a + c, a + 2 * c, 0.5), a + 0.5 * c, 1e-9);
  }
}

TEST(Homotopy, C1AcrossSlabs) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s0 = random_slice(rng), s1 = random_slice(rng), s2 = random_slice(rng), s3 = random_slice(rng);
    const HomotopySlab first(s0, s1, s2), second(s1, s2, s3);
    for (double x : {0.0, 1.7, 5.0}) {
      ASSERT_NEAR(first.derivative(x, 2.5, 1.0), second.derivative(x, 2.5, 0.0), 1e-12);
      ASSERT_NEAR(first.eval(x, 2.5, 1.0), second.eval(x, 2.5, 0.0), 1e-12);
    }
  }
}

TEST(Homotopy, SlabValidation) {
  const auto a = constant_slice(1, 4), b = constant_slice(2, 5);
  EXPECT_THROW(HomotopySlab(a, b, a), Error);
  auto other = constant_slice(1, 4);
  other.label = {3, 6};
  EXPECT_THROW(HomotopySlab(a, other, a), Error);
}

TEST(Resample, IdenticalSlicesStayIdentical) {
  const int n = 24;
  LabelSlice s(std::size_t(n * n), 0);
  const auto d = disk_mask(n, 10, 12, 6);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = d[i] ? 6796 : 0;
  s[0] = 4242 & 0x7fff;
  const std::vector<LabelSlice> sparse(4, s);
  const auto dense = resample_slices(sparse, n, n, 5, 16);
  for (int z = 0; z < 16; ++z)
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_EQ(dense[std::size_t(z) * s.size() + i], s[i]) << z;
}

TEST(Resample, IntegerPositionsReproduceInputs) {
  std::mt19937 rng(4);
  const int n = 20, k = 4;
  std::vector<LabelSlice> sparse;
  for (int j = 0; j < 5; ++j) {
    LabelSlice s(std::size_t(n * n), 0);
    for (int b = 0; b < 3; ++b) {
      const auto d = disk_mask(n, rng() % n, rng() % n, 2 + rng() % 6);
      const std::uint16_t code = volume::encode_code(2, 1 + b, 0).raw;
      for (std::size_t i = 0; i < s.size(); ++i)
        if (d[i]) s[i] = code;
    }
    sparse.push_back(s);
  }
  const auto dense = resample_slices(sparse, n, n, k, 17);
  for (int j = 0; j < 5; ++j)
    for (std::size_t i = 0; i < sparse[0].size(); ++i)
      ASSERT_EQ(dense[std::size_t(j * k) * sparse[0].size() + i], sparse[std::size_t(j)][i]);
}

TEST(Resample, GrowingDiskDice) {
  auto spec = volume::phantom_preset("growing-disk", {64, 64, 60});
  const auto truth = volume::generate_phantom(spec);
  auto sparse = truth;
  auto& labels = sparse.mutable_label_data();
  const std::size_t plane = truth.dims().slice_count();
  for (int z = 0; z < 60; ++z)
    if (z % 5 != 0) std::fill_n(labels.begin() + std::ptrdiff_t(plane * std::size_t(z)), plane, 0);
  const auto dense = resample_segmentation(sparse, 5);
  const std::uint16_t code = volume::encode_code(3, 5, 0).raw;
  EXPECT_GE(dice(dense.label_data(), truth.label_data(), code), 0.95);
  for (int z = 0; z < 60; z += 5) {
    const auto off = std::ptrdiff_t(plane * std::size_t(z));
    const std::span<const std::uint16_t> a(dense.label_data().data() + off, plane), b(truth.label_data().data() + off, plane);
    EXPECT_EQ(dice(a, b, code), 1.0) << z;
  }
}

TEST(Resample, Errors) {
  const std::vector<LabelSlice> two(2, LabelSlice(16, 0));
  try {
    resample_slices(two, 4, 4, 5, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInsufficientData);
  }
  std::vector<LabelSlice> mismatched(3, LabelSlice(16, 0));
  mismatched[1].resize(15);
  try {
    resample_slices(mismatched, 4, 4, 5, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
}

TEST(Resample, StrideOneIsIdentity) {
  const auto v = volume::generate_phantom(volume::phantom_preset("three-organs", {16, 16, 16}));
  EXPECT_EQ(resample_segmentation(v, 1), v);
}
