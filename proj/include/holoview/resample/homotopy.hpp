#pragma once

#include <array>
#include <string>

#include "holoview/core/error.hpp"
#include "holoview/resample/distance_transform.hpp"

namespace holoview::resample {

// Piecewise cubic Hermite homotopy between consecutive slice distance
// fields phi_i, phi_{i+1}, phi_{i+2}:
//   H(x, l) = 1/2 [ (2 - l - 4l^2 + 3l^3) phi_i
//                 + (l + 5l^2 - 4l^3)     phi_{i+1}
//                 + (-l^2 + l^3)          phi_{i+2} ]
// with dH/dl = (phi_{i+1} - phi_i)/2 at l = 0 and (phi_{i+2} - phi_{i+1})/2 at l = 1.

inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorKind::kRange, "homotopy parameter " + std::to_string(lambda) + " outside [0, 1]");
}

/// Blend weights for (phi_i, phi_{i+1}, phi_{i+2}), including the 1/2 factor.
constexpr std::array<double, 3> hermite_weights(double l) {
  const double l2 = l * l, l3 = l2 * l;
  return {0.5 * (2.0 - l - 4.0 * l2 + 3.0 * l3), 0.5 * (l + 5.0 * l2 - 4.0 * l3), 0.5 * (-l2 + l3)};
}

constexpr std::array<double, 3> hermite_weight_derivatives(double l) {
  const double l2 = l * l;
  return {0.5 * (-1.0 - 8.0 * l + 9.0 * l2), 0.5 * (1.0 + 10.0 * l - 12.0 * l2), 0.5 * (-2.0 * l + 3.0 * l2)};
}

constexpr double hermite_homotopy(double phi_i, double phi_i1, double phi_i2, double l) {
  const auto w = hermite_weights(l);
  return w[0] * phi_i + w[1] * phi_i1 + w[2] * phi_i2;
}

constexpr double hermite_homotopy_derivative(double phi_i, double phi_i1, double phi_i2, double l) {
  const auto w = hermite_weight_derivatives(l);
  return w[0] * phi_i + w[1] * phi_i1 + w[2] * phi_i2;
}

/// Three consecutive distance fields of one label. Holds references; the
/// slices must outlive the slab.
class HomotopySlab {
 public:
  HomotopySlab(const SignedDistanceSlice& phi_i, const SignedDistanceSlice& phi_i1, const SignedDistanceSlice& phi_i2)
      : phi_{&phi_i, &phi_i1, &phi_i2} {
    for (const auto* p : phi_)
      if (p->nx != phi_i.nx || p->ny != phi_i.ny)
        throw Error(ErrorKind::kDimension, "homotopy slab slices differ in dims");
    for (const auto* p : phi_)
      if (p->label != phi_i.label) throw Error(ErrorKind::kPrecondition, "homotopy slab slices differ in label");
  }

  const SignedDistanceSlice& phi(int k) const { return *phi_[static_cast<std::size_t>(k)]; }

  double eval(double x, double y, double lambda) const {
    check_lambda(lambda);
    check_point(x, y);
    return hermite_homotopy(phi_[0]->sample(x, y), phi_[1]->sample(x, y), phi_[2]->sample(x, y), lambda);
  }

  double derivative(double x, double y, double lambda) const {
    check_lambda(lambda);
    check_point(x, y);
    return hermite_homotopy_derivative(phi_[0]->sample(x, y), phi_[1]->sample(x, y), phi_[2]->sample(x, y), lambda);
  }

 private:
  void check_point(double x, double y) const {
    if (!(x >= 0.0 && y >= 0.0 && x <= phi_[0]->nx - 1 && y <= phi_[0]->ny - 1))
      throw Error(ErrorKind::kRange, "homotopy point outside the slice grid");
  }

  std::array<const SignedDistanceSlice*, 3> phi_;
};

inline double homotopy_eval(const HomotopySlab& slab, double x, double y, double lambda) {
  return slab.eval(x, y, lambda);
}

inline double homotopy_derivative(const HomotopySlab& slab, double x, double y, double lambda) {
  return slab.derivative(x, y, lambda);
}

}  // namespace holoview::resample
