// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace nlse {

using cplx = std::complex<double>;

// Uniform periodic box [0, L_a) per axis with power-of-two sampling.
// Site (ix, iy) sits at (ix*h_x, iy*h_y); storage is row-major with x
// fastest: index = iy * N_x + ix. 1D grids use axis 0 only.
class Grid {
 public:
  Grid(int dims, std::array<double, 2> lengths, std::array<int, 2> points);

  int dims() const { return dims_; }
  double length(int axis) const { return lengths_[axis]; }
  int points(int axis) const { return points_[axis]; }
  double spacing(int axis) const { return lengths_[axis] / points_[axis]; }
  std::size_t size() const { return size_; }
  double cell() const;  // h_x (times h_y in 2D)
  double coord(std::size_t site, int axis) const;
  std::size_t index(int ix, int iy = 0) const;
  bool same_shape(const Grid& o) const;

 private:
  int dims_;
  std::array<double, 2> lengths_;
  std::array<int, 2> points_;
  std::size_t size_;
};

struct RealField {
  const Grid* grid = nullptr;
  std::vector<double> v;
  RealField() = default;
  explicit RealField(const Grid& g, double fill = 0.0)
      : grid(&g), v(g.size(), fill) {}
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

struct ComplexField {
  const Grid* grid = nullptr;
  std::vector<cplx> v;
  ComplexField() = default;
  explicit ComplexField(const Grid& g, cplx fill = {})
      : grid(&g), v(g.size(), fill) {}
  cplx& operator[](std::size_t i) { return v[i]; }
  cplx operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

// Spectral derivative along `axis` of order 1 or 2. Odd orders zero the
// Nyquist mode (its sampled derivative is not representable); order 2
// keeps it with multiplier -k^2.
RealField deriv(const RealField& f, int axis, int order);
ComplexField deriv(const ComplexField& f, int axis, int order);

// Rectangle rule, cell * sum — spectrally exact for smooth periodic data.
double integrate(const RealField& f);

// Antiderivative along `axis`, split as F = periodic + slope * x_axis with
// the periodic part vanishing on the x_axis = 0 plane. slope is the mean
// of f, the obstruction to a periodic antiderivative.
struct CumulativeIntegral {
  RealField periodic;
  double slope = 0.0;
};
CumulativeIntegral cumulative_integral(const RealField& f, int axis);

// In-place multiplication of the spectrum by exp(scale * k^2) per mode;
// used by the exact free half-step of the splitting (scale is i*dt*...).
void apply_spectral_exp_ksq(ComplexField& f, cplx scale);

}  // namespace nlse
