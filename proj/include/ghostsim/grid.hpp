#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ghostsim {

/// Uniform 1D sample grid. Positions are start + i*step for i in [0, count).
struct Grid1D {
  double start = 0.0;
  double step = 0.0;
  std::size_t count = 0;

  Grid1D() = default;

  Grid1D(double start_, double step_, std::size_t count_)
      : start(start_), step(step_), count(count_) {
    if (!(step > 0.0)) throw std::invalid_argument("Grid1D: step must be > 0");
    if (count < 2) throw std::invalid_argument("Grid1D: count must be >= 2");
  }

  /// Symmetric grid on [-halfwidth, +halfwidth].
  static Grid1D centered(double halfwidth, std::size_t count) {
    if (!(halfwidth > 0.0)) throw std::invalid_argument("Grid1D: halfwidth must be > 0");
    if (count < 2) throw std::invalid_argument("Grid1D: count must be >= 2");
    return Grid1D(-halfwidth, 2.0 * halfwidth / static_cast<double>(count - 1), count);
  }

  double position(std::size_t i) const { return start + static_cast<double>(i) * step; }
  double last() const { return position(count - 1); }
  double extent() const { return step * static_cast<double>(count - 1); }

  std::vector<double> positions() const {
    std::vector<double> x(count);
    for (std::size_t i = 0; i < count; ++i) x[i] = position(i);
    return x;
  }

  bool operator==(const Grid1D&) const = default;
};

/// Complex amplitude samples on a Grid1D.
struct ComplexField {
  Grid1D grid;
  std::vector<std::complex<double>> values;

  ComplexField() = default;
  explicit ComplexField(const Grid1D& g) : grid(g), values(g.count) {}
  ComplexField(const Grid1D& g, std::vector<std::complex<double>> v)
      : grid(g), values(std::move(v)) {
    if (values.size() != grid.count)
      throw std::invalid_argument("ComplexField: values.size() != grid.count");
  }
};

}  // namespace ghostsim
