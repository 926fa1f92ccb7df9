#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostsim/distribution.hpp"
#include "ghostsim/quadrature.hpp"

namespace ghostsim {

/// Rescales to unit peak or unit area (by the grid's own quadrature).
inline Distribution normalize(const Distribution& dist, Normalization mode) {
  if (mode == Normalization::raw) return dist;
  double scale = 0.0;
  if (mode == Normalization::peak1) {
    scale = *std::max_element(dist.values.begin(), dist.values.end());
    if (!(scale > 0.0)) throw std::invalid_argument("normalize: distribution has no positive peak");
  } else {
    scale = integrate_sampled(dist.grid, std::span<const double>(dist.values));
    if (!(scale > 0.0)) throw std::invalid_argument("normalize: distribution has no positive area");
  }
  Distribution out = dist;
  for (auto& v : out.values) v /= scale;
  out.normalization = mode;
  return out;
}

/// Full width at half maximum with linear interpolation of the two half-max
/// crossings. Requires a single contiguous region at or above half max.
inline double fwhm(const Distribution& dist) {
  const auto& y = dist.values;
  const auto& g = dist.grid;
  if (y.size() < 3) throw std::invalid_argument("fwhm: need at least 3 samples");
  const double peak = *std::max_element(y.begin(), y.end());
  if (!(peak > 0.0)) throw std::invalid_argument("fwhm: distribution has no positive peak");
  const double half = peak / 2.0;

  std::size_t first = y.size(), last = 0;
  std::size_t regions = 0;
  bool in_region = false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= half) {
      if (!in_region) {
        ++regions;
        in_region = true;
      }
      first = std::min(first, i);
      last = i;
    } else {
      in_region = false;
    }
  }
  if (regions != 1) {
    std::ostringstream msg;
    msg << "fwhm: " << regions << " disjoint regions at or above half max; "
        << "width is ill-defined for this distribution";
    throw std::domain_error(msg.str());
  }

  auto cross = [&](std::size_t ia, std::size_t ib) {
    const double xa = g.position(ia), xb = g.position(ib);
    return xa + (half - y[ia]) * (xb - xa) / (y[ib] - y[ia]);
  };
  const double left = (first == 0) ? g.position(0) : cross(first - 1, first);
  const double right = (last == y.size() - 1) ? g.position(last) : cross(last, last + 1);
  return right - left;
}

struct ComparisonReport {
  double max_abs_diff = 0.0;  ///< max |a-b| after area normalization, relative to peak
  double rel_l2 = 0.0;        ///< ||a-b||_2 / (||a||_2 + ||b||_2), area-normalized
  double fwhm_a = std::numeric_limits<double>::quiet_NaN();
  double fwhm_b = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::string notes;
};

/// Compares two distributions on the same grid. Both sides are area
/// normalized first, so any positive scale factor between them drops out.
inline ComparisonReport compare(const Distribution& a, const Distribution& b,
                                double tolerance) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("compare: grids differ; resample first");
  const Distribution an = normalize(a, Normalization::area1);
  const Distribution bn = normalize(b, Normalization::area1);

  const double peak = std::max(*std::max_element(an.values.begin(), an.values.end()),
                               *std::max_element(bn.values.begin(), bn.values.end()));
  std::vector<double> d2(an.values.size()), a2(an.values.size()), b2(an.values.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < an.values.size(); ++i) {
    const double d = an.values[i] - bn.values[i];
    dmax = std::max(dmax, std::abs(d));
    d2[i] = d * d;
    a2[i] = an.values[i] * an.values[i];
    b2[i] = bn.values[i] * bn.values[i];
  }
  ComparisonReport r;
  r.max_abs_diff = dmax / peak;
  const double nd = std::sqrt(integrate_sampled(a.grid, std::span<const double>(d2)));
  const double na = std::sqrt(integrate_sampled(a.grid, std::span<const double>(a2)));
  const double nb = std::sqrt(integrate_sampled(a.grid, std::span<const double>(b2)));
  r.rel_l2 = nd / (na + nb);
  try {
    r.fwhm_a = fwhm(an);
  } catch (const std::exception& e) {
    r.notes += std::string("fwhm_a undefined: ") + e.what() + "; ";
  }
  try {
    r.fwhm_b = fwhm(bn);
  } catch (const std::exception& e) {
    r.notes += std::string("fwhm_b undefined: ") + e.what() + "; ";
  }
  r.pass = r.max_abs_diff < tolerance && r.rel_l2 < tolerance;
  return r;
}

/// Flat key-value block consumed by the CLI report command.
inline std::string to_text(const ComparisonReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "max_abs_diff = " << r.max_abs_diff << "\n"
     << "rel_l2 = " << r.rel_l2 << "\n"
     << "fwhm_a = " << r.fwhm_a << "\n"
     << "fwhm_b = " << r.fwhm_b << "\n"
     << "pass = " << (r.pass ? "true" : "false") << "\n";
  if (!r.notes.empty()) os << "notes = " << r.notes << "\n";
  return os.str();
}

}  // namespace ghostsim
