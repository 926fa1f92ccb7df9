#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ghostsim/grid.hpp"

namespace ghostsim {

enum class Normalization { raw, peak1, area1 };

inline std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::raw: return "raw";
    case Normalization::peak1: return "peak1";
    case Normalization::area1: return "area1";
  }
  throw std::logic_error("to_string(Normalization): bad value");
}

/// Nonnegative counting-rate samples on a signal-detector grid.
struct Distribution {
  Grid1D grid;
  std::vector<double> values;
  Normalization normalization = Normalization::raw;

  Distribution() = default;
  Distribution(const Grid1D& g, std::vector<double> v,
               Normalization n = Normalization::raw)
      : grid(g), values(std::move(v)), normalization(n) {
    if (values.size() != grid.count)
      throw std::invalid_argument("Distribution: values.size() != grid.count");
  }
};

}  // namespace ghostsim
