// Copyright 2026 The FoveaParse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FOVEA_RESAMPLE_HPP_
#define FOVEA_RESAMPLE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include "fovea/types.hpp"

namespace fovea {

enum class Resample { kNearest, kBilinear };

/// Copies the [x0, x0+w) x [y0, y0+h) window. The window must be in bounds.
template <typename GridT>
GridT crop(const GridT& src, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > src.width() ||
      y0 + h > src.height()) {
    throw DataError(ErrorCode::kOutOfRange, "crop window outside source");
  }
  GridT out;
  Grid<typename GridT::value_type> g(w, h, src.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto s = src.pixel(x0 + x, y0 + y);
      std::copy(s.begin(), s.end(), g.pixel(x, y).begin());
    }
  }
  static_cast<Grid<typename GridT::value_type>&>(out) = std::move(g);
  return out;
}

/// Nearest neighbour: each target pixel takes the source pixel containing
/// its center.
template <typename GridT>
GridT resize_nearest(const GridT& src, int w, int h) {
  GridT out;
  Grid<typename GridT::value_type> g(w, h, src.channels());
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(
        src.height() - 1,
        static_cast<int>(std::floor((y + 0.5) * src.height() / h)));
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(
          src.width() - 1,
          static_cast<int>(std::floor((x + 0.5) * src.width() / w)));
      auto s = src.pixel(sx, sy);
      std::copy(s.begin(), s.end(), g.pixel(x, y).begin());
    }
  }
  static_cast<Grid<typename GridT::value_type>&>(out) = std::move(g);
  return out;
}

/// Bilinear with half-pixel centers: target center (x + 0.5) maps to source
/// coordinate (x + 0.5) * sw / w - 0.5, clamped at the borders.
template <typename GridT>
GridT resize_bilinear(const GridT& src, int w, int h) {
  using T = typename GridT::value_type;
  GridT out;
  Grid<T> g(w, h, src.channels());
  const double sx_scale = static_cast<double>(src.width()) / w;
  const double sy_scale = static_cast<double>(src.height()) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy_scale - 0.5, 0.0,
                                 static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx_scale - 0.5, 0.0,
                                   static_cast<double>(src.width() - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < src.channels(); ++c) {
        const double v =
            (1 - ty) * ((1 - tx) * src.at(x0, y0, c) + tx * src.at(x1, y0, c)) +
            ty * ((1 - tx) * src.at(x0, y1, c) + tx * src.at(x1, y1, c));
        if constexpr (std::is_integral_v<T>) {
          g.at(x, y, c) = static_cast<T>(std::clamp(
              std::lround(v), 0L, static_cast<long>(std::numeric_limits<T>::max())));
        } else {
          g.at(x, y, c) = static_cast<T>(v);
        }
      }
    }
  }
  static_cast<Grid<T>&>(out) = std::move(g);
  return out;
}

template <typename GridT>
GridT resize(const GridT& src, int w, int h, Resample mode) {
  if (w == src.width() && h == src.height()) return src;
  return mode == Resample::kNearest ? resize_nearest(src, w, h)
                                    : resize_bilinear(src, w, h);
}

}  // namespace fovea

#endif  // FOVEA_RESAMPLE_HPP_
