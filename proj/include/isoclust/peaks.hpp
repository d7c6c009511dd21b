/*******************************************************************************
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
 *******************************************************************************/
#pragma once

#include <string>
#include <vector>

#include "isoclust/spectrum.hpp"

namespace isoclust {

/// Maximal run of grid points whose intensity exceeds the detection
/// threshold. Boundaries are the outermost above-threshold points; area is
/// the trapezoidal integral over the closed interval.
struct DetectedInterval {
  double lo = 0.0;
  double hi = 0.0;
  double apex_mz = 0.0;
  double apex_intensity = 0.0;
  double area = 0.0;
  // grid indices of [lo, hi] and the apex, for downstream bookkeeping
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t apex_index = 0;

  double width() const { return hi - lo; }
  bool contains(double mz) const { return lo <= mz && mz <= hi; }
};

/// Intervals retained by the isotope-neighbor filter, sorted by apex m/z.
struct PeakList {
  std::string sample_id;
  std::vector<DetectedInterval> peaks;
};

/// Finds all maximal runs of consecutive grid points with intensity strictly
/// above `threshold`. Runs of length 1 are kept, with lo = hi = the grid
/// point and area = intensity times the local grid spacing. Apex ties go to
/// the lowest m/z.
std::vector<DetectedInterval> threshold_intervals(const RawSpectrum& spec, double threshold);

/// Keeps interval g iff the apex of g shifted by +1 or -1 Da lands inside
/// another interval, with the containment test widened by `neighbor_tol` on
/// each side. Input must be sorted by lo (as produced by
/// threshold_intervals).
PeakList isotope_filter(const std::string& sample_id,
                        const std::vector<DetectedInterval>& intervals, double neighbor_tol);

void write_intervals(const std::vector<DetectedInterval>& intervals, const std::string& path);
std::vector<DetectedInterval> read_intervals(const std::string& path);

}  // namespace isoclust
