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
#include "isoclust/peaks.hpp"

#include <algorithm>
#include <fstream>

#include "isoclust/errors.hpp"
#include "isoclust/text.hpp"

namespace isoclust {

namespace {

double local_spacing(const RawSpectrum& spec, std::size_t k) {
  const std::size_t n = spec.size();
  if (n < 2) return 0.0;
  if (k == 0) return spec.mz[1] - spec.mz[0];
  if (k + 1 == n) return spec.mz[n - 1] - spec.mz[n - 2];
  return 0.5 * (spec.mz[k + 1] - spec.mz[k - 1]);
}

DetectedInterval make_interval(const RawSpectrum& spec, std::size_t first, std::size_t last) {
  DetectedInterval iv;
  iv.first = first;
  iv.last = last;
  iv.lo = spec.mz[first];
  iv.hi = spec.mz[last];
  iv.apex_index = first;
  for (std::size_t k = first; k <= last; ++k) {
    if (spec.intensity[k] > spec.intensity[iv.apex_index]) iv.apex_index = k;
  }
  iv.apex_mz = spec.mz[iv.apex_index];
  iv.apex_intensity = spec.intensity[iv.apex_index];
  if (first == last) {
    iv.area = spec.intensity[first] * local_spacing(spec, first);
  } else {
    double area = 0.0;
    for (std::size_t k = first; k < last; ++k)
      area += 0.5 * (spec.mz[k + 1] - spec.mz[k]) * (spec.intensity[k] + spec.intensity[k + 1]);
    iv.area = area;
  }
  return iv;
}

}  // namespace

std::vector<DetectedInterval> threshold_intervals(const RawSpectrum& spec, double threshold) {
  if (threshold <= 0.0) throw ValidationError("detection threshold must be positive");
  std::vector<DetectedInterval> out;
  const std::size_t n = spec.size();
  std::size_t k = 0;
  while (k < n) {
    if (spec.intensity[k] > threshold) {
      std::size_t start = k;
      while (k + 1 < n && spec.intensity[k + 1] > threshold) ++k;
      out.push_back(make_interval(spec, start, k));
    }
    ++k;
  }
  return out;
}

PeakList isotope_filter(const std::string& sample_id,
                        const std::vector<DetectedInterval>& intervals, double neighbor_tol) {
  PeakList list;
  list.sample_id = sample_id;

  auto contained_in_other = [&](double value, std::size_t self) {
    // intervals are sorted by lo and disjoint, so hi is ascending too
    auto it = std::upper_bound(intervals.begin(), intervals.end(), value + neighbor_tol,
                               [](double v, const DetectedInterval& iv) { return v < iv.lo; });
    while (it != intervals.begin()) {
      --it;
      if (it->hi + neighbor_tol < value) break;
      std::size_t idx = static_cast<std::size_t>(it - intervals.begin());
      if (idx != self && it->lo - neighbor_tol <= value && value <= it->hi + neighbor_tol)
        return true;
    }
    return false;
  };

  for (std::size_t g = 0; g < intervals.size(); ++g) {
    const double apex = intervals[g].apex_mz;
    if (contained_in_other(apex + 1.0, g) || contained_in_other(apex - 1.0, g))
      list.peaks.push_back(intervals[g]);
  }
  std::sort(list.peaks.begin(), list.peaks.end(),
            [](const DetectedInterval& a, const DetectedInterval& b) {
              return a.apex_mz < b.apex_mz;
            });
  return list;
}

void write_intervals(const std::vector<DetectedInterval>& intervals, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << "lo,hi,apex_mz,apex_intensity,area\n";
  for (const auto& iv : intervals) {
    out << format_double(iv.lo) << ',' << format_double(iv.hi) << ',' << format_double(iv.apex_mz)
        << ',' << format_double(iv.apex_intensity) << ',' << format_double(iv.area) << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

std::vector<DetectedInterval> read_intervals(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<DetectedInterval> out;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view raw = trim(line);
    if (raw.empty() || raw.front() == '#') continue;
    if (ln == 1 || (out.empty() && raw.substr(0, 2) == "lo")) {
      if (!parse_double(split(raw, ',')[0])) continue;  // header
    }
    auto fields = split(raw, ',');
    if (fields.size() != 5) throw ParseError(path, ln, "expected 5 columns");
    DetectedInterval iv;
    auto lo = parse_double(fields[0]);
    auto hi = parse_double(fields[1]);
    auto apex = parse_double(fields[2]);
    auto apex_i = parse_double(fields[3]);
    auto area = parse_double(fields[4]);
    if (!lo || !hi || !apex || !apex_i || !area) throw ParseError(path, ln, "non-numeric field");
    iv.lo = *lo;
    iv.hi = *hi;
    iv.apex_mz = *apex;
    iv.apex_intensity = *apex_i;
    iv.area = *area;
    out.push_back(iv);
  }
  return out;
}

}  // namespace isoclust
