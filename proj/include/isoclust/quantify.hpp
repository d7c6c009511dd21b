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

#include <cstdint>
#include <string>
#include <vector>

#include "isoclust/clustering.hpp"
#include "isoclust/peaks.hpp"
#include "isoclust/spectrum.hpp"

namespace isoclust {

/// Complete intensity matrix over (sample, cluster, peak). Peaks are
/// flattened across clusters: entries of cluster q live at
/// [offset[q], offset[q+1]). After quantification y is strictly positive
/// everywhere; detected marks which entries came from a matched interval.
struct QuantifiedMatrix {
  std::vector<std::string> sample_ids;
  ClusterSet clusters;
  std::vector<std::size_t> offset;       // size Q+1
  std::vector<double> y;                 // n x P, row-major
  std::vector<std::uint8_t> detected;    // n x P (delta_iqj)
  std::vector<double> typical_width;     // P

  std::size_t n_samples() const { return sample_ids.size(); }
  std::size_t n_clusters() const { return clusters.clusters.size(); }
  std::size_t n_peaks() const { return offset.empty() ? 0 : offset.back(); }
  std::size_t peak_count(std::size_t q) const { return offset[q + 1] - offset[q]; }
  double& at(std::size_t i, std::size_t p) { return y[i * n_peaks() + p]; }
  double at(std::size_t i, std::size_t p) const { return y[i * n_peaks() + p]; }
  bool is_detected(std::size_t i, std::size_t p) const {
    return detected[i * n_peaks() + p] != 0;
  }
  /// 1 iff any peak of cluster q was detected in sample i.
  bool cluster_detected(std::size_t i, std::size_t q) const;
  double undetected_fraction() const;
};

/// Log-scale companion: l = log y, the typical pattern l_bar (mean of l over
/// samples), its back-transform y_bar, and per cluster the position of the
/// pattern maximum (ties to the smallest j).
struct LogMatrix {
  std::vector<double> l;           // n x P
  std::vector<double> l_bar;       // P
  std::vector<double> y_bar;       // P
  std::vector<std::size_t> argmax; // Q, 0-based within cluster
};

/// Detection flags and areas for one sample: for each consensus position,
/// the area of the (unique, since intervals are disjoint) interval
/// containing it. When one interval contains several positions its area
/// goes to the position nearest the interval apex; the rest stay
/// undetected. Returns flat vectors over the cluster-flattened peak axis.
struct SampleMatch {
  std::vector<std::uint8_t> detected;
  std::vector<double> area;
  std::vector<double> width;  // matched interval width where detected
};
SampleMatch match_and_integrate(const std::vector<DetectedInterval>& intervals,
                                const ClusterSet& clusters);

/// Trapezoidal integral of the piecewise-linear interpolant of `spec` over
/// [a, b] clipped to the grid; 0 when the window misses the grid entirely.
double integrate_window(const RawSpectrum& spec, double a, double b);

struct QuantifyOptions {
  unsigned threads = 1;
  double width_bin_da = 100.0;  // fallback width regression bin size
};

/// Step 4 of the identification algorithm across all samples; produces the
/// complete matrix with undetected entries coded as the area under the raw
/// intensity curve in a typical-width window, floored at a per-cluster
/// epsilon (1e-6 times the median detected area).
QuantifiedMatrix quantify(const std::vector<RawSpectrum>& spectra,
                          const std::vector<std::string>& sample_ids,
                          const std::vector<std::vector<DetectedInterval>>& intervals,
                          const ClusterSet& clusters, const QuantifyOptions& options = {});

LogMatrix log_matrix(const QuantifiedMatrix& qm);

/// Per-cluster slices of l_bar, the input to prune_clusters.
std::vector<std::vector<double>> typical_patterns(const QuantifiedMatrix& qm,
                                                  const LogMatrix& lm);

/// Restriction of qm to the clusters in `kept` (matched by cluster_id).
QuantifiedMatrix filter_clusters(const QuantifiedMatrix& qm, const ClusterSet& kept);

void write_quantified(const QuantifiedMatrix& qm, const std::string& long_path,
                      const std::string& summary_path);
QuantifiedMatrix read_quantified(const std::string& long_path, const std::string& summary_path);

}  // namespace isoclust
