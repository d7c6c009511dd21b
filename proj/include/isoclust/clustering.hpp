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

#include <cstddef>
#include <string>
#include <vector>

#include "isoclust/peaks.hpp"

namespace isoclust {

/// One retained apex position from one sample, pooled across the cohort.
struct PooledPeak {
  std::size_t sample_index = 0;
  double apex_mz = 0.0;
};

/// Cross-sample isotopic cluster: ordered consensus positions roughly 1 Da
/// apart, with the number of distinct contributing samples per position.
struct IsotopicCluster {
  int cluster_id = 0;
  std::vector<double> positions;
  std::vector<std::size_t> support;
  std::size_t member_count = 0;

  std::size_t size() const { return positions.size(); }
};

struct ClusterSet {
  std::vector<IsotopicCluster> clusters;
};

/// Pools every sample's retained peaks (index = position in `peaklists`).
std::vector<PooledPeak> pool_peaks(const std::vector<PeakList>& peaklists);

/// Connected components of the relation
///   x ~ x'  iff  |x - (x' - k)| < delta for some k in {-1, 0, 1},
/// i.e. positions equal or 1 Da apart up to delta. Candidate pairs are
/// limited to |x - x'| < 1 + delta via a sorted sliding window, which is
/// exact because the relation implies that bound. Each component is returned
/// as indices into `pool`, components ordered by their lowest m/z.
std::vector<std::vector<std::size_t>> build_clusters(const std::vector<PooledPeak>& pool,
                                                     double delta);

/// Splits one cluster's members into sub-clusters (connected components of
/// |x - x'| < delta_prime), averaging each into a consensus position. Pairs
/// of consensus positions closer than 0.5 Da are merged with a warning.
/// Results are sorted ascending; support counts distinct samples.
struct ConsensusPosition {
  double mz = 0.0;
  std::size_t support = 0;
  std::size_t members = 0;
};
std::vector<ConsensusPosition> split_subclusters(const std::vector<PooledPeak>& pool,
                                                 const std::vector<std::size_t>& cluster,
                                                 double delta_prime);

/// Full identification: pool -> basic-relation components -> sub-cluster
/// consensus positions -> spacing check. Consecutive positions whose gap is
/// not within [0.9, 1.1] Da start a new cluster (logged). Single-position
/// clusters are kept here; prune_clusters removes them.
ClusterSet identify_clusters(const std::vector<PeakList>& peaklists, double delta,
                             double delta_prime);

/// Removes clusters with fewer than 2 positions, plus clusters that have
/// more than `max_peaks` positions AND more than one strict local maximum in
/// their typical (mean log intensity) pattern. `typical_pattern[i]` must
/// match clusters[i].size(). `disjunctive` switches the AND to OR for
/// sensitivity analysis.
ClusterSet prune_clusters(const ClusterSet& set, std::size_t max_peaks,
                          const std::vector<std::vector<double>>& typical_pattern,
                          bool disjunctive = false);

/// Strict local maxima of a pattern (plateau points are not maxima).
std::size_t count_local_maxima(const std::vector<double>& pattern);

void write_clusters(const ClusterSet& set, const std::string& path, std::size_t max_peaks_hint);
/// Reads a cluster table; returns the set and the max_peaks hint stored by
/// write_clusters (0 when absent).
std::pair<ClusterSet, std::size_t> read_clusters(const std::string& path);

}  // namespace isoclust
