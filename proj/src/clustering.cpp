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
#include "isoclust/clustering.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "isoclust/errors.hpp"
#include "isoclust/log.hpp"
#include "isoclust/text.hpp"

namespace isoclust {

namespace {

/// Union-find with path compression and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

bool basic_relation(double x, double xp, double delta) {
  double d = std::abs(x - xp);
  return d < delta || std::abs(d - 1.0) < delta;
}

}  // namespace

std::vector<PooledPeak> pool_peaks(const std::vector<PeakList>& peaklists) {
  std::vector<PooledPeak> pool;
  for (std::size_t s = 0; s < peaklists.size(); ++s)
    for (const auto& iv : peaklists[s].peaks) pool.push_back({s, iv.apex_mz});
  return pool;
}

std::vector<std::vector<std::size_t>> build_clusters(const std::vector<PooledPeak>& pool,
                                                     double delta) {
  if (delta <= 0.0) throw ValidationError("delta must be positive");
  const std::size_t n = pool.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pool[a].apex_mz < pool[b].apex_mz; });

  DisjointSets sets(n);
  const double window = 1.0 + delta;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double gap = pool[order[j]].apex_mz - pool[order[i]].apex_mz;
      if (gap >= window) break;
      if (basic_relation(pool[order[i]].apex_mz, pool[order[j]].apex_mz, delta))
        sets.unite(order[i], order[j]);
    }
  }

  // components keyed by root, emitted in ascending order of lowest member m/z
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> root_to_component(n, SIZE_MAX);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t idx = order[k];
    std::size_t root = sets.find(idx);
    if (root_to_component[root] == SIZE_MAX) {
      root_to_component[root] = components.size();
      components.emplace_back();
    }
    components[root_to_component[root]].push_back(idx);
  }
  return components;
}

std::vector<ConsensusPosition> split_subclusters(const std::vector<PooledPeak>& pool,
                                                 const std::vector<std::size_t>& cluster,
                                                 double delta_prime) {
  if (delta_prime <= 0.0) throw ValidationError("delta_prime must be positive");

  std::vector<std::size_t> order = cluster;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pool[a].apex_mz < pool[b].apex_mz; });

  // single linkage on a line: break at gaps >= delta_prime
  struct Group {
    std::vector<std::size_t> members;
  };
  std::vector<Group> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 ||
        pool[order[k]].apex_mz - pool[order[k - 1]].apex_mz >= delta_prime)
      groups.emplace_back();
    groups.back().members.push_back(order[k]);
  }

  auto mean_mz = [&](const Group& g) {
    double sum = 0.0;
    for (std::size_t idx : g.members) sum += pool[idx].apex_mz;
    return sum / static_cast<double>(g.members.size());
  };

  // Consensus positions representing different isotope peaks must sit at
  // least 0.5 Da apart; closer pairs are artifacts of an overly fine split.
  std::vector<double> means(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) means[g] = mean_mz(groups[g]);
  bool merged = true;
  while (merged && groups.size() > 1) {
    merged = false;
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
      if (means[g + 1] - means[g] < 0.5) {
        log::warn("consensus positions " + format_double(means[g]) + " and " +
                  format_double(means[g + 1]) + " closer than 0.5 Da; merging sub-clusters");
        groups[g].members.insert(groups[g].members.end(), groups[g + 1].members.begin(),
                                 groups[g + 1].members.end());
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(g + 1));
        means.erase(means.begin() + static_cast<std::ptrdiff_t>(g + 1));
        means[g] = mean_mz(groups[g]);
        merged = true;
        break;
      }
    }
  }

  std::vector<ConsensusPosition> out;
  out.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    ConsensusPosition pos;
    pos.mz = means[g];
    pos.members = groups[g].members.size();
    std::set<std::size_t> samples;
    for (std::size_t idx : groups[g].members) samples.insert(pool[idx].sample_index);
    pos.support = samples.size();
    out.push_back(pos);
  }
  return out;
}

ClusterSet identify_clusters(const std::vector<PeakList>& peaklists, double delta,
                             double delta_prime) {
  auto pool = pool_peaks(peaklists);
  auto components = build_clusters(pool, delta);

  ClusterSet set;
  int next_id = 0;
  for (const auto& component : components) {
    auto positions = split_subclusters(pool, component, delta_prime);
    // spacing check: a gap outside [0.9, 1.1] Da starts a new cluster
    std::size_t start = 0;
    for (std::size_t j = 0; j <= positions.size(); ++j) {
      bool cut = j == positions.size();
      if (!cut && j > start) {
        double gap = positions[j].mz - positions[j - 1].mz;
        if (gap < 0.9 || gap > 1.1) {
          log::warn("consensus spacing " + format_double(gap) + " Da at " +
                    format_double(positions[j - 1].mz) + " outside [0.9, 1.1]; splitting cluster");
          cut = true;
        }
      }
      if (cut) {
        if (j > start) {
          IsotopicCluster cluster;
          cluster.cluster_id = next_id++;
          for (std::size_t k = start; k < j; ++k) {
            cluster.positions.push_back(positions[k].mz);
            cluster.support.push_back(positions[k].support);
            cluster.member_count += positions[k].members;
          }
          set.clusters.push_back(std::move(cluster));
        }
        start = j;
      }
    }
  }
  return set;
}

std::size_t count_local_maxima(const std::vector<double>& pattern) {
  const std::size_t n = pattern.size();
  if (n == 0) return 0;
  if (n == 1) return 1;
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    bool left_ok = (j == 0) || pattern[j] > pattern[j - 1];
    bool right_ok = (j + 1 == n) || pattern[j] > pattern[j + 1];
    if (left_ok && right_ok) ++count;
  }
  return count;
}

ClusterSet prune_clusters(const ClusterSet& set, std::size_t max_peaks,
                          const std::vector<std::vector<double>>& typical_pattern,
                          bool disjunctive) {
  if (max_peaks < 2) throw ValidationError("max_peaks must be at least 2");
  if (typical_pattern.size() != set.clusters.size())
    throw ValidationError("typical_pattern size does not match cluster count");

  ClusterSet kept;
  for (std::size_t i = 0; i < set.clusters.size(); ++i) {
    const auto& cluster = set.clusters[i];
    if (cluster.size() < 2) continue;
    bool too_many = cluster.size() > max_peaks;
    bool multimodal = count_local_maxima(typical_pattern[i]) > 1;
    bool remove = disjunctive ? (too_many || multimodal) : (too_many && multimodal);
    if (!remove) kept.clusters.push_back(cluster);
  }
  return kept;
}

void write_clusters(const ClusterSet& set, const std::string& path, std::size_t max_peaks_hint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  if (max_peaks_hint > 0) out << "# max_peaks: " << max_peaks_hint << '\n';
  out << "cluster_id,j,consensus_mz,support\n";
  for (const auto& cluster : set.clusters)
    for (std::size_t j = 0; j < cluster.size(); ++j)
      out << cluster.cluster_id << ',' << (j + 1) << ',' << format_double(cluster.positions[j])
          << ',' << cluster.support[j] << '\n';
  if (!out) throw Error("write failed: " + path);
}

std::pair<ClusterSet, std::size_t> read_clusters(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  ClusterSet set;
  std::size_t max_peaks = 0;
  std::string line;
  std::size_t ln = 0;
  int current_id = -1;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view raw = trim(line);
    if (raw.empty()) continue;
    if (raw.front() == '#') {
      auto fields = split(raw.substr(1), ':');
      if (fields.size() == 2 && trim(fields[0]) == "max_peaks") {
        auto v = parse_int(fields[1]);
        if (v && *v > 0) max_peaks = static_cast<std::size_t>(*v);
      }
      continue;
    }
    auto fields = split(raw, ',');
    if (fields.size() != 4) throw ParseError(path, ln, "expected 4 columns");
    if (!parse_int(fields[0])) continue;  // header
    int id = static_cast<int>(*parse_int(fields[0]));
    auto mz = parse_double(fields[2]);
    auto support = parse_int(fields[3]);
    if (!mz || !support) throw ParseError(path, ln, "non-numeric field");
    if (set.clusters.empty() || id != current_id) {
      IsotopicCluster cluster;
      cluster.cluster_id = id;
      set.clusters.push_back(cluster);
      current_id = id;
    }
    set.clusters.back().positions.push_back(*mz);
    set.clusters.back().support.push_back(static_cast<std::size_t>(*support));
  }
  for (auto& cluster : set.clusters)
    cluster.member_count =
        std::accumulate(cluster.support.begin(), cluster.support.end(), std::size_t{0});
  return {set, max_peaks};
}

}  // namespace isoclust
