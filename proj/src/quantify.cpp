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
#include "isoclust/quantify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "isoclust/errors.hpp"
#include "isoclust/log.hpp"
#include "isoclust/parallel.hpp"
#include "isoclust/text.hpp"

namespace isoclust {

bool QuantifiedMatrix::cluster_detected(std::size_t i, std::size_t q) const {
  for (std::size_t p = offset[q]; p < offset[q + 1]; ++p)
    if (is_detected(i, p)) return true;
  return false;
}

double QuantifiedMatrix::undetected_fraction() const {
  if (detected.empty()) return 0.0;
  std::size_t undetected =
      detected.size() - static_cast<std::size_t>(
                            std::count(detected.begin(), detected.end(), std::uint8_t{1}));
  return static_cast<double>(undetected) / static_cast<double>(detected.size());
}

namespace {

std::vector<std::size_t> build_offsets(const ClusterSet& clusters) {
  std::vector<std::size_t> offset(clusters.clusters.size() + 1, 0);
  for (std::size_t q = 0; q < clusters.clusters.size(); ++q)
    offset[q + 1] = offset[q] + clusters.clusters[q].size();
  return offset;
}

double interp_intensity(const RawSpectrum& spec, double x, std::size_t hint_lo) {
  // precondition: spec.mz[hint_lo] <= x <= spec.mz[hint_lo + 1]
  double x0 = spec.mz[hint_lo], x1 = spec.mz[hint_lo + 1];
  double t = (x - x0) / (x1 - x0);
  return spec.intensity[hint_lo] + t * (spec.intensity[hint_lo + 1] - spec.intensity[hint_lo]);
}

}  // namespace

double integrate_window(const RawSpectrum& spec, double a, double b) {
  const auto& mz = spec.mz;
  if (mz.size() < 2) return 0.0;
  a = std::max(a, mz.front());
  b = std::min(b, mz.back());
  if (a >= b) return 0.0;

  auto seg = [&](double x) {
    auto it = std::upper_bound(mz.begin(), mz.end(), x);
    std::size_t k = static_cast<std::size_t>(it - mz.begin());
    if (k == 0) return std::size_t{0};
    if (k >= mz.size()) return mz.size() - 2;
    return k - 1;
  };
  std::size_t ka = seg(a);
  std::size_t kb = seg(b);
  double fa = interp_intensity(spec, a, ka);
  double fb = interp_intensity(spec, b, kb);
  if (ka == kb) return 0.5 * (fa + fb) * (b - a);

  double area = 0.5 * (fa + spec.intensity[ka + 1]) * (mz[ka + 1] - a);
  for (std::size_t k = ka + 1; k < kb; ++k)
    area += 0.5 * (spec.intensity[k] + spec.intensity[k + 1]) * (mz[k + 1] - mz[k]);
  area += 0.5 * (spec.intensity[kb] + fb) * (b - mz[kb]);
  return area;
}

SampleMatch match_and_integrate(const std::vector<DetectedInterval>& intervals,
                                const ClusterSet& clusters) {
  auto offset = build_offsets(clusters);
  const std::size_t total = offset.back();
  SampleMatch match;
  match.detected.assign(total, 0);
  match.area.assign(total, 0.0);
  match.width.assign(total, 0.0);

  // intervals are disjoint, so each position lies in at most one interval
  std::map<std::size_t, std::vector<std::size_t>> interval_to_positions;
  for (std::size_t q = 0; q < clusters.clusters.size(); ++q) {
    const auto& cluster = clusters.clusters[q];
    for (std::size_t j = 0; j < cluster.size(); ++j) {
      double x = cluster.positions[j];
      auto it = std::upper_bound(intervals.begin(), intervals.end(), x,
                                 [](double v, const DetectedInterval& iv) { return v < iv.lo; });
      if (it == intervals.begin()) continue;
      --it;
      if (!it->contains(x)) continue;
      interval_to_positions[static_cast<std::size_t>(it - intervals.begin())].push_back(
          offset[q] + j);
    }
  }

  // gather all positions per interval; the one nearest the apex wins
  std::vector<double> flat_positions(total);
  for (std::size_t q = 0; q < clusters.clusters.size(); ++q)
    for (std::size_t j = 0; j < clusters.clusters[q].size(); ++j)
      flat_positions[offset[q] + j] = clusters.clusters[q].positions[j];
  for (const auto& [g, positions] : interval_to_positions) {
    const auto& iv = intervals[g];
    std::size_t winner = positions.front();
    double best = std::abs(flat_positions[winner] - iv.apex_mz);
    for (std::size_t p : positions) {
      double d = std::abs(flat_positions[p] - iv.apex_mz);
      if (d < best || (d == best && flat_positions[p] < flat_positions[winner])) {
        best = d;
        winner = p;
      }
    }
    match.detected[winner] = 1;
    match.area[winner] = iv.area;
    match.width[winner] = iv.width();
  }
  return match;
}

namespace {

/// Piecewise-constant fallback: mean interval width per m/z bin, nearest
/// non-empty bin when the target bin is empty.
class WidthModel {
 public:
  WidthModel(const std::vector<std::vector<DetectedInterval>>& intervals, double bin_da) {
    if (bin_da <= 0.0) throw ValidationError("width bin size must be positive");
    bin_da_ = bin_da;
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (const auto& sample : intervals)
      for (const auto& iv : sample) {
        lo = std::min(lo, iv.apex_mz);
        hi = std::max(hi, iv.apex_mz);
      }
    if (lo > hi) return;  // no intervals anywhere
    origin_ = std::floor(lo / bin_da_) * bin_da_;
    std::size_t bins = static_cast<std::size_t>((hi - origin_) / bin_da_) + 1;
    sum_.assign(bins, 0.0);
    count_.assign(bins, 0);
    for (const auto& sample : intervals)
      for (const auto& iv : sample) {
        std::size_t b = bin_of(iv.apex_mz, bins);
        sum_[b] += iv.width();
        count_[b] += 1;
      }
  }

  double predict(double mz) const {
    if (sum_.empty()) {
      log::warn("no detected intervals anywhere; falling back to 0.1 Da typical width");
      return 0.1;
    }
    std::size_t bins = sum_.size();
    std::size_t b = bin_of(mz, bins);
    if (count_[b] > 0) return sum_[b] / static_cast<double>(count_[b]);
    for (std::size_t d = 1; d < bins; ++d) {
      if (b >= d && count_[b - d] > 0) return sum_[b - d] / static_cast<double>(count_[b - d]);
      if (b + d < bins && count_[b + d] > 0) return sum_[b + d] / static_cast<double>(count_[b + d]);
    }
    return 0.1;
  }

 private:
  std::size_t bin_of(double mz, std::size_t bins) const {
    double rel = (mz - origin_) / bin_da_;
    auto b = static_cast<long long>(std::floor(rel));
    if (b < 0) b = 0;
    if (b >= static_cast<long long>(bins)) b = static_cast<long long>(bins) - 1;
    return static_cast<std::size_t>(b);
  }

  double bin_da_ = 100.0;
  double origin_ = 0.0;
  std::vector<double> sum_;
  std::vector<std::size_t> count_;
};

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t m = values.size() / 2;
  if (values.size() % 2 == 1) return values[m];
  return 0.5 * (values[m - 1] + values[m]);
}

}  // namespace

QuantifiedMatrix quantify(const std::vector<RawSpectrum>& spectra,
                          const std::vector<std::string>& sample_ids,
                          const std::vector<std::vector<DetectedInterval>>& intervals,
                          const ClusterSet& clusters, const QuantifyOptions& options) {
  const std::size_t n = spectra.size();
  if (sample_ids.size() != n || intervals.size() != n)
    throw ValidationError("quantify: spectra, sample_ids and intervals must align");

  QuantifiedMatrix qm;
  qm.sample_ids = sample_ids;
  qm.clusters = clusters;
  qm.offset = build_offsets(clusters);
  const std::size_t total = qm.offset.back();
  qm.y.assign(n * total, 0.0);
  qm.detected.assign(n * total, 0);
  qm.typical_width.assign(total, 0.0);

  std::vector<SampleMatch> matches(n);
  parallel_for(n, options.threads,
               [&](std::size_t i) { matches[i] = match_and_integrate(intervals[i], clusters); });

  // typical width = mean matched-interval width over detecting samples;
  // positions nobody detected fall back to the binned width model
  WidthModel width_model(intervals, options.width_bin_da);
  std::vector<std::size_t> detect_count(total, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < total; ++p) {
      if (matches[i].detected[p]) {
        qm.typical_width[p] += matches[i].width[p];
        ++detect_count[p];
      }
    }
  }
  std::vector<double> flat_positions(total);
  for (std::size_t q = 0; q < clusters.clusters.size(); ++q)
    for (std::size_t j = 0; j < clusters.clusters[q].size(); ++j)
      flat_positions[qm.offset[q] + j] = clusters.clusters[q].positions[j];
  for (std::size_t p = 0; p < total; ++p) {
    if (detect_count[p] > 0)
      qm.typical_width[p] /= static_cast<double>(detect_count[p]);
    else
      qm.typical_width[p] = width_model.predict(flat_positions[p]);
  }

  // per-cluster epsilon floor so coded intensities stay strictly positive
  std::vector<double> epsilon(clusters.clusters.size(), 1e-6);
  {
    std::vector<double> all_detected;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < total; ++p)
        if (matches[i].detected[p]) all_detected.push_back(matches[i].area[p]);
    double global_median = median(all_detected);
    for (std::size_t q = 0; q < clusters.clusters.size(); ++q) {
      std::vector<double> areas;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = qm.offset[q]; p < qm.offset[q + 1]; ++p)
          if (matches[i].detected[p]) areas.push_back(matches[i].area[p]);
      double med = areas.empty() ? global_median : median(areas);
      if (med > 0.0) epsilon[q] = 1e-6 * med;
    }
  }

  parallel_for(n, options.threads, [&](std::size_t i) {
    for (std::size_t q = 0; q < clusters.clusters.size(); ++q) {
      for (std::size_t p = qm.offset[q]; p < qm.offset[q + 1]; ++p) {
        if (matches[i].detected[p]) {
          qm.y[i * total + p] = matches[i].area[p];
          qm.detected[i * total + p] = 1;
        } else {
          double w = qm.typical_width[p];
          double x = flat_positions[p];
          double area = integrate_window(spectra[i], x - 0.5 * w, x + 0.5 * w);
          qm.y[i * total + p] = std::max(area, epsilon[q]);
        }
      }
    }
  });
  return qm;
}

LogMatrix log_matrix(const QuantifiedMatrix& qm) {
  const std::size_t n = qm.n_samples();
  const std::size_t total = qm.n_peaks();
  LogMatrix lm;
  lm.l.resize(n * total);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < total; ++p) lm.l[i * total + p] = std::log(qm.at(i, p));
  lm.l_bar.assign(total, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < total; ++p) lm.l_bar[p] += lm.l[i * total + p];
  for (std::size_t p = 0; p < total; ++p) lm.l_bar[p] /= static_cast<double>(n);
  lm.y_bar.resize(total);
  for (std::size_t p = 0; p < total; ++p) lm.y_bar[p] = std::exp(lm.l_bar[p]);
  lm.argmax.resize(qm.n_clusters());
  for (std::size_t q = 0; q < qm.n_clusters(); ++q) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < qm.peak_count(q); ++j)
      if (lm.l_bar[qm.offset[q] + j] > lm.l_bar[qm.offset[q] + best]) best = j;
    lm.argmax[q] = best;
  }
  return lm;
}

std::vector<std::vector<double>> typical_patterns(const QuantifiedMatrix& qm,
                                                  const LogMatrix& lm) {
  std::vector<std::vector<double>> patterns(qm.n_clusters());
  for (std::size_t q = 0; q < qm.n_clusters(); ++q)
    patterns[q].assign(lm.l_bar.begin() + static_cast<std::ptrdiff_t>(qm.offset[q]),
                       lm.l_bar.begin() + static_cast<std::ptrdiff_t>(qm.offset[q + 1]));
  return patterns;
}

QuantifiedMatrix filter_clusters(const QuantifiedMatrix& qm, const ClusterSet& kept) {
  std::map<int, std::size_t> id_to_index;
  for (std::size_t q = 0; q < qm.n_clusters(); ++q)
    id_to_index[qm.clusters.clusters[q].cluster_id] = q;

  QuantifiedMatrix out;
  out.sample_ids = qm.sample_ids;
  out.clusters = kept;
  out.offset = build_offsets(kept);
  const std::size_t n = qm.n_samples();
  const std::size_t total = out.offset.back();
  out.y.resize(n * total);
  out.detected.resize(n * total);
  out.typical_width.resize(total);

  for (std::size_t qk = 0; qk < kept.clusters.size(); ++qk) {
    auto it = id_to_index.find(kept.clusters[qk].cluster_id);
    if (it == id_to_index.end())
      throw ValidationError("filter_clusters: cluster_id " +
                            std::to_string(kept.clusters[qk].cluster_id) + " not in matrix");
    std::size_t q = it->second;
    if (qm.peak_count(q) != kept.clusters[qk].size())
      throw ValidationError("filter_clusters: peak count mismatch");
    for (std::size_t j = 0; j < kept.clusters[qk].size(); ++j) {
      out.typical_width[out.offset[qk] + j] = qm.typical_width[qm.offset[q] + j];
      for (std::size_t i = 0; i < n; ++i) {
        out.y[i * total + out.offset[qk] + j] = qm.at(i, qm.offset[q] + j);
        out.detected[i * total + out.offset[qk] + j] = qm.detected[i * qm.n_peaks() + qm.offset[q] + j];
      }
    }
  }
  return out;
}

void write_quantified(const QuantifiedMatrix& qm, const std::string& long_path,
                      const std::string& summary_path) {
  {
    std::ofstream out(long_path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + long_path);
    out << "sample_id,cluster_id,j,delta_flag,y\n";
    for (std::size_t i = 0; i < qm.n_samples(); ++i)
      for (std::size_t q = 0; q < qm.n_clusters(); ++q)
        for (std::size_t j = 0; j < qm.peak_count(q); ++j)
          out << qm.sample_ids[i] << ',' << qm.clusters.clusters[q].cluster_id << ',' << (j + 1)
              << ',' << (qm.is_detected(i, qm.offset[q] + j) ? 1 : 0) << ','
              << format_double(qm.at(i, qm.offset[q] + j)) << '\n';
    if (!out) throw Error("write failed: " + long_path);
  }
  {
    LogMatrix lm = log_matrix(qm);
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + summary_path);
    out << "cluster_id,j,consensus_mz,typical_width,l_bar\n";
    for (std::size_t q = 0; q < qm.n_clusters(); ++q)
      for (std::size_t j = 0; j < qm.peak_count(q); ++j)
        out << qm.clusters.clusters[q].cluster_id << ',' << (j + 1) << ','
            << format_double(qm.clusters.clusters[q].positions[j]) << ','
            << format_double(qm.typical_width[qm.offset[q] + j]) << ','
            << format_double(lm.l_bar[qm.offset[q] + j]) << '\n';
    if (!out) throw Error("write failed: " + summary_path);
  }
}

QuantifiedMatrix read_quantified(const std::string& long_path, const std::string& summary_path) {
  QuantifiedMatrix qm;

  // summary drives the cluster structure
  {
    std::ifstream in(summary_path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + summary_path);
    std::string line;
    std::size_t ln = 0;
    int current = std::numeric_limits<int>::min();
    std::vector<double> widths;
    while (std::getline(in, line)) {
      ++ln;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string_view raw = trim(line);
      if (raw.empty() || raw.front() == '#') continue;
      auto fields = split(raw, ',');
      if (!parse_int(fields[0])) continue;  // header
      if (fields.size() != 5) throw ParseError(summary_path, ln, "expected 5 columns");
      int id = static_cast<int>(*parse_int(fields[0]));
      auto mz = parse_double(fields[2]);
      auto width = parse_double(fields[3]);
      if (!mz || !width) throw ParseError(summary_path, ln, "non-numeric field");
      if (qm.clusters.clusters.empty() || id != current) {
        IsotopicCluster c;
        c.cluster_id = id;
        qm.clusters.clusters.push_back(c);
        current = id;
      }
      qm.clusters.clusters.back().positions.push_back(*mz);
      qm.clusters.clusters.back().support.push_back(0);
      widths.push_back(*width);
    }
    qm.offset = build_offsets(qm.clusters);
    qm.typical_width = std::move(widths);
  }

  std::map<int, std::size_t> cluster_index;
  for (std::size_t q = 0; q < qm.n_clusters(); ++q)
    cluster_index[qm.clusters.clusters[q].cluster_id] = q;

  {
    std::ifstream in(long_path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + long_path);
    std::string line;
    std::size_t ln = 0;
    std::map<std::string, std::size_t> sample_index;
    const std::size_t total = qm.n_peaks();
    std::vector<std::tuple<std::size_t, std::size_t, std::uint8_t, double>> entries;
    while (std::getline(in, line)) {
      ++ln;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string_view raw = trim(line);
      if (raw.empty() || raw.front() == '#') continue;
      auto fields = split(raw, ',');
      if (fields.size() != 5) throw ParseError(long_path, ln, "expected 5 columns");
      if (!parse_int(fields[1])) continue;  // header
      std::string sid = std::string(trim(fields[0]));
      int cid = static_cast<int>(*parse_int(fields[1]));
      auto j = parse_int(fields[2]);
      auto flag = parse_int(fields[3]);
      auto value = parse_double(fields[4]);
      if (!j || !flag || !value) throw ParseError(long_path, ln, "non-numeric field");
      auto qit = cluster_index.find(cid);
      if (qit == cluster_index.end())
        throw ValidationError(long_path + ": unknown cluster_id " + std::to_string(cid));
      std::size_t q = qit->second;
      if (*j < 1 || static_cast<std::size_t>(*j) > qm.peak_count(q))
        throw ValidationError(long_path + ": peak index out of range for cluster " +
                              std::to_string(cid));
      auto sit = sample_index.find(sid);
      if (sit == sample_index.end()) {
        sit = sample_index.emplace(sid, qm.sample_ids.size()).first;
        qm.sample_ids.push_back(sid);
      }
      entries.emplace_back(sit->second, qm.offset[q] + static_cast<std::size_t>(*j) - 1,
                           static_cast<std::uint8_t>(*flag != 0), *value);
    }
    qm.y.assign(qm.n_samples() * total, 0.0);
    qm.detected.assign(qm.n_samples() * total, 0);
    std::vector<std::uint8_t> seen(qm.n_samples() * total, 0);
    for (const auto& [i, p, flag, value] : entries) {
      qm.y[i * total + p] = value;
      qm.detected[i * total + p] = flag;
      seen[i * total + p] = 1;
    }
    if (std::find(seen.begin(), seen.end(), std::uint8_t{0}) != seen.end())
      throw ValidationError(long_path + ": incomplete matrix (missing sample x peak entries)");
  }
  return qm;
}

}  // namespace isoclust
