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
#include "isoclust/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "isoclust/errors.hpp"
#include "isoclust/log.hpp"
#include "isoclust/text.hpp"

namespace isoclust {

namespace {

const std::map<std::string, MeasureKind>& kind_names() {
  static const std::map<std::string, MeasureKind> names = {
      {"bp", MeasureKind::bp},         {"bc", MeasureKind::bc},
      {"sr", MeasureKind::sr},         {"mr", MeasureKind::mr},
      {"sq", MeasureKind::sq},         {"mq", MeasureKind::mq},
      {"sl", MeasureKind::sl},         {"ml", MeasureKind::ml},
      {"ratios", MeasureKind::ratios}, {"rankvec", MeasureKind::rankvec},
      {"invrankvec", MeasureKind::invrankvec},
      {"mode", MeasureKind::mode},     {"cg", MeasureKind::cg},
      {"spread", MeasureKind::spread}, {"skew", MeasureKind::skew},
      {"kurt", MeasureKind::kurt},     {"poly", MeasureKind::poly},
  };
  return names;
}

}  // namespace

MeasureKind measure_kind_from_string(const std::string& name) {
  auto it = kind_names().find(lower(name));
  if (it == kind_names().end()) throw ConfigError("unknown measure kind '" + name + "'");
  return it->second;
}

std::string to_string(MeasureKind kind) {
  for (const auto& [name, k] : kind_names())
    if (k == kind) return name;
  return "?";
}

OnVariant on_variant_from_string(const std::string& name) {
  std::string t = lower(name);
  if (t == "y") return OnVariant::y;
  if (t == "l") return OnVariant::l;
  if (t == "r") return OnVariant::r;
  if (t == "s") return OnVariant::s;
  throw ConfigError("unknown on-variant '" + name + "' (allowed: y, l, r, s)");
}

std::string to_string(OnVariant on) {
  switch (on) {
    case OnVariant::y: return "y";
    case OnVariant::l: return "l";
    case OnVariant::r: return "r";
    case OnVariant::s: return "s";
  }
  return "?";
}

bool is_shape_kind(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::ratios:
    case MeasureKind::rankvec:
    case MeasureKind::invrankvec:
    case MeasureKind::mode:
    case MeasureKind::cg:
    case MeasureKind::spread:
    case MeasureKind::skew:
    case MeasureKind::kurt:
    case MeasureKind::poly:
      return true;
    default:
      return false;
  }
}

ShapeResiduals shape_residuals(std::span<const double> l_row, std::span<const double> l_bar) {
  if (l_row.size() != l_bar.size() || l_row.size() < 2)
    throw ValidationError("shape_residuals requires matching vectors of length >= 2");
  const std::size_t J = l_row.size();
  ShapeResiduals res;
  double sum = 0.0;
  for (std::size_t j = 0; j < J; ++j) sum += l_row[j] - l_bar[j];
  res.alpha = sum / static_cast<double>(J);
  res.beta = std::exp(res.alpha);
  res.s.resize(J);
  res.r.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    res.s[j] = l_row[j] - l_bar[j] - res.alpha;
    res.r[j] = std::exp(res.s[j]);
  }
  return res;
}

std::vector<double> midranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k + 1;
    while (end < n && x[order[end]] == x[order[k]]) ++end;
    double rank = 0.5 * static_cast<double>(k + 1 + end);  // mean of ranks k+1..end
    for (std::size_t t = k; t < end; ++t) ranks[order[t]] = rank;
    k = end;
  }
  return ranks;
}

std::vector<std::size_t> inverse_rank_order(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  for (auto& idx : order) ++idx;  // 1-based positions
  return order;
}

DistributionShape distribution_shape(std::span<const double> x) {
  if (x.size() < 2) throw ValidationError("distribution_shape requires J >= 2");
  double total = 0.0;
  for (double v : x) {
    if (!(v > 0.0)) throw ValidationError("distribution_shape requires positive masses");
    total += v;
  }
  DistributionShape out;
  const std::size_t J = x.size();
  for (std::size_t j = 0; j < J; ++j)
    out.cg += static_cast<double>(j + 1) * (x[j] / total);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    double d = static_cast<double>(j + 1) - out.cg;
    double p = x[j] / total;
    m2 += d * d * p;
    m3 += d * d * d * p;
    m4 += d * d * d * d * p;
  }
  out.spread = std::sqrt(m2);
  if (m2 > 0.0) {
    out.skewness = m3 / (m2 * out.spread);
    out.kurtosis = m4 / (m2 * m2);
  } else {
    log::warn("distribution_shape: zero spread; reporting skewness/kurtosis as 0");
  }
  return out;
}

PolynomialShape polynomial_shape(std::span<const double> x) {
  const std::size_t J = x.size();
  if (J < 3) throw ValidationError("polynomial_shape requires J >= 3");
  const double jbar = 0.5 * static_cast<double>(J + 1);
  double su2 = 0.0, su4 = 0.0, sx = 0.0, sux = 0.0, su2x = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    double u = static_cast<double>(j + 1) - jbar;
    su2 += u * u;
    su4 += u * u * u * u;
    sx += x[j];
    sux += u * x[j];
    su2x += u * u * x[j];
  }
  // u is symmetric around 0, so the odd cross terms vanish and the linear
  // coefficient decouples from (alpha, gamma)
  PolynomialShape fit;
  fit.beta = sux / su2;
  const double nd = static_cast<double>(J);
  double mean_u2 = su2 / nd;
  double sv2 = su4 - su2 * su2 / nd;
  double svx = su2x - mean_u2 * sx;
  fit.gamma = sv2 > 0.0 ? svx / sv2 : 0.0;
  fit.alpha = sx / nd - fit.gamma * mean_u2;
  return fit;
}

std::vector<double> pairwise_components(std::span<const double> x, bool ratio,
                                        PairSelection selection, std::size_t j1, std::size_t j2) {
  const std::size_t J = x.size();
  std::vector<double> out;
  auto combine = [&](double a, double b) { return ratio ? a / b : a - b; };
  switch (selection) {
    case PairSelection::consecutive:
      for (std::size_t j = 0; j + 1 < J; ++j) out.push_back(combine(x[j], x[j + 1]));
      break;
    case PairSelection::top_two:
      out.push_back(combine(x[j1], x[j2]));
      break;
    case PairSelection::all:
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t jp = j + 1; jp < J; ++jp) out.push_back(combine(x[j], x[jp]));
      break;
  }
  return out;
}

std::vector<double> quantile_normalize(const std::vector<double>& matrix, std::size_t n,
                                       std::size_t m) {
  if (matrix.size() != n * m) throw ValidationError("quantile_normalize: size mismatch");
  std::vector<double> reference(m, 0.0);
  std::vector<double> row(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(matrix.begin() + static_cast<std::ptrdiff_t>(i * m),
              matrix.begin() + static_cast<std::ptrdiff_t>((i + 1) * m), row.begin());
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < m; ++k) reference[k] += row[k];
  }
  for (auto& v : reference) v /= static_cast<double>(n);

  std::vector<double> out(n * m);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> r(matrix.data() + i * m, m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
    std::size_t k = 0;
    while (k < m) {
      std::size_t end = k + 1;
      while (end < m && r[order[end]] == r[order[k]]) ++end;
      double value = 0.0;  // ties share the mean of their reference slots
      for (std::size_t t = k; t < end; ++t) value += reference[t];
      value /= static_cast<double>(end - k);
      for (std::size_t t = k; t < end; ++t) out[i * m + order[t]] = value;
      k = end;
    }
  }
  return out;
}

bool impute_column(std::vector<double>& column, const std::vector<std::uint8_t>& missing) {
  if (column.size() != missing.size()) throw ValidationError("impute_column: size mismatch");
  double sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (!missing[i]) {
      sum += column[i];
      ++observed;
    }
  }
  if (observed == 0) return false;
  double mean = sum / static_cast<double>(observed);
  for (std::size_t i = 0; i < column.size(); ++i)
    if (missing[i]) column[i] = mean;
  return true;
}

namespace {

/// Midrank of `value` inserted into the sorted vector `sorted`.
double insertion_rank(const std::vector<double>& sorted, double value) {
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), value);
  auto hi = std::upper_bound(sorted.begin(), sorted.end(), value);
  double less = static_cast<double>(lo - sorted.begin());
  double equal = static_cast<double>(hi - lo);
  return less + 1.0 + 0.5 * equal;
}

/// Maps one row's order statistics onto a reference distribution of the same
/// length; ties share the mean of their reference slots.
void map_to_reference(std::span<const double> row, const std::vector<double>& reference,
                      std::vector<double>& out) {
  const std::size_t m = row.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
  std::size_t k = 0;
  while (k < m) {
    std::size_t end = k + 1;
    while (end < m && row[order[end]] == row[order[k]]) ++end;
    double value = 0.0;
    for (std::size_t t = k; t < end; ++t) value += reference[t];
    value /= static_cast<double>(end - k);
    for (std::size_t t = k; t < end; ++t) out[order[t]] = value;
    k = end;
  }
}

}  // namespace

MeasureContext::MeasureContext(const QuantifiedMatrix& qm, std::vector<std::size_t> training,
                               const MeasureOptions& options)
    : qm_(&qm), options_(options), training_(std::move(training)) {
  if (training_.empty()) throw ValidationError("MeasureContext requires a non-empty training set");
  const std::size_t P = qm.n_peaks();
  const std::size_t n_t = training_.size();

  // validate kind/on combinations
  if (options_.kind == MeasureKind::cg || options_.kind == MeasureKind::spread ||
      options_.kind == MeasureKind::skew || options_.kind == MeasureKind::kurt) {
    if (options_.on != OnVariant::y && options_.on != OnVariant::r)
      throw ConfigError("distributional shape measures require positive input (on = y or r)");
  }
  if (options_.kind == MeasureKind::poly) {
    if (options_.on != OnVariant::r && options_.on != OnVariant::s)
      throw ConfigError("polynomial shape requires residual input (on = r or s)");
  }

  training_pos_.assign(qm.n_samples(), -1);
  for (std::size_t t = 0; t < n_t; ++t) {
    if (training_[t] >= qm.n_samples()) throw ValidationError("training index out of range");
    training_pos_[training_[t]] = static_cast<std::ptrdiff_t>(t);
  }

  // typical pattern from the training rows only
  l_bar_.assign(P, 0.0);
  for (std::size_t t = 0; t < n_t; ++t)
    for (std::size_t p = 0; p < P; ++p) l_bar_[p] += std::log(qm.at(training_[t], p));
  for (auto& v : l_bar_) v /= static_cast<double>(n_t);
  y_bar_.resize(P);
  for (std::size_t p = 0; p < P; ++p) y_bar_[p] = std::exp(l_bar_[p]);

  const std::size_t Q = qm.n_clusters();
  jmax_.resize(Q);
  jsecond_.resize(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    std::size_t J = qm.peak_count(q);
    std::size_t best = 0;
    for (std::size_t j = 1; j < J; ++j)
      if (l_bar_[qm.offset[q] + j] > l_bar_[qm.offset[q] + best]) best = j;
    jmax_[q] = best;
    std::size_t second = best == 0 ? 1 : 0;
    for (std::size_t j = 0; j < J; ++j) {
      if (j == best) continue;
      if (l_bar_[qm.offset[q] + j] > l_bar_[qm.offset[q] + second]) second = j;
    }
    jsecond_[q] = J >= 2 ? second : best;
  }

  if (options_.kind == MeasureKind::sr || options_.kind == MeasureKind::mr) {
    sorted_train_.assign(P, std::vector<double>(n_t));
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t t = 0; t < n_t; ++t) sorted_train_[p][t] = qm.at(training_[t], p);
      std::sort(sorted_train_[p].begin(), sorted_train_[p].end());
    }
    // plain within-training midranks, column by column
    train_ranks_.resize(n_t * P);
    std::vector<double> col(n_t);
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t t = 0; t < n_t; ++t) col[t] = qm.at(training_[t], p);
      auto ranks = midranks(col);
      for (std::size_t t = 0; t < n_t; ++t) train_ranks_[t * P + p] = ranks[t];
    }
  }

  if (options_.kind == MeasureKind::sq || options_.kind == MeasureKind::mq) {
    std::vector<double> train_matrix(n_t * P);
    for (std::size_t t = 0; t < n_t; ++t)
      for (std::size_t p = 0; p < P; ++p) train_matrix[t * P + p] = qm.at(training_[t], p);
    quantile_reference_.assign(P, 0.0);
    {
      std::vector<double> row(P);
      for (std::size_t t = 0; t < n_t; ++t) {
        std::copy(train_matrix.begin() + static_cast<std::ptrdiff_t>(t * P),
                  train_matrix.begin() + static_cast<std::ptrdiff_t>((t + 1) * P), row.begin());
        std::sort(row.begin(), row.end());
        for (std::size_t k = 0; k < P; ++k) quantile_reference_[k] += row[k];
      }
      for (auto& v : quantile_reference_) v /= static_cast<double>(n_t);
    }
    train_quantiles_.resize(n_t * P);
    std::vector<double> out_row(P);
    for (std::size_t t = 0; t < n_t; ++t) {
      map_to_reference(std::span<const double>(train_matrix.data() + t * P, P),
                       quantile_reference_, out_row);
      std::copy(out_row.begin(), out_row.end(),
                train_quantiles_.begin() + static_cast<std::ptrdiff_t>(t * P));
    }
  }

  build_columns();

  if (is_shape_kind(options_.kind)) {
    // imputation reference: mean of each column over training rows that
    // observed the cluster at least partly
    const std::size_t pcols = columns_.size();
    impute_mean_.assign(pcols, 0.0);
    impute_defined_.assign(pcols, 0);
    std::vector<std::size_t> counts(pcols, 0);
    std::vector<double> row(pcols);
    for (std::size_t t = 0; t < n_t; ++t) {
      std::size_t i = training_[t];
      compute_row(i, true, t, row, nullptr);
      for (std::size_t c = 0; c < pcols; ++c) {
        if (qm.cluster_detected(i, column_cluster_[c])) {
          impute_mean_[c] += row[c];
          ++counts[c];
        }
      }
    }
    std::size_t undefined = 0;
    for (std::size_t c = 0; c < pcols; ++c) {
      if (counts[c] > 0) {
        impute_mean_[c] /= static_cast<double>(counts[c]);
        impute_defined_[c] = 1;
      } else {
        ++undefined;
      }
    }
    if (undefined > 0)
      log::warn(std::to_string(undefined) +
                " shape feature column(s) unobserved in every training sample; using 0");
  }
}

void MeasureContext::build_columns() {
  const auto& clusters = qm_->clusters.clusters;
  columns_.clear();
  column_cluster_.clear();
  auto add = [&](std::size_t q, const std::string& suffix) {
    columns_.push_back("c" + std::to_string(clusters[q].cluster_id) + suffix);
    column_cluster_.push_back(q);
  };
  for (std::size_t q = 0; q < clusters.size(); ++q) {
    const std::size_t J = qm_->peak_count(q);
    switch (options_.kind) {
      case MeasureKind::bp:
        for (std::size_t j = 0; j < J; ++j) add(q, "_j" + std::to_string(j + 1));
        break;
      case MeasureKind::bc:
      case MeasureKind::sr:
      case MeasureKind::mr:
      case MeasureKind::sq:
      case MeasureKind::mq:
      case MeasureKind::sl:
      case MeasureKind::ml:
      case MeasureKind::mode:
      case MeasureKind::cg:
      case MeasureKind::spread:
      case MeasureKind::skew:
      case MeasureKind::kurt:
        add(q, "");
        break;
      case MeasureKind::ratios: {
        if (J < 2) break;
        bool ratio = options_.on == OnVariant::y || options_.on == OnVariant::r;
        const char* op = ratio ? "_q" : "_d";
        switch (options_.selection) {
          case PairSelection::consecutive:
            for (std::size_t j = 0; j + 1 < J; ++j)
              add(q, op + std::to_string(j + 1) + "_" + std::to_string(j + 2));
            break;
          case PairSelection::top_two:
            add(q, std::string(op) + "max1_max2");
            break;
          case PairSelection::all:
            for (std::size_t j = 0; j < J; ++j)
              for (std::size_t jp = j + 1; jp < J; ++jp)
                add(q, op + std::to_string(j + 1) + "_" + std::to_string(jp + 1));
            break;
        }
        break;
      }
      case MeasureKind::rankvec:
        for (std::size_t j = 0; j < J; ++j) add(q, "_R" + std::to_string(j + 1));
        break;
      case MeasureKind::invrankvec: {
        std::size_t count = options_.top_k < 0
                                ? J
                                : std::min(J, static_cast<std::size_t>(options_.top_k) + 1);
        for (std::size_t t = 0; t < count; ++t) add(q, "_Rinv" + std::to_string(J - t));
        break;
      }
      case MeasureKind::poly:
        if (J >= 3) {
          add(q, "_beta");
          add(q, "_gamma");
        }
        break;
    }
  }
}

std::vector<double> MeasureContext::cluster_vector(std::size_t sample, std::size_t q,
                                                   std::span<const double> l_row) const {
  const std::size_t J = qm_->peak_count(q);
  const std::size_t off = qm_->offset[q];
  std::vector<double> x(J);
  switch (options_.on) {
    case OnVariant::y:
      for (std::size_t j = 0; j < J; ++j) x[j] = qm_->at(sample, off + j);
      break;
    case OnVariant::l:
      for (std::size_t j = 0; j < J; ++j) x[j] = l_row[off + j];
      break;
    case OnVariant::r:
    case OnVariant::s: {
      auto res = shape_residuals(l_row.subspan(off, J),
                                 std::span<const double>(l_bar_.data() + off, J));
      x = options_.on == OnVariant::r ? std::move(res.r) : std::move(res.s);
      break;
    }
  }
  return x;
}

void MeasureContext::compute_row(std::size_t sample, bool in_training, std::size_t training_pos,
                                 std::vector<double>& row,
                                 std::vector<std::uint8_t>* imputed_row) const {
  const QuantifiedMatrix& qm = *qm_;
  const std::size_t P = qm.n_peaks();
  row.assign(columns_.size(), 0.0);
  if (imputed_row) imputed_row->assign(columns_.size(), 0);

  std::vector<double> l_row;
  bool need_log = options_.kind == MeasureKind::sl || options_.kind == MeasureKind::ml ||
                  (is_shape_kind(options_.kind) && options_.on != OnVariant::y);
  if (need_log) {
    l_row.resize(P);
    for (std::size_t p = 0; p < P; ++p) l_row[p] = std::log(qm.at(sample, p));
  }

  std::vector<double> quantile_row;
  if (options_.kind == MeasureKind::sq || options_.kind == MeasureKind::mq) {
    quantile_row.resize(P);
    if (in_training) {
      std::copy(train_quantiles_.begin() + static_cast<std::ptrdiff_t>(training_pos * P),
                train_quantiles_.begin() + static_cast<std::ptrdiff_t>((training_pos + 1) * P),
                quantile_row.begin());
    } else {
      std::vector<double> raw(P);
      for (std::size_t p = 0; p < P; ++p) raw[p] = qm.at(sample, p);
      map_to_reference(raw, quantile_reference_, quantile_row);
    }
  }

  auto rank_at = [&](std::size_t p) {
    if (in_training) return train_ranks_[training_pos * P + p];
    return insertion_rank(sorted_train_[p], qm.at(sample, p));
  };

  std::size_t c = 0;
  const auto& clusters = qm.clusters.clusters;
  for (std::size_t q = 0; q < clusters.size(); ++q) {
    const std::size_t J = qm.peak_count(q);
    const std::size_t off = qm.offset[q];
    switch (options_.kind) {
      case MeasureKind::bp:
        for (std::size_t j = 0; j < J; ++j) row[c++] = qm.is_detected(sample, off + j) ? 1.0 : 0.0;
        continue;
      case MeasureKind::bc:
        row[c++] = qm.cluster_detected(sample, q) ? 1.0 : 0.0;
        continue;
      case MeasureKind::sr: {
        double sum = 0.0;
        for (std::size_t j = 0; j < J; ++j) sum += rank_at(off + j);
        row[c++] = sum;
        continue;
      }
      case MeasureKind::mr:
        row[c++] = rank_at(off + jmax_[q]);
        continue;
      case MeasureKind::sq: {
        double sum = 0.0;
        for (std::size_t j = 0; j < J; ++j) sum += quantile_row[off + j];
        row[c++] = sum;
        continue;
      }
      case MeasureKind::mq:
        row[c++] = quantile_row[off + jmax_[q]];
        continue;
      case MeasureKind::sl: {
        double sum = 0.0;
        for (std::size_t j = 0; j < J; ++j) sum += l_row[off + j];
        row[c++] = sum;
        continue;
      }
      case MeasureKind::ml:
        row[c++] = l_row[off + jmax_[q]];
        continue;
      default:
        break;  // shape kinds below
    }

    // shape kinds: count this cluster's columns, then fill
    std::size_t count = 0;
    while (c + count < column_cluster_.size() && column_cluster_[c + count] == q) ++count;
    if (count == 0) continue;

    if (!qm.cluster_detected(sample, q)) {
      for (std::size_t t = 0; t < count; ++t) {
        row[c + t] = impute_defined_[c + t] ? impute_mean_[c + t] : 0.0;
        if (imputed_row) (*imputed_row)[c + t] = 1;
      }
      c += count;
      continue;
    }

    std::vector<double> x =
        cluster_vector(sample, q, need_log ? std::span<const double>(l_row) : std::span<const double>());
    switch (options_.kind) {
      case MeasureKind::ratios: {
        bool ratio = options_.on == OnVariant::y || options_.on == OnVariant::r;
        auto comps = pairwise_components(x, ratio, options_.selection, jmax_[q], jsecond_[q]);
        for (std::size_t t = 0; t < count; ++t) row[c + t] = comps[t];
        break;
      }
      case MeasureKind::rankvec: {
        auto ranks = midranks(x);
        for (std::size_t t = 0; t < count; ++t) row[c + t] = ranks[t];
        break;
      }
      case MeasureKind::invrankvec: {
        auto order = inverse_rank_order(x);
        for (std::size_t t = 0; t < count; ++t) row[c + t] = static_cast<double>(order[t]);
        break;
      }
      case MeasureKind::mode:
        row[c] = static_cast<double>(inverse_rank_order(x).front());
        break;
      case MeasureKind::cg:
        row[c] = distribution_shape(x).cg;
        break;
      case MeasureKind::spread:
        row[c] = distribution_shape(x).spread;
        break;
      case MeasureKind::skew:
        row[c] = distribution_shape(x).skewness;
        break;
      case MeasureKind::kurt:
        row[c] = distribution_shape(x).kurtosis;
        break;
      case MeasureKind::poly: {
        auto fit = polynomial_shape(x);
        row[c] = fit.beta;
        row[c + 1] = fit.gamma;
        break;
      }
      default:
        break;
    }
    c += count;
  }
}

void MeasureContext::featurize(std::size_t sample, std::vector<double>& row,
                               std::vector<std::uint8_t>* imputed_row) const {
  if (sample >= qm_->n_samples()) throw ValidationError("featurize: sample index out of range");
  std::ptrdiff_t pos = training_pos_[sample];
  compute_row(sample, pos >= 0, pos >= 0 ? static_cast<std::size_t>(pos) : 0, row, imputed_row);
}

FeatureMatrix MeasureContext::training_features() const {
  FeatureMatrix fm;
  fm.kind = to_string(options_.kind);
  fm.on = is_shape_kind(options_.kind) ? to_string(options_.on) : std::string();
  fm.columns = columns_;
  fm.sample_ids.reserve(training_.size());
  fm.values.resize(training_.size() * columns_.size());
  fm.imputed.assign(training_.size() * columns_.size(), 0);
  std::vector<double> row;
  std::vector<std::uint8_t> imp;
  for (std::size_t t = 0; t < training_.size(); ++t) {
    fm.sample_ids.push_back(qm_->sample_ids[training_[t]]);
    featurize(training_[t], row, &imp);
    std::copy(row.begin(), row.end(),
              fm.values.begin() + static_cast<std::ptrdiff_t>(t * columns_.size()));
    std::copy(imp.begin(), imp.end(),
              fm.imputed.begin() + static_cast<std::ptrdiff_t>(t * columns_.size()));
  }
  return fm;
}

FeatureMatrix compute_features(const QuantifiedMatrix& qm, const MeasureOptions& options) {
  std::vector<std::size_t> all(qm.n_samples());
  std::iota(all.begin(), all.end(), std::size_t{0});
  MeasureContext ctx(qm, all, options);
  FeatureMatrix fm = ctx.training_features();

  // a fully-unobserved shape column carries no data: drop it
  if (is_shape_kind(options.kind)) {
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < fm.p(); ++c) {
      bool any_observed = false;
      for (std::size_t i = 0; i < fm.n(); ++i)
        if (!fm.imputed[i * fm.p() + c]) any_observed = true;
      if (any_observed)
        keep.push_back(c);
      else
        log::warn("dropping feature column " + fm.columns[c] + ": no sample observes the cluster");
    }
    if (keep.size() != fm.p()) {
      FeatureMatrix reduced;
      reduced.kind = fm.kind;
      reduced.on = fm.on;
      reduced.sample_ids = fm.sample_ids;
      for (std::size_t c : keep) reduced.columns.push_back(fm.columns[c]);
      reduced.values.resize(fm.n() * keep.size());
      reduced.imputed.resize(fm.n() * keep.size());
      for (std::size_t i = 0; i < fm.n(); ++i)
        for (std::size_t k = 0; k < keep.size(); ++k) {
          reduced.values[i * keep.size() + k] = fm.values[i * fm.p() + keep[k]];
          reduced.imputed[i * keep.size() + k] = fm.imputed[i * fm.p() + keep[k]];
        }
      return reduced;
    }
  }
  return fm;
}

void write_features(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << "# kind: " << fm.kind << '\n';
  if (!fm.on.empty()) out << "# on: " << fm.on << '\n';
  out << "sample_id";
  for (const auto& col : fm.columns) out << ',' << col;
  out << '\n';
  for (std::size_t i = 0; i < fm.n(); ++i) {
    out << fm.sample_ids[i];
    for (std::size_t c = 0; c < fm.p(); ++c) out << ',' << format_double(fm.at(i, c));
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path);

  bool any_imputed =
      std::find(fm.imputed.begin(), fm.imputed.end(), std::uint8_t{1}) != fm.imputed.end();
  if (any_imputed) {
    std::ofstream mask(path + ".imputed", std::ios::binary);
    if (!mask) throw Error("cannot write file: " + path + ".imputed");
    mask << "sample_id,column\n";
    for (std::size_t i = 0; i < fm.n(); ++i)
      for (std::size_t c = 0; c < fm.p(); ++c)
        if (fm.imputed[i * fm.p() + c]) mask << fm.sample_ids[i] << ',' << fm.columns[c] << '\n';
  }
}

FeatureMatrix read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  FeatureMatrix fm;
  std::string line;
  std::size_t ln = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view raw = trim(line);
    if (raw.empty()) continue;
    if (raw.front() == '#') {
      auto body = raw.substr(1);
      auto colon = body.find(':');
      if (colon != std::string_view::npos) {
        std::string key = std::string(trim(body.substr(0, colon)));
        std::string value = std::string(trim(body.substr(colon + 1)));
        if (key == "kind") fm.kind = value;
        if (key == "on") fm.on = value;
      }
      continue;
    }
    auto fields = split(raw, ',');
    if (!header_done) {
      if (fields.empty() || trim(fields[0]) != "sample_id")
        throw ParseError(path, ln, "feature file must start with a sample_id header");
      for (std::size_t c = 1; c < fields.size(); ++c)
        fm.columns.push_back(std::string(trim(fields[c])));
      header_done = true;
      continue;
    }
    if (fields.size() != fm.columns.size() + 1)
      throw ParseError(path, ln, "expected " + std::to_string(fm.columns.size() + 1) + " fields");
    fm.sample_ids.push_back(std::string(trim(fields[0])));
    for (std::size_t c = 1; c < fields.size(); ++c) {
      auto v = parse_double(fields[c]);
      if (!v) throw ParseError(path, ln, "non-numeric feature value");
      fm.values.push_back(*v);
    }
  }
  fm.imputed.assign(fm.values.size(), 0);

  std::ifstream mask(path + ".imputed", std::ios::binary);
  if (mask) {
    std::map<std::string, std::size_t> sample_index;
    for (std::size_t i = 0; i < fm.sample_ids.size(); ++i) sample_index[fm.sample_ids[i]] = i;
    std::map<std::string, std::size_t> column_index;
    for (std::size_t c = 0; c < fm.columns.size(); ++c) column_index[fm.columns[c]] = c;
    std::string mline;
    while (std::getline(mask, mline)) {
      if (!mline.empty() && mline.back() == '\r') mline.pop_back();
      auto fields = split(trim(mline), ',');
      if (fields.size() != 2) continue;
      auto si = sample_index.find(std::string(trim(fields[0])));
      auto ci = column_index.find(std::string(trim(fields[1])));
      if (si != sample_index.end() && ci != column_index.end())
        fm.imputed[si->second * fm.p() + ci->second] = 1;
    }
  }
  return fm;
}

}  // namespace isoclust
