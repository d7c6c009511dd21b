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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isoclust/quantify.hpp"

namespace isoclust {

enum class MeasureKind {
  bp,          // binary detection per peak
  bc,          // binary detection per cluster
  sr,          // sum of across-sample ranks
  mr,          // rank at the cluster maximum
  sq,          // sum of quantile-normalized intensities
  mq,          // quantile-normalized intensity at the cluster maximum
  sl,          // sum of log intensities
  ml,          // log intensity at the cluster maximum
  ratios,      // pairwise ratios (or differences on log-scale variants)
  rankvec,     // within-cluster rank vector
  invrankvec,  // within-cluster inverse-rank vector
  mode,        // location of the cluster pattern mode
  cg,          // center of gravity of the cluster pattern
  spread,
  skew,
  kurt,
  poly,        // linear and quadratic tendency of the residual pattern
};

/// Which per-cluster vector a shape measure is computed on.
enum class OnVariant { y, l, r, s };

enum class PairSelection { consecutive, top_two, all };

MeasureKind measure_kind_from_string(const std::string& name);
std::string to_string(MeasureKind kind);
OnVariant on_variant_from_string(const std::string& name);
std::string to_string(OnVariant on);
bool is_shape_kind(MeasureKind kind);

struct MeasureOptions {
  MeasureKind kind = MeasureKind::sl;
  OnVariant on = OnVariant::r;
  PairSelection selection = PairSelection::consecutive;
  int top_k = -1;  // invrankvec: emit only R^-1(J)..R^-1(J-top_k); -1 = all
};

/// Classifier-ready n x p matrix for one measure kind. `imputed` marks
/// entries filled by whole-cluster shape imputation.
struct FeatureMatrix {
  std::string kind;
  std::string on;
  std::vector<std::string> sample_ids;
  std::vector<std::string> columns;
  std::vector<double> values;           // n x p, row-major
  std::vector<std::uint8_t> imputed;    // n x p

  std::size_t n() const { return sample_ids.size(); }
  std::size_t p() const { return columns.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * p() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * p() + j]; }
};

/// Geometric-mean alignment of one observed cluster pattern to the typical
/// pattern: alpha is the mean log offset, beta = exp(alpha), s the centered
/// log residuals and r their back-transform (geometric mean 1).
struct ShapeResiduals {
  double alpha = 0.0;
  double beta = 1.0;
  std::vector<double> s;
  std::vector<double> r;
};
ShapeResiduals shape_residuals(std::span<const double> l_row, std::span<const double> l_bar);

/// Midranks (ties averaged) of x; ranks start at 1.
std::vector<double> midranks(std::span<const double> x);

/// Inverse-rank vector R^-1(J), R^-1(J-1), ..., R^-1(1): positions sorted by
/// descending value, ties broken by ascending position (so the mode of a
/// tied maximum is the smallest tied index). 1-based positions.
std::vector<std::size_t> inverse_rank_order(std::span<const double> x);

struct DistributionShape {
  double cg = 0.0;
  double spread = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};
/// Moments of the discrete distribution on support {1..J} with masses
/// proportional to x (all x_j > 0 required).
DistributionShape distribution_shape(std::span<const double> x);

struct PolynomialShape {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};
/// Least-squares fit of x_j = alpha + beta (j - Jbar) + gamma (j - Jbar)^2
/// with Jbar = (J+1)/2; requires J >= 3.
PolynomialShape polynomial_shape(std::span<const double> x);

/// Pairwise ratio (ratio=true) or difference components of x for the given
/// selection; j1/j2 are the 0-based positions of the first and second
/// pattern maximum (used by top_two).
std::vector<double> pairwise_components(std::span<const double> x, bool ratio,
                                        PairSelection selection, std::size_t j1, std::size_t j2);

/// Quantile normalization of an n x m matrix (row-major): each row's k-th
/// order statistic is replaced by the mean k-th order statistic across rows;
/// ties within a row receive the average of their reference values.
std::vector<double> quantile_normalize(const std::vector<double>& matrix, std::size_t n,
                                       std::size_t m);

/// Mean-imputes entries flagged missing; returns false (column should be
/// dropped) when every entry is missing.
bool impute_column(std::vector<double>& column, const std::vector<std::uint8_t>& missing);

/// Reference statistics for featurization, computed from a training subset
/// of samples only. Held-out samples are featurized against these statistics
/// (rank insertion, quantile mapping onto the training reference, training
/// typical pattern, training imputation means), so cross-validated features
/// never see validation data.
class MeasureContext {
 public:
  MeasureContext(const QuantifiedMatrix& qm, std::vector<std::size_t> training,
                 const MeasureOptions& options);

  const std::vector<std::string>& columns() const { return columns_; }
  const MeasureOptions& options() const { return options_; }
  const std::vector<std::size_t>& training() const { return training_; }

  /// Feature row for any sample index of the underlying matrix.
  void featurize(std::size_t sample, std::vector<double>& row,
                 std::vector<std::uint8_t>* imputed_row = nullptr) const;

  /// Features of the training rows, in training order.
  FeatureMatrix training_features() const;

 private:
  void build_columns();
  void compute_row(std::size_t sample, bool in_training, std::size_t training_pos,
                   std::vector<double>& row, std::vector<std::uint8_t>* imputed_row) const;
  std::vector<double> cluster_vector(std::size_t sample, std::size_t q,
                                     std::span<const double> l_row) const;

  const QuantifiedMatrix* qm_;
  MeasureOptions options_;
  std::vector<std::size_t> training_;
  std::vector<std::ptrdiff_t> training_pos_;  // sample index -> position or -1
  std::vector<std::string> columns_;
  std::vector<std::size_t> column_cluster_;   // column -> cluster index
  std::vector<double> l_bar_;                 // P (training mean log)
  std::vector<double> y_bar_;                 // P
  std::vector<std::size_t> jmax_, jsecond_;   // per cluster (0-based)
  // ranks: per peak, sorted training values; per training row, plain ranks
  std::vector<std::vector<double>> sorted_train_;  // P x n_t (sr/mr only)
  std::vector<double> train_ranks_;                // n_t x P (sr/mr only)
  std::vector<double> quantile_reference_;         // P (sq/mq only)
  std::vector<double> train_quantiles_;            // n_t x P (sq/mq only)
  std::vector<double> impute_mean_;                // per column (shape kinds)
  std::vector<std::uint8_t> impute_defined_;       // per column
};

/// Whole-cohort features (context built on all samples) — the paper-faithful
/// computation used by the summarize CLI.
FeatureMatrix compute_features(const QuantifiedMatrix& qm, const MeasureOptions& options);

void write_features(const FeatureMatrix& fm, const std::string& path);
FeatureMatrix read_features(const std::string& path);

}  // namespace isoclust
