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
#include <vector>

namespace isoclust {

/// Ridge logistic regression fit. Columns are standardized internally
/// (mean 0, population SD 1, constant columns left at zero); `coefficients`
/// and `intercept` are reported on the original scale. The penalized
/// log-likelihood gradient at the solution (standardized scale) has max-norm
/// below the fit tolerance; the intercept is never penalized.
struct RidgeModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double lambda = 0.0;
  std::vector<double> center;
  std::vector<double> scale;
  // standardized-scale solution [intercept, coefs...]; used for warm starts
  std::vector<double> std_coefficients;
  int iterations = 0;
  double grad_norm = 0.0;
};

struct RidgeOptions {
  double tolerance = 1e-6;  // max-norm of the penalized gradient
  int max_iterations = 100;
  const std::vector<double>* warm_start = nullptr;  // std_coefficients of a prior fit
};

/// Maximizes sum_i [c_i log p_i + (1-c_i) log(1-p_i)] - (lambda/2) |coef|^2
/// by damped Newton (IRLS with step halving, so the objective never
/// decreases). Throws ValidationError for single-class input or lambda <= 0,
/// ConvergenceError when the gradient tolerance is not reached.
RidgeModel fit_ridge(const std::vector<double>& X, std::size_t n, std::size_t p,
                     const std::vector<std::uint8_t>& labels, double lambda,
                     const RidgeOptions& options = {});

/// Logistic probabilities for rows of X (original scale).
std::vector<double> predict(const RidgeModel& model, const std::vector<double>& X, std::size_t n,
                            std::size_t p);

/// Penalized log-likelihood on the original scale (used by tests and the
/// monotonicity check).
double penalized_loglik(const std::vector<double>& X, std::size_t n, std::size_t p,
                        const std::vector<std::uint8_t>& labels, double intercept,
                        const std::vector<double>& coefficients, double lambda);

}  // namespace isoclust
