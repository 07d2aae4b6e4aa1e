/*
 * Copyright 2026 The kbmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Coordinate-ascent variational inference for kernelized Bayesian matrix
// factorization with twin (multiple) kernel learning.
//
// Storage conventions for one domain with N objects, P kernels, rank R:
//   projection A          mean N x R, one N x N covariance per column s
//   precision priors      Gamma shape/scale, N x R
//   kernel components G_m mean R x N, covariance g_var(m) * I (object independent)
//   kernel weights e      mean P, covariance P x P; Gamma priors eta (P)
//   composite H           mean R x N, one R x R covariance shared by all objects
// In the single-kernel variant there is no G/e/eta; the components that
// enter the factorization are stored in the H slot with noise sigma_g.

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbmf/kernel_ops.hpp"

namespace kbmf {

enum class Variant {
  MklBinary,         ///< multiple kernels per domain, +-1 outputs through truncated scores
  MklRegression,     ///< multiple kernels per domain, Gaussian real-valued outputs
  TwinKernelBinary,  ///< one kernel per domain, +-1 outputs
};

std::string_view to_string(Variant variant);
/// Accepts "mkl-binary", "mkl-regression", "twin-kernel-binary".
Variant parse_variant(std::string_view name);
bool is_binary(Variant variant);
bool is_multi_kernel(Variant variant);

struct HyperParams {
  double alpha_eta = 1.0;
  double beta_eta = 1.0;
  double alpha_lambda = 1.0;
  double beta_lambda = 1.0;
  double sigma_g = 0.1;
  double sigma_h = 0.1;
  double margin_nu = 1.0;  ///< binary variants
  double sigma_y = 1.0;    ///< regression variant
  int rank = 5;
  int max_iter = 200;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;

  /// Throws ParameterError on any non-positive scale, rank < 1 or max_iter < 0.
  void validate() const;
};

struct DomainPosteriors {
  bool multi_kernel = true;

  Matrix lambda_shape;  ///< N x R
  Matrix lambda_scale;  ///< N x R

  Matrix a_mean;               ///< N x R
  std::vector<Matrix> a_cov;   ///< R matrices, N x N
  Vector a_cov_logdet;         ///< log det of each a_cov

  std::vector<Matrix> g_mean;  ///< P matrices, R x N
  Vector g_var;                ///< P

  Vector eta_shape;  ///< P
  Vector eta_scale;  ///< P
  Vector e_mean;     ///< P
  Matrix e_cov;      ///< P x P
  double e_cov_logdet = 0.0;

  Matrix h_mean;  ///< R x N
  Matrix h_cov;   ///< R x R
  double h_cov_logdet = 0.0;

  [[nodiscard]] Index objects() const { return a_mean.rows(); }
  [[nodiscard]] Index rank() const { return a_mean.cols(); }
  [[nodiscard]] std::size_t kernels() const { return g_mean.size(); }
  /// E[e e^T] = mu mu^T + Sigma.
  [[nodiscard]] Matrix e_second_moment() const;
  /// sum_i E[h_i h_i^T] = mu(H) mu(H)^T + N Sigma(h).
  [[nodiscard]] Matrix h_scatter() const;
};

enum class OutputMode { Binary, Regression };

/// q(F): per-entry truncated normals with unit pre-truncation variance in
/// binary mode; absent (matrices empty) in regression mode, where Y is
/// observed directly.
struct OutputPosterior {
  OutputMode mode = OutputMode::Binary;
  Matrix mean;      ///< N_x x N_z
  Matrix variance;  ///< N_x x N_z
  Matrix entropy;   ///< N_x x N_z
};

struct FitState {
  DomainPosteriors x;
  DomainPosteriors z;
  OutputPosterior f;
};

struct UpdateRecord {
  int iteration;
  std::string update;
  double elbo;
};

struct FitTrace {
  std::vector<double> elbo_per_iter;
  double initial_elbo = 0.0;
  int iterations_run = 0;
  bool converged = false;
  std::chrono::duration<double> wall_time{0.0};
  std::vector<std::string> warnings;
  std::vector<UpdateRecord> updates;  ///< filled when FitOptions::record_updates
};

enum class DomainOrder { XThenZ, ZThenX };

struct FitOptions {
  std::optional<FitState> initial;  ///< overrides init_state when set
  DomainOrder order = DomainOrder::XThenZ;
  bool record_updates = false;      ///< evaluate the bound after every factor update
};

struct FitResult {
  FitState state;
  FitTrace trace;
};

/// Everything needed to predict with and to persist a trained model.
struct Model {
  Variant variant = Variant::MklBinary;
  HyperParams hp;
  FitState state;
  FitTrace trace;
  std::vector<std::string> kernel_names_x;
  std::vector<std::string> kernel_names_z;
};

// --- validation and initialization -------------------------------------

/// Checks bundle sizes against y and the label domain of the variant.
void check_problem(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
                   const HyperParams& hp, Variant variant);

/// Deterministic starting point. From the seeded generator, per domain:
/// mu(A) ~ N(0,1) (row-major by object, then component), then every mu(G_m)
/// ~ N(0,1) (kernel by kernel, column by column). Unit projection
/// covariances, unit kernel weights with identity covariance,
/// mu(H) = sum_m mu(e)_m mu(G_m), priors at their prior values, and binary
/// outputs with mean y * (nu + 1). The single-kernel variant draws its
/// components directly into the H slot.
FitState init_state(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
                    const HyperParams& hp, Variant variant);

// --- per-domain coordinate updates --------------------------------------

/// q(Lambda) from the current second moments of A.
void update_projection_priors(DomainPosteriors& d, const HyperParams& hp);

/// q(A): one N x N solve per component s.
void update_projections(DomainPosteriors& d, const KernelBundle& k, const HyperParams& hp);

/// q(G_m), swept over m in ascending order with the freshest neighbours.
void update_kernel_components(DomainPosteriors& d, const KernelBundle& k, const HyperParams& hp);

/// q(eta) then q(e).
void update_kernel_weights(DomainPosteriors& d, const HyperParams& hp);

/// q(H) for the multiple-kernel variants.
///
/// `coupling` is N_other x N_self: F^T (or Y^T) when updating domain x and
/// F (or Y) when updating domain z. `coupling_scale` is 1 for binary
/// outputs and 1/sigma_y^2 for real-valued outputs.
void update_composite(DomainPosteriors& d, const DomainPosteriors& other, const Matrix& coupling,
                      double coupling_scale, const HyperParams& hp);

/// q(G) of the single-kernel variant (stored in the H slot).
void update_single_kernel_components(DomainPosteriors& d, const KernelBundle& k,
                                     const DomainPosteriors& other, const Matrix& coupling,
                                     const HyperParams& hp);

/// q(F): truncated normals around mu(h_x)^T mu(h_z).
void update_outputs(OutputPosterior& f, const DomainPosteriors& x, const DomainPosteriors& z,
                    const Matrix& y, const HyperParams& hp);

// --- evidence lower bound ------------------------------------------------

/// Per-factor contributions E[log p] + H[q] to the bound.
struct ElboTerms {
  double lambda = 0.0;
  double a = 0.0;
  double g = 0.0;
  double eta = 0.0;
  double e = 0.0;
  double h = 0.0;
  double output = 0.0;

  [[nodiscard]] double total() const { return lambda + a + g + eta + e + h + output; }
};

/// Contributions of one domain (output term left at zero).
ElboTerms domain_elbo(const DomainPosteriors& d, const KernelBundle& k, const HyperParams& hp);

/// Full bound; throws NumericalError naming the first non-finite term.
ElboTerms elbo_terms(const FitState& s, const KernelBundle& kx, const KernelBundle& kz,
                     const Matrix& y, const HyperParams& hp, Variant variant);
double elbo(const FitState& s, const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
            const HyperParams& hp, Variant variant);

// --- driver ---------------------------------------------------------------

/// Runs the update cycle until the relative change of the bound drops
/// below hp.rel_tol or hp.max_iter iterations have run.
FitResult fit(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
              const HyperParams& hp, Variant variant, const FitOptions& options = {});

/// Fit and package into a Model (kernel names included).
Model train(const KernelBundle& kx, const KernelBundle& kz, const Matrix& y,
            const HyperParams& hp, Variant variant, const FitOptions& options = {});

/// Transposes the problem: swaps domains and transposes q(F).
FitState mirror(const FitState& s);

}  // namespace kbmf
