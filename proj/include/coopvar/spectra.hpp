#pragma once

#include <optional>
#include <span>
#include <vector>

#include "coopvar/field.hpp"
#include "coopvar/linops.hpp"
#include "coopvar/rng.hpp"

namespace coopvar {

struct EigOpts {
  double tol = 1e-10;     // relative residual
  int max_iters = 10000;
};

/// Principal eigenvalue with its positive eigenfunction(s) and certificates.
/// For block operators both components are populated and normalized jointly.
/// On a disconnected region the positivity margin is measured on the
/// component carrying the eigenfunction.
struct EigenPair {
  double value = 0.0;
  FieldVector fn;
  FieldVector fn2;
  double residual = 0.0;
  double positivity_margin = 0.0;
  int iterations = 0;
};

EigenPair principal_eigenpair(const ShiftedOperator& op, const EigOpts& opts = {});

/// Principal eigenvalue of the cooperative block [[A+V1, -aI], [-bI, A+V2]]
/// by inverse power iteration with a shift below the Gershgorin bound; the
/// iterate is checked for positivity every sweep.
EigenPair cooperative_principal(const ShiftedOperator& op, std::span<const double> v1,
                                std::span<const double> v2, double alpha, double beta,
                                const EigOpts& opts = {});

/// Dense cross-check of cooperative_principal through the symmetrized block;
/// valid below ~5000 nodes.
double cooperative_principal_dense(const ShiftedOperator& op, std::span<const double> v1,
                                   std::span<const double> v2, double alpha, double beta);

/// Principal eigenvalue of the symmetric block
/// [[A/(1+a/b), -(ab/(a+b))I], [-(ab/(a+b))I, A/(1+b/a)]].
EigenPair symmetric_block_principal(const ShiftedOperator& op, double alpha, double beta,
                                    const EigOpts& opts = {});

struct SpectralBoundOpts {
  bool denominator_restricted = false;  // comparison path for the quotient's domain
  int cone_samples = 64;                // 0 disables the sup-inf estimate
  std::uint64_t cone_seed = 0x5eedULL;
};

struct SpectralBoundResult {
  double value = 0.0;              // smallest pencil eigenvalue
  FieldVector minimizer;           // on the zero region, unit L2 norm
  FieldVector zero_extension;      // on the full grid
  double lower_bound = 0.0;        // (sigma1 - lambda)^2
  double upper_bound = 0.0;        // (sigma1_0 - lambda)^2
  double supinf_estimate = 0.0;    // cone estimate; NaN when disabled
  double pencil_asymmetry = 0.0;   // max |B - B^T| / max |B|
  double minimizer_min = 0.0;      // sign diagnostic of the minimizer
  int negative_nodes = 0;
};

/// Variational spectral bound: smallest eigenvalue of the pencil
/// (A0 - lambda I, B) with B = R (A - lambda I)^{-1} R^T.
SpectralBoundResult spectral_bound(const ShiftedOperator& full, const ShiftedOperator& zero,
                                   double lambda, const SpectralBoundOpts& opts = {});

/// Sup-inf estimate over the positive cone: max over trial fields w > 0 of
/// min over zero nodes of ((A - lambda I) w)_i / ((A - lambda I)^{-1} w)_i.
/// The trial set is phi1, smoothed random bumps kept positive pointwise, and
/// (when given) the pencil minimizer's extension lifted by eps * phi1.
double cone_estimate(const ShiftedOperator& full, const ShiftedOperator& zero, double lambda,
                     int n_samples, Rng& rng,
                     const std::vector<double>* minimizer_extension = nullptr);

/// min over zero nodes of the cone ratio for one trial field.
double cone_ratio(const ShiftedOperator& full, const ShiftedOperator& zero, double lambda,
                  std::span<const double> w);

/// Table of (eps, cone ratio of extension + eps*phi1) for the gap study.
std::vector<std::pair<double, double>> cone_profile_sweep(
    const ShiftedOperator& full, const ShiftedOperator& zero, double lambda,
    std::span<const double> minimizer_extension, std::span<const double> epsilons);

}  // namespace coopvar
