#pragma once

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "simineq/moment_core.hpp"
#include "simineq/smooth_index.hpp"

namespace simineq {

//---------------------------------------------------------------------------//
enum class KappaRule
{
    sqrt_log_n,  //!< sqrt(ln n)
    n_pow_1_16   //!< n^(1/16)
};

double kappa_value(KappaRule rule, std::size_t n);
std::string_view to_string(KappaRule rule);
KappaRule kappa_rule_from_string(std::string_view name);

//! Standardization of the bootstrap root: the original-sample covariance or
//! the covariance re-estimated on each bootstrap sample.
enum class RootScale
{
    original,
    bootstrap
};

//! Treatment of moments whose estimated variance is exactly zero.
//! `drop_zero` removes them from the statistic, the selection and the roots.
enum class DegeneratePolicy
{
    error,
    drop_zero
};

struct Fixed
{
    double c = 0;
};

//! Bootstrap with t-test moment selection (keep j when xi_j >= -1).
struct GmsBootstrap
{
    KappaRule kappa_rule = KappaRule::sqrt_log_n;
    std::size_t B = 1000;
    RootScale scale = RootScale::original;
};

//! Bootstrap of the smoothed statistic plus the bias correction sqrt(n) mu
//! beta, with beta taken from the index specification.
struct SmoothedBootstrap
{
    double mu = 0.02;
    std::size_t B = 1000;
    std::size_t R2 = 100;
};

struct CriticalValueSpec
{
    std::variant<Fixed, GmsBootstrap, SmoothedBootstrap> method;
    double alpha = 0.05;
    DegeneratePolicy degenerate = DegeneratePolicy::error;
};

struct ConfidenceOutcome
{
    double statistic = 0;
    double critical_value = 0;
    bool covered = false;
    std::vector<std::size_t> selected;  //!< GMS only
};

struct LevelSet
{
    std::vector<Vector> grid;
    std::vector<bool> member;
    double level = 0;

    std::vector<Vector> members() const;
};

//---------------------------------------------------------------------------//
//! The ceil((1 - alpha) B)-th smallest value.
double bootstrap_quantile(std::vector<double> values, double alpha);

/*!
 * S(sqrt(n) mbar, Sigma-hat).
 *
 * Qlr uses the regularized covariance. For the boundary kind the statistic is
 * the reflected index -S(-m) = max_j m_j, so that it is large when a
 * moment is violated.
 */
double test_statistic(IndexSpec const& spec, MomentStats const& stats);

//! sqrt(n) S_mu(mbar, Sigma-hat), reflected as above for the boundary kind.
double smoothed_statistic(IndexSpec const& spec,
                          MomentStats const& stats,
                          double mu);

struct GmsResult
{
    double critical_value = 0;
    std::vector<std::size_t> selected;
};

/*!
 * Bootstrap critical value with moment selection on the original sample.
 *
 * Replicate b uses stream.substream({1, b}) and draws fresh simulation shocks.
 * The root over the selected set is S(sqrt(n)(mbar* - mbar)_S, Sigma_S).
 */
GmsResult gms_bootstrap_cv(MomentModel const& model,
                           Dataset const& data,
                           SimPanel const& panel,
                           ConstSpan theta,
                           IndexSpec const& spec,
                           GmsBootstrap const& gms,
                           double alpha,
                           Stream const& stream,
                           DegeneratePolicy policy = DegeneratePolicy::error);

//! Same, from statistics already computed on the original panel.
//! `keep` lists the model moments that `stats` describes, in order. With
//! bootstrap scaling and `drop_zero`, a selected moment with zero variance
//! in a replicate is left out of that replicate's Qlr root.
GmsResult gms_bootstrap_cv(MomentModel const& model,
                           Dataset const& data,
                           ConstSpan theta,
                           std::size_t draws,
                           MomentStats const& stats,
                           std::span<std::size_t const> keep,
                           IndexSpec const& spec,
                           GmsBootstrap const& gms,
                           double alpha,
                           Stream const& stream,
                           DegeneratePolicy policy = DegeneratePolicy::error);

struct SmoothedCv
{
    double quantile = 0;        //!< bootstrap quantile of the root
    double critical_value = 0;  //!< quantile + sqrt(n) mu beta
};

/*!
 * Critical value of the smoothed statistic.
 *
 * One centering panel with R2 draws per observation comes from sub-stream 0
 * and is shared by all replicates; replicate b uses sub-stream {1, b}.
 */
SmoothedCv smoothed_bootstrap_cv(MomentModel const& model,
                                 Dataset const& data,
                                 ConstSpan theta,
                                 IndexSpec const& spec,
                                 SmoothedBootstrap const& sb,
                                 std::size_t draws,
                                 double alpha,
                                 Stream const& stream);

ConfidenceOutcome confidence_membership(ConstSpan theta,
                                        MomentModel const& model,
                                        Dataset const& data,
                                        SimPanel const& panel,
                                        IndexSpec const& spec,
                                        CriticalValueSpec const& cv,
                                        Stream const& stream);

//---------------------------------------------------------------------------//
/*!
 * B x K matrix of roots sqrt(n)(mbar*_j - mbar_j) / sd_j for the moments in
 * `keep`, where sd is the original or the bootstrap standard deviation.
 * Replicates follow the same sub-stream layout as gms_bootstrap_cv.
 */
Matrix bootstrap_roots(MomentModel const& model,
                       Dataset const& data,
                       ConstSpan theta,
                       std::size_t draws,
                       MomentStats const& stats,
                       std::span<std::size_t const> keep,
                       std::size_t B,
                       RootScale scale,
                       Stream const& stream);

//! Quantile of max(0, max_{j in selected} roots(b, j)) over b; 0 when empty.
double max_root_quantile(Matrix const& roots,
                         std::span<std::size_t const> selected,
                         double alpha);

//---------------------------------------------------------------------------//
enum class EndpointRule
{
    naive_fixed,   //!< min_j b_j + c / sqrt(n)
    cv_corrected,  //!< min_j (b_j + c sd_j / sqrt(n))
    smoothed       //!< softmin_mu(b) + c / sqrt(n)
};

//! Right endpoint of a one-sided interval from per-moment bound estimates.
double interval_upper_endpoint(EndpointRule rule,
                               Vector const& bounds,
                               Vector const& sd,
                               std::size_t n,
                               double c,
                               double mu = 0);

//! n sum_j ([mbar_j / sigma_j]_+)^2 using variances only. A zero-variance
//! moment contributes 0 when mbar_j <= 0 and infinity otherwise.
double level_set_statistic(MomentStats const& stats);

LevelSet level_set_estimate(MomentModel const& model,
                            Dataset const& data,
                            SimPanel const& panel,
                            std::vector<Vector> const& grid,
                            double c);

//! Symmetric Hausdorff distance under the Euclidean norm.
double hausdorff_distance(std::vector<Vector> const& a,
                          std::vector<Vector> const& b);

}  // namespace simineq
