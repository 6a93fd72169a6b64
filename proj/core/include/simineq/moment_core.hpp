#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "simineq/random.hpp"

namespace simineq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
//! n x J per-observation moments, one contiguous row per observation.
using ObsMatrix
    = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ConstSpan = std::span<double const>;
using MutSpan = std::span<double>;

//---------------------------------------------------------------------------//
/*!
 * Sample of n observation records with a fixed, model-defined layout.
 *
 * Records are flat rows of reals; the example models document their columns.
 */
class Dataset
{
  public:
    Dataset() = default;
    Dataset(std::size_t width, std::vector<double> values);

    std::size_t size() const { return n_; }
    std::size_t width() const { return width_; }
    ConstSpan row(std::size_t i) const
    {
        return {values_.data() + i * width_, width_};
    }
    MutSpan row(std::size_t i) { return {values_.data() + i * width_, width_}; }
    std::vector<double> const& values() const { return values_; }

    //! Records at the given indices (with repetition), in order.
    Dataset select(std::span<std::size_t const> indices) const;

  private:
    std::size_t width_ = 0;
    std::size_t n_ = 0;
    std::vector<double> values_;
};

//---------------------------------------------------------------------------//
/*!
 * n x R panel of simulated shocks; draw (i, r) is drawn from P(.|X_i).
 */
class SimPanel
{
  public:
    SimPanel() = default;
    SimPanel(std::size_t n, std::size_t draws, std::size_t shock_dim);

    std::size_t size() const { return n_; }
    std::size_t draws() const { return draws_; }
    std::size_t shock_dim() const { return dim_; }

    ConstSpan draw(std::size_t i, std::size_t r) const
    {
        return {values_.data() + (i * draws_ + r) * dim_, dim_};
    }
    MutSpan draw(std::size_t i, std::size_t r)
    {
        return {values_.data() + (i * draws_ + r) * dim_, dim_};
    }

    bool operator==(SimPanel const&) const = default;

  private:
    std::size_t n_ = 0;
    std::size_t draws_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

//! M(x, u, theta) -> J-vector written into out.
using Kernel = std::function<void(ConstSpan x, ConstSpan u, ConstSpan theta,
                                  MutSpan out)>;
//! E[M(x, u, theta) | x] written into out.
using AnalyticMoment
    = std::function<void(ConstSpan x, ConstSpan theta, MutSpan out)>;
//! One draw from P(.|x).
using ShockSampler = std::function<void(ConstSpan x, Generator&, MutSpan out)>;

/*!
 * Draws the R-draw simulated moment R^-1 sum_r M(X_i, u_r, theta) for record i
 * of a fixed dataset, using fresh shocks from the supplied generator.
 *
 * Built for one (dataset, theta, R); the dataset must outlive the sampler.
 */
using AverageSampler
    = std::function<void(std::size_t i, Generator&, MutSpan out)>;
using AverageSamplerFactory = std::function<AverageSampler(
    Dataset const&, ConstSpan theta, std::size_t draws)>;

//---------------------------------------------------------------------------//
/*!
 * Moment-inequality model E[m_j(X, theta)] <= 0 whose moments are
 * m_j(x, theta) = integral of M_j(x, u, theta) dP(u|x).
 *
 * The shock law is parameter-free. Models may supply `average_sampler`, an
 * exact sampler of the R-draw average that is cheaper than drawing R shocks;
 * it must have the same distribution as the generic path.
 */
struct MomentModel
{
    std::size_t moments = 0;
    std::size_t theta_dim = 0;
    std::size_t shock_dim = 0;
    Kernel kernel;
    AnalyticMoment analytic;  //!< optional; empty when unavailable
    ShockSampler sample_shock;
    AverageSamplerFactory average_sampler;  //!< optional fast path

    bool has_analytic() const { return static_cast<bool>(analytic); }
};

//! Same model with the simulator replaced by the exact conditional moment.
//! The result has shock_dim 0, so any R gives the analytic moments.
MomentModel analytic_view(MomentModel const& model);

//! Sampler for fresh R-draw averages at theta (fast path when available).
//! The model and dataset must outlive the returned sampler.
AverageSampler make_average_sampler(MomentModel const& model,
                                    Dataset const& data,
                                    ConstSpan theta,
                                    std::size_t draws);

//---------------------------------------------------------------------------//
//! Summary statistics of the simulated moments at a fixed theta.
struct MomentStats
{
    Vector mbar;   //!< sample moment vector
    Matrix sigma;  //!< covariance estimate, divisor n
    Vector vdiag;  //!< diag(sigma)
    Matrix omega;  //!< correlation matrix; unit diagonal where vdiag > 0
    std::size_t n = 0;
    bool diagonal_only = false;  //!< off-diagonal entries were not estimated

    std::size_t moments() const { return static_cast<std::size_t>(mbar.size()); }
};

enum class CovarianceMode
{
    full,
    diagonal
};

//! Shocks for every observation; row i uses sub-stream i of `stream`.
SimPanel simulate_panel(MomentModel const& model,
                        Dataset const& data,
                        std::size_t draws,
                        Stream const& stream);

//! Row i holds R^-1 sum_r M(X_i, u_{i,r}, theta).
ObsMatrix per_observation_moments(MomentModel const& model,
                                  Dataset const& data,
                                  SimPanel const& panel,
                                  ConstSpan theta);

//! (nR)^-1 sum_i sum_r M(X_i, u_{i,r}, theta).
Vector sample_moments(MomentModel const& model,
                      Dataset const& data,
                      SimPanel const& panel,
                      ConstSpan theta);

//! n^-1 sum_i (mhat_i - mbar)(mhat_i - mbar)'.
Matrix covariance(MomentModel const& model,
                  Dataset const& data,
                  SimPanel const& panel,
                  ConstSpan theta,
                  Vector const& mbar);

//! Mean, covariance and correlation of per-observation moments.
MomentStats summarize(ObsMatrix const& per_obs,
                      CovarianceMode mode = CovarianceMode::full);

MomentStats moment_stats(MomentModel const& model,
                         Dataset const& data,
                         SimPanel const& panel,
                         ConstSpan theta,
                         CovarianceMode mode = CovarianceMode::full);

/*!
 * Sigma + max(0.012 - det(Omega), 0) * diag(Sigma).
 *
 * Throws DegenerateError naming the first moment with zero variance.
 */
Matrix regularized_covariance(MomentStats const& stats);

//! xi_j = sqrt(n) mbar_j / (kappa sigma_j).
Vector studentized_slackness(MomentStats const& stats, double kappa);

//! Statistics restricted to the listed moments (in the listed order).
MomentStats restrict_moments(MomentStats const& stats,
                             std::span<std::size_t const> keep);

//! Indices of moments with strictly positive variance.
std::vector<std::size_t> nondegenerate_moments(MomentStats const& stats);

//---------------------------------------------------------------------------//
struct Resample
{
    std::vector<std::size_t> indices;  //!< drawn observation indices
    Dataset data;
    SimPanel panel;  //!< fresh shocks for the resampled records
};

/*!
 * Nonparametric bootstrap draw with fresh simulation.
 *
 * Indices come from sub-stream 0 and shocks from sub-stream 1, drawn record by
 * record. Simulation draws are never reused from the original panel.
 */
Resample bootstrap_resample(Dataset const& data,
                            MomentModel const& model,
                            std::size_t draws,
                            Stream const& stream);

}  // namespace simineq
