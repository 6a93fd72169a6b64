#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "simineq/moment_core.hpp"

namespace simineq {

enum class IndexKind
{
    sum_plus,           //!< sum_j [m_j / sigma_j]_+
    max_plus,           //!< max_j {m_j / sigma_j}_+
    soft_min_boundary,  //!< min_j m_j (unstudentized)
    qlr,                //!< min_{t <= 0} (m - t)' Sigma^-1 (m - t)
    sum_plus_sq         //!< sum_j ([m_j / sigma_j]_+)^2
};

std::string_view to_string(IndexKind kind);
IndexKind index_kind_from_string(std::string_view name);

//! Constants of a mu-smooth approximation: |S_mu - S| <= beta mu and a
//! gradient Lipschitz constant K + alpha / mu; chi is the homogeneity degree.
struct SmoothParams
{
    double alpha = 0;
    double beta = 0;
    double K = 0;
    int chi = 1;
};

struct IndexSpec
{
    IndexKind kind = IndexKind::max_plus;
    SmoothParams params;

    //! Standard constants for J moments.
    static IndexSpec make(IndexKind kind, std::size_t moments);

    //! Whether the approximation bound beta is known (finite).
    bool certified() const;
};

struct SmoothEval
{
    double value = 0;
    Vector gradient;  //!< derivative in m at fixed Sigma
    double mu = 0;
};

//! Exact index S(m, Sigma). Studentized kinds only read diag(Sigma).
double eval_S(IndexSpec const& spec, Vector const& m, Matrix const& sigma);

//! Smooth approximation S_mu(m, Sigma) and its gradient in m.
SmoothEval eval_S_mu(IndexSpec const& spec,
                     Vector const& m,
                     Matrix const& sigma,
                     double mu);

//! Variants of the above taking only the variances diag(Sigma); not
//! available for the Qlr kind.
double eval_S_diag(IndexSpec const& spec, Vector const& m, Vector const& vdiag);
SmoothEval eval_S_mu_diag(IndexSpec const& spec,
                          Vector const& m,
                          Vector const& vdiag,
                          double mu);

//! S_mu(m, Sigma) - S(m, Sigma).
double approximation_gap(IndexSpec const& spec,
                         Vector const& m,
                         Matrix const& sigma,
                         double mu);

//! Max over j of |finite difference - gradient_j|, relative to the largest
//! gradient entry, using central differences with step h.
double gradient_check(IndexSpec const& spec,
                      Vector const& m,
                      Matrix const& sigma,
                      double mu,
                      double h);

//! Numerically stable log(sum_j exp(z_j) + extra) for extra in {0, 1}.
double log_sum_exp(Vector const& z, double extra = 0);

}  // namespace simineq
