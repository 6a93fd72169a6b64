#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "simineq/inference.hpp"
#include "simineq/moment_core.hpp"

namespace simineq {

/*!
 * Two-firm entry game with payoff z_j beta + u_j (+ delta when the rival
 * enters), u bivariate standard normal with independent components.
 *
 * Records hold [y1, y2, z1, z2, cell] with cell = a * |z2 support| + b for the
 * support indices (a, b) of (z1, z2).
 */
struct EntryConfig
{
    double beta = 0.9;
    double delta = -0.5;
    double select_prob = 0.7;  //!< probability of (1,0) under multiplicity
    std::vector<double> z1_support{-0.1, -0.5, 0.0, 0.5, 1.0};
    std::vector<double> z1_prob{0.1, 0.1, 0.1, 0.1, 0.6};
    std::vector<double> z2_support{-0.5, 0.0, 0.5};
    std::vector<double> z2_prob{0.1, 0.8, 0.1};

    std::size_t cells() const { return z1_support.size() * z2_support.size(); }
    std::array<double, 2> cell_z(std::size_t cell) const;
    double cell_prob(std::size_t cell) const;

    //! Throws ParameterError when an invariant does not hold.
    void validate() const;
};

inline constexpr std::size_t entry_record_width = 5;

//! Extreme point of the identified set with the largest competitive effect.
inline constexpr std::array<double, 2> entry_theta_upper{0.8880, -0.4015};

enum class Outcome
{
    none,     //!< (0,0)
    both,     //!< (1,1)
    first,    //!< (1,0)
    second,   //!< (0,1)
    multiple  //!< (1,0) and (0,1) are both equilibria
};

//! Pure-strategy equilibrium region containing the shock u.
Outcome equilibrium_region(std::array<double, 2> const& z,
                           std::array<double, 2> const& theta,
                           std::array<double, 2> const& u);

Dataset gen_entry_data(EntryConfig const& cfg, std::size_t n,
                       Stream const& stream);

struct EntryProbabilities
{
    double h1 = 0;  //!< P((0,1) is an equilibrium)
    double h2 = 0;  //!< P((0,1) is the unique equilibrium)
};

//! Analytic when `frequency` is empty; otherwise the frequency simulator
//! with the given number of draws.
struct FrequencyMode
{
    std::size_t draws = 1;
    Stream stream{0};
};

EntryProbabilities entry_choice_probs(std::array<double, 2> const& z,
                                      std::array<double, 2> const& theta,
                                      std::optional<FrequencyMode> frequency
                                      = std::nullopt);

//! 2K moments: (1{Y=(0,1)} - H1) 1{Z=z_k} then (H2 - 1{Y=(0,1)}) 1{Z=z_k}.
MomentModel entry_moment_model(EntryConfig const& cfg);

//! Population P(Y=(0,1) | z) under the configured selection rule.
double entry_population_outcome_prob(std::array<double, 2> const& z,
                                     std::array<double, 2> const& theta_true,
                                     double select_prob);

//! Smallest slack of the population inequalities at theta (>= 0 inside).
double entry_identified_slack(EntryConfig const& cfg,
                              std::array<double, 2> const& theta);

LevelSet identified_set_grid(EntryConfig const& cfg,
                             std::vector<Vector> const& theta_grid);

//! Rectangular (beta, delta) grid with inclusive ends.
std::vector<Vector> make_theta_grid(double beta_lo, double beta_hi,
                                    double delta_lo, double delta_hi,
                                    double step);

//! CSV with columns beta,delta,member.
void write_identified_set_csv(LevelSet const& set, std::string const& path);

}  // namespace simineq
