#pragma once

// Comparison of the incomplete and final outbreak-size distributions: the
// divergence between them, the attack rate a final-size analysis would
// converge to when the outbreak is still running, and the generation at which
// the incomplete distribution has settled.

#include <vector>

#include "chainbinom/model_core.hpp"

namespace chainbinom {

struct BiasPoint {
  double true_sar = 0.0;
  double approx_sar = 0.0;
  int generations = 1;
  double relative_bias = 0.0;  ///< (approx_sar - true_sar) / true_sar
  double kl_at_min = 0.0;
  int s0 = 0;
  int i0 = 1;
};

/// KL(p_d(., true_sar) || q(., approx_sar)) where p_d is the incomplete PMF
/// after `generations` and q the final-size PMF. Returns +inf when q
/// vanishes on the support of p_d. config.sar is ignored.
double kl_divergence(double true_sar, double approx_sar, const HouseholdConfig& config,
                     int generations);

enum class Sweep { from_lower, from_upper };

/// Attack rate minimizing the divergence above: the limit of a final-size
/// estimate fitted to households observed for `generations` generations.
BiasPoint best_final_approx(double true_sar, const HouseholdConfig& config, int generations,
                            Sweep sweep = Sweep::from_lower);

/// best_final_approx for each entry of d_range, sorted by generations.
std::vector<BiasPoint> bias_curve(double true_sar, const HouseholdConfig& config,
                                  std::vector<int> d_range);

struct BiasGrid {
  std::vector<double> sars{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> s0s{2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> i0s{1, 2, 3};
};

/// bias_curve over d = 1..s0 for every grid combination, ordered by
/// (i0, s0, sar, generations).
std::vector<BiasPoint> bias_grid(const BiasGrid& grid);

/// Smallest d with max_x |incomplete(x, d) - final(x)| <= tol. Never exceeds
/// max(1, s0).
int stabilization_generation(const HouseholdConfig& config, double tol);

}  // namespace chainbinom
