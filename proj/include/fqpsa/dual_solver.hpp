/*
 *    Copyright 2026 The fqpsa Authors
 *
 *    Licensed under the Apache License, Version 2.0 (the "License");
 *    you may not use this file except in compliance with the License.
 *    You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0
 *
 *    Unless required by applicable law or agreed to in writing, software
 *    distributed under the License is distributed on an "AS IS" BASIS,
 *    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *    See the License for the specific language governing permissions and
 *    limitations under the License.
 */

#ifndef FQPSA_DUAL_SOLVER_HPP
#define FQPSA_DUAL_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fqpsa {

using UserId = std::uint32_t;

/// Total power (watts) and bandwidth (hertz) available to one frame.
struct ResourceBudget {
    double total_power = 0.0;
    double total_bandwidth = 0.0;
};

/// Solver-side view of one data session. noise_coeff is n = N0/(beta*h)
/// in W/Hz, avg_rate is the exponentially averaged rate R in nats/s and
/// smoothing is the averaging weight alpha in (0,1).
struct DataUserState {
    UserId user_id = 0;
    double noise_coeff = 0.0;
    double avg_rate = 0.0;
    double smoothing = 0.0;

    /// R * alpha/(1-alpha), the history handicap in the share formulas.
    double rate_weight() const { return avg_rate * smoothing / (1.0 - smoothing); }
};

/// A selected real-time session and the rate (nats/s) it must receive
/// this frame.
struct RealTimeDemand {
    UserId user_id = 0;
    double noise_coeff = 0.0;
    double rate_req = 0.0;
};

/// The two scalars that parameterize the whole allocation. lambda_a
/// fixes every user's effective SINR, lambda_p fixes how much of the
/// budget data users may claim. The bandwidth-price counterpart is not
/// stored; it is recoverable as lambda_p / lambda_a.
struct DualPair {
    double lambda_a = 0.0;
    double lambda_p = 0.0;
};

/// One user's slice of the frame. eff_sinr is x = p/(n*w); power and
/// bandwidth satisfy p = n*w*x whenever w > 0.
struct UserShare {
    UserId user_id = 0;
    double bandwidth = 0.0;
    double power = 0.0;
    double eff_sinr = 0.0;
};

/// Record of one real-time demand that had to be reduced (or dropped,
/// in which case reduced_rate is 0) to reach feasibility.
struct DegradedRate {
    UserId user_id = 0;
    double original_rate = 0.0;
    double reduced_rate = 0.0;
};

struct AllocationResult {
    std::vector<UserShare> shares;
    bool feasible_as_given = true;
    std::vector<DegradedRate> degraded_rates;
    DualPair dual;
    int iterations = 0;
};

/// Outcome of the feasibility test. lambda_a_floor is empty when there
/// are no real-time demands (no constraint to satisfy).
struct FeasibilityCheck {
    bool feasible = true;
    std::optional<double> lambda_a_floor;
    double power_at_floor = 0.0;
};

/// One degradation round: which demand was reduced and to what.
struct DegradeEvent {
    UserId user_id = 0;
    double old_rate = 0.0;
    double new_rate = 0.0;
    bool removed = false;
};

struct SolverOptions {
    double inner_tol_rel = 1e-8;    // bandwidth residual, relative to W
    double outer_tol_rel = 1e-7;    // power residual, relative to P
    int max_inner = 500;            // bisection steps per lambda_p search
    int max_outer = 200;            // outer bisection steps on lambda_a
    int max_bracket_growth = 200;   // doublings before giving up
    double lambda_a_min = 1e-12;    // outer search floor when no RT users
    double degrade_factor = 0.5;    // rate multiplier per infeasible round
    double degrade_removal_floor = 1e-3;  // drop below this fraction of original
};

/// Raised when a bracket cannot be grown or an iteration cap is hit.
/// Carries the best dual pair seen and its constraint residuals.
class SolverFailure : public std::runtime_error {
  public:
    SolverFailure(const std::string& what, DualPair best, double bandwidth_residual,
                  double power_residual, int iterations)
        : std::runtime_error(what),
          best_dual(best),
          bandwidth_residual(bandwidth_residual),
          power_residual(power_residual),
          iterations(iterations) {}

    DualPair best_dual;
    double bandwidth_residual = 0.0;
    double power_residual = 0.0;
    int iterations = 0;
};

/// (1+x)ln(1+x) - x. Strictly increasing and convex on [0, inf),
/// f_a(0) = 0. Throws std::domain_error for negative or non-finite x.
double f_a(double x);

/// Inverse of f_a on [0, inf), solved by safeguarded Newton iteration.
/// Throws std::domain_error for negative or non-finite y.
double f_a_inv(double y);

/// Bandwidth/power slice of a data user at the given dual pair.
/// Requires dual.lambda_a > 0.
UserShare data_user_share(const DualPair& dual, const DataUserState& u);

/// Bandwidth/power slice of a real-time user; the rate requirement is
/// met with equality by construction. Requires lambda_a > 0.
UserShare realtime_share(double lambda_a, const RealTimeDemand& d);

/// Total (bandwidth, power) claimed by all users at the given dual pair.
std::pair<double, double> resource_sums(const DualPair& dual,
                                        std::span<const DataUserState> data,
                                        std::span<const RealTimeDemand> rt);

/// Finds lambda_p such that the bandwidth sum equals total_bandwidth at
/// this lambda_a, by bisection after geometric bracket growth. The
/// returned value errs on the under-budget side of the tolerance.
/// Requires a nonempty data set and real-time bandwidth < total_bandwidth.
double lambda_p_for_bandwidth(double lambda_a,
                              std::span<const DataUserState> data,
                              std::span<const RealTimeDemand> rt,
                              double total_bandwidth,
                              const SolverOptions& opts = {});

/// The smallest lambda_a at which the real-time demands alone exactly
/// consume the bandwidth (with no data allocation). Empty when rt is
/// empty: any lambda_a works and the constraint set is vacuous.
std::optional<double> feasibility_lambda(std::span<const RealTimeDemand> rt,
                                         double total_bandwidth);

/// Feasible iff the power drawn at the feasibility floor is strictly
/// below the budget. Equality counts as infeasible: data users would
/// receive exactly nothing and the outer search would degenerate.
FeasibilityCheck check_feasible(std::span<const RealTimeDemand> rt,
                                const ResourceBudget& budget);

/// One degradation round: halves the rate of the demand drawing the most
/// power at the feasibility floor; demands that fall below the removal
/// floor (relative to original_rates if given, else to their rate before
/// this call) are erased. rt (and original_rates, if given) are updated
/// in place.
DegradeEvent degrade_infeasible(std::vector<RealTimeDemand>& rt,
                                double total_bandwidth,
                                const SolverOptions& opts = {},
                                std::vector<double>* original_rates = nullptr);

/// Full allocation: degrades real-time demands until feasible, then runs
/// the nested bisection (outer on lambda_a, inner on lambda_p) until the
/// bandwidth and power budgets are both met within tolerance. With no
/// data users the real-time set is served at the feasibility floor and
/// slack power is left unused. Throws SolverFailure on iteration caps.
AllocationResult solve(std::span<const DataUserState> data,
                       std::span<const RealTimeDemand> rt,
                       const ResourceBudget& budget,
                       const SolverOptions& opts = {});

}  // namespace fqpsa

#endif  // FQPSA_DUAL_SOLVER_HPP
