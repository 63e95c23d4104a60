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

#ifndef FQPSA_SCHED_HPP
#define FQPSA_SCHED_HPP

#include <span>
#include <vector>

#include "fqpsa/channel.hpp"
#include "fqpsa/dual_solver.hpp"
#include "fqpsa/traffic.hpp"

namespace fqpsa {

/// Exponentially averaged rates, one slot per session. Rates are in
/// nats/s and start at 1 so delay-urgency weights and the log-sum are
/// defined before the first grant.
struct RateLedger {
    std::vector<double> avg_rate;
    double smoothing = 0.999;

    explicit RateLedger(std::size_t n = 0, double alpha = 0.999)
        : avg_rate(n, 1.0), smoothing(alpha) {}
};

/// alpha*R + (1-alpha)*r. Requires 0 < alpha < 1 and nonnegative rates.
double update_average(double avg_rate, double rate, double alpha);

/// Sum of ln(R_i) over data sessions, with R_i converted to bits/s.
/// Returns -infinity when any data session still has a zero average.
double log_sum(const RateLedger& ledger, std::span<const Session> sessions);

struct UserGrant {
    std::size_t session_index = 0;
    UserId user_id = 0;
    double bandwidth = 0.0;
    double power = 0.0;
    double eff_sinr = 0.0;
    double cont_rate = 0.0;      // nats/s from the continuous allocation
    double realized_rate = 0.0;  // nats/s actually credited (quantized if enabled)
    double granted_bits = 0.0;
};

struct FrameAllocation {
    std::vector<UserGrant> grants;
    bool fallback = false;        // solver failed; equal split was used
    int degradation_events = 0;   // real-time rates reduced this frame
    double bandwidth_used = 0.0;
    double power_used = 0.0;
};

struct SchedConfig {
    int n_sub = 24;
    std::size_t rt_cap = 18;
    bool quantize = true;
    bool mlwdf_per_subchannel_update = true;
    SolverOptions solver;
};

/// Urgency metric for one session on one equal-power subchannel:
/// -ln(delta)/(D_max*R) * D_hol * ln(1 + p_sub/(n*w_sub)).
double mlwdf_metric(double hol_delay, double delay_bound, double exceed_prob,
                    double avg_rate, double noise_coeff, double sub_power,
                    double sub_bandwidth);

/// One frame of the dual-solver scheduler: select real-time demands,
/// solve the constrained allocation over them plus all backlogged data
/// sessions, quantize if enabled, drain queues and refresh the ledger.
/// A solver failure falls back to an equal split and flags the frame.
FrameAllocation fqpsa_frame(std::vector<Session>& sessions,
                            std::span<const double> noise_coeffs,
                            RateLedger& ledger, const ResourceBudget& budget,
                            double now, double frame_len, const McsTable& mcs,
                            const SchedConfig& cfg);

/// One frame of the benchmark scheduler: power split equally over
/// subchannels, each subchannel granted to the metric argmax (ties to
/// the lowest user id), the winner's tentative average refreshed before
/// the next subchannel is scored.
FrameAllocation mlwdf_frame(std::vector<Session>& sessions,
                            std::span<const double> noise_coeffs,
                            RateLedger& ledger, const ResourceBudget& budget,
                            double now, double frame_len, const McsTable& mcs,
                            const SchedConfig& cfg);

}  // namespace fqpsa

#endif  // FQPSA_SCHED_HPP
