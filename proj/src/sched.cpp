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

#include "fqpsa/sched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace fqpsa {

namespace {

constexpr double kLn2 = 0.6931471805599453;

}  // namespace

double update_average(double avg_rate, double rate, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::domain_error("smoothing must lie in (0,1)");
    if (avg_rate < 0.0 || rate < 0.0)
        throw std::domain_error("rates must be nonnegative");
    return alpha * avg_rate + (1.0 - alpha) * rate;
}

double log_sum(const RateLedger& ledger, std::span<const Session> sessions) {
    double sum = 0.0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        if (sessions[i].klass != TrafficClass::Data) continue;
        const double bits = ledger.avg_rate[i] / kLn2;
        if (!(bits > 0.0)) return -std::numeric_limits<double>::infinity();
        sum += std::log(bits);
    }
    return sum;
}

double mlwdf_metric(double hol_delay, double delay_bound, double exceed_prob,
                    double avg_rate, double noise_coeff, double sub_power,
                    double sub_bandwidth) {
    const double a = -std::log(exceed_prob) /
                     (delay_bound * std::max(avg_rate, 1e-12));
    return a * hol_delay * std::log1p(sub_power / (noise_coeff * sub_bandwidth));
}

FrameAllocation fqpsa_frame(std::vector<Session>& sessions,
                            std::span<const double> noise_coeffs,
                            RateLedger& ledger, const ResourceBudget& budget,
                            double now, double frame_len, const McsTable& mcs,
                            const SchedConfig& cfg) {
    FrameAllocation alloc;

    const RealTimeSelection sel = select_realtime(
        sessions, noise_coeffs, ledger.avg_rate, now, frame_len, {cfg.rt_cap});

    std::vector<DataUserState> data;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        if (sessions[i].klass == TrafficClass::Data && sessions[i].backlogged())
            data.push_back({sessions[i].user_id, noise_coeffs[i],
                            ledger.avg_rate[i], ledger.smoothing});
    }

    std::unordered_map<UserId, std::size_t> index_of;
    index_of.reserve(sessions.size());
    for (std::size_t i = 0; i < sessions.size(); ++i)
        index_of.emplace(sessions[i].user_id, i);

    std::vector<UserShare> shares;
    if (!data.empty() || !sel.demands.empty()) {
        try {
            AllocationResult res = solve(data, sel.demands, budget, cfg.solver);
            shares = std::move(res.shares);
            alloc.degradation_events = static_cast<int>(res.degraded_rates.size());
        } catch (const SolverFailure&) {
            // Keep the run alive: split the budgets evenly over the
            // sessions that asked for service this frame.
            alloc.fallback = true;
            const std::size_t n = data.size() + sel.demands.size();
            const double w = budget.total_bandwidth / static_cast<double>(n);
            const double p = budget.total_power / static_cast<double>(n);
            auto equal_share = [&](UserId id, double noise) {
                return UserShare{id, w, p, p / (noise * w)};
            };
            for (const auto& u : data) shares.push_back(equal_share(u.user_id, u.noise_coeff));
            for (const auto& d : sel.demands)
                shares.push_back(equal_share(d.user_id, d.noise_coeff));
        }
    }

    std::vector<double> frame_rate(sessions.size(), 0.0);
    for (const UserShare& share : shares) {
        const std::size_t i = index_of.at(share.user_id);
        UserGrant g;
        g.session_index = i;
        g.user_id = share.user_id;
        g.bandwidth = share.bandwidth;
        g.power = share.power;
        g.eff_sinr = share.eff_sinr;
        g.cont_rate = shannon_rate(share.bandwidth, share.power, noise_coeffs[i]);
        g.realized_rate = cfg.quantize ? quantize_rate(share, mcs) : g.cont_rate;
        g.granted_bits = g.realized_rate * frame_len / kLn2;
        drain(sessions[i], g.granted_bits, now + frame_len);
        frame_rate[i] = g.cont_rate;
        alloc.bandwidth_used += g.bandwidth;
        alloc.power_used += g.power;
        alloc.grants.push_back(g);
    }

    for (std::size_t i = 0; i < sessions.size(); ++i)
        ledger.avg_rate[i] =
            update_average(ledger.avg_rate[i], frame_rate[i], ledger.smoothing);
    return alloc;
}

FrameAllocation mlwdf_frame(std::vector<Session>& sessions,
                            std::span<const double> noise_coeffs,
                            RateLedger& ledger, const ResourceBudget& budget,
                            double now, double frame_len, const McsTable& mcs,
                            const SchedConfig& cfg) {
    FrameAllocation alloc;
    const double sub_w = budget.total_bandwidth / cfg.n_sub;
    const double sub_p = budget.total_power / cfg.n_sub;

    std::vector<double> tentative_rate(sessions.size(), 0.0);
    std::vector<double> scoring_rate(ledger.avg_rate.begin(), ledger.avg_rate.end());
    std::vector<int> subchannels_won(sessions.size(), 0);

    for (int k = 0; k < cfg.n_sub; ++k) {
        double best_metric = -1.0;
        std::size_t best = sessions.size();
        for (std::size_t i = 0; i < sessions.size(); ++i) {
            if (!sessions[i].backlogged()) continue;
            const double m =
                mlwdf_metric(hol_delay(sessions[i], now), sessions[i].delay_bound,
                             sessions[i].exceed_prob, scoring_rate[i],
                             noise_coeffs[i], sub_p, sub_w);
            if (best == sessions.size() || m > best_metric ||
                (m == best_metric && sessions[i].user_id < sessions[best].user_id)) {
                best_metric = m;
                best = i;
            }
        }
        if (best == sessions.size()) continue;  // nothing to send

        const double x = sub_p / (noise_coeffs[best] * sub_w);
        const UserShare share{sessions[best].user_id, sub_w, sub_p, x};
        const double rate = cfg.quantize ? quantize_rate(share, mcs)
                                         : shannon_rate(sub_w, sub_p, noise_coeffs[best]);
        tentative_rate[best] += rate;
        ++subchannels_won[best];
        if (cfg.mlwdf_per_subchannel_update)
            scoring_rate[best] = update_average(ledger.avg_rate[best],
                                                tentative_rate[best], ledger.smoothing);
    }

    for (std::size_t i = 0; i < sessions.size(); ++i) {
        if (subchannels_won[i] > 0) {
            UserGrant g;
            g.session_index = i;
            g.user_id = sessions[i].user_id;
            g.bandwidth = sub_w * subchannels_won[i];
            g.power = sub_p * subchannels_won[i];
            g.eff_sinr = sub_p / (noise_coeffs[i] * sub_w);
            g.realized_rate = tentative_rate[i];
            g.cont_rate = shannon_rate(g.bandwidth, g.power, noise_coeffs[i]);
            g.granted_bits = g.realized_rate * frame_len / kLn2;
            drain(sessions[i], g.granted_bits, now + frame_len);
            alloc.bandwidth_used += g.bandwidth;
            alloc.power_used += g.power;
            alloc.grants.push_back(g);
        }
        ledger.avg_rate[i] = update_average(ledger.avg_rate[i], tentative_rate[i],
                                            ledger.smoothing);
    }
    return alloc;
}

}  // namespace fqpsa
