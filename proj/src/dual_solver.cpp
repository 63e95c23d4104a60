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

#include "fqpsa/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fqpsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-user quantities that depend on lambda_a only. For a data user the
// bandwidth share is [lambda_p - offset]+ / denom and the power share is
// n*x times that, so sweeps over lambda_p reuse these coefficients.
struct UserCoeffs {
    double x = 0.0;       // effective SINR at this lambda_a
    double offset = 0.0;  // n*(1+x)*R*alpha_tilde
    double denom = 0.0;   // ln(1+x)*(1+x)*n
    double nx = 0.0;      // n*x
};

// Evaluates the resource sums at one lambda_a for any lambda_p.
struct Workspace {
    std::vector<UserCoeffs> data_coeff;
    double rt_bandwidth = 0.0;
    double rt_power = 0.0;

    void prepare(double lambda_a, std::span<const DataUserState> data,
                 std::span<const RealTimeDemand> rt) {
        data_coeff.clear();
        data_coeff.reserve(data.size());
        for (const auto& u : data) {
            const double x = f_a_inv(lambda_a / u.noise_coeff);
            UserCoeffs c;
            c.x = x;
            c.offset = u.noise_coeff * (1.0 + x) * u.rate_weight();
            c.denom = std::log1p(x) * (1.0 + x) * u.noise_coeff;
            c.nx = u.noise_coeff * x;
            data_coeff.push_back(c);
        }
        rt_bandwidth = 0.0;
        rt_power = 0.0;
        for (const auto& d : rt) {
            const double x = f_a_inv(lambda_a / d.noise_coeff);
            const double w = d.rate_req / std::log1p(x);
            rt_bandwidth += w;
            rt_power += d.noise_coeff * x * w;
        }
    }

    double data_bandwidth(double lambda_p) const {
        double s = 0.0;
        for (const auto& c : data_coeff) {
            const double num = lambda_p - c.offset;
            if (num > 0.0) s += num / c.denom;
        }
        return s;
    }

    double data_power(double lambda_p) const {
        double s = 0.0;
        for (const auto& c : data_coeff) {
            const double num = lambda_p - c.offset;
            if (num > 0.0) s += num / c.denom * c.nx;
        }
        return s;
    }

    double max_offset() const {
        double m = 0.0;
        for (const auto& c : data_coeff) m = std::max(m, c.offset);
        return m;
    }
};

void require_finite_nonneg(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0)
        throw std::domain_error(std::string(what) + " must be finite and nonnegative");
}

// Bandwidth-matching lambda_p on a prepared workspace. Returns the
// under-budget bracket end once its residual is within tolerance.
double lambda_p_for_bandwidth_ws(const Workspace& ws, double total_bandwidth,
                                 const SolverOptions& opts) {
    const double data_target = total_bandwidth - ws.rt_bandwidth;
    if (data_target <= 0.0)
        throw std::domain_error("no bandwidth remains for data at this lambda_a");
    if (ws.data_coeff.empty())
        throw std::invalid_argument("lambda_p search requires at least one data user");

    const double tol = opts.inner_tol_rel * total_bandwidth;

    double lo = 0.0;  // data bandwidth 0 here, always under target
    double hi = ws.max_offset() + 1.0;
    int growth = 0;
    while (ws.data_bandwidth(hi) < data_target) {
        hi *= 2.0;
        if (++growth > opts.max_bracket_growth)
            throw SolverFailure("lambda_p bracket growth exceeded",
                                DualPair{0.0, hi}, data_target - ws.data_bandwidth(hi),
                                0.0, growth);
    }

    double under = data_target;  // target minus bandwidth at lo, >= 0
    for (int iter = 0; iter < opts.max_inner; ++iter) {
        if (under <= tol) return lo;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket exhausted at double precision
        const double got = ws.data_bandwidth(mid);
        if (got > data_target) {
            hi = mid;
        } else {
            lo = mid;
            under = data_target - got;
        }
    }
    if (under <= tol) return lo;
    throw SolverFailure("lambda_p bisection did not meet the bandwidth tolerance",
                        DualPair{0.0, lo}, under, 0.0, opts.max_inner);
}

double feasibility_lambda_1(std::span<const RealTimeDemand> rt, double total_bandwidth) {
    // Bandwidth claimed by the real-time set alone, as a function of
    // lambda_a: strictly decreasing, diverges at 0, vanishes at infinity.
    auto excess = [&](double la) {
        double s = 0.0;
        for (const auto& d : rt) s += d.rate_req / std::log1p(f_a_inv(la / d.noise_coeff));
        return s - total_bandwidth;
    };

    double lo = 1.0, hi = 1.0;
    int guard = 0;
    while (excess(lo) <= 0.0) {
        lo *= 0.5;
        if (++guard > 2000) throw std::domain_error("feasibility search underflow");
    }
    guard = 0;
    while (excess(hi) > 0.0) {
        hi *= 2.0;
        if (++guard > 2000) throw std::domain_error("feasibility search overflow");
    }
    // Resolve to near machine precision; the feasibility decision
    // downstream compares powers at this point against the budget.
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double f_a(double x) {
    if (!std::isfinite(x) || x < 0.0)
        throw std::domain_error("f_a requires finite x >= 0");
    if (x < 0.01) {
        // (1+x)ln(1+x)-x cancels to O(x^2); sum the series instead.
        // Terms are (-1)^k x^k / (k(k-1)), k >= 2.
        const double c = 1.0 / 2 - x * (1.0 / 6 - x * (1.0 / 12 - x * (1.0 / 20 -
                         x * (1.0 / 30 - x * (1.0 / 42 - x / 56.0)))));
        return x * x * c;
    }
    return (1.0 + x) * std::log1p(x) - x;
}

double f_a_inv(double y) {
    if (!std::isfinite(y) || y < 0.0)
        throw std::domain_error("f_a_inv requires finite y >= 0");
    if (y == 0.0) return 0.0;

    // Bracket the root, then Newton with bisection fallback. f_a is
    // convex with derivative ln(1+x).
    double lo = 0.0;
    double hi = std::max(y, std::sqrt(2.0 * y));
    int guard = 0;
    while (f_a(hi) < y) {
        hi *= 2.0;
        if (++guard > 1100) throw std::domain_error("f_a_inv bracket overflow");
    }

    const double tol = std::max(1e-14 * y, 1e-300);
    double x = hi;
    for (int it = 0; it < 200; ++it) {
        const double fx = f_a(x) - y;
        if (std::abs(fx) <= tol) return x;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        const double step = fx / std::log1p(x);
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

UserShare data_user_share(const DualPair& dual, const DataUserState& u) {
    if (!(dual.lambda_a > 0.0))
        throw std::domain_error("data_user_share requires lambda_a > 0");
    require_finite_nonneg(dual.lambda_p, "lambda_p");
    const double x = f_a_inv(dual.lambda_a / u.noise_coeff);
    const double offset = u.noise_coeff * (1.0 + x) * u.rate_weight();
    UserShare s;
    s.user_id = u.user_id;
    s.eff_sinr = x;
    const double num = dual.lambda_p - offset;
    if (num > 0.0) {
        s.bandwidth = num / (std::log1p(x) * (1.0 + x) * u.noise_coeff);
        s.power = s.bandwidth * u.noise_coeff * x;
    }
    return s;
}

UserShare realtime_share(double lambda_a, const RealTimeDemand& d) {
    if (!(lambda_a > 0.0))
        throw std::domain_error(
            "real-time user cannot meet positive rate with zero SINR");
    const double x = f_a_inv(lambda_a / d.noise_coeff);
    UserShare s;
    s.user_id = d.user_id;
    s.eff_sinr = x;
    s.bandwidth = d.rate_req / std::log1p(x);
    s.power = d.noise_coeff * s.bandwidth * x;
    return s;
}

std::pair<double, double> resource_sums(const DualPair& dual,
                                        std::span<const DataUserState> data,
                                        std::span<const RealTimeDemand> rt) {
    if (!rt.empty() && !(dual.lambda_a > 0.0))
        throw std::domain_error("resource_sums requires lambda_a > 0 with RT users");
    double sw = 0.0, sp = 0.0;
    for (const auto& u : data) {
        const UserShare s = data_user_share(dual, u);
        sw += s.bandwidth;
        sp += s.power;
    }
    for (const auto& d : rt) {
        const UserShare s = realtime_share(dual.lambda_a, d);
        sw += s.bandwidth;
        sp += s.power;
    }
    if (!std::isfinite(sw) || !std::isfinite(sp))
        throw std::domain_error("resource sums are not finite");
    return {sw, sp};
}

double lambda_p_for_bandwidth(double lambda_a,
                              std::span<const DataUserState> data,
                              std::span<const RealTimeDemand> rt,
                              double total_bandwidth,
                              const SolverOptions& opts) {
    if (!(lambda_a > 0.0))
        throw std::domain_error("lambda_p_for_bandwidth requires lambda_a > 0");
    Workspace ws;
    ws.prepare(lambda_a, data, rt);
    if (ws.rt_bandwidth >= total_bandwidth)
        throw std::domain_error("no bandwidth remains for data at this lambda_a");
    return lambda_p_for_bandwidth_ws(ws, total_bandwidth, opts);
}

std::optional<double> feasibility_lambda(std::span<const RealTimeDemand> rt,
                                         double total_bandwidth) {
    if (rt.empty()) return std::nullopt;
    require_finite_nonneg(total_bandwidth, "total_bandwidth");
    for (const auto& d : rt) {
        require_finite_nonneg(d.noise_coeff, "noise_coeff");
        require_finite_nonneg(d.rate_req, "rate_req");
    }
    return feasibility_lambda_1(rt, total_bandwidth);
}

FeasibilityCheck check_feasible(std::span<const RealTimeDemand> rt,
                                const ResourceBudget& budget) {
    FeasibilityCheck fc;
    if (rt.empty()) return fc;
    fc.lambda_a_floor = feasibility_lambda_1(rt, budget.total_bandwidth);
    double power = 0.0;
    for (const auto& d : rt) {
        const double x = f_a_inv(*fc.lambda_a_floor / d.noise_coeff);
        power += d.noise_coeff * x * d.rate_req / std::log1p(x);
    }
    fc.power_at_floor = power;
    fc.feasible = power < budget.total_power;
    return fc;
}

DegradeEvent degrade_infeasible(std::vector<RealTimeDemand>& rt,
                                double total_bandwidth,
                                const SolverOptions& opts,
                                std::vector<double>* original_rates) {
    if (rt.empty()) throw std::invalid_argument("degrade_infeasible on empty set");
    if (original_rates && original_rates->size() != rt.size())
        throw std::invalid_argument("original_rates size mismatch");

    const double la0 = feasibility_lambda_1(rt, total_bandwidth);
    std::size_t worst = 0;
    double worst_power = -kInf;
    for (std::size_t i = 0; i < rt.size(); ++i) {
        const double x = f_a_inv(la0 / rt[i].noise_coeff);
        const double p = rt[i].noise_coeff * x * rt[i].rate_req / std::log1p(x);
        if (p > worst_power) {
            worst_power = p;
            worst = i;
        }
    }

    DegradeEvent ev;
    ev.user_id = rt[worst].user_id;
    ev.old_rate = rt[worst].rate_req;
    ev.new_rate = rt[worst].rate_req * opts.degrade_factor;
    const double original =
        original_rates ? (*original_rates)[worst] : rt[worst].rate_req;
    if (ev.new_rate < opts.degrade_removal_floor * original) {
        ev.removed = true;
        ev.new_rate = 0.0;
        rt.erase(rt.begin() + static_cast<std::ptrdiff_t>(worst));
        if (original_rates)
            original_rates->erase(original_rates->begin() +
                                  static_cast<std::ptrdiff_t>(worst));
    } else {
        rt[worst].rate_req = ev.new_rate;
    }
    return ev;
}

AllocationResult solve(std::span<const DataUserState> data,
                       std::span<const RealTimeDemand> rt,
                       const ResourceBudget& budget,
                       const SolverOptions& opts) {
    if (data.empty() && rt.empty())
        throw std::invalid_argument("solve requires at least one user");
    if (!(budget.total_power > 0.0) || !(budget.total_bandwidth > 0.0))
        throw std::invalid_argument("budgets must be positive");

    const double P = budget.total_power;
    const double W = budget.total_bandwidth;

    AllocationResult result;

    // Degrade until the real-time set fits inside the budgets.
    std::vector<RealTimeDemand> rt_work(rt.begin(), rt.end());
    std::vector<double> originals;
    originals.reserve(rt_work.size());
    for (const auto& d : rt_work) originals.push_back(d.rate_req);

    FeasibilityCheck fc = check_feasible(rt_work, budget);
    int rounds = 0;
    const int round_cap = 11 * static_cast<int>(rt.size()) + 1;
    while (!fc.feasible) {
        result.feasible_as_given = false;
        if (++rounds > round_cap)
            throw SolverFailure("degradation did not reach feasibility",
                                DualPair{fc.lambda_a_floor.value_or(0.0), 0.0},
                                0.0, fc.power_at_floor - P, rounds);
        const DegradeEvent ev =
            degrade_infeasible(rt_work, W, opts, &originals);
        auto it = std::find_if(result.degraded_rates.begin(), result.degraded_rates.end(),
                               [&](const DegradedRate& r) { return r.user_id == ev.user_id; });
        if (it == result.degraded_rates.end()) {
            result.degraded_rates.push_back({ev.user_id, ev.old_rate, ev.new_rate});
        } else {
            it->reduced_rate = ev.new_rate;
        }
        fc = check_feasible(rt_work, budget);
    }

    if (data.empty()) {
        // Real-time only: serve at the floor, leave slack power unused.
        if (!rt_work.empty()) {
            const double la0 = *fc.lambda_a_floor;
            for (const auto& d : rt_work) result.shares.push_back(realtime_share(la0, d));
            result.dual = {la0, 0.0};
        }
        return result;
    }

    Workspace ws;
    // Power excess at one lambda_a with lambda_p matched to the
    // bandwidth budget. Returns the lambda_p used through `lp_out`.
    auto power_excess = [&](double la, double& lp_out) {
        ws.prepare(la, data, rt_work);
        if (ws.rt_bandwidth >= W) {
            // Numerically at (or below) the floor: data gets nothing.
            lp_out = 0.0;
            return ws.rt_power - P;
        }
        lp_out = lambda_p_for_bandwidth_ws(ws, W, opts);
        return ws.rt_power + ws.data_power(lp_out) - P;
    };

    double lo, g_lo, lp_lo;
    int iterations = 0;
    if (fc.lambda_a_floor) {
        lo = *fc.lambda_a_floor;
        lp_lo = 0.0;
        g_lo = fc.power_at_floor - P;  // < 0 by feasibility
    } else {
        lo = opts.lambda_a_min;
        g_lo = power_excess(lo, lp_lo);
        int shrink = 0;
        while (g_lo >= 0.0) {
            lo *= 0.5;
            if (++shrink > opts.max_bracket_growth)
                throw SolverFailure("lambda_a lower bracket not found",
                                    DualPair{lo, lp_lo}, 0.0, g_lo, shrink);
            g_lo = power_excess(lo, lp_lo);
        }
        ++iterations;
    }

    double hi = 2.0 * lo;
    double lp_hi;
    int growth = 0;
    while (power_excess(hi, lp_hi) <= 0.0) {
        ++iterations;
        hi *= 2.0;
        if (++growth > opts.max_bracket_growth)
            throw SolverFailure("lambda_a upper bracket not found",
                                DualPair{hi, lp_hi}, 0.0, g_lo, iterations);
    }
    ++iterations;

    const double tol = opts.outer_tol_rel * P;
    while (std::abs(g_lo) > tol) {
        if (++iterations > opts.max_outer)
            throw SolverFailure("lambda_a bisection did not meet the power tolerance",
                                DualPair{lo, lp_lo}, 0.0, g_lo, iterations);
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            throw SolverFailure("lambda_a bracket exhausted at double precision",
                                DualPair{lo, lp_lo}, 0.0, g_lo, iterations);
        double lp_mid;
        const double g_mid = power_excess(mid, lp_mid);
        if (g_mid > 0.0) {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
            lp_lo = lp_mid;
        }
    }

    result.dual = {lo, lp_lo};
    result.iterations = iterations;
    result.shares.reserve(data.size() + rt_work.size());
    for (const auto& u : data) result.shares.push_back(data_user_share(result.dual, u));
    for (const auto& d : rt_work)
        result.shares.push_back(realtime_share(result.dual.lambda_a, d));
    return result;
}

}  // namespace fqpsa
