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

#ifndef FQPSA_CHANNEL_HPP
#define FQPSA_CHANNEL_HPP

#include <random>
#include <string>
#include <vector>

#include "fqpsa/dual_solver.hpp"

namespace fqpsa {

struct PropagationParams {
    double noise_psd = 3.9810717055349695e-21;  // W/Hz (-174 dBm/Hz)
    double snr_gap = 0.25;                      // beta
    double shadow_mean_db = 0.0;
    double shadow_sigma_db = 8.0;
    double fast_coherence = 5e-3;   // seconds
    double slow_coherence = 0.3;    // seconds
};

/// Block-fading channel of one user. gain is the linear composition
/// 10^((pathloss_db + shadow_db)/10) * fastfade_power, rebuilt whenever
/// a component is redrawn.
struct ChannelState {
    UserId user_id = 0;
    double distance = 0.0;     // meters
    double pathloss_db = 0.0;
    double shadow_db = 0.0;
    double fastfade_power = 1.0;
    double gain = 0.0;
    double last_slow_update = -1e300;
    double last_fast_update = -1e300;
};

/// Distance-based loss in dB: -31.5 - 35*log10(d). Requires d >= 1 m.
double path_loss_db(double distance);

/// Initial state at a given distance; fading components are drawn on the
/// first update_channel call.
ChannelState make_channel_state(UserId user_id, double distance);

/// Redraws shadowing and fast fading when their coherence intervals have
/// elapsed, otherwise holds them; recomposes the linear gain. Shadowing
/// is N(mean, sigma) in dB, fast fading a unit-mean exponential power.
void update_channel(ChannelState& state, double now, const PropagationParams& params,
                    std::mt19937_64& rng);

/// n = N0 / (beta * gain), the power density per unit effective SINR.
double link_coefficient(double gain, const PropagationParams& params);

/// w * ln(1 + p/(n*w)) in nats/s; 0 when w = 0.
double shannon_rate(double bandwidth, double power, double noise_coeff);

/// Discrete rate table: ordered (linear effective-SINR threshold,
/// spectral efficiency in nats/s/Hz) pairs. Below the first threshold
/// the rate is zero.
class McsTable {
  public:
    struct Tier {
        double min_eff_sinr;   // linear
        double spectral_eff;   // nats/s/Hz
    };

    McsTable() = default;
    explicit McsTable(std::vector<Tier> tiers);

    /// Built-in table: QPSK 1/2 through 64-QAM 3/4 at the usual switch
    /// points, efficiencies 1..4.5 bit/s/Hz converted to nats.
    static McsTable standard();

    /// Loads "sinr_db efficiency" rows; '#' starts a comment.
    static McsTable from_file(const std::string& path);

    const std::vector<Tier>& tiers() const { return tiers_; }
    double max_spectral_eff() const;

  private:
    std::vector<Tier> tiers_;
};

/// Rate of the largest tier whose threshold is at or below the share's
/// effective SINR (bandwidth * spectral_eff); zero below the lowest tier.
double quantize_rate(const UserShare& share, const McsTable& mcs);

}  // namespace fqpsa

#endif  // FQPSA_CHANNEL_HPP
