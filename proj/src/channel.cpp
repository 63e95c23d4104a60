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

#include "fqpsa/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fqpsa {

double path_loss_db(double distance) {
    if (!std::isfinite(distance) || distance < 1.0)
        throw std::domain_error("path_loss_db requires distance >= 1 m");
    return -31.5 - 35.0 * std::log10(distance);
}

ChannelState make_channel_state(UserId user_id, double distance) {
    ChannelState s;
    s.user_id = user_id;
    s.distance = distance;
    s.pathloss_db = path_loss_db(distance);
    return s;
}

void update_channel(ChannelState& state, double now, const PropagationParams& params,
                    std::mt19937_64& rng) {
    if (now - state.last_slow_update >= params.slow_coherence) {
        std::normal_distribution<double> shadow(params.shadow_mean_db,
                                                params.shadow_sigma_db);
        state.shadow_db = shadow(rng);
        state.last_slow_update = now;
    }
    if (now - state.last_fast_update >= params.fast_coherence) {
        std::exponential_distribution<double> fast(1.0);
        state.fastfade_power = fast(rng);
        state.last_fast_update = now;
    }
    state.gain = std::pow(10.0, (state.pathloss_db + state.shadow_db) / 10.0) *
                 state.fastfade_power;
}

double link_coefficient(double gain, const PropagationParams& params) {
    if (!(gain > 0.0) || !std::isfinite(gain))
        throw std::domain_error("link_coefficient requires gain > 0");
    return params.noise_psd / (params.snr_gap * gain);
}

double shannon_rate(double bandwidth, double power, double noise_coeff) {
    if (bandwidth <= 0.0) return 0.0;
    return bandwidth * std::log1p(power / (noise_coeff * bandwidth));
}

McsTable::McsTable(std::vector<Tier> tiers) : tiers_(std::move(tiers)) {
    double prev_thr = 0.0, prev_eff = 0.0;
    for (const auto& t : tiers_) {
        if (!(t.min_eff_sinr > prev_thr))
            throw std::invalid_argument("MCS thresholds must be strictly increasing");
        if (!(t.spectral_eff > prev_eff))
            throw std::invalid_argument("MCS efficiencies must be strictly increasing");
        if (t.spectral_eff > std::log1p(t.min_eff_sinr))
            throw std::invalid_argument(
                "MCS efficiency exceeds capacity at its own threshold");
        prev_thr = t.min_eff_sinr;
        prev_eff = t.spectral_eff;
    }
}

McsTable McsTable::standard() {
    constexpr double ln2 = 0.6931471805599453;
    const double thr_db[] = {2.9, 6.3, 8.6, 12.7, 16.3, 18.7};
    const double bits[] = {1.0, 1.5, 2.0, 3.0, 4.0, 4.5};
    std::vector<Tier> tiers;
    for (int i = 0; i < 6; ++i)
        tiers.push_back({std::pow(10.0, thr_db[i] / 10.0), bits[i] * ln2});
    return McsTable(std::move(tiers));
}

McsTable McsTable::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MCS table file: " + path);
    std::vector<Tier> tiers;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        double sinr_db, eff;
        if (!(row >> sinr_db)) continue;  // blank or comment-only line
        if (!(row >> eff))
            throw std::runtime_error("MCS table line " + std::to_string(lineno) +
                                     ": expected \"sinr_db efficiency\"");
        tiers.push_back({std::pow(10.0, sinr_db / 10.0), eff});
    }
    if (tiers.empty())
        throw std::runtime_error("MCS table file has no rows: " + path);
    return McsTable(std::move(tiers));
}

double McsTable::max_spectral_eff() const {
    return tiers_.empty() ? 0.0 : tiers_.back().spectral_eff;
}

double quantize_rate(const UserShare& share, const McsTable& mcs) {
    double eff = 0.0;
    for (const auto& t : mcs.tiers()) {
        if (share.eff_sinr >= t.min_eff_sinr)
            eff = t.spectral_eff;
        else
            break;
    }
    return share.bandwidth * eff;
}

}  // namespace fqpsa
