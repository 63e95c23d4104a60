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

#ifndef FQPSA_SIMKIT_HPP
#define FQPSA_SIMKIT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fqpsa/channel.hpp"
#include "fqpsa/sched.hpp"

namespace fqpsa {

enum class SchedulerKind { Fqpsa, Mlwdf };
enum class SweepAxis { Voice, Video, Data };

struct ScenarioConfig {
    int voice_users = 20;
    int video_users = 20;
    int data_users = 20;
    std::vector<double> distances = {300, 600, 900, 1200, 1500};  // meters

    ResourceBudget budget{20.0, 8.3e6};
    double frame_len = 1e-3;  // seconds
    long frames = 60000;
    std::uint64_t seed = 1;
    SchedulerKind scheduler = SchedulerKind::Fqpsa;

    PropagationParams propagation;
    bool quantize = true;
    std::string mcs_file;  // empty: built-in table

    double alpha = 0.999;
    int rt_cap = 18;
    int n_sub = 24;
    bool mlwdf_per_subchannel_update = true;

    double warmup = 2.0;  // seconds of metrics discarded (0 if run is shorter)

    // Traffic shape.
    double voice_packet_bits = 640;
    double voice_interval = 0.02;
    double video_packet_bits = 1280;
    double video_interval = 0.01;
    double file_bits = 4e7;  // 5 MB
    double voice_delay_bound = 0.1;
    double video_delay_bound = 0.4;
    double data_delay_bound = 1.0;
    double exceed_prob = 0.05;
    double duty_cycle = 1.0;

    /// Throws std::invalid_argument with a description on bad settings.
    void validate() const;
};

/// Run-level metrics. Delay percentiles are the 95th percentile of
/// packet delay, pooled over the sessions of one class at the nearest
/// and farthest configured distances; NaN when the bucket is empty.
struct MetricsReport {
    double data_throughput_bps = 0.0;
    double logsum = 0.0;  // sum of ln(R_i in bits/s) over data sessions
    double voice_p95_near_s = 0.0;
    double voice_p95_far_s = 0.0;
    double video_p95_near_s = 0.0;
    double video_p95_far_s = 0.0;
    long solver_fallbacks = 0;
    long degradation_events = 0;
    std::uint64_t channel_checksum = 0;
};

/// Runs one scenario. Deterministic: the report is a pure function of
/// the config, including the seed. Per-user random streams are derived
/// from (seed, user id), so adding users of one class does not disturb
/// the channels of the others.
MetricsReport run_scenario(const ScenarioConfig& cfg);

struct SweepResult {
    SweepAxis axis = SweepAxis::Voice;
    std::vector<int> values;
    std::vector<MetricsReport> fqpsa;  // one per value
    std::vector<MetricsReport> mlwdf;  // one per value, matched seeds
};

/// Runs both schedulers for each axis value with the base seed, so the
/// two policies consume identical channel and traffic realizations.
SweepResult sweep(const ScenarioConfig& base, SweepAxis axis,
                  std::span<const int> values);

/// CSV with one row per metric. Columns follow the scheduler order given.
std::string run_csv(std::span<const SchedulerKind> schedulers,
                    std::span<const MetricsReport> reports);

/// CSV with scheduler-prefixed metric rows and one column per axis value.
std::string sweep_csv(const SweepResult& result);

/// Human-readable aligned rendering of the same table.
std::string sweep_table(const SweepResult& result);

const char* axis_name(SweepAxis axis);
const char* scheduler_name(SchedulerKind kind);

/// Shortest round-trip decimal formatting, locale independent.
std::string format_double(double v);

}  // namespace fqpsa

#endif  // FQPSA_SIMKIT_HPP
