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

#ifndef FQPSA_TRAFFIC_HPP
#define FQPSA_TRAFFIC_HPP

#include <deque>
#include <span>
#include <vector>

#include "fqpsa/dual_solver.hpp"

namespace fqpsa {

enum class TrafficClass { Voice, Video, Data };

struct Packet {
    double bits = 0.0;
    double arrival = 0.0;  // seconds
};

struct DelaySample {
    double delay = 0.0;         // seconds
    double completed_at = 0.0;  // seconds
};

/// One traffic session and its queue. Voice/video queues hold fixed-size
/// packets on a CBR cadence; a data session holds one file at a time
/// that drains fluidly and reloads on completion.
struct Session {
    UserId user_id = 0;
    TrafficClass klass = TrafficClass::Data;

    std::deque<Packet> queue;
    double head_served_bits = 0.0;  // partial progress into a data file

    double delivered_bits = 0.0;
    double generated_bits = 0.0;
    std::vector<DelaySample> delay_samples;

    double delay_bound = 1.0;   // D_max, seconds
    double exceed_prob = 0.05;  // delta

    // Arrival process.
    double packet_bits = 0.0;
    double packet_interval = 0.0;  // seconds; 0 for data sessions
    double next_arrival = 0.0;
    double file_bits = 0.0;        // data sessions only
    double duty_cycle = 1.0;       // fraction of each on/off period spent on
    double duty_period = 3.0;      // seconds

    bool backlogged() const { return !queue.empty(); }
};

Session make_voice_session(UserId id, double packet_bits, double interval,
                           double delay_bound, double exceed_prob, double phase = 0.0);
Session make_video_session(UserId id, double packet_bits, double interval,
                           double delay_bound, double exceed_prob, double phase = 0.0);
/// The file is enqueued immediately at session start.
Session make_data_session(UserId id, double file_bits, double delay_bound,
                          double exceed_prob);

/// Appends every packet whose arrival instant falls in [now, now+frame_len).
/// Data sessions generate nothing here; their reload happens on drain.
void generate_arrivals(Session& session, double now, double frame_len);

/// Age of the oldest queued packet; 0 for an empty queue.
double hol_delay(const Session& session, double now);

struct RealTimeSelection {
    std::vector<RealTimeDemand> demands;
    std::vector<UserId> selected_ids;
};

struct RtSelectParams {
    std::size_t rt_cap = 18;  // at most this many sessions per frame
};

/// Picks the real-time sessions to serve this frame and their rate
/// requirements (nats/s). Sessions are scored by a_i * D_hol / n_i with
/// a_i = -ln(delta)/(D_max * R_i); the top rt_cap backlogged voice/video
/// sessions are selected. The rate asks for the overdue backlog (packets
/// older than D_max/2, at least the head packet) paced over the remaining
/// slack, floored so the head packet fits into one frame and capped at
/// the whole queue.
RealTimeSelection select_realtime(std::span<const Session> sessions,
                                  std::span<const double> noise_coeffs,
                                  std::span<const double> avg_rates,
                                  double now, double frame_len,
                                  const RtSelectParams& params);

/// Serves the queue with granted_bits. Voice/video deliver whole packets
/// FIFO while they fit; data drains fluidly and reloads a fresh file on
/// completion. Each completed packet records a delay sample stamped at
/// now_end. Returns the unused residue (always 0 for data sessions).
double drain(Session& session, double granted_bits, double now_end);

}  // namespace fqpsa

#endif  // FQPSA_TRAFFIC_HPP
