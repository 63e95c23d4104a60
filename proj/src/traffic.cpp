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

#include "fqpsa/traffic.hpp"

#include <algorithm>
#include <cmath>

namespace fqpsa {

namespace {

constexpr double kLn2 = 0.6931471805599453;

Session make_cbr_session(UserId id, TrafficClass klass, double packet_bits,
                         double interval, double delay_bound, double exceed_prob,
                         double phase) {
    Session s;
    s.user_id = id;
    s.klass = klass;
    s.delay_bound = delay_bound;
    s.exceed_prob = exceed_prob;
    s.packet_bits = packet_bits;
    s.packet_interval = interval;
    s.next_arrival = phase;
    return s;
}

}  // namespace

Session make_voice_session(UserId id, double packet_bits, double interval,
                           double delay_bound, double exceed_prob, double phase) {
    return make_cbr_session(id, TrafficClass::Voice, packet_bits, interval,
                            delay_bound, exceed_prob, phase);
}

Session make_video_session(UserId id, double packet_bits, double interval,
                           double delay_bound, double exceed_prob, double phase) {
    return make_cbr_session(id, TrafficClass::Video, packet_bits, interval,
                            delay_bound, exceed_prob, phase);
}

Session make_data_session(UserId id, double file_bits, double delay_bound,
                          double exceed_prob) {
    Session s;
    s.user_id = id;
    s.klass = TrafficClass::Data;
    s.delay_bound = delay_bound;
    s.exceed_prob = exceed_prob;
    s.file_bits = file_bits;
    s.queue.push_back({file_bits, 0.0});
    s.generated_bits = file_bits;
    return s;
}

void generate_arrivals(Session& session, double now, double frame_len) {
    if (session.klass == TrafficClass::Data) return;
    const double end = now + frame_len;
    while (session.next_arrival < end) {
        bool active = true;
        if (session.duty_cycle < 1.0) {
            const double pos = std::fmod(session.next_arrival, session.duty_period);
            active = pos < session.duty_cycle * session.duty_period;
        }
        if (active) {
            session.queue.push_back({session.packet_bits, session.next_arrival});
            session.generated_bits += session.packet_bits;
        }
        session.next_arrival += session.packet_interval;
    }
}

double hol_delay(const Session& session, double now) {
    if (session.queue.empty()) return 0.0;
    return now - session.queue.front().arrival;
}

RealTimeSelection select_realtime(std::span<const Session> sessions,
                                  std::span<const double> noise_coeffs,
                                  std::span<const double> avg_rates,
                                  double now, double frame_len,
                                  const RtSelectParams& params) {
    struct Candidate {
        std::size_t index;
        double score;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const Session& s = sessions[i];
        if (s.klass == TrafficClass::Data || s.queue.empty()) continue;
        const double rate = std::max(avg_rates[i], 1e-12);
        const double a = -std::log(s.exceed_prob) / (s.delay_bound * rate);
        candidates.push_back({i, a * hol_delay(s, now) / noise_coeffs[i]});
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const Candidate& a, const Candidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return sessions[a.index].user_id < sessions[b.index].user_id;
              });
    if (candidates.size() > params.rt_cap) candidates.resize(params.rt_cap);

    RealTimeSelection sel;
    for (const auto& c : candidates) {
        const Session& s = sessions[c.index];
        const double age_due = s.delay_bound / 2.0;
        double backlog_due = 0.0;
        double total = 0.0;
        for (const auto& pkt : s.queue) {
            total += pkt.bits;
            if (now - pkt.arrival > age_due) backlog_due += pkt.bits;
        }
        backlog_due = std::max(backlog_due, s.queue.front().bits);
        const double slack = std::max(s.delay_bound - hol_delay(s, now), 0.0);
        double rate_bits = std::max(backlog_due / std::max(frame_len, slack),
                                    s.queue.front().bits / frame_len);
        // Never ask for more than the queue can supply in one frame.
        rate_bits = std::min(rate_bits, total / frame_len);
        sel.demands.push_back({s.user_id, noise_coeffs[c.index], rate_bits * kLn2});
        sel.selected_ids.push_back(s.user_id);
    }
    return sel;
}

double drain(Session& session, double granted_bits, double now_end) {
    if (granted_bits < 0.0) throw std::invalid_argument("negative grant");
    if (session.klass == TrafficClass::Data) {
        double remaining = granted_bits;
        while (remaining > 0.0 && !session.queue.empty()) {
            Packet& head = session.queue.front();
            const double left = head.bits - session.head_served_bits;
            const double take = std::min(left, remaining);
            session.head_served_bits += take;
            session.delivered_bits += take;
            remaining -= take;
            if (session.head_served_bits >= head.bits) {
                session.delay_samples.push_back({now_end - head.arrival, now_end});
                session.queue.pop_front();
                session.head_served_bits = 0.0;
                // Persistent backlog: reload a fresh file immediately.
                session.queue.push_back({session.file_bits, now_end});
                session.generated_bits += session.file_bits;
            }
        }
        return 0.0;
    }
    double remaining = granted_bits;
    while (!session.queue.empty() && session.queue.front().bits <= remaining) {
        const Packet pkt = session.queue.front();
        session.queue.pop_front();
        remaining -= pkt.bits;
        session.delivered_bits += pkt.bits;
        session.delay_samples.push_back({now_end - pkt.arrival, now_end});
    }
    return remaining;
}

}  // namespace fqpsa
