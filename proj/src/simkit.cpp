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

#include "fqpsa/simkit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>

namespace fqpsa {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr UserId kVideoBase = 1000000;
constexpr UserId kDataBase = 2000000;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

void fnv_absorb(std::uint64_t& h, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffU;
        h *= 1099511628211ULL;
    }
}

// Low-discrepancy phase in [0, 1), stable per user index so that
// changing a class count does not move other users' arrival cadence.
double arrival_phase(int index) {
    const double golden = 0.6180339887498949;
    double frac = std::fmod(static_cast<double>(index + 1) * golden, 1.0);
    return frac;
}

double percentile95(std::vector<double>& samples) {
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(samples.begin(), samples.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(samples.size())));
    return samples[std::min(rank == 0 ? 0 : rank - 1, samples.size() - 1)];
}

struct SimState {
    std::vector<Session> sessions;
    std::vector<ChannelState> channels;
    std::vector<std::mt19937_64> rngs;
    std::vector<double> noise_coeffs;
};

SimState build_state(const ScenarioConfig& cfg) {
    SimState st;
    const std::size_t n = static_cast<std::size_t>(cfg.voice_users) +
                          static_cast<std::size_t>(cfg.video_users) +
                          static_cast<std::size_t>(cfg.data_users);
    st.sessions.reserve(n);
    st.channels.reserve(n);
    st.rngs.reserve(n);

    auto add_user = [&](UserId id, Session session, int class_index) {
        const double dist =
            cfg.distances[static_cast<std::size_t>(class_index) % cfg.distances.size()];
        st.sessions.push_back(std::move(session));
        st.channels.push_back(make_channel_state(id, dist));
        st.rngs.emplace_back(mix_seed(cfg.seed, id));
    };

    for (int i = 0; i < cfg.voice_users; ++i) {
        const UserId id = static_cast<UserId>(i);
        Session s = make_voice_session(id, cfg.voice_packet_bits, cfg.voice_interval,
                                       cfg.voice_delay_bound, cfg.exceed_prob,
                                       arrival_phase(i) * cfg.voice_interval);
        s.duty_cycle = cfg.duty_cycle;
        add_user(id, std::move(s), i);
    }
    for (int i = 0; i < cfg.video_users; ++i) {
        const UserId id = kVideoBase + static_cast<UserId>(i);
        Session s = make_video_session(id, cfg.video_packet_bits, cfg.video_interval,
                                       cfg.video_delay_bound, cfg.exceed_prob,
                                       arrival_phase(i) * cfg.video_interval);
        add_user(id, std::move(s), i);
    }
    for (int i = 0; i < cfg.data_users; ++i) {
        const UserId id = kDataBase + static_cast<UserId>(i);
        add_user(id, make_data_session(id, cfg.file_bits, cfg.data_delay_bound,
                                       cfg.exceed_prob),
                 i);
    }
    st.noise_coeffs.resize(st.sessions.size(), 0.0);
    return st;
}

}  // namespace

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (voice_users < 0 || video_users < 0 || data_users < 0)
        fail("user counts must be nonnegative");
    if (voice_users + video_users + data_users < 1)
        fail("at least one user is required");
    if (frames < 1) fail("frames must be >= 1");
    if (!(frame_len > 0.0)) fail("frame_len must be positive");
    if (!(budget.total_power > 0.0)) fail("total_power must be positive");
    if (!(budget.total_bandwidth > 0.0)) fail("total_bandwidth must be positive");
    if (distances.empty()) fail("at least one distance is required");
    for (double d : distances)
        if (!(d >= 1.0)) fail("distances must be >= 1 m");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
    if (rt_cap < 0) fail("rt_cap must be nonnegative");
    if (n_sub < 1) fail("n_sub must be >= 1");
    if (!(warmup >= 0.0)) fail("warmup must be nonnegative");
    if (!(propagation.noise_psd > 0.0)) fail("noise_psd must be positive");
    if (!(propagation.snr_gap > 0.0 && propagation.snr_gap <= 1.0))
        fail("snr_gap must lie in (0,1]");
    if (propagation.shadow_sigma_db < 0.0) fail("shadow_sigma_db must be >= 0");
    if (!(propagation.fast_coherence > 0.0) || !(propagation.slow_coherence > 0.0))
        fail("coherence times must be positive");
    if (!(voice_packet_bits > 0.0) || !(video_packet_bits > 0.0) ||
        !(file_bits > 0.0))
        fail("packet and file sizes must be positive");
    if (!(voice_interval > 0.0) || !(video_interval > 0.0))
        fail("packet intervals must be positive");
    if (!(exceed_prob > 0.0 && exceed_prob < 1.0))
        fail("exceed_prob must lie in (0,1)");
    if (!(duty_cycle > 0.0 && duty_cycle <= 1.0))
        fail("duty_cycle must lie in (0,1]");
    if (!(voice_delay_bound > 0.0) || !(video_delay_bound > 0.0) ||
        !(data_delay_bound > 0.0))
        fail("delay bounds must be positive");
}

MetricsReport run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const McsTable mcs =
        cfg.mcs_file.empty() ? McsTable::standard() : McsTable::from_file(cfg.mcs_file);

    SimState st = build_state(cfg);
    const std::size_t n = st.sessions.size();
    RateLedger ledger(n, cfg.alpha);

    SchedConfig sc;
    sc.n_sub = cfg.n_sub;
    sc.rt_cap = static_cast<std::size_t>(cfg.rt_cap);
    sc.quantize = cfg.quantize;
    sc.mlwdf_per_subchannel_update = cfg.mlwdf_per_subchannel_update;

    const double duration = static_cast<double>(cfg.frames) * cfg.frame_len;
    const double warmup = cfg.warmup < duration ? cfg.warmup : 0.0;

    MetricsReport report;
    report.channel_checksum = 1469598103934665603ULL;  // FNV offset basis

    double delivered_at_warmup = -1.0;
    for (long t = 0; t < cfg.frames; ++t) {
        const double now = static_cast<double>(t) * cfg.frame_len;
        if (delivered_at_warmup < 0.0 && now >= warmup) {
            double d = 0.0;
            for (const auto& s : st.sessions)
                if (s.klass == TrafficClass::Data) d += s.delivered_bits;
            delivered_at_warmup = d;
        }
        for (std::size_t i = 0; i < n; ++i) {
            update_channel(st.channels[i], now, cfg.propagation, st.rngs[i]);
            fnv_absorb(report.channel_checksum, st.channels[i].gain);
            st.noise_coeffs[i] = link_coefficient(st.channels[i].gain, cfg.propagation);
            generate_arrivals(st.sessions[i], now, cfg.frame_len);
        }
        const FrameAllocation alloc =
            cfg.scheduler == SchedulerKind::Fqpsa
                ? fqpsa_frame(st.sessions, st.noise_coeffs, ledger, cfg.budget, now,
                              cfg.frame_len, mcs, sc)
                : mlwdf_frame(st.sessions, st.noise_coeffs, ledger, cfg.budget, now,
                              cfg.frame_len, mcs, sc);
        if (alloc.fallback) ++report.solver_fallbacks;
        report.degradation_events += alloc.degradation_events;
    }

    double delivered_end = 0.0;
    for (const auto& s : st.sessions)
        if (s.klass == TrafficClass::Data) delivered_end += s.delivered_bits;
    const double window = duration - warmup;
    report.data_throughput_bps = (delivered_end - delivered_at_warmup) / window;
    report.logsum = log_sum(ledger, st.sessions);

    const double near = *std::min_element(cfg.distances.begin(), cfg.distances.end());
    const double far = *std::max_element(cfg.distances.begin(), cfg.distances.end());
    auto pool = [&](TrafficClass klass, double dist) {
        std::vector<double> samples;
        for (std::size_t i = 0; i < n; ++i) {
            if (st.sessions[i].klass != klass || st.channels[i].distance != dist)
                continue;
            for (const auto& rec : st.sessions[i].delay_samples)
                if (rec.completed_at >= warmup) samples.push_back(rec.delay);
        }
        return percentile95(samples);
    };
    report.voice_p95_near_s = pool(TrafficClass::Voice, near);
    report.voice_p95_far_s = pool(TrafficClass::Voice, far);
    report.video_p95_near_s = pool(TrafficClass::Video, near);
    report.video_p95_far_s = pool(TrafficClass::Video, far);
    return report;
}

SweepResult sweep(const ScenarioConfig& base, SweepAxis axis,
                  std::span<const int> values) {
    if (values.empty()) throw std::invalid_argument("sweep requires at least one value");
    SweepResult result;
    result.axis = axis;
    result.values.assign(values.begin(), values.end());
    for (int v : values) {
        ScenarioConfig cfg = base;
        switch (axis) {
            case SweepAxis::Voice: cfg.voice_users = v; break;
            case SweepAxis::Video: cfg.video_users = v; break;
            case SweepAxis::Data: cfg.data_users = v; break;
        }
        cfg.scheduler = SchedulerKind::Fqpsa;
        result.fqpsa.push_back(run_scenario(cfg));
        cfg.scheduler = SchedulerKind::Mlwdf;
        result.mlwdf.push_back(run_scenario(cfg));
    }
    return result;
}

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Voice: return "voice";
        case SweepAxis::Video: return "video";
        case SweepAxis::Data: return "data";
    }
    return "?";
}

const char* scheduler_name(SchedulerKind kind) {
    return kind == SchedulerKind::Fqpsa ? "fqpsa" : "mlwdf";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

struct MetricRow {
    const char* name;
    double (*get)(const MetricsReport&);
};

const MetricRow kRows[] = {
    {"data_throughput_mbps",
     [](const MetricsReport& r) { return r.data_throughput_bps / 1e6; }},
    {"data_logsum", [](const MetricsReport& r) { return r.logsum; }},
    {"voice_delay_p95_near_ms",
     [](const MetricsReport& r) { return r.voice_p95_near_s * 1e3; }},
    {"voice_delay_p95_far_ms",
     [](const MetricsReport& r) { return r.voice_p95_far_s * 1e3; }},
    {"video_delay_p95_near_ms",
     [](const MetricsReport& r) { return r.video_p95_near_s * 1e3; }},
    {"video_delay_p95_far_ms",
     [](const MetricsReport& r) { return r.video_p95_far_s * 1e3; }},
    {"solver_fallbacks",
     [](const MetricsReport& r) { return static_cast<double>(r.solver_fallbacks); }},
    {"degradation_events",
     [](const MetricsReport& r) { return static_cast<double>(r.degradation_events); }},
};

std::string checksum_hex(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string run_csv(std::span<const SchedulerKind> schedulers,
                    std::span<const MetricsReport> reports) {
    if (schedulers.size() != reports.size() || reports.empty())
        throw std::invalid_argument("run_csv needs one report per scheduler");
    std::string out = "metric";
    for (const auto k : schedulers) {
        out += ',';
        out += scheduler_name(k);
    }
    out += '\n';
    for (const auto& row : kRows) {
        out += row.name;
        for (const auto& r : reports) {
            out += ',';
            out += format_double(row.get(r));
        }
        out += '\n';
    }
    out += "channel_checksum";
    for (const auto& r : reports) {
        out += ',';
        out += checksum_hex(r.channel_checksum);
    }
    out += '\n';
    return out;
}

std::string sweep_csv(const SweepResult& result) {
    std::string out = "metric";
    for (int v : result.values) {
        out += ',';
        out += axis_name(result.axis);
        out += '=';
        out += std::to_string(v);
    }
    out += '\n';
    auto emit = [&](const char* sched, const std::vector<MetricsReport>& reports) {
        for (const auto& row : kRows) {
            out += sched;
            out += '.';
            out += row.name;
            for (const auto& r : reports) {
                out += ',';
                out += format_double(row.get(r));
            }
            out += '\n';
        }
        out += sched;
        out += ".channel_checksum";
        for (const auto& r : reports) {
            out += ',';
            out += checksum_hex(r.channel_checksum);
        }
        out += '\n';
    };
    emit("fqpsa", result.fqpsa);
    emit("mlwdf", result.mlwdf);
    return out;
}

std::string sweep_table(const SweepResult& result) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"metric"};
    for (int v : result.values)
        header.push_back(std::string(axis_name(result.axis)) + "=" + std::to_string(v));
    cells.push_back(header);
    auto emit = [&](const char* sched, const std::vector<MetricsReport>& reports) {
        for (const auto& row : kRows) {
            std::vector<std::string> line{std::string(sched) + "." + row.name};
            for (const auto& r : reports) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.4g", row.get(r));
                line.push_back(buf);
            }
            cells.push_back(std::move(line));
        }
    };
    emit("fqpsa", result.fqpsa);
    emit("mlwdf", result.mlwdf);

    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c)
            width[c] = std::max(width[c], line[c].size());
    std::ostringstream out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            out << line[c];
            if (c + 1 < line.size())
                out << std::string(width[c] - line[c].size() + 2, ' ');
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fqpsa
