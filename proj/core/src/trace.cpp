#include "t2sim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "t2sim/util.hpp"

namespace t2sim {

namespace {

struct Serializer {
  std::ostringstream& out;

  void operator()(const RTrafficTick& r) const {
    out << "traffic_tick ue=" << r.ue << " tick=" << r.tick
        << " bytes=" << r.bytes;
  }
  void operator()(const RMacEnqueue& r) const {
    out << "mac_enqueue ue=" << r.ue << " tick=" << r.tick
        << " seq=" << static_cast<int>(r.seq);
  }
  void operator()(const RTxStart& r) const {
    out << "tx_start node=" << r.node << " tx=" << r.tx_id << " kind="
        << r.kind << " dst=" << r.dst << " seq=" << static_cast<int>(r.seq)
        << " bytes=" << r.bytes << " air=" << fmt_fixed(r.airtime_s, 9);
  }
  void operator()(const RTxEnd& r) const {
    out << "tx_end node=" << r.node << " tx=" << r.tx_id;
  }
  void operator()(const RRxOk& r) const {
    out << "rx_ok node=" << r.node << " tx=" << r.tx_id << " src=" << r.src
        << " seq=" << static_cast<int>(r.seq) << " kind=" << r.kind
        << " rssi=" << fmt_fixed(r.rssi_dbm, 6)
        << " snr=" << fmt_fixed(r.snr_db, 6)
        << " dist=" << fmt_fixed(r.distance_m, 3) << " los=" << (r.los ? 1 : 0);
  }
  void operator()(const RRxFail& r) const {
    out << "rx_fail node=" << r.node << " tx=" << r.tx_id << " src=" << r.src
        << " reason=" << r.reason << " rssi=" << fmt_fixed(r.rssi_dbm, 6)
        << " would_demod=" << (r.would_demod ? 1 : 0);
  }
  void operator()(const RDeliverUp& r) const {
    out << "deliver_up node=" << r.node << " src=" << r.src
        << " seq=" << static_cast<int>(r.seq) << " bytes=" << r.bytes;
  }
  void operator()(const RDupSuppressed& r) const {
    out << "dup_suppressed node=" << r.node << " src=" << r.src
        << " seq=" << static_cast<int>(r.seq);
  }
  void operator()(const RPayloadDrop& r) const {
    out << "payload_drop ue=" << r.ue << " tick=" << r.tick
        << " seq=" << static_cast<int>(r.seq) << " reason=" << r.reason;
  }
  void operator()(const RRelayEnqueue& r) const {
    out << "relay_enqueue relay=" << r.relay << " origin=" << r.origin
        << " seq=" << static_cast<int>(r.seq) << " depth=" << r.queue_depth;
  }
  void operator()(const RBhPhase& r) const {
    out << "bh_phase phase=" << r.phase;
  }
  void operator()(const RBhLinkEval& r) const {
    out << "bh_link_eval cl=" << fmt_fixed(r.cl_db, 6)
        << " rsrp=" << fmt_fixed(r.rsrp_dbm, 6)
        << " feasible=" << (r.feasible ? 1 : 0);
  }
  void operator()(const RBhTxStart& r) const {
    out << "bh_tx_start origin=" << r.origin
        << " seq=" << static_cast<int>(r.seq) << " bytes=" << r.bytes
        << " duration=" << fmt_fixed(r.duration_s, 9);
  }
  void operator()(const RDelivered& r) const {
    out << "delivered origin=" << r.origin << " tick=" << r.tick
        << " seq=" << static_cast<int>(r.seq) << " bytes=" << r.bytes;
  }
  void operator()(const RNote& r) const {
    out << "note node=" << r.node << " text=" << r.text;
  }
};

double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) {
    return 0.0;
  }
  const size_t rank = static_cast<size_t>(
      std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::max<size_t>(rank, 1) - 1];
}

}  // namespace

std::string serialize_trace(const Trace& trace) {
  std::ostringstream out;
  out << "# t2sim trace duration=" << fmt_fixed(trace.duration_s, 9) << "\n";
  for (const TraceRecord& rec : trace.records) {
    out << fmt_fixed(rec.t, 9) << " ";
    std::visit(Serializer{out}, rec.body);
    out << "\n";
  }
  return out.str();
}

SummaryStats summarize(const Trace& trace) {
  SummaryStats stats;
  stats.duration_s = trace.duration_s;

  struct PayloadState {
    double tick_t = 0.0;
    bool delivered = false;
    bool dropped = false;
    double delivered_t = 0.0;
  };
  // (ue, tick) -> state
  std::map<uint16_t, std::map<uint64_t, PayloadState>> payloads;
  std::map<uint16_t, std::vector<double>> latencies;
  std::map<std::pair<uint16_t, uint16_t>, LinkRssiStats> links;
  std::map<uint16_t, double> airtime;

  for (const TraceRecord& rec : trace.records) {
    if (const auto* tick = std::get_if<RTrafficTick>(&rec.body)) {
      payloads[tick->ue][tick->tick].tick_t = rec.t;
    } else if (const auto* del = std::get_if<RDelivered>(&rec.body)) {
      PayloadState& ps = payloads[del->origin][del->tick];
      if (!ps.delivered) {
        ps.delivered = true;
        ps.delivered_t = rec.t;
        latencies[del->origin].push_back(rec.t - ps.tick_t);
      }
    } else if (const auto* drop = std::get_if<RPayloadDrop>(&rec.body)) {
      payloads[drop->ue][drop->tick].dropped = true;
    } else if (const auto* tx = std::get_if<RTxStart>(&rec.body)) {
      airtime[tx->node] += tx->airtime_s;
    } else if (const auto* rx = std::get_if<RRxOk>(&rec.body)) {
      auto& link = links[{rx->src, rx->node}];
      if (link.samples == 0) {
        link = {rx->src, rx->node, 0, 0.0, rx->rssi_dbm, rx->rssi_dbm};
      }
      link.samples += 1;
      link.mean_dbm += rx->rssi_dbm;  // running sum; divided below
      link.min_dbm = std::min(link.min_dbm, rx->rssi_dbm);
      link.max_dbm = std::max(link.max_dbm, rx->rssi_dbm);
    } else if (const auto* fail = std::get_if<RRxFail>(&rec.body)) {
      if (fail->reason == "collision") {
        stats.collisions += 1;
        if (fail->would_demod) {
          stats.crc_failures += 1;
        }
      }
    } else if (const auto* rel = std::get_if<RRelayEnqueue>(&rec.body)) {
      stats.backhaul_queue_max =
          std::max(stats.backhaul_queue_max, rel->queue_depth);
    }
  }

  for (auto& [ue, ticks] : payloads) {
    UeStats u;
    u.id = ue;
    for (auto& [tick, ps] : ticks) {
      u.sent += 1;
      if (ps.delivered) {
        u.delivered += 1;
      } else if (ps.dropped) {
        u.dropped += 1;
      }
    }
    if (u.sent > 0) {
      u.pdr_defined = true;
      u.pdr = static_cast<double>(u.delivered) / static_cast<double>(u.sent);
    }
    auto& lat = latencies[ue];
    std::sort(lat.begin(), lat.end());
    u.latency_samples = lat.size();
    if (!lat.empty()) {
      u.p50_latency_s = nearest_rank(lat, 0.50);
      u.p95_latency_s = nearest_rank(lat, 0.95);
      u.max_latency_s = lat.back();
    }
    stats.per_ue.push_back(u);
  }

  for (auto& [key, link] : links) {
    link.mean_dbm /= static_cast<double>(link.samples);
    stats.links.push_back(link);
  }
  if (trace.duration_s > 0.0) {
    for (const auto& [node, air] : airtime) {
      stats.duty_utilization[node] = air / trace.duration_s;
    }
  }
  return stats;
}

}  // namespace t2sim
