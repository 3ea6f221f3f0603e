#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace t2sim {

// Trace record payloads. One record per observable event; the trace is the
// ground truth from which SummaryStats is recomputed.

struct RTrafficTick {  // payload generated at a UE
  uint16_t ue = 0;
  uint64_t tick = 0;
  int bytes = 0;
};
struct RMacEnqueue {  // accepted into the MAC queue, seq assigned
  uint16_t ue = 0;
  uint64_t tick = 0;
  uint8_t seq = 0;
};
struct RTxStart {
  uint16_t node = 0;
  uint64_t tx_id = 0;
  char kind = 'd';  // 'd' data, 'a' ack
  uint16_t dst = 0;
  uint8_t seq = 0;
  int bytes = 0;
  double airtime_s = 0.0;
};
struct RTxEnd {
  uint16_t node = 0;
  uint64_t tx_id = 0;
};
struct RRxOk {
  uint16_t node = 0;
  uint64_t tx_id = 0;
  uint16_t src = 0;
  uint8_t seq = 0;
  char kind = 'd';
  double rssi_dbm = 0.0;
  double snr_db = 0.0;
  double distance_m = 0.0;
  bool los = true;
};
struct RRxFail {
  uint16_t node = 0;
  uint64_t tx_id = 0;
  uint16_t src = 0;
  std::string reason;  // collision | demod | busy | sf_mismatch
  double rssi_dbm = 0.0;
  bool would_demod = false;  // collided frame that was otherwise decodable
};
struct RDeliverUp {  // MAC handed a payload to the relay application
  uint16_t node = 0;
  uint16_t src = 0;
  uint8_t seq = 0;
  int bytes = 0;
};
struct RDupSuppressed {
  uint16_t node = 0;
  uint16_t src = 0;
  uint8_t seq = 0;
};
struct RPayloadDrop {  // terminal failure of one UE payload
  uint16_t ue = 0;
  uint64_t tick = 0;
  uint8_t seq = 0;
  std::string reason;  // mac_queue_full | retries_exhausted | bh_queue_full | sim_end
};
struct RRelayEnqueue {
  uint16_t relay = 0;
  uint16_t origin = 0;
  uint8_t seq = 0;
  uint64_t queue_depth = 0;
};
struct RBhPhase {
  std::string phase;
};
struct RBhLinkEval {
  double cl_db = 0.0;
  double rsrp_dbm = 0.0;
  bool feasible = true;
};
struct RBhTxStart {
  uint16_t origin = 0;
  uint8_t seq = 0;
  uint64_t bytes = 0;
  double duration_s = 0.0;
};
struct RDelivered {  // datagram arrived at the Tier 1 sink
  uint16_t origin = 0;
  uint64_t tick = 0;
  uint8_t seq = 0;
  int bytes = 0;
};
struct RNote {
  uint16_t node = 0;
  std::string text;
};

using TraceBody =
    std::variant<RTrafficTick, RMacEnqueue, RTxStart, RTxEnd, RRxOk, RRxFail,
                 RDeliverUp, RDupSuppressed, RPayloadDrop, RRelayEnqueue,
                 RBhPhase, RBhLinkEval, RBhTxStart, RDelivered, RNote>;

struct TraceRecord {
  double t = 0.0;
  TraceBody body;
};

/// Append-only event log; timestamps are non-decreasing by construction of
/// the engine's event loop.
struct Trace {
  std::vector<TraceRecord> records;
  double duration_s = 0.0;

  void add(double t, TraceBody body) {
    records.push_back({t, std::move(body)});
  }
};

/// Line-delimited serialization with fixed field order; byte-identical for
/// identical traces, which is what the determinism checks compare.
std::string serialize_trace(const Trace& trace);

struct UeStats {
  uint16_t id = 0;
  uint64_t sent = 0;
  uint64_t delivered = 0;
  uint64_t dropped = 0;
  bool pdr_defined = false;
  double pdr = 0.0;
  uint64_t latency_samples = 0;
  double p50_latency_s = 0.0;
  double p95_latency_s = 0.0;
  double max_latency_s = 0.0;

  bool operator==(const UeStats&) const = default;
};

struct LinkRssiStats {
  uint16_t tx = 0;
  uint16_t rx = 0;
  uint64_t samples = 0;
  double mean_dbm = 0.0;
  double min_dbm = 0.0;
  double max_dbm = 0.0;

  bool operator==(const LinkRssiStats&) const = default;
};

struct SummaryStats {
  std::vector<UeStats> per_ue;                  // sorted by id
  std::vector<LinkRssiStats> links;             // sorted by (tx, rx)
  std::map<uint16_t, double> duty_utilization;  // airtime / duration
  uint64_t backhaul_queue_max = 0;
  uint64_t collisions = 0;
  uint64_t crc_failures = 0;
  double duration_s = 0.0;

  bool operator==(const SummaryStats&) const = default;
};

/// Recomputes all metrics from the trace alone. Deliveries win over drop
/// notices for the same payload (an ACK can be lost after the payload
/// already made it through), so each payload resolves exactly once.
SummaryStats summarize(const Trace& trace);

}  // namespace t2sim
