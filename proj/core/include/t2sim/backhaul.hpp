#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "t2sim/geo.hpp"
#include "t2sim/phy.hpp"
#include "t2sim/radio.hpp"
#include "t2sim/util.hpp"

namespace t2sim {

enum class CeLevel { ce0, ce1, ce2 };
const char* to_string(CeLevel level);

/// NB-IoT coverage-enhancement tier: deeper coupling loss buys reach with
/// repetitions, at a proportional throughput cost.
struct CoverageClass {
  CeLevel level = CeLevel::ce0;
  int repetitions = 1;
  double cl_ceiling_db = 144.0;

  bool operator==(const CoverageClass&) const = default;
};

enum class BackhaulError { link_infeasible };

/// CE0 up to 144 dB, CE1 up to 154 dB, CE2 up to the 164 dB MCL; beyond that
/// the link is infeasible.
Result<CoverageClass, BackhaulError> coverage_class_for(double cl_db);

double uplink_throughput_bps(const CoverageClass& cc,
                             double base_rate_bps = 15000.0);

/// Relayed LoRa payload as carried in one backhaul UDP datagram.
/// Wire layout (big-endian): relay_id(2) origin_src(2) origin_seq(1)
/// rssi(1, signed) timestamp_ms(8) payload(0..64).
struct RelayDatagram {
  uint16_t relay_id = 0;
  uint16_t origin_src = 0;
  uint8_t origin_seq = 0;
  int8_t rssi_at_relay_dbm = 0;
  uint64_t timestamp_ms = 0;
  std::vector<uint8_t> payload;

  bool operator==(const RelayDatagram&) const = default;
};

inline constexpr size_t kDatagramHeaderBytes = 14;
inline constexpr size_t kMaxDatagramPayload = 64;

std::vector<uint8_t> datagram_encode(const RelayDatagram& d);  // throws oversize

enum class DatagramDecodeError { truncated, oversize };
Result<RelayDatagram, DatagramDecodeError> datagram_decode(
    std::span<const uint8_t> bytes);

int8_t clamp_rssi_byte(double rssi_dbm);

RelayDatagram encapsulate(std::span<const uint8_t> frame_payload,
                          uint16_t relay_id, uint16_t origin_src,
                          uint8_t origin_seq, double rssi_dbm, double now_s);

/// Coupling loss of the BS-to-eNB link: path loss (terrain NLoS excess
/// included) minus the antenna gains at both ends.
double coupling_loss_db(const Position& bs, const NbIotRadioParams& link,
                        const Terrain& terrain, const PathLossModel& model);

struct BackhaulConfig {
  double attach_latency_s = 3.0;
  double reattach_backoff_s = 5.0;
  double base_rate_bps = 15000.0;
  size_t queue_capacity = 256;
  double mcl_db = 164.0;
  bool udp_ip_overhead = false;  // charge 28 bytes of UDP/IP header per datagram
  double link_eval_period_s = 10.0;

  bool operator==(const BackhaulConfig&) const = default;
};

enum class UePhase { detached, attaching, idle, connected };
const char* to_string(UePhase p);

struct UeState {
  UePhase phase = UePhase::detached;
  std::deque<RelayDatagram> pending;
  double attach_started_s = 0.0;
  std::optional<NbIotMetrics> serving_metrics;
  std::optional<CoverageClass> coverage_class;
  uint64_t timer_generation = 0;

  bool operator==(const UeState&) const = default;
};

// Events (engine -> UE)
struct UePowerOn {};
struct UeAttachDone {};
struct UeEnqueue {
  RelayDatagram datagram;
};
struct UeTxDone {};
struct UeLinkEval {
  double cl_db = 0.0;
  double rssi_dbm = 0.0;
};
struct UeTimer {
  uint64_t generation = 0;
};
using UeEvent = std::variant<UePowerOn, UeAttachDone, UeEnqueue, UeTxDone,
                             UeLinkEval, UeTimer>;

// Actions (UE -> engine)
struct UeSetTimer {
  double at_time = 0.0;
  uint64_t generation = 0;
};
struct UeStartTx {
  RelayDatagram datagram;
  size_t wire_bytes = 0;
  double duration_s = 0.0;
};
struct UeTxComplete {
  RelayDatagram datagram;  // handed to the sink by the engine
};
struct UeDropNotice {
  RelayDatagram datagram;
  std::string reason;
};
struct UeTraceNote {
  std::string note;
};
using UeAction = std::variant<UeSetTimer, UeStartTx, UeTxComplete,
                              UeDropNotice, UeTraceNote>;

struct UeStep {
  UeState state;
  std::vector<UeAction> actions;
};

/// Pure transition for the NB-IoT UE riding on the Tier 2 BS. Attach is an
/// opaque fixed-latency step; transport is reliable once CONNECTED, and
/// unreliability enters only through link_eval exceeding the MCL.
UeStep ue_transition(const BackhaulConfig& cfg, UeState state,
                     const UeEvent& event, double now);

}  // namespace t2sim
