#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "t2sim/phy.hpp"
#include "t2sim/radio.hpp"
#include "t2sim/rng.hpp"
#include "t2sim/util.hpp"

namespace t2sim {

inline constexpr uint8_t kFrameMagic = 0xA5;
inline constexpr uint16_t kBroadcastAddr = 0xFFFF;
inline constexpr size_t kMaxFramePayload = 64;
inline constexpr size_t kFrameHeaderBytes = 8;
inline constexpr size_t kFrameCrcBytes = 2;

namespace frame_flags {
inline constexpr uint8_t ack = 0x01;
inline constexpr uint8_t data = 0x02;
}  // namespace frame_flags

/// Link-layer frame: magic | src | dst | seq | flags | len | payload | crc16.
/// Multi-byte fields are big-endian on the wire.
struct Frame {
  uint16_t src = 0;
  uint16_t dst = 0;
  uint8_t seq = 0;
  uint8_t flags = 0;
  std::vector<uint8_t> payload;

  bool is_ack() const { return flags & frame_flags::ack; }
  bool is_data() const { return flags & frame_flags::data; }
  bool is_broadcast() const { return dst == kBroadcastAddr; }
  size_t wire_size() const {
    return kFrameHeaderBytes + payload.size() + kFrameCrcBytes;
  }

  bool operator==(const Frame&) const = default;
};

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection).
uint16_t crc16_ccitt_false(std::span<const uint8_t> data);

std::vector<uint8_t> frame_encode(const Frame& f);  // throws on oversize

enum class FrameDecodeError { bad_magic, truncated, length_mismatch,
                              crc_mismatch };
const char* to_string(FrameDecodeError e);

Result<Frame, FrameDecodeError> frame_decode(std::span<const uint8_t> bytes);

/// Trailing-window airtime accounting for the EU868 1% duty cycle.
/// A transmission counts against the window for window_s after its start.
struct DutyCycleLedger {
  double window_s = 3600.0;
  double budget_s = 36.0;
  std::vector<std::pair<double, double>> entries;  // (start_s, airtime_s)

  void admit(double start_s, double airtime_s);
  /// Airtime chargeable in the window ending at t.
  double used_at(double t) const;
  void prune(double now);

  bool operator==(const DutyCycleLedger&) const = default;
};

/// Earliest t >= now at which admitting airtime_s keeps the trailing-window
/// sum within budget. Throws if airtime_s alone exceeds the budget.
double duty_next_allowed(const DutyCycleLedger& ledger, double airtime_s,
                         double now);

/// Uniform draw in [0, min(2^attempt, max_slots) * slot_s].
double backoff_delay(RngStream& rng, int attempt, double slot_s,
                     int max_slots, bool disabled = false);

struct MacConfig {
  uint16_t self_id = 0;
  LoRaRadioParams radio;
  int max_retries = 4;
  double ack_turnaround_s = 0.05;
  double processing_guard_s = 0.05;
  int max_backoff_slots = 32;
  size_t queue_capacity = 64;
  bool backoff_disabled = false;
  double duty_window_s = 3600.0;
  double duty_budget_s = 36.0;

  double slot_s() const;         // airtime of a maximal frame
  double ack_timeout_s() const;  // ack airtime + 2x processing guard
};

enum class MacPhase { idle, backoff, tx, await_ack };
const char* to_string(MacPhase p);

enum class TxKind { data, ack };

/// Last 8 distinct sequence numbers seen from one source.
class DedupWindow {
 public:
  bool contains(uint8_t seq) const;
  void insert(uint8_t seq);
  bool operator==(const DedupWindow&) const = default;

 private:
  std::array<uint8_t, 8> seqs_{};
  size_t count_ = 0;
  size_t next_ = 0;
};

struct MacState {
  MacPhase phase = MacPhase::idle;
  std::deque<Frame> tx_queue;
  int attempt = 0;
  uint8_t next_seq = 0;
  std::map<uint16_t, DedupWindow> dedup;
  DutyCycleLedger duty;
  RngStream rng;
  std::deque<Frame> pending_acks;
  uint64_t timer_generation = 0;
  TxKind tx_kind = TxKind::data;
  MacPhase resume_phase = MacPhase::idle;
  bool timeout_while_tx = false;

  bool operator==(const MacState&) const = default;
};

// Events (engine -> MAC)
struct MacEnqueue {
  std::vector<uint8_t> payload;
  uint16_t dst = 0;
};
struct MacTxDone {};
struct MacRx {
  Frame frame;
};
struct MacTimer {
  uint64_t generation = 0;
};
using MacEvent = std::variant<MacEnqueue, MacTxDone, MacRx, MacTimer>;

// Actions (MAC -> engine)
struct MacStartTx {
  Frame frame;
  double at_time = 0.0;
};
struct MacSetTimer {
  double at_time = 0.0;
  uint64_t generation = 0;
};
struct MacDeliverUp {
  std::vector<uint8_t> payload;
  uint16_t src = 0;
  uint8_t seq = 0;
};
enum class MacDropReason { retries_exhausted, queue_full, oversize_payload };
const char* to_string(MacDropReason r);
struct MacDropNotice {
  Frame frame;
  MacDropReason reason;
};
struct MacTraceNote {
  std::string note;
};
using MacAction = std::variant<MacStartTx, MacSetTimer, MacDeliverUp,
                               MacDropNotice, MacTraceNote>;

struct MacStep {
  MacState state;
  std::vector<MacAction> actions;
};

/// Pure transition: same (config, state, event, now) always yields the same
/// (state', actions). All randomness lives in state.rng; all timing comes in
/// through `now` and leaves through action timestamps.
MacStep mac_transition(const MacConfig& cfg, MacState state,
                       const MacEvent& event, double now);

}  // namespace t2sim
