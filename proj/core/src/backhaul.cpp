#include "t2sim/backhaul.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace t2sim {

const char* to_string(CeLevel level) {
  switch (level) {
    case CeLevel::ce0: return "CE0";
    case CeLevel::ce1: return "CE1";
    case CeLevel::ce2: return "CE2";
  }
  return "?";
}

const char* to_string(UePhase p) {
  switch (p) {
    case UePhase::detached: return "detached";
    case UePhase::attaching: return "attaching";
    case UePhase::idle: return "idle";
    case UePhase::connected: return "connected";
  }
  return "?";
}

Result<CoverageClass, BackhaulError> coverage_class_for(double cl_db) {
  if (cl_db <= 144.0) {
    return CoverageClass{CeLevel::ce0, 1, 144.0};
  }
  if (cl_db <= 154.0) {
    return CoverageClass{CeLevel::ce1, 8, 154.0};
  }
  if (cl_db <= 164.0) {
    return CoverageClass{CeLevel::ce2, 32, 164.0};
  }
  return BackhaulError::link_infeasible;
}

double uplink_throughput_bps(const CoverageClass& cc, double base_rate_bps) {
  return base_rate_bps / cc.repetitions;
}

std::vector<uint8_t> datagram_encode(const RelayDatagram& d) {
  if (d.payload.size() > kMaxDatagramPayload) {
    throw std::invalid_argument("datagram payload exceeds 64 bytes");
  }
  std::vector<uint8_t> out;
  out.reserve(kDatagramHeaderBytes + d.payload.size());
  out.push_back(static_cast<uint8_t>(d.relay_id >> 8));
  out.push_back(static_cast<uint8_t>(d.relay_id & 0xFF));
  out.push_back(static_cast<uint8_t>(d.origin_src >> 8));
  out.push_back(static_cast<uint8_t>(d.origin_src & 0xFF));
  out.push_back(d.origin_seq);
  out.push_back(static_cast<uint8_t>(d.rssi_at_relay_dbm));
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<uint8_t>(d.timestamp_ms >> shift));
  }
  out.insert(out.end(), d.payload.begin(), d.payload.end());
  return out;
}

Result<RelayDatagram, DatagramDecodeError> datagram_decode(
    std::span<const uint8_t> bytes) {
  if (bytes.size() < kDatagramHeaderBytes) {
    return DatagramDecodeError::truncated;
  }
  if (bytes.size() > kDatagramHeaderBytes + kMaxDatagramPayload) {
    return DatagramDecodeError::oversize;
  }
  RelayDatagram d;
  d.relay_id = static_cast<uint16_t>(bytes[0] << 8) | bytes[1];
  d.origin_src = static_cast<uint16_t>(bytes[2] << 8) | bytes[3];
  d.origin_seq = bytes[4];
  d.rssi_at_relay_dbm = static_cast<int8_t>(bytes[5]);
  d.timestamp_ms = 0;
  for (int i = 0; i < 8; ++i) {
    d.timestamp_ms = (d.timestamp_ms << 8) | bytes[6 + i];
  }
  d.payload.assign(bytes.begin() + kDatagramHeaderBytes, bytes.end());
  return d;
}

int8_t clamp_rssi_byte(double rssi_dbm) {
  const double rounded = std::round(rssi_dbm);
  return static_cast<int8_t>(std::clamp(rounded, -128.0, 127.0));
}

RelayDatagram encapsulate(std::span<const uint8_t> frame_payload,
                          uint16_t relay_id, uint16_t origin_src,
                          uint8_t origin_seq, double rssi_dbm, double now_s) {
  if (frame_payload.size() > kMaxDatagramPayload) {
    throw std::invalid_argument("datagram payload exceeds 64 bytes");
  }
  RelayDatagram d;
  d.relay_id = relay_id;
  d.origin_src = origin_src;
  d.origin_seq = origin_seq;
  d.rssi_at_relay_dbm = clamp_rssi_byte(rssi_dbm);
  d.timestamp_ms = static_cast<uint64_t>(std::llround(now_s * 1000.0));
  d.payload.assign(frame_payload.begin(), frame_payload.end());
  return d;
}

double coupling_loss_db(const Position& bs, const NbIotRadioParams& link,
                        const Terrain& terrain, const PathLossModel& model) {
  const double loss =
      path_loss_db(model, bs, link.enb_position, terrain, link.carrier_hz);
  return loss - link.antenna_gain_dbi - link.enb_antenna_gain_dbi;
}

namespace {

size_t datagram_wire_bytes(const BackhaulConfig& cfg, const RelayDatagram& d) {
  return kDatagramHeaderBytes + d.payload.size() +
         (cfg.udp_ip_overhead ? 28 : 0);
}

/// Kick off transmission of the queue head; throughput follows the current
/// coverage class (CE0 until the first link evaluation lands).
void start_head_tx(const BackhaulConfig& cfg, UeState& st,
                   std::vector<UeAction>& actions) {
  const RelayDatagram& head = st.pending.front();
  const CoverageClass cc =
      st.coverage_class.value_or(CoverageClass{CeLevel::ce0, 1, 144.0});
  const size_t bytes = datagram_wire_bytes(cfg, head);
  const double duration =
      static_cast<double>(bytes) * 8.0 /
      uplink_throughput_bps(cc, cfg.base_rate_bps);
  st.phase = UePhase::connected;
  actions.push_back(UeStartTx{head, bytes, duration});
}

}  // namespace

UeStep ue_transition(const BackhaulConfig& cfg, UeState state,
                     const UeEvent& event, double now) {
  std::vector<UeAction> actions;
  UeState& st = state;

  if (std::holds_alternative<UePowerOn>(event)) {
    if (st.phase != UePhase::detached) {
      actions.push_back(UeTraceNote{"power_on ignored"});
      return {std::move(state), std::move(actions)};
    }
    st.phase = UePhase::attaching;
    st.attach_started_s = now;
    actions.push_back(
        UeSetTimer{now + cfg.attach_latency_s, ++st.timer_generation});
  } else if (std::holds_alternative<UeAttachDone>(event)) {
    if (st.phase != UePhase::attaching) {
      actions.push_back(UeTraceNote{"attach_done ignored"});
      return {std::move(state), std::move(actions)};
    }
    st.phase = UePhase::idle;
    ++st.timer_generation;  // cancel the attach timer if driven externally
    if (!st.pending.empty()) {
      start_head_tx(cfg, st, actions);
    }
  } else if (const auto* enq = std::get_if<UeEnqueue>(&event)) {
    if (st.pending.size() >= cfg.queue_capacity) {
      actions.push_back(UeDropNotice{enq->datagram, "queue_full"});
      return {std::move(state), std::move(actions)};
    }
    st.pending.push_back(enq->datagram);
    if (st.phase == UePhase::idle) {
      start_head_tx(cfg, st, actions);
    }
  } else if (std::holds_alternative<UeTxDone>(event)) {
    if (st.phase != UePhase::connected || st.pending.empty()) {
      actions.push_back(UeTraceNote{"tx_done ignored"});
      return {std::move(state), std::move(actions)};
    }
    RelayDatagram done = st.pending.front();
    st.pending.pop_front();
    actions.push_back(UeTxComplete{std::move(done)});
    if (!st.pending.empty()) {
      start_head_tx(cfg, st, actions);
    } else {
      st.phase = UePhase::idle;
    }
  } else if (const auto* eval = std::get_if<UeLinkEval>(&event)) {
    st.serving_metrics = nbiot_metrics(eval->rssi_dbm);
    auto cc = coverage_class_for(eval->cl_db);
    if (!cc.ok() || eval->cl_db > cfg.mcl_db) {
      // Out of coverage: drop to DETACHED and back off before reattaching.
      st.coverage_class.reset();
      if (st.phase != UePhase::detached) {
        st.phase = UePhase::detached;
        actions.push_back(UeTraceNote{"link infeasible: detached"});
      }
      actions.push_back(
          UeSetTimer{now + cfg.reattach_backoff_s, ++st.timer_generation});
    } else {
      st.coverage_class = cc.value();
    }
  } else if (const auto* timer = std::get_if<UeTimer>(&event)) {
    if (timer->generation != st.timer_generation) {
      actions.push_back(UeTraceNote{"stale timer"});
      return {std::move(state), std::move(actions)};
    }
    switch (st.phase) {
      case UePhase::attaching:
        st.phase = UePhase::idle;
        if (!st.pending.empty()) {
          start_head_tx(cfg, st, actions);
        }
        break;
      case UePhase::detached:
        st.phase = UePhase::attaching;
        st.attach_started_s = now;
        actions.push_back(
            UeSetTimer{now + cfg.attach_latency_s, ++st.timer_generation});
        break;
      default:
        actions.push_back(UeTraceNote{"timer ignored"});
        break;
    }
  }

  return {std::move(state), std::move(actions)};
}

}  // namespace t2sim
