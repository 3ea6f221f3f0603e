#include "t2sim/mac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace t2sim {

namespace {
constexpr double kTimeEps = 1e-9;
}

uint16_t crc16_ccitt_false(std::span<const uint8_t> data) {
  uint16_t crc = 0xFFFF;
  for (uint8_t byte : data) {
    crc ^= static_cast<uint16_t>(byte) << 8;
    for (int i = 0; i < 8; ++i) {
      if (crc & 0x8000) {
        crc = static_cast<uint16_t>((crc << 1) ^ 0x1021);
      } else {
        crc = static_cast<uint16_t>(crc << 1);
      }
    }
  }
  return crc;
}

const char* to_string(FrameDecodeError e) {
  switch (e) {
    case FrameDecodeError::bad_magic: return "bad_magic";
    case FrameDecodeError::truncated: return "truncated";
    case FrameDecodeError::length_mismatch: return "length_mismatch";
    case FrameDecodeError::crc_mismatch: return "crc_mismatch";
  }
  return "?";
}

const char* to_string(MacPhase p) {
  switch (p) {
    case MacPhase::idle: return "idle";
    case MacPhase::backoff: return "backoff";
    case MacPhase::tx: return "tx";
    case MacPhase::await_ack: return "await_ack";
  }
  return "?";
}

const char* to_string(MacDropReason r) {
  switch (r) {
    case MacDropReason::retries_exhausted: return "retries_exhausted";
    case MacDropReason::queue_full: return "queue_full";
    case MacDropReason::oversize_payload: return "oversize_payload";
  }
  return "?";
}

std::vector<uint8_t> frame_encode(const Frame& f) {
  if (f.payload.size() > kMaxFramePayload) {
    throw std::invalid_argument("frame payload exceeds 64 bytes");
  }
  std::vector<uint8_t> out;
  out.reserve(f.wire_size());
  out.push_back(kFrameMagic);
  out.push_back(static_cast<uint8_t>(f.src >> 8));
  out.push_back(static_cast<uint8_t>(f.src & 0xFF));
  out.push_back(static_cast<uint8_t>(f.dst >> 8));
  out.push_back(static_cast<uint8_t>(f.dst & 0xFF));
  out.push_back(f.seq);
  out.push_back(f.flags);
  out.push_back(static_cast<uint8_t>(f.payload.size()));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  const uint16_t crc = crc16_ccitt_false(out);
  out.push_back(static_cast<uint8_t>(crc >> 8));
  out.push_back(static_cast<uint8_t>(crc & 0xFF));
  return out;
}

Result<Frame, FrameDecodeError> frame_decode(std::span<const uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderBytes + kFrameCrcBytes) {
    return FrameDecodeError::truncated;
  }
  if (bytes[0] != kFrameMagic) {
    return FrameDecodeError::bad_magic;
  }
  const size_t len = bytes[7];
  if (len > kMaxFramePayload ||
      bytes.size() != kFrameHeaderBytes + len + kFrameCrcBytes) {
    return FrameDecodeError::length_mismatch;
  }
  const size_t crc_off = kFrameHeaderBytes + len;
  const uint16_t expected = crc16_ccitt_false(bytes.subspan(0, crc_off));
  const uint16_t got = static_cast<uint16_t>(bytes[crc_off] << 8) |
                       bytes[crc_off + 1];
  if (expected != got) {
    return FrameDecodeError::crc_mismatch;
  }
  Frame f;
  f.src = static_cast<uint16_t>(bytes[1] << 8) | bytes[2];
  f.dst = static_cast<uint16_t>(bytes[3] << 8) | bytes[4];
  f.seq = bytes[5];
  f.flags = bytes[6];
  f.payload.assign(bytes.begin() + kFrameHeaderBytes,
                   bytes.begin() + crc_off);
  return f;
}

void DutyCycleLedger::admit(double start_s, double airtime_s) {
  auto it = std::upper_bound(
      entries.begin(), entries.end(), start_s,
      [](double t, const auto& e) { return t < e.first; });
  entries.insert(it, {start_s, airtime_s});
}

double DutyCycleLedger::used_at(double t) const {
  double sum = 0.0;
  for (const auto& [start, air] : entries) {
    if (start > t - window_s && start <= t + kTimeEps) {
      sum += air;
    }
  }
  return sum;
}

void DutyCycleLedger::prune(double now) {
  std::erase_if(entries, [&](const auto& e) {
    return e.first + window_s < now - kTimeEps;
  });
}

double duty_next_allowed(const DutyCycleLedger& ledger, double airtime_s,
                         double now) {
  if (airtime_s <= 0.0) {
    throw std::invalid_argument("airtime must be positive");
  }
  if (airtime_s > ledger.budget_s + kTimeEps) {
    throw std::invalid_argument("airtime alone exceeds the duty-cycle budget");
  }
  if (ledger.used_at(now) + airtime_s <= ledger.budget_s + kTimeEps) {
    return now;
  }
  for (const auto& [start, air] : ledger.entries) {  // start-ordered
    const double cand = std::max(start + ledger.window_s, now);
    if (cand < now) {
      continue;
    }
    if (ledger.used_at(cand) + airtime_s <= ledger.budget_s + kTimeEps) {
      return cand;
    }
  }
  return ledger.entries.back().first + ledger.window_s;
}

double backoff_delay(RngStream& rng, int attempt, double slot_s,
                     int max_slots, bool disabled) {
  if (attempt < 0) {
    throw std::invalid_argument("attempt must be non-negative");
  }
  if (disabled) {
    return 0.0;
  }
  const double slots = std::min(std::ldexp(1.0, attempt),
                                static_cast<double>(max_slots));
  return rng.u01() * slots * slot_s;
}

double MacConfig::slot_s() const {
  return lora_airtime_s(radio, static_cast<int>(kMaxFramePayload));
}

double MacConfig::ack_timeout_s() const {
  return lora_airtime_s(radio, 0) + 2.0 * processing_guard_s;
}

bool DedupWindow::contains(uint8_t seq) const {
  for (size_t i = 0; i < count_; ++i) {
    if (seqs_[i] == seq) {
      return true;
    }
  }
  return false;
}

void DedupWindow::insert(uint8_t seq) {
  seqs_[next_] = seq;
  next_ = (next_ + 1) % seqs_.size();
  count_ = std::min(count_ + 1, seqs_.size());
}

namespace {

Frame make_ack_for(uint16_t self, const Frame& data) {
  Frame ack;
  ack.src = self;
  ack.dst = data.src;
  ack.seq = data.seq;  // acked sequence number rides in the seq field
  ack.flags = frame_flags::ack;
  return ack;
}

/// Draw a backoff, gate on the duty ledger and arm the tx timer.
void schedule_data_tx(const MacConfig& cfg, MacState& st,
                      std::vector<MacAction>& actions, double now) {
  const Frame& head = st.tx_queue.front();
  const double air =
      lora_airtime_s(cfg.radio, static_cast<int>(head.payload.size()));
  const double delay = backoff_delay(st.rng, st.attempt, cfg.slot_s(),
                                     cfg.max_backoff_slots,
                                     cfg.backoff_disabled);
  const double start = duty_next_allowed(st.duty, air, now + delay);
  st.phase = MacPhase::backoff;
  actions.push_back(MacSetTimer{start, ++st.timer_generation});
}

/// ACKs skip backoff entirely: turnaround delay, then the duty ledger.
void start_ack_tx(const MacConfig& cfg, MacState& st,
                  std::vector<MacAction>& actions, double now,
                  MacPhase resume) {
  Frame ack = st.pending_acks.front();
  st.pending_acks.pop_front();
  const double air = lora_airtime_s(cfg.radio, 0);
  const double start =
      duty_next_allowed(st.duty, air, now + cfg.ack_turnaround_s);
  st.duty.admit(start, air);
  st.duty.prune(now);
  st.phase = MacPhase::tx;
  st.tx_kind = TxKind::ack;
  st.resume_phase = resume;
  actions.push_back(MacStartTx{std::move(ack), start});
}

void handle_timeout(const MacConfig& cfg, MacState& st,
                    std::vector<MacAction>& actions, double now);

/// After a transmission (or an exhausted drop): drain pending ACKs first,
/// then resume whatever the radio was interrupted from.
void continue_after_tx(const MacConfig& cfg, MacState& st,
                       std::vector<MacAction>& actions, double now,
                       MacPhase resume) {
  if (!st.pending_acks.empty()) {
    start_ack_tx(cfg, st, actions, now, resume);
    return;
  }
  switch (resume) {
    case MacPhase::await_ack:
      st.phase = MacPhase::await_ack;
      if (st.timeout_while_tx) {
        st.timeout_while_tx = false;
        handle_timeout(cfg, st, actions, now);
      }
      break;
    case MacPhase::backoff:
      schedule_data_tx(cfg, st, actions, now);
      break;
    default:
      if (!st.tx_queue.empty()) {
        schedule_data_tx(cfg, st, actions, now);
      } else {
        st.phase = MacPhase::idle;
      }
      break;
  }
}

void handle_timeout(const MacConfig& cfg, MacState& st,
                    std::vector<MacAction>& actions, double now) {
  st.attempt += 1;
  if (st.attempt > cfg.max_retries) {
    Frame dropped = st.tx_queue.front();
    st.tx_queue.pop_front();
    st.attempt = 0;
    actions.push_back(
        MacDropNotice{std::move(dropped), MacDropReason::retries_exhausted});
    continue_after_tx(cfg, st, actions, now, MacPhase::idle);
  } else {
    schedule_data_tx(cfg, st, actions, now);
  }
}

void handle_rx(const MacConfig& cfg, MacState& st,
               std::vector<MacAction>& actions, const Frame& frame,
               double now) {
  if (frame.is_ack()) {
    const bool match = st.phase == MacPhase::await_ack &&
                       !st.tx_queue.empty() && frame.dst == cfg.self_id &&
                       frame.src == st.tx_queue.front().dst &&
                       frame.seq == st.tx_queue.front().seq;
    if (!match) {
      actions.push_back(MacTraceNote{"ignored ack"});
      return;
    }
    st.tx_queue.pop_front();
    st.attempt = 0;
    ++st.timer_generation;  // cancel the ack timeout
    continue_after_tx(cfg, st, actions, now, MacPhase::idle);
    return;
  }

  if (!frame.is_data() ||
      (frame.dst != cfg.self_id && !frame.is_broadcast())) {
    actions.push_back(MacTraceNote{"ignored frame"});
    return;
  }

  DedupWindow& window = st.dedup[frame.src];
  if (window.contains(frame.seq)) {
    actions.push_back(MacTraceNote{"duplicate suppressed"});
  } else {
    window.insert(frame.seq);
    actions.push_back(MacDeliverUp{frame.payload, frame.src, frame.seq});
  }

  if (frame.is_broadcast()) {
    return;  // broadcasts are never acknowledged
  }
  st.pending_acks.push_back(make_ack_for(cfg.self_id, frame));

  switch (st.phase) {
    case MacPhase::idle:
      start_ack_tx(cfg, st, actions, now, MacPhase::idle);
      break;
    case MacPhase::backoff:
      ++st.timer_generation;  // cancel the pending data tx; rescheduled after
      start_ack_tx(cfg, st, actions, now, MacPhase::backoff);
      break;
    case MacPhase::await_ack:
      start_ack_tx(cfg, st, actions, now, MacPhase::await_ack);
      break;
    case MacPhase::tx:
      // Radio busy; the ACK drains once the current transmission finishes.
      actions.push_back(MacTraceNote{"rx during tx"});
      break;
  }
}

}  // namespace

MacStep mac_transition(const MacConfig& cfg, MacState state,
                       const MacEvent& event, double now) {
  std::vector<MacAction> actions;
  MacState& st = state;

  if (const auto* enq = std::get_if<MacEnqueue>(&event)) {
    Frame f;
    f.src = cfg.self_id;
    f.dst = enq->dst;
    f.seq = st.next_seq;
    f.flags = frame_flags::data;
    f.payload = enq->payload;
    if (f.payload.size() > kMaxFramePayload) {
      actions.push_back(
          MacDropNotice{std::move(f), MacDropReason::oversize_payload});
      return {std::move(state), std::move(actions)};
    }
    if (st.tx_queue.size() >= cfg.queue_capacity) {
      actions.push_back(
          MacDropNotice{std::move(f), MacDropReason::queue_full});
      return {std::move(state), std::move(actions)};
    }
    st.next_seq = static_cast<uint8_t>(st.next_seq + 1);
    st.tx_queue.push_back(std::move(f));
    if (st.phase == MacPhase::idle) {
      schedule_data_tx(cfg, st, actions, now);
    }
  } else if (std::holds_alternative<MacTxDone>(event)) {
    if (st.phase != MacPhase::tx) {
      actions.push_back(MacTraceNote{"tx_done outside tx"});
      return {std::move(state), std::move(actions)};
    }
    if (st.tx_kind == TxKind::ack) {
      continue_after_tx(cfg, st, actions, now, st.resume_phase);
    } else {
      const Frame& head = st.tx_queue.front();
      if (head.is_broadcast()) {
        st.tx_queue.pop_front();  // fire-and-forget
        st.attempt = 0;
        continue_after_tx(cfg, st, actions, now, MacPhase::idle);
      } else {
        st.phase = MacPhase::await_ack;
        actions.push_back(
            MacSetTimer{now + cfg.ack_timeout_s(), ++st.timer_generation});
      }
    }
  } else if (const auto* rx = std::get_if<MacRx>(&event)) {
    handle_rx(cfg, st, actions, rx->frame, now);
  } else if (const auto* timer = std::get_if<MacTimer>(&event)) {
    if (timer->generation != st.timer_generation) {
      actions.push_back(MacTraceNote{"stale timer"});
      return {std::move(state), std::move(actions)};
    }
    switch (st.phase) {
      case MacPhase::backoff: {
        const Frame& head = st.tx_queue.front();
        const double air =
            lora_airtime_s(cfg.radio, static_cast<int>(head.payload.size()));
        // The ledger may have grown since scheduling (ACKs squeeze in).
        const double allowed = duty_next_allowed(st.duty, air, now);
        if (allowed > now + kTimeEps) {
          actions.push_back(MacSetTimer{allowed, ++st.timer_generation});
          break;
        }
        st.duty.admit(now, air);
        st.duty.prune(now);
        st.phase = MacPhase::tx;
        st.tx_kind = TxKind::data;
        st.resume_phase = MacPhase::idle;
        actions.push_back(MacStartTx{head, now});
        break;
      }
      case MacPhase::await_ack:
        handle_timeout(cfg, st, actions, now);
        break;
      case MacPhase::tx:
        if (st.resume_phase == MacPhase::await_ack) {
          st.timeout_while_tx = true;  // resolved when the tx completes
        } else {
          actions.push_back(MacTraceNote{"timer during tx"});
        }
        break;
      case MacPhase::idle:
        actions.push_back(MacTraceNote{"timer while idle"});
        break;
    }
  }

  return {std::move(state), std::move(actions)};
}

}  // namespace t2sim
