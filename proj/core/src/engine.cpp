#include "t2sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <map>
#include <queue>
#include <variant>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include "t2sim/mac.hpp"
#include "t2sim/mobility.hpp"
#include "t2sim/phy.hpp"
#include "t2sim/rng.hpp"

namespace t2sim {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

/// Fire-and-forget UDP emitter for live-sink mode. Construction failures
/// throw; send failures are ignored (plain UDP semantics).
class UdpEmitter {
 public:
  UdpEmitter(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 ||
        res == nullptr) {
      throw IoError("cannot resolve live-sink host: " + host);
    }
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd_ < 0) {
      freeaddrinfo(res);
      throw IoError("cannot create live-sink socket");
    }
    addr_len_ = res->ai_addrlen;
    std::memcpy(&addr_, res->ai_addr, res->ai_addrlen);
    freeaddrinfo(res);
  }

  UdpEmitter(const UdpEmitter&) = delete;
  UdpEmitter& operator=(const UdpEmitter&) = delete;

  ~UdpEmitter() {
    if (fd_ >= 0) {
      ::close(fd_);
    }
  }

  void send(std::span<const uint8_t> bytes) {
    ::sendto(fd_, bytes.data(), bytes.size(), 0,
             reinterpret_cast<const sockaddr*>(&addr_), addr_len_);
  }

 private:
  int fd_ = -1;
  sockaddr_storage addr_{};
  socklen_t addr_len_ = 0;
};

// Event bodies.
struct EvTraffic {
  uint16_t ue = 0;
  uint64_t tick = 0;
};
struct EvMacTimer {
  uint16_t node = 0;
  uint64_t generation = 0;
};
struct EvTxBegin {
  uint64_t tx_id = 0;
};
struct EvTxEnd {
  uint64_t tx_id = 0;
};
struct EvArrival {
  uint16_t rx_node = 0;
  uint64_t tx_id = 0;
};
struct EvUeTimer {
  uint64_t generation = 0;
};
struct EvBhTxDone {
  uint64_t epoch = 0;
};
struct EvLinkEval {};

using EventBody = std::variant<EvTraffic, EvMacTimer, EvTxBegin, EvTxEnd,
                               EvArrival, EvUeTimer, EvBhTxDone, EvLinkEval>;

struct Event {
  double t = 0.0;
  uint64_t seq = 0;  // insertion order breaks timestamp ties
  EventBody body;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) {
      return a.t > b.t;
    }
    return a.seq > b.seq;
  }
};

struct ArrivalInfo {
  uint64_t tx_id = 0;
  uint16_t src = 0;
  int sf = 7;
  double start_s = 0.0;
  double end_s = 0.0;
  LinkSample sample;
};

struct Txn {
  uint64_t id = 0;
  uint16_t node = 0;
  Frame frame;
  double start_s = 0.0;
  double end_s = 0.0;
  int sf = 7;
  std::map<uint16_t, ArrivalInfo> arrivals;
};

struct Outstanding {
  uint64_t tick = 0;
  uint8_t seq = 0;
  bool delivered = false;
  bool dropped = false;
  bool relayed = false;
};

class Sim {
 public:
  Sim(const Scenario& s, const RunOptions& opts) : sc_(s), opts_(opts) {
    auto violations = validate_scenario(s);
    if (!violations.empty()) {
      std::string msg = "invalid scenario:";
      for (const Violation& v : violations) {
        msg += "\n  " + v.path + ": " + v.message;
      }
      throw ScenarioError(msg, std::move(violations));
    }
    if (opts_.live_sink) {
      emitter_.emplace(opts_.live_sink->host, opts_.live_sink->port);
    }
    duration_ = s.sim.duration_s;
    seed_ = s.sim.seed;

    bh_cfg_ = s.models.backhaul;
    bh_cfg_.mcl_db = s.tier2_bs.nbiot.mcl_db;

    add_node(s.tier2_bs.id, s.tier2_bs.lora, true, 0);
    for (size_t i = 0; i < s.ue_drones.size(); ++i) {
      add_node(s.ue_drones[i].id, s.ue_drones[i].lora, false, i);
    }
  }

  RunResult run_all() {
    schedule_traffic();
    // Backhaul UE powers on at t = 0, then gets periodic link evaluations.
    apply_ue_step(ue_transition(bh_cfg_, bh_, UePowerOn{}, 0.0), 0.0);
    for (double t = 0.0; t <= duration_; t += bh_cfg_.link_eval_period_s) {
      push(t, EvLinkEval{});
    }

    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      if (ev.t > duration_) {
        continue;  // events beyond the horizon are discarded
      }
      now_ = std::max(now_, ev.t);
      std::visit([&](const auto& body) { handle(body); }, ev.body);
    }
    flush_unresolved();

    trace_.duration_s = duration_;
    RunResult result;
    result.stats = summarize(trace_);
    result.trace = std::move(trace_);
    return result;
  }

 private:
  struct LoraNode {
    uint16_t id = 0;
    bool is_bs = false;
    size_t ue_idx = 0;
    MacConfig cfg;
    MacState mac;
    std::vector<std::pair<double, double>> tx_intervals;
  };

  void add_node(uint16_t id, const LoRaRadioParams& radio, bool is_bs,
                size_t ue_idx) {
    LoraNode n;
    n.id = id;
    n.is_bs = is_bs;
    n.ue_idx = ue_idx;
    n.cfg.self_id = id;
    n.cfg.radio = radio;
    n.cfg.max_retries = sc_.models.mac.max_retries;
    n.cfg.ack_turnaround_s = sc_.models.mac.ack_turnaround_s;
    n.cfg.processing_guard_s = sc_.models.mac.processing_guard_s;
    n.cfg.max_backoff_slots = sc_.models.mac.max_backoff_slots;
    n.cfg.queue_capacity = static_cast<size_t>(sc_.models.mac.queue_capacity);
    n.cfg.backoff_disabled = sc_.models.mac.backoff_disabled;
    n.mac.rng = derive_stream(sc_.sim.seed, id, "mac");
    nodes_.emplace(id, std::move(n));
  }

  void schedule_traffic() {
    for (const UeDrone& ue : sc_.ue_drones) {
      const double period = ue.traffic.period_s;
      double phase = 0.0;
      if (!sc_.models.sync_traffic_phase) {
        RngStream st = derive_stream(seed_, ue.id, "phase");
        phase = st.u01() * period;
      }
      uint64_t tick = 0;
      for (double t = phase; t < duration_; t += period) {
        push(t, EvTraffic{ue.id, tick++});
      }
    }
  }

  void push(double t, EventBody body) {
    queue_.push(Event{t, event_seq_++, std::move(body)});
  }

  Position node_position(const LoraNode& n, double t) const {
    if (n.is_bs) {
      return sc_.tier2_bs.position;
    }
    return position_at_clamped(sc_.ue_drones[n.ue_idx].mission, t);
  }

  // --- LoRa side ---------------------------------------------------------

  void handle(const EvTraffic& ev) {
    LoraNode& node = nodes_.at(ev.ue);
    const UeDrone& ue = sc_.ue_drones[node.ue_idx];
    const int bytes = ue.traffic.payload_bytes;
    trace_.add(now_, RTrafficTick{ev.ue, ev.tick, bytes});

    std::vector<uint8_t> payload(static_cast<size_t>(bytes));
    for (size_t i = 0; i < payload.size(); ++i) {
      payload[i] = static_cast<uint8_t>((ev.ue + ev.tick + i) & 0xFF);
    }
    MacStep step = mac_transition(
        node.cfg, std::move(node.mac),
        MacEnqueue{std::move(payload), sc_.tier2_bs.id}, now_);
    node.mac = std::move(step.state);

    bool rejected = false;
    for (const MacAction& a : step.actions) {
      if (const auto* drop = std::get_if<MacDropNotice>(&a)) {
        trace_.add(now_, RPayloadDrop{ev.ue, ev.tick, drop->frame.seq,
                                      "mac_queue_full"});
        rejected = true;
      }
    }
    if (!rejected) {
      const uint8_t seq = node.mac.tx_queue.back().seq;
      outstanding_[ev.ue].push_back(Outstanding{ev.tick, seq});
      trace_.add(now_, RMacEnqueue{ev.ue, ev.tick, seq});
    }
    apply_mac_actions(node, step.actions, /*skip_drops=*/rejected);
  }

  void handle(const EvMacTimer& ev) {
    LoraNode& node = nodes_.at(ev.node);
    MacStep step = mac_transition(node.cfg, std::move(node.mac),
                                  MacTimer{ev.generation}, now_);
    node.mac = std::move(step.state);
    apply_mac_actions(node, step.actions);
  }

  void handle(const EvTxBegin& ev) {
    Txn& txn = txns_.at(ev.tx_id);
    LoraNode& tx_node = nodes_.at(txn.node);
    trace_.add(now_, RTxStart{txn.node, txn.id,
                              txn.frame.is_ack() ? 'a' : 'd', txn.frame.dst,
                              txn.frame.seq,
                              static_cast<int>(txn.frame.wire_size()),
                              txn.end_s - txn.start_s});
    tx_node.tx_intervals.emplace_back(txn.start_s, txn.end_s);
    push(txn.end_s, EvTxEnd{txn.id});

    const Position tx_pos = node_position(tx_node, txn.start_s);
    for (auto& [rid, rx_node] : nodes_) {
      if (rid == txn.node) {
        continue;
      }
      if (rx_node.cfg.radio.frequency_hz != tx_node.cfg.radio.frequency_hz) {
        continue;  // separate medium per frequency
      }
      const Position rx_pos = node_position(rx_node, txn.start_s);
      const double shadow = stateless_normal(
          seed_, hash_combine(txn.id, rid), "shadow",
          sc_.models.path_loss.shadowing_sigma_db);
      const LinkSample sample = evaluate_link(
          sc_.models.path_loss, tx_pos, rx_pos, sc_.terrain,
          tx_node.cfg.radio.frequency_hz, tx_node.cfg.radio.tx_power_dbm,
          tx_node.cfg.radio.antenna_gain_dbi +
              rx_node.cfg.radio.antenna_gain_dbi,
          tx_node.cfg.radio.bandwidth_hz, sc_.models.lora_noise_figure_db,
          shadow);
      const double prop = sample.distance_m / kSpeedOfLight;
      ArrivalInfo arr{txn.id, txn.node, txn.sf, txn.start_s + prop,
                      txn.end_s + prop, sample};
      txn.arrivals[rid] = arr;
      arrivals_at_[rid].push_back(arr);
      push(arr.end_s, EvArrival{rid, txn.id});
    }
  }

  void handle(const EvTxEnd& ev) {
    Txn& txn = txns_.at(ev.tx_id);
    LoraNode& node = nodes_.at(txn.node);
    trace_.add(now_, RTxEnd{txn.node, txn.id});
    MacStep step =
        mac_transition(node.cfg, std::move(node.mac), MacTxDone{}, now_);
    node.mac = std::move(step.state);
    apply_mac_actions(node, step.actions);
    prune_history(node);
  }

  void handle(const EvArrival& ev) {
    Txn& txn = txns_.at(ev.tx_id);
    const ArrivalInfo arr = txn.arrivals.at(ev.rx_node);
    LoraNode& rx = nodes_.at(ev.rx_node);

    if (rx.cfg.radio.spreading_factor != arr.sf) {
      return;  // receiver is not listening on this SF; orthogonal
    }
    // Half duplex: a node transmitting during any part of the arrival
    // window cannot receive.
    for (const auto& [s, e] : rx.tx_intervals) {
      if (s < arr.end_s && arr.start_s < e) {
        trace_.add(now_, RRxFail{ev.rx_node, txn.id, arr.src, "busy",
                                 arr.sample.rssi_dbm, false});
        return;
      }
    }
    // Contention against every overlapping arrival at this receiver.
    std::vector<Transmission> contenders;
    contenders.push_back(Transmission{arr.tx_id, arr.sample.rssi_dbm, arr.sf,
                                      arr.start_s, arr.end_s});
    for (const ArrivalInfo& other : arrivals_at_[ev.rx_node]) {
      if (other.tx_id == arr.tx_id) {
        continue;
      }
      if (other.start_s < arr.end_s && arr.start_s < other.end_s) {
        contenders.push_back(Transmission{other.tx_id, other.sample.rssi_dbm,
                                          other.sf, other.start_s,
                                          other.end_s});
      }
    }
    const auto outcomes =
        collision_resolve(contenders, sc_.models.capture_threshold_db);
    const bool demod_ok = lora_demod_ok(arr.sample, arr.sf, sc_.models.demod);
    if (outcomes.front() == TxOutcome::collided) {
      trace_.add(now_, RRxFail{ev.rx_node, txn.id, arr.src, "collision",
                               arr.sample.rssi_dbm, demod_ok});
      return;
    }
    if (!demod_ok) {
      trace_.add(now_, RRxFail{ev.rx_node, txn.id, arr.src, "demod",
                               arr.sample.rssi_dbm, false});
      return;
    }
    trace_.add(now_, RRxOk{ev.rx_node, txn.id, arr.src, txn.frame.seq,
                           txn.frame.is_ack() ? 'a' : 'd',
                           arr.sample.rssi_dbm, arr.sample.snr_db,
                           arr.sample.distance_m, arr.sample.los});
    rx_rssi_context_ = arr.sample.rssi_dbm;
    MacStep step = mac_transition(rx.cfg, std::move(rx.mac),
                                  MacRx{txn.frame}, now_);
    rx.mac = std::move(step.state);
    apply_mac_actions(rx, step.actions);
  }

  void apply_mac_actions(LoraNode& node, const std::vector<MacAction>& actions,
                         bool skip_drops = false) {
    for (const MacAction& action : actions) {
      if (const auto* tx = std::get_if<MacStartTx>(&action)) {
        Txn txn;
        txn.id = next_tx_id_++;
        txn.node = node.id;
        txn.frame = tx->frame;
        txn.sf = node.cfg.radio.spreading_factor;
        txn.start_s = tx->at_time;
        txn.end_s =
            tx->at_time + lora_airtime_s(node.cfg.radio,
                                         static_cast<int>(
                                             tx->frame.payload.size()));
        const uint64_t id = txn.id;
        const double at = txn.start_s;
        txns_.emplace(id, std::move(txn));
        push(at, EvTxBegin{id});
      } else if (const auto* timer = std::get_if<MacSetTimer>(&action)) {
        push(timer->at_time, EvMacTimer{node.id, timer->generation});
      } else if (const auto* up = std::get_if<MacDeliverUp>(&action)) {
        trace_.add(now_, RDeliverUp{node.id, up->src, up->seq,
                                    static_cast<int>(up->payload.size())});
        if (node.is_bs) {
          relay_payload(up->src, up->seq, up->payload);
        }
      } else if (const auto* drop = std::get_if<MacDropNotice>(&action)) {
        if (skip_drops) {
          continue;  // already logged by the enqueue path
        }
        if (drop->reason == MacDropReason::retries_exhausted) {
          resolve_drop(node.id, drop->frame.seq, "retries_exhausted");
        } else {
          trace_.add(now_, RNote{node.id, to_string(drop->reason)});
        }
      } else if (const auto* note = std::get_if<MacTraceNote>(&action)) {
        trace_.add(now_, RNote{node.id, note->note});
      }
    }
  }

  void prune_history(LoraNode& node) {
    const double horizon = now_ - 30.0;
    std::erase_if(node.tx_intervals,
                  [&](const auto& iv) { return iv.second < horizon; });
    auto& arrivals = arrivals_at_[node.id];
    std::erase_if(arrivals,
                  [&](const ArrivalInfo& a) { return a.end_s < horizon; });
  }

  // --- Relay + backhaul side ---------------------------------------------

  void relay_payload(uint16_t origin, uint8_t seq,
                     const std::vector<uint8_t>& payload) {
    const RelayDatagram dgram =
        encapsulate(payload, sc_.tier2_bs.id, origin, seq, rx_rssi_context_,
                    now_);
    const uint64_t tick = tick_for_relay(origin, seq);
    const UePhase before = bh_.phase;
    UeStep step =
        ue_transition(bh_cfg_, std::move(bh_), UeEnqueue{dgram}, now_);
    bh_ = std::move(step.state);
    bool accepted = true;
    for (const UeAction& a : step.actions) {
      if (std::holds_alternative<UeDropNotice>(a)) {
        accepted = false;
      }
    }
    if (accepted) {
      bh_ticks_.push_back(tick);
      trace_.add(now_, RRelayEnqueue{sc_.tier2_bs.id, origin, seq,
                                     bh_.pending.size()});
    } else {
      mark_dropped(origin, tick);
      trace_.add(now_, RPayloadDrop{origin, tick, seq, "bh_queue_full"});
    }
    apply_ue_actions(step.actions, before);
  }

  void handle(const EvLinkEval&) {
    const Position bs = sc_.tier2_bs.position;
    const NbIotRadioParams& link = sc_.tier2_bs.nbiot;
    PathLossModel mean_model = sc_.models.path_loss;
    mean_model.shadowing_sigma_db = 0.0;
    const double cl = coupling_loss_db(bs, link, sc_.terrain, mean_model);
    const double dl_rssi =
        link.enb_tx_power_dbm + link.enb_antenna_gain_dbi +
        link.antenna_gain_dbi -
        path_loss_db(mean_model, bs, link.enb_position, sc_.terrain,
                     link.carrier_hz);
    const NbIotMetrics metrics =
        nbiot_metrics(dl_rssi, sc_.models.nbiot_noise_figure_db);
    trace_.add(now_, RBhLinkEval{cl, metrics.rsrp_dbm, cl <= link.mcl_db});
    apply_ue_step(
        ue_transition(bh_cfg_, bh_, UeLinkEval{cl, dl_rssi}, now_), now_);
  }

  void handle(const EvUeTimer& ev) {
    apply_ue_step(
        ue_transition(bh_cfg_, bh_, UeTimer{ev.generation}, now_), now_);
  }

  void handle(const EvBhTxDone& ev) {
    if (ev.epoch != bh_epoch_) {
      return;  // superseded transmission (link dropped and restarted)
    }
    apply_ue_step(ue_transition(bh_cfg_, bh_, UeTxDone{}, now_), now_);
  }

  void apply_ue_step(UeStep step, double) {
    const UePhase before = bh_.phase;
    bh_ = std::move(step.state);
    apply_ue_actions(step.actions, before);
  }

  void apply_ue_actions(const std::vector<UeAction>& actions,
                        UePhase phase_before) {
    if (bh_.phase != phase_before) {
      trace_.add(now_, RBhPhase{to_string(bh_.phase)});
    }
    for (const UeAction& action : actions) {
      if (const auto* timer = std::get_if<UeSetTimer>(&action)) {
        push(timer->at_time, EvUeTimer{timer->generation});
      } else if (const auto* tx = std::get_if<UeStartTx>(&action)) {
        trace_.add(now_, RBhTxStart{tx->datagram.origin_src,
                                    tx->datagram.origin_seq, tx->wire_bytes,
                                    tx->duration_s});
        push(now_ + tx->duration_s, EvBhTxDone{++bh_epoch_});
      } else if (const auto* done = std::get_if<UeTxComplete>(&action)) {
        deliver_at_sink(done->datagram);
      } else if (const auto* note = std::get_if<UeTraceNote>(&action)) {
        trace_.add(now_, RNote{sc_.tier2_bs.id, note->note});
      }
      // UeDropNotice handled inline by relay_payload.
    }
  }

  void deliver_at_sink(const RelayDatagram& dgram) {
    uint64_t tick = 0;
    if (!bh_ticks_.empty()) {
      tick = bh_ticks_.front();
      bh_ticks_.pop_front();
    }
    mark_delivered(dgram.origin_src, tick);
    trace_.add(now_, RDelivered{dgram.origin_src, tick, dgram.origin_seq,
                                static_cast<int>(dgram.payload.size())});
    const std::vector<uint8_t> bytes = datagram_encode(dgram);
    if (emitter_) {
      emitter_->send(bytes);
    }
    if (opts_.on_datagram) {
      opts_.on_datagram(dgram, bytes);
    }
  }

  // --- Payload accounting --------------------------------------------------

  uint64_t tick_for_relay(uint16_t origin, uint8_t seq) {
    auto it = outstanding_.find(origin);
    if (it == outstanding_.end()) {
      return 0;
    }
    for (Outstanding& o : it->second) {
      if (o.seq == seq && !o.relayed) {
        o.relayed = true;
        return o.tick;
      }
    }
    return 0;
  }

  void mark_delivered(uint16_t origin, uint64_t tick) {
    auto it = outstanding_.find(origin);
    if (it == outstanding_.end()) {
      return;
    }
    for (Outstanding& o : it->second) {
      if (o.tick == tick && !o.delivered) {
        o.delivered = true;
        return;
      }
    }
  }

  void mark_dropped(uint16_t origin, uint64_t tick) {
    auto it = outstanding_.find(origin);
    if (it == outstanding_.end()) {
      return;
    }
    for (Outstanding& o : it->second) {
      if (o.tick == tick) {
        o.dropped = true;
        return;
      }
    }
  }

  void resolve_drop(uint16_t ue, uint8_t seq, const std::string& reason) {
    auto it = outstanding_.find(ue);
    if (it == outstanding_.end()) {
      return;
    }
    for (Outstanding& o : it->second) {
      if (o.seq == seq && !o.dropped && !o.delivered) {
        o.dropped = true;
        trace_.add(now_, RPayloadDrop{ue, o.tick, seq, reason});
        return;
      }
    }
  }

  void flush_unresolved() {
    now_ = duration_;
    for (auto& [ue, list] : outstanding_) {
      for (Outstanding& o : list) {
        if (!o.delivered && !o.dropped) {
          o.dropped = true;
          trace_.add(duration_, RPayloadDrop{ue, o.tick, o.seq, "sim_end"});
        }
      }
    }
  }

  const Scenario& sc_;
  const RunOptions& opts_;
  double duration_ = 0.0;
  uint64_t seed_ = 0;
  double now_ = 0.0;

  std::map<uint16_t, LoraNode> nodes_;
  std::map<uint64_t, Txn> txns_;
  std::map<uint16_t, std::vector<ArrivalInfo>> arrivals_at_;

  UeState bh_;
  BackhaulConfig bh_cfg_;
  uint64_t bh_epoch_ = 0;
  std::deque<uint64_t> bh_ticks_;

  std::map<uint16_t, std::deque<Outstanding>> outstanding_;
  double rx_rssi_context_ = 0.0;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  uint64_t event_seq_ = 0;
  uint64_t next_tx_id_ = 1;

  Trace trace_;
  std::optional<UdpEmitter> emitter_;
};

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& options) {
  Sim sim(scenario, options);
  return sim.run_all();
}

}  // namespace t2sim
