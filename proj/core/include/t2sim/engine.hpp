#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "t2sim/backhaul.hpp"
#include "t2sim/scenario.hpp"
#include "t2sim/trace.hpp"

namespace t2sim {

/// Destination for live datagram emission: every datagram that reaches the
/// Tier 1 sink is also sent as a real UDP packet (wire layout of
/// RelayDatagram) so an external collector can consume it.
struct LiveSink {
  std::string host;
  uint16_t port = 0;
};

struct RunOptions {
  std::optional<LiveSink> live_sink;
  /// Test hook: observes every sink-delivered datagram and its wire bytes.
  std::function<void(const RelayDatagram&, std::span<const uint8_t>)>
      on_datagram;
};

struct RunResult {
  Trace trace;
  SummaryStats stats;
};

/// Runs the scenario over [0, duration]. Strictly single-threaded and
/// deterministic: an identical scenario (seed included) serializes to a
/// byte-identical trace. Throws ScenarioError when validation fails.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace t2sim
