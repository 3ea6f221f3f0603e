#pragma once

#include <stdexcept>
#include <string>

#include "t2sim/geo.hpp"

namespace t2sim {

enum class CodingRate { cr4_5, cr4_6, cr4_7, cr4_8 };

/// Denominator of the 4/x coding rate (5..8).
inline int cr_denominator(CodingRate cr) {
  switch (cr) {
    case CodingRate::cr4_5: return 5;
    case CodingRate::cr4_6: return 6;
    case CodingRate::cr4_7: return 7;
    case CodingRate::cr4_8: return 8;
  }
  throw std::logic_error("bad coding rate");
}

inline std::string to_string(CodingRate cr) {
  return "4/" + std::to_string(cr_denominator(cr));
}

inline CodingRate coding_rate_from_string(const std::string& s) {
  if (s == "4/5") return CodingRate::cr4_5;
  if (s == "4/6") return CodingRate::cr4_6;
  if (s == "4/7") return CodingRate::cr4_7;
  if (s == "4/8") return CodingRate::cr4_8;
  throw std::invalid_argument("coding rate must be one of 4/5, 4/6, 4/7, 4/8");
}

/// Raw LoRa modem configuration (SX1276/78 family, EU868 defaults).
struct LoRaRadioParams {
  double frequency_hz = 868.1e6;
  double bandwidth_hz = 125e3;  // 125k, 250k or 500k
  int spreading_factor = 7;     // 7..12
  CodingRate coding_rate = CodingRate::cr4_5;
  double tx_power_dbm = 14.0;   // EU868 ERP cap
  double antenna_gain_dbi = 0.0;
  int preamble_symbols = 8;
  bool explicit_header = true;
  bool crc_on = true;

  bool operator==(const LoRaRadioParams&) const = default;
};

/// NB-IoT backhaul link configuration. Describes both ends: the UE module
/// riding on the Tier 2 BS drone (tx_power_dbm, antenna_gain_dbi, mcl_db)
/// and the serving macro eNB (enb_* fields).
struct NbIotRadioParams {
  double tx_power_dbm = 23.0;
  double antenna_gain_dbi = 0.0;
  double carrier_hz = 868e6;
  double mcl_db = 164.0;  // 144 dB LTE MCL + 20 dB NB-IoT margin
  Position enb_position{};
  double enb_tx_power_dbm = 43.0;
  double enb_antenna_gain_dbi = 0.0;

  bool operator==(const NbIotRadioParams&) const = default;
};

}  // namespace t2sim
