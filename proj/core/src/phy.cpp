#include "t2sim/phy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace t2sim {

namespace {

constexpr double kFsplConst = -147.55;  // 20*log10(4*pi/c)

void check_lora_params(const LoRaRadioParams& p) {
  if (p.spreading_factor < 7 || p.spreading_factor > 12) {
    throw std::invalid_argument("spreading factor must be in 7..12");
  }
  if (p.bandwidth_hz != 125e3 && p.bandwidth_hz != 250e3 &&
      p.bandwidth_hz != 500e3) {
    throw std::invalid_argument("bandwidth must be 125, 250 or 500 kHz");
  }
}

double air_to_ground_loss_db(const PathLossModel& m, double fspl_db,
                             double horiz_m, double dz_m, bool blocked) {
  if (blocked) {
    return fspl_db + m.eta_nlos_db;
  }
  const double theta_deg =
      std::atan2(std::abs(dz_m), horiz_m) * 180.0 / std::numbers::pi;
  const double p_los =
      1.0 / (1.0 + m.atg_a * std::exp(-m.atg_b * (theta_deg - m.atg_a)));
  return p_los * (fspl_db + m.eta_los_db) +
         (1.0 - p_los) * (fspl_db + m.eta_nlos_db);
}

/// Loss along a fixed geometry; d_m is the (possibly clamped) distance.
double loss_for_geometry(const PathLossModel& model, double d_m,
                         double horiz_m, double dz_m, bool blocked,
                         double frequency_hz) {
  switch (model.variant) {
    case PathLossVariant::free_space: {
      double loss = free_space_path_loss_db(d_m, frequency_hz);
      return blocked ? loss + model.nlos_excess_db : loss;
    }
    case PathLossVariant::log_distance: {
      double loss = free_space_path_loss_db(model.d0_m, frequency_hz) +
                    10.0 * model.exponent * std::log10(d_m / model.d0_m);
      return blocked ? loss + model.nlos_excess_db : loss;
    }
    case PathLossVariant::air_to_ground: {
      const double fspl = free_space_path_loss_db(d_m, frequency_hz);
      return air_to_ground_loss_db(model, fspl, horiz_m, dz_m, blocked);
    }
  }
  throw std::logic_error("bad path loss variant");
}

}  // namespace

double lora_airtime_s(const LoRaRadioParams& p, int payload_len) {
  check_lora_params(p);
  if (payload_len < 0 || payload_len > 255) {
    throw std::invalid_argument("payload length must be in 0..255");
  }
  const int sf = p.spreading_factor;
  const double symbol_s = std::ldexp(1.0, sf) / p.bandwidth_hz;  // 2^SF / BW
  const bool ldro = (p.bandwidth_hz == 125e3 && sf >= 11);
  const int crc = p.crc_on ? 1 : 0;
  const int ih = p.explicit_header ? 0 : 1;
  const int cr = cr_denominator(p.coding_rate) - 4;  // 1..4

  // SX1276 datasheet symbol count, exact in integer arithmetic.
  const int numerator = 8 * payload_len - 4 * sf + 28 + 16 * crc - 20 * ih;
  const int denominator = 4 * (sf - (ldro ? 2 : 0));
  int blocks = 0;
  if (numerator > 0) {
    blocks = (numerator + denominator - 1) / denominator;
  }
  const int payload_symbols = 8 + blocks * (cr + 4);

  const double preamble_s = (p.preamble_symbols + 4.25) * symbol_s;
  return preamble_s + payload_symbols * symbol_s;
}

double noise_floor_dbm(double bandwidth_hz, double noise_figure_db) {
  if (bandwidth_hz <= 0.0) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double free_space_path_loss_db(double distance_m, double frequency_hz) {
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) +
         kFsplConst;
}

LosResult terrain_los(const Position& a, const Position& b, const Terrain& t) {
  if (!t.contains(a.x, a.y) || !t.contains(b.x, b.y)) {
    throw std::invalid_argument("position outside terrain bounds");
  }
  if (!t.bounded()) {
    return {true, 0.0};
  }
  const double alt_a = absolute_altitude_m(t, a);
  const double alt_b = absolute_altitude_m(t, b);
  const double horiz = horizontal_distance_m(a, b);
  const double step = t.cell_size_m() / 2.0;
  const int samples = std::max(1, static_cast<int>(std::ceil(horiz / step)));

  LosResult r;
  for (int i = 0; i <= samples; ++i) {
    const double f = static_cast<double>(i) / samples;
    const double x = a.x + f * (b.x - a.x);
    const double y = a.y + f * (b.y - a.y);
    const double ray_alt = alt_a + f * (alt_b - alt_a);
    const double ground = t.elevation_at(x, y);
    const double intrusion = ground - ray_alt;
    if (intrusion > 0.0) {  // strict: grazing the crest is still LoS
      r.los = false;
      r.max_obstruction_m = std::max(r.max_obstruction_m, intrusion);
    }
  }
  return r;
}

double path_loss_db(const PathLossModel& model, const Position& tx,
                    const Position& rx, const Terrain& terrain,
                    double frequency_hz, double shadowing_db) {
  const double d = distance3d_m(terrain, tx, rx);
  if (d <= 0.0) {
    throw std::invalid_argument("path loss undefined for zero distance");
  }
  const bool blocked = !terrain_los(tx, rx, terrain).los;
  const double dz =
      absolute_altitude_m(terrain, tx) - absolute_altitude_m(terrain, rx);
  return loss_for_geometry(model, d, horizontal_distance_m(tx, rx), dz,
                           blocked, frequency_hz) +
         shadowing_db;
}

bool lora_demod_ok(const LinkSample& s, int sf,
                   const DemodThresholds& thresholds) {
  if (sf < 7 || sf > 12) {
    throw std::invalid_argument("spreading factor must be in 7..12");
  }
  return s.rssi_dbm >= thresholds.sensitivity(sf) &&
         s.snr_db >= thresholds.snr_min(sf);
}

std::vector<TxOutcome> collision_resolve(const std::vector<Transmission>& txs,
                                         double capture_threshold_db) {
  std::vector<TxOutcome> out(txs.size(), TxOutcome::ok);
  for (size_t i = 0; i < txs.size(); ++i) {
    double strongest_interferer = -1e300;
    bool overlap = false;
    for (size_t j = 0; j < txs.size(); ++j) {
      if (i == j || txs[j].sf != txs[i].sf) {
        continue;  // different SF: orthogonal
      }
      if (txs[j].start_s < txs[i].end_s && txs[i].start_s < txs[j].end_s) {
        overlap = true;
        strongest_interferer = std::max(strongest_interferer, txs[j].rssi_dbm);
      }
    }
    if (overlap &&
        txs[i].rssi_dbm < strongest_interferer + capture_threshold_db) {
      out[i] = TxOutcome::collided;
    }
  }
  return out;
}

NbIotMetrics nbiot_metrics(double rssi_dbm, double noise_figure_db) {
  NbIotMetrics m;
  m.rssi_dbm = rssi_dbm;
  m.rsrp_dbm = rssi_dbm - 10.0 * std::log10(12.0);
  m.rsrq_db = m.rsrp_dbm - rssi_dbm;
  m.snr_db = rssi_dbm - noise_floor_dbm(180e3, noise_figure_db);
  return m;
}

LinkSample evaluate_link(const PathLossModel& model, const Position& tx,
                         const Position& rx, const Terrain& terrain,
                         double frequency_hz, double tx_power_dbm,
                         double total_gain_dbi, double noise_bandwidth_hz,
                         double noise_figure_db, double shadowing_db) {
  LinkSample s;
  const double d = distance3d_m(terrain, tx, rx);
  const bool blocked = !terrain_los(tx, rx, terrain).los;
  const double dz =
      absolute_altitude_m(terrain, tx) - absolute_altitude_m(terrain, rx);
  s.distance_m = std::max(d, model.d0_m);
  s.los = !blocked;
  s.path_loss_db =
      loss_for_geometry(model, s.distance_m, horizontal_distance_m(tx, rx),
                        dz, blocked, frequency_hz) +
      shadowing_db;
  s.rssi_dbm = tx_power_dbm + total_gain_dbi - s.path_loss_db;
  s.snr_db = s.rssi_dbm - noise_floor_dbm(noise_bandwidth_hz, noise_figure_db);
  return s;
}

}  // namespace t2sim
