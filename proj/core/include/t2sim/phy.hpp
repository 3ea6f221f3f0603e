#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "t2sim/geo.hpp"
#include "t2sim/radio.hpp"

namespace t2sim {

/// One evaluated radio link.
struct LinkSample {
  double rssi_dbm = 0.0;
  double snr_db = 0.0;
  double path_loss_db = 0.0;
  double distance_m = 0.0;
  bool los = true;
};

/// Downlink quality metrics of an unloaded single NB-IoT cell. All reference
/// signal power sits in 12 subcarriers, hence rsrp = rssi - 10*log10(12) and
/// rsrq = rsrp - rssi is constant.
struct NbIotMetrics {
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  double rssi_dbm = 0.0;
  double snr_db = 0.0;
};

enum class PathLossVariant { free_space, log_distance, air_to_ground };

/// Propagation model selection plus its parameters. The log-distance
/// exponent is the calibration target that reproduces the measured LoRa
/// range; the air-to-ground variant blends LoS/NLoS excess by elevation
/// angle for vertical-vs-grazing geometries that one exponent cannot cover.
struct PathLossModel {
  PathLossVariant variant = PathLossVariant::free_space;
  double exponent = 2.0;  // log_distance n
  double d0_m = 1.0;      // log_distance reference distance
  double atg_a = 4.88;    // suburban defaults
  double atg_b = 0.43;
  double eta_los_db = 0.1;
  double eta_nlos_db = 21.0;
  double nlos_excess_db = 21.0;  // added when terrain blocks the ray
  double shadowing_sigma_db = 0.0;

  bool operator==(const PathLossModel&) const = default;
};

/// Per-SF reception cutoffs (SX1276 family, index 0 = SF7). Both the RSSI
/// sensitivity and the demodulator SNR floor must hold.
struct DemodThresholds {
  std::array<double, 6> sensitivity_dbm{-123.0, -126.0, -129.0,
                                        -132.0, -134.5, -137.0};
  std::array<double, 6> snr_min_db{-7.5, -10.0, -12.5, -15.0, -17.5, -20.0};

  double sensitivity(int sf) const { return sensitivity_dbm[sf - 7]; }
  double snr_min(int sf) const { return snr_min_db[sf - 7]; }

  bool operator==(const DemodThresholds&) const = default;
};

/// Total on-air time of one LoRa frame, preamble included. Low data rate
/// optimization switches on automatically for SF11/SF12 at 125 kHz.
/// Throws on invalid SF/BW combinations or payload_len outside 0..255.
double lora_airtime_s(const LoRaRadioParams& p, int payload_len);

/// Thermal noise floor: -174 dBm/Hz + 10*log10(BW) + NF.
double noise_floor_dbm(double bandwidth_hz, double noise_figure_db);

double free_space_path_loss_db(double distance_m, double frequency_hz);

struct LosResult {
  bool los = true;
  double max_obstruction_m = 0.0;  // deepest terrain intrusion into the ray
};

/// Samples the straight segment between the two absolute endpoints at
/// <= cell_size/2 spacing. Blockage requires ground strictly above the
/// segment, so a ray grazing a crest still counts as line of sight.
/// Throws when either endpoint lies outside a bounded terrain.
LosResult terrain_los(const Position& a, const Position& b, const Terrain& t);

/// Deterministic path loss in dB. shadowing_db is the caller-supplied
/// log-normal draw (pass 0 for the mean); terrain blockage adds the model's
/// NLoS excess. Throws on zero distance.
double path_loss_db(const PathLossModel& model, const Position& tx,
                    const Position& rx, const Terrain& terrain,
                    double frequency_hz, double shadowing_db = 0.0);

bool lora_demod_ok(const LinkSample& s, int sf,
                   const DemodThresholds& thresholds = {});

/// One transmission as seen by a single receiver on a single frequency.
struct Transmission {
  uint64_t id = 0;
  double rssi_dbm = 0.0;
  int sf = 7;
  double start_s = 0.0;
  double end_s = 0.0;
};

enum class TxOutcome { ok, collided };

/// Capture-model contention: a transmission survives overlap with same-SF
/// interferers only if it exceeds the strongest of them by the capture
/// threshold. Different SFs are treated as orthogonal.
std::vector<TxOutcome> collision_resolve(const std::vector<Transmission>& txs,
                                         double capture_threshold_db = 6.0);

/// Maps carrier RSSI to RSRP/RSRQ/SNR under the unloaded single-cell model
/// (one 180 kHz PRB of noise bandwidth).
NbIotMetrics nbiot_metrics(double rssi_dbm, double noise_figure_db = 5.0);

/// Full link evaluation helper used by the engine, the experiment sweeps and
/// the placement objective. Distance is clamped to max(d, d0) so sweep rows
/// directly under the transmitter stay defined.
LinkSample evaluate_link(const PathLossModel& model, const Position& tx,
                         const Position& rx, const Terrain& terrain,
                         double frequency_hz, double tx_power_dbm,
                         double total_gain_dbi, double noise_bandwidth_hz,
                         double noise_figure_db, double shadowing_db = 0.0);

}  // namespace t2sim
