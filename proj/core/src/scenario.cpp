#include "t2sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "t2sim/mac.hpp"
#include "t2sim/util.hpp"

namespace t2sim {

using nlohmann::json;

namespace {

/// Strict-mode cursor: every lookup carries the field path for diagnostics
/// and unknown keys are rejected.
struct Ctx {
  const json& j;
  std::string path;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ScenarioError((path.empty() ? "scenario" : path) + ": " + msg);
  }

  void require_object() const {
    if (!j.is_object()) {
      fail("expected an object");
    }
  }

  void check_keys(std::initializer_list<const char*> allowed) const {
    require_object();
    for (const auto& item : j.items()) {
      const std::string& key = item.key();
      bool known = false;
      for (const char* a : allowed) {
        if (key == a) {
          known = true;
          break;
        }
      }
      if (!known) {
        fail("unknown field '" + key + "'");
      }
    }
  }

  bool has(const char* key) const { return j.is_object() && j.contains(key); }

  Ctx child(const char* key) const {
    return Ctx{j.at(key), path.empty() ? key : path + "." + key};
  }

  Ctx element(size_t i) const {
    return Ctx{j.at(i), path + "[" + std::to_string(i) + "]"};
  }

  template <typename T>
  T get(const char* key) const {
    if (!has(key)) {
      fail(std::string("missing required field '") + key + "'");
    }
    try {
      return j.at(key).get<T>();
    } catch (const json::exception&) {
      child(key).fail("wrong type");
    }
  }

  template <typename T>
  T opt(const char* key, T fallback) const {
    if (!has(key)) {
      return fallback;
    }
    try {
      return j.at(key).get<T>();
    } catch (const json::exception&) {
      child(key).fail("wrong type");
    }
  }
};

Position parse_position(const Ctx& c) {
  c.check_keys({"x", "y", "z_agl"});
  Position p;
  p.x = c.get<double>("x");
  p.y = c.get<double>("y");
  p.z_agl = c.opt<double>("z_agl", 0.0);
  return p;
}

json position_to_json(const Position& p) {
  return json{{"x", p.x}, {"y", p.y}, {"z_agl", p.z_agl}};
}

Terrain parse_terrain(const Ctx& c) {
  c.check_keys({"width_cells", "height_cells", "cell_size_m", "elevation"});
  const int w = c.get<int>("width_cells");
  const int h = c.get<int>("height_cells");
  const double cell = c.get<double>("cell_size_m");
  auto elev = c.get<std::vector<double>>("elevation");
  try {
    return Terrain::from_grid(w, h, cell, std::move(elev));
  } catch (const std::invalid_argument& e) {
    c.fail(e.what());
  }
}

json terrain_to_json(const Terrain& t) {
  return json{{"width_cells", t.width_cells()},
              {"height_cells", t.height_cells()},
              {"cell_size_m", t.cell_size_m()},
              {"elevation", t.elevation()}};
}

LoRaRadioParams parse_lora(const Ctx& c, const LoRaRadioParams& base = {}) {
  c.check_keys({"frequency_hz", "bandwidth_hz", "spreading_factor",
                "coding_rate", "tx_power_dbm", "antenna_gain_dbi",
                "preamble_symbols", "explicit_header", "crc_on"});
  LoRaRadioParams p = base;
  p.frequency_hz = c.opt<double>("frequency_hz", p.frequency_hz);
  p.bandwidth_hz = c.opt<double>("bandwidth_hz", p.bandwidth_hz);
  p.spreading_factor = c.opt<int>("spreading_factor", p.spreading_factor);
  if (c.has("coding_rate")) {
    try {
      p.coding_rate = coding_rate_from_string(c.get<std::string>("coding_rate"));
    } catch (const std::invalid_argument& e) {
      c.child("coding_rate").fail(e.what());
    }
  }
  p.tx_power_dbm = c.opt<double>("tx_power_dbm", p.tx_power_dbm);
  p.antenna_gain_dbi = c.opt<double>("antenna_gain_dbi", p.antenna_gain_dbi);
  p.preamble_symbols = c.opt<int>("preamble_symbols", p.preamble_symbols);
  p.explicit_header = c.opt<bool>("explicit_header", p.explicit_header);
  p.crc_on = c.opt<bool>("crc_on", p.crc_on);
  return p;
}

json lora_to_json(const LoRaRadioParams& p) {
  return json{{"frequency_hz", p.frequency_hz},
              {"bandwidth_hz", p.bandwidth_hz},
              {"spreading_factor", p.spreading_factor},
              {"coding_rate", to_string(p.coding_rate)},
              {"tx_power_dbm", p.tx_power_dbm},
              {"antenna_gain_dbi", p.antenna_gain_dbi},
              {"preamble_symbols", p.preamble_symbols},
              {"explicit_header", p.explicit_header},
              {"crc_on", p.crc_on}};
}

NbIotRadioParams parse_nbiot(const Ctx& c, const NbIotRadioParams& base) {
  c.check_keys({"tx_power_dbm", "antenna_gain_dbi", "carrier_hz", "mcl_db",
                "enb_position", "enb_tx_power_dbm", "enb_antenna_gain_dbi"});
  NbIotRadioParams p = base;
  p.tx_power_dbm = c.opt<double>("tx_power_dbm", p.tx_power_dbm);
  p.antenna_gain_dbi = c.opt<double>("antenna_gain_dbi", p.antenna_gain_dbi);
  p.carrier_hz = c.opt<double>("carrier_hz", p.carrier_hz);
  p.mcl_db = c.opt<double>("mcl_db", p.mcl_db);
  if (c.has("enb_position")) {
    p.enb_position = parse_position(c.child("enb_position"));
  }
  p.enb_tx_power_dbm = c.opt<double>("enb_tx_power_dbm", p.enb_tx_power_dbm);
  p.enb_antenna_gain_dbi =
      c.opt<double>("enb_antenna_gain_dbi", p.enb_antenna_gain_dbi);
  return p;
}

json nbiot_to_json(const NbIotRadioParams& p) {
  return json{{"tx_power_dbm", p.tx_power_dbm},
              {"antenna_gain_dbi", p.antenna_gain_dbi},
              {"carrier_hz", p.carrier_hz},
              {"mcl_db", p.mcl_db},
              {"enb_position", position_to_json(p.enb_position)},
              {"enb_tx_power_dbm", p.enb_tx_power_dbm},
              {"enb_antenna_gain_dbi", p.enb_antenna_gain_dbi}};
}

MissionPlan parse_mission(const Ctx& c) {
  c.check_keys({"waypoints"});
  if (!c.has("waypoints")) {
    c.fail("missing required field 'waypoints'");
  }
  const Ctx wps = c.child("waypoints");
  if (!wps.j.is_array()) {
    wps.fail("expected an array");
  }
  MissionPlan m;
  for (size_t i = 0; i < wps.j.size(); ++i) {
    const Ctx wc = wps.element(i);
    wc.check_keys({"x", "y", "z_agl", "t_s"});
    Waypoint w;
    w.position.x = wc.get<double>("x");
    w.position.y = wc.get<double>("y");
    w.position.z_agl = wc.opt<double>("z_agl", 0.0);
    w.t_s = wc.get<double>("t_s");
    m.waypoints.push_back(w);
  }
  return m;
}

json mission_to_json(const MissionPlan& m) {
  json wps = json::array();
  for (const Waypoint& w : m.waypoints) {
    wps.push_back(json{{"x", w.position.x},
                       {"y", w.position.y},
                       {"z_agl", w.position.z_agl},
                       {"t_s", w.t_s}});
  }
  return json{{"waypoints", std::move(wps)}};
}

PathLossModel parse_path_loss(const Ctx& c, double shadowing_sigma_db) {
  c.check_keys({"variant", "exponent", "d0_m", "atg_a", "atg_b", "eta_los_db",
                "eta_nlos_db", "nlos_excess_db"});
  PathLossModel m;
  const std::string variant = c.opt<std::string>("variant", "free_space");
  if (variant == "free_space") {
    m.variant = PathLossVariant::free_space;
  } else if (variant == "log_distance") {
    m.variant = PathLossVariant::log_distance;
  } else if (variant == "air_to_ground") {
    m.variant = PathLossVariant::air_to_ground;
  } else {
    c.child("variant").fail(
        "must be free_space, log_distance or air_to_ground");
  }
  m.exponent = c.opt<double>("exponent", m.exponent);
  m.d0_m = c.opt<double>("d0_m", m.d0_m);
  m.atg_a = c.opt<double>("atg_a", m.atg_a);
  m.atg_b = c.opt<double>("atg_b", m.atg_b);
  m.eta_los_db = c.opt<double>("eta_los_db", m.eta_los_db);
  m.eta_nlos_db = c.opt<double>("eta_nlos_db", m.eta_nlos_db);
  m.nlos_excess_db = c.opt<double>("nlos_excess_db", m.nlos_excess_db);
  m.shadowing_sigma_db = shadowing_sigma_db;
  return m;
}

json path_loss_to_json(const PathLossModel& m) {
  const char* variant = "free_space";
  if (m.variant == PathLossVariant::log_distance) variant = "log_distance";
  if (m.variant == PathLossVariant::air_to_ground) variant = "air_to_ground";
  return json{{"variant", variant},
              {"exponent", m.exponent},
              {"d0_m", m.d0_m},
              {"atg_a", m.atg_a},
              {"atg_b", m.atg_b},
              {"eta_los_db", m.eta_los_db},
              {"eta_nlos_db", m.eta_nlos_db},
              {"nlos_excess_db", m.nlos_excess_db}};
}

ModelsConfig parse_models(const Ctx& c) {
  c.check_keys({"path_loss", "shadowing_sigma_db", "capture_threshold_db",
                "lora_noise_figure_db", "nbiot_noise_figure_db",
                "sensitivity_dbm", "snr_threshold_db", "mac", "backhaul",
                "sync_traffic_phase"});
  ModelsConfig m;
  const double sigma = c.opt<double>("shadowing_sigma_db", 0.0);
  if (c.has("path_loss")) {
    m.path_loss = parse_path_loss(c.child("path_loss"), sigma);
  } else {
    m.path_loss.shadowing_sigma_db = sigma;
  }
  m.capture_threshold_db =
      c.opt<double>("capture_threshold_db", m.capture_threshold_db);
  m.lora_noise_figure_db =
      c.opt<double>("lora_noise_figure_db", m.lora_noise_figure_db);
  m.nbiot_noise_figure_db =
      c.opt<double>("nbiot_noise_figure_db", m.nbiot_noise_figure_db);
  if (c.has("sensitivity_dbm")) {
    auto v = c.get<std::vector<double>>("sensitivity_dbm");
    if (v.size() != 6) {
      c.child("sensitivity_dbm").fail("expected 6 values (SF7..SF12)");
    }
    std::copy(v.begin(), v.end(), m.demod.sensitivity_dbm.begin());
  }
  if (c.has("snr_threshold_db")) {
    auto v = c.get<std::vector<double>>("snr_threshold_db");
    if (v.size() != 6) {
      c.child("snr_threshold_db").fail("expected 6 values (SF7..SF12)");
    }
    std::copy(v.begin(), v.end(), m.demod.snr_min_db.begin());
  }
  if (c.has("mac")) {
    const Ctx mc = c.child("mac");
    mc.check_keys({"max_retries", "ack_turnaround_s", "processing_guard_s",
                   "max_backoff_slots", "queue_capacity", "backoff_disabled"});
    m.mac.max_retries = mc.opt<int>("max_retries", m.mac.max_retries);
    m.mac.ack_turnaround_s =
        mc.opt<double>("ack_turnaround_s", m.mac.ack_turnaround_s);
    m.mac.processing_guard_s =
        mc.opt<double>("processing_guard_s", m.mac.processing_guard_s);
    m.mac.max_backoff_slots =
        mc.opt<int>("max_backoff_slots", m.mac.max_backoff_slots);
    m.mac.queue_capacity = mc.opt<int>("queue_capacity", m.mac.queue_capacity);
    m.mac.backoff_disabled =
        mc.opt<bool>("backoff_disabled", m.mac.backoff_disabled);
  }
  if (c.has("backhaul")) {
    const Ctx bc = c.child("backhaul");
    bc.check_keys({"attach_latency_s", "reattach_backoff_s", "base_rate_bps",
                   "queue_capacity", "udp_ip_overhead", "link_eval_period_s"});
    m.backhaul.attach_latency_s =
        bc.opt<double>("attach_latency_s", m.backhaul.attach_latency_s);
    m.backhaul.reattach_backoff_s =
        bc.opt<double>("reattach_backoff_s", m.backhaul.reattach_backoff_s);
    m.backhaul.base_rate_bps =
        bc.opt<double>("base_rate_bps", m.backhaul.base_rate_bps);
    m.backhaul.queue_capacity = static_cast<size_t>(
        bc.opt<int>("queue_capacity",
                    static_cast<int>(m.backhaul.queue_capacity)));
    m.backhaul.udp_ip_overhead =
        bc.opt<bool>("udp_ip_overhead", m.backhaul.udp_ip_overhead);
    m.backhaul.link_eval_period_s =
        bc.opt<double>("link_eval_period_s", m.backhaul.link_eval_period_s);
  }
  m.sync_traffic_phase =
      c.opt<bool>("sync_traffic_phase", m.sync_traffic_phase);
  return m;
}

json models_to_json(const ModelsConfig& m) {
  return json{
      {"path_loss", path_loss_to_json(m.path_loss)},
      {"shadowing_sigma_db", m.path_loss.shadowing_sigma_db},
      {"capture_threshold_db", m.capture_threshold_db},
      {"lora_noise_figure_db", m.lora_noise_figure_db},
      {"nbiot_noise_figure_db", m.nbiot_noise_figure_db},
      {"sensitivity_dbm", m.demod.sensitivity_dbm},
      {"snr_threshold_db", m.demod.snr_min_db},
      {"mac",
       json{{"max_retries", m.mac.max_retries},
            {"ack_turnaround_s", m.mac.ack_turnaround_s},
            {"processing_guard_s", m.mac.processing_guard_s},
            {"max_backoff_slots", m.mac.max_backoff_slots},
            {"queue_capacity", m.mac.queue_capacity},
            {"backoff_disabled", m.mac.backoff_disabled}}},
      {"backhaul",
       json{{"attach_latency_s", m.backhaul.attach_latency_s},
            {"reattach_backoff_s", m.backhaul.reattach_backoff_s},
            {"base_rate_bps", m.backhaul.base_rate_bps},
            {"queue_capacity", static_cast<int>(m.backhaul.queue_capacity)},
            {"udp_ip_overhead", m.backhaul.udp_ip_overhead},
            {"link_eval_period_s", m.backhaul.link_eval_period_s}}},
      {"sync_traffic_phase", m.sync_traffic_phase}};
}

std::pair<int, int> line_col_at(const std::string& text, size_t byte) {
  int line = 1;
  int col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Scenario parse_scenario(const std::string& json_text,
                        const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col_at(json_text, e.byte);
    throw ScenarioError(origin + ":" + std::to_string(line) + ":" +
                        std::to_string(col) + ": " + e.what());
  }

  const Ctx c{root, ""};
  c.check_keys({"description", "terrain", "tier1_enb", "tier2_bs",
                "ue_drones", "models", "sim", "ue_region", "placement"});

  Scenario s;
  s.description = c.opt<std::string>("description", "");
  if (c.has("terrain")) {
    s.terrain = parse_terrain(c.child("terrain"));
  }
  if (c.has("tier1_enb")) {
    s.tier1_enb = parse_nbiot(c.child("tier1_enb"), NbIotRadioParams{});
  }

  if (!c.has("tier2_bs")) {
    c.fail("missing required field 'tier2_bs'");
  }
  {
    const Ctx bc = c.child("tier2_bs");
    bc.check_keys({"id", "position", "payload_mass_kg", "lora", "nbiot"});
    const int raw_bs_id = bc.opt<int>("id", 0);
    if (raw_bs_id < 0 || raw_bs_id > 0xFFFF) {
      bc.child("id").fail("node id must fit in 16 bits");
    }
    s.tier2_bs.id = static_cast<uint16_t>(raw_bs_id);
    if (!bc.has("position")) {
      bc.fail("missing required field 'position'");
    }
    s.tier2_bs.position = parse_position(bc.child("position"));
    s.tier2_bs.payload_mass_kg = bc.opt<double>("payload_mass_kg", 0.0);
    if (bc.has("lora")) {
      s.tier2_bs.lora = parse_lora(bc.child("lora"));
    }
    // The BS-side NB-IoT module inherits the eNB end of the link from
    // tier1_enb unless overridden.
    NbIotRadioParams bs_nbiot_base;
    bs_nbiot_base.carrier_hz = s.tier1_enb.carrier_hz;
    bs_nbiot_base.enb_position = s.tier1_enb.enb_position;
    bs_nbiot_base.enb_tx_power_dbm = s.tier1_enb.enb_tx_power_dbm;
    bs_nbiot_base.enb_antenna_gain_dbi = s.tier1_enb.enb_antenna_gain_dbi;
    bs_nbiot_base.mcl_db = s.tier1_enb.mcl_db;
    if (bc.has("nbiot")) {
      s.tier2_bs.nbiot = parse_nbiot(bc.child("nbiot"), bs_nbiot_base);
    } else {
      s.tier2_bs.nbiot = bs_nbiot_base;
    }
  }

  if (c.has("ue_drones")) {
    const Ctx uc = c.child("ue_drones");
    if (!uc.j.is_array()) {
      uc.fail("expected an array");
    }
    for (size_t i = 0; i < uc.j.size(); ++i) {
      const Ctx ec = uc.element(i);
      ec.check_keys({"id", "mission", "lora", "traffic", "max_speed_mps"});
      UeDrone ue;
      const int raw_id = ec.get<int>("id");
      if (raw_id < 0 || raw_id > 0xFFFF) {
        ec.child("id").fail("node id must fit in 16 bits");
      }
      ue.id = static_cast<uint16_t>(raw_id);
      if (!ec.has("mission")) {
        ec.fail("missing required field 'mission'");
      }
      ue.mission = parse_mission(ec.child("mission"));
      if (ec.has("lora")) {
        ue.lora = parse_lora(ec.child("lora"));
      }
      if (ec.has("traffic")) {
        const Ctx tc = ec.child("traffic");
        tc.check_keys({"period_s", "payload_bytes"});
        ue.traffic.period_s = tc.opt<double>("period_s", 10.0);
        ue.traffic.payload_bytes = tc.opt<int>("payload_bytes", 20);
      }
      ue.max_speed_mps = ec.opt<double>("max_speed_mps", 15.0);
      s.ue_drones.push_back(std::move(ue));
    }
  }

  if (c.has("models")) {
    s.models = parse_models(c.child("models"));
  }
  if (c.has("sim")) {
    const Ctx sc = c.child("sim");
    sc.check_keys({"duration_s", "seed"});
    s.sim.duration_s = sc.opt<double>("duration_s", 600.0);
    s.sim.seed = sc.opt<uint64_t>("seed", 1);
  }
  if (c.has("ue_region")) {
    const Ctx rc = c.child("ue_region");
    rc.check_keys({"x_min", "y_min", "x_max", "y_max"});
    Region r;
    r.x_min = rc.get<double>("x_min");
    r.y_min = rc.get<double>("y_min");
    r.x_max = rc.get<double>("x_max");
    r.y_max = rc.get<double>("y_max");
    s.ue_region = r;
  }
  if (c.has("placement")) {
    const Ctx pc = c.child("placement");
    pc.check_keys({"max_altitude_m"});
    s.placement.max_altitude_m = pc.opt<double>("max_altitude_m", 120.0);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open scenario file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path.string());
  auto violations = validate_scenario(s);
  if (!violations.empty()) {
    std::string msg = path.string() + ": invalid scenario:";
    for (const Violation& v : violations) {
      msg += "\n  " + v.path + ": " + v.message;
    }
    throw ScenarioError(msg, std::move(violations));
  }
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json root;
  root["description"] = s.description;
  if (s.terrain.bounded()) {
    root["terrain"] = terrain_to_json(s.terrain);
  }
  root["tier1_enb"] = nbiot_to_json(s.tier1_enb);
  root["tier2_bs"] = json{{"id", s.tier2_bs.id},
                          {"position", position_to_json(s.tier2_bs.position)},
                          {"payload_mass_kg", s.tier2_bs.payload_mass_kg},
                          {"lora", lora_to_json(s.tier2_bs.lora)},
                          {"nbiot", nbiot_to_json(s.tier2_bs.nbiot)}};
  json ues = json::array();
  for (const UeDrone& ue : s.ue_drones) {
    ues.push_back(json{{"id", ue.id},
                       {"mission", mission_to_json(ue.mission)},
                       {"lora", lora_to_json(ue.lora)},
                       {"traffic",
                        json{{"period_s", ue.traffic.period_s},
                             {"payload_bytes", ue.traffic.payload_bytes}}},
                       {"max_speed_mps", ue.max_speed_mps}});
  }
  root["ue_drones"] = std::move(ues);
  root["models"] = models_to_json(s.models);
  root["sim"] = json{{"duration_s", s.sim.duration_s}, {"seed", s.sim.seed}};
  if (s.ue_region) {
    root["ue_region"] = json{{"x_min", s.ue_region->x_min},
                             {"y_min", s.ue_region->y_min},
                             {"x_max", s.ue_region->x_max},
                             {"y_max", s.ue_region->y_max}};
  }
  root["placement"] = json{{"max_altitude_m", s.placement.max_altitude_m}};
  return root.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write scenario file: " + path.string());
  }
  out << scenario_to_json(s);
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

namespace {

void check_position(std::vector<Violation>& out, const std::string& path,
                    const Position& p, const Terrain& t) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z_agl)) {
    out.push_back({path, "coordinates must be finite"});
    return;
  }
  if (p.z_agl < 0.0) {
    out.push_back({path + ".z_agl", "height above ground must be >= 0"});
  }
  if (!t.contains(p.x, p.y)) {
    out.push_back({path, "position outside terrain bounds"});
  }
}

void check_lora(std::vector<Violation>& out, const std::string& path,
                const LoRaRadioParams& p) {
  if (p.frequency_hz <= 0.0) {
    out.push_back({path + ".frequency_hz", "must be positive"});
  }
  if (p.bandwidth_hz != 125e3 && p.bandwidth_hz != 250e3 &&
      p.bandwidth_hz != 500e3) {
    out.push_back({path + ".bandwidth_hz", "must be 125000, 250000 or 500000"});
  }
  if (p.spreading_factor < 7 || p.spreading_factor > 12) {
    out.push_back({path + ".spreading_factor", "must be in 7..12"});
  }
  if (p.tx_power_dbm > 14.0) {
    out.push_back({path + ".tx_power_dbm", "exceeds the 14 dBm EU868 cap"});
  }
  if (p.preamble_symbols < 1) {
    out.push_back({path + ".preamble_symbols", "must be >= 1"});
  }
}

void check_nbiot(std::vector<Violation>& out, const std::string& path,
                 const NbIotRadioParams& p, const Terrain& t) {
  if (p.carrier_hz <= 0.0) {
    out.push_back({path + ".carrier_hz", "must be positive"});
  }
  if (p.mcl_db <= 0.0 || p.mcl_db > 164.0) {
    out.push_back({path + ".mcl_db",
                   "must be in (0, 164]; NB-IoT coverage tops out at 164 dB"});
  }
  check_position(out, path + ".enb_position", p.enb_position, t);
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;

  if (s.terrain.bounded()) {
    for (double e : s.terrain.elevation()) {
      if (!std::isfinite(e)) {
        out.push_back({"terrain.elevation", "all elevations must be finite"});
        break;
      }
    }
  }

  check_nbiot(out, "tier1_enb", s.tier1_enb, s.terrain);
  check_position(out, "tier2_bs.position", s.tier2_bs.position, s.terrain);
  if (s.tier2_bs.payload_mass_kg < 0.0 || s.tier2_bs.payload_mass_kg > 6.0) {
    out.push_back({"tier2_bs.payload_mass_kg",
                   "must be within [0, 6] kg (Tier 2 BS drone load limit)"});
  }
  check_lora(out, "tier2_bs.lora", s.tier2_bs.lora);
  check_nbiot(out, "tier2_bs.nbiot", s.tier2_bs.nbiot, s.terrain);

  std::set<uint16_t> seen_ids{s.tier2_bs.id};
  for (size_t i = 0; i < s.ue_drones.size(); ++i) {
    const UeDrone& ue = s.ue_drones[i];
    const std::string base = "ue_drones[" + std::to_string(i) + "]";
    if (!seen_ids.insert(ue.id).second) {
      out.push_back({base + ".id",
                     "duplicate node id " + std::to_string(ue.id)});
    }
    if (ue.id == kBroadcastAddr) {
      out.push_back({base + ".id", "0xFFFF is the broadcast address"});
    }
    check_lora(out, base + ".lora", ue.lora);
    if (ue.mission.waypoints.empty()) {
      out.push_back({base + ".mission.waypoints", "must not be empty"});
    } else {
      for (size_t w = 0; w < ue.mission.waypoints.size(); ++w) {
        check_position(out,
                       base + ".mission.waypoints[" + std::to_string(w) + "]",
                       ue.mission.waypoints[w].position, s.terrain);
        if (w > 0 && ue.mission.waypoints[w].t_s <=
                         ue.mission.waypoints[w - 1].t_s) {
          out.push_back(
              {base + ".mission.waypoints[" + std::to_string(w) + "].t_s",
               "arrival times must be strictly increasing"});
        }
      }
      if (implied_max_speed_mps(ue.mission) > ue.max_speed_mps + 1e-9) {
        out.push_back({base + ".mission",
                       "implied speed exceeds max_speed_mps"});
      }
    }
    if (ue.traffic.period_s <= 0.0) {
      out.push_back({base + ".traffic.period_s", "must be positive"});
    }
    if (ue.traffic.payload_bytes < 0 || ue.traffic.payload_bytes > 64) {
      out.push_back({base + ".traffic.payload_bytes", "must be in 0..64"});
    }
  }

  const PathLossModel& pl = s.models.path_loss;
  if (pl.exponent <= 0.0) {
    out.push_back({"models.path_loss.exponent", "must be positive"});
  }
  if (pl.d0_m <= 0.0) {
    out.push_back({"models.path_loss.d0_m", "must be positive"});
  }
  if (pl.eta_nlos_db < pl.eta_los_db) {
    out.push_back({"models.path_loss.eta_nlos_db", "must be >= eta_los_db"});
  }
  if (pl.shadowing_sigma_db < 0.0) {
    out.push_back({"models.shadowing_sigma_db", "must be >= 0"});
  }
  if (s.models.capture_threshold_db < 0.0) {
    out.push_back({"models.capture_threshold_db", "must be >= 0"});
  }
  if (s.models.mac.max_retries < 0) {
    out.push_back({"models.mac.max_retries", "must be >= 0"});
  }
  if (s.models.mac.queue_capacity < 1) {
    out.push_back({"models.mac.queue_capacity", "must be >= 1"});
  }
  if (s.models.backhaul.queue_capacity < 1) {
    out.push_back({"models.backhaul.queue_capacity", "must be >= 1"});
  }
  if (s.models.backhaul.base_rate_bps <= 0.0) {
    out.push_back({"models.backhaul.base_rate_bps", "must be positive"});
  }
  if (s.models.backhaul.attach_latency_s < 0.0) {
    out.push_back({"models.backhaul.attach_latency_s", "must be >= 0"});
  }
  if (s.sim.duration_s <= 0.0) {
    out.push_back({"sim.duration_s", "must be positive"});
  }
  if (s.ue_region) {
    if (s.ue_region->x_max < s.ue_region->x_min ||
        s.ue_region->y_max < s.ue_region->y_min) {
      out.push_back({"ue_region", "max bounds must be >= min bounds"});
    }
  }
  if (s.placement.max_altitude_m <= 0.0) {
    out.push_back({"placement.max_altitude_m", "must be positive"});
  }
  return out;
}

Region ue_region_of(const Scenario& s) {
  if (s.ue_region) {
    return *s.ue_region;
  }
  bool any = false;
  Region r{1e300, 1e300, -1e300, -1e300};
  for (const UeDrone& ue : s.ue_drones) {
    for (const Waypoint& w : ue.mission.waypoints) {
      r.x_min = std::min(r.x_min, w.position.x);
      r.y_min = std::min(r.y_min, w.position.y);
      r.x_max = std::max(r.x_max, w.position.x);
      r.y_max = std::max(r.y_max, w.position.y);
      any = true;
    }
  }
  if (!any) {
    throw std::invalid_argument(
        "empty UE region: no ue_region declared and no UE waypoints");
  }
  return r;
}

std::vector<Position> demand_points(const Scenario& s, double resolution_m) {
  if (resolution_m <= 0.0) {
    throw std::invalid_argument("resolution must be positive");
  }
  const Region r = ue_region_of(s);
  std::vector<Position> points;
  const double eps = 1e-9;
  const int ny =
      static_cast<int>(std::floor((r.y_max - r.y_min) / resolution_m + eps));
  const int nx =
      static_cast<int>(std::floor((r.x_max - r.x_min) / resolution_m + eps));
  for (int iy = 0; iy <= ny; ++iy) {
    for (int ix = 0; ix <= nx; ++ix) {
      points.push_back(
          Position{r.x_min + ix * resolution_m, r.y_min + iy * resolution_m,
                   0.0});
    }
  }
  return points;
}

}  // namespace t2sim
