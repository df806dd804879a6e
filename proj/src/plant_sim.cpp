#include "casetwin/plant_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include <spdlog/spdlog.h>

#include "casetwin/text.hpp"

namespace casetwin {

SimConstants SimConstants::from_kv(const KvFile& kv) {
  SimConstants k;
  const std::map<std::string, double*> fields{
      {"heating_base", &k.heating_base},
      {"heating_per_level", &k.heating_per_level},
      {"relaxation", &k.relaxation},
      {"nozzle_flow_friction", &k.nozzle_flow_friction},
      {"pressure_base", &k.pressure_base},
      {"pressure_per_flow", &k.pressure_per_flow},
      {"pressure_per_back", &k.pressure_per_back},
      {"dosing_rate", &k.dosing_rate},
      {"back_compaction", &k.back_compaction},
      {"reference_flow", &k.reference_flow},
      {"cavity_volume", &k.cavity_volume},
      {"cycle_base", &k.cycle_base},
      {"cycle_per_injection", &k.cycle_per_injection},
      {"wear_rate", &k.wear_rate},
      {"noise", &k.noise},
  };
  for (const auto& [key, entry] : kv.entries()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError({entry.second, 1}, "unknown simulator constant '" + key + "'");
    *it->second = kv.get_double(key, 0);
  }
  if (k.relaxation <= 0 || k.relaxation > 1) throw ParseError({1, 1}, "relaxation must lie in (0, 1]");
  if (k.reference_flow <= 0 || k.cavity_volume <= 0) {
    throw ParseError({1, 1}, "reference_flow and cavity_volume must be positive");
  }
  return k;
}

std::vector<std::string> clamp_config(SimConfig& cfg) {
  std::vector<std::string> warnings;
  auto clamp = [&](const char* name, double& v, double lo, double hi) {
    double c = std::clamp(v, lo, hi);
    if (c != v || std::isnan(v)) {
      warnings.push_back(std::string(name) + "=" + format_double(v) + " clamped to " + format_double(c));
      v = std::isnan(v) ? lo : c;
    }
  };
  clamp("dosingTime", cfg.dosing_time, 0, 20);
  clamp("injectionFlow", cfg.injection_flow, 0, 100);
  clamp("switchOverVolume", cfg.switch_over_volume, 0, 60);
  clamp("backPressure", cfg.back_pressure, 0, 200);
  if (cfg.cylinder_heating < 1 || cfg.cylinder_heating > 5) {
    auto c = std::clamp<std::int64_t>(cfg.cylinder_heating, 1, 5);
    warnings.push_back("cylinderHeating=" + std::to_string(cfg.cylinder_heating) + " clamped to " + std::to_string(c));
    cfg.cylinder_heating = c;
  }
  for (const auto& w : warnings) spdlog::warn("simulator config {}", w);
  return warnings;
}

double heating_setpoint(std::int64_t level, const SimConstants& k) {
  return k.heating_base + k.heating_per_level * static_cast<double>(level);
}

SimState initial_state(const SimConfig& cfg, const SimConstants& k, std::uint64_t seed) {
  SimState s;
  s.config = cfg;
  clamp_config(s.config);
  s.barrel_temp = heating_setpoint(s.config.cylinder_heating, k);
  s.seed = seed;
  return s;
}

std::pair<SimState, Situation> sim_step(const SimState& state, const SimConstants& k) {
  SimState next = state;
  next.cycle = state.cycle + 1;
  const SimConfig& c = next.config;

  next.barrel_temp += k.relaxation * (heating_setpoint(c.cylinder_heating, k) - next.barrel_temp);
  next.wear += k.wear_rate;

  double nozzle = next.barrel_temp + k.nozzle_flow_friction * c.injection_flow;
  double pressure =
      (k.pressure_base + k.pressure_per_flow * c.injection_flow + k.pressure_per_back * c.back_pressure) *
      (1 + next.wear);
  const double dosed = k.dosing_rate * c.dosing_time * (1 + k.back_compaction * c.back_pressure);
  const double injected = std::min(dosed, c.switch_over_volume * std::min(1.0, c.injection_flow / k.reference_flow));
  double fill = std::min(1.0, injected / k.cavity_volume);
  double cushion = std::max(0.0, dosed - injected);
  double cycle_time = k.cycle_base + c.dosing_time + k.cycle_per_injection * c.switch_over_volume / std::max(c.injection_flow, 1.0);

  if (k.noise > 0) {
    std::mt19937_64 rng(state.seed ^ (static_cast<std::uint64_t>(next.cycle) * 0x9E3779B97F4A7C15ULL));
    std::uniform_real_distribution<double> u(-k.noise, k.noise);
    nozzle *= 1 + u(rng);
    pressure *= 1 + u(rng);
    cushion = std::max(0.0, cushion * (1 + u(rng)));
    fill = std::clamp(fill * (1 + u(rng)), 0.0, 1.0);
    cycle_time *= 1 + u(rng);
  }

  Situation s;
  s.cycle_id = next.cycle;
  s.values["ProcessData.cycleId"] = next.cycle;
  s.values["ProcessData.cycleTime"] = cycle_time;
  s.values["ProcessData.nozzleTemperature"] = nozzle;
  s.values["ProcessData.pressure"] = pressure;
  s.values["ProcessData.heating"] = c.cylinder_heating;
  s.values["PhaseData.dosingTime"] = c.dosing_time;
  s.values["PhaseData.cylinderHeating"] = c.cylinder_heating;
  s.values["PhaseData.injectionFlow"] = c.injection_flow;
  s.values["PhaseData.switchOverVolume"] = c.switch_over_volume;
  s.values["PhaseData.meltCushion"] = cushion;
  s.values["PhaseData.backPressure"] = c.back_pressure;
  s.values["PhaseData.fillFraction"] = fill;
  return {std::move(next), std::move(s)};
}

PlantSimulator::PlantSimulator(SimConfig cfg, SimConstants k, std::uint64_t seed)
    : k_(k), state_(initial_state(cfg, k, seed)) {}

std::optional<Situation> PlantSimulator::read_cycle() {
  if (pending_) {
    state_.config = *pending_;
    pending_.reset();
  }
  auto [next, situation] = sim_step(state_, k_);
  state_ = std::move(next);
  return situation;
}

WriteAck PlantSimulator::write_config(const std::vector<PlannedAssignment>& writes) {
  SimConfig cfg = pending_ ? *pending_ : state_.config;
  for (const auto& w : writes) {
    const std::string key = w.target.key();
    if (!is_numeric(w.value)) return {false, "non-numeric value for " + key};
    const double v = as_double(w.value);
    if (key == "ProcessData.heating" || key == "PhaseData.cylinderHeating") {
      cfg.cylinder_heating = static_cast<std::int64_t>(std::llround(v));
    } else if (key == "PhaseData.dosingTime") {
      cfg.dosing_time = v;
    } else if (key == "PhaseData.injectionFlow") {
      cfg.injection_flow = v;
    } else if (key == "PhaseData.switchOverVolume") {
      cfg.switch_over_volume = v;
    } else if (key == "PhaseData.backPressure") {
      cfg.back_pressure = v;
    } else {
      return {false, "not writable: " + key};
    }
  }
  clamp_config(cfg);
  pending_ = cfg;
  ++writes_received_;
  return {true, {}};
}

}  // namespace casetwin
