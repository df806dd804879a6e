#pragma once

// Machine port contract and a deterministic injection-molding simulator.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casetwin/cbr_engine.hpp"
#include "casetwin/kv_file.hpp"
#include "casetwin/value.hpp"

namespace casetwin {

struct WriteAck {
  bool accepted = false;
  std::string reason;
};

struct PortCapabilities {
  bool writable = false;
};

/// Transient port failure; the runtime retries a bounded number of times.
class PortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MachinePort {
 public:
  virtual ~MachinePort() = default;
  /// Blocks until the next cycle completes; nullopt at end of data.
  virtual std::optional<Situation> read_cycle() = 0;
  /// Takes effect from the next cycle on.
  virtual WriteAck write_config(const std::vector<PlannedAssignment>& writes) = 0;
  virtual PortCapabilities capabilities() const = 0;
};

/// The single table of process coefficients (models/sim_constants.kv).
struct SimConstants {
  double heating_base = 180;          // °C setpoint at level 0
  double heating_per_level = 80;      // °C per heating level
  double relaxation = 0.5;            // barrel fraction closed per cycle
  double nozzle_flow_friction = 0.4;  // °C per cm³/s
  double pressure_base = 400;         // bar
  double pressure_per_flow = 20;      // bar per cm³/s
  double pressure_per_back = 2;       // bar per bar back pressure
  double dosing_rate = 4;             // cm³ per s of dosing
  double back_compaction = 0.001;     // extra dosed fraction per bar back pressure
  double reference_flow = 40;         // cm³/s for full injection of the switch-over volume
  double cavity_volume = 30;          // cm³
  double cycle_base = 20;             // s
  double cycle_per_injection = 10;    // s per (cm³ / (cm³/s))
  double wear_rate = 0;               // pressure gain per cycle
  double noise = 0;                   // relative output noise amplitude

  static SimConstants from_kv(const KvFile& kv);  // rejects unknown keys
};

struct SimConfig {
  double dosing_time = 8;         // s
  std::int64_t cylinder_heating = 3;
  double injection_flow = 50;     // cm³/s
  double switch_over_volume = 30; // cm³
  double back_pressure = 150;     // bar
  bool operator==(const SimConfig&) const = default;
};

/// Clamps to the physical bounds; returns one warning per clamped field.
std::vector<std::string> clamp_config(SimConfig& cfg);

struct SimState {
  SimConfig config;
  double barrel_temp = 0;
  double wear = 0;
  std::uint64_t seed = 0;
  std::int64_t cycle = 0;  // last completed cycle
  bool operator==(const SimState&) const = default;
};

/// Barrel starts settled at the setpoint of the initial heating level.
SimState initial_state(const SimConfig& cfg, const SimConstants& k, std::uint64_t seed);

/// One production cycle. Also carries PhaseData.fillFraction, which the
/// bundled domain model does not declare.
std::pair<SimState, Situation> sim_step(const SimState& state, const SimConstants& k);

double heating_setpoint(std::int64_t level, const SimConstants& k);

class PlantSimulator : public MachinePort {
 public:
  PlantSimulator(SimConfig cfg, SimConstants k, std::uint64_t seed);

  std::optional<Situation> read_cycle() override;
  WriteAck write_config(const std::vector<PlannedAssignment>& writes) override;
  PortCapabilities capabilities() const override { return {true}; }

  const SimState& state() const { return state_; }
  std::size_t writes_received() const { return writes_received_; }

 private:
  SimConstants k_;
  SimState state_;
  std::optional<SimConfig> pending_;
  std::size_t writes_received_ = 0;
};

}  // namespace casetwin
