// Copyright 2026 The hpc-sentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Discrete-time islanded microgrid: PV array behind a perturb-and-observe
// microinverter, ESS, diesel generator and aggregate load, with a lumped
// power balance and first-order frequency dynamics.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hpcs::mgsim {

// ---------------------------------------------------------------------------
// PV array

struct PvParams {
  double v_oc = 800.0;     // V
  double shape_v = 60.0;   // V, knee sharpness of the I-V curve
  double rated_kw = 250.0; // maximum power at irradiance 1
};

// I(V) = g * I_sc * (1 - (exp(V/s) - 1) / (exp(V_oc/s) - 1)), with I_sc
// chosen so the maximum power at g = 1 equals rated_kw.
class PvModel {
 public:
  explicit PvModel(const PvParams& params);

  // Throws usage_error("OutOfRangeVoltage") outside [0, V_oc].
  double current(double volts, double irradiance) const;
  // Inverse of current(); currents at or above g * I_sc give 0 V.
  double voltage_at(double amps, double irradiance) const;

  double v_oc() const { return params_.v_oc; }
  double i_sc() const { return i_sc_; }
  const PvParams& params() const { return params_; }

 private:
  double shape_current(double volts) const;  // I(V) / I_sc at g = 1

  PvParams params_;
  double i_sc_ = 0;
};

// ---------------------------------------------------------------------------
// Perturb and observe

enum class PnoVariant {
  kLiteral,    // acts only when power dropped
  kSymmetric,  // also keeps climbing when power rose
};

std::string_view pno_variant_name(PnoVariant v);
std::optional<PnoVariant> parse_pno_variant(std::string_view name);

struct MpptState {
  double p_prev = 0;  // W
  double v_prev = 0;  // V
  double i_ref = 0;   // A
  double step = 0;    // A, > 0
  double i_max = 0;   // A, upper clamp for i_ref
  bool enabled = true;
};

// One tracker iteration on measured voltage and current. A disabled state
// is returned unchanged.
MpptState pno_step(const MpptState& state, double v_rt, double i_rt,
                   PnoVariant variant = PnoVariant::kLiteral);

// ---------------------------------------------------------------------------
// Dispatch and frequency

struct DispatchParams {
  double ess_max_kw = 100.0;
  double ess_capacity_kwh = 100.0;
  double diesel_max_kw = 1000.0;
  double diesel_tau_s = 2.0;
};

struct DispatchState {
  double diesel_kw = 0;
  double ess_kw = 0;  // positive when discharging
  double ess_kwh = 50.0;
};

// Merit order: the ESS answers the residual (load - pv) instantly within its
// power and energy limits; the diesel set point takes the remainder and the
// unit follows it with a first-order lag.
DispatchState dispatch(double load_kw, double pv_kw, const DispatchState& prev,
                       const DispatchParams& params, double dt_s);

struct GridParams {
  double f_nominal_hz = 60.0;
  double k_f = 2.0;      // Hz/s per unit of imbalance
  double damping = 1.0;  // 1/s
  double s_base_kw = 1000.0;
};

// df/dt = k_f * imbalance / S_base - D * (f - f_nominal), advanced exactly
// over dt with the imbalance held constant.
double frequency_update(double f_hz, double imbalance_kw, double dt_s, const GridParams& params);

// ---------------------------------------------------------------------------
// Scenarios

enum class EffectKind { kMpptOff, kInverterOff, kSensorPerturb };

struct AttackEffect {
  EffectKind kind = EffectKind::kMpptOff;
  double amplitude = 0;     // fraction, SensorPerturb only
  double frequency_hz = 0;  // SensorPerturb only
};

struct AttackWindow {
  double start_s = 0;
  std::optional<double> end_s;  // open-ended when absent
  AttackEffect effect;
};

struct LoadStep {
  double time_s = 0;
  double kw = 0;
};

struct Irradiance {
  // Constant `level`, or a trapezoid from `floor` up to `level` over
  // [rise_start, rise_end] and back down over [fall_start, fall_end].
  bool trapezoid = false;
  double level = 1.0;
  double floor = 0.0;
  double rise_start_s = 0, rise_end_s = 0, fall_start_s = 0, fall_end_s = 0;

  double at(double t) const;
};

struct MpptParams {
  double step_fraction = 0.005;         // step as a fraction of I_sc
  double initial_iref_fraction = 0.5;   // starting reference as a fraction of I_sc
  PnoVariant variant = PnoVariant::kLiteral;
};

struct Scenario {
  std::string name = "custom";
  double duration_s = 60.0;
  double dt_mppt_s = 0.001;
  double dt_dispatch_s = 0.01;
  double islanding_time_s = 0.0;
  std::vector<LoadStep> loads = {{0.0, 500.0}};
  std::vector<AttackWindow> attacks;
  PvParams pv;
  MpptParams mppt;
  DispatchParams dispatch;
  GridParams grid;
  Irradiance irradiance;
  double initial_ess_kwh = 50.0;

  // Throws usage_error("BadScenario").
  void validate() const;
  double load_at(double t) const;

  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);
};

// nominal, mppt_dos, inverter_dos, input_sine, input_sine_fast.
const std::vector<std::string>& builtin_scenario_names();
// Throws usage_error("UnknownScenario").
Scenario builtin_scenario(std::string_view name);

struct MgState {
  double time_s = 0;
  double freq_hz = 0;
  double pv_kw = 0;
  double diesel_kw = 0;
  double ess_kw = 0;
  double ess_kwh = 0;
  double load_kw = 0;
  bool inverter_online = true;
  bool mppt_enabled = true;
  double imbalance_kw = 0;  // pv + diesel + ess - load fed to the frequency model
};

// One row per dispatch step k at time k * dt_dispatch. PV power is the mean
// over the step's MPPT sub-steps; frequency is the value after the step.
std::vector<MgState> run_scenario(const Scenario& s);

// Columns: time_s,freq_hz,pv_kw,diesel_kw,ess_kw,ess_kwh,load_kw,
// inverter_online,mppt_enabled.
void write_timeseries_csv(std::span<const MgState> rows, std::ostream& out);

}  // namespace hpcs::mgsim
