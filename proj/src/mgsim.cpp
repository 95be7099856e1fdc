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

#include "hpcs/mgsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "hpcs/error.hpp"

namespace hpcs::mgsim {
namespace {

std::int64_t to_ticks(double t, double dt) { return std::llround(t / dt); }

std::string_view effect_name(EffectKind k) {
  switch (k) {
    case EffectKind::kMpptOff: return "mppt_off";
    case EffectKind::kInverterOff: return "inverter_off";
    case EffectKind::kSensorPerturb: return "sensor_perturb";
  }
  return "unknown";
}

std::optional<EffectKind> parse_effect(std::string_view name) {
  for (auto k : {EffectKind::kMpptOff, EffectKind::kInverterOff, EffectKind::kSensorPerturb}) {
    if (effect_name(k) == name) return k;
  }
  return std::nullopt;
}

void bad(const std::string& msg) { throw usage_error("BadScenario", msg); }

}  // namespace

PvModel::PvModel(const PvParams& params) : params_(params) {
  if (!(params.v_oc > 0 && params.shape_v > 0 && params.rated_kw > 0)) {
    bad("PV parameters must be positive");
  }
  // Golden-section search for the per-unit maximum power point.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = params.v_oc;
  const auto p = [this](double v) { return v * shape_current(v); };
  for (int it = 0; it < 200 && hi - lo > 1e-12 * params.v_oc; ++it) {
    const double a = hi - phi * (hi - lo);
    const double b = lo + phi * (hi - lo);
    (p(a) < p(b) ? lo : hi) = p(a) < p(b) ? a : b;
  }
  i_sc_ = params.rated_kw * 1000.0 / p(0.5 * (lo + hi));
}

double PvModel::shape_current(double volts) const {
  return 1.0 - std::expm1(volts / params_.shape_v) / std::expm1(params_.v_oc / params_.shape_v);
}

double PvModel::current(double volts, double irradiance) const {
  if (!(volts >= 0.0 && volts <= params_.v_oc)) {
    throw usage_error("OutOfRangeVoltage", fmt::format("PV voltage {} V outside [0, {}]", volts,
                                                       params_.v_oc));
  }
  if (volts == params_.v_oc) return 0.0;
  return std::max(0.0, irradiance * i_sc_ * shape_current(volts));
}

double PvModel::voltage_at(double amps, double irradiance) const {
  if (irradiance <= 0.0) return params_.v_oc;
  const double frac = 1.0 - amps / (irradiance * i_sc_);
  if (frac <= 0.0) return 0.0;
  if (frac >= 1.0) return params_.v_oc;
  return params_.shape_v * std::log1p(frac * std::expm1(params_.v_oc / params_.shape_v));
}

std::string_view pno_variant_name(PnoVariant v) {
  return v == PnoVariant::kLiteral ? "literal" : "symmetric";
}

std::optional<PnoVariant> parse_pno_variant(std::string_view name) {
  if (name == "literal") return PnoVariant::kLiteral;
  if (name == "symmetric") return PnoVariant::kSymmetric;
  return std::nullopt;
}

MpptState pno_step(const MpptState& state, double v_rt, double i_rt, PnoVariant variant) {
  if (!state.enabled) return state;
  MpptState next = state;
  const double p_rt = v_rt * i_rt;
  const double dp = p_rt - state.p_prev;
  const double dv = v_rt - state.v_prev;
  if (dp < 0) {
    next.i_ref += dv > 0 ? state.step : -state.step;
  } else if (variant == PnoVariant::kSymmetric) {
    // dV == 0 backs off toward open circuit so a collapsed (0 V) operating
    // point can recover.
    next.i_ref += dv >= 0 ? -state.step : state.step;
  }
  next.i_ref = std::clamp(next.i_ref, 0.0, state.i_max);
  next.p_prev = p_rt;
  next.v_prev = v_rt;
  return next;
}

DispatchState dispatch(double load_kw, double pv_kw, const DispatchState& prev,
                       const DispatchParams& params, double dt_s) {
  const double hours = dt_s / 3600.0;
  const double residual = load_kw - pv_kw;
  const double discharge_max = std::min(params.ess_max_kw, prev.ess_kwh / hours);
  const double charge_max =
      std::min(params.ess_max_kw, (params.ess_capacity_kwh - prev.ess_kwh) / hours);

  DispatchState next;
  next.ess_kw = std::clamp(residual, -std::max(charge_max, 0.0), std::max(discharge_max, 0.0));
  const double target = std::clamp(residual - next.ess_kw, 0.0, params.diesel_max_kw);
  const double decay = std::exp(-dt_s / params.diesel_tau_s);
  next.diesel_kw = std::clamp(target + (prev.diesel_kw - target) * decay, 0.0, params.diesel_max_kw);
  next.ess_kwh = std::clamp(prev.ess_kwh - next.ess_kw * hours, 0.0, params.ess_capacity_kwh);
  return next;
}

double frequency_update(double f_hz, double imbalance_kw, double dt_s, const GridParams& p) {
  const double drive = p.k_f * imbalance_kw / p.s_base_kw;
  if (p.damping <= 0.0) return f_hz + drive * dt_s;
  const double f_eq = p.f_nominal_hz + drive / p.damping;
  return f_eq + (f_hz - f_eq) * std::exp(-p.damping * dt_s);
}

double Irradiance::at(double t) const {
  if (!trapezoid) return level;
  const auto ramp = [](double t, double a, double b) {
    if (t <= a) return 0.0;
    if (t >= b) return 1.0;
    return (t - a) / (b - a);
  };
  const double up = ramp(t, rise_start_s, rise_end_s);
  const double down = 1.0 - ramp(t, fall_start_s, fall_end_s);
  return floor + (level - floor) * std::min(up, down);
}

void Scenario::validate() const {
  if (!(duration_s > 0)) bad("duration must be positive");
  if (!(dt_mppt_s > 0 && dt_dispatch_s > 0)) bad("timesteps must be positive");
  const double ratio = dt_dispatch_s / dt_mppt_s;
  if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-6) {
    bad("dispatch timestep must be an integer multiple of the MPPT timestep");
  }
  if (loads.empty()) bad("load schedule is empty");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (loads[i].kw < 0) bad("loads must be non-negative");
    if (i && loads[i].time_s < loads[i - 1].time_s) bad("load schedule must be time-sorted");
  }
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    const auto& a = attacks[i];
    if (i && a.start_s < attacks[i - 1].start_s) bad("attack schedule must be time-sorted");
    if (a.end_s && *a.end_s < a.start_s) bad("attack window ends before it starts");
    if (a.effect.kind == EffectKind::kSensorPerturb &&
        (a.effect.amplitude < 0 || !(a.effect.frequency_hz > 0))) {
      bad("sensor perturbation needs amplitude >= 0 and frequency > 0");
    }
  }
  if (!(mppt.step_fraction > 0)) bad("MPPT step must be positive");
  if (initial_ess_kwh < 0 || initial_ess_kwh > dispatch.ess_capacity_kwh) {
    bad("initial ESS energy outside [0, capacity]");
  }
  if (!(grid.f_nominal_hz > 0 && grid.s_base_kw > 0 && dispatch.diesel_tau_s > 0)) {
    bad("grid constants must be positive");
  }
}

double Scenario::load_at(double t) const {
  double kw = loads.front().kw;
  for (const auto& step : loads) {
    if (step.time_s <= t) kw = step.kw;
  }
  return kw;
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["duration_s"] = duration_s;
  j["dt_mppt_s"] = dt_mppt_s;
  j["dt_dispatch_s"] = dt_dispatch_s;
  j["islanding_time_s"] = islanding_time_s;
  j["loads"] = nlohmann::json::array();
  for (const auto& l : loads) j["loads"].push_back({{"time_s", l.time_s}, {"kw", l.kw}});
  j["attacks"] = nlohmann::json::array();
  for (const auto& a : attacks) {
    nlohmann::json aj = {{"start_s", a.start_s},
                         {"end_s", a.end_s ? nlohmann::json(*a.end_s) : nlohmann::json(nullptr)},
                         {"effect", std::string(effect_name(a.effect.kind))}};
    if (a.effect.kind == EffectKind::kSensorPerturb) {
      aj["amplitude"] = a.effect.amplitude;
      aj["frequency_hz"] = a.effect.frequency_hz;
    }
    j["attacks"].push_back(aj);
  }
  j["pv"] = {{"v_oc", pv.v_oc}, {"shape_v", pv.shape_v}, {"rated_kw", pv.rated_kw}};
  j["mppt"] = {{"step_fraction", mppt.step_fraction},
               {"initial_iref_fraction", mppt.initial_iref_fraction},
               {"variant", std::string(pno_variant_name(mppt.variant))}};
  j["dispatch"] = {{"ess_max_kw", dispatch.ess_max_kw},
                   {"ess_capacity_kwh", dispatch.ess_capacity_kwh},
                   {"diesel_max_kw", dispatch.diesel_max_kw},
                   {"diesel_tau_s", dispatch.diesel_tau_s},
                   {"initial_ess_kwh", initial_ess_kwh}};
  j["grid"] = {{"f_nominal_hz", grid.f_nominal_hz},
               {"k_f", grid.k_f},
               {"damping", grid.damping},
               {"s_base_kw", grid.s_base_kw}};
  j["irradiance"] = {{"profile", irradiance.trapezoid ? "trapezoid" : "constant"},
                     {"level", irradiance.level}};
  if (irradiance.trapezoid) {
    j["irradiance"]["floor"] = irradiance.floor;
    j["irradiance"]["rise_start_s"] = irradiance.rise_start_s;
    j["irradiance"]["rise_end_s"] = irradiance.rise_end_s;
    j["irradiance"]["fall_start_s"] = irradiance.fall_start_s;
    j["irradiance"]["fall_end_s"] = irradiance.fall_end_s;
  }
  return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.name = j.value("name", s.name);
    s.duration_s = j.value("duration_s", s.duration_s);
    s.dt_mppt_s = j.value("dt_mppt_s", s.dt_mppt_s);
    s.dt_dispatch_s = j.value("dt_dispatch_s", s.dt_dispatch_s);
    s.islanding_time_s = j.value("islanding_time_s", s.islanding_time_s);
    if (j.contains("loads")) {
      s.loads.clear();
      for (const auto& l : j["loads"]) s.loads.push_back({l.at("time_s").get<double>(), l.at("kw").get<double>()});
    }
    for (const auto& a : j.value("attacks", nlohmann::json::array())) {
      AttackWindow w;
      w.start_s = a.at("start_s").get<double>();
      if (a.contains("end_s") && !a["end_s"].is_null()) w.end_s = a["end_s"].get<double>();
      const auto kind = parse_effect(a.at("effect").get<std::string>());
      if (!kind) bad("unknown attack effect " + a.at("effect").dump());
      w.effect.kind = *kind;
      w.effect.amplitude = a.value("amplitude", 0.0);
      w.effect.frequency_hz = a.value("frequency_hz", 0.0);
      s.attacks.push_back(w);
    }
    if (j.contains("pv")) {
      const auto& p = j["pv"];
      s.pv.v_oc = p.value("v_oc", s.pv.v_oc);
      s.pv.shape_v = p.value("shape_v", s.pv.shape_v);
      s.pv.rated_kw = p.value("rated_kw", s.pv.rated_kw);
    }
    if (j.contains("mppt")) {
      const auto& m = j["mppt"];
      s.mppt.step_fraction = m.value("step_fraction", s.mppt.step_fraction);
      s.mppt.initial_iref_fraction = m.value("initial_iref_fraction", s.mppt.initial_iref_fraction);
      const auto variant = parse_pno_variant(m.value("variant", std::string("literal")));
      if (!variant) bad("unknown PnO variant " + m["variant"].dump());
      s.mppt.variant = *variant;
    }
    if (j.contains("dispatch")) {
      const auto& d = j["dispatch"];
      s.dispatch.ess_max_kw = d.value("ess_max_kw", s.dispatch.ess_max_kw);
      s.dispatch.ess_capacity_kwh = d.value("ess_capacity_kwh", s.dispatch.ess_capacity_kwh);
      s.dispatch.diesel_max_kw = d.value("diesel_max_kw", s.dispatch.diesel_max_kw);
      s.dispatch.diesel_tau_s = d.value("diesel_tau_s", s.dispatch.diesel_tau_s);
      s.initial_ess_kwh = d.value("initial_ess_kwh", s.initial_ess_kwh);
    }
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      s.grid.f_nominal_hz = g.value("f_nominal_hz", s.grid.f_nominal_hz);
      s.grid.k_f = g.value("k_f", s.grid.k_f);
      s.grid.damping = g.value("damping", s.grid.damping);
      s.grid.s_base_kw = g.value("s_base_kw", s.grid.s_base_kw);
    }
    if (j.contains("irradiance")) {
      const auto& r = j["irradiance"];
      const auto profile = r.value("profile", std::string("constant"));
      if (profile != "constant" && profile != "trapezoid") bad("unknown irradiance profile " + profile);
      s.irradiance.trapezoid = profile == "trapezoid";
      s.irradiance.level = r.value("level", 1.0);
      s.irradiance.floor = r.value("floor", 0.0);
      s.irradiance.rise_start_s = r.value("rise_start_s", 0.0);
      s.irradiance.rise_end_s = r.value("rise_end_s", 0.0);
      s.irradiance.fall_start_s = r.value("fall_start_s", 0.0);
      s.irradiance.fall_end_s = r.value("fall_end_s", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  s.validate();
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("IoError", "cannot open scenario " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw usage_error("BadScenario", path + ": " + e.what());
  }
}

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"nominal", "mppt_dos", "inverter_dos",
                                                 "input_sine", "input_sine_fast"};
  return names;
}

Scenario builtin_scenario(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  // Residential 250 kW plus industrial 250 -> 550 kW at t = 35 s.
  s.loads = {{0.0, 500.0}, {35.0, 800.0}};
  s.mppt.variant = PnoVariant::kSymmetric;
  if (name == "nominal") {
  } else if (name == "mppt_dos") {
    s.attacks = {{0.0, std::nullopt, {EffectKind::kMpptOff}}};
  } else if (name == "inverter_dos") {
    s.attacks = {{15.0, 30.0, {EffectKind::kInverterOff}},
                 {45.0, std::nullopt, {EffectKind::kInverterOff}}};
  } else if (name == "input_sine") {
    s.attacks = {{5.0, std::nullopt, {EffectKind::kSensorPerturb, 0.1, 0.5}}};
  } else if (name == "input_sine_fast") {
    s.attacks = {{5.0, std::nullopt, {EffectKind::kSensorPerturb, 0.1, 5.0}}};
  } else {
    throw usage_error("UnknownScenario", "unknown scenario " + std::string(name));
  }
  return s;
}

std::vector<MgState> run_scenario(const Scenario& s) {
  s.validate();
  const PvModel pv(s.pv);
  const std::int64_t steps = to_ticks(s.duration_s, s.dt_dispatch_s);
  const std::int64_t sub = std::llround(s.dt_dispatch_s / s.dt_mppt_s);
  const std::int64_t islanding = to_ticks(s.islanding_time_s, s.dt_dispatch_s);

  struct Window {
    std::int64_t begin;
    std::int64_t end;
    AttackEffect effect;
  };
  std::vector<Window> windows;
  for (const auto& a : s.attacks) {
    windows.push_back({to_ticks(a.start_s, s.dt_dispatch_s),
                       a.end_s ? to_ticks(*a.end_s, s.dt_dispatch_s)
                               : std::numeric_limits<std::int64_t>::max(),
                       a.effect});
  }

  MpptState mppt;
  mppt.step = s.mppt.step_fraction * pv.i_sc();
  mppt.i_max = pv.i_sc();
  mppt.i_ref = std::clamp(s.mppt.initial_iref_fraction, 0.0, 1.0) * pv.i_sc();
  DispatchState power;
  power.ess_kwh = s.initial_ess_kwh;
  double freq = s.grid.f_nominal_hz;

  std::vector<MgState> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (std::int64_t k = 0; k < steps; ++k) {
    bool inverter_online = true;
    bool mppt_on = true;
    std::vector<const AttackEffect*> perturbations;
    for (const auto& w : windows) {
      if (k < w.begin || k >= w.end) continue;
      switch (w.effect.kind) {
        case EffectKind::kMpptOff: mppt_on = false; break;
        case EffectKind::kInverterOff: inverter_online = false; break;
        case EffectKind::kSensorPerturb: perturbations.push_back(&w.effect); break;
      }
    }
    mppt.enabled = mppt_on;

    double energy = 0;
    for (std::int64_t m = 0; m < sub; ++m) {
      if (!inverter_online) continue;
      const double t = static_cast<double>(k * sub + m) * s.dt_mppt_s;
      const double g = std::max(0.0, s.irradiance.at(t));
      const double amps = std::min(mppt.i_ref, g * pv.i_sc());
      const double volts = pv.voltage_at(amps, g);
      energy += volts * amps;
      double gain = 1.0;
      for (const auto* e : perturbations) {
        gain *= 1.0 + e->amplitude * std::sin(2.0 * std::numbers::pi * e->frequency_hz * t);
      }
      mppt = pno_step(mppt, volts * gain, amps * gain, s.mppt.variant);
    }

    MgState row;
    row.time_s = static_cast<double>(k) * s.dt_dispatch_s;
    row.pv_kw = std::clamp(energy / static_cast<double>(sub) / 1000.0, 0.0, s.pv.rated_kw);
    row.load_kw = s.load_at(row.time_s);
    row.inverter_online = inverter_online;
    row.mppt_enabled = mppt_on;
    if (k < islanding) {
      // Grid-connected: the utility absorbs the residual at nominal frequency.
      freq = s.grid.f_nominal_hz;
      row.imbalance_kw = 0;
    } else {
      power = dispatch(row.load_kw, row.pv_kw, power, s.dispatch, s.dt_dispatch_s);
      row.imbalance_kw = row.pv_kw + power.diesel_kw + power.ess_kw - row.load_kw;
      freq = frequency_update(freq, row.imbalance_kw, s.dt_dispatch_s, s.grid);
    }
    row.diesel_kw = power.diesel_kw;
    row.ess_kw = power.ess_kw;
    row.ess_kwh = power.ess_kwh;
    row.freq_hz = freq;
    rows.push_back(row);
  }
  return rows;
}

void write_timeseries_csv(std::span<const MgState> rows, std::ostream& out) {
  out << "time_s,freq_hz,pv_kw,diesel_kw,ess_kw,ess_kwh,load_kw,inverter_online,mppt_enabled\r\n";
  for (const auto& r : rows) {
    out << fmt::format("{:.3f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\r\n", r.time_s,
                       r.freq_hz, r.pv_kw, r.diesel_kw, r.ess_kw, r.ess_kwh, r.load_kw,
                       r.inverter_online ? 1 : 0, r.mppt_enabled ? 1 : 0);
  }
}

}  // namespace hpcs::mgsim
