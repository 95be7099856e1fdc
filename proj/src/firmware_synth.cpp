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

#include <array>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hpcs/mutate.hpp"
#include "hpcs/rng.hpp"

namespace hpcs {
namespace {

constexpr std::uint64_t kTextBase = 0x3f6000;

const std::array<const char*, 16> kVars = {
    "_VpvSense", "_IpvSense", "_VgridSense", "_IgridSense", "_PwmDuty",  "_IrefCmd",
    "_PllTheta", "_PllOmega", "_VbusFilt",   "_IacErr",     "_CtrlState", "_FaultFlags",
    "_AdcOffset", "_Kp",      "_Ki",         "_IntegState"};

class Emitter {
 public:
  explicit Emitter(Rng& rng) : rng_(rng) {}

  void label(const std::string& name) { out_ << name << ":\n"; }
  void comment(const std::string& text) { out_ << "; " << text << '\n'; }
  void raw(const std::string& text) { out_ << text << '\n'; }

  void instr(const std::string& mnemonic, const std::string& operands) {
    const auto opcode = rng_.index(0x10000) | 0x1000;
    if (operands.empty()) {
      out_ << fmt::format("{:07x} {:04x} {}\n", addr_++, opcode, mnemonic);
    } else {
      out_ << fmt::format("{:07x} {:04x} {:<5} {}\n", addr_++, opcode, mnemonic, operands);
    }
  }

  std::string var() { return kVars[rng_.index(kVars.size())]; }
  std::string imm() { return fmt::format("0x{:02X}", rng_.index(256)); }
  std::string bit() { return std::to_string(rng_.index(16)); }
  std::string shift() { return std::to_string(1 + rng_.index(15)); }
  std::string target() { return std::to_string(2 + rng_.index(40)); }
  std::size_t pick(std::size_t n) { return rng_.index(n); }
  std::size_t range(std::size_t lo, std::size_t hi) { return lo + rng_.index(hi - lo + 1); }

  std::string str() const { return out_.str(); }

 private:
  Rng& rng_;
  std::ostringstream out_;
  std::uint64_t addr_ = kTextBase;
};

void load_op(Emitter& e) {
  switch (e.pick(6)) {
    case 0: e.instr("MOV", "AL,@" + e.var()); break;
    case 1: e.instr("MOVL", "ACC,@" + e.var()); break;
    case 2: e.instr("MOVW", "DP,#" + e.var()); break;
    case 3: e.instr("MOVZ", "AR0,@" + e.var()); break;
    case 4: e.instr("MOV", "T,@" + e.var()); break;
    default: e.instr("MOVL", "XAR4,#" + e.var()); break;
  }
}

void store_op(Emitter& e) {
  switch (e.pick(3)) {
    case 0: e.instr("MOVH", "@" + e.var() + ",P"); break;
    case 1: e.instr("MOVDL", "XT,@" + e.var()); break;
    default: e.instr("PUSH", e.pick(2) ? "XAR4" : "ST1"); break;
  }
}

void arith_op(Emitter& e) {
  switch (e.pick(10)) {
    case 0: e.instr("ADD", "AL,@" + e.var()); break;
    case 1: e.instr("ADDB", "ACC,#" + e.imm()); break;
    case 2: e.instr("SUB", "AL,@" + e.var()); break;
    case 3: e.instr("MPY", "P,T,@" + e.var()); break;
    case 4: e.instr("QMPYL", "ACC,XT,@" + e.var()); break;
    case 5: e.instr("ASR", "AL,#" + e.shift()); break;
    case 6: e.instr("ADDL", "ACC,@" + e.var()); break;
    case 7: e.instr("SUBB", "XAR4,#1"); break;
    case 8: e.instr("IMPYL", "P,XT,@" + e.var()); break;
    default: e.instr("NEG", "AL"); break;
  }
}

void bool_op(Emitter& e) {
  switch (e.pick(8)) {
    case 0: e.instr("AND", "AL,#" + e.imm()); break;
    case 1: e.instr("ANDB", "AL,#0xFF"); break;
    case 2: e.instr("OR", "@" + e.var() + ",#" + e.imm()); break;
    case 3: e.instr("XOR", "AL,@" + e.var()); break;
    case 4: e.instr("LSL", "ACC,#" + e.shift()); break;
    case 5: e.instr("TBIT", "@" + e.var() + ",#" + e.bit()); break;
    case 6: e.instr("TSET", "@" + e.var() + ",#" + e.bit()); break;
    default: e.instr("LSR", "AL,#" + e.shift()); break;
  }
}

void branch_op(Emitter& e) {
  switch (e.pick(5)) {
    case 0: e.instr("B", e.target() + ",NEQ"); break;
    case 1: e.instr("SB", e.target() + ",EQ"); break;
    case 2: e.instr("SB", e.target() + ",GT"); break;
    case 3: e.instr("LCR", "_Util" + std::to_string(e.pick(8))); break;
    default: e.instr("BF", e.target() + ",LEQ"); break;
  }
}

void other_op(Emitter& e) {
  switch (e.pick(4)) {
    case 0: e.instr("NOP", ""); break;
    case 1: e.instr("SETC", "OVM"); break;
    case 2: e.instr("CLRC", "OVM"); break;
    default: e.instr("SPM", "0"); break;
  }
}

// Short arithmetic-heavy control-law stretch of `n` instructions.
void control_law(Emitter& e, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = e.pick(10);
    if (r < 8) arith_op(e);
    else other_op(e);
  }
}

void bit_handling(Emitter& e, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = e.pick(10);
    if (r < 8) bool_op(e);
    else branch_op(e);
  }
}

void dispatch(Emitter& e, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = e.pick(10);
    if (r < 7) branch_op(e);
    else arith_op(e);
  }
}

void sensor_read(Emitter& e, std::size_t slice) {
  e.label(fmt::format("_SenseRead_{}", slice));
  e.instr("MOVW", "DP,#_AdcResult");
  e.instr("MOV", fmt::format("AL,@_AdcResult+{}", slice % 8));
  e.instr("SUB", "AL,@_AdcOffset");
  e.instr("MOV", "T,AL");
  e.instr("MPYB", "P,T,#" + e.imm());
  e.instr("MOVH", "@_VpvSense,P");
  e.instr("MOV", fmt::format("AL,@_AdcResult+{}", (slice + 1) % 8));
  e.instr("MOVH", "@_IpvSense,P");
}

void mppt_step(Emitter& e, std::size_t slice) {
  e.label(fmt::format("_MpptEntry_{}", slice));
  e.instr("MOVL", "ACC,@_PpvNow");
  e.instr("CMPL", "ACC,@_PpvPrev");
  e.instr("SB", e.target() + ",GEQ");
  e.instr("MOVL", "ACC,@_VpvSense");
  e.instr("CMPL", "ACC,@_VpvPrev");
  e.instr("SB", e.target() + ",LEQ");
  e.instr("ADDL", "ACC,@_IrefStep");
}

void pwm_update(Emitter& e, std::size_t slice) {
  e.label(fmt::format("_IsrBlock_{}", slice));
  e.instr("MOVW", "DP,#_EPwm1Regs");
  e.instr("MOV", "AL,@_PwmDuty");
  e.instr("AND", "AL,#0x0FFF");
  e.instr("MOV", "@_EPwm1Regs+9,AL");
  e.instr("MOVH", "@_PwmShadow,P");
  e.instr("TBIT", "@_FaultFlags,#" + e.bit());
  e.instr("SB", e.target() + ",TC");
}

}  // namespace

std::string synthesize_base_listing(std::uint64_t seed, std::size_t slices) {
  Rng rng(seed);
  Emitter e(rng);
  e.comment("Synthetic C28x solar microinverter firmware (disassembly listing)");
  e.raw("        .sect \".text\"");
  e.label("_c_int00");
  e.instr("SPM", "0");
  e.instr("SETC", "OBJMODE");
  e.instr("EALLOW", "");
  for (std::size_t i = 0; i < 24; ++i) {
    const std::size_t r = e.pick(10);
    if (r < 6) load_op(e);
    else if (r < 8) store_op(e);
    else other_op(e);
  }
  e.instr("EDIS", "");
  e.instr("LCR", "_MainLoop");

  e.label("_CtrlIsr");
  e.instr("PUSH", "ST1");
  e.instr("PUSH", "XAR4");
  for (std::size_t s = 0; s < slices; ++s) {
    sensor_read(e, s);
    control_law(e, e.range(2, 18));
    mppt_step(e, s);
    bit_handling(e, e.range(1, 14));
    pwm_update(e, s);
    dispatch(e, e.range(0, 10));
    if (e.pick(4) == 0) store_op(e);
  }
  e.label("_IsrExit");
  e.instr("POP", "XAR4");
  e.instr("POP", "ST1");
  e.instr("IRET", "");

  e.label("_MainLoop");
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t r = e.pick(10);
    if (r < 3) load_op(e);
    else if (r < 5) bool_op(e);
    else if (r < 7) branch_op(e);
    else if (r < 9) arith_op(e);
    else other_op(e);
  }
  e.instr("LB", "_MainLoop");

  e.raw("        .sect \".econst\"");
  e.label("_SinTable");
  for (std::size_t i = 0; i < 4; ++i) e.raw(fmt::format("{:07x} {:04x}", 0x3f8000 + i, e.pick(0x10000)));
  return e.str();
}

}  // namespace hpcs
