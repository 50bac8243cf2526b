// lte.hpp - unlicensed-LTE-like downlink grid synthesis with RB-level
// blacklisting/power control, sync-signal exclusion and channel-access gating
#pragma once

#include "ctcsim/codec.hpp"
#include "ctcsim/grid.hpp"
#include "ctcsim/types.hpp"
#include "ctcsim/waveform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctc {

struct LteGridConfig {
    GridSpec grid;                 // 2048-point, 30.72 Msps, 1200 used bins
    int rb_subcarriers = 12;
    double rb_slot = 0.5e-3;
    int symbols_per_slot = 7;
    int pss_sss_halfwidth = 31;    // 62 central subcarriers
    std::vector<int> pss_sss_subframes = {0, 5};
    bool cross_carrier_scheduling = true;  // no control region on this carrier
    // Standard power control range is [-6,+3] dB; extended mode allows -9.
    bool extended_power_range = true;

    static LteGridConfig make(double center_frequency = 5.5e9);
    int rbs() const { return 100; }
    int rb_first_bin(int rb) const;  // lowest used-bin value of the RB
    bool rb_overlaps_sync(int rb) const;
    void validate() const;
};

enum class RbState : uint8_t { Scheduled, Blacklisted, PowerScaled };

struct RbAssignment {
    RbState state = RbState::Scheduled;
    double offset_db = 0.0;  // only for PowerScaled
};

struct RbSchedule {
    int num_slots = 0;
    std::vector<RbAssignment> entries;  // slot-major, num_slots x 100

    RbAssignment& at(int slot, int rb) { return entries[size_t(slot) * 100 + rb]; }
    const RbAssignment& at(int slot, int rb) const { return entries[size_t(slot) * 100 + rb]; }
    static RbSchedule all_scheduled(int num_slots);
    int affected_in_slot(int slot) const;
};

// Fine-grained per-subcarrier weights (prototype-style direct power control),
// used by the nulled-subcarrier sweeps. Index: slot-major, 1200 wide.
struct SubcarrierWeights {
    int num_slots = 0;
    std::vector<double> w;  // num_slots x 1200, 1.0 = untouched

    double& at(int slot, int bin_index) { return w[size_t(slot) * 1200 + bin_index]; }
    double get(int slot, int bin_index) const { return w[size_t(slot) * 1200 + bin_index]; }
    static SubcarrierWeights ones(int num_slots);
};

// Fills scheduled RBs with unit-power random 16-QAM, zeroes blacklisted RBs,
// scales power-controlled RBs; sync bins in the sync subframes carry a fixed
// full-power sequence and reject any CTC touch.
ComplexFrame lte_tx(const LteGridConfig& cfg, const RbSchedule& schedule, double duration,
                    uint64_t seed, const SubcarrierWeights* fine_weights = nullptr,
                    double start_time = 0.0);

enum class LteCardMode { Blacklist, Power };

struct CardScheduleResult {
    RbSchedule schedule;
    int max_affected_per_slot = 0;
    double overhead_fraction = 0.0;  // affected RB-slots / total RB-slots
};

// Marks, per hole, the RBs overlapping (band-wise) the corresponding WiFi
// subcarrier. lead_slots shifts the card in time; lte_slots_per_ctc_slot
// stretches CTC symbols over multiple LTE slots.
CardScheduleResult card_to_schedule(const PunchedCard& card, LteCardMode mode,
                                    double power_offset_db, int rbs_per_ctc_subcarrier,
                                    const LteGridConfig& cfg, int lead_slots = 0,
                                    int tail_slots = 0, int lte_slots_per_ctc_slot = 1);

// Nulls (or scales) a fixed count of subcarriers centered on each hole's WiFi
// subcarrier; realizes the prototype's direct weight interface.
SubcarrierWeights card_to_subcarrier_weights(const PunchedCard& card, int null_width,
                                             double weight, const LteGridConfig& cfg,
                                             int lead_slots = 0, int tail_slots = 0,
                                             int lte_slots_per_ctc_slot = 1);

// LTE bins (used-bin indices) covering one WiFi subcarrier band.
std::vector<int> lte_bins_for_wifi_bin(const LteGridConfig& cfg, int wifi_bin,
                                       double halfwidth_hz);

struct GateConfig {
    enum class Mode { DutyCycle, Lbt } mode = Mode::DutyCycle;
    double period = 20e-3;      // duty-cycle period
    double on_fraction = 1.0;   // opens at slot boundaries for whole slots
    double burst = 5e-3;        // LBT burst length, 1-10 ms
    uint64_t seed = 0;          // LBT start randomization
};

ComplexFrame signal_gate(const ComplexFrame& frame, const GateConfig& gate);

// Per-symbol FFT at the LTE grid (CP stripped), one vector per symbol.
SpectralStream lte_scan(const LteGridConfig& cfg, const ComplexFrame& frame);

// CSV: slot, rb, state, offset_db.
void dump_schedule(const RbSchedule& schedule, const std::string& path);

}  // namespace ctc
