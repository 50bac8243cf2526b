// harness.hpp - experiment runner: end-to-end CTC pipelines for both
// directions, parameter sweeps, CSV results, spectrogram dumps
#pragma once

#include "ctcsim/channel.hpp"
#include "ctcsim/grid.hpp"
#include "ctcsim/lte.hpp"
#include "ctcsim/rxdsp.hpp"
#include "ctcsim/types.hpp"
#include "ctcsim/wifi.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ctc {

enum class Direction { WifiToLte, LteToWifi };
enum class LteTxMode { Blacklist, Power, NullWidth };
enum class CombineMode { Single, Mrc, Majority };

struct TrialParams {
    Direction direction = Direction::LteToWifi;
    std::optional<double> snr_db = 20.0;  // nullopt = noiseless
    int payload_slots = 17;
    double threshold_db = 4.0;       // slot decision threshold
    double detect_threshold = 0.6;   // preamble correlation threshold
    // LTE -> WiFi
    int fft_points = 256;
    double tail_fraction = 0.2;      // scan-interval tail (Fig. 8 model)
    LteTxMode lte_mode = LteTxMode::Blacklist;
    int rbs_per_subcarrier = 3;
    double rb_offset_db = -9.0;
    int null_width = 24;
    int symbol_scale = 1;            // LTE slots per CTC symbol
    int repetitions = 1;
    CombineMode combine = CombineMode::Single;
    // WiFi -> LTE
    CodeRate rate = CodeRate::R56;
    SlotCorrection correction = SlotCorrection::Periodic;
    double frame_duration_cap = 12e-3;  // SDR-style long frames allowed
    // channel extras
    double cfo_hz = 0.0;
    double timing_offset = 0.0;
    std::optional<InterfererConfig> interferer;
};

struct TrialOutcome {
    bool detected = false;
    bool header_ok = false;
    bool crc_ok = false;
    bool ok = false;  // payload decoded exactly
    int erased_slots = 0;
    double mean_dip_db = 0.0;
    double steer_fail_rate = 0.0;  // WiFi->LTE only
};

TrialOutcome run_ctc_trial(const TrialParams& params, uint64_t seed);

enum class SweepVar {
    SnrDb,
    NulledSubcarriers,
    RbOffsetDb,
    Repetitions,
    SymbolScale,
    FrameDuration,
};

struct Experiment {
    TrialParams base;
    SweepVar var = SweepVar::SnrDb;
    std::vector<double> points;
    int trials = 1000;
    uint64_t seed = 1;
    int num_threads = 0;  // 0 = hardware concurrency
    std::string output_path;
};

struct FerPoint {
    double point = 0.0;
    double fer = 0.0;
    double frr = 0.0;
    double mean_dip_db = 0.0;
    int trials = 0;
};

std::vector<FerPoint> run_fer_sweep(const Experiment& exp);

struct LegacyImpactResult {
    double snr_db = 0.0;
    int trials = 0;
    double fer_plain = 0.0;
    double fer_embedded = 0.0;
    double ber_plain = 0.0;
    double ber_embedded = 0.0;
    double overhead = 0.0;
    double z_score = 0.0;
    double p_value = 0.0;
};

struct LegacyImpactParams {
    std::optional<double> snr_db = 19.0;
    CodeRate rate = CodeRate::R23;
    int data_bits = 4000;
    int ctc_payload_slots = 4;
    int trials = 1000;
    uint64_t seed = 1;
    int num_threads = 0;
    std::string output_path;
};

LegacyImpactResult run_legacy_impact(const LegacyImpactParams& params);

// Spectrogram CSVs and card dumps for both directions, noiseless.
void dump_artifacts(const std::string& out_dir, uint64_t seed = 7);

// Helpers shared with tests
Bits random_bits(size_t n, uint64_t seed);
double two_proportion_p_value(int err1, int err2, int n);

// Fixed geometry of the WiFi->LTE embedding (Table-aligned): 36 WiFi symbols
// per CTC slot, amplitude ratio of the min-power constellation points.
int wifi_symbols_per_ctc_slot();
double wifi_hole_weight();

}  // namespace ctc
