// rxdsp.hpp - CTC receiver pipeline: stream resampling, 2D preamble
// correlation, reference estimation, slot-corrected demodulation, combining
#pragma once

#include "ctcsim/codec.hpp"
#include "ctcsim/grid.hpp"
#include "ctcsim/lte.hpp"
#include "ctcsim/types.hpp"

#include <string>
#include <vector>

namespace ctc {

// Regular power stream after windowed aggregation of irregular scan samples.
struct ResampledStream {
    double window = 0.0;      // seconds
    double start_time = 0.0;  // first window start
    std::vector<std::vector<double>> rows;  // per window, per bin
    std::vector<int> counts;  // scan vectors aggregated per window (0 = repeat fill)
    int gap_fill_count = 0;
    int leading_gap_windows = 0;

    double row_time(int r) const { return start_time + r * window; }
    int num_rows() const { return int(rows.size()); }
};

// Per window: mean of all vectors inside; empty windows repeat the previous
// aggregated vector; leading empties before any sample become zero vectors.
ResampledStream resample(const SpectralStream& stream, double window);

// RX bins contributing to each CTC subcarrier.
struct CtcBinMap {
    std::vector<std::vector<int>> idx;  // per subcarrier, indices into row powers
};

// WiFi-side receiver: one grid bin per CTC subcarrier.
CtcBinMap make_wifi_rx_map(const GridSpec& wifi_grid);
// LTE-side receiver: bins within +-halfwidth of each WiFi subcarrier center.
// The default keeps the central 13 of ~21 bins, which trades a little noise
// averaging for less spectral spill from the neighbors.
CtcBinMap make_lte_rx_map(const LteGridConfig& lte, double halfwidth_hz = 97.5e3);

// Per-window per-CTC-subcarrier power series. The regular window rows drive
// preamble detection; when the raw timestamped samples are attached, slot
// aggregation uses them directly so irregular sampling gaps cost nothing.
struct CtcRawSample {
    double t = 0.0;  // snapshot start
    std::vector<double> p;
};

struct CtcPowerSeries {
    double window = 0.0;
    double start_time = 0.0;
    std::vector<std::vector<double>> rows;  // per window, width = subcarriers
    std::vector<int> counts;                // real-sample count per window
    std::vector<CtcRawSample> raw;          // optional, time ordered
    double snapshot_duration = 0.0;

    double row_time(int r) const { return start_time + r * window; }
    int num_rows() const { return int(rows.size()); }
    bool stale(int r) const { return r < int(counts.size()) && counts[r] == 0; }
};

CtcPowerSeries project_to_ctc_grid(const ResampledStream& stream, const CtcBinMap& map);
// Variant that also projects and attaches the raw scan samples.
CtcPowerSeries project_to_ctc_grid(const ResampledStream& stream, const SpectralStream& scan,
                                   const CtcBinMap& map);

// Expected relative power pattern of the preamble (rows = windows).
struct PreambleTemplate {
    int windows_per_slot = 0;
    std::vector<std::vector<double>> rows;  // linear relative power (1 or weight^2)
};

PreambleTemplate make_preamble_template(const CtcGridLayout& layout, int windows_per_slot,
                                        double hole_weight);

struct SyncState {
    bool detected = false;
    int row = -1;               // window index of the preamble start
    double time_offset = 0.0;   // fractional start refinement, seconds
    double correlation_peak = 0.0;
    std::vector<double> reference;  // per-subcarrier linear power

    double start_time(const CtcPowerSeries& series) const {
        return series.row_time(row) + time_offset;
    }
};

// Normalized 2D cross-correlation in the log-power domain, evaluated per row;
// first local peak above threshold wins.
SyncState detect_preamble(const CtcPowerSeries& series, const PreambleTemplate& templ,
                          double threshold = 0.6);

// Sub-window refinement of the preamble start: scans fractional offsets
// around the detected row and keeps the one maximizing the dip contrast of
// the preamble cells under overlap-weighted aggregation.
void refine_sync(const CtcPowerSeries& series, SyncState& sync, const CtcGridLayout& layout,
                 double true_slot_duration);

// Mean power per subcarrier over the preamble with template dips reverted
// (cells with weight 0 are skipped, weighted cells divided by weight^2).
std::vector<double> estimate_reference(const CtcPowerSeries& series, const SyncState& sync,
                                       const PreambleTemplate& templ, double hole_weight);

enum class SlotCorrection { None, Periodic };

struct SlotTrace {
    int slot = 0;
    SlotDecision decision;
};

struct DemodResult {
    bool detected = false;
    bool header_ok = false;
    bool crc_ok = false;
    int payload_slots = 0;
    Bits payload_bits;
    int erased_slots = 0;
    double mean_dip_db = 0.0;
    double max_boundary_error = 0.0;  // seconds, periodic correction only
    std::vector<SlotTrace> trace;
};

// Aggregates windows per CTC slot from the sync point on. With periodic
// correction slot boundaries advance by true_slot_duration in continuous
// time (grouping a variable number of windows); without it a fixed
// round(nominal/window) windows per slot are taken.
DemodResult demodulate_frame(const CtcPowerSeries& series, const SyncState& sync,
                             const CtcGridLayout& layout, SlotCorrection correction,
                             double true_slot_duration, double threshold_db = 4.0);

// SNR-weighted per-cell power combining of individually synced copies;
// returns a combined series anchored at row 0 with its own sync state.
struct MrcResult {
    CtcPowerSeries series;
    SyncState sync;
};
MrcResult mrc_combine(const std::vector<CtcPowerSeries>& copies,
                      const std::vector<SyncState>& syncs, const PreambleTemplate& templ,
                      double hole_weight);

// Per-slot, per-group majority vote across independently demodulated copies.
DemodResult majority_vote(const std::vector<DemodResult>& copies,
                          const CtcGridLayout& layout);

// CSV trace: slot, group, min index, dip dB, decision/erasure.
void dump_decoder_trace(const DemodResult& result, const std::string& path);

}  // namespace ctc
