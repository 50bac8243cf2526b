// grid.hpp - OFDM grid geometry, cross-observable resource block (CORB)
// solving, overlap bands and CTC rate computations
#pragma once

#include "ctcsim/types.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ctc {

// One OFDM technology's time-frequency geometry.
struct GridSpec {
    double sampling_rate = 0.0;       // Hz
    int fft_size = 0;
    double subcarrier_spacing = 0.0;  // Hz, sampling_rate / fft_size
    std::vector<int> used_bins;       // relative to DC, ascending
    std::vector<int> pilot_bins;      // subset of used_bins
    double fft_period = 0.0;          // seconds, fft_size / sampling_rate
    double cyclic_prefix = 0.0;       // seconds (nominal, per symbol)
    double symbol_duration = 0.0;     // fft_period + cyclic_prefix
    double center_frequency = 0.0;    // Hz
    // Per-symbol CP lengths in samples when the nominal CP is not an integer
    // number of samples (LTE slot layout); empty means uniform round(cp*rate).
    std::vector<int> cp_sample_pattern;

    static GridSpec make(double sampling_rate, int fft_size, double cyclic_prefix,
                         std::vector<int> used_bins, std::vector<int> pilot_bins,
                         double center_frequency,
                         std::vector<int> cp_sample_pattern = {});

    int cp_samples(int symbol_index) const;
    int symbol_samples(int symbol_index) const;
    double occupied_bandwidth() const { return used_bins.size() * subcarrier_spacing; }
    // Occupied band as absolute frequencies, width = |used| * spacing, co-centered.
    std::pair<double, double> occupied_band() const;
    int bin_index(int bin) const;  // position of `bin` in used_bins, -1 if absent
    void validate() const;
};

GridSpec wifi_80211n_20mhz(double center_frequency = 5.5e9);
GridSpec lte_20mhz(double center_frequency = 5.5e9);
GridSpec grid_preset(const std::string& name);
// Structured-text (JSON) config with keys matching the field names above,
// or {"preset": "wifi-80211n-20mhz"|"lte-20mhz"}.
GridSpec load_grid_config(const std::string& path);

// Cross-observable resource block: TX- and RX-side extent of the smallest
// power-modulation tile one technology can resolve in the other's grid.
struct Corb {
    int tx_subcarriers = 0;  // n
    int rx_subcarriers = 0;  // m
    int tx_symbols = 0;      // a
    int rx_symbols = 0;      // b
    double tx_subcarrier_spacing = 0.0;
    double rx_subcarrier_spacing = 0.0;
    double tx_symbol_duration = 0.0;
    double rx_symbol_duration = 0.0;
    double eps_f = 0.0;  // m*rx_spacing - n*tx_spacing (positive = RX shortfall)
    double eps_t = 0.0;  // b*rx_symbol - a*tx_symbol

    // Canonical (RX-aligned) extents; both sides are exposed because the two
    // durations legitimately differ by the residual.
    double width() const { return rx_subcarriers * rx_subcarrier_spacing; }
    double duration() const { return rx_symbols * rx_symbol_duration; }
    double tx_width() const { return tx_subcarriers * tx_subcarrier_spacing; }
    double tx_duration() const { return tx_symbols * tx_symbol_duration; }
};

enum class CorbMode { Strict, Relaxed };

struct CorbOptions {
    CorbMode mode = CorbMode::Relaxed;
    // Negative means "default": 5% of the coarser quantum in that dimension.
    double eps_limit_f = -1.0;  // Hz
    double eps_limit_t = -1.0;  // seconds
    // TX power-control granularity (e.g. one LTE RB = 12 subcarriers x 7 symbols).
    int tx_freq_granularity = 1;
    int tx_time_granularity = 1;
    int search_bound = 1024;
};

// Minimal-area CORB satisfying the covering constraints with residuals within
// limits. Duration is minimized first, then width; ties break toward the
// smaller residual and then the smaller TX count. Throws NoSolution.
Corb solve_corb(const GridSpec& tx, const GridSpec& rx, const CorbOptions& opts = {});

using Band = std::pair<double, double>;
// Interval intersection of the two occupied bands; nullopt when disjoint.
std::optional<Band> overlap_band(const GridSpec& tx, const GridSpec& rx);

// Nyquist capacity of the CTC channel for P distinguishable power levels.
double nyquist_ctc_rate(const Corb& corb, const Band& overlap, int power_levels);

// Time-frequency geometry of the CTC grid carried on top of one technology.
struct CtcGridLayout {
    double slot_duration = 0.0;    // seconds
    double subcarrier_width = 0.0; // Hz
    int num_subcarriers = 0;
    int group_size = 0;            // N of the 1-of-N encoding, power of two
    int num_groups = 0;

    int bits_per_group() const;
    int bits_per_slot() const { return num_groups * bits_per_group(); }
    void validate() const;
};

double card_rate(const CtcGridLayout& layout);  // bits/s

// Card layouts used by the WiFi/LTE pairing: 48 subcarriers, 3 groups of 16.
CtcGridLayout wifi_to_lte_layout();
CtcGridLayout lte_to_wifi_layout();

// The 48 WiFi data subcarriers carrying CTC, ascending: data bins in
// [-27,-2] and [2,27] excluding pilots. Bins +-1 stay clear of the LTE
// sync region and +-28 are dropped to keep the card symmetric.
const std::vector<int>& ctc_wifi_bins();

}  // namespace ctc
