// channel.hpp - impairments between TX waveform and RX observation
#pragma once

#include "ctcsim/types.hpp"

#include <optional>
#include <vector>

namespace ctc {

struct InterfererConfig {
    double offered_load = 0.0;     // duty fraction of interferer bursts
    double frame_duration = 1e-3;  // burst length
    double relative_power_db = 0.0;
};

struct ChannelConfig {
    // SNR over the TX occupied band; unset means noiseless.
    std::optional<double> snr_db;
    double cfo_hz = 0.0;
    double timing_offset = 0.0;  // seconds, fractional-sample delay
    std::optional<InterfererConfig> interferer;
    // Optional frequency-selective gain: piecewise-linear gain (dB) sampled at
    // uniformly spaced points across the occupied band.
    std::vector<double> gain_profile_db;
    // Occupied band of the TX around DC, baseband Hz; noise power is measured
    // against the signal inside this band.
    double band_halfwidth = 0.0;
};

// Measures in-band signal power over active (non-gated) segments.
double inband_power(const ComplexFrame& frame, double band_halfwidth);

ComplexFrame channel_apply(const ComplexFrame& frame, const ChannelConfig& config,
                           uint64_t seed);

}  // namespace ctc
