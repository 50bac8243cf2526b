// waveform.hpp - OFDM symbol assembly/disassembly and PSD scanning
#pragma once

#include "ctcsim/grid.hpp"
#include "ctcsim/types.hpp"

#include <string>
#include <vector>

namespace ctc {

// Per-symbol rows of per-used-bin complex loads.
using SymbolMatrix = std::vector<std::vector<cplx>>;

// Place loads on used bins, zero elsewhere, IFFT (1/sqrt(N)), prepend CP.
ComplexFrame ofdm_modulate(const GridSpec& grid, const SymbolMatrix& symbols,
                           double start_time = 0.0);

// Strip CP, forward FFT, extract used bins; genie-aligned at symbol_offset
// seconds into the frame. Throws when fewer than one symbol remains.
SymbolMatrix ofdm_demodulate(const GridSpec& grid, const ComplexFrame& frame,
                             double symbol_offset = 0.0, int max_symbols = -1);

// Scanning-receiver PSD estimate: one power vector per fft_period, windows of
// fft_points samples hopping by fft_size. fft_points must be fft_size or
// 4*fft_size; in the latter case each reported bin is the sum of the four
// finer bins covering it. Powers are |X|^2 / fft_points so white noise of
// power s^2 reads s^2/fft_size per bin.
SpectralStream psd_scan(const GridSpec& grid, const ComplexFrame& frame, int fft_points);

// CSV: first column timestamp in microseconds, then per-bin power in dB,
// bins ascending in frequency.
void spectrogram_export(const SpectralStream& stream, const std::string& path);

}  // namespace ctc
