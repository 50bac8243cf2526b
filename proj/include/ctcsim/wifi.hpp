// wifi.hpp - 802.11n-like single-stream 20 MHz transmit chain, reference
// receiver and spectral-scan model with irregular sample timing
#pragma once

#include "ctcsim/grid.hpp"
#include "ctcsim/types.hpp"
#include "ctcsim/waveform.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace ctc {

struct EmbedPlan;  // embed.hpp

enum class CodeRate { R12, R23, R56 };

struct WifiChainConfig {
    CodeRate code_rate = CodeRate::R23;
    int scrambler_seed = 1;
    bool fixed_scrambler_seed = true;
    // When fixed_scrambler_seed is false the device applies this seed while
    // steering was designed for scrambler_seed (models cycling hardware seeds).
    int device_seed = 1;
    int preamble_symbols = 5;           // opaque PLCP region, unit power
    double frame_duration_cap = 5.484e-3;

    static constexpr int n_bpsc = 6;    // bits per subcarrier (64-QAM)
    static constexpr int n_data_bins = 52;
    static constexpr int n_cbps = 312;  // coded bits per symbol

    int coded_per_step() const { return 2; }
    // Encoder input bits carried per OFDM symbol: 156/208/260 at 1/2, 2/3, 5/6.
    int steps_per_symbol() const {
        switch (code_rate) {
            case CodeRate::R12: return 156;
            case CodeRate::R23: return 208;
            case CodeRate::R56: return 260;
        }
        return 0;
    }
};

// --- bit-level chain pieces -------------------------------------------------

// 127-periodic synchronous scrambler (x^7 + x^4 + 1); involutive for a fixed
// seed. Seed 0 is rejected.
Bits scramble(const Bits& bits, int seed);

// Rate-1/2 constraint-7 convolutional encoder, generators 133/171 octal.
// Output order per step: generator 133 bit first.
Bits conv_encode(const Bits& bits);

// Hard-decision Viterbi, zero initial state, full-block traceback. Input may
// contain 2 = erased (depunctured) positions which contribute no metric.
Bits viterbi_decode(const Bits& coded_with_erasures);

Bits puncture(const Bits& bits, CodeRate rate);
Bits depuncture(const Bits& bits, CodeRate rate);               // zeros at dropped positions
Bits depuncture_erasures(const Bits& bits, CodeRate rate);      // 2 at dropped positions
const std::vector<uint8_t>& puncture_pattern(CodeRate rate);

// Standard two-permutation block interleaver for N_CBPS=312, N_BPSC=6.
Bits interleave(const Bits& block);
Bits deinterleave(const Bits& block);
// Position map: output index j = interleave_map()[k] carries input bit k.
const std::vector<int>& interleave_map();
const std::vector<int>& deinterleave_map();

// Gray-mapped 64-QAM, unnormalized (average constellation power 42).
// Bit order is transmission order; bits 0 and 3 are the I/Q sign bits.
cplx qam64_map(const uint8_t bits6[6]);
void qam64_demap(cplx point, uint8_t bits6[6]);

// --- frame-level chain ------------------------------------------------------

struct WifiFrame {
    ComplexFrame frame;
    int num_symbols = 0;         // data symbols (excluding PLCP region)
    Bits encoder_input;          // post-steering stream fed to the encoder
    double steer_cell_fail_rate = 0.0;
    SymbolMatrix symbol_matrix;  // data-region loads (normalized), for tests
};

// scramble -> (mux steering) -> encode -> puncture -> interleave -> map ->
// pilots -> modulate. payload_bits must fill exactly the pass-through
// positions of the plan (or a whole number of symbols when plan is null).
WifiFrame wifi_tx(const GridSpec& grid, const WifiChainConfig& cfg, const Bits& payload_bits,
                  const EmbedPlan* plan = nullptr, double start_time = 0.0);

// Reference receiver, genie-aligned: demap -> deinterleave -> depuncture ->
// Viterbi -> descramble. Returns the descrambled stream (steering bits still
// inline when a plan was used; strip_ctc removes them).
Bits wifi_rx(const GridSpec& grid, const WifiChainConfig& cfg, const ComplexFrame& frame,
             int num_symbols);

// Spectral-scan sample timing: gaps are nominal_interval with probability
// (1 - tail_fraction) and uniform in [tail_min, tail_max] otherwise.
struct ScanTimingModel {
    double nominal_interval = 20e-6;
    double tail_fraction = 0.0;
    double tail_min = 75e-6;
    double tail_max = 300e-6;
};

// psd_scan subsampled by the timing model; samples carry true timestamps.
SpectralStream wifi_scan(const GridSpec& grid, const ComplexFrame& frame, int fft_points,
                         const ScanTimingModel& timing, uint64_t seed);

}  // namespace ctc
