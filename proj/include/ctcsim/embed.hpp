// embed.hpp - payload-bit interleaving that steers the WiFi convolutional
// encoder into emitting low-amplitude constellation points at card-designated
// cells, plus the receiver-side stripping of the inserted bits
#pragma once

#include "ctcsim/codec.hpp"
#include "ctcsim/types.hpp"
#include "ctcsim/wifi.hpp"

#include <array>
#include <string>
#include <vector>

namespace ctc {

// The 64 encoder states partition into four groups; within a group both
// output bits flip when the input flips. Output pairs are (g133, g171);
// position 0 is the g133 bit (transmitted first).
struct EncoderStateGroup {
    char group = '?';  // 'A'..'D'
    std::array<uint8_t, 2> output_for_0{};
    std::array<uint8_t, 2> output_for_1{};
};

EncoderStateGroup state_group(int encoder_state);

// Per-step steering constraints after folding the per-symbol significance
// matrix through deinterleaving, depuncturing and the 2-bits-per-step output
// structure of the encoder. Bit 0 of a mask refers to output position 0.
struct EmbedPlan {
    int num_symbols = 0;
    int reserved_symbols = 0;  // leading symbols kept clean (carry CTC header bits)
    int symbols_per_slot = 0;
    CodeRate rate = CodeRate::R23;
    std::vector<uint8_t> s_mask;  // per encoder step, 2-bit constraint mask
    std::vector<uint8_t> b_req;   // required output bits, packed like s_mask
    std::vector<int32_t> cell0;   // owning cell (symbol*52+subcarrier) per position, -1 if free
    std::vector<int32_t> cell1;
    std::vector<uint8_t> sig52;   // 52 x num_symbols significance, index sc + 52*symbol

    int steps_per_symbol() const;
    int total_steps() const { return num_symbols * steps_per_symbol(); }
    int constrained_steps() const;
    // Payload bits consumed by the pass-through positions.
    int passthrough_capacity() const { return total_steps() - constrained_steps(); }
    int column_weight(int symbol) const;  // significant bits in that column
};

// Steps (ii)-(vi): map card holes onto the data subcarriers, replicate to bit
// rows with the min-amplitude bit mask (sign bits stay free), permute by the
// deinterleaver, expand by the depuncture pattern and fold into per-step
// two-bit vectors. Symbols [0, reserved_symbols) stay unconstrained.
EmbedPlan build_plan(const PunchedCard& card, CodeRate rate, int symbols_per_slot,
                     int reserved_symbols, int num_symbols);

struct ChoiceResult {
    uint8_t input = 0;
    std::array<uint8_t, 2> emitted{};
    bool satisfied = true;  // false only when both bits were constrained and one lost
};

// Free mask: pass payload_bit through. One constrained bit: always
// satisfiable. Both constrained: satisfy position 0, position 1 only if the
// group happens to match.
ChoiceResult choose_input(uint8_t s_mask, uint8_t b_req, const EncoderStateGroup& group,
                          uint8_t payload_bit);

struct MuxResult {
    Bits stream;            // encoder input, length = plan.total_steps()
    int payload_consumed = 0;
    std::vector<std::pair<int, int>> fail_positions;  // (step, output position)
    double cell_fail_rate = 0.0;  // violated cells / constrained cells
    int constrained_cells = 0;
    int violated_cells = 0;
};

// Step (vii): walk the encoder state, multiplexing payload bits with pattern
// bits. Throws on payload underrun.
MuxResult mux_bitstream(const EmbedPlan& plan, const Bits& payload_bits);

// Added bits per OFDM symbol over payload bits per symbol for the code rate
// (12/208 at 2/3, 12/260 at 5/6 for the 3x16 card).
double embed_overhead(CodeRate rate, const CtcGridLayout& layout);

// --- TX/RX framing of a CTC message inside a WiFi payload -------------------

// Geometry tying one CTC message to a WiFi frame: the message header (16-bit
// length + bits) leads the payload inside clean symbols, the card spans
// symbols_per_slot symbols per slot, one unconstrained tail symbol closes.
struct WifiCtcFraming {
    CtcGridLayout layout;
    PunchedCard card;
    EmbedPlan plan;
    int reserved_symbols = 0;
    int num_symbols = 0;
    int capacity_bits = 0;  // pass-through payload capacity
};

WifiCtcFraming make_wifi_ctc_framing(const Bits& ctc_payload_bits, CodeRate rate,
                                     const CtcGridLayout& layout, int symbols_per_slot,
                                     double hole_weight);

// [len16][ctc bits][data bits][zero pad][crc8], sized to capacity_bits.
Bits make_embedded_payload(const WifiCtcFraming& framing, const Bits& ctc_payload_bits,
                           const Bits& data_bits);

struct StripResult {
    bool ok = false;
    Bits ctc_bits;
    Bits wifi_payload;  // full recovered payload including header and CRC
    Bits data_bits;     // payload minus CTC header, pad and CRC
};

// Receiver-side recovery: triggered by a failed CRC over the raw decoded
// stream; reads the CTC header, regenerates the steering vector, removes the
// pattern bits (in the scrambled domain) and re-checks the CRC.
StripResult strip_ctc(const Bits& decoded_stream, CodeRate rate, int scrambler_seed,
                      const CtcGridLayout& layout, int symbols_per_slot, double hole_weight,
                      int data_bits_hint = -1);

// Debug dump: symbol, coded-bit position, required bit, satisfied flag.
void dump_plan(const EmbedPlan& plan, const MuxResult& mux, const std::string& path);

}  // namespace ctc
