// codec.hpp - punched-card framing: 1-of-N group encoding, preamble,
// header, frame caps, card <-> bit mapping
#pragma once

#include "ctcsim/grid.hpp"
#include "ctcsim/types.hpp"

#include <string>
#include <vector>

namespace ctc {

// CTC frame as a slot x subcarrier hole matrix. Hole cells carry
// hole_weight (< 1), all other cells weight 1.
struct PunchedCard {
    int slots = 0;
    int subcarriers = 0;
    double hole_weight = 0.0;
    std::vector<std::vector<int>> holes;  // per slot, ascending subcarrier indices

    bool is_hole(int slot, int subcarrier) const;
    double weight(int slot, int subcarrier) const;
};

struct CtcFrame {
    int payload_slots = 0;   // 8-bit length field
    Bits payload_bits;       // padded to payload_slots*bits_per_slot - 8
    uint8_t checksum = 0;    // CRC-8 over the padded payload
};

constexpr int kPreambleSlots = 2;

int header_slots(const CtcGridLayout& layout);  // ceil(12 / bits_per_slot)

// Generic CRCs used by the framing; both detect any single-bit flip.
uint8_t crc8(const Bits& bits);
uint8_t crc4(const Bits& bits);

unsigned bits_to_uint(const Bits& bits, size_t pos, int count);  // MSB first
void uint_to_bits(unsigned value, int count, Bits& out);

// Fixed preamble hole pattern (4 low-power cells per slot over 2 slots),
// chosen for low cyclic-autocorrelation sidelobes.
std::vector<std::vector<int>> preamble_holes(const CtcGridLayout& layout);

// Payload bits are padded with zeros up to the slot capacity; the CRC-8 sits
// in the last 8 bits of the payload section. Throws when the payload exceeds
// max_payload_slots (255) worth of bits.
CtcFrame make_ctc_frame(const Bits& payload_bits, const CtcGridLayout& layout);

// preamble + header (length, CRC-4) + payload slots, one hole per group per
// slot, hole index = group bits read MSB-first.
PunchedCard encode_card(const CtcFrame& frame, const CtcGridLayout& layout,
                        double hole_weight = 0.0);

struct GroupDecision {
    int min_index = 0;     // within group
    double dip_db = 0.0;   // depth of the minimum relative to reference
    bool accepted = false; // below threshold
};

struct SlotDecision {
    Bits bits;
    bool erased = false;  // some group had no candidate below threshold
    std::vector<GroupDecision> groups;
};

// Per group: hole = index of the minimum relative power when it clears
// reference - threshold_db; ties break to the lower index.
SlotDecision decode_slot(const std::vector<double>& powers,
                         const std::vector<double>& reference,
                         const CtcGridLayout& layout, double threshold_db = 4.0);

// Max payload-section bits for a carrier transmission budget:
// (floor(duration/slot) - preamble - header) * bits_per_slot.
int frame_caps(const CtcGridLayout& layout, double carrier_max_duration);

// CSV dump: slot, subcarrier, weight.
void dump_card(const PunchedCard& card, const std::string& path);

}  // namespace ctc
