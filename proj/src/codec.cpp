#include "ctcsim/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace ctc {

bool PunchedCard::is_hole(int slot, int subcarrier) const {
    const auto& h = holes[slot];
    return std::binary_search(h.begin(), h.end(), subcarrier);
}

double PunchedCard::weight(int slot, int subcarrier) const {
    return is_hole(slot, subcarrier) ? hole_weight : 1.0;
}

int header_slots(const CtcGridLayout& layout) {
    const int header_bits = 12;  // 8-bit length + 4-bit CRC
    return (header_bits + layout.bits_per_slot() - 1) / layout.bits_per_slot();
}

namespace {

uint8_t crc_generic(const Bits& bits, uint8_t poly, int width) {
    uint8_t reg = 0;
    const uint8_t top = uint8_t(1u << (width - 1));
    const uint8_t mask = uint8_t((1u << width) - 1);
    for (uint8_t bit : bits) {
        uint8_t in = uint8_t((reg >> (width - 1)) & 1u) ^ (bit & 1u);
        reg = uint8_t((reg << 1) & mask);
        if (in) reg ^= poly;
        (void)top;
    }
    return reg & mask;
}

}  // namespace

uint8_t crc8(const Bits& bits) { return crc_generic(bits, 0x07, 8); }
uint8_t crc4(const Bits& bits) { return crc_generic(bits, 0x03, 4); }

unsigned bits_to_uint(const Bits& bits, size_t pos, int count) {
    unsigned v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | (bits[pos + i] & 1u);
    return v;
}

void uint_to_bits(unsigned value, int count, Bits& out) {
    for (int i = count - 1; i >= 0; --i) out.push_back(uint8_t((value >> i) & 1u));
}

std::vector<std::vector<int>> preamble_holes(const CtcGridLayout& layout) {
    // Reference pattern for the 48-subcarrier card; other widths scale
    // proportionally. Max cyclic autocorrelation sidelobe is 1 of a peak of 8
    // over all (slot, subcarrier) shifts.
    static const int slot0[4] = {0, 16, 34, 43};
    static const int slot1[4] = {5, 13, 20, 42};
    const int n = layout.num_subcarriers;
    auto scale = [&](int p) { return n == 48 ? p : (p * n) / 48; };
    std::vector<std::vector<int>> out(2);
    for (int i = 0; i < 4; ++i) {
        out[0].push_back(scale(slot0[i]));
        out[1].push_back(scale(slot1[i]));
    }
    std::sort(out[0].begin(), out[0].end());
    std::sort(out[1].begin(), out[1].end());
    return out;
}

CtcFrame make_ctc_frame(const Bits& payload_bits, const CtcGridLayout& layout) {
    layout.validate();
    const int bps = layout.bits_per_slot();
    const int payload_slots = int((payload_bits.size() + 8 + bps - 1) / bps);
    if (payload_slots > 255)
        throw ConfigError("ctc payload exceeds the 8-bit slot-count field");
    CtcFrame f;
    f.payload_slots = std::max(payload_slots, 1);
    f.payload_bits = payload_bits;
    f.payload_bits.resize(size_t(f.payload_slots) * bps - 8, 0);
    f.checksum = crc8(f.payload_bits);
    return f;
}

PunchedCard encode_card(const CtcFrame& frame, const CtcGridLayout& layout,
                        double hole_weight) {
    layout.validate();
    if (hole_weight < 0.0 || hole_weight >= 1.0)
        throw ConfigError("hole weight must be in [0,1)");
    const int bps = layout.bits_per_slot();
    const int bpg = layout.bits_per_group();
    const int hslots = header_slots(layout);

    Bits section;  // header bits then payload+crc bits, slot-aligned groups
    Bits head;
    uint_to_bits(unsigned(frame.payload_slots), 8, head);
    uint_to_bits(crc4(head), 4, head);
    head.resize(size_t(hslots) * bps, 0);

    Bits body = frame.payload_bits;
    uint_to_bits(frame.checksum, 8, body);
    if (int(body.size()) != frame.payload_slots * bps)
        throw ConfigError("ctc frame payload not slot aligned");

    section = head;
    section.insert(section.end(), body.begin(), body.end());

    PunchedCard card;
    card.subcarriers = layout.num_subcarriers;
    card.hole_weight = hole_weight;
    card.slots = kPreambleSlots + hslots + frame.payload_slots;
    card.holes = preamble_holes(layout);
    card.holes.resize(card.slots);
    for (int s = 0; s < hslots + frame.payload_slots; ++s) {
        std::vector<int> holes;
        for (int g = 0; g < layout.num_groups; ++g) {
            unsigned idx = bits_to_uint(section, size_t(s) * bps + size_t(g) * bpg, bpg);
            holes.push_back(g * layout.group_size + int(idx));
        }
        card.holes[kPreambleSlots + s] = std::move(holes);
    }
    return card;
}

SlotDecision decode_slot(const std::vector<double>& powers,
                         const std::vector<double>& reference,
                         const CtcGridLayout& layout, double threshold_db) {
    layout.validate();
    if (int(powers.size()) != layout.num_subcarriers ||
        int(reference.size()) != layout.num_subcarriers)
        throw ConfigError("decode_slot: width mismatch");
    const double thr = db_to_lin(-threshold_db);
    SlotDecision d;
    const int bpg = layout.bits_per_group();
    for (int g = 0; g < layout.num_groups; ++g) {
        const int base = g * layout.group_size;
        int best = 0;
        double best_rel = std::numeric_limits<double>::infinity();
        for (int i = 0; i < layout.group_size; ++i) {
            const double ref = std::max(reference[base + i], 1e-30);
            const double rel = powers[base + i] / ref;
            if (rel < best_rel) {
                best_rel = rel;
                best = i;
            }
        }
        GroupDecision gd;
        gd.min_index = best;
        gd.dip_db = -lin_to_db(std::max(best_rel, 1e-30));
        gd.accepted = best_rel <= thr;
        if (!gd.accepted) d.erased = true;
        uint_to_bits(unsigned(best), bpg, d.bits);
        d.groups.push_back(gd);
    }
    return d;
}

int frame_caps(const CtcGridLayout& layout, double carrier_max_duration) {
    layout.validate();
    const int slots = int(std::floor(carrier_max_duration / layout.slot_duration + 1e-9));
    const int payload = slots - kPreambleSlots - header_slots(layout);
    return std::max(payload, 0) * layout.bits_per_slot();
}

void dump_card(const PunchedCard& card, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write card dump: " + path);
    out << "# ctcsim card v1\nslot,subcarrier,weight\n";
    for (int s = 0; s < card.slots; ++s)
        for (int c = 0; c < card.subcarriers; ++c)
            out << s << ',' << c << ',' << card.weight(s, c) << "\n";
}

}  // namespace ctc
