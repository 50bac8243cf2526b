#include "ctcsim/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>

namespace ctc {

namespace {

inline int parity7(unsigned w) { return std::popcount(w) & 1; }
constexpr unsigned kGenA = 0b1011011;
constexpr unsigned kGenB = 0b1111001;

// Required bits of the min-amplitude constellation points per in-group bit
// position (transmission order); positions 0 and 3 are the free sign bits.
constexpr int kConstrainedPos[4] = {1, 2, 4, 5};
constexpr uint8_t kRequiredBit[6] = {0, 1, 0, 0, 1, 0};

// CTC subcarrier index -> row in the 52-wide data-subcarrier matrix.
const std::vector<int>& ctc_data_rows() {
    static const std::vector<int> rows = [] {
        // data bins ascending (used minus pilots) for the 802.11n grid
        std::vector<int> data;
        for (int b = -28; b <= 28; ++b) {
            if (b == 0 || b == -21 || b == -7 || b == 7 || b == 21) continue;
            data.push_back(b);
        }
        std::vector<int> rows;
        for (int bin : ctc_wifi_bins()) {
            auto it = std::lower_bound(data.begin(), data.end(), bin);
            rows.push_back(int(it - data.begin()));
        }
        return rows;
    }();
    return rows;
}

}  // namespace

EncoderStateGroup state_group(int encoder_state) {
    if (encoder_state < 0 || encoder_state >= 64) throw ConfigError("encoder state out of range");
    EncoderStateGroup g;
    for (int u = 0; u < 2; ++u) {
        unsigned w = (unsigned(u) << 6) | unsigned(encoder_state);
        uint8_t a = uint8_t(parity7(w & kGenA));
        uint8_t b = uint8_t(parity7(w & kGenB));
        if (u == 0)
            g.output_for_0 = {a, b};
        else
            g.output_for_1 = {a, b};
    }
    const int key = (g.output_for_0[0] << 1) | g.output_for_0[1];
    static const char label[4] = {'A', 'D', 'C', 'B'};  // 00 A, 01 D, 10 C, 11 B
    g.group = label[key];
    return g;
}

int EmbedPlan::steps_per_symbol() const {
    WifiChainConfig c;
    c.code_rate = rate;
    return c.steps_per_symbol();
}

int EmbedPlan::constrained_steps() const {
    int n = 0;
    for (uint8_t m : s_mask) n += (m != 0);
    return n;
}

int EmbedPlan::column_weight(int symbol) const {
    int n = 0;
    for (int sc = 0; sc < 52; ++sc) n += sig52[sc + 52 * symbol] ? 4 : 0;
    return n;
}

EmbedPlan build_plan(const PunchedCard& card, CodeRate rate, int symbols_per_slot,
                     int reserved_symbols, int num_symbols) {
    if (card.subcarriers != 48)
        throw ConfigError("build_plan: card must use the 48-subcarrier layout");
    if (reserved_symbols + card.slots * symbols_per_slot > num_symbols)
        throw ConfigError("build_plan: card does not fit the symbol budget");
    EmbedPlan plan;
    plan.num_symbols = num_symbols;
    plan.reserved_symbols = reserved_symbols;
    plan.symbols_per_slot = symbols_per_slot;
    plan.rate = rate;
    const int sps = plan.steps_per_symbol();
    plan.s_mask.assign(size_t(num_symbols) * sps, 0);
    plan.b_req.assign(size_t(num_symbols) * sps, 0);
    plan.cell0.assign(size_t(num_symbols) * sps, -1);
    plan.cell1.assign(size_t(num_symbols) * sps, -1);
    plan.sig52.assign(size_t(num_symbols) * 52, 0);

    const auto& pat = puncture_pattern(rate);
    // encoder-output index of each kept (post-puncture) position
    std::vector<int> kept_offset;
    for (size_t i = 0; i < pat.size(); ++i)
        if (pat[i]) kept_offset.push_back(int(i));
    const int kept_per_period = int(kept_offset.size());
    const auto& deinter = deinterleave_map();
    const auto& rows = ctc_data_rows();

    for (int slot = 0; slot < card.slots; ++slot) {
        const int col0 = reserved_symbols + slot * symbols_per_slot;
        for (int ctc_sc : card.holes[slot]) {
            const int row = rows.at(ctc_sc);
            for (int j = col0; j < col0 + symbols_per_slot; ++j) {
                plan.sig52[row + 52 * j] = 1;
                for (int pos : kConstrainedPos) {
                    const int p = 6 * row + pos;       // post-interleave bit index
                    const int q = deinter[p];          // post-puncture index
                    const int e = (q / kept_per_period) * int(pat.size()) +
                                  kept_offset[q % kept_per_period];
                    const int step = j * sps + e / 2;
                    const int out_pos = e % 2;
                    plan.s_mask[step] |= uint8_t(1 << out_pos);
                    if (kRequiredBit[pos])
                        plan.b_req[step] |= uint8_t(1 << out_pos);
                    (out_pos == 0 ? plan.cell0 : plan.cell1)[step] = row + 52 * j;
                }
            }
        }
    }
    return plan;
}

ChoiceResult choose_input(uint8_t s_mask, uint8_t b_req, const EncoderStateGroup& group,
                          uint8_t payload_bit) {
    ChoiceResult r;
    if (s_mask == 0) {
        r.input = payload_bit & 1;
    } else if (s_mask == 1 || s_mask == 2) {
        const int pos = (s_mask == 1) ? 0 : 1;
        const uint8_t want = uint8_t((b_req >> pos) & 1);
        r.input = (group.output_for_0[pos] == want) ? 0 : 1;
    } else {
        // both constrained: satisfy position 0, position 1 only by luck
        const uint8_t want0 = uint8_t(b_req & 1);
        r.input = (group.output_for_0[0] == want0) ? 0 : 1;
        const auto& emitted = r.input ? group.output_for_1 : group.output_for_0;
        r.satisfied = emitted[1] == uint8_t((b_req >> 1) & 1);
    }
    r.emitted = r.input ? group.output_for_1 : group.output_for_0;
    return r;
}

MuxResult mux_bitstream(const EmbedPlan& plan, const Bits& payload_bits) {
    MuxResult out;
    const int total = plan.total_steps();
    out.stream.resize(total);
    size_t idx = 0;
    unsigned hist = 0;
    std::set<int32_t> constrained, violated;
    for (int t = 0; t < total; ++t) {
        const uint8_t mask = plan.s_mask[t];
        uint8_t u;
        if (mask == 0) {
            if (idx >= payload_bits.size())
                throw ConfigError("mux_bitstream: payload underrun");
            u = payload_bits[idx++] & 1;
        } else {
            if (plan.cell0[t] >= 0) constrained.insert(plan.cell0[t]);
            if (plan.cell1[t] >= 0) constrained.insert(plan.cell1[t]);
            const ChoiceResult c = choose_input(mask, plan.b_req[t], state_group(int(hist)), 0);
            u = c.input;
            if (!c.satisfied) {
                out.fail_positions.emplace_back(t, 1);
                if (plan.cell1[t] >= 0) violated.insert(plan.cell1[t]);
            }
        }
        out.stream[t] = u;
        hist = (((unsigned(u) << 6) | hist) >> 1) & 0x3F;
    }
    out.payload_consumed = int(idx);
    out.constrained_cells = int(constrained.size());
    out.violated_cells = int(violated.size());
    out.cell_fail_rate =
        constrained.empty() ? 0.0 : double(violated.size()) / double(constrained.size());
    return out;
}

double embed_overhead(CodeRate rate, const CtcGridLayout& layout) {
    WifiChainConfig c;
    c.code_rate = rate;
    const int added = layout.num_groups * (WifiChainConfig::n_bpsc - 2);
    return double(added) / double(c.steps_per_symbol());
}

WifiCtcFraming make_wifi_ctc_framing(const Bits& ctc_payload_bits, CodeRate rate,
                                     const CtcGridLayout& layout, int symbols_per_slot,
                                     double hole_weight) {
    WifiCtcFraming f;
    f.layout = layout;
    f.card = encode_card(make_ctc_frame(ctc_payload_bits, layout), layout, hole_weight);
    WifiChainConfig c;
    c.code_rate = rate;
    const int sps = c.steps_per_symbol();
    const int head_bits = 16 + int(ctc_payload_bits.size());
    f.reserved_symbols = (head_bits + sps - 1) / sps;
    f.num_symbols = f.reserved_symbols + f.card.slots * symbols_per_slot + 1;
    f.plan = build_plan(f.card, rate, symbols_per_slot, f.reserved_symbols, f.num_symbols);
    f.capacity_bits = f.plan.passthrough_capacity();
    if (f.capacity_bits < head_bits + 8)
        throw ConfigError("wifi frame too small for the CTC header");
    return f;
}

Bits make_embedded_payload(const WifiCtcFraming& framing, const Bits& ctc_payload_bits,
                           const Bits& data_bits) {
    Bits p;
    p.reserve(framing.capacity_bits);
    uint_to_bits(unsigned(ctc_payload_bits.size()), 16, p);
    p.insert(p.end(), ctc_payload_bits.begin(), ctc_payload_bits.end());
    const size_t room = size_t(framing.capacity_bits) - 8;
    size_t take = std::min(data_bits.size(), room - p.size());
    p.insert(p.end(), data_bits.begin(), data_bits.begin() + take);
    p.resize(room, 0);
    uint_to_bits(crc8(p), 8, p);
    return p;
}

StripResult strip_ctc(const Bits& decoded_stream, CodeRate rate, int scrambler_seed,
                      const CtcGridLayout& layout, int symbols_per_slot, double hole_weight,
                      int data_bits_hint) {
    StripResult r;
    if (decoded_stream.size() < 24) return r;
    const unsigned ctc_len = bits_to_uint(decoded_stream, 0, 16);
    if (16 + ctc_len + 8 > decoded_stream.size()) return r;
    r.ctc_bits.assign(decoded_stream.begin() + 16, decoded_stream.begin() + 16 + ctc_len);

    WifiCtcFraming framing;
    try {
        framing = make_wifi_ctc_framing(r.ctc_bits, rate, layout, symbols_per_slot, hole_weight);
    } catch (const ConfigError&) {
        return r;  // corrupted length field, discard
    }
    if (int(decoded_stream.size()) != framing.plan.total_steps()) return r;

    // remove pattern bits in the scrambled domain so the pass-through bits
    // line back up with the scrambler sequence
    const Bits z = scramble(decoded_stream, scrambler_seed);
    Bits z_pass;
    z_pass.reserve(framing.capacity_bits);
    for (int t = 0; t < framing.plan.total_steps(); ++t)
        if (framing.plan.s_mask[t] == 0) z_pass.push_back(z[t]);
    const Bits payload = scramble(z_pass, scrambler_seed);
    if (int(payload.size()) != framing.capacity_bits) return r;

    Bits body(payload.begin(), payload.end() - 8);
    if (crc8(body) != uint8_t(bits_to_uint(payload, payload.size() - 8, 8))) return r;
    r.ok = true;
    r.wifi_payload = payload;
    size_t data_end = body.size();
    if (data_bits_hint >= 0)
        data_end = std::min(body.size(), size_t(16 + ctc_len + data_bits_hint));
    r.data_bits.assign(body.begin() + 16 + ctc_len, body.begin() + data_end);
    return r;
}

void dump_plan(const EmbedPlan& plan, const MuxResult& mux, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plan dump: " + path);
    out << "# ctcsim embed plan v1\nsymbol,coded_bit_position,required_bit,satisfied\n";
    std::set<std::pair<int, int>> fails(mux.fail_positions.begin(), mux.fail_positions.end());
    const int sps = plan.steps_per_symbol();
    for (int t = 0; t < plan.total_steps(); ++t) {
        for (int pos = 0; pos < 2; ++pos) {
            if (!(plan.s_mask[t] & (1 << pos))) continue;
            const int symbol = t / sps;
            const int coded_pos = (t % sps) * 2 + pos;
            const int required = (plan.b_req[t] >> pos) & 1;
            const bool ok = !fails.count({t, pos});
            out << symbol << ',' << coded_pos << ',' << required << ',' << (ok ? 1 : 0) << "\n";
        }
    }
}

}  // namespace ctc
