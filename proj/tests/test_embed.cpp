#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ctcsim/dsp.hpp"
#include "ctcsim/embed.hpp"
#include "ctcsim/harness.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

using namespace ctc;

TEST_CASE("the 64 encoder states split into four groups of 16") {
    std::map<char, int> counts;
    for (int s = 0; s < 64; ++s) {
        const EncoderStateGroup g = state_group(s);
        ++counts[g.group];
        // flipping the input flips both output bits
        CHECK(g.output_for_1[0] == (g.output_for_0[0] ^ 1));
        CHECK(g.output_for_1[1] == (g.output_for_0[1] ^ 1));
    }
    REQUIRE(counts.size() == 4);
    for (const auto& [label, n] : counts) CHECK(n == 16);
    // zero state outputs 00 on input 0: group A
    CHECK(state_group(0).group == 'A');
    CHECK(state_group(0).output_for_0 == std::array<uint8_t, 2>{0, 0});
    CHECK(state_group(0).output_for_1 == std::array<uint8_t, 2>{1, 1});
    CHECK_THROWS_AS(state_group(64), ConfigError);
}

TEST_CASE("choose_input honors single constraints and records double conflicts") {
    // single constrained bit: always satisfiable, either position
    for (int s = 0; s < 64; ++s) {
        const EncoderStateGroup g = state_group(s);
        for (int pos = 0; pos < 2; ++pos)
            for (uint8_t want : {0, 1}) {
                const uint8_t mask = uint8_t(1 << pos);
                const uint8_t req = uint8_t(want << pos);
                const ChoiceResult r = choose_input(mask, req, g, 0);
                CHECK(r.satisfied);
                CHECK(r.emitted[pos] == want);
            }
    }
    // pass-through: input = payload bit
    const EncoderStateGroup g0 = state_group(17);
    CHECK(choose_input(0, 0, g0, 1).input == 1);
    CHECK(choose_input(0, 0, g0, 0).input == 0);

    // both constrained on a group-A state: requiring (pos0=1, pos1=0) forces
    // input 1 which emits (1,1): position 0 satisfied, position 1 violated
    const EncoderStateGroup ga = state_group(0);
    const ChoiceResult r = choose_input(3, 0b01, ga, 0);
    CHECK(r.input == 1);
    CHECK(r.emitted == std::array<uint8_t, 2>{1, 1});
    CHECK(!r.satisfied);
    // requiring (0,0) on group A: input 0 emits (0,0), both satisfied
    const ChoiceResult r2 = choose_input(3, 0b00, ga, 0);
    CHECK(r2.input == 0);
    CHECK(r2.satisfied);
    // exhaustive: for every state, the double-constraint case satisfies
    // position 1 exactly when the group output happens to match
    for (int s = 0; s < 64; ++s) {
        const EncoderStateGroup g = state_group(s);
        for (uint8_t req = 0; req < 4; ++req) {
            const ChoiceResult c = choose_input(3, req, g, 0);
            CHECK(c.emitted[0] == (req & 1));
            CHECK(c.satisfied == (c.emitted[1] == ((req >> 1) & 1)));
        }
    }
}

namespace {

PunchedCard card_from_payload(const Bits& payload, const CtcGridLayout& layout,
                              double hole_weight = 0.0) {
    return encode_card(make_ctc_frame(payload, layout), layout, hole_weight);
}

}  // namespace

TEST_CASE("build_plan geometry: empty, single-hole and 3x16 column weights") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    // empty card: pass-through plan
    PunchedCard empty;
    empty.slots = 0;
    empty.subcarriers = 48;
    const EmbedPlan p0 = build_plan(empty, CodeRate::R56, 36, 0, 10);
    CHECK(p0.constrained_steps() == 0);
    CHECK(p0.passthrough_capacity() == 10 * 260);

    // single hole in one slot: 4 constrained bit positions per symbol column
    PunchedCard single;
    single.slots = 1;
    single.subcarriers = 48;
    single.holes = {{11}};
    const EmbedPlan p1 = build_plan(single, CodeRate::R56, 36, 0, 37);
    for (int j = 0; j < 36; ++j) CHECK(p1.column_weight(j) == 4);
    int constrained_bits = 0;
    for (int t = 0; t < p1.total_steps(); ++t) {
        constrained_bits += (p1.s_mask[t] & 1) != 0;
        constrained_bits += (p1.s_mask[t] & 2) != 0;
    }
    CHECK(constrained_bits == 4 * 36);

    // full 3x16 payload card: 12 significant bits per payload column
    const Bits payload = random_bits(100, 3);
    const PunchedCard card = card_from_payload(payload, layout);
    const EmbedPlan plan = build_plan(card, CodeRate::R56, 36, 2, 2 + card.slots * 36 + 1);
    for (int slot = 0; slot < card.slots; ++slot) {
        const int col = 2 + slot * 36;
        const int expect = int(card.holes[slot].size()) * 4;
        CHECK(plan.column_weight(col) == expect);
        if (slot >= kPreambleSlots + header_slots(layout))
            CHECK(plan.column_weight(col) == 12);
    }
    // reserved symbols stay clean
    CHECK(plan.column_weight(0) == 0);
    CHECK(plan.column_weight(1) == 0);
    CHECK_THROWS_AS(build_plan(card, CodeRate::R56, 36, 0, 10), ConfigError);
}

TEST_CASE("mux steers singly-constrained positions with certainty") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    const Bits ctc = random_bits(60, 5);
    const PunchedCard card = card_from_payload(ctc, layout);
    const EmbedPlan plan = build_plan(card, CodeRate::R56, 36, 1, 1 + card.slots * 36 + 1);
    const Bits payload = random_bits(size_t(plan.passthrough_capacity()), 6);
    const MuxResult mux = mux_bitstream(plan, payload);
    REQUIRE(int(mux.stream.size()) == plan.total_steps());
    CHECK(mux.payload_consumed == plan.passthrough_capacity());

    // feeding the steered stream to the encoder reproduces every required bit
    // at singly-constrained positions, and position 0 of double constraints
    const Bits coded = conv_encode(mux.stream);
    std::set<std::pair<int, int>> fails(mux.fail_positions.begin(), mux.fail_positions.end());
    int checked = 0;
    for (int t = 0; t < plan.total_steps(); ++t) {
        for (int pos = 0; pos < 2; ++pos) {
            if (!(plan.s_mask[t] & (1 << pos))) continue;
            const uint8_t want = uint8_t((plan.b_req[t] >> pos) & 1);
            const uint8_t got = coded[2 * t + pos];
            if (fails.count({t, pos})) {
                CHECK(got != want);
            } else {
                CHECK(got == want);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);

    // pass-through positions carry the payload bits in order
    size_t idx = 0;
    for (int t = 0; t < plan.total_steps(); ++t)
        if (plan.s_mask[t] == 0) CHECK(mux.stream[t] == payload[idx++]);

    CHECK_THROWS_AS(mux_bitstream(plan, Bits(10, 0)), ConfigError);
}

TEST_CASE("steered cells carry minimum-amplitude points in the waveform") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    const Bits ctc = random_bits(40, 7);
    const WifiCtcFraming framing =
        make_wifi_ctc_framing(ctc, CodeRate::R56, layout, 36, wifi_hole_weight());
    const Bits data = random_bits(size_t(framing.capacity_bits) - 24 - ctc.size(), 8);
    const Bits payload = make_embedded_payload(framing, ctc, data);
    WifiChainConfig cfg;
    cfg.code_rate = CodeRate::R56;
    const WifiFrame wf = wifi_tx(wifi_80211n_20mhz(), cfg, payload, &framing.plan);

    const GridSpec grid = wifi_80211n_20mhz();
    std::vector<int> data_bins;
    for (int b : grid.used_bins)
        if (b != -21 && b != -7 && b != 7 && b != 21) data_bins.push_back(b);

    const double norm2 = 1.0 / 42.0;
    int cells = 0, min_amp = 0;
    for (int j = 0; j < framing.num_symbols; ++j)
        for (int r = 0; r < 52; ++r) {
            if (!framing.plan.sig52[r + 52 * j]) continue;
            ++cells;
            const cplx v = wf.symbol_matrix[j][grid.bin_index(data_bins[r])];
            if (std::abs(std::norm(v) - 2.0 * norm2) < 1e-9) ++min_amp;
        }
    REQUIRE(cells > 500);
    // only double-conflict cells may miss; far below 2%
    CHECK(double(cells - min_amp) / cells < 0.02);
    CHECK(wf.steer_cell_fail_rate < 0.02);
}

TEST_CASE("single-subcarrier cards have no adjacent significant bits and zero fails") {
    // 1-of-32 layout: one hole per slot
    CtcGridLayout one32 = wifi_to_lte_layout();
    one32.num_groups = 1;
    one32.group_size = 32;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const Bits payload = random_bits(32, seed);
        const PunchedCard card = card_from_payload(payload, one32);
        const EmbedPlan plan = build_plan(card, CodeRate::R56, 36, 0, card.slots * 36 + 1);
        for (int t = 0; t < plan.total_steps(); ++t) CHECK(plan.s_mask[t] != 3);
        const MuxResult mux =
            mux_bitstream(plan, random_bits(size_t(plan.passthrough_capacity()), seed + 100));
        CHECK(mux.fail_positions.empty());
        CHECK(mux.cell_fail_rate == 0.0);
    }
}

TEST_CASE("cell-level fail rate over random payload/card pairs stays under 2%") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    long violated = 0, constrained = 0;
    for (uint64_t seed = 0; seed < 60; ++seed) {
        const Bits ctc = random_bits(100, mix_seed(seed, 1));
        const PunchedCard card = card_from_payload(ctc, layout);
        const EmbedPlan plan = build_plan(card, CodeRate::R56, 36, 1, 1 + card.slots * 36 + 1);
        const MuxResult mux =
            mux_bitstream(plan, random_bits(size_t(plan.passthrough_capacity()),
                                            mix_seed(seed, 2)));
        violated += mux.violated_cells;
        constrained += mux.constrained_cells;
    }
    REQUIRE(constrained > 10000);
    CHECK(double(violated) / double(constrained) < 0.02);
}

TEST_CASE("embed overhead equals the published fractions") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    CHECK(embed_overhead(CodeRate::R23, layout) == doctest::Approx(12.0 / 208.0));
    CHECK(embed_overhead(CodeRate::R56, layout) == doctest::Approx(12.0 / 260.0));
    CHECK(embed_overhead(CodeRate::R23, layout) == doctest::Approx(0.0577).epsilon(0.01));
    CHECK(embed_overhead(CodeRate::R56, layout) == doctest::Approx(0.046).epsilon(0.01));
    PunchedCard empty;
    empty.slots = 0;
    empty.subcarriers = 48;
    const EmbedPlan p = build_plan(empty, CodeRate::R23, 36, 0, 5);
    CHECK(p.constrained_steps() == 0);  // empty card adds nothing
}

TEST_CASE("strip_ctc recovers payload and CTC bits through the full chain") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    const GridSpec grid = wifi_80211n_20mhz();
    WifiChainConfig cfg;
    cfg.code_rate = CodeRate::R56;
    const Bits ctc = random_bits(52, 21);
    const WifiCtcFraming framing =
        make_wifi_ctc_framing(ctc, cfg.code_rate, layout, 36, wifi_hole_weight());
    const Bits data = random_bits(2000, 22);
    const Bits payload = make_embedded_payload(framing, ctc, data);
    const WifiFrame wf = wifi_tx(grid, cfg, payload, &framing.plan);
    const Bits decoded = wifi_rx(grid, cfg, wf.frame, wf.num_symbols);

    // raw CRC over the stream fails (pattern bits are inline)
    Bits raw_body(decoded.begin(), decoded.end() - 8);
    CHECK(crc8(raw_body) != uint8_t(bits_to_uint(decoded, decoded.size() - 8, 8)));

    const StripResult sr = strip_ctc(decoded, cfg.code_rate, cfg.scrambler_seed, layout, 36,
                                     wifi_hole_weight(), int(data.size()));
    REQUIRE(sr.ok);
    CHECK(sr.ctc_bits == ctc);
    CHECK(sr.data_bits == data);
    CHECK(sr.wifi_payload == payload);

    // corrupted length field: discarded
    Bits bad = decoded;
    bad[3] ^= 1;
    CHECK(!strip_ctc(bad, cfg.code_rate, cfg.scrambler_seed, layout, 36, wifi_hole_weight())
               .ok);
}

TEST_CASE("zero-length CTC message leaves the payload unchanged") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    // a frame with no plan at all: the stream is the payload
    WifiChainConfig cfg;
    cfg.code_rate = CodeRate::R56;
    const Bits data = random_bits(400, 31);
    Bits p;
    uint_to_bits(0, 16, p);  // zero-length CTC header
    p.insert(p.end(), data.begin(), data.end());
    const int sps = cfg.steps_per_symbol();
    const size_t total = ((p.size() + 8 + sps - 1) / sps) * sps;
    p.resize(total - 8, 0);
    uint_to_bits(crc8(p), 8, p);
    // no insertions happened, so stripping with an empty card is the identity
    // up to CRC checking; emulate by building the plan for zero ctc bits
    const WifiCtcFraming framing =
        make_wifi_ctc_framing({}, cfg.code_rate, layout, 36, wifi_hole_weight());
    // the zero-length framing still carries the empty CTC frame's card; the
    // plain-payload contract is exercised through wifi_tx/rx without a plan
    const WifiFrame wf = wifi_tx(wifi_80211n_20mhz(), cfg, p);
    const Bits decoded = wifi_rx(wifi_80211n_20mhz(), cfg, wf.frame, wf.num_symbols);
    CHECK(decoded == p);
    (void)framing;
}

TEST_CASE("plan dump lists constrained positions") {
    const CtcGridLayout layout = wifi_to_lte_layout();
    const PunchedCard card = card_from_payload(random_bits(12, 2), layout);
    const EmbedPlan plan = build_plan(card, CodeRate::R56, 36, 0, card.slots * 36 + 1);
    const MuxResult mux =
        mux_bitstream(plan, random_bits(size_t(plan.passthrough_capacity()), 3));
    dump_plan(plan, mux, "plan_dump_test.csv");
    std::ifstream in("plan_dump_test.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows >= 2 + plan.constrained_steps());
}
