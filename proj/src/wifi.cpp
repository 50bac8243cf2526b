#include "ctcsim/wifi.hpp"

#include "ctcsim/dsp.hpp"
#include "ctcsim/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace ctc {

namespace {

constexpr int kScramblerMask = 0x7F;

inline int parity7(unsigned w) { return std::popcount(w) & 1; }

// Generator masks over the 7-bit window [input, s1..s6]; 133/171 octal.
constexpr unsigned kGenA = 0b1011011;
constexpr unsigned kGenB = 0b1111001;

}  // namespace

Bits scramble(const Bits& bits, int seed) {
    if (seed < 1 || seed > 127) throw ConfigError("scrambler seed must be in [1,127]");
    unsigned state = unsigned(seed) & kScramblerMask;
    Bits out;
    out.reserve(bits.size());
    for (uint8_t b : bits) {
        unsigned fb = ((state >> 6) ^ (state >> 3)) & 1u;  // x^7 + x^4
        state = ((state << 1) | fb) & kScramblerMask;
        out.push_back(uint8_t((b ^ fb) & 1u));
    }
    return out;
}

Bits conv_encode(const Bits& bits) {
    Bits out;
    out.reserve(bits.size() * 2);
    unsigned hist = 0;  // s1 in bit 5 ... s6 in bit 0
    for (uint8_t u : bits) {
        unsigned w = (unsigned(u & 1u) << 6) | hist;
        out.push_back(uint8_t(parity7(w & kGenA)));
        out.push_back(uint8_t(parity7(w & kGenB)));
        hist = (w >> 1) & 0x3F;
    }
    return out;
}

Bits viterbi_decode(const Bits& coded_with_erasures) {
    if (coded_with_erasures.size() % 2 != 0)
        throw ConfigError("viterbi: coded length must be even");
    const size_t steps = coded_with_erasures.size() / 2;
    if (steps == 0) return {};

    // transition tables: from state h with input u
    static const auto tables = [] {
        struct T {
            uint8_t out_a[64][2];
            uint8_t out_b[64][2];
        } t;
        for (int h = 0; h < 64; ++h)
            for (int u = 0; u < 2; ++u) {
                unsigned w = (unsigned(u) << 6) | unsigned(h);
                t.out_a[h][u] = uint8_t(parity7(w & kGenA));
                t.out_b[h][u] = uint8_t(parity7(w & kGenB));
            }
        return t;
    }();

    const int kInf = std::numeric_limits<int>::max() / 4;
    std::vector<int> metric(64, kInf), next_metric(64, kInf);
    metric[0] = 0;
    std::vector<uint64_t> decisions(steps, 0);  // bit per next-state: lost s6 of predecessor

    for (size_t t = 0; t < steps; ++t) {
        const uint8_t r0 = coded_with_erasures[2 * t];
        const uint8_t r1 = coded_with_erasures[2 * t + 1];
        std::fill(next_metric.begin(), next_metric.end(), kInf);
        uint64_t dec = 0;
        for (int h = 0; h < 64; ++h) {
            const int m = metric[h];
            if (m >= kInf) continue;
            for (int u = 0; u < 2; ++u) {
                int cost = 0;
                if (r0 != 2) cost += (tables.out_a[h][u] != r0);
                if (r1 != 2) cost += (tables.out_b[h][u] != r1);
                const int n = (u << 5) | (h >> 1);
                const int nm = m + cost;
                if (nm < next_metric[n]) {
                    next_metric[n] = nm;
                    if (h & 1)
                        dec |= (uint64_t{1} << n);
                    else
                        dec &= ~(uint64_t{1} << n);
                }
            }
        }
        decisions[t] = dec;
        metric.swap(next_metric);
    }

    int state = 0;
    int best = kInf;
    for (int s = 0; s < 64; ++s)
        if (metric[s] < best) {
            best = metric[s];
            state = s;
        }
    Bits out(steps);
    for (size_t t = steps; t-- > 0;) {
        out[t] = uint8_t((state >> 5) & 1);
        const int lost = int((decisions[t] >> state) & 1u);
        state = ((state & 0x1F) << 1) | lost;
    }
    return out;
}

const std::vector<uint8_t>& puncture_pattern(CodeRate rate) {
    static const std::vector<uint8_t> r12 = {1, 1};
    static const std::vector<uint8_t> r23 = {1, 1, 1, 0};
    static const std::vector<uint8_t> r56 = {1, 1, 1, 0, 0, 1, 1, 0, 0, 1};
    switch (rate) {
        case CodeRate::R12: return r12;
        case CodeRate::R23: return r23;
        case CodeRate::R56: return r56;
    }
    throw ConfigError("bad code rate");
}

Bits puncture(const Bits& bits, CodeRate rate) {
    const auto& pat = puncture_pattern(rate);
    if (bits.size() % pat.size() != 0)
        throw ConfigError("puncture: length not a multiple of the pattern period");
    Bits out;
    out.reserve(bits.size());
    for (size_t i = 0; i < bits.size(); ++i)
        if (pat[i % pat.size()]) out.push_back(bits[i]);
    return out;
}

namespace {

Bits depuncture_fill(const Bits& bits, CodeRate rate, uint8_t fill) {
    const auto& pat = puncture_pattern(rate);
    size_t kept = 0;
    for (uint8_t p : pat) kept += p;
    if (bits.size() % kept != 0)
        throw ConfigError("depuncture: length not a multiple of the pattern period");
    Bits out;
    out.reserve(bits.size() * pat.size() / kept);
    size_t src = 0;
    const size_t periods = bits.size() / kept;
    for (size_t p = 0; p < periods; ++p)
        for (uint8_t keep : pat) out.push_back(keep ? bits[src++] : fill);
    return out;
}

}  // namespace

Bits depuncture(const Bits& bits, CodeRate rate) { return depuncture_fill(bits, rate, 0); }
Bits depuncture_erasures(const Bits& bits, CodeRate rate) { return depuncture_fill(bits, rate, 2); }

namespace {

std::vector<int> build_interleave_map() {
    const int n_cbps = WifiChainConfig::n_cbps;
    const int n_col = 13;
    const int n_row = n_cbps / n_col;  // 24
    const int s = WifiChainConfig::n_bpsc / 2;
    std::vector<int> map(n_cbps);
    for (int k = 0; k < n_cbps; ++k) {
        int i = n_row * (k % n_col) + k / n_col;
        int j = s * (i / s) + (i + n_cbps - (n_col * i) / n_cbps) % s;
        map[k] = j;
    }
    return map;
}

}  // namespace

const std::vector<int>& interleave_map() {
    static const std::vector<int> map = build_interleave_map();
    return map;
}

const std::vector<int>& deinterleave_map() {
    static const std::vector<int> inv = [] {
        const auto& map = interleave_map();
        std::vector<int> v(map.size());
        for (size_t k = 0; k < map.size(); ++k) v[map[k]] = int(k);
        return v;
    }();
    return inv;
}

Bits interleave(const Bits& block) {
    if (block.size() != WifiChainConfig::n_cbps)
        throw ConfigError("interleave: block must be 312 bits");
    const auto& map = interleave_map();
    Bits out(block.size());
    for (size_t k = 0; k < block.size(); ++k) out[map[k]] = block[k];
    return out;
}

Bits deinterleave(const Bits& block) {
    if (block.size() != WifiChainConfig::n_cbps)
        throw ConfigError("deinterleave: block must be 312 bits");
    const auto& map = interleave_map();
    Bits out(block.size());
    for (size_t k = 0; k < block.size(); ++k) out[k] = block[map[k]];
    return out;
}

namespace {

// inverse Gray axis mapping: level (-7..7 odd) -> 3 bits, first bit = sign
inline unsigned axis_bits(double level) {
    switch (int(level)) {
        case -7: return 0b000;
        case -5: return 0b001;
        case -3: return 0b011;
        case -1: return 0b010;
        case +1: return 0b110;
        case +3: return 0b111;
        case +5: return 0b101;
        case +7: return 0b100;
    }
    throw ConfigError("bad QAM level");
}

}  // namespace

cplx qam64_map(const uint8_t bits6[6]) {
    // axis order 000 -7, 001 -5, 011 -3, 010 -1, 110 +1, 111 +3, 101 +5, 100 +7
    auto level = [](uint8_t b0, uint8_t b1, uint8_t b2) {
        static const double lut[8] = {-7, -5, -1, -3, +7, +5, +1, +3};
        return lut[(b0 << 2) | (b1 << 1) | b2];
    };
    const double i = level(bits6[0], bits6[1], bits6[2]);
    const double q = level(bits6[3], bits6[4], bits6[5]);
    return cplx(i, q);
}

void qam64_demap(cplx point, uint8_t bits6[6]) {
    auto slice = [](double v) {
        double lvl = std::clamp(std::round((v + 7.0) / 2.0) * 2.0 - 7.0, -7.0, 7.0);
        return axis_bits(lvl);
    };
    const unsigned bi = slice(point.real());
    const unsigned bq = slice(point.imag());
    bits6[0] = uint8_t((bi >> 2) & 1);
    bits6[1] = uint8_t((bi >> 1) & 1);
    bits6[2] = uint8_t(bi & 1);
    bits6[3] = uint8_t((bq >> 2) & 1);
    bits6[4] = uint8_t((bq >> 1) & 1);
    bits6[5] = uint8_t(bq & 1);
}

namespace {

// pilot polarity sequence; content is irrelevant to CTC, kept deterministic
const int kPilotPolarity[8] = {1, 1, 1, -1, 1, -1, -1, 1};

std::vector<int> data_bin_list(const GridSpec& grid) {
    std::vector<int> bins;
    for (int b : grid.used_bins)
        if (std::find(grid.pilot_bins.begin(), grid.pilot_bins.end(), b) ==
            grid.pilot_bins.end())
            bins.push_back(b);
    return bins;
}

}  // namespace

WifiFrame wifi_tx(const GridSpec& grid, const WifiChainConfig& cfg, const Bits& payload_bits,
                  const EmbedPlan* plan, double start_time) {
    const Bits scrambled = scramble(payload_bits, cfg.scrambler_seed);
    Bits steered;
    double fail_rate = 0.0;
    if (plan) {
        MuxResult mr = mux_bitstream(*plan, scrambled);
        steered = std::move(mr.stream);
        fail_rate = mr.cell_fail_rate;
    } else {
        steered = scrambled;
    }
    if (!cfg.fixed_scrambler_seed && cfg.device_seed != cfg.scrambler_seed) {
        // driver pre-descrambles for the designed seed, hardware re-scrambles
        // with its own cycling seed
        steered = scramble(scramble(steered, cfg.scrambler_seed), cfg.device_seed);
    }
    const int sps = cfg.steps_per_symbol();
    if (steered.size() % size_t(sps) != 0)
        steered.resize((steered.size() / sps + 1) * sps, 0);
    const int num_symbols = int(steered.size()) / sps;

    const double duration = (cfg.preamble_symbols + num_symbols) * grid.symbol_duration;
    if (duration > cfg.frame_duration_cap + 1e-12)
        throw ConfigError("wifi frame exceeds duration cap");

    const Bits coded = conv_encode(steered);
    const Bits punctured = puncture(coded, cfg.code_rate);
    if (punctured.size() != size_t(num_symbols) * WifiChainConfig::n_cbps)
        throw ConfigError("wifi_tx: symbol sizing mismatch");

    const auto data_bins = data_bin_list(grid);
    if (int(data_bins.size()) != WifiChainConfig::n_data_bins)
        throw ConfigError("wifi_tx: grid does not have 52 data bins");
    const double norm = 1.0 / std::sqrt(42.0);

    SymbolMatrix symbols;
    symbols.reserve(cfg.preamble_symbols + num_symbols);
    for (int s = 0; s < cfg.preamble_symbols; ++s)
        symbols.emplace_back(grid.used_bins.size(), cplx{1.0, 0.0});
    Bits block(WifiChainConfig::n_cbps);
    for (int s = 0; s < num_symbols; ++s) {
        std::copy_n(punctured.begin() + size_t(s) * WifiChainConfig::n_cbps,
                    WifiChainConfig::n_cbps, block.begin());
        const Bits inter = interleave(block);
        std::vector<cplx> row(grid.used_bins.size(), cplx{0.0, 0.0});
        for (int d = 0; d < WifiChainConfig::n_data_bins; ++d) {
            uint8_t group[6];
            for (int k = 0; k < 6; ++k) group[k] = inter[6 * d + k];
            row[grid.bin_index(data_bins[d])] = qam64_map(group) * norm;
        }
        for (size_t p = 0; p < grid.pilot_bins.size(); ++p)
            row[grid.bin_index(grid.pilot_bins[p])] =
                cplx(double(kPilotPolarity[(s + p) % 8]), 0.0);
        symbols.push_back(std::move(row));
    }

    WifiFrame out;
    out.num_symbols = num_symbols;
    out.encoder_input = std::move(steered);
    out.steer_cell_fail_rate = fail_rate;
    out.symbol_matrix = SymbolMatrix(symbols.begin() + cfg.preamble_symbols, symbols.end());
    out.frame = ofdm_modulate(grid, symbols, start_time);
    return out;
}

Bits wifi_rx(const GridSpec& grid, const WifiChainConfig& cfg, const ComplexFrame& frame,
             int num_symbols) {
    const double offset = cfg.preamble_symbols * grid.symbol_duration;
    const SymbolMatrix rows = ofdm_demodulate(grid, frame, offset, num_symbols);
    if (int(rows.size()) < num_symbols)
        throw ConfigError("wifi_rx: frame too short for requested symbols");
    const auto data_bins = data_bin_list(grid);
    const double denorm = std::sqrt(42.0);
    Bits punctured;
    punctured.reserve(size_t(num_symbols) * WifiChainConfig::n_cbps);
    Bits inter(WifiChainConfig::n_cbps);
    for (int s = 0; s < num_symbols; ++s) {
        for (int d = 0; d < WifiChainConfig::n_data_bins; ++d) {
            uint8_t group[6];
            qam64_demap(rows[s][grid.bin_index(data_bins[d])] * denorm, group);
            for (int k = 0; k < 6; ++k) inter[6 * d + k] = group[k];
        }
        const Bits block = deinterleave(inter);
        punctured.insert(punctured.end(), block.begin(), block.end());
    }
    const Bits coded = depuncture_erasures(punctured, cfg.code_rate);
    const Bits decoded = viterbi_decode(coded);
    const int seed = cfg.fixed_scrambler_seed ? cfg.scrambler_seed : cfg.device_seed;
    return scramble(decoded, seed);
}

SpectralStream wifi_scan(const GridSpec& grid, const ComplexFrame& frame, int fft_points,
                         const ScanTimingModel& timing, uint64_t seed) {
    if (fft_points != 64 && fft_points != 256)
        throw ConfigError("wifi_scan: fft_points must be 64 or 256");
    const SpectralStream dense = psd_scan(grid, frame, fft_points);
    SpectralStream out;
    out.bins = dense.bins;
    out.bin_spacing = dense.bin_spacing;
    out.snapshot_duration = dense.snapshot_duration;
    if (dense.vectors.empty()) return out;
    dsp::GaussianSource rng(seed);
    const double t_end = dense.vectors.back().timestamp;
    double t = dense.vectors.front().timestamp;
    size_t idx = 0;
    while (t <= t_end + 1e-12) {
        while (idx + 1 < dense.vectors.size() && dense.vectors[idx + 1].timestamp <= t + 1e-12)
            ++idx;
        out.vectors.push_back(dense.vectors[idx]);
        double gap = timing.nominal_interval;
        if (timing.tail_fraction > 0.0 && rng.uniform() < timing.tail_fraction)
            gap = timing.tail_min + (timing.tail_max - timing.tail_min) * rng.uniform();
        t += gap;
    }
    return out;
}

}  // namespace ctc
