#include "ctcsim/lte.hpp"

#include "ctcsim/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ctc {

LteGridConfig LteGridConfig::make(double center_frequency) {
    LteGridConfig cfg;
    cfg.grid = lte_20mhz(center_frequency);
    cfg.validate();
    return cfg;
}

int LteGridConfig::rb_first_bin(int rb) const {
    // 1200 used bins split into 100 RBs of 12, ascending; DC is skipped so the
    // bin VALUES jump from -1 to +1 mid-band while indices stay contiguous.
    return rb * rb_subcarriers;
}

bool LteGridConfig::rb_overlaps_sync(int rb) const {
    const int lo = rb_first_bin(rb);
    const int hi = lo + rb_subcarriers - 1;
    for (int i = lo; i <= hi; ++i) {
        const int bin = grid.used_bins[i];
        if (std::abs(bin) <= pss_sss_halfwidth) return true;
    }
    return false;
}

void LteGridConfig::validate() const {
    grid.validate();
    if (int(grid.used_bins.size()) != 1200) throw ConfigError("lte grid must use 1200 bins");
    if (rb_subcarriers * rbs() != 1200) throw ConfigError("lte RB layout mismatch");
}

RbSchedule RbSchedule::all_scheduled(int num_slots) {
    RbSchedule s;
    s.num_slots = num_slots;
    s.entries.assign(size_t(num_slots) * 100, RbAssignment{});
    return s;
}

int RbSchedule::affected_in_slot(int slot) const {
    int n = 0;
    for (int rb = 0; rb < 100; ++rb)
        if (at(slot, rb).state != RbState::Scheduled) ++n;
    return n;
}

SubcarrierWeights SubcarrierWeights::ones(int num_slots) {
    SubcarrierWeights w;
    w.num_slots = num_slots;
    w.w.assign(size_t(num_slots) * 1200, 1.0);
    return w;
}

namespace {

// deterministic full-power sync sequence on the 62 central bins
cplx sync_symbol_value(int bin, int symbol) {
    uint64_t h = mix_seed(0x5153535355ULL, uint64_t(uint32_t(bin)) << 8 | uint32_t(symbol & 7));
    const double phase[4] = {0.25, 0.75, 1.25, 1.75};
    const double a = phase[h & 3] * 3.14159265358979323846;
    return cplx(std::cos(a), std::sin(a));
}

}  // namespace

ComplexFrame lte_tx(const LteGridConfig& cfg, const RbSchedule& schedule, double duration,
                    uint64_t seed, const SubcarrierWeights* fine_weights, double start_time) {
    cfg.validate();
    const double slots_f = duration / cfg.rb_slot;
    const int num_slots = int(std::lround(slots_f));
    if (std::abs(slots_f - num_slots) > 1e-6)
        throw ConfigError("lte_tx: duration must be a whole number of slots");
    if (schedule.num_slots < num_slots)
        throw ConfigError("lte_tx: schedule shorter than duration");
    if (fine_weights && fine_weights->num_slots < num_slots)
        throw ConfigError("lte_tx: weight plan shorter than duration");

    // Sync signals transmit regardless of scheduling; the overlay below keeps
    // the sync bins at full power in their symbols whatever the card or the
    // weights request. They occupy the last two symbols of the first slot of
    // the sync subframes.
    auto sync_symbol = [&](int slot, int symbol) {
        const int subframe = (slot / 2) % 10;
        if (slot % 2 != 0) return false;
        if (std::find(cfg.pss_sss_subframes.begin(), cfg.pss_sss_subframes.end(), subframe) ==
            cfg.pss_sss_subframes.end())
            return false;
        return symbol >= cfg.symbols_per_slot - 2;
    };

    dsp::GaussianSource rng(seed);
    const double qam16[4] = {-3.0, -1.0, 1.0, 3.0};
    const double qam_norm = 1.0 / std::sqrt(10.0);

    SymbolMatrix symbols;
    symbols.reserve(size_t(num_slots) * cfg.symbols_per_slot);
    for (int s = 0; s < num_slots; ++s) {
        for (int y = 0; y < cfg.symbols_per_slot; ++y) {
            std::vector<cplx> row(1200, cplx{0.0, 0.0});
            for (int rb = 0; rb < 100; ++rb) {
                const RbAssignment& a = schedule.at(s, rb);
                double g = 1.0;
                if (a.state == RbState::Blacklisted) g = 0.0;
                if (a.state == RbState::PowerScaled) {
                    const double lo = cfg.extended_power_range ? -9.0 : -6.0;
                    if (a.offset_db < lo - 1e-9 || a.offset_db > 3.0 + 1e-9)
                        throw ConfigError("lte_tx: power offset out of range");
                    g = std::pow(10.0, a.offset_db / 20.0);
                }
                const int first = cfg.rb_first_bin(rb);
                // draw loads for every RB so a seed produces identical loads
                // whatever the schedule masks out
                for (int i = 0; i < cfg.rb_subcarriers; ++i) {
                    const double re = qam16[rng.next_u64() & 3];
                    const double im = qam16[rng.next_u64() & 3];
                    row[first + i] = cplx(re, im) * qam_norm * g;
                }
            }
            if (fine_weights)
                for (int i = 0; i < 1200; ++i) row[i] *= fine_weights->get(s, i);
            if (sync_symbol(s, y))
                for (int i = 0; i < 1200; ++i)
                    if (std::abs(cfg.grid.used_bins[i]) <= cfg.pss_sss_halfwidth)
                        row[i] = sync_symbol_value(cfg.grid.used_bins[i], y);
            symbols.push_back(std::move(row));
        }
    }
    return ofdm_modulate(cfg.grid, symbols, start_time);
}

std::vector<int> lte_bins_for_wifi_bin(const LteGridConfig& cfg, int wifi_bin,
                                       double halfwidth_hz) {
    const double center = wifi_bin * 312.5e3;
    std::vector<int> out;
    for (int i = 0; i < 1200; ++i) {
        const double f = cfg.grid.used_bins[i] * cfg.grid.subcarrier_spacing;
        if (f >= center - halfwidth_hz - 1e-6 && f <= center + halfwidth_hz + 1e-6)
            out.push_back(i);
    }
    return out;
}

CardScheduleResult card_to_schedule(const PunchedCard& card, LteCardMode mode,
                                    double power_offset_db, int rbs_per_ctc_subcarrier,
                                    const LteGridConfig& cfg, int lead_slots, int tail_slots,
                                    int lte_slots_per_ctc_slot) {
    if (card.subcarriers != 48)
        throw ConfigError("card_to_schedule: card must use the 48-subcarrier layout");
    if (rbs_per_ctc_subcarrier < 1 || rbs_per_ctc_subcarrier > 3)
        throw ConfigError("card_to_schedule: rbs per subcarrier must be 1..3");
    const auto& wifi_bins = ctc_wifi_bins();
    CardScheduleResult res;
    const int total = lead_slots + card.slots * lte_slots_per_ctc_slot + tail_slots;
    res.schedule = RbSchedule::all_scheduled(total);
    int affected_data = 0;
    int data_slots = 0;
    for (int s = 0; s < card.slots; ++s) {
        int affected = 0;
        // the 4-hole preamble slots would exceed the 9-RB budget at 3 RBs per
        // hole; cap them at 2 so no slot ever loses more than 9 RBs
        const int rbs_this_slot =
            s < kPreambleSlots ? std::min(rbs_per_ctc_subcarrier, 2) : rbs_per_ctc_subcarrier;
        for (int ctc_sc : card.holes[s]) {
            const int wifi_bin = wifi_bins.at(ctc_sc);
            const double lo = wifi_bin * 312.5e3 - 156.25e3;
            const double hi = wifi_bin * 312.5e3 + 156.25e3;
            const double sync_edge = (cfg.pss_sss_halfwidth + 0.5) * cfg.grid.subcarrier_spacing;
            if (std::abs(wifi_bin * 312.5e3) <= sync_edge)
                throw ConfigError("card_to_schedule: hole overlaps the sync band");
            // rank RBs by band overlap with the WiFi subcarrier
            std::vector<std::pair<double, int>> overlap;
            for (int rb = 0; rb < 100; ++rb) {
                const int first = cfg.rb_first_bin(rb);
                const double rb_lo =
                    cfg.grid.used_bins[first] * cfg.grid.subcarrier_spacing -
                    cfg.grid.subcarrier_spacing / 2.0;
                const double rb_hi =
                    cfg.grid.used_bins[first + cfg.rb_subcarriers - 1] *
                        cfg.grid.subcarrier_spacing +
                    cfg.grid.subcarrier_spacing / 2.0;
                const double ov = std::min(hi, rb_hi) - std::max(lo, rb_lo);
                if (ov > 0) overlap.emplace_back(-ov, rb);
            }
            std::sort(overlap.begin(), overlap.end());
            const int take = std::min<int>(rbs_this_slot, int(overlap.size()));
            for (int k = 0; k < take; ++k) {
                const int rb = overlap[k].second;
                for (int ls = 0; ls < lte_slots_per_ctc_slot; ++ls) {
                    auto& a = res.schedule.at(lead_slots + s * lte_slots_per_ctc_slot + ls, rb);
                    if (mode == LteCardMode::Blacklist) {
                        a.state = RbState::Blacklisted;
                    } else {
                        a.state = RbState::PowerScaled;
                        a.offset_db = power_offset_db;
                    }
                }
                ++affected;
            }
        }
        if (s >= kPreambleSlots) {
            affected_data += affected;
            ++data_slots;
        }
        res.max_affected_per_slot = std::max(res.max_affected_per_slot, affected);
    }
    // in-technology throughput cost over the data-bearing slots
    res.overhead_fraction = data_slots > 0 ? double(affected_data) / double(data_slots * 100)
                                           : 0.0;
    return res;
}

SubcarrierWeights card_to_subcarrier_weights(const PunchedCard& card, int null_width,
                                             double weight, const LteGridConfig& cfg,
                                             int lead_slots, int tail_slots,
                                             int lte_slots_per_ctc_slot) {
    if (card.subcarriers != 48)
        throw ConfigError("card weights: card must use the 48-subcarrier layout");
    const auto& wifi_bins = ctc_wifi_bins();
    const int total = lead_slots + card.slots * lte_slots_per_ctc_slot + tail_slots;
    SubcarrierWeights w = SubcarrierWeights::ones(total);
    for (int s = 0; s < card.slots; ++s) {
        for (int ctc_sc : card.holes[s]) {
            const int wifi_bin = wifi_bins.at(ctc_sc);
            const double center = wifi_bin * 312.5e3;
            const double sync_edge = (cfg.pss_sss_halfwidth + 0.5) * cfg.grid.subcarrier_spacing;
            if (std::abs(center) <= sync_edge)
                throw ConfigError("card weights: hole overlaps the sync band");
            // the null_width subcarriers whose centers sit closest to the hole
            std::vector<std::pair<double, int>> dist;
            for (int i = 0; i < 1200; ++i) {
                const double f = cfg.grid.used_bins[i] * cfg.grid.subcarrier_spacing;
                dist.emplace_back(std::abs(f - center), i);
            }
            std::sort(dist.begin(), dist.end());
            for (int k = 0; k < null_width && k < 1200; ++k) {
                const int i = dist[k].second;
                for (int ls = 0; ls < lte_slots_per_ctc_slot; ++ls)
                    w.at(lead_slots + s * lte_slots_per_ctc_slot + ls, i) = weight;
            }
        }
    }
    return w;
}

ComplexFrame signal_gate(const ComplexFrame& frame, const GateConfig& gate) {
    ComplexFrame out = frame;
    const double fs = frame.sampling_rate;
    if (gate.mode == GateConfig::Mode::DutyCycle) {
        if (gate.on_fraction >= 1.0) return out;
        const double slot = 0.5e-3;
        const long period_samples = std::lround(gate.period * fs);
        // on-time rounded to whole slots, opening at a slot boundary
        const long slot_samples = std::lround(slot * fs);
        long on_samples = std::lround(gate.period * gate.on_fraction / slot) * slot_samples;
        for (size_t i = 0; i < out.samples.size(); ++i) {
            const long phase = long(i) % period_samples;
            if (phase >= on_samples) out.samples[i] = 0.0;
        }
    } else {
        dsp::GaussianSource rng(gate.seed);
        const long burst_samples = std::lround(gate.burst * fs);
        const long n = long(out.samples.size());
        const long max_start = std::max<long>(0, n - burst_samples);
        const long start = long(rng.uniform() * double(max_start + 1));
        for (long i = 0; i < n; ++i)
            if (i < start || i >= start + burst_samples) out.samples[i] = 0.0;
    }
    return out;
}

SpectralStream lte_scan(const LteGridConfig& cfg, const ComplexFrame& frame) {
    const GridSpec& g = cfg.grid;
    SpectralStream stream;
    stream.bins = g.used_bins;
    stream.bin_spacing = g.subcarrier_spacing;
    stream.snapshot_duration = g.symbol_duration;
    std::vector<cplx> work(g.fft_size);
    size_t pos = 0;
    int sym = 0;
    while (pos + size_t(g.symbol_samples(sym)) <= frame.samples.size()) {
        const int cp = g.cp_samples(sym);
        for (int i = 0; i < g.fft_size; ++i) work[i] = frame.samples[pos + cp + i];
        dsp::fft(work, false);
        BinPowerVector v;
        v.timestamp = frame.start_time + double(pos) / g.sampling_rate;
        v.powers.resize(g.used_bins.size());
        for (size_t i = 0; i < g.used_bins.size(); ++i) {
            const int bin = g.used_bins[i];
            const int idx = bin >= 0 ? bin : bin + g.fft_size;
            v.powers[i] = std::norm(work[idx]) / double(g.fft_size);
        }
        stream.vectors.push_back(std::move(v));
        pos += g.symbol_samples(sym);
        ++sym;
    }
    return stream;
}

void dump_schedule(const RbSchedule& schedule, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write schedule dump: " + path);
    out << "# ctcsim rb schedule v1\nslot,rb,state,offset_db\n";
    for (int s = 0; s < schedule.num_slots; ++s)
        for (int rb = 0; rb < 100; ++rb) {
            const auto& a = schedule.at(s, rb);
            const char* st = a.state == RbState::Scheduled
                                 ? "scheduled"
                                 : (a.state == RbState::Blacklisted ? "blacklisted"
                                                                    : "power_scaled");
            out << s << ',' << rb << ',' << st << ',' << a.offset_db << "\n";
        }
}

}  // namespace ctc
