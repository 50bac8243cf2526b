#include "ctcsim/harness.hpp"

#include "ctcsim/dsp.hpp"
#include "ctcsim/embed.hpp"
#include "ctcsim/io.hpp"
#include "ctcsim/waveform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

namespace ctc {

namespace {

const GridSpec& wifi_grid() {
    static const GridSpec g = wifi_80211n_20mhz();
    return g;
}

const LteGridConfig& lte_cfg() {
    static const LteGridConfig c = LteGridConfig::make();
    return c;
}

ComplexFrame pad_frame(const ComplexFrame& frame, double lead, double tail) {
    ComplexFrame out;
    out.sampling_rate = frame.sampling_rate;
    out.start_time = 0.0;
    const size_t nl = size_t(std::lround(lead * frame.sampling_rate));
    const size_t nt = size_t(std::lround(tail * frame.sampling_rate));
    out.samples.resize(nl + frame.samples.size() + nt, cplx{0.0, 0.0});
    std::copy(frame.samples.begin(), frame.samples.end(), out.samples.begin() + nl);
    return out;
}

Bits expected_frame_payload(const Bits& ctc_payload, const CtcGridLayout& layout) {
    return make_ctc_frame(ctc_payload, layout).payload_bits;
}

TrialOutcome finish_from_demod(const DemodResult& demod, const Bits& expected, int slots) {
    TrialOutcome out;
    out.detected = demod.detected;
    out.header_ok = demod.header_ok;
    out.crc_ok = demod.crc_ok;
    out.erased_slots = demod.erased_slots;
    out.mean_dip_db = demod.mean_dip_db;
    out.ok = demod.detected && demod.header_ok && demod.crc_ok &&
             demod.payload_slots == slots && demod.payload_bits == expected;
    return out;
}

TrialOutcome run_wifi_to_lte_trial(const TrialParams& p, uint64_t seed) {
    const CtcGridLayout layout = wifi_to_lte_layout();
    const int spb = wifi_symbols_per_ctc_slot();
    const double hole_w = wifi_hole_weight();

    const Bits ctc_payload =
        random_bits(size_t(p.payload_slots) * layout.bits_per_slot() - 8, mix_seed(seed, 1));
    const WifiCtcFraming framing =
        make_wifi_ctc_framing(ctc_payload, p.rate, layout, spb, hole_w);
    const Bits data = random_bits(
        size_t(framing.capacity_bits) - 24 - ctc_payload.size(), mix_seed(seed, 2));
    const Bits payload = make_embedded_payload(framing, ctc_payload, data);

    WifiChainConfig chain;
    chain.code_rate = p.rate;
    chain.frame_duration_cap = p.frame_duration_cap;
    const WifiFrame wf = wifi_tx(wifi_grid(), chain, payload, &framing.plan);

    ChannelConfig ch;
    ch.snr_db = p.snr_db;
    ch.cfo_hz = p.cfo_hz;
    ch.timing_offset = p.timing_offset;
    ch.interferer = p.interferer;
    ch.band_halfwidth = wifi_grid().occupied_bandwidth() / 2.0;
    const ComplexFrame rx20 = channel_apply(pad_frame(wf.frame, 0.3e-3, 0.2e-3), ch,
                                            mix_seed(seed, 3));
    const ComplexFrame rx = dsp::resample_rational(rx20, lte_cfg().grid.sampling_rate);

    const SpectralStream scan = lte_scan(lte_cfg(), rx);
    const ResampledStream stream = resample(scan, lte_cfg().grid.symbol_duration);
    const CtcPowerSeries series = project_to_ctc_grid(stream, scan, make_lte_rx_map(lte_cfg()));
    const PreambleTemplate templ = make_preamble_template(layout, 2, hole_w);
    SyncState sync = detect_preamble(series, templ, p.detect_threshold);
    TrialOutcome out;
    out.steer_fail_rate = wf.steer_cell_fail_rate;
    if (!sync.detected) return out;
    // the true on-air slot duration is the TX-side CORB extent (36 symbols)
    const double true_slot = spb * wifi_grid().symbol_duration;
    refine_sync(series, sync, layout, true_slot);
    sync.reference = estimate_reference(series, sync, templ, hole_w);
    const DemodResult demod =
        demodulate_frame(series, sync, layout, p.correction, true_slot, p.threshold_db);
    TrialOutcome res = finish_from_demod(demod, expected_frame_payload(ctc_payload, layout),
                                         p.payload_slots);
    res.steer_fail_rate = wf.steer_cell_fail_rate;
    return res;
}

TrialOutcome run_lte_to_wifi_trial(const TrialParams& p, uint64_t seed) {
    CtcGridLayout layout = lte_to_wifi_layout();
    const int k = std::max(1, p.symbol_scale);
    layout.slot_duration *= k;

    const Bits ctc_payload =
        random_bits(size_t(p.payload_slots) * layout.bits_per_slot() - 8, mix_seed(seed, 1));
    const double hole_w =
        p.lte_mode == LteTxMode::Power ? std::pow(10.0, p.rb_offset_db / 20.0) : 0.0;
    const PunchedCard card = encode_card(make_ctc_frame(ctc_payload, layout), layout, hole_w);

    const int lead_slots = 2, tail_slots = 1;
    const int total_slots = lead_slots + card.slots * k + tail_slots;
    const double duration = total_slots * 0.5e-3;

    RbSchedule schedule = RbSchedule::all_scheduled(total_slots);
    SubcarrierWeights weights;
    const SubcarrierWeights* weights_ptr = nullptr;
    if (p.lte_mode == LteTxMode::NullWidth) {
        weights = card_to_subcarrier_weights(card, p.null_width, 0.0, lte_cfg(), lead_slots,
                                             tail_slots, k);
        weights_ptr = &weights;
    } else {
        const auto res =
            card_to_schedule(card, p.lte_mode == LteTxMode::Blacklist ? LteCardMode::Blacklist
                                                                      : LteCardMode::Power,
                             p.rb_offset_db, p.rbs_per_subcarrier, lte_cfg(), lead_slots,
                             tail_slots, k);
        schedule = res.schedule;
    }

    const PreambleTemplate templ = make_preamble_template(layout, 5 * k, hole_w);
    const Bits expected = expected_frame_payload(ctc_payload, layout);

    const int reps = std::max(1, p.repetitions);
    std::vector<CtcPowerSeries> copies;
    std::vector<SyncState> syncs;
    std::vector<DemodResult> demods;
    TrialOutcome out;
    for (int r = 0; r < reps; ++r) {
        const ComplexFrame tx = lte_tx(lte_cfg(), schedule, duration, mix_seed(seed, 10 + r),
                                       weights_ptr);
        ChannelConfig ch;
        ch.snr_db = p.snr_db;
        ch.cfo_hz = p.cfo_hz;
        ch.timing_offset = p.timing_offset;
        ch.interferer = p.interferer;
        ch.band_halfwidth = lte_cfg().grid.occupied_bandwidth() / 2.0;
        const ComplexFrame rx30 = channel_apply(pad_frame(tx, 0.3e-3, 0.2e-3), ch,
                                                mix_seed(seed, 100 + r));
        const ComplexFrame rx = dsp::resample_rational(rx30, wifi_grid().sampling_rate);
        ScanTimingModel timing;
        timing.tail_fraction = p.tail_fraction;
        const SpectralStream scan =
            wifi_scan(wifi_grid(), rx, p.fft_points, timing, mix_seed(seed, 200 + r));
        const ResampledStream stream = resample(scan, 100e-6);
        CtcPowerSeries series = project_to_ctc_grid(stream, scan, make_wifi_rx_map(wifi_grid()));
        SyncState sync = detect_preamble(series, templ, p.detect_threshold);
        if (sync.detected) {
            refine_sync(series, sync, layout, layout.slot_duration);
            sync.reference = estimate_reference(series, sync, templ, hole_w);
            if (p.combine == CombineMode::Majority || reps == 1) {
                demods.push_back(demodulate_frame(series, sync, layout, SlotCorrection::Periodic,
                                                  layout.slot_duration, p.threshold_db));
            }
            copies.push_back(std::move(series));
            syncs.push_back(sync);
        }
    }
    if (copies.empty()) return out;

    DemodResult demod;
    if (reps == 1) {
        demod = demods.front();
    } else if (p.combine == CombineMode::Majority) {
        demod = majority_vote(demods, layout);
    } else {
        if (copies.size() == 1) {
            demod = demodulate_frame(copies[0], syncs[0], layout, SlotCorrection::Periodic,
                                     layout.slot_duration, p.threshold_db);
        } else {
            const MrcResult mrc = mrc_combine(copies, syncs, templ, hole_w);
            demod = demodulate_frame(mrc.series, mrc.sync, layout, SlotCorrection::Periodic,
                                     layout.slot_duration, p.threshold_db);
        }
    }
    return finish_from_demod(demod, expected, p.payload_slots);
}

void apply_sweep_point(TrialParams& p, SweepVar var, double point) {
    switch (var) {
        case SweepVar::SnrDb:
            p.snr_db = point;
            break;
        case SweepVar::NulledSubcarriers:
            p.lte_mode = LteTxMode::NullWidth;
            p.null_width = int(std::lround(point));
            break;
        case SweepVar::RbOffsetDb:
            p.lte_mode = LteTxMode::Power;
            p.rb_offset_db = point;
            break;
        case SweepVar::Repetitions:
            p.repetitions = int(std::lround(point));
            break;
        case SweepVar::SymbolScale:
            p.symbol_scale = int(std::lround(point));
            break;
        case SweepVar::FrameDuration: {
            const CtcGridLayout layout = p.direction == Direction::WifiToLte
                                             ? wifi_to_lte_layout()
                                             : lte_to_wifi_layout();
            const int slots = int(std::floor(point / layout.slot_duration + 1e-9));
            p.payload_slots = std::max(1, slots - kPreambleSlots - header_slots(layout));
            break;
        }
    }
}

template <typename Fn>
void parallel_trials(int trials, int num_threads, Fn&& fn) {
    int n = num_threads > 0 ? num_threads : int(std::thread::hardware_concurrency());
    n = std::max(1, std::min(n, trials));
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

int wifi_symbols_per_ctc_slot() { return 36; }
double wifi_hole_weight() { return std::sqrt(2.0 / 42.0); }

Bits random_bits(size_t n, uint64_t seed) {
    dsp::GaussianSource rng(seed);
    Bits out(n);
    for (size_t i = 0; i < n; ++i) out[i] = uint8_t(rng.next_u64() & 1u);
    return out;
}

double two_proportion_p_value(int err1, int err2, int n) {
    if (n <= 0) return 1.0;
    const double p1 = double(err1) / n;
    const double p2 = double(err2) / n;
    const double pbar = double(err1 + err2) / (2.0 * n);
    if (pbar <= 0.0 || pbar >= 1.0) return 1.0;
    const double se = std::sqrt(pbar * (1.0 - pbar) * 2.0 / n);
    const double z = (p1 - p2) / se;
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

TrialOutcome run_ctc_trial(const TrialParams& params, uint64_t seed) {
    return params.direction == Direction::WifiToLte ? run_wifi_to_lte_trial(params, seed)
                                                    : run_lte_to_wifi_trial(params, seed);
}

std::vector<FerPoint> run_fer_sweep(const Experiment& exp) {
    if (exp.trials < 1) throw ConfigError("fer sweep: trials must be positive");
    if (exp.points.empty()) throw ConfigError("fer sweep: no sweep points");
    std::vector<FerPoint> results;
    for (size_t pi = 0; pi < exp.points.size(); ++pi) {
        TrialParams params = exp.base;
        apply_sweep_point(params, exp.var, exp.points[pi]);
        std::vector<TrialOutcome> outcomes(exp.trials);
        parallel_trials(exp.trials, exp.num_threads, [&](int i) {
            outcomes[i] = run_ctc_trial(params, mix_seed(exp.seed, pi * 1000003ULL + i));
        });
        FerPoint fp;
        fp.point = exp.points[pi];
        fp.trials = exp.trials;
        double dip = 0.0;
        int dip_n = 0, ok = 0;
        for (const auto& o : outcomes) {
            ok += o.ok;
            if (o.ok && o.mean_dip_db > 0) {
                dip += o.mean_dip_db;
                ++dip_n;
            }
        }
        fp.frr = double(ok) / exp.trials;
        fp.fer = 1.0 - fp.frr;
        fp.mean_dip_db = dip_n ? dip / dip_n : 0.0;
        results.push_back(fp);
    }
    if (!exp.output_path.empty()) {
        std::ofstream out(exp.output_path);
        if (!out) throw std::runtime_error("cannot write sweep csv: " + exp.output_path);
        out << "# ctcsim fer-sweep v1\npoint,fer,frr,mean_dip_db,trials\n";
        for (const auto& r : results)
            out << r.point << ',' << r.fer << ',' << r.frr << ',' << r.mean_dip_db << ','
                << r.trials << "\n";
    }
    return results;
}

LegacyImpactResult run_legacy_impact(const LegacyImpactParams& params) {
    const CtcGridLayout layout = wifi_to_lte_layout();
    const int spb = wifi_symbols_per_ctc_slot();
    WifiChainConfig chain;
    chain.code_rate = params.rate;
    chain.frame_duration_cap = 12e-3;
    const int sps = chain.steps_per_symbol();

    struct Counts {
        std::atomic<int> plain_err{0}, emb_err{0};
        std::atomic<long> plain_bit_err{0}, emb_bit_err{0}, bits{0};
    } counts;

    parallel_trials(params.trials, params.num_threads, [&](int i) {
        const uint64_t seed = mix_seed(params.seed, i);
        const Bits ctc_payload = random_bits(
            size_t(params.ctc_payload_slots) * layout.bits_per_slot() - 8, mix_seed(seed, 1));
        const WifiCtcFraming framing =
            make_wifi_ctc_framing(ctc_payload, params.rate, layout, spb, wifi_hole_weight());
        const size_t data_len = std::min<size_t>(
            size_t(params.data_bits), size_t(framing.capacity_bits) - 24 - ctc_payload.size());
        const Bits data = random_bits(data_len, mix_seed(seed, 2));

        ChannelConfig ch;
        ch.snr_db = params.snr_db;
        ch.band_halfwidth = wifi_grid().occupied_bandwidth() / 2.0;

        // plain frame: [data][crc8] padded to whole symbols
        {
            Bits p = data;
            uint_to_bits(crc8(data), 8, p);
            const int nsym = int((p.size() + sps - 1) / sps);
            p.resize(size_t(nsym) * sps, 0);
            const WifiFrame wf = wifi_tx(wifi_grid(), chain, p);
            const ComplexFrame rx = channel_apply(wf.frame, ch, mix_seed(seed, 3));
            const Bits decoded = wifi_rx(wifi_grid(), chain, rx, wf.num_symbols);
            long biterr = 0;
            for (size_t b = 0; b < data.size(); ++b) biterr += decoded[b] != data[b];
            Bits got(decoded.begin(), decoded.begin() + data.size());
            const uint8_t got_crc = uint8_t(bits_to_uint(decoded, data.size(), 8));
            if (!(got == data && got_crc == crc8(data))) counts.plain_err.fetch_add(1);
            counts.plain_bit_err.fetch_add(biterr);
        }
        // embedded frame
        {
            const Bits p = make_embedded_payload(framing, ctc_payload, data);
            const WifiFrame wf = wifi_tx(wifi_grid(), chain, p, &framing.plan);
            const ComplexFrame rx = channel_apply(wf.frame, ch, mix_seed(seed, 4));
            const Bits decoded = wifi_rx(wifi_grid(), chain, rx, wf.num_symbols);
            const StripResult sr = strip_ctc(decoded, params.rate, chain.scrambler_seed, layout,
                                             spb, wifi_hole_weight(), int(data.size()));
            long biterr = 0;
            if (sr.ok && sr.data_bits.size() == data.size()) {
                for (size_t b = 0; b < data.size(); ++b) biterr += sr.data_bits[b] != data[b];
            } else {
                biterr = long(data.size());
            }
            if (!(sr.ok && sr.data_bits == data && sr.ctc_bits == ctc_payload))
                counts.emb_err.fetch_add(1);
            counts.emb_bit_err.fetch_add(biterr);
        }
        counts.bits.fetch_add(long(data.size()));
    });

    LegacyImpactResult r;
    r.snr_db = params.snr_db.value_or(std::numeric_limits<double>::infinity());
    r.trials = params.trials;
    r.fer_plain = double(counts.plain_err) / params.trials;
    r.fer_embedded = double(counts.emb_err) / params.trials;
    r.ber_plain = double(counts.plain_bit_err) / double(counts.bits);
    r.ber_embedded = double(counts.emb_bit_err) / double(counts.bits);
    r.overhead = embed_overhead(params.rate, layout);
    r.p_value = two_proportion_p_value(counts.plain_err, counts.emb_err, params.trials);
    const double pbar = (r.fer_plain + r.fer_embedded) / 2.0;
    r.z_score = (pbar > 0 && pbar < 1)
                    ? (r.fer_plain - r.fer_embedded) /
                          std::sqrt(pbar * (1 - pbar) * 2.0 / params.trials)
                    : 0.0;
    if (!params.output_path.empty()) {
        std::ofstream out(params.output_path);
        if (!out) throw std::runtime_error("cannot write legacy csv: " + params.output_path);
        out << "# ctcsim legacy-impact v1\n"
               "snr_db,trials,fer_plain,fer_embedded,ber_plain,ber_embedded,overhead,p_value\n";
        out << r.snr_db << ',' << r.trials << ',' << r.fer_plain << ',' << r.fer_embedded << ','
            << r.ber_plain << ',' << r.ber_embedded << ',' << r.overhead << ',' << r.p_value
            << "\n";
    }
    return r;
}

void dump_artifacts(const std::string& out_dir, uint64_t seed) {
    std::filesystem::create_directories(out_dir);

    {  // LTE -> WiFi card over the air, scanned by the WiFi receiver
        const CtcGridLayout layout = lte_to_wifi_layout();
        const Bits payload = random_bits(size_t(5) * layout.bits_per_slot() - 8, seed);
        const PunchedCard card = encode_card(make_ctc_frame(payload, layout), layout, 0.0);
        dump_card(card, out_dir + "/card_lte_to_wifi.csv");
        const auto sched = card_to_schedule(card, LteCardMode::Blacklist, 0.0, 3, lte_cfg(), 1, 1);
        dump_schedule(sched.schedule, out_dir + "/schedule_lte_to_wifi.csv");
        const double duration = (card.slots + 2) * 0.5e-3;
        const ComplexFrame tx = lte_tx(lte_cfg(), sched.schedule, duration, mix_seed(seed, 1));
        const ComplexFrame rx = dsp::resample_rational(tx, wifi_grid().sampling_rate);
        ScanTimingModel timing;  // regular stream for a clean picture
        const SpectralStream scan = wifi_scan(wifi_grid(), rx, 64, timing, mix_seed(seed, 2));
        spectrogram_export(scan, out_dir + "/spectrogram_lte_to_wifi.csv");
    }
    {  // WiFi -> LTE embedded frame, scanned by the LTE receiver
        const CtcGridLayout layout = wifi_to_lte_layout();
        const Bits ctc_payload = random_bits(size_t(8) * layout.bits_per_slot() - 8, seed);
        const WifiCtcFraming framing = make_wifi_ctc_framing(
            ctc_payload, CodeRate::R56, layout, wifi_symbols_per_ctc_slot(), wifi_hole_weight());
        dump_card(framing.card, out_dir + "/card_wifi_to_lte.csv");
        const Bits data = random_bits(
            size_t(framing.capacity_bits) - 24 - ctc_payload.size(), mix_seed(seed, 3));
        WifiChainConfig chain;
        chain.code_rate = CodeRate::R56;
        const WifiFrame wf =
            wifi_tx(wifi_grid(), chain, make_embedded_payload(framing, ctc_payload, data),
                    &framing.plan);
        const ComplexFrame rx = dsp::resample_rational(wf.frame, lte_cfg().grid.sampling_rate);
        const SpectralStream scan = lte_scan(lte_cfg(), rx);
        spectrogram_export(scan, out_dir + "/spectrogram_wifi_to_lte.csv");
    }
}

}  // namespace ctc
