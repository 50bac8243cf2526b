// ctcsim - command line front end for the CTC baseband simulator
#include "CLI11.hpp"

#include "ctcsim/embed.hpp"
#include "ctcsim/grid.hpp"
#include "ctcsim/harness.hpp"
#include "ctcsim/io.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

namespace {

ctc::GridSpec resolve_grid(const std::string& spec) {
    if (spec.find('.') != std::string::npos && spec.find(".json") != std::string::npos)
        return ctc::load_grid_config(spec);
    return ctc::grid_preset(spec);
}

int cmd_corb(const std::string& tx_name, const std::string& rx_name, bool strict,
             double eps_f, double eps_t, int gran_f, int gran_t) {
    const ctc::GridSpec tx = resolve_grid(tx_name);
    const ctc::GridSpec rx = resolve_grid(rx_name);
    ctc::CorbOptions opts;
    opts.mode = strict ? ctc::CorbMode::Strict : ctc::CorbMode::Relaxed;
    opts.eps_limit_f = eps_f;
    opts.eps_limit_t = eps_t;
    opts.tx_freq_granularity = gran_f;
    opts.tx_time_granularity = gran_t;
    const ctc::Corb c = ctc::solve_corb(tx, rx, opts);
    std::printf("tx_subcarriers (n): %d\n", c.tx_subcarriers);
    std::printf("rx_subcarriers (m): %d\n", c.rx_subcarriers);
    std::printf("tx_symbols     (a): %d\n", c.tx_symbols);
    std::printf("rx_symbols     (b): %d\n", c.rx_symbols);
    std::printf("width:  %.3f kHz (tx side %.3f kHz, residual %.3f kHz)\n", c.width() / 1e3,
                c.tx_width() / 1e3, c.eps_f / 1e3);
    std::printf("duration: %.3f us (tx side %.3f us, residual %.3f us)\n", c.duration() * 1e6,
                c.tx_duration() * 1e6, c.eps_t * 1e6);
    const auto band = ctc::overlap_band(tx, rx);
    if (band) {
        std::printf("overlap band: %.3f MHz\n", (band->second - band->first) / 1e6);
        std::printf("nyquist ctc rate (P=2): %.1f kbps\n",
                    ctc::nyquist_ctc_rate(c, *band, 2) / 1e3);
    }
    return 0;
}

int cmd_rate(const std::string& which) {
    const std::map<std::string, ctc::CtcGridLayout> layouts = {
        {"wifi-to-lte", ctc::wifi_to_lte_layout()},
        {"lte-to-wifi", ctc::lte_to_wifi_layout()},
    };
    auto print = [](const std::string& name, const ctc::CtcGridLayout& l) {
        std::printf("%s: %d bits/slot, slot %.1f us -> %.1f kbps\n", name.c_str(),
                    l.bits_per_slot(), l.slot_duration * 1e6, ctc::card_rate(l) / 1e3);
    };
    if (which == "all") {
        for (const auto& [name, l] : layouts) print(name, l);
        ctc::CtcGridLayout one32 = ctc::wifi_to_lte_layout();
        one32.num_groups = 1;
        one32.group_size = 32;
        print("wifi-to-lte-1x32", one32);
        return 0;
    }
    auto it = layouts.find(which);
    if (it == layouts.end()) {
        std::cerr << "unknown layout: " << which << "\n";
        return 1;
    }
    print(it->first, it->second);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ctcsim - punched-card cross-technology communication simulator"};
    app.require_subcommand(1);

    // corb
    std::string tx_grid = "wifi-80211n-20mhz", rx_grid = "lte-20mhz";
    bool strict = false;
    double eps_f = -1.0, eps_t = -1.0;
    int gran_f = 1, gran_t = 1;
    auto* corb = app.add_subcommand("corb", "solve the cross-observable resource block");
    corb->add_option("--tx", tx_grid, "TX grid preset or config file");
    corb->add_option("--rx", rx_grid, "RX grid preset or config file");
    corb->add_flag("--strict", strict, "require >=2 RX quanta in both dimensions");
    corb->add_option("--eps-f", eps_f, "frequency residual limit in Hz");
    corb->add_option("--eps-t", eps_t, "time residual limit in seconds");
    corb->add_option("--gran-f", gran_f, "TX subcarrier granularity (12 = one RB)");
    corb->add_option("--gran-t", gran_t, "TX symbol granularity (7 = one LTE slot)");

    // rate
    std::string layout_name = "all";
    auto* rate = app.add_subcommand("rate", "CTC data rates of the card layouts");
    rate->add_option("layout", layout_name, "wifi-to-lte | lte-to-wifi | all");

    // spectrogram
    std::string out_dir = "artifacts";
    uint64_t art_seed = 7;
    auto* spect = app.add_subcommand("spectrogram", "dump punched-card spectrogram CSVs");
    spect->add_option("--out", out_dir, "output directory");
    spect->add_option("--seed", art_seed, "payload seed");

    // fer-sweep
    ctc::Experiment exp;
    std::string direction = "lte-to-wifi", var = "snr", csv_path = "fer_sweep.csv";
    std::string lte_mode = "blacklist", combine = "mrc";
    double fixed_snr = 20.0;
    bool noiseless = false;
    auto* fer = app.add_subcommand("fer-sweep", "run a frame-error-rate sweep");
    fer->add_option("--direction", direction, "wifi-to-lte | lte-to-wifi");
    fer->add_option("--var", var, "snr | nulled | rb-offset | repetitions | symbol-scale | duration");
    fer->add_option("--points", exp.points, "sweep points")->required();
    fer->add_option("--trials", exp.trials, "trials per point (default 1000)");
    fer->add_option("--seed", exp.seed, "run seed");
    fer->add_option("--out", csv_path, "output CSV path");
    fer->add_option("--threads", exp.num_threads, "worker threads (0 = auto)");
    fer->add_option("--snr", fixed_snr, "fixed SNR for non-SNR sweeps");
    fer->add_flag("--noiseless", noiseless, "disable channel noise");
    fer->add_option("--payload-slots", exp.base.payload_slots, "CTC payload slots per frame");
    fer->add_option("--fft-points", exp.base.fft_points, "WiFi scan FFT size (64 or 256)");
    fer->add_option("--tail-fraction", exp.base.tail_fraction, "scan-gap tail fraction");
    fer->add_option("--threshold-db", exp.base.threshold_db, "slot decision threshold");
    fer->add_option("--lte-mode", lte_mode, "blacklist | power | null-width");
    fer->add_option("--rbs-per-subcarrier", exp.base.rbs_per_subcarrier, "RBs per hole (1..3)");
    fer->add_option("--rb-offset-db", exp.base.rb_offset_db, "power mode RB offset");
    fer->add_option("--null-width", exp.base.null_width, "nulled subcarriers per hole");
    fer->add_option("--symbol-scale", exp.base.symbol_scale, "LTE slots per CTC symbol");
    fer->add_option("--repetitions", exp.base.repetitions, "frame copies");
    fer->add_option("--combine", combine, "mrc | majority (for repetitions)");
    bool no_correction = false;
    fer->add_flag("--no-slot-correction", no_correction, "disable periodic slot correction");

    // legacy-impact
    ctc::LegacyImpactParams leg;
    std::string leg_csv = "legacy_impact.csv";
    double leg_snr = 19.0;
    bool leg_noiseless = false;
    auto* legacy = app.add_subcommand("legacy-impact", "embedded vs plain WiFi reception");
    legacy->add_option("--snr", leg_snr, "channel SNR in dB");
    legacy->add_flag("--noiseless", leg_noiseless, "disable channel noise");
    legacy->add_option("--trials", leg.trials, "frames per arm");
    legacy->add_option("--seed", leg.seed, "run seed");
    legacy->add_option("--data-bits", leg.data_bits, "WiFi payload data bits");
    legacy->add_option("--out", leg_csv, "output CSV path");
    legacy->add_option("--threads", leg.num_threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (corb->parsed()) return cmd_corb(tx_grid, rx_grid, strict, eps_f, eps_t, gran_f, gran_t);
        if (rate->parsed()) return cmd_rate(layout_name);
        if (spect->parsed()) {
            ctc::dump_artifacts(out_dir, art_seed);
            std::printf("artifacts written to %s\n", out_dir.c_str());
            return 0;
        }
        if (fer->parsed()) {
            exp.base.direction = direction == "wifi-to-lte" ? ctc::Direction::WifiToLte
                                                            : ctc::Direction::LteToWifi;
            if (direction != "wifi-to-lte" && direction != "lte-to-wifi")
                throw ctc::ConfigError("unknown direction: " + direction);
            if (var == "snr")
                exp.var = ctc::SweepVar::SnrDb;
            else if (var == "nulled")
                exp.var = ctc::SweepVar::NulledSubcarriers;
            else if (var == "rb-offset")
                exp.var = ctc::SweepVar::RbOffsetDb;
            else if (var == "repetitions")
                exp.var = ctc::SweepVar::Repetitions;
            else if (var == "symbol-scale")
                exp.var = ctc::SweepVar::SymbolScale;
            else if (var == "duration")
                exp.var = ctc::SweepVar::FrameDuration;
            else
                throw ctc::ConfigError("unknown sweep variable: " + var);
            if (lte_mode == "blacklist")
                exp.base.lte_mode = ctc::LteTxMode::Blacklist;
            else if (lte_mode == "power")
                exp.base.lte_mode = ctc::LteTxMode::Power;
            else if (lte_mode == "null-width")
                exp.base.lte_mode = ctc::LteTxMode::NullWidth;
            else
                throw ctc::ConfigError("unknown lte mode: " + lte_mode);
            exp.base.combine =
                combine == "majority" ? ctc::CombineMode::Majority : ctc::CombineMode::Mrc;
            exp.base.correction =
                no_correction ? ctc::SlotCorrection::None : ctc::SlotCorrection::Periodic;
            if (noiseless)
                exp.base.snr_db.reset();
            else
                exp.base.snr_db = fixed_snr;
            exp.output_path = csv_path;
            const auto results = ctc::run_fer_sweep(exp);
            std::printf("point,fer,frr,mean_dip_db,trials\n");
            for (const auto& r : results)
                std::printf("%g,%g,%g,%g,%d\n", r.point, r.fer, r.frr, r.mean_dip_db, r.trials);
            return 0;
        }
        if (legacy->parsed()) {
            if (leg_noiseless)
                leg.snr_db.reset();
            else
                leg.snr_db = leg_snr;
            leg.output_path = leg_csv;
            const auto r = ctc::run_legacy_impact(leg);
            std::printf("fer_plain=%g fer_embedded=%g ber_plain=%g ber_embedded=%g\n",
                        r.fer_plain, r.fer_embedded, r.ber_plain, r.ber_embedded);
            std::printf("overhead=%.4f p_value=%g\n", r.overhead, r.p_value);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
