#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ctcsim/grid.hpp"

#include <cmath>
#include <fstream>

using namespace ctc;

TEST_CASE("grid presets satisfy the geometry invariants") {
    const GridSpec wifi = wifi_80211n_20mhz();
    CHECK(wifi.subcarrier_spacing == doctest::Approx(312.5e3));
    CHECK(wifi.fft_period == doctest::Approx(3.2e-6));
    CHECK(wifi.symbol_duration == doctest::Approx(4e-6));
    CHECK(wifi.used_bins.size() == 56);
    CHECK(wifi.pilot_bins.size() == 4);
    CHECK(wifi.occupied_bandwidth() == doctest::Approx(17.5e6));

    const GridSpec lte = lte_20mhz();
    CHECK(lte.subcarrier_spacing == doctest::Approx(15e3));
    CHECK(lte.used_bins.size() == 1200);
    CHECK(lte.occupied_bandwidth() == doctest::Approx(18e6));
    CHECK(lte.symbol_duration == doctest::Approx(0.5e-3 / 7.0));
    // CP pattern fills the slot exactly
    int cp_total = 0;
    for (int s = 0; s < 7; ++s) cp_total += lte.cp_samples(s);
    CHECK(cp_total + 7 * 2048 == 15360);
}

TEST_CASE("solve_corb reproduces the WiFi->LTE pairing") {
    const Corb c = solve_corb(wifi_80211n_20mhz(), lte_20mhz());
    CHECK(c.tx_subcarriers == 1);
    CHECK(c.rx_subcarriers == 21);
    CHECK(c.tx_symbols == 36);
    CHECK(c.rx_symbols == 2);
    CHECK(c.width() == doctest::Approx(315e3));
    CHECK(c.duration() == doctest::Approx(142.857e-6).epsilon(1e-3));
    CHECK(c.tx_duration() == doctest::Approx(144e-6));
}

TEST_CASE("solve_corb reproduces the LTE->WiFi pairing at RB granularity") {
    CorbOptions opts;
    opts.tx_freq_granularity = 12;  // one RB in frequency
    opts.tx_time_granularity = 7;   // one slot in time
    const Corb c = solve_corb(lte_20mhz(), wifi_80211n_20mhz(), opts);
    CHECK(c.tx_subcarriers == 24);
    CHECK(c.rx_subcarriers == 1);
    CHECK(c.tx_symbols == 7);
    CHECK(c.rx_symbols == 125);
    CHECK(c.width() == doctest::Approx(312.5e3));
    CHECK(c.duration() == doctest::Approx(500e-6).epsilon(1e-6));
}

TEST_CASE("identical grids in strict mode force 2x2 with zero residuals") {
    const GridSpec g = wifi_80211n_20mhz();
    CorbOptions opts;
    opts.mode = CorbMode::Strict;
    const Corb c = solve_corb(g, g, opts);
    CHECK(c.tx_subcarriers == 2);
    CHECK(c.rx_subcarriers == 2);
    CHECK(c.tx_symbols == 2);
    CHECK(c.rx_symbols == 2);
    CHECK(c.eps_f == doctest::Approx(0.0));
    CHECK(c.eps_t == doctest::Approx(0.0));
}

TEST_CASE("zero residual limits admit only exact covers") {
    CorbOptions opts;
    opts.eps_limit_f = 0.0;
    opts.eps_limit_t = 0.0;
    // identical grids: exact multiples exist
    const Corb same = solve_corb(lte_20mhz(), lte_20mhz(), opts);
    CHECK(same.eps_f == doctest::Approx(0.0));
    CHECK(same.eps_t == doctest::Approx(0.0));
    // WiFi->LTE: frequency locks to the exact 6:125 relation, no shortfall
    const Corb c = solve_corb(wifi_80211n_20mhz(), lte_20mhz(), opts);
    CHECK(c.eps_f <= 0.0);
    CHECK(c.eps_t <= 0.0);
}

TEST_CASE("solve_corb handles dimensions symmetrically") {
    // swap time and frequency quanta of both grids: the (n, a) pair swaps
    const GridSpec a = wifi_80211n_20mhz();
    const GridSpec b = lte_20mhz();
    CorbOptions strict;
    strict.mode = CorbMode::Strict;
    const Corb fwd = solve_corb(a, b, strict);

    auto swapped = [](const GridSpec& g, const GridSpec& other) {
        // fabricate a grid whose frequency quantum equals the original time
        // quantum (scaled to Hz) and vice versa
        GridSpec s = g;
        s.subcarrier_spacing = g.symbol_duration * 1e9;
        s.symbol_duration = g.subcarrier_spacing * 1e-9;
        (void)other;
        return s;
    };
    GridSpec a2 = swapped(a, b), b2 = swapped(b, a);
    const Corb rev = solve_corb(a2, b2, strict);
    CHECK(rev.tx_subcarriers == fwd.tx_symbols);
    CHECK(rev.rx_subcarriers == fwd.rx_symbols);
    CHECK(rev.tx_symbols == fwd.tx_subcarriers);
    CHECK(rev.rx_symbols == fwd.rx_subcarriers);
}

TEST_CASE("no solution within tight limits raises") {
    CorbOptions opts;
    opts.eps_limit_f = 0.0;
    opts.eps_limit_t = 0.0;
    opts.search_bound = 5;  // too small for any exact relation
    CHECK_THROWS_AS(solve_corb(wifi_80211n_20mhz(), lte_20mhz(), opts), NoSolution);
}

TEST_CASE("overlap_band computes interval intersections") {
    const GridSpec wifi = wifi_80211n_20mhz();
    const GridSpec lte = lte_20mhz();
    const auto band = overlap_band(wifi, lte);
    REQUIRE(band.has_value());
    CHECK(band->second - band->first == doctest::Approx(17.5e6));

    const auto same = overlap_band(wifi, wifi);
    REQUIRE(same.has_value());
    CHECK(same->second - same->first == doctest::Approx(17.5e6));

    const GridSpec far = wifi_80211n_20mhz(5.54e9);  // 40 MHz away
    CHECK(!overlap_band(wifi, far).has_value());
}

TEST_CASE("nyquist_ctc_rate evaluates the capacity formula") {
    const Corb c = solve_corb(wifi_80211n_20mhz(), lte_20mhz());
    const auto band = overlap_band(wifi_80211n_20mhz(), lte_20mhz());
    REQUIRE(band.has_value());
    // floor(17.5 MHz / 315 kHz) = 55 tiles at 1 bit per CORB duration
    const double rate = nyquist_ctc_rate(c, *band, 2);
    CHECK(rate == doctest::Approx(55.0 / (1e-3 / 7.0)).epsilon(1e-9));
    CHECK(rate == doctest::Approx(385e3).epsilon(0.001));

    // unit case: one tile per 1 ms
    Corb unit = c;
    unit.rx_subcarriers = 1;
    unit.rx_subcarrier_spacing = band->second - band->first;
    unit.rx_symbols = 1;
    unit.rx_symbol_duration = 1e-3;
    CHECK(nyquist_ctc_rate(unit, *band, 2) == doctest::Approx(1000.0));
    // log2 scaling in the power levels
    CHECK(nyquist_ctc_rate(unit, *band, 4) == doctest::Approx(2000.0));

    CHECK_THROWS(nyquist_ctc_rate(c, Band{0.0, 0.0}, 2));
    CHECK_THROWS(nyquist_ctc_rate(c, *band, 1));
}

TEST_CASE("card_rate matches the published layout rates") {
    CHECK(card_rate(wifi_to_lte_layout()) == doctest::Approx(84e3).epsilon(1e-9));
    CHECK(card_rate(lte_to_wifi_layout()) == doctest::Approx(24e3).epsilon(1e-9));
    CtcGridLayout one32 = wifi_to_lte_layout();
    one32.num_groups = 1;
    one32.group_size = 32;
    CHECK(card_rate(one32) == doctest::Approx(35e3).epsilon(1e-9));
    // integer identity
    const CtcGridLayout l = wifi_to_lte_layout();
    CHECK(card_rate(l) * l.slot_duration == doctest::Approx(double(l.bits_per_slot())));
}

TEST_CASE("ctc wifi bins are the symmetric 48-of-52 subset") {
    const auto& bins = ctc_wifi_bins();
    CHECK(bins.size() == 48);
    for (int b : bins) {
        CHECK(b != 0);
        CHECK(std::abs(b) >= 2);
        CHECK(std::abs(b) <= 27);
        CHECK(std::abs(b) != 7);
        CHECK(std::abs(b) != 21);
    }
}

TEST_CASE("grid config files load presets and explicit fields") {
    {
        std::ofstream f("grid_test_preset.json");
        f << R"({"preset": "lte-20mhz"})";
    }
    const GridSpec lte = load_grid_config("grid_test_preset.json");
    CHECK(lte.fft_size == 2048);
    {
        std::ofstream f("grid_test_full.json");
        f << R"({"sampling_rate": 20e6, "fft_size": 64, "cyclic_prefix": 0.8e-6,
                 "used_bins": [-2,-1,1,2], "pilot_bins": [1], "center_frequency": 5.5e9})";
    }
    const GridSpec g = load_grid_config("grid_test_full.json");
    CHECK(g.used_bins.size() == 4);
    CHECK(g.subcarrier_spacing == doctest::Approx(312.5e3));
    CHECK_THROWS_AS(load_grid_config("missing_file.json"), ConfigError);
}
