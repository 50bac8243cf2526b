#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ctcsim/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ctc;

TEST_CASE("noiseless trials decode in both directions") {
    TrialParams p;
    p.direction = Direction::LteToWifi;
    p.snr_db.reset();
    p.payload_slots = 6;
    p.tail_fraction = 0.0;
    const TrialOutcome a = run_ctc_trial(p, 1);
    CHECK(a.detected);
    CHECK(a.ok);
    CHECK(a.mean_dip_db > 6.0);

    p.direction = Direction::WifiToLte;
    p.payload_slots = 5;
    const TrialOutcome b = run_ctc_trial(p, 2);
    CHECK(b.detected);
    CHECK(b.ok);
    CHECK(b.mean_dip_db > 6.0);
    CHECK(b.steer_fail_rate < 0.02);
}

TEST_CASE("noiseless trials survive the irregular scan timing") {
    TrialParams p;
    p.direction = Direction::LteToWifi;
    p.snr_db.reset();
    p.payload_slots = 6;
    p.tail_fraction = 0.2;
    int ok = 0;
    for (uint64_t s = 0; s < 5; ++s) ok += run_ctc_trial(p, 100 + s).ok;
    CHECK(ok >= 4);
}

TEST_CASE("lte power mode and null-width mode decode noiselessly") {
    TrialParams p;
    p.direction = Direction::LteToWifi;
    p.snr_db.reset();
    p.payload_slots = 4;
    p.tail_fraction = 0.0;
    p.lte_mode = LteTxMode::Power;
    p.rb_offset_db = -9.0;
    CHECK(run_ctc_trial(p, 3).ok);
    p.lte_mode = LteTxMode::NullWidth;
    p.null_width = 36;
    CHECK(run_ctc_trial(p, 4).ok);
}

TEST_CASE("identical seeds give identical sweep results") {
    Experiment exp;
    exp.base.direction = Direction::LteToWifi;
    exp.base.payload_slots = 3;
    exp.base.tail_fraction = 0.0;
    exp.var = SweepVar::SnrDb;
    exp.points = {15.0};
    exp.trials = 6;
    exp.seed = 42;
    exp.output_path = "sweep_a.csv";
    const auto a = run_fer_sweep(exp);
    exp.output_path = "sweep_b.csv";
    const auto b = run_fer_sweep(exp);
    REQUIRE(a.size() == b.size());
    CHECK(a[0].fer == b[0].fer);
    CHECK(a[0].mean_dip_db == b[0].mean_dip_db);
    std::ifstream fa("sweep_a.csv"), fb("sweep_b.csv");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    // versioned header comment
    CHECK(sa.str().rfind("# ctcsim fer-sweep v1", 0) == 0);
}

TEST_CASE("config errors are rejected before any trial") {
    Experiment exp;
    exp.points = {};
    CHECK_THROWS_AS(run_fer_sweep(exp), ConfigError);
    exp.points = {10.0};
    exp.trials = 0;
    CHECK_THROWS_AS(run_fer_sweep(exp), ConfigError);
}

TEST_CASE("legacy impact: noiseless arms are error free at the stated overhead") {
    LegacyImpactParams params;
    params.snr_db.reset();
    params.trials = 3;
    params.data_bits = 1500;
    params.seed = 5;
    const LegacyImpactResult r = run_legacy_impact(params);
    CHECK(r.fer_plain == 0.0);
    CHECK(r.fer_embedded == 0.0);
    CHECK(r.ber_plain == 0.0);
    CHECK(r.ber_embedded == 0.0);
    CHECK(r.overhead == doctest::Approx(12.0 / 208.0));
    CHECK(r.p_value == 1.0);
}

TEST_CASE("artifact dumps produce the spectrogram and card files") {
    dump_artifacts("artifact_test_dir", 3);
    for (const char* name :
         {"spectrogram_lte_to_wifi.csv", "spectrogram_wifi_to_lte.csv",
          "card_lte_to_wifi.csv", "card_wifi_to_lte.csv", "schedule_lte_to_wifi.csv"}) {
        CHECK_MESSAGE(std::filesystem::exists(std::string("artifact_test_dir/") + name), name);
    }
    // dip width shows up as consecutive low rows: 0.5 ms at 3.2 us vectors
    std::ifstream in("artifact_test_dir/spectrogram_lte_to_wifi.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows > 100);
}

TEST_CASE("two-proportion test behaves") {
    CHECK(two_proportion_p_value(50, 50, 1000) == doctest::Approx(1.0));
    CHECK(two_proportion_p_value(50, 52, 1000) > 0.05);
    CHECK(two_proportion_p_value(50, 150, 1000) < 0.001);
}
