#include "ctcsim/channel.hpp"

#include "ctcsim/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ctc {

namespace {

constexpr size_t kSegment = 4096;

size_t segment_size_for(size_t n) {
    size_t seg = kSegment;
    while (seg > n && seg > 64) seg >>= 1;
    return seg <= n ? seg : 0;
}

// per-segment in-band power via FFT mask; returns (power, active) pairs
std::vector<std::pair<double, bool>> segment_powers(const ComplexFrame& frame,
                                                    double band_halfwidth) {
    const double fs = frame.sampling_rate;
    const size_t seg = segment_size_for(frame.samples.size());
    std::vector<std::pair<double, bool>> out;
    if (seg == 0) {
        // very short frame: treat everything as in band
        const double p = dsp::mean_power(frame.samples);
        out.emplace_back(p, p > 0.0);
        return out;
    }
    const int k_max = int(std::floor(band_halfwidth / fs * double(seg)));
    std::vector<cplx> work(seg);
    double peak = 0.0;
    for (size_t pos = 0; pos + seg <= frame.samples.size(); pos += seg) {
        for (size_t i = 0; i < seg; ++i) work[i] = frame.samples[pos + i];
        dsp::fft(work, false);
        double p = 0.0;
        for (int k = -k_max; k <= k_max; ++k) {
            const int idx = k >= 0 ? k : k + int(seg);
            p += std::norm(work[idx]);
        }
        p /= double(seg);
        peak = std::max(peak, p);
        out.emplace_back(p, false);
    }
    for (auto& e : out) e.second = e.first > 0.05 * peak;
    return out;
}

}  // namespace

double inband_power(const ComplexFrame& frame, double band_halfwidth) {
    const auto segs = segment_powers(frame, band_halfwidth);
    double sum = 0.0;
    size_t n = 0;
    for (const auto& [p, active] : segs)
        if (active) {
            sum += p;
            ++n;
        }
    return n ? sum / double(n) : 0.0;
}

ComplexFrame channel_apply(const ComplexFrame& frame, const ChannelConfig& config,
                           uint64_t seed) {
    ComplexFrame out = frame;
    const double fs = frame.sampling_rate;
    dsp::GaussianSource rng(seed);

    // frequency-selective gain: piecewise-linear profile over the band,
    // applied blockwise in the frequency domain
    if (!config.gain_profile_db.empty()) {
        if (config.band_halfwidth <= 0)
            throw ConfigError("channel: gain profile needs band_halfwidth");
        const auto& prof = config.gain_profile_db;
        std::vector<cplx> work(kSegment);
        for (size_t pos = 0; pos + kSegment <= out.samples.size(); pos += kSegment) {
            for (size_t i = 0; i < kSegment; ++i) work[i] = out.samples[pos + i];
            dsp::fft(work, false);
            for (size_t i = 0; i < kSegment; ++i) {
                int k = int(i) <= int(kSegment) / 2 ? int(i) : int(i) - int(kSegment);
                const double f = k * fs / double(kSegment);
                double x = (f + config.band_halfwidth) / (2 * config.band_halfwidth);
                x = std::clamp(x, 0.0, 1.0) * (prof.size() - 1);
                const size_t j = std::min(size_t(x), prof.size() - 2);
                const double frac = x - double(j);
                const double gdb = prof[j] * (1 - frac) + prof[j + 1] * frac;
                work[i] *= std::pow(10.0, gdb / 20.0);
            }
            dsp::fft(work, true);
            for (size_t i = 0; i < kSegment; ++i) out.samples[pos + i] = work[i];
        }
    }

    // carrier frequency offset
    if (config.cfo_hz != 0.0) {
        const double w = 2.0 * std::numbers::pi * config.cfo_hz / fs;
        for (size_t n = 0; n < out.samples.size(); ++n)
            out.samples[n] *= cplx(std::cos(w * n), std::sin(w * n));
    }

    // fractional-sample delay via windowed sinc
    if (config.timing_offset != 0.0) {
        const double shift = config.timing_offset * fs;
        const long d_int = long(std::floor(shift));
        const double frac = shift - double(d_int);
        std::vector<cplx> shifted(out.samples.size(), cplx{0, 0});
        const int half = 16;
        std::vector<double> taps(2 * half + 1);
        double tsum = 0.0;
        for (int i = -half; i <= half; ++i) {
            const double t = i - frac;
            double v = (std::abs(t) < 1e-12)
                           ? 1.0
                           : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
            v *= 0.54 + 0.46 * std::cos(std::numbers::pi * i / double(half + 1));
            taps[i + half] = v;
            tsum += v;
        }
        for (auto& t : taps) t /= tsum;
        const long n = long(out.samples.size());
        for (long i = 0; i < n; ++i) {
            cplx acc = 0.0;
            for (int k = -half; k <= half; ++k) {
                const long src = i - d_int - k;
                if (src >= 0 && src < n) acc += out.samples[src] * taps[k + half];
            }
            shifted[i] = acc;
        }
        out.samples.swap(shifted);
    }

    const double p_sig =
        config.band_halfwidth > 0 ? inband_power(out, config.band_halfwidth) : 0.0;

    // interferer: band-limited noise bursts with exponential inter-arrivals
    if (config.interferer && config.interferer->offered_load > 0.0) {
        const auto& icfg = *config.interferer;
        const double load = std::min(icfg.offered_load, 0.999);
        const double mean_gap = icfg.frame_duration * (1.0 - load) / load;
        const long burst_n = std::lround(icfg.frame_duration * fs);
        const double p_int = p_sig * db_to_lin(icfg.relative_power_db);
        const double frac_band = std::min(1.0, 2.0 * config.band_halfwidth / fs);
        // after band-limiting a unit-power burst, frac_band of the power
        // remains and all of it sits in band
        const double amp_burst = std::sqrt(p_int / std::max(frac_band, 1e-9));
        double t = -mean_gap * std::log(std::max(rng.uniform(), 1e-12));
        const long n = long(out.samples.size());
        std::vector<cplx> burst(burst_n);
        while (true) {
            const long start = std::lround(t * fs);
            if (start >= n) break;
            for (long i = 0; i < burst_n; ++i) burst[i] = rng.next_complex();
            // band limit: zero out-of-band bins blockwise
            for (long pos = 0; pos + long(kSegment) <= burst_n; pos += long(kSegment)) {
                std::vector<cplx> w(kSegment);
                for (size_t i = 0; i < kSegment; ++i) w[i] = burst[pos + i];
                dsp::fft(w, false);
                const int k_max = int(std::floor(config.band_halfwidth / fs * kSegment));
                for (size_t i = 0; i < kSegment; ++i) {
                    int k = int(i) <= int(kSegment) / 2 ? int(i) : int(i) - int(kSegment);
                    if (std::abs(k) > k_max) w[i] = 0.0;
                }
                dsp::fft(w, true);
                for (size_t i = 0; i < kSegment; ++i) burst[pos + i] = w[i];
            }
            for (long i = 0; i < burst_n && start + i < n; ++i)
                out.samples[start + i] += burst[i] * amp_burst;
            t += icfg.frame_duration - mean_gap * std::log(std::max(rng.uniform(), 1e-12));
        }
    }

    // AWGN scaled to the target SNR over the occupied band
    if (config.snr_db) {
        if (config.band_halfwidth <= 0)
            throw ConfigError("channel: snr needs band_halfwidth");
        const double snr = db_to_lin(*config.snr_db);
        const double frac_band = std::min(1.0, 2.0 * config.band_halfwidth / fs);
        const double sigma2 = (p_sig / snr) / frac_band;  // per-sample noise power
        const double amp = std::sqrt(sigma2);
        for (auto& v : out.samples) v += rng.next_complex() * amp;
    }
    return out;
}

}  // namespace ctc
