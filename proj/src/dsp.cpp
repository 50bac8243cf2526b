#include "ctcsim/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ctc::dsp {

namespace {

struct FftPlan {
    size_t n = 0;
    std::vector<size_t> bitrev;
    std::vector<cplx> twiddle;  // forward twiddles, half size
};

// One cached plan per thread; FFT sizes in this project are 64, 256, 2048.
FftPlan& plan_for(size_t n) {
    thread_local std::vector<FftPlan> plans;
    for (auto& p : plans)
        if (p.n == n) return p;
    FftPlan p;
    p.n = n;
    p.bitrev.resize(n);
    size_t log2n = 0;
    while ((size_t{1} << log2n) < n) ++log2n;
    for (size_t i = 0; i < n; ++i) {
        size_t r = 0;
        for (size_t b = 0; b < log2n; ++b)
            if (i & (size_t{1} << b)) r |= size_t{1} << (log2n - 1 - b);
        p.bitrev[i] = r;
    }
    p.twiddle.resize(n / 2);
    for (size_t k = 0; k < n / 2; ++k) {
        double ang = -2.0 * std::numbers::pi * double(k) / double(n);
        p.twiddle[k] = cplx(std::cos(ang), std::sin(ang));
    }
    plans.push_back(std::move(p));
    return plans.back();
}

}  // namespace

void fft(std::vector<cplx>& x, bool inverse) {
    const size_t n = x.size();
    if (n == 0) return;
    if (n & (n - 1)) throw ConfigError("fft size must be a power of two");
    if (n == 1) return;
    const FftPlan& p = plan_for(n);
    for (size_t i = 0; i < n; ++i) {
        size_t j = p.bitrev[i];
        if (i < j) std::swap(x[i], x[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        size_t half = len >> 1;
        size_t step = n / len;
        for (size_t i = 0; i < n; i += len) {
            for (size_t k = 0; k < half; ++k) {
                cplx w = p.twiddle[k * step];
                if (inverse) w = std::conj(w);
                cplx u = x[i + k];
                cplx v = x[i + k + half] * w;
                x[i + k] = u + v;
                x[i + k + half] = u - v;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(double(n));
    for (auto& v : x) v *= scale;
}

std::vector<cplx> fft_copy(const std::vector<cplx>& x, bool inverse) {
    std::vector<cplx> y = x;
    fft(y, inverse);
    return y;
}

double total_energy(const std::vector<cplx>& x) {
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    return e;
}

double mean_power(const std::vector<cplx>& x) {
    return x.empty() ? 0.0 : total_energy(x) / double(x.size());
}

void rational_ratio(double source_rate, double target_rate, int max_den, int& p, int& q) {
    if (source_rate <= 0 || target_rate <= 0)
        throw ConfigError("rates must be positive");
    const double r = target_rate / source_rate;
    for (int den = 1; den <= max_den; ++den) {
        double num = r * den;
        double rounded = std::round(num);
        if (rounded >= 1.0 && rounded <= double(max_den) &&
            std::abs(num - rounded) < 1e-9 * den) {
            p = int(rounded);
            q = den;
            return;
        }
    }
    throw ConfigError("rate ratio not reducible to integers within bound");
}

namespace {

double bessel_i0(double x) {
    // series expansion, converges quickly for the beta range used here
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 50; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

std::vector<double> design_polyphase(int p, int q, int& half_width) {
    // Prototype lowpass at the upsampled rate f_up = p * f_in. The smaller
    // Nyquist band is 0.5/m cycles per upsampled sample; passband stays flat
    // to 0.875 of it and the stopband starts at 1.125, which keeps images and
    // aliases out of any signal confined to 0.875 * Nyquist.
    const int m = std::max(p, q);
    const double cutoff = 0.5 / double(m);           // cycles per upsampled sample
    const double transition = 0.125 / double(m);
    const double beta = 10.0;
    int taps = int(std::ceil(8.0 / transition));
    taps = ((taps / (2 * p)) + 1) * 2 * p + 1;       // odd, multiple-of-p half widths
    half_width = taps / 2;
    std::vector<double> h(taps);
    const double i0b = bessel_i0(beta);
    for (int i = 0; i < taps; ++i) {
        double t = i - half_width;
        double snc = (t == 0.0) ? 2.0 * cutoff
                                : std::sin(2.0 * std::numbers::pi * cutoff * t) /
                                      (std::numbers::pi * t);
        double w = 0.0;
        double frac = t / half_width;
        if (std::abs(frac) <= 1.0)
            w = bessel_i0(beta * std::sqrt(1.0 - frac * frac)) / i0b;
        h[i] = snc * w * p;  // gain p compensates zero stuffing
    }
    return h;
}

}  // namespace

ComplexFrame resample_rational(const ComplexFrame& frame, double target_rate) {
    int p = 0, q = 0;
    rational_ratio(frame.sampling_rate, target_rate, 256, p, q);
    if (p == q) {
        ComplexFrame out = frame;
        out.sampling_rate = target_rate;
        return out;
    }
    int half = 0;
    const std::vector<double> h = design_polyphase(p, q, half);
    const auto& x = frame.samples;
    const long n_in = long(x.size());
    const long n_out = (n_in * p) / q;
    ComplexFrame out;
    out.sampling_rate = target_rate;
    out.start_time = frame.start_time;
    out.samples.resize(n_out);
    for (long j = 0; j < n_out; ++j) {
        // output sample j sits at upsampled index j*q; convolve against the
        // zero-stuffed input where only multiples of p are populated
        const long up = j * q;
        const long t0 = up - half;
        long k = t0 % p;
        if (k < 0) k += p;
        long tap = (k == 0) ? 0 : p - k;  // first tap index hitting a real sample
        cplx acc = 0.0;
        for (long t = t0 + tap; t <= up + half; t += p) {
            const long src = t / p;
            if (src < 0 || src >= n_in) continue;
            acc += x[src] * h[t - t0];
        }
        out.samples[j] = acc;
    }
    return out;
}

GaussianSource::GaussianSource(uint64_t seed) {
    // splitmix64 expansion into xoshiro256++ state
    uint64_t z = seed;
    for (int i = 0; i < 4; ++i) {
        z += 0x9e3779b97f4a7c15ULL;
        uint64_t t = z;
        t = (t ^ (t >> 30)) * 0xbf58476d1ce4e5b9ULL;
        t = (t ^ (t >> 27)) * 0x94d049bb133111ebULL;
        s_[i] = t ^ (t >> 31);
    }
}

uint64_t GaussianSource::next_u64() {
    auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double GaussianSource::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double GaussianSource::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

cplx GaussianSource::next_complex() {
    const double inv_sqrt2 = 0.7071067811865476;
    double re = next();
    double im = next();
    return cplx(re * inv_sqrt2, im * inv_sqrt2);
}

}  // namespace ctc::dsp
