// dsp.hpp - FFT, rational resampling, noise generation
#pragma once

#include "ctcsim/types.hpp"

#include <cstdint>
#include <vector>

namespace ctc::dsp {

// In-place radix-2 FFT, scaled by 1/sqrt(N) in both directions so that
// Parseval holds symmetrically. N must be a power of two.
void fft(std::vector<cplx>& x, bool inverse);

// Convenience copies.
std::vector<cplx> fft_copy(const std::vector<cplx>& x, bool inverse);

double total_energy(const std::vector<cplx>& x);
double mean_power(const std::vector<cplx>& x);

// Reduce target/source to a rational p/q with p, q <= max_den.
// Throws ConfigError when no such reduction exists.
void rational_ratio(double source_rate, double target_rate, int max_den, int& p, int& q);

// Polyphase rational resampler (windowed-sinc prototype, Kaiser beta 10).
// Passband covers 0.875 of the smaller Nyquist band; identity ratio is a copy.
ComplexFrame resample_rational(const ComplexFrame& frame, double target_rate);

// Deterministic Gaussian source (xoshiro-free; mt19937_64 + Box-Muller on
// explicit 53-bit uniforms so streams are reproducible bit-for-bit).
class GaussianSource {
public:
    explicit GaussianSource(uint64_t seed);
    double next();         // standard normal
    cplx next_complex();   // CN(0,1): unit total variance
    double uniform();      // [0,1)
    uint64_t next_u64();

private:
    uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ctc::dsp
