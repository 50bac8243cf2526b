// types.hpp - shared value types for the CTC baseband simulator
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctc {

using cplx = std::complex<double>;
using Bits = std::vector<uint8_t>;  // one bit per element, values 0/1

// Complex baseband sample block at a fixed sampling rate.
struct ComplexFrame {
    std::vector<cplx> samples;
    double sampling_rate = 0.0;  // Hz
    double start_time = 0.0;     // seconds

    size_t size() const { return samples.size(); }
    double duration() const { return samples.size() / sampling_rate; }
};

// One spectral-scan snapshot: linear power per used bin, bins ascending in frequency.
struct BinPowerVector {
    double timestamp = 0.0;  // seconds
    std::vector<double> powers;
};

// Timestamped sequence of scan snapshots as produced by a scanning receiver.
struct SpectralStream {
    std::vector<int> bins;  // used-bin indices relative to DC, ascending
    double bin_spacing = 0.0;
    double snapshot_duration = 0.0;  // time span each FFT snapshot integrates
    std::vector<BinPowerVector> vectors;

    size_t num_bins() const { return bins.size(); }
    bool empty() const { return vectors.empty(); }
};

struct NoSolution : std::runtime_error {
    explicit NoSolution(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    // splitmix64 step, used to derive independent per-trial seeds
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ctc
