#include "ctcsim/waveform.hpp"

#include "ctcsim/dsp.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ctc {

ComplexFrame ofdm_modulate(const GridSpec& grid, const SymbolMatrix& symbols,
                           double start_time) {
    const size_t nbins = grid.used_bins.size();
    size_t total = 0;
    for (size_t s = 0; s < symbols.size(); ++s) total += grid.symbol_samples(int(s));
    ComplexFrame frame;
    frame.sampling_rate = grid.sampling_rate;
    frame.start_time = start_time;
    frame.samples.resize(total);
    std::vector<cplx> spec(grid.fft_size);
    size_t pos = 0;
    for (size_t s = 0; s < symbols.size(); ++s) {
        const auto& row = symbols[s];
        if (row.size() != nbins) throw ConfigError("ofdm_modulate: row width mismatch");
        std::fill(spec.begin(), spec.end(), cplx{0.0, 0.0});
        for (size_t i = 0; i < nbins; ++i) {
            int bin = grid.used_bins[i];
            int idx = bin >= 0 ? bin : bin + grid.fft_size;
            spec[idx] = row[i];
        }
        dsp::fft(spec, true);
        const int cp = grid.cp_samples(int(s));
        for (int i = 0; i < cp; ++i)
            frame.samples[pos + i] = spec[grid.fft_size - cp + i];
        for (int i = 0; i < grid.fft_size; ++i)
            frame.samples[pos + cp + i] = spec[i];
        pos += cp + grid.fft_size;
    }
    return frame;
}

SymbolMatrix ofdm_demodulate(const GridSpec& grid, const ComplexFrame& frame,
                             double symbol_offset, int max_symbols) {
    const size_t nbins = grid.used_bins.size();
    size_t pos = size_t(std::llround(symbol_offset * grid.sampling_rate));
    if (pos + size_t(grid.symbol_samples(0)) > frame.samples.size())
        throw ConfigError("ofdm_demodulate: not enough samples for one symbol");
    SymbolMatrix out;
    std::vector<cplx> work(grid.fft_size);
    int s = 0;
    while (max_symbols < 0 || s < max_symbols) {
        const int cp = grid.cp_samples(s);
        if (pos + size_t(cp + grid.fft_size) > frame.samples.size()) break;
        for (int i = 0; i < grid.fft_size; ++i) work[i] = frame.samples[pos + cp + i];
        dsp::fft(work, false);
        std::vector<cplx> row(nbins);
        for (size_t i = 0; i < nbins; ++i) {
            int bin = grid.used_bins[i];
            int idx = bin >= 0 ? bin : bin + grid.fft_size;
            row[i] = work[idx];
        }
        out.push_back(std::move(row));
        pos += cp + grid.fft_size;
        ++s;
    }
    return out;
}

SpectralStream psd_scan(const GridSpec& grid, const ComplexFrame& frame, int fft_points) {
    if (fft_points != grid.fft_size && fft_points != 4 * grid.fft_size)
        throw ConfigError("psd_scan: fft_points must be fft_size or 4*fft_size");
    SpectralStream stream;
    stream.bins = grid.used_bins;
    stream.bin_spacing = grid.subcarrier_spacing;
    stream.snapshot_duration = double(fft_points) / grid.sampling_rate;
    const size_t n = frame.samples.size();
    const int hop = grid.fft_size;
    std::vector<cplx> work(fft_points);
    const int ratio = fft_points / grid.fft_size;  // 1 or 4
    for (size_t pos = 0; pos + size_t(fft_points) <= n; pos += hop) {
        for (int i = 0; i < fft_points; ++i) work[i] = frame.samples[pos + i];
        dsp::fft(work, false);
        BinPowerVector v;
        v.timestamp = frame.start_time + double(pos) / grid.sampling_rate;
        v.powers.resize(grid.used_bins.size());
        for (size_t i = 0; i < grid.used_bins.size(); ++i) {
            const int bin = grid.used_bins[i];
            double p = 0.0;
            if (ratio == 1) {
                int idx = bin >= 0 ? bin : bin + fft_points;
                p = std::norm(work[idx]);
            } else {
                // fine bins whose centers fall inside the coarse bin's band
                for (int f = 4 * bin - 2; f <= 4 * bin + 1; ++f) {
                    int idx = f >= 0 ? f : f + fft_points;
                    p += std::norm(work[idx]);
                }
            }
            v.powers[i] = p / double(fft_points);
        }
        stream.vectors.push_back(std::move(v));
    }
    return stream;
}

void spectrogram_export(const SpectralStream& stream, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write spectrogram: " + path);
    out << "# ctcsim spectrogram v1\n";
    out << "time_us";
    for (int b : stream.bins) out << ",bin_" << b;
    out << "\n";
    const double floor_db = -120.0;
    for (const auto& v : stream.vectors) {
        out << v.timestamp * 1e6;
        for (double p : v.powers) {
            double db = p > 0 ? lin_to_db(p) : floor_db;
            if (db < floor_db) db = floor_db;
            out << ',' << db;
        }
        out << "\n";
    }
}

}  // namespace ctc
