#include "ctcsim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace ctc {

GridSpec GridSpec::make(double sampling_rate, int fft_size, double cyclic_prefix,
                        std::vector<int> used_bins, std::vector<int> pilot_bins,
                        double center_frequency, std::vector<int> cp_sample_pattern) {
    GridSpec g;
    g.sampling_rate = sampling_rate;
    g.fft_size = fft_size;
    g.subcarrier_spacing = sampling_rate / fft_size;
    g.used_bins = std::move(used_bins);
    g.pilot_bins = std::move(pilot_bins);
    std::sort(g.used_bins.begin(), g.used_bins.end());
    std::sort(g.pilot_bins.begin(), g.pilot_bins.end());
    g.fft_period = double(fft_size) / sampling_rate;
    g.cyclic_prefix = cyclic_prefix;
    g.symbol_duration = g.fft_period + cyclic_prefix;
    g.center_frequency = center_frequency;
    g.cp_sample_pattern = std::move(cp_sample_pattern);
    g.validate();
    return g;
}

void GridSpec::validate() const {
    if (sampling_rate <= 0 || fft_size <= 0) throw ConfigError("grid: bad rate/fft size");
    if (fft_size & (fft_size - 1)) throw ConfigError("grid: fft size must be a power of two");
    if (int(used_bins.size()) > fft_size) throw ConfigError("grid: too many used bins");
    if (used_bins.empty()) throw ConfigError("grid: no used bins");
    for (int p : pilot_bins)
        if (!std::binary_search(used_bins.begin(), used_bins.end(), p))
            throw ConfigError("grid: pilot bin not in used bins");
    for (int b : used_bins)
        if (b < -fft_size / 2 || b >= fft_size / 2) throw ConfigError("grid: bin out of range");
    if (cyclic_prefix < 0) throw ConfigError("grid: negative cyclic prefix");
    if (!cp_sample_pattern.empty()) {
        for (int c : cp_sample_pattern)
            if (c < 0) throw ConfigError("grid: negative cp sample count");
    }
}

int GridSpec::cp_samples(int symbol_index) const {
    if (cp_sample_pattern.empty()) return int(std::lround(cyclic_prefix * sampling_rate));
    return cp_sample_pattern[symbol_index % cp_sample_pattern.size()];
}

int GridSpec::symbol_samples(int symbol_index) const {
    return fft_size + cp_samples(symbol_index);
}

std::pair<double, double> GridSpec::occupied_band() const {
    const double w = occupied_bandwidth();
    return {center_frequency - w / 2.0, center_frequency + w / 2.0};
}

int GridSpec::bin_index(int bin) const {
    auto it = std::lower_bound(used_bins.begin(), used_bins.end(), bin);
    if (it == used_bins.end() || *it != bin) return -1;
    return int(it - used_bins.begin());
}

GridSpec wifi_80211n_20mhz(double center_frequency) {
    std::vector<int> used;
    for (int b = -28; b <= 28; ++b)
        if (b != 0) used.push_back(b);
    return GridSpec::make(20e6, 64, 0.8e-6, used, {-21, -7, 7, 21}, center_frequency);
}

GridSpec lte_20mhz(double center_frequency) {
    std::vector<int> used;
    for (int b = -600; b <= 600; ++b)
        if (b != 0) used.push_back(b);
    // 7 symbols per 0.5 ms slot; 1024 CP samples spread near-uniformly
    std::vector<int> cp = {147, 146, 146, 147, 146, 146, 146};
    const double cp_nominal = (1024.0 / 7.0) / 30.72e6;
    return GridSpec::make(30.72e6, 2048, cp_nominal, used, {}, center_frequency, cp);
}

GridSpec grid_preset(const std::string& name) {
    if (name == "wifi-80211n-20mhz") return wifi_80211n_20mhz();
    if (name == "lte-20mhz") return lte_20mhz();
    throw ConfigError("unknown grid preset: " + name);
}

GridSpec load_grid_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid config: " + path);
    nlohmann::json j;
    in >> j;
    if (j.contains("preset")) {
        GridSpec g = grid_preset(j["preset"].get<std::string>());
        if (j.contains("center_frequency")) {
            double cf = j["center_frequency"].get<double>();
            g = GridSpec::make(g.sampling_rate, g.fft_size, g.cyclic_prefix, g.used_bins,
                               g.pilot_bins, cf, g.cp_sample_pattern);
        }
        return g;
    }
    std::vector<int> used = j.at("used_bins").get<std::vector<int>>();
    std::vector<int> pilots;
    if (j.contains("pilot_bins")) pilots = j["pilot_bins"].get<std::vector<int>>();
    std::vector<int> cp_pattern;
    if (j.contains("cp_sample_pattern")) cp_pattern = j["cp_sample_pattern"].get<std::vector<int>>();
    return GridSpec::make(j.at("sampling_rate").get<double>(), j.at("fft_size").get<int>(),
                          j.at("cyclic_prefix").get<double>(), used, pilots,
                          j.value("center_frequency", 5.5e9), cp_pattern);
}

namespace {

struct DimSolution {
    int tx_count = 0;
    int rx_count = 0;
    double eps = 0.0;  // rx_extent - tx_extent
};

// One dimension of the CORB search: pick the smallest RX-aligned extent whose
// TX extent covers it up to eps_limit. The RX count is the nearest multiple of
// the RX quantum (clamped to rx_min); a surplus on the TX side is always
// admissible, a shortfall only within the limit.
std::optional<DimSolution> solve_dim(double q_tx, double q_rx, int rx_min, double eps_limit,
                                     int granularity, int bound) {
    std::optional<DimSolution> best;
    for (int k = granularity; k <= bound; k += granularity) {
        const double tx_extent = k * q_tx;
        int r = std::max<int>(rx_min, int(std::llround(tx_extent / q_rx)));
        const double eps = r * q_rx - tx_extent;
        if (eps > eps_limit) continue;
        DimSolution cand{k, r, eps};
        if (!best) {
            best = cand;
            continue;
        }
        const double ext_best = best->rx_count * q_rx;
        const double ext_cand = cand.rx_count * q_rx;
        if (ext_cand < ext_best - 1e-12 ||
            (std::abs(ext_cand - ext_best) <= 1e-12 &&
             (std::abs(cand.eps) < std::abs(best->eps) - 1e-12 ||
              (std::abs(std::abs(cand.eps) - std::abs(best->eps)) <= 1e-12 &&
               cand.tx_count < best->tx_count))))
            best = cand;
    }
    return best;
}

}  // namespace

Corb solve_corb(const GridSpec& tx, const GridSpec& rx, const CorbOptions& opts) {
    tx.validate();
    rx.validate();
    if (opts.eps_limit_f == 0.0 || opts.eps_limit_t == 0.0) {
        // zero is a valid (exact-multiple) limit; only negatives mean default
    }
    const double eps_f = opts.eps_limit_f >= 0.0
                             ? opts.eps_limit_f
                             : 0.05 * std::max(tx.subcarrier_spacing, rx.subcarrier_spacing);
    const double eps_t = opts.eps_limit_t >= 0.0
                             ? opts.eps_limit_t
                             : 0.05 * std::max(tx.symbol_duration, rx.symbol_duration);
    const int m_min = (opts.mode == CorbMode::Strict) ? 2 : 1;
    auto fdim = solve_dim(tx.subcarrier_spacing, rx.subcarrier_spacing, m_min, eps_f,
                          opts.tx_freq_granularity, opts.search_bound);
    auto tdim = solve_dim(tx.symbol_duration, rx.symbol_duration, 2, eps_t,
                          opts.tx_time_granularity, opts.search_bound);
    if (!fdim || !tdim)
        throw NoSolution("no CORB within residual limits for this grid pairing");
    Corb c;
    c.tx_subcarriers = fdim->tx_count;
    c.rx_subcarriers = fdim->rx_count;
    c.tx_symbols = tdim->tx_count;
    c.rx_symbols = tdim->rx_count;
    c.tx_subcarrier_spacing = tx.subcarrier_spacing;
    c.rx_subcarrier_spacing = rx.subcarrier_spacing;
    c.tx_symbol_duration = tx.symbol_duration;
    c.rx_symbol_duration = rx.symbol_duration;
    c.eps_f = fdim->eps;
    c.eps_t = tdim->eps;
    return c;
}

std::optional<Band> overlap_band(const GridSpec& tx, const GridSpec& rx) {
    const auto a = tx.occupied_band();
    const auto b = rx.occupied_band();
    const double lo = std::max(a.first, b.first);
    const double hi = std::min(a.second, b.second);
    if (lo >= hi) return std::nullopt;
    return Band{lo, hi};
}

double nyquist_ctc_rate(const Corb& corb, const Band& overlap, int power_levels) {
    if (power_levels < 2) throw ConfigError("need at least two power levels");
    const double bw = overlap.second - overlap.first;
    if (bw <= 0) throw ConfigError("empty overlap band");
    const double tiles = std::floor(bw / corb.width());
    return tiles * std::log2(double(power_levels)) / corb.duration();
}

int CtcGridLayout::bits_per_group() const {
    int b = 0;
    while ((1 << (b + 1)) <= group_size) ++b;
    return b;
}

void CtcGridLayout::validate() const {
    if (slot_duration <= 0 || num_subcarriers <= 0) throw ConfigError("layout: bad geometry");
    if (group_size < 2 || (group_size & (group_size - 1)))
        throw ConfigError("layout: group size must be a power of two >= 2");
    if (num_groups < 1 || num_groups * group_size > num_subcarriers)
        throw ConfigError("layout: groups exceed subcarriers");
}

double card_rate(const CtcGridLayout& layout) {
    layout.validate();
    return layout.bits_per_slot() / layout.slot_duration;
}

CtcGridLayout wifi_to_lte_layout() {
    CtcGridLayout l;
    l.slot_duration = 1e-3 / 7.0;  // two LTE symbols
    l.subcarrier_width = 312.5e3;
    l.num_subcarriers = 48;
    l.group_size = 16;
    l.num_groups = 3;
    return l;
}

CtcGridLayout lte_to_wifi_layout() {
    CtcGridLayout l = wifi_to_lte_layout();
    l.slot_duration = 0.5e-3;  // one LTE slot
    return l;
}

const std::vector<int>& ctc_wifi_bins() {
    static const std::vector<int> bins = [] {
        std::vector<int> v;
        for (int b = -27; b <= 27; ++b) {
            if (b >= -1 && b <= 1) continue;
            if (b == -21 || b == -7 || b == 7 || b == 21) continue;
            v.push_back(b);
        }
        return v;
    }();
    return bins;
}

}  // namespace ctc
