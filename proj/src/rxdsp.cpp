#include "ctcsim/rxdsp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace ctc {

ResampledStream resample(const SpectralStream& stream, double window) {
    ResampledStream out;
    out.window = window;
    if (stream.vectors.empty()) return out;
    const size_t nbins = stream.vectors.front().powers.size();
    out.start_time = stream.vectors.front().timestamp;
    const double t_last = stream.vectors.back().timestamp;
    const int num_windows = int(std::floor((t_last - out.start_time) / window)) + 1;
    out.rows.reserve(num_windows);
    size_t idx = 0;
    std::vector<double> prev(nbins, 0.0);
    bool have_prev = false;
    for (int w = 0; w < num_windows; ++w) {
        const double end = out.start_time + (w + 1) * window;
        std::vector<double> acc(nbins, 0.0);
        int count = 0;
        while (idx < stream.vectors.size() && stream.vectors[idx].timestamp < end - 1e-12) {
            const auto& v = stream.vectors[idx].powers;
            for (size_t i = 0; i < nbins; ++i) acc[i] += v[i];
            ++count;
            ++idx;
        }
        if (count > 0) {
            for (auto& a : acc) a /= count;
            prev = acc;
            have_prev = true;
            out.rows.push_back(std::move(acc));
        } else {
            ++out.gap_fill_count;
            if (!have_prev) ++out.leading_gap_windows;
            out.rows.push_back(prev);  // zeros when nothing seen yet
        }
        out.counts.push_back(count);
    }
    return out;
}

CtcBinMap make_wifi_rx_map(const GridSpec& wifi_grid) {
    CtcBinMap map;
    for (int bin : ctc_wifi_bins()) {
        const int idx = wifi_grid.bin_index(bin);
        if (idx < 0) throw ConfigError("wifi rx map: CTC bin not in grid");
        map.idx.push_back({idx});
    }
    return map;
}

CtcBinMap make_lte_rx_map(const LteGridConfig& lte, double halfwidth_hz) {
    CtcBinMap map;
    for (int bin : ctc_wifi_bins())
        map.idx.push_back(lte_bins_for_wifi_bin(lte, bin, halfwidth_hz));
    return map;
}

namespace {

std::vector<double> project_row(const std::vector<double>& row, const CtcBinMap& map) {
    std::vector<double> c(map.idx.size(), 0.0);
    for (size_t sc = 0; sc < map.idx.size(); ++sc) {
        double p = 0.0;
        for (int i : map.idx[sc]) p += row[i];
        c[sc] = p;
    }
    return c;
}

}  // namespace

CtcPowerSeries project_to_ctc_grid(const ResampledStream& stream, const CtcBinMap& map) {
    CtcPowerSeries out;
    out.window = stream.window;
    out.start_time = stream.start_time;
    out.counts = stream.counts;
    out.rows.reserve(stream.rows.size());
    for (const auto& row : stream.rows) out.rows.push_back(project_row(row, map));
    return out;
}

CtcPowerSeries project_to_ctc_grid(const ResampledStream& stream, const SpectralStream& scan,
                                   const CtcBinMap& map) {
    CtcPowerSeries out = project_to_ctc_grid(stream, map);
    out.snapshot_duration = scan.snapshot_duration;
    out.raw.reserve(scan.vectors.size());
    for (const auto& v : scan.vectors)
        out.raw.push_back({v.timestamp, project_row(v.powers, map)});
    return out;
}

PreambleTemplate make_preamble_template(const CtcGridLayout& layout, int windows_per_slot,
                                        double hole_weight) {
    PreambleTemplate t;
    t.windows_per_slot = windows_per_slot;
    const auto pre = preamble_holes(layout);
    for (int slot = 0; slot < kPreambleSlots; ++slot) {
        std::vector<double> row(layout.num_subcarriers, 1.0);
        for (int h : pre[slot]) row[h] = hole_weight * hole_weight;
        for (int w = 0; w < windows_per_slot; ++w) t.rows.push_back(row);
    }
    return t;
}

namespace {

constexpr double kTemplateFloorDb = -25.0;  // leakage bounds achievable dips
constexpr double kStreamFloorDb = -40.0;

// NCC between a patch and the template over non-stale rows only; repeat-fill
// rows copy old content and would smear the pattern in time.
double patch_ncc(const std::vector<std::vector<double>>& ldb, int r0,
                 const std::vector<std::vector<double>>& tdb,
                 const std::vector<char>& stale) {
    const int rows = int(tdb.size());
    const int cols = int(tdb[0].size());
    int used = 0;
    double pmean = 0.0, tmean = 0.0;
    for (int r = 0; r < rows; ++r) {
        if (stale[r0 + r]) continue;
        ++used;
        for (int c = 0; c < cols; ++c) {
            pmean += ldb[r0 + r][c];
            tmean += tdb[r][c];
        }
    }
    if (used * 2 < rows) return 0.0;  // too little real data under the template
    pmean /= used * cols;
    tmean /= used * cols;
    double dot = 0.0, pn = 0.0, tn = 0.0;
    for (int r = 0; r < rows; ++r) {
        if (stale[r0 + r]) continue;
        for (int c = 0; c < cols; ++c) {
            const double p = ldb[r0 + r][c] - pmean;
            const double t = tdb[r][c] - tmean;
            dot += p * t;
            pn += p * p;
            tn += t * t;
        }
    }
    if (pn <= 0.0 || tn <= 0.0) return 0.0;
    return dot / std::sqrt(pn * tn);
}

}  // namespace

SyncState detect_preamble(const CtcPowerSeries& series, const PreambleTemplate& templ,
                          double threshold) {
    SyncState s;
    const int rows = series.num_rows();
    const int trows = int(templ.rows.size());
    if (rows < trows || trows == 0) return s;
    const int cols = int(templ.rows[0].size());

    // log-domain, clamped
    std::vector<std::vector<double>> ldb(rows, std::vector<double>(cols));
    std::vector<char> stale(rows, 0);
    for (int r = 0; r < rows; ++r) {
        stale[r] = series.stale(r) ? 1 : 0;
        for (int c = 0; c < cols; ++c)
            ldb[r][c] = std::max(lin_to_db(std::max(series.rows[r][c], 1e-30)), kStreamFloorDb);
    }

    std::vector<std::vector<double>> tdb(trows, std::vector<double>(cols));
    for (int r = 0; r < trows; ++r)
        for (int c = 0; c < cols; ++c)
            tdb[r][c] = std::max(lin_to_db(std::max(templ.rows[r][c], 1e-30)), kTemplateFloorDb);

    std::vector<double> ncc(rows - trows + 1);
    for (int r = 0; r + trows <= rows; ++r) ncc[r] = patch_ncc(ldb, r, tdb, stale);

    // first local peak above threshold, with one template length of lookahead
    for (int r = 0; r < int(ncc.size()); ++r) {
        if (ncc[r] < threshold) continue;
        bool is_peak = true;
        for (int r2 = r + 1; r2 < std::min<int>(int(ncc.size()), r + trows); ++r2)
            if (ncc[r2] > ncc[r]) {
                is_peak = false;
                break;
            }
        if (is_peak) {
            s.detected = true;
            s.row = r;
            s.correlation_peak = ncc[r];
            return s;
        }
    }
    return s;
}

namespace {

// window rows belonging to slot interval [a, b): fully inside with a quarter
// window of tolerance at both edges
std::pair<int, int> slot_rows(const CtcPowerSeries& series, double a, double b) {
    const double w = series.window;
    int first = int(std::ceil((a - 0.25 * w - series.start_time) / w - 1e-9));
    int last = first;
    while (series.row_time(last) + w <= b + 0.25 * w + 1e-12) ++last;
    return {first, last};  // [first, last)
}

// Mean powers over the slot interval [a, b). With raw samples attached,
// snapshots whose integration span lies inside the slot are averaged
// directly. Otherwise interior window rows are used (boundary rows integrate
// neighboring content and cannot be unmixed), skipping repeat-filled windows,
// with overlap weighting as the last resort.
std::vector<double> slot_mean_powers(const CtcPowerSeries& series, double a, double b,
                                     bool& ok, int* rows_used = nullptr) {
    const double w = series.window;
    const int cols = series.rows.empty() ? 0 : int(series.rows[0].size());
    std::vector<double> acc(cols, 0.0);
    ok = false;
    if (rows_used) *rows_used = 0;
    if (cols == 0) return acc;
    if (!series.raw.empty()) {
        const double span = series.snapshot_duration;
        auto lo = std::lower_bound(series.raw.begin(), series.raw.end(), a,
                                   [](const CtcRawSample& s, double t) { return s.t < t; });
        int n = 0;
        for (auto it = lo; it != series.raw.end() && it->t + span <= b + 1e-12; ++it) {
            for (int c = 0; c < cols; ++c) acc[c] += it->p[c];
            ++n;
        }
        if (n > 0) {
            for (auto& v : acc) v /= double(n);
            ok = true;
            if (rows_used) *rows_used = n;
            return acc;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
    }
    auto [first, last] = slot_rows(series, a, b);
    if (first >= 0 && last <= series.num_rows() && last > first) {
        int n = 0;
        for (int r = first; r < last; ++r) {
            if (series.stale(r)) continue;
            for (int c = 0; c < cols; ++c) acc[c] += series.rows[r][c];
            ++n;
        }
        if (n > 0) {
            for (auto& v : acc) v /= double(n);
            ok = true;
            if (rows_used) *rows_used = n;
            return acc;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
    }
    // weighted fallback
    double wsum = 0.0;
    int r0 = std::max(0, int(std::floor((a - series.start_time) / w)));
    int n = 0;
    for (int r = r0; r < series.num_rows(); ++r) {
        const double tw = series.row_time(r);
        if (tw >= b) break;
        const double ov = std::min(b, tw + w) - std::max(a, tw);
        if (ov <= 0) continue;
        for (int c = 0; c < cols; ++c) acc[c] += ov * series.rows[r][c];
        wsum += ov;
        ++n;
    }
    if (wsum > 0) {
        for (auto& v : acc) v /= wsum;
        ok = true;
        if (rows_used) *rows_used = n;
    }
    return acc;
}

}  // namespace

std::vector<double> estimate_reference(const CtcPowerSeries& series, const SyncState& sync,
                                       const PreambleTemplate& templ, double hole_weight) {
    const int cols = int(templ.rows[0].size());
    const int wps = std::max(1, templ.windows_per_slot);
    const double slot_dur = wps * series.window;
    const double t0 = sync.start_time(series);
    std::vector<double> ref(cols, 0.0), cnt(cols, 0.0);
    for (int slot = 0; slot < kPreambleSlots; ++slot) {
        bool ok = false;
        const auto powers =
            slot_mean_powers(series, t0 + slot * slot_dur, t0 + (slot + 1) * slot_dur, ok);
        if (!ok) continue;
        const auto& trow = templ.rows[size_t(slot) * wps];
        for (int c = 0; c < cols; ++c) {
            const double w2 = trow[c];
            if (w2 >= 1.0) {
                ref[c] += powers[c];
                cnt[c] += 1.0;
            } else if (hole_weight > 0.05) {
                ref[c] += powers[c] / (hole_weight * hole_weight);
                cnt[c] += 1.0;
            }
        }
    }
    for (int c = 0; c < cols; ++c) ref[c] = cnt[c] > 0 ? ref[c] / cnt[c] : 0.0;
    return ref;
}

void refine_sync(const CtcPowerSeries& series, SyncState& sync, const CtcGridLayout& layout,
                 double true_slot_duration) {
    if (!sync.detected) return;
    const double w = series.window;
    const auto pre = preamble_holes(layout);
    const double t_row = series.row_time(sync.row);
    // stale-heavy streams can push the coarse detection a few rows off
    const int steps = 97;  // +-3 windows at w/16 resolution
    std::vector<double> deltas(steps), metrics(steps);
    // per-sample (or per-row) contrast sum: every clean observation inside
    // the hypothesized slot adds its own dip evidence, so offsets that cover
    // more of the preamble win and observations mixing adjacent slots add
    // nothing
    auto observation_contrast = [&](const std::vector<double>& p, int slot) {
        double clean = 0.0;
        int nc = 0;
        for (int c = 0; c < layout.num_subcarriers; ++c) {
            if (std::binary_search(pre[slot].begin(), pre[slot].end(), c)) continue;
            clean += p[c];
            ++nc;
        }
        clean = std::max(clean / std::max(nc, 1), 1e-30);
        double m = 0.0;
        for (int h : pre[slot]) m += std::log(clean / std::max(p[h], 1e-30));
        return m;
    };
    for (int k = 0; k < steps; ++k) {
        const double delta = -3.0 * w + 6.0 * w * double(k) / double(steps - 1);
        double metric = 0.0;
        for (int slot = 0; slot < kPreambleSlots; ++slot) {
            const double a = t_row + delta + slot * true_slot_duration;
            const double b = a + true_slot_duration;
            if (!series.raw.empty()) {
                const double span = series.snapshot_duration;
                auto lo = std::lower_bound(series.raw.begin(), series.raw.end(), a,
                                           [](const CtcRawSample& s, double t) { return s.t < t; });
                for (auto it = lo; it != series.raw.end() && it->t + span <= b + 1e-12; ++it)
                    metric += observation_contrast(it->p, slot);
            } else {
                auto [first, last] = slot_rows(series, a, b);
                if (first < 0 || last > series.num_rows()) continue;
                for (int r = first; r < last; ++r) {
                    if (series.stale(r)) continue;
                    metric += observation_contrast(series.rows[r], slot);
                }
            }
        }
        deltas[k] = delta;
        metrics[k] = metric;
    }
    // metric plateaus whenever the same pure rows are selected: take the
    // center of the plateau containing the maximum
    int arg = 0;
    for (int k = 1; k < steps; ++k)
        if (metrics[k] > metrics[arg]) arg = k;
    const double thr = metrics[arg] - std::max(0.02 * std::abs(metrics[arg]), 1e-9);
    int lo = arg, hi = arg;
    while (lo > 0 && metrics[lo - 1] >= thr) --lo;
    while (hi + 1 < steps && metrics[hi + 1] >= thr) ++hi;
    sync.time_offset = 0.5 * (deltas[lo] + deltas[hi]);
}

DemodResult demodulate_frame(const CtcPowerSeries& series, const SyncState& sync,
                             const CtcGridLayout& layout, SlotCorrection correction,
                             double true_slot_duration, double threshold_db) {
    DemodResult res;
    if (!sync.detected) return res;
    res.detected = true;
    const double w = series.window;
    const int wps_fixed = std::max(1, int(std::lround(layout.slot_duration / w)));
    const double t0 = sync.start_time(series);
    const int hslots = header_slots(layout);

    auto slot_powers = [&](int slot, bool& ok) -> std::vector<double> {
        if (correction == SlotCorrection::Periodic) {
            const double a = t0 + slot * true_slot_duration;
            const double b = a + true_slot_duration;
            if (b > series.row_time(series.num_rows()) + 0.25 * w) {
                ok = false;
                return {};
            }
            auto [f, l] = slot_rows(series, a, b);
            if (f >= 0 && l <= series.num_rows() && l > f)
                res.max_boundary_error =
                    std::max(res.max_boundary_error, std::abs(series.row_time(f) - a));
            return slot_mean_powers(series, a, b, ok);
        }
        const int first = sync.row + slot * wps_fixed;
        const int last = first + wps_fixed;
        if (first < 0 || last > series.num_rows() || last <= first) {
            ok = false;
            return {};
        }
        ok = true;
        std::vector<double> p(layout.num_subcarriers, 0.0);
        for (int r = first; r < last; ++r)
            for (int c = 0; c < layout.num_subcarriers; ++c) p[c] += series.rows[r][c];
        for (auto& v : p) v /= double(last - first);
        return p;
    };

    // header slots follow the two preamble slots
    Bits header_bits;
    double dip_sum = 0.0;
    int dip_n = 0;
    for (int h = 0; h < hslots; ++h) {
        bool ok = false;
        const auto powers = slot_powers(kPreambleSlots + h, ok);
        if (!ok) return res;
        const SlotDecision d = decode_slot(powers, sync.reference, layout, threshold_db);
        res.trace.push_back({kPreambleSlots + h, d});
        if (d.erased) return res;
        header_bits.insert(header_bits.end(), d.bits.begin(), d.bits.end());
        for (const auto& g : d.groups)
            if (g.accepted) {
                dip_sum += g.dip_db;
                ++dip_n;
            }
    }
    const unsigned length = bits_to_uint(header_bits, 0, 8);
    Bits len_bits(header_bits.begin(), header_bits.begin() + 8);
    if (crc4(len_bits) != uint8_t(bits_to_uint(header_bits, 8, 4))) return res;
    res.header_ok = true;
    res.payload_slots = int(length);

    Bits payload;
    for (unsigned s = 0; s < length; ++s) {
        bool ok = false;
        const auto powers = slot_powers(kPreambleSlots + hslots + int(s), ok);
        if (!ok) {
            res.erased_slots += int(length - s);
            return res;
        }
        const SlotDecision d = decode_slot(powers, sync.reference, layout, threshold_db);
        res.trace.push_back({kPreambleSlots + hslots + int(s), d});
        if (d.erased) ++res.erased_slots;
        payload.insert(payload.end(), d.bits.begin(), d.bits.end());
        for (const auto& g : d.groups)
            if (g.accepted) {
                dip_sum += g.dip_db;
                ++dip_n;
            }
    }
    res.mean_dip_db = dip_n ? dip_sum / dip_n : 0.0;
    if (payload.size() < 8) return res;
    Bits body(payload.begin(), payload.end() - 8);
    res.crc_ok = res.erased_slots == 0 &&
                 crc8(body) == uint8_t(bits_to_uint(payload, payload.size() - 8, 8));
    res.payload_bits = std::move(body);
    return res;
}

MrcResult mrc_combine(const std::vector<CtcPowerSeries>& copies,
                      const std::vector<SyncState>& syncs, const PreambleTemplate& templ,
                      double hole_weight) {
    if (copies.size() < 2 || copies.size() != syncs.size())
        throw ConfigError("mrc_combine: need at least two synced copies");
    const int cols = int(templ.rows[0].size());
    int rows = std::numeric_limits<int>::max();
    for (size_t i = 0; i < copies.size(); ++i) {
        if (!syncs[i].detected) throw ConfigError("mrc_combine: copy not synced");
        if (int(copies[i].rows.empty() ? 0 : copies[i].rows[0].size()) != cols)
            throw ConfigError("mrc_combine: width mismatch");
        rows = std::min(rows, copies[i].num_rows() - syncs[i].row);
    }
    if (rows <= 0) throw ConfigError("mrc_combine: misaligned copies");

    // per-copy SNR estimate: preamble dip cells act as the noise-floor
    // reference (the signal there is hole_weight^2 of the clean level)
    const double w2 = hole_weight * hole_weight;
    std::vector<double> weight(copies.size(), 0.0);
    double wsum = 0.0;
    for (size_t i = 0; i < copies.size(); ++i) {
        double clean = 0.0, dip = 0.0;
        int nc = 0, nd = 0;
        for (size_t r = 0; r < templ.rows.size(); ++r) {
            const int row = syncs[i].row + int(r);
            if (row >= copies[i].num_rows()) continue;
            for (int c = 0; c < cols; ++c) {
                const double v = copies[i].rows[row][c];
                if (templ.rows[r][c] >= 1.0) {
                    clean += v;
                    ++nc;
                } else {
                    dip += v;
                    ++nd;
                }
            }
        }
        if (nc > 0 && nd > 0) {
            clean /= nc;
            dip /= nd;
            const double noise = std::max((dip - w2 * clean) / std::max(1.0 - w2, 1e-6), 0.0);
            const double sig = std::max(clean - noise, 0.0);
            weight[i] = std::min(sig / std::max(noise, 1e-9 * clean + 1e-300), 1e9);
        }
        wsum += weight[i];
    }
    if (wsum <= 0.0) {
        std::fill(weight.begin(), weight.end(), 1.0);
        wsum = double(weight.size());
    }

    MrcResult out;
    out.series.window = copies[0].window;
    out.series.start_time = copies[0].row_time(syncs[0].row);
    out.series.rows.assign(rows, std::vector<double>(cols, 0.0));
    out.series.counts.assign(rows, 0);
    for (int r = 0; r < rows; ++r) {
        auto& dst = out.series.rows[r];
        double rw = 0.0;
        for (size_t i = 0; i < copies.size(); ++i) {
            const int src_row = syncs[i].row + r;
            if (copies[i].stale(src_row)) continue;
            const double w = weight[i] / wsum;
            if (w <= 0.0) continue;
            const auto& src = copies[i].rows[src_row];
            for (int c = 0; c < cols; ++c) dst[c] += w * src[c];
            rw += w;
            out.series.counts[r] += 1;
        }
        if (rw > 0)
            for (auto& v : dst) v /= rw;
    }
    out.sync.detected = true;
    out.sync.row = 0;
    out.sync.correlation_peak = 1.0;
    out.sync.reference = estimate_reference(out.series, out.sync, templ, hole_weight);
    return out;
}

DemodResult majority_vote(const std::vector<DemodResult>& copies,
                          const CtcGridLayout& layout) {
    DemodResult res;
    std::map<int, int> len_votes;
    for (const auto& c : copies)
        if (c.detected && c.header_ok) ++len_votes[c.payload_slots];
    if (len_votes.empty()) return res;
    res.detected = true;
    res.header_ok = true;
    int best_len = 0, best_votes = -1;
    for (auto [len, v] : len_votes)
        if (v > best_votes) {
            best_votes = v;
            best_len = len;
        }
    res.payload_slots = best_len;

    const int hslots = header_slots(layout);
    Bits payload;
    for (int s = 0; s < best_len; ++s) {
        const int slot_index = kPreambleSlots + hslots + s;
        Bits slot_bits;
        bool slot_ok = false;
        for (int g = 0; g < layout.num_groups; ++g) {
            std::map<int, std::pair<int, double>> votes;  // index -> (count, dip)
            for (const auto& c : copies) {
                if (!c.detected || !c.header_ok || c.payload_slots != best_len) continue;
                for (const auto& t : c.trace) {
                    if (t.slot != slot_index) continue;
                    const auto& gd = t.decision.groups[g];
                    if (!gd.accepted) continue;
                    auto& v = votes[gd.min_index];
                    v.first += 1;
                    v.second += gd.dip_db;
                }
            }
            if (votes.empty()) {
                ++res.erased_slots;
                Bits zero;
                uint_to_bits(0, layout.bits_per_group(), zero);
                slot_bits.insert(slot_bits.end(), zero.begin(), zero.end());
                continue;
            }
            int best_idx = -1;
            std::pair<int, double> best{-1, -1.0};
            for (auto& [idx, v] : votes)
                if (v.first > best.first || (v.first == best.first && v.second > best.second)) {
                    best = v;
                    best_idx = idx;
                }
            slot_ok = true;
            Bits b;
            uint_to_bits(unsigned(best_idx), layout.bits_per_group(), b);
            slot_bits.insert(slot_bits.end(), b.begin(), b.end());
        }
        (void)slot_ok;
        payload.insert(payload.end(), slot_bits.begin(), slot_bits.end());
    }
    if (payload.size() < 8) return res;
    Bits body(payload.begin(), payload.end() - 8);
    res.crc_ok = crc8(body) == uint8_t(bits_to_uint(payload, payload.size() - 8, 8));
    res.payload_bits = std::move(body);
    return res;
}

void dump_decoder_trace(const DemodResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write decoder trace: " + path);
    out << "# ctcsim decoder trace v1\nslot,group,min_index,dip_db,decision\n";
    for (const auto& t : result.trace)
        for (size_t g = 0; g < t.decision.groups.size(); ++g) {
            const auto& gd = t.decision.groups[g];
            out << t.slot << ',' << g << ',' << gd.min_index << ',' << gd.dip_db << ','
                << (gd.accepted ? "hole" : "erased") << "\n";
        }
}

}  // namespace ctc
