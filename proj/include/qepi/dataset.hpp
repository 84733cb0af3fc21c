// ZIP-code level spatiotemporal records: CSV parsing and serialization,
// KNN imputation of missing cells, min-max normalization, and a seeded
// synthetic generator with planted cluster structure.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qepi/clustering.hpp"
#include "qepi/common.hpp"
#include "qepi/geo.hpp"
#include "qepi/rng.hpp"

namespace qepi {

struct ZipRecord {
    std::string zip;
    int year = 0;
    std::optional<double> lat;
    std::optional<double> lon;
    std::optional<double> housing_instability;
    std::optional<double> stigma_index;
    std::optional<double> hiv_rate;
    std::optional<double> prep_rate;
};

enum class NormState { raw, normalized };

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;
};

inline constexpr int kMinYear = 1980;
inline constexpr int kMaxYear = 2100;

// Ordered, immutable-by-convention record collection. Record order is the
// point order every downstream index (distance matrix, labels) refers to.
struct Dataset {
    std::vector<ZipRecord> records;
    bool has_prep = false;
    NormState normalization_state = NormState::raw;
    std::vector<FeatureRange> feature_ranges;  // filled by minmax_normalize

    std::size_t size() const { return records.size(); }

    std::size_t num_features() const { return has_prep ? 4 : 3; }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> names = {"housing_instability", "stigma_index", "hiv_rate"};
        if (has_prep) names.push_back("prep_rate");
        return names;
    }

    const std::optional<double>& feature(std::size_t record, std::size_t f) const {
        return member(records[record], f);
    }

    std::optional<double>& feature(std::size_t record, std::size_t f) {
        return const_cast<std::optional<double>&>(member(records[record], f));
    }

    bool any_feature_missing() const {
        for (std::size_t r = 0; r < size(); ++r)
            for (std::size_t f = 0; f < num_features(); ++f)
                if (!feature(r, f)) return true;
        return false;
    }

  private:
    static const std::optional<double>& member(const ZipRecord& rec, std::size_t f) {
        switch (f) {
            case 0: return rec.housing_instability;
            case 1: return rec.stigma_index;
            case 2: return rec.hiv_rate;
            case 3: return rec.prep_rate;
            default: throw std::out_of_range("feature index");
        }
    }
};

namespace detail {

inline const std::string kHeaderBase = "zip,year,latitude,longitude,housing_instability,stigma_index,hiv_rate";
inline const std::string kHeaderPrep = kHeaderBase + ",prep_rate";

inline std::optional<double> parse_cell(std::string_view field, const std::string& context) {
    if (field.empty()) return std::nullopt;
    return parse_double(field, context);
}

}  // namespace detail

// Parses the documented CSV schema. Empty numeric cells become missing
// values; malformed rows are reported with their 1-based data row number.
inline Dataset parse_dataset(std::string_view text) {
    Dataset out;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            line = strip_cr(text.substr(pos));
            pos = text.size();
        } else {
            line = strip_cr(text.substr(pos, nl - pos));
            pos = nl + 1;
        }
        return true;
    };

    std::string_view header;
    if (!next_line(header)) throw std::runtime_error("empty input: missing CSV header");
    if (header == detail::kHeaderPrep) {
        out.has_prep = true;
    } else if (header == detail::kHeaderBase) {
        out.has_prep = false;
    } else {
        throw std::runtime_error("unrecognized CSV header: \"" + std::string(header) + "\"");
    }
    const std::size_t expected = out.has_prep ? 8 : 7;

    std::string_view line;
    std::size_t row = 0;
    while (next_line(line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_fields(line);
        const std::string ctx = "row " + std::to_string(row);
        if (fields.size() != expected) {
            throw std::runtime_error(ctx + ": expected " + std::to_string(expected) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        ZipRecord rec;
        rec.zip = std::string(fields[0]);
        if (rec.zip.empty()) throw std::runtime_error(ctx + ": empty zip identifier");
        long year = parse_long(fields[1], ctx + " (year)");
        if (year < kMinYear || year > kMaxYear) {
            throw std::runtime_error(ctx + ": year " + std::to_string(year) + " outside [" +
                                     std::to_string(kMinYear) + ", " + std::to_string(kMaxYear) + "]");
        }
        rec.year = static_cast<int>(year);
        rec.lat = detail::parse_cell(fields[2], ctx + " (latitude)");
        rec.lon = detail::parse_cell(fields[3], ctx + " (longitude)");
        if (rec.lat && !(*rec.lat >= -90.0 && *rec.lat <= 90.0))
            throw std::runtime_error(ctx + ": latitude " + fmt_double(*rec.lat) + " outside [-90, 90]");
        if (rec.lon && !(*rec.lon >= -180.0 && *rec.lon <= 180.0))
            throw std::runtime_error(ctx + ": longitude " + fmt_double(*rec.lon) + " outside [-180, 180]");
        rec.housing_instability = detail::parse_cell(fields[4], ctx + " (housing_instability)");
        rec.stigma_index = detail::parse_cell(fields[5], ctx + " (stigma_index)");
        rec.hiv_rate = detail::parse_cell(fields[6], ctx + " (hiv_rate)");
        if (out.has_prep) rec.prep_rate = detail::parse_cell(fields[7], ctx + " (prep_rate)");
        out.records.push_back(std::move(rec));
    }
    return out;
}

// Inverse of parse_dataset; missing cells serialize as empty fields and
// doubles use their shortest round-trip form, so parse/serialize round-trips
// exactly.
inline std::string serialize_dataset(const Dataset& data) {
    std::string out = data.has_prep ? detail::kHeaderPrep : detail::kHeaderBase;
    out += '\n';
    auto cell = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
    for (const auto& rec : data.records) {
        out += rec.zip;
        out += ',';
        out += std::to_string(rec.year);
        out += ',';
        out += cell(rec.lat);
        out += ',';
        out += cell(rec.lon);
        out += ',';
        out += cell(rec.housing_instability);
        out += ',';
        out += cell(rec.stigma_index);
        out += ',';
        out += cell(rec.hiv_rate);
        if (data.has_prep) {
            out += ',';
            out += cell(rec.prep_rate);
        }
        out += '\n';
    }
    return out;
}

struct ImputeResult {
    Dataset data;
    std::size_t dropped = 0;  // records removed as severely incomplete
};

// Fills each missing feature cell with the unweighted mean of that feature
// over the k nearest donor records. Distance is Euclidean over z-scored
// mutually-present features plus haversine-km/100 as one extra coordinate.
// Records missing coordinates or more than half their features are dropped
// first. Donor ties break toward the lower record index; imputed values are
// computed from the original present cells only, so the record order of the
// holes cannot change the result.
inline ImputeResult knn_impute(const Dataset& input, std::size_t k) {
    if (k < 1) throw std::invalid_argument("knn_impute: k must be >= 1");
    ImputeResult res;
    res.data.has_prep = input.has_prep;
    res.data.normalization_state = input.normalization_state;
    const std::size_t nf = input.num_features();

    for (std::size_t r = 0; r < input.size(); ++r) {
        const auto& rec = input.records[r];
        std::size_t holes = 0;
        for (std::size_t f = 0; f < nf; ++f)
            if (!input.feature(r, f)) ++holes;
        if (!rec.lat || !rec.lon || holes * 2 > nf) {
            ++res.dropped;
            continue;
        }
        res.data.records.push_back(rec);
    }

    Dataset& data = res.data;
    const std::size_t n = data.size();

    // z-scores over originally present cells; constant features contribute 0.
    std::vector<double> mean(nf, 0.0), sd(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        double sum = 0.0, sum2 = 0.0;
        std::size_t cnt = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (auto v = data.feature(r, f)) {
                sum += *v;
                sum2 += *v * *v;
                ++cnt;
            }
        }
        if (cnt > 0) {
            mean[f] = sum / static_cast<double>(cnt);
            double var = sum2 / static_cast<double>(cnt) - mean[f] * mean[f];
            sd[f] = var > 0.0 ? std::sqrt(var) : 0.0;
        }
    }
    auto zscore = [&](std::size_t r, std::size_t f) {
        double v = *data.feature(r, f);
        return sd[f] > 0.0 ? (v - mean[f]) / sd[f] : 0.0;
    };
    auto dist = [&](std::size_t a, std::size_t b) {
        double acc = 0.0;
        for (std::size_t f = 0; f < nf; ++f) {
            if (data.feature(a, f) && data.feature(b, f)) {
                double d = zscore(a, f) - zscore(b, f);
                acc += d * d;
            }
        }
        double geo = haversine_km(*data.records[a].lat, *data.records[a].lon, *data.records[b].lat,
                                  *data.records[b].lon) /
                     100.0;
        return std::sqrt(acc + geo * geo);
    };

    struct Hole {
        std::size_t record, feature;
        double value;
    };
    std::vector<Hole> holes;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t f = 0; f < nf; ++f) {
            if (data.feature(r, f)) continue;
            std::vector<std::pair<double, std::size_t>> donors;  // (distance, index)
            for (std::size_t j = 0; j < n; ++j) {
                if (j == r || !data.feature(j, f)) continue;
                donors.emplace_back(dist(r, j), j);
            }
            if (donors.size() < k) {
                throw std::runtime_error("knn_impute: feature " + data.feature_names()[f] + " has only " +
                                         std::to_string(donors.size()) + " donors, need " + std::to_string(k));
            }
            std::partial_sort(donors.begin(), donors.begin() + static_cast<std::ptrdiff_t>(k), donors.end());
            double sum = 0.0;
            for (std::size_t i = 0; i < k; ++i) sum += *data.feature(donors[i].second, f);
            holes.push_back({r, f, sum / static_cast<double>(k)});
        }
    }
    for (const auto& h : holes) data.feature(h.record, h.feature) = h.value;
    return res;
}

// Per-feature min-max scaling to [0, 1]; constant features map to 0.0 and
// the (min, max) pairs used are recorded on the dataset.
inline Dataset minmax_normalize(const Dataset& input) {
    if (input.normalization_state == NormState::normalized)
        throw std::invalid_argument("minmax_normalize: dataset is already normalized");
    if (input.any_feature_missing())
        throw std::invalid_argument("minmax_normalize: missing values present; impute first");
    Dataset out = input;
    const std::size_t nf = out.num_features();
    out.feature_ranges.assign(nf, {});
    for (std::size_t f = 0; f < nf; ++f) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < out.size(); ++r) {
            lo = std::min(lo, *out.feature(r, f));
            hi = std::max(hi, *out.feature(r, f));
        }
        if (out.size() == 0) lo = hi = 0.0;
        out.feature_ranges[f] = {lo, hi};
        for (std::size_t r = 0; r < out.size(); ++r) {
            auto& cell = out.feature(r, f);
            cell = hi > lo ? (*cell - lo) / (hi - lo) : 0.0;
        }
    }
    out.normalization_state = NormState::normalized;
    return out;
}

struct SynthConfig {
    std::size_t n_points = 100;  // distinct ZIP codes
    std::size_t k_planted = 2;
    int year_begin = 2022;
    int year_end = 2022;
    std::uint64_t seed = 0;
    double missing_fraction = 0.0;
    double noise_sd = 0.05;

    void validate() const {
        if (k_planted < 1 || n_points < k_planted)
            throw std::invalid_argument("SynthConfig: need n_points >= k_planted >= 1");
        if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
            throw std::invalid_argument("SynthConfig: missing_fraction must be in [0, 1)");
        if (year_begin > year_end || year_begin < kMinYear || year_end > kMaxYear)
            throw std::invalid_argument("SynthConfig: invalid year range");
        if (noise_sd < 0.0) throw std::invalid_argument("SynthConfig: noise_sd must be >= 0");
    }
};

struct SynthResult {
    Dataset data;                // raw (unnormalized), possibly with holes
    ClusterAssignment planted;   // blob id per record, aligned with record order
};

// Gaussian blobs in (lat, lon) with per-blob feature means and a logistic
// link from housing/stigma to the HIV rate; housing carries twice the
// weight of stigma. Multi-year ranges add a small per-blob linear drift.
// Fully determined by the seed.
inline SynthResult generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t k = cfg.k_planted;
    const std::size_t n = cfg.n_points;
    constexpr double kHivHousingWeight = 2.0;
    constexpr double kHivStigmaWeight = 1.0;

    struct Blob {
        double lat, lon, housing_mean, stigma_mean, hiv_offset, drift_h, drift_s;
    };
    std::vector<Blob> blobs(k);
    for (std::size_t c = 0; c < k; ++c) {
        double lat = 0.0, lon = 0.0;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            lat = rng.uniform(28.0, 46.0);
            lon = rng.uniform(-120.0, -75.0);
            bool ok = true;
            for (std::size_t o = 0; o < c; ++o) {
                if (haversine_km(lat, lon, blobs[o].lat, blobs[o].lon) < 300.0) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
        }
        // the offset spread stays well under the housing effect so the
        // planted feature->rate link dominates blob-level shifts
        blobs[c] = {lat,
                    lon,
                    rng.uniform(0.25, 0.75),
                    rng.uniform(0.25, 0.75),
                    rng.uniform(-1.75, -1.25),
                    rng.uniform(-0.02, 0.02),
                    rng.uniform(-0.02, 0.02)};
    }

    struct Site {
        std::string zip;
        std::size_t blob;
        double lat, lon;
    };
    std::vector<Site> sites(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = i % k;
        sites[i] = {std::to_string(10001 + i), c, blobs[c].lat + cfg.noise_sd * rng.normal(),
                    blobs[c].lon + cfg.noise_sd * rng.normal()};
        sites[i].lat = std::clamp(sites[i].lat, -90.0, 90.0);
        sites[i].lon = std::clamp(sites[i].lon, -180.0, 180.0);
    }

    SynthResult res;
    res.data.has_prep = true;
    for (int year = cfg.year_begin; year <= cfg.year_end; ++year) {
        double dt = static_cast<double>(year - cfg.year_begin);
        for (std::size_t i = 0; i < n; ++i) {
            const Blob& b = blobs[sites[i].blob];
            ZipRecord rec;
            rec.zip = sites[i].zip;
            rec.year = year;
            rec.lat = sites[i].lat;
            rec.lon = sites[i].lon;
            double housing = b.housing_mean + b.drift_h * dt + cfg.noise_sd * rng.normal();
            double stigma = b.stigma_mean + b.drift_s * dt + cfg.noise_sd * rng.normal();
            double hiv = logistic(kHivHousingWeight * housing + kHivStigmaWeight * stigma + b.hiv_offset +
                                  cfg.noise_sd * rng.normal());
            double prep = logistic(1.0 - stigma + cfg.noise_sd * rng.normal());
            rec.housing_instability = housing;
            rec.stigma_index = stigma;
            rec.hiv_rate = hiv;
            rec.prep_rate = prep;
            for (std::size_t f = 0; f < 4; ++f) {
                bool drop = rng.uniform() < cfg.missing_fraction;
                if (!drop) continue;
                switch (f) {
                    case 0: rec.housing_instability.reset(); break;
                    case 1: rec.stigma_index.reset(); break;
                    case 2: rec.hiv_rate.reset(); break;
                    case 3: rec.prep_rate.reset(); break;
                }
            }
            res.data.records.push_back(std::move(rec));
            res.planted.labels.push_back(static_cast<int>(sites[i].blob));
        }
    }
    return res;
}

}  // namespace qepi
