#include "fedvs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fedvs/errors.hpp"

namespace fedvs {

std::vector<std::size_t> partition_features(std::size_t d, int n_clients) {
    if (n_clients < 1 || d < static_cast<std::size_t>(n_clients)) {
        throw ValidationError("partition_features: need at least one feature per client");
    }
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n_clients), d / n_clients);
    for (std::size_t i = 0; i < d % n_clients; ++i) sizes[i] += 1;
    return sizes;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& col) {
    std::string v = raw;
    while (!v.empty() && (v.back() == '\r' || v.back() == ' ' || v.back() == '\t')) v.pop_back();
    std::size_t b = v.find_first_not_of(" \t");
    if (b != std::string::npos) v = v.substr(b);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw NonNumericFeature("row " + std::to_string(row) + ", column '" + col +
                                "': non-numeric value '" + raw + "'");
    }
    return out;
}

struct RawTable {
    std::vector<std::vector<double>> features; // row-major
    std::vector<double> labels;
    std::size_t d = 0;
};

/// Split, normalize on train stats, partition into client blocks.
PartitionedDataset finalize(RawTable table, int n_clients, double train_fraction,
                            bool classification, std::uint64_t seed, bool normalize) {
    const std::size_t m = table.labels.size();
    if (m < 2) throw ValidationError("dataset: need at least 2 samples");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng(seed).fork(0x5f11);
    for (std::size_t i = m; i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(order[i - 1], order[j]);
    }
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m)));
    n_train = std::clamp<std::size_t>(n_train, 1, m - 1);

    // Train-split min/max per feature; constant features normalize to 0.
    std::vector<double> lo(table.d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(table.d, -std::numeric_limits<double>::infinity());
    if (normalize) {
        for (std::size_t i = 0; i < n_train; ++i) {
            const auto& row = table.features[order[i]];
            for (std::size_t c = 0; c < table.d; ++c) {
                lo[c] = std::min(lo[c], row[c]);
                hi[c] = std::max(hi[c], row[c]);
            }
        }
    }
    auto scale = [&](double v, std::size_t c) {
        if (!normalize) return v;
        if (hi[c] <= lo[c]) return 0.0;
        double x = 2.0 * (v - lo[c]) / (hi[c] - lo[c]) - 1.0;
        return std::clamp(x, -1.0, 1.0);
    };

    // Classification labels become dense class ids in sorted value order.
    std::map<double, int> class_ids;
    if (classification) {
        for (double y : table.labels) class_ids.emplace(y, 0);
        int next = 0;
        for (auto& [value, id] : class_ids) id = next++;
        if (class_ids.size() < 2) throw ValidationError("dataset: fewer than 2 classes");
    }
    auto label_of = [&](std::size_t row) {
        double y = table.labels[row];
        return classification ? static_cast<double>(class_ids.at(y)) : y;
    };

    std::vector<std::size_t> sizes = partition_features(table.d, n_clients);
    PartitionedDataset out;
    out.partition_sizes = sizes;
    out.num_classes = classification ? static_cast<int>(class_ids.size()) : 0;
    out.train_features.reserve(sizes.size());
    out.test_features.reserve(sizes.size());
    const std::size_t n_test = m - n_train;
    std::size_t offset = 0;
    for (std::size_t block : sizes) {
        RealMatrix tr(n_train, block), te(n_test, block);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& row = table.features[order[i]];
            RealMatrix& dst = i < n_train ? tr : te;
            std::size_t r = i < n_train ? i : i - n_train;
            for (std::size_t c = 0; c < block; ++c) dst.at(r, c) = scale(row[offset + c], offset + c);
        }
        out.train_features.push_back(std::move(tr));
        out.test_features.push_back(std::move(te));
        offset += block;
    }
    out.train_labels.reserve(n_train);
    out.test_labels.reserve(n_test);
    for (std::size_t i = 0; i < m; ++i) {
        (i < n_train ? out.train_labels : out.test_labels).push_back(label_of(order[i]));
    }
    return out;
}

} // namespace

PartitionedDataset ingest_csv(const CsvSpec& spec) {
    std::ifstream f(spec.path);
    if (!f) throw MalformedRow("cannot open CSV file '" + spec.path + "'");
    std::string line;
    if (!std::getline(f, line)) throw MalformedRow("empty CSV file '" + spec.path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == spec.label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        throw MalformedRow("label column '" + spec.label_column + "' not found in header");
    }

    RawTable table;
    table.d = header.size() - 1;
    std::size_t row_no = 0;
    while (std::getline(f, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw MalformedRow("row " + std::to_string(row_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(table.d);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) continue;
            row.push_back(parse_cell(cells[c], row_no, header[c]));
        }
        table.labels.push_back(parse_cell(cells[label_idx], row_no, header[label_idx]));
        table.features.push_back(std::move(row));
    }
    return finalize(std::move(table), spec.n_clients, spec.train_fraction, spec.classification,
                    spec.seed, /*normalize=*/true);
}

PartitionedDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.classes < 2) throw ValidationError("synthetic: classes must be >= 2");
    if (spec.features < 1) throw ValidationError("synthetic: features must be >= 1");
    if (spec.samples < 2) throw ValidationError("synthetic: samples must be >= 2");

    const auto d = static_cast<std::size_t>(spec.features);
    const auto c = static_cast<std::size_t>(spec.classes);
    Rng rng = Rng(seed).fork(0xda7a);

    // Fixed random score directions, one per class, scaled to unit norm.
    std::vector<std::vector<double>> scores(c, std::vector<double>(d));
    for (auto& w : scores) {
        double norm = 0.0;
        for (double& e : w) {
            e = rng.uniform(-1.0, 1.0);
            norm += e * e;
        }
        norm = std::sqrt(norm);
        for (double& e : w) e /= norm > 0.0 ? norm : 1.0;
    }

    RawTable table;
    table.d = d;
    auto draw_sample = [&](std::vector<double>& x, int& label) {
        for (;;) {
            for (double& e : x) e = rng.uniform(-1.0, 1.0);
            double best = -std::numeric_limits<double>::infinity(), second = best;
            int arg = 0;
            for (std::size_t k = 0; k < c; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += scores[k][j] * x[j];
                if (s > best) {
                    second = best;
                    best = s;
                    arg = static_cast<int>(k);
                } else if (s > second) {
                    second = s;
                }
            }
            if (best - second >= spec.margin) {
                label = arg;
                return;
            }
        }
    };

    std::vector<double> x(d);
    int label = 0;
    for (int i = 0; i < spec.samples; ++i) {
        if (spec.balanced) {
            // Round-robin target class keeps counts within 1 of each other.
            int want = i % spec.classes;
            do {
                draw_sample(x, label);
            } while (label != want);
        } else {
            draw_sample(x, label);
        }
        table.features.push_back(x);
        table.labels.push_back(static_cast<double>(label));
    }
    // Entries are already in [-1, 1]; skip normalization so segments stay
    // exactly reproducible from the seed.
    return finalize(std::move(table), spec.n_clients, spec.train_fraction,
                    /*classification=*/true, seed, /*normalize=*/false);
}

} // namespace fedvs
