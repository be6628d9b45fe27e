#include "hypergrad/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hypergrad {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    if (read_be32(img, images_path) != kImageMagic)
        throw std::runtime_error("idx: bad image magic in " + images_path);
    const std::int64_t n = read_be32(img, images_path);
    const std::int64_t rows = read_be32(img, images_path);
    const std::int64_t cols = read_be32(img, images_path);
    const std::int64_t d = rows * cols;
    if (n <= 0 || d <= 0) throw std::runtime_error("idx: empty image file " + images_path);

    std::vector<unsigned char> raw(static_cast<std::size_t>(n * d));
    img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (img.gcount() != static_cast<std::streamsize>(raw.size()))
        throw std::runtime_error("idx: truncated image data in " + images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);
    if (read_be32(lab, labels_path) != kLabelMagic)
        throw std::runtime_error("idx: bad label magic in " + labels_path);
    const std::int64_t nl = read_be32(lab, labels_path);
    if (nl != n)
        throw std::runtime_error("idx: image/label count mismatch (" + std::to_string(n) + " vs " +
                                 std::to_string(nl) + ")");
    std::vector<unsigned char> rawl(static_cast<std::size_t>(nl));
    lab.read(reinterpret_cast<char*>(rawl.data()), static_cast<std::streamsize>(rawl.size()));
    if (lab.gcount() != static_cast<std::streamsize>(rawl.size()))
        throw std::runtime_error("idx: truncated label data in " + labels_path);

    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.feature_scale = 1.0 / 255.0;
    ds.X.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) ds.X[i] = static_cast<double>(raw[i]) / 255.0;
    ds.y.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) ds.y[static_cast<std::size_t>(i)] = rawl[static_cast<std::size_t>(i)];
    return ds;
}

void write_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path) {
    // square-ish image geometry: rows x cols with rows*cols = d
    std::int64_t rows = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(ds.d))));
    while (rows > 1 && ds.d % rows != 0) --rows;
    const std::int64_t cols = ds.d / rows;

    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot write " + images_path);
    write_be32(img, kImageMagic);
    write_be32(img, static_cast<std::uint32_t>(ds.n));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    // features are expected in [0,1]; quantized to the byte grid
    for (double v : ds.X) {
        const long pixel = std::lround(v * 255.0);
        img.put(static_cast<char>(std::clamp(pixel, 0L, 255L)));
    }
    if (!img) throw std::runtime_error("idx: write failed for " + images_path);

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot write " + labels_path);
    write_be32(lab, kLabelMagic);
    write_be32(lab, static_cast<std::uint32_t>(ds.n));
    for (int y : ds.y) lab.put(static_cast<char>(y));
    if (!lab) throw std::runtime_error("idx: write failed for " + labels_path);
}

std::vector<int> binarize_odd_even(const std::vector<int>& labels) {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y > 9) throw std::invalid_argument("binarize_odd_even: label out of 0..9");
        out[i] = (y % 2 == 1) ? +1 : -1;
    }
    return out;
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, std::int64_t n_tr, std::int64_t n_val,
                                            std::uint64_t seed) {
    if (n_tr < 0 || n_val < 0 || n_tr + n_val > ds.n)
        throw std::invalid_argument("split_train_val: requested sizes exceed dataset rows");
    const auto perm = seeded_permutation(ds.n, {derive_stream(seed, 7), 0});

    auto take = [&](std::int64_t offset, std::int64_t count) {
        Dataset out;
        out.n = count;
        out.d = ds.d;
        out.feature_scale = ds.feature_scale;
        out.X.resize(static_cast<std::size_t>(count * ds.d));
        out.y.resize(static_cast<std::size_t>(count));
        for (std::int64_t i = 0; i < count; ++i) {
            const std::int64_t src = perm[static_cast<std::size_t>(offset + i)];
            std::copy_n(ds.X.data() + src * ds.d, ds.d, out.X.data() + i * ds.d);
            out.y[static_cast<std::size_t>(i)] = ds.y[static_cast<std::size_t>(src)];
        }
        return out;
    };
    return {take(0, n_tr), take(n_tr, n_val)};
}

MinibatchSampler::MinibatchSampler(std::int64_t n, std::int64_t b, SamplerMode mode, std::uint64_t seed)
    : n_(n), b_(b), mode_(mode), seed_(seed) {
    if (n <= 0) throw std::invalid_argument("minibatch_stream: n must be > 0");
    if (b < 1 || b > n) throw std::invalid_argument("minibatch_stream: require 1 <= b <= n");
}

std::vector<std::int64_t> MinibatchSampler::draw(const SampleKey& key) const {
    if (mode_ == SamplerMode::IidWithReplacement) {
        KeyedRng rng({key.stream_id ^ mix64(seed_), key.counter});
        std::vector<std::int64_t> idx(static_cast<std::size_t>(b_));
        for (auto& i : idx) i = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(n_)));
        return idx;
    }
    const std::int64_t per_epoch = (n_ + b_ - 1) / b_;
    const std::int64_t epoch = static_cast<std::int64_t>(key.counter) / per_epoch;
    const std::int64_t slot = static_cast<std::int64_t>(key.counter) % per_epoch;
    const auto perm = seeded_permutation(
        n_, {key.stream_id ^ mix64(seed_), mix64(static_cast<std::uint64_t>(epoch)) | 1ull});
    const std::int64_t lo = slot * b_;
    const std::int64_t hi = std::min(lo + b_, n_);
    return {perm.begin() + lo, perm.begin() + hi};
}

MinibatchSampler minibatch_stream(std::int64_t n, std::int64_t b, SamplerMode mode, std::uint64_t seed) {
    return {n, b, mode, seed};
}

Dataset load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("libsvm: cannot open " + path);
    std::vector<std::vector<std::pair<std::int64_t, double>>> rows;
    std::vector<int> labels;
    std::int64_t max_idx = 0;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        int label;
        try {
            std::size_t pos = 0;
            label = static_cast<int>(std::llround(std::stod(tok, &pos)));
            if (pos != tok.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw std::runtime_error("libsvm: bad label '" + tok + "' at line " + std::to_string(lineno));
        }
        std::vector<std::pair<std::int64_t, double>> feats;
        std::int64_t prev = 0;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("libsvm: malformed token '" + tok + "' at line " + std::to_string(lineno));
            std::int64_t idx;
            double val;
            try {
                std::size_t p1 = 0, p2 = 0;
                idx = std::stoll(tok.substr(0, colon), &p1);
                val = std::stod(tok.substr(colon + 1), &p2);
                if (p1 != colon || p2 != tok.size() - colon - 1) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw std::runtime_error("libsvm: malformed token '" + tok + "' at line " + std::to_string(lineno));
            }
            if (idx <= prev)
                throw std::runtime_error("libsvm: indices must be 1-based and increasing at line " +
                                         std::to_string(lineno));
            prev = idx;
            feats.emplace_back(idx, val);
        }
        max_idx = std::max(max_idx, prev);
        rows.push_back(std::move(feats));
        labels.push_back(label);
    }
    Dataset ds;
    ds.n = static_cast<std::int64_t>(rows.size());
    ds.d = max_idx;
    if (ds.n == 0) throw std::runtime_error("libsvm: no rows in " + path);
    if (ds.d == 0) ds.d = 1;  // all-empty feature lists still need a column
    ds.X.assign(static_cast<std::size_t>(ds.n * ds.d), 0.0);
    ds.y = std::move(labels);
    for (std::int64_t i = 0; i < ds.n; ++i)
        for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)])
            ds.X[static_cast<std::size_t>(i * ds.d + idx - 1)] = val;
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    Dataset ds;
    std::string line;
    std::int64_t lineno = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> fields;
        std::istringstream ls(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                fields.push_back(std::stod(cell, &pos));
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                if (pos != cell.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) break;
        }
        if (!numeric) {
            if (first_row) {  // header row
                first_row = false;
                continue;
            }
            throw std::runtime_error("csv: non-numeric value at line " + std::to_string(lineno));
        }
        first_row = false;
        if (fields.empty()) continue;
        if (ds.d == 0)
            ds.d = static_cast<std::int64_t>(fields.size()) - 1;
        else if (static_cast<std::int64_t>(fields.size()) - 1 != ds.d)
            throw std::runtime_error("csv: inconsistent column count at line " + std::to_string(lineno));
        if (ds.d <= 0) throw std::runtime_error("csv: rows need a label plus at least one feature");
        ds.y.push_back(static_cast<int>(std::llround(fields[0])));
        ds.X.insert(ds.X.end(), fields.begin() + 1, fields.end());
        ++ds.n;
    }
    if (ds.n == 0) throw std::runtime_error("csv: no rows in " + path);
    return ds;
}

void write_csv_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write " + path);
    char buf[40];
    for (std::int64_t i = 0; i < ds.n; ++i) {
        out << ds.y[static_cast<std::size_t>(i)];
        const auto row = ds.row(i);
        for (double v : row) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("csv: write failed for " + path);
}

}  // namespace hypergrad
