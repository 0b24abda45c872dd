#pragma once

// Labelled grayscale image collections: loading, resizing, occlusion,
// per-subject train/test splits, vectorization, and synthetic generators.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmf/linalg.hpp"
#include "cmf/pgm.hpp"
#include "cmf/label.hpp"
#include "cmf/rng.hpp"
#include "cmf/transform.hpp"

namespace cmf {

struct ImageSet {
    std::vector<IntMatrix> images;
    std::vector<Label> labels;
    int height = 0;
    int width = 0;
    int maxval = 255;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }

    void add(IntMatrix img, Label label) {
        if (images.empty() && height == 0) {
            height = static_cast<int>(img.rows());
            width = static_cast<int>(img.cols());
        }
        if (img.rows() != height || img.cols() != width)
            throw std::invalid_argument("image set: image " + shape_str(img) +
                                        " does not match " + std::to_string(height) + "x" +
                                        std::to_string(width));
        images.push_back(std::move(img));
        labels.push_back(std::move(label));
    }

    ImageSet subset(const std::vector<std::size_t> &idx) const {
        ImageSet out;
        out.height = height;
        out.width = width;
        out.maxval = maxval;
        for (std::size_t i : idx) out.add(images.at(i), labels.at(i));
        return out;
    }

    // Image indices grouped by label, labels in sorted order.
    std::map<Label, std::vector<std::size_t>> by_subject() const {
        std::map<Label, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
        return groups;
    }
};

enum class LabelRule {
    Subdirectory,   // <root>/<subject>/<n>.pgm, label = subject directory name
    FilenamePrefix, // label = file stem up to the first '_' or '-'
};

namespace detail {

// Orders "s2" before "s10" by comparing digit runs numerically.
inline bool natural_less(const std::string &a, const std::string &b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) &&
            std::isdigit(static_cast<unsigned char>(b[j]))) {
            std::size_t i2 = i, j2 = j;
            while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
            while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
            std::string na = a.substr(i, i2 - i), nb = b.substr(j, j2 - j);
            na.erase(0, std::min(na.find_first_not_of('0'), na.size()));
            nb.erase(0, std::min(nb.find_first_not_of('0'), nb.size()));
            if (na.size() != nb.size()) return na.size() < nb.size();
            if (na != nb) return na < nb;
            i = i2;
            j = j2;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

inline bool is_pgm(const std::filesystem::path &p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".pgm";
}

inline void add_pgm(ImageSet &set, const std::filesystem::path &file, Label label) {
    auto img = read_pgm(file);
    if (set.empty()) {
        set.maxval = img.maxval;
    } else if (img.maxval != set.maxval) {
        throw PgmError(file.string() + ": maxval " + std::to_string(img.maxval) +
                       " differs from " + std::to_string(set.maxval));
    }
    if (!set.empty() && (img.pixels.rows() != set.height || img.pixels.cols() != set.width))
        throw PgmError(file.string() + ": size " + shape_str(img.pixels) +
                       " differs from " + std::to_string(set.height) + "x" +
                       std::to_string(set.width));
    set.add(std::move(img.pixels), std::move(label));
}

} // namespace detail

inline ImageSet load_pgm_dir(const std::filesystem::path &root,
                             LabelRule rule = LabelRule::Subdirectory) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
    std::vector<std::string> rel;
    for (const auto &e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && detail::is_pgm(e.path()))
            rel.push_back(fs::relative(e.path(), root).generic_string());
    if (rel.empty()) throw std::runtime_error("no PGM files under " + root.string());
    std::sort(rel.begin(), rel.end(), detail::natural_less);

    ImageSet set;
    for (const auto &r : rel) {
        fs::path p(r);
        Label label;
        if (rule == LabelRule::Subdirectory) {
            label = p.parent_path().generic_string();
            if (label.empty())
                throw std::runtime_error(r + ": file is not inside a subject directory");
        } else {
            std::string stem = p.stem().string();
            label = stem.substr(0, stem.find_first_of("_-"));
        }
        detail::add_pgm(set, root / p, std::move(label));
    }
    return set;
}

// Manifest lines are "path,label"; relative paths resolve against the
// manifest's directory. Blank lines and lines starting with '#' are skipped.
inline ImageSet load_manifest(const std::filesystem::path &manifest) {
    std::ifstream is(manifest);
    if (!is) throw std::runtime_error("cannot open manifest " + manifest.string());
    ImageSet set;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.rfind(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size())
            throw std::runtime_error(manifest.string() + ":" + std::to_string(lineno) +
                                     ": expected 'path,label'");
        std::filesystem::path p = line.substr(0, comma);
        if (p.is_relative()) p = manifest.parent_path() / p;
        detail::add_pgm(set, p, line.substr(comma + 1));
    }
    if (set.empty()) throw std::runtime_error("manifest lists no images: " + manifest.string());
    return set;
}

// Bilinear interpolation on a corner-aligned grid: output corners sample the
// input corners exactly. Results are rounded to the nearest integer.
inline IntMatrix resize_bilinear(const IntMatrix &img, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize_bilinear: target size must be positive");
    const Eigen::Index h = img.rows(), w = img.cols();
    if (h == out_h && w == out_w) return img;
    const double sy = out_h > 1 ? static_cast<double>(h - 1) / (out_h - 1) : 0.0;
    const double sx = out_w > 1 ? static_cast<double>(w - 1) / (out_w - 1) : 0.0;
    IntMatrix out(out_h, out_w);
    for (int i = 0; i < out_h; ++i) {
        const double y = i * sy;
        const Eigen::Index y0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(y), h - 1);
        const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, h - 1);
        const double fy = y - y0;
        for (int j = 0; j < out_w; ++j) {
            const double x = j * sx;
            const Eigen::Index x0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), w - 1);
            const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, w - 1);
            const double fx = x - x0;
            const double top = (1 - fx) * img(y0, x0) + fx * img(y0, x1);
            const double bot = (1 - fx) * img(y1, x0) + fx * img(y1, x1);
            out(i, j) = static_cast<int>(std::lround((1 - fy) * top + fy * bot));
        }
    }
    return out;
}

inline ImageSet resize_all(const ImageSet &set, int out_h, int out_w) {
    ImageSet out;
    out.maxval = set.maxval;
    out.height = out_h;
    out.width = out_w;
    for (std::size_t i = 0; i < set.size(); ++i)
        out.add(resize_bilinear(set.images[i], out_h, out_w), set.labels[i]);
    return out;
}

inline IntMatrix occlude_at(const IntMatrix &img, int patch, int fill, Eigen::Index row,
                            Eigen::Index col) {
    IntMatrix out = img;
    if (patch > 0) out.block(row, col, patch, patch).setConstant(fill);
    return out;
}

// Overwrites a patch x patch square at a uniformly random position.
inline IntMatrix occlude(const IntMatrix &img, int patch, int fill, Rng &rng) {
    if (patch < 0) throw std::invalid_argument("occlude: negative patch size");
    if (patch == 0) return img;
    if (patch > img.rows() || patch > img.cols())
        throw std::invalid_argument("occlude: patch " + std::to_string(patch) +
                                    " larger than image " + shape_str(img));
    auto row = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(img.rows() - patch + 1)));
    auto col = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(img.cols() - patch + 1)));
    return occlude_at(img, patch, fill, row, col);
}

inline ImageSet occlude_all(const ImageSet &set, int patch, int fill, Rng &rng) {
    if (fill < 0 || fill > set.maxval)
        throw std::invalid_argument("occlude: fill value outside [0, maxval]");
    ImageSet out = set;
    for (auto &img : out.images) img = occlude(img, patch, fill, rng);
    return out;
}

struct Split {
    ImageSet train;
    ImageSet test;
    std::vector<std::size_t> train_index; // positions in the source set
    std::vector<std::size_t> test_index;
};

// Per subject, n_train images drawn uniformly without replacement go to the
// training side; the rest go to test. Both sides keep source order.
inline Split split(const ImageSet &set, int n_train, std::uint64_t seed) {
    if (n_train < 1) throw std::invalid_argument("split: n_train must be positive");
    Rng rng(seed);
    Split s;
    for (auto &[label, idx] : set.by_subject()) {
        if (idx.size() <= static_cast<std::size_t>(n_train))
            throw std::invalid_argument("split: subject '" + label + "' has " +
                                        std::to_string(idx.size()) +
                                        " images, need more than n_train = " +
                                        std::to_string(n_train));
        rng.shuffle(idx);
        s.train_index.insert(s.train_index.end(), idx.begin(), idx.begin() + n_train);
        s.test_index.insert(s.test_index.end(), idx.begin() + n_train, idx.end());
    }
    std::sort(s.train_index.begin(), s.train_index.end());
    std::sort(s.test_index.begin(), s.test_index.end());
    s.train = set.subset(s.train_index);
    s.test = set.subset(s.test_index);
    return s;
}

// Column j is image j flattened row-major and divided by maxval.
inline RealMatrix vectorize(const ImageSet &set) {
    const Eigen::Index n = static_cast<Eigen::Index>(set.height) * set.width;
    RealMatrix x(n, static_cast<Eigen::Index>(set.size()));
    for (std::size_t j = 0; j < set.size(); ++j) {
        IntMatrix flat = set.images[j];
        flat.resize(1, n);
        x.col(static_cast<Eigen::Index>(j)) = normalize_pixels(flat, set.maxval).transpose();
    }
    return x;
}

inline IntMatrix unflatten(const RealVector &column, int height, int width, int maxval) {
    if (column.size() != static_cast<Eigen::Index>(height) * width)
        throw DimensionError("unflatten: column length does not match image size");
    IntMatrix img(height, width);
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j)
            img(i, j) = static_cast<int>(std::lround(column(i * width + j) * maxval));
    return img;
}

struct LowRankSample {
    ComplexMatrix Z;
    ComplexMatrix W0;
    ComplexMatrix V0;
};

// Z = W0 V0 with entries of W0, V0 uniform on [-1, 1] + i[-1, 1].
inline LowRankSample synth_lowrank(int n, int m, int k, std::uint64_t seed) {
    if (k < 1 || k > std::min(n, m))
        throw std::invalid_argument("synth_lowrank: need 1 <= K <= min(N, M)");
    Rng rng(seed);
    LowRankSample s;
    s.W0 = random_complex(n, k, rng);
    s.V0 = random_complex(k, m, rng);
    s.Z = s.W0 * s.V0;
    return s;
}

inline double normal(Rng &rng) {
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct BlobFaceParams {
    int classes = 10;
    int per_class = 10;
    int height = 112;
    int width = 92;
    int maxval = 255;
    int blobs = 6;
    double background = 110.0;
    double amplitude = 70.0;   // blob peaks are +/- amplitude * U[0.5, 1]
    double sigma_min = 6.0;
    double sigma_max = 16.0;
    double jitter_px = 10.0;   // per-sample blob centre shift
    double amp_jitter = 0.4;   // relative amplitude variation per sample
    double noise_sd = 20.0;    // i.i.d. pixel noise
};

// Synthetic face-like set: each class is a fixed arrangement of Gaussian
// blobs on a flat background; samples perturb blob positions and amplitudes
// and add pixel noise. Labels are "c0", "c1", ...
inline ImageSet synth_blob_faces(const BlobFaceParams &p, std::uint64_t seed) {
    struct Blob {
        double cy, cx, sigma, amp;
    };
    Rng rng(seed);
    ImageSet set;
    set.maxval = p.maxval;
    for (int c = 0; c < p.classes; ++c) {
        std::vector<Blob> proto;
        for (int b = 0; b < p.blobs; ++b) {
            double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            proto.push_back({rng.uniform(0.1, 0.9) * p.height, rng.uniform(0.1, 0.9) * p.width,
                             rng.uniform(p.sigma_min, p.sigma_max),
                             sign * p.amplitude * rng.uniform(0.5, 1.0)});
        }
        for (int s = 0; s < p.per_class; ++s) {
            std::vector<Blob> blobs = proto;
            for (auto &b : blobs) {
                b.cy += rng.uniform(-p.jitter_px, p.jitter_px);
                b.cx += rng.uniform(-p.jitter_px, p.jitter_px);
                b.amp *= 1.0 + rng.uniform(-p.amp_jitter, p.amp_jitter);
            }
            IntMatrix img(p.height, p.width);
            for (int i = 0; i < p.height; ++i)
                for (int j = 0; j < p.width; ++j) {
                    double v = p.background;
                    for (const auto &b : blobs) {
                        double dy = i - b.cy, dx = j - b.cx;
                        v += b.amp * std::exp(-(dy * dy + dx * dx) / (2 * b.sigma * b.sigma));
                    }
                    v += p.noise_sd * normal(rng);
                    img(i, j) = static_cast<int>(
                        std::clamp(std::lround(v), 0L, static_cast<long>(p.maxval)));
                }
            set.add(std::move(img), "c" + std::to_string(c));
        }
    }
    return set;
}

} // namespace cmf
