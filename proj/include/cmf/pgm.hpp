#pragma once

// Netpbm graymap reader/writer (P2 ASCII and P5 binary, maxval up to 65535).

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>
#include <string>

#include "cmf/linalg.hpp"

namespace cmf {

struct PgmImage {
    IntMatrix pixels;
    int maxval = 255;
};

class PgmError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void skip_pgm_space(std::istream &is) {
    for (;;) {
        int c = is.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(is, ignored);
        } else if (c != EOF && std::isspace(c)) {
            is.get();
        } else {
            return;
        }
    }
}

inline long read_pgm_int(std::istream &is, const char *what) {
    skip_pgm_space(is);
    long v = -1;
    if (!(is >> v) || v < 0) throw PgmError(std::string("pgm: malformed ") + what);
    return v;
}

} // namespace detail

inline PgmImage read_pgm(std::istream &is) {
    char magic[2] = {0, 0};
    if (!is.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
        throw PgmError("pgm: missing P2/P5 magic number");
    const bool binary = magic[1] == '5';
    const long width = detail::read_pgm_int(is, "width");
    const long height = detail::read_pgm_int(is, "height");
    const long maxval = detail::read_pgm_int(is, "maxval");
    if (width < 1 || height < 1) throw PgmError("pgm: dimensions must be positive");
    if (maxval < 1 || maxval > 65535) throw PgmError("pgm: maxval out of range");

    PgmImage img;
    img.maxval = static_cast<int>(maxval);
    img.pixels.resize(height, width);
    if (binary) {
        // exactly one whitespace byte separates the header from the raster
        if (!std::isspace(is.get())) throw PgmError("pgm: malformed header terminator");
        const int bytes = maxval < 256 ? 1 : 2;
        const std::size_t count = static_cast<std::size_t>(width * height * bytes);
        std::string raster(count, '\0');
        if (!is.read(raster.data(), static_cast<std::streamsize>(count)))
            throw PgmError("pgm: truncated raster (expected " + std::to_string(count) +
                           " bytes)");
        for (long i = 0; i < height; ++i)
            for (long j = 0; j < width; ++j) {
                std::size_t at = static_cast<std::size_t>((i * width + j) * bytes);
                int v = static_cast<unsigned char>(raster[at]);
                if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(raster[at + 1]);
                if (v > maxval) throw PgmError("pgm: pixel exceeds maxval");
                img.pixels(i, j) = v;
            }
    } else {
        for (long i = 0; i < height; ++i)
            for (long j = 0; j < width; ++j) {
                detail::skip_pgm_space(is);
                long v = -1;
                if (!(is >> v)) throw PgmError("pgm: truncated ASCII raster");
                if (v < 0 || v > maxval) throw PgmError("pgm: pixel exceeds maxval");
                img.pixels(i, j) = static_cast<int>(v);
            }
    }
    return img;
}

inline PgmImage read_pgm(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PgmError("cannot open " + path.string());
    try {
        return read_pgm(is);
    } catch (const PgmError &e) {
        throw PgmError(path.string() + ": " + e.what());
    }
}

inline void write_pgm(std::ostream &os, const IntMatrix &pixels, int maxval, bool binary = true) {
    if (maxval < 1 || maxval > 65535) throw PgmError("pgm: maxval out of range");
    os << (binary ? "P5" : "P2") << '\n'
       << pixels.cols() << ' ' << pixels.rows() << '\n'
       << maxval << '\n';
    for (Eigen::Index i = 0; i < pixels.rows(); ++i) {
        for (Eigen::Index j = 0; j < pixels.cols(); ++j) {
            int v = pixels(i, j);
            if (v < 0 || v > maxval) throw PgmError("pgm: pixel outside [0, maxval]");
            if (binary) {
                if (maxval >= 256) os.put(static_cast<char>(v >> 8));
                os.put(static_cast<char>(v & 0xff));
            } else {
                os << v << (j + 1 == pixels.cols() ? '\n' : ' ');
            }
        }
    }
}

inline void write_pgm(const std::filesystem::path &path, const IntMatrix &pixels, int maxval,
                      bool binary = true) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PgmError("cannot open " + path.string() + " for writing");
    write_pgm(os, pixels, maxval, binary);
}

} // namespace cmf
