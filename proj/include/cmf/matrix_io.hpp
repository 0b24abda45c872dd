#pragma once

// "cmfmat v1" text format:
//
//   cmfmat 1 <rows> <cols>
//   <re>:<im> <re>:<im> ...      (one line per row)
//
// Numbers are written with 17 significant digits, which round-trips every
// finite double exactly.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cmf/linalg.hpp"

namespace cmf {

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void append_double(std::string &out, double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t line) {
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError("cmfmat: bad number '" + std::string(s) + "' on line " +
                          std::to_string(line));
    return x;
}

} // namespace detail

inline void write_cmfmat(std::ostream &os, const ComplexMatrix &m) {
    if (!all_finite(m)) throw FormatError("cmfmat: refusing to write non-finite entries");
    os << "cmfmat 1 " << m.rows() << ' ' << m.cols() << '\n';
    std::string line;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) line.push_back(' ');
            detail::append_double(line, m(i, j).real());
            line.push_back(':');
            detail::append_double(line, m(i, j).imag());
        }
        line.push_back('\n');
        os << line;
    }
}

inline ComplexMatrix read_cmfmat(std::istream &is) {
    std::string header;
    if (!std::getline(is, header)) throw FormatError("cmfmat: empty input");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    long rows = -1, cols = -1;
    std::string extra;
    if (!(hs >> magic >> version >> rows >> cols) || magic != "cmfmat" || (hs >> extra))
        throw FormatError("cmfmat: malformed header '" + header + "'");
    if (version != 1)
        throw FormatError("cmfmat: unsupported version " + std::to_string(version));
    if (rows <= 0 || cols <= 0)
        throw FormatError("cmfmat: dimensions must be positive, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));

    ComplexMatrix m(rows, cols);
    std::string line;
    for (long i = 0; i < rows; ++i) {
        const std::size_t lineno = static_cast<std::size_t>(i) + 2;
        if (!std::getline(is, line))
            throw FormatError("cmfmat: expected " + std::to_string(rows) + " rows, got " +
                              std::to_string(i));
        std::string_view rest(line);
        for (long j = 0; j < cols; ++j) {
            std::size_t end = rest.find(' ');
            std::string_view tok = rest.substr(0, end);
            std::size_t colon = tok.find(':');
            if (tok.empty() || colon == std::string_view::npos)
                throw FormatError("cmfmat: expected " + std::to_string(cols) +
                                  " re:im entries on line " + std::to_string(lineno));
            double re = detail::parse_double(tok.substr(0, colon), lineno);
            double im = detail::parse_double(tok.substr(colon + 1), lineno);
            m(i, j) = Complex(re, im);
            rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end + 1);
        }
        if (!rest.empty())
            throw FormatError("cmfmat: trailing data on line " + std::to_string(lineno));
    }
    if (!all_finite(m)) throw FormatError("cmfmat: non-finite entry");
    return m;
}

inline void save_cmfmat(const std::filesystem::path &path, const ComplexMatrix &m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_cmfmat(os, m);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline ComplexMatrix load_cmfmat(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    try {
        return read_cmfmat(is);
    } catch (const FormatError &e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace cmf
