#include <gtest/gtest.h>

#include <sstream>

#include "cmf/matrix_io.hpp"

using namespace cmf;

TEST(Cmfmat, HeaderAndEntryLayout) {
    ComplexMatrix m(2, 2);
    m << Complex(1, -2), Complex(0.5, 0), Complex(-0.25, 3), Complex(0, 0);
    std::ostringstream os;
    write_cmfmat(os, m);
    EXPECT_EQ(os.str(), "cmfmat 1 2 2\n1:-2 0.5:0\n-0.25:3 0:0\n");
}

TEST(Cmfmat, RoundTripIsBitExact) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto rows = 1 + static_cast<Eigen::Index>(rng.below(6));
        const auto cols = 1 + static_cast<Eigen::Index>(rng.below(6));
        ComplexMatrix m = random_complex(rows, cols, rng, -1e6, 1e6);
        m(0, 0) = Complex(1.0 / 3.0, -std::ldexp(1.0, -1074)); // denormal
        m(rows - 1, cols - 1) = Complex(-0.0, 1e308);
        std::stringstream ss;
        write_cmfmat(ss, m);
        ComplexMatrix back = read_cmfmat(ss);
        ASSERT_EQ(back.rows(), rows);
        ASSERT_EQ(back.cols(), cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                EXPECT_EQ(std::memcmp(&back(i, j), &m(i, j), sizeof(Complex)), 0);
            }
    }
}

TEST(Cmfmat, RejectsMalformedInput) {
    auto parse = [](const std::string &s) {
        std::istringstream is(s);
        return read_cmfmat(is);
    };
    EXPECT_THROW(parse(""), FormatError);
    EXPECT_THROW(parse("cmfmat 2 1 1\n0:0\n"), FormatError);
    EXPECT_THROW(parse("matrix 1 1 1\n0:0\n"), FormatError);
    EXPECT_THROW(parse("cmfmat 1 0 1\n"), FormatError);
    EXPECT_THROW(parse("cmfmat 1 2 1\n0:0\n"), FormatError);     // missing row
    EXPECT_THROW(parse("cmfmat 1 1 2\n0:0\n"), FormatError);     // missing entry
    EXPECT_THROW(parse("cmfmat 1 1 1\n0:0 1:1\n"), FormatError); // trailing entry
    EXPECT_THROW(parse("cmfmat 1 1 1\n0\n"), FormatError);       // no colon
    EXPECT_THROW(parse("cmfmat 1 1 1\nx:0\n"), FormatError);
    EXPECT_THROW(parse("cmfmat 1 1 1\nnan:0\n"), FormatError);
}

TEST(Cmfmat, RefusesNonFiniteOnWrite) {
    ComplexMatrix m(1, 1);
    m(0, 0) = Complex(std::numeric_limits<double>::infinity(), 0);
    std::ostringstream os;
    EXPECT_THROW(write_cmfmat(os, m), FormatError);
}
