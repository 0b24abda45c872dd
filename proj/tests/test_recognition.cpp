#include <gtest/gtest.h>

#include <cmath>

#include "cmf/dataset.hpp"
#include "cmf/recognition.hpp"
#include "test_util.hpp"

using namespace cmf;

namespace {

std::size_t brute_nearest(const std::vector<ComplexVector> &g, const ComplexVector &p) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double d = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            double dr = g[i](k).real() - p(k).real(), di = g[i](k).imag() - p(k).imag();
            d += dr * dr + di * di;
        }
        if (std::sqrt(d) < bd) {
            bd = std::sqrt(d);
            best = i;
        }
    }
    return best;
}

ComplexVector vec(std::initializer_list<Complex> xs) {
    ComplexVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (auto x : xs) v(i++) = x;
    return v;
}

} // namespace

TEST(Encode, IdentityBasis) {
    Rng rng(1);
    ComplexVector z = random_complex(4, 1, rng);
    EXPECT_LE((encode(ComplexMatrix::Identity(4, 4), z) - z).norm(), 1e-14);
}

TEST(Encode, RecoversBasisColumn) {
    Rng rng(2);
    ComplexMatrix w = random_complex(10, 4, rng);
    ComplexVector e1 = ComplexVector::Zero(4);
    e1(0) = 1.0;
    EXPECT_LE((encode(w, w * e1) - e1).norm(), 1e-10);
}

TEST(Encode, PerturbedReconstruction) {
    Rng rng(3);
    ComplexMatrix w = random_complex(20, 5, rng);
    ComplexVector v0 = random_complex(5, 1, rng);
    ComplexVector z = w * v0 + 1e-8 * ComplexVector(random_complex(20, 1, rng));
    EXPECT_LE((encode(w, z) - v0).norm(), 1e-6);
}

TEST(Encode, InvertsSynthesisForFullRank) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(s + 30);
        ComplexMatrix w = random_complex(12, 4, rng);
        ComplexVector v0 = random_complex(4, 1, rng);
        EXPECT_LE((encode(w, w * v0) - v0).norm(), 1e-10 * std::max(1.0, v0.norm()));
    }
}

TEST(Encode, RankDeficientNamesRank) {
    Rng rng(4);
    ComplexMatrix w = random_complex(6, 3, rng);
    w.col(2) = w.col(0) + w.col(1);
    try {
        Encoder enc(w);
        FAIL();
    } catch (const std::invalid_argument &e) {
        EXPECT_NE(std::string(e.what()).find("numerical rank 2"), std::string::npos);
    }
}

TEST(Classify, SingletonGallery) {
    Gallery g{{vec({1.0, 2.0})}, {"only"}};
    EXPECT_EQ(classify_1nn(g, vec({100.0, -5.0})), "only");
}

TEST(Classify, ExactMatchAndTies) {
    Gallery g{{vec({0.0, 0.0}), vec({1.0, 0.0}), vec({Complex(0, 1), 0.0})}, {"a", "b", "c"}};
    EXPECT_EQ(classify_1nn(g, vec({1.0, 0.0})), "b");
    // (0.5, 0) is equidistant from entries 0 and 1
    EXPECT_EQ(nearest_index(g, vec({0.5, 0.0})), 0u);
    EXPECT_THROW(classify_1nn(Gallery{}, vec({0.0})), std::invalid_argument);
}

TEST(Classify, HandPlacedMatchesBruteForce) {
    Gallery g{{vec({Complex(1, 1), 0.0}), vec({Complex(-1, 0), Complex(0, 2)}),
               vec({0.0, Complex(1, -1)})},
              {"x", "y", "z"}};
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        ComplexVector p = random_complex(2, 1, rng, -2.0, 2.0);
        EXPECT_EQ(nearest_index(g, p), brute_nearest(g.coefficients, p));
    }
}

TEST(Classify, UnitaryInvariance) {
    Rng rng(6);
    Gallery g;
    for (int i = 0; i < 15; ++i) {
        g.coefficients.push_back(random_complex(4, 1, rng));
        g.labels.push_back(std::to_string(i % 5));
    }
    // Q from a QR factorization is unitary
    Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(random_complex(4, 4, rng)).householderQ();
    Gallery rotated = g;
    for (auto &c : rotated.coefficients) c = q * c;
    for (int t = 0; t < 50; ++t) {
        ComplexVector p = random_complex(4, 1, rng);
        EXPECT_EQ(nearest_index(g, p), nearest_index(rotated, ComplexVector(q * p)));
    }
}

TEST(Evaluate, SelfMatchingIsPerfect) {
    Rng rng(7);
    FactorModel m;
    m.W = random_complex(30, 6, rng);
    ComplexMatrix data = random_complex(30, 12, rng);
    std::vector<Label> labels;
    for (int j = 0; j < 12; ++j) labels.push_back("s" + std::to_string(j));
    EXPECT_EQ(evaluate(m, data, labels, data, labels), 1.0);
}

TEST(Evaluate, PermutedLabelsAreAtChance) {
    // 40 balanced classes, labels assigned independently of the data
    Rng rng(8);
    const int classes = 40, per = 10;
    FactorModel m;
    m.W = random_complex(20, 8, rng);
    ComplexMatrix train = random_complex(20, classes * per, rng);
    ComplexMatrix test = random_complex(20, classes * per, rng);
    std::vector<Label> tl, sl;
    for (int i = 0; i < classes * per; ++i) tl.push_back(std::to_string(i % classes));
    sl = tl;
    rng.shuffle(tl);
    rng.shuffle(sl);
    double acc = evaluate(m, train, tl, test, sl);
    const double p = 1.0 / classes, n = classes * per;
    EXPECT_LE(std::abs(acc - p), 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Evaluate, LabelCountMismatch) {
    Rng rng(9);
    FactorModel m;
    m.W = random_complex(5, 2, rng);
    ComplexMatrix d = random_complex(5, 3, rng);
    EXPECT_THROW(evaluate(m, d, {"a", "b"}, d, {"a", "b", "c"}), std::invalid_argument);
}
