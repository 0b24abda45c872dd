#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cmf/dataset.hpp"

using namespace cmf;
namespace fs = std::filesystem;

namespace {

class TempDir {
  public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("cmf_ds_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path &path() const { return path_; }

  private:
    fs::path path_;
};

void write_text(const fs::path &p, const std::string &s) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    os << s;
}

void put_pgm(const fs::path &p, const IntMatrix &img, int maxval = 255) {
    fs::create_directories(p.parent_path());
    write_pgm(p, img, maxval);
}

IntMatrix constant_image(int h, int w, int v) { return IntMatrix::Constant(h, w, v); }

ImageSet balanced_set(int subjects, int per, int h = 4, int w = 3) {
    ImageSet s;
    for (int c = 0; c < subjects; ++c)
        for (int i = 0; i < per; ++i) s.add(constant_image(h, w, c * per + i), "s" + std::to_string(c + 1));
    return s;
}

} // namespace

TEST(Pgm, AsciiFixtureExactPixels) {
    TempDir d;
    write_text(d.path() / "a" / "1.pgm", "P2\n# fixture\n2 2\n255\n0 17\n128 255\n");
    auto set = load_pgm_dir(d.path());
    ASSERT_EQ(set.size(), 1u);
    EXPECT_EQ(set.labels[0], "a");
    IntMatrix expect(2, 2);
    expect << 0, 17, 128, 255;
    EXPECT_EQ(set.images[0], expect);
    EXPECT_EQ(set.maxval, 255);
}

TEST(Pgm, BinaryRoundTripIncludingSixteenBit) {
    TempDir d;
    IntMatrix img(3, 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) img(i, j) = 40 * i + 7 * j;
    write_pgm(d.path() / "x.pgm", img, 255);
    EXPECT_EQ(read_pgm(d.path() / "x.pgm").pixels, img);
    img(2, 4) = 60000;
    write_pgm(d.path() / "y.pgm", img, 65535);
    auto back = read_pgm(d.path() / "y.pgm");
    EXPECT_EQ(back.pixels, img);
    EXPECT_EQ(back.maxval, 65535);
    write_pgm(d.path() / "z.pgm", img, 65535, false);
    EXPECT_EQ(read_pgm(d.path() / "z.pgm").pixels, img);
}

TEST(Pgm, MalformedInputs) {
    TempDir d;
    write_text(d.path() / "bad_magic.pgm", "P6\n1 1\n255\n\x01");
    write_text(d.path() / "bad_header.pgm", "P5\nx 1\n255\n\x01");
    write_text(d.path() / "truncated.pgm", "P5\n2 2\n255\n\x01\x02");
    write_text(d.path() / "ascii_short.pgm", "P2\n2 2\n255\n1 2 3\n");
    write_text(d.path() / "over.pgm", "P2\n1 1\n10\n11\n");
    for (const char *f : {"bad_magic.pgm", "bad_header.pgm", "truncated.pgm", "ascii_short.pgm", "over.pgm"})
        EXPECT_THROW(read_pgm(d.path() / f), PgmError) << f;
}

TEST(LoadPgmDir, EmptyDirectoryIsAnError) {
    TempDir d;
    EXPECT_THROW(load_pgm_dir(d.path()), std::runtime_error);
    EXPECT_THROW(load_pgm_dir(d.path() / "missing"), std::runtime_error);
}

TEST(LoadPgmDir, OrlLayoutNaturalOrderAndLabels) {
    TempDir d;
    for (int s : {1, 2, 10})
        for (int n : {1, 2, 10})
            put_pgm(d.path() / ("s" + std::to_string(s)) / (std::to_string(n) + ".pgm"),
                      constant_image(4, 3, s * 10 + n % 10), 255);
    auto set = load_pgm_dir(d.path());
    ASSERT_EQ(set.size(), 9u);
    EXPECT_EQ(set.by_subject().size(), 3u);
    EXPECT_EQ(set.labels.front(), "s1");
    EXPECT_EQ(set.labels.back(), "s10");
    EXPECT_EQ(set.images[1](0, 0), 12); // s1/2.pgm comes before s1/10.pgm
    EXPECT_EQ(set.images[2](0, 0), 10);
}

TEST(LoadPgmDir, MixedSizesRejected) {
    TempDir d;
    put_pgm(d.path() / "s1" / "1.pgm", constant_image(4, 3, 1), 255);
    put_pgm(d.path() / "s1" / "2.pgm", constant_image(3, 4, 1), 255);
    EXPECT_THROW(load_pgm_dir(d.path()), PgmError);
}

TEST(LoadPgmDir, FilenamePrefixRule) {
    TempDir d;
    put_pgm(d.path() / "alice_01.pgm", constant_image(2, 2, 1), 255);
    put_pgm(d.path() / "bob-01.pgm", constant_image(2, 2, 2), 255);
    auto set = load_pgm_dir(d.path(), LabelRule::FilenamePrefix);
    EXPECT_EQ(set.labels, (std::vector<Label>{"alice", "bob"}));
}

TEST(LoadManifest, PathsAndLabels) {
    TempDir d;
    put_pgm(d.path() / "img" / "a.pgm", constant_image(2, 2, 5), 255);
    put_pgm(d.path() / "img" / "b.pgm", constant_image(2, 2, 6), 255);
    write_text(d.path() / "list.csv", "# comment\nimg/a.pgm,p7\n\nimg/b.pgm,p9\n");
    auto set = load_manifest(d.path() / "list.csv");
    EXPECT_EQ(set.labels, (std::vector<Label>{"p7", "p9"}));
    EXPECT_EQ(set.images[1](0, 0), 6);
    write_text(d.path() / "bad.csv", "img/a.pgm\n");
    EXPECT_THROW(load_manifest(d.path() / "bad.csv"), std::runtime_error);
}

TEST(Resize, IdentityAndConstant) {
    IntMatrix img(4, 5);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) img(i, j) = i * 5 + j;
    EXPECT_EQ(resize_bilinear(img, 4, 5), img);
    EXPECT_EQ(resize_bilinear(constant_image(7, 9, 42), 3, 11), constant_image(3, 11, 42));
}

TEST(Resize, RampMatchesHandInterpolation) {
    IntMatrix ramp(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) ramp(i, j) = 10 * i + j;
    IntMatrix small(2, 2);
    small << 0, 3, 30, 33; // corner-aligned grid samples the corners
    EXPECT_EQ(resize_bilinear(ramp, 2, 2), small);
    // 3x3: sample points at 0, 1.5, 3. (1.5, 1.5) averages 11, 12, 21, 22.
    IntMatrix mid(3, 3);
    mid << 0, 2, 3, 15, 17, 18, 30, 32, 33;
    EXPECT_EQ(resize_bilinear(ramp, 3, 3), mid);
}

TEST(Resize, StaysInRange) {
    Rng rng(1);
    IntMatrix img(112, 92);
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = static_cast<int>(rng.below(256));
    IntMatrix out = resize_bilinear(img, 28, 21);
    EXPECT_GE(out.minCoeff(), 0);
    EXPECT_LE(out.maxCoeff(), 255);
}

TEST(Occlude, EmptyAndFullPatch) {
    Rng rng(2);
    IntMatrix img = constant_image(10, 10, 9);
    EXPECT_EQ(occlude(img, 0, 0, rng), img);
    EXPECT_EQ(occlude(img, 10, 3, rng), constant_image(10, 10, 3));
    EXPECT_THROW(occlude(img, 11, 0, rng), std::invalid_argument);
}

TEST(Occlude, ChangesExactlyPatchSquaredPixels) {
    for (int patch : {15, 20, 25, 30, 35}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(seed);
            IntMatrix img = constant_image(112, 92, 100);
            IntMatrix out = occlude(img, patch, 0, rng);
            EXPECT_EQ((out.array() != img.array()).count(), patch * patch);
            // changed pixels form one contiguous square
            Eigen::Index r0 = 112, c0 = 92;
            for (Eigen::Index i = 0; i < 112; ++i)
                for (Eigen::Index j = 0; j < 92; ++j)
                    if (out(i, j) != 100) {
                        r0 = std::min(r0, i);
                        c0 = std::min(c0, j);
                    }
            EXPECT_EQ(out.block(r0, c0, patch, patch), IntMatrix::Zero(patch, patch));
        }
    }
}

TEST(Occlude, DeterministicGivenRngState) {
    Rng a(7), b(7);
    IntMatrix img = constant_image(112, 92, 50);
    EXPECT_EQ(occlude(img, 15, 0, a), occlude(img, 15, 0, b));
}

TEST(Split, CountsDisjointAndExhaustive) {
    ImageSet set = balanced_set(40, 10);
    Split s = split(set, 4, 123);
    EXPECT_EQ(s.train.size(), 160u);
    EXPECT_EQ(s.test.size(), 240u);
    std::set<std::size_t> all(s.train_index.begin(), s.train_index.end());
    for (auto i : s.test_index) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), 400u);
    for (const auto &[label, idx] : s.train.by_subject()) EXPECT_EQ(idx.size(), 4u) << label;
}

TEST(Split, LeaveOneOutAndDeterminism) {
    ImageSet set = balanced_set(5, 6);
    Split s = split(set, 5, 9);
    EXPECT_EQ(s.test.size(), 5u);
    for (const auto &[label, idx] : s.test.by_subject()) EXPECT_EQ(idx.size(), 1u);
    EXPECT_EQ(split(set, 3, 42).train_index, split(set, 3, 42).train_index);
    EXPECT_NE(split(set, 3, 42).train_index, split(set, 3, 43).train_index);
}

TEST(Split, TooFewImagesNamesSubject) {
    ImageSet set = balanced_set(3, 4);
    set.add(constant_image(4, 3, 0), "lonely");
    try {
        split(set, 1, 0);
        FAIL();
    } catch (const std::invalid_argument &e) {
        EXPECT_NE(std::string(e.what()).find("lonely"), std::string::npos);
    }
}

TEST(Vectorize, FlattensRowMajor) {
    ImageSet set;
    IntMatrix img(2, 2);
    img << 0, 255, 255, 0;
    set.add(img, "a");
    RealMatrix x = vectorize(set);
    ASSERT_EQ(x.rows(), 4);
    ASSERT_EQ(x.cols(), 1);
    EXPECT_EQ(x.col(0), (RealVector(4) << 0, 1, 1, 0).finished());
}

TEST(Vectorize, ShapeRangeAndUnflatten) {
    Rng rng(3);
    ImageSet set;
    for (int k = 0; k < 6; ++k) {
        IntMatrix img(7, 5);
        for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = static_cast<int>(rng.below(256));
        set.add(img, "s");
    }
    RealMatrix x = vectorize(set);
    EXPECT_EQ(x.cols(), 6);
    EXPECT_EQ(x.rows(), 35);
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_LE(x.maxCoeff(), 1.0);
    for (int k = 0; k < 6; ++k) EXPECT_EQ(unflatten(x.col(k), 7, 5, 255), set.images[static_cast<std::size_t>(k)]);
}

TEST(SynthLowRank, RankAndDeterminism) {
    auto s = synth_lowrank(12, 15, 4, 1);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(s.Z));
    auto sv = svd.singularValues();
    EXPECT_GT(sv(3), 1e-3 * sv(0));
    EXPECT_LT(sv(4), 1e-12 * sv(0));
    EXPECT_EQ(synth_lowrank(12, 15, 4, 1).Z, s.Z);
    EXPECT_NE(synth_lowrank(12, 15, 4, 2).Z, s.Z);
}

TEST(SynthLowRank, RankOneColumnsAreMultiplesOfW0) {
    auto s = synth_lowrank(6, 9, 1, 5);
    for (Eigen::Index j = 0; j < 9; ++j) {
        Complex c = s.Z(0, j) / s.W0(0, 0);
        EXPECT_LE((s.Z.col(j) - c * s.W0.col(0)).norm(), 1e-12);
    }
}

TEST(SynthBlobFaces, ShapeAndLabels) {
    BlobFaceParams p;
    p.classes = 3;
    p.per_class = 4;
    auto set = synth_blob_faces(p, 1);
    EXPECT_EQ(set.size(), 12u);
    EXPECT_EQ(set.height, 112);
    EXPECT_EQ(set.width, 92);
    EXPECT_EQ(set.by_subject().size(), 3u);
    EXPECT_EQ(synth_blob_faces(p, 1).images, set.images);
}
