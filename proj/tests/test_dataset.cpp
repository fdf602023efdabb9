#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "mvcp/dataset.hpp"
#include "mvcp/errors.hpp"
#include "mvcp/random.hpp"
#include "test_util.hpp"

using namespace mvcp;
using mvcp::testing::TempDir;
using mvcp::testing::write_file;

namespace {

void write_manifest(const TempDir& dir, const std::string& a_csv, const std::string& b_csv) {
    write_file(dir / "a.csv", a_csv);
    write_file(dir / "b.csv", b_csv);
    write_file(dir / "manifest.txt", "# two views\nview = \"a\", path = \"a.csv\"\n\nview = \"b\", path = \"b.csv\"\n");
}

}  // namespace

TEST_CASE("label space is sorted, unique and bijective") {
    LabelSpace ls({"walk", "run", "sit", "run"});
    REQUIRE(ls.size() == 3);
    CHECK(ls.names() == std::vector<std::string>{"run", "sit", "walk"});
    for (Label i = 0; i < ls.size(); ++i) CHECK(ls.index(ls.name(i)) == i);
    CHECK_THROWS_AS(ls.index("jump"), DataError);
}

TEST_CASE("load_multiview aligns identical id sets") {
    TempDir dir("ds_identity");
    write_manifest(dir, "id,label,f1,f2,f3\na,x,1,2,3\nb,y,4,5,6\nc,x,7,8,9\n",
                   "id,label,f1,f2,f3\nc,x,0.7,0.8,0.9\na,x,0.1,0.2,0.3\nb,y,0.4,0.5,0.6\n");
    const auto ds = load_multiview(dir / "manifest.txt");
    CHECK(ds.size() == 3);
    REQUIRE(ds.num_views() == 2);
    CHECK(ds.views[0].dim() == 3);
    CHECK(ds.views[1].dim() == 3);
    CHECK(ds.ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(ds.views[1].features(2, 0) == doctest::Approx(0.7));
    CHECK(ds.label_space.name(ds.labels[1]) == "y");
}

TEST_CASE("load_multiview keeps the id intersection") {
    TempDir dir("ds_intersect");
    write_manifest(dir, "id,label,f1\na,x,1\nb,y,2\nc,x,3\n", "id,label,f1\nb,y,20\nc,x,30\nd,y,40\n");
    const auto ds = load_multiview(dir / "manifest.txt");
    CHECK(ds.size() == 2);
    CHECK(ds.ids == std::vector<std::string>{"b", "c"});
}

TEST_CASE("load_multiview error paths") {
    TempDir dir("ds_errors");
    SUBCASE("missing file") {
        write_file(dir / "manifest.txt", "view = \"a\", path = \"nope.csv\"\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), DataError);
    }
    SUBCASE("conflicting labels") {
        write_manifest(dir, "id,label,f1\na,x,1\nb,y,2\n", "id,label,f1\na,y,1\nb,y,2\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), DataError);
    }
    SUBCASE("non-numeric cell") {
        write_manifest(dir, "id,label,f1\na,x,1\nb,y,abc\n", "id,label,f1\na,x,1\nb,y,2\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), DataError);
    }
    SUBCASE("non-finite cell") {
        write_manifest(dir, "id,label,f1\na,x,nan\nb,y,1\n", "id,label,f1\na,x,1\nb,y,2\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), DataError);
    }
    SUBCASE("empty intersection") {
        write_manifest(dir, "id,label,f1\na,x,1\n", "id,label,f1\nb,x,1\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), DataError);
    }
    SUBCASE("zero-width view") {
        write_manifest(dir, "id,label,f1\na,x,1\n", "id,label\na,x\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), DataError);
    }
    SUBCASE("duplicate ids") {
        write_manifest(dir, "id,label,f1\na,x,1\na,x,2\n", "id,label,f1\na,x,1\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), DataError);
    }
    SUBCASE("malformed manifest") {
        write_file(dir / "manifest.txt", "view = \"a\"\n");
        CHECK_THROWS_AS(load_multiview(dir / "manifest.txt"), ConfigError);
    }
}

TEST_CASE("row order on disk does not change the loaded dataset") {
    TempDir dir("ds_shuffle");
    std::vector<std::string> a_rows, b_rows;
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        const std::string id = "id" + std::to_string(i);
        const std::string label = "c" + std::to_string(i % 3);
        a_rows.push_back(id + "," + label + "," + std::to_string(i) + "," + std::to_string(rng.uniform()));
        b_rows.push_back(id + "," + label + "," + std::to_string(-i));
    }
    auto write_views = [&](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        std::string as = "id,label,f1,f2\n", bs = "id,label,f1\n";
        for (const auto& r : a) as += r + "\n";
        for (const auto& r : b) bs += r + "\n";
        write_manifest(dir, as, bs);
        return load_multiview(dir / "manifest.txt");
    };
    const auto reference = write_views(a_rows, b_rows);
    for (int rep = 0; rep < 5; ++rep) {
        rng.shuffle(a_rows.begin(), a_rows.end());
        rng.shuffle(b_rows.begin(), b_rows.end());
        CHECK(write_views(a_rows, b_rows) == reference);
    }
}

TEST_CASE("written datasets load back identically") {
    TempDir dir("ds_roundtrip");
    MultiViewDataset ds;
    ds.label_space = LabelSpace({"a", "b"});
    ds.ids = {"r0", "r1", "r2"};
    ds.labels = {0, 1, 0};
    ds.views.push_back({"left", Matrix(3, 2, {0.1, 1e-300, -3.5, 2.0 / 3.0, 7, 8})});
    ds.views.push_back({"right", Matrix(3, 1, {1, 2, 3})});
    write_multiview(ds, dir.path());
    CHECK(load_multiview(dir / "manifest.txt") == ds);
}

TEST_CASE("split sizes follow the rounding rule") {
    SplitSpec spec{0.5, 0.25, 0.25, 7};
    auto s = split_indices(100, spec);
    CHECK(s.train.size() == 50);
    CHECK(s.calib.size() == 25);
    CHECK(s.test.size() == 25);

    s = split_indices(101, spec);
    CHECK(s.train.size() == 51);
    CHECK(s.calib.size() == 25);
    CHECK(s.test.size() == 25);
}

TEST_CASE("splits partition 0..n-1 and are deterministic") {
    for (std::size_t n : {3u, 10u, 101u, 997u}) {
        for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
            SplitSpec spec{0.5, 0.25, 0.25, seed};
            const auto s = split_indices(n, spec);
            std::vector<std::size_t> all;
            all.insert(all.end(), s.train.begin(), s.train.end());
            all.insert(all.end(), s.calib.begin(), s.calib.end());
            all.insert(all.end(), s.test.begin(), s.test.end());
            std::sort(all.begin(), all.end());
            std::vector<std::size_t> expected(n);
            std::iota(expected.begin(), expected.end(), std::size_t{0});
            CHECK(all == expected);

            const auto again = split_indices(n, spec);
            CHECK(again.train == s.train);
            CHECK(again.calib == s.calib);
            CHECK(again.test == s.test);
        }
    }
    // A different seed gives a different partition.
    CHECK(split_indices(100, SplitSpec{0.5, 0.25, 0.25, 1}).test != split_indices(100, SplitSpec{0.5, 0.25, 0.25, 2}).test);
}

TEST_CASE("split error paths") {
    CHECK_THROWS_AS(split_indices(2, SplitSpec{}), DataError);
    CHECK_THROWS_AS(split_indices(100, SplitSpec{0.5, 0.3, 0.3, 1}), ConfigError);
    CHECK_THROWS_AS(split_indices(100, SplitSpec{1.0, 0.0, 0.0, 1}), ConfigError);
    // n=3 with 0.8/0.1/0.1 leaves calib and test empty
    CHECK_THROWS_AS(split_indices(3, SplitSpec{0.8, 0.1, 0.1, 1}), DataError);
}

TEST_CASE("stratified split keeps class proportions") {
    std::vector<Label> labels;
    for (int i = 0; i < 200; ++i) labels.push_back(i < 40 ? 0 : 1);
    SplitSpec spec{0.5, 0.25, 0.25, 3};
    spec.stratify = true;
    const auto s = split_indices(labels, spec);
    auto count0 = [&](const std::vector<std::size_t>& idx) {
        return std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return labels[i] == 0; });
    };
    CHECK(count0(s.train) == 20);
    CHECK(count0(s.calib) == 10);
    CHECK(count0(s.test) == 10);
    CHECK(s.train.size() + s.calib.size() + s.test.size() == 200);
}

TEST_CASE("split_dataset keeps rows aligned") {
    MultiViewDataset ds;
    ds.label_space = LabelSpace({"a", "b"});
    for (int i = 0; i < 20; ++i) {
        ds.ids.push_back("r" + std::to_string(i));
        ds.labels.push_back(i % 2);
    }
    Matrix m(20, 1);
    for (int i = 0; i < 20; ++i) m(i, 0) = i;
    ds.views.push_back({"v", m});
    const auto parts = split_dataset(ds, SplitSpec{0.5, 0.25, 0.25, 9});
    for (const auto* part : {&parts.train, &parts.calib, &parts.test})
        for (std::size_t i = 0; i < part->size(); ++i) {
            const int row = static_cast<int>(part->views[0].features(i, 0));
            CHECK(part->ids[i] == "r" + std::to_string(row));
            CHECK(part->labels[i] == static_cast<Label>(row % 2));
        }
}
