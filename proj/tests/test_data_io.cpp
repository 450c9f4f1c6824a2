#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "gs1mc/data_io.hpp"
#include "gs1mc/error.hpp"

using namespace gs1mc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(GS1MC_TEST_TMP) / "data_io" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string item_row(int id, int genre) {
  std::string row = std::to_string(id) + "|Title " + std::to_string(id) + "|01-Jan-1995||http://x";
  for (int g = 0; g < kGenreCount; ++g) row += g == genre ? "|1" : "|0";
  return row + "\n";
}

fs::path movielens_dir() {
  if (const char* env = std::getenv("GS1MC_ML100K")) return env;
  return GS1MC_DEFAULT_ML100K;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("data_io") {
  TEST_CASE("synthetic defaults and invariants") {
    SyntheticConfig cfg;
    const SyntheticData d = generate_synthetic(cfg);
    CHECK(d.ratings.n1() == 200);
    CHECK(d.ratings.n2() == 800);
    CHECK(d.groups.m1() == 10);
    CHECK(d.groups.m2() == 10);
    std::map<int, int> us, is;
    for (int v : d.groups.user_group()) ++us[v];
    for (int v : d.groups.item_group()) ++is[v];
    for (const auto& [g, n] : us) CHECK(n == 20);
    for (const auto& [g, n] : is) CHECK(n == 80);
    CHECK(d.M_true.cwiseAbs().maxCoeff() == 1.0);
    CHECK(std::abs(static_cast<double>(d.ratings.size()) - 0.25 * 200 * 800) <= 1.0);
    const Matrix M = assemble_M(d.truth, d.groups);
    CHECK((M - d.M_true).cwiseAbs().maxCoeff() < 1e-12);
    const SyntheticData again = generate_synthetic(cfg);
    CHECK(again.ratings == d.ratings);
    CHECK(again.M_true == d.M_true);
    SyntheticConfig other = cfg;
    other.seed = 2;
    CHECK(!(generate_synthetic(other).ratings == d.ratings));
  }

  TEST_CASE("synthetic configuration errors and binarization modes") {
    SyntheticConfig cfg;
    cfg.pi = 0.0;
    CHECK_THROWS_AS(generate_synthetic(cfg), InvalidArgument);
    cfg.pi = 1.2;
    CHECK_THROWS_AS(generate_synthetic(cfg), InvalidArgument);
    cfg = {};
    cfg.m1 = 7;
    CHECK_THROWS_AS(generate_synthetic(cfg), InvalidArgument);
    cfg = {};
    cfg.n1 = 20;
    cfg.n2 = 30;
    cfg.m1 = 2;
    cfg.m2 = 3;
    cfg.pi = 1.0;
    const auto thr = generate_synthetic(cfg);
    CHECK(thr.ratings.size() == 600);
    cfg.binarization = Binarization::bernoulli;
    const auto ber = generate_synthetic(cfg);
    CHECK(ber.M_true == thr.M_true);
    CHECK(ber.ratings.size() == 600);
    cfg.noise_sigma = 0.0;
    cfg.binarization = Binarization::threshold;
    const auto clean = generate_synthetic(cfg);
    for (const auto& e : clean.ratings.entries())
      CHECK(e.y == (sigmoid(clean.M_true(e.user, e.item)) >= 0.5 ? 1 : -1));
  }

  TEST_CASE("movielens layout parsing and errors") {
    const fs::path dir = scratch("ml");
    write_text(dir / "u.item", item_row(1, 3) + item_row(2, 0) + item_row(3, 18));
    write_text(dir / "u.data", "1\t1\t5\t100\n2\t3\t1\t101\n1\t2\t3\t102\n");
    const MovieLens ml = load_movielens(dir);
    CHECK(ml.records.size() == 3);
    CHECK(ml.n_users == 2);
    CHECK(ml.n_items == 3);
    CHECK(ml.genres.cols() == kGenreCount);
    CHECK(ml.genres(0, 3) == 1.0);
    CHECK(ml.genres.sum() == 3.0);
    CHECK(ml.records[1] == RatingRecord{2, 3, 1, 101});

    write_text(dir / "u.data", "1\t1\t5\t100\n2\tx\t1\t101\n");
    CHECK(message_of([&] { load_movielens(dir); }).find("u.data:2") != std::string::npos);
    write_text(dir / "u.data", "1\t9\t5\t100\n");
    CHECK_THROWS_AS(load_movielens(dir), DataError);
    write_text(dir / "u.data", "1\t1\t6\t100\n");
    CHECK_THROWS_AS(load_movielens(dir), DataError);
    write_text(dir / "u.data", "");
    CHECK(message_of([&] { load_movielens(dir); }).find("u.data") != std::string::npos);
    fs::remove(dir / "u.item");
    CHECK(message_of([&] { load_movielens(dir); }).find("u.item") != std::string::npos);
  }

  TEST_CASE("canonical MovieLens 100k") {
    const fs::path dir = movielens_dir();
    if (!fs::exists(dir / "u.data")) {
      MESSAGE("MovieLens 100k not found at " << dir.string() << "; run tools/fetch_ml100k.py");
      return;
    }
    const MovieLens ml = load_movielens(dir);
    CHECK(ml.records.size() == 100000);
    std::set<int> users, items;
    for (const auto& r : ml.records) {
      users.insert(r.user);
      items.insert(r.item);
    }
    CHECK(users.size() == 943);
    CHECK(items.size() == 1682);
    CHECK(ml.genres.cols() == 19);
    CHECK(((ml.genres.array() == 0.0) || (ml.genres.array() == 1.0)).all());

    // One-pass count straight from the file.
    std::ifstream in(dir / "u.data");
    long long sum = 0, n = 0;
    std::vector<int> ratings;
    int u, i, r;
    long long t;
    while (in >> u >> i >> r >> t) {
      sum += r;
      ++n;
      ratings.push_back(r);
    }
    const double mean = static_cast<double>(sum) / static_cast<double>(n);
    long long above = 0;
    for (int x : ratings) above += x > mean;
    const BinarizedRatings b = binarize_ratings(ml.records, ml.n_users, ml.n_items);
    long long pos = 0;
    for (const auto& e : b.ratings.entries()) pos += e.y == 1;
    CHECK(pos == above);
    CHECK(b.mean == doctest::Approx(mean).epsilon(1e-15));

    const auto [train, test] = split_observed(b.ratings, 0.95, 1);
    CHECK(std::llabs(static_cast<long long>(train.size()) - 95000) <= 1);
    CHECK(train.size() + test.size() == b.ratings.size());
  }

  TEST_CASE("binarization around the mean") {
    const auto b = binarize_ratings({{1, 1, 1, 0}, {1, 2, 5, 0}}, 1, 2);
    CHECK(b.mean == 3.0);
    REQUIRE(b.ratings.size() == 2);
    CHECK(b.ratings.entries()[0].y == -1);
    CHECK(b.ratings.entries()[1].y == 1);
    const auto flat = binarize_ratings({{1, 1, 4, 0}, {1, 2, 4, 0}}, 1, 2);
    CHECK(flat.ratings.empty());
    CHECK(flat.dropped == 2);
    CHECK_THROWS_AS(binarize_ratings({}, 1, 1), InvalidArgument);
  }

  TEST_CASE("splits partition the observed set") {
    const auto r = fixture::random_ratings(30, 40, 0.5, 3);
    const auto [a, b] = split_observed(r, 0.7, 11);
    CHECK(std::abs(static_cast<double>(a.size()) - 0.7 * static_cast<double>(r.size())) <= 1.0);
    std::set<std::pair<int, int>> sa, sb, all;
    for (const auto& e : a.entries()) sa.insert({e.user, e.item});
    for (const auto& e : b.entries()) sb.insert({e.user, e.item});
    for (const auto& e : r.entries()) all.insert({e.user, e.item});
    for (const auto& p : sa) CHECK(sb.count(p) == 0);
    std::set<std::pair<int, int>> uni = sa;
    uni.insert(sb.begin(), sb.end());
    CHECK(uni == all);
    const auto [a2, b2] = split_observed(r, 0.7, 11);
    CHECK(a2 == a);
    CHECK(b2 == b);
    CHECK_THROWS_AS(split_observed(r, 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(split_observed(r, 1.0, 1), InvalidArgument);
  }

  TEST_CASE("implicit-feedback grouping") {
    std::vector<Rating> e;
    const int counts[4] = {5, 1, 9, 3};
    for (int u = 0; u < 4; ++u)
      for (int i = 0; i < counts[u]; ++i) e.push_back({u, i, 1});
    const BinaryRatings r(4, 10, e);
    CHECK(group_by_implicit_feedback(r, 2, Side::user) == std::vector<int>{1, 0, 1, 0});
    CHECK(group_by_implicit_feedback(r, 1, Side::user) == std::vector<int>{0, 0, 0, 0});
    CHECK_THROWS_AS(group_by_implicit_feedback(r, 0, Side::user), InvalidArgument);
    CHECK_THROWS_AS(group_by_implicit_feedback(r, 5, Side::user), InvalidArgument);

    const auto big = fixture::random_ratings(53, 71, 0.3, 6);
    for (Side side : {Side::user, Side::item}) {
      const int n = side == Side::user ? 53 : 71;
      const auto g = group_by_implicit_feedback(big, 10, side);
      std::vector<int> size(10, 0), cnt(n, 0);
      for (int v : g) ++size[v];
      CHECK(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1);
      for (const auto& x : big.entries()) ++cnt[side == Side::user ? x.user : x.item];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (cnt[a] > cnt[b]) CHECK(g[a] >= g[b]);
    }
  }

  TEST_CASE("matrix files round-trip bitwise and reject bad headers") {
    const fs::path dir = scratch("matrix");
    std::mt19937_64 rng(3);
    Matrix M = oracle::gaussian(5, 3, rng);
    M(0, 0) = -0.0;
    M(1, 1) = 5e-324;
    M(2, 2) = 1.7976931348623157e308;
    save_matrix(dir / "m.bin", M);
    const Matrix back = load_matrix(dir / "m.bin");
    REQUIRE(back.rows() == 5);
    REQUIRE(back.cols() == 3);
    CHECK(std::memcmp(back.data(), M.data(), sizeof(double) * 15) == 0);
    CHECK(std::signbit(back(0, 0)));

    std::string bytes = slurp(dir / "m.bin");
    CHECK(bytes.substr(0, 4) == "GS1M");
    CHECK(bytes.size() == 16 + 8 * 15);
    std::string bad = bytes;
    bad[0] = 'X';
    write_text(dir / "bad.bin", bad);
    CHECK(message_of([&] { load_matrix(dir / "bad.bin"); }).find("magic") != std::string::npos);
    bad = bytes;
    bad[4] = 9;
    write_text(dir / "ver.bin", bad);
    CHECK(message_of([&] { load_matrix(dir / "ver.bin"); }).find("version") != std::string::npos);
    write_text(dir / "short.bin", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_matrix(dir / "short.bin"), DataError);
    write_text(dir / "tiny.bin", "GS1");
    CHECK_THROWS_AS(load_matrix(dir / "tiny.bin"), DataError);
    CHECK_FALSE(fs::exists(dir / "m.bin.tmp"));
  }

  TEST_CASE("labels, ratings, datasets and checkpoints round-trip") {
    const fs::path dir = scratch("roundtrip");
    const std::vector<int> labels{0, 3, 2, 2, 1};
    save_labels(dir / "l.csv", labels);
    CHECK(slurp(dir / "l.csv").rfind("id,group\n1,1\n2,4\n", 0) == 0);
    CHECK(load_labels(dir / "l.csv") == labels);

    const auto in = fixture::random_instance(6, 7, 2, 3, 2, 4);
    const auto r = fixture::random_ratings(6, 7, 0.5, 4);
    save_ratings(dir / "r.csv", r);
    CHECK(load_ratings(dir / "r.csv", 6, 7) == r);
    CHECK_THROWS_AS(load_ratings(dir / "r.csv", 2, 2), DataError);

    Dataset ds{r, "synthetic", assemble_M(in.f, in.g), in.g};
    save_dataset(dir / "ds", ds);
    const Dataset back = load_dataset(dir / "ds");
    CHECK(back.ratings == r);
    CHECK(back.kind == "synthetic");
    REQUIRE(back.M_true.has_value());
    CHECK(*back.M_true == *ds.M_true);
    REQUIRE(back.groups.has_value());
    CHECK(*back.groups == in.g);

    save_checkpoint(dir / "ck", {in.f, in.g, 37.0, 12345678901234ULL, 17});
    const Checkpoint ck = load_checkpoint(dir / "ck");
    CHECK(ck.factors == in.f);
    CHECK(ck.groups == in.g);
    CHECK(ck.lambda == 37.0);
    CHECK(ck.seed == 12345678901234ULL);
    CHECK(ck.iterations == 17);
    fs::remove(dir / "ck" / "TJ.bin");
    CHECK_THROWS_AS(load_checkpoint(dir / "ck"), DataError);
  }

  TEST_CASE("csv and key-value helpers") {
    const fs::path dir = scratch("csv");
    write_csv(dir / "t.csv", {{"a", "b"}, {{"1", "x"}, {"2", "y"}}});
    const CsvTable t = read_csv(dir / "t.csv");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows.size() == 2);
    write_text(dir / "ragged.csv", "a,b\n1\n");
    CHECK(message_of([&] { read_csv(dir / "ragged.csv"); }).find("row 2") != std::string::npos);
    write_text(dir / "empty.csv", "");
    CHECK(message_of([&] { read_csv(dir / "empty.csv"); }).find("empty.csv") != std::string::npos);
    write_text(dir / "kv.txt", "# note\nx=1\n\ny=a=b\n");
    const auto kv = read_key_values(dir / "kv.txt");
    REQUIRE(kv.size() == 2);
    CHECK(kv[1].second == "a=b");
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 37.0})
      CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(37.0) == "37");
  }
}
