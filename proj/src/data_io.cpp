#include "gs1mc/data_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "gs1mc/error.hpp"
#include "gs1mc/rng.hpp"

namespace gs1mc {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_f64(const std::string& in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

// --- synthetic -------------------------------------------------------------

void SyntheticConfig::validate() const {
  if (n1 < 1 || n2 < 1 || m1 < 1 || m2 < 1 || K < 1)
    throw InvalidArgument("synthetic dimensions must be positive");
  if (n1 % m1 != 0 || n2 % m2 != 0)
    throw InvalidArgument("group counts must divide the matrix dimensions evenly");
  if (!(pi > 0.0 && pi <= 1.0)) throw InvalidArgument("observation rate pi must lie in (0, 1]");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise sigma must be nonnegative");
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng latent = make_rng(cfg.seed, streams::synth_latent);
  std::normal_distribution<double> normal(0.0, 1.0);

  FactorSet f = FactorSet::zeros(cfg.n1, cfg.n2, cfg.m1, cfg.m2, cfg.K);
  for (Eigen::Index r = 0; r < f.P.rows(); ++r)
    for (Eigen::Index k = 0; k < cfg.K; ++k) f.P(r, k) = normal(latent);
  for (Eigen::Index r = 0; r < f.Q.rows(); ++r)
    for (Eigen::Index k = 0; k < cfg.K; ++k) f.Q(r, k) = normal(latent);
  for (int v = 0; v < cfg.m1; ++v)
    for (Eigen::Index k = 0; k < cfg.K; ++k)
      f.SU(v, k) = cfg.user_mean_base + cfg.user_mean_step * (v + 1) + normal(latent);
  for (int j = 0; j < cfg.m2; ++j)
    for (Eigen::Index k = 0; k < cfg.K; ++k)
      f.TJ(j, k) = cfg.item_mean_base + cfg.item_mean_step * (j + 1) + normal(latent);

  std::vector<int> ug(static_cast<std::size_t>(cfg.n1)), ig(static_cast<std::size_t>(cfg.n2));
  const int usize = cfg.n1 / cfg.m1, isize = cfg.n2 / cfg.m2;
  for (int u = 0; u < cfg.n1; ++u) ug[u] = u / usize;
  for (int i = 0; i < cfg.n2; ++i) ig[i] = i / isize;
  SyntheticData out;
  out.groups = GroupAssignment(std::move(ug), std::move(ig), cfg.m1, cfg.m2);

  Matrix M = assemble_M(f, out.groups);
  const double scale = M.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw NumericalError("synthetic latent matrix is identically zero");
  out.M_true = M / scale;
  const double root = 1.0 / std::sqrt(scale);
  for (Matrix* X : {&f.P, &f.Q, &f.SU, &f.TJ}) *X *= root;
  out.truth = std::move(f);

  // Labels for every entry in row-major order, then a uniform subset is kept.
  Rng noise = make_rng(cfg.seed, streams::synth_noise);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::int8_t> label(static_cast<std::size_t>(cfg.n1) * cfg.n2);
  for (int u = 0; u < cfg.n1; ++u)
    for (int i = 0; i < cfg.n2; ++i) {
      const double p = sigmoid(out.M_true(u, i));
      bool positive;
      if (cfg.binarization == Binarization::threshold) {
        const double noisy = std::clamp(p + cfg.noise_sigma * normal(noise), 0.0, 1.0);
        positive = noisy >= 0.5;
      } else {
        positive = unif(noise) < p;
      }
      label[static_cast<std::size_t>(u) * cfg.n2 + i] = positive ? 1 : -1;
    }

  const std::size_t total = label.size();
  const auto keep = static_cast<std::size_t>(std::llround(cfg.pi * static_cast<double>(total)));
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng mask = make_rng(cfg.seed, streams::synth_mask);
  for (std::size_t k = 0; k < keep; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, total - 1);
    std::swap(idx[k], idx[pick(mask)]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());

  std::vector<Rating> entries;
  entries.reserve(keep);
  for (std::size_t e : idx)
    entries.push_back({static_cast<int>(e / cfg.n2), static_cast<int>(e % cfg.n2), label[e]});
  out.ratings = BinaryRatings(cfg.n1, cfg.n2, std::move(entries));
  return out;
}

// --- MovieLens -------------------------------------------------------------

MovieLens load_movielens(const fs::path& dir) {
  const fs::path data_path = dir / "u.data";
  const fs::path item_path = dir / "u.item";
  if (!fs::exists(data_path)) throw DataError("missing ratings file " + data_path.string());
  if (!fs::exists(item_path)) throw DataError("missing item file " + item_path.string());

  MovieLens ml;
  {
    std::ifstream in(item_path, std::ios::binary);
    if (!in) throw DataError("cannot open " + item_path.string());
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      const auto fields = split(line, '|');
      int id = 0;
      if (fields.size() < 5 + kGenreCount || !parse_number(fields[0], id) || id < 1)
        throw DataError(item_path.string() + ":" + std::to_string(lineno) + ": malformed item row");
      if (id != static_cast<int>(rows.size()) + 1)
        throw DataError(item_path.string() + ":" + std::to_string(lineno) +
                        ": item ids must be consecutive from 1");
      std::vector<double> flags(kGenreCount);
      for (int g = 0; g < kGenreCount; ++g) {
        const auto& cell = fields[fields.size() - kGenreCount + g];
        int v = -1;
        if (!parse_number(cell, v) || (v != 0 && v != 1))
          throw DataError(item_path.string() + ":" + std::to_string(lineno) + ": genre flag not 0/1");
        flags[g] = v;
      }
      rows.push_back(std::move(flags));
    }
    if (rows.empty()) throw DataError("empty item file " + item_path.string());
    ml.n_items = static_cast<int>(rows.size());
    ml.genres.resize(ml.n_items, kGenreCount);
    for (int r = 0; r < ml.n_items; ++r)
      for (int g = 0; g < kGenreCount; ++g) ml.genres(r, g) = rows[r][g];
  }
  {
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw DataError("cannot open " + data_path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      const auto fields = split(line, '\t');
      RatingRecord rec{};
      if (fields.size() != 4 || !parse_number(fields[0], rec.user) ||
          !parse_number(fields[1], rec.item) || !parse_number(fields[2], rec.rating) ||
          !parse_number(fields[3], rec.timestamp))
        throw DataError(data_path.string() + ":" + std::to_string(lineno) + ": malformed rating row");
      if (rec.user < 1 || rec.item < 1 || rec.item > ml.n_items)
        throw DataError(data_path.string() + ":" + std::to_string(lineno) + ": id out of range");
      if (rec.rating < 1 || rec.rating > 5)
        throw DataError(data_path.string() + ":" + std::to_string(lineno) + ": rating outside 1..5");
      ml.n_users = std::max(ml.n_users, rec.user);
      ml.records.push_back(rec);
    }
    if (ml.records.empty()) throw DataError("empty ratings file " + data_path.string());
  }
  return ml;
}

BinarizedRatings binarize_ratings(const std::vector<RatingRecord>& records, int n_users,
                                  int n_items) {
  if (records.empty()) throw InvalidArgument("no rating records to binarize");
  long double sum = 0;
  for (const auto& r : records) sum += r.rating;
  BinarizedRatings out;
  out.mean = static_cast<double>(sum / records.size());
  std::vector<Rating> entries;
  entries.reserve(records.size());
  for (const auto& r : records) {
    const double v = r.rating;
    if (v > out.mean) entries.push_back({r.user - 1, r.item - 1, 1});
    else if (v < out.mean) entries.push_back({r.user - 1, r.item - 1, -1});
    else ++out.dropped;
  }
  out.ratings = BinaryRatings(n_users, n_items, std::move(entries));
  return out;
}

std::pair<BinaryRatings, BinaryRatings> split_observed(const BinaryRatings& ratings,
                                                       double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie strictly between 0 and 1");
  const std::size_t n = ratings.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed, streams::split);
  for (std::size_t k = n; k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(idx[k - 1], idx[pick(rng)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::vector<char> in_train(n, 0);
  for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = 1;
  std::vector<Rating> train, test;
  train.reserve(n_train);
  test.reserve(n - n_train);
  const auto entries = ratings.entries();
  for (std::size_t k = 0; k < n; ++k) (in_train[k] ? train : test).push_back(entries[k]);
  return {BinaryRatings(ratings.n1(), ratings.n2(), std::move(train)),
          BinaryRatings(ratings.n1(), ratings.n2(), std::move(test))};
}

std::vector<int> group_by_implicit_feedback(const BinaryRatings& ratings, int m, Side side) {
  const int n = side == Side::user ? ratings.n1() : ratings.n2();
  if (m < 1) throw InvalidArgument("group count must be positive");
  if (m > n) throw InvalidArgument("more groups than entities");
  std::vector<long long> count(static_cast<std::size_t>(n), 0);
  for (const auto& r : ratings.entries()) ++count[side == Side::user ? r.user : r.item];
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return count[a] < count[b]; });
  std::vector<int> groups(static_cast<std::size_t>(n));
  for (int b = 0; b < m; ++b) {
    const auto lo = static_cast<std::size_t>(static_cast<long long>(b) * n / m);
    const auto hi = static_cast<std::size_t>(static_cast<long long>(b + 1) * n / m);
    for (std::size_t k = lo; k < hi; ++k) groups[order[k]] = b;
  }
  return groups;
}

GroupAssignment implicit_feedback_groups(const BinaryRatings& ratings, int m1, int m2) {
  return GroupAssignment(group_by_implicit_feedback(ratings, m1, Side::user),
                         group_by_implicit_feedback(ratings, m2, Side::item), m1, m2);
}

// --- artifacts -------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InvalidArgument("cannot format number");
  return std::string(buf, p);
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " into place: " + ec.message());
}

void save_matrix(const fs::path& path, const Matrix& M) {
  std::string out;
  out.reserve(16 + 8 * static_cast<std::size_t>(M.size()));
  out += "GS1M";
  put_u32(out, kMatrixFileVersion);
  put_u32(out, static_cast<std::uint32_t>(M.rows()));
  put_u32(out, static_cast<std::uint32_t>(M.cols()));
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) put_f64(out, M(r, c));
  write_file_atomic(path, out);
}

Matrix load_matrix(const fs::path& path) {
  const std::string in = read_file(path);
  if (in.size() < 16) throw DataError(path.string() + ": truncated matrix header");
  if (in.compare(0, 4, "GS1M") != 0) throw DataError(path.string() + ": bad magic, not a matrix file");
  const auto version = get_u32(in, 4);
  if (version != kMatrixFileVersion)
    throw DataError(path.string() + ": unsupported matrix file version " + std::to_string(version));
  const auto rows = get_u32(in, 8), cols = get_u32(in, 12);
  const std::size_t need = 16 + 8ULL * rows * cols;
  if (in.size() != need) throw DataError(path.string() + ": truncated or oversized matrix payload");
  Matrix M(rows, cols);
  std::size_t at = 16;
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c, at += 8) M(r, c) = get_f64(in, at);
  return M;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  write_file_atomic(path, out);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw DataError(path.string() + ": row " + std::to_string(t.rows.size() + 2) +
                        " has the wrong number of fields");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw DataError("empty CSV file " + path.string());
  return t;
}

void save_labels(const fs::path& path, std::span<const int> labels, const std::string& column) {
  CsvTable t{{"id", column}, {}};
  t.rows.reserve(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k)
    t.rows.push_back({std::to_string(k + 1), std::to_string(labels[k] + 1)});
  write_csv(path, t);
}

std::vector<int> load_labels(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() != 2) throw DataError(path.string() + ": expected two columns id,group");
  std::vector<int> out(t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    int id = 0, g = 0;
    if (!parse_number(t.rows[k][0], id) || !parse_number(t.rows[k][1], g) || g < 1)
      throw DataError(path.string() + ": malformed row " + std::to_string(k + 2));
    if (id != static_cast<int>(k) + 1)
      throw DataError(path.string() + ": ids must run consecutively from 1");
    out[k] = g - 1;
  }
  return out;
}

void save_ratings(const fs::path& path, const BinaryRatings& ratings) {
  std::string out = "user,item,y\n";
  for (const auto& r : ratings.entries())
    out += std::to_string(r.user + 1) + ',' + std::to_string(r.item + 1) + ',' + std::to_string(r.y) + '\n';
  write_file_atomic(path, out);
}

BinaryRatings load_ratings(const fs::path& path, int n1, int n2) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"user", "item", "y"})
    throw DataError(path.string() + ": expected header user,item,y");
  std::vector<Rating> entries;
  entries.reserve(t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    Rating r{};
    if (!parse_number(t.rows[k][0], r.user) || !parse_number(t.rows[k][1], r.item) ||
        !parse_number(t.rows[k][2], r.y))
      throw DataError(path.string() + ": malformed row " + std::to_string(k + 2));
    --r.user;
    --r.item;
    entries.push_back(r);
  }
  try {
    return BinaryRatings(n1, n2, std::move(entries));
  } catch (const InvalidArgument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(path.string() + ": expected key=value, got '" + line + "'");
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

namespace {

std::map<std::string, std::string> kv_map(const fs::path& path) {
  std::map<std::string, std::string> m;
  for (auto& [k, v] : read_key_values(path)) m[k] = v;
  return m;
}

template <class T>
T kv_get(const std::map<std::string, std::string>& m, const std::string& key, const fs::path& src) {
  const auto it = m.find(key);
  T v{};
  if (it == m.end() || !parse_number(it->second, v))
    throw DataError(src.string() + ": missing or malformed '" + key + "'");
  return v;
}

}  // namespace

void save_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);
  save_ratings(dir / "ratings.csv", data.ratings);
  std::string meta = "kind=" + data.kind + "\n" + "n1=" + std::to_string(data.ratings.n1()) +
                     "\n" + "n2=" + std::to_string(data.ratings.n2()) + "\n" +
                     "observed=" + std::to_string(data.ratings.size()) + "\n";
  if (data.M_true) save_matrix(dir / "truth_M.bin", *data.M_true);
  if (data.groups) {
    save_labels(dir / "user_groups.csv", data.groups->user_group());
    save_labels(dir / "item_groups.csv", data.groups->item_group());
    meta += "m1=" + std::to_string(data.groups->m1()) + "\n" + "m2=" + std::to_string(data.groups->m2()) + "\n";
  }
  write_file_atomic(dir / "dataset.txt", meta);
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path meta_path = dir / "dataset.txt";
  if (!fs::exists(meta_path)) throw DataError("missing dataset description " + meta_path.string());
  const auto meta = kv_map(meta_path);
  Dataset d;
  const int n1 = kv_get<int>(meta, "n1", meta_path), n2 = kv_get<int>(meta, "n2", meta_path);
  if (auto it = meta.find("kind"); it != meta.end()) d.kind = it->second;
  d.ratings = load_ratings(dir / "ratings.csv", n1, n2);
  if (fs::exists(dir / "truth_M.bin")) {
    d.M_true = load_matrix(dir / "truth_M.bin");
    if (d.M_true->rows() != n1 || d.M_true->cols() != n2)
      throw DataError((dir / "truth_M.bin").string() + ": shape differs from the dataset");
  }
  if (fs::exists(dir / "user_groups.csv") && fs::exists(dir / "item_groups.csv")) {
    const int m1 = kv_get<int>(meta, "m1", meta_path), m2 = kv_get<int>(meta, "m2", meta_path);
    try {
      d.groups = GroupAssignment(load_labels(dir / "user_groups.csv"),
                                 load_labels(dir / "item_groups.csv"), m1, m2);
    } catch (const InvalidArgument& e) {
      throw DataError(dir.string() + ": bad group files: " + e.what());
    }
  }
  return d;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& c) {
  fs::create_directories(dir);
  save_matrix(dir / "P.bin", c.factors.P);
  save_matrix(dir / "Q.bin", c.factors.Q);
  save_matrix(dir / "SU.bin", c.factors.SU);
  save_matrix(dir / "TJ.bin", c.factors.TJ);
  save_labels(dir / "user_groups.csv", c.groups.user_group());
  save_labels(dir / "item_groups.csv", c.groups.item_group());
  std::string meta;
  meta += "n1=" + std::to_string(c.groups.n1()) + "\n";
  meta += "n2=" + std::to_string(c.groups.n2()) + "\n";
  meta += "m1=" + std::to_string(c.groups.m1()) + "\n";
  meta += "m2=" + std::to_string(c.groups.m2()) + "\n";
  meta += "K=" + std::to_string(c.factors.K()) + "\n";
  meta += "lambda=" + format_double(c.lambda) + "\n";
  meta += "seed=" + std::to_string(c.seed) + "\n";
  meta += "iterations=" + std::to_string(c.iterations) + "\n";
  write_file_atomic(dir / "checkpoint.txt", meta);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const fs::path meta_path = dir / "checkpoint.txt";
  if (!fs::exists(meta_path)) throw DataError("missing checkpoint header " + meta_path.string());
  const auto meta = kv_map(meta_path);
  Checkpoint c;
  c.factors.P = load_matrix(dir / "P.bin");
  c.factors.Q = load_matrix(dir / "Q.bin");
  c.factors.SU = load_matrix(dir / "SU.bin");
  c.factors.TJ = load_matrix(dir / "TJ.bin");
  c.lambda = kv_get<double>(meta, "lambda", meta_path);
  c.seed = kv_get<std::uint64_t>(meta, "seed", meta_path);
  c.iterations = kv_get<int>(meta, "iterations", meta_path);
  const int m1 = kv_get<int>(meta, "m1", meta_path), m2 = kv_get<int>(meta, "m2", meta_path);
  const int K = kv_get<int>(meta, "K", meta_path);
  try {
    c.groups = GroupAssignment(load_labels(dir / "user_groups.csv"),
                               load_labels(dir / "item_groups.csv"), m1, m2);
    c.factors.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(dir.string() + ": inconsistent checkpoint: " + e.what());
  }
  if (c.factors.K() != K || c.factors.P.rows() != c.groups.n1() ||
      c.factors.Q.rows() != c.groups.n2() || c.factors.SU.rows() != m1 || c.factors.TJ.rows() != m2)
    throw DataError(dir.string() + ": checkpoint factor shapes disagree with its header");
  return c;
}

}  // namespace gs1mc
