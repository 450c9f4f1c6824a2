#pragma once

// Data sources (synthetic generator, MovieLens 100k), preprocessing
// (binarization, splits, implicit-feedback groups) and on-disk artifacts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gs1mc/model.hpp"

namespace gs1mc {

enum class Binarization {
  threshold,  // clamp f(M) + noise to [0, 1], +1 when >= 0.5
  bernoulli,  // +1 with probability f(M); noise unused
};

struct SyntheticConfig {
  int n1 = 200;
  int n2 = 800;
  int m1 = 10;
  int m2 = 10;
  int K = 3;
  // Group means: s_v ~ N(user_mean_base + user_mean_step * v, 1), v = 1..m1; same for items.
  double user_mean_base = -2.0;
  double user_mean_step = 0.4;
  double item_mean_base = -3.0;
  double item_mean_step = 0.6;
  double pi = 0.25;
  double noise_sigma = 1.0;
  Binarization binarization = Binarization::threshold;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticData {
  BinaryRatings ratings;
  FactorSet truth;        // scaled so that assemble_M(truth) reproduces M_true
  GroupAssignment groups; // contiguous equal-size groups
  Matrix M_true;          // max |entry| == 1
};

SyntheticData generate_synthetic(const SyntheticConfig& config);

struct RatingRecord {
  int user;       // 1-based, as in the source file
  int item;       // 1-based
  int rating;     // 1..5
  long long timestamp;

  bool operator==(const RatingRecord&) const = default;
};

inline constexpr int kGenreCount = 19;

struct MovieLens {
  std::vector<RatingRecord> records;
  Matrix genres;  // n_items x 19, entries 0/1
  int n_users = 0;
  int n_items = 0;
};

/// Reads u.data (tab separated) and u.item (pipe separated, last 19 fields genre flags).
MovieLens load_movielens(const std::filesystem::path& dir);

struct BinarizedRatings {
  BinaryRatings ratings;
  double mean = 0.0;
  std::size_t dropped = 0;  // ratings exactly at the mean
};

/// +1 above the global mean rating, -1 below; ties are dropped.
BinarizedRatings binarize_ratings(const std::vector<RatingRecord>& records, int n_users,
                                  int n_items);

/// Uniform random partition of the observed entries; round(train_fraction * |Omega|) go to train.
std::pair<BinaryRatings, BinaryRatings> split_observed(const BinaryRatings& ratings,
                                                       double train_fraction, std::uint64_t seed);

enum class Side { user, item };

/// Quantile bins of ascending rating count (ties by ascending id); bin sizes differ by <= 1.
std::vector<int> group_by_implicit_feedback(const BinaryRatings& ratings, int m, Side side);
GroupAssignment implicit_feedback_groups(const BinaryRatings& ratings, int m1, int m2);

// --- artifacts -----------------------------------------------------------

inline constexpr std::uint32_t kMatrixFileVersion = 1;

/// Binary matrix file: "GS1M", u32 version, u32 rows, u32 cols, row-major little-endian f64.
void save_matrix(const std::filesystem::path& path, const Matrix& M);
Matrix load_matrix(const std::filesystem::path& path);

/// CSV "id,group" with 1-based ids and groups.
void save_labels(const std::filesystem::path& path, std::span<const int> labels,
                 const std::string& column = "group");
std::vector<int> load_labels(const std::filesystem::path& path);

/// Dataset directory: ratings.csv (user,item,y; 1-based) and dataset.txt (key=value).
struct Dataset {
  BinaryRatings ratings;
  std::string kind = "synthetic";
  std::optional<Matrix> M_true;
  std::optional<GroupAssignment> groups;
};
void save_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& dir);

void save_ratings(const std::filesystem::path& path, const BinaryRatings& ratings);
BinaryRatings load_ratings(const std::filesystem::path& path, int n1, int n2);

struct Checkpoint {
  FactorSet factors;
  GroupAssignment groups;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
};
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Comma-separated table with a header row. Cells are written verbatim.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Flat key=value file; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path);

}  // namespace gs1mc
