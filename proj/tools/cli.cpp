#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "gs1mc/cdmc.hpp"
#include "gs1mc/data_io.hpp"
#include "gs1mc/error.hpp"
#include "gs1mc/kernels.hpp"
#include "gs1mc/metrics.hpp"
#include "gs1mc/rng.hpp"
#include "gs1mc/subspace.hpp"
#include "gs1mc/trainer.hpp"

namespace gs1mc::cli {
namespace fs = std::filesystem;

namespace {

using Metrics = std::vector<std::pair<std::string, std::string>>;

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string kernels = "auto";
  CLI::Option* kernels_opt = nullptr;
};

struct Source {
  std::string data;
  std::string movielens;
};

struct Loaded {
  std::string kind;
  BinaryRatings ratings;
  std::optional<Matrix> M_true;
  std::optional<GroupAssignment> groups;
  std::size_t dropped = 0;
  double mean_rating = std::numeric_limits<double>::quiet_NaN();
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", "Flat key=value file of option values; flags on the command line win")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Run seed; every random stream derives from it")->capture_default_str();
  sub->add_option("--out", c.out, "Output directory")->required();
  c.kernels_opt = sub->add_option("--kernels", c.kernels, "Numeric kernels: auto, scalar or avx2")
                      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
                      ->capture_default_str();
}

void add_source(CLI::App* sub, Source& s) {
  auto* d = sub->add_option("--data", s.data, "Dataset directory written by `synth`");
  auto* m = sub->add_option("--movielens", s.movielens, "MovieLens 100k directory (u.data, u.item)");
  d->excludes(m);
  m->excludes(d);
}

void select_kernels(Common& c) {
  if (!kernels::select(c.kernels))
    throw InvalidArgument("kernel set '" + c.kernels + "' is not available on this machine");
  // Pin the resolved choice so the manifest replays with the same arithmetic.
  c.kernels = kernels::active().name;
  c.kernels_opt->clear();
  c.kernels_opt->add_result(c.kernels);
}

Loaded load_source(const Source& s) {
  Loaded l;
  if (!s.data.empty()) {
    Dataset d = load_dataset(s.data);
    l.kind = d.kind;
    l.ratings = std::move(d.ratings);
    l.M_true = std::move(d.M_true);
    l.groups = std::move(d.groups);
  } else if (!s.movielens.empty()) {
    const MovieLens ml = load_movielens(s.movielens);
    BinarizedRatings b = binarize_ratings(ml.records, ml.n_users, ml.n_items);
    l.kind = "movielens";
    l.ratings = std::move(b.ratings);
    l.dropped = b.dropped;
    l.mean_rating = b.mean;
  } else {
    throw InvalidArgument("one of --data or --movielens is required");
  }
  return l;
}

std::pair<BinaryRatings, BinaryRatings> make_split(const BinaryRatings& all, double frac,
                                                   std::uint64_t seed) {
  if (frac == 0.0) return {all, BinaryRatings(all.n1(), all.n2(), {})};
  return split_observed(all, frac, seed);
}

int max_label(std::span<const int> labels) {
  int m = -1;
  for (int v : labels) m = std::max(m, v);
  return m + 1;
}

GroupAssignment groups_from_dir(const fs::path& dir) {
  const fs::path up = dir / "user_groups.csv", ip = dir / "item_groups.csv";
  if (!fs::exists(up) || !fs::exists(ip))
    throw DataError("group directory " + dir.string() + " needs user_groups.csv and item_groups.csv");
  std::vector<int> ug = load_labels(up), ig = load_labels(ip);
  const int m1 = max_label(ug), m2 = max_label(ig);
  return GroupAssignment(std::move(ug), std::move(ig), m1, m2);
}

GroupAssignment resolve_groups(const std::string& spec, const Loaded& data,
                               const BinaryRatings& train) {
  if (spec.empty() || spec == "truth") {
    if (data.groups) return *data.groups;
    throw InvalidArgument("this dataset carries no groups: pass --groups PATH or --groups implicit:m");
  }
  if (spec.rfind("implicit:", 0) == 0) {
    int m = 0;
    const std::string tail = spec.substr(9);
    try {
      std::size_t used = 0;
      m = std::stoi(tail, &used);
      if (used != tail.size()) m = 0;
    } catch (const std::exception&) {
      m = 0;
    }
    if (m < 1) throw InvalidArgument("--groups implicit:m needs a positive integer m");
    return implicit_feedback_groups(train, m, m);
  }
  GroupAssignment g = groups_from_dir(spec);
  if (g.n1() != train.n1() || g.n2() != train.n2())
    throw DataError("group files in " + spec + " do not match the dataset dimensions");
  return g;
}

void write_metrics(const fs::path& path, const Metrics& m) {
  CsvTable t{{"metric", "value"}, {}};
  for (const auto& [k, v] : m) t.rows.push_back({k, v});
  write_csv(path, t);
}

void write_manifest(const fs::path& dir, const CLI::App& sub, double seconds) {
  std::ostringstream s;
  s << "# gs1mc run manifest\n";
  s << "# command=" << sub.get_name() << "\n";
  s << "# replay: gs1mc " << sub.get_name() << " --config <this file> --out <dir>\n";
  s << "# tool_version=" << kToolVersion << "\n";
  s << "# matrix_file_version=" << kMatrixFileVersion << "\n";
  s << "# wall_clock_seconds=" << seconds << "\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    const std::string value = opt->count() ? opt->results().front() : opt->get_default_str();
    if (opt->count() == 0 && value.empty()) continue;
    s << name << "=" << value << "\n";
  }
  write_file_atomic(dir / "manifest.txt", s.str());
}

// Splices the key=value pairs of a --config file into the argument list as
// long options, skipping keys already given explicitly.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  if (!fs::is_regular_file(path)) throw DataError("config file " + path + " does not exist");
  std::vector<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.push_back(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  for (auto [key, value] : read_key_values(path)) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (std::find(given.begin(), given.end(), key) != given.end()) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

std::string fmt(double v) { return format_double(v); }

Metrics base_metrics(const Loaded& data, const BinaryRatings& train, const BinaryRatings& test) {
  Metrics m;
  m.emplace_back("dataset_kind", data.kind);
  m.emplace_back("n_users", std::to_string(data.ratings.n1()));
  m.emplace_back("n_items", std::to_string(data.ratings.n2()));
  m.emplace_back("n_observed", std::to_string(data.ratings.size()));
  m.emplace_back("n_train", std::to_string(train.size()));
  m.emplace_back("n_test", std::to_string(test.size()));
  if (data.kind == "movielens") {
    m.emplace_back("mean_rating", fmt(data.mean_rating));
    m.emplace_back("dropped_at_mean", std::to_string(data.dropped));
  }
  return m;
}

void add_fit_metrics(Metrics& m, const FactorSet& f, const GroupAssignment& g, const Loaded& data,
                     const BinaryRatings& train, const BinaryRatings& test) {
  if (!train.empty()) m.emplace_back("train_accuracy", fmt(heldout_accuracy(f, g, train)));
  if (!test.empty()) {
    const double acc = heldout_accuracy(f, g, test);
    m.emplace_back("test_accuracy", fmt(acc));
    m.emplace_back("test_misclassification", fmt(1.0 - acc));
  }
  if (data.M_true) m.emplace_back("relative_error", fmt(relative_error(assemble_M(f, g), *data.M_true)));
}

// --- commands ---------------------------------------------------------------

struct SynthOpts {
  Common common;
  SyntheticConfig cfg;
  std::string binarization = "threshold";
};

void cmd_synth(SynthOpts& o) {
  o.cfg.seed = o.common.seed;
  o.cfg.binarization = o.binarization == "bernoulli" ? Binarization::bernoulli : Binarization::threshold;
  SyntheticData d = generate_synthetic(o.cfg);
  const fs::path out = o.common.out;
  Dataset ds;
  ds.ratings = d.ratings;
  ds.kind = "synthetic";
  ds.M_true = d.M_true;
  ds.groups = d.groups;
  save_dataset(out, ds);
  save_checkpoint(out / "truth", {d.truth, d.groups, 0.0, o.cfg.seed, 0});
  write_metrics(out / "metrics.csv", {{"n_users", std::to_string(o.cfg.n1)},
                                      {"n_items", std::to_string(o.cfg.n2)},
                                      {"n_observed", std::to_string(d.ratings.size())},
                                      {"binarization", o.binarization}});
}

struct FitOpts {
  Common common;
  Source source;
  TrainConfig train;
  std::string groups;
  double train_frac = 0.0;
};

void add_train_options(CLI::App* sub, TrainConfig& t) {
  sub->add_option("--lambda", t.lambda, "Ridge weight on all factor blocks")->capture_default_str();
  sub->add_option("--k", t.K, "Latent dimension")->capture_default_str();
  sub->add_option("--max-iters", t.max_outer_iters, "Block-descent cycle budget")->capture_default_str();
  sub->add_option("--block-steps", t.inner_steps_per_block, "Gradient steps per block per cycle")
      ->capture_default_str();
  sub->add_option("--tol", t.tolerance, "Relative loss change that stops training")->capture_default_str();
  sub->add_option("--init-scale", t.init_scale, "Std. deviation of the random initialization")
      ->capture_default_str();
  sub->add_option("--step-size", t.step_size, "Initial step multiplier")->capture_default_str();
  sub->add_option("--precondition", t.precondition, "Per-row curvature scaling of gradient steps")
      ->capture_default_str();
}

void add_split_option(CLI::App* sub, double& frac) {
  sub->add_option("--train-frac", frac, "Fraction of observed entries used for training; 0 trains on all")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void cmd_gs1mc(FitOpts& o) {
  o.train.seed = o.common.seed;
  const Loaded data = load_source(o.source);
  const auto [train, test] = make_split(data.ratings, o.train_frac, o.common.seed);
  const GroupAssignment groups = resolve_groups(o.groups, data, train);
  const FitResult fit = fit_gs1mc(train, groups, o.train);

  const fs::path out = o.common.out;
  save_checkpoint(out / "checkpoint", {fit.factors, groups, o.train.lambda, o.common.seed, fit.iterations_run});
  CsvTable trace{{"iteration", "loss"}, {}};
  for (std::size_t t = 0; t < fit.loss_trace.size(); ++t)
    trace.rows.push_back({std::to_string(t), fmt(fit.loss_trace[t])});
  write_csv(out / "loss_trace.csv", trace);

  Metrics m = base_metrics(data, train, test);
  m.emplace_back("m1", std::to_string(groups.m1()));
  m.emplace_back("m2", std::to_string(groups.m2()));
  m.emplace_back("final_loss", fmt(fit.loss_trace.back()));
  m.emplace_back("iterations", std::to_string(fit.iterations_run));
  m.emplace_back("converged", fit.converged ? "1" : "0");
  add_fit_metrics(m, fit.factors, groups, data, train, test);
  write_metrics(out / "metrics.csv", m);
}

struct CdmcOpts {
  Common common;
  Source source;
  CdmcConfig cfg;
  double train_frac = 0.0;
};

void write_epoch_labels(const fs::path& path, const CdmcTrace& trace, bool users) {
  CsvTable t{{"id"}, {}};
  for (const auto& e : trace.epochs) t.header.push_back("epoch_" + std::to_string(e.epoch));
  const std::size_t n = trace.epochs.empty() ? 0
                        : users                ? trace.epochs.front().user_labels.size()
                                               : trace.epochs.front().item_labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row{std::to_string(i + 1)};
    for (const auto& e : trace.epochs)
      row.push_back(std::to_string((users ? e.user_labels : e.item_labels)[i] + 1));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

void cmd_cdmc(CdmcOpts& o) {
  o.cfg.seed = o.common.seed;
  const Loaded data = load_source(o.source);
  const auto [train, test] = make_split(data.ratings, o.train_frac, o.common.seed);
  const CdmcResult r = fit_cdmc(train, o.cfg, test.empty() ? nullptr : &test);

  const fs::path out = o.common.out;
  save_checkpoint(out / "checkpoint",
                  {r.fit.factors, r.groups, o.cfg.train.lambda, o.common.seed, r.fit.iterations_run});
  CsvTable trace{{"epoch", "loss", "misclassification", "user_ami_prev", "item_ami_prev", "ssc_flagged"}, {}};
  for (const auto& e : r.trace.epochs)
    trace.rows.push_back({std::to_string(e.epoch), fmt(e.loss), fmt(e.misclassification),
                          fmt(e.user_ami_prev), fmt(e.item_ami_prev), std::to_string(e.ssc_flagged)});
  write_csv(out / "trace.csv", trace);
  save_labels(out / "user_labels.csv", r.groups.user_group());
  save_labels(out / "item_labels.csv", r.groups.item_group());
  write_epoch_labels(out / "epoch_user_labels.csv", r.trace, true);
  write_epoch_labels(out / "epoch_item_labels.csv", r.trace, false);

  Metrics m = base_metrics(data, train, test);
  m.emplace_back("m1", std::to_string(o.cfg.m1));
  m.emplace_back("m2", std::to_string(o.cfg.m2));
  m.emplace_back("epochs_run", std::to_string(r.trace.epochs.size()));
  m.emplace_back("converged", r.trace.converged ? "1" : "0");
  m.emplace_back("initial_misclassification", fmt(r.trace.initial_misclassification));
  m.emplace_back("final_loss", fmt(r.fit.loss_trace.back()));
  m.emplace_back("ami_normalizer", "arithmetic_mean");
  add_fit_metrics(m, r.fit.factors, r.groups, data, train, test);
  write_metrics(out / "metrics.csv", m);
}

struct CompareOpts {
  Common common;
  std::string run_a;
  std::string run_b;
};

CdmcTrace trace_from_run(const fs::path& dir) {
  const CsvTable users = read_csv(dir / "epoch_user_labels.csv");
  const CsvTable items = read_csv(dir / "epoch_item_labels.csv");
  if (users.header != items.header) throw DataError(dir.string() + ": user and item epoch files disagree");
  CdmcTrace t;
  const std::size_t n_epochs = users.header.size() - 1;
  t.epochs.resize(n_epochs);
  auto fill = [&](const CsvTable& tab, bool user_side) {
    for (std::size_t e = 0; e < n_epochs; ++e) {
      auto& dst = user_side ? t.epochs[e].user_labels : t.epochs[e].item_labels;
      dst.reserve(tab.rows.size());
      for (const auto& row : tab.rows) {
        int v = 0;
        try {
          v = std::stoi(row[e + 1]);
        } catch (const std::exception&) {
          throw DataError(dir.string() + ": malformed label in epoch files");
        }
        dst.push_back(v - 1);
      }
    }
  };
  fill(users, true);
  fill(items, false);
  for (std::size_t e = 0; e < n_epochs; ++e) {
    const std::string& h = users.header[e + 1];
    if (h.rfind("epoch_", 0) != 0) throw DataError(dir.string() + ": unexpected column " + h);
    t.epochs[e].epoch = std::stoi(h.substr(6));
  }
  return t;
}

void cmd_compare(CompareOpts& o) {
  const auto series = cross_run_ami(trace_from_run(o.run_a), trace_from_run(o.run_b));
  CsvTable t{{"epoch", "user_ami", "item_ami"}, {}};
  for (const auto& p : series) t.rows.push_back({std::to_string(p.epoch), fmt(p.user_ami), fmt(p.item_ami)});
  write_csv(fs::path(o.common.out) / "cross_ami.csv", t);
  Metrics m{{"epochs_compared", std::to_string(series.size())}};
  if (!series.empty()) {
    m.emplace_back("first_user_ami", fmt(series.front().user_ami));
    m.emplace_back("first_item_ami", fmt(series.front().item_ami));
    m.emplace_back("final_user_ami", fmt(series.back().user_ami));
    m.emplace_back("final_item_ami", fmt(series.back().item_ami));
  }
  write_metrics(fs::path(o.common.out) / "metrics.csv", m);
}

struct ProjectOpts {
  Common common;
  std::string checkpoint;
  std::string movielens;
  int genre_k = 0;
};

void cmd_project(ProjectOpts& o) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const fs::path dir = o.movielens;
  if (!fs::exists(dir / "u.item")) throw DataError("missing genre file " + (dir / "u.item").string());
  const MovieLens ml = load_movielens(dir);
  if (ml.n_items != ck.groups.n2())
    throw DataError("checkpoint has " + std::to_string(ck.groups.n2()) + " items but the genre file has " +
                    std::to_string(ml.n_items));
  const int k = o.genre_k > 0 ? o.genre_k : ck.groups.m2();
  const KMeansResult km = kmeans(ml.genres, k, stream_seed(o.common.seed, streams::genre_kmeans), 300, 10);

  const Matrix items = item_embedding(ck.factors, ck.groups);
  const Matrix users = user_embedding(ck.factors, ck.groups);
  auto coords = [](const Matrix& X, Eigen::Index r, std::vector<std::string>& row) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) row.push_back(format_double(X(r, c)));
  };
  CsvTable it{{"id"}, {}};
  for (Eigen::Index c = 0; c < items.cols(); ++c) it.header.push_back("x" + std::to_string(c + 1));
  it.header.insert(it.header.end(), {"cdmc_label", "genre_label"});
  for (Eigen::Index r = 0; r < items.rows(); ++r) {
    std::vector<std::string> row{std::to_string(r + 1)};
    coords(items, r, row);
    row.push_back(std::to_string(ck.groups.item_group()[r] + 1));
    row.push_back(std::to_string(km.labels.labels[r] + 1));
    it.rows.push_back(std::move(row));
  }
  CsvTable ut{{"id"}, {}};
  for (Eigen::Index c = 0; c < users.cols(); ++c) ut.header.push_back("x" + std::to_string(c + 1));
  ut.header.push_back("cdmc_label");
  for (Eigen::Index r = 0; r < users.rows(); ++r) {
    std::vector<std::string> row{std::to_string(r + 1)};
    coords(users, r, row);
    row.push_back(std::to_string(ck.groups.user_group()[r] + 1));
    ut.rows.push_back(std::move(row));
  }
  const fs::path out = o.common.out;
  write_csv(out / "items.csv", it);
  write_csv(out / "users.csv", ut);
  write_metrics(out / "metrics.csv",
                {{"genre_k", std::to_string(k)},
                 {"genre_empty_clusters", std::to_string(km.labels.empty_clusters)},
                 {"genre_label_ami_vs_cdmc",
                  fmt(adjusted_mutual_information(km.labels.labels, ck.groups.item_group()))}});
}

struct EvalOpts {
  Common common;
  Source source;
  std::string checkpoint;
  double train_frac = 0.0;
};

void cmd_eval(EvalOpts& o) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const Loaded data = load_source(o.source);
  if (data.ratings.n1() != ck.groups.n1() || data.ratings.n2() != ck.groups.n2())
    throw DataError("checkpoint dimensions do not match the dataset");
  const auto [train, test] = make_split(data.ratings, o.train_frac, o.common.seed);
  Metrics m = base_metrics(data, train, test);
  add_fit_metrics(m, ck.factors, ck.groups, data, train, test);
  write_metrics(fs::path(o.common.out) / "metrics.csv", m);
}

int exit_code(ErrorKind k) { return static_cast<int>(k); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group-specific 1-bit matrix completion and cluster-developing matrix completion"};
  app.name(args.empty() ? "gs1mc" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  SynthOpts synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset with planted groups");
  add_common(s, synth.common);
  s->add_option("--n1", synth.cfg.n1, "Users")->capture_default_str();
  s->add_option("--n2", synth.cfg.n2, "Items")->capture_default_str();
  s->add_option("--m1", synth.cfg.m1, "User groups")->capture_default_str();
  s->add_option("--m2", synth.cfg.m2, "Item groups")->capture_default_str();
  s->add_option("--k", synth.cfg.K, "Latent dimension")->capture_default_str();
  s->add_option("--pi", synth.cfg.pi, "Fraction of entries observed, in (0, 1]")->capture_default_str();
  s->add_option("--sigma", synth.cfg.noise_sigma, "Std. deviation of the additive probability noise")
      ->capture_default_str();
  s->add_option("--binarization", synth.binarization, "threshold or bernoulli")
      ->check(CLI::IsMember({"threshold", "bernoulli"}))
      ->capture_default_str();

  FitOpts fit;
  auto* g = app.add_subcommand("gs1mc", "Fit the group-specific model with known or implicit groups");
  add_common(g, fit.common);
  add_source(g, fit.source);
  add_train_options(g, fit.train);
  add_split_option(g, fit.train_frac);
  g->add_option("--groups", fit.groups, "Group directory, implicit:m, or truth (the dataset's own)");

  CdmcOpts cd;
  auto* c = app.add_subcommand("cdmc", "Fit while discovering user and item clusters");
  add_common(c, cd.common);
  add_source(c, cd.source);
  add_train_options(c, cd.cfg.train);
  add_split_option(c, cd.train_frac);
  c->add_option("--epochs", cd.cfg.outer_epochs, "Re-clustering epochs")->capture_default_str();
  c->add_option("--inner-steps", cd.cfg.inner_steps, "Block cycles after each re-clustering")
      ->capture_default_str();
  c->add_option("--m1", cd.cfg.m1, "User clusters")->capture_default_str();
  c->add_option("--m2", cd.cfg.m2, "Item clusters")->capture_default_str();
  c->add_option("--ssc-mu", cd.cfg.ssc.mu, "Self-expression data weight; 0 picks it from the data")
      ->capture_default_str();
  c->add_option("--ssc-alpha", cd.cfg.ssc.alpha, "Scale of the automatic data weight")->capture_default_str();
  c->add_option("--ssc-tol", cd.cfg.ssc.tol, "Self-expression coefficient tolerance")->capture_default_str();
  c->add_option("--keep-top", cd.cfg.affinity_keep_top, "Keep this many coefficients per column; 0 keeps all")
      ->capture_default_str();
  c->add_option("--converge-ami", cd.cfg.convergence_ami, "Stop once both sides reach this epoch-to-epoch AMI")
      ->capture_default_str();

  CompareOpts cmp;
  auto* k = app.add_subcommand("compare", "Cross-run AMI of two cdmc runs, epoch by epoch");
  add_common(k, cmp.common);
  k->add_option("--run-a", cmp.run_a, "First cdmc output directory")->required();
  k->add_option("--run-b", cmp.run_b, "Second cdmc output directory")->required();

  ProjectOpts proj;
  auto* p = app.add_subcommand("project", "Embedding coordinates with cluster and genre labels");
  add_common(p, proj.common);
  p->add_option("--checkpoint", proj.checkpoint, "Checkpoint directory")->required();
  p->add_option("--movielens", proj.movielens, "MovieLens 100k directory with u.item")->required();
  p->add_option("--genre-k", proj.genre_k, "k-means clusters on genre flags; 0 uses the item cluster count")
      ->capture_default_str();

  EvalOpts ev;
  auto* e = app.add_subcommand("eval", "Score a checkpoint on a dataset split");
  add_common(e, ev.common);
  add_source(e, ev.source);
  add_split_option(e, ev.train_frac);
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint directory")->required();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  try {
    rest = expand_config(std::move(rest));
  } catch (const Error& ex) {
    err << app.get_name() << ": error: " << ex.what() << "\n";
    return exit_code(ex.kind());
  }
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << app.get_name() << ": error: " << ex.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return exit_code(ErrorKind::invalid_argument);
  }

  CLI::App* sub = app.get_subcommands().front();
  std::map<CLI::App*, std::pair<Common*, std::function<void()>>> table{
      {s, {&synth.common, [&] { cmd_synth(synth); }}},
      {g, {&fit.common, [&] { cmd_gs1mc(fit); }}},
      {c, {&cd.common, [&] { cmd_cdmc(cd); }}},
      {k, {&cmp.common, [&] { cmd_compare(cmp); }}},
      {p, {&proj.common, [&] { cmd_project(proj); }}},
      {e, {&ev.common, [&] { cmd_eval(ev); }}},
  };
  auto& [common, action] = table.at(sub);
  try {
    const auto t0 = std::chrono::steady_clock::now();
    select_kernels(*common);
    fs::create_directories(common->out);
    action();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(common->out, *sub, secs);
  } catch (const Error& ex) {
    err << app.get_name() << ": error: " << ex.what() << "\n";
    return exit_code(ex.kind());
  } catch (const fs::filesystem_error& ex) {
    err << app.get_name() << ": error: " << ex.what() << "\n";
    return exit_code(ErrorKind::data);
  } catch (const std::exception& ex) {
    err << app.get_name() << ": error: " << ex.what() << "\n";
    return exit_code(ErrorKind::numerical);
  }
  return 0;
}

}  // namespace gs1mc::cli
