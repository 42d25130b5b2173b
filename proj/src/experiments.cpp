#include "brownne/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>

#include "brownne/brownian.hpp"
#include "brownne/error.hpp"
#include "brownne/iam.hpp"
#include "brownne/idx.hpp"
#include "brownne/kernels.hpp"
#include "brownne/mlp.hpp"
#include "brownne/ndd.hpp"
#include "brownne/parallel.hpp"
#include "brownne/stochopt.hpp"

#ifndef BROWNNE_DEFAULT_DATA_DIR
#define BROWNNE_DEFAULT_DATA_DIR "data"
#endif

namespace brownne {

namespace {

using VT = ValueType;

std::vector<KeySpec> output_keys() {
  return {{"svg", VT::boolean, "true"}};
}

std::vector<KeySpec> with_output(std::vector<KeySpec> keys) {
  for (auto& k : output_keys()) keys.push_back(std::move(k));
  return keys;
}

const std::map<std::string, std::vector<KeySpec>, std::less<>>& schemas() {
  static const std::map<std::string, std::vector<KeySpec>, std::less<>> table = [] {
    std::map<std::string, std::vector<KeySpec>, std::less<>> m;
    m["ndd-convergence"] = with_output({
        {"dim", VT::integer, "50", 1, 10000},
        {"points", VT::integer, "250", 1, 1e7},
        {"family", VT::text, "linrect"},
        {"n_values", VT::int_list, "2,4,8,16,32,64,128,256,500", 1, 1000},
        {"mc_samples", VT::integer, "10000", 2, 1e9},
        {"quad_order", VT::integer, "64", 1, 256},
        {"quad_panels", VT::integer, "4", 1, 1024},
    });
    m["moments"] = with_output({
        {"families", VT::text, "linrect,exprect,gaussian"},
        {"n_values", VT::int_list, "2,4,8,16,32,64", 1, 1000},
        {"k_values", VT::int_list, "1,2,3", 1, 64},
        {"tail_deltas", VT::real_list, "0.5,0.1,0.01", 1e-300, 1e300},
    });
    m["brownian-verify"] = with_output({
        {"n_values", VT::int_list, "2,3,4", 1, 20},
        {"v_values", VT::real_list, "1,-0.5", -1e3, 1e3},
        {"x_values", VT::real_list, "0.3,0.5", 0, 1e3},
        {"paths", VT::integer, "10000", 3, 1e8},
        {"x_max", VT::real, "1.5", 1e-6, 1e3},
        {"quad_order", VT::integer, "8", 1, 256},
        {"grid_refine", VT::integer, "4", 0, 12},
    });
    m["iam"] = with_output({
        {"n_values", VT::int_list, "50,100,150,200", 1, 100000},
        {"runs", VT::integer, "100", 1, 1e7},
        {"resolution", VT::integer, "128", 16, 4096},
        {"supersample", VT::integer, "4", 1, 64},
        {"family", VT::text, "linrect"},
        {"step0", VT::real, "1e-4", 1e-300, 1e300},
        {"decay", VT::real, "0", 0, 1e300},
        {"max_iters", VT::integer, "20000", 1, 1e9},
        {"mc_samples", VT::integer, "4", 2, 1e9},
        {"patience", VT::integer, "10", 1, 1e9},
        {"tol_fraction", VT::real, "0.02", 1e-12, 1},
        {"start_at_target", VT::boolean, "false"},
        {"export_pgm", VT::boolean, "false"},
    });
    m["mlp-train"] = with_output({
        {"train_images", VT::text, ""},
        {"train_labels", VT::text, ""},
        {"test_images", VT::text, ""},
        {"test_labels", VT::text, ""},
        {"hidden", VT::int_list, "128,128,128,64,64,64", 1, 1e6},
        {"variants", VT::text, "baseline,brownian"},
        {"brownian_layers", VT::int_list, "1", 1, 1e6},
        {"alpha", VT::real, "0.01", 0, 1e3},
        {"n", VT::integer, "4", 1, 60},
        {"v", VT::real, "1", -1e3, 1e3},
        {"epochs", VT::integer, "50", 1, 1e6},
        {"batch_size", VT::integer, "16", 1, 1e7},
        {"learning_rate", VT::real, "0.05", 1e-300, 1e3},
        {"data_pcts", VT::real_list, "0.1", 1e-9, 1},
        {"seeds", VT::integer, "3", 1, 10000},
        {"noise_at_eval", VT::boolean, "false"},
        {"save_checkpoints", VT::boolean, "false"},
    });
    m["biased-gd"] = with_output({
        {"dim", VT::integer, "2", 1, 10000},
        {"family", VT::text, "linrect"},
        {"n", VT::integer, "16", 1, 1000},
        {"step0", VT::real, "0.1", 1e-300, 1e300},
        {"decay", VT::real, "0", 0, 1e300},
        {"iters", VT::integer, "500", 1, 1e8},
        {"noise_sigma", VT::real, "0", 0, 1e300},
        {"runs", VT::integer, "10", 1, 1e6},
        {"condition", VT::real, "10", 1, 1e12},
        {"x0_scale", VT::real, "1", 0, 1e12},
        {"grad_method", VT::text, "quadrature"},
        {"mc_samples", VT::integer, "100", 2, 1e9},
        {"trace_stride", VT::integer, "10", 1, 1e8},
    });
    return m;
  }();
  return table;
}

std::vector<std::string> split_text(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

KernelFamily family_key(const ExperimentConfig& cfg, const std::string& key) {
  try {
    return parse_family(cfg.get_text(key));
  } catch (const ContractError& e) {
    throw ConfigError(key + ": " + e.what(), {key});
  }
}

void check_indices(KernelFamily family, const std::vector<int>& ns, const std::string& key) {
  for (int n : ns) {
    if (n < min_index(family) ||
        (family == KernelFamily::exponential_rect && n > Kernel::max_exponential_index)) {
      throw ConfigError(key + ": index " + std::to_string(n) + " is invalid for kernel family " +
                            std::string(to_string(family)),
                        {key});
    }
  }
}

Provenance provenance(std::uint64_t seed) { return {seed, build_id(), utc_timestamp()}; }

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"ndd-convergence", "moments", "brownian-verify",
                                              "iam", "mlp-train", "biased-gd"};
  return names;
}

const std::vector<KeySpec>& schema_for(std::string_view subcommand) {
  const auto it = schemas().find(subcommand);
  if (it == schemas().end()) {
    throw ConfigError("unknown subcommand '" + std::string(subcommand) + "'", {std::string(subcommand)});
  }
  return it->second;
}

std::string data_directory() {
  if (const char* env = std::getenv("BROWNNE_DATA_DIR")) return env;
  return BROWNNE_DEFAULT_DATA_DIR;
}

// --- ndd-convergence --------------------------------------------------------

ReportTable ndd_convergence_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  const auto dim = static_cast<std::size_t>(cfg.get_int("dim"));
  const auto points = static_cast<std::size_t>(cfg.get_int("points"));
  const auto family = family_key(cfg, "family");
  auto ns = cfg.get_int_list("n_values");
  check_indices(family, ns, "n_values");
  const auto m = static_cast<std::size_t>(cfg.get_int("mc_samples"));
  const QuadratureConfig quad{static_cast<int>(cfg.get_int("quad_order")),
                              static_cast<int>(cfg.get_int("quad_panels"))};

  // u(x) = x^T A x / 2 + b^T x with A symmetric.
  auto rng = RandomStream::derive(seed, "ndd/problem");
  std::vector<double> A(dim * dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = scale * rng.normal();
      A[i * dim + j] = g;
      A[j * dim + i] = g;
    }
  }
  std::vector<double> b(dim), v(dim);
  for (auto& x : b) x = rng.normal();
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  for (auto& x : v) x /= std::sqrt(norm);
  std::vector<std::vector<double>> xs(points, std::vector<double>(dim));
  for (auto& x : xs) {
    for (auto& c : x) c = rng.uniform(-1.0, 1.0);
  }

  const ScalarField u{dim, [&](std::span<const double> x) {
                        double quad_term = 0.0;
                        double lin = 0.0;
                        for (std::size_t i = 0; i < dim; ++i) {
                          const double* row = &A[i * dim];
                          double ax = 0.0;
                          for (std::size_t j = 0; j < dim; ++j) ax += row[j] * x[j];
                          quad_term += x[i] * ax;
                          lin += b[i] * x[i];
                        }
                        return 0.5 * quad_term + lin;
                      }};
  double vav = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) vav += v[i] * A[i * dim + j] * v[j];
  }
  std::vector<double> exact(points);
  for (std::size_t p = 0; p < points; ++p) {
    double d = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double axb = b[i];
      for (std::size_t j = 0; j < dim; ++j) axb += A[i * dim + j] * xs[p][j];
      d += v[i] * axb;
    }
    exact[p] = d;
  }

  struct Cell {
    double quad = 0.0, mc = 0.0, se = 0.0;
  };
  std::vector<Cell> cells(ns.size() * points);
  parallel_for(cells.size(), threads, [&](std::size_t task) {
    const std::size_t row = task / points;
    const std::size_t p = task % points;
    const Kernel kernel(family, ns[row]);
    auto mc_rng = RandomStream::derive(seed, "ndd/mc/" + std::to_string(ns[row]), p);
    cells[task].quad = ndd_quadrature(u, xs[p], v, kernel, quad).value;
    const auto mc = ndd_monte_carlo(u, xs[p], v, kernel, m, mc_rng);
    cells[task].mc = mc.value;
    cells[task].se = mc.std_error;
  });

  ReportTable table({"n", "moment1", "predicted_error", "quad_error", "mc_error", "max_oracle_gap",
                     "mean_discrepancy", "pooled_std_error", "within_4se_fraction"});
  for (std::size_t row = 0; row < ns.size(); ++row) {
    const Kernel kernel(family, ns[row]);
    const double m1 = kernel.moment(1);
    const double predicted = 0.5 * std::abs(vav) * m1;
    double quad_err = 0.0, mc_err = 0.0, gap = 0.0, disc = 0.0, se2 = 0.0;
    std::size_t within = 0;
    for (std::size_t p = 0; p < points; ++p) {
      const auto& c = cells[row * points + p];
      const double qe = std::abs(c.quad - exact[p]);
      quad_err += qe;
      mc_err += std::abs(c.mc - exact[p]);
      gap = std::max(gap, std::abs(qe - predicted));
      const double d = std::abs(c.quad - c.mc);
      disc += d;
      se2 += c.se * c.se;
      within += d <= 4.0 * c.se;
    }
    const double np = static_cast<double>(points);
    table.add_row({static_cast<long long>(ns[row]), m1, predicted, quad_err / np, mc_err / np, gap,
                   disc / np, std::sqrt(se2 / np), static_cast<double>(within) / np});
  }
  table.provenance = provenance(seed);
  return table;
}

// --- moments ------------------------------------------------------------------

ReportTable moments_table(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto ns = cfg.get_int_list("n_values");
  const auto ks = cfg.get_int_list("k_values");
  const auto deltas = cfg.get_real_list("tail_deltas");
  std::vector<KernelFamily> families;
  for (const auto& name : split_text(cfg.get_text("families"))) {
    try {
      families.push_back(parse_family(name));
    } catch (const ContractError& e) {
      throw ConfigError(std::string("families: ") + e.what(), {"families"});
    }
  }
  std::vector<std::string> columns{"family", "n", "k", "moment", "moment_numeric", "abs_diff"};
  for (double d : deltas) columns.push_back("tail_" + format_cell(d));
  ReportTable table(columns);
  for (auto family : families) {
    for (int n : ns) {
      if (n < min_index(family)) continue;
      const Kernel kernel(family, n);
      for (int k : ks) {
        const double closed = kernel.moment(k);
        // Independent check: dense composite rule over the (split) support.
        const auto s = kernel.support();
        auto f = [&](double t) { return std::pow(t, k) * kernel.pdf(t); };
        const QuadratureConfig dense{32, 16};
        const double numeric = family == KernelFamily::gaussian
                                   ? integrate(f, s.lo, 0.0, dense) + integrate(f, 0.0, s.hi, dense)
                                   : integrate(f, s.lo, s.hi, dense);
        std::vector<brownne::Cell> row{std::string(to_string(family)), static_cast<long long>(n),
                                       static_cast<long long>(k), closed, numeric,
                                       std::abs(closed - numeric)};
        for (double d : deltas) row.emplace_back(kernel.tail(d));
        table.add_row(std::move(row));
      }
    }
  }
  table.provenance = provenance(seed);
  return table;
}

// --- brownian-verify --------------------------------------------------------

ReportTable brownian_verify_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  const auto ns = cfg.get_int_list("n_values");
  const auto vs = cfg.get_real_list("v_values");
  const auto xs = cfg.get_real_list("x_values");
  const auto paths = static_cast<std::size_t>(cfg.get_int("paths"));
  const double x_max = cfg.get_real("x_max");
  const QuadratureConfig quad{static_cast<int>(cfg.get_int("quad_order")), 1};

  struct Combo {
    BrownianSpec spec;
    double x;
  };
  std::vector<Combo> combos;
  std::vector<std::string> bad;
  for (int n : ns) {
    for (double v : vs) {
      if (v == 0.0) {
        bad.push_back("v_values");
        continue;
      }
      for (double x : xs) {
        const double reach = std::ldexp(1.0, -(n - 1)) * v;
        if (x + std::min(0.0, reach) < 0.0 || x + std::max(0.0, reach) > x_max) bad.push_back("x_values");
        combos.push_back({BrownianSpec(n, v, 1.0), x});
      }
    }
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    throw ConfigError("brownian-verify: kernel support leaves [0, x_max] or v is zero", bad);
  }
  const int finest = *std::max_element(ns.begin(), ns.end());
  // Interpolating W between grid points shrinks Var W(x) by up to dx/4, so the
  // grid is refined past the minimum resolution.
  const int refine = static_cast<int>(cfg.get_int("grid_refine"));
  const int steps = static_cast<int>(std::ceil(x_max * std::ldexp(1.0, finest + 3 + refine))) + 1;

  std::vector<double> samples(combos.size() * paths);
  parallel_for(paths, threads, [&](std::size_t i) {
    auto rng = RandomStream::derive(seed, "brownian/path", i);
    const auto path = simulate_path(x_max, steps, rng);
    for (std::size_t c = 0; c < combos.size(); ++c) {
      samples[c * paths + i] = path_ndd(path, combos[c].x, combos[c].spec, quad);
    }
  });

  ReportTable table({"n", "v", "x", "paths", "mean", "mean_std_error", "variance", "theory_variance",
                     "rel_variance_error", "jarque_bera", "jb_p_value"});
  const double N = static_cast<double>(paths);
  for (std::size_t c = 0; c < combos.size(); ++c) {
    const double* s = &samples[c * paths];
    double mean = 0.0;
    for (std::size_t i = 0; i < paths; ++i) mean += s[i];
    mean /= N;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
      const double d = s[i] - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= N;
    m3 /= N;
    m4 /= N;
    const double variance = m2 * N / (N - 1.0);
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    const double jb = N / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    const double theory = combos[c].spec.variance();
    table.add_row({static_cast<long long>(combos[c].spec.n), combos[c].spec.v, combos[c].x,
                   static_cast<long long>(paths), mean, std::sqrt(variance / N), variance, theory,
                   std::abs(variance - theory) / theory, jb, std::exp(-0.5 * jb)});
  }
  table.provenance = provenance(seed);
  return table;
}

// --- iam ----------------------------------------------------------------------

namespace {

GdConfig iam_gd(const ExperimentConfig& cfg) {
  GdConfig gd;
  gd.step0 = cfg.get_real("step0");
  gd.decay = cfg.get_real("decay");
  gd.max_iters = static_cast<int>(cfg.get_int("max_iters"));
  gd.grad_method = NddMethod::monte_carlo;
  gd.mc_samples = static_cast<std::size_t>(cfg.get_int("mc_samples"));
  gd.restart = RestartPolicy::on_non_descent(static_cast<int>(cfg.get_int("patience")));
  return gd;
}

}  // namespace

ReportTable iam_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  IamBatchConfig batch;
  batch.family = family_key(cfg, "family");
  batch.n_values = cfg.get_int_list("n_values");
  check_indices(batch.family, batch.n_values, "n_values");
  batch.runs = static_cast<int>(cfg.get_int("runs"));
  batch.resolution = static_cast<int>(cfg.get_int("resolution"));
  batch.supersample = static_cast<int>(cfg.get_int("supersample"));
  batch.gd = iam_gd(cfg);
  batch.tol_fraction = cfg.get_real("tol_fraction");
  batch.start_at_target = cfg.get_bool("start_at_target");
  batch.seed = seed;
  batch.threads = threads;
  ReportTable table({"n", "runs", "mean_iterations", "mean_rel_error", "converged_fraction"});
  for (const auto& row : batch_experiment(batch)) {
    table.add_row({static_cast<long long>(row.n), static_cast<long long>(batch.runs), row.mean_iterations,
                   row.mean_rel_error, row.converged_fraction});
  }
  table.provenance = provenance(seed);
  return table;
}

// --- mlp-train ----------------------------------------------------------------

namespace {

std::string data_path(const ExperimentConfig& cfg, const std::string& key, const char* file) {
  const auto& given = cfg.get_text(key);
  return given.empty() ? (std::filesystem::path(data_directory()) / file).string() : given;
}

struct MlpJob {
  std::string variant;
  double pct;
  int seed_index;
};

}  // namespace

ReportTable mlp_train_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads,
                            const std::string& checkpoint_dir) {
  const auto variants = split_text(cfg.get_text("variants"));
  for (const auto& v : variants) {
    if (v != "baseline" && v != "brownian") throw ConfigError("variants: unknown variant '" + v + "'", {"variants"});
  }
  const auto hidden = cfg.get_int_list("hidden");
  const auto brownian_layers = cfg.get_int_list("brownian_layers");
  for (int l : brownian_layers) {
    if (l < 1 || static_cast<std::size_t>(l) > hidden.size()) {
      throw ConfigError("brownian_layers: layer " + std::to_string(l) + " does not exist", {"brownian_layers"});
    }
  }
  if (cfg.get_real("v") == 0.0) throw ConfigError("v: direction must be nonzero", {"v"});

  auto train_set = load_idx(data_path(cfg, "train_images", "digits-train-images.idx3-ubyte"),
                            data_path(cfg, "train_labels", "digits-train-labels.idx1-ubyte"));
  auto test_set = load_idx(data_path(cfg, "test_images", "digits-test-images.idx3-ubyte"),
                           data_path(cfg, "test_labels", "digits-test-labels.idx1-ubyte"));
  if (train_set.features.cols() != test_set.features.cols()) {
    throw ContractError("train and test images differ in size");
  }
  const int classes = std::max(train_set.class_count, test_set.class_count);
  train_set.class_count = test_set.class_count = classes;

  const BrownianSpec bspec(static_cast<int>(cfg.get_int("n")), cfg.get_real("v"), cfg.get_real("alpha"));
  TrainConfig tc;
  tc.epochs = static_cast<int>(cfg.get_int("epochs"));
  tc.batch_size = static_cast<int>(cfg.get_int("batch_size"));
  tc.learning_rate = cfg.get_real("learning_rate");
  tc.noise_at_eval = cfg.get_bool("noise_at_eval");

  std::vector<MlpJob> jobs;
  const int seeds = static_cast<int>(cfg.get_int("seeds"));
  for (const auto& variant : variants) {
    for (double pct : cfg.get_real_list("data_pcts")) {
      for (int s = 0; s < seeds; ++s) jobs.push_back({variant, pct, s});
    }
  }

  struct Outcome {
    std::size_t examples = 0;
    EpochMetrics last;
  };
  std::vector<Outcome> outcomes(jobs.size());
  const bool save = !checkpoint_dir.empty();
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    MlpSpec spec;
    spec.layer_widths.push_back(static_cast<int>(train_set.features.cols()));
    spec.layer_widths.insert(spec.layer_widths.end(), hidden.begin(), hidden.end());
    spec.layer_widths.push_back(classes);
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      const bool noisy = job.variant == "brownian" &&
                         std::find(brownian_layers.begin(), brownian_layers.end(), static_cast<int>(l + 1)) !=
                             brownian_layers.end();
      spec.activations.push_back(noisy ? LayerActivation::brownian_relu(bspec) : LayerActivation::relu());
    }
    // Both variants share the seed for a given index: same split, init and order.
    spec.seed = splitmix64(seed + static_cast<std::uint64_t>(job.seed_index));
    TrainConfig run_cfg = tc;
    run_cfg.data_pct = job.pct;
    const auto result = train(spec, train_set, test_set, run_cfg);
    outcomes[j] = {result.train_examples, result.trace.back()};
    if (save) {
      save_checkpoint((std::filesystem::path(checkpoint_dir) / ("mlp-" + job.variant + "-" + format_cell(job.pct) + "-" + std::to_string(job.seed_index) +
                          ".brwn")).string(),
                      spec, result.params);
    }
  });

  ReportTable table({"variant", "data_pct", "seed_index", "train_examples", "final_loss", "top1", "top3"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    table.add_row({jobs[j].variant, jobs[j].pct, static_cast<long long>(jobs[j].seed_index),
                   static_cast<long long>(outcomes[j].examples), outcomes[j].last.train_loss,
                   outcomes[j].last.top1, outcomes[j].last.top3});
  }
  table.provenance = provenance(seed);
  return table;
}

ReportTable mlp_summary_table(const ReportTable& runs) {
  const auto vi = runs.column_index("variant");
  const auto pi = runs.column_index("data_pct");
  const auto t1 = runs.numeric_column("top1");
  const auto t3 = runs.numeric_column("top3");
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < runs.rows().size(); ++r) {
    std::pair<std::string, double> key{std::get<std::string>(runs.rows()[r][vi]), std::get<double>(runs.rows()[r][pi])};
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(r);
  }
  ReportTable table({"variant", "data_pct", "seeds", "top1_mean", "top3_mean"});
  for (const auto& key : keys) {
    std::vector<double> a, b;
    for (auto r : groups[key]) {
      a.push_back(t1[r]);
      b.push_back(t3[r]);
    }
    table.add_row({key.first, key.second, static_cast<long long>(a.size()), mean_of(a), mean_of(b)});
  }
  table.provenance = runs.provenance;
  return table;
}

// --- biased-gd ----------------------------------------------------------------

ReportTable biased_gd_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  const auto dim = static_cast<std::size_t>(cfg.get_int("dim"));
  const auto family = family_key(cfg, "family");
  const int n = static_cast<int>(cfg.get_int("n"));
  check_indices(family, {n}, "n");
  const double cond = cfg.get_real("condition");
  const double x0_scale = cfg.get_real("x0_scale");
  const auto runs = static_cast<std::size_t>(cfg.get_int("runs"));
  const auto stride = static_cast<std::size_t>(cfg.get_int("trace_stride"));

  GdConfig gd;
  gd.step0 = cfg.get_real("step0");
  gd.decay = cfg.get_real("decay");
  gd.max_iters = static_cast<int>(cfg.get_int("iters"));
  gd.noise_sigma = cfg.get_real("noise_sigma");
  gd.mc_samples = static_cast<std::size_t>(cfg.get_int("mc_samples"));
  const auto& method = cfg.get_text("grad_method");
  if (method == "quadrature") {
    gd.grad_method = NddMethod::quadrature;
  } else if (method == "monte_carlo") {
    gd.grad_method = NddMethod::monte_carlo;
  } else {
    throw ConfigError("grad_method: expected quadrature or monte_carlo", {"grad_method"});
  }

  // u(x) = sum_i a_i x_i^2 / 2 with a_i spread evenly over [1, condition].
  std::vector<double> diag(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    diag[i] = dim == 1 ? 1.0 : 1.0 + (cond - 1.0) * static_cast<double>(i) / static_cast<double>(dim - 1);
  }
  const ScalarField u{dim, [&](std::span<const double> x) {
                        double s = 0.0;
                        for (std::size_t i = 0; i < dim; ++i) s += 0.5 * diag[i] * x[i] * x[i];
                        return s;
                      }};
  std::vector<DescentReport> reports(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    auto rng = RandomStream::derive(seed, "biased-gd/run", r);
    std::vector<double> x0(dim);
    for (auto& c : x0) c = rng.uniform(-x0_scale, x0_scale);
    reports[r] = biased_gd(u, x0, MultiIndex::uniform(dim, n), family, gd, rng);
  });

  ReportTable table({"iteration", "mean_value", "min_value", "max_value"});
  const std::size_t len = reports.front().value_trace.size();
  for (std::size_t k = 0; k < len; ++k) {
    if (k % stride != 0 && k + 1 != len) continue;
    double sum = 0.0, lo = INFINITY, hi = -INFINITY;
    for (const auto& rep : reports) {
      const double val = rep.value_trace[k];
      sum += val;
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    table.add_row({static_cast<long long>(k), sum / static_cast<double>(runs), lo, hi});
  }
  table.provenance = provenance(seed);
  return table;
}

// --- dispatch -----------------------------------------------------------------

RunResult run(std::string_view subcommand, const ExperimentConfig& cfg, std::uint64_t seed,
              const std::string& out_dir, int threads) {
  schema_for(subcommand);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);
  const std::string name(subcommand);
  RunResult result;

  auto write = [&](const ReportTable& table, const std::string& stem) {
    const auto path = (dir / (stem + ".csv")).string();
    emit_csv(table, path);
    result.files.push_back(path);
  };
  auto chart = [&](const ReportTable& table, const std::string& x, const std::vector<std::string>& ys, bool log_y) {
    if (!cfg.get_bool("svg")) return;
    const auto path = (dir / (name + ".svg")).string();
    for (auto& w : emit_svg(table, x, ys, path, log_y)) result.warnings.push_back(std::move(w));
    result.files.push_back(path);
  };

  if (name == "ndd-convergence") {
    const auto t = ndd_convergence_table(cfg, seed, threads);
    write(t, name);
    chart(t, "n", {"quad_error", "mc_error"}, true);
  } else if (name == "moments") {
    const auto t = moments_table(cfg, seed);
    write(t, name);
  } else if (name == "brownian-verify") {
    const auto t = brownian_verify_table(cfg, seed, threads);
    write(t, name);
  } else if (name == "iam") {
    const auto t = iam_table(cfg, seed, threads);
    write(t, name);
    chart(t, "n", {"mean_rel_error"}, false);
    if (cfg.get_bool("export_pgm")) {
      const auto img = render_disc(0.5, static_cast<int>(cfg.get_int("resolution")),
                                   static_cast<int>(cfg.get_int("supersample")));
      const auto path = (dir / "iam-disc-0.5.pgm").string();
      write_pgm(img, path);
      result.files.push_back(path);
    }
  } else if (name == "mlp-train") {
    const auto runs =
        mlp_train_table(cfg, seed, threads, cfg.get_bool("save_checkpoints") ? out_dir : std::string());
    write(runs, name);
    write(mlp_summary_table(runs), name + "-summary");
  } else if (name == "biased-gd") {
    const auto t = biased_gd_table(cfg, seed, threads);
    write(t, name);
    chart(t, "iteration", {"mean_value"}, true);
  }

  const auto conf_path = (dir / (name + ".effective.conf")).string();
  std::ofstream conf(conf_path);
  if (!conf) throw IoError("cannot write '" + conf_path + "'");
  conf << cfg.serialize();
  result.files.push_back(conf_path);
  return result;
}

RunResult run_with_config_file(std::string_view subcommand, const std::string& config_path,
                               std::uint64_t seed, const std::string& out_dir, int threads) {
  const auto& schema = schema_for(subcommand);
  const auto cfg = config_path.empty() ? ExperimentConfig::parse("", schema)
                                       : ExperimentConfig::load(config_path, schema);
  return run(subcommand, cfg, seed, out_dir, threads);
}

}  // namespace brownne
