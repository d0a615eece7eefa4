// Command line front end. Six subcommands cover the full pipeline:
//
//   generate    synthesize sparse signals (or a sparsity-tuned image)
//   measure     project signals through a seeded Gaussian sensing matrix
//   reconstruct recover signals/images from measurements with any solver
//   evaluate    score a reconstruction against its ground truth
//   benchmark   sweep (n, sr, kr) x solver grids into a long-format CSV
//   min-sr      scan sampling rates for the smallest one that hits a target SSIM
//
// Every artifact embeds the config and seed that produced it, so rerunning
// the same command reproduces the same bytes. The only nondeterministic
// values are wall times; reports keep those under a single "timing" key and
// the benchmark CSV keeps them in the last column, so consumers can strip
// them before comparing.
//
// Exit codes: 0 success, 2 usage or config, 3 unreadable or mismatched
// input, 4 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cskit/clomp.hpp"
#include "cskit/datagen.hpp"
#include "cskit/errors.hpp"
#include "cskit/io.hpp"
#include "cskit/linalg.hpp"
#include "cskit/metrics.hpp"
#include "cskit/rng.hpp"
#include "cskit/sensing.hpp"
#include "cskit/solvers.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace la = cskit::la;
namespace io = cskit::io;
using cskit::ConfigError;
using cskit::DimensionError;
using cskit::IoError;

// The noise stream gets a seed of its own so the sensing matrix stays a pure
// function of (n, sr, seed) no matter how much noise is drawn.
cskit::Rng noise_rng(std::uint64_t seed) {
  return cskit::Rng(seed ^ 0x9e3779b97f4a7c15ULL);
}

std::size_t ratio_to_count(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
}

// Same rounding rule the sensing module applies to m = floor(n * sr).
std::size_t measure_count(std::size_t n, double sr) {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * sr + 1e-9));
}

// JSON has no inf/nan literals; keep them readable as strings instead of
// nlohmann's silent null.
json jnum(double v) {
  if (std::isfinite(v)) return v;
  return io::format_g17(v);
}

json jopt(const std::optional<double>& v) {
  if (!v) return nullptr;
  return jnum(*v);
}

// Linear interpolation between order statistics, the numpy convention.
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Aggregate {
  std::size_t count = 0;
  double mean_mse = 0.0;
  double mean_psnr = 0.0;
  std::optional<double> mean_pcc;
  double mean_ssim = 0.0;
  double median_ssim = 0.0;
  double p10_ssim = 0.0;
};

Aggregate aggregate_metrics(const std::vector<cskit::SignalMetrics>& ms) {
  Aggregate a;
  a.count = ms.size();
  if (ms.empty()) return a;
  std::vector<double> ssims;
  double pcc_sum = 0.0;
  std::size_t pcc_n = 0;
  for (const auto& m : ms) {
    a.mean_mse += m.mse;
    a.mean_psnr += m.psnr;
    a.mean_ssim += m.ssim;
    ssims.push_back(m.ssim);
    if (m.pcc) {
      pcc_sum += *m.pcc;
      ++pcc_n;
    }
  }
  const auto cnt = static_cast<double>(ms.size());
  a.mean_mse /= cnt;
  a.mean_psnr /= cnt;
  a.mean_ssim /= cnt;
  if (pcc_n > 0) a.mean_pcc = pcc_sum / static_cast<double>(pcc_n);
  a.median_ssim = quantile(ssims, 0.5);
  a.p10_ssim = quantile(ssims, 0.1);
  return a;
}

json signals_json(const std::vector<cskit::SignalMetrics>& ms) {
  json arr = json::array();
  for (const auto& m : ms)
    arr.push_back(json{{"mse", jnum(m.mse)},
                       {"psnr", jnum(m.psnr)},
                       {"pcc", jopt(m.pcc)},
                       {"ssim", jnum(m.ssim)}});
  return arr;
}

json aggregate_json(const std::vector<cskit::SignalMetrics>& ms) {
  const Aggregate a = aggregate_metrics(ms);
  return json{{"count", a.count},
              {"mean_mse", jnum(a.mean_mse)},
              {"mean_psnr", jnum(a.mean_psnr)},
              {"mean_pcc", jopt(a.mean_pcc)},
              {"mean_ssim", jnum(a.mean_ssim)},
              {"median_ssim", jnum(a.median_ssim)}};
}

// Fingerprint of the measurement setup alone. Two solvers fed the same
// measurements report the same hash, which is how runs are matched up later.
std::string setup_hash(const cskit::MeasurementSetup& s, double noise) {
  const std::string canon = "n=" + std::to_string(s.n) +
                            "|m=" + std::to_string(s.m) +
                            "|sr=" + io::format_g17(s.sr) +
                            "|seed=" + std::to_string(s.seed) +
                            "|noise=" + io::format_g17(noise);
  return io::hex64(io::fnv1a64(canon));
}

void write_report(const std::string& path, const json& j) {
  io::write_text_file(path, j.dump(2) + "\n");
}

std::vector<std::string> indexed_header(const std::string& prefix,
                                        std::size_t n) {
  std::vector<std::string> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = prefix + std::to_string(i);
  return h;
}

// Snap to the 8-bit lattice the PGM writer uses, so reported metrics describe
// the file actually written.
la::Mat quantize_unit(const la::Mat& img) {
  la::Mat out = img;
  for (double& v : out.a)
    v = static_cast<double>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) /
        255.0;
  return out;
}

bool is_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  return in.gcount() == 2 && magic[0] == 'P' && magic[1] == '5';
}

double meta_double(const io::Csv& csv, const std::string& path,
                   const std::string& key) {
  const auto it = csv.meta.find(key);
  if (it == csv.meta.end())
    throw IoError(path + ": missing '" + key + "' metadata");
  return io::parse_double(it->second, path + ": " + key);
}

std::uint64_t meta_u64(const io::Csv& csv, const std::string& path,
                       const std::string& key) {
  const auto it = csv.meta.find(key);
  if (it == csv.meta.end())
    throw IoError(path + ": missing '" + key + "' metadata");
  return io::parse_u64(it->second, path + ": " + key);
}

// ---------------------------------------------------------------------------
// Solver flags shared by reconstruct, benchmark and min-sr.

struct SolverFlags {
  std::string solver = "omp";
  double th = 0.7;
  std::size_t max_iter = 200;
  double eps = 1e-6;
  double lambda = 0.01;
  double t = 1.0;
  double kr = -1.0;  // iht sparsity ratio; negative falls back to metadata
  double w_tv = -1.0;
  double w_lv = -1.0;
  std::size_t inner_steps = 50;
  double lr = 0.01;
  std::string optimizer = "adam";
};

// benchmark takes --solvers and --kr as grid axes, so it skips the scalar
// forms of both.
void add_solver_flags(CLI::App* c, SolverFlags& f, bool with_solver = true,
                      bool with_kr = true) {
  if (with_solver)
    c->add_option("--solver", f.solver, "omp | iht | ista | clomp")
        ->check(CLI::IsMember({"omp", "iht", "ista", "clomp"}));
  c->add_option("--th", f.th, "correlation threshold for support growth");
  c->add_option("--max-iter", f.max_iter,
                "iteration cap (outer iterations for clomp)");
  c->add_option("--eps", f.eps, "residual norm stopping threshold");
  c->add_option("--lambda", f.lambda, "ista soft-threshold level");
  c->add_option("--t", f.t, "iht/ista step scale");
  if (with_kr)
    c->add_option("--kr", f.kr,
                  "sparsity ratio for iht (default: input metadata)");
  c->add_option("--w-tv", f.w_tv, "clomp TV weight; negative means auto");
  c->add_option("--w-lv", f.w_lv,
                "clomp local-variance weight; negative means auto");
  c->add_option("--inner-steps", f.inner_steps,
                "clomp optimizer steps per outer iteration");
  c->add_option("--lr", f.lr, "clomp learning rate");
  c->add_option("--optimizer", f.optimizer, "clomp optimizer")
      ->check(CLI::IsMember({"plain", "momentum", "adam"}));
}

cskit::Optimizer parse_optimizer(const std::string& name) {
  if (name == "plain") return cskit::Optimizer::plain;
  if (name == "momentum") return cskit::Optimizer::momentum;
  if (name == "adam") return cskit::Optimizer::adam;
  throw ConfigError("unknown optimizer '" + name + "'");
}

cskit::ClompConfig clomp_config(const SolverFlags& f) {
  cskit::ClompConfig cfg;
  cfg.th = f.th;
  cfg.max_outer = f.max_iter;
  cfg.eps = f.eps;
  cfg.inner_steps = f.inner_steps;
  cfg.lr = f.lr;
  cfg.opt = parse_optimizer(f.optimizer);
  cfg.w_tv = f.w_tv;
  cfg.w_lv = f.w_lv;
  return cfg;
}

cskit::SolveResult run_one(const cskit::MeasurementSetup& setup,
                           const la::Vec& y, const SolverFlags& f,
                           std::size_t iht_k) {
  if (f.solver == "omp")
    return cskit::omp_solve(setup, y, {f.th, f.max_iter, f.eps});
  if (f.solver == "iht")
    return cskit::iht_solve(setup, y, {iht_k, f.t, f.max_iter, f.eps});
  if (f.solver == "ista")
    return cskit::ista_solve(setup, y, {f.lambda, f.t, f.max_iter, f.eps});
  if (f.solver == "clomp") return cskit::clomp_solve(setup, y, clomp_config(f));
  throw ConfigError("unknown solver '" + f.solver + "'");
}

// Key=value pairs of the resolved solver config, embedded in CSV metadata and
// the benchmark config column.
io::Meta config_kv(const SolverFlags& f, std::size_t iht_k) {
  io::Meta kv;
  const auto weight = [](double w) {
    return w < 0 ? std::string("auto") : io::format_g17(w);
  };
  if (f.solver == "omp") {
    kv = {{"th", io::format_g17(f.th)},
          {"max_iter", std::to_string(f.max_iter)},
          {"eps", io::format_g17(f.eps)}};
  } else if (f.solver == "iht") {
    kv = {{"k", std::to_string(iht_k)},
          {"t", io::format_g17(f.t)},
          {"max_iter", std::to_string(f.max_iter)},
          {"eps", io::format_g17(f.eps)}};
  } else if (f.solver == "ista") {
    kv = {{"lambda", io::format_g17(f.lambda)},
          {"t", io::format_g17(f.t)},
          {"max_iter", std::to_string(f.max_iter)},
          {"eps", io::format_g17(f.eps)}};
  } else {
    kv = {{"th", io::format_g17(f.th)},
          {"max_outer", std::to_string(f.max_iter)},
          {"eps", io::format_g17(f.eps)},
          {"inner_steps", std::to_string(f.inner_steps)},
          {"lr", io::format_g17(f.lr)},
          {"optimizer", f.optimizer},
          {"w_tv", weight(f.w_tv)},
          {"w_lv", weight(f.w_lv)}};
  }
  return kv;
}

json config_json(const SolverFlags& f, std::size_t iht_k) {
  json c;
  c["solver"] = f.solver;
  for (const auto& [k, v] : config_kv(f, iht_k)) {
    if (k == "k" || k == "max_iter" || k == "max_outer" || k == "inner_steps")
      c[k] = io::parse_u64(v, "config");
    else if (k == "optimizer" || v == "auto")
      c[k] = v;
    else
      c[k] = jnum(io::parse_double(v, "config"));
  }
  return c;
}

// iht needs an explicit sparsity; everything else ignores the value.
std::size_t resolve_iht_k(const SolverFlags& f,
                          const std::map<std::string, std::string>& meta,
                          const la::Vec* x, const cskit::SparseBasis& basis,
                          std::size_t n, const std::string& ctx) {
  if (f.solver != "iht") return 0;
  if (f.kr >= 0.0) return ratio_to_count(f.kr, n);
  const auto it = meta.find("kr");
  if (it != meta.end())
    return ratio_to_count(io::parse_double(it->second, ctx + ": kr metadata"),
                          n);
  if (x != nullptr) return ratio_to_count(cskit::sparse_rate(*x, basis), n);
  throw ConfigError(ctx + ": iht needs --kr (no kr metadata available)");
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string type = "signals";
  std::size_t n = 256;
  double kr = 0.1;
  std::size_t count = 1;
  double noise = 1e-3;
  std::uint64_t seed = 0;
  std::size_t height = 64;
  std::size_t width = 64;
  double kr_tol = 0.03;
  std::string output;
  std::string truth;
};

std::string default_truth_path(const std::string& output) {
  const auto dot = output.find_last_of('.');
  const auto slash = output.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return output + ".truth.csv";
  return output.substr(0, dot) + ".truth" + output.substr(dot);
}

void run_generate(const GenerateArgs& g) {
  if (g.type == "image") {
    const la::Mat source = cskit::noise_image(g.height, g.width, g.seed);
    const cskit::PreparedImage prep =
        cskit::prepare_image(source, {g.height, g.width, g.kr, g.kr_tol});
    io::write_pgm(g.output, prep.img,
                  {{"kr", io::format_g17(prep.achieved_kr)},
                   {"target_kr", io::format_g17(g.kr)},
                   {"kr_tol", io::format_g17(g.kr_tol)},
                   {"sigma", io::format_g17(prep.sigma)},
                   {"seed", std::to_string(g.seed)},
                   {"within_tol", prep.within_tol ? "1" : "0"}});
    std::cout << "wrote " << g.output << ": " << g.height << "x" << g.width
              << " kr=" << io::format_g17(prep.achieved_kr)
              << (prep.within_tol ? "" : " (target out of reach)") << "\n";
    return;
  }
  const cskit::SparseBasis basis = cskit::dct_basis(g.n);
  la::Mat truth_cols;
  const la::Mat x_cols = cskit::generate_signal_batch(
      {g.n, g.kr, g.noise, g.seed}, basis, g.count, &truth_cols);
  const std::size_t k = ratio_to_count(g.kr, g.n);
  const io::Meta meta{{"n", std::to_string(g.n)},
                      {"kr", io::format_g17(g.kr)},
                      {"k", std::to_string(k)},
                      {"noise", io::format_g17(g.noise)},
                      {"seed", std::to_string(g.seed)},
                      {"count", std::to_string(g.count)}};
  io::write_csv(g.output, "signals", meta, indexed_header("x", g.n),
                la::transpose(x_cols));
  const std::string tpath =
      g.truth.empty() ? default_truth_path(g.output) : g.truth;
  io::write_csv(tpath, "coefficients", meta, indexed_header("s", g.n),
                la::transpose(truth_cols));
  std::cout << "wrote " << g.output << " (" << g.count << " signals, n=" << g.n
            << ", k=" << k << ") and " << tpath << "\n";
}

// ---------------------------------------------------------------------------
// measure

struct MeasureArgs {
  std::string input;
  std::string output;
  double sr = 0.5;
  std::uint64_t seed = 0;
  double noise = 0.0;
};

void run_measure(const MeasureArgs& a) {
  const io::Csv sig = io::read_csv(a.input, "signals");
  const std::size_t n = sig.header.size();
  const std::size_t count = sig.rows.rows;
  if (count == 0) throw IoError(a.input + ": no signal rows");
  const cskit::MeasurementSetup setup = cskit::make_setup(n, a.sr, a.seed);
  cskit::Rng rng = noise_rng(a.seed);
  const cskit::MeasurementBatch batch =
      cskit::measure_batch(setup, la::transpose(sig.rows), a.noise, rng);
  const io::Meta meta{{"n", std::to_string(n)},
                      {"m", std::to_string(setup.m)},
                      {"sr", io::format_g17(a.sr)},
                      {"seed", std::to_string(a.seed)},
                      {"noise", io::format_g17(a.noise)},
                      {"count", std::to_string(count)}};
  io::write_csv(a.output, "measurements", meta, indexed_header("y", setup.m),
                la::transpose(batch.y));
  std::cout << "wrote " << a.output << " (" << count << " measurements, m="
            << setup.m << ")\n";
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructArgs {
  std::string input;
  std::string output;
  std::string report;
  std::string truth;
  double sr = 0.5;
  bool sr_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double noise = 0.0;
  SolverFlags f;
};

struct SolveTrace {
  std::vector<cskit::SignalMetrics> metrics;
  std::vector<std::uint64_t> iterations;
  std::vector<bool> converged;
  std::vector<double> residual_norm;
  double solver_s = 0.0;

  void add(const cskit::SolveResult& r) {
    iterations.push_back(r.iterations);
    converged.push_back(r.converged);
    residual_norm.push_back(r.final_residual_norm);
    solver_s += r.wall_time_s;
  }
};

json reconstruct_report(const ReconstructArgs& a,
                        const cskit::MeasurementSetup& setup, double noise,
                        std::size_t iht_k, const SolveTrace& trace,
                        bool have_truth) {
  json rep;
  rep["command"] = "reconstruct";
  rep["solver"] = a.f.solver;
  rep["setup"] = json{{"n", setup.n},
                      {"m", setup.m},
                      {"sr", jnum(setup.sr)},
                      {"seed", setup.seed},
                      {"noise", jnum(noise)},
                      {"hash", setup_hash(setup, noise)}};
  rep["config"] = config_json(a.f, iht_k);
  if (have_truth) {
    rep["signals"] = signals_json(trace.metrics);
    rep["aggregate"] = aggregate_json(trace.metrics);
  }
  json resid = json::array();
  for (double r : trace.residual_norm) resid.push_back(jnum(r));
  rep["solve"] = json{{"iterations", trace.iterations},
                      {"converged", trace.converged},
                      {"residual_norm", resid}};
  rep["timing"] = json{{"solver_s", trace.solver_s}};
  return rep;
}

void finish_reconstruct(const ReconstructArgs& a,
                        const cskit::MeasurementSetup& setup, double noise,
                        std::size_t iht_k, const SolveTrace& trace,
                        bool have_truth) {
  if (!a.report.empty())
    write_report(a.report,
                 reconstruct_report(a, setup, noise, iht_k, trace, have_truth));
  std::cout << "reconstructed " << trace.iterations.size() << " with "
            << a.f.solver;
  if (have_truth) {
    const Aggregate agg = aggregate_metrics(trace.metrics);
    std::cout << ", mean ssim " << io::format_g17(agg.mean_ssim);
  }
  std::cout << "\n";
}

io::Meta reconstruction_meta(const cskit::MeasurementSetup& setup, double noise,
                             std::size_t count, const SolverFlags& f,
                             std::size_t iht_k) {
  io::Meta meta{{"n", std::to_string(setup.n)},
                {"m", std::to_string(setup.m)},
                {"sr", io::format_g17(setup.sr)},
                {"seed", std::to_string(setup.seed)},
                {"noise", io::format_g17(noise)},
                {"count", std::to_string(count)},
                {"solver", f.solver}};
  for (auto& kv : config_kv(f, iht_k)) meta.push_back(std::move(kv));
  return meta;
}

void reconstruct_from_signals(const ReconstructArgs& a, const io::Csv& sig) {
  if (!a.sr_set)
    throw ConfigError("reconstruct from a signals file needs --sr");
  const std::size_t n = sig.header.size();
  const std::size_t count = sig.rows.rows;
  if (count == 0) throw IoError(a.input + ": no signal rows");
  const cskit::MeasurementSetup setup = cskit::make_setup(n, a.sr, a.seed);
  const cskit::SparseBasis basis{n, setup.basis};
  cskit::Rng rng = noise_rng(a.seed);
  const la::Mat x_cols = la::transpose(sig.rows);
  const cskit::MeasurementBatch batch =
      cskit::measure_batch(setup, x_cols, a.noise, rng);

  la::Mat recon(count, n);
  SolveTrace trace;
  std::size_t iht_k = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const la::Vec x = la::get_col(x_cols, j);
    iht_k = resolve_iht_k(a.f, sig.meta, &x, basis, n, a.input);
    const cskit::SolveResult res =
        run_one(setup, la::get_col(batch.y, j), a.f, iht_k);
    for (std::size_t i = 0; i < n; ++i) recon(j, i) = res.x_hat[i];
    trace.metrics.push_back(cskit::compare_signals(x, res.x_hat));
    trace.add(res);
  }
  io::write_csv(a.output, "reconstruction",
                reconstruction_meta(setup, a.noise, count, a.f, iht_k),
                indexed_header("x", n), recon);
  finish_reconstruct(a, setup, a.noise, iht_k, trace, true);
}

void reconstruct_from_measurements(const ReconstructArgs& a,
                                   const io::Csv& meas) {
  const auto n = static_cast<std::size_t>(meta_u64(meas, a.input, "n"));
  const double sr = meta_double(meas, a.input, "sr");
  const std::uint64_t seed = meta_u64(meas, a.input, "seed");
  const double noise = meta_double(meas, a.input, "noise");
  if (a.sr_set && a.sr != sr)
    throw ConfigError("--sr " + io::format_g17(a.sr) +
                      " conflicts with the file's sr=" + io::format_g17(sr));
  if (a.seed_set && a.seed != seed)
    throw ConfigError("--seed " + std::to_string(a.seed) +
                      " conflicts with the file's seed=" +
                      std::to_string(seed));
  const cskit::MeasurementSetup setup = cskit::make_setup(n, sr, seed);
  if (meas.header.size() != setup.m)
    throw DimensionError(a.input + ": " + std::to_string(meas.header.size()) +
                         " measurement columns but the setup has m=" +
                         std::to_string(setup.m));
  const std::size_t count = meas.rows.rows;
  if (count == 0) throw IoError(a.input + ": no measurement rows");

  const cskit::SparseBasis basis{n, setup.basis};
  io::Csv truth;
  bool have_truth = false;
  if (!a.truth.empty()) {
    truth = io::read_csv(a.truth, "signals");
    if (truth.header.size() != n)
      throw DimensionError(a.truth + ": signal length " +
                           std::to_string(truth.header.size()) +
                           " does not match n=" + std::to_string(n));
    if (truth.rows.rows != count)
      throw DimensionError(a.truth + ": " + std::to_string(truth.rows.rows) +
                           " signals for " + std::to_string(count) +
                           " measurements");
    have_truth = true;
  }

  la::Mat recon(count, n);
  SolveTrace trace;
  std::size_t iht_k = 0;
  for (std::size_t j = 0; j < count; ++j) {
    la::Vec y(setup.m);
    for (std::size_t i = 0; i < setup.m; ++i) y[i] = meas.rows(j, i);
    la::Vec x;
    if (have_truth) {
      x.resize(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = truth.rows(j, i);
    }
    iht_k = resolve_iht_k(a.f, have_truth ? truth.meta : meas.meta,
                          have_truth ? &x : nullptr, basis, n, a.input);
    const cskit::SolveResult res = run_one(setup, y, a.f, iht_k);
    for (std::size_t i = 0; i < n; ++i) recon(j, i) = res.x_hat[i];
    if (have_truth)
      trace.metrics.push_back(cskit::compare_signals(x, res.x_hat));
    trace.add(res);
  }
  io::write_csv(a.output, "reconstruction",
                reconstruction_meta(setup, noise, count, a.f, iht_k),
                indexed_header("x", n), recon);
  finish_reconstruct(a, setup, noise, iht_k, trace, have_truth);
}

void reconstruct_image(const ReconstructArgs& a) {
  std::map<std::string, std::string> pmeta;
  const la::Mat img = io::read_pgm(a.input, &pmeta);
  if (!a.sr_set) throw ConfigError("reconstruct from an image needs --sr");
  const std::size_t n = img.rows;  // columns are the signal batch
  const cskit::MeasurementSetup setup = cskit::make_setup(n, a.sr, a.seed);
  const cskit::SparseBasis basis{n, setup.basis};
  cskit::Rng rng = noise_rng(a.seed);
  const cskit::MeasurementBatch batch =
      cskit::measure_batch(setup, img, a.noise, rng);

  std::size_t iht_k = 0;
  if (a.f.solver == "iht") {
    double kr = a.f.kr;
    if (kr < 0.0) {
      const auto it = pmeta.find("kr");
      kr = it != pmeta.end()
               ? io::parse_double(it->second, a.input + ": kr metadata")
               : cskit::column_mean_sparse_rate(img, basis);
    }
    iht_k = ratio_to_count(kr, n);
  }

  la::Mat x_cols(n, img.cols);
  SolveTrace trace;
  if (a.f.solver == "clomp") {
    const cskit::BatchSolveResult res =
        cskit::clomp_solve_batch(setup, batch.y, clomp_config(a.f));
    x_cols = res.x_hat;
    trace.iterations.push_back(res.iterations);
    trace.converged.push_back(res.converged);
    trace.residual_norm.push_back(res.final_residual_norm);
    trace.solver_s = res.wall_time_s;
  } else {
    for (std::size_t j = 0; j < img.cols; ++j) {
      const cskit::SolveResult res =
          run_one(setup, la::get_col(batch.y, j), a.f, iht_k);
      la::set_col(x_cols, j, res.x_hat);
      trace.add(res);
    }
  }
  const la::Mat quantized = quantize_unit(x_cols);
  trace.metrics.push_back(cskit::compare_images(img, quantized));

  io::Meta meta{{"solver", a.f.solver},
                {"n", std::to_string(n)},
                {"m", std::to_string(setup.m)},
                {"sr", io::format_g17(a.sr)},
                {"seed", std::to_string(a.seed)},
                {"noise", io::format_g17(a.noise)}};
  for (auto& kv : config_kv(a.f, iht_k)) meta.push_back(std::move(kv));
  io::write_pgm(a.output, quantized, meta);
  if (!a.report.empty())
    write_report(a.report, reconstruct_report(a, setup, a.noise, iht_k, trace,
                                              true));
  std::cout << "reconstructed " << img.rows << "x" << img.cols << " with "
            << a.f.solver << ", ssim "
            << io::format_g17(trace.metrics[0].ssim) << "\n";
}

void run_reconstruct(const ReconstructArgs& a) {
  if (is_pgm(a.input)) {
    reconstruct_image(a);
    return;
  }
  const io::Csv in = io::read_csv(a.input);
  if (in.tag == "signals")
    reconstruct_from_signals(a, in);
  else if (in.tag == "measurements")
    reconstruct_from_measurements(a, in);
  else
    throw IoError(a.input + ": cannot reconstruct from a '" + in.tag +
                  "' file");
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string input;
  std::string truth;
  std::string report;
  std::string format = "json";
};

void run_evaluate(const EvaluateArgs& a) {
  std::vector<cskit::SignalMetrics> ms;
  if (is_pgm(a.input)) {
    const la::Mat rec = io::read_pgm(a.input);
    const la::Mat tr = io::read_pgm(a.truth);
    if (rec.rows != tr.rows || rec.cols != tr.cols)
      throw DimensionError(a.input + " is " + std::to_string(rec.rows) + "x" +
                           std::to_string(rec.cols) + " but " + a.truth +
                           " is " + std::to_string(tr.rows) + "x" +
                           std::to_string(tr.cols));
    ms.push_back(cskit::compare_images(tr, rec));
  } else {
    const io::Csv rec = io::read_csv(a.input);
    if (rec.tag != "reconstruction" && rec.tag != "signals")
      throw IoError(a.input + ": expected a 'reconstruction' or 'signals' " +
                    "file, got '" + rec.tag + "'");
    const io::Csv tr = io::read_csv(a.truth, "signals");
    if (rec.header.size() != tr.header.size())
      throw DimensionError(a.input + " and " + a.truth +
                           " have different signal lengths");
    if (rec.rows.rows != tr.rows.rows)
      throw DimensionError(a.input + " and " + a.truth +
                           " have different signal counts");
    const std::size_t n = tr.header.size();
    for (std::size_t j = 0; j < tr.rows.rows; ++j) {
      la::Vec x(n), xh(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = tr.rows(j, i);
        xh[i] = rec.rows(j, i);
      }
      ms.push_back(cskit::compare_signals(x, xh));
    }
  }

  const Aggregate agg = aggregate_metrics(ms);
  if (!a.report.empty()) {
    if (a.format == "csv") {
      la::Mat rows(ms.size(), 4);
      for (std::size_t j = 0; j < ms.size(); ++j) {
        rows(j, 0) = ms[j].mse;
        rows(j, 1) = ms[j].psnr;
        rows(j, 2) = ms[j].pcc ? *ms[j].pcc
                               : std::numeric_limits<double>::quiet_NaN();
        rows(j, 3) = ms[j].ssim;
      }
      const io::Meta meta{
          {"count", std::to_string(agg.count)},
          {"mean_mse", io::format_g17(agg.mean_mse)},
          {"mean_psnr", io::format_g17(agg.mean_psnr)},
          {"mean_pcc",
           agg.mean_pcc ? io::format_g17(*agg.mean_pcc) : "nan"},
          {"mean_ssim", io::format_g17(agg.mean_ssim)},
          {"median_ssim", io::format_g17(agg.median_ssim)}};
      io::write_csv(a.report, "metrics", meta,
                    {"mse", "psnr", "pcc", "ssim"}, rows);
    } else {
      json rep;
      rep["command"] = "evaluate";
      rep["signals"] = signals_json(ms);
      rep["aggregate"] = aggregate_json(ms);
      write_report(a.report, rep);
    }
  }
  std::cout << "evaluated " << ms.size() << ": mean ssim "
            << io::format_g17(agg.mean_ssim) << ", mean mse "
            << io::format_g17(agg.mean_mse) << "\n";
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkArgs {
  std::vector<std::size_t> n{256};
  std::vector<double> sr{0.5};
  std::vector<double> kr{0.1};
  std::vector<std::string> solvers{"omp"};
  std::size_t count = 10;
  std::uint64_t seed = 0;
  double noise = 1e-3;
  std::string output;
  SolverFlags f;
};

std::string sanitize_error(std::string msg) {
  for (char& c : msg)
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  return msg;
}

std::string kv_join(const io::Meta& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (!out.empty()) out += ';';
    out += k + "=" + v;
  }
  return out;
}

void run_benchmark(const BenchmarkArgs& b) {
  if (b.count == 0) throw ConfigError("benchmark needs --count > 0");
  std::string text = "# benchmark seed=" + std::to_string(b.seed) +
                     " count=" + std::to_string(b.count) +
                     " noise=" + io::format_g17(b.noise) + "\n";
  text +=
      "n,m,sr,kr,k,count,seed,solver,status,error,mean_ssim,median_ssim,"
      "p10_ssim,mean_psnr,mean_mse,mean_pcc,mean_iterations,converged,"
      "setup_hash,config,solver_s\n";

  std::size_t cell_idx = 0;
  std::size_t row_count = 0;
  for (const std::size_t n : b.n) {
    for (const double sr : b.sr) {
      for (const double kr : b.kr) {
        // One dataset per (n, sr, kr) cell, shared by every solver so their
        // rows are directly comparable.
        const std::uint64_t cell_seed = b.seed + 1000003ULL * cell_idx;
        ++cell_idx;
        const std::size_t k = ratio_to_count(kr, n);

        std::string cell_err;
        cskit::MeasurementSetup setup;
        la::Mat x_cols;
        la::Mat y_cols;
        try {
          const cskit::SparseBasis basis = cskit::dct_basis(n);
          x_cols = cskit::generate_signal_batch({n, kr, b.noise, cell_seed},
                                                basis, b.count);
          setup = cskit::make_setup(n, sr, cell_seed + 1);
          cskit::Rng rng = noise_rng(cell_seed + 1);
          y_cols = cskit::measure_batch(setup, x_cols, 0.0, rng).y;
        } catch (const std::exception& e) {
          cell_err = sanitize_error(e.what());
        }

        for (const std::string& solver : b.solvers) {
          SolverFlags sf = b.f;
          sf.solver = solver;
          sf.kr = kr;  // iht sparsity follows the cell

          const std::string prefix =
              std::to_string(n) + "," +
              (cell_err.empty() ? std::to_string(setup.m) : "0") + "," +
              io::format_g17(sr) + "," + io::format_g17(kr) + "," +
              std::to_string(k) + "," + std::to_string(b.count) + "," +
              std::to_string(cell_seed) + "," + solver + ",";
          const std::string config = kv_join(config_kv(sf, k));

          std::string err = cell_err;
          std::vector<cskit::SignalMetrics> ms;
          double iter_sum = 0.0;
          std::size_t converged = 0;
          double solver_s = 0.0;
          if (err.empty()) {
            try {
              for (std::size_t j = 0; j < b.count; ++j) {
                const cskit::SolveResult res =
                    run_one(setup, la::get_col(y_cols, j), sf, k);
                ms.push_back(cskit::compare_signals(la::get_col(x_cols, j),
                                                    res.x_hat));
                iter_sum += static_cast<double>(res.iterations);
                converged += res.converged ? 1 : 0;
                solver_s += res.wall_time_s;
              }
            } catch (const std::exception& e) {
              err = sanitize_error(e.what());
            }
          }

          if (err.empty()) {
            const Aggregate a = aggregate_metrics(ms);
            text += prefix + "ok,," + io::format_g17(a.mean_ssim) + "," +
                    io::format_g17(a.median_ssim) + "," +
                    io::format_g17(a.p10_ssim) + "," +
                    io::format_g17(a.mean_psnr) + "," +
                    io::format_g17(a.mean_mse) + "," +
                    (a.mean_pcc ? io::format_g17(*a.mean_pcc) : "nan") + "," +
                    io::format_g17(iter_sum / static_cast<double>(b.count)) +
                    "," + std::to_string(converged) + "," +
                    setup_hash(setup, 0.0) + "," + config + "," +
                    io::format_g17(solver_s) + "\n";
          } else {
            text += prefix + "failed," + err + ",nan,nan,nan,nan,nan,nan,nan," +
                    "0,," + config + ",nan\n";
          }
          ++row_count;
        }
      }
    }
  }
  io::write_text_file(b.output, text);
  std::cout << "wrote " << b.output << " (" << row_count << " rows)\n";
}

// ---------------------------------------------------------------------------
// min-sr

struct MinSrArgs {
  std::string input;
  std::string report;
  std::size_t row = 0;
  double target = 0.9;
  std::uint64_t seed = 0;
  SolverFlags f;
};

void run_min_sr(const MinSrArgs& a) {
  const io::Csv sig = io::read_csv(a.input, "signals");
  const std::size_t n = sig.header.size();
  if (a.row >= sig.rows.rows)
    throw ConfigError("--row " + std::to_string(a.row) +
                      " out of range; the file has " +
                      std::to_string(sig.rows.rows) + " signals");
  la::Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = sig.rows(a.row, i);

  json scan = json::array();
  bool reachable = false;
  double sr_min = 0.0;
  double total_s = 0.0;
  std::size_t iht_k = 0;
  // Fresh sensing matrix per rate: rate i/100 gets seed + i.
  for (int i = 1; i <= 100; ++i) {
    const double sr = static_cast<double>(i) / 100.0;
    const std::uint64_t sr_seed = a.seed + static_cast<std::uint64_t>(i);
    if (measure_count(n, sr) == 0) {
      scan.push_back(json{{"sr", jnum(sr)}, {"m", 0}, {"skipped", true}});
      continue;
    }
    try {
      const cskit::MeasurementSetup setup = cskit::make_setup(n, sr, sr_seed);
      const cskit::SparseBasis basis{n, setup.basis};
      iht_k = resolve_iht_k(a.f, sig.meta, &x, basis, n, a.input);
      cskit::Rng rng(0);  // noiseless; nothing is drawn
      const la::Vec y = cskit::measure(setup, x, 0.0, rng).y;
      const cskit::SolveResult res = run_one(setup, y, a.f, iht_k);
      total_s += res.wall_time_s;
      const cskit::SignalMetrics sm = cskit::compare_signals(x, res.x_hat);
      scan.push_back(json{{"sr", jnum(sr)},
                          {"m", setup.m},
                          {"seed", sr_seed},
                          {"ssim", jnum(sm.ssim)},
                          {"iterations", res.iterations},
                          {"converged", res.converged}});
      if (sm.ssim > a.target) {
        reachable = true;
        sr_min = sr;
        break;
      }
    } catch (const std::exception& e) {
      // A rate where the solver blows up is a failed rate, not a failed scan.
      scan.push_back(
          json{{"sr", jnum(sr)}, {"error", sanitize_error(e.what())}});
    }
  }

  json rep;
  rep["command"] = "min-sr";
  rep["solver"] = a.f.solver;
  rep["row"] = a.row;
  rep["target"] = jnum(a.target);
  rep["n"] = n;
  rep["seed"] = a.seed;
  rep["config"] = config_json(a.f, iht_k);
  rep["scan"] = scan;
  rep["reachable"] = reachable;
  rep["sr_min"] = reachable ? json(jnum(sr_min)) : json(nullptr);
  rep["timing"] = json{{"total_solver_s", total_s}};
  if (!a.report.empty()) write_report(a.report, rep);
  if (reachable)
    std::cout << "sr_min=" << io::format_g17(sr_min) << " for ssim > "
              << io::format_g17(a.target) << "\n";
  else
    std::cout << "target ssim " << io::format_g17(a.target)
              << " unreachable at sr=1\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"training-free compressed sensing toolkit"};
  app.require_subcommand(1);

  GenerateArgs g;
  auto* cg = app.add_subcommand("generate",
                                "synthesize sparse signals or a test image");
  cg->add_option("--type", g.type, "signals | image")
      ->check(CLI::IsMember({"signals", "image"}));
  cg->add_option("--n", g.n, "signal length");
  cg->add_option("--kr", g.kr, "sparsity ratio (or image target rate)");
  cg->add_option("--count", g.count, "number of signals");
  cg->add_option("--noise", g.noise, "coefficient noise sigma");
  cg->add_option("--seed", g.seed, "generator seed");
  cg->add_option("--height", g.height, "image height");
  cg->add_option("--width", g.width, "image width");
  cg->add_option("--kr-tol", g.kr_tol, "image target rate tolerance");
  cg->add_option("--output", g.output, "signals CSV or image PGM path")
      ->required();
  cg->add_option("--truth", g.truth,
                 "coefficient CSV path (default: <output>.truth.csv)");
  cg->callback([&g] { run_generate(g); });

  MeasureArgs m;
  auto* cm = app.add_subcommand("measure",
                                "project signals into measurements");
  cm->add_option("--input", m.input, "signals CSV")->required();
  cm->add_option("--sr", m.sr, "sampling rate in (0,1]");
  cm->add_option("--seed", m.seed, "sensing matrix seed");
  cm->add_option("--noise", m.noise, "measurement noise sigma");
  cm->add_option("--output", m.output, "measurements CSV path")->required();
  cm->callback([&m] { run_measure(m); });

  ReconstructArgs r;
  auto* cr = app.add_subcommand(
      "reconstruct", "recover signals from measurements or a signals file");
  cr->add_option("--input", r.input,
                 "signals CSV, measurements CSV, or image PGM")
      ->required();
  auto* r_sr = cr->add_option("--sr", r.sr, "sampling rate in (0,1]");
  auto* r_seed = cr->add_option("--seed", r.seed, "sensing matrix seed");
  cr->add_option("--noise", r.noise, "measurement noise sigma");
  cr->add_option("--truth", r.truth, "signals CSV for metrics "
                                     "(measurements input only)");
  cr->add_option("--output", r.output, "reconstruction CSV or PGM path")
      ->required();
  cr->add_option("--report", r.report, "metrics report JSON path");
  add_solver_flags(cr, r.f);
  cr->callback([&r, r_sr, r_seed] {
    r.sr_set = r_sr->count() > 0;
    r.seed_set = r_seed->count() > 0;
    run_reconstruct(r);
  });

  EvaluateArgs e;
  auto* ce = app.add_subcommand("evaluate",
                                "score a reconstruction against ground truth");
  ce->add_option("--input", e.input, "reconstruction CSV or PGM")->required();
  ce->add_option("--truth", e.truth, "signals CSV or PGM")->required();
  ce->add_option("--report", e.report, "report path");
  ce->add_option("--format", e.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  ce->callback([&e] { run_evaluate(e); });

  BenchmarkArgs b;
  auto* cb = app.add_subcommand("benchmark",
                                "sweep a (n, sr, kr) x solver grid");
  cb->add_option("--n", b.n, "signal lengths")->delimiter(',');
  cb->add_option("--sr", b.sr, "sampling rates")->delimiter(',');
  cb->add_option("--kr", b.kr, "sparsity ratios")->delimiter(',');
  cb->add_option("--solvers", b.solvers, "solvers to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"omp", "iht", "ista", "clomp"}));
  cb->add_option("--count", b.count, "signals per cell");
  cb->add_option("--seed", b.seed, "base seed; cells derive their own");
  cb->add_option("--noise", b.noise, "coefficient noise sigma");
  cb->add_option("--output", b.output, "long-format CSV path")->required();
  add_solver_flags(cb, b.f, /*with_solver=*/false, /*with_kr=*/false);
  cb->callback([&b] { run_benchmark(b); });

  MinSrArgs ms;
  auto* cs = app.add_subcommand(
      "min-sr", "smallest sampling rate whose reconstruction beats a target");
  cs->add_option("--input", ms.input, "signals CSV")->required();
  cs->add_option("--row", ms.row, "which signal to scan");
  cs->add_option("--target", ms.target, "SSIM target to beat");
  cs->add_option("--seed", ms.seed, "base seed; each rate derives its own");
  cs->add_option("--report", ms.report, "scan report JSON path");
  add_solver_flags(cs, ms.f);
  cs->callback([&ms] { run_min_sr(ms); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const IoError& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 3;
  } catch (const DimensionError& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "numerical error: " << ex.what() << "\n";
    return 4;
  }
  return 0;
}
