#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "oca/errors.hpp"
#include "oca/experiments.hpp"
#include "oca/io.hpp"
#include "oca/metrics.hpp"

namespace oca::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct WindowOpts {
  int future = 4;
  int past = -1;  // -1: twice the future size
  bool full = false;

  int past_size() const { return past < 0 ? 2 * future : past; }
  OcaPlan plan(const Lattice& lattice, const Executor& executor) const {
    return full ? build_full_plan(lattice) : build_oca_plan(lattice, past_size(), future, {}, executor);
  }
};

struct PriorOpts {
  std::vector<double> c;
  double sigma0 = 0.1;
  double alpha = 1.5;
  double eta = 0.135;

  Priors priors() const { return {c, sigma0, alpha, eta}; }
};

struct SimulateOpts {
  int rows = 0, cols = 0, k = 2;
  double beta = 0.35;
  std::string sampler = "sw";
  int sweeps = 1000;
  WindowOpts window;
  std::vector<double> mu, sigma;
  std::string out, obs_out;
};

struct CurveOpts {
  std::string field, obs, sd;
  int k = 0;
  std::vector<double> mu, sigma;
  std::vector<double> betas;
  double beta_min = 0.0, beta_max = 1.0, beta_step = 0.05;
  WindowOpts window;
  bool exact = false;
  std::string out;
};

struct FitOpts {
  std::string field;
  int k = 0;
  std::string objective = "both";
  double beta_max = 2.0;
  WindowOpts window;
  int replicates = 0;
  int rows = 12, cols = 12;
  double beta = 0.35;
  std::vector<int> future_sizes{4, 6};
  int sweeps = 1000;
  std::string out, summary_out;
};

struct SampleOpts {
  int rows = 0, cols = 0, k = 3;
  std::vector<double> betas;
  int replicates = 60;
  std::string sampler = "oca";
  int sweeps = 500;
  WindowOpts window;
  std::string out, summary_out;
};

struct GibbsOpts {
  std::string obs, sd, truth;
  int k = 3;
  std::string model = "oca";
  WindowOpts window{2, -1, false};
  int iterations = 1000, burn_in = 500;
  double proposal_sd = 0.05;
  PriorOpts prior;
  std::vector<double> dirichlet;
  std::string out_dir;
};

struct HeldOutOpts {
  std::string obs, sd;
  int k = 3;
  WindowOpts window{2, -1, false};
  int iterations = 200, burn_in = 100;
  double proposal_sd = 0.05;
  PriorOpts prior;
  double fraction = 0.1;
  int repetitions = 10;
  int draws = 10;
  bool write_samples = false;
  std::string out_dir;
};

struct BenchOpts {
  std::vector<int> sizes{32, 64, 128};
  std::vector<int> future_sizes{4};
  int past = -1;
  std::vector<int> threads{1, 2, 4};
  int k = 2;
  double beta = 0.35;
  int reps = 3;
  std::string out;
};

struct Context {
  const CLI::App& app;
  std::ostream& out;
  std::ostream& err;
  Executor executor;
  std::uint64_t seed;
};

// 64-bit FNV-1a, stable across platforms.
std::string fingerprint(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

void write_manifest(const fs::path& path, const Context& ctx, const std::string& command,
                    const std::vector<std::string>& outputs, json extra = json::object()) {
  const std::string config = ctx.app.config_to_str(false, false);
  json m = {{"tool", "oca"},
            {"version", kVersion},
            {"command", command},
            {"seed", ctx.seed},
            {"threads", ctx.executor.threads()},
            {"config_hash", fingerprint(config)},
            {"config", config},
            {"outputs", outputs}};
  m.update(extra);
  auto out = io::open_output(path);
  out << m.dump(2) << '\n';
}

void add_windows(CLI::App* cmd, WindowOpts& w, bool allow_full) {
  cmd->add_option("--mf", w.future, "Future conditioning set size")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--mg", w.past, "Past conditioning set size (default 2 * mf)")->capture_default_str();
  if (allow_full) cmd->add_flag("--full", w.full, "Condition on every earlier and later site");
}

void add_priors(CLI::App* cmd, PriorOpts& p) {
  cmd->add_option("--prior-mean", p.c, "Prior class means (default: k-means centers)");
  cmd->add_option("--sigma0", p.sigma0, "Prior sd of the class means")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--alpha", p.alpha, "Inverse-gamma shape")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--eta", p.eta, "Inverse-gamma scale")->check(CLI::PositiveNumber)->capture_default_str();
}

struct LoadedObservations {
  ObservationField obs;
  int rows = 0;
  int cols = 0;
};

LoadedObservations load_observations(const std::string& path, const std::string& sd_path) {
  const auto grid = io::read_observations(path);
  LoadedObservations out{{grid.values, {}}, grid.rows, grid.cols};
  if (!sd_path.empty()) {
    const auto sd = io::read_optional_grid(sd_path);
    if (sd.rows != grid.rows || sd.cols != grid.cols) {
      throw io::InputError(sd_path + ": shape differs from the observations");
    }
    out.obs.sd_override = sd.values;
  }
  out.obs.validate();
  return out;
}

EmissionModel emission_from(const std::vector<double>& mu, const std::vector<double>& sigma, int k) {
  if (static_cast<int>(mu.size()) != k || static_cast<int>(sigma.size()) != k) {
    throw std::domain_error("need --mu and --sigma with one value per class");
  }
  EmissionModel e{mu, sigma};
  e.validate();
  return e;
}

std::vector<double> beta_grid(const std::vector<double>& listed, double lo, double hi, double step) {
  if (!listed.empty()) return listed;
  if (!(step > 0.0) || hi < lo) throw std::domain_error("invalid beta grid");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> betas;
  for (int s = 0; s < count; ++s) betas.push_back(lo + s * step);
  return betas;
}

const char* objective_name(Objective o) { return o == Objective::oca ? "oca" : "pseudo"; }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------

void cmd_simulate(const SimulateOpts& o, const Context& ctx) {
  const Lattice lattice(o.rows, o.cols);
  Rng rng = make_rng(ctx.seed);
  LabelField z;
  if (o.sampler == "sw") {
    z = swendsen_wang_sample(lattice, o.beta, o.k, o.sweeps, rng);
  } else if (o.sampler == "exact") {
    z = exact_sample(lattice, o.beta, o.k, rng);
  } else {
    z = oca_sample(o.window.plan(lattice, ctx.executor), o.beta, o.k, rng);
  }
  io::write_label_grid(o.out, z, o.rows, o.cols);
  std::vector<std::string> outputs{o.out};
  if (!o.obs_out.empty()) {
    const EmissionModel e = emission_from(o.mu, o.sigma, o.k);
    std::vector<double> y;
    for (int label : z.labels()) {
      const auto j = static_cast<std::size_t>(label);
      y.push_back(e.mu[j] + e.sigma[j] * standard_normal(rng));
    }
    io::write_real_grid(o.obs_out, y, o.rows, o.cols);
    outputs.push_back(o.obs_out);
  }
  ctx.out << "S," << summary_stat(z, lattice) << '\n';
  write_manifest(o.out + ".manifest.json", ctx, "simulate", outputs);
}

void cmd_loglik_curve(const CurveOpts& o, const Context& ctx) {
  if (o.field.empty() == o.obs.empty()) throw std::domain_error("give exactly one of --field and --obs");
  const std::vector<double> betas = beta_grid(o.betas, o.beta_min, o.beta_max, o.beta_step);
  std::vector<double> values(betas.size()), exact(betas.size());

  if (!o.field.empty()) {
    const auto grid = io::read_label_grid(o.field);
    const LabelField z = io::to_field(grid, o.k);
    const Lattice lattice(grid.rows, grid.cols);
    const OcaLikelihood likelihood(o.window.plan(lattice, ctx.executor), z, ctx.executor);
    ctx.executor.for_each(betas.size(), [&](std::size_t b) { values[b] = likelihood(betas[b]); });
    if (o.exact) {
      const ExactPartition partition(lattice, z.k());
      for (std::size_t b = 0; b < betas.size(); ++b) {
        exact[b] = log_potential(z, lattice, betas[b]) - partition.log_normalizer(betas[b]);
      }
    }
  } else {
    const auto data = load_observations(o.obs, o.sd);
    const int k = o.k > 0 ? o.k : static_cast<int>(o.mu.size());
    const EmissionModel e = emission_from(o.mu, o.sigma, k);
    const Lattice lattice(data.rows, data.cols);
    const OcaMarginalLikelihood likelihood(o.window.plan(lattice, ctx.executor), data.obs, e, ctx.executor);
    ctx.executor.for_each(betas.size(), [&](std::size_t b) { values[b] = likelihood(betas[b]); });
    if (o.exact) {
      for (std::size_t b = 0; b < betas.size(); ++b) {
        exact[b] = exact_marginal_log_likelihood(data.obs, betas[b], e, lattice);
      }
    }
  }
  for (std::size_t b = 0; b < betas.size(); ++b) {
    if (!std::isfinite(values[b])) throw NumericalError("log-likelihood is not finite", betas[b]);
  }

  auto out = io::open_output(o.out);
  out << "beta,loglik" << (o.exact ? ",exact" : "") << '\n';
  for (std::size_t b = 0; b < betas.size(); ++b) {
    out << betas[b] << ',' << values[b];
    if (o.exact) out << ',' << exact[b];
    out << '\n';
  }
  const auto best = std::max_element(values.begin(), values.end()) - values.begin();
  ctx.out << "argmax_beta," << betas[static_cast<std::size_t>(best)] << '\n';
}

void cmd_fit(const FitOpts& o, const Context& ctx) {
  if (o.field.empty() == (o.replicates == 0)) {
    throw std::domain_error("give exactly one of --field and --replicates");
  }
  if (!o.field.empty()) {
    const auto grid = io::read_label_grid(o.field);
    const LabelField z = io::to_field(grid, o.k);
    const Lattice lattice(grid.rows, grid.cols);
    const OcaPlan plan = o.window.plan(lattice, ctx.executor);
    std::vector<Objective> objectives;
    if (o.objective != "pseudo") objectives.push_back(Objective::oca);
    if (o.objective != "oca") objectives.push_back(Objective::pseudo);

    std::ofstream file;
    if (!o.out.empty()) {
      file = io::open_output(o.out);
      file << "objective,beta,loglik,at_boundary\n";
    }
    ctx.out << "objective,beta,loglik,at_boundary,seconds\n";
    for (Objective objective : objectives) {
      const auto start = std::chrono::steady_clock::now();
      const BetaFit fit = fit_beta(z, plan, objective, o.beta_max, 1e-4, ctx.executor);
      const double secs = seconds_since(start);
      ctx.out << objective_name(objective) << ',' << fit.beta << ',' << fit.objective << ','
              << fit.at_boundary << ',' << secs << '\n';
      if (file.is_open()) {
        file << objective_name(objective) << ',' << fit.beta << ',' << fit.objective << ','
             << fit.at_boundary << '\n';
      }
      if (fit.at_boundary) {
        ctx.err << "warning: " << objective_name(objective) << " estimate " << fit.beta
                << " lies on the search boundary\n";
      }
    }
    return;
  }

  EstimationStudy study;
  study.lattice = Lattice(o.rows, o.cols);
  study.k = o.k > 0 ? o.k : 2;
  study.beta = o.beta;
  study.replicates = o.replicates;
  study.future_sizes = o.future_sizes;
  study.sweeps = o.sweeps;
  study.beta_max = o.beta_max;
  study.seed = ctx.seed;
  const auto rows = run_estimation_study(study, ctx.executor);
  std::vector<std::string> outputs;
  if (!o.out.empty()) {
    auto file = io::open_output(o.out);
    file << "replicate,objective,m_f,estimate,at_boundary\n";
    for (const auto& r : rows) {
      file << r.replicate + 1 << ',' << objective_name(r.objective) << ',' << r.future_size << ','
           << r.estimate << ',' << r.at_boundary << '\n';
    }
    outputs.push_back(o.out);
  }
  std::ostringstream table;
  table << std::setprecision(17) << "objective,m_f,mean,rmse\n";
  for (const auto& s : summarize_estimates(rows, o.beta)) {
    table << objective_name(s.objective) << ',' << s.future_size << ',' << s.mean << ',' << s.rmse << '\n';
  }
  ctx.out << table.str();
  if (!o.summary_out.empty()) {
    io::open_output(o.summary_out) << table.str();
    outputs.push_back(o.summary_out);
  }
  if (!outputs.empty()) write_manifest(outputs.front() + ".manifest.json", ctx, "fit", outputs);
}

void cmd_sample(const SampleOpts& o, const Context& ctx) {
  SummaryExperiment exp;
  exp.lattice = Lattice(o.rows, o.cols);
  exp.k = o.k;
  exp.betas = o.betas;
  exp.replicates = o.replicates;
  exp.sampler = o.sampler == "sw" ? SamplerKind::swendsen_wang : SamplerKind::oca;
  exp.past_size = o.window.past_size();
  exp.future_size = o.window.future;
  exp.sweeps = o.sweeps;
  exp.seed = ctx.seed;
  const auto rows = run_summary_experiment(exp, ctx.executor);
  auto file = io::open_output(o.out);
  file << "beta,replicate,stat\n";
  for (const auto& r : rows) file << r.beta << ',' << r.replicate + 1 << ',' << r.stat << '\n';
  std::ostringstream table;
  table << std::setprecision(17) << "beta,mean,sd\n";
  for (const auto& s : summarize(rows)) table << s.beta << ',' << s.mean << ',' << s.sd << '\n';
  ctx.out << table.str();
  std::vector<std::string> outputs{o.out};
  if (!o.summary_out.empty()) {
    io::open_output(o.summary_out) << table.str();
    outputs.push_back(o.summary_out);
  }
  write_manifest(o.out + ".manifest.json", ctx, "sample", outputs);
}

void write_trace(const fs::path& path, const SegmentationResult& result, int k) {
  auto out = io::open_output(path);
  out << "iter,beta";
  for (int j = 1; j <= k; ++j) out << ",mu_" << j;
  for (int j = 1; j <= k; ++j) out << ",sigma_" << j;
  out << '\n';
  for (const TraceRow& row : result.trace) {
    out << row.iteration << ',' << row.beta;
    for (double v : row.mu) out << ',' << v;
    for (double v : row.sigma) out << ',' << v;
    out << '\n';
  }
}

void cmd_gibbs(const GibbsOpts& o, const Context& ctx) {
  const auto data = load_observations(o.obs, o.sd);
  const Lattice lattice(data.rows, data.cols);
  const OcaPlan plan = o.window.plan(lattice, ctx.executor);
  SegmentConfig config;
  config.k = o.k;
  config.model = o.model == "gmm" ? SegmentModel::gmm : SegmentModel::oca;
  config.iterations = o.iterations;
  config.burn_in = o.burn_in;
  config.proposal_sd = o.proposal_sd;
  config.priors = o.prior.priors();
  config.dirichlet = o.dirichlet;
  Rng rng = make_rng(ctx.seed);
  const Segmentation seg = segment(data.obs, plan, config, rng, ctx.executor);
  if (!seg.init.kmeans.converged) ctx.err << "warning: k-means stopped at its iteration cap\n";
  const SegmentationResult& r = seg.result;

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  io::write_label_grid(dir / "hpp.csv", LabelField(o.k, r.hpp), data.rows, data.cols);
  outputs.push_back("hpp.csv");
  for (int j = 0; j < o.k; ++j) {
    const std::string name = "prob_" + std::to_string(j + 1) + ".csv";
    const Eigen::VectorXd col = r.probabilities.col(j);
    io::write_real_grid(dir / name, {col.data(), col.data() + col.size()}, data.rows, data.cols);
    outputs.push_back(name);
  }
  write_trace(dir / "trace.csv", r, o.k);
  outputs.push_back("trace.csv");

  ctx.out << "retained," << r.retained << '\n'
          << "beta," << r.state.beta << '\n'
          << "acceptance_rate," << r.acceptance_rate << '\n';
  if (!o.truth.empty()) {
    const LabelField truth = io::to_field(io::read_label_grid(o.truth), o.k);
    const double brier = brier_score(r.probabilities, truth.labels());
    auto scores = io::open_output(dir / "scores.csv");
    scores << "metric,value\nbrier," << brier << '\n';
    outputs.push_back("scores.csv");
    ctx.out << "brier," << brier << '\n';
  }
  write_manifest(dir / "manifest.json", ctx, "gibbs", outputs);
}

void cmd_predict_heldout(const HeldOutOpts& o, const Context& ctx) {
  if (!(o.fraction > 0.0 && o.fraction < 1.0)) throw std::domain_error("--fraction must lie in (0, 1)");
  const auto data = load_observations(o.obs, o.sd);
  const Lattice lattice(data.rows, data.cols);
  const OcaPlan plan = o.window.plan(lattice, ctx.executor);
  SegmentConfig config;
  config.k = o.k;
  config.iterations = o.iterations;
  config.burn_in = o.burn_in;
  config.proposal_sd = o.proposal_sd;
  config.priors = o.prior.priors();
  HeldOutStudy study{o.fraction, o.repetitions, o.draws, ctx.seed};
  const auto runs = run_heldout_study(data.obs, plan, config, study, ctx.executor);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> outputs{"crps.csv", "repetitions.csv"};
  auto reps = io::open_output(dir / "repetitions.csv");
  reps << "repetition,seed,stream,sites,oca_crps,gmm_crps\n";
  double oca = 0.0, gmm = 0.0;
  int scored = 0;
  for (const auto& run : runs) {
    reps << run.repetition + 1 << ',' << ctx.seed << ',' << run.repetition << ',' << run.sites.size();
    if (run.sites.empty()) {
      reps << ",NA,NA\n";
      continue;
    }
    reps << ',' << run.oca_crps << ',' << run.gmm_crps << '\n';
    oca += run.oca_crps;
    gmm += run.gmm_crps;
    ++scored;
    if (o.write_samples) {
      for (auto [name, samples] : {std::pair{"oca", &run.oca_samples}, {"gmm", &run.gmm_samples}}) {
        const std::string file = "predictive_" + std::string(name) + "_" + std::to_string(run.repetition + 1) + ".csv";
        auto out = io::open_output(dir / file);
        out << "site,draw,value\n";
        for (std::size_t s = 0; s < run.sites.size(); ++s) {
          for (std::size_t d = 0; d < (*samples)[s].size(); ++d) {
            out << run.sites[s] + 1 << ',' << d + 1 << ',' << (*samples)[s][d] << '\n';
          }
        }
        outputs.push_back(file);
      }
    }
  }
  auto crps = io::open_output(dir / "crps.csv");
  crps << "metric,value\n";
  if (scored > 0) {
    crps << "oca_mean_crps," << oca / scored << "\ngmm_mean_crps," << gmm / scored << '\n';
    ctx.out << "oca_mean_crps," << oca / scored << "\ngmm_mean_crps," << gmm / scored << '\n';
  } else {
    ctx.out << "no held-out sites\n";
  }
  write_manifest(dir / "manifest.json", ctx, "predict-heldout", outputs,
                 {{"repetition_streams", "repetition r uses stream r - 1 of the seed"}});
}

void cmd_benchmark(const BenchOpts& o, const Context& ctx) {
  std::ostringstream table;
  table << std::setprecision(6) << "n,m_f,threads,seconds\n";
  Rng rng = make_rng(ctx.seed);
  for (int mf : o.future_sizes) {
    for (int side : o.sizes) {
      const Lattice lattice(side, side);
      const OcaPlan plan = build_oca_plan(lattice, o.past < 0 ? 2 * mf : o.past, mf);
      const LabelField z = swendsen_wang_sample(lattice, o.beta, o.k, 20, rng);
      for (int threads : o.threads) {
        const Executor executor(threads);
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < o.reps; ++r) {
          const auto start = std::chrono::steady_clock::now();
          const double value = oca_log_likelihood(z, o.beta, plan, executor);
          best = std::min(best, seconds_since(start));
          if (!std::isfinite(value)) throw NumericalError("log-likelihood is not finite", o.beta);
        }
        table << lattice.size() << ',' << mf << ',' << threads << ',' << best << '\n';
      }
    }
  }
  ctx.out << table.str();
  if (!o.out.empty()) io::open_output(o.out) << table.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ordered conditional approximation of Potts models", "oca"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "INI file of option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  std::uint64_t seed = 1;
  std::string write_config;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--write-config", write_config, "Write the given options to this file in --config form")
      ->configurable(false);

  const auto samplers = CLI::IsMember({"oca", "sw", "exact"});

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "Draw a Potts field, optionally with Gaussian noise");
  c_sim->add_option("--rows", sim.rows)->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--cols", sim.cols)->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--k", sim.k, "Number of classes")->check(CLI::Range(2, 64))->capture_default_str();
  c_sim->add_option("--beta", sim.beta, "Inverse temperature")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_sim->add_option("--sampler", sim.sampler, "oca, sw or exact")->check(samplers)->capture_default_str();
  c_sim->add_option("--sweeps", sim.sweeps, "Swendsen-Wang sweeps")->check(CLI::NonNegativeNumber)->capture_default_str();
  add_windows(c_sim, sim.window, true);
  c_sim->add_option("--mu", sim.mu, "Class means for the observations");
  c_sim->add_option("--sigma", sim.sigma, "Class sds for the observations");
  c_sim->add_option("--out", sim.out, "Label CSV")->required();
  c_sim->add_option("--obs-out", sim.obs_out, "Observation CSV");

  CurveOpts curve;
  auto* c_curve = app.add_subcommand("loglik-curve", "Approximate log-likelihood over a beta grid");
  c_curve->add_option("--field", curve.field, "Label CSV (observed model)");
  c_curve->add_option("--obs", curve.obs, "Observation CSV or PGM (hidden model)");
  c_curve->add_option("--sd", curve.sd, "Per-site sd override CSV (empty or NA: none)");
  c_curve->add_option("--k", curve.k, "Number of classes (default: from the data)");
  c_curve->add_option("--mu", curve.mu, "Emission means (hidden model)");
  c_curve->add_option("--sigma", curve.sigma, "Emission sds (hidden model)");
  c_curve->add_option("--betas", curve.betas, "Explicit beta values");
  c_curve->add_option("--beta-min", curve.beta_min)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_curve->add_option("--beta-max", curve.beta_max)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_curve->add_option("--beta-step", curve.beta_step)->check(CLI::PositiveNumber)->capture_default_str();
  add_windows(c_curve, curve.window, true);
  c_curve->add_flag("--exact", curve.exact, "Add an exact enumeration column (tiny grids)");
  c_curve->add_option("--out", curve.out, "Output CSV")->required();

  FitOpts fit;
  auto* c_fit = app.add_subcommand("fit", "Estimate beta from a label field or from simulated replicates");
  c_fit->add_option("--field", fit.field, "Label CSV");
  c_fit->add_option("--k", fit.k, "Number of classes (default: from the data)");
  c_fit->add_option("--objective", fit.objective, "oca, pseudo or both")
      ->check(CLI::IsMember({"oca", "pseudo", "both"}))->capture_default_str();
  c_fit->add_option("--beta-max", fit.beta_max, "Upper end of the search interval")->check(CLI::PositiveNumber)->capture_default_str();
  add_windows(c_fit, fit.window, true);
  c_fit->add_option("--replicates", fit.replicates, "Simulate this many fields instead of reading one")->check(CLI::NonNegativeNumber);
  c_fit->add_option("--rows", fit.rows)->check(CLI::PositiveNumber)->capture_default_str();
  c_fit->add_option("--cols", fit.cols)->check(CLI::PositiveNumber)->capture_default_str();
  c_fit->add_option("--beta", fit.beta, "True beta of the replicates")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_fit->add_option("--mf-list", fit.future_sizes, "Future set sizes for the replicate study")->capture_default_str();
  c_fit->add_option("--sweeps", fit.sweeps, "Swendsen-Wang sweeps per replicate")->check(CLI::PositiveNumber)->capture_default_str();
  c_fit->add_option("--out", fit.out, "Estimates CSV");
  c_fit->add_option("--summary-out", fit.summary_out, "Replicate summary CSV");

  SampleOpts smp;
  auto* c_smp = app.add_subcommand("sample", "Summary statistic of repeated draws over a beta grid");
  c_smp->add_option("--rows", smp.rows)->required()->check(CLI::PositiveNumber);
  c_smp->add_option("--cols", smp.cols)->required()->check(CLI::PositiveNumber);
  c_smp->add_option("--k", smp.k)->check(CLI::Range(2, 64))->capture_default_str();
  c_smp->add_option("--betas", smp.betas)->required()->check(CLI::NonNegativeNumber);
  c_smp->add_option("--replicates", smp.replicates)->check(CLI::PositiveNumber)->capture_default_str();
  c_smp->add_option("--sampler", smp.sampler, "oca or sw")->check(CLI::IsMember({"oca", "sw"}))->capture_default_str();
  c_smp->add_option("--sweeps", smp.sweeps)->check(CLI::NonNegativeNumber)->capture_default_str();
  add_windows(c_smp, smp.window, false);
  c_smp->add_option("--out", smp.out, "Per-draw CSV")->required();
  c_smp->add_option("--summary-out", smp.summary_out, "Per-beta summary CSV");

  GibbsOpts gib;
  auto* c_gib = app.add_subcommand("gibbs", "Segment observations with the hidden Potts or mixture sampler");
  c_gib->add_option("--obs", gib.obs, "Observation CSV or PGM")->required();
  c_gib->add_option("--sd", gib.sd, "Per-site sd override CSV");
  c_gib->add_option("--truth", gib.truth, "True label CSV for scoring");
  c_gib->add_option("--k", gib.k)->check(CLI::Range(2, 64))->capture_default_str();
  c_gib->add_option("--model", gib.model, "oca or gmm")->check(CLI::IsMember({"oca", "gmm"}))->capture_default_str();
  add_windows(c_gib, gib.window, false);
  c_gib->add_option("--iterations", gib.iterations)->check(CLI::PositiveNumber)->capture_default_str();
  c_gib->add_option("--burn-in", gib.burn_in)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_gib->add_option("--proposal-sd", gib.proposal_sd)->check(CLI::NonNegativeNumber)->capture_default_str();
  add_priors(c_gib, gib.prior);
  c_gib->add_option("--dirichlet", gib.dirichlet, "Mixture weight prior (default 1/k each)");
  c_gib->add_option("--out-dir", gib.out_dir)->required();

  HeldOutOpts ho;
  auto* c_ho = app.add_subcommand("predict-heldout", "Score held-out predictions of both samplers by CRPS");
  c_ho->add_option("--obs", ho.obs, "Observation CSV or PGM")->required();
  c_ho->add_option("--sd", ho.sd, "Per-site sd override CSV");
  c_ho->add_option("--k", ho.k)->check(CLI::Range(2, 64))->capture_default_str();
  add_windows(c_ho, ho.window, false);
  c_ho->add_option("--iterations", ho.iterations)->check(CLI::PositiveNumber)->capture_default_str();
  c_ho->add_option("--burn-in", ho.burn_in)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_ho->add_option("--proposal-sd", ho.proposal_sd)->check(CLI::NonNegativeNumber)->capture_default_str();
  add_priors(c_ho, ho.prior);
  c_ho->add_option("--fraction", ho.fraction, "Share of sites held out")->capture_default_str();
  c_ho->add_option("--repetitions", ho.repetitions)->check(CLI::PositiveNumber)->capture_default_str();
  c_ho->add_option("--draws", ho.draws, "Predictive draws per site and retained iteration")->check(CLI::PositiveNumber)->capture_default_str();
  c_ho->add_flag("--write-samples", ho.write_samples, "Write the pooled predictive samples");
  c_ho->add_option("--out-dir", ho.out_dir)->required();

  BenchOpts bench;
  auto* c_bench = app.add_subcommand("benchmark", "Time likelihood evaluation over grid sizes and threads");
  c_bench->add_option("--sizes", bench.sizes, "Grid side lengths")->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--mf-list", bench.future_sizes)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_bench->add_option("--mg", bench.past, "Past set size (default 2 * mf)")->capture_default_str();
  c_bench->add_option("--threads-list", bench.threads)->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--k", bench.k)->check(CLI::Range(2, 64))->capture_default_str();
  c_bench->add_option("--beta", bench.beta)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_bench->add_option("--reps", bench.reps)->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--out", bench.out, "Output CSV");

  std::vector<const char*> argv{"oca"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  out << std::setprecision(10);
  const Context ctx{app, out, err, Executor(threads), seed};
  try {
    if (!write_config.empty()) io::open_output(write_config) << app.config_to_str(false, false);
    if (c_sim->parsed()) cmd_simulate(sim, ctx);
    if (c_curve->parsed()) cmd_loglik_curve(curve, ctx);
    if (c_fit->parsed()) cmd_fit(fit, ctx);
    if (c_smp->parsed()) cmd_sample(smp, ctx);
    if (c_gib->parsed()) cmd_gibbs(gib, ctx);
    if (c_ho->parsed()) cmd_predict_heldout(ho, ctx);
    if (c_bench->parsed()) cmd_benchmark(bench, ctx);
  } catch (const NumericalError& e) {
    err << "numerical error at beta = " << e.at() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const io::InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {  // domain_error, invalid_argument, out_of_range
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace oca::cli
