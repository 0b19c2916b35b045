#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ergo/cli.hpp"
#include "ergo/errors.hpp"
#include "ergo/io.hpp"
#include "ergo/qnd.hpp"
#include "ergo/shadows.hpp"
#include "ergo/varspec.hpp"

namespace ergo::cli {

namespace {

using io::fmt;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0x632be59bd9b4e019ull));
}

enum class KernelMode { model, tolerance, fixed };

struct VarspecSettings {
  int locality = 2;
  KernelMode kernel_mode = KernelMode::model;
  std::size_t kernel = 0;
};

struct ShadowSettings {
  std::vector<std::size_t> shots;
  int repetitions = 1;
  std::string write_datasets = "first";
  std::size_t mom_groups = 0;
  std::size_t block_size = 8192;
  std::optional<std::filesystem::path> input;
};

struct QndSettings {
  int rounds = 12;
  bool post_select = true;
  std::optional<std::uint64_t> initial;
};

struct PipelineConfig {
  std::vector<std::string> stages;
  std::optional<ModelConfig> model;
  QndSettings qnd;
  ShadowSettings shadows;
  VarspecSettings varspec;
  std::optional<std::size_t> eigenstate;  // target when qnd is absent; nullopt = mid-spectrum
  double center = 0.0;
};

bool has_stage(const PipelineConfig& c, const char* s) {
  return std::find(c.stages.begin(), c.stages.end(), s) != c.stages.end();
}

std::vector<std::size_t> parse_shots(const Field& f) {
  std::vector<std::size_t> out;
  if (f.json().is_array()) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto v = f.index(i).uinteger();
      if (v < 1) f.index(i).fail("must be >= 1");
      out.push_back(v);
    }
  } else if (f.json().is_object()) {
    f.allow_only({"start", "stop", "points"});
    const double a = f.at("start").number(), b = f.at("stop").number();
    const auto pts = f.at("points").integer();
    if (!(a >= 1.0) || !(b >= a)) f.fail("need 1 <= start <= stop");
    if (pts < 1) f.at("points").fail("must be >= 1");
    for (std::int64_t k = 0; k < pts; ++k) {
      const double t = pts == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(pts - 1);
      const auto v = static_cast<std::size_t>(std::llround(a * std::pow(b / a, t)));
      if (out.empty() || out.back() != v) out.push_back(v);
    }
  } else {
    out.push_back(f.uinteger());
    if (out.back() < 1) f.fail("must be >= 1");
  }
  if (out.empty()) f.fail("shot grid must not be empty");
  return out;
}

PipelineConfig parse_pipeline(const RunContext& ctx, std::vector<std::string> stages) {
  const Field root = ctx.cfg();
  root.allow_only({"command", "stages", "model", "qnd", "shadows", "varspec", "state", "seed", "jobs",
                   "out"});
  PipelineConfig c;
  c.stages = std::move(stages);
  if (c.stages.empty()) throw ValidationError("stages", "must list at least one stage");
  const std::vector<std::string> order{"qnd", "shadows", "varspec"};
  std::size_t last = 0;
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    auto it = std::find(order.begin(), order.end(), c.stages[i]);
    const std::string where = "stages[" + std::to_string(i) + "]";
    if (it == order.end()) throw ValidationError(where, "unknown stage '" + c.stages[i] + "'");
    const auto pos = static_cast<std::size_t>(it - order.begin()) + 1;
    if (pos <= last) throw ValidationError(where, "stages must appear in the order qnd, shadows, varspec");
    last = pos;
  }

  const bool from_dataset = root.has("shadows") && root.at("shadows").has("input");
  if (root.has("model")) c.model = parse_model(root.at("model"));
  else if (!from_dataset) throw ValidationError("model", "required field is missing");

  if (auto q = root.find("qnd")) {
    q->allow_only({"rounds", "post_select", "initial"});
    const auto r = q->integer_or("rounds", 12);
    if (r < 0 || r > 60) q->at("rounds").fail("must be in [0, 60]");
    c.qnd.rounds = static_cast<int>(r);
    c.qnd.post_select = q->boolean_or("post_select", true);
    if (q->has("initial")) {
      const Field init = q->at("initial");
      if (!(init.json().is_string() && init.string() == "auto")) c.qnd.initial = init.uinteger();
    }
  }
  if (auto s = root.find("shadows")) {
    s->allow_only({"shots", "repetitions", "write_datasets", "median_of_means", "block_size", "input"});
    if (s->has("shots")) c.shadows.shots = parse_shots(s->at("shots"));
    else c.shadows.shots = {1000, 10000, 100000};
    const auto reps = s->integer_or("repetitions", 1);
    if (reps < 1) s->at("repetitions").fail("must be >= 1");
    c.shadows.repetitions = static_cast<int>(reps);
    c.shadows.write_datasets = s->string_or("write_datasets", "first");
    if (c.shadows.write_datasets != "first" && c.shadows.write_datasets != "all" &&
        c.shadows.write_datasets != "none") {
      s->at("write_datasets").fail("must be one of first, all, none");
    }
    c.shadows.mom_groups = static_cast<std::size_t>(s->integer_or("median_of_means", 0));
    const auto bs = s->integer_or("block_size", 8192);
    if (bs < 1) s->at("block_size").fail("must be >= 1");
    c.shadows.block_size = static_cast<std::size_t>(bs);
    if (s->has("input")) c.shadows.input = s->at("input").string();
  } else if (has_stage(c, "shadows")) {
    c.shadows.shots = {1000, 10000, 100000};
  }
  if (auto v = root.find("varspec")) {
    v->allow_only({"locality", "kernel"});
    c.varspec.locality = static_cast<int>(v->integer_or("locality", 2));
    if (c.varspec.locality < 1) v->at("locality").fail("must be >= 1");
    if (v->has("kernel")) {
      const Field k = v->at("kernel");
      if (k.json().is_string()) {
        const auto s = k.string();
        if (s == "model") c.varspec.kernel_mode = KernelMode::model;
        else if (s == "tolerance") c.varspec.kernel_mode = KernelMode::tolerance;
        else k.fail("must be \"model\", \"tolerance\" or an integer");
      } else {
        c.varspec.kernel_mode = KernelMode::fixed;
        c.varspec.kernel = k.uinteger();
      }
    }
  }
  if (auto st = root.find("state")) {
    st->allow_only({"eigenstate", "center"});
    if (st->has("eigenstate")) {
      const Field e = st->at("eigenstate");
      if (!(e.json().is_string() && e.string() == "mid")) c.eigenstate = e.uinteger();
    }
    c.center = st->number_or("center", 0.0);
  }
  if (c.shadows.input && has_stage(c, "qnd")) {
    throw ValidationError("shadows.input", "a recorded dataset cannot follow a qnd stage");
  }
  if (c.model && c.model->spec.n_sites > 14 && !c.shadows.input) {
    throw ValidationError("model.n", "dense state preparation is limited to N <= 14");
  }
  return c;
}

std::optional<std::size_t> kernel_for(const VarspecSettings& v, const HamiltonianOperator* h) {
  switch (v.kernel_mode) {
    case KernelMode::fixed: return v.kernel;
    case KernelMode::tolerance: return std::nullopt;
    case KernelMode::model:
      if (h) {
        if (auto k = h->expected_kernel_size()) return static_cast<std::size_t>(*k);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

struct Metrics {
  double delta_m, d_e, inv_d_e, sigma2_max, sigma2_0;
  std::size_t kernel;
};

Metrics metrics_of(const Eigen::VectorXd& sigma2, std::size_t kernel) {
  const MetricsRecord r = metrics(sigma2, kernel);
  return {r.delta_m, r.d_e, r.d_e > 0 ? 1.0 / r.d_e : std::numeric_limits<double>::infinity(),
          r.sigma2_max, r.sigma2_0, kernel};
}

std::vector<std::string> metric_fields(const Metrics& m) {
  return {fmt(m.delta_m), fmt(m.d_e), fmt(m.inv_d_e), fmt(m.sigma2_max), fmt(m.sigma2_0),
          std::to_string(m.kernel)};
}

const std::vector<std::string> kMetricColumns{"delta_m", "d_e", "inv_d_e", "sigma2_max", "sigma2_0",
                                              "kernel"};

template <class Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& s) { io::write_file_atomic(path, s); }

}  // namespace

int run_stages(const RunContext& ctx, std::vector<std::string> stages) {
  const PipelineConfig c = parse_pipeline(ctx, std::move(stages));
  std::filesystem::create_directories(ctx.out);
  nlohmann::ordered_json summary;
  summary["schema_version"] = kCsvSchemaVersion;
  summary["seed"] = ctx.seed;
  summary["stages"] = c.stages;
  std::vector<std::string> files;

  std::optional<HamiltonianOperator> h;
  std::optional<EigenDecomposition> eig;
  std::optional<StateVector> target;
  if (c.model && !c.shadows.input) {
    h.emplace(build(*c.model));
    const auto sector = resolve_sector(*c.model, *h);
    eig.emplace(in_stage("ed", [&] { return full_diagonalize(*h, sector, c.model->max_dim); }));
    summary["model"] = h->label();
    if (sector) summary["sector"] = *sector;
  }
  const bool want_varspec = has_stage(c, "varspec");
  const auto kernel_override = kernel_for(c.varspec, h ? &*h : nullptr);
  std::optional<OperatorBasis> basis;
  auto get_basis = [&](int n) -> const OperatorBasis& {
    if (!basis) basis.emplace(generate_local_basis(n, c.varspec.locality, Boundary::open));
    return *basis;
  };

  if (has_stage(c, "qnd")) {
    in_stage("qnd", [&] {
      const std::uint64_t init =
          c.qnd.initial ? *c.qnd.initial : initial_bitstring_index(*h, eig->sector);
      std::mt19937_64 rng(derive_seed(ctx.seed, 0x716e64, 0));
      const QndTrajectory traj = qnd_prepare(*eig, init, c.qnd.rounds, c.qnd.post_select, &rng);
      std::ostringstream os;
      std::vector<std::string> header{"round", "time", "outcome", "probability", "cumulative_probability",
                                      "energy_mean", "energy_variance"};
      const bool per_round = want_varspec && !has_stage(c, "shadows");
      if (per_round) header.insert(header.end(), kMetricColumns.begin(), kMetricColumns.end());
      io::CsvWriter csv(os, header);
      double cumulative = 1.0;
      for (std::size_t r = 0; r < traj.round_coeffs.size(); ++r) {
        const double t = r == 0 ? 0.0 : std::ldexp(traj.t0, static_cast<int>(r) - 1);
        const double p = r == 0 ? 1.0 : traj.success_probs[r - 1];
        cumulative *= p;
        std::vector<std::string> row{std::to_string(r), fmt(t), r == 0 ? "0" : std::to_string(traj.outcomes[r - 1]),
                                     fmt(p), fmt(cumulative), fmt(traj.energy_mean[r]),
                                     fmt(traj.energy_variance[r])};
        if (per_round) {
          const StateVector v = qnd_state(*eig, traj.round_coeffs[r]);
          const CovarianceResult cov = analyze_state(v, get_basis(v.n_sites()), kernel_override);
          const auto f = metric_fields(metrics_of(cov.sigma2, cov.kernel_size));
          row.insert(row.end(), f.begin(), f.end());
        }
        csv.row(row);
      }
      write_text(ctx.out / "qnd_rounds.csv", os.str());
      files.push_back("qnd_rounds.csv");
      summary["qnd"] = {{"initial_index", init},
                        {"rounds", traj.rounds()},
                        {"t0", traj.t0},
                        {"total_probability", traj.total_probability()},
                        {"energy_variance_initial", traj.energy_variance.front()},
                        {"energy_variance_final", traj.energy_variance.back()}};
      target.emplace(qnd_state(*eig, traj.round_coeffs.back()));
    });
  } else if (eig) {
    std::size_t k = 0;
    if (c.eigenstate) {
      if (*c.eigenstate >= eig->size()) throw ValidationError("state.eigenstate", "index out of range");
      k = *c.eigenstate;
    } else {
      k = microcanonical(eig->energies, c.center, 1).indices.front();
    }
    target.emplace(eig->state(k));
    summary["eigenstate"] = k;
    summary["energy"] = eig->energies[static_cast<Eigen::Index>(k)];
  }

  if (has_stage(c, "shadows")) {
    in_stage("shadows", [&] {
      std::optional<ShadowDataset> recorded;
      if (c.shadows.input) {
        std::ifstream is(*c.shadows.input);
        if (!is) throw ValidationError("shadows.input", "cannot open '" + c.shadows.input->string() + "'");
        recorded.emplace(ShadowDataset::read(is));
      }
      const int n = recorded ? recorded->n_sites : target->n_sites();
      std::optional<Metrics> exact;
      if (want_varspec && target) {
        const CovarianceResult cov = analyze_state(*target, get_basis(n), kernel_override);
        exact = metrics_of(cov.sigma2, cov.kernel_size);
        summary["exact_metrics"] = {{"delta_m", exact->delta_m}, {"d_e", exact->d_e},
                                    {"sigma2_max", exact->sigma2_max}, {"kernel", exact->kernel}};
      }
      std::ostringstream runs;
      std::vector<std::string> header{"shots", "repetition"};
      if (want_varspec) {
        header.insert(header.end(), kMetricColumns.begin(), kMetricColumns.end());
        if (exact) header.insert(header.end(), {"d_e_exact", "d_e_abs_error"});
      }
      io::CsvWriter csv(runs, header);
      std::map<std::size_t, std::vector<std::vector<double>>> per_shots;
      const std::vector<std::size_t> grid =
          recorded ? std::vector<std::size_t>{recorded->size()} : c.shadows.shots;
      const int reps = recorded ? 1 : c.shadows.repetitions;
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        for (int rep = 0; rep < reps; ++rep) {
          ShadowDataset ds;
          if (recorded) {
            ds = *recorded;
          } else {
            ShadowOptions opt;
            opt.block_size = c.shadows.block_size;
            opt.jobs = ctx.jobs;
            ds = collect_shadows(*target, grid[gi], derive_seed(ctx.seed, gi, static_cast<std::uint64_t>(rep)), opt);
            const bool write = c.shadows.write_datasets == "all" ||
                               (c.shadows.write_datasets == "first" && rep == 0 && gi + 1 == grid.size());
            if (write) {
              std::ostringstream os;
              ds.write(os);
              const std::string name = "shadows_n" + std::to_string(grid[gi]) + "_r" + std::to_string(rep) + ".txt";
              write_text(ctx.out / name, os.str());
              files.push_back(name);
            }
          }
          std::vector<std::string> row{std::to_string(grid[gi]), std::to_string(rep)};
          if (want_varspec) {
            EstimatorOptions eo;
            eo.median_of_means_groups = c.shadows.mom_groups;
            const Eigen::MatrixXd m = estimate_covariance_matrix(ds, get_basis(n), eo);
            const VarianceSpectrum spec = variance_spectrum(m, SpectrumPolicy::raw);
            std::size_t k = 0;
            if (kernel_override) k = *kernel_override;
            else if (exact) k = exact->kernel;
            else k = kernel_size(spec.sigma2, default_kernel_tolerance(spec.sigma2));
            const Metrics mt = metrics_of(spec.sigma2, k);
            const auto f = metric_fields(mt);
            row.insert(row.end(), f.begin(), f.end());
            std::vector<double> vals{mt.delta_m, mt.inv_d_e, mt.sigma2_max};
            if (exact) {
              row.push_back(fmt(exact->d_e));
              row.push_back(fmt(std::abs(mt.d_e - exact->d_e)));
            }
            per_shots[grid[gi]].push_back(vals);
          }
          csv.row(row);
        }
      }
      if (want_varspec) {
        write_text(ctx.out / "shadows_runs.csv", runs.str());
        files.push_back("shadows_runs.csv");
        std::ostringstream curve;
        io::CsvWriter cw(curve, {"shots", "metric", "mean", "std", "count"});
        const std::vector<std::string> names{"delta_m", "inv_d_e", "sigma2_max"};
        for (std::size_t shots : grid) {
          for (std::size_t mi = 0; mi < names.size(); ++mi) {
            std::vector<double> col;
            for (const auto& v : per_shots[shots]) col.push_back(v[mi]);
            const MetricSummary s = summarize(col);
            cw.row({std::to_string(shots), names[mi], fmt(s.mean), fmt(s.std), std::to_string(s.count)});
          }
        }
        write_text(ctx.out / "shadows_curve.csv", curve.str());
        files.push_back("shadows_curve.csv");
      }
    });
  } else if (want_varspec && !has_stage(c, "qnd")) {
    in_stage("varspec", [&] {
      const CovarianceResult cov = analyze_state(*target, get_basis(target->n_sites()), kernel_override);
      std::ostringstream os;
      io::CsvWriter csv(os, kMetricColumns);
      csv.row(metric_fields(metrics_of(cov.sigma2, cov.kernel_size)));
      write_text(ctx.out / "varspec.csv", os.str());
      files.push_back("varspec.csv");
    });
  }

  summary["files"] = files;
  write_text(ctx.out / "summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

int run_pipeline(const RunContext& ctx) {
  const Field root = ctx.cfg();
  const Field stages = root.at("stages");
  return run_stages(ctx, stages.strings());
}

int run_qnd(const RunContext& ctx) { return run_stages(ctx, {"qnd", "varspec"}); }

int run_shadows(const RunContext& ctx) {
  std::vector<std::string> stages;
  if (ctx.root.contains("qnd")) stages.push_back("qnd");
  stages.push_back("shadows");
  stages.push_back("varspec");
  return run_stages(ctx, stages);
}

}  // namespace ergo::cli
