#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>

#include "ergo/cli.hpp"
#include "ergo/errors.hpp"
#include "ergo/io.hpp"
#include "ergo/parallel.hpp"
#include "ergo/varspec.hpp"

namespace ergo::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

}  // namespace

std::size_t resolve_ensemble_size(const EnsembleSettings& s, const EigenDecomposition& eig) {
  std::size_t size = s.size;
  if (size == 0) size = default_ensemble_size(eig.n_sites).value_or(eig.size());
  if (size > eig.size()) {
    throw std::invalid_argument("ensemble size " + std::to_string(size) + " exceeds block dimension " +
                                std::to_string(eig.size()));
  }
  return size;
}

EnsembleResult evaluate_ensemble(const HamiltonianOperator& h, const EigenDecomposition& eig,
                                 const EnsembleSettings& s) {
  const std::size_t size = resolve_ensemble_size(s, eig);
  const MicrocanonicalEnsemble ens = microcanonical(eig.energies, s.center, size);
  EnsembleResult res;
  res.states = ens.indices;
  for (std::size_t k : ens.indices) res.energy.push_back(eig.energies[static_cast<Eigen::Index>(k)]);
  const SpacingRatioResult sr = level_spacing_ratio(eig.energies, ens);
  res.r = sr.r;
  res.mean_r = sr.mean_r;

  const std::size_t m = size;
  if (s.entropies) res.entropy.assign(m, kNaN);
  if (s.varspec) {
    for (auto* v : {&res.sigma2_0, &res.delta_m, &res.d_e, &res.inv_d_e, &res.sigma2_max,
                    &res.kernel_overlap}) {
      v->assign(m, kNaN);
    }
    res.kernel.assign(m, 0);
  }
  if (!s.entropies && !s.varspec) return res;

  std::optional<OperatorBasis> basis;
  Eigen::VectorXd coeffs;
  if (s.varspec) {
    basis.emplace(generate_local_basis(h.n_sites(), s.locality, s.basis_boundary));
    coeffs = h.coefficient_vector(*basis);
  }
  parallel_for(m, s.jobs, [&](std::size_t i) {
    const StateVector v = eig.state(res.states[i]);
    if (s.entropies) res.entropy[i] = halfchain_entropy(v);
    if (!s.varspec) return;
    const CovarianceResult cov = analyze_state(v, *basis);
    res.kernel[i] = cov.kernel_size;
    res.sigma2_max[i] = cov.sigma2[cov.sigma2.size() - 1];
    if (coeffs.norm() > 0.0 && cov.kernel_size > 0) {
      res.kernel_overlap[i] = kernel_overlap(cov.eigen_ops, cov.kernel_size, coeffs);
    }
    try {
      const MetricsRecord rec = metrics(cov.sigma2, cov.kernel_size);
      res.sigma2_0[i] = rec.sigma2_0;
      res.delta_m[i] = rec.delta_m;
      res.d_e[i] = rec.d_e;
      res.inv_d_e[i] = rec.d_e > 0.0 ? 1.0 / rec.d_e : std::numeric_limits<double>::infinity();
    } catch (const DegenerateSpectrumError&) {
      res.sigma2_0[i] = cov.sigma2[0];
    }
  });
  if (s.entropies) {
    const auto ref = s.reference ? s.reference : entropy_reference(h.n_sites());
    if (ref) res.d_kl = d_kl_metric(res.entropy, ref->mu, ref->sigma).d_kl;
  }
  return res;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary out;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) sum += v, ++out.count;
  }
  if (out.count == 0) return {kNaN, kNaN, 0};
  out.mean = sum / static_cast<double>(out.count);
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - out.mean) * (v - out.mean);
  }
  out.std = std::sqrt(ss / static_cast<double>(out.count));
  return out;
}

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"r", "d_kl", "delta_m", "inv_d_e", "sigma2_max",
                                              "sigma2_0", "entropy"};
  return names;
}

MetricSummary ensemble_metric(const EnsembleResult& r, const std::string& metric) {
  if (metric == "r") return summarize(r.r);
  if (metric == "d_kl") return std::isfinite(r.d_kl) ? MetricSummary{r.d_kl, 0.0, 1} : MetricSummary{kNaN, kNaN, 0};
  if (metric == "delta_m") return summarize(r.delta_m);
  if (metric == "inv_d_e") return summarize(r.inv_d_e);
  if (metric == "sigma2_max") return summarize(r.sigma2_max);
  if (metric == "sigma2_0") return summarize(r.sigma2_0);
  if (metric == "entropy") return summarize(r.entropy);
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

EigenDecomposition diagonalize_cached(const HamiltonianOperator& h, std::optional<int> sector,
                                      std::size_t max_dim,
                                      const std::optional<std::filesystem::path>& cache_dir) {
  if (!cache_dir) return full_diagonalize(h, sector, max_dim);
  const std::string key = h.label() + "|sector=" + (sector ? std::to_string(*sector) : "all");
  const auto path = *cache_dir / ("ed_" + hex(fnv1a(key)) + ".bin");
  if (auto hit = io::load_eigendecomposition(path, key)) return std::move(*hit);
  EigenDecomposition eig = full_diagonalize(h, sector, max_dim);
  io::save_eigendecomposition(path, eig, key);
  return eig;
}

SweepConfig parse_sweep_config(const RunContext& ctx) {
  const Field root = ctx.cfg();
  root.allow_only({"command", "model", "n", "grid", "ensemble", "metrics", "locality",
                   "entropy_reference", "cache_dir", "seed", "jobs", "out"});
  SweepConfig cfg;
  cfg.seed = ctx.seed;
  cfg.jobs = ctx.jobs;
  cfg.out = ctx.out;

  const Field model = root.at("model");
  model.allow_only({"family", "boundary", "g", "h", "h1", "hN", "delta", "max_dim"});
  try {
    cfg.family = parse_family(model.string_or("family", "ising"));
    cfg.boundary = parse_boundary(model.string_or("boundary", "open"));
  } catch (const std::invalid_argument& e) {
    model.fail(e.what());
  }
  std::vector<std::string> params;
  if (cfg.family == ModelFamily::ising) params = {"g", "h", "h1", "hN"};
  else if (cfg.family == ModelFamily::xxz) params = {"delta", "h1"};
  else model.at("family").fail("sweeps support the ising and xxz families");
  for (const auto& [key, value] : model.json().items()) {
    if (key == "family" || key == "boundary" || key == "max_dim") continue;
    if (std::find(params.begin(), params.end(), key) == params.end()) {
      model.at(key).fail("not a parameter of this family");
    }
    cfg.fixed[key] = model.at(key).number();
  }
  if (model.has("max_dim")) cfg.max_dim = model.at("max_dim").uinteger();

  const Field ns = root.at("n");
  if (ns.json().is_array()) {
    if (ns.size() == 0) ns.fail("must list at least one chain length");
    for (auto v : ns.integers()) cfg.sizes.push_back(static_cast<int>(v));
  } else {
    cfg.sizes.push_back(static_cast<int>(ns.integer()));
  }
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (cfg.sizes[i] < 2 || cfg.sizes[i] > 20) ns.fail("chain lengths must be in [2, 20]");
  }

  if (auto grid = root.find("grid")) {
    if (!grid->json().is_object()) grid->fail("expected an object of axes");
    for (const auto& [name, spec] : grid->json().items()) {
      const Field axis = grid->at(name);
      if (std::find(params.begin(), params.end(), name) == params.end()) {
        axis.fail("not a parameter of this family");
      }
      GridAxis ax{name, {}};
      if (spec.is_array()) {
        ax.values = axis.numbers();
      } else {
        axis.allow_only({"start", "stop", "steps"});
        const double a = axis.at("start").number(), b = axis.at("stop").number();
        const auto steps = axis.at("steps").integer();
        if (steps < 1) axis.at("steps").fail("must be >= 1");
        for (std::int64_t k = 0; k < steps; ++k) {
          ax.values.push_back(steps == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(steps - 1));
        }
      }
      if (ax.values.empty()) axis.fail("grid axis must not be empty");
      cfg.axes.push_back(std::move(ax));
    }
  }

  if (auto ens = root.find("ensemble")) {
    ens->allow_only({"center", "sizes"});
    cfg.center = ens->number_or("center", 0.0);
    if (auto sizes = ens->find("sizes")) {
      if (!sizes->json().is_object()) sizes->fail("expected an object mapping N to a size");
      for (const auto& [key, value] : sizes->json().items()) {
        int n = 0;
        try {
          n = std::stoi(key);
        } catch (const std::exception&) {
          sizes->at(key).fail("key must be a chain length");
        }
        const auto sz = sizes->at(key).uinteger();
        if (sz < 1) sizes->at(key).fail("must be >= 1");
        cfg.ensemble_sizes[n] = sz;
      }
    }
  }
  for (int n : cfg.sizes) {
    std::size_t sz = 0;
    if (auto it = cfg.ensemble_sizes.find(n); it != cfg.ensemble_sizes.end()) sz = it->second;
    else sz = default_ensemble_size(n).value_or(0);
    const double dim = cfg.family == ModelFamily::xxz ? binomial(n, (n - largest_sector(n)) / 2)
                                                      : std::ldexp(1.0, n);
    if (dim > static_cast<double>(cfg.max_dim)) {
      root.at("n").fail("N=" + std::to_string(n) + " exceeds the dense dimension cap");
    }
    if (static_cast<double>(sz) > dim) {
      throw ValidationError("ensemble.sizes", "size " + std::to_string(sz) + " for N=" +
                                                  std::to_string(n) + " exceeds the sector dimension");
    }
  }

  if (auto metrics = root.find("metrics")) {
    cfg.metrics = metrics->strings();
    if (cfg.metrics.empty()) metrics->fail("must list at least one metric");
    for (std::size_t i = 0; i < cfg.metrics.size(); ++i) {
      const auto& known = known_metrics();
      if (std::find(known.begin(), known.end(), cfg.metrics[i]) == known.end()) {
        metrics->index(i).fail("unknown metric '" + cfg.metrics[i] + "'");
      }
    }
  } else {
    cfg.metrics = {"r", "d_kl", "delta_m", "inv_d_e", "sigma2_max"};
  }
  cfg.locality = static_cast<int>(root.integer_or("locality", 2));
  if (cfg.locality < 1) root.at("locality").fail("must be >= 1");
  if (auto ref = root.find("entropy_reference")) {
    ref->allow_only({"mu", "sigma"});
    cfg.reference = EntropyReference{ref->at("mu").number(), ref->at("sigma").number()};
    if (!(cfg.reference->sigma > 0.0)) ref->at("sigma").fail("must be > 0");
  }
  if (root.has("cache_dir")) cfg.cache_dir = root.at("cache_dir").string();
  return cfg;
}

std::vector<SweepPoint> sweep_points(const SweepConfig& cfg) {
  std::size_t per_n = 1;
  for (const auto& ax : cfg.axes) per_n *= ax.values.size();
  std::vector<SweepPoint> out;
  for (int n : cfg.sizes) {
    for (std::size_t flat = 0; flat < per_n; ++flat) {
      SweepPoint p{n, {}};
      std::size_t rem = flat;
      for (std::size_t a = cfg.axes.size(); a-- > 0;) {
        const auto& ax = cfg.axes[a];
        p.values[ax.name] = ax.values[rem % ax.values.size()];
        rem /= ax.values.size();
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

HamiltonianOperator point_model(const SweepConfig& cfg, const SweepPoint& p) {
  HamiltonianSpec spec;
  spec.family = cfg.family;
  spec.n_sites = p.n_sites;
  spec.boundary = cfg.boundary;
  spec.parameters = cfg.fixed;
  for (const auto& [k, v] : p.values) spec.parameters[k] = v;
  return build_model(spec);
}

std::string point_key(const SweepConfig& cfg, const SweepPoint& p, std::size_t ens_size) {
  std::ostringstream os;
  os << "schema=" << kCsvSchemaVersion << "|" << point_model(cfg, p).label() << "|ens=" << ens_size
     << "|center=" << io::fmt(cfg.center) << "|ell=" << cfg.locality;
  for (const auto& [k, v] : p.values) os << "|" << k << "=" << io::fmt(v);
  for (const auto& m : cfg.metrics) os << "|" << m;
  if (cfg.reference) os << "|ref=" << io::fmt(cfg.reference->mu) << "," << io::fmt(cfg.reference->sigma);
  return os.str();
}

std::size_t point_ensemble_size(const SweepConfig& cfg, int n) {
  if (auto it = cfg.ensemble_sizes.find(n); it != cfg.ensemble_sizes.end()) return it->second;
  return 0;
}

std::optional<std::string> read_checkpoint(const std::filesystem::path& path, const std::string& key) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  std::string first;
  if (!std::getline(is, first) || first != "# " + key) return std::nullopt;
  std::ostringstream body;
  body << is.rdbuf();
  std::string text = body.str();
  const std::string end_marker = "# end\n";
  if (text.size() < end_marker.size() || text.compare(text.size() - end_marker.size(), end_marker.size(), end_marker) != 0) {
    return std::nullopt;
  }
  return text.substr(0, text.size() - end_marker.size());
}

}  // namespace

std::size_t run_sweep(const SweepConfig& cfg, std::ostream* log) {
  const auto points = sweep_points(cfg);
  const auto ckpt_dir = cfg.out / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);

  std::vector<std::string> rows(points.size());
  std::vector<std::string> keys(points.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < points.size(); ++i) {
    keys[i] = point_key(cfg, points[i], point_ensemble_size(cfg, points[i].n_sites));
    const auto path = ckpt_dir / ("point_" + std::to_string(i) + ".csv");
    if (auto hit = read_checkpoint(path, keys[i])) rows[i] = std::move(*hit);
    else todo.push_back(i);
  }
  if (log) *log << "sweep: " << points.size() << " points, " << points.size() - todo.size()
                << " restored from checkpoints\n";

  std::mutex log_mu;
  parallel_for(todo.size(), cfg.jobs, [&](std::size_t t) {
    const std::size_t i = todo[t];
    const SweepPoint& p = points[i];
    const HamiltonianOperator h = point_model(cfg, p);
    const std::optional<int> sector =
        cfg.family == ModelFamily::xxz ? std::optional<int>(largest_sector(p.n_sites)) : std::nullopt;
    const EigenDecomposition eig = diagonalize_cached(h, sector, cfg.max_dim, cfg.cache_dir);
    EnsembleSettings s;
    s.size = point_ensemble_size(cfg, p.n_sites);
    s.center = cfg.center;
    s.locality = cfg.locality;
    s.reference = cfg.reference;
    auto wants = [&](std::initializer_list<const char*> names) {
      for (const char* n : names) {
        if (std::find(cfg.metrics.begin(), cfg.metrics.end(), n) != cfg.metrics.end()) return true;
      }
      return false;
    };
    s.entropies = wants({"d_kl", "entropy"});
    s.varspec = wants({"delta_m", "inv_d_e", "sigma2_max", "sigma2_0"});
    const EnsembleResult res = evaluate_ensemble(h, eig, s);

    std::ostringstream os;
    for (const auto& metric : cfg.metrics) {
      const MetricSummary ms = ensemble_metric(res, metric);
      os << family_name(cfg.family) << ',' << p.n_sites;
      for (const auto& ax : cfg.axes) os << ',' << io::fmt(p.values.at(ax.name));
      os << ',' << metric << ',' << io::fmt(ms.mean) << ',' << io::fmt(ms.std) << ',' << ms.count << '\n';
    }
    rows[i] = os.str();
    io::write_file_atomic(ckpt_dir / ("point_" + std::to_string(i) + ".csv"),
                          "# " + keys[i] + "\n" + rows[i] + "# end\n");
    if (log) {
      std::lock_guard lock(log_mu);
      *log << "sweep: point " << i + 1 << "/" << points.size() << " done (N=" << p.n_sites << ")\n";
    }
  });

  std::ostringstream csv;
  csv << "family,n";
  for (const auto& ax : cfg.axes) csv << ',' << ax.name;
  csv << ",metric,mean,std,count\n";
  for (const auto& r : rows) csv << r;
  io::write_file_atomic(cfg.out / "sweep.csv", csv.str());

  nlohmann::ordered_json manifest;
  manifest["schema_version"] = kCsvSchemaVersion;
  manifest["seed"] = cfg.seed;
  manifest["family"] = std::string(family_name(cfg.family));
  manifest["boundary"] = std::string(boundary_name(cfg.boundary));
  manifest["points"] = points.size();
  manifest["metrics"] = cfg.metrics;
  manifest["ensemble_center"] = cfg.center;
  manifest["locality"] = cfg.locality;
  manifest["files"] = {"sweep.csv"};
  io::write_file_atomic(cfg.out / "manifest.json", manifest.dump(2) + "\n");
  return todo.size();
}

}  // namespace ergo::cli
