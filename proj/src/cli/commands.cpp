#include <algorithm>
#include <cmath>
#include <iostream>
#include <ostream>
#include <sstream>

#include "ergo/cli.hpp"
#include "ergo/errors.hpp"
#include "ergo/freefermion.hpp"
#include "ergo/io.hpp"
#include "ergo/linalg.hpp"
#include "ergo/parallel.hpp"
#include "ergo/varspec.hpp"

namespace ergo::cli {

namespace {

using io::fmt;

void write_text(const std::filesystem::path& path, const std::string& s) { io::write_file_atomic(path, s); }

std::string letters(const PauliString& p, int n) {
  std::string s(static_cast<std::size_t>(n), 'I');
  for (const auto& [site, axis] : p.support()) s[static_cast<std::size_t>(site)] = axis_char(axis);
  return s;
}

EnsembleSettings parse_ensemble(const Field& root, int n) {
  EnsembleSettings s;
  if (auto e = root.find("ensemble")) {
    e->allow_only({"center", "size"});
    s.center = e->number_or("center", 0.0);
    if (e->has("size")) {
      const Field f = e->at("size");
      if (f.json().is_string() && f.string() == "all") {
        s.size = std::size_t(-1);
      } else if (!(f.json().is_string() && f.string() == "default")) {
        s.size = f.uinteger();
        if (s.size < 1) f.fail("must be >= 1");
      }
    }
  }
  if (s.size == 0 && !default_ensemble_size(n)) s.size = std::size_t(-1);
  if (auto ref = root.find("entropy_reference")) {
    ref->allow_only({"mu", "sigma"});
    s.reference = EntropyReference{ref->at("mu").number(), ref->at("sigma").number()};
    if (!(s.reference->sigma > 0.0)) ref->at("sigma").fail("must be > 0");
  }
  s.locality = static_cast<int>(root.integer_or("locality", 2));
  if (s.locality < 1) root.at("locality").fail("must be >= 1");
  return s;
}

void clamp_all(EnsembleSettings& s, const EigenDecomposition& eig) {
  if (s.size == std::size_t(-1)) s.size = eig.size();
  if (s.size > eig.size()) {
    throw ValidationError("ensemble.size", "exceeds the block dimension " + std::to_string(eig.size()));
  }
}

std::optional<std::filesystem::path> cache_dir(const Field& root) {
  if (!root.has("cache_dir")) return std::nullopt;
  return std::filesystem::path(root.at("cache_dir").string());
}

}  // namespace

int run_basis(const RunContext& ctx) {
  const Field root = ctx.cfg();
  root.allow_only({"command", "n", "model", "locality", "boundary", "seed", "jobs", "out"});
  int n = 0;
  Boundary boundary = Boundary::open;
  if (root.has("model")) {
    const ModelConfig m = parse_model(root.at("model"));
    n = m.spec.n_sites;
    boundary = m.spec.boundary;
  } else {
    const auto v = root.at("n").integer();
    if (v < 1 || v > kMaxSites) root.at("n").fail("must be in [1, 62]");
    n = static_cast<int>(v);
  }
  if (root.has("boundary")) {
    try {
      boundary = parse_boundary(root.at("boundary").string());
    } catch (const std::invalid_argument& e) {
      root.at("boundary").fail(e.what());
    }
  }
  const auto ell = root.integer_or("locality", 2);
  if (ell < 1 || ell > n) root.at("locality").fail("must be in [1, n]");
  const OperatorBasis basis = generate_local_basis(n, static_cast<int>(ell), boundary);
  std::filesystem::create_directories(ctx.out);
  std::ostringstream os;
  io::CsvWriter csv(os, {"index", "label", "string", "weight"});
  for (std::size_t i = 0; i < basis.size(); ++i) {
    csv.row({std::to_string(i), basis[i].to_string(), letters(basis[i], n), std::to_string(basis[i].weight())});
  }
  write_text(ctx.out / "basis.csv", os.str());
  return kExitOk;
}

int run_ed(const RunContext& ctx) {
  const Field root = ctx.cfg();
  root.allow_only({"command", "model", "ensemble", "entropy_reference", "locality", "cache_dir", "seed",
                   "jobs", "out"});
  const ModelConfig m = parse_model(root.at("model"));
  EnsembleSettings s = parse_ensemble(root, m.spec.n_sites);
  s.varspec = false;
  s.jobs = ctx.jobs;
  const HamiltonianOperator h = build(m);
  const auto sector = resolve_sector(m, h);
  const EigenDecomposition eig = diagonalize_cached(h, sector, m.max_dim, cache_dir(root));
  clamp_all(s, eig);
  const EnsembleResult res = evaluate_ensemble(h, eig, s);

  std::filesystem::create_directories(ctx.out);
  std::ostringstream spec;
  io::CsvWriter sc(spec, {"index", "energy"});
  for (std::size_t k = 0; k < eig.size(); ++k) sc.row({std::to_string(k), fmt(eig.energies[static_cast<Eigen::Index>(k)])});
  write_text(ctx.out / "spectrum.csv", spec.str());

  std::ostringstream ens;
  io::CsvWriter ec(ens, {"index", "energy", "r", "entropy"});
  for (std::size_t i = 0; i < res.states.size(); ++i) {
    ec.row({std::to_string(res.states[i]), fmt(res.energy[i]), fmt(res.r[i]), fmt(res.entropy[i])});
  }
  write_text(ctx.out / "ensemble.csv", ens.str());

  const MetricSummary ent = summarize(res.entropy);
  nlohmann::ordered_json j;
  j["schema_version"] = kCsvSchemaVersion;
  j["model"] = h.label();
  if (sector) j["sector"] = *sector;
  j["dimension"] = eig.size();
  j["ensemble_size"] = res.states.size();
  j["mean_r"] = res.mean_r;
  j["entropy_mean"] = ent.mean;
  j["entropy_std"] = ent.std;
  if (std::isfinite(res.d_kl)) j["d_kl"] = res.d_kl;
  else j["d_kl"] = nullptr;
  j["files"] = {"spectrum.csv", "ensemble.csv"};
  write_text(ctx.out / "summary.json", j.dump(2) + "\n");
  return kExitOk;
}

int run_varspec(const RunContext& ctx) {
  const Field root = ctx.cfg();
  root.allow_only({"command", "model", "ensemble", "states", "locality", "spectra", "cache_dir", "seed",
                   "jobs", "out"});
  const ModelConfig m = parse_model(root.at("model"));
  const HamiltonianOperator h = build(m);
  const auto sector = resolve_sector(m, h);
  const EigenDecomposition eig = diagonalize_cached(h, sector, m.max_dim, cache_dir(root));
  const int ell = static_cast<int>(root.integer_or("locality", 2));
  if (ell < 1 || ell > m.spec.n_sites) root.at("locality").fail("must be in [1, n]");
  const OperatorBasis basis = generate_local_basis(m.spec.n_sites, ell, Boundary::open);
  const Eigen::VectorXd coeffs = h.coefficient_vector(basis);

  std::vector<std::size_t> states;
  if (root.has("states")) {
    const Field f = root.at("states");
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto k = f.index(i).uinteger();
      if (k >= eig.size()) f.index(i).fail("eigenstate index out of range");
      states.push_back(k);
    }
  } else {
    EnsembleSettings s = parse_ensemble(root, m.spec.n_sites);
    clamp_all(s, eig);
    states = microcanonical(eig.energies, s.center, resolve_ensemble_size(s, eig)).indices;
  }
  const bool spectra = root.boolean_or("spectra", false);

  struct Row {
    CovarianceResult cov;
    std::optional<MetricsRecord> rec;
    double overlap = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Row> rows(states.size());
  parallel_for(states.size(), ctx.jobs, [&](std::size_t i) {
    rows[i].cov = analyze_state(eig.state(states[i]), basis);
    try {
      rows[i].rec = metrics(rows[i].cov.sigma2, rows[i].cov.kernel_size);
    } catch (const DegenerateSpectrumError&) {
    }
    if (rows[i].cov.kernel_size > 0 && coeffs.norm() > 0) {
      rows[i].overlap = kernel_overlap(rows[i].cov.eigen_ops, rows[i].cov.kernel_size, coeffs);
    }
    if (!spectra) rows[i].cov.m.resize(0, 0), rows[i].cov.eigen_ops.resize(0, 0);
  });

  std::filesystem::create_directories(ctx.out);
  std::ostringstream os;
  io::CsvWriter csv(os, {"state", "energy", "kernel", "sigma2_0", "delta_m", "d_e", "inv_d_e", "sigma2_max",
                         "kernel_overlap"});
  std::vector<double> dm, ide, smax;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Row& r = rows[i];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double d_e = r.rec ? r.rec->d_e : nan;
    const double inv = r.rec ? (d_e > 0 ? 1.0 / d_e : std::numeric_limits<double>::infinity()) : nan;
    csv.row({std::to_string(states[i]), fmt(eig.energies[static_cast<Eigen::Index>(states[i])]),
             std::to_string(r.cov.kernel_size), fmt(r.cov.sigma2[0]), fmt(r.rec ? r.rec->delta_m : nan), fmt(d_e),
             fmt(inv), fmt(r.cov.sigma2[r.cov.sigma2.size() - 1]), fmt(r.overlap)});
    dm.push_back(r.rec ? r.rec->delta_m : nan);
    ide.push_back(inv);
    smax.push_back(r.cov.sigma2[r.cov.sigma2.size() - 1]);
  }
  write_text(ctx.out / "varspec.csv", os.str());
  std::vector<std::string> files{"varspec.csv"};
  if (spectra) {
    std::ostringstream sp;
    io::CsvWriter sc(sp, {"state", "a", "sigma2"});
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (Eigen::Index a = 0; a < rows[i].cov.sigma2.size(); ++a) {
        sc.row({std::to_string(states[i]), std::to_string(a), fmt(rows[i].cov.sigma2[a])});
      }
    }
    write_text(ctx.out / "varspec_spectra.csv", sp.str());
    files.push_back("varspec_spectra.csv");
  }
  nlohmann::ordered_json j;
  j["schema_version"] = kCsvSchemaVersion;
  j["model"] = h.label();
  j["basis_size"] = basis.size();
  j["states"] = states.size();
  for (const auto& [name, vals] : {std::pair{"delta_m", &dm}, {"inv_d_e", &ide}, {"sigma2_max", &smax}}) {
    const MetricSummary s = summarize(*vals);
    j[name] = {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
  }
  j["files"] = files;
  write_text(ctx.out / "summary.json", j.dump(2) + "\n");
  return kExitOk;
}

int run_sweep_command(const RunContext& ctx) {
  const SweepConfig cfg = parse_sweep_config(ctx);
  run_sweep(cfg, &std::clog);
  return kExitOk;
}

int run_ff(const RunContext& ctx) {
  const Field root = ctx.cfg();
  root.allow_only({"command", "n", "g", "sector", "state", "q_curve", "modes", "zero_tol", "anticoncentration",
                   "seed", "jobs", "out"});
  const auto n = root.integer_or("n", 50);
  if (n < 2 || n % 2 != 0 || n > 4096) root.at("n").fail("must be even and in [2, 4096]");
  const double g = root.number_or("g", 1.0);
  FermionSector sector = FermionSector::periodic;
  const std::string sec = root.string_or("sector", "periodic");
  if (sec == "antiperiodic") sector = FermionSector::antiperiodic;
  else if (sec != "periodic") root.at("sector").fail("must be periodic or antiperiodic");
  const BdGModel model = solve_tfim_periodic(static_cast<int>(n), g, sector);

  FermionGaussianState state = consecutive_filling(model, static_cast<int>(n) / 4);
  if (auto st = root.find("state")) {
    st->allow_only({"n_max", "occupations", "random"});
    if (st->has("occupations")) {
      std::vector<std::uint8_t> occ;
      for (auto v : st->at("occupations").integers()) {
        if (v != 0 && v != 1) st->at("occupations").fail("entries must be 0 or 1");
        occ.push_back(static_cast<std::uint8_t>(v));
      }
      if (occ.size() != model.size()) st->at("occupations").fail("needs one entry per momentum");
      state = make_state(model, occ);
    } else if (st->boolean_or("random", false)) {
      std::mt19937_64 rng(ctx.seed);
      state = random_occupations(model, rng);
    } else if (st->has("n_max")) {
      const auto nm = st->at("n_max").integer();
      if (nm < 0 || 2 * nm + 2 > n) st->at("n_max").fail("filling exceeds the chain");
      state = consecutive_filling(model, static_cast<int>(nm));
    }
  }

  std::vector<int> ms;
  if (auto q = root.find("q_curve")) {
    for (auto v : q->integers()) {
      if (v % n == 0) q->fail("m must be nonzero modulo n");
      ms.push_back(static_cast<int>(v));
    }
  } else {
    for (int m = 1; m <= n / 2; ++m) ms.push_back(m);
  }
  const auto n_modes = root.integer_or("modes", 6);
  if (n_modes < 0 || n_modes > 5 * n) root.at("modes").fail("must be in [0, 5 n]");
  const double zero_tol = root.number_or("zero_tol", 1e-8);

  std::filesystem::create_directories(ctx.out);
  std::vector<std::string> files;

  std::ostringstream qc;
  io::CsvWriter qw(qc, {"m", "q", "sigma2", "sigma2_unnormalized"});
  for (const QPoint& p : gap_vs_q_curve(state, ms)) {
    qw.row({std::to_string(p.m), fmt(p.q), fmt(p.sigma2), fmt(cosine_variance_unnormalized(state, p.m))});
  }
  write_text(ctx.out / "ff_q_curve.csv", qc.str());
  files.push_back("ff_q_curve.csv");

  const Eigen::MatrixXd cov = ff_covariance_matrix(state);
  const SymmetricEigen es = eigh(cov);
  std::size_t zeros = 0;
  for (Eigen::Index a = 0; a < es.values.size(); ++a) zeros += std::abs(es.values[a]) < zero_tol;
  std::ostringstream sp;
  io::CsvWriter sw(sp, {"index", "sigma2"});
  for (Eigen::Index a = 0; a < es.values.size(); ++a) sw.row({std::to_string(a), fmt(es.values[a])});
  write_text(ctx.out / "ff_spectrum.csv", sp.str());
  files.push_back("ff_spectrum.csv");

  static const char* kTerms[5] = {"X", "ZZ", "ZY", "YZ", "YY"};
  std::ostringstream md, ft;
  io::CsvWriter mw(md, {"mode", "site", "term", "amplitude"});
  io::CsvWriter fw(ft, {"mode", "sigma2", "m", "q", "amplitude", "residual"});
  for (Eigen::Index a = 0; a < n_modes; ++a) {
    Eigen::MatrixXd channels(n, 5);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (int t = 0; t < 5; ++t) {
        const double v = es.vectors(5 * j + t, a);
        channels(j, t) = v;
        mw.row({std::to_string(a), std::to_string(j), kTerms[t], fmt(v)});
      }
    }
    const SinusoidFit fit = fit_sinusoid_channels(channels);
    fw.row({std::to_string(a), fmt(es.values[a]), std::to_string(fit.m), fmt(fit.q), fmt(fit.amplitude),
            fmt(fit.residual)});
  }
  write_text(ctx.out / "ff_modes.csv", md.str());
  write_text(ctx.out / "ff_fits.csv", ft.str());
  files.insert(files.end(), {"ff_modes.csv", "ff_fits.csv"});

  std::ostringstream ac;
  io::CsvWriter aw(ac, {"eps", "p", "n_fs", "exact", "stirling", "relative_difference"});
  std::vector<double> eps_list{0.2, 0.4, 0.6, 0.8};
  std::vector<double> p_list;
  if (auto a = root.find("anticoncentration")) {
    a->allow_only({"eps", "p"});
    if (a->has("eps")) eps_list = a->at("eps").numbers();
    if (a->has("p")) p_list = a->at("p").numbers();
  }
  auto emit = [&](double eps, double p) {
    if (!(p > 0.0 && p < 1.0)) return;
    const double exact = anticoncentration_from_density(static_cast<int>(n), p, AnticoncentrationMode::exact);
    const double stirling = anticoncentration_from_density(static_cast<int>(n), p, AnticoncentrationMode::stirling);
    long n_fs = std::lround(p * static_cast<double>(n));
    if (n_fs % 2) n_fs += (p * static_cast<double>(n) > static_cast<double>(n_fs)) ? 1 : -1;
    aw.row({std::isnan(eps) ? "" : fmt(eps), fmt(p), std::to_string(n_fs), fmt(exact), fmt(stirling),
            fmt(std::abs(stirling - exact) / exact)});
  };
  for (double eps : eps_list) emit(eps, fermi_surface_density(model, eps));
  for (double p : p_list) emit(std::numeric_limits<double>::quiet_NaN(), p);
  write_text(ctx.out / "ff_anticoncentration.csv", ac.str());
  files.push_back("ff_anticoncentration.csv");

  double eps_min = model.epsilon.front();
  for (double e : model.epsilon) eps_min = std::min(eps_min, e);
  nlohmann::ordered_json j;
  j["schema_version"] = kCsvSchemaVersion;
  j["n"] = n;
  j["g"] = g;
  j["sector"] = sec;
  j["energy"] = state.energy();
  j["physical"] = state.is_physical();
  j["epsilon_min"] = eps_min;
  j["epsilon_max"] = model.epsilon_max();
  j["zero_modes"] = zeros;
  j["fermi_surface_count"] = fermi_surface_count(state);
  j["fermi_surface_bound"] = fermi_surface_bound(state);
  j["files"] = files;
  write_text(ctx.out / "summary.json", j.dump(2) + "\n");
  return kExitOk;
}

int dispatch(const std::string& command, const CommonOptions& opt, std::ostream& err) {
  try {
    const RunContext ctx = make_context(opt);
    if (command == "basis") return run_basis(ctx);
    if (command == "ed") return run_ed(ctx);
    if (command == "varspec") return run_varspec(ctx);
    if (command == "sweep") return run_sweep_command(ctx);
    if (command == "qnd") return run_qnd(ctx);
    if (command == "shadows") return run_shadows(ctx);
    if (command == "ff") return run_ff(ctx);
    if (command == "pipeline") return run_pipeline(ctx);
    err << "error: unknown command '" << command << "'\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace ergo::cli
