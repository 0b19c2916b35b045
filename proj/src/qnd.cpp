#include "ergo/qnd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "ergo/errors.hpp"

namespace ergo {

std::uint64_t initial_bitstring_index(const HamiltonianOperator& h, std::optional<int> sector) {
  const Eigen::VectorXd diag = h.diagonal();
  std::vector<std::uint64_t> candidates;
  if (sector) candidates = magnetization_sector_indices(h.n_sites(), *sector);
  const std::uint64_t n = sector ? candidates.size() : static_cast<std::uint64_t>(diag.size());
  std::uint64_t best = sector ? candidates.front() : 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t b = sector ? candidates[i] : i;
    if (std::abs(diag[static_cast<Eigen::Index>(b)]) <
        std::abs(diag[static_cast<Eigen::Index>(best)])) {
      best = b;
    }
  }
  return best;
}

StateVector initial_bitstring(const HamiltonianOperator& h, std::optional<int> sector) {
  return StateVector::basis_state(h.n_sites(), initial_bitstring_index(h, sector));
}

Eigen::VectorXcd eigen_coefficients(const EigenDecomposition& eig, std::uint64_t b) {
  Eigen::Index row = -1;
  if (eig.basis_indices.empty()) {
    if (b < static_cast<std::uint64_t>(eig.vectors.rows())) row = static_cast<Eigen::Index>(b);
  } else {
    auto it = std::lower_bound(eig.basis_indices.begin(), eig.basis_indices.end(), b);
    if (it != eig.basis_indices.end() && *it == b) row = it - eig.basis_indices.begin();
  }
  if (row < 0) throw std::invalid_argument("eigen_coefficients: state outside the decomposed block");
  return eig.vectors.row(row).transpose().cast<std::complex<double>>();
}

QndStep qnd_round(const Eigen::VectorXcd& coeffs, const Eigen::VectorXd& energies, double t,
                  bool plus, int round_index) {
  if (coeffs.size() != energies.size()) throw std::invalid_argument("qnd_round: size mismatch");
  if (!(t > 0.0)) throw std::invalid_argument("qnd_round: t must be positive");
  const double s = plus ? 1.0 : -1.0;
  QndStep out;
  out.coeffs.resize(coeffs.size());
  double p = 0.0;
  for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
    const std::complex<double> u = std::polar(1.0, -energies[n] * t);
    out.coeffs[n] = coeffs[n] * (1.0 + s * u) * 0.5;
    p += std::norm(out.coeffs[n]);
  }
  out.probability = p;
  if (p < kMinPostSelectProbability) {
    throw PostSelectionFailure("outcome probability " + std::to_string(p) + " in round " +
                                   std::to_string(round_index) + " is below 1e-14",
                               round_index, p);
  }
  out.coeffs /= std::sqrt(p);
  return out;
}

double QndTrajectory::total_probability() const {
  double p = 1.0;
  for (double q : success_probs) p *= q;
  return p;
}

namespace {

void record_energy(QndTrajectory& tr, const Eigen::VectorXcd& a, const Eigen::VectorXd& e) {
  double m = 0.0, m2 = 0.0;
  for (Eigen::Index n = 0; n < a.size(); ++n) {
    const double w = std::norm(a[n]);
    m += w * e[n];
    m2 += w * e[n] * e[n];
  }
  tr.energy_mean.push_back(m);
  tr.energy_variance.push_back(std::max(0.0, m2 - m * m));
}

double plus_probability(const Eigen::VectorXcd& a, const Eigen::VectorXd& e, double t) {
  double p = 0.0;
  for (Eigen::Index n = 0; n < a.size(); ++n) {
    const double c = std::cos(0.5 * e[n] * t);
    p += std::norm(a[n]) * c * c;
  }
  return p;
}

}  // namespace

QndTrajectory qnd_prepare(const EigenDecomposition& eig, std::uint64_t initial_index, int rounds,
                          bool post_select, std::mt19937_64* rng) {
  if (rounds < 0) throw std::invalid_argument("qnd_prepare: rounds must be >= 0");
  if (rounds > 60) throw std::invalid_argument("qnd_prepare: too many rounds");
  if (!post_select && rng == nullptr) throw std::invalid_argument("qnd_prepare: sampling needs an rng");
  if (eig.size() == 0) throw std::invalid_argument("qnd_prepare: empty spectrum");
  QndTrajectory tr;
  const double norm_inf = eig.energies.cwiseAbs().maxCoeff();
  if (norm_inf == 0.0) throw std::invalid_argument("qnd_prepare: H vanishes on this block");
  tr.t0 = std::numbers::pi / norm_inf;
  Eigen::VectorXcd a = eigen_coefficients(eig, initial_index);
  tr.round_coeffs.push_back(a);
  record_energy(tr, a, eig.energies);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int r = 1; r <= rounds; ++r) {
    const double t = std::ldexp(tr.t0, r - 1);
    bool plus = true;
    if (!post_select) plus = unif(*rng) < plus_probability(a, eig.energies, t);
    QndStep step = qnd_round(a, eig.energies, t, plus, r);
    a = std::move(step.coeffs);
    tr.success_probs.push_back(step.probability);
    tr.outcomes.push_back(plus ? 1 : -1);
    tr.round_coeffs.push_back(a);
    record_energy(tr, a, eig.energies);
  }
  return tr;
}

StateVector qnd_state(const EigenDecomposition& eig, const Eigen::VectorXcd& coeffs) {
  const Eigen::VectorXcd block = eig.vectors.cast<std::complex<double>>() * coeffs;
  return StateVector::normalized(eig.n_sites, eig.embed(block));
}

std::vector<QndEnsembleMember> qnd_sample_ensemble(const EigenDecomposition& eig,
                                                   std::uint64_t initial_index, int rounds,
                                                   std::size_t samples, std::mt19937_64& rng) {
  if (samples == 0) throw std::invalid_argument("qnd_sample_ensemble: samples must be >= 1");
  std::map<std::vector<int>, std::size_t> slot;
  std::vector<QndEnsembleMember> members;
  for (std::size_t s = 0; s < samples; ++s) {
    QndTrajectory tr = qnd_prepare(eig, initial_index, rounds, false, &rng);
    auto [it, fresh] = slot.emplace(tr.outcomes, members.size());
    if (fresh) members.push_back({std::move(tr), 0.0});
    members[it->second].weight += 1.0;
  }
  for (auto& m : members) m.weight /= static_cast<double>(samples);
  return members;
}

}  // namespace ergo
