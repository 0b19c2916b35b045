#include "ergo/models.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ergo/errors.hpp"

namespace ergo {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

struct AmpTerm {
  std::uint64_t x, z;
  double coeff;  // includes the real phase i^{|x&z|}
};

std::vector<AmpTerm> amplitude_terms(const std::vector<PauliTerm>& terms, int n) {
  std::vector<AmpTerm> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    const auto [x, z] = amplitude_masks(t.op, n);
    const int y = std::popcount(x & z);
    if (y & 1) {
      throw std::domain_error("term " + t.op.to_string() + " is imaginary in the Z basis");
    }
    out.push_back({x, z, (y & 2) ? -t.coefficient : t.coefficient});
  }
  return out;
}

}  // namespace

std::string_view family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::ising: return "ising";
    case ModelFamily::xxz: return "xxz";
    case ModelFamily::custom: return "custom";
  }
  return "custom";
}

ModelFamily parse_family(std::string_view s) {
  if (s == "ising" || s == "mfim" || s == "tfim") return ModelFamily::ising;
  if (s == "xxz") return ModelFamily::xxz;
  if (s == "custom") return ModelFamily::custom;
  throw std::invalid_argument("unknown model family '" + std::string(s) + "'");
}

HamiltonianOperator::HamiltonianOperator(int n_sites, const std::vector<PauliTerm>& terms,
                                         ModelFamily family,
                                         std::map<std::string, double> parameters,
                                         Boundary boundary)
    : n_sites_(n_sites), family_(family), parameters_(std::move(parameters)), boundary_(boundary) {
  if (n_sites < 1 || n_sites > kMaxSites) throw std::invalid_argument("Hamiltonian: bad n_sites");
  std::unordered_map<PauliString, std::size_t, PauliStringHash> pos;
  for (const auto& t : terms) {
    if (!t.op.is_hermitian()) {
      throw std::invalid_argument("Hamiltonian term " + t.op.to_string() + " is not Hermitian");
    }
    if (t.op.max_site() >= n_sites) {
      throw std::invalid_argument("Hamiltonian term " + t.op.to_string() + " outside chain");
    }
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("non-finite coefficient");
    const double c = t.op.phase() == 2 ? -t.coefficient : t.coefficient;
    const PauliString s = t.op.stripped();
    auto [it, fresh] = pos.emplace(s, terms_.size());
    if (fresh) terms_.push_back({c, s});
    else terms_[it->second].coefficient += c;
  }
  std::erase_if(terms_, [](const PauliTerm& t) { return t.coefficient == 0.0; });
}

std::string HamiltonianOperator::label() const {
  std::ostringstream os;
  os << family_name(family_) << "(N=" << n_sites_;
  for (const auto& [k, v] : parameters_) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    os << "," << k << "=" << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  }
  os << "," << boundary_name(boundary_) << ")";
  return os.str();
}

bool HamiltonianOperator::conserves_magnetization() const {
  // Checked on the summed operator so that pairs like XX+YY are recognised.
  if (n_sites_ > 20) throw ResourceLimitError("conserves_magnetization: too many sites");
  const auto amp = amplitude_terms(terms_, n_sites_);
  const std::uint64_t d = dim();
  std::unordered_map<std::uint64_t, double> row;
  for (std::uint64_t b = 0; b < d; ++b) {
    row.clear();
    for (const auto& t : amp) {
      if (t.x == 0) continue;
      const double s = (std::popcount(t.z & b) & 1) ? -t.coeff : t.coeff;
      row[b ^ t.x] += s;
    }
    for (const auto& [target, v] : row) {
      if (std::abs(v) > 1e-14 && std::popcount(target) != std::popcount(b)) return false;
    }
  }
  return true;
}

bool HamiltonianOperator::is_real() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const PauliTerm& t) {
    return std::popcount(t.op.x_mask() & t.op.z_mask()) % 2 == 0;
  });
}

std::optional<int> HamiltonianOperator::expected_kernel_size() const {
  if (family_ == ModelFamily::ising) {
    const double g = param(parameters_, "g", 0.0);
    const double h = param(parameters_, "h", 0.0);
    const double h1 = param(parameters_, "h1", 0.0);
    const double hN = param(parameters_, "hN", 0.0);
    if (g == 0.0) return std::nullopt;  // classical: every Z string is conserved
    if (boundary_ == Boundary::periodic && h == 0.0 && h1 == 0.0 && hN == 0.0) return 2;
    return 1;
  }
  if (family_ == ModelFamily::xxz) {
    if (param(parameters_, "h1", 0.0) == 0.0) return std::nullopt;
    return 2;
  }
  return std::nullopt;
}

Eigen::MatrixXd HamiltonianOperator::dense(std::size_t max_dim) const {
  if (n_sites_ > 30 || dim() > max_dim) {
    throw ResourceLimitError("dense Hamiltonian of dimension 2^" + std::to_string(n_sites_) +
                             " exceeds cap " + std::to_string(max_dim));
  }
  const auto amp = amplitude_terms(terms_, n_sites_);
  const std::uint64_t d = dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (std::uint64_t b = 0; b < d; ++b) {
    for (const auto& t : amp) {
      m(b ^ t.x, b) += (std::popcount(t.z & b) & 1) ? -t.coeff : t.coeff;
    }
  }
  return m;
}

Eigen::MatrixXd HamiltonianOperator::dense_block(std::span<const std::uint64_t> indices,
                                                 std::size_t max_dim) const {
  if (indices.size() > max_dim) {
    throw ResourceLimitError("dense block of dimension " + std::to_string(indices.size()) +
                             " exceeds cap " + std::to_string(max_dim));
  }
  const auto amp = amplitude_terms(terms_, n_sites_);
  std::unordered_map<std::uint64_t, std::size_t> pos;
  pos.reserve(indices.size() * 2);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= dim()) throw std::invalid_argument("dense_block: index out of range");
    pos.emplace(indices[i], i);
  }
  const auto n = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    const std::uint64_t b = indices[col];
    for (const auto& t : amp) {
      const double v = (std::popcount(t.z & b) & 1) ? -t.coeff : t.coeff;
      auto it = pos.find(b ^ t.x);
      if (it == pos.end()) continue;  // leakage checked below
      m(static_cast<Eigen::Index>(it->second), col) += v;
    }
  }
  // Leakage check: H applied to each block state must stay in the block.
  for (Eigen::Index col = 0; col < n; ++col) {
    const std::uint64_t b = indices[col];
    std::unordered_map<std::uint64_t, double> leak;
    for (const auto& t : amp) {
      if (pos.count(b ^ t.x)) continue;
      leak[b ^ t.x] += (std::popcount(t.z & b) & 1) ? -t.coeff : t.coeff;
    }
    for (const auto& [k, v] : leak) {
      if (std::abs(v) > 1e-12) {
        throw std::invalid_argument("dense_block: indices do not span an invariant subspace");
      }
    }
  }
  return m;
}

Eigen::VectorXd HamiltonianOperator::diagonal() const {
  if (n_sites_ > 30) throw ResourceLimitError("diagonal: too many sites");
  const std::uint64_t d = dim();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
  for (const auto& t : terms_) {
    if (t.op.x_mask() != 0) continue;
    const auto z = amplitude_masks(t.op, n_sites_).second;
    for (std::uint64_t b = 0; b < d; ++b) {
      diag[b] += (std::popcount(z & b) & 1) ? -t.coefficient : t.coefficient;
    }
  }
  return diag;
}

Eigen::VectorXd HamiltonianOperator::coefficient_vector(const OperatorBasis& basis) const {
  if (basis.n_sites() != n_sites_) throw std::invalid_argument("coefficient_vector: site mismatch");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (const auto& t : terms_) {
    if (auto i = basis.index_of(t.op)) c[static_cast<Eigen::Index>(*i)] += t.coefficient;
  }
  return c;
}

bool HamiltonianOperator::in_span(const OperatorBasis& basis) const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [&](const PauliTerm& t) { return basis.index_of(t.op).has_value(); });
}

HamiltonianOperator build_ising(int n, double g, double h, double h1, double hN,
                                Boundary boundary) {
  if (n < 2) throw std::invalid_argument("build_ising: n must be >= 2");
  std::vector<PauliTerm> terms;
  terms.push_back({h1, PauliString::single(0, Axis::Z)});
  terms.push_back({hN, PauliString::single(n - 1, Axis::Z)});
  const int bonds = boundary == Boundary::periodic && n > 2 ? n : n - 1;
  for (int i = 0; i < bonds; ++i) {
    const int j = (i + 1) % n;
    terms.push_back({1.0, pauli_product(PauliString::single(std::min(i, j), Axis::Z),
                                        PauliString::single(std::max(i, j), Axis::Z))});
  }
  for (int i = 0; i < n; ++i) {
    terms.push_back({g, PauliString::single(i, Axis::X)});
    terms.push_back({h, PauliString::single(i, Axis::Z)});
  }
  return HamiltonianOperator(n, terms, ModelFamily::ising,
                             {{"g", g}, {"h", h}, {"h1", h1}, {"hN", hN}}, boundary);
}

HamiltonianOperator build_xxz(int n, double delta, double h1, Boundary boundary) {
  if (n < 2) throw std::invalid_argument("build_xxz: n must be >= 2");
  std::vector<PauliTerm> terms;
  terms.push_back({h1, PauliString::single(0, Axis::Z)});
  const int bonds = boundary == Boundary::periodic && n > 2 ? n : n - 1;
  for (int i = 0; i < bonds; ++i) {
    const int a = std::min(i, (i + 1) % n), b = std::max(i, (i + 1) % n);
    for (const auto& [axis, c] : {std::pair{Axis::X, 1.0}, {Axis::Y, 1.0}, {Axis::Z, delta}}) {
      terms.push_back({c, pauli_product(PauliString::single(a, axis), PauliString::single(b, axis))});
    }
  }
  return HamiltonianOperator(n, terms, ModelFamily::xxz, {{"delta", delta}, {"h1", h1}}, boundary);
}

HamiltonianOperator build_model(const HamiltonianSpec& spec) {
  switch (spec.family) {
    case ModelFamily::ising:
      return build_ising(spec.n_sites, param(spec.parameters, "g", 1.0),
                         param(spec.parameters, "h", 0.3), param(spec.parameters, "h1", 0.25),
                         param(spec.parameters, "hN", -0.25), spec.boundary);
    case ModelFamily::xxz: {
      const double delta = param(spec.parameters, "delta", param(spec.parameters, "Δ", 1.0));
      return build_xxz(spec.n_sites, delta, param(spec.parameters, "h1", 0.05), spec.boundary);
    }
    case ModelFamily::custom:
      return HamiltonianOperator(spec.n_sites, spec.terms, ModelFamily::custom, spec.parameters,
                                 spec.boundary);
  }
  throw std::invalid_argument("unknown model family");
}

std::vector<std::uint64_t> magnetization_sector_indices(int n, int m) {
  if (n < 1 || n > 30) throw std::invalid_argument("magnetization_sector_indices: bad n");
  if (std::abs(m) > n || ((n - m) % 2) != 0) {
    throw std::invalid_argument("magnetization_sector_indices: m must satisfy |m|<=n, m=n mod 2");
  }
  // m = n - 2 * (number of set bits)
  const int ones = (n - m) / 2;
  std::vector<std::uint64_t> out;
  const std::uint64_t d = std::uint64_t{1} << n;
  for (std::uint64_t b = 0; b < d; ++b) {
    if (std::popcount(b) == ones) out.push_back(b);
  }
  return out;
}

int largest_sector(int n) { return n % 2; }

}  // namespace ergo
