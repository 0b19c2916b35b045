#include "ergo/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "ergo/kernels.hpp"

namespace ergo {

namespace {

constexpr std::complex<double> kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

std::uint64_t reverse_bits(std::uint64_t m, int n) {
  std::uint64_t r = 0;
  while (m) {
    const int j = std::countr_zero(m);
    r |= std::uint64_t{1} << (n - 1 - j);
    m &= m - 1;
  }
  return r;
}

void check_site(int site) {
  if (site < 0 || site >= kMaxSites) {
    throw std::invalid_argument("site index out of range: " + std::to_string(site));
  }
}

}  // namespace

char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

std::string_view boundary_name(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary parse_boundary(std::string_view s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary '" + std::string(s) + "'");
}

PauliString PauliString::from_masks(std::uint64_t x, std::uint64_t z, int phase) {
  if ((x | z) >> kMaxSites) throw std::invalid_argument("Pauli mask exceeds site limit");
  PauliString p;
  p.x_ = x;
  p.z_ = z;
  p.phase_ = static_cast<std::uint8_t>(((phase % 4) + 4) % 4);
  return p;
}

PauliString PauliString::single(int site, Axis axis) {
  check_site(site);
  const std::uint64_t bit = std::uint64_t{1} << site;
  switch (axis) {
    case Axis::X: return from_masks(bit, 0);
    case Axis::Y: return from_masks(bit, bit);
    case Axis::Z: return from_masks(0, bit);
  }
  return {};
}

PauliString PauliString::from_support(std::span<const std::pair<int, Axis>> support, int phase) {
  std::uint64_t x = 0, z = 0;
  int prev = -1;
  for (const auto& [site, axis] : support) {
    check_site(site);
    if (site <= prev) throw std::invalid_argument("Pauli support sites must be strictly increasing");
    prev = site;
    const PauliString s = single(site, axis);
    x |= s.x_;
    z |= s.z_;
  }
  return from_masks(x, z, phase);
}

PauliString PauliString::parse(std::string_view label) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < label.size() && std::isspace(static_cast<unsigned char>(label[i]))) ++i;
  };
  int phase = 0;
  skip_ws();
  if (i < label.size() && (label[i] == '+' || label[i] == '-')) {
    if (label[i] == '-') phase = 2;
    ++i;
    skip_ws();
  }
  if (i < label.size() && label[i] == 'i') {
    phase += 1;
    ++i;
    skip_ws();
  }
  std::vector<std::pair<int, Axis>> sup;
  bool saw_identity = false;
  while (i < label.size()) {
    const char c = label[i++];
    if (c == 'I') {
      saw_identity = true;
      skip_ws();
      continue;
    }
    Axis a;
    if (c == 'X') a = Axis::X;
    else if (c == 'Y') a = Axis::Y;
    else if (c == 'Z') a = Axis::Z;
    else throw std::invalid_argument("bad Pauli label '" + std::string(label) + "'");
    std::size_t start = i;
    while (i < label.size() && std::isdigit(static_cast<unsigned char>(label[i]))) ++i;
    if (start == i) throw std::invalid_argument("missing site index in '" + std::string(label) + "'");
    sup.emplace_back(std::stoi(std::string(label.substr(start, i - start))), a);
    skip_ws();
  }
  if (sup.empty() && !saw_identity) throw std::invalid_argument("empty Pauli label");
  std::sort(sup.begin(), sup.end());
  return from_support(sup, phase);
}

std::vector<std::pair<int, Axis>> PauliString::support() const {
  std::vector<std::pair<int, Axis>> out;
  std::uint64_t m = x_ | z_;
  while (m) {
    const int j = std::countr_zero(m);
    const bool xb = (x_ >> j) & 1, zb = (z_ >> j) & 1;
    out.emplace_back(j, xb && zb ? Axis::Y : (xb ? Axis::X : Axis::Z));
    m &= m - 1;
  }
  return out;
}

int PauliString::weight() const noexcept { return std::popcount(x_ | z_); }

int PauliString::max_site() const noexcept {
  const std::uint64_t m = x_ | z_;
  return m ? 63 - std::countl_zero(m) : -1;
}

std::string PauliString::to_string() const {
  static constexpr const char* prefix[4] = {"", "i ", "-", "-i "};
  std::string s = prefix[phase_];
  if (is_identity()) return s + "I";
  bool first = true;
  for (const auto& [site, axis] : support()) {
    if (!first) s += ' ';
    first = false;
    s += axis_char(axis);
    s += std::to_string(site);
  }
  return s;
}

PauliString pauli_product(const PauliString& a, const PauliString& b) {
  // With sigma(x,z) = i^{xz} X^x Z^z per site and Z^z X^x = (-1)^{xz} X^x Z^z.
  const std::uint64_t x = a.x_mask() ^ b.x_mask();
  const std::uint64_t z = a.z_mask() ^ b.z_mask();
  const int p = a.phase() + b.phase() + std::popcount(a.x_mask() & a.z_mask()) +
                std::popcount(b.x_mask() & b.z_mask()) +
                2 * std::popcount(a.z_mask() & b.x_mask()) - std::popcount(x & z);
  return PauliString::from_masks(x, z, p);
}

bool commutes(const PauliString& a, const PauliString& b) noexcept {
  const int s = std::popcount(a.x_mask() & b.z_mask()) + std::popcount(a.z_mask() & b.x_mask());
  return (s & 1) == 0;
}

std::pair<std::uint64_t, std::uint64_t> amplitude_masks(const PauliString& p, int n_sites) {
  if (p.max_site() >= n_sites) {
    throw std::invalid_argument("Pauli string " + p.to_string() + " exceeds " +
                                std::to_string(n_sites) + " sites");
  }
  return {reverse_bits(p.x_mask(), n_sites), reverse_bits(p.z_mask(), n_sites)};
}

PauliAction pauli_action(const PauliString& p, int n_sites, std::uint64_t b) {
  const auto [x, z] = amplitude_masks(p, n_sites);
  const int e = p.phase() + std::popcount(x & z) + 2 * (std::popcount(z & b) & 1);
  return {b ^ x, kPhase[e & 3]};
}

std::size_t PauliStringHash::operator()(const PauliString& p) const noexcept {
  std::uint64_t h = p.x_mask() * 0x9E3779B97F4A7C15ull;
  h ^= p.z_mask() + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(p.phase()) << 61;
  return static_cast<std::size_t>(h);
}

// StateVector

StateVector::StateVector(int n_sites, std::vector<std::complex<double>> amps)
    : n_sites_(n_sites), amps_(std::move(amps)) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("StateVector: n_sites out of range");
  if (amps_.size() != (std::size_t{1} << n_sites)) {
    throw std::invalid_argument("StateVector: amplitude count is not 2^n_sites");
  }
  double norm2 = 0.0;
  for (const auto& a : amps_) norm2 += std::norm(a);
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
    throw std::invalid_argument("StateVector: not normalized");
  }
}

StateVector StateVector::normalized(int n_sites, std::vector<std::complex<double>> amps) {
  double norm2 = 0.0;
  for (const auto& a : amps) norm2 += std::norm(a);
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw std::invalid_argument("StateVector: cannot normalize a zero or non-finite vector");
  }
  const double s = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= s;
  return StateVector(n_sites, std::move(amps));
}

StateVector StateVector::basis_state(int n_sites, std::uint64_t index) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("StateVector: n_sites out of range");
  std::vector<std::complex<double>> amps(std::size_t{1} << n_sites);
  if (index >= amps.size()) throw std::invalid_argument("basis index out of range");
  amps[index] = 1.0;
  return StateVector(n_sites, std::move(amps));
}

StateVector StateVector::from_real(int n_sites, std::span<const double> amps) {
  return normalized(n_sites, std::vector<std::complex<double>>(amps.begin(), amps.end()));
}

// OperatorBasis

OperatorBasis::OperatorBasis(int n_sites, std::vector<PauliString> elements, int locality,
                             Boundary boundary)
    : n_sites_(n_sites), locality_(locality), boundary_(boundary), elements_(std::move(elements)) {
  if (n_sites < 1 || n_sites > kMaxSites) throw std::invalid_argument("OperatorBasis: bad n_sites");
  index_.reserve(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const PauliString& p = elements_[i];
    if (p.phase() != 0) throw std::invalid_argument("OperatorBasis: element phase must be +1");
    if (p.is_identity()) throw std::invalid_argument("OperatorBasis: identity not allowed");
    if (p.max_site() >= n_sites) throw std::invalid_argument("OperatorBasis: element outside chain");
    if (!index_.emplace(p, i).second) {
      throw std::invalid_argument("OperatorBasis: duplicate element " + p.to_string());
    }
  }
}

std::optional<std::size_t> OperatorBasis::index_of(const PauliString& p) const {
  auto it = index_.find(p.stripped());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

OperatorBasis generate_local_basis(int n_sites, int locality, Boundary boundary) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw std::invalid_argument("generate_local_basis: n_sites must be in [1, 62]");
  }
  if (locality < 1) throw std::invalid_argument("generate_local_basis: locality must be >= 1");
  if (locality > n_sites) throw std::invalid_argument("generate_local_basis: locality > n_sites");

  std::vector<PauliString> out;
  std::unordered_map<PauliString, std::size_t, PauliStringHash> seen;
  // Per-site operator codes: 0 = I, 1 = X, 2 = Y, 3 = Z.
  const std::uint64_t ox[4] = {0, 1, 1, 0};
  const std::uint64_t oz[4] = {0, 0, 1, 1};

  for (int w = 1; w <= locality; ++w) {
    const int n_windows =
        (boundary == Boundary::periodic && w > 1) ? n_sites : n_sites - w + 1;
    for (int left = 0; left < n_windows; ++left) {
      std::vector<int> sites(w);
      for (int k = 0; k < w; ++k) sites[k] = (left + k) % n_sites;
      // Endpoints range over X,Y,Z; interior over I,X,Y,Z. Enumerate as a
      // mixed-radix counter, most significant digit first.
      std::vector<int> lo(w, 1), code(w, 1);
      for (int k = 1; k + 1 < w; ++k) lo[k] = code[k] = 0;
      while (true) {
        std::uint64_t x = 0, z = 0;
        for (int k = 0; k < w; ++k) {
          x |= ox[code[k]] << sites[k];
          z |= oz[code[k]] << sites[k];
        }
        PauliString p = PauliString::from_masks(x, z);
        if (seen.emplace(p, out.size()).second) out.push_back(p);
        int k = w - 1;
        while (k >= 0 && code[k] == 3) {
          code[k] = lo[k];
          --k;
        }
        if (k < 0) break;
        ++code[k];
      }
    }
  }
  return OperatorBasis(n_sites, std::move(out), locality, boundary);
}

std::complex<double> expectation_complex(const PauliString& p, const StateVector& v) {
  const auto [x, z] = amplitude_masks(p, v.n_sites());
  const int e = p.phase() + std::popcount(x & z);
  return kPhase[e & 3] * kernels::pauli_overlap(v.amplitudes(), x, z);
}

double expectation(const PauliString& p, const StateVector& v) {
  if (!p.is_hermitian()) {
    throw std::invalid_argument("expectation: non-Hermitian Pauli string " + p.to_string());
  }
  return expectation_complex(p, v).real();
}

}  // namespace ergo
