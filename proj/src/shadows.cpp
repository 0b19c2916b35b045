#include "ergo/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "ergo/kernels.hpp"
#include "ergo/parallel.hpp"

namespace ergo {

namespace {

using cplx = std::complex<double>;

std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

// Samples one shot by measuring sites in order 0..N-1. Site 0 is the most
// significant amplitude bit, so after each measurement the surviving
// amplitudes are one contiguous half of the rotated vector.
void sample_shot(std::span<const cplx> amps, int n, std::mt19937_64& rng, std::vector<cplx>& buf_a,
                 std::vector<cplx>& buf_b, std::uint64_t& bx, std::uint64_t& bz,
                 std::uint64_t& out) {
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = std::numbers::sqrt2 / 2.0;
  bx = bz = out = 0;
  const cplx* cur = amps.data();
  std::size_t len = amps.size();
  double norm2 = 1.0;
  std::vector<cplx>* dst = &buf_a;
  for (int site = 0; site < n; ++site) {
    const int axis = pick(rng);
    const double u = unif(rng);
    const std::size_t half = len / 2;
    const cplx* lo = cur;
    const cplx* hi = cur + half;
    cplx* nxt = dst->data();
    // Amplitudes for outcome 0 (+1).
    double p0 = 0.0;
    switch (axis) {
      case 0:  // X: H
        for (std::size_t i = 0; i < half; ++i) {
          nxt[i] = r * (lo[i] + hi[i]);
          p0 += std::norm(nxt[i]);
        }
        break;
      case 1:  // Y: H S^dagger
        for (std::size_t i = 0; i < half; ++i) {
          nxt[i] = r * (lo[i] + cplx(hi[i].imag(), -hi[i].real()));
          p0 += std::norm(nxt[i]);
        }
        break;
      default:  // Z
        for (std::size_t i = 0; i < half; ++i) {
          nxt[i] = lo[i];
          p0 += std::norm(nxt[i]);
        }
        break;
    }
    const std::uint64_t bit = std::uint64_t{1} << site;
    if (axis == 0) bx |= bit;
    else if (axis == 1) bx |= bit, bz |= bit;
    else bz |= bit;

    if (u * norm2 >= p0) {
      out |= bit;
      switch (axis) {
        case 0:
          for (std::size_t i = 0; i < half; ++i) nxt[i] = r * (lo[i] - hi[i]);
          break;
        case 1:
          for (std::size_t i = 0; i < half; ++i) nxt[i] = r * (lo[i] + cplx(-hi[i].imag(), hi[i].real()));
          break;
        default:
          for (std::size_t i = 0; i < half; ++i) nxt[i] = hi[i];
          break;
      }
      norm2 = std::max(norm2 - p0, 0.0);
    } else {
      norm2 = p0;
    }
    cur = nxt;
    len = half;
    dst = (dst == &buf_a) ? &buf_b : &buf_a;
  }
}

double pow3(int w) {
  double v = 1.0;
  for (int i = 0; i < w; ++i) v *= 3.0;
  return v;
}

}  // namespace

Axis ShadowDataset::basis(std::size_t shot, int site) const {
  const bool x = (basis_x.at(shot) >> site) & 1, z = (basis_z.at(shot) >> site) & 1;
  return x && z ? Axis::Y : (x ? Axis::X : Axis::Z);
}

int ShadowDataset::outcome(std::size_t shot, int site) const {
  return ((outcomes.at(shot) >> site) & 1) ? -1 : 1;
}

std::string ShadowDataset::encode(std::size_t shot) const {
  std::string s(2 * static_cast<std::size_t>(n_sites) + 1, ':');
  for (int j = 0; j < n_sites; ++j) {
    s[j] = axis_char(basis(shot, j));
    s[n_sites + 1 + j] = outcome(shot, j) > 0 ? '+' : '-';
  }
  return s;
}

void ShadowDataset::push_record(std::string_view rec) {
  const auto n = static_cast<std::size_t>(n_sites);
  if (rec.size() != 2 * n + 1 || rec[n] != ':') {
    throw std::invalid_argument("malformed shadow record '" + std::string(rec) + "'");
  }
  std::uint64_t x = 0, z = 0, o = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    switch (rec[j]) {
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default: throw std::invalid_argument("bad basis letter in '" + std::string(rec) + "'");
    }
    switch (rec[n + 1 + j]) {
      case '+': break;
      case '-': o |= bit; break;
      default: throw std::invalid_argument("bad outcome symbol in '" + std::string(rec) + "'");
    }
  }
  basis_x.push_back(x);
  basis_z.push_back(z);
  outcomes.push_back(o);
}

void ShadowDataset::write(std::ostream& os) const {
  os << "# shadows v1 n_sites=" << n_sites << " seed=" << seed << " shots=" << size() << "\n";
  for (std::size_t s = 0; s < size(); ++s) os << encode(s) << "\n";
}

ShadowDataset ShadowDataset::read(std::istream& is) {
  ShadowDataset ds;
  std::string line;
  bool have_n = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("seed=");
      if (pos != std::string::npos) ds.seed = std::stoull(line.substr(pos + 5));
      continue;
    }
    if (!have_n) {
      const auto colon = line.find(':');
      if (colon == std::string::npos || colon == 0 || colon > static_cast<std::size_t>(kMaxSites)) {
        throw std::invalid_argument("malformed shadow record '" + line + "'");
      }
      ds.n_sites = static_cast<int>(colon);
      have_n = true;
    }
    ds.push_record(line);
  }
  if (!have_n) throw std::invalid_argument("shadow dataset has no records");
  return ds;
}

ShadowDataset collect_shadows(const StateVector& v, std::size_t shots, std::uint64_t seed,
                              const ShadowOptions& opt) {
  if (opt.block_size == 0) throw std::invalid_argument("collect_shadows: block_size must be > 0");
  ShadowDataset ds;
  ds.n_sites = v.n_sites();
  ds.seed = seed;
  ds.basis_x.resize(shots);
  ds.basis_z.resize(shots);
  ds.outcomes.resize(shots);
  const std::size_t blocks = (shots + opt.block_size - 1) / opt.block_size;
  parallel_for(blocks, opt.jobs, [&](std::size_t b) {
    std::mt19937_64 rng = block_rng(seed, b);
    std::vector<cplx> buf_a(v.dim() / 2 + 1), buf_b(v.dim() / 2 + 1);
    const std::size_t end = std::min(shots, (b + 1) * opt.block_size);
    for (std::size_t s = b * opt.block_size; s < end; ++s) {
      sample_shot(v.amplitudes(), v.n_sites(), rng, buf_a, buf_b, ds.basis_x[s], ds.basis_z[s],
                  ds.outcomes[s]);
    }
  });
  return ds;
}

double estimate_pauli(const ShadowDataset& ds, const PauliString& p, const EstimatorOptions& opt) {
  if (!p.is_hermitian()) throw std::invalid_argument("estimate_pauli: non-Hermitian Pauli string");
  if (p.max_site() >= ds.n_sites) throw std::invalid_argument("estimate_pauli: string outside register");
  const double sign = p.phase() == 2 ? -1.0 : 1.0;
  if (p.is_identity()) return sign;
  if (ds.size() == 0) throw std::invalid_argument("estimate_pauli: empty dataset");
  const double scale = pow3(p.weight());
  const std::size_t groups = opt.median_of_means_groups;
  if (groups <= 1) {
    const std::int64_t m =
        kernels::shadow_signed_matches(ds.basis_x, ds.basis_z, ds.outcomes, p.x_mask(), p.z_mask());
    return sign * scale * static_cast<double>(m) / static_cast<double>(ds.size());
  }
  if (groups > ds.size()) throw std::invalid_argument("estimate_pauli: more groups than shots");
  std::vector<double> means(groups);
  const std::size_t per = ds.size() / groups;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * per, len = (g + 1 == groups) ? ds.size() - lo : per;
    const std::int64_t m = kernels::shadow_signed_matches(
        std::span(ds.basis_x).subspan(lo, len), std::span(ds.basis_z).subspan(lo, len),
        std::span(ds.outcomes).subspan(lo, len), p.x_mask(), p.z_mask());
    means[g] = scale * static_cast<double>(m) / static_cast<double>(len);
  }
  std::nth_element(means.begin(), means.begin() + groups / 2, means.end());
  double med = means[groups / 2];
  if (groups % 2 == 0) {
    med = 0.5 * (med + *std::max_element(means.begin(), means.begin() + groups / 2));
  }
  return sign * med;
}

Eigen::MatrixXd estimate_covariance_matrix(const ShadowDataset& ds, const OperatorBasis& basis,
                                           const EstimatorOptions& opt) {
  if (basis.n_sites() != ds.n_sites) throw std::invalid_argument("basis/dataset size mismatch");
  const auto n = static_cast<Eigen::Index>(basis.size());
  struct Hash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
      return PauliStringHash{}(PauliString::from_masks(k.first, k.second));
    }
  };
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, double, Hash> cache;
  auto est = [&](const PauliString& r) {
    const auto key = std::pair{r.x_mask(), r.z_mask()};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double e = estimate_pauli(ds, r.stripped(), opt);
    cache.emplace(key, e);
    return e;
  };
  Eigen::VectorXd mean(n);
  for (Eigen::Index a = 0; a < n; ++a) mean[a] = est(basis[a]);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    m(a, a) = 1.0 - mean[a] * mean[a];
    for (Eigen::Index b = a + 1; b < n; ++b) {
      double sym = 0.0;
      if (commutes(basis[a], basis[b])) {
        const PauliString r = pauli_product(basis[a], basis[b]);
        sym = (r.phase() == 0 ? 1.0 : -1.0) * est(r);
      }
      m(a, b) = m(b, a) = sym - mean[a] * mean[b];
    }
  }
  return m;
}

double de_error_bound(double eps, std::size_t n_l) {
  if (n_l < 2) throw std::invalid_argument("de_error_bound: N_L must be >= 2");
  if (eps < 0.0) throw std::invalid_argument("de_error_bound: eps must be >= 0");
  return static_cast<double>(n_l) * eps / std::sqrt(static_cast<double>(n_l - 1));
}

double shots_rule_of_thumb(int locality, std::size_t n_matrix_elements, double eps) {
  if (locality < 1 || n_matrix_elements < 1 || !(eps > 0.0)) {
    throw std::invalid_argument("shots_rule_of_thumb: invalid arguments");
  }
  return pow3(2 * locality) * std::log(static_cast<double>(n_matrix_elements)) / (eps * eps);
}

}  // namespace ergo
