#include "ergo/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ergo::io {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      os_ << f;
    } else {
      os_ << '"';
      for (char c : f) {
        if (c == '"') os_ << '"';
        os_ << c;
      }
      os_ << '"';
    }
  }
  os_ << '\n';
}

std::vector<std::vector<std::string>> read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
        else if (c == '"') quoted = false;
        else cur += c;
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    row.push_back(std::move(cur));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

constexpr char kMagic[8] = {'E', 'R', 'G', 'O', 'E', 'D', 'C', 'H'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

void save_eigendecomposition(const std::filesystem::path& path, const EigenDecomposition& eig,
                             const std::string& key) {
  std::ostringstream os(std::ios::binary);
  os.write(kMagic, sizeof kMagic);
  put(os, kEdCacheVersion);
  put(os, static_cast<std::uint64_t>(key.size()));
  os.write(key.data(), static_cast<std::streamsize>(key.size()));
  put(os, static_cast<std::int32_t>(eig.n_sites));
  put(os, static_cast<std::int32_t>(eig.sector.has_value()));
  put(os, static_cast<std::int32_t>(eig.sector.value_or(0)));
  put(os, static_cast<std::uint64_t>(eig.basis_indices.size()));
  os.write(reinterpret_cast<const char*>(eig.basis_indices.data()),
           static_cast<std::streamsize>(eig.basis_indices.size() * sizeof(std::uint64_t)));
  put(os, static_cast<std::uint64_t>(eig.vectors.rows()));
  put(os, static_cast<std::uint64_t>(eig.vectors.cols()));
  os.write(reinterpret_cast<const char*>(eig.energies.data()),
           static_cast<std::streamsize>(eig.energies.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(eig.vectors.data()),
           static_cast<std::streamsize>(eig.vectors.size() * sizeof(double)));
  write_file_atomic(path, os.str());
}

std::optional<EigenDecomposition> load_eigendecomposition(const std::filesystem::path& path,
                                                          const std::string& key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    return std::nullopt;
  }
  std::uint32_t version = 0;
  std::uint64_t key_len = 0;
  if (!get(is, version) || version != kEdCacheVersion || !get(is, key_len) || key_len > (1u << 20)) {
    return std::nullopt;
  }
  std::string stored(key_len, '\0');
  if (!is.read(stored.data(), static_cast<std::streamsize>(key_len)) || stored != key) {
    return std::nullopt;
  }
  EigenDecomposition eig;
  std::int32_t n = 0, has_sector = 0, sector = 0;
  std::uint64_t n_idx = 0, rows = 0, cols = 0;
  if (!get(is, n) || !get(is, has_sector) || !get(is, sector) || !get(is, n_idx)) return std::nullopt;
  if (n < 1 || n > 30 || n_idx > (std::uint64_t{1} << n)) return std::nullopt;
  eig.n_sites = n;
  if (has_sector) eig.sector = sector;
  eig.basis_indices.resize(n_idx);
  if (!is.read(reinterpret_cast<char*>(eig.basis_indices.data()),
               static_cast<std::streamsize>(n_idx * sizeof(std::uint64_t))) ||
      !get(is, rows) || !get(is, cols)) {
    return std::nullopt;
  }
  if (rows != cols || rows > (std::uint64_t{1} << n)) return std::nullopt;
  eig.energies.resize(static_cast<Eigen::Index>(cols));
  eig.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (!is.read(reinterpret_cast<char*>(eig.energies.data()),
               static_cast<std::streamsize>(cols * sizeof(double))) ||
      !is.read(reinterpret_cast<char*>(eig.vectors.data()),
               static_cast<std::streamsize>(rows * cols * sizeof(double)))) {
    return std::nullopt;
  }
  return eig;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ergo::io
