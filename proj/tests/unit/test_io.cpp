#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ergo/io.hpp"
#include "ergo/models.hpp"
#include "ergo/spectral.hpp"

using namespace ergo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ergo_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("fmt round trips doubles") {
  for (double v : {0.0, 1.0, -0.1, 1.0 / 3.0, 6.02214076e23, 5e-324}) CHECK(std::strtod(io::fmt(v).c_str(), nullptr) == v);
  CHECK(io::fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(io::fmt(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::fmt(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(io::fmt(0.25) == "0.25");
}

TEST_CASE("csv writer and reader") {
  std::ostringstream os;
  io::CsvWriter w(os, {"a", "b", "c"});
  w.row({"1", "x,y", "say \"hi\""});
  w.row({"", "2", "3"});
  CHECK_THROWS_AS(w.row({"1"}), std::logic_error);
  std::istringstream is(os.str());
  const auto rows = io::read_csv(is);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"1", "x,y", "say \"hi\""});
  CHECK(rows[2] == std::vector<std::string>{"", "2", "3"});
}

TEST_CASE("eigendecomposition cache") {
  const auto h = build_ising(4, 0.9, 0.3);
  const auto eig = full_diagonalize(h);
  const fs::path p = scratch("eig.bin");
  io::save_eigendecomposition(p, eig, "key-a");
  const auto back = io::load_eigendecomposition(p, "key-a");
  REQUIRE(back.has_value());
  CHECK(back->n_sites == 4);
  CHECK(back->energies == eig.energies);
  CHECK(back->vectors == eig.vectors);
  CHECK(!io::load_eigendecomposition(p, "key-b").has_value());
  CHECK(!io::load_eigendecomposition(scratch("missing.bin"), "key-a").has_value());

  const auto xxz = build_xxz(4, 0.5);
  const auto blk = full_diagonalize(xxz, 0);
  io::save_eigendecomposition(p, blk, "key-s");
  const auto bb = io::load_eigendecomposition(p, "key-s");
  REQUIRE(bb.has_value());
  CHECK(bb->sector == blk.sector);
  CHECK(bb->basis_indices == blk.basis_indices);

  // Truncated file is rejected rather than half-read.
  std::string bytes;
  {
    std::ifstream in(p, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK(!io::load_eigendecomposition(p, "key-s").has_value());
}

TEST_CASE("atomic write replaces content") {
  const fs::path p = scratch("atomic.txt");
  io::write_file_atomic(p, "first");
  io::write_file_atomic(p, "second");
  std::ifstream in(p);
  std::string s;
  std::getline(in, s);
  CHECK(s == "second");
}
