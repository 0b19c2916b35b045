#include <cmath>
#include <fstream>
#include <sstream>

#include "ergo/cli.hpp"

namespace ergo::cli {

using nlohmann::json;

namespace {

std::string child_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

const char* type_name(const json& j) { return j.type_name(); }

}  // namespace

bool Field::has(const std::string& key) const {
  return j_->is_object() && j_->contains(key) && !(*j_)[key].is_null();
}

Field Field::at(const std::string& key) const {
  if (!j_->is_object()) fail("expected an object");
  auto it = j_->find(key);
  if (it == j_->end() || it->is_null()) {
    throw ValidationError(child_path(path_, key), "required field is missing");
  }
  return Field(*it, child_path(path_, key));
}

std::optional<Field> Field::find(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return Field((*j_)[key], child_path(path_, key));
}

Field Field::index(std::size_t i) const {
  if (!j_->is_array()) fail("expected an array");
  if (i >= j_->size()) fail("index out of range");
  return Field((*j_)[i], path_ + "[" + std::to_string(i) + "]");
}

std::size_t Field::size() const {
  if (!j_->is_array()) fail(std::string("expected an array, got ") + type_name(*j_));
  return j_->size();
}

double Field::number() const {
  if (!j_->is_number()) fail(std::string("expected a number, got ") + type_name(*j_));
  const double v = j_->get<double>();
  if (!std::isfinite(v)) fail("expected a finite number");
  return v;
}

std::int64_t Field::integer() const {
  if (j_->is_number_integer()) return j_->get<std::int64_t>();
  if (j_->is_number_float()) {
    const double v = j_->get<double>();
    if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 9e15) {
      return static_cast<std::int64_t>(v);
    }
  }
  fail(std::string("expected an integer, got ") + type_name(*j_));
}

std::uint64_t Field::uinteger() const {
  if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
  const std::int64_t v = integer();
  if (v < 0) fail("expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

bool Field::boolean() const {
  if (!j_->is_boolean()) fail(std::string("expected true/false, got ") + type_name(*j_));
  return j_->get<bool>();
}

std::string Field::string() const {
  if (!j_->is_string()) fail(std::string("expected a string, got ") + type_name(*j_));
  return j_->get<std::string>();
}

std::vector<double> Field::numbers() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(index(i).number());
  return out;
}

std::vector<std::int64_t> Field::integers() const {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(index(i).integer());
  return out;
}

std::vector<std::string> Field::strings() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(index(i).string());
  return out;
}

double Field::number_or(const std::string& key, double fallback) const {
  auto f = find(key);
  return f ? f->number() : fallback;
}

std::int64_t Field::integer_or(const std::string& key, std::int64_t fallback) const {
  auto f = find(key);
  return f ? f->integer() : fallback;
}

bool Field::boolean_or(const std::string& key, bool fallback) const {
  auto f = find(key);
  return f ? f->boolean() : fallback;
}

std::string Field::string_or(const std::string& key, const std::string& fallback) const {
  auto f = find(key);
  return f ? f->string() : fallback;
}

void Field::allow_only(std::initializer_list<const char*> allowed) const {
  if (!j_->is_object()) fail(std::string("expected an object, got ") + type_name(*j_));
  for (const auto& [key, value] : j_->items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(child_path(path_, key), "unknown field");
  }
}

void Field::fail(const std::string& msg) const { throw ValidationError(path_, msg); }

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    throw ValidationError(std::to_string(line) + ":" + std::to_string(col),
                          pos == std::string::npos ? msg : msg.substr(pos));
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("", "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  json j = parse_json_text(ss.str());
  if (!j.is_object()) throw ValidationError("", "config root must be an object");
  return j;
}

RunContext make_context(const CommonOptions& opt) {
  RunContext ctx;
  ctx.root = opt.config.empty() ? json::object() : load_json_file(opt.config);
  const Field root = ctx.cfg();
  ctx.seed = opt.seed ? *opt.seed : (root.has("seed") ? root.at("seed").uinteger() : 1);
  if (opt.jobs) {
    ctx.jobs = *opt.jobs;
  } else {
    ctx.jobs = static_cast<int>(root.integer_or("jobs", 1));
  }
  if (ctx.jobs < 1) throw ValidationError("jobs", "must be >= 1");
  if (opt.out) ctx.out = *opt.out;
  else ctx.out = root.string_or("out", "out");
  return ctx;
}

ModelConfig parse_model(const Field& f) {
  f.allow_only({"family", "n", "boundary", "g", "h", "h1", "hN", "delta", "sector", "terms",
                "max_dim"});
  ModelConfig m;
  try {
    m.spec.family = parse_family(f.string_or("family", "ising"));
  } catch (const std::invalid_argument& e) {
    f.at("family").fail(e.what());
  }
  const auto n = f.at("n").integer();
  if (n < 2 || n > 30) f.at("n").fail("must be in [2, 30]");
  m.spec.n_sites = static_cast<int>(n);
  try {
    m.spec.boundary = parse_boundary(f.string_or("boundary", "open"));
  } catch (const std::invalid_argument& e) {
    f.at("boundary").fail(e.what());
  }
  auto allowed_params = [&](std::initializer_list<const char*> keys,
                            std::initializer_list<const char*> forbidden) {
    for (const char* k : forbidden) {
      if (f.has(k)) f.at(k).fail(std::string("not a parameter of family '") +
                                 std::string(family_name(m.spec.family)) + "'");
    }
    for (const char* k : keys) {
      if (f.has(k)) m.spec.parameters[k] = f.at(k).number();
    }
  };
  switch (m.spec.family) {
    case ModelFamily::ising:
      allowed_params({"g", "h", "h1", "hN"}, {"delta", "terms"});
      break;
    case ModelFamily::xxz:
      allowed_params({"delta", "h1"}, {"g", "h", "hN", "terms"});
      break;
    case ModelFamily::custom: {
      allowed_params({}, {"g", "h", "h1", "hN", "delta"});
      const Field terms = f.at("terms");
      if (terms.size() == 0) terms.fail("must not be empty");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const Field t = terms.index(i);
        t.allow_only({"c", "op"});
        PauliString op;
        try {
          op = PauliString::parse(t.at("op").string());
        } catch (const std::invalid_argument& e) {
          t.at("op").fail(e.what());
        }
        if (op.max_site() >= m.spec.n_sites) t.at("op").fail("acts outside the chain");
        m.spec.terms.push_back({t.at("c").number(), op});
      }
      break;
    }
  }
  if (f.has("sector")) {
    const auto s = f.at("sector").integer();
    if (std::abs(s) > n || (n - s) % 2 != 0) f.at("sector").fail("must satisfy |m| <= n and m = n mod 2");
    m.sector = static_cast<int>(s);
  }
  if (f.has("max_dim")) {
    const auto d = f.at("max_dim").uinteger();
    if (d < 2) f.at("max_dim").fail("must be >= 2");
    m.max_dim = d;
  }
  return m;
}

HamiltonianOperator build(const ModelConfig& m) {
  try {
    return build_model(m.spec);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("model", e.what());
  }
}

std::optional<int> resolve_sector(const ModelConfig& m, const HamiltonianOperator& h) {
  if (m.sector) {
    if (h.n_sites() <= 20 && !h.conserves_magnetization()) {
      throw ValidationError("model.sector", "model does not conserve magnetization");
    }
    return m.sector;
  }
  if (h.family() == ModelFamily::xxz) return largest_sector(h.n_sites());
  return std::nullopt;
}

}  // namespace ergo::cli
