#include "levyhedge/config.hpp"

#include "levyhedge/errors.hpp"
#include "levyhedge/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace levyhedge {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"family", "mu", "tilt", "sigma", "gamma", "m", "delta", "C", "G", "M"}},
      {"market", {"T", "t", "spot", "strike_min", "strike_max", "strike_step", "chi"}},
      {"fourier",
       {"mode", "n_grid", "eta", "alpha", "rel_tol", "abs_tol", "head_length", "accuracy_limit"}},
      {"mc", {"paths", "seed", "threads", "chi"}},
      {"output", {"path"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return std::string(trim(*v));
  }

  std::optional<double> number(const std::string& section, const std::string& key) const {
    const auto t = text(section, key);
    if (!t) return std::nullopt;
    const auto v = parse_number(*t);
    if (!v || !std::isfinite(*v)) fail(section, key, "expected a finite number, got '" + *t + "'");
    return v;
  }

  void number(const std::string& section, const std::string& key, double& out) const {
    if (const auto v = number(section, key)) out = *v;
  }

  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& out) const {
    const auto t = text(section, key);
    if (!t) return;
    Int v{};
    const auto r = std::from_chars(t->data(), t->data() + t->size(), v);
    if (r.ec != std::errc() || r.ptr != t->data() + t->size()) {
      fail(section, key, "expected a non-negative integer, got '" + *t + "'");
    }
    out = v;
  }

  std::vector<double> list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const auto t = text(section, key);
    if (!t) return out;
    std::string_view rest = *t;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto v = parse_number(item);
      if (!v) fail(section, key, "bad list entry '" + std::string(trim(item)) + "'");
      out.push_back(*v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return out;
  }

  double required(const std::string& section, const std::string& key) const {
    const auto v = number(section, key);
    if (!v) fail(section, key, "missing");
    return *v;
  }

  [[noreturn]] static void fail(const std::string& section, const std::string& key,
                                const std::string& what) {
    throw ConfigError("config [" + section + "] " + key + ": " + what);
  }

 private:
  const pt::ptree& tree_;
};

void check_unknown(const pt::ptree& tree) {
  const auto& keys = known_keys();
  for (const auto& [section, child] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end() || child.data().size() > 0) {
      throw ConfigError("config: unknown section or top-level key '" + section + "'");
    }
    for (const auto& [key, value] : child) {
      if (!it->second.count(key)) {
        throw ConfigError("config [" + section + "]: unknown key '" + key + "'");
      }
    }
  }
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_number(v[i]);
  }
  return out;
}

}  // namespace

std::string family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::merton:
      return "merton";
    case ModelFamily::vg:
      return "vg";
    case ModelFamily::black_scholes:
      break;
  }
  return "black_scholes";
}

std::vector<double> RunConfig::chis() const {
  if (!chi_list.empty()) return chi_list;
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((strike_max - strike_min) / strike_step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back((strike_min + strike_step * i) / spot);
  return out;
}

std::vector<double> RunConfig::mc_chis() const { return mc_chi_list.empty() ? chis() : mc_chi_list; }

LevyModel RunConfig::model() const {
  LevyModel m;
  switch (family) {
    case ModelFamily::merton:
      m = merton_model(merton);
      break;
    case ModelFamily::vg:
      m = vg_model(vg);
      break;
    case ModelFamily::black_scholes:
      m.sigma = sigma;
      break;
  }
  m.mu = mu ? *mu : drift_for_tilt(*m.measure, m.sigma, tilt);
  return m;
}

std::optional<ModelParams> RunConfig::params() const {
  const LevyModel m = model();
  if (family == ModelFamily::merton) {
    MertonParams p = merton;
    p.mu = m.mu;
    return p;
  }
  if (family == ModelFamily::vg) {
    VgParams p = vg;
    p.mu = m.mu;
    return p;
  }
  return std::nullopt;
}

void RunConfig::validate() const {
  if (!(maturity > time) || !(time >= 0.0)) {
    throw ConfigError("config [market]: need 0 <= t < T");
  }
  if (!(spot > 0.0)) throw ConfigError("config [market] spot: must be > 0");
  if (chi_list.empty()) {
    if (!(strike_step > 0.0) || !(strike_min > 0.0) || !(strike_max >= strike_min)) {
      throw ConfigError("config [market]: strike grid needs 0 < strike_min <= strike_max and "
                        "strike_step > 0");
    }
  }
  auto ascending = [](const std::vector<double>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0) || (i > 0 && !(v[i] > v[i - 1]))) {
        throw ConfigError(std::string("config ") + what +
                          ": moneyness values must be positive and strictly ascending");
      }
    }
  };
  ascending(chi_list, "[market] chi");
  ascending(mc_chi_list, "[mc] chi");
  if (!(sigma >= 0.0)) throw ConfigError("config [model] sigma: must be >= 0");
  if (family == ModelFamily::black_scholes && !(sigma > 0.0)) {
    throw ConfigError("config [model] sigma: must be > 0 for black_scholes");
  }
  fourier.validate();
  mc.validate();
}

std::string RunConfig::canonical() const {
  std::vector<std::string> lines;
  auto put = [&](const std::string& key, const std::string& value) {
    lines.push_back(key + "=" + value);
  };
  auto num = [&](const std::string& key, double v) { put(key, format_number(v)); };
  put("model.family", family_name(family));
  if (mu) {
    num("model.mu", *mu);
  } else {
    num("model.tilt", tilt);
  }
  num("model.sigma", sigma);
  if (family == ModelFamily::merton) {
    num("model.gamma", merton.gamma);
    num("model.m", merton.m);
    num("model.delta", merton.delta);
  } else if (family == ModelFamily::vg) {
    num("model.C", vg.c_par);
    num("model.G", vg.g_par);
    num("model.M", vg.m_par);
  }
  num("market.T", maturity);
  num("market.t", time);
  num("market.spot", spot);
  put("market.chi", join(chis()));
  put("fourier.mode", fourier.mode == FourierMode::fft_batch ? "fft" : "quadrature");
  put("fourier.n_grid", std::to_string(fourier.n_grid));
  num("fourier.eta", fourier.eta);
  num("fourier.alpha", fourier.alpha);
  num("fourier.rel_tol", fourier.rel_tol);
  num("fourier.abs_tol", fourier.abs_tol);
  num("fourier.head_length", fourier.head_length);
  num("fourier.accuracy_limit", fourier.accuracy_limit);
  put("mc.paths", std::to_string(mc.n_paths));
  put("mc.seed", std::to_string(mc.seed));
  put("mc.chi", join(mc_chis()));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string RunConfig::digest() const { return sha256_hex(canonical()); }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  check_unknown(tree);
  const Reader r(tree);
  RunConfig c;

  const auto family = r.text("model", "family");
  if (!family) Reader::fail("model", "family", "missing");
  if (*family == "merton") {
    c.family = ModelFamily::merton;
  } else if (*family == "vg") {
    c.family = ModelFamily::vg;
  } else if (*family == "black_scholes") {
    c.family = ModelFamily::black_scholes;
  } else {
    Reader::fail("model", "family", "expected merton, vg or black_scholes, got '" + *family + "'");
  }
  c.mu = r.number("model", "mu");
  const auto tilt = r.number("model", "tilt");
  if (c.mu && tilt) throw ConfigError("config [model]: give either mu or tilt, not both");
  if (tilt) c.tilt = *tilt;
  r.number("model", "sigma", c.sigma);
  if (c.family == ModelFamily::black_scholes && !r.number("model", "sigma")) {
    Reader::fail("model", "sigma", "missing");
  }
  if (c.family == ModelFamily::merton) {
    c.merton.sigma = c.sigma;
    c.merton.gamma = r.required("model", "gamma");
    c.merton.m = r.required("model", "m");
    c.merton.delta = r.required("model", "delta");
  } else if (c.family == ModelFamily::vg) {
    c.vg.sigma = c.sigma;
    c.vg.c_par = r.required("model", "C");
    c.vg.g_par = r.required("model", "G");
    c.vg.m_par = r.required("model", "M");
  }
  for (const char* key : {"gamma", "m", "delta"}) {
    if (c.family != ModelFamily::merton && r.text("model", key)) {
      Reader::fail("model", key, "only valid for family = merton");
    }
  }
  for (const char* key : {"C", "G", "M"}) {
    if (c.family != ModelFamily::vg && r.text("model", key)) {
      Reader::fail("model", key, "only valid for family = vg");
    }
  }

  r.number("market", "T", c.maturity);
  r.number("market", "t", c.time);
  r.number("market", "spot", c.spot);
  r.number("market", "strike_min", c.strike_min);
  r.number("market", "strike_max", c.strike_max);
  r.number("market", "strike_step", c.strike_step);
  c.chi_list = r.list("market", "chi");

  if (const auto mode = r.text("fourier", "mode")) {
    if (*mode == "fft") {
      c.fourier.mode = FourierMode::fft_batch;
    } else if (*mode == "quadrature") {
      c.fourier.mode = FourierMode::direct_quadrature;
    } else {
      Reader::fail("fourier", "mode", "expected fft or quadrature, got '" + *mode + "'");
    }
  }
  r.integer("fourier", "n_grid", c.fourier.n_grid);
  r.number("fourier", "eta", c.fourier.eta);
  r.number("fourier", "alpha", c.fourier.alpha);
  r.number("fourier", "rel_tol", c.fourier.rel_tol);
  r.number("fourier", "abs_tol", c.fourier.abs_tol);
  r.number("fourier", "head_length", c.fourier.head_length);
  r.number("fourier", "accuracy_limit", c.fourier.accuracy_limit);

  r.integer("mc", "paths", c.mc.n_paths);
  r.integer("mc", "seed", c.mc.seed);
  r.integer("mc", "threads", c.mc.threads);
  c.mc_chi_list = r.list("mc", "chi");

  if (const auto path = r.text("output", "path")) c.output = *path;

  c.mc.horizon = c.horizon();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace levyhedge
