#include "doctest.h"

#include "levyhedge/commands.hpp"
#include "levyhedge/config.hpp"
#include "levyhedge/errors.hpp"
#include "levyhedge/text.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace levyhedge;
namespace fs = std::filesystem;

namespace {

std::string env(const char* name) {
  const char* v = std::getenv(name);
  REQUIRE_MESSAGE(v != nullptr, name << " must be set by the test driver");
  return v;
}

std::string config_path(const std::string& name) {
  return env("LEVYHEDGE_SOURCE_DIR") + "/configs/" + name;
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("levyhedge_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  static int counter = 0;
  const auto base = scratch_dir() / ("run" + std::to_string(counter++));
  const std::string cmd = "'" + env("LEVYHEDGE_CLI") + "' " + args + " > '" + base.string() +
                          ".out' 2> '" + base.string() + ".err'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(base.string() + ".out");
  r.err = slurp(base.string() + ".err");
  return r;
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    FAIL("missing column " << name);
    return 0;
  }
  double number(std::size_t row, const std::string& name) const {
    const auto v = parse_number(rows[row][column(name)]);
    REQUIRE(v.has_value());
    return *v;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      csv.comments.push_back(line);
    } else if (csv.header.empty()) {
      csv.header = split(line);
    } else {
      csv.rows.push_back(split(line));
    }
  }
  return csv;
}

std::map<std::string, std::string> parse_record(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

double record_number(const std::map<std::string, std::string>& rec, const std::string& key) {
  const auto it = rec.find(key);
  REQUIRE_MESSAGE(it != rec.end(), "missing key " << key);
  const auto v = parse_number(it->second);
  REQUIRE(v.has_value());
  return *v;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "[model]\nfamily = merton\nsigma = 0.0435\ngamma = 0.0054\nm = -0.0697\n"
      "delta = 0.0889\ntilt = 0.5\n[market]\nspot = 2102.4\n");
  const auto cfg = parse_config(in);
  CHECK(cfg.family == ModelFamily::merton);
  const auto chis = cfg.chis();
  REQUIRE(chis.size() == 13);
  CHECK(chis.front() == doctest::Approx(1900 / 2102.4).epsilon(1e-15));
  CHECK(chis.back() == doctest::Approx(2500 / 2102.4).epsilon(1e-15));
  CHECK(cfg.horizon() == doctest::Approx(0.05));
  CHECK(cfg.mc.horizon == doctest::Approx(0.05));
  CHECK(cfg.fourier.n_grid == 16384);
  CHECK(cfg.fourier.eta == 0.025);
  CHECK(cfg.fourier.alpha == 1.75);
  CHECK(cfg.digest().size() == 64);
  CHECK(cfg.digest() == sha256_hex(cfg.canonical()));
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto mmm = to_mmm(cfg.model());
  CHECK(mmm.tilt_ratio() == doctest::Approx(-0.5).epsilon(1e-12));

  auto bad = [](const std::string& text) {
    std::istringstream s(text);
    return parse_config(s);
  };
  const std::string bs = "[model]\nfamily = black_scholes\nsigma = 0.2\n";
  CHECK_NOTHROW(bad(bs));
  CHECK_THROWS_AS(bad(""), ConfigError);
  CHECK_THROWS_AS(bad(bs + "volatility = 1\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "[plot]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "mu = -0.1\ntilt = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "gamma = 1\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "[market]\nT = 1\nt = 1\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "[market]\nchi = 1.1, 1.0\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "[fourier]\nn_grid = 1000\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "[fourier]\nmode = fast\n"), ConfigError);
  CHECK_THROWS_AS(bad(bs + "[mc]\npaths = -5\n"), ConfigError);
  CHECK_THROWS_AS(bad("[model]\nfamily = merton\nsigma = 0.1\ngamma = 1\nm = 0\n"), ConfigError);
  CHECK_THROWS_AS(bad("[model]\nfamily = heston\n"), ConfigError);
}

TEST_CASE("sweep command") {
  const auto merton = run("sweep --config '" + config_path("merton_sp500.ini") + "'");
  CHECK(merton.code == 0);
  const auto csv = parse_csv(merton.out);
  REQUIRE(csv.comments.size() == 1);
  CHECK(csv.comments[0].rfind("# config_sha256=", 0) == 0);
  CHECK(csv.comments[0] == "# config_sha256=" + load_config(config_path("merton_sp500.ini")).digest());
  CHECK(csv.header == std::vector<std::string>{"chi", "i1", "i2", "lrm", "delta", "diff",
                                               "bound_t3", "bound_t4", "flags"});
  REQUIRE(csv.rows.size() == 13);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(csv.number(i, "diff") <= csv.number(i, "bound_t3"));
    CHECK(csv.rows[i][csv.column("flags")] == "ok");
  }

  const auto vg = run("sweep --config '" + config_path("vg_sp500.ini") + "'");
  CHECK(vg.code == 0);
  const auto vcsv = parse_csv(vg.out);
  REQUIRE(vcsv.rows.size() == 13);
  for (std::size_t i = 0; i < vcsv.rows.size(); ++i) {
    const double b4 = vcsv.number(i, "bound_t4");
    CHECK(std::isfinite(b4));
    CHECK(b4 > 0.0);
  }

  const auto bs = run("sweep --config '" + config_path("black_scholes.ini") + "'");
  CHECK(bs.code == 0);
  const auto bcsv = parse_csv(bs.out);
  REQUIRE(bcsv.rows.size() == 13);
  for (std::size_t i = 0; i < bcsv.rows.size(); ++i) CHECK(bcsv.number(i, "diff") <= 1e-9);

  // Deterministic output, to stdout or a file, in both evaluation modes.
  const auto file = scratch_dir() / "merton.csv";
  const auto again = run("sweep --config '" + config_path("merton_sp500.ini") + "' --out '" +
                         file.string() + "'");
  CHECK(again.code == 0);
  CHECK(slurp(file) == merton.out);
  const auto fft1 = run("sweep --fft --config '" + config_path("merton_sp500.ini") + "'");
  const auto fft2 = run("sweep --fft --config '" + config_path("merton_sp500.ini") + "'");
  CHECK(fft1.out == fft2.out);
  CHECK(parse_csv(fft1.out).comments[0] != csv.comments[0]);
  CHECK((fft1.code == 0 || fft1.code == 1));
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run("sweep --config /nonexistent/run.ini").code == 2);
  CHECK(run("sweep").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("sweep --fft --quadrature --config '" + config_path("merton_sp500.ini") + "'").code ==
        2);

  const auto reported = scratch_dir() / "reported_mu.ini";
  spit(reported,
       "[model]\nfamily = merton\nsigma = 0.0435\ngamma = 0.0054\nm = -0.0697\n"
       "delta = 0.0889\nmu = 4.0073\n");
  const auto r = run("sweep --config '" + reported.string() + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("mu^S") != std::string::npos);

  const auto typo = scratch_dir() / "typo.ini";
  spit(typo, "[model]\nfamily = black_scholes\nsigma = 0.2\nsgima = 0.3\n");
  CHECK(run("verify --config '" + typo.string() + "'").code == 2);
}

TEST_CASE("verify command") {
  for (const char* name : {"black_scholes.ini", "merton_sp500.ini", "vg_sp500.ini"}) {
    CAPTURE(name);
    const auto r = run("verify --config '" + config_path(name) + "'");
    CHECK(r.code == 0);
    const auto csv = parse_csv(r.out);
    REQUIRE(csv.rows.size() > 2);
    CHECK(csv.rows[0][0] == "martingale_fourier");
    CHECK(csv.rows[1][0] == "martingale_mc");
    for (const auto& row : csv.rows) CHECK(row.back() == "pass");
  }
  const auto seeded = run("verify --seed 7 --config '" + config_path("black_scholes.ini") + "'");
  CHECK(seeded.code == 0);
}

TEST_CASE("verify rejects a characteristic function with the wrong drift") {
  const auto mmm = to_mmm(merton_model(merton_preset()));
  const auto good = CharFn::from_model(mmm, 0.05);
  const CharFn wrong([&](cplx z) { return mmm.cumulant(z) + cplx(0.0, 0.02) * z; }, mmm.strip(),
                     0.05);
  const std::vector<double> chis{0.99, 1.0, 1.01};
  McConfig mc;
  mc.n_paths = 200'000;
  FourierConfig fc;

  const auto ok = verify(mmm, good, chis, fc, mc);
  CHECK(ok.all_pass());
  const auto bad = verify(mmm, wrong, chis, fc, mc);
  CHECK_FALSE(bad.all_pass());
  REQUIRE(bad.rows[0].quantity == "martingale_fourier");
  CHECK_FALSE(bad.rows[0].pass);
  CHECK(bad.rows[1].pass);  // the paths themselves are fine
}

TEST_CASE("calibrate command") {
  const auto empty = scratch_dir() / "empty.csv";
  spit(empty, "");
  const auto r = run("calibrate --family merton --quotes '" + empty.string() + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("empty") != std::string::npos);
  CHECK(run("calibrate --family merton --quotes /nonexistent.csv").code == 2);
  CHECK(run("calibrate --family heston --quotes '" + empty.string() + "'").code == 2);

  struct Case {
    const char* family;
    ModelParams truth;
    std::string init;
  };
  const auto mt = merton_synthetic_truth();
  const auto vt = vg_preset();
  auto num = [](double v) { return format_number(v); };
  const std::vector<Case> cases{
      {"merton", mt,
       "[model]\nfamily = merton\nsigma = " + num(mt.sigma * 1.2) + "\ngamma = " +
           num(mt.gamma * 0.8) + "\nm = " + num(mt.m * 1.2) + "\ndelta = " + num(mt.delta * 0.8) +
           "\ntilt = 0.4\n"},
      {"vg", vt,
       "[model]\nfamily = vg\nsigma = 0\nC = " + num(vt.c_par * 1.2) + "\nG = " +
           num(vt.g_par * 0.8) + "\nM = " + num(vt.m_par * 1.2) + "\ntilt = 0.4\n"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.family);
    const auto quotes = scratch_dir() / (std::string(c.family) + "_quotes.csv");
    {
      std::ofstream out(quotes);
      write_quotes(out, reference_synthetic_quotes(c.truth, FourierConfig{}));
    }
    const auto init = scratch_dir() / (std::string(c.family) + "_init.ini");
    spit(init, c.init);
    const auto res = run(std::string("calibrate --family ") + c.family + " --quotes '" +
                         quotes.string() + "' --config '" + init.string() + "'");
    CHECK(res.code == 0);
    CHECK(res.err.find("constraint report") != std::string::npos);
    const auto rec = parse_record(res.out);
    CHECK(rec.at("family") == c.family);
    CHECK(rec.at("quotes") == "81");
    CHECK(rec.at("converged") == "true");
    CHECK(rec.at("admissible") == "true");
    CHECK(record_number(rec, "rmse") < 0.1);
    if (const auto* m = std::get_if<MertonParams>(&c.truth)) {
      CHECK(rel(record_number(rec, "sigma"), m->sigma) <= 0.05);
      CHECK(rel(record_number(rec, "delta"), m->delta) <= 0.05);
      CHECK(rel(record_number(rec, "gamma"), m->gamma) <= 0.15);
      CHECK(rel(record_number(rec, "m"), m->m) <= 0.15);
    } else {
      const auto& v = std::get<VgParams>(c.truth);
      CHECK(rec.at("m_gt_4") == "true");
      CHECK(rel(record_number(rec, "C"), v.c_par) <= 0.10);
      CHECK(rel(record_number(rec, "G"), v.g_par) <= 0.10);
      CHECK(rel(record_number(rec, "M"), v.m_par) <= 0.10);
    }
  }
}
