#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lacelab/config.hpp"
#include "lacelab/error.hpp"
#include "lacelab/io.hpp"
#include "lacelab/run.hpp"

using namespace lace;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lacelab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config_json(const fs::path& out, const std::string& extra) {
  return R"({"seed": 7, "output_dir": ")" + out.string() + R"(", )" + extra + "}";
}

}  // namespace

TEST_CASE("config defaults and derived beta") {
  const auto c = parse_config(R"({"seed": 3, "kernel": "2:4"})");
  CHECK(c.seed == 3);
  CHECK(c.params.beta == doctest::Approx(0.25));
  CHECK(c.analyses == analysis_order());
  CHECK(c.verify.eps_primes == Vec{0.0, 0.4});
  CHECK(c.norms.quad.seed == 3);
  CHECK(c.model.kind == ModelKind::simple_random_walk);

  const auto s = parse_config(R"({"seed": 1, "kernel": "1:4",
      "model": {"kind": "synthetic", "beta0_rel": 0.1, "signs": "alt"}})");
  CHECK(s.model.synthetic.beta0 == doctest::Approx(0.05));
  CHECK(s.model.synthetic.signs == SignPattern::alternating);
}

TEST_CASE("config errors name the offending path") {
  CHECK(contains(error_of(R"({"kernel": "1:3"})"), "/seed: missing required field"));
  CHECK(contains(error_of(R"({"seed": -1})"), "/seed: expected a nonnegative integer"));
  CHECK(contains(error_of(R"({"seed": 1, "model": {"kind": "srw", "theta": "x"}})"), "/model/theta: expected a number"));
  CHECK(contains(error_of(R"({"seed": 1, "colour": 2})"), "/colour: unknown field"));
  CHECK(contains(error_of(R"({"seed": 1, "analyses": ["bogus"]})"), "/analyses/0"));
  CHECK(contains(error_of(R"({"seed": 1,)"), "not valid JSON"));
  CHECK(contains(error_of(R"({"seed": 1, "model": {"kind": "weakly_saw", "u": 0.5}})"), "weakly_saw requires n_max"));
}

TEST_CASE("config constraint failures quote the inequality") {
  CHECK(contains(error_of(R"({"seed": 1, "params": {"lambda": 2.6}})"), "λ < θ violated"));
  CHECK(contains(error_of(R"({"seed": 1, "params": {"theta": 1.9}})"), "θ > 2 required"));
  CHECK(contains(error_of(R"({"seed": 1, "params": {"K1": 20, "K2": 40, "K3": 100, "K4": 10, "K5": 100}})"),
                 "K3 ≫ K1 violated"));
  CHECK(contains(error_of(R"({"seed": 1, "model": {"kind": "weakly_saw", "u": 1.5, "n_max": 4}})"), "u ∈ [0, 1]"));
}

TEST_CASE("z_c references require the critical analysis") {
  CHECK(contains(error_of(R"({"seed": 1, "analyses": ["verify"]})"), "requires the critical analysis"));
  CHECK(contains(error_of(R"({"seed": 1, "analyses": ["gaussian"]})"), "gaussian requires the critical analysis"));
  CHECK_NOTHROW(parse_config(R"({"seed": 1, "analyses": ["critical", "verify"]})"));
  CHECK_NOTHROW(parse_config(R"({"seed": 1, "analyses": ["verify"], "verify": {"z": 1.0}})"));
  CHECK(contains(error_of(R"({"seed": 1, "run": {"z": "z_c"}})"), "/run/z"));
}

TEST_CASE("kernel JSON round trip") {
  for (const auto& d : {make_uniform_box(1, 3), make_uniform_box(2, 2, true)}) {
    const auto j = kernel_to_json(d);
    const auto back = kernel_from_json(j);
    CHECK(back.dim() == d.dim());
    CHECK(back.range() == d.range());
    REQUIRE(back.support().size() == d.support().size());
    for (std::size_t i = 0; i < d.support().size(); ++i) {
      CHECK(back.support()[i].x == d.support()[i].x);
      CHECK(back.support()[i].mass == d.support()[i].mass);
    }
    CHECK(kernel_to_json(back)["support"].dump() == j["support"].dump());
    CHECK(back.includes_origin() == d.includes_origin());
  }
}

TEST_CASE("k files") {
  const fs::path dir = scratch("kfile");
  fs::create_directories(dir);
  std::ofstream(dir / "k.txt") << "# probes\n0 0\n0.5, -0.25\n\n1 2 # trailing\n";
  const auto ks = read_k_file((dir / "k.txt").string(), 2);
  REQUIRE(ks.size() == 3);
  CHECK(ks[1] == Vec{0.5, -0.25});
  CHECK(ks[2] == Vec{1.0, 2.0});
  std::ofstream(dir / "k.json") << "[[0.1], [0.2]]";
  CHECK(read_k_file((dir / "k.json").string(), 1).size() == 2);
  std::ofstream(dir / "bad.txt") << "1 2 3\n";
  CHECK_THROWS(read_k_file((dir / "bad.txt").string(), 2));
  CHECK_THROWS(read_k_file((dir / "missing.txt").string(), 2));
  fs::remove_all(dir);
}

TEST_CASE("hashes and number formatting") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("CSV writers carry the seed") {
  const auto model = ModelSequences::simple_random_walk(make_uniform_box(1, 1), 8);
  const auto st = solve(model, 1.0, std::vector<Vec>{Vec{0.0}, Vec{1.0}}, 4);
  const auto csv = f_table_csv(st, 99);
  CHECK(csv.rfind("# seed=99 z=1\n", 0) == 0);
  CHECK(contains(csv, "m,k_index,f"));
  CHECK(f_table_json(st, 99)["seed"] == 99);
  CHECK(coefficients_csv(model, st.k_set, 1.0, 4, 5).rfind("# seed=5\n", 0) == 0);
}

TEST_CASE("end-to-end SRW run is reproducible") {
  const fs::path a = scratch("srw_a");
  const fs::path b = scratch("srw_b");
  const std::string extra = R"("kernel": "1:2", "gaussian": {"ladder": [64, 256]}, "verify": {"horizon": 64})";
  const auto ra = run_all(parse_config(config_json(a, extra)));
  const auto rb = run_all(parse_config(config_json(b, extra)));
  CHECK(ra.exit_status == 0);
  CHECK(ra.complete);
  REQUIRE(ra.files.size() == rb.files.size());
  for (std::size_t i = 0; i < ra.files.size(); ++i) {
    CHECK(ra.files[i].name == rb.files[i].name);
    CHECK(ra.files[i].sha256 == rb.files[i].sha256);
    CHECK(sha256_hex(slurp(a / ra.files[i].name)) == ra.files[i].sha256);
  }

  const auto crit = json::parse(slurp(a / "critical.json"));
  CHECK(crit["z_c"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(crit["A"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(crit["v"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(crit["seed"] == 7);
  const auto manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["complete"] == true);
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["files"].size() == ra.files.size());
  CHECK(slurp(a / "norms.csv").rfind("# seed=7", 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("failed analysis leaves an incomplete manifest") {
  const fs::path dir = scratch("fail");
  const std::string extra =
      R"("kernel": "1:3", "model": {"kind": "synthetic", "beta0": 0.1, "signs": "-"}, "analyses": ["run", "critical"])";
  const auto r = run_all(parse_config(config_json(dir, extra)));
  CHECK(r.exit_status == 2);
  CHECK_FALSE(r.complete);
  REQUIRE(r.failed_analysis.has_value());
  CHECK(*r.failed_analysis == Analysis::critical);
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["complete"] == false);
  CHECK(fs::exists(dir / "f_table.csv"));
  fs::remove_all(dir);
}

TEST_CASE("supplied constants that fail give exit status 1") {
  const fs::path dir = scratch("strict");
  const std::string extra = R"("kernel": "1:3", "model": {"kind": "synthetic", "beta0": 0.1},
      "params": {"C_g": 1e-6, "C_e": 1e-6}, "analyses": ["critical", "verify"], "verify": {"horizon": 32})";
  const auto r = run_all(parse_config(config_json(dir, extra)));
  CHECK(r.exit_status == 1);
  CHECK(r.complete);
  fs::remove_all(dir);
}

TEST_CASE("synthetic critical shift grows with beta0") {
  double prev = 0.0;
  for (double rel : {0.02, 0.05, 0.1}) {
    const fs::path dir = scratch("sweep");
    const std::string extra = R"("kernel": "1:5", "analyses": ["critical"], "model": {"kind": "synthetic", "beta0_rel": )" +
                              std::to_string(rel) + "}";
    const auto r = run_all(parse_config(config_json(dir, extra)));
    REQUIRE(r.exit_status == 0);
    const double shift = std::abs(json::parse(slurp(dir / "critical.json"))["z_c"].get<double>() - 1.0);
    CHECK(shift > prev);
    prev = shift;
    fs::remove_all(dir);
  }
}
