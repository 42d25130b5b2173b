#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "brownne/config.hpp"
#include "brownne/error.hpp"
#include "brownne/experiments.hpp"
#include "brownne/idx.hpp"
#include "brownne/parallel.hpp"
#include "brownne/report.hpp"

using namespace brownne;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp=", 0) != 0) out += line + "\n";
  }
  return out;
}

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BROWNNE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const std::vector<KeySpec> schema{
    {"count", ValueType::integer, "3", 1, 10},
    {"rate", ValueType::real, "0.5", 0, 1},
    {"name", ValueType::text, "abc"},
    {"ns", ValueType::int_list, "1,2", 1, 100},
    {"xs", ValueType::real_list, "0.5", -1, 1},
    {"flag", ValueType::boolean, "false"},
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("idx images and labels") {
  std::vector<std::uint8_t> img{0, 0, 8, 3};
  for (auto d : {2u, 28u, 28u}) {
    const auto b = be32(d);
    img.insert(img.end(), b.begin(), b.end());
  }
  for (int i = 0; i < 1568; ++i) img.push_back(static_cast<std::uint8_t>(i % 256));
  const auto a = parse_idx(img);
  CHECK(a.count() == 2);
  CHECK(a.stride() == 784);
  CHECK(a.dims == std::vector<std::uint32_t>{2, 28, 28});

  std::vector<std::uint8_t> lab{0, 0, 8, 1};
  const auto b2 = be32(2);
  lab.insert(lab.end(), b2.begin(), b2.end());
  lab.push_back(7);
  lab.push_back(3);
  const auto l = parse_idx(lab);
  CHECK(l.data == std::vector<std::uint8_t>{7, 3});

  TempDir dir("brownne_idx_test");
  std::ofstream(dir / "i.idx", std::ios::binary).write(reinterpret_cast<const char*>(img.data()), img.size());
  std::ofstream(dir / "l.idx", std::ios::binary).write(reinterpret_cast<const char*>(lab.data()), lab.size());
  const auto ds = load_idx(dir / "i.idx", dir / "l.idx");
  CHECK(ds.features.rows() == 2);
  CHECK(ds.features.cols() == 784);
  CHECK(ds.features(0, 255) == 1.0);
  CHECK(ds.features(0, 0) == 0.0);
  CHECK(ds.labels == std::vector<int>{7, 3});
  CHECK(ds.class_count == 8);
  CHECK_THROWS_AS(load_idx(dir / "i.idx", dir / "i.idx"), ParseError);
  CHECK_THROWS_AS(read_idx(dir / "missing.idx"), IoError);
}

TEST_CASE("idx parse errors name the offset") {
  std::vector<std::uint8_t> lab{0, 0, 8, 1, 0, 0, 0, 2, 7, 3};
  auto offset_of = [](std::vector<std::uint8_t> bytes) -> long {
    try {
      parse_idx(bytes);
    } catch (const ParseError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  auto shorter = lab;
  shorter.pop_back();
  CHECK(offset_of(shorter) == 9);
  auto magic = lab;
  magic[0] = 1;
  CHECK(offset_of(magic) == 0);
  magic = lab;
  magic[1] = 1;
  CHECK(offset_of(magic) == 1);
  auto type = lab;
  type[2] = 0x0D;
  CHECK(offset_of(type) == 2);
  auto nodims = lab;
  nodims[3] = 0;
  CHECK(offset_of(nodims) == 3);
  CHECK(offset_of({0, 0, 8, 1, 0, 0}) == 6);
  CHECK(offset_of({0, 0, 8}) == 3);
  auto longer = lab;
  longer.push_back(9);
  CHECK(offset_of(longer) == 10);
  // 65536^3 elements overflow size_t arithmetic on the third dimension
  std::vector<std::uint8_t> huge{0, 0, 8, 4};
  for (int i = 0; i < 4; ++i) {
    const auto b = be32(0xFFFFFFFFu);
    huge.insert(huge.end(), b.begin(), b.end());
  }
  CHECK(offset_of(huge) > 3);
}

TEST_CASE("bundled digits load") {
  const auto train = load_idx(std::string(BROWNNE_TEST_DATA_DIR) + "/digits-train-images.idx3-ubyte",
                              std::string(BROWNNE_TEST_DATA_DIR) + "/digits-train-labels.idx1-ubyte");
  CHECK(train.size() == 1497);
  CHECK(train.features.cols() == 64);
  CHECK(train.class_count == 10);
  CHECK(train.features.maxCoeff() <= 1.0);
  CHECK(train.features.minCoeff() >= 0.0);
}

TEST_CASE("config parsing") {
  const auto cfg = ExperimentConfig::parse("# comment\ncount = 5\n  rate=0.25  # trailing\nns = 3, 4 ,5\n", schema);
  CHECK(cfg.get_int("count") == 5);
  CHECK(cfg.get_real("rate") == 0.25);
  CHECK(cfg.get_text("name") == "abc");
  CHECK(cfg.get_int_list("ns") == std::vector<int>{3, 4, 5});
  CHECK(cfg.get_real_list("xs") == std::vector<double>{0.5});
  CHECK_FALSE(cfg.get_bool("flag"));

  const auto again = ExperimentConfig::parse(cfg.serialize(), schema);
  CHECK(again.values() == cfg.values());
  CHECK(again.serialize() == cfg.serialize());
}

TEST_CASE("config errors list every bad key") {
  try {
    ExperimentConfig::parse("count = 11\nrate = x\nbogus = 1\nflag = maybe\nns = 1,0\ncount = 2\nno equals sign\n", schema);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    auto keys = e.keys();
    for (const char* k : {"count", "rate", "bogus", "flag", "ns"}) {
      CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
    }
  }
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/x.conf", schema), IoError);
}

TEST_CASE("csv emission") {
  ReportTable t({"a", "b,c", "d"});
  t.provenance = {42, "abc123", "2020-01-01T00:00:00Z"};
  CHECK(to_csv(t) == "a,\"b,c\",d\n# seed=42\n# build=abc123\n# timestamp=2020-01-01T00:00:00Z\n");
  t.add_row({1.5, 3LL, std::string("say \"hi\"")});
  t.add_row({0.1, -2LL, std::string("x\ny")});
  const auto csv = to_csv(t);
  CHECK(csv.find("1.5,3,\"say \"\"hi\"\"\"\n") != std::string::npos);
  CHECK(csv.find("0.1,-2,\"x\ny\"\n") != std::string::npos);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK_THROWS_AS(t.add_row({1.0}), ContractError);
  CHECK_THROWS_AS(ReportTable({"a", "a"}), ContractError);
  CHECK_THROWS_AS(emit_csv(t, "/nonexistent/dir/t.csv"), IoError);
}

TEST_CASE("svg emission") {
  TempDir dir("brownne_svg_test");
  ReportTable one({"x", "y"});
  one.add_row({1.0, 2.0});
  CHECK(emit_svg(one, "x", {"y"}, dir / "one.svg", false).empty());
  const auto s1 = slurp(dir / "one.svg");
  CHECK(s1.rfind("<svg", 0) == 0);
  CHECK(s1.find("<circle") != std::string::npos);

  ReportTable two({"n", "err_a", "err_b", "label"});
  two.add_row({1.0, 0.0, 0.5, std::string("p")});
  two.add_row({2.0, 0.01, 0.25, std::string("q")});
  two.add_row({3.0, 0.001, 0.125, std::string("r")});
  const auto warnings = emit_svg(two, "n", {"err_a", "err_b"}, dir / "two.svg", true);
  CHECK(warnings.size() == 1);
  CHECK(warnings[0].find("err_a") != std::string::npos);
  const auto s2 = slurp(dir / "two.svg");
  std::size_t polylines = 0;
  for (auto p = s2.find("<polyline"); p != std::string::npos; p = s2.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines == 2);
  CHECK(s2.find(">err_a<") != std::string::npos);
  CHECK(s2.find(">err_b<") != std::string::npos);
  CHECK_THROWS_AS(emit_svg(two, "n", {"label"}, dir / "bad.svg", false), ContractError);
  CHECK_THROWS_AS(emit_svg(two, "n", {"missing"}, dir / "bad.svg", false), ContractError);
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += static_cast<int>(i); });
  for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == static_cast<int>(i));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw DomainError("seven");
                  }),
                  DomainError);
  CHECK(default_thread_count() >= 1);
}

TEST_CASE("every subcommand has a schema and rejects bad keys") {
  for (const auto& name : subcommand_names()) {
    CHECK_FALSE(schema_for(name).empty());
    CHECK_THROWS_AS(ExperimentConfig::parse("not_a_key = 1\n", schema_for(name)), ConfigError);
  }
  CHECK_THROWS_AS(schema_for("fly"), ConfigError);
}

TEST_CASE("ndd-convergence table trend") {
  const auto cfg = ExperimentConfig::parse("dim = 10\npoints = 20\nn_values = 2,4,64\nmc_samples = 2000\n",
                                           schema_for("ndd-convergence"));
  const auto t = ndd_convergence_table(cfg, 1, 2);
  const auto err = t.numeric_column("quad_error");
  CHECK(err[2] < err[1]);
  CHECK(err[1] < err[0]);
  const auto gap = t.numeric_column("max_oracle_gap");
  for (double g : gap) CHECK(g < 1e-8);
}

TEST_CASE("brownian-verify rejects configs that leave the path") {
  CHECK_THROWS_AS(brownian_verify_table(ExperimentConfig::parse("x_values = 1.4\n", schema_for("brownian-verify")), 1, 1),
                  ConfigError);
  const auto t = brownian_verify_table(
      ExperimentConfig::parse("n_values = 4\nv_values = 1\nx_values = 0.5\npaths = 2000\n", schema_for("brownian-verify")),
      3, 2);
  CHECK(t.numeric_column("variance")[0] == doctest::Approx(9.81929).epsilon(0.1));
}

TEST_CASE("run writes csv, svg and the effective config") {
  TempDir dir("brownne_run_test");
  const auto cfg = ExperimentConfig::parse("iters = 50\nruns = 3\n", schema_for("biased-gd"));
  const auto result = run("biased-gd", cfg, 9, dir.path.string(), 2);
  CHECK(fs::exists(dir / "biased-gd.csv"));
  CHECK(fs::exists(dir / "biased-gd.svg"));
  CHECK(fs::exists(dir / "biased-gd.effective.conf"));
  // re-running from the effective config gives the same table
  const auto first = without_timestamp(slurp(dir / "biased-gd.csv"));
  const auto reloaded = ExperimentConfig::load(dir / "biased-gd.effective.conf", schema_for("biased-gd"));
  run("biased-gd", reloaded, 9, dir.path.string(), 1);
  CHECK(without_timestamp(slurp(dir / "biased-gd.csv")) == first);
  CHECK(result.files.size() == 3);
}

TEST_CASE("command line exit codes") {
  TempDir dir("brownne_cli_test");
  std::ofstream(dir / "bad.conf") << "runs = -4\nwat = 1\n";
  std::ofstream(dir / "good.conf") << "iters = 20\nruns = 2\n";
  std::ofstream(dir / "missing_data.conf") << "train_images = /nonexistent.idx\n";
  CHECK(run_cli("biased-gd --config " + (dir / "good.conf") + " --seed 3 --out " + (dir / "out")) == 0);
  CHECK(fs::exists(dir / "out/biased-gd.csv"));
  CHECK(run_cli("biased-gd --config " + (dir / "bad.conf") + " --out " + (dir / "out")) == 2);
  CHECK(run_cli("mlp-train --config " + (dir / "missing_data.conf") + " --out " + (dir / "out")) == 3);
  CHECK(run_cli("nonsense") == 2);
  CHECK(run_cli("biased-gd --seed notanumber") == 2);
}

}  // TEST_SUITE
