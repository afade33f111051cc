#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/artifacts.hpp"
#include "core/communities.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"
#include "oracles.hpp"

using namespace quotefam;
using namespace quotefam::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("quotefam_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig fixture_config(const std::string& name) {
  PipelineConfig c;
  c.input = QUOTEFAM_DATA_DIR "/fiorina_quotes.tsv";
  c.format = "tsv";
  c.out_dir = fresh_dir(name).string();
  c.sim_families = 60;
  c.iterations = 500;
  c.threads = 1;
  c.judgments = QUOTEFAM_DATA_DIR "/judgments_ours.tsv";
  c.judgments2 = QUOTEFAM_DATA_DIR "/judgments_second.tsv";
  c.rival = QUOTEFAM_DATA_DIR "/judgments_rival.tsv";
  return c;
}

std::size_t total_subfamilies(const fs::path& dir) {
  std::size_t total = 0;
  std::istringstream in(artifacts::read_body(dir / "subfamilies.jsonl"));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) total += json::parse(line).at("n_subfamilies").get<std::size_t>();
  }
  return total;
}

}  // namespace

TEST_CASE("options round trip and validation") {
  PipelineConfig c;
  set_option(c, "min-shared-words", "3");
  CHECK(c.min_shared_words == 3);
  CHECK(get_option(c, "min_shared_words") == "3");
  set_option(c, "quantiles", "7");
  CHECK(c.quantiles.term_frequency == 7);
  CHECK(c.quantiles.rates == 7);
  set_option(c, "quantiles", "rates=4,entropy=6");
  CHECK(c.quantiles.rates == 4);
  CHECK(c.quantiles.entropy == 6);
  CHECK(c.quantiles.quote_length == 7);
  for (const auto& name : option_names()) CHECK_NOTHROW(get_option(c, name));

  try {
    set_option(c, "threshold", "abc");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "threshold");
  }
  CHECK_THROWS_AS(set_option(c, "no_such_option", "1"), ConfigError);

  PipelineConfig bad;
  bad.threshold = 1.5;
  try {
    validate(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "threshold");
  }
  bad = {};
  bad.format = "xml";
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = {};
  bad.max_edit = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("digest ignores threads and output directory") {
  PipelineConfig a, b;
  b.threads = 7;
  b.out_dir = "elsewhere";
  CHECK(config_digest(a) == config_digest(b));
  b.seed = 2;
  CHECK(config_digest(a) != config_digest(b));
  CHECK(config_digest(a).size() == 64);
}

TEST_CASE("missing prerequisites name the producing stage") {
  PipelineConfig c;
  c.out_dir = fresh_dir("missing").string();
  try {
    run("subfamilies", c);
    FAIL("expected MissingPrerequisite");
  } catch (const MissingPrerequisite& e) {
    CHECK(e.stage() == "families");
  }
  CHECK_THROWS_AS(run("rates", c), MissingPrerequisite);
  CHECK_THROWS_AS(run("fit", c), MissingPrerequisite);
  CHECK_THROWS_AS(run("bogus", c), ConfigError);
  c.input.clear();
  CHECK_THROWS_AS(run("families", c), ConfigError);
}

TEST_CASE("empty corpus gives an empty families file") {
  const fs::path dir = fresh_dir("empty");
  fs::create_directories(dir);
  std::ofstream(dir / "empty.tsv").close();
  PipelineConfig c;
  c.input = (dir / "empty.tsv").string();
  c.format = "tsv";
  c.out_dir = (dir / "out").string();
  const auto r = run("families", c);
  CHECK(r.status == 0);
  CHECK(artifacts::read_body(dir / "out" / "families.jsonl").empty());
  const auto text = slurp(dir / "out" / "families.jsonl");
  CHECK(text.rfind("# quotefam families config=" + config_digest(c), 0) == 0);
}

TEST_CASE("full pipeline on the Fiorina fixture") {
  auto c = fixture_config("full");
  const fs::path dir = c.out_dir;
  CHECK(run("families", c).status == 0);
  CHECK(run("subfamilies", c).status == 0);
  CHECK(total_subfamilies(dir) == 3);

  SUBCASE("the family split is the shorter code") {
    // The seven versions fall into two communities on this small graph; the
    // split codes the walk more briefly than keeping them together.
    std::istringstream edges(artifacts::read_body(dir / "graph.tsv"));
    std::vector<oracle::WeightedEdge> e;
    std::size_t u, v;
    double w;
    while (edges >> u >> v >> w) e.push_back({u, v, w});
    std::vector<int> found(7, -1);
    std::istringstream fams(artifacts::read_body(dir / "families.jsonl"));
    int fid = 0;
    for (std::string line; std::getline(fams, line); ++fid) {
      const auto rec = json::parse(line);
      for (const auto& q : rec.at("quotes")) found[q.at("id").get<std::size_t>()] = fid;
    }
    CHECK(std::count(found.begin(), found.end(), -1) == 0);
    CHECK(oracle::map_equation(7, e, found) < oracle::map_equation(7, e, std::vector<int>(7, 0)));
  }

  for (const char* s : {"stats", "rates", "fit", "simulate", "evaluate"}) {
    CAPTURE(s);
    CHECK(run(s, c).status == 0);
  }
  const auto rep = run("report", c);
  CHECK(rep.status == 0);
  const std::string first = slurp(dir / "report.json");
  run("report", c);
  CHECK(slurp(dir / "report.json") == first);

  // Every artifact starts with the provenance header and has a manifest.
  const std::string header = "# quotefam ";
  for (const auto& entry : fs::directory_iterator(dir)) {
    CAPTURE(entry.path().string());
    const auto text = slurp(entry.path());
    CHECK(text.rfind(header, 0) == 0);
    CHECK(text.find("config=" + config_digest(c)) != std::string::npos);
  }
  const auto manifest = json::parse(artifacts::read_body(dir / "manifest_families.json"));
  CHECK(manifest.at("config_digest") == config_digest(c));
  CHECK(manifest.contains("input_digest"));
  CHECK(manifest.at("versions").contains("quotefam"));

  const auto eval = json::parse(artifacts::read_body(dir / "evaluation.json"));
  CHECK(eval.contains("kappa"));
  CHECK(eval.at("randomization").at("p_value").get<double>() > 0.0);
}

TEST_CASE("identical runs give identical bytes") {
  auto a = fixture_config("det_a");
  auto b = fixture_config("det_b");
  b.threads = 3;
  for (const char* s : {"families", "subfamilies", "stats", "rates", "fit", "simulate", "evaluate", "report"}) {
    run(s, a);
    run(s, b);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a.out_dir)) {
    const auto name = entry.path().filename();
    if (name.string().rfind("manifest_", 0) == 0) continue;
    CAPTURE(name.string());
    CHECK(slurp(entry.path()) == slurp(fs::path(b.out_dir) / name));
    ++compared;
  }
  CHECK(compared > 20);
}

TEST_CASE("report after stats marks later sections absent") {
  auto c = fixture_config("partial");
  for (const char* s : {"families", "subfamilies", "stats"}) run(s, c);
  const auto r = run("report", c);
  CHECK(r.status == 3);
  const auto rep = json::parse(artifacts::read_body(fs::path(c.out_dir) / "report.json"));
  const auto text = rep.dump();
  CHECK(text.find("distributions") != std::string::npos);
  CHECK(r.summary.find("rates") != std::string::npos);
  CHECK(r.summary.find("fit") != std::string::npos);
}

TEST_CASE("simulate with zero rates") {
  auto c = fixture_config("zero");
  c.rate_model = "zero";
  c.sim_families = 40;
  run("simulate", c);
  std::istringstream rows(artifacts::read_body(fs::path(c.out_dir) / "sim_families.csv"));
  std::string line;
  std::getline(rows, line);
  const auto header = line;
  std::size_t n = 0, versions_col = 0;
  {
    std::istringstream h(header);
    std::string col;
    for (std::size_t i = 0; std::getline(h, col, ','); ++i)
      if (col == "versions") versions_col = i;
  }
  REQUIRE(versions_col > 0);
  while (std::getline(rows, line)) {
    std::istringstream r(line);
    std::string cell;
    for (std::size_t i = 0; std::getline(r, cell, ','); ++i)
      if (i == versions_col) CHECK(cell == "1");
    ++n;
  }
  CHECK(n == 40);
}

TEST_CASE("curve csv parsing") {
  const auto c = parse_curve_csv("x_mean,y,ci_low,ci_high,n\n1.000000,0.500000,0.400000,0.600000,3\n");
  REQUIRE(c.bins.size() == 1);
  CHECK(c.bins[0].n == 3);
  CHECK(c.bins[0].y == 0.5);
  CHECK_THROWS(parse_curve_csv("x_mean,y\n1,2\n"));
}
