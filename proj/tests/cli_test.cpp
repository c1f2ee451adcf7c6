#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "tsim/cli.hpp"
#include "tsim/config.hpp"
#include "tsim/errors.hpp"
#include "tsim/report.hpp"

using namespace tsim;
namespace fs = std::filesystem;

namespace {

struct Out {
  int rc;
  std::string out;
  std::string err;
};

Out sim(std::vector<std::string> args) {
  args.insert(args.begin(), "sim");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
  return {rc, o.str(), e.str()};
}

fs::path tmp(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tsim_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const auto c = parse_config("# hi\nprotocol = directory\nmodel=pso\nmesi = off\nstatic_lease = 16 # trailing\n"
                              "thresh_max = 1600\nskip_prob = 0.5\n");
  EXPECT_EQ(c.protocol, ProtocolKind::Directory);
  EXPECT_EQ(c.model, MemoryModel::PSO);
  EXPECT_FALSE(c.proto.mesi);
  EXPECT_EQ(c.proto.static_lease, 16u);
  EXPECT_EQ(c.livelock.max_count, 1600u);
  EXPECT_DOUBLE_EQ(c.skip_prob, 0.5);
}

TEST(Config, RoundTrip) {
  EngineConfig c = preset("tardis-opt");
  c.model = MemoryModel::RC;
  c.self_increment_period = 321;
  EXPECT_EQ(format_config(parse_config(format_config(c))), format_config(c));
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("mesi = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("static_lease = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("model = arm\n"), ConfigError);
  EXPECT_THROW(parse_config("l1_ways = 0\n"), ConfigError);
  EXPECT_THROW(preset("fastest"), ConfigError);
}

TEST(Config, Presets) {
  EXPECT_EQ(preset("directory").protocol, ProtocolKind::Directory);
  EXPECT_FALSE(preset("tardis-base").proto.mesi);
  EXPECT_TRUE(preset("tardis-live").livelock_detector);
  const auto opt = preset("tardis-opt");
  EXPECT_TRUE(opt.proto.mesi && opt.livelock_detector && opt.proto.lease_predictor);
}

TEST(Cli, RunEmitsDeterministicJson) {
  const auto a = sim({"run", "--program", "synth:cores=4,seed=2", "--seed", "9"});
  ASSERT_EQ(a.rc, 0) << a.err;
  const auto b = sim({"run", "--program", "synth:cores=4,seed=2", "--seed", "9"});
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["protocol"], "tardis");
  EXPECT_EQ(j["seed"], 9);
  EXPECT_LE(j["renew_rate"].get<double>(), 1.0);
}

TEST(Cli, CheckAcceptsEngineTrace) {
  const auto trace = tmp("tso.jsonl");
  const auto r = sim({"run", "--program", "synth:cores=4,seed=5", "--model", "tso", "--trace", trace.string(),
                      "--out", tmp("m.json").string()});
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto c = sim({"check", "--trace", trace.string(), "--model", "tso"});
  EXPECT_EQ(c.rc, 0) << c.err;
}

TEST(Cli, CheckFlagsScViolationInTsoTrace) {
  const auto trace = tmp("fig2.jsonl");
  ASSERT_EQ(sim({"run", "--program", "fig2", "--set", "static_lease=10", "--trace", trace.string(), "--out",
                 tmp("f.json").string()})
                .rc,
            0);
  const auto c = sim({"check", "--trace", trace.string(), "--model", "sc"});
  EXPECT_EQ(c.rc, 1);
  EXPECT_NE(c.err.find("SC1"), std::string::npos);
}

TEST(Cli, TraceJsonRoundTrip) {
  const auto r = run(EngineConfig{}, builtin("mp"), 3);
  std::stringstream ss(trace_to_jsonl(r.trace));
  EXPECT_EQ(read_trace(ss), r.trace);
  std::stringstream bad("{\"core\": 0}\n");
  EXPECT_THROW(read_trace(bad), TraceError);
}

TEST(Cli, EnumerateComparesWithOracle) {
  const auto r = sim({"enumerate", "--program", "listing1", "--model", "tso", "--protocol", "tardis"});
  EXPECT_EQ(r.rc, 0) << r.err;
  EXPECT_NE(r.out.find("c0.r1=0 c1.r2=0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("subset"), std::string::npos);
}

TEST(Cli, CompareShowsZeroInvalidationForTardis) {
  const auto r = sim({"compare", "--a", "directory", "--b", "tardis-opt", "--program", "lease_case"});
  ASSERT_EQ(r.rc, 0) << r.err;
  std::istringstream in(r.out);
  std::string line, header;
  std::getline(in, line);
  std::getline(in, header);
  std::vector<std::string> cols;
  std::istringstream hs(header);
  for (std::string w; hs >> w;) cols.push_back(w);
  const auto inv = std::find(cols.begin(), cols.end(), "invalidation") - cols.begin();
  std::getline(in, line);  // directory
  std::getline(in, line);  // tardis
  std::istringstream ts(line);
  std::vector<std::string> vals;
  for (std::string w; ts >> w;) vals.push_back(w);
  ASSERT_LT(static_cast<std::size_t>(inv), vals.size());
  EXPECT_EQ(vals[inv], "0");
}

TEST(Cli, SweepRenewTrafficVariesMonotonically) {
  const auto r = sim({"sweep", "--config", "tardis-base", "--param", "self_increment_period", "--values",
                      "100,1000,10000", "--program", "spin", "--jobs", "3"});
  ASSERT_EQ(r.rc, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    for (std::string w; std::getline(hs, w, ',');) cols.push_back(w);
  }
  const auto idx = std::find(cols.begin(), cols.end(), "renew_flits") - cols.begin();
  std::vector<long> renew;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> v;
    for (std::string w; std::getline(ls, w, ',');) v.push_back(w);
    renew.push_back(std::stol(v.at(idx)));
  }
  ASSERT_EQ(renew.size(), 3u);
  const bool down = renew[0] >= renew[1] && renew[1] >= renew[2];
  const bool up = renew[0] <= renew[1] && renew[1] <= renew[2];
  EXPECT_TRUE(down || up);
  EXPECT_NE(renew[0], renew[2]);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(sim({"frobnicate"}).rc, 2);
  EXPECT_EQ(sim({"run", "--program", "fig1", "--bogus"}).rc, 2);
  EXPECT_EQ(sim({"run", "--program", "fig1", "--set", "nonsense=1"}).rc, 2);
  EXPECT_EQ(sim({"run", "--program", "nope.prog"}).rc, 2);
  EXPECT_EQ(sim({"--help"}).rc, 0);
}

TEST(Cli, BinaryExitCode) {
  const char* bin = std::getenv("SIM_BIN");
  if (!bin) GTEST_SKIP() << "SIM_BIN not set";
  const int status = std::system((std::string(bin) + " nosuchcmd > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

TEST(Cli, ProgramFile) {
  const auto path = tmp("two.prog");
  std::ofstream(path) << "[core 0]\nSt A = 3\n[core 1]\nLd A -> r1\n";
  const auto prog = resolve_program(path.string());
  EXPECT_EQ(prog.num_cores(), 2);
  EXPECT_EQ(sim({"enumerate", "--program", path.string(), "--model", "sc"}).rc, 0);
}
