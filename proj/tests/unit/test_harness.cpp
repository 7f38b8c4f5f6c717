#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "mimosd/errors.hpp"
#include "mimosd/harness.hpp"
#include "support.hpp"

using namespace mimosd;
namespace fs = std::filesystem;

namespace {

CampaignConfig small_campaign(std::vector<std::string> decoders) {
  CampaignConfig c;
  c.n_tx = 3;
  c.n_rx = 3;
  c.modulation = Modulation::QPSK;
  c.snr_db = {0.0, 6.0};
  c.trials = 40;
  c.seed = 9;
  for (const auto& d : decoders) c.decoders.push_back(DecoderSpec::parse(d));
  return c;
}

// CSV with the timing column blanked.
std::string csv_without_time(const MetricTable& t) {
  MetricTable copy = t;
  for (auto& r : copy.rows) r.mean_time_s = 0.0;
  std::ostringstream os;
  write_csv(os, copy);
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mimosd_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MIMOSD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("decoder specs parse and print canonically") {
  const char* canonical[] = {"mrc",
                             "zf",
                             "mmse",
                             "ml",
                             "sd:strategy=bfs;j=2",
                             "sd:strategy=bestfs;j=1",
                             "plsd:batch=4;threads=3",
                             "psd:balancing=static;j=1;workers=5",
                             "kbest:k=10",
                             "sdkbest:eps=0.05;k=2;workers=3"};
  for (const char* text : canonical) {
    const auto spec = DecoderSpec::parse(text);
    CHECK(DecoderSpec::parse(spec.label()).label() == spec.label());
  }
  const auto sd = DecoderSpec::parse("sd:strategy=dfs,j=3");
  CHECK(sd.kind == DecoderKind::Sd);
  CHECK(sd.strategy == Strategy::DFS);
  CHECK(sd.group == 3);
  CHECK(DecoderSpec::parse("sdkbest").k == 8);
  CHECK(DecoderSpec::parse("kbest").k == 10);
  CHECK(DecoderSpec::parse("psd:workers=2").threads == 2);
  CHECK(DecoderSpec::parse("plsd:threads=3;batch=7").batch == 7);

  CHECK_THROWS_AS(DecoderSpec::parse("viterbi"), ConfigError);
  CHECK_THROWS_AS(DecoderSpec::parse("sd:k=3"), ConfigError);
  CHECK_THROWS_AS(DecoderSpec::parse("sd:j=0"), ConfigError);
  CHECK_THROWS_AS(DecoderSpec::parse("kbest:k=abc"), ConfigError);
  CHECK_THROWS_AS(DecoderSpec::parse("psd:balancing=fair"), ConfigError);
  CHECK_THROWS_AS(DecoderSpec::parse("mmse:k=1"), ConfigError);
}

TEST_CASE("snr grids, radius policies and erasure policies") {
  CHECK(parse_snr_grid("0:20:4") == std::vector<double>{0, 4, 8, 12, 16, 20});
  CHECK(parse_snr_grid("0:1:0.25").size() == 5);
  CHECK(parse_snr_grid("3,1.5,30") == std::vector<double>{3, 1.5, 30});
  CHECK(parse_snr_grid("7") == std::vector<double>{7});
  CHECK(std::isinf(parse_snr_grid("inf").at(0)));
  CHECK_THROWS_AS(parse_snr_grid("0:10:0"), ConfigError);
  CHECK_THROWS_AS(parse_snr_grid("10:0:2"), ConfigError);
  CHECK_THROWS_AS(parse_snr_grid("a,b"), ConfigError);
  CHECK_THROWS_AS(parse_snr_grid(""), ConfigError);

  CHECK(parse_radius("formula").kind == RadiusPolicy::formula().kind);
  CHECK(parse_radius("inf").kind == RadiusPolicy::infinite().kind);
  CHECK(to_string(parse_radius(to_string(RadiusPolicy::explicit_sq(2.5)))) ==
        to_string(RadiusPolicy::explicit_sq(2.5)));
  CHECK_THROWS_AS(parse_radius("-1"), ConfigError);
  CHECK_THROWS_AS(parse_radius("big"), ConfigError);

  CHECK(parse_erasure(to_string(ErasurePolicy::MmseFallback)) == ErasurePolicy::MmseFallback);
  CHECK(parse_erasure("errors") == ErasurePolicy::Errors);
  CHECK_THROWS_AS(parse_erasure("ignore"), ConfigError);
}

TEST_CASE("campaign validation") {
  auto c = small_campaign({"sd"});
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.n_rx = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.decoders.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.snr_db.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small_campaign({"ml"});
  bad.n_tx = bad.n_rx = 16;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("campaigns are reproducible apart from timing") {
  const auto c = small_campaign({"mmse", "sd:strategy=dfs", "plsd:threads=3;batch=2", "kbest:k=4"});
  const auto a = run_campaign(c);
  const auto b = run_campaign(c);
  CHECK(csv_without_time(a) == csv_without_time(b));
  REQUIRE(a.rows.size() == 8);
  CHECK(a.rows[0].decoder == "mmse");
  CHECK(a.rows[0].snr_db == 0.0);
  CHECK(a.rows[4].snr_db == 6.0);
  auto other = c;
  other.seed = 10;
  CHECK(csv_without_time(run_campaign(other)) != csv_without_time(a));
}

TEST_CASE("master/worker campaigns reproduce their error columns") {
  // node counts follow the thread schedule, the decisions do not
  const auto c = small_campaign({"psd:workers=3", "psd:workers=2;balancing=static"});
  const auto a = run_campaign(c);
  const auto b = run_campaign(c);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].ser == b.rows[i].ser);
    CHECK(a.rows[i].ber == b.rows[i].ber);
    CHECK(a.rows[i].erasure_rate == b.rows[i].erasure_rate);
  }
}

TEST_CASE("csv round trip keeps every column") {
  const auto t = run_campaign(small_campaign({"zf", "sd"}));
  std::ostringstream os;
  write_csv(os, t);
  const std::string text = os.str();
  CHECK(text.rfind("#schema=mimosd-metrics/1,", 0) == 0);
  std::istringstream is(text);
  const auto back = read_csv(is);
  CHECK(back.tags == t.tags);
  REQUIRE(back.rows.size() == t.rows.size());
  std::ostringstream again;
  write_csv(again, back);
  CHECK(again.str() == text);

  std::istringstream broken(text + "1,sd,notanumber,0,0,0,0,0,0,1,0\n");
  CHECK_THROWS_WITH_AS(read_csv(broken), doctest::Contains("line"), ConfigError);
  std::istringstream no_schema("snr_db,decoder\n");
  CHECK_THROWS_AS(read_csv(no_schema), ConfigError);
  CHECK_THROWS_AS(read_csv_file("/nonexistent/dir/x.csv"), IoError);
}

TEST_CASE("tree decoders with an infinite radius match exhaustive search symbol for symbol") {
  auto c = small_campaign({"ml", "sd:strategy=bfs", "sd:strategy=bestfs;j=2", "plsd:threads=2",
                           "psd:workers=3", "sdkbest:k=256"});
  c.radius = RadiusPolicy::infinite();
  const auto t = run_campaign(c);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& ml = t.rows[i - i % c.decoders.size()];
    CHECK(t.rows[i].ser == ml.ser);
    CHECK(t.rows[i].ber == ml.ber);
    CHECK(t.rows[i].erasure_rate == 0.0);
  }
}

TEST_CASE("maximum likelihood is near error free at high snr") {
  CampaignConfig c;
  c.n_tx = c.n_rx = 2;
  c.modulation = Modulation::BPSK;
  c.snr_db = {30.0};
  c.trials = 10000;
  c.decoders = {DecoderSpec::parse("ml")};
  const auto t = run_campaign(c);
  CHECK(t.rows.at(0).ser < 1e-2);
}

TEST_CASE("k-best work does not depend on snr") {
  auto c = small_campaign({"kbest:k=3"});
  c.snr_db = {0.0, 10.0, 30.0};
  const auto t = run_campaign(c);
  for (const auto& r : t.rows) {
    CHECK(r.mean_visited == t.rows[0].mean_visited);
    CHECK(r.max_visited == t.rows[0].max_visited);
    CHECK(r.mean_pd == t.rows[0].mean_pd);
  }
}

TEST_CASE("erasure policies") {
  auto c = small_campaign({"sd", "mmse"});
  c.radius = RadiusPolicy::explicit_sq(1e-3);
  c.snr_db = {0.0};
  const auto errors = run_campaign(c);
  CHECK(errors.rows[0].erasure_rate == 1.0);
  CHECK(errors.rows[0].ser == 1.0);
  c.erasure = ErasurePolicy::MmseFallback;
  const auto fallback = run_campaign(c);
  CHECK(fallback.rows[0].erasure_rate == 1.0);
  CHECK(fallback.rows[0].ser == fallback.rows[1].ser);
  CHECK(fallback.tags.at("erasure") != errors.tags.at("erasure"));
}

TEST_CASE("mmse beats zf at low snr") {
  CampaignConfig c;
  c.n_tx = c.n_rx = 4;
  c.modulation = Modulation::QPSK;
  c.snr_db = {0.0, 4.0};
  c.trials = 2000;
  c.decoders = {DecoderSpec::parse("zf"), DecoderSpec::parse("mmse")};
  const auto t = run_campaign(c);
  CHECK(t.rows[1].ser < t.rows[0].ser);
  CHECK(t.rows[3].ser < t.rows[2].ser);
}

TEST_CASE("trial-parallel campaigns equal sequential ones") {
  auto c = small_campaign({"zf", "mmse", "kbest:k=2"});
  const auto seq = run_campaign(c);
  c.trial_parallel = true;
  CHECK(csv_without_time(run_campaign(c)) == csv_without_time(seq));
}

TEST_CASE("traced campaigns hand back one trace per tree decoder") {
  const auto c = small_campaign({"mmse", "sd", "ml", "kbest:k=2"});
  std::vector<std::pair<std::string, std::string>> traces;
  run_campaign(c, nullptr, &traces);
  REQUIRE(traces.size() == 2);
  CHECK(traces[0].first == "sd:strategy=bestfs;j=1");
  CHECK(traces[1].first == "kbest:k=2");
  CHECK(traces[0].second.rfind("# mimosd-trace v1 M=3 omega=4 J=1", 0) == 0);
}

TEST_CASE("comparison of two campaigns") {
  auto c = small_campaign({"zf", "sd:strategy=bfs"});
  const auto a = run_campaign(c);
  c.decoders = {DecoderSpec::parse("mmse"), DecoderSpec::parse("sd:strategy=bestfs")};
  const auto b = run_campaign(c);
  const auto rows = compare_report(a, b);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].decoder_a == "sd:strategy=bfs;j=1");
  CHECK(rows[1].decoder_b == "sd:strategy=bestfs;j=1");
  CHECK(rows[1].d_ser == 0.0);
  CHECK(rows[1].ser_winner == '=');
  CHECK(rows[1].d_visited > 0.0);
  CHECK(rows[1].visited_winner == 'B');
  std::ostringstream os;
  write_compare(os, rows);
  CHECK(!os.str().empty());

  auto d = small_campaign({"zf", "sd"});
  d.snr_db = {0.0, 5.0};
  CHECK_THROWS_AS(compare_report(a, run_campaign(d)), GridMismatchError);
  d = small_campaign({"zf", "sd"});
  d.n_tx = d.n_rx = 2;
  CHECK_THROWS_AS(compare_report(a, run_campaign(d)), GridMismatchError);
  d = small_campaign({"zf"});
  CHECK_THROWS_AS(compare_report(a, run_campaign(d)), GridMismatchError);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch_dir("cli");
  const std::string out = (dir / "a.csv").string();
  const std::string base = "simulate --tx 2 --rx 2 --mod bpsk --snr 0,10 --trials 20 ";

  CHECK(run_cli(base + "--decoder sd --decoder mmse --out " + out + " --trace " +
                (dir / "t.trace").string()) == 0);
  CHECK(fs::exists(out));
  CHECK(fs::exists(dir / "t.trace"));
  CHECK(run_cli("audit " + (dir / "t.trace").string()) == 0);
  CHECK(run_cli("compare " + out + " " + out) == 0);

  CHECK(run_cli(base + "--decoder viterbi --out " + out) == 2);
  CHECK(run_cli(base + "--out " + out) == 2);
  CHECK(run_cli(base + "--decoder sd --radius nope --out " + out) == 2);
  CHECK(run_cli("simulate --tx 5 --rx 3 --decoder sd --out " + out) == 2);
  CHECK(run_cli(base + "--decoder sd --out /nonexistent/dir/a.csv") == 3);
  CHECK(run_cli("compare " + out + " /nonexistent/b.csv") == 3);
  CHECK(run_cli("audit /nonexistent/t.trace") == 3);
  CHECK(run_cli(base + "--decoder sd --config /nonexistent/cfg.ini --out " + out) == 3);

  // a trace with a pruned node inside the sphere fails the audit
  {
    std::ofstream bad(dir / "bad.trace");
    bad << "# mimosd-trace v1 M=1 omega=2 J=1\n"
           "expand 0 0 0 0 0 inf -\n"
           "prune 0 1 0 1 0.5 inf 0\n"
           "leaf 0 2 0 1 0.25 inf 1\n";
  }
  CHECK(run_cli("audit " + (dir / "bad.trace").string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("config files fill in flags and explicit flags win") {
  const auto dir = scratch_dir("cfg");
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << "tx=2\nrx=2\nmod=bpsk\nsnr=0\ntrials=15\ndecoder=zf\nseed=4\n";
  }
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  REQUIRE(run_cli("simulate --config " + (dir / "run.ini").string() + " --out " + a) == 0);
  REQUIRE(run_cli("simulate --config " + (dir / "run.ini").string() + " --trials 25 --out " + b) ==
          0);
  const auto ta = read_csv_file(a);
  const auto tb = read_csv_file(b);
  CHECK(ta.tags.at("tx") == "2");
  CHECK(ta.tags.at("seed") == "4");
  CHECK(ta.rows.at(0).trials == 15);
  CHECK(tb.rows.at(0).trials == 25);
  fs::remove_all(dir);
}
