#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "vchan/channel_models.hpp"
#include "vchan/trace_pipeline.hpp"

using namespace vchan;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_command(const std::string& command) {
  RunResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  REQUIRE_MESSAGE(pipe != nullptr, "popen failed for: " << command);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    result.output.append(buf, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string vchan_bin() {
  const char* bin = std::getenv("VCHAN_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "VCHAN_BIN must point at the vchan binary");
  return bin;
}

RunResult run_cli(const std::string& args) { return run_command(vchan_bin() + " " + args); }

RunResult run_cli_ok(const std::string& args) {
  RunResult r = run_cli(args);
  REQUIRE_MESSAGE(r.exit_code == 0, "command failed: " << args << "\n" << r.output);
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string templ = (fs::temp_directory_path() / "vchan_cli_XXXXXX").string();
    REQUIRE(::mkdtemp(templ.data()) != nullptr);
    path = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  REQUIRE(out.good());
}

nlohmann::json manifest_of(const fs::path& dir) {
  return nlohmann::json::parse(read_file(dir / "manifest.json"));
}

std::size_t count_files(const fs::path& dir, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE_MESSAGE(pos != std::string::npos, "'" << key << "' not found in:\n" << text);
  return std::strtod(text.c_str() + pos + key.size(), nullptr);
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Independent copy of the manifest digest (FNV-1a, 64-bit) so the test does
// not trust the binary's own implementation.
std::string fnv1a64_hex_local(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h = (h ^ c) * 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const VerticalChannelParams kRef{1.8788, 60.4567, 0.0301, 0.1};

}  // namespace

TEST_CASE("eval vertical emits the reference trace on the default grid") {
  const RunResult r = run_cli_ok("eval vertical");
  const TimeSeries ts = parse_trace(r.output);
  REQUIRE(ts.size() == 110);
  CHECK(ts.start_time() == 0.1);
  CHECK(ts.end_time() == 11.0);
  CHECK(ts.metadata().trial_id == "vertical");
  CHECK(ts.metadata().distance_cm == 0.1);
  const double peak_t = ts.time_at(ts.argmax());
  CHECK(peak_t >= 1.0);
  CHECK(peak_t <= 1.4);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(rel_err(ts.value_at(i), vertical_response(kRef, ts.time_at(i))) < 1e-8);
  }
}

TEST_CASE("eval diffusion is positive and single-peaked over a long grid") {
  const RunResult r = run_cli_ok("eval diffusion --t-end 1000 --rate 1");
  const TimeSeries ts = parse_trace(r.output);
  REQUIRE(ts.size() == 1000);
  const std::size_t peak = ts.argmax();
  CHECK(ts.time_at(peak) == 504.0);
  CHECK(rel_err(ts.max_value(), 0.024197072451914335) < 1e-6);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(ts.value_at(i) > 0.0);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (i < peak) {
      CHECK(ts.value_at(i) < ts.value_at(i + 1));
    } else {
      CHECK(ts.value_at(i) > ts.value_at(i + 1));
    }
  }
}

TEST_CASE("eval writes files and a manifest when given an output directory") {
  TempDir dir;
  run_cli_ok("eval vertical --output " + dir.sub("out"));
  CHECK(fs::exists(dir.path / "out" / "eval_vertical.csv"));
  const nlohmann::json m = manifest_of(dir.path / "out");
  CHECK(m.at("schema") == "1");
  CHECK(m.at("subcommand") == "eval");
  CHECK(m.at("success") == true);
  CHECK(m.at("outputs") == nlohmann::json::array({"eval_vertical.csv"}));
  CHECK(m.contains("duration_seconds"));
  CHECK(!m.contains("error"));

  run_cli_ok("eval vertical --output " + dir.sub("json") + " --format json");
  const nlohmann::json payload =
      nlohmann::json::parse(read_file(dir.path / "json" / "eval_vertical.json"));
  CHECK(payload.at("schema") == "1");
  CHECK(payload.at("trial_id") == "vertical");
  CHECK(payload.at("units") == "raw-analog");
  CHECK(payload.at("samples").size() == 110);
}

TEST_CASE("eval clamps negative tail values only when asked") {
  const RunResult raw = run_cli_ok("eval vertical --t-end 40");
  const TimeSeries unclamped = parse_trace(raw.output);
  CHECK(unclamped.value_at(unclamped.size() - 1) < 0.0);

  const RunResult clamped_run = run_cli_ok("eval vertical --t-end 40 --clamp-negative");
  const TimeSeries clamped = parse_trace(clamped_run.output);
  REQUIRE(clamped.size() == unclamped.size());
  bool saw_zero = false;
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    CHECK(clamped.value_at(i) >= 0.0);
    if (clamped.value_at(i) == 0.0) saw_zero = true;
    if (unclamped.value_at(i) > 0.0) CHECK(clamped.value_at(i) == unclamped.value_at(i));
  }
  CHECK(saw_zero);
}

TEST_CASE("an unsatisfiable time grid is rejected") {
  const RunResult r = run_cli("eval vertical --t-start 5 --t-end 5.05");
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("empty time grid") != std::string::npos);
}

TEST_CASE("flag validation errors name the offending flag") {
  const RunResult dim = run_cli("eval diffusion --dimension 5");
  CHECK(dim.exit_code != 0);
  CHECK(dim.output.find("--dimension") != std::string::npos);

  const RunResult fmt = run_cli("eval vertical --format xml");
  CHECK(fmt.exit_code != 0);
  CHECK(fmt.output.find("--format") != std::string::npos);
}

TEST_CASE("synth without noise reproduces eval sample for sample") {
  const RunResult synth = run_cli_ok("synth --noise-sigma 0");
  const RunResult eval = run_cli_ok("eval vertical");
  const TimeSeries a = parse_trace(synth.output);
  const TimeSeries b = parse_trace(eval.output);
  CHECK(a.samples() == b.samples());
  CHECK(a.metadata().trial_id == "trial_1");
}

TEST_CASE("synth writes seeded trial files reproducibly") {
  TempDir dir;
  run_cli_ok("synth --trials 3 --noise-sigma 0.01 --seed 42 --output " + dir.sub("a"));
  CHECK(count_files(dir.path / "a", "trial_") == 3);
  const TimeSeries t1 = parse_trace_file(dir.path / "a" / "trial_1.csv");
  const TimeSeries t2 = parse_trace_file(dir.path / "a" / "trial_2.csv");
  CHECK(t1.metadata().trial_id == "trial_1");
  CHECK(t2.metadata().trial_id == "trial_2");
  CHECK(t1.samples() != t2.samples());  // distinct per-trial seeds

  run_cli_ok("synth --trials 3 --noise-sigma 0.01 --seed 42 --output " + dir.sub("b"));
  for (const char* name : {"trial_1.csv", "trial_2.csv", "trial_3.csv"}) {
    CHECK(read_file(dir.path / "a" / name) == read_file(dir.path / "b" / name));
  }

  run_cli_ok("synth --trials 1 --noise-sigma 0.01 --seed 43 --output " + dir.sub("c"));
  CHECK(read_file(dir.path / "a" / "trial_1.csv") !=
        read_file(dir.path / "c" / "trial_1.csv"));
}

TEST_CASE("synth refuses multiple trials without an output directory") {
  const RunResult r = run_cli("synth --trials 2");
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("--output") != std::string::npos);
}

TEST_CASE("fit recovers the generating coefficients from noiseless trials") {
  TempDir dir;
  run_cli_ok("synth --trials 6 --noise-sigma 0 --output " + dir.sub("traces"));
  std::string files;
  for (int k = 1; k <= 6; ++k) files += " " + dir.sub("traces/trial_" + std::to_string(k) + ".csv");

  run_cli_ok("fit" + files + " --output " + dir.sub("fit"));
  const nlohmann::json report =
      nlohmann::json::parse(read_file(dir.path / "fit" / "fit_report.json"));
  CHECK(report.at("schema") == "1");
  REQUIRE(report.at("trials").size() == 6);
  for (const auto& trial : report.at("trials")) {
    CHECK(trial.at("converged") == true);
    CHECK(trial.at("rss").get<double>() < 1e-10);
  }
  CHECK(rel_err(report.at("average").at("a").get<double>(), kRef.amplitude) < 1e-6);
  CHECK(rel_err(report.at("average").at("b").get<double>(), kRef.spread) < 1e-6);
  CHECK(rel_err(report.at("average").at("e").get<double>(), kRef.gravity_slope) < 1e-6);
  CHECK(fs::exists(dir.path / "fit" / "fitted_trial_1.csv"));
  CHECK(fs::exists(dir.path / "fit" / "fitted_trial_6.csv"));

  // Same fit from an explicit starting point.
  run_cli_ok("fit" + files + " --initial 1 30 0.01 --output " + dir.sub("fit2"));
  const nlohmann::json report2 =
      nlohmann::json::parse(read_file(dir.path / "fit2" / "fit_report.json"));
  CHECK(rel_err(report2.at("average").at("a").get<double>(), kRef.amplitude) < 1e-6);
  CHECK(rel_err(report2.at("average").at("b").get<double>(), kRef.spread) < 1e-6);
  CHECK(rel_err(report2.at("average").at("e").get<double>(), kRef.gravity_slope) < 1e-6);
}

TEST_CASE("fit without an output directory prints the report") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("traces"));
  const RunResult r = run_cli_ok("fit " + dir.sub("traces/trial_1.csv"));
  CHECK(r.output.find("trial_1: a=") != std::string::npos);
  CHECK(r.output.find("converged=yes") != std::string::npos);
  CHECK(r.output.find("average: a=") != std::string::npos);
  CHECK(r.output.find("\"schema\": \"1\"") != std::string::npos);
}

TEST_CASE("fit averages six noisy trials to within five percent") {
  TempDir dir;
  run_cli_ok("synth --trials 6 --noise-sigma 0.01 --seed 1000 --output " + dir.sub("traces"));
  std::string files;
  for (int k = 1; k <= 6; ++k) files += " " + dir.sub("traces/trial_" + std::to_string(k) + ".csv");
  run_cli_ok("fit" + files + " --output " + dir.sub("fit"));
  const nlohmann::json report =
      nlohmann::json::parse(read_file(dir.path / "fit" / "fit_report.json"));
  CHECK(rel_err(report.at("average").at("a").get<double>(), kRef.amplitude) < 0.05);
  CHECK(rel_err(report.at("average").at("b").get<double>(), kRef.spread) < 0.05);
  CHECK(rel_err(report.at("average").at("e").get<double>(), kRef.gravity_slope) < 0.05);
}

TEST_CASE("fit fails fast on a malformed trace unless told to keep going") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("traces"));
  write_file(dir.path / "traces" / "broken.csv", "not,a\nvalid trace\n");
  const std::string good = dir.sub("traces/trial_1.csv");
  const std::string bad = dir.sub("traces/broken.csv");

  const RunResult strict = run_cli("fit " + good + " " + bad + " --output " + dir.sub("strict"));
  CHECK(strict.exit_code != 0);
  CHECK(strict.output.find("trial 'broken'") != std::string::npos);
  CHECK(!fs::exists(dir.path / "strict" / "fit_report.json"));
  const nlohmann::json failed = manifest_of(dir.path / "strict");
  CHECK(failed.at("success") == false);
  CHECK(!failed.at("error").get<std::string>().empty());

  const RunResult lax =
      run_cli("fit " + good + " " + bad + " --keep-going --output " + dir.sub("lax"));
  CHECK(lax.exit_code == 0);
  CHECK(lax.output.find("skipping") != std::string::npos);
  const nlohmann::json report =
      nlohmann::json::parse(read_file(dir.path / "lax" / "fit_report.json"));
  CHECK(report.at("trials").size() == 1);
  CHECK(manifest_of(dir.path / "lax").at("success") == true);
}

TEST_CASE("fit --normalize makes the result scale independent") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0.01 --seed 7 --output " + dir.sub("traces"));
  const fs::path original = dir.path / "traces" / "trial_1.csv";
  const TimeSeries base = parse_trace_file(original);
  std::vector<Sample> scaled = base.samples();
  for (Sample& s : scaled) s.v *= 4.0;
  write_trace_file(dir.path / "traces" / "scaled.csv",
                   TimeSeries(std::move(scaled), base.metadata()));

  run_cli_ok("fit " + original.string() + " --normalize --output " + dir.sub("a"));
  run_cli_ok("fit " + dir.sub("traces/scaled.csv") + " --normalize --output " + dir.sub("b"));
  const nlohmann::json ra = nlohmann::json::parse(read_file(dir.path / "a" / "fit_report.json"));
  const nlohmann::json rb = nlohmann::json::parse(read_file(dir.path / "b" / "fit_report.json"));
  for (const char* key : {"a", "b", "e"}) {
    CHECK(rel_err(ra.at("average").at(key).get<double>(),
                  rb.at("average").at(key).get<double>()) < 1e-6);
  }
}

TEST_CASE("fit subtracts an explicit baseline") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("traces"));
  const TimeSeries base = parse_trace_file(dir.path / "traces" / "trial_1.csv");
  std::vector<Sample> offset = base.samples();
  for (Sample& s : offset) s.v += 0.25;
  write_trace_file(dir.path / "traces" / "offset.csv",
                   TimeSeries(std::move(offset), base.metadata()));

  run_cli_ok("fit " + dir.sub("traces/offset.csv") + " --baseline 0.25 --output " + dir.sub("fit"));
  const nlohmann::json report =
      nlohmann::json::parse(read_file(dir.path / "fit" / "fit_report.json"));
  CHECK(rel_err(report.at("average").at("a").get<double>(), kRef.amplitude) < 1e-5);
  CHECK(rel_err(report.at("average").at("b").get<double>(), kRef.spread) < 1e-5);
  CHECK(rel_err(report.at("average").at("e").get<double>(), kRef.gravity_slope) < 1e-5);
}

TEST_CASE("fit --baseline auto removes the resting level of idle samples") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("traces"));
  const TimeSeries base = parse_trace_file(dir.path / "traces" / "trial_1.csv");
  std::vector<Sample> samples = {{0.001, 0.25}, {0.002, 0.25}, {0.003, 0.25},
                                 {0.004, 0.25}, {0.005, 0.25}};
  for (const Sample& s : base.samples()) samples.push_back({s.t, s.v + 0.25});
  write_trace_file(dir.path / "traces" / "idle.csv",
                   TimeSeries(std::move(samples), base.metadata()));

  run_cli_ok("fit " + dir.sub("traces/idle.csv") + " --baseline auto --output " + dir.sub("fit"));
  const nlohmann::json report =
      nlohmann::json::parse(read_file(dir.path / "fit" / "fit_report.json"));
  CHECK(rel_err(report.at("average").at("a").get<double>(), kRef.amplitude) < 1e-3);
  CHECK(rel_err(report.at("average").at("b").get<double>(), kRef.spread) < 1e-3);
  CHECK(rel_err(report.at("average").at("e").get<double>(), kRef.gravity_slope) < 1e-3);
}

TEST_CASE("fit --window restricts the samples used") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("traces"));
  run_cli_ok("fit " + dir.sub("traces/trial_1.csv") + " --window 1 8 --output " + dir.sub("fit"));
  const nlohmann::json report =
      nlohmann::json::parse(read_file(dir.path / "fit" / "fit_report.json"));
  // Noiseless data fits exactly on any sub-window.
  CHECK(rel_err(report.at("average").at("a").get<double>(), kRef.amplitude) < 1e-6);
  CHECK(rel_err(report.at("average").at("b").get<double>(), kRef.spread) < 1e-6);
  CHECK(rel_err(report.at("average").at("e").get<double>(), kRef.gravity_slope) < 1e-6);
}

TEST_CASE("compare of a trace against its own generator has zero lag") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("traces"));
  const RunResult r =
      run_cli_ok("compare " + dir.sub("traces/trial_1.csv") + " --output " + dir.sub("cmp"));
  CHECK(value_after(r.output, "peak_lag_seconds=") == 0.0);

  const std::string payload = read_file(dir.path / "cmp" / "compare.csv");
  CHECK(payload.find("# columns=t,experiment,model\n") != std::string::npos);
  CHECK(payload.find("# peak_lag_seconds=0\n") != std::string::npos);
  std::istringstream lines(payload);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++rows;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    REQUIRE(c2 != std::string::npos);
    const double experiment = std::strtod(line.c_str() + c1 + 1, nullptr);
    const double model = std::strtod(line.c_str() + c2 + 1, nullptr);
    CHECK(std::abs(experiment - model) < 1e-7);
  }
  CHECK(rows == 110);
}

TEST_CASE("compare reports the lag against a slower model") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("traces"));
  // A larger spread moves the model peak later, so the measured trace leads.
  const RunResult r = run_cli_ok("compare " + dir.sub("traces/trial_1.csv") +
                               " --spread 90 --output " + dir.sub("cmp"));
  const double lag = value_after(r.output, "peak_lag_seconds=");
  CHECK(lag < -0.1);
  CHECK(lag > -1.5);
}

TEST_CASE("compare rejects traces that do not cover the comparison grid") {
  TempDir dir;
  run_cli_ok("synth --trials 1 --noise-sigma 0 --output " + dir.sub("full"));
  run_cli_ok("synth --trials 1 --noise-sigma 0 --t-start 2 --t-end 9 --output " + dir.sub("short"));
  const RunResult r = run_cli("compare " + dir.sub("full/trial_1.csv") + " " +
                            dir.sub("short/trial_1.csv") + " --output " + dir.sub("cmp"));
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("but the comparison grid spans") != std::string::npos);
}

TEST_CASE("simulate runs a config end to end, reproducibly") {
  TempDir dir;
  const std::string config = R"({
  "particle_count": 20000,
  "time_step": 0.05,
  "duration": 1.0,
  "diffusion_coefficient": 0.25,
  "bin_width": 0.05,
  "rng_seed": 7,
  "snapshot_times": [0.5, 1.0],
  "threads": 2
})";
  write_file(dir.path / "sim.json", config);
  const std::string cfg = dir.sub("sim.json");

  const RunResult r1 = run_cli_ok("simulate " + cfg + " --output " + dir.sub("a"));
  CHECK(r1.output.find("profile_000.csv: t=0.5 bins=") != std::string::npos);
  CHECK(r1.output.find("profile_001.csv: t=1 bins=") != std::string::npos);
  CHECK(fs::exists(dir.path / "a" / "profile_000.csv"));
  CHECK(fs::exists(dir.path / "a" / "profile_001.csv"));

  const nlohmann::json m = manifest_of(dir.path / "a");
  CHECK(m.at("subcommand") == "simulate");
  CHECK(m.at("success") == true);
  CHECK(m.at("config").at("particle_count") == 20000);
  CHECK(m.at("config").at("rng_seed") == 7);
  REQUIRE(m.at("inputs").size() == 1);
  CHECK(m.at("inputs")[0].at("path") == cfg);
  CHECK(m.at("inputs")[0].at("fnv1a64") == fnv1a64_hex_local(read_file(cfg)));
  CHECK(m.at("outputs") ==
        nlohmann::json::array({"profile_000.csv", "profile_001.csv"}));

  // Byte-identical rerun, manifest equal once the wall-clock entry is masked.
  run_cli_ok("simulate " + cfg + " --output " + dir.sub("b"));
  CHECK(read_file(dir.path / "a" / "profile_000.csv") ==
        read_file(dir.path / "b" / "profile_000.csv"));
  CHECK(read_file(dir.path / "a" / "profile_001.csv") ==
        read_file(dir.path / "b" / "profile_001.csv"));
  nlohmann::json ma = manifest_of(dir.path / "a");
  nlohmann::json mb = manifest_of(dir.path / "b");
  ma.erase("duration_seconds");
  mb.erase("duration_seconds");
  CHECK(ma == mb);

  // Thread count must not change the results.
  run_cli_ok("simulate " + cfg + " --threads 1 --output " + dir.sub("t1"));
  run_cli_ok("simulate " + cfg + " --threads 8 --output " + dir.sub("t8"));
  CHECK(read_file(dir.path / "t1" / "profile_001.csv") ==
        read_file(dir.path / "t8" / "profile_001.csv"));
  CHECK(read_file(dir.path / "t1" / "profile_001.csv") ==
        read_file(dir.path / "a" / "profile_001.csv"));

  // --seed overrides the config seed and changes the draw.
  run_cli_ok("simulate " + cfg + " --seed 99 --output " + dir.sub("s"));
  CHECK(manifest_of(dir.path / "s").at("config").at("rng_seed") == 99);
  CHECK(read_file(dir.path / "s" / "profile_001.csv") !=
        read_file(dir.path / "a" / "profile_001.csv"));
}

TEST_CASE("simulate rejects bad configs with the offending json path") {
  TempDir dir;
  write_file(dir.path / "zero.json",
             R"({"particle_count": 0, "time_step": 0.1, "duration": 1,)"
             R"( "diffusion_coefficient": 1, "bin_width": 0.1})");
  const RunResult zero = run_cli("simulate " + dir.sub("zero.json") + " --output " + dir.sub("a"));
  CHECK(zero.exit_code != 0);
  CHECK(zero.output.find("particle_count must be >= 1") != std::string::npos);
  const nlohmann::json m = manifest_of(dir.path / "a");
  CHECK(m.at("success") == false);
  CHECK(m.at("error").get<std::string>().find("particle_count") != std::string::npos);
  CHECK(m.at("outputs").empty());

  write_file(dir.path / "unknown.json",
             R"({"particle_count": 10, "time_step": 0.1, "duration": 1,)"
             R"( "diffusion_coefficient": 1, "bin_width": 0.1, "bogus": 3})");
  const RunResult unknown =
      run_cli("simulate " + dir.sub("unknown.json") + " --output " + dir.sub("b"));
  CHECK(unknown.exit_code != 0);
  CHECK(unknown.output.find("$.bogus: unknown field") != std::string::npos);
}

TEST_CASE("simulate requires an output directory") {
  TempDir dir;
  write_file(dir.path / "sim.json",
             R"({"particle_count": 10, "time_step": 0.1, "duration": 1,)"
             R"( "diffusion_coefficient": 1, "bin_width": 0.1})");
  const RunResult r = run_cli("simulate " + dir.sub("sim.json"));
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("--output") != std::string::npos);
}

TEST_CASE("a config file fills in defaults and flags override it") {
  TempDir dir;
  write_file(dir.path / "vchan.ini", "[synth]\ntrials=2\nnoise-sigma=0.01\n");
  const std::string ini = dir.sub("vchan.ini");

  run_cli_ok("synth --config " + ini + " --seed 3 --output " + dir.sub("fromconfig"));
  CHECK(count_files(dir.path / "fromconfig", "trial_") == 2);

  run_cli_ok("synth --config " + ini + " --trials 3 --seed 3 --output " + dir.sub("flagwins"));
  CHECK(count_files(dir.path / "flagwins", "trial_") == 3);

  // Root-level placement of --config works too.
  run_cli_ok("--config " + ini + " synth --seed 3 --output " + dir.sub("rootconfig"));
  CHECK(count_files(dir.path / "rootconfig", "trial_") == 2);
  CHECK(read_file(dir.path / "fromconfig" / "trial_1.csv") ==
        read_file(dir.path / "rootconfig" / "trial_1.csv"));
}

TEST_CASE("exit status matches the manifest success flag") {
  TempDir dir;
  run_cli_ok("eval vertical --output " + dir.sub("good"));
  CHECK(manifest_of(dir.path / "good").at("success") == true);

  const RunResult bad =
      run_cli("eval vertical --t-start 5 --t-end 5.05 --output " + dir.sub("bad"));
  CHECK(bad.exit_code != 0);
  const nlohmann::json m = manifest_of(dir.path / "bad");
  CHECK(m.at("success") == false);
  CHECK(m.at("error").get<std::string>().find("empty time grid") != std::string::npos);
}
