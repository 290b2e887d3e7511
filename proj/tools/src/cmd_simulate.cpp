#include <cstdio>
#include <iostream>
#include <stdexcept>

#include "commands.hpp"
#include "vchan/particle_sim.hpp"

namespace vchan::cli {
namespace {

std::string profile_csv(const ConcentrationProfile& p) {
  std::string out;
  out += "# time=" + format_double(p.time) + "\n";
  out += "# bin_width=" + format_double(p.bin_width) + "\n";
  out += "# particle_count=" + std::to_string(p.particle_count) + "\n";
  out += "# out_of_range=" + std::to_string(p.out_of_range) + "\n";
  out += "# mean_position=" + format_double(p.mean_position) + "\n";
  out += "# position_variance=" + format_double(p.position_variance) + "\n";
  for (std::size_t k = 0; k < p.counts.size(); ++k) {
    out += format_double(p.bin_center(k)) + "," + format_double(p.concentration(k)) + "\n";
  }
  return out;
}

nlohmann::json profile_json(const ConcentrationProfile& p) {
  nlohmann::json j;
  j["schema"] = "1";
  j["time"] = p.time;
  j["bin_width"] = p.bin_width;
  j["particle_count"] = p.particle_count;
  j["first_bin_index"] = p.first_bin_index;
  j["counts"] = p.counts;
  j["out_of_range"] = p.out_of_range;
  j["mean_position"] = p.mean_position;
  j["position_variance"] = p.position_variance;
  return j;
}

std::string profile_name(std::size_t index, OutputFormat format) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "profile_%03zu", index);
  return buf + std::string(file_extension(format));
}

}  // namespace

void run_simulate(const SimulateOptions& o) {
  RunContext ctx("simulate", o.common.output(), o.common.parsed_format());
  try {
    if (!ctx.writes_files()) {
      throw std::invalid_argument(
          "simulate writes one file per snapshot; --output DIR is required");
    }
    SimConfig cfg = sim_config_from_json(ctx.read_input(o.config_file));
    if (o.seed_given) cfg.rng_seed = o.common.seed;
    if (o.threads) cfg.threads = *o.threads;
    ctx.set_config(nlohmann::json::parse(sim_config_to_json(cfg)));

    const std::vector<ConcentrationProfile> profiles = simulate(cfg);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      const ConcentrationProfile& p = profiles[i];
      const std::string name = profile_name(i, ctx.format());
      ctx.write_output(name, ctx.format() == OutputFormat::Json
                                 ? profile_json(p).dump(2) + "\n"
                                 : profile_csv(p));
      std::cout << name << ": t=" << format_double(p.time) << " bins=" << p.counts.size()
                << " out_of_range=" << p.out_of_range << '\n';
    }
    ctx.finalize(true, "");
  } catch (const std::exception& e) {
    ctx.finalize(false, e.what());
    throw;
  }
}

}  // namespace vchan::cli
