#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mhdl {

// key = value lines, '#' comments, [section] headers. Keys are stored as "section.key"
// ("key" outside any section).
std::map<std::string, std::string> parse_config(const std::string& text);

enum class DtPolicy { Cfl, Fixed };

struct RunConfig {
  int dim = 2;
  int nx = 48;
  double kappa = 100.0;
  double lambda = 0.0;
  double t_final = 0.1;
  DtPolicy dt_policy = DtPolicy::Cfl;
  double dt = 0.0;          // fixed policy
  double cfl_scale = 1.0;   // cfl policy
  int r_max = 1;            // energy order
  int order = 2;            // ladder order of the compatible construction
  std::string source = "solenoidal-random";  // builtin name or snapshot path
  bool compatible = false;  // build compatible data from the source before running
  std::vector<std::string> monitors{"energy"};
  std::string out = "out";
  std::uint64_t seed = 1;
  int snapshot_every = 10;
  std::vector<double> kappas;  // limit sweep

  void validate() const;  // throws Config
};

// sections: [run], [init], [output]; unknown keys are an error
RunConfig config_from_map(const std::map<std::string, std::string>& kv, RunConfig base = {});
RunConfig load_config(const std::string& path);

}  // namespace mhdl
