#ifndef SMALELAB_CLI_HPP
#define SMALELAB_CLI_HPP

#include <json.hpp>

#include <string>
#include <vector>

#include "smalelab/systems.hpp"

namespace smalelab::cli {

using Json = nlohmann::json;

struct Config {
  std::string system = "full2";
  int depth = 4;
  uint64_t seed = 1;
  std::string out_dir;
  std::string matrix_file;  // optional custom transition matrix (system "sft")
  double delta = -1;        // fattening radius; negative = delta1/2 from the search
  int samples = 100000;
  std::vector<double> radii;  // empty = dyadic defaults 2^-3..2^-7
  int centers = 50;
  std::string word;  // for the parry subcommand
  systems::SystemParams params;
  double ahlfors_s_tol = 0.1;
  double ahlfors_spread_tol = 0.05;
  double metric_k = 0;  // 0 = take the empirical Fathi constant
  int truncation_guard = 2;

  void apply_kv(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  std::unique_ptr<systems::SmaleSystem> make() const;
  std::vector<double> radii_or_default() const;
};

// canonical float formatting: 9 significant digits everywhere
std::string fmt9(double v);
double round9(double v);
Json num9(double v);

Json run_spectrum(const Config& cfg);
Json run_parry(const Config& cfg);
Json run_refine(const Config& cfg);
std::string run_stats_csv(const Config& cfg);
Json run_fatten(const Config& cfg);
Json run_ufcp(const Config& cfg, std::string* csv = nullptr);
Json run_ahlfors(const Config& cfg);
Json run_dims(const Config& cfg);
Json run_artigue(const Config& cfg);
Json run_report(const Config& cfg);

int run(int argc, const char* const* argv);

}  // namespace smalelab::cli

#endif
