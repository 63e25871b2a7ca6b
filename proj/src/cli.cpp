#include "smalelab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "smalelab/dims.hpp"
#include "smalelab/graph.hpp"
#include "smalelab/metrics.hpp"
#include "smalelab/partitions.hpp"

namespace smalelab::cli {

using partitions::RefinedCover;

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double round9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

Json num9(double v) { return Json(round9(v)); }

void Config::apply_kv(const std::string& key, const std::string& value) {
  auto as_int = [&] { return std::stoi(value); };
  auto as_u64 = [&] { return static_cast<uint64_t>(std::stoull(value)); };
  auto as_double = [&] { return std::stod(value); };
  if (key == "system") system = value;
  else if (key == "depth") depth = as_int();
  else if (key == "seed") seed = as_u64();
  else if (key == "out") out_dir = value;
  else if (key == "matrix") matrix_file = value;
  else if (key == "delta") delta = as_double();
  else if (key == "samples") samples = as_int();
  else if (key == "centers") centers = as_int();
  else if (key == "word") word = value;
  else if (key == "radii") {
    radii.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) radii.push_back(std::stod(tok));
  } else if (key == "sft.depth") params.sft_depth = as_int();
  else if (key == "solenoid.depth") params.solenoid_depth = as_int();
  else if (key == "solenoid.base") params.solenoid_base = as_int();
  else if (key == "horseshoe.depth") params.horseshoe_depth = as_int();
  else if (key == "horseshoe.lambda1") params.horseshoe_lambda1 = as_double();
  else if (key == "horseshoe.cantor") params.horseshoe_cantor = as_double();
  else if (key == "catmap.prerefine") params.catmap_prerefine = as_int();
  else if (key == "ahlfors.s_tol") ahlfors_s_tol = as_double();
  else if (key == "ahlfors.spread_tol") ahlfors_spread_tol = as_double();
  else if (key == "metric.k") metric_k = as_double();
  else if (key == "metric.truncation_guard") truncation_guard = as_int();
  else throw config_error("unknown config key '" + key + "'");
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string k = trim(line.substr(0, eq));
    std::string v = trim(line.substr(eq + 1));
    if (!k.empty()) apply_kv(k, v);
  }
}

std::unique_ptr<systems::SmaleSystem> Config::make() const {
  if (!matrix_file.empty())
    return std::make_unique<systems::Sft>("sft", symdyn::TransitionMatrix::from_file(matrix_file),
                                          params.sft_depth);
  return systems::make_system(system, params);
}

std::vector<double> Config::radii_or_default() const {
  if (!radii.empty()) return radii;
  std::vector<double> out;
  for (int k = 3; k <= 7; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

namespace {

void emit_file(const Config& cfg, const std::string& name, const std::string& payload) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/" + name, std::ios::binary);
  if (!out) throw PreconditionError("IoError", "cannot write " + cfg.out_dir + "/" + name);
  out << payload;
}

Json stats_json(const partitions::CoverStats& st) {
  Json j;
  j["level"] = st.level;
  j["count"] = st.count;
  j["diam_max"] = num9(st.diam_max);
  j["diam_min"] = num9(st.diam_min);
  j["leb"] = num9(st.leb);
  j["multiplicity"] = st.multiplicity;
  j["max_neighbours"] = st.max_neighbours;
  return j;
}

}  // namespace

Json run_spectrum(const Config& cfg) {
  auto sys = cfg.make();
  const auto& m = sys->base_matrix();
  auto cls = symdyn::validate_matrix(m);
  auto pd = symdyn::perron(m);
  Json j;
  j["claim"] = "perron-frobenius-eigendata";
  j["system"] = sys->name();
  j["size"] = m.size();
  j["irreducible"] = cls.irreducible;
  j["primitive"] = cls.primitive;
  j["witness_power"] = cls.witness_power;
  j["lambda"] = num9(pd.lambda);
  j["entropy"] = num9(std::log(pd.lambda));
  j["residual"] = num9(pd.residual);
  emit_file(cfg, "spectrum.json", j.dump(2) + "\n");
  return j;
}

Json run_parry(const Config& cfg) {
  auto sys = cfg.make();
  const auto& m = sys->base_matrix();
  auto mu = sys->base_parry();
  Json j;
  j["claim"] = "parry-measure";
  j["system"] = sys->name();
  j["lambda"] = num9(mu.lambda);
  for (double v : mu.p) j["p"].push_back(num9(v));
  for (const auto& row : mu.P) {
    Json r = Json::array();
    for (double v : row) r.push_back(num9(v));
    j["P"].push_back(r);
  }
  j["cylinder_bound_D"] = num9(mu.cylinder_bound());
  // total mass per rank up to the configured depth
  for (int rank = 1; rank <= std::min(cfg.depth * 2 - 1, 15); rank += 2) {
    double total = 0;
    symdyn::enumerate_admissible(m, rank, [&](const std::vector<int>& w) {
      total += symdyn::cylinder_measure(mu, m, w).measure;
    });
    Json row;
    row["rank"] = rank;
    row["total_mass"] = num9(total);
    j["mass"].push_back(row);
  }
  if (!cfg.word.empty()) {
    auto w = symdyn::Word::parse(m, cfg.word);
    Json wj;
    wj["word"] = cfg.word;
    if (w) {
      wj["admissible"] = true;
      wj["measure"] = num9(symdyn::cylinder_measure(mu, *w));
    } else {
      wj["admissible"] = false;
      wj["measure"] = 0.0;
    }
    j["word_measure"] = wj;
  }
  emit_file(cfg, "parry.json", j.dump(2) + "\n");
  return j;
}

Json run_refine(const Config& cfg) {
  auto sys = cfg.make();
  auto covers = partitions::refine_range(*sys, cfg.depth);
  Json j;
  j["claim"] = "cardinality-word-count-identity";
  j["system"] = sys->name();
  for (const auto& c : covers) {
    Json row;
    row["level"] = c.level;
    row["count"] = c.count();
    row["expected"] = symdyn::count_words(sys->base_matrix(), 2 * c.level - 1).str();
    j["levels"].push_back(row);
  }
  j["verified"] = true;  // refine_range audits the identity on every build
  emit_file(cfg, "refine.json", j.dump(2) + "\n");
  return j;
}

std::string run_stats_csv(const Config& cfg) {
  auto sys = cfg.make();
  auto covers = partitions::refine_range(*sys, cfg.depth);
  std::ostringstream csv;
  csv << "level,count,diam_max,diam_min,leb,multiplicity,max_neighbours\n";
  for (const auto& c : covers) {
    auto st = partitions::cover_stats(c, {cfg.samples, cfg.seed});
    csv << st.level << ',' << st.count << ',' << fmt9(st.diam_max) << ',' << fmt9(st.diam_min) << ','
        << fmt9(st.leb) << ',' << st.multiplicity << ',' << st.max_neighbours << '\n';
  }
  emit_file(cfg, "stats.csv", csv.str());
  return csv.str();
}

Json run_fatten(const Config& cfg) {
  auto sys = cfg.make();
  auto covers = partitions::refine_range(*sys, cfg.depth);
  auto bounds = partitions::delta_search(*sys, covers[0]);
  double delta = cfg.delta > 0 ? cfg.delta : bounds.delta1 / 2;
  std::vector<partitions::FatCover> fats;
  fats.reserve(covers.size());
  for (const auto& c : covers) fats.push_back(partitions::fatten(c, delta));
  auto audit = partitions::fattening_audit(covers, fats);
  Json j;
  j["claim"] = "fattening-bijectivity";
  j["system"] = sys->name();
  j["delta0"] = num9(bounds.delta0);
  j["delta1"] = num9(bounds.delta1);
  j["delta_used"] = num9(delta);
  j["audit_pass"] = audit.pass;
  j["violations"] = Json::array();
  for (const auto& v : audit.violations) j["violations"].push_back(v);
  Json lebs = Json::array();
  for (const auto& f : fats) lebs.push_back(num9(partitions::lebesgue(f, cfg.samples, cfg.seed)));
  j["leb"] = lebs;
  if (fats.size() >= 3) {
    double base = 0;
    int cnt = 0;
    for (size_t i = 1; i + 1 < fats.size(); ++i) {
      double a = j["leb"][i].get<double>();
      double b = j["leb"][i + 1].get<double>();
      if (a > 0 && b > 0) {
        base += std::log(a / b);
        ++cnt;
      }
    }
    j["leb_decay_base"] = cnt ? num9(std::exp(base / cnt)) : Json(0.0);
  }
  emit_file(cfg, "fatten.json", j.dump(2) + "\n");
  return j;
}

Json run_ufcp(const Config& cfg, std::string* csv_out) {
  auto sys = cfg.make();
  auto covers = partitions::refine_range(*sys, cfg.depth);
  auto radii = cfg.radii_or_default();
  auto centers = systems::sample_points(*sys, cfg.centers, cfg.seed);
  auto rep = partitions::ufcp(*sys, covers, radii, centers);
  Json j;
  j["claim"] = "uniform-finite-clustering";
  j["system"] = sys->name();
  j["sup_count"] = rep.sup_count;
  std::ostringstream csv;
  csv << "center,r,level,count,depth_exceeded\n";
  for (const auto& row : rep.table)
    csv << row.center << ',' << fmt9(row.r) << ',' << row.level << ',' << row.count << ','
        << (row.depth_exceeded ? 1 : 0) << '\n';
  j["rows"] = rep.table.size();
  emit_file(cfg, "ufcp.json", j.dump(2) + "\n");
  emit_file(cfg, "ufcp.csv", csv.str());
  if (csv_out) *csv_out = csv.str();
  return j;
}

namespace {

Json regularity_json(const dims::RegularityReport& rep, const std::string& system) {
  Json j;
  j["claim"] = "ahlfors-regularity";
  j["system"] = system;
  j["s_target"] = num9(rep.s_target);
  j["s_hat"] = num9(rep.s_hat);
  j["C_hat"] = num9(rep.c_hat);
  j["spread"] = num9(rep.spread);
  j["verdict"] = rep.verdict;
  Json probes = Json::array();
  for (const auto& p : rep.probes) {
    Json q;
    q["x"] = p.center;
    q["r"] = num9(p.r);
    q["mu"] = num9(p.mu);
    q["ci"] = Json::array({num9(p.ci_lo), num9(p.ci_hi)});
    probes.push_back(q);
  }
  j["probes"] = probes;
  return j;
}

}  // namespace

Json run_ahlfors(const Config& cfg) {
  auto sys = cfg.make();
  std::vector<RefinedCover> covers;
  if (sys->kind() == systems::Kind::CatMap || sys->kind() == systems::Kind::Solenoid)
    covers = partitions::refine_range(*sys, cfg.depth);
  const auto& c = sys->constants();
  double s_target = 2 * std::log(sys->base_parry().lambda) / std::log(c.lambda);
  auto centers = systems::sample_points(*sys, cfg.centers, cfg.seed);
  auto rep = dims::ahlfors_fit(*sys, covers, s_target, centers, cfg.radii_or_default(), cfg.samples,
                               cfg.seed, cfg.ahlfors_s_tol, cfg.ahlfors_spread_tol);
  Json j = regularity_json(rep, sys->name());
  emit_file(cfg, "ahlfors.json", j.dump(2) + "\n");
  // log-log fit data for plotting
  std::ostringstream csv;
  csv << "log2_r,log2_mu\n";
  for (const auto& p : rep.probes)
    if (p.mu > 0) csv << fmt9(std::log2(p.r)) << ',' << fmt9(std::log2(p.mu)) << '\n';
  emit_file(cfg, "ahlfors_fit.csv", csv.str());
  return j;
}

Json run_dims(const Config& cfg) {
  auto sys = cfg.make();
  Json j;
  j["claim"] = "dimension-formulas";
  j["system"] = sys->name();
  const auto& c = sys->constants();
  double h = std::log(sys->base_parry().lambda);
  double s0 = 2 * h / std::log(c.lambda);
  j["entropy"] = num9(h);
  j["s0"] = num9(s0);

  if (sys->kind() == systems::Kind::Sft) {
    auto bd = dims::box_dimension(sys->base_matrix(), std::min(cfg.depth, 16));
    j["box"]["lower_slope"] = num9(bd.lower_slope);
    j["box"]["upper_slope"] = num9(bd.upper_slope);
    j["box"]["fitted"] = num9(bd.fitted);
  } else {
    auto covers = partitions::refine_range(*sys, cfg.depth);
    auto bd = dims::box_dimension(covers);
    j["box"]["lower_slope"] = num9(bd.lower_slope);
    j["box"]["upper_slope"] = num9(bd.upper_slope);
    j["box"]["fitted"] = num9(bd.fitted);
  }

  const bool sft = sys->kind() == systems::Kind::Sft;
  auto cloud = systems::sample_points(*sys, sft ? 250000 : 20000, cfg.seed + 2);
  std::vector<std::pair<double, double>> pairs;
  if (sft) {
    pairs = {{std::ldexp(1.0, -12), std::ldexp(1.0, -2)}, {std::ldexp(1.0, -13), std::ldexp(1.0, -3)}};
  } else {
    pairs = {{c.diameter / 64, c.diameter / 4}, {c.diameter / 128, c.diameter / 4}};
  }
  j["assouad_estimate"] = num9(dims::assouad_estimate(*sys, cloud, pairs));

  auto bounds = dims::dimension_bounds(h, c.lambda, c.Lambda);
  j["bounds"]["h"] = num9(bounds.h);
  j["bounds"]["lambda"] = num9(bounds.lambda);
  j["bounds"]["Lambda"] = num9(bounds.Lambda);
  j["bounds"]["A_upper"] = num9(bounds.A_upper);
  j["bounds"]["A_lower"] = num9(bounds.A_lower);
  j["bounds"]["lower_dim"] = num9(bounds.lower_dim);
  j["bounds"]["applicable"] = bounds.applicable;
  if (bounds.applicable) j["bounds"]["upper_dim"] = num9(bounds.upper_dim);
  j["bounds"]["claim"] = "dimension-bounds";
  emit_file(cfg, "dims.json", j.dump(2) + "\n");
  return j;
}

Json run_artigue(const Config& cfg) {
  auto sys = cfg.make();
  auto fathi = metrics::fathi_check(*sys, 2000, cfg.seed);
  Json j;
  j["claim"] = "fathi-property";
  j["system"] = sys->name();
  j["fathi"]["pass"] = fathi.pass;
  j["fathi"]["k_empirical"] = num9(fathi.k_empirical);
  j["fathi"]["xi_empirical"] = num9(fathi.xi_empirical);
  j["fathi"]["theoretical_applicable"] = fathi.theoretical_applicable;
  if (fathi.theoretical_applicable) {
    j["fathi"]["k_theoretical"] = num9(fathi.k_theoretical);
    j["fathi"]["xi_theoretical"] = num9(fathi.xi_theoretical);
  }
  double k = cfg.metric_k > 0 ? cfg.metric_k : fathi.k_empirical;
  metrics::MetricTransform t(*sys, k, cfg.truncation_guard);
  auto audit = metrics::selfsimilarity_audit(t, 2000, cfg.seed + 9);
  j["transform"]["claim"] = "self-similar-metric";
  j["transform"]["k"] = num9(k);
  j["transform"]["lip_max"] = num9(audit.lip_max);
  j["transform"]["stable_contraction"] = num9(audit.stable_contraction);
  j["transform"]["holder_gamma"] = num9(audit.holder_gamma);
  j["transform"]["holder_c"] = num9(audit.holder_c);
  j["transform"]["gamma_target"] = num9(audit.gamma_target);
  j["transform"]["pass"] = audit.pass;
  emit_file(cfg, "artigue.json", j.dump(2) + "\n");
  return j;
}

Json run_report(const Config& cfg) {
  auto sys = cfg.make();
  Json j;
  j["system"] = sys->name();
  j["depth"] = cfg.depth;
  j["seed"] = cfg.seed;

  auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };

  // spectrum & parry
  j["spectrum"] = run_spectrum(cfg);
  {
    Json p = run_parry(cfg);
    bool ok = true;
    for (const auto& row : p["mass"])
      if (std::abs(row["total_mass"].get<double>() - 1.0) > 1e-9) ok = false;
    p["verdict"] = verdict(ok);
    p["claim"] = "parry-total-mass";
    j["parry"] = p;
  }

  // refinement and stats
  j["refine"] = run_refine(cfg);
  j["refine"]["verdict"] = "PASS";
  {
    auto covers = partitions::refine_range(*sys, cfg.depth);
    Json rows = Json::array();
    double prev_diam = 0;
    bool mult_ok = true;
    size_t base_count = covers[0].count();
    for (const auto& c : covers) {
      auto st = partitions::cover_stats(c, {cfg.samples, cfg.seed});
      rows.push_back(stats_json(st));
      if (st.multiplicity > static_cast<int>(base_count * base_count)) mult_ok = false;
      prev_diam = st.diam_max;
    }
    (void)prev_diam;
    Json s;
    s["claim"] = "multiplicity-bound";
    s["levels"] = rows;
    s["verdict"] = verdict(mult_ok);
    j["stats"] = s;
  }

  // fattening
  try {
    Json f = run_fatten(cfg);
    f["verdict"] = verdict(f["audit_pass"].get<bool>());
    j["fatten"] = f;
  } catch (const PreconditionError& e) {
    j["fatten"] = {{"claim", "fattening-bijectivity"}, {"verdict", "NOT-APPLICABLE"}, {"reason", e.what()}};
  }

  // clustering
  {
    Json u = run_ufcp(cfg);
    u["verdict"] = "PASS";
    j["ufcp"] = u;
  }

  // regularity
  j["ahlfors"] = run_ahlfors(cfg);

  // dimensions
  {
    Json d = run_dims(cfg);
    double s0 = d["s0"].get<double>();
    bool ok = std::abs(d["box"]["fitted"].get<double>() - s0) <= 0.1 * std::max(1.0, s0);
    d["verdict"] = sys->kind() == systems::Kind::Horseshoe ? "NOT-APPLICABLE" : verdict(ok);
    j["dims"] = d;
  }

  // metric pipeline
  try {
    Json a = run_artigue(cfg);
    a["verdict"] = verdict(a["fathi"]["pass"].get<bool>() && a["transform"]["pass"].get<bool>());
    j["artigue"] = a;
  } catch (const PreconditionError& e) {
    j["artigue"] = {{"claim", "fathi-property"}, {"verdict", "NOT-APPLICABLE"}, {"reason", e.what()}};
  }

  emit_file(cfg, "report.json", j.dump(2) + "\n");
  return j;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"refining Markov-partition covers, Parry/Bowen measures, and regularity checks"};
  app.require_subcommand(1);

  Config cfg;
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value configuration file");
  app.add_option("--system", cfg.system, "system name: full2, full3, golden, catmap, solenoid, horseshoe");
  app.add_option("--depth", cfg.depth, "refinement depth");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--matrix", cfg.matrix_file, "transition matrix file (custom shift)");
  app.add_option("--delta", cfg.delta, "fattening radius");
  app.add_option("--samples", cfg.samples, "Monte Carlo samples per probe");
  app.add_option("--centers", cfg.centers, "number of probe centers");
  app.add_option("--word", cfg.word, "cylinder word, e.g. 1,2,1@-1");

  const char* names[] = {"spectrum", "parry", "refine", "stats", "fatten",
                         "ufcp",     "ahlfors", "dims",  "artigue", "report"};
  for (const char* n : names) app.add_subcommand(n)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) {
      // file values first, explicitly passed flags win
      Config file_cfg;
      file_cfg.load_file(config_path);
      if (app.count("--system")) file_cfg.system = cfg.system;
      if (app.count("--depth")) file_cfg.depth = cfg.depth;
      if (app.count("--seed")) file_cfg.seed = cfg.seed;
      if (app.count("--out")) file_cfg.out_dir = cfg.out_dir;
      if (app.count("--matrix")) file_cfg.matrix_file = cfg.matrix_file;
      if (app.count("--delta")) file_cfg.delta = cfg.delta;
      if (app.count("--samples")) file_cfg.samples = cfg.samples;
      if (app.count("--centers")) file_cfg.centers = cfg.centers;
      if (app.count("--word")) file_cfg.word = cfg.word;
      cfg = file_cfg;
    }
    std::string sub = app.get_subcommands().front()->get_name();
    Json out;
    if (sub == "spectrum") out = run_spectrum(cfg);
    else if (sub == "parry") out = run_parry(cfg);
    else if (sub == "refine") out = run_refine(cfg);
    else if (sub == "stats") {
      std::cout << run_stats_csv(cfg);
      return 0;
    } else if (sub == "fatten") out = run_fatten(cfg);
    else if (sub == "ufcp") out = run_ufcp(cfg);
    else if (sub == "ahlfors") out = run_ahlfors(cfg);
    else if (sub == "dims") out = run_dims(cfg);
    else if (sub == "artigue") out = run_artigue(cfg);
    else if (sub == "report") out = run_report(cfg);
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const AuditError& e) {
    std::cerr << "audit failure: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace smalelab::cli
