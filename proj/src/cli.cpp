#include "conelab/cli.hpp"

#include "conelab/config.hpp"
#include "conelab/suites.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace conelab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  double tol_scale = 1.0;
  std::optional<int> n;
  std::optional<double> p;
  std::optional<std::string> cone;
  std::optional<std::string> norm;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : parse_config(read_file(o.config_path));
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.n) c.n = *o.n;
  if (o.p) c.p = *o.p;
  if (o.cone) {
    ConeSpec s;
    s.kind = *o.cone;
    c.cone = s;
  }
  if (o.norm) {
    NormSpec s;
    s.family = *o.norm;
    c.norm = s;
  }
  if (!(o.tol_scale > 0.0)) throw SchemaError("--tol-scale must be positive");
  return c;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

using SuiteFn = std::function<SuiteResult(const Problem&)>;

const std::vector<std::pair<std::string, SuiteFn>>& suite_table() {
  static const std::vector<std::pair<std::string, SuiteFn>> t = {
      {"verify-norm", verify_norm},         {"verify-bubble", verify_bubble},
      {"verify-identities", verify_identities}, {"verify-sobolev", verify_sobolev},
      {"minimize", run_minimize},           {"transport-check", transport_suite},
  };
  return t;
}

// Persist one suite; returns its summary entry.
json persist(const SuiteResult& s, const fs::path& root, std::set<std::string>& used) {
  auto unique = [&](const std::string& stem) {
    std::string name = stem;
    for (int k = 2; used.count(name); ++k) name = stem + "_" + std::to_string(k);
    used.insert(name);
    return name;
  };
  json entry{{"name", s.name}, {"pass", s.pass()}, {"failures", s.failures()}};
  json files = json::array();
  for (const auto& r : s.reports) {
    const std::string stem = unique(s.name + "__" + r.name);
    write_file(root / "reports" / (stem + ".csv"), to_csv(r));
    files.push_back({{"report", r.name}, {"file", "reports/" + stem + ".csv"}, {"rows", r.rows.size()},
                     {"failures", r.failures()}});
  }
  for (const auto& c : s.chains) {
    const std::string stem = unique(s.name + "__" + c.name);
    write_file(root / "reports" / (stem + ".csv"), to_csv(c));
    std::size_t bad = 0;
    for (const auto& row : c.rows) bad += row.pass ? 0 : 1;
    files.push_back({{"report", c.name}, {"file", "reports/" + stem + ".csv"}, {"rows", c.rows.size()},
                     {"failures", bad}});
  }
  for (const auto& [name, body] : s.tables) {
    const std::string stem = unique(s.name + "__" + name);
    write_file(root / "reports" / (stem + ".csv"), body);
    files.push_back({{"table", name}, {"file", "reports/" + stem + ".csv"}});
  }
  for (const auto& [name, body] : s.profiles) {
    write_file(root / "profiles" / (name + ".csv"), body);
    files.push_back({{"profile", name}, {"file", "profiles/" + name + ".csv"}});
  }
  json metrics = json::object();
  for (const auto& [k, v] : s.metrics) metrics[k] = v;
  entry["metrics"] = metrics;
  entry["files"] = files;
  return entry;
}

int execute(const std::string& sub, const Overrides& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  Problem pr;
  try {
    cfg = resolve(o);
    pr = Problem::from_config(cfg);
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kSchema;
  }
  const fs::path root(cfg.out);
  json summary;
  summary["metadata"] = {{"tool", "conelab"}, {"subcommand", sub}, {"timestamp", timestamp()}};
  summary["config"] = json::parse(config_to_json(cfg));
  summary["tol_scale"] = o.tol_scale;
  json suites = json::array();
  std::set<std::string> used;
  bool all_pass = true;
  int status = kPass;
  for (const auto& [name, fn] : suite_table()) {
    if (sub != "all" && sub != name) continue;
    try {
      SuiteResult r = fn(pr);
      for (auto& rep : r.reports) rep.scale_tolerances(o.tol_scale);
      const bool ok = r.pass();
      all_pass = all_pass && ok;
      suites.push_back(persist(r, root, used));
      out << (ok ? "PASS " : "FAIL ") << name << " (" << r.failures() << " failing rows)\n";
    } catch (const std::exception& e) {
      all_pass = false;
      suites.push_back({{"name", name}, {"pass", false}, {"error", e.what()}});
      err << "error in " << name << ": " << e.what() << "\n";
    }
  }
  if (!all_pass) status = kFail;
  summary["suites"] = suites;
  summary["pass"] = all_pass;
  write_file(root / "summary.json", summary.dump(2) + "\n");
  out << (all_pass ? "PASS" : "FAIL") << " " << sub << ", reports in " << root.string() << "\n";
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sharp Sobolev inequalities on convex cones: numerical verification suites"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  Overrides o;
  std::string out_dir, cone, norm;
  std::uint64_t seed = 0;
  int threads = 0, n = 0;
  double p = 0.0;
  app.add_option("--config", o.config_path, "JSON run configuration");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* thr_opt = app.add_option("--threads", threads, "worker cap");
  app.add_option("--tol-scale", o.tol_scale, "multiply upper-bound tolerances");
  auto* n_opt = app.add_option("--n", n, "dimension");
  auto* p_opt = app.add_option("--p", p, "exponent");
  auto* cone_opt = app.add_option("--cone", cone, "full | half | orthant | circular");
  auto* norm_opt = app.add_option("--norm", norm, "euclidean | quadratic | blend | shifted");
  std::string sub;
  for (const char* name : {"verify-norm", "verify-bubble", "verify-identities", "verify-sobolev", "minimize",
                           "transport-check", "all"}) {
    app.add_subcommand(name)->callback([&sub, name] { sub = name; });
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kSchema;
  }
  if (*out_opt) o.out = out_dir;
  if (*seed_opt) o.seed = seed;
  if (*thr_opt) o.threads = threads;
  if (*n_opt) o.n = n;
  if (*p_opt) o.p = p;
  if (*cone_opt) o.cone = cone;
  if (*norm_opt) o.norm = norm;
  return execute(sub, o, out, err);
}

}  // namespace conelab::cli
