// qkdrate: second-order key rates from the command line.
//
//   qkdrate rate   --protocol six-state --qber 0.05 --n 1e8
//   qkdrate sweep  --protocol cv --eta 0.2 --nb 0.01 --n-from 1e6 --n-to 1e10 --points 9
//   qkdrate verify --level fast
//
// Exit codes: 0 success, 1 configuration/input error, 2 numerical failure,
// 3 verification failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qkdrate/qkdrate.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kNumerical = 2, kVerify = 3 };

struct Flags {
  std::string config_path;
  std::string out_path;
  std::string protocol;
  double qber = 0, qx = 0, qy = 0, qz = 0;
  double nbar = 0, eta = 0, nb = 0;
  double eps_i = 0, eps_ii = 0;
  std::string n;
  double n_from = 0, n_to = 0;
  int points = 0;
  std::string mode;
  std::string eps_convention;
  unsigned threads = 0;
};

double parse_n(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw qkdrate::ConfigError("n", "not a number: '" + s + "'");
  return v;
}

void add_run_options(CLI::App* cmd, Flags& f, bool sweep) {
  cmd->add_option("--config", f.config_path, "JSON run configuration; flags override its fields");
  cmd->add_option("--out", f.out_path, "CSV output path (metadata goes to <out>.meta.json)");
  cmd->add_option("--protocol", f.protocol, "six-state, bb84 or cv");
  cmd->add_option("--qber", f.qber, "average QBER");
  cmd->add_option("--qx", f.qx, "QBER in the X basis");
  cmd->add_option("--qy", f.qy, "QBER in the Y basis");
  cmd->add_option("--qz", f.qz, "QBER in the Z basis");
  cmd->add_option("--nbar", f.nbar, "CV modulation photon number (default: maximize asymptotic rate)");
  cmd->add_option("--eta", f.eta, "CV channel transmissivity");
  cmd->add_option("--nb", f.nb, "CV environment thermal photon number");
  cmd->add_option("--eps-i", f.eps_i, "decoding error bound");
  cmd->add_option("--eps-ii", f.eps_ii, "security parameter");
  cmd->add_option("--mode", f.mode, "direct or perturbative sup over attacks");
  cmd->add_option("--eps-convention", f.eps_convention, "squared or plain Eve argument");
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
  if (sweep) {
    cmd->add_option("--n-from", f.n_from, "smallest blocklength");
    cmd->add_option("--n-to", f.n_to, "largest blocklength");
    cmd->add_option("--points", f.points, "number of log-spaced blocklengths");
  } else {
    cmd->add_option("--n", f.n, "blocklength (or inf)");
  }
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qkdrate::ConfigError("config", "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw qkdrate::ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

// Builds the run configuration: config file first, then every flag the user
// gave on top of it.
std::pair<qkdrate::RunConfig, std::set<std::string>> build_config(const CLI::App* cmd, const Flags& f, bool sweep) {
  nlohmann::json j = f.config_path.empty() ? nlohmann::json::object() : load_config(f.config_path);
  if (!j.is_object()) throw qkdrate::ConfigError("$", "config must be a JSON object");
  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (given("--protocol")) j["protocol"] = f.protocol;
  if (given("--qber")) j["qber"] = f.qber;
  if (given("--qx")) j["qx"] = f.qx;
  if (given("--qy")) j["qy"] = f.qy;
  if (given("--qz")) j["qz"] = f.qz;
  if (given("--nbar")) j["nbar"] = f.nbar;
  if (given("--eta")) j["eta"] = f.eta;
  if (given("--nb")) j["nb"] = f.nb;
  if (given("--eps-i")) j["eps_i"] = f.eps_i;
  if (given("--eps-ii")) j["eps_ii"] = f.eps_ii;
  if (given("--mode")) j["mode"] = f.mode;
  if (given("--eps-convention")) j["eps_convention"] = f.eps_convention;
  if (given("--threads")) j["threads"] = f.threads;
  if (sweep) {
    if (given("--n-from") || given("--n-to") || given("--points")) {
      j.erase("n");
      if (!j.contains("sweep") || !j["sweep"].is_object()) j["sweep"] = nlohmann::json::object();
      if (given("--n-from")) j["sweep"]["from"] = f.n_from;
      if (given("--n-to")) j["sweep"]["to"] = f.n_to;
      if (given("--points")) j["sweep"]["points"] = f.points;
    }
    if (!j.contains("sweep")) throw qkdrate::ConfigError("sweep", "sweep needs --n-from, --n-to and --points");
  } else {
    if (given("--n")) {
      j.erase("sweep");
      const double n = parse_n(f.n);
      j["n"] = std::isinf(n) ? nlohmann::json("inf") : nlohmann::json(n);
    }
    if (!j.contains("n")) throw qkdrate::ConfigError("n", "rate needs a blocklength (--n)");
  }
  std::set<std::string> set_fields;
  for (const auto& [key, value] : j.items()) set_fields.insert(key);
  return {qkdrate::config_from_json(j), set_fields};
}

int run_rates(const CLI::App* cmd, const Flags& f, bool sweep) {
  const auto [config, set_fields] = build_config(cmd, f, sweep);
  const qkdrate::Report report = qkdrate::run(config, set_fields);
  const std::string meta = qkdrate::report_metadata(report).dump(2) + "\n";
  if (f.out_path.empty()) {
    qkdrate::write_csv(std::cout, report);
    std::cerr << meta;
  } else {
    std::ofstream out(f.out_path, std::ios::binary);
    if (!out) throw qkdrate::ConfigError("out", "cannot write '" + f.out_path + "'");
    qkdrate::write_csv(out, report);
    std::ofstream m(f.out_path + ".meta.json", std::ios::binary);
    m << meta;
  }
  return kOk;
}

int run_verify(const std::string& level) {
  const qkdrate::VerifyLevel lv = level == "full" ? qkdrate::VerifyLevel::full : qkdrate::VerifyLevel::fast;
  const qkdrate::VerifyReport report = qkdrate::verify(lv);
  for (const auto& c : report.checks) {
    std::printf("%-4s %-42s residual %.3e  tol %.1e\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.residual,
                c.tolerance);
  }
  return report.passed() ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order secret-key rates for six-state, BB84 and CV-QKD"};
  app.require_subcommand(1);
  Flags rate_flags, sweep_flags;
  std::string level = "fast";
  CLI::App* rate = app.add_subcommand("rate", "evaluate a single blocklength");
  add_run_options(rate, rate_flags, false);
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate log-spaced blocklengths");
  add_run_options(sweep, sweep_flags, true);
  CLI::App* verify = app.add_subcommand("verify", "run oracle cross-checks");
  verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (rate->parsed()) return run_rates(rate, rate_flags, false);
    if (sweep->parsed()) return run_rates(sweep, sweep_flags, true);
    return run_verify(level);
  } catch (const qkdrate::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const qkdrate::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
}
