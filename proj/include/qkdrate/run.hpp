#pragma once

// Run configuration, evaluation of single points and n-sweeps, CSV output.

#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qkdrate/cv_protocol.hpp"
#include "qkdrate/dv_protocols.hpp"
#include "qkdrate/errors.hpp"
#include "qkdrate/second_order.hpp"

namespace qkdrate {

enum class ProtocolKind { six_state, bb84, cv };

struct SweepSpec {
  double from = 1e6;
  double to = 1e10;
  int points = 9;

  bool operator==(const SweepSpec&) const = default;
};

struct RunConfig {
  ProtocolKind protocol = ProtocolKind::six_state;
  std::optional<double> qber;
  std::optional<double> qx, qy, qz;
  std::optional<double> nbar;
  std::optional<double> eta;
  std::optional<double> nb;
  double eps_i = 1e-10;
  double eps_ii = 1e-10;
  std::optional<double> n;
  std::optional<SweepSpec> sweep;
  SupMode mode = SupMode::direct;
  EpsConvention eps_convention = EpsConvention::squared;
  unsigned threads = 0;  // 0: hardware concurrency

  bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Names

inline std::string to_string(ProtocolKind p) {
  switch (p) {
    case ProtocolKind::six_state: return "six-state";
    case ProtocolKind::bb84: return "bb84";
    case ProtocolKind::cv: return "cv";
  }
  return "?";
}
inline std::string to_string(SupMode m) { return m == SupMode::direct ? "direct" : "perturbative"; }
inline std::string to_string(EpsConvention c) { return c == EpsConvention::squared ? "squared" : "plain"; }

inline ProtocolKind parse_protocol(const std::string& s, const std::string& field = "protocol") {
  if (s == "six-state") return ProtocolKind::six_state;
  if (s == "bb84") return ProtocolKind::bb84;
  if (s == "cv") return ProtocolKind::cv;
  throw ConfigError(field, "unknown protocol '" + s + "' (expected six-state, bb84 or cv)");
}
inline SupMode parse_mode(const std::string& s, const std::string& field = "mode") {
  if (s == "direct") return SupMode::direct;
  if (s == "perturbative") return SupMode::perturbative;
  throw ConfigError(field, "unknown mode '" + s + "' (expected direct or perturbative)");
}
inline EpsConvention parse_eps_convention(const std::string& s, const std::string& field = "eps_convention") {
  if (s == "squared") return EpsConvention::squared;
  if (s == "plain") return EpsConvention::plain;
  throw ConfigError(field, "unknown convention '" + s + "' (expected squared or plain)");
}

// ---------------------------------------------------------------------------
// JSON

using Json = nlohmann::json;

namespace detail {

inline double json_number(const Json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(field, "expected a number");
}

inline std::string json_string(const Json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

inline Json number_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? Json("inf") : Json("-inf");
  return Json(x);
}

}  // namespace detail

inline RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
  static const std::set<std::string> known = {"protocol", "qber", "qx", "qy", "qz", "nbar", "eta", "nb",
                                              "eps_i", "eps_ii", "n", "sweep", "mode", "eps_convention", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key, "unknown field");
  }
  RunConfig c;
  if (!j.contains("protocol")) throw ConfigError("protocol", "missing required field");
  c.protocol = parse_protocol(detail::json_string(j.at("protocol"), "protocol"));
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = detail::json_number(j.at(key), key);
  };
  opt("qber", c.qber);
  opt("qx", c.qx);
  opt("qy", c.qy);
  opt("qz", c.qz);
  opt("nbar", c.nbar);
  opt("eta", c.eta);
  opt("nb", c.nb);
  opt("n", c.n);
  if (j.contains("eps_i")) c.eps_i = detail::json_number(j.at("eps_i"), "eps_i");
  if (j.contains("eps_ii")) c.eps_ii = detail::json_number(j.at("eps_ii"), "eps_ii");
  if (j.contains("mode")) c.mode = parse_mode(detail::json_string(j.at("mode"), "mode"));
  if (j.contains("eps_convention")) {
    c.eps_convention = parse_eps_convention(detail::json_string(j.at("eps_convention"), "eps_convention"));
  }
  if (j.contains("threads")) {
    const Json& t = j.at("threads");
    if (!t.is_number_integer() || t.get<long long>() < 0) throw ConfigError("threads", "expected a nonnegative integer");
    c.threads = t.get<unsigned>();
  }
  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    const Json& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("sweep", "expected an object with from, to, points");
    for (const auto& [key, value] : s.items()) {
      if (key != "from" && key != "to" && key != "points") throw ConfigError("sweep." + key, "unknown field");
    }
    SweepSpec sw;
    for (const char* key : {"from", "to", "points"}) {
      if (!s.contains(key)) throw ConfigError(std::string("sweep.") + key, "missing required field");
    }
    sw.from = detail::json_number(s.at("from"), "sweep.from");
    sw.to = detail::json_number(s.at("to"), "sweep.to");
    if (!s.at("points").is_number_integer()) throw ConfigError("sweep.points", "expected an integer");
    sw.points = s.at("points").get<int>();
    c.sweep = sw;
  }
  return c;
}

inline Json config_to_json(const RunConfig& c) {
  Json j;
  j["protocol"] = to_string(c.protocol);
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = detail::number_to_json(*v);
  };
  put("qber", c.qber);
  put("qx", c.qx);
  put("qy", c.qy);
  put("qz", c.qz);
  put("nbar", c.nbar);
  put("eta", c.eta);
  put("nb", c.nb);
  put("n", c.n);
  j["eps_i"] = c.eps_i;
  j["eps_ii"] = c.eps_ii;
  j["mode"] = to_string(c.mode);
  j["eps_convention"] = to_string(c.eps_convention);
  j["threads"] = c.threads;
  if (c.sweep) j["sweep"] = {{"from", c.sweep->from}, {"to", c.sweep->to}, {"points", c.sweep->points}};
  return j;
}

// ---------------------------------------------------------------------------
// Validation and defaults

struct ResolvedConfig {
  RunConfig config;                     // every field the run depends on is set
  std::vector<std::string> defaults_used;
  std::optional<cv::NbarSearch> nbar_search;
};

namespace detail {

inline void require_probability(const std::optional<double>& v, const char* field) {
  if (v && !(*v >= 0.0 && *v <= 1.0)) throw ConfigError(field, "must lie in [0, 1]");
}

}  // namespace detail

/// Checks cross-field consistency and fills protocol defaults.
inline ResolvedConfig resolve(const RunConfig& in, const std::set<std::string>& explicitly_set = {}) {
  ResolvedConfig r{in, {}, std::nullopt};
  RunConfig& c = r.config;
  if (c.n.has_value() == c.sweep.has_value()) throw ConfigError("n", "exactly one of n and sweep must be given");
  if (c.n && !(*c.n >= 1.0)) throw ConfigError("n", "must be >= 1");
  if (c.sweep) {
    if (!(c.sweep->from >= 1.0) || !std::isfinite(c.sweep->from)) throw ConfigError("sweep.from", "must be finite and >= 1");
    if (!(c.sweep->to >= c.sweep->from) || !std::isfinite(c.sweep->to)) throw ConfigError("sweep.to", "must be finite and >= sweep.from");
    if (c.sweep->points < 1) throw ConfigError("sweep.points", "must be >= 1");
    if (c.sweep->points == 1 && c.sweep->to != c.sweep->from) throw ConfigError("sweep.points", "must be >= 2 when to > from");
  }
  if (!(c.eps_i > 0.0 && c.eps_i < 1.0)) throw ConfigError("eps_i", "must lie in (0, 1)");
  if (!(c.eps_ii > 0.0 && c.eps_ii < 1.0)) throw ConfigError("eps_ii", "must lie in (0, 1)");
  for (const char* f : {"eps_i", "eps_ii", "mode", "eps_convention"}) {
    if (!explicitly_set.count(f)) r.defaults_used.emplace_back(f);
  }

  const bool any_triple = c.qx || c.qy || c.qz;
  switch (c.protocol) {
    case ProtocolKind::six_state:
    case ProtocolKind::bb84: {
      for (const char* f : {"nbar", "eta", "nb"}) {
        const auto& v = std::string(f) == "nbar" ? c.nbar : std::string(f) == "eta" ? c.eta : c.nb;
        if (v) throw ConfigError(f, "not used by protocol " + to_string(c.protocol));
      }
      detail::require_probability(c.qber, "qber");
      detail::require_probability(c.qx, "qx");
      detail::require_probability(c.qy, "qy");
      detail::require_probability(c.qz, "qz");
      if (c.qber && any_triple) throw ConfigError("qber", "give either qber or qx/qy/qz, not both");
      if (!c.qber && !any_triple) throw ConfigError("qber", "missing QBER (qber or qx/qy/qz)");
      if (c.protocol == ProtocolKind::six_state) {
        if (c.qber && !(*c.qber < 2.0 / 3.0)) throw ConfigError("qber", "six-state requires qber in [0, 2/3)");
        if (any_triple) {
          for (const auto& [v, f] : {std::pair{c.qx, "qx"}, std::pair{c.qy, "qy"}, std::pair{c.qz, "qz"}}) {
            if (!v) throw ConfigError(f, "six-state needs all of qx, qy, qz");
          }
          try {
            dv::qber_to_pauli({*c.qx, *c.qy, *c.qz});
          } catch (const InfeasibleQberError& e) {
            throw ConfigError("qx", e.what());
          }
        }
      } else {
        if (c.qy) throw ConfigError("qy", "bb84 has no Y basis");
        if (any_triple) {
          if (!c.qx || !c.qz) throw ConfigError(c.qx ? "qz" : "qx", "bb84 needs both qx and qz");
          if (std::abs(*c.qx - *c.qz) > 1e-12) throw ConfigError("qz", "bb84 pipeline assumes qx == qz");
        }
        const double q = c.qber ? *c.qber : *c.qx;
        if (!(q < 0.5)) throw ConfigError(c.qber ? "qber" : "qx", "bb84 requires a QBER in [0, 1/2)");
      }
      break;
    }
    case ProtocolKind::cv: {
      if (c.qber || any_triple) throw ConfigError(c.qber ? "qber" : "qx", "not used by protocol cv");
      if (!c.eta) throw ConfigError("eta", "missing required field for protocol cv");
      if (!c.nb) throw ConfigError("nb", "missing required field for protocol cv");
      if (!(*c.eta > 0.0 && *c.eta <= 1.0)) throw ConfigError("eta", "must lie in (0, 1]");
      if (!(*c.nb >= 0.0) || !std::isfinite(*c.nb)) throw ConfigError("nb", "must be finite and >= 0");
      if (c.nbar && (!(*c.nbar >= 0.0) || !std::isfinite(*c.nbar))) throw ConfigError("nbar", "must be finite and >= 0");
      if (!c.nbar) {
        r.nbar_search = cv::optimal_nbar(*c.eta, *c.nb);
        c.nbar = r.nbar_search->nbar;
        r.defaults_used.emplace_back("nbar");
      }
      break;
    }
  }
  return r;
}

inline std::vector<double> sweep_points(const SweepSpec& s) {
  std::vector<double> ns;
  if (s.points == 1) return {std::round(s.from)};
  const double a = std::log10(s.from), b = std::log10(s.to);
  for (int k = 0; k < s.points; ++k) {
    const double x = k + 1 == s.points ? b : a + (b - a) * k / (s.points - 1);
    ns.push_back(std::max(1.0, std::round(std::pow(10.0, x))));
  }
  return ns;
}

// ---------------------------------------------------------------------------
// Evaluation

struct ReportRow {
  ProtocolKind protocol = ProtocolKind::six_state;
  double n = 0.0;
  RateBreakdown rate;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
};

struct Report {
  ResolvedConfig resolved;
  std::vector<ReportRow> rows;
};

inline ReportRow evaluate_point(const RunConfig& c, double n) {
  const SecondOrderParams params{n, c.eps_i, c.eps_ii, c.eps_convention};
  ReportRow row;
  row.protocol = c.protocol;
  row.n = n;
  UncertaintySet set;
  switch (c.protocol) {
    case ProtocolKind::six_state: {
      if (c.qber) {
        row.rate = dv::six_state_rate(*c.qber, params);
        const dv::DvQuantities q = dv::pauli_generic_quantities(dv::six_state_pauli(*c.qber));
        set = UncertaintySet({AdversaryPoint{q.i_xe, q.v_xe, 0.0}});
      } else {
        const dv::PauliChannelParams p = dv::qber_to_pauli({*c.qx, *c.qy, *c.qz});
        const dv::DvQuantities q = dv::pauli_generic_quantities(p);
        set = UncertaintySet({AdversaryPoint{q.i_xe, q.v_xe, 0.0}});
        row.rate = key_rate_direct(q.i_xy, q.v_xy, set, params, c.mode);
        // A Pauli channel is entanglement breaking iff no weight exceeds 1/2.
        if (std::max({p.p1, p.p2, p.p3, p.p4}) <= 0.5) {
          row.rate.flags |= kEntanglementBreaking;
          row.rate.total = 0.0;
        }
      }
      break;
    }
    case ProtocolKind::bb84: {
      const double q = c.qber ? *c.qber : *c.qx;
      row.rate = dv::bb84_rate(q, params, c.mode);
      set = dv::bb84_uncertainty_set(q, params);
      break;
    }
    case ProtocolKind::cv: {
      const cv::CvParams p{*c.nbar, *c.eta, *c.nb};
      row.rate = cv::cv_key_rate(p, params);
      set = UncertaintySet({AdversaryPoint{row.rate.eve_first, row.rate.eve_variance, 0.0}});
      break;
    }
  }
  if (row.rate.i_ab > 0.0) row.beta = reconciliation_efficiency(row.rate.i_ab, row.rate.v_ab, n, c.eps_i);
  const std::size_t star = perturbative_selection(set, params.eve_eps());
  if (set.points()[star].holevo > 0.0) row.gamma = privacy_amp_overhead(set, params);
  return row;
}

inline unsigned effective_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates every n of the run. Points run concurrently; rows come back in
/// ascending n.
inline Report run(const RunConfig& config, const std::set<std::string>& explicitly_set = {}) {
  Report report{resolve(config, explicitly_set), {}};
  const RunConfig& c = report.resolved.config;
  const std::vector<double> ns = c.n ? std::vector<double>{*c.n} : sweep_points(*c.sweep);
  report.rows.resize(ns.size());
  const std::size_t workers = std::min<std::size_t>(effective_threads(c.threads), ns.size());
  auto work = [&](std::size_t begin) {
    for (std::size_t i = begin; i < ns.size(); i += workers) report.rows[i] = evaluate_point(c, ns[i]);
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, work, w));
    for (auto& j : jobs) j.get();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr const char* kCsvHeader =
    "protocol,n,i_ab,second_ab,eve_first,eve_second,total,beta,gamma,argmax_label,flags";

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string flags_to_string(std::uint32_t flags) {
  return (flags & kEntanglementBreaking) ? "entanglement_breaking" : "";
}

inline void write_csv(std::ostream& os, const Report& report) {
  os << kCsvHeader << '\n';
  for (const ReportRow& r : report.rows) {
    os << to_string(r.protocol) << ',' << format_number(r.n) << ',' << format_number(r.rate.i_ab) << ','
       << format_number(r.rate.second_ab) << ',' << format_number(r.rate.eve_first) << ','
       << format_number(r.rate.eve_second) << ',' << format_number(r.rate.total) << ',' << format_number(r.beta)
       << ',' << format_number(r.gamma) << ',' << format_number(r.rate.argmax_label) << ','
       << flags_to_string(r.rate.flags) << '\n';
  }
}

inline Json report_metadata(const Report& report) {
  Json m;
  m["config"] = config_to_json(report.resolved.config);
  m["defaults_used"] = report.resolved.defaults_used;
  m["columns"] = Json::array();
  for (const char* col : {"protocol", "n", "i_ab", "second_ab", "eve_first", "eve_second", "total", "beta", "gamma",
                          "argmax_label", "flags"}) {
    m["columns"].push_back(col);
  }
  m["remainder"] = "O(log n / n) terms omitted from totals";
  m["reconciliation"] = report.resolved.config.protocol == ProtocolKind::cv ? "reverse" : "direct";
  if (report.resolved.nbar_search) {
    m["nbar_selection"] = {{"method", "maximize asymptotic rate over log10(nbar)"},
                           {"range", {cv::kNbarMin, cv::kNbarMax}},
                           {"nbar", report.resolved.nbar_search->nbar},
                           {"asymptotic_rate", report.resolved.nbar_search->rate},
                           {"at_upper_bound", report.resolved.nbar_search->at_upper_bound}};
  }
  return m;
}

}  // namespace qkdrate
