#include "diqss/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "diqss/montecarlo.hpp"
#include "diqss/thresholds.hpp"

namespace diqss {

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double round_sig(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

std::string num17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using Meta = std::vector<std::pair<std::string, std::string>>;

// --- flag bundles -----------------------------------------------------------

struct ChannelFlags {
  std::optional<double> eta;
  std::optional<double> eta_d;
  std::optional<double> eta_c;
  std::optional<double> distance;
  double alpha = 0.2;

  bool fiber_given() const {
    return eta_d.has_value() || eta_c.has_value() || distance.has_value();
  }
  FiberModel fiber() const {
    if (!eta_d || !eta_c) {
      throw ConfigError("the fiber model needs both --eta-d and --eta-c");
    }
    FiberModel m;
    m.eta_d = *eta_d;
    m.eta_c = *eta_c;
    m.alpha = alpha;
    m.distance_km = distance.value_or(0.0);
    return m;
  }
  double resolve_eta() const {
    if (eta && fiber_given()) {
      throw ConfigError(
          "provide either --eta or the fiber parameters, not both");
    }
    if (eta) return *eta;
    if (fiber_given()) {
      try {
        return global_efficiency(fiber());
      } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
      }
    }
    throw ConfigError(
        "one of --eta or (--eta-d, --eta-c [, --distance, --alpha]) is "
        "required");
  }
};

struct ParamFlags {
  std::string strategy = "none";
  double q = 0.0;
  double fidelity = 1.0;
  double source_fidelity = 1.0;
  ChannelFlags channel;

  StrategyConfig strategy_config() const {
    StrategyConfig cfg;
    try {
      cfg.kind = strategy_from_name(strategy);
      cfg.q = q;
      validate_strategy(cfg);
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
    return cfg;
  }

  ProtocolParams params_with_eta(double eta_value) const {
    ProtocolParams p;
    p.fidelity = fidelity;
    p.source_fidelity = source_fidelity;
    p.eta = eta_value;
    p.strategy = strategy_config();
    try {
      validate_params(p);
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
    return p;
  }

  void append_meta(Meta& meta) const {
    meta.emplace_back("strategy", strategy);
    meta.emplace_back("q", num17(q));
    meta.emplace_back("fidelity", num17(fidelity));
    meta.emplace_back("source_fidelity", num17(source_fidelity));
    if (channel.eta) meta.emplace_back("eta", num17(*channel.eta));
    if (channel.eta_d) meta.emplace_back("eta_d", num17(*channel.eta_d));
    if (channel.eta_c) meta.emplace_back("eta_c", num17(*channel.eta_c));
    if (channel.distance) {
      meta.emplace_back("distance", num17(*channel.distance));
    }
    if (channel.fiber_given()) {
      meta.emplace_back("alpha", num17(channel.alpha));
    }
  }
};

struct OutputFlags {
  std::string output;
  std::string format; // empty = command default
};

void add_param_flags(CLI::App* sub, ParamFlags& p) {
  sub->add_option("--strategy", p.strategy,
                  "none|preprocess|postselect|advanced")
      ->capture_default_str();
  sub->add_option("--q", p.q, "Alice's flip probability")
      ->capture_default_str();
  sub->add_option("--fidelity", p.fidelity, "white-noise fidelity F")
      ->capture_default_str();
  sub->add_option("--source-fidelity", p.source_fidelity,
                  "per-emission source fidelity F_s")
      ->capture_default_str();
  sub->add_option("--eta", p.channel.eta, "global detection efficiency");
  sub->add_option("--eta-d", p.channel.eta_d, "detector efficiency");
  sub->add_option("--eta-c", p.channel.eta_c, "coupling efficiency");
  sub->add_option("--distance", p.channel.distance, "fiber arm length, km");
  sub->add_option("--alpha", p.channel.alpha, "fiber attenuation, dB/km")
      ->capture_default_str();
}

void add_output_flags(CLI::App* sub, OutputFlags& o) {
  sub->add_option("--output", o.output, "write to this file instead of stdout");
  sub->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

// Flat key=value defaults with the same names as the flags. Applied after
// parsing, filling only the options the command line left untouched, so
// flags always override the file.
void apply_config_defaults(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot read config file '" + path + "'");

  const auto trim = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };

  std::string line;
  int lineno = 0;
  while (std::getline(file, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const auto eq = stripped.find('=');
    const std::string where =
        path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      throw ConfigError("config " + where + " is not key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config " + where + " is not key=value");
    }
    if (key == "config") {
      throw ConfigError("config " + where + ": config files cannot nest");
    }
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw ConfigError("config " + where + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw ConfigError("config " + where + ", key '" + key +
                        "': " + e.what());
    }
  }
}

// Emit through --output or the console stream.
template <typename Writer>
int emit(const OutputFlags& o, std::ostream& out, std::ostream& err,
         Writer&& writer) {
  if (!o.output.empty()) {
    std::ofstream file(o.output);
    if (!file) {
      err << "error: cannot open output file '" << o.output << "'\n";
      return 2;
    }
    writer(file);
    return 0;
  }
  writer(out);
  return 0;
}

void write_meta(std::ostream& os, const Meta& meta) {
  for (const auto& kv : meta) {
    os << "# " << kv.first << "=" << kv.second << "\n";
  }
}

json estimate_json(const std::optional<Estimate>& e) {
  if (!e) return nullptr;
  return json{{"value", e->value}, {"std_error", e->std_error}};
}

json report_json(const SimulationReport& r) {
  json j;
  j["n_rounds"] = r.n_rounds;
  j["seed"] = r.seed;
  j["key_rounds"] = r.key_rounds;
  j["test_rounds"] = r.test_rounds;
  j["discard_rounds"] = r.discard_rounds;
  j["fraction_key"] = r.fraction_key;
  j["fraction_test"] = r.fraction_test;
  j["fraction_discard"] = r.fraction_discard;
  j["qber_sampled_rounds"] = r.qber_sampled_rounds;
  j["qber_errors"] = r.qber_errors;
  j["qber"] = estimate_json(r.qber);
  j["qber_undefined"] = r.qber_undefined;
  j["S_ABC"] = estimate_json(r.s_abc);
  j["S"] = estimate_json(r.chsh);
  j["empty_buckets"] = r.empty_buckets;
  j["estimated_rate"] =
      r.estimated_rate ? json(*r.estimated_rate) : json(nullptr);
  j["S_clamped"] = r.chsh_clamped;
  return j;
}

json check_json(const ValidationCheck& c) {
  json j;
  j["quantity"] = c.quantity;
  j["analytic"] = c.analytic;
  j["empirical"] = std::isfinite(c.empirical) ? json(c.empirical) : json(nullptr);
  j["std_error"] = c.std_error;
  j["sigmas"] = std::isfinite(c.sigmas) ? json(c.sigmas) : json("inf");
  j["pass"] = c.pass;
  return j;
}

json threshold_json(const ThresholdResult& r,
                    const std::optional<double>& user_km) {
  json j;
  j["variable"] = threshold_var_name(r.variable);
  j["value"] = r.value;
  j["bracket"] = json{{"lo", r.bracket.lo}, {"hi", r.bracket.hi}};
  j["residual_rate"] = r.residual_rate;
  j["iterations"] = r.iterations;
  j["widened"] = r.widened;
  if (user_km) j["user_distance_km"] = *user_km;
  return j;
}

// --- commands ----------------------------------------------------------------

int cmd_rate(const ParamFlags& pf, const OutputFlags& of, std::ostream& out,
             std::ostream& err) {
  const ProtocolParams params = pf.params_with_eta(pf.channel.resolve_eta());
  RateBreakdown rb;
  try {
    rb = key_rate(params);
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  const std::string fmt = of.format.empty() ? "json" : of.format;
  return emit(of, out, err, [&](std::ostream& os) {
    if (fmt == "json") {
      json j;
      j["strategy"] = strategy_name(params.strategy.kind);
      j["q"] = params.strategy.q;
      j["eta"] = params.eta;
      j["fidelity"] = params.fidelity;
      j["source_fidelity"] = params.source_fidelity;
      j["delta"] = round_sig(rb.delta, 6);
      j["S"] = round_sig(rb.chsh, 6);
      j["eve_bound"] = round_sig(rb.eve_bound, 6);
      j["key_error"] = round_sig(rb.key_error, 6);
      j["rate"] = round_sig(rb.rate, 6);
      j["nonlocal"] = rb.nonlocal;
      os << j.dump(2) << "\n";
    } else {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%.6g,%.6g\n", rb.delta,
                    rb.chsh, rb.eve_bound, rb.key_error, rb.rate);
      os << "delta,S,eve_bound,key_error,rate\n" << buf;
    }
  });
}

int cmd_threshold(const ParamFlags& pf, const std::string& var_name,
                  const OutputFlags& of, std::ostream& out, std::ostream& err) {
  ThresholdVar var;
  try {
    var = threshold_var_from_name(var_name);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  if (var == ThresholdVar::FlipProb) {
    throw ConfigError("q is a sweep variable, not a threshold target");
  }

  ThresholdResult res;
  std::optional<double> user_km;
  try {
    switch (var) {
      case ThresholdVar::Eta: {
        if (pf.channel.eta || pf.channel.fiber_given()) {
          throw ConfigError(
              "--var eta solves for the efficiency; drop --eta and the fiber "
              "flags");
        }
        res = efficiency_threshold(pf.params_with_eta(1.0));
        break;
      }
      case ThresholdVar::Delta:
        res = qber_threshold(pf.strategy_config(), pf.channel.resolve_eta());
        break;
      case ThresholdVar::Fidelity:
        res = fidelity_threshold(pf.params_with_eta(pf.channel.resolve_eta()));
        break;
      case ThresholdVar::Distance: {
        if (pf.channel.eta) {
          throw ConfigError("--var distance needs fiber parameters, not --eta");
        }
        if (pf.channel.distance) {
          throw ConfigError(
              "--var distance solves for the distance; drop --distance");
        }
        res = distance_threshold(pf.params_with_eta(1.0), pf.channel.fiber());
        user_km = user_distance(res.value);
        break;
      }
      case ThresholdVar::Coupling: {
        if (pf.channel.eta) {
          throw ConfigError("--var eta_c needs fiber parameters, not --eta");
        }
        if (pf.channel.eta_c) {
          throw ConfigError(
              "--var eta_c solves for the coupling; drop --eta-c");
        }
        if (!pf.channel.eta_d) {
          throw ConfigError("--var eta_c requires --eta-d");
        }
        FiberModel m;
        m.eta_d = *pf.channel.eta_d;
        m.eta_c = 1.0;
        m.alpha = pf.channel.alpha;
        m.distance_km = pf.channel.distance.value_or(0.0);
        res = coupling_threshold(pf.params_with_eta(1.0), m);
        break;
      }
      case ThresholdVar::FlipProb:
        break; // rejected above
    }
  } catch (const NoThresholdError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }

  if (res.widened) {
    err << "warning: no sign change in the default bracket; widened to ["
        << res.bracket.lo << ", " << res.bracket.hi << "]\n";
  }
  const std::string fmt = of.format.empty() ? "json" : of.format;
  return emit(of, out, err, [&](std::ostream& os) {
    if (fmt == "json") {
      os << threshold_json(res, user_km).dump(2) << "\n";
    } else {
      os << "variable,value,residual_rate,iterations,widened";
      if (user_km) os << ",user_distance_km";
      os << "\n"
         << threshold_var_name(res.variable) << "," << num17(res.value) << ","
         << num17(res.residual_rate) << "," << res.iterations << ","
         << (res.widened ? 1 : 0);
      if (user_km) os << "," << num17(*user_km);
      os << "\n";
    }
  });
}

struct SweepFlags {
  std::string var;
  double from = 0.0;
  double to = 1.0;
  int steps = 100;
};

int cmd_sweep(const ParamFlags& pf, const SweepFlags& sf,
              const OutputFlags& of, std::ostream& out, std::ostream& err) {
  ThresholdVar var;
  try {
    var = threshold_var_from_name(sf.var);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  if (sf.steps < 1) throw ConfigError("--steps must be at least 1");

  SweepSpec spec;
  spec.var = var;
  spec.from = sf.from;
  spec.to = sf.to;
  spec.steps = sf.steps;

  SweepSeries series;
  series.label = pf.strategy;
  switch (var) {
    case ThresholdVar::Eta:
      if (pf.channel.eta || pf.channel.fiber_given()) {
        throw ConfigError(
            "--var eta sweeps the efficiency; drop --eta and the fiber flags");
      }
      series.params = pf.params_with_eta(1.0);
      break;
    case ThresholdVar::Delta:
    case ThresholdVar::Fidelity:
      series.params = pf.params_with_eta(pf.channel.resolve_eta());
      break;
    case ThresholdVar::Distance:
      if (pf.channel.eta) {
        throw ConfigError("--var distance needs fiber parameters, not --eta");
      }
      if (pf.channel.distance) {
        throw ConfigError(
            "--var distance sweeps the distance; drop --distance");
      }
      series.params = pf.params_with_eta(1.0);
      spec.fiber = pf.channel.fiber();
      break;
    case ThresholdVar::Coupling: {
      if (pf.channel.eta) {
        throw ConfigError("--var eta_c needs fiber parameters, not --eta");
      }
      if (pf.channel.eta_c) {
        throw ConfigError("--var eta_c sweeps the coupling; drop --eta-c");
      }
      if (!pf.channel.eta_d) throw ConfigError("--var eta_c requires --eta-d");
      series.params = pf.params_with_eta(1.0);
      spec.fiber.eta_d = *pf.channel.eta_d;
      spec.fiber.eta_c = 1.0;
      spec.fiber.alpha = pf.channel.alpha;
      spec.fiber.distance_km = pf.channel.distance.value_or(0.0);
      break;
    }
    case ThresholdVar::FlipProb:
      series.params = pf.params_with_eta(pf.channel.resolve_eta());
      if (!series.params.strategy.preprocesses()) {
        throw ConfigError(
            "--var q needs a preprocessing strategy (preprocess or advanced)");
      }
      break;
  }
  spec.series.push_back(series);

  SweepTable table;
  try {
    table = sweep(spec);
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }

  Meta meta;
  meta.emplace_back("command", "sweep");
  meta.emplace_back("var", threshold_var_name(var));
  meta.emplace_back("from", num17(sf.from));
  meta.emplace_back("to", num17(sf.to));
  meta.emplace_back("steps", std::to_string(sf.steps));
  pf.append_meta(meta);

  const std::string fmt = of.format.empty() ? "csv" : of.format;
  return emit(of, out, err, [&](std::ostream& os) {
    if (fmt == "csv") {
      write_meta(os, meta);
      os << threshold_var_name(var) << ",delta,S,eve_bound,key_error,rate\n";
      for (std::size_t i = 0; i < table.x.size(); ++i) {
        const RateBreakdown& rb = table.cells[i][0];
        os << num17(table.x[i]) << "," << num17(rb.delta) << ","
           << num17(rb.chsh) << "," << num17(rb.eve_bound) << ","
           << num17(rb.key_error) << "," << num17(rb.rate) << "\n";
      }
    } else {
      json points = json::array();
      for (std::size_t i = 0; i < table.x.size(); ++i) {
        const RateBreakdown& rb = table.cells[i][0];
        points.push_back(json{{"x", table.x[i]},
                              {"delta", rb.delta},
                              {"S", rb.chsh},
                              {"eve_bound", rb.eve_bound},
                              {"key_error", rb.key_error},
                              {"rate", rb.rate},
                              {"nonlocal", rb.nonlocal}});
      }
      json j;
      j["var"] = threshold_var_name(var);
      for (const auto& kv : meta) j["config"][kv.first] = kv.second;
      j["points"] = points;
      os << j.dump(2) << "\n";
    }
  });
}

struct SimulateFlags {
  std::uint64_t rounds = 0;
  std::uint64_t seed = 1;
  int workers = 1;
  double k_sigma = 4.0;
  double key_sample_fraction = 1.0;
  bool validate = false;
};

int cmd_simulate(const ParamFlags& pf, const SimulateFlags& sf,
                 const OutputFlags& of, std::ostream& out, std::ostream& err) {
  if (sf.rounds < 1) throw ConfigError("--rounds must be at least 1");
  if (sf.workers < 1) throw ConfigError("--workers must be at least 1");
  if (!of.format.empty() && of.format != "json") {
    throw ConfigError("simulate reports are JSON only");
  }
  const ProtocolParams params = pf.params_with_eta(pf.channel.resolve_eta());
  SimulateOptions options;
  options.workers = sf.workers;
  options.key_sample_fraction = sf.key_sample_fraction;

  try {
    if (sf.validate) {
      const ValidationReport vr = validate_against_analytic(
          params, sf.rounds, sf.seed, sf.k_sigma, options);
      json j;
      j["report"] = report_json(vr.sim);
      j["validation"] = json{{"k_sigma", vr.k_sigma},
                             {"qber", check_json(vr.qber_check)},
                             {"chsh", check_json(vr.chsh_check)},
                             {"pass", vr.pass}};
      if (!vr.pass) j["validation"]["detail"] = vr.detail;
      const int rc = emit(of, out, err,
                          [&](std::ostream& os) { os << j.dump(2) << "\n"; });
      if (rc != 0) return rc;
      if (!vr.pass) {
        err << "validation failure: " << vr.detail << "\n";
        return 5;
      }
      return 0;
    }
    const SimulationReport report =
        simulate(params, sf.rounds, sf.seed, options);
    return emit(of, out, err, [&](std::ostream& os) {
      os << report_json(report).dump(2) << "\n";
    });
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

// --- figure reproduction -----------------------------------------------------

struct FigureDef {
  SweepSpec spec;
  Meta meta;
  std::string xname;
};

SweepSeries make_series(std::string label, StrategyKind kind, double q,
                        double fidelity, double source_fidelity,
                        SourceNoiseMode mode) {
  SweepSeries s;
  s.label = std::move(label);
  s.params.strategy = {kind, q};
  s.params.fidelity = fidelity;
  s.params.source_fidelity = source_fidelity;
  s.params.eta = 1.0;
  s.mode = mode;
  return s;
}

FigureDef figure_def(int figure) {
  const auto composed = SourceNoiseMode::ComposedEverywhere;
  FigureDef def;
  def.meta.emplace_back("figure", std::to_string(figure));
  switch (figure) {
    case 2: {
      def.spec.var = ThresholdVar::Eta;
      def.spec.from = 0.94;
      def.spec.to = 1.0;
      def.spec.steps = 120;
      for (double f : {1.0, 0.99, 0.97, 0.95}) {
        def.spec.series.push_back(make_series("r(F=" + num17(f) + ")",
                                              StrategyKind::None, 0.0, f, 1.0,
                                              composed));
      }
      def.xname = "eta";
      def.meta.emplace_back("strategy", "none");
      break;
    }
    case 3: {
      def.spec.var = ThresholdVar::Delta;
      def.spec.from = 0.0;
      def.spec.to = 0.10;
      def.spec.steps = 200;
      for (double q : {0.0, 0.05, 0.2, 0.4}) {
        def.spec.series.push_back(make_series("r_q(q=" + num17(q) + ")",
                                              StrategyKind::Preprocess, q, 1.0,
                                              1.0, composed));
      }
      def.xname = "delta";
      def.meta.emplace_back("strategy", "preprocess");
      def.meta.emplace_back("eta", "1");
      def.meta.emplace_back("fidelity", "linked: F = (2-2*delta-eta^3)/eta^3");
      break;
    }
    case 4: {
      def.spec.var = ThresholdVar::Eta;
      def.spec.from = 0.93;
      def.spec.to = 1.0;
      def.spec.steps = 140;
      def.spec.series.push_back(
          make_series("r", StrategyKind::None, 0.0, 1.0, 1.0, composed));
      def.spec.series.push_back(make_series("r_p", StrategyKind::Postselect,
                                            0.0, 1.0, 1.0, composed));
      def.xname = "eta";
      def.meta.emplace_back("fidelity", "1");
      break;
    }
    case 5: {
      def.spec.var = ThresholdVar::Eta;
      def.spec.from = 0.93;
      def.spec.to = 1.0;
      def.spec.steps = 140;
      for (double q : {0.0, 0.05, 0.2, 0.4}) {
        def.spec.series.push_back(make_series("r_qp(q=" + num17(q) + ")",
                                              StrategyKind::Advanced, q, 1.0,
                                              1.0, composed));
      }
      def.xname = "eta";
      def.meta.emplace_back("strategy", "advanced");
      def.meta.emplace_back("fidelity", "1");
      break;
    }
    case 6: {
      def.spec.var = ThresholdVar::Distance;
      def.spec.from = 0.0;
      def.spec.to = 0.7;
      def.spec.steps = 140;
      def.spec.fiber = {0.98, 0.99, 0.2, 0.0};
      def.spec.series.push_back(
          make_series("r", StrategyKind::None, 0.0, 1.0, 1.0, composed));
      def.spec.series.push_back(make_series(
          "r_q(q=0.2)", StrategyKind::Preprocess, 0.2, 1.0, 1.0, composed));
      def.spec.series.push_back(make_series("r_p", StrategyKind::Postselect,
                                            0.0, 1.0, 1.0, composed));
      def.spec.series.push_back(make_series(
          "r_qp(q=0.2)", StrategyKind::Advanced, 0.2, 1.0, 1.0, composed));
      def.xname = "d_km";
      def.meta.emplace_back("eta_d", "0.98");
      def.meta.emplace_back("eta_c", "0.99");
      def.meta.emplace_back("alpha", "0.2");
      def.meta.emplace_back("fidelity", "1");
      break;
    }
    case 8: {
      def.spec.var = ThresholdVar::Distance;
      def.spec.from = 0.0;
      def.spec.to = 0.5;
      def.spec.steps = 200;
      def.spec.fiber = {0.98, 0.99, 0.2, 0.0};
      for (double f : {1.0, 0.99, 0.98}) {
        def.spec.series.push_back(make_series("r_qp(F=" + num17(f) + ")",
                                              StrategyKind::Advanced, 0.4, f,
                                              0.96, SourceNoiseMode::QberOnly));
      }
      def.xname = "d_km";
      def.meta.emplace_back("strategy", "advanced");
      def.meta.emplace_back("q", "0.4");
      def.meta.emplace_back("source_fidelity", "0.96");
      def.meta.emplace_back("eta_d", "0.98");
      def.meta.emplace_back("eta_c", "0.99");
      def.meta.emplace_back("alpha", "0.2");
      def.meta.emplace_back("composition", "qber-only");
      def.meta.emplace_back(
          "note",
          "source imperfection degrades the QBER only; the Bell value keeps "
          "the raw fidelity");
      break;
    }
    default:
      throw ConfigError("unknown figure id " + std::to_string(figure) +
                        " (expected 2, 3, 4, 5, 6, or 8)");
  }
  return def;
}

int cmd_reproduce(int figure, const OutputFlags& of, std::ostream& out,
                  std::ostream& err) {
  if (!of.format.empty() && of.format != "csv") {
    throw ConfigError("reproduce emits CSV only");
  }
  const FigureDef def = figure_def(figure);

  SweepTable table;
  try {
    table = sweep(def.spec);
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }

  std::string path = of.output;
  if (path.empty()) {
    const char* dir = std::getenv("DIQSS_OUT_DIR");
    path = (dir && *dir ? std::string(dir) : std::string(".")) + "/fig" +
           std::to_string(figure) + ".csv";
  }
  std::ofstream file(path);
  if (!file) {
    err << "error: cannot open output file '" << path << "'\n";
    return 2;
  }
  write_meta(file, def.meta);
  file << def.xname;
  for (const auto& label : table.labels) file << "," << label;
  file << "\n";
  for (std::size_t i = 0; i < table.x.size(); ++i) {
    file << num17(table.x[i]);
    for (std::size_t c = 0; c < table.labels.size(); ++c) {
      file << "," << num17(table.cells[i][c].rate);
    }
    file << "\n";
  }
  out << "wrote " << path << "\n";
  return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Three-party key distribution over a lossy noisy channel: closed-form "
      "rates, thresholds, sweeps, and a seeded protocol simulator"};
  app.require_subcommand(1);

  const char* config_help = "key=value defaults; flags override the file";

  ParamFlags rate_params;
  OutputFlags rate_output;
  std::string rate_config;
  CLI::App* rate_sub = app.add_subcommand("rate", "evaluate the key rate");
  rate_sub->add_option("--config", rate_config, config_help);
  add_param_flags(rate_sub, rate_params);
  add_output_flags(rate_sub, rate_output);

  ParamFlags thr_params;
  OutputFlags thr_output;
  std::string thr_var;
  std::string thr_config;
  CLI::App* thr_sub =
      app.add_subcommand("threshold", "solve a rate = 0 threshold");
  thr_sub->add_option("--config", thr_config, config_help);
  add_param_flags(thr_sub, thr_params);
  add_output_flags(thr_sub, thr_output);
  thr_sub->add_option("--var", thr_var, "eta|delta|fidelity|distance|eta_c")
      ->required();

  ParamFlags sweep_params;
  OutputFlags sweep_output;
  SweepFlags sweep_flags;
  std::string sweep_config;
  CLI::App* sweep_sub =
      app.add_subcommand("sweep", "evaluate the rate on a parameter grid");
  sweep_sub->add_option("--config", sweep_config, config_help);
  add_param_flags(sweep_sub, sweep_params);
  add_output_flags(sweep_sub, sweep_output);
  sweep_sub->add_option("--var", sweep_flags.var,
                        "eta|delta|fidelity|distance|eta_c|q")
      ->required();
  sweep_sub->add_option("--from", sweep_flags.from, "grid start")->required();
  sweep_sub->add_option("--to", sweep_flags.to, "grid end")->required();
  sweep_sub->add_option("--steps", sweep_flags.steps, "grid intervals")
      ->required();

  ParamFlags sim_params;
  OutputFlags sim_output;
  SimulateFlags sim_flags;
  std::string sim_config;
  CLI::App* sim_sub =
      app.add_subcommand("simulate", "run the seeded protocol simulation");
  sim_sub->add_option("--config", sim_config, config_help);
  add_param_flags(sim_sub, sim_params);
  add_output_flags(sim_sub, sim_output);
  sim_sub->add_option("--rounds", sim_flags.rounds, "number of rounds")
      ->required();
  sim_sub->add_option("--seed", sim_flags.seed, "random seed")
      ->capture_default_str();
  sim_sub->add_option("--workers", sim_flags.workers, "worker threads")
      ->capture_default_str();
  sim_sub->add_option("--k-sigma", sim_flags.k_sigma,
                      "validation band half-width in standard errors")
      ->capture_default_str();
  sim_sub->add_option("--key-sample-fraction", sim_flags.key_sample_fraction,
                      "fraction of key rounds sampled for QBER")
      ->capture_default_str();
  sim_sub->add_flag("--validate", sim_flags.validate,
                    "compare against the closed forms; exit 5 on disagreement");

  OutputFlags repro_output;
  int repro_figure = 0;
  CLI::App* repro_sub = app.add_subcommand(
      "reproduce", "regenerate a published rate-curve data set");
  repro_sub->add_option("figure", repro_figure, "figure id: 2|3|4|5|6|8")
      ->required();
  add_output_flags(repro_sub, repro_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (rate_sub->parsed()) {
      apply_config_defaults(rate_sub, rate_config);
      return cmd_rate(rate_params, rate_output, out, err);
    }
    if (thr_sub->parsed()) {
      apply_config_defaults(thr_sub, thr_config);
      return cmd_threshold(thr_params, thr_var, thr_output, out, err);
    }
    if (sweep_sub->parsed()) {
      apply_config_defaults(sweep_sub, sweep_config);
      return cmd_sweep(sweep_params, sweep_flags, sweep_output, out, err);
    }
    if (sim_sub->parsed()) {
      apply_config_defaults(sim_sub, sim_config);
      return cmd_simulate(sim_params, sim_flags, sim_output, out, err);
    }
    if (repro_sub->parsed()) {
      return cmd_reproduce(repro_figure, repro_output, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NoThresholdError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(argc, argv, std::cout, std::cerr);
}

} // namespace diqss
