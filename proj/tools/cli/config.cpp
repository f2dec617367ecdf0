#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace gridquant::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double get_real(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& where) {
  const double v = get_real(j, where);
  if (!(v > 0.0)) fail(where, "must be positive");
  return v;
}

std::uint64_t get_uint(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) fail(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::size_t get_count(const json& j, const std::string& where) {
  const auto v = get_uint(j, where);
  if (v == 0) fail(where, "must be at least 1");
  return static_cast<std::size_t>(v);
}

double probability(const json& j, const std::string& where) {
  const double v = get_real(j, where);
  if (!(v >= 0.0 && v < 1.0)) fail(where, "must lie in [0, 1)");
  return v;
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::filesystem::path existing_file(const json& j, const std::string& where,
                                    const std::filesystem::path& base) {
  std::filesystem::path p = get_string(j, where);
  if (p.is_relative() && !base.empty()) p = base / p;
  if (!std::filesystem::is_regular_file(p)) fail(where, "no such file '" + p.string() + "'");
  return p;
}

unsigned bit_width(const json& j, const std::string& where) {
  const auto v = get_uint(j, where);
  if (v < 1 || v > 64) fail(where, "bit width must lie in 1..64");
  return static_cast<unsigned>(v);
}

ProblemConfig parse_problem(const json& j, const std::filesystem::path& base) {
  const std::string w = "problem";
  if (!j.is_object() || !j.contains("type")) fail(w, "needs a 'type'");
  const std::string type = get_string(j.at("type"), join(w, "type"));
  ProblemConfig p;
  if (type == "quadratic") {
    only_keys(j, w, {"type", "nodes", "dim", "mu", "l", "linear_scale", "seed"});
    p.kind = ProblemConfig::Kind::Quadratic;
    if (j.contains("mu")) p.mu = positive(j["mu"], join(w, "mu"));
    if (j.contains("l")) p.l = positive(j["l"], join(w, "l"));
    if (p.l < p.mu) fail(w, "l must be at least mu");
    if (j.contains("linear_scale")) p.linear_scale = get_real(j["linear_scale"], join(w, "linear_scale"));
  } else if (type == "logistic") {
    only_keys(j, w, {"type", "nodes", "dim", "samples", "rho", "seed"});
    p.kind = ProblemConfig::Kind::Logistic;
    p.nodes = 20;
    p.dim = 20;
    if (j.contains("samples")) p.samples = get_count(j["samples"], join(w, "samples"));
    if (j.contains("rho")) p.rho = positive(j["rho"], join(w, "rho"));
  } else if (type == "csv") {
    only_keys(j, w, {"type", "nodes", "path", "rho"});
    p.kind = ProblemConfig::Kind::Csv;
    if (!j.contains("path")) fail(w, "csv problem needs a 'path'");
    p.path = existing_file(j["path"], join(w, "path"), base);
    if (j.contains("rho")) p.rho = positive(j["rho"], join(w, "rho"));
  } else {
    fail(join(w, "type"), "unknown problem type '" + type + "'");
  }
  if (j.contains("nodes")) p.nodes = get_count(j["nodes"], join(w, "nodes"));
  if (j.contains("dim")) p.dim = get_count(j["dim"], join(w, "dim"));
  if (j.contains("seed")) p.seed = get_uint(j["seed"], join(w, "seed"));
  if (p.kind == ProblemConfig::Kind::Logistic && p.samples < p.nodes) {
    fail(w, "need at least one sample per node");
  }
  return p;
}

TopologyConfig parse_topology(const json& j, const std::filesystem::path& base) {
  const std::string w = "topology";
  TopologyConfig t;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "master") t.kind = TopologyConfig::Kind::Master;
    else if (s == "path") t.kind = TopologyConfig::Kind::Path;
    else if (s == "complete") t.kind = TopologyConfig::Kind::Complete;
    else fail(w, "unknown topology '" + s + "'");
    return t;
  }
  if (!j.is_object() || !j.contains("type")) fail(w, "needs a 'type'");
  const std::string type = get_string(j.at("type"), join(w, "type"));
  if (type == "edge_list") {
    only_keys(j, w, {"type", "path"});
    t.kind = TopologyConfig::Kind::EdgeList;
    if (!j.contains("path")) fail(w, "edge_list needs a 'path'");
    t.path = existing_file(j["path"], join(w, "path"), base);
  } else if (type == "geometric") {
    only_keys(j, w, {"type", "radius", "seed"});
    t.kind = TopologyConfig::Kind::Geometric;
    if (j.contains("radius")) t.radius = positive(j["radius"], join(w, "radius"));
    if (j.contains("seed")) t.seed = get_uint(j["seed"], join(w, "seed"));
  } else if (type == "master" || type == "path" || type == "complete") {
    only_keys(j, w, {"type"});
    return parse_topology(json(type), base);
  } else {
    fail(join(w, "type"), "unknown topology type '" + type + "'");
  }
  return t;
}

BitsConfig parse_bits(const json& j) {
  BitsConfig b;
  if (j.is_string()) {
    if (j.get<std::string>() != "auto") fail("bits", "expected an integer, \"auto\" or {min, max}");
    b.kind = BitsConfig::Kind::Auto;
    return b;
  }
  if (j.is_object()) {
    only_keys(j, "bits", {"min", "max"});
    if (!j.contains("min") || !j.contains("max")) fail("bits", "range needs 'min' and 'max'");
    b.kind = BitsConfig::Kind::Range;
    b.lo = bit_width(j["min"], "bits.min");
    b.hi = bit_width(j["max"], "bits.max");
    if (b.lo > b.hi) fail("bits", "empty range");
    return b;
  }
  b.kind = BitsConfig::Kind::Fixed;
  b.value = bit_width(j, "bits");
  return b;
}

RateModel parse_rate(const json& j) {
  const std::string w = "rate";
  if (!j.is_object() || !j.contains("model")) fail(w, "needs a 'model'");
  const std::string model = get_string(j.at("model"), join(w, "model"));
  if (model == "constant") {
    only_keys(j, w, {"model", "capacity"});
    if (!j.contains("capacity")) fail(w, "constant rate needs 'capacity'");
    return ConstantRate{positive(j["capacity"], join(w, "capacity"))};
  }
  if (model == "finite_blocklength") {
    only_keys(j, w, {"model", "capacity", "dispersion"});
    if (!j.contains("capacity") || !j.contains("dispersion")) {
      fail(w, "finite_blocklength needs 'capacity' and 'dispersion'");
    }
    return FiniteBlocklengthRate{positive(j["capacity"], join(w, "capacity")),
                                 positive(j["dispersion"], join(w, "dispersion"))};
  }
  if (model == "bell") {
    only_keys(j, w, {"model", "max_rate", "peak"});
    BellShapeRate r;
    if (j.contains("max_rate")) r.max_rate = positive(j["max_rate"], join(w, "max_rate"));
    if (j.contains("peak")) r.peak = positive(j["peak"], join(w, "peak"));
    return r;
  }
  fail(join(w, "model"), "unknown rate model '" + model + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"problem", "analytic", "topology", "algorithm", "bits", "theta", "overhead", "rate",
             "loss", "loss_grid", "links", "policy", "delta", "eps", "horizon", "seed", "output",
             "bound", "gain", "alpha", "replicas", "empirical"});

  ExperimentConfig c;
  if (j.contains("problem")) c.problem = parse_problem(j["problem"], base_dir);
  if (j.contains("analytic")) {
    const auto& a = j["analytic"];
    only_keys(a, "analytic", {"gain", "sigma", "bound", "dim"});
    AnalyticConfig an;
    if (a.contains("gain")) an.gain = get_real(a["gain"], "analytic.gain");
    if (an.gain < 0.0) fail("analytic.gain", "must be non-negative");
    if (a.contains("sigma")) an.sigma = get_real(a["sigma"], "analytic.sigma");
    if (!(an.sigma > 0.0 && an.sigma < 1.0)) fail("analytic.sigma", "must lie in (0, 1)");
    if (a.contains("bound")) an.bound = positive(a["bound"], "analytic.bound");
    if (a.contains("dim")) an.dim = get_count(a["dim"], "analytic.dim");
    c.analytic = an;
  }
  if (c.problem && c.analytic) fail("config", "'problem' and 'analytic' are mutually exclusive");
  if (!c.problem && !c.analytic) fail("config", "needs either 'problem' or 'analytic'");

  if (j.contains("topology")) c.topology = parse_topology(j["topology"], base_dir);
  if (j.contains("algorithm")) {
    const std::string a = get_string(j["algorithm"], "algorithm");
    if (a == "gd") c.algorithm = AlgorithmKind::Gd;
    else if (a == "pgd") c.algorithm = AlgorithmKind::Pgd;
    else if (a == "dual") c.algorithm = AlgorithmKind::Dual;
    else fail("algorithm", "unknown algorithm '" + a + "'");
  }
  const bool graph_topology = c.topology.kind != TopologyConfig::Kind::Master;
  if (c.algorithm == AlgorithmKind::Dual && !graph_topology) {
    fail("topology", "dual decomposition needs a graph topology");
  }
  if (c.algorithm != AlgorithmKind::Dual && graph_topology) {
    fail("topology", "gradient methods use the master topology");
  }

  if (j.contains("bits")) c.bits = parse_bits(j["bits"]);
  if (j.contains("theta")) {
    c.theta = get_real(j["theta"], "theta");
    if (c.theta < 0.0) fail("theta", "must be non-negative");
  }
  if (j.contains("overhead")) {
    const auto& o = j["overhead"];
    only_keys(o, "overhead", {"a", "c"});
    OverheadConfig oc;
    if (o.contains("a")) oc.a = get_real(o["a"], "overhead.a");
    if (o.contains("c")) oc.c = get_real(o["c"], "overhead.c");
    c.overhead = oc;
  }
  if (j.contains("rate")) c.rate = parse_rate(j["rate"]);
  if (j.contains("loss")) c.loss = probability(j["loss"], "loss");
  if (j.contains("loss_grid")) {
    if (!j["loss_grid"].is_array()) fail("loss_grid", "expected an array");
    for (std::size_t i = 0; i < j["loss_grid"].size(); ++i) {
      c.loss_grid.push_back(probability(j["loss_grid"][i], "loss_grid[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("links")) c.links = get_count(j["links"], "links");
  if (j.contains("policy")) {
    const std::string p = get_string(j["policy"], "policy");
    if (p == "until_success") c.policy = PolicyKind::UntilSuccess;
    else if (p == "fixed_rounds") c.policy = PolicyKind::FixedRounds;
    else fail("policy", "unknown policy '" + p + "'");
  }
  if (j.contains("delta")) c.delta = probability(j["delta"], "delta");
  if (j.contains("eps")) c.eps = positive(j["eps"], "eps");
  if (j.contains("horizon")) c.horizon = get_count(j["horizon"], "horizon");
  if (j.contains("seed")) c.seed = get_uint(j["seed"], "seed");
  if (j.contains("output")) c.output = get_string(j["output"], "output");
  if (j.contains("bound")) c.bound = positive(j["bound"], "bound");
  if (j.contains("gain")) c.gain = positive(j["gain"], "gain");
  if (j.contains("alpha")) {
    c.alpha = get_real(j["alpha"], "alpha");
    if (!(*c.alpha > 0.0 && *c.alpha < 1.0)) fail("alpha", "must lie in (0, 1)");
  }
  if (j.contains("replicas")) c.replicas = static_cast<std::size_t>(get_uint(j["replicas"], "replicas"));
  if (j.contains("empirical")) {
    if (!j["empirical"].is_boolean()) fail("empirical", "expected true or false");
    c.empirical = j["empirical"].get<bool>();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace gridquant::cli
