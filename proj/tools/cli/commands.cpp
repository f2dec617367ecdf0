#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include <gridquant/algorithms.hpp>
#include <gridquant/channel.hpp>
#include <gridquant/complexity.hpp>
#include <gridquant/csv.hpp>
#include <gridquant/error.hpp>
#include <gridquant/graph.hpp>
#include <gridquant/lossy.hpp>
#include <gridquant/parallel.hpp>
#include <gridquant/problems.hpp>
#include <gridquant/runner.hpp>

namespace gridquant::cli {

namespace {

// Everything a command needs, derived once from the config.
struct Setup {
  std::shared_ptr<const Problem> problem;
  std::shared_ptr<const AlgorithmModel> model;
  std::size_t dim = 1;
  std::size_t nodes = 1;
  std::size_t links = 1;
  double gain = 1.0;
  double sigma = 0.0;
  double bound = 1.0;
  std::optional<double> kappa;
  BitRule rule = BitRule::Unconstrained;
};

std::shared_ptr<const Problem> make_problem(const ProblemConfig& p) {
  switch (p.kind) {
    case ProblemConfig::Kind::Quadratic:
      return std::make_shared<QuadraticProblem>(
          random_quadratic(p.nodes, p.dim, p.mu, p.l, p.seed, p.linear_scale));
    case ProblemConfig::Kind::Logistic:
      return std::make_shared<LogisticProblem>(synthetic_dataset(p.samples, p.dim, p.seed), p.rho,
                                               p.nodes);
    case ProblemConfig::Kind::Csv:
      return std::make_shared<LogisticProblem>(load_csv(p.path), p.rho, p.nodes);
  }
  throw ConfigError("problem: unsupported type");
}

GraphSpec make_graph(const TopologyConfig& t, std::size_t nodes) {
  switch (t.kind) {
    case TopologyConfig::Kind::Path:
      return GraphSpec::path(nodes);
    case TopologyConfig::Kind::Complete:
      return GraphSpec::complete(nodes);
    case TopologyConfig::Kind::Geometric:
      return random_geometric_graph(nodes, t.radius, t.seed);
    case TopologyConfig::Kind::EdgeList: {
      GraphSpec g = load_edge_list(t.path);
      if (g.node_count() != nodes) {
        throw ConfigError("topology: edge list has " + std::to_string(g.node_count()) +
                          " nodes, problem has " + std::to_string(nodes));
      }
      return g;
    }
    case TopologyConfig::Kind::Master:
      break;
  }
  throw ConfigError("topology: master has no graph");
}

Setup build(const ExperimentConfig& cfg) {
  Setup s;
  if (cfg.analytic) {
    s.gain = cfg.gain ? *cfg.gain : cfg.analytic->gain;
    s.sigma = cfg.analytic->sigma;
    s.bound = cfg.bound ? *cfg.bound : cfg.analytic->bound;
    s.dim = cfg.analytic->dim;
    s.links = cfg.links ? *cfg.links : 1;
    return s;
  }

  s.problem = make_problem(*cfg.problem);
  s.dim = s.problem->dim();
  s.nodes = s.problem->node_count();
  const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.dim));

  switch (cfg.algorithm) {
    case AlgorithmKind::Gd: {
      auto m = std::make_shared<DecentralizedGD>(s.problem);
      s.kappa = m->kappa();
      if (cfg.bound) {
        s.bound = *cfg.bound;
      } else {
        try {
          s.bound = bound_D(*s.problem, z0);
        } catch (const Error& e) {
          if (e.code() != Errc::NegativeObjective) throw;
          s.bound = optimality_gap_bound(*s.problem, z0);
        }
        if (!(s.bound > 0.0)) throw ConfigError("bound: starting point is optimal, set 'bound'");
      }
      s.model = m;
      s.links = s.nodes;
      break;
    }
    case AlgorithmKind::Pgd: {
      auto m = std::make_shared<ProjectedDecentralizedGD>(s.problem);
      s.kappa = m->kappa();
      s.rule = BitRule::Box;
      s.bound = cfg.bound ? *cfg.bound : m->box_diameter();
      s.model = m;
      s.links = s.nodes;
      break;
    }
    case AlgorithmKind::Dual: {
      const GraphSpec g = make_graph(cfg.topology, s.nodes);
      auto m = std::make_shared<DualDecomposition>(s.problem, g);
      s.kappa = m->kappa_w();
      if (cfg.bound) {
        s.bound = *cfg.bound;
      } else {
        s.bound = m->norm(m->initial_state() - *m->fixed_point());
        if (!(s.bound > 0.0)) throw ConfigError("bound: starting point is optimal, set 'bound'");
      }
      s.model = m;
      s.links = g.directed_link_count();
      break;
    }
  }
  if (cfg.links) s.links = *cfg.links;
  const ModelConstants mc = s.model->constants();
  s.sigma = mc.sigma;
  s.gain = cfg.gain ? *cfg.gain : contraction_gain(mc.lip_a, mc.lip_c, mc.sigma);
  return s;
}

double alpha_for(const ExperimentConfig& cfg, const Setup& s, unsigned b) {
  return cfg.alpha ? *cfg.alpha : alpha(b, s.gain, s.sigma);
}

double theta_for(const ExperimentConfig& cfg, const Setup& s, unsigned b) {
  if (!cfg.overhead) return cfg.theta;
  return affine_overhead(cfg.overhead->a, cfg.overhead->c,
                         static_cast<double>(b) * static_cast<double>(s.dim));
}

double packet_bits(const ExperimentConfig& cfg, const Setup& s, unsigned b) {
  return static_cast<double>(b) * static_cast<double>(s.dim) + theta_for(cfg, s, b);
}

[[noreturn]] void divergent(const Setup& s, unsigned b, double a) {
  std::ostringstream msg;
  msg << "b = " << b << " gives alpha = " << format_real(a) << " >= 1; min_bits is "
      << min_bits(s.gain, s.sigma);
  raise(Errc::Divergent, msg.str());
}

unsigned single_bits(const ExperimentConfig& cfg, const Setup& s) {
  switch (cfg.bits.kind) {
    case BitsConfig::Kind::Fixed:
      return cfg.bits.value;
    case BitsConfig::Kind::Auto:
      if (s.kappa) return std::min(64u, recommended_bits(*s.kappa, s.dim, s.rule));
      return optimal_bits(s.gain, s.sigma, s.bound, cfg.eps, 64);
    case BitsConfig::Kind::Range:
      break;
  }
  throw ConfigError("bits: this command needs a single bit width, not a range");
}

std::pair<unsigned, unsigned> bit_range(const ExperimentConfig& cfg, const Setup& s) {
  if (cfg.bits.kind == BitsConfig::Kind::Range) return {cfg.bits.lo, cfg.bits.hi};
  const unsigned b = single_bits(cfg, s);
  return {b, b};
}

// Bit widths of the range with alpha < 1, or a Divergent error naming min_bits.
std::vector<unsigned> convergent_bits(const ExperimentConfig& cfg, const Setup& s) {
  const auto [lo, hi] = bit_range(cfg, s);
  std::vector<unsigned> out;
  for (unsigned b = lo; b <= hi; ++b) {
    if (alpha_for(cfg, s, b) < 1.0) out.push_back(b);
  }
  if (out.empty()) divergent(s, hi, alpha_for(cfg, s, hi));
  return out;
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output);
  const auto path = cfg.output / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output: cannot write '" + path.string() + "'");
  return out;
}

std::optional<double> try_delay(const RateModel& model, double n, double p) {
  try {
    return delay(model, n, p);
  } catch (const Error& e) {
    if (e.code() == Errc::NonPositiveRate) return std::nullopt;
    throw;
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer, so neighbouring rows get unrelated replica seeds
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::ReachedEps: return "reached_eps";
    case RunStatus::GridOverflow: return "grid_overflow";
    case RunStatus::DeliveryFailed: return "delivery_failed";
    case RunStatus::PrecisionFloor: return "precision_floor";
  }
  return "unknown";
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  if (!cfg.problem) throw ConfigError("run: needs a 'problem'");
  const Setup s = build(cfg);
  const unsigned b = single_bits(cfg, s);
  const double a_theory = alpha(b, s.gain, s.sigma);
  if (!cfg.alpha && !(a_theory < 1.0)) divergent(s, b, a_theory);
  const double a = alpha_for(cfg, s, b);

  QuantizedRunConfig rc;
  rc.bits = b;
  rc.horizon = cfg.horizon;
  rc.bound_d = s.bound;
  rc.gain = s.gain;
  rc.alpha_override = cfg.alpha;
  rc.seed = cfg.seed;

  const double k_eps = iterations_to_eps_alpha(a, s.bound, cfg.eps);
  std::optional<double> t_eps;
  RunTrace trace;
  if (cfg.rate) {
    PacketSpec packet;
    packet.bits = b;
    packet.dim = s.dim;
    packet.theta = theta_for(cfg, s, b);
    packet.loss = cfg.loss;
    packet.link_count = s.links;
    RetransmissionPolicy policy = UntilSuccess{};
    if (cfg.policy == PolicyKind::FixedRounds && cfg.loss > 0.0) {
      policy = FixedRounds{fixed_rounds_count(s.links, k_eps, cfg.loss, cfg.delta)};
    }
    t_eps = k_eps * delay(*cfg.rate, packet.packet_bits(), cfg.loss);
    trace = simulate_lossy_run(*s.model, rc, packet, policy, *cfg.rate, cfg.seed);
  } else {
    trace = run_quantized(*s.model, rc);
  }

  {
    auto out = open_output(cfg, "trace.csv");
    write_trace_csv(out, trace);
  }

  const bool has_err = !trace.records.empty() && trace.records.front().err.has_value();
  const char* envelope = "unknown";
  if (has_err) envelope = envelope_violation(trace, s.bound) ? "violated" : "held";

  std::ostringstream sum;
  sum << "bits=" << b << '\n'
      << "gain=" << format_real(s.gain) << '\n'
      << "sigma=" << format_real(s.sigma) << '\n'
      << "alpha=" << format_real(a) << '\n'
      << "min_bits=" << min_bits(s.gain, s.sigma) << '\n'
      << "bound=" << format_real(s.bound) << '\n'
      << "k_eps=" << format_real(k_eps) << '\n'
      << "B_eps=" << format_real(static_cast<double>(b) * k_eps) << '\n'
      << "T_eps=" << format_real(t_eps) << '\n'
      << "guaranteed=" << (trace.guaranteed ? "yes" : "no") << '\n'
      << "status=" << status_name(trace.status) << '\n'
      << "iterations=" << trace.iterations() << '\n'
      << "final_err=" << format_real(trace.records.back().err) << '\n'
      << "envelope=" << envelope << '\n';
  if (trace.overflow) {
    sum << "overflow_iteration=" << trace.overflow->iteration << '\n'
        << "overflow_node=" << trace.overflow->node << '\n';
  }
  {
    auto out = open_output(cfg, "summary.txt");
    out << sum.str();
  }
  log << sum.str();
  return trace.status == RunStatus::GridOverflow ? kExitGridOverflow : kExitOk;
}

int cmd_sweep_bits(const ExperimentConfig& cfg, std::ostream& log) {
  const Setup s = build(cfg);
  const std::vector<unsigned> bits = convergent_bits(cfg, s);

  std::vector<std::optional<double>> empirical(bits.size());
  if (cfg.empirical && s.model && s.model->fixed_point()) {
    parallel_for(bits.size(), [&](std::size_t i) {
      QuantizedRunConfig rc;
      rc.bits = bits[i];
      rc.horizon = cfg.horizon;
      rc.bound_d = s.bound;
      rc.gain = s.gain;
      rc.alpha_override = cfg.alpha;
      rc.stop_at_eps = cfg.eps;
      rc.seed = cfg.seed;
      const RunTrace t = run_quantized(*s.model, rc);
      if (t.status == RunStatus::ReachedEps) {
        empirical[i] = static_cast<double>(bits[i]) * static_cast<double>(t.iterations());
      }
    });
  }

  std::vector<double> k(bits.size()), total(bits.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    k[i] = iterations_to_eps_alpha(alpha_for(cfg, s, bits[i]), s.bound, cfg.eps);
    total[i] = static_cast<double>(bits[i]) * k[i];
    if (total[i] < total[best]) best = i;
  }

  auto out = open_output(cfg, "sweep_bits.csv");
  out << "b,k_eps,B_eps,T_eps,empirical_bits,argmin\n";
  for (std::size_t i = 0; i < bits.size(); ++i) {
    std::optional<double> t;
    if (cfg.rate) {
      if (auto dl = try_delay(*cfg.rate, packet_bits(cfg, s, bits[i]), cfg.loss)) t = k[i] * *dl;
    }
    out << bits[i] << ',' << format_real(k[i]) << ',' << format_real(total[i]) << ','
        << format_real(t) << ',' << format_real(empirical[i]) << ',' << (i == best ? 1 : 0)
        << '\n';
  }
  log << "argmin b=" << bits[best] << " B_eps=" << format_real(total[best]) << '\n';
  return kExitOk;
}

int cmd_ttc(const ExperimentConfig& cfg, std::ostream& log) {
  if (!cfg.rate) throw ConfigError("ttc: needs a 'rate'");
  const Setup s = build(cfg);
  const std::vector<unsigned> bits = convergent_bits(cfg, s);
  const std::vector<double> grid = cfg.loss_grid.empty() ? std::vector<double>{cfg.loss}
                                                         : cfg.loss_grid;
  const std::string name = rate_model_name(*cfg.rate);

  auto out = open_output(cfg, "ttc.csv");
  out << "b,theta,p,rate_model,k_eps,T_eps,LB,UB,rho\n";
  std::optional<std::pair<unsigned, double>> best;
  for (const unsigned b : bits) {
    const double a = alpha_for(cfg, s, b);
    const double k = iterations_to_eps_alpha(a, s.bound, cfg.eps);
    const double theta = theta_for(cfg, s, b);
    const double n = packet_bits(cfg, s, b);
    for (const double p : grid) {
      std::optional<double> t, lb, ub, rho;
      if (n >= 1.0) {
        if (auto dl = try_delay(*cfg.rate, n, p)) {
          t = k * *dl;
          rho = std::pow(a, 1.0 / *dl);
          if (p > 0.0) {
            const Interval f = retransmission_factors(s.links, p);
            lb = *t * f.lower;
            ub = *t * f.upper;
          }
          if (p == grid.front() && (!best || *t < best->second)) best = {b, *t};
        }
      }
      out << b << ',' << format_real(theta) << ',' << format_real(p) << ',' << name << ','
          << format_real(k) << ',' << format_real(t) << ',' << format_real(lb) << ','
          << format_real(ub) << ',' << format_real(rho) << '\n';
    }
  }
  if (best) {
    log << "fastest b=" << best->first << " T_eps=" << format_real(best->second) << " at p="
        << format_real(grid.front()) << '\n';
  }
  return kExitOk;
}

int cmd_retrans(const ExperimentConfig& cfg, std::ostream& log) {
  if (!cfg.rate) throw ConfigError("retrans: needs a 'rate'");
  const Setup s = build(cfg);
  const unsigned b = single_bits(cfg, s);
  const double a = alpha_for(cfg, s, b);
  if (!(a < 1.0)) divergent(s, b, a);
  const double k = iterations_to_eps_alpha(a, s.bound, cfg.eps);
  const auto iterations = static_cast<std::size_t>(std::ceil(k));
  const double n = packet_bits(cfg, s, b);
  const std::vector<double> grid = cfg.loss_grid.empty() ? std::vector<double>{cfg.loss}
                                                         : cfg.loss_grid;
  for (const double p : grid) {
    if (!(p > 0.0)) throw ConfigError("loss_grid: retransmission analysis needs p > 0");
  }
  const bool fixed = cfg.policy == PolicyKind::FixedRounds;

  auto out = open_output(cfg, "retrans.csv");
  out << "p,LB,UB,sim_mean,ci_lo,ci_hi";
  if (fixed) out << ",rounds,success_rate,success_se";
  out << '\n';
  for (std::size_t row = 0; row < grid.size(); ++row) {
    const double p = grid[row];
    const double dl = delay(*cfg.rate, n, p);
    const Interval f = retransmission_factors(s.links, p);
    const std::uint64_t seed = mix_seed(cfg.seed, row);
    out << format_real(p) << ',' << format_real(k * dl * f.lower) << ','
        << format_real(k * dl * f.upper);
    if (!fixed) {
      if (cfg.replicas > 0) {
        const auto times =
            simulate_until_success_times(s.links, p, iterations, dl, cfg.replicas, seed);
        const Interval ci = bootstrap_mean_ci(times, 0.99, 1000, seed);
        out << ',' << format_real(mean(times)) << ',' << format_real(ci.lower) << ','
            << format_real(ci.upper);
      } else {
        out << ",,,";
      }
    } else {
      const std::uint64_t m = fixed_rounds_count(s.links, k, p, cfg.delta);
      out << ',' << format_real(static_cast<double>(iterations * m) * dl) << ",,," << m;
      if (cfg.replicas > 0) {
        const auto ok =
            simulate_fixed_rounds_success(s.links, p, iterations, m, cfg.replicas, seed);
        const double rate = static_cast<double>(std::count(ok.begin(), ok.end(), 1)) /
                            static_cast<double>(ok.size());
        const double se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(ok.size()));
        out << ',' << format_real(rate) << ',' << format_real(se);
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
  log << "b=" << b << " k_eps=" << format_real(k) << " links=" << s.links << " rows="
      << grid.size() << '\n';
  return kExitOk;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  if (name == "run") return Command::Run;
  if (name == "sweep-bits") return Command::SweepBits;
  if (name == "ttc") return Command::Ttc;
  if (name == "retrans") return Command::Retrans;
  return std::nullopt;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output = *o.out;
  if (o.replicas) cfg.replicas = *o.replicas;
}

int execute(Command cmd, const ExperimentConfig& cfg, std::ostream& log) {
  switch (cmd) {
    case Command::Run: return cmd_run(cfg, log);
    case Command::SweepBits: return cmd_sweep_bits(cfg, log);
    case Command::Ttc: return cmd_ttc(cfg, log);
    case Command::Retrans: return cmd_retrans(cfg, log);
  }
  return kExitFailure;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case Errc::GridOverflow:
        return kExitGridOverflow;
      case Errc::Divergent:
        return kExitDivergent;
      case Errc::InvalidArgument:
      case Errc::InvalidSigma:
      case Errc::InvalidEps:
      case Errc::EmptyRange:
      case Errc::InvalidGraph:
      case Errc::Disconnected:
      case Errc::ConnectivityTimeout:
      case Errc::KappaTooSmall:
      case Errc::ParseError:
      case Errc::DimensionMismatch:
      case Errc::NegativeObjective:
      case Errc::NonPositiveRate:
      case Errc::DomainError:
      case Errc::DegenerateP:
      case Errc::RankDeficiency:
        return kExitConfig;
      default:
        return kExitFailure;
    }
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitConfig;
  return kExitFailure;
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive-grid quantized distributed optimization simulator", "gridquant"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> replicas;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_option("--replicas", replicas, "override the Monte Carlo replica count");
  app.fallthrough();
  for (const char* name : {"run", "sweep-bits", "ttc", "retrans"}) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out, help_err;
    const int code = app.exit(e, help_out, help_err);
    out << help_out.str();
    err << help_err.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const auto cmd = parse_command(app.get_subcommands().front()->get_name());
    ExperimentConfig cfg = load_config(config_path);
    Overrides o;
    o.seed = seed;
    o.replicas = replicas;
    if (out_dir) o.out = *out_dir;
    apply_overrides(cfg, o);
    return execute(*cmd, cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace gridquant::cli
