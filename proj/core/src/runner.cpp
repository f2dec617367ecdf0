#include "gridquant/runner.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "gridquant/complexity.hpp"
#include "gridquant/csv.hpp"
#include "gridquant/error.hpp"
#include "gridquant/quantizer.hpp"

namespace gridquant {

std::string format_real(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_real(const std::optional<double>& value) {
  return value ? format_real(*value) : std::string{};
}

double bound_from_first_step(double first_step_norm, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0)) raise(Errc::InvalidSigma, "sigma must lie in [0, 1)");
  return first_step_norm / (1.0 - sigma);
}

namespace {

void check_finite(const Eigen::VectorXd& x, std::size_t k) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "iterate " << k << " contains non-finite entries";
    raise(Errc::NonFiniteState, msg.str());
  }
}

RunRecord make_record(const AlgorithmModel& model, const std::optional<Eigen::VectorXd>& x_star,
                      const Eigen::VectorXd& x, std::size_t k) {
  RunRecord rec;
  rec.k = k;
  if (x_star) rec.err = model.norm(x - *x_star);
  rec.objective = model.objective(x);
  return rec;
}

bool reached(const RunRecord& rec, const std::optional<double>& eps) {
  return eps && rec.err && *rec.err <= *eps;
}

}  // namespace

RunTrace run_exact(const AlgorithmModel& model, const Eigen::VectorXd& x0, std::size_t horizon,
                   std::optional<double> stop_at_eps) {
  const auto x_star = model.fixed_point();
  const std::uint64_t per_iter = model.node_count() * model.message_dim() * 64;

  RunTrace trace;
  trace.bits = 64;
  trace.alpha = model.constants().sigma;
  check_finite(x0, 0);
  Eigen::VectorXd x = x0;
  trace.records.push_back(make_record(model, x_star, x, 0));
  if (reached(trace.records.back(), stop_at_eps)) {
    trace.status = RunStatus::ReachedEps;
    return trace;
  }
  for (std::size_t k = 1; k <= horizon; ++k) {
    x = model.step(x);
    check_finite(x, k);
    auto rec = make_record(model, x_star, x, k);
    rec.bits_cum = per_iter * k;
    trace.records.push_back(std::move(rec));
    if (reached(trace.records.back(), stop_at_eps)) {
      trace.status = RunStatus::ReachedEps;
      break;
    }
  }
  return trace;
}

RunTrace run_quantized(const AlgorithmModel& model, const QuantizedRunConfig& cfg) {
  const ModelConstants mc = model.constants();
  const std::size_t n_nodes = model.node_count();
  const auto d = static_cast<Eigen::Index>(model.message_dim());
  const std::uint64_t per_iter = n_nodes * model.message_dim() * cfg.bits;
  const auto x_star = model.fixed_point();
  if (cfg.stop_at_eps && !x_star) {
    raise(Errc::InvalidArgument, "stopping at eps requires a model with a known fixed point");
  }

  RunTrace trace;
  trace.bits = cfg.bits;
  trace.gain = cfg.gain ? *cfg.gain : contraction_gain(mc.lip_a, mc.lip_c, mc.sigma);
  const double alpha_theory = alpha(cfg.bits, trace.gain, mc.sigma);
  trace.alpha = cfg.alpha_override ? *cfg.alpha_override : alpha_theory;
  trace.guaranteed = alpha_theory < 1.0 && !cfg.alpha_override;

  auto radius = [&](std::size_t k) {
    return radius_schedule(k, trace.gain, mc.lip_a, trace.alpha, cfg.bound_d);
  };

  Eigen::VectorXd x = cfg.initial_state ? *cfg.initial_state : model.initial_state();
  check_finite(x, 0);
  Eigen::VectorXd q = model.extract_all(x);  // q^0 = c^0
  double msg_scale = q.size() > 0 ? q.cwiseAbs().maxCoeff() : 0.0;

  {
    auto rec = make_record(model, x_star, x, 0);
    rec.radius = radius(0);
    trace.records.push_back(std::move(rec));
    if (reached(trace.records.back(), cfg.stop_at_eps)) {
      trace.status = RunStatus::ReachedEps;
      return trace;
    }
  }

  for (std::size_t k = 0; k < cfg.horizon; ++k) {
    x = model.apply(q, x);
    check_finite(x, k + 1);
    const Eigen::VectorXd c = model.extract_all(x);
    const double r = radius(k);
    msg_scale = std::max(msg_scale, c.cwiseAbs().maxCoeff());
    if (r < kPrecisionFloor * msg_scale) {
      // Past this point rounding in c exceeds the grid and containment is meaningless.
      trace.status = RunStatus::PrecisionFloor;
      break;
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const auto off = static_cast<Eigen::Index>(i) * d;
      GridSpec grid(q.segment(off, d), r, cfg.bits);
      const double occ = grid_occupancy(c.segment(off, d), grid);
      worst = std::max(worst, occ);
      if (!(occ <= kContainmentSlack)) {
        trace.status = RunStatus::GridOverflow;
        trace.overflow = OverflowEvent{k, i, occ};
        return trace;
      }
      q.segment(off, d) = quantize(c.segment(off, d), grid).value;
    }

    auto rec = make_record(model, x_star, x, k + 1);
    rec.radius = radius(k + 1);
    rec.bits_cum = per_iter * (k + 1);
    rec.occupancy = worst;
    trace.records.push_back(std::move(rec));
    if (reached(trace.records.back(), cfg.stop_at_eps)) {
      trace.status = RunStatus::ReachedEps;
      break;
    }
  }
  return trace;
}

std::optional<std::size_t> envelope_violation(const RunTrace& trace, double bound_d,
                                              double rel_tol) {
  for (const auto& rec : trace.records) {
    if (!rec.err) continue;
    const double bound = std::pow(trace.alpha, static_cast<double>(rec.k)) * bound_d;
    if (*rec.err > bound * (1.0 + rel_tol)) return rec.k;
  }
  return std::nullopt;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "k,err,r_k,bits_cum,t_seconds\n";
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << format_real(rec.err) << ',' << format_real(rec.radius) << ','
        << rec.bits_cum << ',' << format_real(rec.t_seconds) << '\n';
  }
}

}  // namespace gridquant
