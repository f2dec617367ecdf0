#include "gridquant/lossy.hpp"

#include <random>

#include "gridquant/error.hpp"

namespace gridquant {

RunTrace simulate_lossy_run(const AlgorithmModel& model, const QuantizedRunConfig& cfg,
                            const PacketSpec& packet, const RetransmissionPolicy& policy,
                            const RateModel& rate_model, std::uint64_t seed) {
  if (packet.bits != cfg.bits || packet.dim != model.message_dim()) {
    raise(Errc::DimensionMismatch, "packet layout does not match the run's bits and dimension");
  }
  const double step_delay = delay(rate_model, packet.packet_bits(), packet.loss);
  RunTrace trace = run_quantized(model, cfg);

  std::mt19937_64 rng(seed);
  double t = 0.0;
  trace.records.front().t_seconds = 0.0;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const std::uint64_t needed = sample_retransmissions(packet.link_count, packet.loss, rng);
    std::uint64_t used = needed;
    if (const auto* fixed = std::get_if<FixedRounds>(&policy)) {
      used = fixed->rounds;
      if (needed > fixed->rounds) {
        trace.records.resize(i);
        trace.status = RunStatus::DeliveryFailed;
        trace.overflow.reset();
        break;
      }
    }
    t += step_delay * static_cast<double>(used);
    trace.records[i].t_seconds = t;
    trace.rounds.push_back(used);
  }
  return trace;
}

}  // namespace gridquant
