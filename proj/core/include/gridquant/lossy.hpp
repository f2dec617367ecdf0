#pragma once

#include <cstdint>
#include <variant>

#include "gridquant/channel.hpp"
#include "gridquant/runner.hpp"

namespace gridquant {

/// Retransmit every packet until it is delivered.
struct UntilSuccess {};

/// Transmit each packet exactly `rounds` times per iteration.
struct FixedRounds {
  std::uint64_t rounds = 1;
};

using RetransmissionPolicy = std::variant<UntilSuccess, FixedRounds>;

/// Quantized run with a channel time axis. Iteration k costs Delta(n, p) * m_k seconds,
/// where m_k is the sampled number of rounds (until success) or the fixed m. Under fixed
/// rounds, the first iteration in which some link is not delivered ends the trace with
/// status DeliveryFailed; records stop at the last completed iteration.
RunTrace simulate_lossy_run(const AlgorithmModel& model, const QuantizedRunConfig& cfg,
                            const PacketSpec& packet, const RetransmissionPolicy& policy,
                            const RateModel& rate_model, std::uint64_t seed);

}  // namespace gridquant
