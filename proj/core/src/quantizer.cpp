#include "gridquant/quantizer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gridquant/error.hpp"

namespace gridquant {

namespace {

std::uint64_t max_index_for(unsigned bits) noexcept {
  return bits >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << bits) - 1;
}

// 2^b - 1 as a double; exact for b <= 53.
double level_count(unsigned bits) noexcept {
  return static_cast<double>(max_index_for(bits));
}

}  // namespace

GridSpec::GridSpec(Eigen::VectorXd center, double radius, unsigned bits)
    : center_(std::move(center)), radius_(radius), bits_(bits) {
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    raise(Errc::InvalidArgument, "grid radius must be positive and finite");
  }
  if (bits_ < 1 || bits_ > kMaxBits) {
    raise(Errc::InvalidArgument, "bits per dimension must lie in [1, 64]");
  }
  if (center_.size() < 1) raise(Errc::InvalidArgument, "grid dimension must be at least 1");
  if (!center_.allFinite()) raise(Errc::InvalidArgument, "grid center must be finite");
}

std::uint64_t GridSpec::max_index() const noexcept { return max_index_for(bits_); }

double grid_step(double radius, unsigned bits) noexcept { return radius / level_count(bits); }

double grid_step(const GridSpec& grid) noexcept { return grid_step(grid.radius(), grid.bits()); }

double grid_occupancy(const Eigen::Ref<const Eigen::VectorXd>& c, const GridSpec& grid) {
  if (static_cast<std::size_t>(c.size()) != grid.dim()) {
    raise(Errc::DimensionMismatch, "vector and grid dimensions differ");
  }
  return (c - grid.center()).cwiseAbs().maxCoeff() / grid.radius();
}

QuantizedMessage quantize(const Eigen::Ref<const Eigen::VectorXd>& c, const GridSpec& grid) {
  if (!c.allFinite()) raise(Errc::NonFiniteState, "cannot quantize a non-finite vector");
  const double occupancy = grid_occupancy(c, grid);
  if (occupancy > kContainmentSlack) {
    std::ostringstream msg;
    msg << "point lies " << occupancy << " radii from the grid center";
    raise(Errc::GridOverflow, msg.str());
  }

  const double r = grid.radius();
  const double delta = grid_step(grid);
  const std::uint64_t top = grid.max_index();
  const double top_d = static_cast<double>(top);

  QuantizedMessage out;
  out.indices.resize(grid.dim());
  out.value.resize(c.size());
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const double low = grid.center()[j] - r;
    // floor((c - q + r + delta) / (2 delta)) picks the nearest point, ties upward.
    const double t = std::floor((c[j] - low + delta) / (2.0 * delta));
    std::uint64_t idx = 0;
    if (t >= top_d) {
      idx = top;
    } else if (t > 0.0) {
      idx = static_cast<std::uint64_t>(t);
    }
    out.indices[static_cast<std::size_t>(j)] = idx;
    out.value[j] = idx == top ? grid.center()[j] + r : low + 2.0 * delta * static_cast<double>(idx);
  }
  return out;
}

Eigen::VectorXd decode(std::span<const std::uint64_t> indices, const GridSpec& grid) {
  if (indices.size() != grid.dim()) {
    raise(Errc::DimensionMismatch, "index count differs from grid dimension");
  }
  const double r = grid.radius();
  const double delta = grid_step(grid);
  const std::uint64_t top = grid.max_index();
  Eigen::VectorXd value(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (indices[j] > top) {
      raise(Errc::IndexOutOfRange, "grid index exceeds 2^b - 1");
    }
    value[jj] = indices[j] == top
                    ? grid.center()[jj] + r
                    : grid.center()[jj] - r + 2.0 * delta * static_cast<double>(indices[j]);
  }
  return value;
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint64_t> indices, unsigned bits) {
  if (bits < 1 || bits > GridSpec::kMaxBits) {
    raise(Errc::InvalidArgument, "bits per dimension must lie in [1, 64]");
  }
  const std::uint64_t top = max_index_for(bits);
  const std::size_t total_bits = indices.size() * bits;
  std::vector<std::uint8_t> out((total_bits + 7) / 8, 0);
  std::size_t pos = 0;
  for (std::uint64_t idx : indices) {
    if (idx > top) raise(Errc::IndexOutOfRange, "grid index exceeds 2^b - 1");
    for (unsigned k = bits; k-- > 0; ++pos) {
      if ((idx >> k) & 1u) out[pos / 8] |= static_cast<std::uint8_t>(0x80u >> (pos % 8));
    }
  }
  return out;
}

std::vector<std::uint64_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t dim,
                                       unsigned bits) {
  if (bits < 1 || bits > GridSpec::kMaxBits) {
    raise(Errc::InvalidArgument, "bits per dimension must lie in [1, 64]");
  }
  const std::size_t expected = (dim * bits + 7) / 8;
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << "expected " << expected << " bytes, got " << bytes.size();
    raise(Errc::LengthMismatch, msg.str());
  }
  std::vector<std::uint64_t> out(dim, 0);
  std::size_t pos = 0;
  for (auto& idx : out) {
    for (unsigned k = 0; k < bits; ++k, ++pos) {
      const std::uint64_t bit = (bytes[pos / 8] >> (7 - pos % 8)) & 1u;
      idx = (idx << 1) | bit;
    }
  }
  return out;
}

}  // namespace gridquant
