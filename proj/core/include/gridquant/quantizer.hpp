#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gridquant {

/// A uniform grid of 2^bits points per dimension spanning [center - radius, center + radius].
class GridSpec {
 public:
  static constexpr unsigned kMaxBits = 64;

  GridSpec(Eigen::VectorXd center, double radius, unsigned bits);

  const Eigen::VectorXd& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  unsigned bits() const noexcept { return bits_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(center_.size()); }

  /// Highest valid index, 2^bits - 1.
  std::uint64_t max_index() const noexcept;

 private:
  Eigen::VectorXd center_;
  double radius_;
  unsigned bits_;
};

struct QuantizedMessage {
  std::vector<std::uint64_t> indices;
  Eigen::VectorXd value;

  std::size_t payload_bits(unsigned bits) const noexcept { return indices.size() * bits; }
};

/// Half the spacing between neighbouring grid points: r / (2^b - 1).
double grid_step(const GridSpec& grid) noexcept;
double grid_step(double radius, unsigned bits) noexcept;

/// ||c - center||_inf / r. The quantizer accepts values up to kContainmentSlack.
double grid_occupancy(const Eigen::Ref<const Eigen::VectorXd>& c, const GridSpec& grid);

/// Relative slack on the containment check. Rounding in the iterate can push a point
/// that is inside the grid in exact arithmetic marginally past the boundary.
inline constexpr double kContainmentSlack = 1.0 + 1e-12;

/// Projects c onto the nearest grid point per component, ties toward the larger point.
/// Throws Errc::GridOverflow if ||c - center||_inf exceeds the radius.
QuantizedMessage quantize(const Eigen::Ref<const Eigen::VectorXd>& c, const GridSpec& grid);

/// Receiver-side reconstruction of the grid point addressed by indices.
Eigen::VectorXd decode(std::span<const std::uint64_t> indices, const GridSpec& grid);

/// Big-endian bit packing, first dimension in the most significant bits, zero padded
/// to a byte boundary. Output length is ceil(d * bits / 8).
std::vector<std::uint8_t> pack_bits(std::span<const std::uint64_t> indices, unsigned bits);
std::vector<std::uint64_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t dim,
                                       unsigned bits);

}  // namespace gridquant
