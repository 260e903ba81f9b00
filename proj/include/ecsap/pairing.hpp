#pragma once

// Type-3 pairing groups for the pairing-based comparator scanner. Points are
// passed around as bytes so callers never see backend types.
//
// Encodings:
//   scalar  32 bytes big-endian, reduced mod the group order r on input
//   G1      affine x || y, each coordinate big-endian (96 bytes on
//           BLS12-381, 64 on BN254)
//   G2      backend-specific, only meaningful to the engine that made it
//   GT      the 12 base-field coefficients, each big-endian

#include <memory>
#include <string_view>
#include <vector>

#include "ecsap/bytes.hpp"

namespace ecsap::pairing {

enum class PairingCurve { bls12_381, bn254 };

std::string_view name(PairingCurve curve) noexcept;
/// "bls12_381" or "bn254"; Errc::invalid_parameter otherwise.
PairingCurve parse_curve(std::string_view text);
/// BN254 needs the mcl backend, which is only built on x86-64.
bool available(PairingCurve curve) noexcept;
std::vector<PairingCurve> available_curves();

/// A fixed second pairing argument with its Miller-loop lines precomputed.
class PreparedG2 {
 public:
  virtual ~PreparedG2() = default;
};

class PairingEngine {
 public:
  virtual ~PairingEngine() = default;

  virtual PairingCurve curve() const noexcept = 0;
  virtual std::size_t g1_size() const noexcept = 0;

  virtual Bytes g1_generator() const = 0;
  virtual Bytes g1_mul_generator(ByteView scalar) const = 0;
  /// Errc::invalid_point if the input is not a valid G1 element.
  virtual Bytes g1_mul(ByteView point, ByteView scalar) const = 0;
  virtual Bytes g1_add(ByteView a, ByteView b) const = 0;

  virtual Bytes g2_mul_generator(ByteView scalar) const = 0;
  virtual std::unique_ptr<PreparedG2> prepare_g2(ByteView point) const = 0;

  /// e(p, q). Errc::invalid_point for an invalid or identity p.
  virtual Bytes pair(ByteView p, const PreparedG2& q) const = 0;
};

/// Errc::invalid_parameter if the curve's backend is not built.
std::unique_ptr<PairingEngine> make_engine(PairingCurve curve);

}  // namespace ecsap::pairing
