#pragma once

#include "etl/learning.hpp"
#include "etl/types.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace etl {

struct StateUpdate {
  Vec x;
};

struct SmallModelUpdate {
  DeformParams theta;
};

struct FullModelUpdate {
  CompressedModel model;
};

/// Uncompressed trajectory, used when the cycle is too short to compress.
struct RawModelUpdate {
  std::vector<double> values;
};

struct UpdateMessage {
  std::uint32_t k = 0;
  std::variant<StateUpdate, SmallModelUpdate, FullModelUpdate, RawModelUpdate> payload;

  bool is_state() const { return std::holds_alternative<StateUpdate>(payload); }
  bool is_model() const { return !is_state(); }
};

enum class MessageTag : std::uint8_t {
  State = 0x01,
  Small = 0x02,
  Full = 0x03,
  Raw = 0x04,
};

MessageTag tag_of(const UpdateMessage& msg);
std::string_view variant_name(const UpdateMessage& msg);

/// Real values carried by the payload; the sample index is not counted.
std::size_t value_count(const UpdateMessage& msg);

/// Decoder-side knowledge that is not carried on the wire.
struct WireConfig {
  int state_dim = 1;
  int coefficient_count = 19;
};

/// Frame layout, all little-endian:
///   tag u8 | k u32 | payload
///   State: n x f64
///   Small: cycle_length f64, shift f64
///   Full:  N u32, coefficient_count x f64
///   Raw:   N u32, N x f64
std::vector<std::uint8_t> encode(const UpdateMessage& msg);

/// Throws ProtocolError for an unknown tag or invalid field values and
/// FrameError when the frame length does not match its tag.
UpdateMessage decode(std::span<const std::uint8_t> frame, const WireConfig& cfg = {});

/// Transmitted-value bookkeeping for one run.
struct CommLedger {
  int state_dim = 1;
  int model_values = 20;  // w, values of a full model update
  std::int64_t values_sent = 0;
  std::int64_t samples_elapsed = 0;
  std::int64_t state_updates = 0;
  std::int64_t small_updates = 0;
  std::int64_t full_updates = 0;
  std::int64_t raw_updates = 0;

  void record(const UpdateMessage& msg);
  void tick(std::int64_t samples = 1) { samples_elapsed += samples; }
};

/// values_sent / (n * samples_elapsed). Throws UndefinedError with no samples.
double ledger_ratio(const CommLedger& ledger);

/// (n + eta w) / (n E[tau]): expected ratio under a correct model.
double expected_ratio_bound(int state_dim, double eta, int model_values, double expected_tau);

}  // namespace etl
