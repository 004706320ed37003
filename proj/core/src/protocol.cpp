#include "etl/protocol.hpp"

#include "etl/error.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace etl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return std::bit_cast<double>(bits);
  }
  void finish() const {
    if (pos_ != in_.size()) {
      throw FrameError("frame has " + std::to_string(in_.size() - pos_) + " trailing bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FrameError("truncated frame");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

int integral_field(double v, const char* what) {
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 1e9) {
    throw ProtocolError(std::string(what) + " is not an integer");
  }
  return static_cast<int>(v);
}

}  // namespace

MessageTag tag_of(const UpdateMessage& msg) {
  return std::visit(overloaded{
                        [](const StateUpdate&) { return MessageTag::State; },
                        [](const SmallModelUpdate&) { return MessageTag::Small; },
                        [](const FullModelUpdate&) { return MessageTag::Full; },
                        [](const RawModelUpdate&) { return MessageTag::Raw; },
                    },
                    msg.payload);
}

std::string_view variant_name(const UpdateMessage& msg) {
  switch (tag_of(msg)) {
    case MessageTag::State:
      return "state";
    case MessageTag::Small:
      return "small";
    case MessageTag::Full:
      return "full";
    case MessageTag::Raw:
      return "raw";
  }
  return "unknown";
}

std::size_t value_count(const UpdateMessage& msg) {
  return std::visit(
      overloaded{
          [](const StateUpdate& m) { return static_cast<std::size_t>(m.x.size()); },
          [](const SmallModelUpdate&) { return std::size_t{2}; },
          [](const FullModelUpdate& m) { return m.model.value_count(); },
          [](const RawModelUpdate& m) { return m.values.size() + 1; },
      },
      msg.payload);
}

std::vector<std::uint8_t> encode(const UpdateMessage& msg) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(tag_of(msg)));
  w.u32(msg.k);
  std::visit(overloaded{
                 [&](const StateUpdate& m) {
                   for (Eigen::Index i = 0; i < m.x.size(); ++i) w.f64(m.x[i]);
                 },
                 [&](const SmallModelUpdate& m) {
                   w.f64(m.theta.cycle_length);
                   w.f64(m.theta.shift);
                 },
                 [&](const FullModelUpdate& m) {
                   w.u32(static_cast<std::uint32_t>(m.model.cycle_length));
                   for (double c : m.model.coefficients) w.f64(c);
                 },
                 [&](const RawModelUpdate& m) {
                   w.u32(static_cast<std::uint32_t>(m.values.size()));
                   for (double v : m.values) w.f64(v);
                 },
             },
             msg.payload);
  return w.take();
}

UpdateMessage decode(std::span<const std::uint8_t> frame, const WireConfig& cfg) {
  Reader r(frame);
  const std::uint8_t tag = r.u8();
  UpdateMessage msg;
  switch (tag) {
    case static_cast<std::uint8_t>(MessageTag::State): {
      msg.k = r.u32();
      StateUpdate m{Vec(cfg.state_dim)};
      for (int i = 0; i < cfg.state_dim; ++i) m.x[i] = r.f64();
      msg.payload = std::move(m);
      break;
    }
    case static_cast<std::uint8_t>(MessageTag::Small): {
      msg.k = r.u32();
      SmallModelUpdate m;
      m.theta.cycle_length = integral_field(r.f64(), "cycle length");
      m.theta.shift = integral_field(r.f64(), "shift");
      if (m.theta.cycle_length < 1 || m.theta.shift < 0 ||
          m.theta.shift >= m.theta.cycle_length) {
        throw ProtocolError("invalid deformation parameters");
      }
      msg.payload = m;
      break;
    }
    case static_cast<std::uint8_t>(MessageTag::Full): {
      msg.k = r.u32();
      FullModelUpdate m;
      m.model.cycle_length = static_cast<int>(r.u32());
      if (m.model.cycle_length < 1) throw ProtocolError("cycle length must be >= 1");
      m.model.coefficients.resize(static_cast<std::size_t>(cfg.coefficient_count));
      for (double& c : m.model.coefficients) c = r.f64();
      msg.payload = std::move(m);
      break;
    }
    case static_cast<std::uint8_t>(MessageTag::Raw): {
      msg.k = r.u32();
      const std::uint32_t n = r.u32();
      if (n < 1) throw ProtocolError("cycle length must be >= 1");
      if ((frame.size() - 9) / 8 < n) throw FrameError("truncated frame");
      RawModelUpdate m;
      m.values.resize(n);
      for (double& v : m.values) v = r.f64();
      msg.payload = std::move(m);
      break;
    }
    default:
      throw ProtocolError("unknown message tag " + std::to_string(tag));
  }
  r.finish();
  return msg;
}

void CommLedger::record(const UpdateMessage& msg) {
  values_sent += static_cast<std::int64_t>(value_count(msg));
  switch (tag_of(msg)) {
    case MessageTag::State:
      ++state_updates;
      break;
    case MessageTag::Small:
      ++small_updates;
      break;
    case MessageTag::Full:
      ++full_updates;
      break;
    case MessageTag::Raw:
      ++raw_updates;
      break;
  }
}

double ledger_ratio(const CommLedger& ledger) {
  if (ledger.samples_elapsed <= 0) throw UndefinedError("ratio over zero samples");
  return static_cast<double>(ledger.values_sent) /
         (static_cast<double>(ledger.state_dim) * static_cast<double>(ledger.samples_elapsed));
}

double expected_ratio_bound(int state_dim, double eta, int model_values, double expected_tau) {
  if (state_dim < 1 || !(expected_tau > 0.0)) throw ConfigError("invalid budget parameters");
  return (state_dim + eta * model_values) / (state_dim * expected_tau);
}

}  // namespace etl
