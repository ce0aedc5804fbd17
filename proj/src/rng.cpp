#include "bkt_irt/rng.hpp"

namespace bkt_irt {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(StreamKey key) : key_(key) {
  philox_key_ = {static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (std::uint64_t id : key.ids) h = mix64(h ^ mix64(id));
  stream_hash_ = h;
}

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
    : RngStream([&] {
        StreamKey k{seed, {}};
        std::size_t i = 0;
        for (auto id : ids) {
          if (i < k.ids.size()) k.ids[i++] = id;
        }
        return k;
      }()) {}

void RngStream::refill() {
  // Counter layout: low 64 bits = block index, high 64 bits = stream identity.
  buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                           static_cast<std::uint32_t>(stream_hash_),
                           static_cast<std::uint32_t>(stream_hash_ >> 32)},
                          philox_key_);
  ++block_;
  remaining_ = 4;
}

RngStream::result_type RngStream::operator()() {
  if (remaining_ == 0) refill();
  return buffer_[4 - remaining_--];
}

double RngStream::uniform() {
  const std::uint64_t hi = (*this)();
  const std::uint64_t lo = (*this)();
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

double RngStream::uniform_open(double eps) {
  double u = uniform();
  while (u == 0.0) u = uniform();
  return eps + (1.0 - 2.0 * eps) * u;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Lemire's nearly-divisionless rejection on 64-bit draws.
  const auto draw = [this] {
    const std::uint64_t hi = (*this)();
    return (hi << 32) | (*this)();
  };
  unsigned __int128 m = static_cast<unsigned __int128>(draw()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(draw()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace bkt_irt
