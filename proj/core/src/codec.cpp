#include "ckt/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ckt/estimator.hpp"

namespace ckt {

namespace {

constexpr std::uint8_t kMagic[4] = {'C', 'K', 'T', 'F'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::size_t kHeaderSize = 31;
constexpr std::uint32_t kProbTotal = 1u << 16;
constexpr std::uint32_t kRangeBottom = 1u << 24;

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | p[i];
  return v;
}

// Quantizes a strictly positive probability vector to integers summing to
// kProbTotal with every entry >= 1. floor + largest-remainder, with any
// excess removed from the largest entries; all ties break toward the lower
// index so encoder and decoder agree bit for bit.
std::vector<std::uint32_t> quantize(const std::vector<double>& probs) {
  const int m = static_cast<int>(probs.size());
  std::vector<std::uint32_t> freq(m);
  std::vector<double> remainder(m);
  std::int64_t total = 0;
  for (int i = 0; i < m; ++i) {
    const double scaled = probs[i] * kProbTotal;
    const double fl = std::floor(scaled);
    freq[i] = static_cast<std::uint32_t>(std::max(1.0, fl));
    remainder[i] = scaled - fl;
    total += freq[i];
  }
  while (total < kProbTotal) {
    int pick = 0;
    for (int i = 1; i < m; ++i) {
      if (remainder[i] > remainder[pick]) pick = i;
    }
    ++freq[pick];
    remainder[pick] = -1.0;
    ++total;
  }
  while (total > kProbTotal) {
    int pick = 0;
    for (int i = 1; i < m; ++i) {
      if (freq[i] > freq[pick]) pick = i;
    }
    if (freq[pick] <= 1) throw std::logic_error("quantize: cannot reduce below floor");
    --freq[pick];
    --total;
  }
  return freq;
}

class RangeEncoder {
 public:
  // The leading zero byte absorbs any carry that would otherwise walk off
  // the front of the stream; it is part of the code value (top 8 bits of a
  // quantity provably < 1, hence never incremented past the carry).
  RangeEncoder() : out_(1, 0) {}

  void encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t tot) {
    const std::uint32_t r = range_ / tot;
    low_ += static_cast<std::uint64_t>(r) * cum;
    if (cum + freq == tot) {
      range_ -= r * cum;  // last slot absorbs range % tot
    } else {
      range_ = r * freq;
    }
    if (low_ >> 32) {
      propagate_carry();
      low_ &= 0xFFFFFFFFull;
    }
    while (range_ < kRangeBottom) {
      out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
      low_ = (low_ << 8) & 0xFFFFFFFFull;
      range_ <<= 8;
    }
  }

  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
      low_ = (low_ << 8) & 0xFFFFFFFFull;
    }
    return std::move(out_);
  }

 private:
  void propagate_carry() {
    for (std::size_t i = out_.size(); i-- > 0;) {
      if (++out_[i] != 0) return;
    }
    throw std::logic_error("range coder: carry escaped the stream");
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
    // 5 bytes = leading carry byte + 32 code bits; the carry byte's value is
    // already folded into code_'s bit 32+, which must be zero for a stream
    // our encoder produced.
    if (code_ >> 32) throw std::runtime_error("decode: corrupt payload (leading byte)");
  }

  std::uint32_t decode_target(std::uint32_t tot) {
    r_ = range_ / tot;
    const std::uint64_t t = code_ / r_;
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(t, tot - 1));
  }

  void decode_update(std::uint32_t cum, std::uint32_t freq, std::uint32_t tot) {
    code_ -= static_cast<std::uint64_t>(r_) * cum;
    if (cum + freq == tot) {
      range_ -= r_ * cum;
    } else {
      range_ = r_ * freq;
    }
    while (range_ < kRangeBottom) {
      code_ = (code_ << 8) | next_byte();
      range_ <<= 8;
    }
  }

  std::size_t consumed() const { return consumed_; }

 private:
  std::uint8_t next_byte() {
    if (p_ == end_) throw std::runtime_error("decode: truncated payload");
    ++consumed_;
    return *p_++;
  }

  const std::uint8_t* p_;
  const std::uint8_t* end_;
  std::uint64_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t r_ = 0;
  std::size_t consumed_ = 0;
};

std::vector<std::uint8_t> make_header(int m, std::int64_t n, std::uint64_t seed,
                                      std::uint64_t digest) {
  std::vector<std::uint8_t> h;
  h.reserve(kHeaderSize);
  h.insert(h.end(), kMagic, kMagic + 4);
  h.push_back(kVersion);
  put_be(h, static_cast<std::uint64_t>(m), 2);
  put_be(h, static_cast<std::uint64_t>(n), 8);
  put_be(h, seed, 8);
  put_be(h, digest, 8);
  return h;
}

}  // namespace

CodecHeader read_header(const BitBuffer& buf) {
  if (buf.bytes.size() < kHeaderSize) throw std::runtime_error("decode: buffer shorter than header");
  const std::uint8_t* p = buf.bytes.data();
  if (!std::equal(kMagic, kMagic + 4, p)) throw std::runtime_error("decode: bad magic");
  if (p[4] != kVersion) throw std::runtime_error("decode: unsupported version");
  CodecHeader h;
  h.m = static_cast<int>(get_be(p + 5, 2));
  h.n = static_cast<std::int64_t>(get_be(p + 7, 8));
  h.seed = get_be(p + 15, 8);
  h.constraints_digest = get_be(p + 23, 8);
  return h;
}

BitBuffer encode(const std::vector<int>& x, const ConstraintSet& s, const IntegrationConfig& cfg,
                 std::uint64_t seed) {
  const int m = s.m();
  if (m > 0xFFFF) throw std::invalid_argument("encode: alphabet too large for the header");
  for (int sym : x) {
    if (sym < 1 || sym > m) throw std::invalid_argument("encode: symbol out of range");
  }

  BitBuffer buf;
  buf.bytes = make_header(m, static_cast<std::int64_t>(x.size()), seed, s.digest());
  if (x.empty()) return buf;

  EstimatorState state = new_estimator(s, cfg, seed);
  RangeEncoder coder;
  for (int sym : x) {
    const PredictiveDistribution pred = predict(state);
    const std::vector<std::uint32_t> freq = quantize(pred.probs);
    std::uint32_t cum = 0;
    for (int i = 0; i + 1 < sym; ++i) cum += freq[i];
    coder.encode(cum, freq[sym - 1], kProbTotal);
    update(state, sym, pred);
  }
  const std::vector<std::uint8_t> payload = coder.finish();
  buf.bytes.insert(buf.bytes.end(), payload.begin(), payload.end());
  buf.bit_length = static_cast<std::int64_t>(payload.size()) * 8;
  return buf;
}

std::vector<int> decode(const BitBuffer& buf, const ConstraintSet& s, const IntegrationConfig& cfg,
                        std::uint64_t seed) {
  const CodecHeader h = read_header(buf);
  if (h.m != s.m()) throw std::runtime_error("decode: alphabet size mismatch");
  if (h.constraints_digest != s.digest()) {
    throw std::runtime_error("decode: constraints digest mismatch");
  }
  if (h.seed != seed) throw std::runtime_error("decode: seed mismatch");
  const std::size_t payload_size = buf.bytes.size() - kHeaderSize;
  if (h.n == 0) {
    if (payload_size != 0) throw std::runtime_error("decode: unexpected payload for empty input");
    return {};
  }

  EstimatorState state = new_estimator(s, cfg, seed);
  RangeDecoder coder(buf.bytes.data() + kHeaderSize, payload_size);
  std::vector<int> x;
  x.reserve(h.n);
  for (std::int64_t step = 0; step < h.n; ++step) {
    const PredictiveDistribution pred = predict(state);
    const std::vector<std::uint32_t> freq = quantize(pred.probs);
    const std::uint32_t target = coder.decode_target(kProbTotal);
    std::uint32_t cum = 0;
    int sym = 1;
    while (cum + freq[sym - 1] <= target) {
      cum += freq[sym - 1];
      ++sym;
    }
    coder.decode_update(cum, freq[sym - 1], kProbTotal);
    update(state, sym, pred);
    x.push_back(sym);
  }
  if (coder.consumed() != payload_size) {
    throw std::runtime_error("decode: payload length mismatch");
  }
  return x;
}

double codelength_bits(const std::vector<int>& x, const ConstraintSet& s,
                       const IntegrationConfig& cfg) {
  return -log_mixture_direct(x, s, cfg) * std::numbers::log2e;
}

}  // namespace ckt
