#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvmwear/address_space.hpp"
#include "nvmwear/movement.hpp"
#include "nvmwear/rng.hpp"

namespace nvmwear {

enum class Op { read, write };

struct Request {
  Op op = Op::write;
  LineAddr lma = 0;
  friend bool operator==(const Request&, const Request&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::uint64_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_;
};

class Workload {
 public:
  virtual ~Workload() = default;
  /// Next request, or nothing when the source is exhausted.
  virtual std::optional<Request> next() = 0;
  /// Movements caused by the last request; only attackers care.
  virtual void observe(const MovementList&) {}
};

/// Repeated address attack.
class RepeatedAddress final : public Workload {
 public:
  explicit RepeatedAddress(LineAddr lma) : lma_(lma) {}
  std::optional<Request> next() override { return Request{Op::write, lma_}; }

 private:
  LineAddr lma_;
};

/// Birthday-paradox attack: hammer a random line until told it moved.
class BirthdayParadox final : public Workload {
 public:
  BirthdayParadox(std::uint64_t lines, std::uint64_t seed)
      : lines_(lines), rng_(Rng::substream(seed, Stream::workload)), target_(rng_.uniform(lines)) {}

  std::optional<Request> next() override { return Request{Op::write, target_}; }

  void observe(const MovementList& moves) override {
    for (const Movement& m : moves) {
      if (m.kind == MoveKind::data && m.lma == target_ && m.from != m.to) {
        target_ = rng_.uniform(lines_);
        ++switches_;
        return;
      }
    }
  }

  LineAddr target() const { return target_; }
  std::uint64_t switches() const { return switches_; }

 private:
  std::uint64_t lines_;
  Rng rng_;
  LineAddr target_;
  std::uint64_t switches_ = 0;
};

/// Zipf(theta) ranks over n items via an inverse-CDF table; theta = 0 is
/// uniform. Rank 0 is the most popular.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double theta) : n_(n), theta_(theta) {
    if (n == 0) throw ConfigError("workload.working_set must be positive");
    if (!(theta >= 0)) throw ConfigError("workload.theta must be >= 0");
    if (theta == 0) return;
    cdf_.resize(n);
    double sum = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      sum += std::pow(static_cast<double>(i + 1), -theta);
      cdf_[i] = sum;
    }
    for (double& c : cdf_) c /= sum;
  }

  std::uint64_t operator()(Rng& rng) const {
    if (cdf_.empty()) return rng.uniform(n_);
    const double u = rng.unit();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cdf_.begin()), n_ - 1);
  }

  std::uint64_t size() const { return n_; }
  double theta() const { return theta_; }

 private:
  std::uint64_t n_;
  double theta_;
  std::vector<double> cdf_;
};

struct Phase {
  std::uint64_t requests = 0;
  std::uint64_t working_set = 0;
  std::uint64_t base = 0;
  double theta = 0;
  double read_fraction = 0;
};

/// Maps working-set rank to a line address. With scatter on, ranks are
/// spread over the whole memory by an odd multiplier so hot lines do not
/// share regions by construction.
struct RankLayout {
  std::uint64_t lines = 0;
  bool scatter = false;

  LineAddr operator()(std::uint64_t base, std::uint64_t rank) const {
    const std::uint64_t x = base + rank;
    if (!scatter) return x & (lines - 1);
    return (x * 0x9E3779B97F4A7C15ull) & (lines - 1);
  }
};

/// Locality that shifts over time: each phase draws from its own Zipf
/// working set for a fixed number of requests; the schedule repeats.
class PhaseSchedule final : public Workload {
 public:
  PhaseSchedule(std::vector<Phase> phases, std::uint64_t lines, bool scatter, std::uint64_t seed)
      : phases_(std::move(phases)), layout_{lines, scatter}, rng_(Rng::substream(seed, Stream::workload)) {
    if (phases_.empty()) throw ConfigError("workload.phases must not be empty");
    for (const Phase& p : phases_) {
      if (p.requests == 0) throw ConfigError("workload.phases[].requests must be positive");
      if (p.working_set == 0 || p.working_set > lines) throw ConfigError("workload.phases[].working_set out of range");
      if (!(p.read_fraction >= 0 && p.read_fraction <= 1)) throw ConfigError("workload.phases[].read_fraction must be in [0,1]");
      samplers_.emplace_back(p.working_set, p.theta);
    }
  }

  std::optional<Request> next() override {
    if (left_ == 0) {
      current_ = started_ ? (current_ + 1) % phases_.size() : 0;
      started_ = true;
      left_ = phases_[current_].requests;
    }
    --left_;
    const Phase& p = phases_[current_];
    const std::uint64_t rank = samplers_[current_](rng_);
    const Op op = p.read_fraction > 0 && rng_.unit() < p.read_fraction ? Op::read : Op::write;
    return Request{op, layout_(p.base, rank)};
  }

  std::size_t current_phase() const { return current_; }

 private:
  std::vector<Phase> phases_;
  std::vector<ZipfSampler> samplers_;
  RankLayout layout_;
  Rng rng_;
  std::size_t current_ = 0;
  std::uint64_t left_ = 0;
  bool started_ = false;
};

/// Replays `<R|W> 0x<hex>` lines. Blank lines and `#` comments are skipped;
/// CRLF is accepted. Addresses past the memory either raise or wrap.
class TraceReader final : public Workload {
 public:
  TraceReader(const std::string& path, std::uint64_t lines, bool wrap)
      : path_(path), in_(path), lines_(lines), wrap_(wrap) {
    if (!in_) throw ConfigError("cannot open trace " + path);
  }

  std::optional<Request> next() override {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      return parse(line.substr(first));
    }
    return std::nullopt;
  }

 private:
  Request parse(const std::string& text) {
    Request r;
    if (text[0] == 'R')
      r.op = Op::read;
    else if (text[0] == 'W')
      r.op = Op::write;
    else
      throw ParseError(path_, line_no_, "expected R or W");
    std::size_t pos = 1;
    if (pos >= text.size() || (text[pos] != ' ' && text[pos] != '\t'))
      throw ParseError(path_, line_no_, "expected whitespace after op");
    pos = text.find_first_not_of(" \t", pos);
    if (pos == std::string::npos || text.compare(pos, 2, "0x") != 0)
      throw ParseError(path_, line_no_, "expected 0x-prefixed address");
    pos += 2;
    const auto end = text.find_last_not_of(" \t") + 1;
    if (pos >= end) throw ParseError(path_, line_no_, "empty address");
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, value, 16);
    if (ec != std::errc() || ptr != text.data() + end) throw ParseError(path_, line_no_, "bad hex address");
    if (value >= lines_) {
      if (!wrap_)
        throw AddressRangeError(path_ + ":" + std::to_string(line_no_) + ": address beyond memory");
      value %= lines_;
    }
    r.lma = value;
    return r;
  }

  std::string path_;
  std::ifstream in_;
  std::uint64_t lines_;
  bool wrap_;
  std::uint64_t line_no_ = 0;
};

}  // namespace nvmwear
