#include "deps/harness/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "deps/error.hpp"
#include "deps/rng.hpp"

namespace deps {

Histogram::Histogram(double lo, double hi, int bins) : lo_(lo), hi_(hi), counts_(static_cast<std::size_t>(bins), 0.0) {
  if (bins < 1 || !(hi > lo)) throw ConfigError("histogram needs bins >= 1 and hi > lo");
}

void Histogram::add(double x, double weight) {
  if (!(x >= lo_ && x <= hi_)) return;
  auto i = static_cast<int>((x - lo_) / width());
  i = std::clamp(i, 0, bins() - 1);
  counts_[static_cast<std::size_t>(i)] += weight;
  total_ += weight;
}

void Histogram::merge(const Histogram& other) {
  if (other.bins() != bins() || other.lo_ != lo_ || other.hi_ != hi_) {
    throw ContractError("cannot merge histograms with different binning");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

double Histogram::density(int i) const {
  if (total_ <= 0.0) return 0.0;
  return counts_[static_cast<std::size_t>(i)] / (total_ * width());
}

double Histogram::density_at(double x) const {
  const double pos = (x - lo_) / width() - 0.5;
  if (pos <= 0.0) return density(0);
  if (pos >= bins() - 1) return density(bins() - 1);
  const auto i = static_cast<int>(std::floor(pos));
  const double frac = pos - i;
  return (1.0 - frac) * density(i) + frac * density(i + 1);
}

double Histogram::mode_between(double from, double to) const {
  int best = -1;
  for (int i = 0; i < bins(); ++i) {
    const double c = center(i);
    if (c < from || c > to) continue;
    if (best < 0 || counts_[static_cast<std::size_t>(i)] > counts_[static_cast<std::size_t>(best)]) best = i;
  }
  return best < 0 ? std::numeric_limits<double>::quiet_NaN() : center(best);
}

double finite_mean(std::span<const double> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

Interval bootstrap_mean_ci(std::span<const double> values, int resamples, std::uint64_t seed, double level) {
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (finite.empty()) return {nan, nan, nan};
  Interval out;
  out.estimate = finite_mean(finite);
  if (resamples < 1 || finite.size() == 1) {
    out.low = out.high = out.estimate;
    return out;
  }
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t k = 0; k < finite.size(); ++k) sum += finite[rng.below(finite.size())];
    m = sum / static_cast<double>(finite.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, means.size() - 1);
    return means[i] + (pos - static_cast<double>(i)) * (means[j] - means[i]);
  };
  out.low = at(tail);
  out.high = at(1.0 - tail);
  return out;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace deps
