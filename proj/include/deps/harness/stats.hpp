#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace deps {

/// Fixed-width histogram on [lo, hi]; the right edge falls in the last bin.
class Histogram {
 public:
  Histogram(double lo, double hi, int bins);

  void add(double x, double weight = 1.0);
  void merge(const Histogram& other);

  int bins() const { return static_cast<int>(counts_.size()); }
  double width() const { return (hi_ - lo_) / bins(); }
  double lower_edge(int i) const { return lo_ + i * width(); }
  double center(int i) const { return lo_ + (i + 0.5) * width(); }
  double count(int i) const { return counts_[i]; }
  double total() const { return total_; }

  /// Count / (total * width); zero everywhere for an empty histogram.
  double density(int i) const;
  /// Density interpolated linearly between bin centers.
  double density_at(double x) const;
  /// Center of the fullest bin among those with centers in [from, to].
  double mode_between(double from, double to) const;

 private:
  double lo_;
  double hi_;
  std::vector<double> counts_;
  double total_ = 0.0;
};

struct Interval {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Mean of the finite values with a percentile-bootstrap interval of the
/// mean; NaN everywhere if no value is finite.
Interval bootstrap_mean_ci(std::span<const double> values, int resamples, std::uint64_t seed,
                           double level = 0.95);

double finite_mean(std::span<const double> values);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 picks the
/// hardware concurrency). Each index must only write its own output slot.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

/// Fixed-precision text form used in every CSV so reruns are byte-identical.
std::string format_number(double x);

}  // namespace deps
