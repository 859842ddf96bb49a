#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace edicke {

/// Equal-width bins on [lo, hi]; the last bin is closed on the right.
struct HistogramSpec {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 10;

  double width() const noexcept { return (hi - lo) / bins; }
};

struct Histogram {
  std::vector<double> edges;         // bins + 1
  std::vector<double> densities;     // integrate to 1 over [lo, hi]
  std::vector<std::uint64_t> counts;
  std::uint64_t n_outside = 0;       // samples not in [lo, hi]

  std::uint64_t total() const noexcept;
  double integral() const noexcept;  // sum densities * bin width
};

/// Bin counts, OpenMP reduction over samples.
std::vector<std::uint64_t> histogram_counts(std::span<const double> values,
                                            const HistogramSpec& spec);
/// Serial reference for histogram_counts.
std::vector<std::uint64_t> histogram_counts_serial(std::span<const double> values,
                                                   const HistogramSpec& spec);

/// Throws EmptySample when no value falls inside the range.
Histogram make_histogram(std::span<const double> values, const HistogramSpec& spec);

}  // namespace edicke
