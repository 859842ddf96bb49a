#include "edicke/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edicke/error.hpp"

namespace edicke {

namespace {

void check_spec(const HistogramSpec& spec) {
  if (spec.bins < 1) throw Error(ErrorCode::InvalidParams, "histogram needs >= 1 bin");
  if (!(spec.hi > spec.lo)) throw Error(ErrorCode::DegenerateRange, "histogram range is empty");
}

// -1 when outside [lo, hi].
inline long bin_of(double v, const HistogramSpec& spec, double inv_width) {
  if (!(v >= spec.lo && v <= spec.hi)) return -1;
  const auto idx = static_cast<long>((v - spec.lo) * inv_width);
  return std::min<long>(idx, spec.bins - 1);
}

}  // namespace

std::uint64_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double Histogram::integral() const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    sum += densities[i] * (edges[i + 1] - edges[i]);
  }
  return sum;
}

std::vector<std::uint64_t> histogram_counts_serial(std::span<const double> values,
                                                   const HistogramSpec& spec) {
  check_spec(spec);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(spec.bins), 0);
  const double inv_width = spec.bins / (spec.hi - spec.lo);
  for (double v : values) {
    const long b = bin_of(v, spec, inv_width);
    if (b >= 0) ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

std::vector<std::uint64_t> histogram_counts(std::span<const double> values,
                                            const HistogramSpec& spec) {
  check_spec(spec);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(spec.bins), 0);
  const double inv_width = spec.bins / (spec.hi - spec.lo);
  std::uint64_t* c = counts.data();
  const double* v = values.data();
  const auto n = static_cast<long>(values.size());
  const int bins = spec.bins;
#pragma omp parallel for reduction(+ : c[:bins]) schedule(static)
  for (long i = 0; i < n; ++i) {
    const long b = bin_of(v[i], spec, inv_width);
    if (b >= 0) ++c[b];
  }
  return counts;
}

Histogram make_histogram(std::span<const double> values, const HistogramSpec& spec) {
  Histogram h;
  h.counts = histogram_counts(values, spec);
  const std::uint64_t inside = h.total();
  if (inside == 0) throw Error(ErrorCode::EmptySample, "no sample inside the histogram range");
  h.n_outside = values.size() - inside;
  h.edges.resize(static_cast<std::size_t>(spec.bins) + 1);
  for (int i = 0; i < spec.bins; ++i) h.edges[static_cast<std::size_t>(i)] = spec.lo + i * spec.width();
  h.edges.back() = spec.hi;
  h.densities.resize(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double width = h.edges[i + 1] - h.edges[i];
    h.densities[i] = static_cast<double>(h.counts[i]) / (static_cast<double>(inside) * width);
  }
  return h;
}

}  // namespace edicke
