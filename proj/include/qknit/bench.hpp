#pragma once

// Randomized benchmarks: overhead statistics over Haar-random two-qubit gate
// pairs and the cphase trade-off sweep, with reproducible CSV output.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qknit/bounds.hpp"
#include "qknit/schmidt.hpp"

namespace qknit {

// Haar-distributed unitary: Ginibre ensemble + QR with phase correction.
inline Matrix haar_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = Cplx(n(rng), n(rng));
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

struct BenchManifest {
  std::string name;
  std::uint64_t seed = 0;
  int samples = 0;
  int bins = 0;
  std::vector<std::pair<std::string, double>> extra;  // summary stats

  std::string to_line() const {
    std::ostringstream os;
    os.precision(12);
    os << "# manifest: seed=" << seed << ",samples=" << samples;
    if (bins > 0) os << ",bins=" << bins;
    os << ",name=" << name;
    for (const auto& [k, v] : extra) os << "," << k << "=" << v;
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Overhead histogram over pairs of Haar-random two-qubit gates cut in
// parallel across the same bipartition.

struct PairOverheadSample {
  double gamma_bell = 0;
  double gamma_free = 0;
  double ratio = 0;  // gamma_bell / gamma_free
};

struct PairOverheadResult {
  BenchManifest manifest;
  std::vector<PairOverheadSample> samples;
  // shared fixed-width bins over [1, max observed gamma_free]
  double bin_width = 0;
  std::vector<double> bin_left;
  std::vector<double> density_free;
  std::vector<double> density_bell;
  double mean_free = 0, median_free = 0;
  double mean_bell = 0, median_bell = 0;
  double median_ratio = 0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace detail

inline PairOverheadResult pair_overhead_histogram(int n_samples, std::uint64_t seed,
                                                  int bins = 64) {
  if (n_samples <= 0) throw ValidationError("pair_overhead_histogram: need positive sample count");
  if (bins <= 0) throw ValidationError("pair_overhead_histogram: need positive bin count");
  PairOverheadResult res;
  res.manifest = {"pair_overhead", seed, n_samples, bins, {}};
  res.samples.reserve(n_samples);
  std::mt19937_64 rng(seed);
  std::vector<double> frees, bells, ratios;
  frees.reserve(n_samples);
  bells.reserve(n_samples);
  ratios.reserve(n_samples);
  double max_free = 1;
  for (int s = 0; s < n_samples; ++s) {
    auto lu = operator_schmidt_values(haar_unitary(4, rng), 2, 2);
    auto lv = operator_schmidt_values(haar_unitary(4, rng), 2, 2);
    double l1u = 0, l1v = 0;
    for (double l : lu) l1u += l;
    for (double l : lv) l1v += l;
    PairOverheadSample smp;
    // parallel cut: Schmidt coefficients multiply, so the 1-norms do too
    smp.gamma_bell = l1u * l1u * l1v * l1v;
    smp.gamma_free = 2 * smp.gamma_bell - 1;
    smp.ratio = smp.gamma_bell / smp.gamma_free;
    frees.push_back(smp.gamma_free);
    bells.push_back(smp.gamma_bell);
    ratios.push_back(smp.ratio);
    max_free = std::max(max_free, smp.gamma_free);
    res.mean_free += smp.gamma_free;
    res.mean_bell += smp.gamma_bell;
    res.samples.push_back(smp);
  }
  res.mean_free /= n_samples;
  res.mean_bell /= n_samples;
  res.median_free = detail::median_of(frees);
  res.median_bell = detail::median_of(bells);
  res.median_ratio = detail::median_of(ratios);

  res.bin_width = (max_free - 1.0) / bins;
  if (res.bin_width <= 0) res.bin_width = 1.0;  // all samples at gamma = 1
  res.bin_left.resize(bins);
  res.density_free.assign(bins, 0.0);
  res.density_bell.assign(bins, 0.0);
  for (int b = 0; b < bins; ++b) res.bin_left[b] = 1.0 + b * res.bin_width;
  auto bin_of = [&](double g) {
    int b = int((g - 1.0) / res.bin_width);
    return std::min(std::max(b, 0), bins - 1);
  };
  const double w = 1.0 / (double(n_samples) * res.bin_width);
  for (const auto& s : res.samples) {
    res.density_free[bin_of(s.gamma_free)] += w;
    res.density_bell[bin_of(s.gamma_bell)] += w;
  }
  res.manifest.extra = {{"bin_width", res.bin_width},
                        {"mean_free", res.mean_free},
                        {"median_free", res.median_free},
                        {"mean_bell", res.mean_bell},
                        {"median_bell", res.median_bell},
                        {"median_ratio", res.median_ratio}};
  return res;
}

inline void write_csv(std::ostream& os, const PairOverheadResult& r) {
  os << r.manifest.to_line() << "\n";
  os << "gamma_free_bin_left,density_free,density_bell\n";
  os.precision(10);
  for (size_t b = 0; b < r.bin_left.size(); ++b)
    os << r.bin_left[b] << "," << r.density_free[b] << "," << r.density_bell[b] << "\n";
}

// ---------------------------------------------------------------------------
// cphase sweep

struct CphaseSweepResult {
  BenchManifest manifest;
  std::vector<CphaseTradeoff> rows;
  double breakeven_theta = 0;  // where expected_bells_paper crosses 1
};

inline CphaseSweepResult cphase_sweep(const std::vector<double>& theta_grid) {
  if (theta_grid.empty()) throw ValidationError("cphase_sweep: empty grid");
  CphaseSweepResult res;
  res.manifest = {"cphase_sweep", 0, int(theta_grid.size()), 0, {}};
  for (double theta : theta_grid) res.rows.push_back(cphase_tradeoff(theta));
  res.breakeven_theta = cphase_breakeven_angle();
  res.manifest.extra = {{"breakeven_theta", res.breakeven_theta}};
  return res;
}

// Uniform grid over [0, pi].
inline CphaseSweepResult cphase_sweep(int n_points) {
  if (n_points < 2) throw ValidationError("cphase_sweep: need at least two points");
  std::vector<double> grid(n_points);
  for (int i = 0; i < n_points; ++i) grid[i] = M_PI * i / (n_points - 1);
  return cphase_sweep(grid);
}

inline void write_csv(std::ostream& os, const CphaseSweepResult& r) {
  os << r.manifest.to_line() << "\n";
  os << "theta,gamma_free,gamma_bell,p_bell,expected_bells_svd,expected_bells_paper\n";
  os.precision(10);
  for (const auto& row : r.rows)
    os << row.theta << "," << row.gamma_free << "," << row.gamma_bell << "," << row.p_bell << ","
       << row.expected_bells_svd << "," << row.expected_bells_paper << "\n";
}

}  // namespace qknit
