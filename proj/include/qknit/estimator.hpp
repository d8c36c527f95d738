#pragma once

// Monte-Carlo estimation of observables through a quasi-probability
// decomposition, shot budgeting, and a locality audit of the sampled
// protocols.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qknit/qpd.hpp"

namespace qknit {

// Hermitian observable with a declared spectral-norm bound (used for shot
// budgeting). The default constructor-from-matrix sets the bound to the
// computed spectral norm.
struct Observable {
  Matrix matrix;
  double bound = 1;

  Observable() = default;
  explicit Observable(Matrix m) : matrix(std::move(m)) {
    check();
    bound = spectral_norm();
  }
  Observable(Matrix m, double b) : matrix(std::move(m)), bound(b) {
    check();
    if (bound < spectral_norm() - 1e-8)
      throw ValidationError("Observable: declared bound below the spectral norm");
  }

  double spectral_norm() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
    double n = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      n = std::max(n, std::abs(es.eigenvalues()(i)));
    return n;
  }

 private:
  void check() const {
    if (!is_hermitian(matrix, kDefaultTol))
      throw ValidationError("Observable: matrix is not Hermitian");
  }
};

// ---------------------------------------------------------------------------
// Exact expectation through the decomposition

inline double exact_expectation(const Superoperator& s, const Matrix& rho_in, const Matrix& obs) {
  Matrix out = devectorize(apply(s, vectorize(rho_in)));
  return std::real((obs * out).trace());
}

inline double exact_expectation(const QpdConfig& c, const Matrix& rho_in, const Matrix& obs) {
  return exact_expectation(reconstruct_superop(c), rho_in, obs);
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimator

enum class EstimateMode {
  Sampled,       // sample term, branch, and observable eigenvalue
  TermAnalytic,  // sample term, average its branches analytically
};

struct EstimateResult {
  double mean = 0;
  double std_error = 0;
  std::int64_t shots = 0;
  double gamma = 0;
  std::uint64_t seed = 0;
  std::map<int, std::int64_t> branch_counts;  // term index -> samples drawn
};

// Hoeffding shot budget for |estimate - truth| <= epsilon with probability
// 1 - delta, single-shot values bounded by gamma * bound.
struct ShotPlan {
  double epsilon = 0;
  double delta = 0;
  std::int64_t shots = 0;
};

inline ShotPlan shots_for(double gamma, double epsilon, double delta, double bound = 1.0) {
  if (gamma < 1 || bound <= 0 || epsilon <= 0 || delta <= 0 || delta >= 1)
    throw ValidationError("shots_for: invalid parameters");
  double raw = 2.0 * gamma * gamma * bound * bound * std::log(2.0 / delta) / (epsilon * epsilon);
  ShotPlan p;
  p.epsilon = epsilon;
  p.delta = delta;
  if (!std::isfinite(raw)) throw ValidationError("shots_for: shot budget overflows");
  p.shots = std::max<std::int64_t>(1, std::int64_t(std::ceil(raw)));
  return p;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e9b5ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic per-shot generator: independent of how many draws other
// shots consume.
inline std::mt19937_64 shot_rng(std::uint64_t seed, std::int64_t shot) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ std::uint64_t(shot)));
}

struct PreparedBranch {
  double sign = 1;
  double prob = 0;                  // Born probability of this branch
  double signed_value = 0;          // sign * tr(O K rho K†)
  std::vector<double> eig_cdf;      // cumulative eigenvalue distribution
};

struct PreparedTerm {
  double prob = 0;
  std::vector<PreparedBranch> branches;
  double analytic_value = 0;  // sum of signed branch values
};

}  // namespace detail

inline EstimateResult mc_estimate(const QpdConfig& c, const Matrix& rho_in, const Matrix& obs,
                                  std::int64_t shots, std::uint64_t seed,
                                  EstimateMode mode = EstimateMode::Sampled) {
  if (!c.constructive) throw UnsupportedError("mc_estimate: config is not constructive");
  if (shots <= 0) throw ValidationError("mc_estimate: shot count must be positive");
  if (!is_hermitian(obs, 1e-8)) throw ValidationError("mc_estimate: observable not Hermitian");
  const int dout = dim_of(c.out_space);
  if (int(obs.rows()) != dout || int(rho_in.rows()) != dim_of(c.in_space))
    throw DimensionError("mc_estimate: shape mismatch");

  Eigen::SelfAdjointEigenSolver<Matrix> es(obs);
  const auto& evals = es.eigenvalues();
  const auto& evecs = es.eigenvectors();

  std::vector<detail::PreparedTerm> prepared;
  prepared.reserve(c.terms.size());
  for (const auto& t : c.terms) {
    detail::PreparedTerm pt;
    pt.prob = t.probability;
    for (const auto& br : expand_term(t, c.in_space)) {
      detail::PreparedBranch pb;
      pb.sign = br.sign;
      Matrix post = br.k * rho_in * br.k.adjoint();
      pb.prob = std::real(post.trace());
      double cum = 0;
      pb.eig_cdf.resize(evals.size());
      double value = 0;
      for (int i = 0; i < evals.size(); ++i) {
        double pi = std::max(0.0, std::real((evecs.col(i).adjoint() * post * evecs.col(i))(0)));
        value += evals(i) * pi;
        cum += pi;
        pb.eig_cdf[i] = cum;
      }
      pb.signed_value = pb.sign * value;
      pt.analytic_value += pb.signed_value;
      pt.branches.push_back(std::move(pb));
    }
    prepared.push_back(std::move(pt));
  }

  double sum = 0, sumsq = 0;
  std::map<int, std::int64_t> counts;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::int64_t shot = 0; shot < shots; ++shot) {
    auto rng = detail::shot_rng(seed, shot);
    // pick a term
    double u = unif(rng), cum = 0;
    int term_idx = int(prepared.size()) - 1;
    for (int ti = 0; ti < int(prepared.size()); ++ti) {
      cum += prepared[ti].prob;
      if (u <= cum) {
        term_idx = ti;
        break;
      }
    }
    const detail::PreparedTerm* term = &prepared[term_idx];
    ++counts[term_idx];
    double value;
    if (mode == EstimateMode::TermAnalytic) {
      value = c.gamma * term->analytic_value;
    } else {
      // pick a branch by its Born probability
      double ub = unif(rng) * std::max(1e-300, [&] {
        double q = 0;
        for (const auto& b : term->branches) q += b.prob;
        return q;
      }());
      double cb = 0;
      const detail::PreparedBranch* branch = &term->branches.back();
      for (const auto& b : term->branches) {
        cb += b.prob;
        if (ub <= cb) {
          branch = &b;
          break;
        }
      }
      // pick an eigenvalue of the observable in the post-branch state
      double total = branch->eig_cdf.empty() ? 0 : branch->eig_cdf.back();
      double ue = unif(rng) * std::max(1e-300, total);
      int idx = int(std::lower_bound(branch->eig_cdf.begin(), branch->eig_cdf.end(), ue) -
                    branch->eig_cdf.begin());
      if (idx >= int(branch->eig_cdf.size())) idx = int(branch->eig_cdf.size()) - 1;
      value = c.gamma * branch->sign * evals(idx);
    }
    sum += value;
    sumsq += value * value;
  }

  EstimateResult r;
  r.shots = shots;
  r.gamma = c.gamma;
  r.seed = seed;
  r.branch_counts = std::move(counts);
  r.mean = sum / double(shots);
  double var = std::max(0.0, sumsq / double(shots) - r.mean * r.mean);
  r.std_error = std::sqrt(var / double(shots));
  return r;
}

inline EstimateResult mc_estimate(const QpdConfig& c, const Matrix& rho_in, const Observable& obs,
                                  const ShotPlan& plan, std::uint64_t seed,
                                  EstimateMode mode = EstimateMode::Sampled) {
  return mc_estimate(c, rho_in, obs.matrix, plan.shots, seed, mode);
}

// ---------------------------------------------------------------------------
// Locality audit

struct LocalityAudit {
  bool nonlocal_ops = false;         // some stage could not be split across the cut
  bool classical_comm = false;       // corrections or repreparation cross the cut
  int classical_bits = 0;            // worst case bits communicated per sample
  bool entanglement_assisted = false;
  std::optional<int> offending_term;  // first term with a non-factorizable op
  std::string regime() const {
    if (nonlocal_ops) return "nonlocal";
    return classical_comm ? "LOCC" : "LO";
  }
};

namespace detail {

// Whether an operator on dl ⊗ dr factorizes as L ⊗ R.
inline bool factorizes(const Matrix& u, int dl, int dr) {
  Matrix r = reshuffle(u, dl, dr);
  Eigen::JacobiSVD<Matrix> svd(r);
  return svd.singularValues().size() < 2 || svd.singularValues()(1) <= 1e-8;
}

// Split a factor range at the A/B side boundary; returns false when the sides
// interleave.
inline bool side_split(const Space& s, int first, int count, int& dl, int& dr, bool& spans) {
  dl = dr = 1;
  bool seen_b = false;
  for (int i = first; i < first + count; ++i) {
    if (on_side_a(s[i].party)) {
      if (seen_b) return false;
      dl *= s[i].dim;
    } else {
      seen_b = true;
      dr *= s[i].dim;
    }
  }
  spans = (dl > 1 && dr > 1) || (seen_b && dl > 1);
  return true;
}

}  // namespace detail

inline LocalityAudit locality_audit(const QpdConfig& c) {
  LocalityAudit audit;
  if (!c.constructive) {
    audit.entanglement_assisted = c.resource.is_pure() && c.resource.kind != ResourceState::Kind::Separable;
    return audit;
  }
  for (int ti = 0; ti < int(c.terms.size()); ++ti) {
    const auto& t = c.terms[ti];
    const bool was_local = !audit.nonlocal_ops;
    int bits = 0;
    Space sp = c.in_space;
    for (const auto& stage : t.stages) {
      if (const auto* op = std::get_if<OpStage>(&stage)) {
        int dl, dr;
        bool spans = false;
        if (!detail::side_split(sp, op->first, op->count, dl, dr, spans))
          audit.nonlocal_ops = true;
        else if (spans && !detail::factorizes(op->u, dl, dr))
          audit.nonlocal_ops = true;
      } else if (const auto* ins = std::get_if<InsertStage>(&stage)) {
        if (ins->entangled) audit.entanglement_assisted = true;
        Space nsp(sp.begin(), sp.begin() + ins->position);
        nsp.insert(nsp.end(), ins->ins_space.begin(), ins->ins_space.end());
        nsp.insert(nsp.end(), sp.begin() + ins->position, sp.end());
        sp = std::move(nsp);
      } else if (const auto* ms = std::get_if<MeasureStage>(&stage)) {
        int dl, dr;
        bool spans = false;
        bool ok = detail::side_split(sp, ms->first, ms->count, dl, dr, spans);
        if (!ok) audit.nonlocal_ops = true;
        const bool measured_side_a = on_side_a(sp[ms->first].party);
        Space nsp(sp.begin(), sp.begin() + ms->first);
        nsp.insert(nsp.end(), sp.begin() + ms->first + ms->count, sp.end());
        bool comm = false;
        for (const auto& out : ms->outcomes) {
          if (ok && spans && !detail::factorizes(out.effect, dl, dr)) audit.nonlocal_ops = true;
          for (int i = out.corr_first; i < out.corr_first + out.corr_count; ++i)
            if (out.corr_count > 0 && on_side_a(nsp[i].party) != measured_side_a) comm = true;
        }
        if (comm) {
          audit.classical_comm = true;
          bits += int(std::ceil(std::log2(double(ms->outcomes.size()))));
        }
        sp = std::move(nsp);
      } else if (const auto* is = std::get_if<InstrumentStage>(&stage)) {
        if (is->classical_bits > 0) {
          audit.classical_comm = true;
          bits += is->classical_bits;
        }
        if (is->relabel)
          for (int i = is->first; i < is->first + is->count; ++i) sp[i].party = *is->relabel;
      }
    }
    if (was_local && audit.nonlocal_ops && !audit.offending_term) audit.offending_term = ti;
    audit.classical_bits = std::max(audit.classical_bits, bits);
  }
  return audit;
}

}  // namespace qknit
