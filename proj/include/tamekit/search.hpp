#pragma once

// Randomized and descent-driven exploration of whether j(sum t_i J_i) stays
// omega-tame when the vertices J_i are only omega-tame. The tool reports
// evidence; it never turns a probe value into a verdict on the question itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tamekit/extended.hpp"
#include "tamekit/interpolation.hpp"
#include "tamekit/parallel.hpp"
#include "tamekit/sampling.hpp"

namespace tamekit {

enum class SearchMode { random, descent, hybrid };

inline const char* to_string(SearchMode m) {
  switch (m) {
    case SearchMode::random: return "random";
    case SearchMode::descent: return "descent";
    case SearchMode::hybrid: return "hybrid";
  }
  return "?";
}

inline SearchMode parse_search_mode(const std::string& s) {
  if (s == "random") return SearchMode::random;
  if (s == "descent") return SearchMode::descent;
  if (s == "hybrid") return SearchMode::hybrid;
  throw ParseError("unknown search mode '" + s + "'");
}

struct SearchCampaign {
  int dim = 4;
  int k = 2;
  SearchMode mode = SearchMode::random;
  std::uint64_t seed = 42;
  std::size_t trials = 1000;
  double margin_floor = 1e-3;
  double candidate_threshold = 1e-6;
  bool compatible_only = false;
  double conjugator_scale = 0.6;
  int rejection_budget = 1000;
  // descent
  int descent_steps = 40;
  double descent_step = 0.25;
  double descent_shrink = 0.5;
  int descent_max_shrinks = 20;
  double simplex_floor = 1e-3;
  // hybrid: number of best random trials refined by descent
  std::size_t hybrid_starts = 8;

  void validate() const {
    if (dim < 4 || dim > 12 || dim % 2 != 0) {
      throw DomainError("campaign_dim", "dim must be even in [4, 12], got " + std::to_string(dim));
    }
    if (k < 1 || k > 4) {
      throw DomainError("campaign_k", "k must be in [1, 4], got " + std::to_string(k));
    }
    if (trials < 1) throw DomainError("campaign_trials", "trials must be >= 1");
    if (!(margin_floor > 0.0)) {
      throw DomainError("campaign_margin_floor", "margin floor must be positive");
    }
    if (!(simplex_floor >= 0.0) || simplex_floor * k >= 1.0) {
      throw DomainError("campaign_simplex_floor", "simplex floor must lie in [0, 1/k)");
    }
    if (!(descent_shrink > 0.0 && descent_shrink < 1.0)) {
      throw DomainError("campaign_shrink", "descent shrink must lie in (0, 1)");
    }
  }
};

enum class Verdict { confirmed, refuted, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::confirmed: return "confirmed";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct Verification {
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
  double extended_objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> extended_vertex_margins;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::string mode = "random";
  std::vector<double> t;
  std::vector<Matrix> vertices;
  std::vector<Matrix> conjugators;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> vertex_margins;
  int attempts = 0;
  std::vector<double> history;  // objective after each accepted descent step
  std::string error;
  std::optional<Verification> verification;

  double min_vertex_margin() const {
    return vertex_margins.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : *std::min_element(vertex_margins.begin(), vertex_margins.end());
  }
};

struct CampaignReport {
  SearchCampaign config;
  Matrix omega;
  std::vector<TrialRecord> records;
  double global_min = std::numeric_limits<double>::quiet_NaN();
  std::size_t argmin = 0;
  std::vector<std::size_t> candidates;  // indices into records
  double acceptance_rate = 0.0;

  std::size_t count(Verdict v) const {
    return static_cast<std::size_t>(std::count_if(candidates.begin(), candidates.end(), [&](std::size_t i) {
      return records[i].verification && records[i].verification->verdict == v;
    }));
  }
};

// Recomputes a record at extended precision. Confirmed requires every vertex
// margin and minus the objective to exceed ten times the working-precision
// noise floor.
inline Verification verify_candidate(const Matrix& omega, const TrialRecord& rec) {
  Verification out;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double jmax = 0.0;
  for (const auto& v : rec.vertices) jmax = std::max(jmax, v.norm());
  const double noise = 10.0 * eps * linalg::scale(omega.norm() * jmax);

  const ExtendedMatrix om = to_extended(omega);
  bool margins_clear = true;
  for (std::size_t i = 0; i < rec.vertices.size(); ++i) {
    const ExtendedReal margin = extended_taming_margin(om, to_extended(rec.vertices[i]));
    out.extended_vertex_margins.push_back(static_cast<double>(margin));
    if (margin <= 0) {
      out.verdict = Verdict::refuted;
      out.reason = "vertex " + std::to_string(i) + " is not omega-tame at extended precision";
      return out;
    }
    if (margin <= noise) margins_clear = false;
  }
  if (rec.vertices.empty() || rec.vertices.size() != rec.t.size()) {
    out.reason = "record has no usable vertices";
    return out;
  }
  if (!(rec.objective < -noise)) {
    out.reason = "objective within the working-precision noise floor";
    return out;
  }

  const Eigen::Index m = omega.rows();
  ExtendedMatrix b = ExtendedMatrix::Zero(m, m);
  for (std::size_t i = 0; i < rec.vertices.size(); ++i) {
    b += ExtendedReal(rec.t[i]) * to_extended(rec.vertices[i]);
  }
  ExtendedMatrix j;
  try {
    j = retraction_newton<ExtendedReal>(b, ExtendedReal(1e-30));
  } catch (const ConvergenceError&) {
    out.reason = "j(B_t) did not converge at extended precision";
    return out;
  }
  const ExtendedReal obj = extended_taming_margin(om, j);
  out.extended_objective = static_cast<double>(obj);
  if (margins_clear && obj < -noise) {
    out.verdict = Verdict::confirmed;
    out.reason = "negative probe reproduced at extended precision";
  } else if (obj > noise) {
    out.verdict = Verdict::refuted;
    out.reason = "extended-precision probe is positive";
  } else {
    out.reason = "extended-precision probe within the noise floor";
  }
  return out;
}

namespace detail {

// Objective over (conjugator parameters, simplex logits) used by descent.
class ProbeObjective {
 public:
  ProbeObjective(const SearchCampaign& cfg, const SkewForm& omega, const Tolerance& tol)
      : cfg_(cfg), omega_(omega), tol_(tol),
        j0_(reference_compatible_structure(omega, tol).matrix()) {
    const Eigen::Index m = omega.dim();
    block_ = cfg.compatible_only ? m * (m + 1) / 2 : m * m;
  }

  std::size_t size() const { return static_cast<std::size_t>(block_ * cfg_.k + cfg_.k); }

  Matrix conjugator(const Vector& p, int i) const {
    const Eigen::Index m = omega_.dim();
    const auto seg = p.segment(i * block_, block_);
    if (!cfg_.compatible_only) return Eigen::Map<const Matrix>(seg.data(), m, m);
    Matrix s(m, m);
    Eigen::Index c = 0;
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = a; b < m; ++b) s(a, b) = s(b, a) = seg(c++);
    }
    return cayley(omega_.matrix().partialPivLu().solve(s));
  }

  std::vector<double> simplex(const Vector& p) const {
    const int k = cfg_.k;
    const Vector logits = p.tail(k);
    const double mx = logits.maxCoeff();
    std::vector<double> t(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += (t[i] = std::exp(logits(i) - mx));
    const double floor = cfg_.simplex_floor;
    for (auto& x : t) x = floor + (1.0 - k * floor) * x / sum;
    return t;
  }

  // Fills the record fields and returns the objective (+inf when infeasible).
  double evaluate(const Vector& p, TrialRecord* rec = nullptr) const {
    std::vector<ComplexStructure> js;
    std::vector<double> margins;
    std::vector<Matrix> qs;
    try {
      for (int i = 0; i < cfg_.k; ++i) {
        const Matrix q = conjugator(p, i);
        Eigen::PartialPivLU<Matrix> lu(q);
        if (!(std::abs(lu.determinant()) > 1e-10)) return kInfinity;
        js.emplace_back(q * j0_ * lu.inverse(), tol_);
        margins.push_back(taming_margin(omega_, js.back()));
        if (!(margins.back() >= cfg_.margin_floor)) return kInfinity;
        qs.push_back(q);
      }
      const std::vector<double> t = simplex(p);
      const double value = taming_probe(js, SimplexPoint(t, 1e-8), omega_, tol_);
      if (rec != nullptr) {
        rec->t = t;
        rec->vertices.clear();
        for (const auto& j : js) rec->vertices.push_back(j.matrix());
        rec->conjugators = qs;
        rec->vertex_margins = margins;
        rec->objective = value;
      }
      return value;
    } catch (const Error&) {
      return kInfinity;
    }
  }

  Vector encode(const std::vector<Matrix>& conjugators, const std::vector<double>& t) const {
    const Eigen::Index m = omega_.dim();
    Vector p(size());
    for (int i = 0; i < cfg_.k; ++i) {
      const Matrix& q = conjugators[i];
      if (!cfg_.compatible_only) {
        p.segment(i * block_, block_) = Eigen::Map<const Vector>(q.data(), m * m);
      } else {
        // Inverse Cayley: X = 2 (Q - I)(Q + I)^{-1}, S = Omega X.
        const Matrix id = Matrix::Identity(m, m);
        const Matrix x = 2.0 * (q - id) * (q + id).inverse();
        const Matrix s = linalg::sym(omega_.matrix() * x);
        Eigen::Index c = 0;
        for (Eigen::Index a = 0; a < m; ++a) {
          for (Eigen::Index b = a; b < m; ++b) p(i * block_ + c++) = s(a, b);
        }
      }
    }
    for (int i = 0; i < cfg_.k; ++i) p(block_ * cfg_.k + i) = std::log(std::max(t[i], 1e-12));
    return p;
  }

 private:
  const SearchCampaign& cfg_;
  const SkewForm& omega_;
  const Tolerance& tol_;
  Matrix j0_;
  Eigen::Index block_;
};

inline Vector fd_gradient(const ProbeObjective& f, const Vector& p) {
  const double h = 1e-6 * (1.0 + p.norm());
  Vector g(p.size());
  Vector q = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    q(i) = p(i) + h;
    const double up = f.evaluate(q);
    q(i) = p(i) - h;
    const double down = f.evaluate(q);
    q(i) = p(i);
    if (std::isfinite(up) && std::isfinite(down)) {
      g(i) = (up - down) / (2.0 * h);
    } else {
      const double mid = f.evaluate(p);
      if (std::isfinite(up)) g(i) = (up - mid) / h;
      else if (std::isfinite(down)) g(i) = (mid - down) / h;
      else g(i) = 0.0;
    }
  }
  return g;
}

// Normalized-gradient descent with backtracking; records the objective after
// every accepted step, so the history is non-increasing.
inline void descend(const ProbeObjective& f, const SearchCampaign& cfg, Vector p, TrialRecord& rec) {
  double value = f.evaluate(p, &rec);
  rec.history.assign(1, value);
  if (!std::isfinite(value)) return;
  double alpha = cfg.descent_step;
  for (int step = 0; step < cfg.descent_steps; ++step) {
    const Vector g = fd_gradient(f, p);
    const double gn = g.norm();
    if (!(gn > 0.0) || !std::isfinite(gn)) break;
    bool accepted = false;
    for (int s = 0; s <= cfg.descent_max_shrinks; ++s) {
      const Vector trial = p - (alpha / gn) * g;
      const double v = f.evaluate(trial);
      if (std::isfinite(v) && v < value - 1e-4 * alpha * gn) {
        p = trial;
        value = v;
        accepted = true;
        alpha = std::min(cfg.descent_step, alpha / cfg.descent_shrink);
        break;
      }
      alpha *= cfg.descent_shrink;
    }
    if (!accepted) break;
    rec.history.push_back(value);
  }
  f.evaluate(p, &rec);
}

inline TrialRecord random_trial(const SearchCampaign& cfg, const SkewForm& omega, std::size_t index,
                                const Tolerance& tol) {
  TrialRecord rec;
  rec.trial = index;
  rec.mode = "random";
  Rng rng(derive_seed(cfg.seed, index));
  SamplerOptions opts;
  opts.margin_floor = cfg.margin_floor;
  opts.conjugator_scale = cfg.conjugator_scale;
  opts.budget = cfg.rejection_budget;
  opts.compatible_only = cfg.compatible_only;
  try {
    std::vector<ComplexStructure> js;
    for (int i = 0; i < cfg.k; ++i) {
      SampledStructure s = sample_tame_structure(omega, rng, opts, tol);
      rec.attempts += s.attempts;
      rec.vertex_margins.push_back(s.margin);
      rec.vertices.push_back(s.structure);
      rec.conjugators.push_back(s.conjugator);
      js.emplace_back(s.structure, tol);
    }
    rec.t = cfg.k == 1 ? std::vector<double>{1.0} : random_simplex(cfg.k, rng);
    rec.objective = taming_probe(js, SimplexPoint(rec.t, 1e-8), omega, tol);
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

inline TrialRecord descent_trial(const SearchCampaign& cfg, const SkewForm& omega,
                                 const TrialRecord& start, std::size_t index, const Tolerance& tol) {
  TrialRecord rec;
  rec.trial = index;
  rec.mode = "descent";
  rec.attempts = start.attempts;
  if (!start.error.empty() || start.conjugators.size() != static_cast<std::size_t>(cfg.k)) {
    rec.error = start.error.empty() ? "no feasible starting point" : start.error;
    return rec;
  }
  const ProbeObjective f(cfg, omega, tol);
  std::vector<double> t = start.t;
  for (auto& x : t) x = std::max(x, cfg.simplex_floor);
  descend(f, cfg, f.encode(start.conjugators, t), rec);
  if (!std::isfinite(rec.objective)) rec.error = "descent start is infeasible";
  return rec;
}

}  // namespace detail

inline CampaignReport run_campaign(const SearchCampaign& cfg,
                                   const Tolerance& tol = default_tolerance()) {
  cfg.validate();
  CampaignReport report;
  report.config = cfg;
  report.omega = linalg::standard_form(cfg.dim);
  const SkewForm omega(report.omega, tol);

  std::vector<TrialRecord> first(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t i) {
    TrialRecord start = detail::random_trial(cfg, omega, i, tol);
    first[i] = cfg.mode == SearchMode::descent ? detail::descent_trial(cfg, omega, start, i, tol)
                                               : std::move(start);
  });
  report.records = std::move(first);

  if (cfg.mode == SearchMode::hybrid) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      if (std::isfinite(report.records[i].objective)) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return report.records[a].objective < report.records[b].objective;
    });
    order.resize(std::min(order.size(), cfg.hybrid_starts));
    std::vector<TrialRecord> refined(order.size());
    parallel_for(order.size(), [&](std::size_t j) {
      refined[j] = detail::descent_trial(cfg, omega, report.records[order[j]], cfg.trials + j, tol);
    });
    for (auto& r : refined) report.records.push_back(std::move(r));
  }

  std::size_t sampled = 0;
  long attempts = 0;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    if (r.mode == "random" || cfg.mode == SearchMode::descent) {
      sampled += r.vertices.size();
      attempts += r.attempts;
    }
    if (std::isfinite(r.objective) && !(r.objective >= report.global_min)) {
      report.global_min = r.objective;
      report.argmin = i;
    }
  }
  report.acceptance_rate = attempts > 0 ? static_cast<double>(sampled) / attempts : 0.0;

  for (std::size_t i = 0; i < report.records.size(); ++i) {
    if (report.records[i].objective < -cfg.candidate_threshold) report.candidates.push_back(i);
  }
  parallel_for(report.candidates.size(), [&](std::size_t c) {
    auto& rec = report.records[report.candidates[c]];
    rec.verification = verify_candidate(report.omega, rec);
  });
  return report;
}

}  // namespace tamekit
