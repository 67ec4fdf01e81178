#include "wdro/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "wdro/error.hpp"
#include "wdro/lp.hpp"

namespace wdro {

void DiscreteDist::validate() const {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative atom weight");
    total += a.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "atom weights sum to " + std::to_string(total));
}

DiscreteDist empirical(std::span<const LabeledSample> data) {
  DiscreteDist d;
  const double w = 1.0 / static_cast<double>(data.size());
  for (const auto& s : data) d.atoms.push_back({s.x, s.y, w});
  return d;
}

DiscreteDist to_discrete(const AdvDistribution& dist) {
  DiscreteDist d;
  for (const auto& p : dist.pairs) d.atoms.push_back({p.anchor.x, p.anchor.y, dist.anchor_weight()});
  for (const auto& p : dist.pairs) d.atoms.push_back({p.adv, p.anchor.y, dist.adv_weight()});
  return d;
}

DiscreteDist to_discrete(const WorstCaseDistribution& dist) {
  DiscreteDist d;
  for (const auto& a : dist.atoms()) d.atoms.push_back({a.x, a.y, a.weight});
  return d;
}

double canonical_cost(std::span<const MovedMass> moves, NormKind r) {
  double total = 0.0;
  for (const auto& m : moves) {
    if (m.mass == 0.0) continue;
    if (m.from_label != m.to_label)
      throw Error(ErrorCode::LabelMismatch, "coupling moves mass between labels");
    total += m.mass * vec_norm(*m.to - *m.from, r);
  }
  return total;
}

double canonical_cost(const AdvDistribution& dist, NormKind r) {
  std::vector<MovedMass> moves;
  for (const auto& p : dist.pairs)
    moves.push_back({&p.anchor.x, p.anchor.y, &p.adv, p.anchor.y, dist.adv_weight()});
  return canonical_cost(moves, r);
}

double canonical_cost(const WorstCaseDistribution& dist, NormKind r) {
  const auto& root = dist.base[dist.root];
  const MovedMass m{&root.x, root.y, &dist.perturbed.x, dist.perturbed.y,
                    dist.eta / static_cast<double>(dist.base.size())};
  return canonical_cost(std::span<const MovedMass>(&m, 1), r);
}

Coupling optimal_coupling(const DiscreteDist& p, const DiscreteDist& q, NormKind r) {
  if (p.atoms.size() > kMaxExactAtoms || q.atoms.size() > kMaxExactAtoms)
    throw Error(ErrorCode::DimensionTooLarge, "exact transport is limited to 64 atoms per side");
  std::map<std::size_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < p.atoms.size(); ++i)
    if (p.atoms[i].weight > 0.0) groups[p.atoms[i].y].first.push_back(i);
  for (std::size_t j = 0; j < q.atoms.size(); ++j)
    if (q.atoms[j].weight > 0.0) groups[q.atoms[j].y].second.push_back(j);

  Coupling out;
  for (const auto& [label, members] : groups) {
    const auto& [src, dst] = members;
    double mp = 0.0, mq = 0.0;
    for (auto i : src) mp += p.atoms[i].weight;
    for (auto j : dst) mq += q.atoms[j].weight;
    if (std::fabs(mp - mq) > 1e-12) {
      out.cost = std::numeric_limits<double>::infinity();
      out.flows.clear();
      return out;
    }
    const std::size_t m = src.size(), n = dst.size();
    LpProblem lp;
    lp.objective = Vec(m * n);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < n; ++b)
        lp.objective[a * n + b] = -vec_norm(q.atoms[dst[b]].x - p.atoms[src[a]].x, r);
    for (std::size_t a = 0; a < m; ++a) {
      Vec row(m * n);
      for (std::size_t b = 0; b < n; ++b) row[a * n + b] = 1.0;
      lp.constraints.push_back({std::move(row), Relation::Equal, p.atoms[src[a]].weight});
    }
    for (std::size_t b = 0; b < n; ++b) {
      Vec row(m * n);
      for (std::size_t a = 0; a < m; ++a) row[a * n + b] = 1.0;
      lp.constraints.push_back({std::move(row), Relation::Equal, q.atoms[dst[b]].weight});
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
      throw Error(ErrorCode::InvalidArgument, "transportation LP returned " +
                                                  std::string(to_string(sol.status)));
    out.cost -= sol.value;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (sol.x[a * n + b] > 0.0) out.flows.push_back({src[a], dst[b], sol.x[a * n + b]});
  }
  return out;
}

double exact_w1_small(const DiscreteDist& p, const DiscreteDist& q, NormKind r) {
  return optimal_coupling(p, q, r).cost;
}

double w1_1d(std::span<const double> xp, std::span<const double> wp, std::span<const double> xq,
             std::span<const double> wq) {
  if (xp.size() != wp.size() || xq.size() != wq.size())
    throw Error(ErrorCode::DimensionMismatch, "points and weights differ in length");
  // Signed mass events: +w for p, -w for q; the CDF gap is their running sum.
  std::vector<std::pair<double, double>> events;
  for (std::size_t i = 0; i < xp.size(); ++i) events.emplace_back(xp[i], wp[i]);
  for (std::size_t i = 0; i < xq.size(); ++i) events.emplace_back(xq[i], -wq[i]);
  std::sort(events.begin(), events.end());
  double gap = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    gap += events[i].second;
    total += std::fabs(gap) * (events[i + 1].first - events[i].first);
  }
  return total;
}

}  // namespace wdro
