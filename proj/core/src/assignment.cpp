#include "ridepool/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace ridepool {

namespace {

struct DenseCandidate {
  std::vector<std::uint32_t> requests;
  double score;
  std::size_t index;  // position in the caller's candidate list
};

/// Candidates rewritten over dense request indices. Candidates that lose to
/// the vehicle's empty candidate by more than the tie tolerance can never be
/// part of an optimum and are dropped.
struct DenseProblem {
  std::size_t request_count = 0;
  std::vector<std::vector<DenseCandidate>> vehicles;
  std::vector<std::size_t> empty_index;  // first empty candidate per vehicle
};

DenseProblem densify(const AssignmentProblem& problem) {
  // |objective| never exceeds this, so the tie tolerance never exceeds 1e-9 of it.
  double scale = 1.0;
  for (const auto& vc : problem.vehicles) {
    double top = 0.0;
    for (const auto& c : vc.candidates) top = std::max(top, std::abs(c.score));
    scale += top;
  }
  const double slack = 1e-9 * scale;

  DenseProblem dense;
  std::unordered_map<RequestId, std::uint32_t> index;
  for (const auto& vc : problem.vehicles) {
    const auto empty_it = std::find_if(vc.candidates.begin(), vc.candidates.end(),
                                       [](const Candidate& c) { return c.requests.empty(); });
    const double floor = empty_it->score - slack;
    std::vector<DenseCandidate> cands;
    std::size_t empty = 0;
    for (std::size_t i = 0; i < vc.candidates.size(); ++i) {
      const auto& c = vc.candidates[i];
      if (!c.requests.empty() && c.score < floor) continue;
      if (&c == &*empty_it) empty = cands.size();
      DenseCandidate d{{}, c.score, i};
      for (const auto r : c.requests) {
        auto [it, inserted] = index.emplace(r, static_cast<std::uint32_t>(index.size()));
        d.requests.push_back(it->second);
      }
      cands.push_back(std::move(d));
    }
    dense.empty_index.push_back(empty);
    dense.vehicles.push_back(std::move(cands));
  }
  dense.request_count = index.size();
  return dense;
}

// Objectives within a relative 1e-9 count as tied; ties go to the
// lexicographically smaller choice vector.
bool better_or_tied_earlier(double value, const std::vector<std::size_t>& choice, double best,
                            const std::vector<std::size_t>& best_choice) {
  if (!std::isfinite(best)) return true;
  const double tol = 1e-9 * std::max(1.0, std::abs(best));
  if (value > best + tol) return true;
  return value >= best - tol && choice < best_choice;
}

class BranchAndBound {
 public:
  BranchAndBound(const DenseProblem& p, std::vector<std::size_t> group)
      : p_(p), group_(std::move(group)), used_(p.request_count, 0) {}

  std::vector<std::size_t> run() {
    // Greedy warm start: always feasible because every vehicle has an empty candidate.
    best_choice_.clear();
    for (const auto v : group_) {
      std::size_t pick = p_.empty_index[v];
      double pick_score = p_.vehicles[v][pick].score;
      for (std::size_t c = 0; c < p_.vehicles[v].size(); ++c) {
        const auto& cand = p_.vehicles[v][c];
        if (compatible(cand) && cand.score > pick_score) {
          pick = c;
          pick_score = cand.score;
        }
      }
      take(p_.vehicles[v][pick], 1);
      best_choice_.push_back(pick);
    }
    best_ = total(best_choice_);
    for (std::size_t k = 0; k < group_.size(); ++k) take(p_.vehicles[group_[k]][best_choice_[k]], 0);

    fit_multipliers();
    choice_.clear();
    descend(0, 0.0);
    return best_choice_;
  }

 private:
  bool compatible(const DenseCandidate& c) const {
    return std::none_of(c.requests.begin(), c.requests.end(),
                        [&](std::uint32_t r) { return used_[r] != 0; });
  }

  void take(const DenseCandidate& c, char flag) {
    for (const auto r : c.requests) used_[r] = flag;
  }

  double total(const std::vector<std::size_t>& choice) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < choice.size(); ++k) sum += p_.vehicles[group_[k]][choice[k]].score;
    return sum;
  }

  // Lagrangian relaxation of the request constraints over the undecided
  // vehicles: sum of free multipliers plus each vehicle's best compatible
  // candidate after charging its requests. Any non-negative multipliers give
  // a valid bound; with all-zero multipliers this is the per-vehicle bound.
  double bound(std::size_t depth, const std::vector<double>& u) const {
    double total = 0.0;
    for (std::size_t r = 0; r < u.size(); ++r) {
      if (!used_[r]) total += u[r];
    }
    for (std::size_t k = depth; k < group_.size(); ++k) {
      double top = -std::numeric_limits<double>::infinity();
      for (const auto& c : p_.vehicles[group_[k]]) {
        if (!compatible(c)) continue;
        double reduced = c.score;
        for (const auto r : c.requests) reduced -= u[r];
        top = std::max(top, reduced);
      }
      total += top;
    }
    return total;
  }

  // Subgradient ascent on the multipliers with a Polyak step toward the
  // incumbent value.
  void fit_multipliers() {
    multipliers_.assign(p_.request_count, 0.0);
    std::vector<double> best_u = multipliers_;
    double best_bound = bound(0, multipliers_);
    double theta = 1.0;
    std::vector<double> g(p_.request_count);
    int stale = 0;
    for (int iter = 0; iter < 200 && best_bound > best_ + 1e-9 * std::max(1.0, std::abs(best_)); ++iter) {
      std::fill(g.begin(), g.end(), 0.0);
      for (const auto v : group_) {
        const DenseCandidate* arg = nullptr;
        double top = -std::numeric_limits<double>::infinity();
        for (const auto& c : p_.vehicles[v]) {
          double reduced = c.score;
          for (const auto r : c.requests) reduced -= multipliers_[r];
          if (reduced > top) {
            top = reduced;
            arg = &c;
          }
        }
        for (const auto r : arg->requests) g[r] += 1.0;
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < g.size(); ++r) {
        g[r] = 1.0 - g[r];
        // Projected direction: a zero multiplier with positive gradient stays put.
        if (multipliers_[r] <= 0.0 && g[r] > 0.0) g[r] = 0.0;
        norm += g[r] * g[r];
      }
      if (norm == 0.0) break;
      const double current = bound(0, multipliers_);
      const double step = theta * (current - best_) / norm;
      for (std::size_t r = 0; r < g.size(); ++r) {
        multipliers_[r] = std::max(0.0, multipliers_[r] - step * g[r]);
      }
      const double b = bound(0, multipliers_);
      if (b < best_bound - 1e-12) {
        best_bound = b;
        best_u = multipliers_;
        stale = 0;
      } else if (++stale >= 5) {
        theta *= 0.5;
        stale = 0;
      }
    }
    multipliers_ = best_u;
    zero_.assign(p_.request_count, 0.0);
  }

  // -1 / 0 / +1: incumbent prefix before / equal to / after the current prefix.
  int incumbent_order(std::size_t depth) const {
    for (std::size_t k = 0; k < depth; ++k) {
      if (best_choice_[k] != choice_[k]) return best_choice_[k] < choice_[k] ? -1 : 1;
    }
    return 0;
  }

  void descend(std::size_t depth, double partial) {
    if (depth == group_.size()) {
      if (better_or_tied_earlier(partial, choice_, best_, best_choice_)) {
        best_ = partial;
        best_choice_ = choice_;
      }
      return;
    }
    const double b = partial + std::min(bound(depth, multipliers_), bound(depth, zero_));
    const double tol = 1e-9 * std::max(1.0, std::abs(best_));
    if (b < best_ - tol) return;
    // Every leaf below is lexicographically after the incumbent, so only a
    // strict improvement could replace it.
    if (incumbent_order(depth) < 0 && b <= best_ + tol) return;

    const auto v = group_[depth];
    for (std::size_t c = 0; c < p_.vehicles[v].size(); ++c) {
      const auto& cand = p_.vehicles[v][c];
      if (!compatible(cand)) continue;
      take(cand, 1);
      choice_.push_back(c);
      descend(depth + 1, partial + cand.score);
      choice_.pop_back();
      take(cand, 0);
    }
  }

  const DenseProblem& p_;
  std::vector<std::size_t> group_;
  std::vector<char> used_;
  std::vector<double> multipliers_;
  std::vector<double> zero_;
  std::vector<std::size_t> choice_;
  std::vector<std::size_t> best_choice_;
  double best_ = -std::numeric_limits<double>::infinity();
};

// Exact dynamic program over (vehicle position, set of taken requests) for
// groups touching at most 64 requests. The taken set is restricted to the
// requests later vehicles can still reach, which keeps the state count small
// when many vehicles compete for a few requests. Gives up (returns nullopt)
// past a state budget.
class MaskDp {
 public:
  MaskDp(const DenseProblem& p, const std::vector<std::size_t>& group,
         std::size_t state_budget = std::size_t{1} << 21)
      : p_(p), group_(group), state_budget_(state_budget) {}

  std::optional<std::vector<std::size_t>> run() {
    std::unordered_map<std::uint32_t, int> local;
    for (const auto v : group_) {
      for (const auto& c : p_.vehicles[v]) {
        for (const auto r : c.requests) local.emplace(r, static_cast<int>(local.size()));
      }
    }
    if (local.size() > 64) return std::nullopt;
    masks_.resize(group_.size());
    for (std::size_t k = 0; k < group_.size(); ++k) {
      for (const auto& c : p_.vehicles[group_[k]]) {
        std::uint64_t m = 0;
        for (const auto r : c.requests) m |= std::uint64_t{1} << local.at(r);
        masks_[k].push_back(m);
      }
    }
    reach_.assign(group_.size() + 1, 0);
    for (std::size_t k = group_.size(); k-- > 0;) {
      reach_[k] = reach_[k + 1];
      for (const auto m : masks_[k]) reach_[k] |= m;
    }
    memo_.resize(group_.size());
    if (!value(0, 0)) return std::nullopt;

    std::vector<std::size_t> picks;
    std::uint64_t taken = 0;
    const double tol = 1e-9 * std::max(1.0, std::abs(*value(0, 0)));
    for (std::size_t k = 0; k < group_.size(); ++k) {
      const double target = *value(k, taken);
      for (std::size_t c = 0; c < masks_[k].size(); ++c) {
        if (masks_[k][c] & taken) continue;
        const double v = p_.vehicles[group_[k]][c].score + *value(k + 1, taken | masks_[k][c]);
        if (v >= target - tol) {
          picks.push_back(c);
          taken |= masks_[k][c];
          break;
        }
      }
    }
    return picks;
  }

 private:
  std::optional<double> value(std::size_t k, std::uint64_t taken) {
    if (k == group_.size()) return 0.0;
    taken &= reach_[k];
    if (auto it = memo_[k].find(taken); it != memo_[k].end()) return it->second;
    if (++states_ > state_budget_) return std::nullopt;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < masks_[k].size(); ++c) {
      if (masks_[k][c] & taken) continue;
      const auto rest = value(k + 1, taken | masks_[k][c]);
      if (!rest) return std::nullopt;
      best = std::max(best, p_.vehicles[group_[k]][c].score + *rest);
    }
    memo_[k].emplace(taken, best);
    return best;
  }

  const DenseProblem& p_;
  const std::vector<std::size_t>& group_;
  std::vector<std::vector<std::uint64_t>> masks_;
  std::vector<std::uint64_t> reach_;
  std::vector<std::unordered_map<std::uint64_t, double>> memo_;
  std::size_t state_budget_;
  std::size_t states_ = 0;
};

// Same recursion as MaskDp but over a flat table of every subset of the
// group's requests, filled from the last vehicle backwards. Cost does not
// depend on how alike the vehicles are, which is where the sparse version and
// the tree search both struggle (many interchangeable vehicles, few requests).
class DenseDp {
 public:
  DenseDp(const DenseProblem& p, const std::vector<std::size_t>& group) : p_(p), group_(group) {}

  std::optional<std::vector<std::size_t>> run() const {
    std::unordered_map<std::uint32_t, int> local;
    std::size_t candidates = 0;
    for (const auto v : group_) {
      if (p_.vehicles[v].size() > 0xffff) return std::nullopt;
      candidates += p_.vehicles[v].size();
      for (const auto& c : p_.vehicles[v]) {
        for (const auto r : c.requests) local.emplace(r, static_cast<int>(local.size()));
      }
    }
    if (local.size() > kMaxRequests) return std::nullopt;
    const std::size_t width = std::size_t{1} << local.size();
    if (width * group_.size() > kTableBudget || width * candidates > kWorkBudget) return std::nullopt;

    std::vector<std::vector<std::uint32_t>> masks(group_.size());
    for (std::size_t k = 0; k < group_.size(); ++k) {
      for (const auto& c : p_.vehicles[group_[k]]) {
        std::uint32_t m = 0;
        for (const auto r : c.requests) m |= std::uint32_t{1} << local.at(r);
        masks[k].push_back(m);
      }
    }

    std::vector<double> next(width, 0.0), cur(width);
    std::vector<std::uint16_t> arg(width * group_.size());
    for (std::size_t k = group_.size(); k-- > 0;) {
      const auto& cands = p_.vehicles[group_[k]];
      for (std::size_t taken = 0; taken < width; ++taken) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cands.size(); ++c) {
          if (masks[k][c] & taken) continue;
          best = std::max(best, cands[c].score + next[taken | masks[k][c]]);
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(best));
        std::size_t pick = 0;
        while ((masks[k][pick] & taken) || cands[pick].score + next[taken | masks[k][pick]] < best - tol) {
          ++pick;
        }
        cur[taken] = best;
        arg[k * width + taken] = static_cast<std::uint16_t>(pick);
      }
      std::swap(cur, next);
    }

    std::vector<std::size_t> picks;
    std::size_t taken = 0;
    for (std::size_t k = 0; k < group_.size(); ++k) {
      const auto c = arg[k * width + taken];
      picks.push_back(c);
      taken |= masks[k][c];
    }
    return picks;
  }

 private:
  static constexpr std::size_t kMaxRequests = 24;
  static constexpr std::size_t kTableBudget = std::size_t{1} << 25;
  static constexpr std::size_t kWorkBudget = std::size_t{1} << 32;

  const DenseProblem& p_;
  const std::vector<std::size_t>& group_;
};

std::vector<std::vector<std::size_t>> independent_groups(const DenseProblem& p) {
  const std::size_t n = p.vehicles.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::size_t> owner(p.request_count, n);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& c : p.vehicles[v]) {
      for (const auto r : c.requests) {
        if (owner[r] == n) {
          owner[r] = v;
        } else {
          const auto a = find(owner[r]);
          const auto b = find(v);
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
      }
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto root = find(v);
    if (slot[root] == n) {
      slot[root] = groups.size();
      groups.emplace_back();
    }
    groups[slot[root]].push_back(v);
  }
  return groups;
}

double objective_of(const AssignmentProblem& problem, const std::vector<std::size_t>& choice) {
  double sum = 0.0;
  for (std::size_t v = 0; v < choice.size(); ++v) {
    sum += problem.vehicles[v].candidates[choice[v]].score;
  }
  return sum;
}

}  // namespace

void validate_problem(const AssignmentProblem& problem) {
  for (std::size_t i = 0; i < problem.vehicles.size(); ++i) {
    const auto& vc = problem.vehicles[i];
    if (i > 0 && vc.vehicle <= problem.vehicles[i - 1].vehicle) {
      throw std::invalid_argument("assignment: vehicles must be listed in increasing id order");
    }
    bool has_empty = false;
    for (const auto& c : vc.candidates) {
      if (!std::isfinite(c.score)) {
        throw std::invalid_argument("assignment: non-finite score for vehicle " +
                                    std::to_string(vc.vehicle));
      }
      auto ids = c.requests;
      std::sort(ids.begin(), ids.end());
      if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw std::invalid_argument("assignment: candidate repeats a request for vehicle " +
                                    std::to_string(vc.vehicle));
      }
      has_empty = has_empty || c.requests.empty();
    }
    if (!has_empty) {
      throw std::invalid_argument("assignment: vehicle " + std::to_string(vc.vehicle) +
                                  " has no empty candidate");
    }
  }
}

bool is_feasible(const AssignmentProblem& problem, const AssignmentSolution& solution) {
  if (solution.choice.size() != problem.vehicles.size()) return false;
  std::vector<RequestId> seen;
  for (std::size_t v = 0; v < problem.vehicles.size(); ++v) {
    const auto& cands = problem.vehicles[v].candidates;
    if (solution.choice[v] >= cands.size()) return false;
    const auto& reqs = cands[solution.choice[v]].requests;
    seen.insert(seen.end(), reqs.begin(), reqs.end());
  }
  std::sort(seen.begin(), seen.end());
  return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
}

AssignmentSolution solve(const AssignmentProblem& problem, SolverKind kind) {
  validate_problem(problem);
  const auto dense = densify(problem);
  AssignmentSolution sol;
  sol.choice.assign(problem.vehicles.size(), 0);
  for (const auto& group : independent_groups(dense)) {
    std::optional<std::vector<std::size_t>> picks;
    if (kind == SolverKind::Auto) {
      // A short memo run settles most groups; wide groups of look-alike
      // vehicles go to the flat table instead.
      picks = MaskDp(dense, group, 1u << 15).run();
      if (!picks) picks = DenseDp(dense, group).run();
      if (!picks) picks = MaskDp(dense, group).run();
    }
    if (kind == SolverKind::SubsetTable) picks = DenseDp(dense, group).run();
    if (!picks) picks = BranchAndBound(dense, group).run();
    for (std::size_t k = 0; k < group.size(); ++k) {
      sol.choice[group[k]] = dense.vehicles[group[k]][(*picks)[k]].index;
    }
  }
  sol.objective = objective_of(problem, sol.choice);
  return sol;
}

AssignmentSolution brute_force_solve(const AssignmentProblem& problem) {
  validate_problem(problem);
  double combos = 1.0;
  for (const auto& vc : problem.vehicles) combos *= static_cast<double>(vc.candidates.size());
  if (combos > static_cast<double>(1u << 22)) {
    throw std::length_error("brute_force_solve: instance too large to enumerate");
  }
  const std::size_t n = problem.vehicles.size();
  std::vector<std::size_t> choice(n, 0);
  AssignmentSolution best;
  best.objective = -std::numeric_limits<double>::infinity();
  while (true) {
    AssignmentSolution cand{choice, objective_of(problem, choice)};
    if (is_feasible(problem, cand) &&
        better_or_tied_earlier(cand.objective, cand.choice, best.objective, best.choice)) {
      best = cand;
    }
    // Odometer increment with the last vehicle varying fastest (lexicographic order).
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++choice[k] < problem.vehicles[k].candidates.size()) break;
      choice[k] = 0;
      if (k == 0) return best;
    }
    if (n == 0) return AssignmentSolution{{}, 0.0};
  }
}

void write_problem(std::ostream& out, const AssignmentProblem& problem) {
  char buf[64];
  for (const auto& vc : problem.vehicles) {
    for (const auto& c : vc.candidates) {
      out << vc.vehicle << '\t';
      if (c.requests.empty()) {
        out << '-';
      } else {
        for (std::size_t i = 0; i < c.requests.size(); ++i) {
          out << (i ? "," : "") << c.requests[i];
        }
      }
      std::snprintf(buf, sizeof buf, "%.17g", c.score);
      out << '\t' << buf << '\n';
    }
  }
}

AssignmentProblem read_problem(std::istream& in) {
  AssignmentProblem problem;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    VehicleId vehicle = 0;
    std::string ids;
    std::string score;
    if (!(fields >> vehicle >> ids >> score)) {
      throw std::invalid_argument("problem dump line " + std::to_string(line_no) + ": malformed");
    }
    Candidate c;
    c.score = std::stod(score);
    if (ids != "-") {
      std::stringstream ss(ids);
      std::string id;
      while (std::getline(ss, id, ',')) c.requests.push_back(static_cast<RequestId>(std::stoul(id)));
    }
    if (problem.vehicles.empty() || problem.vehicles.back().vehicle != vehicle) {
      problem.vehicles.push_back(VehicleCandidates{vehicle, {}});
    }
    problem.vehicles.back().candidates.push_back(std::move(c));
  }
  validate_problem(problem);
  return problem;
}

}  // namespace ridepool
