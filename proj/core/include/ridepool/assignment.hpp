#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <vector>

#include "ridepool/demand.hpp"
#include "ridepool/trip.hpp"

namespace ridepool {

struct Candidate {
  std::vector<RequestId> requests;  // empty for the "keep current plan" trip
  double score = 0.0;
};

struct VehicleCandidates {
  VehicleId vehicle = 0;
  std::vector<Candidate> candidates;
};

/// Set-packing instance: pick exactly one candidate per vehicle so that no
/// request is used twice, maximizing the total score. Vehicles must appear in
/// strictly increasing id order and each must offer an empty candidate.
struct AssignmentProblem {
  std::vector<VehicleCandidates> vehicles;
};

struct AssignmentSolution {
  /// Chosen candidate index per vehicle, in problem order.
  std::vector<std::size_t> choice;
  /// Sum of the chosen scores, accumulated in vehicle order.
  double objective = 0.0;
};

/// Throws std::invalid_argument when the problem breaks its invariants.
void validate_problem(const AssignmentProblem& problem);

/// True when the solution picks one valid candidate per vehicle and no
/// request twice.
bool is_feasible(const AssignmentProblem& problem, const AssignmentSolution& solution);

enum class SolverKind {
  Auto,            // subset DP (flat table or sparse memo), branch and bound as a last resort
  SubsetTable,     // full subset table, branch and bound if the group is too wide
  BranchAndBound,  // branch and bound only
};

/// Exact solver. Vehicles that share no candidate request are solved
/// independently. Inside a group a dynamic program over the set of taken
/// requests is tried first; branch and bound with a Lagrangian bound on the
/// request constraints is the fallback. Among optimal solutions (within a
/// relative 1e-9) the one whose choice vector is lexicographically smallest is
/// returned.
AssignmentSolution solve(const AssignmentProblem& problem, SolverKind kind = SolverKind::Auto);

/// Exhaustive enumeration with the same tie-break as solve(). Throws
/// std::length_error when the instance has more than 2^22 combinations.
AssignmentSolution brute_force_solve(const AssignmentProblem& problem);

/// One candidate per line: `<vehicle>\t<id,id,...|->\t<score>`.
void write_problem(std::ostream& out, const AssignmentProblem& problem);
AssignmentProblem read_problem(std::istream& in);

}  // namespace ridepool
