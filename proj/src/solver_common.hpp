#pragma once

#include <cstdint>
#include <random>

#include "mvmdp/solvers.hpp"

namespace mvmdp::detail {

/// Evaluates an iterate, raising SolverError when its chain is not irreducible.
EvaluationReport evaluate_iterate(const MdpModel& model, const DeterministicPolicy& policy);

IterationRecord<DeterministicPolicy> make_record(int iteration, const DeterministicPolicy& policy,
                                                 const EvaluationReport& report, int changed);

/// Independent generator for (seed, stream).
std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace mvmdp::detail
