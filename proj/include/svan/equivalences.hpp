#pragma once

#include "svan/model.hpp"
#include "svan/verdict.hpp"

namespace svan {

enum class BisimKind { strong, weak, branching };

std::string bisim_kind_name(BisimKind k);

/// Equality of the (weak, when observable_only) trace sets from the initial
/// states, decided by subset construction over both systems and a synchronous
/// search of the two determinizations. A failing verdict carries a shortest
/// distinguishing trace and the side that can perform it.
Verdict trace_equivalent(const Lts& l1, const Lts& l2, bool observable_only = false);

/// Partition refinement to the maximal strong/weak/branching bisimulation on
/// the disjoint union of the two systems. Final-state status seeds the initial
/// partition, so final and non-final states are never related (for the weak
/// relations a state counts as final when a tau-only path reaches a final
/// state). A failing verdict carries a best-effort distinguishing action
/// sequence from the refinement history; a holding one carries the partition.
Verdict bisimilar(const Lts& l1, const Lts& l2, BisimKind kind);

} // namespace svan
