#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "svan/model.hpp"
#include "svan/verdict.hpp"

namespace svan {

/// One entry of a synchronization vector, written from the service's point of
/// view: (service, req?X) means the service receives req, so the adaptor
/// emits it. Label params hold variable names, not types.
struct VectorEntry {
    std::string service;
    Label label;
    auto operator<=>(const VectorEntry&) const = default;
};

struct SyncVector {
    std::string name;
    std::vector<VectorEntry> entries;
};

struct Contract {
    std::vector<std::string> services;
    std::vector<SyncVector> vectors;
};

/// Adaptor protocol: an Lts over the mirror of the service labels, each
/// transition annotated with the vector and service it implements
/// (tau transitions from service-internal moves carry no vector).
struct AdaptorLts {
    Lts lts;
    std::map<Transition, std::pair<std::string, std::string>> annotations;  // (vector, service)
};

/// Text format, one declaration per line:
///   services: s, c
///   V1 = <s:req?X; c:request!X>
///   V3 = <s:halt?>
/// '#' starts a comment. Throws ParseError / SemanticError (duplicate service
/// in a vector, undeclared service, duplicate vector name).
Contract parse_contract(const std::string& text);
std::string serialize_contract(const Contract& c);

/// Builds the adaptor state space: per vector, all receptions (mirrors of
/// service emissions) precede any emission; vectors interleave freely and may
/// refire once completed; an emission fires only when its variables were
/// bound by earlier receptions. States that cannot reach a final state (all
/// services final) are pruned, then tau transitions are removed. Throws
/// AnalysisError("unadaptable") when pruning removes the initial state.
AdaptorLts synthesize_adaptor(const std::vector<std::pair<std::string, Lts>>& services,
                              const Contract& contract);

/// Closed-system check: the synchronous product of the services and the
/// adaptor, with every message routed through the adaptor (services never
/// synchronize directly), has no deadlocks and can reach a final state from
/// every reachable state. Failing evidence lists each service's pending
/// labels at the stuck state.
Verdict verify_adaptation(const std::vector<std::pair<std::string, Lts>>& services,
                          const Lts& adaptor);

std::string to_json(const AdaptorLts& a);
std::string to_dot(const AdaptorLts& a, const std::string& name = "adaptor");

} // namespace svan
