#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "svan/model.hpp"
#include "svan/verdict.hpp"

namespace svan {

enum class CommMode { sync, async };

/// One step of a composite system. Ordering is part of the deterministic
/// exploration contract: steps are tried in this order from every state.
struct CompositeLabel {
    enum class Kind { interaction, send, consume, internal_step };

    Kind kind = Kind::internal_step;
    std::string msg;    // empty for internal steps
    int emitter = -1;   // moving service for internal steps
    int receiver = -1;

    static CompositeLabel interaction(std::string m, int from, int to) {
        return {Kind::interaction, std::move(m), from, to};
    }
    static CompositeLabel send(std::string m, int from, int to) {
        return {Kind::send, std::move(m), from, to};
    }
    static CompositeLabel consume(std::string m, int to) {
        return {Kind::consume, std::move(m), -1, to};
    }
    static CompositeLabel internal(int svc) { return {Kind::internal_step, "", svc, -1}; }

    std::string str() const;
    auto operator<=>(const CompositeLabel&) const = default;
};

struct CompositeState {
    std::vector<std::string> locals;
    std::vector<std::vector<std::string>> mailboxes;  // empty in sync mode

    /// "<s0,u1>" in sync mode, "<s0,u1|q:[],q:[a]>" in async mode.
    std::string str() const;
    auto operator<=>(const CompositeState&) const = default;
};

struct CompositeTransition {
    int from;
    CompositeLabel label;
    int to;
    auto operator<=>(const CompositeTransition&) const = default;
};

using Trace = std::vector<CompositeLabel>;

/// Product state space, restricted to the states reachable from the initial
/// one. States are numbered in deterministic breadth-first discovery order;
/// index 0 is the initial state.
struct CompositeLts {
    std::vector<Lts> services;
    CommMode mode = CommMode::sync;
    int bound = 0;  // mailbox capacity, async mode only
    std::vector<CompositeState> states;
    std::vector<CompositeTransition> transitions;  // sorted
    std::set<int> finals;

    bool is_final(int s) const { return finals.count(s) != 0; }
    /// state -> outgoing (transition index) lists, in transition order
    std::vector<std::vector<int>> out_index() const;
};

/// Rendezvous product. tau moves of each service interleave freely; an
/// emission fires only jointly with a matching reception of another service.
/// `hub`, when >= 0, restricts interactions to pairs involving that service
/// (orchestrator topology).
CompositeLts sync_product(const std::vector<Lts>& services, int hub = -1);

/// Bounded-mailbox product: one FIFO queue per receiving service. Sends
/// enqueue (blocked when the queue is full), receptions consume the head.
/// Throws AnalysisError("ambiguous-routing") when an emitted message is
/// receivable by more than one service.
CompositeLts async_product(const std::vector<Lts>& services, int bound);

struct DeadlockReport {
    int state;       // index into CompositeLts::states
    Trace witness;   // shortest trace from the initial state
};

/// Reachable non-final states with no outgoing transition, in discovery order.
std::vector<DeadlockReport> deadlocks(const CompositeLts& c);

/// Whether some final composite state is reachable; witness trace when it is,
/// the reachable sink states ("frontier") when it is not.
Verdict final_reachable(const CompositeLts& c);

/// Replays a trace from the initial state; returns the end state index, or
/// -1 when some step is not enabled.
int replay(const CompositeLts& c, const Trace& trace);

std::string to_json(const CompositeLts& c);
std::string to_dot(const CompositeLts& c, const std::string& name = "product");
nlohmann::json trace_to_json(const CompositeLts& c, const Trace& t);

} // namespace svan
