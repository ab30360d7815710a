#pragma once

#include <string>
#include <vector>

#include "svan/composition.hpp"
#include "svan/model.hpp"
#include "svan/verdict.hpp"

namespace svan {

/// Global, totally ordered specification of message exchanges between peers.
struct DiagramEvent {
    int seq = 0;
    std::string from, to, msg;
    bool operator==(const DiagramEvent&) const = default;
};

struct CollaborationDiagram {
    std::vector<std::string> peers;
    std::vector<DiagramEvent> events;  // sorted by seq after parsing
};

struct SendEvent {
    std::string from, to, msg;
    auto operator<=>(const SendEvent&) const = default;
};

struct RealizabilityVerdict {
    bool holds = false;
    CommMode mode = CommMode::sync;
    int bound = 0;  // async only
    std::vector<SendEvent> violation;  // a completed send sequence diverging
                                       // from the specified order (empty when
                                       // no execution completes at all)
};

/// JSON: {"peers":[...], "events":[{"seq":1,"from":"A","to":"B","msg":"m"},...]}
/// Sequence numbers must be contiguous from 1 and senders must differ from
/// receivers.
CollaborationDiagram parse_diagram(const std::string& text);
std::string serialize_diagram(const CollaborationDiagram& cd);

/// Linear local protocol of one peer: its events in diagram order, emissions
/// for sends and receptions for receives; the last state is final. A peer
/// with no events projects to the one-state final Lts.
Lts project(const CollaborationDiagram& cd, const std::string& peer);

/// Projects every peer, composes them under the given mode, and compares the
/// completed send-event sequences of the composition with the diagram's
/// specified sequence (completed = reaching a final composite state).
RealizabilityVerdict realizable(const CollaborationDiagram& cd, CommMode mode, int bound = 1);

/// Same criterion against independently supplied peer implementations.
RealizabilityVerdict conformance(const CollaborationDiagram& cd,
                                 const std::vector<std::pair<std::string, Lts>>& impls,
                                 CommMode mode, int bound = 1);

nlohmann::json to_json(const RealizabilityVerdict& v);

} // namespace svan
