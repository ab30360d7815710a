#include "svan/choreography.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace svan {

using nlohmann::json;

CollaborationDiagram parse_diagram(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    CollaborationDiagram cd;
    try {
        if (!doc.is_object() || !doc.contains("peers") || !doc.contains("events"))
            throw ParseError("diagram needs \"peers\" and \"events\" fields");
        cd.peers = doc["peers"].get<std::vector<std::string>>();
        for (const json& je : doc["events"]) {
            DiagramEvent e;
            e.seq = je.at("seq").get<int>();
            e.from = je.at("from").get<std::string>();
            e.to = je.at("to").get<std::string>();
            e.msg = je.at("msg").get<std::string>();
            cd.events.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    std::sort(cd.events.begin(), cd.events.end(),
              [](const DiagramEvent& a, const DiagramEvent& b) { return a.seq < b.seq; });

    std::set<std::string> peers(cd.peers.begin(), cd.peers.end());
    if (peers.size() != cd.peers.size())
        throw SemanticError("duplicate-peer", "peer list contains duplicates");
    for (size_t i = 0; i < cd.events.size(); ++i) {
        const DiagramEvent& e = cd.events[i];
        if (e.seq != static_cast<int>(i) + 1)
            throw SemanticError("bad-sequence",
                                "event sequence numbers must be contiguous from 1");
        if (e.from == e.to)
            throw SemanticError("self-message",
                                "event " + std::to_string(e.seq) + " has sender == receiver");
        if (!peers.count(e.from) || !peers.count(e.to))
            throw SemanticError("unknown-peer", "event " + std::to_string(e.seq) +
                                    " references an undeclared peer");
        if (e.msg.empty())
            throw SemanticError("bad-label", "event " + std::to_string(e.seq) +
                                    " has an empty message name");
    }
    return cd;
}

std::string serialize_diagram(const CollaborationDiagram& cd) {
    json doc;
    doc["peers"] = cd.peers;
    json events = json::array();
    for (const DiagramEvent& e : cd.events) {
        json je;
        je["seq"] = e.seq;
        je["from"] = e.from;
        je["to"] = e.to;
        je["msg"] = e.msg;
        events.push_back(std::move(je));
    }
    doc["events"] = std::move(events);
    return doc.dump(2) + "\n";
}

Lts project(const CollaborationDiagram& cd, const std::string& peer) {
    if (std::find(cd.peers.begin(), cd.peers.end(), peer) == cd.peers.end())
        throw SemanticError("unknown-peer", "peer \"" + peer + "\" is not in the diagram");

    std::vector<Transition> transitions;
    std::vector<std::string> states;
    int k = 0;
    auto state = [&](int i) { return peer + "_" + std::to_string(i); };
    states.push_back(state(0));
    for (const DiagramEvent& e : cd.events) {
        if (e.from != peer && e.to != peer) continue;
        Direction d = (e.from == peer) ? Direction::emission : Direction::reception;
        transitions.push_back({state(k), Label::make(e.msg, d), state(k + 1)});
        ++k;
        states.push_back(state(k));
    }
    return make_lts(std::move(states), state(0), {state(k)}, std::move(transitions));
}

namespace {

/// All completed send-event sequences of a composition: every path from the
/// initial state to a final state, keeping interaction (sync) or send (async)
/// steps. Throws when the composition has a cycle: the analysis is defined
/// for loop-free behaviours only.
std::set<std::vector<SendEvent>> completed_send_sequences(
    const CompositeLts& c, const std::vector<std::string>& peer_names) {
    auto out = c.out_index();
    std::set<std::vector<SendEvent>> result;
    std::vector<char> on_path(c.states.size(), 0);
    std::vector<SendEvent> current;

    auto rec = [&](auto&& self, int s) -> void {
        if (on_path[static_cast<size_t>(s)])
            throw AnalysisError("cyclic-behaviour",
                                "completed-trace comparison requires loop-free compositions");
        if (c.is_final(s)) result.insert(current);
        on_path[static_cast<size_t>(s)] = 1;
        for (int e : out[static_cast<size_t>(s)]) {
            const CompositeTransition& t = c.transitions[static_cast<size_t>(e)];
            bool is_send = t.label.kind == CompositeLabel::Kind::interaction ||
                           t.label.kind == CompositeLabel::Kind::send;
            if (is_send)
                current.push_back({peer_names[static_cast<size_t>(t.label.emitter)],
                                   peer_names[static_cast<size_t>(t.label.receiver)],
                                   t.label.msg});
            self(self, t.to);
            if (is_send) current.pop_back();
        }
        on_path[static_cast<size_t>(s)] = 0;
    };
    rec(rec, 0);
    return result;
}

RealizabilityVerdict compare(const CollaborationDiagram& cd,
                             const std::vector<std::pair<std::string, Lts>>& impls,
                             CommMode mode, int bound) {
    std::vector<std::string> names;
    std::vector<Lts> systems;
    for (const auto& [name, lts] : impls) {
        names.push_back(name);
        systems.push_back(lts);
    }

    CompositeLts prod = (mode == CommMode::sync) ? sync_product(systems)
                                                 : async_product(systems, bound);
    std::set<std::vector<SendEvent>> actual = completed_send_sequences(prod, names);

    std::vector<SendEvent> specified;
    for (const DiagramEvent& e : cd.events) specified.push_back({e.from, e.to, e.msg});

    RealizabilityVerdict v;
    v.mode = mode;
    v.bound = (mode == CommMode::async) ? bound : 0;
    v.holds = actual.size() == 1 && *actual.begin() == specified;
    if (!v.holds) {
        // deterministic divergence evidence: the shortest (then lexicographically
        // smallest) completed sequence that differs from the specification
        std::vector<std::vector<SendEvent>> divergent;
        for (const auto& seq : actual)
            if (seq != specified) divergent.push_back(seq);
        std::sort(divergent.begin(), divergent.end(),
                  [](const auto& a, const auto& b) {
                      if (a.size() != b.size()) return a.size() < b.size();
                      return a < b;
                  });
        if (!divergent.empty()) v.violation = divergent.front();
    }
    return v;
}

} // namespace

RealizabilityVerdict realizable(const CollaborationDiagram& cd, CommMode mode, int bound) {
    std::vector<std::pair<std::string, Lts>> impls;
    for (const std::string& p : cd.peers) impls.push_back({p, project(cd, p)});
    return compare(cd, impls, mode, bound);
}

RealizabilityVerdict conformance(const CollaborationDiagram& cd,
                                 const std::vector<std::pair<std::string, Lts>>& impls,
                                 CommMode mode, int bound) {
    std::set<std::string> provided;
    for (const auto& [name, lts] : impls) {
        (void)lts;
        provided.insert(name);
    }
    for (const std::string& p : cd.peers)
        if (!provided.count(p))
            throw SemanticError("missing-peer",
                                "no implementation supplied for peer \"" + p + "\"");
    return compare(cd, impls, mode, bound);
}

nlohmann::json to_json(const RealizabilityVerdict& v) {
    json j;
    j["holds"] = v.holds;
    j["mode"] = (v.mode == CommMode::sync) ? "sync" : "async";
    if (v.mode == CommMode::async) j["bound"] = v.bound;
    json viol = json::array();
    for (const SendEvent& e : v.violation) {
        json je;
        je["from"] = e.from;
        je["to"] = e.to;
        je["msg"] = e.msg;
        viol.push_back(std::move(je));
    }
    j["violation"] = std::move(viol);
    return j;
}

} // namespace svan
