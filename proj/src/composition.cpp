#include "svan/composition.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace svan {

using nlohmann::json;

std::string CompositeLabel::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::interaction:
            os << msg << " (" << emitter << "->" << receiver << ")";
            break;
        case Kind::send:
            os << msg << "! (" << emitter << "->" << receiver << ")";
            break;
        case Kind::consume:
            os << msg << "? (" << receiver << ")";
            break;
        case Kind::internal_step:
            os << "tau (" << emitter << ")";
            break;
    }
    return os.str();
}

std::string CompositeState::str() const {
    std::ostringstream os;
    os << '<';
    for (size_t i = 0; i < locals.size(); ++i) {
        if (i) os << ',';
        os << locals[i];
    }
    if (!mailboxes.empty()) {
        os << '|';
        for (size_t i = 0; i < mailboxes.size(); ++i) {
            if (i) os << ',';
            os << "q:[";
            for (size_t k = 0; k < mailboxes[i].size(); ++k) {
                if (k) os << ',';
                os << mailboxes[i][k];
            }
            os << ']';
        }
    }
    os << '>';
    return os.str();
}

std::vector<std::vector<int>> CompositeLts::out_index() const {
    std::vector<std::vector<int>> out(states.size());
    for (int i = 0; i < static_cast<int>(transitions.size()); ++i)
        out[static_cast<size_t>(transitions[static_cast<size_t>(i)].from)].push_back(i);
    return out;
}

namespace {

struct Explorer {
    const std::vector<Lts>& services;
    std::vector<detail::Indexed> ix;
    CommMode mode;
    int bound;
    int hub;
    std::map<std::string, int> route;  // message -> receiving service (async)

    explicit Explorer(const std::vector<Lts>& svcs, CommMode m, int b, int h)
        : services(svcs), mode(m), bound(b), hub(h) {
        for (const Lts& s : services) ix.push_back(detail::index_lts(s));
        if (mode == CommMode::async) build_routing();
    }

    void build_routing() {
        std::map<std::string, std::vector<int>> receivers;
        std::set<std::string> emitted;
        for (int i = 0; i < static_cast<int>(services.size()); ++i) {
            for (const Label& a : services[static_cast<size_t>(i)].alphabet) {
                if (a.is_reception()) receivers[a.message].push_back(i);
                if (a.is_emission()) emitted.insert(a.message);
            }
        }
        for (const std::string& m : emitted) {
            auto it = receivers.find(m);
            if (it == receivers.end()) continue;  // emission without counterpart: never fires
            std::set<int> unique_rx(it->second.begin(), it->second.end());
            if (unique_rx.size() > 1)
                throw AnalysisError("ambiguous-routing",
                                    "message \"" + m + "\" is receivable by " +
                                        std::to_string(unique_rx.size()) + " services");
            route[m] = *unique_rx.begin();
        }
    }

    bool state_final(const CompositeState& s) const {
        for (size_t i = 0; i < services.size(); ++i)
            if (!ix[i].final_flag[static_cast<size_t>(ix[i].id.at(s.locals[i]))]) return false;
        for (const auto& mb : s.mailboxes)
            if (!mb.empty()) return false;
        return true;
    }

    std::vector<std::pair<CompositeLabel, CompositeState>> successors(
        const CompositeState& s) const {
        std::vector<std::pair<CompositeLabel, CompositeState>> succ;
        int n = static_cast<int>(services.size());
        // internal moves
        for (int i = 0; i < n; ++i) {
            int loc = ix[static_cast<size_t>(i)].id.at(s.locals[static_cast<size_t>(i)]);
            for (auto [li, tgt] : ix[static_cast<size_t>(i)].out[static_cast<size_t>(loc)]) {
                if (!ix[static_cast<size_t>(i)].tau_label(li)) continue;
                CompositeState t = s;
                t.locals[static_cast<size_t>(i)] =
                    ix[static_cast<size_t>(i)].names[static_cast<size_t>(tgt)];
                succ.push_back({CompositeLabel::internal(i), std::move(t)});
            }
        }
        if (mode == CommMode::sync) {
            for (int i = 0; i < n; ++i) {
                const auto& ei = ix[static_cast<size_t>(i)];
                int li_state = ei.id.at(s.locals[static_cast<size_t>(i)]);
                for (auto [li, itgt] : ei.out[static_cast<size_t>(li_state)]) {
                    const Label& a = ei.labels[static_cast<size_t>(li)];
                    if (!a.is_emission()) continue;
                    for (int j = 0; j < n; ++j) {
                        if (j == i) continue;
                        if (hub >= 0 && i != hub && j != hub) continue;
                        const auto& ej = ix[static_cast<size_t>(j)];
                        int lj_state = ej.id.at(s.locals[static_cast<size_t>(j)]);
                        for (auto [lj, jtgt] : ej.out[static_cast<size_t>(lj_state)]) {
                            const Label& b = ej.labels[static_cast<size_t>(lj)];
                            if (!b.is_reception() || b.message != a.message) continue;
                            CompositeState t = s;
                            t.locals[static_cast<size_t>(i)] =
                                ei.names[static_cast<size_t>(itgt)];
                            t.locals[static_cast<size_t>(j)] =
                                ej.names[static_cast<size_t>(jtgt)];
                            succ.push_back(
                                {CompositeLabel::interaction(a.message, i, j), std::move(t)});
                        }
                    }
                }
            }
        } else {
            for (int i = 0; i < n; ++i) {
                const auto& ei = ix[static_cast<size_t>(i)];
                int loc = ei.id.at(s.locals[static_cast<size_t>(i)]);
                for (auto [li, tgt] : ei.out[static_cast<size_t>(loc)]) {
                    const Label& a = ei.labels[static_cast<size_t>(li)];
                    if (a.is_tau()) continue;
                    if (a.is_emission()) {
                        auto rt = route.find(a.message);
                        if (rt == route.end()) continue;  // no receiver anywhere
                        int j = rt->second;
                        if (static_cast<int>(s.mailboxes[static_cast<size_t>(j)].size()) >= bound)
                            continue;  // mailbox full
                        CompositeState t = s;
                        t.locals[static_cast<size_t>(i)] = ei.names[static_cast<size_t>(tgt)];
                        t.mailboxes[static_cast<size_t>(j)].push_back(a.message);
                        succ.push_back({CompositeLabel::send(a.message, i, j), std::move(t)});
                    } else {
                        const auto& mb = s.mailboxes[static_cast<size_t>(i)];
                        if (mb.empty() || mb.front() != a.message) continue;
                        CompositeState t = s;
                        t.locals[static_cast<size_t>(i)] = ei.names[static_cast<size_t>(tgt)];
                        t.mailboxes[static_cast<size_t>(i)].erase(
                            t.mailboxes[static_cast<size_t>(i)].begin());
                        succ.push_back({CompositeLabel::consume(a.message, i), std::move(t)});
                    }
                }
            }
        }
        std::sort(succ.begin(), succ.end());
        return succ;
    }
};

CompositeLts explore(const std::vector<Lts>& services, CommMode mode, int bound, int hub) {
    if (services.size() < 2)
        throw AnalysisError("too-few-services", "a composition needs at least 2 services");
    for (const Lts& s : services)
        if (!is_valid(s))
            throw SemanticError("invalid-service", "composition input violates Lts invariants");

    Explorer ex(services, mode, bound, hub);

    CompositeLts c;
    c.services = services;
    c.mode = mode;
    c.bound = bound;

    CompositeState init;
    for (const Lts& s : services) init.locals.push_back(s.initial);
    if (mode == CommMode::async)
        init.mailboxes.assign(services.size(), {});

    std::map<CompositeState, int> id;
    id[init] = 0;
    c.states.push_back(init);
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        CompositeState s = c.states[static_cast<size_t>(cur)];  // copy: states vector grows
        for (auto& [label, tgt] : ex.successors(s)) {
            auto [it, inserted] = id.emplace(tgt, static_cast<int>(c.states.size()));
            if (inserted) {
                c.states.push_back(tgt);
                queue.push_back(it->second);
            }
            c.transitions.push_back({cur, label, it->second});
        }
    }
    std::sort(c.transitions.begin(), c.transitions.end());
    c.transitions.erase(std::unique(c.transitions.begin(), c.transitions.end()),
                        c.transitions.end());
    for (int i = 0; i < static_cast<int>(c.states.size()); ++i)
        if (ex.state_final(c.states[static_cast<size_t>(i)])) c.finals.insert(i);
    return c;
}

/// Shortest traces from the initial state, following transition order.
std::vector<int> bfs_parents(const CompositeLts& c) {
    std::vector<int> parent_edge(c.states.size(), -1);
    std::vector<char> seen(c.states.size(), 0);
    auto out = c.out_index();
    std::deque<int> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int e : out[static_cast<size_t>(cur)]) {
            int tgt = c.transitions[static_cast<size_t>(e)].to;
            if (!seen[static_cast<size_t>(tgt)]) {
                seen[static_cast<size_t>(tgt)] = 1;
                parent_edge[static_cast<size_t>(tgt)] = e;
                queue.push_back(tgt);
            }
        }
    }
    return parent_edge;
}

Trace trace_to(const CompositeLts& c, const std::vector<int>& parent_edge, int state) {
    Trace t;
    while (state != 0) {
        int e = parent_edge[static_cast<size_t>(state)];
        t.push_back(c.transitions[static_cast<size_t>(e)].label);
        state = c.transitions[static_cast<size_t>(e)].from;
    }
    std::reverse(t.begin(), t.end());
    return t;
}

} // namespace

CompositeLts sync_product(const std::vector<Lts>& services, int hub) {
    return explore(services, CommMode::sync, 0, hub);
}

CompositeLts async_product(const std::vector<Lts>& services, int bound) {
    if (bound < 1) throw AnalysisError("bad-bound", "mailbox bound must be >= 1");
    return explore(services, CommMode::async, bound, -1);
}

std::vector<DeadlockReport> deadlocks(const CompositeLts& c) {
    auto out = c.out_index();
    auto parents = bfs_parents(c);
    std::vector<DeadlockReport> result;
    for (int s = 0; s < static_cast<int>(c.states.size()); ++s)
        if (out[static_cast<size_t>(s)].empty() && !c.is_final(s))
            result.push_back({s, trace_to(c, parents, s)});
    return result;
}

Verdict final_reachable(const CompositeLts& c) {
    auto parents = bfs_parents(c);
    // states are already in BFS discovery order, so the first final found by
    // index scan carries a shortest witness
    for (int s = 0; s < static_cast<int>(c.states.size()); ++s) {
        if (c.is_final(s)) {
            Verdict v{true, "final-reachable", json::object()};
            v.evidence["witness"] = trace_to_json(c, trace_to(c, parents, s));
            v.evidence["state"] = c.states[static_cast<size_t>(s)].str();
            return v;
        }
    }
    Verdict v{false, "final-reachable", json::object()};
    auto out = c.out_index();
    json frontier = json::array();
    for (int s = 0; s < static_cast<int>(c.states.size()); ++s)
        if (out[static_cast<size_t>(s)].empty())
            frontier.push_back(c.states[static_cast<size_t>(s)].str());
    v.evidence["frontier"] = std::move(frontier);
    return v;
}

int replay(const CompositeLts& c, const Trace& trace) {
    auto out = c.out_index();
    int cur = 0;
    for (const CompositeLabel& step : trace) {
        int next = -1;
        for (int e : out[static_cast<size_t>(cur)])
            if (c.transitions[static_cast<size_t>(e)].label == step) {
                next = c.transitions[static_cast<size_t>(e)].to;
                break;
            }
        if (next < 0) return -1;
        cur = next;
    }
    return cur;
}

namespace {

json composite_label_to_json(const CompositeLabel& l) {
    json j;
    switch (l.kind) {
        case CompositeLabel::Kind::interaction:
            j["kind"] = "interaction";
            j["msg"] = l.msg;
            j["emitter"] = l.emitter;
            j["receiver"] = l.receiver;
            break;
        case CompositeLabel::Kind::send:
            j["kind"] = "send";
            j["msg"] = l.msg;
            j["emitter"] = l.emitter;
            j["receiver"] = l.receiver;
            break;
        case CompositeLabel::Kind::consume:
            j["kind"] = "consume";
            j["msg"] = l.msg;
            j["receiver"] = l.receiver;
            break;
        case CompositeLabel::Kind::internal_step:
            j["kind"] = "internal";
            j["service"] = l.emitter;
            break;
    }
    return j;
}

} // namespace

nlohmann::json trace_to_json(const CompositeLts&, const Trace& t) {
    json arr = json::array();
    for (const CompositeLabel& l : t) arr.push_back(composite_label_to_json(l));
    return arr;
}

std::string to_json(const CompositeLts& c) {
    // same document shape as the Lts format, states rendered and sorted
    std::vector<std::string> names;
    names.reserve(c.states.size());
    for (const CompositeState& s : c.states) names.push_back(s.str());

    json doc;
    std::vector<std::string> sorted_names = names;
    std::sort(sorted_names.begin(), sorted_names.end());
    doc["states"] = sorted_names;
    doc["initial"] = names[0];
    std::vector<std::string> finals;
    for (int f : c.finals) finals.push_back(names[static_cast<size_t>(f)]);
    std::sort(finals.begin(), finals.end());
    doc["finals"] = finals;

    std::vector<std::pair<std::pair<std::string, std::string>, json>> rows;
    for (const CompositeTransition& t : c.transitions) {
        json jt;
        jt["from"] = names[static_cast<size_t>(t.from)];
        jt["label"] = composite_label_to_json(t.label);
        jt["to"] = names[static_cast<size_t>(t.to)];
        rows.push_back({{names[static_cast<size_t>(t.from)], t.label.str() + ">" +
                             names[static_cast<size_t>(t.to)]},
                        std::move(jt)});
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    json ts = json::array();
    for (auto& r : rows) ts.push_back(std::move(r.second));
    doc["transitions"] = std::move(ts);
    return doc.dump(2) + "\n";
}

std::string to_dot(const CompositeLts& c, const std::string& name) {
    std::ostringstream os;
    os << "digraph \"" << name << "\" {\n  rankdir=LR;\n  node [shape=circle];\n";
    os << "  __init [shape=point, style=invis];\n";
    for (int i = 0; i < static_cast<int>(c.states.size()); ++i) {
        os << "  \"" << c.states[static_cast<size_t>(i)].str() << "\"";
        if (c.is_final(i)) os << " [shape=doublecircle]";
        os << ";\n";
    }
    os << "  __init -> \"" << c.states[0].str() << "\";\n";
    for (const CompositeTransition& t : c.transitions)
        os << "  \"" << c.states[static_cast<size_t>(t.from)].str() << "\" -> \""
           << c.states[static_cast<size_t>(t.to)].str() << "\" [label=\"" << t.label.str()
           << "\"];\n";
    os << "}\n";
    return os.str();
}

} // namespace svan
