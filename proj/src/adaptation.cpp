#include "svan/adaptation.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "svan/composition.hpp"

namespace svan {

using nlohmann::json;

namespace {

std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(strip(cur));
    return out;
}

VectorEntry parse_entry(const std::string& text, int lineno) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ParseError("line " + std::to_string(lineno) +
                         ": vector entry needs the form service:msg! or service:msg?");
    std::string svc = strip(text.substr(0, colon));
    std::string rest = strip(text.substr(colon + 1));
    size_t dir_pos = rest.find_first_of("!?");
    if (svc.empty() || dir_pos == std::string::npos || dir_pos == 0)
        throw ParseError("line " + std::to_string(lineno) + ": malformed vector entry \"" +
                         text + "\"");
    std::string msg = strip(rest.substr(0, dir_pos));
    Direction dir = rest[dir_pos] == '!' ? Direction::emission : Direction::reception;
    std::string vars_text = strip(rest.substr(dir_pos + 1));
    std::vector<std::string> vars;
    if (!vars_text.empty())
        for (const std::string& v : split(vars_text, ',')) {
            if (v.empty())
                throw ParseError("line " + std::to_string(lineno) + ": empty variable name");
            vars.push_back(v);
        }
    return {svc, Label::make(msg, dir, vars)};
}

} // namespace

Contract parse_contract(const std::string& text) {
    Contract c;
    std::set<std::string> declared, vector_names;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;

        if (line.rfind("services:", 0) == 0) {
            for (const std::string& s : split(line.substr(9), ',')) {
                if (s.empty())
                    throw ParseError("line " + std::to_string(lineno) + ": empty service name");
                if (!declared.insert(s).second)
                    throw SemanticError("duplicate-service",
                                        "service \"" + s + "\" declared twice");
                c.services.push_back(s);
            }
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) +
                             ": expected \"services:\" or \"NAME = <...>\"");
        std::string name = strip(line.substr(0, eq));
        std::string body = strip(line.substr(eq + 1));
        if (name.empty() || body.size() < 2 || body.front() != '<' || body.back() != '>')
            throw ParseError("line " + std::to_string(lineno) +
                             ": vector body must be enclosed in <...>");
        if (!vector_names.insert(name).second)
            throw SemanticError("duplicate-vector", "vector \"" + name + "\" declared twice");

        SyncVector v{name, {}};
        std::set<std::string> seen_services;
        for (const std::string& part : split(body.substr(1, body.size() - 2), ';')) {
            if (part.empty())
                throw ParseError("line " + std::to_string(lineno) + ": empty vector entry");
            VectorEntry e = parse_entry(part, lineno);
            if (!declared.count(e.service))
                throw SemanticError("undeclared-service", "line " + std::to_string(lineno) +
                                        ": service \"" + e.service + "\" is not declared");
            if (!seen_services.insert(e.service).second)
                throw SemanticError("duplicate-service",
                                    "line " + std::to_string(lineno) + ": service \"" +
                                        e.service + "\" appears twice in vector " + name);
            v.entries.push_back(std::move(e));
        }
        c.vectors.push_back(std::move(v));
    }
    if (c.services.empty())
        throw SemanticError("missing-services", "contract declares no services");
    return c;
}

std::string serialize_contract(const Contract& c) {
    std::ostringstream os;
    os << "services: ";
    for (size_t i = 0; i < c.services.size(); ++i) {
        if (i) os << ", ";
        os << c.services[i];
    }
    os << '\n';
    for (const SyncVector& v : c.vectors) {
        os << v.name << " = <";
        for (size_t i = 0; i < v.entries.size(); ++i) {
            if (i) os << "; ";
            const VectorEntry& e = v.entries[i];
            os << e.service << ':' << e.label.message
               << (e.label.dir == Direction::emission ? '!' : '?');
            for (size_t k = 0; k < e.label.params.size(); ++k)
                os << (k ? "," : "") << e.label.params[k];
        }
        os << ">\n";
    }
    return os.str();
}

namespace {

struct SynthState {
    std::vector<int> locals;          // per-service state index
    std::vector<unsigned> progress;   // per-vector bitmask of fired entries
    unsigned long long vars = 0;      // bound variables
    auto operator<=>(const SynthState&) const = default;
};

struct SynthMove {
    Label label;                      // adaptor action (mirror of the service label)
    std::string vector_name;          // empty for service-internal moves
    std::string service;
    SynthState target;
};

struct Synthesizer {
    std::vector<std::string> names;
    std::vector<detail::Indexed> ix;
    const Contract& contract;
    std::map<std::string, int> service_index;
    std::map<std::string, int> var_index;
    std::vector<unsigned> full_mask;

    Synthesizer(const std::vector<std::pair<std::string, Lts>>& services, const Contract& c)
        : contract(c) {
        for (const auto& [name, lts] : services) {
            if (!is_valid(lts))
                throw SemanticError("invalid-service",
                                    "service \"" + name + "\" violates Lts invariants");
            service_index[name] = static_cast<int>(names.size());
            names.push_back(name);
            ix.push_back(detail::index_lts(lts));
        }
        for (const std::string& s : c.services)
            if (!service_index.count(s))
                throw SemanticError("missing-service",
                                    "contract service \"" + s + "\" has no Lts");
        for (const SyncVector& v : c.vectors) {
            if (v.entries.size() >= 32)
                throw AnalysisError("vector-too-wide", "vector " + v.name + " has too many entries");
            full_mask.push_back((1u << v.entries.size()) - 1u);
            for (const VectorEntry& e : v.entries) {
                const detail::Indexed& sx = ix[static_cast<size_t>(service_index.at(e.service))];
                bool known = std::any_of(sx.labels.begin(), sx.labels.end(), [&](const Label& l) {
                    return !l.is_tau() && l.message == e.label.message && l.dir == e.label.dir;
                });
                if (!known)
                    throw SemanticError("unknown-message",
                                        "vector " + v.name + ": service \"" + e.service +
                                            "\" has no label " + e.label.message +
                                            (e.label.dir == Direction::emission ? "!" : "?"));
                for (const std::string& var : e.label.params)
                    if (var_index.emplace(var, static_cast<int>(var_index.size())).second &&
                        var_index.size() > 64)
                        throw AnalysisError("too-many-variables",
                                            "contracts support at most 64 variables");
            }
        }
    }

    unsigned long long var_bits(const VectorEntry& e) const {
        unsigned long long bits = 0;
        for (const std::string& v : e.label.params)
            bits |= 1ull << var_index.at(v);
        return bits;
    }

    bool all_final(const SynthState& s) const {
        for (size_t i = 0; i < ix.size(); ++i)
            if (!ix[i].final_flag[static_cast<size_t>(s.locals[i])]) return false;
        return true;
    }

    std::vector<SynthMove> moves(const SynthState& s) const {
        std::vector<SynthMove> out;
        // service-internal steps
        for (size_t i = 0; i < ix.size(); ++i)
            for (auto [li, tgt] : ix[i].out[static_cast<size_t>(s.locals[i])])
                if (ix[i].tau_label(li)) {
                    SynthState t = s;
                    t.locals[i] = tgt;
                    out.push_back({Label::tau(), "", names[i], std::move(t)});
                }
        // vector entries
        for (size_t vi = 0; vi < contract.vectors.size(); ++vi) {
            const SyncVector& v = contract.vectors[vi];
            unsigned prog = s.progress[vi];
            for (size_t ei = 0; ei < v.entries.size(); ++ei) {
                if (prog & (1u << ei)) continue;
                const VectorEntry& e = v.entries[ei];
                int si = service_index.at(e.service);
                const detail::Indexed& sx = ix[static_cast<size_t>(si)];

                if (e.label.dir == Direction::reception) {
                    // adaptor emission: all of the vector's receptions first,
                    // and every variable must already be bound
                    bool receptions_done = true;
                    for (size_t k = 0; k < v.entries.size(); ++k)
                        if (v.entries[k].label.dir == Direction::emission &&
                            !(prog & (1u << k)))
                            receptions_done = false;
                    if (!receptions_done) continue;
                    if ((var_bits(e) & ~s.vars) != 0) continue;
                }

                for (auto [li, tgt] : sx.out[static_cast<size_t>(s.locals[static_cast<size_t>(si)])]) {
                    const Label& sl = sx.labels[static_cast<size_t>(li)];
                    if (sl.is_tau() || sl.message != e.label.message || sl.dir != e.label.dir)
                        continue;
                    SynthState t = s;
                    t.locals[static_cast<size_t>(si)] = tgt;
                    t.progress[vi] |= 1u << ei;
                    if (t.progress[vi] == full_mask[vi]) t.progress[vi] = 0;  // vector may refire
                    if (e.label.dir == Direction::emission) t.vars |= var_bits(e);
                    Label adaptor_label = Label::make(
                        e.label.message,
                        e.label.dir == Direction::emission ? Direction::reception
                                                           : Direction::emission,
                        e.label.params);
                    out.push_back({std::move(adaptor_label), v.name, e.service, std::move(t)});
                }
            }
        }
        return out;
    }
};

} // namespace

AdaptorLts synthesize_adaptor(const std::vector<std::pair<std::string, Lts>>& services,
                              const Contract& contract) {
    Synthesizer synth(services, contract);

    SynthState init;
    for (const auto& x : synth.ix) init.locals.push_back(x.initial);
    init.progress.assign(contract.vectors.size(), 0);

    // deterministic breadth-first exploration; state names follow discovery order
    std::map<SynthState, int> id{{init, 0}};
    std::vector<SynthState> states{init};
    struct Edge {
        int from, to;
        Label label;
        std::string vec, svc;
    };
    std::vector<Edge> edges;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        SynthState s = states[static_cast<size_t>(cur)];
        for (SynthMove& m : synth.moves(s)) {
            auto [it, inserted] = id.emplace(m.target, static_cast<int>(states.size()));
            if (inserted) {
                states.push_back(m.target);
                queue.push_back(it->second);
            }
            edges.push_back({cur, it->second, m.label, m.vector_name, m.service});
        }
    }

    // deadlock suppression: keep only states from which some final state
    // (all services final) is reachable
    std::vector<char> final_flag(states.size(), 0);
    for (size_t i = 0; i < states.size(); ++i)
        final_flag[i] = synth.all_final(states[i]) ? 1 : 0;
    std::vector<std::vector<int>> in(states.size());
    for (const Edge& e : edges) in[static_cast<size_t>(e.to)].push_back(e.from);
    std::vector<char> keep(states.size(), 0);
    std::deque<int> bq;
    for (size_t i = 0; i < states.size(); ++i)
        if (final_flag[i]) {
            keep[i] = 1;
            bq.push_back(static_cast<int>(i));
        }
    while (!bq.empty()) {
        int s = bq.front();
        bq.pop_front();
        for (int p : in[static_cast<size_t>(s)])
            if (!keep[static_cast<size_t>(p)]) {
                keep[static_cast<size_t>(p)] = 1;
                bq.push_back(p);
            }
    }
    if (!keep[0])
        throw AnalysisError("unadaptable",
                            "no behaviour of the contract leads every service to a final state");

    auto state_name = [](int i) { return "g" + std::to_string(i); };
    std::vector<std::string> kept_states;
    std::vector<std::string> kept_finals;
    for (size_t i = 0; i < states.size(); ++i) {
        if (!keep[i]) continue;
        kept_states.push_back(state_name(static_cast<int>(i)));
        if (final_flag[i]) kept_finals.push_back(state_name(static_cast<int>(i)));
    }
    std::vector<Transition> kept_edges;
    std::map<Transition, std::pair<std::string, std::string>> raw_annotations;
    for (const Edge& e : edges) {
        if (!keep[static_cast<size_t>(e.from)] || !keep[static_cast<size_t>(e.to)]) continue;
        Transition t{state_name(e.from), e.label, state_name(e.to)};
        if (!e.vec.empty()) raw_annotations.emplace(t, std::make_pair(e.vec, e.svc));
        kept_edges.push_back(std::move(t));
    }
    Lts pruned = make_lts(std::move(kept_states), state_name(0), std::move(kept_finals),
                          std::move(kept_edges));

    // tau removal, carrying annotations through the fold
    auto [reduced, origin] = detail::tau_reduce_traced(pruned);

    // rename to compact breadth-first ids
    detail::Indexed rix = detail::index_lts(reduced);
    std::map<std::string, std::string> rename;
    std::deque<int> rq{rix.initial};
    std::vector<char> seen(static_cast<size_t>(rix.n()), 0);
    seen[static_cast<size_t>(rix.initial)] = 1;
    int counter = 0;
    while (!rq.empty()) {
        int s = rq.front();
        rq.pop_front();
        rename[rix.names[static_cast<size_t>(s)]] = "r" + std::to_string(counter++);
        for (auto [li, tgt] : rix.out[static_cast<size_t>(s)])
            if (!seen[static_cast<size_t>(tgt)]) {
                seen[static_cast<size_t>(tgt)] = 1;
                rq.push_back(tgt);
            }
    }

    AdaptorLts result;
    std::vector<std::string> rstates, rfinals;
    std::vector<Transition> rtrans;
    for (const std::string& s : reduced.states) rstates.push_back(rename.at(s));
    for (const std::string& s : reduced.finals) rfinals.push_back(rename.at(s));
    for (const Transition& t : reduced.transitions) {
        Transition rt{rename.at(t.from), t.label, rename.at(t.to)};
        auto o = origin.find(t);
        if (o != origin.end()) {
            auto a = raw_annotations.find(o->second);
            if (a != raw_annotations.end()) result.annotations.emplace(rt, a->second);
        }
        rtrans.push_back(std::move(rt));
    }
    result.lts = make_lts(std::move(rstates), rename.at(reduced.initial), std::move(rfinals),
                          std::move(rtrans));
    return result;
}

Verdict verify_adaptation(const std::vector<std::pair<std::string, Lts>>& services,
                          const Lts& adaptor) {
    std::vector<Lts> all;
    std::vector<std::string> names;
    for (const auto& [name, lts] : services) {
        names.push_back(name);
        all.push_back(lts);
    }
    names.push_back("adaptor");
    all.push_back(adaptor);
    int hub = static_cast<int>(all.size()) - 1;

    CompositeLts prod = sync_product(all, hub);

    Verdict v;
    v.check = "adaptation";

    std::vector<std::vector<int>> in(prod.states.size());
    for (const CompositeTransition& t : prod.transitions)
        in[static_cast<size_t>(t.to)].push_back(t.from);
    std::vector<char> ok(prod.states.size(), 0);
    std::deque<int> queue;
    for (int f : prod.finals) {
        ok[static_cast<size_t>(f)] = 1;
        queue.push_back(f);
    }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int p : in[static_cast<size_t>(s)])
            if (!ok[static_cast<size_t>(p)]) {
                ok[static_cast<size_t>(p)] = 1;
                queue.push_back(p);
            }
    }

    auto out = prod.out_index();
    std::vector<detail::Indexed> ix;
    for (const Lts& l : all) ix.push_back(detail::index_lts(l));
    for (int s = 0; s < static_cast<int>(prod.states.size()); ++s) {
        if (ok[static_cast<size_t>(s)]) continue;
        int report = s;
        for (int d = 0; d < static_cast<int>(prod.states.size()); ++d)
            if (!ok[static_cast<size_t>(d)] && out[static_cast<size_t>(d)].empty() &&
                !prod.is_final(d)) {
                report = d;
                break;
            }
        const CompositeState& cs = prod.states[static_cast<size_t>(report)];
        json pending = json::object();
        for (size_t i = 0; i < all.size(); ++i) {
            json labels = json::array();
            int loc = ix[i].id.at(cs.locals[i]);
            for (auto [li, tgt] : ix[i].out[static_cast<size_t>(loc)]) {
                (void)tgt;
                labels.push_back(ix[i].labels[static_cast<size_t>(li)].str());
            }
            pending[names[i]] = std::move(labels);
        }
        v.holds = false;
        v.evidence["state"] = cs.str();
        v.evidence["reason"] = out[static_cast<size_t>(report)].empty() ? "deadlock" : "no-final-path";
        v.evidence["pending"] = std::move(pending);

        std::vector<int> parent(prod.states.size(), -1);
        std::vector<char> seen(prod.states.size(), 0);
        std::deque<int> q2{0};
        seen[0] = 1;
        while (!q2.empty()) {
            int cur = q2.front();
            q2.pop_front();
            for (int e : out[static_cast<size_t>(cur)]) {
                int to = prod.transitions[static_cast<size_t>(e)].to;
                if (!seen[static_cast<size_t>(to)]) {
                    seen[static_cast<size_t>(to)] = 1;
                    parent[static_cast<size_t>(to)] = e;
                    q2.push_back(to);
                }
            }
        }
        Trace trace;
        int cur = report;
        while (cur != 0 && parent[static_cast<size_t>(cur)] >= 0) {
            int e = parent[static_cast<size_t>(cur)];
            trace.push_back(prod.transitions[static_cast<size_t>(e)].label);
            cur = prod.transitions[static_cast<size_t>(e)].from;
        }
        std::reverse(trace.begin(), trace.end());
        v.evidence["witness"] = trace_to_json(prod, trace);
        return v;
    }

    v.holds = true;
    v.evidence["states-explored"] = prod.states.size();
    return v;
}

std::string to_json(const AdaptorLts& a) {
    json doc;
    doc["states"] = a.lts.states;
    doc["initial"] = a.lts.initial;
    doc["finals"] = a.lts.finals;
    json ts = json::array();
    for (const Transition& t : a.lts.transitions) {
        json jt;
        jt["from"] = t.from;
        jt["label"] = detail::label_to_json(t.label);
        jt["to"] = t.to;
        auto an = a.annotations.find(t);
        if (an != a.annotations.end()) {
            jt["vector"] = an->second.first;
            jt["service"] = an->second.second;
        }
        ts.push_back(std::move(jt));
    }
    doc["transitions"] = std::move(ts);
    return doc.dump(2) + "\n";
}

std::string to_dot(const AdaptorLts& a, const std::string& name) {
    std::ostringstream os;
    os << "digraph \"" << name << "\" {\n  rankdir=LR;\n  node [shape=circle];\n";
    os << "  __init [shape=point, style=invis];\n";
    for (const std::string& s : a.lts.states) {
        os << "  \"" << s << "\"";
        if (a.lts.is_final(s)) os << " [shape=doublecircle]";
        os << ";\n";
    }
    os << "  __init -> \"" << a.lts.initial << "\";\n";
    for (const Transition& t : a.lts.transitions) {
        os << "  \"" << t.from << "\" -> \"" << t.to << "\" [label=\"" << t.label.str();
        auto an = a.annotations.find(t);
        if (an != a.annotations.end()) os << " [" << an->second.first << "]";
        os << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace svan
