#include "svan/equivalences.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace svan {

using nlohmann::json;

std::string bisim_kind_name(BisimKind k) {
    switch (k) {
        case BisimKind::strong: return "strong";
        case BisimKind::weak: return "weak";
        case BisimKind::branching: return "branching";
    }
    return "?";
}

namespace {

/// Disjoint union of two systems over a shared interned alphabet.
/// tau, when present, is always label index 0 (it sorts first).
struct UnionGraph {
    std::vector<Label> labels;
    int tau = -1;                                       // index of tau, -1 if absent
    std::vector<std::vector<std::pair<int, int>>> out;  // (label, target)
    std::vector<char> final_flag;
    std::vector<char> weak_final;  // tau-path to a final state
    std::vector<std::string> names;
    int n1 = 0;        // states 0..n1-1 come from l1
    int init1 = 0, init2 = 0;

    int n() const { return static_cast<int>(out.size()); }
    bool is_tau(int li) const { return li == tau; }
};

UnionGraph make_union(const Lts& l1, const Lts& l2) {
    UnionGraph g;
    std::set<Label> all(l1.alphabet.begin(), l1.alphabet.end());
    all.insert(l2.alphabet.begin(), l2.alphabet.end());
    g.labels.assign(all.begin(), all.end());
    std::map<Label, int> lid;
    for (int i = 0; i < static_cast<int>(g.labels.size()); ++i) {
        lid[g.labels[static_cast<size_t>(i)]] = i;
        if (g.labels[static_cast<size_t>(i)].is_tau()) g.tau = i;
    }

    detail::Indexed a = detail::index_lts(l1), b = detail::index_lts(l2);
    g.n1 = a.n();
    g.out.assign(static_cast<size_t>(a.n() + b.n()), {});
    g.final_flag.assign(static_cast<size_t>(a.n() + b.n()), 0);
    auto add = [&](const detail::Indexed& ix, int offset, const char* prefix) {
        for (int s = 0; s < ix.n(); ++s) {
            g.names.push_back(std::string(prefix) + ix.names[static_cast<size_t>(s)]);
            g.final_flag[static_cast<size_t>(offset + s)] = ix.final_flag[static_cast<size_t>(s)];
            for (auto [li, tgt] : ix.out[static_cast<size_t>(s)])
                g.out[static_cast<size_t>(offset + s)].push_back(
                    {lid.at(ix.labels[static_cast<size_t>(li)]), offset + tgt});
            std::sort(g.out[static_cast<size_t>(offset + s)].begin(),
                      g.out[static_cast<size_t>(offset + s)].end());
        }
    };
    add(a, 0, "l1:");
    add(b, a.n(), "l2:");
    g.init1 = a.initial;
    g.init2 = a.n() + b.initial;

    // weak finality via backward closure over tau edges
    g.weak_final = g.final_flag;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < g.n(); ++s) {
            if (g.weak_final[static_cast<size_t>(s)]) continue;
            for (auto [li, tgt] : g.out[static_cast<size_t>(s)])
                if (g.is_tau(li) && g.weak_final[static_cast<size_t>(tgt)]) {
                    g.weak_final[static_cast<size_t>(s)] = 1;
                    changed = true;
                    break;
                }
        }
    }
    return g;
}

std::vector<int> tau_closure_of(const UnionGraph& g, int s) {
    std::vector<int> closure{s};
    std::set<int> seen{s};
    std::deque<int> queue{s};
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (auto [li, tgt] : g.out[static_cast<size_t>(cur)])
            if (g.is_tau(li) && seen.insert(tgt).second) {
                closure.push_back(tgt);
                queue.push_back(tgt);
            }
    }
    std::sort(closure.begin(), closure.end());
    return closure;
}

/// Saturated moves: for observable a, s => s1 -a-> s2 => t; the special label
/// EPS collects s => t (reflexive). Used for the weak relation and for
/// evidence extraction.
constexpr int EPS = -2;

std::map<int, std::vector<std::pair<int, int>>> saturate(const UnionGraph& g) {
    std::map<int, std::vector<std::pair<int, int>>> weak_out;  // state -> (label|EPS, target)
    std::vector<std::vector<int>> closure(static_cast<size_t>(g.n()));
    for (int s = 0; s < g.n(); ++s) closure[static_cast<size_t>(s)] = tau_closure_of(g, s);
    for (int s = 0; s < g.n(); ++s) {
        std::set<std::pair<int, int>> moves;
        for (int c : closure[static_cast<size_t>(s)]) {
            moves.insert({EPS, c});
            for (auto [li, tgt] : g.out[static_cast<size_t>(c)]) {
                if (g.is_tau(li)) continue;
                for (int t : closure[static_cast<size_t>(tgt)]) moves.insert({li, t});
            }
        }
        weak_out[s].assign(moves.begin(), moves.end());
    }
    return weak_out;
}

using Partition = std::vector<int>;  // state -> block id

Partition initial_partition(const UnionGraph& g, bool weak_prop) {
    Partition p(static_cast<size_t>(g.n()));
    for (int s = 0; s < g.n(); ++s)
        p[static_cast<size_t>(s)] =
            (weak_prop ? g.weak_final : g.final_flag)[static_cast<size_t>(s)] ? 1 : 0;
    return p;
}

int block_count(const Partition& p) {
    return static_cast<int>(std::set<int>(p.begin(), p.end()).size());
}

/// Signature refinement for strong (direct moves) and weak (saturated moves)
/// bisimulation. Returns the refinement history, history.back() is stable.
template <typename Moves>
std::vector<Partition> refine_by_signature(const UnionGraph& g, Partition p, Moves moves) {
    std::vector<Partition> history{p};
    while (true) {
        std::map<std::pair<int, std::set<std::pair<int, int>>>, int> key_to_block;
        Partition np(static_cast<size_t>(g.n()));
        for (int s = 0; s < g.n(); ++s) {
            std::set<std::pair<int, int>> sig;
            for (auto [li, tgt] : moves(s)) sig.insert({li, p[static_cast<size_t>(tgt)]});
            auto key = std::make_pair(p[static_cast<size_t>(s)], std::move(sig));
            auto [it, inserted] = key_to_block.emplace(std::move(key),
                                                       static_cast<int>(key_to_block.size()));
            np[static_cast<size_t>(s)] = it->second;
        }
        if (block_count(np) == block_count(p)) break;
        p = np;
        history.push_back(p);
    }
    return history;
}

/// Groote-Vaandrager stability loop for branching bisimulation: a block B is
/// split by (a, B') when only part of B can reach, via inert tau steps inside
/// B, a state performing a into B'. Inert pairs (a = tau, B' = B) are skipped.
std::vector<Partition> refine_branching(const UnionGraph& g, Partition p) {
    std::vector<Partition> history{p};
    bool changed = true;
    while (changed) {
        changed = false;
        std::set<int> block_ids(p.begin(), p.end());
        int fresh = *std::max_element(p.begin(), p.end()) + 1;
        for (int b : block_ids) {
            if (changed) break;
            std::vector<int> members;
            for (int s = 0; s < g.n(); ++s)
                if (p[static_cast<size_t>(s)] == b) members.push_back(s);
            if (members.size() < 2) continue;

            std::set<std::pair<int, int>> splitters;  // (label, target block)
            for (int s : members)
                for (auto [li, tgt] : g.out[static_cast<size_t>(s)]) {
                    if (g.is_tau(li) && p[static_cast<size_t>(tgt)] == b) continue;
                    splitters.insert({li, p[static_cast<size_t>(tgt)]});
                }

            for (auto [li, tb] : splitters) {
                // base: members with a direct (li, tb) move
                std::set<int> pos;
                for (int s : members)
                    for (auto [mli, tgt] : g.out[static_cast<size_t>(s)])
                        if (mli == li && p[static_cast<size_t>(tgt)] == tb) {
                            pos.insert(s);
                            break;
                        }
                // closure: tau predecessors inside the block
                bool grew = true;
                while (grew) {
                    grew = false;
                    for (int s : members) {
                        if (pos.count(s)) continue;
                        for (auto [mli, tgt] : g.out[static_cast<size_t>(s)])
                            if (g.is_tau(mli) && p[static_cast<size_t>(tgt)] == b &&
                                pos.count(tgt)) {
                                pos.insert(s);
                                grew = true;
                                break;
                            }
                    }
                }
                if (!pos.empty() && pos.size() < members.size()) {
                    Partition np = p;
                    for (int s : members)
                        if (!pos.count(s)) np[static_cast<size_t>(s)] = fresh;
                    p = np;
                    history.push_back(p);
                    changed = true;
                    break;
                }
            }
        }
    }
    return history;
}

/// Best-effort distinguishing action sequence from the refinement history:
/// walk back to the first round separating the pair and follow a move class
/// present on one side only.
template <typename Moves>
std::vector<std::string> distinguishing_experiment(const UnionGraph& g,
                                                   const std::vector<Partition>& history,
                                                   Moves moves, int s, int t) {
    size_t k = 0;
    while (k < history.size() && history[k][static_cast<size_t>(s)] ==
                                     history[k][static_cast<size_t>(t)])
        ++k;
    if (k >= history.size()) return {};  // not separated: no experiment
    if (k == 0) return {};               // differ by final status alone
    const Partition& prev = history[k - 1];

    std::map<int, std::set<int>> s_classes, t_classes;  // label -> reachable classes
    std::map<std::pair<int, int>, int> s_target, t_target;
    for (auto [li, tgt] : moves(s)) {
        s_classes[li].insert(prev[static_cast<size_t>(tgt)]);
        s_target.try_emplace({li, prev[static_cast<size_t>(tgt)]}, tgt);
    }
    for (auto [li, tgt] : moves(t)) {
        t_classes[li].insert(prev[static_cast<size_t>(tgt)]);
        t_target.try_emplace({li, prev[static_cast<size_t>(tgt)]}, tgt);
    }

    std::set<int> all_labels;
    for (auto& [li, _] : s_classes) all_labels.insert(li);
    for (auto& [li, _] : t_classes) all_labels.insert(li);
    for (int li : all_labels) {
        if (s_classes[li] == t_classes[li]) continue;
        bool on_s = true;
        std::set<int> diff;
        std::set_difference(s_classes[li].begin(), s_classes[li].end(),
                            t_classes[li].begin(), t_classes[li].end(),
                            std::inserter(diff, diff.begin()));
        if (diff.empty()) {
            on_s = false;
            std::set_difference(t_classes[li].begin(), t_classes[li].end(),
                                s_classes[li].begin(), s_classes[li].end(),
                                std::inserter(diff, diff.begin()));
        }
        int cls = *diff.begin();
        std::string act = (li == EPS) ? "tau"
                          : g.is_tau(li) ? "tau"
                                         : g.labels[static_cast<size_t>(li)].str();
        int from_have = on_s ? s_target.at({li, cls}) : t_target.at({li, cls});
        const auto& other = on_s ? t_classes[li] : s_classes[li];
        if (other.empty()) return {act};
        int other_first = on_s ? t_target.at({li, *other.begin()})
                               : s_target.at({li, *other.begin()});
        auto rest = on_s ? distinguishing_experiment(g, history, moves, from_have, other_first)
                         : distinguishing_experiment(g, history, moves, other_first, from_have);
        rest.insert(rest.begin(), act);
        return rest;
    }
    return {};
}

json partition_evidence(const UnionGraph& g, const Partition& p) {
    json part = json::object();
    for (int s = 0; s < g.n(); ++s)
        part[g.names[static_cast<size_t>(s)]] = p[static_cast<size_t>(s)];
    json j;
    j["partition"] = std::move(part);
    j["blocks"] = block_count(p);
    return j;
}

} // namespace

Verdict bisimilar(const Lts& l1, const Lts& l2, BisimKind kind) {
    UnionGraph g = make_union(l1, l2);

    std::vector<Partition> history;
    std::map<int, std::vector<std::pair<int, int>>> weak_moves;
    auto direct = [&](int s) -> const std::vector<std::pair<int, int>>& {
        return g.out[static_cast<size_t>(s)];
    };
    auto saturated = [&](int s) -> const std::vector<std::pair<int, int>>& {
        return weak_moves[s];
    };

    switch (kind) {
        case BisimKind::strong:
            history = refine_by_signature(g, initial_partition(g, false), direct);
            break;
        case BisimKind::weak:
            weak_moves = saturate(g);
            history = refine_by_signature(g, initial_partition(g, true), saturated);
            break;
        case BisimKind::branching:
            history = refine_branching(g, initial_partition(g, true));
            break;
    }

    const Partition& final_p = history.back();
    Verdict v;
    v.check = bisim_kind_name(kind);
    v.holds = final_p[static_cast<size_t>(g.init1)] == final_p[static_cast<size_t>(g.init2)];
    if (v.holds) {
        v.evidence = partition_evidence(g, final_p);
    } else {
        std::vector<std::string> exp;
        if (kind == BisimKind::strong) {
            exp = distinguishing_experiment(g, history, direct, g.init1, g.init2);
        } else {
            if (weak_moves.empty()) weak_moves = saturate(g);
            exp = distinguishing_experiment(g, history, saturated, g.init1, g.init2);
        }
        v.evidence["experiment"] = exp;
        v.evidence["note"] = exp.empty()
            ? "initial states differ by (weak) final status"
            : "action sequence separating the initial states (not necessarily shortest)";
    }
    return v;
}

namespace {

/// Deterministic subset automaton over the union alphabet. When
/// observable_only is set, tau acts as an epsilon; otherwise it is an
/// ordinary symbol.
struct Dfa {
    std::vector<std::map<int, int>> delta;  // subset-state -> label -> subset-state
    int initial = 0;
};

Dfa determinize(const UnionGraph& g, int init, bool observable_only) {
    auto closure = [&](std::set<int> base) {
        if (!observable_only) return base;
        std::deque<int> queue(base.begin(), base.end());
        while (!queue.empty()) {
            int s = queue.front();
            queue.pop_front();
            for (auto [li, tgt] : g.out[static_cast<size_t>(s)])
                if (g.is_tau(li) && base.insert(tgt).second) queue.push_back(tgt);
        }
        return base;
    };

    Dfa dfa;
    std::map<std::set<int>, int> id;
    std::deque<std::set<int>> queue;
    std::set<int> start = closure({init});
    id[start] = 0;
    dfa.delta.emplace_back();
    queue.push_back(start);
    while (!queue.empty()) {
        std::set<int> cur = queue.front();
        queue.pop_front();
        int cur_id = id.at(cur);
        std::map<int, std::set<int>> step;
        for (int s : cur)
            for (auto [li, tgt] : g.out[static_cast<size_t>(s)]) {
                if (observable_only && g.is_tau(li)) continue;
                step[li].insert(tgt);
            }
        for (auto& [li, base] : step) {
            std::set<int> nxt = closure(base);
            auto [it, inserted] = id.emplace(nxt, static_cast<int>(id.size()));
            if (inserted) {
                dfa.delta.emplace_back();
                queue.push_back(nxt);
            }
            dfa.delta[static_cast<size_t>(cur_id)][li] = it->second;
        }
    }
    return dfa;
}

} // namespace

Verdict trace_equivalent(const Lts& l1, const Lts& l2, bool observable_only) {
    UnionGraph g = make_union(l1, l2);
    Dfa d1 = determinize(g, g.init1, observable_only);
    Dfa d2 = determinize(g, g.init2, observable_only);

    Verdict v;
    v.check = observable_only ? "weak-trace" : "trace";

    // breadth-first search over the pair automaton for an enabledness mismatch
    struct Node { int a, b; };
    std::map<std::pair<int, int>, std::pair<std::pair<int, int>, int>> parent;  // -> (pred, label)
    std::deque<Node> queue{{d1.initial, d2.initial}};
    std::set<std::pair<int, int>> seen{{d1.initial, d2.initial}};
    auto rebuild = [&](std::pair<int, int> node, int last_label) {
        std::vector<std::string> trace;
        trace.push_back(g.labels[static_cast<size_t>(last_label)].str());
        while (parent.count(node)) {
            auto [pred, li] = parent.at(node);
            trace.push_back(g.labels[static_cast<size_t>(li)].str());
            node = pred;
        }
        std::reverse(trace.begin(), trace.end());
        return trace;
    };

    while (!queue.empty()) {
        Node n = queue.front();
        queue.pop_front();
        const auto& ta = d1.delta[static_cast<size_t>(n.a)];
        const auto& tb = d2.delta[static_cast<size_t>(n.b)];
        std::set<int> ea, eb;
        for (auto& [li, _] : ta) ea.insert(li);
        for (auto& [li, _] : tb) eb.insert(li);
        if (ea != eb) {
            std::set<int> symdiff;
            std::set_symmetric_difference(ea.begin(), ea.end(), eb.begin(), eb.end(),
                                          std::inserter(symdiff, symdiff.begin()));
            int li = *symdiff.begin();  // labels are interned in sorted order
            v.holds = false;
            v.evidence["trace"] = rebuild({n.a, n.b}, li);
            v.evidence["in"] = ea.count(li) ? "l1" : "l2";
            return v;
        }
        for (auto& [li, na] : ta) {
            std::pair<int, int> nxt{na, tb.at(li)};
            if (seen.insert(nxt).second) {
                parent[nxt] = {{n.a, n.b}, li};
                queue.push_back({nxt.first, nxt.second});
            }
        }
    }
    v.holds = true;
    return v;
}

} // namespace svan
