#include "svan/compatibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>

namespace svan {

using nlohmann::json;

std::string Notion::str() const {
    switch (kind) {
        case Kind::deadlock_free: return "df";
        case Kind::unidirectional_complement: return "uc(big=" + std::to_string(big) + ")";
        case Kind::unspecified_receptions: return "ur";
    }
    return "?";
}

namespace {

std::vector<Label> observable_out_labels(const detail::Indexed& ix, int s) {
    std::vector<Label> out;
    for (auto [li, tgt] : ix.out[static_cast<size_t>(s)]) {
        (void)tgt;
        const Label& l = ix.labels[static_cast<size_t>(li)];
        if (!l.is_tau()) out.push_back(l);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---- compatibility notions -------------------------------------------------

json label_list(const std::vector<Label>& ls) {
    json a = json::array();
    for (const Label& l : ls) a.push_back(l.str());
    return a;
}

/// Backward closure from the product finals; DF = every reachable state can
/// still reach a final one.
std::vector<char> coreachable(const CompositeLts& c) {
    std::vector<std::vector<int>> in(c.states.size());
    for (const CompositeTransition& t : c.transitions)
        in[static_cast<size_t>(t.to)].push_back(t.from);
    std::vector<char> ok(c.states.size(), 0);
    std::deque<int> queue;
    for (int f : c.finals) {
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
    return ok;
}

Trace witness_to(const CompositeLts& c, int target) {
    std::vector<int> parent(c.states.size(), -1);
    std::vector<char> seen(c.states.size(), 0);
    auto out = c.out_index();
    std::deque<int> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int e : out[static_cast<size_t>(s)]) {
            int to = c.transitions[static_cast<size_t>(e)].to;
            if (!seen[static_cast<size_t>(to)]) {
                seen[static_cast<size_t>(to)] = 1;
                parent[static_cast<size_t>(to)] = e;
                queue.push_back(to);
            }
        }
    }
    Trace t;
    while (target != 0 && parent[static_cast<size_t>(target)] >= 0) {
        int e = parent[static_cast<size_t>(target)];
        t.push_back(c.transitions[static_cast<size_t>(e)].label);
        target = c.transitions[static_cast<size_t>(e)].from;
    }
    std::reverse(t.begin(), t.end());
    return t;
}

} // namespace

Verdict check_compat(const Lts& l1, const Lts& l2, const Notion& notion) {
    CompositeLts prod = sync_product({l1, l2});
    detail::Indexed ix1 = detail::index_lts(l1), ix2 = detail::index_lts(l2);

    Verdict v;
    v.check = "compat:" + notion.str();

    // complementarity conditions are reported before the deadlock analysis so
    // the unmatched label surfaces as the primary evidence
    if (notion.kind != Notion::Kind::deadlock_free) {
        for (int s = 0; s < static_cast<int>(prod.states.size()); ++s) {
            const CompositeState& cs = prod.states[static_cast<size_t>(s)];
            std::vector<Label> offer1 =
                observable_out_labels(ix1, ix1.id.at(cs.locals[0]));
            std::vector<Label> offer2 =
                observable_out_labels(ix2, ix2.id.at(cs.locals[1]));

            auto has_complement = [](const Label& l, const std::vector<Label>& offers) {
                return std::any_of(offers.begin(), offers.end(),
                                   [&](const Label& o) { return o.complements(l); });
            };

            std::string unmatched;
            if (notion.kind == Notion::Kind::unidirectional_complement) {
                const auto& small = (notion.big == 2) ? offer1 : offer2;
                const auto& big = (notion.big == 2) ? offer2 : offer1;
                for (const Label& l : small)
                    if (!has_complement(l, big)) {
                        unmatched = l.str();
                        break;
                    }
            } else {  // unspecified receptions
                for (const Label& l : offer1)
                    if (l.is_emission() && !has_complement(l, offer2)) {
                        unmatched = l.str();
                        break;
                    }
                if (unmatched.empty())
                    for (const Label& l : offer2)
                        if (l.is_emission() && !has_complement(l, offer1)) {
                            unmatched = l.str();
                            break;
                        }
            }
            if (!unmatched.empty()) {
                v.holds = false;
                v.evidence["state"] = cs.str();
                v.evidence["unmatched"] = unmatched;
                v.evidence["witness"] = trace_to_json(prod, witness_to(prod, s));
                v.evidence["offers"] = json::object(
                    {{"service1", label_list(offer1)}, {"service2", label_list(offer2)}});
                return v;
            }
        }
    }

    // deadlock-freeness: every reachable product state can reach a final state
    std::vector<char> ok = coreachable(prod);
    auto out = prod.out_index();
    for (int s = 0; s < static_cast<int>(prod.states.size()); ++s) {
        if (ok[static_cast<size_t>(s)]) continue;
        // prefer a genuine sink for the report; fall back to the first
        // non-coreachable state (livelock)
        int report = s;
        for (int d = 0; d < static_cast<int>(prod.states.size()); ++d)
            if (!ok[static_cast<size_t>(d)] && out[static_cast<size_t>(d)].empty() &&
                !prod.is_final(d)) {
                report = d;
                break;
            }
        v.holds = false;
        v.evidence["state"] = prod.states[static_cast<size_t>(report)].str();
        v.evidence["reason"] =
            out[static_cast<size_t>(report)].empty() ? "deadlock" : "no-final-path";
        v.evidence["witness"] = trace_to_json(prod, witness_to(prod, report));
        return v;
    }

    v.holds = true;
    v.evidence["states-explored"] = prod.states.size();
    return v;
}

// ---- static measures and flooding -------------------------------------------

namespace {

double param_similarity(const Label& a, const Label& b) {
    if (a.params == b.params) return 1.0;
    std::map<std::string, int> ca, cb;
    for (const std::string& p : a.params) ca[p]++;
    for (const std::string& p : b.params) cb[p]++;
    int inter = 0, uni = 0;
    for (auto& [k, n] : ca) {
        auto it = cb.find(k);
        int m = (it == cb.end()) ? 0 : it->second;
        inter += std::min(n, m);
        uni += std::max(n, m);
    }
    for (auto& [k, m] : cb)
        if (!ca.count(k)) uni += m;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

/// Exhaustive best bipartite matching over feasible pairs, maximizing the
/// (primary, secondary) weight sum lexicographically. Sides are small here
/// (branching degrees of desk-size protocols).
struct MatchResult {
    double primary = 0, secondary = 0;
    int count = 0;
};

template <typename Feasible, typename Weight>
MatchResult best_matching(int n1, int n2, Feasible feasible, Weight weight) {
    MatchResult best;
    std::vector<char> used(static_cast<size_t>(n2), 0);
    auto better = [](const MatchResult& a, const MatchResult& b) {
        if (a.primary != b.primary) return a.primary > b.primary;
        return a.secondary > b.secondary;
    };
    auto rec = [&](auto&& self, int i, MatchResult cur) -> void {
        if (i == n1) {
            if (better(cur, best)) best = cur;
            return;
        }
        self(self, i + 1, cur);  // leave item i unmatched
        for (int j = 0; j < n2; ++j) {
            if (used[static_cast<size_t>(j)] || !feasible(i, j)) continue;
            used[static_cast<size_t>(j)] = 1;
            auto [p, s] = weight(i, j);
            self(self, i + 1, MatchResult{cur.primary + p, cur.secondary + s, cur.count + 1});
            used[static_cast<size_t>(j)] = 0;
        }
    };
    rec(rec, 0, MatchResult{});
    return best;
}

double nature_score(const detail::Indexed& a, int s, const detail::Indexed& b, int t,
                    const FloodParams& p) {
    double fin = (a.final_flag[static_cast<size_t>(s)] == b.final_flag[static_cast<size_t>(t)])
                     ? 1.0 : 0.0;
    if (!p.include_initial_nature) return fin;
    double ini = ((s == a.initial) == (t == b.initial)) ? 1.0 : 0.0;
    return (fin + ini) / 2.0;
}

double static_pair(const detail::Indexed& a, int s, const detail::Indexed& b, int t,
                   const FloodParams& p) {
    std::vector<Label> la = observable_out_labels(a, s), lb = observable_out_labels(b, t);

    double label_score, param_score;
    if (la.empty() && lb.empty()) {
        label_score = 1.0;
        param_score = 1.0;
    } else {
        MatchResult m = best_matching(
            static_cast<int>(la.size()), static_cast<int>(lb.size()),
            [&](int i, int j) {
                return la[static_cast<size_t>(i)].complements(lb[static_cast<size_t>(j)]);
            },
            [&](int i, int j) {
                return std::pair<double, double>{
                    1.0, param_similarity(la[static_cast<size_t>(i)], lb[static_cast<size_t>(j)])};
            });
        label_score = m.primary / static_cast<double>(std::max(la.size(), lb.size()));
        param_score = (m.count == 0) ? 0.0 : m.secondary / m.count;
    }
    return p.weight_nature * nature_score(a, s, b, t, p) + p.weight_label * label_score +
           p.weight_param * param_score;
}

struct FloodSide {
    // per state: observable transitions (label, other-end) and tau other-ends
    std::vector<std::vector<std::pair<Label, int>>> obs;
    std::vector<std::vector<int>> tau;
};

FloodSide collect(const detail::Indexed& ix, bool forward) {
    FloodSide side;
    side.obs.resize(static_cast<size_t>(ix.n()));
    side.tau.resize(static_cast<size_t>(ix.n()));
    const auto& adj = forward ? ix.out : ix.in;
    for (int s = 0; s < ix.n(); ++s) {
        for (auto [li, other] : adj[static_cast<size_t>(s)]) {
            const Label& l = ix.labels[static_cast<size_t>(li)];
            if (l.is_tau())
                side.tau[static_cast<size_t>(s)].push_back(other);
            else
                side.obs[static_cast<size_t>(s)].push_back({l, other});
        }
        std::sort(side.obs[static_cast<size_t>(s)].begin(), side.obs[static_cast<size_t>(s)].end());
        std::sort(side.tau[static_cast<size_t>(s)].begin(), side.tau[static_cast<size_t>(s)].end());
    }
    return side;
}

/// One direction of the propagated score: best-value matching of
/// complementary transition pairs plus tau moves matched against an idle
/// partner, averaged over all transitions considered.
double flood_dir(const FloodSide& sa, const FloodSide& sb, int s, int t,
                 const std::vector<std::vector<double>>& d, bool rows_are_a) {
    const auto& oa = sa.obs[static_cast<size_t>(s)];
    const auto& ob = sb.obs[static_cast<size_t>(t)];
    const auto& ta = sa.tau[static_cast<size_t>(s)];
    const auto& tb = sb.tau[static_cast<size_t>(t)];

    size_t denom = std::max(oa.size(), ob.size()) + ta.size() + tb.size();
    if (denom == 0) return 1.0;

    auto cell = [&](int i, int j) { return rows_are_a ? d[static_cast<size_t>(i)][static_cast<size_t>(j)]
                                                      : d[static_cast<size_t>(j)][static_cast<size_t>(i)]; };

    MatchResult m = best_matching(
        static_cast<int>(oa.size()), static_cast<int>(ob.size()),
        [&](int i, int j) {
            return oa[static_cast<size_t>(i)].first.complements(ob[static_cast<size_t>(j)].first);
        },
        [&](int i, int j) {
            return std::pair<double, double>{
                cell(oa[static_cast<size_t>(i)].second, ob[static_cast<size_t>(j)].second), 0.0};
        });

    double total = m.primary;
    for (int other : ta) total += cell(other, t);
    for (int other : tb) total += cell(s, other);
    return total / static_cast<double>(denom);
}

void check_params(const FloodParams& p) {
    double sum = p.weight_nature + p.weight_label + p.weight_param;
    if (!(p.w > 0.0 && p.w < 1.0) || !(p.epsilon > 0.0) || p.max_iter < 1 ||
        p.weight_nature < 0 || p.weight_label < 0 || p.weight_param < 0 ||
        std::abs(sum - 1.0) > 1e-9)
        throw AnalysisError("bad-params",
                            "flooding parameters out of range (need w in (0,1), epsilon > 0, "
                            "max_iter >= 1, static weights >= 0 summing to 1)");
}

} // namespace

double static_compat(const Lts& l1, const std::string& s1, const Lts& l2,
                     const std::string& s2, const FloodParams& params, const Notion&) {
    check_params(params);
    detail::Indexed a = detail::index_lts(l1), b = detail::index_lts(l2);
    if (!a.id.count(s1) || !b.id.count(s2))
        throw AnalysisError("unknown-state", "state does not belong to its service");
    return static_pair(a, a.id.at(s1), b, b.id.at(s2), params);
}

CompatMatrix compat_degree(const Lts& l1, const Lts& l2, const Notion& notion,
                           const FloodParams& params) {
    check_params(params);
    detail::Indexed a = detail::index_lts(l1), b = detail::index_lts(l2);
    int n = a.n(), m = b.n();

    CompatMatrix mat;
    mat.rows = l1.states;
    mat.cols = l2.states;
    mat.notion = notion;
    mat.params = params;

    std::vector<std::vector<double>> stat(static_cast<size_t>(n),
                                          std::vector<double>(static_cast<size_t>(m), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            stat[static_cast<size_t>(i)][static_cast<size_t>(j)] = static_pair(a, i, b, j, params);

    FloodSide fa = collect(a, true), ba = collect(a, false);
    FloodSide fb = collect(b, true), bb = collect(b, false);

    std::vector<std::vector<double>> d = stat, nd = stat;
    for (int iter = 1; iter <= params.max_iter; ++iter) {
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
                double fw = flood_dir(fa, fb, i, j, d, true);
                double bw = flood_dir(ba, bb, i, j, d, true);
                double val = (1.0 - params.w) * stat[static_cast<size_t>(i)][static_cast<size_t>(j)] +
                             params.w * (fw + bw) / 2.0;
                nd[static_cast<size_t>(i)][static_cast<size_t>(j)] = val;
                delta = std::max(delta,
                                 std::abs(val - d[static_cast<size_t>(i)][static_cast<size_t>(j)]));
            }
        }
        d.swap(nd);
        mat.iterations = iter;
        if (delta < params.epsilon) {
            mat.converged = true;
            break;
        }
    }
    mat.degrees = std::move(d);
    return mat;
}

std::string to_csv(const CompatMatrix& m) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const std::string& c : m.cols) os << ',' << c;
    os << '\n';
    for (size_t r = 0; r < m.rows.size(); ++r) {
        os << m.rows[r];
        for (size_t c = 0; c < m.cols.size(); ++c) os << ',' << m.degrees[r][c];
        os << '\n';
    }
    return os.str();
}

std::string to_text_table(const CompatMatrix& m) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    size_t width = 0;
    for (const std::string& r : m.rows) width = std::max(width, r.size());
    os << std::string(width, ' ');
    for (const std::string& c : m.cols) os << "  " << std::setw(6) << c;
    os << '\n';
    for (size_t r = 0; r < m.rows.size(); ++r) {
        os << std::setw(static_cast<int>(width)) << m.rows[r];
        for (size_t c = 0; c < m.cols.size(); ++c) os << "  " << std::setw(6) << m.degrees[r][c];
        os << '\n';
    }
    os << "iterations: " << m.iterations << (m.converged ? "" : "  [not-converged]") << '\n';
    return os.str();
}

nlohmann::json to_json(const CompatMatrix& m) {
    json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["degrees"] = m.degrees;
    j["iterations"] = m.iterations;
    j["converged"] = m.converged;
    j["notion"] = m.notion.str();
    j["params"] = {{"w", m.params.w},
                   {"epsilon", m.params.epsilon},
                   {"max_iter", m.params.max_iter},
                   {"weights", {m.params.weight_nature, m.params.weight_label,
                                m.params.weight_param}},
                   {"include_initial_nature", m.params.include_initial_nature}};
    return j;
}

} // namespace svan
