#include "svan/model.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include <json.hpp>

namespace svan {

using nlohmann::json;

Label Label::mirrored() const {
    if (is_tau()) return *this;
    Label m = *this;
    m.dir = (dir == Direction::emission) ? Direction::reception : Direction::emission;
    return m;
}

std::string Label::str() const {
    if (is_tau()) return "tau";
    std::string s = message;
    s += (dir == Direction::emission) ? '!' : '?';
    if (!params.empty()) {
        s += '(';
        for (size_t i = 0; i < params.size(); ++i) {
            if (i) s += ',';
            s += params[i];
        }
        s += ')';
    }
    return s;
}

bool Lts::is_final(const std::string& s) const {
    return std::binary_search(finals.begin(), finals.end(), s);
}

namespace {

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

Lts make_lts(std::vector<std::string> states, std::string initial,
             std::vector<std::string> finals, std::vector<Transition> transitions) {
    Lts l;
    l.states = std::move(states);
    l.initial = std::move(initial);
    l.finals = std::move(finals);
    l.transitions = std::move(transitions);
    sort_unique(l.states);
    sort_unique(l.finals);
    sort_unique(l.transitions);
    for (const Transition& t : l.transitions) l.alphabet.push_back(t.label);
    sort_unique(l.alphabet);
    return l;
}

Lts normalize(const Lts& l) {
    return make_lts(l.states, l.initial, l.finals, l.transitions);
}

std::vector<Diagnostic> validate(const Lts& l) {
    std::vector<Diagnostic> out;
    auto error = [&](std::string code, std::string locus, std::string text) {
        out.push_back({Diagnostic::Severity::error, std::move(code), std::move(locus),
                       std::move(text)});
    };
    auto warning = [&](std::string code, std::string locus, std::string text) {
        out.push_back({Diagnostic::Severity::warning, std::move(code), std::move(locus),
                       std::move(text)});
    };

    std::set<std::string> states(l.states.begin(), l.states.end());
    std::set<Label> alphabet(l.alphabet.begin(), l.alphabet.end());

    if (!states.count(l.initial))
        error("unknown-initial", l.initial, "initial state is not declared");
    if (l.finals.empty())
        error("empty-finals", "", "the set of final states is empty");
    for (const std::string& f : l.finals)
        if (!states.count(f)) error("unknown-final", f, "final state is not declared");

    std::set<Label> used;
    for (const Transition& t : l.transitions) {
        std::string locus = t.from + " -" + t.label.str() + "-> " + t.to;
        if (!states.count(t.from))
            error("unknown-state", locus, "transition source is not declared");
        if (!states.count(t.to))
            error("unknown-state", locus, "transition target is not declared");
        if (!alphabet.count(t.label))
            error("unknown-label", locus, "transition label missing from alphabet");
        if (t.label.is_tau() && (!t.label.message.empty() || !t.label.params.empty()))
            error("bad-label", locus, "internal label carries message data");
        if (!t.label.is_tau() && t.label.message.empty())
            error("bad-label", locus, "message label with empty name");
        used.insert(t.label);
    }
    for (const Label& a : l.alphabet)
        if (!used.count(a))
            error("unused-label", a.str(), "alphabet label unused by any transition");

    if (!out.empty() &&
        std::any_of(out.begin(), out.end(), [](const Diagnostic& d) { return d.is_error(); }))
        return out;  // reachability over a broken structure would be noise

    // forward reachability from the initial state
    std::map<std::string, std::vector<const Transition*>> fwd, bwd;
    for (const Transition& t : l.transitions) {
        fwd[t.from].push_back(&t);
        bwd[t.to].push_back(&t);
    }
    std::set<std::string> reachable;
    std::deque<std::string> queue{l.initial};
    reachable.insert(l.initial);
    while (!queue.empty()) {
        std::string s = queue.front();
        queue.pop_front();
        for (const Transition* t : fwd[s])
            if (reachable.insert(t->to).second) queue.push_back(t->to);
    }
    // backward co-reachability from the finals
    std::set<std::string> coreachable(l.finals.begin(), l.finals.end());
    queue.assign(l.finals.begin(), l.finals.end());
    while (!queue.empty()) {
        std::string s = queue.front();
        queue.pop_front();
        for (const Transition* t : bwd[s])
            if (coreachable.insert(t->from).second) queue.push_back(t->from);
    }
    for (const std::string& s : l.states) {
        if (!reachable.count(s))
            warning("unreachable-state", s, "state is unreachable from the initial state");
        else if (!coreachable.count(s))
            warning("no-final-reachable", s, "no final state is reachable from this state");
    }
    return out;
}

bool is_valid(const Lts& l) {
    auto diags = validate(l);
    return std::none_of(diags.begin(), diags.end(),
                        [](const Diagnostic& d) { return d.is_error(); });
}

namespace detail {

Label label_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("label must be an object");
    if (j.contains("tau")) {
        if (j["tau"] != true) throw ParseError("label field \"tau\" must be true");
        return Label::tau();
    }
    if (!j.contains("msg") || !j.contains("dir"))
        throw ParseError("message label needs \"msg\" and \"dir\" fields");
    std::string msg = j.at("msg").get<std::string>();
    if (msg.empty()) throw SemanticError("bad-label", "message name must be non-empty");
    std::string dir = j.at("dir").get<std::string>();
    if (dir != "!" && dir != "?")
        throw ParseError("label direction must be \"!\" or \"?\"");
    std::vector<std::string> params;
    if (j.contains("params")) params = j.at("params").get<std::vector<std::string>>();
    return Label::make(std::move(msg),
                       dir == "!" ? Direction::emission : Direction::reception,
                       std::move(params));
}

json label_to_json(const Label& l) {
    json j;
    if (l.is_tau()) {
        j["tau"] = true;
    } else {
        j["msg"] = l.message;
        j["dir"] = l.is_emission() ? "!" : "?";
        j["params"] = l.params;
    }
    return j;
}

} // namespace detail

Lts parse_lts(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    try {
        if (!doc.is_object()) throw ParseError("document must be a JSON object");
        for (const char* key : {"states", "initial", "finals", "transitions"})
            if (!doc.contains(key))
                throw ParseError(std::string("missing required field \"") + key + "\"");

        std::vector<std::string> states = doc["states"].get<std::vector<std::string>>();
        std::string initial = doc["initial"].get<std::string>();
        std::vector<std::string> finals = doc["finals"].get<std::vector<std::string>>();
        std::vector<Transition> transitions;
        for (const json& jt : doc["transitions"]) {
            if (!jt.contains("from") || !jt.contains("label") || !jt.contains("to"))
                throw ParseError("transition needs \"from\", \"label\" and \"to\"");
            transitions.push_back({jt["from"].get<std::string>(),
                                   detail::label_from_json(jt["label"]),
                                   jt["to"].get<std::string>()});
        }
        Lts l = make_lts(std::move(states), std::move(initial), std::move(finals),
                         std::move(transitions));
        for (const Diagnostic& d : validate(l))
            if (d.is_error())
                throw SemanticError(d.code, d.text + " (" + d.locus + ")");
        return l;
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

std::string serialize_lts(const Lts& l) {
    json doc;
    doc["states"] = l.states;
    doc["initial"] = l.initial;
    doc["finals"] = l.finals;
    json ts = json::array();
    for (const Transition& t : l.transitions) {
        json jt;
        jt["from"] = t.from;
        jt["label"] = detail::label_to_json(t.label);
        jt["to"] = t.to;
        ts.push_back(std::move(jt));
    }
    doc["transitions"] = std::move(ts);
    return doc.dump(2) + "\n";
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

} // namespace

std::string to_dot(const Lts& l, const std::string& name) {
    std::ostringstream os;
    os << "digraph \"" << dot_escape(name) << "\" {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=circle];\n";
    os << "  __init [shape=point, style=invis];\n";
    for (const std::string& s : l.states) {
        os << "  \"" << dot_escape(s) << "\"";
        if (l.is_final(s)) os << " [shape=doublecircle]";
        os << ";\n";
    }
    os << "  __init -> \"" << dot_escape(l.initial) << "\";\n";
    for (const Transition& t : l.transitions)
        os << "  \"" << dot_escape(t.from) << "\" -> \"" << dot_escape(t.to)
           << "\" [label=\"" << dot_escape(t.label.str()) << "\"];\n";
    os << "}\n";
    return os.str();
}

Lts mirror(const Lts& l) {
    std::vector<Transition> ts;
    ts.reserve(l.transitions.size());
    for (const Transition& t : l.transitions)
        ts.push_back({t.from, t.label.mirrored(), t.to});
    return make_lts(l.states, l.initial, l.finals, std::move(ts));
}

namespace detail {

Indexed index_lts(const Lts& l) {
    Indexed ix;
    ix.names = l.states;
    for (int i = 0; i < static_cast<int>(ix.names.size()); ++i)
        ix.id[ix.names[static_cast<size_t>(i)]] = i;
    ix.labels = l.alphabet;
    std::map<Label, int> label_id;
    for (int i = 0; i < static_cast<int>(ix.labels.size()); ++i)
        label_id[ix.labels[static_cast<size_t>(i)]] = i;
    ix.out.assign(ix.names.size(), {});
    ix.in.assign(ix.names.size(), {});
    ix.final_flag.assign(ix.names.size(), 0);
    for (const std::string& f : l.finals) ix.final_flag[static_cast<size_t>(ix.id.at(f))] = 1;
    for (const Transition& t : l.transitions) {
        int s = ix.id.at(t.from), d = ix.id.at(t.to), li = label_id.at(t.label);
        ix.out[static_cast<size_t>(s)].push_back({li, d});
        ix.in[static_cast<size_t>(d)].push_back({li, s});
    }
    for (auto& v : ix.out) std::sort(v.begin(), v.end());
    for (auto& v : ix.in) std::sort(v.begin(), v.end());
    ix.initial = ix.id.at(l.initial);
    return ix;
}

std::vector<int> tau_closure(const Indexed& ix, int s) {
    std::vector<int> closure{s};
    std::set<int> seen{s};
    std::deque<int> queue{s};
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (auto [li, tgt] : ix.out[static_cast<size_t>(cur)])
            if (ix.tau_label(li) && seen.insert(tgt).second) {
                closure.push_back(tgt);
                queue.push_back(tgt);
            }
    }
    std::sort(closure.begin(), closure.end());
    return closure;
}

std::pair<Lts, std::map<Transition, Transition>> tau_reduce_traced(const Lts& l) {
    Indexed ix = index_lts(l);
    int n = ix.n();

    // folded transitions and finals
    std::vector<char> folded_final(static_cast<size_t>(n), 0);
    std::map<Transition, Transition> origin;
    std::vector<Transition> folded;
    for (int s = 0; s < n; ++s) {
        for (int c : tau_closure(ix, s)) {
            if (ix.final_flag[static_cast<size_t>(c)]) folded_final[static_cast<size_t>(s)] = 1;
            for (auto [li, tgt] : ix.out[static_cast<size_t>(c)]) {
                if (ix.tau_label(li)) continue;
                Transition nt{ix.names[static_cast<size_t>(s)], ix.labels[static_cast<size_t>(li)],
                              ix.names[static_cast<size_t>(tgt)]};
                Transition ot{ix.names[static_cast<size_t>(c)], ix.labels[static_cast<size_t>(li)],
                              ix.names[static_cast<size_t>(tgt)]};
                if (origin.emplace(nt, ot).second) folded.push_back(nt);
            }
        }
    }

    // keep only states reachable through the folded transitions
    std::map<std::string, std::vector<const Transition*>> fwd;
    for (const Transition& t : folded) fwd[t.from].push_back(&t);
    std::set<std::string> reachable{l.initial};
    std::deque<std::string> queue{l.initial};
    while (!queue.empty()) {
        std::string s = queue.front();
        queue.pop_front();
        for (const Transition* t : fwd[s])
            if (reachable.insert(t->to).second) queue.push_back(t->to);
    }

    std::vector<std::string> states(reachable.begin(), reachable.end());
    std::vector<std::string> finals;
    for (const std::string& s : states)
        if (folded_final[static_cast<size_t>(ix.id.at(s))]) finals.push_back(s);
    std::vector<Transition> kept;
    for (const Transition& t : folded)
        if (reachable.count(t.from)) kept.push_back(t);
    for (auto it = origin.begin(); it != origin.end();)
        it = reachable.count(it->first.from) ? std::next(it) : origin.erase(it);

    return {make_lts(std::move(states), l.initial, std::move(finals), std::move(kept)),
            std::move(origin)};
}

} // namespace detail

Lts tau_reduce(const Lts& l) {
    return detail::tau_reduce_traced(l).first;
}

} // namespace svan
