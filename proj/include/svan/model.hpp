#pragma once

#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "svan/error.hpp"

namespace svan {

enum class Direction { emission, reception };

/// A transition label: either the internal action tau, or a directed
/// message with an optional list of typed parameters (the symbolic case).
struct Label {
    enum class Kind { internal, message };

    Kind kind = Kind::internal;
    std::string message;              // empty iff internal
    Direction dir = Direction::emission;
    std::vector<std::string> params;  // parameter type names, empty iff internal

    static Label tau() { return Label{}; }
    static Label make(std::string msg, Direction d, std::vector<std::string> ps = {}) {
        return Label{Kind::message, std::move(msg), d, std::move(ps)};
    }

    bool is_tau() const { return kind == Kind::internal; }
    bool is_emission() const { return kind == Kind::message && dir == Direction::emission; }
    bool is_reception() const { return kind == Kind::message && dir == Direction::reception; }

    /// Same message, opposite directions.
    bool complements(const Label& other) const {
        return kind == Kind::message && other.kind == Kind::message &&
               message == other.message && dir != other.dir;
    }

    Label mirrored() const;

    /// "tau", "a!", "b?(Str,Int)"
    std::string str() const;

    auto operator<=>(const Label&) const = default;
};

struct Transition {
    std::string from;
    Label label;
    std::string to;
    auto operator<=>(const Transition&) const = default;
};

/// Finite labelled transition system (alphabet, states, initial, finals,
/// transitions). The normalized form keeps states/finals/transitions sorted
/// and the alphabet equal to the set of labels actually used.
struct Lts {
    std::vector<Label> alphabet;
    std::vector<std::string> states;
    std::string initial;
    std::vector<std::string> finals;
    std::vector<Transition> transitions;

    bool is_final(const std::string& s) const;
    bool operator==(const Lts&) const = default;
};

/// Sorts, deduplicates and derives the alphabet. Does not check validity.
Lts make_lts(std::vector<std::string> states, std::string initial,
             std::vector<std::string> finals, std::vector<Transition> transitions);
Lts normalize(const Lts& l);

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity;
    std::string code;   // one of the codes documented below
    std::string locus;  // state id or transition rendering
    std::string text;

    bool is_error() const { return severity == Severity::error; }
};

// Diagnostic codes:
//   errors:   unknown-initial, empty-finals, unknown-final, unknown-state,
//             unknown-label, unused-label, bad-label
//   warnings: unreachable-state, no-final-reachable
std::vector<Diagnostic> validate(const Lts& l);
bool is_valid(const Lts& l);  // true iff validate() reports no errors

/// Canonical JSON document -> normalized Lts. Throws ParseError on malformed
/// text (with position) and SemanticError on invariant violations.
Lts parse_lts(const std::string& text);

/// Normalized canonical JSON, byte-stable: keys sorted, states sorted.
std::string serialize_lts(const Lts& l);

/// GraphViz export: circles, finals double-circled.
std::string to_dot(const Lts& l, const std::string& name = "lts");

/// Flips every message direction; tau transitions are unchanged. Involution.
Lts mirror(const Lts& l);

/// Removes all internal transitions by folding tau-closures: a state offers
/// every observable action reachable through internal moves, and is final if
/// a tau-only path reaches a final state. The result is weak-trace equivalent
/// to the input; states left unreachable by the fold are dropped. Idempotent.
Lts tau_reduce(const Lts& l);

namespace detail {

nlohmann::json label_to_json(const Label& l);
Label label_from_json(const nlohmann::json& j);

/// Integer-indexed view of an Lts for the algorithms. Labels are interned
/// as positions in the (sorted) alphabet.
struct Indexed {
    std::vector<std::string> names;                       // index -> state id
    std::map<std::string, int> id;                        // state id -> index
    std::vector<Label> labels;                            // = alphabet
    std::vector<std::vector<std::pair<int, int>>> out;    // state -> (label, target)
    std::vector<std::vector<std::pair<int, int>>> in;     // state -> (label, source)
    std::vector<char> final_flag;
    int initial = 0;

    int n() const { return static_cast<int>(names.size()); }
    bool tau_label(int li) const { return labels[static_cast<size_t>(li)].is_tau(); }
};

Indexed index_lts(const Lts& l);

/// States reachable from s via tau-only paths, including s itself. Sorted.
std::vector<int> tau_closure(const Indexed& ix, int s);

/// tau_reduce that also reports, for every produced transition, the original
/// transition it was folded from (used to carry adaptor annotations).
std::pair<Lts, std::map<Transition, Transition>> tau_reduce_traced(const Lts& l);

} // namespace detail

} // namespace svan
