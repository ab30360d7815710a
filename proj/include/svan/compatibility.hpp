#pragma once

#include "svan/composition.hpp"
#include "svan/model.hpp"
#include "svan/verdict.hpp"

namespace svan {

/// Compatibility notion under analysis. UC carries which side is expected to
/// complement everything the other offers (the "bigger" service, 1-based).
struct Notion {
    enum class Kind { deadlock_free, unidirectional_complement, unspecified_receptions };

    Kind kind = Kind::deadlock_free;
    int big = 2;

    static Notion df() { return {Kind::deadlock_free, 0}; }
    static Notion uc(int big_side) { return {Kind::unidirectional_complement, big_side}; }
    static Notion ur() { return {Kind::unspecified_receptions, 0}; }

    std::string str() const;
};

struct FloodParams {
    double w = 0.5;          // weight of the behavioural (propagated) part
    double epsilon = 1e-4;   // convergence threshold on the max cell delta
    int max_iter = 1000;
    // static measure weights (state nature, label, parameter); must sum to 1
    double weight_nature = 0.2;
    double weight_label = 0.5;
    double weight_param = 0.3;
    bool include_initial_nature = false;  // also compare initial-status in the nature score
};

/// Per-state-pair compatibility degrees in [0,1]. Full precision is kept
/// internally; rounding to 2 decimals happens only in the text rendering.
struct CompatMatrix {
    std::vector<std::string> rows;  // states of service 1
    std::vector<std::string> cols;  // states of service 2
    std::vector<std::vector<double>> degrees;
    int iterations = 0;
    bool converged = false;
    Notion notion;
    FloodParams params;

    double at(size_t r, size_t c) const { return degrees[r][c]; }
};

/// Decision procedure for the three notions over the synchronous product.
/// Failing verdicts carry the offending product state, the unmatched label
/// where applicable, and a witness trace.
Verdict check_compat(const Lts& l1, const Lts& l2, const Notion& notion);

/// Weighted sum of the three static measures: state natures (final-status
/// match), labels (best bipartite matching of complementary outgoing labels)
/// and parameters (type-list equality or multiset Jaccard over matched pairs).
double static_compat(const Lts& l1, const std::string& s1, const Lts& l2,
                     const std::string& s2, const FloodParams& params, const Notion& notion);

/// Compatibility flooding: D0 = static measure, then
///   D[k+1](s,t) = (1-w)*static(s,t) + w*(fw + bw)/2
/// where fw/bw average D[k] over the best-value matching of complementary
/// outgoing/incoming transition pairs (unmatched transitions contribute 0,
/// tau transitions match an idle partner). Jacobi sweeps until the max delta
/// drops below epsilon or max_iter is hit (converged=false then).
CompatMatrix compat_degree(const Lts& l1, const Lts& l2, const Notion& notion,
                           const FloodParams& params = {});

std::string to_csv(const CompatMatrix& m);
std::string to_text_table(const CompatMatrix& m);  // 2-decimal, Table-style
nlohmann::json to_json(const CompatMatrix& m);

} // namespace svan
