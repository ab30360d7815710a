#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "svan/model.hpp"

#ifndef SVAN_CORPUS_DIR
#define SVAN_CORPUS_DIR "corpus"
#endif

namespace test {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string corpus_path(const std::string& name) {
    return std::string(SVAN_CORPUS_DIR) + "/" + name;
}

inline svan::Lts corpus(const std::string& name) {
    return svan::parse_lts(read_file(corpus_path(name)));
}

/// Compact builder: each triple is "from label to" where label is "tau",
/// "m!", "m?" or "m!(T1,T2)".
inline svan::Lts build(const std::string& initial, const std::vector<std::string>& finals,
                       const std::vector<std::vector<std::string>>& triples) {
    std::vector<svan::Transition> ts;
    std::vector<std::string> states{initial};
    for (const auto& t : triples) {
        const std::string& txt = t[1];
        svan::Label label;
        if (txt == "tau") {
            label = svan::Label::tau();
        } else {
            auto dir_pos = txt.find_first_of("!?");
            std::string msg = txt.substr(0, dir_pos);
            svan::Direction d = txt[dir_pos] == '!' ? svan::Direction::emission
                                                    : svan::Direction::reception;
            std::vector<std::string> params;
            if (dir_pos + 1 < txt.size() && txt[dir_pos + 1] == '(') {
                std::string inner = txt.substr(dir_pos + 2, txt.size() - dir_pos - 3);
                std::string cur;
                for (char c : inner) {
                    if (c == ',') {
                        params.push_back(cur);
                        cur.clear();
                    } else {
                        cur += c;
                    }
                }
                if (!cur.empty()) params.push_back(cur);
            }
            label = svan::Label::make(msg, d, params);
        }
        ts.push_back({t[0], label, t[2]});
        states.push_back(t[0]);
        states.push_back(t[2]);
    }
    for (const std::string& f : finals) states.push_back(f);
    return svan::make_lts(states, initial, finals, ts);
}

/// All figure fixtures, for corpus-wide property assertions.
inline std::vector<std::pair<std::string, svan::Lts>> figure_corpus() {
    std::vector<std::pair<std::string, svan::Lts>> out;
    for (const char* name :
         {"fig1_s1", "fig1_s1p", "fig1_s2", "fig2_s1", "fig2_s1p", "fig2_s2", "fig3_s1",
          "fig3_s1p", "fig3_s2", "fig4_s1", "fig4_s1p", "fig4_s2", "fig5a_t1", "fig5a_t2",
          "fig5b_u1", "fig5b_u2", "sql_service", "sql_client"})
        out.push_back({name, corpus(std::string(name) + ".json")});
    return out;
}

/// Deterministic pseudo-random Lts generator for property tests.
struct Rng {
    unsigned long long state;
    explicit Rng(unsigned long long seed) : state(seed) {}
    unsigned next(unsigned bound) {  // xorshift*, bound > 0
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        return static_cast<unsigned>((state * 0x2545F4914F6CDD1Dull) >> 33) % bound;
    }
};

inline svan::Lts random_lts(Rng& rng, int max_states = 6) {
    int n = 1 + static_cast<int>(rng.next(static_cast<unsigned>(max_states)));
    std::vector<std::string> states;
    for (int i = 0; i < n; ++i) states.push_back("q" + std::to_string(i));
    const char* msgs[] = {"a", "b", "c"};
    std::vector<svan::Transition> ts;
    int m = static_cast<int>(rng.next(static_cast<unsigned>(2 * n + 1)));
    for (int i = 0; i < m; ++i) {
        std::string from = states[rng.next(static_cast<unsigned>(n))];
        std::string to = states[rng.next(static_cast<unsigned>(n))];
        svan::Label label;
        unsigned pick = rng.next(7);
        if (pick == 0) {
            label = svan::Label::tau();
        } else {
            std::vector<std::string> params;
            if (rng.next(3) == 0) params.push_back(rng.next(2) ? "Str" : "Int");
            label = svan::Label::make(msgs[pick % 3],
                                      pick % 2 ? svan::Direction::emission
                                               : svan::Direction::reception,
                                      params);
        }
        ts.push_back({from, label, to});
    }
    std::vector<std::string> finals{states[rng.next(static_cast<unsigned>(n))]};
    return svan::make_lts(states, states[0], finals, ts);
}

} // namespace test
