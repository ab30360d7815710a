#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svan/adaptation.hpp"
#include "svan/choreography.hpp"
#include "svan/compatibility.hpp"
#include "svan/composition.hpp"
#include "svan/equivalences.hpp"
#include "svan/model.hpp"
#include "svan/verdict.hpp"

#ifdef _WIN32
#define ISATTY(x) 0
#else
#include <unistd.h>
#define ISATTY(x) isatty(x)
#endif

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw svan::Error("io", "cannot open file \"" + path + "\"");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

svan::Lts load_lts(const std::string& path) {
    try {
        return svan::parse_lts(read_file(path));
    } catch (const svan::Error& e) {
        throw svan::Error(e.code(), path + ": " + e.what());
    }
}

bool color_enabled() {
    const char* env = std::getenv("SVAN_COLOR");
    if (env && std::string(env) == "0") return false;
    return ISATTY(1);
}

std::string render_bool(bool b) {
    if (!color_enabled()) return b ? "true" : "false";
    return b ? "\033[32mtrue\033[0m" : "\033[31mfalse\033[0m";
}

void print_verdict(const svan::Verdict& v, const std::string& format,
                   const std::string& field, const std::string& value) {
    if (format == "json") {
        json j;
        j[field] = value;
        j["holds"] = v.holds;
        j["evidence"] = v.evidence;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << field << ": " << value << "\n";
        std::cout << "holds: " << render_bool(v.holds) << "\n";
        if (!v.evidence.empty())
            std::cout << "evidence: " << v.evidence.dump() << "\n";
    }
}

std::vector<std::pair<std::string, svan::Lts>> load_named(const std::vector<std::string>& args) {
    std::vector<std::pair<std::string, svan::Lts>> out;
    for (const std::string& arg : args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
            throw svan::Error("usage", "expected NAME=FILE, got \"" + arg + "\"");
        out.push_back({arg.substr(0, eq), load_lts(arg.substr(eq + 1))});
    }
    return out;
}

svan::CommMode parse_mode(const std::string& comm) {
    if (comm == "sync") return svan::CommMode::sync;
    if (comm == "async") return svan::CommMode::async;
    throw svan::Error("usage", "--comm must be sync or async");
}

int run(int argc, char** argv) {
    CLI::App app{"svan - service protocol analysis on labelled transition systems"};
    app.require_subcommand(1);

    std::string format = "text";
    app.add_option("--format", format, "output format: text|json|dot|csv")
        ->capture_default_str();

    // ---- validate ----
    auto* cmd_validate = app.add_subcommand("validate", "check Lts invariants and report diagnostics");
    std::string v_file;
    cmd_validate->add_option("file", v_file, "Lts JSON document")->required();

    // ---- product ----
    auto* cmd_product = app.add_subcommand("product", "compose services and emit the state space");
    std::vector<std::string> p_files;
    std::string p_comm = "sync";
    int p_bound = 1;
    cmd_product->add_option("files", p_files, "service Lts files")->required()->expected(-2);
    cmd_product->add_option("--comm", p_comm, "sync|async")->capture_default_str();
    cmd_product->add_option("--bound", p_bound, "mailbox bound (async)")->capture_default_str();

    // ---- deadlocks ----
    auto* cmd_deadlocks = app.add_subcommand("deadlocks", "report reachable non-final sink states");
    std::vector<std::string> d_files;
    std::string d_comm = "sync";
    int d_bound = 1;
    cmd_deadlocks->add_option("files", d_files, "service Lts files")->required()->expected(-2);
    cmd_deadlocks->add_option("--comm", d_comm, "sync|async")->capture_default_str();
    cmd_deadlocks->add_option("--bound", d_bound, "mailbox bound (async)")->capture_default_str();

    // ---- equiv ----
    auto* cmd_equiv = app.add_subcommand("equiv", "behavioural equivalence check");
    std::string e_relation;
    bool e_observable = false;
    std::vector<std::string> e_files;
    cmd_equiv->add_option("--relation", e_relation, "trace|strong|weak|branching")->required();
    cmd_equiv->add_flag("--observable-only", e_observable,
                        "erase tau from traces (trace relation only)");
    cmd_equiv->add_option("files", e_files, "two Lts files")->required()->expected(2);

    // ---- compat ----
    auto* cmd_compat = app.add_subcommand("compat", "compatibility notion check");
    std::string c_notion;
    int c_big = 2;
    std::vector<std::string> c_files;
    cmd_compat->add_option("--notion", c_notion, "df|uc|ur")->required();
    cmd_compat->add_option("--big", c_big, "which side complements the other (uc)")
        ->capture_default_str();
    cmd_compat->add_option("files", c_files, "two Lts files")->required()->expected(2);

    // ---- compat-degree ----
    auto* cmd_degree = app.add_subcommand("compat-degree", "compatibility flooding matrix");
    std::string g_notion = "ur";
    double g_w = 0.5, g_eps = 1e-4;
    int g_max_iter = 1000;
    std::string g_weights = "0.2,0.5,0.3";
    bool g_init_nature = false;
    std::vector<std::string> g_files;
    cmd_degree->add_option("--notion", g_notion, "df|uc|ur")->capture_default_str();
    cmd_degree->add_option("--w", g_w, "behavioural weight in (0,1)")->capture_default_str();
    cmd_degree->add_option("--epsilon", g_eps, "convergence threshold")->capture_default_str();
    cmd_degree->add_option("--max-iter", g_max_iter, "iteration cap")->capture_default_str();
    cmd_degree->add_option("--static-weights", g_weights, "nature,label,param weights")
        ->capture_default_str();
    cmd_degree->add_flag("--include-initial-nature", g_init_nature,
                         "also compare initial-status in the nature measure");
    cmd_degree->add_option("files", g_files, "two Lts files")->required()->expected(2);

    // ---- adapt ----
    auto* cmd_adapt = app.add_subcommand("adapt", "synthesize an adaptor from a contract");
    std::string a_contract;
    std::vector<std::string> a_services;
    cmd_adapt->add_option("--contract", a_contract, "contract text file")->required();
    cmd_adapt->add_option("services", a_services, "NAME=FILE per service")->required();

    // ---- verify-adapt ----
    auto* cmd_verify = app.add_subcommand("verify-adapt", "check a closed adapted system");
    std::string va_adaptor;
    std::vector<std::string> va_services;
    cmd_verify->add_option("--adaptor", va_adaptor, "adaptor Lts file")->required();
    cmd_verify->add_option("services", va_services, "NAME=FILE per service")->required();

    // ---- choreo ----
    auto* cmd_choreo = app.add_subcommand("choreo", "choreography analysis");
    std::string ch_check = "realizability", ch_comm = "sync", ch_project;
    int ch_bound = 1;
    std::string ch_file;
    cmd_choreo->add_option("--check", ch_check, "realizability")->capture_default_str();
    cmd_choreo->add_option("--project", ch_project, "emit the projection of one peer");
    cmd_choreo->add_option("--comm", ch_comm, "sync|async")->capture_default_str();
    cmd_choreo->add_option("--bound", ch_bound, "mailbox bound (async)")->capture_default_str();
    cmd_choreo->add_option("diagram", ch_file, "collaboration diagram JSON")->required();

    // ---- conformance ----
    auto* cmd_conf = app.add_subcommand("conformance", "implementations against a choreography");
    std::string cf_file, cf_comm = "sync";
    int cf_bound = 1;
    std::vector<std::string> cf_impls;
    cmd_conf->add_option("diagram", cf_file, "collaboration diagram JSON")->required();
    cmd_conf->add_option("impls", cf_impls, "NAME=FILE per peer")->required();
    cmd_conf->add_option("--comm", cf_comm, "sync|async")->capture_default_str();
    cmd_conf->add_option("--bound", cf_bound, "mailbox bound (async)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    if (cmd_validate->parsed()) {
        svan::Lts l;
        std::vector<svan::Diagnostic> diags;
        bool parse_ok = true;
        try {
            l = svan::parse_lts(read_file(v_file));
            diags = svan::validate(l);
        } catch (const svan::SemanticError& e) {
            parse_ok = false;
            diags.push_back({svan::Diagnostic::Severity::error, e.code(), "", e.what()});
        }
        bool ok = parse_ok &&
                  std::none_of(diags.begin(), diags.end(),
                               [](const svan::Diagnostic& d) { return d.is_error(); });
        if (format == "json") {
            json out;
            out["valid"] = ok;
            json ds = json::array();
            for (const auto& d : diags) {
                json jd;
                jd["severity"] = d.is_error() ? "error" : "warning";
                jd["code"] = d.code;
                jd["locus"] = d.locus;
                jd["text"] = d.text;
                ds.push_back(std::move(jd));
            }
            out["diagnostics"] = std::move(ds);
            std::cout << out.dump(2) << "\n";
        } else {
            for (const auto& d : diags)
                std::cout << (d.is_error() ? "error" : "warning") << " [" << d.code << "] "
                          << d.locus << (d.locus.empty() ? "" : ": ") << d.text << "\n";
            std::cout << "valid: " << render_bool(ok) << "\n";
        }
        return ok ? 0 : 1;
    }

    if (cmd_product->parsed()) {
        std::vector<svan::Lts> services;
        for (const std::string& f : p_files) services.push_back(load_lts(f));
        svan::CompositeLts prod = (parse_mode(p_comm) == svan::CommMode::sync)
                                      ? svan::sync_product(services)
                                      : svan::async_product(services, p_bound);
        if (format == "dot")
            std::cout << svan::to_dot(prod);
        else if (format == "json" || format == "text")
            std::cout << svan::to_json(prod);
        else
            throw svan::Error("usage", "product supports --format json|dot|text");
        return 0;
    }

    if (cmd_deadlocks->parsed()) {
        std::vector<svan::Lts> services;
        for (const std::string& f : d_files) services.push_back(load_lts(f));
        svan::CompositeLts prod = (parse_mode(d_comm) == svan::CommMode::sync)
                                      ? svan::sync_product(services)
                                      : svan::async_product(services, d_bound);
        auto dl = svan::deadlocks(prod);
        if (format == "json") {
            json out = json::array();
            for (const auto& r : dl) {
                json jr;
                jr["state"] = prod.states[static_cast<size_t>(r.state)].str();
                jr["witness"] = svan::trace_to_json(prod, r.witness);
                out.push_back(std::move(jr));
            }
            json doc;
            doc["deadlocks"] = std::move(out);
            doc["holds"] = dl.empty();
            std::cout << doc.dump(2) << "\n";
        } else {
            for (const auto& r : dl) {
                std::cout << "deadlock " << prod.states[static_cast<size_t>(r.state)].str()
                          << " via";
                for (const auto& step : r.witness) std::cout << " " << step.str();
                std::cout << "\n";
            }
            std::cout << "deadlock-free: " << render_bool(dl.empty()) << "\n";
        }
        return dl.empty() ? 0 : 1;
    }

    if (cmd_equiv->parsed()) {
        svan::Lts l1 = load_lts(e_files[0]), l2 = load_lts(e_files[1]);
        svan::Verdict v;
        if (e_relation == "trace") {
            v = svan::trace_equivalent(l1, l2, e_observable);
        } else if (e_relation == "strong" || e_relation == "weak" || e_relation == "branching") {
            svan::BisimKind k = e_relation == "strong" ? svan::BisimKind::strong
                                : e_relation == "weak" ? svan::BisimKind::weak
                                                       : svan::BisimKind::branching;
            v = svan::bisimilar(l1, l2, k);
        } else {
            throw svan::Error("usage", "--relation must be trace|strong|weak|branching");
        }
        print_verdict(v, format, "relation", v.check);
        return v.holds ? 0 : 1;
    }

    if (cmd_compat->parsed()) {
        svan::Lts l1 = load_lts(c_files[0]), l2 = load_lts(c_files[1]);
        svan::Notion n;
        if (c_notion == "df") n = svan::Notion::df();
        else if (c_notion == "uc") n = svan::Notion::uc(c_big);
        else if (c_notion == "ur") n = svan::Notion::ur();
        else throw svan::Error("usage", "--notion must be df|uc|ur");
        if (n.kind == svan::Notion::Kind::unidirectional_complement && c_big != 1 && c_big != 2)
            throw svan::Error("usage", "--big must be 1 or 2");
        svan::Verdict v = svan::check_compat(l1, l2, n);
        print_verdict(v, format, "notion", n.str());
        return v.holds ? 0 : 1;
    }

    if (cmd_degree->parsed()) {
        svan::Lts l1 = load_lts(g_files[0]), l2 = load_lts(g_files[1]);
        svan::Notion n = g_notion == "df" ? svan::Notion::df()
                         : g_notion == "uc" ? svan::Notion::uc(2)
                                            : svan::Notion::ur();
        svan::FloodParams params;
        params.w = g_w;
        params.epsilon = g_eps;
        params.max_iter = g_max_iter;
        params.include_initial_nature = g_init_nature;
        {
            std::istringstream ws(g_weights);
            char sep = 0;
            if (!(ws >> params.weight_nature >> sep >> params.weight_label >> sep >>
                  params.weight_param))
                throw svan::Error("usage", "--static-weights needs three comma-separated numbers");
        }
        svan::CompatMatrix m = svan::compat_degree(l1, l2, n, params);
        if (format == "csv")
            std::cout << svan::to_csv(m);
        else if (format == "json")
            std::cout << svan::to_json(m).dump(2) << "\n";
        else
            std::cout << svan::to_text_table(m);
        return 0;
    }

    if (cmd_adapt->parsed()) {
        svan::Contract contract = svan::parse_contract(read_file(a_contract));
        auto services = load_named(a_services);
        try {
            svan::AdaptorLts adaptor = svan::synthesize_adaptor(services, contract);
            if (format == "dot")
                std::cout << svan::to_dot(adaptor);
            else
                std::cout << svan::to_json(adaptor);
            return 0;
        } catch (const svan::AnalysisError& e) {
            if (e.code() == "unadaptable") {
                std::cerr << "unadaptable: " << e.what() << "\n";
                return 1;
            }
            throw;
        }
    }

    if (cmd_verify->parsed()) {
        svan::Lts adaptor = load_lts(va_adaptor);
        auto services = load_named(va_services);
        svan::Verdict v = svan::verify_adaptation(services, adaptor);
        print_verdict(v, format, "check", "adaptation");
        return v.holds ? 0 : 1;
    }

    if (cmd_choreo->parsed()) {
        svan::CollaborationDiagram cd = svan::parse_diagram(read_file(ch_file));
        if (!ch_project.empty()) {
            svan::Lts proj = svan::project(cd, ch_project);
            std::cout << (format == "dot" ? svan::to_dot(proj, ch_project)
                                          : svan::serialize_lts(proj));
            return 0;
        }
        if (ch_check != "realizability")
            throw svan::Error("usage", "--check supports only \"realizability\"");
        svan::RealizabilityVerdict v = svan::realizable(cd, parse_mode(ch_comm), ch_bound);
        if (format == "json") {
            std::cout << svan::to_json(v).dump(2) << "\n";
        } else {
            std::cout << "realizable (" << ch_comm << "): " << render_bool(v.holds) << "\n";
            if (!v.holds && !v.violation.empty()) {
                std::cout << "violation:";
                for (const auto& e : v.violation)
                    std::cout << " " << e.msg << "(" << e.from << "->" << e.to << ")";
                std::cout << "\n";
            }
        }
        return v.holds ? 0 : 1;
    }

    if (cmd_conf->parsed()) {
        svan::CollaborationDiagram cd = svan::parse_diagram(read_file(cf_file));
        auto impls = load_named(cf_impls);
        svan::RealizabilityVerdict v = svan::conformance(cd, impls, parse_mode(cf_comm), cf_bound);
        if (format == "json") {
            std::cout << svan::to_json(v).dump(2) << "\n";
        } else {
            std::cout << "conformance (" << cf_comm << "): " << render_bool(v.holds) << "\n";
            if (!v.holds && !v.violation.empty()) {
                std::cout << "violation:";
                for (const auto& e : v.violation)
                    std::cout << " " << e.msg << "(" << e.from << "->" << e.to << ")";
                std::cout << "\n";
            }
        }
        return v.holds ? 0 : 1;
    }

    std::cerr << "error: usage: no subcommand given\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const svan::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 2;
    }
}
