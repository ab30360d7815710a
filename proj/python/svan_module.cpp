#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "svan/adaptation.hpp"
#include "svan/choreography.hpp"
#include "svan/compatibility.hpp"
#include "svan/composition.hpp"
#include "svan/equivalences.hpp"
#include "svan/model.hpp"
#include "svan/verdict.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<long long>());
        case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const json& item : j) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

py::dict verdict_to_py(const svan::Verdict& v) {
    py::dict d;
    d["holds"] = v.holds;
    d["check"] = v.check;
    d["evidence"] = json_to_py(v.evidence);
    return d;
}

svan::CommMode mode_of(const std::string& comm) {
    if (comm == "sync") return svan::CommMode::sync;
    if (comm == "async") return svan::CommMode::async;
    throw svan::Error("usage", "mode must be \"sync\" or \"async\"");
}

svan::Notion notion_of(const std::string& name, int big) {
    if (name == "df") return svan::Notion::df();
    if (name == "uc") return svan::Notion::uc(big);
    if (name == "ur") return svan::Notion::ur();
    throw svan::Error("usage", "notion must be \"df\", \"uc\" or \"ur\"");
}

std::vector<std::pair<std::string, svan::Lts>> named_list(const py::dict& services) {
    std::vector<std::pair<std::string, svan::Lts>> out;
    for (auto item : services)
        out.push_back({item.first.cast<std::string>(), item.second.cast<svan::Lts>()});
    return out;
}

} // namespace

PYBIND11_MODULE(_svan, m) {
    m.doc() = "Service protocol analysis on labelled transition systems";

    py::register_exception<svan::Error>(m, "SvanError");

    py::class_<svan::Lts>(m, "Lts")
        .def_static("parse", [](const std::string& text) { return svan::parse_lts(text); })
        .def("to_json", [](const svan::Lts& l) { return svan::serialize_lts(l); })
        .def("to_dot", [](const svan::Lts& l) { return svan::to_dot(l); })
        .def_property_readonly("states", [](const svan::Lts& l) { return l.states; })
        .def_property_readonly("initial", [](const svan::Lts& l) { return l.initial; })
        .def_property_readonly("finals", [](const svan::Lts& l) { return l.finals; })
        .def("__eq__", [](const svan::Lts& a, const svan::Lts& b) { return a == b; })
        .def("__repr__", [](const svan::Lts& l) {
            return "<Lts states=" + std::to_string(l.states.size()) +
                   " transitions=" + std::to_string(l.transitions.size()) + ">";
        });

    py::class_<svan::CompositeLts>(m, "CompositeLts")
        .def("to_json", [](const svan::CompositeLts& c) { return svan::to_json(c); })
        .def("to_dot", [](const svan::CompositeLts& c) { return svan::to_dot(c); })
        .def_property_readonly("size",
                               [](const svan::CompositeLts& c) { return c.states.size(); })
        .def_property_readonly("state_names", [](const svan::CompositeLts& c) {
            std::vector<std::string> names;
            for (const auto& s : c.states) names.push_back(s.str());
            return names;
        })
        .def("__repr__", [](const svan::CompositeLts& c) {
            return "<CompositeLts states=" + std::to_string(c.states.size()) + ">";
        });

    py::class_<svan::Contract>(m, "Contract")
        .def_static("parse", [](const std::string& text) { return svan::parse_contract(text); })
        .def("to_text", [](const svan::Contract& c) { return svan::serialize_contract(c); });

    py::class_<svan::AdaptorLts>(m, "Adaptor")
        .def_property_readonly("lts", [](const svan::AdaptorLts& a) { return a.lts; })
        .def("to_json", [](const svan::AdaptorLts& a) { return svan::to_json(a); })
        .def("to_dot", [](const svan::AdaptorLts& a) { return svan::to_dot(a); });

    py::class_<svan::CollaborationDiagram>(m, "CollaborationDiagram")
        .def_static("parse", [](const std::string& text) { return svan::parse_diagram(text); })
        .def("to_json", [](const svan::CollaborationDiagram& c) {
            return svan::serialize_diagram(c);
        })
        .def_property_readonly("peers",
                               [](const svan::CollaborationDiagram& c) { return c.peers; });

    // model
    m.def("parse_lts", [](const std::string& text) { return svan::parse_lts(text); });
    m.def("validate", [](const svan::Lts& l) {
        py::list out;
        for (const svan::Diagnostic& d : svan::validate(l)) {
            py::dict item;
            item["severity"] = d.is_error() ? "error" : "warning";
            item["code"] = d.code;
            item["locus"] = d.locus;
            item["text"] = d.text;
            out.append(item);
        }
        return out;
    });
    m.def("mirror", [](const svan::Lts& l) { return svan::mirror(l); });
    m.def("tau_reduce", [](const svan::Lts& l) { return svan::tau_reduce(l); });

    // composition
    m.def("sync_product",
          [](const std::vector<svan::Lts>& svcs) { return svan::sync_product(svcs); });
    m.def("async_product", [](const std::vector<svan::Lts>& svcs, int bound) {
        return svan::async_product(svcs, bound);
    }, py::arg("services"), py::arg("bound") = 1);
    m.def("deadlocks", [](const svan::CompositeLts& c) {
        py::list out;
        for (const auto& r : svan::deadlocks(c)) {
            py::dict item;
            item["state"] = c.states[static_cast<size_t>(r.state)].str();
            item["witness"] = json_to_py(svan::trace_to_json(c, r.witness));
            out.append(item);
        }
        return out;
    });
    m.def("final_reachable",
          [](const svan::CompositeLts& c) { return verdict_to_py(svan::final_reachable(c)); });

    // equivalences
    m.def("trace_equivalent",
          [](const svan::Lts& a, const svan::Lts& b, bool observable_only) {
              return verdict_to_py(svan::trace_equivalent(a, b, observable_only));
          },
          py::arg("l1"), py::arg("l2"), py::arg("observable_only") = false);
    m.def("bisimilar", [](const svan::Lts& a, const svan::Lts& b, const std::string& relation) {
        svan::BisimKind k = relation == "strong" ? svan::BisimKind::strong
                            : relation == "weak" ? svan::BisimKind::weak
                            : relation == "branching"
                                ? svan::BisimKind::branching
                                : throw svan::Error("usage", "relation must be strong|weak|branching");
        return verdict_to_py(svan::bisimilar(a, b, k));
    }, py::arg("l1"), py::arg("l2"), py::arg("relation"));

    // compatibility
    m.def("check_compat",
          [](const svan::Lts& a, const svan::Lts& b, const std::string& notion, int big) {
              return verdict_to_py(svan::check_compat(a, b, notion_of(notion, big)));
          },
          py::arg("l1"), py::arg("l2"), py::arg("notion"), py::arg("big") = 2);
    m.def("compat_degree",
          [](const svan::Lts& a, const svan::Lts& b, const std::string& notion, double w,
             double epsilon, int max_iter) {
              svan::FloodParams p;
              p.w = w;
              p.epsilon = epsilon;
              p.max_iter = max_iter;
              return json_to_py(svan::to_json(svan::compat_degree(a, b, notion_of(notion, 2), p)));
          },
          py::arg("l1"), py::arg("l2"), py::arg("notion") = "ur", py::arg("w") = 0.5,
          py::arg("epsilon") = 1e-4, py::arg("max_iter") = 1000);

    // adaptation
    m.def("parse_contract",
          [](const std::string& text) { return svan::parse_contract(text); });
    m.def("synthesize_adaptor", [](const py::dict& services, const svan::Contract& contract) {
        return svan::synthesize_adaptor(named_list(services), contract);
    }, py::arg("services"), py::arg("contract"));
    m.def("verify_adaptation", [](const py::dict& services, const svan::Lts& adaptor) {
        return verdict_to_py(svan::verify_adaptation(named_list(services), adaptor));
    }, py::arg("services"), py::arg("adaptor"));

    // choreography
    m.def("parse_diagram", [](const std::string& text) { return svan::parse_diagram(text); });
    m.def("project", [](const svan::CollaborationDiagram& cd, const std::string& peer) {
        return svan::project(cd, peer);
    });
    m.def("realizable",
          [](const svan::CollaborationDiagram& cd, const std::string& mode, int bound) {
              return json_to_py(svan::to_json(svan::realizable(cd, mode_of(mode), bound)));
          },
          py::arg("diagram"), py::arg("mode") = "sync", py::arg("bound") = 1);
    m.def("conformance",
          [](const svan::CollaborationDiagram& cd, const py::dict& impls,
             const std::string& mode, int bound) {
              return json_to_py(
                  svan::to_json(svan::conformance(cd, named_list(impls), mode_of(mode), bound)));
          },
          py::arg("diagram"), py::arg("impls"), py::arg("mode") = "sync", py::arg("bound") = 1);
}
