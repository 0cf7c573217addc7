#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "idiombn/causal.hpp"
#include "idiombn/fixtures.hpp"
#include "idiombn/linter.hpp"
#include "idiombn/model_format.hpp"

namespace py = pybind11;
using namespace idiombn;

namespace {

// A parsed, elaborated model as seen from Python.
struct Model {
  ModelDocument document;
  BayesNet net;
  std::vector<IdiomInstance> instances;
  std::vector<Diagnostic> warnings;
};

Model from_text(const std::string& text) {
  ParseResult p = parse(text);
  std::vector<Diagnostic> diags = p.diagnostics;
  if (p.ok()) {
    ElaborateResult e = elaborate(*p.document);
    diags.insert(diags.end(), e.diagnostics.begin(), e.diagnostics.end());
    if (e.ok()) return {std::move(*p.document), std::move(*e.net), std::move(e.instances), std::move(diags)};
  }
  std::string message;
  for (const auto& d : diags) message += format_diagnostic(d, "<text>") + "\n";
  throw Error(ErrorCode::InvalidNetwork, message);
}

Model from_file(const std::string& path) {
  LoadedModel m = load_model(path);
  return {std::move(m.document), std::move(m.net), std::move(m.instances), std::move(m.diagnostics)};
}

py::dict distribution(const Distribution& d) {
  py::dict out;
  for (std::size_t s = 0; s < d.states.size(); ++s) out[py::str(d.states[s])] = d.probabilities[s];
  return out;
}

py::dict diagnostic(const Diagnostic& d) {
  py::dict out;
  out["severity"] = std::string(to_string(d.severity));
  out["line"] = d.pos.line;
  out["column"] = d.pos.column;
  out["code"] = d.code;
  out["message"] = d.message;
  return out;
}

py::list edge_list(const std::vector<Edge>& edges) {
  py::list out;
  for (const auto& e : edges) out.append(py::make_tuple(e.parent, e.child, e.decision));
  return out;
}

Rule parse_rule(const std::string& id) {
  for (std::size_t i = 1; i <= kRuleCount; ++i)
    if (rule_id(static_cast<Rule>(i)) == id) return static_cast<Rule>(i);
  throw py::value_error("unknown rule '" + id + "'");
}

}  // namespace

PYBIND11_MODULE(_idiombn, m) {
  m.doc() = "Idiom-based Bayesian network modelling: inference, causal queries and linting.";

  static py::exception<Error> error(m, "IdiombnError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("nodes") = e.nodes();
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<Model>(m, "Model")
      .def_static("from_text", &from_text, py::arg("text"))
      .def_static("from_file", &from_file, py::arg("path"))
      .def_property_readonly("variables",
                             [](const Model& self) {
                               std::vector<std::string> names;
                               for (const auto& v : self.net.variables()) names.push_back(v.name);
                               return names;
                             })
      .def("states", [](const Model& self, const std::string& name) { return self.net.variable(name).states; })
      .def("role", [](const Model& self, const std::string& name) {
        return std::string(role_name(self.net.variable(name).role));
      })
      .def_property_readonly("edges", [](const Model& self) { return edge_list(self.net.edges()); })
      .def_property_readonly("idioms",
                             [](const Model& self) {
                               py::list out;
                               for (const auto& inst : self.instances)
                                 out.append(py::make_tuple(inst.label, std::string(template_name(inst.template_id))));
                               return out;
                             })
      .def_property_readonly("warnings",
                             [](const Model& self) {
                               py::list out;
                               for (const auto& d : self.warnings) out.append(diagnostic(d));
                               return out;
                             })
      .def(
          "posterior",
          [](const Model& self, const std::string& target, const Evidence& evidence) {
            return distribution(posterior(self.net, target, evidence));
          },
          py::arg("target"), py::arg("evidence") = Evidence{})
      .def(
          "interventional",
          [](const Model& self, const std::string& target, const Intervention& intervention, const Evidence& evidence) {
            return distribution(interventional_query(self.net, target, intervention, evidence).distribution);
          },
          py::arg("target"), py::arg("do"), py::arg("evidence") = Evidence{})
      .def(
          "counterfactual",
          [](const Model& self, const std::string& target, const Evidence& evidence, const Intervention& intervention) {
            return distribution(counterfactual_query(self.net, evidence, intervention, target).distribution);
          },
          py::arg("target"), py::arg("evidence"), py::arg("do"))
      .def(
          "backdoor",
          [](const Model& self, const std::string& target, const std::string& treatment, const std::string& state,
             const std::vector<std::string>& adjustment) {
            return distribution(backdoor_adjust(self.net, target, treatment, state, adjustment));
          },
          py::arg("target"), py::arg("treatment"), py::arg("state"), py::arg("adjustment"))
      .def(
          "d_separated",
          [](const Model& self, const std::vector<std::string>& x, const std::vector<std::string>& y,
             const std::vector<std::string>& z) { return d_separated(self.net, x, y, z); },
          py::arg("x"), py::arg("y"), py::arg("given") = std::vector<std::string>{})
      .def(
          "lint",
          [](const Model& self, const std::vector<std::string>& disabled, bool observational_use) {
            LintOptions options;
            for (const auto& id : disabled) options.disabled.insert(parse_rule(id));
            options.observational_use = observational_use;
            py::list out;
            for (const auto& f : lint(self.net, &self.instances, options).findings) {
              py::dict d;
              d["rule"] = rule_id(f.rule);
              d["severity"] = std::string(to_string(f.severity));
              d["nodes"] = f.nodes;
              d["edges"] = edge_list(f.edges);
              d["message"] = f.message;
              d["anchor"] = f.anchor;
              out.append(d);
            }
            return out;
          },
          py::arg("disabled") = std::vector<std::string>{}, py::arg("observational_use") = true)
      .def("uncovered_edges",
           [](const Model& self) { return edge_list(coverage(self.net, self.instances).uncovered); })
      .def("serialize", [](const Model& self) { return serialize(self.document); })
      .def("to_dot", [](const Model& self) { return export_dot(self.net, self.instances); })
      .def("to_json", [](const Model& self) { return export_json(self.document); });

  m.def("fixture_ids", [] {
    std::vector<std::string> ids;
    for (const auto& info : fixture_registry()) ids.push_back(info.id);
    return ids;
  });
  m.def(
      "load_fixture",
      [](const std::string& id, const std::string& dir) {
        Fixture f = load_fixture(id, dir.empty() ? default_fixture_dir() : dir);
        return Model{std::move(f.document), std::move(f.net), std::move(f.instances), {}};
      },
      py::arg("id"), py::arg("directory") = std::string{});
  m.def("templates", [] {
    std::vector<std::string> names;
    for (const auto& t : catalog()) names.emplace_back(template_name(t.id));
    return names;
  });
}
