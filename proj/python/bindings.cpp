#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "synspace/analysis.hpp"
#include "synspace/catalog.hpp"
#include "synspace/embedding.hpp"
#include "synspace/embedding_io.hpp"
#include "synspace/error.hpp"
#include "synspace/metrics.hpp"
#include "synspace/textgen.hpp"
#include "synspace/topology.hpp"
#include "synspace/tta.hpp"

namespace py = pybind11;
using namespace synspace;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::span<const float> as_vector(const FloatArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

EmbeddingSet as_set(const FloatArray& a, std::vector<std::string> labels = {}) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array of shape (count, dim)");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto d = static_cast<std::size_t>(a.shape(1));
  return EmbeddingSet(d, std::vector<float>(a.data(), a.data() + n * d), std::move(labels));
}

py::array_t<float> to_array(const EmbeddingSet& s) {
  py::array_t<float> out({s.size(), s.dim()});
  std::copy(s.data().begin(), s.data().end(), out.mutable_data());
  return out;
}

FilterConfig filter_from(const std::string& mode, double epsilon) { return {parse_filter_mode(mode), epsilon}; }

MetricConfig metric_from(const std::string& kind, std::size_t local_n, std::size_t subspace_d) {
  MetricConfig m;
  m.kind = parse_metric(kind);
  m.neighborhood_n = local_n;
  m.subspace_dims = subspace_d;
  return m;
}

py::dict prediction_dict(const Prediction& p) {
  py::dict d;
  d["class_id"] = p.class_id;
  d["scores"] = p.scores;
  return d;
}

}  // namespace

PYBIND11_MODULE(_synspace, m) {
  m.doc() = "Synonymous semantic space classifier (C++ core)";

  py::register_exception<Error>(m, "SynspaceError", PyExc_RuntimeError);

  py::class_<EmbeddingSet>(m, "EmbeddingSet")
      .def(py::init([](const FloatArray& a, std::vector<std::string> labels) { return as_set(a, std::move(labels)); }),
           py::arg("values"), py::arg("labels") = std::vector<std::string>{})
      .def_property_readonly("dim", &EmbeddingSet::dim)
      .def_property_readonly("labels", &EmbeddingSet::labels)
      .def("__len__", &EmbeddingSet::size)
      .def("to_numpy", &to_array)
      .def("normalized", &EmbeddingSet::normalized)
      .def("__eq__", [](const EmbeddingSet& a, const EmbeddingSet& b) { return a == b; });

  m.def("normalize", [](const FloatArray& v) {
    const auto e = normalize(as_vector(v));
    return py::array_t<float>(e.dim(), e.values().data());
  });
  m.def("cosine", [](const FloatArray& a, const FloatArray& b) { return cosine(as_vector(a), as_vector(b)); });
  m.def("load_embeddings", &load_embeddings, py::arg("path"));
  m.def("save_embeddings", &save_embeddings, py::arg("set"), py::arg("path"));

  py::class_<ClassLexicon>(m, "ClassLexicon")
      .def_readonly("class_name", &ClassLexicon::class_name)
      .def_readonly("dataset_name", &ClassLexicon::dataset_name)
      .def_readonly("synonyms", &ClassLexicon::synonyms)
      .def_readonly("descriptors", &ClassLexicon::descriptors);
  m.def("make_lexicon", &make_lexicon, py::arg("class_name"), py::arg("dataset_name") = "",
        py::arg("synonyms") = std::vector<std::string>{}, py::arg("descriptors") = std::vector<std::string>{});
  m.def("render_synonym_prompt", &render_synonym_prompt, py::arg("class_name"), py::arg("dataset_name"));
  m.def("render_descriptor_prompt", &render_descriptor_prompt, py::arg("class_name"));
  m.def("combine", [](const ClassLexicon& lex) { return combine(lex).texts; }, py::arg("lexicon"));
  m.def("load_lexicon_cache", &load_lexicon_cache, py::arg("path"));

  m.def(
      "persistence_0d",
      [](const FloatArray& a) {
        const auto rec = persistence_0d(build_similarity_graph(as_set(a)));
        py::list bars, merges;
        for (const auto& b : rec.bars) bars.append(py::make_tuple(b.birth, b.death, b.representative));
        for (const auto& mg : rec.merges) merges.append(py::make_tuple(mg.epsilon, mg.survivor_root, mg.absorbed_root));
        py::dict d;
        d["bars"] = bars;
        d["merges"] = merges;
        return d;
      },
      py::arg("embeddings"));
  m.def(
      "largest_component",
      [](const FloatArray& a, const std::string& mode, double epsilon) {
        const auto core = select_core(as_set(a), filter_from(mode, epsilon));
        return py::make_tuple(core.members, core.epsilon_used);
      },
      py::arg("embeddings"), py::arg("mode") = "fixed", py::arg("epsilon") = 0.9);

  m.def("sim_point_to_set", [](const FloatArray& g, const FloatArray& s) { return sim_point_to_set(as_vector(g), as_set(s)); });
  m.def("sim_point_to_center",
        [](const FloatArray& g, const FloatArray& s) { return sim_point_to_center(as_vector(g), as_set(s)); });
  m.def(
      "sim_point_to_subspace",
      [](const FloatArray& g, const FloatArray& s, std::size_t d) { return sim_point_to_subspace(as_vector(g), as_set(s), d); },
      py::arg("g"), py::arg("space"), py::arg("dims"));
  m.def(
      "sim_point_to_local_center",
      [](const FloatArray& g, const FloatArray& s, std::size_t n) {
        return sim_point_to_local_center(as_vector(g), as_set(s), n);
      },
      py::arg("g"), py::arg("space"), py::arg("n") = kDefaultNeighborhood);

  m.def("compactness", [](const FloatArray& a) { return compactness(as_set(a)); });

  py::class_<ClassCatalog>(m, "ClassCatalog")
      .def_static("load", &ClassCatalog::load, py::arg("path"))
      .def_static(
          "build",
          [](const std::vector<ClassLexicon>& lexicons, const std::vector<FloatArray>& embeddings,
             const std::string& epsilon_mode, double epsilon, const std::string& metric, std::size_t local_n,
             std::size_t subspace_d) {
            InMemoryEmbeddingProvider provider;
            for (std::size_t k = 0; k < embeddings.size(); ++k) provider.set(static_cast<int>(k), as_set(embeddings[k]));
            return ClassCatalog::build(lexicons, provider, filter_from(epsilon_mode, epsilon),
                                       metric_from(metric, local_n, subspace_d));
          },
          py::arg("lexicons"), py::arg("embeddings"), py::arg("epsilon_mode") = "fixed", py::arg("epsilon") = 0.9,
          py::arg("metric") = "local-center", py::arg("local_n") = kDefaultNeighborhood, py::arg("subspace_d") = 0)
      .def("save", &ClassCatalog::save, py::arg("path"))
      .def_property_readonly("dim", &ClassCatalog::dim)
      .def_property_readonly("input_hash", &ClassCatalog::input_hash)
      .def("__len__", &ClassCatalog::class_count)
      .def("core", [](const ClassCatalog& c, std::size_t k) { return c.entry(k).core.members; })
      .def("texts", [](const ClassCatalog& c, std::size_t k) { return c.entry(k).texts; })
      .def("predict", [](const ClassCatalog& c, const FloatArray& g) { return prediction_dict(predict(as_vector(g), c)); })
      .def(
          "evaluate",
          [](const ClassCatalog& c, const FloatArray& queries, const std::vector<int>& labels) {
            const auto rep = evaluate(as_set(queries), labels, c);
            py::dict d;
            d["top1"] = rep.top1_accuracy;
            d["total"] = rep.total;
            d["correct"] = rep.correct;
            d["confusion"] = rep.confusion;
            d["per_class_accuracy"] = rep.per_class_accuracy;
            d["predictions"] = rep.predictions;
            return d;
          },
          py::arg("queries"), py::arg("labels"));

  m.def(
      "run_episode",
      [](const FloatArray& views, const ClassCatalog& catalog, double tau, double rho, double lr) {
        const auto r = run_episode(as_set(views), catalog, TtaConfig{tau, rho, lr});
        py::dict d;
        d["unadapted"] = prediction_dict(r.unadapted);
        d["adapted"] = prediction_dict(r.adapted);
        d["selected"] = r.selected;
        d["entropy_trace"] = r.entropy_trace;
        return d;
      },
      py::arg("views"), py::arg("catalog"), py::arg("tau") = 100.0, py::arg("rho") = 0.1, py::arg("lr") = 5e-4);
}
