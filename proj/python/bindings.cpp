#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "simpdom/checkpoint.hpp"
#include "simpdom/errors.hpp"
#include "simpdom/evaluator.hpp"
#include "simpdom/html.hpp"
#include "simpdom/ingest.hpp"
#include "simpdom/simplifier.hpp"
#include "simpdom/synth.hpp"
#include "simpdom/tagger.hpp"

namespace py = pybind11;
using namespace simpdom;

namespace {

py::dict node_dict(const DomNode& n) {
  py::dict d;
  d["id"] = n.id;
  d["parent"] = n.parent_id ? py::cast(*n.parent_id) : py::none();
  d["tag"] = n.tag;
  d["text"] = n.text ? py::cast(*n.text) : py::none();
  d["children"] = n.child_ids;
  d["dfs_position"] = n.dfs_position;
  d["xpath"] = n.indexed_xpath;
  d["node_class"] = std::string(to_string(n.node_class));
  return d;
}

py::list circles_list(const DomTree& tree, int k, int max_friends) {
  py::list out;
  for (const auto& [id, c] : simplify(tree, k, max_friends)) {
    py::dict d;
    d["node"] = id;
    d["text"] = *tree.node(id).text;
    d["xpath"] = tree.node(id).indexed_xpath;
    d["partner"] = c.partner_id ? py::cast(*tree.node(*c.partner_id).text) : py::none();
    py::list friends;
    for (int f : c.friend_ids) friends.append(*tree.node(f).text);
    d["friends"] = friends;
    out.append(d);
  }
  return out;
}

py::dict raw_vertical_dict(const RawVertical& v) {
  py::dict sites;
  for (const auto& s : v.sites) {
    py::list pages;
    for (const auto& p : s.pages) {
      py::dict d;
      d["page_id"] = p.page_id;
      d["html"] = p.html;
      d["gold"] = p.gold;
      pages.append(d);
    }
    sites[py::str(s.site_id)] = pages;
  }
  py::dict out;
  out["name"] = v.name;
  out["attributes"] = v.attributes;
  out["sites"] = sites;
  return out;
}

std::vector<SiteCorpus> sites_from_disk(const std::filesystem::path& root,
                                        const std::string& vertical,
                                        const std::vector<std::string>& ids) {
  auto all = load_vertical(root, vertical, 1);
  if (ids.empty()) return all;
  std::vector<SiteCorpus> out;
  for (const auto* s : select_sites(all, ids)) out.push_back(*s);
  return out;
}

TrainConfig config_from(const std::string& json_text) {
  return json_text.empty() ? TrainConfig{} : TrainConfig::from_json(nlohmann::json::parse(json_text));
}

}  // namespace

PYBIND11_MODULE(_simpdom, m) {
  m.doc() = "Native core of the simpdom attribute extractor.";

  static py::exception<Error> base(m, "SimpdomError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ArgumentError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const LookupError& e) {
      PyErr_SetString(PyExc_KeyError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("parse", [](const std::string& html, const std::string& page_id) {
    auto tree = parse_page(html, page_id);
    py::list out;
    for (const auto& n : tree.nodes()) out.append(node_dict(n));
    return out;
  }, py::arg("html"), py::arg("page_id") = "page");

  m.def("circles", [](const std::string& html, int k, int max_friends) {
    return circles_list(parse_page(html, "page"), k, max_friends);
  }, py::arg("html"), py::arg("k") = kDefaultAncestors, py::arg("max_friends") = 10,
     "Friend circles of every text leaf of a single page.");

  m.def("page_f1", &page_f1, py::arg("predicted"), py::arg("gold"));

  m.def("seed_split", [](std::vector<std::string> sites, int k, std::uint64_t seed, int rotation) {
    auto s = seed_split(std::move(sites), k, seed, rotation);
    return py::make_tuple(s.train, s.test);
  }, py::arg("sites"), py::arg("k"), py::arg("seed"), py::arg("rotation") = 0);

  m.def("synth", [](const std::string& name, int sites, int pages, std::uint64_t seed) {
    return raw_vertical_dict(synth_vertical(name, {sites, pages, seed}));
  }, py::arg("name"), py::arg("sites") = 2, py::arg("pages") = 20, py::arg("seed") = 0);

  m.def("write_synth", [](const std::filesystem::path& root, const std::string& name, int sites,
                          int pages, std::uint64_t seed) {
    write_vertical(root, synth_vertical(name, {sites, pages, seed}));
  }, py::arg("root"), py::arg("name"), py::arg("sites") = 2, py::arg("pages") = 20,
     py::arg("seed") = 0);

  py::class_<TrainedModel>(m, "Model")
      .def_static("train", [](const std::filesystem::path& root, const std::string& vertical,
                              const std::vector<std::string>& sites, const std::string& config) {
        auto corpus = sites_from_disk(root, vertical, sites);
        auto cfg = config_from(config);
        py::gil_scoped_release release;
        return train(corpus, cfg).model;
      }, py::arg("root"), py::arg("vertical"), py::arg("sites") = std::vector<std::string>{},
         py::arg("config") = "")
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def("save", [](const TrainedModel& self, const std::filesystem::path& path) {
        save_checkpoint(self, path);
      }, py::arg("path"))
      .def("finetune", [](const TrainedModel& self, const std::filesystem::path& root,
                          const std::string& vertical, const std::vector<std::string>& sites,
                          const std::string& config) {
        auto corpus = sites_from_disk(root, vertical, sites);
        auto cfg = config_from(config);
        py::gil_scoped_release release;
        return finetune(self, corpus, cfg).model;
      }, py::arg("root"), py::arg("vertical"), py::arg("sites") = std::vector<std::string>{},
         py::arg("config") = "")
      .def("extract", [](const TrainedModel& self, const std::string& html) {
        return extract_page(self, parse_page(html, "page")).values;
      }, py::arg("html"))
      .def("evaluate", [](const TrainedModel& self, const std::filesystem::path& root,
                          const std::string& vertical, const std::vector<std::string>& sites) {
        return evaluate(self, sites_from_disk(root, vertical, sites)).mean;
      }, py::arg("root"), py::arg("vertical"), py::arg("sites") = std::vector<std::string>{})
      .def_readonly("vertical", &TrainedModel::vertical)
      .def_readonly("attributes", &TrainedModel::attributes)
      .def_property_readonly("config_json", [](const TrainedModel& self) {
        return self.config().to_json().dump();
      });
}
