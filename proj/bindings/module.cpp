#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "fastmks/cover_tree.hpp"
#include "fastmks/diagnostics.hpp"
#include "fastmks/errors.hpp"
#include "fastmks/kernels.hpp"
#include "fastmks/search.hpp"

namespace py = pybind11;

namespace {

using namespace fastmks;

Dataset to_dataset(const py::sequence& points) {
  if (py::len(points) == 0) throw InvalidArgument("dataset is empty");
  if (py::isinstance<py::str>(points[0]))
    return Dataset::from_sequences(points.cast<std::vector<std::string>>());
  return Dataset::from_vectors(points.cast<std::vector<std::vector<double>>>());
}

QueryPoint to_query(const py::object& q, const Kernel& kernel) {
  if (py::isinstance<py::str>(q)) return QueryPoint::sequence(q.cast<std::string>(), kernel);
  return QueryPoint::vector(q.cast<std::vector<double>>());
}

// Dataset + kernel + cover tree bundled so the three can never drift apart.
class Index {
 public:
  Index(const py::sequence& points, const std::string& kernel_spec, double base)
      : kernel_(Kernel::parse(kernel_spec)), data_(to_dataset(points)) {
    data_.prepare(kernel_, counter_);
    tree_ = CoverTree::build(data_, kernel_, base, counter_);
  }

  static Index load(const std::string& path, const py::sequence& points,
                    const std::string& kernel_spec) {
    Index idx(Kernel::parse(kernel_spec), to_dataset(points));
    idx.data_.prepare(idx.kernel_, idx.counter_);
    idx.tree_ = CoverTree::load_file(path, idx.data_, idx.kernel_);
    return idx;
  }

  QueryResult query(const py::object& q, std::size_t k, const std::string& mode) const {
    SearchConfig cfg = SearchConfig::parse(mode);
    cfg.k = k;
    const QueryPoint qp = to_query(q, kernel_);
    EvalCounter c;
    return fastmks::fastmks(tree_, data_, kernel_, qp.ref(), cfg, c);
  }

  QueryResult linear_scan(const py::object& q, std::size_t k) const {
    const QueryPoint qp = to_query(q, kernel_);
    EvalCounter c;
    return fastmks::linear_scan(data_, kernel_, qp.ref(), k, c);
  }

  py::dict stats() const {
    const TreeStats s = tree_.stats();
    py::dict d;
    d["nodes"] = s.nodes;
    d["points"] = s.points;
    d["root_scale"] = s.root_scale;
    d["min_scale"] = s.min_scale;
    d["depth"] = s.depth;
    d["max_children"] = s.max_children;
    d["duplicate_points"] = s.duplicate_points;
    d["construction_evals"] = s.construction_evals;
    return d;
  }

  py::dict validate() const {
    EvalCounter c;
    const InvariantReport r = tree_.validate(data_, kernel_, c);
    py::dict d;
    d["nesting"] = r.nesting;
    d["covering"] = r.covering;
    d["separation"] = r.separation;
    d["cache_furthest"] = r.cache_furthest;
    d["cache_parent"] = r.cache_parent;
    d["cache_subtree"] = r.cache_subtree;
    d["node_budget"] = r.node_budget;
    d["ok"] = r.ok();
    return d;
  }

  void save(const std::string& path) const { tree_.save_file(path); }

  std::size_t size() const { return data_.size(); }
  std::string kernel_spec() const { return kernel_.spec(); }
  double base() const { return tree_.base(); }
  std::uint64_t construction_evals() const { return tree_.construction_evals(); }

 private:
  Index(Kernel kernel, Dataset data) : kernel_(std::move(kernel)), data_(std::move(data)) {}

  Kernel kernel_;
  Dataset data_;
  CoverTree tree_;
  EvalCounter counter_;
};

double kernel_value(const std::string& kernel_spec, const py::object& x, const py::object& y) {
  const Kernel kernel = Kernel::parse(kernel_spec);
  const QueryPoint a = to_query(x, kernel);
  const QueryPoint b = to_query(y, kernel);
  EvalCounter c;
  return kernel.eval(a.ref(), b.ref(), c);
}

double expansion_constant_py(const py::sequence& points, const std::string& kernel_spec,
                             std::size_t cap) {
  const Kernel kernel = Kernel::parse(kernel_spec);
  Dataset data = to_dataset(points);
  EvalCounter c;
  data.prepare(kernel, c);
  return expansion_constant(data, kernel, c, cap);
}

}  // namespace

PYBIND11_MODULE(_fastmks, m) {
  m.doc() = "max-kernel search over kernel-space cover trees";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ParseError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const KernelDomainError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<Hit>(m, "Hit")
      .def_readonly("index", &Hit::index)
      .def_readonly("value", &Hit::value)
      .def("__repr__", [](const Hit& h) {
        return "Hit(index=" + std::to_string(h.index) +
               ", value=" + std::to_string(h.value) + ")";
      });

  py::class_<QueryResult>(m, "QueryResult")
      .def_readonly("hits", &QueryResult::hits)
      .def_readonly("kernel_evals", &QueryResult::kernel_evals)
      .def_readonly("nodes_visited", &QueryResult::nodes_visited)
      .def_readonly("nodes_pruned", &QueryResult::nodes_pruned)
      .def_readonly("guarantee_void", &QueryResult::guarantee_void);

  py::class_<Index>(m, "Index")
      .def(py::init<const py::sequence&, const std::string&, double>(), py::arg("points"),
           py::arg("kernel") = "linear", py::arg("base") = CoverTree::kDefaultBase)
      .def("query", &Index::query, py::arg("q"), py::arg("k") = 1, py::arg("mode") = "exact")
      .def("linear_scan", &Index::linear_scan, py::arg("q"), py::arg("k") = 1)
      .def("stats", &Index::stats)
      .def("validate", &Index::validate)
      .def("save", &Index::save, py::arg("path"))
      .def("__len__", &Index::size)
      .def_property_readonly("kernel", &Index::kernel_spec)
      .def_property_readonly("base", &Index::base)
      .def_property_readonly("construction_evals", &Index::construction_evals);

  m.def("load_index", &Index::load, py::arg("path"), py::arg("points"),
        py::arg("kernel") = "linear",
        "Load a saved index; points must be the dataset it was built from.");
  m.def("kernel_value", &kernel_value, py::arg("kernel"), py::arg("x"), py::arg("y"));
  m.def("expansion_constant", &expansion_constant_py, py::arg("points"),
        py::arg("kernel") = "linear", py::arg("cap") = 5000);
  m.def("rank_sample_count", &rank_sample_count, py::arg("n"), py::arg("tau"),
        py::arg("delta"));
}
