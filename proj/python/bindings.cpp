#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <set>
#include <string>

#include "lakesketch/benchgen.hpp"
#include "lakesketch/checkpoint.hpp"
#include "lakesketch/config.hpp"
#include "lakesketch/errors.hpp"
#include "lakesketch/eval.hpp"
#include "lakesketch/search.hpp"
#include "lakesketch/sketch_io.hpp"

namespace py = pybind11;
using namespace lakesketch;

namespace {

HashFamily family_of(const std::string& hash, std::uint64_t seed) { return {hash_kind_from_string(hash), seed}; }

SketchConfig sketch_config(std::size_t num_perm, const std::string& hash, std::uint64_t seed) {
  SketchConfig c;
  c.num_perm = num_perm;
  c.family = family_of(hash, seed);
  return c;
}

/// A model directory written by `lakesketch pretrain` or `finetune`.
struct Model {
  EncoderModel model;
  Vocabulary vocab;
  RunConfig config;

  static Model load(const std::filesystem::path& dir) {
    return {load_checkpoint(dir / "model.json"), Vocabulary::load(dir / "vocab.json"),
            load_run_config(dir / "config.json")};
  }
};

}  // namespace

PYBIND11_MODULE(_lakesketch, m) {
  m.doc() = "Table sketches, sketch-based encoders and table search.";
  m.attr("__version__") = std::string(kVersion);

  auto base = py::register_exception<Error>(m, "LakesketchError");
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<ZeroColumnsError>(m, "ZeroColumnsError", base);
  py::register_exception<IncompatibleSketchError>(m, "IncompatibleSketchError", base);
  py::register_exception<ShapeError>(m, "ShapeError", base);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base);
  py::register_exception<TrainingDiverged>(m, "TrainingDiverged", base);
  py::register_exception<FormatError>(m, "FormatError", base);

  py::class_<Column>(m, "Column")
      .def_readonly("name", &Column::name)
      .def_property_readonly("type", [](const Column& c) { return std::string(to_string(c.type)); })
      .def_readonly("cells", &Column::cells);

  py::class_<Table>(m, "Table")
      .def_readonly("id", &Table::id)
      .def_readonly("description", &Table::description)
      .def_readonly("columns", &Table::columns)
      .def_readonly("row_count", &Table::row_count)
      .def_property_readonly("column_names", &Table::column_names)
      .def("row", &Table::row)
      .def("to_csv", &to_csv)
      .def("__repr__", [](const Table& t) {
        return "<Table " + t.id + ": " + std::to_string(t.row_count) + " rows x " +
               std::to_string(t.columns.size()) + " columns>";
      });

  m.def(
      "read_csv",
      [](const std::filesystem::path& path, bool header) {
        CsvOptions o;
        o.has_header = header;
        return parse_csv(path, o);
      },
      py::arg("path"), py::arg("header") = true);
  m.def(
      "parse_csv_text",
      [](const std::string& text, const std::string& id, bool header) {
        CsvOptions o;
        o.has_header = header;
        return parse_csv_text(text, id, o);
      },
      py::arg("text"), py::arg("id"), py::arg("header") = true);
  m.def(
      "make_table",
      [](std::string id, std::vector<std::string> names, const std::vector<std::vector<std::string>>& rows,
         std::string description) { return make_table(std::move(id), std::move(names), rows, std::move(description)); },
      py::arg("id"), py::arg("names"), py::arg("rows"), py::arg("description") = "");
  m.def(
      "infer_column_type", [](const std::vector<std::string>& cells) { return std::string(to_string(infer_column_type(cells))); },
      py::arg("cells"));

  py::class_<MinHashSignature>(m, "MinHashSignature")
      .def_readonly("values", &MinHashSignature::values)
      .def_property_readonly("num_perm", &MinHashSignature::num_perm)
      .def_property_readonly("hash", [](const MinHashSignature& s) { return std::string(to_string(s.family.kind)); })
      .def_property_readonly("seed", [](const MinHashSignature& s) { return s.family.seed; })
      .def("__eq__", [](const MinHashSignature& a, const MinHashSignature& b) { return a == b; });

  m.def(
      "minhash",
      [](const std::vector<std::string>& items, std::size_t num_perm, const std::string& hash, std::uint64_t seed) {
        return minhash(std::span<const std::string>(items), num_perm, family_of(hash, seed));
      },
      py::arg("items"), py::arg("num_perm") = 256, py::arg("hash") = "murmur-like", py::arg("seed") = 1);
  m.def("jaccard_estimate", &jaccard_estimate, py::arg("a"), py::arg("b"));

  py::class_<ColumnSketch>(m, "ColumnSketch")
      .def_readonly("cells", &ColumnSketch::cells)
      .def_readonly("words", &ColumnSketch::words)
      .def_property_readonly("numerical", [](const ColumnSketch& c) {
        return std::vector<double>(c.numerical.begin(), c.numerical.end());
      })
      .def_property_readonly("type", [](const ColumnSketch& c) { return std::string(to_string(c.type)); });

  py::class_<TableSketch>(m, "TableSketch")
      .def_readonly("table_id", &TableSketch::table_id)
      .def_readonly("description", &TableSketch::description)
      .def_readonly("column_names", &TableSketch::column_names)
      .def_readonly("content_snapshot", &TableSketch::content_snapshot)
      .def_readonly("columns", &TableSketch::columns)
      .def("save", [](const TableSketch& s, const std::filesystem::path& p) { save_sketch(s, p); }, py::arg("path"))
      .def("__eq__", [](const TableSketch& a, const TableSketch& b) { return a == b; });

  m.def(
      "sketch_table",
      [](const Table& t, std::size_t num_perm, const std::string& hash, std::uint64_t seed) {
        return sketch_table(t, sketch_config(num_perm, hash, seed));
      },
      py::arg("table"), py::arg("num_perm") = 256, py::arg("hash") = "murmur-like", py::arg("seed") = 1);
  m.def("load_sketch", &load_sketch, py::arg("path"));
  m.def(
      "numerical_sketch",
      [](const Column& c, std::size_t row_count) {
        const auto s = numerical_sketch(c, row_count);
        return std::vector<double>(s.begin(), s.end());
      },
      py::arg("column"), py::arg("row_count"));

  py::class_<LshForest>(m, "LshForest")
      .def(py::init<std::size_t>(), py::arg("num_trees") = 8)
      .def("add", &LshForest::add, py::arg("key"), py::arg("signature"))
      .def("index", &LshForest::index)
      .def("query", &LshForest::query, py::arg("signature"), py::arg("k"), py::arg("candidate_factor") = 10)
      .def("__len__", &LshForest::size);

  using Ranked = std::vector<std::string>;
  using Relevant = std::set<std::string>;
  m.def(
      "precision_at_k", [](const Ranked& r, const Relevant& rel, std::size_t k) { return precision_at_k(r, rel, k); },
      py::arg("ranked"), py::arg("relevant"), py::arg("k"));
  m.def(
      "recall_at_k", [](const Ranked& r, const Relevant& rel, std::size_t k) { return recall_at_k(r, rel, k); },
      py::arg("ranked"), py::arg("relevant"), py::arg("k"));
  m.def(
      "f1_at_k", [](const Ranked& r, const Relevant& rel, std::size_t k) { return f1_at_k(r, rel, k); },
      py::arg("ranked"), py::arg("relevant"), py::arg("k"));
  m.def(
      "weighted_f1", [](const std::vector<int>& p, const std::vector<int>& y) { return weighted_f1(p, y); },
      py::arg("predictions"), py::arg("labels"));
  m.def(
      "macro_f1", [](const std::vector<int>& p, const std::vector<int>& y) { return macro_f1(p, y); },
      py::arg("predictions"), py::arg("labels"));
  m.def(
      "r2_score", [](const std::vector<double>& p, const std::vector<double>& y) { return r2_score(p, y); },
      py::arg("predictions"), py::arg("targets"));
  m.def(
      "evaluate_retrieval",
      [](const RankedLists& results, const GroundTruth& truth, const std::vector<std::size_t>& ks) {
        py::list out;
        for (const auto& r : evaluate_retrieval(results, truth, ks)) {
          out.append(py::dict(py::arg("metric") = r.metric, py::arg("k") = r.k, py::arg("value") = r.value,
                              py::arg("n_queries") = r.n_queries));
        }
        return out;
      },
      py::arg("results"), py::arg("truth"), py::arg("ks"));

  m.def(
      "generate_benchmark",
      [](const std::vector<Table>& sources, const std::string& kind, std::uint64_t seed,
         const std::filesystem::path& out, const std::string& preset) {
        const auto bench = generate_benchmark(sources, benchmark_kind_from_string(kind), seed,
                                              variant_preset_from_string(preset));
        write_benchmark(bench, out);
        return py::dict(py::arg("tables") = bench.tables.size(), py::arg("pairs") = bench.pairs.size(),
                        py::arg("variants") = bench.variants.size(), py::arg("skipped") = bench.skipped);
      },
      py::arg("sources"), py::arg("kind"), py::arg("seed"), py::arg("out"), py::arg("preset") = "subset");

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load, py::arg("directory"))
      .def(
          "sketch",
          [](const Model& md, const Table& t) { return sketch_table(t, md.config.sketch); }, py::arg("table"))
      .def(
          "table_embedding",
          [](const Model& md, const TableSketch& s) {
            return table_embedding(s, md.model, md.vocab, md.config.ablation.streams());
          },
          py::arg("sketch"))
      .def(
          "column_embeddings",
          [](const Model& md, const TableSketch& s) {
            return embed_sketch(s, md.model, md.vocab, md.config.ablation.streams()).columns;
          },
          py::arg("sketch"))
      .def_property_readonly("parameter_count", [](const Model& md) { return md.model.parameter_count(); })
      .def_property_readonly("hidden", [](const Model& md) { return md.model.config().hidden; });

  m.def("cosine_distance", &cosine_distance, py::arg("a"), py::arg("b"));
}
