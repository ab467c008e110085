#pragma once

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "oobad/error.hpp"
#include "oobad/forest.hpp"

namespace oobad {

// Text model format, version 1. Reals are written as hex floats so a
// save/load cycle is bit-exact.
//
//   oobad-model 1
//   features <K>
//   feature <k> "<name>" classes <C or 0> rows <N> trees <T>
//   inbag <N counts>            (T lines)
//   tree <nodes> <count entries>
//   n <feature> <threshold> <left> <right> <value> <n_samples> <counts_offset>
//   c <count entries>
//   end

struct ModelBundle {
  std::vector<std::string> feature_names;
  std::vector<Forest> forests;
};

namespace detail {

inline std::string hex_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

inline double parse_hex_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw DataError("model file: bad real '" + s + "'");
  return v;
}

inline void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  if (!(in >> got) || got != want)
    throw DataError("model file: expected '" + want + "', found '" + got + "'");
}

template <class T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw DataError(std::string("model file: could not read ") + what);
  return v;
}

}  // namespace detail

inline void save_model(const ModelBundle& model, std::ostream& out) {
  out << "oobad-model 1\n";
  out << "features " << model.forests.size() << '\n';
  for (std::size_t k = 0; k < model.forests.size(); ++k) {
    const Forest& f = model.forests[k];
    out << "feature " << k << ' ' << std::quoted(model.feature_names.at(k)) << " classes " << f.task().n_classes
        << " rows " << f.n_rows() << " trees " << f.n_trees() << '\n';
    for (std::size_t t = 0; t < f.n_trees(); ++t) {
      out << "inbag";
      for (auto c : f.in_bag_counts(t)) out << ' ' << c;
      out << '\n';
    }
    for (const Tree& tree : f.trees()) {
      out << "tree " << tree.size() << ' ' << tree.all_class_counts().size() << '\n';
      for (const TreeNode& n : tree.nodes())
        out << "n " << n.feature << ' ' << detail::hex_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
            << detail::hex_double(n.value) << ' ' << n.n_samples << ' ' << n.counts_offset << '\n';
      out << 'c';
      for (auto c : tree.all_class_counts()) out << ' ' << c;
      out << '\n';
    }
  }
  out << "end\n";
}

inline ModelBundle load_model(std::istream& in) {
  detail::expect_token(in, "oobad-model");
  const auto version = detail::read_value<int>(in, "version");
  if (version != 1) throw DataError("model file: unsupported version " + std::to_string(version));
  detail::expect_token(in, "features");
  const auto k_count = detail::read_value<std::size_t>(in, "feature count");
  ModelBundle model;
  for (std::size_t k = 0; k < k_count; ++k) {
    detail::expect_token(in, "feature");
    if (detail::read_value<std::size_t>(in, "feature index") != k) throw DataError("model file: features out of order");
    std::string name;
    if (!(in >> std::quoted(name))) throw DataError("model file: bad feature name");
    detail::expect_token(in, "classes");
    const auto classes = detail::read_value<std::int32_t>(in, "class count");
    detail::expect_token(in, "rows");
    const auto n = detail::read_value<std::size_t>(in, "row count");
    detail::expect_token(in, "trees");
    const auto t_count = detail::read_value<std::size_t>(in, "tree count");
    const Task task{classes};

    std::vector<std::uint32_t> in_bag(t_count * n);
    for (std::size_t t = 0; t < t_count; ++t) {
      detail::expect_token(in, "inbag");
      for (std::size_t i = 0; i < n; ++i) in_bag[t * n + i] = detail::read_value<std::uint32_t>(in, "in-bag count");
    }
    std::vector<Tree> trees;
    trees.reserve(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
      detail::expect_token(in, "tree");
      const auto n_nodes = detail::read_value<std::size_t>(in, "node count");
      const auto n_counts = detail::read_value<std::size_t>(in, "class count entries");
      if (n_nodes == 0) throw DataError("model file: empty tree");
      std::vector<TreeNode> nodes(n_nodes);
      for (std::size_t id = 0; id < n_nodes; ++id) {
        TreeNode& node = nodes[id];
        detail::expect_token(in, "n");
        node.feature = detail::read_value<std::int32_t>(in, "feature");
        node.threshold = detail::parse_hex_double(detail::read_value<std::string>(in, "threshold"));
        node.left = detail::read_value<std::int32_t>(in, "left");
        node.right = detail::read_value<std::int32_t>(in, "right");
        node.value = detail::parse_hex_double(detail::read_value<std::string>(in, "value"));
        node.n_samples = detail::read_value<std::uint32_t>(in, "n_samples");
        node.counts_offset = detail::read_value<std::uint32_t>(in, "counts_offset");
        if (!node.is_leaf()) {
          // children always follow their parent, which also rules out cycles
          const auto lo = static_cast<std::int32_t>(id);
          const auto limit = static_cast<std::int32_t>(n_nodes);
          if (node.left <= lo || node.left >= limit || node.right <= lo || node.right >= limit)
            throw DataError("model file: child index out of range");
          if (static_cast<std::size_t>(node.feature) + 1 >= k_count)
            throw DataError("model file: split feature out of range");
        } else if (classes > 0 && node.counts_offset + static_cast<std::size_t>(classes) > n_counts) {
          throw DataError("model file: leaf counts out of range");
        }
      }
      detail::expect_token(in, "c");
      std::vector<std::uint32_t> counts(n_counts);
      for (auto& c : counts) c = detail::read_value<std::uint32_t>(in, "class count");
      Tree tree(task);
      tree.assign_raw(std::move(nodes), std::move(counts));
      trees.push_back(std::move(tree));
    }
    model.feature_names.push_back(std::move(name));
    model.forests.emplace_back(task, n, std::move(trees), std::move(in_bag));
  }
  detail::expect_token(in, "end");
  return model;
}

inline void save_model_file(const ModelBundle& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  save_model(model, out);
  if (!out) throw DataError("error writing model file '" + path + "'");
}

inline ModelBundle load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace oobad
