#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "oobad/dataset.hpp"
#include "oobad/random.hpp"

namespace oobad::synthetic {

/// Standard normal via Box-Muller, stable across standard libraries.
inline double normal(Rng& rng) {
  const double u1 = 1.0 - uniform_unit(rng);  // (0, 1]
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// N rows of K numerical columns driven by one shared latent factor:
/// x_j = 10 + (j + 1) * z + 0.2 * noise.
inline Dataset correlated_numerical(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5eed));
  std::vector<std::vector<double>> cols(k, std::vector<double>(n_rows));
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double z = normal(rng);
    for (std::size_t j = 0; j < k; ++j) cols[j][i] = 10.0 + static_cast<double>(j + 1) * z + 0.2 * normal(rng);
  }
  std::vector<Column> columns;
  for (std::size_t j = 0; j < k; ++j) columns.push_back(Column::make_numerical("x" + std::to_string(j), std::move(cols[j])));
  return Dataset(std::move(columns));
}

struct PlantedDataset {
  Dataset data;
  std::vector<std::size_t> mislabelled;  // categorical cells flipped
  std::vector<std::size_t> outliers;     // numerical cells multiplied by 10
};

/// Five correlated features (three numerical, two categorical) sharing one
/// latent factor, with planted anomalies in distinct random rows. The latent
/// factor comes from four well-separated clusters and the categorical columns
/// are functions of the cluster, so every categorical cell can be inferred
/// with confidence from the numerical ones.
inline PlantedDataset planted_mixed(std::size_t n_rows, std::size_t n_mislabels, std::size_t n_outliers,
                                    std::uint64_t seed) {
  constexpr double kCentres[] = {-4.5, -1.5, 1.5, 4.5};
  Rng rng(derive_seed(seed, 0xa11ce));
  std::vector<double> a(n_rows), b(n_rows), c(n_rows);
  std::vector<std::string> sign(n_rows), band(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto g = uniform_below(rng, 4);
    const double z = kCentres[g] + 0.4 * normal(rng);
    a[i] = 10.0 + z + 0.1 * normal(rng);
    b[i] = 10.0 + 2.0 * z + 0.1 * normal(rng);
    c[i] = 10.0 - z + 0.1 * normal(rng);
    sign[i] = g < 2 ? "neg" : "pos";
    band[i] = g == 0 ? "low" : (g == 3 ? "high" : "mid");
  }

  std::vector<std::size_t> rows(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) rows[i] = i;
  const std::size_t planted = std::min(n_rows, n_mislabels + n_outliers);
  for (std::size_t j = 0; j < planted; ++j) std::swap(rows[j], rows[j + uniform_below(rng, n_rows - j)]);

  std::vector<std::size_t> mislabelled, outliers;
  for (std::size_t j = 0; j < planted; ++j) {
    const std::size_t r = rows[j];
    if (j < n_mislabels) {
      if (j % 2 == 0) {
        sign[r] = sign[r] == "neg" ? "pos" : "neg";
      } else {
        // move to the far band; "mid" goes to the side opposite its latent sign
        band[r] = band[r] == "low" ? "high" : (band[r] == "high" ? "low" : (b[r] > 10.0 ? "low" : "high"));
      }
      mislabelled.push_back(r);
    } else {
      std::vector<double>* target = (j % 3 == 0) ? &a : (j % 3 == 1 ? &b : &c);
      (*target)[r] *= 10.0;
      outliers.push_back(r);
    }
  }

  std::vector<Column> columns;
  columns.push_back(Column::make_numerical("a", std::move(a)));
  columns.push_back(Column::make_numerical("b", std::move(b)));
  columns.push_back(Column::make_numerical("c", std::move(c)));
  columns.push_back(Column::from_labels("sign", sign));
  columns.push_back(Column::from_labels("band", band));
  return {Dataset(std::move(columns)), std::move(mislabelled), std::move(outliers)};
}

}  // namespace oobad::synthetic
