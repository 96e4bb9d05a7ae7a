#include "ctrtab/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ctrtab/error.hpp"

namespace ctrtab::data {
namespace {

std::size_t test_count(std::size_t n, double fraction) {
  auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  if (n >= 2) k = std::clamp<std::size_t>(k, 1, n - 1);
  return k;
}

}  // namespace

TrainTestSplit split(const RawTable& table, double test_fraction, nd::RngStream& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DomainError("split: test_fraction must lie in (0, 1), got " + std::to_string(test_fraction));
  table.validate();
  const std::size_t n = table.rows();
  if (n < 2) throw DataError("split: need at least two rows");

  std::vector<std::size_t> train_rows, test_rows;
  const std::size_t target = table.schema.target_index();
  if (table.schema[target].kind == ColumnKind::categorical) {
    const auto& labels = table.categorical(target);
    // missing labels form their own stratum, ordered first
    std::map<std::optional<std::string>, std::vector<std::size_t>> strata;
    for (std::size_t r = 0; r < n; ++r) strata[labels[r]].push_back(r);
    for (auto& [label, rows] : strata) {
      if (rows.size() < 2) {
        throw DataError("split: class '" + label.value_or("<missing>") + "' has " + std::to_string(rows.size()) +
                        " row(s); stratification needs at least 2");
      }
      const auto perm = nd::permutation(rng, rows.size());
      const std::size_t k = test_count(rows.size(), test_fraction);
      for (std::size_t i = 0; i < rows.size(); ++i) (i < k ? test_rows : train_rows).push_back(rows[perm[i]]);
    }
    // interleave classes
    auto shuffle = [&rng](std::vector<std::size_t>& v) {
      const auto p = nd::permutation(rng, v.size());
      std::vector<std::size_t> out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[p[i]];
      v = std::move(out);
    };
    shuffle(train_rows);
    shuffle(test_rows);
  } else {
    const auto perm = nd::permutation(rng, n);
    const std::size_t k = test_count(n, test_fraction);
    test_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
    train_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());
  }
  return {table.select_rows(train_rows), table.select_rows(test_rows)};
}

}  // namespace ctrtab::data
