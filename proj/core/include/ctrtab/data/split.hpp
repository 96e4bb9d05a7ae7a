#pragma once

#include "ctrtab/data/table.hpp"
#include "ctrtab/nd/rng.hpp"

namespace ctrtab::data {

struct TrainTestSplit {
  RawTable train;
  RawTable test;
};

// Seeded shuffle split. Categorical targets are stratified per class (each
// class keeps at least one row on each side); numerical targets are not.
// Throws DomainError for test_fraction outside (0, 1), DataError when a class
// has fewer than two rows.
TrainTestSplit split(const RawTable& table, double test_fraction, nd::RngStream& rng);

}  // namespace ctrtab::data
