#pragma once

#include <cstdint>
#include <vector>

#include "eulerprod/hecke.hpp"

namespace eulerprod::hecke::detail {

/// Applies every Heilbronn matrix of determinant p to the Manin symbol with
/// the given P1 index and tallies the resulting symbols: cnt[index] +=
/// multiplicity. Terms that reduce to (0,0) mod q are dropped. cnt must have
/// size q+1 and is not cleared here.
void heilbronn_counts(const ModSymSpace& space, int64_t p, int probe_index,
                      std::vector<int32_t>& cnt);

/// Modular symbol {oo -> num/den} expressed in quotient coordinates via the
/// continued-fraction decomposition into unimodular paths. den == 0 gives 0.
Eigen::VectorXd path_from_inf(const ModSymSpace& space, int64_t num,
                              int64_t den);

}  // namespace eulerprod::hecke::detail
