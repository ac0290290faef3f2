#pragma once

// File formats.
//
// Dense tensor (binary): "TTDT", u32 version = 1, u32 m, m x u64 dims, then
// d* little-endian f64 values in linearization order.
// TT tensor (binary): "TTTC", u32 version = 1, u32 m, m x (u64 r_{i-1},
// u64 d_i, u64 r_i), then the data of every core in linearization order.
// Observations (text): one "i1,...,im,value" line per entry, 1-based.

#include <iosfwd>
#include <string>

#include "ttc/observations.hpp"
#include "ttc/tensor.hpp"

namespace ttc {

void write_dense(const std::string& path, const DenseTensor& x);
DenseTensor read_dense(const std::string& path);

void write_tt(const std::string& path, const TTTensor& t);
TTTensor read_tt(const std::string& path);

void write_observations(std::ostream& out, const SparseObservations& obs);
void write_observations(const std::string& path, const SparseObservations& obs);
/// Dims are not stored in the text format and must be supplied.
SparseObservations read_observations(std::istream& in, std::vector<Index> dims);
SparseObservations read_observations(const std::string& path, std::vector<Index> dims);

}  // namespace ttc
