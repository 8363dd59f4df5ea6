#pragma once

#include <iosfwd>
#include <string>

#include "tensorreg/tensor.hpp"

namespace tensorreg {

// TNS1 layout: "TNS1", u32 order, order x u64 extents, then the entries as
// little-endian f64 in layout order.
void write_tns(std::ostream& os, const DenseTensor& t);
DenseTensor read_tns(std::istream& is);

void write_tns_file(const std::string& path, const DenseTensor& t);
DenseTensor read_tns_file(const std::string& path);

}  // namespace tensorreg
