#ifndef SSC_IO_HPP
#define SSC_IO_HPP

#include <string>
#include <vector>

#include "ssc/numkit.hpp"
#include "ssc/uosgen.hpp"

namespace ssc::io {

// Plain comma-separated text, one matrix row per line, values printed
// with 17 significant digits so they read back bit-exactly.

void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

void write_mask_csv(const std::string& path, const Mask& mask);
Mask read_mask_csv(const std::string& path);

/// One integer per line.
void write_labels_csv(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels_csv(const std::string& path);

/// data.csv (zero-filled) + mask.csv written into `dir`.
void write_observed(const std::string& dir, const ObservedMatrix& x);
ObservedMatrix read_observed(const std::string& dir);

std::string format_double(double v);

}  // namespace ssc::io

#endif  // SSC_IO_HPP
