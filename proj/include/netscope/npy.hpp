#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace netscope::npy {

/// Element types understood by the reader. Layer files are always floating
/// point; integer types appear only in class-target files.
enum class Dtype { f4, f8, i4, i8 };

std::string descr(Dtype dt);
Dtype parse_descr(const std::string& descr);
std::size_t item_size(Dtype dt);

/// A C-order array as read from disk. Values are widened to double; integer
/// payloads are also kept verbatim in `ints` so class labels never round.
struct Array {
    Dtype dtype = Dtype::f8;
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<std::int64_t> ints;

    std::size_t size() const;
};

/// Reads a version 1.0 (or 2.0/3.0 header-length variant) .npy file.
/// Fortran-order and big-endian payloads are rejected.
Array read(const std::filesystem::path& path);

/// Reads only the header; used for manifest validation before loading data.
struct Header {
    Dtype dtype;
    std::vector<std::size_t> shape;
    bool fortran_order = false;
};
Header read_header(const std::filesystem::path& path);

void write_f8(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const double* data);
void write_i8(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const std::int64_t* data);

}  // namespace netscope::npy
