#pragma once

#include <string>
#include <vector>

#include "kslab/density_tools.hpp"
#include "kslab/grid.hpp"

namespace kslab {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Binary field container, little-endian, format version 1:
//   bytes 0..7   magic "KSLABFLD"
//   bytes 8..15  u64 version
//   bytes 16..31 config hash, 16 ascii hex digits
//   bytes 32..39 u64 dimension d
//   bytes 40..47 u64 points per axis n
//   bytes 48..55 f64 box size L
//   bytes 56..63 f64 sample time t
//   bytes 64..   n^d f64 values, row-major, last axis fastest
void write_field_binary(const std::string& path, const GridField& f, double t,
                        const std::string& config_hash);
GridField read_field_binary(const std::string& path, double* t_out = nullptr,
                            std::string* hash_out = nullptr);

// Same container with magic "KSLABPTS"; n is the particle count, d the
// dimension, and the payload holds n*d particle-major coordinates.
void write_points_binary(const std::string& path, const std::vector<double>& pos, long n, int d,
                         double t, const std::string& config_hash);
std::vector<double> read_points_binary(const std::string& path, long* n_out, int* d_out,
                                       double* t_out = nullptr, std::string* hash_out = nullptr);

// CSV with a "# format=1 hash=..." comment line, then a header row.
void write_csv(const std::string& path, const std::string& config_hash,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);
void write_norm_series_csv(const std::string& path, const NormSeries& s,
                           const std::string& config_hash);

// Text fields as CSV (flat index + value) and JSON, for the --format switch.
void write_field_csv(const std::string& path, const GridField& f, double t,
                     const std::string& config_hash);
void write_field_json(const std::string& path, const GridField& f, double t,
                      const std::string& config_hash);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace kslab
