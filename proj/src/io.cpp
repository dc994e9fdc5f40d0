#include "kslab/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kslab {

static_assert(std::endian::native == std::endian::little,
              "binary container assumes a little-endian host");

namespace {

constexpr std::uint64_t kFormatVersion = 1;

void put_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

void put_f64(std::ofstream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint64_t get_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

double get_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

std::string pad_hash(const std::string& h) {
  std::string out = h.substr(0, 16);
  out.resize(16, '0');
  return out;
}

void write_blob(const std::string& path, const char magic[8], const std::string& hash,
                std::uint64_t a, std::uint64_t b, double L, double t,
                const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(magic, 8);
  put_u64(out, kFormatVersion);
  out.write(pad_hash(hash).data(), 16);
  put_u64(out, a);
  put_u64(out, b);
  put_f64(out, L);
  put_f64(out, t);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw IoError("short write to '" + path + "'");
}

void read_header(std::ifstream& in, const std::string& path, const char magic[8],
                 std::uint64_t* a, std::uint64_t* b, double* L, double* t, std::string* hash) {
  char m[8];
  in.read(m, 8);
  if (!in || std::memcmp(m, magic, 8) != 0)
    throw IoError("'" + path + "' is not a " + std::string(magic, 8) + " container");
  const std::uint64_t version = get_u64(in);
  if (version != kFormatVersion)
    throw IoError("'" + path + "': unsupported format version " + std::to_string(version));
  char h[16];
  in.read(h, 16);
  if (hash) hash->assign(h, 16);
  *a = get_u64(in);
  *b = get_u64(in);
  *L = get_f64(in);
  *t = get_f64(in);
  if (!in) throw IoError("'" + path + "': truncated header");
}

}  // namespace

void write_field_binary(const std::string& path, const GridField& f, double t,
                        const std::string& config_hash) {
  write_blob(path, "KSLABFLD", config_hash, static_cast<std::uint64_t>(f.spec.d),
             static_cast<std::uint64_t>(f.spec.n), f.spec.L, t, f.data);
}

GridField read_field_binary(const std::string& path, double* t_out, std::string* hash_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t d = 0, n = 0;
  double L = 0, t = 0;
  read_header(in, path, "KSLABFLD", &d, &n, &L, &t, hash_out);
  GridSpec spec{static_cast<int>(d), static_cast<int>(n), L};
  GridField f(spec);
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (!in) throw IoError("'" + path + "': truncated payload");
  if (t_out) *t_out = t;
  return f;
}

void write_points_binary(const std::string& path, const std::vector<double>& pos, long n, int d,
                         double t, const std::string& config_hash) {
  if (pos.size() != static_cast<size_t>(n) * d) throw IoError("position buffer size mismatch");
  write_blob(path, "KSLABPTS", config_hash, static_cast<std::uint64_t>(n),
             static_cast<std::uint64_t>(d), 0.0, t, pos);
}

std::vector<double> read_points_binary(const std::string& path, long* n_out, int* d_out,
                                       double* t_out, std::string* hash_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t n = 0, d = 0;
  double L = 0, t = 0;
  read_header(in, path, "KSLABPTS", &n, &d, &L, &t, hash_out);
  std::vector<double> pos(n * d);
  in.read(reinterpret_cast<char*>(pos.data()),
          static_cast<std::streamsize>(pos.size() * sizeof(double)));
  if (!in) throw IoError("'" + path + "': truncated payload");
  if (n_out) *n_out = static_cast<long>(n);
  if (d_out) *d_out = static_cast<int>(d);
  if (t_out) *t_out = t;
  return pos;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::string& config_hash,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "# format=" << kFormatVersion << " hash=" << pad_hash(config_hash) << "\n";
  for (size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
    out << "\n";
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

void write_norm_series_csv(const std::string& path, const NormSeries& s,
                           const std::string& config_hash) {
  std::vector<std::vector<double>> rows;
  rows.reserve(s.times.size());
  for (size_t i = 0; i < s.times.size(); ++i)
    rows.push_back({s.times[i], s.values[i], s.weighted[i], s.running_sup[i]});
  write_csv(path, config_hash, {"t", "norm", "weighted", "running_sup"}, rows);
}

void write_field_csv(const std::string& path, const GridField& f, double t,
                     const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "# format=" << kFormatVersion << " hash=" << pad_hash(config_hash) << " d=" << f.spec.d
      << " n=" << f.spec.n << " L=" << format_double(f.spec.L) << " t=" << format_double(t)
      << "\n";
  out << "index,value\n";
  for (size_t j = 0; j < f.data.size(); ++j) out << j << "," << format_double(f.data[j]) << "\n";
  if (!out) throw IoError("short write to '" + path + "'");
}

void write_field_json(const std::string& path, const GridField& f, double t,
                      const std::string& config_hash) {
  nlohmann::json j;
  j["format"] = kFormatVersion;
  j["hash"] = pad_hash(config_hash);
  j["d"] = f.spec.d;
  j["n"] = f.spec.n;
  j["L"] = f.spec.L;
  j["t"] = t;
  j["data"] = f.data;
  write_text(path, j.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace kslab
