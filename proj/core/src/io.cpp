#include "ttc/io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ttc {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError(path + ": truncated file");
  return v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::binary) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::binary) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

void read_header(std::ifstream& in, const std::string& path, const char* magic, std::uint32_t& m) {
  std::array<char, 4> tag{};
  if (!in.read(tag.data(), 4) || std::memcmp(tag.data(), magic, 4) != 0) {
    throw IoError(path + ": bad magic, expected " + std::string(magic, 4));
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw IoError(path + ": unsupported version " + std::to_string(version));
  m = get<std::uint32_t>(in, path);
  if (m < 1 || m > static_cast<std::uint32_t>(kMaxOrder)) {
    throw IoError(path + ": order " + std::to_string(m) + " outside 1.." + std::to_string(kMaxOrder));
  }
}

void read_values(std::ifstream& in, const std::string& path, std::span<double> out) {
  const auto bytes = static_cast<std::streamsize>(out.size_bytes());
  if (!in.read(reinterpret_cast<char*>(out.data()), bytes)) throw IoError(path + ": truncated data");
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace

void write_dense(const std::string& path, const DenseTensor& x) {
  auto out = open_out(path);
  out.write("TTDT", 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(x.order()));
  for (Index d : x.dims()) put(out, static_cast<std::uint64_t>(d));
  const auto v = x.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  finish_write(out, path);
}

DenseTensor read_dense(const std::string& path) {
  auto in = open_in(path);
  std::uint32_t m = 0;
  read_header(in, path, "TTDT", m);
  std::vector<Index> dims;
  for (std::uint32_t i = 0; i < m; ++i) {
    const auto d = get<std::uint64_t>(in, path);
    if (d == 0 || d > static_cast<std::uint64_t>(kDefaultDenseLimit)) throw IoError(path + ": bad dimension");
    dims.push_back(static_cast<Index>(d));
  }
  if (product(dims) > kDefaultDenseLimit) throw IoError(path + ": tensor too large");
  DenseTensor x(dims);
  read_values(in, path, x.values());
  return x;
}

void write_tt(const std::string& path, const TTTensor& t) {
  auto out = open_out(path);
  out.write("TTTC", 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(t.order()));
  for (const Core& c : t.cores()) {
    put(out, static_cast<std::uint64_t>(c.left_rank()));
    put(out, static_cast<std::uint64_t>(c.mode_size()));
    put(out, static_cast<std::uint64_t>(c.right_rank()));
  }
  for (const Core& c : t.cores()) {
    const auto v = c.data();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  }
  finish_write(out, path);
}

TTTensor read_tt(const std::string& path) {
  auto in = open_in(path);
  std::uint32_t m = 0;
  read_header(in, path, "TTTC", m);
  std::vector<std::array<std::uint64_t, 3>> shapes(m);
  for (auto& s : shapes) {
    for (auto& v : s) {
      v = get<std::uint64_t>(in, path);
      if (v == 0 || v > (1u << 24)) throw IoError(path + ": bad core shape");
    }
  }
  std::vector<Core> cores;
  for (const auto& s : shapes) {
    Core c(static_cast<Index>(s[0]), static_cast<Index>(s[1]), static_cast<Index>(s[2]));
    read_values(in, path, c.data());
    cores.push_back(std::move(c));
  }
  try {
    return TTTensor(std::move(cores));
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_observations(std::ostream& out, const SparseObservations& obs) {
  char buf[32];
  for (Index e = 0; e < obs.size(); ++e) {
    for (Index i : obs.index(e)) out << (i + 1) << ',';
    std::snprintf(buf, sizeof buf, "%.17g", obs.value(e));
    out << buf << '\n';
  }
}

void write_observations(const std::string& path, const SparseObservations& obs) {
  auto out = open_out(path, std::ios::out);
  write_observations(out, obs);
  finish_write(out, path);
}

SparseObservations read_observations(std::istream& in, std::vector<Index> dims) {
  const std::size_t m = dims.size();
  SparseObservations obs(std::move(dims));
  std::string line;
  std::vector<Index> index(m);
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> parts;
    while (std::getline(fields, field, ',')) parts.push_back(field);
    if (parts.size() != m + 1) {
      throw IoError("observation line " + std::to_string(lineno) + ": expected " + std::to_string(m + 1) +
                    " fields");
    }
    try {
      for (std::size_t k = 0; k < m; ++k) {
        std::size_t used = 0;
        const long long v = std::stoll(parts[k], &used);
        if (used != parts[k].size()) throw std::invalid_argument("index");
        index[k] = static_cast<Index>(v - 1);
      }
      obs.add(index, std::stod(parts[m]));
    } catch (const std::domain_error& e) {
      throw IoError("observation line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::logic_error&) {
      throw IoError("observation line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return obs;
}

SparseObservations read_observations(const std::string& path, std::vector<Index> dims) {
  auto in = open_in(path, std::ios::in);
  return read_observations(in, std::move(dims));
}

}  // namespace ttc
