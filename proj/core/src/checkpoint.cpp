#include "wsg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace wsg {
namespace {

constexpr char kMagic[4] = {'W', 'S', 'G', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

bool read_u32(std::istream& is, uint32_t& v) {
  is.read(reinterpret_cast<char*>(&v), 4);
  return is.gcount() == 4;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  for (int i = 0; i < params.count(); ++i) {
    const auto& e = params.entry(i);
    write_u32(os, static_cast<uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_u32(os, static_cast<uint32_t>(e.value.rows()));
    write_u32(os, static_cast<uint32_t>(e.value.cols()));
    os.write(reinterpret_cast<const char*>(e.value.data()),
             static_cast<std::streamsize>(e.value.size() * sizeof(double)));
  }
  if (!os) throw InputError("checkpoint write failed: " + path);
}

void load_checkpoint(const std::string& path, ParamStore& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw InputError("bad checkpoint magic in " + path);
  std::vector<bool> seen(params.count(), false);
  uint32_t name_len;
  while (read_u32(is, name_len)) {
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t rows, cols;
    if (!read_u32(is, rows) || !read_u32(is, cols))
      throw InputError("truncated checkpoint record for '" + name + "'");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (static_cast<size_t>(is.gcount()) != m.size() * sizeof(double))
      throw InputError("truncated checkpoint data for '" + name + "'");
    int idx = params.index_of(name);
    if (idx < 0) throw InputError("checkpoint has unknown parameter '" + name + "'");
    auto& e = params.entry(idx);
    if (!e.value.same_shape(m))
      throw InputError("checkpoint shape mismatch for '" + name + "': file " +
                       m.shape_str() + " vs model " + e.value.shape_str());
    e.value = std::move(m);
    seen[idx] = true;
  }
  for (int i = 0; i < params.count(); ++i)
    if (!seen[i])
      throw InputError("checkpoint missing parameter '" + params.entry(i).name +
                       "'");
}

}  // namespace wsg
