#include "hba/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hba::checkpoint {

namespace {

constexpr char kMagic[4] = {'H', 'B', 'A', 'F'};

void put_bytes(std::string& buf, const void* p, std::size_t n) {
  buf.append(reinterpret_cast<const char*>(p), n);
}

template <typename T>
void put_pod(std::string& buf, T v) {
  put_bytes(buf, &v, sizeof(T));
}

void put_string(std::string& buf, const std::string& s) {
  put_pod<std::uint32_t>(buf, static_cast<std::uint32_t>(s.size()));
  buf.append(s);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void take(void* out, std::size_t n) {
    if (pos + n > buf.size())
      throw std::runtime_error("checkpoint: truncated file");
    std::memcpy(out, buf.data() + pos, n);
    pos += n;
  }
  template <typename T>
  T pod() {
    T v;
    take(&v, sizeof(T));
    return v;
  }
  std::string str() {
    std::uint32_t n = pod<std::uint32_t>();
    if (pos + n > buf.size())
      throw std::runtime_error("checkpoint: truncated file");
    std::string s(buf.data() + pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n,
                      std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

void save(const std::string& path, const Contents& c) {
  std::string buf;
  put_bytes(buf, kMagic, 4);
  put_pod<std::uint32_t>(buf, kFormatVersion);

  std::string cfg;
  for (auto& [k, v] : c.config) cfg += k + "=" + v + "\n";
  put_string(buf, cfg);

  put_pod<std::uint32_t>(buf, static_cast<std::uint32_t>(c.arrays.size()));
  for (auto& [name, a] : c.arrays) {
    put_string(buf, name);
    put_pod<std::uint32_t>(buf, static_cast<std::uint32_t>(a.ndim()));
    for (std::size_t dim : a.shape()) put_pod<std::uint64_t>(buf, dim);
    put_bytes(buf, a.data(), a.numel() * sizeof(double));
  }
  put_pod<std::uint64_t>(
      buf, fnv1a64(reinterpret_cast<const unsigned char*>(buf.data()),
                   buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Contents load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string buf = ss.str();
  if (buf.size() < 4 + sizeof(std::uint32_t) + sizeof(std::uint64_t))
    throw std::runtime_error("checkpoint: truncated file");

  std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  std::uint64_t actual =
      fnv1a64(reinterpret_cast<const unsigned char*>(buf.data()), body);
  if (stored != actual)
    throw std::runtime_error("checkpoint: checksum mismatch in " + path);

  Reader r{buf};
  char magic[4];
  r.take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::uint32_t version = r.pod<std::uint32_t>();
  if (version != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format version " +
                             std::to_string(version));

  Contents c;
  std::stringstream cfg(r.str());
  std::string line;
  while (std::getline(cfg, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    c.config[line.substr(0, eq)] = line.substr(eq + 1);
  }

  std::uint32_t count = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    std::uint32_t ndim = r.pod<std::uint32_t>();
    std::vector<std::size_t> shape;
    for (std::uint32_t j = 0; j < ndim; ++j)
      shape.push_back(static_cast<std::size_t>(r.pod<std::uint64_t>()));
    std::size_t n = Array::numel_of(shape);
    std::vector<double> data(n);
    r.take(data.data(), n * sizeof(double));
    c.arrays.emplace(std::move(name), Array(std::move(shape), std::move(data)));
  }
  return c;
}

void save_model_params(const std::string& path,
                       std::map<std::string, std::string> config,
                       const ParamStore& params) {
  Contents c;
  c.config = std::move(config);
  for (auto& [name, a] : params.all()) c.arrays.emplace(name, a);
  save(path, c);
}

}  // namespace hba::checkpoint
