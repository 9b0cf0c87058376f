#include "microelast/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace microelast {

namespace {

constexpr char kMagic[8] = {'M', 'E', 'L', 'S', 'N', 'A', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("snapshot: truncated file " + path);
    return v;
}

}  // namespace

void save_snapshot(const std::string& path, const Topology& topo,
                   const Vector& params) {
    topo.validate();
    if (params.size() == 0 || params.size() % topo.param_count() != 0)
        throw std::invalid_argument(
            "snapshot: parameter count not a multiple of the topology size");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("snapshot: cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    put<std::int32_t>(out, topo.input_dim);
    put<std::int32_t>(out, topo.output_dim);
    put<std::int32_t>(out, topo.n_layers);
    put<std::int32_t>(out, topo.units_per_layer);
    put<std::int32_t>(out, static_cast<std::int32_t>(topo.activation));
    put<double>(out, topo.beta);
    put<std::int64_t>(out, params.size());
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!out) throw std::runtime_error("snapshot: write failed for " + path);
}

std::pair<Topology, Vector> load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("snapshot: bad magic in " + path);
    Topology topo;
    topo.input_dim = get<std::int32_t>(in, path);
    topo.output_dim = get<std::int32_t>(in, path);
    topo.n_layers = get<std::int32_t>(in, path);
    topo.units_per_layer = get<std::int32_t>(in, path);
    topo.activation = static_cast<Activation>(get<std::int32_t>(in, path));
    topo.beta = get<double>(in, path);
    topo.validate();
    const auto n = get<std::int64_t>(in, path);
    if (n <= 0 || n % topo.param_count() != 0)
        throw std::runtime_error(
            "snapshot: parameter count disagrees with topology in " + path);
    Vector params(n);
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot: truncated file " + path);
    return {topo, std::move(params)};
}

}  // namespace microelast
