#include "spikehd/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spikehd {

namespace {

constexpr std::uint32_t kBasisVersion = 1;
constexpr std::uint32_t kMemoryVersion = 1;
constexpr std::uint32_t kNetworkVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "serializers assume a little-endian host");

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw std::runtime_error("cannot write file: " + path);
    }
    void magic(const char m[4]) { out.write(m, 4); }
    void u8(std::uint8_t v) { out.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
    void u64(std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
    void f64(double v) { out.write(reinterpret_cast<const char*>(&v), 8); }
    void f64s(const double* p, std::size_t n) {
        out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
    }
    void str(const std::string& s) {
        u64(s.size());
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
};

struct Reader {
    std::ifstream in;
    std::string path;
    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw std::runtime_error("cannot open file: " + p);
    }
    void need(bool ok, const char* what) {
        if (!ok) throw std::runtime_error("file " + path + ": truncated or invalid " + what);
    }
    void magic(const char m[4]) {
        char got[4];
        in.read(got, 4);
        need(in && std::memcmp(got, m, 4) == 0, "magic");
    }
    std::uint8_t u8() {
        char c;
        in.get(c);
        need(static_cast<bool>(in), "byte");
        return static_cast<std::uint8_t>(c);
    }
    std::uint32_t u32() {
        std::uint32_t v;
        in.read(reinterpret_cast<char*>(&v), 4);
        need(static_cast<bool>(in), "u32");
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        in.read(reinterpret_cast<char*>(&v), 8);
        need(static_cast<bool>(in), "u64");
        return v;
    }
    double f64() {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        need(static_cast<bool>(in), "f64");
        return v;
    }
    void f64s(double* p, std::size_t n) {
        in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 8));
        need(static_cast<bool>(in), "f64 block");
    }
    std::string str() {
        std::uint64_t n = u64();
        need(n < (1ULL << 31), "string length");
        std::string s(n, '\0');
        in.read(s.data(), static_cast<std::streamsize>(n));
        need(static_cast<bool>(in), "string payload");
        return s;
    }
    void version(std::uint32_t expected, const char* what) {
        std::uint32_t got = u32();
        if (got != expected)
            throw std::runtime_error("file " + path + ": unsupported " + what + " version " +
                                     std::to_string(got));
    }
};

void write_basis_block(Writer& w, const EncoderBasis& basis) {
    w.magic("SHDB");
    w.u32(kBasisVersion);
    w.u64(basis.input_dim());
    w.u64(basis.dim());
    w.u8(static_cast<std::uint8_t>(basis.activation()));
    w.u64(basis.seed());
}

EncoderBasis read_basis_block(Reader& r) {
    r.magic("SHDB");
    r.version(kBasisVersion, "basis");
    std::uint64_t n = r.u64();
    std::uint64_t d = r.u64();
    auto act = static_cast<Activation>(r.u8());
    std::uint64_t seed = r.u64();
    return EncoderBasis::create(n, d, act, seed);
}

void write_memory_block(Writer& w, const ClassMemory& memory) {
    w.magic("SHDM");
    w.u32(kMemoryVersion);
    w.u64(memory.num_classes());
    w.u64(memory.dim());
    for (const Label& l : memory.labels()) w.str(l);
    w.f64s(memory.classes().data.data(), memory.classes().size());
}

ClassMemory read_memory_block(Reader& r) {
    r.magic("SHDM");
    r.version(kMemoryVersion, "memory");
    std::uint64_t k = r.u64();
    std::uint64_t d = r.u64();
    std::vector<Label> labels;
    labels.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i) labels.push_back(r.str());
    ClassMemory m = ClassMemory::init(labels, d);
    r.f64s(m.classes_mut().data.data(), m.classes_mut().size());
    return m;
}

void write_network_block(Writer& w, const LifNetwork& net) {
    w.magic("SHDN");
    w.u32(kNetworkVersion);
    w.u64(net.input_dim());
    w.u64(net.num_layers());
    w.u64(net.classes());
    for (std::size_t l = 1; l <= net.num_layers(); ++l) {
        const LifLayer& layer = net.layer(l);
        w.u64(layer.inputs());
        w.u64(layer.neurons());
        w.u64(layer.weight_seed);
        w.u64(layer.readout_seed);
        w.f64(layer.params.alpha_mem);
        w.f64(layer.params.alpha_syn);
        w.f64(layer.params.gamma_ref);
        w.f64(layer.params.theta);
        w.f64(layer.params.surrogate_slope);
        w.f64(layer.params.dropout_p);
        w.f64s(layer.weights.data.data(), layer.weights.size());
    }
}

LifNetwork read_network_block(Reader& r) {
    r.magic("SHDN");
    r.version(kNetworkVersion, "network");
    std::uint64_t input_dim = r.u64();
    std::uint64_t n_layers = r.u64();
    std::uint64_t classes = r.u64();
    r.need(n_layers >= 1 && n_layers < 1024, "layer count");

    std::vector<std::size_t> sizes;
    LifParams params;  // rebuilt per layer below
    struct Raw {
        std::uint64_t inputs, neurons, wseed, rseed;
        LifParams params;
        std::vector<double> weights;
    };
    std::vector<Raw> raws;
    for (std::uint64_t l = 0; l < n_layers; ++l) {
        Raw raw;
        raw.inputs = r.u64();
        raw.neurons = r.u64();
        raw.wseed = r.u64();
        raw.rseed = r.u64();
        raw.params.alpha_mem = r.f64();
        raw.params.alpha_syn = r.f64();
        raw.params.gamma_ref = r.f64();
        raw.params.theta = r.f64();
        raw.params.surrogate_slope = r.f64();
        raw.params.dropout_p = r.f64();
        raw.weights.resize(raw.inputs * raw.neurons);
        r.f64s(raw.weights.data(), raw.weights.size());
        sizes.push_back(raw.neurons);
        params = raw.params;
        raws.push_back(std::move(raw));
    }

    LifNetwork net = LifNetwork::create(input_dim, sizes, classes, raws.front().params, 0);
    for (std::uint64_t l = 0; l < n_layers; ++l) {
        LifLayer& layer = net.layer_mut(l + 1);
        layer.params = raws[l].params;
        layer.weight_seed = raws[l].wseed;
        layer.readout_seed = raws[l].rseed;
        layer.weights.data = std::move(raws[l].weights);
        layer.readout = LifLayer::make_readout(classes, raws[l].neurons, raws[l].rseed);
    }
    return net;
}

}  // namespace

void save_basis(const std::string& path, const EncoderBasis& basis) {
    Writer w(path);
    write_basis_block(w, basis);
}

EncoderBasis load_basis(const std::string& path) {
    Reader r(path);
    return read_basis_block(r);
}

void save_memory(const std::string& path, const ClassMemory& memory) {
    Writer w(path);
    write_memory_block(w, memory);
}

ClassMemory load_memory(const std::string& path) {
    Reader r(path);
    return read_memory_block(r);
}

void save_network(const std::string& path, const LifNetwork& network) {
    Writer w(path);
    write_network_block(w, network);
}

LifNetwork load_network(const std::string& path) {
    Reader r(path);
    return read_network_block(r);
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
    Writer w(path);
    w.magic("SHDC");
    w.u32(kCheckpointVersion);
    w.u8(cp.meta.phase);
    w.u64(cp.meta.injection_depth);
    w.u8(cp.meta.pooling);
    w.u64(cp.meta.config_hash);
    w.str(cp.meta.resolved_config);
    write_network_block(w, cp.network);
    write_basis_block(w, cp.basis);
    write_memory_block(w, cp.memory);
}

namespace {
CheckpointMeta read_meta(Reader& r) {
    r.magic("SHDC");
    r.version(kCheckpointVersion, "checkpoint");
    CheckpointMeta meta;
    meta.phase = r.u8();
    meta.injection_depth = r.u64();
    meta.pooling = r.u8();
    meta.config_hash = r.u64();
    meta.resolved_config = r.str();
    return meta;
}
}  // namespace

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    Checkpoint cp{read_meta(r), read_network_block(r), read_basis_block(r), read_memory_block(r)};
    return cp;
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
    Reader r(path);
    return read_meta(r);
}

}  // namespace spikehd
