#include "sylvinit/network_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sylvinit/errors.hpp"

namespace sylvinit {

using nlohmann::json;

namespace {

LayerKind parse_layer_kind(const std::string& type) {
    if (type == "conv2d" || type == "conv") return LayerKind::Conv2D;
    if (type == "dense") return LayerKind::Dense;
    if (type == "relu") return LayerKind::ReLU;
    if (type == "flatten") return LayerKind::Flatten;
    if (type == "global_avg_pool" || type == "gap") return LayerKind::GlobalAvgPool;
    throw FormatError("network spec: unknown layer type '" + type + "'");
}

}  // namespace

NetworkSpec network_spec_from_json(const json& doc) {
    try {
        NetworkSpec spec;
        const auto dims = doc.at("input_dims").get<std::vector<std::size_t>>();
        if (dims.size() != 3) throw FormatError("network spec: input_dims must be [h, w, c]");
        spec.input = {dims[0], dims[1], dims[2]};
        spec.num_classes = doc.at("num_classes").get<std::size_t>();
        for (const auto& item : doc.at("layers")) {
            LayerSpec layer;
            layer.kind = parse_layer_kind(item.at("type").get<std::string>());
            layer.name = item.value("name", std::string{});
            if (layer.kind == LayerKind::Conv2D) {
                layer.units = item.at("out_channels").get<std::size_t>();
                const auto& k = item.at("kernel");
                if (k.is_array()) {
                    layer.f_h = k.at(0).get<std::size_t>();
                    layer.f_w = k.at(1).get<std::size_t>();
                } else {
                    layer.f_h = layer.f_w = k.get<std::size_t>();
                }
                layer.stride = item.value("stride", std::size_t{1});
                layer.pad = item.value("pad", std::size_t{0});
            } else if (layer.kind == LayerKind::Dense) {
                layer.units = item.at("units").get<std::size_t>();
            }
            spec.layers.push_back(std::move(layer));
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw FormatError(std::string("network spec: ") + e.what());
    }
}

json network_spec_to_json(const NetworkSpec& spec) {
    json doc;
    doc["input_dims"] = {spec.input.h, spec.input.w, spec.input.c};
    doc["num_classes"] = spec.num_classes;
    doc["layers"] = json::array();
    for (const auto& l : spec.layers) {
        json item{{"type", std::string(to_string(l.kind))}, {"name", l.name}};
        if (l.kind == LayerKind::Conv2D) {
            item["out_channels"] = l.units;
            item["kernel"] = {l.f_h, l.f_w};
            item["stride"] = l.stride;
            item["pad"] = l.pad;
        } else if (l.kind == LayerKind::Dense) {
            item["units"] = l.units;
        }
        doc["layers"].push_back(std::move(item));
    }
    return doc;
}

NetworkSpec load_network_spec(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open network spec '" + file.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw FormatError("network spec '" + file.string() + "': " + e.what());
    }
    return network_spec_from_json(doc);
}

void save_network_spec(const std::filesystem::path& file, const NetworkSpec& spec) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write '" + file.string() + "'");
    out << network_spec_to_json(spec).dump(2) << '\n';
}

namespace {


void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("parameter file: truncated");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("parameter file: truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

void put_record(std::ostream& out, const std::string& name, const std::vector<std::uint32_t>& dims,
                std::span<const double> values) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put_u32(out, d);
    for (double v : values) put_f64(out, v);
}

struct Record {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<double> values;
};

Record get_record(std::istream& in) {
    Record r;
    const std::uint32_t len = get_u32(in);
    if (len > 4096) throw FormatError("parameter file: implausible name length");
    r.name.resize(len);
    if (!in.read(r.name.data(), len)) throw FormatError("parameter file: truncated name");
    const std::uint32_t ndims = get_u32(in);
    if (ndims > 8) throw FormatError("parameter file: implausible dims count");
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < ndims; ++i) {
        r.dims.push_back(get_u32(in));
        count *= r.dims.back();
    }
    r.values.resize(count);
    for (double& v : r.values) v = get_f64(in);
    return r;
}

void require_shape(const Matrix& stored, const Matrix& expected, const std::string& layer) {
    if (stored.rows() != expected.rows() || stored.cols() != expected.cols()) {
        throw FormatError("parameter file: layer '" + layer + "' stores " + stored.shape_string() + ", network expects " +
                          expected.shape_string());
    }
}

std::vector<std::uint32_t> u32_dims(std::initializer_list<std::size_t> dims) {
    std::vector<std::uint32_t> out;
    for (auto d : dims) out.push_back(static_cast<std::uint32_t>(d));
    return out;
}

}  // namespace

void write_parameters(std::ostream& out, const Network& net) {
    out.write(kParamMagic, 4);
    put_u32(out, kParamVersion);
    put_u32(out, static_cast<std::uint32_t>(net.params.size()));
    for (const auto& p : net.params) {
        const auto& ls = net.spec.layers[p.layer];
        if (ls.kind == LayerKind::Conv2D) {
            const std::size_t c_i = p.weight.cols() / (ls.f_h * ls.f_w);
            const Tensor4 t = reshape_weight(p.weight, c_i, ls.f_h, ls.f_w);
            put_record(out, ls.name + ".weight", u32_dims({t.dim(0), t.dim(1), t.dim(2), t.dim(3)}), t.data());
        } else {
            put_record(out, ls.name + ".weight", u32_dims({p.weight.rows(), p.weight.cols()}), p.weight.data());
        }
        put_record(out, ls.name + ".bias", u32_dims({p.bias.size()}), p.bias);
    }
    if (!out) throw IoError("parameter file: write failed");
}

void save_parameters(const std::filesystem::path& file, const Network& net) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write '" + file.string() + "'");
    write_parameters(out, net);
}

Network read_parameters(std::istream& in, const NetworkSpec& spec) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kParamMagic, 4) != 0) throw FormatError("parameter file: bad magic");
    const std::uint32_t version = get_u32(in);
    if (version != kParamVersion) throw FormatError("parameter file: unsupported version " + std::to_string(version));
    Network net(spec);
    const std::uint32_t layers = get_u32(in);
    if (layers != net.params.size()) {
        throw FormatError("parameter file: " + std::to_string(layers) + " layers, network has " +
                          std::to_string(net.params.size()));
    }
    for (auto& p : net.params) {
        const auto& ls = net.spec.layers[p.layer];
        Record w = get_record(in);
        if (w.name != ls.name + ".weight") throw FormatError("parameter file: expected '" + ls.name + ".weight', got '" + w.name + "'");
        if (ls.kind == LayerKind::Conv2D) {
            if (w.dims.size() != 4) throw FormatError("parameter file: conv weight must have 4 dims");
            Tensor4 t({w.dims[0], w.dims[1], w.dims[2], w.dims[3]}, std::move(w.values));
            Matrix flat = flatten_weight(t);
            require_shape(flat, p.weight, ls.name);
            p.weight = std::move(flat);
        } else {
            if (w.dims.size() != 2) throw FormatError("parameter file: dense weight must have 2 dims");
            Matrix m(w.dims[0], w.dims[1], std::move(w.values));
            require_shape(m, p.weight, ls.name);
            p.weight = std::move(m);
        }
        Record b = get_record(in);
        if (b.name != ls.name + ".bias" || b.values.size() != p.bias.size()) {
            throw FormatError("parameter file: bad bias record for '" + ls.name + "'");
        }
        p.bias = std::move(b.values);
    }
    return net;
}

Network load_parameters(const std::filesystem::path& file, const NetworkSpec& spec) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open parameter file '" + file.string() + "'");
    return read_parameters(in, spec);
}

}  // namespace sylvinit
