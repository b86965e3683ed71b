#include <evoscape/network.hpp>

#include <cmath>
#include <cstring>

namespace evoscape {

Policy decode(const Genotype& g) {
    Policy p;
    Index pos = 0;
    for (auto [in, out] : g.shape.layer_dims()) {
        Matrix w(out, in);
        for (Index r = 0; r < out; ++r)
            for (Index c = 0; c < in; ++c)
                w(r, c) = g.weights[pos++];
        Vector b = g.weights.segment(pos, out);
        pos += out;
        p.layer_weights.push_back(std::move(w));
        p.layer_biases.push_back(std::move(b));
    }
    return p;
}

Genotype encode(const Policy& p, const NetworkShape& shape) {
    Vector w(shape.parameter_count());
    Index pos = 0;
    for (std::size_t l = 0; l < p.layer_weights.size(); ++l) {
        const Matrix& m = p.layer_weights[l];
        for (Index r = 0; r < m.rows(); ++r)
            for (Index c = 0; c < m.cols(); ++c)
                w[pos++] = m(r, c);
        w.segment(pos, p.layer_biases[l].size()) = p.layer_biases[l];
        pos += p.layer_biases[l].size();
    }
    return Genotype(shape, std::move(w));
}

Vector forward(const Policy& p, const ConstVectorRef& observation) {
    if (observation.size() != p.layer_weights.front().cols())
        throw std::invalid_argument("forward: observation length does not match input_dim");
    Vector x = observation;
    const std::size_t last = p.layer_weights.size() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        Vector z = p.layer_weights[l] * x + p.layer_biases[l];
        if (l == last)
            x = z.array().tanh();
        else
            x = z.array().max(0.0);
    }
    return x;
}

Vector forward(const Genotype& g, const ConstVectorRef& observation) {
    return forward(decode(g), observation);
}

Genotype xavier_init(const NetworkShape& shape, std::uint64_t seed) {
    Rng rng(seed);
    Vector w(shape.parameter_count());
    Index pos = 0;
    for (auto [in, out] : shape.layer_dims()) {
        std::normal_distribution<Scalar> normal(0.0, std::sqrt(2.0 / (in + out)));
        const Index n_weights = static_cast<Index>(in) * out;
        for (Index i = 0; i < n_weights; ++i)
            w[pos++] = normal(rng);
        w.segment(pos, out).setZero();
        pos += out;
    }
    return Genotype(shape, std::move(w));
}

std::uint64_t genotype_digest(const Genotype& g) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(g.weights.data());
    const std::size_t n = static_cast<std::size_t>(g.weights.size()) * sizeof(Scalar);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::uint8_t* data, std::size_t size, std::size_t& offset) {
    if (offset + 4 > size)
        throw std::runtime_error("deserialize_genotype: truncated input");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(data[offset + i]) << (8 * i);
    offset += 4;
    return v;
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const std::uint8_t* data, std::size_t size, std::size_t& offset) {
    if (offset + 8 > size)
        throw std::runtime_error("deserialize_genotype: truncated input");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(data[offset + i]) << (8 * i);
    offset += 8;
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

} // namespace

void serialize_genotype(const Genotype& g, std::vector<std::uint8_t>& out) {
    put_u32(out, static_cast<std::uint32_t>(g.shape.input_dim));
    put_u32(out, static_cast<std::uint32_t>(g.shape.hidden_dims.size()));
    for (int h : g.shape.hidden_dims)
        put_u32(out, static_cast<std::uint32_t>(h));
    put_u32(out, static_cast<std::uint32_t>(g.shape.output_dim));
    for (Index i = 0; i < g.weights.size(); ++i)
        put_f64(out, g.weights[i]);
}

Genotype deserialize_genotype(const std::uint8_t* data, std::size_t size, std::size_t& offset) {
    NetworkShape shape;
    shape.input_dim = static_cast<int>(get_u32(data, size, offset));
    const std::uint32_t n_hidden = get_u32(data, size, offset);
    shape.hidden_dims.resize(n_hidden);
    for (std::uint32_t i = 0; i < n_hidden; ++i)
        shape.hidden_dims[i] = static_cast<int>(get_u32(data, size, offset));
    shape.output_dim = static_cast<int>(get_u32(data, size, offset));
    shape.validate();
    Vector w(shape.parameter_count());
    for (Index i = 0; i < w.size(); ++i)
        w[i] = get_f64(data, size, offset);
    return Genotype(std::move(shape), std::move(w));
}

} // namespace evoscape
