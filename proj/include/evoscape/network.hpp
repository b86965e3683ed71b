#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <evoscape/rng.hpp>
#include <evoscape/types.hpp>

namespace evoscape {

/// Fully-connected feed-forward topology. Weight layout is layer-major:
/// for each layer, the (out x in) weight block in row-major order,
/// followed by the layer's `out` biases.
struct NetworkShape {
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int output_dim = 0;

    NetworkShape() = default;
    NetworkShape(int input, std::vector<int> hidden, int output)
        : input_dim(input), hidden_dims(std::move(hidden)), output_dim(output) {
        validate();
    }

    void validate() const {
        if (input_dim < 1 || output_dim < 1)
            throw std::invalid_argument("NetworkShape: dims must be >= 1");
        for (int h : hidden_dims)
            if (h < 1)
                throw std::invalid_argument("NetworkShape: dims must be >= 1");
    }

    /// (fan_in, fan_out) per layer, input to output.
    std::vector<std::pair<int, int>> layer_dims() const {
        std::vector<std::pair<int, int>> dims;
        int in = input_dim;
        for (int h : hidden_dims) {
            dims.emplace_back(in, h);
            in = h;
        }
        dims.emplace_back(in, output_dim);
        return dims;
    }

    /// Total number of weights and biases: sum of (in + 1) * out.
    Index parameter_count() const {
        Index count = 0;
        for (auto [in, out] : layer_dims())
            count += static_cast<Index>(in + 1) * out;
        return count;
    }

    bool operator==(const NetworkShape& other) const = default;
};

/// A point in genotype space: the flat parameter vector of one policy.
struct Genotype {
    NetworkShape shape;
    Vector weights;

    Genotype() = default;
    Genotype(NetworkShape s, Vector w) : shape(std::move(s)), weights(std::move(w)) {
        if (weights.size() != shape.parameter_count())
            throw std::invalid_argument("Genotype: weight length does not match shape");
        if (!weights.allFinite())
            throw std::invalid_argument("Genotype: weights must be finite");
    }
};

/// Decoded per-layer matrices. decode(encode(p)) == p exactly.
struct Policy {
    std::vector<Matrix> layer_weights; // out x in
    std::vector<Vector> layer_biases;
};

Policy decode(const Genotype& g);
Genotype encode(const Policy& p, const NetworkShape& shape);

/// ReLU hidden layers, tanh output layer; outputs lie in [-1, 1].
Vector forward(const Policy& p, const ConstVectorRef& observation);
Vector forward(const Genotype& g, const ConstVectorRef& observation);

/// Weights ~ Normal(0, 2 / (fan_in + fan_out)) per layer, biases 0.
/// A single RNG stream per genotype; layers drawn in order.
Genotype xavier_init(const NetworkShape& shape, std::uint64_t seed);

/// FNV-1a over the raw weight bytes. Identifies genotypes in records.
std::uint64_t genotype_digest(const Genotype& g);

/// Little-endian wire format: input_dim, hidden count, hidden dims,
/// output_dim (u32 each), then the weights as f64.
void serialize_genotype(const Genotype& g, std::vector<std::uint8_t>& out);
Genotype deserialize_genotype(const std::uint8_t* data, std::size_t size, std::size_t& offset);

} // namespace evoscape
