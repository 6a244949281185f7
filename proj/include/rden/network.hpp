#pragma once

#include "rden/denoisers.hpp"
#include "rden/image.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace rden {

/// Dense (batch, channels, height, width) array, row-major.
struct Tensor4 {
    std::size_t batch = 1;
    std::size_t channels = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0);

    static Tensor4 from_images(const std::vector<Image>& images);
    Image image(std::size_t index) const;
    void set_image(std::size_t index, const Image& img);

    bool same_shape(const Tensor4& other) const noexcept
    {
        return batch == other.batch && channels == other.channels && height == other.height
               && width == other.width;
    }
};

/// DnCNN-style stack: conv+ReLU layers with a linear final conv.
struct NetConfig {
    std::size_t depth = 5;
    std::size_t channels = 16;
    std::size_t kernel = 3;
    /// The network predicts the noise and returns input - prediction.
    bool residual = true;

    void validate() const;
    bool operator==(const NetConfig&) const = default;
};

/// One convolution. Weights are laid out [ky][kx][in][out], which is also
/// the order of the dims in the weight file.
struct ConvLayer {
    std::size_t kernel = 1;
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::vector<double> weights;
    std::vector<double> bias;

    std::size_t fan_in() const noexcept { return kernel * kernel * in_channels; }
    std::size_t weight_count() const noexcept { return fan_in() * out_channels; }
    double& weight(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co)
    {
        return weights[((ky * kernel + kx) * in_channels + ci) * out_channels + co];
    }
    bool operator==(const ConvLayer&) const = default;
};

struct NetParams {
    NetConfig config;
    std::vector<ConvLayer> layers;
    std::string init_scheme;
    std::uint64_t init_seed = 0;

    /// Layer shapes implied by a config, with zero weights and biases.
    static NetParams zeros(const NetConfig& config);
    std::size_t parameter_count() const noexcept;
};

/// Same layer shapes as the parameters; used for gradients and optimizer moments.
using ParamGradients = std::vector<ConvLayer>;

ParamGradients zeros_like(const NetParams& params);

/// He-normal weights N(0, 2/fan_in) rounded to float precision, zero biases.
NetParams net_init(const NetConfig& config, std::uint64_t seed);

/// Forward pass over a (batch, 1, H, W) tensor, zero "same" padding.
Tensor4 net_forward(const NetParams& params, const Tensor4& input);

struct NetBackward {
    ParamGradients params;
    Tensor4 input;
};

/// Reverse-mode gradients of <upstream, net_forward(input)>, summed over the batch.
NetBackward net_backward(const NetParams& params, const Tensor4& input, const Tensor4& upstream);

/// Forward pass over one image that keeps the activations needed by
/// backward(). Holds a reference to `params`.
class NetPass {
public:
    NetPass(const NetParams& params, const Image& input);
    ~NetPass();
    NetPass(NetPass&&) noexcept;
    NetPass& operator=(NetPass&&) = delete;

    const Image& output() const noexcept { return output_; }

    /// Adds the parameter gradients of <upstream, output> into `grads` and
    /// returns the gradient with respect to the input.
    Image backward(const Image& upstream, ParamGradients& grads) const;

private:
    struct Cache;
    const NetParams& params_;
    std::unique_ptr<Cache> cache_;
    Image output_;
};

/// Wraps a copy of the parameters as a Denoiser (no analytic divergence).
Denoiser as_denoiser(NetParams params, std::string name = "dncnn");

/// Rounds every weight and bias to the nearest float.
void round_to_float(NetParams& params);

} // namespace rden
