#include "rden/network.hpp"

#include "rden/error.hpp"
#include "rden/random.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace rden {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightMap = Eigen::Map<const Eigen::MatrixXd>;
using WeightGradMap = Eigen::Map<Eigen::MatrixXd>;

/// Rows ordered (ky, kx, ci) to match the weight layout; zero padding.
RowMat im2col(const RowMat& act, std::size_t kernel, std::size_t h, std::size_t w)
{
    const auto in = static_cast<std::size_t>(act.rows());
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel / 2);
    RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(kernel * kernel * in),
                               static_cast<Eigen::Index>(h * w));
    for (std::size_t ky = 0; ky < kernel; ++ky)
        for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - half;
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - half;
            for (std::size_t ci = 0; ci < in; ++ci) {
                double* dst = cols.row(static_cast<Eigen::Index>((ky * kernel + kx) * in + ci)).data();
                const double* src = act.row(static_cast<Eigen::Index>(ci)).data();
                for (std::size_t py = 0; py < h; ++py) {
                    const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(py) + dy;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h))
                        continue;
                    for (std::size_t px = 0; px < w; ++px) {
                        const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(px) + dx;
                        if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w))
                            continue;
                        dst[py * w + px] = src[static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)];
                    }
                }
            }
        }
    return cols;
}

/// Adjoint of im2col.
RowMat col2im(const RowMat& cols, std::size_t in, std::size_t kernel, std::size_t h, std::size_t w)
{
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel / 2);
    RowMat act = RowMat::Zero(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(h * w));
    for (std::size_t ky = 0; ky < kernel; ++ky)
        for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - half;
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - half;
            for (std::size_t ci = 0; ci < in; ++ci) {
                const double* src = cols.row(static_cast<Eigen::Index>((ky * kernel + kx) * in + ci)).data();
                double* dst = act.row(static_cast<Eigen::Index>(ci)).data();
                for (std::size_t py = 0; py < h; ++py) {
                    const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(py) + dy;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h))
                        continue;
                    for (std::size_t px = 0; px < w; ++px) {
                        const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(px) + dx;
                        if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w))
                            continue;
                        dst[static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)] += src[py * w + px];
                    }
                }
            }
        }
    return act;
}

void check_layers(const NetParams& params)
{
    params.config.validate();
    if (params.layers.size() != params.config.depth)
        throw ConfigError("parameter layer count does not match the network depth");
    for (const ConvLayer& layer : params.layers)
        if (layer.weights.size() != layer.weight_count() || layer.bias.size() != layer.out_channels)
            throw ConfigError("parameter tensor sizes are inconsistent with layer dims");
}

} // namespace

Tensor4::Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill)
    : batch(n), channels(c), height(h), width(w), data(n * c * h * w, fill)
{
    if (n == 0 || c == 0 || h == 0 || w == 0)
        throw ConfigError("tensor dims must all be >= 1");
}

Tensor4 Tensor4::from_images(const std::vector<Image>& images)
{
    if (images.empty())
        throw ConfigError("cannot build a tensor from an empty image list");
    Tensor4 t(images.size(), 1, images.front().height, images.front().width);
    for (std::size_t i = 0; i < images.size(); ++i)
        t.set_image(i, images[i]);
    return t;
}

Image Tensor4::image(std::size_t index) const
{
    if (channels != 1)
        throw ConfigError("tensor image access needs a single channel");
    const std::size_t plane = height * width;
    return Image(width, height,
                 std::vector<double>(data.begin() + static_cast<std::ptrdiff_t>(index * plane),
                                     data.begin() + static_cast<std::ptrdiff_t>((index + 1) * plane)));
}

void Tensor4::set_image(std::size_t index, const Image& img)
{
    if (channels != 1 || img.width != width || img.height != height)
        throw ConfigError("image does not match tensor plane shape");
    std::copy(img.data.begin(), img.data.end(),
              data.begin() + static_cast<std::ptrdiff_t>(index * height * width));
}

void NetConfig::validate() const
{
    if (depth < 2)
        throw ConfigError("network depth must be >= 2");
    if (channels < 1)
        throw ConfigError("network channels must be >= 1");
    if (kernel % 2 == 0)
        throw ConfigError("network kernel size must be odd");
}

NetParams NetParams::zeros(const NetConfig& config)
{
    config.validate();
    NetParams p;
    p.config = config;
    p.init_scheme = "zeros";
    for (std::size_t l = 0; l < config.depth; ++l) {
        ConvLayer layer;
        layer.kernel = config.kernel;
        layer.in_channels = l == 0 ? 1 : config.channels;
        layer.out_channels = l + 1 == config.depth ? 1 : config.channels;
        layer.weights.assign(layer.weight_count(), 0.0);
        layer.bias.assign(layer.out_channels, 0.0);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

std::size_t NetParams::parameter_count() const noexcept
{
    std::size_t n = 0;
    for (const ConvLayer& l : layers)
        n += l.weights.size() + l.bias.size();
    return n;
}

ParamGradients zeros_like(const NetParams& params)
{
    ParamGradients g = params.layers;
    for (ConvLayer& l : g) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return g;
}

NetParams net_init(const NetConfig& config, std::uint64_t seed)
{
    NetParams p = NetParams::zeros(config);
    p.init_scheme = "he_normal";
    p.init_seed = seed;
    const SeededStream root(seed);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        ConvLayer& layer = p.layers[l];
        SeededStream rng = root.split(l);
        const double scale = std::sqrt(2.0 / static_cast<double>(layer.fan_in()));
        for (double& w : layer.weights)
            w = static_cast<double>(static_cast<float>(scale * rng.normal()));
    }
    return p;
}

void round_to_float(NetParams& params)
{
    for (ConvLayer& l : params.layers) {
        for (double& w : l.weights)
            w = static_cast<double>(static_cast<float>(w));
        for (double& b : l.bias)
            b = static_cast<double>(static_cast<float>(b));
    }
}

struct NetPass::Cache {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<RowMat> cols;
    std::vector<RowMat> pre;
};

NetPass::NetPass(const NetParams& params, const Image& input)
    : params_(params), cache_(std::make_unique<Cache>())
{
    check_layers(params);
    const std::size_t h = input.height;
    const std::size_t w = input.width;
    cache_->height = h;
    cache_->width = w;
    RowMat act = Eigen::Map<const RowMat>(input.data.data(), 1, static_cast<Eigen::Index>(h * w));
    const std::size_t depth = params.layers.size();
    for (std::size_t l = 0; l < depth; ++l) {
        const ConvLayer& layer = params.layers[l];
        RowMat cols = im2col(act, layer.kernel, h, w);
        const WeightMap weights(layer.weights.data(), static_cast<Eigen::Index>(layer.out_channels),
                                static_cast<Eigen::Index>(layer.fan_in()));
        const Eigen::Map<const Eigen::VectorXd> bias(layer.bias.data(),
                                                     static_cast<Eigen::Index>(layer.out_channels));
        RowMat pre = weights * cols;
        pre.colwise() += bias;
        if (l + 1 < depth)
            act = pre.cwiseMax(0.0);
        else
            act = pre;
        cache_->cols.push_back(std::move(cols));
        cache_->pre.push_back(std::move(pre));
    }
    output_ = Image(w, h, std::vector<double>(act.data(), act.data() + h * w));
    if (params.config.residual)
        for (std::size_t i = 0; i < output_.size(); ++i)
            output_.data[i] = input.data[i] - output_.data[i];
}

NetPass::~NetPass() = default;
NetPass::NetPass(NetPass&&) noexcept = default;

Image NetPass::backward(const Image& upstream, ParamGradients& grads) const
{
    require_same_shape(upstream, output_, "net backward upstream");
    if (grads.size() != params_.layers.size())
        throw ConfigError("gradient buffer does not match the network");
    const std::size_t h = cache_->height;
    const std::size_t w = cache_->width;
    const std::size_t depth = params_.layers.size();
    const bool residual = params_.config.residual;

    RowMat delta = Eigen::Map<const RowMat>(upstream.data.data(), 1, static_cast<Eigen::Index>(h * w));
    if (residual)
        delta = -delta;

    RowMat d_act;
    for (std::size_t step = 0; step < depth; ++step) {
        const std::size_t l = depth - 1 - step;
        const ConvLayer& layer = params_.layers[l];
        ConvLayer& g = grads[l];
        const auto out = static_cast<Eigen::Index>(layer.out_channels);
        const auto fan = static_cast<Eigen::Index>(layer.fan_in());
        WeightGradMap(g.weights.data(), out, fan).noalias() += delta * cache_->cols[l].transpose();
        Eigen::Map<Eigen::VectorXd>(g.bias.data(), out) += delta.rowwise().sum();

        const WeightMap weights(layer.weights.data(), out, fan);
        const RowMat d_cols = weights.transpose() * delta;
        d_act = col2im(d_cols, layer.in_channels, layer.kernel, h, w);
        if (l > 0)
            delta = d_act.cwiseProduct((cache_->pre[l - 1].array() > 0.0).cast<double>().matrix());
    }

    Image d_input(w, h, std::vector<double>(d_act.data(), d_act.data() + h * w));
    if (residual)
        for (std::size_t i = 0; i < d_input.size(); ++i)
            d_input.data[i] += upstream.data[i];
    return d_input;
}

Tensor4 net_forward(const NetParams& params, const Tensor4& input)
{
    if (input.channels != 1)
        throw ConfigError("network input must have exactly 1 channel, got "
                          + std::to_string(input.channels));
    Tensor4 out(input.batch, 1, input.height, input.width);
    for (std::size_t b = 0; b < input.batch; ++b)
        out.set_image(b, NetPass(params, input.image(b)).output());
    return out;
}

NetBackward net_backward(const NetParams& params, const Tensor4& input, const Tensor4& upstream)
{
    if (input.channels != 1)
        throw ConfigError("network input must have exactly 1 channel");
    if (!upstream.same_shape(input))
        throw ConfigError("upstream gradient shape does not match the network output");
    NetBackward result{zeros_like(params), Tensor4(input.batch, 1, input.height, input.width)};
    for (std::size_t b = 0; b < input.batch; ++b) {
        const NetPass pass(params, input.image(b));
        result.input.set_image(b, pass.backward(upstream.image(b), result.params));
    }
    return result;
}

Denoiser as_denoiser(NetParams params, std::string name)
{
    check_layers(params);
    auto shared = std::make_shared<const NetParams>(std::move(params));
    return Denoiser(std::move(name),
                    [shared](const Image& y) { return NetPass(*shared, y).output(); });
}

} // namespace rden
