#include "rden/weights_io.hpp"

#include "rden/data.hpp"
#include "rden/error.hpp"

#include <bit>
#include <cstring>

namespace rden {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int s = 0; s < 32; s += 8)
        out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_f32(std::vector<std::uint8_t>& out, double v)
{
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint16_t u16()
    {
        need(2, "u16");
        const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32()
    {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }

    void need(std::size_t n, const char* what) const
    {
        if (bytes_.size() - pos_ < n)
            throw DataError(std::string("truncated weight file while reading ") + what
                            + " at byte " + std::to_string(pos_));
    }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::string dims_text(std::size_t k, std::size_t in, std::size_t out)
{
    return std::to_string(k) + "x" + std::to_string(k) + "x" + std::to_string(in) + "x"
           + std::to_string(out);
}

} // namespace

std::vector<std::uint8_t> encode_params(const NetParams& params)
{
    std::vector<std::uint8_t> out(std::begin(kWeightMagic), std::end(kWeightMagic));
    put_u16(out, kWeightFormatVersion);
    put_u16(out, static_cast<std::uint16_t>(params.layers.size()));
    for (const ConvLayer& l : params.layers) {
        put_u32(out, static_cast<std::uint32_t>(l.kernel));
        put_u32(out, static_cast<std::uint32_t>(l.kernel));
        put_u32(out, static_cast<std::uint32_t>(l.in_channels));
        put_u32(out, static_cast<std::uint32_t>(l.out_channels));
        for (double w : l.weights)
            put_f32(out, w);
        put_u32(out, static_cast<std::uint32_t>(l.bias.size()));
        for (double b : l.bias)
            put_f32(out, b);
    }
    return out;
}

NetParams decode_params(std::span<const std::uint8_t> bytes, const NetConfig& config)
{
    NetParams expected = NetParams::zeros(config);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kWeightMagic, 4) != 0)
        throw DataError("not a weight file (magic bytes are not RDNW)");
    Reader r(bytes.subspan(4));
    const std::uint16_t version = r.u16();
    if (version != kWeightFormatVersion)
        throw DataError("unsupported weight file version " + std::to_string(version));
    const std::uint16_t count = r.u16();

    NetParams params = expected;
    params.init_scheme = "loaded";
    for (std::size_t l = 0; l < count; ++l) {
        const std::uint32_t ky = r.u32(), kx = r.u32(), in = r.u32(), out = r.u32();
        if (l >= expected.layers.size())
            throw DataError("shape mismatch: weight file has " + std::to_string(count)
                            + " layers, config expects " + std::to_string(expected.layers.size()));
        const ConvLayer& want = expected.layers[l];
        if (ky != kx || ky != want.kernel || in != want.in_channels || out != want.out_channels)
            throw DataError("shape mismatch at layer " + std::to_string(l) + ": config expects "
                            + dims_text(want.kernel, want.in_channels, want.out_channels)
                            + ", file has " + std::to_string(ky) + "x" + std::to_string(kx) + "x"
                            + std::to_string(in) + "x" + std::to_string(out));
        ConvLayer& layer = params.layers[l];
        r.need(4 * layer.weights.size(), "layer weights");
        for (double& w : layer.weights)
            w = r.f32();
        const std::uint32_t bias_len = r.u32();
        if (bias_len != layer.out_channels)
            throw DataError("shape mismatch at layer " + std::to_string(l) + ": bias length "
                            + std::to_string(bias_len) + ", expected "
                            + std::to_string(layer.out_channels));
        for (double& b : layer.bias)
            b = r.f32();
    }
    if (count != expected.layers.size())
        throw DataError("shape mismatch: weight file has " + std::to_string(count)
                        + " layers, config expects " + std::to_string(expected.layers.size()));
    if (r.remaining() != 0)
        throw DataError("weight file has " + std::to_string(r.remaining()) + " trailing bytes");
    return params;
}

void save_params(const NetParams& params, const std::filesystem::path& path)
{
    write_file(path, encode_params(params));
}

NetParams load_params(const std::filesystem::path& path, const NetConfig& config)
{
    return decode_params(read_file(path), config);
}

} // namespace rden
