#include "rden/data.hpp"

#include "rden/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rden {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ellipse {
    double cx, cy, a, b, angle, value;
};

double uniform_in(SeededStream& rng, double lo, double hi)
{
    return lo + (hi - lo) * rng.uniform();
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        fields.push_back(f);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

std::size_t parse_size(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw DataError("manifest: bad " + what + " '" + s + "'");
    }
}

} // namespace

void PhantomSpec::validate() const
{
    if (size < 16)
        throw ConfigError("size must be >= 16, got " + std::to_string(size));
    if (ellipses_min < 1 || ellipses_max < ellipses_min)
        throw ConfigError("ellipse count range must satisfy 1 <= ellipses_min <= ellipses_max");
    if (!(intensity_min >= 0.0) || !(intensity_max <= 1.0) || intensity_min > intensity_max)
        throw ConfigError("intensity range must lie within [0,1] with min <= max");
}

std::string split_name(SplitTag tag)
{
    return tag == SplitTag::Train ? "train" : "test";
}

void Dataset::validate() const
{
    if (images.empty())
        throw ConfigError("dataset is empty");
    for (const Image& img : images)
        if (!img.same_shape(images.front()))
            throw ConfigError("dataset images have mixed dimensions");
}

Image phantom_image(const PhantomSpec& spec, std::size_t index)
{
    spec.validate();
    SeededStream rng = SeededStream(spec.seed).split(index);
    const std::size_t count =
        spec.ellipses_min + static_cast<std::size_t>(rng.below(spec.ellipses_max - spec.ellipses_min + 1));
    const double span = spec.intensity_max - spec.intensity_min;

    std::vector<Ellipse> ellipses;
    ellipses.push_back({uniform_in(rng, -0.1, 0.1), uniform_in(rng, -0.1, 0.1),
                        uniform_in(rng, 0.75, 0.95), uniform_in(rng, 0.75, 0.95),
                        uniform_in(rng, 0.0, kPi), uniform_in(rng, spec.intensity_min, spec.intensity_max)});
    for (std::size_t e = 1; e < count; ++e)
        ellipses.push_back({uniform_in(rng, -0.55, 0.55), uniform_in(rng, -0.55, 0.55),
                            uniform_in(rng, 0.05, 0.35), uniform_in(rng, 0.05, 0.35),
                            uniform_in(rng, 0.0, kPi), uniform_in(rng, -span / 2.0, span / 2.0)});

    const std::size_t n = spec.size;
    Image img(n, n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double px = (2.0 * static_cast<double>(c) + 1.0) / static_cast<double>(n) - 1.0;
            const double py = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / static_cast<double>(n);
            double v = 0.0;
            for (const Ellipse& el : ellipses) {
                const double dx = px - el.cx;
                const double dy = py - el.cy;
                const double ca = std::cos(el.angle);
                const double sa = std::sin(el.angle);
                const double u = (dx * ca + dy * sa) / el.a;
                const double w = (-dx * sa + dy * ca) / el.b;
                if (u * u + w * w <= 1.0)
                    v += el.value;
            }
            img.at(r, c) = std::clamp(v, 0.0, 1.0);
        }
    return img;
}

Dataset phantom_generate(const PhantomSpec& spec, std::size_t count)
{
    spec.validate();
    if (count < 1)
        throw ConfigError("phantom count must be >= 1");
    Dataset ds;
    for (std::size_t i = 0; i < count; ++i)
        ds.images.push_back(phantom_image(spec, i));
    ds.provenance = "phantom:size=" + std::to_string(spec.size) + ";seed=" + std::to_string(spec.seed);
    return ds;
}

std::vector<std::uint8_t> pgm_encode(const Image& img, int bit_depth)
{
    if (bit_depth != 8 && bit_depth != 16)
        throw ConfigError("graymap bit depth must be 8 or 16");
    const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height)
                               + "\n" + std::to_string(maxval) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + img.size() * (bit_depth / 8));
    for (double v : img.data) {
        const double clamped = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        const auto level = static_cast<unsigned>(std::round(clamped * maxval));
        if (bit_depth == 16)
            out.push_back(static_cast<std::uint8_t>(level >> 8));
        out.push_back(static_cast<std::uint8_t>(level & 0xFFu));
    }
    return out;
}

namespace {

struct PgmHeader {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 0;
    std::size_t payload_offset = 0;
};

PgmHeader parse_pgm_header(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw DataError("not a portable graymap (bad magic)");
    if (bytes[1] != '5')
        throw DataError(std::string("unsupported graymap format P") + static_cast<char>(bytes[1])
                        + " (only binary P5 is supported)");
    std::size_t pos = 2;
    auto next_token = [&]() -> std::size_t {
        for (;;) {
            if (pos >= bytes.size())
                throw DataError("truncated graymap header");
            const char c = static_cast<char>(bytes[pos]);
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            value = value * 10 + (bytes[pos] - '0');
            ++pos;
            if (++digits > 9)
                throw DataError("malformed graymap header (number too long)");
        }
        if (digits == 0)
            throw DataError("malformed graymap header");
        return value;
    };
    PgmHeader h;
    h.width = next_token();
    h.height = next_token();
    const std::size_t maxval = next_token();
    if (h.width == 0 || h.height == 0)
        throw DataError("graymap has zero size");
    if (maxval != 255 && maxval != 65535)
        throw DataError("unsupported graymap maxval " + std::to_string(maxval)
                        + " (expected 255 or 65535)");
    h.maxval = static_cast<unsigned>(maxval);
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw DataError("malformed graymap header");
    h.payload_offset = pos + 1;
    return h;
}

} // namespace

std::span<const std::uint8_t> pgm_payload(std::span<const std::uint8_t> bytes)
{
    return bytes.subspan(parse_pgm_header(bytes).payload_offset);
}

Image pgm_decode(std::span<const std::uint8_t> bytes)
{
    const PgmHeader h = parse_pgm_header(bytes);
    const std::size_t sample = h.maxval > 255 ? 2 : 1;
    const std::size_t need = h.width * h.height * sample;
    if (bytes.size() - h.payload_offset < need)
        throw DataError("truncated graymap payload: expected " + std::to_string(need) + " bytes, found "
                        + std::to_string(bytes.size() - h.payload_offset));
    Image img(h.width, h.height, 0.0);
    const std::uint8_t* p = bytes.data() + h.payload_offset;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const unsigned level = sample == 2 ? (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
        if (level > h.maxval)
            throw DataError("graymap sample exceeds maxval");
        img.data[i] = static_cast<double>(level) / static_cast<double>(h.maxval);
    }
    return img;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw DataError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void pgm_write(const Image& img, const std::filesystem::path& path, int bit_depth)
{
    write_file(path, pgm_encode(img, bit_depth));
}

Image pgm_read(const std::filesystem::path& path)
{
    return pgm_decode(read_file(path));
}

Dataset extract_patches(const Dataset& ds, std::size_t patch, std::size_t stride,
                        std::optional<std::size_t> limit, SeededStream& rng)
{
    ds.validate();
    if (stride < 1 || patch < 1)
        throw ConfigError("patch and stride must be >= 1");
    const Image& first = ds.images.front();
    if (patch > first.width || patch > first.height)
        throw ConfigError("patch size " + std::to_string(patch) + " is larger than the "
                          + std::to_string(first.width) + "x" + std::to_string(first.height) + " images");

    Dataset out;
    out.split = ds.split;
    out.provenance = ds.provenance + ";patch=" + std::to_string(patch) + ";stride=" + std::to_string(stride);
    for (const Image& img : ds.images)
        for (std::size_t r = 0; r + patch <= img.height; r += stride)
            for (std::size_t c = 0; c + patch <= img.width; c += stride) {
                Image p(patch, patch, 0.0);
                for (std::size_t i = 0; i < patch; ++i)
                    for (std::size_t j = 0; j < patch; ++j)
                        p.at(i, j) = img.at(r + i, c + j);
                out.images.push_back(std::move(p));
            }

    if (limit && *limit < out.images.size()) {
        std::vector<std::size_t> idx(out.images.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < *limit; ++i)
            std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        idx.resize(*limit);
        std::sort(idx.begin(), idx.end());
        std::vector<Image> kept;
        for (std::size_t i : idx)
            kept.push_back(std::move(out.images[i]));
        out.images = std::move(kept);
        out.provenance += ";limit=" + std::to_string(*limit);
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, SeededStream& rng)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie strictly between 0 and 1");
    const std::size_t n = ds.images.size();
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_test == 0 || n_test >= n)
        throw ConfigError("split of " + std::to_string(n) + " images at fraction "
                          + std::to_string(test_fraction) + " leaves one side empty");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
    std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    Dataset train, test;
    train.split = SplitTag::Train;
    test.split = SplitTag::Test;
    train.provenance = test.provenance = ds.provenance;
    for (std::size_t i : train_idx)
        train.images.push_back(ds.images[i]);
    for (std::size_t i : test_idx)
        test.images.push_back(ds.images[i]);
    return {std::move(train), std::move(test)};
}

std::string sha256_hex(std::span<const std::uint8_t> bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw DataError("sha-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string manifest_csv(const std::vector<ManifestEntry>& entries)
{
    std::string out = "path,split,width,height,sha256\n";
    for (const ManifestEntry& e : entries) {
        if (e.path.find(',') != std::string::npos || e.path.find('\n') != std::string::npos)
            throw ConfigError("manifest paths may not contain commas or newlines: " + e.path);
        out += e.path + "," + e.split + "," + std::to_string(e.width) + "," + std::to_string(e.height)
               + "," + e.sha256 + "\n";
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries)
{
    write_text(path, manifest_csv(entries));
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open manifest " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "path,split,width,height,sha256")
        throw DataError("manifest " + path.string() + " has a missing or unexpected header");
    std::vector<ManifestEntry> entries;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        const auto f = split_csv(line);
        if (f.size() != 5)
            throw DataError("manifest " + path.string() + " row " + std::to_string(row)
                            + ": expected 5 fields");
        entries.push_back({f[0], f[1], parse_size(f[2], "width"), parse_size(f[3], "height"), f[4]});
    }
    return entries;
}

ManifestEntry write_manifest_image(const std::filesystem::path& dir, const std::string& name,
                                   const std::string& split_tag, const Image& img, int bit_depth)
{
    const auto bytes = pgm_encode(img, bit_depth);
    write_file(dir / name, bytes);
    return {name, split_tag, img.width, img.height, sha256_hex(pgm_payload(bytes))};
}

std::vector<Image> load_manifest_images(const std::filesystem::path& manifest,
                                        const std::vector<ManifestEntry>& entries)
{
    const auto dir = manifest.parent_path();
    std::vector<Image> images;
    for (const ManifestEntry& e : entries) {
        const auto bytes = read_file(dir / e.path);
        Image img = pgm_decode(bytes);
        if (!e.sha256.empty() && sha256_hex(pgm_payload(bytes)) != e.sha256)
            throw DataError("image " + e.path + " does not match its manifest checksum");
        if (img.width != e.width || img.height != e.height)
            throw DataError("image " + e.path + " does not match its manifest dimensions");
        images.push_back(std::move(img));
    }
    return images;
}

} // namespace rden
