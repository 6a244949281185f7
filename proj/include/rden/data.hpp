#pragma once

#include "rden/image.hpp"
#include "rden/random.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rden {

/// Randomized multi-ellipse phantoms. One large "body" ellipse takes an
/// intensity from [intensity_min, intensity_max]; the remaining ellipses
/// add intensities in +/- half that range. Results are clamped to [0,1].
struct PhantomSpec {
    std::size_t size = 64;
    std::size_t ellipses_min = 4;
    std::size_t ellipses_max = 10;
    double intensity_min = 0.2;
    double intensity_max = 0.9;
    std::uint64_t seed = 1;

    void validate() const;
};

enum class SplitTag { Train, Test };

std::string split_name(SplitTag tag);

struct Dataset {
    std::vector<Image> images;
    SplitTag split = SplitTag::Train;
    std::string provenance;

    /// Throws ConfigError if empty or of mixed dimensions.
    void validate() const;
};

/// Phantom `index` of the family described by `spec` (sub-stream index of the seed).
Image phantom_image(const PhantomSpec& spec, std::size_t index);
Dataset phantom_generate(const PhantomSpec& spec, std::size_t count);

// Binary portable graymap ("P5"). Pixel values are clamped to [0,1] and
// quantized as round(v * maxval), halves away from zero. 16-bit samples
// are big-endian.
std::vector<std::uint8_t> pgm_encode(const Image& img, int bit_depth);
Image pgm_decode(std::span<const std::uint8_t> bytes);
void pgm_write(const Image& img, const std::filesystem::path& path, int bit_depth);
Image pgm_read(const std::filesystem::path& path);

/// Sample bytes of a P5 file (everything after the header).
std::span<const std::uint8_t> pgm_payload(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Regular-grid patches. With `limit`, a uniformly random subset of that
/// size is kept (in grid order).
Dataset extract_patches(const Dataset& ds, std::size_t patch, std::size_t stride,
                        std::optional<std::size_t> limit, SeededStream& rng);

/// Seeded shuffle split; test side gets round(n * test_fraction) images.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, SeededStream& rng);

struct ManifestEntry {
    std::string path; ///< relative to the manifest's directory
    std::string split;
    std::size_t width = 0;
    std::size_t height = 0;
    std::string sha256; ///< of the graymap payload
};

std::string sha256_hex(std::span<const std::uint8_t> bytes);

std::string manifest_csv(const std::vector<ManifestEntry>& entries);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Writes `img` next to the manifest and returns its manifest row.
ManifestEntry write_manifest_image(const std::filesystem::path& dir, const std::string& name,
                                   const std::string& split, const Image& img, int bit_depth);

/// Loads every image in a manifest (paths resolved against its directory).
std::vector<Image> load_manifest_images(const std::filesystem::path& manifest,
                                        const std::vector<ManifestEntry>& entries);

} // namespace rden
