#pragma once

#include <filesystem>
#include <string>

#include "echosr/image.hpp"

namespace echosr {

/// Reads an 8- or 16-bit PGM (P2 or P5). Intensities are rescaled to
/// [0, 1] by the file's maxval.
Image read_pgm(const std::filesystem::path& path);

/// Writes a 16-bit binary PGM (P5, maxval 65535). Values are clamped to
/// [0, 1] and quantized with round-to-nearest.
void write_pgm16(const std::filesystem::path& path, const Image& img);

/// Writes an 8-bit binary PGM (P5, maxval 255).
void write_pgm8(const std::filesystem::path& path, const Image& img);

/// Reads a 2D MetaImage (.mhd header + raw element file). Supports
/// MET_UCHAR, MET_USHORT and MET_FLOAT elements; a third dimension of
/// size 1 is accepted. Integer elements are rescaled by their bit depth,
/// float elements are clamped to [0, 1].
Image read_mhd(const std::filesystem::path& path);

/// Dispatches on extension: .pgm or .mhd.
Image read_image(const std::filesystem::path& path);

}  // namespace echosr
