#ifndef FVTAXIS_SNAPSHOT_HPP
#define FVTAXIS_SNAPSHOT_HPP

#include <filesystem>
#include <iosfwd>

#include "fvtaxis/field.hpp"

namespace fvtaxis {

/// Field snapshot file: first line is a JSON header {"dim":d,"N":[...],"L":[...]},
/// followed by one cell value per line in row-major axis order, printed with
/// 17 significant digits (round-trip exact for doubles).
void write_snapshot(std::ostream& os, const ScalarField& f);
void write_snapshot(const std::filesystem::path& path, const ScalarField& f);

/// Throws validation_error on malformed header or wrong value count.
ScalarField read_snapshot(std::istream& is);
ScalarField read_snapshot(const std::filesystem::path& path);

}  // namespace fvtaxis

#endif
