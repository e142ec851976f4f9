#ifndef ANISOLAB_FIELD_IO_H_
#define ANISOLAB_FIELD_IO_H_

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "anisolab/lattice.h"

namespace anisolab {

// Field file: one line of JSON header
//   {"format":"anisolab-field","version":1,"dims":N,
//    "nodes_per_axis":[...],"box":{"center":[...],"half_widths":[...]}}
// followed by one value per line in row-major order (axis 0 slowest),
// printed with 17 significant digits.
void write_field(std::ostream& os, const GridFunction& f);
GridFunction read_field(std::istream& is);

void write_field(const std::filesystem::path& path, const GridFunction& f);
GridFunction read_field(const std::filesystem::path& path);

// CSV slice along one or two axes. Remaining axes are pinned at the given
// node indices (defaulting to the middle node). Columns: the free
// coordinates followed by "value".
void write_csv_slice(std::ostream& os, const GridFunction& f,
                     const std::vector<std::size_t>& free_axes,
                     std::vector<std::size_t> pinned = {});

}  // namespace anisolab

#endif  // ANISOLAB_FIELD_IO_H_
