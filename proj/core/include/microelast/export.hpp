#pragma once

#include <string>
#include <vector>

#include "microelast/network.hpp"

namespace microelast {

enum class ExportFormat { csv, vtk };

/// Named scalar fields on a regular nx x ny point grid.
struct FieldExport {
    int nx = 0, ny = 0;
    Matrix points;  // 2 x (nx * ny), x-major
    std::vector<std::string> channel_names;
    std::vector<Vector> channels;  // one value per point

    void validate() const;
};

/// CSV: header "x,y,<channels...>", one row per point, %.9e values.
/// VTK: legacy ASCII STRUCTURED_POINTS, one SCALARS block per channel.
void export_fields(const FieldExport& fields, ExportFormat format,
                   const std::string& path);

/// Read back a CSV produced by export_fields (grid dims recovered from
/// the coordinate columns).
FieldExport import_fields_csv(const std::string& path);

}  // namespace microelast
