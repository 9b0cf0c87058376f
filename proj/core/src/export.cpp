#include "microelast/export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace microelast {

void FieldExport::validate() const {
    const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("export: grid dims must be positive");
    if (points.cols() != n)
        throw std::invalid_argument("export: point count != nx * ny");
    if (channel_names.size() != channels.size())
        throw std::invalid_argument("export: channel name/data mismatch");
    for (const Vector& ch : channels)
        if (ch.size() != n)
            throw std::invalid_argument("export: channel length != grid size");
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return buf;
}

void write_csv(const FieldExport& f, std::ostream& out) {
    out << "x,y";
    for (const std::string& name : f.channel_names) out << "," << name;
    out << "\n";
    for (Eigen::Index c = 0; c < f.points.cols(); ++c) {
        out << fmt(f.points(0, c)) << "," << fmt(f.points(1, c));
        for (const Vector& ch : f.channels) out << "," << fmt(ch[c]);
        out << "\n";
    }
}

void write_vtk(const FieldExport& f, std::ostream& out) {
    const double x0 = f.points.row(0).minCoeff();
    const double y0 = f.points.row(1).minCoeff();
    const double dx =
        f.nx > 1 ? (f.points.row(0).maxCoeff() - x0) / (f.nx - 1) : 1.0;
    const double dy =
        f.ny > 1 ? (f.points.row(1).maxCoeff() - y0) / (f.ny - 1) : 1.0;
    out << "# vtk DataFile Version 3.0\n"
        << "microelast fields\n"
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << f.nx << " " << f.ny << " 1\n"
        << "ORIGIN " << fmt(x0) << " " << fmt(y0) << " 0\n"
        << "SPACING " << fmt(dx) << " " << fmt(dy) << " 1\n"
        << "POINT_DATA " << static_cast<long>(f.nx) * f.ny << "\n";
    for (std::size_t k = 0; k < f.channels.size(); ++k) {
        out << "SCALARS " << f.channel_names[k] << " double 1\n"
            << "LOOKUP_TABLE default\n";
        // Stored x-major (x outer); VTK wants x varying fastest.
        for (int j = 0; j < f.ny; ++j) {
            for (int i = 0; i < f.nx; ++i)
                out << fmt(f.channels[k][static_cast<Eigen::Index>(i) * f.ny +
                                         j])
                    << (i + 1 == f.nx ? "" : " ");
            out << "\n";
        }
    }
}

}  // namespace

void export_fields(const FieldExport& fields, ExportFormat format,
                   const std::string& path) {
    fields.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export: cannot write " + path);
    if (format == ExportFormat::csv)
        write_csv(fields, out);
    else
        write_vtk(fields, out);
    if (!out) throw std::runtime_error("export: write failed for " + path);
}

FieldExport import_fields_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import: cannot open " + path);
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("import: empty file " + path);

    FieldExport f;
    {
        std::istringstream hs(header);
        std::string name;
        std::vector<std::string> cols;
        while (std::getline(hs, name, ',')) cols.push_back(name);
        if (cols.size() < 2 || cols[0] != "x" || cols[1] != "y")
            throw std::runtime_error("import: bad header in " + path);
        f.channel_names.assign(cols.begin() + 2, cols.end());
    }

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != f.channel_names.size() + 2)
            throw std::runtime_error("import: ragged row in " + path);
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw std::runtime_error("import: no data rows in " + path);

    // x-major layout: the leading run of equal x values has length ny.
    Eigen::Index ny = 1;
    while (ny < n && rows[static_cast<std::size_t>(ny)][0] == rows[0][0]) ++ny;
    if (n % ny != 0)
        throw std::runtime_error("import: non-rectangular grid in " + path);
    f.ny = static_cast<int>(ny);
    f.nx = static_cast<int>(n / ny);

    f.points.resize(2, n);
    f.channels.assign(f.channel_names.size(), Vector(n));
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& row = rows[static_cast<std::size_t>(c)];
        f.points(0, c) = row[0];
        f.points(1, c) = row[1];
        for (std::size_t k = 0; k < f.channels.size(); ++k)
            f.channels[k][c] = row[k + 2];
    }
    f.validate();
    return f;
}

}  // namespace microelast
