#include "microelast/image.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace microelast {

namespace {

[[noreturn]] void pgm_fault(const std::string& path, std::streamoff offset,
                            const std::string& what) {
    std::ostringstream os;
    os << "pgm: " << path << ": " << what << " at byte offset " << offset;
    throw std::runtime_error(os.str());
}

/// Next token, skipping whitespace and '#' comment lines.
std::string pgm_token(std::istream& in, const std::string& path) {
    for (;;) {
        int c = in.peek();
        if (c == EOF) pgm_fault(path, in.tellg(), "unexpected end of header");
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    std::string tok;
    in >> tok;
    return tok;
}

int pgm_int(std::istream& in, const std::string& path) {
    const std::streamoff at = in.tellg();
    const std::string tok = pgm_token(in, path);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        pgm_fault(path, at, "expected integer, got '" + tok + "'");
    }
}

int reflect(int i, int n) {
    // Symmetric reflection: -1 -> 0, n -> n-1.
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

}  // namespace

VoxelGrid load_grayscale_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pgm: cannot open " + path);

    std::string magic = pgm_token(in, path);
    if (magic != "P2" && magic != "P5")
        pgm_fault(path, 0, "bad magic '" + magic + "' (want P2 or P5)");
    const int width = pgm_int(in, path);
    const int height = pgm_int(in, path);
    const int maxval = pgm_int(in, path);
    if (width < 1 || height < 1)
        pgm_fault(path, in.tellg(), "non-positive dimensions");
    if (maxval < 1 || maxval > 65535)
        pgm_fault(path, in.tellg(), "maxval out of range [1, 65535]");

    VoxelGrid grid;
    grid.width = width;
    grid.height = height;
    grid.values.resize(static_cast<std::size_t>(width) * height);

    if (magic == "P2") {
        for (std::size_t i = 0; i < grid.values.size(); ++i) {
            const int v = pgm_int(in, path);
            if (v < 0 || v > maxval)
                pgm_fault(path, in.tellg(), "sample out of range");
            grid.values[i] = static_cast<double>(v) / maxval;
        }
    } else {
        // Exactly one whitespace byte separates maxval from the payload.
        const int sep = in.get();
        if (sep == EOF || !std::isspace(sep))
            pgm_fault(path, in.tellg(), "missing payload separator");
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> buf(grid.values.size() *
                                       static_cast<std::size_t>(bytes));
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            pgm_fault(path,
                      static_cast<std::streamoff>(in.tellg()) < 0
                          ? static_cast<std::streamoff>(0)
                          : static_cast<std::streamoff>(in.tellg()),
                      "truncated payload");
        for (std::size_t i = 0; i < grid.values.size(); ++i) {
            int v;
            if (bytes == 1) {
                v = buf[i];
            } else {
                v = (static_cast<int>(buf[2 * i]) << 8) | buf[2 * i + 1];
            }
            if (v > maxval) pgm_fault(path, in.tellg(), "sample > maxval");
            grid.values[i] = static_cast<double>(v) / maxval;
        }
    }
    return grid;
}

void save_pgm(const VoxelGrid& grid, const std::string& path, bool binary,
              int maxval) {
    if (maxval < 1 || maxval > 255)
        throw std::invalid_argument("save_pgm: maxval in [1, 255]");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("pgm: cannot write " + path);
    out << (binary ? "P5" : "P2") << "\n"
        << grid.width << " " << grid.height << "\n"
        << maxval << "\n";
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        const int v = static_cast<int>(
            std::lround(std::clamp(grid.values[i], 0.0, 1.0) * maxval));
        if (binary) {
            out.put(static_cast<char>(v));
        } else {
            out << v << ((i + 1) % static_cast<std::size_t>(grid.width) == 0
                             ? "\n"
                             : " ");
        }
    }
    if (!out) throw std::runtime_error("pgm: write failed for " + path);
}

VoxelGrid gaussian_filter(const VoxelGrid& grid, double sigma_px) {
    if (sigma_px <= 0.0)
        throw std::invalid_argument("gaussian_filter: sigma > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
    std::vector<double> kernel(2 * static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k + radius)] =
            std::exp(-0.5 * k * k / (sigma_px * sigma_px));
        sum += kernel[static_cast<std::size_t>(k + radius)];
    }
    for (double& w : kernel) w /= sum;

    VoxelGrid tmp = grid, out = grid;
    // Horizontal pass.
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       grid.at(r, reflect(c + k, grid.width));
            tmp.at(r, c) = acc;
        }
    // Vertical pass.
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       tmp.at(reflect(r + k, grid.height), c);
            out.at(r, c) = std::clamp(acc, 0.0, 1.0);
        }
    return out;
}

VoxelGrid binarize(const VoxelGrid& grid, double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0)
        throw std::invalid_argument("binarize: threshold in (0, 1)");
    VoxelGrid out = grid;
    for (double& v : out.values) v = v >= threshold ? 1.0 : 0.0;
    return out;
}

VoxelGrid synthetic_fiber_grid(const FiberFixtureOptions& opts) {
    if (opts.width < 1 || opts.height < 1 || opts.n_fibers < 0)
        throw std::invalid_argument("fiber fixture: bad dimensions");
    VoxelGrid grid;
    grid.width = opts.width;
    grid.height = opts.height;
    grid.values.assign(static_cast<std::size_t>(opts.width) * opts.height,
                       0.0);

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ux(0.0, opts.width);
    std::uniform_real_distribution<double> uy(0.0, opts.height);
    std::uniform_real_distribution<double> uang(0.0, M_PI);
    std::uniform_real_distribution<double> ulen(opts.min_length_px,
                                                opts.max_length_px);
    for (int f = 0; f < opts.n_fibers; ++f) {
        const double cx = ux(rng), cy = uy(rng);
        const double ang = uang(rng), len = ulen(rng);
        const Eigen::Vector2d d(std::cos(ang), std::sin(ang));
        const Eigen::Vector2d p0 =
            Eigen::Vector2d(cx, cy) - 0.5 * len * d;
        const Eigen::Vector2d p1 =
            Eigen::Vector2d(cx, cy) + 0.5 * len * d;
        for (int r = 0; r < opts.height; ++r) {
            for (int c = 0; c < opts.width; ++c) {
                const Eigen::Vector2d p(c + 0.5, r + 0.5);
                const Eigen::Vector2d ab = p1 - p0;
                const double t = std::clamp(
                    (p - p0).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
                if ((p - (p0 + t * ab)).norm() <= opts.thickness_px)
                    grid.at(r, c) = 1.0;
            }
        }
    }
    return grid;
}

}  // namespace microelast
