// Copyright 2026 The QZD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qzd/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "numfmt.hpp"

namespace qzd {

namespace {

constexpr double kWMax = 2.0 / M_PI;
constexpr int kMaxRasterDim = 320;
constexpr int kDimStep = 40;
constexpr double kNegligibleWeight = 1e-9;
constexpr double kPerimeterTol = 1e-6;
constexpr int kMaxPointDim = 400;

double parity_weighted(const CVector& v) {
    double w = 0.0;
    for (int n = 0; n < v.size(); ++n) w += (n % 2 == 0 ? 1.0 : -1.0) * std::norm(v(n));
    return w;
}

void validate_grid(const GridBounds& b, int nx, int ny) {
    if (nx < 1 || ny < 1) throw Error("wigner grid needs nx, ny >= 1");
    if (!(b.x_max >= b.x_min) || !(b.y_max >= b.y_min)) throw Error("wigner grid bounds are inverted");
}

double window_radius(const GridBounds& b) {
    return std::hypot(std::max(std::abs(b.x_min), std::abs(b.x_max)), std::max(std::abs(b.y_min), std::abs(b.y_max)));
}

CVector pad(const CVector& v, int dim) {
    CVector out = CVector::Zero(dim);
    out.head(v.size()) = v;
    return out;
}

// W of v as given, with the truncated displacement on v's own levels.
double w_unpadded(const CVector& v, Complex xi) { return kWMax * parity_weighted(apply_displacement(-xi, v)); }

// Levels needed to displace anything supported on `dim` levels by |xi|.
int point_dim(int dim, Complex xi) {
    return std::max(dim, std::min(min_truncation_dim(std::sqrt(double(dim)) + std::abs(xi)), kMaxPointDim));
}

// Smallest padded dim, starting from the truncation rule at the window
// corner and growing in kDimStep increments, at which W on the window
// perimeter no longer moves under kDimStep more levels. w(xi, d) evaluates W
// with the state zero-padded to d levels. `stable` reports whether one was
// found below kMaxRasterDim.
template <typename PointW>
int raster_dim(const GridBounds& b, int state_dim, PointW w, bool& stable) {
    const double xs[3] = {b.x_min, 0.5 * (b.x_min + b.x_max), b.x_max};
    const double ys[3] = {b.y_min, 0.5 * (b.y_min + b.y_max), b.y_max};
    auto settled = [&](int d) {
        for (double x : xs) {
            for (double y : ys) {
                if (std::abs(w(Complex(x, y), d) - w(Complex(x, y), d + kDimStep)) > kPerimeterTol) return false;
            }
        }
        return true;
    };
    int dim = std::max(state_dim, std::min(min_truncation_dim(window_radius(b)), kMaxRasterDim));
    while (!(stable = settled(dim)) && dim < kMaxRasterDim) dim = std::min(dim + kDimStep, kMaxRasterDim);
    return dim;
}

// Pure-state raster. D(-i y) D(-x) equals D(-x - i y) up to a phase, so the
// columns D(-x)psi are formed once. D(-i y) = exp(-i y X) with X = a + a^dag =
// Q L Q^T, so Q^T is applied to the columns once and each row is one product.
class Raster {
   public:
    Raster(const WignerGrid& g, int dim) : g_(g), dim_(dim), parity_(dim) {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
        for (int n = 0; n + 1 < dim; ++n) x(n + 1, n) = x(n, n + 1) = std::sqrt(double(n + 1));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x);
        q_ = solver.eigenvectors();
        lambda_ = solver.eigenvalues();
        for (int n = 0; n < dim; ++n) parity_(n) = n % 2 == 0 ? 1.0 : -1.0;
    }

    Eigen::MatrixXd operator()(const CVector& psi) const {
        CMatrix cols(dim_, g_.nx);
        for (int i = 0; i < g_.nx; ++i) cols.col(i) = apply_displacement(Complex(-g_.x(i), 0.0), psi);
        const CMatrix rotated = q_.transpose().cast<Complex>() * cols;
        Eigen::MatrixXd w(g_.ny, g_.nx);
        CVector phases(dim_);
        for (int j = 0; j < g_.ny; ++j) {
            for (int k = 0; k < dim_; ++k) phases(k) = std::polar(1.0, -g_.y(j) * lambda_(k));
            const CMatrix m = phases.asDiagonal() * rotated;
            // Q is real: two real products beat one complex one.
            const Eigen::MatrixXd re = q_ * m.real();
            const Eigen::MatrixXd im = q_ * m.imag();
            w.row(j) = kWMax * (parity_.transpose() * (re.cwiseAbs2() + im.cwiseAbs2()));
        }
        return w;
    }

   private:
    const WignerGrid& g_;
    int dim_;
    Eigen::MatrixXd q_;
    RVector lambda_;
    RVector parity_;
};

WignerGrid empty_grid(const GridBounds& b, int nx, int ny) {
    validate_grid(b, nx, ny);
    WignerGrid g;
    g.bounds = b;
    g.nx = nx;
    g.ny = ny;
    return g;
}

}  // namespace

GridBounds default_bounds(int s) {
    const double r = std::sqrt(double(std::max(s, 0))) + 3.0;
    return GridBounds{-r, r, -r, r};
}

double WignerGrid::x(int i) const { return nx == 1 ? bounds.x_min : bounds.x_min + i * dx(); }
double WignerGrid::y(int j) const { return ny == 1 ? bounds.y_min : bounds.y_min + j * dy(); }
double WignerGrid::dx() const { return nx > 1 ? (bounds.x_max - bounds.x_min) / (nx - 1) : 0.0; }
double WignerGrid::dy() const { return ny > 1 ? (bounds.y_max - bounds.y_min) / (ny - 1) : 0.0; }

double wigner_point(const FieldState& psi, Complex xi) {
    return w_unpadded(pad(psi.amps(), point_dim(psi.dim(), xi)), xi);
}

double wigner_point(const DensityMatrix& rho, Complex xi) {
    const int dim = point_dim(rho.dim(), xi);
    CMatrix padded = CMatrix::Zero(dim, dim);
    padded.topLeftCorner(rho.dim(), rho.dim()) = rho.mat();
    const CMatrix d = displacement_op(-xi, dim).mat();
    const CMatrix m = d * padded * d.adjoint();
    double w = 0.0;
    for (int n = 0; n < dim; ++n) w += (n % 2 == 0 ? 1.0 : -1.0) * m(n, n).real();
    return kWMax * w;
}

WignerGrid wigner_grid(const FieldState& psi, const GridBounds& bounds, int nx, int ny) {
    WignerGrid g = empty_grid(bounds, nx, ny);
    bool stable = false;
    const int dim = raster_dim(bounds, psi.dim(), [&](Complex xi, int d) {
        return w_unpadded(pad(psi.amps(), d), xi);
    }, stable);
    g.values = Raster(g, dim)(pad(psi.amps(), dim));
    g.truncation_warning = !stable;
    return g;
}

WignerGrid wigner_grid(const DensityMatrix& rho, const GridBounds& bounds, int nx, int ny) {
    WignerGrid g = empty_grid(bounds, nx, ny);
    const CMatrix herm = 0.5 * (rho.mat() + rho.mat().adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
    // |W_k| <= 2/pi, so dropping eigenvectors whose |lambda| sum stays below
    // kNegligibleWeight moves W by less than that.
    std::vector<int> order(rho.dim());
    for (int k = 0; k < rho.dim(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(solver.eigenvalues()(a)) < std::abs(solver.eigenvalues()(b));
    });
    std::vector<std::pair<double, CVector>> parts;
    double dropped = 0.0;
    for (int k : order) {
        const double lam = solver.eigenvalues()(k);
        if (dropped + std::abs(lam) < kNegligibleWeight) {
            dropped += std::abs(lam);
        } else {
            parts.emplace_back(lam, solver.eigenvectors().col(k));
        }
    }
    bool stable = false;
    const int dim = raster_dim(bounds, rho.dim(), [&](Complex xi, int d) {
        double w = 0.0;
        for (const auto& [lam, v] : parts) w += lam * w_unpadded(pad(v, d), xi);
        return w;
    }, stable);
    const Raster raster(g, dim);
    g.values = Eigen::MatrixXd::Zero(ny, nx);
    for (const auto& [lam, v] : parts) g.values += lam * raster(pad(v, dim));
    g.truncation_warning = !stable;
    return g;
}

double integrate(const WignerGrid& grid) {
    if (grid.nx < 2 || grid.ny < 2) throw Error("integrate: grid needs at least 2 x 2 points");
    double sum = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        const double wy = (j == 0 || j == grid.ny - 1) ? 0.5 : 1.0;
        for (int i = 0; i < grid.nx; ++i) {
            const double wx = (i == 0 || i == grid.nx - 1) ? 0.5 : 1.0;
            sum += wx * wy * grid.values(j, i);
        }
    }
    return sum * grid.dx() * grid.dy();
}

void export_csv(const WignerGrid& grid, std::ostream& out) {
    out << "x,y,w\n";
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            out << internal::fmt17(grid.x(i)) << ',' << internal::fmt17(grid.y(j)) << ','
                << internal::fmt17(grid.values(j, i)) << '\n';
        }
    }
}

void export_csv(const WignerGrid& grid, const std::string& path) {
    auto out = internal::open_output(path);
    export_csv(grid, out);
    internal::finish_output(out, path);
}

WignerGrid import_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "x,y,w") throw Error("wigner csv: expected header 'x,y,w'");
    std::vector<double> xs, ys, ws;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string f[3];
        for (auto& field : f) {
            if (!std::getline(row, field, ',')) throw Error("wigner csv: malformed row '" + line + "'");
        }
        double v[3];
        for (int k = 0; k < 3; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(f[k].c_str(), &end);
            if (end == f[k].c_str() || *end != '\0') throw Error("wigner csv: bad number '" + f[k] + "'");
        }
        xs.push_back(v[0]);
        ys.push_back(v[1]);
        ws.push_back(v[2]);
    }
    if (ws.empty()) throw Error("wigner csv: no data rows");
    int nx = 1;
    while (nx < static_cast<int>(ys.size()) && ys[nx] == ys[0]) ++nx;
    if (ws.size() % nx != 0) throw Error("wigner csv: row count is not a multiple of the row length");
    const int ny = static_cast<int>(ws.size()) / nx;
    WignerGrid g = empty_grid(GridBounds{xs.front(), xs[nx - 1], ys.front(), ys.back()}, nx, ny);
    g.values.resize(ny, nx);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) g.values(j, i) = ws[std::size_t(j) * nx + i];
    }
    return g;
}

WignerGrid import_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    return import_csv(in);
}

unsigned char pgm_level(double w) {
    const double t = (w + kWMax) / (2.0 * kWMax);
    const double level = std::clamp(std::round(255.0 * t), 0.0, 255.0);
    return static_cast<unsigned char>(level);
}

void export_pgm(const WignerGrid& grid, std::ostream& out) {
    out << "P5\n"
        << "# wigner x_min=" << internal::fmt17(grid.bounds.x_min) << " x_max=" << internal::fmt17(grid.bounds.x_max)
        << '\n'
        << "# wigner y_min=" << internal::fmt17(grid.bounds.y_min) << " y_max=" << internal::fmt17(grid.bounds.y_max)
        << '\n'
        << "# levels 0..255 map W linearly from -2/pi to 2/pi; first row is y_max\n"
        << grid.nx << ' ' << grid.ny << "\n255\n";
    std::vector<char> row(grid.nx);
    for (int j = grid.ny - 1; j >= 0; --j) {
        for (int i = 0; i < grid.nx; ++i) row[i] = static_cast<char>(pgm_level(grid.values(j, i)));
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

void export_pgm(const WignerGrid& grid, const std::string& path) {
    auto out = internal::open_output(path, true);
    export_pgm(grid, out);
    internal::finish_output(out, path);
}

}  // namespace qzd
