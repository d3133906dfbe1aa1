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

// Wigner function in the displaced-parity convention
//
//   W(xi) = (2/pi) Tr[rho D(xi) P D(-xi)],   P = (-1)^N,
//
// so W lies in [-2/pi, 2/pi] and integrates to 1 over the plane xi = x + i y.

#ifndef QZD_PHASESPACE_HPP
#define QZD_PHASESPACE_HPP

#include <iosfwd>
#include <string>

#include "qzd/fock.hpp"
#include "qzd/openquantum.hpp"

namespace qzd {

struct GridBounds {
    double x_min = -3.0;
    double x_max = 3.0;
    double y_min = -3.0;
    double y_max = 3.0;
};

/// Square window +-(sqrt(s) + 3).
GridBounds default_bounds(int s);

struct WignerGrid {
    GridBounds bounds;
    int nx = 0;
    int ny = 0;
    /// values(j, i) = W(x(i) + i y(j)); ny rows by nx columns.
    Eigen::MatrixXd values;
    /// Set when W on the perimeter still moves under further zero-padding
    /// at the largest raster dim.
    bool truncation_warning = false;

    double x(int i) const;
    double y(int j) const;
    double dx() const;
    double dy() const;
};

/// The state is zero-padded to enough levels for the displacement by xi
/// (at most 400), so W is that of the state embedded in the full space.
double wigner_point(const FieldState& psi, Complex xi);
double wigner_point(const DensityMatrix& rho, Complex xi);

inline constexpr int kDefaultGridPoints = 121;

// Grids are rastered with the state zero-padded until W on the window
// perimeter is stable (at most 320 levels). The truncated displacement
// operator alone folds amplitude back from the top levels at large |xi|.

WignerGrid wigner_grid(const FieldState& psi, const GridBounds& bounds, int nx = kDefaultGridPoints,
                       int ny = kDefaultGridPoints);
WignerGrid wigner_grid(const DensityMatrix& rho, const GridBounds& bounds, int nx = kDefaultGridPoints,
                       int ny = kDefaultGridPoints);

/// Trapezoid-rule integral of W over the grid.
double integrate(const WignerGrid& grid);

/// `x,y,w` with one row per point, rows of constant y in order of increasing
/// y, 17 significant digits.
void export_csv(const WignerGrid& grid, std::ostream& out);
void export_csv(const WignerGrid& grid, const std::string& path);
WignerGrid import_csv(std::istream& in);
WignerGrid import_csv(const std::string& path);

/// Binary PGM (P5), 8-bit. W maps linearly from [-2/pi, 2/pi] onto [0, 255]
/// with rounding, so W = 0 is 128. The first image row is y_max. The header
/// comments record the bounds.
void export_pgm(const WignerGrid& grid, std::ostream& out);
void export_pgm(const WignerGrid& grid, const std::string& path);

/// Grey level of one value under the PGM map.
unsigned char pgm_level(double w);

}  // namespace qzd

#endif  // QZD_PHASESPACE_HPP
