#pragma once

#include <array>
#include <utility>
#include <vector>

#include "crsf/surface.hpp"

namespace crsf {

// nx by ny square grid on the torus; vertex (i, j) has id j*nx + i.
SurfaceGraph make_torus_grid(int nx, int ny);

// n by n torus grid with one hole around the corner of the fundamental
// square. hole_radius 0 removes just the corner face; r >= 1 removes the
// 2r by 2r block of vertices straddling the corner. One puncture splits the
// face with lower-left corner puncture_face along its diagonal.
SurfaceGraph make_holed_torus(int n, int hole_radius, std::pair<int, int> puncture_face);

// Wired planar grid: every missing lattice neighbour becomes an edge to the
// single boundary vertex (id n*n).
SurfaceGraph make_wired_grid(int n);

// Lattice points (i + 1/2, j + 1/2) strictly inside the disc of the given
// radius, wired at the boundary. The origin is the centre of a face.
SurfaceGraph make_wired_disc(double radius);

// Wired planar graph from points, undirected edges and dangling edges to the
// boundary (given by direction). Rotations come from the straight-line
// embedding.
SurfaceGraph make_planar_wired(const std::vector<std::array<double, 2>>& pts,
                               const std::vector<std::pair<int, int>>& links,
                               const std::vector<std::pair<int, std::array<double, 2>>>& to_boundary,
                               const std::vector<double>& link_weights = {},
                               const std::vector<double>& boundary_weights = {});

// Boundary-left -- x -- y -- boundary-right; ids 0 = left, 1 = x, 2 = y, 3 = right.
SurfaceGraph make_chain();

// Ring of n vertices around an annulus, each joined to both boundary
// vertices (ids n inner, n + 1 outer). The ring generates the free group.
SurfaceGraph make_annulus_ring(int n);

}  // namespace crsf
