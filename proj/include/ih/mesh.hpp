#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ih/common.hpp"

namespace ih {

// Boundary edge labels. Files may carry other positive tags; these are the ones
// the solvers care about.
enum BoundaryLabel : int {
    LABEL_OUTER = 1,
    LABEL_GAMMA_IN = 2,
    LABEL_GAMMA_OUT = 3,
};

struct Node {
    double x = 0.0;
    double y = 0.0;
};

struct Triangle {
    std::array<int, 3> node_ids{};  // counter-clockwise after finalize
};

struct BoundaryEdge {
    std::array<int, 2> node_ids{};
    int label = LABEL_OUTER;
};

struct Mesh {
    std::vector<Node> nodes;
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<int> node_labels;  // refs from the file, informational only

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    Vec2 node_pos(int i) const { return {nodes[i].x, nodes[i].y}; }
};

struct MeshStats {
    int n_nodes = 0;
    int n_triangles = 0;
    int n_boundary_edges = 0;
    int n_interior_edges = 0;
    double h_max = 0.0;
    double h_min = 0.0;
    double total_area = 0.0;
    std::map<int, int> boundary_edges_per_label;
};

struct TriangleGeometry {
    double area = 0.0;
    std::array<Vec2, 3> basis_gradients{};  // gradients of the P1 barycentric basis
};

// Quadrature points in barycentric coordinates; weights are relative to the
// element area and sum to 1.
struct QuadraturePoint {
    double l0, l1, l2;
    double weight;
};

struct QuadratureRule {
    int degree = 0;
    std::vector<QuadraturePoint> points;
    int size() const { return static_cast<int>(points.size()); }
};

// Supported degrees: 1 (centroid), 2 (3-point), 4 (6-point symmetric, default).
QuadratureRule quadrature_rule(int degree);

// Orients triangles counter-clockwise, derives/validates boundary edges and
// checks the mesh invariants (conforming, connected, labels present).
// `derive_boundary` adds OUTER-labeled edges for boundary edges that carry no label yet.
void finalize_mesh(Mesh& mesh, bool derive_boundary = true);

// Medit ASCII subset: `Vertices`, `Triangles`, optional `Edges`, `End`.
// 1-based indices in the file, 0-based in memory.
Mesh parse_medit_mesh(std::istream& in);
Mesh parse_medit_mesh(const std::string& text);
std::string write_medit_mesh(const Mesh& mesh);

// Quasi-uniform triangulation of a disk centered at the origin, built from
// concentric rings (6k nodes on ring k). Boundary labeled OUTER.
Mesh generate_disk_mesh(double radius, double target_h, int max_nodes = 2000000);

// Structured triangulation of [0,width] x [0,height] with 2*nx*ny triangles,
// alternating diagonals. Boundary labeled OUTER; with `label_inout` the left
// edge gets GAMMA_IN and the right edge GAMMA_OUT.
Mesh generate_rect_mesh(double width, double height, int nx, int ny, bool label_inout = false);

TriangleGeometry triangle_geometry(const Mesh& mesh, int tri_index);

// Physical quadrature points and weights for one triangle; weights sum to the
// triangle area.
std::vector<std::pair<Vec2, double>> quadrature_points(const QuadratureRule& rule,
                                                       const Mesh& mesh, int tri_index);

MeshStats mesh_stats(const Mesh& mesh);

}  // namespace ih
