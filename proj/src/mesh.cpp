#include "ih/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace ih {

namespace {

double signed_area(const Mesh& m, const Triangle& t) {
    Vec2 a = m.node_pos(t.node_ids[0]);
    Vec2 b = m.node_pos(t.node_ids[1]);
    Vec2 c = m.node_pos(t.node_ids[2]);
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::pair<int, int> sorted_edge(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// Undirected edge -> number of adjacent triangles (and one adjacent triangle id).
std::map<std::pair<int, int>, std::pair<int, int>> edge_incidence(const Mesh& m) {
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    for (int ti = 0; ti < m.n_triangles(); ++ti) {
        const auto& ids = m.triangles[ti].node_ids;
        for (int k = 0; k < 3; ++k) {
            auto key = sorted_edge(ids[k], ids[(k + 1) % 3]);
            auto it = edges.find(key);
            if (it == edges.end())
                edges.emplace(key, std::make_pair(1, ti));
            else
                it->second.first += 1;
        }
    }
    return edges;
}

}  // namespace

QuadratureRule quadrature_rule(int degree) {
    QuadratureRule rule;
    rule.degree = degree;
    switch (degree) {
        case 1:
            rule.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0}};
            return rule;
        case 2: {
            const double a = 2.0 / 3.0, b = 1.0 / 6.0, w = 1.0 / 3.0;
            rule.points = {{a, b, b, w}, {b, a, b, w}, {b, b, a, w}};
            return rule;
        }
        case 4: {
            // 6-point symmetric rule, exact through degree 4
            const double a1 = 0.445948490915965;
            const double w1 = 0.223381589678011;
            const double a2 = 0.091576213509771;
            const double w2 = 0.109951743655322;
            rule.points = {{1 - 2 * a1, a1, a1, w1}, {a1, 1 - 2 * a1, a1, w1},
                           {a1, a1, 1 - 2 * a1, w1}, {1 - 2 * a2, a2, a2, w2},
                           {a2, 1 - 2 * a2, a2, w2}, {a2, a2, 1 - 2 * a2, w2}};
            return rule;
        }
        default:
            throw ValidationError("quadrature_rule: unsupported degree " + std::to_string(degree) +
                                  " (available: 1, 2, 4)");
    }
}

void finalize_mesh(Mesh& mesh, bool derive_boundary) {
    const int n = mesh.n_nodes();
    if (n < 3) throw ValidationError("mesh: fewer than 3 nodes");
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(mesh.nodes[i].x) || !std::isfinite(mesh.nodes[i].y))
            throw ValidationError("mesh: non-finite coordinate at node " + std::to_string(i));
    }
    if (mesh.triangles.empty()) throw ValidationError("mesh: no triangles");

    for (size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        auto& t = mesh.triangles[ti];
        for (int id : t.node_ids) {
            if (id < 0 || id >= n)
                throw ValidationError("mesh: triangle " + std::to_string(ti) +
                                      " references node " + std::to_string(id + 1) +
                                      " out of range");
        }
        if (t.node_ids[0] == t.node_ids[1] || t.node_ids[1] == t.node_ids[2] ||
            t.node_ids[0] == t.node_ids[2])
            throw ValidationError("mesh: triangle " + std::to_string(ti) + " has repeated nodes");
        double area = signed_area(mesh, t);
        if (area < 0.0) {
            std::swap(t.node_ids[1], t.node_ids[2]);
            area = -area;
        }
        if (!(area > 0.0))
            throw ValidationError("mesh: degenerate triangle " + std::to_string(ti));
    }

    auto edges = edge_incidence(mesh);
    for (const auto& [key, inc] : edges) {
        if (inc.first > 2)
            throw ValidationError("mesh: non-conforming, edge (" + std::to_string(key.first + 1) +
                                  "," + std::to_string(key.second + 1) + ") shared by " +
                                  std::to_string(inc.first) + " triangles");
    }

    // connectivity: BFS over shared edges
    std::vector<int> comp(mesh.n_triangles(), -1);
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int ti = 0; ti < mesh.n_triangles(); ++ti) {
        const auto& ids = mesh.triangles[ti].node_ids;
        for (int k = 0; k < 3; ++k)
            edge_tris[sorted_edge(ids[k], ids[(k + 1) % 3])].push_back(ti);
    }
    std::vector<int> stack = {0};
    comp[0] = 0;
    while (!stack.empty()) {
        int ti = stack.back();
        stack.pop_back();
        const auto& ids = mesh.triangles[ti].node_ids;
        for (int k = 0; k < 3; ++k) {
            for (int other : edge_tris[sorted_edge(ids[k], ids[(k + 1) % 3])]) {
                if (comp[other] < 0) {
                    comp[other] = 0;
                    stack.push_back(other);
                }
            }
        }
    }
    if (std::count(comp.begin(), comp.end(), -1) > 0)
        throw ValidationError("mesh: triangulation is not connected");

    // validate given boundary edges, derive missing ones
    std::set<std::pair<int, int>> labeled;
    for (size_t ei = 0; ei < mesh.boundary_edges.size(); ++ei) {
        auto& e = mesh.boundary_edges[ei];
        for (int id : e.node_ids) {
            if (id < 0 || id >= n)
                throw ValidationError("mesh: boundary edge " + std::to_string(ei) +
                                      " references node " + std::to_string(id + 1) +
                                      " out of range");
        }
        auto key = sorted_edge(e.node_ids[0], e.node_ids[1]);
        auto it = edges.find(key);
        if (it == edges.end() || it->second.first != 1)
            throw ValidationError("mesh: listed edge (" + std::to_string(key.first + 1) + "," +
                                  std::to_string(key.second + 1) + ") is not a boundary edge");
        labeled.insert(key);
    }
    if (derive_boundary) {
        for (const auto& [key, inc] : edges) {
            if (inc.first == 1 && labeled.find(key) == labeled.end())
                mesh.boundary_edges.push_back({{key.first, key.second}, LABEL_OUTER});
        }
    }
    if (mesh.node_labels.empty()) mesh.node_labels.assign(n, 0);
}

// ---------------------------------------------------------------------------
// Medit ASCII I/O
// ---------------------------------------------------------------------------

namespace {

struct LineReader {
    std::istream& in;
    int line_no = 0;
    bool next(std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            size_t pos = out.find('#');
            if (pos != std::string::npos) out.erase(pos);
            bool blank = out.find_first_not_of(" \t\r\n") == std::string::npos;
            if (!blank) return true;
        }
        return false;
    }
};

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw ValidationError("medit parse error at line " + std::to_string(line) + ": " + what);
}

}  // namespace

Mesh parse_medit_mesh(std::istream& in) {
    Mesh mesh;
    LineReader reader{in};
    std::string line;
    bool saw_vertices = false, saw_triangles = false;

    while (reader.next(line)) {
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "MeshVersionFormatted" || keyword == "Dimension") {
            // may carry the value on the same or the following line
            int value;
            if (!(ls >> value)) {
                if (!reader.next(line)) parse_fail(reader.line_no, "missing value after " + keyword);
                std::istringstream vs(line);
                if (!(vs >> value)) parse_fail(reader.line_no, "bad value after " + keyword);
            }
            if (keyword == "Dimension" && value != 2)
                parse_fail(reader.line_no, "only Dimension 2 is supported");
        } else if (keyword == "Vertices") {
            int count;
            if (!(ls >> count)) {
                if (!reader.next(line)) parse_fail(reader.line_no, "missing vertex count");
                std::istringstream vs(line);
                if (!(vs >> count)) parse_fail(reader.line_no, "bad vertex count");
            }
            if (count <= 0) parse_fail(reader.line_no, "vertex count must be positive");
            mesh.nodes.reserve(count);
            mesh.node_labels.reserve(count);
            for (int i = 0; i < count; ++i) {
                if (!reader.next(line)) parse_fail(reader.line_no, "truncated Vertices section");
                std::istringstream vs(line);
                double x, y;
                int ref = 0;
                if (!(vs >> x >> y)) parse_fail(reader.line_no, "expected `x y [ref]`");
                vs >> ref;
                mesh.nodes.push_back({x, y});
                mesh.node_labels.push_back(ref);
            }
            saw_vertices = true;
        } else if (keyword == "Triangles") {
            int count;
            if (!(ls >> count)) {
                if (!reader.next(line)) parse_fail(reader.line_no, "missing triangle count");
                std::istringstream vs(line);
                if (!(vs >> count)) parse_fail(reader.line_no, "bad triangle count");
            }
            if (count <= 0) parse_fail(reader.line_no, "triangle count must be positive");
            mesh.triangles.reserve(count);
            for (int i = 0; i < count; ++i) {
                if (!reader.next(line)) parse_fail(reader.line_no, "truncated Triangles section");
                std::istringstream vs(line);
                int a, b, c, ref = 0;
                if (!(vs >> a >> b >> c)) parse_fail(reader.line_no, "expected `i j k [ref]`");
                vs >> ref;
                mesh.triangles.push_back({{a - 1, b - 1, c - 1}});
            }
            saw_triangles = true;
        } else if (keyword == "Edges") {
            int count;
            if (!(ls >> count)) {
                if (!reader.next(line)) parse_fail(reader.line_no, "missing edge count");
                std::istringstream vs(line);
                if (!(vs >> count)) parse_fail(reader.line_no, "bad edge count");
            }
            mesh.boundary_edges.reserve(count);
            for (int i = 0; i < count; ++i) {
                if (!reader.next(line)) parse_fail(reader.line_no, "truncated Edges section");
                std::istringstream vs(line);
                int a, b, ref = 0;
                if (!(vs >> a >> b)) parse_fail(reader.line_no, "expected `i j [ref]`");
                vs >> ref;
                mesh.boundary_edges.push_back({{a - 1, b - 1}, ref});
            }
        } else if (keyword == "End") {
            break;
        } else {
            parse_fail(reader.line_no, "unknown section `" + keyword + "`");
        }
    }
    if (!saw_vertices) throw ValidationError("medit parse error: missing Vertices section");
    if (!saw_triangles) throw ValidationError("medit parse error: missing Triangles section");

    try {
        finalize_mesh(mesh);
    } catch (const ValidationError& err) {
        throw ValidationError(std::string("medit mesh invalid: ") + err.what());
    }
    return mesh;
}

Mesh parse_medit_mesh(const std::string& text) {
    std::istringstream in(text);
    return parse_medit_mesh(in);
}

std::string write_medit_mesh(const Mesh& mesh) {
    std::ostringstream out;
    out.precision(17);
    out << "MeshVersionFormatted 2\nDimension 2\n";
    out << "Vertices " << mesh.n_nodes() << "\n";
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        int ref = i < static_cast<int>(mesh.node_labels.size()) ? mesh.node_labels[i] : 0;
        out << mesh.nodes[i].x << " " << mesh.nodes[i].y << " " << ref << "\n";
    }
    out << "Triangles " << mesh.n_triangles() << "\n";
    for (const auto& t : mesh.triangles)
        out << t.node_ids[0] + 1 << " " << t.node_ids[1] + 1 << " " << t.node_ids[2] + 1 << " 0\n";
    out << "Edges " << mesh.boundary_edges.size() << "\n";
    for (const auto& e : mesh.boundary_edges)
        out << e.node_ids[0] + 1 << " " << e.node_ids[1] + 1 << " " << e.label << "\n";
    out << "End\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

Mesh generate_disk_mesh(double radius, double target_h, int max_nodes) {
    if (!(radius > 0.0)) throw ValidationError("generate_disk_mesh: radius must be positive");
    if (!(target_h > 0.0 && target_h < radius))
        throw ValidationError("generate_disk_mesh: need 0 < target_h < radius");

    const int n_rings = std::max(1, static_cast<int>(std::ceil(radius / target_h)));
    const std::int64_t node_count = 1 + 3LL * n_rings * (n_rings + 1);
    if (node_count > max_nodes)
        throw ValidationError("generate_disk_mesh: " + std::to_string(node_count) +
                              " nodes exceed the cap of " + std::to_string(max_nodes));

    Mesh mesh;
    mesh.nodes.reserve(static_cast<size_t>(node_count));
    mesh.nodes.push_back({0.0, 0.0});
    std::vector<int> ring_start = {0};  // start index of each ring (ring 0 = center)
    const double dr = radius / n_rings;
    for (int k = 1; k <= n_rings; ++k) {
        ring_start.push_back(mesh.n_nodes());
        const int m = 6 * k;
        const double r = k * dr;
        for (int j = 0; j < m; ++j) {
            const double theta = 2.0 * 3.14159265358979323846 * j / m;
            mesh.nodes.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }

    auto outer_node = [&](int ring, int j) {
        const int m = 6 * ring;
        return ring_start[ring] + ((j % m) + m) % m;
    };

    mesh.triangles.reserve(6LL * n_rings * n_rings);
    // ring 1: fan around the center
    for (int j = 0; j < 6; ++j)
        mesh.triangles.push_back({{outer_node(1, j), outer_node(1, j + 1), 0}});
    // ring bands: zigzag between ring k-1 (6(k-1) nodes) and ring k (6k nodes)
    for (int k = 2; k <= n_rings; ++k) {
        for (int s = 0; s < 6; ++s) {
            int a = 0;           // outer edge progress within sector, 0..k
            int b = 0;           // inner edge progress within sector, 0..k-1
            const int oi = s * k;        // first outer node of sector
            const int ii = s * (k - 1);  // first inner node of sector
            while (a < k || b < k - 1) {
                bool advance_outer;
                if (a == k)
                    advance_outer = false;
                else if (b == k - 1)
                    advance_outer = true;
                else
                    advance_outer = (a + 1) * (k - 1) <= (b + 1) * k;
                if (advance_outer) {
                    mesh.triangles.push_back(
                        {{outer_node(k, oi + a), outer_node(k, oi + a + 1), outer_node(k - 1, ii + b)}});
                    ++a;
                } else {
                    mesh.triangles.push_back(
                        {{outer_node(k, oi + a), outer_node(k - 1, ii + b + 1), outer_node(k - 1, ii + b)}});
                    ++b;
                }
            }
        }
    }

    const int m_outer = 6 * n_rings;
    for (int j = 0; j < m_outer; ++j)
        mesh.boundary_edges.push_back({{outer_node(n_rings, j), outer_node(n_rings, j + 1)}, LABEL_OUTER});

    finalize_mesh(mesh, /*derive_boundary=*/false);
    return mesh;
}

Mesh generate_rect_mesh(double width, double height, int nx, int ny, bool label_inout) {
    if (!(width > 0.0 && height > 0.0))
        throw ValidationError("generate_rect_mesh: dimensions must be positive");
    if (nx < 1 || ny < 1) throw ValidationError("generate_rect_mesh: need nx, ny >= 1");

    Mesh mesh;
    const int npx = nx + 1, npy = ny + 1;
    mesh.nodes.reserve(static_cast<size_t>(npx) * npy);
    for (int j = 0; j < npy; ++j)
        for (int i = 0; i < npx; ++i)
            mesh.nodes.push_back({width * i / nx, height * j / ny});

    auto vid = [&](int i, int j) { return j * npx + i; };

    mesh.triangles.reserve(2LL * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                mesh.triangles.push_back({{v00, v10, v11}});
                mesh.triangles.push_back({{v00, v11, v01}});
            } else {
                mesh.triangles.push_back({{v00, v10, v01}});
                mesh.triangles.push_back({{v10, v11, v01}});
            }
        }
    }

    const int left = label_inout ? LABEL_GAMMA_IN : LABEL_OUTER;
    const int right = label_inout ? LABEL_GAMMA_OUT : LABEL_OUTER;
    for (int i = 0; i < nx; ++i) {
        mesh.boundary_edges.push_back({{vid(i, 0), vid(i + 1, 0)}, LABEL_OUTER});
        mesh.boundary_edges.push_back({{vid(i, ny), vid(i + 1, ny)}, LABEL_OUTER});
    }
    for (int j = 0; j < ny; ++j) {
        mesh.boundary_edges.push_back({{vid(0, j), vid(0, j + 1)}, left});
        mesh.boundary_edges.push_back({{vid(nx, j), vid(nx, j + 1)}, right});
    }

    finalize_mesh(mesh, /*derive_boundary=*/false);
    return mesh;
}

// ---------------------------------------------------------------------------
// Element geometry and quadrature
// ---------------------------------------------------------------------------

TriangleGeometry triangle_geometry(const Mesh& mesh, int tri_index) {
    if (tri_index < 0 || tri_index >= mesh.n_triangles())
        throw ValidationError("triangle_geometry: index out of range");
    const auto& t = mesh.triangles[tri_index];
    const Vec2 p0 = mesh.node_pos(t.node_ids[0]);
    const Vec2 p1 = mesh.node_pos(t.node_ids[1]);
    const Vec2 p2 = mesh.node_pos(t.node_ids[2]);
    const double twice_area = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    if (!(twice_area > 0.0))
        throw ValidationError("triangle_geometry: degenerate triangle " + std::to_string(tri_index));
    TriangleGeometry g;
    g.area = 0.5 * twice_area;
    g.basis_gradients[0] = {(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area};
    g.basis_gradients[1] = {(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area};
    g.basis_gradients[2] = {(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area};
    return g;
}

std::vector<std::pair<Vec2, double>> quadrature_points(const QuadratureRule& rule,
                                                       const Mesh& mesh, int tri_index) {
    const auto& t = mesh.triangles[tri_index];
    const Vec2 p0 = mesh.node_pos(t.node_ids[0]);
    const Vec2 p1 = mesh.node_pos(t.node_ids[1]);
    const Vec2 p2 = mesh.node_pos(t.node_ids[2]);
    const double area = triangle_geometry(mesh, tri_index).area;
    std::vector<std::pair<Vec2, double>> out;
    out.reserve(rule.points.size());
    for (const auto& q : rule.points)
        out.emplace_back(Vec2{q.l0 * p0.x + q.l1 * p1.x + q.l2 * p2.x,
                              q.l0 * p0.y + q.l1 * p1.y + q.l2 * p2.y},
                         q.weight * area);
    return out;
}

MeshStats mesh_stats(const Mesh& mesh) {
    MeshStats s;
    s.n_nodes = mesh.n_nodes();
    s.n_triangles = mesh.n_triangles();
    s.n_boundary_edges = static_cast<int>(mesh.boundary_edges.size());
    auto edges = edge_incidence(mesh);
    s.h_min = 1e300;
    for (const auto& [key, inc] : edges) {
        if (inc.first == 1) continue;
        ++s.n_interior_edges;
    }
    for (const auto& [key, inc] : edges) {
        const Vec2 d = mesh.node_pos(key.first) - mesh.node_pos(key.second);
        const double len = d.norm();
        s.h_max = std::max(s.h_max, len);
        s.h_min = std::min(s.h_min, len);
    }
    for (int ti = 0; ti < mesh.n_triangles(); ++ti)
        s.total_area += triangle_geometry(mesh, ti).area;
    for (const auto& e : mesh.boundary_edges) s.boundary_edges_per_label[e.label]++;
    return s;
}

}  // namespace ih
