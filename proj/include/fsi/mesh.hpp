/**
 * @file mesh.hpp
 * @brief Structured triangulations of the fluid and structure rectangles.
 *
 * Coordinates are (z, r). Each rectangle is an nx-by-ny grid of quads split
 * into two straight-sided triangles with alternating diagonals. Fields are
 * quadratic, so every triangle carries six nodes; the node set is the
 * (2nx+1)-by-(2ny+1) lattice of the once-refined grid and node (i, j) has
 * index i*(2ny+1)+j. Geometry stays piecewise linear: a midpoint node always
 * sits at the average of its two parent vertices.
 */
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "params.hpp"

namespace fsi {

struct Vec2 {
    double z = 0.0;
    double r = 0.0;
};

enum class Tag { Inlet, Outlet, Symmetry, Interface, External, StructureEnd };

inline const char* tag_name(Tag t) {
    switch (t) {
        case Tag::Inlet: return "inlet";
        case Tag::Outlet: return "outlet";
        case Tag::Symmetry: return "symmetry";
        case Tag::Interface: return "interface";
        case Tag::External: return "external";
        case Tag::StructureEnd: return "structure_end";
    }
    return "?";
}

/// Counter-clockwise boundary edge: vertex nodes a -> b and the midpoint node.
struct BoundaryEdge {
    int a = 0;
    int b = 0;
    int mid = 0;
    int tri = 0;
    Tag tag = Tag::Inlet;
};

/// Thrown when a moved mesh would contain a non-positive triangle.
class InvertedElement : public std::runtime_error {
public:
    int triangle;
    InvertedElement(int tri, double area)
        : std::runtime_error("inverted element: triangle " + std::to_string(tri) +
                             " has area " + std::to_string(area)),
          triangle(tri) {}
};

/// One rectangle. Local triangle order is v0, v1, v2, m01, m12, m20.
struct SubMesh {
    int nx = 0;
    int ny = 0;
    double z0 = 0.0, z1 = 0.0, r0 = 0.0, r1 = 0.0;
    std::vector<Vec2> ref;                     ///< reference node coordinates
    std::vector<std::array<int, 6>> tris;
    std::vector<std::array<int, 3>> tri_vertices;   ///< P1 vertex indices per triangle
    std::vector<int> vertex_of_node;           ///< -1 for midpoint nodes
    std::vector<int> node_of_vertex;
    std::vector<std::array<int, 2>> parents;   ///< vertex parents of each node (equal for vertices)
    std::vector<BoundaryEdge> edges;

    int ni() const { return 2 * nx + 1; }
    int nj() const { return 2 * ny + 1; }
    int node(int i, int j) const { return i * nj() + j; }
    int vertex(int I, int J) const { return I * (ny + 1) + J; }
    int num_nodes() const { return static_cast<int>(ref.size()); }
    int num_vertices() const { return (nx + 1) * (ny + 1); }
    int num_tris() const { return static_cast<int>(tris.size()); }
};

namespace detail {

inline double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.z - a.z) * (c.r - a.r) - (c.z - a.z) * (b.r - a.r));
}

inline SubMesh build_rect(int nx, int ny, double z0, double z1, double r0, double r1,
                          Tag bottom, Tag top, Tag left, Tag right) {
    SubMesh m;
    m.nx = nx;
    m.ny = ny;
    m.z0 = z0;
    m.z1 = z1;
    m.r0 = r0;
    m.r1 = r1;
    const int ni = m.ni(), nj = m.nj();
    m.ref.resize(static_cast<std::size_t>(ni) * nj);
    m.vertex_of_node.assign(m.ref.size(), -1);
    m.node_of_vertex.resize(static_cast<std::size_t>(m.num_vertices()));
    m.parents.resize(m.ref.size());
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j) {
            const int n = m.node(i, j);
            m.ref[n] = {z0 + (z1 - z0) * i / (2.0 * nx), r0 + (r1 - r0) * j / (2.0 * ny)};
            if (i % 2 == 0 && j % 2 == 0) {
                const int v = m.vertex(i / 2, j / 2);
                m.vertex_of_node[n] = v;
                m.node_of_vertex[v] = n;
            }
        }
    auto mid = [&](int a, int b) {
        const int ia = a / nj, ja = a % nj, ib = b / nj, jb = b % nj;
        const int c = m.node((ia + ib) / 2, (ja + jb) / 2);
        m.parents[c] = {a, b};
        return c;
    };
    for (int n = 0; n < m.num_nodes(); ++n)
        if (m.vertex_of_node[n] >= 0) m.parents[n] = {n, n};
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < ny; ++b) {
            const int n00 = m.node(2 * a, 2 * b), n10 = m.node(2 * a + 2, 2 * b);
            const int n01 = m.node(2 * a, 2 * b + 2), n11 = m.node(2 * a + 2, 2 * b + 2);
            auto add = [&](int p, int q, int s) {
                m.tris.push_back({p, q, s, mid(p, q), mid(q, s), mid(s, p)});
                m.tri_vertices.push_back({m.vertex_of_node[p], m.vertex_of_node[q], m.vertex_of_node[s]});
            };
            if ((a + b) % 2 == 0) {
                add(n00, n10, n11);
                add(n00, n11, n01);
            } else {
                add(n00, n10, n01);
                add(n10, n11, n01);
            }
        }
    // Boundary edges, counter-clockwise around the rectangle.
    auto owner = [&](int a, int b) {
        for (int t = 0; t < m.num_tris(); ++t) {
            const auto& T = m.tris[t];
            for (int k = 0; k < 3; ++k)
                if (T[k] == a && T[(k + 1) % 3] == b) return t;
        }
        throw std::logic_error("boundary edge without owner");
    };
    auto add_edge = [&](int a, int b, Tag tag) {
        const int ia = a / nj, ja = a % nj, ib = b / nj, jb = b % nj;
        m.edges.push_back({a, b, m.node((ia + ib) / 2, (ja + jb) / 2), owner(a, b), tag});
    };
    for (int a = 0; a < nx; ++a) add_edge(m.node(2 * a, 0), m.node(2 * a + 2, 0), bottom);
    for (int b = 0; b < ny; ++b) add_edge(m.node(2 * nx, 2 * b), m.node(2 * nx, 2 * b + 2), right);
    for (int a = nx; a > 0; --a) add_edge(m.node(2 * a, 2 * ny), m.node(2 * a - 2, 2 * ny), top);
    for (int b = ny; b > 0; --b) add_edge(m.node(0, 2 * b), m.node(0, 2 * b - 2), left);
    return m;
}

}  // namespace detail

/// Fluid rectangle (0,L)x(0,R), structure rectangle (0,L)x(R,R+H) and the shared trace.
struct Mesh {
    SubMesh fluid;
    SubMesh structure;
    std::vector<Vec2> fluid_cur;   ///< current fluid node coordinates
    double L = 0.0, R = 0.0, H = 0.0;

    int nz() const { return fluid.nx; }
    int num_trace_nodes() const { return 2 * fluid.nx + 1; }
    int trace_to_fluid(int k) const { return fluid.node(k, 2 * fluid.ny); }
    int trace_to_structure(int k) const { return structure.node(k, 0); }
    int num_trace_elems() const { return fluid.nx; }
    /// Trace element e: left vertex, right vertex, midpoint.
    std::array<int, 3> trace_elem(int e) const { return {2 * e, 2 * e + 2, 2 * e + 1}; }
    double trace_z(int k) const { return fluid.ref[trace_to_fluid(k)].z; }
};

inline Mesh build_rect_mesh(const PhysicalParams& p, int nz, int nr_f, int nr_s) {
    if (!(p.L > 0.0) || !(p.R > 0.0) || !(p.H > 0.0))
        throw std::invalid_argument("degenerate geometry: L, R and H must be positive");
    if (nz < 2 || nr_f < 2 || nr_s < 1)
        throw std::invalid_argument("mesh subdivisions too small");
    Mesh m;
    m.L = p.L;
    m.R = p.R;
    m.H = p.H;
    m.fluid = detail::build_rect(nz, nr_f, 0.0, p.L, 0.0, p.R, Tag::Symmetry, Tag::Interface, Tag::Inlet, Tag::Outlet);
    m.structure = detail::build_rect(nz, nr_s, 0.0, p.L, p.R, p.R + p.H, Tag::Interface, Tag::External,
                                     Tag::StructureEnd, Tag::StructureEnd);
    m.fluid_cur = m.fluid.ref;
    return m;
}

/// Signed areas of the triangles of `sm` under node coordinates `X`.
inline std::vector<double> triangle_areas(const SubMesh& sm, const std::vector<Vec2>& X) {
    std::vector<double> a(sm.tris.size());
    for (std::size_t t = 0; t < sm.tris.size(); ++t) {
        const auto& T = sm.tris[t];
        a[t] = detail::tri_area(X[T[0]], X[T[1]], X[T[2]]);
    }
    return a;
}

/// Fills midpoint nodes with the average of their parents.
inline void complete_midpoints(const SubMesh& sm, std::vector<Vec2>& X) {
    for (int n = 0; n < sm.num_nodes(); ++n) {
        const auto& pp = sm.parents[n];
        if (pp[0] != pp[1]) X[n] = {0.5 * (X[pp[0]].z + X[pp[1]].z), 0.5 * (X[pp[0]].r + X[pp[1]].r)};
    }
}

/// Current coordinates = reference + d. Midpoint values of d are ignored in favour of
/// the parent average, keeping elements straight. Throws InvertedElement.
inline std::vector<Vec2> moved_coordinates(const Mesh& m, const std::vector<Vec2>& d) {
    if (d.size() != m.fluid.ref.size()) throw std::invalid_argument("displacement size mismatch");
    const SubMesh& f = m.fluid;
    std::vector<Vec2> X(f.ref.size());
    for (std::size_t n = 0; n < X.size(); ++n) {
        const auto& pp = f.parents[n];
        // a midpoint moves by the mean of its parents, so zero motion reproduces the reference bitwise
        const Vec2 dn = pp[0] == pp[1] ? d[n] : Vec2{0.5 * (d[pp[0]].z + d[pp[1]].z), 0.5 * (d[pp[0]].r + d[pp[1]].r)};
        X[n] = {f.ref[n].z + dn.z, f.ref[n].r + dn.r};
    }
    const auto areas = triangle_areas(m.fluid, X);
    for (std::size_t t = 0; t < areas.size(); ++t)
        if (!(areas[t] > 0.0)) throw InvertedElement(static_cast<int>(t), areas[t]);
    return X;
}

/// Returns a copy of `m` whose current fluid coordinates are reference + d.
inline Mesh apply_mesh_motion(const Mesh& m, const std::vector<Vec2>& d) {
    Mesh out = m;
    out.fluid_cur = moved_coordinates(m, d);
    return out;
}

/// Exhaustive consistency check. Returns an empty string when the mesh is sound.
inline std::string audit_mesh(const Mesh& m) {
    auto check_sub = [](const SubMesh& sm, const std::vector<Vec2>& X, const char* name) -> std::string {
        const auto areas = triangle_areas(sm, X);
        for (std::size_t t = 0; t < areas.size(); ++t)
            if (!(areas[t] > 0.0)) return std::string(name) + ": triangle " + std::to_string(t) + " not positively oriented";
        // every midpoint node sits at the parent average
        for (int n = 0; n < sm.num_nodes(); ++n) {
            const auto& pp = sm.parents[n];
            if (pp[0] == pp[1]) continue;
            const double zm = 0.5 * (X[pp[0]].z + X[pp[1]].z), rm = 0.5 * (X[pp[0]].r + X[pp[1]].r);
            if (std::abs(zm - X[n].z) > 1e-12 * (1.0 + std::abs(zm)) || std::abs(rm - X[n].r) > 1e-12 * (1.0 + std::abs(rm)))
                return std::string(name) + ": curved midpoint at node " + std::to_string(n);
        }
        // each interior edge is shared by two triangles, each boundary edge by one, and
        // the tagged edge list covers exactly the edges used once
        std::vector<int> count(static_cast<std::size_t>(sm.num_nodes()), 0);
        for (const auto& T : sm.tris)
            for (int k = 3; k < 6; ++k) ++count[T[k]];
        std::vector<int> tagged(static_cast<std::size_t>(sm.num_nodes()), 0);
        for (const auto& e : sm.edges) {
            ++tagged[e.mid];
            const auto& T = sm.tris[e.tri];
            bool found = false;
            for (int k = 0; k < 3; ++k)
                if (T[k] == e.a && T[(k + 1) % 3] == e.b && T[3 + k] == e.mid) found = true;
            if (!found) return std::string(name) + ": boundary edge not owned by its triangle";
        }
        for (int n = 0; n < sm.num_nodes(); ++n) {
            if (sm.vertex_of_node[n] >= 0 || count[n] == 0) continue;
            if (count[n] > 2) return std::string(name) + ": edge shared by more than two triangles";
            if ((count[n] == 1) != (tagged[n] == 1) || tagged[n] > 1)
                return std::string(name) + ": boundary tags do not partition the boundary";
        }
        return {};
    };
    std::string e = check_sub(m.fluid, m.fluid.ref, "fluid(reference)");
    if (e.empty()) e = check_sub(m.fluid, m.fluid_cur, "fluid(current)");
    if (e.empty()) e = check_sub(m.structure, m.structure.ref, "structure");
    if (!e.empty()) return e;
    // trace bijectivity and conformity in reference coordinates
    const int K = m.num_trace_nodes();
    std::vector<int> seen_f(static_cast<std::size_t>(m.fluid.num_nodes()), 0), seen_s(static_cast<std::size_t>(m.structure.num_nodes()), 0);
    for (int k = 0; k < K; ++k) {
        const int f = m.trace_to_fluid(k), s = m.trace_to_structure(k);
        if (seen_f[f]++ || seen_s[s]++) return "trace map not injective";
        if (m.fluid.ref[f].z != m.structure.ref[s].z || m.fluid.ref[f].r != m.structure.ref[s].r)
            return "trace node " + std::to_string(k) + " coordinates differ between fluid and structure";
    }
    // every interface node lies on exactly one interface edge on each side (two for interior vertices)
    auto count_iface = [](const SubMesh& sm, int node) {
        int c = 0;
        for (const auto& e : sm.edges)
            if (e.tag == Tag::Interface && (e.a == node || e.b == node || e.mid == node)) ++c;
        return c;
    };
    for (int k = 0; k < K; ++k) {
        const int expect = (k % 2 == 1 || k == 0 || k == K - 1) ? 1 : 2;
        if (count_iface(m.fluid, m.trace_to_fluid(k)) != expect || count_iface(m.structure, m.trace_to_structure(k)) != expect)
            return "trace node " + std::to_string(k) + " not on matching interface edges";
    }
    return {};
}

}  // namespace fsi
