#include "mpdwg/mesh.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mpdwg {

std::string_view domain_name(DomainId id) {
  switch (id) {
    case DomainId::UnitSquare: return "unit-square";
    case DomainId::BigSquare: return "big-square";
    case DomainId::LShape: return "l-shape";
  }
  return "unknown";
}

DomainId parse_domain(std::string_view name) {
  if (name == "unit-square" || name == "omega1") return DomainId::UnitSquare;
  if (name == "big-square" || name == "omega2") return DomainId::BigSquare;
  if (name == "l-shape" || name == "omega3") return DomainId::LShape;
  throw std::invalid_argument("unknown domain '" + std::string(name) + "'");
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

TriMesh TriMesh::from_triangles(std::vector<Vec2> vertices,
                                std::vector<std::array<int, 3>> triangles, int level) {
  TriMesh m;
  m.vertices_ = std::move(vertices);
  m.triangles_ = std::move(triangles);
  m.level_ = level;

  const int nv = m.num_vertices();
  std::map<std::pair<int, int>, int> edge_ids;
  m.triangle_edges_.resize(m.triangles_.size());
  m.diameters_.resize(m.triangles_.size());

  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles_[t];
    for (int i = 0; i < 3; ++i) {
      if (tri[i] < 0 || tri[i] >= nv) throw std::invalid_argument("triangle vertex index out of range");
    }
    const auto p = m.triangle_points(t);
    if (!(signed_area(p[0], p[1], p[2]) > 0.0)) {
      throw std::invalid_argument("triangle " + std::to_string(t) + " is not counterclockwise");
    }
    double diam = 0.0;
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, m.num_edges());
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.elements = {t, -1};
        m.edges_.push_back(e);
      } else {
        Edge& e = m.edges_[it->second];
        if (e.elements[1] != -1) throw std::invalid_argument("edge shared by more than two triangles");
        e.elements[1] = t;
      }
      m.triangle_edges_[t][i] = it->second;
      diam = std::max(diam, (m.vertices_[a] - m.vertices_[b]).norm());
    }
    m.diameters_[t] = diam;
    m.meshsize_ = std::max(m.meshsize_, diam);
  }

  m.boundary_vertex_.assign(nv, false);
  for (auto& e : m.edges_) {
    e.boundary = e.elements[1] == -1;
    if (e.boundary) {
      m.boundary_vertex_[e.v[0]] = true;
      m.boundary_vertex_[e.v[1]] = true;
    }
  }
  return m;
}

int TriMesh::num_boundary_edges() const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                        [](const Edge& e) { return e.boundary; }));
}

int TriMesh::num_boundary_vertices() const {
  return static_cast<int>(std::count(boundary_vertex_.begin(), boundary_vertex_.end(), true));
}

std::array<Vec2, 3> TriMesh::triangle_points(int t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

TriMesh build_initial(DomainId domain) {
  std::vector<Vec2> v;
  std::vector<std::array<int, 3>> t;
  switch (domain) {
    case DomainId::UnitSquare:
      v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
      t = {{0, 1, 2}, {0, 2, 3}};
      break;
    case DomainId::BigSquare: {
      // 3x3 grid, vertex (i,j) at (-1+i, -1+j); each unit square is cut by
      // its diagonal through the origin (vertex 4).
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) v.emplace_back(-1.0 + i, -1.0 + j);
      t = {{0, 1, 4}, {0, 4, 3},   // (-1,0)x(-1,0)
           {1, 2, 4}, {2, 5, 4},   // (0,1)x(-1,0)
           {3, 4, 6}, {4, 7, 6},   // (-1,0)x(0,1)
           {4, 5, 8}, {4, 8, 7}};  // (0,1)x(0,1)
      break;
    }
    case DomainId::LShape:
      v = {{0, 0}, {2, 0}, {1, 1}, {1, 2}, {0, 2}};
      t = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
      break;
  }
  return TriMesh::from_triangles(std::move(v), std::move(t), 0);
}

TriMesh refine_uniform(const TriMesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Vec2> v = mesh.vertices();
  v.reserve(nv + mesh.num_edges());
  for (const auto& e : mesh.edges()) v.push_back(0.5 * (v[e.v[0]] + v[e.v[1]]));

  std::vector<std::array<int, 3>> t;
  t.reserve(4 * mesh.triangles().size());
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& tri = mesh.triangles()[k];
    const auto& te = mesh.triangle_edges(k);
    // midpoint opposite local vertex i
    const int m0 = nv + te[0], m1 = nv + te[1], m2 = nv + te[2];
    t.push_back({tri[0], m2, m1});
    t.push_back({m2, tri[1], m0});
    t.push_back({m1, m0, tri[2]});
    t.push_back({m0, m1, m2});
  }
  return TriMesh::from_triangles(std::move(v), std::move(t), mesh.level() + 1);
}

TriMesh build_mesh(DomainId domain, int levels) {
  TriMesh m = build_initial(domain);
  for (int l = 0; l < levels; ++l) m = refine_uniform(m);
  return m;
}

ElementGeometry geometry(const std::array<Vec2, 3>& p) {
  ElementGeometry g;
  g.area = signed_area(p[0], p[1], p[2]);
  g.centroid = (p[0] + p[1] + p[2]) / 3.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2 d = p[(i + 2) % 3] - p[(i + 1) % 3];
    g.edge_lengths[i] = d.norm();
    // counterclockwise orientation: outward normal is the tangent rotated by -90 degrees
    g.normals[i] = Vec2(d.y(), -d.x()) / g.edge_lengths[i];
    g.diameter = std::max(g.diameter, g.edge_lengths[i]);
  }
  return g;
}

ElementGeometry geometry(const TriMesh& mesh, int t) { return geometry(mesh.triangle_points(t)); }

void write_mesh(const TriMesh& mesh, std::ostream& os) {
  os << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_triangles() << '\n';
  const auto old = os.precision(17);
  for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os.precision(old);
}

}  // namespace mpdwg
