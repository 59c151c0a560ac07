#include "mpdwg/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace mpdwg;

namespace {

void expect_valid(const TriMesh& m) {
  EXPECT_EQ(m.num_vertices() - m.num_edges() + m.num_triangles(), 1);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto p = m.triangle_points(t);
    EXPECT_GT(signed_area(p[0], p[1], p[2]), 0.0);
  }
  int boundary = 0;
  for (const Edge& e : m.edges()) {
    EXPECT_LT(e.v[0], e.v[1]);
    if (e.boundary) {
      ++boundary;
      EXPECT_GE(e.elements[0], 0);
      EXPECT_EQ(e.elements[1], -1);
    } else {
      EXPECT_GE(e.elements[0], 0);
      EXPECT_GE(e.elements[1], 0);
    }
  }
  EXPECT_EQ(boundary, m.num_boundary_edges());
  // closed boundary polygon: as many boundary vertices as boundary edges
  EXPECT_EQ(m.num_boundary_vertices(), m.num_boundary_edges());
}

}  // namespace

TEST(Mesh, InitialCounts) {
  const TriMesh u = build_initial(DomainId::UnitSquare);
  EXPECT_EQ(u.num_triangles(), 2);
  EXPECT_EQ(u.num_vertices(), 4);
  EXPECT_EQ(u.num_edges(), 5);

  const TriMesh b = build_initial(DomainId::BigSquare);
  EXPECT_EQ(b.num_triangles(), 8);
  EXPECT_EQ(b.num_vertices(), 9);
  EXPECT_EQ(b.num_edges(), 16);

  const TriMesh l = build_initial(DomainId::LShape);
  EXPECT_EQ(l.num_triangles(), 3);
  EXPECT_EQ(l.num_vertices(), 5);
  EXPECT_EQ(l.num_edges(), 7);

  for (const TriMesh* m : {&u, &b, &l}) expect_valid(*m);
}

TEST(Mesh, UnitSquareDiagonal) {
  const TriMesh u = build_initial(DomainId::UnitSquare);
  bool found = false;
  for (const Edge& e : u.edges()) {
    const Vec2 a = u.vertices()[e.v[0]];
    const Vec2 b = u.vertices()[e.v[1]];
    if (!e.boundary) {
      found = (a.isZero() && b.isApprox(Vec2(1, 1))) || (b.isZero() && a.isApprox(Vec2(1, 1)));
    }
  }
  EXPECT_TRUE(found);
}

TEST(Mesh, LShapeVertices) {
  const TriMesh l = build_initial(DomainId::LShape);
  const Vec2 expected[] = {{0, 0}, {2, 0}, {1, 1}, {1, 2}, {0, 2}};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(l.vertices()[i], expected[i]);
}

TEST(Mesh, RefinementCounts) {
  for (DomainId d : {DomainId::UnitSquare, DomainId::BigSquare, DomainId::LShape}) {
    TriMesh m = build_initial(d);
    const double h0 = m.meshsize();
    const int f0 = m.num_triangles();
    for (int level = 1; level <= 4; ++level) {
      const TriMesh r = refine_uniform(m);
      EXPECT_EQ(r.num_vertices(), m.num_vertices() + m.num_edges());
      EXPECT_EQ(r.num_edges(), 2 * m.num_edges() + 3 * m.num_triangles());
      EXPECT_EQ(r.num_triangles(), 4 * m.num_triangles());
      EXPECT_EQ(r.level(), level);
      EXPECT_EQ(r.num_triangles(), f0 * (1 << (2 * level)));
      EXPECT_DOUBLE_EQ(r.meshsize(), h0 / (1 << level));
      expect_valid(r);
      m = r;
    }
  }
}

TEST(Mesh, UnitSquareFirstRefinement) {
  const TriMesh r = refine_uniform(build_initial(DomainId::UnitSquare));
  EXPECT_EQ(r.num_triangles(), 8);
  EXPECT_EQ(r.num_vertices(), 9);
}

TEST(Mesh, ChildDiameterHalves) {
  const TriMesh r = refine_uniform(build_initial(DomainId::UnitSquare));
  for (int t = 0; t < r.num_triangles(); ++t) EXPECT_NEAR(r.diameter(t), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Mesh, BigSquareElementsStayInOneQuadrant) {
  const TriMesh m = build_mesh(DomainId::BigSquare, 3);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto p = m.triangle_points(t);
    const Vec2 c = (p[0] + p[1] + p[2]) / 3.0;
    for (const Vec2& v : p) {
      EXPECT_GE(v.x() * c.x(), 0.0);
      EXPECT_GE(v.y() * c.y(), 0.0);
    }
  }
}

TEST(Mesh, LShapeReentrantEdgesAreMeshLines) {
  const TriMesh m = build_mesh(DomainId::LShape, 2);
  // every triangle lies on one side of the lines x = 1 and y = 1
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto p = m.triangle_points(t);
    const Vec2 c = (p[0] + p[1] + p[2]) / 3.0;
    for (const Vec2& v : p) {
      EXPECT_GE((v.x() - 1.0) * (c.x() - 1.0), -1e-15);
      EXPECT_GE((v.y() - 1.0) * (c.y() - 1.0), -1e-15);
    }
  }
}

TEST(Mesh, ReferenceTriangleGeometry) {
  const ElementGeometry g = geometry({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
  EXPECT_DOUBLE_EQ(g.area, 0.5);
  EXPECT_DOUBLE_EQ(g.diameter, std::sqrt(2.0));
  // local edge 0 is the hypotenuse (opposite vertex 0)
  EXPECT_NEAR(g.normals[0].x(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.normals[0].y(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.edge_lengths[0], std::sqrt(2.0), 1e-15);
}

TEST(Mesh, NormalsPointOutward) {
  const TriMesh m = build_mesh(DomainId::LShape, 2);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto p = m.triangle_points(t);
    const ElementGeometry g = geometry(m, t);
    for (int i = 0; i < 3; ++i) {
      const Vec2 mid = 0.5 * (p[(i + 1) % 3] + p[(i + 2) % 3]);
      EXPECT_NEAR(g.normals[i].norm(), 1.0, 1e-14);
      EXPECT_LT(g.normals[i].dot(g.centroid - mid), 0.0);
    }
  }
}

TEST(Mesh, TriangleEdgesOppositeVertices) {
  const TriMesh m = build_mesh(DomainId::BigSquare, 1);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int i = 0; i < 3; ++i) {
      const Edge& e = m.edges()[m.triangle_edges(t)[i]];
      const int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
      EXPECT_EQ(std::min(a, b), e.v[0]);
      EXPECT_EQ(std::max(a, b), e.v[1]);
      EXPECT_TRUE(e.elements[0] == t || e.elements[1] == t);
    }
  }
}

TEST(Mesh, RejectsClockwiseTriangle) {
  EXPECT_THROW(TriMesh::from_triangles({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 2, 1}}), std::invalid_argument);
}

TEST(Mesh, RejectsNonManifoldEdge) {
  std::vector<Vec2> v = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1), Vec2(0.2, 0.9)};
  EXPECT_THROW(TriMesh::from_triangles(v, {{0, 1, 2}, {1, 3, 2}, {1, 4, 2}}), std::invalid_argument);
}

TEST(Mesh, DumpFormat) {
  const TriMesh m = build_initial(DomainId::UnitSquare);
  std::ostringstream os;
  write_mesh(m, os);
  std::istringstream is(os.str());
  int v, e, f;
  is >> v >> e >> f;
  EXPECT_EQ(v, 4);
  EXPECT_EQ(e, 5);
  EXPECT_EQ(f, 2);
}

TEST(Mesh, DomainNames) {
  EXPECT_EQ(parse_domain("omega1"), DomainId::UnitSquare);
  EXPECT_EQ(parse_domain("big-square"), DomainId::BigSquare);
  EXPECT_EQ(parse_domain(domain_name(DomainId::LShape)), DomainId::LShape);
  EXPECT_THROW(parse_domain("disk"), std::invalid_argument);
}
