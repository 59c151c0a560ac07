#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mpdwg {

using Vec2 = Eigen::Vector2d;

/// The three computational domains used in the convergence studies.
enum class DomainId {
  UnitSquare,  ///< (0,1)^2
  BigSquare,   ///< (-1,1)^2, both axes are mesh lines
  LShape,      ///< pentagon (0,0),(2,0),(1,1),(1,2),(0,2)
};

std::string_view domain_name(DomainId id);
DomainId parse_domain(std::string_view name);

/// Undirected mesh edge. `v[0] < v[1]` fixes the global orientation.
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> elements{-1, -1};
  bool boundary = false;
};

/// Conforming triangulation with an explicit edge table.
///
/// Triangles are stored counterclockwise. Local edge i of a triangle is the
/// edge opposite local vertex i, i.e. (v[i+1], v[i+2]) modulo 3.
class TriMesh {
 public:
  /// Builds topology (edges, adjacency, boundary flags) from a vertex list and
  /// counterclockwise triangles. Throws std::invalid_argument if the input is
  /// not a conforming, positively oriented triangulation.
  static TriMesh from_triangles(std::vector<Vec2> vertices,
                                std::vector<std::array<int, 3>> triangles,
                                int level = 0);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_boundary_edges() const;
  int num_boundary_vertices() const;

  /// Global edge ids of the three local edges of triangle t.
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
  std::array<Vec2, 3> triangle_points(int t) const;

  double diameter(int t) const { return diameters_[t]; }
  double meshsize() const { return meshsize_; }
  int level() const { return level_; }
  const std::vector<bool>& boundary_vertex() const { return boundary_vertex_; }

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<double> diameters_;
  std::vector<bool> boundary_vertex_;
  double meshsize_ = 0.0;
  int level_ = 0;
};

TriMesh build_initial(DomainId domain);

/// Red refinement: every triangle is split into four congruent children by
/// connecting its edge midpoints. The midpoint of edge e becomes vertex V + e.
TriMesh refine_uniform(const TriMesh& mesh);

/// Level-0 mesh refined `levels` times.
TriMesh build_mesh(DomainId domain, int levels);

struct ElementGeometry {
  double area = 0.0;
  double diameter = 0.0;
  Vec2 centroid = Vec2::Zero();
  std::array<Vec2, 3> normals{};  ///< outward unit normal of local edge i
  std::array<double, 3> edge_lengths{};
};

ElementGeometry geometry(const std::array<Vec2, 3>& p);
ElementGeometry geometry(const TriMesh& mesh, int t);

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// Debug dump: header "V E F", vertex lines "x y", triangle lines "i j k".
void write_mesh(const TriMesh& mesh, std::ostream& os);

}  // namespace mpdwg
