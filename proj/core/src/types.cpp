#include "pcu/types.hpp"

namespace pcu {

double triangle_area(const TriangleMesh& mesh, int face) {
    const auto& f = mesh.faces[face];
    Vec3 e1 = mesh.vertices[f[1]] - mesh.vertices[f[0]];
    Vec3 e2 = mesh.vertices[f[2]] - mesh.vertices[f[0]];
    return 0.5 * norm(cross(e1, e2));
}

TriangleMesh remove_degenerate_faces(const TriangleMesh& mesh) {
    TriangleMesh out;
    out.vertices = mesh.vertices;
    out.faces.reserve(mesh.faces.size());
    for (int i = 0; i < mesh.face_count(); ++i)
        if (triangle_area(mesh, i) > 0.0) out.faces.push_back(mesh.faces[i]);
    return out;
}

}  // namespace pcu
