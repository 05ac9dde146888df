#include "pcu/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pcu::io {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& why) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + why);
}

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::ifstream open_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

}  // namespace

PointCloud read_xyz(const std::filesystem::path& path) {
    std::ifstream in = open_text(path);
    PointCloud cloud;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::istringstream line(strip_comment(raw));
        double x, y, z;
        if (!(line >> x)) continue;  // blank or comment-only line
        if (!(line >> y >> z)) parse_fail(path, line_no, "expected three coordinates");
        double extra;
        if (line >> extra) parse_fail(path, line_no, "expected three coordinates");
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
            parse_fail(path, line_no, "non-finite coordinate");
        cloud.points.push_back({x, y, z});
    }
    if (cloud.points.empty()) throw std::runtime_error(path.string() + ": no points");
    return cloud;
}

namespace {

void append_shortest(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, end);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void write_xyz(const std::filesystem::path& path, std::span<const Vec3> points) {
    std::string out;
    out.reserve(points.size() * 24);
    for (const Vec3& p : points) {
        append_shortest(out, p.x);
        out.push_back(' ');
        append_shortest(out, p.y);
        out.push_back(' ');
        append_shortest(out, p.z);
        out.push_back('\n');
    }
    atomic_write(path, out);
}

// ---- OBJ --------------------------------------------------------------------

TriangleMesh read_obj(const std::filesystem::path& path) {
    std::ifstream in = open_text(path);
    TriangleMesh mesh;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::istringstream line(strip_comment(raw));
        std::string tag;
        if (!(line >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(line >> x >> y >> z)) parse_fail(path, line_no, "malformed vertex");
            mesh.vertices.push_back({x, y, z});
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string item;
            while (line >> item) {
                // "i", "i/j", "i//k", "i/j/k": the leading integer indexes the vertex.
                int v = 0;
                auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
                if (ec != std::errc() || (ptr != item.data() + item.size() && *ptr != '/'))
                    parse_fail(path, line_no, "malformed face entry '" + item + "'");
                if (v < 0) parse_fail(path, line_no, "negative face indices are unsupported");
                if (v == 0 || v > static_cast<int>(mesh.vertices.size()))
                    parse_fail(path, line_no, "face index out of range");
                poly.push_back(v - 1);
            }
            if (poly.size() < 3) parse_fail(path, line_no, "face needs at least three vertices");
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
        }
        // Everything else (vn, vt, o, g, s, usemtl, mtllib) is ignored.
    }
    if (mesh.vertices.empty()) throw std::runtime_error(path.string() + ": no vertices");
    return remove_degenerate_faces(mesh);
}

// ---- PLY --------------------------------------------------------------------

namespace {

struct PlyProperty {
    std::string type;
    std::string name;
};

int ply_type_size(const std::string& t, const std::filesystem::path& path) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw std::runtime_error(path.string() + ": unsupported ply property type " + t);
}

double ply_read_binary_scalar(std::istream& in, const std::string& type,
                              const std::filesystem::path& path) {
    char buf[8];
    int size = ply_type_size(type, path);
    in.read(buf, size);
    if (!in) throw std::runtime_error(path.string() + ": truncated ply payload");
    if (type == "float" || type == "float32") {
        float f;
        std::memcpy(&f, buf, 4);
        return f;
    }
    if (type == "double" || type == "float64") {
        double d;
        std::memcpy(&d, buf, 8);
        return d;
    }
    // Integer types, little-endian, sign-extended where applicable.
    std::int64_t v = 0;
    bool is_signed = type[0] == 'c' || type[0] == 's' || type == "int" || type == "int8" ||
                     type == "int16" || type == "int32";
    std::uint64_t u = 0;
    for (int i = size - 1; i >= 0; --i) u = (u << 8) | static_cast<unsigned char>(buf[i]);
    if (is_signed && size < 8) {
        std::uint64_t sign_bit = 1ull << (8 * size - 1);
        v = static_cast<std::int64_t>((u ^ sign_bit)) - static_cast<std::int64_t>(sign_bit);
    } else {
        v = static_cast<std::int64_t>(u);
    }
    return static_cast<double>(v);
}

}  // namespace

TriangleMesh read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw std::runtime_error(path.string() + ": not a ply file");

    bool binary = false;
    long n_vertices = -1, n_faces = 0;
    std::vector<PlyProperty> vertex_props;
    std::string face_count_type, face_index_type;
    enum { kNone, kVertex, kFace, kOther } element = kNone;
    bool other_element_seen = false;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "comment" || tag == "obj_info" || tag.empty()) continue;
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii")
                binary = false;
            else if (fmt == "binary_little_endian")
                binary = true;
            else
                throw std::runtime_error(path.string() + ": unsupported ply format " + fmt);
        } else if (tag == "element") {
            std::string name;
            long count;
            ls >> name >> count;
            if (name == "vertex") {
                element = kVertex;
                n_vertices = count;
            } else if (name == "face") {
                element = kFace;
                n_faces = count;
            } else {
                element = kOther;
                if (count > 0) other_element_seen = true;
            }
        } else if (tag == "property") {
            std::string t;
            ls >> t;
            if (element == kVertex) {
                if (t == "list")
                    throw std::runtime_error(path.string() +
                                             ": list properties on vertices are unsupported");
                PlyProperty prop;
                prop.type = t;
                ls >> prop.name;
                vertex_props.push_back(prop);
            } else if (element == kFace) {
                if (t != "list")
                    throw std::runtime_error(path.string() +
                                             ": face elements need a list property");
                std::string name;
                ls >> face_count_type >> face_index_type >> name;
            }
        } else if (tag == "end_header") {
            break;
        } else {
            throw std::runtime_error(path.string() + ": unsupported ply header line '" + line +
                                     "'");
        }
    }
    if (n_vertices < 0) throw std::runtime_error(path.string() + ": ply lacks a vertex element");
    if (other_element_seen)
        throw std::runtime_error(path.string() + ": ply elements other than vertex/face are "
                                                 "unsupported");

    int ix = -1, iy = -1, iz = -1;
    for (std::size_t i = 0; i < vertex_props.size(); ++i) {
        if (vertex_props[i].name == "x") ix = static_cast<int>(i);
        if (vertex_props[i].name == "y") iy = static_cast<int>(i);
        if (vertex_props[i].name == "z") iz = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0)
        throw std::runtime_error(path.string() + ": ply vertices lack x/y/z properties");

    TriangleMesh mesh;
    mesh.vertices.resize(n_vertices);
    if (binary) {
        for (long v = 0; v < n_vertices; ++v) {
            double coords[3] = {0, 0, 0};
            for (std::size_t p = 0; p < vertex_props.size(); ++p) {
                double value = ply_read_binary_scalar(in, vertex_props[p].type, path);
                if (static_cast<int>(p) == ix) coords[0] = value;
                if (static_cast<int>(p) == iy) coords[1] = value;
                if (static_cast<int>(p) == iz) coords[2] = value;
            }
            mesh.vertices[v] = {coords[0], coords[1], coords[2]};
        }
        for (long f = 0; f < n_faces; ++f) {
            int count = static_cast<int>(ply_read_binary_scalar(in, face_count_type, path));
            std::vector<int> poly(count);
            for (int i = 0; i < count; ++i)
                poly[i] = static_cast<int>(ply_read_binary_scalar(in, face_index_type, path));
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
        }
    } else {
        for (long v = 0; v < n_vertices; ++v) {
            double coords[3] = {0, 0, 0};
            for (std::size_t p = 0; p < vertex_props.size(); ++p) {
                double value;
                if (!(in >> value))
                    throw std::runtime_error(path.string() + ": truncated ply vertex data");
                if (static_cast<int>(p) == ix) coords[0] = value;
                if (static_cast<int>(p) == iy) coords[1] = value;
                if (static_cast<int>(p) == iz) coords[2] = value;
            }
            mesh.vertices[v] = {coords[0], coords[1], coords[2]};
        }
        for (long f = 0; f < n_faces; ++f) {
            int count;
            if (!(in >> count))
                throw std::runtime_error(path.string() + ": truncated ply face data");
            std::vector<int> poly(count);
            for (int i = 0; i < count; ++i)
                if (!(in >> poly[i]))
                    throw std::runtime_error(path.string() + ": truncated ply face data");
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
        }
    }
    for (const auto& f : mesh.faces)
        for (int idx : f)
            if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
                throw std::runtime_error(path.string() + ": ply face index out of range");
    return remove_degenerate_faces(mesh);
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    if (ext == ".obj") return read_obj(path);
    if (ext == ".ply") return read_ply(path);
    throw std::runtime_error(path.string() + ": unsupported mesh format (want .obj or .ply)");
}

PointCloud as_cloud(const TriangleMesh& mesh) {
    PointCloud cloud;
    cloud.points = mesh.vertices;
    return cloud;
}

}  // namespace pcu::io
