#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "curvflow/mesh.hpp"

namespace curvflow {

enum class MeshFormat { OFF, OBJ };

inline MeshFormat mesh_format_from_string(const std::string& s) {
    if (s == "off" || s == "OFF") return MeshFormat::OFF;
    if (s == "obj" || s == "OBJ") return MeshFormat::OBJ;
    throw ConfigError("unsupported mesh format tag '" + s + "' (expected off or obj)");
}

namespace detail {

inline void strip_comment(std::string& line) {
    const auto pos = line.find('#');
    if (pos != std::string::npos) line.erase(pos);
}

inline Mesh parse_off(std::istream& in, const std::string& name) {
    std::string line;
    std::vector<std::string> tokens;
    // Token stream over non-comment lines; OFF headers vary in line breaks.
    auto next_token = [&]() -> std::string {
        static thread_local std::istringstream cur;
        std::string tok;
        while (true) {
            if (cur >> tok) return tok;
            if (!std::getline(in, line)) throw ParseError(name + ": unexpected end of OFF file");
            strip_comment(line);
            cur.clear();
            cur.str(line);
        }
    };
    auto next_int = [&](const char* what) {
        const std::string tok = next_token();
        try {
            return std::stoi(tok);
        } catch (...) {
            throw ParseError(name + ": expected integer " + what + ", got '" + tok + "'");
        }
    };
    auto next_double = [&](const char* what) {
        const std::string tok = next_token();
        try {
            return std::stod(tok);
        } catch (...) {
            throw ParseError(name + ": expected number " + what + ", got '" + tok + "'");
        }
    };

    if (next_token() != "OFF") throw ParseError(name + ": missing OFF header");
    const int nv = next_int("vertex count");
    const int nf = next_int("face count");
    next_int("edge count"); // ignored
    if (nv < 0 || nf < 0) throw ParseError(name + ": negative counts in OFF header");

    Mesh mesh;
    mesh.vertices.reserve(nv);
    for (int v = 0; v < nv; ++v) {
        const double x = next_double("x"), y = next_double("y"), z = next_double("z");
        mesh.vertices.push_back(Vec3(x, y, z));
    }
    mesh.faces.reserve(nf);
    for (int f = 0; f < nf; ++f) {
        const int n = next_int("face valence");
        if (n != 3)
            throw ParseError(name + ": face " + std::to_string(f) + " has " + std::to_string(n) +
                             " vertices; only triangles are supported");
        std::array<int, 3> t;
        for (int c = 0; c < 3; ++c) t[c] = next_int("face index");
        mesh.faces.push_back(t);
        // Trailing per-face color channels are legal OFF; skip the rest of the line.
        line.clear();
    }
    return mesh;
}

inline Mesh parse_obj(std::istream& in, const std::string& name) {
    Mesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_comment(line);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw ParseError(name + ":" + std::to_string(lineno) + ": malformed vertex line");
            mesh.vertices.push_back(Vec3(x, y, z));
        } else if (tag == "f") {
            std::array<int, 3> t;
            std::string tok;
            for (int c = 0; c < 3; ++c) {
                if (!(ls >> tok))
                    throw ParseError(name + ":" + std::to_string(lineno) +
                                     ": face needs three vertex indices");
                // "i/vt/vn" forms: the vertex index is the leading field.
                const std::string head = tok.substr(0, tok.find('/'));
                int idx;
                try {
                    idx = std::stoi(head);
                } catch (...) {
                    throw ParseError(name + ":" + std::to_string(lineno) +
                                     ": bad face index '" + tok + "'");
                }
                if (idx <= 0)
                    throw ParseError(name + ":" + std::to_string(lineno) +
                                     ": only positive 1-based indices are supported");
                t[c] = idx - 1;
            }
            std::string extra;
            if (ls >> extra)
                throw ParseError(name + ":" + std::to_string(lineno) +
                                 ": only triangles are supported");
            mesh.faces.push_back(t);
        }
        // every other directive is ignored on read
    }
    return mesh;
}

} // namespace detail

/// Parses and validates a closed triangle mesh. Vertex order is preserved.
inline Mesh load_mesh(const std::string& path, MeshFormat format) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mesh file '" + path + "'");
    Mesh mesh = (format == MeshFormat::OFF) ? detail::parse_off(in, path)
                                            : detail::parse_obj(in, path);
    const MeshQualityReport rep = validate(mesh);
    if (!rep.all_good())
        throw MeshError(path + ": " + (rep.problems.empty() ? std::string("validation failed")
                                                            : rep.problems.front()));
    return mesh;
}

/// Writes with enough digits that a reload reproduces coordinates exactly.
inline void save_mesh(const Mesh& mesh, const std::string& path, MeshFormat format) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    if (format == MeshFormat::OFF) {
        const long ne = static_cast<long>(mesh.faces.size()) * 3 / 2;
        out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << ' ' << ne << '\n';
        for (const Vec3& v : mesh.vertices)
            out << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
                << format_double(v.z()) << '\n';
        for (const auto& t : mesh.faces) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    } else {
        for (const Vec3& v : mesh.vertices)
            out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
                << format_double(v.z()) << '\n';
        for (const auto& t : mesh.faces)
            out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
    if (!out.flush()) throw ParseError("I/O failure while writing '" + path + "'");
}

} // namespace curvflow
