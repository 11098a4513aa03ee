#pragma once

/// Plain-text mesh format, lossless to 17 significant digits:
///
///   nsshape-mesh 1
///   degree <q>
///   nodes <N>
///   <id> <x> <y>
///   elements <M> <nodes-per-elem>
///   <id> <node-id> ... <node-id>
///   boundary <B> wall <W>
///   <id> <elem> <face> <tag>
///   end
///
/// The first W boundary rows are the wall loop in traversal order. Interior
/// faces are derived data and rebuilt on read.

#include "nsshape/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nsshape {

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_mesh(const CurvilinearMesh& mesh, std::ostream& os) {
    os << "nsshape-mesh 1\n";
    os << "degree " << mesh.degree << "\n";
    os << "nodes " << mesh.nodes.size() << "\n";
    for (size_t i = 0; i < mesh.nodes.size(); ++i)
        os << i << " " << format_g17(mesh.nodes[i][0]) << " " << format_g17(mesh.nodes[i][1])
           << "\n";
    os << "elements " << mesh.n_elements() << " " << mesh.nodes_per_elem() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e) {
        os << e;
        for (int id : mesh.elem_nodes[e]) os << " " << id;
        os << "\n";
    }
    os << "boundary " << mesh.boundary_edges.size() << " wall " << mesh.n_wall_edges << "\n";
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        const auto& be = mesh.boundary_edges[i];
        os << i << " " << be.elem << " " << be.face << " " << to_string(be.tag) << "\n";
    }
    os << "end\n";
}

inline void write_mesh_file(const CurvilinearMesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open mesh file for writing: " + path);
    write_mesh(mesh, os);
}

inline CurvilinearMesh read_mesh(std::istream& is) {
    auto expect = [&](const std::string& what) {
        std::string tok;
        if (!(is >> tok) || tok != what)
            throw ConfigError("mesh file: expected '" + what + "', got '" + tok + "'");
    };
    expect("nsshape-mesh");
    int version;
    is >> version;
    if (version != 1) throw ConfigError("unsupported mesh format version");
    CurvilinearMesh mesh;
    expect("degree");
    is >> mesh.degree;
    expect("nodes");
    size_t n_nodes;
    is >> n_nodes;
    mesh.nodes.resize(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i) {
        size_t id;
        double x, y;
        is >> id >> x >> y;
        mesh.nodes[id] = Vec2(x, y);
    }
    expect("elements");
    int n_elems, nper;
    is >> n_elems >> nper;
    if (nper != (mesh.degree + 1) * (mesh.degree + 1))
        throw ConfigError("mesh file: nodes-per-elem inconsistent with degree");
    mesh.elem_nodes.assign(n_elems, std::vector<int>(nper));
    for (int e = 0; e < n_elems; ++e) {
        int id;
        is >> id;
        for (int k = 0; k < nper; ++k) is >> mesh.elem_nodes[id][k];
    }
    expect("boundary");
    size_t n_bedges;
    is >> n_bedges;
    expect("wall");
    is >> mesh.n_wall_edges;
    mesh.boundary_edges.resize(n_bedges);
    for (size_t i = 0; i < n_bedges; ++i) {
        size_t id;
        int elem, face;
        std::string tag;
        is >> id >> elem >> face >> tag;
        BoundaryTag t;
        if (tag == "WALL_ADIA") t = BoundaryTag::WALL_ADIA;
        else if (tag == "WALL_ISO") t = BoundaryTag::WALL_ISO;
        else if (tag == "FARFIELD") t = BoundaryTag::FARFIELD;
        else throw ConfigError("mesh file: unknown boundary tag " + tag);
        mesh.boundary_edges[id] = BoundaryEdge{elem, face, t};
    }
    expect("end");
    if (!is) throw ConfigError("mesh file: truncated");
    MeshBuilder::rebuild_interior_faces(mesh);
    return mesh;
}

inline CurvilinearMesh read_mesh_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open mesh file: " + path);
    return read_mesh(is);
}

} // namespace nsshape
