#pragma once

/// DG coefficient fields (flow and adjoint share the representation) with
/// L2 projection, trace evaluation, modal embedding and plain-text I/O.

#include "nsshape/gas.hpp"
#include "nsshape/mesh_io.hpp"
#include "nsshape/space.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <functional>

namespace nsshape {

class DGField {
  public:
    DGField() = default;
    DGField(int n_elements, int nb) : nb_(nb), coeffs_(Eigen::VectorXd::Zero(4 * nb * n_elements)) {}

    int nb() const { return nb_; }
    int n_elements() const { return nb_ == 0 ? 0 : static_cast<int>(coeffs_.size() / (4 * nb_)); }
    Eigen::VectorXd& coeffs() { return coeffs_; }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }

    int dof(int elem, int b, int comp) const { return (elem * nb_ + b) * 4 + comp; }

    /// local coefficient block as nb x 4
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>>
    elem_block(int elem) const {
        return {coeffs_.data() + elem * nb_ * 4, nb_, 4};
    }
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>> elem_block(int elem) {
        return {coeffs_.data() + elem * nb_ * 4, nb_, 4};
    }

    /// state at an arbitrary reference point of an element
    State eval(const DGSpace& space, int elem, const Vec2& xi) const {
        std::vector<double> val(nb_);
        basis_eval(space.p, xi, val.data());
        State u = State::Zero();
        auto U = elem_block(elem);
        for (int b = 0; b < nb_; ++b) u += val[b] * U.row(b).transpose();
        return u;
    }

  private:
    int nb_ = 0;
    Eigen::VectorXd coeffs_;
};

inline DGField constant_field(const CurvilinearMesh& mesh, const DGSpace& space, const State& u) {
    DGField f(mesh.n_elements(), space.nb);
    // phi_0 = 1/2 on [-1,1]^2 (normalized Legendre), so c0 = 2 u
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int c = 0; c < 4; ++c) f.coeffs()[f.dof(e, 0, c)] = 2.0 * u[c];
    return f;
}

/// Element-wise L2 projection of an analytic state function.
inline DGField project_field(const CurvilinearMesh& mesh, const DGSpace& space,
                             const GeometryCache& geom,
                             const std::function<State(const Vec2&)>& fn) {
    DGField f(mesh.n_elements(), space.nb);
    const int nqv = space.nqv, nb = space.nb;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, 4);
        for (int qp = 0; qp < nqv; ++qp) {
            const auto& pt = geom.vol[e][qp];
            const State u = fn(pt.x);
            for (int b = 0; b < nb; ++b)
                rhs.row(b) += pt.jw * space.phi[b * nqv + qp] * u.transpose();
        }
        Eigen::MatrixXd sol = geom.mass[e].solve(rhs);
        auto U = f.elem_block(e);
        for (int b = 0; b < nb; ++b) U.row(b) = sol.row(b);
    }
    return f;
}

/// Exact modal embedding into a higher-order space on the same mesh.
inline DGField embed_field(const DGField& f, int p_from, int p_to) {
    const int n1f = p_from + 1, n1t = p_to + 1;
    if (p_to < p_from) throw ConfigError("embed_field: target order below source");
    DGField out(f.n_elements(), n1t * n1t);
    for (int e = 0; e < f.n_elements(); ++e)
        for (int j = 0; j < n1f; ++j)
            for (int i = 0; i < n1f; ++i)
                for (int c = 0; c < 4; ++c)
                    out.coeffs()[out.dof(e, j * n1t + i, c)] =
                        f.coeffs()[f.dof(e, j * n1f + i, c)];
    return out;
}

/// L2 norm of the difference to an analytic state, component-summed.
inline double l2_error(const CurvilinearMesh& mesh, const DGSpace& space,
                       const GeometryCache& geom, const DGField& f,
                       const std::function<State(const Vec2&)>& exact) {
    double err2 = 0.0;
    const int nqv = space.nqv, nb = space.nb;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto U = f.elem_block(e);
        for (int qp = 0; qp < nqv; ++qp) {
            const auto& pt = geom.vol[e][qp];
            State u = State::Zero();
            for (int b = 0; b < nb; ++b) u += space.phi[b * nqv + qp] * U.row(b).transpose();
            err2 += pt.jw * (u - exact(pt.x)).squaredNorm();
        }
    }
    return std::sqrt(err2);
}

/// FNV-1a over the printed mesh content; identifies the discretization in
/// solution files and run artifacts.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string mesh_hash(const CurvilinearMesh& mesh) {
    std::string data;
    data.reserve(mesh.nodes.size() * 40);
    char buf[64];
    for (const auto& n : mesh.nodes) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g;", n[0], n[1]);
        data += buf;
    }
    std::snprintf(buf, sizeof(buf), "q%d e%d w%d", mesh.degree, mesh.n_elements(),
                  mesh.n_wall_edges);
    data += buf;
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(data)));
    return buf;
}

inline void write_field(const DGField& f, int p, const std::string& role,
                        const std::string& mesh_hash_str, const GasModel& gas, std::ostream& os) {
    os << "nsshape-solution 1\n";
    os << "mesh " << mesh_hash_str << "\n";
    os << "p " << p << " components 4\n";
    os << "gas " << format_g17(gas.gamma) << " " << format_g17(gas.Pr) << " "
       << format_g17(gas.mu) << " " << format_g17(gas.R) << "\n";
    os << "role " << role << "\n";
    os << "coeffs " << f.n_elements() << " " << f.nb() << "\n";
    for (int e = 0; e < f.n_elements(); ++e)
        for (int b = 0; b < f.nb(); ++b) {
            os << e << " " << b;
            for (int c = 0; c < 4; ++c) os << " " << format_g17(f.coeffs()[f.dof(e, b, c)]);
            os << "\n";
        }
    os << "end\n";
}

struct FieldFile {
    DGField field;
    int p = 0;
    std::string role;
    std::string mesh_hash;
    GasModel gas;
};

inline FieldFile read_field(std::istream& is) {
    auto expect = [&](const std::string& what) {
        std::string tok;
        if (!(is >> tok) || tok != what)
            throw ConfigError("solution file: expected '" + what + "', got '" + tok + "'");
    };
    expect("nsshape-solution");
    int version;
    is >> version;
    if (version != 1) throw ConfigError("unsupported solution format version");
    FieldFile ff;
    expect("mesh");
    is >> ff.mesh_hash;
    expect("p");
    is >> ff.p;
    expect("components");
    int ncomp;
    is >> ncomp;
    if (ncomp != 4) throw ConfigError("solution file: expected 4 components");
    expect("gas");
    is >> ff.gas.gamma >> ff.gas.Pr >> ff.gas.mu >> ff.gas.R;
    expect("role");
    is >> ff.role;
    expect("coeffs");
    int ne, nb;
    is >> ne >> nb;
    ff.field = DGField(ne, nb);
    for (int row = 0; row < ne * nb; ++row) {
        int e, b;
        is >> e >> b;
        for (int c = 0; c < 4; ++c) is >> ff.field.coeffs()[ff.field.dof(e, b, c)];
    }
    expect("end");
    if (!is) throw ConfigError("solution file: truncated");
    return ff;
}

inline void write_field_file(const DGField& f, int p, const std::string& role,
                             const std::string& mesh_hash_str, const GasModel& gas,
                             const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open solution file for writing: " + path);
    write_field(f, p, role, mesh_hash_str, gas, os);
}

inline FieldFile read_field_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open solution file: " + path);
    return read_field(is);
}

} // namespace nsshape
