#include <algorithm>
#include <array>
#include <cmath>

#include "weavehom/errors.hpp"
#include "weavehom/plate.hpp"

namespace weavehom {

namespace {

constexpr std::array<std::array<int, 2>, 4> kQuadCorners{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

// 1D cubic Hermite data at t in [0,1] on an interval of length h. Index
// 2*side + kind, kind 0 = value function, 1 = slope function.
struct Hermite1D {
    double v[4], d[4], dd[4];
};

Hermite1D hermite(double t, double h) {
    Hermite1D r;
    const double t2 = t * t, t3 = t2 * t;
    r.v[0] = 1 - 3 * t2 + 2 * t3;
    r.d[0] = (-6 * t + 6 * t2) / h;
    r.dd[0] = (-6 + 12 * t) / (h * h);
    r.v[1] = h * (t - 2 * t2 + t3);
    r.d[1] = 1 - 4 * t + 3 * t2;
    r.dd[1] = (-4 + 6 * t) / h;
    r.v[2] = 3 * t2 - 2 * t3;
    r.d[2] = (6 * t - 6 * t2) / h;
    r.dd[2] = (6 - 12 * t) / (h * h);
    r.v[3] = h * (-t2 + t3);
    r.d[3] = -2 * t + 3 * t2;
    r.dd[3] = (-2 + 6 * t) / h;
    return r;
}

// 4-point Gauss rule on [0,1].
constexpr std::array<double, 4> kGaussX{0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                        0.9305681557970263};
constexpr std::array<double, 4> kGaussW{0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                        0.1739274225687269};

using Vec24 = Eigen::Matrix<double, 24, 1>;
using Mat24 = Eigen::Matrix<double, 24, 24>;

} // namespace

PlateProblem::PlateProblem(PlateMesh mesh, PlateTensors tensors, LoadSpec load, PlateModel model)
    : mesh_(mesh), tensors_(std::move(tensors)), load_(std::move(load)), model_(model) {
    if (mesh_.nx < 1 || mesh_.ny < 1) throw ContractError("plate mesh is empty");
    if (!tensors_.a_hom.allFinite() || !tensors_.b_hom.allFinite() || !tensors_.c_hom.allFinite())
        throw ContractError("plate tensors are missing or not finite");
    load_.validate(mesh_);
    const double hx = mesh_.hx, hy = mesh_.hy;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            QP q;
            q.weight = kGaussW[a] * kGaussW[b] * hx * hy;
            const double t = kGaussX[a], s = kGaussX[b];
            q.xi = Eigen::Vector2d(t * hx, s * hy);
            const Hermite1D hxd = hermite(t, hx), hyd = hermite(s, hy);
            for (int c = 0; c < 4; ++c) {
                const int cx = kQuadCorners[c][0], cy = kQuadCorners[c][1];
                const double nx = cx ? t : 1 - t, ny = cy ? s : 1 - s;
                q.N[c] = nx * ny;
                q.dN(0, c) = (cx ? 1.0 : -1.0) / hx * ny;
                q.dN(1, c) = nx * (cy ? 1.0 : -1.0) / hy;
                const int vx = 2 * cx, sx = 2 * cx + 1, vy = 2 * cy, sy = 2 * cy + 1;
                const int ix[4] = {vx, sx, vx, sx};
                const int iy[4] = {vy, vy, sy, sy};
                for (int k = 0; k < 4; ++k) {
                    const int col = 4 * c + k;
                    q.H[col] = hxd.v[ix[k]] * hyd.v[iy[k]];
                    q.dH(0, col) = hxd.d[ix[k]] * hyd.v[iy[k]];
                    q.dH(1, col) = hxd.v[ix[k]] * hyd.d[iy[k]];
                    q.d2H(0, col) = hxd.dd[ix[k]] * hyd.v[iy[k]];
                    q.d2H(1, col) = hxd.v[ix[k]] * hyd.dd[iy[k]];
                    q.d2H(2, col) = 2.0 * hxd.d[ix[k]] * hyd.d[iy[k]];
                }
            }
            qp_.push_back(q);
        }
    }
}

void PlateProblem::element_dofs(int e, int *u_dofs, int *w_dofs) const {
    const int i = e % mesh_.nx, j = e / mesh_.nx;
    for (int c = 0; c < 4; ++c) {
        const int n = mesh_.node(i + kQuadCorners[c][0], j + kQuadCorners[c][1]);
        u_dofs[2 * c] = kPlateDofs * n + kU1;
        u_dofs[2 * c + 1] = kPlateDofs * n + kU2;
        for (int k = 0; k < 4; ++k) w_dofs[4 * c + k] = kPlateDofs * n + kW + k;
    }
}

Eigen::Vector3d PlateProblem::force_at(int e, const QP &q) const {
    if (load_.f_nodal.empty()) return load_.f;
    const int i = e % mesh_.nx, j = e / mesh_.nx;
    Eigen::Vector3d f = Eigen::Vector3d::Zero();
    for (int c = 0; c < 4; ++c) f += q.N[c] * load_.f_nodal[mesh_.node(i + kQuadCorners[c][0], j + kQuadCorners[c][1])];
    return f;
}

Eigen::Vector3d PlateProblem::prestrain_at(int e, const QP &q) const {
    Eigen::Matrix2d E = load_.prestrain;
    if (!load_.prestrain_nodal.empty()) {
        const int i = e % mesh_.nx, j = e / mesh_.nx;
        E.setZero();
        for (int c = 0; c < 4; ++c)
            E += q.N[c] * load_.prestrain_nodal[mesh_.node(i + kQuadCorners[c][0], j + kQuadCorners[c][1])];
    }
    return {E(0, 0), E(1, 1), E(0, 1) + E(1, 0)};
}

namespace {

struct Kinematics {
    Eigen::Matrix<double, 3, 8> Bm;
    Eigen::Vector3d e;  // membrane strain (engineering)
    Eigen::Vector2d g;  // grad w
    Eigen::Vector3d k;  // curvature (w_xx, w_yy, 2 w_xy)
    Eigen::Vector2d u;  // in-plane displacement
    double w;
};

template <class QPType>
Kinematics kinematics(const QPType &q, const double *ue, const double *we) {
    Kinematics kin;
    for (int c = 0; c < 4; ++c) {
        kin.Bm.col(2 * c) << q.dN(0, c), 0.0, q.dN(1, c);
        kin.Bm.col(2 * c + 1) << 0.0, q.dN(1, c), q.dN(0, c);
    }
    const Eigen::Map<const Eigen::Matrix<double, 8, 1>> u(ue);
    const Eigen::Map<const Eigen::Matrix<double, 16, 1>> w(we);
    kin.e = kin.Bm * u;
    kin.g = q.dH * w;
    kin.k = q.d2H * w;
    kin.u = Eigen::Vector2d::Zero();
    for (int c = 0; c < 4; ++c) kin.u += q.N[c] * Eigen::Vector2d(u[2 * c], u[2 * c + 1]);
    kin.w = q.H.dot(w);
    return kin;
}

} // namespace

double PlateProblem::energy(const Eigen::VectorXd &x) const {
    if (x.size() != size()) throw ContractError("plate state has the wrong size");
    const Matrix3d &A = tensors_.a_hom, &B = tensors_.b_hom, &C = tensors_.c_hom;
    const bool nl = model_ == PlateModel::VonKarman;
    double E = 0.0;
    int ud[8], wd[16];
    double ue[8], we[16];
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        element_dofs(e, ud, wd);
        for (int a = 0; a < 8; ++a) ue[a] = x[ud[a]];
        for (int a = 0; a < 16; ++a) we[a] = x[wd[a]];
        for (const auto &q : qp_) {
            const Kinematics kin = kinematics(q, ue, we);
            Eigen::Vector3d z = kin.e - prestrain_at(e, q);
            if (nl) z += Eigen::Vector3d(0.5 * kin.g[0] * kin.g[0], 0.5 * kin.g[1] * kin.g[1], kin.g[0] * kin.g[1]);
            const Eigen::Vector3d f = force_at(e, q);
            const double W = 0.5 * (z.dot(A * z) + z.dot(B * kin.k) + kin.k.dot(C * kin.k)) -
                             (f[0] * kin.u[0] + f[1] * kin.u[1] + f[2] * kin.w);
            E += q.weight * W;
        }
    }
    return E;
}

Eigen::VectorXd PlateProblem::gradient(const Eigen::VectorXd &x) const {
    if (x.size() != size()) throw ContractError("plate state has the wrong size");
    const Matrix3d &A = tensors_.a_hom, &B = tensors_.b_hom, &C = tensors_.c_hom;
    const bool nl = model_ == PlateModel::VonKarman;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(size());
    int ud[8], wd[16];
    double ue[8], we[16];
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        element_dofs(e, ud, wd);
        for (int a = 0; a < 8; ++a) ue[a] = x[ud[a]];
        for (int a = 0; a < 16; ++a) we[a] = x[wd[a]];
        Eigen::Matrix<double, 8, 1> gu = Eigen::Matrix<double, 8, 1>::Zero();
        Eigen::Matrix<double, 16, 1> gw = Eigen::Matrix<double, 16, 1>::Zero();
        for (const auto &q : qp_) {
            const Kinematics kin = kinematics(q, ue, we);
            Eigen::Vector3d z = kin.e - prestrain_at(e, q);
            Eigen::Matrix<double, 3, 16> G = Eigen::Matrix<double, 3, 16>::Zero();
            if (nl) {
                z += Eigen::Vector3d(0.5 * kin.g[0] * kin.g[0], 0.5 * kin.g[1] * kin.g[1], kin.g[0] * kin.g[1]);
                G.row(0) = kin.g[0] * q.dH.row(0);
                G.row(1) = kin.g[1] * q.dH.row(1);
                G.row(2) = kin.g[0] * q.dH.row(1) + kin.g[1] * q.dH.row(0);
            }
            const Eigen::Vector3d n = A * z + 0.5 * B * kin.k;
            const Eigen::Vector3d m = 0.5 * B.transpose() * z + C * kin.k;
            const Eigen::Vector3d f = force_at(e, q);
            gu += q.weight * kin.Bm.transpose() * n;
            for (int c = 0; c < 4; ++c) {
                gu[2 * c] -= q.weight * f[0] * q.N[c];
                gu[2 * c + 1] -= q.weight * f[1] * q.N[c];
            }
            gw += q.weight * (G.transpose() * n + q.d2H.transpose() * m - f[2] * q.H);
        }
        for (int a = 0; a < 8; ++a) g[ud[a]] += gu[a];
        for (int a = 0; a < 16; ++a) g[wd[a]] += gw[a];
    }
    return g;
}

Eigen::SparseMatrix<double> PlateProblem::hessian(const Eigen::VectorXd &x) const {
    if (x.size() != size()) throw ContractError("plate state has the wrong size");
    const Matrix3d &A = tensors_.a_hom, &B = tensors_.b_hom, &C = tensors_.c_hom;
    const bool nl = model_ == PlateModel::VonKarman;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh_.num_elements()) * 576);
    int ud[8], wd[16];
    double ue[8], we[16];
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        element_dofs(e, ud, wd);
        for (int a = 0; a < 8; ++a) ue[a] = x[ud[a]];
        for (int a = 0; a < 16; ++a) we[a] = x[wd[a]];
        Mat24 K = Mat24::Zero();
        for (const auto &q : qp_) {
            const Kinematics kin = kinematics(q, ue, we);
            Eigen::Vector3d z = kin.e - prestrain_at(e, q);
            Eigen::Matrix<double, 3, 24> Dz = Eigen::Matrix<double, 3, 24>::Zero();
            Eigen::Matrix<double, 3, 24> Dk = Eigen::Matrix<double, 3, 24>::Zero();
            Dz.leftCols<8>() = kin.Bm;
            Dk.rightCols<16>() = q.d2H;
            if (nl) {
                z += Eigen::Vector3d(0.5 * kin.g[0] * kin.g[0], 0.5 * kin.g[1] * kin.g[1], kin.g[0] * kin.g[1]);
                Dz.block<1, 16>(0, 8) = kin.g[0] * q.dH.row(0);
                Dz.block<1, 16>(1, 8) = kin.g[1] * q.dH.row(1);
                Dz.block<1, 16>(2, 8) = kin.g[0] * q.dH.row(1) + kin.g[1] * q.dH.row(0);
            }
            const Eigen::Matrix<double, 3, 24> ADz = A * Dz;
            const Eigen::Matrix<double, 3, 24> BDk = B * Dk;
            K.noalias() += q.weight * (Dz.transpose() * ADz + 0.5 * (Dz.transpose() * BDk + BDk.transpose() * Dz) +
                                       Dk.transpose() * (C * Dk));
            if (nl) {
                const Eigen::Vector3d n = A * z + 0.5 * B * kin.k;
                const Eigen::Matrix<double, 16, 1> d1 = q.dH.row(0).transpose(), d2 = q.dH.row(1).transpose();
                K.bottomRightCorner<16, 16>().noalias() +=
                    q.weight * (n[0] * d1 * d1.transpose() + n[1] * d2 * d2.transpose() +
                                n[2] * (d1 * d2.transpose() + d2 * d1.transpose()));
            }
        }
        int gd[24];
        for (int a = 0; a < 8; ++a) gd[a] = ud[a];
        for (int a = 0; a < 16; ++a) gd[8 + a] = wd[a];
        for (int r = 0; r < 24; ++r)
            for (int c = 0; c < 24; ++c) trip.emplace_back(gd[r], gd[c], K(r, c));
    }
    Eigen::SparseMatrix<double> H(size(), size());
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

Eigen::Vector3d PlateProblem::evaluate(const Eigen::VectorXd &x, const Eigen::Vector2d &p) const {
    const double px = std::clamp(p[0], 0.0, mesh_.L), py = std::clamp(p[1], 0.0, mesh_.L);
    const int i = std::min(static_cast<int>(px / mesh_.hx), mesh_.nx - 1);
    const int j = std::min(static_cast<int>(py / mesh_.hy), mesh_.ny - 1);
    const double t = px / mesh_.hx - i, s = py / mesh_.hy - j;
    const Hermite1D hxd = hermite(t, mesh_.hx), hyd = hermite(s, mesh_.hy);
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    for (int c = 0; c < 4; ++c) {
        const int cx = kQuadCorners[c][0], cy = kQuadCorners[c][1];
        const int n = mesh_.node(i + cx, j + cy);
        const double N = (cx ? t : 1 - t) * (cy ? s : 1 - s);
        out[0] += N * x[kPlateDofs * n + kU1];
        out[1] += N * x[kPlateDofs * n + kU2];
        const int vx = 2 * cx, sx = 2 * cx + 1, vy = 2 * cy, sy = 2 * cy + 1;
        out[2] += hxd.v[vx] * hyd.v[vy] * x[kPlateDofs * n + kW] + hxd.v[sx] * hyd.v[vy] * x[kPlateDofs * n + kWx] +
                  hxd.v[vx] * hyd.v[sy] * x[kPlateDofs * n + kWy] + hxd.v[sx] * hyd.v[sy] * x[kPlateDofs * n + kWxy];
    }
    return out;
}

std::vector<Eigen::Vector3d> PlateProblem::membrane_strains(const Eigen::VectorXd &x) const {
    std::vector<Eigen::Vector3d> out;
    int ud[8], wd[16];
    double ue[8], we[16];
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        element_dofs(e, ud, wd);
        for (int a = 0; a < 8; ++a) ue[a] = x[ud[a]];
        for (int a = 0; a < 16; ++a) we[a] = x[wd[a]];
        for (const auto &q : qp_) out.push_back(kinematics(q, ue, we).e);
    }
    return out;
}

Eigen::VectorXd PlateProblem::linear_form_of(const ExactFn &u) const {
    const Matrix3d &A = tensors_.a_hom, &B = tensors_.b_hom, &C = tensors_.c_hom;
    Eigen::VectorXd F = Eigen::VectorXd::Zero(size());
    int ud[8], wd[16];
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        element_dofs(e, ud, wd);
        const Eigen::Vector2d x0((e % mesh_.nx) * mesh_.hx, (e / mesh_.nx) * mesh_.hy);
        double dummy[24] = {0};
        for (const auto &q : qp_) {
            const ExactField ex = u(x0 + q.xi);
            const Eigen::Vector3d z(ex.u1_x, ex.u2_y, ex.u1_y + ex.u2_x);
            const Eigen::Vector3d k(ex.w_xx, ex.w_yy, 2 * ex.w_xy);
            const Eigen::Vector3d n = A * z + 0.5 * B * k;
            const Eigen::Vector3d m = 0.5 * B.transpose() * z + C * k;
            const Kinematics kin = kinematics(q, dummy, dummy + 8);
            const Eigen::Matrix<double, 8, 1> fu = q.weight * kin.Bm.transpose() * n;
            const Eigen::Matrix<double, 16, 1> fw = q.weight * q.d2H.transpose() * m;
            for (int a = 0; a < 8; ++a) F[ud[a]] += fu[a];
            for (int a = 0; a < 16; ++a) F[wd[a]] += fw[a];
        }
    }
    return F;
}

double PlateProblem::linear_energy_of(const ExactFn &u) const {
    const Matrix3d &A = tensors_.a_hom, &B = tensors_.b_hom, &C = tensors_.c_hom;
    double a = 0.0;
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const Eigen::Vector2d x0((e % mesh_.nx) * mesh_.hx, (e / mesh_.nx) * mesh_.hy);
        for (const auto &q : qp_) {
            const ExactField ex = u(x0 + q.xi);
            const Eigen::Vector3d z(ex.u1_x, ex.u2_y, ex.u1_y + ex.u2_x);
            const Eigen::Vector3d k(ex.w_xx, ex.w_yy, 2 * ex.w_xy);
            a += q.weight * (z.dot(A * z) + z.dot(B * k) + k.dot(C * k));
        }
    }
    return a;
}

} // namespace weavehom
