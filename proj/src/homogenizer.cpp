#include <cmath>

#include "weavehom/errors.hpp"
#include "weavehom/homogenizer.hpp"

namespace weavehom {

namespace {

Vector6d unit_strain_voigt(int J) { return to_voigt_strain(unit_strain(J)); }

double frobenius(const Matrix3d &m) { return m.norm(); }

} // namespace

int plane_index(int alpha, int beta) {
    if (alpha < 0 || alpha > 1 || beta < 0 || beta > 1) throw ContractError("in-plane index out of range");
    return alpha == beta ? alpha : 2;
}

Matrix3d unit_strain(int J) {
    Matrix3d m = Matrix3d::Zero();
    const auto [a, b] = kPlanePairs.at(J);
    m(a, b) = 1.0;
    m(b, a) = 1.0;
    return m;
}

CorrectorSet solve_cell_problems(const CellMesh &mesh, const ElasticTensor &tensor,
                                 const HomogenizationOptions &options) {
    if (!mesh.periodic()) throw ContractError("cell problems need a periodic mesh");
    std::vector<LoadFunctional> loads;
    for (int J = 0; J < 3; ++J) {
        const Matrix3d M = options.load_scale * unit_strain(J);
        loads.push_back(strain_load(mesh, tensor, [M](std::size_t, const Vec3 &) { return M; }, -1.0));
    }
    for (int J = 0; J < 3; ++J) {
        const Matrix3d M = options.load_scale * unit_strain(J);
        loads.push_back(strain_load(mesh, tensor, [M](std::size_t, const Vec3 &y) { return Matrix3d(y[2] * M); }, 1.0));
    }
    const SparseSystem sys = assemble(mesh, tensor, ConstraintMap::periodic(mesh), loads, options.element);
    CorrectorSet out;
    out.element = options.element;
    out.cell_volume = mesh.volume();
    for (int J = 0; J < 3; ++J) {
        out.chi_m[J] = solve(sys, J, options.solve, &out.reports[J]);
        out.chi_b[J] = solve(sys, 3 + J, options.solve, &out.reports[3 + J]);
    }
    return out;
}

PlateTensors compute_plate_tensors(const CellMesh &mesh, const CorrectorSet &cs, const ElasticTensor &tensor,
                                   PlateTensorDiagnostics *diag) {
    Matrix3d A = Matrix3d::Zero(), B = Matrix3d::Zero(), C = Matrix3d::Zero();
    Matrix3d Al = Matrix3d::Zero(), Cl = Matrix3d::Zero(), Bp = Matrix3d::Zero(), Cp = Matrix3d::Zero();
    std::array<Vector6d, 3> Mv;
    for (int J = 0; J < 3; ++J) Mv[J] = unit_strain_voigt(J);

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Matrix6d &Ce = tensor.voigt(mesh.material_tag[e]);
        for (const auto &q : element_quadrature(mesh, e, cs.element)) {
            const double y3 = q.y[2];
            std::array<Vector6d, 3> sm, sb, em, eb;
            for (int J = 0; J < 3; ++J) {
                em[J] = strain_at(mesh, e, q, cs.chi_m[J]);
                eb[J] = strain_at(mesh, e, q, cs.chi_b[J]);
                sm[J] = Ce * (Mv[J] + em[J]);
                sb[J] = Ce * (-y3 * Mv[J] + eb[J]);
            }
            for (int I = 0; I < 3; ++I) {
                const Vector6d sbp = Ce * (y3 * Mv[I] + eb[I]);
                for (int J = 0; J < 3; ++J) {
                    A(I, J) += q.dv * sm[I].dot(Mv[J] + em[J]);
                    B(I, J) += q.dv * sm[I].dot(-y3 * Mv[J] + eb[J]);
                    C(I, J) += q.dv * sb[I].dot(-y3 * Mv[J] + eb[J]);
                    Al(I, J) += q.dv * sm[I].dot(Mv[J]);
                    Cl(I, J) += q.dv * sb[I].dot(-y3 * Mv[J]);
                    Bp(I, J) += q.dv * sbp.dot(Mv[J]);
                    Cp(I, J) += q.dv * sbp.dot(y3 * Mv[J]);
                }
            }
        }
    }
    // integrals over M^J (both shear slots) -> tensor components
    const double vol = cs.cell_volume > 0 ? cs.cell_volume : mesh.volume();
    auto normalize = [&](Matrix3d &m) {
        for (int I = 0; I < 3; ++I)
            for (int J = 0; J < 3; ++J) m(I, J) /= vol * kMultiplicity[I] * kMultiplicity[J];
    };
    for (Matrix3d *m : {&A, &B, &C, &Al, &Cl, &Bp, &Cp}) normalize(*m);

    PlateTensors t;
    t.a_hom = 0.5 * (A + A.transpose());
    t.b_hom = B;
    t.c_hom = 0.5 * (C + C.transpose());
    t.cell_volume = vol;
    if (diag) {
        diag->a_linear = Al;
        diag->c_linear = Cl;
        diag->b_printed = Bp;
        diag->c_printed = Cp;
        const double na = frobenius(t.a_hom);
        const double nc = frobenius(t.c_hom);
        diag->galerkin_a = (A - Al).cwiseAbs().maxCoeff() / na;
        diag->galerkin_c = (C - Cl).cwiseAbs().maxCoeff() / nc;
        diag->printed_discrepancy =
            std::max((B - Bp).cwiseAbs().maxCoeff(), (C - Cp).cwiseAbs().maxCoeff()) / na;
    }
    return t;
}

PreStrainField PreStrainField::uniform(const Matrix3d &e) {
    PreStrainField f;
    f.kind = Kind::Constant;
    f.constant = e;
    f.validate();
    return f;
}

PreStrainField PreStrainField::by_tag(std::map<int, Matrix3d> table) {
    PreStrainField f;
    f.kind = Kind::PerTag;
    f.per_tag = std::move(table);
    f.validate();
    return f;
}

PreStrainField PreStrainField::from_function(std::function<Matrix3d(int, const Vec3 &)> fn) {
    if (!fn) throw ParameterError("pre-strain sampler is empty");
    PreStrainField f;
    f.kind = Kind::Sampled;
    f.sampled = std::move(fn);
    return f;
}

namespace {

void check_strain(const Matrix3d &e, const std::string &what) {
    if (!e.allFinite()) throw ParameterError(what + " is not finite");
    const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
    if ((e - e.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw ParameterError(what + " is not symmetric");
}

} // namespace

Matrix3d PreStrainField::at(int tag, const Vec3 &y) const {
    switch (kind) {
    case Kind::Constant:
        return constant;
    case Kind::PerTag: {
        auto it = per_tag.find(tag);
        if (it == per_tag.end()) it = per_tag.find(-1);
        return it == per_tag.end() ? Matrix3d::Zero() : it->second;
    }
    case Kind::Sampled: {
        const Matrix3d e = sampled(tag, y);
        check_strain(e, "sampled pre-strain");
        return e;
    }
    }
    return Matrix3d::Zero();
}

void PreStrainField::validate() const {
    if (kind == Kind::Constant) check_strain(constant, "pre-strain");
    for (const auto &[tag, e] : per_tag) check_strain(e, "pre-strain of tag " + std::to_string(tag));
}

PrestressResult solve_prestress(const CellMesh &mesh, const ElasticTensor &tensor, const PreStrainField &e_star,
                                const CorrectorSet &cs, const PlateTensors &tensors,
                                const HomogenizationOptions &options) {
    e_star.validate();
    const auto load = strain_load(
        mesh, tensor, [&](std::size_t e, const Vec3 &y) { return e_star.at(mesh.material_tag[e], y); }, 1.0);
    const SparseSystem sys = assemble(mesh, tensor, ConstraintMap::periodic(mesh), {load}, cs.element);
    PrestressResult r;
    r.chi_p = solve(sys, 0, options.solve, &r.report);

    Eigen::Vector3d s = Eigen::Vector3d::Zero(), sp = Eigen::Vector3d::Zero(), mom = Eigen::Vector3d::Zero();
    std::array<Vector6d, 3> Mv;
    for (int J = 0; J < 3; ++J) Mv[J] = unit_strain_voigt(J);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const int tag = mesh.material_tag[e];
        const Matrix6d &Ce = tensor.voigt(tag);
        for (const auto &q : element_quadrature(mesh, e, cs.element)) {
            const Vector6d tau = Ce * to_voigt_strain(e_star.at(tag, q.y));
            const Vector6d ep = strain_at(mesh, e, q, r.chi_p);
            for (int J = 0; J < 3; ++J) {
                s[J] += q.dv * tau.dot(Mv[J] + strain_at(mesh, e, q, cs.chi_m[J]));
                sp[J] += q.dv * tau.dot(Mv[J] + ep);
                mom[J] += q.dv * tau.dot(-q.y[2] * Mv[J] + strain_at(mesh, e, q, cs.chi_b[J]));
            }
        }
    }
    const double vol = tensors.cell_volume;
    for (int J = 0; J < 3; ++J) {
        s[J] /= vol * kMultiplicity[J];
        sp[J] /= vol * kMultiplicity[J];
        mom[J] /= vol * kMultiplicity[J];
    }
    auto to_strain = [&](const Eigen::Vector3d &rhs) {
        const Eigen::Vector3d v = tensors.a_hom.ldlt().solve(rhs);
        Eigen::Matrix2d E;
        E << v[0], 0.5 * v[2], 0.5 * v[2], v[1];
        return E;
    };
    if (s.isZero(0.0)) {
        r.effective.setZero();
    } else {
        r.effective = to_strain(s);
    }
    r.printed = sp.isZero(0.0) ? Eigen::Matrix2d::Zero() : to_strain(sp);
    r.moment = mom;
    return r;
}

std::vector<PrestressResult> solve_prestress_samples(const CellMesh &mesh, const ElasticTensor &tensor,
                                                     const std::vector<Eigen::Vector2d> &samples,
                                                     const std::function<PreStrainField(const Eigen::Vector2d &)> &field,
                                                     const CorrectorSet &correctors, const PlateTensors &tensors,
                                                     const HomogenizationOptions &options) {
    std::vector<PrestressResult> out;
    out.reserve(samples.size());
    for (const auto &x : samples) out.push_back(solve_prestress(mesh, tensor, field(x), correctors, tensors, options));
    return out;
}

} // namespace weavehom
