#include <cmath>

#include "weavehom/errors.hpp"
#include "weavehom/verify.hpp"

namespace weavehom {

VerifyResult verify_homogenization_limit(const WeaveParams &params, const ElasticTensor &tensor,
                                         const PlateTensors &tensors, const VerifyOptions &options) {
    params.validate();
    if (options.n_periods.empty()) throw ParameterError("verify needs at least one n_periods value");
    VerifyResult res;
    res.cell_volume = tensors.cell_volume;

    const PlateMesh pm = PlateMesh::build(options.plate_nx, options.plate_nx, params.L);
    LoadSpec load;
    load.f = options.f;
    const PlateProblem plate(pm, tensors, load, PlateModel::Linear);
    res.j_lin_min = plate.energy(solve_linear(plate, boundary_data(pm, PlateBC::Gamma)).dofs);
    if (!(res.j_lin_min < 0.0)) throw SolverError("homogenized plate energy is not negative; check the force");

    // base area of one cell in cell coordinates
    constexpr double kCellBase = 4.0;
    for (int n : options.n_periods) {
        if (n < 1) throw ParameterError("verify.n_periods entries must be >= 1");
        WeaveParams p = params;
        p.n_periods = n;
        p.epsilon = params.L / (2.0 * n);
        const double eps = p.epsilon;
        const CellMesh mesh = build_textile_mesh(p);
        ConstraintMap cm = ConstraintMap::free(mesh.num_nodes());
        for (int node : mesh.clamped_nodes)
            for (int c = 0; c < 3; ++c) cm.fix(node, c, 0.0);
        LoadFunctional lf;
        const Vec3 f(eps * eps * options.f[0], eps * eps * options.f[1], eps * eps * eps * options.f[2]);
        lf.body_force = [f](std::size_t, const Vec3 &) { return f; };
        const SparseSystem sys = assemble(mesh, tensor, cm, {lf});
        const DisplacementField u = solve(sys, 0, options.solve);
        VerifyRow row;
        row.n_periods = n;
        row.epsilon = eps;
        row.n_dofs = static_cast<std::size_t>(sys.size());
        // at the minimizer the load work is twice the strain energy
        row.m_eps = -strain_energy(mesh, tensor, u, sys.element);
        row.m_scaled = row.m_eps / std::pow(eps, 5);
        row.ratio = row.m_scaled / (res.cell_volume / kCellBase * res.j_lin_min);
        row.ratio_literal = row.m_scaled / (res.cell_volume * res.j_lin_min);
        row.distance = std::abs(row.ratio - 1.0);
        res.rows.push_back(row);
    }
    res.distance_decreases = res.rows.size() >= 2;
    for (std::size_t i = 1; i < res.rows.size(); ++i)
        if (!(res.rows[i].distance < res.rows[i - 1].distance)) res.distance_decreases = false;
    return res;
}

} // namespace weavehom
