#include "nozzle/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nozzle {

namespace {

using Triplet = Eigen::Triplet<double>;

bool is_fixed(BoundaryKind k) { return k != BoundaryKind::Neumann; }

struct Stencil1D {
    int idx[2] = {0, 0};
    double w[2] = {0.0, 0.0};
    int count = 0;
};

// Interpolation weights across the eta-face line jv from rows jv-1 and jv. Axisymmetric
// grids interpolate linearly in eta^2 so that psi ~ r^2 is reproduced exactly.
Stencil1D eta_stencil(const MappedGrid& g, int jv) {
    Stencil1D s;
    if (jv == 0) {
        s.idx[0] = 0;
        s.w[0] = 1.0;
        s.count = 1;
        return s;
    }
    if (jv == g.n_eta()) {
        s.idx[0] = g.n_eta() - 1;
        s.w[0] = 1.0;
        s.count = 1;
        return s;
    }
    s.idx[0] = jv - 1;
    s.idx[1] = jv;
    s.count = 2;
    if (g.axisymmetric()) {
        const double a = g.eta_center(jv - 1), b = g.eta_center(jv), v = g.eta_face(jv);
        const double wb = (v * v - a * a) / (b * b - a * a);
        s.w[0] = 1.0 - wb;
        s.w[1] = wb;
    } else {
        s.w[0] = s.w[1] = 0.5;
    }
    return s;
}

Stencil1D xi_stencil(const MappedGrid& g, int iv) {
    Stencil1D s;
    if (iv == 0 || iv == g.n_xi()) {
        s.idx[0] = iv == 0 ? 0 : g.n_xi() - 1;
        s.w[0] = 1.0;
        s.count = 1;
        return s;
    }
    s.idx[0] = iv - 1;
    s.idx[1] = iv;
    s.w[0] = s.w[1] = 0.5;
    s.count = 2;
    return s;
}

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

VertexMap vertex_map(const MappedGrid& g, const BoundarySpec& bc) {
    const int nx = g.n_xi(), ne = g.n_eta();
    const int nv = (nx + 1) * (ne + 1);
    VertexMap map;
    map.offset = Eigen::VectorXd::Zero(nv);
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(nv) * 4);

    for (int jv = 0; jv <= ne; ++jv) {
        for (int iv = 0; iv <= nx; ++iv) {
            const int v = jv * (nx + 1) + iv;
            const SideCondition* eta_side = jv == 0 ? &bc.lower : jv == ne ? &bc.upper : nullptr;
            const SideCondition* xi_side = iv == 0 ? &bc.inlet : iv == nx ? &bc.outlet : nullptr;
            if (eta_side && is_fixed(eta_side->kind)) {
                map.offset[v] = eta_side->value(g.xi_face(iv));
                continue;
            }
            if (xi_side && is_fixed(xi_side->kind)) {
                map.offset[v] = xi_side->value(g.eta_face(jv));
                continue;
            }
            const Stencil1D sx = xi_stencil(g, iv);
            const Stencil1D se = eta_stencil(g, jv);
            for (int a = 0; a < se.count; ++a) {
                for (int b = 0; b < sx.count; ++b) {
                    trip.emplace_back(v, se.idx[a] * nx + sx.idx[b], se.w[a] * sx.w[b]);
                }
            }
        }
    }
    map.weights.resize(nv, nx * ne);
    map.weights.setFromTriplets(trip.begin(), trip.end());
    return map;
}

Field vertex_values(const MappedGrid& g, const BoundarySpec& bc, const Field& cells) {
    const VertexMap map = vertex_map(g, bc);
    const Eigen::Map<const Eigen::VectorXd> c(cells.data(), cells.size());
    const Eigen::VectorXd v = map.weights * c + map.offset;
    Field out(g.n_eta() + 1, g.n_xi() + 1);
    Eigen::Map<Eigen::VectorXd>(out.data(), out.size()) = v;
    return out;
}

LinearSystem assemble(const EllipticProblem& problem) {
    if (!problem.grid) throw AssemblyError("elliptic problem has no grid");
    const MappedGrid& g = *problem.grid;
    const int nx = g.n_xi(), ne = g.n_eta();
    const Field& k = problem.coefficient;
    if (k.rows() != ne || k.cols() != nx || problem.source.rows() != ne || problem.source.cols() != nx) {
        throw AssemblyError("coefficient/source shape does not match the grid");
    }
    for (int j = 0; j < ne; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!(k(j, i) > 0.0) || !std::isfinite(k(j, i))) {
                throw AssemblyError("non-positive diffusion coefficient at cell (" + std::to_string(j) + ", " +
                                    std::to_string(i) + ")");
            }
        }
    }
    const BoundarySpec& bc = problem.boundary;
    if (bc.inlet.kind == BoundaryKind::Axis || bc.outlet.kind == BoundaryKind::Axis ||
        bc.upper.kind == BoundaryKind::Axis) {
        throw AssemblyError("the axis condition applies to the lower side only");
    }

    const double dxi = g.d_xi(), deta = g.d_eta();
    const VertexMap vm = vertex_map(g, bc);
    auto cell = [nx](int j, int i) { return j * nx + i; };
    auto vert = [nx](int jv, int iv) { return jv * (nx + 1) + iv; };

    LinearSystem sys;
    sys.grid = problem.grid;
    sys.rhs = Eigen::VectorXd::Zero(nx * ne);
    std::vector<Triplet> a_trip, c_trip;
    a_trip.reserve(static_cast<std::size_t>(nx) * ne * 5);
    c_trip.reserve(static_cast<std::size_t>(nx) * ne * 16);

    for (int j = 0; j < ne; ++j) {
        for (int i = 0; i < nx; ++i) sys.rhs[cell(j, i)] += problem.source(j, i) * g.measure()(j, i);
    }

    // coef * (psi_vA - psi_vB) added to the left-hand side of `row`.
    auto add_cross = [&](int row, double coef, int va, int vb) {
        if (coef == 0.0) return;
        for (SparseMatrix::InnerIterator it(vm.weights, va); it; ++it) c_trip.emplace_back(row, it.col(), coef * it.value());
        for (SparseMatrix::InnerIterator it(vm.weights, vb); it; ++it) c_trip.emplace_back(row, it.col(), -coef * it.value());
        sys.rhs[row] -= coef * (vm.offset[va] - vm.offset[vb]);
    };

    // xi-faces
    for (int j = 0; j < ne; ++j) {
        const double eta = g.eta_center(j);
        for (int i = 0; i <= nx; ++i) {
            const Metric m = g.metric(g.xi_face(i), eta);
            const int vb = vert(j, i), vt = vert(j + 1, i);
            if (i > 0 && i < nx) {
                const int l = cell(j, i - 1), r = cell(j, i);
                const double kf = harmonic(k(j, i - 1), k(j, i));
                const double t = kf * m.g11() * deta / dxi;
                a_trip.emplace_back(l, l, t);
                a_trip.emplace_back(r, r, t);
                a_trip.emplace_back(l, r, -t);
                a_trip.emplace_back(r, l, -t);
                add_cross(l, -kf * m.g12(), vt, vb);
                add_cross(r, kf * m.g12(), vt, vb);
                continue;
            }
            const SideCondition& side = i == 0 ? bc.inlet : bc.outlet;
            if (side.kind == BoundaryKind::Neumann) continue;
            const int p = cell(j, i == 0 ? 0 : nx - 1);
            const double kf = k(j, i == 0 ? 0 : nx - 1);
            const double t = kf * m.g11() * deta / (0.5 * dxi);
            a_trip.emplace_back(p, p, t);
            sys.rhs[p] += t * side.value(eta);
            add_cross(p, (i == 0 ? 1.0 : -1.0) * kf * m.g12(), vt, vb);
        }
    }

    // eta-faces
    for (int j = 0; j <= ne; ++j) {
        const double eta = g.eta_face(j);
        for (int i = 0; i < nx; ++i) {
            const double xi = g.xi_center(i);
            const Metric m = g.metric(xi, eta);
            const int vl = vert(j, i), vr = vert(j, i + 1);
            if (j > 0 && j < ne) {
                const int b = cell(j - 1, i), t_ = cell(j, i);
                const double kf = harmonic(k(j - 1, i), k(j, i));
                const double t = kf * m.g22() * dxi / deta;
                a_trip.emplace_back(b, b, t);
                a_trip.emplace_back(t_, t_, t);
                a_trip.emplace_back(b, t_, -t);
                a_trip.emplace_back(t_, b, -t);
                add_cross(b, -kf * m.g12(), vr, vl);
                add_cross(t_, kf * m.g12(), vr, vl);
                continue;
            }
            const SideCondition& side = j == 0 ? bc.lower : bc.upper;
            if (side.kind == BoundaryKind::Neumann) continue;
            const int p = cell(j == 0 ? 0 : ne - 1, i);
            const double kf = k(j == 0 ? 0 : ne - 1, i);
            double t = kf * m.g22() * dxi / (0.5 * deta);
            if (side.kind == BoundaryKind::Axis) t *= 2.0;
            a_trip.emplace_back(p, p, t);
            sys.rhs[p] += t * side.value(xi);
            add_cross(p, (j == 0 ? 1.0 : -1.0) * kf * m.g12(), vr, vl);
        }
    }

    sys.matrix.resize(nx * ne, nx * ne);
    sys.matrix.setFromTriplets(a_trip.begin(), a_trip.end());
    sys.cross.resize(nx * ne, nx * ne);
    sys.cross.setFromTriplets(c_trip.begin(), c_trip.end());
    sys.cross.prune(0.0);
    return sys;
}

Eigen::VectorXd pcg_sgs(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                        double rel_tol, int max_iterations, int* iterations, std::vector<double>* history) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd diag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        diag[i] = a.coeff(i, i);
        if (!(diag[i] > 0.0)) throw LinearSolverError("non-positive diagonal in CG matrix", {});
    }
    auto precondition = [&](const Eigen::VectorXd& r) {
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = r[i];
            for (SparseMatrix::InnerIterator it(a, i); it && it.col() < i; ++it) s -= it.value() * y[it.col()];
            y[i] = s / diag[i];
        }
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            double s = 0.0;
            for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
                if (it.col() > i) s += it.value() * y[it.col()];
            }
            y[i] -= s / diag[i];
        }
        return y;
    };

    Eigen::VectorXd x = x0.size() == n ? x0 : Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (iterations) *iterations = 0;
    if (bnorm == 0.0) return Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b - a * x;
    double rnorm = r.norm();
    if (history) history->push_back(rnorm / bnorm);
    if (rnorm <= rel_tol * bnorm) return x;
    Eigen::VectorXd z = precondition(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (int it = 1; it <= max_iterations; ++it) {
        const Eigen::VectorXd ap = a * p;
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) {
            throw LinearSolverError("CG breakdown: p.Ap = " + std::to_string(pap),
                                    history ? *history : std::vector<double>{});
        }
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        rnorm = r.norm();
        if (history) history->push_back(rnorm / bnorm);
        if (iterations) *iterations = it;
        if (rnorm <= rel_tol * bnorm) return x;
        z = precondition(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw LinearSolverError("CG did not reach relative residual " + std::to_string(rel_tol) + " in " +
                                std::to_string(max_iterations) + " iterations",
                            history ? *history : std::vector<double>{});
}

Field solve_linear(const LinearSystem& sys, const LinearSolveOptions& opt, const Field& initial,
                   LinearSolveReport* report) {
    const MappedGrid& g = *sys.grid;
    const Eigen::Index n = sys.rhs.size();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (initial.size() == n) x = Eigen::Map<const Eigen::VectorXd>(initial.data(), n);

    LinearSolveReport local;
    LinearSolveReport& rep = report ? *report : local;
    rep = LinearSolveReport{};

    const double bnorm = sys.rhs.norm();
    Field out(g.n_eta(), g.n_xi());
    if (bnorm == 0.0) {
        out.setZero();
        return out;
    }
    const bool has_cross = sys.cross.nonZeros() > 0;
    const double target = opt.tolerance * bnorm;
    double previous = std::numeric_limits<double>::infinity();
    for (int c = 0; c <= opt.max_corrections; ++c) {
        Eigen::VectorXd r = sys.rhs - sys.matrix * x;
        if (has_cross) r -= sys.cross * x;
        const double rnorm = r.norm();
        rep.history.push_back(rnorm / bnorm);
        rep.relative_residual = rnorm / bnorm;
        if (rnorm <= target) {
            rep.corrections = c;
            Eigen::Map<Eigen::VectorXd>(out.data(), n) = x;
            return out;
        }
        if (c > 2 && rnorm > previous) {
            throw LinearSolverError("deferred correction diverged", rep.history);
        }
        previous = rnorm;
        const double inner = has_cross ? std::max(0.5 * target / rnorm, 1e-3) : 0.5 * target / rnorm;
        int its = 0;
        const Eigen::VectorXd dx = pcg_sgs(sys.matrix, r, Eigen::VectorXd(), std::min(inner, 0.5),
                                           opt.max_iterations, &its);
        rep.cg_iterations += its;
        x += dx;
    }
    throw LinearSolverError("deferred correction did not converge in " + std::to_string(opt.max_corrections) +
                                " corrections",
                            rep.history);
}

ErrorNorms mms_error(const Field& exact, const Field& computed, const MappedGrid& grid) {
    const Field e = (exact - computed).abs();
    return {std::sqrt((e.square() * grid.measure()).sum()), e.maxCoeff()};
}

Field sample(const MappedGrid& grid, const std::function<double(double, double)>& f) {
    Field out(grid.n_eta(), grid.n_xi());
    for (int j = 0; j < grid.n_eta(); ++j) {
        for (int i = 0; i < grid.n_xi(); ++i) out(j, i) = f(grid.x()(j, i), grid.y()(j, i));
    }
    return out;
}

}  // namespace nozzle
