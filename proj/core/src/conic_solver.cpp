#include "windplan/conic/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace windplan::conic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseRow = std::vector<std::pair<int, double>>;

/// Program in the conic standard form
///   min c'x  s.t.  Ax = b,  Gx + s = h,  s in K,
/// with K = nonnegative orthant rows followed by SOC blocks.
struct StandardForm {
    int n = 0, p = 0, m = 0;
    VectorXd c, b, h;
    std::vector<SparseRow> a_rows;
    std::vector<SparseRow> g_rows;
    int n_orthant = 0;
    std::vector<std::pair<int, int>> soc;  // (start row, length)
};

StandardForm build_standard_form(const ConicProgram& prog) {
    StandardForm sf;
    sf.n = prog.num_vars();
    sf.c.resize(sf.n);
    for (int i = 0; i < sf.n; ++i) sf.c(i) = prog.cost(i);

    for (const auto& row : prog.equalities()) {
        sf.a_rows.push_back(row.coeffs);
        sf.b.conservativeResize(sf.a_rows.size());
        sf.b(sf.a_rows.size() - 1) = row.rhs;
    }
    sf.p = static_cast<int>(sf.a_rows.size());

    std::vector<double> hvals;
    for (const auto& row : prog.inequalities()) {
        sf.g_rows.push_back(row.coeffs);
        hvals.push_back(row.rhs);
    }
    for (int i = 0; i < sf.n; ++i) {
        if (std::isfinite(prog.lower(i))) {
            sf.g_rows.push_back({{i, -1.0}});
            hvals.push_back(-prog.lower(i));
        }
        if (std::isfinite(prog.upper(i))) {
            sf.g_rows.push_back({{i, 1.0}});
            hvals.push_back(prog.upper(i));
        }
    }
    sf.n_orthant = static_cast<int>(sf.g_rows.size());

    for (const auto& block : prog.soc_blocks()) {
        int start = static_cast<int>(sf.g_rows.size());
        for (const auto& expr : block) {
            SparseRow row;
            for (auto [i, cf] : expr.terms) row.emplace_back(i, -cf);
            sf.g_rows.push_back(std::move(row));
            hvals.push_back(expr.constant);
        }
        sf.soc.emplace_back(start, static_cast<int>(block.size()));
    }
    sf.m = static_cast<int>(sf.g_rows.size());
    sf.h = Eigen::Map<VectorXd>(hvals.data(), sf.m);
    return sf;
}

void sparse_axpy(const std::vector<SparseRow>& rows, const VectorXd& v, VectorXd& out) {
    // out += rows' * v
    for (size_t r = 0; r < rows.size(); ++r)
        for (auto [i, cf] : rows[r]) out(i) += cf * v(r);
}

VectorXd row_apply(const std::vector<SparseRow>& rows, const VectorXd& x) {
    VectorXd out = VectorXd::Zero(rows.size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (auto [i, cf] : rows[r]) out(r) += cf * x(i);
    return out;
}

double soc_residual(const VectorXd& u, int start, int len) {
    double tail = u.segment(start + 1, len - 1).squaredNorm();
    return u(start) * u(start) - tail;
}

/// Nesterov-Todd scaling state for one iteration.
struct Scaling {
    VectorXd orthant_w2;  // w_i^2 = s_i / z_i on orthant rows
    std::vector<MatrixXd> soc_w;      // W per SOC block
    std::vector<MatrixXd> soc_winv;   // W^{-1}
    std::vector<MatrixXd> soc_winv2;  // W^{-2}
    VectorXd lambda;                  // scaled point, lambda = W z = W^{-1} s
};

Scaling compute_scaling(const StandardForm& sf, const VectorXd& s, const VectorXd& z) {
    Scaling sc;
    sc.orthant_w2.resize(sf.n_orthant);
    sc.lambda.resize(sf.m);
    for (int i = 0; i < sf.n_orthant; ++i) {
        sc.orthant_w2(i) = s(i) / z(i);
        sc.lambda(i) = std::sqrt(s(i) * z(i));
    }
    for (auto [start, len] : sf.soc) {
        double res_s = soc_residual(s, start, len);
        double res_z = soc_residual(z, start, len);
        res_s = std::max(res_s, 1e-300);
        res_z = std::max(res_z, 1e-300);
        VectorXd sbar = s.segment(start, len) / std::sqrt(res_s);
        VectorXd zbar = z.segment(start, len) / std::sqrt(res_z);
        double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
        VectorXd jz = zbar;
        jz.segment(1, len - 1) *= -1.0;
        VectorXd wbar = (sbar + jz) / (2.0 * gamma);
        double beta = std::pow(res_s / res_z, 0.25);
        const int k = len - 1;
        VectorXd w1 = wbar.segment(1, k);
        MatrixXd Wbar(len, len);
        Wbar(0, 0) = wbar(0);
        Wbar.block(0, 1, 1, k) = w1.transpose();
        Wbar.block(1, 0, k, 1) = w1;
        Wbar.block(1, 1, k, k) =
            MatrixXd::Identity(k, k) + w1 * w1.transpose() / (1.0 + wbar(0));
        MatrixXd W = beta * Wbar;
        MatrixXd Winv = Wbar / beta;
        Winv.block(0, 1, 1, k) *= -1.0;
        Winv.block(1, 0, k, 1) *= -1.0;
        sc.soc_w.push_back(W);
        sc.soc_winv.push_back(Winv);
        sc.soc_winv2.push_back(Winv * Winv);
        sc.lambda.segment(start, len) = W * z.segment(start, len);
    }
    return sc;
}

/// Apply W, W^{-1} blockwise.
VectorXd apply_w(const StandardForm& sf, const Scaling& sc, const VectorXd& v) {
    VectorXd out(sf.m);
    for (int i = 0; i < sf.n_orthant; ++i) out(i) = std::sqrt(sc.orthant_w2(i)) * v(i);
    for (size_t k = 0; k < sf.soc.size(); ++k) {
        auto [start, len] = sf.soc[k];
        out.segment(start, len) = sc.soc_w[k] * v.segment(start, len);
    }
    return out;
}

VectorXd apply_winv(const StandardForm& sf, const Scaling& sc, const VectorXd& v) {
    VectorXd out(sf.m);
    for (int i = 0; i < sf.n_orthant; ++i) out(i) = v(i) / std::sqrt(sc.orthant_w2(i));
    for (size_t k = 0; k < sf.soc.size(); ++k) {
        auto [start, len] = sf.soc[k];
        out.segment(start, len) = sc.soc_winv[k] * v.segment(start, len);
    }
    return out;
}

VectorXd apply_winv2(const StandardForm& sf, const Scaling& sc, const VectorXd& v) {
    VectorXd out(sf.m);
    for (int i = 0; i < sf.n_orthant; ++i) out(i) = v(i) / sc.orthant_w2(i);
    for (size_t k = 0; k < sf.soc.size(); ++k) {
        auto [start, len] = sf.soc[k];
        out.segment(start, len) = sc.soc_winv2[k] * v.segment(start, len);
    }
    return out;
}

/// Jordan product u o v.
VectorXd jordan_product(const StandardForm& sf, const VectorXd& u, const VectorXd& v) {
    VectorXd out(sf.m);
    for (int i = 0; i < sf.n_orthant; ++i) out(i) = u(i) * v(i);
    for (auto [start, len] : sf.soc) {
        out(start) = u.segment(start, len).dot(v.segment(start, len));
        out.segment(start + 1, len - 1) = u(start) * v.segment(start + 1, len - 1) +
                                          v(start) * u.segment(start + 1, len - 1);
    }
    return out;
}

/// Solve lambda o x = d.
VectorXd jordan_solve(const StandardForm& sf, const VectorXd& lambda, const VectorXd& d) {
    VectorXd out(sf.m);
    for (int i = 0; i < sf.n_orthant; ++i) out(i) = d(i) / lambda(i);
    for (auto [start, len] : sf.soc) {
        double l0 = lambda(start);
        auto l1 = lambda.segment(start + 1, len - 1);
        double det = l0 * l0 - l1.squaredNorm();
        double x0 = (l0 * d(start) - l1.dot(d.segment(start + 1, len - 1))) / det;
        out(start) = x0;
        out.segment(start + 1, len - 1) = (d.segment(start + 1, len - 1) - x0 * l1) / l0;
    }
    return out;
}

VectorXd cone_identity(const StandardForm& sf) {
    VectorXd e = VectorXd::Zero(sf.m);
    for (int i = 0; i < sf.n_orthant; ++i) e(i) = 1.0;
    for (auto [start, len] : sf.soc) e(start) = 1.0;
    return e;
}

/// Largest step alpha in [0, cap] keeping u + alpha*du inside the cone.
double max_cone_step(const StandardForm& sf, const VectorXd& u, const VectorXd& du,
                     double cap) {
    double alpha = cap;
    for (int i = 0; i < sf.n_orthant; ++i)
        if (du(i) < 0) alpha = std::min(alpha, -u(i) / du(i));
    for (auto [start, len] : sf.soc) {
        if (du(start) < 0) alpha = std::min(alpha, -u(start) / du(start));
        double a = soc_residual(du, start, len);
        double b = 2.0 * (u(start) * du(start) -
                          u.segment(start + 1, len - 1).dot(du.segment(start + 1, len - 1)));
        double c = soc_residual(u, start, len);
        if (c < 0) c = 0;
        double root = std::numeric_limits<double>::infinity();
        if (std::abs(a) < 1e-300) {
            if (b < 0) root = -c / b;
        } else {
            double disc = b * b - 4 * a * c;
            if (disc >= 0) {
                double sq = std::sqrt(disc);
                double r1 = (-b - sq) / (2 * a);
                double r2 = (-b + sq) / (2 * a);
                if (r1 > r2) std::swap(r1, r2);
                if (a > 0) {
                    if (r1 > 0) root = r1;
                } else {
                    root = r2 > 0 ? r2 : 0.0;
                }
            } else if (a < 0) {
                root = 0.0;
            }
        }
        alpha = std::min(alpha, root);
    }
    return std::max(alpha, 0.0);
}

/// Factorized reduced KKT system
///   [ G'W^{-2}G   A' ] [dx]   [d1 + G'W^{-2} d3]
///   [ A           0  ] [dy] = [d2]
/// with dz = W^{-2}(G dx - d3).
struct KktSolver {
    const StandardForm& sf;
    Eigen::PartialPivLU<MatrixXd> lu;
    MatrixXd kkt;

    explicit KktSolver(const StandardForm& sf_) : sf(sf_) {}

    void factor(const Scaling& sc) {
        const int n = sf.n, p = sf.p;
        kkt = MatrixXd::Zero(n + p, n + p);
        // H = G' W^{-2} G, orthant rows first.
        for (int r = 0; r < sf.n_orthant; ++r) {
            double wi = 1.0 / sc.orthant_w2(r);
            const auto& row = sf.g_rows[r];
            for (auto [i, ci] : row)
                for (auto [j, cj] : row) kkt(i, j) += wi * ci * cj;
        }
        for (size_t k = 0; k < sf.soc.size(); ++k) {
            auto [start, len] = sf.soc[k];
            const MatrixXd& winv2 = sc.soc_winv2[k];
            for (int bi = 0; bi < len; ++bi)
                for (int bj = 0; bj < len; ++bj) {
                    double wij = winv2(bi, bj);
                    if (wij == 0.0) continue;
                    for (auto [i, ci] : sf.g_rows[start + bi])
                        for (auto [j, cj] : sf.g_rows[start + bj])
                            kkt(i, j) += wij * ci * cj;
                }
        }
        const double reg = 1e-10;
        for (int i = 0; i < n; ++i) kkt(i, i) += reg;
        for (int r = 0; r < p; ++r) {
            for (auto [i, cf] : sf.a_rows[r]) {
                kkt(n + r, i) = cf;
                kkt(i, n + r) = cf;
            }
            kkt(n + r, n + r) = -reg;
        }
        lu.compute(kkt);
    }

    void solve(const Scaling& sc, const VectorXd& d1, const VectorXd& d2, const VectorXd& d3,
               VectorXd& dx, VectorXd& dy, VectorXd& dz) const {
        const int n = sf.n, p = sf.p;
        VectorXd w2d3 = apply_winv2(sf, sc, d3);
        VectorXd top = d1;
        sparse_axpy(sf.g_rows, w2d3, top);
        VectorXd rhs(n + p);
        rhs.head(n) = top;
        rhs.tail(p) = d2;
        VectorXd sol = lu.solve(rhs);
        // Refine against the unregularized matrix so the static regularization
        // does not bias the direction; stop when the residual stalls.
        const double reg = 1e-10;
        for (int round = 0; round < 3; ++round) {
            VectorXd resid = rhs - kkt * sol;
            resid.head(n) += reg * sol.head(n);
            resid.tail(p) -= reg * sol.tail(p);
            sol += lu.solve(resid);
        }
        dx = sol.head(n);
        dy = sol.tail(p);
        dz = apply_winv2(sf, sc, row_apply(sf.g_rows, dx) - d3);
    }
};

/// Shift a point into the cone interior along the identity.
void shift_into_cone(const StandardForm& sf, VectorXd& v) {
    double alpha = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < sf.n_orthant; ++i) alpha = std::max(alpha, -v(i));
    for (auto [start, len] : sf.soc)
        alpha = std::max(alpha, v.segment(start + 1, len - 1).norm() - v(start));
    if (alpha >= -1e-8) {
        VectorXd e = cone_identity(sf);
        v += (1.0 + alpha) * e;
    }
}

PrimalDualSolution solve_no_cones(const ConicProgram& prog, const StandardForm& sf) {
    // Pure equality-constrained LP; stationarity c + A'y = 0 decides it.
    PrimalDualSolution sol;
    const int n = sf.n, p = sf.p;
    MatrixXd kkt = MatrixXd::Zero(n + p, n + p);
    for (int i = 0; i < n; ++i) kkt(i, i) = 1e-10;
    for (int r = 0; r < p; ++r)
        for (auto [i, cf] : sf.a_rows[r]) {
            kkt(n + r, i) = cf;
            kkt(i, n + r) = cf;
        }
    VectorXd rhs(n + p);
    rhs.head(n) = -sf.c;
    rhs.tail(p) = sf.b;
    Eigen::FullPivLU<MatrixXd> lu(kkt);
    VectorXd s = lu.solve(rhs);
    sol.x = s.head(n);
    sol.eq_dual = s.tail(p);
    sol.cone_dual = VectorXd::Zero(0);
    VectorXd pr = row_apply(sf.a_rows, sol.x) - sf.b;
    VectorXd du = sf.c;
    sparse_axpy(sf.a_rows, sol.eq_dual, du);
    sol.r_primal = pr.size() ? pr.lpNorm<Eigen::Infinity>() : 0.0;
    sol.r_dual = du.lpNorm<Eigen::Infinity>();
    sol.r_gap = 0.0;
    double tol = 1e-6 * (1 + sf.b.norm() + sf.c.norm());
    if (sol.r_primal > tol)
        sol.status = SolveStatus::infeasible;
    else if (sol.r_dual > tol)
        sol.status = SolveStatus::unbounded;
    else
        sol.status = SolveStatus::optimal;
    sol.objective = prog.objective_value(sol.x);
    return sol;
}

}  // namespace

PrimalDualSolution solve_conic(const ConicProgram& program, const SolverSettings& settings) {
    StandardForm sf = build_standard_form(program);
    if (sf.m == 0) return solve_no_cones(program, sf);

    const int n = sf.n, p = sf.p, m = sf.m;
    const double degree = sf.n_orthant + static_cast<double>(sf.soc.size()) + 1.0;

    KktSolver kkt(sf);
    VectorXd x(n), y(p), z(m), s(m);

    {
        // Initial point from two W = I solves.
        Scaling id;
        id.orthant_w2 = VectorXd::Ones(sf.n_orthant);
        for (auto [start, len] : sf.soc) {
            id.soc_w.push_back(MatrixXd::Identity(len, len));
            id.soc_winv.push_back(MatrixXd::Identity(len, len));
            id.soc_winv2.push_back(MatrixXd::Identity(len, len));
        }
        id.lambda = VectorXd::Ones(m);
        kkt.factor(id);
        VectorXd dx, dy, dz;
        kkt.solve(id, VectorXd::Zero(n), sf.b, sf.h, dx, dy, dz);
        x = dx;
        s = -dz;  // s = h - Gx in the W = I system
        shift_into_cone(sf, s);
        kkt.solve(id, -sf.c, VectorXd::Zero(p), VectorXd::Zero(m), dx, dy, dz);
        y = dy;
        z = dz;
        shift_into_cone(sf, z);
    }
    double tau = 1.0, kappa = 1.0;

    PrimalDualSolution sol;
    // Norms chosen to match the standalone residual evaluation.
    const double bnorm = sf.b.size() ? sf.b.lpNorm<Eigen::Infinity>() : 0.0;
    const double hnorm = sf.h.size() ? sf.h.lpNorm<Eigen::Infinity>() : 0.0;
    const double cnorm = sf.c.lpNorm<Eigen::Infinity>();

    // Best iterate seen, in case the final iterations degrade numerically.
    double best_metric = std::numeric_limits<double>::infinity();
    VectorXd best_x = x, best_y = y, best_z = z;
    double best_tau = tau;
    int since_best = 0;

    auto metric_at = [&](const VectorXd& xx, const VectorXd& yy, const VectorXd& zz,
                         const VectorXd& ss, double tt) {
        VectorXd rxx = -sf.c * tt;
        sparse_axpy(sf.a_rows, -yy, rxx);
        sparse_axpy(sf.g_rows, -zz, rxx);
        double pr =
            std::max(p ? (row_apply(sf.a_rows, xx) - sf.b * tt).lpNorm<Eigen::Infinity>()
                       : 0.0,
                     (ss + row_apply(sf.g_rows, xx) - sf.h * tt).lpNorm<Eigen::Infinity>()) /
            tt / (1.0 + std::max(bnorm, hnorm));
        double dr = rxx.lpNorm<Eigen::Infinity>() / tt / (1.0 + cnorm);
        double pc = sf.c.dot(xx) / tt;
        double dc = -((p ? sf.b.dot(yy) : 0.0) + sf.h.dot(zz)) / tt;
        double rg = (ss.dot(zz) / (tt * tt)) / (1.0 + std::abs(pc) + std::abs(dc));
        return std::max({pr, dr, rg});
    };

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        sol.iterations = iter;
        // Residuals of the homogeneous embedding.
        VectorXd rx = -sf.c * tau;
        sparse_axpy(sf.a_rows, -y, rx);
        sparse_axpy(sf.g_rows, -z, rx);
        VectorXd ry = row_apply(sf.a_rows, x) - sf.b * tau;
        VectorXd rz = s + row_apply(sf.g_rows, x) - sf.h * tau;
        double ct = sf.c.dot(x);
        double bt = (p ? sf.b.dot(y) : 0.0) + sf.h.dot(z);
        double rtau = kappa + ct + bt;
        double mu = (s.dot(z) + tau * kappa) / degree;

        // Convergence metrics at the de-homogenized point.
        double pcost = ct / tau;
        double dcost = -bt / tau;
        double pres = std::max(ry.size() ? ry.lpNorm<Eigen::Infinity>() : 0.0,
                               rz.lpNorm<Eigen::Infinity>()) /
                      tau / (1.0 + std::max(bnorm, hnorm));
        double dres = rx.lpNorm<Eigen::Infinity>() / tau / (1.0 + cnorm);
        double gap = s.dot(z) / (tau * tau);
        double relgap = gap / (1.0 + std::abs(pcost) + std::abs(dcost));
        sol.r_primal = pres;
        sol.r_dual = dres;
        sol.r_gap = relgap;
        double metric = std::max({pres, dres, relgap});
        if (metric < best_metric) {
            best_metric = metric;
            best_x = x;
            best_y = y;
            best_z = z;
            best_tau = tau;
            since_best = 0;
        } else if (++since_best > 30) {
            break;  // no progress for a long stretch, keep the best iterate
        }
        if (pres <= settings.tol && dres <= settings.tol && relgap <= settings.tol) {
            sol.status = SolveStatus::optimal;
            break;
        }
        // Infeasibility certificates.
        if (bt < 0) {
            VectorXd cert = VectorXd::Zero(n);
            sparse_axpy(sf.a_rows, y, cert);
            sparse_axpy(sf.g_rows, z, cert);
            if (cert.norm() <= 1e-7 * (-bt) * (1.0 + std::max(bnorm, hnorm)) &&
                tau <= 1e-6 * std::max(1.0, kappa)) {
                sol.status = SolveStatus::infeasible;
                break;
            }
        }
        if (ct < 0) {
            double cert = std::max(ry.size() ? (row_apply(sf.a_rows, x)).norm() : 0.0,
                                   (s + row_apply(sf.g_rows, x)).norm());
            if (cert <= 1e-7 * (-ct) * (1.0 + cnorm) && tau <= 1e-6 * std::max(1.0, kappa)) {
                sol.status = SolveStatus::unbounded;
                break;
            }
        }

        Scaling sc = compute_scaling(sf, s, z);
        kkt.factor(sc);

        VectorXd vx, vy, vz;
        kkt.solve(sc, -sf.c, sf.b, sf.h, vx, vy, vz);
        // c'vx + b'vy + h'vz equals -||W vz||^2 analytically; the quadratic
        // form keeps the sign of the dtau denominator reliable.
        double denom_static = -apply_w(sf, sc, vz).squaredNorm();

        auto direction = [&](double sigma, const VectorXd& ds_tilde, double corr_tau,
                             VectorXd& dx_out, VectorXd& dy_out, VectorXd& dz_out,
                             VectorXd& ds_out, double& dtau_out, double& dkappa_out) {
            VectorXd wlds = apply_w(sf, sc, jordan_solve(sf, sc.lambda, ds_tilde));
            VectorXd r1 = (1 - sigma) * rx;
            VectorXd r2 = -(1 - sigma) * ry;
            VectorXd r3 = -(1 - sigma) * rz - wlds;
            VectorXd ux, uy, uz;
            kkt.solve(sc, r1, r2, r3, ux, uy, uz);
            double dkt = sigma * mu - tau * kappa - corr_tau;
            double num = -(1 - sigma) * rtau - dkt / tau - sf.c.dot(ux) -
                         (p ? sf.b.dot(uy) : 0.0) - sf.h.dot(uz);
            double den = -kappa / tau + denom_static;
            dtau_out = num / den;
            dx_out = ux + dtau_out * vx;
            dy_out = uy + dtau_out * vy;
            dz_out = uz + dtau_out * vz;
            // Recover ds from the linearized z-feasibility row; this stays
            // consistent even when the scaling is nearly singular.
            ds_out = -(1 - sigma) * rz + dtau_out * sf.h - row_apply(sf.g_rows, dx_out);
            dkappa_out = (dkt - kappa * dtau_out) / tau;
        };

        // Affine (predictor) direction.
        VectorXd lam2 = jordan_product(sf, sc.lambda, sc.lambda);
        VectorXd dxa, dya, dza, dsa;
        double dtaua, dkappaa;
        direction(0.0, -lam2, 0.0, dxa, dya, dza, dsa, dtaua, dkappaa);

        if (std::getenv("WINDPLAN_SOLVER_DEBUG"))
            std::fprintf(stderr,
                         "it=%d mu=%.3e tau=%.3e kap=%.3e pres=%.3e dres=%.3e gap=%.3e "
                         "dtaua=%.3e den=%.3e\n",
                         iter, mu, tau, kappa, pres, dres, relgap, dtaua, denom_static);

        double alpha_aff = max_cone_step(sf, s, dsa, 1.0);
        alpha_aff = max_cone_step(sf, z, dza, alpha_aff);
        if (dtaua < 0) alpha_aff = std::min(alpha_aff, -tau / dtaua);
        if (dkappaa < 0) alpha_aff = std::min(alpha_aff, -kappa / dkappaa);
        double sigma = std::pow(1.0 - alpha_aff, 3);
        sigma = std::clamp(sigma, 1e-8, 1.0 - 1e-8);

        // Combined (corrector) direction.
        VectorXd corr =
            jordan_product(sf, apply_winv(sf, sc, dsa), apply_w(sf, sc, dza));
        VectorXd ds_tilde = sigma * mu * cone_identity(sf) - lam2 - corr;
        VectorXd dx, dy, dz, ds;
        double dtau, dkappa;
        direction(sigma, ds_tilde, dtaua * dkappaa, dx, dy, dz, ds, dtau, dkappa);

        double alpha = max_cone_step(sf, s, ds, 1.0 / 0.98);
        alpha = max_cone_step(sf, z, dz, alpha);
        if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
        if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
        alpha = std::min(1.0, 0.98 * alpha);
        if (!std::isfinite(alpha) || !dx.allFinite() || !std::isfinite(dtau) ||
            !ds.allFinite() || !dz.allFinite())
            break;  // numerical stall, fall back to the best iterate

        // Near convergence the dtau system can go nearly singular and a full
        // step then destroys an almost optimal iterate. Backtrack whenever a
        // step would noticeably worsen the residuals of a point this good.
        if (metric < 1e4 * settings.tol) {
            while (alpha > 1e-4 &&
                   metric_at(x + alpha * dx, y + alpha * dy, z + alpha * dz,
                             s + alpha * ds, tau + alpha * dtau) > 1.2 * metric)
                alpha *= 0.5;
        }

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
    }

    if (sol.status != SolveStatus::optimal &&
        (!x.allFinite() || !std::isfinite(tau) || best_metric < std::max(sol.r_primal,
                                                                         sol.r_dual))) {
        x = best_x;
        y = best_y;
        z = best_z;
        tau = best_tau;
        sol.r_primal = sol.r_dual = sol.r_gap = best_metric;
        if (best_metric <= settings.tol) sol.status = SolveStatus::optimal;
    }
    sol.x = x / tau;
    sol.eq_dual = y / tau;
    sol.cone_dual = z / tau;
    sol.objective = program.objective_value(sol.x);
    return sol;
}

Residuals residuals(const ConicProgram& program, const PrimalDualSolution& solution) {
    StandardForm sf = build_standard_form(program);
    Residuals res;
    const VectorXd& x = solution.x;
    if (sf.p) {
        VectorXd pr = row_apply(sf.a_rows, x) - sf.b;
        res.primal = pr.lpNorm<Eigen::Infinity>() / (1.0 + sf.b.lpNorm<Eigen::Infinity>());
    }
    if (sf.m) {
        VectorXd slack = sf.h - row_apply(sf.g_rows, x);
        double viol = 0.0;
        for (int i = 0; i < sf.n_orthant; ++i) viol = std::max(viol, -slack(i));
        for (auto [start, len] : sf.soc)
            viol = std::max(viol,
                            slack.segment(start + 1, len - 1).norm() - slack(start));
        res.primal = std::max(res.primal,
                              viol / (1.0 + (sf.h.size() ? sf.h.lpNorm<Eigen::Infinity>() : 0.0)));
        if (solution.cone_dual.size() == sf.m) {
            VectorXd du = sf.c;
            if (sf.p) sparse_axpy(sf.a_rows, solution.eq_dual, du);
            sparse_axpy(sf.g_rows, solution.cone_dual, du);
            res.dual = du.lpNorm<Eigen::Infinity>() / (1.0 + sf.c.lpNorm<Eigen::Infinity>());
            double gap = slack.dot(solution.cone_dual);
            double pcost = sf.c.dot(x);
            double dcost = -((sf.p ? sf.b.dot(solution.eq_dual) : 0.0) +
                             sf.h.dot(solution.cone_dual));
            res.gap = std::abs(gap) / (1.0 + std::abs(pcost) + std::abs(dcost));
        }
    } else if (solution.eq_dual.size() == sf.p) {
        VectorXd du = sf.c;
        if (sf.p) sparse_axpy(sf.a_rows, solution.eq_dual, du);
        res.dual = du.lpNorm<Eigen::Infinity>() / (1.0 + sf.c.lpNorm<Eigen::Infinity>());
    }
    return res;
}

}  // namespace windplan::conic
