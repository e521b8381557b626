#include "fracpme/space.hpp"

#include "fracpme/errors.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <ostream>
#include <sstream>

namespace fracpme {

namespace {

double min_sym_eigenvalue(const Eigen::Matrix2d& a, int dim) {
    if (dim == 1) return a(0, 0);
    const double p = a(0, 0);
    const double q = a(1, 1);
    const double off = 0.5 * (a(0, 1) + a(1, 0));
    return 0.5 * (p + q) - std::hypot(0.5 * (p - q), off);
}

}  // namespace

CoefficientField constant_coefficient(double scale) {
    return [scale](double, double, double) -> Eigen::Matrix2d {
        return scale * Eigen::Matrix2d::Identity();
    };
}

SpatialProblem::SpatialProblem(const MeshSpec& mesh, CoefficientField coefficient, double nu,
                               bool time_dependent)
    : spec_(mesh), coefficient_(std::move(coefficient)), nu_(nu), time_dependent_(time_dependent) {
    if (mesh.dim != 1 && mesh.dim != 2) throw ConfigError("mesh.dim must be 1 or 2");
    if (mesh.cells_x < 2 || (mesh.dim == 2 && mesh.cells_y < 2)) {
        throw ConfigError("mesh needs at least 2 cells per direction");
    }
    if (!(mesh.length_x > 0.0) || (mesh.dim == 2 && !(mesh.length_y > 0.0))) {
        throw ConfigError("mesh lengths must be positive");
    }
    if (!(nu > 0.0)) throw ConfigError("coercivity constant nu must be positive");
    if (!coefficient_) throw ConfigError("coefficient field is empty");

    hx_ = mesh.length_x / static_cast<double>(mesh.cells_x);
    const std::size_t nx = mesh.cells_x + 1;
    if (mesh.dim == 1) {
        hy_ = 1.0;
        coords_.resize(nx);
        boundary_.assign(nx, false);
        weights_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nx), hx_);
        for (std::size_t i = 0; i < nx; ++i) coords_[i] = {hx_ * static_cast<double>(i), 0.0};
        coords_.back().x() = mesh.length_x;
        boundary_.front() = boundary_.back() = true;
        weights_[0] = weights_[static_cast<Eigen::Index>(nx - 1)] = 0.5 * hx_;
        interior_mass_ = hx_;
    } else {
        hy_ = mesh.length_y / static_cast<double>(mesh.cells_y);
        const std::size_t ny = mesh.cells_y + 1;
        coords_.resize(nx * ny);
        boundary_.assign(nx * ny, false);
        weights_.resize(static_cast<Eigen::Index>(nx * ny));
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t g = iy * nx + ix;
                coords_[g] = {ix + 1 == nx ? mesh.length_x : hx_ * static_cast<double>(ix),
                              iy + 1 == ny ? mesh.length_y : hy_ * static_cast<double>(iy)};
                const bool edge_x = ix == 0 || ix + 1 == nx;
                const bool edge_y = iy == 0 || iy + 1 == ny;
                boundary_[g] = edge_x || edge_y;
                weights_[static_cast<Eigen::Index>(g)] =
                    hx_ * hy_ * (edge_x ? 0.5 : 1.0) * (edge_y ? 0.5 : 1.0);
            }
        }
        interior_mass_ = hx_ * hy_;
    }
    interior_index_.assign(coords_.size(), -1);
    for (std::size_t g = 0; g < coords_.size(); ++g) {
        if (!boundary_[g]) {
            interior_index_[g] = static_cast<long>(interior_.size());
            interior_.push_back(g);
        }
    }
}

double SpatialProblem::measure() const noexcept { return weights_.sum(); }

std::vector<Eigen::Vector2d> SpatialProblem::quadrature_points() const {
    std::vector<Eigen::Vector2d> pts;
    if (spec_.dim == 1) {
        for (std::size_t e = 0; e < spec_.cells_x; ++e) {
            pts.push_back({hx_ * (static_cast<double>(e) + 0.5), 0.0});
        }
        return pts;
    }
    for (std::size_t iy = 0; iy < spec_.cells_y; ++iy) {
        for (std::size_t ix = 0; ix < spec_.cells_x; ++ix) {
            const double x0 = hx_ * static_cast<double>(ix);
            const double y0 = hy_ * static_cast<double>(iy);
            pts.push_back({x0 + 2.0 * hx_ / 3.0, y0 + hy_ / 3.0});
            pts.push_back({x0 + hx_ / 3.0, y0 + 2.0 * hy_ / 3.0});
        }
    }
    return pts;
}

double SpatialProblem::min_coercivity(double t) const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& q : quadrature_points()) {
        worst = std::min(worst, min_sym_eigenvalue(coefficient_(t, q.x(), q.y()), spec_.dim));
    }
    return worst;
}

void SpatialProblem::probe_coercivity(const TimeGrid& grid) const {
    const auto pts = quadrature_points();
    const std::size_t times = time_dependent_ ? grid.steps() + 1 : 1;
    for (std::size_t n = 0; n < times; ++n) {
        const double t = grid.t(n);
        for (const auto& q : pts) {
            const Eigen::Matrix2d a = coefficient_(t, q.x(), q.y());
            if (!a.allFinite()) {
                std::ostringstream msg;
                msg << "coefficient is not finite at t=" << t << ", x=(" << q.x() << "," << q.y()
                    << ")";
                throw HypothesisViolation("HA", msg.str());
            }
            const double lam = min_sym_eigenvalue(a, spec_.dim);
            if (lam < nu_ - 1e-12) {
                std::ostringstream msg;
                msg << "coercivity fails at t=" << t << ", x=(" << q.x() << "," << q.y()
                    << "): min eig " << lam << " < nu=" << nu_;
                throw HypothesisViolation("HA", msg.str());
            }
        }
    }
}

SparseMatrix SpatialProblem::assemble_stiffness(double t) const {
    std::vector<Eigen::Triplet<double>> triplets;
    auto add = [&](std::size_t gi, std::size_t gj, double value) {
        const long i = interior_index_[gi];
        const long j = interior_index_[gj];
        if (i >= 0 && j >= 0) triplets.emplace_back(i, j, value);
    };
    auto check = [&](const Eigen::Matrix2d& a, double x, double y) {
        if (!a.allFinite() || min_sym_eigenvalue(a, spec_.dim) < nu_ - 1e-12) {
            std::ostringstream msg;
            msg << "coercivity fails at t=" << t << ", x=(" << x << "," << y << ")";
            throw HypothesisViolation("HA", msg.str());
        }
    };

    if (spec_.dim == 1) {
        triplets.reserve(3 * interior_.size());
        for (std::size_t e = 0; e < spec_.cells_x; ++e) {
            const double xm = hx_ * (static_cast<double>(e) + 0.5);
            const Eigen::Matrix2d a = coefficient_(t, xm, 0.0);
            check(a, xm, 0.0);
            const double c = a(0, 0) / hx_;
            add(e, e, c);
            add(e + 1, e + 1, c);
            add(e, e + 1, -c);
            add(e + 1, e, -c);
        }
    } else {
        const std::size_t nx = spec_.cells_x + 1;
        triplets.reserve(7 * interior_.size());
        const double area = 0.5 * hx_ * hy_;
        for (std::size_t iy = 0; iy < spec_.cells_y; ++iy) {
            for (std::size_t ix = 0; ix < spec_.cells_x; ++ix) {
                const std::size_t p00 = iy * nx + ix;
                const std::size_t p10 = p00 + 1;
                const std::size_t p01 = p00 + nx;
                const std::size_t p11 = p01 + 1;
                const double x0 = hx_ * static_cast<double>(ix);
                const double y0 = hy_ * static_cast<double>(iy);
                // Lower triangle (p00, p10, p11) and upper triangle (p00, p11, p01);
                // barycentric gradients are constant on each.
                const std::array<std::size_t, 3> lower{p00, p10, p11};
                const std::array<Eigen::Vector2d, 3> grad_lower{
                    Eigen::Vector2d(-1.0 / hx_, 0.0), Eigen::Vector2d(1.0 / hx_, -1.0 / hy_),
                    Eigen::Vector2d(0.0, 1.0 / hy_)};
                const std::array<std::size_t, 3> upper{p00, p11, p01};
                const std::array<Eigen::Vector2d, 3> grad_upper{
                    Eigen::Vector2d(0.0, -1.0 / hy_), Eigen::Vector2d(1.0 / hx_, 0.0),
                    Eigen::Vector2d(-1.0 / hx_, 1.0 / hy_)};
                const Eigen::Vector2d c_lower(x0 + 2.0 * hx_ / 3.0, y0 + hy_ / 3.0);
                const Eigen::Vector2d c_upper(x0 + hx_ / 3.0, y0 + 2.0 * hy_ / 3.0);
                const Eigen::Matrix2d a_lower = coefficient_(t, c_lower.x(), c_lower.y());
                const Eigen::Matrix2d a_upper = coefficient_(t, c_upper.x(), c_upper.y());
                check(a_lower, c_lower.x(), c_lower.y());
                check(a_upper, c_upper.x(), c_upper.y());
                for (int p = 0; p < 3; ++p) {
                    for (int q = 0; q < 3; ++q) {
                        add(lower[p], lower[q], area * grad_lower[p].dot(a_lower * grad_lower[q]));
                        add(upper[p], upper[q], area * grad_upper[p].dot(a_upper * grad_upper[q]));
                    }
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(interior_.size());
    SparseMatrix k(n, n);
    k.setFromTriplets(triplets.begin(), triplets.end());
    k.prune(0.0);
    k.makeCompressed();
    return k;
}

Eigen::VectorXd SpatialProblem::restrict_interior(const NodalField& field) const {
    if (static_cast<std::size_t>(field.size()) != coords_.size()) {
        throw InternalError("field does not match the mesh");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(interior_.size()));
    for (std::size_t k = 0; k < interior_.size(); ++k) {
        out[static_cast<Eigen::Index>(k)] = field[static_cast<Eigen::Index>(interior_[k])];
    }
    return out;
}

NodalField SpatialProblem::extend_interior(const Eigen::VectorXd& interior) const {
    if (static_cast<std::size_t>(interior.size()) != interior_.size()) {
        throw InternalError("interior vector does not match the mesh");
    }
    NodalField out = zero_field();
    for (std::size_t k = 0; k < interior_.size(); ++k) {
        out[static_cast<Eigen::Index>(interior_[k])] = interior[static_cast<Eigen::Index>(k)];
    }
    return out;
}

void SpatialProblem::write_field_csv(std::ostream& out, const NodalField& field) const {
    if (static_cast<std::size_t>(field.size()) != coords_.size()) {
        throw InternalError("field does not match the mesh");
    }
    out << (spec_.dim == 1 ? "x,value\n" : "x,y,value\n");
    out.precision(17);
    for (std::size_t g = 0; g < coords_.size(); ++g) {
        out << coords_[g].x() << ',';
        if (spec_.dim == 2) out << coords_[g].y() << ',';
        out << field[static_cast<Eigen::Index>(g)] << '\n';
    }
}

SpatialProblem build_mesh(const MeshSpec& mesh, CoefficientField coefficient, double nu,
                          bool time_dependent) {
    return SpatialProblem(mesh, std::move(coefficient), nu, time_dependent);
}

SparseMatrix assemble_stiffness(const SpatialProblem& problem, double t) {
    return problem.assemble_stiffness(t);
}

namespace {

double weighted_part(const SpatialProblem& problem, const NodalField& field, NormPart part) {
    const auto& w = problem.l1_weights();
    if (field.size() != w.size()) throw InternalError("field does not match the mesh");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < field.size(); ++i) {
        const double value = field[i];
        double contribution = 0.0;
        switch (part) {
        case NormPart::Absolute: contribution = std::abs(value); break;
        case NormPart::Positive: contribution = std::max(value, 0.0); break;
        case NormPart::Negative: contribution = std::max(-value, 0.0); break;
        }
        sum += w[i] * contribution;
    }
    return sum;
}

}  // namespace

double l1_norm(const SpatialProblem& problem, const NodalField& field) {
    return weighted_part(problem, field, NormPart::Absolute);
}

double l1_norm_positive(const SpatialProblem& problem, const NodalField& field) {
    return weighted_part(problem, field, NormPart::Positive);
}

double l1_norm_negative(const SpatialProblem& problem, const NodalField& field) {
    return weighted_part(problem, field, NormPart::Negative);
}

double l1_norm_qt(const SpatialProblem& problem, const TimeGrid& grid,
                  std::span<const NodalField> fields, NormPart part) {
    if (fields.size() != grid.steps() + 1) {
        throw InternalError("space-time field does not match the time grid");
    }
    double sum = 0.0;
    for (std::size_t n = 1; n <= grid.steps(); ++n) {
        sum += grid.dt(n) * weighted_part(problem, fields[n], part);
    }
    return sum;
}

}  // namespace fracpme
