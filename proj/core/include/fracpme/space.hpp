#pragma once

#include "fracpme/time_grid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fracpme {

/// A(t, x) as a 2x2 matrix; one-dimensional problems read entry (0,0).
using CoefficientField = std::function<Eigen::Matrix2d(double t, double x, double y)>;

CoefficientField constant_coefficient(double scale);

/// Values on every mesh node (boundary included). Solutions keep 0 on the boundary;
/// data fields carry boundary dual-cell averages so that L^1 norms tile the domain.
using NodalField = Eigen::VectorXd;

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct MeshSpec {
    int dim = 1;
    double length_x = 1.0;
    double length_y = 1.0;
    std::size_t cells_x = 32;
    std::size_t cells_y = 32;
};

/// Tensor mesh on (0,Lx) or (0,Lx)x(0,Ly) with P1 elements and homogeneous Dirichlet data.
/// In 2D each rectangle is split along its (0,0)-(1,1) diagonal.
class SpatialProblem {
public:
    SpatialProblem(const MeshSpec& mesh, CoefficientField coefficient, double nu,
                   bool time_dependent = false);

    int dim() const noexcept { return spec_.dim; }
    const MeshSpec& mesh() const noexcept { return spec_; }
    double nu() const noexcept { return nu_; }
    bool time_dependent() const noexcept { return time_dependent_; }
    double hx() const noexcept { return hx_; }
    double hy() const noexcept { return hy_; }

    std::size_t node_count() const noexcept { return coords_.size(); }
    std::size_t interior_count() const noexcept { return interior_.size(); }
    /// Global node index of the k-th interior unknown.
    std::size_t interior_node(std::size_t k) const { return interior_[k]; }
    const std::vector<std::size_t>& interior_nodes() const noexcept { return interior_; }
    bool is_boundary(std::size_t node) const { return boundary_[node]; }
    Eigen::Vector2d coord(std::size_t node) const { return coords_[node]; }
    /// Lumped mass of interior unknowns (h in 1D, hx*hy in 2D).
    double interior_mass() const noexcept { return interior_mass_; }
    /// Dual-cell measures of all nodes; they sum to |Omega|.
    const Eigen::VectorXd& l1_weights() const noexcept { return weights_; }
    double measure() const noexcept;

    /// Stiffness on interior unknowns: (K w, w) = int A grad w . grad w for the P1
    /// interpolant of w. Throws HypothesisViolation if the coercivity probe fails at t.
    SparseMatrix assemble_stiffness(double t) const;
    /// Coercivity and boundedness probe at every quadrature point and time node.
    void probe_coercivity(const TimeGrid& grid) const;
    /// Smallest eigenvalue of sym(A) over quadrature points at time t.
    double min_coercivity(double t) const;

    NodalField zero_field() const { return NodalField::Zero(static_cast<Eigen::Index>(node_count())); }
    Eigen::VectorXd restrict_interior(const NodalField& field) const;
    NodalField extend_interior(const Eigen::VectorXd& interior) const;

    /// Writes "x,value" or "x,y,value" rows.
    void write_field_csv(std::ostream& out, const NodalField& field) const;

private:
    std::vector<Eigen::Vector2d> quadrature_points() const;

    MeshSpec spec_;
    CoefficientField coefficient_;
    double nu_;
    bool time_dependent_;
    double hx_ = 0.0;
    double hy_ = 0.0;
    double interior_mass_ = 0.0;
    std::vector<Eigen::Vector2d> coords_;
    std::vector<bool> boundary_;
    std::vector<std::size_t> interior_;
    std::vector<long> interior_index_;  // -1 on boundary
    Eigen::VectorXd weights_;
};

SpatialProblem build_mesh(const MeshSpec& mesh, CoefficientField coefficient, double nu,
                          bool time_dependent = false);
SparseMatrix assemble_stiffness(const SpatialProblem& problem, double t);

/// Discrete L^1(Omega) norm and its positive/negative-part variants.
double l1_norm(const SpatialProblem& problem, const NodalField& field);
double l1_norm_positive(const SpatialProblem& problem, const NodalField& field);
double l1_norm_negative(const SpatialProblem& problem, const NodalField& field);

enum class NormPart { Absolute, Positive, Negative };

/// Space-time L^1(Q_T) norm with the right-endpoint rule sum_n dt_n ||w_n||.
/// `fields[n]` is the slice at t_n, n = 0..N; the n = 0 slice is ignored.
double l1_norm_qt(const SpatialProblem& problem, const TimeGrid& grid,
                  std::span<const NodalField> fields, NormPart part = NormPart::Absolute);

}  // namespace fracpme
