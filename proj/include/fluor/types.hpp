// types.hpp — Shared numeric aliases

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>

namespace fluor {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr cplx I{0.0, 1.0};

} // namespace fluor
