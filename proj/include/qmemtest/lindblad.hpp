// Copyright 2026 The qmemtest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qmemtest {

/// One transition channel C = sqrt(rate) * A acting on a tensor slot.
/// Relaxation uses A = |0><1| (decay toward the ground state) with
/// rate 1/T1; dephasing uses A = sigma_z with rate 1/(2 T2) so that
/// off-diagonals decay as exp(-t/T2).
enum class CollapseKind { Relaxation, Dephasing };

struct CollapseOp {
  std::uint32_t qubit = 0;  // tensor slot within the state the matrix describes
  CollapseKind kind = CollapseKind::Relaxation;
  double rate_per_us = 0.0;
};

/// d(rho)/dt = -i[H, rho] + sum_n ( C_n rho C_n^dag - 1/2 {C_n^dag C_n, rho} ).
/// Reference implementation on dense matrices, kept as the plain statement of
/// the master equation; the kernels below are the production paths.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const Eigen::MatrixXcd& hamiltonian,
                              std::span<const CollapseOp> ops);

class LindbladKernel {
 public:
  virtual ~LindbladKernel() = default;
  virtual void rhs(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const = 0;
  virtual int dim() const = 0;
};

/// Structured kernel for diagonal Hamiltonians (the zz model). Element-wise:
///   drho_ij = (-i (h_i - h_j) - Gamma_ij) rho_ij + relaxation scatter,
/// O(4^k) per evaluation instead of dense matrix products.
class DiagonalLindbladKernel final : public LindbladKernel {
 public:
  DiagonalLindbladKernel(const Eigen::VectorXd& h_diag,
                         std::span<const CollapseOp> ops, int num_qubits);

  void rhs(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const override;
  int dim() const override { return static_cast<int>(h_diag_.size()); }

  /// Swap in a new diagonal (same qubit count); used when a frozen neighbor
  /// flips its sigma_z eigenvalue mid-circuit.
  void set_diagonal(const Eigen::VectorXd& h_diag);

 private:
  Eigen::VectorXd h_diag_;
  Eigen::MatrixXd gamma_;                              // decay rate per element
  std::vector<std::pair<std::uint32_t, double>> relax_;  // (bit mask, rate)
};

/// Fallback for non-diagonal Hamiltonians (xx / yy coupling studies):
/// precomputed dense channel matrices, straight matrix products.
class GenericLindbladKernel final : public LindbladKernel {
 public:
  GenericLindbladKernel(Eigen::MatrixXcd hamiltonian,
                        std::span<const CollapseOp> ops, int num_qubits);

  void rhs(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const override;
  int dim() const override { return static_cast<int>(hamiltonian_.rows()); }

 private:
  Eigen::MatrixXcd hamiltonian_;
  std::vector<Eigen::MatrixXcd> c_;
  std::vector<Eigen::MatrixXcd> cdag_;
  std::vector<Eigen::MatrixXcd> cdc_;
  mutable Eigen::MatrixXcd tmp1_, tmp2_;
};

/// Classical fixed-step RK4. Steps = ceil(duration / max_step), so the step
/// actually used divides the segment exactly. Throws on non-finite steps.
void rk4_evolve(Eigen::MatrixXcd& rho, double duration_us, double max_step_us,
                const LindbladKernel& kernel);

/// Embeds a 2^m x 2^m unitary at the given tensor slots (slots[0] is the
/// least significant bit of the small matrix index).
Eigen::MatrixXcd embed_unitary(const Eigen::MatrixXcd& u,
                               std::span<const std::uint32_t> slots,
                               int num_qubits);

/// Builds the dense single-qubit sigma or ladder operator embedded at a slot.
Eigen::MatrixXcd embed_collapse_operator(const CollapseOp& op, int num_qubits);

}  // namespace qmemtest
