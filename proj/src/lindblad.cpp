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

#include "qmemtest/lindblad.hpp"

#include <cmath>
#include <string>

#include "qmemtest/error.hpp"

namespace qmemtest {

namespace {

using Complex = std::complex<double>;

Eigen::MatrixXcd collapse_matrix_2x2(CollapseKind kind) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
  if (kind == CollapseKind::Relaxation) {
    a(0, 1) = 1.0;  // |0><1|
  } else {
    a(0, 0) = 1.0;  // sigma_z
    a(1, 1) = -1.0;
  }
  return a;
}

}  // namespace

Eigen::MatrixXcd embed_collapse_operator(const CollapseOp& op, int num_qubits) {
  const std::uint32_t slot[] = {op.qubit};
  Eigen::MatrixXcd a = embed_unitary(collapse_matrix_2x2(op.kind), slot, num_qubits);
  return std::sqrt(op.rate_per_us) * a;
}

Eigen::MatrixXcd embed_unitary(const Eigen::MatrixXcd& u,
                               std::span<const std::uint32_t> slots,
                               int num_qubits) {
  const int dim = 1 << num_qubits;
  const int sub_dim = static_cast<int>(u.rows());
  if (sub_dim != (1 << slots.size())) {
    throw NumericalError("embed_unitary: operator size does not match slot count");
  }
  for (std::uint32_t s : slots) {
    if (s >= static_cast<std::uint32_t>(num_qubits)) {
      throw DataError("embed_unitary: slot " + std::to_string(s) +
                      " outside a " + std::to_string(num_qubits) +
                      "-qubit cluster");
    }
  }
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
  std::uint32_t slot_mask = 0;
  for (std::uint32_t s : slots) slot_mask |= 1u << s;

  for (int col = 0; col < dim; ++col) {
    int sub_col = 0;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      sub_col |= ((col >> slots[k]) & 1) << k;
    }
    const int rest = col & ~static_cast<int>(slot_mask);
    for (int sub_row = 0; sub_row < sub_dim; ++sub_row) {
      const Complex v = u(sub_row, sub_col);
      if (v == Complex(0.0, 0.0)) continue;
      int row = rest;
      for (std::size_t k = 0; k < slots.size(); ++k) {
        row |= ((sub_row >> k) & 1) << slots[k];
      }
      full(row, col) = v;
    }
  }
  return full;
}

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const Eigen::MatrixXcd& hamiltonian,
                              std::span<const CollapseOp> ops) {
  if (rho.rows() != rho.cols() || rho.rows() != hamiltonian.rows() ||
      hamiltonian.rows() != hamiltonian.cols()) {
    throw NumericalError("lindblad_rhs: dimension mismatch between rho and H");
  }
  int num_qubits = 0;
  while ((1 << num_qubits) < rho.rows()) ++num_qubits;
  if ((1 << num_qubits) != rho.rows()) {
    throw NumericalError("lindblad_rhs: dimension is not a power of two");
  }

  const Complex minus_i(0.0, -1.0);
  Eigen::MatrixXcd out = minus_i * (hamiltonian * rho - rho * hamiltonian);
  for (const CollapseOp& op : ops) {
    const Eigen::MatrixXcd c = embed_collapse_operator(op, num_qubits);
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
  }
  return out;
}

DiagonalLindbladKernel::DiagonalLindbladKernel(const Eigen::VectorXd& h_diag,
                                               std::span<const CollapseOp> ops,
                                               int num_qubits)
    : h_diag_(h_diag) {
  const int dim = 1 << num_qubits;
  if (h_diag_.size() != dim) {
    throw NumericalError("DiagonalLindbladKernel: diagonal size mismatch");
  }
  gamma_ = Eigen::MatrixXd::Zero(dim, dim);
  for (const CollapseOp& op : ops) {
    if (op.qubit >= static_cast<std::uint32_t>(num_qubits)) {
      throw DataError("DiagonalLindbladKernel: collapse op outside cluster");
    }
    const std::uint32_t mask = 1u << op.qubit;
    if (op.kind == CollapseKind::Dephasing) {
      // D[sqrt(g) sz] rho_ij = g (z_i z_j - 1) rho_ij
      for (int j = 0; j < dim; ++j) {
        const int zj = (j & mask) ? -1 : 1;
        for (int i = 0; i < dim; ++i) {
          const int zi = (i & mask) ? -1 : 1;
          gamma_(i, j) += op.rate_per_us * (1.0 - zi * zj);
        }
      }
    } else {
      // Anticommutator part of D[sqrt(g) |0><1|]; the C rho C^dag scatter is
      // applied separately in rhs().
      for (int j = 0; j < dim; ++j) {
        const double bj = (j & mask) ? 1.0 : 0.0;
        for (int i = 0; i < dim; ++i) {
          const double bi = (i & mask) ? 1.0 : 0.0;
          gamma_(i, j) += 0.5 * op.rate_per_us * (bi + bj);
        }
      }
      relax_.emplace_back(mask, op.rate_per_us);
    }
  }
}

void DiagonalLindbladKernel::set_diagonal(const Eigen::VectorXd& h_diag) {
  if (h_diag.size() != h_diag_.size()) {
    throw NumericalError("DiagonalLindbladKernel: diagonal size mismatch");
  }
  h_diag_ = h_diag;
}

void DiagonalLindbladKernel::rhs(const Eigen::MatrixXcd& rho,
                                 Eigen::MatrixXcd& drho) const {
  const int dim = static_cast<int>(h_diag_.size());
  drho.resize(dim, dim);
  const Complex* r = rho.data();
  Complex* d = drho.data();
  const double* h = h_diag_.data();
  const double* g = gamma_.data();
  for (int j = 0; j < dim; ++j) {
    const double hj = h[j];
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(j) * dim;
#pragma omp simd
    for (int i = 0; i < dim; ++i) {
      const Complex v = r[base + i];
      const double dh = h[i] - hj;
      const double gg = g[base + i];
      d[base + i] = Complex(dh * v.imag() - gg * v.real(),
                            -dh * v.real() - gg * v.imag());
    }
  }
  for (const auto& [mask, rate] : relax_) {
    for (int j = 0; j < dim; ++j) {
      if (j & mask) continue;
      const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(j) * dim;
      const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(j | mask) * dim;
      for (int i = 0; i < dim; ++i) {
        if (i & mask) continue;
        d[lo + i] += rate * r[hi + (i | mask)];
      }
    }
  }
}

GenericLindbladKernel::GenericLindbladKernel(Eigen::MatrixXcd hamiltonian,
                                             std::span<const CollapseOp> ops,
                                             int num_qubits)
    : hamiltonian_(std::move(hamiltonian)) {
  const int dim = 1 << num_qubits;
  if (hamiltonian_.rows() != dim || hamiltonian_.cols() != dim) {
    throw NumericalError("GenericLindbladKernel: Hamiltonian size mismatch");
  }
  for (const CollapseOp& op : ops) {
    c_.push_back(embed_collapse_operator(op, num_qubits));
    cdag_.push_back(c_.back().adjoint());
    cdc_.push_back(cdag_.back() * c_.back());
  }
  tmp1_.resize(dim, dim);
  tmp2_.resize(dim, dim);
}

void GenericLindbladKernel::rhs(const Eigen::MatrixXcd& rho,
                                Eigen::MatrixXcd& drho) const {
  const Complex minus_i(0.0, -1.0);
  tmp1_.noalias() = hamiltonian_ * rho;
  tmp2_.noalias() = rho * hamiltonian_;
  drho = minus_i * (tmp1_ - tmp2_);
  for (std::size_t m = 0; m < c_.size(); ++m) {
    tmp1_.noalias() = c_[m] * rho;
    tmp2_.noalias() = tmp1_ * cdag_[m];
    drho += tmp2_;
    tmp1_.noalias() = cdc_[m] * rho;
    drho -= 0.5 * tmp1_;
    tmp1_.noalias() = rho * cdc_[m];
    drho -= 0.5 * tmp1_;
  }
}

void rk4_evolve(Eigen::MatrixXcd& rho, double duration_us, double max_step_us,
                const LindbladKernel& kernel) {
  if (duration_us <= 0.0) return;
  if (!std::isfinite(duration_us) || !std::isfinite(max_step_us) ||
      max_step_us <= 0.0) {
    throw NumericalError("rk4_evolve: non-finite duration or step underflow");
  }
  const long steps = static_cast<long>(std::ceil(duration_us / max_step_us));
  const double h = duration_us / static_cast<double>(steps);
  const int dim = kernel.dim();

  Eigen::MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim);
  Eigen::MatrixXcd stage(dim, dim);

  for (long s = 0; s < steps; ++s) {
    kernel.rhs(rho, k1);
    stage = rho + (0.5 * h) * k1;
    kernel.rhs(stage, k2);
    stage = rho + (0.5 * h) * k2;
    kernel.rhs(stage, k3);
    stage = rho + h * k3;
    kernel.rhs(stage, k4);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

}  // namespace qmemtest
