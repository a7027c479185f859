/*
 Copyright 2026 The delayq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "delayq/bellman.hpp"

#include "delayq/parallel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace delayq {

WeightKernels weight_kernels(const CostWeights& w, const ControlLaw& law, const ThetaGrid& grid) {
  const int S = grid.size();
  if (static_cast<int>(law.gamma1.size()) != S) {
    throw ValidationError("gamma1: sample count does not match the theta grid");
  }
  const auto nn = law.gamma0.cols();
  WeightKernels k;
  k.grid = grid;
  const Matrix RG0 = w.R * law.gamma0;
  k.L1 = w.Q + law.gamma0.transpose() * RG0;
  k.L3.reserve(S);
  for (const auto& g1 : law.gamma1) k.L3.push_back(RG0.transpose() * g1);
  k.L6.reserve(static_cast<std::size_t>(S) * S);
  for (int a = 0; a < S; ++a) {
    const Matrix left = law.gamma1[a].transpose() * w.R;
    for (int b = 0; b < S; ++b) k.L6.push_back(left * law.gamma1[b]);
  }
  if (law.gamma2) {
    const Matrix RG2 = w.R * *law.gamma2;
    k.L2 = law.gamma0.transpose() * RG2;
    k.L4 = law.gamma2->transpose() * RG2;
    for (const auto& g1 : law.gamma1) k.L5.push_back(RG2.transpose() * g1);
  } else {
    k.L2 = Matrix::Zero(nn, nn);
    k.L4 = Matrix::Zero(nn, nn);
    k.L5.assign(S, Matrix::Zero(nn, nn));
  }
  return k;
}

namespace {

/// Extended state z(t) = [x(t); x(t-h); x(t+θ_0); ...; x(t+θ_N)] written as
/// z = Z0 φ(0) + Σ_b w_b Zt_b φ(θ_b) through the Cauchy formula. Samples with
/// t+θ < 0 read the initial function directly.
class ExtendedState {
 public:
  ExtendedState(const ClosedLoopSystem& cl, const SampledKernel& K)
      : K_(K), N_(cl.grid.intervals()), M_(K.grid().horizon_steps()), n_(cl.n()), grid_(cl.grid) {
    KA1_.reserve(M_ + 1);
    for (int m = 0; m <= M_; ++m) KA1_.push_back(K.at(m) * cl.A1);
    Fd_.reserve(static_cast<std::size_t>(M_ + 1) * (N_ + 1));
    for (int m = 0; m <= M_; ++m) {
      for (int b = 0; b <= N_; ++b) Fd_.push_back(cauchy_distributed_kernel(cl, K, m, b));
    }
    inv_weight_.resize(N_ + 1);
    for (int q = 0; q <= N_; ++q) inv_weight_[q] = 1.0 / grid_.weight(q);
  }

  [[nodiscard]] Eigen::Index rows() const { return n_ * (N_ + 3); }
  [[nodiscard]] Eigen::Index cols() const { return n_ * (N_ + 1); }

  void fill(int j, Side side, Matrix& Z0, Matrix& Zt) const {
    const auto n = n_;
    Z0.setZero(rows(), n);
    Zt.setZero(rows(), cols());
    Z0.block(0, 0, n, n) = K_.at(j, side);
    Z0.block(n, 0, n, n) = K_.at(j - N_, side);
    for (int q = 0; q <= N_; ++q) {
      Z0.block((2 + q) * n, 0, n, n) = K_.at(j + q - N_, endpoint_side(q, 0, N_, +1));
    }
    for (int b = 0; b <= N_; ++b) {
      const auto col = b * n;
      add_response(Zt.block(0, col, n, n), j, b, side);
      add_response(Zt.block(n, col, n, n), j - N_, b, side);
      for (int q = 0; q <= N_; ++q) {
        auto blk = Zt.block((2 + q) * n, col, n, n);
        add_response(blk, j + q - N_, b, endpoint_side(q, 0, N_, +1));
        // x(t+θ_q) = φ(t+θ_q) while t+θ_q < 0; at the jump t = θ_b + h the
        // left limit carries the history sample.
        if (q == b - j && (q > 0 || side == Side::left)) {
          blk.diagonal().array() += inv_weight_[q];
        }
      }
    }
  }

 private:
  template <typename Block>
  void add_response(Block&& blk, int m, int b, Side side) const {
    if (m < 0) return;
    blk += Fd_[static_cast<std::size_t>(m) * (N_ + 1) + b];
    const int arg = m - b;
    if (arg > 0) {
      blk += KA1_[arg];
    } else if (arg == 0) {
      if (side == Side::right) blk += KA1_[0];
      if (side == Side::mid) blk += 0.5 * KA1_[0];
    }
  }

  const SampledKernel& K_;
  int N_;
  int M_;
  Eigen::Index n_;
  ThetaGrid grid_;
  std::vector<Matrix> KA1_;
  std::vector<Matrix> Fd_;
  std::vector<double> inv_weight_;
};

Matrix block_at(const WeightKernels& kern, int a, int b, int N) {
  (void)N;
  if (a == 0 && b == 0) return kern.L1;
  if (a == 0 && b == 1) return kern.L2;
  if (a == 0) return kern.L3[b - 2];
  if (a == 1 && b == 1) return kern.L4;
  if (a == 1) return kern.L5[b - 2];
  return kern.l6(a - 2, b - 2);
}

/// Block matrix of the weights with quadrature weights folded in; block
/// order matches ExtendedState.
Matrix weighted_kernel_matrix(const WeightKernels& kern) {
  const int N = kern.grid.intervals();
  const auto n = kern.L1.rows();
  const int B = N + 3;
  std::vector<double> c(B, 1.0);
  for (int q = 0; q <= N; ++q) c[2 + q] = kern.grid.weight(q);
  auto block = [&](int a, int b) -> Matrix {
    if (a > b) return block_at(kern, b, a, N).transpose();
    return block_at(kern, a, b, N);
  };
  Matrix W(n * B, n * B);
  for (int a = 0; a < B; ++a) {
    for (int b = 0; b < B; ++b) W.block(a * n, b * n, n, n) = c[a] * c[b] * block(a, b);
  }
  return 0.5 * (W + W.transpose());
}

}  // namespace

namespace {

struct Accumulator {
  Matrix pi0;
  Matrix pi1;  // n x n(N+1)
  Matrix pi2;  // n(N+1) x n(N+1)
};

/// Low-rank factor of the weight matrix: W = V diag(lambda) V'.
struct Factor {
  Matrix V;
  Vector lambda;
};

Factor factorize(const Matrix& W) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(W);
  const Vector& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > 1e-15 * top) keep.push_back(i);
  }
  Factor f;
  f.V.resize(W.rows(), static_cast<Eigen::Index>(keep.size()));
  f.lambda.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    f.V.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(keep[i]);
    f.lambda(static_cast<Eigen::Index>(i)) = ev(keep[i]);
  }
  return f;
}

void accumulate(const Factor& f, const Matrix& Z0, const Matrix& Zt, double weight,
                Accumulator& acc) {
  const Matrix P0 = f.V.transpose() * Z0;
  const Matrix Pt = f.V.transpose() * Zt;
  const Matrix LP0 = f.lambda.asDiagonal() * P0;
  const Matrix LPt = f.lambda.asDiagonal() * Pt;
  acc.pi0.noalias() += weight * P0.transpose() * LP0;
  acc.pi1.noalias() += weight * P0.transpose() * LPt;
  acc.pi2.noalias() += weight * Pt.transpose() * LPt;
}

constexpr int kChunk = 8;

}  // namespace

BellmanMatrices pi_matrices(const ClosedLoopSystem& cl, const SampledKernel& K,
                            const WeightKernels& kern, const PiOptions& options) {
  if (!(K.grid().theta() == cl.grid) || !(kern.grid == cl.grid)) {
    throw ContractViolation("pi_matrices: kernel, weights and closed loop use different grids");
  }
  const int N = cl.grid.intervals();
  const int M = K.grid().horizon_steps();
  const auto n = cl.n();
  const ExtendedState ext(cl, K);
  const Matrix W = weighted_kernel_matrix(kern);
  const Factor f = factorize(W);

  const int chunks = (M + kChunk) / kChunk;
  std::vector<Accumulator> partial(chunks);
  parallel_for(chunks, options.threads, [&](int c) {
    Accumulator& acc = partial[c];
    acc.pi0 = Matrix::Zero(n, n);
    acc.pi1 = Matrix::Zero(n, ext.cols());
    acc.pi2 = Matrix::Zero(ext.cols(), ext.cols());
    Matrix Z0, Zt;
    for (int j = c * kChunk; j <= std::min(M, (c + 1) * kChunk - 1); ++j) {
      // Trapezoid over [0, T] with the mean of one-sided limits at nodes.
      const double w = K.grid().weight(j);
      if (j > 0) {
        ext.fill(j, Side::left, Z0, Zt);
        accumulate(f, Z0, Zt, j == M ? w : 0.5 * w, acc);
      }
      if (j < M) {
        ext.fill(j, Side::right, Z0, Zt);
        accumulate(f, Z0, Zt, j == 0 ? w : 0.5 * w, acc);
      }
    }
  });
  Accumulator total = std::move(partial.front());
  for (int c = 1; c < chunks; ++c) {
    total.pi0 += partial[c].pi0;
    total.pi1 += partial[c].pi1;
    total.pi2 += partial[c].pi2;
  }

  // Concentrated gain: x(t-h) = φ(t-h) on [0, h) contributes point terms
  // collapsed onto s = t - h.
  const Matrix W_delayed = W.middleCols(n, n);
  if (!W_delayed.isZero(0.0)) {
    Matrix Z0, Zt, Z0b, Ztb;
    for (int b = 0; b <= N; ++b) {
      const Side side = b == N ? Side::left : Side::right;
      ext.fill(b, side, Z0, Zt);
      total.pi1.middleCols(b * n, n) += Z0.transpose() * W_delayed;
      Matrix C = Zt.transpose() * W_delayed;  // rows: ξ_a blocks
      if (b > 0 && b < N) {
        ext.fill(b, Side::left, Z0b, Ztb);
        C.middleRows(b * n, n) =
            0.5 * (C.middleRows(b * n, n) + Ztb.middleCols(b * n, n).transpose() * W_delayed);
      }
      for (int a = 0; a <= N; ++a) {
        const Matrix blk = C.middleRows(a * n, n);
        total.pi2.block(a * n, b * n, n, n) += blk;
        total.pi2.block(b * n, a * n, n, n) += blk.transpose();
      }
    }
  }

  BellmanMatrices out;
  out.grid = cl.grid;
  out.horizon = K.grid().horizon();
  out.step = K.grid().step();
  out.pi0 = total.pi0;
  out.pi1.reserve(N + 1);
  for (int b = 0; b <= N; ++b) out.pi1.push_back(total.pi1.middleCols(b * n, n));
  out.pi2.reserve(static_cast<std::size_t>(N + 1) * (N + 1));
  for (int a = 0; a <= N; ++a) {
    for (int b = 0; b <= N; ++b) out.pi2.push_back(total.pi2.block(a * n, b * n, n, n));
  }
  if (options.symmetrize) {
    for (int a = 0; a <= N; ++a) {
      for (int b = a; b <= N; ++b) {
        const Matrix avg = 0.5 * (out.pi2_at(a, b) + out.pi2_at(b, a).transpose());
        out.pi2_at(a, b) = avg;
        out.pi2_at(b, a) = avg.transpose();
      }
    }
  }
  out.pi_local = kern.L4;

  // Truncation: integrands decay like |K|^2.
  out.decay_rate = K.decay_rate();
  // Peak integrand over the last delay interval, as in direct_cost.
  double end_value = 0.0;
  {
    Matrix Z0, Zt;
    for (int j = M - N; j <= M; ++j) {
      Accumulator last{Matrix::Zero(n, n), Matrix::Zero(n, ext.cols()),
                       Matrix::Zero(ext.cols(), ext.cols())};
      ext.fill(j, Side::left, Z0, Zt);
      accumulate(f, Z0, Zt, 1.0, last);
      end_value = std::max({end_value, last.pi0.cwiseAbs().maxCoeff(),
                            last.pi1.cwiseAbs().maxCoeff(), last.pi2.cwiseAbs().maxCoeff()});
    }
  }
  const double scale = std::max(1.0, out.pi0.cwiseAbs().maxCoeff());
  if (!(out.decay_rate > 0.0)) {
    throw HorizonError(fmt::format("fundamental matrix is not decaying on [T-2h, T]; increase T "
                                   "(suggested T = {:.6g})",
                                   2.0 * out.horizon),
                       2.0 * out.horizon);
  }
  out.tail_bound = end_value / (2.0 * out.decay_rate);
  if (out.tail_bound > options.tail_tolerance * scale) {
    const double ratio = out.tail_bound / (options.tail_tolerance * scale);
    const double extra = std::log(ratio) / (2.0 * out.decay_rate);
    const double suggested = std::ceil((out.horizon + extra) / cl.grid.delay() + 1.0) * cl.grid.delay();
    throw HorizonError(fmt::format("tail bound {:.3g} exceeds tolerance; increase T "
                                   "(suggested T = {:.6g})",
                                   out.tail_bound, suggested),
                       suggested);
  }
  for (const auto& m : out.pi2) {
    if (!m.allFinite()) throw HorizonError("non-finite Pi2 entry; increase T", 2.0 * out.horizon);
  }
  return out;
}

double functional_value(const BellmanMatrices& pi, const InitialFunction& phi) {
  const ThetaGrid& g = pi.grid;
  validate_initial(phi, pi.pi0.rows(), g);
  const Vector& v0 = phi.at_zero();
  double value = v0.dot(pi.pi0 * v0);
  Vector acc = Vector::Zero(v0.size());
  for (int b = 0; b < g.size(); ++b) acc.noalias() += g.weight(b) * pi.pi1[b] * phi.samples[b];
  value += 2.0 * v0.dot(acc);
  for (int a = 0; a < g.size(); ++a) {
    Vector row = Vector::Zero(v0.size());
    for (int b = 0; b < g.size(); ++b) row.noalias() += g.weight(b) * pi.pi2_at(a, b) * phi.samples[b];
    value += g.weight(a) * phi.samples[a].dot(row);
    value += g.weight(a) * phi.samples[a].dot(pi.pi_local * phi.samples[a]);
  }
  return value;
}

double functional_tail(const BellmanMatrices& pi, const InitialFunction& phi) {
  const double width = phi.at_zero().norm() + pi.grid.delay() * phi.sup_norm();
  const auto n = static_cast<double>(pi.pi0.rows());
  return pi.tail_bound * n * width * width;
}

}  // namespace delayq
