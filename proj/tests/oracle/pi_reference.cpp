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
#include "oracle/pi_reference.hpp"

namespace delayq::testing {

namespace {

class Terms {
 public:
  Terms(const ClosedLoopSystem& cl, const SampledKernel& K, const CostWeights& w,
        const ControlLaw& law)
      : cl_(cl), K_(K), g_(cl.grid), N_(cl.grid.intervals()), n_(cl.n()) {
    M1 = w.Q + law.gamma0.transpose() * w.R * law.gamma0;
    for (int q = 0; q <= N_; ++q) M2.push_back(law.gamma0.transpose() * w.R * law.gamma1[q]);
    for (int p = 0; p <= N_; ++p)
      for (int q = 0; q <= N_; ++q)
        M3.push_back(law.gamma1[p].transpose() * w.R * law.gamma1[q]);
  }

  Matrix M1;
  std::vector<Matrix> M2;
  std::vector<Matrix> M3;

  [[nodiscard]] const Matrix& m3(int p, int q) const { return M3[p * (N_ + 1) + q]; }
  [[nodiscard]] double w(int q) const { return g_.weight(q); }
  [[nodiscard]] Matrix zero() const { return Matrix::Zero(n_, n_); }

  // K at time index m; zero before the origin.
  [[nodiscard]] Matrix k(int m, Side s) const { return m < 0 ? zero() : K_.at(m, s); }

  // K(t - θ_b - h) A1 at t = t_m.
  [[nodiscard]] Matrix delayed(int m, int b, Side s) const { return k(m - b, s) * cl_.A1; }

  // ∫_{-h}^{θ_b} K(t - θ_b + ξ) G(ξ) dξ at t = t_m.
  [[nodiscard]] Matrix distributed(int m, int b) const {
    Matrix out = zero();
    for (int i = 0; i <= b; ++i) {
      out += g_.partial_weight(i, b) * k(m - b + i, endpoint_side(i, 0, b, +1)) * cl_.G[i];
    }
    return out;
  }

  // φ(t_j + θ_q) expressed through the sample φ(θ_b).
  [[nodiscard]] Matrix history(int j, int q, int b, Side s) const {
    if (q == b - j && (q > 0 || s == Side::left)) return Matrix::Identity(n_, n_) / w(q);
    return zero();
  }

  [[nodiscard]] Side inner(int q) const { return endpoint_side(q, 0, N_, +1); }
  [[nodiscard]] int shift(int j, int q) const { return j + q - N_; }

 private:
  const ClosedLoopSystem& cl_;
  const SampledKernel& K_;
  ThetaGrid g_;
  int N_;
  Eigen::Index n_;
};

}  // namespace

ReferencePi reference_pi(const ClosedLoopSystem& cl, const SampledKernel& K, const CostWeights& w,
                         const ControlLaw& law) {
  const Terms T(cl, K, w, law);
  const int N = cl.grid.intervals();
  const int S = N + 1;
  const int M = K.grid().horizon_steps();
  const Matrix Z = T.zero();

  ReferencePi out;
  out.pi0 = Z;
  out.pi1.assign(S, Z);
  out.pi2.assign(static_cast<std::size_t>(S) * S, Z);

  auto node = [&](int j, Side s, double omega) {
    // Factors at t and at t + θ_q.
    const Matrix K0 = T.k(j, s);
    std::vector<Matrix> Kq(S);
    for (int q = 0; q < S; ++q) Kq[q] = T.k(T.shift(j, q), T.inner(q));

    // Π0
    Matrix p0 = K0.transpose() * T.M1 * K0;
    for (int q = 0; q < S; ++q) {
      p0 += T.w(q) * K0.transpose() * T.M2[q] * Kq[q];
      p0 += T.w(q) * Kq[q].transpose() * T.M2[q].transpose() * K0;
    }
    for (int p = 0; p < S; ++p)
      for (int q = 0; q < S; ++q)
        p0 += T.w(p) * T.w(q) * Kq[p].transpose() * T.m3(p, q) * Kq[q];
    out.pi0 += omega * p0;

    // Kernels of the solution in terms of φ(θ_b): at t and at t + θ_q.
    std::vector<Matrix> D0(S), G0(S), Dq(S * S), Gq(S * S), Hq(S * S);
    for (int b = 0; b < S; ++b) {
      D0[b] = T.delayed(j, b, s);
      G0[b] = j < 0 ? Z : T.distributed(j, b);
      for (int q = 0; q < S; ++q) {
        const int m = T.shift(j, q);
        Dq[q * S + b] = T.delayed(m, b, T.inner(q));
        Gq[q * S + b] = m < 0 ? Z : T.distributed(m, b);
        Hq[q * S + b] = T.history(j, q, b, s);
      }
    }

    // Π1(θ_b)
    for (int b = 0; b < S; ++b) {
      Matrix p1 = K0.transpose() * T.M1 * D0[b];
      p1 += K0.transpose() * T.M1 * G0[b];
      for (int q = 0; q < S; ++q) {
        const int qb = q * S + b;
        p1 += T.w(q) * K0.transpose() * T.M2[q] * Dq[qb];
        p1 += T.w(q) * Kq[q].transpose() * T.M2[q].transpose() * D0[b];
        p1 += T.w(q) * K0.transpose() * T.M2[q] * Gq[qb];
        p1 += T.w(q) * Kq[q].transpose() * T.M2[q].transpose() * G0[b];
        p1 += T.w(q) * K0.transpose() * T.M2[q] * Hq[qb];
      }
      for (int p = 0; p < S; ++p) {
        for (int q = 0; q < S; ++q) {
          const int qb = q * S + b;
          const double wpq = T.w(p) * T.w(q);
          p1 += wpq * Kq[p].transpose() * T.m3(p, q) * Dq[qb];
          p1 += wpq * Kq[p].transpose() * T.m3(p, q) * Gq[qb];
          p1 += wpq * Kq[p].transpose() * T.m3(p, q) * Hq[qb];
        }
      }
      out.pi1[b] += omega * p1;
    }

    // Π2(ξ_a, θ_b)
    for (int a = 0; a < S; ++a) {
      for (int b = 0; b < S; ++b) {
        Matrix p2 = D0[a].transpose() * T.M1 * D0[b];
        p2 += D0[a].transpose() * T.M1 * G0[b];
        p2 += G0[a].transpose() * T.M1 * D0[b];
        p2 += G0[a].transpose() * T.M1 * G0[b];
        for (int q = 0; q < S; ++q) {
          const int qa = q * S + a;
          const int qb = q * S + b;
          const Matrix left = Dq[qa] + Gq[qa] + Hq[qa];
          p2 += T.w(q) * D0[a].transpose() * T.M2[q] * Dq[qb];
          p2 += T.w(q) * D0[a].transpose() * T.M2[q] * Gq[qb];
          p2 += T.w(q) * G0[a].transpose() * T.M2[q] * Dq[qb];
          p2 += T.w(q) * G0[a].transpose() * T.M2[q] * Gq[qb];
          p2 += T.w(q) * (D0[a] + G0[a]).transpose() * T.M2[q] * Hq[qb];
          p2 += T.w(q) * left.transpose() * T.M2[q].transpose() * (D0[b] + G0[b]);
        }
        for (int p = 0; p < S; ++p) {
          const int pa = p * S + a;
          for (int q = 0; q < S; ++q) {
            const int qb = q * S + b;
            const double wpq = T.w(p) * T.w(q);
            const Matrix& m3 = T.m3(p, q);
            p2 += wpq * Dq[pa].transpose() * m3 * Dq[qb];
            p2 += wpq * Dq[pa].transpose() * m3 * Gq[qb];
            p2 += wpq * Gq[pa].transpose() * m3 * Dq[qb];
            p2 += wpq * Gq[pa].transpose() * m3 * Gq[qb];
            p2 += wpq * Hq[pa].transpose() * m3 * (Dq[qb] + Gq[qb] + Hq[qb]);
            p2 += wpq * (Dq[pa] + Gq[pa]).transpose() * m3 * Hq[qb];
          }
        }
        out.pi2[a * S + b] += omega * p2;
      }
    }
  };

  for (int j = 0; j <= M; ++j) {
    const double wt = K.grid().weight(j);
    if (j > 0) node(j, Side::left, j == M ? wt : 0.5 * wt);
    if (j < M) node(j, Side::right, j == 0 ? wt : 0.5 * wt);
  }
  return out;
}

}  // namespace delayq::testing
