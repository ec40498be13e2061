//! Independent reference implementations for tests.
//!
//! Nothing here calls into the crate: gates are built from explicit Pauli
//! strings with their own Kronecker products and a scaled Taylor exponential,
//! and states evolve by a plain index-gather matrix chain.
#![allow(dead_code)]

use num_complex::Complex64 as C;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub dim: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            a: vec![C::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn eye(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i * dim + i] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> C {
        self.a[r * self.dim + c]
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.dim;
        let mut out = Dense::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let x = self.at(r, k);
                for c in 0..n {
                    out.a[r * n + c] += x * o.at(k, c);
                }
            }
        }
        out
    }

    pub fn kron(&self, o: &Dense) -> Dense {
        let (n, m) = (self.dim, o.dim);
        let mut out = Dense::zeros(n * m);
        for r1 in 0..n {
            for c1 in 0..n {
                for r2 in 0..m {
                    for c2 in 0..m {
                        out.a[(r1 * m + r2) * n * m + c1 * m + c2] = self.at(r1, c1) * o.at(r2, c2);
                    }
                }
            }
        }
        out
    }

    pub fn axpy(&self, s: C, o: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + s * y).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Dense {
        Dense {
            dim: self.dim,
            a: self.a.iter().map(|x| s * x).collect(),
        }
    }

    pub fn max_diff(&self, o: &Dense) -> f64 {
        self.a.iter().zip(&o.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

pub fn pauli(c: char) -> Dense {
    let (z, o, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    let a = match c {
        'I' => vec![o, z, z, o],
        'X' => vec![z, o, o, z],
        'Y' => vec![z, -i, i, z],
        'Z' => vec![o, z, z, -o],
        _ => panic!("not a Pauli: {c}"),
    };
    Dense { dim: 2, a }
}

/// Tensor product of single-qubit Paulis, leftmost factor most significant.
pub fn pauli_string(s: &str) -> Dense {
    let mut it = s.chars();
    let first = pauli(it.next().unwrap());
    it.fold(first, |acc, c| acc.kron(&pauli(c)))
}

/// `−½(XY − YX)`.
pub fn s_matrix() -> Dense {
    pauli_string("XY")
        .axpy(C::new(-1.0, 0.0), &pauli_string("YX"))
        .scale(C::new(-0.5, 0.0))
}

/// `−¼(XXY + XYX − YXX + YYY)`.
pub fn p_matrix() -> Dense {
    let one = C::new(1.0, 0.0);
    pauli_string("XXY")
        .axpy(one, &pauli_string("XYX"))
        .axpy(-one, &pauli_string("YXX"))
        .axpy(one, &pauli_string("YYY"))
        .scale(C::new(-0.25, 0.0))
}

/// `exp(−i·angle·h)` by a 30-term Taylor series after scaling to norm < ½,
/// then repeated squaring.
pub fn expm_i(h: &Dense, angle: f64) -> Dense {
    let norm: f64 = h.a.iter().map(|x| x.norm()).sum::<f64>() * angle.abs();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.5 {
        squarings += 1;
    }
    let a = h.scale(C::new(0.0, -angle / 2f64.powi(squarings)));
    let mut term = Dense::eye(h.dim);
    let mut sum = Dense::eye(h.dim);
    for k in 1..30 {
        term = term.mul(&a).scale(C::new(1.0 / k as f64, 0.0));
        sum = sum.axpy(C::new(1.0, 0.0), &term);
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

/// Apply `m` to `targets` (first target = most significant local bit).
pub fn apply(state: &[C], targets: &[usize], m: &Dense) -> Vec<C> {
    let k = targets.len();
    let mut clear = usize::MAX;
    for &t in targets {
        clear &= !(1 << t);
    }
    (0..state.len())
        .map(|j| {
            let row = targets
                .iter()
                .enumerate()
                .fold(0, |acc, (pos, &t)| acc | (((j >> t) & 1) << (k - 1 - pos)));
            (0..1 << k)
                .map(|col| {
                    let src = targets
                        .iter()
                        .enumerate()
                        .fold(j & clear, |acc, (pos, &t)| acc | (((col >> (k - 1 - pos)) & 1) << t));
                    m.at(row, col) * state[src]
                })
                .sum()
        })
        .collect()
}

/// Weighted portfolio variance for a basis index, with infeasible indices at
/// the largest feasible value plus one.
pub fn cost_table(sigma: &[f64], n: usize, l: usize, m: usize) -> Vec<f64> {
    let dim = 1usize << (n * l);
    let raw: Vec<Option<f64>> = (0..dim)
        .map(|j| {
            let w: Vec<f64> = (0..n)
                .map(|t| ((j >> (t * l)) & ((1 << l) - 1)).count_ones() as f64 / m as f64)
                .collect();
            let ones: u32 = (j as u64).count_ones();
            (ones as usize == m).then(|| {
                let mut v = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        v += w[a] * sigma[a * n + b] * w[b];
                    }
                }
                v
            })
        })
        .collect();
    let max = raw.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.into_iter().map(|v| v.unwrap_or(max + 1.0)).collect()
}

/// Final state of the ring-coupled ansatz from `|2^m − 1⟩`, with
/// `theta = (γ₁..γ_p, β₁..β_p)`.
pub fn final_state(costs: &[f64], n: usize, l: usize, m: usize, theta: &[f64]) -> Vec<C> {
    let p = theta.len() / 2;
    let mut state = vec![C::new(0.0, 0.0); costs.len()];
    state[(1 << m) - 1] = C::new(1.0, 0.0);
    let k1: Vec<usize> = (1..=l / 2).map(|c| (2 * c) % l).collect();
    let k2: Vec<usize> = (1..=l.div_ceil(2)).map(|c| (2 * c - 1) % l).collect();
    let (mut k1, mut k2) = (k1, k2);
    k1.sort();
    k1.dedup();
    k2.sort();
    k2.dedup();
    let (s, pm) = (s_matrix(), p_matrix());
    for layer in 0..p {
        let (gamma, beta) = (theta[layer], theta[p + layer]);
        for (j, a) in state.iter_mut().enumerate() {
            *a *= C::from_polar(1.0, -gamma * costs[j]);
        }
        let (es, ep) = (expm_i(&s, beta), expm_i(&pm, beta));
        for t in 0..n {
            let u = (t + 1) % n;
            for k in 0..l {
                state = apply(&state, &[t * l + k, u * l + k], &es);
            }
            for &k in k1.iter().chain(&k2) {
                state = apply(&state, &[t * l + (k + 1) % l, t * l + k, u * l + k], &ep);
            }
            for k in 0..l {
                state = apply(&state, &[t * l + k, u * l + k], &es);
            }
        }
    }
    state
}

pub fn expectation(state: &[C], costs: &[f64]) -> f64 {
    state.iter().zip(costs).map(|(a, c)| a.norm_sqr() * c).sum()
}

/// Probability mass outside Hamming weight `m`.
pub fn leakage(state: &[C], m: usize) -> f64 {
    state
        .iter()
        .enumerate()
        .filter(|(j, _)| (*j as u64).count_ones() as usize != m)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Analytic single-qubit thermal relaxation for total time `t`:
/// `ρ₁₁ → ρ₁₁ e^{−t/T1}`, `ρ₀₁ → ρ₀₁ e^{−t/T2}`.
pub fn relax(rho: [[C; 2]; 2], t1: f64, t2: f64, t: f64) -> [[C; 2]; 2] {
    let decay = (-t / t1).exp();
    let coh = (-t / t2).exp();
    let p1 = rho[1][1].re * decay;
    [
        [C::new(1.0 - p1, 0.0), rho[0][1] * coh],
        [rho[1][0] * coh, C::new(p1, 0.0)],
    ]
}
