//! Brute-force reference computations for the qbdq test suites.
//!
//! Everything here works on plain amplitude slices and explicit dense
//! matrices built from the 2x2 Hadamard. Nothing depends on `qbdq-core`,
//! so the simulator's matrix-free kernels can be checked against it.
//!
//! Basis convention: `b = i * 2^m + x` (index register in the high bits).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Single-qubit Hadamard `(1/sqrt 2) [[1, 1], [1, -1]]`.
pub fn hadamard_1q() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)])
}

/// `H^{⊗q}` as an explicit `2^q x 2^q` matrix, via repeated Kronecker products.
pub fn hadamard_matrix(qubits: u32) -> CMatrix {
    let h = hadamard_1q();
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..qubits {
        out = out.kronecker(&h);
    }
    out
}

/// Permutation matrix for `|i>|x> -> |i>|x xor v_i>` on `i < values.len()`,
/// identity on the remaining index blocks.
pub fn xor_embed_matrix(n: u32, m: u32, values: &[u64]) -> CMatrix {
    let data_dim = 1usize << m;
    let dim = 1usize << (n + m);
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let i = col / data_dim;
        let x = col % data_dim;
        let y = match values.get(i) {
            Some(&v) => x ^ v as usize,
            None => x,
        };
        out[(i * data_dim + y, col)] = c(1.0);
    }
    out
}

/// Diagonal sign flip on every basis state whose index value equals `p`.
pub fn sign_flip_matrix(n: u32, m: u32, p: usize) -> CMatrix {
    let data_dim = 1usize << m;
    let dim = 1usize << (n + m);
    let mut out = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        out[(b, b)] = if b / data_dim == p { c(-1.0) } else { c(1.0) };
    }
    out
}

/// Diagonal phase `-(-1)^sigma(b)`, with `sigma = 1` only on the all-zeros state.
pub fn conditional_phase_matrix(qubits: u32) -> CMatrix {
    let dim = 1usize << qubits;
    let mut out = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let sigma = if b == 0 { 1 } else { 0 };
        out[(b, b)] = c(-(-1f64).powi(sigma));
    }
    out
}

/// Dense `H O_p H O_s`.
pub fn g_matrix(n: u32, m: u32, p: usize) -> CMatrix {
    let h = hadamard_matrix(n + m);
    let op = conditional_phase_matrix(n + m);
    let os = sign_flip_matrix(n, m, p);
    &h * &op * &h * &os
}

pub fn to_vector(amps: &[Complex64]) -> CVector {
    CVector::from_column_slice(amps)
}

/// Dense Grover recursion: returns `(p_target, p_index)` for `r = 0..=r_max`.
pub fn grover_probabilities(
    initial: &[Complex64],
    n: u32,
    m: u32,
    p: usize,
    target_data: usize,
    r_max: usize,
) -> Vec<(f64, f64)> {
    let g = g_matrix(n, m, p);
    let data_dim = 1usize << m;
    let mut v = to_vector(initial);
    let mut out = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        if r > 0 {
            v = &g * &v;
        }
        let p_target = v[p * data_dim + target_data].norm_sqr();
        let p_index = (0..data_dim).map(|x| v[p * data_dim + x].norm_sqr()).sum();
        out.push((p_target, p_index));
    }
    out
}

/// `(1/sqrt N) sum_{i<N} |i>|0>` written out directly.
pub fn uniform_index_amplitudes(n: u32, m: u32, items: usize) -> Vec<Complex64> {
    let data_dim = 1usize << m;
    let mut amps = vec![Complex64::default(); 1 << (n + m)];
    let a = 1.0 / (items as f64).sqrt();
    for i in 0..items {
        amps[i * data_dim] = c(a);
    }
    amps
}

/// `(1/sqrt N) sum_{i<N} |i>|v_i>` written out directly.
pub fn embedded_amplitudes(n: u32, m: u32, values: &[u64]) -> Vec<Complex64> {
    let data_dim = 1usize << m;
    let mut amps = vec![Complex64::default(); 1 << (n + m)];
    let a = 1.0 / (values.len() as f64).sqrt();
    for (i, &v) in values.iter().enumerate() {
        amps[i * data_dim + v as usize] = c(a);
    }
    amps
}

/// Random unit vector with Gaussian-ish components.
pub fn random_amplitudes<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    amps
}

pub fn max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Pearson chi-square statistic and upper-tail p-value against a uniform
/// distribution over `counts.len()` cells.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    (stat, 1.0 - dist.cdf(stat))
}

/// Chi-square test of independence on an `r x c` contingency table.
pub fn chi_square_independence(table: &[Vec<u64>]) -> (f64, f64) {
    let rows = table.len();
    let cols = table[0].len();
    let total: f64 = table.iter().flatten().sum::<u64>() as f64;
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let mut stat = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let e = row_sums[i] * col_sums[j] / total;
            if e > 0.0 {
                stat += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    let dof = ((rows - 1) * (cols - 1)) as f64;
    let dist = ChiSquared::new(dof).unwrap();
    (stat, 1.0 - dist.cdf(stat))
}

/// Von Neumann entropy (bits) of `sum_k w_k |b_k><b_k|` assembled as a dense
/// density matrix and diagonalized numerically.
pub fn dense_mixture_entropy(dim: usize, weighted_basis_states: &[(f64, usize)]) -> f64 {
    let mut rho = DMatrix::<f64>::zeros(dim, dim);
    for &(w, b) in weighted_basis_states {
        rho[(b, b)] += w;
    }
    let eig = rho.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > 1e-15)
        .map(|&l| -l * l.log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_matrix_is_unitary_and_involutive() {
        let h = hadamard_matrix(3);
        let prod = &h * &h;
        let id = CMatrix::identity(8, 8);
        assert!((prod - id).norm() < 1e-12);
    }

    #[test]
    fn g_matrix_is_unitary() {
        let g = g_matrix(2, 2, 1);
        let prod = g.adjoint() * &g;
        assert!((prod - CMatrix::identity(16, 16)).norm() < 1e-10);
    }

    #[test]
    fn chi_square_flags_skew() {
        let (_, p) = chi_square_uniform(&[100, 100, 100, 100]);
        assert!(p > 0.99);
        let (_, p) = chi_square_uniform(&[400, 0, 0, 0]);
        assert!(p < 1e-6);
    }

    #[test]
    fn mixture_entropy_of_uniform_pair() {
        let e = dense_mixture_entropy(4, &[(0.5, 1), (0.5, 2)]);
        assert!((e - 1.0).abs() < 1e-12);
    }
}
