use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{CMatrix, CliffordError};

/// Maximum Clifford dimension handled.
pub const MAX_DIM: usize = 8;

/// Hermitian generators `γ^1..γ^d` of the Euclidean Clifford algebra,
/// `{γ^a, γ^b} = 2δ^{ab}`, of size `2^⌊d/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRep {
    pub dim: usize,
    pub size: usize,
    pub gammas: Vec<CMatrix>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli() -> [CMatrix; 4] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    factors.iter().fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, f| acc.kronecker(f))
}

/// Jordan–Wigner construction: `γ^{2j} = Z^{⊗j} ⊗ X ⊗ I`, `γ^{2j+1} = Z^{⊗j} ⊗ Y ⊗ I`,
/// and for odd `d` the last generator is `Z^{⊗⌊d/2⌋}`.
pub fn build_gamma(d: usize) -> Result<GammaRep, CliffordError> {
    if d == 0 || d > MAX_DIM {
        return Err(CliffordError::Envelope(format!("gamma dimension {d} outside 1..={MAX_DIM}")));
    }
    let k = d / 2;
    let [id, x, y, z] = pauli();
    let mut gammas = Vec::with_capacity(d);
    for j in 0..k {
        for s in [&x, &y] {
            let mut factors: Vec<&CMatrix> = Vec::with_capacity(k);
            factors.extend(std::iter::repeat_n(&z, j));
            factors.push(s);
            factors.extend(std::iter::repeat_n(&id, k - j - 1));
            gammas.push(kron_all(&factors));
        }
    }
    if d % 2 == 1 {
        let factors: Vec<&CMatrix> = std::iter::repeat_n(&z, k).collect();
        gammas.push(kron_all(&factors));
    }
    Ok(GammaRep { dim: d, size: 1 << k, gammas })
}

/// `max |{γ^a, γ^b} − 2 q^{ab} I|` for a set of matrices and a target form `q`.
pub fn anticommutator_residual(gammas: &[CMatrix], q: &DMatrix<f64>) -> f64 {
    let k = gammas.first().map_or(0, |g| g.nrows());
    let id = CMatrix::identity(k, k);
    let mut worst = 0.0f64;
    for (a, ga) in gammas.iter().enumerate() {
        for (b, gb) in gammas.iter().enumerate() {
            let r = ga * gb + gb * ga - &id * c(2.0 * q[(a, b)], 0.0);
            worst = worst.max(r.iter().fold(0.0f64, |m, z| m.max(z.norm())));
        }
    }
    worst
}

/// `max |γ − γ†|` over the generators.
pub fn hermiticity_residual(gammas: &[CMatrix]) -> f64 {
    gammas.iter().map(|g| (g - g.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()))).fold(0.0, f64::max)
}

/// Gamma matrices for an `(n, m)` split: the h-algebra on `n` generators,
/// the v-algebra on `m`, and the distinguished algebra on `n + m` whose first
/// `n` generators play `γ^i` and last `m` play `γ^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DGammaCouple {
    pub h: GammaRep,
    pub v: Option<GammaRep>,
    pub d: GammaRep,
}

pub fn d_gamma(n: usize, m: usize) -> Result<DGammaCouple, CliffordError> {
    Ok(DGammaCouple { h: build_gamma(n)?, v: if m > 0 { Some(build_gamma(m)?) } else { None }, d: build_gamma(n + m)? })
}
