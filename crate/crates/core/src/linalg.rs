//! Dense Hermitian linear algebra.
//!
//! Operators are stored as dense `nalgebra` complex matrices. Three validated
//! wrappers encode the positivity ladder used throughout the crate:
//!
//! | Type | Guarantee |
//! |------|-----------|
//! | [`Hermitian`] | `H = H†` within [`HERMITICITY_TOL`] (max abs entry deviation) |
//! | [`Psd`] | additionally every eigenvalue `≥ -`[`CLIP_TOL`] |
//! | [`Density`] | additionally unit trace within [`TRACE_TOL`] |
//!
//! Bipartite operators use a fixed ordering: subsystem A is the slow (outer)
//! tensor factor and B the fast (inner) one, so the basis index of
//! `|a⟩ ⊗ |b⟩` is `a * dim_b + b`. Multi-copy systems `A B₁ … Bₙ` flatten in
//! the same left-to-right order.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Complex dense matrix used for every operator and Kraus matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Maximum allowed `|H[i][j] - conj(H[j][i])|` for a Hermitian operator.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues in `[-CLIP_TOL, 0)` are rounded to zero; anything lower is not PSD.
pub const CLIP_TOL: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues at or below this value are kernel directions for negative and
/// zero powers.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Largest total Hilbert-space dimension any operation will build.
pub const MAX_TOTAL_DIM: usize = 4096;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Finite-dimensional complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian {
    mat: CMatrix,
}

impl Hermitian {
    /// Validates hermiticity. The stored matrix is the input as given.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.nrows() == 0 {
            return Err(Error::BadDimensions("operator dimension must be at least 1".into()));
        }
        let dev = hermiticity_deviation(&mat);
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitian { deviation: dev });
        }
        Ok(Self { mat })
    }

    /// Wraps `(M + M†)/2`. Used for results of arithmetic that is Hermitian
    /// in exact arithmetic, so round-off never trips the invariant.
    pub fn from_hermitian_part(mat: &CMatrix) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "square matrix expected");
        let sym = (mat + mat.adjoint()).scale(0.5);
        Self { mat: sym }
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut mat = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            mat[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim),
        }
    }

    /// Builds `Σ_{ij} entries[i][j]` from real parts only (symmetric input).
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut mat = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                mat[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Self::new(mat)
    }

    /// Projector `|ψ⟩⟨ψ|` (not normalised).
    pub fn projector(psi: &[Complex64]) -> Self {
        let n = psi.len();
        let mut mat = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: self.mat.scale(factor),
        }
    }

    pub fn add(&self, other: &Hermitian) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Hermitian) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    /// `Re Tr(self · other)`; exact for Hermitian pairs.
    pub fn trace_product(&self, other: &Hermitian) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(trace_of_product(&self.mat, &other.mat))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Maximum absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Hermitian) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let n = self.dim();
        assert_eq!(psi.len(), n, "vector length must equal the operator dimension");
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += psi[i].conj() * self.mat[(i, j)] * psi[j];
            }
        }
        acc.re
    }

    fn check_same_dim(&self, other: &Hermitian) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

fn hermiticity_deviation(mat: &CMatrix) -> f64 {
    let n = mat.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `Re Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Positive semidefinite operator. Need not have unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd(Hermitian);

impl Psd {
    pub fn new(h: Hermitian) -> Result<Self> {
        let spec = eig_hermitian(&h);
        let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -CLIP_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(Self(h))
    }

    /// Skips the eigenvalue check. Callers must know the operator is PSD.
    pub(crate) fn new_unchecked(h: Hermitian) -> Self {
        Self(h)
    }

    pub fn as_hermitian(&self) -> &Hermitian {
        &self.0
    }

    pub fn into_hermitian(self) -> Hermitian {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Clipped spectrum: eigenvalues below zero (within tolerance) become 0.
    pub fn spectrum(&self) -> Spectrum {
        let mut s = eig_hermitian(&self.0);
        for v in s.eigenvalues.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        s
    }
}

impl std::ops::Deref for Psd {
    type Target = Hermitian;
    fn deref(&self) -> &Hermitian {
        &self.0
    }
}

/// Unit-trace PSD operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(Psd);

impl Density {
    pub fn new(h: Hermitian) -> Result<Self> {
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensity { trace: tr });
        }
        Ok(Self(Psd::new(h)?))
    }

    pub fn from_psd(p: Psd) -> Result<Self> {
        let tr = p.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensity { trace: tr });
        }
        Ok(Self(p))
    }

    pub(crate) fn new_unchecked(h: Hermitian) -> Self {
        Self(Psd(h))
    }

    /// Rescales a nonzero PSD operator to unit trace.
    pub fn normalized(p: &Psd) -> Result<Self> {
        let tr = p.trace();
        if tr <= 1e-12 {
            return Err(Error::ZeroOperator);
        }
        Ok(Self(Psd(p.0.scale(1.0 / tr))))
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new_unchecked(Hermitian::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn as_psd(&self) -> &Psd {
        &self.0
    }

    pub fn into_psd(self) -> Psd {
        self.0
    }
}

impl std::ops::Deref for Density {
    type Target = Psd;
    fn deref(&self) -> &Psd {
        &self.0
    }
}

/// Which tensor factor of a bipartite operator to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Operator on `H_A ⊗ H_B`, A outer and B inner.
#[derive(Debug, Clone, PartialEq)]
pub struct Bipartite {
    dim_a: usize,
    dim_b: usize,
    op: Hermitian,
}

impl Bipartite {
    pub fn new(dim_a: usize, dim_b: usize, op: Hermitian) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::BadDimensions("subsystem dimensions must be positive".into()));
        }
        if op.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: op.dim(),
            });
        }
        Ok(Self { dim_a, dim_b, op })
    }

    /// Product operator `x ⊗ y`.
    pub fn product(x: &Hermitian, y: &Hermitian) -> Self {
        Self {
            dim_a: x.dim(),
            dim_b: y.dim(),
            op: tensor_product(x, y),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn op(&self) -> &Hermitian {
        &self.op
    }

    pub fn into_op(self) -> Hermitian {
        self.op
    }

    /// Validates the operator as a density operator.
    pub fn density(&self) -> Result<Density> {
        Density::new(self.op.clone())
    }

    /// Traces out `which`, returning the operator on the other factor.
    pub fn partial_trace(&self, which: Subsystem) -> Hermitian {
        let keep = match which {
            Subsystem::A => [false, true],
            Subsystem::B => [true, false],
        };
        let m = partial_trace_factors(self.op.matrix(), &[self.dim_a, self.dim_b], &keep);
        Hermitian::from_hermitian_part(&m)
    }

    /// Same operator with the factor boundary moved: useful for regrouping
    /// `A B₁ B₂` as `(A B₁) B₂`.
    pub fn regroup(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::new(dim_a, dim_b, self.op.clone())
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    /// `U diag(f(λᵢ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        Hermitian::from_hermitian_part(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map(|x| x)
    }

    /// Column `j` as a vector.
    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        self.eigenvectors.column(j).iter().copied().collect()
    }
}

/// Hermitian eigendecomposition (faer's self-adjoint solver).
///
/// # Panics
/// If the solver does not converge, which does not happen for finite input.
pub fn eig_hermitian(h: &Hermitian) -> Spectrum {
    let n = h.dim();
    let m = h.matrix();
    let input = Mat::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = input
        .self_adjoint_eigen(Side::Lower)
        .expect("Hermitian eigensolver failed to converge");
    let (vals, vecs) = (eig.S(), eig.U());
    // faer returns ascending order.
    let eigenvalues = (0..n).rev().map(|i| vals[i].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| vecs[(i, n - 1 - j)]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Fractional power on the support.
///
/// For `t > 0`, `0^t = 0`. For `t ≤ 0`, eigenvalues at or below
/// [`SUPPORT_TOL`] are kernel directions and map to zero (pseudo-inverse
/// convention; `t = 0` gives the support projector).
pub fn matrix_power(p: &Psd, t: f64) -> Psd {
    let spec = p.spectrum();
    Psd(power_from_spectrum(&spec, t))
}

pub(crate) fn power_from_spectrum(spec: &Spectrum, t: f64) -> Hermitian {
    spec.map(|lam| scalar_power(lam, t))
}

#[inline]
pub(crate) fn scalar_power(lam: f64, t: f64) -> f64 {
    if t > 0.0 {
        if lam <= 0.0 {
            0.0
        } else {
            lam.powf(t)
        }
    } else if lam <= SUPPORT_TOL {
        0.0
    } else {
        lam.powf(t)
    }
}

/// Positive part `κ⁺` of the Jordan decomposition `κ = κ⁺ − κ⁻`.
pub fn positive_part(h: &Hermitian) -> Psd {
    let spec = eig_hermitian(h);
    Psd(spec.map(|lam| lam.max(0.0)))
}

/// Partial trace of a bipartite operator. Fails if the stored dimensions
/// disagree with the operator size.
pub fn partial_trace(x: &Bipartite, which: Subsystem) -> Result<Hermitian> {
    if x.op.dim() != x.dim_a * x.dim_b {
        return Err(Error::DimensionMismatch {
            expected: x.dim_a * x.dim_b,
            found: x.op.dim(),
        });
    }
    Ok(x.partial_trace(which))
}

/// Traces out every factor whose `keep` flag is false. `dims` lists the
/// factor dimensions, outermost first.
pub fn partial_trace_factors(mat: &CMatrix, dims: &[usize], keep: &[bool]) -> CMatrix {
    assert_eq!(dims.len(), keep.len(), "one keep flag per factor");
    let total: usize = dims.iter().product();
    assert_eq!(mat.nrows(), total, "factor dimensions must multiply to the operator size");

    let kept_dims: Vec<usize> = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .collect();
    let traced_dims: Vec<usize> = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| !k)
        .map(|(&d, _)| d)
        .collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // Full index from (kept multi-index, traced multi-index).
    let full_index = |kept: usize, traced: usize| -> usize {
        let mut kept_rem = kept;
        let mut traced_rem = traced;
        let mut kept_digits = vec![0usize; kept_dims.len()];
        for (slot, &d) in kept_digits.iter_mut().zip(&kept_dims).rev() {
            *slot = kept_rem % d;
            kept_rem /= d;
        }
        let mut traced_digits = vec![0usize; traced_dims.len()];
        for (slot, &d) in traced_digits.iter_mut().zip(&traced_dims).rev() {
            *slot = traced_rem % d;
            traced_rem /= d;
        }
        let (mut ki, mut ti) = (0, 0);
        let mut idx = 0;
        for (&d, &k) in dims.iter().zip(keep) {
            let digit = if k {
                ki += 1;
                kept_digits[ki - 1]
            } else {
                ti += 1;
                traced_digits[ti - 1]
            };
            idx = idx * d + digit;
        }
        idx
    };

    let index_table: Vec<Vec<usize>> = (0..kept_total)
        .map(|k| (0..traced_total).map(|t| full_index(k, t)).collect())
        .collect();

    let mut out = CMatrix::zeros(kept_total, kept_total);
    for i in 0..kept_total {
        for j in 0..kept_total {
            let mut acc = ZERO;
            for t in 0..traced_total {
                acc += mat[(index_table[i][t], index_table[j][t])];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Kronecker product `x ⊗ y`, x outer.
pub fn tensor_product(x: &Hermitian, y: &Hermitian) -> Hermitian {
    Hermitian {
        mat: x.mat.kronecker(&y.mat),
    }
}

/// `|Φ⟩⟨Φ|` with `|Φ⟩ = d^{-1/2} Σᵢ |i⟩|i⟩`.
pub fn maximally_entangled(d: usize) -> Bipartite {
    assert!(d >= 1, "dimension must be positive");
    let psi = maximally_entangled_vector(d);
    Bipartite {
        dim_a: d,
        dim_b: d,
        op: Hermitian::projector(&psi),
    }
}

/// The vector `d^{-1/2} Σᵢ |i⟩|i⟩` of length `d²`.
pub fn maximally_entangled_vector(d: usize) -> Vec<Complex64> {
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = vec![ZERO; d * d];
    for i in 0..d {
        psi[i * d + i] = amp;
    }
    psi
}

/// Deterministic generator for a seed. All randomness in the crate flows
/// through here.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed: SplitMix64 finaliser of `(seed, stream)`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `rows × cols` matrix of independent standard complex Gaussians
/// (real and imaginary parts each `N(0, 1)`).
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Random density operator `G G† / Tr(G G†)`.
pub fn random_density(d: usize, seed: u64) -> Density {
    assert!(d >= 1, "dimension must be positive");
    let mut rng = seeded_rng(seed);
    let g = gaussian_matrix(d, d, &mut rng);
    let gg = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| gg[(i, i)].re).sum();
    Density::new_unchecked(Hermitian::from_hermitian_part(&gg.scale(1.0 / tr)))
}

/// Random Hermitian matrix with Gaussian entries (GUE-like, unnormalised).
pub fn random_hermitian(d: usize, seed: u64) -> Hermitian {
    let mut rng = seeded_rng(seed);
    let g = gaussian_matrix(d, d, &mut rng);
    Hermitian::from_hermitian_part(&g)
}

/// Random bipartite density operator on `dim_a × dim_b`.
pub fn random_bipartite_density(dim_a: usize, dim_b: usize, seed: u64) -> Bipartite {
    let rho = random_density(dim_a * dim_b, seed);
    Bipartite {
        dim_a,
        dim_b,
        op: rho.into_psd().into_hermitian(),
    }
}

/// `I_n ⊗ m`.
pub(crate) fn identity_kron(n: usize, m: &CMatrix) -> CMatrix {
    CMatrix::identity(n, n).kronecker(m)
}

/// `|i⟩` in dimension `d`.
pub fn basis_vector(d: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; d];
    v[i] = ONE;
    v
}
