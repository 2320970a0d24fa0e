//! Quantum channels in Kraus form.
//!
//! A channel acts on the B factor of a [`Bipartite`] operator and as the
//! identity on A: `ρ ↦ Σₖ (I_A ⊗ Kₖ) ρ (I_A ⊗ Kₖ)†`. Superoperator matrices
//! are never formed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{
    derive_seed, gaussian_matrix, identity_kron, seeded_rng, Bipartite, CMatrix, Hermitian,
    MAX_TOTAL_DIM,
};
use crate::{Error, Result};

/// Frobenius tolerance on `Σ K†K − I`.
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;

/// A CPTP map from `dim_in` to `dim_out` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Frobenius norm of `Σ K†K − I`.
    pub fn trace_preservation_error(&self) -> f64 {
        tp_deviation(&self.kraus, self.dim_in)
    }

    /// Identity channel on dimension `d`.
    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: vec![CMatrix::identity(d, d)],
        }
    }
}

fn tp_deviation(kraus: &[CMatrix], dim_in: usize) -> f64 {
    let mut sum = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    (sum - CMatrix::identity(dim_in, dim_in)).norm()
}

/// Validated constructor: shapes must agree and `Σ K†K = I`.
pub fn make_channel(kraus: Vec<CMatrix>) -> Result<QuantumChannel> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::BadDimensions("a channel needs at least one Kraus operator".into()))?;
    let (dim_out, dim_in) = first.shape();
    if dim_in == 0 || dim_out == 0 {
        return Err(Error::BadDimensions("Kraus operators must be nonempty".into()));
    }
    if let Some(bad) = kraus.iter().find(|k| k.shape() != (dim_out, dim_in)) {
        return Err(Error::BadDimensions(format!(
            "Kraus operator of shape {:?}, expected {:?}",
            bad.shape(),
            (dim_out, dim_in)
        )));
    }
    let deviation = tp_deviation(&kraus, dim_in);
    if deviation > TRACE_PRESERVING_TOL {
        return Err(Error::NotTracePreserving { deviation });
    }
    Ok(QuantumChannel {
        dim_in,
        dim_out,
        kraus,
    })
}

/// `(id_A ⊗ 𝒩)(ρ^{AB})`.
pub fn apply_to_b(ch: &QuantumChannel, rho_ab: &Bipartite) -> Result<Bipartite> {
    if ch.dim_in != rho_ab.dim_b() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim_in,
            found: rho_ab.dim_b(),
        });
    }
    let dim_a = rho_ab.dim_a();
    let total = dim_a * ch.dim_out;
    if total > MAX_TOTAL_DIM {
        return Err(Error::TooLarge {
            dim: total,
            cap: MAX_TOTAL_DIM,
        });
    }
    let rho = rho_ab.op().matrix();
    let mut out = CMatrix::zeros(total, total);
    for k in &ch.kraus {
        let lifted = identity_kron(dim_a, k);
        out += &lifted * rho * lifted.adjoint();
    }
    Bipartite::new(dim_a, ch.dim_out, Hermitian::from_hermitian_part(&out))
}

/// Quantum erasure channel on a `d`-dimensional input.
///
/// Output dimension is `d + 1`; the erasure flag `|e⟩` is the last basis
/// vector (index `d`). Kraus operators, in order:
/// `√(1−p) Σᵢ |i⟩⟨i|`, then `√p |e⟩⟨i|` for `i = 0 … d−1`.
pub fn erasure_channel(d: usize, p: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    if d == 0 {
        return Err(Error::BadDimensions("erasure input dimension must be positive".into()));
    }
    let mut kraus = Vec::with_capacity(d + 1);
    kraus.push(embedding(d).scale((1.0 - p).sqrt()));
    for i in 0..d {
        let mut k = CMatrix::zeros(d + 1, d);
        k[(d, i)] = Complex64::new(p.sqrt(), 0.0);
        kraus.push(k);
    }
    make_channel(kraus)
}

/// Isometric embedding `Σᵢ |i⟩⟨i|` of `d` into `d + 1` dimensions.
fn embedding(d: usize) -> CMatrix {
    CMatrix::from_fn(d + 1, d, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// The "transmit intact" branch `𝒢` of the erasure channel (a channel on its
/// own: a single isometric Kraus operator).
pub fn erasure_transmit_branch(d: usize) -> QuantumChannel {
    QuantumChannel {
        dim_in: d,
        dim_out: d + 1,
        kraus: vec![embedding(d)],
    }
}

/// The "erase" branch: `ρ ↦ Tr(ρ) |e⟩⟨e|`.
pub fn erasure_erase_branch(d: usize) -> QuantumChannel {
    let kraus = (0..d)
        .map(|i| {
            let mut k = CMatrix::zeros(d + 1, d);
            k[(d, i)] = Complex64::new(1.0, 0.0);
            k
        })
        .collect();
    QuantumChannel {
        dim_in: d,
        dim_out: d + 1,
        kraus,
    }
}

/// `𝒩^{⊗n}`: Kraus set of all n-fold tensor products, first use outermost.
///
/// `dim_a` is the dimension of the untouched reference system the result will
/// be applied alongside; `dim_a · dim_outⁿ` must stay within the total
/// dimension cap.
pub fn tensor_power(ch: &QuantumChannel, n: usize, dim_a: usize) -> Result<QuantumChannel> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power must be at least 1".into()));
    }
    let total = checked_power(ch.dim_out.max(ch.dim_in), n)
        .and_then(|x| x.checked_mul(dim_a.max(1)))
        .unwrap_or(usize::MAX);
    if total > MAX_TOTAL_DIM {
        return Err(Error::TooLarge {
            dim: total,
            cap: MAX_TOTAL_DIM,
        });
    }
    let channels = vec![ch.clone(); n];
    Ok(tensor_channels(&channels))
}

/// Tensor product of a list of channels, first entry outermost. The list must
/// be nonempty.
pub fn tensor_channels(channels: &[QuantumChannel]) -> QuantumChannel {
    let mut acc = channels[0].clone();
    for next in &channels[1..] {
        let mut kraus = Vec::with_capacity(acc.kraus.len() * next.kraus.len());
        for a in &acc.kraus {
            for b in &next.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        acc = QuantumChannel {
            dim_in: acc.dim_in * next.dim_in,
            dim_out: acc.dim_out * next.dim_out,
            kraus,
        };
    }
    acc
}

fn checked_power(base: usize, n: usize) -> Option<usize> {
    (0..n).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// One term of the erasure output decomposition: the positions in `erased`
/// were replaced by `|e⟩`, the rest transmitted intact.
#[derive(Debug, Clone)]
pub struct ErasureBlock {
    /// One flag per channel use, first use first.
    pub erased: Vec<bool>,
    /// Number of erasures `k`.
    pub k: usize,
    /// `(1−p)^{n−k} pᵏ`.
    pub weight: f64,
    /// Normalised block state `ζ` on `A B₁ … Bₙ`.
    pub state: Bipartite,
}

/// `ρ^{ABⁿ} = Σ α_{k,n} ζ` over all `2ⁿ` erasure patterns.
#[derive(Debug, Clone)]
pub struct ErasureBlockDecomposition {
    pub d: usize,
    pub p: f64,
    pub n: usize,
    pub blocks: Vec<ErasureBlock>,
}

impl ErasureBlockDecomposition {
    /// `Σ α ζ`.
    pub fn recombine(&self) -> Bipartite {
        let first = &self.blocks[0].state;
        let mut acc = CMatrix::zeros(first.op().dim(), first.op().dim());
        for b in &self.blocks {
            acc += b.state.op().matrix().scale(b.weight);
        }
        Bipartite::new(first.dim_a(), first.dim_b(), Hermitian::from_hermitian_part(&acc))
            .expect("blocks share dimensions")
    }

    pub fn weight_sum(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).sum()
    }
}

/// Splits the output of `erasure(d, p)^{⊗n}` on `ρ^{AA'ⁿ}` into its `2ⁿ`
/// orthogonal erasure-pattern blocks. Pattern `m` (as an n-bit number, first
/// use in the most significant bit) marks erased uses with 1-bits.
pub fn erasure_block_decomposition(
    d: usize,
    p: f64,
    n: usize,
    rho_aan: &Bipartite,
) -> Result<ErasureBlockDecomposition> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    if n == 0 || n > 8 {
        return Err(Error::TooLarge { dim: n, cap: 8 });
    }
    let din = checked_power(d, n).unwrap_or(usize::MAX);
    if rho_aan.dim_b() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            found: rho_aan.dim_b(),
        });
    }
    let dout = checked_power(d + 1, n).unwrap_or(usize::MAX);
    let total = dout.saturating_mul(rho_aan.dim_a());
    if total > MAX_TOTAL_DIM {
        return Err(Error::TooLarge {
            dim: total,
            cap: MAX_TOTAL_DIM,
        });
    }

    let transmit = erasure_transmit_branch(d);
    let erase = erasure_erase_branch(d);
    let mut blocks = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let erased: Vec<bool> = (0..n).map(|j| mask >> (n - 1 - j) & 1 == 1).collect();
        let k = erased.iter().filter(|&&e| e).count();
        let weight = (1.0 - p).powi((n - k) as i32) * p.powi(k as i32);
        let parts: Vec<QuantumChannel> = erased
            .iter()
            .map(|&e| if e { erase.clone() } else { transmit.clone() })
            .collect();
        let state = apply_to_b(&tensor_channels(&parts), rho_aan)?;
        blocks.push(ErasureBlock {
            erased,
            k,
            weight,
            state,
        });
    }
    Ok(ErasureBlockDecomposition { d, p, n, blocks })
}

/// Random channel from a Haar-like Stinespring isometry.
///
/// A `dim_out·dim_env × dim_in` complex Gaussian matrix is orthonormalised
/// (QR) into an isometry `V`; the Kraus operators are `Kₑ = (I ⊗ ⟨e|) V`
/// with the environment as the inner factor.
pub fn random_channel(dim_in: usize, dim_out: usize, dim_env: usize, seed: u64) -> Result<QuantumChannel> {
    if dim_in == 0 || dim_out == 0 || dim_env == 0 {
        return Err(Error::BadDimensions("channel dimensions must be positive".into()));
    }
    if dim_out * dim_env < dim_in {
        return Err(Error::BadDimensions(format!(
            "an isometry needs dim_out * dim_env >= dim_in ({dim_out} * {dim_env} < {dim_in})"
        )));
    }
    let mut rng = seeded_rng(derive_seed(seed, 0xC4A1));
    let g = gaussian_matrix(dim_out * dim_env, dim_in, &mut rng);
    let v = orthonormal_columns(g);
    let kraus = (0..dim_env)
        .map(|e| DMatrix::from_fn(dim_out, dim_in, |i, j| v[(i * dim_env + e, j)]))
        .collect();
    make_channel(kraus)
}

/// Modified Gram–Schmidt, applied twice for orthogonality to working precision.
fn orthonormal_columns(mut m: CMatrix) -> CMatrix {
    for _pass in 0..2 {
        for j in 0..m.ncols() {
            for i in 0..j {
                let qi = m.column(i).clone_owned();
                let proj = qi.dotc(&m.column(j));
                let mut cj = m.column_mut(j);
                cj -= qi * proj;
            }
            let norm = m.column(j).norm();
            let mut cj = m.column_mut(j);
            cj /= Complex64::new(norm, 0.0);
        }
    }
    m
}
