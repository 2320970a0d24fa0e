//! Quantum divergences and entropies.
//!
//! Divergence values are `f64`; `f64::INFINITY` is returned only when the
//! support of the first argument is not contained in the support of the
//! second.

use crate::linalg::{
    eig_hermitian, positive_part, scalar_power, Bipartite, Density, Hermitian, Psd, Spectrum,
    Subsystem, SUPPORT_TOL,
};
use crate::{Error, Result};

/// `Tr ρ Π_ker(σ)` above this makes the divergence infinite.
pub const SUPPORT_VIOLATION_TOL: f64 = 1e-9;

/// Rényi order `λ ∈ (1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 1.0 && lambda <= 2.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::InvalidOrder(lambda))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `s = 1/λ − 1 ∈ [−1/2, 0)`.
    pub fn to_s(self) -> f64 {
        1.0 / self.0 - 1.0
    }
}

impl std::fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `Tr ρ^λ σ^{1−λ}` from the two spectra, or `None` on a support violation.
///
/// Works eigenvalue-wise: `Σᵢⱼ aᵢ^λ bⱼ^{1−λ} |⟨uᵢ|vⱼ⟩|²` with `0^λ · x = 0` and
/// kernel directions of σ dropped.
fn renyi_trace(rho: &Spectrum, sigma: &Spectrum, lambda: f64) -> Option<f64> {
    let overlaps = rho.eigenvectors.adjoint() * &sigma.eigenvectors;
    let mut kernel_weight = 0.0;
    let mut total = 0.0;
    for (i, &a) in rho.eigenvalues.iter().enumerate() {
        if a <= 0.0 {
            continue;
        }
        let a_pow = a.powf(lambda);
        for (j, &b) in sigma.eigenvalues.iter().enumerate() {
            let w = overlaps[(i, j)].norm_sqr();
            if b <= SUPPORT_TOL {
                kernel_weight += a * w;
            } else {
                total += a_pow * scalar_power(b, 1.0 - lambda) * w;
            }
        }
    }
    if kernel_weight > SUPPORT_VIOLATION_TOL {
        None
    } else {
        Some(total)
    }
}

/// `D_λ(ρ‖σ) = (λ−1)⁻¹ ln Tr ρ^λ σ^{1−λ}` for PSD (not necessarily
/// normalised) arguments.
pub fn renyi_divergence(rho: &Psd, sigma: &Psd, order: RenyiOrder) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    if rho.trace() <= 1e-12 {
        return Err(Error::ZeroOperator);
    }
    let lambda = order.value();
    Ok(match renyi_trace(&rho.spectrum(), &sigma.spectrum(), lambda) {
        Some(q) => q.ln() / (lambda - 1.0),
        None => f64::INFINITY,
    })
}

/// `D_λ(ρ‖·)` with the spectrum of ρ cached, for repeated evaluation against
/// many second arguments.
#[derive(Debug, Clone)]
pub struct RenyiFrom {
    rho: Spectrum,
    order: RenyiOrder,
}

impl RenyiFrom {
    pub fn new(rho: &Psd, order: RenyiOrder) -> Result<Self> {
        if rho.trace() <= 1e-12 {
            return Err(Error::ZeroOperator);
        }
        Ok(Self {
            rho: rho.spectrum(),
            order,
        })
    }

    pub fn divergence_to(&self, sigma: &Psd) -> Result<f64> {
        if sigma.dim() != self.rho.eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rho.eigenvalues.len(),
                found: sigma.dim(),
            });
        }
        let lambda = self.order.value();
        Ok(match renyi_trace(&self.rho, &sigma.spectrum(), lambda) {
            Some(q) => q.ln() / (lambda - 1.0),
            None => f64::INFINITY,
        })
    }
}

/// `𝔻_λ(α‖β)`: the Rényi divergence between `αΠ₀ + (1−α)Π₁` and
/// `βΠ₀ + (1/β − β)Π₁`.
pub fn binary_renyi(alpha: f64, beta: f64, order: RenyiOrder) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) || beta == 0.0 {
        return Err(Error::InvalidArgument(format!("beta = {beta} must lie in (0, 1]")));
    }
    binary_renyi_ln_beta(alpha, beta.ln(), order)
}

/// [`binary_renyi`] taking `ln β`, so `β = e^{−nR}` with large `nR` does not
/// underflow.
pub fn binary_renyi_ln_beta(alpha: f64, ln_beta: f64, order: RenyiOrder) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    if !(ln_beta <= 0.0) || ln_beta == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(format!(
            "ln beta = {ln_beta} must lie in (-inf, 0]"
        )));
    }
    let lambda = order.value();
    // ln(1/β − β) = −ln β + ln(1 − β²)
    let ln_second = if ln_beta == 0.0 {
        f64::NEG_INFINITY
    } else {
        -ln_beta + (-(2.0 * ln_beta).exp()).ln_1p()
    };
    if alpha < 1.0 && ln_second == f64::NEG_INFINITY {
        return Err(Error::SupportViolation(
            "beta = 1 leaves no weight on the second projector while alpha < 1".into(),
        ));
    }
    let mut logs = Vec::with_capacity(2);
    if alpha > 0.0 {
        logs.push(lambda * alpha.ln() + (1.0 - lambda) * ln_beta);
    }
    if alpha < 1.0 {
        logs.push(lambda * (1.0 - alpha).ln() + (1.0 - lambda) * ln_second);
    }
    Ok(log_sum_exp(&logs) / (lambda - 1.0))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Hockey-stick divergence `Tr(ρ − γσ)⁺`.
pub fn hockey_stick(rho: &Psd, sigma: &Psd, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let diff = rho.sub(&sigma.scale(gamma))?;
    Ok(positive_part(&diff).trace().max(0.0))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 1.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("gamma = {gamma} must be a finite value >= 1")))
    }
}

/// Binary hockey-stick divergence `(α − γβ)⁺ + ((1−α) − γ(1/β − β))⁺`.
pub fn binary_hockey_stick(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must lie in (0, 1]")));
    }
    check_gamma(gamma)?;
    let first = (alpha - gamma * beta).max(0.0);
    let second = ((1.0 - alpha) - gamma * (1.0 / beta - beta)).max(0.0);
    Ok(first + second)
}

/// `−Σ λᵢ ln λᵢ` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &Density) -> f64 {
    entropy_of_eigenvalues(&rho.spectrum().eigenvalues)
}

pub(crate) fn entropy_of_eigenvalues(eigs: &[f64]) -> f64 {
    -eigs
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// Entropy of any Hermitian operator's clipped spectrum. Internal helper for
/// operators already known to be states.
fn entropy_of(h: &Hermitian) -> f64 {
    let eigs: Vec<f64> = eig_hermitian(h).eigenvalues.into_iter().map(|l| l.max(0.0)).collect();
    entropy_of_eigenvalues(&eigs)
}

/// `I(A⟩B) = H(B) − H(AB)`.
pub fn coherent_information(rho_ab: &Bipartite) -> Result<f64> {
    rho_ab.density()?;
    Ok(entropy_of(&rho_ab.partial_trace(Subsystem::A)) - entropy_of(rho_ab.op()))
}
