//! Gallager-type exponents.
//!
//! * [`k_lambda`]: `K_λ(A⟩B) = inf_σ D_λ(ρ^{AB} ‖ 𝟙 ⊗ σ^B)` through its closed
//!   form `(λ/(λ−1)) ln Tr [Tr_A (ρ^{AB})^λ]^{1/λ}` (quantum Sibson identity).
//! * [`k_lambda_numeric`]: the same infimum by direct multi-start search over
//!   `σ^B`, an oracle that never touches the closed form.
//! * [`g_function`] / [`e0_channel`]: `g(s) = −ln Tr [Tr_A σ^{1/(s+1)}]^{s+1}`,
//!   which equals `s · K_{1/(s+1)}`.
//! * [`g_derivative`]: analytic and finite-difference `∂g/∂s`.
//! * [`k_hockey_numeric`]: `𝒦(A⟩B) = inf_σ Tr(ρ^{AB} − γ 𝟙 ⊗ σ^B)⁺`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{apply_to_b, QuantumChannel};
use crate::divergence::{RenyiFrom, RenyiOrder};
use crate::linalg::{
    derive_seed, eig_hermitian, gaussian_matrix, matrix_power, positive_part, power_from_spectrum,
    scalar_power, seeded_rng, tensor_product, Bipartite, CMatrix, Density, Hermitian, Psd,
    Subsystem,
};
use crate::simplex::{self, SimplexOptions, SimplexResult};
use crate::{Error, Result};

/// Gallager parameter `s ∈ [−1/2, 0]`; `s = 0` is the closed boundary.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SParam(f64);

impl SParam {
    /// Lower end of the admissible range.
    pub const MIN: f64 = -0.5;

    pub fn new(s: f64) -> Result<Self> {
        if (Self::MIN..=0.0).contains(&s) {
            Ok(Self(s))
        } else {
            Err(Error::InvalidS(s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `λ = 1/(s+1)`; `None` at `s = 0`.
    pub fn to_order(self) -> Option<RenyiOrder> {
        if self.0 < 0.0 {
            RenyiOrder::new(1.0 / (self.0 + 1.0)).ok()
        } else {
            None
        }
    }
}

impl From<RenyiOrder> for SParam {
    fn from(order: RenyiOrder) -> Self {
        Self(order.to_s())
    }
}

/// Multi-start simplex search settings for the numeric infima.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    pub starts: usize,
    pub max_iters: usize,
    pub value_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            max_iters: 5000,
            value_tol: 1e-9,
            seed: 0,
        }
    }
}

/// `Tr_A (ρ^{AB})^t` as a PSD operator on B.
fn marginal_of_power(rho_ab: &Bipartite, t: f64) -> Psd {
    let spec = Psd::new_unchecked(rho_ab.op().clone()).spectrum();
    let pow = power_from_spectrum(&spec, t);
    let m = Bipartite::new(rho_ab.dim_a(), rho_ab.dim_b(), pow).expect("same dimensions");
    Psd::new_unchecked(m.partial_trace(Subsystem::A))
}

/// `Tr [Tr_A (ρ^{AB})^{a}]^{b}`.
fn sibson_trace(rho_ab: &Bipartite, a: f64, b: f64) -> f64 {
    matrix_power(&marginal_of_power(rho_ab, a), b).trace()
}

/// Closed-form `K_λ(A⟩B)` for a bipartite state.
pub fn k_lambda(rho_ab: &Bipartite, order: RenyiOrder) -> f64 {
    let lambda = order.value();
    lambda / (lambda - 1.0) * sibson_trace(rho_ab, lambda, 1.0 / lambda).ln()
}

/// The minimiser `σ* = [Tr_A ρ^λ]^{1/λ} / Tr[…]`.
pub fn sibson_state(rho_ab: &Bipartite, order: RenyiOrder) -> Density {
    let lambda = order.value();
    let unnorm = matrix_power(&marginal_of_power(rho_ab, lambda), 1.0 / lambda);
    Density::normalized(&unnorm).expect("marginal of a nonzero state is nonzero")
}

/// `σ = G†G / Tr(G†G)` from `2 d²` real parameters (row-major, re/im pairs).
fn state_from_params(x: &[f64], d: usize) -> Option<Psd> {
    let g = CMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        Complex64::new(x[k], x[k + 1])
    });
    let gg = g.adjoint() * g;
    let tr: f64 = (0..d).map(|i| gg[(i, i)].re).sum();
    if !(tr > 1e-300) || !tr.is_finite() {
        return None;
    }
    Some(Psd::new_unchecked(Hermitian::from_hermitian_part(&gg.scale(1.0 / tr))))
}

/// Parameters of `G = √σ`, so `G†G = σ`.
fn params_for_state(sigma: &Psd) -> Vec<f64> {
    let root = matrix_power(sigma, 0.5);
    let d = sigma.dim();
    let mut x = Vec::with_capacity(2 * d * d);
    for i in 0..d {
        for j in 0..d {
            let z = root.matrix()[(i, j)];
            x.push(z.re);
            x.push(z.im);
        }
    }
    x
}

fn random_params(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    gaussian_matrix(d, d, &mut rng)
        .transpose()
        .iter()
        .flat_map(|z| [z.re, z.im])
        .collect()
}

const MAX_ORACLE_DIM_B: usize = 4;

/// Runs `opts.starts` independent simplex searches over `σ^B`; start 0 begins
/// at `first`, the rest at seeded random `G`. Returns the best converged-or-not
/// value, or `NotConverged` if no start converged.
fn multi_start<F>(dim_b: usize, first: Vec<f64>, opts: &OptimizerOptions, objective: F) -> Result<f64>
where
    F: Fn(&Psd) -> f64 + Sync,
{
    if dim_b > MAX_ORACLE_DIM_B {
        return Err(Error::TooLarge {
            dim: dim_b,
            cap: MAX_ORACLE_DIM_B,
        });
    }
    if opts.starts == 0 || opts.max_iters == 0 || !(opts.value_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "optimizer starts, iterations and tolerance must be positive".into(),
        ));
    }
    let f = |x: &[f64]| match state_from_params(x, dim_b) {
        Some(sigma) => objective(&sigma),
        None => f64::INFINITY,
    };
    let simplex_opts = SimplexOptions {
        max_iters: opts.max_iters,
        value_tol: opts.value_tol,
        initial_step: 0.3,
    };
    let results: Vec<SimplexResult> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let x0 = if i == 0 {
                first.clone()
            } else {
                random_params(dim_b, derive_seed(opts.seed, i as u64))
            };
            simplex::minimize(f, &x0, &simplex_opts)
        })
        .collect();
    let best = results
        .iter()
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    if results.iter().any(|r| r.converged) {
        Ok(best)
    } else {
        Err(Error::NotConverged { best })
    }
}

/// Numeric `inf_σ D_λ(ρ^{AB} ‖ 𝟙 ⊗ σ)` by multi-start simplex search. Small
/// instances only (`dim_b ≤ 4`).
pub fn k_lambda_numeric(rho_ab: &Bipartite, order: RenyiOrder, opts: &OptimizerOptions) -> Result<f64> {
    let rho = rho_ab.density()?;
    let dim_a = rho_ab.dim_a();
    let dim_b = rho_ab.dim_b();
    let div = RenyiFrom::new(&rho, order)?;
    let ident = Hermitian::identity(dim_a);
    let first = params_for_state(&Density::maximally_mixed(dim_b));
    multi_start(dim_b, first, opts, |sigma| {
        let full = Psd::new_unchecked(tensor_product(&ident, sigma));
        div.divergence_to(&full).unwrap_or(f64::INFINITY)
    })
}

/// Numeric `𝒦(A⟩B) = inf_σ Tr(ρ^{AB} − γ 𝟙 ⊗ σ)⁺`. Start 0 is the feasible
/// point `σ = Tr_A ρ`, so the result never exceeds `𝒟(ρ ‖ 𝟙 ⊗ ρ_B)`.
pub fn k_hockey_numeric(rho_ab: &Bipartite, gamma: f64, opts: &OptimizerOptions) -> Result<f64> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must be a finite value >= 1")));
    }
    let rho = rho_ab.density()?;
    let dim_a = rho_ab.dim_a();
    let ident = Hermitian::identity(dim_a);
    let marginal = Psd::new_unchecked(rho_ab.partial_trace(Subsystem::A));
    let first = params_for_state(&marginal);
    multi_start(rho_ab.dim_b(), first, opts, |sigma| {
        let shifted = tensor_product(&ident, sigma).scale(gamma);
        let diff = rho.sub(&shifted).expect("same dimensions");
        positive_part(&diff).trace()
    })
}

/// `g(s) = −ln Tr [Tr_A (σ^{AB})^{1/(s+1)}]^{s+1}`.
pub fn g_function(sigma_ab: &Bipartite, s: SParam) -> f64 {
    g_raw(sigma_ab, s.value())
}

/// `g` at any `s > −1` (finite differences step outside `[−1/2, 0]`).
fn g_raw(sigma_ab: &Bipartite, s: f64) -> f64 {
    -sibson_trace(sigma_ab, 1.0 / (s + 1.0), s + 1.0).ln()
}

/// Derivative evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMethod {
    /// `Tr κ₁ˢ(κ₂ − κ₁ ln κ₁) / Tr κ₁^{s+1}` with `κ₁ = Σ λᵢ^{1/(s+1)} σᵢ`,
    /// `κ₂ = Σ λᵢ^{1/(s+1)} ln(λᵢ^{1/(s+1)}) σᵢ`, `σᵢ = Tr_A |i⟩⟨i|`.
    Analytic,
    /// Central difference with `h = 1e-5`; second-order one-sided at `s = −1/2`.
    FiniteDifference,
}

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;

/// `∂g/∂s`. At `s = 0` this is the coherent information `I(A⟩B)`.
pub fn g_derivative(sigma_ab: &Bipartite, s: SParam, method: DerivativeMethod) -> f64 {
    match method {
        DerivativeMethod::Analytic => g_derivative_analytic(sigma_ab, s.value()),
        DerivativeMethod::FiniteDifference => {
            let s = s.value();
            let h = FD_STEP;
            if s - h < SParam::MIN {
                (-3.0 * g_raw(sigma_ab, s) + 4.0 * g_raw(sigma_ab, s + h) - g_raw(sigma_ab, s + 2.0 * h))
                    / (2.0 * h)
            } else {
                (g_raw(sigma_ab, s + h) - g_raw(sigma_ab, s - h)) / (2.0 * h)
            }
        }
    }
}

fn g_derivative_analytic(sigma_ab: &Bipartite, s: f64) -> f64 {
    let dim_a = sigma_ab.dim_a();
    let dim_b = sigma_ab.dim_b();
    let spec = eig_hermitian(sigma_ab.op());
    let t = 1.0 / (s + 1.0);
    let mut kappa1 = CMatrix::zeros(dim_b, dim_b);
    let mut kappa2 = CMatrix::zeros(dim_b, dim_b);
    for (i, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = spec.eigenvector(i);
        let proj = Bipartite::new(dim_a, dim_b, Hermitian::projector(&v)).expect("same dimensions");
        let sigma_i = proj.partial_trace(Subsystem::A).into_matrix();
        let w = lam.powf(t);
        kappa1 += sigma_i.scale(w);
        kappa2 += sigma_i.scale(w * t * lam.ln());
    }
    let k1 = Psd::new_unchecked(Hermitian::from_hermitian_part(&kappa1)).spectrum();
    let k1_pow_s = power_from_spectrum(&k1, s);
    let cross = crate::linalg::trace_of_product(k1_pow_s.matrix(), &kappa2);
    let mut self_term = 0.0;
    let mut denom = 0.0;
    for &mu in &k1.eigenvalues {
        let m = scalar_power(mu, s + 1.0);
        if m > 0.0 {
            self_term += m * mu.ln();
            denom += m;
        }
    }
    (cross - self_term) / denom
}

/// Both derivative methods side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    /// `|a − f| / max(|a|, |f|, 1e-8)`.
    pub relative_difference: f64,
}

impl DerivativeCheck {
    /// Agreement within `tol` relative; disagreement is reported, not hidden.
    pub fn agrees(&self, tol: f64) -> bool {
        self.relative_difference <= tol
    }
}

pub fn g_derivative_check(sigma_ab: &Bipartite, s: SParam) -> DerivativeCheck {
    let analytic = g_derivative(sigma_ab, s, DerivativeMethod::Analytic);
    let finite_difference = g_derivative(sigma_ab, s, DerivativeMethod::FiniteDifference);
    let scale = analytic.abs().max(finite_difference.abs()).max(1e-8);
    DerivativeCheck {
        analytic,
        finite_difference,
        relative_difference: (analytic - finite_difference).abs() / scale,
    }
}

/// `E₀(s, 𝒩)_ρ = g(s)` evaluated on `(id ⊗ 𝒩)(ρ^{AA'})`.
pub fn e0_channel(ch: &QuantumChannel, rho_aaprime: &Bipartite, s: SParam) -> Result<f64> {
    let out = apply_to_b(ch, rho_aaprime)?;
    Ok(g_function(&out, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{coherent_information, hockey_stick, renyi_divergence};
    use crate::linalg::{maximally_entangled, random_bipartite_density, random_density};
    use std::f64::consts::LN_2;

    fn ord(l: f64) -> RenyiOrder {
        RenyiOrder::new(l).unwrap()
    }

    fn mixed_product(rb: &Density) -> Bipartite {
        Bipartite::product(&Density::maximally_mixed(2), rb)
    }

    #[test]
    fn s_param_range() {
        assert!(SParam::new(0.1).is_err());
        assert!(SParam::new(-0.6).is_err());
        assert!(SParam::new(0.0).unwrap().to_order().is_none());
        let l = SParam::new(-0.5).unwrap().to_order().unwrap();
        assert!((l.value() - 2.0).abs() < 1e-15);
        assert!((SParam::from(ord(1.25)).value() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn k_lambda_closed_form_examples() {
        let phi = maximally_entangled(2);
        assert!((k_lambda(&phi, ord(2.0)) - LN_2).abs() < 1e-12);
        let prod = mixed_product(&random_density(3, 4));
        for l in [1.25, 1.5, 2.0] {
            assert!((k_lambda(&prod, ord(l)) + LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn k_lambda_below_marginal_feasible_point() {
        for seed in 0..10 {
            let rho = random_bipartite_density(2, 3, seed);
            let feasible = Psd::new_unchecked(tensor_product(
                &Hermitian::identity(2),
                &rho.partial_trace(Subsystem::A),
            ));
            for l in [1.25, 2.0] {
                let d = renyi_divergence(&rho.density().unwrap(), &feasible, ord(l)).unwrap();
                assert!(k_lambda(&rho, ord(l)) <= d + 1e-12);
            }
        }
    }

    #[test]
    fn sibson_state_attains_k_lambda() {
        let phi = maximally_entangled(2);
        let s = sibson_state(&phi, ord(2.0));
        assert!(s.max_abs_diff(&Hermitian::diagonal(&[0.5, 0.5])) < 1e-14);

        let rb = random_density(3, 5);
        let prod = Bipartite::product(&random_density(2, 6), &rb);
        let s = sibson_state(&prod, ord(2.0));
        assert!(s.max_abs_diff(&rb) < 1e-12);

        for seed in 0..10 {
            let rho = random_bipartite_density(3, 2, 40 + seed);
            for l in [1.25, 1.5, 2.0] {
                let star = sibson_state(&rho, ord(l));
                assert!((star.trace() - 1.0).abs() < 1e-12);
                let full = Psd::new_unchecked(tensor_product(&Hermitian::identity(3), &star));
                let d = renyi_divergence(&rho.density().unwrap(), &full, ord(l)).unwrap();
                assert!((d - k_lambda(&rho, ord(l))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn numeric_oracle_small_cases() {
        let opts = OptimizerOptions::default();
        let phi = maximally_entangled(2);
        let v = k_lambda_numeric(&phi, ord(2.0), &opts).unwrap();
        assert!((v - LN_2).abs() < 1e-6, "{v}");
        let prod = mixed_product(&random_density(2, 3));
        let v = k_lambda_numeric(&prod, ord(1.5), &opts).unwrap();
        assert!((v + LN_2).abs() < 1e-6, "{v}");
    }

    #[test]
    fn numeric_oracle_guards() {
        let big = random_bipartite_density(1, 5, 0);
        assert!(matches!(
            k_lambda_numeric(&big, ord(2.0), &OptimizerOptions::default()),
            Err(Error::TooLarge { .. })
        ));
        let rho = random_bipartite_density(2, 2, 1);
        let starved = OptimizerOptions {
            starts: 2,
            max_iters: 5,
            ..OptimizerOptions::default()
        };
        assert!(matches!(k_lambda_numeric(&rho, ord(2.0), &starved), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn g_examples() {
        let zero = SParam::new(0.0).unwrap();
        let half = SParam::new(-0.5).unwrap();
        for seed in 0..5 {
            assert!(g_function(&random_bipartite_density(2, 3, seed), zero).abs() < 1e-12);
        }
        let phi = maximally_entangled(2);
        assert!((g_function(&phi, half) + 0.5 * LN_2).abs() < 1e-12);
        let prod = mixed_product(&random_density(2, 8));
        assert!((g_function(&prod, half) - 0.5 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn g_equals_s_times_k() {
        for seed in 0..5 {
            let rho = random_bipartite_density(2, 2, 70 + seed);
            for s in [-0.5, -0.3, -0.1] {
                let sp = SParam::new(s).unwrap();
                let k = k_lambda(&rho, sp.to_order().unwrap());
                assert!((g_function(&rho, sp) - s * k).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn derivative_at_zero_is_coherent_information() {
        let zero = SParam::new(0.0).unwrap();
        let phi = maximally_entangled(2);
        assert!((g_derivative(&phi, zero, DerivativeMethod::Analytic) - LN_2).abs() < 1e-10);
        let prod = mixed_product(&random_density(2, 1));
        assert!((g_derivative(&prod, zero, DerivativeMethod::Analytic) + LN_2).abs() < 1e-10);
        for seed in 0..5 {
            let rho = random_bipartite_density(2, 3, 90 + seed);
            let ci = coherent_information(&rho).unwrap();
            assert!((g_derivative(&rho, zero, DerivativeMethod::Analytic) - ci).abs() < 1e-10);
            assert!(g_derivative_check(&rho, zero).agrees(1e-4));
        }
    }

    #[test]
    fn derivative_methods_agree_away_from_zero() {
        for seed in 0..5 {
            let rho = random_bipartite_density(3, 2, 300 + seed);
            for s in [-0.5, -0.25, -0.05] {
                let c = g_derivative_check(&rho, SParam::new(s).unwrap());
                assert!(c.agrees(1e-4), "seed {seed} s {s}: {c:?}");
            }
        }
    }

    #[test]
    fn e0_channel_identity() {
        let id = QuantumChannel::identity(3);
        let phi = maximally_entangled(3);
        for s in [-0.5, -0.2, 0.0] {
            let v = e0_channel(&id, &phi, SParam::new(s).unwrap()).unwrap();
            assert!((v - s * 3f64.ln()).abs() < 1e-12);
        }
        assert!(e0_channel(&QuantumChannel::identity(2), &phi, SParam::new(-0.5).unwrap()).is_err());
    }

    #[test]
    fn hockey_oracle_examples() {
        let opts = OptimizerOptions::default();
        let prod = mixed_product(&random_density(2, 2));
        let v = k_hockey_numeric(&prod, 1.0, &opts).unwrap();
        assert!(v.abs() < 1e-9, "{v}");

        let phi = maximally_entangled(2);
        let v = k_hockey_numeric(&phi, 1.0, &opts).unwrap();
        let bound = hockey_stick(
            &phi.density().unwrap(),
            &Psd::new_unchecked(tensor_product(&Hermitian::identity(2), &Density::maximally_mixed(2))),
            1.0,
        )
        .unwrap();
        assert!((bound - 0.5).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&v) && v <= bound + 1e-12);

        let rho = random_bipartite_density(2, 2, 17);
        let gamma = 2.0 * rho.spectrum_max();
        assert!(k_hockey_numeric(&rho, gamma, &opts).unwrap() < 1e-9);
        assert!(k_hockey_numeric(&rho, 0.5, &opts).is_err());
    }

    trait MaxEig {
        fn spectrum_max(&self) -> f64;
    }
    impl MaxEig for Bipartite {
        fn spectrum_max(&self) -> f64 {
            eig_hermitian(self.op()).eigenvalues[0]
        }
    }
}
