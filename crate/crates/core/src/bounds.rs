//! Converse bounds on fidelity.
//!
//! For the erasure channel `𝒩_p` with maximally entangled inputs,
//!
//! ```text
//! E₀(s) = −ln[(1−p) d^{−s} + p d^{s}],      Q = (1−2p)⁺ ln d,
//! 𝔽 ≤ exp{n [s R − E₀(s)]}                  for every s ∈ [−1/2, 0).
//! ```
//!
//! The generic converse `𝔻_λ(𝔽 ‖ e^{−nR}) ≤ K_λ(A⟩Bⁿ)` is checked by
//! [`theorem1_slack`] for any channel and input state.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channel::{apply_to_b, tensor_power, QuantumChannel};
use crate::divergence::{binary_renyi_ln_beta, RenyiOrder};
use crate::exponent::{k_lambda, SParam};
use crate::linalg::Bipartite;
use crate::{Error, Result};

/// Grid size for the `s` search in [`strong_converse_exponent`].
pub const S_GRID_POINTS: usize = 1024;
/// Golden-section refinement width in `s`.
pub const S_REFINE_TOL: f64 = 1e-8;
/// Log-space slack on `𝔽 ≥ e^{−nR}`, so `𝔽 = exp(−nR)` computed in floating
/// point is accepted.
pub const FLOOR_SLACK: f64 = 1e-12;

/// Channel uses, rate and erasure parameters of a bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub n: usize,
    /// Nats per channel use, `ln|S| / n`.
    pub rate: f64,
    pub p: f64,
    pub d_a: usize,
}

impl BoundQuery {
    pub fn new(n: usize, rate: f64, p: f64, d_a: usize) -> Result<Self> {
        let q = Self { n, rate, p, d_a };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(Error::InvalidArgument(format!("rate {} must be finite and >= 0", self.rate)));
        }
        check_erasure(self.p, self.d_a)
    }
}

fn check_erasure(p: f64, d_a: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    if d_a < 2 {
        return Err(Error::BadDimensions(format!("d_A = {d_a} must be at least 2")));
    }
    Ok(())
}

/// `E₀(s) = −ln[(1−p) d^{−s} + p d^{s}]`, exactly 0 at `s = 0`.
pub fn erasure_e0(p: f64, d_a: usize, s: SParam) -> f64 {
    let s = s.value();
    if s == 0.0 {
        return 0.0;
    }
    erasure_e0_raw(p, d_a, s)
}

fn erasure_e0_raw(p: f64, d_a: usize, s: f64) -> f64 {
    let ln_d = (d_a as f64).ln();
    -((1.0 - p) * (-s * ln_d).exp() + p * (s * ln_d).exp()).ln()
}

/// `Q(𝒩_p) = (1−2p)⁺ ln d_A`.
pub fn erasure_capacity(p: f64, d_a: usize) -> f64 {
    (1.0 - 2.0 * p).max(0.0) * (d_a as f64).ln()
}

/// `min(1, exp{n [s R − E₀(s)]})`.
pub fn fidelity_bound_renyi(q: &BoundQuery, s: SParam) -> Result<f64> {
    q.validate()?;
    Ok(renyi_log_bound(q, s).exp().min(1.0))
}

/// Uncapped `n [s R − E₀(s)]`.
pub fn renyi_log_bound(q: &BoundQuery, s: SParam) -> f64 {
    q.n as f64 * (s.value() * q.rate - erasure_e0(q.p, q.d_a, s))
}

/// Optimal Gallager exponent `max_{s ∈ [−1/2, 0)} [E₀(s) − s R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseExponent {
    /// Maximiser; `0.0` when the supremum is the `s ↑ 0` limit (exponent 0).
    pub s_star: f64,
    pub exponent: f64,
}

/// Dense grid plus golden-section refinement; no concavity assumed.
pub fn strong_converse_exponent(rate: f64, p: f64, d_a: usize) -> Result<ConverseExponent> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate {rate} must be finite and >= 0")));
    }
    check_erasure(p, d_a)?;
    let h = |s: f64| erasure_e0_raw(p, d_a, s) - s * rate;
    let step = 0.5 / S_GRID_POINTS as f64;
    let grid: Vec<f64> = (0..S_GRID_POINTS).map(|k| SParam::MIN + k as f64 * step).collect();
    let (best_k, best_v) = grid
        .iter()
        .enumerate()
        .map(|(k, &s)| (k, h(s)))
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });

    // s ↑ 0 gives exponent 0.
    if best_v <= 0.0 {
        return Ok(ConverseExponent {
            s_star: 0.0,
            exponent: 0.0,
        });
    }

    let lo = if best_k == 0 { grid[0] } else { grid[best_k - 1] };
    let hi = if best_k + 1 < grid.len() { grid[best_k + 1] } else { -step * 1e-3 };
    let (s_ref, v_ref) = golden_section_max(h, lo, hi, S_REFINE_TOL);
    let (s_star, exponent) = if v_ref > best_v { (s_ref, v_ref) } else { (grid[best_k], best_v) };
    Ok(ConverseExponent { s_star, exponent })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `exp{−(n/2)[R − Q]}`: the `γ e^{−nR}` term with `ln γ = n(R+Q)/2`.
pub fn hockey_capacity_term(q: &BoundQuery) -> f64 {
    let cap = erasure_capacity(q.p, q.d_a);
    (-(q.n as f64) / 2.0 * (q.rate - cap)).exp()
}

/// `exp{−(n/2p)[(2p−1)⁺/2 + R/(4 ln d_A)]²}`, the Chernoff term.
pub fn hockey_chernoff_term(q: &BoundQuery) -> f64 {
    let x = (2.0 * q.p - 1.0).max(0.0) / 2.0 + q.rate / (4.0 * (q.d_a as f64).ln());
    (-(q.n as f64) / (2.0 * q.p) * x * x).exp()
}

/// Uncapped two-term hockey-stick bound.
pub fn fidelity_bound_hockey_raw(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    if q.p <= 0.0 {
        return Err(Error::InvalidArgument("the hockey-stick bound needs p > 0".into()));
    }
    let capacity = erasure_capacity(q.p, q.d_a);
    if !(q.rate > capacity) {
        return Err(Error::RateBelowCapacity {
            rate: q.rate,
            capacity,
        });
    }
    Ok(hockey_capacity_term(q) + hockey_chernoff_term(q))
}

/// Hockey-stick fidelity bound, capped at 1.
pub fn fidelity_bound_hockey(q: &BoundQuery) -> Result<f64> {
    Ok(fidelity_bound_hockey_raw(q)?.min(1.0))
}

/// Summation cutoff `⌊n/2⌋ − ⌊ln γ / (2 ln d_A)⌋` with `ln γ = n(R+Q)/2`.
/// Negative when no term survives.
pub fn hockey_cutoff(q: &BoundQuery) -> i64 {
    let cap = erasure_capacity(q.p, q.d_a);
    let ln_gamma = q.n as f64 * (q.rate + cap) / 2.0;
    (q.n / 2) as i64 - (ln_gamma / (2.0 * (q.d_a as f64).ln())).floor() as i64
}

/// Exact `Σ_{k=0}^{m} C(n,k) (1−p)^{n−k} pᵏ`, accumulated in log space.
pub fn binomial_tail(n: usize, m: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!("cutoff {m} exceeds n = {n}")));
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(if m == n { 1.0 } else { 0.0 });
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let mut ln_choose = 0.0;
    let mut acc = f64::NEG_INFINITY;
    for k in 0..=m {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let term = ln_choose + (n - k) as f64 * ln_q + k as f64 * ln_p;
        acc = if acc == f64::NEG_INFINITY {
            term
        } else {
            let hi = acc.max(term);
            hi + ((acc - hi).exp() + (term - hi).exp()).ln()
        };
    }
    Ok(acc.exp().min(1.0))
}

/// Exact binomial tail at the hockey-stick cutoff (0 when the cutoff is
/// negative).
pub fn binomial_tail_at_cutoff(q: &BoundQuery) -> Result<f64> {
    let m = hockey_cutoff(q);
    if m < 0 {
        return Ok(0.0);
    }
    binomial_tail(q.n, (m as usize).min(q.n), q.p)
}

/// Where the code's output state comes from.
#[derive(Debug, Clone)]
pub enum CodeOutput<'a> {
    /// `ρ^{ABⁿ}` already computed.
    State(&'a Bipartite),
    /// `𝒩^{⊗n}` applied to `ρ^{AA'ⁿ}`.
    Channel {
        channel: &'a QuantumChannel,
        input: &'a Bipartite,
    },
}

/// `K_λ(A⟩Bⁿ) − 𝔻_λ(𝔽 ‖ e^{−nR})`; nonnegative for every realisable code.
pub fn theorem1_slack(fidelity: f64, n: usize, rate: f64, output: CodeOutput<'_>, order: RenyiOrder) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidArgument(format!("fidelity {fidelity} must lie in [0, 1]")));
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate {rate} must be finite and >= 0")));
    }
    let ln_floor = -(n as f64) * rate;
    if fidelity.ln() < ln_floor - FLOOR_SLACK {
        return Err(Error::ConstraintViolated {
            fidelity,
            floor: ln_floor.exp(),
        });
    }
    let state = match output {
        CodeOutput::State(s) => s.clone(),
        CodeOutput::Channel { channel, input } => {
            let power = tensor_power(channel, n, input.dim_a())?;
            apply_to_b(&power, input)?
        }
    };
    state.density()?;
    let k = k_lambda(&state, order);
    Ok(k - binary_renyi_ln_beta(fidelity, ln_floor, order)?)
}

/// `𝔻_λ(𝔽 ‖ e^{−nR}) − [(λ/(λ−1)) ln 𝔽 + nR]`, never below 0 in exact
/// arithmetic.
pub fn renyi_lower_bound_check(fidelity: f64, n: usize, rate: f64, order: RenyiOrder) -> Result<f64> {
    if !(fidelity > 0.0 && fidelity <= 1.0) {
        return Err(Error::InvalidArgument(format!("fidelity {fidelity} must lie in (0, 1]")));
    }
    let ln_beta = -(n as f64) * rate;
    if fidelity.ln() < ln_beta - FLOOR_SLACK {
        return Err(Error::ConstraintViolated {
            fidelity,
            floor: ln_beta.exp(),
        });
    }
    let lambda = order.value();
    let lhs = binary_renyi_ln_beta(fidelity, ln_beta, order)?;
    Ok(lhs - (lambda / (lambda - 1.0) * fidelity.ln() - ln_beta))
}

/// Which bound a curve row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    Renyi,
    Hockey,
    Both,
}

impl BoundMethod {
    fn label(self) -> &'static str {
        match self {
            BoundMethod::Renyi => "renyi",
            BoundMethod::Hockey => "hockey",
            BoundMethod::Both => "both",
        }
    }
}

impl std::str::FromStr for BoundMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "renyi" => Ok(Self::Renyi),
            "hockey" => Ok(Self::Hockey),
            "both" => Ok(Self::Both),
            other => Err(Error::Parse(format!("unknown method '{other}' (renyi|hockey|both)"))),
        }
    }
}

/// Swept variable of a curve; the other is taken from the query.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    OverN(Vec<usize>),
    OverRate(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub sweep_var: f64,
    /// NaN for hockey-stick rows.
    pub s_star: f64,
    /// Renyi rows: optimal exponent. Hockey rows: `−ln(bound)/n` before
    /// capping.
    pub exponent: f64,
    pub fidelity_bound: f64,
    pub method: BoundMethod,
    /// Set when the point could not be evaluated; numbers are then NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub query: BoundQuery,
    pub sweep_is_n: bool,
    pub rows: Vec<CurveRow>,
}

pub const CSV_HEADER: &str = "sweep_var,s_star,exponent,fidelity_bound,method";

impl BoundCurve {
    /// CSV with [`CSV_HEADER`], 17 significant digits, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let var = if self.sweep_is_n {
                format!("{}", r.sweep_var as u64)
            } else {
                format_float(r.sweep_var)
            };
            let method = match &r.error {
                None => r.method.label().to_string(),
                Some(e) => format!("{}!{}", r.method.label(), e),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                var,
                format_float(r.s_star),
                format_float(r.exponent),
                format_float(r.fidelity_bound),
                method
            );
        }
        out
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn error_tag(e: &Error) -> String {
    match e {
        Error::RateBelowCapacity { .. } => "rate-below-capacity".into(),
        Error::BadProbability(_) => "bad-probability".into(),
        Error::InvalidArgument(_) => "invalid-argument".into(),
        _ => "error".into(),
    }
}

fn renyi_row(q: &BoundQuery, var: f64) -> CurveRow {
    let evaluated = strong_converse_exponent(q.rate, q.p, q.d_a).and_then(|ce| {
        let s = SParam::new(ce.s_star)?;
        Ok((ce, fidelity_bound_renyi(q, s)?))
    });
    match evaluated {
        Ok((ce, bound)) => CurveRow {
            sweep_var: var,
            s_star: ce.s_star,
            exponent: ce.exponent,
            fidelity_bound: bound,
            method: BoundMethod::Renyi,
            error: None,
        },
        Err(e) => flagged(var, BoundMethod::Renyi, &e),
    }
}

fn hockey_row(q: &BoundQuery, var: f64) -> CurveRow {
    match fidelity_bound_hockey_raw(q) {
        Ok(raw) => CurveRow {
            sweep_var: var,
            s_star: f64::NAN,
            exponent: -raw.ln() / q.n as f64,
            fidelity_bound: raw.min(1.0),
            method: BoundMethod::Hockey,
            error: None,
        },
        Err(e) => flagged(var, BoundMethod::Hockey, &e),
    }
}

fn flagged(var: f64, method: BoundMethod, e: &Error) -> CurveRow {
    CurveRow {
        sweep_var: var,
        s_star: f64::NAN,
        exponent: f64::NAN,
        fidelity_bound: f64::NAN,
        method,
        error: Some(error_tag(e)),
    }
}

/// One row per sweep point (two for [`BoundMethod::Both`]), sorted by the
/// swept variable. Per-point failures become flagged rows.
pub fn curve_sweep(q: &BoundQuery, sweep: &Sweep, method: BoundMethod) -> Result<BoundCurve> {
    check_erasure(q.p, q.d_a)?;
    let points: Vec<(BoundQuery, f64)> = match sweep {
        Sweep::OverN(ns) => {
            let mut ns = ns.clone();
            ns.sort_unstable();
            ns.into_iter().map(|n| (BoundQuery { n, ..*q }, n as f64)).collect()
        }
        Sweep::OverRate(rates) => {
            let mut rates = rates.clone();
            rates.sort_by(f64::total_cmp);
            rates.into_iter().map(|rate| (BoundQuery { rate, ..*q }, rate)).collect()
        }
    };
    if points.is_empty() {
        return Err(Error::InvalidArgument("sweep list is empty".into()));
    }
    let rows: Vec<CurveRow> = points
        .par_iter()
        .flat_map_iter(|(pq, var)| {
            let mut rows = Vec::with_capacity(2);
            let valid = pq.validate();
            if let Err(e) = valid {
                rows.push(flagged(*var, method, &e));
                return rows;
            }
            if matches!(method, BoundMethod::Renyi | BoundMethod::Both) {
                rows.push(renyi_row(pq, *var));
            }
            if matches!(method, BoundMethod::Hockey | BoundMethod::Both) {
                rows.push(hockey_row(pq, *var));
            }
            rows
        })
        .collect();
    Ok(BoundCurve {
        query: *q,
        sweep_is_n: matches!(sweep, Sweep::OverN(_)),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::erasure_channel;
    use crate::linalg::maximally_entangled;
    use std::f64::consts::LN_2;

    fn s(v: f64) -> SParam {
        SParam::new(v).unwrap()
    }

    #[test]
    fn e0_examples() {
        for &p in &[0.0, 0.3, 1.0] {
            assert_eq!(erasure_e0(p, 3, s(0.0)), 0.0);
        }
        assert!((erasure_e0(0.0, 2, s(-0.5)) + 0.5 * LN_2).abs() < 1e-15);
        let v = erasure_e0(0.25, 2, s(-0.5));
        let expected = -(0.75 * 2f64.sqrt() + 0.25 / 2f64.sqrt()).ln();
        assert!((v - expected).abs() < 1e-15);
        assert!((v + 0.213_042_197_655).abs() < 1e-11);
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(erasure_capacity(0.6, 2), 0.0);
        assert!((erasure_capacity(0.25, 2) - 0.5 * LN_2).abs() < 1e-15);
        assert!((erasure_capacity(0.25, 2) - 0.346574).abs() < 1e-6);
        let lim = erasure_e0(0.25, 2, s(-1e-4)) / -1e-4;
        assert!((lim - erasure_capacity(0.25, 2)).abs() < 1e-4);
    }

    #[test]
    fn renyi_bound_examples() {
        for &rate in &[0.1, 0.5, 0.69] {
            for &sv in &[-0.5, -0.2, -0.01] {
                let q = BoundQuery::new(10, rate, 0.0, 2).unwrap();
                assert_eq!(fidelity_bound_renyi(&q, s(sv)).unwrap(), 1.0);
            }
        }
        let q = BoundQuery::new(100, 0.45, 0.25, 2).unwrap();
        let b = fidelity_bound_renyi(&q, s(-0.5)).unwrap();
        let expected = (100.0 * (-0.5 * 0.45 - erasure_e0(0.25, 2, s(-0.5)))).exp();
        assert!((b - expected).abs() < 1e-15);
        assert!((b - 0.302_467_866_241).abs() < 1e-11);
        let q2 = BoundQuery { n: 200, ..q };
        let b2 = fidelity_bound_renyi(&q2, s(-0.5)).unwrap();
        assert!((b2 - b * b).abs() < 1e-12);
    }

    #[test]
    fn exponent_examples() {
        let cap = erasure_capacity(0.25, 2);
        let at_cap = strong_converse_exponent(cap, 0.25, 2).unwrap();
        assert!(at_cap.exponent.abs() < 1e-6);

        let e = strong_converse_exponent(0.45, 0.25, 2).unwrap();
        let hand = erasure_e0(0.25, 2, s(-0.5)) + 0.5 * 0.45;
        assert!((hand - 0.011_957_802_345).abs() < 1e-11);
        assert!(e.exponent >= hand);
        assert!(e.s_star > -0.5 && e.s_star < 0.0);

        for &rate in &[0.01, 0.3, 1.0] {
            assert!(strong_converse_exponent(rate, 0.6, 2).unwrap().exponent > 0.0);
        }
    }

    #[test]
    fn exponent_matches_bounded_scalar_search() {
        // Reference optimum from an independent bounded Brent search.
        let e = strong_converse_exponent(0.45, 0.25, 2).unwrap();
        assert!((e.exponent - 0.016_035_410_912_530_4).abs() < 1e-12);
        assert!((e.s_star + 0.324_073_4).abs() < 1e-6);
        let q = BoundQuery::new(100, 0.45, 0.25, 2).unwrap();
        let b = fidelity_bound_renyi(&q, s(e.s_star)).unwrap();
        assert!((b - 0.201_182_848_331).abs() < 1e-10);
    }

    #[test]
    fn exponent_is_grid_maximum() {
        // Refinement never loses to a brute-force scan.
        for &(rate, p) in &[(0.45, 0.25), (0.8, 0.1), (0.2, 0.7)] {
            let e = strong_converse_exponent(rate, p, 2).unwrap();
            let brute = (0..100_000)
                .map(|k| -0.5 + 0.5 * k as f64 / 100_000.0)
                .map(|sv| erasure_e0_raw(p, 2, sv) - sv * rate)
                .fold(0.0f64, f64::max);
            assert!(e.exponent >= brute - 1e-12, "{e:?} vs {brute}");
            assert!(e.exponent <= brute + 1e-9);
        }
    }

    #[test]
    fn hockey_examples() {
        let q = BoundQuery::new(100, 0.45, 0.25, 2).unwrap();
        let b = fidelity_bound_hockey(&q).unwrap();
        assert!((hockey_capacity_term(&q) - 5.68e-3).abs() < 1e-5);
        assert!((hockey_chernoff_term(&q) - 5.15e-3).abs() < 1e-5);
        assert!((b - 1.083e-2).abs() < 1e-4);
        let b2 = fidelity_bound_hockey(&BoundQuery { n: 200, ..q }).unwrap();
        assert!(b2 < b);
        assert!(matches!(
            fidelity_bound_hockey(&BoundQuery { rate: 0.34, ..q }),
            Err(Error::RateBelowCapacity { .. })
        ));
        assert!(fidelity_bound_hockey(&BoundQuery { p: 0.0, rate: 1.0, ..q }).is_err());
    }

    #[test]
    fn cutoff_value() {
        let q = BoundQuery::new(100, 0.45, 0.25, 2).unwrap();
        assert_eq!(hockey_cutoff(&q), 22);
        assert!(hockey_cutoff(&q) < (q.n as f64 * q.p) as i64);
    }

    #[test]
    fn binomial_tail_examples() {
        assert!((binomial_tail(30, 30, 0.3).unwrap() - 1.0).abs() < 1e-12);
        assert!((binomial_tail(30, 0, 0.3).unwrap() - 0.7f64.powi(30)).abs() < 1e-15);
        // n = 4, p = 1/2: (1 + 4 + 6) / 16
        assert!((binomial_tail(4, 2, 0.5).unwrap() - 11.0 / 16.0).abs() < 1e-15);
        assert_eq!(binomial_tail(5, 2, 0.0).unwrap(), 1.0);
        assert_eq!(binomial_tail(5, 2, 1.0).unwrap(), 0.0);
        assert_eq!(binomial_tail(5, 5, 1.0).unwrap(), 1.0);
        assert!(binomial_tail(5, 6, 0.5).is_err());
    }

    #[test]
    fn binomial_tail_against_direct_sum() {
        // Direct product-form sum, independent of the log-space recurrence.
        fn direct(n: u64, m: u64, p: f64) -> f64 {
            (0..=m)
                .map(|k| {
                    let c = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
                    c * (1.0 - p).powi((n - k) as i32) * p.powi(k as i32)
                })
                .sum()
        }
        for &(n, m, p) in &[(50, 11, 0.25), (100, 22, 0.25), (60, 40, 0.6), (20, 7, 0.1)] {
            let a = binomial_tail(n, m, p).unwrap();
            let b = direct(n as u64, m as u64, p);
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{n} {m} {p}: {a} vs {b}");
        }
    }

    #[test]
    fn chernoff_term_dominates_above_half() {
        for &p in &[0.6, 0.75, 0.9] {
            for &n in &[50, 100, 200] {
                let q = BoundQuery::new(n, 0.45, p, 2).unwrap();
                assert!(binomial_tail_at_cutoff(&q).unwrap() <= hockey_chernoff_term(&q));
            }
        }
    }

    #[test]
    fn theorem1_examples() {
        let phi = maximally_entangled(2);
        let id = QuantumChannel::identity(2);
        for l in [1.25, 1.5, 2.0] {
            let ord = RenyiOrder::new(l).unwrap();
            let slack = theorem1_slack(1.0, 1, LN_2, CodeOutput::Channel { channel: &id, input: &phi }, ord).unwrap();
            assert!(slack.abs() < 1e-10, "{slack}");
        }
        let ord = RenyiOrder::new(2.0).unwrap();
        let er = erasure_channel(2, 0.25).unwrap();
        let slack = theorem1_slack(0.75, 1, LN_2, CodeOutput::Channel { channel: &er, input: &phi }, ord).unwrap();
        assert!(slack >= 0.0);
        let lhs = (0.5625f64 / 0.5 + 0.0625 / 1.5).ln();
        let k2 = -erasure_e0(0.25, 2, s(-0.5)) / 0.5;
        assert!((slack - (k2 - lhs)).abs() < 1e-10);
        assert!(matches!(
            theorem1_slack(0.4, 1, LN_2, CodeOutput::State(&phi), ord),
            Err(Error::ConstraintViolated { .. })
        ));
    }

    #[test]
    fn lower_bound_examples() {
        for l in [1.25, 2.0] {
            let ord = RenyiOrder::new(l).unwrap();
            assert!(renyi_lower_bound_check(1.0, 3, 0.7, ord).unwrap().abs() < 1e-12);
            assert!(renyi_lower_bound_check(0.9, 2, 0.5, ord).unwrap() >= 0.0);
            let edge = (-2.0f64 * 0.5).exp();
            let v = renyi_lower_bound_check(edge, 2, 0.5, ord).unwrap();
            assert!(v.is_finite() && v >= 0.0);
        }
    }

    #[test]
    fn sweeps() {
        let q = BoundQuery::new(1, 0.45, 0.25, 2).unwrap();
        let curve = curve_sweep(&q, &Sweep::OverN((10..=100).step_by(10).collect()), BoundMethod::Renyi).unwrap();
        assert_eq!(curve.rows.len(), 10);
        for w in curve.rows.windows(2) {
            assert!(w[1].fidelity_bound < w[0].fidelity_bound);
        }

        let cap = erasure_capacity(0.25, 2);
        let rates: Vec<f64> = (0..20).map(|k| 0.05 + 0.04 * k as f64).collect();
        let curve = curve_sweep(&q, &Sweep::OverRate(rates), BoundMethod::Renyi).unwrap();
        for r in &curve.rows {
            if r.sweep_var <= cap {
                assert_eq!(r.exponent, 0.0);
            } else {
                assert!(r.exponent > 0.0);
            }
        }

        let q100 = BoundQuery { n: 100, ..q };
        let single = curve_sweep(&q, &Sweep::OverN(vec![100]), BoundMethod::Both).unwrap();
        assert_eq!(single.rows.len(), 2);
        let ce = strong_converse_exponent(0.45, 0.25, 2).unwrap();
        assert_eq!(single.rows[0].exponent, ce.exponent);
        assert_eq!(
            single.rows[0].fidelity_bound,
            fidelity_bound_renyi(&q100, s(ce.s_star)).unwrap()
        );
        assert_eq!(single.rows[1].fidelity_bound, fidelity_bound_hockey(&q100).unwrap());
        assert!(curve_sweep(&q, &Sweep::OverN(vec![]), BoundMethod::Renyi).is_err());
    }

    #[test]
    fn flagged_rows_and_csv() {
        let q = BoundQuery::new(10, 0.1, 0.25, 2).unwrap();
        let curve = curve_sweep(&q, &Sweep::OverN(vec![20, 10]), BoundMethod::Hockey).unwrap();
        assert_eq!(curve.rows.len(), 2);
        assert!(curve.rows.iter().all(|r| r.error.as_deref() == Some("rate-below-capacity")));
        let csv = curve.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "10,NaN,NaN,NaN,hockey!rate-below-capacity");
        assert!(!csv.contains('\r'));

        let curve = curve_sweep(&BoundQuery { rate: 0.45, ..q }, &Sweep::OverRate(vec![0.45]), BoundMethod::Renyi).unwrap();
        let csv = curve.to_csv();
        let fields: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields[0], "4.5000000000000001e-1");
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.45);
        let parsed: f64 = fields[3].parse().unwrap();
        assert_eq!(parsed, curve.rows[0].fidelity_bound);
    }
}
