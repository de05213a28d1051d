//! Time-parametrized CPTP channel families.
//!
//! Two concrete families matter here: the qubit Pauli/depolarizing family
//! generated by dρ/dt = Σᵢ γᵢ (σᵢ ρ σᵢ − ρ), and the d-dimensional
//! generalized Pauli (Weyl) channels Λ(ρ) = Σ p_kl W_kl ρ W_kl†. Rates are
//! constant in time for every quantitative result; time-dependent rates are
//! supported behind the same interface through numerical quadrature of the
//! ξ-integrals.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics;
use crate::qlinalg::{self, tol, ComplexMatrix, DensityMatrix, C64};

/// Non-negative Lindblad coefficients (γ₁, γ₂, γ₃) of the Pauli dissipators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliRates {
    gamma1: f64,
    gamma2: f64,
    gamma3: f64,
}

impl PauliRates {
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64) -> Result<Self> {
        if !(gamma1 >= 0.0 && gamma2 >= 0.0 && gamma3 >= 0.0)
            || !gamma1.is_finite()
            || !gamma2.is_finite()
            || !gamma3.is_finite()
        {
            return Err(Error::Domain(
                "Lindblad coefficients must be finite and non-negative".into(),
            ));
        }
        Ok(Self { gamma1, gamma2, gamma3 })
    }

    /// Equal rates γ₁ = γ₂ = γ₃ = γ, the completely depolarizing case.
    pub fn symmetric(gamma: f64) -> Result<Self> {
        Self::new(gamma, gamma, gamma)
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn gamma3(&self) -> f64 {
        self.gamma3
    }

    /// ξ₁(t) = (γ₁+γ₂)t and ξ₂(t) = (γ₂+γ₃)t for constant rates.
    pub fn xi(&self, t: f64) -> (f64, f64) {
        ((self.gamma1 + self.gamma2) * t, (self.gamma2 + self.gamma3) * t)
    }

    /// Bloch contraction factors (c_x, c_y, c_z) of the exact dynamical map.
    pub fn bloch_factors(&self, t: f64) -> (f64, f64, f64) {
        (
            (-2.0 * (self.gamma2 + self.gamma3) * t).exp(),
            (-2.0 * (self.gamma1 + self.gamma3) * t).exp(),
            (-2.0 * (self.gamma1 + self.gamma2) * t).exp(),
        )
    }
}

/// A linear, Hermiticity-preserving map family parametrized by time.
///
/// `apply` acts on arbitrary Hermitian operators (needed to tabulate the
/// map in an operator basis); `apply_state` adds the density-matrix
/// validation on top.
pub trait MapFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix>;

    fn apply_state(&self, t: f64, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply(t, rho.matrix())?)
    }

    /// Applies the map at one time to several operators. Implementations
    /// that pay a per-time setup cost override this.
    fn apply_batch(&self, t: f64, xs: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        xs.iter().map(|x| self.apply(t, x)).collect()
    }
}

/// A time-indexed generator of Kraus sets, checked for trace preservation
/// at every sampled time.
#[derive(Clone)]
pub struct KrausFamily {
    dim: usize,
    kraus_fn: Arc<dyn Fn(f64) -> Result<Vec<ComplexMatrix>> + Send + Sync>,
}

impl KrausFamily {
    pub fn new(
        dim: usize,
        kraus_fn: impl Fn(f64) -> Result<Vec<ComplexMatrix>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            kraus_fn: Arc::new(kraus_fn),
        }
    }

    /// The depolarizing family of the master equation above with constant
    /// rates.
    pub fn depolarizing(rates: PauliRates) -> Self {
        Self::new(2, move |t| depolarizing_kraus(t, &rates))
    }

    /// Exact Pauli channel family {√pᵢ(t) σᵢ} for arbitrary constant rates.
    ///
    /// Unlike the depolarizing Kraus set this stays completely positive for
    /// any non-negative rate triple, so it is the representation used in
    /// asymmetric-rate sweeps.
    pub fn pauli(rates: PauliRates) -> Self {
        Self::new(2, move |t| pauli_channel_kraus(t, &rates))
    }

    /// Depolarizing family with time-dependent rates; the ξ-integrals are
    /// evaluated by Simpson quadrature.
    pub fn depolarizing_time_dependent(
        rates_at: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    ) -> Self {
        let rates_at = Arc::new(rates_at);
        Self::new(2, move |t| {
            if t < 0.0 {
                return Err(Error::Domain(format!("time must be non-negative, got {t}")));
            }
            if t == 0.0 {
                return depolarizing_kraus_from_xi(0.0, 0.0);
            }
            let r1 = rates_at.clone();
            let r2 = rates_at.clone();
            let panels = ((t * 200.0).ceil() as usize).clamp(64, 20_000);
            let xi1 = numerics::simpson(
                &mut move |s| {
                    let (g1, g2, _) = r1(s);
                    Ok(g1 + g2)
                },
                0.0,
                t,
                panels,
            )?;
            let xi2 = numerics::simpson(
                &mut move |s| {
                    let (_, g2, g3) = r2(s);
                    Ok(g2 + g3)
                },
                0.0,
                t,
                panels,
            )?;
            depolarizing_kraus_from_xi(xi1, xi2)
        })
    }

    /// A time-independent channel.
    pub fn constant(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = kraus
            .first()
            .map(ComplexMatrix::dim)
            .ok_or_else(|| Error::Contract("Kraus set must be nonempty".into()))?;
        check_trace_preserving(&kraus)?;
        Ok(Self::new(dim, move |_| Ok(kraus.clone())))
    }

    /// Kraus operators at time t; Σ K†K = 𝕀 is verified on every call.
    pub fn kraus_at(&self, t: f64) -> Result<Vec<ComplexMatrix>> {
        if t < 0.0 {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        let kraus = (self.kraus_fn)(t)?;
        check_trace_preserving(&kraus)?;
        Ok(kraus)
    }
}

impl MapFamily for KrausFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let kraus = self.kraus_at(t)?;
        Ok(apply_kraus_to_operator(&kraus, x))
    }

    fn apply_batch(&self, t: f64, xs: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        let kraus = self.kraus_at(t)?;
        Ok(xs.iter().map(|x| apply_kraus_to_operator(&kraus, x)).collect())
    }
}

/// p Φ₁∘Φ₂ + (1−p) Φ₂∘Φ₁ as a map family (the classical alternative to
/// superposing the causal orders).
pub struct MixtureFamily {
    first: KrausFamily,
    second: KrausFamily,
    p: f64,
}

impl MixtureFamily {
    pub fn new(first: KrausFamily, second: KrausFamily, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("mixing probability must be in [0,1], got {p}")));
        }
        if first.dim() != second.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: second.dim(),
            });
        }
        Ok(Self { first, second, p })
    }
}

impl MapFamily for MixtureFamily {
    fn dim(&self) -> usize {
        self.first.dim()
    }

    fn apply(&self, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let k1 = self.first.kraus_at(t)?;
        let k2 = self.second.kraus_at(t)?;
        let a = apply_kraus_to_operator(&k1, &apply_kraus_to_operator(&k2, x));
        let b = apply_kraus_to_operator(&k2, &apply_kraus_to_operator(&k1, x));
        Ok(a.scale_re(self.p).add(&b.scale_re(1.0 - self.p)))
    }
}

fn check_trace_preserving(kraus: &[ComplexMatrix]) -> Result<()> {
    let dim = kraus
        .first()
        .map(ComplexMatrix::dim)
        .ok_or_else(|| Error::Contract("Kraus set must be nonempty".into()))?;
    if kraus.iter().any(|k| k.dim() != dim) {
        return Err(Error::Contract("Kraus operators must share one dimension".into()));
    }
    let mut sum = ComplexMatrix::zeros(dim);
    for k in kraus {
        sum = sum.add(&k.adjoint().mul(k));
    }
    let dev = sum.sub(&ComplexMatrix::identity(dim)).max_abs();
    if dev > tol::KRAUS_COMPLETENESS {
        return Err(Error::Contract(format!(
            "Kraus set is not trace-preserving: ‖ΣK†K − 𝕀‖_max = {dev:e}"
        )));
    }
    Ok(())
}

pub(crate) fn apply_kraus_to_operator(kraus: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.dim());
    for k in kraus {
        out = out.add(&k.sandwich(x));
    }
    out
}

/// Σᵢ Kᵢ ρ Kᵢ† for a trace-preserving Kraus set.
pub fn apply_channel(kraus: &[ComplexMatrix], rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_trace_preserving(kraus)?;
    if kraus[0].dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: kraus[0].dim(),
        });
    }
    DensityMatrix::new(apply_kraus_to_operator(kraus, rho.matrix()))
}

/// A(t) coefficients of the depolarizing Kraus set:
/// A₁ = (1+e^{−2ξ₁})/2, A₂ = (1−e^{−2ξ₁})/2, A₃ = e^{−2ξ₂}.
pub fn depolarizing_coefficients(t: f64, rates: &PauliRates) -> Result<(f64, f64, f64)> {
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let (xi1, xi2) = rates.xi(t);
    Ok(coefficients_from_xi(xi1, xi2))
}

fn coefficients_from_xi(xi1: f64, xi2: f64) -> (f64, f64, f64) {
    let e1 = (-2.0 * xi1).exp();
    ((1.0 + e1) / 2.0, (1.0 - e1) / 2.0, (-2.0 * xi2).exp())
}

/// The four depolarizing Kraus operators K₁…K₄ with θ(t) = 0.
///
/// K₁, K₂ are the √A₂-weighted raising/lowering forms, K₃ and K₄ the
/// diagonal pair weighted by √((A₁±A₃)/2).
pub fn depolarizing_kraus(t: f64, rates: &PauliRates) -> Result<Vec<ComplexMatrix>> {
    let (xi1, xi2) = rates.xi(t);
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    depolarizing_kraus_from_xi(xi1, xi2)
}

/// Same Kraus set directly from the integrated rates ξ₁, ξ₂.
pub fn depolarizing_kraus_from_xi(xi1: f64, xi2: f64) -> Result<Vec<ComplexMatrix>> {
    let (a1, a2, a3) = coefficients_from_xi(xi1, xi2);
    if a1 - a3 < -1e-12 {
        // The published operator set has √(A₁−A₃) weights; rate triples with
        // strongly unequal ξ's push A₁ below A₃ and the set stops being a
        // valid Kraus representation. The exact Pauli family covers those.
        return Err(Error::Contract(format!(
            "depolarizing Kraus set undefined: A1 - A3 = {:e} < 0 (use the Pauli probability family)",
            a1 - a3
        )));
    }
    let z = C64::new(0.0, 0.0);
    let k1 = ComplexMatrix::from_rows(&[
        vec![z, C64::new(a2.sqrt(), 0.0)],
        vec![z, z],
    ])?;
    let k2 = ComplexMatrix::from_rows(&[
        vec![z, z],
        vec![C64::new(a2.sqrt(), 0.0), z],
    ])?;
    let w3 = ((a1 + a3) / 2.0).sqrt();
    let k3 = ComplexMatrix::from_rows(&[
        vec![C64::new(w3, 0.0), z],
        vec![z, C64::new(w3, 0.0)],
    ])?;
    let w4 = (((a1 - a3).max(0.0)) / 2.0).sqrt();
    let k4 = ComplexMatrix::from_rows(&[
        vec![C64::new(-w4, 0.0), z],
        vec![z, C64::new(w4, 0.0)],
    ])?;
    Ok(vec![k1, k2, k3, k4])
}

/// Closed-form action of the depolarizing map: populations mix through
/// e^{−2ξ₁}, coherences contract by e^{−2ξ₂}.
pub fn pauli_map_closed_form(rho0: &DensityMatrix, t: f64, rates: &PauliRates) -> Result<DensityMatrix> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho0.dim(),
        });
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let (a1, a2, a3) = depolarizing_coefficients(t, rates)?;
    let r11 = rho0.get(0, 0) * C64::new(a1, 0.0) + rho0.get(1, 1) * C64::new(a2, 0.0);
    let r12 = rho0.get(0, 1) * C64::new(a3, 0.0);
    let m = ComplexMatrix::from_rows(&[
        vec![r11, r12],
        vec![r12.conj(), C64::new(1.0, 0.0) - r11],
    ])?;
    DensityMatrix::new(m)
}

/// Exact Pauli-channel Kraus set {√pᵢ(t) σᵢ} solving the master equation for
/// arbitrary non-negative rates.
pub fn pauli_channel_kraus(t: f64, rates: &PauliRates) -> Result<Vec<ComplexMatrix>> {
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let (cx, cy, cz) = rates.bloch_factors(t);
    let probs = [
        (1.0 + cx + cy + cz) / 4.0,
        (1.0 + cx - cy - cz) / 4.0,
        (1.0 - cx + cy - cz) / 4.0,
        (1.0 - cx - cy + cz) / 4.0,
    ];
    let mats = [
        ComplexMatrix::identity(2),
        qlinalg::sigma_x(),
        qlinalg::sigma_y(),
        qlinalg::sigma_z(),
    ];
    Ok(probs
        .iter()
        .zip(mats)
        .map(|(&p, m)| m.scale_re(p.max(0.0).sqrt()))
        .collect())
}

/// Weyl operator W_kl = Σ_m ω^{mk} |m⟩⟨m+l| with ω = e^{2πi/d}.
pub fn weyl_operator(d: usize, k: usize, l: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::Domain(format!("Weyl dimension must be at least 2, got {d}")));
    }
    if k >= d || l >= d {
        return Err(Error::Domain(format!(
            "Weyl indices must satisfy 0 <= k,l < d, got ({k},{l}) for d={d}"
        )));
    }
    ComplexMatrix::from_fn(d, |row, col| {
        if col == (row + l) % d {
            let phase = 2.0 * PI * (row * k) as f64 / d as f64;
            C64::new(phase.cos(), phase.sin())
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Probability table p_kl of a generalized Pauli channel
/// Λ(ρ) = Σ_{k,l} p_kl W_kl ρ W_kl†.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPauliSpec {
    dim: usize,
    probs: Vec<f64>,
}

impl GeneralizedPauliSpec {
    /// `probs` is row-major d×d with Σ p_kl = 1 within 1e-12.
    pub fn new(dim: usize, probs: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
        }
        if probs.len() != dim * dim {
            return Err(Error::Contract(format!(
                "probability table must have {} entries, got {}",
                dim * dim,
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Contract("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!(
                "probabilities must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(Self { dim, probs })
    }

    /// The identity channel (all weight on W₀₀).
    pub fn identity(dim: usize) -> Result<Self> {
        let mut probs = vec![0.0; dim * dim];
        probs[0] = 1.0;
        Self::new(dim, probs)
    }

    /// Uniform p_kl = 1/d², the completely depolarizing channel.
    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(dim, vec![1.0 / (dim * dim) as f64; dim * dim])
    }

    /// Full-support random table: d² exponentially distributed weights,
    /// normalized. Exercises every Weyl term in property tests.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut probs: Vec<f64> = (0..dim * dim)
            .map(|_| {
                let u: f64 = rng.random::<f64>();
                -(1.0 - u).max(f64::MIN_POSITIVE).ln()
            })
            .collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        // Renormalize the rounding residue onto the first entry.
        let total: f64 = probs.iter().sum();
        probs[0] += 1.0 - total;
        Self::new(dim, probs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prob(&self, k: usize, l: usize) -> f64 {
        self.probs[k * self.dim + l]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Kraus set {√p_kl · W_kl}; the maximally mixed state is its fixed point.
pub fn generalized_pauli_kraus(spec: &GeneralizedPauliSpec) -> Vec<ComplexMatrix> {
    let d = spec.dim();
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        for l in 0..d {
            let w = weyl_operator(d, k, l).expect("indices in range");
            out.push(w.scale_re(spec.prob(k, l).sqrt()));
        }
    }
    out
}

/// p·(Φ₁∘Φ₂)(ρ) + (1−p)·(Φ₂∘Φ₁)(ρ): both definite causal orders mixed
/// classically.
pub fn classical_mixture_map(
    kraus1: &[ComplexMatrix],
    kraus2: &[ComplexMatrix],
    p: f64,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("mixing probability must be in [0,1], got {p}")));
    }
    check_trace_preserving(kraus1)?;
    check_trace_preserving(kraus2)?;
    let a = apply_kraus_to_operator(kraus1, &apply_kraus_to_operator(kraus2, rho.matrix()));
    let b = apply_kraus_to_operator(kraus2, &apply_kraus_to_operator(kraus1, rho.matrix()));
    DensityMatrix::new(a.scale_re(p).add(&b.scale_re(1.0 - p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn depolarizing_kraus_at_zero_is_identity_channel() {
        let rates = PauliRates::symmetric(1.3).unwrap();
        let ks = depolarizing_kraus(0.0, &rates).unwrap();
        assert!(ks[0].max_abs() < 1e-15);
        assert!(ks[1].max_abs() < 1e-15);
        assert!(ks[2].sub(&ComplexMatrix::identity(2)).max_abs() < 1e-15);
        assert!(ks[3].max_abs() < 1e-15);
    }

    #[test]
    fn depolarizing_coefficients_long_time_limit() {
        let rates = PauliRates::symmetric(1.0).unwrap();
        let (a1, a2, a3) = depolarizing_coefficients(60.0, &rates).unwrap();
        assert!((a1 - 0.5).abs() < 1e-12);
        assert!((a2 - 0.5).abs() < 1e-12);
        assert!(a3.abs() < 1e-12);
    }

    #[test]
    fn depolarizing_a3_at_quarter_log_two() {
        // ξ₂ = 2γt, so A₃ = e^(−4γt) = 1/2 at γ=1, t = ln2/4
        let rates = PauliRates::symmetric(1.0).unwrap();
        let t = 2.0f64.ln() / 4.0;
        let (_, _, a3) = depolarizing_coefficients(t, &rates).unwrap();
        assert!((a3 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn depolarizing_kraus_rejects_negative_time() {
        let rates = PauliRates::symmetric(1.0).unwrap();
        assert!(matches!(
            depolarizing_kraus(-0.1, &rates),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn closed_form_at_zero_is_identity() {
        let rates = PauliRates::symmetric(0.7).unwrap();
        let rho = DensityMatrix::from_bloch(0.2, 0.3, -0.4).unwrap();
        let out = pauli_map_closed_form(&rho, 0.0, &rates).unwrap();
        assert!(out.matrix().sub(rho.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn closed_form_population_decay() {
        let gamma = 0.8;
        let t = 0.45;
        let rates = PauliRates::symmetric(gamma).unwrap();
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        let out = pauli_map_closed_form(&rho, t, &rates).unwrap();
        let e = (-4.0 * gamma * t).exp();
        assert!((out.get(0, 0).re - (1.0 - e) / 2.0).abs() < 1e-14);
        assert!((out.get(1, 1).re - (1.0 + e) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_coherence_decay() {
        let gamma = 1.1;
        let t = 0.3;
        let rates = PauliRates::symmetric(gamma).unwrap();
        let rho = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let out = pauli_map_closed_form(&rho, t, &rates).unwrap();
        let e = (-4.0 * gamma * t).exp();
        assert!((out.get(0, 1).re - e / 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_kraus_application() {
        let rates = PauliRates::new(0.9, 0.9, 0.4).unwrap();
        let rho = DensityMatrix::from_bloch(-0.1, 0.55, 0.2).unwrap();
        for &t in &[0.05, 0.4, 1.7, 4.0] {
            let ks = depolarizing_kraus(t, &rates).unwrap();
            let via_kraus = apply_channel(&ks, &rho).unwrap();
            let closed = pauli_map_closed_form(&rho, t, &rates).unwrap();
            assert!(
                via_kraus.matrix().sub(closed.matrix()).max_abs() < 1e-12,
                "t={t}"
            );
        }
    }

    #[test]
    fn apply_channel_identity_and_flip() {
        let rho = DensityMatrix::basis_state(2, 0).unwrap();
        let id = apply_channel(&[ComplexMatrix::identity(2)], &rho).unwrap();
        assert!(id.matrix().sub(rho.matrix()).max_abs() < 1e-15);
        let flipped = apply_channel(&[qlinalg::sigma_x()], &rho).unwrap();
        let one = DensityMatrix::basis_state(2, 1).unwrap();
        assert!(flipped.matrix().sub(one.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn apply_channel_rejects_incomplete_kraus() {
        let rho = DensityMatrix::maximally_mixed(2);
        let bad = vec![qlinalg::sigma_x().scale_re(0.5)];
        assert!(apply_channel(&bad, &rho).is_err());
    }

    #[test]
    fn pauli_twirl_sends_everything_to_maximally_mixed() {
        let kraus: Vec<_> = [
            ComplexMatrix::identity(2),
            qlinalg::sigma_x(),
            qlinalg::sigma_y(),
            qlinalg::sigma_z(),
        ]
        .into_iter()
        .map(|m| m.scale_re(0.5))
        .collect();
        let rho = DensityMatrix::from_bloch(0.3, -0.6, 0.2).unwrap();
        let out = apply_channel(&kraus, &rho).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(out.matrix().sub(mixed.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn weyl_qubit_specials() {
        let w01 = weyl_operator(2, 0, 1).unwrap();
        assert!(w01.sub(&qlinalg::sigma_x()).max_abs() < 1e-14);
        let w10 = weyl_operator(2, 1, 0).unwrap();
        assert!(w10.sub(&qlinalg::sigma_z()).max_abs() < 1e-14);
    }

    #[test]
    fn weyl_zero_is_identity() {
        for d in 2..=5 {
            let w = weyl_operator(d, 0, 0).unwrap();
            assert!(w.sub(&ComplexMatrix::identity(d)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn weyl_composition_rule_d3() {
        // W₁₁ W₂₂ = ω^(1·2) W₀₀ for d = 3
        let w11 = weyl_operator(3, 1, 1).unwrap();
        let w22 = weyl_operator(3, 2, 2).unwrap();
        let lhs = w11.mul(&w22);
        let phase = 2.0 * PI * 2.0 / 3.0;
        let rhs = ComplexMatrix::identity(3).scale(c(phase.cos(), phase.sin()));
        assert!(lhs.sub(&rhs).max_abs() < 1e-13);
    }

    #[test]
    fn weyl_rejects_out_of_range_indices() {
        assert!(matches!(weyl_operator(3, 3, 0), Err(Error::Domain(_))));
        assert!(matches!(weyl_operator(3, 0, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn generalized_pauli_identity_spec() {
        let spec = GeneralizedPauliSpec::identity(2).unwrap();
        let kraus = generalized_pauli_kraus(&spec);
        let rho = DensityMatrix::from_bloch(0.2, 0.1, 0.7).unwrap();
        let out = apply_channel(&kraus, &rho).unwrap();
        assert!(out.matrix().sub(rho.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn generalized_pauli_uniform_is_completely_depolarizing() {
        let spec = GeneralizedPauliSpec::uniform(2).unwrap();
        let kraus = generalized_pauli_kraus(&spec);
        let rho = DensityMatrix::from_bloch(0.0, 0.9, -0.1).unwrap();
        let out = apply_channel(&kraus, &rho).unwrap();
        assert!(out.matrix().sub(DensityMatrix::maximally_mixed(2).matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn generalized_pauli_fixes_maximally_mixed() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        use rand::SeedableRng;
        for d in 2..=5 {
            let spec = GeneralizedPauliSpec::random(d, &mut rng).unwrap();
            let kraus = generalized_pauli_kraus(&spec);
            let mixed = DensityMatrix::maximally_mixed(d);
            let out = apply_channel(&kraus, &mixed).unwrap();
            assert!(out.matrix().sub(mixed.matrix()).max_abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn mixture_orders_coincide_for_equal_channels() {
        let rates = PauliRates::symmetric(1.0).unwrap();
        let ks = depolarizing_kraus(0.35, &rates).unwrap();
        let rho = DensityMatrix::from_bloch(0.4, 0.0, 0.3).unwrap();
        let a = classical_mixture_map(&ks, &ks, 0.2, &rho).unwrap();
        let composed = apply_channel(&ks, &apply_channel(&ks, &rho).unwrap()).unwrap();
        assert!(a.matrix().sub(composed.matrix()).max_abs() < 1e-13);
    }

    #[test]
    fn mixture_p_one_is_first_order() {
        let rates = PauliRates::symmetric(0.6).unwrap();
        let k1 = depolarizing_kraus(0.2, &rates).unwrap();
        let k2 = depolarizing_kraus(0.9, &rates).unwrap();
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        let out = classical_mixture_map(&k1, &k2, 1.0, &rho).unwrap();
        let composed = apply_channel(&k1, &apply_channel(&k2, &rho).unwrap()).unwrap();
        assert!(out.matrix().sub(composed.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn mixture_of_depolarizing_with_itself_decays_at_double_rate() {
        let gamma = 0.75;
        let rates = PauliRates::symmetric(gamma).unwrap();
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        for &t in &[0.1, 0.8, 2.0] {
            let ks = depolarizing_kraus(t, &rates).unwrap();
            let out = classical_mixture_map(&ks, &ks, 0.37, &rho).unwrap();
            let e = (-8.0 * gamma * t).exp();
            assert!((out.get(1, 1).re - (1.0 + e) / 2.0).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn pauli_family_matches_depolarizing_for_symmetric_rates() {
        let rates = PauliRates::symmetric(1.0).unwrap();
        let rho = DensityMatrix::from_bloch(0.1, -0.5, 0.6).unwrap();
        for &t in &[0.2, 1.0, 3.0] {
            let a = apply_channel(&pauli_channel_kraus(t, &rates).unwrap(), &rho).unwrap();
            let b = apply_channel(&depolarizing_kraus(t, &rates).unwrap(), &rho).unwrap();
            assert!(a.matrix().sub(b.matrix()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_family_handles_strongly_asymmetric_rates() {
        // the published depolarizing operator set breaks down here
        let rates = PauliRates::new(1.0, 0.1, 0.0).unwrap();
        assert!(depolarizing_kraus(0.1, &rates).is_err());
        let ks = pauli_channel_kraus(0.1, &rates).unwrap();
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        assert!(apply_channel(&ks, &rho).is_ok());
    }

    #[test]
    fn time_dependent_rates_reduce_to_constant_case() {
        let family = KrausFamily::depolarizing_time_dependent(|_| (1.0, 1.0, 1.0));
        let constant = KrausFamily::depolarizing(PauliRates::symmetric(1.0).unwrap());
        let rho = DensityMatrix::from_bloch(0.3, 0.2, -0.1).unwrap();
        for &t in &[0.0, 0.5, 1.5] {
            let a = family.apply_state(t, &rho).unwrap();
            let b = constant.apply_state(t, &rho).unwrap();
            assert!(a.matrix().sub(b.matrix()).max_abs() < 1e-9, "t={t}");
        }
    }
}
