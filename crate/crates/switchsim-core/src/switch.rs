//! The quantum switch of two channel uses.
//!
//! Two trace-preserving channels are placed in a superposition of causal
//! orders conditioned on a control qubit: with the control in |0⟩ the first
//! channel acts before the second (𝒩₂∘𝒩₁), with |1⟩ the order is reversed.
//! The control is finally measured and the system state is post-selected on
//! one outcome.
//!
//! Everything quantitative in this module has two routes: brute-force
//! evolution on the joint system ⊗ control space (the ground truth) and the
//! published closed-form expressions for the depolarizing family (cross
//! checks). The two disagree for some noise parameters — see
//! [`crosscheck_closed_form`] — and the brute force wins.

use crate::channels::{generalized_pauli_kraus, GeneralizedPauliSpec, KrausFamily, MapFamily};
use crate::error::{Error, Result};
use crate::qlinalg::{self, kron, ComplexMatrix, DensityMatrix, C64};

use rand::Rng;

const DEGENERATE_BRANCH_TOL: f64 = 1e-14;
const SINGULAR_DENOMINATOR_TOL: f64 = 1e-14;
/// Tolerance for the state-independence (linearity) check of the
/// post-selected normalizer.
const LINEARITY_TOL: f64 = 1e-10;

/// Preparation of the control qubit.
///
/// `PureComputational(p)` is the pure state √p|0⟩ + √(1−p)|1⟩ (p = ½ gives
/// the ideal |+⟩ control); `FourierMixture(p)` is the classical mixture
/// p|+⟩⟨+| + (1−p)|−⟩⟨−|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlSpec {
    PureComputational(f64),
    FourierMixture(f64),
}

impl ControlSpec {
    pub fn validate(&self) -> Result<()> {
        let p = match self {
            ControlSpec::PureComputational(p) | ControlSpec::FourierMixture(p) => *p,
        };
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::Domain(format!("control parameter must be in [0,1], got {p}")));
        }
        Ok(())
    }

    /// Density matrix ω_c of the prepared control.
    pub fn density(&self) -> Result<DensityMatrix> {
        self.validate()?;
        match *self {
            ControlSpec::PureComputational(p) => {
                DensityMatrix::pure(&[C64::new(p.sqrt(), 0.0), C64::new((1.0 - p).sqrt(), 0.0)])
            }
            ControlSpec::FourierMixture(p) => {
                let plus = plus_projector();
                let minus = minus_projector();
                DensityMatrix::new(plus.scale_re(p).add(&minus.scale_re(1.0 - p)))
            }
        }
    }

    /// Spectral components (weight, ket) of ω_c.
    fn components(&self) -> Vec<(f64, [C64; 2])> {
        match *self {
            ControlSpec::PureComputational(p) => vec![(
                1.0,
                [C64::new(p.sqrt(), 0.0), C64::new((1.0 - p).sqrt(), 0.0)],
            )],
            ControlSpec::FourierMixture(p) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![
                    (p, [C64::new(s, 0.0), C64::new(s, 0.0)]),
                    (1.0 - p, [C64::new(s, 0.0), C64::new(-s, 0.0)]),
                ]
            }
        }
    }
}

/// Final measurement effect on the control qubit.
///
/// `PureComputational(q)` is the rank-one effect |M_q⟩⟨M_q| with
/// |M_q⟩ = √q|0⟩ + √(1−q)|1⟩; `FourierPovm{q1,q2}` is the POVM element
/// q₁|+⟩⟨+| + q₂|−⟩⟨−|; `PlusProjector` is the ideal |+⟩⟨+|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementSpec {
    PureComputational(f64),
    FourierPovm { q1: f64, q2: f64 },
    PlusProjector,
}

impl MeasurementSpec {
    pub fn validate(&self) -> Result<()> {
        let params: &[f64] = match self {
            MeasurementSpec::PureComputational(q) => std::slice::from_ref(q),
            MeasurementSpec::FourierPovm { q1, q2 } => &[*q1, *q2],
            MeasurementSpec::PlusProjector => &[],
        };
        if params.iter().any(|q| !(0.0..=1.0).contains(q) || !q.is_finite()) {
            return Err(Error::Domain(
                "measurement parameters must be probabilities in [0,1]".into(),
            ));
        }
        Ok(())
    }

    /// The positive effect operator M with 0 ≤ M ≤ 𝕀.
    pub fn effect(&self) -> Result<ComplexMatrix> {
        self.validate()?;
        Ok(match *self {
            MeasurementSpec::PureComputational(q) => {
                let ket = [C64::new(q.sqrt(), 0.0), C64::new((1.0 - q).sqrt(), 0.0)];
                ComplexMatrix::outer(&ket, &ket)?
            }
            MeasurementSpec::FourierPovm { q1, q2 } => plus_projector()
                .scale_re(q1)
                .add(&minus_projector().scale_re(q2)),
            MeasurementSpec::PlusProjector => plus_projector(),
        })
    }

    /// Square-root decomposition M = Σ_μ |m_μ⟩⟨m_μ| used by the reduced
    /// Kraus construction.
    fn sqrt_components(&self) -> Vec<[C64; 2]> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            MeasurementSpec::PureComputational(q) => {
                vec![[C64::new(q.sqrt(), 0.0), C64::new((1.0 - q).sqrt(), 0.0)]]
            }
            MeasurementSpec::FourierPovm { q1, q2 } => vec![
                [
                    C64::new(q1.sqrt() * s, 0.0),
                    C64::new(q1.sqrt() * s, 0.0),
                ],
                [
                    C64::new(q2.sqrt() * s, 0.0),
                    C64::new(-q2.sqrt() * s, 0.0),
                ],
            ],
            MeasurementSpec::PlusProjector => vec![[C64::new(s, 0.0), C64::new(s, 0.0)]],
        }
    }
}

/// Control preparation plus final measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchConfig {
    pub control: ControlSpec,
    pub measurement: MeasurementSpec,
}

impl SwitchConfig {
    /// |+⟩ control, |+⟩⟨+| measurement.
    pub fn ideal() -> Self {
        Self {
            control: ControlSpec::PureComputational(0.5),
            measurement: MeasurementSpec::PlusProjector,
        }
    }

    /// Pure control √p|0⟩+√(1−p)|1⟩ with rank-one measurement |M_q⟩⟨M_q|.
    pub fn quantum_noise(p: f64, q: f64) -> Self {
        Self {
            control: ControlSpec::PureComputational(p),
            measurement: MeasurementSpec::PureComputational(q),
        }
    }

    /// Fourier-basis mixed control with Fourier-basis POVM.
    pub fn classical_noise(p: f64, q1: f64, q2: f64) -> Self {
        Self {
            control: ControlSpec::FourierMixture(p),
            measurement: MeasurementSpec::FourierPovm { q1, q2 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        self.measurement.validate()
    }

    pub fn is_ideal(&self) -> bool {
        let control_plus = matches!(self.control, ControlSpec::PureComputational(p) if p == 0.5)
            || matches!(self.control, ControlSpec::FourierMixture(p) if p == 1.0);
        let meas_plus = matches!(self.measurement, MeasurementSpec::PlusProjector)
            || matches!(self.measurement, MeasurementSpec::PureComputational(q) if q == 0.5)
            || matches!(self.measurement, MeasurementSpec::FourierPovm { q1, q2 } if q1 == 1.0 && q2 == 0.0);
        control_plus && meas_plus
    }

    /// A random configuration for statement-check trials.
    pub fn random(rng: &mut impl Rng) -> Self {
        let control = if rng.random::<bool>() {
            ControlSpec::PureComputational(rng.random::<f64>())
        } else {
            ControlSpec::FourierMixture(rng.random::<f64>())
        };
        let measurement = match rng.random_range(0..3u8) {
            0 => MeasurementSpec::PureComputational(rng.random::<f64>()),
            1 => MeasurementSpec::FourierPovm {
                q1: rng.random::<f64>(),
                q2: rng.random::<f64>(),
            },
            _ => MeasurementSpec::PlusProjector,
        };
        Self { control, measurement }
    }
}

/// Post-selected normalized state together with its outcome probability.
#[derive(Debug, Clone)]
pub struct SwitchOutcome {
    pub state: DensityMatrix,
    pub probability: f64,
}

fn plus_projector() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ket = [C64::new(s, 0.0), C64::new(s, 0.0)];
    ComplexMatrix::outer(&ket, &ket).expect("static projector")
}

fn minus_projector() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ket = [C64::new(s, 0.0), C64::new(-s, 0.0)];
    ComplexMatrix::outer(&ket, &ket).expect("static projector")
}

fn computational_projector(b: usize) -> ComplexMatrix {
    let ket = [
        C64::new(if b == 0 { 1.0 } else { 0.0 }, 0.0),
        C64::new(if b == 1 { 1.0 } else { 0.0 }, 0.0),
    ];
    ComplexMatrix::outer(&ket, &ket).expect("static projector")
}

/// Joint Kraus operators S_ij = K⁽²⁾_j K⁽¹⁾_i ⊗ |0⟩⟨0| + K⁽¹⁾_i K⁽²⁾_j ⊗ |1⟩⟨1|
/// on system ⊗ control.
///
/// Control |0⟩ selects the order 𝒩₂∘𝒩₁ (first channel acts first); this is
/// the convention used throughout the crate.
pub fn switch_joint_kraus(
    kraus1: &[ComplexMatrix],
    kraus2: &[ComplexMatrix],
) -> Result<Vec<ComplexMatrix>> {
    let d = kraus1
        .first()
        .map(ComplexMatrix::dim)
        .ok_or_else(|| Error::Contract("Kraus set must be nonempty".into()))?;
    if kraus2.iter().chain(kraus1.iter()).any(|k| k.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: kraus2.first().map(ComplexMatrix::dim).unwrap_or(0),
        });
    }
    let p0 = computational_projector(0);
    let p1 = computational_projector(1);
    let mut out = Vec::with_capacity(kraus1.len() * kraus2.len());
    for ki in kraus1 {
        for kj in kraus2 {
            let forward = kj.mul(ki);
            let reversed = ki.mul(kj);
            out.push(kron(&forward, &p0).add(&kron(&reversed, &p1)));
        }
    }
    Ok(out)
}

/// Tr_c[(𝕀⊗E) Σ_ij S_ij (X⊗ω) S_ij†], the unnormalized effect branch on an
/// arbitrary system operator. Linear in X.
fn effect_branch_action(
    joint_kraus: &[ComplexMatrix],
    x: &ComplexMatrix,
    omega: &ComplexMatrix,
    effect: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let d = x.dim();
    let joint_in = kron(x, omega);
    let mut evolved = ComplexMatrix::zeros(2 * d);
    for s in joint_kraus {
        evolved = evolved.add(&s.sandwich(&joint_in));
    }
    // out[i,j] = Σ_{k,n} E[k,n] · J[(i,n),(j,k)]
    ComplexMatrix::from_fn(d, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..2 {
            for n in 0..2 {
                acc += effect.get(k, n) * evolved.get(2 * i + n, 2 * j + k);
            }
        }
        acc
    })
}

/// Dual operator Θ with Tr[branch(X)] = Tr[XΘ]; Θ ∝ 𝕀 certifies that the
/// normalized branch is a linear map.
fn effect_dual_operator(
    joint_kraus: &[ComplexMatrix],
    omega: &ComplexMatrix,
    effect: &ComplexMatrix,
    system_dim: usize,
) -> Result<ComplexMatrix> {
    let d2 = 2 * system_dim;
    let mut gram = ComplexMatrix::zeros(d2);
    let id = ComplexMatrix::identity(system_dim);
    let lifted_effect = kron(&id, effect);
    for s in joint_kraus {
        gram = gram.add(&s.adjoint().mul(&lifted_effect).mul(s));
    }
    // Θ[i,j] = Σ_{k,l} G[(i,k),(j,l)] ω[l,k]
    ComplexMatrix::from_fn(system_dim, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..2 {
            for l in 0..2 {
                acc += gram.get(2 * i + k, 2 * j + l) * omega.get(l, k);
            }
        }
        acc
    })
}

/// Full switch evolution: joint evolution of ρ⊗ω_c, measurement of the
/// control, post-selection and normalization of both branches.
///
/// Returns (effect branch, complement branch); their probabilities sum
/// to one.
pub fn switch_apply(
    kraus1: &[ComplexMatrix],
    kraus2: &[ComplexMatrix],
    rho: &DensityMatrix,
    config: &SwitchConfig,
) -> Result<(SwitchOutcome, SwitchOutcome)> {
    config.validate()?;
    ensure_trace_preserving(kraus1)?;
    ensure_trace_preserving(kraus2)?;
    if kraus1[0].dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: kraus1[0].dim(),
        });
    }
    let joint = switch_joint_kraus(kraus1, kraus2)?;
    let omega = config.control.density()?;
    let effect = config.measurement.effect()?;
    let complement = ComplexMatrix::identity(2).sub(&effect);

    let branch = |eff: &ComplexMatrix| -> Result<SwitchOutcome> {
        let raw = effect_branch_action(&joint, rho.matrix(), omega.matrix(), eff)?;
        let tr = raw.trace();
        let probability = tr.re;
        if tr.im.abs() > 1e-10 {
            return Err(Error::Contract(format!(
                "branch probability has non-real trace {:e}",
                tr.im
            )));
        }
        if probability < DEGENERATE_BRANCH_TOL {
            return Err(Error::DegenerateBranch { probability });
        }
        let state = DensityMatrix::new(raw.scale_re(1.0 / probability))?;
        Ok(SwitchOutcome { state, probability })
    };

    let plus = branch(&effect)?;
    let minus = branch(&complement)?;
    if (plus.probability + minus.probability - 1.0).abs() > 1e-10 {
        return Err(Error::Contract(format!(
            "branch probabilities sum to {} instead of 1",
            plus.probability + minus.probability
        )));
    }
    Ok((plus, minus))
}

fn ensure_trace_preserving(kraus: &[ComplexMatrix]) -> Result<()> {
    let d = kraus
        .first()
        .map(ComplexMatrix::dim)
        .ok_or_else(|| Error::Contract("Kraus set must be nonempty".into()))?;
    let mut sum = ComplexMatrix::zeros(d);
    for k in kraus {
        sum = sum.add(&k.adjoint().mul(k));
    }
    let dev = sum.sub(&ComplexMatrix::identity(d)).max_abs();
    if dev > qlinalg::tol::KRAUS_COMPLETENESS {
        return Err(Error::Contract(format!(
            "switch input channel is not trace-preserving: deviation {dev:e}"
        )));
    }
    Ok(())
}

/// Reduced system-only Kraus family K̃ = χ₁ K⁽²⁾_j K⁽¹⁾_i + χ₂ K⁽¹⁾_i K⁽²⁾_j,
/// one family member per (control component, measurement component, i, j).
///
/// The operator-sum action of the returned (unnormalized, Σ K̃†K̃ ≤ 𝕀) set
/// equals the numerator of the effect branch of [`switch_apply`]. For the
/// ideal switch it reduces to the anticommutator form (K_i K_j + K_j K_i)/2.
pub fn reduced_kraus(
    kraus1: &[ComplexMatrix],
    kraus2: &[ComplexMatrix],
    config: &SwitchConfig,
) -> Result<Vec<ComplexMatrix>> {
    config.validate()?;
    ensure_trace_preserving(kraus1)?;
    ensure_trace_preserving(kraus2)?;
    let controls = config.control.components();
    let effects = config.measurement.sqrt_components();

    let mut out = Vec::with_capacity(controls.len() * effects.len() * kraus1.len() * kraus2.len());
    for (weight, psi) in &controls {
        for m in &effects {
            // χ₁ = ⟨m|0⟩⟨0|ψ⟩, χ₂ = ⟨m|1⟩⟨1|ψ⟩
            let chi1 = m[0].conj() * psi[0];
            let chi2 = m[1].conj() * psi[1];
            let w = C64::new(weight.sqrt(), 0.0);
            for ki in kraus1 {
                for kj in kraus2 {
                    let forward = kj.mul(ki).scale(chi1 * w);
                    let reversed = ki.mul(kj).scale(chi2 * w);
                    out.push(forward.add(&reversed));
                }
            }
        }
    }

    // Σ K̃†K̃ ≤ 𝕀 up to tolerance.
    let d = kraus1[0].dim();
    let mut gram = ComplexMatrix::zeros(d);
    for k in &out {
        gram = gram.add(&k.adjoint().mul(k));
    }
    let excess = qlinalg::hermitian_eigenvalues(&gram.sub(&ComplexMatrix::identity(d)))?
        .last()
        .copied()
        .unwrap_or(0.0);
    if excess > 1e-10 {
        return Err(Error::Contract(format!(
            "reduced Kraus family exceeds completeness: max eigenvalue of ΣK̃†K̃ − 𝕀 is {excess:e}"
        )));
    }
    Ok(out)
}

/// χ₁ and χ₂ of the reduced representation for a pure control and a
/// rank-one measurement; both are ½ for the ideal switch.
pub fn reduced_chi(config: &SwitchConfig) -> Result<(C64, C64)> {
    config.validate()?;
    let controls = config.control.components();
    let effects = config.measurement.sqrt_components();
    if controls.len() != 1 || effects.len() != 1 {
        return Err(Error::Contract(
            "reduced χ coefficients are defined for pure control and rank-one measurement".into(),
        ));
    }
    let psi = controls[0].1;
    let m = effects[0];
    Ok((m[0].conj() * psi[0], m[1].conj() * psi[1]))
}

/// Coherence factor C(t) of the ideal switched depolarizing channel,
/// C = (𝒢² − 2𝒢 + 9)/(5𝒢² + 6𝒢 − 3) with 𝒢 = e^{4γt}, evaluated through
/// u = 1/𝒢 so large times cannot overflow.
pub fn closed_form_c(t: f64, gamma: f64) -> f64 {
    let u = (-4.0 * gamma * t).exp();
    (1.0 - 2.0 * u + 9.0 * u * u) / (5.0 + 6.0 * u - 3.0 * u * u)
}

/// '+'-outcome probability of the ideal switched depolarizing channel,
/// (5𝒢² + 6𝒢 − 3)/(8𝒢²).
pub fn closed_form_plus_probability(t: f64, gamma: f64) -> f64 {
    let u = (-4.0 * gamma * t).exp();
    (5.0 + 6.0 * u - 3.0 * u * u) / 8.0
}

/// Closed-form post-selected state of the ideal switch on the depolarizing
/// family: populations mix through A = (1+C)/2, B = (1−C)/2 and coherences
/// scale by C.
pub fn closed_form_switched_map(rho0: &DensityMatrix, t: f64, gamma: f64) -> Result<DensityMatrix> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho0.dim(),
        });
    }
    if t < 0.0 || gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "need t >= 0 and gamma > 0, got t={t}, gamma={gamma}"
        )));
    }
    state_from_c(rho0, closed_form_c(t, gamma))
}

pub(crate) fn state_from_c(rho0: &DensityMatrix, c: f64) -> Result<DensityMatrix> {
    let a = (1.0 + c) / 2.0;
    let b = (1.0 - c) / 2.0;
    let r11 = rho0.get(0, 0).re * a + rho0.get(1, 1).re * b;
    let r12 = rho0.get(0, 1) * C64::new(c, 0.0);
    let m = ComplexMatrix::from_rows(&[
        vec![C64::new(r11, 0.0), r12],
        vec![r12.conj(), C64::new(1.0 - r11, 0.0)],
    ])?;
    DensityMatrix::new(m)
}

/// Published coherence factor C_pq for the quantum-noise switch
/// (pure control √p|0⟩+√(1−p)|1⟩, measurement |M_q⟩⟨M_q|), evaluated
/// verbatim (scaled by 𝒢⁻² for stability).
///
/// This expression fails its own ideal-limit reduction at p = q = ½ and is
/// kept only as the published cross-check; brute-force evolution is the
/// ground truth for every quantitative claim.
pub fn closed_form_cpq(t: f64, gamma: f64, p: f64, q: f64) -> Result<f64> {
    for v in [p, q] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("noise parameters must be in [0,1], got {v}")));
        }
    }
    if t < 0.0 || gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "need t >= 0 and gamma > 0, got t={t}, gamma={gamma}"
        )));
    }
    let u = (-4.0 * gamma * t).exp();
    let fp = (p * (1.0 - p)).sqrt();
    let fq = (q * (1.0 - q)).sqrt();
    let num = fp * fq * (1.0 - 2.0 * u + 5.0 * u * u) + (p * (4.0 * q - 2.0) + 2.0 * (1.0 - q)) * u * u;
    let den = fp * fq * (1.0 + 6.0 * u - 3.0 * u * u) + p * (4.0 * q - 2.0);
    if den.abs() < SINGULAR_DENOMINATOR_TOL {
        return Err(Error::SingularExpression { denominator: den });
    }
    Ok(num / den)
}

/// Published coherence factor C_pq₁q₂ for the classical-noise switch
/// (Fourier-mixed control, Fourier-basis POVM), evaluated verbatim
/// (scaled by 𝒢⁻²).
///
/// At (p,q₁,q₂) = (1,1,0) it reduces exactly to the ideal C(t). Away from
/// p = ½ with q₂ ≠ 0 it disagrees with brute force; same caveat as
/// [`closed_form_cpq`].
pub fn closed_form_cpq1q2(t: f64, gamma: f64, p: f64, q1: f64, q2: f64) -> Result<f64> {
    for v in [p, q1, q2] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("noise parameters must be in [0,1], got {v}")));
        }
    }
    if t < 0.0 || gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "need t >= 0 and gamma > 0, got t={t}, gamma={gamma}"
        )));
    }
    let u = (-4.0 * gamma * t).exp();
    let n1 = (-1.0 + 10.0 * p) * u * u + (-1.0 + 2.0 * p) + (2.0 - 4.0 * p) * u;
    let n2 = (-9.0 + 10.0 * p) * u * u + (-1.0 + 2.0 * p) + (2.0 - 4.0 * p) * u;
    let d1 = (3.0 - 6.0 * p) * u * u + (3.0 + 2.0 * p) + 6.0 * (-1.0 + 2.0 * p) * u;
    let d2 = (3.0 - 6.0 * p) * u * u + (-5.0 + 2.0 * p) + (-1.0 + 2.0 * p) * u;
    let num = n1 * q1 - n2 * q2;
    let den = d1 * q1 - d2 * q2;
    if den.abs() < SINGULAR_DENOMINATOR_TOL {
        return Err(Error::SingularExpression { denominator: den });
    }
    Ok(num / den)
}

/// The published closed-form C for a configuration, when one exists.
pub fn closed_form_for_config(t: f64, gamma: f64, config: &SwitchConfig) -> Result<Option<f64>> {
    config.validate()?;
    if config.is_ideal() {
        return Ok(Some(closed_form_c(t, gamma)));
    }
    match (config.control, config.measurement) {
        (ControlSpec::PureComputational(p), MeasurementSpec::PureComputational(q)) => {
            closed_form_cpq(t, gamma, p, q).map(Some)
        }
        (ControlSpec::FourierMixture(p), MeasurementSpec::FourierPovm { q1, q2 }) => {
            closed_form_cpq1q2(t, gamma, p, q1, q2).map(Some)
        }
        _ => Ok(None),
    }
}

/// Result of comparing a published closed form against the brute-force
/// switch at one point.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormCheck {
    pub t: f64,
    pub closed_form: f64,
    pub brute_force: f64,
    pub deviation: f64,
    /// True when the two routes agree within `tolerance`.
    pub agrees: bool,
    pub tolerance: f64,
}

/// Coherence factor of the brute-force switched depolarizing channel,
/// extracted from the |1⟩⟨1| trajectory.
pub fn brute_force_c(t: f64, gamma: f64, config: &SwitchConfig) -> Result<f64> {
    let rates = crate::channels::PauliRates::symmetric(gamma)?;
    let kraus = crate::channels::depolarizing_kraus(t, &rates)?;
    let rho = DensityMatrix::basis_state(2, 1)?;
    let (plus, _) = switch_apply(&kraus, &kraus, &rho, config)?;
    Ok((plus.state.get(1, 1) - plus.state.get(0, 0)).re)
}

/// Cross-checks the published closed form against brute force; a
/// disagreement beyond `tolerance` is reported (`agrees = false`), never
/// silently accepted or hidden.
pub fn crosscheck_closed_form(
    t: f64,
    gamma: f64,
    config: &SwitchConfig,
    tolerance: f64,
) -> Result<Option<ClosedFormCheck>> {
    let Some(closed) = closed_form_for_config(t, gamma, config)? else {
        return Ok(None);
    };
    let brute = brute_force_c(t, gamma, config)?;
    let deviation = (closed - brute).abs();
    Ok(Some(ClosedFormCheck {
        t,
        closed_form: closed,
        brute_force: brute,
        deviation,
        agrees: deviation <= tolerance,
        tolerance,
    }))
}

/// Fixed-point preservation (maximally mixed state) under the switched
/// generalized Pauli channel: returns ‖Φ^S(𝕀/d) − 𝕀/d‖_max by brute force.
pub fn verify_statement1(spec: &GeneralizedPauliSpec, config: &SwitchConfig) -> Result<f64> {
    let kraus = generalized_pauli_kraus(spec);
    let mixed = DensityMatrix::maximally_mixed(spec.dim());
    let (plus, _) = switch_apply(&kraus, &kraus, &mixed, config)?;
    Ok(plus.state.matrix().sub(mixed.matrix()).max_abs())
}

/// Report of the trace (linearity) check of the post-selected branch.
#[derive(Debug, Clone, Copy)]
pub struct Statement2Report {
    /// Max pairwise difference of the unnormalized branch traces across the
    /// sample states.
    pub trace_spread: f64,
    /// The common trace observed.
    pub common_trace: f64,
    /// Analytic value Σ p_kl p_rs (1 + ω^{ks−rl})/2.
    pub analytic_trace: f64,
}

/// Verifies that the trace of the unnormalized post-selected output of the
/// ideal switch is independent of the input state.
pub fn verify_statement2(
    spec: &GeneralizedPauliSpec,
    sample_states: &[DensityMatrix],
) -> Result<Statement2Report> {
    if sample_states.len() < 2 {
        return Err(Error::Contract("need at least two sample states".into()));
    }
    if sample_states.iter().any(|s| s.dim() != spec.dim()) {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: sample_states.iter().map(DensityMatrix::dim).find(|&d| d != spec.dim()).unwrap_or(0),
        });
    }
    let kraus = generalized_pauli_kraus(spec);
    let joint = switch_joint_kraus(&kraus, &kraus)?;
    let config = SwitchConfig::ideal();
    let omega = config.control.density()?;
    let effect = config.measurement.effect()?;

    let mut traces = Vec::with_capacity(sample_states.len());
    for rho in sample_states {
        let raw = effect_branch_action(&joint, rho.matrix(), omega.matrix(), &effect)?;
        traces.push(raw.trace().re);
    }
    let max = traces.iter().cloned().fold(f64::MIN, f64::max);
    let min = traces.iter().cloned().fold(f64::MAX, f64::min);
    let mean = traces.iter().sum::<f64>() / traces.len() as f64;

    // Σ_{kl,rs} p_kl p_rs (1 + ω^{ks−rl})/2; the imaginary parts cancel in
    // the full sum.
    let d = spec.dim();
    let mut analytic = C64::new(0.0, 0.0);
    for k in 0..d {
        for l in 0..d {
            for r in 0..d {
                for s in 0..d {
                    let m = (k * s) as i64 - (r * l) as i64;
                    let phase = 2.0 * std::f64::consts::PI * m as f64 / d as f64;
                    let omega_pow = C64::new(phase.cos(), phase.sin());
                    analytic += C64::new(spec.prob(k, l) * spec.prob(r, s) / 2.0, 0.0)
                        * (C64::new(1.0, 0.0) + omega_pow);
                }
            }
        }
    }
    if analytic.im.abs() > 1e-12 {
        return Err(Error::Contract(format!(
            "analytic trace has non-vanishing imaginary part {:e}",
            analytic.im
        )));
    }

    Ok(Statement2Report {
        trace_spread: max - min,
        common_trace: mean,
        analytic_trace: analytic.re,
    })
}

/// The normalized post-selected switch of a channel family with itself, as
/// a time-parametrized map.
///
/// The normalizer is the state-independent trace factor; state independence
/// (the linearity condition) is verified at every evaluated time and its
/// violation is an error rather than an assumption.
pub struct SwitchedFamily {
    family: KrausFamily,
    config: SwitchConfig,
}

impl SwitchedFamily {
    pub fn new(family: KrausFamily, config: SwitchConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { family, config })
    }

    /// Ideal or noisy switch of the symmetric depolarizing family.
    pub fn depolarizing(gamma: f64, config: SwitchConfig) -> Result<Self> {
        let rates = crate::channels::PauliRates::symmetric(gamma)?;
        Self::new(KrausFamily::depolarizing(rates), config)
    }

    pub fn config(&self) -> &SwitchConfig {
        &self.config
    }

    fn setup_at(&self, t: f64) -> Result<(Vec<ComplexMatrix>, ComplexMatrix, ComplexMatrix, f64)> {
        let kraus = self.family.kraus_at(t)?;
        let joint = switch_joint_kraus(&kraus, &kraus)?;
        let omega = self.config.control.density()?;
        let effect = self.config.measurement.effect()?;
        let d = self.family.dim();
        let theta = effect_dual_operator(&joint, omega.matrix(), &effect, d)?;
        let c = theta.trace().re / d as f64;
        let dev = theta.sub(&ComplexMatrix::identity(d).scale_re(c)).max_abs();
        if dev > LINEARITY_TOL {
            return Err(Error::Linearity(format!(
                "post-selected normalizer is state dependent: ‖Θ − c𝕀‖_max = {dev:e}"
            )));
        }
        if c < DEGENERATE_BRANCH_TOL {
            return Err(Error::DegenerateBranch { probability: c });
        }
        Ok((joint, omega.matrix().clone(), effect, c))
    }
}

impl MapFamily for SwitchedFamily {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn apply(&self, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (joint, omega, effect, c) = self.setup_at(t)?;
        Ok(effect_branch_action(&joint, x, &omega, &effect)?.scale_re(1.0 / c))
    }

    fn apply_batch(&self, t: f64, xs: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        let (joint, omega, effect, c) = self.setup_at(t)?;
        xs.iter()
            .map(|x| Ok(effect_branch_action(&joint, x, &omega, &effect)?.scale_re(1.0 / c)))
            .collect()
    }
}
