//! Information loss, switch-induced memory, and non-Markovianity measures.
//!
//! The switched evolution Φ^S and the plain ergodic evolution Φ^ε share the
//! maximally mixed fixed point τ; the inequality
//! ΔI_S(ρ(t)) + Q_S(t) ≥ ΔI_ε(ρ(t)) bounds the information loss through
//! the switch by the switch-induced memory. Its deviation is tracked per
//! time point, the divisibility-based (RHP) and backflow-based (BLP)
//! measures are integrated with certified tails, and a rate sweep maps the
//! emergent non-Markovianity over asymmetric channel families.

use rayon::prelude::*;

use crate::channels::{KrausFamily, MapFamily, PauliRates};
use crate::error::{Error, Result};
use crate::lindblad::{self, BasisSet};
use crate::numerics;
use crate::qlinalg::{trace_distance, ComplexMatrix, DensityMatrix};
use crate::switch::{SwitchConfig, SwitchedFamily};

/// QSI record at one time point: deviation = ΔI_S + Q_S − ΔI_ε ≥ 0 up to
/// round-off.
#[derive(Debug, Clone, Copy)]
pub struct QsiRecord {
    pub t: f64,
    pub info_loss_switch: f64,
    pub qsm: f64,
    pub info_loss_ergodic: f64,
    pub deviation: f64,
}

impl QsiRecord {
    fn new(t: f64, info_loss_switch: f64, qsm: f64, info_loss_ergodic: f64) -> Result<Self> {
        let deviation = info_loss_switch + qsm - info_loss_ergodic;
        if deviation < -1e-10 {
            return Err(Error::Contract(format!(
                "switch information inequality violated at t={t}: deviation {deviation:e}"
            )));
        }
        Ok(Self {
            t,
            info_loss_switch,
            qsm,
            info_loss_ergodic,
            deviation,
        })
    }
}

/// Difference of distinguishabilities before and after an evolution:
/// D(ρ₁(0), ρ₂(0)) − D(ρ₁(t), ρ₂(t)).
pub fn info_loss(
    rho1_initial: &DensityMatrix,
    rho2_initial: &DensityMatrix,
    rho1_final: &DensityMatrix,
    rho2_final: &DensityMatrix,
) -> Result<f64> {
    Ok(trace_distance(rho1_initial, rho2_initial)? - trace_distance(rho1_final, rho2_final)?)
}

/// Switch-induced memory Q_S(t) = D(Φ^S_t(ρ), Φ^ε_t(ρ)).
pub fn qsm(
    rho: &DensityMatrix,
    t: f64,
    switch_map: &dyn MapFamily,
    ergodic_map: &dyn MapFamily,
) -> Result<f64> {
    let switched = switch_map.apply_state(t, rho)?;
    let ergodic = ergodic_map.apply_state(t, rho)?;
    trace_distance(&switched, &ergodic)
}

/// QSI trajectory of the depolarizing family under a (possibly noisy)
/// switch, by brute force.
///
/// The shared fixed point τ = 𝕀/2 is re-verified at every grid point
/// before the inequality is evaluated.
pub fn qsi_series(
    rho: &DensityMatrix,
    gamma: f64,
    times: &[f64],
    config: &SwitchConfig,
) -> Result<Vec<QsiRecord>> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let rates = PauliRates::symmetric(gamma)?;
    let ergodic = KrausFamily::depolarizing(rates);
    let switched = SwitchedFamily::depolarizing(gamma, *config)?;
    let tau = DensityMatrix::maximally_mixed(2);
    let d0 = trace_distance(rho, &tau)?;

    times
        .iter()
        .map(|&t| {
            let s_tau = switched.apply_state(t, &tau)?;
            if s_tau.matrix().sub(tau.matrix()).max_abs() > 1e-10 {
                return Err(Error::Contract(format!(
                    "fixed point not preserved by the switched map at t={t}"
                )));
            }
            let s_rho = switched.apply_state(t, rho)?;
            let e_rho = ergodic.apply_state(t, rho)?;
            let info_switch = d0 - trace_distance(&s_rho, &tau)?;
            let info_ergodic = d0 - trace_distance(&e_rho, &tau)?;
            let memory = trace_distance(&s_rho, &e_rho)?;
            QsiRecord::new(t, info_switch, memory, info_ergodic)
        })
        .collect()
}

/// Long-time average (1/T)∫₀ᵀ Φ_t(ρ) dt by composite Simpson quadrature.
///
/// Convergence is certified by comparing against the average over [0, T/2];
/// the difference must fall below `tol`.
pub fn time_averaged_state(
    map: &dyn MapFamily,
    rho: &DensityMatrix,
    t_max: f64,
    tol: f64,
    panels: usize,
) -> Result<DensityMatrix> {
    if t_max <= 0.0 {
        return Err(Error::Domain(format!("averaging horizon must be positive, got {t_max}")));
    }
    let full = average_matrix(map, rho, t_max, panels)?;
    let half = average_matrix(map, rho, t_max / 2.0, panels.div_ceil(2))?;
    let residual = full.sub(&half).max_abs();
    if residual > tol {
        return Err(Error::Convergence {
            context: "time-averaged state",
            residual,
            tolerance: tol,
        });
    }
    DensityMatrix::new(full)
}

fn average_matrix(
    map: &dyn MapFamily,
    rho: &DensityMatrix,
    t_max: f64,
    panels: usize,
) -> Result<ComplexMatrix> {
    let n = panels.max(2).next_multiple_of(2);
    let h = t_max / n as f64;
    let mut acc = ComplexMatrix::zeros(rho.dim());
    for k in 0..=n {
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let state = map.apply_state(k as f64 * h, rho)?;
        acc = acc.add(&state.matrix().scale_re(w));
    }
    Ok(acc.scale_re(h / (3.0 * t_max)))
}

/// Residual of the time-averaged equality ΔĪ_S + Q̄_S = D(ρ, τ), which the
/// inequality collapses to for long-time-averaged states. Decays like 1/T.
pub fn time_avg_equality_check(rho: &DensityMatrix, gamma: f64, t_max: f64) -> Result<f64> {
    let rates = PauliRates::symmetric(gamma)?;
    let ergodic = KrausFamily::depolarizing(rates);
    let switched = SwitchedFamily::depolarizing(gamma, SwitchConfig::ideal())?;
    let tau = DensityMatrix::maximally_mixed(2);

    let panels = (((t_max * gamma) / 0.01).ceil() as usize).max(1000);
    let tol = 2.0 / (gamma * t_max);
    let avg_switched = time_averaged_state(&switched, rho, t_max, tol, panels)?;
    let avg_ergodic = time_averaged_state(&ergodic, rho, t_max, tol, panels)?;

    let d0 = trace_distance(rho, &tau)?;
    let info_avg = d0 - trace_distance(&avg_switched, &tau)?;
    let memory_avg = trace_distance(&avg_switched, &avg_ergodic)?;
    Ok((info_avg + memory_avg - d0).abs())
}

/// Characteristic time T₋, the root of Γ_S, found by bisection on
/// [1e-6/γ, 10/γ]. Equals ln(3 + 2√3)/(4γ).
pub fn characteristic_time(gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::Domain(format!("rate must be positive, got {gamma}")));
    }
    numerics::bisect(
        &mut |t| Ok(lindblad::gamma_s_closed_form(t, gamma)),
        1e-6 / gamma,
        10.0 / gamma,
        200,
    )
}

/// Backflow-measure report: endpoint form, quadrature cross-check and the
/// distances entering them.
#[derive(Debug, Clone, Copy)]
pub struct BlpReport {
    pub n_inf: f64,
    /// Independent quadrature of max(dD/dt, 0); agrees with `n_inf` within
    /// 1e-6 by construction.
    pub n_inf_quadrature: f64,
    pub t_minus: f64,
    pub d_at_t_minus: f64,
    pub d_at_infinity: f64,
}

/// BLP measure N_inf = D(Φ^S_∞(ρ), τ) − D(Φ^S_{T₋}(ρ), τ) of the switched
/// depolarizing channel, with the asymptote realized at t = 50/γ and
/// certified by the drift between 50/γ and 100/γ.
pub fn blp_measure(rho: &DensityMatrix, gamma: f64, config: &SwitchConfig) -> Result<BlpReport> {
    let switched = SwitchedFamily::depolarizing(gamma, *config)?;
    blp_measure_family(&switched, rho, gamma)
}

/// Same measure for an arbitrary qubit map family with fixed point 𝕀/2.
pub fn blp_measure_family(
    map: &dyn MapFamily,
    rho: &DensityMatrix,
    gamma: f64,
) -> Result<BlpReport> {
    let tau = DensityMatrix::maximally_mixed(2);
    let distance = |t: f64| -> Result<f64> {
        let state = map.apply_state(t, rho)?;
        trace_distance(&state, &tau)
    };

    let t_far = 50.0 / gamma;
    let d_far = distance(t_far)?;
    let drift = (d_far - distance(2.0 * t_far)?).abs();
    if drift > 1e-12 {
        return Err(Error::Convergence {
            context: "asymptotic switched state",
            residual: drift,
            tolerance: 1e-12,
        });
    }

    // Backflow onset: the first time the canonical rate turns negative.
    let basis = BasisSet::qubit();
    let Some(t_minus) = first_backflow_onset(map, &basis, 10.0 / gamma, 1e-5 / gamma)? else {
        // monotone contraction, no backflow
        return Ok(BlpReport {
            n_inf: 0.0,
            n_inf_quadrature: 0.0,
            t_minus: f64::NAN,
            d_at_t_minus: f64::NAN,
            d_at_infinity: d_far,
        });
    };

    let d_minus = distance(t_minus)?;
    let n_inf = d_far - d_minus;

    // Cross-check: quadrature of the positive part of dD/dt.
    let h = 1e-5 / gamma;
    let mut rate = |t: f64| -> Result<f64> {
        let lo = (t - h).max(0.0);
        let hi = t + h;
        Ok(((distance(hi)? - distance(lo)?) / (hi - lo)).max(0.0))
    };
    let panels = (((t_far - t_minus) * gamma / 0.01).ceil() as usize).max(1000);
    let n_inf_quadrature = numerics::simpson(&mut rate, t_minus, t_far, panels)?;
    let mismatch = (n_inf_quadrature - n_inf).abs();
    if mismatch > 1e-6 {
        return Err(Error::Convergence {
            context: "BLP endpoint/quadrature cross-check",
            residual: mismatch,
            tolerance: 1e-6,
        });
    }

    Ok(BlpReport {
        n_inf,
        n_inf_quadrature,
        t_minus,
        d_at_t_minus: d_minus,
        d_at_infinity: d_far,
    })
}

/// Divisibility-based instantaneous measure
/// g(t) = (‖(𝕀⊗Φ_{t+dt}∘Φ_t⁻¹)|ψ⟩⟨ψ|‖₁ − 1)/dt, built on the F-matrix
/// representation of the incremental map.
pub fn rhp_g(map: &dyn MapFamily, t: f64, dt: f64) -> Result<f64> {
    if map.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: map.dim(),
        });
    }
    if dt <= 0.0 {
        return Err(Error::Domain(format!("increment must be positive, got {dt}")));
    }
    let basis = BasisSet::qubit();
    let f_now = lindblad::f_matrix(map, t, &basis)?;
    let f_next = lindblad::f_matrix(map, t + dt, &basis)?;
    let inverse = {
        let svd = f_now.clone().svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let smin = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !condition.is_finite() || condition > 1e10 {
            return Err(Error::IllConditioned { condition });
        }
        f_now.clone().try_inverse().ok_or(Error::IllConditioned { condition })?
    };
    let incremental = f_next * inverse;

    let action = |rho: &DensityMatrix| -> Result<ComplexMatrix> {
        let r = basis.coordinates(rho.matrix())?;
        let mut out = vec![0.0; r.len()];
        for m in 0..r.len() {
            for k in 0..r.len() {
                out[m] += incremental[(m, k)] * r[k];
            }
        }
        basis.operator(&out)
    };
    let choi = crate::qlinalg::choi_matrix(2, action)?;
    let trace_norm: f64 = crate::qlinalg::hermitian_eigenvalues(&choi)?
        .iter()
        .map(|v| v.abs())
        .sum();
    Ok((trace_norm - 1.0) / dt)
}

/// RHP-measure report.
#[derive(Debug, Clone, Copy)]
pub struct RhpReport {
    pub n_s: f64,
    pub n_s_normalized: f64,
    pub t_minus: f64,
    pub t_cut: f64,
    /// Certified bound on the neglected tail ∫_{T_cut}^∞ g dt.
    pub tail_bound: f64,
    /// Richardson error estimate of the quadrature.
    pub quadrature_error: f64,
}

/// N_S = ∫ g(t) dt over [T₋, T_cut] with a certified exponential tail, and
/// the normalized measure 𝒩_S = N_S/(1+N_S).
pub fn rhp_measure(gamma: f64, config: &SwitchConfig) -> Result<RhpReport> {
    if gamma <= 0.0 {
        return Err(Error::Domain(format!("rate must be positive, got {gamma}")));
    }
    let map = SwitchedFamily::depolarizing(gamma, *config)?;
    let t_minus = if config.is_ideal() {
        characteristic_time(gamma)?
    } else {
        let basis = BasisSet::qubit();
        first_backflow_onset(&map, &basis, 10.0 / gamma, 1e-5 / gamma)?
            .ok_or_else(|| Error::Contract("no backflow onset found for this configuration".into()))?
    };
    let t_cut = 8.0 / gamma;
    let dt = 1e-6 / gamma;

    // g decays like e^(−4γt); the remaining tail is bounded by g(T_cut)/(4γ).
    let tail_bound = rhp_g(&map, t_cut, dt)?.max(0.0) / (4.0 * gamma);
    if tail_bound > 1e-8 {
        return Err(Error::Convergence {
            context: "RHP tail certificate",
            residual: tail_bound,
            tolerance: 1e-8,
        });
    }

    let panels = (((t_cut - t_minus) * gamma / 0.01).ceil() as usize).max(1000);
    let (n_s, quadrature_error) = numerics::simpson_checked(
        &mut |t| Ok(rhp_g(&map, t, dt)?.max(0.0)),
        t_minus,
        t_cut,
        panels,
    )?;
    Ok(RhpReport {
        n_s,
        n_s_normalized: n_s / (1.0 + n_s),
        t_minus,
        t_cut,
        tail_bound,
        quadrature_error,
    })
}

/// Q_S(∞) = N_inf + D(Φ^S_{T₋}(ρ), τ) and the normalized memory
/// 𝒩_S^∞ = Q_S(∞)/(1+Q_S(∞)).
///
/// The second published form, expressed through 𝒩_BLP, is evaluated as well
/// and the two must agree identically.
pub fn qsm_blp_bridge(n_inf: f64, d_at_t_minus: f64) -> Result<(f64, f64)> {
    if n_inf < 0.0 || d_at_t_minus < 0.0 {
        return Err(Error::Domain("bridge inputs must be non-negative".into()));
    }
    let q_s_infinity = n_inf + d_at_t_minus;
    let normalized = q_s_infinity / (1.0 + q_s_infinity);

    let n_blp = n_inf / (1.0 + n_inf);
    let alt = (n_blp + d_at_t_minus * (1.0 - n_blp)) / (1.0 + d_at_t_minus * (1.0 - n_blp));
    if (alt - normalized).abs() > 1e-12 {
        return Err(Error::Contract(format!(
            "the two published forms of the normalized memory disagree: {normalized} vs {alt}"
        )));
    }
    Ok((q_s_infinity, normalized))
}

/// Summary of the emergent non-Markovianity for one rate and switch
/// configuration.
#[derive(Debug, Clone, Copy)]
pub struct NonMarkovReport {
    pub t_minus: f64,
    pub n_s: f64,
    pub n_s_normalized: f64,
    pub n_inf: f64,
    pub n_blp_normalized: f64,
    pub q_s_infinity: f64,
    pub n_s_infinity: f64,
}

/// Assembles the full report for the switched depolarizing channel with
/// input state ρ.
pub fn nonmarkov_report(
    gamma: f64,
    config: &SwitchConfig,
    rho: &DensityMatrix,
) -> Result<NonMarkovReport> {
    let rhp = rhp_measure(gamma, config)?;
    let blp = blp_measure(rho, gamma, config)?;
    let (q_s_infinity, n_s_infinity) = qsm_blp_bridge(blp.n_inf, blp.d_at_t_minus)?;
    Ok(NonMarkovReport {
        t_minus: rhp.t_minus,
        n_s: rhp.n_s,
        n_s_normalized: rhp.n_s_normalized,
        n_inf: blp.n_inf,
        n_blp_normalized: blp.n_inf / (1.0 + blp.n_inf),
        q_s_infinity,
        n_s_infinity,
    })
}

/// First time at which any canonical rate of the reconstructed generator
/// turns negative, located by scan plus bisection. `None` when the map
/// stays CP-divisible on (0, t_hi].
pub fn first_backflow_onset(
    map: &dyn MapFamily,
    basis: &BasisSet,
    t_hi: f64,
    h_fd: f64,
) -> Result<Option<f64>> {
    let min_rate = |t: f64| -> Result<f64> {
        let l = lindblad::l_matrix_refined(map, t, basis, h_fd)?;
        let rates = lindblad::canonical_pauli_rates(&l)?;
        Ok(rates.into_iter().fold(f64::MAX, f64::min))
    };

    let t_lo = 10.0 * h_fd;
    let scan_points = 400;
    let step = (t_hi - t_lo) / scan_points as f64;
    let mut prev_t = t_lo;
    let mut prev_m = min_rate(t_lo)?;
    for k in 1..=scan_points {
        let t = t_lo + k as f64 * step;
        let m = min_rate(t)?;
        if m < -1e-8 {
            if prev_m > 0.0 {
                let onset = numerics::bisect(&mut |s| min_rate(s), prev_t, t, 200)?;
                return Ok(Some(onset));
            }
            return Ok(Some(prev_t));
        }
        prev_t = t;
        prev_m = m;
    }
    Ok(None)
}

/// One cell of the rate sweep; errors are recorded per cell so a failing
/// cell does not abort the surface.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub n_s: Option<f64>,
    pub n_s_normalized: Option<f64>,
    pub error: Option<String>,
}

/// Normalized RHP measure over a (γ₁, γ₂) grid at fixed γ₃, with a fixed
/// integration horizon `t_max`.
///
/// Per cell: build the exact Pauli family, switch it with itself by brute
/// force, reconstruct the generator, and integrate
/// g(t) = 2 Σᵢ max(0, −Γᵢ(t)) over its positive support within [0, t_max].
/// The fixed horizon matters: the converged integral is invariant under a
/// common rescaling of all rates, so the observed growth of 𝒩_S toward
/// large rates reflects a finite observation window.
pub fn sweep_ns_surface(
    gamma1_grid: &[f64],
    gamma2_grid: &[f64],
    gamma3: f64,
    t_max: f64,
) -> Result<Vec<SweepCell>> {
    if t_max <= 0.0 {
        return Err(Error::Domain(format!("sweep horizon must be positive, got {t_max}")));
    }
    let cells: Vec<(f64, f64)> = gamma1_grid
        .iter()
        .flat_map(|&g1| gamma2_grid.iter().map(move |&g2| (g1, g2)))
        .collect();

    Ok(cells
        .into_par_iter()
        .map(|(g1, g2)| match sweep_cell(g1, g2, gamma3, t_max) {
            Ok(n_s) => SweepCell {
                gamma1: g1,
                gamma2: g2,
                gamma3,
                n_s: Some(n_s),
                n_s_normalized: Some(n_s / (1.0 + n_s)),
                error: None,
            },
            Err(e) => SweepCell {
                gamma1: g1,
                gamma2: g2,
                gamma3,
                n_s: None,
                n_s_normalized: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

fn sweep_cell(g1: f64, g2: f64, g3: f64, t_max: f64) -> Result<f64> {
    let rates = PauliRates::new(g1, g2, g3)?;
    let pair_sums = [g2 + g3, g1 + g3, g1 + g2];
    let lambda_max = 2.0 * pair_sums.iter().cloned().fold(0.0, f64::max);
    if lambda_max == 0.0 {
        // identity channel; nothing to switch
        return Ok(0.0);
    }

    let map = SwitchedFamily::new(KrausFamily::pauli(rates), SwitchConfig::ideal())?;
    let basis = BasisSet::qubit();
    let h_fd = 1e-5 / lambda_max;

    let Some(onset) = first_backflow_onset(&map, &basis, t_max, h_fd)? else {
        return Ok(0.0);
    };

    // g from the reconstructed canonical rates; late-time numerical noise in
    // the rates sits at the 1e-10 level and is clipped away by max(0, ·).
    let mut g_at = |t: f64| -> Result<f64> {
        let l = lindblad::l_matrix_refined(&map, t, &basis, h_fd)?;
        let rates = lindblad::canonical_pauli_rates(&l)?;
        let g: f64 = rates.iter().map(|&r| (-r).max(0.0)).sum::<f64>() * 2.0;
        Ok(if g > 1e-10 { g } else { 0.0 })
    };
    numerics::simpson(&mut g_at, onset, t_max, 2000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::switch::closed_form_c;

    fn excited() -> DensityMatrix {
        DensityMatrix::basis_state(2, 1).unwrap()
    }

    fn t_minus_exact(gamma: f64) -> f64 {
        (3.0 + 2.0 * 3.0f64.sqrt()).ln() / (4.0 * gamma)
    }

    #[test]
    fn info_loss_zero_at_start() {
        let a = excited();
        let b = DensityMatrix::maximally_mixed(2);
        let v = info_loss(&a, &b, &a, &b).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn info_loss_of_depolarizing_is_bloch_contraction() {
        let gamma = 1.0;
        let family = KrausFamily::depolarizing(PauliRates::symmetric(gamma).unwrap());
        let rho = excited();
        let tau = DensityMatrix::maximally_mixed(2);
        for &t in &[0.2, 0.9, 3.0] {
            let evolved = family.apply_state(t, &rho).unwrap();
            let v = info_loss(&rho, &tau, &evolved, &tau).unwrap();
            let expect = (1.0 - (-4.0 * gamma * t).exp()) / 2.0;
            assert!((v - expect).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn info_loss_fully_decohered_endpoint() {
        let rho = excited();
        let tau = DensityMatrix::maximally_mixed(2);
        let v = info_loss(&rho, &tau, &tau, &tau).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn qsm_zero_at_t_zero() {
        let gamma = 1.0;
        let switched = SwitchedFamily::depolarizing(gamma, SwitchConfig::ideal()).unwrap();
        let ergodic = KrausFamily::depolarizing(PauliRates::symmetric(gamma).unwrap());
        let v = qsm(&excited(), 0.0, &switched, &ergodic).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn qsm_of_excited_state_is_c_minus_exponential() {
        let gamma = 1.0;
        let switched = SwitchedFamily::depolarizing(gamma, SwitchConfig::ideal()).unwrap();
        let ergodic = KrausFamily::depolarizing(PauliRates::symmetric(gamma).unwrap());
        for &t in &[0.1, 0.5, 1.5] {
            let v = qsm(&excited(), t, &switched, &ergodic).unwrap();
            let expect = (closed_form_c(t, gamma) - (-4.0 * gamma * t).exp()).abs() / 2.0;
            assert!((v - expect).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn qsm_vanishes_for_switch_invariant_channel() {
        let id = KrausFamily::constant(vec![ComplexMatrix::identity(2)]).unwrap();
        let switched = SwitchedFamily::new(id.clone(), SwitchConfig::ideal()).unwrap();
        let v = qsm(&excited(), 2.0, &switched, &id).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn qsi_deviation_matches_analytic_positive_part() {
        let gamma = 1.0;
        let times: Vec<f64> = (0..60).map(|k| k as f64 * 0.05).collect();
        let records = qsi_series(&excited(), gamma, &times, &SwitchConfig::ideal()).unwrap();
        for r in &records {
            let expect = ((-4.0 * gamma * r.t).exp() - closed_form_c(r.t, gamma)).max(0.0);
            assert!((r.deviation - expect).abs() < 1e-10, "t={}", r.t);
        }
        assert!(records[0].deviation.abs() < 1e-12);
    }

    #[test]
    fn qsi_rise_and_return_shape() {
        let gamma = 1.0;
        let times: Vec<f64> = (0..=500).map(|k| k as f64 * 0.01).collect();
        let records = qsi_series(&excited(), gamma, &times, &SwitchConfig::ideal()).unwrap();
        let max_dev = records.iter().map(|r| r.deviation).fold(0.0, f64::max);
        assert!(max_dev > 1e-3);
        assert!(records.last().unwrap().deviation <= 1e-6);
    }

    #[test]
    fn time_average_of_depolarizing_is_maximally_mixed() {
        let gamma = 1.0;
        let family = KrausFamily::depolarizing(PauliRates::symmetric(gamma).unwrap());
        let avg = time_averaged_state(&family, &excited(), 50.0, 0.05, 5000).unwrap();
        let tau = DensityMatrix::maximally_mixed(2);
        assert!(avg.matrix().sub(tau.matrix()).max_abs() < 0.01);
    }

    #[test]
    fn time_average_of_identity_is_input() {
        let id = KrausFamily::constant(vec![ComplexMatrix::identity(2)]).unwrap();
        let rho = DensityMatrix::from_bloch(0.2, 0.4, -0.3).unwrap();
        let avg = time_averaged_state(&id, &rho, 10.0, 1e-10, 1000).unwrap();
        assert!(avg.matrix().sub(rho.matrix()).max_abs() < 1e-11);
    }

    #[test]
    fn time_average_of_switched_family_approaches_plateau() {
        // C̄ → 1/5, so the averaged excited state tends to diag(2/5, 3/5)
        let gamma = 1.0;
        let switched = SwitchedFamily::depolarizing(gamma, SwitchConfig::ideal()).unwrap();
        let avg = time_averaged_state(&switched, &excited(), 200.0, 0.05, 20_000).unwrap();
        assert!((avg.get(0, 0).re - 0.4).abs() < 5e-3);
        assert!((avg.get(1, 1).re - 0.6).abs() < 5e-3);
    }

    #[test]
    fn equality_residual_decays_like_one_over_t() {
        let gamma = 1.0;
        let r50 = time_avg_equality_check(&excited(), gamma, 50.0 / gamma).unwrap();
        let r100 = time_avg_equality_check(&excited(), gamma, 100.0 / gamma).unwrap();
        assert!(r50 <= 1e-2, "residual at 50/gamma: {r50}");
        assert!(r100 < r50);
    }

    #[test]
    fn equality_trivial_for_fixed_point_input() {
        let gamma = 1.0;
        let tau = DensityMatrix::maximally_mixed(2);
        let r = time_avg_equality_check(&tau, gamma, 20.0).unwrap();
        assert!(r < 1e-10);
    }

    #[test]
    fn characteristic_time_matches_closed_form() {
        for &gamma in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            let numeric = characteristic_time(gamma).unwrap();
            let exact = t_minus_exact(gamma);
            assert!(
                ((numeric - exact) / exact).abs() < 1e-10,
                "gamma={gamma}: {numeric} vs {exact}"
            );
        }
    }

    #[test]
    fn characteristic_time_scales_inversely_with_gamma() {
        let t1 = characteristic_time(1.0).unwrap();
        let t2 = characteristic_time(2.0).unwrap();
        assert!((t1 / t2 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn blp_measure_of_excited_state() {
        let report = blp_measure(&excited(), 1.0, &SwitchConfig::ideal()).unwrap();
        let expect = 0.1 - (2.0 * 3.0f64.sqrt() - 3.0) / 6.0;
        assert!((report.n_inf - expect).abs() < 1e-8, "{}", report.n_inf);
        assert!((report.n_inf_quadrature - expect).abs() < 1e-6);
        assert!((report.d_at_infinity - 0.1).abs() < 1e-10);
    }

    #[test]
    fn blp_measure_zero_for_fixed_point() {
        let tau = DensityMatrix::maximally_mixed(2);
        let report = blp_measure(&tau, 1.0, &SwitchConfig::ideal()).unwrap();
        assert!(report.n_inf.abs() < 1e-9);
    }

    #[test]
    fn blp_zero_for_unswitched_depolarizing() {
        let family = KrausFamily::depolarizing(PauliRates::symmetric(1.0).unwrap());
        let report = blp_measure_family(&family, &excited(), 1.0).unwrap();
        assert!(report.n_inf == 0.0);
        assert!(report.t_minus.is_nan());
    }

    #[test]
    fn rhp_g_vanishes_in_divisible_region() {
        let map = SwitchedFamily::depolarizing(1.0, SwitchConfig::ideal()).unwrap();
        for &t in &[0.05, 0.2, 0.4] {
            let g = rhp_g(&map, t, 1e-6).unwrap();
            assert!(g.abs() < 1e-6, "t={t}: g={g}");
        }
    }

    #[test]
    fn rhp_g_matches_six_gamma_after_onset() {
        let gamma = 1.0;
        let map = SwitchedFamily::depolarizing(gamma, SwitchConfig::ideal()).unwrap();
        for &t in &[0.6, 1.0, 2.0] {
            let g = rhp_g(&map, t, 1e-6 / gamma).unwrap();
            let expect = 6.0 * lindblad::gamma_s_closed_form(t, gamma).abs();
            assert!((g - expect).abs() < 1e-4, "t={t}: {g} vs {expect}");
        }
    }

    #[test]
    fn rhp_g_zero_at_transition_point() {
        let map = SwitchedFamily::depolarizing(1.0, SwitchConfig::ideal()).unwrap();
        let g = rhp_g(&map, t_minus_exact(1.0), 1e-6).unwrap();
        assert!(g.abs() < 1e-6);
    }

    #[test]
    fn rhp_measure_gamma_independent_value() {
        let expect = 1.5 * (3.0 / (5.0 * (2.0 * 3.0f64.sqrt() - 3.0))).ln();
        for &gamma in &[0.5, 1.0, 2.0] {
            let report = rhp_measure(gamma, &SwitchConfig::ideal()).unwrap();
            assert!(
                (report.n_s - expect).abs() < 1e-6,
                "gamma={gamma}: {} vs {expect}",
                report.n_s
            );
        }
    }

    #[test]
    fn bridge_values_for_ideal_switch() {
        let n_inf = 0.1 - (2.0 * 3.0f64.sqrt() - 3.0) / 6.0;
        let d_minus = (2.0 * 3.0f64.sqrt() - 3.0) / 6.0;
        let (q_inf, n_inf_norm) = qsm_blp_bridge(n_inf, d_minus).unwrap();
        assert!((q_inf - 0.1).abs() < 1e-14);
        assert!((n_inf_norm - 0.1 / 1.1).abs() < 1e-14);
    }

    #[test]
    fn bridge_trivial_case() {
        let (q, n) = qsm_blp_bridge(0.0, 0.0).unwrap();
        assert_eq!(q, 0.0);
        assert_eq!(n, 0.0);
    }

    #[test]
    fn bridge_respects_high_backflow_limit() {
        // as N_inf grows, the normalized memory approaches the normalized BLP
        let d = 0.05;
        let n_inf = 1e4;
        let (_, n_s_inf) = qsm_blp_bridge(n_inf, d).unwrap();
        let n_blp = n_inf / (1.0 + n_inf);
        assert!((n_s_inf - n_blp).abs() < 1e-3);
    }

    #[test]
    fn onset_detection_matches_characteristic_time() {
        let gamma = 1.0;
        let map = SwitchedFamily::depolarizing(gamma, SwitchConfig::ideal()).unwrap();
        let basis = BasisSet::qubit();
        let onset = first_backflow_onset(&map, &basis, 5.0, 1e-5)
            .unwrap()
            .expect("switched channel has an onset");
        assert!((onset - t_minus_exact(gamma)).abs() < 1e-6, "onset {onset}");
    }

    #[test]
    fn sweep_symmetric_cell_matches_closed_form() {
        let cells = sweep_ns_surface(&[1.0], &[1.0], 1.0, 6.0).unwrap();
        assert_eq!(cells.len(), 1);
        let n_s = cells[0].n_s.expect("cell converged");
        let expect = 1.5 * (3.0 / (5.0 * (2.0 * 3.0f64.sqrt() - 3.0))).ln();
        assert!((n_s - expect).abs() < 1e-4, "{n_s} vs {expect}");
    }

    #[test]
    fn sweep_identity_cell_is_zero() {
        let cells = sweep_ns_surface(&[0.0], &[0.0], 0.0, 6.0).unwrap();
        assert_eq!(cells[0].n_s, Some(0.0));
    }

    #[test]
    fn sweep_is_symmetric_under_rate_exchange() {
        let cells = sweep_ns_surface(&[0.4, 0.8], &[0.4, 0.8], 0.0, 6.0).unwrap();
        let get = |g1: f64, g2: f64| {
            cells
                .iter()
                .find(|c| c.gamma1 == g1 && c.gamma2 == g2)
                .and_then(|c| c.n_s)
                .unwrap()
        };
        assert!((get(0.4, 0.8) - get(0.8, 0.4)).abs() < 1e-6);
    }
}
