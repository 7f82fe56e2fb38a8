//! Energy functionals, the two exact balance laws, decay fitting, and the
//! observability ratio.
//!
//! Two identities are tracked along every run. The L² balance
//! `∫u²(t) = ∫u₀² − 2∫₀ᵗ∫ a u²` holds exactly for the continuum flow; its
//! discrete residual isolates time-quadrature and stepping error. The
//! Hamiltonian-type balance
//! `∫(u_x² − u³/3)(t) − ∫₀ᵗ∫ a u³ − ∫₀ᵗ∫ a_xx u² + 2∫₀ᵗ∫ a u_x² = const`
//! follows from `∫ a u u_xx = ½∫ a_xx u² − ∫ a u_x²` and needs a to be C²
//! across the periodic seam to hold at quadrature accuracy.

use serde::Serialize;

use crate::error::{KdvError, Result};
use crate::grid::Field;
use crate::profiles::{DampingKind, DampingProfile};

/// One diagnostic row: every tracked functional at a single time, plus the
/// running time-integrals that the balance laws need.
#[derive(Clone, Copy, Debug)]
pub struct EnergyRecord {
    pub t: f64,
    /// `∫u²`
    pub l2_sq: f64,
    /// `½∫u²`
    pub e0: f64,
    /// `∫(u² + u_x²)`
    pub h1_sq: f64,
    /// `∫u³` (signed)
    pub int_u3: f64,
    /// `∫|u|³`
    pub l3_cubed: f64,
    /// `h1_sq − int_u3/3`
    pub e_sec3: f64,
    /// `2·h1_sq − int_u3`
    pub k_sec3: f64,
    /// `½·h1_sq − int_u3/3`
    pub e1: f64,
    /// `½·h1_sq − l3_cubed/3`
    pub j_val: f64,
    /// `∫₀ᵗ∫ a u²` (running trapezoid, unfactored)
    pub diss_cum: f64,
    /// Left side of the Hamiltonian balance at this time.
    pub hamiltonian_lhs: f64,
    /// `|l2_sq − l2_sq(0) + 2·diss_cum|`, relative to `l2_sq(0)`.
    pub res_dissipation: f64,
    /// `|hamiltonian_lhs − hamiltonian_lhs(0)|`, relative to `max(1, |·(0)|)`.
    pub res_hamiltonian: f64,
    /// `∫u_x²`
    pub grad_sq: f64,
    /// Instantaneous integrands feeding the running trapezoids.
    pub int_au2: f64,
    pub int_au3: f64,
    pub int_axx_u2: f64,
    pub int_au_x2: f64,
    /// Running trapezoids of the three Hamiltonian damping terms.
    pub cum_au3: f64,
    pub cum_axx_u2: f64,
    pub cum_au_x2: f64,
    /// First-record state carried forward so residuals need no lookback.
    pub l2_sq_initial: f64,
    pub ham_initial: f64,
    /// `∫_{x ≤ r1} u²` when the profile is a right step (observability data).
    pub int_u2_left: Option<f64>,
}

/// Result of a log-linear fit of `e0` against time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    /// Fitted rate: `e0 ≈ c_pref · exp(−omega · t)`.
    pub omega: f64,
    pub c_pref: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual of `log e0` against the fitted line.
    pub rms_residual: f64,
    pub n_points: usize,
}

/// Evaluates every functional of `f` and extends the running integrals from
/// `prev` by one trapezoid panel.
pub fn record(f: &Field, a: &DampingProfile, prev: Option<&EnergyRecord>) -> Result<EnergyRecord> {
    crate::grid::same_grid(f.grid(), a.grid(), "record")?;
    let t = f.time_tag();
    let dx = f.grid().dx();
    let ux = f.derivative(1)?;
    let (mut l2, mut u3, mut abs3) = (0.0, 0.0, 0.0);
    let (mut au2, mut au3, mut axx_u2, mut au_x2, mut grad) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, &u) in f.samples().iter().enumerate() {
        let u2 = u * u;
        let g = ux.samples()[j];
        l2 += u2;
        u3 += u2 * u;
        abs3 += u2 * u.abs();
        grad += g * g;
        au2 += a.a()[j] * u2;
        au3 += a.a()[j] * u2 * u;
        axx_u2 += a.a_xx()[j] * u2;
        au_x2 += a.a()[j] * g * g;
    }
    let l2_sq = dx * l2;
    let int_u3 = dx * u3;
    let l3_cubed = dx * abs3;
    let grad_sq = dx * grad;
    let h1_sq = l2_sq + grad_sq;
    let int_au2 = dx * au2;
    let int_au3 = dx * au3;
    let int_axx_u2 = dx * axx_u2;
    let int_au_x2 = dx * au_x2;

    let int_u2_left = if a.spec().kind == DampingKind::RightStep {
        let r1 = a.spec().r1;
        let mut s = 0.0;
        for (&x, &u) in f.grid().nodes().iter().zip(f.samples()) {
            if x <= r1 {
                s += u * u;
            }
        }
        Some(dx * s)
    } else {
        None
    };

    let (diss_cum, cum_au3, cum_axx_u2, cum_au_x2, l2_sq_initial, ham_initial) = match prev {
        None => {
            let ham0 = grad_sq - int_u3 / 3.0;
            (0.0, 0.0, 0.0, 0.0, l2_sq, ham0)
        }
        Some(p) => {
            if t < p.t {
                return Err(KdvError::InvalidParameter(format!(
                    "record times must be non-decreasing: {t} after {}",
                    p.t
                )));
            }
            let h = t - p.t;
            (
                p.diss_cum + 0.5 * h * (p.int_au2 + int_au2),
                p.cum_au3 + 0.5 * h * (p.int_au3 + int_au3),
                p.cum_axx_u2 + 0.5 * h * (p.int_axx_u2 + int_axx_u2),
                p.cum_au_x2 + 0.5 * h * (p.int_au_x2 + int_au_x2),
                p.l2_sq_initial,
                p.ham_initial,
            )
        }
    };

    let hamiltonian_lhs = (grad_sq - int_u3 / 3.0) - cum_au3 - cum_axx_u2 + 2.0 * cum_au_x2;
    let res_dissipation = (l2_sq - l2_sq_initial + 2.0 * diss_cum).abs()
        / if l2_sq_initial > 0.0 {
            l2_sq_initial
        } else {
            1.0
        };
    let res_hamiltonian = (hamiltonian_lhs - ham_initial).abs() / 1.0_f64.max(ham_initial.abs());

    Ok(EnergyRecord {
        t,
        l2_sq,
        e0: 0.5 * l2_sq,
        h1_sq,
        int_u3,
        l3_cubed,
        e_sec3: h1_sq - int_u3 / 3.0,
        k_sec3: 2.0 * h1_sq - int_u3,
        e1: 0.5 * h1_sq - int_u3 / 3.0,
        j_val: 0.5 * h1_sq - l3_cubed / 3.0,
        diss_cum,
        hamiltonian_lhs,
        res_dissipation,
        res_hamiltonian,
        grad_sq,
        int_au2,
        int_au3,
        int_axx_u2,
        int_au_x2,
        cum_au3,
        cum_axx_u2,
        cum_au_x2,
        l2_sq_initial,
        ham_initial,
        int_u2_left,
    })
}

/// Worst relative residual of the L² balance over the records.
pub fn dissipation_residual(records: &[EnergyRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(KdvError::PreconditionUnmet(
            "dissipation residual of an empty series".into(),
        ));
    }
    Ok(records
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.res_dissipation)))
}

/// Worst relative residual of the Hamiltonian balance over the records.
///
/// The damping contributions enter through running integrals accumulated at
/// record time, so no profile argument is needed here.
pub fn hamiltonian_residual(records: &[EnergyRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(KdvError::PreconditionUnmet(
            "hamiltonian residual of an empty series".into(),
        ));
    }
    Ok(records
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.res_hamiltonian)))
}

/// Least-squares fit of `log e0` against `t` over records inside `window`.
pub fn fit_decay(records: &[EnergyRecord], window: (f64, f64)) -> Result<DecayFit> {
    let (ta, tb) = window;
    if !(ta.is_finite() && tb.is_finite() && ta < tb) {
        return Err(KdvError::InvalidParameter(format!(
            "decay window must satisfy t_a < t_b, got [{ta}, {tb}]"
        )));
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for r in records {
        if r.t >= ta - 1e-12 && r.t <= tb + 1e-12 {
            if r.e0 <= 0.0 {
                return Err(KdvError::PreconditionUnmet(format!(
                    "e0 must stay positive in the fit window; e0({}) = {}",
                    r.t, r.e0
                )));
            }
            pts.push((r.t, r.e0.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(KdvError::PreconditionUnmet(format!(
            "need at least two records in the window, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(KdvError::PreconditionUnmet(
            "degenerate time distribution in the fit window".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rms = (pts
        .iter()
        .map(|&(t, y)| {
            let r = y - (slope * t + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        omega: -slope,
        c_pref: intercept.exp(),
        window,
        rms_residual: rms,
        n_points: pts.len(),
    })
}

/// Empirical observability constant for a right-step profile: the ratio
/// `∫₀ᵀ∫_{x≤r1} u² / ∫₀ᵀ∫ a u²`, both by trapezoid over the records.
///
/// `t0_gate` is the minimum admissible horizon (the underlying bound only
/// holds for T past some T₀).
pub fn observability_ratio(
    records: &[EnergyRecord],
    a: &DampingProfile,
    r1: f64,
    t_upper: f64,
    t0_gate: f64,
) -> Result<f64> {
    if a.spec().kind != DampingKind::RightStep {
        return Err(KdvError::PreconditionUnmet(
            "observability ratio is defined for right_step damping only".into(),
        ));
    }
    if (a.spec().r1 - r1).abs() > 1e-9 {
        return Err(KdvError::InvalidParameter(format!(
            "r1 = {r1} disagrees with the profile's activation abscissa {}",
            a.spec().r1
        )));
    }
    if t_upper <= t0_gate || !t_upper.is_finite() || !t0_gate.is_finite() {
        return Err(KdvError::PreconditionUnmet(format!(
            "horizon T = {t_upper} must exceed T0 = {t0_gate}"
        )));
    }
    let included: Vec<&EnergyRecord> = records.iter().filter(|r| r.t <= t_upper + 1e-9).collect();
    if included.len() < 2 {
        return Err(KdvError::PreconditionUnmet(
            "series has fewer than two records inside [0, T]".into(),
        ));
    }
    if included.last().unwrap().t + 1e-9 < t_upper {
        return Err(KdvError::PreconditionUnmet(format!(
            "series ends at t = {} before the requested horizon {t_upper}",
            included.last().unwrap().t
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for w in included.windows(2) {
        let (p, r) = (w[0], w[1]);
        let h = r.t - p.t;
        let (pl, rl) = match (p.int_u2_left, r.int_u2_left) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                return Err(KdvError::PreconditionUnmet(
                    "records were not taken against a right_step profile".into(),
                ))
            }
        };
        num += 0.5 * h * (pl + rl);
        den += 0.5 * h * (p.int_au2 + r.int_au2);
    }
    if den <= 0.0 {
        return Err(KdvError::PreconditionUnmet(
            "damped-region integral is zero; the ratio is undefined".into(),
        ));
    }
    Ok(num / den)
}
