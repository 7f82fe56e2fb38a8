//! Mild (Duhamel) solutions: trajectory norms, the inhomogeneous integral
//! operator, Picard iteration, and the contraction-window estimate.
//!
//! A trajectory is a uniformly sampled path t ↦ u(t) on [0, T]. The mild
//! formulation writes the flow as Ψ(u)(t) = S(t)u₀ + ∫₀ᵗ S(t−s) N(u(s)) ds
//! with N(u) = −½∂ₓ(u²) − a·u; its fixed points are the solutions. The
//! integral is evaluated by trapezoid after untwisting by the free group, so
//! the whole operator costs one FFT pair per slice.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::airy::airy_propagate;
use crate::error::{KdvError, Result};
use crate::grid::{Field, Grid};
use crate::integrator::rhs_nonstiff;
use crate::profiles::DampingProfile;

/// A uniformly sampled path on [0, T], all slices on one grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<Field>,
}

impl Trajectory {
    /// Wraps explicit slices; times must start at 0 and be uniformly spaced.
    pub fn from_slices(grid: &Grid, times: Vec<f64>, slices: Vec<Field>) -> Result<Self> {
        if times.len() < 2 || times.len() != slices.len() {
            return Err(KdvError::InvalidParameter(format!(
                "need matching times and slices with at least 2 entries, got {} and {}",
                times.len(),
                slices.len()
            )));
        }
        if times[0].abs() > 1e-12 {
            return Err(KdvError::InvalidParameter(format!(
                "trajectory must start at t = 0, got {}",
                times[0]
            )));
        }
        let h = times[1] - times[0];
        if !(h.is_finite() && h > 0.0) {
            return Err(KdvError::InvalidParameter(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        for (i, w) in times.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                return Err(KdvError::InvalidParameter(format!(
                    "trajectory times must be uniform; spacing breaks at index {i}"
                )));
            }
        }
        for s in &slices {
            crate::grid::same_grid(s.grid(), grid, "trajectory slice")?;
        }
        Ok(Self {
            grid: grid.clone(),
            times,
            slices,
        })
    }

    /// The free-group trajectory t ↦ S(t)u₀ on `n_t` uniform samples of [0, T].
    pub fn free(u0: &Field, t_horizon: f64, n_t: usize) -> Result<Self> {
        let (times, _) = uniform_times(t_horizon, n_t)?;
        let base = u0.clone().with_time_tag(0.0);
        let slices = times.iter().map(|&t| airy_propagate(&base, t)).collect();
        Ok(Self {
            grid: u0.grid().clone(),
            times,
            slices,
        })
    }

    /// The constant-in-time trajectory t ↦ u₀.
    pub fn frozen(u0: &Field, t_horizon: f64, n_t: usize) -> Result<Self> {
        let (times, _) = uniform_times(t_horizon, n_t)?;
        let slices = times.iter().map(|&t| u0.clone().with_time_tag(t)).collect();
        Ok(Self {
            grid: u0.grid().clone(),
            times,
            slices,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn n_t(&self) -> usize {
        self.times.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("trajectories are non-empty")
    }

    fn spacing(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Largest slice-wise H¹ distance to another trajectory.
    pub fn sup_h1_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.n_t() != other.n_t() {
            return Err(KdvError::InvalidParameter(
                "trajectories have different sample counts".into(),
            ));
        }
        let mut worst = 0.0_f64;
        for (a, b) in self.slices.iter().zip(&other.slices) {
            worst = worst.max(a.h1_distance(b)?);
        }
        Ok(worst)
    }
}

fn uniform_times(t_horizon: f64, n_t: usize) -> Result<(Vec<f64>, f64)> {
    if !(t_horizon.is_finite() && t_horizon > 0.0) {
        return Err(KdvError::InvalidParameter(format!(
            "horizon must be positive, got {t_horizon}"
        )));
    }
    if n_t < 2 {
        return Err(KdvError::InvalidParameter(format!(
            "need at least 2 time samples, got {n_t}"
        )));
    }
    let h = t_horizon / (n_t - 1) as f64;
    Ok(((0..n_t).map(|i| i as f64 * h).collect(), h))
}

/// The four trajectory norms of the local well-posedness machinery, plus
/// their maximum. All are 1-homogeneous in the trajectory.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KpvNorms {
    /// sup over t of the H¹ norm.
    pub gamma1: f64,
    /// L²-in-time of ‖u_xx(t)‖∞.
    pub gamma2: f64,
    /// L⁶-in-time of ‖u_x(t)‖∞.
    pub gamma3: f64,
    /// (1+T)⁻¹ times the L²-in-x norm of the running-in-time maximum of |u|.
    pub gamma4: f64,
    pub big_gamma: f64,
    pub t_horizon: f64,
}

/// Evaluates the four norms over a trajectory (time integrals by trapezoid).
pub fn kpv_norms(traj: &Trajectory) -> KpvNorms {
    let h = traj.spacing();
    let t_horizon = traj.horizon();
    let n = traj.grid().n();
    let dx = traj.grid().dx();
    let last = traj.n_t() - 1;
    let mut gamma1 = 0.0_f64;
    let mut int_uxx_inf_sq = 0.0;
    let mut int_ux_inf_6 = 0.0;
    let mut max_u_sq = vec![0.0_f64; n];
    for (i, u) in traj.slices().iter().enumerate() {
        let w = if i == 0 || i == last { 0.5 * h } else { h };
        let nm = u.norms();
        gamma1 = gamma1.max(nm.h1_sq.sqrt());
        let ux = u.derivative(1).expect("order 1 valid");
        let uxx = u.derivative(2).expect("order 2 valid");
        let ux_inf = ux.norms().linf;
        let uxx_inf = uxx.norms().linf;
        int_uxx_inf_sq += w * uxx_inf * uxx_inf;
        int_ux_inf_6 += w * ux_inf.powi(6);
        for (m, &v) in max_u_sq.iter_mut().zip(u.samples()) {
            *m = m.max(v * v);
        }
    }
    let gamma2 = int_uxx_inf_sq.sqrt();
    let gamma3 = int_ux_inf_6.powf(1.0 / 6.0);
    let gamma4 = (dx * max_u_sq.iter().sum::<f64>()).sqrt() / (1.0 + t_horizon);
    let big_gamma = gamma1.max(gamma2).max(gamma3).max(gamma4);
    KpvNorms {
        gamma1,
        gamma2,
        gamma3,
        gamma4,
        big_gamma,
        t_horizon,
    }
}

/// Full complex Airy phase, Nyquist included (safe here: outputs are projected
/// to real samples at the very end, which reproduces the per-pair real
/// propagation for real inputs).
fn twist(grid: &Grid, spec: &mut [Complex64], t: f64) {
    for (c, &k) in spec.iter_mut().zip(grid.wavenumbers()) {
        let theta = k * k * k * t;
        *c *= Complex64::new(theta.cos(), theta.sin());
    }
}

/// The inhomogeneous term φ(t) = ∫₀ᵗ S(t−s) g(s) ds by trapezoid in s.
///
/// `t_horizon` must match the trajectory's own horizon; it is accepted
/// explicitly so call sites state their window.
pub fn duhamel(g: &Trajectory, t_horizon: f64) -> Result<Trajectory> {
    if (g.horizon() - t_horizon).abs() > 1e-9 * t_horizon.max(1.0) {
        return Err(KdvError::InvalidParameter(format!(
            "t_horizon = {t_horizon} does not match the trajectory horizon {}",
            g.horizon()
        )));
    }
    let grid = g.grid().clone();
    let h = g.spacing();
    // Untwist each slice to w_j = S(-t_j) g_j; prefix trapezoid sums then a
    // single retwist per output time give the whole family in O(n_t) FFTs.
    let untwisted: Vec<Vec<Complex64>> = g
        .slices()
        .iter()
        .zip(g.times())
        .map(|(s, &t)| {
            let mut spec = s.spectrum();
            twist(&grid, &mut spec, -t);
            spec
        })
        .collect();
    let n = grid.n();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let mut slices = Vec::with_capacity(g.n_t());
    slices.push(Field::zero(&grid, 0.0));
    for i in 1..g.n_t() {
        for j in 0..n {
            acc[j] += 0.5 * h * (untwisted[i - 1][j] + untwisted[i][j]);
        }
        let mut out = acc.clone();
        twist(&grid, &mut out, g.times()[i]);
        slices.push(Field::from_samples_unchecked(
            &grid,
            grid.to_samples(&out),
            g.times()[i],
        ));
    }
    Trajectory::from_slices(&grid, g.times().to_vec(), slices)
}

/// One Picard sweep: Ψ(u)(t) = S(t)u₀ + ∫₀ᵗ S(t−s) N(u(s)) ds.
pub fn picard_map(u: &Trajectory, u0: &Field, a: &DampingProfile) -> Result<Trajectory> {
    crate::grid::same_grid(u.grid(), u0.grid(), "picard_map")?;
    crate::grid::same_grid(u.grid(), a.grid(), "picard_map")?;
    let rhs_slices: Vec<Field> = u
        .slices()
        .iter()
        .map(|s| rhs_nonstiff(s, a, true))
        .collect::<Result<_>>()?;
    let rhs = Trajectory::from_slices(u.grid(), u.times().to_vec(), rhs_slices)?;
    let inhom = duhamel(&rhs, u.horizon())?;
    let base = u0.clone().with_time_tag(0.0);
    let slices: Vec<Field> = u
        .times()
        .iter()
        .zip(inhom.slices())
        .map(|(&t, phi)| {
            airy_propagate(&base, t)
                .add(phi)
                .map(|f| f.with_time_tag(t))
        })
        .collect::<Result<_>>()?;
    Trajectory::from_slices(u.grid(), u.times().to_vec(), slices)
}

/// Iterates the Picard map from the free trajectory until successive sweeps
/// are within `tol` in sup-H¹. Returns the fixed point and the distance log.
pub fn picard_solve(
    u0: &Field,
    a: &DampingProfile,
    t_horizon: f64,
    n_t: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, Vec<f64>)> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(KdvError::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(KdvError::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    let mut u = Trajectory::free(u0, t_horizon, n_t)?;
    let mut log = Vec::new();
    for _ in 0..max_iter {
        let next = picard_map(&u, u0, a)?;
        let d = next.sup_h1_distance(&u)?;
        log.push(d);
        u = next;
        if d < tol {
            return Ok((u, log));
        }
    }
    let last = *log.last().expect("at least one iteration ran");
    Err(KdvError::NonConvergence {
        iterations: max_iter,
        last_distance: last,
        log,
    })
}

/// The contraction-window report: the largest admissible horizon and the
/// constants that produced it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContractionReport {
    pub c1: f64,
    pub c2: f64,
    /// Ball radius 2·c₁·‖u₀‖_{H¹} the fixed-point argument works in.
    pub kappa: f64,
    pub t_kappa: f64,
    /// The window condition evaluated at `t_kappa` (just below 1 when the
    /// constraint is active).
    pub lhs_at_t: f64,
}

/// Solves the contraction window condition
/// `4√2·c₁·‖a‖_{W²,∞}·T + 2·c₁·c₂·√T·(1+T)·‖u₀‖_{H¹} < 1` with
/// `c₂ = 4(1+√2)·c₁`, returning the largest admissible T in (0, 1).
pub fn t_kappa(u0_h1: f64, a_w2inf: f64, c1: f64) -> Result<ContractionReport> {
    if !(c1.is_finite() && c1 > 1.0) {
        return Err(KdvError::InvalidParameter(format!(
            "c1 must exceed 1, got {c1}"
        )));
    }
    if !(u0_h1 >= 0.0 && u0_h1.is_finite() && a_w2inf >= 0.0 && a_w2inf.is_finite()) {
        return Err(KdvError::InvalidParameter(
            "norms must be finite and non-negative".into(),
        ));
    }
    let c2 = 4.0 * (1.0 + 2.0_f64.sqrt()) * c1;
    let lhs = |t: f64| -> f64 {
        4.0 * 2.0_f64.sqrt() * c1 * a_w2inf * t + 2.0 * c1 * c2 * t.sqrt() * (1.0 + t) * u0_h1
    };
    let target = 1.0 - 1e-6;
    let cap = 1.0 - 1e-9;
    let t_out;
    if lhs(cap) < target {
        // Window unconstrained inside (0, 1): both norms (numerically) zero.
        t_out = cap;
    } else {
        let (mut lo, mut hi) = (0.0_f64, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lhs(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        t_out = lo;
    }
    Ok(ContractionReport {
        c1,
        c2,
        kappa: 2.0 * c1 * u0_h1,
        t_kappa: t_out,
        lhs_at_t: lhs(t_out),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::profiles::{gaussian, make_damping, random_h1, soliton, DampingKind};

    #[test]
    fn trajectory_construction_is_validated() {
        let g = make_grid(80.0, 128).unwrap();
        let f = Field::zero(&g, 0.0);
        assert!(Trajectory::from_slices(&g, vec![0.0], vec![f.clone()]).is_err());
        assert!(Trajectory::from_slices(&g, vec![0.5, 1.0], vec![f.clone(), f.clone()]).is_err());
        assert!(Trajectory::from_slices(
            &g,
            vec![0.0, 0.1, 0.3],
            vec![f.clone(), f.clone(), f.clone()]
        )
        .is_err());
        assert!(
            Trajectory::from_slices(&g, vec![0.0, 0.1, 0.2], vec![f.clone(), f.clone(), f]).is_ok()
        );
    }

    #[test]
    fn free_trajectory_preserves_h1_and_gamma1() {
        let g = make_grid(80.0, 256).unwrap();
        let u0 = random_h1(&g, 2, 1.5, 40).unwrap();
        let traj = Trajectory::free(&u0, 0.4, 17).unwrap();
        let norms = kpv_norms(&traj);
        assert!((norms.gamma1 - 1.5).abs() < 1e-10);
        assert_eq!(norms.t_horizon, 0.4);
        assert!(norms.big_gamma >= norms.gamma1);
    }

    #[test]
    fn kpv_norms_are_one_homogeneous() {
        let g = make_grid(80.0, 256).unwrap();
        let u0 = random_h1(&g, 4, 1.0, 40).unwrap();
        let traj = Trajectory::free(&u0, 0.3, 9).unwrap();
        let twice = Trajectory::from_slices(
            &g,
            traj.times().to_vec(),
            traj.slices().iter().map(|s| s.scaled(2.0)).collect(),
        )
        .unwrap();
        let a = kpv_norms(&traj);
        let b = kpv_norms(&twice);
        assert!((b.gamma1 - 2.0 * a.gamma1).abs() < 1e-12 * a.gamma1.max(1.0));
        assert!((b.gamma2 - 2.0 * a.gamma2).abs() < 1e-12 * a.gamma2.max(1.0));
        assert!((b.gamma3 - 2.0 * a.gamma3).abs() < 1e-11 * a.gamma3.max(1.0));
        assert!((b.gamma4 - 2.0 * a.gamma4).abs() < 1e-12 * a.gamma4.max(1.0));
    }

    #[test]
    fn duhamel_of_a_free_trajectory_is_t_times_the_group() {
        // g(s) = S(s)v: the integrand S(t-s)g(s) = S(t)v is constant in s, so
        // the integral is exactly t S(t)v and the trapezoid rule is exact.
        let g = make_grid(80.0, 256).unwrap();
        let v = random_h1(&g, 8, 1.0, 40).unwrap();
        let traj = Trajectory::free(&v, 0.5, 21).unwrap();
        let phi = duhamel(&traj, 0.5).unwrap();
        for (i, &t) in traj.times().iter().enumerate() {
            let expect = airy_propagate(&v, t).scaled(t);
            let diff = phi.slices()[i].sub(&expect).unwrap().norms().linf;
            assert!(diff < 1e-12, "slice {i}: diff = {diff:.3e}");
        }
    }

    #[test]
    fn duhamel_horizon_must_match() {
        let g = make_grid(80.0, 128).unwrap();
        let v = gaussian(&g, 1.0, 2.0, 0.0).unwrap();
        let traj = Trajectory::free(&v, 0.5, 11).unwrap();
        assert!(duhamel(&traj, 0.4).is_err());
    }

    #[test]
    fn picard_map_fixes_small_data_to_the_free_flow() {
        let g = make_grid(80.0, 256).unwrap();
        let a = DampingProfile::zero(&g);
        let u0 = gaussian(&g, 1e-6, 2.0, 0.0).unwrap();
        let free = Trajectory::free(&u0, 0.05, 17).unwrap();
        let mapped = picard_map(&free, &u0, &a).unwrap();
        let d = mapped.sup_h1_distance(&free).unwrap();
        assert!(d < 1e-12, "distance = {d:.3e}");
    }

    #[test]
    fn picard_map_contracts_from_the_frozen_trajectory() {
        let g = make_grid(80.0, 512).unwrap();
        let a = make_damping(&g, DampingKind::RightStep, 1.0, 10.0, 4.0).unwrap();
        let u0 = soliton(&g, 1.0, -10.0).unwrap();
        let frozen = Trajectory::frozen(&u0, 0.05, 33).unwrap();
        let v1 = picard_map(&frozen, &u0, &a).unwrap();
        let v2 = picard_map(&v1, &u0, &a).unwrap();
        let v3 = picard_map(&v2, &u0, &a).unwrap();
        let d1 = v1.sup_h1_distance(&frozen).unwrap();
        let d2 = v2.sup_h1_distance(&v1).unwrap();
        let d3 = v3.sup_h1_distance(&v2).unwrap();
        assert!(d2 < 0.5 * d1, "d1 = {d1:.3e}, d2 = {d2:.3e}");
        assert!(d3 < 0.5 * d2, "d2 = {d2:.3e}, d3 = {d3:.3e}");
    }

    #[test]
    fn picard_solve_converges_with_a_decreasing_log() {
        let g = make_grid(80.0, 512).unwrap();
        let a = make_damping(&g, DampingKind::RightStep, 1.0, 10.0, 4.0).unwrap();
        let u0 = soliton(&g, 1.0, -10.0).unwrap();
        let (traj, log) = picard_solve(&u0, &a, 0.05, 33, 1e-8, 50).unwrap();
        assert_eq!(traj.n_t(), 33);
        assert!(*log.last().unwrap() < 1e-8);
        for w in log.windows(2) {
            assert!(w[1] < w[0], "distances must decrease: {log:?}");
        }
    }

    #[test]
    fn picard_solve_reports_non_convergence_with_its_trace() {
        let g = make_grid(80.0, 512).unwrap();
        let a = make_damping(&g, DampingKind::RightStep, 1.0, 10.0, 4.0).unwrap();
        let u0 = soliton(&g, 1.0, -10.0).unwrap();
        match picard_solve(&u0, &a, 0.05, 33, 1e-14, 2) {
            Err(KdvError::NonConvergence {
                iterations, log, ..
            }) => {
                assert_eq!(iterations, 2);
                assert_eq!(log.len(), 2);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn t_kappa_degenerate_case_matches_the_closed_form() {
        let report = t_kappa(0.0, 1.0, 2.0).unwrap();
        let exact = 1.0 / (8.0 * 2.0_f64.sqrt());
        assert!((report.t_kappa - exact).abs() < 1e-6);
        assert!(report.lhs_at_t >= 1.0 - 1e-5 && report.lhs_at_t < 1.0);
        assert_eq!(report.kappa, 0.0);
        assert!((report.c2 - 8.0 * (1.0 + 2.0_f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn t_kappa_with_both_norms_active() {
        let report = t_kappa(1.0, 1.0, 2.0).unwrap();
        assert!(
            report.t_kappa > 1.5e-4 && report.t_kappa < 1.8e-4,
            "t_kappa = {:.6e}",
            report.t_kappa
        );
        assert!(report.lhs_at_t >= 1.0 - 1e-5 && report.lhs_at_t < 1.0);
        assert_eq!(report.kappa, 4.0);
    }

    #[test]
    fn t_kappa_unconstrained_window_approaches_one() {
        let report = t_kappa(0.0, 0.0, 2.0).unwrap();
        assert!(report.t_kappa > 0.999);
        assert_eq!(report.lhs_at_t, 0.0);
    }

    #[test]
    fn t_kappa_validates_arguments() {
        assert!(t_kappa(1.0, 1.0, 1.0).is_err());
        assert!(t_kappa(-1.0, 1.0, 2.0).is_err());
        assert!(t_kappa(1.0, f64::NAN, 2.0).is_err());
    }
}
