//! Damping coefficients a(x) and initial-data constructors.
//!
//! All damping shapes are built from the C² quintic smoothstep
//! `Q(y) = 6y⁵ − 15y⁴ + 10y³` (clamped to 0 below 0 and 1 above 1), so their
//! first two derivatives are available in closed form and the W²,∞ norm is
//! exact rather than sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Serialize};

use crate::error::{KdvError, Result};
use crate::grid::{Field, Grid};

/// Quintic smoothstep and its first two derivatives.
fn q(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        ((6.0 * y - 15.0) * y + 10.0) * y * y * y
    }
}

fn q_d1(y: f64) -> f64 {
    if !(0.0..=1.0).contains(&y) {
        0.0
    } else {
        30.0 * y * y * (y - 1.0) * (y - 1.0)
    }
}

fn q_d2(y: f64) -> f64 {
    if !(0.0..=1.0).contains(&y) {
        0.0
    } else {
        60.0 * y * (2.0 * y - 1.0) * (y - 1.0)
    }
}

/// Shape family of a damping coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingKind {
    Constant,
    RightStep,
    LeftStep,
    Sponge,
}

/// The parameters a profile was built from; also what run manifests echo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingSpec {
    pub kind: DampingKind,
    pub alpha0: f64,
    /// Activation abscissa (unused by `constant`).
    pub r1: f64,
    /// Transition width (unused by `constant`).
    pub width: f64,
}

/// A damping coefficient with exact derivatives and W²,∞ norm.
#[derive(Clone, Debug)]
pub struct DampingProfile {
    grid: Grid,
    spec: DampingSpec,
    a: Vec<f64>,
    a_x: Vec<f64>,
    a_xx: Vec<f64>,
    w2inf_norm: f64,
}

impl DampingProfile {
    /// The identically-zero coefficient (undamped runs).
    ///
    /// Kept apart from [`make_damping`], which demands `alpha0 > 0`.
    pub fn zero(grid: &Grid) -> Self {
        let n = grid.n();
        Self {
            grid: grid.clone(),
            spec: DampingSpec {
                kind: DampingKind::Constant,
                alpha0: 0.0,
                r1: 0.0,
                width: 0.0,
            },
            a: vec![0.0; n],
            a_x: vec![0.0; n],
            a_xx: vec![0.0; n],
            w2inf_norm: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &DampingSpec {
        &self.spec
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_x(&self) -> &[f64] {
        &self.a_x
    }

    pub fn a_xx(&self) -> &[f64] {
        &self.a_xx
    }

    /// `max(‖a‖∞, ‖a_x‖∞, ‖a_xx‖∞)` from the closed-form extrema of Q.
    pub fn w2inf_norm(&self) -> f64 {
        self.w2inf_norm
    }

    pub fn is_zero(&self) -> bool {
        self.spec.alpha0 == 0.0
    }
}

/// W²,∞ norm of a single smoothstep transition of height `alpha0` over `width`:
/// sup|Q′| = 15/8 and sup|Q″| = 10/√3 on the unit interval.
fn step_w2inf(alpha0: f64, width: f64) -> f64 {
    let d1 = 15.0 / (8.0 * width);
    let d2 = 10.0 / (3.0_f64.sqrt() * width * width);
    alpha0 * 1.0_f64.max(d1).max(d2)
}

/// Builds a damping coefficient on the grid.
///
/// `constant` ignores `r1` and `width`. `right_step` rises from 0 to `alpha0`
/// over `[r1 − width, r1]` and stays at `alpha0` beyond; `left_step` mirrors
/// it, staying at `alpha0` up to `r1` and falling to 0 over `[r1, r1 + width]`.
/// `sponge` is a right step at `+r1` plus a left step at `−r1`: active near
/// both box edges, zero on the interior window.
pub fn make_damping(
    grid: &Grid,
    kind: DampingKind,
    alpha0: f64,
    r1: f64,
    width: f64,
) -> Result<DampingProfile> {
    if !(alpha0.is_finite() && alpha0 > 0.0) {
        return Err(KdvError::InvalidParameter(format!(
            "alpha0 must be positive, got {alpha0}"
        )));
    }
    let half = grid.box_length() / 2.0;
    if kind != DampingKind::Constant {
        if !(width.is_finite() && width > 0.0) {
            return Err(KdvError::InvalidParameter(format!(
                "width must be positive for {kind:?}, got {width}"
            )));
        }
        match kind {
            DampingKind::RightStep => {
                if r1 - width < -half {
                    return Err(KdvError::InvalidParameter(
                        "right_step transition foot lies outside the box".into(),
                    ));
                }
                if r1 >= half {
                    return Err(KdvError::InvalidParameter(
                        "right_step active region overflows the box".into(),
                    ));
                }
            }
            DampingKind::LeftStep => {
                if r1 + width > half {
                    return Err(KdvError::InvalidParameter(
                        "left_step transition foot lies outside the box".into(),
                    ));
                }
                if r1 <= -half {
                    return Err(KdvError::InvalidParameter(
                        "left_step active region overflows the box".into(),
                    ));
                }
            }
            DampingKind::Sponge => {
                if r1 >= half {
                    return Err(KdvError::InvalidParameter(
                        "sponge active region overflows the box".into(),
                    ));
                }
                if r1 <= width {
                    return Err(KdvError::InvalidParameter(
                        "sponge interior window is empty (need r1 > width)".into(),
                    ));
                }
            }
            DampingKind::Constant => unreachable!(),
        }
    }

    let n = grid.n();
    let mut a = vec![0.0; n];
    let mut a_x = vec![0.0; n];
    let mut a_xx = vec![0.0; n];
    let w2inf_norm;
    match kind {
        DampingKind::Constant => {
            a.fill(alpha0);
            w2inf_norm = alpha0;
        }
        DampingKind::RightStep => {
            for (j, &x) in grid.nodes().iter().enumerate() {
                let y = (x - (r1 - width)) / width;
                a[j] = alpha0 * q(y);
                a_x[j] = alpha0 * q_d1(y) / width;
                a_xx[j] = alpha0 * q_d2(y) / (width * width);
            }
            w2inf_norm = step_w2inf(alpha0, width);
        }
        DampingKind::LeftStep => {
            for (j, &x) in grid.nodes().iter().enumerate() {
                let y = ((r1 + width) - x) / width;
                a[j] = alpha0 * q(y);
                a_x[j] = -alpha0 * q_d1(y) / width;
                a_xx[j] = alpha0 * q_d2(y) / (width * width);
            }
            w2inf_norm = step_w2inf(alpha0, width);
        }
        DampingKind::Sponge => {
            for (j, &x) in grid.nodes().iter().enumerate() {
                let yr = (x - (r1 - width)) / width;
                let yl = ((-r1 + width) - x) / width;
                a[j] = alpha0 * (q(yr) + q(yl));
                a_x[j] = alpha0 * (q_d1(yr) - q_d1(yl)) / width;
                a_xx[j] = alpha0 * (q_d2(yr) + q_d2(yl)) / (width * width);
            }
            // The two transitions have disjoint supports, so extrema agree
            // with the single-step ones.
            w2inf_norm = step_w2inf(alpha0, width);
        }
    }
    let spec = DampingSpec {
        kind,
        alpha0,
        r1: if kind == DampingKind::Constant {
            0.0
        } else {
            r1
        },
        width: if kind == DampingKind::Constant {
            0.0
        } else {
            width
        },
    };
    Ok(DampingProfile {
        grid: grid.clone(),
        spec,
        a,
        a_x,
        a_xx,
        w2inf_norm,
    })
}

/// Solitary wave `3c·sech²(√c·(x − x0)/2)`; travels at speed `c` under the
/// undamped flow.
pub fn soliton(grid: &Grid, c: f64, x0: f64) -> Result<Field> {
    if !(c.is_finite() && c > 0.0) {
        return Err(KdvError::InvalidParameter(format!(
            "soliton speed must be positive, got {c}"
        )));
    }
    let half_root_c = 0.5 * c.sqrt();
    Ok(Field::from_fn(grid, 0.0, |x| {
        let s = 1.0 / ((half_root_c * (x - x0)).cosh());
        3.0 * c * s * s
    }))
}

/// `amplitude · exp(−(x − x0)² / (2σ²))`.
pub fn gaussian(grid: &Grid, amplitude: f64, sigma: f64, x0: f64) -> Result<Field> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(KdvError::InvalidParameter(format!(
            "gaussian sigma must be positive, got {sigma}"
        )));
    }
    if !amplitude.is_finite() {
        return Err(KdvError::InvalidParameter(
            "gaussian amplitude must be finite".into(),
        ));
    }
    Ok(Field::from_fn(grid, 0.0, |x| {
        let z = (x - x0) / sigma;
        amplitude * (-0.5 * z * z).exp()
    }))
}

/// Band-limited random field with `‖u‖_{H¹}` scaled exactly to `target_h1`.
///
/// Draws cosine/sine amplitudes for modes `1..=band` from a ChaCha8 stream,
/// so the result is reproducible for a fixed (seed, grid, band) triple.
pub fn random_h1(grid: &Grid, seed: u64, target_h1: f64, band: usize) -> Result<Field> {
    if !(target_h1.is_finite() && target_h1 > 0.0) {
        return Err(KdvError::InvalidParameter(format!(
            "target_h1 must be positive, got {target_h1}"
        )));
    }
    if band == 0 || band > grid.n() / 3 {
        return Err(KdvError::InvalidParameter(format!(
            "band must lie in 1..={} (n/3), got {band}",
            grid.n() / 3
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (0..band)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let k1 = 2.0 * std::f64::consts::PI / grid.box_length();
    let mut samples = vec![0.0; grid.n()];
    for (j, &x) in grid.nodes().iter().enumerate() {
        let mut s = 0.0;
        for (m, &(ac, as_)) in coeffs.iter().enumerate() {
            let phase = k1 * (m + 1) as f64 * x;
            s += ac * phase.cos() + as_ * phase.sin();
        }
        samples[j] = s;
    }
    let raw = Field::new(grid, samples, 0.0)?;
    let h1 = raw.norms().h1_sq.sqrt();
    if h1 == 0.0 {
        return Err(KdvError::InvalidParameter(
            "degenerate random draw with zero norm".into(),
        ));
    }
    Ok(raw.scaled(target_h1 / h1))
}

/// Declarative description of initial data; the JSON form is tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDataSpec {
    Soliton {
        c: f64,
        x0: f64,
    },
    Gaussian {
        amplitude: f64,
        sigma: f64,
        x0: f64,
    },
    RandomH1 {
        seed: u64,
        target_h1: f64,
        band: usize,
    },
}

// Hand-rolled deserializer: internally tagged enums cannot reject unknown
// fields on their own, and configs must fail closed.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitialData {
    kind: String,
    c: Option<f64>,
    x0: Option<f64>,
    amplitude: Option<f64>,
    sigma: Option<f64>,
    seed: Option<u64>,
    target_h1: Option<f64>,
    band: Option<usize>,
}

impl<'de> Deserialize<'de> for InitialDataSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInitialData::deserialize(d)?;
        fn need<T, E: serde::de::Error>(
            v: Option<T>,
            kind: &str,
            name: &str,
        ) -> std::result::Result<T, E> {
            v.ok_or_else(|| E::custom(format!("{kind} initial data requires field `{name}`")))
        }
        fn forbid<T, E: serde::de::Error>(
            v: &Option<T>,
            kind: &str,
            name: &str,
        ) -> std::result::Result<(), E> {
            if v.is_some() {
                Err(E::custom(format!(
                    "field `{name}` does not apply to {kind} initial data"
                )))
            } else {
                Ok(())
            }
        }
        match raw.kind.as_str() {
            "soliton" => {
                forbid(&raw.amplitude, "soliton", "amplitude")?;
                forbid(&raw.sigma, "soliton", "sigma")?;
                forbid(&raw.seed, "soliton", "seed")?;
                forbid(&raw.target_h1, "soliton", "target_h1")?;
                forbid(&raw.band, "soliton", "band")?;
                Ok(InitialDataSpec::Soliton {
                    c: need(raw.c, "soliton", "c")?,
                    x0: raw.x0.unwrap_or(0.0),
                })
            }
            "gaussian" => {
                forbid(&raw.c, "gaussian", "c")?;
                forbid(&raw.seed, "gaussian", "seed")?;
                forbid(&raw.target_h1, "gaussian", "target_h1")?;
                forbid(&raw.band, "gaussian", "band")?;
                Ok(InitialDataSpec::Gaussian {
                    amplitude: need(raw.amplitude, "gaussian", "amplitude")?,
                    sigma: need(raw.sigma, "gaussian", "sigma")?,
                    x0: raw.x0.unwrap_or(0.0),
                })
            }
            "random_h1" => {
                forbid(&raw.c, "random_h1", "c")?;
                forbid(&raw.x0, "random_h1", "x0")?;
                forbid(&raw.amplitude, "random_h1", "amplitude")?;
                forbid(&raw.sigma, "random_h1", "sigma")?;
                Ok(InitialDataSpec::RandomH1 {
                    seed: need(raw.seed, "random_h1", "seed")?,
                    target_h1: need(raw.target_h1, "random_h1", "target_h1")?,
                    band: need(raw.band, "random_h1", "band")?,
                })
            }
            other => Err(D::Error::custom(format!(
                "unknown initial data kind `{other}` (expected soliton, gaussian, or random_h1)"
            ))),
        }
    }
}

/// Samples the described initial data on a grid.
pub fn realize(spec: &InitialDataSpec, grid: &Grid) -> Result<Field> {
    match *spec {
        InitialDataSpec::Soliton { c, x0 } => soliton(grid, c, x0),
        InitialDataSpec::Gaussian {
            amplitude,
            sigma,
            x0,
        } => gaussian(grid, amplitude, sigma, x0),
        InitialDataSpec::RandomH1 {
            seed,
            target_h1,
            band,
        } => random_h1(grid, seed, target_h1, band),
    }
}
