//! Grids over the `(g, phi)` plane.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{g_hat_at, phi_bar, pure_nash, Regime, TIE_TOL};
use crate::error::{Error, Result};
use crate::game::{ActionProfile, ModelParams, ENDPOINT_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Self {
        Self { lo, hi, steps }
    }

    /// `steps` evenly spaced values, both ends included exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// Grid specification. `g` must lie in `[l, gbar]`; endpoints closer than
/// [`ENDPOINT_EPS`] to `l` or `gbar` are moved inwards by [`SweepSpec::normalized`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub g: Axis,
    pub phi: Axis,
}

impl SweepSpec {
    pub fn new(g: Axis, phi: Axis) -> Self {
        Self { g, phi }
    }

    pub fn points(&self) -> usize {
        self.g.steps * self.phi.steps
    }

    /// Checks the grid against `(l, gbar)` and shrinks open endpoints.
    /// Returns the adjusted spec and one notice per adjustment.
    pub fn normalized(&self, l: f64, gbar: f64) -> Result<(SweepSpec, Vec<String>)> {
        let domain = |name: &'static str, value: f64, reason: &'static str| {
            Err(Error::ParameterDomain {
                name,
                value,
                reason,
            })
        };
        for (name, axis) in [("sweep.g.steps", self.g), ("sweep.phi.steps", self.phi)] {
            if axis.steps < 2 {
                return domain(name, axis.steps as f64, "need at least 2 steps per axis");
            }
        }
        let (g, phi) = (self.g, self.phi);
        if !(g.lo <= g.hi) {
            return domain("sweep.g.lo", g.lo, "lo must not exceed hi");
        }
        if !(phi.lo <= phi.hi) {
            return domain("sweep.phi.lo", phi.lo, "lo must not exceed hi");
        }
        if g.lo < l {
            return domain("sweep.g.lo", g.lo, "below l");
        }
        if g.hi > gbar {
            return domain("sweep.g.hi", g.hi, "above gbar");
        }
        if phi.lo < 0.0 {
            return domain("sweep.phi.lo", phi.lo, "below 0");
        }
        if phi.hi > 1.0 {
            return domain("sweep.phi.hi", phi.hi, "above 1");
        }
        let mut notices = Vec::new();
        let mut out = *self;
        let (lo_min, hi_max) = (l + ENDPOINT_EPS, gbar - ENDPOINT_EPS);
        for v in [&mut out.g.lo, &mut out.g.hi] {
            let shrunk = v.clamp(lo_min, hi_max);
            if shrunk != *v {
                notices.push(format!("g endpoint {v} moved to {shrunk} (open interval)"));
                *v = shrunk;
            }
        }
        if out.g.lo > out.g.hi {
            return domain("sweep.g", g.lo, "range empty after shrinking");
        }
        Ok((out, notices))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub g: f64,
    pub phi: f64,
    pub d: f64,
    pub eq_pp: bool,
    pub eq_aa: bool,
    pub regime: Option<Regime>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub phi: f64,
    pub g_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// phi-major, then g.
    pub rows: Vec<SweepRow>,
    pub phi_bar: f64,
    /// `g_hat` for each grid phi strictly between `phi_bar` and 1.
    pub boundary: Vec<BoundaryPoint>,
    pub assumptions_hold: bool,
    pub notices: Vec<String>,
}

impl SweepResult {
    pub fn boundary_strictly_decreasing(&self) -> bool {
        self.boundary.windows(2).all(|w| w[1].phi <= w[0].phi || w[1].g_hat < w[0].g_hat)
    }
}

/// Evaluates every grid point of `spec` with the other parameters of `base`.
pub fn run_sweep(base: &ModelParams, spec: &SweepSpec) -> Result<SweepResult> {
    let model = base.validate()?;
    let (spec, notices) = spec.normalized(model.l(), model.gbar())?;
    let assumptions_hold = model.check_assumptions()?.all_hold();
    let pb = phi_bar(&model)?;
    let gs = spec.g.values();
    let phis = spec.phi.values();

    let points: Vec<(f64, f64)> = phis
        .iter()
        .flat_map(|&phi| gs.iter().map(move |&g| (g, phi)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(g, phi)| {
            let m = model.at(g, phi)?;
            let set = pure_nash(&m);
            let on_edge = assumptions_hold && phi < 1.0 && (phi - pb).abs() <= TIE_TOL;
            Ok(SweepRow {
                g,
                phi,
                d: m.tolerance_gap(),
                eq_pp: set.contains(ActionProfile::PP),
                eq_aa: set.contains(ActionProfile::AA),
                regime: set.regime(on_edge),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let boundary = phis
        .par_iter()
        .filter(|&&phi| pb < phi && phi < 1.0)
        .filter_map(|&phi| g_hat_at(&model, phi).ok().map(|g_hat| BoundaryPoint { phi, g_hat }))
        .collect();

    Ok(SweepResult {
        spec,
        rows,
        phi_bar: pb,
        boundary,
        assumptions_hold,
        notices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::p0;
    use approx::assert_abs_diff_eq;

    #[test]
    fn axis_values_hit_both_ends() {
        let v = Axis::new(0.0, 1.0, 200).values();
        assert_eq!(v.len(), 200);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[199], 1.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(Axis::new(1.0, 1.0, 3).values(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn normalized_shrinks_open_ends() {
        let s = SweepSpec::new(Axis::new(0.7, 1.0, 5), Axis::new(0.0, 1.0, 5));
        let (n, notices) = s.normalized(0.7, 1.0).unwrap();
        assert_eq!(notices.len(), 2);
        assert_eq!(n.g.lo, 0.7 + ENDPOINT_EPS);
        assert_eq!(n.g.hi, 1.0 - ENDPOINT_EPS);
        assert_eq!(n.phi, s.phi);
    }

    #[test]
    fn normalized_rejects_bad_grids() {
        let bad = [
            SweepSpec::new(Axis::new(0.6, 1.0, 5), Axis::new(0.0, 1.0, 5)),
            SweepSpec::new(Axis::new(0.8, 1.1, 5), Axis::new(0.0, 1.0, 5)),
            SweepSpec::new(Axis::new(0.8, 0.9, 1), Axis::new(0.0, 1.0, 5)),
            SweepSpec::new(Axis::new(0.8, 0.9, 5), Axis::new(-0.1, 1.0, 5)),
            SweepSpec::new(Axis::new(0.8, 0.9, 5), Axis::new(0.0, 1.5, 5)),
            SweepSpec::new(Axis::new(0.9, 0.8, 5), Axis::new(0.0, 1.0, 5)),
        ];
        for s in bad {
            assert!(s.normalized(0.7, 1.0).is_err(), "{s:?}");
        }
    }

    #[test]
    fn sweep_p0_50x50() {
        let spec = SweepSpec::new(Axis::new(0.7, 1.0, 50), Axis::new(0.0, 1.0, 50));
        let r = run_sweep(&p0(), &spec).unwrap();
        assert_eq!(r.rows.len(), 2500);
        assert!(r.rows.iter().all(|row| row.eq_pp));
        assert!(r.assumptions_hold);
        assert!(r.boundary_strictly_decreasing());
        // phi-major ordering
        assert_eq!(r.rows[0].phi, 0.0);
        assert_eq!(r.rows[49].phi, 0.0);
        assert!(r.rows[50].phi > 0.0);
        assert!(r.rows[1].g > r.rows[0].g);
    }

    #[test]
    fn sweep_boundary_values() {
        let spec = SweepSpec::new(Axis::new(0.75, 0.95, 3), Axis::new(0.2, 0.55, 2));
        let r = run_sweep(&p0(), &spec).unwrap();
        assert_eq!(r.boundary.len(), 2);
        assert_abs_diff_eq!(r.boundary[0].g_hat, 0.9312707, epsilon = 1e-6);
        assert_abs_diff_eq!(r.boundary[1].g_hat, 0.794743, epsilon = 1e-6);
    }

    #[test]
    fn sweep_phi_one_is_peace_unique() {
        let spec = SweepSpec::new(Axis::new(0.7, 1.0, 20), Axis::new(1.0, 1.0, 2));
        let r = run_sweep(&p0(), &spec).unwrap();
        assert!(r.rows.iter().all(|row| row.regime == Some(Regime::PeaceUnique)));
        assert!(r.boundary.is_empty());
    }
}
