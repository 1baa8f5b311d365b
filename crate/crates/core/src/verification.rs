//! Grid check of the equilibrium characterization: at every grid point the
//! enumerated equilibrium set is compared with what the thresholds predict.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{g_hat_at, phi_bar, pure_nash};
use crate::error::Result;
use crate::game::{ActionProfile, AssumptionReport, ModelParams};
use crate::sweep::SweepSpec;

/// Grid points this close to `g_hat` are not used for the iff-check.
pub const BOUNDARY_BAND: f64 = 1e-9;
const MAX_COUNTEREXAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Clause {
    /// (p,p) is always an equilibrium.
    #[serde(rename = "i")]
    PeaceAlways,
    /// (a,a) is an equilibrium whenever phi <= phi_bar.
    #[serde(rename = "ii")]
    WarBelowPhiBar,
    /// Between phi_bar and 1, (a,a) iff g <= g_hat(phi), with g_hat decreasing.
    #[serde(rename = "iii")]
    WarBelowGHat,
    /// At phi = 1, (p,p) is the only equilibrium.
    #[serde(rename = "iv")]
    PeaceUniqueAtOne,
    /// No asymmetric equilibrium.
    #[serde(rename = "v")]
    NoAsymmetric,
}

impl Clause {
    pub const ALL: [Clause; 5] = [
        Clause::PeaceAlways,
        Clause::WarBelowPhiBar,
        Clause::WarBelowGHat,
        Clause::PeaceUniqueAtOne,
        Clause::NoAsymmetric,
    ];

    pub fn numeral(self) -> &'static str {
        match self {
            Clause::PeaceAlways => "i",
            Clause::WarBelowPhiBar => "ii",
            Clause::WarBelowGHat => "iii",
            Clause::PeaceUniqueAtOne => "iv",
            Clause::NoAsymmetric => "v",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub g: Option<f64>,
    pub phi: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseResult {
    pub clause: Clause,
    pub checked: usize,
    pub failures: usize,
    /// First few failures only.
    pub counterexamples: Vec<Counterexample>,
}

impl ClauseResult {
    fn new(clause: Clause) -> Self {
        Self {
            clause,
            checked: 0,
            failures: 0,
            counterexamples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, ok: bool, g: Option<f64>, phi: f64, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(Counterexample {
                    g,
                    phi,
                    detail: detail(),
                });
            }
        }
    }

    fn merge(&mut self, other: ClauseResult) {
        self.checked += other.checked;
        self.failures += other.failures;
        let room = MAX_COUNTEREXAMPLES - self.counterexamples.len();
        self.counterexamples
            .extend(other.counterexamples.into_iter().take(room));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub applicable: bool,
    pub message: Option<String>,
    pub assumptions: AssumptionReport,
    pub phi_bar: f64,
    pub points_checked: usize,
    pub boundary_points: usize,
    pub clauses: Vec<ClauseResult>,
    pub notices: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.applicable && self.clauses.iter().all(ClauseResult::passed)
    }

    pub fn clause(&self, c: Clause) -> Option<&ClauseResult> {
        self.clauses.iter().find(|r| r.clause == c)
    }
}

fn fmt_set(set: &[ActionProfile]) -> String {
    let parts: Vec<String> = set.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Checks all five clauses on the grid. Points are evaluated in parallel;
/// the report does not depend on the number of workers.
pub fn verify_characterization(base: &ModelParams, spec: &SweepSpec) -> Result<VerificationReport> {
    let model = base.validate()?;
    let assumptions = model.check_assumptions()?;
    let pb = phi_bar(&model)?;
    let (spec, notices) = spec.normalized(model.l(), model.gbar())?;
    if !assumptions.all_hold() {
        return Ok(VerificationReport {
            applicable: false,
            message: Some(format!(
                "assumption(s) {} violated; the characterization is not applicable, clause checks skipped",
                assumptions.failed().join(", ")
            )),
            assumptions,
            phi_bar: pb,
            points_checked: 0,
            boundary_points: 0,
            clauses: Vec::new(),
            notices,
        });
    }

    let gs = spec.g.values();
    let phis = spec.phi.values();
    let thresholds: Vec<Option<Result<f64>>> = phis
        .par_iter()
        .map(|&phi| (pb < phi && phi < 1.0).then(|| g_hat_at(&model, phi)))
        .collect();

    let rows: Vec<([ClauseResult; 5], usize)> = phis
        .par_iter()
        .zip(thresholds.par_iter())
        .map(|(&phi, threshold)| -> Result<_> {
            let mut res = Clause::ALL.map(ClauseResult::new);
            let mut boundary = 0;
            let threshold = match threshold {
                Some(Ok(g)) => Some(*g),
                Some(Err(e)) => {
                    res[Clause::WarBelowGHat.slot()].record(false, None, phi, || {
                        format!("g_hat not found: {e}")
                    });
                    None
                }
                None => None,
            };
            for &g in &gs {
                let set = pure_nash(&model.at(g, phi)?).weak;
                let has = |p| set.contains(&p);
                res[Clause::PeaceAlways.slot()].record(has(ActionProfile::PP), Some(g), phi, || {
                    format!("(p,p) missing from {}", fmt_set(&set))
                });
                if phi <= pb && phi < 1.0 {
                    res[Clause::WarBelowPhiBar.slot()].record(
                        has(ActionProfile::AA),
                        Some(g),
                        phi,
                        || format!("phi <= phi_bar = {pb} but (a,a) missing from {}", fmt_set(&set)),
                    );
                }
                if let Some(gh) = threshold {
                    if (g - gh).abs() <= BOUNDARY_BAND {
                        boundary += 1;
                    } else {
                        let expect = g <= gh;
                        res[Clause::WarBelowGHat.slot()].record(
                            has(ActionProfile::AA) == expect,
                            Some(g),
                            phi,
                            || format!("g_hat = {gh}, expected (a,a) {expect}, got {}", fmt_set(&set)),
                        );
                    }
                }
                if phi == 1.0 {
                    res[Clause::PeaceUniqueAtOne.slot()].record(
                        set == [ActionProfile::PP],
                        Some(g),
                        phi,
                        || format!("expected {{(p,p)}}, got {}", fmt_set(&set)),
                    );
                }
                res[Clause::NoAsymmetric.slot()].record(
                    !set.iter().any(|p| p.is_asymmetric()),
                    Some(g),
                    phi,
                    || format!("asymmetric profile in {}", fmt_set(&set)),
                );
            }
            Ok((res, boundary))
        })
        .collect::<Result<_>>()?;

    let mut clauses = Clause::ALL.map(ClauseResult::new);
    let mut boundary_points = 0;
    for (res, b) in rows {
        boundary_points += b;
        for (acc, r) in clauses.iter_mut().zip(res) {
            acc.merge(r);
        }
    }

    // g_hat must fall as phi rises
    let curve: Vec<(f64, f64)> = phis
        .iter()
        .zip(&thresholds)
        .filter_map(|(&phi, t)| match t {
            Some(Ok(g)) => Some((phi, *g)),
            _ => None,
        })
        .collect();
    for w in curve.windows(2) {
        let ((phi0, g0), (phi1, g1)) = (w[0], w[1]);
        if phi1 > phi0 {
            clauses[Clause::WarBelowGHat.slot()].record(g1 < g0, None, phi1, || {
                format!("g_hat({phi1}) = {g1} not below g_hat({phi0}) = {g0}")
            });
        }
    }

    Ok(VerificationReport {
        applicable: true,
        message: None,
        assumptions,
        phi_bar: pb,
        points_checked: gs.len() * phis.len(),
        boundary_points,
        clauses: clauses.into(),
        notices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::p0;
    use crate::sweep::Axis;

    #[test]
    fn p0_grid_passes() {
        let spec = SweepSpec::new(Axis::new(0.701, 0.999, 60), Axis::new(0.0, 1.0, 60));
        let r = verify_characterization(&p0(), &spec).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert_eq!(r.points_checked, 3600);
        assert_eq!(r.clause(Clause::PeaceAlways).unwrap().checked, 3600);
        assert_eq!(r.clause(Clause::PeaceUniqueAtOne).unwrap().checked, 60);
    }

    #[test]
    fn phi_one_line_exercises_clause_iv() {
        let spec = SweepSpec::new(Axis::new(0.701, 0.999, 30), Axis::new(1.0, 1.0, 2));
        let r = verify_characterization(&p0(), &spec).unwrap();
        assert!(r.passed());
        assert_eq!(r.clause(Clause::PeaceUniqueAtOne).unwrap().checked, 60);
        assert_eq!(r.clause(Clause::WarBelowGHat).unwrap().checked, 0);
    }

    #[test]
    fn assumption_failure_skips_clauses() {
        let mut p = p0();
        p.c = 0.6;
        let spec = SweepSpec::new(Axis::new(0.701, 0.999, 10), Axis::new(0.0, 1.0, 10));
        let r = verify_characterization(&p, &spec).unwrap();
        assert!(!r.applicable);
        assert!(!r.passed());
        assert!(r.clauses.is_empty());
        assert!(r.message.unwrap().contains("1"));
    }

    #[test]
    fn minimal_grid() {
        let spec = SweepSpec::new(Axis::new(0.75, 0.95, 2), Axis::new(0.0, 1.0, 2));
        let r = verify_characterization(&p0(), &spec).unwrap();
        assert!(r.passed());
        assert_eq!(r.points_checked, 4);
    }

    #[test]
    fn counterexamples_are_capped() {
        let mut a = ClauseResult::new(Clause::NoAsymmetric);
        for i in 0..15 {
            a.record(false, Some(i as f64), 0.0, || "x".into());
        }
        let mut b = ClauseResult::new(Clause::NoAsymmetric);
        for _ in 0..15 {
            b.record(false, None, 0.5, || "y".into());
        }
        b.record(true, None, 0.5, || unreachable!());
        a.merge(b);
        assert_eq!(a.checked, 31);
        assert_eq!(a.failures, 30);
        assert_eq!(a.counterexamples.len(), MAX_COUNTEREXAMPLES);
        assert!(!a.passed());
    }
}
