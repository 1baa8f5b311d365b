//! Pure-strategy Nash equilibria of the 2×2 attack game and the two
//! thresholds that partition the `(g, phi)` plane.
//!
//! Best responses are computed from closed-form payoff differences rather
//! than from the [`PayoffTable`](crate::game::PayoffTable), so the table can
//! serve as an independent check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::MonotoneFunction;
use crate::game::{Action, ActionProfile, AssumptionReport, Model, PayoffTable};

/// Payoff differences at or below this magnitude are treated as ties.
pub const TIE_TOL: f64 = 1e-12;
/// Stopping width of the bisection for `g_hat`.
pub const G_HAT_TOL: f64 = 1e-10;
pub const G_HAT_MAX_ITER: usize = 200;
/// Largest accepted `|D(g_hat)|`.
pub const G_HAT_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    PeaceUnique,
    PeaceAndWar,
    KnifeEdge,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::PeaceUnique => "PeaceUnique",
            Regime::PeaceAndWar => "PeaceAndWar",
            Regime::KnifeEdge => "KnifeEdge",
        }
    }
}

/// A best-response comparison that came out as an exact tie, or a point on
/// the `phi_bar` line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tie {
    GovAgainstAttack,
    GovAgainstPeace,
    RebAgainstAttack,
    RebAgainstPeace,
    PhiAtThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    /// `None` when both actions give the same payoff.
    pub action: Option<Action>,
    /// Payoff of the better action minus the other, never negative.
    pub margin: f64,
}

impl BestResponse {
    fn from_peace_advantage(adv: f64) -> Self {
        let action = if adv.abs() <= TIE_TOL {
            None
        } else if adv > 0.0 {
            Some(Action::Peace)
        } else {
            Some(Action::Attack)
        };
        Self {
            action,
            margin: adv.abs(),
        }
    }

    pub fn is_tie(&self) -> bool {
        self.action.is_none()
    }
}

/// Government payoff of peace minus attack, given the rebels' action.
fn gov_peace_advantage(m: &Model, rebels: Action) -> f64 {
    let (z, w) = (m.z(), m.w());
    let (g, l, c, phi) = (m.g(), m.l(), m.c(), m.phi());
    match rebels {
        // pi(p,p) - pi(a,p)
        Action::Peace => z.eval(g) - (1.0 - phi) * (1.0 - w.eval(g)) * z.eval(g + l) + c,
        // pi(p,a) - pi(a,a) = D
        Action::Attack => m.tolerance_gap(),
    }
}

/// Rebel payoff of peace minus attack, given the government's action.
fn reb_peace_advantage(m: &Model, gov: Action) -> f64 {
    let (z, w) = (m.z(), m.w());
    let (g, l, c, phi) = (m.g(), m.l(), m.c(), m.phi());
    match gov {
        // rho(p,p) - rho(p,a)
        Action::Peace => c - (z.eval(g) - z.eval(g - l)),
        // rho(a,p) - rho(a,a)
        Action::Attack => -(1.0 - phi) * (1.0 - w.eval(g)) * (z.eval(g + l) - z.eval(g)),
    }
}

pub fn best_response_gov(m: &Model, rebels: Action) -> BestResponse {
    BestResponse::from_peace_advantage(gov_peace_advantage(m, rebels))
}

pub fn best_response_reb(m: &Model, gov: Action) -> BestResponse {
    BestResponse::from_peace_advantage(reb_peace_advantage(m, gov))
}

/// Equilibrium sets under weak and strict deviation criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct NashSet {
    /// No player has a deviation gaining more than [`TIE_TOL`].
    pub weak: Vec<ActionProfile>,
    /// Every deviation loses more than [`TIE_TOL`].
    pub strict: Vec<ActionProfile>,
    pub ties: Vec<Tie>,
}

impl NashSet {
    pub fn contains(&self, p: ActionProfile) -> bool {
        self.weak.contains(&p)
    }

    /// Regime label implied by the set. `None` when the set does not fit
    /// any label (no peace equilibrium, or an asymmetric one).
    pub fn regime(&self, on_phi_bar: bool) -> Option<Regime> {
        if !self.contains(ActionProfile::PP) || self.weak.iter().any(|p| p.is_asymmetric()) {
            None
        } else if self.weak != self.strict || on_phi_bar {
            Some(Regime::KnifeEdge)
        } else if self.contains(ActionProfile::AA) {
            Some(Regime::PeaceAndWar)
        } else {
            Some(Regime::PeaceUnique)
        }
    }
}

pub fn pure_nash(m: &Model) -> NashSet {
    let gov_adv = [Action::Attack, Action::Peace].map(|r| gov_peace_advantage(m, r));
    let reb_adv = [Action::Attack, Action::Peace].map(|g| reb_peace_advantage(m, g));
    let idx = |a: Action| match a {
        Action::Attack => 0,
        Action::Peace => 1,
    };
    // gain from switching away from `own`, given peace advantage `adv`
    let gain = |own: Action, adv: f64| match own {
        Action::Peace => -adv,
        Action::Attack => adv,
    };
    let mut weak = Vec::new();
    let mut strict = Vec::new();
    for p in ActionProfile::ALL {
        let gov_gain = gain(p.gov, gov_adv[idx(p.reb)]);
        let reb_gain = gain(p.reb, reb_adv[idx(p.gov)]);
        if gov_gain <= TIE_TOL && reb_gain <= TIE_TOL {
            weak.push(p);
        }
        if gov_gain < -TIE_TOL && reb_gain < -TIE_TOL {
            strict.push(p);
        }
    }
    let mut ties = Vec::new();
    let flags = [
        (gov_adv[0], Tie::GovAgainstAttack),
        (gov_adv[1], Tie::GovAgainstPeace),
        (reb_adv[0], Tie::RebAgainstAttack),
        (reb_adv[1], Tie::RebAgainstPeace),
    ];
    for (adv, tie) in flags {
        if adv.abs() <= TIE_TOL {
            ties.push(tie);
        }
    }
    NashSet { weak, strict, ties }
}

fn on_phi_bar(phi: f64, phi_bar: f64, assumptions_hold: bool) -> bool {
    assumptions_hold && phi < 1.0 && (phi - phi_bar).abs() <= TIE_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub equilibria: Vec<ActionProfile>,
    pub regime: Option<Regime>,
    pub d_value: f64,
    pub phi_bar: f64,
    pub g_hat: Option<f64>,
    pub ties: Vec<Tie>,
    pub payoffs: PayoffTable,
    pub assumptions: AssumptionReport,
    pub warnings: Vec<String>,
}

/// All weak pure-strategy equilibria plus the threshold context.
pub fn enumerate_pure_nash(m: &Model) -> Result<EquilibriumReport> {
    let assumptions = m.check_assumptions()?;
    let mut warnings = Vec::new();
    if !assumptions.all_hold() {
        warnings.push(format!(
            "assumption(s) {} fail; equilibrium characterization does not apply",
            assumptions.failed().join(", ")
        ));
    }
    let pb = phi_bar(m)?;
    if pb <= 0.0 {
        warnings.push(format!("phi_bar = {pb} <= 0: no phi admits war at every g"));
    }
    let phi = m.phi();
    let g_hat = if pb < phi && phi < 1.0 {
        match g_hat(m) {
            Ok(g) => Some(g),
            Err(e) => {
                warnings.push(format!("g_hat unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };
    let set = pure_nash(m);
    let on_edge = on_phi_bar(phi, pb, assumptions.all_hold());
    let mut ties = set.ties.clone();
    if on_edge {
        ties.push(Tie::PhiAtThreshold);
    }
    Ok(EquilibriumReport {
        regime: set.regime(on_edge),
        equilibria: set.weak,
        d_value: m.tolerance_gap(),
        phi_bar: pb,
        g_hat,
        ties,
        payoffs: m.payoff_table(),
        assumptions,
        warnings,
    })
}

/// `phi_bar = 1 - Z(gbar - l) / (1 - W(gbar))`.
pub fn phi_bar(m: &Model) -> Result<f64> {
    let denom = 1.0 - m.w().eval(m.gbar());
    if denom <= 0.0 {
        return Err(Error::DivisionDomain(denom));
    }
    Ok(1.0 - m.z().eval(m.gbar() - m.l()) / denom)
}

/// Root of `D(g) = 0` on `(l, gbar)` at the model's `phi`.
pub fn g_hat(m: &Model) -> Result<f64> {
    g_hat_at(m, m.phi())
}

pub fn g_hat_at(m: &Model, phi: f64) -> Result<f64> {
    let pb = phi_bar(m)?;
    if !(pb < phi && phi < 1.0) {
        return Err(Error::ThresholdDomain { phi, phi_bar: pb });
    }
    let d = |g: f64| m.tolerance_gap_at(g, phi);
    let (lo, hi) = (m.l(), m.gbar());
    let (d_lo, d_hi) = (d(lo), d(hi));
    if !(d_lo < 0.0 && d_hi > 0.0) {
        return Err(Error::Bracketing { d_lo, d_hi });
    }
    let (root, iterations) = bisect(d, lo, hi, G_HAT_TOL, G_HAT_MAX_ITER);
    let residual = d(root);
    if residual.abs() > G_HAT_RESIDUAL {
        return Err(Error::NoConvergence {
            residual,
            iterations,
        });
    }
    Ok(root)
}

/// Bisection for increasing `f` with `f(lo) < 0 < f(hi)`. Returns the final
/// midpoint and the number of halvings.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> (f64, usize) {
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return (mid, iterations + 1);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    (0.5 * (lo + hi), iterations)
}

/// Regime from the thresholds alone (`phi` against `phi_bar`, `g` against
/// `g_hat`), without enumerating profiles.
pub fn classify_regime(m: &Model) -> Result<Regime> {
    let report = m.check_assumptions()?;
    if !report.all_hold() {
        return Err(Error::ClassificationUnsupported(format!(
            "assumption(s) {} fail",
            report.failed().join(", ")
        )));
    }
    let phi = m.phi();
    if phi == 1.0 {
        return Ok(Regime::PeaceUnique);
    }
    let pb = phi_bar(m)?;
    if on_phi_bar(phi, pb, true) {
        return Ok(Regime::KnifeEdge);
    }
    if phi < pb {
        return Ok(Regime::PeaceAndWar);
    }
    if m.tolerance_gap().abs() <= TIE_TOL {
        return Ok(Regime::KnifeEdge);
    }
    let threshold = g_hat(m)?;
    Ok(if m.g() <= threshold {
        Regime::PeaceAndWar
    } else {
        Regime::PeaceUnique
    })
}
