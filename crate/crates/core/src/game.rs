//! Model parameters, the assumption checks and the expected-payoff table of
//! the government/rebel attack game.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result, Violation};
use crate::functions::{sup_ratio_k, Curve, Direction, MonotoneFunction};

/// Half-width of the excluded band at each end of the open interval `(l, gbar)`.
pub const ENDPOINT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Attack,
    Peace,
}

impl Action {
    pub fn other(self) -> Self {
        match self {
            Action::Attack => Action::Peace,
            Action::Peace => Action::Attack,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Action::Attack => 'a',
            Action::Peace => 'p',
        }
    }
}

/// (government action, rebel action).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile {
    pub gov: Action,
    pub reb: Action,
}

impl ActionProfile {
    pub const AA: Self = Self::new(Action::Attack, Action::Attack);
    pub const AP: Self = Self::new(Action::Attack, Action::Peace);
    pub const PA: Self = Self::new(Action::Peace, Action::Attack);
    pub const PP: Self = Self::new(Action::Peace, Action::Peace);
    pub const ALL: [Self; 4] = [Self::AA, Self::AP, Self::PA, Self::PP];

    pub const fn new(gov: Action, reb: Action) -> Self {
        Self { gov, reb }
    }

    pub fn any_attack(self) -> bool {
        self.gov == Action::Attack || self.reb == Action::Attack
    }

    pub fn is_asymmetric(self) -> bool {
        self.gov != self.reb
    }

    fn index(self) -> usize {
        match (self.gov, self.reb) {
            (Action::Attack, Action::Attack) => 0,
            (Action::Attack, Action::Peace) => 1,
            (Action::Peace, Action::Attack) => 2,
            (Action::Peace, Action::Peace) => 3,
        }
    }

    /// Two-letter code such as `"ap"`.
    pub fn code(self) -> String {
        format!("{}{}", self.gov.letter(), self.reb.letter())
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.gov.letter(), self.reb.letter())
    }
}

impl Serialize for ActionProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.code())
    }
}

impl FromStr for ActionProfile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "aa" => Ok(Self::AA),
            "ap" => Ok(Self::AP),
            "pa" => Ok(Self::PA),
            "pp" => Ok(Self::PP),
            other => Err(format!("unknown profile `{other}`, expected aa, ap, pa or pp")),
        }
    }
}

/// Raw parameter vector. Turn it into a [`Model`] with [`ModelParams::validate`]
/// before computing anything.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    pub z: Curve,
    pub w: Curve,
    pub l: f64,
    pub c: f64,
    pub phi: f64,
    pub g: f64,
}

impl ModelParams {
    pub fn with_point(&self, g: f64, phi: f64) -> Self {
        Self {
            g,
            phi,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<Model> {
        validate_params(self)
    }
}

/// Checks every invariant and reports each broken one.
pub fn validate_params(p: &ModelParams) -> Result<Model> {
    let mut v = Vec::new();
    for (key, value) in [("l", p.l), ("c", p.c), ("phi", p.phi), ("g", p.g)] {
        if !value.is_finite() {
            v.push(Violation::NotFinite { key, value });
        }
    }
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    check_role(&p.z, "z", Direction::Increasing, (0.0, 1.0), &mut v);
    check_role(&p.w, "w", Direction::Decreasing, (1.0, 0.0), &mut v);
    let gbar = p.z.upper();
    let a = p.w.upper();
    if a <= gbar {
        v.push(Violation::InterventionZeroPoint { a, gbar });
    }
    if p.l <= 0.0 {
        v.push(Violation::DamageNotPositive { l: p.l });
    }
    if p.l >= gbar {
        v.push(Violation::DamageNotBelowCap { l: p.l, gbar });
    }
    if p.g < p.l + ENDPOINT_EPS || p.g > gbar - ENDPOINT_EPS {
        v.push(Violation::GovernmentResources {
            g: p.g,
            l: p.l,
            gbar,
        });
    }
    if !(0.0..=1.0).contains(&p.phi) {
        v.push(Violation::Phi { phi: p.phi });
    }
    if p.c <= 0.0 {
        v.push(Violation::Cost { c: p.c });
    }
    if v.is_empty() {
        Ok(Model {
            params: p.clone(),
            gbar,
            a,
        })
    } else {
        Err(Error::Validation(v))
    }
}

fn check_role(
    f: &Curve,
    key: &'static str,
    dir: Direction,
    ends: (f64, f64),
    out: &mut Vec<Violation>,
) {
    let mut fail = |reason: String| out.push(Violation::Role { key, reason });
    if f.direction() != dir {
        fail(format!("must be {dir:?}").to_lowercase());
        return;
    }
    let (lo, _) = f.interior();
    if lo != 0.0 {
        fail(format!("interior must start at 0, starts at {lo}"));
    }
    let (below, above) = (f.eval(f64::NEG_INFINITY), f.eval(f64::INFINITY));
    if below != ends.0 || above != ends.1 {
        fail(format!(
            "must run from {} to {}, runs from {below} to {above}",
            ends.0, ends.1
        ));
    }
}

/// Validated parameters. All quantities of the game are methods here.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Model {
    params: ModelParams,
    gbar: f64,
    a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub pi: f64,
    pub rho: f64,
}

/// Expected payoffs for each of the four action profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffTable {
    cells: [Cell; 4],
}

impl PayoffTable {
    pub fn iter(&self) -> impl Iterator<Item = (ActionProfile, Cell)> + '_ {
        ActionProfile::ALL.into_iter().map(|p| (p, self[p]))
    }
}

impl Index<ActionProfile> for PayoffTable {
    type Output = Cell;

    fn index(&self, p: ActionProfile) -> &Cell {
        &self.cells[p.index()]
    }
}

impl Serialize for PayoffTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(4))?;
        for (p, cell) in self.iter() {
            m.serialize_entry(&p.code(), &cell)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub holds: bool,
    pub margin: f64,
}

impl Check {
    fn from_margin(margin: f64) -> Self {
        Self {
            holds: margin > 0.0,
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `c > Z(l)`; margin `c - Z(l)`.
    pub a1: Check,
    /// `W(gbar) k < -1`; margin `-1 - W(gbar) k`.
    pub a2: Check,
    /// `W(gbar) k` itself.
    pub a2_value: f64,
    /// `1 - W(gbar) > Z(gbar - l)`; margin is the difference.
    pub a3: Check,
    pub k: f64,
    /// `(beta / gamma)(a - gbar) / gbar`, only for two power families.
    pub power_condition: Option<f64>,
    pub warnings: Vec<String>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.a1.holds && self.a2.holds && self.a3.holds
    }

    pub fn failed(&self) -> Vec<&'static str> {
        [("1", self.a1), ("2", self.a2), ("3", self.a3)]
            .into_iter()
            .filter(|(_, c)| !c.holds)
            .map(|(n, _)| n)
            .collect()
    }
}

impl Model {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn z(&self) -> &Curve {
        &self.params.z
    }

    pub fn w(&self) -> &Curve {
        &self.params.w
    }

    pub fn gbar(&self) -> f64 {
        self.gbar
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn l(&self) -> f64 {
        self.params.l
    }

    pub fn c(&self) -> f64 {
        self.params.c
    }

    pub fn phi(&self) -> f64 {
        self.params.phi
    }

    pub fn g(&self) -> f64 {
        self.params.g
    }

    /// Same model at another `(g, phi)` point.
    pub fn at(&self, g: f64, phi: f64) -> Result<Model> {
        self.params.with_point(g, phi).validate()
    }

    pub fn check_assumptions(&self) -> Result<AssumptionReport> {
        let (z, w) = (self.z(), self.w());
        let (gbar, l, c) = (self.gbar, self.l(), self.c());
        let k = sup_ratio_k(z, w, l, gbar)?;
        let w_gbar = w.eval(gbar);
        let a2_value = w_gbar * k;
        let power_condition = match (z, w) {
            (Curve::PowerZ(zf), Curve::PowerW(wf)) => {
                Some((zf.beta() / wf.gamma()) * (wf.a() - gbar) / gbar)
            }
            _ => None,
        };
        let mut warnings = Vec::new();
        if !z.is_concave() {
            warnings.push("Z is not concave on its interior".to_string());
        }
        if !w.is_concave() {
            warnings.push("W is not concave on its interior".to_string());
        }
        Ok(AssumptionReport {
            a1: Check::from_margin(c - z.eval(l)),
            a2: Check::from_margin(-1.0 - a2_value),
            a2_value,
            a3: Check::from_margin((1.0 - w_gbar) - z.eval(gbar - l)),
            k,
            power_condition,
            warnings,
        })
    }

    /// `Phi = phi + (1 - phi) W(g)`.
    pub fn intervention_prob(&self) -> f64 {
        self.intervention_prob_at(self.g(), self.phi())
    }

    pub fn intervention_prob_at(&self, g: f64, phi: f64) -> f64 {
        phi + (1.0 - phi) * self.w().eval(g)
    }

    /// Government win probability in the given cell.
    pub fn gov_win_prob(&self, profile: ActionProfile) -> f64 {
        let (z, g, l) = (self.z(), self.g(), self.l());
        let survive = 1.0 - self.intervention_prob();
        match (profile.gov, profile.reb) {
            (Action::Attack, Action::Attack) => survive * z.eval(g),
            (Action::Attack, Action::Peace) => survive * z.eval(g + l),
            (Action::Peace, Action::Attack) => z.eval(g - l),
            (Action::Peace, Action::Peace) => z.eval(g),
        }
    }

    pub fn payoff_table(&self) -> PayoffTable {
        let cells = ActionProfile::ALL.map(|p| {
            let win = self.gov_win_prob(p);
            let cost = if p.any_attack() { self.c() } else { 0.0 };
            Cell {
                pi: win - cost,
                rho: -win - cost,
            }
        });
        PayoffTable { cells }
    }

    /// `D = pi(p,a) - pi(a,a)`, in closed form.
    pub fn tolerance_gap(&self) -> f64 {
        self.tolerance_gap_at(self.g(), self.phi())
    }

    /// `D` at an arbitrary `(g, phi)`; no domain check on the point.
    pub fn tolerance_gap_at(&self, g: f64, phi: f64) -> f64 {
        let (z, w, l) = (self.z(), self.w(), self.l());
        z.eval(g - l) - (1.0 - phi) * (1.0 - w.eval(g)) * z.eval(g)
    }

    /// `dD/dG = Z'(g - l) - (1 - phi)(1 - W(g)) Z'(g) + (1 - phi) W'(g) Z(g)`.
    pub fn tolerance_gap_deriv(&self) -> Result<f64> {
        self.tolerance_gap_deriv_at(self.g(), self.phi())
    }

    pub fn tolerance_gap_deriv_at(&self, g: f64, phi: f64) -> Result<f64> {
        let (z, w, l) = (self.z(), self.w(), self.l());
        let dz_shifted = z.deriv(g - l)?;
        let dz = z.deriv(g)?;
        let dw = w.deriv(g)?;
        Ok(dz_shifted - (1.0 - phi) * (1.0 - w.eval(g)) * dz + (1.0 - phi) * dw * z.eval(g))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::functions::{PowerFamilyW, PowerFamilyZ, Tabulated};
    use approx::assert_abs_diff_eq;

    /// gbar = 1, a = 3, beta = gamma = 1, l = 0.7, c = 0.8, phi = 0, g = 0.9.
    pub(crate) fn p0() -> ModelParams {
        ModelParams {
            z: PowerFamilyZ::new(1.0, 1.0).unwrap().into(),
            w: PowerFamilyW::new(3.0, 1.0).unwrap().into(),
            l: 0.7,
            c: 0.8,
            phi: 0.0,
            g: 0.9,
        }
    }

    fn keys(err: Error) -> Vec<&'static str> {
        match err {
            Error::Validation(v) => v.iter().map(Violation::key).collect(),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_examples() {
        assert!(p0().validate().is_ok());
        let mut p = p0();
        p.g = 0.7;
        assert_eq!(keys(p.validate().unwrap_err()), ["g"]);
        let mut p = p0();
        p.w = PowerFamilyW::new(0.5, 1.0).unwrap().into();
        assert_eq!(keys(p.validate().unwrap_err()), ["a"]);
    }

    #[test]
    fn validate_reports_each_violation() {
        let mut p = p0();
        p.phi = 1.5;
        p.c = -1.0;
        p.l = 1.2;
        let k = keys(p.validate().unwrap_err());
        assert!(k.contains(&"phi") && k.contains(&"c") && k.contains(&"l") && k.contains(&"g"));
    }

    #[test]
    fn validate_endpoint_band() {
        let mut p = p0();
        p.g = 1.0 - 1e-10;
        assert!(p.validate().is_err());
        p.g = 0.7 + 5e-10;
        assert!(p.validate().is_err());
        p.g = 0.7 + 1e-6;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn validate_rejects_swapped_roles() {
        let mut p = p0();
        std::mem::swap(&mut p.z, &mut p.w);
        let k = keys(p.validate().unwrap_err());
        assert!(k.contains(&"z") && k.contains(&"w"));
        let mut p = p0();
        p.z = Tabulated::from_points(&[(0.0, 0.0), (1.0, 0.9)]).unwrap().into();
        assert!(keys(p.validate().unwrap_err()).contains(&"z"));
    }

    #[test]
    fn assumptions_p0() {
        let r = p0().validate().unwrap().check_assumptions().unwrap();
        assert!(r.all_hold());
        assert_abs_diff_eq!(r.a1.margin, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(r.k, -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.a2_value, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.a3.margin, 1.0 / 3.0 - 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.power_condition.unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn assumptions_grid_k_cross_check() {
        // same curves tabulated force the grid route for k
        let mut p = p0();
        p.z = Tabulated::from_points(&[(0.0, 0.0), (1.0, 1.0)]).unwrap().into();
        p.w = Tabulated::from_points(&[(0.0, 1.0), (3.0, 0.0)]).unwrap().into();
        let r = p.validate().unwrap().check_assumptions().unwrap();
        assert_abs_diff_eq!(r.k, -3.0, epsilon = 1e-9);
        assert!(r.all_hold());
        assert!(r.power_condition.is_none());
    }

    #[test]
    fn assumption_failures() {
        let mut p = p0();
        p.c = 0.6;
        let r = p.validate().unwrap().check_assumptions().unwrap();
        assert!(!r.a1.holds);
        assert_abs_diff_eq!(r.a1.margin, -0.1, epsilon = 1e-12);
        assert_eq!(r.failed(), ["1"]);

        let mut p = p0();
        p.l = 0.2;
        let r = p.validate().unwrap().check_assumptions().unwrap();
        assert!(!r.a3.holds);
        assert_abs_diff_eq!(r.a3.margin, 1.0 / 3.0 - 0.8, epsilon = 1e-12);
    }

    #[test]
    fn intervention_prob_examples() {
        let m = p0().validate().unwrap();
        assert_abs_diff_eq!(m.intervention_prob(), 0.7, epsilon = 1e-15);
        assert_eq!(m.at(0.9, 1.0).unwrap().intervention_prob(), 1.0);
        assert_abs_diff_eq!(
            m.at(0.9, 0.55).unwrap().intervention_prob(),
            0.865,
            epsilon = 1e-15
        );
    }

    #[test]
    fn payoff_table_examples() {
        let t = p0().validate().unwrap().payoff_table();
        assert_abs_diff_eq!(t[ActionProfile::AA].pi, -0.53, epsilon = 1e-12);
        assert_abs_diff_eq!(t[ActionProfile::AA].rho, -1.07, epsilon = 1e-12);
        assert_eq!(t[ActionProfile::PP].pi, 0.9);
        assert_eq!(t[ActionProfile::PP].rho, -0.9);
        assert_abs_diff_eq!(t[ActionProfile::AP].pi, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(t[ActionProfile::AP].rho, -1.1, epsilon = 1e-12);
        assert_abs_diff_eq!(t[ActionProfile::PA].pi, 0.2 - 0.8, epsilon = 1e-12);
    }

    #[test]
    fn tolerance_gap_examples() {
        let m = p0().validate().unwrap();
        assert_abs_diff_eq!(m.tolerance_gap(), -0.07, epsilon = 1e-12);
        let t = m.payoff_table();
        assert_abs_diff_eq!(
            m.tolerance_gap(),
            t[ActionProfile::PA].pi - t[ActionProfile::AA].pi,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(m.at(0.9, 1.0).unwrap().tolerance_gap(), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(m.at(0.9, 0.55).unwrap().tolerance_gap(), 0.0785, epsilon = 1e-12);
    }

    #[test]
    fn tolerance_gap_deriv_examples() {
        let m = p0().validate().unwrap();
        assert_abs_diff_eq!(m.tolerance_gap_deriv().unwrap(), 0.4, epsilon = 1e-12);
        let h = 1e-6;
        let fd = (m.tolerance_gap_at(0.9 + h, 0.0) - m.tolerance_gap_at(0.9 - h, 0.0)) / (2.0 * h);
        assert_abs_diff_eq!(fd, 0.4, epsilon = 1e-8);
        assert_abs_diff_eq!(
            m.at(0.9, 1.0).unwrap().tolerance_gap_deriv().unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // 1 - 0.45 (0.8 / 3) - 0.45 (1 / 3) 0.8
        let m2 = m.at(0.8, 0.55).unwrap();
        assert_abs_diff_eq!(m2.tolerance_gap_deriv().unwrap(), 0.76, epsilon = 1e-12);
        let fd = (m2.tolerance_gap_at(0.8 + h, 0.55) - m2.tolerance_gap_at(0.8 - h, 0.55)) / (2.0 * h);
        assert_abs_diff_eq!(fd, 0.76, epsilon = 1e-8);
    }

    #[test]
    fn tolerance_gap_deriv_at_kink() {
        let m = p0().validate().unwrap();
        assert!(matches!(
            m.tolerance_gap_deriv_at(0.7, 0.0),
            Err(Error::DerivativeUndefined { .. })
        ));
    }

    #[test]
    fn profile_codes_round_trip() {
        for p in ActionProfile::ALL {
            assert_eq!(p.code().parse::<ActionProfile>().unwrap(), p);
        }
        assert!("xx".parse::<ActionProfile>().is_err());
        assert_eq!(ActionProfile::AP.to_string(), "(a,p)");
    }
}
