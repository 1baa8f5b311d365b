//! Clamped monotone functions used for the government win probability `Z`
//! and the material intervention probability `W`.
//!
//! Three concrete families are provided: the power families
//! `Z(x) = (x / gbar)^beta` and `W(x) = (1 - x / a)^gamma`, both clamped to
//! `[0, 1]` outside their interior interval, and a piecewise-linear table
//! over strictly increasing knots.

use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};

/// Points in the dense grid used by [`sup_ratio_k`] when no closed form exists.
pub const SUP_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// A function that is weakly monotone on all of ℝ and strictly monotone on
/// an open interior interval.
pub trait MonotoneFunction {
    fn eval(&self, x: f64) -> f64;

    /// Analytic derivative. Only defined strictly inside [`Self::interior`]
    /// and away from kinks.
    fn deriv(&self, x: f64) -> Result<f64>;

    /// Smallest `x` in the closed interior interval with `eval(x) == u`.
    fn inverse(&self, u: f64) -> Result<f64>;

    /// Open interval on which the function is strictly monotone.
    fn interior(&self) -> (f64, f64);

    fn direction(&self) -> Direction;

    /// Whether the function is concave on its interior.
    fn is_concave(&self) -> bool;
}

fn check_probability(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name: "u",
            value: u,
            reason: "probability must lie in [0, 1]",
        })
    }
}

fn check_shape(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            reason: "shape exponent must lie in (0, 1]",
        })
    }
}

fn check_scale(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

/// `Z(x) = (x / gbar)^beta` on `(0, gbar)`, 0 below, 1 above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFamilyZ {
    gbar: f64,
    beta: f64,
}

impl PowerFamilyZ {
    pub fn new(gbar: f64, beta: f64) -> Result<Self> {
        check_scale("gbar", gbar)?;
        check_shape("beta", beta)?;
        Ok(Self { gbar, beta })
    }

    pub fn gbar(&self) -> f64 {
        self.gbar
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl MonotoneFunction for PowerFamilyZ {
    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.gbar {
            1.0
        } else {
            (x / self.gbar).powf(self.beta)
        }
    }

    fn deriv(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x >= self.gbar {
            return Err(Error::DerivativeUndefined { x });
        }
        Ok(self.beta * x.powf(self.beta - 1.0) / self.gbar.powf(self.beta))
    }

    fn inverse(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.gbar * u.powf(1.0 / self.beta))
    }

    fn interior(&self) -> (f64, f64) {
        (0.0, self.gbar)
    }

    fn direction(&self) -> Direction {
        Direction::Increasing
    }

    fn is_concave(&self) -> bool {
        true
    }
}

/// `W(x) = (1 - x / a)^gamma` on `(0, a)`, 1 below, 0 above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFamilyW {
    a: f64,
    gamma: f64,
}

impl PowerFamilyW {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        check_scale("a", a)?;
        check_shape("gamma", gamma)?;
        Ok(Self { a, gamma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl MonotoneFunction for PowerFamilyW {
    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else if x >= self.a {
            0.0
        } else {
            (1.0 - x / self.a).powf(self.gamma)
        }
    }

    fn deriv(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x >= self.a {
            return Err(Error::DerivativeUndefined { x });
        }
        Ok(-(self.gamma / self.a) * (1.0 - x / self.a).powf(self.gamma - 1.0))
    }

    fn inverse(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.a * (1.0 - u.powf(1.0 / self.gamma)))
    }

    fn interior(&self) -> (f64, f64) {
        (0.0, self.a)
    }

    fn direction(&self) -> Direction {
        Direction::Decreasing
    }

    fn is_concave(&self) -> bool {
        true
    }
}

/// Piecewise-linear function through strictly increasing knots with strictly
/// monotone values, held constant outside the knot range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
    direction: Direction,
}

impl Tabulated {
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidTable("need at least two knots".into()));
        }
        if let Some((x, y)) = points.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidTable(format!("non-finite knot ({x}, {y})")));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable(format!(
                "x must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        let direction = if ys[1] > ys[0] {
            Direction::Increasing
        } else {
            Direction::Decreasing
        };
        let strict = ys.windows(2).all(|w| match direction {
            Direction::Increasing => w[1] > w[0],
            Direction::Decreasing => w[1] < w[0],
        });
        if !strict {
            return Err(Error::InvalidTable("values must be strictly monotone".into()));
        }
        Ok(Self { xs, ys, direction })
    }

    /// Reads a two-column `x,value` CSV. A non-numeric first row is taken as
    /// a header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut points = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidTable(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::InvalidTable(format!(
                    "row {}: expected 2 columns, found {}",
                    i + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => points.push((x, y)),
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::InvalidTable(format!(
                        "row {}: non-numeric entry",
                        i + 1
                    )))
                }
            }
        }
        Self::from_points(&points)
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn first(&self) -> (f64, f64) {
        (self.xs[0], self.ys[0])
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.xs.len() - 1;
        (self.xs[n], self.ys[n])
    }

    fn slope(&self, i: usize) -> f64 {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }
}

impl MonotoneFunction for Tabulated {
    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // first knot strictly greater than x
        let j = self.xs.partition_point(|&k| k <= x);
        let i = j - 1;
        let t = (x - self.xs[i]) / (self.xs[j] - self.xs[i]);
        self.ys[i] + t * (self.ys[j] - self.ys[i])
    }

    fn deriv(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.interior();
        if x <= lo || x >= hi || self.xs.binary_search_by(|k| k.total_cmp(&x)).is_ok() {
            return Err(Error::DerivativeUndefined { x });
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        Ok(self.slope(i))
    }

    fn inverse(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        let (first, last) = (self.ys[0], self.ys[self.ys.len() - 1]);
        let (lo, hi) = (first.min(last), first.max(last));
        if u < lo || u > hi {
            return Err(Error::ParameterDomain {
                name: "u",
                value: u,
                reason: "outside the range of the table",
            });
        }
        // segment index i with u between ys[i] and ys[i + 1]
        let j = match self.direction {
            Direction::Increasing => self.ys.partition_point(|&y| y < u),
            Direction::Decreasing => self.ys.partition_point(|&y| y > u),
        };
        if j == 0 {
            return Ok(self.xs[0]);
        }
        let i = j - 1;
        let t = (u - self.ys[i]) / (self.ys[j] - self.ys[i]);
        Ok(self.xs[i] + t * (self.xs[j] - self.xs[i]))
    }

    fn interior(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn direction(&self) -> Direction {
        self.direction
    }

    fn is_concave(&self) -> bool {
        (0..self.xs.len() - 2).all(|i| self.slope(i + 1) <= self.slope(i) + 1e-12)
    }
}

/// Any of the supported families.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Curve {
    PowerZ(PowerFamilyZ),
    PowerW(PowerFamilyW),
    Tabulated(Tabulated),
}

impl Curve {
    /// Right end of the interior interval: `gbar` for a Z-role curve, `a` for
    /// a W-role curve.
    pub fn upper(&self) -> f64 {
        self.interior().1
    }

    fn inner(&self) -> &dyn MonotoneFunction {
        match self {
            Curve::PowerZ(f) => f,
            Curve::PowerW(f) => f,
            Curve::Tabulated(f) => f,
        }
    }
}

impl From<PowerFamilyZ> for Curve {
    fn from(f: PowerFamilyZ) -> Self {
        Curve::PowerZ(f)
    }
}

impl From<PowerFamilyW> for Curve {
    fn from(f: PowerFamilyW) -> Self {
        Curve::PowerW(f)
    }
}

impl From<Tabulated> for Curve {
    fn from(f: Tabulated) -> Self {
        Curve::Tabulated(f)
    }
}

impl MonotoneFunction for Curve {
    fn eval(&self, x: f64) -> f64 {
        self.inner().eval(x)
    }

    fn deriv(&self, x: f64) -> Result<f64> {
        self.inner().deriv(x)
    }

    fn inverse(&self, u: f64) -> Result<f64> {
        self.inner().inverse(u)
    }

    fn interior(&self) -> (f64, f64) {
        self.inner().interior()
    }

    fn direction(&self) -> Direction {
        self.inner().direction()
    }

    fn is_concave(&self) -> bool {
        self.inner().is_concave()
    }
}

/// `k = sup { Z'(x) / W'(x) : x in (lo, hi) }`.
///
/// For two power families the ratio is increasing in `x`, so the supremum is
/// the limit at `hi`. Otherwise the ratio is scanned on a dense grid and the
/// best cell is refined by golden-section search.
pub fn sup_ratio_k(z: &Curve, w: &Curve, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::ParameterDomain {
            name: "lo",
            value: lo,
            reason: "interval must satisfy lo < hi",
        });
    }
    let (z_lo, z_hi) = z.interior();
    if lo < z_lo || hi > z_hi {
        return Err(Error::ParameterDomain {
            name: "hi",
            value: hi,
            reason: "interval must lie inside the closure of Z's interior",
        });
    }
    if let (Curve::PowerZ(zf), Curve::PowerW(wf)) = (z, w) {
        if hi < wf.a() {
            return Ok(power_ratio(zf, wf, hi));
        }
        return Err(Error::MonotonicityViolation {
            x: hi,
            reason: "W' vanishes at or beyond a",
        });
    }
    grid_sup_ratio(z, w, lo, hi)
}

fn power_ratio(z: &PowerFamilyZ, w: &PowerFamilyW, x: f64) -> f64 {
    let dz = z.beta() * x.powf(z.beta() - 1.0) / z.gbar().powf(z.beta());
    let dw = -(w.gamma() / w.a()) * (1.0 - x / w.a()).powf(w.gamma() - 1.0);
    dz / dw
}

/// `Ok(None)` at knots where a derivative is undefined.
fn ratio_at(z: &Curve, w: &Curve, x: f64) -> Result<Option<f64>> {
    let (w_lo, w_hi) = w.interior();
    if x <= w_lo || x >= w_hi {
        return Err(Error::MonotonicityViolation {
            x,
            reason: "W is flat outside its interior",
        });
    }
    let dw = match w.deriv(x) {
        Ok(d) => d,
        Err(Error::DerivativeUndefined { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if dw >= 0.0 {
        return Err(Error::MonotonicityViolation {
            x,
            reason: "W' must be negative",
        });
    }
    match z.deriv(x) {
        Ok(dz) => Ok(Some(dz / dw)),
        Err(Error::DerivativeUndefined { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn grid_sup_ratio(z: &Curve, w: &Curve, lo: f64, hi: f64) -> Result<f64> {
    let n = SUP_GRID_POINTS;
    let width = hi - lo;
    let ts = std::iter::once(1e-9)
        .chain((0..n).map(|i| (i as f64 + 0.5) / n as f64))
        .chain(std::iter::once(1.0 - 1e-9));
    let mut best: Option<(f64, f64)> = None;
    for t in ts {
        let x = lo + width * t;
        if let Some(r) = ratio_at(z, w, x)? {
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((x, r));
            }
        }
    }
    let (x_best, r_best) = best.ok_or(Error::DerivativeUndefined { x: lo })?;
    let cell = width / n as f64;
    let a = (x_best - cell).max(lo + width * 1e-9);
    let b = (x_best + cell).min(hi - width * 1e-9);
    let objective = |x: f64| match ratio_at(z, w, x) {
        Ok(Some(r)) => r,
        _ => f64::NEG_INFINITY,
    };
    let (_, r_refined) = golden_section_max(objective, a, b, 80);
    Ok(r_best.max(r_refined))
}

/// Maximizes a unimodal `f` on `[a, b]`; returns `(argmax, max)`.
pub(crate) fn golden_section_max<F: Fn(f64) -> f64>(
    f: F,
    mut a: f64,
    mut b: f64,
    iterations: usize,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
