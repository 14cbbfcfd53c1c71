//! Piecewise long-time Strichartz constants `C(p, T, N)` as sums of
//! monomials `T^a N^b`, with exponents in exact rational arithmetic.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, ExponentFit, FitOptions};

pub type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Parses `7/2`, `4` or a decimal such as `3.5`.
pub fn parse_exponent(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Ok(r) = Q::from_str(s) {
        return Ok(r);
    }
    s.parse::<f64>()
        .ok()
        .and_then(exponent_from_f64)
        .ok_or_else(|| Error::DomainError(alloc::format!("cannot read exponent {s:?}")))
}

/// Nearest simple fraction (denominator up to 720) to `x`.
pub fn exponent_from_f64(x: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let r = Q::from_f64(x)?;
    (1..=720)
        .map(|d| q((x * d as f64).round() as i64, d))
        .find(|c| (c.to_f64().unwrap_or(f64::NAN) - x).abs() < 1e-9)
        .or(Some(r))
}

/// `T^t N^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub t: Q,
    pub n: Q,
}

impl Monomial {
    pub fn new(t: Q, n: Q) -> Self {
        Self { t, n }
    }

    pub fn eval(&self, horizon: f64, cutoff: f64) -> f64 {
        horizon.powf(self.t.to_f64().unwrap_or(f64::NAN)) * cutoff.powf(self.n.to_f64().unwrap_or(f64::NAN))
    }

    /// Exponent of `N` after substituting `T = N^tau`.
    pub fn along(&self, tau: Q) -> Q {
        self.t * tau + self.n
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.t.is_zero(), self.n.is_zero()) {
            (true, true) => write!(f, "1"),
            (false, true) => write!(f, "T^({})", self.t),
            (true, false) => write!(f, "N^({})", self.n),
            (false, false) => write!(f, "T^({}) N^({})", self.t, self.n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    C0,
    C1,
    C2,
    C3,
    /// The `p = 4` bound on `R x T^n`, `n >= 2`.
    P4,
    Conjecture,
    /// Time window exponent `c(p)` on `R x T^2` or `c~(p)` on `R^2 x T`.
    CorollaryWindow,
}

impl Source {
    pub const ALL: [Source; 7] = [
        Source::C0,
        Source::C1,
        Source::C2,
        Source::C3,
        Source::P4,
        Source::Conjecture,
        Source::CorollaryWindow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Source::C0 => "C0",
            Source::C1 => "C1",
            Source::C2 => "C2",
            Source::C3 => "C3",
            Source::P4 => "P4",
            Source::Conjecture => "conjecture",
            Source::CorollaryWindow => "corollary-window",
        }
    }

    pub fn is_upper(self) -> bool {
        !matches!(self, Source::Conjecture | Source::CorollaryWindow)
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Source::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::DomainError(alloc::format!("unknown theory source {s:?}")))
    }
}

/// Where a branch stops: `T <= N^tau` for time branches, `p <` or `p <=` a
/// bound for the exponent branches of `C0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    TimeAtMost(Q),
    TimeBelow(Q),
    PBelow(Q),
    PAtMost(Q),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: String,
    /// The constant is the sum of these terms.
    pub terms: Vec<Monomial>,
    /// Upper end of the branch; the next branch starts there.
    pub until: Boundary,
    /// Carries an `N^eps` loss.
    pub eps_loss: bool,
}

impl Branch {
    fn new(label: &str, terms: Vec<Monomial>, until: Boundary) -> Self {
        Self {
            label: label.into(),
            terms,
            until,
            eps_loss: false,
        }
    }

    pub fn eval(&self, horizon: f64, cutoff: f64) -> f64 {
        self.terms.iter().map(|m| m.eval(horizon, cutoff)).sum()
    }
}

/// The branch table of `source` for `(m, n, p)`, in increasing order of `T`
/// (or of `p` for `C0`).
pub fn branches(source: Source, m: usize, n: usize, p: Q) -> Result<Vec<Branch>> {
    let (mi, ni) = (m as i64, n as i64);
    let d = mi + ni;
    let inv = p.recip();
    let regime = |what: &str| Err(Error::RegimeError(alloc::format!("{} {what}, got (m, n, p) = ({m}, {n}, {p})", source.name())));
    let dims_ok = m >= 1 && n >= 1;
    if !dims_ok {
        return Err(Error::DimensionError { m, n });
    }
    let mono = Monomial::new;
    let t_lin = q(mi + 2, 2) * inv - q(mi, 4);
    let n_full = q(d, 2) - qi(d + 2) * inv;
    let p_ten_thirds = q(10, 3);
    match source {
        Source::C0 => {
            if p <= qi(2) {
                return regime("needs p > 2");
            }
            let mut low = Branch::new("2 < p <= 2+4/d", vec![mono(t_lin, Q::zero())], Boundary::PAtMost(qi(2) + q(4, d)));
            low.eps_loss = true;
            Ok(vec![
                low,
                Branch::new(
                    "2+4/d < p < 2+4/m",
                    vec![mono(t_lin, n_full)],
                    Boundary::PBelow(qi(2) + q(4, mi)),
                ),
                Branch::new("p >= 2+4/m", vec![mono(Q::zero(), n_full)], Boundary::None),
            ])
        }
        Source::C1 => {
            if (m, n) != (2, 1) || !(p > p_ten_thirds && p < qi(4)) {
                return regime("needs (m, n) = (2, 1) and 10/3 < p < 4");
            }
            Ok(vec![
                Branch::new(
                    "T <= N^(9p/4-15/2)",
                    vec![mono(Q::zero(), q(3, 2) - qi(5) * inv)],
                    Boundary::TimeAtMost(q(9, 4) * p - q(15, 2)),
                ),
                Branch::new(
                    "N^(9p/4-15/2) < T <= N^(3/2)",
                    vec![mono(q(1, 3) * inv, q(3, 4) - q(5, 2) * inv)],
                    Boundary::TimeAtMost(q(3, 2)),
                ),
                Branch::new(
                    "T > N^(3/2)",
                    vec![mono(qi(2) * inv - q(1, 2), q(3, 2) - qi(5) * inv)],
                    Boundary::None,
                ),
            ])
        }
        Source::C2 => {
            if (m, n) != (1, 2) || !(p > p_ten_thirds && p < qi(4)) {
                return regime("needs (m, n) = (1, 2) and 10/3 < p < 4");
            }
            Ok(vec![
                Branch::new(
                    "T <= N^(3p/4-5/2)",
                    vec![mono(Q::zero(), q(3, 2) - qi(5) * inv)],
                    Boundary::TimeAtMost(q(3, 4) * p - q(5, 2)),
                ),
                Branch::new(
                    "N^(3p/4-5/2) < T <= N^(1/2)",
                    vec![mono(q(2, 3) * inv, qi(1) - q(10, 3) * inv)],
                    Boundary::TimeAtMost(q(1, 2)),
                ),
                Branch::new(
                    "N^(1/2) < T <= N^2",
                    vec![mono(qi(4) * inv - qi(1), q(3, 2) - qi(5) * inv)],
                    Boundary::TimeAtMost(qi(2)),
                ),
                Branch::new(
                    "T > N^2",
                    vec![mono(q(3, 2) * inv - q(1, 4), Q::zero())],
                    Boundary::None,
                ),
            ])
        }
        Source::C3 => {
            if (m, n) != (1, 2) || !(p > qi(4) && p < qi(6)) {
                return regime("needs (m, n) = (1, 2) and 4 < p < 6");
            }
            Ok(vec![
                Branch::new(
                    "T <= N^(p-2)",
                    vec![mono(Q::zero(), q(3, 2) - qi(5) * inv)],
                    Boundary::TimeAtMost(p - qi(2)),
                ),
                Branch::new(
                    "N^(p-2) < T <= N^4",
                    vec![mono(q(1, 2) * inv, qi(1) - qi(4) * inv)],
                    Boundary::TimeAtMost(qi(4)),
                ),
                Branch::new(
                    "T > N^4",
                    vec![mono(q(3, 2) * inv - q(1, 4), qi(2) - qi(8) * inv)],
                    Boundary::None,
                ),
            ])
        }
        Source::P4 => {
            if m != 1 || n < 2 || p != qi(4) {
                return regime("needs m = 1, n >= 2 and p = 4");
            }
            let mut b = Branch::new(
                "p = 4",
                vec![mono(q(1, 8), q(ni - 2, 4)), mono(Q::zero(), q(ni - 1, 4))],
                Boundary::None,
            );
            b.eps_loss = true;
            Ok(vec![b])
        }
        Source::Conjecture => {
            if p < qi(2) {
                return regime("needs p >= 2");
            }
            let n_torus = q(ni, 2) - qi(ni + 2) * inv;
            Ok(vec![Branch::new(
                "all p",
                vec![mono(t_lin, Q::zero()), mono(t_lin, n_torus), mono(Q::zero(), n_full)],
                Boundary::None,
            )])
        }
        Source::CorollaryWindow => Err(Error::RegimeError(
            "the corollary window is an exponent, see corollary_window".into(),
        )),
    }
}

/// Time window exponent: the `N^{3/2 - 5/p}` bound holds on `[0, N^c]`.
/// `None` stands for an unbounded window.
pub fn corollary_window(m: usize, n: usize, p: Q) -> Result<Option<Q>> {
    let ten_thirds = q(10, 3);
    match (m, n) {
        (1, 2) => {
            if p <= ten_thirds {
                Err(Error::RegimeError(alloc::format!("c(p) needs p > 10/3, got {p}")))
            } else if p <= qi(4) {
                Ok(Some((qi(3) * p - qi(10)) / qi(4)))
            } else if p < qi(6) {
                Ok(Some(p - qi(2)))
            } else {
                Ok(None)
            }
        }
        (2, 1) => {
            if p <= ten_thirds {
                Err(Error::RegimeError(alloc::format!("c~(p) needs p > 10/3, got {p}")))
            } else if p < qi(4) {
                Ok(Some(qi(3) * (qi(3) * p - qi(10)) / qi(4)))
            } else {
                Ok(None)
            }
        }
        _ => Err(Error::DimensionError { m, n }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConstant {
    pub source: Source,
    pub m: usize,
    pub n: usize,
    pub p: Q,
    /// Branch active at `(T, N)`; for the corollary window this is `c(p)`.
    pub branch: Branch,
    pub value: f64,
    /// Window exponent, only for [`Source::CorollaryWindow`].
    pub window: Option<Option<Q>>,
}

fn in_branch(b: &Boundary, p: Q, horizon: f64, cutoff: f64) -> bool {
    let f = |r: Q| r.to_f64().unwrap_or(f64::NAN);
    // relative slack keeps T = N^tau on the lower branch despite rounding
    let tol = 1e-12;
    match *b {
        Boundary::TimeAtMost(tau) => horizon.ln() <= f(tau) * cutoff.ln() + tol,
        Boundary::TimeBelow(tau) => horizon.ln() < f(tau) * cutoff.ln() - tol,
        Boundary::PAtMost(x) => p <= x,
        Boundary::PBelow(x) => p < x,
        Boundary::None => true,
    }
}

/// Value and active branch of `source` at `(p, T, N)`.
pub fn theory_constant(source: Source, m: usize, n: usize, p: Q, horizon: f64, cutoff: f64) -> Result<TheoryConstant> {
    if source == Source::CorollaryWindow {
        let c = corollary_window(m, n, p)?;
        let label = match c {
            Some(c) => alloc::format!("window N^({c})"),
            None => "window unbounded".into(),
        };
        let bound = Monomial::new(Q::zero(), q(3, 2) - qi(5) * p.recip());
        return Ok(TheoryConstant {
            source,
            m,
            n,
            p,
            branch: Branch::new(&label, vec![bound], Boundary::None),
            value: bound.eval(horizon, cutoff),
            window: Some(c),
        });
    }
    if !(horizon >= 1.0 && cutoff >= 1.0) {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "need T >= 1 and N >= 1, got T = {horizon}, N = {cutoff}"
        )));
    }
    let table = branches(source, m, n, p)?;
    let branch = table
        .into_iter()
        .find(|b| in_branch(&b.until, p, horizon, cutoff))
        .expect("last branch is unbounded");
    Ok(TheoryConstant {
        source,
        m,
        n,
        p,
        value: branch.eval(horizon, cutoff),
        branch,
        window: None,
    })
}

/// Upper-bound sources that apply to `(m, n, p)`.
pub fn upper_sources(m: usize, n: usize, p: Q) -> Vec<Source> {
    [Source::C0, Source::C1, Source::C2, Source::C3, Source::P4]
        .into_iter()
        .filter(|&s| branches(s, m, n, p).is_ok())
        .collect()
}

/// Smallest applicable upper bound at `(T, N)`.
pub fn best_upper(m: usize, n: usize, p: Q, horizon: f64, cutoff: f64) -> Result<TheoryConstant> {
    upper_sources(m, n, p)
        .into_iter()
        .map(|s| theory_constant(s, m, n, p, horizon, cutoff))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::RegimeError(alloc::format!("no upper bound for p = {p}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityCheck {
    pub source: Source,
    pub p: Q,
    pub left: String,
    pub right: String,
    /// The threshold: `T = N^tau`, or the value of `p` for `C0`.
    pub at: Q,
    pub left_exponent: (Q, Q),
    pub right_exponent: (Q, Q),
    pub agree: bool,
}

fn dominant_along(terms: &[Monomial], tau: Q) -> Q {
    terms.iter().map(|m| m.along(tau)).max().expect("nonempty terms")
}

/// Checks that adjacent branches of `source` give equal exponents at their
/// common threshold. For time thresholds the comparison is the `N`-exponent
/// along `T = N^tau`; for `C0` the exponent pair is compared at the boundary
/// value of `p`, with the `N^eps` loss read as exponent 0.
pub fn continuity(source: Source, m: usize, n: usize, p: Q) -> Result<Vec<ContinuityCheck>> {
    let table = branches(source, m, n, p)?;
    let mut out = Vec::new();
    for w in table.windows(2) {
        let (l, r) = (&w[0], &w[1]);
        match l.until {
            Boundary::TimeAtMost(tau) | Boundary::TimeBelow(tau) => {
                let a = dominant_along(&l.terms, tau);
                let b = dominant_along(&r.terms, tau);
                out.push(ContinuityCheck {
                    source,
                    p,
                    left: l.label.clone(),
                    right: r.label.clone(),
                    at: tau,
                    left_exponent: (Q::zero(), a),
                    right_exponent: (Q::zero(), b),
                    agree: a == b,
                });
            }
            Boundary::PAtMost(pb) | Boundary::PBelow(pb) => {
                let lt = branches(source, m, n, pb)?;
                let i = table.iter().position(|b| b.label == l.label).expect("own branch");
                let (bl, br) = (&lt[i], &lt[i + 1]);
                let pair = |b: &Branch| (b.terms[0].t, b.terms[0].n);
                let (a, b) = (pair(bl), pair(br));
                out.push(ContinuityCheck {
                    source,
                    p: pb,
                    left: l.label.clone(),
                    right: r.label.clone(),
                    at: pb,
                    left_exponent: a,
                    right_exponent: b,
                    agree: a == b,
                });
            }
            Boundary::None => {}
        }
    }
    Ok(out)
}

/// Every threshold of `C0..C3` over a grid of rational exponents in each
/// source's range.
pub fn continuity_sweep() -> Vec<ContinuityCheck> {
    let mut out = Vec::new();
    for (m, n) in [(1usize, 2usize), (2, 1)] {
        // one p per branch of C0 is enough to reach both of its thresholds
        if let Ok(c) = continuity(Source::C0, m, n, qi(3)) {
            out.extend(c);
        }
    }
    for k in 1..24 {
        // p in (10/3, 4)
        let p = q(10, 3) + q(2, 3) * q(k, 24);
        out.extend(continuity(Source::C1, 2, 1, p).unwrap_or_default());
        out.extend(continuity(Source::C2, 1, 2, p).unwrap_or_default());
        // p in (4, 6)
        let p = qi(4) + qi(2) * q(k, 24);
        out.extend(continuity(Source::C3, 1, 2, p).unwrap_or_default());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    LowerOk,
    UpperOk,
    Bracket,
    Fail,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::LowerOk => "LOWER-OK",
            Verdict::UpperOk => "UPPER-OK",
            Verdict::Bracket => "BRACKET",
            Verdict::Fail => "FAIL",
        }
    }
}

/// Log-slope slack for `N^eps` losses.
pub const SLOPE_SLACK: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub axis: &'static str,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub lower_ok: Option<bool>,
    pub upper_ok: Option<bool>,
    pub verdict: Verdict,
}

/// Theory slope along a sweep: the log-log slope of the theory values at the
/// same sample points, so branch changes inside the sweep are averaged the
/// same way the measurement is.
pub fn theory_slope(
    theory: impl Fn(f64, f64) -> Result<f64>,
    samples: &[(f64, f64)],
    axis: &'static str,
) -> Result<f64> {
    let xs: Vec<f64> = samples.iter().map(|s| if axis == "T" { s.0 } else { s.1 }).collect();
    let ys = samples
        .iter()
        .map(|&(t, n)| theory(t, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(loglog_fit(&xs, &ys, axis, FitOptions { min_distinct: 2 })?.slope)
}

/// Compares a measured slope with optional lower and upper theory slopes.
pub fn compare(axis: &'static str, measured: &ExponentFit, lower: Option<f64>, upper: Option<f64>) -> Result<Comparison> {
    compare_with(axis, measured, lower, upper, SLOPE_SLACK)
}

/// [`compare`] with an explicit log-slope slack.
pub fn compare_with(
    axis: &'static str,
    measured: &ExponentFit,
    lower: Option<f64>,
    upper: Option<f64>,
    slack: f64,
) -> Result<Comparison> {
    let m = match axis {
        "T" => measured.t_slope,
        _ => measured.n_slope,
    }
    .ok_or_else(|| Error::RegimeError(alloc::format!("the measurement holds {axis} fixed")))?;
    if lower.is_none() && upper.is_none() {
        return Err(Error::RegimeError("no theory slope to compare against".into()));
    }
    let lower_ok = lower.map(|l| m >= l - slack);
    let upper_ok = upper.map(|u| m <= u + slack);
    let verdict = match (lower_ok, upper_ok) {
        (Some(true), Some(true)) => Verdict::Bracket,
        (Some(true), None) => Verdict::LowerOk,
        (None, Some(true)) => Verdict::UpperOk,
        _ => Verdict::Fail,
    };
    Ok(Comparison {
        axis,
        measured: m,
        lower,
        upper,
        lower_ok,
        upper_ok,
        verdict,
    })
}

/// `omega(s, mu)`: the growth exponent of `||u(t)||_{H^s}` for the defocusing
/// equation on `R x T^2`, `3 < mu <= 5`, `s > 1`.
pub fn omega(s: f64, mu: Q) -> Result<Q> {
    if !(s > 1.0) {
        return Err(Error::DomainError(alloc::format!("need s > 1, got {s}")));
    }
    let sq = exponent_from_f64(s).ok_or_else(|| Error::DomainError(alloc::format!("s = {s}")))?;
    if mu == qi(5) {
        return Ok(qi(300) * (sq - qi(1)));
    }
    if !(mu > qi(3) && mu < qi(5)) {
        return Err(Error::DomainError(alloc::format!("need 3 < mu <= 5, got {mu}")));
    }
    Ok(sq / (qi(5) - mu + theta(mu)))
}

/// `theta(mu) = |(mu-3)(5-mu)| / (2 (65 mu - 162)) * (6-mu)/(16-mu)`.
pub fn theta(mu: Q) -> Q {
    ((mu - qi(3)) * (qi(5) - mu)).abs() / (qi(2) * (qi(65) * mu - qi(162))) * (qi(6) - mu) / (qi(16) - mu)
}

/// Exponents of the three lower-bound families at `(m, n, p)`:
/// `(T, N)` pairs for `phi_1`, `phi_2`, `phi_3`.
pub fn family_exponents(m: usize, n: usize, p: Q) -> [(Q, Q); 3] {
    let (mi, ni) = (m as i64, n as i64);
    let d = mi + ni;
    let inv = p.recip();
    let t_lin = q(mi + 2, 2) * inv - q(mi, 4);
    [
        (t_lin, Q::zero()),
        (t_lin, q(ni, 2) - qi(ni + 2) * inv),
        (Q::zero(), q(d, 2) - qi(d + 2) * inv),
    ]
}

impl TheoryConstant {
    pub fn is_eps_lossy(&self) -> bool {
        self.branch.eps_loss || self.source == Source::P4
    }
}

pub fn ratio_to_f64(r: Q) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
