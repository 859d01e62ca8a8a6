//! Bounded polynomials on `[-1, 1]` with Chebyshev coefficients as the
//! canonical form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::C64;

/// Points used for grid sup-norms and measured errors.
pub const DEFAULT_GRID: usize = 4001;
/// Largest number of Taylor terms for which Bernoulli numbers are generated.
pub const MAX_TAYLOR_TERMS: usize = 160;
/// Relative magnitude below which fitted coefficients are dropped.
const FIT_DROP: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    /// `0` for even, `1` for odd.
    pub fn bit(self) -> Option<usize> {
        match self {
            Parity::Even => Some(0),
            Parity::Odd => Some(1),
            Parity::Mixed => None,
        }
    }
}

/// A polynomial `p(x) = Σ a_j T_j(x)` with complex coefficients.
///
/// `gamma` is the sup of `|p|` on a uniform grid of [`DEFAULT_GRID`] points
/// and `certified_error` bounds `|p − f|` for whatever target `f` the
/// polynomial was built to approximate (zero when `p` is itself the target).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomial")]
pub struct PolynomialSpec {
    pub label: String,
    pub degree: usize,
    pub parity: Parity,
    pub chebyshev: Vec<C64>,
    pub monomial: Vec<C64>,
    pub gamma: f64,
    pub certified_error: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolynomial {
    #[serde(default)]
    label: String,
    #[serde(default)]
    degree: Option<usize>,
    #[serde(default)]
    parity: Option<Parity>,
    #[serde(default)]
    chebyshev: Option<Vec<C64>>,
    #[serde(default)]
    monomial: Option<Vec<C64>>,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default)]
    certified_error: f64,
}

impl TryFrom<RawPolynomial> for PolynomialSpec {
    type Error = String;
    fn try_from(raw: RawPolynomial) -> std::result::Result<Self, String> {
        let p = match (raw.chebyshev, raw.monomial) {
            (Some(c), _) => PolynomialSpec::from_chebyshev(raw.label, c),
            (None, Some(m)) => PolynomialSpec::from_monomial(raw.label, m),
            (None, None) => return Err("polynomial needs `chebyshev` or `monomial` coefficients".into()),
        };
        if p.chebyshev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err("non-finite coefficient".into());
        }
        if let Some(d) = raw.degree {
            if d != p.degree {
                return Err(format!("declared degree {d} but coefficients give {}", p.degree));
            }
        }
        if let Some(par) = raw.parity {
            if par != p.parity {
                return Err(format!("declared parity {par:?} but coefficients give {:?}", p.parity));
            }
        }
        if let Some(g) = raw.gamma {
            if g + 1e-12 < p.gamma {
                return Err(format!("declared gamma {g} below grid sup {}", p.gamma));
            }
        }
        if !(raw.certified_error >= 0.0) {
            return Err("certified_error must be non-negative".into());
        }
        Ok(p.with_certified_error(raw.certified_error))
    }
}

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn trim(mut v: Vec<C64>) -> Vec<C64> {
    while v.len() > 1 && v.last() == Some(&czero()) {
        v.pop();
    }
    if v.is_empty() {
        v.push(czero());
    }
    v
}

fn parity_of(coeffs: &[C64]) -> Parity {
    let even = coeffs.iter().step_by(2).any(|z| *z != czero());
    let odd = coeffs.iter().skip(1).step_by(2).any(|z| *z != czero());
    match (even, odd) {
        (_, false) => Parity::Even,
        (false, true) => Parity::Odd,
        (true, true) => Parity::Mixed,
    }
}

/// Uniform grid of `n ≥ 2` points including both endpoints.
pub fn uniform_grid(n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
}

/// Chebyshev nodes of the first kind, `cos(π(k + 1/2)/m)`.
pub fn chebyshev_nodes(m: usize) -> Vec<f64> {
    (0..m).map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / m as f64).cos()).collect()
}

pub fn chebyshev_to_monomial(cheb: &[C64]) -> Vec<C64> {
    let n = cheb.len();
    let mut out = vec![czero(); n.max(1)];
    let mut prev = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    for (k, a) in cheb.iter().enumerate() {
        let tk: Vec<f64> = match k {
            0 => {
                cur[0] = 1.0;
                cur.clone()
            }
            1 => {
                prev = cur.clone();
                cur = vec![0.0; n + 1];
                cur[1] = 1.0;
                cur.clone()
            }
            _ => {
                let mut next = vec![0.0; n + 1];
                for j in 0..n {
                    next[j + 1] += 2.0 * cur[j];
                }
                for j in 0..=n {
                    next[j] -= prev[j];
                }
                prev = std::mem::replace(&mut cur, next);
                cur.clone()
            }
        };
        if *a != czero() {
            for (j, t) in tk.iter().enumerate().take(n) {
                if *t != 0.0 {
                    out[j] += a * *t;
                }
            }
        }
    }
    out
}

pub fn monomial_to_chebyshev(mono: &[C64]) -> Vec<C64> {
    let n = mono.len();
    let mut out = vec![czero(); n.max(1)];
    // Chebyshev expansion of x^k, built by repeated multiplication by x.
    let mut power = vec![0.0; n + 1];
    power[0] = 1.0;
    for (k, a) in mono.iter().enumerate() {
        if k > 0 {
            let mut next = vec![0.0; n + 1];
            for (j, &p) in power.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                if j == 0 {
                    next[1] += p;
                } else {
                    next[j - 1] += p / 2.0;
                    if j + 1 <= n {
                        next[j + 1] += p / 2.0;
                    }
                }
            }
            power = next;
        }
        if *a != czero() {
            for (j, &p) in power.iter().enumerate().take(n) {
                if p != 0.0 {
                    out[j] += a * p;
                }
            }
        }
    }
    out
}

/// Clenshaw evaluation of `Σ a_j T_j(x)`.
pub fn clenshaw(coeffs: &[C64], x: f64) -> C64 {
    let mut b1 = czero();
    let mut b2 = czero();
    for a in coeffs.iter().skip(1).rev() {
        let b0 = a + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or_default() + b1 * x - b2
}

impl PolynomialSpec {
    pub fn from_chebyshev(label: impl Into<String>, coeffs: Vec<C64>) -> Self {
        let chebyshev = trim(coeffs);
        let monomial = trim(chebyshev_to_monomial(&chebyshev));
        Self::assemble(label.into(), chebyshev, monomial)
    }

    pub fn from_monomial(label: impl Into<String>, coeffs: Vec<C64>) -> Self {
        let monomial = trim(coeffs);
        let chebyshev = trim(monomial_to_chebyshev(&monomial));
        Self::assemble(label.into(), chebyshev, monomial)
    }

    pub fn from_real_chebyshev(label: impl Into<String>, coeffs: &[f64]) -> Self {
        Self::from_chebyshev(label, coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn from_real_monomial(label: impl Into<String>, coeffs: &[f64]) -> Self {
        Self::from_monomial(label, coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    fn assemble(label: String, chebyshev: Vec<C64>, monomial: Vec<C64>) -> Self {
        let degree = chebyshev.len() - 1;
        let parity = parity_of(&chebyshev);
        let mut p = Self { label, degree, parity, chebyshev, monomial, gamma: 0.0, certified_error: 0.0 };
        p.gamma = p.grid_sup(DEFAULT_GRID);
        p
    }

    pub fn zero() -> Self {
        Self::from_real_chebyshev("0", &[0.0])
    }

    pub fn identity() -> Self {
        Self::from_real_chebyshev("x", &[0.0, 1.0])
    }

    pub fn constant(c: C64) -> Self {
        Self::from_chebyshev("const", vec![c])
    }

    /// `T_d`
    pub fn chebyshev_t(d: usize) -> Self {
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        Self::from_real_chebyshev(format!("T{d}"), &c)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_certified_error(mut self, e: f64) -> Self {
        self.certified_error = e;
        self
    }

    pub fn eval(&self, x: f64) -> C64 {
        clenshaw(&self.chebyshev, x)
    }

    pub fn eval_monomial(&self, x: f64) -> C64 {
        self.monomial.iter().rev().fold(czero(), |acc, a| acc * x + a)
    }

    pub fn is_zero(&self) -> bool {
        self.chebyshev.iter().all(|z| *z == czero())
    }

    pub fn is_real(&self) -> bool {
        self.chebyshev.iter().all(|z| z.im == 0.0)
    }

    pub fn grid_sup(&self, n: usize) -> f64 {
        uniform_grid(n).map(|x| self.eval(x).norm()).fold(0.0, f64::max)
    }

    /// Max of `|p(x) − f(x)|` over a uniform grid.
    pub fn grid_error(&self, f: impl Fn(f64) -> C64, n: usize) -> f64 {
        uniform_grid(n).map(|x| (self.eval(x) - f(x)).norm()).fold(0.0, f64::max)
    }

    fn map_coeffs(&self, label: String, f: impl Fn(usize, C64) -> C64) -> Self {
        let c = self.chebyshev.iter().enumerate().map(|(j, &a)| f(j, a)).collect();
        Self::from_chebyshev(label, c)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut p = self.map_coeffs(self.label.clone(), |_, a| a * s);
        p.certified_error = self.certified_error * s.norm();
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.chebyshev.len().max(other.chebyshev.len());
        let get = |v: &[C64], j: usize| v.get(j).copied().unwrap_or_default();
        let c = (0..n).map(|j| get(&self.chebyshev, j) + get(&other.chebyshev, j)).collect();
        let mut p = Self::from_chebyshev(format!("{}+{}", self.label, other.label), c);
        p.certified_error = self.certified_error + other.certified_error;
        p
    }

    /// The polynomial `Re p` on the real line.
    pub fn real_part(&self) -> Self {
        self.map_coeffs(format!("re({})", self.label), |_, a| C64::new(a.re, 0.0))
    }

    /// The polynomial `Im p` on the real line.
    pub fn imag_part(&self) -> Self {
        self.map_coeffs(format!("im({})", self.label), |_, a| C64::new(a.im, 0.0))
    }

    pub fn even_part(&self) -> Self {
        self.map_coeffs(format!("even({})", self.label), |j, a| if j % 2 == 0 { a } else { czero() })
    }

    pub fn odd_part(&self) -> Self {
        self.map_coeffs(format!("odd({})", self.label), |j, a| if j % 2 == 1 { a } else { czero() })
    }

    /// `p(-x)`, or `-p(x)` composed appropriately for definite parity.
    pub fn reflect(&self) -> Self {
        self.map_coeffs(format!("{}(-x)", self.label), |j, a| if j % 2 == 1 { -a } else { a })
    }

    pub fn real_coefficients(&self) -> Vec<f64> {
        self.chebyshev.iter().map(|z| z.re).collect()
    }
}

/// `B_0..=B_m` by the defining recurrence, exactly.
pub fn bernoulli_numbers(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    b.push(BigRational::one());
    for n in 1..=m {
        // Σ_{k<n} C(n+1, k) B_k
        let mut binom = BigInt::one();
        let mut s = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            if !bk.is_zero() {
                s += bk * BigRational::from_integer(binom.clone());
            }
            binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-s / BigRational::from_integer(BigInt::from(n + 1)));
    }
    b
}

/// Monomial coefficients of `x, x³, …, x^{2d−1}` in the Maclaurin series of
/// tanh: `2^{2n}(2^{2n}−1) B_{2n} / (2n)!`.
pub fn tanh_taylor_coefficients(terms: usize) -> Result<Vec<f64>> {
    if terms > MAX_TAYLOR_TERMS {
        return Err(Error::BernoulliOverflow(terms));
    }
    let b = bernoulli_numbers(2 * terms);
    let mut fact = BigInt::one();
    let mut out = Vec::with_capacity(terms);
    for n in 1..=terms {
        let m = 2 * n;
        fact = fact * BigInt::from(m - 1) * BigInt::from(m);
        let four_n = BigInt::one() << m;
        let num = &four_n * (&four_n - BigInt::one());
        let c = &b[m] * BigRational::from_integer(num) / BigRational::from_integer(fact.clone());
        let f = c.to_f64().filter(|v| v.is_finite()).ok_or(Error::BernoulliOverflow(terms))?;
        out.push(f);
    }
    Ok(out)
}

/// Closed-form bound on `sup_{[-1,1]} |tanh − tanh_d|` for `d` Taylor terms.
pub fn tanh_tail_bound(terms: usize) -> f64 {
    let r = 2.0 / std::f64::consts::PI;
    5.0 * std::f64::consts::PI.sqrt() / (1.0 - r) * r.powi(terms as i32 + 1)
}

/// Smallest number of terms whose tail bound is at most `eps`.
pub fn min_taylor_terms(eps: f64) -> usize {
    (1..).find(|&d| tanh_tail_bound(d) <= eps).expect("bound decreases geometrically")
}

/// Smallest number of terms whose measured grid error is at most `eps`.
pub fn min_taylor_terms_measured(eps: f64, grid: usize) -> Result<usize> {
    for d in 1..=MAX_TAYLOR_TERMS {
        let p = taylor_tanh(d)?;
        if p.grid_error(|x| C64::new(x.tanh(), 0.0), grid) <= eps {
            return Ok(d);
        }
    }
    Err(Error::BernoulliOverflow(MAX_TAYLOR_TERMS + 1))
}

/// The first `terms` nonzero terms of the tanh series, a polynomial of
/// degree `2·terms − 1`.
pub fn taylor_tanh(terms: usize) -> Result<PolynomialSpec> {
    if terms == 0 {
        return Err(Error::InvalidConfig("taylor_tanh needs at least one term".into()));
    }
    let c = tanh_taylor_coefficients(terms)?;
    let mut mono = vec![0.0; 2 * terms];
    for (n, v) in c.into_iter().enumerate() {
        mono[2 * n + 1] = v;
    }
    Ok(PolynomialSpec::from_real_monomial(format!("tanh-d{terms}"), &mono).with_certified_error(tanh_tail_bound(terms)))
}

/// How [`fit_tanh`] builds its approximant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Taylor,
    Chebyshev,
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor" => Ok(Self::Taylor),
            "chebyshev" => Ok(Self::Chebyshev),
            other => Err(Error::InvalidConfig(format!("unknown fit method '{other}'"))),
        }
    }
}

/// Lowest-degree approximant of `tanh` on `[−1, 1]` within `eps`: the
/// truncated series with its closed-form tail bound, or a Chebyshev
/// interpolant of odd degree with its measured grid error.
pub fn fit_tanh(method: FitMethod, eps: f64) -> Result<PolynomialSpec> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    match method {
        FitMethod::Taylor => taylor_tanh(min_taylor_terms(eps)),
        FitMethod::Chebyshev => {
            for d in (1..=crate::qsvt::DEFAULT_DEGREE_CAP).step_by(2) {
                let p = chebyshev_fit(f64::tanh, d, DEFAULT_GRID)?.odd_part();
                let err = p.grid_error(|x| C64::new(x.tanh(), 0.0), DEFAULT_GRID);
                if err <= eps {
                    return Ok(p.with_label(format!("tanh-cheb-d{d}")).with_certified_error(err));
                }
            }
            Err(Error::DegreeCap { degree: crate::qsvt::DEFAULT_DEGREE_CAP + 2, cap: crate::qsvt::DEFAULT_DEGREE_CAP })
        }
    }
}

/// Degree-`d` interpolant at the `d+1` Chebyshev nodes; the reported error is
/// measured on a uniform grid of `grid_size` points.
pub fn chebyshev_fit_complex(f: impl Fn(f64) -> C64, d: usize, grid_size: usize) -> Result<PolynomialSpec> {
    let m = d + 1;
    let nodes = chebyshev_nodes(m);
    let vals: Vec<C64> = nodes.iter().map(|&x| f(x)).collect();
    if let Some((i, _)) = vals.iter().enumerate().find(|(_, v)| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite(nodes[i]));
    }
    let mut coeffs: Vec<C64> = (0..m)
        .map(|j| {
            let s: C64 = vals
                .iter()
                .enumerate()
                .map(|(k, v)| v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / m as f64).cos())
                .sum();
            s * (2.0 / m as f64) * if j == 0 { 0.5 } else { 1.0 }
        })
        .collect();
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for z in coeffs.iter_mut() {
        if z.re.abs() <= FIT_DROP * scale {
            z.re = 0.0;
        }
        if z.im.abs() <= FIT_DROP * scale {
            z.im = 0.0;
        }
    }
    let p = PolynomialSpec::from_chebyshev(format!("cheb-d{d}"), coeffs);
    let mut err = 0.0f64;
    for x in uniform_grid(grid_size) {
        let fx = f(x);
        if !fx.re.is_finite() || !fx.im.is_finite() {
            return Err(Error::NonFinite(x));
        }
        err = err.max((p.eval(x) - fx).norm());
    }
    Ok(p.with_certified_error(err))
}

pub fn chebyshev_fit(f: impl Fn(f64) -> f64, d: usize, grid_size: usize) -> Result<PolynomialSpec> {
    chebyshev_fit_complex(|x| C64::new(f(x), 0.0), d, grid_size)
}

/// `p / (4γ)`, after checking `γ` against the grid sup of `p`.
pub fn rescale_quarter(p: &PolynomialSpec, gamma: f64) -> Result<PolynomialSpec> {
    let sup = p.grid_sup(DEFAULT_GRID);
    if !(gamma >= sup - 1e-12 * sup.max(1.0)) {
        return Err(Error::GammaTooSmall { gamma, sup });
    }
    if p.is_zero() {
        return Ok(p.clone());
    }
    if gamma <= 0.0 {
        return Err(Error::GammaTooSmall { gamma, sup });
    }
    let q = p.scale(C64::new(1.0 / (4.0 * gamma), 0.0));
    Ok(q.with_label(format!("{}/(4γ)", p.label)))
}

/// `(even, odd)` with `p = even + odd`.
pub fn parity_split(p: &PolynomialSpec) -> (PolynomialSpec, PolynomialSpec) {
    (p.even_part(), p.odd_part())
}

/// Odd polynomial with `|p| ≤ 1` on `[−1, 1]` that agrees with `gain·x` on
/// `|x| ≤ (1 − eta)/gain` to within `tol`. Coefficients minimize the maximal
/// deviation on that interval by linear programming; the degree is the first
/// that meets `tol`.
pub fn linear_amplifier(gain: f64, eta: f64, tol: f64, degree_cap: usize) -> Result<PolynomialSpec> {
    if !(gain >= 1.0 && gain.is_finite() && eta > 0.0 && eta < 1.0 && tol > 0.0) {
        return Err(Error::InvalidConfig(format!("amplifier needs gain ≥ 1, eta in (0,1), tol > 0; got {gain}, {eta}, {tol}")));
    }
    let a = (1.0 - eta) / gain;
    let mut d = (gain.ceil() as usize) | 1;
    let mut best = f64::INFINITY;
    while d <= degree_cap {
        let (p, dev) = amplifier_lp(gain, a, d)?;
        best = dev;
        if dev <= tol {
            // one step down may also do
            if d >= 3 {
                let (q, dq) = amplifier_lp(gain, a, d - 2)?;
                if dq <= tol {
                    return Ok(q);
                }
            }
            return Ok(p);
        }
        d += 4;
    }
    let _ = best;
    Err(Error::DegreeCap { degree: d, cap: degree_cap })
}

fn amplifier_lp(gain: f64, a: f64, d: usize) -> Result<(PolynomialSpec, f64)> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};
    const HEADROOM: f64 = 1e-3;
    let odd: Vec<usize> = (1..=d).step_by(2).collect();
    let t_row = |x: f64| -> Vec<f64> { odd.iter().map(|&j| (j as f64 * x.acos()).cos()).collect() };
    let bound_points = 10 * d + 50;
    let mut bound: Vec<f64> = (0..=bound_points).map(|i| (std::f64::consts::FRAC_PI_2 * i as f64 / bound_points as f64).cos()).collect();
    let fine = 40 * d + 200;
    // Cutting planes: add the peaks that escape the bound and solve again.
    for _ in 0..12 {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = odd.iter().map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
        let t = lp.add_var(1.0, (0.0, f64::INFINITY));
        let fit_points = 4 * d + 20;
        for i in 0..=fit_points {
            let x = a * i as f64 / fit_points as f64;
            let row = t_row(x);
            let mut up: Vec<_> = vars.iter().zip(&row).map(|(&v, &c)| (v, c)).collect();
            up.push((t, -1.0));
            lp.add_constraint(&up, ComparisonOp::Le, gain * x);
            let mut lo: Vec<_> = vars.iter().zip(&row).map(|(&v, &c)| (v, -c)).collect();
            lo.push((t, -1.0));
            lp.add_constraint(&lo, ComparisonOp::Le, -gain * x);
        }
        for &x in &bound {
            let row: Vec<_> = vars.iter().zip(t_row(x)).map(|(&v, c)| (v, c)).collect();
            lp.add_constraint(&row, ComparisonOp::Le, 1.0 - HEADROOM);
            lp.add_constraint(&row, ComparisonOp::Ge, -(1.0 - HEADROOM));
        }
        let sol = match lp.solve() {
            Ok(SolveOutcome::Solution(s)) => s,
            Ok(other) => return Err(Error::InvalidConfig(format!("amplifier design interrupted: {other:?}"))),
            Err(e) => return Err(Error::InvalidConfig(format!("amplifier design failed: {e}"))),
        };
        let mut coeffs = vec![0.0; d + 1];
        for (&j, &v) in odd.iter().zip(&vars) {
            coeffs[j] = sol.var_value(v);
        }
        let vals: Vec<(f64, f64)> = (0..=fine)
            .map(|i| (std::f64::consts::FRAC_PI_2 * i as f64 / fine as f64).cos())
            .map(|x| (x, coeffs.iter().enumerate().map(|(j, c)| c * (j as f64 * x.acos()).cos()).sum::<f64>().abs()))
            .collect();
        let peaks: Vec<f64> = (0..vals.len())
            .filter(|&i| vals[i].1 > 1.0 - HEADROOM / 2.0)
            .filter(|&i| (i == 0 || vals[i].1 >= vals[i - 1].1) && (i + 1 == vals.len() || vals[i].1 >= vals[i + 1].1))
            .map(|i| vals[i].0)
            .collect();
        if peaks.is_empty() {
            let p = PolynomialSpec::from_real_chebyshev(format!("amplify-{gain:.3}"), &coeffs);
            let dev = (0..=DEFAULT_GRID)
                .map(|i| a * i as f64 / DEFAULT_GRID as f64)
                .map(|x| (p.eval(x).re - gain * x).abs())
                .fold(0.0, f64::max);
            return Ok((p.with_certified_error(dev), dev));
        }
        bound.extend(peaks);
    }
    Err(Error::SupNormViolation { sup: f64::NAN, bound: 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn bernoulli_small_values() {
        let b = bernoulli_numbers(8);
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(b[1], q(-1, 2));
        assert_eq!(b[2], q(1, 6));
        assert_eq!(b[3], q(0, 1));
        assert_eq!(b[4], q(-1, 30));
        assert_eq!(b[6], q(1, 42));
        assert_eq!(b[8], q(-1, 30));
    }

    #[test]
    fn taylor_tanh_examples() {
        let p1 = taylor_tanh(1).unwrap();
        assert_eq!(p1.monomial, vec![r(0.0), r(1.0)]);
        assert_eq!(p1.parity, Parity::Odd);
        assert!((p1.certified_error - tanh_tail_bound(1)).abs() < 1e-15);

        let p3 = taylor_tanh(3).unwrap();
        let want = [0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 2.0 / 15.0];
        for (a, b) in p3.monomial.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
        assert_eq!(p3.degree, 5);
        let err = p3.grid_error(|x| r(x.tanh()), 10_001);
        // |tanh(1) − (1 − 1/3 + 2/15)| is the worst point.
        let at_one = (1f64.tanh() - (1.0 - 1.0 / 3.0 + 2.0 / 15.0)).abs();
        assert!((err - at_one).abs() < 1e-12);
        assert!(err <= p3.certified_error);

        assert!(matches!(taylor_tanh(0), Err(Error::InvalidConfig(_))));
        assert!(matches!(taylor_tanh(MAX_TAYLOR_TERMS + 1), Err(Error::BernoulliOverflow(_))));
    }

    #[test]
    fn tail_bound_dominates_measured_error() {
        for d in 1..=12 {
            let p = taylor_tanh(d).unwrap();
            let e = p.grid_error(|x| r(x.tanh()), 10_000);
            assert!(e <= tanh_tail_bound(d), "d={d}: {e} > {}", tanh_tail_bound(d));
        }
    }

    #[test]
    fn minimal_terms_for_1e3() {
        let d = min_taylor_terms(1e-3);
        assert!(tanh_tail_bound(d) <= 1e-3 && tanh_tail_bound(d - 1) > 1e-3);
        let dm = min_taylor_terms_measured(1e-3, 2001).unwrap();
        assert!(dm <= d);
    }

    #[test]
    fn chebyshev_fit_examples() {
        let sq = chebyshev_fit(|x| x * x, 2, DEFAULT_GRID).unwrap();
        assert!(sq.certified_error < 1e-12);
        assert_eq!(sq.parity, Parity::Even);
        assert_eq!(sq.chebyshev[1], r(0.0));
        assert!((sq.chebyshev[0] - r(0.5)).norm() < 1e-15 && (sq.chebyshev[2] - r(0.5)).norm() < 1e-15);

        let th = chebyshev_fit(f64::tanh, 9, DEFAULT_GRID).unwrap();
        assert_eq!(th.parity, Parity::Odd);
        let taylor = taylor_tanh(5).unwrap();
        let taylor_err = taylor.grid_error(|x| r(x.tanh()), DEFAULT_GRID);
        assert!(th.certified_error < taylor_err);

        let abs = chebyshev_fit(f64::abs, 4, DEFAULT_GRID).unwrap();
        assert!(abs.certified_error > 1e-3 && abs.certified_error < 0.2);

        assert!(matches!(chebyshev_fit(|x| 1.0 / x, 3, 11), Err(Error::NonFinite(_))));
    }

    #[test]
    fn basis_conversion_agrees() {
        let p = taylor_tanh(6).unwrap();
        for x in uniform_grid(2001) {
            assert!((p.eval(x) - p.eval_monomial(x)).norm() < 1e-10);
        }
        let q = PolynomialSpec::from_monomial("mix", vec![C64::new(0.1, 0.2), r(-0.3), C64::new(0.0, 0.5)]);
        assert_eq!(q.parity, Parity::Mixed);
        let back = monomial_to_chebyshev(&q.monomial);
        for (a, b) in back.iter().zip(&q.chebyshev) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn rescale_examples() {
        let x = rescale_quarter(&PolynomialSpec::identity(), 1.0).unwrap();
        assert!((x.gamma - 0.25).abs() < 1e-15);
        let t3 = taylor_tanh(3).unwrap();
        let sup = t3.gamma;
        assert!((sup - (1.0 - 1.0 / 3.0 + 2.0 / 15.0)).abs() < 1e-12);
        // tanh(1) is below the sup of the truncated series, so it is rejected.
        assert!(matches!(rescale_quarter(&t3, 1f64.tanh()), Err(Error::GammaTooSmall { .. })));
        let q = rescale_quarter(&t3, sup).unwrap();
        assert!(q.grid_sup(DEFAULT_GRID) <= 0.25 + 1e-15);
        let z = rescale_quarter(&PolynomialSpec::zero(), 1.0).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn parity_split_examples() {
        let p = PolynomialSpec::from_real_monomial("x2+x", &[0.0, 1.0, 1.0]);
        let (e, o) = parity_split(&p);
        assert_eq!(e.monomial, vec![r(0.0), r(0.0), r(1.0)]);
        assert_eq!(o.monomial, vec![r(0.0), r(1.0)]);
        let t = taylor_tanh(4).unwrap();
        let (e, o) = parity_split(&t);
        assert!(e.is_zero());
        assert_eq!(o.chebyshev, t.chebyshev);
        let c = PolynomialSpec::constant(r(0.2));
        let (e, o) = parity_split(&c);
        assert_eq!(e.chebyshev, vec![r(0.2)]);
        assert!(o.is_zero());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p = taylor_tanh(3).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        let back: PolynomialSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back.chebyshev, p.chebyshev);
        assert_eq!(back.certified_error, p.certified_error);
        let from_mono: PolynomialSpec = serde_json::from_str(r#"{"monomial": [[0,0],[1,0]]}"#).unwrap();
        assert_eq!(from_mono.parity, Parity::Odd);
        assert!(serde_json::from_str::<PolynomialSpec>(r#"{"monomial": [[0,0],[1,0]], "parity": "EVEN"}"#).is_err());
        assert!(serde_json::from_str::<PolynomialSpec>(r#"{"monomial": [[1,0]], "bogus": 1}"#).is_err());
    }

    #[test]
    fn linear_amplifier_meets_its_contract() {
        let gain = 8.0 * 2f64.sqrt();
        let p = linear_amplifier(gain, 0.5, 1e-3, 120).unwrap();
        assert_eq!(p.parity, Parity::Odd);
        assert!(p.degree <= 31, "{}", p.degree);
        assert!(p.grid_sup(20001) <= 1.0);
        for i in 0..=500 {
            let x = 0.5 / gain * i as f64 / 500.0;
            assert!((p.eval(x).re - gain * x).abs() <= 1e-3);
            assert!((p.eval(-x).re + gain * x).abs() <= 1e-3);
        }
        assert!(matches!(linear_amplifier(gain, 0.05, 1e-8, 21), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn tanh_fits_meet_eps() {
        for eps in [1e-2, 1e-4] {
            let t = fit_tanh(FitMethod::Taylor, eps).unwrap();
            assert!(t.grid_error(|x| C64::new(x.tanh(), 0.0), 10_001) <= eps);
            let c = fit_tanh(FitMethod::Chebyshev, eps).unwrap();
            assert!(c.grid_error(|x| C64::new(x.tanh(), 0.0), 10_001) <= eps * 1.01);
            assert!(c.degree <= t.degree);
            assert_eq!(c.parity, Parity::Odd);
        }
    }
}
