//! Quadrature error quantities for mapped point sets.
//!
//! * [`delta_bruteforce`] evaluates δ_{j,r,l} from the points and weights.
//! * [`delta_net_bound`] is the a-priori bound on δ for shifted-net subcubes.
//! * [`wce_bound_construction`] sums the worst-case error bound of the
//!   construction term by term; [`bound_unit_cube`], [`bound_rational`] and
//!   [`bound_exponential`] are the closed forms for the three standard weight models.
//! * [`sigma_bound`] bounds the Walsh coefficient aggregates σ_{j,r,l}(f) of a
//!   function in the unit ball of the weighted space.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::digital_net::DigitalNet;
use crate::error::{Error, Result};
use crate::mapping::MappedPointSet;
use crate::partition::{Ambient, GeneralPartitionScheme, Interval};
use crate::walsh::cell_walsh_sums;

/// δ brute force accumulates over at most 2^24 frequency cells.
pub const MAX_DELTA_CELLS_LOG2: u32 = 24;

/// Largest |j|₁ reached when a custom weight's truncation tail is enumerated.
pub const CUSTOM_TAIL_MAX_J: i32 = 64;

const CUSTOM_TAIL_MAX_CUBES: u64 = 1 << 20;
const CUSTOM_TAIL_REL_TOL: f64 = 1e-12;

/// binom(n, k) in exact integer arithmetic, returned as a float.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        match acc.checked_mul(u128::from(n - i)) {
            Some(v) => acc = v / u128::from(i + 1),
            None => {
                let mut f = acc as f64;
                for q in i..k {
                    f = f * (n - q) as f64 / (q + 1) as f64;
                }
                return f;
            }
        }
    }
    acc as f64
}

/// User-supplied γ: receives u (zero-based coordinates, empty for γ_∅) and the cube J.
pub type GammaFn = Arc<dyn Fn(&[usize], &[Interval]) -> f64 + Send + Sync>;

/// The local weights γ_u(J).
#[derive(Clone)]
pub enum Gamma {
    /// 1 on [0,1)^s and 0 on every other cube.
    UnitCube,
    /// γ_u = Π_i (1 + min|endpoint|^{2α+1/2})^{-1} for u ≠ ∅ and
    /// γ_∅ = Π_i (1 + min|endpoint|^{α+1/2})^{-1}.
    Rational,
    /// γ_u = Π_i 2^{-min|endpoint|} for every u.
    Exponential,
    Custom(GammaFn),
}

impl fmt::Debug for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gamma::UnitCube => "UnitCube",
            Gamma::Rational => "Rational",
            Gamma::Exponential => "Exponential",
            Gamma::Custom(_) => "Custom",
        })
    }
}

/// Smoothness α together with local weights γ. α is the same for every u and J.
#[derive(Clone, Debug)]
pub struct WeightModel {
    alpha: f64,
    gamma: Gamma,
}

impl WeightModel {
    pub fn new(alpha: f64, gamma: Gamma) -> Result<Self> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::out_of_range("alpha", format!("{alpha} is outside (1/2, 1]")));
        }
        Ok(WeightModel { alpha, gamma })
    }

    pub fn unit_cube(alpha: f64) -> Result<Self> {
        Self::new(alpha, Gamma::UnitCube)
    }

    pub fn rational(alpha: f64) -> Result<Self> {
        Self::new(alpha, Gamma::Rational)
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        Self::new(alpha, Gamma::Exponential)
    }

    pub fn custom<F>(alpha: f64, gamma: F) -> Result<Self>
    where
        F: Fn(&[usize], &[Interval]) -> f64 + Send + Sync + 'static,
    {
        Self::new(alpha, Gamma::Custom(Arc::new(gamma)))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn flavor(&self) -> &Gamma {
        &self.gamma
    }

    /// γ_u(J); an empty `u` gives γ_∅(J).
    pub fn gamma(&self, u: &[usize], cube: &[Interval]) -> f64 {
        match &self.gamma {
            Gamma::Custom(g) => g(u, cube),
            _ => cube.iter().map(|iv| self.product_factor(u.is_empty(), iv)).product(),
        }
    }

    fn is_product(&self) -> bool {
        !matches!(self.gamma, Gamma::Custom(_))
    }

    /// One coordinate's factor of a product-form γ.
    fn product_factor(&self, empty: bool, iv: &Interval) -> f64 {
        match self.gamma {
            Gamma::UnitCube => f64::from(iv.left() == 0.0 && iv.width() == 1.0),
            Gamma::Rational => {
                let p = if empty { self.alpha + 0.5 } else { 2.0 * self.alpha + 0.5 };
                1.0 / (1.0 + iv.min_abs_endpoint().powf(p))
            }
            Gamma::Exponential => (-iv.min_abs_endpoint()).exp2(),
            Gamma::Custom(_) => unreachable!("custom weights are not product-form"),
        }
    }
}

/// Indices (j, r, l) of one δ or σ value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaQuery {
    pub j: Vec<i32>,
    pub r: Vec<u32>,
    pub l: Vec<i64>,
}

impl DeltaQuery {
    pub fn new(j: Vec<i32>, r: Vec<u32>, l: Vec<i64>) -> Result<Self> {
        if r.len() != j.len() || l.len() != j.len() {
            return Err(Error::DimensionMismatch {
                expected: j.len(),
                found: if r.len() != j.len() { r.len() } else { l.len() },
            });
        }
        Ok(DeltaQuery { j, r, l })
    }

    pub fn dim(&self) -> usize {
        self.j.len()
    }

    /// |r|₁.
    pub fn r1(&self) -> u32 {
        self.r.iter().sum()
    }

    /// u_r = {i : r_i ≠ 0}, zero-based.
    pub fn u_r(&self) -> Vec<usize> {
        (0..self.r.len()).filter(|&i| self.r[i] != 0).collect()
    }
}

/// The largest |r|₁ that [`delta_bruteforce`] accepts in base b.
pub fn delta_box_limit(b: u32) -> u32 {
    (f64::from(MAX_DELTA_CELLS_LOG2) / f64::from(b).log2()).floor() as u32
}

/// floor(b^r (b^{-j} z - l)) for z = num · b^exp, or None when z lies outside the support.
fn exact_cell(num: i128, exp: i32, j: i32, l: i64, r: u32, b: u32) -> Result<Option<i128>> {
    let bb = i128::from(b);
    let e = i64::from(exp) - i64::from(j) + i64::from(r);
    let scaled = if e >= 0 {
        let p = u32::try_from(e).ok().and_then(|e| bb.checked_pow(e));
        match p.and_then(|p| num.checked_mul(p)) {
            Some(v) => v,
            None if num == 0 => 0,
            None => return Err(Error::out_of_range("point scale", format!("{num}·{b}^{e} overflows"))),
        }
    } else {
        match u32::try_from(-e).ok().and_then(|e| bb.checked_pow(e)) {
            Some(p) => num.div_euclid(p),
            None => {
                if num >= 0 {
                    0
                } else {
                    -1
                }
            }
        }
    };
    let width = bb.pow(r);
    let offset = i128::from(l)
        .checked_mul(width)
        .ok_or_else(|| Error::out_of_range("translation", format!("{l}·{b}^{r} overflows")))?;
    let cell = scaled - offset;
    Ok((0..width).contains(&cell).then_some(cell))
}

/// δ_{j,r,l}: the ℓ2 norm over k in the r-box of Σ_n λ_n w_{j,k,l}(x_n) − ∫ w_{j,k,l}.
///
/// Points are placed in cells exactly from their b-adic labels, so the
/// partition must be b-adic.
pub fn delta_bruteforce(ps: &MappedPointSet, q: &DeltaQuery) -> Result<f64> {
    let s = ps.dim();
    if q.dim() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: q.dim(),
        });
    }
    let scheme = ps.scheme();
    if !scheme.is_badic() {
        return Err(Error::Precondition("δ needs a partition made of b-adic intervals".into()));
    }
    let b = scheme.base();
    let limit = delta_box_limit(b);
    if q.r1() > limit {
        return Err(Error::BoxTooLarge { r1: q.r1(), limit });
    }
    let bu = b as usize;
    let sizes: Vec<usize> = q.r.iter().map(|&ri| bu.pow(ri)).collect();
    let mut hist = vec![Complex64::new(0.0, 0.0); sizes.iter().product()];
    'points: for n in 0..ps.len() {
        let mut idx = 0usize;
        for i in 0..s {
            let (num, exp) = scheme.coords()[i]
                .exact_point(ps.label(n, i))
                .ok_or_else(|| Error::Precondition("label without an exact b-adic position".into()))?;
            match exact_cell(num, exp, q.j[i], q.l[i], q.r[i], b)? {
                Some(c) => idx = idx * sizes[i] + c as usize,
                None => continue 'points,
            }
        }
        hist[idx] += ps.weights()[n];
    }
    let sums = cell_walsh_sums(hist, &q.r, b, false);
    let jsum: i32 = q.j.iter().sum();
    let half = f64::from(b).powf(f64::from(jsum) / 2.0);
    let mut k = vec![0usize; s];
    let mut total = 0.0;
    for (flat, val) in sums.iter().enumerate() {
        let mut rest = flat;
        for i in (0..s).rev() {
            k[i] = rest % sizes[i];
            rest /= sizes[i];
        }
        let in_box = k.iter().zip(&q.r).all(|(&ki, &ri)| ri == 0 || ki >= bu.pow(ri - 1));
        if !in_box {
            continue;
        }
        let integral = if k.iter().all(|&ki| ki == 0) { half } else { 0.0 };
        total += (val / half - integral).norm_sqr();
    }
    Ok(total.sqrt())
}

/// Bound on δ_{j,r,l} for a subcube holding a shifted (t, m, s)-net:
/// 0 when |r|₁ <= m − t, else (1 − 1/b)^{|u_r|/2} b^{|j|₁/2} b^{(|r|₁ − m + t)/2}.
pub fn delta_net_bound(j: &[i32], r: &[u32], m: i64, t: u32, b: u32) -> f64 {
    let r1: i64 = r.iter().map(|&ri| i64::from(ri)).sum();
    let excess = r1 - m + i64::from(t);
    if excess <= 0 {
        return 0.0;
    }
    let bf = f64::from(b);
    let u = r.iter().filter(|&&ri| ri != 0).count() as f64;
    let jsum: i32 = j.iter().sum();
    (1.0 - 1.0 / bf).powf(u / 2.0) * bf.powf(f64::from(jsum) / 2.0) * bf.powf(excess as f64 / 2.0)
}

/// A bound on δ_{j,r,l} that holds for every shifted (t, m, s)-net subcube:
/// (b−1)^{|u_r|/2} b^{|j|₁/2} b^{max(0, |r|₁ − |u_r| − m + t)/2}, and 0 when |r|₁ <= m − t.
///
/// The r-box holds at most (b−1)^{|u_r|} b^{max(0, |r|₁ − |u_r| − m + t)} dual vectors, each
/// contributing b^{|j|₁} to δ². This agrees with [`delta_net_bound`] once
/// |r|₁ >= m − t + |u_r| and exceeds it for m − t < |r|₁ < m − t + |u_r|, where a single
/// dual vector already gives δ = b^{|j|₁/2}.
pub fn delta_net_bound_valid(j: &[i32], r: &[u32], m: i64, t: u32, b: u32) -> f64 {
    let r1: i64 = r.iter().map(|&ri| i64::from(ri)).sum();
    if r1 - m + i64::from(t) <= 0 {
        return 0.0;
    }
    let bf = f64::from(b);
    let u = r.iter().filter(|&&ri| ri != 0).count() as i64;
    let free = (r1 - u - m + i64::from(t)).max(0);
    let jsum: i32 = j.iter().sum();
    (bf - 1.0).powf(u as f64 / 2.0) * bf.powf(f64::from(jsum) / 2.0) * bf.powf(free as f64 / 2.0)
}

/// C_{α,k} b^{-α e} binom(e + k, k − 1) with C_{α,k} = (b−1)^{(α−1/2)k} b^{k/2} b^{1/2−α}.
fn net_term(b: u32, alpha: f64, k: usize, excess: u32) -> f64 {
    let bf = f64::from(b);
    let kf = k as f64;
    let c = (bf - 1.0).powf((alpha - 0.5) * kf) * bf.powf(kf / 2.0) * bf.powf(0.5 - alpha);
    c * bf.powf(-alpha * f64::from(excess)) * binomial(u64::from(excess) + k as u64, k as u64 - 1)
}

/// The unit-cube closed form b^{-α(m−t)} Σ_{u≠∅} C_{α,|u|} binom(m − t + |u|, |u| − 1).
pub fn bound_unit_cube(b: u32, m: u32, t: u32, s: usize, alpha: f64) -> Result<f64> {
    WeightModel::unit_cube(alpha)?;
    if m < t || s == 0 || b < 2 {
        return Err(Error::Precondition(format!("need m >= t, s >= 1, b >= 2 (m={m}, t={t}, s={s}, b={b})")));
    }
    let mut acc = 0.0;
    for k in 1..=s {
        acc += binomial(s as u64, k as u64) * net_term(b, alpha, k, m - t);
    }
    Ok(acc)
}

/// Which constant multiplies the net part of the rational-decay closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RationalConstant {
    /// (1 + 2^{3/2})^s, the default.
    Conservative,
    /// (1 + 2^{1/2})^s.
    Tight,
}

/// 2^{-α(m−t)} binom(m−t−2s, s)² 2^{s(3α+2)} (2^{-α} + 2(1 + 2^{3/2})^s) for b = 2.
pub fn bound_rational(m: u32, t: u32, s: usize, alpha: f64) -> Result<f64> {
    bound_rational_variant(m, t, s, alpha, RationalConstant::Conservative)
}

pub fn bound_rational_variant(m: u32, t: u32, s: usize, alpha: f64, constant: RationalConstant) -> Result<f64> {
    WeightModel::rational(alpha)?;
    if s < 2 || u64::from(m) <= u64::from(t) + 3 * s as u64 {
        return Err(Error::Precondition(format!("need s >= 2 and m > t + 3s (m={m}, t={t}, s={s})")));
    }
    let mt = u64::from(m - t);
    let sf = s as f64;
    let binom = binomial(mt - 2 * s as u64, s as u64);
    let c = match constant {
        RationalConstant::Conservative => 1.0 + 2f64.powf(1.5),
        RationalConstant::Tight => 1.0 + 2f64.sqrt(),
    };
    Ok((-alpha * mt as f64).exp2()
        * binom
        * binom
        * (sf * (3.0 * alpha + 2.0)).exp2()
        * ((-alpha).exp2() + 2.0 * c.powi(s as i32)))
}

/// 2^{3s−1} 2^{-(m−t)} binom(m−t, s−1) + 2^{s(2α+1)} 2^{-α(m−t)} binom(m−t−s, s)² for b = 2.
pub fn bound_exponential(m: u32, t: u32, s: usize, alpha: f64) -> Result<f64> {
    WeightModel::exponential(alpha)?;
    if s < 2 || u64::from(m) <= u64::from(t) + 2 * s as u64 {
        return Err(Error::Precondition(format!("need s >= 2 and m > t + 2s (m={m}, t={t}, s={s})")));
    }
    let mt = u64::from(m - t);
    let sf = s as f64;
    let first = (3.0 * sf - 1.0).exp2() * (-(mt as f64)).exp2() * binomial(mt, s as u64 - 1);
    let b2 = binomial(mt - s as u64, s as u64);
    let second = (sf * (2.0 * alpha + 1.0)).exp2() * (-alpha * mt as f64).exp2() * b2 * b2;
    Ok(first + second)
}

/// The two parts of the construction's worst-case error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WceBound {
    /// Σ over cubes of D outside F of b^{|j|₁/2} γ_∅(J).
    pub truncation: f64,
    /// Σ over u ≠ ∅ and F of γ_u(J) C b^{-α(m_d − t)} binom(m_d − t + |u|, |u| − 1).
    pub net: f64,
    /// |F|.
    pub occupied: usize,
}

impl WceBound {
    pub fn total(&self) -> f64 {
        self.truncation + self.net
    }
}

/// Visits every d (zero-based) of the selected cubes with m_d >= t, passing m_d − t.
fn for_each_occupied<F: FnMut(&[usize], u32)>(scheme: &GeneralPartitionScheme, t: u32, mut f: F) {
    let m = scheme.m();
    if t > m {
        return;
    }
    let deficits: Vec<Vec<u32>> = scheme
        .coords()
        .iter()
        .map(|p| p.intervals().iter().map(|iv| m - iv.m_d).collect())
        .collect();
    let mut d = vec![0usize; scheme.dim()];
    fn rec<F: FnMut(&[usize], u32)>(i: usize, budget: u32, deficits: &[Vec<u32>], d: &mut Vec<usize>, f: &mut F) {
        if i == deficits.len() {
            f(d, budget);
            return;
        }
        for (k, &def) in deficits[i].iter().enumerate() {
            if def <= budget {
                d[i] = k;
                rec(i + 1, budget - def, deficits, d, f);
            }
        }
    }
    rec(0, m - t, &deficits, &mut d, &mut f);
}

fn cube_of(scheme: &GeneralPartitionScheme, d: &[usize]) -> Vec<Interval> {
    scheme
        .coords()
        .iter()
        .zip(d)
        .map(|(p, &di)| p.intervals()[di].interval)
        .collect()
}

/// j of a b-adic interval, 0 otherwise.
fn exponent(iv: &Interval) -> i32 {
    iv.as_badic().map_or(0, |x| x.j)
}

/// Worst-case error bound of the mapped net over the model's unit ball.
pub fn wce_bound_construction(scheme: &GeneralPartitionScheme, net: &DigitalNet, model: &WeightModel) -> Result<WceBound> {
    if scheme.base() != net.base() || scheme.m() != net.m() || scheme.dim() != net.dim() {
        return Err(Error::Precondition(format!(
            "scheme (b={}, m={}, s={}) does not match the net (b={}, m={}, s={})",
            scheme.base(),
            scheme.m(),
            scheme.dim(),
            net.base(),
            net.m(),
            net.dim()
        )));
    }
    if !scheme.is_badic() {
        return Err(Error::Precondition("the bound needs a partition made of b-adic intervals".into()));
    }
    let s = scheme.dim();
    if !model.is_product() && s > 20 {
        return Err(Error::out_of_range("dimension", format!("s = {s} is too large to enumerate subsets")));
    }
    let b = scheme.base();
    let bf = f64::from(b);
    let alpha = model.alpha();
    let t = net.t();

    let mut net_part = 0.0;
    let mut occupied = 0usize;
    let mut occupied_cubes = Vec::new();
    let mut per_k = vec![0.0; s + 1];
    for_each_occupied(scheme, t, |d, excess| {
        occupied += 1;
        let cube = cube_of(scheme, d);
        let x: Vec<f64> = cube.iter().map(|iv| bf.powf((alpha + 0.5) * f64::from(exponent(iv)))).collect();
        per_k.iter_mut().for_each(|v| *v = 0.0);
        if model.is_product() {
            // γ_u does not depend on u ≠ ∅, so the subset sum is γ times e_k(x)
            per_k[0] = 1.0;
            for &xi in &x {
                for k in (1..=s).rev() {
                    per_k[k] += per_k[k - 1] * xi;
                }
            }
            let g = model.gamma(&[0], &cube);
            per_k.iter_mut().for_each(|v| *v *= g);
        } else {
            let mut u = Vec::with_capacity(s);
            for mask in 1u32..(1 << s) {
                u.clear();
                u.extend((0..s).filter(|&i| mask >> i & 1 == 1));
                let weight: f64 = u.iter().map(|&i| x[i]).product();
                per_k[u.len()] += model.gamma(&u, &cube) * weight;
            }
        }
        for k in 1..=s {
            net_part += per_k[k] * net_term(b, alpha, k, excess);
        }
        occupied_cubes.push(d.to_vec());
    });

    let truncation = truncation_term(scheme, model, &occupied_cubes)?;
    Ok(WceBound {
        truncation,
        net: net_part,
        occupied,
    })
}

fn truncation_term(scheme: &GeneralPartitionScheme, model: &WeightModel, occupied: &[Vec<usize>]) -> Result<f64> {
    let s = scheme.dim();
    match model.flavor() {
        Gamma::UnitCube => {
            let unit_in_d = scheme.ambient().iter().zip(scheme.coords()).all(|(amb, p)| {
                amb.interval(1).is_some() || p.intervals().iter().any(|iv| is_unit(&iv.interval))
            });
            let unit_in_f = occupied
                .iter()
                .any(|d| cube_of(scheme, d).iter().all(is_unit));
            Ok(if unit_in_d && !unit_in_f { 1.0 } else { 0.0 })
        }
        Gamma::Rational | Gamma::Exponential => {
            let mut full = 1.0;
            for amb in scheme.ambient() {
                full *= ambient_series(amb, model, scheme.base())?;
            }
            let bf = f64::from(scheme.base());
            let terms: Vec<f64> = occupied
                .iter()
                .map(|d| {
                    cube_of(scheme, d)
                        .iter()
                        .map(|iv| bf.powf(f64::from(exponent(iv)) / 2.0) * model.product_factor(true, iv))
                        .product()
                })
                .collect();
            let inside = neumaier_sum(terms.iter().copied());
            debug_assert!(occupied.iter().all(|d| d.len() == s));
            // a few ulps of the full product keep the difference an upper bound after rounding
            Ok((full - inside + 8.0 * f64::EPSILON * full).max(0.0))
        }
        Gamma::Custom(_) => custom_truncation(scheme, model, occupied),
    }
}

fn is_unit(iv: &Interval) -> bool {
    iv.left() == 0.0 && iv.width() == 1.0
}

/// Compensated summation in iteration order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Upper bound on Σ_{J ∈ ambient} b^{j/2} γ_∅,i(J) for a product-form model.
fn ambient_series(amb: &Ambient, model: &WeightModel, b: u32) -> Result<f64> {
    let alpha = model.alpha();
    let at = |x: f64| model.product_factor(true, &Interval::general(x, x + 1.0).expect("finite interval"));
    match (amb, model.flavor()) {
        (Ambient::Unit, Gamma::Exponential) => Ok(4.0),
        (Ambient::Unit, Gamma::Rational) => {
            // pairs [n, n+1) and [-n-1, -n) share min|endpoint| = n
            const N: u32 = 1 << 20;
            let p = alpha + 0.5;
            let head = neumaier_sum((1..=N).map(|n| 1.0 / (1.0 + f64::from(n).powf(p))));
            // 1/(1+x^p) is convex for x >= 1, so the tail is below ∫_{N+1/2}^∞ x^{-p}
            let tail = (f64::from(N) + 0.5).powf(1.0 - p) / (p - 1.0);
            Ok(2.0 * at(0.0) + 2.0 * (head + tail))
        }
        (Ambient::Dyadic, Gamma::Rational) | (Ambient::Dyadic, Gamma::Exponential) => {
            if b != 2 {
                return Err(Error::Precondition("the dyadic ambient partition is base 2".into()));
            }
            // [0,1), [-1,0), then [2^j, 2^{j+1}) and its mirror for j >= 0
            let term = |j: i32| {
                let x = 2f64.powi(j);
                let iv = Interval::badic(2, j, 1);
                debug_assert_eq!(iv.min_abs_endpoint(), x);
                2f64.powf(f64::from(j) / 2.0) * model.product_factor(true, &iv)
            };
            const JMAX: i32 = 256;
            let head = neumaier_sum((0..JMAX).map(term));
            let tail = match model.flavor() {
                // 2^{j/2} / (1 + 2^{j(α+1/2)}) <= 2^{-αj}
                Gamma::Rational => (-alpha * f64::from(JMAX)).exp2() / (1.0 - (-alpha).exp2()),
                // 2^{j/2 - 2^j} <= 2^{-j}
                _ => (1.0 - f64::from(JMAX)).exp2(),
            };
            Ok(2.0 * at(0.0) + 2.0 * (head + tail))
        }
        (amb, flavor) => Err(Error::Precondition(format!(
            "no closed-form truncation tail for {flavor:?} weights on the {amb:?} ambient partition"
        ))),
    }
}

/// Σ over D \ F of b^{|j|₁/2} γ_∅(J) by enumeration of growing boxes of ambient indices.
fn custom_truncation(scheme: &GeneralPartitionScheme, model: &WeightModel, occupied: &[Vec<usize>]) -> Result<f64> {
    let s = scheme.dim();
    let b = scheme.base();
    let bf = f64::from(b);
    for amb in scheme.ambient() {
        if amb.interval(1).is_none() {
            return Err(Error::UnsummableTail(format!(
                "the {amb:?} ambient partition cannot be enumerated"
            )));
        }
    }
    let occupied: std::collections::HashSet<Vec<u64>> =
        occupied.iter().map(|d| d.iter().map(|&x| x as u64 + 1).collect()).collect();
    let term = |d: &[u64]| -> f64 {
        let cube: Vec<Interval> = scheme
            .ambient()
            .iter()
            .zip(d)
            .map(|(amb, &di)| {
                let x = amb.interval(di).expect("enumerable ambient");
                Interval::badic(b, x.j, x.l)
            })
            .collect();
        let jsum: i32 = cube.iter().map(exponent).sum();
        bf.powf(f64::from(jsum) / 2.0) * model.gamma(&[], &cube)
    };
    let mut total = 0.0;
    let mut prev_k = 0u64;
    let mut k = 8u64;
    loop {
        let reach = scheme
            .ambient()
            .iter()
            .map(|amb| amb.interval(k).map_or(0, |x| x.j))
            .max()
            .unwrap_or(0);
        if reach > CUSTOM_TAIL_MAX_J || k.checked_pow(s as u32).map_or(true, |n| n > CUSTOM_TAIL_MAX_CUBES) {
            return Err(Error::UnsummableTail(format!(
                "custom weights have not decayed below the relative tolerance {CUSTOM_TAIL_REL_TOL:e} within the enumeration cap"
            )));
        }
        let mut shell = Vec::new();
        for_each_shell_vector(s, prev_k, k, |d| {
            if !occupied.contains(d) {
                shell.push(term(d));
            }
        });
        let shell_sum = neumaier_sum(shell);
        total += shell_sum;
        if prev_k > 0 && shell_sum <= CUSTOM_TAIL_REL_TOL * total.max(1.0) {
            return Ok(total);
        }
        prev_k = k;
        k += 8;
    }
}

/// Visits each d in [1, hi]^s with max_i d_i > lo exactly once.
fn for_each_shell_vector<F: FnMut(&[u64])>(s: usize, lo: u64, hi: u64, mut f: F) {
    // split by the first coordinate exceeding lo
    for first in 0..s {
        if first > 0 && lo == 0 {
            break;
        }
        let range = |q: usize| -> (u64, u64) {
            match q.cmp(&first) {
                std::cmp::Ordering::Less => (1, lo),
                std::cmp::Ordering::Equal => (lo + 1, hi),
                std::cmp::Ordering::Greater => (1, hi),
            }
        };
        let mut d: Vec<u64> = (0..s).map(|q| range(q).0).collect();
        loop {
            f(&d);
            let mut i = s;
            let done = loop {
                if i == 0 {
                    break true;
                }
                i -= 1;
                d[i] += 1;
                if d[i] <= range(i).1 {
                    break false;
                }
                d[i] = range(i).0;
            };
            if done {
                break;
            }
        }
    }
}

/// min of the two coefficient bounds for σ_{j,r,l}(f) with V(f) = 1:
/// (i) for r ≠ 0, (b−1)^{(α−1/2)|u|} b^{-α|r|₁} b^{α Σ_{u} j_i} b^{-Σ_{i∉u} j_i/2} γ_u(J);
/// (ii) b^{|u|} 2^{|u|} γ_∅(J), where u = u_r and J is the box at (j, l).
pub fn sigma_bound(base: u32, q: &DeltaQuery, model: &WeightModel) -> Result<f64> {
    if base < 2 {
        return Err(Error::out_of_range("base", format!("b = {base}")));
    }
    let cube: Vec<Interval> = q.j.iter().zip(&q.l).map(|(&j, &l)| Interval::badic(base, j, l)).collect();
    let u = q.u_r();
    let bf = f64::from(base);
    let uf = u.len() as f64;
    let second = bf.powf(uf) * 2f64.powf(uf) * model.gamma(&[], &cube);
    if u.is_empty() {
        return Ok(second);
    }
    let alpha = model.alpha();
    let in_u: i32 = u.iter().map(|&i| q.j[i]).sum();
    let out_u: i32 = q.j.iter().sum::<i32>() - in_u;
    let first = (bf - 1.0).powf((alpha - 0.5) * uf)
        * bf.powf(-alpha * f64::from(q.r1()))
        * bf.powf(alpha * f64::from(in_u))
        * bf.powf(-f64::from(out_u) / 2.0)
        * model.gamma(&u, &cube);
    Ok(first.min(second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::map_net;
    use crate::partition::SchemeKind;
    use crate::walsh::{sigma, wal_cell, w_eval, WalshIndex};
    use proptest::prelude::*;

    fn mapped(kind: SchemeKind, s: usize, m: u32) -> MappedPointSet {
        let net = DigitalNet::sobol(s, m).unwrap();
        map_net(&net, &GeneralPartitionScheme::uniform(kind, s, 2, m).unwrap()).unwrap()
    }

    fn location(ps: &MappedPointSet, d: &[u32]) -> (Vec<i32>, Vec<i64>) {
        d.iter()
            .enumerate()
            .map(|(i, &di)| {
                let x = ps.scheme().coords()[i].intervals()[di as usize].interval.as_badic().unwrap();
                (x.j, x.l)
            })
            .unzip()
    }

    fn boxes(s: usize, max_r1: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut r = vec![0u32; s];
        loop {
            if r.iter().sum::<u32>() <= max_r1 {
                out.push(r.clone());
            }
            let mut i = s;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                r[i] += 1;
                if r[i] <= max_r1 {
                    break;
                }
                r[i] = 0;
            }
        }
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(60, 30), 118264581564861424.0);
        assert_eq!(binomial(10, 0), 1.0);
    }

    #[test]
    fn closed_form_values() {
        assert!((bound_rational(20, 0, 2, 1.0).unwrap() - 419.2552757669732).abs() < 1e-9);
        let tight = bound_rational_variant(20, 0, 2, 1.0, RationalConstant::Tight).unwrap();
        assert!((tight - 170.95576288348659).abs() < 1e-9);
        assert_eq!(bound_exponential(5, 0, 2, 1.0).unwrap(), 23.0);
        assert!((bound_exponential(7, 2, 2, 0.75).unwrap() - 26.40572807004898).abs() < 1e-12);
        // s = 1, b = 2, m = t: C_{α,1} binom(1, 0) = 1
        assert!((bound_unit_cube(2, 3, 3, 1, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_preconditions() {
        assert!(bound_rational(6, 0, 2, 1.0).is_err());
        assert!(bound_rational(7, 0, 2, 1.0).is_ok());
        assert!(bound_rational(20, 0, 1, 1.0).is_err());
        assert!(bound_exponential(4, 0, 2, 1.0).is_err());
        assert!(bound_exponential(5, 0, 2, 0.5).is_err());
        assert!(bound_unit_cube(2, 2, 3, 2, 1.0).is_err());
        assert!(WeightModel::rational(1.01).is_err());
    }

    #[test]
    fn closed_forms_eventually_decrease() {
        for s in 2..=4usize {
            for alpha in [0.75, 1.0] {
                let rat: Vec<f64> = (1..=60).map(|k| bound_rational(3 * s as u32 + k, 0, s, alpha).unwrap()).collect();
                let exp: Vec<f64> = (1..=60).map(|k| bound_exponential(2 * s as u32 + k, 0, s, alpha).unwrap()).collect();
                for series in [rat, exp] {
                    let peak = (0..series.len()).max_by(|&a, &c| series[a].total_cmp(&series[c])).unwrap();
                    assert!(peak < 40);
                    assert!(series[peak..].windows(2).all(|w| w[1] <= w[0]));
                    assert!(*series.last().unwrap() < series[peak] * 1e-3);
                }
            }
        }
    }

    #[test]
    fn delta_net_bound_examples() {
        assert_eq!(delta_net_bound(&[0, 0], &[2, 1], 5, 2, 2), 0.0);
        assert!((delta_net_bound(&[0], &[4], 5, 2, 2) - 1.0).abs() < 1e-15);
        // (1/2)^{1/2} · 2^{2/2} · 2^{1/2}
        assert!((delta_net_bound(&[2], &[1], 0, 0, 2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn valid_bound_matches_literal_bound_outside_the_window() {
        for m in 0..6i64 {
            for r in boxes(3, 9) {
                let r1 = i64::from(r.iter().sum::<u32>());
                let u = r.iter().filter(|&&x| x != 0).count() as i64;
                let shown = delta_net_bound(&[1, 0, -1], &r, m, 1, 2);
                let valid = delta_net_bound_valid(&[1, 0, -1], &r, m, 1, 2);
                if r1 - m + 1 >= u {
                    assert!((shown - valid).abs() <= 1e-12 * valid);
                } else {
                    assert!(valid >= shown);
                }
            }
        }
    }

    /// A subcube where a single dual vector sits in a box with m − t < |r|₁ < m − t + |u_r|.
    #[test]
    fn literal_bound_fails_inside_the_window() {
        let ps = mapped(SchemeKind::Dyadic, 2, 9);
        let c = ps.occupied_subcubes().iter().find(|c| c.d == vec![0, 0]).unwrap();
        assert_eq!(c.m_d, 5);
        let q = DeltaQuery::new(vec![0, 0], vec![1, 5], vec![0, 0]).unwrap();
        let delta = delta_bruteforce(&ps, &q).unwrap();
        assert!((delta - 1.0).abs() < 1e-12);
        assert!(delta > delta_net_bound(&q.j, &q.r, c.m_d, 0, 2));
        assert!(delta <= delta_net_bound_valid(&q.j, &q.r, c.m_d, 0, 2) + 1e-12);
    }

    #[test]
    fn delta_zero_frequency_identities() {
        let ps = mapped(SchemeKind::Dyadic, 2, 8);
        let mut checked = 0;
        ps.for_each_selected_subcube(|c| {
            let (j, l) = location(&ps, &c.d);
            let q = DeltaQuery::new(j.clone(), vec![0, 0], l).unwrap();
            let delta = delta_bruteforce(&ps, &q).unwrap();
            if c.count > 0 {
                assert!(delta <= 1e-12, "{:?}: {delta}", c.d);
            } else {
                let jsum: i32 = j.iter().sum();
                assert_eq!(delta, 2f64.powf(f64::from(jsum) / 2.0));
            }
            checked += 1;
        });
        assert_eq!(checked, 14 * 14);
        // far away from every point
        let q = DeltaQuery::new(vec![3, -1], vec![0, 0], vec![50, 7]).unwrap();
        assert_eq!(delta_bruteforce(&ps, &q).unwrap(), 2f64.powf(1.0));
    }

    #[test]
    fn delta_vanishes_on_shifted_nets() {
        for kind in [SchemeKind::Dyadic, SchemeKind::Unit] {
            let ps = mapped(kind, 2, 9);
            let t = ps.net().t();
            for c in ps.occupied_subcubes() {
                if c.m_d < i64::from(t) {
                    continue;
                }
                let (j, l) = location(&ps, &c.d);
                for r in boxes(2, (c.m_d as u32 + 2).min(12)) {
                    let q = DeltaQuery::new(j.clone(), r.clone(), l.clone()).unwrap();
                    let delta = delta_bruteforce(&ps, &q).unwrap();
                    let bound = delta_net_bound_valid(&j, &r, c.m_d, t, 2);
                    assert!(delta <= bound + 1e-10, "{kind:?} {:?} r={r:?}: {delta} > {bound}", c.d);
                    if q.r1() as i64 <= c.m_d - i64::from(t) {
                        assert!(delta <= 1e-12);
                    }
                }
            }
        }
    }

    /// δ² from the pair formula with digitwise differences of rescaled points.
    fn delta_pair_sum(ps: &MappedPointSet, d: &[u32], r: &[u32]) -> f64 {
        let idx = ps.occupied_subcubes().iter().position(|c| c.d == d).unwrap();
        let members = ps.members(idx);
        let (j, l) = location(ps, d);
        let s = ps.dim();
        let cells: Vec<Vec<u64>> = members
            .iter()
            .map(|&n| {
                (0..s)
                    .map(|i| {
                        let x = ps.point(n as usize)[i] * 2f64.powi(-j[i]) - l[i] as f64;
                        (x * 2f64.powi(r[i] as i32)).floor() as u64
                    })
                    .collect()
            })
            .collect();
        let mut total = 0.0;
        for a in &cells {
            for c in &cells {
                let mut per_coord = 1.0;
                for i in 0..s {
                    let lo = if r[i] == 0 { 0 } else { 1u64 << (r[i] - 1) };
                    let diff = a[i] ^ c[i];
                    per_coord *= (lo..1u64 << r[i]).map(|k| wal_cell(k, diff, r[i], 2).re).sum::<f64>();
                }
                total += per_coord;
            }
        }
        let jsum: i32 = j.iter().sum();
        2f64.powi(jsum) * total / (members.len() as f64).powi(2)
    }

    #[test]
    fn delta_matches_pair_sum_oracle() {
        let ps = mapped(SchemeKind::Dyadic, 2, 7);
        for c in ps.occupied_subcubes().iter().take(12) {
            let (j, l) = location(&ps, &c.d);
            for r in boxes(2, 5) {
                if r.iter().all(|&x| x == 0) {
                    continue;
                }
                let q = DeltaQuery::new(j.clone(), r.clone(), l.clone()).unwrap();
                let brute = delta_bruteforce(&ps, &q).unwrap().powi(2);
                let pairs = delta_pair_sum(&ps, &c.d, &r);
                assert!((brute - pairs).abs() <= 1e-10 * (1.0 + pairs.abs()), "{:?} {r:?}: {brute} vs {pairs}", c.d);
            }
        }
    }

    #[test]
    fn delta_rejects_large_boxes_and_non_badic_sets() {
        let ps = mapped(SchemeKind::Dyadic, 2, 5);
        let q = DeltaQuery::new(vec![0, 0], vec![13, 12], vec![0, 0]).unwrap();
        assert!(matches!(delta_bruteforce(&ps, &q), Err(Error::BoxTooLarge { .. })));
        let ps = mapped(SchemeKind::Erfinv { x_scale: 6.0 }, 2, 5);
        let q = DeltaQuery::new(vec![0, 0], vec![1, 0], vec![0, 0]).unwrap();
        assert!(delta_bruteforce(&ps, &q).is_err());
    }

    #[test]
    fn unit_cube_bound_matches_closed_form_exactly() {
        for s in 1..=4 {
            for m in [4u32, 8, 12] {
                let net = DigitalNet::sobol(s, m).unwrap();
                let scheme = GeneralPartitionScheme::uniform(SchemeKind::Trivial, s, 2, m).unwrap();
                for alpha in [0.6, 0.75, 1.0] {
                    let model = WeightModel::unit_cube(alpha).unwrap();
                    let wce = wce_bound_construction(&scheme, &net, &model).unwrap();
                    assert_eq!(wce.truncation, 0.0);
                    assert_eq!(wce.occupied, 1);
                    assert_eq!(wce.total(), bound_unit_cube(2, m, net.t(), s, alpha).unwrap());
                }
            }
        }
    }

    #[test]
    fn decaying_models_stay_below_closed_forms() {
        for s in [2usize, 3] {
            for k in 1..=6u32 {
                let m = 3 * s as u32 + k + 1;
                let net = DigitalNet::sobol(s, m).unwrap();
                let t = net.t();
                let rat = GeneralPartitionScheme::uniform(SchemeKind::Dyadic, s, 2, m).unwrap();
                let exp = GeneralPartitionScheme::uniform(SchemeKind::Unit, s, 2, m).unwrap();
                let rmodel = WeightModel::rational(1.0).unwrap();
                let emodel = WeightModel::exponential(1.0).unwrap();
                let r = wce_bound_construction(&rat, &net, &rmodel).unwrap();
                let e = wce_bound_construction(&exp, &net, &emodel).unwrap();
                if m > t + 3 * s as u32 {
                    assert!(r.total() <= bound_rational(m, t, s, 1.0).unwrap());
                }
                if m > t + 2 * s as u32 {
                    assert!(e.total() <= bound_exponential(m, t, s, 1.0).unwrap());
                }
                assert!(r.truncation > 0.0 && e.truncation > 0.0);
            }
        }
    }

    #[test]
    fn product_tail_agrees_with_enumeration() {
        let m = 8;
        let net = DigitalNet::sobol(2, m).unwrap();
        for (kind, base_model) in [
            (SchemeKind::Dyadic, WeightModel::exponential(0.8).unwrap()),
            (SchemeKind::Unit, WeightModel::exponential(0.8).unwrap()),
            (SchemeKind::Dyadic, WeightModel::rational(0.9).unwrap()),
        ] {
            let scheme = GeneralPartitionScheme::uniform(kind, 2, 2, m).unwrap();
            let copy = base_model.clone();
            let custom = WeightModel::custom(base_model.alpha(), move |u, cube| copy.gamma(u, cube)).unwrap();
            let closed = wce_bound_construction(&scheme, &net, &base_model).unwrap();
            let enumerated = wce_bound_construction(&scheme, &net, &custom).unwrap();
            assert!((closed.net - enumerated.net).abs() <= 1e-12 * closed.net);
            let rel = (closed.truncation - enumerated.truncation).abs() / closed.truncation;
            assert!(rel < 1e-9, "{kind:?}: {} vs {}", closed.truncation, enumerated.truncation);
            assert!(closed.truncation >= enumerated.truncation, "{kind:?}: {:e} < {:e}", closed.truncation, enumerated.truncation);
        }
        // rational weights on unit intervals decay too slowly for the enumeration cap
        let scheme = GeneralPartitionScheme::uniform(SchemeKind::Unit, 2, 2, m).unwrap();
        let slow = WeightModel::custom(0.6, |_, cube| {
            cube.iter().map(|iv| 1.0 / (1.0 + iv.min_abs_endpoint().powf(1.1))).product()
        })
        .unwrap();
        assert!(matches!(
            wce_bound_construction(&scheme, &net, &slow),
            Err(Error::UnsummableTail(_))
        ));
    }

    #[test]
    fn shells_tile_the_box() {
        let mut seen = std::collections::HashSet::new();
        for (lo, hi) in [(0, 3), (3, 5), (5, 9)] {
            for_each_shell_vector(3, lo, hi, |d| {
                assert!(d.iter().all(|&x| (1..=hi).contains(&x)) && d.iter().any(|&x| x > lo));
                assert!(seen.insert(d.to_vec()));
            });
        }
        assert_eq!(seen.len(), 9 * 9 * 9);
    }

    #[test]
    fn bound_rejects_non_badic_partitions() {
        let net = DigitalNet::sobol(2, 6).unwrap();
        let scheme = GeneralPartitionScheme::uniform(SchemeKind::Erfinv { x_scale: 6.0 }, 2, 2, 6).unwrap();
        assert!(wce_bound_construction(&scheme, &net, &WeightModel::rational(1.0).unwrap()).is_err());
    }

    /// f = Σ c w_{j,k,l} over a few locations of the dyadic ambient partition.
    #[test]
    fn error_decomposition_holds_term_by_term() {
        let ps = mapped(SchemeKind::Dyadic, 2, 8);
        // (j, l, [(k, c)])
        let terms: Vec<([i32; 2], [i64; 2], Vec<([u64; 2], f64)>)> = vec![
            ([0, 0], [0, 0], vec![([0, 0], 1.0), ([1, 0], 0.7), ([3, 2], -0.4), ([5, 1], 0.3), ([100, 3], 0.25)]),
            ([1, 0], [1, -1], vec![([0, 0], 0.5), ([1, 1], -0.8), ([2, 0], 0.6)]),
            ([0, 2], [-1, 1], vec![([0, 0], 2.0), ([0, 7], 0.9)]),
            ([6, 0], [1, 0], vec![([0, 0], 0.3), ([1, 0], 0.2)]),
        ];
        let f = |x: &[f64]| -> f64 {
            let mut v = 0.0;
            for (j, l, ks) in &terms {
                for (k, c) in ks {
                    let a = w_eval(&WalshIndex::new(2, j[0], k[0], l[0]).unwrap(), x[0]);
                    let b = w_eval(&WalshIndex::new(2, j[1], k[1], l[1]).unwrap(), x[1]);
                    v += c * (a * b).re;
                }
            }
            v
        };
        let quad: f64 = ps.points().zip(ps.weights()).map(|(x, w)| w * f(x)).sum();
        let exact: f64 = terms
            .iter()
            .flat_map(|(j, _, ks)| ks.iter().map(move |(k, c)| if k == &[0, 0] { c * 2f64.powf(f64::from(j[0] + j[1]) / 2.0) } else { 0.0 }))
            .sum();
        let mut rhs = 0.0;
        for (j, l, ks) in &terms {
            let mut groups: std::collections::BTreeMap<Vec<u32>, f64> = Default::default();
            for (k, c) in ks {
                let r = vec![crate::walsh::digit_len(k[0], 2), crate::walsh::digit_len(k[1], 2)];
                *groups.entry(r).or_default() += c * c;
            }
            for (r, sq) in groups {
                let q = DeltaQuery::new(j.to_vec(), r, l.to_vec()).unwrap();
                rhs += sq.sqrt() * delta_bruteforce(&ps, &q).unwrap();
            }
        }
        assert!(rhs > 0.0);
        assert!((quad - exact).abs() <= rhs + 1e-10, "|Q - I| = {} > {rhs}", (quad - exact).abs());
    }

    fn gauss(x: f64) -> f64 {
        (-std::f64::consts::PI * x * x).exp()
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
        let n = 4096;
        let h = (b - a) / f64::from(n);
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += f(a + f64::from(i) * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    /// γ built from the local variation of the product Gaussian on each cube.
    fn gaussian_model() -> WeightModel {
        WeightModel::custom(1.0, |u, cube| {
            let pi = std::f64::consts::PI;
            cube.iter()
                .enumerate()
                .map(|(i, iv)| {
                    let (a, b) = (iv.left(), iv.right());
                    if u.is_empty() {
                        simpson(|x| gauss(x).powi(2), a, b).sqrt()
                    } else if u.contains(&i) {
                        simpson(|x| (2.0 * pi * x * gauss(x)).powi(2), a, b).sqrt()
                    } else {
                        simpson(gauss, a, b).abs()
                    }
                })
                .product()
        })
        .unwrap()
    }

    #[test]
    fn measured_sigma_respects_bound() {
        let model = gaussian_model();
        let f = |x: &[f64]| gauss(x[0]) * gauss(x[1]);
        for (j, l) in [([0, 0], [0, 0]), ([0, 0], [1, -1]), ([1, 0], [1, 0]), ([-1, 0], [-1, 0])] {
            for r in boxes(2, 6) {
                let q = DeltaQuery::new(j.to_vec(), r.clone(), l.to_vec()).unwrap();
                let measured = sigma(&f, 2, &j, &r, &l, 1 << 9).unwrap();
                let bound = sigma_bound(2, &q, &model).unwrap();
                assert!(measured <= bound * (1.0 + 1e-6), "j={j:?} l={l:?} r={r:?}: {measured} > {bound}");
            }
        }
        // r = 0 reduces to γ_∅
        let q = DeltaQuery::new(vec![0, 0], vec![0, 0], vec![0, 0]).unwrap();
        let cube = [Interval::badic(2, 0, 0), Interval::badic(2, 0, 0)];
        assert_eq!(sigma_bound(2, &q, &model).unwrap(), model.gamma(&[], &cube));
    }

    #[test]
    fn sigma_bound_decays_geometrically() {
        let model = WeightModel::rational(0.8).unwrap();
        let at = |r: u32| sigma_bound(2, &DeltaQuery::new(vec![0], vec![r], vec![0]).unwrap(), &model).unwrap();
        for r in 3..20 {
            assert!((at(r + 1) / at(r) - 2f64.powf(-0.8)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn delta_bounded_for_random_nets(seed in 0u64..u64::MAX, m in 4u32..8) {
            use crate::gf_linalg::GfMatrix;
            // random nonsingular upper-triangular matrices
            let mut state = seed;
            let mut next = || { state ^= state << 13; state ^= state >> 7; state ^= state << 17; state };
            let mats: Vec<GfMatrix> = (0..2).map(|_| {
                let rows: Vec<Vec<u32>> = (0..m as usize).map(|r| (0..m as usize).map(|c| {
                    if c == r { 1 } else if c > r { (next() & 1) as u32 } else { 0 }
                }).collect()).collect();
                GfMatrix::from_rows(2, &rows).unwrap()
            }).collect();
            let net = DigitalNet::with_exact_t(mats).unwrap();
            let scheme = GeneralPartitionScheme::uniform(SchemeKind::Unit, 2, 2, m).unwrap();
            let ps = map_net(&net, &scheme).unwrap();
            let t = net.t();
            for c in ps.occupied_subcubes() {
                if c.m_d < i64::from(t) { continue; }
                let (j, l) = location(&ps, &c.d);
                for r in boxes(2, c.m_d as u32 + 1) {
                    let q = DeltaQuery::new(j.clone(), r.clone(), l.clone()).unwrap();
                    let delta = delta_bruteforce(&ps, &q).unwrap();
                    prop_assert!(delta <= delta_net_bound_valid(&j, &r, c.m_d, t, 2) + 1e-10);
                }
            }
        }
    }
}
