//! Walsh functions in base b, their dilations and translations
//! `w_{j,k,l}(x) = b^{-j/2} wal_k(b^{-j} x - l)`, the associated phase-plane
//! tiles, and numerically computed Walsh coefficients of real functions.
//!
//! All tile geometry is exact: b-adic intervals are either nested or disjoint,
//! so overlap reduces to a floor division of integer translations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of sample cells a coefficient computation may touch.
pub const MAX_SAMPLE_CELLS: u64 = 1 << 26;

fn check_base(b: u32) -> Result<()> {
    if b < 2 {
        return Err(Error::out_of_range("base", format!("b = {b}, need b >= 2")));
    }
    Ok(())
}

/// e^{2πi e/b}.
pub fn omega_pow(b: u32, e: u64) -> Complex64 {
    let e = e % u64::from(b);
    if e == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if b == 2 {
        return Complex64::new(-1.0, 0.0);
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / f64::from(b))
}

/// Number of base-b digits of k (0 for k = 0).
pub fn digit_len(k: u64, b: u32) -> u32 {
    let mut n = 0;
    let mut rest = k;
    while rest > 0 {
        rest /= u64::from(b);
        n += 1;
    }
    n
}

/// wal_k evaluated at the b-adic rational a / b^r, with 0 <= a < b^r.
pub fn wal_cell(k: u64, a: u64, r: u32, b: u32) -> Complex64 {
    let bb = u64::from(b);
    // digit q of k pairs with the (q+1)-th digit after the point, i.e. digit r-1-q of a.
    let mut exp = 0u64;
    let mut kk = k;
    let mut q = 0u32;
    while kk > 0 && q < r {
        let kappa = kk % bb;
        if kappa != 0 {
            let digit = (a / bb.pow(r - 1 - q)) % bb;
            exp += kappa * digit;
        }
        kk /= bb;
        q += 1;
    }
    omega_pow(b, exp)
}

/// The k-th Walsh function at x; zero outside [0,1).
///
/// Only the first `digit_len(k)` digits of x matter. When x·b^r lies within
/// 1e-9 of an integer it is snapped to it, which selects the terminating
/// expansion of b-adic rationals despite rounding.
pub fn wal(k: u64, x: f64, b: u32) -> Complex64 {
    if !(0.0..1.0).contains(&x) {
        return Complex64::new(0.0, 0.0);
    }
    let r = digit_len(k, b);
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let scale = f64::from(b).powi(r as i32);
    let y = x * scale;
    let nearest = y.round();
    let a = if (y - nearest).abs() < 1e-9 { nearest } else { y.floor() };
    let a = (a.max(0.0) as u64).min(u64::from(b).pow(r) - 1);
    wal_cell(k, a, r, b)
}

/// One-dimensional Walsh index (j, k, l) in base b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WalshIndex {
    pub base: u32,
    pub j: i32,
    pub k: u64,
    pub l: i64,
}

impl WalshIndex {
    pub fn new(base: u32, j: i32, k: u64, l: i64) -> Result<Self> {
        check_base(base)?;
        Ok(WalshIndex { base, j, k, l })
    }

    pub fn tile(&self) -> Tile {
        Tile {
            base: self.base,
            j: self.j,
            k: self.k,
            l: self.l,
        }
    }

    /// Support [b^j l, b^j (l+1)) as floats.
    pub fn support(&self) -> (f64, f64) {
        let h = f64::from(self.base).powi(self.j);
        (h * self.l as f64, h * (self.l as f64 + 1.0))
    }
}

/// w_{j,k,l}(x).
pub fn w_eval(idx: &WalshIndex, x: f64) -> Complex64 {
    let b = f64::from(idx.base);
    let y = x * b.powi(-idx.j) - idx.l as f64;
    wal(idx.k, y, idx.base) * b.powf(-f64::from(idx.j) / 2.0)
}

/// The rectangle [b^j l, b^j(l+1)) × [b^{-j} k, b^{-j}(k+1)) in the phase plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tile {
    pub base: u32,
    pub j: i32,
    pub k: u64,
    pub l: i64,
}

impl Tile {
    pub fn time_interval(&self) -> (f64, f64) {
        let h = f64::from(self.base).powi(self.j);
        (h * self.l as f64, h * (self.l as f64 + 1.0))
    }

    pub fn freq_interval(&self) -> (f64, f64) {
        let h = f64::from(self.base).powi(-self.j);
        (h * self.k as f64, h * (self.k as f64 + 1.0))
    }

    /// Time length times frequency length, always 1.
    pub fn area(&self) -> f64 {
        let (t0, t1) = self.time_interval();
        let (f0, f1) = self.freq_interval();
        (t1 - t0) * (f1 - f0)
    }
}

/// floor(x / b^d) for d >= 0 without overflow.
fn floor_div_pow(x: i128, b: u32, d: u32) -> i128 {
    let b = i128::from(b);
    let mut v = x;
    for _ in 0..d {
        if v == 0 || v == -1 {
            break;
        }
        v = v.div_euclid(b);
    }
    v
}

/// Whether the two tiles have empty intersection, decided exactly.
///
/// # Panics
/// If the tiles use different bases.
pub fn tiles_disjoint(t1: &Tile, t2: &Tile) -> bool {
    assert_eq!(t1.base, t2.base, "tiles must share a base");
    let (fine, coarse) = if t1.j <= t2.j { (t1, t2) } else { (t2, t1) };
    let d = (coarse.j - fine.j) as u32;
    // Longer time interval belongs to the coarse tile, longer frequency interval to the fine one.
    let time_meets = floor_div_pow(i128::from(fine.l), fine.base, d) == i128::from(coarse.l);
    let freq_meets = floor_div_pow(i128::from(coarse.k), fine.base, d) == i128::from(fine.k);
    !(time_meets && freq_meets)
}

/// ⟨w_{j,k,l}, w_{j',k',l'}⟩ in L2(ℝ) from the closed form.
pub fn inner_product(a: &WalshIndex, b: &WalshIndex) -> Complex64 {
    assert_eq!(a.base, b.base, "indices must share a base");
    if tiles_disjoint(&a.tile(), &b.tile()) {
        return Complex64::new(0.0, 0.0);
    }
    if a.j > b.j {
        return inner_product(b, a).conj();
    }
    let base = a.base;
    let d = (b.j - a.j) as u32;
    // b^{j-j'} l - l' = (l - l' b^d) / b^d, a cell of the level-d grid in [0,1).
    let cell = i128::from(a.l) - i128::from(b.l) * i128::from(base).pow(d);
    let scale = f64::from(base).powf(-f64::from(d) / 2.0);
    wal_cell(b.k, cell as u64, d, base).conj() * scale
}

/// The same inner product by exact piecewise-constant integration on the
/// coarsest grid on which both functions are constant, with midpoint evaluation.
pub fn inner_product_numeric(a: &WalshIndex, b: &WalshIndex) -> Complex64 {
    assert_eq!(a.base, b.base, "indices must share a base");
    let base = a.base;
    let bf = f64::from(base);
    let (a0, a1) = a.support();
    let (b0, b1) = b.support();
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    if lo >= hi {
        return Complex64::new(0.0, 0.0);
    }
    let g = (a.j - digit_len(a.k, base) as i32).min(b.j - digit_len(b.k, base) as i32);
    let h = bf.powi(g);
    let cells = ((hi - lo) / h).round() as u64;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..cells {
        let x = lo + (c as f64 + 0.5) * h;
        acc += w_eval(a, x) * w_eval(b, x).conj();
    }
    acc * h
}

/// s-dimensional Walsh index: one (j, k, l) per coordinate in a common base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WalshIndexNd {
    coords: Vec<WalshIndex>,
}

impl WalshIndexNd {
    pub fn new(coords: Vec<WalshIndex>) -> Result<Self> {
        let first = coords
            .first()
            .ok_or_else(|| Error::out_of_range("dimension", "need at least one coordinate"))?;
        if coords.iter().any(|c| c.base != first.base) {
            return Err(Error::Precondition("all coordinates must share one base".into()));
        }
        Ok(WalshIndexNd { coords })
    }

    pub fn from_parts(base: u32, j: &[i32], k: &[u64], l: &[i64]) -> Result<Self> {
        if j.len() != k.len() || j.len() != l.len() {
            return Err(Error::DimensionMismatch {
                expected: j.len(),
                found: k.len().max(l.len()),
            });
        }
        let coords = (0..j.len())
            .map(|i| WalshIndex::new(base, j[i], k[i], l[i]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    pub fn base(&self) -> u32 {
        self.coords[0].base
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[WalshIndex] {
        &self.coords
    }

    pub fn tiles(&self) -> Vec<Tile> {
        self.coords.iter().map(WalshIndex::tile).collect()
    }
}

pub fn w_eval_nd(idx: &WalshIndexNd, x: &[f64]) -> Complex64 {
    idx.coords.iter().zip(x).map(|(c, &xi)| w_eval(c, xi)).product()
}

/// Product rectangles are disjoint iff some coordinate pair is.
pub fn tiles_disjoint_nd(a: &[Tile], b: &[Tile]) -> bool {
    a.iter().zip(b).any(|(x, y)| tiles_disjoint(x, y))
}

pub fn inner_product_nd(a: &WalshIndexNd, b: &WalshIndexNd) -> Complex64 {
    a.coords.iter().zip(&b.coords).map(|(x, y)| inner_product(x, y)).product()
}

/// The b×b unitary matrix U with U[r][s] = b^{-1/2} wal_r(s/b), together with the
/// index families it relates: coarse[r] = w_{j+1, kb+r, l/b} equals
/// Σ_s U[r][s] · fine[s] where fine[s] = w_{j, k, l+s}.
#[derive(Clone, Debug)]
pub struct ChangeOfBasis {
    pub matrix: DMatrix<Complex64>,
    pub coarse: Vec<WalshIndex>,
    pub fine: Vec<WalshIndex>,
}

/// Change of basis between the b fine tiles (j, k, l+s) and the b coarse tiles
/// (j+1, kb+r, l/b) covering the same phase-plane area. Requires b | l.
pub fn change_of_basis(base: u32, j: i32, k: u64, l: i64) -> Result<ChangeOfBasis> {
    check_base(base)?;
    if l.rem_euclid(i64::from(base)) != 0 {
        return Err(Error::Precondition(format!("translation {l} is not divisible by {base}")));
    }
    let n = base as usize;
    let norm = f64::from(base).sqrt().recip();
    let matrix = DMatrix::from_fn(n, n, |r, s| wal_cell(r as u64, s as u64, 1, base) * norm);
    let coarse = (0..u64::from(base))
        .map(|r| WalshIndex::new(base, j + 1, k * u64::from(base) + r, l / i64::from(base)))
        .collect::<Result<Vec<_>>>()?;
    let fine = (0..i64::from(base))
        .map(|s| WalshIndex::new(base, j, k, l + s))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChangeOfBasis { matrix, coarse, fine })
}

/// Applies the b-point character transform along every digit of every axis.
/// `v` is indexed row-major by (a_1, ..., a_s) with a_i < b^{r_i}. On return the
/// entry at (a_1, ..., a_s) holds Σ_c v[c] · Π_i wal_{k_i}(c_i / b^{r_i})^{sign}
/// where k_i is a_i with its r_i digits reversed.
fn digit_transform(v: &mut [Complex64], r: &[u32], b: u32, conjugate: bool) {
    let bu = b as usize;
    let kernel: Vec<Complex64> = (0..bu * bu)
        .map(|e| {
            let w = omega_pow(b, ((e / bu) * (e % bu)) as u64);
            if conjugate {
                w.conj()
            } else {
                w
            }
        })
        .collect();
    let sizes: Vec<usize> = r.iter().map(|&ri| bu.pow(ri)).collect();
    let mut stride = v.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); bu];
    for (axis, &ri) in r.iter().enumerate() {
        stride /= sizes[axis];
        for p in 0..ri {
            let ds = stride * bu.pow(p);
            for base_idx in 0..v.len() {
                if (base_idx / ds) % bu != 0 {
                    continue;
                }
                for (c, slot) in buf.iter_mut().enumerate() {
                    *slot = v[base_idx + c * ds];
                }
                for out in 0..bu {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, val) in buf.iter().enumerate() {
                        acc += val * kernel[out * bu + c];
                    }
                    v[base_idx + out * ds] = acc;
                }
            }
        }
    }
}

fn reverse_digits(a: usize, r: u32, b: usize) -> usize {
    let mut out = 0;
    let mut rest = a;
    for _ in 0..r {
        out = out * b + rest % b;
        rest /= b;
    }
    out
}

/// Given values v[a] on the grid of cells a_i < b^{r_i} (row-major), returns
/// Σ_a v[a] Π_i wal_{k_i}(a_i / b^{r_i}) for every k with k_i < b^{r_i}, row-major
/// by k. With `conjugate` the Walsh factors are conjugated.
pub(crate) fn cell_walsh_sums(mut v: Vec<Complex64>, r: &[u32], b: u32, conjugate: bool) -> Vec<Complex64> {
    let bu = b as usize;
    let sizes: Vec<usize> = r.iter().map(|&ri| bu.pow(ri)).collect();
    debug_assert_eq!(v.len(), sizes.iter().product::<usize>());
    digit_transform(&mut v, r, b, conjugate);
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (idx, val) in v.iter().enumerate() {
        let mut rest = idx;
        let mut kidx = 0;
        let mut mult = 1;
        for i in (0..r.len()).rev() {
            let a = rest % sizes[i];
            rest /= sizes[i];
            kidx += reverse_digits(a, r[i], bu) * mult;
            mult *= sizes[i];
        }
        out[kidx] = *val;
    }
    out
}

/// Midpoint samples of f over the support box of (j, l), `resolution` cells per axis.
struct CellSamples {
    base: u32,
    resolution: u64,
    j: Vec<i32>,
    values: Vec<f64>,
}

impl CellSamples {
    fn new<F: Fn(&[f64]) -> f64>(f: &F, base: u32, j: &[i32], l: &[i64], resolution: u64) -> Result<Self> {
        check_base(base)?;
        if j.len() != l.len() {
            return Err(Error::DimensionMismatch {
                expected: j.len(),
                found: l.len(),
            });
        }
        let mut p = 1u64;
        while p < resolution {
            p = p.saturating_mul(u64::from(base));
        }
        if p != resolution || resolution == 0 {
            return Err(Error::Precondition(format!(
                "resolution {resolution} is not a power of {base}"
            )));
        }
        let s = j.len() as u32;
        let total = resolution.checked_pow(s).filter(|&n| n <= MAX_SAMPLE_CELLS).ok_or_else(|| {
            Error::out_of_range("sample grid", format!("{resolution}^{s} exceeds {MAX_SAMPLE_CELLS} cells"))
        })?;
        let bf = f64::from(base);
        let widths: Vec<f64> = j.iter().map(|&ji| bf.powi(ji) / resolution as f64).collect();
        let lefts: Vec<f64> = j.iter().zip(l).map(|(&ji, &li)| bf.powi(ji) * li as f64).collect();
        let mut x = vec![0.0; j.len()];
        let values = (0..total)
            .map(|flat| {
                let mut rest = flat;
                for i in (0..j.len()).rev() {
                    let c = rest % resolution;
                    rest /= resolution;
                    x[i] = lefts[i] + (c as f64 + 0.5) * widths[i];
                }
                f(&x)
            })
            .collect();
        Ok(CellSamples {
            base,
            resolution,
            j: j.to_vec(),
            values,
        })
    }

    fn level(&self) -> u32 {
        digit_len(self.resolution, self.base) - 1
    }

    /// Walsh coefficients f̂_{j,k,l} for every k with k_i < b^{r_i}, indexed row-major by k.
    fn coefficients(&self, r: &[u32]) -> Result<Vec<Complex64>> {
        let top = self.level();
        if let Some(&ri) = r.iter().find(|&&ri| ri > top) {
            return Err(Error::Precondition(format!(
                "frequency level {ri} exceeds sampling level {top}"
            )));
        }
        let bu = self.base as usize;
        let s = r.len();
        let sizes: Vec<usize> = r.iter().map(|&ri| bu.pow(ri)).collect();
        let len: usize = sizes.iter().product();
        let res = self.resolution as usize;
        let mut agg = vec![Complex64::new(0.0, 0.0); len];
        for (flat, &val) in self.values.iter().enumerate() {
            let mut rest = flat;
            let mut idx = 0;
            let mut mult = 1;
            for i in (0..s).rev() {
                let c = rest % res;
                rest /= res;
                let a = c / (res / sizes[i]);
                idx += a * mult;
                mult *= sizes[i];
            }
            agg[idx] += val;
        }
        let bf = f64::from(self.base);
        let jsum: i32 = self.j.iter().sum();
        let cell_vol: f64 = self.j.iter().map(|&ji| bf.powi(ji) / self.resolution as f64).product();
        let scale = bf.powf(-f64::from(jsum) / 2.0) * cell_vol;
        let mut out = cell_walsh_sums(agg, r, self.base, true);
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }
}

/// Midpoint-rule approximation of ⟨f, w_{j,k,l}⟩ on `resolution` cells per axis
/// aligned to the b-adic grid of the support. The Walsh factor is exact per cell
/// whenever `resolution >= b^{digit_len(k_i)}`.
pub fn walsh_coefficient<F: Fn(&[f64]) -> f64>(f: &F, idx: &WalshIndexNd, resolution: u64) -> Result<Complex64> {
    let base = idx.base();
    let j: Vec<i32> = idx.coords().iter().map(|c| c.j).collect();
    let l: Vec<i64> = idx.coords().iter().map(|c| c.l).collect();
    let r: Vec<u32> = idx.coords().iter().map(|c| digit_len(c.k, base)).collect();
    let samples = CellSamples::new(f, base, &j, &l, resolution)?;
    let coeffs = samples.coefficients(&r)?;
    let mut kidx = 0usize;
    for (c, &ri) in idx.coords().iter().zip(&r) {
        kidx = kidx * (base as usize).pow(ri) + c.k as usize;
    }
    Ok(coeffs[kidx])
}

fn frequency_box_contains(k: &[usize], r: &[u32], b: usize) -> bool {
    k.iter().zip(r).all(|(&ki, &ri)| {
        let lo = if ri == 0 { 0 } else { b.pow(ri - 1) };
        ki >= lo && ki < b.pow(ri)
    })
}

/// σ_{j,r,l}(f): the ℓ2 norm of the Walsh coefficients over k_i ∈ [⌊b^{r_i-1}⌋, b^{r_i}).
pub fn sigma<F: Fn(&[f64]) -> f64>(
    f: &F,
    base: u32,
    j: &[i32],
    r: &[u32],
    l: &[i64],
    resolution: u64,
) -> Result<f64> {
    if r.len() != j.len() {
        return Err(Error::DimensionMismatch {
            expected: j.len(),
            found: r.len(),
        });
    }
    let samples = CellSamples::new(f, base, j, l, resolution)?;
    let coeffs = samples.coefficients(r)?;
    let bu = base as usize;
    let sizes: Vec<usize> = r.iter().map(|&ri| bu.pow(ri)).collect();
    let mut k = vec![0usize; r.len()];
    let mut total = 0.0;
    for (flat, c) in coeffs.iter().enumerate() {
        let mut rest = flat;
        for i in (0..r.len()).rev() {
            k[i] = rest % sizes[i];
            rest /= sizes[i];
        }
        if frequency_box_contains(&k, r, bu) {
            total += c.norm_sqr();
        }
    }
    Ok(total.sqrt())
}

/// A location (j, l) in ℝ^s: the box Π [b^{j_i} l_i, b^{j_i}(l_i+1)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub j: Vec<i32>,
    pub l: Vec<i64>,
}

impl Location {
    pub fn contains(&self, base: u32, x: &[f64]) -> bool {
        let bf = f64::from(base);
        self.j.iter().zip(&self.l).zip(x).all(|((&ji, &li), &xi)| {
            let y = xi * bf.powi(-ji) - li as f64;
            (0.0..1.0).contains(&y)
        })
    }
}

/// Σ over (j,l) ∈ D and k_i < b^{r_max,i} of f̂_{j,k,l} w_{j,k,l}(x), real part.
pub fn partial_sum<F: Fn(&[f64]) -> f64>(
    f: &F,
    base: u32,
    locations: &[Location],
    r_max: &[u32],
    x: &[f64],
    resolution: u64,
) -> Result<f64> {
    let bu = base as usize;
    let mut total = Complex64::new(0.0, 0.0);
    for loc in locations {
        if loc.j.len() != x.len() || r_max.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: loc.j.len().min(r_max.len()),
            });
        }
        if !loc.contains(base, x) {
            // every w_{j,k,l} vanishes off its support
            continue;
        }
        let samples = CellSamples::new(f, base, &loc.j, &loc.l, resolution)?;
        let coeffs = samples.coefficients(r_max)?;
        let sizes: Vec<usize> = r_max.iter().map(|&ri| bu.pow(ri)).collect();
        for (flat, c) in coeffs.iter().enumerate() {
            let mut rest = flat;
            let mut w = Complex64::new(1.0, 0.0);
            for i in (0..x.len()).rev() {
                let ki = rest % sizes[i];
                rest /= sizes[i];
                w *= w_eval(&WalshIndex::new(base, loc.j[i], ki as u64, loc.l[i])?, x[i]);
            }
            total += c * w;
        }
    }
    Ok(total.re)
}
