//! One-dimensional partitions of ℝ carrying labeled, equally spaced,
//! left-anchored points, and the per-coordinate schemes built from them.

use statrs::function::erf::{erf, erf_inv, erfc, erfc_inv};

use crate::error::{Error, Result};

const ERFINV_MAX_NEWTON: usize = 8;

/// Inverse error function for |y| < 1, accurate to about 1e-15 absolute in the bulk.
///
/// The starting value comes from a rational approximation and is polished by
/// at most eight Newton steps; in the tails the residual is taken on erfc so
/// that 1 - |y| keeps its relative precision.
pub fn erfinv(y: f64) -> Result<f64> {
    if !(y.abs() < 1.0) {
        return Err(Error::out_of_range("erfinv argument", format!("y = {y}, need |y| < 1")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let sign = y.signum();
    let a = y.abs();
    let two_over_sqrt_pi = std::f64::consts::FRAC_2_SQRT_PI;
    let x = if a <= 0.5 {
        let mut x = erf_inv(a);
        for _ in 0..ERFINV_MAX_NEWTON {
            let step = (erf(x) - a) / (two_over_sqrt_pi * (-x * x).exp());
            x -= step;
            if step.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        x
    } else {
        let q = 1.0 - a;
        let mut x = erfc_inv(q);
        for _ in 0..ERFINV_MAX_NEWTON {
            let step = -(erfc(x) - q) / (two_over_sqrt_pi * (-x * x).exp());
            x -= step;
            if step.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        x
    };
    Ok(sign * x)
}

/// [`erfinv`] extended to the closed interval: ±1 map to ±∞, NaN outside.
pub fn erfinv_extended(y: f64) -> f64 {
    if y == 1.0 {
        f64::INFINITY
    } else if y == -1.0 {
        f64::NEG_INFINITY
    } else {
        erfinv(y).unwrap_or(f64::NAN)
    }
}

/// The b-adic interval [b^j l, b^j (l+1)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BAdic {
    pub j: i32,
    pub l: i64,
}

/// A half-open interval [left, left + width). b-adic intervals also keep (j, l).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    left: f64,
    width: f64,
    badic: Option<BAdic>,
}

impl Interval {
    pub fn badic(base: u32, j: i32, l: i64) -> Self {
        let h = f64::from(base).powi(j);
        Interval {
            left: h * l as f64,
            width: h,
            badic: Some(BAdic { j, l }),
        }
    }

    pub fn general(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(Error::InvalidPartition(format!("[{left}, {right}) is not a finite nonempty interval")));
        }
        Ok(Interval {
            left,
            width: right - left,
            badic: None,
        })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn as_badic(&self) -> Option<BAdic> {
        self.badic
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left && x < self.right()
    }

    /// min(|a|, |b|) over the endpoints, the distance used by decaying weight models.
    pub fn min_abs_endpoint(&self) -> f64 {
        if self.left <= 0.0 && self.right() >= 0.0 {
            0.0
        } else {
            self.left.abs().min(self.right().abs())
        }
    }
}

/// Exact ordering of b-adic endpoints b^j l, compared as integers at the finer scale.
fn badic_endpoint_cmp(base: u32, a: (i32, i64), c: (i32, i64)) -> std::cmp::Ordering {
    let jmin = a.0.min(c.0);
    let scale = |(j, l): (i32, i64)| -> Option<i128> {
        i128::from(base).checked_pow((j - jmin) as u32)?.checked_mul(i128::from(l))
    };
    match (scale(a), scale(c)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => {
            let fa = f64::from(base).powi(a.0) * a.1 as f64;
            let fc = f64::from(base).powi(c.0) * c.1 as f64;
            fa.total_cmp(&fc)
        }
    }
}

fn intervals_overlap(base: u32, a: &Interval, c: &Interval) -> bool {
    use std::cmp::Ordering::Less;
    match (a.badic, c.badic) {
        (Some(x), Some(y)) => {
            badic_endpoint_cmp(base, (x.j, x.l), (y.j, y.l + 1)) == Less
                && badic_endpoint_cmp(base, (y.j, y.l), (x.j, x.l + 1)) == Less
        }
        _ => a.left < c.right() && c.left < a.right(),
    }
}

/// One selected interval J_d with its point-count exponent m_d and label block.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionInterval {
    pub interval: Interval,
    pub m_d: u32,
    /// First label of this interval's block.
    pub label_start: u64,
}

/// Disjoint intervals J_1..J_Δ of ℝ holding b^{m_d} points each, Σ b^{m_d} = b^m.
/// Interval d's points are J_d.left + k·|J_d|/b^{m_d} and carry the labels
/// label_start..label_start + b^{m_d}.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition1D {
    base: u32,
    m: u32,
    intervals: Vec<PartitionInterval>,
    /// Interval indices sorted by label_start.
    block_order: Vec<usize>,
    block_starts: Vec<u64>,
}

impl Partition1D {
    /// Validates the intervals and assigns labels block by block, largest m_d first,
    /// ties in the given order.
    pub fn new(base: u32, m: u32, intervals: Vec<(Interval, u32)>) -> Result<Self> {
        if base < 2 {
            return Err(Error::out_of_range("base", format!("b = {base}")));
        }
        let total = u64::from(base)
            .checked_pow(m)
            .filter(|&n| n <= 1 << 40)
            .ok_or_else(|| Error::out_of_range("exponent", format!("{base}^{m} points")))?;
        if intervals.is_empty() {
            return Err(Error::InvalidPartition("no intervals".into()));
        }
        let mut count = 0u64;
        for (iv, m_d) in &intervals {
            if *m_d > m {
                return Err(Error::InvalidPartition(format!("m_d = {m_d} exceeds m = {m}")));
            }
            if !(iv.left.is_finite() && iv.width.is_finite() && iv.width > 0.0) {
                return Err(Error::InvalidPartition(format!("degenerate interval {iv:?}")));
            }
            count += u64::from(base).pow(*m_d);
        }
        if count != total {
            return Err(Error::InvalidPartition(format!(
                "point counts sum to {count}, expected {base}^{m} = {total}"
            )));
        }
        for a in 0..intervals.len() {
            for c in a + 1..intervals.len() {
                if intervals_overlap(base, &intervals[a].0, &intervals[c].0) {
                    return Err(Error::InvalidPartition(format!(
                        "intervals {} and {} overlap",
                        a + 1,
                        c + 1
                    )));
                }
            }
        }
        let mut block_order: Vec<usize> = (0..intervals.len()).collect();
        block_order.sort_by(|&a, &c| intervals[c].1.cmp(&intervals[a].1));
        let mut starts = vec![0u64; intervals.len()];
        let mut next = 0u64;
        let mut block_starts = Vec::with_capacity(intervals.len());
        for &d in &block_order {
            starts[d] = next;
            block_starts.push(next);
            next += u64::from(base).pow(intervals[d].1);
        }
        let intervals = intervals
            .into_iter()
            .zip(starts)
            .map(|((interval, m_d), label_start)| PartitionInterval {
                interval,
                m_d,
                label_start,
            })
            .collect();
        Ok(Partition1D {
            base,
            m,
            intervals,
            block_order,
            block_starts,
        })
    }

    /// The single interval [0,1) holding all b^m points.
    pub fn trivial(base: u32, m: u32) -> Result<Self> {
        Self::new(base, m, vec![(Interval::badic(base, 0, 0), m)])
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Intervals in scheme order (d = 1..Δ).
    pub fn intervals(&self) -> &[PartitionInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn num_labels(&self) -> u64 {
        u64::from(self.base).pow(self.m)
    }

    /// (interval index, step within interval) of a label.
    pub fn locate(&self, label: u64) -> (usize, u64) {
        let block = self.block_starts.partition_point(|&s| s <= label) - 1;
        let d = self.block_order[block];
        (d, label - self.block_starts[block])
    }

    /// The labeled point z_label.
    pub fn z(&self, label: u64) -> f64 {
        let (d, step) = self.locate(label);
        self.point_in(d, step)
    }

    /// Point `step` of interval d.
    pub fn point_in(&self, d: usize, step: u64) -> f64 {
        let iv = &self.intervals[d];
        let n = u64::from(self.base).pow(iv.m_d) as f64;
        match iv.interval.badic {
            Some(BAdic { j, l }) => {
                let bf = f64::from(self.base);
                (l as f64 + step as f64 / n) * bf.powi(j)
            }
            None => iv.interval.left + step as f64 * (iv.interval.width / n),
        }
    }

    /// z_label as num · b^exp when the interval is b-adic.
    pub fn exact_point(&self, label: u64) -> Option<(i128, i32)> {
        let (d, step) = self.locate(label);
        let iv = &self.intervals[d];
        let BAdic { j, l } = iv.interval.badic?;
        let scale = i128::from(self.base).checked_pow(iv.m_d)?;
        Some((i128::from(l) * scale + i128::from(step), j - iv.m_d as i32))
    }

    /// All labeled points z_0..z_{b^m-1}.
    pub fn labels(&self) -> Vec<f64> {
        (0..self.num_labels()).map(|n| self.z(n)).collect()
    }

    /// Σ_d |J_d|.
    pub fn covered_length(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.interval.width).sum()
    }

    pub fn is_badic(&self) -> bool {
        self.intervals.iter().all(|iv| iv.interval.badic.is_some())
    }
}

/// Labeled point list z_0..z_{b^m-1} of a partition.
pub fn label_points(p: &Partition1D) -> Vec<f64> {
    p.labels()
}

/// m_l = m-1-⌈l/2⌉ for 1 <= l <= 2(m-2), then m_{2m-3} = m_{2m-2} = 1.
pub fn geometric_schedule(m: u32) -> Result<Vec<u32>> {
    if m < 3 {
        return Err(Error::out_of_range("exponent", format!("m = {m}, geometric schedule needs m >= 3")));
    }
    let mut out: Vec<u32> = (1..=2 * (m - 2)).map(|l| m - 1 - l.div_ceil(2)).collect();
    out.extend([1, 1]);
    Ok(out)
}

/// Interval d >= 1 of the base-2 partition [0,1), [-1,0), [1,2), [-2,-1), [2,4), [-4,-2), ...
pub fn dyadic_interval(d: u64) -> BAdic {
    match d {
        0 => panic!("interval positions start at 1"),
        1 => BAdic { j: 0, l: 0 },
        2 => BAdic { j: 0, l: -1 },
        _ if d % 2 == 1 => BAdic {
            j: ((d - 3) / 2) as i32,
            l: 1,
        },
        _ => BAdic {
            j: ((d - 4) / 2) as i32,
            l: -2,
        },
    }
}

/// Interval d >= 1 of the unit-length partition [0,1), [-1,0), [1,2), [-2,-1), ...
pub fn unit_interval(d: u64) -> BAdic {
    assert!(d >= 1, "interval positions start at 1");
    let l = if d % 2 == 1 { ((d - 1) / 2) as i64 } else { -((d / 2) as i64) };
    BAdic { j: 0, l }
}

fn from_sequence(m: u32, seq: fn(u64) -> BAdic) -> Result<Partition1D> {
    let schedule = geometric_schedule(m)?;
    let intervals = schedule
        .iter()
        .enumerate()
        .map(|(idx, &m_d)| {
            let BAdic { j, l } = seq(idx as u64 + 1);
            (Interval::badic(2, j, l), m_d)
        })
        .collect();
    Partition1D::new(2, m, intervals)
}

/// Base-2 partition with intervals doubling in length away from the origin.
pub fn dyadic_partition(m: u32) -> Result<Partition1D> {
    from_sequence(m, dyadic_interval)
}

/// Base-2 partition into unit intervals marching outward from the origin.
pub fn unit_partition(m: u32) -> Result<Partition1D> {
    from_sequence(m, unit_interval)
}

/// Breakpoints a_l = erfinv(1 - 2^{-l})·X for 0 <= l < m.
pub fn erfinv_breakpoints(m: u32, x_scale: f64) -> Result<Vec<f64>> {
    if !(x_scale > 0.0 && x_scale.is_finite()) {
        return Err(Error::out_of_range("scale X", format!("X = {x_scale}, need X > 0")));
    }
    (0..m).map(|l| Ok(erfinv(1.0 - 0.5f64.powi(l as i32))? * x_scale)).collect()
}

/// Base-2 partition of [-a_{m-1}, a_{m-1}) into J_{2l-1} = [a_{l-1}, a_l) and
/// J_{2l} = [-a_l, -a_{l-1}), with counts from [`geometric_schedule`].
pub fn erfinv_partition(m: u32, x_scale: f64) -> Result<Partition1D> {
    let schedule = geometric_schedule(m)?;
    let a = erfinv_breakpoints(m, x_scale)?;
    let mut intervals = Vec::with_capacity(schedule.len());
    for l in 1..m as usize {
        intervals.push((Interval::general(a[l - 1], a[l])?, schedule[2 * l - 2]));
        intervals.push((Interval::general(-a[l], -a[l - 1])?, schedule[2 * l - 1]));
    }
    Partition1D::new(2, m, intervals)
}

/// The full partition of ℝ a coordinate's intervals were drawn from.
#[derive(Clone, Debug, PartialEq)]
pub enum Ambient {
    /// [0,1), [-1,0), [1,2), [-2,-1), [2,4), [-4,-2), ... in base 2.
    Dyadic,
    /// Unit intervals 0, -1, 1, -2, ... in base 2.
    Unit,
    /// erfinv breakpoints with scale X. Not b-adic, so bounds do not apply.
    Erfinv { x_scale: f64 },
    /// Only the selected intervals are known.
    Explicit,
}

impl Ambient {
    /// Interval d >= 1 of the ambient partition when it is an infinite b-adic sequence.
    pub fn interval(&self, d: u64) -> Option<BAdic> {
        match self {
            Ambient::Dyadic => Some(dyadic_interval(d)),
            Ambient::Unit => Some(unit_interval(d)),
            _ => None,
        }
    }
}

/// Named constructions available to every coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeKind {
    /// One interval [0,1) per coordinate: the mapped set is the net itself.
    Trivial,
    Dyadic,
    Unit,
    Erfinv { x_scale: f64 },
}

/// Per-coordinate partitions plus the ambient partition each was selected from.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralPartitionScheme {
    coords: Vec<Partition1D>,
    ambient: Vec<Ambient>,
}

impl GeneralPartitionScheme {
    pub fn new(coords: Vec<Partition1D>, ambient: Vec<Ambient>) -> Result<Self> {
        if coords.is_empty() || coords.len() != ambient.len() {
            return Err(Error::DimensionMismatch {
                expected: coords.len(),
                found: ambient.len(),
            });
        }
        let (base, m) = (coords[0].base, coords[0].m);
        for (i, (p, amb)) in coords.iter().zip(&ambient).enumerate() {
            if p.base != base || p.m != m {
                return Err(Error::InvalidPartition(format!(
                    "coordinate {} uses b={}, m={} but coordinate 1 uses b={base}, m={m}",
                    i + 1,
                    p.base,
                    p.m
                )));
            }
            if amb.interval(1).is_some() {
                if base != 2 {
                    return Err(Error::InvalidPartition("dyadic and unit ambients are base 2".into()));
                }
                for (d, iv) in p.intervals.iter().enumerate() {
                    if iv.interval.badic != amb.interval(d as u64 + 1) {
                        return Err(Error::InvalidPartition(format!(
                            "coordinate {} interval {} is not interval {} of the ambient partition",
                            i + 1,
                            d + 1,
                            d + 1
                        )));
                    }
                }
            }
        }
        Ok(GeneralPartitionScheme { coords, ambient })
    }

    /// The same construction in each of `s` coordinates.
    pub fn uniform(kind: SchemeKind, s: usize, base: u32, m: u32) -> Result<Self> {
        let (p, amb) = match kind {
            SchemeKind::Trivial => (Partition1D::trivial(base, m)?, if base == 2 { Ambient::Unit } else { Ambient::Explicit }),
            SchemeKind::Dyadic => (Self::base2(base, dyadic_partition(m))?, Ambient::Dyadic),
            SchemeKind::Unit => (Self::base2(base, unit_partition(m))?, Ambient::Unit),
            SchemeKind::Erfinv { x_scale } => (Self::base2(base, erfinv_partition(m, x_scale))?, Ambient::Erfinv { x_scale }),
        };
        Self::new(vec![p; s], vec![amb; s])
    }

    fn base2(base: u32, p: Result<Partition1D>) -> Result<Partition1D> {
        if base != 2 {
            return Err(Error::InvalidPartition(format!("this scheme is defined for base 2, not {base}")));
        }
        p
    }

    pub fn coords(&self) -> &[Partition1D] {
        &self.coords
    }

    pub fn ambient(&self) -> &[Ambient] {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn base(&self) -> u32 {
        self.coords[0].base
    }

    pub fn m(&self) -> u32 {
        self.coords[0].m
    }

    pub fn is_badic(&self) -> bool {
        self.coords.iter().all(Partition1D::is_badic)
    }
}
