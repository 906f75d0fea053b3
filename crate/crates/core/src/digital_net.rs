//! Digital (t,m,s)-nets over Z_b and the bundled Sobol generating matrices.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gf_linalg::{rank_packed, GfMatrix};

/// Largest m for which the quality parameter is always certified at construction.
pub const CERTIFY_MAX_M: u32 = 14;

/// Largest b^m the literal point-counting oracle will enumerate.
pub const COUNTING_MAX_POINTS: u64 = 1 << 20;

/// Above this many compositions per candidate t, a Sobol net keeps its declared t.
const CERTIFY_COMPOSITION_BUDGET: u128 = 200_000;

const DEFAULT_DIRECTIONS: &str = include_str!("../data/sobol_directions.txt");

/// Initialization data for one Sobol coordinate: primitive polynomial degree,
/// its interior coefficients packed as bits, and the initial odd integers m_1..m_deg.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionEntry {
    pub dimension: u32,
    pub degree: u32,
    pub coefficients: u32,
    pub initial: Vec<u64>,
}

/// Sobol direction numbers in the `d s a m_1 ... m_s` text layout.
/// Coordinate 1 (van der Corput) is implicit and not listed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionNumbers {
    entries: Vec<DirectionEntry>,
}

impl DirectionNumbers {
    /// The embedded table covering coordinates 1 through 10.
    pub fn embedded() -> Self {
        Self::parse(DEFAULT_DIRECTIONS).expect("embedded direction numbers are well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !line.starts_with(|c: char| c.is_ascii_digit()) {
                // header row
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u64>().map_err(|e| Error::Parse {
                        line: line_no,
                        msg: format!("{tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if nums.len() < 4 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected `d s a m_1 ... m_s`".into(),
                });
            }
            let (dimension, degree, coefficients) = (nums[0] as u32, nums[1] as u32, nums[2] as u32);
            let initial = nums[3..].to_vec();
            if degree == 0 || initial.len() != degree as usize {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("degree {degree} needs {degree} initial values, got {}", initial.len()),
                });
            }
            for (k, &mk) in initial.iter().enumerate() {
                if mk % 2 == 0 || mk >= 1u64 << (k + 1) {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("m_{} = {mk} must be odd and below 2^{}", k + 1, k + 1),
                    });
                }
            }
            let expected = entries.len() as u32 + 2;
            if dimension != expected {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected dimension {expected}, found {dimension}"),
                });
            }
            entries.push(DirectionEntry {
                dimension,
                degree,
                coefficients,
                initial,
            });
        }
        Ok(DirectionNumbers { entries })
    }

    /// Number of coordinates available, counting the implicit first one.
    pub fn max_dimension(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn entries(&self) -> &[DirectionEntry] {
        &self.entries
    }

    /// Upper bound on the t-value of the Sobol sequence in the first `s` coordinates:
    /// the sum of (degree - 1) over the primitive polynomials used.
    pub fn sequence_t_bound(&self, s: usize) -> u32 {
        self.entries
            .iter()
            .take(s.saturating_sub(1))
            .map(|e| e.degree - 1)
            .sum()
    }

    /// The direction integers m_1..m_count for coordinate `i` (0-based).
    fn direction_integers(&self, i: usize, count: usize) -> Vec<u64> {
        if i == 0 {
            return vec![1; count];
        }
        let e = &self.entries[i - 1];
        let deg = e.degree as usize;
        let mut m: Vec<u64> = e.initial.clone();
        for k in deg..count {
            let mut next = m[k - deg] ^ (m[k - deg] << deg);
            for q in 1..deg {
                if (e.coefficients >> (deg - 1 - q)) & 1 == 1 {
                    next ^= m[k - q] << q;
                }
            }
            m.push(next);
        }
        m.truncate(count);
        m
    }
}

/// Generating matrices of the first `s` Sobol coordinates, each m×m over Z_2,
/// from the embedded direction numbers.
pub fn sobol_matrices(s: usize, m: u32) -> Result<Vec<GfMatrix>> {
    sobol_matrices_with(&DirectionNumbers::embedded(), s, m)
}

pub fn sobol_matrices_with(dirs: &DirectionNumbers, s: usize, m: u32) -> Result<Vec<GfMatrix>> {
    if s == 0 || s > dirs.max_dimension() {
        return Err(Error::out_of_range(
            "dimension",
            format!("s = {s}, supported 1..={}", dirs.max_dimension()),
        ));
    }
    if m == 0 || m > 32 {
        return Err(Error::out_of_range("exponent", format!("m = {m}, supported 1..=32")));
    }
    let m = m as usize;
    (0..s)
        .map(|i| {
            let mk = dirs.direction_integers(i, m);
            let mut entries = vec![0u8; m * m];
            // Column c holds the binary digits of v_{c+1} = m_{c+1} / 2^{c+1}.
            for c in 0..m {
                for r in 0..=c {
                    entries[r * m + c] = ((mk[c] >> (c - r)) & 1) as u8;
                }
            }
            GfMatrix::new(2, m, m, entries)
        })
        .collect()
}

/// A digital (t,m,s)-net over Z_b: b^m points in [0,1)^s.
#[derive(Clone, Debug)]
pub struct DigitalNet {
    base: u32,
    m: u32,
    matrices: Vec<GfMatrix>,
    t: u32,
    t_certified: bool,
    /// For b = 2: per coordinate, column c as a label mask (bit m-1-r = entry (r, c)).
    column_masks: Option<Vec<Vec<u64>>>,
    /// For b = 2: per coordinate, row r as a bit mask over columns.
    row_masks: Option<Vec<Vec<u64>>>,
}

impl DigitalNet {
    /// Builds a net with a declared quality parameter. For m <= 14 the declaration
    /// is checked and rejected if it does not hold.
    pub fn new(matrices: Vec<GfMatrix>, t: u32) -> Result<Self> {
        let mut net = Self::unchecked(matrices, t)?;
        if t > net.m {
            return Err(Error::InvalidNet(format!("t = {t} exceeds m = {}", net.m)));
        }
        if net.m <= CERTIFY_MAX_M {
            if !verify_tms_net(&net, t) {
                return Err(Error::InvalidNet(format!(
                    "matrices do not generate a ({t},{},{})-net",
                    net.m,
                    net.dim()
                )));
            }
            net.t_certified = true;
        }
        Ok(net)
    }

    /// Builds a net and computes its exact t-value.
    pub fn with_exact_t(matrices: Vec<GfMatrix>) -> Result<Self> {
        let mut net = Self::unchecked(matrices, 0)?;
        net.t = t_value(&net);
        net.t_certified = true;
        Ok(net)
    }

    /// The first b^m points of the Sobol sequence in `s` coordinates.
    pub fn sobol(s: usize, m: u32) -> Result<Self> {
        Self::sobol_with(&DirectionNumbers::embedded(), s, m)
    }

    pub fn sobol_with(dirs: &DirectionNumbers, s: usize, m: u32) -> Result<Self> {
        let matrices = sobol_matrices_with(dirs, s, m)?;
        let mut net = Self::unchecked(matrices, dirs.sequence_t_bound(s).min(m))?;
        if m <= CERTIFY_MAX_M || composition_count(m, s) <= CERTIFY_COMPOSITION_BUDGET {
            net.t = t_value(&net);
            net.t_certified = true;
        }
        Ok(net)
    }

    fn unchecked(matrices: Vec<GfMatrix>, t: u32) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidNet("at least one generating matrix is required".into()))?;
        let base = first.modulus();
        let m = first.rows();
        for c in &matrices {
            if c.modulus() != base {
                return Err(Error::InvalidNet("generating matrices use different moduli".into()));
            }
            if c.rows() != m || c.cols() != m {
                return Err(Error::InvalidNet(format!(
                    "generating matrices must be {m}x{m}, found {}x{}",
                    c.rows(),
                    c.cols()
                )));
            }
        }
        let fits = (base as u128).checked_pow(m as u32).is_some_and(|n| n <= 1u128 << 40);
        if m == 0 || !fits {
            return Err(Error::out_of_range("net size", format!("b^m = {base}^{m}")));
        }
        let (column_masks, row_masks) = if base == 2 {
            let cols = matrices
                .iter()
                .map(|c| {
                    (0..m)
                        .map(|col| {
                            (0..m).fold(0u64, |acc, r| acc | (u64::from(c.get(r, col)) << (m - 1 - r)))
                        })
                        .collect()
                })
                .collect();
            let rows = matrices.iter().map(|c| c.packed_rows().expect("b = 2, m <= 40")).collect();
            (Some(cols), Some(rows))
        } else {
            (None, None)
        };
        Ok(DigitalNet {
            base,
            m: m as u32,
            matrices,
            t,
            t_certified: false,
            column_masks,
            row_masks,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// Whether `t` was verified rather than taken on trust.
    pub fn t_certified(&self) -> bool {
        self.t_certified
    }

    pub fn matrices(&self) -> &[GfMatrix] {
        &self.matrices
    }

    pub fn num_points(&self) -> u64 {
        u64::from(self.base).pow(self.m)
    }

    /// The digit vector of n, least significant digit first.
    pub fn index_digits(&self, n: u64) -> Vec<u8> {
        let b = u64::from(self.base);
        let mut rest = n;
        (0..self.m)
            .map(|_| {
                let d = (rest % b) as u8;
                rest /= b;
                d
            })
            .collect()
    }

    /// η_{n,i}: the digits C_i·n̄ read most significant first.
    pub fn label(&self, n: u64, i: usize) -> u64 {
        if let Some(cols) = &self.column_masks {
            let mut label = 0;
            let mut bits = n;
            let mut c = 0;
            while bits != 0 {
                if bits & 1 == 1 {
                    label ^= cols[i][c];
                }
                bits >>= 1;
                c += 1;
            }
            return label;
        }
        let digits = self
            .matrices[i]
            .matvec(&self.index_digits(n))
            .expect("digit vector has length m");
        let b = u64::from(self.base);
        digits.iter().fold(0u64, |acc, &d| acc * b + u64::from(d))
    }

    /// Point n of the net; every coordinate is η_{n,i} / b^m.
    pub fn point(&self, n: u64) -> Result<Vec<f64>> {
        if n >= self.num_points() {
            return Err(Error::out_of_range(
                "point index",
                format!("n = {n}, net has {} points", self.num_points()),
            ));
        }
        let scale = self.num_points() as f64;
        Ok((0..self.dim()).map(|i| self.label(n, i) as f64 / scale).collect())
    }

    /// Visits the label vector (η_{n,1}, ..., η_{n,s}) of every point in index order.
    /// In base 2 the labels of n follow from those of n − 1 by XOR-ing the columns
    /// of the index bits that flipped.
    pub fn for_each_labels<F: FnMut(u64, &[u64])>(&self, mut f: F) {
        let s = self.dim();
        let total = self.num_points();
        let mut labels = vec![0u64; s];
        if let Some(cols) = &self.column_masks {
            f(0, &labels);
            for n in 1..total {
                let flipped = n ^ (n - 1);
                for (lab, col) in labels.iter_mut().zip(cols) {
                    let mut bits = flipped;
                    let mut c = 0;
                    while bits != 0 {
                        if bits & 1 == 1 {
                            *lab ^= col[c];
                        }
                        bits >>= 1;
                        c += 1;
                    }
                }
                f(n, &labels);
            }
        } else {
            for n in 0..total {
                for (i, lab) in labels.iter_mut().enumerate() {
                    *lab = self.label(n, i);
                }
                f(n, &labels);
            }
        }
    }

    /// Whether the leading rows selected by `counts` are linearly independent.
    fn leading_rows_independent(&self, counts: &[u32]) -> bool {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            return true;
        }
        if let Some(rows) = &self.row_masks {
            let mut stack: Vec<u64> = counts
                .iter()
                .zip(rows)
                .flat_map(|(&d, r)| r[..d as usize].iter().copied())
                .collect();
            return rank_packed(&mut stack) == total as usize;
        }
        let parts: Vec<GfMatrix> = counts
            .iter()
            .zip(&self.matrices)
            .map(|(&d, c)| c.leading_rows(d as usize))
            .collect();
        GfMatrix::vstack(&parts).expect("same shape").rank() == total as usize
    }
}

/// Point `n` of `net`; see [`DigitalNet::point`].
pub fn net_point(n: u64, net: &DigitalNet) -> Result<Vec<f64>> {
    net.point(n)
}

/// Number of compositions of m into s nonnegative parts.
fn composition_count(m: u32, s: usize) -> u128 {
    let (n, k) = (m as u128 + s as u128 - 1, s as u128 - 1);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Calls `f` with every vector of `parts` nonnegative integers summing to `total`,
/// stopping early when `f` returns false. Returns false if stopped early.
pub(crate) fn for_each_composition<F: FnMut(&[u32]) -> bool>(total: u32, parts: usize, mut f: F) -> bool {
    fn rec<F: FnMut(&[u32]) -> bool>(buf: &mut Vec<u32>, left: u32, parts: usize, f: &mut F) -> bool {
        if buf.len() + 1 == parts {
            buf.push(left);
            let keep_going = f(buf);
            buf.pop();
            return keep_going;
        }
        for d in 0..=left {
            buf.push(d);
            let keep_going = rec(buf, left - d, parts, f);
            buf.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
    if parts == 0 {
        return total != 0 || f(&[]);
    }
    let mut buf = Vec::with_capacity(parts);
    rec(&mut buf, total, parts, &mut f)
}

/// Whether the net is a (t_candidate, m, s)-net, by the rank criterion: for every
/// d with Σd_i = m - t the leading d_i rows of the C_i must be independent.
pub fn verify_tms_net(net: &DigitalNet, t_candidate: u32) -> bool {
    if t_candidate >= net.m() {
        return true;
    }
    let strength = net.m() - t_candidate;
    let ok = for_each_composition(strength, net.dim(), |d| net.leading_rows_independent(d));
    debug_assert!(
        net.num_points() > 1 << 14 || Some(ok) == verify_tms_net_by_counting(net, t_candidate).ok(),
        "rank criterion and point counting disagree"
    );
    ok
}

/// Literal elementary-interval counting: every box of volume b^{t-m} must hold b^t points.
pub fn verify_tms_net_by_counting(net: &DigitalNet, t_candidate: u32) -> Result<bool> {
    let n = net.num_points();
    if n > COUNTING_MAX_POINTS {
        return Err(Error::out_of_range(
            "counting oracle",
            format!("b^m = {n} exceeds {COUNTING_MAX_POINTS}"),
        ));
    }
    if t_candidate >= net.m() {
        return Ok(true);
    }
    let b = u64::from(net.base());
    let m = net.m();
    let s = net.dim();
    let labels: Vec<Vec<u64>> = (0..n).map(|k| (0..s).map(|i| net.label(k, i)).collect()).collect();
    let strength = m - t_candidate;
    let expected = b.pow(t_candidate);
    let mut counts = vec![0u64; b.pow(strength) as usize];
    Ok(for_each_composition(strength, s, |d| {
        counts.iter_mut().for_each(|c| *c = 0);
        for lab in &labels {
            let mut cell = 0u64;
            for (i, &di) in d.iter().enumerate() {
                let digit_block = lab[i] / b.pow(m - di);
                cell = cell * b.pow(di) + digit_block;
            }
            counts[cell as usize] += 1;
        }
        counts.iter().all(|&c| c == expected)
    }))
}

/// Smallest t for which the net is a (t,m,s)-net.
pub fn t_value(net: &DigitalNet) -> u32 {
    (0..=net.m()).find(|&t| verify_tms_net(net, t)).unwrap_or(net.m())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_net(s: usize, m: usize) -> DigitalNet {
        DigitalNet::with_exact_t((0..s).map(|_| GfMatrix::identity(2, m).unwrap()).collect()).unwrap()
    }

    #[test]
    fn first_sobol_coordinate_is_identity() {
        for m in [1, 5, 17, 32] {
            let c = sobol_matrices(1, m).unwrap();
            assert_eq!(c[0], GfMatrix::identity(2, m as usize).unwrap());
        }
    }

    #[test]
    fn second_sobol_coordinate_is_pascal_mod_2() {
        let c = sobol_matrices(2, 3).unwrap();
        let expected = GfMatrix::from_rows(2, &[vec![1, 1, 1], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(c[1], expected);
        // binomial(c, r) mod 2 for a larger size
        let c = sobol_matrices(2, 12).unwrap();
        for r in 0..12usize {
            for col in 0..12usize {
                let binom_odd = col >= r && (col & r) == r;
                assert_eq!(c[1].get(r, col) == 1, binom_odd, "entry ({r},{col})");
            }
        }
        let net = DigitalNet::sobol(2, 3).unwrap();
        assert!(verify_tms_net(&net, 0));
    }

    #[test]
    fn sobol_points_match_reference_prefix() {
        // Unscrambled Sobol points in natural index order (a Gray-code generator
        // emits the same set with index k at position k ^ (k >> 1)).
        let net = DigitalNet::sobol(3, 3).unwrap();
        let expected = [
            [0.0, 0.0, 0.0],
            [0.5, 0.5, 0.5],
            [0.25, 0.75, 0.75],
            [0.75, 0.25, 0.25],
            [0.125, 0.625, 0.375],
            [0.625, 0.125, 0.875],
            [0.375, 0.375, 0.625],
            [0.875, 0.875, 0.125],
        ];
        for (n, e) in expected.iter().enumerate() {
            assert_eq!(net.point(n as u64).unwrap(), e.to_vec(), "point {n}");
        }
    }

    #[test]
    fn sobol_three_dims_has_t_at_most_one() {
        let net = DigitalNet::sobol(3, 8).unwrap();
        assert!(net.t_certified());
        assert!(net.t() <= 1);
        assert_eq!(verify_tms_net_by_counting(&net, net.t()).unwrap(), true);
        if net.t() > 0 {
            assert!(!verify_tms_net_by_counting(&net, net.t() - 1).unwrap());
        }
    }

    #[test]
    fn sobol_range_errors() {
        assert!(sobol_matrices(0, 4).is_err());
        assert!(sobol_matrices(11, 4).is_err());
        assert!(sobol_matrices(2, 0).is_err());
        assert!(sobol_matrices(2, 33).is_err());
        assert!(sobol_matrices(10, 32).is_ok());
    }

    #[test]
    fn net_point_examples() {
        let net = identity_net(1, 2);
        assert_eq!(net.point(0).unwrap(), vec![0.0]);
        assert_eq!(net.point(1).unwrap(), vec![0.5]);
        assert_eq!(net.point(2).unwrap(), vec![0.25]);
        assert!(net.point(4).is_err());
    }

    #[test]
    fn van_der_corput_is_zero_t_for_every_candidate() {
        for m in 1..=10 {
            let net = identity_net(1, m);
            for t in 0..=m as u32 + 1 {
                assert!(verify_tms_net(&net, t));
            }
            assert_eq!(net.t(), 0);
        }
    }

    #[test]
    fn diagonal_net_is_not_zero_t() {
        let net = identity_net(2, 2);
        assert!(!verify_tms_net(&net, 0));
        assert!(!verify_tms_net_by_counting(&net, 0).unwrap());
        assert_eq!(net.t(), 1);
        assert!(DigitalNet::new(vec![GfMatrix::identity(2, 2).unwrap(); 2], 0).is_err());
    }

    #[test]
    fn sobol_two_dims_is_zero_t_by_counting() {
        let net = DigitalNet::sobol(2, 8).unwrap();
        assert_eq!(net.t(), 0);
        assert!(verify_tms_net_by_counting(&net, 0).unwrap());
    }

    #[test]
    fn rank_criterion_agrees_with_counting() {
        for s in 1..=5 {
            for m in 1..=9 {
                let net = DigitalNet::sobol(s, m).unwrap();
                for t in 0..=m {
                    assert_eq!(
                        verify_tms_net(&net, t),
                        verify_tms_net_by_counting(&net, t).unwrap(),
                        "s={s} m={m} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn base_three_faure_pair() {
        // Identity and Pascal mod 3 generate a (0,m,2)-net over Z_3.
        let m = 4;
        let pascal: Vec<Vec<u32>> = (0..m)
            .map(|r| (0..m).map(|c| binom(c, r) % 3).collect())
            .collect();
        let net = DigitalNet::new(
            vec![GfMatrix::identity(3, m as usize).unwrap(), GfMatrix::from_rows(3, &pascal).unwrap()],
            0,
        )
        .unwrap();
        assert!(net.t_certified());
        assert!(verify_tms_net_by_counting(&net, 0).unwrap());
        // labels: identity reverses the base-3 digits of n
        assert_eq!(net.label(1, 0), 27);
        assert_eq!(net.label(3, 0), 9);
    }

    fn binom(n: u32, k: u32) -> u32 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u64, |acc, i| acc * u64::from(n - i) / u64::from(i + 1)) as u32
    }

    #[test]
    fn labels_are_bijective_for_nonsingular_matrices() {
        for m in 1..=12u32 {
            let net = DigitalNet::sobol(4, m).unwrap();
            for i in 0..4 {
                let mut seen = vec![false; net.num_points() as usize];
                for n in 0..net.num_points() {
                    let l = net.label(n, i) as usize;
                    assert!(!seen[l]);
                    seen[l] = true;
                }
            }
        }
    }

    #[test]
    fn gray_walk_visits_every_index_with_correct_labels() {
        let net = DigitalNet::sobol(3, 9).unwrap();
        let mut seen = vec![false; net.num_points() as usize];
        net.for_each_labels(|n, labels| {
            assert!(!seen[n as usize]);
            seen[n as usize] = true;
            for (i, &l) in labels.iter().enumerate() {
                assert_eq!(l, net.label(n, i));
            }
        });
        assert!(seen.iter().all(|&v| v));
    }

    #[test]
    fn t_candidates_are_monotone() {
        let net = DigitalNet::sobol(5, 10).unwrap();
        let t = net.t();
        for cand in 0..=10 {
            assert_eq!(verify_tms_net(&net, cand), cand >= t);
        }
    }

    #[test]
    fn declared_t_is_kept_above_certification_limit() {
        let net = DigitalNet::sobol(10, 32).unwrap();
        assert!(!net.t_certified());
        assert_eq!(net.t(), DirectionNumbers::embedded().sequence_t_bound(10));
        let small = DigitalNet::sobol(3, 22).unwrap();
        assert!(small.t_certified());
    }

    #[test]
    fn direction_file_parsing() {
        let dirs = DirectionNumbers::embedded();
        assert_eq!(dirs.max_dimension(), 10);
        assert_eq!(dirs.entries()[5].initial, vec![1, 3, 5, 13]);
        assert!(DirectionNumbers::parse("2 1 0 2\n").is_err());
        assert!(DirectionNumbers::parse("3 1 0 1\n").is_err());
        assert!(DirectionNumbers::parse("2 2 0 1\n").is_err());
        let two = DirectionNumbers::parse("d s a m_i\n2 1 0 1\n").unwrap();
        assert_eq!(two.max_dimension(), 2);
        assert!(sobol_matrices_with(&two, 3, 4).is_err());
    }

    #[test]
    fn compositions_enumerate_all() {
        let mut seen = Vec::new();
        for_each_composition(3, 2, |d| {
            seen.push(d.to_vec());
            true
        });
        assert_eq!(seen, vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
        assert_eq!(composition_count(3, 2), 4);
        assert_eq!(composition_count(22, 3), 276);
    }
}
