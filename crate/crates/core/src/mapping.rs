//! Mapping a digital net from [0,1)^s onto ℝ^s through labeled one-dimensional
//! projections, with locally equal weights per subcube.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::digital_net::{for_each_composition, DigitalNet};
use crate::error::{Error, Result};
use crate::partition::GeneralPartitionScheme;

/// Largest b^m that [`map_net`] will materialize.
pub const MAX_MAPPED_POINTS: u64 = 1 << 24;

/// Largest subcube on which [`verify_subcube_nets`] runs the box-counting oracle.
pub const SUBCUBE_COUNTING_LIMIT: u64 = 1 << 16;

/// η_{n,i}: the digits of C_i·n̄ read most significant first.
pub fn eta(n: u64, i: usize, net: &DigitalNet) -> u64 {
    net.label(n, i)
}

/// One product J_d = Π_i J_{i,d_i} of selected intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcubeSummary {
    /// Zero-based interval index per coordinate.
    pub d: Vec<u32>,
    /// m - Σ_i (m - m_{i,d_i}); negative values mean fewer than one net "slot".
    pub m_d: i64,
    pub count: u64,
    pub volume: f64,
}

impl SubcubeSummary {
    pub fn occupied(&self) -> bool {
        self.count > 0
    }
}

/// b^m points in ℝ^s with weights λ_n = Vol(J)/|N_J| and a subcube index.
#[derive(Clone, Debug)]
pub struct MappedPointSet {
    net: DigitalNet,
    scheme: GeneralPartitionScheme,
    s: usize,
    points: Vec<f64>,
    labels: Vec<u64>,
    cells: Vec<u32>,
    weights: Vec<f64>,
    /// Occupied subcubes, ordered by key.
    subcubes: Vec<SubcubeSummary>,
    lookup: BTreeMap<Vec<u32>, usize>,
    member_offsets: Vec<usize>,
    members: Vec<u64>,
}

/// Builds the point set x_{n,i} = z_{η_{n,i}} and its weights.
pub fn map_net(net: &DigitalNet, scheme: &GeneralPartitionScheme) -> Result<MappedPointSet> {
    if scheme.base() != net.base() || scheme.m() != net.m() {
        return Err(Error::Precondition(format!(
            "scheme uses b={}, m={} but the net has b={}, m={}",
            scheme.base(),
            scheme.m(),
            net.base(),
            net.m()
        )));
    }
    if scheme.dim() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            found: scheme.dim(),
        });
    }
    let n_pts = net.num_points();
    if n_pts > MAX_MAPPED_POINTS {
        return Err(Error::out_of_range(
            "point count",
            format!("{n_pts} points exceed the materialization limit {MAX_MAPPED_POINTS}"),
        ));
    }
    let s = net.dim();
    let total = n_pts as usize * s;
    let mut points = vec![0.0; total];
    let mut labels = vec![0u64; total];
    let mut cells = vec![0u32; total];
    let coords = scheme.coords();
    net.for_each_labels(|n, lab| {
        let base = n as usize * s;
        for i in 0..s {
            let (d, step) = coords[i].locate(lab[i]);
            labels[base + i] = lab[i];
            cells[base + i] = d as u32;
            points[base + i] = coords[i].point_in(d, step);
        }
    });

    let mut groups: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
    for n in 0..n_pts {
        let base = n as usize * s;
        groups.entry(cells[base..base + s].to_vec()).or_default().push(n);
    }
    let m = i64::from(net.m());
    let mut subcubes = Vec::with_capacity(groups.len());
    let mut lookup = BTreeMap::new();
    let mut member_offsets = vec![0usize];
    let mut members = Vec::with_capacity(n_pts as usize);
    let mut weights = vec![0.0; n_pts as usize];
    for (key, idx) in groups {
        let summary = summarize(scheme, &key, idx.len() as u64, m);
        let w = summary.volume / idx.len() as f64;
        for &n in &idx {
            weights[n as usize] = w;
        }
        lookup.insert(key, subcubes.len());
        subcubes.push(summary);
        members.extend_from_slice(&idx);
        member_offsets.push(members.len());
    }
    Ok(MappedPointSet {
        net: net.clone(),
        scheme: scheme.clone(),
        s,
        points,
        labels,
        cells,
        weights,
        subcubes,
        lookup,
        member_offsets,
        members,
    })
}

fn summarize(scheme: &GeneralPartitionScheme, d: &[u32], count: u64, m: i64) -> SubcubeSummary {
    let mut m_d = m;
    let mut volume = 1.0;
    for (p, &di) in scheme.coords().iter().zip(d) {
        let iv = &p.intervals()[di as usize];
        m_d -= m - i64::from(iv.m_d);
        volume *= iv.interval.width();
    }
    SubcubeSummary {
        d: d.to_vec(),
        m_d,
        count,
        volume,
    }
}

impl MappedPointSet {
    pub fn net(&self) -> &DigitalNet {
        &self.net
    }

    pub fn scheme(&self) -> &GeneralPartitionScheme {
        &self.scheme
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.points[n * self.s..(n + 1) * self.s]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.s)
    }

    /// η_{n,i} of point n.
    pub fn label(&self, n: usize, i: usize) -> u64 {
        self.labels[n * self.s + i]
    }

    /// Zero-based interval index of point n in coordinate i.
    pub fn cell(&self, n: usize, i: usize) -> u32 {
        self.cells[n * self.s + i]
    }

    /// Step of point n within its coordinate-i interval.
    pub fn step(&self, n: usize, i: usize) -> u64 {
        let d = self.cell(n, i) as usize;
        self.label(n, i) - self.scheme.coords()[i].intervals()[d].label_start
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Occupied subcubes ordered by key.
    pub fn occupied_subcubes(&self) -> &[SubcubeSummary] {
        &self.subcubes
    }

    /// Point indices in the occupied subcube at position `idx` of [`Self::occupied_subcubes`].
    pub fn members(&self, idx: usize) -> &[u64] {
        &self.members[self.member_offsets[idx]..self.member_offsets[idx + 1]]
    }

    pub fn subcube(&self, d: &[u32]) -> SubcubeSummary {
        match self.lookup.get(d) {
            Some(&idx) => self.subcubes[idx].clone(),
            None => summarize(&self.scheme, d, 0, i64::from(self.net.m())),
        }
    }

    /// Visits every selected subcube Π_i J_{i,d_i}, occupied or not, in key order.
    pub fn for_each_selected_subcube<F: FnMut(SubcubeSummary)>(&self, mut f: F) {
        let sizes: Vec<u32> = self.scheme.coords().iter().map(|p| p.len() as u32).collect();
        let mut d = vec![0u32; self.s];
        loop {
            f(self.subcube(&d));
            let mut i = self.s;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                d[i] += 1;
                if d[i] < sizes[i] {
                    break;
                }
                d[i] = 0;
            }
        }
    }

    /// Σ over occupied subcubes of Vol(J).
    pub fn occupied_volume(&self) -> f64 {
        self.subcubes.iter().map(|c| c.volume).sum()
    }

    /// Writes one line per point: the s coordinates followed by λ_n.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for (n, p) in self.points().enumerate() {
            for x in p {
                write!(out, "{x:e} ")?;
            }
            writeln!(out, "{:e}", self.weights[n])?;
        }
        Ok(())
    }
}

/// Weights λ_n of a mapped point set.
pub fn weights(ps: &MappedPointSet) -> &[f64] {
    ps.weights()
}

/// Points and weights read back from [`MappedPointSet::write_text`] output.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTable {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn read_point_table<R: BufRead>(input: R) -> Result<PointTable> {
    let mut dim = None;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("{tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let s = vals.len().checked_sub(1).filter(|&s| s > 0).ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: "expected coordinates followed by a weight".into(),
        })?;
        if *dim.get_or_insert(s) != s {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {} values, found {}", dim.unwrap_or(s) + 1, vals.len()),
            });
        }
        points.extend_from_slice(&vals[..s]);
        weights.push(vals[s]);
    }
    Ok(PointTable {
        dim: dim.unwrap_or(0),
        points,
        weights,
    })
}

/// Outcome of the shifted-net check on one selected subcube.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubcubeStatus {
    /// Count and every elementary box check out.
    Passed,
    /// Count is right; the subcube was too large for box counting.
    CountOnly,
    /// m_d < t: no guarantee applies and none is checked.
    Unverified,
    CountMismatch { expected: u64, found: u64 },
    /// Some elementary box of the rescaled subcube holds the wrong number of points.
    NotANet { composition: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubcubeCheck {
    pub summary: SubcubeSummary,
    pub status: SubcubeStatus,
    /// Occupied but holding fewer than b^t points; its weight is Vol/|N| all the same.
    pub underfilled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubcubeReport {
    pub t: u32,
    pub t_certified: bool,
    pub checks: Vec<SubcubeCheck>,
}

impl SubcubeReport {
    pub fn failures(&self) -> impl Iterator<Item = &SubcubeCheck> {
        self.checks.iter().filter(|c| {
            matches!(
                c.status,
                SubcubeStatus::CountMismatch { .. } | SubcubeStatus::NotANet { .. }
            )
        })
    }

    pub fn all_passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn count(&self, status: fn(&SubcubeStatus) -> bool) -> usize {
        self.checks.iter().filter(|c| status(&c.status)).count()
    }
}

/// For each selected subcube with m_d >= t: |N_d| = b^{m_d}, and the members rescaled
/// to [0,1)^s fill every elementary box of volume b^{t-m_d} with exactly b^t points.
pub fn verify_subcube_nets(ps: &MappedPointSet) -> SubcubeReport {
    let t = ps.net.t();
    let b = u64::from(ps.net.base());
    let mut checks = Vec::new();
    ps.for_each_selected_subcube(|summary| {
        let underfilled = summary.count > 0 && summary.count < b.pow(t);
        let status = if summary.m_d < i64::from(t) {
            SubcubeStatus::Unverified
        } else {
            check_subcube(ps, &summary, t)
        };
        checks.push(SubcubeCheck {
            summary,
            status,
            underfilled,
        });
    });
    SubcubeReport {
        t,
        t_certified: ps.net.t_certified(),
        checks,
    }
}

fn check_subcube(ps: &MappedPointSet, summary: &SubcubeSummary, t: u32) -> SubcubeStatus {
    let b = u64::from(ps.net.base());
    let m_d = summary.m_d as u32;
    let expected = b.pow(m_d);
    if summary.count != expected {
        return SubcubeStatus::CountMismatch {
            expected,
            found: summary.count,
        };
    }
    if expected > SUBCUBE_COUNTING_LIMIT {
        return SubcubeStatus::CountOnly;
    }
    let idx = ps.lookup[&summary.d];
    let members = ps.members(idx);
    let s = ps.s;
    let m_i: Vec<u32> = (0..s)
        .map(|i| ps.scheme.coords()[i].intervals()[summary.d[i] as usize].m_d)
        .collect();
    // rescaled coordinate i of a member is step / b^{m_{i,d_i}} exactly
    let steps: Vec<Vec<u64>> = members
        .iter()
        .map(|&n| (0..s).map(|i| ps.step(n as usize, i)).collect())
        .collect();
    let strength = m_d - t;
    let per_box = b.pow(t);
    let mut counts = vec![0u64; b.pow(strength) as usize];
    let mut failed = None;
    for_each_composition(strength, s, |e| {
        counts.iter_mut().for_each(|c| *c = 0);
        for st in &steps {
            let mut cell = 0u64;
            for i in 0..s {
                cell = cell * b.pow(e[i]) + st[i] / b.pow(m_i[i] - e[i]);
            }
            counts[cell as usize] += 1;
        }
        if counts.iter().all(|&c| c == per_box) {
            true
        } else {
            failed = Some(e.to_vec());
            false
        }
    });
    match failed {
        None => SubcubeStatus::Passed,
        Some(composition) => SubcubeStatus::NotANet { composition },
    }
}
