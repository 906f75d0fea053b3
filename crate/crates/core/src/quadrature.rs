//! Integration with mapped nets, the inverse-CDF baseline, and the benchmark and
//! verification drivers behind the command-line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::digital_net::{DigitalNet, DirectionNumbers};
use crate::error::{Error, Result};
use crate::error_bounds::{delta_bruteforce, neumaier_sum, DeltaQuery};
use crate::mapping::{map_net, verify_subcube_nets, MappedPointSet, SubcubeStatus};
use crate::partition::{erfinv, geometric_schedule, Ambient, GeneralPartitionScheme, Interval, Partition1D, SchemeKind};

/// Where an integrand lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    RealSpace,
    UnitCube,
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Integrand {
    name: String,
    dim: usize,
    domain: Domain,
    exact: Option<f64>,
    eval: Evaluator,
}

impl std::fmt::Debug for Integrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("exact", &self.exact)
            .finish()
    }
}

impl Integrand {
    pub fn new<F>(name: impl Into<String>, dim: usize, domain: Domain, exact: Option<f64>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Integrand {
            name: name.into(),
            dim,
            domain,
            exact,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn exact(&self) -> Option<f64> {
        self.exact
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// Names accepted by [`integrand`].
pub const INTEGRANDS: [&str; 4] = ["gaussian-exp", "constant", "product-gaussian", "smooth-unit"];

/// A registered integrand in dimension s.
///
/// * `gaussian-exp`: e^{2√π Σx_i} e^{-π Σx_i²}, integral e^s.
/// * `constant`: 1 on ℝ^s (no finite integral).
/// * `product-gaussian`: e^{-π Σx_i²}, integral 1.
/// * `smooth-unit`: Π (π/2) sin(π x_i) on [0,1]^s and 0 elsewhere, integral 1.
pub fn integrand(name: &str, s: usize) -> Result<Integrand> {
    if s == 0 {
        return Err(Error::out_of_range("dimension", "s must be at least 1"));
    }
    use std::f64::consts::PI;
    let sqrt_pi = PI.sqrt();
    Ok(match name {
        "gaussian-exp" => Integrand::new(name, s, Domain::RealSpace, Some((s as f64).exp()), move |x: &[f64]| {
            let lin: f64 = x.iter().sum();
            let sq: f64 = x.iter().map(|v| v * v).sum();
            (2.0 * sqrt_pi * lin - PI * sq).exp()
        }),
        "constant" => Integrand::new(name, s, Domain::RealSpace, None, |_: &[f64]| 1.0),
        "product-gaussian" => Integrand::new(name, s, Domain::RealSpace, Some(1.0), |x: &[f64]| {
            (-PI * x.iter().map(|v| v * v).sum::<f64>()).exp()
        }),
        "smooth-unit" => Integrand::new(name, s, Domain::UnitCube, Some(1.0), |x: &[f64]| {
            x.iter()
                .map(|&v| if (0.0..=1.0).contains(&v) { PI / 2.0 * (PI * v).sin() } else { 0.0 })
                .product()
        }),
        other => {
            return Err(Error::Config(format!(
                "unknown integrand {other:?}; known: {}",
                INTEGRANDS.join(", ")
            )))
        }
    })
}

fn check_dim(f: &Integrand, s: usize) -> Result<()> {
    if f.dim() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: f.dim(),
        });
    }
    Ok(())
}

/// Q(f) = Σ_n λ_n f(x_n), compensated, in index order.
pub fn integrate(f: &Integrand, ps: &MappedPointSet) -> Result<f64> {
    check_dim(f, ps.dim())?;
    Ok(neumaier_sum(ps.points().zip(ps.weights()).map(|(x, &w)| w * f.eval(x))))
}

/// Per-coordinate lookup from label to (interval, point) without materializing points.
struct CoordinateTable<'a> {
    partition: &'a Partition1D,
    /// (left endpoint, spacing) per interval.
    grid: Vec<(f64, f64)>,
}

impl<'a> CoordinateTable<'a> {
    fn new(partition: &'a Partition1D) -> Self {
        let b = f64::from(partition.base());
        let grid = partition
            .intervals()
            .iter()
            .map(|iv| (iv.interval.left(), iv.interval.width() / b.powi(iv.m_d as i32)))
            .collect();
        CoordinateTable { partition, grid }
    }

    fn lookup(&self, label: u64) -> (usize, f64) {
        let (d, step) = self.partition.locate(label);
        let (left, h) = self.grid[d];
        (d, left + step as f64 * h)
    }
}

/// Result of [`integrate_streaming`].
#[derive(Clone, Debug, PartialEq)]
pub struct StreamingResult {
    pub value: f64,
    /// Occupied subcubes as (interval indices, point count, Σ f over members).
    pub subcubes: Vec<(Vec<u32>, u64, f64)>,
}

/// Q(f) for the net mapped through `scheme`, in one pass over the net without
/// storing points: per-subcube sums are accumulated, then weighted by Vol/|N|.
pub fn integrate_streaming(f: &Integrand, net: &DigitalNet, scheme: &GeneralPartitionScheme) -> Result<StreamingResult> {
    check_dim(f, net.dim())?;
    if scheme.dim() != net.dim() || scheme.base() != net.base() || scheme.m() != net.m() {
        return Err(Error::Precondition("scheme and net disagree on s, b or m".into()));
    }
    let s = net.dim();
    let tables: Vec<CoordinateTable> = scheme.coords().iter().map(CoordinateTable::new).collect();
    let sizes: Vec<usize> = scheme.coords().iter().map(Partition1D::len).collect();
    let dense_len = sizes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).filter(|&n| n <= 1 << 22);

    // (sum, compensation, count)
    let mut dense: Vec<(f64, f64, u64)> = vec![(0.0, 0.0, 0); dense_len.unwrap_or(0)];
    let mut sparse: BTreeMap<usize, (f64, f64, u64)> = BTreeMap::new();
    let mut x = vec![0.0; s];
    net.for_each_labels(|_, labels| {
        let mut key = 0usize;
        for i in 0..s {
            let (d, z) = tables[i].lookup(labels[i]);
            x[i] = z;
            key = key * sizes[i] + d;
        }
        let v = f.eval(&x);
        let acc = if dense_len.is_some() {
            &mut dense[key]
        } else {
            sparse.entry(key).or_insert((0.0, 0.0, 0))
        };
        let t = acc.0 + v;
        if acc.0.abs() >= v.abs() {
            acc.1 += (acc.0 - t) + v;
        } else {
            acc.1 += (v - t) + acc.0;
        }
        acc.0 = t;
        acc.2 += 1;
    });
    let occupied: Vec<(usize, (f64, f64, u64))> = if dense_len.is_some() {
        dense.into_iter().enumerate().filter(|(_, a)| a.2 > 0).collect()
    } else {
        sparse.into_iter().collect()
    };
    let mut terms = Vec::with_capacity(occupied.len());
    let mut subcubes = Vec::with_capacity(occupied.len());
    for (key, (sum, comp, count)) in occupied {
        let mut d = vec![0u32; s];
        let mut rest = key;
        let mut volume = 1.0;
        for i in (0..s).rev() {
            d[i] = (rest % sizes[i]) as u32;
            rest /= sizes[i];
            volume *= scheme.coords()[i].intervals()[d[i] as usize].interval.width();
        }
        let total = sum + comp;
        terms.push(volume / count as f64 * total);
        subcubes.push((d, count, total));
    }
    Ok(StreamingResult {
        value: neumaier_sum(terms),
        subcubes,
    })
}

/// x = erfinv(2u − 1)/√π per coordinate: the inverse CDF of the density e^{-πx²}.
pub fn invcdf_transform(u: f64) -> Result<f64> {
    Ok(erfinv(2.0 * u - 1.0)? / std::f64::consts::PI.sqrt())
}

/// (1/N) Σ_n f(x_n) e^{π|x_n|²} with x_n the inverse-CDF image of net point n.
///
/// For `gaussian-exp` the summand is e^{2 Σ_i erfinv(2u_i − 1)}. A coordinate
/// u = 0 maps to −∞, where the integrand times the density weight is taken as 0.
pub fn baseline_invcdf(f: &Integrand, net: &DigitalNet) -> Result<f64> {
    check_dim(f, net.dim())?;
    if f.domain() != Domain::RealSpace {
        return Err(Error::Precondition(format!("{} is not an integrand on ℝ^s", f.name())));
    }
    let s = net.dim();
    let scale = net.num_points() as f64;
    let mut x = vec![0.0; s];
    let mut terms = Vec::with_capacity(net.num_points() as usize);
    let mut failure = None;
    net.for_each_labels(|_, labels| {
        if failure.is_some() {
            return;
        }
        let mut sq = 0.0;
        for i in 0..s {
            if labels[i] == 0 {
                terms.push(0.0);
                return;
            }
            match invcdf_transform(labels[i] as f64 / scale) {
                Ok(v) => {
                    x[i] = v;
                    sq += v * v;
                }
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
        terms.push(f.eval(&x) * (std::f64::consts::PI * sq).exp());
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(neumaier_sum(terms) / scale)
}

/// Scheme names accepted in configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Erfinv,
    Dyadic,
    Unit,
    Trivial,
    Custom,
}

impl std::str::FromStr for SchemeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "erfinv" => SchemeName::Erfinv,
            "dyadic" => SchemeName::Dyadic,
            "unit" => SchemeName::Unit,
            "trivial" => SchemeName::Trivial,
            "custom" => SchemeName::Custom,
            other => return Err(Error::Config(format!("unknown scheme {other:?}"))),
        })
    }
}

/// One interval of a custom partition: either b-adic (`j`, `l`) or explicit (`left`, `right`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub j: Option<i32>,
    pub l: Option<i64>,
    pub left: Option<f64>,
    pub right: Option<f64>,
    /// The interval receives b^points_exponent labels.
    pub points_exponent: u32,
}

impl IntervalSpec {
    fn to_interval(&self, base: u32) -> Result<Interval> {
        match (self.j, self.l, self.left, self.right) {
            (Some(j), Some(l), None, None) => Ok(Interval::badic(base, j, l)),
            (None, None, Some(a), Some(b)) => Interval::general(a, b),
            _ => Err(Error::Config("an interval needs either j and l or left and right".into())),
        }
    }
}

/// Benchmark and verification settings. Missing keys take the values of [`Config::default`],
/// which describe the Gaussian-exponential benchmark in three dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub base: u32,
    pub m_min: u32,
    pub m_max: u32,
    pub s: usize,
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    pub scheme: SchemeName,
    pub direction_numbers_path: Option<PathBuf>,
    pub integrand: String,
    pub output: Option<PathBuf>,
    /// Intervals of a custom partition, used in every coordinate.
    pub intervals: Vec<IntervalSpec>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            base: 2,
            m_min: 13,
            m_max: 22,
            s: 3,
            x: vec![6.0, 12.0],
            scheme: SchemeName::Erfinv,
            direction_numbers_path: None,
            integrand: "gaussian-exp".into(),
            output: None,
            intervals: Vec::new(),
        }
    }
}

/// Largest m the tools accept.
pub const MAX_M: u32 = 30;

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.base != 2 {
            return bad(format!("base {} is not supported; the Sobol construction is base 2", self.base));
        }
        if self.m_min > self.m_max || self.m_min < 3 || self.m_max > MAX_M {
            return bad(format!(
                "need 3 <= m_min <= m_max <= {MAX_M}, got {}..{}",
                self.m_min, self.m_max
            ));
        }
        let available = self.direction_numbers()?.max_dimension();
        if self.s == 0 || self.s > available {
            return bad(format!("s = {} is unsupported; the direction numbers cover 1 <= s <= {available}", self.s));
        }
        if self.scheme == SchemeName::Erfinv {
            if self.x.is_empty() {
                return bad("the erfinv scheme needs at least one X".into());
            }
            if let Some(x) = self.x.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return bad(format!("X must be positive and finite, got {x}"));
            }
        }
        if self.scheme == SchemeName::Custom {
            if self.intervals.is_empty() {
                return bad("the custom scheme needs [[intervals]]".into());
            }
            if self.m_min != self.m_max {
                return bad("a custom partition fixes m, so m_min must equal m_max".into());
            }
        }
        integrand(&self.integrand, self.s)?;
        Ok(())
    }

    pub fn direction_numbers(&self) -> Result<DirectionNumbers> {
        match &self.direction_numbers_path {
            Some(p) => DirectionNumbers::load(p),
            None => Ok(DirectionNumbers::embedded()),
        }
    }

    /// X values that index separate runs: the configured list for erfinv, one run otherwise.
    pub fn runs(&self) -> Vec<Option<f64>> {
        if self.scheme == SchemeName::Erfinv {
            self.x.iter().map(|&x| Some(x)).collect()
        } else {
            vec![None]
        }
    }

    pub fn scheme_for(&self, m: u32, x: Option<f64>) -> Result<GeneralPartitionScheme> {
        let kind = match (self.scheme, x) {
            (SchemeName::Erfinv, Some(x_scale)) => SchemeKind::Erfinv { x_scale },
            (SchemeName::Erfinv, None) => return Err(Error::Config("the erfinv scheme needs X".into())),
            (SchemeName::Dyadic, _) => SchemeKind::Dyadic,
            (SchemeName::Unit, _) => SchemeKind::Unit,
            (SchemeName::Trivial, _) => SchemeKind::Trivial,
            (SchemeName::Custom, _) => {
                let intervals = self
                    .intervals
                    .iter()
                    .map(|spec| Ok((spec.to_interval(self.base)?, spec.points_exponent)))
                    .collect::<Result<Vec<_>>>()?;
                let p = Partition1D::new(self.base, m, intervals)?;
                return GeneralPartitionScheme::new(vec![p; self.s], vec![Ambient::Explicit; self.s]);
            }
        };
        GeneralPartitionScheme::uniform(kind, self.s, self.base, m)
    }
}

/// Which rule produced a benchmark row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// The mapped net with locally equal weights.
    Rs,
    /// The inverse-CDF baseline.
    InvCom,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub m: u32,
    pub x: Option<f64>,
    pub method: Method,
    pub value: f64,
    pub error: f64,
    pub seconds: f64,
}

/// Runs every configured (m, X) pair and the baseline for each m.
pub fn bench(config: &Config) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let f = integrand(&config.integrand, config.s)?;
    let exact = f
        .exact()
        .ok_or_else(|| Error::Config(format!("{} has no finite reference value", f.name())))?;
    let dirs = config.direction_numbers()?;
    let mut rows = Vec::new();
    for m in config.m_min..=config.m_max {
        let net = DigitalNet::sobol_with(&dirs, config.s, m)?;
        for x in config.runs() {
            let scheme = config.scheme_for(m, x)?;
            let start = Instant::now();
            let value = integrate_streaming(&f, &net, &scheme)?.value;
            let seconds = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                m,
                x,
                method: Method::Rs,
                value,
                error: (value - exact).abs(),
                seconds,
            });
        }
        if f.domain() == Domain::RealSpace {
            let start = Instant::now();
            let value = baseline_invcdf(&f, &net)?;
            let seconds = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                m,
                x: None,
                method: Method::InvCom,
                value,
                error: (value - exact).abs(),
                seconds,
            });
        }
    }
    Ok(rows)
}

fn x_label(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("X{}", x as i64)
    } else {
        format!("X{x}")
    }
}

/// Table layout: one line per m with the error columns, then the time columns.
pub fn bench_csv(config: &Config, rows: &[BenchRow]) -> String {
    let runs = config.runs();
    let rs_label = |x: &Option<f64>| match x {
        Some(x) => format!("rs_{}", x_label(*x)),
        None => "rs".to_string(),
    };
    let has_baseline = rows.iter().any(|r| r.method == Method::InvCom);
    let mut header = vec!["m".to_string()];
    header.extend(runs.iter().map(|x| format!("e_{}", rs_label(x))));
    if has_baseline {
        header.push("e_invcom".into());
    }
    header.extend(runs.iter().map(|x| format!("t_{}", rs_label(x))));
    if has_baseline {
        header.push("t_invcom".into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for m in config.m_min..=config.m_max {
        let find = |method: Method, x: &Option<f64>| rows.iter().find(|r| r.m == m && r.method == method && &r.x == x);
        let mut errors = Vec::new();
        let mut times = Vec::new();
        for x in &runs {
            if let Some(r) = find(Method::Rs, x) {
                errors.push(format!("{:.6e}", r.error));
                times.push(format!("{:.3}", r.seconds));
            }
        }
        if let Some(r) = find(Method::InvCom, &None) {
            errors.push(format!("{:.6e}", r.error));
            times.push(format!("{:.3}", r.seconds));
        }
        let _ = writeln!(out, "{m},{},{}", errors.join(","), times.join(","));
    }
    out
}

/// One structural check of [`verify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub m: u32,
    pub x: Option<f64>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Largest m for which [`verify`] materializes point sets.
pub const VERIFY_MAX_M: u32 = 16;

/// Structural invariants of the configured constructions, for m up to [`VERIFY_MAX_M`].
pub fn verify(config: &Config) -> Result<VerifyReport> {
    config.validate()?;
    let dirs = config.direction_numbers()?;
    let mut checks = Vec::new();
    for m in config.m_min..=config.m_max.min(VERIFY_MAX_M) {
        let net = DigitalNet::sobol_with(&dirs, config.s, m)?;
        let mut push = |name: &str, x: Option<f64>, passed: bool, detail: String| {
            checks.push(CheckResult {
                name: name.into(),
                m,
                x,
                passed,
                detail,
            })
        };
        push(
            "net-quality",
            None,
            true,
            format!("t = {} ({})", net.t(), if net.t_certified() { "certified" } else { "declared" }),
        );
        if config.scheme != SchemeName::Custom {
            let schedule = geometric_schedule(m)?;
            let total: u128 = schedule.iter().map(|&e| 1u128 << e).sum();
            push("schedule-sum", None, total == 1u128 << m, format!("Σ 2^m_l = {total}"));
        }
        for x in config.runs() {
            let scheme = config.scheme_for(m, x)?;
            let ps = map_net(&net, &scheme)?;

            let mut projection_ok = true;
            for i in 0..config.s {
                let mut got: Vec<f64> = ps.points().map(|p| p[i]).collect();
                let mut want = scheme.coords()[i].labels();
                got.sort_by(f64::total_cmp);
                want.sort_by(f64::total_cmp);
                projection_ok &= got == want;
            }
            push("projection", x, projection_ok, "coordinate multisets equal the label lists".into());

            let report = verify_subcube_nets(&ps);
            let failures = report.failures().count();
            let passed = report.count(|st| *st == SubcubeStatus::Passed);
            let unverified = report.count(|st| *st == SubcubeStatus::Unverified);
            let underfilled = report.checks.iter().filter(|c| c.underfilled).count();
            push(
                "subcube-nets",
                x,
                failures == 0,
                format!("{passed} passed, {failures} failed, {unverified} with m_d < t, {underfilled} underfilled"),
            );

            let total = neumaier_sum(ps.weights().iter().copied());
            let volume = ps.occupied_volume();
            push(
                "weight-sum",
                x,
                (total - volume).abs() <= 1e-12 * volume.max(1.0),
                format!("Σλ = {total:e}, occupied volume = {volume:e}"),
            );

            if scheme.is_badic() {
                let mut worst: f64 = 0.0;
                for c in ps.occupied_subcubes() {
                    let (j, l): (Vec<i32>, Vec<i64>) = c
                        .d
                        .iter()
                        .enumerate()
                        .map(|(i, &di)| {
                            let x = scheme.coords()[i].intervals()[di as usize].interval.as_badic().expect("b-adic");
                            (x.j, x.l)
                        })
                        .unzip();
                    let q = DeltaQuery::new(j, vec![0; config.s], l)?;
                    worst = worst.max(delta_bruteforce(&ps, &q)?);
                }
                push("delta-zero", x, worst <= 1e-12, format!("max δ_(j,0,l) over occupied subcubes = {worst:e}"));
            }
        }
    }
    Ok(VerifyReport { checks })
}
