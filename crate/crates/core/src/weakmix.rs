//! Weak-mixing diagnostics: the obstruction series of the transposed cocycle on `R^d / Z^d`,
//! eigenvalue candidate scans, and Cesaro averages of correlations along orbits.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genperm::GeneralizedPermutation;
use crate::involution::{InvolutionError, LinearInvolution, MarkedPoint};
use crate::rauzy::{Move, RauzyError, Transitions};
use crate::sampler::{LengthSampler, SampleError};
use crate::scalar::{ln_bigint, rational_to_f64};
use crate::suspension::{stratum_of, SuspensionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeakMixError {
    #[error("float backend lost precision at step {step} with {bits} bits")]
    PrecisionExhausted { step: usize, bits: u32 },
    #[error("vector has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lengths must be positive")]
    NonPositiveLengths,
    #[error("the suspension has genus {genus}; weak mixing is only expected for genus greater than 1")]
    GenusTooSmall { genus: i64 },
    #[error("invalid t grid: {0}")]
    InvalidGrid(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("no regular orbit found after {0} attempts")]
    SingularOrbit(usize),
    #[error(transparent)]
    Rauzy(#[from] RauzyError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Suspension(#[from] SuspensionError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
}

/// Neighborhood of the starting lengths whose revisits define the return set `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReturnWindow {
    /// Hilbert-metric radius around the projectivized initial lengths
    pub radius: f64,
    /// also require the permutation to be back at the start
    pub same_permutation: bool,
}

impl Default for ReturnWindow {
    fn default() -> Self {
        ReturnWindow { radius: 1.0, same_permutation: false }
    }
}

/// `ln x` for a positive integer of any size.
/// The elementary induction steps from `(perm, lambda)` and the return set of a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductionTrace {
    /// `(winner, loser)` of each step
    pub steps: Vec<(usize, usize)>,
    /// steps `n >= 1` at which the lengths lie in the return window
    pub returns: Vec<usize>,
    /// Hilbert distance to the initial lengths after each step (index `n - 1`)
    pub distances: Vec<f64>,
}

impl InductionTrace {
    /// Runs `n` steps with exact lengths (aligned to the alphabet of `perm`).
    pub fn new(
        perm: &GeneralizedPermutation,
        lambda: &[BigRational],
        n: usize,
        window: &ReturnWindow,
    ) -> Result<Self, WeakMixError> {
        if lambda.len() != perm.d() {
            return Err(WeakMixError::DimensionMismatch { expected: perm.d(), got: lambda.len() });
        }
        if lambda.iter().any(|x| !x.is_positive()) {
            return Err(WeakMixError::NonPositiveLengths);
        }
        // projective quantities only, so clear denominators
        let den = lambda.iter().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
        let mut lam: Vec<BigInt> = lambda.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        let logs0: Vec<f64> = lam.iter().map(ln_bigint).collect();
        let mut logs = logs0.clone();
        let mut trans = Transitions::new(perm);
        let mut node = 0;
        let mut trace = InductionTrace { steps: Vec::with_capacity(n), returns: Vec::new(), distances: Vec::new() };
        for step in 1..=n {
            let (a0, a1) = trans.last_letters(node);
            let kind = match lam[a0].cmp(&lam[a1]) {
                std::cmp::Ordering::Greater => Move::Top,
                std::cmp::Ordering::Less => Move::Bottom,
                std::cmp::Ordering::Equal => return Err(RauzyError::Tie { step: step - 1 }.into()),
            };
            let e = trans.step(node, kind)?;
            lam[e.winner] = &lam[e.winner] - &lam[e.loser];
            logs[e.winner] = ln_bigint(&lam[e.winner]);
            node = e.target;
            trace.steps.push((e.winner, e.loser));
            let diffs = logs.iter().zip(&logs0).map(|(a, b)| a - b);
            let (lo, hi) = diffs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let dist = hi - lo;
            trace.distances.push(dist);
            if dist <= window.radius && (!window.same_permutation || node == 0) {
                trace.returns.push(step);
            }
        }
        Ok(trace)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Exact distances `d_n = k_n / denominator`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactDistances {
    #[serde(with = "decimal")]
    pub denominator: BigInt,
    #[serde(with = "decimal_vec")]
    pub numerators: Vec<BigInt>,
}

mod decimal {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod decimal_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|x| x.parse().map_err(serde::de::Error::custom)).collect()
    }
}

/// The vector `v` whose orbit under the transposed cocycle is followed modulo `Z^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum ObstructionVector {
    /// exact rational coordinates
    Exact(Vec<BigRational>),
    /// fixed-point binary fractions carrying `bits` bits after the point
    Float { values: Vec<f64>, bits: u32 },
}

impl ObstructionVector {
    /// `t * (1, ..., 1)`.
    pub fn diagonal(t: &BigRational, d: usize) -> Self {
        ObstructionVector::Exact(vec![t.clone(); d])
    }

    pub fn dim(&self) -> usize {
        match self {
            ObstructionVector::Exact(v) => v.len(),
            ObstructionVector::Float { values, .. } => values.len(),
        }
    }

    /// The same vector with exact coordinates (every `f64` is a dyadic rational).
    pub fn to_exact(&self) -> Option<Self> {
        match self {
            ObstructionVector::Exact(_) => Some(self.clone()),
            ObstructionVector::Float { values, .. } => values
                .iter()
                .map(|&x| BigRational::from_float(x))
                .collect::<Option<Vec<_>>>()
                .map(ObstructionVector::Exact),
        }
    }
}

/// `d_n = dist((B^n)^* v, Z^d)` in the sup norm, for `n = 0..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionSeries {
    pub distances: Vec<f64>,
    pub returns: Vec<usize>,
    /// minimum over the return set
    pub window_min: Option<f64>,
    pub min: f64,
    /// maximum over the last quarter of steps
    pub tail_limsup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactDistances>,
}

impl ObstructionSeries {
    fn from_distances(distances: Vec<f64>, returns: &[usize], exact: Option<ExactDistances>) -> Self {
        let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
        let tail = &distances[distances.len() - tail_len(distances.len())..];
        let tail_limsup = tail.iter().copied().fold(0.0, f64::max);
        let window_min = returns.iter().map(|&n| distances[n]).reduce(f64::min);
        ObstructionSeries { distances, returns: returns.to_vec(), window_min, min, tail_limsup, exact }
    }

    /// `d_n` over the last quarter of the return set (rounded up).
    pub fn return_tail(&self) -> Vec<f64> {
        let k = tail_len(self.returns.len());
        self.returns[self.returns.len() - k..].iter().map(|&n| self.distances[n]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d_n,return\n");
        let mut r = self.returns.iter().peekable();
        for (n, v) in self.distances.iter().enumerate() {
            let hit = r.peek() == Some(&&n);
            if hit {
                r.next();
            }
            out.push_str(&format!("{n},{v:e},{}\n", u8::from(hit)));
        }
        out
    }
}

fn tail_len(n: usize) -> usize {
    n.div_ceil(4)
}

/// Follows `v` along the trace; the exact backend never loses precision.
pub fn obstruction_series(trace: &InductionTrace, v: &ObstructionVector) -> Result<ObstructionSeries, WeakMixError> {
    match v {
        ObstructionVector::Exact(v) => Ok(exact_series(trace, v)),
        ObstructionVector::Float { values, bits } => fixed_point_series(trace, values, *bits),
    }
}

/// Builds the trace, then the series.
pub fn obstruction_series_for(
    perm: &GeneralizedPermutation,
    lambda: &[BigRational],
    v: &ObstructionVector,
    n: usize,
    window: &ReturnWindow,
) -> Result<ObstructionSeries, WeakMixError> {
    if v.dim() != perm.d() {
        return Err(WeakMixError::DimensionMismatch { expected: perm.d(), got: v.dim() });
    }
    let trace = InductionTrace::new(perm, lambda, n, window)?;
    obstruction_series(&trace, v)
}

fn exact_series(trace: &InductionTrace, v: &[BigRational]) -> ObstructionSeries {
    let q = v.iter().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
    let mut u: Vec<BigInt> = v.iter().map(|x| (x.numer() * (&q / x.denom())).mod_floor(&q)).collect();
    let dist = |u: &[BigInt]| -> BigInt {
        u.iter().map(|x| std::cmp::min(x.clone(), &q - x)).max().unwrap_or_else(BigInt::zero)
    };
    let mut numerators = Vec::with_capacity(trace.len() + 1);
    numerators.push(dist(&u));
    for &(w, l) in &trace.steps {
        let s = &u[l] + &u[w];
        u[l] = if s >= q { s - &q } else { s };
        numerators.push(dist(&u));
    }
    let distances = numerators.iter().map(|k| rational_to_f64(&BigRational::new(k.clone(), q.clone()))).collect();
    ObstructionSeries::from_distances(distances, &trace.returns, Some(ExactDistances { denominator: q, numerators }))
}

fn fixed_point_series(trace: &InductionTrace, values: &[f64], bits: u32) -> Result<ObstructionSeries, WeakMixError> {
    let one = BigInt::one() << bits as usize;
    let scale = BigRational::from_integer(one.clone());
    let mut u = Vec::with_capacity(values.len());
    for &x in values {
        let r = BigRational::from_float(x).ok_or_else(|| WeakMixError::InvalidGrid(format!("{x} is not finite")))?;
        u.push((r * &scale).round().to_integer().mod_floor(&one));
    }
    // error bound in units of 2^-bits; the initial rounding contributes at most one unit
    let mut err: Vec<BigInt> = vec![BigInt::one(); values.len()];
    let budget = bits.saturating_sub(64) as u64;
    let dist = |u: &[BigInt]| -> f64 {
        let k = u.iter().map(|x| std::cmp::min(x.clone(), &one - x)).max().unwrap_or_else(BigInt::zero);
        rational_to_f64(&BigRational::new(k, one.clone()))
    };
    let mut distances = Vec::with_capacity(trace.len() + 1);
    distances.push(dist(&u));
    for (n, &(w, l)) in trace.steps.iter().enumerate() {
        let s = &u[l] + &u[w];
        u[l] = if s >= one { s - &one } else { s };
        err[l] = &err[l] + &err[w];
        if err[l].bits() > budget {
            return Err(WeakMixError::PrecisionExhausted { step: n + 1, bits });
        }
        distances.push(dist(&u));
    }
    Ok(ObstructionSeries::from_distances(distances, &trace.returns, None))
}

/// A set of values of `t`: Farey fractions `p/q` in `[0, 1)` with `q <= N` (written `qN`), or an explicit list.
#[derive(Clone, Debug, PartialEq)]
pub struct TGrid(pub Vec<BigRational>);

impl TGrid {
    pub fn farey(max_den: u64) -> Self {
        let mut ts = vec![BigRational::zero()];
        for q in 2..=max_den {
            for p in 1..q {
                if p.gcd(&q) == 1 {
                    ts.push(BigRational::new(p.into(), q.into()));
                }
            }
        }
        ts.sort();
        TGrid(ts)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for TGrid {
    type Err = WeakMixError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(TGrid(Vec::new()));
        }
        if let Some(rest) = s.strip_prefix('q') {
            let n: u64 = rest.parse().map_err(|_| WeakMixError::InvalidGrid(s.to_string()))?;
            if n == 0 {
                return Err(WeakMixError::InvalidGrid("denominator bound must be positive".into()));
            }
            return Ok(TGrid::farey(n));
        }
        s.split(',')
            .map(|item| parse_rational(item.trim()).ok_or_else(|| WeakMixError::InvalidGrid(item.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(TGrid)
    }
}

impl fmt::Display for TGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        f.write_str(&items.join(","))
    }
}

/// Parses `p/q`, an integer, or a terminating decimal.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let q: BigInt = q.trim().parse().ok()?;
        let p: BigInt = p.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    if let Some((a, b)) = s.split_once('.') {
        if !b.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = a.starts_with('-');
        let whole: BigInt = if a.is_empty() || a == "-" { BigInt::zero() } else { a.parse().ok()? };
        let den = num_traits::pow(BigInt::from(10), b.len());
        let frac: BigInt = if b.is_empty() { BigInt::zero() } else { b.parse().ok()? };
        let frac = if neg { -frac } else { frac };
        return Some(BigRational::new(whole * &den + frac, den));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Decaying,
    NonDecaying,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// decaying if every `d_n` in the tail is below this
    pub decaying: f64,
    /// non-decaying if the tail minimum exceeds this
    pub non_decaying: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { decaying: 1e-6, non_decaying: 1e-2 }
    }
}

impl Thresholds {
    /// A lattice vector decays trivially; otherwise the verdict reads the last quarter of the returns.
    pub fn verdict(&self, series: &ObstructionSeries, lattice: bool) -> Verdict {
        if lattice {
            return Verdict::Decaying;
        }
        let tail = series.return_tail();
        if tail.is_empty() {
            return Verdict::Inconclusive;
        }
        if tail.iter().all(|&x| x < self.decaying) {
            Verdict::Decaying
        } else if tail.iter().copied().fold(f64::INFINITY, f64::min) > self.non_decaying {
            Verdict::NonDecaying
        } else {
            Verdict::Inconclusive
        }
    }
}

/// A candidate eigenvalue `exp(2 pi i t)` tested through `v = t * (1, ..., 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCandidate {
    pub t: String,
    pub verdict: Verdict,
    pub returns: usize,
    pub tail_min: Option<f64>,
    pub tail_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<ObstructionSeries>,
}

impl EigenCandidate {
    pub fn is_trivial(&self) -> bool {
        parse_rational(&self.t).is_some_and(|t| t.is_integer())
    }
}

/// One candidate per `t`, computed exactly along a single trace.
pub fn eigenvalue_scan(
    trace: &InductionTrace,
    d: usize,
    grid: &TGrid,
    thresholds: &Thresholds,
    keep_series: bool,
) -> Vec<EigenCandidate> {
    grid.0
        .iter()
        .map(|t| {
            let series = exact_series(trace, &vec![t.clone(); d]);
            let tail = series.return_tail();
            let verdict = thresholds.verdict(&series, t.is_integer());
            EigenCandidate {
                t: t.to_string(),
                verdict,
                returns: series.returns.len(),
                tail_min: tail.iter().copied().reduce(f64::min),
                tail_max: tail.iter().copied().reduce(f64::max),
                series: keep_series.then_some(series),
            }
        })
        .collect()
}

/// A finite union of subintervals `[lo, hi)` of the two components, given as fractions of the length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observable {
    pub intervals: Vec<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub component: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Observable {
    pub fn constant() -> Self {
        Observable::component(0).union(Observable::component(1))
    }

    pub fn component(c: usize) -> Self {
        Observable { intervals: vec![Interval { component: c, lo: 0.0, hi: 1.0 }] }
    }

    pub fn interval(component: usize, lo: f64, hi: f64) -> Self {
        Observable { intervals: vec![Interval { component, lo, hi }] }
    }

    pub fn union(mut self, other: Observable) -> Self {
        self.intervals.extend(other.intervals);
        self
    }

    pub fn validate(&self) -> Result<(), WeakMixError> {
        for iv in &self.intervals {
            if iv.component > 1 || !(0.0..=1.0).contains(&iv.lo) || !(iv.lo..=1.0).contains(&iv.hi) {
                return Err(WeakMixError::InvalidObservable(format!("{iv:?}")));
            }
        }
        for (i, a) in self.intervals.iter().enumerate() {
            for b in &self.intervals[i + 1..] {
                if a.component == b.component && a.lo < b.hi && b.lo < a.hi {
                    return Err(WeakMixError::InvalidObservable("intervals overlap".into()));
                }
            }
        }
        Ok(())
    }

    /// Value at a point given as a fraction of the length.
    pub fn eval(&self, component: usize, x: f64) -> f64 {
        let hit = self.intervals.iter().any(|iv| iv.component == component && iv.lo <= x && x < iv.hi);
        if hit {
            1.0
        } else {
            0.0
        }
    }

    /// Integral against the normalized Lebesgue measure on both components.
    pub fn mean(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.hi - iv.lo).sum::<f64>() / 2.0
    }

    /// `integral of f g` for two indicator unions.
    pub fn overlap(&self, other: &Observable) -> f64 {
        let mut s = 0.0;
        for a in &self.intervals {
            for b in &other.intervals {
                if a.component == b.component {
                    s += (a.hi.min(b.hi) - a.lo.max(b.lo)).max(0.0);
                }
            }
        }
        s / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationOptions {
    pub max_lag: usize,
    pub orbit_len: usize,
    /// independent orbit segments used for the error estimate
    pub segments: usize,
    pub seed: u64,
    pub max_resamples: usize,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        CorrelationOptions { max_lag: 256, orbit_len: 100_000, segments: 8, seed: 0, max_resamples: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub f: Observable,
    pub g: Observable,
    pub orbit_len: usize,
    /// doubling grid `1, 2, 4, ...`
    pub n: Vec<usize>,
    /// `C_N = (1/N) sum_{n<N} |c_n|`
    pub values: Vec<f64>,
    /// three standard errors across orbit segments
    pub error: Vec<f64>,
    /// least-squares slope of `log C_N` against `log N`
    pub slope: Option<f64>,
    pub start: MarkedPoint<f64>,
    pub resamples: usize,
}

/// Cesaro averages of `|integral (f o T^n) g - integral f integral g|` along one orbit of `t`.
pub fn cesaro_correlation(
    t: &LinearInvolution<f64>,
    f: &Observable,
    g: &Observable,
    opts: &CorrelationOptions,
) -> Result<CorrelationReport, WeakMixError> {
    f.validate()?;
    g.validate()?;
    let total = *t.total();
    let len = opts.orbit_len.max(1) + opts.max_lag;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut resamples = 0;
    let (start, fv, gv) = loop {
        if resamples > opts.max_resamples {
            return Err(WeakMixError::SingularOrbit(resamples));
        }
        let start = MarkedPoint::new(rng.gen::<f64>() * total, rng.gen_range(0..2));
        let orbit = t.orbit(&start, len - 1)?;
        if orbit.truncated.is_some() {
            resamples += 1;
            continue;
        }
        let fv: Vec<f64> = orbit.points.iter().map(|p| f.eval(p.component, p.x / total)).collect();
        let gv: Vec<f64> = orbit.points.iter().map(|p| g.eval(p.component, p.x / total)).collect();
        break (start, fv, gv);
    };
    let centered = f.mean() * g.mean();
    let m = opts.orbit_len.max(1);
    let segs = opts.segments.clamp(1, m);
    let seg_len = m / segs;
    // |c_n| over the whole orbit and over each segment
    let lag_abs = |from: usize, to: usize| -> Vec<f64> {
        (0..opts.max_lag.max(1))
            .map(|n| {
                let s: f64 = (from..to).map(|k| fv[k + n] * gv[k]).sum();
                (s / (to - from) as f64 - centered).abs()
            })
            .collect()
    };
    let whole = lag_abs(0, m);
    let parts: Vec<Vec<f64>> = (0..segs).map(|s| lag_abs(s * seg_len, (s + 1) * seg_len)).collect();
    let mut grid = Vec::new();
    let mut n = 1;
    while n <= opts.max_lag.max(1) {
        grid.push(n);
        n *= 2;
    }
    let cesaro = |c: &[f64], n: usize| c[..n].iter().sum::<f64>() / n as f64;
    let values: Vec<f64> = grid.iter().map(|&n| cesaro(&whole, n)).collect();
    let error = grid
        .iter()
        .map(|&n| {
            if segs < 2 {
                return f64::INFINITY;
            }
            let xs: Vec<f64> = parts.iter().map(|c| cesaro(c, n)).collect();
            let mean = xs.iter().sum::<f64>() / segs as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (segs - 1) as f64;
            3.0 * (var / segs as f64).sqrt()
        })
        .collect();
    let slope = log_log_slope(&grid, &values);
    Ok(CorrelationReport {
        f: f.clone(),
        g: g.clone(),
        orbit_len: m,
        n: grid,
        values,
        error,
        slope,
        start,
        resamples,
    })
}

fn log_log_slope(ns: &[usize], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        ns.iter().zip(values).filter(|(_, &v)| v > 0.0).map(|(&n, &v)| ((n as f64).ln(), v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeakMixOptions {
    pub samples: usize,
    /// `qN` or a comma-separated list of rationals
    pub tgrid: String,
    pub steps: usize,
    pub seed: u64,
    /// bits of the sampled exact lengths; `None` picks `256 + 2 * steps`
    pub bits: Option<u64>,
    pub window: ReturnWindow,
    pub thresholds: Thresholds,
    /// per-sample correlation of two observables, if set
    pub correlation: Option<CorrelationSpec>,
}

impl Default for WeakMixOptions {
    fn default() -> Self {
        WeakMixOptions {
            samples: 50,
            tgrid: "q16".into(),
            steps: 2000,
            seed: 0,
            bits: None,
            window: ReturnWindow::default(),
            thresholds: Thresholds::default(),
            correlation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSpec {
    pub f: Observable,
    pub g: Observable,
    #[serde(default)]
    pub options: CorrelationOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub index: usize,
    /// lengths in alphabet order
    pub lambda: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub returns: usize,
    pub min_return_distance: Option<f64>,
    pub candidates: Vec<EigenCandidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationReport>,
}

/// A decaying candidate with nontrivial `t`, kept with its exact series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateDump {
    pub sample: usize,
    pub t: String,
    pub series: ObstructionSeries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakMixReport {
    pub permutation: GeneralizedPermutation,
    pub genus: i64,
    pub options: WeakMixOptions,
    pub samples: Vec<SampleReport>,
    /// `(sample, t)` pairs with `t` not an integer
    pub nontrivial_pairs: usize,
    pub non_decaying: usize,
    pub decaying: usize,
    pub inconclusive: usize,
    pub fraction_non_decaying: f64,
    /// fraction of samples with at least one decaying nontrivial candidate
    pub fraction_samples_with_decaying: f64,
    pub dumps: Vec<CandidateDump>,
}

/// Scans every sample of admissible lengths; refuses surfaces of genus at most 1.
pub fn weak_mixing_report(perm: &GeneralizedPermutation, opts: &WeakMixOptions) -> Result<WeakMixReport, WeakMixError> {
    let genus = stratum_of(perm)?.genus;
    if genus <= 1 {
        return Err(WeakMixError::GenusTooSmall { genus });
    }
    let grid: TGrid = opts.tgrid.parse()?;
    let sampler = LengthSampler::new(perm)?;
    let bits = opts.bits.unwrap_or(256 + 2 * opts.steps as u64);
    let d = perm.d();
    let samples: Vec<SampleReport> = (0..opts.samples)
        .into_par_iter()
        .map(|index| -> Result<SampleReport, WeakMixError> {
            let lambda = sampler.exact_from_seed(opts.seed, index as u64, bits)?;
            let mut report = SampleReport {
                index,
                lambda: lambda.iter().map(|x| x.to_string()).collect(),
                error: None,
                returns: 0,
                min_return_distance: None,
                candidates: Vec::new(),
                correlation: None,
            };
            match InductionTrace::new(perm, &lambda, opts.steps, &opts.window) {
                Ok(trace) => {
                    report.returns = trace.returns.len();
                    report.min_return_distance = trace.distances.iter().copied().reduce(f64::min);
                    report.candidates = eigenvalue_scan(&trace, d, &grid, &opts.thresholds, false);
                }
                Err(e) => report.error = Some(e.to_string()),
            }
            if let Some(spec) = &opts.correlation {
                let floats: Vec<f64> = lambda.iter().map(rational_to_f64).collect();
                let t = LinearInvolution::from_aligned(perm.clone(), floats)?;
                let copts = CorrelationOptions { seed: spec.options.seed ^ index as u64, ..spec.options.clone() };
                report.correlation = Some(cesaro_correlation(&t, &spec.f, &spec.g, &copts)?);
            }
            Ok(report)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_, _>>()?;
    let (mut nontrivial, mut non_dec, mut dec, mut inc) = (0, 0, 0, 0);
    let mut with_decaying = 0;
    let mut dumps = Vec::new();
    let ts: Vec<&BigRational> = grid.0.iter().collect();
    for s in &samples {
        let mut any = false;
        for (c, t) in s.candidates.iter().zip(&ts) {
            if t.is_integer() {
                continue;
            }
            nontrivial += 1;
            match c.verdict {
                Verdict::NonDecaying => non_dec += 1,
                Verdict::Inconclusive => inc += 1,
                Verdict::Decaying => {
                    dec += 1;
                    any = true;
                    let lambda: Vec<BigRational> = s.lambda.iter().filter_map(|x| parse_rational(x)).collect();
                    let trace = InductionTrace::new(perm, &lambda, opts.steps, &opts.window)?;
                    dumps.push(CandidateDump { sample: s.index, t: c.t.clone(), series: exact_series(&trace, &vec![(*t).clone(); d]) });
                }
            }
        }
        // samples that could not be induced count as failed pairs
        if s.error.is_some() {
            let k = ts.iter().filter(|t| !t.is_integer()).count();
            nontrivial += k;
            inc += k;
        }
        with_decaying += usize::from(any);
    }
    let frac = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(WeakMixReport {
        permutation: perm.clone(),
        genus,
        options: opts.clone(),
        nontrivial_pairs: nontrivial,
        non_decaying: non_dec,
        decaying: dec,
        inconclusive: inc,
        fraction_non_decaying: frac(non_dec, nontrivial),
        fraction_samples_with_decaying: frac(with_decaying, samples.len()),
        samples,
        dumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rauzy::tests::{q22_perm, ri};

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn q22_trace(n: usize) -> InductionTrace {
        let p = q22_perm();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lam = LengthSampler::new(&p).unwrap().sample_exact(&mut rng, 512).unwrap();
        InductionTrace::new(&p, &lam, n, &ReturnWindow::default()).unwrap()
    }

    /// Independent oracle: fractional parts of `V^T v` from the explicit integer product.
    fn oracle_distance(trace: &InductionTrace, v: &[BigRational], n: usize) -> BigRational {
        let d = v.len();
        let mut m = crate::matrix::IntMatrix::identity(d);
        for &(w, l) in &trace.steps[..n] {
            m.add_column(w, l);
        }
        let image = m.transpose().apply(v);
        image
            .iter()
            .map(|x| {
                let fr = x - x.floor();
                std::cmp::min(fr.clone(), ri(1) - fr)
            })
            .max()
            .unwrap()
    }

    #[test]
    fn exact_series_matches_matrix_oracle() {
        let trace = q22_trace(60);
        let v = vec![r(1, 3), r(2, 7), r(-5, 4), r(0, 1), r(9, 11)];
        let s = exact_series(&trace, &v);
        let ex = s.exact.as_ref().unwrap();
        for n in [0, 1, 7, 30, 60] {
            let got = BigRational::new(ex.numerators[n].clone(), ex.denominator.clone());
            assert_eq!(got, oracle_distance(&trace, &v, n), "n = {n}");
        }
    }

    #[test]
    fn lattice_vectors_vanish() {
        let trace = q22_trace(200);
        for v in [vec![ri(1); 5], vec![ri(0); 5], vec![ri(3), ri(-2), ri(0), ri(7), ri(1)]] {
            let s = exact_series(&trace, &v);
            assert!(s.distances.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn lattice_periodicity() {
        let trace = q22_trace(150);
        let v = vec![r(1, 2), r(1, 3), r(1, 5), r(2, 9), r(4, 7)];
        let w: Vec<BigRational> = v.iter().zip([3, -1, 0, 8, -4]).map(|(x, z)| x + ri(z)).collect();
        assert_eq!(exact_series(&trace, &v), exact_series(&trace, &w));
    }

    #[test]
    fn distances_are_bounded_by_one_half() {
        let trace = q22_trace(300);
        let s = exact_series(&trace, &vec![r(1, 2); 5]);
        assert!(s.distances.iter().all(|&x| (0.0..=0.5).contains(&x)));
        // det = 1 keeps a non-lattice rational vector off the lattice
        assert!(s.min > 0.0);
    }

    #[test]
    fn fixed_point_agrees_with_exact() {
        let trace = q22_trace(120);
        let t = 0.3183098861837907f64;
        let exact = exact_series(&trace, &vec![BigRational::from_float(t).unwrap(); 5]);
        let float = fixed_point_series(&trace, &[t; 5], 512).unwrap();
        for (a, b) in exact.distances.iter().zip(&float.distances) {
            assert!((a - b).abs() <= 2f64.powi(-50));
        }
        let err = fixed_point_series(&trace, &[t; 5], 70).unwrap_err();
        assert!(matches!(err, WeakMixError::PrecisionExhausted { bits: 70, .. }));
    }

    #[test]
    fn grid_parsing() {
        let g: TGrid = "q4".parse().unwrap();
        assert_eq!(g.to_string(), "0,1/4,1/3,1/2,2/3,3/4");
        let g: TGrid = "1/2, 0.25,3".parse().unwrap();
        assert_eq!(g.0, vec![r(1, 2), r(1, 4), ri(3)]);
        assert!("".parse::<TGrid>().unwrap().is_empty());
        assert!("q0".parse::<TGrid>().is_err());
        assert!("1/0".parse::<TGrid>().is_err());
        assert_eq!(TGrid::farey(16).len(), 1 + (2..=16u64).map(|q| (1..q).filter(|p| p.gcd(&q) == 1).count()).sum::<usize>());
    }

    #[test]
    fn trivial_candidates_decay() {
        let trace = q22_trace(100);
        let grid = TGrid(vec![ri(0), ri(2), r(1, 2)]);
        let cs = eigenvalue_scan(&trace, 5, &grid, &Thresholds::default(), false);
        assert_eq!(cs[0].verdict, Verdict::Decaying);
        assert_eq!(cs[1].verdict, Verdict::Decaying);
        assert!(cs[0].is_trivial() && !cs[2].is_trivial());
        if cs[2].returns > 0 {
            assert_eq!(cs[2].verdict, Verdict::NonDecaying);
        } else {
            assert_eq!(cs[2].verdict, Verdict::Inconclusive);
        }
    }

    #[test]
    fn verdict_thresholds() {
        let th = Thresholds::default();
        let mk = |d: Vec<f64>, ret: Vec<usize>| ObstructionSeries::from_distances(d, &ret, None);
        assert_eq!(th.verdict(&mk(vec![0.3, 1e-7, 1e-8], vec![1, 2]), false), Verdict::Decaying);
        assert_eq!(th.verdict(&mk(vec![0.0, 0.2, 0.3], vec![1, 2]), false), Verdict::NonDecaying);
        assert_eq!(th.verdict(&mk(vec![0.0, 0.2, 1e-3], vec![1, 2]), false), Verdict::Inconclusive);
        assert_eq!(th.verdict(&mk(vec![0.1, 0.2], vec![]), false), Verdict::Inconclusive);
    }

    #[test]
    fn window_distances_match_rational_oracle() {
        let p = q22_perm();
        let lam = vec![ri(3001), ri(1499), ri(4003), ri(2011), ri(7004)];
        let trace = InductionTrace::new(&p, &lam, 12, &ReturnWindow { radius: 0.5, same_permutation: false }).unwrap();
        let mut cur = lam.clone();
        for (k, &(w, l)) in trace.steps.iter().enumerate() {
            cur[w] = &cur[w] - &cur[l];
            let logs: Vec<f64> = cur.iter().zip(&lam).map(|(a, b)| rational_to_f64(&(a / b)).ln()).collect();
            let want = logs.iter().copied().fold(f64::MIN, f64::max) - logs.iter().copied().fold(f64::MAX, f64::min);
            assert!((trace.distances[k] - want).abs() < 1e-12);
            assert_eq!(trace.returns.contains(&(k + 1)), want <= 0.5);
        }
    }

    #[test]
    fn constant_observable_has_no_correlation() {
        let p = q22_perm();
        let t = LinearInvolution::from_aligned(p, vec![0.3, 0.17, 0.2, 0.13, 0.5]).unwrap();
        let opts = CorrelationOptions { max_lag: 16, orbit_len: 2000, ..Default::default() };
        let rep = cesaro_correlation(&t, &Observable::constant(), &Observable::constant(), &opts).unwrap();
        assert!(rep.values.iter().all(|&v| v.abs() < 1e-12));
        assert_eq!(rep.n, vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn observable_integrals() {
        let f = Observable::interval(0, 0.1, 0.5).union(Observable::interval(1, 0.0, 0.25));
        let g = Observable::component(0);
        assert!((f.mean() - 0.325).abs() < 1e-15);
        assert!((f.overlap(&g) - 0.2).abs() < 1e-15);
        assert!(Observable::interval(2, 0.0, 1.0).validate().is_err());
        assert!(Observable::interval(0, 0.0, 0.6).union(Observable::interval(0, 0.5, 0.7)).validate().is_err());
    }
}
