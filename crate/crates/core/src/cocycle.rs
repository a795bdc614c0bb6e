//! The Rauzy-Veech cocycle: Lyapunov exponents, Hilbert metric contraction, positive cycles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genperm::{GeneralizedPermutation, LetterClass};
use crate::involution::LinearInvolution;
use crate::matrix::IntMatrix;
use crate::rauzy::{rauzy_path, Edge, Move, PathMatrix, RauzyError, StepRecord, Transitions};
use crate::sampler::{LengthSampler, SampleError};
use crate::scalar::{bigint_to_f64, ln_bigint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("batch {batch} stopped early: {reason}")]
    InsufficientSteps { batch: usize, reason: String },
    #[error("Hilbert metric needs entrywise positive vectors")]
    NonPositive,
    #[error("{0}")]
    NotFound(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Rauzy(#[from] RauzyError),
}

/// A position in the Rauzy class, normalized lengths, and a frame carried by the transposed cocycle.
#[derive(Clone, Debug)]
pub struct CocycleState<S> {
    pub node: usize,
    pub lambda: Vec<S>,
    pub frame: Vec<Vec<S>>,
    /// accumulated log growth of each frame direction
    pub logs: Vec<f64>,
    pub zorich_steps: u64,
    pub elementary_steps: u64,
}

impl<S: Float> CocycleState<S> {
    pub fn new(lambda: Vec<S>, frame: Vec<Vec<S>>) -> Self {
        let k = frame.len();
        let mut s = CocycleState { node: 0, lambda, frame, logs: vec![0.0; k], zorich_steps: 0, elementary_steps: 0 };
        s.normalize_lambda();
        s.orthonormalize(false);
        s
    }

    fn normalize_lambda(&mut self) {
        let total = self.lambda.iter().fold(S::zero(), |a, &b| a + b);
        for v in self.lambda.iter_mut() {
            *v = *v / total;
        }
    }

    /// The move selected by the current lengths.
    pub fn next_move(&self, trans: &Transitions) -> Result<Move, RauzyError> {
        let (a0, a1) = trans.last_letters(self.node);
        let (x, y) = (self.lambda[a0], self.lambda[a1]);
        if x > y {
            Ok(Move::Top)
        } else if y > x {
            Ok(Move::Bottom)
        } else {
            Err(RauzyError::Tie { step: self.elementary_steps as usize })
        }
    }

    /// One Rauzy-Veech step; lengths are not renormalized.
    pub fn elementary_step(&mut self, trans: &mut Transitions, kind: Move) -> Result<Edge, RauzyError> {
        let e = trans.step(self.node, kind)?;
        self.lambda[e.winner] = self.lambda[e.winner] - self.lambda[e.loser];
        for v in self.frame.iter_mut() {
            v[e.loser] = v[e.loser] + v[e.winner];
        }
        self.node = e.target;
        self.elementary_steps += 1;
        Ok(e)
    }

    /// One maximal run of equal moves, followed by renormalizing `lambda` to unit sum.
    pub fn renormalize(&mut self, trans: &mut Transitions, run_cap: usize) -> Result<usize, RauzyError> {
        let run = self.next_move(trans)?;
        let mut n = 0usize;
        loop {
            if n >= run_cap {
                return Err(RauzyError::RunCapExceeded { cap: run_cap, step: self.elementary_steps as usize });
            }
            self.elementary_step(trans, run)?;
            n += 1;
            if self.next_move(trans)? != run {
                break;
            }
        }
        self.zorich_steps += 1;
        self.rebalance(trans);
        self.normalize_lambda();
        Ok(n)
    }

    /// Renormalizes without ending a Zorich step; for long elementary walks.
    pub fn tidy(&mut self, trans: &Transitions) {
        self.rebalance(trans);
        self.normalize_lambda();
    }

    /// Projects rounding drift back onto the row-sum hyperplane by rescaling bottom-only letters.
    fn rebalance(&mut self, trans: &Transitions) {
        let p = trans.permutation(self.node);
        let (mut s0, mut s1) = (S::zero(), S::zero());
        for x in 0..p.d() {
            match p.class_of(x) {
                LetterClass::Top => s0 = s0 + self.lambda[x],
                LetterClass::Bottom => s1 = s1 + self.lambda[x],
                LetterClass::Crossing => {}
            }
        }
        if s1 > S::zero() && s0 > S::zero() {
            let f = s0 / s1;
            for x in 0..p.d() {
                if p.class_of(x) == LetterClass::Bottom {
                    self.lambda[x] = self.lambda[x] * f;
                }
            }
        }
    }

    /// Modified Gram-Schmidt; optionally records the log of each pivot norm.
    pub fn orthonormalize(&mut self, record: bool) {
        let k = self.frame.len();
        for i in 0..k {
            for j in 0..i {
                let dot = dot(&self.frame[i], &self.frame[j]);
                let (head, tail) = self.frame.split_at_mut(i);
                for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                    *a = *a - dot * *b;
                }
            }
            let norm = dot(&self.frame[i], &self.frame[i]).sqrt();
            if record {
                self.logs[i] += norm.to_f64().unwrap().ln();
            }
            for a in self.frame[i].iter_mut() {
                *a = *a / norm;
            }
        }
    }

    pub fn reset_accumulators(&mut self) {
        self.logs.iter_mut().for_each(|v| *v = 0.0);
        self.zorich_steps = 0;
        self.elementary_steps = 0;
    }
}

fn dot<S: Float>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovOptions {
    /// measured Zorich steps per batch
    pub steps: usize,
    pub batches: usize,
    /// number of exponents (frame size); at most `d`
    pub k: Option<usize>,
    /// Gram-Schmidt interval in Zorich steps
    pub orthonormalize_every: usize,
    /// Zorich steps discarded before measuring
    pub warmup: usize,
    pub seed: u64,
    pub run_cap: usize,
    /// exponents below `max(3 stderr, zero_tolerance * theta_1)` in absolute value count as zero
    pub zero_tolerance: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions {
            steps: 50_000,
            batches: 64,
            k: None,
            orthonormalize_every: 5,
            warmup: 1_000,
            seed: 0,
            run_cap: 100_000_000,
            zero_tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub permutation: GeneralizedPermutation,
    pub options: LyapunovOptions,
    /// batch means, decreasing
    pub exponents: Vec<f64>,
    pub stderr: Vec<f64>,
    /// same runs normalized per elementary step instead of per Zorich step
    pub elementary_exponents: Vec<f64>,
    /// standard error of `theta_i + theta_{k+1-i}` over batches
    pub paired_sum_stderr: Vec<f64>,
    pub gaps: Vec<f64>,
    pub ratios: Vec<f64>,
    pub near_zero_count: usize,
    pub batch_exponents: Vec<Vec<f64>>,
    pub elementary_steps: u64,
    pub rauzy_class_visited: usize,
}

struct BatchResult {
    zorich: Vec<f64>,
    elementary: Vec<f64>,
    elementary_steps: u64,
    visited: usize,
}

fn run_batch<S: Float + Send>(
    perm: &GeneralizedPermutation,
    sampler: &LengthSampler,
    opts: &LyapunovOptions,
    k: usize,
    batch: usize,
) -> Result<BatchResult, CocycleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(batch as u64);
    let lambda: Vec<S> = sampler.sample_float(&mut rng)?;
    let d = perm.d();
    let frame: Vec<Vec<S>> = (0..k)
        .map(|_| (0..d).map(|_| S::from(rng.sample::<f64, _>(StandardNormal)).unwrap()).collect())
        .collect();
    let mut trans = Transitions::new(perm);
    let mut st = CocycleState::new(lambda, frame);
    let q = opts.orthonormalize_every.max(1);
    let fail = |e: RauzyError| CocycleError::InsufficientSteps { batch, reason: e.to_string() };
    for i in 0..opts.warmup {
        st.renormalize(&mut trans, opts.run_cap).map_err(fail)?;
        if (i + 1) % q == 0 {
            st.orthonormalize(false);
        }
    }
    st.orthonormalize(false);
    st.reset_accumulators();
    for i in 0..opts.steps {
        st.renormalize(&mut trans, opts.run_cap).map_err(fail)?;
        if (i + 1) % q == 0 || i + 1 == opts.steps {
            st.orthonormalize(true);
        }
    }
    // an empty run is the identity path, whose exponents are all zero
    let z = (st.zorich_steps as f64).max(1.0);
    let e = (st.elementary_steps as f64).max(1.0);
    Ok(BatchResult {
        zorich: st.logs.iter().map(|v| v / z).collect(),
        elementary: st.logs.iter().map(|v| v / e).collect(),
        elementary_steps: st.elementary_steps,
        visited: trans.len(),
    })
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Batched estimate of the Lyapunov spectrum of the Zorich cocycle, in precision `S`.
pub fn lyapunov_spectrum<S: Float + Send + Sync>(
    perm: &GeneralizedPermutation,
    opts: &LyapunovOptions,
) -> Result<LyapunovReport, CocycleError> {
    let sampler = LengthSampler::new(perm)?;
    let d = perm.d();
    let k = opts.k.unwrap_or(d).clamp(1, d);
    let results: Vec<Result<BatchResult, CocycleError>> =
        (0..opts.batches).into_par_iter().map(|b| run_batch::<S>(perm, &sampler, opts, k, b)).collect();
    let results: Vec<BatchResult> = results.into_iter().collect::<Result<_, _>>()?;
    let column = |f: &dyn Fn(&BatchResult) -> f64| results.iter().map(f).collect::<Vec<f64>>();
    let mut exponents = Vec::with_capacity(k);
    let mut stderr = Vec::with_capacity(k);
    let mut elementary_exponents = Vec::with_capacity(k);
    for i in 0..k {
        let (m, s) = mean_and_stderr(&column(&|r| r.zorich[i]));
        exponents.push(m);
        stderr.push(s);
        elementary_exponents.push(mean_and_stderr(&column(&|r| r.elementary[i])).0);
    }
    let paired_sum_stderr = (0..k).map(|i| mean_and_stderr(&column(&|r| r.zorich[i] + r.zorich[k - 1 - i])).1).collect();
    let gaps = exponents.windows(2).map(|w| w[0] - w[1]).collect();
    let top = exponents[0];
    let ratios = exponents.iter().map(|e| e / top).collect();
    let near_zero_count =
        (0..k).filter(|&i| exponents[i].abs() <= (3.0 * stderr[i]).max(opts.zero_tolerance * top.abs())).count();
    Ok(LyapunovReport {
        permutation: perm.clone(),
        options: opts.clone(),
        exponents,
        stderr,
        elementary_exponents,
        paired_sum_stderr,
        gaps,
        ratios,
        near_zero_count,
        batch_exponents: results.iter().map(|r| r.zorich.clone()).collect(),
        elementary_steps: results.iter().map(|r| r.elementary_steps).sum(),
        rauzy_class_visited: results.iter().map(|r| r.visited).max().unwrap_or(0),
    })
}

/// `max_{i,j} |log(x_i y_j / (x_j y_i))|` on the positive cone.
pub fn hilbert_distance<S: Float>(x: &[S], y: &[S]) -> Result<S, CocycleError> {
    if x.len() != y.len() || x.iter().chain(y).any(|v| !(*v > S::zero())) {
        return Err(CocycleError::NonPositive);
    }
    let logs: Vec<S> = x.iter().zip(y).map(|(a, b)| (*a / *b).ln()).collect();
    let hi = logs.iter().fold(S::neg_infinity(), |a, &b| a.max(b));
    let lo = logs.iter().fold(S::infinity(), |a, &b| a.min(b));
    Ok(hi - lo)
}

/// Hilbert diameter of the image of the positive cone, attained on pairs of columns.
pub fn cone_image_diameter(m: &IntMatrix) -> f64 {
    let n = m.dim();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| m.column(j).iter().map(bigint_to_f64).collect()).collect();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            match hilbert_distance(&cols[i], &cols[j]) {
                Ok(v) => best = best.max(v),
                Err(_) => return f64::INFINITY,
            }
        }
    }
    best
}

/// Birkhoff's contraction coefficient `tanh(diameter / 4)`.
pub fn birkhoff_coefficient(diameter: f64) -> f64 {
    (diameter / 4.0).tanh()
}

/// Largest observed ratio `d(Mx, My) / d(x, y)` of Hilbert distances over random positive pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionProbe {
    pub pairs: usize,
    pub max_ratio: f64,
    /// pairs whose distance grew beyond rounding
    pub expanded: usize,
}

/// Applies `m` exactly to random integer vectors and compares Hilbert distances before and after.
pub fn expansion_probe(m: &IntMatrix, pairs: usize, seed: u64) -> ExpansionProbe {
    let d = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<BigInt> {
        let scale: u32 = rng.gen_range(1..=40);
        (0..d).map(|_| BigInt::from(rng.gen_range(1u64..=1u64 << scale))).collect()
    };
    let log_distance = |x: &[BigInt], y: &[BigInt]| -> f64 {
        let logs: Vec<f64> = x.iter().zip(y).map(|(a, b)| ln_bigint(a) - ln_bigint(b)).collect();
        let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    };
    let apply = |x: &[BigInt]| -> Vec<BigInt> {
        (0..d).map(|i| (0..d).map(|j| m.get(i, j) * &x[j]).sum()).collect()
    };
    let mut max_ratio: f64 = 0.0;
    let mut expanded = 0;
    let mut done = 0;
    while done < pairs {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let before = log_distance(&x, &y);
        if before < 1e-6 {
            continue;
        }
        let ratio = log_distance(&apply(&x), &apply(&y)) / before;
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + 1e-9 {
            expanded += 1;
        }
        done += 1;
    }
    ExpansionProbe { pairs, max_ratio, expanded }
}

/// A closed Rauzy path at `perm` with positive product, and the diameter of its cone image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormalizationDomain {
    pub cycle: PathMatrix,
    pub diameter: f64,
    pub contraction: f64,
}

/// Searches for a short closed path at `perm` whose product is entrywise positive.
///
/// Follows the induction of random admissible lengths; the first return to `perm` after the
/// running product has become positive closes a candidate. Only the zero pattern of the product
/// is tracked during the walk; the exact product of the shortest candidate is rebuilt at the end.
pub fn find_positive_cycle(
    perm: &GeneralizedPermutation,
    seed: u64,
    attempts: usize,
    max_len: usize,
) -> Result<RenormalizationDomain, CocycleError> {
    let sampler = LengthSampler::new(perm)?;
    let d = perm.d();
    let mut trans = Transitions::new(perm);
    let mut best: Option<Vec<StepRecord>> = None;
    for a in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(a as u64);
        let lam: Vec<f64> = sampler.sample_float(&mut rng)?;
        let mut st = CocycleState::new(lam, Vec::new());
        let mut pattern: Vec<bool> = (0..d * d).map(|i| i / d == i % d).collect();
        let mut steps = Vec::new();
        let limit = best.as_ref().map_or(max_len, |b| b.len().min(max_len));
        while steps.len() < limit {
            let Ok(kind) = st.next_move(&trans) else { break };
            let Ok(e) = st.elementary_step(&mut trans, kind) else { break };
            for i in 0..d {
                pattern[i * d + e.loser] |= pattern[i * d + e.winner];
            }
            steps.push(StepRecord { kind, winner: e.winner, loser: e.loser });
            if steps.len() % 32 == 0 {
                st.tidy(&trans);
            }
            if st.node == 0 && pattern.iter().all(|&b| b) {
                if best.as_ref().map_or(true, |b| steps.len() < b.len()) {
                    best = Some(steps);
                }
                break;
            }
        }
    }
    let steps = best.ok_or_else(|| CocycleError::NotFound(format!("no positive cycle within {max_len} steps")))?;
    let mut cycle = PathMatrix::empty(perm.clone());
    let mut node = 0;
    for s in &steps {
        let e = trans.step(node, s.kind)?;
        cycle.product.add_column(e.winner, e.loser);
        node = e.target;
    }
    cycle.steps = steps;
    cycle.end = trans.permutation(node).clone();
    let diameter = cone_image_diameter(&cycle.product);
    Ok(RenormalizationDomain { contraction: birkhoff_coefficient(diameter), diameter, cycle })
}

/// Small integer vectors whose images under sampled transposed products stay bounded.
///
/// Candidates for the directions where the cocycle acts isometrically; vectors are listed up to sign.
pub fn isometric_part_probe(
    perm: &GeneralizedPermutation,
    norm_bound: i64,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<i64>>, CocycleError> {
    let sampler = LengthSampler::new(perm)?;
    let d = perm.d();
    let mut mats = Vec::with_capacity(samples);
    for s in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let lam = sampler.sample_exact(&mut rng, 192)?;
        let n = rng.gen_range(20..80);
        let t = LinearInvolution::from_aligned(perm.clone(), lam).map_err(RauzyError::from)?;
        let (path, _) = rauzy_path(&t, n)?;
        let v = path.visiting_matrix();
        mats.push((0..d).map(|i| (0..d).map(|j| bigint_to_f64(v.get(i, j))).collect::<Vec<f64>>()).collect::<Vec<_>>());
    }
    let limit = (d as i64 * norm_bound) as f64;
    let mut out = Vec::new();
    let mut w = vec![-norm_bound; d];
    loop {
        let first = w.iter().find(|&&x| x != 0);
        if first.is_some_and(|&x| x > 0) {
            let bounded = mats.iter().all(|m: &Vec<Vec<f64>>| {
                m.iter().all(|row| row.iter().zip(&w).map(|(a, &b)| a * b as f64).sum::<f64>().abs() <= limit)
            });
            if bounded {
                out.push(w.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(out);
            }
            w[i] += 1;
            if w[i] <= norm_bound {
                break;
            }
            w[i] = -norm_bound;
            i += 1;
        }
    }
}

/// Rank over the rationals of a set of integer vectors.
pub fn integer_rank(vs: &[Vec<i64>]) -> usize {
    let mut rows: Vec<Vec<BigRational>> =
        vs.iter().map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != BigRational::from_integer(0.into())) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for r in 0..rows.len() {
            if r != rank {
                let f = rows[r][c].clone() / pivot.clone();
                let src = rows[rank].clone();
                for (a, b) in rows[r].iter_mut().zip(src) {
                    *a -= f.clone() * b;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q22() -> GeneralizedPermutation {
        GeneralizedPermutation::validate(&["A", "B", "A", "C", "D", "C"], &["D", "E", "B", "E"]).unwrap()
    }

    #[test]
    fn hilbert_metric_basics() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(hilbert_distance(&x, &x).unwrap(), 0.0);
        let y = [2.0, 4.0, 6.0];
        assert!(hilbert_distance(&x, &y).unwrap().abs() < 1e-15);
        let z = [1.0, 1.0, 1.0];
        assert!((hilbert_distance(&x, &z).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert_eq!(hilbert_distance(&x, &[1.0, 0.0, 1.0]), Err(CocycleError::NonPositive));
    }

    #[test]
    fn diameter_of_positive_matrix_is_finite() {
        let m = IntMatrix::from_rows(vec![
            vec![BigInt::from(2), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(1)],
        ]);
        assert!((cone_image_diameter(&m) - 2f64.ln()).abs() < 1e-12);
        assert!(cone_image_diameter(&IntMatrix::identity(2)).is_infinite());
    }

    #[test]
    fn q22_positive_cycle() {
        let dom = find_positive_cycle(&q22(), 11, 8, 1_000_000).unwrap();
        assert!(dom.cycle.product.is_positive());
        assert_eq!(dom.cycle.start, dom.cycle.end);
        assert!(dom.diameter.is_finite() && dom.contraction < 1.0);
        assert_eq!(dom.cycle.product.determinant(), BigInt::from(1));
    }

    #[test]
    fn small_spectrum_run_is_reproducible() {
        let opts = LyapunovOptions { steps: 2_000, batches: 4, warmup: 100, seed: 5, ..Default::default() };
        let a = lyapunov_spectrum::<f64>(&q22(), &opts).unwrap();
        let b = lyapunov_spectrum::<f64>(&q22(), &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.exponents[0] > 0.0);
        // the cocycle preserves volume
        let total: f64 = a.exponents.iter().sum();
        assert!(total.abs() < 1e-2, "{total}");
        let c = lyapunov_spectrum::<f32>(&q22(), &opts).unwrap();
        assert!((c.exponents[0] - a.exponents[0]).abs() < 0.05);
    }

    #[test]
    fn positive_matrix_does_not_expand() {
        let m = IntMatrix::from_rows(vec![
            vec![BigInt::from(2), BigInt::from(1), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(3), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(1)],
        ]);
        let probe = expansion_probe(&m, 2_000, 3);
        assert_eq!(probe.expanded, 0);
        assert!(probe.max_ratio <= birkhoff_coefficient(cone_image_diameter(&m)) + 1e-9);
        // diagonal scaling is an isometry of the cone
        let diag = IntMatrix::from_rows(vec![
            vec![BigInt::from(1000), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ]);
        let probe = expansion_probe(&diag, 200, 3);
        assert!((probe.max_ratio - 1.0).abs() < 1e-9);
        assert_eq!(probe.expanded, 0);
    }

    #[test]
    fn rank_of_integer_vectors() {
        assert_eq!(integer_rank(&[vec![1, 0, 1], vec![2, 0, 2], vec![0, 1, 0]]), 2);
        assert_eq!(integer_rank(&[]), 0);
    }
}
