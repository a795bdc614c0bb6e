//! Rauzy-Veech induction on generalized permutations and its matrix cocycle.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genperm::{GeneralizedPermutation, LetterClass};
use crate::involution::{InvolutionError, LengthVector, LinearInvolution, MarkedPoint};
use crate::lp;
use crate::matrix::IntMatrix;
use crate::scalar::Scalar;

pub const DEFAULT_RUN_CAP: usize = 10_000;
pub const DEFAULT_CLASS_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RauzyError {
    #[error("the two last subintervals have equal length at step {step}")]
    Tie { step: usize },
    #[error("move undefined: {0}")]
    MoveUndefined(String),
    #[error("a Zorich run exceeded {cap} elementary steps at step {step}")]
    RunCapExceeded { cap: usize, step: usize },
    #[error("Rauzy class exceeds {0} permutations")]
    ClassTooLarge(usize),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    /// the last top letter wins
    Top,
    /// the last bottom letter wins
    Bottom,
}

impl Move {
    pub fn index(self) -> usize {
        match self {
            Move::Top => 0,
            Move::Bottom => 1,
        }
    }
    pub fn symbol(self) -> char {
        match self {
            Move::Top => 't',
            Move::Bottom => 'b',
        }
    }
}

/// Winner and loser letters of an elementary step, as indices into the shared alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: Move,
    pub winner: usize,
    pub loser: usize,
}

impl StepRecord {
    /// `I + E_{winner, loser}`; satisfies `B lambda' = lambda`.
    pub fn matrix(&self, d: usize) -> IntMatrix {
        IntMatrix::elementary(d, self.winner, self.loser)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InductionStep {
    pub record: StepRecord,
    pub successor: GeneralizedPermutation,
}

impl InductionStep {
    pub fn kind(&self) -> Move {
        self.record.kind
    }
    pub fn matrix(&self) -> IntMatrix {
        self.record.matrix(self.successor.d())
    }
}

/// Combinatorial successor of `perm` under a move, without reference to lengths.
pub fn successor(perm: &GeneralizedPermutation, kind: Move) -> Result<InductionStep, RauzyError> {
    let (l, m) = (perm.l(), perm.m());
    let a0 = perm.top()[l - 1];
    let a1 = perm.bottom()[m - 1];
    if a0 == a1 {
        return Err(RauzyError::MoveUndefined(format!("{} ends both rows", perm.label(a0))));
    }
    let mut top = perm.top().to_vec();
    let mut bottom = perm.bottom().to_vec();
    let (winner, loser) = match kind {
        Move::Top => (a0, a1),
        Move::Bottom => (a1, a0),
    };
    let last_pos = match kind {
        Move::Top => l - 1,
        Move::Bottom => l + m - 1,
    };
    let other = perm.partner(last_pos);
    let (orow, oidx) = perm.locate(other);
    match kind {
        Move::Top => {
            bottom.pop();
            match perm.class_of(winner) {
                LetterClass::Crossing => bottom.insert(oidx + 1, loser),
                _ => top.insert(oidx, loser),
            }
        }
        Move::Bottom => {
            top.pop();
            match perm.class_of(winner) {
                LetterClass::Crossing => top.insert(oidx + 1, loser),
                _ => bottom.insert(oidx, loser),
            }
        }
    }
    debug_assert!(orow == if perm.class_of(winner) == LetterClass::Crossing { 1 - kind.index() } else { kind.index() });
    if top.is_empty() || bottom.is_empty() {
        return Err(RauzyError::MoveUndefined("a row would become empty".into()));
    }
    let successor = GeneralizedPermutation::from_indices(perm.alphabet().to_vec(), top, bottom);
    Ok(InductionStep { record: StepRecord { kind, winner, loser }, successor })
}

/// The move taken for lengths `lambda` (alphabet order), or a tie.
pub fn move_for<S: Scalar>(perm: &GeneralizedPermutation, lambda: &[S]) -> Option<Move> {
    let a0 = perm.top()[perm.l() - 1];
    let a1 = perm.bottom()[perm.m() - 1];
    let (x, y) = (&lambda[a0], &lambda[a1]);
    if x > y {
        Some(Move::Top)
    } else if y > x {
        Some(Move::Bottom)
    } else {
        None
    }
}

/// One Rauzy-Veech step on a linear involution.
pub fn induct_step<S: Scalar>(t: &LinearInvolution<S>) -> Result<(InductionStep, LinearInvolution<S>), RauzyError> {
    let perm = t.permutation();
    let kind = move_for(perm, t.lengths()).ok_or(RauzyError::Tie { step: 0 })?;
    let step = successor(perm, kind)?;
    let mut lam = t.lengths().to_vec();
    let StepRecord { winner, loser, .. } = step.record;
    lam[winner] = lam[winner].clone() - lam[loser].clone();
    let next = LinearInvolution::from_aligned(step.successor.clone(), lam)?;
    Ok((step, next))
}

/// A finite path in the Rauzy diagram with its product `B = B_0 B_1 ... B_{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMatrix {
    pub start: GeneralizedPermutation,
    pub end: GeneralizedPermutation,
    pub steps: Vec<StepRecord>,
    pub product: IntMatrix,
}

impl PathMatrix {
    pub fn empty(start: GeneralizedPermutation) -> Self {
        let d = start.d();
        PathMatrix { end: start.clone(), start, steps: Vec::new(), product: IntMatrix::identity(d) }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: &InductionStep) {
        self.product.add_column(step.record.winner, step.record.loser);
        self.steps.push(step.record);
        self.end = step.successor.clone();
    }

    /// Entry `(alpha, beta)` counts visits to old letter `beta` by new letter `alpha`.
    pub fn visiting_matrix(&self) -> IntMatrix {
        self.product.transpose()
    }

    pub fn moves(&self) -> String {
        self.steps.iter().map(|s| s.kind.symbol()).collect()
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(&self, other: &PathMatrix) -> PathMatrix {
        assert_eq!(self.end, other.start, "paths do not connect");
        PathMatrix {
            start: self.start.clone(),
            end: other.end.clone(),
            steps: self.steps.iter().chain(&other.steps).copied().collect(),
            product: self.product.mul(&other.product),
        }
    }
}

/// `n` elementary steps.
pub fn rauzy_path<S: Scalar>(t: &LinearInvolution<S>, n: usize) -> Result<(PathMatrix, LinearInvolution<S>), RauzyError> {
    let mut path = PathMatrix::empty(t.permutation().clone());
    let mut cur = t.clone();
    for k in 0..n {
        let (step, next) = induct_step(&cur).map_err(|e| match e {
            RauzyError::Tie { .. } => RauzyError::Tie { step: k },
            other => other,
        })?;
        path.push(&step);
        cur = next;
    }
    Ok((path, cur))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZorichPath {
    pub path: PathMatrix,
    /// maximal runs of equal moves, in order
    pub runs: Vec<(Move, usize)>,
}

/// `k` maximal runs of equal moves; the run after the last one is detected but not taken.
pub fn zorich_path<S: Scalar>(
    t: &LinearInvolution<S>,
    k: usize,
    run_cap: usize,
) -> Result<(ZorichPath, LinearInvolution<S>), RauzyError> {
    let mut path = PathMatrix::empty(t.permutation().clone());
    let mut runs = Vec::with_capacity(k);
    let mut cur = t.clone();
    let mut run: Option<(Move, usize)> = None;
    if k == 0 {
        return Ok((ZorichPath { path, runs }, cur));
    }
    loop {
        let step_no = path.len();
        let kind = move_for(cur.permutation(), cur.lengths()).ok_or(RauzyError::Tie { step: step_no })?;
        match run {
            Some((rk, n)) if rk != kind => {
                runs.push((rk, n));
                if runs.len() == k {
                    break;
                }
                run = Some((kind, 0));
            }
            None => run = Some((kind, 0)),
            _ => {}
        }
        let (rk, n) = run.unwrap();
        if n >= run_cap {
            return Err(RauzyError::RunCapExceeded { cap: run_cap, step: step_no });
        }
        let (step, next) = induct_step(&cur)?;
        path.push(&step);
        cur = next;
        run = Some((rk, n + 1));
    }
    Ok((ZorichPath { path, runs }, cur))
}

/// Visit counts along `n` steps, measured by following orbits of the original map.
///
/// Row `alpha` counts, for a point of the new subinterval `alpha`, how often its orbit meets each
/// old subinterval before first returning to the induced domain.
pub fn visiting_counts<S: Scalar>(t: &LinearInvolution<S>, n: usize) -> Result<IntMatrix, RauzyError> {
    let (_, induced) = rauzy_path(t, n)?;
    let window = induced.total().clone();
    let d = t.permutation().d();
    let perm = induced.permutation();
    let mut out = IntMatrix::zeros(d);
    for letter in 0..d {
        let mut rows = Vec::new();
        for pos in perm.occurrences(letter) {
            let (row, _) = perm.locate(pos);
            let mid = (induced.start(pos) + induced.end(pos)).half();
            let mut p = MarkedPoint::new(mid, row);
            let mut counts = vec![0i64; d];
            loop {
                let at = t.locate(&p)?;
                counts[t.permutation().letter_at(at)] += 1;
                p = t.evaluate(&p)?;
                if p.x < window {
                    break;
                }
            }
            rows.push(counts);
        }
        if rows[0] != rows[1] {
            return Err(RauzyError::MoveUndefined(format!(
                "the two halves of {} visit different letters",
                perm.label(letter)
            )));
        }
        for (j, c) in rows[0].iter().enumerate() {
            out.set(letter, j, (*c).into());
        }
    }
    Ok(out)
}

/// Some positive balanced length vector selects this move.
pub fn move_realizable(perm: &GeneralizedPermutation, kind: Move) -> bool {
    if successor(perm, kind).is_err() || !perm.admits_lengths() {
        return false;
    }
    let d = perm.d();
    let a0 = perm.top()[perm.l() - 1];
    let a1 = perm.bottom()[perm.m() - 1];
    let balance: Vec<lp::Q> = perm.balance_row().into_iter().map(lp::q).collect();
    let mut strict: Vec<Vec<lp::Q>> = (0..d)
        .map(|i| (0..d).map(|j| lp::q((i == j) as i64)).collect())
        .collect();
    let mut gap = vec![lp::q(0); d];
    let (w, l) = match kind {
        Move::Top => (a0, a1),
        Move::Bottom => (a1, a0),
    };
    gap[w] = lp::q(1);
    gap[l] = lp::q(-1);
    strict.push(gap);
    lp::strictly_feasible(d, &[balance], &strict).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub target: usize,
    pub winner: usize,
    pub loser: usize,
}

/// The permutations reachable by realizable moves, with the transition table.
#[derive(Clone, Debug, Serialize)]
pub struct RauzyClass {
    pub nodes: Vec<GeneralizedPermutation>,
    /// `edges[i][move.index()]`
    pub edges: Vec<[Option<Edge>; 2]>,
    #[serde(skip)]
    index: HashMap<GeneralizedPermutation, usize>,
}

impl RauzyClass {
    pub fn enumerate(perm: &GeneralizedPermutation, cap: usize) -> Result<Self, RauzyError> {
        let mut nodes = vec![perm.clone()];
        let mut index = HashMap::new();
        index.insert(perm.clone(), 0);
        let mut edges: Vec<[Option<Edge>; 2]> = vec![[None, None]];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for kind in [Move::Top, Move::Bottom] {
                if !move_realizable(&nodes[i], kind) {
                    continue;
                }
                let step = successor(&nodes[i], kind)?;
                let target = match index.get(&step.successor) {
                    Some(&j) => j,
                    None => {
                        if nodes.len() >= cap {
                            return Err(RauzyError::ClassTooLarge(cap));
                        }
                        let j = nodes.len();
                        index.insert(step.successor.clone(), j);
                        nodes.push(step.successor);
                        edges.push([None, None]);
                        queue.push_back(j);
                        j
                    }
                };
                edges[i][kind.index()] = Some(Edge { target, winner: step.record.winner, loser: step.record.loser });
            }
        }
        Ok(RauzyClass { nodes, edges, index })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, perm: &GeneralizedPermutation) -> Option<usize> {
        self.index.get(perm).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().filter(|e| e.is_some()).count()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph rauzy {\n");
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"{}\\n{}\"];", p.top_labels().join(" "), p.bottom_labels().join(" "));
        }
        for (i, es) in self.edges.iter().enumerate() {
            for (k, e) in es.iter().enumerate() {
                if let Some(e) = e {
                    let (style, name) = if k == 0 { ("solid", "t") } else { ("dashed", "b") };
                    let _ = writeln!(s, "  n{i} -> n{} [label=\"{name}\", style={style}];", e.target);
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Lazily built transition table, for long runs of the induction in floating point.
#[derive(Clone, Debug)]
pub struct Transitions {
    nodes: Vec<GeneralizedPermutation>,
    index: HashMap<GeneralizedPermutation, usize>,
    edges: Vec<[Option<Edge>; 2]>,
    last: Vec<(usize, usize)>,
}

impl Transitions {
    pub fn new(start: &GeneralizedPermutation) -> Self {
        let mut t = Transitions { nodes: Vec::new(), index: HashMap::new(), edges: Vec::new(), last: Vec::new() };
        t.intern(start.clone());
        t
    }

    fn intern(&mut self, p: GeneralizedPermutation) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.nodes.len();
        self.last.push((p.top()[p.l() - 1], p.bottom()[p.m() - 1]));
        self.index.insert(p.clone(), i);
        self.nodes.push(p);
        self.edges.push([None, None]);
        i
    }

    pub fn permutation(&self, node: usize) -> &GeneralizedPermutation {
        &self.nodes[node]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Last top and last bottom letter of a node.
    pub fn last_letters(&self, node: usize) -> (usize, usize) {
        self.last[node]
    }

    pub fn step(&mut self, node: usize, kind: Move) -> Result<Edge, RauzyError> {
        if let Some(e) = self.edges[node][kind.index()] {
            return Ok(e);
        }
        let s = successor(&self.nodes[node], kind)?;
        let target = self.intern(s.successor);
        let e = Edge { target, winner: s.record.winner, loser: s.record.loser };
        self.edges[node][kind.index()] = Some(e);
        Ok(e)
    }
}

/// Lengths after `path`, i.e. `B^{-1} lambda` applied step by step; for checks and reports.
pub fn lengths_after<S: Scalar>(lambda: &LengthVector<S>, path: &PathMatrix) -> Result<Vec<S>, RauzyError> {
    let mut v = lambda.aligned(&path.start)?;
    for s in &path.steps {
        v[s.winner] = v[s.winner].clone() - v[s.loser].clone();
    }
    Ok(v)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::Rational;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    pub fn ri(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    pub fn q22_perm() -> GeneralizedPermutation {
        GeneralizedPermutation::validate(&["A", "B", "A", "C", "D", "C"], &["D", "E", "B", "E"]).unwrap()
    }

    fn q22() -> LinearInvolution<Rational> {
        let p = q22_perm();
        let lam = LengthVector::new(&p, vec![ri(1), ri(2), ri(2), ri(3), ri(3)]).unwrap();
        LinearInvolution::new(p, &lam).unwrap()
    }

    /// Balanced positive rational lengths from integer seeds.
    pub fn balanced(perm: &GeneralizedPermutation, seeds: &[u32]) -> Option<Vec<Rational>> {
        if !perm.admits_lengths() {
            return None;
        }
        let mut lam: Vec<Rational> = (0..perm.d()).map(|i| ri(seeds[i % seeds.len()] as i64 + 1)).collect();
        let s0: Rational = (0..perm.d()).filter(|&x| perm.class_of(x) == LetterClass::Top).map(|x| lam[x].clone()).sum();
        let s1: Rational =
            (0..perm.d()).filter(|&x| perm.class_of(x) == LetterClass::Bottom).map(|x| lam[x].clone()).sum();
        if perm.is_genuine() {
            for x in 0..perm.d() {
                if perm.class_of(x) == LetterClass::Bottom {
                    lam[x] = lam[x].clone() * s0.clone() / s1.clone();
                }
            }
        }
        Some(lam)
    }

    #[test]
    fn q22_step() {
        let t = q22();
        let (step, next) = induct_step(&t).unwrap();
        assert_eq!(step.kind(), Move::Bottom);
        assert_eq!(t.permutation().label(step.record.winner), "E");
        assert_eq!(t.permutation().label(step.record.loser), "C");
        assert_eq!(next.permutation().top_labels(), vec!["A", "B", "A", "C", "D"]);
        assert_eq!(next.permutation().bottom_labels(), vec!["D", "C", "E", "B", "E"]);
        assert_eq!(next.lengths(), &[ri(1), ri(2), ri(2), ri(3), ri(1)]);
        assert_eq!(step.matrix().determinant(), BigInt::from(1));
    }

    #[test]
    fn tie_is_reported() {
        let p = GeneralizedPermutation::validate(&["A", "A", "B"], &["B", "C", "C"]).unwrap();
        let lam = LengthVector::new(&p, vec![ri(1), ri(1), ri(1)]).unwrap();
        let t = LinearInvolution::new(p, &lam).unwrap();
        assert!(matches!(induct_step(&t), Err(RauzyError::Tie { .. })));
        assert!(matches!(rauzy_path(&t, 3), Err(RauzyError::Tie { step: 0 })));
    }

    #[test]
    fn undefined_when_one_letter_ends_both_rows() {
        let p = GeneralizedPermutation::validate(&["A", "A", "B"], &["C", "C", "B"]).unwrap();
        assert!(matches!(successor(&p, Move::Top), Err(RauzyError::MoveUndefined(_))));
        assert!(!move_realizable(&p, Move::Top));
    }

    #[test]
    fn q22_class() {
        let c = RauzyClass::enumerate(&q22_perm(), DEFAULT_CLASS_CAP).unwrap();
        assert!(c.len() > 1);
        assert!(c.to_dot().starts_with("digraph"));
        for es in &c.edges {
            assert!(es.iter().any(|e| e.is_some()));
        }
    }

    #[test]
    fn zorich_product_equals_elementary_product() {
        let t = LinearInvolution::from_aligned(q22_perm(), vec![ri(1000), ri(2718), ri(3141), ri(1414), ri(4141)])
            .unwrap();
        let (z, _) = zorich_path(&t, 3, DEFAULT_RUN_CAP).unwrap();
        let n = z.path.len();
        let (p, _) = rauzy_path(&t, n).unwrap();
        assert_eq!(p.product, z.path.product);
        assert_eq!(z.runs.iter().map(|r| r.1).sum::<usize>(), n);
        for w in z.runs.windows(2) {
            assert_ne!(w[0].0, w[1].0);
        }
    }

    fn arb_case() -> impl Strategy<Value = (GeneralizedPermutation, Vec<Rational>)> {
        (2usize..=5, any::<u64>(), prop::collection::vec(1u32..1000, 8)).prop_filter_map(
            "irreducible with lengths",
            |(d, pick, seeds)| {
                let all = GeneralizedPermutation::enumerate(d);
                let p = all[(pick % all.len() as u64) as usize].clone();
                if !p.is_genuine() || !p.is_irreducible() {
                    return None;
                }
                balanced(&p, &seeds).map(|l| (p, l))
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_reconstructs_lengths((p, lam) in arb_case()) {
            let t = LinearInvolution::from_aligned(p, lam.clone()).unwrap();
            if let Ok((path, end)) = rauzy_path(&t, 12) {
                prop_assert_eq!(path.product.apply(end.lengths()), lam);
                prop_assert_eq!(path.product.determinant(), BigInt::from(1));
                prop_assert!(path.product.min_entry() >= BigInt::from(0));
            }
        }

        #[test]
        fn step_equals_first_return((p, lam) in arb_case()) {
            let mut t = LinearInvolution::from_aligned(p, lam).unwrap();
            for _ in 0..6 {
                let Ok((_, next)) = induct_step(&t) else { break };
                let fr = t.first_return_map(next.total()).unwrap();
                prop_assert_eq!(fr.involution.permutation(), next.permutation());
                prop_assert_eq!(fr.involution.length_vector().aligned(next.permutation()).unwrap(), next.lengths().to_vec());
                t = next;
            }
        }

        #[test]
        fn visiting_matrix_matches_orbits((p, lam) in arb_case(), n in 1usize..6) {
            let t = LinearInvolution::from_aligned(p, lam).unwrap();
            if let Ok((path, _)) = rauzy_path(&t, n) {
                prop_assert_eq!(visiting_counts(&t, n).unwrap(), path.visiting_matrix());
            }
        }
    }
}
