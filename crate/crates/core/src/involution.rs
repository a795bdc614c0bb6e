//! Linear involutions `T = tau o f` on two copies of `(0, L)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genperm::GeneralizedPermutation;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvolutionError {
    #[error("row sums differ: top {top}, bottom {bottom}")]
    SumMismatch { top: String, bottom: String },
    #[error("length of {label:?} is not positive")]
    Positivity { label: String },
    #[error("lengths and permutation disagree: {0}")]
    ParameterMismatch(String),
    #[error("point {x} on component {component} is a singularity")]
    SingularPoint { x: String, component: usize },
    #[error("point {x} lies outside [0, {total}]")]
    OutOfRange { x: String, total: String },
    #[error("first return not reached after {0} interval steps")]
    NotFiniteReturn(usize),
    #[error("window length must lie in (0, L], got {0}")]
    InvalidWindow(String),
    #[error("cannot parse length {0:?}")]
    Parse(String),
}

/// Positive lengths indexed by the letters of a permutation.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthVector<S> {
    labels: Vec<String>,
    values: Vec<S>,
}

impl<S: Scalar> LengthVector<S> {
    /// Values are given in the alphabet order of `perm`.
    pub fn new(perm: &GeneralizedPermutation, values: Vec<S>) -> Result<Self, InvolutionError> {
        if values.len() != perm.d() {
            return Err(InvolutionError::ParameterMismatch(format!(
                "{} lengths for {} letters",
                values.len(),
                perm.d()
            )));
        }
        Self::from_labels(perm.alphabet().to_vec(), values)
    }

    pub fn from_labels(labels: Vec<String>, values: Vec<S>) -> Result<Self, InvolutionError> {
        if labels.len() != values.len() {
            return Err(InvolutionError::ParameterMismatch("label/value count".into()));
        }
        for (l, v) in labels.iter().zip(&values) {
            if !v.is_positive() {
                return Err(InvolutionError::Positivity { label: l.clone() });
            }
        }
        Ok(LengthVector { labels, values })
    }

    /// Whitespace separated values, e.g. `"1 2 2 3 3"` or `"1/2 3/4 ..."`.
    pub fn parse(perm: &GeneralizedPermutation, text: &str) -> Result<Self, InvolutionError> {
        let vals: Result<Vec<S>, _> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<S>().map_err(|_| InvolutionError::Parse(t.to_string())))
            .collect();
        Self::new(perm, vals?)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn values(&self) -> &[S] {
        &self.values
    }
    pub fn into_values(self) -> Vec<S> {
        self.values
    }
    pub fn get(&self, label: &str) -> Option<&S> {
        self.labels.iter().position(|l| l == label).map(|i| &self.values[i])
    }
    pub fn sum(&self) -> S {
        self.values.iter().fold(S::zero(), |a, v| a + v.clone())
    }

    /// Values rearranged into the alphabet order of `perm`.
    pub fn aligned(&self, perm: &GeneralizedPermutation) -> Result<Vec<S>, InvolutionError> {
        if self.labels.len() != perm.d() {
            return Err(InvolutionError::ParameterMismatch("letter count".into()));
        }
        perm.alphabet()
            .iter()
            .map(|a| {
                self.get(a)
                    .cloned()
                    .ok_or_else(|| InvolutionError::ParameterMismatch(format!("no length for {a:?}")))
            })
            .collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LengthVector<T> {
        LengthVector { labels: self.labels.clone(), values: self.values.iter().map(f).collect() }
    }
}

impl<S: Scalar> Serialize for LengthVector<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.labels.len()))?;
        for (l, v) in self.labels.iter().zip(&self.values) {
            m.serialize_entry(l, &v.to_string())?;
        }
        m.end()
    }
}

impl<'de, S: Scalar> Deserialize<'de> for LengthVector<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m: indexmap_free::OrderedMap = indexmap_free::OrderedMap::deserialize(d)?;
        let mut values = Vec::with_capacity(m.0.len());
        for (_, v) in &m.0 {
            values.push(v.parse::<S>().map_err(|_| serde::de::Error::custom(format!("bad length {v:?}")))?);
        }
        let labels = m.0.into_iter().map(|(k, _)| k).collect();
        LengthVector::from_labels(labels, values).map_err(serde::de::Error::custom)
    }
}

mod indexmap_free {
    //! Order-preserving `{label: value}` reader.
    use serde::de::{MapAccess, Visitor};
    use serde::{Deserialize, Deserializer};
    use std::fmt;

    pub struct OrderedMap(pub Vec<(String, String)>);

    impl<'de> Deserialize<'de> for OrderedMap {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            struct V;
            impl<'de> Visitor<'de> for V {
                type Value = OrderedMap;
                fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                    f.write_str("a map from labels to lengths")
                }
                fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> Result<OrderedMap, A::Error> {
                    let mut out = Vec::new();
                    while let Some((k, v)) = a.next_entry::<String, serde_json::Value>()? {
                        let v = match v {
                            serde_json::Value::String(s) => s,
                            serde_json::Value::Number(n) => n.to_string(),
                            other => return Err(serde::de::Error::custom(format!("bad length {other}"))),
                        };
                        out.push((k, v));
                    }
                    Ok(OrderedMap(out))
                }
            }
            d.deserialize_map(V)
        }
    }
}

/// A point `(x, component)` of `(0, L) x {0, 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint<S> {
    pub x: S,
    pub component: usize,
}

impl<S: Scalar> MarkedPoint<S> {
    pub fn new(x: S, component: usize) -> Self {
        MarkedPoint { x, component }
    }
}

impl<S: Scalar> fmt::Display for MarkedPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.component)
    }
}

#[derive(Clone, Debug)]
pub struct LinearInvolution<S> {
    perm: GeneralizedPermutation,
    lengths: Vec<S>,
    ends: [Vec<S>; 2],
    total: S,
}

impl<S: Scalar> LinearInvolution<S> {
    pub fn new(perm: GeneralizedPermutation, lambda: &LengthVector<S>) -> Result<Self, InvolutionError> {
        let lengths = lambda.aligned(&perm)?;
        Self::from_aligned(perm, lengths)
    }

    /// Lengths in the alphabet order of `perm`.
    pub fn from_aligned(perm: GeneralizedPermutation, lengths: Vec<S>) -> Result<Self, InvolutionError> {
        if lengths.len() != perm.d() {
            return Err(InvolutionError::ParameterMismatch("letter count".into()));
        }
        for (x, v) in lengths.iter().enumerate() {
            if !v.is_positive() {
                return Err(InvolutionError::Positivity { label: perm.label(x).to_string() });
            }
        }
        let cumulative = |row: &[usize]| {
            let mut acc = S::zero();
            row.iter()
                .map(|&x| {
                    acc = acc.clone() + lengths[x].clone();
                    acc.clone()
                })
                .collect::<Vec<S>>()
        };
        let top = cumulative(perm.top());
        let bottom = cumulative(perm.bottom());
        let (lt, lb) = (top.last().unwrap().clone(), bottom.last().unwrap().clone());
        if !lt.approx_eq(&lb, &lt) {
            return Err(InvolutionError::SumMismatch { top: lt.to_string(), bottom: lb.to_string() });
        }
        Ok(LinearInvolution { perm, lengths, ends: [top, bottom], total: lt })
    }

    pub fn permutation(&self) -> &GeneralizedPermutation {
        &self.perm
    }
    /// Lengths in alphabet order.
    pub fn lengths(&self) -> &[S] {
        &self.lengths
    }
    pub fn length_vector(&self) -> LengthVector<S> {
        LengthVector { labels: self.perm.alphabet().to_vec(), values: self.lengths.clone() }
    }
    pub fn total(&self) -> &S {
        &self.total
    }

    /// Right endpoints of the subintervals of a row.
    pub fn endpoints(&self, row: usize) -> &[S] {
        &self.ends[row]
    }

    pub fn start(&self, pos: usize) -> S {
        let (row, i) = self.perm.locate(pos);
        if i == 0 {
            S::zero()
        } else {
            self.ends[row][i - 1].clone()
        }
    }

    pub fn end(&self, pos: usize) -> S {
        let (row, i) = self.perm.locate(pos);
        self.ends[row][i].clone()
    }

    fn check_range(&self, p: &MarkedPoint<S>) -> Result<(), InvolutionError> {
        if p.component > 1 || p.x.is_negative() || p.x > self.total {
            return Err(InvolutionError::OutOfRange { x: p.x.to_string(), total: self.total.to_string() });
        }
        Ok(())
    }

    /// Index in `row` of the subinterval whose closure's interior contains `x`; `None` at endpoints.
    fn interior_index(&self, row: usize, x: &S) -> Option<usize> {
        let ends = &self.ends[row];
        let i = ends.partition_point(|e| e < x);
        if i >= ends.len() || ends[i] == *x || x.is_zero() {
            return None;
        }
        if i > 0 && ends[i - 1] == *x {
            return None;
        }
        Some(i)
    }

    /// Global position of the subinterval `[start, end)` containing the point.
    pub fn locate(&self, p: &MarkedPoint<S>) -> Result<usize, InvolutionError> {
        self.check_range(p)?;
        let ends = &self.ends[p.component];
        let i = ends.partition_point(|e| e <= &p.x);
        if i >= ends.len() {
            return Err(InvolutionError::OutOfRange { x: p.x.to_string(), total: self.total.to_string() });
        }
        Ok(self.perm.position(p.component, i))
    }

    /// Applies `f` to a point interior to position `pos`: the partner subinterval and row.
    fn apply_f(&self, pos: usize, x: &S) -> (S, usize) {
        let q = self.perm.partner(pos);
        let (qrow, _) = self.perm.locate(q);
        let (prow, _) = self.perm.locate(pos);
        let offset = x.clone() - self.start(pos);
        let y = if qrow == prow { self.end(q) - offset } else { self.start(q) + offset };
        (y, qrow)
    }

    pub fn evaluate(&self, p: &MarkedPoint<S>) -> Result<MarkedPoint<S>, InvolutionError> {
        self.check_range(p)?;
        let i = self.interior_index(p.component, &p.x).ok_or_else(|| InvolutionError::SingularPoint {
            x: p.x.to_string(),
            component: p.component,
        })?;
        let (y, row) = self.apply_f(self.perm.position(p.component, i), &p.x);
        Ok(MarkedPoint { x: y, component: 1 - row })
    }

    /// `T^{-1} = f o tau`.
    pub fn inverse(&self, p: &MarkedPoint<S>) -> Result<MarkedPoint<S>, InvolutionError> {
        self.check_range(p)?;
        let row = 1 - p.component;
        let i = self
            .interior_index(row, &p.x)
            .ok_or_else(|| InvolutionError::SingularPoint { x: p.x.to_string(), component: p.component })?;
        let (y, qrow) = self.apply_f(self.perm.position(row, i), &p.x);
        Ok(MarkedPoint { x: y, component: qrow })
    }

    pub fn orbit(&self, p: &MarkedPoint<S>, n: usize) -> Result<Orbit<S>, InvolutionError> {
        self.check_range(p)?;
        let mut points = vec![p.clone()];
        let mut positions = vec![self.locate(p)?];
        let mut truncated = None;
        let mut cur = p.clone();
        for k in 0..n {
            match self.evaluate(&cur) {
                Ok(next) => {
                    positions.push(self.locate(&next)?);
                    points.push(next.clone());
                    cur = next;
                }
                Err(InvolutionError::SingularPoint { .. }) => {
                    truncated = Some(k);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Orbit { points, positions, truncated })
    }

    /// Singularities of `T`: interior subinterval endpoints on their own component.
    pub fn singularities(&self) -> Vec<MarkedPoint<S>> {
        let mut out = Vec::new();
        for row in 0..2 {
            for e in &self.ends[row] {
                if *e < self.total {
                    out.push(MarkedPoint { x: e.clone(), component: row });
                }
            }
        }
        out
    }

    /// Singularities of `T^{-1}`: the same endpoints on the opposite component.
    pub fn inverse_singularities(&self) -> Vec<MarkedPoint<S>> {
        self.singularities().into_iter().map(|p| MarkedPoint { x: p.x, component: 1 - p.component }).collect()
    }

    fn is_singular(&self, p: &MarkedPoint<S>) -> bool {
        self.interior_index(p.component, &p.x).is_none()
    }

    /// A chain from a singularity of `T^{-1}` to a singularity of `T`, shortest first.
    pub fn detect_connection(&self, max_len: usize) -> Option<Connection<S>> {
        let mut fronts: Vec<(MarkedPoint<S>, MarkedPoint<S>)> =
            self.inverse_singularities().into_iter().map(|p| (p.clone(), p)).collect();
        for k in 0..=max_len {
            if let Some((s, e)) = fronts.iter().find(|(_, cur)| self.is_singular(cur)) {
                return Some(Connection { start: s.clone(), end: e.clone(), length: k });
            }
            if k == max_len {
                break;
            }
            for (_, cur) in fronts.iter_mut() {
                *cur = self.evaluate(cur).expect("non-singular point");
            }
        }
        None
    }

    /// The map induced on `(0, s) x {0, 1}` by first return, as a linear involution.
    pub fn first_return_map(&self, s: &S) -> Result<FirstReturn<S>, InvolutionError> {
        first_return(self, s, DEFAULT_RETURN_CAP)
    }

    pub fn first_return_map_with_cap(&self, s: &S, cap: usize) -> Result<FirstReturn<S>, InvolutionError> {
        first_return(self, s, cap)
    }
}

pub const DEFAULT_RETURN_CAP: usize = 1_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct Orbit<S> {
    pub points: Vec<MarkedPoint<S>>,
    /// global subinterval position (half-open ownership) of each point
    pub positions: Vec<usize>,
    /// step at which a singularity stopped the orbit
    pub truncated: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Connection<S> {
    pub start: MarkedPoint<S>,
    pub end: MarkedPoint<S>,
    pub length: usize,
}

/// One continuity piece of the first return map.
#[derive(Clone, Debug)]
pub struct ReturnPiece<S> {
    pub component: usize,
    pub lo: S,
    pub hi: S,
    pub return_time: usize,
    /// number of visits to each original letter before returning
    pub visits: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FirstReturn<S> {
    pub involution: LinearInvolution<S>,
    pub pieces: Vec<ReturnPiece<S>>,
}

#[derive(Clone, Debug)]
struct Tracked<S> {
    src_comp: usize,
    src_lo: S,
    src_hi: S,
    comp: usize,
    lo: S,
    hi: S,
    flipped: bool,
    visits: Vec<usize>,
    steps: usize,
}

impl<S: Scalar> Tracked<S> {
    /// Cuts at current coordinate `c` with `lo < c < hi`.
    fn split(self, c: &S) -> (Self, Self) {
        let off = c.clone() - self.lo.clone();
        let (src_a, src_b) = if self.flipped {
            let m = self.src_hi.clone() - off;
            ((m.clone(), self.src_hi.clone()), (self.src_lo.clone(), m))
        } else {
            let m = self.src_lo.clone() + off;
            ((self.src_lo.clone(), m.clone()), (m, self.src_hi.clone()))
        };
        let a = Tracked { src_lo: src_a.0, src_hi: src_a.1, hi: c.clone(), ..self.clone() };
        let b = Tracked { src_lo: src_b.0, src_hi: src_b.1, lo: c.clone(), ..self };
        (a, b)
    }
}

fn first_return<S: Scalar>(t: &LinearInvolution<S>, s: &S, cap: usize) -> Result<FirstReturn<S>, InvolutionError> {
    if !s.is_positive() || *s > t.total {
        return Err(InvolutionError::InvalidWindow(s.to_string()));
    }
    let perm = &t.perm;
    let d = perm.d();
    let mut work: Vec<Tracked<S>> = (0..2)
        .map(|c| Tracked {
            src_comp: c,
            src_lo: S::zero(),
            src_hi: s.clone(),
            comp: c,
            lo: S::zero(),
            hi: s.clone(),
            flipped: false,
            visits: vec![0; d],
            steps: 0,
        })
        .collect();
    let mut done: Vec<Tracked<S>> = Vec::new();
    let mut iterations = 0usize;
    while let Some(piece) = work.pop() {
        // split along the partition of the current row
        let ends = &t.ends[piece.comp];
        let mut rest = piece;
        let mut parts = Vec::new();
        let first = ends.partition_point(|e| e <= &rest.lo);
        for e in &ends[first..] {
            if *e >= rest.hi {
                break;
            }
            let (a, b) = rest.split(e);
            parts.push(a);
            rest = b;
        }
        parts.push(rest);
        for part in parts {
            iterations += 1;
            if iterations > cap {
                return Err(InvolutionError::NotFiniteReturn(cap));
            }
            let idx = ends.partition_point(|e| e <= &part.lo);
            let pos = perm.position(part.comp, idx);
            let q = perm.partner(pos);
            let (qrow, _) = perm.locate(q);
            let start = t.start(pos);
            let mut m = part;
            m.visits[perm.letter_at(pos)] += 1;
            m.steps += 1;
            if qrow == m.comp {
                let e = t.end(q);
                let (lo, hi) = (e.clone() - (m.hi.clone() - start.clone()), e - (m.lo.clone() - start));
                m.lo = lo;
                m.hi = hi;
                m.flipped = !m.flipped;
            } else {
                let b = t.start(q);
                let (lo, hi) = (b.clone() + (m.lo.clone() - start.clone()), b + (m.hi.clone() - start));
                m.lo = lo;
                m.hi = hi;
            }
            m.comp = 1 - qrow;
            if m.hi <= *s {
                done.push(m);
            } else if m.lo >= *s {
                work.push(m);
            } else {
                let (a, b) = m.split(s);
                done.push(a);
                work.push(b);
            }
        }
    }

    // refine so that f' = tau o T' maps pieces onto pieces; new source cuts may need further passes
    loop {
        let mut breaks: [Vec<S>; 2] = [Vec::new(), Vec::new()];
        for p in &done {
            breaks[p.src_comp].push(p.src_lo.clone());
        }
        let mut changed = false;
        let mut next = Vec::with_capacity(done.len());
        for p in done {
            let other = 1 - p.comp;
            let mut cuts: Vec<S> = breaks[other].iter().filter(|b| **b > p.lo && **b < p.hi).cloned().collect();
            if cuts.is_empty() {
                next.push(p);
                continue;
            }
            changed = true;
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut rest = p;
            for c in cuts.iter() {
                let (a, b) = rest.split(c);
                next.push(a);
                rest = b;
            }
            next.push(rest);
        }
        done = next;
        if !changed {
            break;
        }
    }

    let mut by_comp: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    done.sort_by(|a, b| (a.src_comp, &a.src_lo).partial_cmp(&(b.src_comp, &b.src_lo)).unwrap());
    for (i, p) in done.iter().enumerate() {
        by_comp[p.src_comp].push(i);
    }
    let n = done.len();
    // partner of each piece under f'
    let mut mate = vec![usize::MAX; n];
    for (i, p) in done.iter().enumerate() {
        let other = 1 - p.comp;
        let j = by_comp[other]
            .iter()
            .copied()
            .find(|&j| done[j].src_lo.approx_eq(&p.lo, s) && done[j].src_hi.approx_eq(&p.hi, s))
            .ok_or_else(|| InvolutionError::ParameterMismatch("induced pieces do not pair up".into()))?;
        mate[i] = j;
    }
    if (0..n).any(|i| mate[i] == i || mate[mate[i]] != i) {
        return Err(InvolutionError::ParameterMismatch("induced map is not an involution".into()));
    }

    // name the new letters: a pair that only visited letter b keeps the name b
    let mut pair_letter: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; d];
    let mut leftovers = Vec::new();
    for i in 0..n {
        let j = mate[i];
        if j < i {
            continue;
        }
        let v = &done[i].visits;
        let total: usize = v.iter().sum();
        let single = v.iter().position(|&c| c == 1).filter(|_| total == 1);
        match single {
            Some(b) if !used[b] => {
                used[b] = true;
                pair_letter[i] = Some(b);
            }
            _ => leftovers.push(i),
        }
    }
    let unused: Vec<usize> = (0..d).filter(|&x| !used[x]).collect();
    let mut alphabet: Vec<String> = perm.alphabet().to_vec();
    let mut label_of_pair: Vec<usize> = vec![usize::MAX; n];
    for i in 0..n {
        if let Some(b) = pair_letter[i] {
            label_of_pair[i] = b;
        }
    }
    if leftovers.len() == unused.len() {
        for (&i, &b) in leftovers.iter().zip(&unused) {
            label_of_pair[i] = b;
        }
    } else {
        let mut kept: Vec<usize> = (0..d).filter(|&x| used[x]).collect();
        kept.sort_unstable();
        let mut new_alpha: Vec<String> = kept.iter().map(|&x| alphabet[x].clone()).collect();
        for i in 0..n {
            if let Some(b) = pair_letter[i] {
                label_of_pair[i] = kept.iter().position(|&x| x == b).unwrap();
            }
        }
        for &i in &leftovers {
            let base = done[i].visits.iter().position(|&c| c > 0).map(|x| alphabet[x].clone()).unwrap_or_default();
            let mut name = format!("{base}'");
            while new_alpha.contains(&name) {
                name.push('\'');
            }
            label_of_pair[i] = new_alpha.len();
            new_alpha.push(name);
        }
        alphabet = new_alpha;
    }
    for i in 0..n {
        if mate[i] < i {
            label_of_pair[i] = label_of_pair[mate[i]];
        }
    }
    let rows: [Vec<usize>; 2] = [
        by_comp[0].iter().map(|&i| label_of_pair[i]).collect(),
        by_comp[1].iter().map(|&i| label_of_pair[i]).collect(),
    ];
    if rows[0].is_empty() || rows[1].is_empty() {
        return Err(InvolutionError::ParameterMismatch("induced map leaves a component empty".into()));
    }
    let new_perm = GeneralizedPermutation::from_indices(alphabet.clone(), rows[0].clone(), rows[1].clone());
    let mut lengths = vec![S::zero(); alphabet.len()];
    for (i, p) in done.iter().enumerate() {
        lengths[label_of_pair[i]] = p.src_hi.clone() - p.src_lo.clone();
    }
    let involution = LinearInvolution::from_aligned(new_perm, lengths)?;
    let pieces = done
        .into_iter()
        .map(|p| ReturnPiece { component: p.src_comp, lo: p.src_lo, hi: p.src_hi, return_time: p.steps, visits: p.visits })
        .collect();
    Ok(FirstReturn { involution, pieces })
}
