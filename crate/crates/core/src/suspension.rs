//! Suspensions of linear involutions: polygons, heights and the singularity pattern.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genperm::{GeneralizedPermutation, LetterClass};
use crate::involution::{InvolutionError, LengthVector};
use crate::lp::{self, Q};
use crate::rauzy::StepRecord;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuspensionError {
    #[error("no suspension data exists for this permutation")]
    NoSuspension,
    #[error("suspension data violates {0}")]
    InvalidData(String),
    #[error("polygon sides do not close up: {0}")]
    TraceError(String),
    #[error("invalid stratum: {0}")]
    InvalidStratum(String),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
}

/// `zeta_alpha = lambda_alpha + i tau_alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuspensionData<S> {
    perm: GeneralizedPermutation,
    lambda: Vec<S>,
    tau: Vec<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polygon {
    /// `P_0 .. P_l`
    pub top: Vec<(f64, f64)>,
    /// `Q_0 .. Q_m`
    pub bottom: Vec<(f64, f64)>,
}

fn prefix_rows(perm: &GeneralizedPermutation, row: usize) -> Vec<Vec<i64>> {
    let r = perm.row(row);
    let mut acc = vec![0i64; perm.d()];
    let mut out = vec![acc.clone()];
    for &x in r {
        acc[x] += 1;
        out.push(acc.clone());
    }
    out
}

/// Height of each letter as a linear form in `tau`.
pub fn height_rows(perm: &GeneralizedPermutation) -> Vec<Vec<i64>> {
    let p = prefix_rows(perm, 0);
    let q = prefix_rows(perm, 1);
    let l = perm.l();
    (0..perm.d())
        .map(|x| {
            let [u, v] = perm.occurrences(x);
            match perm.class_of(x) {
                LetterClass::Crossing => p[u].iter().zip(&q[v - l]).map(|(a, b)| a - b).collect(),
                LetterClass::Top => p[u].iter().zip(&p[v + 1]).map(|(a, b)| a + b).collect(),
                LetterClass::Bottom => q[u - l].iter().zip(&q[v - l + 1]).map(|(a, b)| -a - b).collect(),
            }
        })
        .collect()
}

/// A `tau` satisfying the strict suspension inequalities and giving positive heights, if any.
pub fn suspension_tau(perm: &GeneralizedPermutation) -> Option<Vec<Q>> {
    tau_program(perm, true)
}

fn tau_program(perm: &GeneralizedPermutation, positive_heights: bool) -> Option<Vec<Q>> {
    let d = perm.d();
    let (l, m) = (perm.l(), perm.m());
    let p = prefix_rows(perm, 0);
    let q = prefix_rows(perm, 1);
    let to_q = |r: &[i64]| r.iter().map(|&v| lp::q(v)).collect::<Vec<Q>>();
    let mut strict = Vec::new();
    for row in p.iter().take(l).skip(1) {
        strict.push(to_q(row));
    }
    for row in q.iter().take(m).skip(1) {
        strict.push(row.iter().map(|&v| lp::q(-v)).collect());
    }
    if positive_heights {
        for h in height_rows(perm) {
            strict.push(to_q(&h));
        }
    }
    let eq: Vec<Q> = p[l].iter().zip(&q[m]).map(|(a, b)| lp::q(a - b)).collect();
    lp::strictly_feasible(d, &[eq], &strict)
}

/// Whether suspension data exists for some lengths: `perm` admits balanced positive lengths and the
/// prefix conditions on `tau` are strictly feasible. Heights are not required to be positive.
pub fn suspension_exists(perm: &GeneralizedPermutation) -> bool {
    perm.admits_lengths() && tau_program(perm, false).is_some()
}

impl<S: Scalar> SuspensionData<S> {
    pub fn new(perm: GeneralizedPermutation, lambda: Vec<S>, tau: Vec<S>) -> Result<Self, SuspensionError> {
        if lambda.len() != perm.d() || tau.len() != perm.d() {
            return Err(SuspensionError::InvalidData("vector length".into()));
        }
        let data = SuspensionData { perm, lambda, tau };
        data.check()?;
        Ok(data)
    }

    /// Exact suspension data over the given lengths.
    pub fn find(perm: &GeneralizedPermutation, lambda: &LengthVector<S>) -> Result<Self, SuspensionError> {
        let lam = lambda.aligned(perm)?;
        let tau = suspension_tau(perm).ok_or(SuspensionError::NoSuspension)?;
        let tau = tau.iter().map(S::from_rational).collect();
        SuspensionData::new(perm.clone(), lam, tau)
    }

    fn check(&self) -> Result<(), SuspensionError> {
        let (l, m) = (self.perm.l(), self.perm.m());
        let top = self.prefix_im(0);
        let bot = self.prefix_im(1);
        for (j, v) in top.iter().enumerate().take(l).skip(1) {
            if !v.is_positive() {
                return Err(SuspensionError::InvalidData(format!("top prefix {j} must be positive")));
            }
        }
        for (j, v) in bot.iter().enumerate().take(m).skip(1) {
            if !v.is_negative() {
                return Err(SuspensionError::InvalidData(format!("bottom prefix {j} must be negative")));
            }
        }
        if !top[l].approx_eq(&bot[m], &top[l].abs()) {
            return Err(SuspensionError::InvalidData("imaginary row totals differ".into()));
        }
        let lt = self.row_sum(&self.lambda, 0);
        let lb = self.row_sum(&self.lambda, 1);
        if !lt.approx_eq(&lb, &lt) {
            return Err(SuspensionError::TraceError(format!("real row totals {lt} and {lb}")));
        }
        Ok(())
    }

    fn row_sum(&self, v: &[S], row: usize) -> S {
        self.perm.row(row).iter().fold(S::zero(), |a, &x| a + v[x].clone())
    }

    fn prefix_im(&self, row: usize) -> Vec<S> {
        let mut acc = S::zero();
        let mut out = vec![acc.clone()];
        for &x in self.perm.row(row) {
            acc = acc + self.tau[x].clone();
            out.push(acc.clone());
        }
        out
    }

    pub fn permutation(&self) -> &GeneralizedPermutation {
        &self.perm
    }
    pub fn lambda(&self) -> &[S] {
        &self.lambda
    }
    pub fn tau(&self) -> &[S] {
        &self.tau
    }

    pub fn heights(&self) -> Vec<S> {
        height_rows(&self.perm)
            .iter()
            .map(|r| r.iter().zip(&self.tau).fold(S::zero(), |a, (&c, t)| a + S::from_int(c) * t.clone()))
            .collect()
    }

    /// `sum lambda_alpha h_alpha`.
    pub fn area(&self) -> S {
        self.lambda.iter().zip(self.heights()).fold(S::zero(), |a, (l, h)| a + l.clone() * h)
    }

    pub fn polygon(&self) -> Polygon {
        let pts = |row: usize| {
            let (mut x, mut y) = (0.0f64, 0.0f64);
            let mut out = vec![(0.0, 0.0)];
            for &a in self.perm.row(row) {
                x += self.lambda[a].as_f64();
                y += self.tau[a].as_f64();
                out.push((x, y));
            }
            out
        };
        Polygon { top: pts(0), bottom: pts(1) }
    }

    /// Applies the steps of a Rauzy path to `(lambda, tau)`.
    pub fn induct(&self, steps: &[StepRecord], end: &GeneralizedPermutation) -> Result<Self, SuspensionError> {
        let mut lam = self.lambda.clone();
        let mut tau = self.tau.clone();
        for s in steps {
            lam[s.winner] = lam[s.winner].clone() - lam[s.loser].clone();
            tau[s.winner] = tau[s.winner].clone() - tau[s.loser].clone();
        }
        SuspensionData::new(end.clone(), lam, tau)
    }
}

impl Polygon {
    /// Boundary in cyclic order `P_0 .. P_l = Q_m, Q_{m-1} .. Q_1`.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        let mut v = self.top.clone();
        v.extend(self.bottom[1..self.bottom.len() - 1].iter().rev());
        v
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        let b = self.boundary();
        let n = b.len();
        let twice: f64 = (0..n).map(|i| b[i].0 * b[(i + 1) % n].1 - b[(i + 1) % n].0 * b[i].1).sum();
        twice.abs() / 2.0
    }

    pub fn to_svg(&self, perm: &GeneralizedPermutation) -> String {
        let b = self.boundary();
        let (mut minx, mut maxx, mut miny, mut maxy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &(x, y) in &b {
            minx = minx.min(x);
            maxx = maxx.max(x);
            miny = miny.min(y);
            maxy = maxy.max(y);
        }
        let w = (maxx - minx).max(1e-9);
        let h = (maxy - miny).max(1e-9);
        let scale = 800.0 / w.max(h);
        let tx = |x: f64| (x - minx) * scale + 20.0;
        let ty = |y: f64| (maxy - y) * scale + 20.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
            w * scale + 40.0,
            h * scale + 40.0
        );
        let pts: Vec<String> = b.iter().map(|&(x, y)| format!("{:.3},{:.3}", tx(x), ty(y))).collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="black"/>"#, pts.join(" "));
        for (row, chain) in [&self.top, &self.bottom].into_iter().enumerate() {
            for (i, &x) in perm.row(row).iter().enumerate() {
                let (a, c) = (chain[i], chain[i + 1]);
                let _ = writeln!(
                    s,
                    r#"<text x="{:.3}" y="{:.3}" font-size="14">{}</text>"#,
                    tx((a.0 + c.0) / 2.0),
                    ty((a.1 + c.1) / 2.0),
                    perm.label(x)
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,index,x,y\n");
        for (row, chain) in [&self.top, &self.bottom].into_iter().enumerate() {
            for (i, (x, y)) in chain.iter().enumerate() {
                let _ = writeln!(s, "{row},{i},{x},{y}");
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Quadratic,
    Abelian,
}

/// Orders of the singularities (sorted, decreasing) and the genus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub orders: Vec<i64>,
    pub genus: i64,
    pub flavor: Flavor,
    /// regular points carried along as marked points (abelian side only)
    #[serde(default, skip_serializing_if = "is_zero")]
    pub marked_points: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl Stratum {
    /// Checks the Gauss-Bonnet condition and non-emptiness for quadratic orders.
    pub fn quadratic(mut orders: Vec<i64>) -> Result<Self, SuspensionError> {
        orders.sort_unstable_by(|a, b| b.cmp(a));
        if orders.iter().any(|&n| n < -1) {
            return Err(SuspensionError::InvalidStratum("orders must be at least -1".into()));
        }
        let sum: i64 = orders.iter().sum();
        if (sum + 4) % 4 != 0 || sum < -4 {
            return Err(SuspensionError::InvalidStratum(format!("order sum {sum} is not 4g-4")));
        }
        let nonzero: Vec<i64> = orders.iter().copied().filter(|&n| n != 0).collect();
        if matches!(nonzero.as_slice(), [] | [1, -1] | [4] | [3, 1]) {
            return Err(SuspensionError::InvalidStratum(format!("stratum Q{nonzero:?} is empty")));
        }
        Ok(Stratum { genus: (sum + 4) / 4, orders, flavor: Flavor::Quadratic, marked_points: 0 })
    }

    pub fn abelian(mut orders: Vec<i64>, marked_points: usize) -> Result<Self, SuspensionError> {
        orders.sort_unstable_by(|a, b| b.cmp(a));
        if orders.iter().any(|&n| n < 1) {
            return Err(SuspensionError::InvalidStratum("abelian orders must be positive".into()));
        }
        let sum: i64 = orders.iter().sum();
        if sum % 2 != 0 {
            return Err(SuspensionError::InvalidStratum(format!("order sum {sum} is odd")));
        }
        Ok(Stratum { genus: (sum + 2) / 2, orders, flavor: Flavor::Abelian, marked_points })
    }

    pub fn odd_count(&self) -> usize {
        self.orders.iter().filter(|&&n| n % 2 != 0).count()
    }

    /// Dimension of the part of the cocycle carrying nonzero exponents: `2g + n - 2`.
    pub fn cocycle_rank(&self) -> usize {
        match self.flavor {
            Flavor::Quadratic => (2 * self.genus + self.odd_count() as i64 - 2).max(0) as usize,
            Flavor::Abelian => (2 * self.genus) as usize,
        }
    }

    /// Orientation double cover of a quadratic stratum.
    pub fn double_cover(&self) -> Result<Stratum, SuspensionError> {
        if self.flavor != Flavor::Quadratic {
            return Err(SuspensionError::InvalidStratum("already abelian".into()));
        }
        let q = Stratum::quadratic(self.orders.clone())?;
        let mut orders = Vec::new();
        let mut marked = 0usize;
        for &n in &q.orders {
            if n % 2 != 0 {
                if n + 1 == 0 {
                    marked += 1;
                } else {
                    orders.push(n + 1);
                }
            } else if n == 0 {
                marked += 2;
            } else {
                orders.push(n / 2);
                orders.push(n / 2);
            }
        }
        Stratum::abelian(orders, marked)
    }
}

/// Classes of polygon vertices identified by the side gluings, with their orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularityPattern {
    /// vertex ids: `0..=l` for `P_i`, `l+1..=l+m+1` for `Q_j`
    pub classes: Vec<Vec<usize>>,
    pub orders: Vec<i64>,
}

/// Purely combinatorial: which vertices are glued and how many prongs each class carries.
pub fn singularity_pattern(perm: &GeneralizedPermutation) -> SingularityPattern {
    let (l, m) = (perm.l(), perm.m());
    let p = |i: usize| i;
    let q = |j: usize| l + 1 + j;
    let n = l + m + 2;
    let mut uf = UnionFind::new(n);
    uf.union(p(0), q(0));
    uf.union(p(l), q(m));
    let side = |pos: usize| -> (usize, usize) {
        let (row, i) = perm.locate(pos);
        if row == 0 {
            (p(i), p(i + 1))
        } else {
            (q(i), q(i + 1))
        }
    };
    for x in 0..perm.d() {
        let [u, v] = perm.occurrences(x);
        let (a0, a1) = side(u);
        let (b0, b1) = side(v);
        match perm.class_of(x) {
            LetterClass::Crossing => {
                uf.union(a0, b0);
                uf.union(a1, b1);
            }
            _ => {
                uf.union(a0, b1);
                uf.union(a1, b0);
            }
        }
    }
    let interior = |v: usize| (v > p(0) && v < p(l)) || (v > q(0) && v < q(m));
    let mut roots: Vec<usize> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        match roots.iter().position(|&x| x == r) {
            Some(i) => classes[i].push(v),
            None => {
                roots.push(r);
                classes.push(vec![v]);
            }
        }
    }
    let orders = classes.iter().map(|c| c.iter().filter(|&&v| interior(v)).count() as i64 - 2).collect();
    SingularityPattern { classes, orders }
}

/// The stratum of the suspensions of `perm`.
pub fn stratum_of(perm: &GeneralizedPermutation) -> Result<Stratum, SuspensionError> {
    let pat = singularity_pattern(perm);
    if perm.is_iet_like() {
        let orders: Vec<i64> = pat.orders.iter().map(|n| n / 2).filter(|&k| k > 0).collect();
        let marked = pat.orders.iter().filter(|&&n| n == 0).count();
        return Stratum::abelian(orders, marked);
    }
    let sum: i64 = pat.orders.iter().sum();
    if (sum + 4) % 4 != 0 {
        return Err(SuspensionError::InvalidStratum(format!("order sum {sum} is not 4g-4")));
    }
    let mut orders = pat.orders;
    orders.sort_unstable_by(|a, b| b.cmp(a));
    Ok(Stratum { genus: (sum + 4) / 4, orders, flavor: Flavor::Quadratic, marked_points: 0 })
}

/// Verifies that concrete suspension data closes up, then reads off the pattern.
pub fn singularity_pattern_of<S: Scalar>(data: &SuspensionData<S>) -> Result<SingularityPattern, SuspensionError> {
    let poly = data.polygon();
    let (pl, qm) = (poly.top.last().unwrap(), poly.bottom.last().unwrap());
    let scale = pl.0.abs().max(1.0);
    if (pl.0 - qm.0).abs() > 1e-9 * scale || (pl.1 - qm.1).abs() > 1e-9 * scale {
        return Err(SuspensionError::TraceError(format!("P_l = {pl:?} but Q_m = {qm:?}")));
    }
    Ok(singularity_pattern(&data.perm))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = v;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rauzy::{rauzy_path, tests::balanced};
    use crate::{LinearInvolution, Rational};
    use num_traits::Signed;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn q22() -> GeneralizedPermutation {
        GeneralizedPermutation::validate(&["A", "B", "A", "C", "D", "C"], &["D", "E", "B", "E"]).unwrap()
    }

    /// No two non-adjacent sides meet.
    fn is_simple(b: &[(f64, f64)]) -> bool {
        let n = b.len();
        let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
        let on = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
            r.0 >= p.0.min(q.0) && r.0 <= p.0.max(q.0) && r.1 >= p.1.min(q.1) && r.1 <= p.1.max(q.1)
        };
        let meet = |a: (f64, f64), b2: (f64, f64), c: (f64, f64), d: (f64, f64)| {
            let (o1, o2, o3, o4) = (orient(a, b2, c), orient(a, b2, d), orient(c, d, a), orient(c, d, b2));
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                return true;
            }
            (o1 == 0.0 && on(a, b2, c)) || (o2 == 0.0 && on(a, b2, d)) || (o3 == 0.0 && on(c, d, a)) || (o4 == 0.0 && on(c, d, b2))
        };
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if meet(b[i], b[(i + 1) % n], b[j], b[(j + 1) % n]) {
                    return false;
                }
            }
        }
        true
    }

    /// Cone angle of each vertex class from the actual polygon corners; `None` unless the polygon is simple.
    fn angle_orders(data: &SuspensionData<Rational>) -> Option<Vec<i64>> {
        let poly = data.polygon();
        let b = poly.boundary();
        let n = b.len();
        if !is_simple(&b) {
            return None;
        }
        let (l, m) = (data.perm.l(), data.perm.m());
        // boundary index -> vertex id used by singularity_pattern
        let ids: Vec<usize> = (0..=l).chain((1..m).rev().map(|j| l + 1 + j)).collect();
        let mut angle = vec![0.0; n];
        let mut turn_sum = 0.0;
        for i in 0..n {
            let (u, v, w) = (b[(i + n - 1) % n], b[i], b[(i + 1) % n]);
            let a = (u.1 - v.1).atan2(u.0 - v.0);
            let c = (w.1 - v.1).atan2(w.0 - v.0);
            let ccw = |from: f64, to: f64| (to - from).rem_euclid(2.0 * PI);
            let arc = ccw(a, c);
            angle[i] = if i == 0 || i == l {
                // both sides leave the corner on the same side: the wedge is the smaller arc
                arc.min(2.0 * PI - arc)
            } else {
                // x-monotone chains: the interior contains straight down (top) or straight up (bottom)
                let r = if i < l { -PI / 2.0 } else { PI / 2.0 };
                if ccw(a, r) < arc { arc } else { 2.0 * PI - arc }
            };
            turn_sum += angle[i];
        }
        assert!((turn_sum - (n as f64 - 2.0) * PI).abs() < 1e-6, "{b:?} {angle:?}");
        let pat = singularity_pattern(&data.perm);
        let mut out: Vec<i64> = pat
            .classes
            .iter()
            .map(|cls| {
                let total: f64 = (0..n).filter(|&i| cls.contains(&ids[i])).map(|i| angle[i]).sum();
                (total / PI).round() as i64 - 2
            })
            .collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        Some(out)
    }

    #[test]
    fn q22_stratum() {
        let s = stratum_of(&q22()).unwrap();
        assert_eq!(s.orders, vec![2, 2]);
        assert_eq!(s.genus, 2);
        assert_eq!(s.flavor, Flavor::Quadratic);
        assert_eq!(s.cocycle_rank(), 2);
    }

    #[test]
    fn pillowcase() {
        let p = GeneralizedPermutation::validate(&["A", "A", "B"], &["B", "C", "C"]).unwrap();
        let s = stratum_of(&p).unwrap();
        assert_eq!(s.orders, vec![-1, -1, -1, -1]);
        assert_eq!(s.genus, 0);
    }

    #[test]
    fn double_covers() {
        let s = Stratum::quadratic(vec![-1, -1, -1, -1]).unwrap().double_cover().unwrap();
        assert_eq!((s.orders.clone(), s.genus, s.marked_points), (vec![], 1, 4));
        let s = Stratum::quadratic(vec![2, 2]).unwrap().double_cover().unwrap();
        assert_eq!((s.orders.clone(), s.genus), (vec![1, 1, 1, 1], 3));
        assert!(Stratum::quadratic(vec![1, 1]).is_err());
        assert!(Stratum::quadratic(vec![3, 1]).is_err());
    }

    #[test]
    fn q22_suspension() {
        let p = q22();
        let lam: Vec<Rational> = [1, 2, 2, 3, 3].iter().map(|&v| Rational::from_integer(v.into())).collect();
        let lam = LengthVector::new(&p, lam).unwrap();
        let data = SuspensionData::find(&p, &lam).unwrap();
        assert!(data.heights().iter().all(|h| h.is_positive()));
        assert_eq!(angle_orders(&data), Some(vec![2, 2]));
        let poly = data.polygon();
        assert!((poly.area() - data.area().as_f64()).abs() < 1e-9);
        assert!(poly.to_svg(&p).contains("<polygon"));
    }

    #[test]
    fn trace_error_when_rows_do_not_balance() {
        let p = q22();
        let tau = suspension_tau(&p).unwrap();
        let lam = vec![1.0, 2.0, 2.0, 3.0, 4.0];
        let tau: Vec<f64> = tau.iter().map(|t| t.as_f64()).collect();
        assert!(matches!(SuspensionData::new(p, lam, tau), Err(SuspensionError::TraceError(_))));
    }

    fn arb_perm() -> impl Strategy<Value = GeneralizedPermutation> {
        (2usize..=5, any::<u64>()).prop_filter_map("irreducible", |(d, k)| {
            let all = GeneralizedPermutation::enumerate(d);
            let p = all[(k % all.len() as u64) as usize].clone();
            (p.is_genuine() && p.is_irreducible()).then_some(p)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn angles_match_combinatorics(p in arb_perm(), seeds in prop::collection::vec(1u32..50, 6)) {
            let lam = LengthVector::new(&p, balanced(&p, &seeds).unwrap()).unwrap();
            let data = SuspensionData::find(&p, &lam).unwrap();
            if let Some(orders) = angle_orders(&data) {
                prop_assert_eq!(orders, stratum_of(&p).unwrap().orders);
            }
            let s = stratum_of(&p).unwrap();
            prop_assert_eq!(s.orders.iter().sum::<i64>(), 4 * s.genus - 4);
            prop_assert_eq!(p.d() as i64, 2 * s.genus + s.orders.len() as i64 - 2 + 1);
        }

        #[test]
        fn heights_follow_transposed_matrices(p in arb_perm(), seeds in prop::collection::vec(1u32..1000, 6), n in 1usize..8) {
            let lam = balanced(&p, &seeds).unwrap();
            let t = LinearInvolution::from_aligned(p.clone(), lam.clone()).unwrap();
            let data = SuspensionData::find(&p, &LengthVector::new(&p, lam).unwrap()).unwrap();
            if let Ok((path, _)) = rauzy_path(&t, n) {
                let next = data.induct(&path.steps, &path.end).unwrap();
                let h: Vec<Rational> = data.heights();
                let expected = path.visiting_matrix().apply(&h);
                prop_assert_eq!(next.heights(), expected);
                prop_assert_eq!(next.area(), data.area());
            }
        }
    }
}
