//! Generalized permutations: two rows of labels, every label used exactly twice.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, Q};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenPermError {
    #[error("row {0} is empty")]
    EmptyRow(usize),
    #[error("label {label:?} occurs {count} times (expected exactly 2)")]
    LetterCount { label: String, count: usize },
    #[error("alphabet does not match the labels in the rows")]
    AlphabetMismatch,
    #[error("cannot parse permutation: {0}")]
    Parse(String),
}

/// Where the two occurrences of a letter sit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LetterClass {
    /// both on the top row (`a0`)
    Top,
    /// both on the bottom row (`a1`)
    Bottom,
    /// one occurrence in each row (`a01`)
    Crossing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterClasses {
    pub a0: Vec<String>,
    pub a1: Vec<String>,
    pub a01: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct GeneralizedPermutation {
    alphabet: Vec<String>,
    top: Vec<usize>,
    bottom: Vec<usize>,
    // position -> position of the other occurrence; positions 0..l are top, l..l+m bottom
    partner: Vec<usize>,
    occurrences: Vec<[usize; 2]>,
    classes: Vec<LetterClass>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PermRows {
    top: Vec<String>,
    bottom: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
}

impl Serialize for GeneralizedPermutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PermRows { top: self.top_labels(), bottom: self.bottom_labels(), alphabet: Some(self.alphabet.clone()) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneralizedPermutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = PermRows::deserialize(d)?;
        let perm = match rows.alphabet {
            Some(alpha) => Self::with_alphabet(&alpha, &rows.top, &rows.bottom),
            None => Self::validate(&rows.top, &rows.bottom),
        };
        perm.map_err(serde::de::Error::custom)
    }
}

impl PartialEq for GeneralizedPermutation {
    fn eq(&self, other: &Self) -> bool {
        self.top.len() == other.top.len()
            && self.bottom.len() == other.bottom.len()
            && self
                .top
                .iter()
                .chain(&self.bottom)
                .zip(other.top.iter().chain(&other.bottom))
                .all(|(&a, &b)| self.alphabet[a] == other.alphabet[b])
    }
}

impl Eq for GeneralizedPermutation {}

impl Hash for GeneralizedPermutation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.top.len().hash(state);
        for &x in self.top.iter().chain(&self.bottom) {
            self.alphabet[x].hash(state);
        }
    }
}

impl fmt::Display for GeneralizedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.top_labels().join(" "), self.bottom_labels().join(" "))
    }
}

impl GeneralizedPermutation {
    /// Checks the rows and builds the permutation; the alphabet is ordered by first appearance.
    pub fn validate<S: AsRef<str>>(top: &[S], bottom: &[S]) -> Result<Self, GenPermError> {
        let mut alphabet: Vec<String> = Vec::new();
        for s in top.iter().chain(bottom) {
            if !alphabet.iter().any(|a| a == s.as_ref()) {
                alphabet.push(s.as_ref().to_string());
            }
        }
        Self::with_alphabet(&alphabet, top, bottom)
    }

    /// Like [`validate`](Self::validate) but with an explicit letter order.
    pub fn with_alphabet<A: AsRef<str>, S: AsRef<str>>(
        alphabet: &[A],
        top: &[S],
        bottom: &[S],
    ) -> Result<Self, GenPermError> {
        if top.is_empty() {
            return Err(GenPermError::EmptyRow(0));
        }
        if bottom.is_empty() {
            return Err(GenPermError::EmptyRow(1));
        }
        let alphabet: Vec<String> = alphabet.iter().map(|a| a.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> = alphabet.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        if index.len() != alphabet.len() {
            return Err(GenPermError::AlphabetMismatch);
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for s in top.iter().chain(bottom) {
            *counts.entry(s.as_ref()).or_default() += 1;
        }
        for s in top.iter().chain(bottom) {
            let c = counts[s.as_ref()];
            if c != 2 {
                return Err(GenPermError::LetterCount { label: s.as_ref().to_string(), count: c });
            }
        }
        if counts.len() != alphabet.len() || counts.keys().any(|k| !index.contains_key(k)) {
            return Err(GenPermError::AlphabetMismatch);
        }
        let t = top.iter().map(|s| index[s.as_ref()]).collect();
        let b = bottom.iter().map(|s| index[s.as_ref()]).collect();
        Ok(Self::from_indices(alphabet, t, b))
    }

    /// Builds from letter indices; the caller guarantees every index occurs twice.
    pub(crate) fn from_indices(alphabet: Vec<String>, top: Vec<usize>, bottom: Vec<usize>) -> Self {
        let d = alphabet.len();
        let l = top.len();
        let mut occ = vec![[usize::MAX; 2]; d];
        for (pos, &x) in top.iter().chain(&bottom).enumerate() {
            if occ[x][0] == usize::MAX {
                occ[x][0] = pos;
            } else {
                occ[x][1] = pos;
            }
        }
        let mut partner = vec![0; top.len() + bottom.len()];
        let mut classes = Vec::with_capacity(d);
        for o in &occ {
            debug_assert!(o[1] != usize::MAX, "letter used once");
            partner[o[0]] = o[1];
            partner[o[1]] = o[0];
            classes.push(match (o[0] < l, o[1] < l) {
                (true, true) => LetterClass::Top,
                (false, false) => LetterClass::Bottom,
                _ => LetterClass::Crossing,
            });
        }
        GeneralizedPermutation { alphabet, top, bottom, partner, occurrences: occ, classes }
    }

    /// Accepts `top / bottom`, two non-comment lines, or JSON `{"top": [...], "bottom": [...]}`.
    pub fn parse(text: &str) -> Result<Self, GenPermError> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed).map_err(|e| GenPermError::Parse(e.to_string()));
        }
        let lines: Vec<&str> = if trimmed.contains('/') {
            trimmed.splitn(2, '/').collect()
        } else {
            trimmed.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect()
        };
        if lines.len() != 2 {
            return Err(GenPermError::Parse(format!("expected two rows, found {}", lines.len())));
        }
        let top: Vec<&str> = lines[0].split_whitespace().collect();
        let bottom: Vec<&str> = lines[1].split_whitespace().collect();
        Self::validate(&top, &bottom)
    }

    pub fn d(&self) -> usize {
        self.alphabet.len()
    }
    pub fn l(&self) -> usize {
        self.top.len()
    }
    pub fn m(&self) -> usize {
        self.bottom.len()
    }
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }
    pub fn label(&self, letter: usize) -> &str {
        &self.alphabet[letter]
    }
    pub fn letter_index(&self, label: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == label)
    }
    pub fn top(&self) -> &[usize] {
        &self.top
    }
    pub fn bottom(&self) -> &[usize] {
        &self.bottom
    }
    pub fn row(&self, r: usize) -> &[usize] {
        if r == 0 {
            &self.top
        } else {
            &self.bottom
        }
    }
    pub fn top_labels(&self) -> Vec<String> {
        self.top.iter().map(|&x| self.alphabet[x].clone()).collect()
    }
    pub fn bottom_labels(&self) -> Vec<String> {
        self.bottom.iter().map(|&x| self.alphabet[x].clone()).collect()
    }

    /// Letter at a global position (`0..l` top, `l..l+m` bottom).
    pub fn letter_at(&self, pos: usize) -> usize {
        if pos < self.l() {
            self.top[pos]
        } else {
            self.bottom[pos - self.l()]
        }
    }
    /// Row (0 top, 1 bottom) and index within the row of a global position.
    pub fn locate(&self, pos: usize) -> (usize, usize) {
        if pos < self.l() {
            (0, pos)
        } else {
            (1, pos - self.l())
        }
    }
    pub fn position(&self, row: usize, idx: usize) -> usize {
        if row == 0 {
            idx
        } else {
            self.l() + idx
        }
    }
    /// Position of the other occurrence of the letter at `pos`.
    pub fn partner(&self, pos: usize) -> usize {
        self.partner[pos]
    }
    pub fn occurrences(&self, letter: usize) -> [usize; 2] {
        self.occurrences[letter]
    }
    pub fn class_of(&self, letter: usize) -> LetterClass {
        self.classes[letter]
    }

    pub fn classes(&self) -> LetterClasses {
        let pick = |c: LetterClass| {
            (0..self.d()).filter(|&x| self.classes[x] == c).map(|x| self.alphabet[x].clone()).collect()
        };
        LetterClasses { a0: pick(LetterClass::Top), a1: pick(LetterClass::Bottom), a01: pick(LetterClass::Crossing) }
    }

    fn count_class(&self, c: LetterClass) -> usize {
        self.classes.iter().filter(|&&x| x == c).count()
    }

    /// Both `a0` and `a1` non-empty: the input describes a genuine linear involution.
    pub fn is_genuine(&self) -> bool {
        self.count_class(LetterClass::Top) > 0 && self.count_class(LetterClass::Bottom) > 0
    }

    /// No letter stays in one row: the permutation encodes an interval exchange.
    pub fn is_iet_like(&self) -> bool {
        self.count_class(LetterClass::Top) == 0 && self.count_class(LetterClass::Bottom) == 0
    }

    /// Some positive length vector satisfies the row-sum condition.
    pub fn admits_lengths(&self) -> bool {
        self.is_genuine() || self.is_iet_like()
    }

    /// Non-fatal diagnostics about the input.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.is_iet_like() {
            w.push("no letter repeats within a row: this is an interval exchange".to_string());
        } else if !self.is_genuine() {
            w.push("only one of a0/a1 is non-empty: no positive length vector balances the rows".to_string());
        }
        w
    }

    /// Coefficients `c` such that the row-sum condition reads `c . lambda = 0`.
    pub fn balance_row(&self) -> Vec<i64> {
        (0..self.d())
            .map(|x| match self.classes[x] {
                LetterClass::Top => 2,
                LetterClass::Bottom => -2,
                LetterClass::Crossing => 0,
            })
            .collect()
    }

    /// Same letters, relabelled `A, B, C, ...` by first appearance.
    pub fn canonical(&self) -> GeneralizedPermutation {
        let mut order = vec![usize::MAX; self.d()];
        let mut next = 0;
        for &x in self.top.iter().chain(&self.bottom) {
            if order[x] == usize::MAX {
                order[x] = next;
                next += 1;
            }
        }
        let alphabet = (0..self.d()).map(default_label).collect();
        Self::from_indices(
            alphabet,
            self.top.iter().map(|&x| order[x]).collect(),
            self.bottom.iter().map(|&x| order[x]).collect(),
        )
    }

    /// Every generalized permutation on `d` letters up to relabelling (letters named by first appearance).
    pub fn enumerate(d: usize) -> Vec<GeneralizedPermutation> {
        let mut words = Vec::new();
        let mut w = Vec::with_capacity(2 * d);
        let mut counts = vec![0u8; d];
        canonical_words(d, &mut w, &mut counts, 0, &mut words);
        let alphabet: Vec<String> = (0..d).map(default_label).collect();
        let mut out = Vec::new();
        for w in words {
            for l in 1..2 * d {
                out.push(Self::from_indices(alphabet.clone(), w[..l].to_vec(), w[l..].to_vec()));
            }
        }
        out
    }

    /// All corner decompositions, enumerated by block lengths.
    pub fn corner_decompositions(&self) -> Vec<CornerDecomposition> {
        let (l, m) = (self.l(), self.m());
        let mut out = Vec::new();
        for tl in 0..=l {
            for tr in 0..=l - tl {
                for bl in 0..=m {
                    for br in 0..=m - bl {
                        let c = CornerDecomposition { top_left: tl, top_right: tr, bottom_left: bl, bottom_right: br };
                        if c.is_valid(self) {
                            out.push(c);
                        }
                    }
                }
            }
        }
        out
    }

    /// A decomposition certifying reducibility, if any.
    pub fn reducibility_witness(&self) -> Option<CornerDecomposition> {
        let iet = self.is_iet_like();
        self.corner_decompositions().into_iter().find(|c| {
            if iet && (c.top_middle(self) == 0 || c.bottom_middle(self) == 0) {
                return false;
            }
            c.reducible_shape().is_some()
        })
    }

    pub fn is_irreducible(&self) -> bool {
        self.reducibility_witness().is_none()
    }

    /// Length-independent obstruction to admissibility, if any.
    pub fn case_one_witness(&self) -> Option<CaseOne> {
        let (l, m) = (self.l(), self.m());
        let row_set = |row: &[usize]| {
            let mut s: Vec<usize> = row.to_vec();
            s.sort_unstable();
            s
        };
        for k in 1..l.min(m) {
            let (a, b) = (row_set(&self.top[..k]), row_set(&self.bottom[..k]));
            if a == b && a.windows(2).all(|w| w[0] != w[1]) {
                return Some(CaseOne::Prefix { letters: self.labels_of(&a) });
            }
            let (a, b) = (row_set(&self.top[l - k..]), row_set(&self.bottom[m - k..]));
            if a == b && a.windows(2).all(|w| w[0] != w[1]) {
                return Some(CaseOne::Suffix { letters: self.labels_of(&a) });
            }
        }
        self.corner_decompositions()
            .into_iter()
            .find(|c| c.top_middle(self) == 0 && c.bottom_middle(self) == 0)
            .map(|c| CaseOne::Split { decomposition: c })
    }

    /// Length-dependent obstructions: decompositions `(A+B | * | B+D ; A+C | b * b | D+C)`.
    pub fn case_two_decompositions(&self) -> Vec<CaseTwo> {
        let m = self.m();
        self.corner_decompositions()
            .into_iter()
            .filter_map(|c| {
                let sets = c.sets(self);
                if sets[1].is_empty() || c.bottom_middle(self) < 2 {
                    return None;
                }
                let first = self.bottom[c.bottom_left];
                let last = self.bottom[m - c.bottom_right - 1];
                (first == last).then_some(CaseTwo { decomposition: c, beta: first })
            })
            .collect()
    }

    /// Admissibility of a concrete length vector; `Err` carries the obstruction.
    pub fn admissibility<S: Scalar>(&self, lambda: &[S]) -> Result<(), Obstruction> {
        if let Some(w) = self.case_one_witness() {
            return Err(Obstruction::CaseOne(w));
        }
        for c in self.case_two_decompositions() {
            let (lhs, rhs) = c.sides(self, lambda);
            if lhs <= rhs {
                return Err(Obstruction::CaseTwo(c));
            }
        }
        Ok(())
    }

    /// Some positive, balanced, admissible length vector exists.
    pub fn is_dynamically_irreducible(&self) -> bool {
        self.admissible_lengths().is_some()
    }

    /// An exact positive balanced admissible length vector, if any exists.
    pub fn admissible_lengths(&self) -> Option<Vec<BigRational>> {
        if !self.admits_lengths() || self.case_one_witness().is_some() {
            return None;
        }
        let d = self.d();
        let balance: Vec<Q> = self.balance_row().into_iter().map(lp::q).collect();
        let mut strict: Vec<Vec<Q>> = (0..d).map(|i| unit(d, i)).collect();
        for c in self.case_two_decompositions() {
            let mut row = vec![lp::q(0); d];
            let sets = c.decomposition.sets(self);
            for &x in &sets[0] {
                row[x] += lp::q(1);
            }
            for &x in sets[1].iter().chain(&sets[2]) {
                row[x] -= lp::q(1);
            }
            row[c.beta] -= lp::q(1);
            strict.push(row);
        }
        lp::strictly_feasible(d, &[balance], &strict)
    }

    fn labels_of(&self, letters: &[usize]) -> Vec<String> {
        letters.iter().map(|&x| self.alphabet[x].clone()).collect()
    }
}

fn unit(d: usize, i: usize) -> Vec<Q> {
    let mut v = vec![lp::q(0); d];
    v[i] = lp::q(1);
    v
}

pub(crate) fn default_label(i: usize) -> String {
    const ABC: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if i < ABC.len() {
        (ABC[i] as char).to_string()
    } else {
        format!("L{i}")
    }
}

fn canonical_words(d: usize, w: &mut Vec<usize>, counts: &mut [u8], next: usize, out: &mut Vec<Vec<usize>>) {
    if w.len() == 2 * d {
        out.push(w.clone());
        return;
    }
    for a in 0..next {
        if counts[a] == 1 {
            counts[a] = 2;
            w.push(a);
            canonical_words(d, w, counts, next, out);
            w.pop();
            counts[a] = 1;
        }
    }
    if next < d {
        counts[next] = 1;
        w.push(next);
        canonical_words(d, w, counts, next + 1, out);
        w.pop();
        counts[next] = 0;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    TopLeft,
    TopMiddle,
    TopRight,
    BottomLeft,
    BottomMiddle,
    BottomRight,
}

/// Top row `(A+B) * (B+D)`, bottom row `(A+C) * (D+C)`, given by corner block lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerDecomposition {
    pub top_left: usize,
    pub top_right: usize,
    pub bottom_left: usize,
    pub bottom_right: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducibleShape {
    NoEmptyCorner,
    OneEmptyLeftCorner,
    EmptyLeftCorners,
    EmptyRightCorners,
}

impl CornerDecomposition {
    pub fn region(&self, p: &GeneralizedPermutation, pos: usize) -> Region {
        let (row, i) = p.locate(pos);
        if row == 0 {
            if i < self.top_left {
                Region::TopLeft
            } else if i >= p.l() - self.top_right {
                Region::TopRight
            } else {
                Region::TopMiddle
            }
        } else if i < self.bottom_left {
            Region::BottomLeft
        } else if i >= p.m() - self.bottom_right {
            Region::BottomRight
        } else {
            Region::BottomMiddle
        }
    }

    pub fn top_middle(&self, p: &GeneralizedPermutation) -> usize {
        p.l() - self.top_left - self.top_right
    }

    pub fn bottom_middle(&self, p: &GeneralizedPermutation) -> usize {
        p.m() - self.bottom_left - self.bottom_right
    }

    /// Letter sets `[A, B, C, D]`, or `None` if some letter breaks the pattern.
    fn classify(&self, p: &GeneralizedPermutation) -> Option<[Vec<usize>; 4]> {
        use Region::*;
        let mut sets: [Vec<usize>; 4] = Default::default();
        for x in 0..p.d() {
            let [u, v] = p.occurrences(x);
            let (r, s) = (self.region(p, u), self.region(p, v));
            let mid = |z: Region| matches!(z, TopMiddle | BottomMiddle);
            if mid(r) && mid(s) {
                continue;
            }
            let slot = match (r, s) {
                (TopLeft, BottomLeft) | (BottomLeft, TopLeft) => 0,
                (TopLeft, TopRight) | (TopRight, TopLeft) => 1,
                (BottomLeft, BottomRight) | (BottomRight, BottomLeft) => 2,
                (TopRight, BottomRight) | (BottomRight, TopRight) => 3,
                _ => return None,
            };
            sets[slot].push(x);
        }
        Some(sets)
    }

    pub fn is_valid(&self, p: &GeneralizedPermutation) -> bool {
        self.classify(p).is_some()
    }

    /// `[A, B, C, D]` as letter indices; panics on an invalid decomposition.
    pub fn sets(&self, p: &GeneralizedPermutation) -> [Vec<usize>; 4] {
        self.classify(p).expect("invalid corner decomposition")
    }

    pub fn labelled_sets(&self, p: &GeneralizedPermutation) -> [Vec<String>; 4] {
        self.sets(p).map(|s| s.iter().map(|&x| p.label(x).to_string()).collect())
    }

    pub fn reducible_shape(&self) -> Option<ReducibleShape> {
        let empty = [self.top_left == 0, self.top_right == 0, self.bottom_left == 0, self.bottom_right == 0];
        match empty {
            [false, false, false, false] => Some(ReducibleShape::NoEmptyCorner),
            [true, false, false, false] | [false, false, true, false] => Some(ReducibleShape::OneEmptyLeftCorner),
            [true, false, true, false] => Some(ReducibleShape::EmptyLeftCorners),
            [false, true, false, true] => Some(ReducibleShape::EmptyRightCorners),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseOne {
    Prefix { letters: Vec<String> },
    Suffix { letters: Vec<String> },
    Split { decomposition: CornerDecomposition },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTwo {
    pub decomposition: CornerDecomposition,
    /// letter occupying both ends of the bottom middle block
    pub beta: usize,
}

impl CaseTwo {
    /// `(sum A, sum B + lambda_beta + sum C)`; lengths fail admissibility when the first is not larger.
    pub fn sides<S: Scalar>(&self, p: &GeneralizedPermutation, lambda: &[S]) -> (S, S) {
        let [a, b, c, _] = self.decomposition.sets(p);
        let sum = |xs: &[usize]| xs.iter().fold(S::zero(), |acc, &x| acc + lambda[x].clone());
        (sum(&a), sum(&b) + lambda[self.beta].clone() + sum(&c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstruction {
    CaseOne(CaseOne),
    CaseTwo(CaseTwo),
}

/// Letters grouped by class, as label sets.
pub fn class_sets(p: &GeneralizedPermutation) -> [BTreeSet<String>; 3] {
    let c = p.classes();
    [c.a0.into_iter().collect(), c.a1.into_iter().collect(), c.a01.into_iter().collect()]
}
