//! Braid words, their permutations and closure invariants.
//!
//! Conventions used throughout the crate:
//!
//! * Strands and generator indices are 1-based in the public surface; letter
//!   `(j, ±)` is `σ_j^{±1}` and crosses the strands in Re-rank positions `j`
//!   and `j + 1`.
//! * Letters are read bottom to top. The earlier letter acts first, so the
//!   permutation of a concatenation `w w'` is `perm(w)` followed by `perm(w')`.

mod bracket;
mod laurent;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bracket::{kauffman_jones, kauffman_jones_transfer, MAX_STATE_SUM_CROSSINGS};
pub use laurent::LaurentPoly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BraidError {
    #[error("braid letter at position {position} is zero")]
    ZeroLetter { position: usize },
    #[error("braid letter {value} needs more than {strands} strands")]
    IndexOutOfRange { value: i64, strands: usize },
    #[error("cannot parse braid token {0:?}")]
    InvalidToken(String),
    #[error("a braid needs at least one strand")]
    ZeroStrands,
    #[error("state sum limited to {max} crossings, word has {len}")]
    TooManyCrossings { len: usize, max: usize },
    #[error("odd number of crossings between components {0} and {1}")]
    OddInterComponentCount(usize, usize),
    #[error("crossing time {0} sits at pi")]
    TimeAtPi(f64),
    #[error("{letters} letters but {times} crossing times")]
    LengthMismatch { letters: usize, times: usize },
    #[error("crossing times must be strictly increasing in [0, 2pi)")]
    UnorderedTimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn new(index: usize, sign: Sign) -> Self {
        Self { index, sign }
    }

    /// Signed integer form used by the text format.
    pub fn signed(self) -> i64 {
        self.index as i64 * self.sign.value()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BraidWordRepr", into = "BraidWordRepr")]
pub struct BraidWord {
    strands: usize,
    letters: Vec<Letter>,
}

/// Serialized form: strand count plus the signed-integer text.
#[derive(Serialize, Deserialize)]
struct BraidWordRepr {
    strands: usize,
    word: String,
}

impl TryFrom<BraidWordRepr> for BraidWord {
    type Error = BraidError;
    fn try_from(r: BraidWordRepr) -> Result<Self, BraidError> {
        parse_braid_word(&r.word, r.strands)
    }
}

impl From<BraidWord> for BraidWordRepr {
    fn from(w: BraidWord) -> Self {
        BraidWordRepr {
            strands: w.strands,
            word: w.to_text(),
        }
    }
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<Letter>) -> Result<Self, BraidError> {
        if strands == 0 {
            return Err(BraidError::ZeroStrands);
        }
        for (position, l) in letters.iter().enumerate() {
            if l.index == 0 {
                return Err(BraidError::ZeroLetter { position });
            }
            if l.index >= strands {
                return Err(BraidError::IndexOutOfRange {
                    value: l.signed(),
                    strands,
                });
            }
        }
        Ok(Self { strands, letters })
    }

    /// Builds from signed integers, e.g. `[1, -2, 1, -2]`.
    pub fn from_signed(strands: usize, values: &[i64]) -> Result<Self, BraidError> {
        let mut letters = Vec::with_capacity(values.len());
        for (position, &v) in values.iter().enumerate() {
            if v == 0 {
                return Err(BraidError::ZeroLetter { position });
            }
            let sign = if v > 0 { Sign::Pos } else { Sign::Neg };
            letters.push(Letter::new(v.unsigned_abs() as usize, sign));
        }
        Self::new(strands, letters)
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.sign.value()).sum()
    }

    /// Same word with every sign flipped.
    pub fn mirror(&self) -> Self {
        Self {
            strands: self.strands,
            letters: self
                .letters
                .iter()
                .map(|l| Letter::new(l.index, l.sign.flip()))
                .collect(),
        }
    }

    pub fn concat(&self, other: &BraidWord) -> Self {
        assert_eq!(self.strands, other.strands, "strand counts differ");
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self {
            strands: self.strands,
            letters,
        }
    }

    /// Signed-integer text form, the inverse of [`parse_braid_word`].
    pub fn to_text(&self) -> String {
        self.letters
            .iter()
            .map(|l| l.signed().to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e (s={})", self.strands);
        }
        for l in &self.letters {
            match l.sign {
                Sign::Pos => write!(f, "s{}", l.index)?,
                Sign::Neg => write!(f, "S{}", l.index)?,
            }
        }
        write!(f, " (s={})", self.strands)
    }
}

/// Parses whitespace-separated nonzero integers. The empty string is the
/// identity braid.
pub fn parse_braid_word(text: &str, strands: usize) -> Result<BraidWord, BraidError> {
    if strands == 0 {
        return Err(BraidError::ZeroStrands);
    }
    let mut letters = Vec::new();
    for (position, tok) in text.split_whitespace().enumerate() {
        let value: i64 = tok
            .parse()
            .map_err(|_| BraidError::InvalidToken(tok.to_string()))?;
        if value == 0 {
            return Err(BraidError::ZeroLetter { position });
        }
        // u64 -> usize is lossless on the platforms we care about; clamp anyway
        let index = usize::try_from(value.unsigned_abs()).unwrap_or(usize::MAX);
        if index >= strands {
            return Err(BraidError::IndexOutOfRange { value, strands });
        }
        let sign = if value > 0 { Sign::Pos } else { Sign::Neg };
        letters.push(Letter::new(index, sign));
    }
    Ok(BraidWord { strands, letters })
}

/// A permutation of `0..n`, stored 0-based. `images[p]` is where the strand
/// starting at position `p` ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Self { images })
    }

    /// Transposition of 0-based positions `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.images.swap(a, b);
        p
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, p: usize) -> usize {
        self.images[p]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&i| next.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (p, &i) in self.images.iter().enumerate() {
            inv[i] = p;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(p, &i)| p == i)
    }

    /// Cycles in canonical order: each starts at its smallest element, in
    /// increasing order of that element, and lists `p, π(p), π²(p), …`.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.images.len()];
        let mut out = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                cycle.push(p);
                p = self.images[p];
            }
            out.push(cycle);
        }
        out
    }
}

pub fn permutation(word: &BraidWord) -> Permutation {
    let n = word.strands;
    // strand_at[lane] = starting lane of the strand currently in that lane
    let mut strand_at: Vec<usize> = (0..n).collect();
    for l in &word.letters {
        strand_at.swap(l.index - 1, l.index);
    }
    let mut images = vec![0; n];
    for (lane, &strand) in strand_at.iter().enumerate() {
        images[strand] = lane;
    }
    Permutation { images }
}

/// One closure component: its starting lanes (0-based) in orbit order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub lanes: Vec<usize>,
}

impl Component {
    pub fn strand_count(&self) -> usize {
        self.lanes.len()
    }
}

pub fn components(word: &BraidWord) -> Vec<Component> {
    permutation(word)
        .cycles()
        .into_iter()
        .map(|lanes| Component { lanes })
        .collect()
}

/// Component index for every starting lane.
pub(crate) fn component_of_lane(comps: &[Component], strands: usize) -> Vec<usize> {
    let mut of = vec![0; strands];
    for (c, comp) in comps.iter().enumerate() {
        for &lane in &comp.lanes {
            of[lane] = c;
        }
    }
    of
}

/// Symmetric linking matrix indexed by the components of [`components`].
/// Diagonal entries are zero.
pub fn linking_matrix(word: &BraidWord) -> Result<Vec<Vec<i64>>, BraidError> {
    let comps = components(word);
    let of = component_of_lane(&comps, word.strands);
    let n = comps.len();
    let mut twice = vec![vec![0i64; n]; n];
    let mut strand_at: Vec<usize> = (0..word.strands).collect();
    for l in &word.letters {
        let a = of[strand_at[l.index - 1]];
        let b = of[strand_at[l.index]];
        if a != b {
            twice[a][b] += l.sign.value();
            twice[b][a] += l.sign.value();
        }
        strand_at.swap(l.index - 1, l.index);
    }
    let mut lk = vec![vec![0i64; n]; n];
    for a in 0..n {
        for b in 0..n {
            if twice[a][b] % 2 != 0 {
                return Err(BraidError::OddInterComponentCount(a, b));
            }
            lk[a][b] = twice[a][b] / 2;
        }
    }
    Ok(lk)
}

/// Adds a strand and appends `σ_s`; the closure is unchanged.
pub fn markov_stabilize(word: &BraidWord) -> BraidWord {
    let mut letters = word.letters.clone();
    letters.push(Letter::new(word.strands, Sign::Pos));
    BraidWord {
        strands: word.strands + 1,
        letters,
    }
}

/// A braid diagram with the crossing signs forgotten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularBraidWord {
    pub strands: usize,
    pub letters: Vec<usize>,
    pub crossing_times: Vec<f64>,
}

impl SingularBraidWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Attaches signs, producing a classical braid word.
    pub fn with_signs(&self, signs: &[Sign]) -> BraidWord {
        assert_eq!(signs.len(), self.letters.len());
        BraidWord {
            strands: self.strands,
            letters: self
                .letters
                .iter()
                .zip(signs)
                .map(|(&j, &s)| Letter::new(j, s))
                .collect(),
        }
    }
}

const PI_GUARD: f64 = 1e-12;

pub fn project_to_singular(
    word: &BraidWord,
    crossing_times: &[f64],
) -> Result<SingularBraidWord, BraidError> {
    if word.len() != crossing_times.len() {
        return Err(BraidError::LengthMismatch {
            letters: word.len(),
            times: crossing_times.len(),
        });
    }
    for w in crossing_times.windows(2) {
        if w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less) {
            return Err(BraidError::UnorderedTimes);
        }
    }
    for &t in crossing_times {
        if !(0.0..2.0 * PI).contains(&t) {
            return Err(BraidError::UnorderedTimes);
        }
        if (t - PI).abs() < PI_GUARD {
            return Err(BraidError::TimeAtPi(t));
        }
    }
    Ok(SingularBraidWord {
        strands: word.strands,
        letters: word.letters.iter().map(|l| l.index).collect(),
        crossing_times: crossing_times.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkInvariants {
    pub component_count: usize,
    /// Sorted strand counts of the components.
    pub cycle_type: Vec<usize>,
    pub linking_matrix: Vec<Vec<i64>>,
    pub exponent_sum: i64,
    pub jones: LaurentPoly,
}

impl LinkInvariants {
    /// Equality of the closure invariants; the exponent sum is a property of
    /// the word, not the link, and is ignored.
    pub fn same_link(&self, other: &LinkInvariants) -> bool {
        self.component_count == other.component_count
            && self.cycle_type == other.cycle_type
            && self.jones == other.jones
            && same_linking_up_to_relabeling(&self.linking_matrix, &other.linking_matrix)
    }
}

/// Linking matrices of the same link may list components in different
/// orders; compare up to simultaneous row/column permutation.
fn same_linking_up_to_relabeling(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    if n > 8 {
        // sorted multiset of entries is a necessary condition; exact search is
        // too costly
        let mut x: Vec<i64> = a.iter().flatten().copied().collect();
        let mut y: Vec<i64> = b.iter().flatten().copied().collect();
        x.sort_unstable();
        y.sort_unstable();
        return x == y;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    fn search(k: usize, perm: &mut Vec<usize>, a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
        let n = perm.len();
        if k == n {
            return (0..n).all(|i| (0..n).all(|j| a[i][j] == b[perm[i]][perm[j]]));
        }
        for i in k..n {
            perm.swap(k, i);
            let ok = (0..=k).all(|x| a[x][k] == b[perm[x]][perm[k]]);
            if ok && search(k + 1, perm, a, b) {
                return true;
            }
            perm.swap(k, i);
        }
        false
    }
    search(0, &mut perm, a, b)
}

/// Bundles the closure invariants. Words longer than the state-sum limit use
/// the Temperley-Lieb transfer evaluation of the same bracket.
pub fn invariants(word: &BraidWord) -> Result<LinkInvariants, BraidError> {
    let comps = components(word);
    let mut cycle_type: Vec<usize> = comps.iter().map(Component::strand_count).collect();
    cycle_type.sort_unstable();
    let jones = if word.len() <= MAX_STATE_SUM_CROSSINGS {
        kauffman_jones(word)?
    } else {
        kauffman_jones_transfer(word)
    };
    Ok(LinkInvariants {
        component_count: comps.len(),
        cycle_type,
        linking_matrix: linking_matrix(word)?,
        exponent_sum: word.exponent_sum(),
        jones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: usize, v: &[i64]) -> BraidWord {
        BraidWord::from_signed(s, v).unwrap()
    }

    #[test]
    fn parse_examples() {
        let b = parse_braid_word("1 1 1", 2).unwrap();
        assert_eq!(b.letters(), &[Letter::new(1, Sign::Pos); 3]);
        let b = parse_braid_word("1 -2 1 -2", 3).unwrap();
        assert_eq!(
            b.letters(),
            &[
                Letter::new(1, Sign::Pos),
                Letter::new(2, Sign::Neg),
                Letter::new(1, Sign::Pos),
                Letter::new(2, Sign::Neg)
            ]
        );
        assert!(matches!(
            parse_braid_word("3", 2),
            Err(BraidError::IndexOutOfRange { value: 3, strands: 2 })
        ));
        assert!(matches!(
            parse_braid_word("1 0", 2),
            Err(BraidError::ZeroLetter { position: 1 })
        ));
        assert!(parse_braid_word("  ", 4).unwrap().is_empty());
        assert!(matches!(
            parse_braid_word("1 x", 3),
            Err(BraidError::InvalidToken(_))
        ));
        assert!(matches!(
            parse_braid_word("-9223372036854775808", 3),
            Err(BraidError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn permutation_examples() {
        assert_eq!(
            permutation(&w(2, &[1, 1, 1])),
            Permutation::transposition(2, 0, 1)
        );
        assert!(permutation(&w(2, &[1, 1])).is_identity());
        // s1 S2 s1 S2: (0 1) then (1 2) then (0 1) then (1 2)
        let p = permutation(&w(3, &[1, -2, 1, -2]));
        assert_eq!(p.cycles().len(), 1);
        assert_eq!(p.images(), &[1, 2, 0]);
    }

    #[test]
    fn components_examples() {
        let c = components(&w(2, &[1, 1, 1]));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].strand_count(), 2);
        let c = components(&w(2, &[1, 1]));
        assert_eq!(c.iter().map(|c| c.strand_count()).collect::<Vec<_>>(), [1, 1]);
        assert_eq!(components(&w(3, &[])).len(), 3);
    }

    #[test]
    fn linking_examples() {
        assert_eq!(linking_matrix(&w(2, &[1, 1])).unwrap(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(
            linking_matrix(&w(2, &[-1, -1])).unwrap(),
            vec![vec![0, -1], vec![-1, 0]]
        );
        assert_eq!(linking_matrix(&w(2, &[1, 1, 1])).unwrap(), vec![vec![0]]);
    }

    #[test]
    fn singular_projection() {
        let b = w(2, &[1, 1]);
        let sb = project_to_singular(&b, &[PI / 3.0, 2.0 * PI / 3.0]).unwrap();
        assert_eq!(sb.letters, vec![1, 1]);
        assert_eq!(sb.crossing_times, vec![PI / 3.0, 2.0 * PI / 3.0]);
        let sb = project_to_singular(&w(3, &[1, -2]), &[1.0, 2.0]).unwrap();
        assert_eq!(sb.letters, vec![1, 2]);
        assert!(matches!(
            project_to_singular(&b, &[PI / 2.0, PI]),
            Err(BraidError::TimeAtPi(_))
        ));
        assert!(matches!(
            project_to_singular(&b, &[1.0]),
            Err(BraidError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn stabilization_examples() {
        let e = w(1, &[]);
        assert_eq!(markov_stabilize(&e), w(2, &[1]));
        assert_eq!(markov_stabilize(&w(2, &[1])), w(3, &[1, 2]));
        assert_eq!(markov_stabilize(&w(2, &[1, 1, 1])), w(3, &[1, 1, 1, 2]));
    }

    #[test]
    fn invariants_examples() {
        let hopf = invariants(&w(2, &[1, 1])).unwrap();
        assert_eq!(hopf.component_count, 2);
        assert_eq!(hopf.linking_matrix[0][1], 1);
        // positive Hopf link: -A^-2 - A^-10
        assert_eq!(hopf.jones, LaurentPoly::from_terms([(-2, -1), (-10, -1)]));
        let tre = invariants(&w(2, &[1, 1, 1])).unwrap();
        assert_eq!(tre.component_count, 1);
        assert_eq!(tre.exponent_sum, 3);
        let triv = invariants(&w(2, &[])).unwrap();
        assert_eq!(triv.component_count, 2);
        assert_eq!(triv.linking_matrix[0][1], 0);
    }

    #[test]
    fn linking_relabeling() {
        let a = vec![vec![0, 1, 0], vec![1, 0, 2], vec![0, 2, 0]];
        let b = vec![vec![0, 2, 1], vec![2, 0, 0], vec![1, 0, 0]];
        assert!(same_linking_up_to_relabeling(&a, &b));
        let c = vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]];
        assert!(!same_linking_up_to_relabeling(&a, &c));
    }
}
