//! Writhe-normalized Kauffman bracket of a braid closure.
//!
//! Bracket conventions: a single loop has bracket 1, each further disjoint
//! loop multiplies by `d = -A^2 - A^-2`. For a positive letter the
//! A-smoothing keeps the strands vertical and the B-smoothing joins them by a
//! cap/cup pair; a negative letter swaps the two. The result is
//! `(-A)^{-3w} <D>` with `w` the exponent sum.

use std::collections::BTreeMap;

use super::{BraidError, BraidWord, LaurentPoly, Sign};

/// State-sum evaluation enumerates `2^len` states.
pub const MAX_STATE_SUM_CROSSINGS: usize = 24;

fn loop_value() -> LaurentPoly {
    LaurentPoly::from_terms([(2, -1), (-2, -1)])
}

fn writhe_normalize(bracket: &LaurentPoly, writhe: i64) -> LaurentPoly {
    let sign = if writhe.rem_euclid(2) == 0 { 1 } else { -1 };
    bracket.shift(-3 * writhe).scale(sign)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Full state sum over all `2^ℓ` smoothings of the closed braid diagram.
pub fn kauffman_jones(word: &BraidWord) -> Result<LaurentPoly, BraidError> {
    let len = word.len();
    if len > MAX_STATE_SUM_CROSSINGS {
        return Err(BraidError::TooManyCrossings {
            len,
            max: MAX_STATE_SUM_CROSSINGS,
        });
    }
    let s = word.strands();
    let d = loop_value();
    let d_pows: Vec<LaurentPoly> = (0..=(s + len) as u32).map(|k| d.pow(k)).collect();
    if len == 0 {
        return Ok(d_pows[s - 1].clone());
    }

    // point (level, lane); level `len` is identified with level 0
    let point = |level: usize, lane: usize| (level % len) * s + lane;
    let mut bracket = LaurentPoly::zero();
    for state in 0u32..(1u32 << len) {
        let mut uf = UnionFind::new(len * s);
        let mut components = len * s;
        let mut a_minus_b = 0i64;
        for (level, letter) in word.letters().iter().enumerate() {
            let b_smoothing = (state >> level) & 1 == 1;
            a_minus_b += if b_smoothing { -1 } else { 1 };
            let vertical = match letter.sign {
                Sign::Pos => !b_smoothing,
                Sign::Neg => b_smoothing,
            };
            let j = letter.index - 1;
            for lane in 0..s {
                if lane == j || lane == j + 1 {
                    continue;
                }
                if uf.union(point(level, lane), point(level + 1, lane)) {
                    components -= 1;
                }
            }
            let pairs = if vertical {
                [
                    (point(level, j), point(level + 1, j)),
                    (point(level, j + 1), point(level + 1, j + 1)),
                ]
            } else {
                [
                    (point(level, j), point(level, j + 1)),
                    (point(level + 1, j), point(level + 1, j + 1)),
                ]
            };
            for (a, b) in pairs {
                if uf.union(a, b) {
                    components -= 1;
                }
            }
        }
        let term = d_pows[components - 1].shift(a_minus_b);
        bracket = &bracket + &term;
    }
    Ok(writhe_normalize(&bracket, word.exponent_sum()))
}

/// Same bracket evaluated through the Temperley-Lieb representation: the
/// state is a planar matching of the `s` bottom and `s` top endpoints, so
/// the cost is linear in the word length.
pub fn kauffman_jones_transfer(word: &BraidWord) -> LaurentPoly {
    let s = word.strands();
    let d = loop_value();
    // partner[i] for i in 0..s (bottom) and s..2s (top)
    let identity: Vec<u8> = (0..2 * s).map(|i| ((i + s) % (2 * s)) as u8).collect();
    let mut states: BTreeMap<Vec<u8>, LaurentPoly> = BTreeMap::new();
    states.insert(identity, LaurentPoly::one());

    for letter in word.letters() {
        let (vertical_exp, cup_exp) = match letter.sign {
            Sign::Pos => (1, -1),
            Sign::Neg => (-1, 1),
        };
        let x = s + letter.index - 1;
        let y = x + 1;
        let mut next: BTreeMap<Vec<u8>, LaurentPoly> = BTreeMap::new();
        for (m, poly) in &states {
            let keep = poly.shift(vertical_exp);
            let slot = next.entry(m.clone()).or_default();
            *slot = &*slot + &keep;

            let mut cup = m.clone();
            let mut weight = poly.shift(cup_exp);
            let (px, py) = (m[x] as usize, m[y] as usize);
            if px == y {
                weight = &weight * &d;
            } else {
                cup[px] = py as u8;
                cup[py] = px as u8;
            }
            cup[x] = y as u8;
            cup[y] = x as u8;
            let slot = next.entry(cup).or_default();
            *slot = &*slot + &weight;
        }
        next.retain(|_, p| !p.is_zero());
        states = next;
    }

    let mut bracket = LaurentPoly::zero();
    for (m, poly) in &states {
        let loops = closure_loops(m, s);
        bracket = &bracket + &(poly * &d.pow(loops as u32 - 1));
    }
    writhe_normalize(&bracket, word.exponent_sum())
}

/// Loops formed when bottom endpoint `p` is joined to top endpoint `s + p`.
fn closure_loops(matching: &[u8], s: usize) -> usize {
    let mut uf = UnionFind::new(2 * s);
    let mut comps = 2 * s;
    for (i, &p) in matching.iter().enumerate() {
        if uf.union(i, p as usize) {
            comps -= 1;
        }
    }
    for p in 0..s {
        if uf.union(p, s + p) {
            comps -= 1;
        }
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: usize, v: &[i64]) -> BraidWord {
        BraidWord::from_signed(s, v).unwrap()
    }

    #[test]
    fn unknot_is_one() {
        assert_eq!(kauffman_jones(&w(1, &[])).unwrap(), LaurentPoly::one());
        assert_eq!(kauffman_jones(&w(2, &[1])).unwrap(), LaurentPoly::one());
        assert_eq!(kauffman_jones(&w(2, &[-1])).unwrap(), LaurentPoly::one());
    }

    #[test]
    fn unlink_of_two() {
        let d = loop_value();
        assert_eq!(kauffman_jones(&w(2, &[])).unwrap(), d);
        assert_eq!(kauffman_jones_transfer(&w(2, &[])), d);
    }

    #[test]
    fn right_trefoil() {
        // V(t) = t + t^3 - t^4 with t = A^-4
        let expect = LaurentPoly::from_terms([(-4, 1), (-12, 1), (-16, -1)]);
        assert_eq!(kauffman_jones(&w(2, &[1, 1, 1])).unwrap(), expect);
    }

    #[test]
    fn figure_eight_is_amphichiral() {
        let fig8 = kauffman_jones(&w(3, &[1, -2, 1, -2])).unwrap();
        assert_eq!(fig8, fig8.invert_variable());
        // V(t) = t^-2 - t^-1 + 1 - t + t^2
        let expect = LaurentPoly::from_terms([(8, 1), (4, -1), (0, 1), (-4, -1), (-8, 1)]);
        assert_eq!(fig8, expect);
    }

    #[test]
    fn too_many_crossings() {
        let long = w(2, &[1; 25]);
        assert!(matches!(
            kauffman_jones(&long),
            Err(BraidError::TooManyCrossings { len: 25, .. })
        ));
        // the transfer route has no such limit; s1^25 is a torus knot
        let v = kauffman_jones_transfer(&long);
        assert!(!v.is_zero());
    }

    #[test]
    fn transfer_matches_state_sum_on_corpus() {
        for (s, v) in [
            (2, vec![1, 1]),
            (2, vec![1, 1, 1]),
            (2, vec![-1, -1, -1]),
            (3, vec![1, -2, 1, -2]),
            (3, vec![1, 1, 1, 2]),
            (3, vec![1, 1, 2, 2]),
            (4, vec![1, 2, 3, -1, 2, -3, 1]),
        ] {
            let b = w(s, &v);
            assert_eq!(kauffman_jones(&b).unwrap(), kauffman_jones_transfer(&b), "{b}");
        }
    }
}
