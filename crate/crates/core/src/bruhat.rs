//! Strong Bruhat order on `S_n`, lower intervals and their rank generating
//! functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::poly::IntPolynomial;

/// Intervals are built by filtering all of `S_n`, so `n` is capped here.
pub const MAX_INTERVAL_N: usize = 8;

/// `u <= w` iff every sorted prefix of `u` is entrywise at most the sorted
/// prefix of `w` of the same length.
pub fn bruhat_leq(u: &Permutation, w: &Permutation) -> Result<bool> {
    if u.len() != w.len() {
        return Err(Error::SizeMismatch {
            left: u.len(),
            right: w.len(),
        });
    }
    Ok(leq_unchecked(u.word(), w.word()))
}

fn leq_unchecked(u: &[u8], w: &[u8]) -> bool {
    let n = u.len();
    // above[k] = #{prefix entries of w >= k} - #{prefix entries of u >= k}
    let mut above = [0i32; 257];
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (u[i] as usize, w[i] as usize);
        if a > b {
            for k in b + 1..=a {
                above[k] -= 1;
                if above[k] < 0 {
                    return false;
                }
            }
        } else {
            for k in a + 1..=b {
                above[k] += 1;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruhatInterval {
    pub top: Permutation,
    /// `members[k]` lists the elements of length `k` in lexicographic order.
    pub members: Vec<Vec<Permutation>>,
}

impl BruhatInterval {
    pub fn len(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Permutation> {
        self.members.iter().flatten()
    }

    pub fn rank_generating_function(&self) -> IntPolynomial {
        IntPolynomial::new(self.members.iter().map(|m| m.len() as i64).collect())
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_INTERVAL_N {
        Err(Error::SizeBound {
            n,
            max: MAX_INTERVAL_N,
        })
    } else {
        Ok(())
    }
}

/// The lower interval `[id, w]`.
pub fn interval(w: &Permutation) -> Result<BruhatInterval> {
    check_size(w.len())?;
    let mut members = vec![Vec::new(); w.length() + 1];
    for u in Permutation::all(w.len()) {
        if leq_unchecked(u.word(), w.word()) {
            members[u.length()].push(u);
        }
    }
    Ok(BruhatInterval {
        top: w.clone(),
        members,
    })
}

/// `P_w(t) = sum over u <= w of t^{l(u)}`.
pub fn poincare(w: &Permutation) -> Result<IntPolynomial> {
    check_size(w.len())?;
    let mut coeffs = vec![0i64; w.length() + 1];
    for u in Permutation::all(w.len()) {
        if leq_unchecked(u.word(), w.word()) {
            coeffs[u.length()] += 1;
        }
    }
    Ok(IntPolynomial::new(coeffs))
}

pub fn interval_size(w: &Permutation) -> Result<u128> {
    Ok(poincare(w)?.sum_coeffs() as u128)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecursionReport {
    pub w: Permutation,
    pub checks: Vec<IdentityCheck>,
}

impl RecursionReport {
    pub fn all_hold(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.holds)
    }
}

fn gap(w: &Permutation, u: &Permutation) -> usize {
    w.length() - u.length()
}

/// Checks the light (two-term) and heavy (four-term and simplified) identities
/// for every kind of reduction pair the first descent of a Gasharov-Reiner
/// `w` forms.
pub fn verify_poincare_recursions(w: &Permutation) -> Result<RecursionReport> {
    if !w.is_gasharov_reiner() {
        return Err(Error::NotApplicable(format!("{w} is not Gasharov-Reiner")));
    }
    let i = w
        .first_descent()
        .ok_or_else(|| Error::NotApplicable("identity has no descent".into()))?;
    let light = w.is_light_at(i);
    let heavy = w.heavy_witness_at(i).is_some();
    if !light && !heavy {
        return Err(Error::NotApplicable(format!("first descent of {w} is not a reduction pair")));
    }
    let pw = poincare(w)?;
    let siw = w.swap_positions(i)?;
    let p_siw = poincare(&siw)?;
    let w_y = w.delete_entry(i)?;
    let p_wy = poincare(&w_y)?;
    let mut checks = Vec::new();
    if light {
        let rhs = &p_siw + &p_wy.shift(gap(w, &w_y));
        checks.push(IdentityCheck {
            name: "light".into(),
            holds: rhs == pw,
        });
    }
    if heavy {
        let w_x = w.delete_entry(i + 1)?;
        // In S_2 both entries go and the empty interval contributes 1.
        let (p_wxy, l_wxy) = if w.len() == 2 {
            (IntPolynomial::one(), 0)
        } else {
            let w_xy = w.delete_entries(&[i, i + 1])?;
            (poincare(&w_xy)?, w_xy.length())
        };
        let rhs = &(&(&p_siw + &poincare(&w_x)?.shift(gap(w, &w_x))) + &p_wy.shift(gap(w, &w_y)))
            - &p_wxy.shift(w.length() - l_wxy);
        checks.push(IdentityCheck {
            name: "heavy".into(),
            holds: rhs == pw,
        });
        let v = w.v_of()?;
        let simplified = &p_siw.shift(1) + &poincare(&v)?;
        checks.push(IdentityCheck {
            name: "heavy-simplified".into(),
            holds: simplified == pw,
        });
    }
    Ok(RecursionReport { w: w.clone(), checks })
}

/// True iff every `u <= w` has `u_j < w_i` for `j < i` and `u_j > w_{i+1}`
/// for `j > i + 1`, where `i` is the first descent. Heavy pairs always pass;
/// a light pair with some `w_j < w_{i+1}` to the right fails at `u = w`.
pub fn sjostrand_box_check(w: &Permutation) -> Result<bool> {
    let i = w
        .first_descent()
        .ok_or_else(|| Error::NotApplicable("identity has no descent".into()))?;
    if !w.is_light_at(i) && w.heavy_witness_at(i).is_none() {
        return Err(Error::NotApplicable(format!("first descent of {w} is not a reduction pair")));
    }
    let (hi, lo) = (w.value(i), w.value(i + 1));
    let iv = interval(w)?;
    let inside = iv.iter().all(|u| {
        (1..i).all(|j| u.value(j) < hi) && (i + 2..=w.len()).all(|j| u.value(j) > lo)
    });
    Ok(inside)
}

/// How the interval below a Gasharov-Reiner `w` with a reduction pair at its
/// first descent splits into `[id, s_i w]` and elements through `x` or `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub interval: usize,
    pub below_siw: usize,
    /// Elements `u` with `u_{i+1} = w_{i+1}`.
    pub through_x: usize,
    /// Elements `u` with `u_i = w_i`.
    pub through_y: usize,
    pub through_both: usize,
    pub covers_interval: bool,
    pub disjoint_from_siw: bool,
    pub bijections_hold: bool,
    pub grading_holds: bool,
}

impl DecompositionReport {
    pub fn holds(&self) -> bool {
        self.covers_interval && self.disjoint_from_siw && self.bijections_hold && self.grading_holds
    }
}

/// Checks that deleting `x`, `y` or both maps the corresponding pieces
/// bijectively onto the intervals below `w - x`, `w - y` and `w - x - y`,
/// shifting lengths by a constant. For a light pair only the `y` piece
/// is used.
pub fn decomposition_check(w: &Permutation) -> Result<DecompositionReport> {
    let i = w
        .first_descent()
        .ok_or_else(|| Error::NotApplicable("identity has no descent".into()))?;
    let heavy = w.heavy_witness_at(i).is_some();
    let light = w.is_light_at(i);
    if !heavy && !light {
        return Err(Error::NotApplicable(format!("first descent of {w} is not a reduction pair")));
    }
    let iv = interval(w)?;
    let siw = w.swap_positions(i)?;
    let (wy, wx) = (w.value(i), w.value(i + 1));
    let sx: Vec<&Permutation> = iv.iter().filter(|u| heavy && u.value(i + 1) == wx).collect();
    let sy: Vec<&Permutation> = iv.iter().filter(|u| u.value(i) == wy).collect();
    let sxy: Vec<&Permutation> = sx.iter().copied().filter(|u| u.value(i) == wy).collect();
    let mut below_siw = 0;
    let mut disjoint = true;
    let mut covers = true;
    for u in iv.iter() {
        let low = leq_unchecked(u.word(), siw.word());
        let in_x = heavy && u.value(i + 1) == wx;
        let in_y = u.value(i) == wy;
        below_siw += low as usize;
        disjoint &= !(low && (in_x || in_y));
        covers &= low || in_x || in_y;
    }
    let mut bijections = true;
    let mut grading = true;
    let mut piece = |members: &[&Permutation], deleted: &[usize]| -> Result<()> {
        let target = w.delete_entries(deleted)?;
        let shift = gap(w, &target);
        let mut images: Vec<Permutation> = Vec::with_capacity(members.len());
        for u in members {
            let img = u.delete_entries(deleted)?;
            grading &= u.length() == img.length() + shift;
            images.push(img);
        }
        images.sort();
        let mut expected: Vec<Permutation> = interval(&target)?.iter().cloned().collect();
        expected.sort();
        bijections &= images == expected;
        Ok(())
    };
    piece(&sy, &[i])?;
    if heavy {
        piece(&sx, &[i + 1])?;
        if w.len() > 2 {
            piece(&sxy, &[i, i + 1])?;
        } else {
            bijections &= sxy.len() == 1;
        }
    }
    Ok(DecompositionReport {
        interval: iv.len(),
        below_siw,
        through_x: sx.len(),
        through_y: sy.len(),
        through_both: sxy.len(),
        covers_interval: covers,
        disjoint_from_siw: disjoint,
        bijections_hold: bijections,
        grading_holds: grading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::parse;
    use std::collections::{BTreeSet, VecDeque};

    fn p(s: &str) -> Permutation {
        parse(s).unwrap()
    }

    fn poly(c: &[i64]) -> IntPolynomial {
        IntPolynomial::new(c.to_vec())
    }

    /// Down-set of `w` generated by length-decreasing transpositions.
    fn down_set_by_covers(w: &Permutation) -> BTreeSet<Permutation> {
        let mut seen = BTreeSet::from([w.clone()]);
        let mut queue = VecDeque::from([w.clone()]);
        while let Some(u) = queue.pop_front() {
            for a in 1..=u.len() {
                for b in a + 1..=u.len() {
                    let v = u.times_transposition(a, b);
                    if v.length() + 1 == u.length() && seen.insert(v.clone()) {
                        queue.push_back(v);
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn leq_matches_cover_closure() {
        for n in 1..=5 {
            for w in Permutation::all(n) {
                let down = down_set_by_covers(&w);
                for u in Permutation::all(n) {
                    assert_eq!(bruhat_leq(&u, &w).unwrap(), down.contains(&u), "{u} {w}");
                }
            }
        }
    }

    #[test]
    fn leq_examples() {
        assert!(bruhat_leq(&Permutation::identity(4), &p("3412")).unwrap());
        assert!(bruhat_leq(&p("2143"), &p("3412")).unwrap());
        assert!(!bruhat_leq(&p("4321"), &p("3412")).unwrap());
        assert!(matches!(bruhat_leq(&p("21"), &p("321")), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare(&p("3412")).unwrap(), poly(&[1, 3, 5, 4, 1]));
        assert_eq!(poincare(&p("3241")).unwrap(), poly(&[1, 3, 4, 3, 1]));
        assert_eq!(poincare(&p("21")).unwrap(), poly(&[1, 1]));
        assert_eq!(interval(&p("3412")).unwrap().len(), 14);
        assert!(matches!(poincare(&Permutation::identity(9)), Err(Error::SizeBound { .. })));
    }

    #[test]
    fn recursion_examples() {
        let r = verify_poincare_recursions(&p("3412")).unwrap();
        assert!(r.all_hold());
        assert!(r.checks.iter().any(|c| c.name == "heavy"));
        let r = verify_poincare_recursions(&p("3241")).unwrap();
        assert!(r.all_hold());
        assert_eq!(r.checks[0].name, "light");
        assert!(verify_poincare_recursions(&p("4231")).is_err());
    }

    #[test]
    fn recursions_hold_on_gasharov_reiner() {
        for n in 2..=6 {
            for w in Permutation::all(n) {
                match verify_poincare_recursions(&w) {
                    Ok(r) => assert!(r.all_hold(), "{w} {r:?}"),
                    Err(Error::NotApplicable(_)) => {}
                    Err(e) => panic!("{w}: {e}"),
                }
            }
        }
    }

    #[test]
    fn box_examples() {
        assert!(sjostrand_box_check(&p("3412")).unwrap());
        assert!(!sjostrand_box_check(&p("3241")).unwrap());
        assert!(sjostrand_box_check(&p("21")).unwrap());
        assert_eq!(interval(&p("3241")).unwrap().len(), 12);
    }

    #[test]
    fn decompositions_on_gasharov_reiner() {
        for n in 2..=6 {
            for w in Permutation::all(n).filter(|w| w.is_gasharov_reiner()) {
                let Ok(rep) = decomposition_check(&w) else { continue };
                assert!(rep.holds(), "{w} {rep:?}");
                let i = w.first_descent().unwrap();
                let wy = w.delete_entry(i).unwrap();
                assert_eq!(w.length() - wy.length(), w.value(i) - i, "{w}");
                if w.heavy_witness_at(i).is_some() && n > 2 {
                    assert!(sjostrand_box_check(&w).unwrap(), "{w}");
                    let wx = w.delete_entry(i + 1).unwrap();
                    let wxy = w.delete_entries(&[i, i + 1]).unwrap();
                    assert_eq!(rep.through_x as u128, interval_size(&wx).unwrap());
                    assert_eq!(rep.through_y as u128, interval_size(&wy).unwrap());
                    assert_eq!(rep.through_both as u128, interval_size(&wxy).unwrap());
                }
            }
        }
    }

    #[test]
    fn inverse_has_same_poincare() {
        for n in 1..=6 {
            for w in Permutation::all(n) {
                assert_eq!(poincare(&w).unwrap(), poincare(&w.inverse()).unwrap());
            }
        }
    }

    #[test]
    fn palindromic_iff_smooth() {
        for n in 1..=6 {
            for w in Permutation::all(n) {
                assert_eq!(poincare(&w).unwrap().is_palindromic(), w.is_smooth(), "{w}");
            }
        }
    }
}
