//! Exhaustive verification suites. Each suite sweeps every permutation up to
//! its size bound and records one instance per (check, subject) pair.

use clap::ValueEnum;
use permudiag::bruhat::{poincare, verify_poincare_recursions};
use permudiag::diagram::{rook_numbers, rp_avoiding, structural_flags, sw_diagram, Board};
use permudiag::fillings::{enumerate_fillings, verify_pseudo_recursions, ConventionTable, FamilyName};
use permudiag::invgraph::{
    chromatic_by_rooks, chromatic_polynomial, count_acyclic_by_enumeration, count_acyclic_orientations_fast,
    inversion_graph, is_chordal, spine_partition_counts, Basis, DIRECT_ORIENTATION_EDGE_CAP,
};
use permudiag::matcount::{
    light_nb_check, lowrank_divisibility, mat_eval, qdiff_sides, verify_gauss_elim_count, verify_matrix_recursions,
    M_eval, M_poly_theorem, PrimeField,
};
use permudiag::{parse, Error, IntPolynomial, Permutation, Result};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ThmEquinumerous,
    ThmHlss,
    ThmMatpoincare,
    CorSmooth,
    ConjPseudofill,
    AppendixChromatic,
    #[value(name = "remarks-45")]
    #[serde(rename = "remarks-45")]
    Remarks45,
    LemmaQdiff,
}

/// Default size, bound without `--long`, bound with `--long`.
struct Bounds {
    default_n: usize,
    max_n: usize,
    long_max_n: usize,
}

impl Suite {
    pub fn id(self) -> &'static str {
        match self {
            Suite::ThmEquinumerous => "thm-equinumerous",
            Suite::ThmHlss => "thm-hlss",
            Suite::ThmMatpoincare => "thm-matpoincare",
            Suite::CorSmooth => "cor-smooth",
            Suite::ConjPseudofill => "conj-pseudofill",
            Suite::AppendixChromatic => "appendix-chromatic",
            Suite::Remarks45 => "remarks-45",
            Suite::LemmaQdiff => "lemma-qdiff",
        }
    }

    fn bounds(self) -> Bounds {
        let b = |default_n, max_n, long_max_n| Bounds { default_n, max_n, long_max_n };
        match self {
            Suite::ThmEquinumerous | Suite::ThmHlss | Suite::ConjPseudofill => b(5, 6, 7),
            Suite::ThmMatpoincare => b(4, 5, 6),
            Suite::CorSmooth | Suite::AppendixChromatic => b(5, 6, 7),
            Suite::Remarks45 => b(4, 4, 5),
            Suite::LemmaQdiff => b(3, 3, 3),
        }
    }

    fn default_primes(self) -> &'static [u32] {
        match self {
            Suite::ThmMatpoincare | Suite::Remarks45 => &[2, 3],
            _ => &[2],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Instance {
    pub check: String,
    pub subject: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub n_max: usize,
    pub primes: Vec<u32>,
    pub long: bool,
    pub checked: usize,
    pub failures: usize,
    pub notes: Vec<String>,
    pub instances: Vec<Instance>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} n<={} primes={:?}: {} checks, {} failures\n",
            self.suite.id(),
            self.n_max,
            self.primes,
            self.checked,
            self.failures
        );
        for note in &self.notes {
            s.push_str(&format!("note: {note}\n"));
        }
        for i in self.instances.iter().filter(|i| !i.holds) {
            s.push_str(&format!(
                "FAIL {} {} {}\n",
                i.check,
                i.subject,
                i.detail.as_deref().unwrap_or("")
            ));
        }
        s
    }
}

pub struct SuiteArgs {
    pub n: Option<usize>,
    pub primes: Vec<u32>,
    pub long: bool,
    pub budget: u128,
}

/// Raised when a request exceeds a suite bound; maps to exit code 3.
#[derive(Debug)]
pub struct Refusal(pub String);

pub enum SuiteError {
    Refused(Refusal),
    Lib(Error),
}

impl From<Error> for SuiteError {
    fn from(e: Error) -> Self {
        SuiteError::Lib(e)
    }
}

fn inst(check: &str, subject: impl ToString, holds: bool, detail: Option<String>) -> Instance {
    Instance { check: check.into(), subject: subject.to_string(), holds, detail }
}

fn perms_upto(n: usize) -> Vec<Permutation> {
    (1..=n).flat_map(Permutation::all).collect()
}

/// Runs `f` on every permutation in parallel, keeping lexicographic order.
fn sweep<F>(perms: &[Permutation], f: F) -> Result<Vec<Instance>>
where
    F: Fn(&Permutation) -> Result<Vec<Instance>> + Sync,
{
    let parts: Vec<Vec<Instance>> = perms.par_iter().map(&f).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn binom2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn theorem_value(w: &Permutation, p: u32) -> Result<u128> {
    let m = poincare(w)?.reflect(w.length()).shift(binom2(w.len()));
    Ok(m.eval(p as i128) as u128 * (p as u128 - 1).pow(w.len() as u32))
}

fn prime_bound(p: u32, long: bool) -> usize {
    match (p, long) {
        (2, false) => 5,
        (2, true) => 6,
        (3, false) => 5,
        (3, true) => 5,
        (_, false) => 3,
        (_, true) => 4,
    }
}

pub fn run(suite: Suite, args: &SuiteArgs, table: &ConventionTable) -> std::result::Result<SuiteReport, SuiteError> {
    let bounds = suite.bounds();
    let n = args.n.unwrap_or(bounds.default_n);
    let cap = if args.long { bounds.long_max_n } else { bounds.max_n };
    if n > cap {
        let hint = if !args.long && n <= bounds.long_max_n { " (needs --long)" } else { "" };
        return Err(SuiteError::Refused(Refusal(format!("{} supports n <= {cap}{hint}", suite.id()))));
    }
    let primes = if args.primes.is_empty() { suite.default_primes().to_vec() } else { args.primes.clone() };
    let fields: Vec<PrimeField> = primes.iter().map(|&p| PrimeField::new(p)).collect::<Result<_>>()?;
    if suite == Suite::ThmMatpoincare {
        for &p in &primes {
            let b = prime_bound(p, args.long);
            if n > b {
                return Err(SuiteError::Refused(Refusal(format!("thm-matpoincare at p={p} supports n <= {b}"))));
            }
        }
    }
    let mut notes = Vec::new();
    let instances = match suite {
        Suite::ThmEquinumerous => equinumerous(n, table)?,
        Suite::ThmHlss => hlss(n, &mut notes)?,
        Suite::ThmMatpoincare => matpoincare(n, &fields, args.budget, &mut notes)?,
        Suite::CorSmooth => smooth(n)?,
        Suite::ConjPseudofill => pseudofill(n, table)?,
        Suite::AppendixChromatic => chromatic(n)?,
        Suite::Remarks45 => remarks(n, &fields, args.budget)?,
        Suite::LemmaQdiff => qdiff(n, &fields)?,
    };
    let failures = instances.iter().filter(|i| !i.holds).count();
    Ok(SuiteReport {
        suite,
        n_max: n,
        primes,
        long: args.long,
        checked: instances.len(),
        failures,
        notes,
        instances,
    })
}

fn equinumerous(n: usize, table: &ConventionTable) -> Result<Vec<Instance>> {
    sweep(&perms_upto(n), |w| {
        let ao = count_acyclic_orientations_fast(&inversion_graph(w));
        let rp = rp_avoiding(&sw_diagram(w));
        let pf = enumerate_fillings(w, FamilyName::PseudoPercentage, table)?.count as u128;
        let holds = ao == rp && rp == pf;
        Ok(vec![inst("ao=rp=pseudo-percentage", w, holds, Some(format!("ao={ao} rp={rp} fillings={pf}")))])
    })
}

fn hlss(n: usize, notes: &mut Vec<String>) -> Result<Vec<Instance>> {
    let perms = perms_upto(n);
    let mut out = sweep(&perms, |w| {
        let ao = count_acyclic_orientations_fast(&inversion_graph(w));
        let size = poincare(w)?.sum_coeffs() as u128;
        let gr = w.is_gasharov_reiner();
        let detail = Some(format!("ao={ao} interval={size} gr={gr}"));
        let mut v = vec![inst("ao<=interval, equality iff gr", w, ao <= size && (ao == size) == gr, detail)];
        if gr {
            match verify_poincare_recursions(w) {
                Ok(rep) => {
                    for c in rep.checks {
                        v.push(inst(&format!("poincare-{}", c.name), w, c.holds, None));
                    }
                }
                Err(Error::NotApplicable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(v)
    })?;
    for k in 1..=n {
        let mut eq = Vec::new();
        let mut gr = Vec::new();
        for w in perms.iter().filter(|w| w.len() == k) {
            let ao = count_acyclic_orientations_fast(&inversion_graph(w));
            if ao == poincare(w)?.sum_coeffs() as u128 {
                eq.push(w.to_string());
            }
            if w.is_gasharov_reiner() {
                gr.push(w.to_string());
            }
        }
        let holds = eq == gr;
        notes.push(format!("n={k}: equality-class = GR list: {holds} ({} permutations)", eq.len()));
        out.push(inst("equality-class=gr", format!("S_{k}"), holds, None));
    }
    Ok(out)
}

fn matpoincare(n: usize, fields: &[PrimeField], budget: u128, notes: &mut Vec<String>) -> Result<Vec<Instance>> {
    let perms = perms_upto(n);
    let out = sweep(&perms, |w| {
        let mut v = Vec::new();
        let gr = w.is_gasharov_reiner();
        let mut agreements = Vec::new();
        for &f in fields {
            let mat = mat_eval(w, f, budget)?;
            let predicted = theorem_value(w, f.p())?;
            agreements.push(mat == predicted);
            if gr {
                v.push(inst(
                    &format!("mat=theorem@{}", f.p()),
                    w,
                    mat == predicted,
                    Some(format!("mat={mat} predicted={predicted}")),
                ));
            }
        }
        if !gr {
            v.push(inst("non-gr disagrees at some prime", w, agreements.iter().any(|a| !a), None));
        }
        // non-GR inputs fall back to counting at p = 2, 3, affordable up to S_5
        if gr || w.len() <= 5 {
            match verify_matrix_recursions(w) {
                Ok(rep) => {
                    for c in rep.checks {
                        v.push(inst(&format!("matrix-{}", c.name), w, c.holds, None));
                    }
                }
                Err(Error::NotApplicable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if w.first_descent_is_heavy() && w.len() <= 4 {
            for &f in fields {
                let ok = verify_gauss_elim_count(w, f, budget)?;
                v.push(inst(&format!("gauss-elimination@{}", f.p()), w, ok, None));
            }
        }
        if w.first_descent_is_light() && (2..=4).contains(&w.len()) {
            for &f in fields {
                match light_nb_check(w, f) {
                    Ok(rep) => v.push(inst(
                        &format!("light-nb@{}", f.p()),
                        w,
                        rep.holds(),
                        Some(format!("formula={} observed={:?}", rep.formula, rep.observed)),
                    )),
                    Err(Error::SearchTooLarge { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(v)
    })?;
    notes.push("light-nb rows cover n <= 4 where the brute-force cap allows".into());
    Ok(out)
}

fn smooth(n: usize) -> Result<Vec<Instance>> {
    sweep(&perms_upto(n), |w| {
        let p = poincare(w)?;
        let mut v = vec![inst("palindromic iff smooth", w, p.is_palindromic() == w.is_smooth(), None)];
        if w.is_gasharov_reiner() {
            let m = M_poly_theorem(w)?;
            let upright = p.shift(binom2(w.len()));
            v.push(inst("M=q^C*P iff smooth", w, (m == upright) == w.is_smooth(), None));
        }
        Ok(v)
    })
}

fn reflected(w: &Permutation) -> Result<IntPolynomial> {
    Ok(poincare(w)?.reflect(w.length()))
}

fn pseudofill(n: usize, table: &ConventionTable) -> Result<Vec<Instance>> {
    let p321 = parse("321")?;
    sweep(&perms_upto(n), |w| {
        let target = reflected(w)?;
        let mut v = Vec::new();
        let gf = |f| enumerate_fillings(w, f, table).map(|c| c.gf);
        if w.is_gasharov_reiner() {
            let (l, a) = (gf(FamilyName::PseudoL)?, gf(FamilyName::PseudoAmmag)?);
            let detail = format!("pseudo-l={l} pseudo-ammag={a} target={target}");
            v.push(inst("PF^L=PF^Ammag=q^l P(1/q)", w, l == target && a == target, Some(detail)));
            if let Ok(rep) = verify_pseudo_recursions(w, table) {
                for c in rep.checks {
                    v.push(inst(&c.name, w, c.holds, None));
                }
            }
        }
        let avoids_321 = w.len() < 3 || !w.contains_pattern(&p321)?;
        if avoids_321 {
            let (l, a) = (gf(FamilyName::L)?, gf(FamilyName::Ammag)?);
            let detail = format!("l={l} ammag={a} target={target}");
            v.push(inst("F^L=F^Ammag=q^l P(1/q)", w, l == target && a == target, Some(detail)));
        }
        Ok(v)
    })
}

fn chromatic(n: usize) -> Result<Vec<Instance>> {
    let p3412 = parse("3412")?;
    sweep(&perms_upto(n), |w| {
        let g = inversion_graph(w);
        let k = w.len();
        let mut v = Vec::new();
        let mono = chromatic_polynomial(&g, Basis::Monomial)?;
        v.push(inst("chromatic = rook falling factorials", w, mono == chromatic_by_rooks(w), None));
        if g.edge_count() <= DIRECT_ORIENTATION_EDGE_CAP {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let stanley = mono.eval(-1) * sign;
            let direct = count_acyclic_by_enumeration(&g) as i128;
            v.push(inst("stanley (-1)^n chi(-1)", w, stanley == direct, Some(format!("{stanley} vs {direct}"))));
        }
        let r = rook_numbers(&sw_diagram(w));
        if k <= 5 {
            let c = spine_partition_counts(w);
            let ok = (0..k).all(|j| c.spines_by_edges[j] == r.get(j) && c.partitions_by_blocks[k - j] == r.get(j));
            v.push(inst("spines = rooks = partitions", w, ok, None));
        }
        let avoids = k < 4 || !w.contains_pattern(&p3412)?;
        v.push(inst("chordal iff avoids 3412", w, is_chordal(&g) == avoids, None));
        if let Some(lambda) = structural_flags(w).lambda {
            let lhs = (0..=k).fold(IntPolynomial::zero(), |acc, i| {
                acc + IntPolynomial::falling_factorial(i) * IntPolynomial::new(vec![r.get(k - i) as i64])
            });
            let rhs = lambda
                .parts
                .iter()
                .enumerate()
                .fold(IntPolynomial::one(), |acc, (j, &l)| acc * IntPolynomial::new(vec![l as i64 - j as i64, 1]));
            v.push(inst("vexillary product formula", w, lhs == rhs, None));
        }
        Ok(v)
    })
}

fn remarks(n: usize, fields: &[PrimeField], budget: u128) -> Result<Vec<Instance>> {
    let two = PrimeField::new(2)?;
    let m = |s: &str| -> Result<i128> { Ok(M_eval(&parse(s)?, two, budget)? as i128) };
    let d1 = m("4312")? - m("3412")?;
    let d2 = m("3412")? - 2 * m("3142")?;
    let mut out = vec![
        inst("M_4312 - M_3412 at 2", "4312", d1 == 4992, Some(d1.to_string())),
        inst("M_3412 - 2 M_3142 at 2", "3412", d2 == 960, Some(d2.to_string())),
    ];
    out.extend(sweep(&perms_upto(n), |w| {
        let mut v = Vec::new();
        let bound = reflected(w)?.shift(binom2(w.len()));
        for &f in fields {
            let me = M_eval(w, f, budget)? as i128;
            let gap = bound.eval(f.p() as i128) - me;
            v.push(inst(&format!("theorem bound - M >= 0 @{}", f.p()), w, gap >= 0, Some(gap.to_string())));
            for r in 0..=w.len() {
                let rep = lowrank_divisibility(w, r, f, budget)?;
                let ok = rep.divisible && rep.congruent == Some(true);
                v.push(inst(&format!("rank-{r} divisibility @{}", f.p()), w, ok, None));
            }
        }
        if w.is_gasharov_reiner() {
            v.push(inst("unimodal M", w, M_poly_theorem(w)?.is_unimodal(), None));
        }
        Ok(v)
    })?);
    Ok(out)
}

fn qdiff(n: usize, fields: &[PrimeField]) -> Result<Vec<Instance>> {
    let mut jobs = Vec::new();
    for m in 2..=n.max(2) {
        let cells: Vec<(usize, usize)> = (1..=m).flat_map(|r| (1..=m).map(move |c| (r, c))).collect();
        for mask in 0u32..(1 << (m * m)) {
            let d = Board::new(m, cells.iter().copied().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, c)| c))?;
            for &y in cells.iter().filter(|&&(r, c)| !d.contains(r, c)) {
                for &f in fields {
                    jobs.push((d.clone(), y, f));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|(d, y, f)| {
            let s = qdiff_sides(d, *y, *f)?;
            let subject = format!("n={} D={} y=({},{}) p={}", d.n(), d.to_json(), y.0, y.1, f.p());
            Ok(inst("qdiff", subject, s.holds(), Some(format!("lhs={} rhs={}", s.lhs, s.rhs))))
        })
        .collect()
}
