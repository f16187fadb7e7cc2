use std::collections::BTreeMap;
use std::io::Write;

use permudiag::bruhat::poincare;
use permudiag::diagram::{rook_numbers, rp_avoiding, se_diagram, structural_flags, sw_diagram, Board, StructuralFlags};
use permudiag::fillings::{enumerate_fillings, ConventionTable, FamilyName};
use permudiag::invgraph::{count_acyclic_orientations_fast, inversion_graph};
use permudiag::matcount::{M_eval, PrimeField};
use permudiag::perm::{ClassFlags, ReductionPairInfo};
use permudiag::{Error, Permutation, Result};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

/// A count that may have been refused on feasibility grounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Value(u128),
    Skipped,
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Value(v) => s.serialize_u128(*v),
            Count::Skipped => s.serialize_str("skipped"),
        }
    }
}

impl std::fmt::Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Count::Value(v) => write!(f, "{v}"),
            Count::Skipped => f.write_str("skipped"),
        }
    }
}

fn feasible<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::SearchTooLarge { .. } | Error::BoardTooLarge { .. } | Error::SizeBound { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoReport {
    pub w: Permutation,
    pub n: usize,
    pub ell: usize,
    pub inversions: Vec<(usize, usize)>,
    pub flags: ClassFlags,
    pub structure: StructuralFlags,
    pub reduction_pair: Option<ReductionPairInfo>,
    pub se_diagram: Board,
    pub sw_diagram: Board,
    pub rook_numbers: Vec<u128>,
    pub ao: u128,
    pub rp: u128,
    pub interval_size: Count,
    pub poincare: Option<Vec<i64>>,
}

pub fn info(w: &Permutation) -> Result<InfoReport> {
    let stats = w.length_stats();
    let o = sw_diagram(w);
    let p = feasible(poincare(w))?;
    Ok(InfoReport {
        w: w.clone(),
        n: w.len(),
        ell: stats.ell,
        inversions: stats.inversions,
        flags: w.classify(),
        structure: structural_flags(w),
        reduction_pair: w.reduction_pair().ok(),
        se_diagram: se_diagram(w),
        rook_numbers: rook_numbers(&o).r,
        rp: rp_avoiding(&o),
        sw_diagram: o,
        ao: count_acyclic_orientations_fast(&inversion_graph(w)),
        interval_size: p.as_ref().map_or(Count::Skipped, |p| Count::Value(p.sum_coeffs() as u128)),
        poincare: p.map(|p| p.coeffs().to_vec()),
    })
}

pub fn render_info(r: &InfoReport) -> String {
    let cells = |b: &Board| b.cells().iter().map(|(r, c)| format!("({r},{c})")).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k:<16}{v}\n"));
    line("w", r.w.to_string());
    line("n", r.n.to_string());
    line("length", r.ell.to_string());
    line("flags", format!("{:?}", r.flags));
    if let Some(rp) = &r.reduction_pair {
        line("first descent", format!("{} ({:?})", rp.descent_position, rp.kind));
    }
    line("E_w", cells(&r.se_diagram));
    line("O_w", cells(&r.sw_diagram));
    line("rook numbers", format!("{:?}", r.rook_numbers));
    line("ao", r.ao.to_string());
    line("rp", r.rp.to_string());
    line("interval", r.interval_size.to_string());
    if let Some(p) = &r.poincare {
        line("poincare", format!("{p:?}").replace(' ', ""));
    }
    out
}

/// Survey rows are limited to this size.
pub const SURVEY_MAX_N: usize = 7;

#[derive(Debug, Clone, Serialize)]
pub struct SurveyRow {
    pub w: Permutation,
    pub ell: usize,
    pub flags: ClassFlags,
    pub ao: u128,
    pub rp: u128,
    pub interval_size: u128,
    pub poincare: Vec<i64>,
    pub fillings: BTreeMap<String, Count>,
    pub matrices: BTreeMap<String, Count>,
}

impl SurveyRow {
    pub fn consistent(&self) -> bool {
        let sum: i64 = self.poincare.iter().sum();
        self.ao == self.rp && self.interval_size == sum as u128
    }
}

fn prime_key(p: PrimeField) -> String {
    format!("p{}", p.p())
}

pub fn survey_row(w: &Permutation, table: &ConventionTable, primes: &[PrimeField], budget: u128) -> Result<SurveyRow> {
    let p = poincare(w)?;
    let mut fillings = BTreeMap::new();
    for fam in FamilyName::ALL {
        let c = feasible(enumerate_fillings(w, fam, table))?;
        fillings.insert(fam.slug().to_string(), c.map_or(Count::Skipped, |c| Count::Value(c.count as u128)));
    }
    let mut matrices = BTreeMap::new();
    for &f in primes {
        let m = feasible(M_eval(w, f, budget))?;
        matrices.insert(prime_key(f), m.map_or(Count::Skipped, Count::Value));
    }
    Ok(SurveyRow {
        w: w.clone(),
        ell: w.length(),
        flags: w.classify(),
        ao: count_acyclic_orientations_fast(&inversion_graph(w)),
        rp: rp_avoiding(&sw_diagram(w)),
        interval_size: p.sum_coeffs() as u128,
        poincare: p.coeffs().to_vec(),
        fillings,
        matrices,
    })
}

/// Rows in lexicographic order regardless of scheduling.
pub fn survey(n: usize, table: &ConventionTable, primes: &[PrimeField], budget: u128) -> Result<Vec<SurveyRow>> {
    if n > SURVEY_MAX_N {
        return Err(Error::SizeBound { n, max: SURVEY_MAX_N });
    }
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    perms.par_iter().map(|w| survey_row(w, table, primes, budget)).collect()
}

pub fn write_json<W: Write>(rows: &[SurveyRow], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")
}

pub fn write_csv<W: Write>(rows: &[SurveyRow], primes: &[PrimeField], out: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["w", "ell", "grassmannian", "smooth", "gasharov_reiner", "avoids_321", "avoids_3412"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(["ao", "rp", "interval_size", "poincare"].iter().map(|s| s.to_string()));
    header.extend(FamilyName::ALL.iter().map(|f| format!("fill_{}", f.slug())));
    header.extend(primes.iter().map(|&p| format!("m_{}", prime_key(p))));
    wtr.write_record(&header)?;
    for r in rows {
        let f = r.flags;
        let mut rec = vec![r.w.to_string(), r.ell.to_string()];
        rec.extend(
            [f.grassmannian, f.smooth, f.gasharov_reiner, f.avoids_321, f.avoids_3412]
                .iter()
                .map(|b| b.to_string()),
        );
        let poly = format!(
            "[{}]",
            r.poincare.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        );
        rec.extend([r.ao.to_string(), r.rp.to_string(), r.interval_size.to_string(), poly]);
        rec.extend(FamilyName::ALL.iter().map(|fam| r.fillings[fam.slug()].to_string()));
        rec.extend(primes.iter().map(|&p| r.matrices[&prime_key(p)].to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()
}
