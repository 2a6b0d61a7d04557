//! Acceptance gate: one PASS/FAIL line per criterion, with the time limits
//! pinned below. Every check is exact, so there are no numeric tolerances.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hecke_core::decompose::{classical_table, hom_dimension_check, LklEngine};
use hecke_core::field::{Field, PrimeField, Rationals};
use hecke_core::multside::{
    completion_check, exactness_check, jsigma_rank1, pittie_steinberg_check, steinberg_section_check, MultContext,
};
use hecke_core::suites::{engine_checks, lkl_engine, table_checks, weyl_suite};
use hecke_core::{AffineWeyl, CheckRecord, LklTable};

const LIMIT_LENGTH: Duration = Duration::from_secs(10);
const LIMIT_RATIONAL: Duration = Duration::from_secs(300);
const LIMIT_HOM: Duration = Duration::from_secs(600);
const LIMIT_MULT: Duration = Duration::from_secs(60);
const LIMIT_PS: Duration = Duration::from_secs(60);
const LIMIT_STEINBERG: Duration = Duration::from_secs(10);

// Bounds shared by criteria 2, 3 and 5.
const BOUND_A1: usize = 8;
const BOUND_A2: usize = 5;
const HOM_BOUND: usize = 3;

struct Outcome {
    lines: Vec<String>,
    ok: bool,
}

impl Outcome {
    fn new() -> Self {
        Outcome { lines: Vec::new(), ok: true }
    }

    fn report(&mut self, n: u32, what: &str, checks: &[CheckRecord], elapsed: Duration, limit: Option<Duration>) {
        let failed: Vec<&CheckRecord> = checks.iter().filter(|c| !c.pass).collect();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = failed.is_empty() && !checks.is_empty() && in_time;
        self.ok &= pass;
        let limit = limit.map_or("none".to_string(), |l| format!("{}s", l.as_secs()));
        let mut line = format!(
            "criterion {n:>2}: {} {what} ({} checks, {:.2}s, limit {limit})",
            if pass { "PASS" } else { "FAIL" },
            checks.len(),
            elapsed.as_secs_f64()
        );
        for c in failed.iter().take(5) {
            line.push_str(&format!("\n    {} [{}] expected {} got {}", c.name, c.inputs, c.expected, c.got));
        }
        if !in_time {
            line.push_str("\n    time limit exceeded");
        }
        println!("{line}");
        self.lines.push(line);
    }
}

fn group(label: &str) -> Arc<AffineWeyl> {
    Arc::new(AffineWeyl::from_label(label).expect("known label"))
}

fn named<'a>(checks: &'a [CheckRecord], prefix: &str) -> Vec<CheckRecord> {
    checks.iter().filter(|c| c.name.starts_with(prefix)).cloned().collect()
}

/// Everything criteria 2–6 need from one engine run.
struct Run {
    tag: String,
    table: LklTable,
    table_checks: Vec<CheckRecord>,
    engine_checks: Vec<CheckRecord>,
    homs: Vec<CheckRecord>,
    build: Duration,
    homs_time: Duration,
}

fn run_engine<F: Field>(weyl: &Arc<AffineWeyl>, field: F, name: &str, ell: Option<u64>, bound: usize) -> Run {
    let label = weyl.datum.cartan_label.clone();
    let tag = format!("{label} field={name} bound={bound}");
    let t = Instant::now();
    let engine: LklEngine<F> = lkl_engine(weyl, field, bound).expect("engine runs");
    let table = engine.table(&label, ell, bound);
    let build = t.elapsed();
    let tc = table_checks(weyl, &table, &tag);
    let ec = engine_checks(&engine, &tag, hecke_core::decompose::DEFAULT_SEED).expect("engine checks run");
    let t = Instant::now();
    let mut homs = Vec::new();
    let small: Vec<_> = engine.chars.keys().filter(|w| weyl.length(w) <= HOM_BOUND).cloned().collect();
    for w in &small {
        for y in &small {
            let c = hom_dimension_check(&engine, w, y).expect("hom check runs");
            homs.push(CheckRecord::new("hom-formula", format!("{tag} w={} y={}", c.w, c.y), c.formula, c.hom_rank));
        }
    }
    Run {
        tag,
        table,
        table_checks: tc,
        engine_checks: ec,
        homs,
        build,
        homs_time: t.elapsed(),
    }
}

fn main() -> ExitCode {
    let mut out = Outcome::new();
    let a1 = group("A1~");
    let a2 = group("A2~");
    // The simply connected rank-one datum has no valid realization in
    // characteristic 2; GL2 has the same Coxeter part and does.
    let gl2 = group("GL2");

    // 1
    let t = Instant::now();
    let mut c = named(&weyl_suite(&a1, 8), "length");
    c.extend(named(&weyl_suite(&a2, 6), "length"));
    out.report(1, "length formula = BFS distance (A1 ≤ 8, A2 ≤ 6)", &c, t.elapsed(), Some(LIMIT_LENGTH));

    let p2 = PrimeField::new(2).unwrap();
    let p3 = PrimeField::new(3).unwrap();
    let p5 = PrimeField::new(5).unwrap();
    let mut runs: BTreeMap<&str, Vec<Run>> = BTreeMap::new();
    runs.insert(
        "Q",
        vec![
            run_engine(&a1, Rationals, "Q", None, BOUND_A1),
            run_engine(&a2, Rationals, "Q", None, BOUND_A2),
        ],
    );
    runs.insert(
        "2",
        vec![
            run_engine(&gl2, p2, "2", Some(2), BOUND_A1),
            run_engine(&a2, p2, "2", Some(2), BOUND_A2),
        ],
    );
    runs.insert(
        "3",
        vec![
            run_engine(&a1, p3, "3", Some(3), BOUND_A1),
            run_engine(&a2, p3, "3", Some(3), BOUND_A2),
        ],
    );
    runs.insert(
        "5",
        vec![
            run_engine(&a1, p5, "5", Some(5), BOUND_A1),
            run_engine(&a2, p5, "5", Some(5), BOUND_A2),
        ],
    );
    let all: Vec<&Run> = runs.values().flatten().collect();

    // 2: the classical table is recomputed independently from the bar involution.
    let t = Instant::now();
    let mut c = Vec::new();
    for r in &runs["Q"] {
        let w = if r.table.cartan_label == "A1" { &a1 } else { &a2 };
        let classical = classical_table(w, &r.table.cartan_label, r.table.length_bound);
        c.push(CheckRecord::new(
            "table-equal",
            r.tag.clone(),
            classical.to_csv(w).replace("rationals", "Q"),
            r.table.to_csv(w).replace("rationals", "Q"),
        ));
    }
    let build: Duration = runs["Q"].iter().map(|r| r.build).sum();
    out.report(2, "rationals ℓ-KL table = classical KL (A1 ≤ 8, A2 ≤ 5)", &c, build + t.elapsed(), Some(LIMIT_RATIONAL));

    // 3
    let c: Vec<CheckRecord> = all.iter().flat_map(|r| named(&r.table_checks, "lkl-symmetry")).collect();
    out.report(3, "h_{y,w} = h_{y⁻¹,w⁻¹} for ℓ ∈ {2, 3, 5} and Q", &c, Duration::ZERO, None);

    // 4
    let c: Vec<CheckRecord> = all.iter().flat_map(|r| r.homs.clone()).collect();
    let time: Duration = all.iter().map(|r| r.homs_time).sum();
    out.report(4, "rank Hom(B_w, B_y) = Σ_z h_{z,w}(1) h_{z,y}(1), ℓ(w), ℓ(y) ≤ 3", &c, time, Some(LIMIT_HOM));

    // 5
    let c: Vec<CheckRecord> = all
        .iter()
        .flat_map(|r| {
            let mut v = named(&r.engine_checks, "reduced-word-independence");
            v.extend(named(&r.table_checks, "lkl-bar-invariant"));
            v
        })
        .collect();
    out.report(5, "reduced-word independence and bar invariance of ch(B_w)", &c, Duration::ZERO, None);

    // 6
    let c: Vec<CheckRecord> = all
        .iter()
        .flat_map(|r| {
            let mut v = named(&r.table_checks, "tilting-evaluation");
            v.extend(named(&r.table_checks, "lkl-diagonal"));
            v.extend(named(&r.table_checks, "lkl-bruhat-support"));
            v
        })
        .collect();
    out.report(6, "tilting table = ℓ-KL table at v = 1, unitriangular", &c, Duration::ZERO, None);

    // 7
    let t = Instant::now();
    let mut c = Vec::new();
    let q = Rationals;
    for label in ["A1", "A2"] {
        let w = group(label);
        for m in 1..=3 {
            let ctx = MultContext::new(&w, &q, m).unwrap();
            for i in 0..w.rank() {
                c.extend(exactness_check(&ctx, i).unwrap());
            }
        }
        let ctx = MultContext::new(&w, &q, 1).unwrap();
        let n = w.finite_order();
        for x in 0..n {
            for y in 0..n {
                let prod = ctx.convolve(&ctx.m_module(x), &ctx.m_module(y));
                let ok = ctx.isomorphism(&prod, &ctx.m_module(w.finite_mul(x, y))).is_some();
                c.push(CheckRecord::flag("m-product", format!("{label} {x}*{y}"), ok));
            }
        }
        if w.rank() == 1 {
            let d = ctx.d_algebra().unwrap();
            c.push(CheckRecord::new("d-algebra-dim", format!("{label} level=1"), n * n, d.dim));
        }
    }
    out.report(7, "exact sequences (m ≤ 3), M_w ⊛ M_y ≅ M_wy, dim O(D) = #W_f²", &c, t.elapsed(), Some(LIMIT_MULT));

    // 8
    let t = Instant::now();
    let mut c = Vec::new();
    for (label, rank) in [("A1", 2), ("A2", 6)] {
        let r = pittie_steinberg_check(&group(label), &q, 2).unwrap();
        c.push(CheckRecord::new("ps-rank", label.to_string(), rank, r.rank));
        c.push(CheckRecord::flag("ps-certificate", label.to_string(), r.pass));
    }
    out.report(8, "Pittie–Steinberg bases of rank 2 (A1) and 6 (A2)", &c, t.elapsed(), Some(LIMIT_PS));

    // 9
    let t = Instant::now();
    let mut c = Vec::new();
    for label in ["A1", "A2", "B2", "G2"] {
        for m in 1..=3 {
            c.extend(completion_check(&group(label), &q, m).unwrap());
        }
    }
    out.report(9, "completion and invariant dimensions, m ≤ 3, ranks 1–2", &c, t.elapsed(), None);

    // 10
    let t = Instant::now();
    let mut c = steinberg_section_check(2).unwrap();
    c.extend(steinberg_section_check(3).unwrap());
    c.extend(jsigma_rank1(&q));
    for p in [2, 3, 5, 7] {
        c.extend(jsigma_rank1(&PrimeField::new(p).unwrap()));
    }
    out.report(10, "Steinberg sections for SL2, SL3; rank-one centralizer smooth iff char ≠ 2", &c, t.elapsed(), Some(LIMIT_STEINBERG));

    if out.ok {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 10 criteria fail", out.lines.iter().filter(|l| l.contains("FAIL")).count());
        ExitCode::FAILURE
    }
}
