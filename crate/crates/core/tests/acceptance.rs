//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uebk::cli::sweep_reports;
use uebk::constructions::{
    construct, construct_prop2, construct_prop3, construct_prop4, construct_prop5,
    enumerate_families, sweep_params, Convention, FamilyId, FamilyParams, UebkFamily,
};
use uebk::mixed::{certify_rho_perp, rho_perp, RANGE_TOL};
use uebk::tensor::{
    gram, projector_distance, schmidt_coefficients, schmidt_rank, BipartiteVector, DEFAULT_TOL_RANK,
};
use uebk::verification::{
    complement_basis, expected_counts, generic_max_schmidt_rank, span_projector, verify_family,
    Check, VerificationReport, VerifyConfig, DEFAULT_TOL_ORTH,
};

const MAX_DPRIME: usize = 10;
const TOL_GRAM: f64 = 1e-10;
const TOL_COEFF: f64 = 1e-10;
const TOL_STATE: f64 = 1e-12;
const DISTINCT_SPAN: f64 = 0.1;
const SEEDS: [u64; 5] = [42, 1, 7, 2024, 9001];
const RUNTIME_LIMIT_S: f64 = 60.0;

struct Outcome {
    ok: bool,
    summary: String,
    problems: Vec<String>,
}

impl Outcome {
    fn new(summary: impl Into<String>, problems: Vec<String>) -> Self {
        Self {
            ok: problems.is_empty(),
            summary: summary.into(),
            problems,
        }
    }
}

fn dims_in_sweep() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for dprime in 3..=MAX_DPRIME {
        for d in 3..=dprime {
            for k in 2..d {
                out.push((d, dprime, k));
            }
        }
    }
    out
}

fn c1_exhaustive_sweep(reports: &[VerificationReport], elapsed: f64) -> Outcome {
    let mut problems = Vec::new();
    for r in reports {
        let p = &r.params;
        let name = p.to_string();
        if !r.passed() {
            problems.push(format!("{name}: FAIL {:?}", r.failed));
            continue;
        }
        if r.count.actual != p.expected_count() {
            problems.push(format!(
                "{name}: count {} != {}",
                r.count.actual,
                p.expected_count()
            ));
        }
        if r.orthonormality.max_gram_deviation > TOL_GRAM {
            problems.push(format!(
                "{name}: Gram deviation {:e}",
                r.orthonormality.max_gram_deviation
            ));
        }
        if r.schmidt.max_coefficient_deviation > TOL_COEFF
            || r.schmidt.ranks.iter().any(|&x| x != p.k())
        {
            problems.push(format!("{name}: Schmidt coefficients off"));
        }
        let generic = r.generic_rank.as_ref().unwrap();
        if generic.max_rank >= p.k() || generic.trials != 32 || generic.seed != 42 {
            problems.push(format!("{name}: generic rank {:?}", generic));
        }
        let family = construct(p).unwrap();
        let basis = complement_basis(&family, DEFAULT_TOL_ORTH).unwrap();
        let per_seed: Vec<usize> = SEEDS
            .iter()
            .map(|&s| generic_max_schmidt_rank(&basis, 32, s, DEFAULT_TOL_RANK).unwrap())
            .collect();
        if per_seed.iter().any(|&x| x != per_seed[0]) {
            problems.push(format!(
                "{name}: generic rank varies across seeds {per_seed:?}"
            ));
        }
        if let Some(bound) = r.structural_bound {
            if bound < generic.max_rank {
                problems.push(format!(
                    "{name}: structural bound {bound} < observed {}",
                    generic.max_rank
                ));
            }
        }
    }
    if elapsed > RUNTIME_LIMIT_S {
        problems.push(format!("sweep took {elapsed:.1}s"));
    }
    Outcome::new(
        format!(
            "exhaustive sweep d' <= {MAX_DPRIME}: {} families verified in {elapsed:.1}s, 5-seed stable",
            reports.len()
        ),
        problems,
    )
}

fn c2_family_counts() -> Outcome {
    let mut problems = Vec::new();
    let mut checked_pairs = 0;
    for (d, dprime, k) in dims_in_sweep() {
        let families = enumerate_families(d, dprime, k).unwrap();
        let (r_d, r_dp) = (d % k, dprime % k);
        if r_dp != 0 && families.len() < k - r_dp {
            problems.push(format!(
                "({d},{dprime},{k}): {} families < k - r = {}",
                families.len(),
                k - r_dp
            ));
        }
        if r_d == 0 && r_dp == 0 && families.len() < 2 * (k - 1) {
            problems.push(format!(
                "({d},{dprime},{k}): {} families < 2(k-1) = {}",
                families.len(),
                2 * (k - 1)
            ));
        }
        let projectors: Vec<_> = families
            .iter()
            .map(|p| (p, span_projector(&construct(p).unwrap())))
            .collect();
        for (a, (pa, qa)) in projectors.iter().enumerate() {
            for (pb, qb) in &projectors[a + 1..] {
                checked_pairs += 1;
                let dist = projector_distance(qa, qb);
                if dist <= DISTINCT_SPAN {
                    problems.push(format!(
                        "{pa} and {pb} span the same subspace (distance {dist:.1e})"
                    ));
                }
            }
        }
    }
    Outcome::new(
        format!("family-count claims and pairwise distinct spans ({checked_pairs} pairs)"),
        problems,
    )
}

fn c3_complement_dims(reports: &[VerificationReport]) -> Outcome {
    let mut problems = Vec::new();
    let spots = [
        (FamilyParams::prop1(3, 3, 2).unwrap(), 3),
        (FamilyParams::prop3(3, 4, 2).unwrap(), 4),
        (FamilyParams::prop5(4, 4, 2, 1).unwrap(), 4),
        (
            FamilyParams::prop2(5, 7, 3, 1, Convention::Repaired).unwrap(),
            11,
        ),
        (FamilyParams::eq8(4, 8, 2, 7).unwrap(), 4),
    ];
    for (p, dim) in spots {
        let basis = complement_basis(&construct(&p).unwrap(), DEFAULT_TOL_ORTH).unwrap();
        if basis.dim() != dim {
            problems.push(format!("{p}: complement dim {} != {dim}", basis.dim()));
        }
        if expected_counts(&p).unwrap().1 != dim {
            problems.push(format!("{p}: expected_counts disagrees"));
        }
    }
    for r in reports {
        let p = &r.params;
        let (_, dim) = expected_counts(p).unwrap();
        if r.complement_dim != Some(dim) {
            problems.push(format!(
                "{p}: complement dim {:?} != {dim}",
                r.complement_dim
            ));
        }
        let want = match p.family() {
            FamilyId::Prop1 => Some(p.r_dp()),
            FamilyId::Prop5 => Some(p.k() - p.q().unwrap()),
            FamilyId::Prop2 => Some(p.r_dp() + p.q().unwrap()),
            FamilyId::Eq8 => Some(p.dprime() - p.m_offset().unwrap()),
            _ => None,
        };
        if let Some(want) = want {
            if r.certificate_bound != Some(want) || want >= p.k() {
                problems.push(format!(
                    "{p}: certificate {:?}, expected {want} < k",
                    r.certificate_bound
                ));
            }
        }
    }
    Outcome::new(
        "complement dimensions and structural certificates",
        problems,
    )
}

fn c4_umeb_reduction(config: &VerifyConfig) -> Outcome {
    let mut problems = Vec::new();
    for (d, dprime, count) in [(2, 3, 4), (3, 4, 9)] {
        let p = FamilyParams::umeb(FamilyId::Prop1, d, dprime, None).unwrap();
        let f = construct(&p).unwrap();
        if f.len() != count {
            problems.push(format!("{p}: {} members != {count}", f.len()));
        }
        let target = 1.0 / (d as f64).sqrt();
        for v in f.vectors() {
            let s = schmidt_coefficients(v);
            if s.len() != d || s.iter().any(|x| (x - target).abs() > TOL_COEFF) {
                problems.push(format!("{p}: member not maximally entangled"));
                break;
            }
        }
        let r = verify_family(&f, config);
        match &r.generic_rank {
            Some(g) if g.max_rank < d => {}
            other => problems.push(format!("{p}: complement generic rank {other:?}")),
        }
        if !r.passed() {
            problems.push(format!("{p}: FAIL {:?}", r.failed));
        }
    }
    Outcome::new("UMEB reduction k = d for PROP1 (2,3) and (3,4)", problems)
}

fn c5_rho_perp(reports: &[VerificationReport], config: &VerifyConfig) -> Outcome {
    let mut problems = Vec::new();
    let mut checked = 0;
    for r in reports.iter().filter(|r| r.passed()) {
        let p = &r.params;
        let f = construct(p).unwrap();
        let rho = rho_perp(&f).unwrap();
        let cert = certify_rho_perp(
            &rho,
            f.len(),
            p.k(),
            config.trials,
            config.seed,
            config.tol_rank,
        )
        .unwrap();
        checked += 1;
        if (cert.trace - 1.0).abs() > TOL_STATE
            || cert.min_eigenvalue < -TOL_STATE
            || cert.rank != p.ambient_dim() - f.len()
            || cert.max_eigenvalue_deviation > TOL_STATE
            || !cert.range.below_k
        {
            problems.push(format!("{p}: {cert:?}"));
        }
        let range = rho.range_basis(RANGE_TOL).unwrap();
        let complement = complement_basis(&f, DEFAULT_TOL_ORTH).unwrap();
        let dist = projector_distance(&range.projector(), &complement.projector());
        if dist > 1e-10 {
            problems.push(format!("{p}: range differs from complement by {dist:e}"));
        }
    }
    Outcome::new(
        format!("rho-perp certification on {checked} families"),
        problems,
    )
}

fn c6_discrepancies(config: &VerifyConfig) -> Outcome {
    let mut problems = Vec::new();

    let literal = construct_prop2(5, 7, 3, 1, Convention::Literal).unwrap();
    let r = verify_family(&literal, config);
    if r.passed() || !r.failed.contains(&Check::Orthonormality) {
        problems.push(format!(
            "PROP2 literal did not fail orthonormality: {:?}",
            r.failed
        ));
    }
    let pos = |label: [usize; 3]| {
        literal
            .labels()
            .iter()
            .position(|l| l[..] == label[..])
            .unwrap()
    };
    let g = gram(literal.vectors()).unwrap();
    let entry = g[(pos([0, 0, 1]), pos([3, 0, 1]))].norm();
    if (entry - 1.0).abs() > 1e-12 {
        problems.push(format!("PROP2 literal m=0/m=3 overlap {entry}"));
    }
    let repaired = verify_family(
        &construct_prop2(5, 7, 3, 1, Convention::Repaired).unwrap(),
        config,
    );
    if !repaired.passed() {
        problems.push(format!("PROP2 repaired failed: {:?}", repaired.failed));
    }

    let r3 = verify_family(&construct_prop3(3, 4, 2).unwrap(), config);
    let support = r3.complement_support.as_ref().unwrap();
    let printed = r3.printed_form.as_ref().unwrap();
    if support.row_support != vec![2] || printed.matches || printed.printed[0].rows != vec![0] {
        problems.push(format!(
            "PROP3 (3,4,2) support {:?} / printed {:?}",
            support, printed.printed
        ));
    }

    let r5 = verify_family(&construct_prop5(4, 4, 2, 1).unwrap(), config);
    let support = r5.complement_support.as_ref().unwrap();
    let printed = r5.printed_form.as_ref().unwrap();
    if support.col_support != vec![3] || printed.matches || printed.printed[0].cols != vec![0] {
        problems.push(format!(
            "PROP5 (4,4,2,1) support {:?} / printed {:?}",
            support, printed.printed
        ));
    }

    let r4 = verify_family(
        &construct_prop4(4, 6, 3, 1, Convention::Literal).unwrap(),
        config,
    );
    if r4.failed != vec![Check::Unextendibility] {
        problems.push(format!("PROP4 literal (4,6,3,1) failed {:?}", r4.failed));
    }

    Outcome::new(
        "discrepancy regressions (PROP2 literal, PROP3/PROP5 supports, PROP4 literal)",
        problems,
    )
}

/// `(phi_a + |i>|j'>) / sqrt 2` for a product cell outside `phi_a`'s rows and
/// columns that every member leaves empty; the result has rank k+1 and stays
/// orthogonal to the other members.
fn rank_raising_replacement(family: &UebkFamily) -> Option<(usize, BipartiteVector)> {
    let (d, dprime) = (family.params().d(), family.params().dprime());
    let empty_cell =
        |i: usize, j: usize| family.vectors().iter().all(|v| v.amp(i, j).norm() == 0.0);
    for (a, v) in family.vectors().iter().enumerate() {
        let rows: Vec<usize> = (0..d)
            .filter(|&i| (0..dprime).any(|j| v.amp(i, j).norm() > 0.0))
            .collect();
        let cols: Vec<usize> = (0..dprime)
            .filter(|&j| (0..d).any(|i| v.amp(i, j).norm() > 0.0))
            .collect();
        for i in (0..d).filter(|i| !rows.contains(i)) {
            for j in (0..dprime).filter(|j| !cols.contains(j)) {
                if empty_cell(i, j) {
                    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                    let cell = BipartiteVector::basis(d, dprime, i, j).unwrap();
                    return Some((a, v.scaled(h).add_scaled(h, &cell).unwrap()));
                }
            }
        }
    }
    None
}

fn replaced(family: &UebkFamily, index: usize, v: BipartiteVector) -> UebkFamily {
    let (p, mut vs, labels) = family.clone().into_parts();
    vs[index] = v;
    UebkFamily::from_parts(p, vs, labels).unwrap()
}

fn c7_tamper(config: &VerifyConfig) -> Outcome {
    let mut problems = Vec::new();
    let all = sweep_params(MAX_DPRIME);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let chosen: Vec<&FamilyParams> = all.choose_multiple(&mut rng, 3).collect();
    let mut names = Vec::new();
    for p in chosen {
        names.push(p.key());
        let f = construct(p).unwrap();
        let k = p.k();

        let scaled = replaced(&f, 0, f.vectors()[0].scaled(C64::new(2.0, 0.0)));
        let r = verify_family(&scaled, config);
        if r.passed() || !r.failed.contains(&Check::Orthonormality) {
            problems.push(format!(
                "{p}: non-normalized copy not caught: {:?}",
                r.failed
            ));
        }

        match rank_raising_replacement(&f) {
            Some((a, v)) => {
                let rank = schmidt_rank(&v, DEFAULT_TOL_RANK).unwrap();
                let r = verify_family(&replaced(&f, a, v), config);
                if rank != k + 1
                    || r.passed()
                    || !r.orthonormality.ok
                    || !r.failed.contains(&Check::SchmidtRank)
                {
                    problems.push(format!("{p}: rank-{rank} replacement gave {:?}", r.failed));
                }
            }
            None => problems.push(format!("{p}: no rank-raising replacement available")),
        }

        let dup = replaced(&f, 0, f.vectors()[1].clone());
        let r = verify_family(&dup, config);
        if r.passed() || !r.failed.contains(&Check::Orthonormality) {
            problems.push(format!("{p}: duplicate not caught: {:?}", r.failed));
        }
    }
    Outcome::new(
        format!("tamper sensitivity on {}", names.join(", ")),
        problems,
    )
}

fn main() -> ExitCode {
    let config = VerifyConfig::default();
    let start = Instant::now();
    let reports = sweep_reports(MAX_DPRIME, &config);
    let elapsed = start.elapsed().as_secs_f64();

    let outcomes: BTreeMap<usize, Outcome> = [
        (1, c1_exhaustive_sweep(&reports, elapsed)),
        (2, c2_family_counts()),
        (3, c3_complement_dims(&reports)),
        (4, c4_umeb_reduction(&config)),
        (5, c5_rho_perp(&reports, &config)),
        (6, c6_discrepancies(&config)),
        (7, c7_tamper(&config)),
    ]
    .into_iter()
    .collect();

    let mut all_ok = true;
    for (n, o) in &outcomes {
        println!(
            "[{}] criterion {n}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.summary
        );
        for problem in &o.problems {
            println!("       - {problem}");
        }
        all_ok &= o.ok;
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
