//! Reproduction report: every identity and property sweep the toolkit is
//! built to confirm, run from one master seed. Reports carry no timings, so
//! the same seed gives the same bytes at any worker count.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::batch::{OutputFormat, RunConfig};
use crate::bounds::{
    alpha_coefficient, alpha_range_check, compare_alpha_b, crossover_h, odd_dimension_coefficient, phi, Comparison,
};
use crate::curvature::{mean_curvature_vector, ricci_tensor, scalar_curvature_identity, sff_norm_sq, trace, PointData};
use crate::error::Result;
use crate::lawson_simons::{
    coordinate_subset_max, generic_combination_eigen, maximize_theta, pinched_instance, theta_q_basis,
    theta_q_subspace, verify_lemma_chain, PinchedInstance, PinchedSpec, SubspaceSplit,
};
use crate::linalg::{random_orthogonal, sym_op_norm};
use crate::models::{
    clifford_minimal, einstein_torus, einstein_torus_exact, equality_case_synthetic_parts, umbilical_sphere,
};
use crate::rigidity::{classify_point, equality_case_detect_seeded, PointClass};
use crate::rng::{domain, gaussian_matrix, gaussian_symmetric, stream};
use crate::scalar::{int, rational, Field, Rational};

pub const SWEEP_INSTANCES: usize = 1000;
pub const SYNTHETIC_INSTANCES: usize = 200;
pub const OPTIMIZER_FAMILIES: usize = 50;
pub const SPLIT_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub claim: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
}

impl ReproductionReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut out = String::from("id,claim,result,detail\n");
                for c in &self.criteria {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        c.id,
                        crate::batch::csv_escape(c.claim),
                        pass_word(c.passed),
                        crate::batch::csv_escape(&c.detail)
                    );
                }
                out
            }
            OutputFormat::Markdown => {
                let mut out = format!(
                    "seed {}\n\n| # | claim | result | detail |\n|---|---|---|---|\n",
                    self.seed
                );
                for c in &self.criteria {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} |",
                        c.id,
                        c.claim,
                        pass_word(c.passed),
                        c.detail
                    );
                }
                let passed = self.criteria.iter().filter(|c| c.passed).count();
                let _ = writeln!(out, "\n{passed}/{} passed", self.criteria.len());
                out
            }
        }
    }
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

fn outcome(id: u32, claim: &'static str, failures: Vec<String>, summary: String) -> CriterionOutcome {
    let passed = failures.is_empty();
    let detail = if passed {
        summary
    } else {
        let shown: Vec<_> = failures.iter().take(3).cloned().collect();
        format!("{summary}; {} failure(s): {}", failures.len(), shown.join("; "))
    };
    CriterionOutcome {
        id,
        claim,
        passed,
        detail,
    }
}

fn odd_coefficient() -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut count = 0;
    for n in (5..=41u32).step_by(2) {
        count += 1;
        match alpha_coefficient::<Rational>(n, (n - 1) / 2) {
            Ok(a) if a == odd_dimension_coefficient(n) => {}
            Ok(a) => failures.push(format!("n={n}: {a}")),
            Err(e) => failures.push(format!("n={n}: {e}")),
        }
    }
    if alpha_coefficient::<Rational>(5, 2).ok() != Some(rational(50, 17)) {
        failures.push("n=5 coefficient is not 50/17".into());
    }
    outcome(
        1,
        "odd-dimension alpha coefficient",
        failures,
        format!("{count} odd n in [5, 41] exact"),
    )
}

fn torus_identities() -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut count = 0;
    for n in 5..=10usize {
        for k in 2..=n / 2 {
            for (r_num, r) in [(1i64, 1.0f64), (2, 2.0)] {
                for (c_exact, c) in [(int(0), 0.0), (rational(1, 4), 0.25)] {
                    count += 1;
                    let tag = format!("n={n} k={k} r={r} c={c}");
                    match einstein_torus_exact(n, k, &int(r_num * r_num), &c_exact, 2) {
                        Ok((p, spec)) => {
                            let ric = p.ricci_tensor();
                            let einstein = (0..n).all(|i| {
                                (0..n).all(|j| ric[(i, j)] == if i == j { spec.ric_value.clone() } else { int(0) })
                            });
                            if !einstein || spec.ric_value != int(n as i64 - 2) / int(r_num * r_num) {
                                failures.push(format!("{tag}: exact Ricci"));
                            }
                            if p.mean_curvature_sq() != spec.h_g_sq.clone() + spec.h_u_sq.clone() {
                                failures.push(format!("{tag}: H^2 composition"));
                            }
                            if spec.alpha.as_ref() != Some(&spec.ric_value) {
                                failures.push(format!("{tag}: alpha"));
                            }
                        }
                        Err(e) => failures.push(format!("{tag}: {e}")),
                    }
                    match einstein_torus(n, k, r, c, 2) {
                        Ok((p, spec)) => {
                            let dev =
                                (ricci_tensor(&p) - DMatrix::identity(n, n) * ((n as f64 - 2.0) / (r * r))).amax();
                            if dev > 1e-10 {
                                failures.push(format!("{tag}: float Ricci off by {dev:e}"));
                            }
                            let (nf, kf) = (n as f64, k as f64);
                            let hg = (nf - 2.0 * kf) / (r * nf * ((kf - 1.0) * (nf - kf - 1.0)).sqrt());
                            let got = mean_curvature_vector(&p).components[0];
                            if (got - hg).abs() > 1e-12 || (spec.h_g - hg).abs() > 1e-12 {
                                failures.push(format!("{tag}: H_g {got} vs {hg}"));
                            }
                        }
                        Err(e) => failures.push(format!("{tag}: {e}")),
                    }
                }
            }
        }
    }
    outcome(
        2,
        "Einstein torus identities",
        failures,
        format!("{count} models exact and float"),
    )
}

fn trichotomy() -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for n in 5..=20u32 {
        for k in 2..=n / 2 {
            pairs += 1;
            let tag = format!("n={n} k={k}");
            let run = || -> Result<Vec<String>> {
                let mut f = Vec::new();
                let at0 = compare_alpha_b(n, k, &int(0))?.comparison;
                let expect0 = if n == 2 * k {
                    Comparison::Equal
                } else {
                    Comparison::AlphaGreater
                };
                if at0 != expect0 {
                    f.push(format!("{tag}: H=0 gives {}", at0.as_str()));
                }
                if n == 2 * k {
                    for h in [rational(1, 1000), rational(1, 2), int(3), int(100)] {
                        let cmp = compare_alpha_b(n, k, &h)?.comparison;
                        if cmp != Comparison::BGreater {
                            f.push(format!("{tag}: H={h} gives {}", cmp.as_str()));
                        }
                    }
                }
                let cross = crossover_h(n, k, 30)?;
                for factor in [int(1), int(2), int(10)] {
                    let h = cross.hi.clone() * factor;
                    if h > int(0) && compare_alpha_b(n, k, &h)?.comparison != Comparison::BGreater {
                        f.push(format!("{tag}: not B_GREATER above H*"));
                    }
                }
                if n != 2 * k && compare_alpha_b(n, k, &cross.lo)?.comparison == Comparison::BGreater {
                    f.push(format!("{tag}: bracket low end already B_GREATER"));
                }
                Ok(f)
            };
            match run() {
                Ok(f) => failures.extend(f),
                Err(e) => failures.push(format!("{tag}: {e}")),
            }
        }
    }
    outcome(
        3,
        "b versus alpha trichotomy on the unit sphere",
        failures,
        format!("{pairs} (n, k) pairs exact"),
    )
}

fn phi_and_range() -> CriterionOutcome {
    let mut failures = Vec::new();
    for n in 5..=20u32 {
        let half = Rational::ratio(n as i64, 2);
        let span = half - int(2);
        let mut prev: Option<Rational> = None;
        for i in 0..1000 {
            let s = int(2) + span.clone() * Rational::ratio(i, 999);
            match phi(n, &s) {
                Ok(v) => {
                    if let Some(p) = &prev {
                        if v.value >= *p {
                            failures.push(format!("n={n}: phi not decreasing at s={s}"));
                            break;
                        }
                    }
                    prev = Some(v.value);
                }
                Err(e) => {
                    failures.push(format!("n={n} s={s}: {e}"));
                    break;
                }
            }
        }
        for k in 2..=n / 2 {
            match alpha_range_check(n, k) {
                Ok(r) if r.all() => {}
                Ok(r) => failures.push(format!("n={n} k={k}: {r:?}")),
                Err(e) => failures.push(format!("n={n} k={k}: {e}")),
            }
        }
    }
    outcome(
        4,
        "phi decreasing and alpha range",
        failures,
        "n in [5, 20], 1000-point grids".into(),
    )
}

/// Draws `count` pinched instances from the master seed, in order.
pub fn pinched_sweep(seed: u64, count: usize) -> Result<(Vec<PinchedInstance>, u64)> {
    let mut out = Vec::with_capacity(count);
    let mut draws = 0u64;
    while out.len() < count {
        let mut rng = stream(seed, &[domain::INSTANCES, draws]);
        draws += 1;
        let spec = PinchedSpec::sample(&mut rng);
        if let Some(inst) = pinched_instance(&spec, &mut rng)? {
            out.push(inst);
        }
    }
    Ok((out, draws))
}

fn chain_sweep(instances: &[PinchedInstance], cfg: &RunConfig) -> CriterionOutcome {
    let per_instance: Vec<Vec<String>> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| {
            let mut f = Vec::new();
            let p = &inst.point;
            let k = inst.spec.k;
            let ch = *p.c() + mean_curvature_vector(p).h_sq;
            for q in 2..=k {
                let tag = format!("instance {idx} q={q}");
                let res = match maximize_theta(p, q, &cfg.optimizer(idx as u64)) {
                    Ok(r) => r,
                    Err(e) => {
                        f.push(format!("{tag}: {e}"));
                        continue;
                    }
                };
                if res.value > res.threshold + 1e-9 {
                    f.push(format!(
                        "{tag}: max theta exceeds threshold by {:e}",
                        res.value - res.threshold
                    ));
                }
                if q < k && ch > 0.0 && res.value >= res.threshold {
                    f.push(format!("{tag}: not strict"));
                }
                match verify_lemma_chain(p, k, q, &res.split, &cfg.tolerances) {
                    Ok(rec) if rec.min_slack() >= -1e-10 => {}
                    Ok(rec) => f.push(format!("{tag}: slack {:e}", rec.min_slack())),
                    Err(e) => f.push(format!("{tag}: {e}")),
                }
            }
            f
        })
        .collect();
    let failures = per_instance.into_iter().flatten().collect();
    outcome(
        5,
        "lemma chain on pinched instances",
        failures,
        format!("{} instances", instances.len()),
    )
}

fn detector_round_trip(cfg: &RunConfig) -> CriterionOutcome {
    let per: Vec<Vec<String>> = (0..SYNTHETIC_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut f = Vec::new();
            let tag = format!("instance {i}");
            let mut rng = stream(cfg.seed, &[domain::SYNTHETIC, i as u64]);
            let n = rng.random_range(5..=10usize);
            let k = rng.random_range(2..=n / 2);
            let m = rng.random_range(2..=4usize);
            let r = rng.random_range(0.5..2.0f64);
            let c = rng.random_range(0.0..1.0f64) / (r * r);
            let tag = format!("{tag} (n={n} k={k})");
            let (_, spec) = match einstein_torus(n, k, r, c, m) {
                Ok(x) => x,
                Err(e) => return vec![format!("{tag}: {e}")],
            };
            let (e1, e2) = crate::models::torus_principal_normals(&spec);
            let (lambdas, mus): (Vec<f64>, Vec<f64>) = (e1.iter().copied().collect(), e2.iter().copied().collect());
            let (clean, q, o) = match equality_case_synthetic_parts(n, k, &lambdas, &mus, c, cfg.seed ^ i as u64) {
                Ok(x) => x,
                Err(e) => return vec![format!("{tag}: {e}")],
            };
            let noise: Vec<_> = (0..m).map(|_| gaussian_matrix(&mut rng, n, n) * 1e-12).collect();
            let p = match clean.perturbed(&noise) {
                Ok(p) => p,
                Err(e) => return vec![format!("{tag}: {e}")],
            };
            let Some(s) = equality_case_detect_seeded(&p, k, cfg.tolerances.detection, cfg.seed) else {
                return vec![format!("{tag}: no structure detected")];
            };
            let truth = q.columns(0, k) * q.columns(0, k).transpose();
            let mut l_true = &o * DVector::from_vec(lambdas);
            let mut m_true = &o * DVector::from_vec(mus);
            let mut proj_err = sym_op_norm(&(s.lambda_projector() - &truth));
            // Equal block sizes leave the λ/μ labels interchangeable.
            if n == 2 * k {
                let swapped = sym_op_norm(&(s.mu_projector() - &truth));
                if swapped < proj_err {
                    proj_err = swapped;
                    std::mem::swap(&mut l_true, &mut m_true);
                }
            }
            if s.k != k || proj_err > 1e-8 {
                f.push(format!("{tag}: projector error {proj_err:e}"));
            }
            let h = mean_curvature_vector(&p);
            let nf = n as f64;
            for a in 0..m {
                if (s.lambdas[a] - l_true[a]).abs() > 1e-8 || (s.mus[a] - m_true[a]).abs() > 1e-8 {
                    f.push(format!("{tag}: eigenvalue pair {a}"));
                }
                let tr = k as f64 * s.lambdas[a] + (nf - k as f64) * s.mus[a] - nf * h.components[a];
                if tr.abs() > 1e-10 {
                    f.push(format!("{tag}: trace identity off by {tr:e}"));
                }
            }
            let alpha: f64 = alpha_coefficient::<f64>(n as u32, k as u32).unwrap_or(f64::NAN) * (c + h.h_sq);
            let ric = ricci_tensor(&p);
            for i in 0..n {
                if (ric[(i, i)] - alpha).abs() > 1e-9 {
                    f.push(format!("{tag}: Ric diagonal off by {:e}", ric[(i, i)] - alpha));
                    break;
                }
            }
            let rotated = s.basis.transpose() * &ric * &s.basis;
            let off = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| rotated[(i, j)].abs())
                .fold(0.0, f64::max);
            if off > 1e-10 {
                f.push(format!("{tag}: Ric off-diagonal {off:e}"));
            }
            f
        })
        .collect();
    let failures = per.into_iter().flatten().collect();
    outcome(
        6,
        "equality-case detector round trip",
        failures,
        format!("{SYNTHETIC_INSTANCES} synthetic instances"),
    )
}

fn optimizer_vs_subsets(cfg: &RunConfig) -> CriterionOutcome {
    let families: Vec<(bool, Vec<String>, Option<f64>)> = (0..2 * OPTIMIZER_FAMILIES)
        .into_par_iter()
        .map(|i| {
            let commuting = i < OPTIMIZER_FAMILIES;
            let mut rng = stream(cfg.seed, &[domain::VALIDATION, i as u64]);
            let n = rng.random_range(5..=8usize);
            let q = rng.random_range(2..=4usize);
            let m = rng.random_range(1..=3usize);
            let c = rng.random_range(0.0..1.0f64);
            let ops: Vec<_> = if commuting {
                let frame = random_orthogonal(&mut rng, n);
                (0..m)
                    .map(|_| {
                        let d = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                        &frame * DMatrix::from_diagonal(&d) * frame.transpose()
                    })
                    .collect()
            } else {
                (0..m).map(|_| gaussian_symmetric(&mut rng, n)).collect()
            };
            let tag = format!("family {i} (n={n} q={q} m={m})");
            let p = match PointData::new(n, c, ops) {
                Ok(p) => p,
                Err(e) => return (commuting, vec![format!("{tag}: {e}")], None),
            };
            let res = match maximize_theta(&p, q, &cfg.optimizer(i as u64)) {
                Ok(r) => r,
                Err(e) => return (commuting, vec![format!("{tag}: {e}")], None),
            };
            let mut f = Vec::new();
            if commuting {
                let basis = generic_combination_eigen(&p, cfg.seed, 0).1;
                let (oracle, _) = coordinate_subset_max(&p, &basis, q);
                let rel = (res.value - oracle).abs() / (1.0 + oracle.abs());
                if rel > 1e-6 {
                    f.push(format!(
                        "{tag}: optimum {:.9} vs subset search {:.9}",
                        res.value, oracle
                    ));
                }
                if !res.global_certified {
                    f.push(format!("{tag}: not certified"));
                }
                (commuting, f, Some(res.value - oracle))
            } else {
                let (oracle, _) = coordinate_subset_max(&p, &DMatrix::identity(n, n), q);
                if res.value < oracle - 1e-9 {
                    f.push(format!("{tag}: optimum {} below subset value {oracle}", res.value));
                }
                (commuting, f, None)
            }
        })
        .collect();
    let above = families
        .iter()
        .filter(|(_, _, gap)| gap.is_some_and(|g| g > 1e-6))
        .count();
    let commuting_fail = families.iter().filter(|(c, f, _)| *c && !f.is_empty()).count();
    let generic_fail = families.iter().filter(|(c, f, _)| !*c && !f.is_empty()).count();
    let failures = families.into_iter().flat_map(|(_, f, _)| f).collect();
    outcome(
        7,
        "optimizer against coordinate-subset search",
        failures,
        format!(
            "commuting: {commuting_fail}/{OPTIMIZER_FAMILIES} fail ({above} with planes above every coordinate subset); generic: {generic_fail}/{OPTIMIZER_FAMILIES} fail"
        ),
    )
}

fn end_to_end(cfg: &RunConfig) -> CriterionOutcome {
    let mut failures = Vec::new();
    match clifford_minimal(3, 1.0, 0.0, 2) {
        Ok((p, spec)) => {
            if (spec.h - 1.0).abs() > 1e-12 {
                failures.push(format!("Clifford H = {}", spec.h));
            }
            if (ricci_tensor(&p) - DMatrix::identity(6, 6) * 4.0).amax() > 1e-10 {
                failures.push("Clifford Ricci is not 4 I".into());
            }
            match classify_point(&p, 3, &cfg.optimizer(0)) {
                Ok(v) if v.verdict == PointClass::EqualityTorusStructure => {}
                Ok(v) => failures.push(format!("Clifford classified {}", v.verdict.as_str())),
                Err(e) => failures.push(format!("Clifford: {e}")),
            }
        }
        Err(e) => failures.push(format!("Clifford: {e}")),
    }
    match umbilical_sphere(6, 1, 0.0, 1.0).and_then(|p| classify_point(&p, 3, &cfg.optimizer(1))) {
        Ok(v) if v.verdict == PointClass::StrictPinchedVanishing => {}
        Ok(v) => failures.push(format!("sphere classified {}", v.verdict.as_str())),
        Err(e) => failures.push(format!("sphere: {e}")),
    }
    outcome(
        8,
        "classification of the Clifford torus and a round sphere",
        failures,
        "2 models".into(),
    )
}

fn dual_paths(instances: &[PinchedInstance], cfg: &RunConfig) -> CriterionOutcome {
    let mut failures = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let p = &inst.point;
        let tr = trace(&ricci_tensor(p));
        let id = scalar_curvature_identity(p);
        let scale = 1.0f64.max(id.abs()).max(sff_norm_sq(p));
        if (tr - id).abs() > 1e-12 * scale {
            failures.push(format!("instance {i}: trace {tr} vs identity {id}"));
        }
    }
    let splits: Vec<Option<String>> = (0..SPLIT_SAMPLES)
        .into_par_iter()
        .map(|j| {
            let inst = &instances[j % instances.len()];
            let p = &inst.point;
            let n = p.n();
            let mut rng = stream(cfg.seed, &[domain::VALIDATION, 1 << 32 | j as u64]);
            let q = rng.random_range(1..n);
            let split = SubspaceSplit::new(q, random_orthogonal(&mut rng, n)).ok()?;
            let a = theta_q_basis(p, &split);
            let b = theta_q_subspace(p, &split.projector());
            match (a, b) {
                (Ok(a), Ok(b)) if (a - b).abs() <= 1e-10 * (1.0 + a.abs()) => None,
                (Ok(a), Ok(b)) => Some(format!("split {j}: basis {a} vs subspace {b}")),
                (Err(e), _) | (_, Err(e)) => Some(format!("split {j}: {e}")),
            }
        })
        .collect();
    failures.extend(splits.into_iter().flatten());
    outcome(
        9,
        "scalar curvature and theta dual paths",
        failures,
        format!("{} instances, {SPLIT_SAMPLES} splits", instances.len()),
    )
}

/// Runs criteria 1 to 9 inside a pool of `cfg.workers` threads.
pub fn run_reproduction(cfg: &RunConfig) -> Result<ReproductionReport> {
    cfg.install(|| -> Result<ReproductionReport> {
        let (instances, _) = pinched_sweep(cfg.seed, SWEEP_INSTANCES)?;
        let criteria = vec![
            odd_coefficient(),
            torus_identities(),
            trichotomy(),
            phi_and_range(),
            chain_sweep(&instances, cfg),
            detector_round_trip(cfg),
            optimizer_vs_subsets(cfg),
            end_to_end(cfg),
            dual_paths(&instances, cfg),
        ];
        Ok(ReproductionReport {
            seed: cfg.seed,
            criteria,
        })
    })?
}
