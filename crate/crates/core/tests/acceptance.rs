//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cgbounds::certificate::{dual_family, gallery_certificate, FamilySet, Num, GALLERY};
use cgbounds::dynamics::{is_eps_pne, PotentialKind};
use cgbounds::gallery::{
    default_pad, eps_ty, gen_eps_poa_weighted, gen_fair_sharing_chain, gen_poa_unweighted_affine,
    gen_poa_weighted_affine, gen_pos_poly_lb, load_ratios, psi_ty,
};
use cgbounds::metrics::{exact_poa_pos, DEFAULT_PROFILE_CAP};
use cgbounds::primal::strong_duality_check;
use cgbounds::report::{figure1, figure2};
use cgbounds::scalar::{int, rat, rational_to_f64};
use cgbounds::verify::{verify_dual_certificate, Status, VerifyOptions};
use cgbounds::{BigRational, Game, Social};
use common::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn opts() -> VerifyOptions {
    VerifyOptions { bound: 2000, ..VerifyOptions::default() }
}

fn within(label: &str, start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure!(took <= limit, "{label} took {:.2?}, limit {:.0?}", took, limit);
    Ok(())
}

fn c1() -> Outcome {
    let start = Instant::now();
    let inst = gen_poa_unweighted_affine(3).map_err(|e| e.to_string())?;
    let g: Game<Q> = inst.game().map_err(|e| e.to_string())?;
    let r = exact_poa_pos(&g, &int(0), Social::Sum, DEFAULT_PROFILE_CAP).map_err(|e| e.to_string())?;
    within("exact PoA", start, Duration::from_secs(1))?;
    let poa = r.poa.ok_or("no equilibrium")?;
    ensure!(poa == rat(5, 2), "PoA = {poa}, expected 5/2");
    Ok(format!("PoA = {poa} in {:.0?}", start.elapsed()))
}

fn c2() -> Outcome {
    let start = Instant::now();
    let g: Game<f64> = gen_poa_weighted_affine().game().map_err(|e| e.to_string())?;
    let r = exact_poa_pos(&g, &0.0, Social::Sum, DEFAULT_PROFILE_CAP).map_err(|e| e.to_string())?;
    within("exact PoA", start, Duration::from_secs(1))?;
    let poa = r.poa.ok_or("no equilibrium")?;
    let want = (3.0 + 5f64.sqrt()) / 2.0;
    ensure!((poa - want).abs() <= 1e-9, "PoA = {poa:.12}, expected {want:.12}");
    Ok(format!("PoA = {poa:.12} in {:.0?}", start.elapsed()))
}

fn has_ray(rays: &[f64], slope: f64) -> bool {
    rays.iter().any(|r| (r - slope).abs() <= 1e-6 * slope)
}

fn exact_zero_at(id: &str, k: u64, o: u64) -> Result<bool, String> {
    let cert = gallery_certificate(id, &int(0), 1).map_err(|e| e.to_string())?;
    match dual_family(&cert).map_err(|e| e.to_string())? {
        FamilySet::Exact(fams) => Ok(fams.iter().any(|f| f.body.eval(k, o) == int(0))),
        FamilySet::Float(_) => Err(format!("{id} is not exact")),
    }
}

fn c3() -> Outcome {
    let start = Instant::now();
    let eps_grid = [int(0), rat(1, 4), rat(1, 2), int(1), int(2)];
    let mut checked = 0;
    for entry in GALLERY {
        let eps_values: Vec<BigRational> = if entry.uses_eps { eps_grid.to_vec() } else { vec![int(0)] };
        let n_values: Vec<usize> = if entry.uses_n { (1..=10).chain([16, 25]).collect() } else { vec![4] };
        for eps in &eps_values {
            for &n in &n_values {
                let cert = match gallery_certificate(entry.id, eps, n) {
                    Ok(c) => c,
                    Err(cgbounds::Error::ParameterOutOfRange(_)) => continue,
                    Err(e) => return Err(e.to_string()),
                };
                let v = verify_dual_certificate(&cert, &opts()).map_err(|e| e.to_string())?;
                ensure!(v.status == Status::Proven, "{} at ε = {eps}, n = {n}: {}", entry.id, v.status.as_str());
                checked += 1;
            }
        }
    }
    let poa = verify_dual_certificate(&gallery_certificate("poa-un", &int(0), 1).unwrap(), &opts()).unwrap();
    let tight = poa.tight();
    ensure!(tight.contains(&(1, 1)) && tight.contains(&(2, 1)), "poa-un tight pairs {tight:?}");
    let apx2 = verify_dual_certificate(&gallery_certificate("apx-quadratic", &int(0), 1).unwrap(), &opts()).unwrap();
    ensure!(apx2.tight().contains(&(3, 1)), "apx-quadratic tight pairs {:?}", apx2.tight());
    let apx3 = verify_dual_certificate(&gallery_certificate("apx-cubic", &int(0), 1).unwrap(), &opts()).unwrap();
    ensure!(apx3.tight().contains(&(4, 1)), "apx-cubic tight pairs {:?}", apx3.tight());
    ensure!(exact_zero_at("apx-cubic", 4, 1)?, "apx-cubic family is not exactly zero at (4,1)");
    let pos = verify_dual_certificate(&gallery_certificate("pos-un", &int(0), 1).unwrap(), &opts()).unwrap();
    ensure!(has_ray(&pos.tight_rays(), 2.0 + 3f64.sqrt()), "pos-un rays {:?}", pos.tight_rays());
    within("gallery sweep", start, Duration::from_secs(60))?;
    Ok(format!("{checked} certificates proven in {:.1?}", start.elapsed()))
}

fn c4() -> Outcome {
    let start = Instant::now();
    let inst = gen_poa_unweighted_affine(3).map_err(|e| e.to_string())?;
    let g: Game<Q> = inst.game().map_err(|e| e.to_string())?;
    let cert = gallery_certificate("poa-un", &int(0), 3).map_err(|e| e.to_string())?;
    let d = strong_duality_check(&g, &inst.k, &inst.o, &cert).map_err(|e| e.to_string())?;
    within("strong duality", start, Duration::from_secs(1))?;
    ensure!(d.primal == Some(rat(5, 2)), "LP(K,O) = {:?}", d.primal);
    ensure!(cert.gamma.as_rational() == Some(&rat(5, 2)), "γ = {}", cert.gamma);
    ensure!(d.weak_duality && d.tight, "weak {}, tight {}", d.weak_duality, d.tight);
    Ok(format!("LP(K,O) = γ = 5/2 in {:.0?}", start.elapsed()))
}

fn psi(eps: f64) -> f64 {
    (1.0 + eps + (eps * eps + 6.0 * eps + 5.0).sqrt()) / 2.0
}

fn figure1_formula(measure: &str, setting: &str, eps: f64) -> Option<f64> {
    let (s3, s5) = (3f64.sqrt(), 5f64.sqrt());
    Some(match (measure, setting) {
        ("eps-PoA", "unweighted") => {
            let z = psi(eps).floor();
            (1.0 + eps) * (z * z + 3.0 * z + 1.0) / (2.0 * z - eps)
        }
        ("eps-PoA", "weighted") => psi(eps).powi(2),
        ("eps-PoS", "unweighted") => (1.0 + s3) / (eps + s3),
        ("eps-PoS", "weighted") => 2.0 / (1.0 + eps),
        ("Apx one-round walk", "unweighted") => 2.0 + s5,
        ("Apx one-round walk", "weighted") => 4.0 + 2.0 * s3,
        _ => return None,
    })
}

fn c5() -> Outcome {
    let report = figure1(&[int(0), rat(1, 2), int(1)], &opts()).map_err(|e| e.to_string())?;
    ensure!(report.rows.len() == 14, "{} rows", report.rows.len());
    for row in &report.rows {
        let eps = row.epsilon.as_ref().map_or(0.0, rational_to_f64);
        let want = figure1_formula(&row.measure, &row.setting, eps)
            .ok_or_else(|| format!("unexpected row {} / {}", row.measure, row.setting))?;
        let got = row.gamma.to_f64();
        ensure!((got - want).abs() <= 1e-9, "{} {} ε = {eps}: γ = {got}, formula {want}", row.measure, row.setting);
        ensure!(row.status == Some(Status::Proven), "{} {} ε = {eps}: {}", row.measure, row.setting, row.status_text());
    }
    Ok(format!("{} rows match and are proven", report.rows.len()))
}

fn c6() -> Outcome {
    let report = figure2(&opts()).map_err(|e| e.to_string())?;
    let expect = [("PoS", "quadratic", rat(2362, 1000)), ("PoS", "cubic", rat(3322, 1000)), (
        "Apx one-round walk",
        "quadratic",
        rat(375888, 10000),
    ), ("Apx one-round walk", "cubic", rat(17929, 34))];
    for (measure, setting, gamma) in expect {
        let row = report
            .rows
            .iter()
            .find(|r| r.measure == measure && r.setting == setting)
            .ok_or_else(|| format!("missing {measure} {setting}"))?;
        ensure!(row.gamma.as_rational() == Some(&gamma), "{measure} {setting}: γ = {}", row.gamma);
        ensure!(row.status == Some(Status::Proven), "{measure} {setting}: {}", row.status_text());
    }
    ensure!(
        report.notes.iter().any(|n| n.contains("3.321") && n.contains("3.322")),
        "no note on the 3.321 / 3.322 discrepancy"
    );
    Ok("PoS 2.362, 3.322 and Apx 37.5888, 17929/34 proven; discrepancy noted".into())
}

fn c7() -> Outcome {
    let mut cases = 0;
    for t in 1..=4u64 {
        for y in 1..=t + 1 {
            let inst = gen_eps_poa_weighted(t, y).map_err(|e| e.to_string())?;
            let g: Game<f64> = inst.game().map_err(|e| e.to_string())?;
            let eps = eps_ty(t, y).to_f64();
            ensure!(eps >= -1e-12, "ε({t},{y}) = {eps} is negative");
            let pne = is_eps_pne(&g, &inst.k, &(eps + 1e-8)).map_err(|e| e.to_string())?;
            ensure!(pne.holds, "t = {t}, y = {y}: K is not an ε-PNE ({:?})", pne.witness);
            let psi_inst = psi_ty(t, y).to_f64();
            let (ratios, clean) = load_ratios(&g, &inst.k, &inst.o);
            ensure!(clean, "t = {t}, y = {y}: K uses a resource O leaves empty");
            ensure!(
                ratios.iter().all(|r| (r - psi_inst).abs() <= 1e-8),
                "t = {t}, y = {y}: load ratios {ratios:?}, ψ = {psi_inst}"
            );
            let realized: f64 = inst.realized_ratio().map_err(|e| e.to_string())?;
            ensure!((realized - psi_inst * psi_inst).abs() <= 1e-8, "t = {t}, y = {y}: ratio {realized}");
            let gamma = psi(eps.max(0.0)).powi(2);
            ensure!(realized <= gamma + 1e-8, "t = {t}, y = {y}: ratio {realized} > γ {gamma}");
            cases += 1;
        }
    }
    Ok(format!("{cases} instances tight against ψ(ε)²"))
}

fn c8() -> Outcome {
    let two = gen_pos_poly_lb(2, (1.5595f64 * 1e5).round() as u64, 100_000, default_pad()).map_err(|e| e.to_string())?;
    let r2 = rational_to_f64(&two.ratio());
    ensure!(r2 >= 2.1849, "d = 2: ratio {r2:.6} < 2.1849");
    let three = gen_pos_poly_lb(3, (1.0988f64 * 1e4).round() as u64, 10_000, default_pad()).map_err(|e| e.to_string())?;
    let r3 = rational_to_f64(&three.ratio());
    ensure!(r3 >= 2.7548, "d = 3: ratio {r3:.6} < 2.7548");
    Ok(format!("d = 2 reaches {r2:.6}, d = 3 reaches {r3:.6}"))
}

fn c9() -> Outcome {
    let runs: Vec<(&str, Result<(), String>)> = vec![
        ("potential d=1", run(901, CASES, unweighted(1, false, 3, 3), |s| potential_identity(&s, &PotentialKind::RosenthalExact(1)))),
        ("potential d=2", run(902, CASES, unweighted(2, false, 3, 3), |s| potential_identity(&s, &PotentialKind::RosenthalExact(2)))),
        ("potential d=3", run(903, CASES, unweighted(3, false, 3, 3), |s| potential_identity(&s, &PotentialKind::RosenthalExact(3)))),
        ("Φ_ε minima", run(904, CASES, (weighted_linear(3, 3), eps_grid()), |(s, e)| local_min_is_eps_pne(&s, &e))),
        ("weak duality", run(905, CASES, (unweighted(1, false, 4, 3), eps_grid()), |(s, e)| poa_weak_duality(&s, &e))),
        ("Apx <= 2+sqrt5", run(906, CASES, unweighted(1, false, 4, 3), |s| apx_bound(&s))),
    ];
    for (name, r) in &runs {
        if let Err(e) = r {
            return Err(format!("{name}: {e}"));
        }
    }
    Ok(format!("{} properties x {CASES} cases", runs.len()))
}

fn c10() -> Outcome {
    run(1001, CASES, fair(6, 4), |s| fair_pos_bound(&s)).map_err(|e| format!("random games: {e}"))?;
    for n in 1..=6 {
        let check = gen_fair_sharing_chain(n).and_then(|i| i.self_check()).map_err(|e| e.to_string())?;
        ensure!(check.passed(), "fair chain n = {n}: {}", check.to_json());
    }
    for n in 1..=10 {
        let cert = gallery_certificate("fair-harmonic", &int(0), n).map_err(|e| e.to_string())?;
        let v = verify_dual_certificate(&cert, &opts()).map_err(|e| e.to_string())?;
        ensure!(v.status == Status::Proven, "fair-harmonic n = {n}: {}", v.status.as_str());
    }
    Ok(format!("{CASES} random games, chains n <= 6, certificate n <= 10"))
}

fn c11() -> Outcome {
    for n in [4usize, 9, 16, 25] {
        let cert = gallery_certificate("max-sqrt-n", &int(0), n).map_err(|e| e.to_string())?;
        let v = verify_dual_certificate(&cert, &opts()).map_err(|e| e.to_string())?;
        ensure!(v.families.len() == 4, "n = {n}: {} families", v.families.len());
        for f in &v.families {
            ensure!(f.status == Status::Proven, "n = {n}, {}: {}", f.label, f.status.as_str());
        }
        let root = (n as f64).sqrt().round() as i64;
        let gamma = match &cert.gamma {
            Num::Exact(g) => g.clone(),
            other => return Err(format!("n = {n}: γ = {other} is not rational")),
        };
        ensure!(gamma <= int(4 * root), "n = {n}: Σz = {gamma} > 4 sqrt n");
    }
    Ok("n in {4, 9, 16, 25}: four families proven, Σz <= 4 sqrt n".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("exact PoA of the 5/2 instance", c1),
        ("exact PoA of the weighted golden instance", c2),
        ("gallery certificates proven with tight points", c3),
        ("strong duality on the 5/2 instance", c4),
        ("affine bound table", c5),
        ("polynomial bound table", c6),
        ("ε(t,y) weighted family", c7),
        ("polynomial PoS lower-bound convergence", c8),
        ("property suite", c9),
        ("fair cost sharing", c10),
        ("max social cost certificate", c11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
