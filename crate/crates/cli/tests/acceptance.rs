//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use holo_core::cohomology::{goldman_form, h1_basis, stabilizer_class, Cocycle, Stabilizer};
use holo_core::reduction::{
    lift_from_sphere, moment, random_abelian_boundary_point, random_abelian_traceless_point, random_traceless_point,
    restrict_to_sphere, submersion_probe, ProbeHypothesis, ProbeMap,
};
use holo_core::sampling::{random_im, stream};
use holo_core::solver::{
    fingerprint, fingerprint_distance, kernel_dimension, local_rank, polish, residual, solve_raw, solve_variety, Ansatz,
    ConstraintSet, SolverConfig,
};
use holo_core::surface::{
    builtin_curves, flow_cocycle, hamiltonian_fc, random_abelian_point, random_central_point, random_point,
    surface_presentation, twist_flow, CurveDatum, SurfaceModel,
};
use holo_core::tangles::{earring_family, earring_tangle, sphere_tangle, trivial_tangle, EarringFamilyParams};
use holo_core::words::eval_word;
use holo_core::{Representation, UnitQuaternion};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn cfg(restarts: usize, seed: u64) -> SolverConfig {
    SolverConfig { restarts, seed, ..Default::default() }
}

fn class_count(c: &ConstraintSet, restarts: usize) -> Result<usize, String> {
    Ok(solve_variety(c, &cfg(restarts, 1)).map_err(e)?.len())
}

fn c1_abelian_sphere() -> Outcome {
    let mut got = Vec::new();
    for (n, want, restarts) in [(2, 4, 200), (3, 16, 800)] {
        let c = sphere_tangle(n).map_err(e)?.constraints(true, true, Ansatz::Abelian);
        let k = class_count(&c, restarts)?;
        check(k == want, format!("n={n}: {k} classes, expected {want}"))?;
        got.push(format!("n={n}: {k}"));
    }
    Ok(got.join(", "))
}

fn c2_central_surface() -> Outcome {
    let mut got = Vec::new();
    for (n, want, restarts) in [(2, 16, 300), (3, 64, 1500)] {
        let model = surface_presentation(n).map_err(e)?;
        let mut c = ConstraintSet::new(model.presentation.clone());
        c.ansatz = Ansatz::Central;
        let k = class_count(&c, restarts)?;
        check(k == want, format!("n={n}: {k} classes, expected {want}"))?;
        got.push(format!("n={n}: {k}"));
    }
    Ok(got.join(", "))
}

fn c3_trivial_abelian() -> Outcome {
    let mut got = Vec::new();
    for (n, want) in [(2, 2), (3, 4), (4, 8)] {
        let c = trivial_tangle(n).map_err(e)?.constraints(true, true, Ansatz::Abelian);
        let k = class_count(&c, 100 * want)?;
        check(k == want, format!("n={n}: {k} classes, expected {want}"))?;
        got.push(format!("n={n}: {k}"));
    }
    Ok(got.join(", "))
}

/// Local ranks at the first 50 irreducible solver points.
fn ranks_at_irreducible(c: &ConstraintSet, want: usize, label: &str) -> Result<String, String> {
    let pts = solve_raw(c, &cfg(120, 4)).map_err(e)?;
    let irr: Vec<_> = pts.iter().filter(|p| p.stabilizer == Stabilizer::Irreducible).take(50).collect();
    check(irr.len() == 50, format!("{label}: only {} irreducible points", irr.len()))?;
    for p in irr {
        let r = local_rank(c, p).map_err(e)?;
        check(r == want, format!("{label}: local rank {r}, expected {want}"))?;
    }
    Ok(format!("{label} {want}"))
}

fn c4_dimensions() -> Outcome {
    let mut got = Vec::new();
    for n in [2, 3] {
        let c = sphere_tangle(n).map_err(e)?.constraints(true, false, Ansatz::None);
        got.push(ranks_at_irreducible(&c, 4 * n - 6, &format!("R(S2,{})", 2 * n))?);
    }
    for n in [2, 3, 4] {
        let c = trivial_tangle(n).map_err(e)?.constraints(true, false, Ansatz::None);
        got.push(ranks_at_irreducible(&c, 2 * n - 3, &format!("trivial{n}"))?);
    }
    for n in [2, 3] {
        let model = surface_presentation(n).map_err(e)?;
        let mut rng = stream(40 + n as u64, 0);
        for _ in 0..50 {
            let rho = random_point(&model, &mut rng);
            check(stabilizer_class(&rho) == Stabilizer::Irreducible, "surface sample not irreducible")?;
            let d = h1_basis(&model.presentation, &rho, &[]).map_err(e)?.ncols();
            check(d == 6 * n - 6, format!("genus {n}: dim H1 {d}, expected {}", 6 * n - 6))?;
        }
        got.push(format!("genus{n} {}", 6 * n - 6));
    }
    Ok(got.join(", "))
}

fn c5_earring() -> Outcome {
    let mut rng = stream(5, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let eps = rng.random_range(1e-3..=0.2);
        let beta = rng.random_range(0.0..std::f64::consts::TAU);
        let c = earring_tangle(eps).constraints(true, false, Ansatz::None);
        let r = residual(&c, &earring_family(EarringFamilyParams::new(eps, beta))).map_err(e)?.amax();
        worst = worst.max(r);
    }
    check(worst < 1e-12, format!("family residual {worst:.2e}"))?;
    let eps = 0.2;
    let steps = 256;
    let fp = |k: usize| {
        let beta = std::f64::consts::TAU * k as f64 / steps as f64;
        fingerprint(&earring_family(EarringFamilyParams::new(eps, beta)))
    };
    let mut max_step = 0.0f64;
    for k in 0..steps {
        max_step = max_step.max(fingerprint_distance(&fp(k), &fp(k + 1)));
    }
    let gap = fingerprint_distance(&fp(0), &fp(steps));
    check(gap < 1e-9, format!("sweep endpoint distance {gap:.2e}"))?;
    check(max_step < 0.1, format!("sweep jumps by {max_step:.2e}"))?;
    Ok(format!("max residual {worst:.1e}, endpoint gap {gap:.1e}, max step {max_step:.3}"))
}

fn stratum_points(model: &SurfaceModel, seed: u64) -> Vec<(Stabilizer, Representation)> {
    let mut rng = stream(seed, 0);
    let mut out = Vec::new();
    for _ in 0..20 {
        out.push((Stabilizer::Irreducible, random_point(model, &mut rng)));
        out.push((Stabilizer::Abelian, random_abelian_point(model, &mut rng)));
        out.push((Stabilizer::Central, random_central_point(model, &mut rng)));
    }
    out
}

fn c6_flow_suite() -> Outcome {
    let (mut rel, mut add, mut cons) = (0.0f64, 0.0f64, 0.0f64);
    let mut total = 0;
    for n in [2, 3] {
        let model = surface_presentation(n).map_err(e)?;
        let curves = builtin_curves(n).map_err(e)?;
        check(curves.iter().all(|c| c.complete), format!("incomplete curve data at n={n}"))?;
        let points = stratum_points(&model, 60 + n as u64);
        let mut rng = stream(61, n as u64);
        for c in &curves {
            for (stratum, rho) in &points {
                check(stabilizer_class(rho) == *stratum, "sample landed in the wrong stratum")?;
                let s = rng.random_range(-1.0..1.0);
                let t = rng.random_range(-1.0..1.0);
                let a = twist_flow(rho, c, t).map_err(e)?;
                let ab = twist_flow(&a, c, s).map_err(e)?;
                let direct = twist_flow(rho, c, s + t).map_err(e)?;
                rel = rel.max(model.relation_error(&a).map_err(e)?);
                add = add.max(ab.max_distance(&direct));
                let f0 = eval_word(&c.curve_word, rho).map_err(e)?.re();
                let f1 = eval_word(&c.curve_word, &a).map_err(e)?.re();
                cons = cons.max((f1 - f0).abs());
                let st = stabilizer_class(&a);
                check(st == *stratum, format!("{}: stratum {stratum} flowed to {st}", c.name))?;
                total += 1;
            }
        }
    }
    check(rel < 1e-8, format!("relation error {rel:.2e}"))?;
    check(add < 1e-8, format!("additivity defect {add:.2e}"))?;
    check(cons < 1e-9, format!("conservation defect {cons:.2e}"))?;
    Ok(format!("{total} flows: relation {rel:.1e}, additivity {add:.1e}, conservation {cons:.1e}"))
}

/// Right-translated perturbation `E ↦ e^{s v(E)} ρ(E)`.
fn push(rho: &Representation, v: &Cocycle, s: f64) -> Representation {
    let mut out = rho.clone();
    for (g, x) in out.values_mut().iter_mut().zip(v.values()) {
        *g = holo_core::su2::exp_im(x.scale(s)) * *g;
    }
    out
}

fn c7_hamiltonian() -> Outcome {
    let model = surface_presentation(2).map_err(e)?;
    let curves = builtin_curves(2).map_err(e)?;
    let mut rng = stream(7, 0);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rho = random_point(&model, &mut rng);
        let basis = h1_basis(&model.presentation, &rho, &[]).map_err(e)?;
        let names = rho.names().to_vec();
        for _ in 0..10 {
            let coeffs: DVector<f64> = DVector::from_iterator(basis.ncols(), (0..basis.ncols()).map(|_| random_im(&mut rng, 1.0).x));
            let v = Cocycle::from_vector(&names, &(&basis * coeffs));
            for c in &curves {
                let z = flow_cocycle(&rho, c).map_err(e)?;
                let omega = goldman_form(&model.presentation, &rho, &z, &v).map_err(e)?;
                let fp = hamiltonian_fc(&push(&rho, &v, h), c, 1.0).map_err(e)?;
                let fm = hamiltonian_fc(&push(&rho, &v, -h), c, 1.0).map_err(e)?;
                worst = worst.max((omega - (fp - fm) / (2.0 * h)).abs());
            }
        }
    }
    check(worst < 1e-5, format!("max |ω(z_C, v) − D_v f_C| = {worst:.2e}"))?;
    Ok(format!("200 (ρ, v) pairs x 22 curves, max defect {worst:.1e}"))
}

fn probe_rank(
    model: &SurfaceModel,
    curves: &[&CurveDatum],
    rho: &Representation,
    map: ProbeMap,
    hyp: ProbeHypothesis,
) -> Result<usize, String> {
    submersion_probe(model, map, rho, curves, hyp).map_err(e)
}

fn c8_probes() -> Outcome {
    let mut got = Vec::new();
    for n in [2, 3] {
        let model = surface_presentation(n).map_err(e)?;
        let lib = builtin_curves(n).map_err(e)?;
        let curves: Vec<&CurveDatum> = lib.iter().collect();
        let mut rng = stream(8, n as u64);
        for _ in 0..20 {
            let rho = random_traceless_point(&model, &mut rng);
            let r = probe_rank(&model, &curves, &rho, ProbeMap::TraceAfterFlow, ProbeHypothesis::IrreducibleBoundary)?;
            check(r == n, format!("irreducible boundary, n={n}: rank {r}"))?;
            let rho = random_abelian_traceless_point(&model, &mut rng);
            let r = probe_rank(&model, &curves, &rho, ProbeMap::TraceAfterFlow, ProbeHypothesis::Abelian)?;
            check(r == n, format!("abelian, n={n}: rank {r}"))?;
        }
        got.push(format!("T-rank {n} at n={n}"));
    }
    let model = surface_presentation(2).map_err(e)?;
    let lib = builtin_curves(2).map_err(e)?;
    let curves: Vec<&CurveDatum> = lib.iter().collect();
    let mut rng = stream(8, 9);
    for _ in 0..5 {
        let rho = random_abelian_boundary_point(&model, &mut rng).map_err(e)?;
        let r = probe_rank(&model, &curves, &rho, ProbeMap::H1AfterFlow, ProbeHypothesis::IrreducibleAbelianBoundary)?;
        check(r == 6, format!("H1 probe rank {r}, expected 6"))?;
    }
    got.push("H1-rank 6 at n=2".into());
    Ok(got.join(", "))
}

fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter()
            .map(|p| y.iter().map(|q| fingerprint_distance(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

fn c9_reduction() -> Outcome {
    let model = surface_presentation(2).map_err(e)?;
    let sphere = sphere_tangle(2).map_err(e)?;
    let c = sphere.constraints(true, false, Ansatz::None);
    let gens = c.generators().to_vec();
    let mut rng = stream(9, 0);
    let (mut restricted, mut polished) = (Vec::new(), Vec::new());
    for _ in 0..1000 {
        let rho = random_traceless_point(&model, &mut rng);
        let m = moment(&model, &rho).map_err(e)?;
        check(m.mu.iter().all(|x| x.abs() < 1e-12), "sample is off the zero level")?;
        let s = restrict_to_sphere(&model, &rho).map_err(e)?.reordered(&gens).map_err(e)?;
        let p = polish(&c, &s, 50).map_err(e)?;
        check(p.residual < 1e-9, format!("restriction residual {:.2e}", p.residual))?;
        restricted.push(fingerprint(&s));
        polished.push(p.fingerprint);
    }
    let direct = solve_raw(&c, &cfg(1000, 9)).map_err(e)?;
    check(direct.len() >= 900, format!("only {} direct solutions converged", direct.len()))?;
    let mut relifted = Vec::new();
    for p in &direct {
        let twists = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let lift = lift_from_sphere(&model, &p.rep, &twists).map_err(e)?;
        let err = model.relation_error(&lift).map_err(e)?;
        check(err < 1e-8, format!("lift relation error {err:.2e}"))?;
        let m = moment(&model, &lift).map_err(e)?;
        check(m.mu.iter().all(|x| x.abs() < 1e-9), "lift is off the zero level")?;
        let s = restrict_to_sphere(&model, &lift).map_err(e)?.reordered(&gens).map_err(e)?;
        relifted.push(fingerprint(&s));
    }
    let restricted_all: Vec<_> = restricted.into_iter().chain(relifted).collect();
    let solved_all: Vec<_> = polished.into_iter().chain(direct.into_iter().map(|p| p.fingerprint)).collect();
    let d = hausdorff(&restricted_all, &solved_all);
    check(d < 1e-5, format!("Hausdorff distance {d:.2e}"))?;
    Ok(format!("{} + {} samples, Hausdorff distance {d:.1e}", 1000, restricted_all.len() - 1000))
}

fn fd_jacobian(c: &ConstraintSet, rho: &Representation) -> Result<DMatrix<f64>, String> {
    let h = 1e-6;
    let r0 = residual(c, rho).map_err(e)?;
    let mut j = DMatrix::zeros(r0.len(), 3 * rho.len());
    for g in 0..rho.len() {
        for a in 0..3 {
            let mut xi = [0.0; 3];
            xi[a] = h;
            let step = holo_core::su2::exp_im(holo_core::ImVector::from_array(xi));
            let mut p = rho.clone();
            p.values_mut()[g] = step * p.values()[g];
            let mut m = rho.clone();
            m.values_mut()[g] = step.inverse() * m.values()[g];
            let d = (residual(c, &p).map_err(e)? - residual(c, &m).map_err(e)?) / (2.0 * h);
            j.set_column(3 * g + a, &d);
        }
    }
    Ok(j)
}

fn c10_cone() -> Outcome {
    let n = 3;
    let c = trivial_tangle(n).map_err(e)?.constraints(true, false, Ansatz::None);
    let i = UnitQuaternion::I;
    let classes =
        [vec![i, i, i], vec![i, i, i.neg()], vec![i, i.neg(), i], vec![i, i.neg(), i.neg()]];
    let mut rng = stream(10, 0);
    let mut far = 0.0f64;
    for k in 0..200 {
        let base = Representation::new(c.generators().to_vec(), classes[k % 4].clone()).map_err(e)?;
        let mut start = base.clone();
        for g in start.values_mut() {
            let xi = random_im(&mut rng, 1.0);
            let xi = xi.scale(rng.random_range(0.005..0.02) / xi.norm());
            *g = holo_core::su2::exp_im(xi) * *g;
        }
        let p = polish(&c, &start, 50).map_err(e)?;
        check(p.residual < 1e-9, format!("polish residual {:.2e}", p.residual))?;
        let dist = p.rep.max_distance(&base);
        far = far.max(dist);
        check(dist <= 0.05, format!("polished point at distance {dist:.3}"))?;
        check(p.stabilizer == Stabilizer::Irreducible, format!("point {k} is {}", p.stabilizer))?;
    }
    let mut kernels = Vec::new();
    for cls in &classes {
        let rho = Representation::new(c.generators().to_vec(), cls.clone()).map_err(e)?;
        let transverse = kernel_dimension(&c, &rho).map_err(e)? - 2;
        check(transverse == 2 * n - 2, format!("transverse kernel {transverse}, expected {}", 2 * n - 2))?;
        let oracle = holo_core::linalg::nullity(&fd_jacobian(&c, &rho)?) - 2;
        check(oracle == transverse, format!("finite-difference kernel {oracle} differs"))?;
        kernels.push(transverse);
    }
    Ok(format!("200 irreducible points within {far:.3}; transverse kernel {:?}", kernels))
}

fn c11_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("holo-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(e)?;
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/trivial2.json");
    let run = |k: usize| -> Result<Vec<u8>, String> {
        let out = dir.join(format!("points{k}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_holo"))
            .args(["solve", fixture.to_str().unwrap(), "--traceless", "--seed", "11", "--restarts", "96", "--out"])
            .arg(&out)
            .output()
            .map_err(e)?;
        check(status.status.success(), format!("holo solve failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        let mut bytes = std::fs::read(&out).map_err(e)?;
        bytes.extend_from_slice(&status.stdout);
        Ok(bytes)
    };
    let a = run(0)?;
    let b = run(1)?;
    let _ = std::fs::remove_dir_all(&dir);
    check(a == b, "outputs differ between runs")?;
    Ok(format!("two runs, {} identical bytes", a.len()))
}

fn main() {
    let criteria: [(&str, Option<Duration>, fn() -> Outcome); 11] = [
        ("abelian punctured-sphere classes", Some(Duration::from_secs(10)), c1_abelian_sphere),
        ("central surface classes", Some(Duration::from_secs(5)), c2_central_surface),
        ("trivial tangle abelian classes", Some(Duration::from_secs(30)), c3_trivial_abelian),
        ("local dimensions", Some(Duration::from_secs(120)), c4_dimensions),
        ("earring circle", None, c5_earring),
        ("flow suite", Some(Duration::from_secs(300)), c6_flow_suite),
        ("Hamiltonian identity", None, c7_hamiltonian),
        ("submersion probes", None, c8_probes),
        ("reduction consistency", None, c9_reduction),
        ("local cone probe", None, c10_cone),
        ("determinism", None, c11_determinism),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let mut outcome = f();
        let dt = t0.elapsed();
        if let (Ok(_), Some(l)) = (&outcome, limit) {
            if dt > *l {
                outcome = Err(format!("took {:.1} s, limit {} s", dt.as_secs_f64(), l.as_secs()));
            }
        }
        let (tag, msg) = match outcome {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} {:>2} {name}: {msg} [{:.2} s]", k + 1, dt.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
