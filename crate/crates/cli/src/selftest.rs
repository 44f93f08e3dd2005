//! Randomized property suites behind `holo selftest` and `--selftest`.

use std::fmt::Write as _;

use holo_core::cohomology::{d0_matrix, d1_matrix, goldman_form, h1_basis, h1_cocycles, isotropy_defect, Stabilizer};
use holo_core::reduction::{
    lift_from_sphere, pillowcase_chart, pillowcase_rep, random_abelian_traceless_point, random_traceless_point,
    restrict_to_sphere, submersion_probe, ProbeHypothesis, ProbeMap,
};
use holo_core::sampling::{random_im, random_unit_quaternion, stream};
use holo_core::solver::{
    dedup_classes, fingerprint_distance, residual, residual_jacobian, solve_raw, solve_variety, Ansatz, SolverConfig,
};
use holo_core::su2::{exp_im, log_axis, ShapeFunction};
use holo_core::surface::{builtin_curves, random_point, surface_presentation, twist_flow, CurveDatum};
use holo_core::tangles::{earring_family, earring_tangle, trivial_tangle, EarringFamilyParams};
use holo_core::words::{artin_act, braid_generator, eval_word, word_jacobian};
use holo_core::{Representation, Word};
use rand::Rng;

use crate::{CliError, CliResult};

type Check = Result<(), String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Su2,
    Words,
    Solver,
    Cohomology,
    Surface,
    Reduction,
    Probe,
    Tangles,
}

impl Suite {
    pub fn all() -> &'static [Suite] {
        &[
            Suite::Su2,
            Suite::Words,
            Suite::Solver,
            Suite::Cohomology,
            Suite::Surface,
            Suite::Reduction,
            Suite::Probe,
            Suite::Tangles,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Su2 => "su2",
            Suite::Words => "words",
            Suite::Solver => "solver",
            Suite::Cohomology => "cohomology",
            Suite::Surface => "surface",
            Suite::Reduction => "reduction",
            Suite::Probe => "probe",
            Suite::Tangles => "tangles",
        }
    }

    pub fn checks(self) -> Vec<(&'static str, fn() -> Check)> {
        match self {
            Suite::Su2 => vec![("exp/log round trip", su2_exp_log), ("shape differential", su2_shape_differential)],
            Suite::Words => vec![
                ("homomorphism", words_homomorphism),
                ("jacobian vs finite differences", words_jacobian),
                ("artin action preserves the boundary product", words_artin),
            ],
            Suite::Solver => vec![
                ("residual jacobian vs finite differences", solver_jacobian),
                ("dedup idempotent", solver_dedup),
                ("trivial 2-tangle abelian classes", solver_count),
            ],
            Suite::Cohomology => vec![("d1 d0 = 0", cohomology_complex), ("genus-2 form nondegenerate", cohomology_form)],
            Suite::Surface => vec![("flow properties", surface_flow)],
            Suite::Reduction => vec![
                ("chart conjugation invariance", reduction_chart),
                ("restrict after lift", reduction_lift),
            ],
            Suite::Probe => vec![("trace probe full rank", probe_trace)],
            Suite::Tangles => vec![("earring family on constraints", tangles_earring)],
        }
    }
}

/// Runs the suites, one line per check; exit 4 if any fails.
pub fn report(suites: &[Suite], out: &mut String) -> CliResult<()> {
    let mut failed = 0;
    for s in suites {
        for (name, f) in s.checks() {
            match f() {
                Ok(()) => writeln!(out, "ok   {}: {name}", s.name()).unwrap(),
                Err(m) => {
                    failed += 1;
                    writeln!(out, "FAIL {}: {name}: {m}", s.name()).unwrap();
                }
            }
        }
    }
    if failed > 0 {
        return Err(CliError::numeric(format!("{failed} self-test checks failed")));
    }
    Ok(())
}

fn ensure(ok: bool, m: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(m())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn su2_exp_log() -> Check {
    let mut rng = stream(1, 0);
    for _ in 0..200 {
        let g = random_unit_quaternion(&mut rng);
        let (a, q) = log_axis(g).map_err(s)?;
        let back = exp_im(q.scale(a));
        ensure(back.distance(g) < 1e-12, || format!("round trip off by {:.2e}", back.distance(g)))?;
    }
    Ok(())
}

fn su2_shape_differential() -> Check {
    let mut rng = stream(1, 1);
    let f = ShapeFunction::sine(0.3);
    let h = 1e-6;
    for _ in 0..50 {
        let g = random_unit_quaternion(&mut rng);
        let d = f.differential(g);
        let base = f.apply(g).inverse();
        for a in 0..3 {
            let mut xi = [0.0; 3];
            xi[a] = h;
            let u = holo_core::ImVector::from_array(xi);
            let fd = ((f.apply(exp_im(u) * g) * base).im() - (f.apply(exp_im(-u) * g) * base).im()).scale(0.5 / h);
            let col = d.column(a);
            let err = (fd.x - col[0]).abs().max((fd.y - col[1]).abs()).max((fd.z - col[2]).abs());
            ensure(err < 1e-6, || format!("differential defect {err:.2e}"))?;
        }
    }
    Ok(())
}

fn rand_rep(names: &[String], seed: u64) -> Representation {
    let mut rng = stream(seed, 0);
    let values = names.iter().map(|_| random_unit_quaternion(&mut rng)).collect();
    Representation::new(names.to_vec(), values).expect("matching lengths")
}

fn names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

fn words_homomorphism() -> Check {
    let rho = rand_rep(&names(3), 2);
    let u = Word::parse("x1 x2^-1 x3 x1").map_err(s)?;
    let v = Word::parse("x3^-1 x2 x2").map_err(s)?;
    let lhs = eval_word(&u.concat(&v), &rho).map_err(s)?;
    let rhs = eval_word(&u, &rho).map_err(s)? * eval_word(&v, &rho).map_err(s)?;
    ensure(lhs.distance(rhs) < 1e-14, || format!("defect {:.2e}", lhs.distance(rhs)))
}

fn words_jacobian() -> Check {
    let rho = rand_rep(&names(3), 3);
    let w = Word::parse("x1 x2^-1 x3 x1 x2").map_err(s)?;
    let blocks = word_jacobian(&w, &rho).map_err(s)?;
    let base = eval_word(&w, &rho).map_err(s)?;
    let h = 1e-6;
    for (g, block) in blocks.iter().enumerate() {
        for a in 0..3 {
            let mut xi = [0.0; 3];
            xi[a] = h;
            let mut p = rho.clone();
            p.values_mut()[g] = exp_im(holo_core::ImVector::from_array(xi)) * p.values()[g];
            let d = (eval_word(&w, &p).map_err(s)? * base.inverse()).im().scale(1.0 / h);
            let col = block.column(a);
            let err = (d.x - col[0]).abs().max((d.y - col[1]).abs()).max((d.z - col[2]).abs());
            ensure(err < 1e-5, || format!("column defect {err:.2e}"))?;
        }
    }
    Ok(())
}

fn words_artin() -> Check {
    let m = 4;
    let gens: Vec<Word> = (1..=m).map(|k| Word::gen(braid_generator(k))).collect();
    let product = Word::product(&gens);
    let braid = [1, -3, 2, 2, -1];
    let images = gens.iter().map(|g| artin_act(&braid, g, m)).collect::<Result<Vec<_>, _>>().map_err(s)?;
    ensure(Word::product(&images) == product, || "boundary product changed".into())
}

fn solver_jacobian() -> Check {
    let c = earring_tangle(0.15).constraints(true, true, Ansatz::None);
    let rho = rand_rep(c.generators(), 4);
    let j = residual_jacobian(&c, &rho).map_err(s)?;
    let h = 1e-6;
    for g in 0..rho.len() {
        for a in 0..3 {
            let mut xi = [0.0; 3];
            xi[a] = h;
            let step = exp_im(holo_core::ImVector::from_array(xi));
            let mut p = rho.clone();
            p.values_mut()[g] = step * p.values()[g];
            let mut q = rho.clone();
            q.values_mut()[g] = step.inverse() * q.values()[g];
            let d = (residual(&c, &p).map_err(s)? - residual(&c, &q).map_err(s)?) / (2.0 * h);
            let err = (d - j.column(3 * g + a)).amax();
            ensure(err < 1e-6, || format!("column {} defect {err:.2e}", 3 * g + a))?;
        }
    }
    Ok(())
}

fn solver_dedup() -> Check {
    let c = trivial_tangle(2).map_err(s)?.constraints(true, true, Ansatz::None);
    let cfg = SolverConfig { restarts: 32, seed: 5, ..Default::default() };
    let once = dedup_classes(solve_raw(&c, &cfg).map_err(s)?);
    let twice = dedup_classes(once.clone());
    ensure(once == twice, || "dedup changed its own output".into())
}

fn solver_count() -> Check {
    let c = trivial_tangle(2).map_err(s)?.constraints(true, true, Ansatz::Abelian);
    let cfg = SolverConfig { restarts: 64, seed: 6, ..Default::default() };
    let k = solve_variety(&c, &cfg).map_err(s)?.len();
    ensure(k == 2, || format!("{k} classes"))
}

fn cohomology_complex() -> Check {
    let model = surface_presentation(2).map_err(s)?;
    let mut rng = stream(7, 0);
    for _ in 0..10 {
        let rho = random_point(&model, &mut rng);
        let d = d1_matrix(&model.presentation, &rho, &[]).map_err(s)? * d0_matrix(&rho);
        ensure(d.amax() < 1e-12, || format!("d1 d0 = {:.2e}", d.amax()))?;
    }
    Ok(())
}

fn cohomology_form() -> Check {
    let model = surface_presentation(2).map_err(s)?;
    let rho = random_point(&model, &mut stream(8, 0));
    let basis = h1_basis(&model.presentation, &rho, &[]).map_err(s)?;
    let gram = holo_core::cohomology::goldman_gram(&model.presentation, &rho, &basis).map_err(s)?;
    ensure(holo_core::linalg::rank(&gram) == 6, || "Goldman form degenerate".into())?;
    ensure((&gram + gram.transpose()).amax() < 1e-9, || "Goldman form not skew".into())?;
    let cs = h1_cocycles(&model.presentation, &rho, &[]).map_err(s)?;
    let w = goldman_form(&model.presentation, &rho, &cs[0], &cs[0]).map_err(s)?;
    ensure(w.abs() < 1e-9, || format!("ω(u,u) = {w:.2e}"))?;
    ensure(isotropy_defect(&model.presentation, &rho, &cs[..1]).map_err(s)? < 1e-9, || "isotropy".into())
}

fn surface_flow() -> Check {
    let model = surface_presentation(2).map_err(s)?;
    let curves = builtin_curves(2).map_err(s)?;
    let mut rng = stream(9, 0);
    for c in &curves {
        let rho = random_point(&model, &mut rng);
        let (t1, t2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let a = twist_flow(&rho, c, t1).map_err(s)?;
        ensure(model.relation_error(&a).map_err(s)? < 1e-8, || format!("{}: relation broken", c.name))?;
        let ab = twist_flow(&a, c, t2).map_err(s)?;
        let direct = twist_flow(&rho, c, t1 + t2).map_err(s)?;
        ensure(ab.max_distance(&direct) < 1e-8, || format!("{}: not additive", c.name))?;
        let drift = (eval_word(&c.curve_word, &a).map_err(s)?.re() - eval_word(&c.curve_word, &rho).map_err(s)?.re()).abs();
        ensure(drift < 1e-9, || format!("{}: trace drift {drift:.2e}", c.name))?;
        ensure(twist_flow(&rho, c, 0.0).map_err(s)? == rho, || format!("{}: time zero moves", c.name))?;
    }
    Ok(())
}

fn reduction_chart() -> Check {
    let mut rng = stream(10, 0);
    for _ in 0..50 {
        let (g, t) = (rng.random_range(0.1..3.0), rng.random_range(0.1..6.2));
        let rho = pillowcase_rep(g, t);
        let h = random_unit_quaternion(&mut rng);
        let a = pillowcase_chart(&rho).map_err(s)?;
        let b = pillowcase_chart(&rho.conjugate(h)).map_err(s)?;
        ensure((a.gamma - b.gamma).abs() < 1e-9 && (a.theta - b.theta).abs() < 1e-9, || {
            format!("chart moved under conjugation: {a:?} vs {b:?}")
        })?;
    }
    Ok(())
}

fn reduction_lift() -> Check {
    let model = surface_presentation(2).map_err(s)?;
    let mut rng = stream(11, 0);
    for _ in 0..20 {
        let rho = random_traceless_point(&model, &mut rng);
        let sphere = restrict_to_sphere(&model, &rho).map_err(s)?;
        let twists = [random_im(&mut rng, 1.0).x, random_im(&mut rng, 1.0).y];
        let lift = lift_from_sphere(&model, &sphere, &twists).map_err(s)?;
        ensure(model.relation_error(&lift).map_err(s)? < 1e-9, || "lift off the variety".into())?;
        let again = restrict_to_sphere(&model, &lift).map_err(s)?;
        let d = fingerprint_distance(&holo_core::solver::fingerprint(&sphere), &holo_core::solver::fingerprint(&again));
        ensure(d < 1e-9, || format!("restriction changed by {d:.2e}"))?;
    }
    Ok(())
}

fn probe_trace() -> Check {
    let model = surface_presentation(2).map_err(s)?;
    let lib = builtin_curves(2).map_err(s)?;
    let curves: Vec<&CurveDatum> = lib.iter().collect();
    let mut rng = stream(12, 0);
    for _ in 0..5 {
        let rho = random_traceless_point(&model, &mut rng);
        let r = submersion_probe(&model, ProbeMap::TraceAfterFlow, &rho, &curves, ProbeHypothesis::IrreducibleBoundary)
            .map_err(s)?;
        ensure(r == 2, || format!("rank {r}"))?;
        let rho = random_abelian_traceless_point(&model, &mut rng);
        ensure(holo_core::cohomology::stabilizer_class(&rho) == Stabilizer::Abelian, || "sample not abelian".into())?;
        let r = submersion_probe(&model, ProbeMap::TraceAfterFlow, &rho, &curves, ProbeHypothesis::Abelian).map_err(s)?;
        ensure(r == 2, || format!("abelian rank {r}"))?;
    }
    Ok(())
}

fn tangles_earring() -> Check {
    let mut rng = stream(13, 0);
    for _ in 0..20 {
        let eps = rng.random_range(0.0..0.2);
        let beta = rng.random_range(0.0..std::f64::consts::TAU);
        let c = earring_tangle(eps).constraints(true, false, Ansatz::None);
        let r = residual(&c, &earring_family(EarringFamilyParams::new(eps, beta))).map_err(s)?.amax();
        ensure(r < 1e-12, || format!("residual {r:.2e}"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        let mut out = String::new();
        report(Suite::all(), &mut out).unwrap_or_else(|e| panic!("{}\n{out}", e.message));
        assert!(!out.contains("FAIL"));
    }
}
