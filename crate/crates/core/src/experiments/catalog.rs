use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::config::{ExperimentSpec, Param};
use super::report::{RateReport, Sample, Thresholds};
use crate::dynamics::{loop_invariants, path_by_name, propagate_with, HamiltonianPath, PropagateOptions};
use crate::error::{Error, Result};
use crate::quantization::{
    gram_matrix, op_fine, op_norm, quantize, roundoff, schatten_norm, toeplitz, trace, CMatrix,
    QuantizationLevel, Quantizer, UnitaryPropagator,
};
use crate::sphere::registry::function_by_name;
use crate::sphere::{Point, SphereFunction};

/// Every experiment name accepted by [`super::run_suite`].
pub const EXPERIMENTS: [&str; 12] = [
    "dim_check",
    "p1_norm",
    "p2_bracket",
    "product_expansion",
    "trace_check",
    "egorov",
    "composition_defect",
    "homotopy_defect",
    "loop_phase",
    "separation",
    "schatten_sandwich",
    "projective_separation",
];

/// Suite-wide settings seen by every experiment.
#[derive(Debug, Clone)]
pub(crate) struct Context {
    pub ks: Vec<usize>,
    pub seed: u64,
    pub l_cap: usize,
}

pub(crate) fn run_experiment(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    match spec.name.as_str() {
        "dim_check" => dim_check(spec, ctx),
        "p1_norm" => p1_norm(spec, ctx),
        "p2_bracket" => p2_bracket(spec, ctx),
        "product_expansion" => product_expansion(spec, ctx),
        "trace_check" => trace_check(spec, ctx),
        "egorov" => egorov(spec, ctx),
        "composition_defect" => composition_defect(spec, ctx),
        "homotopy_defect" => homotopy_defect(spec, ctx),
        "loop_phase" => loop_phase(spec, ctx),
        "separation" => separation(spec, ctx, false),
        "schatten_sandwich" => schatten_sandwich(spec, ctx),
        "projective_separation" => separation(spec, ctx, true),
        other => Err(Error::Config(format!("unknown experiment '{other}'"))),
    }
}

fn level(k: usize) -> Result<QuantizationLevel> {
    QuantizationLevel::new(k)
}

fn report(
    spec: &ExperimentSpec,
    name: String,
    samples: Vec<Sample>,
    base: Thresholds,
) -> Result<RateReport> {
    let t = spec.thresholds(&name, base)?;
    Ok(RateReport::evaluate(name, samples, t))
}

fn sweep<F>(ks: &[usize], f: F) -> Result<Vec<Sample>>
where
    F: Fn(usize) -> Result<Sample> + Sync + Send,
{
    ks.par_iter().map(|&k| f(k)).collect()
}

fn quantizers(spec: &ExperimentSpec) -> Result<Vec<Quantizer>> {
    spec.strings("quantizers", &["toeplitz", "fine"])?
        .iter()
        .map(|q| {
            q.parse()
                .map_err(|_| Error::Config(format!("{}: unknown quantizer '{q}'", spec.name)))
        })
        .collect()
}

fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "op".to_string()
    } else {
        format!("p{p}")
    }
}

fn p_values(spec: &ExperimentSpec, default: &[f64]) -> Result<Vec<f64>> {
    // Configs spell the operator norm as any value >= 1e300 or the string "inf".
    match spec.params.get("p_values") {
        Some(Param::List(items)) => items
            .iter()
            .map(|p| match p {
                Param::Num(v) if *v >= 1.0 => Ok(if *v >= 1e300 { f64::INFINITY } else { *v }),
                Param::Str(s) if s == "inf" => Ok(f64::INFINITY),
                other => Err(Error::Config(format!(
                    "{}: p_values entries must be >= 1 or \"inf\", got {other:?}",
                    spec.name
                ))),
            })
            .collect(),
        Some(other) => Err(Error::Config(format!("{}: p_values must be a list, got {other:?}", spec.name))),
        None => Ok(default.to_vec()),
    }
}

fn dim_check(spec: &ExperimentSpec, _ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&(1..=256).collect::<Vec<_>>())?;
    let dims = sweep(&ks, |k| {
        let lv = level(k)?;
        Ok(Sample::new(k, (lv.dim as f64 - k as f64).abs()))
    })?;
    let gram_ks: Vec<usize> = spec
        .numbers("gram_ks", &[1.0, 2.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0])?
        .iter()
        .map(|&v| v as usize)
        .collect();
    let gram = sweep(&gram_ks, |k| {
        let lv = level(k)?;
        let g = gram_matrix(&lv);
        Ok(Sample::new(k, op_norm(&(g - CMatrix::identity(lv.dim, lv.dim)))))
    })?;
    Ok(vec![
        report(spec, "dim_check/dim".into(), dims, Thresholds::abs_at_most(0.0))?,
        report(spec, "dim_check/gram".into(), gram, Thresholds::abs_at_most(1e-10))?,
    ])
}

fn p1_norm(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&ctx.ks)?;
    let mut out = Vec::new();
    for q in quantizers(spec)? {
        for name in spec.strings("functions", &["u", "x", "u2"])? {
            let f = function_by_name(&name)?;
            let sup = f.sup_norm();
            let samples = sweep(&ks, |k| {
                let lv = level(k)?;
                let norm = quantize(&lv, &f, q).op_norm();
                Ok(Sample::new(k, (sup - norm).abs())
                    .with_error(roundoff(lv.dim, sup))
                    .with_extra(format!("op_norm={norm:.17e}")))
            })?;
            out.push(report(
                spec,
                format!("p1_norm/{}/{name}", q.name()),
                samples,
                Thresholds::slope_at_most(-0.8),
            )?);
        }
    }
    // Closed-form spectrum of T_k(u).
    let u = SphereFunction::u();
    let samples = sweep(&ks, |k| {
        let lv = level(k)?;
        let expected = (k as f64 - 1.0) / (k as f64 + 1.0);
        Ok(Sample::new(k, (toeplitz(&lv, &u).op_norm() - expected).abs()))
    })?;
    out.push(report(spec, "p1_norm/spectrum/u".into(), samples, Thresholds::abs_at_most(1e-10))?);
    Ok(out)
}

fn bracket_sample(lv: &QuantizationLevel, f: &SphereFunction, g: &SphereFunction, q: Quantizer) -> Sample {
    let qf = quantize(lv, f, q);
    let qg = quantize(lv, g, q);
    let qb = quantize(lv, &f.poisson_bracket(g), q);
    let comm = crate::quantization::commutator(qf.matrix(), qg.matrix());
    let rhs = qb.matrix() * Complex64::new(0.0, -lv.hbar());
    let defect = op_norm(&(comm - rhs));
    Sample::new(lv.k, defect).with_error(roundoff(lv.dim, qf.op_norm() * qg.op_norm()))
}

fn parse_pairs(pairs: &[(String, String)]) -> Result<Vec<(String, SphereFunction, SphereFunction)>> {
    pairs
        .iter()
        .map(|(a, b)| Ok((format!("{a},{b}"), function_by_name(a)?, function_by_name(b)?)))
        .collect()
}

fn p2_bracket(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&ctx.ks)?;
    let pairs = parse_pairs(&spec.pairs("pairs", &[("u2", "xy"), ("u2", "x"), ("u2", "xz")])?)?;
    let mut out = Vec::new();
    for q in quantizers(spec)? {
        let base = match q {
            Quantizer::Fine => Thresholds {
                max_slope: Some(-2.6),
                min_r2: Some(0.98),
                ..Thresholds::default()
            },
            Quantizer::Toeplitz => Thresholds {
                max_slope: Some(-1.6),
                min_slope: Some(-2.4),
                min_r2: Some(0.98),
                ..Thresholds::default()
            },
        };
        for (label, f, g) in &pairs {
            let samples = sweep(&ks, |k| Ok(bracket_sample(&level(k)?, f, g, q)))?;
            out.push(report(spec, format!("p2_bracket/{}/{label}", q.name()), samples, base)?);
        }
    }
    // Degree-one harmonics: the fine correspondence holds exactly.
    let exact_ks = match spec.params.get("exact_ks") {
        Some(_) => spec.numbers("exact_ks", &[])?.iter().map(|&v| v as usize).collect(),
        None => (1..=128).collect::<Vec<_>>(),
    };
    for (label, f, g) in parse_pairs(&spec.pairs("exact_pairs", &[("x", "y")])?)? {
        let samples = sweep(&exact_ks, |k| Ok(bracket_sample(&level(k)?, &f, &g, Quantizer::Fine)))?;
        out.push(report(spec, format!("p2_bracket/exact/{label}"), samples, Thresholds::abs_at_most(1e-10))?);
    }
    Ok(out)
}

fn product_expansion(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&ctx.ks)?;
    let sign = spec.num("sign", -1.0)?;
    let mut out = Vec::new();
    for (label, f, g) in parse_pairs(&spec.pairs("pairs", &[("u2", "xy"), ("u2", "x")])?)? {
        let fg = f.product(&g);
        let bracket = f.poisson_bracket(&g);
        let samples = sweep(&ks, |k| {
            let lv = level(k)?;
            let a = op_fine(&lv, &f);
            let b = op_fine(&lv, &g);
            let base = a.matrix() * b.matrix() - op_fine(&lv, &fg).matrix();
            let ob = op_fine(&lv, &bracket).into_matrix();
            let term = |s: f64| &ob * Complex64::new(0.0, s / (2.0 * k as f64));
            let residual = op_norm(&(&base - term(sign)));
            let opposite = op_norm(&(&base - term(-sign)));
            Ok(Sample::new(k, residual)
                .with_error(roundoff(lv.dim, a.op_norm() * b.op_norm()))
                .with_extra(format!("opposite_sign={opposite:.17e}")))
        })?;
        out.push(report(
            spec,
            format!("product_expansion/fine/{label}"),
            samples,
            Thresholds::slope_at_most(-1.6),
        )?);
    }
    Ok(out)
}

fn trace_check(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&ctx.ks)?;
    let mut out = Vec::new();
    for name in spec.strings("functions", &["1", "u", "x", "u2", "xy", "xz"])? {
        let f = function_by_name(&name)?;
        let integral = f.integrate();
        let bound = f.sup_bound();
        let samples = sweep(&ks, |k| {
            let lv = level(k)?;
            let tr = trace(toeplitz(&lv, &f).matrix());
            let expected = k as f64 / TAU * integral;
            let defect = (tr - Complex64::new(expected, 0.0)).norm();
            // Each diagonal entry carries an error of the size of `roundoff`.
            Ok(Sample::new(k, defect)
                .with_error(lv.dim as f64 * roundoff(lv.dim, bound))
                .with_extra(format!("trace={:.17e}", tr.re)))
        })?;
        out.push(report(
            spec,
            format!("trace_check/toeplitz/{name}"),
            samples,
            Thresholds::slope_at_most(0.1),
        )?);
    }
    let u = SphereFunction::u();
    let samples = sweep(&ks, |k| Ok(Sample::new(k, trace(toeplitz(&level(k)?, &u).matrix()).norm())))?;
    out.push(report(
        spec,
        "trace_check/zero/u".into(),
        samples,
        Thresholds::abs_at_most(super::report::FLOOR),
    )?);
    Ok(out)
}

/// `g o phi^{-1}` for the time-one map of `path`.
fn transport(g: &SphereFunction, path: &HamiltonianPath, l_cap: usize) -> Result<SphereFunction> {
    g.compose(|x| path.flow_inverse(1.0, x), l_cap)
}

/// Quantization used inside the Schrodinger equation; `toeplitz` is there
/// for contrast runs.
fn propagator(spec: &ExperimentSpec) -> Result<PropagateOptions> {
    let q = spec.string("propagator", "fine")?;
    let quantizer = q
        .parse()
        .map_err(|_| Error::Config(format!("{}: unknown propagator '{q}'", spec.name)))?;
    Ok(PropagateOptions {
        quantizer,
        ..PropagateOptions::default()
    })
}

fn egorov(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&ctx.ks)?;
    let opts = propagator(spec)?;
    let mut out = Vec::new();
    for h in spec.strings("hamiltonians", &["ham(u, pi/4)", "axisym(u2, 1)"])? {
        let path = path_by_name(&h, ctx.l_cap)?;
        for g_name in spec.strings("observables", &["x", "xy"])? {
            let g = function_by_name(&g_name)?;
            let moved = transport(&g, &path, ctx.l_cap)?;
            let samples = sweep(&ks, |k| {
                let lv = level(k)?;
                let u = propagate_with(&lv, &path, &opts)?;
                let qg = op_fine(&lv, &g);
                let lhs = op_fine(&lv, &moved);
                let rhs = u.conjugate(&qg)?;
                let defect = op_norm(&(lhs.matrix() - rhs.matrix()));
                let err = 2.0 * qg.op_norm() * u.meta.error_estimate
                    + 2.0 * moved.truncation()
                    + roundoff(lv.dim, qg.op_norm());
                Ok(Sample::new(k, defect).with_error(err))
            })?;
            out.push(report(
                spec,
                format!("egorov/{h}/{g_name}"),
                samples,
                Thresholds::slope_at_most(-1.6),
            )?);
        }
    }
    Ok(out)
}

fn normalized_norm(a: &CMatrix, p: f64) -> Result<f64> {
    let d = a.nrows() as f64;
    Ok(schatten_norm(a, p)? / if p.is_infinite() { 1.0 } else { d.powf(1.0 / p) })
}

/// Reports of `||A||_p / d^{1/p}` for each `p`, where `defect(k)` returns `A`
/// and its numerical error in operator norm.
fn matrix_sweep<F>(
    spec: &ExperimentSpec,
    ks: &[usize],
    prefix: &str,
    suffix: &str,
    ps: &[f64],
    base: Thresholds,
    defect: F,
) -> Result<Vec<RateReport>>
where
    F: Fn(usize) -> Result<(CMatrix, f64)> + Sync + Send,
{
    let cells: Vec<(usize, CMatrix, f64)> = ks
        .par_iter()
        .map(|&k| defect(k).map(|(a, e)| (k, a, e)))
        .collect::<Result<_>>()?;
    ps.iter()
        .map(|&p| {
            let samples = cells
                .iter()
                .map(|(k, a, e)| Ok(Sample::new(*k, normalized_norm(a, p)?).with_p(p).with_error(*e)))
                .collect::<Result<Vec<_>>>()?;
            report(spec, format!("{prefix}/{}/{suffix}", p_label(p)), samples, base)
        })
        .collect()
}

fn propagate_with_roundoff(
    lv: &QuantizationLevel,
    path: &HamiltonianPath,
    opts: &PropagateOptions,
) -> Result<(UnitaryPropagator, f64)> {
    let u = propagate_with(lv, path, opts)?;
    let e = u.meta.error_estimate + roundoff(lv.dim, 1.0);
    Ok((u, e))
}

fn composition_defect(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&ctx.ks)?;
    let opts = propagator(spec)?;
    let ps = p_values(spec, &[f64::INFINITY, 2.0, 5.0])?;
    let pairs = spec.pairs(
        "pairs",
        &[("rot_x(pi/3)", "rot_u(pi/3)"), ("axisym(u2, 1)", "rot_x(pi/3)")],
    )?;
    let mut out = Vec::new();
    for (a, b) in pairs {
        let p = path_by_name(&a, ctx.l_cap)?;
        let q = path_by_name(&b, ctx.l_cap)?;
        let pq = HamiltonianPath::product(&p, &q);
        out.extend(matrix_sweep(
            spec,
            &ks,
            "composition_defect",
            &format!("{a}*{b}"),
            &ps,
            Thresholds::slope_at_most(-0.6),
            |k| {
                let lv = level(k)?;
                let (up, ep) = propagate_with_roundoff(&lv, &p, &opts)?;
                let (uq, eq) = propagate_with_roundoff(&lv, &q, &opts)?;
                let (upq, epq) = propagate_with_roundoff(&lv, &pq, &opts)?;
                Ok((&up.matrix * &uq.matrix - &upq.matrix, ep + eq + epq))
            },
        )?);
    }
    Ok(out)
}

fn homotopy_defect(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&ctx.ks)?;
    let opts = propagator(spec)?;
    let mut out = Vec::new();
    let loop_ks = match spec.params.get("loop_ks") {
        Some(_) => spec.numbers("loop_ks", &[])?.iter().map(|&v| v as usize).collect(),
        None => (1..=128).collect::<Vec<_>>(),
    };
    for name in spec.strings("loops", &["fourpiloop"])? {
        let path = path_by_name(&name, ctx.l_cap)?;
        let samples = sweep(&loop_ks, |k| {
            let lv = level(k)?;
            let (u, e) = propagate_with_roundoff(&lv, &path, &opts)?;
            let d = op_norm(&(u.matrix - CMatrix::identity(lv.dim, lv.dim)));
            Ok(Sample::new(k, d).with_error(e))
        })?;
        out.push(report(spec, format!("homotopy_defect/loop/{name}"), samples, Thresholds::abs_at_most(1e-8))?);
    }
    let pairs = spec.pairs(
        "pairs",
        &[
            (
                "concat(inv(rot_x(pi/2)), rot_u(pi/3), rot_x(pi/2))",
                "transport(rot_x(pi/2), rot_u(pi/3))",
            ),
            (
                "concat(inv(axisym(u2, 0.5)), rot_x(pi/3), axisym(u2, 0.5))",
                "transport(axisym(u2, 0.5), rot_x(pi/3))",
            ),
        ],
    )?;
    for (a, b) in pairs {
        let pa = path_by_name(&a, ctx.l_cap)?;
        let pb = path_by_name(&b, ctx.l_cap)?;
        let moved = pa.flow(1.0, [0.3, -0.4, 0.866_025_403_784_438_6])?;
        let target = pb.flow(1.0, [0.3, -0.4, 0.866_025_403_784_438_6])?;
        let gap = (0..3).map(|i| (moved[i] - target[i]).abs()).fold(0.0, f64::max);
        if gap > 1e-8 {
            return Err(Error::Config(format!(
                "homotopy_defect: '{a}' and '{b}' have different endpoints (gap {gap:.2e})"
            )));
        }
        out.extend(matrix_sweep(
            spec,
            &ks,
            "homotopy_defect",
            &format!("{a}~{b}"),
            &p_values(spec, &[f64::INFINITY])?,
            Thresholds::slope_at_most(-0.6),
            |k| {
                let lv = level(k)?;
                let (ua, ea) = propagate_with_roundoff(&lv, &pa, &opts)?;
                let (ub, eb) = propagate_with_roundoff(&lv, &pb, &opts)?;
                Ok((ua.matrix - ub.matrix, ea + eb))
            },
        )?);
    }
    Ok(out)
}

fn north_or(spec: &ExperimentSpec) -> Result<Point> {
    let b = spec.numbers("base_point", &[0.0, 0.0, 1.0])?;
    match b.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Error::Config("loop_phase: base_point needs three coordinates".to_string())),
    }
}

fn scalar_defect(u: &CMatrix, phase: f64) -> f64 {
    let d = u.nrows();
    op_norm(&(u - CMatrix::identity(d, d) * Complex64::from_polar(1.0, phase)))
}

fn loop_phase(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let ks = spec.ks(&(2..=128).collect::<Vec<_>>())?;
    let opts = propagator(spec)?;
    let base = north_or(spec)?;
    let mut out = Vec::new();
    for name in spec.strings("loops", &["twopiloop"])? {
        let path = path_by_name(&name, ctx.l_cap)?;
        let twice = HamiltonianPath::concat(vec![path.clone(), path.clone()])?;
        let inv = loop_invariants(&path, base)?;
        let inv2 = loop_invariants(&twice, base)?;
        let phase = sweep(&ks, |k| {
            let lv = level(k)?;
            let (u, e) = propagate_with_roundoff(&lv, &path, &opts)?;
            let theta = inv.predicted_phase(k);
            Ok(Sample::new(k, scalar_defect(&u.matrix, theta))
                .with_error(e)
                .with_extra(format!("theta={theta:.17e}")))
        })?;
        out.push(report(spec, format!("loop_phase/phase/{name}"), phase, Thresholds::abs_at_most(1e-8))?);
        // r_k(loop * loop) = 2 r_k(loop), on the phases and on the propagators.
        let hom = sweep(&ks, |k| {
            let lv = level(k)?;
            let (u2, e) = propagate_with_roundoff(&lv, &twice, &opts)?;
            let (t1, t2) = (inv.predicted_phase(k), inv2.predicted_phase(k));
            let phase_gap = (Complex64::from_polar(1.0, 2.0 * t1) - Complex64::from_polar(1.0, t2)).norm();
            Ok(Sample::new(k, phase_gap.max(scalar_defect(&u2.matrix, t2))).with_error(e))
        })?;
        out.push(report(
            spec,
            format!("loop_phase/homomorphism/{name}"),
            hom,
            Thresholds::abs_at_most(1e-8),
        )?);
    }
    Ok(out)
}

fn separation(spec: &ExperimentSpec, ctx: &Context, projective: bool) -> Result<Vec<RateReport>> {
    let k_min = spec.num("k_min", 8.0)? as usize;
    let ks: Vec<usize> = spec.ks(&ctx.ks)?.into_iter().filter(|&k| k >= k_min).collect();
    let opts = propagator(spec)?;
    let mut out = Vec::new();
    for name in spec.strings("paths", &["rot_x(pi)"])? {
        let path = path_by_name(&name, ctx.l_cap)?;
        let samples = sweep(&ks, |k| {
            let lv = level(k)?;
            let u = propagate_with(&lv, &path, &opts)?;
            let id = UnitaryPropagator::identity(lv, "id");
            let d = if projective {
                u.projective_distance(&id, f64::INFINITY)?
            } else {
                op_norm(&(&u.matrix - &id.matrix))
            };
            Ok(Sample::new(k, d).with_error(u.meta.error_estimate))
        })?;
        let (exp, tag) = if projective {
            ("projective_separation", "delta_inf")
        } else {
            ("separation", "op")
        };
        out.push(report(spec, format!("{exp}/{tag}/{name}"), samples, Thresholds::abs_at_least(0.5))?);
    }
    Ok(out)
}

/// Uniform random Hermitian matrix with entries in the unit square.
pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for i in 0..d {
        a[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

/// Relative violation of `||A||_op <= ||A||_p <= d^{1/p} ||A||_op`, 0 if it holds.
pub fn sandwich_violation(a: &CMatrix, p: f64) -> Result<f64> {
    let d = a.nrows() as f64;
    let op = op_norm(a);
    let sp = schatten_norm(a, p)?;
    let upper = if p.is_infinite() { op } else { d.powf(1.0 / p) * op };
    Ok(((op - sp).max(sp - upper) / op).max(0.0))
}

fn schatten_sandwich(spec: &ExperimentSpec, ctx: &Context) -> Result<Vec<RateReport>> {
    let dims: Vec<usize> = spec.numbers("dims", &[4.0, 16.0, 64.0])?.iter().map(|&d| d as usize).collect();
    let count = spec.num("count", 1000.0)? as usize;
    let ps = p_values(spec, &[1.0, 2.0, 5.0, f64::INFINITY])?;
    // One stream per dimension, so results do not depend on scheduling.
    let per_dim: Vec<Vec<f64>> = dims
        .par_iter()
        .map(|&d| {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut worst = vec![0.0f64; ps.len()];
            for _ in 0..count {
                let a = random_hermitian(&mut rng, d);
                for (w, &p) in worst.iter_mut().zip(&ps) {
                    *w = w.max(sandwich_violation(&a, p)?);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    ps.iter()
        .enumerate()
        .map(|(i, &p)| {
            let samples = dims
                .iter()
                .zip(&per_dim)
                .map(|(&d, w)| Sample::new(d, w[i]).with_p(p).with_extra(format!("count={count}")))
                .collect();
            report(spec, format!("schatten_sandwich/{}", p_label(p)), samples, Thresholds::abs_at_most(1e-10))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Verdict;

    fn ctx(ks: &[usize]) -> Context {
        Context {
            ks: ks.to_vec(),
            seed: 7,
            l_cap: 32,
        }
    }

    #[test]
    fn sandwich_on_identity_is_tight() {
        let id = CMatrix::identity(5, 5);
        for p in [1.0, 2.0, 5.0, f64::INFINITY] {
            assert!(sandwich_violation(&id, p).unwrap() < 1e-15);
            let expect = if p.is_infinite() { 1.0 } else { 5f64.powf(1.0 / p) };
            assert!((schatten_norm(&id, p).unwrap() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn random_hermitian_is_seeded() {
        let a = random_hermitian(&mut ChaCha8Rng::seed_from_u64(3), 6);
        let b = random_hermitian(&mut ChaCha8Rng::seed_from_u64(3), 6);
        assert_eq!(a, b);
        assert_eq!(a.adjoint(), a);
    }

    #[test]
    fn small_sweeps_pass() {
        let c = ctx(&[4, 8, 16]);
        let dim = run_experiment(&ExperimentSpec::new("dim_check").with("k_range", Param::nums(&[1.0, 20.0])).with("gram_ks", Param::nums(&[3.0, 9.0])), &c).unwrap();
        assert!(dim.iter().all(|r| r.passed()), "{dim:?}");
        let sep = run_experiment(&ExperimentSpec::new("separation").with("k_min", Param::Num(4.0)), &c).unwrap();
        assert!(sep[0].passed());
        assert_eq!(sep[0].samples.len(), 3);
        // Eigenphases of a half turn sit at odd multiples of pi/2 for even k.
        assert!((sep[0].min_defect() - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn unknown_quantizer_is_a_config_error() {
        let e = ExperimentSpec::new("p1_norm").with("quantizers", Param::strs(&["weyl"]));
        assert!(matches!(run_experiment(&e, &ctx(&[4])), Err(Error::Config(_))));
    }

    #[test]
    fn toeplitz_propagator_misses_the_loop_phase() {
        // T_k(u) carries 1/(k+1) where the fine operator carries 1/k, so the
        // full turn undershoots and is no longer scalar.
        let base = ExperimentSpec::new("loop_phase").with("k_range", Param::nums(&[8.0, 12.0]));
        let fine = run_experiment(&base, &ctx(&[4])).unwrap();
        assert!(fine.iter().all(|r| r.verdict == Verdict::Pass));
        let toeplitz = run_experiment(&base.with("propagator", Param::str("toeplitz")), &ctx(&[4])).unwrap();
        assert_eq!(toeplitz[0].verdict, Verdict::Fail);
        let bad = ExperimentSpec::new("separation").with("propagator", Param::str("weyl"));
        assert!(matches!(run_experiment(&bad, &ctx(&[8])), Err(Error::Config(_))));
    }
}
