//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs the default experiment suite once and checks each criterion against
//! the reports, plus direct checks with closed-form oracles where one exists.
//! Criteria listed in `KNOWN_RED` are printed as FAIL but do not fail the
//! target; any other failure, or a known-red criterion turning green, does.

use std::f64::consts::PI;
use std::process::ExitCode;

use fineq::experiments::{run_suite, RateReport, SuiteConfig, Verdict};
use fineq::lattice::{check_condition_c, CohomologyData};
use fineq::quantization::{
    frobenius_norm, gram_matrix, op_norm, quantize, toeplitz, CMatrix, QuantizationLevel,
    Quantizer,
};
use fineq::sphere::SphereFunction;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose measured slopes miss the stated window on the default sweep.
/// See the "Known results" section of the README.
const KNOWN_RED: [u32; 2] = [4, 7];

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn level(k: usize) -> QuantizationLevel {
    QuantizationLevel::new(k).expect("k >= 1")
}

fn with_prefix<'a>(reports: &'a [RateReport], prefix: &str) -> Vec<&'a RateReport> {
    reports.iter().filter(|r| r.name.starts_with(prefix)).collect()
}

fn exactly<'a>(reports: &'a [RateReport], name: &str) -> &'a RateReport {
    reports
        .iter()
        .find(|r| r.name == name)
        .unwrap_or_else(|| panic!("missing report {name}"))
}

fn summarize(r: &RateReport) -> String {
    let fit = match r.fit {
        Some(f) => format!("slope {:.3} r2 {:.4}", f.slope, f.r_squared),
        None if r.note.is_empty() => format!("max {:.2e}", r.max_defect()),
        None => r.note.clone(),
    };
    format!("{} {} ({fit})", r.name, r.verdict)
}

fn all_pass(reports: &[&RateReport]) -> (bool, String) {
    let pass = !reports.is_empty() && reports.iter().all(|r| r.verdict == Verdict::Pass);
    let detail = reports.iter().map(|r| summarize(r)).collect::<Vec<_>>().join("; ");
    (pass, detail)
}

fn extra_value(extra: &str, key: &str) -> Option<f64> {
    extra
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
}

fn criterion_1(reports: &[RateReport]) -> Outcome {
    let mut worst_gram = 0.0f64;
    let mut dims_ok = true;
    for k in 1..=256 {
        let lv = level(k);
        // Monomials z^j, 0 <= j <= k - 1.
        dims_ok &= lv.dim == (0..k).count();
        let g = gram_matrix(&lv) - CMatrix::identity(k, k);
        // Frobenius dominates the operator norm.
        worst_gram = worst_gram.max(frobenius_norm(&g));
    }
    let (suite_ok, detail) = all_pass(&with_prefix(reports, "dim_check/"));
    Outcome {
        id: 1,
        title: "dimension formula and orthonormal monomials",
        pass: dims_ok && worst_gram <= 1e-10 && suite_ok,
        detail: format!("dim = k on 1..=256: {dims_ok}; gram err {worst_gram:.2e}; {detail}"),
    }
}

fn criterion_2() -> Outcome {
    let one = SphereFunction::constant(1.0);
    let mut worst = 0.0f64;
    for k in 1..=128 {
        let lv = level(k);
        for q in [Quantizer::Toeplitz, Quantizer::Fine] {
            let d = quantize(&lv, &one, q).into_matrix() - CMatrix::identity(k, k);
            worst = worst.max(op_norm(&d));
        }
    }
    Outcome {
        id: 2,
        title: "quantization of 1 is the identity",
        pass: worst <= 1e-12,
        detail: format!("max over k <= 128, both quantizers: {worst:.2e}"),
    }
}

fn criterion_3(reports: &[RateReport]) -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=128 {
        let exact = (k as f64 - 1.0) / (k as f64 + 1.0);
        worst = worst.max((toeplitz(&level(k), &SphereFunction::u()).op_norm() - exact).abs());
    }
    let rates: Vec<&RateReport> = ["fine", "toeplitz"]
        .iter()
        .flat_map(|q| ["u", "x", "u2"].map(|f| exactly(reports, &format!("p1_norm/{q}/{f}"))))
        .collect();
    let (ok, detail) = all_pass(&rates);
    Outcome {
        id: 3,
        title: "norm correspondence",
        pass: worst <= 1e-10 && ok,
        detail: format!("|T_k(u)| vs (k-1)/(k+1): {worst:.2e}; {detail}"),
    }
}

fn criterion_4(reports: &[RateReport]) -> Outcome {
    let rates: Vec<&RateReport> = ["fine", "toeplitz"]
        .iter()
        .flat_map(|q| ["u2,xy", "u2,x"].map(|p| exactly(reports, &format!("p2_bracket/{q}/{p}"))))
        .collect();
    let (ok, detail) = all_pass(&rates);
    Outcome {
        id: 4,
        title: "bracket correspondence, fine vs plain Toeplitz",
        pass: ok,
        detail,
    }
}

fn criterion_5(reports: &[RateReport]) -> Outcome {
    let r = exactly(reports, "p2_bracket/exact/x,y");
    let covers = r.samples.iter().map(|s| s.k).eq(1..=128);
    Outcome {
        id: 5,
        title: "exact linear bracket",
        pass: covers && r.max_defect() <= 1e-10 && r.verdict == Verdict::Pass,
        detail: format!("k = 1..=128 covered: {covers}; {}", summarize(r)),
    }
}

fn criterion_6(reports: &[RateReport]) -> Outcome {
    let rates = ["u2,xy", "u2,x"].map(|p| exactly(reports, &format!("product_expansion/fine/{p}")));
    let (ok, detail) = all_pass(&rates);
    Outcome {
        id: 6,
        title: "product expansion",
        pass: ok,
        detail,
    }
}

fn criterion_7(reports: &[RateReport]) -> Outcome {
    let rates = with_prefix(reports, "egorov/");
    let (ok, detail) = all_pass(&rates);
    Outcome {
        id: 7,
        title: "Egorov",
        pass: rates.len() == 4 && ok,
        detail,
    }
}

fn criterion_8(reports: &[RateReport]) -> Outcome {
    let rates = ["op", "p2", "p5"]
        .map(|p| exactly(reports, &format!("composition_defect/{p}/rot_x(pi/3)*rot_u(pi/3)")));
    let (ok, detail) = all_pass(&rates);
    Outcome {
        id: 8,
        title: "almost-representation",
        pass: ok,
        detail,
    }
}

fn criterion_9(reports: &[RateReport]) -> Outcome {
    let looped = exactly(reports, "homotopy_defect/loop/fourpiloop");
    let covers = looped.samples.iter().map(|s| s.k).eq(1..=128);
    let pair = exactly(
        reports,
        "homotopy_defect/op/concat(inv(rot_x(pi/2)), rot_u(pi/3), rot_x(pi/2))~transport(rot_x(pi/2), rot_u(pi/3))",
    );
    let (ok, detail) = all_pass(&[looped, pair]);
    Outcome {
        id: 9,
        title: "homotopy independence",
        pass: covers && looped.max_defect() <= 1e-8 && ok,
        detail: format!("k = 1..=128 covered: {covers}; {detail}"),
    }
}

fn criterion_10(reports: &[RateReport]) -> Outcome {
    let phase = exactly(reports, "loop_phase/phase/twopiloop");
    let hom = exactly(reports, "loop_phase/homomorphism/twopiloop");
    let covers = phase.samples.iter().map(|s| s.k).eq(2..=128);
    // The 2pi rotation acts on z^j by e^{i pi (2j - (k - 1))} = (-1)^{k-1}.
    let mut worst_sign = 0.0f64;
    for s in &phase.samples {
        let theta = extra_value(&s.extra, "theta").unwrap_or(f64::NAN);
        let sign = if s.k % 2 == 1 { 1.0 } else { -1.0 };
        let d = ((theta.cos() - sign).powi(2) + theta.sin().powi(2)).sqrt();
        worst_sign = worst_sign.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    let (ok, detail) = all_pass(&[phase, hom]);
    Outcome {
        id: 10,
        title: "loop phase",
        pass: covers && phase.max_defect() <= 1e-8 && worst_sign <= 1e-8 && ok,
        detail: format!("k = 2..=128 covered: {covers}; |e^(i theta) - (-1)^(k-1)| <= {worst_sign:.2e}; {detail}"),
    }
}

fn criterion_11(reports: &[RateReport]) -> Outcome {
    let op = exactly(reports, "separation/op/rot_x(pi)");
    let proj = exactly(reports, "projective_separation/delta_inf/rot_x(pi)");
    // Eigenphases (pi/2)(k - 1 - 2j): the distance to I is max_j |e^{i theta_j} - 1|.
    let mut worst_oracle = 0.0f64;
    for s in &op.samples {
        let expected = (0..s.k)
            .map(|j| {
                let t = 0.5 * PI * (s.k as f64 - 1.0 - 2.0 * j as f64);
                ((t.cos() - 1.0).powi(2) + t.sin().powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        worst_oracle = worst_oracle.max((s.defect - expected).abs());
    }
    let min_k = op.samples.iter().map(|s| s.k).min().unwrap_or(0);
    let (ok, detail) = all_pass(&[op, proj]);
    Outcome {
        id: 11,
        title: "separation",
        pass: ok && min_k >= 8 && op.min_defect() >= 0.5 && proj.min_defect() >= 0.5 && worst_oracle <= 1e-8,
        detail: format!("eigenphase oracle gap {worst_oracle:.2e}; {detail}"),
    }
}

fn criterion_12(reports: &[RateReport]) -> Outcome {
    let rates = ["p1", "p2", "p5", "op"].map(|p| exactly(reports, &format!("schatten_sandwich/{p}")));
    let mut covered = true;
    for r in &rates {
        let dims: Vec<usize> = r.samples.iter().map(|s| s.k).collect();
        covered &= dims == [4, 16, 64];
        covered &= r.samples.iter().all(|s| extra_value(&s.extra, "count") == Some(1000.0));
    }
    let (ok, detail) = all_pass(&rates);
    Outcome {
        id: 12,
        title: "Schatten sandwich",
        pass: ok && covered,
        detail: format!("d in {{4, 16, 64}} with 1000 matrices each: {covered}; {detail}"),
    }
}

/// Searches the box `[-b, b]^r` for a kernel vector of `omega` with odd `c1` value.
fn brute_force_violated(omega: &[(i64, i64)], c1: &[i64], b: i64) -> bool {
    let r = omega.len();
    // Clear denominators with exact integer arithmetic.
    let lcm = omega.iter().fold(1i64, |acc, &(_, q)| num_integer::lcm(acc, q));
    let row: Vec<i64> = omega.iter().map(|&(p, q)| p * (lcm / q)).collect();
    let mut v = vec![-b; r];
    loop {
        let pairing: i64 = row.iter().zip(&v).map(|(a, x)| a * x).sum();
        let parity: i64 = c1.iter().zip(&v).map(|(a, x)| a * x).sum();
        if pairing == 0 && parity.rem_euclid(2) == 1 {
            return true;
        }
        let mut i = 0;
        while i < r && v[i] == b {
            v[i] = -b;
            i += 1;
        }
        if i == r {
            return false;
        }
        v[i] += 1;
    }
}

fn criterion_13() -> Outcome {
    let blow_up = |m: &str, n: &str| {
        check_condition_c(&CohomologyData::parse(&[m, n], &[3, -1]).expect("valid data"))
            .expect("checker runs")
    };
    let same_parity = blow_up("3", "1");
    let mixed_parity = blow_up("2", "1");
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut disagreements = 0;
    let mut violated = 0;
    let mut instances = 0;
    while instances < 100 {
        let r = rng.gen_range(1..=3);
        let omega: Vec<(i64, i64)> = (0..r)
            .map(|_| (rng.gen_range(-4..=4), rng.gen_range(1..=3)))
            .collect();
        if omega.iter().all(|&(p, _)| p == 0) {
            continue;
        }
        let c1: Vec<i64> = (0..r).map(|_| rng.gen_range(-5..=5)).collect();
        let data = CohomologyData::new(
            omega
                .iter()
                .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                .collect(),
            c1.iter().map(|&c| BigInt::from(c)).collect(),
        )
        .expect("valid data");
        let brute = brute_force_violated(&omega, &c1, 10);
        violated += usize::from(brute);
        if check_condition_c(&data).expect("checker runs") == brute {
            disagreements += 1;
        }
        instances += 1;
    }
    Outcome {
        id: 13,
        title: "condition (C) checker",
        pass: same_parity && !mixed_parity && disagreements == 0,
        detail: format!(
            "(3,1) satisfied: {same_parity}; (2,1) violated: {}; {disagreements} disagreements on {instances} random instances ({violated} violated)",
            !mixed_parity
        ),
    }
}

fn criterion_14(reports: &[RateReport]) -> Outcome {
    // Direct check: the diagonal of T_k(u) is antisymmetric under j -> k - 1 - j.
    let mut worst = 0.0f64;
    for k in [8, 16, 32, 64, 128] {
        let t = toeplitz(&level(k), &SphereFunction::u()).into_matrix();
        worst = worst.max(t.trace().norm());
    }
    let rates = with_prefix(reports, "trace_check/");
    let names: Vec<&str> = rates.iter().map(|r| r.name.as_str()).collect();
    let covers = ["u", "x", "u2", "xy", "xz"]
        .iter()
        .all(|f| names.contains(&format!("trace_check/toeplitz/{f}").as_str()));
    let (ok, detail) = all_pass(&rates);
    Outcome {
        id: 14,
        title: "trace consistency",
        pass: ok && covers && worst <= 1e-12,
        detail: format!("|tr T_k(u)| <= {worst:.2e}; {detail}"),
    }
}

fn main() -> ExitCode {
    let reports = run_suite(&SuiteConfig::default()).expect("default suite runs");
    let outcomes = vec![
        criterion_1(&reports),
        criterion_2(),
        criterion_3(&reports),
        criterion_4(&reports),
        criterion_5(&reports),
        criterion_6(&reports),
        criterion_7(&reports),
        criterion_8(&reports),
        criterion_9(&reports),
        criterion_10(&reports),
        criterion_11(&reports),
        criterion_12(&reports),
        criterion_13(),
        criterion_14(&reports),
    ];
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {}: {}", o.id, o.title, o.detail);
        if o.pass == KNOWN_RED.contains(&o.id) {
            unexpected.push(o.id);
        }
    }
    for r in reports.iter().filter(|r| r.verdict == Verdict::Invalid) {
        println!("INVALID {}", summarize(r));
        unexpected.push(0);
    }
    println!("known red: {KNOWN_RED:?}");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
