//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use lattice_smooth::dependence::{check_condition, mixing_profile, ConditionId, ConditionParams, Verdict};
use lattice_smooth::experiment::{
    csv_string, reference_grid, run_bias_study, run_rate_study, run_variance_study, variance_oracle, ExperimentConfig,
    RateReport, StudyVerdict,
};
use lattice_smooth::field_gen::LinearCoefficient;
use lattice_smooth::orlicz::{c_k_coefficient, luxemburg_norm};
use lattice_smooth::{
    generate, BandwidthSchedule, EstimationProblem, EvalGrid, GeneratorSpec, InnovationLaw, KernelSpec, LatticeShape,
    LinkFunction, MarginalSpec,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).expect("acceptance config parses")
}

fn study_json(d: usize, ns: &str, generator: &str, replications: usize, seed: u64) -> String {
    format!(
        r#"{{"d":{d},"n_values":{ns},"generator":{generator},"kernel":{{"kind":"uniform"}},
            "bandwidth":{{"form":"optimal_as"}},
            "regression":{{"function":{{"kind":"affine","slope":1.0}},"lipschitz":1.0}},
            "replications":{replications},"seed":{seed}}}"#
    )
}

const MD_SIGN: &str = r#"{"kind":"md_neighbor","innovation":{"law":"rademacher"},"link":{"kind":"sign"}}"#;
const LINEAR: &str = r#"{"kind":"linear","innovation":{"law":"gaussian","sigma":1.0},
    "coefficients":[{"offset":[0],"value":1.0},{"offset":[1],"value":0.5}]}"#;
const SEED: u64 = 20240601;

fn linear_2d() -> GeneratorSpec {
    GeneratorSpec::Linear {
        innovation: InnovationLaw::gaussian(1.0),
        coefficients: vec![LinearCoefficient::new(vec![0, 0], 1.0), LinearCoefficient::new(vec![1, 0], 0.5)],
    }
}

fn bias_bound() -> Outcome {
    let mut worst = 0.0f64;
    let mut pass = true;
    for (d, ns) in [(1, "[10, 100, 1000]"), (2, "[16, 64]")] {
        let report = run_bias_study(&config(&study_json(d, ns, MD_SIGN, 1, 1))).expect("bias study runs");
        let functions: BTreeSet<&str> = report.entries.iter().map(|e| e.function.as_str()).collect();
        let expected_points = if d == 1 { 401 } else { 61 * 61 };
        pass &= report.verdict == StudyVerdict::Pass && functions.len() >= 3 && report.grid_points == expected_points;
        worst = report.entries.iter().fold(worst, |m, e| m.max(e.ratio));
    }
    outcome(pass, format!("max |bias|/h = {worst:.6} <= B = 1"))
}

fn envelope() -> Outcome {
    let mut pass = true;
    let mut max_gap = 0.0f64;
    let optimal = |n: usize, d: usize| BandwidthSchedule::OptimalAs.bandwidth(n, d);
    let cases: Vec<(usize, usize, f64, usize)> = vec![
        (1, 10, optimal(10, 1), 400),
        (1, 100, optimal(100, 1), 400),
        (1, 1000, optimal(1000, 1), 400),
        (1, 64, 0.25, 400),
        (2, 16, optimal(16, 2), 60),
        (2, 64, optimal(64, 2), 60),
        (2, 32, 0.2, 60),
    ];
    for (d, n, h, divisions) in cases {
        for kernel in [KernelSpec::uniform(d).unwrap(), KernelSpec::pedestal(d, 1.0, 1.0).unwrap()] {
            let problem = EstimationProblem::new(LatticeShape::new(d, n).unwrap(), kernel.clone(), h).unwrap();
            for x in EvalGrid::uniform(divisions, d).unwrap().points() {
                let env = problem.weight_envelope(&x).unwrap();
                pass &= env.lower <= env.sum && env.sum <= env.upper && env.sum <= env.product_upper;
                if n <= 64 {
                    let brute: f64 = problem
                        .shape()
                        .indices()
                        .map(|i| {
                            let u: Vec<f64> =
                                x.iter().zip(&i).map(|(xk, ik)| (xk - *ik as f64 / n as f64) / h).collect();
                            kernel.eval(&u)
                        })
                        .sum();
                    let gap = (brute - env.sum).abs();
                    max_gap = max_gap.max(gap);
                    pass &= gap <= 1e-12;
                }
            }
        }
    }
    outcome(pass, format!("envelope holds; windowed vs full-lattice max gap = {max_gap:.2e}"))
}

fn variance_oracle_check() -> Outcome {
    let mut pass = true;
    let mut max_ratio = 0.0f64;
    let mut iid_error = 0.0f64;
    let linear_1d = GeneratorSpec::linear_1d(InnovationLaw::gaussian(1.0), &[1.0, 0.5]);
    let iid = GeneratorSpec::Iid { innovation: InnovationLaw::gaussian(1.3) };
    for (d, linear) in [(1usize, linear_1d), (2, linear_2d())] {
        let grid = reference_grid(d).unwrap();
        for n in [8usize, 16, 32, 64] {
            let h = BandwidthSchedule::OptimalAs.bandwidth(n, d).max(2.0 / n as f64 + 1e-9);
            let problem =
                EstimationProblem::new(LatticeShape::new(d, n).unwrap(), KernelSpec::uniform(d).unwrap(), h).unwrap();
            let report = variance_oracle(&problem, &linear, &grid).unwrap();
            pass &= report.holds && report.covariance_sum == 2.25;
            max_ratio = max_ratio.max(report.max_ratio);
            let iid_report = variance_oracle(&problem, &iid, &grid).unwrap();
            let err = iid_report.iid_equality_error.expect("iid equality path");
            iid_error = iid_error.max(err);
            pass &= iid_report.holds && err <= 1e-10;
        }
    }
    outcome(pass, format!("max E S^2 / (2.25 sum a) = {max_ratio:.4}; iid equality error = {iid_error:.2e}"))
}

fn variance_rate() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, generator) in [("md", MD_SIGN), ("linear", LINEAR)] {
        let cfg = config(&study_json(1, "[512, 1024, 2048, 4096, 8192]", generator, 200, SEED));
        let report = run_variance_study(&cfg).expect("variance study runs");
        let slope = report.fit.map(|f| f.slope).unwrap_or(f64::NAN);
        pass &= report.verdict == StudyVerdict::Pass && (-0.6..=-0.4).contains(&slope);
        detail.push(format!("{name} slope {slope:.3}"));
    }
    outcome(pass, detail.join(", "))
}

fn rate_config_d1() -> ExperimentConfig {
    config(&study_json(1, "[512, 1024, 2048, 4096, 8192, 16384]", MD_SIGN, 100, SEED))
}

fn slope(report: &RateReport) -> f64 {
    report.fit.map(|f| f.slope).unwrap_or(f64::NAN)
}

fn sup_rate() -> Outcome {
    let d1 = run_rate_study(&rate_config_d1()).expect("d=1 rate study runs");
    let d2 = run_rate_study(&config(&study_json(2, "[32, 64, 128, 256]", MD_SIGN, 50, SEED)))
        .expect("d=2 rate study runs");
    let (s1, s2) = (slope(&d1), slope(&d2));
    let pass = d1.verdict == StudyVerdict::Pass
        && d2.verdict == StudyVerdict::Pass
        && (s1 - 1.0 / 3.0).abs() <= 0.12
        && (s2 - 0.25).abs() <= 0.12
        && d1.monotone_fraction >= 0.9;
    outcome(
        pass,
        format!("d=1 slope {s1:.3} (1/3), d=2 slope {s2:.3} (1/4), d=1 monotone fraction {:.2}", d1.monotone_fraction),
    )
}

fn orlicz_golden() -> Outcome {
    let mut pass = true;
    for a in [0.5, 1.0, 3.0] {
        let v = luxemburg_norm(&MarginalSpec::PointMass { mass: a }, 2.0, 1e-12).unwrap();
        pass &= (v - a / 2f64.ln().sqrt()).abs() <= 1e-8;
    }
    let gauss = MarginalSpec::Gaussian { sigma: 1.0 };
    let g = luxemburg_norm(&gauss, 2.0, 1e-12).unwrap();
    pass &= (g - (8.0f64 / 3.0).sqrt()).abs() <= 1e-6;
    let laws = [
        gauss.clone(),
        MarginalSpec::Uniform { half_width: 1.0 },
        MarginalSpec::Empirical { sample: vec![-1.5, 0.2, 0.7, 2.0, -0.1] },
    ];
    for z in &laws {
        pass &= c_k_coefficient(z, 0.0, 2.0, 1e-12).unwrap() == 0.0;
    }
    let ck = c_k_coefficient(&MarginalSpec::PointMass { mass: 1.0 }, 0.1, 2.0, 1e-12).unwrap();
    pass &= (ck - 1.0 / 11f64.ln().sqrt()).abs() <= 1e-6;
    let mut homogeneity = 0.0f64;
    for z in &laws {
        for beta in [1.0, 2.0] {
            let base = luxemburg_norm(z, beta, 1e-13).unwrap();
            for lambda in [0.5, 2.0, 3.7] {
                let scaled = luxemburg_norm(&z.scaled(lambda), beta, 1e-13).unwrap();
                homogeneity = homogeneity.max((scaled - lambda * base).abs());
            }
        }
    }
    pass &= homogeneity <= 1e-8;
    outcome(pass, format!("gaussian norm {g:.9}, c_k {ck:.9}, homogeneity error {homogeneity:.2e}"))
}

/// Pearson correlation with its large-sample standard error `1/sqrt(N)`.
fn correlation(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    (sxy / (sxx * syy).sqrt(), 1.0 / n.sqrt())
}

/// Correlation between squared-value sums over two width-2 blocks along the
/// first axis whose nearest sites are `gap` apart. Samples are spaced so that
/// distinct pairs are independent.
fn block_correlation(spec: &GeneratorSpec, d: usize, gap: i64, n: usize, seed: u64) -> (f64, f64) {
    let field = generate(spec, LatticeShape::new(d, n).unwrap(), seed).unwrap();
    let stride = 4 + gap + spec.dependence_radius(d) + 1;
    let block = |start: i64, rest: &[i64]| -> f64 {
        (0..2)
            .map(|k| {
                let mut i = vec![start + k];
                i.extend_from_slice(rest);
                field.at(&i).unwrap().powi(2)
            })
            .sum()
    };
    let rows: Vec<Vec<i64>> = if d == 1 { vec![vec![]] } else { (1..=n as i64).step_by(2).map(|r| vec![r]).collect() };
    let mut pairs = Vec::new();
    for rest in &rows {
        let mut s = 1i64;
        while s + 3 + gap <= n as i64 {
            pairs.push((block(s, rest), block(s + 1 + gap, rest)));
            s += stride;
        }
    }
    correlation(&pairs)
}

fn dependence_checkers() -> Outcome {
    let mut pass = true;
    let params = ConditionParams { q: Some(1.0), p: Some(4.0), ..ConditionParams::default() };
    let md = GeneratorSpec::MdNeighbor { innovation: InnovationLaw::Rademacher, link: LinkFunction::Sign };
    for d in [1, 2] {
        for id in [ConditionId::C1, ConditionId::C2, ConditionId::C3] {
            let report = check_condition(id, &md, d, &params).unwrap();
            pass &= report.sum == Some(0.0) && report.verdict == Verdict::HoldsExact;
        }
    }
    let linear = GeneratorSpec::linear_1d(InnovationLaw::gaussian(1.0), &[1.0, 0.5]);
    let c4 = check_condition(ConditionId::C4, &linear, 1, &params).unwrap();
    pass &= c4.sum == Some(2.25) && c4.verdict == Verdict::HoldsExact;

    let tanh = GeneratorSpec::MdNeighbor { innovation: InnovationLaw::gaussian(1.0), link: LinkFunction::Tanh };
    let mut worst_z = 0.0f64;
    let mut near_z = 0.0f64;
    for (k, (d, spec, n)) in [(1usize, &tanh, 400_000usize), (2, &tanh, 800), (1, &linear, 400_000)].into_iter().enumerate() {
        let profile = mixing_profile(spec, d).unwrap();
        let r = profile.radius + 1;
        let (alpha, phi) = (profile.alpha_1_inf(r), profile.phi_inf_1(r));
        pass &= alpha.value == 0.0 && alpha.exact && phi.value == 0.0 && phi.exact;
        let (corr, se) = block_correlation(spec, d, r, n, 77 + k as u64);
        worst_z = worst_z.max(corr.abs() / se);
        if k == 0 {
            let (near, near_se) = block_correlation(spec, d, profile.radius, n, 70);
            near_z = near / near_se;
        }
    }
    pass &= worst_z <= 4.0;
    outcome(
        pass,
        format!(
            "C4 = {}; block correlation beyond radius max |z| = {worst_z:.2} (within radius z = {near_z:.1})",
            c4.sum.unwrap_or(f64::NAN)
        ),
    )
}

fn determinism() -> Outcome {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| csv_string(&run_rate_study(&rate_config_d1()).unwrap().csv_rows()).unwrap())
    };
    let first = run(1);
    let second = run(4);
    let pass = first == second && first.lines().count() > 600;
    outcome(pass, format!("{} CSV bytes identical across runs with 1 and 4 workers", first.len()))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 8] = [
        ("bias bound", bias_bound, Duration::from_secs(10)),
        ("weight-sum envelope", envelope, Duration::from_secs(600)),
        ("variance oracle", variance_oracle_check, Duration::from_secs(600)),
        ("variance rate", variance_rate, Duration::from_secs(120)),
        ("sup-norm rate", sup_rate, Duration::from_secs(900)),
        ("orlicz golden values", orlicz_golden, Duration::from_secs(600)),
        ("dependence checkers", dependence_checkers, Duration::from_secs(600)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failures = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= *budget;
        failures += usize::from(!pass);
        println!(
            "{} criterion {} ({name}): {} [{:.1}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
